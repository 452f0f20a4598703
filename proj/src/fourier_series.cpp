#include "blochspec/fourier_series.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace blochspec {

namespace {

// exp(2 pi i p / q) with the angle reduced exactly in integer arithmetic.
cplx unit_root(long long p, long long q) {
  long long r = p % q;
  if (r < 0) r += q;
  const double angle = kTwoPi * static_cast<double>(r) / static_cast<double>(q);
  return {std::cos(angle), std::sin(angle)};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

FourierSeries::FourierSeries(double period, int dim, int cutoff)
    : period_(period), dim_(dim), cutoff_(cutoff) {
  if (!(period > 0.0) || !std::isfinite(period)) throw DomainError("FourierSeries: period must be positive");
  if (dim < 1) throw DomainError("FourierSeries: dim must be >= 1");
  if (cutoff < 0) throw DomainError("FourierSeries: cutoff must be >= 0");
  zero_ = CMatrix::Zero(dim, dim);
  coeffs_.assign(2 * cutoff + 1, zero_);
}

FourierSeries::FourierSeries(double period, std::vector<CMatrix> coeffs)
    : period_(period), coeffs_(std::move(coeffs)) {
  if (!(period > 0.0) || !std::isfinite(period)) throw DomainError("FourierSeries: period must be positive");
  if (coeffs_.empty() || coeffs_.size() % 2 == 0)
    throw DomainError("FourierSeries: coefficient count must be odd (k = -M..M)");
  dim_ = static_cast<int>(coeffs_.front().rows());
  if (dim_ < 1) throw DomainError("FourierSeries: dim must be >= 1");
  for (const auto& c : coeffs_) {
    if (c.rows() != dim_ || c.cols() != dim_)
      throw DomainError("FourierSeries: all coefficients must be dim x dim");
  }
  cutoff_ = static_cast<int>(coeffs_.size() / 2);
  zero_ = CMatrix::Zero(dim_, dim_);
}

FourierSeries FourierSeries::constant(double period, const CMatrix& value) {
  return FourierSeries(period, std::vector<CMatrix>{value});
}

FourierSeries FourierSeries::scalar_constant(double period, cplx value) {
  return constant(period, CMatrix::Constant(1, 1, value));
}

FourierSeries FourierSeries::scalar(double period,
                                    std::initializer_list<std::pair<int, cplx>> terms) {
  int cutoff = 0;
  for (const auto& [k, v] : terms) cutoff = std::max(cutoff, std::abs(k));
  std::vector<CMatrix> coeffs(2 * cutoff + 1, CMatrix::Zero(1, 1));
  for (const auto& [k, v] : terms) coeffs[k + cutoff](0, 0) += v;
  return FourierSeries(period, std::move(coeffs));
}

const CMatrix& FourierSeries::coeff(int k) const {
  if (k < -cutoff_ || k > cutoff_) return zero_;
  return coeffs_[k + cutoff_];
}

CMatrix FourierSeries::evaluate(double x) const { return evaluate_derivative(x, 0); }

CMatrix FourierSeries::evaluate_derivative(double x, int order) const {
  CMatrix out = CMatrix::Zero(dim_, dim_);
  const double base = kTwoPi / period_;
  for (int k = -cutoff_; k <= cutoff_; ++k) {
    const CMatrix& c = coeffs_[k + cutoff_];
    if (c.isZero(0.0)) continue;
    const double xi = base * k;
    cplx factor = std::exp(kI * (xi * x));
    if (order > 0) factor *= std::pow(kI * xi, order);
    out += factor * c;
  }
  return out;
}

bool FourierSeries::is_real(double tol) const {
  for (int k = 0; k <= cutoff_; ++k) {
    if ((coeff(-k) - coeff(k).conjugate()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

bool FourierSeries::is_zero(double tol) const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [tol](const CMatrix& c) { return c.cwiseAbs().maxCoeff() <= tol; });
}

FourierSeries FourierSeries::with_cutoff(int cutoff) const {
  FourierSeries out(period_, dim_, cutoff);
  for (int k = -std::min(cutoff, cutoff_); k <= std::min(cutoff, cutoff_); ++k)
    out.coeffs_[k + cutoff] = coeff(k);
  return out;
}

FourierSeries FourierSeries::operator+(const FourierSeries& other) const {
  if (other.dim_ != dim_ || other.period_ != period_)
    throw DomainError("FourierSeries: period/dim mismatch in sum");
  FourierSeries out = with_cutoff(std::max(cutoff_, other.cutoff_));
  for (int k = -other.cutoff_; k <= other.cutoff_; ++k)
    out.coeffs_[k + out.cutoff_] += other.coeff(k);
  return out;
}

FourierSeries FourierSeries::operator-(const FourierSeries& other) const {
  return *this + other * cplx(-1.0);
}

FourierSeries FourierSeries::operator*(cplx factor) const {
  FourierSeries out = *this;
  for (auto& c : out.coeffs_) c *= factor;
  return out;
}

FourierSeries from_samples(std::span<const CMatrix> samples, double period, int cutoff) {
  if (samples.empty()) throw DomainError("from_samples: empty input");
  if (cutoff < 0) throw DomainError("from_samples: cutoff must be >= 0");
  const auto n_samples = static_cast<long long>(samples.size());
  if (n_samples < 2LL * cutoff + 1)
    throw DomainError("from_samples: " + std::to_string(n_samples) +
                      " samples cannot resolve cutoff " + std::to_string(cutoff) +
                      " (need at least 2*cutoff+1)");
  const auto dim = samples.front().rows();
  for (const auto& s : samples) {
    if (s.rows() != dim || s.cols() != dim)
      throw DomainError("from_samples: samples must be square matrices of equal size");
  }
  std::vector<cplx> roots(n_samples);
  for (long long r = 0; r < n_samples; ++r) roots[r] = unit_root(-r, n_samples);
  std::vector<CMatrix> coeffs(2 * cutoff + 1, CMatrix::Zero(dim, dim));
  for (int k = -cutoff; k <= cutoff; ++k) {
    CMatrix& c = coeffs[k + cutoff];
    for (Eigen::Index p = 0; p < dim; ++p) {
      for (Eigen::Index q = 0; q < dim; ++q) {
        cplx acc = 0.0;
        long long idx = 0;
        const long long step = ((k % n_samples) + n_samples) % n_samples;
        for (long long m = 0; m < n_samples; ++m) {
          acc += roots[idx] * samples[m](p, q);
          idx += step;
          if (idx >= n_samples) idx -= n_samples;
        }
        c(p, q) = acc / static_cast<double>(n_samples);
      }
    }
  }
  return FourierSeries(period, std::move(coeffs));
}

FourierSeries from_samples(std::span<const cplx> samples, double period, int cutoff) {
  std::vector<CMatrix> mats;
  mats.reserve(samples.size());
  for (cplx s : samples) mats.push_back(CMatrix::Constant(1, 1, s));
  return from_samples(std::span<const CMatrix>(mats), period, cutoff);
}

CMatrix toeplitz_block(const FourierSeries& series, int J) {
  if (J < 0) throw DomainError("toeplitz_block: J must be >= 0");
  const int n = series.dim();
  const int size = 2 * J + 1;
  CMatrix out = CMatrix::Zero(n * size, n * size);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const CMatrix& block = series.coeff(r - c);
      if (!block.isZero(0.0)) out.block(r * n, c * n, n, n) = block;
    }
  }
  return out;
}

double sobolev_tail(const FourierSeries& series, int J) {
  if (J < 1) throw DomainError("sobolev_tail: J must be >= 1");
  double tail = 0.0;
  for (int k = J; k <= series.cutoff(); ++k)
    tail += series.coeff(k).squaredNorm() + series.coeff(-k).squaredNorm();
  return tail;
}

double h1_norm(const FourierSeries& series) {
  double total = 0.0;
  for (int k = -series.cutoff(); k <= series.cutoff(); ++k) {
    const double xi = series.wavenumber(k);
    total += (1.0 + xi * xi) * series.coeff(k).squaredNorm();
  }
  return total;
}

FourierSeries derivative_series(const FourierSeries& series) {
  std::vector<CMatrix> coeffs;
  coeffs.reserve(2 * series.cutoff() + 1);
  for (int k = -series.cutoff(); k <= series.cutoff(); ++k)
    coeffs.push_back((kI * series.wavenumber(k)) * series.coeff(k));
  return FourierSeries(series.period(), std::move(coeffs));
}

FourierSeries truncate_decay(const FourierSeries& series, double rel) {
  double peak = 0.0;
  for (int k = -series.cutoff(); k <= series.cutoff(); ++k)
    peak = std::max(peak, series.coeff(k).norm());
  int keep = 0;
  for (int k = series.cutoff(); k > 0; --k) {
    if (series.coeff(k).norm() > rel * peak || series.coeff(-k).norm() > rel * peak) {
      keep = k;
      break;
    }
  }
  return series.with_cutoff(keep);
}

void write_table(std::ostream& out, const FourierSeries& series) {
  const int n = series.dim();
  out << "# blochspec-fourier v1\n";
  out << "# period " << std::setprecision(17) << series.period() << "\n";
  out << "# dim " << n << "\n";
  for (int k = -series.cutoff(); k <= series.cutoff(); ++k) {
    out << k;
    const CMatrix& c = series.coeff(k);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) out << ' ' << c(p, q).real() << ' ' << c(p, q).imag();
    out << '\n';
  }
}

FourierSeries read_table(std::istream& in) {
  double period = 0.0;
  int dim = 0;
  std::map<int, CMatrix> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "period") hs >> period;
      if (key == "dim") hs >> dim;
      continue;
    }
    if (dim < 1 || !(period > 0.0))
      throw DomainError("fourier table: '# period' and '# dim' headers must precede data (line " +
                        std::to_string(line_no) + ")");
    std::istringstream ls(line);
    int k = 0;
    if (!(ls >> k)) throw DomainError("fourier table: bad frequency at line " + std::to_string(line_no));
    CMatrix c(dim, dim);
    for (int p = 0; p < dim; ++p) {
      for (int q = 0; q < dim; ++q) {
        double re = 0.0, im = 0.0;
        if (!(ls >> re >> im))
          throw DomainError("fourier table: expected " + std::to_string(2 * dim * dim) +
                            " numbers after k at line " + std::to_string(line_no));
        c(p, q) = {re, im};
      }
    }
    std::string extra;
    if (ls >> extra) throw DomainError("fourier table: trailing data at line " + std::to_string(line_no));
    if (!rows.emplace(k, c).second)
      throw DomainError("fourier table: duplicate frequency " + std::to_string(k));
  }
  if (dim < 1 || !(period > 0.0)) throw DomainError("fourier table: missing headers");
  int cutoff = 0;
  for (const auto& [k, c] : rows) cutoff = std::max(cutoff, std::abs(k));
  std::vector<CMatrix> coeffs(2 * cutoff + 1, CMatrix::Zero(dim, dim));
  for (const auto& [k, c] : rows) coeffs[k + cutoff] = c;
  return FourierSeries(period, std::move(coeffs));
}

std::vector<CMatrix> read_samples(std::istream& in, int dim) {
  std::vector<CMatrix> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> values;
    double v = 0.0;
    while (ls >> v) values.push_back(v);
    if (!ls.eof()) throw DomainError("sample file: non-numeric data at line " + std::to_string(line_no));
    if (values.size() != static_cast<std::size_t>(2 * dim * dim))
      throw DomainError("sample file: line " + std::to_string(line_no) + " has " +
                        std::to_string(values.size()) + " numbers, expected " +
                        std::to_string(2 * dim * dim) + " for dim " + std::to_string(dim));
    CMatrix c(dim, dim);
    for (int p = 0; p < dim; ++p)
      for (int q = 0; q < dim; ++q) c(p, q) = {values[2 * (p * dim + q)], values[2 * (p * dim + q) + 1]};
    samples.push_back(std::move(c));
  }
  return samples;
}

}  // namespace blochspec
