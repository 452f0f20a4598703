#include "blochspec/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blochspec/hill.hpp"
#include "blochspec/parallel.hpp"

namespace blochspec {

namespace {

double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

double nearest(cplx z, const std::vector<cplx>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (cplx p : points) best = std::min(best, std::abs(z - p));
  return best;
}

void check_levels(const std::vector<int>& J_values, int J_ref) {
  if (J_values.empty()) throw DomainError("convergence: J list is empty");
  for (std::size_t i = 0; i < J_values.size(); ++i) {
    if (J_values[i] < 1) throw DomainError("convergence: J values must be >= 1");
    if (i > 0 && J_values[i] <= J_values[i - 1])
      throw DomainError("convergence: J values must be strictly increasing");
  }
  if (J_ref < 2 * J_values.back())
    throw DomainError("convergence: J_ref = " + std::to_string(J_ref) + " must be >= 2 max(J) = " +
                      std::to_string(2 * J_values.back()));
}

EvansVariant variant_for(const OperatorSpec& spec) {
  return spec.has_identity_principal() ? EvansVariant::standard : EvansVariant::principal;
}

}  // namespace

std::optional<double> fit_rate(const std::vector<int>& J_values, const std::vector<double>& errors) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < J_values.size() && i < errors.size(); ++i) {
    if (!(errors[i] >= kErrorFloor) || !std::isfinite(errors[i])) continue;
    xs.push_back(std::log(static_cast<double>(J_values[i])));
    ys.push_back(std::log(errors[i]));
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

double log_form_distance(const EvansValue& a, const EvansValue& b) {
  const double ninf = -std::numeric_limits<double>::infinity();
  if (a.log_mag == ninf && b.log_mag == ninf) return 0.0;
  const double scale = std::max(a.log_mag, b.log_mag);
  const cplx za = a.log_mag == ninf ? cplx(0.0) : std::polar(std::exp(a.log_mag - scale), a.phase);
  const cplx zb = b.log_mag == ninf ? cplx(0.0) : std::polar(std::exp(b.log_mag - scale), b.phase);
  return std::exp(scale) * std::abs(za - zb);
}

std::vector<cplx> probe_set(int count, double R, std::uint64_t seed, const std::vector<cplx>& avoid,
                            double min_distance) {
  if (count < 0 || !(R > 0.0)) throw DomainError("probe_set: need count >= 0 and R > 0");
  std::vector<cplx> probes;
  const std::uint64_t start = 1 + seed * 1009;
  const std::uint64_t limit = start + 1000 * static_cast<std::uint64_t>(count + 1);
  for (std::uint64_t i = start; static_cast<int>(probes.size()) < count && i < limit; ++i) {
    const double r = R * std::sqrt(halton(i, 2));
    const double theta = kTwoPi * halton(i, 3);
    const cplx z = std::polar(r, theta);
    if (nearest(z, avoid) >= min_distance) probes.push_back(z);
  }
  if (static_cast<int>(probes.size()) < count)
    throw DomainError("probe_set: could not place " + std::to_string(count) +
                      " probes away from the excluded points");
  return probes;
}

ConvergenceReport evans_convergence(const OperatorSpec& spec, double sigma,
                                    const std::vector<int>& J_values, int J_ref,
                                    const std::vector<cplx>& probe_lambdas, int threads) {
  check_levels(J_values, J_ref);
  const OperatorSpec div = to_divergence_form(spec);
  ConvergenceReport report;
  report.J_values = J_values;
  report.J_ref = J_ref;
  report.sigma = sigma;

  const std::vector<cplx> ref_eigs = eigenvalues(assemble_matrix(div, sigma, J_ref));
  for (cplx p : probe_lambdas) {
    report.R = std::max(report.R, std::abs(p));
    if (nearest(p, ref_eigs) < 0.1) {
      report.notes.push_back("probe (" + std::to_string(p.real()) + ", " + std::to_string(p.imag()) +
                             ") rejected: within 0.1 of a reference eigenvalue");
      continue;
    }
    report.probes.push_back(p);
  }
  if (report.probes.empty()) throw DomainError("evans_convergence: no usable probe points");

  const EvansVariant variant = variant_for(div);
  const EvansFunction ref_fn(div, sigma, J_ref, variant, Det2Path::factorization);
  std::vector<EvansValue> ref(report.probes.size());
  parallel_for(ref.size(), threads, [&](std::size_t i) { ref[i] = ref_fn(report.probes[i]); });

  report.evans_errors.assign(J_values.size(), 0.0);
  parallel_for(J_values.size(), threads, [&](std::size_t j) {
    const EvansFunction fn(div, sigma, J_values[j], variant, Det2Path::factorization);
    double worst = 0.0;
    for (std::size_t i = 0; i < report.probes.size(); ++i)
      worst = std::max(worst, log_form_distance(fn(report.probes[i]), ref[i]));
    report.evans_errors[j] = worst;
  });

  report.exact = std::all_of(report.evans_errors.begin(), report.evans_errors.end(),
                             [](double e) { return e < kErrorFloor; });
  if (!report.exact) report.fitted_rate = fit_rate(J_values, report.evans_errors);
  return report;
}

ConvergenceReport spectral_convergence(const OperatorSpec& spec, double sigma,
                                       const std::vector<int>& J_values, int J_ref, double R,
                                       int threads) {
  check_levels(J_values, J_ref);
  if (!(R > 0.0)) throw DomainError("spectral_convergence: R must be positive");
  const OperatorSpec div = to_divergence_form(spec);
  ConvergenceReport report;
  report.J_values = J_values;
  report.J_ref = J_ref;
  report.sigma = sigma;

  const std::vector<cplx> ref = eigenvalues(assemble_matrix(div, sigma, J_ref));

  // Keep the circle |lambda| = R away from the reference spectrum.
  constexpr double kClearance = 0.05;
  constexpr int kMaxAdjust = 10;
  double radius = R;
  bool placed = false;
  for (int attempt = 0; attempt <= kMaxAdjust; ++attempt) {
    const int step = (attempt + 1) / 2;
    const double sign = attempt % 2 == 1 ? 1.0 : -1.0;
    radius = attempt == 0 ? R : R * (1.0 + sign * 0.01 * step);
    const bool clear = std::all_of(ref.begin(), ref.end(), [&](cplx z) {
      return std::abs(std::abs(z) - radius) >= kClearance;
    });
    if (clear) {
      placed = true;
      break;
    }
  }
  if (!placed)
    throw ConfigError("spectral_convergence: could not place |lambda| = R at distance 0.05 from the "
                      "reference spectrum after 10 adjustments of R = " + std::to_string(R));
  if (radius != R)
    report.notes.push_back("R adjusted from " + std::to_string(R) + " to " + std::to_string(radius));
  report.R = radius;

  std::vector<std::vector<cplx>> spectra(J_values.size());
  parallel_for(J_values.size(), threads, [&](std::size_t j) {
    spectra[j] = eigenvalues(assemble_matrix(div, sigma, J_values[j]));
  });
  for (std::size_t j = 0; j < J_values.size(); ++j) {
    const MatchReport match = match_spectra(spectra[j], ref, radius);
    double error = match.max_distance;
    if (match.unmatched_a != 0 || match.unmatched_b != 0) {
      error = std::max(error, match.hausdorff);
      report.notes.push_back("J=" + std::to_string(J_values[j]) + ": " +
                             std::to_string(match.unmatched_a) + " unmatched, reference " +
                             std::to_string(match.unmatched_b) + " unmatched");
    }
    report.spectral_errors.push_back(error);
  }
  report.exact = std::all_of(report.spectral_errors.begin(), report.spectral_errors.end(),
                             [](double e) { return e < kErrorFloor; });
  if (!report.exact) report.fitted_rate = fit_rate(J_values, report.spectral_errors);

  // Multiplicity stabilisation around clusters of the reference spectrum.
  std::vector<cplx> inside;
  for (cplx z : ref)
    if (std::abs(z) <= radius) inside.push_back(z);
  std::vector<bool> used(inside.size(), false);
  const EvansVariant variant = variant_for(div);
  std::vector<int> levels;
  for (std::size_t j = J_values.size() >= 2 ? J_values.size() - 2 : 0; j < J_values.size(); ++j)
    levels.push_back(J_values[j]);
  std::vector<EvansFunction> fns;
  for (int J : levels) fns.emplace_back(div, sigma, J, variant, Det2Path::factorization);

  for (std::size_t i = 0; i < inside.size(); ++i) {
    if (used[i]) continue;
    const double cluster_tol = 1e-6 * std::max(1.0, std::abs(inside[i]));
    MultiplicityCheck check;
    check.center = inside[i];
    std::vector<cplx> members;
    for (std::size_t k = i; k < inside.size(); ++k) {
      if (!used[k] && std::abs(inside[k] - inside[i]) <= cluster_tol) {
        used[k] = true;
        members.push_back(inside[k]);
      }
    }
    check.expected = static_cast<int>(members.size());
    double separation = std::numeric_limits<double>::infinity();
    for (cplx z : ref)
      if (std::abs(z - inside[i]) > cluster_tol) separation = std::min(separation, std::abs(z - inside[i]));
    check.radius = std::min(0.05, 0.5 * separation);
    for (const EvansFunction& fn : fns) {
      const AnalyticFn f = [&fn](cplx z) { return fn(z); };
      check.windings.push_back(winding_number_jittered(f, {check.center, check.radius}).winding);
    }
    if (std::adjacent_find(check.windings.begin(), check.windings.end(), std::not_equal_to<>()) !=
        check.windings.end())
      report.multiplicities_stable = false;
    report.multiplicities.push_back(std::move(check));
  }
  return report;
}

}  // namespace blochspec
