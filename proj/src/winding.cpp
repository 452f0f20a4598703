#include "blochspec/winding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace blochspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sample {
  double t;
  cplx z;
  EvansValue value;
};

struct PathTrace {
  double phase_change = 0.0;
  double min_log = kInf;
  int samples = 0;
  int refinements = 0;
};

std::string describe(cplx z) {
  std::ostringstream os;
  os.precision(10);
  os << "(" << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i)";
  return os.str();
}

// The midpoint strays from the chord by more than `ratio` times the smallest
// of the three moduli: a zero may lie close to the segment.
bool dips(const EvansValue& a, const EvansValue& m, const EvansValue& b, double ratio) {
  const double scale = std::max({a.log_mag, m.log_mag, b.log_mag});
  const cplx za = std::polar(std::exp(a.log_mag - scale), a.phase);
  const cplx zm = std::polar(std::exp(m.log_mag - scale), m.phase);
  const cplx zb = std::polar(std::exp(b.log_mag - scale), b.phase);
  const double smallest = std::min({std::abs(za), std::abs(zm), std::abs(zb)});
  return std::abs(zm - 0.5 * (za + zb)) > ratio * smallest;
}

// Phase change of f along z(t), t in [t0, t1], bisecting every interval whose
// wrapped phase increment reaches max_phase_step. An interval is accepted only
// when its two halves are also below the threshold and the midpoint value
// stays near the chord.
template <typename Path>
PathTrace trace_path(const AnalyticFn& f, const Path& path, double t0, double t1, int intervals,
                     const WindingOptions& options, double jitter_radius) {
  PathTrace trace;
  auto sample = [&](double t) {
    const cplx z = path(t);
    EvansValue v = f(z);
    ++trace.samples;
    if (trace.samples > options.sample_budget)
      throw WindingNonConvergence("winding_number: sample budget of " +
                                  std::to_string(options.sample_budget) +
                                  " exceeded near " + describe(z));
    if (std::isnan(v.log_mag) || std::isnan(v.phase))
      throw NumericalError("winding_number: function returned NaN at " + describe(z));
    trace.min_log = std::min(trace.min_log, v.log_mag);
    if (v.log_mag < options.zero_log_threshold || v.log_mag == -kInf)
      throw ContourThroughZeroError("winding_number: contour passes through a zero near " +
                                        describe(z) + " (log|f| = " + std::to_string(v.log_mag) +
                                        ")",
                                    z, jitter_radius);
    return Sample{t, z, std::move(v)};
  };

  std::vector<Sample> stack;
  Sample left = sample(t0);
  std::vector<Sample> pending;
  for (int i = intervals; i >= 1; --i)
    pending.push_back(sample(t0 + (t1 - t0) * static_cast<double>(i) / intervals));
  // pending holds right endpoints in reverse order; process left to right.
  const double min_length = options.min_interval * std::abs(t1 - t0);
  while (!pending.empty()) {
    Sample right = std::move(pending.back());
    pending.pop_back();
    if (std::abs(right.t - left.t) < min_length) {
      const cplx z = path(0.5 * (left.t + right.t));
      throw ContourThroughZeroError("winding_number: unresolved phase jump, contour passes through a zero near " +
                                        describe(z),
                                    z, jitter_radius);
    }
    const double step = wrap_phase(right.value.phase - left.value.phase);
    if (std::abs(step) < options.max_phase_step) {
      // Accept only if both halves agree and the midpoint stays near the chord;
      // this catches increments aliased by 2 pi.
      Sample mid = sample(0.5 * (left.t + right.t));
      const double s1 = wrap_phase(mid.value.phase - left.value.phase);
      const double s2 = wrap_phase(right.value.phase - mid.value.phase);
      if (std::abs(s1) < options.max_phase_step && std::abs(s2) < options.max_phase_step &&
          !dips(left.value, mid.value, right.value, options.midpoint_deviation)) {
        trace.phase_change += s1 + s2;
        left = std::move(right);
        continue;
      }
      pending.push_back(std::move(right));
      pending.push_back(std::move(mid));
    } else {
      pending.push_back(std::move(right));
      pending.push_back(sample(0.5 * (left.t + pending.back().t)));
    }
    ++trace.refinements;
  }
  return trace;
}

WindingReport finish(const PathTrace& trace, const WindingOptions& options) {
  WindingReport report;
  const double turns = trace.phase_change / kTwoPi;
  report.winding = static_cast<int>(std::lround(turns));
  report.residual = std::abs(turns - report.winding);
  report.min_log_modulus = trace.min_log;
  report.refinements = trace.refinements;
  report.samples_used = trace.samples;
  if (report.residual >= options.integer_residual)
    throw WindingNonConvergence("winding_number: accumulated phase is not an integer multiple of "
                                "2 pi (residual " + std::to_string(report.residual) + ")");
  return report;
}

PathTrace trace_segment(const AnalyticFn& f, cplx a, cplx b, int intervals,
                        const WindingOptions& options) {
  auto path = [a, b](double t) { return t == 1.0 ? b : a + t * (b - a); };
  return trace_path(f, path, 0.0, 1.0, intervals, options, 0.0);
}

}  // namespace

AnalyticFn log_form(std::function<cplx(cplx)> f) {
  return [f = std::move(f)](cplx z) {
    const cplx v = f(z);
    EvansValue out;
    out.lambda = z;
    out.log_mag = v == cplx(0.0) ? -kInf : std::log(std::abs(v));
    out.phase = std::arg(v);
    return out;
  };
}

WindingReport winding_number(const AnalyticFn& f, const Contour& contour,
                             const WindingOptions& options) {
  if (contour.samples < 16) throw DomainError("winding_number: contour needs at least 16 samples");
  if (const auto* circle = std::get_if<Circle>(&contour.shape)) {
    if (!(circle->radius > 0.0)) throw DomainError("winding_number: radius must be positive");
    const Circle c = *circle;
    auto path = [c](double t) {
      if (t == 1.0) t = 0.0;
      return c.center + std::polar(c.radius, kTwoPi * t);
    };
    return finish(trace_path(f, path, 0.0, 1.0, contour.samples, options, c.radius * (1.0 + 1e-3)),
                  options);
  }
  const Rectangle& r = std::get<Rectangle>(contour.shape);
  if (!(r.width() > 0.0) || !(r.height() > 0.0))
    throw DomainError("winding_number: degenerate rectangle");
  const cplx corners[4] = {r.lo, {r.hi.real(), r.lo.imag()}, r.hi, {r.lo.real(), r.hi.imag()}};
  const int per_edge = std::max(4, contour.samples / 4);
  PathTrace total;
  for (int e = 0; e < 4; ++e) {
    WindingOptions edge_options = options;
    edge_options.sample_budget = options.sample_budget - total.samples;
    const PathTrace edge = trace_segment(f, corners[e], corners[(e + 1) % 4], per_edge, edge_options);
    total.phase_change += edge.phase_change;
    total.min_log = std::min(total.min_log, edge.min_log);
    total.samples += edge.samples;
    total.refinements += edge.refinements;
  }
  return finish(total, options);
}

WindingReport winding_number_jittered(const AnalyticFn& f, Circle circle, int samples,
                                      const WindingOptions& options) {
  static constexpr double kJitter[] = {0.0, 1e-3, -1e-3, 2e-3, -2e-3};
  for (double jitter : kJitter) {
    try {
      return winding_number(f, {Circle{circle.center, circle.radius * (1.0 + jitter)}, samples},
                            options);
    } catch (const ContourThroughZeroError&) {
      if (jitter == kJitter[std::size(kJitter) - 1]) throw;
    }
  }
  throw WindingNonConvergence("winding_number_jittered: unreachable");
}

namespace {

// Rectangle windings with per-edge caching: children share edges, and a
// reversed edge contributes the negated phase change.
class BoxCounter {
 public:
  BoxCounter(const AnalyticFn& f, const LocalizeOptions& options)
      : f_(f), options_(options), interior_(options.winding) {
    interior_.zero_log_threshold = -kInf;
  }

  int winding(const Rectangle& r, bool boundary = false) {
    const cplx c[4] = {r.lo, {r.hi.real(), r.lo.imag()}, r.hi, {r.lo.real(), r.hi.imag()}};
    double total = 0.0;
    for (int e = 0; e < 4; ++e)
      total += edge(c[e], c[(e + 1) % 4], boundary ? options_.winding : interior_);
    const double turns = total / kTwoPi;
    const int w = static_cast<int>(std::lround(turns));
    if (std::abs(turns - w) >= options_.winding.integer_residual)
      throw WindingNonConvergence("localize_roots: non-integer winding on box " + describe(r.lo) +
                                  "-" + describe(r.hi));
    return w;
  }

 private:
  using Key = std::pair<std::pair<double, double>, std::pair<double, double>>;

  double edge(cplx a, cplx b, const WindingOptions& winding) {
    const Key forward{{a.real(), a.imag()}, {b.real(), b.imag()}};
    if (auto it = cache_.find(forward); it != cache_.end()) return it->second;
    const Key backward{forward.second, forward.first};
    if (auto it = cache_.find(backward); it != cache_.end()) return -it->second;
    const double phase =
        trace_segment(f_, a, b, options_.edge_samples, winding).phase_change;
    cache_.emplace(forward, phase);
    return phase;
  }

  const AnalyticFn& f_;
  const LocalizeOptions& options_;
  WindingOptions interior_;
  std::map<Key, double> cache_;
};

// Secant iteration on f normalised by its magnitude at the start point, with
// the multiplicity-corrected step. Empty if the iteration leaves the (doubled) box.
std::optional<cplx> refine_root(const AnalyticFn& f, const Rectangle& box, int multiplicity,
                                int iterations) {
  const cplx centre = box.center();
  const double size = std::max(box.width(), box.height());
  double ref = 0.0;
  auto g = [&](cplx z, bool& exact) {
    const EvansValue v = f(z);
    exact = v.log_mag == -kInf;
    if (exact) return cplx(0.0);
    return std::polar(std::exp(v.log_mag - ref), v.phase);
  };
  const EvansValue start = f(centre);
  if (start.log_mag == -kInf) return centre;
  ref = start.log_mag;
  bool exact = false;
  cplx z0 = centre;
  cplx g0 = g(z0, exact);
  cplx z1 = centre + 0.25 * size;
  cplx g1 = g(z1, exact);
  if (exact) return z1;
  for (int it = 0; it < iterations; ++it) {
    const cplx denom = g1 - g0;
    if (denom == cplx(0.0)) break;
    const cplx z2 = z1 - static_cast<double>(multiplicity) * g1 * (z1 - z0) / denom;
    if (!std::isfinite(z2.real()) || !std::isfinite(z2.imag())) break;
    if (std::abs(z2.real() - centre.real()) > box.width() ||
        std::abs(z2.imag() - centre.imag()) > box.height())
      return std::nullopt;
    const bool converged = std::abs(z2 - z1) <= 1e-15 * std::max(1.0, std::abs(z2));
    z0 = z1;
    g0 = g1;
    z1 = z2;
    g1 = g(z1, exact);
    if (exact || converged) break;
  }
  return z1;
}

constexpr double kSplitJitter[] = {0.0, 1e-3, -1e-3, 2e-3, -2e-3, 3e-3};

}  // namespace

LocalizeResult localize_roots(const AnalyticFn& f, const Rectangle& region, double min_box,
                              const LocalizeOptions& options) {
  if (!(region.width() > 0.0) || !(region.height() > 0.0))
    throw DomainError("localize_roots: degenerate region");
  if (!(min_box > 0.0)) throw DomainError("localize_roots: min_box must be positive");
  BoxCounter counter(f, options);
  LocalizeResult result;

  // Region boundary: grow by relative perturbations until it avoids zeros.
  bool found = false;
  for (int attempt = 0; attempt <= options.boundary_retries && !found; ++attempt) {
    const double grow = attempt * 1e-3;
    const cplx pad{grow * region.width(), grow * region.height()};
    const Rectangle r{region.lo - pad, region.hi + pad};
    try {
      result.region_winding = counter.winding(r, true);
      result.region = r;
      found = true;
    } catch (const ContourThroughZeroError& e) {
      if (attempt == options.boundary_retries)
        throw ContourThroughZeroError(std::string("localize_roots: region boundary hits a zero after ") +
                                          std::to_string(options.boundary_retries) +
                                          " perturbations: " + e.what(),
                                      e.location, 0.0);
    }
  }

  struct Pending {
    Rectangle box;
    int winding;
  };
  std::vector<Pending> stack;
  if (result.region_winding > 0) stack.push_back({result.region, result.region_winding});
  while (!stack.empty()) {
    const Pending current = stack.back();
    stack.pop_back();
    const Rectangle& box = current.box;
    if (std::max(box.width(), box.height()) < min_box) {
      const cplx z = refine_root(f, box, current.winding, options.refine_iterations).value_or(box.center());
      result.roots.push_back({z, current.winding, std::max(box.width(), box.height())});
      continue;
    }
    if (current.winding == 1) {
      // Isolated simple zero: jump to it by secant and confirm with a minimal box.
      const auto z = refine_root(f, box, 1, options.refine_iterations);
      const double h = 0.25 * min_box;
      if (z && z->real() - h > box.lo.real() && z->real() + h < box.hi.real() &&
          z->imag() - h > box.lo.imag() && z->imag() + h < box.hi.imag()) {
        const Rectangle tiny{*z - cplx(h, h), *z + cplx(h, h)};
        bool confirmed = false;
        try {
          confirmed = counter.winding(tiny) == 1;
        } catch (const ContourThroughZeroError&) {
        }
        if (confirmed) {
          result.roots.push_back({*z, 1, 2 * h});
          continue;
        }
      }
    }
    bool split = false;
    for (int attempt = 0; attempt < static_cast<int>(std::size(kSplitJitter)) && !split; ++attempt) {
      if (attempt > options.boundary_retries) break;
      const double s = kSplitJitter[attempt];
      const double cx = box.center().real() + s * box.width();
      const double cy = box.center().imag() + s * box.height();
      const Rectangle children[4] = {
          {box.lo, {cx, cy}},
          {{cx, box.lo.imag()}, {box.hi.real(), cy}},
          {{cx, cy}, box.hi},
          {{box.lo.real(), cy}, {cx, box.hi.imag()}},
      };
      try {
        int windings[4];
        int sum = 0;
        for (int c = 0; c < 4; ++c) {
          windings[c] = counter.winding(children[c]);
          sum += windings[c];
        }
        if (sum != current.winding) continue;
        // Push in reverse so children are processed in a fixed order.
        for (int c = 3; c >= 0; --c)
          if (windings[c] != 0) stack.push_back({children[c], windings[c]});
        split = true;
      } catch (const ContourThroughZeroError&) {
        continue;
      }
    }
    if (!split)
      throw ContourThroughZeroError("localize_roots: cannot split box " + describe(box.lo) + " - " +
                                        describe(box.hi) + " without a zero on a sub-box boundary",
                                    box.center(), 0.0);
  }
  std::sort(result.roots.begin(), result.roots.end(), [](const Root& a, const Root& b) {
    if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
    return a.location.imag() < b.location.imag();
  });
  return result;
}

namespace {

// Hungarian algorithm (shortest augmenting path); rows <= cols. Returns the
// column assigned to each row.
std::vector<int> assign(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const int m = n == 0 ? 0 : static_cast<int>(cost[0].size());
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

MatchReport match_spectra(std::span<const cplx> a, std::span<const cplx> b, double R) {
  std::vector<int> ia, ib;
  for (int i = 0; i < static_cast<int>(a.size()); ++i)
    if (std::abs(a[i]) <= R) ia.push_back(i);
  for (int i = 0; i < static_cast<int>(b.size()); ++i)
    if (std::abs(b[i]) <= R) ib.push_back(i);

  MatchReport report;
  report.count_a = static_cast<int>(ia.size());
  report.count_b = static_cast<int>(ib.size());

  const bool swap = ia.size() > ib.size();
  const auto& rows = swap ? ib : ia;
  const auto& cols = swap ? ia : ib;
  const auto& row_pts = swap ? b : a;
  const auto& col_pts = swap ? a : b;
  std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      cost[r][c] = std::abs(row_pts[rows[r]] - col_pts[cols[c]]);
  const std::vector<int> matched = assign(cost);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int c = matched[r];
    if (c < 0) continue;
    report.max_distance = std::max(report.max_distance, cost[r][c]);
    if (swap)
      report.pairs.emplace_back(cols[c], rows[r]);
    else
      report.pairs.emplace_back(rows[r], cols[c]);
  }
  std::sort(report.pairs.begin(), report.pairs.end());
  report.unmatched_a = report.count_a - static_cast<int>(report.pairs.size());
  report.unmatched_b = report.count_b - static_cast<int>(report.pairs.size());

  auto directed = [](std::span<const cplx> from, const std::vector<int>& fi,
                     std::span<const cplx> to, const std::vector<int>& ti) {
    double worst = 0.0;
    for (int i : fi) {
      double best = kInf;
      for (int j : ti) best = std::min(best, std::abs(from[i] - to[j]));
      worst = std::max(worst, best);
    }
    return worst;
  };
  if (ia.empty() != ib.empty())
    report.hausdorff = kInf;
  else
    report.hausdorff = std::max(directed(a, ia, b, ib), directed(b, ib, a, ia));
  return report;
}

}  // namespace blochspec
