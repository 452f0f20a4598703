#pragma once

#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "blochspec/fredholm.hpp"

namespace blochspec {

// Analytic function sampled in (log |f|, arg f) form.
using AnalyticFn = std::function<EvansValue(cplx)>;

// Wraps an ordinary complex-valued function.
AnalyticFn log_form(std::function<cplx(cplx)> f);

struct Circle {
  cplx center;
  double radius = 1.0;
};

struct Rectangle {
  cplx lo;  // lower-left corner
  cplx hi;  // upper-right corner

  double width() const { return hi.real() - lo.real(); }
  double height() const { return hi.imag() - lo.imag(); }
  cplx center() const { return 0.5 * (lo + hi); }
};

struct Contour {
  std::variant<Circle, Rectangle> shape;
  int samples = 64;  // initial samples, >= 16
};

struct WindingOptions {
  double max_phase_step = kPi / 2;   // refine until every increment is below this
  int sample_budget = 1 << 16;        // per contour
  double zero_log_threshold = -20.0;  // log|f| below this on the contour is a hit
  double integer_residual = 0.05;
  // An interval is also split when f(midpoint) is farther than this multiple of
  // min |f| from the chord between the endpoint values.
  double midpoint_deviation = 0.5;
  // A phase jump still unresolved on an interval shorter than this fraction of
  // the path is reported as a zero on the contour.
  double min_interval = 1e-12;
};

struct WindingReport {
  int winding = 0;
  double min_log_modulus = 0.0;  // min over samples of log |f|
  int refinements = 0;
  int samples_used = 0;
  double residual = 0.0;          // |total / 2 pi - winding|
};

// f passes (numerically) through zero on the contour.
class ContourThroughZeroError : public NumericalError {
 public:
  ContourThroughZeroError(const std::string& what, cplx location, double suggested_radius)
      : NumericalError(what), location(location), suggested_radius(suggested_radius) {}
  cplx location;
  double suggested_radius;  // for circles: a jittered radius to retry with
};

class WindingNonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Argument-principle count of zeros of f inside the contour (with multiplicity).
WindingReport winding_number(const AnalyticFn& f, const Contour& contour,
                             const WindingOptions& options = {});

// Retries a circle with radii r(1 +- 1e-3), r(1 +- 2e-3) when it hits a zero.
WindingReport winding_number_jittered(const AnalyticFn& f, Circle circle, int samples = 64,
                                      const WindingOptions& options = {});

struct Root {
  cplx location;
  int multiplicity = 0;
  double box_size = 0.0;
};

struct LocalizeOptions {
  WindingOptions winding;
  int edge_samples = 4;       // initial samples per rectangle edge
  int refine_iterations = 12;  // secant steps inside a minimal box
  int boundary_retries = 5;
};

struct LocalizeResult {
  std::vector<Root> roots;
  int region_winding = 0;
  Rectangle region;  // the region actually used (after boundary perturbation)
};

// Quadrisection driven by rectangle winding numbers. The region boundary uses
// the zero threshold of options.winding; interior split lines only treat exact
// zeros and unresolvable phase jumps as hits, so boxes can close in on
// multiple roots where |f| is tiny. Boxes with winding 0 are dropped; boxes whose larger side is below min_box are reported with their
// winding as multiplicity and a secant-refined location. A box with winding 1
// is first tried by secant iteration; the result is accepted once a box of side
// min_box / 2 around it has winding 1. The multiplicities always sum to the
// region winding.
LocalizeResult localize_roots(const AnalyticFn& f, const Rectangle& region, double min_box,
                              const LocalizeOptions& options = {});

struct MatchReport {
  std::vector<std::pair<int, int>> pairs;  // indices into the inputs
  double max_distance = 0.0;               // over matched pairs
  double hausdorff = 0.0;                  // between the restricted sets
  int unmatched_a = 0;
  int unmatched_b = 0;
  int count_a = 0;  // points inside the disk
  int count_b = 0;
};

// Minimum total distance pairing (Hungarian assignment) of the points of a and
// b inside |z| <= R. Unmatched points are counted, not thrown.
MatchReport match_spectra(std::span<const cplx> a, std::span<const cplx> b, double R);

}  // namespace blochspec
