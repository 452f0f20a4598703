#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blochspec/winding.hpp"

namespace blochspec {

// Errors below this are treated as exact and excluded from rate fits.
inline constexpr double kErrorFloor = 1e-12;

struct MultiplicityCheck {
  cplx center;
  double radius = 0.0;
  int expected = 0;           // eigenvalue count of the reference truncation in the circle
  std::vector<int> windings;  // one per checked J (the two largest)
};

struct ConvergenceReport {
  std::vector<int> J_values;
  int J_ref = 0;
  double sigma = 0.0;
  double R = 0.0;
  std::vector<cplx> probes;            // accepted probe points
  std::vector<double> evans_errors;    // sup over probes |D_J - D_ref|
  std::vector<double> spectral_errors; // matched eigenvalue distance inside |lambda| <= R
  std::optional<double> fitted_rate;   // slope of log error vs log J
  bool exact = false;                  // every error below kErrorFloor
  std::vector<MultiplicityCheck> multiplicities;
  bool multiplicities_stable = true;
  std::vector<std::string> notes;
};

// Least-squares slope of log(error) against log(J) over errors >= kErrorFloor.
// Empty if fewer than two points remain.
std::optional<double> fit_rate(const std::vector<int>& J_values, const std::vector<double>& errors);

// |exp(a) - exp(b)| for values in (log |z|, arg z) form, rescaled by the larger
// magnitude so neither exponential overflows first.
double log_form_distance(const EvansValue& a, const EvansValue& b);

// Deterministic quasi-random points in |lambda| <= R (Halton bases 2 and 3,
// offset by the seed), keeping at least min_distance from every point in avoid.
std::vector<cplx> probe_set(int count, double R, std::uint64_t seed,
                            const std::vector<cplx>& avoid = {}, double min_distance = 0.1);

// D_{sigma,J} -> D_{sigma,J_ref} at the probe points, J_ref >= 2 max J.
// Probes closer than 0.1 to an eigenvalue of the reference truncation are
// dropped with a note.
ConvergenceReport evans_convergence(const OperatorSpec& spec, double sigma,
                                    const std::vector<int>& J_values, int J_ref,
                                    const std::vector<cplx>& probe_lambdas, int threads = 1);

// Eigenvalues of L_{sigma,J} inside |lambda| <= R matched against the J_ref
// spectrum. R is nudged (up to 10 times) if its circle passes within 0.05 of a
// reference eigenvalue. Also checks that winding counts around each reference
// eigenvalue cluster agree for the two largest J.
ConvergenceReport spectral_convergence(const OperatorSpec& spec, double sigma,
                                       const std::vector<int>& J_values, int J_ref, double R,
                                       int threads = 1);

}  // namespace blochspec
