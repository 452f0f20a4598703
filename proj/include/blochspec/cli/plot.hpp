#pragma once

#include <string>
#include <vector>

#include "blochspec/cli/config.hpp"
#include "blochspec/convergence.hpp"
#include "blochspec/hill.hpp"

namespace blochspec::cli {

// log |D| sampled on a lambda grid, row-major with Im lambda outermost.
struct EvansGrid {
  LambdaGrid grid;
  std::vector<double> log_mag;
  double sigma = 0.0;
  int J = 0;
};

// Deterministic SVG documents (fixed sizes and fonts, no timestamps).
// Each throws DomainError on an empty result.

// Re lambda against sigma for every successful sweep point.
std::string band_structure_svg(const SpectrumResult& result, double period);
// Heat map of log |D| over the grid.
std::string evans_landscape_svg(const EvansGrid& grid);
// log10 error against log10 J with fitted lines and slope annotations.
std::string convergence_svg(const ConvergenceReport* evans, const ConvergenceReport* spectral);

}  // namespace blochspec::cli
