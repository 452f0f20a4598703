#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace blochspec::cli {

// File name -> content for one run.
using Artifacts = std::map<std::string, std::string>;

// Round-trip decimal form ("%.17g"); infinities as "inf" / "-inf".
std::string fmt(double x);

// Writes to a temporary sibling and renames it into place, so readers see
// either the old file or the complete new one.
void atomic_write(const std::filesystem::path& path, const std::string& content);

void write_artifacts(const std::filesystem::path& dir, const Artifacts& files);

}  // namespace blochspec::cli
