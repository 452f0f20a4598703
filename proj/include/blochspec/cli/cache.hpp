#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "blochspec/cli/output.hpp"

namespace blochspec::cli {

// Environment variable naming the cache directory.
inline constexpr const char* kCacheEnv = "BLOCHSPEC_CACHE_DIR";

struct CachedRun {
  int status = 0;
  Artifacts files;
};

// Content-addressed store of run outputs keyed by the config hash (which
// already folds in the version tag). Each entry is a directory holding the
// files and a manifest with the version tag and per-file SHA-256; entries
// whose manifest does not verify are treated as misses.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path root);

  // $BLOCHSPEC_CACHE_DIR, else $XDG_CACHE_HOME/blochspec, else ~/.cache/blochspec.
  static std::filesystem::path default_root();

  const std::filesystem::path& root() const { return root_; }

  std::optional<CachedRun> load(const std::string& key) const;
  void store(const std::string& key, const CachedRun& run) const;

 private:
  std::filesystem::path root_;
};

}  // namespace blochspec::cli
