#include "blochspec/cli/cache.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "blochspec/cli/config.hpp"
#include "blochspec/hash.hpp"

namespace blochspec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<std::string> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

ResultCache::ResultCache(fs::path root) : root_(std::move(root)) {}

fs::path ResultCache::default_root() {
  if (const char* dir = std::getenv(kCacheEnv); dir && *dir) return dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "blochspec";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "blochspec";
  return fs::temp_directory_path() / "blochspec-cache";
}

std::optional<CachedRun> ResultCache::load(const std::string& key) const {
  const fs::path dir = root_ / key;
  const auto manifest_text = slurp(dir / "manifest.json");
  if (!manifest_text) return std::nullopt;
  try {
    const json manifest = json::parse(*manifest_text);
    if (manifest.at("version").get<std::string>() != kVersionTag) return std::nullopt;
    if (manifest.at("key").get<std::string>() != key) return std::nullopt;
    CachedRun run;
    run.status = manifest.at("status").get<int>();
    for (const auto& [name, digest] : manifest.at("files").items()) {
      const auto content = slurp(dir / "files" / name);
      if (!content || sha256_hex(*content) != digest.get<std::string>()) return std::nullopt;
      run.files[name] = *content;
    }
    return run;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void ResultCache::store(const std::string& key, const CachedRun& run) const {
  const fs::path final_dir = root_ / key;
  const fs::path tmp = root_ / (".tmp-" + key + "-" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  fs::create_directories(tmp / "files");
  json manifest;
  manifest["version"] = kVersionTag;
  manifest["key"] = key;
  manifest["status"] = run.status;
  manifest["files"] = json::object();
  for (const auto& [name, content] : run.files) {
    atomic_write(tmp / "files" / name, content);
    manifest["files"][name] = sha256_hex(content);
  }
  atomic_write(tmp / "manifest.json", manifest.dump(2) + "\n");
  std::error_code ec;
  fs::remove_all(final_dir, ec);
  fs::rename(tmp, final_dir, ec);
  if (ec) {
    fs::remove_all(tmp);
    throw Error("cache: cannot store entry " + key + ": " + ec.message());
  }
}

}  // namespace blochspec::cli
