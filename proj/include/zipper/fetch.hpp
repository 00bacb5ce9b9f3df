// Download of archive entries ("3NHC") with a local on-disk cache.
//
// Cached files are the raw downloaded text. A file is written to a temporary
// name and hard-linked into place, so a cache entry appears atomically and
// is never rewritten once present.

#pragma once

#include <unistd.h>

#include <atomic>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "httplib.h"

#include "error.hpp"

namespace zipper {

inline constexpr const char* kDefaultArchiveUrl = "https://files.rcsb.org/download";
inline constexpr const char* kArchiveUrlEnv = "ZIPPER_ARCHIVE_URL";
inline constexpr const char* kCacheDirEnv = "ZIPPER_CACHE_DIR";

struct FetchConfig {
  std::string base_url = kDefaultArchiveUrl;
  std::filesystem::path cache_dir = ".zipper-cache";
  double timeout = 30.0;  // seconds

  // Defaults, overridden by ZIPPER_ARCHIVE_URL / ZIPPER_CACHE_DIR.
  static FetchConfig from_env() {
    FetchConfig cfg;
    if (const char* url = std::getenv(kArchiveUrlEnv); url && *url)
      cfg.base_url = url;
    if (const char* dir = std::getenv(kCacheDirEnv); dir && *dir)
      cfg.cache_dir = dir;
    else if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
      cfg.cache_dir = std::filesystem::path(xdg) / "zipper";
    else if (const char* home = std::getenv("HOME"); home && *home)
      cfg.cache_dir = std::filesystem::path(home) / ".cache" / "zipper";
    return cfg;
  }
};

// Upper-cased id; rejects anything but [0-9][A-Za-z0-9]{3}.
inline std::string normalize_entry_id(std::string_view id) {
  bool ok = id.size() == 4 && std::isdigit(static_cast<unsigned char>(id[0]));
  for (char c : id)
    ok = ok && std::isalnum(static_cast<unsigned char>(c));
  if (!ok)
    throw ValidationError("invalid entry id '" + std::string(id) +
                          "' (expected a digit followed by three letters or digits)");
  std::string out(id);
  for (char& c : out)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::filesystem::path cache_path(const FetchConfig& cfg, std::string_view id) {
  return cfg.cache_dir / (normalize_entry_id(id) + ".pdb");
}

inline bool is_entry_id(std::string_view s) {
  try {
    normalize_entry_id(s);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

namespace impl {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

inline UrlParts split_url(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos)
    throw FetchError("archive URL '" + std::string(url) + "' has no scheme");
  auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  parts.origin = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos)
    parts.prefix = std::string(url.substr(path_start));
  while (!parts.prefix.empty() && parts.prefix.back() == '/')
    parts.prefix.pop_back();
  return parts;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw FetchError("cannot read cached file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Publishes `text` at `dest` unless something is already there.
inline void publish(const std::filesystem::path& dest, const std::string& text) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  auto tmp = dest;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
         std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    out.close();
    if (!out)
      throw FetchError("cannot write cache file " + tmp.string());
  }
  if (::link(tmp.c_str(), dest.c_str()) != 0 && errno != EEXIST) {
    std::error_code ec(errno, std::generic_category());
    std::filesystem::remove(tmp);
    throw FetchError("cannot publish cache file " + dest.string() + ": " + ec.message());
  }
  std::filesystem::remove(tmp);
}

}  // namespace impl

// Path of the cached entry, downloading it first on a cache miss.
inline std::filesystem::path fetch_to_cache(const FetchConfig& cfg, std::string_view id) {
  const std::string key = normalize_entry_id(id);
  const auto dest = cfg.cache_dir / (key + ".pdb");
  if (std::filesystem::exists(dest))
    return dest;

  std::error_code ec;
  std::filesystem::create_directories(cfg.cache_dir, ec);
  if (ec)
    throw FetchError("cannot create cache directory " + cfg.cache_dir.string() + ": " +
                     ec.message());

  impl::UrlParts url = impl::split_url(cfg.base_url);
  httplib::Client client(url.origin);
  if (!client.is_valid())
    throw FetchError("fetching " + key + ": unsupported archive URL " + cfg.base_url);
  auto secs = std::chrono::duration<double>(cfg.timeout);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
  client.set_follow_location(true);
  auto res = client.Get(url.prefix + "/" + key + ".pdb");
  if (!res)
    throw FetchError("fetching " + key + " from " + cfg.base_url + " failed: " +
                     httplib::to_string(res.error()));
  if (res->status != 200)
    throw FetchError("fetching " + key + " from " + cfg.base_url + " failed: HTTP status " +
                     std::to_string(res->status));
  impl::publish(dest, res->body);
  return dest;
}

inline std::string fetch_entry(const FetchConfig& cfg, std::string_view id) {
  return impl::read_file(fetch_to_cache(cfg, id));
}

}  // namespace zipper
