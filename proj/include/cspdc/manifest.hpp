#pragma once
// Run manifests: everything needed to reproduce a run bit for bit plus
// digests to check that a reproduction actually matched. Written as JSON
// next to the outputs.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cspdc/common.hpp"
#include "cspdc/version.hpp"

namespace cspdc {

struct OutputRecord {
  std::string path;  // relative to the manifest
  std::uint64_t bytes = 0;
  std::string fnv1a64;  // 16 hex digits
};

struct RunManifest {
  std::string tool_version = kVersion;
  std::string command;  // subcommand name
  std::string invocation;  // full command line
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // resolved key=value
  std::vector<OutputRecord> outputs;
  std::string started_utc;  // ISO 8601
};

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string utc_now_iso8601() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Streams the file through FNV-1a; also reports its size.
inline OutputRecord digest_file(const std::string& path, const std::string& rel_name) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open '" + path + "' for digesting");
  OutputRecord rec;
  rec.path = rel_name;
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  for (;;) {
    is.read(buf, sizeof buf);
    std::streamsize n = is.gcount();
    if (n <= 0) break;
    h = fnv1a64(buf, static_cast<std::size_t>(n), h);
    rec.bytes += static_cast<std::uint64_t>(n);
  }
  if (is.bad()) throw io_error("read error while digesting '" + path + "'");
  rec.fnv1a64 = hex16(h);
  return rec;
}

inline void write_manifest(const RunManifest& m, std::ostream& os) {
  nlohmann::json j;
  j["tool_version"] = m.tool_version;
  j["command"] = m.command;
  j["invocation"] = m.invocation;
  j["seed"] = m.seed;
  j["started_utc"] = m.started_utc;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = cfg;
  j["outputs"] = nlohmann::json::array();
  for (const auto& o : m.outputs) {
    j["outputs"].push_back({{"path", o.path}, {"bytes", o.bytes}, {"fnv1a64", o.fnv1a64}});
  }
  os << j.dump(2) << "\n";
  if (!os) throw io_error("failed writing manifest");
}

inline void write_manifest_file(const RunManifest& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot open '" + path + "' for writing");
  write_manifest(m, os);
}

}  // namespace cspdc
