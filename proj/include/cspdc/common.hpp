#pragma once
// Shared plumbing: error types, femtosecond time arithmetic and the digest
// helper used by run manifests. Everything else in the library sits on top
// of this header.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cspdc {

// Internal times are integer femtoseconds. Signed 64 bit covers about
// +-106 days, far beyond any run we simulate, and integer arithmetic keeps
// tag quantization exact.
using fs_t = std::int64_t;

inline constexpr double kFsPerSecond = 1e15;

// Default tagger resolution: 156.25 ps. Exact in femtoseconds.
inline constexpr std::uint64_t kDefaultTickFs = 156250;

inline fs_t seconds_to_fs(double s) {
  return static_cast<fs_t>(std::llround(s * kFsPerSecond));
}

inline double fs_to_seconds(fs_t t) {
  return static_cast<double>(t) / kFsPerSecond;
}

// Bad parameter values or malformed requests. CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A requested closed-form quantity has no finite value (geometric factor >= 1).
class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or unwritable files, short writes and the like. Exit code 3.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data. Carries the byte offset where parsing stopped.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& msg, std::uint64_t byte_offset)
      : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::uint64_t byte_offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// FNV-1a, 64 bit. Used for output digests in run manifests; not cryptographic.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace cspdc
