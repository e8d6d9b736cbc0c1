#pragma once
// Flat "key = value" config files. '#' lines are comments, blank lines are
// skipped, values are parsed strictly and unknown keys are hard errors so a
// typo can never fall back to a default silently.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cspdc/common.hpp"
#include "cspdc/model.hpp"
#include "cspdc/sim.hpp"

namespace cspdc {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

// Parses the file into key -> value. Duplicate keys and lines without '='
// are parse errors carrying the byte offset of the line.
inline std::map<std::string, std::string> parse_kv_stream(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(is, line)) {
    std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw parse_error("expected 'key = value', got '" + t + "'", line_offset);
    std::string key = detail::trim(t.substr(0, eq));
    std::string val = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw parse_error("empty key", line_offset);
    if (val.empty()) throw parse_error("empty value for key '" + key + "'", line_offset);
    if (kv.count(key)) throw parse_error("duplicate key '" + key + "'", line_offset);
    kv.emplace(std::move(key), std::move(val));
  }
  return kv;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty() || !std::isfinite(d))
    throw validation_error("key '" + key + "': expected a finite number, got '" + v + "'");
  return d;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v[0] == '-')
    throw validation_error("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  char* end = nullptr;
  unsigned long long u = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size())
    throw validation_error("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return u;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw validation_error("key '" + key + "': expected true/false, got '" + v + "'");
}

class KvReader {
 public:
  explicit KvReader(const std::map<std::string, std::string>& kv) : kv_(kv) {}

  void number(const std::string& key, double& into) {
    if (auto* v = find(key)) into = parse_double(key, *v);
  }
  void integer(const std::string& key, std::uint64_t& into) {
    if (auto* v = find(key)) into = parse_u64(key, *v);
  }
  void integer(const std::string& key, std::uint32_t& into) {
    if (auto* v = find(key)) {
      std::uint64_t u = parse_u64(key, *v);
      if (u > 0xffffffffull) throw validation_error("key '" + key + "': value too large");
      into = static_cast<std::uint32_t>(u);
    }
  }
  void boolean(const std::string& key, bool& into) {
    if (auto* v = find(key)) into = parse_bool(key, *v);
  }
  template <typename Enum, typename Parse>
  void enumeration(const std::string& key, Enum& into, Parse parse) {
    if (auto* v = find(key)) into = parse(key, *v);
  }

  // Everything not consumed by the typed getters is unknown.
  void finish() const {
    for (const auto& [k, v] : kv_)
      if (!seen_.count(k)) throw validation_error("unknown config key '" + k + "'");
  }

 private:
  const std::string* find(const std::string& key) {
    seen_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, std::string>& kv_;
  std::set<std::string> seen_;
};

inline SwitchMode parse_switch_mode(const std::string& key, const std::string& v) {
  if (v == "lumped") return SwitchMode::lumped;
  if (v == "holdoff") return SwitchMode::holdoff;
  throw validation_error("key '" + key + "': expected lumped or holdoff, got '" + v + "'");
}

inline PassRule parse_pass_rule(const std::string& key, const std::string& v) {
  if (v == "dead_time_over_loop") return PassRule::dead_time_over_loop;
  if (v == "loop_over_dead_time") return PassRule::loop_over_dead_time;
  throw validation_error("key '" + key +
                         "': expected dead_time_over_loop or loop_over_dead_time, got '" + v +
                         "'");
}

}  // namespace detail

// Simulation config. Missing keys keep their defaults.
inline SimConfig sim_config_from_kv(const std::map<std::string, std::string>& kv) {
  SimConfig c;
  detail::KvReader r(kv);
  r.number("pair_rate", c.pair_rate);
  r.number("eta_herald", c.eta_herald);
  r.number("d1_dead_time", c.d1_dead_time);
  r.number("eta_switch", c.eta_switch);
  r.enumeration("switch_mode", c.switch_mode, detail::parse_switch_mode);
  r.number("holdoff_time", c.holdoff_time);
  r.number("beta_loop", c.beta_loop);
  r.number("p_spdc", c.p_spdc);
  r.number("t_loop", c.t_loop);
  r.number("delay_0", c.delay_0);
  r.number("eta_1550", c.eta_1550);
  r.number("d23_dead_time", c.d23_dead_time);
  r.number("detector_jitter", c.detector_jitter);
  r.number("tick", c.tick);
  r.integer("max_passes", c.max_passes);
  r.boolean("force_split_routing", c.force_split_routing);
  r.number("duration", c.duration);
  r.integer("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

struct ModelConfig {
  ModelParams params;
  UncertaintyBand band;
};

// Closed-form model config (the r1 here is the accepted herald rate).
inline ModelConfig model_config_from_kv(const std::map<std::string, std::string>& kv) {
  ModelConfig c;
  detail::KvReader r(kv);
  r.number("eta_switch", c.params.eta_switch);
  r.number("beta_loop", c.params.beta_loop);
  r.number("p_spdc", c.params.p_spdc);
  r.number("r1", c.params.r1);
  r.number("t_loop", c.params.t_loop);
  r.number("t_dead", c.params.t_dead);
  r.enumeration("pass_rule", c.params.pass_rule, detail::parse_pass_rule);
  r.number("eta_err", c.band.eta_err);
  r.number("r1_err", c.band.r1_err);
  r.finish();
  c.params.validate();
  if (!(c.band.eta_err >= 0.0) || !(c.band.r1_err >= 0.0))
    throw validation_error("uncertainty band errors must be >= 0");
  return c;
}

// Full-precision serialization of the resolved config, for manifests and for
// round-tripping.
inline std::vector<std::pair<std::string, std::string>> kv_from_sim_config(const SimConfig& c) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  return {
      {"pair_rate", num(c.pair_rate)},
      {"eta_herald", num(c.eta_herald)},
      {"d1_dead_time", num(c.d1_dead_time)},
      {"eta_switch", num(c.eta_switch)},
      {"switch_mode", c.switch_mode == SwitchMode::lumped ? "lumped" : "holdoff"},
      {"holdoff_time", num(c.holdoff_time)},
      {"beta_loop", num(c.beta_loop)},
      {"p_spdc", num(c.p_spdc)},
      {"t_loop", num(c.t_loop)},
      {"delay_0", num(c.delay_0)},
      {"eta_1550", num(c.eta_1550)},
      {"d23_dead_time", num(c.d23_dead_time)},
      {"detector_jitter", num(c.detector_jitter)},
      {"tick", num(c.tick)},
      {"max_passes", std::to_string(c.max_passes)},
      {"force_split_routing", c.force_split_routing ? "true" : "false"},
      {"duration", num(c.duration)},
      {"seed", std::to_string(c.seed)},
  };
}

inline std::vector<std::pair<std::string, std::string>> kv_from_model_config(
    const ModelConfig& c) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  return {
      {"eta_switch", num(c.params.eta_switch)},
      {"beta_loop", num(c.params.beta_loop)},
      {"p_spdc", num(c.params.p_spdc)},
      {"r1", num(c.params.r1)},
      {"t_loop", num(c.params.t_loop)},
      {"t_dead", num(c.params.t_dead)},
      {"pass_rule", c.params.pass_rule == PassRule::dead_time_over_loop
                        ? "dead_time_over_loop"
                        : "loop_over_dead_time"},
      {"eta_err", num(c.band.eta_err)},
      {"r1_err", num(c.band.r1_err)},
  };
}

}  // namespace cspdc
