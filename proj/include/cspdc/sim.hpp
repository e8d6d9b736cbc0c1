#pragma once
// Discrete-event Monte Carlo of the looped source. Heralds arrive as a
// Poisson process thinned by the detection efficiency; the herald detector
// applies non-paralyzable dead time; every accepted herald starts a storage
// episode in which the captured photon circulates until it converts, is lost
// in the loop, is ejected when the next herald flips the switch, or hits the
// pass cap. Converted telecom pairs are routed, detected and time-tagged.
//
// Every random decision comes from substreams derived from the one config
// seed, so runs are reproducible byte for byte and episodes can be replayed
// in isolation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "cspdc/common.hpp"
#include "cspdc/rng.hpp"
#include "cspdc/tags.hpp"

namespace cspdc {

enum class SwitchMode {
  // Every capture succeeds with probability eta_switch; every accepted
  // herald flips the switch (and ejects a stored photon) regardless.
  lumped,
  // Mechanistic driver: a herald within holdoff_time of the previous firing
  // neither captures nor ejects; firings always capture. The effective
  // switch efficiency then emerges from the hold-off.
  holdoff,
};

struct SimConfig {
  double pair_rate = 1.52e6;    // herald-photon pair creation rate, Hz
  double eta_herald = 1.0;      // herald detection efficiency
  double d1_dead_time = 45e-9;  // herald detector dead time, s
  double eta_switch = 0.94;     // capture probability in lumped mode
  SwitchMode switch_mode = SwitchMode::lumped;
  double holdoff_time = 100e-9; // driver hold-off, holdoff mode only, s
  double beta_loop = 0.18;      // per-pass loop survival
  double p_spdc = 1e-6;         // conversion probability per pass
  double t_loop = 23e-9;        // loop round-trip time, s
  double delay_0 = 0.0;         // herald to first conversion opportunity, s
  double eta_1550 = 0.156;      // telecom detection efficiency per photon
  double d23_dead_time = 0.0;   // telecom detector dead time, s
  double detector_jitter = 0.0; // gaussian sigma on telecom detection times, s
  double tick = 156.25e-12;     // tagger resolution, s
  std::uint32_t max_passes = 10000;
  bool force_split_routing = false;  // pin the pair to channels 2 and 3
  double duration = 1.0;        // s
  std::uint64_t seed = 1;

  void validate() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(pair_rate >= 0.0) || !std::isfinite(pair_rate))
      throw validation_error("pair_rate must be finite and >= 0");
    if (!in01(eta_herald)) throw validation_error("eta_herald must be in [0, 1]");
    if (!(d1_dead_time >= 0.0)) throw validation_error("d1_dead_time must be >= 0");
    if (!in01(eta_switch)) throw validation_error("eta_switch must be in [0, 1]");
    if (!(holdoff_time >= 0.0)) throw validation_error("holdoff_time must be >= 0");
    if (!in01(beta_loop)) throw validation_error("beta_loop must be in [0, 1]");
    if (!in01(p_spdc)) throw validation_error("p_spdc must be in [0, 1]");
    if (!(t_loop > 0.0)) throw validation_error("t_loop must be > 0");
    if (!(delay_0 >= 0.0)) throw validation_error("delay_0 must be >= 0");
    if (!in01(eta_1550)) throw validation_error("eta_1550 must be in [0, 1]");
    if (!(d23_dead_time >= 0.0)) throw validation_error("d23_dead_time must be >= 0");
    if (!(detector_jitter >= 0.0)) throw validation_error("detector_jitter must be >= 0");
    if (!(tick > 0.0)) throw validation_error("tick must be > 0");
    if (max_passes == 0) throw validation_error("max_passes must be >= 1");
    if (!(duration >= 0.0) || !std::isfinite(duration))
      throw validation_error("duration must be finite and >= 0");
    // fs_t holds +-9.2e3 seconds; leave headroom for loop passes past the end.
    if (duration > 9000.0) throw validation_error("duration must be <= 9000 s");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (p_spdc > 0.01)
      w.push_back("p_spdc > 0.01: per-pass conversion is not small, rate model degrades");
    if (pair_rate * duration > 2e8)
      w.push_back("more than 2e8 expected heralds: large memory footprint");
    return w;
  }
};

enum class EpisodeOutcome : std::uint8_t {
  converted,     // telecom pair produced on pass convert_pass
  lost_in_loop,  // absorbed or scattered during a round trip
  ejected,       // next herald flipped the switch first
  switch_failed, // capture failed, no photon stored
  cap_reached,   // still circulating at max_passes opportunities
};

inline const char* to_string(EpisodeOutcome o) {
  switch (o) {
    case EpisodeOutcome::converted: return "converted";
    case EpisodeOutcome::lost_in_loop: return "lost_in_loop";
    case EpisodeOutcome::ejected: return "ejected";
    case EpisodeOutcome::switch_failed: return "switch_failed";
    case EpisodeOutcome::cap_reached: return "cap_reached";
  }
  return "?";
}

struct TruthRecord {
  fs_t herald_time = 0;         // fs
  bool captured = false;
  std::uint32_t passes = 0;     // completed round trips when the episode ended
  EpisodeOutcome outcome = EpisodeOutcome::switch_failed;
  std::int32_t convert_pass = -1;  // k for converted episodes, else -1
  friend bool operator==(const TruthRecord&, const TruthRecord&) = default;
};

struct SimResult {
  std::vector<TimeTag> tags;
  std::vector<TruthRecord> truth;
  std::uint64_t tick_fs = kDefaultTickFs;
  double duration = 0.0;  // echo of the config, s
};

// No next herald: the stored photon is never ejected.
inline constexpr fs_t kNoEject = std::numeric_limits<fs_t>::max();

// Poisson herald arrivals at pair_rate, thinned by eta_herald. Times are
// strictly increasing femtosecond stamps in [0, duration).
inline std::vector<fs_t> generate_heralds(double pair_rate, double eta_herald,
                                          double duration, Rng& rng) {
  if (!(pair_rate >= 0.0)) throw validation_error("pair_rate must be >= 0");
  if (!(eta_herald >= 0.0 && eta_herald <= 1.0))
    throw validation_error("eta_herald must be in [0, 1]");
  if (!(duration >= 0.0)) throw validation_error("duration must be >= 0");
  std::vector<fs_t> out;
  if (pair_rate <= 0.0 || duration <= 0.0) return out;
  out.reserve(static_cast<std::size_t>(pair_rate * eta_herald * duration * 1.05) + 16);
  double t = 0.0;
  fs_t last = -1;
  for (;;) {
    t += rng.exponential(pair_rate);
    if (t >= duration) break;
    if (eta_herald < 1.0 && !rng.bernoulli(eta_herald)) continue;
    fs_t tf = seconds_to_fs(t);
    if (tf <= last) tf = last + 1;  // keep stamps strictly increasing
    last = tf;
    out.push_back(tf);
  }
  return out;
}

// Non-paralyzable dead time: an accepted event blocks [t, t+dead).
inline std::vector<fs_t> apply_dead_time(const std::vector<fs_t>& times, fs_t dead) {
  if (dead < 0) throw validation_error("dead time must be >= 0");
  std::vector<fs_t> out;
  out.reserve(times.size());
  fs_t open_from = std::numeric_limits<fs_t>::min();
  fs_t prev = std::numeric_limits<fs_t>::min();
  for (fs_t t : times) {
    if (t < prev) throw validation_error("times must be sorted");
    prev = t;
    if (t >= open_from) {
      out.push_back(t);
      open_from = t + dead;
    }
  }
  return out;
}

// One storage episode. Conversion opportunity k sits at
// herald + delay_0 + k*t_loop; the episode ends by conversion, loop loss,
// ejection at eject_time (the moment the next firing herald reuses the
// switch) or the pass cap. Draw order per episode: capture (lumped mode),
// then per pass a survival draw (k >= 1) followed by a conversion draw.
// On conversion *convert_time gets the conversion opportunity's time.
inline TruthRecord run_loop_episode(fs_t herald_time, fs_t eject_time, const SimConfig& cfg,
                                    Rng& rng, fs_t* convert_time = nullptr) {
  TruthRecord tr;
  tr.herald_time = herald_time;
  if (cfg.switch_mode == SwitchMode::lumped && !rng.bernoulli(cfg.eta_switch)) {
    tr.outcome = EpisodeOutcome::switch_failed;
    return tr;
  }
  tr.captured = true;
  const fs_t t0 = herald_time + seconds_to_fs(cfg.delay_0);
  const fs_t loop = seconds_to_fs(cfg.t_loop);
  for (std::uint32_t k = 0; k < cfg.max_passes; ++k) {
    const fs_t tk = t0 + static_cast<fs_t>(k) * loop;
    if (tk >= eject_time) {
      // The switch flipped during the transit towards opportunity k. In a
      // full simulation k = 0 cannot eject (the next herald is strictly
      // later), but direct callers may pass any eject_time.
      tr.outcome = EpisodeOutcome::ejected;
      tr.passes = k == 0 ? 0 : k - 1;
      return tr;
    }
    if (k > 0 && !rng.bernoulli(cfg.beta_loop)) {
      tr.outcome = EpisodeOutcome::lost_in_loop;
      tr.passes = k - 1;
      return tr;
    }
    if (rng.bernoulli(cfg.p_spdc)) {
      tr.outcome = EpisodeOutcome::converted;
      tr.passes = k;
      tr.convert_pass = static_cast<std::int32_t>(k);
      if (convert_time) *convert_time = tk;
      return tr;
    }
  }
  tr.outcome = EpisodeOutcome::cap_reached;
  tr.passes = cfg.max_passes - 1;
  return tr;
}

inline SimResult simulate(const SimConfig& cfg) {
  cfg.validate();
  const fs_t duration_fs = seconds_to_fs(cfg.duration);
  const fs_t tick_fs = seconds_to_fs(cfg.tick);
  const fs_t delay0 = seconds_to_fs(cfg.delay_0);

  Rng hrng = derive_stream(cfg.seed, StreamDomain::heralds, 0);
  std::vector<fs_t> detected =
      generate_heralds(cfg.pair_rate, cfg.eta_herald, cfg.duration, hrng);
  std::vector<fs_t> accepted = apply_dead_time(detected, seconds_to_fs(cfg.d1_dead_time));
  detected.clear();
  detected.shrink_to_fit();

  // In holdoff mode only some accepted heralds fire the switch; firing is
  // what captures a new photon and ejects the previous one.
  std::vector<char> fires(accepted.size(), 1);
  if (cfg.switch_mode == SwitchMode::holdoff) {
    const fs_t hold = seconds_to_fs(cfg.holdoff_time);
    fs_t last_fire = std::numeric_limits<fs_t>::min() / 2;
    for (std::size_t i = 0; i < accepted.size(); ++i) {
      if (accepted[i] - last_fire < hold) {
        fires[i] = 0;
      } else {
        last_fire = accepted[i];
      }
    }
  }

  SimResult res;
  res.tick_fs = static_cast<std::uint64_t>(tick_fs);
  res.duration = cfg.duration;
  res.tags.reserve(accepted.size() + accepted.size() / 16 + 16);

  // Every accepted herald is a detector click and gets a channel-1 tag.
  for (fs_t t : accepted)
    res.tags.push_back({1, static_cast<std::uint64_t>(t / tick_fs)});

  struct Detection {
    fs_t t;
    std::uint8_t channel;
  };
  std::vector<Detection> telecom;
  const fs_t jitter_fs_sigma = seconds_to_fs(cfg.detector_jitter);
  std::size_t next_fire = 0;  // index searching for the episode's ejector

  res.truth.reserve(accepted.size());
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    if (!fires[i]) continue;
    // Find the next firing herald; its switch flip ejects this episode.
    if (next_fire <= i) next_fire = i + 1;
    while (next_fire < accepted.size() && !fires[next_fire]) ++next_fire;
    const fs_t eject =
        next_fire < accepted.size() ? accepted[next_fire] + delay0 : kNoEject;

    Rng erng = derive_stream(cfg.seed, StreamDomain::episode, static_cast<std::uint64_t>(i));
    fs_t conv_t = 0;
    TruthRecord tr = run_loop_episode(accepted[i], eject, cfg, erng, &conv_t);
    res.truth.push_back(tr);
    if (tr.outcome != EpisodeOutcome::converted) continue;

    // Route and detect the telecom pair. Both photons share the conversion
    // time; optional jitter is drawn per detected photon.
    std::uint8_t ch_a = 2, ch_b = 3;
    if (!cfg.force_split_routing) {
      ch_a = erng.bernoulli(0.5) ? std::uint8_t{2} : std::uint8_t{3};
      ch_b = erng.bernoulli(0.5) ? std::uint8_t{2} : std::uint8_t{3};
    }
    for (std::uint8_t ch : {ch_a, ch_b}) {
      if (!erng.bernoulli(cfg.eta_1550)) continue;
      fs_t td = conv_t;
      if (jitter_fs_sigma > 0)
        td += static_cast<fs_t>(std::llround(erng.gaussian(double(jitter_fs_sigma))));
      if (td >= 0 && td < duration_fs) telecom.push_back({td, ch});
    }
  }

  // Telecom detector dead time acts per channel on arrival times, then the
  // survivors are quantized; coinciding ticks on one channel merge into a
  // single tag, which is what a real tagger emits.
  std::sort(telecom.begin(), telecom.end(), [](const Detection& a, const Detection& b) {
    return a.t != b.t ? a.t < b.t : a.channel < b.channel;
  });
  const fs_t dead23 = seconds_to_fs(cfg.d23_dead_time);
  for (std::uint8_t ch : {std::uint8_t{2}, std::uint8_t{3}}) {
    fs_t open_from = std::numeric_limits<fs_t>::min();
    std::uint64_t last_tick = 0;
    bool have_tick = false;
    for (const auto& d : telecom) {
      if (d.channel != ch) continue;
      if (d.t < open_from) continue;
      open_from = d.t + dead23;
      std::uint64_t tk = static_cast<std::uint64_t>(d.t / tick_fs);
      if (have_tick && tk == last_tick) continue;
      last_tick = tk;
      have_tick = true;
      res.tags.push_back({ch, tk});
    }
  }

  std::sort(res.tags.begin(), res.tags.end(), [](const TimeTag& a, const TimeTag& b) {
    return a.ticks != b.ticks ? a.ticks < b.ticks : a.channel < b.channel;
  });
  return res;
}

inline void write_truth_csv(const std::vector<TruthRecord>& truth, std::ostream& os) {
  os << "herald_time_fs,captured,passes,outcome,k\n";
  char line[96];
  for (const auto& tr : truth) {
    std::snprintf(line, sizeof line, "%lld,%d,%u,%s,%d\n",
                  static_cast<long long>(tr.herald_time), tr.captured ? 1 : 0, tr.passes,
                  to_string(tr.outcome), tr.convert_pass);
    os << line;
  }
  if (!os) throw io_error("failed writing truth csv");
}

}  // namespace cspdc
