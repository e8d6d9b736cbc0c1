#pragma once
// Truncated Fock-space evolution of the cascaded conversion chain with a
// lossy storage loop. States are sparse maps from occupation lists to
// complex amplitudes.
//
// Mode bookkeeping: the first conversion creates a herald photon plus a
// stored photon; the stored photon circulates and on pass k may convert into
// a telecom pair anchored to that pass. Loop loss on pass k routes stored
// photons into a dedicated loss mode for that pass (exact beam splitter), so
// the state stays pure and the lost weight stays auditable.
//
// Operator orders are part of the contract: the first conversion is expanded
// to second order (the single-pair amplitude is exactly -i*g1_alpha), the
// loop conversion to first order (the pass-k amplitude picks up exactly
// sqrt(beta) per completed pass), and the loss beam splitter is exact.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cspdc/common.hpp"

namespace cspdc {

enum class ModeKind : std::uint8_t {
  stored = 0,     // circulating photon that drives the loop conversion
  herald = 1,
  telecom_a = 2,  // telecom pair, one mode pair per loop pass
  telecom_b = 3,
  loss = 4,       // beam-splitter environment mode, one per loop pass
};

inline const char* to_string(ModeKind k) {
  switch (k) {
    case ModeKind::stored: return "stored";
    case ModeKind::herald: return "herald";
    case ModeKind::telecom_a: return "telecom_a";
    case ModeKind::telecom_b: return "telecom_b";
    case ModeKind::loss: return "loss";
  }
  return "?";
}

struct ModeIndex {
  ModeKind kind = ModeKind::stored;
  std::uint32_t pass = 0;  // loop pass the mode is anchored to; 0 for untimed kinds
  friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;
};

// Occupation list: sorted by mode, counts >= 1, zero entries removed. The
// empty list is the vacuum.
using Occupation = std::vector<std::pair<ModeIndex, int>>;
using Amplitudes = std::map<Occupation, std::complex<double>>;

inline int occupation_of(const Occupation& occ, const ModeIndex& m) {
  for (const auto& [mode, n] : occ)
    if (mode == m) return n;
  return 0;
}

inline void set_occupation(Occupation& occ, const ModeIndex& m, int n) {
  for (auto it = occ.begin(); it != occ.end(); ++it) {
    if (it->first == m) {
      if (n == 0)
        occ.erase(it);
      else
        it->second = n;
      return;
    }
    if (m < it->first) {
      if (n != 0) occ.insert(it, {m, n});
      return;
    }
  }
  if (n != 0) occ.push_back({m, n});
}

struct CascadeState {
  Amplitudes amp;
  int n_max = 2;          // per-mode photon cap
  double g1_alpha = 0.0;  // pumped first-conversion coupling
  double g2 = 0.0;        // loop-conversion coupling
  double beta = 1.0;      // loop round-trip transmission
  double leaked = 0.0;    // squared weight clipped at the n_max boundary
  std::string warning;    // set when the truncation is known to be too tight
};

namespace detail {

struct LadderOp {
  ModeIndex mode;
  bool raise;
};

struct HamTerm {
  double coeff;
  std::vector<LadderOp> ops;  // applied left to right
};

// Applies sum_t coeff_t * (ladder product) to every ket. Raising past n_max
// clips the contribution and records its squared weight as leakage.
inline Amplitudes apply_terms(const Amplitudes& in, const std::vector<HamTerm>& terms,
                              int n_max, double* leaked) {
  Amplitudes out;
  for (const auto& [occ, a] : in) {
    for (const auto& term : terms) {
      Occupation o = occ;
      std::complex<double> v = a * term.coeff;
      bool dead = false;
      for (const auto& op : term.ops) {
        int n = occupation_of(o, op.mode);
        if (op.raise) {
          if (n + 1 > n_max) {
            if (leaked) *leaked += std::norm(v) * (n + 1);
            dead = true;
            break;
          }
          v *= std::sqrt(double(n + 1));
          set_occupation(o, op.mode, n + 1);
        } else {
          if (n == 0) {
            dead = true;
            break;
          }
          v *= std::sqrt(double(n));
          set_occupation(o, op.mode, n - 1);
        }
      }
      if (!dead) out[o] += v;
    }
  }
  return out;
}

inline void accumulate(Amplitudes& into, const Amplitudes& from, std::complex<double> scale) {
  for (const auto& [occ, a] : from) into[occ] += scale * a;
}

inline double binomial(int n, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r = r * double(n - i) / double(i + 1);
  return r;
}

}  // namespace detail

// First conversion, driven by the pump: H = g1_alpha (a+_stored a+_herald + h.c.),
// expanded to second order: psi - i H psi - (1/2) H^2 psi.
inline void apply_pdc1(CascadeState& st) {
  const ModeIndex ms{ModeKind::stored, 0};
  const ModeIndex mh{ModeKind::herald, 0};
  const std::vector<detail::HamTerm> h = {
      {st.g1_alpha, {{ms, true}, {mh, true}}},
      {st.g1_alpha, {{ms, false}, {mh, false}}},
  };
  Amplitudes h1 = detail::apply_terms(st.amp, h, st.n_max, &st.leaked);
  Amplitudes h2 = detail::apply_terms(h1, h, st.n_max, &st.leaked);
  Amplitudes out = std::move(st.amp);
  detail::accumulate(out, h1, {0.0, -1.0});
  detail::accumulate(out, h2, {-0.5, 0.0});
  st.amp = std::move(out);
}

// Loop conversion on pass k: H = g2 (a_stored a+_A,k a+_B,k + h.c.), first
// order: psi - i H psi. Within each term the annihilations come first: the
// modes commute, and killing the term before any raise keeps vanishing
// contributions out of the leakage bookkeeping.
inline void apply_pdc2(CascadeState& st, std::uint32_t pass) {
  const ModeIndex ms{ModeKind::stored, 0};
  const ModeIndex ma{ModeKind::telecom_a, pass};
  const ModeIndex mb{ModeKind::telecom_b, pass};
  const std::vector<detail::HamTerm> h = {
      {st.g2, {{ms, false}, {ma, true}, {mb, true}}},
      {st.g2, {{ma, false}, {mb, false}, {ms, true}}},
  };
  Amplitudes h1 = detail::apply_terms(st.amp, h, st.n_max, &st.leaked);
  detail::accumulate(st.amp, h1, {0.0, -1.0});
}

// Loop loss on pass k: exact beam splitter from the stored mode into a fresh
// loss mode, transmission beta:
//   |n>_s -> sum_m sqrt(C(n,m)) beta^(m/2) (1-beta)^((n-m)/2) |m>_s |n-m>_loss,k
inline void apply_loop_loss(CascadeState& st, std::uint32_t pass) {
  const ModeIndex ms{ModeKind::stored, 0};
  const ModeIndex ml{ModeKind::loss, pass};
  Amplitudes out;
  for (const auto& [occ, a] : st.amp) {
    int n = occupation_of(occ, ms);
    if (n == 0) {
      out[occ] += a;
      continue;
    }
    if (occupation_of(occ, ml) != 0)
      throw validation_error("loss mode for this pass is already occupied");
    for (int m = n; m >= 0; --m) {
      double c = std::sqrt(detail::binomial(n, m) * std::pow(st.beta, m) *
                           std::pow(1.0 - st.beta, n - m));
      if (c == 0.0) continue;
      Occupation o = occ;
      set_occupation(o, ms, m);
      set_occupation(o, ml, n - m);
      out[o] += a * c;
    }
  }
  st.amp = std::move(out);
}

// Full chain: vacuum, first conversion, then per pass the loop conversion
// followed by the loop loss (a photon converting on pass k has survived
// exactly k round trips).
inline CascadeState cascade_state(int n_passes, double g1_alpha, double g2, double beta,
                                  int n_max = 2) {
  if (n_passes < 1 || n_passes > 16)
    throw validation_error("n_passes must be in [1, 16]");
  if (!(g1_alpha >= 0.0 && g1_alpha <= 0.1))
    throw validation_error("g1_alpha must be in [0, 0.1] (perturbative regime)");
  if (!(g2 >= 0.0 && g2 <= 0.1))
    throw validation_error("g2 must be in [0, 0.1] (perturbative regime)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw validation_error("beta must be in [0, 1]");
  if (n_max < 1 || n_max > 6) throw validation_error("n_max must be in [1, 6]");

  CascadeState st;
  st.n_max = n_max;
  st.g1_alpha = g1_alpha;
  st.g2 = g2;
  st.beta = beta;
  if (n_max < 2)
    st.warning = "n_max < 2 drops the leading multi-pair terms; expect visible leakage";
  st.amp[{}] = 1.0;
  apply_pdc1(st);
  for (int k = 0; k < n_passes; ++k) {
    apply_pdc2(st, static_cast<std::uint32_t>(k));
    apply_loop_loss(st, static_cast<std::uint32_t>(k));
  }
  return st;
}

// Amplitude of the single-triplet ket for pass k:
// |1 herald, 1 telecom_a@k, 1 telecom_b@k>, everything else empty.
inline std::complex<double> triplet_amplitude(const CascadeState& st, std::uint32_t pass) {
  Occupation key;
  set_occupation(key, {ModeKind::herald, 0}, 1);
  set_occupation(key, {ModeKind::telecom_a, pass}, 1);
  set_occupation(key, {ModeKind::telecom_b, pass}, 1);
  auto it = st.amp.find(key);
  return it == st.amp.end() ? std::complex<double>(0.0) : it->second;
}

// Total probability of exactly one triplet, summed over the pass it was
// produced on.
inline double triplet_probability(const CascadeState& st) {
  double p = 0.0;
  for (const auto& [occ, a] : st.amp) {
    if (occ.size() != 3) continue;
    // Pattern: (herald,1), (telecom_a@k,1), (telecom_b@k,1), sorted by kind.
    if (occ[0].first.kind != ModeKind::herald || occ[0].second != 1) continue;
    if (occ[1].first.kind != ModeKind::telecom_a || occ[1].second != 1) continue;
    if (occ[2].first.kind != ModeKind::telecom_b || occ[2].second != 1) continue;
    if (occ[1].first.pass != occ[2].first.pass) continue;
    p += std::norm(a);
  }
  return p;
}

inline double state_norm2(const CascadeState& st) {
  double n = 0.0;
  for (const auto& [occ, a] : st.amp) n += std::norm(a);
  return n;
}

// Debugging dump; column layout is not a stable contract.
inline void write_state_csv(const CascadeState& st, std::ostream& os) {
  os << "ket,re,im\n";
  char num[64];
  for (const auto& [occ, a] : st.amp) {
    std::string ket;
    if (occ.empty()) ket = "vacuum";
    for (const auto& [mode, n] : occ) {
      if (!ket.empty()) ket += ' ';
      ket += to_string(mode.kind);
      if (mode.kind == ModeKind::telecom_a || mode.kind == ModeKind::telecom_b ||
          mode.kind == ModeKind::loss) {
        ket += '@';
        ket += std::to_string(mode.pass);
      }
      ket += 'x';
      ket += std::to_string(n);
    }
    std::snprintf(num, sizeof num, ",%.17g,%.17g\n", a.real(), a.imag());
    os << ket << num;
  }
  if (!os) throw io_error("failed writing state csv");
}

}  // namespace cspdc
