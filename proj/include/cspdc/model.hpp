#pragma once
// Closed-form rate model for a heralded photon source with a switchable
// storage loop. A captured photon converts on some loop pass k; pass k is
// weighted by the conversion survival (1-P)^k, the loop transmission beta^k,
// and, once the herald detector has recovered, by the chance that no new
// herald has ejected the stored photon yet. Summing the passes gives the
// amplification of the conversion rate relative to the loop-off source.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "cspdc/common.hpp"

namespace cspdc {

enum class PassRule {
  // Protected passes j = floor(t_dead / t_loop): ejection is impossible while
  // the herald detector is still dead. This is the physical rule.
  dead_time_over_loop,
  // j = floor(t_loop / t_dead). Kept selectable for comparison runs.
  loop_over_dead_time,
};

struct ModelParams {
  double eta_switch = 0.94;  // switch transmission applied to every capture
  double beta_loop = 0.18;   // round-trip survival of the loop
  double p_spdc = 1e-6;      // conversion probability per pass
  double r1 = 1.52e6;        // accepted herald rate, Hz
  double t_loop = 23e-9;     // loop round-trip time, s
  double t_dead = 45e-9;     // herald detector dead time, s
  PassRule pass_rule = PassRule::dead_time_over_loop;

  void validate() const {
    if (!(eta_switch >= 0.0 && eta_switch <= 1.0))
      throw validation_error("eta_switch must be in [0, 1]");
    if (!(beta_loop >= 0.0 && beta_loop <= 1.0))
      throw validation_error("beta_loop must be in [0, 1]");
    if (!(p_spdc >= 0.0 && p_spdc <= 1.0))
      throw validation_error("p_spdc must be in [0, 1]");
    if (!(r1 >= 0.0) || !std::isfinite(r1))
      throw validation_error("r1 must be finite and >= 0");
    if (!(t_loop > 0.0) || !std::isfinite(t_loop))
      throw validation_error("t_loop must be finite and > 0");
    if (!(t_dead >= 0.0) || !std::isfinite(t_dead))
      throw validation_error("t_dead must be finite and >= 0");
  }
};

// Loop-off conversion rate: heralds times conversion probability.
inline double unamplified_rate(double r1, double p_spdc) {
  if (!(r1 >= 0.0) || !std::isfinite(r1))
    throw validation_error("r1 must be finite and >= 0");
  if (!(p_spdc >= 0.0 && p_spdc <= 1.0))
    throw validation_error("p_spdc must be in [0, 1]");
  return r1 * p_spdc;
}

// Rate contribution of pass k before ejection weighting:
//   T_k = eta * R1 * P * ((1 - P) * beta)^k.
// Ejection survival for unprotected passes is applied by the caller.
inline double pass_contribution(long long k, const ModelParams& p) {
  p.validate();
  if (k < 0) throw validation_error("pass index must be >= 0");
  double x = p.beta_loop * (1.0 - p.p_spdc);
  return p.eta_switch * p.r1 * p.p_spdc * std::pow(x, static_cast<double>(k));
}

// Probability that a stored photon is still present after time dt: ejection
// by the next herald is a Poisson process at rate r1.
inline double survival_probability(double r1, double dt) {
  if (!(r1 >= 0.0) || !std::isfinite(r1))
    throw validation_error("r1 must be finite and >= 0");
  if (!(dt >= 0.0) || !std::isfinite(dt))
    throw validation_error("dt must be finite and >= 0");
  return std::exp(-r1 * dt);
}

// Number of loop passes completed before the herald detector can fire again.
inline long long protected_passes(const ModelParams& p) {
  p.validate();
  if (p.t_dead <= 0.0) return 0;
  double q;
  if (p.pass_rule == PassRule::dead_time_over_loop) {
    q = p.t_dead / p.t_loop;
  } else {
    q = p.t_loop / p.t_dead;
  }
  double f = std::floor(q);
  if (f > 1e15) throw validation_error("pass count overflow: t_loop and t_dead differ by > 1e15");
  return static_cast<long long>(f);
}

// Geometric sum of every pass with no ejection at all. Diverges only at
// beta = 1 with p_spdc = 0.
inline double amplification_simple(const ModelParams& p) {
  p.validate();
  double x = p.beta_loop * (1.0 - p.p_spdc);
  if (x >= 1.0) throw divergence_error("beta*(1-P) >= 1: pass sum diverges");
  return p.eta_switch / (1.0 - x);
}

// Full amplification: protected passes k <= j contribute x^k, later passes
// also carry the per-pass ejection survival, i.e. contribute y^k with
// y = x * exp(-r1 * t_loop):
//   A = eta * [ (1 - x^(j+1)) / (1 - x) + y^(j+1) / (1 - y) ].
inline double amplification_full(const ModelParams& p) {
  p.validate();
  double x = p.beta_loop * (1.0 - p.p_spdc);
  double s = survival_probability(p.r1, p.t_loop);
  double y = x * s;
  long long j = protected_passes(p);
  double head = (x == 1.0) ? static_cast<double>(j + 1)
                           : (1.0 - std::pow(x, static_cast<double>(j + 1))) / (1.0 - x);
  if (y >= 1.0) throw divergence_error("beta*(1-P)*exp(-r1*t_loop) >= 1: pass sum diverges");
  double tail = std::pow(y, static_cast<double>(j + 1)) / (1.0 - y);
  return p.eta_switch * (head + tail);
}

struct UncertaintyBand {
  double eta_err = 0.0;  // absolute error on eta_switch
  double r1_err = 0.0;   // absolute error on r1, Hz
};

struct CurvePoint {
  double beta;
  double a;     // amplification at the central parameters
  double a_lo;  // envelope over the (eta, r1) error corners
  double a_hi;
};

struct AmplificationCurve {
  ModelParams base;
  UncertaintyBand band;
  std::vector<CurvePoint> points;
};

// Amplification versus beta with an uncertainty envelope taken over the four
// (eta +- eta_err, r1 -+ r1_err) corners. A is monotone in both, so the
// corners bound the band exactly.
inline AmplificationCurve amplification_curve(const ModelParams& base,
                                              const std::vector<double>& betas,
                                              const UncertaintyBand& band = {}) {
  base.validate();
  if (betas.empty()) throw validation_error("beta grid is empty");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] >= 0.0 && betas[i] < 1.0))
      throw validation_error("beta grid values must be in [0, 1)");
    if (i > 0 && !(betas[i] > betas[i - 1]))
      throw validation_error("beta grid must be strictly increasing");
  }
  if (!(band.eta_err >= 0.0) || !(band.r1_err >= 0.0))
    throw validation_error("uncertainty band errors must be >= 0");

  AmplificationCurve curve{base, band, {}};
  curve.points.reserve(betas.size());
  for (double b : betas) {
    ModelParams p = base;
    p.beta_loop = b;
    CurvePoint pt{};
    pt.beta = b;
    pt.a = amplification_full(p);
    pt.a_lo = pt.a;
    pt.a_hi = pt.a;
    for (double de : {-band.eta_err, band.eta_err}) {
      for (double dr : {band.r1_err, -band.r1_err}) {
        ModelParams q = p;
        q.eta_switch = std::min(1.0, std::max(0.0, p.eta_switch + de));
        q.r1 = std::max(0.0, p.r1 + dr);
        double a = amplification_full(q);
        pt.a_lo = std::min(pt.a_lo, a);
        pt.a_hi = std::max(pt.a_hi, a);
      }
    }
    curve.points.push_back(pt);
  }
  return curve;
}

inline void write_curve_csv(const AmplificationCurve& curve, std::ostream& os) {
  os << "beta,a,a_lo,a_hi\n";
  char line[160];
  for (const auto& pt : curve.points) {
    std::snprintf(line, sizeof line, "%.15g,%.15g,%.15g,%.15g\n", pt.beta, pt.a, pt.a_lo,
                  pt.a_hi);
    os << line;
  }
  if (!os) throw io_error("failed writing curve csv");
}

// Smallest beta with amplification_full >= 1. Returns 0 when the loop-off
// value eta_switch already reaches 1, nullopt when no beta in [0, 1) gets
// there. A is strictly increasing in beta, so bisection applies.
inline std::optional<double> breakeven_beta(const ModelParams& p) {
  p.validate();
  auto a_at = [&p](double b) {
    ModelParams q = p;
    q.beta_loop = b;
    try {
      return amplification_full(q);
    } catch (const divergence_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  if (a_at(0.0) >= 1.0) return 0.0;
  double lo = 0.0, hi = 1.0 - 1e-9;
  if (a_at(hi) < 1.0) return std::nullopt;
  // 60 halvings of [0,1) land far below the 1e-6 contract.
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    if (a_at(mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace cspdc
