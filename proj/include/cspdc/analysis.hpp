#pragma once
// Delay-plane analysis of matched triplets. The plane is x = t2 - t1 (herald
// to first telecom tag) against y = t3 - t2; true triplets pile up in a
// ladder of peaks spaced by the loop round-trip along x and centred on y = 0,
// accidentals spread over the whole plane. Peak counts feed the ladder
// estimator a = eta_pc * (1 + (P2+P3+P4)/P1) with first-order error
// propagation, and the result is compared against the closed-form model band.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cspdc/common.hpp"
#include "cspdc/model.hpp"
#include "cspdc/tags.hpp"

namespace cspdc {

// Sparse 2-D histogram with floor binning (bin index = floor(v / width)).
struct Hist2D {
  std::int64_t bin_width = 1;  // ticks per bin
  std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t> bins;
  std::uint64_t total = 0;
  double duration = 0.0;  // seconds of data behind the histogram

  static std::int64_t floor_div(std::int64_t v, std::int64_t w) {
    std::int64_t q = v / w;
    return (v % w != 0 && (v < 0)) ? q - 1 : q;
  }

  void add(std::int64_t x, std::int64_t y) {
    ++bins[{floor_div(x, bin_width), floor_div(y, bin_width)}];
    ++total;
  }

  // Histograms from independent runs merge by addition; durations add too.
  void merge(const Hist2D& other) {
    if (other.bin_width != bin_width)
      throw validation_error("cannot merge histograms with different bin widths");
    for (const auto& [xy, c] : other.bins) bins[xy] += c;
    total += other.total;
    duration += other.duration;
  }
};

inline Hist2D build_histogram(const std::vector<TripletEvent>& triplets,
                              std::int64_t bin_width = 1, double duration = 0.0) {
  if (bin_width < 1) throw validation_error("bin_width must be >= 1");
  if (duration < 0.0) throw validation_error("duration must be >= 0");
  Hist2D h;
  h.bin_width = bin_width;
  h.duration = duration;
  for (const auto& t : triplets) {
    h.add(static_cast<std::int64_t>(t.t2) - static_cast<std::int64_t>(t.t1),
          static_cast<std::int64_t>(t.t3) - static_cast<std::int64_t>(t.t2));
  }
  return h;
}

// Sparse dump, sorted by bin. Coordinates are the bin origins in ticks.
inline void write_histogram_csv(const Hist2D& h, std::ostream& os) {
  os << "x_tick,y_tick,count\n";
  char line[96];
  for (const auto& [xy, c] : h.bins) {
    std::snprintf(line, sizeof line, "%lld,%lld,%llu\n",
                  static_cast<long long>(xy.first * h.bin_width),
                  static_cast<long long>(xy.second * h.bin_width),
                  static_cast<unsigned long long>(c));
    os << line;
  }
  if (!os) throw io_error("failed writing histogram csv");
}

struct Peak {
  std::int64_t center = 0;     // window center along x, ticks
  std::int64_t halfwidth = 0;  // window half width, ticks (both axes)
  std::uint64_t count = 0;     // raw counts in the window
  double centroid = 0.0;       // count-weighted mean x inside the window
  double err = 0.0;            // sqrt(count)
};

struct PeakCounts {
  std::vector<Peak> peaks;
  std::int64_t x0 = 0;             // ladder origin: the tallest on-axis column
  double spacing = 0.0;            // requested peak spacing, ticks
  double spacing_fit = 0.0;        // centroid-regression spacing, ticks (NaN if < 2 peaks)
  double background_per_window = 0.0;  // mean count of the mid-gap windows
};

// Locates the peak ladder. x0 is the x bin with the most counts in the
// |y| <= halfwidth band; window k is the square |x - (x0 + round(k*spacing))|
// <= halfwidth, |y| <= halfwidth. Windows must not overlap. The background
// estimate repeats the same windows at the gap midpoints.
inline PeakCounts extract_peaks(const Hist2D& h, double spacing_ticks, int n_peaks = 4,
                                std::int64_t halfwidth_ticks = 12) {
  if (n_peaks < 1) throw validation_error("n_peaks must be >= 1");
  if (halfwidth_ticks < 0) throw validation_error("halfwidth must be >= 0");
  if (!(spacing_ticks > 0.0)) throw validation_error("peak spacing must be > 0");
  if (n_peaks > 1 && spacing_ticks <= 2.0 * double(halfwidth_ticks))
    throw validation_error("peak windows overlap: spacing <= 2*halfwidth");

  const std::int64_t bw = h.bin_width;

  // Column sums over the on-axis band.
  std::map<std::int64_t, std::uint64_t> column;
  for (const auto& [xy, c] : h.bins) {
    std::int64_t y = xy.second * bw;
    if (std::llabs(y) <= halfwidth_ticks) column[xy.first] += c;
  }
  PeakCounts pc;
  pc.spacing = spacing_ticks;
  std::uint64_t best = 0;
  bool found = false;
  for (const auto& [xbin, c] : column) {
    if (c > best) {
      best = c;
      pc.x0 = xbin * bw;
      found = true;
    }
  }
  if (!found) pc.x0 = 0;  // empty histogram: keep a defined ladder origin

  auto window_stats = [&](std::int64_t center) {
    std::int64_t clo = Hist2D::floor_div(center - halfwidth_ticks, bw);
    std::int64_t chi = Hist2D::floor_div(center + halfwidth_ticks, bw);
    std::uint64_t count = 0;
    double wx = 0.0;
    for (const auto& [xy, c] : h.bins) {
      if (xy.first < clo || xy.first > chi) continue;
      if (std::llabs(xy.second * bw) > halfwidth_ticks) continue;
      count += c;
      wx += double(c) * double(xy.first * bw);
    }
    return std::pair<std::uint64_t, double>(count, count ? wx / double(count) : double(center));
  };

  for (int k = 0; k < n_peaks; ++k) {
    Peak p;
    p.center = pc.x0 + static_cast<std::int64_t>(std::llround(double(k) * spacing_ticks));
    p.halfwidth = halfwidth_ticks;
    auto [count, centroid] = window_stats(p.center);
    p.count = count;
    p.centroid = centroid;
    p.err = std::sqrt(double(count));
    pc.peaks.push_back(p);
  }

  // Background: same windows at the gap midpoints.
  double bg = 0.0;
  int nbg = 0;
  for (int k = 0; k < n_peaks; ++k) {
    std::int64_t mid =
        pc.x0 + static_cast<std::int64_t>(std::llround((double(k) + 0.5) * spacing_ticks));
    bg += double(window_stats(mid).first);
    ++nbg;
  }
  pc.background_per_window = nbg ? bg / nbg : 0.0;

  // Ladder spacing from a least-squares line through the non-empty centroids.
  double sk = 0, sc = 0, skk = 0, skc = 0;
  int n = 0;
  for (int k = 0; k < n_peaks; ++k) {
    if (pc.peaks[k].count == 0) continue;
    double kk = double(k), cc = pc.peaks[k].centroid;
    sk += kk;
    sc += cc;
    skk += kk * kk;
    skc += kk * cc;
    ++n;
  }
  double denom = n * skk - sk * sk;
  pc.spacing_fit = (n >= 2 && denom > 0) ? (n * skc - sk * sc) / denom
                                         : std::numeric_limits<double>::quiet_NaN();
  return pc;
}

struct AmplificationEstimate {
  double value = 0.0;
  double err = 0.0;
  double p1 = 0.0;  // first-peak counts
  double s = 0.0;   // counts summed over the later peaks
};

// Ladder estimator: a = eta_pc * (1 + S/P1) with S the counts above the
// first peak. Poisson errors on the raw counts plus the eta uncertainty:
//   Var(a) = eta^2 S^2 / P1^3 + eta^2 S / P1^2 + (1 + S/P1)^2 sigma_eta^2.
inline AmplificationEstimate estimate_amplification(const PeakCounts& pc, double eta_pc,
                                                    double eta_pc_err = 0.0) {
  if (!(eta_pc > 0.0 && eta_pc <= 1.0)) throw validation_error("eta_pc must be in (0, 1]");
  if (!(eta_pc_err >= 0.0)) throw validation_error("eta_pc_err must be >= 0");
  if (pc.peaks.size() < 2)
    throw validation_error("amplification estimate needs at least 2 peak windows");
  double p1 = double(pc.peaks[0].count);
  if (p1 <= 0.0) throw validation_error("first peak window is empty");
  double s = 0.0;
  for (std::size_t i = 1; i < pc.peaks.size(); ++i) s += double(pc.peaks[i].count);
  AmplificationEstimate est;
  est.p1 = p1;
  est.s = s;
  est.value = eta_pc * (1.0 + s / p1);
  double var = eta_pc * eta_pc * s * s / (p1 * p1 * p1) + eta_pc * eta_pc * s / (p1 * p1) +
               (1.0 + s / p1) * (1.0 + s / p1) * eta_pc_err * eta_pc_err;
  est.err = std::sqrt(var);
  return est;
}

struct RateEstimate {
  double per_hour = 0.0;
  double err_per_hour = 0.0;
  std::uint64_t count = 0;
  double duration = 0.0;  // s
};

inline RateEstimate triplet_rate(std::uint64_t count, double duration_seconds) {
  if (!(duration_seconds > 0.0)) throw validation_error("duration must be > 0");
  RateEstimate r;
  r.count = count;
  r.duration = duration_seconds;
  r.per_hour = double(count) * 3600.0 / duration_seconds;
  r.err_per_hour = std::sqrt(double(count)) * 3600.0 / duration_seconds;
  return r;
}

struct ComparisonRow {
  double beta = 0.0;
  double a_exp = 0.0;
  double a_err = 0.0;
  double a_model = 0.0;
  double a_model_lo = 0.0;
  double a_model_hi = 0.0;
  double residual_sigma = 0.0;
};

struct ModelComparison {
  std::vector<ComparisonRow> rows;
  int n_flagged = 0;  // |residual| > 3 sigma
};

// Residuals between measured amplifications and a model curve, in units of
// the combined uncertainty (measurement error plus half the model band).
inline ModelComparison compare_to_model(
    const std::vector<std::pair<double, AmplificationEstimate>>& measured,
    const AmplificationCurve& curve) {
  ModelComparison cmp;
  for (const auto& [beta, est] : measured) {
    const CurvePoint* pt = nullptr;
    for (const auto& p : curve.points) {
      if (std::fabs(p.beta - beta) < 1e-9) {
        pt = &p;
        break;
      }
    }
    if (!pt)
      throw validation_error("beta grid mismatch: model curve has no point at beta = " +
                             std::to_string(beta));
    ComparisonRow row;
    row.beta = beta;
    row.a_exp = est.value;
    row.a_err = est.err;
    row.a_model = pt->a;
    row.a_model_lo = pt->a_lo;
    row.a_model_hi = pt->a_hi;
    double sigma_model = 0.5 * (pt->a_hi - pt->a_lo);
    double combined = std::sqrt(est.err * est.err + sigma_model * sigma_model);
    double diff = est.value - pt->a;
    if (combined > 0.0)
      row.residual_sigma = diff / combined;
    else
      row.residual_sigma = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
    if (std::fabs(row.residual_sigma) > 3.0) ++cmp.n_flagged;
    cmp.rows.push_back(row);
  }
  return cmp;
}

inline void write_peaks_csv(const PeakCounts& pc, std::ostream& os) {
  os << "index,center_ticks,halfwidth_ticks,count,err,centroid\n";
  char line[128];
  for (std::size_t i = 0; i < pc.peaks.size(); ++i) {
    const Peak& p = pc.peaks[i];
    std::snprintf(line, sizeof line, "%zu,%lld,%lld,%llu,%.6g,%.10g\n", i,
                  static_cast<long long>(p.center), static_cast<long long>(p.halfwidth),
                  static_cast<unsigned long long>(p.count), p.err, p.centroid);
    os << line;
  }
  if (!os) throw io_error("failed writing peaks csv");
}

}  // namespace cspdc
