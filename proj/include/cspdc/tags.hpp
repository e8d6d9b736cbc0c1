#pragma once
// Time-tag streams and the triplet coincidence search.
//
// Binary stream layout, little endian:
//   offset  0: magic "TTG1"
//   offset  4: u8  format version (1)
//   offset  5: u64 tick duration in femtoseconds
//   offset 13: u64 record count
//   offset 21: records, 9 bytes each: u8 channel, u64 tick index
// CSV alternative: header line "channel,ticks", one record per line.
// Channel 1 is the herald detector, channels 2 and 3 the telecom pair.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <deque>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "cspdc/common.hpp"

namespace cspdc {

struct TimeTag {
  std::uint8_t channel = 0;
  std::uint64_t ticks = 0;
  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

// Coincidence window: 614 ticks = 95.9375 ns at 156.25 ps per tick.
inline constexpr std::uint64_t kCoincidenceWindowTicks = 614;
static_assert(95937500 / kDefaultTickFs == kCoincidenceWindowTicks &&
              95937500 % kDefaultTickFs == 0);

inline constexpr std::uint8_t kStreamVersion = 1;
inline constexpr std::size_t kStreamHeaderBytes = 21;
inline constexpr std::size_t kStreamRecordBytes = 9;

struct StreamInfo {
  std::uint64_t tick_fs = kDefaultTickFs;
  std::uint64_t count = 0;
};

namespace detail {

inline void put_u64le(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

inline std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void check_tag_valid(const TimeTag& t, bool have_last, std::uint64_t last_ticks,
                            std::uint64_t offset) {
  if (t.channel < 1 || t.channel > 3)
    throw parse_error("bad channel " + std::to_string(int(t.channel)) + ", expected 1..3",
                      offset);
  if (have_last && t.ticks < last_ticks)
    throw parse_error("out-of-order tag: " + std::to_string(t.ticks) + " after " +
                          std::to_string(last_ticks),
                      offset);
}

}  // namespace detail

// Writes the binary format. Tags must be time-ordered with channels in 1..3.
// Returns the number of bytes written.
inline std::uint64_t write_stream(const std::vector<TimeTag>& tags, std::ostream& os,
                                  std::uint64_t tick_fs = kDefaultTickFs) {
  if (tick_fs == 0) throw validation_error("tick_fs must be > 0");
  unsigned char header[kStreamHeaderBytes] = {'T', 'T', 'G', '1', kStreamVersion};
  detail::put_u64le(header + 5, tick_fs);
  detail::put_u64le(header + 13, tags.size());
  os.write(reinterpret_cast<const char*>(header), sizeof header);
  unsigned char rec[kStreamRecordBytes];
  std::uint64_t last = 0;
  bool have_last = false;
  for (const auto& t : tags) {
    if (t.channel < 1 || t.channel > 3) throw validation_error("tag channel must be 1..3");
    if (have_last && t.ticks < last) throw validation_error("tags must be time-ordered");
    last = t.ticks;
    have_last = true;
    rec[0] = t.channel;
    detail::put_u64le(rec + 1, t.ticks);
    os.write(reinterpret_cast<const char*>(rec), sizeof rec);
  }
  if (!os) throw io_error("failed writing tag stream");
  return kStreamHeaderBytes + kStreamRecordBytes * tags.size();
}

inline void write_stream_csv(const std::vector<TimeTag>& tags, std::ostream& os) {
  os << "channel,ticks\n";
  char line[48];
  std::uint64_t last = 0;
  bool have_last = false;
  for (const auto& t : tags) {
    if (t.channel < 1 || t.channel > 3) throw validation_error("tag channel must be 1..3");
    if (have_last && t.ticks < last) throw validation_error("tags must be time-ordered");
    last = t.ticks;
    have_last = true;
    std::snprintf(line, sizeof line, "%u,%llu\n", unsigned(t.channel),
                  static_cast<unsigned long long>(t.ticks));
    os << line;
  }
  if (!os) throw io_error("failed writing tag csv");
}

// Incremental reader for both formats; the format is detected from the first
// bytes. Errors carry the byte offset of the offending field.
class StreamReader {
 public:
  explicit StreamReader(std::istream& is) : is_(&is) {
    char magic[4] = {};
    is.read(magic, 4);
    std::size_t got = static_cast<std::size_t>(is.gcount());
    if (got == 4 && std::memcmp(magic, "TTG1", 4) == 0) {
      fmt_ = Fmt::binary;
      unsigned char rest[kStreamHeaderBytes - 4];
      is.read(reinterpret_cast<char*>(rest), sizeof rest);
      if (static_cast<std::size_t>(is.gcount()) != sizeof rest)
        throw parse_error("malformed header: truncated before field at offset",
                          4 + static_cast<std::uint64_t>(is.gcount()));
      if (rest[0] != kStreamVersion)
        throw parse_error("unsupported stream version " + std::to_string(int(rest[0])), 4);
      info_.tick_fs = detail::get_u64le(rest + 1);
      if (info_.tick_fs == 0) throw parse_error("tick_fs must be > 0", 5);
      info_.count = detail::get_u64le(rest + 9);
      offset_ = kStreamHeaderBytes;
    } else {
      // CSV. Re-assemble the first line from the bytes already consumed.
      fmt_ = Fmt::csv;
      std::string first(magic, got);
      offset_ = got;
      if (got == 4) {
        std::string tail;
        if (std::getline(is, tail)) {
          first += tail;
          offset_ += tail.size() + 1;
        }
      }
      while (!first.empty() && (first.back() == '\n' || first.back() == '\r'))
        first.pop_back();
      if (first != "channel,ticks")
        throw parse_error("malformed header: expected 'channel,ticks'", 0);
    }
  }

  const StreamInfo& info() const { return info_; }
  std::uint64_t records_read() const { return nread_; }

  // Reads the next tag. Returns false at a clean end of stream.
  bool next(TimeTag& out) {
    if (fmt_ == Fmt::binary) return next_binary(out);
    return next_csv(out);
  }

 private:
  enum class Fmt { binary, csv };

  bool next_binary(TimeTag& out) {
    if (nread_ == info_.count) {
      // Trailing garbage after the declared record count is an error.
      char c;
      if (is_->read(&c, 1).gcount() == 1)
        throw parse_error("trailing bytes after " + std::to_string(info_.count) + " records",
                          offset_);
      return false;
    }
    unsigned char rec[kStreamRecordBytes];
    is_->read(reinterpret_cast<char*>(rec), sizeof rec);
    if (static_cast<std::size_t>(is_->gcount()) != sizeof rec)
      throw parse_error("truncated stream: got " + std::to_string(nread_) + " of " +
                            std::to_string(info_.count) + " records",
                        offset_ + static_cast<std::uint64_t>(is_->gcount()));
    out.channel = rec[0];
    out.ticks = detail::get_u64le(rec + 1);
    detail::check_tag_valid(out, nread_ > 0, last_ticks_, offset_);
    last_ticks_ = out.ticks;
    offset_ += kStreamRecordBytes;
    ++nread_;
    return true;
  }

  bool next_csv(TimeTag& out) {
    std::string line;
    for (;;) {
      if (!std::getline(*is_, line)) return false;
      std::uint64_t line_offset = offset_;
      offset_ += line.size() + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      unsigned ch = 0;
      unsigned long long ticks = 0;
      char extra;
      int n = std::sscanf(line.c_str(), "%u,%llu%c", &ch, &ticks, &extra);
      // sscanf wraps negative input into huge unsigned values; reject it.
      if (n != 2 || line.find('-') != std::string::npos)
        throw parse_error("malformed record '" + line + "'", line_offset);
      out.channel = static_cast<std::uint8_t>(ch <= 255 ? ch : 0);
      out.ticks = ticks;
      detail::check_tag_valid(out, nread_ > 0, last_ticks_, line_offset);
      last_ticks_ = out.ticks;
      ++nread_;
      info_.count = nread_;
      return true;
    }
  }

  std::istream* is_;
  Fmt fmt_ = Fmt::binary;
  StreamInfo info_;
  std::uint64_t nread_ = 0;
  std::uint64_t offset_ = 0;
  std::uint64_t last_ticks_ = 0;
};

inline std::vector<TimeTag> read_stream(std::istream& is, StreamInfo* info = nullptr) {
  StreamReader r(is);
  std::vector<TimeTag> out;
  if (r.info().count > 0) out.reserve(r.info().count);
  TimeTag t;
  while (r.next(t)) out.push_back(t);
  if (info) *info = r.info();
  return out;
}

// One matched triplet: herald tick, channel-2 tick, channel-3 tick.
// Matcher contract: t2 - t1 in [0, W] and |t3 - t2| <= W.
struct TripletEvent {
  std::uint64_t t1 = 0;
  std::uint64_t t2 = 0;
  std::uint64_t t3 = 0;
  friend bool operator==(const TripletEvent&, const TripletEvent&) = default;
};

// Greedy earliest-match triplet search over a time-ordered tag stream.
// Heralds are processed in arrival order; each takes the earliest unused
// channel-2 tag in [t1, t1+W], then the earliest unused channel-3 tag in
// [t2-W, t2+W]. Tags are single-use. If no channel-3 partner exists the
// channel-2 candidate is NOT consumed. Greedy means greedy: a herald never
// retries with a later channel-2 tag, even if that would have completed a
// triplet.
//
// The finder is incremental and keeps only tags that can still participate
// (a window of 2W behind the newest tag), so arbitrarily long streams run in
// bounded memory apart from the emitted triplets.
class TripletFinder {
 public:
  explicit TripletFinder(std::uint64_t window_ticks = kCoincidenceWindowTicks)
      : w_(window_ticks) {}

  void push(const TimeTag& tag) {
    if (tag.channel < 1 || tag.channel > 3)
      throw validation_error("tag channel must be 1..3");
    if (have_last_ && tag.ticks < last_)
      throw validation_error("tags must be pushed in time order");
    last_ = tag.ticks;
    have_last_ = true;
    switch (tag.channel) {
      case 1: d1_.push_back(tag.ticks); break;
      case 2: d2_.push_back({tag.ticks, false}); break;
      default: d3_.push_back({tag.ticks, false}); break;
    }
    drain(false);
  }

  void finish() { drain(true); }

  const std::vector<TripletEvent>& triplets() const { return out_; }
  std::vector<TripletEvent> take() { return std::move(out_); }

  // Internal buffer occupancy, exposed so tests can check boundedness.
  std::size_t pending_tags() const { return d1_.size() + d2_.size() + d3_.size(); }

 private:
  struct Cand {
    std::uint64_t t;
    bool used;
  };

  // A herald at t1 is decided once every tag up to t1 + 2W has arrived
  // (channel-2 partners reach t1+W, channel-3 partners reach t2+W <= t1+2W).
  void drain(bool flush_all) {
    while (!d1_.empty()) {
      std::uint64_t t1 = d1_.front();
      if (!flush_all && !(last_ > 2 * w_ && t1 < last_ - 2 * w_)) break;
      d1_.pop_front();
      prune(t1);
      match(t1);
    }
    if (flush_all) {
      d2_.clear();
      d3_.clear();
    }
  }

  void prune(std::uint64_t t1) {
    // Channel-2 tags before t1 can never serve a later herald; channel-3
    // tags need t3 >= t2 - W >= t1 - W.
    while (!d2_.empty() && (d2_.front().used || d2_.front().t < t1)) d2_.pop_front();
    std::uint64_t keep3 = (t1 >= w_) ? t1 - w_ : 0;
    while (!d3_.empty() && (d3_.front().used || d3_.front().t < keep3)) d3_.pop_front();
  }

  void match(std::uint64_t t1) {
    Cand* c2 = nullptr;
    for (auto& c : d2_) {
      if (c.t > t1 + w_) break;
      if (!c.used && c.t >= t1) {
        c2 = &c;
        break;
      }
    }
    if (!c2) return;
    std::uint64_t lo3 = (c2->t >= w_) ? c2->t - w_ : 0;
    for (auto& c : d3_) {
      if (c.t > c2->t + w_) break;
      if (!c.used && c.t >= lo3) {
        c2->used = true;
        c.used = true;
        out_.push_back({t1, c2->t, c.t});
        return;
      }
    }
  }

  std::uint64_t w_;
  std::deque<std::uint64_t> d1_;
  std::deque<Cand> d2_, d3_;
  std::uint64_t last_ = 0;
  bool have_last_ = false;
  std::vector<TripletEvent> out_;
};

inline std::vector<TripletEvent> find_triplets(
    const std::vector<TimeTag>& tags, std::uint64_t window_ticks = kCoincidenceWindowTicks) {
  TripletFinder f(window_ticks);
  for (const auto& t : tags) f.push(t);
  f.finish();
  return f.take();
}

inline void write_triplets_csv(const std::vector<TripletEvent>& ts, std::ostream& os) {
  os << "t1,t2,t3\n";
  char line[80];
  for (const auto& t : ts) {
    std::snprintf(line, sizeof line, "%llu,%llu,%llu\n",
                  static_cast<unsigned long long>(t.t1),
                  static_cast<unsigned long long>(t.t2),
                  static_cast<unsigned long long>(t.t3));
    os << line;
  }
  if (!os) throw io_error("failed writing triplet csv");
}

}  // namespace cspdc
