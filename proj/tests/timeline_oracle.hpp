#pragma once

// Brute-force timeline model: each segment is an absolute source interval
// [a, b) walked in steps of `speed`, or a held frame repeated `hold` times.
// Output lists are materialized frame by frame.

#include <cstdint>
#include <random>
#include <vector>

#include "courtviz/rational.hpp"
#include "courtviz/timeline.hpp"

namespace testing {

struct OracleSegment {
  courtviz::Rational a{0};
  courtviz::Rational b{0};
  courtviz::Rational speed{1};
  bool frozen = false;
  std::int64_t held = 0;
  std::int64_t hold = 0;
  bool muted = false;

  std::vector<std::int64_t> frames() const {
    std::vector<std::int64_t> out;
    if (frozen) {
      out.assign(static_cast<std::size_t>(hold), held);
      return out;
    }
    for (courtviz::Rational p = a; p < b; p = p + speed) out.push_back(p.floor());
    return out;
  }
};

class OracleTimeline {
 public:
  explicit OracleTimeline(std::int64_t frame_count) {
    segments_.push_back({courtviz::Rational(0), courtviz::Rational(frame_count)});
  }

  std::vector<std::int64_t> frames() const {
    std::vector<std::int64_t> out;
    for (const auto& s : segments_) {
      const auto f = s.frames();
      out.insert(out.end(), f.begin(), f.end());
    }
    return out;
  }

  std::vector<bool> muted() const {
    std::vector<bool> out;
    for (const auto& s : segments_) out.insert(out.end(), s.frames().size(), s.muted);
    return out;
  }

  std::size_t segment_count() const { return segments_.size(); }

  void split(std::int64_t n) {
    std::int64_t begin = 0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto len = static_cast<std::int64_t>(segments_[i].frames().size());
      if (n < begin + len) {
        const std::int64_t k = n - begin;
        if (k == 0) return;
        OracleSegment head = segments_[i];
        OracleSegment tail = segments_[i];
        if (head.frozen) {
          head.hold = k;
          tail.hold -= k;
        } else {
          courtviz::Rational p = head.a;
          for (std::int64_t j = 0; j < k; ++j) p = p + head.speed;
          head.b = p;
          tail.a = p;
        }
        segments_[i] = head;
        segments_.insert(segments_.begin() + static_cast<std::ptrdiff_t>(i) + 1, tail);
        return;
      }
      begin += len;
    }
  }

  void freeze(std::int64_t n, std::int64_t duration) {
    const auto all = frames();
    const std::int64_t held = all[static_cast<std::size_t>(n < static_cast<std::int64_t>(all.size()) ? n : n - 1)];
    const auto mutes = muted();
    const bool mute = mutes[static_cast<std::size_t>(n < static_cast<std::int64_t>(all.size()) ? n : n - 1)];
    split(n);
    std::int64_t begin = 0;
    std::size_t at = segments_.size();
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (begin == n) {
        at = i;
        break;
      }
      begin += static_cast<std::int64_t>(segments_[i].frames().size());
    }
    OracleSegment f;
    f.frozen = true;
    f.held = held;
    f.hold = duration;
    f.muted = mute;
    segments_.insert(segments_.begin() + static_cast<std::ptrdiff_t>(at), f);
  }

  bool set_speed(std::size_t i, courtviz::Rational speed) {
    if (segments_[i].frozen) return false;
    segments_[i].speed = speed;
    return true;
  }
  void set_muted(std::size_t i, bool m) { segments_[i].muted = m; }
  void duplicate(std::size_t i) {
    segments_.insert(segments_.begin() + static_cast<std::ptrdiff_t>(i) + 1, segments_[i]);
  }

 private:
  std::vector<OracleSegment> segments_;
};

struct EditOutcome {
  bool ok = true;
  std::string what;
};

/// Applies one random edit to both models. Returns false in `ok` with a
/// description at the first disagreement.
inline EditOutcome random_edit(std::mt19937_64& rng, courtviz::Timeline& tl, OracleTimeline& oracle) {
  using courtviz::Rational;
  static const Rational kSpeeds[] = {Rational(1, 8), Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(2, 3),
                                     Rational(1),    Rational(3, 2), Rational(2),    Rational(3),    Rational(8)};
  const std::int64_t duration = courtviz::output_duration(tl);
  const auto segs = static_cast<int>(tl.segments.size());
  switch (rng() % 5) {
    case 0: {
      if (duration < 2) return {};
      const auto n = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(duration - 1));
      const auto before = oracle.frames();
      tl = courtviz::split_at(tl, n);
      oracle.split(n);
      if (courtviz::output_duration(tl) != duration) return {false, "split changed the duration"};
      if (oracle.frames() != before) return {false, "oracle split changed its own mapping"};
      return {};
    }
    case 1: {
      const auto n = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(duration + 1));
      const auto d = 1 + static_cast<std::int64_t>(rng() % 40);
      tl = courtviz::insert_freeze(tl, n, d);
      oracle.freeze(n, d);
      if (courtviz::output_duration(tl) != duration + d) return {false, "freeze did not add its duration"};
      return {};
    }
    case 2: {
      const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(segs));
      const Rational s = kSpeeds[rng() % std::size(kSpeeds)];
      if (tl.segments[static_cast<std::size_t>(i)].frozen) return {};
      const auto out_before = courtviz::segment_output_length(tl.segments[static_cast<std::size_t>(i)]);
      tl = courtviz::set_speed(tl, i, s);
      oracle.set_speed(static_cast<std::size_t>(i), s);
      const auto out_after = courtviz::segment_output_length(tl.segments[static_cast<std::size_t>(i)]);
      if (courtviz::output_duration(tl) != duration - out_before + out_after) return {false, "speed touched other segments"};
      return {};
    }
    case 3: {
      const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(segs));
      const bool m = rng() % 2 == 0;
      tl = courtviz::set_muted(tl, i, m);
      oracle.set_muted(static_cast<std::size_t>(i), m);
      return {};
    }
    default: {
      if (duration > 600) return {};
      const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(segs));
      tl = courtviz::duplicate_segment(tl, i);
      oracle.duplicate(static_cast<std::size_t>(i));
      return {};
    }
  }
}

/// Full brute-force comparison of mapping, mute flags and segment count.
inline EditOutcome compare(const courtviz::Timeline& tl, const OracleTimeline& oracle) {
  const auto frames = oracle.frames();
  const auto mutes = oracle.muted();
  if (courtviz::output_duration(tl) != static_cast<std::int64_t>(frames.size())) {
    return {false, "duration " + std::to_string(courtviz::output_duration(tl)) + " vs oracle " +
                       std::to_string(frames.size())};
  }
  if (tl.segments.size() != oracle.segment_count()) return {false, "segment count differs"};
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const auto ref = courtviz::map_output_frame(tl, static_cast<std::int64_t>(n));
    if (ref.source_frame != frames[n] || ref.muted != mutes[n]) {
      return {false, "output " + std::to_string(n) + " maps to " + std::to_string(ref.source_frame) +
                         ", oracle says " + std::to_string(frames[n])};
    }
  }
  return {};
}

}  // namespace testing
