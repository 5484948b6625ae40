#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "courtviz/rational.hpp"

namespace courtviz {

inline constexpr std::int64_t kDefaultFreezeFrames = 60;
inline const Rational kMinSpeed{1, 8};
inline const Rational kMaxSpeed{8, 1};

/// A contiguous run of the source clip played at one speed.
///
/// A non-frozen segment samples source positions
///   source_start + phase + k * speed,  k = 0, 1, ...
/// while they stay below source_start + source_len - trim. `phase` and `trim`
/// are fractional remainders in [0, 1) left behind by splitting a segment
/// whose speed is not an integer; they are zero for segments that were never
/// split. A frozen segment holds source_start for source_len output frames.
struct Segment {
  std::int64_t source_start = 0;
  std::int64_t source_len = 1;
  Rational speed{1};
  bool frozen = false;
  bool muted = false;
  Rational phase{0};
  Rational trim{0};

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SourceRef {
  std::int64_t source_frame = 0;
  bool muted = false;
  bool frozen = false;
  int segment_index = 0;

  friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

struct Timeline {
  std::vector<Segment> segments;

  static Timeline identity(std::int64_t frame_count);

  friend bool operator==(const Timeline&, const Timeline&) = default;
};

std::int64_t segment_output_length(const Segment& seg);
std::int64_t output_duration(const Timeline& tl);

/// Throws Error(kOutOfRange) unless 0 <= n < output_duration(tl).
SourceRef map_output_frame(const Timeline& tl, std::int64_t n);

/// Empty when the timeline is valid against a clip of frame_count frames.
std::vector<std::string> timeline_violations(const Timeline& tl, std::int64_t frame_count);

Timeline split_at(const Timeline& tl, std::int64_t n);
Timeline insert_freeze(const Timeline& tl, std::int64_t n, std::int64_t duration = kDefaultFreezeFrames);
Timeline set_speed(const Timeline& tl, int segment_index, Rational speed);
Timeline set_muted(const Timeline& tl, int segment_index, bool muted);
Timeline duplicate_segment(const Timeline& tl, int segment_index);

struct FrameRange {
  std::int64_t start = 0;
  std::int64_t end = 0;  // exclusive

  friend bool operator==(const FrameRange&, const FrameRange&) = default;
};

/// Output ranges covered by muted segments, adjacent ranges merged.
std::vector<FrameRange> muted_ranges(const Timeline& tl);

}  // namespace courtviz
