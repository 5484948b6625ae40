#include "courtviz/timeline.hpp"

#include <string>

#include "courtviz/error.hpp"

namespace courtviz {

namespace {

struct Located {
  std::size_t index = 0;
  std::int64_t offset = 0;  // output offset inside the segment
};

Located locate(const Timeline& tl, std::int64_t n) {
  if (n < 0) throw Error(ErrorCode::kOutOfRange, "output frame " + std::to_string(n) + " is negative");
  std::int64_t begin = 0;
  for (std::size_t i = 0; i < tl.segments.size(); ++i) {
    const std::int64_t len = segment_output_length(tl.segments[i]);
    if (n < begin + len) return {i, n - begin};
    begin += len;
  }
  throw Error(ErrorCode::kOutOfRange,
              "output frame " + std::to_string(n) + " is past the end (" + std::to_string(begin) + ")");
}

void check_segment_index(const Timeline& tl, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= tl.segments.size()) {
    throw Error(ErrorCode::kOutOfRange, "segment index " + std::to_string(index) + " out of range (have " +
                                            std::to_string(tl.segments.size()) + ")");
  }
}

Rational effective_source_len(const Segment& seg) { return Rational(seg.source_len) - seg.phase - seg.trim; }

}  // namespace

Timeline Timeline::identity(std::int64_t frame_count) {
  Timeline tl;
  tl.segments.push_back(Segment{0, frame_count});
  return tl;
}

std::int64_t segment_output_length(const Segment& seg) {
  if (seg.frozen) return seg.source_len;
  return (effective_source_len(seg) / seg.speed).ceil();
}

std::int64_t output_duration(const Timeline& tl) {
  std::int64_t total = 0;
  for (const auto& seg : tl.segments) total += segment_output_length(seg);
  return total;
}

SourceRef map_output_frame(const Timeline& tl, std::int64_t n) {
  const Located at = locate(tl, n);
  const Segment& seg = tl.segments[at.index];
  SourceRef ref;
  ref.muted = seg.muted;
  ref.frozen = seg.frozen;
  ref.segment_index = static_cast<int>(at.index);
  if (seg.frozen) {
    ref.source_frame = seg.source_start;
  } else {
    const std::int64_t step = (seg.phase + Rational(at.offset) * seg.speed).floor();
    ref.source_frame = seg.source_start + std::min(step, seg.source_len - 1);
  }
  return ref;
}

std::vector<std::string> timeline_violations(const Timeline& tl, std::int64_t frame_count) {
  std::vector<std::string> out;
  if (tl.segments.empty()) {
    out.emplace_back("timeline.segments: must not be empty");
    return out;
  }
  for (std::size_t i = 0; i < tl.segments.size(); ++i) {
    const Segment& s = tl.segments[i];
    const std::string f = "timeline.segments[" + std::to_string(i) + "]";
    if (s.source_start < 0 || s.source_start >= frame_count) {
      out.push_back(f + ".source_start: must lie within [0, frame_count)");
    }
    if (s.source_len < 1) {
      out.push_back(f + ".source_len: must be at least 1");
      continue;
    }
    if (!s.frozen && s.source_start + s.source_len > frame_count) {
      out.push_back(f + ".source_len: source range exceeds frame_count");
    }
    if (s.speed < kMinSpeed || s.speed > kMaxSpeed) out.push_back(f + ".speed: must lie within [1/8, 8]");
    if (s.phase < Rational(0) || s.phase >= Rational(1)) out.push_back(f + ".phase: must lie within [0, 1)");
    if (s.trim < Rational(0) || s.trim >= Rational(1)) out.push_back(f + ".trim: must lie within [0, 1)");
    if (s.frozen && (s.phase != Rational(0) || s.trim != Rational(0) || s.speed != Rational(1))) {
      out.push_back(f + ".frozen: frozen segments carry no speed, phase or trim");
    }
    if (!s.frozen && effective_source_len(s) <= Rational(0)) {
      out.push_back(f + ".source_len: segment covers no source frames");
    }
  }
  return out;
}

Timeline split_at(const Timeline& tl, std::int64_t n) {
  const std::int64_t duration = output_duration(tl);
  if (n <= 0 || n >= duration) {
    throw Error(ErrorCode::kOutOfRange,
                "split point " + std::to_string(n) + " must lie strictly inside (0, " + std::to_string(duration) + ")");
  }
  const Located at = locate(tl, n);
  if (at.offset == 0) return tl;  // already a boundary

  const Segment& seg = tl.segments[at.index];
  Segment head = seg;
  Segment tail = seg;
  if (seg.frozen) {
    head.source_len = at.offset;
    tail.source_len = seg.source_len - at.offset;
  } else {
    // Source position of the first output frame of the tail, relative to source_start.
    const Rational pos = seg.phase + Rational(at.offset) * seg.speed;
    head.source_len = pos.ceil();
    head.trim = Rational(pos.ceil()) - pos;
    tail.source_start = seg.source_start + pos.floor();
    tail.source_len = seg.source_len - pos.floor();
    tail.phase = pos.frac();
  }
  Timeline out = tl;
  out.segments[at.index] = head;
  out.segments.insert(out.segments.begin() + static_cast<std::ptrdiff_t>(at.index) + 1, tail);
  return out;
}

Timeline insert_freeze(const Timeline& tl, std::int64_t n, std::int64_t duration) {
  const std::int64_t total = output_duration(tl);
  if (n < 0 || n > total) {
    throw Error(ErrorCode::kOutOfRange,
                "freeze point " + std::to_string(n) + " must lie within [0, " + std::to_string(total) + "]");
  }
  if (duration < 1) throw Error(ErrorCode::kInvalidArgument, "freeze duration must be at least 1");

  const SourceRef held = map_output_frame(tl, n < total ? n : n - 1);
  Timeline out = (n > 0 && n < total) ? split_at(tl, n) : tl;

  std::size_t insert_at = out.segments.size();
  std::int64_t begin = 0;
  for (std::size_t i = 0; i < out.segments.size(); ++i) {
    if (begin == n) {
      insert_at = i;
      break;
    }
    begin += segment_output_length(out.segments[i]);
  }
  Segment freeze;
  freeze.source_start = held.source_frame;
  freeze.source_len = duration;
  freeze.frozen = true;
  freeze.muted = held.muted;
  out.segments.insert(out.segments.begin() + static_cast<std::ptrdiff_t>(insert_at), freeze);
  return out;
}

Timeline set_speed(const Timeline& tl, int segment_index, Rational speed) {
  check_segment_index(tl, segment_index);
  if (speed < kMinSpeed || speed > kMaxSpeed) {
    throw Error(ErrorCode::kInvalidArgument, "speed " + std::to_string(speed.num()) + "/" +
                                                 std::to_string(speed.den()) + " outside [1/8, 8]");
  }
  Timeline out = tl;
  Segment& seg = out.segments[static_cast<std::size_t>(segment_index)];
  if (seg.frozen) throw Error(ErrorCode::kInvalidArgument, "cannot change the speed of a frozen segment");
  seg.speed = speed;
  return out;
}

Timeline set_muted(const Timeline& tl, int segment_index, bool muted) {
  check_segment_index(tl, segment_index);
  Timeline out = tl;
  out.segments[static_cast<std::size_t>(segment_index)].muted = muted;
  return out;
}

Timeline duplicate_segment(const Timeline& tl, int segment_index) {
  check_segment_index(tl, segment_index);
  Timeline out = tl;
  const Segment copy = out.segments[static_cast<std::size_t>(segment_index)];
  out.segments.insert(out.segments.begin() + segment_index + 1, copy);
  return out;
}

std::vector<FrameRange> muted_ranges(const Timeline& tl) {
  std::vector<FrameRange> out;
  std::int64_t begin = 0;
  for (const auto& seg : tl.segments) {
    const std::int64_t len = segment_output_length(seg);
    if (seg.muted) {
      if (!out.empty() && out.back().end == begin) {
        out.back().end = begin + len;
      } else {
        out.push_back({begin, begin + len});
      }
    }
    begin += len;
  }
  return out;
}

}  // namespace courtviz
