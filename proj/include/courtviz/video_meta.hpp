#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "courtviz/rational.hpp"

namespace courtviz {

struct VideoMeta {
  int width = 0;
  int height = 0;
  Rational fps{30};
  std::int64_t frame_count = 1;

  friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

/// Empty when meta is usable: dimensions >= 16 and even, fps > 0, at least one frame.
std::vector<std::string> meta_violations(const VideoMeta& meta, const std::string& prefix = "meta");

}  // namespace courtviz
