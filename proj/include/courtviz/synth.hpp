#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "courtviz/compositor.hpp"
#include "courtviz/image.hpp"
#include "courtviz/model.hpp"
#include "courtviz/tracking.hpp"

namespace courtviz::synth {

/// One player moving in a straight line. Positions are rounded to whole
/// pixels per frame so drawn rectangles and tracking boxes agree exactly.
struct EntityScript {
  std::string id;
  Point start;     // top-left at frame 0
  Point velocity;  // px / frame
  int width = 20;
  int height = 40;
  std::optional<Rgba> color;  // seeded when absent
};

struct SceneSpec {
  int width = 64;
  int height = 36;
  Rational fps{30};
  std::int64_t frame_count = 10;
  Sport sport = Sport::kBasketball;
  Rgba court{196, 140, 90, 255};
  Rgba line{250, 250, 250, 255};
  int noise = 6;  // +/- amplitude of the seeded court texture
  bool keypoints = false;
  std::vector<EntityScript> entities;

  VideoMeta meta() const { return {width, height, fps, frame_count}; }
};

SceneSpec scene_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SceneSpec& spec);

struct Scene {
  std::vector<RgbImage> frames;
  std::vector<AlphaPlane> masks;
  TrackingDataset dataset;
};

/// Throws Error(kInvalidArgument) when an entity leaves the frame.
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed);

/// Writes video/frame_%06d.png, masks/mask_%06d.png and tracking.json
/// under dir, plus video.y4m when `y4m` is set.
void write_scene(const Scene& scene, const std::filesystem::path& dir, bool y4m = false);

/// Project referencing the layout produced by write_scene.
Project project_for_scene(const SceneSpec& spec);

/// Straight per-pixel implementation of the compositing pipeline, kept slow
/// and obvious on purpose; the optimized compositor must match it byte for
/// byte.
Canvas reference_render(const FramePlan& plan, const RgbImage& bg, const AlphaPlane& mask);

inline constexpr std::int64_t kDefaultCaptionInterval = 30;

/// Rule-based stand-in for a captioning model: one caption per sampled frame.
std::vector<Caption> stub_captioner(const TrackingDataset& dataset,
                                    std::int64_t every_n_frames = kDefaultCaptionInterval);

}  // namespace courtviz::synth
