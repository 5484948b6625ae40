#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "courtviz/geometry.hpp"
#include "courtviz/video_meta.hpp"

namespace courtviz {

struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  bool contains(Point p) const { return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// COCO-17 keypoint order.
enum class Keypoint : int {
  kNose = 0,
  kLeftEye,
  kRightEye,
  kLeftEar,
  kRightEar,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftAnkle,
  kRightAnkle,
};
inline constexpr std::size_t kKeypointCount = 17;

using Keypoints = std::array<std::optional<Point>, kKeypointCount>;

struct TrackSample {
  BBox bbox;
  double confidence = 1.0;
  std::optional<Keypoints> keypoints;
  bool interpolated = false;

  friend bool operator==(const TrackSample&, const TrackSample&) = default;
};

struct EntityTrack {
  std::string entity_id;
  std::map<std::int64_t, TrackSample> samples;

  const TrackSample* sample_at(std::int64_t frame) const;

  friend bool operator==(const EntityTrack&, const EntityTrack&) = default;
};

enum class Sport { kBasketball, kSoccer, kVolleyball, kLacrosse, kTennis };

std::string_view to_string(Sport sport);
Sport sport_from_string(std::string_view name);

struct TrackingDataset {
  VideoMeta meta;
  Sport sport = Sport::kBasketball;
  std::vector<EntityTrack> entities;

  const EntityTrack* find(std::string_view entity_id) const;

  friend bool operator==(const TrackingDataset&, const TrackingDataset&) = default;
};

enum class Placement { kHead, kWaist, kGround };

std::string_view to_string(Placement placement);
Placement placement_from_string(std::string_view name);

inline constexpr std::int64_t kDefaultMaxGap = 12;

/// Canonical JSON tracking document. Throws Error(kParse) naming the record
/// (or the line and column for malformed JSON).
TrackingDataset parse_tracking_canonical(std::string_view text);
std::string encode_tracking_canonical(const TrackingDataset& dataset);

/// MOT-style `frame,id,x,y,w,h,conf[,...]` rows with 1-based frames.
TrackingDataset parse_tracking_mot_csv(std::string_view text, const VideoMeta& meta,
                                       Sport sport = Sport::kBasketball);
std::string encode_tracking_mot_csv(const TrackingDataset& dataset);

/// Fills every missing run of at most max_gap frames between two samples by
/// linear interpolation. Original samples are never modified.
EntityTrack interpolate_gaps(const EntityTrack& track, std::int64_t max_gap = kDefaultMaxGap);
TrackingDataset interpolate_gaps(const TrackingDataset& dataset, std::int64_t max_gap = kDefaultMaxGap);

/// Head, waist or ground point of an entity at a source frame. Uses pose
/// keypoints when the relevant ones are present, otherwise the bounding box.
/// Empty when the entity has no sample at that frame; throws
/// Error(kNotFound) for an unknown entity.
std::optional<Point> resolve_anchor(const TrackingDataset& dataset, std::string_view entity_id,
                                    std::int64_t source_frame, Placement placement);

}  // namespace courtviz
