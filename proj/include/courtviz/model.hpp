#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "courtviz/geometry.hpp"
#include "courtviz/timeline.hpp"
#include "courtviz/tracking.hpp"
#include "courtviz/video_meta.hpp"

namespace courtviz {

inline constexpr int kSchemaVersion = 1;

/// 8-bit straight-alpha color as stored in the document.
struct Rgba {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  std::uint8_t a = 255;

  friend bool operator==(const Rgba&, const Rgba&) = default;
};

enum class ObjectKind {
  kCircle,
  kSpotlight,
  kConnector,
  kPath,
  kZone,
  kMarker,
  kBgFilter,
  kZoomIn,
  kText,
  kCaption,
  kFreezeFrame,
  kBackground,
  kForeground,
};

std::string_view to_string(ObjectKind kind);
ObjectKind object_kind_from_string(std::string_view name);

/// Fixed rendering layer per kind. Smaller layers are drawn first.
inline constexpr int kLayerBackground = 0;
inline constexpr int kLayerGround = 10;
inline constexpr int kLayerForeground = 20;
inline constexpr int kLayerOverlay = 30;
inline constexpr int kLayerCaption = 40;
int default_layer(ObjectKind kind);

/// Either a tracked entity at a body placement or a fixed scene point.
struct Anchor {
  std::string entity_id;
  Placement placement = Placement::kGround;
  std::optional<Point> point;

  static Anchor entity(std::string id, Placement placement) { return {std::move(id), placement, std::nullopt}; }
  static Anchor fixed(Point p) { return {std::string(), Placement::kGround, p}; }
  bool is_fixed() const { return point.has_value(); }

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct CircleParams {
  std::string anchor_entity;
  double radius = 0.9;  // fraction of bbox width
  Rgba stroke_color{255, 140, 0, 255};
  double stroke_width = 4.0;
  double fill_alpha = 0.0;
  friend bool operator==(const CircleParams&, const CircleParams&) = default;
};

struct SpotlightParams {
  std::string anchor_entity;
  Rgba glow_color{255, 255, 210, 255};
  double radius = 1.2;  // fraction of bbox width
  double inner_alpha = 0.7;
  double outer_alpha = 0.1;
  friend bool operator==(const SpotlightParams&, const SpotlightParams&) = default;
};

struct ConnectorParams {
  std::vector<std::string> anchor_entities;
  Rgba line_color{255, 255, 255, 255};
  double line_width = 3.0;
  bool closed = false;
  friend bool operator==(const ConnectorParams&, const ConnectorParams&) = default;
};

struct PathParams {
  std::vector<Point> points;
  Rgba color{255, 255, 0, 255};
  double width = 4.0;
  bool arrow_head = true;
  bool dashed = false;
  friend bool operator==(const PathParams&, const PathParams&) = default;
};

struct ZoneParams {
  std::vector<Point> points;
  Rgba fill_color{0, 200, 80, 255};
  double fill_alpha = 0.4;
  friend bool operator==(const ZoneParams&, const ZoneParams&) = default;
};

enum class MarkerSymbol { kO, kX, kTriangle };
std::string_view to_string(MarkerSymbol symbol);
MarkerSymbol marker_symbol_from_string(std::string_view name);

struct MarkerParams {
  MarkerSymbol symbol = MarkerSymbol::kO;
  Point position;
  Rgba color{255, 255, 255, 255};
  double size = 24.0;
  friend bool operator==(const MarkerParams&, const MarkerParams&) = default;
};

enum class FilterMode { kTint, kGrayscale };
std::string_view to_string(FilterMode mode);
FilterMode filter_mode_from_string(std::string_view name);

struct BgFilterParams {
  Rgba filter_color{128, 128, 128, 255};  // alpha channel unused
  double alpha = 0.6;
  FilterMode mode = FilterMode::kGrayscale;
  friend bool operator==(const BgFilterParams&, const BgFilterParams&) = default;
};

struct ZoomInParams {
  Anchor target;
  double factor = 2.0;
  std::int64_t ease_frames = 15;
  friend bool operator==(const ZoomInParams&, const ZoomInParams&) = default;
};

struct TextParams {
  std::string content;
  Anchor target;
  int font_px = 16;
  Rgba color{255, 255, 255, 255};
  bool pill = true;
  friend bool operator==(const TextParams&, const TextParams&) = default;
};

struct CaptionParams {
  std::string content;
  int font_px = 16;
  Rgba color{255, 255, 255, 255};
  friend bool operator==(const CaptionParams&, const CaptionParams&) = default;
};

struct FreezeFrameParams {
  friend bool operator==(const FreezeFrameParams&, const FreezeFrameParams&) = default;
};

struct AssetParams {
  std::string asset;
  friend bool operator==(const AssetParams&, const AssetParams&) = default;
};

using EffectParams = std::variant<CircleParams, SpotlightParams, ConnectorParams, PathParams, ZoneParams,
                                  MarkerParams, BgFilterParams, ZoomInParams, TextParams, CaptionParams,
                                  FreezeFrameParams, AssetParams>;

/// Default parameters for a kind (Background and Foreground share AssetParams).
EffectParams default_params(ObjectKind kind);
bool params_match_kind(ObjectKind kind, const EffectParams& params);
/// Kind whose parameter type `params` holds (Background for AssetParams).
ObjectKind params_kind(const EffectParams& params);

nlohmann::json to_json(const EffectParams& params);
EffectParams params_from_json(ObjectKind kind, const nlohmann::json& doc, const std::string& where = "params");

struct RenderObject {
  std::string id;
  ObjectKind kind = ObjectKind::kCircle;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 1;  // exclusive
  int layer = kLayerGround;
  int z = 0;
  EffectParams params;
  nlohmann::json extra = nlohmann::json::object();  // unknown fields, kept verbatim

  bool active_at(std::int64_t n) const { return start_frame <= n && n < end_frame; }

  friend bool operator==(const RenderObject&, const RenderObject&) = default;
};

struct CaptionStyle {
  int font_px = 16;
  Rgba color{255, 255, 255, 255};
  friend bool operator==(const CaptionStyle&, const CaptionStyle&) = default;
};

struct Caption {
  std::string text;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 1;
  CaptionStyle style;
  friend bool operator==(const Caption&, const Caption&) = default;
};

struct ExportSettings {
  bool burn_in = false;
  bool write_srt = true;
  int workers = 0;  // 0 = hardware concurrency
  friend bool operator==(const ExportSettings&, const ExportSettings&) = default;
};

struct Project {
  int schema_version = kSchemaVersion;
  std::string video_ref;
  std::string tracking_ref;
  std::string mask_ref;
  VideoMeta meta;
  Timeline timeline;
  std::vector<RenderObject> objects;
  std::vector<Caption> captions;
  Homography homography;
  ExportSettings export_settings;
  nlohmann::json extra = nlohmann::json::object();

  const RenderObject* find_object(std::string_view id) const;
  RenderObject* find_object(std::string_view id);

  friend bool operator==(const Project&, const Project&) = default;
};

/// A fresh project for an imported clip: identity timeline, the default
/// ground matrix, and the Background/Foreground pair spanning the clip.
Project make_project(const VideoMeta& meta, std::string video_ref, std::string tracking_ref,
                     std::string mask_ref);

/// Keeps the Background/Foreground spans equal to the timeline duration.
void sync_base_layers(Project& project);

/// Each entry reads "<field>: <rule>". Empty iff the project is valid.
std::vector<std::string> validate_project(const Project& project, const TrackingDataset& dataset);

nlohmann::json to_json(const Project& project);
Project project_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const RenderObject& object);
RenderObject render_object_from_json(const nlohmann::json& doc, const std::string& where = "object");
nlohmann::json to_json(const Caption& caption);
Caption caption_from_json(const nlohmann::json& doc, const std::string& where = "caption");
nlohmann::json to_json(const Homography& h);
Homography homography_from_json(const nlohmann::json& doc, const std::string& where = "homography");
nlohmann::json to_json(const Timeline& tl);
Timeline timeline_from_json(const nlohmann::json& doc, const std::string& where = "timeline");

std::string encode_project(const Project& project);
/// Throws Error(kParse) for malformed text or missing fields and
/// Error(kUnsupportedVersion) for documents newer than kSchemaVersion.
Project decode_project(std::string_view text);

}  // namespace courtviz
