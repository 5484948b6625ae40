#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "courtviz/geometry.hpp"
#include "courtviz/image.hpp"
#include "courtviz/model.hpp"
#include "courtviz/timeline.hpp"
#include "courtviz/tracking.hpp"

namespace courtviz {

/// Color in the 16-bit blending domain: channels are 8-bit values times 257,
/// `a` is straight coverage alpha in [0, 65535].
struct Paint {
  std::uint16_t r = 0;
  std::uint16_t g = 0;
  std::uint16_t b = 0;
  std::uint16_t a = 65535;

  friend bool operator==(const Paint&, const Paint&) = default;
};

Paint to_paint(Rgba color, double alpha_scale = 1.0);

// Raster primitives. Pixel (x, y) is sampled at its center (x + 0.5, y + 0.5)
// with no anti-aliasing, and every covered pixel is blended exactly once.

/// Even-odd fill of a closed polygon.
struct FillPolygon {
  std::vector<Point> points;
  Paint paint;
  friend bool operator==(const FillPolygon&, const FillPolygon&) = default;
};

/// Union of capsules: a pixel is covered when its center lies within `radius`
/// of any segment.
struct StrokeSegments {
  std::vector<std::pair<Point, Point>> segments;
  double radius = 1.0;
  Paint paint;
  friend bool operator==(const StrokeSegments&, const StrokeSegments&) = default;
};

/// Polygon fill whose alpha falls off with the court-plane distance from
/// `ground_center`: alpha = inner + (outer - inner) * min(1, d / ground_radius),
/// scaled by paint.a.
struct RadialGlow {
  std::vector<Point> points;
  Homography screen_to_ground;
  Point ground_center;
  double ground_radius = 1.0;
  double inner_alpha = 1.0;
  double outer_alpha = 0.0;
  Paint paint;
  friend bool operator==(const RadialGlow&, const RadialGlow&) = default;
};

/// Bitmap text; (x, y) is the top-left of the first glyph cell.
struct GlyphRun {
  std::string text;  // printable ASCII only, already mapped
  int x = 0;
  int y = 0;
  int scale = 1;
  Paint paint;
  friend bool operator==(const GlyphRun&, const GlyphRun&) = default;
};

using Primitive = std::variant<FillPolygon, StrokeSegments, RadialGlow, GlyphRun>;

struct DrawCmd {
  std::string object_id;
  ObjectKind kind = ObjectKind::kCircle;
  int layer = 0;
  int z = 0;
  std::vector<Primitive> primitives;
  friend bool operator==(const DrawCmd&, const DrawCmd&) = default;
};

struct BgFilterState {
  Paint color;  // a = filter strength
  FilterMode mode = FilterMode::kTint;
  friend bool operator==(const BgFilterState&, const BgFilterState&) = default;
};

struct ZoomState {
  Point center;
  double factor = 1.0;
  friend bool operator==(const ZoomState&, const ZoomState&) = default;
};

struct FramePlan {
  std::int64_t output_frame = 0;
  int width = 0;
  int height = 0;
  SourceRef source;
  std::vector<DrawCmd> draws;  // sorted by (layer, z, object_id)
  std::optional<BgFilterState> bg_filter;
  std::optional<ZoomState> zoom;
  std::vector<DrawCmd> captions;  // screen-space, drawn after zoom
  friend bool operator==(const FramePlan&, const FramePlan&) = default;
};

struct PlanOptions {
  /// Draw the project's narrative captions into the frame.
  bool burn_in_captions = false;
};

/// Resolves output frame n into draw instructions. Entity anchors are looked
/// up at the mapped source frame; objects whose anchor is missing there are
/// dropped. Throws Error(kOutOfRange) for n outside the timeline.
FramePlan plan_frame(const Project& project, const TrackingDataset& dataset, std::int64_t n,
                     const PlanOptions& options = {});

/// Background, filter, ground layer, foreground matte, overlays, zoom,
/// captions. Pure; output is RGBA with opaque alpha.
Canvas render_frame(const FramePlan& plan, const RgbImage& bg, const AlphaPlane& mask);

/// Entity whose box contains the clicked point after undoing the frame's
/// zoom; the smallest box wins, ties broken by entity id.
std::optional<std::string> hit_test(const Project& project, const TrackingDataset& dataset, std::int64_t n,
                                    Point screen_point);

/// Scene-space window shown at the given zoom: x0, y0, width, height.
struct ZoomWindow {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double height = 0.0;
};
ZoomWindow zoom_window(const ZoomState& zoom, int width, int height);

/// Printable-ASCII rendition of UTF-8 text; other code points become '?'.
std::string to_glyph_text(std::string_view utf8);
int glyph_scale_for(int font_px);

}  // namespace courtviz
