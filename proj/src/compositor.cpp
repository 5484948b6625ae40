#include "courtviz/compositor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <numbers>

#include "courtviz/error.hpp"
#include "courtviz/font8x16.hpp"

namespace courtviz {

Paint to_paint(Rgba color, double alpha_scale) {
  const double a = std::clamp(alpha_scale, 0.0, 1.0) * color.a / 255.0;
  return {static_cast<std::uint16_t>(color.r * 257), static_cast<std::uint16_t>(color.g * 257),
          static_cast<std::uint16_t>(color.b * 257), static_cast<std::uint16_t>(std::lround(a * 65535.0))};
}

std::string to_glyph_text(std::string_view utf8) {
  std::string out;
  for (std::size_t i = 0; i < utf8.size();) {
    const auto c = static_cast<unsigned char>(utf8[i]);
    std::size_t len = 1;
    if (c >= 0xf0) {
      len = 4;
    } else if (c >= 0xe0) {
      len = 3;
    } else if (c >= 0xc0) {
      len = 2;
    }
    if (len == 1 && c >= font::kFirstGlyph && c <= font::kLastGlyph) {
      out.push_back(static_cast<char>(c));
    } else if (c == '\n' || c == '\t') {
      out.push_back(' ');
    } else {
      out.push_back('?');
    }
    i += len;
  }
  return out;
}

int glyph_scale_for(int font_px) { return std::max(1, (font_px + font::kGlyphHeight / 2) / font::kGlyphHeight); }

ZoomWindow zoom_window(const ZoomState& zoom, int width, int height) {
  ZoomWindow win;
  win.width = width / zoom.factor;
  win.height = height / zoom.factor;
  win.x0 = std::clamp(zoom.center.x - win.width / 2.0, 0.0, width - win.width);
  win.y0 = std::clamp(zoom.center.y - win.height / 2.0, 0.0, height - win.height);
  return win;
}

// ---------------------------------------------------------------------------
// Planning

namespace {

constexpr int kEllipseVertices = 48;
constexpr int kMarkerRingVertices = 32;
constexpr double kArrowBarbLength = 14.0;
constexpr double kArrowBarbAngle = std::numbers::pi / 6.0;
constexpr double kDashOn = 12.0;
constexpr double kDashOff = 8.0;
constexpr double kPathSegmentPx = 8.0;
constexpr Rgba kPillColor{0, 0, 0, 150};
constexpr Rgba kCaptionBandColor{0, 0, 0, 140};

struct GroundShape {
  std::vector<Point> polygon;
  Point ground_center;
  double ground_radius = 0.0;
};

class Planner {
 public:
  Planner(const Project& project, const TrackingDataset& dataset, std::int64_t source_frame)
      : project_(project),
        dataset_(dataset),
        source_frame_(source_frame),
        h_(project.homography),
        h_inv_(inverse(project.homography)) {}

  const Homography& screen_to_ground() const { return h_inv_; }

  const TrackSample* sample(const std::string& entity_id) const {
    const EntityTrack* track = dataset_.find(entity_id);
    return track == nullptr ? nullptr : track->sample_at(source_frame_);
  }

  std::optional<Point> anchor(const std::string& entity_id, Placement placement) const {
    if (dataset_.find(entity_id) == nullptr) return std::nullopt;
    return resolve_anchor(dataset_, entity_id, source_frame_, placement);
  }

  std::optional<Point> anchor(const Anchor& a) const {
    if (a.point) return a.point;
    return anchor(a.entity_id, a.placement);
  }

  GroundShape ground_ellipse(Point anchor_px, double radius_px) const {
    const Point g = apply(h_inv_, anchor_px);
    const double scale = horizontal_scale(h_, g);
    if (!(scale > 0.0)) throw Error(ErrorCode::kDegenerate, "ground scale vanishes");
    const double rg = radius_px / scale;
    return {ellipse_for_anchor(h_, g, rg, kEllipseVertices), g, rg};
  }

  std::vector<Point> ground_polyline(const std::vector<Point>& scene_points, bool smooth) const {
    std::vector<Point> ground;
    ground.reserve(scene_points.size());
    for (const auto& p : scene_points) ground.push_back(apply(h_inv_, p));
    if (smooth) ground = smooth_path(ground);
    const double scale = horizontal_scale(h_, ground.front());
    return project_polyline(h_, ground, kPathSegmentPx / std::max(scale, 1e-9));
  }

 private:
  const Project& project_;
  const TrackingDataset& dataset_;
  std::int64_t source_frame_;
  Homography h_;
  Homography h_inv_;
};

using Segments = std::vector<std::pair<Point, Point>>;

Segments polyline_segments(const std::vector<Point>& pts, bool closed) {
  Segments out;
  for (std::size_t i = 1; i < pts.size(); ++i) out.emplace_back(pts[i - 1], pts[i]);
  if (closed && pts.size() >= 3) out.emplace_back(pts.back(), pts.front());
  return out;
}

Segments dash(const Segments& solid) {
  Segments out;
  double phase = 0.0;  // distance into the current on+off period
  for (const auto& [a, b] : solid) {
    const double len = distance(a, b);
    double pos = 0.0;
    while (pos < len) {
      const bool on = phase < kDashOn;
      const double left_in_state = on ? kDashOn - phase : kDashOn + kDashOff - phase;
      const double step = std::min(left_in_state, len - pos);
      if (on && step > 0.0) out.emplace_back(a + (pos / len) * (b - a), a + ((pos + step) / len) * (b - a));
      pos += step;
      phase += step;
      if (phase >= kDashOn + kDashOff) phase = 0.0;
    }
  }
  return out;
}

Point rotate(Point v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

struct TextBox {
  int x = 0;  // glyph origin
  int y = 0;
  int text_w = 0;
  int text_h = 0;
};

int clamp_origin(int origin, int extent, int limit) {
  if (extent >= limit) return 0;
  return std::clamp(origin, 0, limit - extent);
}

void add_text(DrawCmd& cmd, const std::string& glyphs, int scale, Point anchor, std::optional<Placement> placement,
              bool pill, Paint paint, int width, int height) {
  const int tw = static_cast<int>(glyphs.size()) * font::kGlyphWidth * scale;
  const int th = font::kGlyphHeight * scale;
  const int pad_x = pill ? 6 * scale : 0;
  const int pad_y = pill ? 3 * scale : 0;
  const int gap = 4;

  int x = static_cast<int>(std::lround(anchor.x - tw / 2.0));
  int y = 0;
  if (!placement) {
    y = static_cast<int>(std::lround(anchor.y - th / 2.0));
  } else {
    switch (*placement) {
      case Placement::kHead: y = static_cast<int>(std::lround(anchor.y)) - gap - pad_y - th; break;
      case Placement::kWaist: y = static_cast<int>(std::lround(anchor.y - th / 2.0)); break;
      case Placement::kGround: y = static_cast<int>(std::lround(anchor.y)) + gap + pad_y; break;
    }
  }
  // Keep the whole box, pill included, inside the frame.
  x = clamp_origin(x - pad_x, tw + 2 * pad_x, width) + pad_x;
  y = clamp_origin(y - pad_y, th + 2 * pad_y, height) + pad_y;

  if (pill) {
    const double r = (th + 2.0 * pad_y) / 2.0;
    const double cy = y + th / 2.0;
    const double left = x - pad_x + r;
    const double right = std::max(left, x + tw + pad_x - r);
    cmd.primitives.push_back(StrokeSegments{{{Point{left, cy}, Point{right, cy}}}, r, to_paint(kPillColor)});
  }
  cmd.primitives.push_back(GlyphRun{glyphs, x, y, scale, paint});
}

struct CaptionLine {
  std::string id;
  std::string text;
  int font_px = 16;
  Rgba color;
};

void layout_captions(const std::vector<CaptionLine>& lines, int width, int height, std::vector<DrawCmd>& out) {
  int bottom = height - std::max(4, height / 24);
  for (const auto& line : lines) {
    const std::string glyphs = to_glyph_text(line.text);
    const int scale = glyph_scale_for(line.font_px);
    const int tw = static_cast<int>(glyphs.size()) * font::kGlyphWidth * scale;
    const int th = font::kGlyphHeight * scale;
    const int pad = 4 * scale;
    const int y = bottom - pad - th;
    const int x = clamp_origin(width / 2 - tw / 2 - pad, tw + 2 * pad, width) + pad;

    DrawCmd cmd;
    cmd.object_id = line.id;
    cmd.kind = ObjectKind::kCaption;
    cmd.layer = kLayerCaption;
    const double x0 = x - pad;
    const double x1 = x + tw + pad;
    const double y0 = y - pad;
    const double y1 = y + th + pad;
    cmd.primitives.push_back(FillPolygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, to_paint(kCaptionBandColor)});
    cmd.primitives.push_back(GlyphRun{glyphs, x, y, scale, to_paint(line.color)});
    out.push_back(std::move(cmd));
    bottom = y0 - 2;
  }
}

double ease_weight(const RenderObject& o, std::int64_t ease_frames, std::int64_t n) {
  if (ease_frames <= 0) return 1.0;
  const double in = static_cast<double>(n - o.start_frame) / static_cast<double>(ease_frames);
  const double out = static_cast<double>(o.end_frame - 1 - n) / static_cast<double>(ease_frames);
  return std::clamp(std::min(in, out), 0.0, 1.0);
}

std::optional<DrawCmd> plan_object(const RenderObject& o, const Planner& planner, int width, int height) {
  DrawCmd cmd;
  cmd.object_id = o.id;
  cmd.kind = o.kind;
  cmd.layer = o.layer;
  cmd.z = o.z;

  if (const auto* p = std::get_if<CircleParams>(&o.params)) {
    const TrackSample* s = planner.sample(p->anchor_entity);
    const auto at = planner.anchor(p->anchor_entity, Placement::kGround);
    if (s == nullptr || !at) return std::nullopt;
    const GroundShape shape = planner.ground_ellipse(*at, p->radius * s->bbox.w);
    if (p->fill_alpha > 0.0) cmd.primitives.push_back(FillPolygon{shape.polygon, to_paint(p->stroke_color, p->fill_alpha)});
    cmd.primitives.push_back(
        StrokeSegments{polyline_segments(shape.polygon, true), p->stroke_width / 2.0, to_paint(p->stroke_color)});
  } else if (const auto* p = std::get_if<SpotlightParams>(&o.params)) {
    const TrackSample* s = planner.sample(p->anchor_entity);
    const auto at = planner.anchor(p->anchor_entity, Placement::kGround);
    if (s == nullptr || !at) return std::nullopt;
    const GroundShape shape = planner.ground_ellipse(*at, p->radius * s->bbox.w);
    cmd.primitives.push_back(RadialGlow{shape.polygon, planner.screen_to_ground(), shape.ground_center,
                                        shape.ground_radius, p->inner_alpha, p->outer_alpha, to_paint(p->glow_color)});
  } else if (const auto* p = std::get_if<ConnectorParams>(&o.params)) {
    std::vector<Point> pts;
    for (const auto& id : p->anchor_entities) {
      if (auto at = planner.anchor(id, Placement::kGround)) pts.push_back(*at);
    }
    if (pts.size() < 2) return std::nullopt;
    cmd.primitives.push_back(
        StrokeSegments{polyline_segments(pts, p->closed), p->line_width / 2.0, to_paint(p->line_color)});
  } else if (const auto* p = std::get_if<PathParams>(&o.params)) {
    if (p->points.size() < 2) return std::nullopt;
    const std::vector<Point> screen = planner.ground_polyline(p->points, true);
    Segments segs = polyline_segments(screen, false);
    if (p->dashed) segs = dash(segs);
    if (p->arrow_head) {
      const Point tip = screen.back();
      for (auto it = screen.rbegin() + 1; it != screen.rend(); ++it) {
        const double len = distance(*it, tip);
        if (len > 1e-6) {
          const Point back = (1.0 / len) * (*it - tip);
          segs.emplace_back(tip, tip + kArrowBarbLength * rotate(back, kArrowBarbAngle));
          segs.emplace_back(tip, tip + kArrowBarbLength * rotate(back, -kArrowBarbAngle));
          break;
        }
      }
    }
    cmd.primitives.push_back(StrokeSegments{std::move(segs), p->width / 2.0, to_paint(p->color)});
  } else if (const auto* p = std::get_if<ZoneParams>(&o.params)) {
    if (p->points.size() < 3) return std::nullopt;
    std::vector<Point> ring = p->points;
    ring.push_back(p->points.front());
    std::vector<Point> screen = planner.ground_polyline(ring, false);
    screen.pop_back();
    cmd.primitives.push_back(FillPolygon{std::move(screen), to_paint(p->fill_color, p->fill_alpha)});
  } else if (const auto* p = std::get_if<MarkerParams>(&o.params)) {
    const Point c = p->position;
    const double h = p->size / 2.0;
    const double w = std::max(2.0, p->size / 8.0);
    const double inset = h - w / 2.0;
    Segments segs;
    switch (p->symbol) {
      case MarkerSymbol::kO: {
        std::vector<Point> ring;
        for (int i = 0; i < kMarkerRingVertices; ++i) {
          const double t = 2.0 * std::numbers::pi * i / kMarkerRingVertices;
          ring.push_back({c.x + inset * std::cos(t), c.y + inset * std::sin(t)});
        }
        segs = polyline_segments(ring, true);
        break;
      }
      case MarkerSymbol::kX:
        segs = {{{c.x - inset, c.y - inset}, {c.x + inset, c.y + inset}},
                {{c.x - inset, c.y + inset}, {c.x + inset, c.y - inset}}};
        break;
      case MarkerSymbol::kTriangle:
        segs = polyline_segments({{c.x, c.y - inset}, {c.x + inset, c.y + inset}, {c.x - inset, c.y + inset}}, true);
        break;
    }
    cmd.primitives.push_back(StrokeSegments{std::move(segs), w / 2.0, to_paint(p->color)});
  } else if (const auto* p = std::get_if<TextParams>(&o.params)) {
    const auto at = planner.anchor(p->target);
    if (!at) return std::nullopt;
    std::optional<Placement> placement;
    if (!p->target.is_fixed()) placement = p->target.placement;
    add_text(cmd, to_glyph_text(p->content), glyph_scale_for(p->font_px), *at, placement, p->pill, to_paint(p->color),
             width, height);
  } else {
    return std::nullopt;
  }
  return cmd;
}

bool draw_order(const DrawCmd& a, const DrawCmd& b) {
  return std::tie(a.layer, a.z, a.object_id) < std::tie(b.layer, b.z, b.object_id);
}

}  // namespace

FramePlan plan_frame(const Project& project, const TrackingDataset& dataset, std::int64_t n,
                     const PlanOptions& options) {
  FramePlan plan;
  plan.output_frame = n;
  plan.width = project.meta.width;
  plan.height = project.meta.height;
  plan.source = map_output_frame(project.timeline, n);
  const Planner planner(project, dataset, plan.source.source_frame);

  std::vector<const RenderObject*> active;
  for (const auto& o : project.objects) {
    if (o.active_at(n)) active.push_back(&o);
  }
  std::sort(active.begin(), active.end(), [](const RenderObject* a, const RenderObject* b) {
    return std::tie(a->layer, a->z, a->id) < std::tie(b->layer, b->z, b->id);
  });

  std::vector<CaptionLine> caption_lines;
  if (options.burn_in_captions) {
    std::vector<const Caption*> caps;
    for (const auto& c : project.captions) {
      if (c.start_frame <= n && n < c.end_frame) caps.push_back(&c);
    }
    std::stable_sort(caps.begin(), caps.end(),
                     [](const Caption* a, const Caption* b) { return a->start_frame < b->start_frame; });
    for (const Caption* c : caps) caption_lines.push_back({"caption", c->text, c->style.font_px, c->style.color});
  }

  for (const RenderObject* o : active) {
    if (const auto* p = std::get_if<BgFilterParams>(&o->params)) {
      Paint color = to_paint(p->filter_color);
      color.a = static_cast<std::uint16_t>(std::lround(std::clamp(p->alpha, 0.0, 1.0) * 65535.0));
      plan.bg_filter = BgFilterState{color, p->mode};
    } else if (const auto* p = std::get_if<ZoomInParams>(&o->params)) {
      const auto center = planner.anchor(p->target);
      if (!center) continue;
      const double factor = 1.0 + (p->factor - 1.0) * ease_weight(*o, p->ease_frames, n);
      plan.zoom = ZoomState{*center, std::max(1.0, factor)};
    } else if (const auto* p = std::get_if<CaptionParams>(&o->params)) {
      caption_lines.push_back({o->id, p->content, p->font_px, p->color});
    } else {
      try {
        if (auto cmd = plan_object(*o, planner, plan.width, plan.height)) plan.draws.push_back(std::move(*cmd));
      } catch (const Error& e) {
        // Degenerate projections drop the object for this frame.
        if (e.code() != ErrorCode::kDegenerate) throw;
      }
    }
  }
  std::stable_sort(plan.draws.begin(), plan.draws.end(), draw_order);
  layout_captions(caption_lines, plan.width, plan.height, plan.captions);
  return plan;
}

// ---------------------------------------------------------------------------
// Rasterization

namespace {

/// 16-bit RGB working buffer.
struct Canvas16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> px;

  std::uint16_t* at(int x, int y) { return px.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
};

inline std::uint16_t mix(std::uint32_t dst, std::uint32_t src, std::uint32_t a) {
  return static_cast<std::uint16_t>((dst * (65535u - a) + src * a + 32767u) / 65535u);
}

inline void blend(std::uint16_t* c, const Paint& p, std::uint32_t a) {
  c[0] = mix(c[0], p.r, a);
  c[1] = mix(c[1], p.g, a);
  c[2] = mix(c[2], p.b, a);
}

struct Span {
  int x0;
  int x1;  // exclusive
};

/// Pixels of row y whose centers satisfy xs[2m] <= xc < xs[2m+1].
template <typename Fn>
void scan_polygon(const std::vector<Point>& pts, int width, int height, Fn&& fn) {
  const std::size_t n = pts.size();
  if (n < 3) return;
  double ymin = pts[0].y;
  double ymax = pts[0].y;
  for (const auto& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return;
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const int row0 = std::max(0, static_cast<int>(std::floor(ymin)) - 1);
  const int row1 = std::min(height - 1, static_cast<int>(std::ceil(ymax)) + 1);
  std::vector<double> xs;
  xs.reserve(n);
  for (int y = row0; y <= row1; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = pts[i];
      const Point b = pts[(i + 1) % n];
      if ((a.y <= yc) != (b.y <= yc)) xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    if (xs.size() < 2) continue;
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // First pixel whose center is >= bound.
      auto first_at_or_after = [width](double bound) {
        if (bound <= 0.5) return 0;
        if (bound > width) return width;
        int x = static_cast<int>(std::ceil(bound - 0.5));
        while (x > 0 && x - 1 + 0.5 >= bound) --x;
        while (x < width && x + 0.5 < bound) ++x;
        return x;
      };
      const int x0 = first_at_or_after(xs[k]);
      const int x1 = first_at_or_after(xs[k + 1]);
      if (x0 < x1) fn(y, Span{x0, x1});
    }
  }
}

inline double segment_dist2(double xc, double yc, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double px = xc - a.x;
  const double py = yc - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? (px * dx + py * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = px - t * dx;
  const double ey = py - t * dy;
  return ex * ex + ey * ey;
}

void draw(const FillPolygon& prim, Canvas16& canvas) {
  if (prim.paint.a == 0) return;
  scan_polygon(prim.points, canvas.width, canvas.height, [&](int y, Span s) {
    std::uint16_t* c = canvas.at(s.x0, y);
    for (int x = s.x0; x < s.x1; ++x, c += 3) blend(c, prim.paint, prim.paint.a);
  });
}

void draw(const StrokeSegments& prim, Canvas16& canvas) {
  if (prim.paint.a == 0 || prim.segments.empty() || !(prim.radius > 0.0)) return;
  const double r = prim.radius;
  const double r2 = r * r;
  auto lo = [](double v) { return static_cast<int>(std::floor(v)) - 1; };
  auto hi = [](double v) { return static_cast<int>(std::ceil(v)) + 1; };

  int bx0 = canvas.width;
  int by0 = canvas.height;
  int bx1 = -1;
  int by1 = -1;
  struct Box {
    int x0, y0, x1, y1;
  };
  std::vector<Box> boxes;
  boxes.reserve(prim.segments.size());
  for (const auto& [a, b] : prim.segments) {
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(b.x) || !std::isfinite(b.y)) {
      boxes.push_back({0, 0, -1, -1});
      continue;
    }
    Box box{std::max(0, lo(std::min(a.x, b.x) - r)), std::max(0, lo(std::min(a.y, b.y) - r)),
            std::min(canvas.width - 1, hi(std::max(a.x, b.x) + r)),
            std::min(canvas.height - 1, hi(std::max(a.y, b.y) + r))};
    boxes.push_back(box);
    if (box.x0 > box.x1 || box.y0 > box.y1) continue;
    bx0 = std::min(bx0, box.x0);
    by0 = std::min(by0, box.y0);
    bx1 = std::max(bx1, box.x1);
    by1 = std::max(by1, box.y1);
  }
  if (bx0 > bx1 || by0 > by1) return;

  const int mw = bx1 - bx0 + 1;
  const int mh = by1 - by0 + 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(mw) * mh, 0);
  std::vector<int> row_lo(static_cast<std::size_t>(mh), mw);
  std::vector<int> row_hi(static_cast<std::size_t>(mh), -1);
  // Distance along a row is convex, so scan outward from its minimum until
  // it clearly exceeds the radius.
  const double stop = r2 + 1e-6 * (r2 + 1.0);
  for (std::size_t i = 0; i < prim.segments.size(); ++i) {
    const Box& box = boxes[i];
    const auto& [a, b] = prim.segments[i];
    for (int y = box.y0; y <= box.y1; ++y) {
      const double yc = y + 0.5;
      double xmin;
      if ((a.y <= yc) != (b.y <= yc)) {
        xmin = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
      } else {
        xmin = std::abs(a.y - yc) <= std::abs(b.y - yc) ? a.x : b.x;
      }
      const int start = static_cast<int>(std::floor(std::clamp(xmin - 0.5, box.x0 - 1.0, box.x1 + 0.0)));
      const std::size_t ry = static_cast<std::size_t>(y - by0);
      std::uint8_t* m = mask.data() + ry * mw;
      auto visit = [&](int x) {
        const double d2 = segment_dist2(x + 0.5, yc, a, b);
        if (d2 <= r2) {
          m[x - bx0] = 1;
          row_lo[ry] = std::min(row_lo[ry], x - bx0);
          row_hi[ry] = std::max(row_hi[ry], x - bx0);
        }
        return d2 <= stop;
      };
      for (int x = std::min(start, box.x1); x >= box.x0 && visit(x); --x) {
      }
      for (int x = std::max(start + 1, box.x0); x <= box.x1 && visit(x); ++x) {
      }
    }
  }
  for (int y = by0; y <= by1; ++y) {
    const std::size_t ry = static_cast<std::size_t>(y - by0);
    const std::uint8_t* m = mask.data() + ry * mw;
    std::uint16_t* c = canvas.at(bx0 + row_lo[ry], y);
    for (int x = row_lo[ry]; x <= row_hi[ry]; ++x, c += 3) {
      if (m[x]) blend(c, prim.paint, prim.paint.a);
    }
  }
}

void draw(const RadialGlow& prim, Canvas16& canvas) {
  if (prim.paint.a == 0 || !(prim.ground_radius > 0.0)) return;
  const auto& m = prim.screen_to_ground.values();
  scan_polygon(prim.points, canvas.width, canvas.height, [&](int y, Span s) {
    const double yc = y + 0.5;
    std::uint16_t* c = canvas.at(s.x0, y);
    for (int x = s.x0; x < s.x1; ++x, c += 3) {
      const double xc = x + 0.5;
      const double w = m[6] * xc + m[7] * yc + m[8];
      if (std::abs(w) <= 1e-12) continue;
      const double gx = (m[0] * xc + m[1] * yc + m[2]) / w;
      const double gy = (m[3] * xc + m[4] * yc + m[5]) / w;
      const double dx = gx - prim.ground_center.x;
      const double dy = gy - prim.ground_center.y;
      double rho = std::sqrt(dx * dx + dy * dy) / prim.ground_radius;
      if (rho > 1.0) rho = 1.0;
      double a = prim.inner_alpha + (prim.outer_alpha - prim.inner_alpha) * rho;
      a = std::clamp(a, 0.0, 1.0);
      const auto alpha = static_cast<std::uint32_t>(std::lround(a * prim.paint.a));
      if (alpha != 0) blend(c, prim.paint, alpha);
    }
  });
}

void draw(const GlyphRun& prim, Canvas16& canvas) {
  if (prim.paint.a == 0) return;
  const int s = prim.scale;
  for (std::size_t i = 0; i < prim.text.size(); ++i) {
    const auto ch = static_cast<unsigned char>(prim.text[i]);
    if (ch < font::kFirstGlyph || ch > font::kLastGlyph) continue;
    const auto& glyph = font::kGlyphs[ch - font::kFirstGlyph];
    const int gx = prim.x + static_cast<int>(i) * font::kGlyphWidth * s;
    for (int row = 0; row < font::kGlyphHeight; ++row) {
      const std::uint8_t bits = glyph[static_cast<std::size_t>(row)];
      if (bits == 0) continue;
      for (int col = 0; col < font::kGlyphWidth; ++col) {
        if ((bits & (0x80 >> col)) == 0) continue;
        for (int dy = 0; dy < s; ++dy) {
          const int y = prim.y + row * s + dy;
          if (y < 0 || y >= canvas.height) continue;
          for (int dx = 0; dx < s; ++dx) {
            const int x = gx + col * s + dx;
            if (x < 0 || x >= canvas.width) continue;
            blend(canvas.at(x, y), prim.paint, prim.paint.a);
          }
        }
      }
    }
  }
}

void draw_cmd(const DrawCmd& cmd, Canvas16& canvas) {
  for (const auto& prim : cmd.primitives) std::visit([&](const auto& p) { draw(p, canvas); }, prim);
}

/// x / 65535 for x < 2^32 - 65535, without a division.
inline std::uint32_t div65535(std::uint32_t x) { return (x + (x >> 16) + 1u) >> 16; }

/// Background scaled to 16 bits with the filter applied, in one pass.
__attribute__((target_clones("avx2", "default"))) void load_background(const std::uint8_t* __restrict s,
                                                                       std::uint16_t* __restrict c,
                                                                       std::size_t count, const BgFilterState* f) {
  const std::uint32_t a = f != nullptr ? f->color.a : 0;
  if (a == 0) {
    for (std::size_t i = 0; i < count * 3; ++i) c[i] = static_cast<std::uint16_t>(s[i] * 257u);
    return;
  }
  const std::uint32_t keep = 257u * (65535u - a);
  if (f->mode == FilterMode::kTint) {
    const std::uint32_t tr = f->color.r * a + 32767u;
    const std::uint32_t tg = f->color.g * a + 32767u;
    const std::uint32_t tb = f->color.b * a + 32767u;
    for (std::size_t i = 0; i < count; ++i) {
      c[3 * i] = static_cast<std::uint16_t>(div65535(s[3 * i] * keep + tr));
      c[3 * i + 1] = static_cast<std::uint16_t>(div65535(s[3 * i + 1] * keep + tg));
      c[3 * i + 2] = static_cast<std::uint16_t>(div65535(s[3 * i + 2] * keep + tb));
    }
    return;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t r = s[3 * i];
    const std::uint32_t g = s[3 * i + 1];
    const std::uint32_t b = s[3 * i + 2];
    const std::uint32_t luma_a = ((77u * 257u * r + 150u * 257u * g + 29u * 257u * b + 128u) >> 8) * a + 32767u;
    c[3 * i] = static_cast<std::uint16_t>(div65535(r * keep + luma_a));
    c[3 * i + 1] = static_cast<std::uint16_t>(div65535(g * keep + luma_a));
    c[3 * i + 2] = static_cast<std::uint16_t>(div65535(b * keep + luma_a));
  }
}

__attribute__((target_clones("avx2", "default"))) void quantize(const std::uint16_t* __restrict c,
                                                                std::uint8_t* __restrict o, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i, c += 3, o += 4) {
    const std::uint32_t px = div65535(c[0] * 255u + 32767u) | div65535(c[1] * 255u + 32767u) << 8 |
                             div65535(c[2] * 255u + 32767u) << 16 | 0xff000000u;
    std::memcpy(o, &px, sizeof(px));  // little-endian RGBA
  }
}

void composite_foreground(const RgbImage& src, const AlphaPlane& mask, Canvas16& canvas) {
  const std::size_t count = static_cast<std::size_t>(canvas.width) * canvas.height;
  const std::uint8_t* m = mask.data.data();
  const std::uint8_t* s = src.data.data();
  std::uint16_t* c = canvas.px.data();
  for (std::size_t i = 0; i < count; ++i, c += 3, s += 3) {
    if ((i & 7) == 0 && i + 8 <= count) {
      std::uint64_t word;
      std::memcpy(&word, m + i, sizeof(word));
      if (word == 0) {
        i += 7;
        c += 21;
        s += 21;
        continue;
      }
    }
    const std::uint32_t mv = m[i];
    if (mv == 0) continue;
    if (mv == 255) {
      c[0] = static_cast<std::uint16_t>(s[0] * 257);
      c[1] = static_cast<std::uint16_t>(s[1] * 257);
      c[2] = static_cast<std::uint16_t>(s[2] * 257);
      continue;
    }
    const std::uint32_t a = mv * 257u;
    c[0] = mix(c[0], s[0] * 257u, a);
    c[1] = mix(c[1], s[1] * 257u, a);
    c[2] = mix(c[2], s[2] * 257u, a);
  }
}

struct Tap {
  int index;
  std::uint32_t weight;  // of index + 1, out of 256
};

Tap zoom_tap(int out, double origin, double step, int size) {
  double s = origin + (out + 0.5) * step - 0.5;
  if (s < 0.0) s = 0.0;
  if (s > size - 1) s = size - 1;
  int i = static_cast<int>(std::floor(s));
  double f = s - i;
  if (i >= size - 1) {
    i = size - 2;
    f = 1.0;
  }
  return {i, static_cast<std::uint32_t>(std::lround(f * 256.0))};
}

void apply_zoom(const ZoomState& zoom, Canvas16& canvas) {
  if (!(zoom.factor > 1.0)) return;
  const int w = canvas.width;
  const int h = canvas.height;
  const ZoomWindow win = zoom_window(zoom, w, h);
  const double step_x = win.width / w;
  const double step_y = win.height / h;
  std::vector<Tap> cols(static_cast<std::size_t>(w));
  for (int x = 0; x < w; ++x) cols[static_cast<std::size_t>(x)] = zoom_tap(x, win.x0, step_x, w);

  Canvas16 out{w, h, std::vector<std::uint16_t>(canvas.px.size())};
  for (int y = 0; y < h; ++y) {
    const Tap row = zoom_tap(y, win.y0, step_y, h);
    const std::uint16_t* r0 = canvas.at(0, row.index);
    const std::uint16_t* r1 = canvas.at(0, row.index + 1);
    std::uint16_t* dst = out.at(0, y);
    for (int x = 0; x < w; ++x) {
      const Tap col = cols[static_cast<std::size_t>(x)];
      const std::size_t i0 = static_cast<std::size_t>(col.index) * 3;
      const std::size_t i1 = i0 + 3;
      for (int k = 0; k < 3; ++k) {
        const std::uint32_t top = r0[i0 + k] * (256u - col.weight) + r0[i1 + k] * col.weight;
        const std::uint32_t bot = r1[i0 + k] * (256u - col.weight) + r1[i1 + k] * col.weight;
        dst[x * 3 + k] = static_cast<std::uint16_t>((top * (256u - row.weight) + bot * row.weight + 32768u) >> 16);
      }
    }
  }
  canvas = std::move(out);
}

}  // namespace

Canvas render_frame(const FramePlan& plan, const RgbImage& bg, const AlphaPlane& mask) {
  const int w = plan.width;
  const int h = plan.height;
  if (bg.width != w || bg.height != h || bg.channels != 3) {
    throw Error(ErrorCode::kDimensionMismatch, "background frame does not match the plan dimensions");
  }
  if (mask.width != w || mask.height != h || mask.channels != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "mask frame does not match the plan dimensions");
  }

  thread_local Canvas16 canvas;
  canvas.width = w;
  canvas.height = h;
  canvas.px.resize(static_cast<std::size_t>(w) * h * 3);
  load_background(bg.data.data(), canvas.px.data(), static_cast<std::size_t>(w) * h,
                  plan.bg_filter ? &*plan.bg_filter : nullptr);

  std::size_t next = 0;
  for (; next < plan.draws.size() && plan.draws[next].layer < kLayerForeground; ++next) {
    draw_cmd(plan.draws[next], canvas);
  }
  composite_foreground(bg, mask, canvas);
  for (; next < plan.draws.size(); ++next) draw_cmd(plan.draws[next], canvas);
  if (plan.zoom) apply_zoom(*plan.zoom, canvas);
  for (const auto& cmd : plan.captions) draw_cmd(cmd, canvas);

  Canvas out(w, h, 4);
  quantize(canvas.px.data(), out.data.data(), static_cast<std::size_t>(w) * h);
  return out;
}

std::optional<std::string> hit_test(const Project& project, const TrackingDataset& dataset, std::int64_t n,
                                    Point screen_point) {
  const FramePlan plan = plan_frame(project, dataset, n);
  Point scene = screen_point;
  if (plan.zoom && plan.zoom->factor > 1.0) {
    const ZoomWindow win = zoom_window(*plan.zoom, plan.width, plan.height);
    scene = {win.x0 + screen_point.x * win.width / plan.width, win.y0 + screen_point.y * win.height / plan.height};
  }
  const EntityTrack* best = nullptr;
  double best_area = 0.0;
  for (const auto& e : dataset.entities) {
    const TrackSample* s = e.sample_at(plan.source.source_frame);
    if (s == nullptr || !s->bbox.contains(scene)) continue;
    const double area = s->bbox.area();
    if (best == nullptr || area < best_area || (area == best_area && e.entity_id < best->entity_id)) {
      best = &e;
      best_area = area;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->entity_id;
}

}  // namespace courtviz
