#include "courtviz/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "courtviz/error.hpp"
#include "courtviz/font8x16.hpp"
#include "courtviz/media.hpp"

namespace courtviz::synth {

using nlohmann::json;

namespace {

Rgba color_from(const json& j) {
  if (!j.is_array() || (j.size() != 3 && j.size() != 4)) {
    throw Error(ErrorCode::kParse, "scene: color must be [r, g, b] or [r, g, b, a]");
  }
  auto ch = [&](std::size_t i) { return static_cast<std::uint8_t>(std::clamp(j[i].get<int>(), 0, 255)); };
  return {ch(0), ch(1), ch(2), j.size() == 4 ? ch(3) : std::uint8_t{255}};
}

json color_json(Rgba c) { return json::array({c.r, c.g, c.b, c.a}); }

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::kParse, "scene: point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

SceneSpec scene_spec_from_json(const json& doc) {
  try {
    SceneSpec spec;
    spec.width = doc.value("width", spec.width);
    spec.height = doc.value("height", spec.height);
    if (doc.contains("fps")) {
      const auto& fps = doc["fps"];
      spec.fps = fps.is_array() ? Rational(fps.at(0).get<std::int64_t>(), fps.at(1).get<std::int64_t>())
                                : Rational(fps.get<std::int64_t>());
    }
    spec.frame_count = doc.value("frame_count", spec.frame_count);
    if (doc.contains("sport")) spec.sport = sport_from_string(doc["sport"].get<std::string>());
    if (doc.contains("court")) spec.court = color_from(doc["court"]);
    if (doc.contains("line")) spec.line = color_from(doc["line"]);
    spec.noise = doc.value("noise", spec.noise);
    spec.keypoints = doc.value("keypoints", spec.keypoints);
    for (const auto& e : doc.value("entities", json::array())) {
      EntityScript s;
      s.id = e.at("id").get<std::string>();
      s.start = point_from(e.at("start"));
      if (e.contains("velocity")) s.velocity = point_from(e["velocity"]);
      s.width = e.value("width", s.width);
      s.height = e.value("height", s.height);
      if (e.contains("color")) s.color = color_from(e["color"]);
      spec.entities.push_back(std::move(s));
    }
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("scene: ") + e.what());
  }
}

json to_json(const SceneSpec& spec) {
  json entities = json::array();
  for (const auto& e : spec.entities) {
    json j = {{"id", e.id},
              {"start", {e.start.x, e.start.y}},
              {"velocity", {e.velocity.x, e.velocity.y}},
              {"width", e.width},
              {"height", e.height}};
    if (e.color) j["color"] = color_json(*e.color);
    entities.push_back(std::move(j));
  }
  return {{"width", spec.width},
          {"height", spec.height},
          {"fps", {spec.fps.num(), spec.fps.den()}},
          {"frame_count", spec.frame_count},
          {"sport", to_string(spec.sport)},
          {"court", color_json(spec.court)},
          {"line", color_json(spec.line)},
          {"noise", spec.noise},
          {"keypoints", spec.keypoints},
          {"entities", std::move(entities)}};
}

namespace {

Keypoints body_keypoints(const BBox& b) {
  auto at = [&](double fx, double fy) { return std::optional<Point>(Point{b.x + fx * b.w, b.y + fy * b.h}); };
  Keypoints k;
  k[static_cast<std::size_t>(Keypoint::kNose)] = at(0.5, 0.08);
  k[static_cast<std::size_t>(Keypoint::kLeftEye)] = at(0.45, 0.06);
  k[static_cast<std::size_t>(Keypoint::kRightEye)] = at(0.55, 0.06);
  k[static_cast<std::size_t>(Keypoint::kLeftEar)] = at(0.4, 0.07);
  k[static_cast<std::size_t>(Keypoint::kRightEar)] = at(0.6, 0.07);
  k[static_cast<std::size_t>(Keypoint::kLeftShoulder)] = at(0.25, 0.22);
  k[static_cast<std::size_t>(Keypoint::kRightShoulder)] = at(0.75, 0.22);
  k[static_cast<std::size_t>(Keypoint::kLeftElbow)] = at(0.15, 0.38);
  k[static_cast<std::size_t>(Keypoint::kRightElbow)] = at(0.85, 0.38);
  k[static_cast<std::size_t>(Keypoint::kLeftWrist)] = at(0.1, 0.52);
  k[static_cast<std::size_t>(Keypoint::kRightWrist)] = at(0.9, 0.52);
  k[static_cast<std::size_t>(Keypoint::kLeftHip)] = at(0.35, 0.55);
  k[static_cast<std::size_t>(Keypoint::kRightHip)] = at(0.65, 0.55);
  k[static_cast<std::size_t>(Keypoint::kLeftKnee)] = at(0.35, 0.76);
  k[static_cast<std::size_t>(Keypoint::kRightKnee)] = at(0.65, 0.76);
  k[static_cast<std::size_t>(Keypoint::kLeftAnkle)] = at(0.35, 0.97);
  k[static_cast<std::size_t>(Keypoint::kRightAnkle)] = at(0.65, 0.97);
  return k;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  if (spec.width <= 0 || spec.height <= 0 || spec.frame_count <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "scene: width, height and frame_count must be positive");
  }
  std::mt19937_64 rng(seed);
  const int w = spec.width;
  const int h = spec.height;

  RgbImage court(w, h, 3);
  const int span = 2 * std::max(0, spec.noise) + 1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int d = static_cast<int>(rng() % static_cast<std::uint64_t>(span)) - std::max(0, spec.noise);
      std::uint8_t* p = court.pixel(x, y);
      p[0] = static_cast<std::uint8_t>(std::clamp(spec.court.r + d, 0, 255));
      p[1] = static_cast<std::uint8_t>(std::clamp(spec.court.g + d, 0, 255));
      p[2] = static_cast<std::uint8_t>(std::clamp(spec.court.b + d, 0, 255));
    }
  }
  const int line_w = std::max(1, w / 160);
  for (int y = 0; y < h; ++y) {
    for (int x = w / 2 - line_w / 2; x < w / 2 - line_w / 2 + line_w; ++x) {
      std::uint8_t* p = court.pixel(x, y);
      p[0] = spec.line.r;
      p[1] = spec.line.g;
      p[2] = spec.line.b;
    }
  }

  std::vector<Rgba> colors;
  for (const auto& e : spec.entities) {
    if (e.width <= 0 || e.height <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "scene: entity " + e.id + " must have a positive size");
    }
    if (e.color) {
      colors.push_back(*e.color);
    } else {
      const auto bits = rng();
      colors.push_back({static_cast<std::uint8_t>(40 + bits % 200), static_cast<std::uint8_t>(40 + (bits >> 8) % 200),
                        static_cast<std::uint8_t>(40 + (bits >> 16) % 200), 255});
    }
  }

  Scene scene;
  scene.dataset.meta = spec.meta();
  scene.dataset.sport = spec.sport;
  for (const auto& e : spec.entities) scene.dataset.entities.push_back({e.id, {}});

  for (std::int64_t f = 0; f < spec.frame_count; ++f) {
    RgbImage frame = court;
    AlphaPlane mask(w, h, 1);
    for (std::size_t i = 0; i < spec.entities.size(); ++i) {
      const EntityScript& e = spec.entities[i];
      const auto x0 = static_cast<int>(std::lround(e.start.x + static_cast<double>(f) * e.velocity.x));
      const auto y0 = static_cast<int>(std::lround(e.start.y + static_cast<double>(f) * e.velocity.y));
      if (x0 < 0 || y0 < 0 || x0 + e.width > w || y0 + e.height > h) {
        throw Error(ErrorCode::kInvalidArgument,
                    "scene: entity " + e.id + " leaves the frame at frame " + std::to_string(f));
      }
      for (int y = y0; y < y0 + e.height; ++y) {
        for (int x = x0; x < x0 + e.width; ++x) {
          std::uint8_t* p = frame.pixel(x, y);
          p[0] = colors[i].r;
          p[1] = colors[i].g;
          p[2] = colors[i].b;
          *mask.pixel(x, y) = 255;
        }
      }
      TrackSample s;
      s.bbox = {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(e.width),
                static_cast<double>(e.height)};
      if (spec.keypoints) s.keypoints = body_keypoints(s.bbox);
      scene.dataset.entities[i].samples.emplace(f, s);
    }
    scene.frames.push_back(std::move(frame));
    scene.masks.push_back(std::move(mask));
  }
  return scene;
}

void write_scene(const Scene& scene, const std::filesystem::path& dir, bool y4m) {
  char name[32];
  std::filesystem::create_directories(dir / "video");
  std::filesystem::create_directories(dir / "masks");
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    std::snprintf(name, sizeof name, "frame_%06zu.png", i);
    write_png(dir / "video" / name, scene.frames[i]);
    std::snprintf(name, sizeof name, "mask_%06zu.png", i);
    write_png(dir / "masks" / name, scene.masks[i]);
  }
  write_text_file(dir / "tracking.json", encode_tracking_canonical(scene.dataset));
  if (y4m) {
    const VideoMeta& meta = scene.dataset.meta;
    std::string bytes = "YUV4MPEG2 W" + std::to_string(meta.width) + " H" + std::to_string(meta.height) + " F" +
                        std::to_string(meta.fps.num()) + ":" + std::to_string(meta.fps.den()) +
                        " Ip A1:1 C420jpeg\n";
    std::vector<std::uint8_t> planes;
    for (const auto& frame : scene.frames) {
      rgb_to_yuv420(frame, planes);
      bytes += "FRAME\n";
      bytes.append(planes.begin(), planes.end());
    }
    write_text_file(dir / "video.y4m", bytes);
  }
}

Project project_for_scene(const SceneSpec& spec) {
  return make_project(spec.meta(), "video", "tracking.json", "masks");
}

// ---------------------------------------------------------------------------
// Reference compositor. One pixel at a time, every primitive tested against
// every pixel.

namespace {

struct Rgb16 {
  std::uint32_t c[3];
};

std::uint32_t over(std::uint32_t dst, std::uint32_t src, std::uint32_t alpha) {
  return (dst * (65535u - alpha) + src * alpha + 32767u) / 65535u;
}

void paint_pixel(Rgb16& px, const Paint& paint, std::uint32_t alpha) {
  px.c[0] = over(px.c[0], paint.r, alpha);
  px.c[1] = over(px.c[1], paint.g, alpha);
  px.c[2] = over(px.c[2], paint.b, alpha);
}

bool finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

bool inside_polygon(const std::vector<Point>& pts, double xc, double yc) {
  if (pts.size() < 3) return false;
  for (const auto& p : pts) {
    if (!finite(p)) return false;
  }
  bool inside = false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point a = pts[i];
    const Point b = pts[(i + 1) % pts.size()];
    if ((a.y <= yc) != (b.y <= yc)) {
      const double xi = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
      if (xc < xi) inside = !inside;
    }
  }
  return inside;
}

bool near_segment(Point a, Point b, double xc, double yc, double r) {
  if (!finite(a) || !finite(b)) return false;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double px = xc - a.x;
  const double py = yc - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = (px * dx + py * dy) / len2;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  const double ex = px - t * dx;
  const double ey = py - t * dy;
  return ex * ex + ey * ey <= r * r;
}

void shade(const Primitive& prim, int x, int y, Rgb16& px) {
  const double xc = x + 0.5;
  const double yc = y + 0.5;
  if (const auto* p = std::get_if<FillPolygon>(&prim)) {
    if (inside_polygon(p->points, xc, yc)) paint_pixel(px, p->paint, p->paint.a);
  } else if (const auto* p = std::get_if<StrokeSegments>(&prim)) {
    if (!(p->radius > 0.0)) return;
    for (const auto& [a, b] : p->segments) {
      if (near_segment(a, b, xc, yc, p->radius)) {
        paint_pixel(px, p->paint, p->paint.a);
        return;
      }
    }
  } else if (const auto* p = std::get_if<RadialGlow>(&prim)) {
    if (!(p->ground_radius > 0.0) || !inside_polygon(p->points, xc, yc)) return;
    const auto& m = p->screen_to_ground.values();
    const double w = m[6] * xc + m[7] * yc + m[8];
    if (std::abs(w) <= 1e-12) return;
    const double gx = (m[0] * xc + m[1] * yc + m[2]) / w;
    const double gy = (m[3] * xc + m[4] * yc + m[5]) / w;
    const double dx = gx - p->ground_center.x;
    const double dy = gy - p->ground_center.y;
    const double rho = std::min(1.0, std::sqrt(dx * dx + dy * dy) / p->ground_radius);
    const double a = std::clamp(p->inner_alpha + (p->outer_alpha - p->inner_alpha) * rho, 0.0, 1.0);
    paint_pixel(px, p->paint, static_cast<std::uint32_t>(std::lround(a * p->paint.a)));
  } else if (const auto* p = std::get_if<GlyphRun>(&prim)) {
    const int cell = font::kGlyphWidth * p->scale;
    const int dx = x - p->x;
    const int dy = y - p->y;
    if (dx < 0 || dy < 0 || dy >= font::kGlyphHeight * p->scale) return;
    const auto i = static_cast<std::size_t>(dx / cell);
    if (i >= p->text.size()) return;
    const auto ch = static_cast<unsigned char>(p->text[i]);
    if (ch < font::kFirstGlyph || ch > font::kLastGlyph) return;
    const int col = (dx % cell) / p->scale;
    const int row = dy / p->scale;
    if (font::kGlyphs[ch - font::kFirstGlyph][static_cast<std::size_t>(row)] & (0x80 >> col)) {
      paint_pixel(px, p->paint, p->paint.a);
    }
  }
}

void shade_cmd(const DrawCmd& cmd, int x, int y, Rgb16& px) {
  for (const auto& prim : cmd.primitives) shade(prim, x, y, px);
}

}  // namespace

Canvas reference_render(const FramePlan& plan, const RgbImage& bg, const AlphaPlane& mask) {
  const int w = plan.width;
  const int h = plan.height;
  if (bg.width != w || bg.height != h || bg.channels != 3 || mask.width != w || mask.height != h ||
      mask.channels != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "frame does not match the plan dimensions");
  }

  // Everything up to the zoom, in scene space.
  std::vector<Rgb16> scene(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb16 px;
      const std::uint8_t* src = bg.pixel(x, y);
      for (int k = 0; k < 3; ++k) px.c[k] = src[k] * 257u;

      if (plan.bg_filter && plan.bg_filter->color.a > 0) {
        const Paint& f = plan.bg_filter->color;
        if (plan.bg_filter->mode == FilterMode::kTint) {
          paint_pixel(px, f, f.a);
        } else {
          const std::uint32_t luma = (77u * px.c[0] + 150u * px.c[1] + 29u * px.c[2] + 128u) >> 8;
          for (int k = 0; k < 3; ++k) px.c[k] = over(px.c[k], luma, f.a);
        }
      }
      for (const auto& cmd : plan.draws) {
        if (cmd.layer < kLayerForeground) shade_cmd(cmd, x, y, px);
      }
      const std::uint32_t m = *mask.pixel(x, y);
      if (m > 0) {
        for (int k = 0; k < 3; ++k) px.c[k] = over(px.c[k], src[k] * 257u, m * 257u);
      }
      for (const auto& cmd : plan.draws) {
        if (cmd.layer >= kLayerForeground) shade_cmd(cmd, x, y, px);
      }
      scene[static_cast<std::size_t>(y) * w + x] = px;
    }
  }

  auto scene_at = [&](int x, int y) -> const Rgb16& { return scene[static_cast<std::size_t>(y) * w + x]; };

  Canvas out(w, h, 4);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb16 px = scene_at(x, y);
      if (plan.zoom && plan.zoom->factor > 1.0) {
        const double win_w = w / plan.zoom->factor;
        const double win_h = h / plan.zoom->factor;
        const double x0 = std::clamp(plan.zoom->center.x - win_w / 2.0, 0.0, w - win_w);
        const double y0 = std::clamp(plan.zoom->center.y - win_h / 2.0, 0.0, h - win_h);
        // Bilinear sample at the window position of this pixel's center.
        double sx = x0 + (x + 0.5) * (win_w / w) - 0.5;
        double sy = y0 + (y + 0.5) * (win_h / h) - 0.5;
        sx = std::clamp(sx, 0.0, w - 1.0);
        sy = std::clamp(sy, 0.0, h - 1.0);
        int ix = static_cast<int>(std::floor(sx));
        int iy = static_cast<int>(std::floor(sy));
        double fx = sx - ix;
        double fy = sy - iy;
        if (ix >= w - 1) {
          ix = w - 2;
          fx = 1.0;
        }
        if (iy >= h - 1) {
          iy = h - 2;
          fy = 1.0;
        }
        const auto wx = static_cast<std::uint32_t>(std::lround(fx * 256.0));
        const auto wy = static_cast<std::uint32_t>(std::lround(fy * 256.0));
        for (int k = 0; k < 3; ++k) {
          const std::uint32_t top = scene_at(ix, iy).c[k] * (256u - wx) + scene_at(ix + 1, iy).c[k] * wx;
          const std::uint32_t bottom = scene_at(ix, iy + 1).c[k] * (256u - wx) + scene_at(ix + 1, iy + 1).c[k] * wx;
          px.c[k] = (top * (256u - wy) + bottom * wy + 32768u) >> 16;
        }
      }
      for (const auto& cmd : plan.captions) shade_cmd(cmd, x, y, px);
      std::uint8_t* o = out.pixel(x, y);
      for (int k = 0; k < 3; ++k) o[k] = static_cast<std::uint8_t>((px.c[k] * 255u + 32767u) / 65535u);
      o[3] = 255;
    }
  }
  return out;
}

std::vector<Caption> stub_captioner(const TrackingDataset& dataset, std::int64_t every_n_frames) {
  if (every_n_frames < 1) every_n_frames = 1;
  std::vector<Caption> out;
  const std::int64_t total = dataset.meta.frame_count;
  for (std::int64_t f = 0; f < total; f += every_n_frames) {
    int visible = 0;
    const EntityTrack* fastest = nullptr;
    double best_speed = -1.0;
    for (const auto& e : dataset.entities) {
      const TrackSample* now = e.sample_at(f);
      if (now == nullptr) continue;
      ++visible;
      double speed = 0.0;
      if (const TrackSample* next = e.sample_at(f + 1)) {
        speed = distance({now->bbox.x + now->bbox.w / 2, now->bbox.y + now->bbox.h / 2},
                         {next->bbox.x + next->bbox.w / 2, next->bbox.y + next->bbox.h / 2});
      }
      if (speed > best_speed) {
        best_speed = speed;
        fastest = &e;
      }
    }
    std::string text = std::to_string(visible) + (visible == 1 ? " player visible" : " players visible");
    if (fastest != nullptr) text += "; fastest: " + fastest->entity_id;
    out.push_back({text, f, std::min(total, f + every_n_frames), {}});
  }
  return out;
}

}  // namespace courtviz::synth
