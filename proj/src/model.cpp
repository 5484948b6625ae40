#include "courtviz/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "courtviz/error.hpp"

namespace courtviz {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ObjectKind, std::string_view>, 13> kKindNames{{
    {ObjectKind::kCircle, "Circle"},
    {ObjectKind::kSpotlight, "Spotlight"},
    {ObjectKind::kConnector, "Connector"},
    {ObjectKind::kPath, "Path"},
    {ObjectKind::kZone, "Zone"},
    {ObjectKind::kMarker, "Marker"},
    {ObjectKind::kBgFilter, "BgFilter"},
    {ObjectKind::kZoomIn, "ZoomIn"},
    {ObjectKind::kText, "Text"},
    {ObjectKind::kCaption, "Caption"},
    {ObjectKind::kFreezeFrame, "FreezeFrame"},
    {ObjectKind::kBackground, "Background"},
    {ObjectKind::kForeground, "Foreground"},
}};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, where + ": " + what);
}

const json& req(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where + "." + key, "missing required field");
  return *it;
}

template <typename T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(where, e.what());
  }
}

template <typename T>
T opt(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return get_as<T>(*it, where + "." + key);
}

json color_json(Rgba c) { return json::array({c.r, c.g, c.b, c.a}); }

Rgba color_from(const json& j, const std::string& where) {
  if (!j.is_array() || (j.size() != 3 && j.size() != 4)) fail(where, "color must be [r, g, b] or [r, g, b, a]");
  auto channel = [&](std::size_t i) {
    const int v = get_as<int>(j[i], where);
    if (v < 0 || v > 255) fail(where, "color channel out of [0, 255]");
    return static_cast<std::uint8_t>(v);
  };
  return {channel(0), channel(1), channel(2), j.size() == 4 ? channel(3) : std::uint8_t{255}};
}

Rgba opt_color(const json& j, const char* key, Rgba fallback, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return color_from(*it, where + "." + key);
}

json point_json(Point p) { return json::array({p.x, p.y}); }

Point point_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "point must be [x, y]");
  return {get_as<double>(j[0], where), get_as<double>(j[1], where)};
}

std::vector<Point> points_from(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected a list of points");
  std::vector<Point> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point_from(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

json points_json(const std::vector<Point>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(point_json(p));
  return out;
}

json rational_json(Rational r) { return json::array({r.num(), r.den()}); }

Rational rational_from(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (!j.is_array() || j.size() != 2) fail(where, "rational must be [num, den]");
  const auto den = get_as<std::int64_t>(j[1], where);
  if (den == 0) fail(where, "zero denominator");
  return Rational(get_as<std::int64_t>(j[0], where), den);
}

json anchor_json(const Anchor& a) {
  if (a.point) return {{"point", point_json(*a.point)}};
  return {{"entity_id", a.entity_id}, {"placement", to_string(a.placement)}};
}

Anchor anchor_from(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "anchor must be an object");
  if (j.contains("point")) return Anchor::fixed(point_from(j.at("point"), where + ".point"));
  Anchor a;
  a.entity_id = get_as<std::string>(req(j, "entity_id", where), where + ".entity_id");
  try {
    a.placement = placement_from_string(get_as<std::string>(req(j, "placement", where), where + ".placement"));
  } catch (const Error& e) {
    fail(where + ".placement", e.what());
  }
  return a;
}

template <typename Enum, typename Parse>
Enum enum_from(const json& j, const char* key, Enum fallback, const std::string& where, Parse parse) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return parse(get_as<std::string>(*it, where + "." + key));
  } catch (const Error& e) {
    fail(where + "." + key, e.what());
  }
}

json params_json(const EffectParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CircleParams>) {
          return {{"anchor_entity", p.anchor_entity}, {"radius", p.radius}, {"stroke_color", color_json(p.stroke_color)},
                  {"stroke_width", p.stroke_width}, {"fill_alpha", p.fill_alpha}};
        } else if constexpr (std::is_same_v<T, SpotlightParams>) {
          return {{"anchor_entity", p.anchor_entity}, {"glow_color", color_json(p.glow_color)}, {"radius", p.radius},
                  {"inner_alpha", p.inner_alpha}, {"outer_alpha", p.outer_alpha}};
        } else if constexpr (std::is_same_v<T, ConnectorParams>) {
          return {{"anchor_entities", p.anchor_entities}, {"line_color", color_json(p.line_color)},
                  {"line_width", p.line_width}, {"closed", p.closed}};
        } else if constexpr (std::is_same_v<T, PathParams>) {
          return {{"points", points_json(p.points)}, {"color", color_json(p.color)}, {"width", p.width},
                  {"arrow_head", p.arrow_head}, {"dashed", p.dashed}};
        } else if constexpr (std::is_same_v<T, ZoneParams>) {
          return {{"points", points_json(p.points)}, {"fill_color", color_json(p.fill_color)},
                  {"fill_alpha", p.fill_alpha}};
        } else if constexpr (std::is_same_v<T, MarkerParams>) {
          return {{"symbol", to_string(p.symbol)}, {"position", point_json(p.position)}, {"color", color_json(p.color)},
                  {"size", p.size}};
        } else if constexpr (std::is_same_v<T, BgFilterParams>) {
          return {{"filter_color", color_json(p.filter_color)}, {"alpha", p.alpha}, {"mode", to_string(p.mode)}};
        } else if constexpr (std::is_same_v<T, ZoomInParams>) {
          return {{"target", anchor_json(p.target)}, {"factor", p.factor}, {"ease_frames", p.ease_frames}};
        } else if constexpr (std::is_same_v<T, TextParams>) {
          return {{"content", p.content}, {"target", anchor_json(p.target)}, {"font_px", p.font_px},
                  {"color", color_json(p.color)}, {"pill", p.pill}};
        } else if constexpr (std::is_same_v<T, CaptionParams>) {
          return {{"content", p.content}, {"font_px", p.font_px}, {"color", color_json(p.color)}};
        } else if constexpr (std::is_same_v<T, FreezeFrameParams>) {
          return json::object();
        } else {
          return {{"asset", p.asset}};
        }
      },
      params);
}

EffectParams params_from(ObjectKind kind, const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "params must be an object");
  switch (kind) {
    case ObjectKind::kCircle: {
      CircleParams p;
      p.anchor_entity = opt<std::string>(j, "anchor_entity", p.anchor_entity, where);
      p.radius = opt(j, "radius", p.radius, where);
      p.stroke_color = opt_color(j, "stroke_color", p.stroke_color, where);
      p.stroke_width = opt(j, "stroke_width", p.stroke_width, where);
      p.fill_alpha = opt(j, "fill_alpha", p.fill_alpha, where);
      return p;
    }
    case ObjectKind::kSpotlight: {
      SpotlightParams p;
      p.anchor_entity = opt<std::string>(j, "anchor_entity", p.anchor_entity, where);
      p.glow_color = opt_color(j, "glow_color", p.glow_color, where);
      p.radius = opt(j, "radius", p.radius, where);
      p.inner_alpha = opt(j, "inner_alpha", p.inner_alpha, where);
      p.outer_alpha = opt(j, "outer_alpha", p.outer_alpha, where);
      return p;
    }
    case ObjectKind::kConnector: {
      ConnectorParams p;
      p.anchor_entities = opt(j, "anchor_entities", p.anchor_entities, where);
      p.line_color = opt_color(j, "line_color", p.line_color, where);
      p.line_width = opt(j, "line_width", p.line_width, where);
      p.closed = opt(j, "closed", p.closed, where);
      return p;
    }
    case ObjectKind::kPath: {
      PathParams p;
      if (j.contains("points")) p.points = points_from(j.at("points"), where + ".points");
      p.color = opt_color(j, "color", p.color, where);
      p.width = opt(j, "width", p.width, where);
      p.arrow_head = opt(j, "arrow_head", p.arrow_head, where);
      p.dashed = opt(j, "dashed", p.dashed, where);
      return p;
    }
    case ObjectKind::kZone: {
      ZoneParams p;
      if (j.contains("points")) p.points = points_from(j.at("points"), where + ".points");
      p.fill_color = opt_color(j, "fill_color", p.fill_color, where);
      p.fill_alpha = opt(j, "fill_alpha", p.fill_alpha, where);
      return p;
    }
    case ObjectKind::kMarker: {
      MarkerParams p;
      p.symbol = enum_from(j, "symbol", p.symbol, where, marker_symbol_from_string);
      if (j.contains("position")) p.position = point_from(j.at("position"), where + ".position");
      p.color = opt_color(j, "color", p.color, where);
      p.size = opt(j, "size", p.size, where);
      return p;
    }
    case ObjectKind::kBgFilter: {
      BgFilterParams p;
      p.filter_color = opt_color(j, "filter_color", p.filter_color, where);
      p.alpha = opt(j, "alpha", p.alpha, where);
      p.mode = enum_from(j, "mode", p.mode, where, filter_mode_from_string);
      return p;
    }
    case ObjectKind::kZoomIn: {
      ZoomInParams p;
      if (j.contains("target")) p.target = anchor_from(j.at("target"), where + ".target");
      p.factor = opt(j, "factor", p.factor, where);
      p.ease_frames = opt(j, "ease_frames", p.ease_frames, where);
      return p;
    }
    case ObjectKind::kText: {
      TextParams p;
      p.content = opt<std::string>(j, "content", p.content, where);
      if (j.contains("target")) p.target = anchor_from(j.at("target"), where + ".target");
      p.font_px = opt(j, "font_px", p.font_px, where);
      p.color = opt_color(j, "color", p.color, where);
      p.pill = opt(j, "pill", p.pill, where);
      return p;
    }
    case ObjectKind::kCaption: {
      CaptionParams p;
      p.content = opt<std::string>(j, "content", p.content, where);
      p.font_px = opt(j, "font_px", p.font_px, where);
      p.color = opt_color(j, "color", p.color, where);
      return p;
    }
    case ObjectKind::kFreezeFrame: return FreezeFrameParams{};
    case ObjectKind::kBackground:
    case ObjectKind::kForeground: {
      AssetParams p;
      p.asset = opt<std::string>(j, "asset", p.asset, where);
      return p;
    }
  }
  return FreezeFrameParams{};
}

}  // namespace

std::string_view to_string(ObjectKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Circle";
}

ObjectKind object_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::kParse, "unknown object kind '" + std::string(name) + "'");
}

int default_layer(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kBackground:
    case ObjectKind::kBgFilter:
    case ObjectKind::kFreezeFrame:
    case ObjectKind::kZoomIn: return kLayerBackground;
    case ObjectKind::kCircle:
    case ObjectKind::kSpotlight:
    case ObjectKind::kPath:
    case ObjectKind::kZone:
    case ObjectKind::kMarker: return kLayerGround;
    case ObjectKind::kForeground: return kLayerForeground;
    case ObjectKind::kConnector:
    case ObjectKind::kText: return kLayerOverlay;
    case ObjectKind::kCaption: return kLayerCaption;
  }
  return kLayerGround;
}

std::string_view to_string(MarkerSymbol symbol) {
  switch (symbol) {
    case MarkerSymbol::kO: return "O";
    case MarkerSymbol::kX: return "X";
    case MarkerSymbol::kTriangle: return "Triangle";
  }
  return "O";
}

MarkerSymbol marker_symbol_from_string(std::string_view name) {
  if (name == "O") return MarkerSymbol::kO;
  if (name == "X") return MarkerSymbol::kX;
  if (name == "Triangle") return MarkerSymbol::kTriangle;
  throw Error(ErrorCode::kParse, "unknown marker symbol '" + std::string(name) + "'");
}

std::string_view to_string(FilterMode mode) { return mode == FilterMode::kTint ? "Tint" : "Grayscale"; }

FilterMode filter_mode_from_string(std::string_view name) {
  if (name == "Tint") return FilterMode::kTint;
  if (name == "Grayscale") return FilterMode::kGrayscale;
  throw Error(ErrorCode::kParse, "unknown filter mode '" + std::string(name) + "'");
}

EffectParams default_params(ObjectKind kind) { return params_from(kind, json::object(), "params"); }

bool params_match_kind(ObjectKind kind, const EffectParams& params) {
  switch (kind) {
    case ObjectKind::kCircle: return std::holds_alternative<CircleParams>(params);
    case ObjectKind::kSpotlight: return std::holds_alternative<SpotlightParams>(params);
    case ObjectKind::kConnector: return std::holds_alternative<ConnectorParams>(params);
    case ObjectKind::kPath: return std::holds_alternative<PathParams>(params);
    case ObjectKind::kZone: return std::holds_alternative<ZoneParams>(params);
    case ObjectKind::kMarker: return std::holds_alternative<MarkerParams>(params);
    case ObjectKind::kBgFilter: return std::holds_alternative<BgFilterParams>(params);
    case ObjectKind::kZoomIn: return std::holds_alternative<ZoomInParams>(params);
    case ObjectKind::kText: return std::holds_alternative<TextParams>(params);
    case ObjectKind::kCaption: return std::holds_alternative<CaptionParams>(params);
    case ObjectKind::kFreezeFrame: return std::holds_alternative<FreezeFrameParams>(params);
    case ObjectKind::kBackground:
    case ObjectKind::kForeground: return std::holds_alternative<AssetParams>(params);
  }
  return false;
}

ObjectKind params_kind(const EffectParams& params) {
  for (const auto& [kind, name] : kKindNames) {
    if (params_match_kind(kind, params)) return kind;
  }
  return ObjectKind::kBackground;
}

json to_json(const EffectParams& params) { return params_json(params); }

EffectParams params_from_json(ObjectKind kind, const json& doc, const std::string& where) {
  return params_from(kind, doc, where);
}

const RenderObject* Project::find_object(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

RenderObject* Project::find_object(std::string_view id) {
  for (auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

Project make_project(const VideoMeta& meta, std::string video_ref, std::string tracking_ref, std::string mask_ref) {
  Project p;
  p.meta = meta;
  p.timeline = Timeline::identity(meta.frame_count);
  p.homography = default_ground_homography(meta);
  RenderObject bg;
  bg.id = "background";
  bg.kind = ObjectKind::kBackground;
  bg.layer = kLayerBackground;
  bg.params = AssetParams{video_ref};
  RenderObject fg;
  fg.id = "foreground";
  fg.kind = ObjectKind::kForeground;
  fg.layer = kLayerForeground;
  fg.params = AssetParams{mask_ref};
  p.objects = {bg, fg};
  p.video_ref = std::move(video_ref);
  p.tracking_ref = std::move(tracking_ref);
  p.mask_ref = std::move(mask_ref);
  sync_base_layers(p);
  return p;
}

void sync_base_layers(Project& project) {
  const std::int64_t duration = output_duration(project.timeline);
  for (auto& o : project.objects) {
    if (o.kind == ObjectKind::kBackground || o.kind == ObjectKind::kForeground) {
      o.start_frame = 0;
      o.end_frame = duration;
    }
  }
}

namespace {

bool unit_range(double v) { return v >= 0.0 && v <= 1.0; }

class Checker {
 public:
  Checker(const Project& project, const TrackingDataset& dataset, std::vector<std::string>& out)
      : project_(project), dataset_(dataset), out_(out) {}

  void add(const std::string& field, const std::string& rule) { out_.push_back(field + ": " + rule); }

  void entity(const std::string& field, const std::string& id) {
    if (id.empty()) {
      add(field, "entity id required");
    } else if (dataset_.find(id) == nullptr) {
      add(field, "unresolved anchor, entity '" + id + "' is not in the tracking dataset");
    }
  }

  void anchor(const std::string& field, const Anchor& a, bool allow_placement) {
    if (a.point) {
      const Point p = *a.point;
      if (!(p.x >= 0 && p.y >= 0 && p.x <= project_.meta.width && p.y <= project_.meta.height)) {
        add(field + ".point", "must lie within the scene bounds");
      }
    } else {
      entity(field + ".entity_id", a.entity_id);
      (void)allow_placement;
    }
  }

  void color_alpha(const std::string& field, double v) {
    if (!unit_range(v)) add(field, "must lie within [0, 1]");
  }

  void positive(const std::string& field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) add(field, "must be positive");
  }

  void params(const std::string& f, const EffectParams& params) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, CircleParams>) {
            entity(f + ".anchor_entity", p.anchor_entity);
            positive(f + ".radius", p.radius);
            positive(f + ".stroke_width", p.stroke_width);
            color_alpha(f + ".fill_alpha", p.fill_alpha);
          } else if constexpr (std::is_same_v<T, SpotlightParams>) {
            entity(f + ".anchor_entity", p.anchor_entity);
            positive(f + ".radius", p.radius);
            color_alpha(f + ".inner_alpha", p.inner_alpha);
            color_alpha(f + ".outer_alpha", p.outer_alpha);
          } else if constexpr (std::is_same_v<T, ConnectorParams>) {
            const std::set<std::string> distinct(p.anchor_entities.begin(), p.anchor_entities.end());
            if (distinct.size() < 2 || distinct.size() != p.anchor_entities.size()) {
              add(f + ".anchor_entities", "needs at least 2 distinct entities");
            }
            for (std::size_t i = 0; i < p.anchor_entities.size(); ++i) {
              entity(f + ".anchor_entities[" + std::to_string(i) + "]", p.anchor_entities[i]);
            }
            positive(f + ".line_width", p.line_width);
          } else if constexpr (std::is_same_v<T, PathParams>) {
            if (p.points.size() < 2) add(f + ".points", "needs at least 2 points");
            positive(f + ".width", p.width);
          } else if constexpr (std::is_same_v<T, ZoneParams>) {
            if (p.points.size() < 3) {
              add(f + ".points", "needs at least 3 points");
            } else if (!is_simple_polygon(p.points)) {
              add(f + ".points", "polygon must be simple (non-self-intersecting)");
            }
            color_alpha(f + ".fill_alpha", p.fill_alpha);
          } else if constexpr (std::is_same_v<T, MarkerParams>) {
            positive(f + ".size", p.size);
          } else if constexpr (std::is_same_v<T, BgFilterParams>) {
            color_alpha(f + ".alpha", p.alpha);
          } else if constexpr (std::is_same_v<T, ZoomInParams>) {
            anchor(f + ".target", p.target, false);
            if (!(p.factor >= 1.0 && p.factor <= 4.0)) add(f + ".factor", "must lie within [1, 4]");
            if (p.ease_frames < 0) add(f + ".ease_frames", "must be non-negative");
          } else if constexpr (std::is_same_v<T, TextParams>) {
            anchor(f + ".target", p.target, true);
            if (p.font_px < 1) add(f + ".font_px", "must be positive");
          } else if constexpr (std::is_same_v<T, CaptionParams>) {
            if (p.font_px < 1) add(f + ".font_px", "must be positive");
          }
        },
        params);
  }

 private:
  const Project& project_;
  const TrackingDataset& dataset_;
  std::vector<std::string>& out_;
};

}  // namespace

std::vector<std::string> validate_project(const Project& project, const TrackingDataset& dataset) {
  std::vector<std::string> out;
  Checker check(project, dataset, out);

  if (project.schema_version != kSchemaVersion) check.add("schema_version", "unsupported version");
  for (auto& v : meta_violations(project.meta)) out.push_back(std::move(v));
  if (dataset.meta.width != project.meta.width || dataset.meta.height != project.meta.height ||
      dataset.meta.frame_count != project.meta.frame_count) {
    check.add("meta", "does not match the tracking dataset's video metadata");
  }
  const auto timeline_issues = timeline_violations(project.timeline, project.meta.frame_count);
  out.insert(out.end(), timeline_issues.begin(), timeline_issues.end());
  const std::int64_t duration = timeline_issues.empty() ? output_duration(project.timeline) : 0;
  if (!project.homography.invertible()) check.add("homography", "must be invertible");

  std::set<std::string> ids;
  int backgrounds = 0;
  int foregrounds = 0;
  for (std::size_t i = 0; i < project.objects.size(); ++i) {
    const RenderObject& o = project.objects[i];
    const std::string f = "objects[" + std::to_string(i) + "]";
    if (o.id.empty()) check.add(f + ".id", "must not be empty");
    if (!ids.insert(o.id).second) check.add(f + ".id", "duplicate id '" + o.id + "'");
    if (o.start_frame < 0) check.add(f + ".start_frame", "must be non-negative");
    if (o.end_frame <= o.start_frame) {
      check.add(f + ".end_frame", "must exceed start_frame");
    } else if (timeline_issues.empty() && o.end_frame > duration) {
      check.add(f + ".end_frame", "exceeds output duration " + std::to_string(duration));
    }
    if (o.layer != default_layer(o.kind)) {
      check.add(f + ".layer", "must be " + std::to_string(default_layer(o.kind)) + " for " +
                                  std::string(to_string(o.kind)));
    }
    if (!params_match_kind(o.kind, o.params)) {
      check.add(f + ".params", "do not match kind " + std::string(to_string(o.kind)));
      continue;
    }
    check.params(f + ".params", o.params);
    if (o.kind == ObjectKind::kBackground || o.kind == ObjectKind::kForeground) {
      (o.kind == ObjectKind::kBackground ? backgrounds : foregrounds)++;
      if (o.start_frame != 0 || o.end_frame != duration) check.add(f, "must span the whole timeline");
    }
  }
  if (backgrounds != 1) check.add("objects", "exactly one Background object required, found " + std::to_string(backgrounds));
  if (foregrounds != 1) check.add("objects", "exactly one Foreground object required, found " + std::to_string(foregrounds));

  std::vector<std::pair<std::int64_t, std::int64_t>> spans;
  for (std::size_t i = 0; i < project.captions.size(); ++i) {
    const Caption& c = project.captions[i];
    const std::string f = "captions[" + std::to_string(i) + "]";
    if (c.start_frame < 0) check.add(f + ".start_frame", "must be non-negative");
    if (c.end_frame <= c.start_frame) {
      check.add(f + ".end_frame", "must exceed start_frame");
      continue;
    }
    if (timeline_issues.empty() && c.end_frame > duration) {
      check.add(f + ".end_frame", "exceeds output duration " + std::to_string(duration));
    }
    if (c.style.font_px < 1) check.add(f + ".style.font_px", "must be positive");
    for (std::size_t k = 0; k < spans.size(); ++k) {
      if (c.start_frame < spans[k].second && spans[k].first < c.end_frame) {
        check.add(f, "overlaps captions[" + std::to_string(k) + "]");
      }
    }
    spans.emplace_back(c.start_frame, c.end_frame);
  }
  return out;
}

json to_json(const Homography& h) { return json(h.values()); }

Homography homography_from_json(const json& doc, const std::string& where) {
  if (!doc.is_array() || doc.size() != 9) fail(where, "expected 9 row-major values");
  std::array<double, 9> m{};
  for (std::size_t i = 0; i < 9; ++i) m[i] = get_as<double>(doc[i], where);
  return Homography(m);
}

json to_json(const Timeline& tl) {
  json segs = json::array();
  for (const auto& s : tl.segments) {
    json j = {{"source_start", s.source_start}, {"source_len", s.source_len}, {"speed", rational_json(s.speed)},
              {"frozen", s.frozen}, {"muted", s.muted}};
    if (s.phase != Rational(0)) j["phase"] = rational_json(s.phase);
    if (s.trim != Rational(0)) j["trim"] = rational_json(s.trim);
    segs.push_back(std::move(j));
  }
  return {{"segments", segs}};
}

Timeline timeline_from_json(const json& doc, const std::string& where) {
  const json& segs = req(doc, "segments", where);
  if (!segs.is_array()) fail(where + ".segments", "expected a list");
  Timeline tl;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string f = where + ".segments[" + std::to_string(i) + "]";
    const json& s = segs[i];
    Segment seg;
    seg.source_start = get_as<std::int64_t>(req(s, "source_start", f), f + ".source_start");
    seg.source_len = get_as<std::int64_t>(req(s, "source_len", f), f + ".source_len");
    seg.speed = s.contains("speed") ? rational_from(s.at("speed"), f + ".speed") : Rational(1);
    seg.frozen = opt(s, "frozen", false, f);
    seg.muted = opt(s, "muted", false, f);
    if (s.contains("phase")) seg.phase = rational_from(s.at("phase"), f + ".phase");
    if (s.contains("trim")) seg.trim = rational_from(s.at("trim"), f + ".trim");
    tl.segments.push_back(seg);
  }
  return tl;
}

json to_json(const RenderObject& o) {
  json j = o.extra.is_object() ? o.extra : json::object();
  j["id"] = o.id;
  j["kind"] = to_string(o.kind);
  j["start_frame"] = o.start_frame;
  j["end_frame"] = o.end_frame;
  j["layer"] = o.layer;
  j["z"] = o.z;
  j["params"] = params_json(o.params);
  return j;
}

RenderObject render_object_from_json(const json& j, const std::string& where) {
  static const std::set<std::string> kKnown{"id", "kind", "start_frame", "end_frame", "layer", "z", "params"};
  if (!j.is_object()) fail(where, "expected an object");
  RenderObject o;
  o.id = opt<std::string>(j, "id", "", where);
  try {
    o.kind = object_kind_from_string(get_as<std::string>(req(j, "kind", where), where + ".kind"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse && std::string(e.what()).rfind(where, 0) == 0) throw;
    fail(where + ".kind", e.what());
  }
  o.start_frame = get_as<std::int64_t>(req(j, "start_frame", where), where + ".start_frame");
  o.end_frame = get_as<std::int64_t>(req(j, "end_frame", where), where + ".end_frame");
  o.layer = opt(j, "layer", default_layer(o.kind), where);
  o.z = opt(j, "z", 0, where);
  o.params = params_from(o.kind, j.contains("params") ? j.at("params") : json::object(), where + ".params");
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) o.extra[key] = value;
  }
  return o;
}

json to_json(const Caption& c) {
  return {{"text", c.text},
          {"start_frame", c.start_frame},
          {"end_frame", c.end_frame},
          {"style", {{"font_px", c.style.font_px}, {"color", color_json(c.style.color)}}}};
}

Caption caption_from_json(const json& j, const std::string& where) {
  Caption c;
  c.text = get_as<std::string>(req(j, "text", where), where + ".text");
  c.start_frame = get_as<std::int64_t>(req(j, "start_frame", where), where + ".start_frame");
  c.end_frame = get_as<std::int64_t>(req(j, "end_frame", where), where + ".end_frame");
  if (j.contains("style")) {
    const json& s = j.at("style");
    c.style.font_px = opt(s, "font_px", c.style.font_px, where + ".style");
    c.style.color = opt_color(s, "color", c.style.color, where + ".style");
  }
  return c;
}

json to_json(const Project& p) {
  json j = p.extra.is_object() ? p.extra : json::object();
  j["schema_version"] = p.schema_version;
  j["video_ref"] = p.video_ref;
  j["tracking_ref"] = p.tracking_ref;
  j["mask_ref"] = p.mask_ref;
  j["meta"] = {{"width", p.meta.width},
               {"height", p.meta.height},
               {"fps", rational_json(p.meta.fps)},
               {"frame_count", p.meta.frame_count}};
  j["timeline"] = to_json(p.timeline);
  json objects = json::array();
  for (const auto& o : p.objects) objects.push_back(to_json(o));
  j["objects"] = std::move(objects);
  json captions = json::array();
  for (const auto& c : p.captions) captions.push_back(to_json(c));
  j["captions"] = std::move(captions);
  j["homography"] = to_json(p.homography);
  j["export"] = {{"burn_in", p.export_settings.burn_in},
                 {"write_srt", p.export_settings.write_srt},
                 {"workers", p.export_settings.workers}};
  return j;
}

Project project_from_json(const json& j) {
  static const std::set<std::string> kKnown{"schema_version", "video_ref", "tracking_ref", "mask_ref", "meta",
                                            "timeline",       "objects",   "captions",     "homography", "export"};
  const std::string where = "project";
  if (!j.is_object()) fail(where, "expected a JSON object");
  Project p;
  p.schema_version = get_as<int>(req(j, "schema_version", where), "schema_version");
  if (p.schema_version > kSchemaVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "schema_version " + std::to_string(p.schema_version) +
                                                    " is newer than supported version " +
                                                    std::to_string(kSchemaVersion));
  }
  if (p.schema_version < 1) fail("schema_version", "must be at least 1");
  p.video_ref = get_as<std::string>(req(j, "video_ref", where), "video_ref");
  p.tracking_ref = get_as<std::string>(req(j, "tracking_ref", where), "tracking_ref");
  p.mask_ref = get_as<std::string>(req(j, "mask_ref", where), "mask_ref");

  const json& meta = req(j, "meta", where);
  p.meta.width = get_as<int>(req(meta, "width", "meta"), "meta.width");
  p.meta.height = get_as<int>(req(meta, "height", "meta"), "meta.height");
  p.meta.fps = rational_from(req(meta, "fps", "meta"), "meta.fps");
  p.meta.frame_count = get_as<std::int64_t>(req(meta, "frame_count", "meta"), "meta.frame_count");

  p.timeline = timeline_from_json(req(j, "timeline", where), "timeline");
  const json& objects = req(j, "objects", where);
  if (!objects.is_array()) fail("objects", "expected a list");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    p.objects.push_back(render_object_from_json(objects[i], "objects[" + std::to_string(i) + "]"));
  }
  if (j.contains("captions")) {
    const json& captions = j.at("captions");
    if (!captions.is_array()) fail("captions", "expected a list");
    for (std::size_t i = 0; i < captions.size(); ++i) {
      p.captions.push_back(caption_from_json(captions[i], "captions[" + std::to_string(i) + "]"));
    }
  }
  p.homography = homography_from_json(req(j, "homography", where), "homography");
  if (j.contains("export")) {
    const json& e = j.at("export");
    p.export_settings.burn_in = opt(e, "burn_in", false, "export");
    p.export_settings.write_srt = opt(e, "write_srt", true, "export");
    p.export_settings.workers = opt(e, "workers", 0, "export");
  }
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) p.extra[key] = value;
  }
  return p;
}

std::string encode_project(const Project& project) { return to_json(project).dump(2); }

Project decode_project(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "project: parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return project_from_json(doc);
}

}  // namespace courtviz
