#include "courtviz/tracking.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "courtviz/error.hpp"

namespace courtviz {

using nlohmann::json;

const TrackSample* EntityTrack::sample_at(std::int64_t frame) const {
  const auto it = samples.find(frame);
  return it == samples.end() ? nullptr : &it->second;
}

const EntityTrack* TrackingDataset::find(std::string_view entity_id) const {
  for (const auto& e : entities) {
    if (e.entity_id == entity_id) return &e;
  }
  return nullptr;
}

std::string_view to_string(Sport sport) {
  switch (sport) {
    case Sport::kBasketball: return "basketball";
    case Sport::kSoccer: return "soccer";
    case Sport::kVolleyball: return "volleyball";
    case Sport::kLacrosse: return "lacrosse";
    case Sport::kTennis: return "tennis";
  }
  return "basketball";
}

Sport sport_from_string(std::string_view name) {
  for (Sport s : {Sport::kBasketball, Sport::kSoccer, Sport::kVolleyball, Sport::kLacrosse, Sport::kTennis}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::kParse, "unknown sport '" + std::string(name) + "'");
}

std::string_view to_string(Placement placement) {
  switch (placement) {
    case Placement::kHead: return "Head";
    case Placement::kWaist: return "Waist";
    case Placement::kGround: return "Ground";
  }
  return "Ground";
}

Placement placement_from_string(std::string_view name) {
  if (name == "Head") return Placement::kHead;
  if (name == "Waist") return Placement::kWaist;
  if (name == "Ground") return Placement::kGround;
  throw Error(ErrorCode::kParse, "unknown placement '" + std::string(name) + "'");
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, where + ": " + what);
}

void check_sample(const VideoMeta& meta, std::int64_t frame, const BBox& b, const std::string& where) {
  if (frame < 0 || frame >= meta.frame_count) {
    fail(where, "frame " + std::to_string(frame) + " outside [0, " + std::to_string(meta.frame_count) + ")");
  }
  if (!(b.w > 0.0) || !(b.h > 0.0)) fail(where, "bbox width and height must be positive");
  if (b.x < 0.0 || b.y < 0.0 || b.x + b.w > meta.width || b.y + b.h > meta.height) {
    fail(where, "bbox lies outside the " + std::to_string(meta.width) + "x" + std::to_string(meta.height) + " frame");
  }
}

VideoMeta meta_from_json(const json& j) {
  VideoMeta meta;
  meta.width = j.at("width").get<int>();
  meta.height = j.at("height").get<int>();
  const auto& fps = j.at("fps");
  if (fps.is_array()) {
    if (fps.size() != 2) fail("meta.fps", "expected [num, den]");
    meta.fps = Rational(fps[0].get<std::int64_t>(), fps[1].get<std::int64_t>());
  } else {
    meta.fps = Rational(fps.get<std::int64_t>());
  }
  meta.frame_count = j.at("frame_count").get<std::int64_t>();
  return meta;
}

json meta_to_json(const VideoMeta& meta) {
  return {{"width", meta.width},
          {"height", meta.height},
          {"fps", json::array({meta.fps.num(), meta.fps.den()})},
          {"frame_count", meta.frame_count}};
}

}  // namespace

TrackingDataset parse_tracking_canonical(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("tracking: ") + e.what());
  }

  TrackingDataset ds;
  try {
    ds.meta = meta_from_json(doc.at("meta"));
    ds.sport = sport_from_string(doc.value("sport", std::string("basketball")));
  } catch (const json::exception& e) {
    fail("tracking.meta", e.what());
  }
  if (auto v = meta_violations(ds.meta, "tracking.meta"); !v.empty()) fail("tracking.meta", v.front());

  std::set<std::string> seen_ids;
  const json& entities = doc.contains("entities") ? doc.at("entities") : json::array();
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const std::string ewhere = "entities[" + std::to_string(i) + "]";
    EntityTrack track;
    try {
      const json& e = entities[i];
      track.entity_id = e.at("id").is_string() ? e.at("id").get<std::string>() : e.at("id").dump();
      if (!seen_ids.insert(track.entity_id).second) fail(ewhere, "duplicate entity id '" + track.entity_id + "'");
      const json& samples = e.contains("samples") ? e.at("samples") : json::array();
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const std::string where = ewhere + ".samples[" + std::to_string(k) + "]";
        const json& s = samples[k];
        const std::int64_t frame = s.at("frame").get<std::int64_t>();
        const json& bb = s.at("bbox");
        if (!bb.is_array() || bb.size() != 4) fail(where, "bbox must be [x, y, w, h]");
        TrackSample sample;
        sample.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(), bb[3].get<double>()};
        sample.confidence = s.value("conf", 1.0);
        sample.interpolated = s.value("interpolated", false);
        if (s.contains("keypoints") && !s.at("keypoints").is_null()) {
          const json& kp = s.at("keypoints");
          if (!kp.is_array() || kp.size() != kKeypointCount) fail(where, "keypoints must list 17 entries");
          Keypoints points;
          for (std::size_t p = 0; p < kKeypointCount; ++p) {
            if (kp[p].is_null()) continue;
            if (!kp[p].is_array() || kp[p].size() < 2) fail(where, "keypoint must be [x, y] or null");
            points[p] = Point{kp[p][0].get<double>(), kp[p][1].get<double>()};
          }
          sample.keypoints = points;
        }
        check_sample(ds.meta, frame, sample.bbox, where);
        if (!track.samples.emplace(frame, sample).second) {
          fail(where, "duplicate sample for entity '" + track.entity_id + "' at frame " + std::to_string(frame));
        }
      }
    } catch (const json::exception& e) {
      fail(ewhere, e.what());
    }
    ds.entities.push_back(std::move(track));
  }
  return ds;
}

std::string encode_tracking_canonical(const TrackingDataset& dataset) {
  json entities = json::array();
  for (const auto& e : dataset.entities) {
    json samples = json::array();
    for (const auto& [frame, s] : e.samples) {
      json js = {{"frame", frame}, {"bbox", {s.bbox.x, s.bbox.y, s.bbox.w, s.bbox.h}}, {"conf", s.confidence}};
      if (s.interpolated) js["interpolated"] = true;
      if (s.keypoints) {
        json kp = json::array();
        for (const auto& p : *s.keypoints) kp.push_back(p ? json::array({p->x, p->y}) : json());
        js["keypoints"] = kp;
      }
      samples.push_back(std::move(js));
    }
    entities.push_back({{"id", e.entity_id}, {"samples", std::move(samples)}});
  }
  json doc = {{"meta", meta_to_json(dataset.meta)}, {"sport", to_string(dataset.sport)}, {"entities", entities}};
  return doc.dump(1);
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    std::string_view field = line.substr(begin, comma == std::string_view::npos ? std::string_view::npos : comma - begin);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, const std::string& where, const char* name) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(where, std::string("field '") + name + "' is not numeric: '" + std::string(field) + "'");
  }
  return v;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

TrackingDataset parse_tracking_mot_csv(std::string_view text, const VideoMeta& meta, Sport sport) {
  TrackingDataset ds;
  ds.meta = meta;
  ds.sport = sport;
  std::map<std::string, std::size_t> index_of;

  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t nl = text.find('\n', begin);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(begin, nl - begin);
    begin = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const std::string where = "line " + std::to_string(line_no);
    const auto fields = split_csv(line);
    if (fields.size() < 7) fail(where, "expected frame,id,x,y,w,h,conf");
    const double frame1 = parse_number(fields[0], where, "frame");
    if (frame1 != std::floor(frame1)) fail(where, "frame must be an integer");
    if (frame1 < 1) fail(where, "MOT frames are 1-based, got " + std::string(fields[0]));
    const double id = parse_number(fields[1], where, "id");
    TrackSample sample;
    sample.bbox = {parse_number(fields[2], where, "x"), parse_number(fields[3], where, "y"),
                   parse_number(fields[4], where, "w"), parse_number(fields[5], where, "h")};
    sample.confidence = parse_number(fields[6], where, "conf");
    const auto frame = static_cast<std::int64_t>(frame1) - 1;
    check_sample(meta, frame, sample.bbox, where);

    const std::string entity_id = id == std::floor(id) ? std::to_string(static_cast<long long>(id))
                                                       : std::string(fields[1]);
    auto [it, inserted] = index_of.emplace(entity_id, ds.entities.size());
    if (inserted) ds.entities.push_back(EntityTrack{entity_id, {}});
    auto& track = ds.entities[it->second];
    if (!track.samples.emplace(frame, sample).second) {
      fail(where, "duplicate sample for entity '" + entity_id + "' at frame " + std::to_string(frame));
    }
  }
  return ds;
}

std::string encode_tracking_mot_csv(const TrackingDataset& dataset) {
  // MOT rows are frame-major.
  std::vector<std::tuple<std::int64_t, std::size_t, const TrackSample*>> rows;
  for (std::size_t i = 0; i < dataset.entities.size(); ++i) {
    for (const auto& [frame, s] : dataset.entities[i].samples) rows.emplace_back(frame, i, &s);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
  std::string out;
  for (const auto& [frame, i, s] : rows) {
    out += std::to_string(frame + 1) + "," + dataset.entities[i].entity_id + "," + format_number(s->bbox.x) + "," +
           format_number(s->bbox.y) + "," + format_number(s->bbox.w) + "," + format_number(s->bbox.h) + "," +
           format_number(s->confidence) + "\n";
  }
  return out;
}

EntityTrack interpolate_gaps(const EntityTrack& track, std::int64_t max_gap) {
  if (max_gap < 0) throw Error(ErrorCode::kInvalidArgument, "max_gap must be non-negative");
  EntityTrack out = track;
  if (track.samples.size() < 2) return out;
  auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };

  for (auto it = track.samples.begin(), next = std::next(it); next != track.samples.end(); ++it, ++next) {
    const std::int64_t fa = it->first;
    const std::int64_t fb = next->first;
    const std::int64_t missing = fb - fa - 1;
    if (missing <= 0 || missing > max_gap) continue;
    const TrackSample& a = it->second;
    const TrackSample& b = next->second;
    for (std::int64_t f = fa + 1; f < fb; ++f) {
      const double t = static_cast<double>(f - fa) / static_cast<double>(fb - fa);
      TrackSample s;
      s.bbox = {lerp(a.bbox.x, b.bbox.x, t), lerp(a.bbox.y, b.bbox.y, t), lerp(a.bbox.w, b.bbox.w, t),
                lerp(a.bbox.h, b.bbox.h, t)};
      s.confidence = lerp(a.confidence, b.confidence, t);
      s.interpolated = true;
      if (a.keypoints && b.keypoints) {
        Keypoints kp;
        for (std::size_t p = 0; p < kKeypointCount; ++p) {
          const auto& pa = (*a.keypoints)[p];
          const auto& pb = (*b.keypoints)[p];
          if (pa && pb) kp[p] = Point{lerp(pa->x, pb->x, t), lerp(pa->y, pb->y, t)};
        }
        s.keypoints = kp;
      }
      out.samples.emplace(f, s);
    }
  }
  return out;
}

TrackingDataset interpolate_gaps(const TrackingDataset& dataset, std::int64_t max_gap) {
  TrackingDataset out = dataset;
  for (auto& e : out.entities) e = interpolate_gaps(e, max_gap);
  return out;
}

namespace {

std::optional<Point> midpoint(const Keypoints& kp, Keypoint a, Keypoint b) {
  const auto& pa = kp[static_cast<std::size_t>(a)];
  const auto& pb = kp[static_cast<std::size_t>(b)];
  if (!pa || !pb) return std::nullopt;
  return Point{(pa->x + pb->x) / 2.0, (pa->y + pb->y) / 2.0};
}

}  // namespace

std::optional<Point> resolve_anchor(const TrackingDataset& dataset, std::string_view entity_id,
                                    std::int64_t source_frame, Placement placement) {
  const EntityTrack* track = dataset.find(entity_id);
  if (track == nullptr) throw Error(ErrorCode::kNotFound, "unknown entity '" + std::string(entity_id) + "'");
  const TrackSample* s = track->sample_at(source_frame);
  if (s == nullptr) return std::nullopt;

  const BBox& b = s->bbox;
  if (s->keypoints) {
    const Keypoints& kp = *s->keypoints;
    std::optional<Point> p;
    switch (placement) {
      case Placement::kHead:
        p = midpoint(kp, Keypoint::kLeftEye, Keypoint::kRightEye);
        if (p) p->y -= 0.15 * b.h;
        break;
      case Placement::kWaist: p = midpoint(kp, Keypoint::kLeftHip, Keypoint::kRightHip); break;
      case Placement::kGround: p = midpoint(kp, Keypoint::kLeftAnkle, Keypoint::kRightAnkle); break;
    }
    if (p) return p;
  }
  switch (placement) {
    case Placement::kHead: return Point{b.x + b.w / 2.0, b.y};
    case Placement::kWaist: return Point{b.x + b.w / 2.0, b.y + b.h / 2.0};
    case Placement::kGround: return Point{b.x + b.w / 2.0, b.y + b.h};
  }
  return std::nullopt;
}

}  // namespace courtviz
