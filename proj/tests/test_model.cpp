#include <doctest.h>

#include <algorithm>

#include "courtviz/error.hpp"
#include "courtviz/model.hpp"
#include "journey.hpp"
#include "support.hpp"

using namespace courtviz;

namespace {

struct Fixture {
  synth::SceneSpec spec = testing::small_spec(20);
  synth::Scene scene = synth::generate_scene(spec, 1);
  Project project = synth::project_for_scene(spec);
};

bool names_field(const std::vector<std::string>& violations, const std::string& prefix) {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const std::string& v) { return v.rfind(prefix, 0) == 0; });
}

RenderObject circle_on(const std::string& entity) {
  RenderObject o;
  o.id = "c";
  o.kind = ObjectKind::kCircle;
  o.start_frame = 0;
  o.end_frame = 5;
  CircleParams p;
  p.anchor_entity = entity;
  o.params = p;
  return o;
}

}  // namespace

TEST_CASE("freshly imported project is valid") {
  Fixture f;
  CHECK(validate_project(f.project, f.scene.dataset).empty());
  CHECK(f.project.objects.size() == 2);
}

TEST_CASE("zero-length object span") {
  Fixture f;
  RenderObject o = circle_on("p1");
  o.end_frame = o.start_frame;
  f.project.objects.insert(f.project.objects.begin(), o);
  const auto v = validate_project(f.project, f.scene.dataset);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "objects[0].end_frame: must exceed start_frame");
}

TEST_CASE("anchor to an entity missing from the synth truth") {
  Fixture f;
  bool present = false;
  for (const auto& e : f.scene.dataset.entities) present |= e.entity_id == "99";
  REQUIRE_FALSE(present);
  f.project.objects.push_back(circle_on("99"));
  const auto v = validate_project(f.project, f.scene.dataset);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("unresolved anchor") != std::string::npos);
  CHECK(v[0].rfind("objects[2].params.anchor_entity", 0) == 0);
}

TEST_CASE("single-invariant mutations are each reported on their field") {
  Fixture f;
  const auto& ds = f.scene.dataset;

  auto with = [&](auto mutate) {
    Project p = f.project;
    mutate(p);
    return validate_project(p, ds);
  };

  CHECK(names_field(with([](Project& p) { p.objects.push_back(p.objects[0]); p.objects.back().id = "bg2"; }),
                    "objects"));
  CHECK(names_field(with([](Project& p) { p.objects.erase(p.objects.begin()); }), "objects"));
  CHECK(names_field(with([](Project& p) { p.objects[1].id = p.objects[0].id; }), "objects[1].id"));
  CHECK(names_field(with([](Project& p) { p.objects[0].end_frame = 5; }), "objects[0]"));
  CHECK(names_field(with([](Project& p) {
                      RenderObject o = circle_on("p1");
                      o.end_frame = 21;
                      p.objects.push_back(o);
                    }),
                    "objects[2].end_frame"));
  CHECK(names_field(with([](Project& p) {
                      RenderObject o = circle_on("p1");
                      o.layer = 30;
                      p.objects.push_back(o);
                    }),
                    "objects[2].layer"));
  CHECK(names_field(with([](Project& p) {
                      RenderObject o = circle_on("p1");
                      std::get<CircleParams>(o.params).fill_alpha = 1.5;
                      p.objects.push_back(o);
                    }),
                    "objects[2].params.fill_alpha"));
  CHECK(names_field(with([](Project& p) {
                      RenderObject o = circle_on("p1");
                      o.params = MarkerParams{};
                      p.objects.push_back(o);
                    }),
                    "objects[2].params"));
  CHECK(names_field(with([](Project& p) {
                      RenderObject o;
                      o.id = "z";
                      o.kind = ObjectKind::kZone;
                      o.layer = default_layer(ObjectKind::kZone);
                      ZoneParams zp;
                      zp.points = {{0, 0}, {10, 10}, {10, 0}, {0, 10}};  // bow tie
                      o.params = zp;
                      p.objects.push_back(o);
                    }),
                    "objects[2].params.points"));
  CHECK(names_field(with([](Project& p) {
                      RenderObject o;
                      o.id = "k";
                      o.kind = ObjectKind::kConnector;
                      o.layer = default_layer(ObjectKind::kConnector);
                      ConnectorParams cp;
                      cp.anchor_entities = {"p1", "p1"};
                      o.params = cp;
                      p.objects.push_back(o);
                    }),
                    "objects[2].params.anchor_entities"));
  CHECK(names_field(with([](Project& p) {
                      RenderObject o;
                      o.id = "zoom";
                      o.kind = ObjectKind::kZoomIn;
                      o.layer = default_layer(ObjectKind::kZoomIn);
                      ZoomInParams zp;
                      zp.target = Anchor::fixed({10, 10});
                      zp.factor = 5.0;
                      o.params = zp;
                      p.objects.push_back(o);
                    }),
                    "objects[2].params.factor"));
  CHECK(names_field(with([](Project& p) {
                      RenderObject o;
                      o.id = "t";
                      o.kind = ObjectKind::kText;
                      o.layer = default_layer(ObjectKind::kText);
                      TextParams tp;
                      tp.target = Anchor::fixed({100, 10});
                      o.params = tp;
                      p.objects.push_back(o);
                    }),
                    "objects[2].params.target.point"));
  CHECK(names_field(with([](Project& p) {
                      p.captions.push_back({"a", 0, 5, {}});
                      p.captions.push_back({"b", 4, 8, {}});
                    }),
                    "captions[1]"));
  CHECK(names_field(with([](Project& p) { p.homography = Homography({1, 2, 0, 2, 4, 0, 0, 0, 1}); }),
                    "homography"));
  CHECK(names_field(with([](Project& p) { p.meta.width = 63; }), "meta"));
}

TEST_CASE("encode/decode round trip on the user journey") {
  const auto spec = testing::journey_spec(64, 36, 40);
  const auto scene = synth::generate_scene(spec, 9);
  const Project p = testing::journey_project(spec, scene);
  CHECK(p.objects.size() == 11);
  CHECK_FALSE(p.captions.empty());
  CHECK(decode_project(encode_project(p)) == p);
}

TEST_CASE("unknown fields survive a round trip") {
  Fixture f;
  nlohmann::json doc = to_json(f.project);
  doc["future_top"] = {{"a", 1}};
  doc["objects"][0]["future_object_field"] = "keep";
  const Project p = decode_project(doc.dump());
  const nlohmann::json again = nlohmann::json::parse(encode_project(p));
  CHECK(again["future_top"] == doc["future_top"]);
  CHECK(again["objects"][0]["future_object_field"] == "keep");
}

TEST_CASE("decode failures") {
  Fixture f;
  nlohmann::json doc = to_json(f.project);
  doc["schema_version"] = 9999;
  try {
    decode_project(doc.dump());
    FAIL("expected unsupported version");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedVersion);
  }

  const std::string text = encode_project(f.project);
  const std::string half = text.substr(0, text.size() / 2);
  try {
    decode_project(half);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    // The parser stops at the end of the truncated input.
    CHECK(std::string(e.what()).find("byte " + std::to_string(half.size() + 1)) != std::string::npos);
  }

  doc = to_json(f.project);
  doc.erase("meta");
  CHECK_THROWS_AS(decode_project(doc.dump()), Error);
}
