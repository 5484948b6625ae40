#include <doctest.h>

#include "courtviz/error.hpp"
#include "courtviz/synth.hpp"
#include "courtviz/tracking.hpp"
#include "support.hpp"

using namespace courtviz;

namespace {

const VideoMeta kMeta{640, 360, Rational(30), 100};

std::string error_message(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

EntityTrack track_with(std::initializer_list<std::pair<std::int64_t, BBox>> samples) {
  EntityTrack t{"e", {}};
  for (const auto& [f, b] : samples) t.samples.emplace(f, TrackSample{b, 1.0, std::nullopt, false});
  return t;
}

}  // namespace

TEST_CASE("canonical: empty entity list") {
  const auto ds = parse_tracking_canonical(
      R"({"meta":{"width":64,"height":36,"fps":[30,1],"frame_count":10},"sport":"soccer","entities":[]})");
  CHECK(ds.entities.empty());
  CHECK(ds.sport == Sport::kSoccer);
  CHECK(ds.meta.frame_count == 10);
}

TEST_CASE("canonical: invalid records name their location") {
  const std::string zero_w =
      R"({"meta":{"width":64,"height":36,"fps":[30,1],"frame_count":10},"entities":[{"id":"a","samples":[)"
      R"({"frame":0,"bbox":[1,1,5,5],"conf":1},{"frame":1,"bbox":[1,1,0,5],"conf":1}]}]})";
  const std::string msg = error_message([&] { parse_tracking_canonical(zero_w); });
  CHECK(msg.find("entities[0].samples[1]") != std::string::npos);

  const std::string dup =
      R"({"meta":{"width":64,"height":36,"fps":[30,1],"frame_count":10},"entities":[{"id":"a","samples":[)"
      R"({"frame":2,"bbox":[1,1,5,5]},{"frame":2,"bbox":[1,1,5,5]}]}]})";
  CHECK(error_message([&] { parse_tracking_canonical(dup); }).find("duplicate") != std::string::npos);

  const std::string outside =
      R"({"meta":{"width":64,"height":36,"fps":[30,1],"frame_count":10},"entities":[{"id":"a","samples":[)"
      R"({"frame":0,"bbox":[60,1,10,5]}]}]})";
  CHECK_THROWS_AS(parse_tracking_canonical(outside), Error);

  const std::string bad_frame =
      R"({"meta":{"width":64,"height":36,"fps":[30,1],"frame_count":10},"entities":[{"id":"a","samples":[)"
      R"({"frame":10,"bbox":[1,1,5,5]}]}]})";
  CHECK_THROWS_AS(parse_tracking_canonical(bad_frame), Error);

  const std::string msg2 = error_message([] { parse_tracking_canonical("{\n\"meta\": ,\n}"); });
  CHECK(msg2.find("line 2") != std::string::npos);
}

TEST_CASE("MOT: 1-based frames become 0-based") {
  const auto ds = parse_tracking_mot_csv("1,7,10,20,30,60,0.9\n", kMeta);
  REQUIRE(ds.entities.size() == 1);
  CHECK(ds.entities[0].entity_id == "7");
  const TrackSample* s = ds.entities[0].sample_at(0);
  REQUIRE(s != nullptr);
  CHECK(s->bbox == BBox{10, 20, 30, 60});
  CHECK(s->confidence == doctest::Approx(0.9));

  CHECK(parse_tracking_mot_csv("", kMeta).entities.empty());
  const std::string zero = error_message([] { parse_tracking_mot_csv("0,7,10,20,30,60,0.9\n", kMeta); });
  CHECK(zero.find("1-based") != std::string::npos);
  const std::string nan = error_message([] { parse_tracking_mot_csv("1,7,10,20,30,60,0.9\n2,7,x,20,30,60,1\n", kMeta); });
  CHECK(nan.find("line 2") != std::string::npos);
}

TEST_CASE("MOT and canonical parsers agree on synth truth") {
  auto spec = testing::small_spec(30);
  spec.entities[0].id = "1";
  spec.entities[1].id = "2";
  const auto scene = synth::generate_scene(spec, 5);
  const auto canonical = parse_tracking_canonical(encode_tracking_canonical(scene.dataset));
  const auto mot = parse_tracking_mot_csv(encode_tracking_mot_csv(scene.dataset), spec.meta(), spec.sport);
  CHECK(canonical == scene.dataset);
  CHECK(mot == scene.dataset);
}

TEST_CASE("canonical round trip keeps keypoints") {
  auto spec = testing::small_spec(5);
  spec.keypoints = true;
  const auto scene = synth::generate_scene(spec, 9);
  CHECK(parse_tracking_canonical(encode_tracking_canonical(scene.dataset)) == scene.dataset);
}

TEST_CASE("interpolate_gaps: linear fill on integer fixtures") {
  const EntityTrack t = track_with({{10, {0, 0, 10, 20}}, {14, {8, 4, 10, 20}}});
  const EntityTrack filled = interpolate_gaps(t, 5);
  REQUIRE(filled.samples.size() == 5);
  const double xs[] = {2, 4, 6};
  const double ys[] = {1, 2, 3};
  for (int k = 0; k < 3; ++k) {
    const TrackSample* s = filled.sample_at(11 + k);
    REQUIRE(s != nullptr);
    CHECK(s->bbox.x == xs[k]);
    CHECK(s->bbox.y == ys[k]);
    CHECK(s->bbox.w == 10);
    CHECK(s->bbox.h == 20);
    CHECK(s->interpolated);
  }
  CHECK(filled.samples.at(10) == t.samples.at(10));
  CHECK(filled.samples.at(14) == t.samples.at(14));
  CHECK(interpolate_gaps(filled, 5) == filled);

  const EntityTrack wide = track_with({{0, {0, 0, 10, 20}}, {9, {8, 4, 10, 20}}});
  CHECK(interpolate_gaps(wide, 5) == wide);
  const EntityTrack dense = track_with({{0, {0, 0, 10, 20}}, {1, {1, 0, 10, 20}}, {2, {2, 0, 10, 20}}});
  CHECK(interpolate_gaps(dense, 5) == dense);
  CHECK_THROWS_AS(interpolate_gaps(dense, -1), Error);
}

TEST_CASE("interpolate_gaps blends keypoints only when both ends have them") {
  EntityTrack t = track_with({{0, {0, 0, 10, 20}}, {2, {4, 0, 10, 20}}});
  Keypoints a;
  Keypoints b;
  a[0] = Point{0, 0};
  b[0] = Point{4, 8};
  t.samples.at(0).keypoints = a;
  t.samples.at(2).keypoints = b;
  const auto filled = interpolate_gaps(t, 3);
  const TrackSample* mid = filled.sample_at(1);
  REQUIRE(mid != nullptr);
  REQUIRE(mid->keypoints.has_value());
  CHECK((*mid->keypoints)[0] == Point{2, 4});
  CHECK_FALSE((*mid->keypoints)[1].has_value());

  t.samples.at(2).keypoints.reset();
  CHECK_FALSE(interpolate_gaps(t, 3).sample_at(1)->keypoints.has_value());
}

TEST_CASE("resolve_anchor: bbox and keypoint rules") {
  TrackingDataset ds;
  ds.meta = kMeta;
  ds.entities.push_back(track_with({{0, {100, 100, 50, 100}}}));
  CHECK(resolve_anchor(ds, "e", 0, Placement::kGround) == Point{125, 200});
  CHECK(resolve_anchor(ds, "e", 0, Placement::kWaist) == Point{125, 150});
  CHECK(resolve_anchor(ds, "e", 0, Placement::kHead) == Point{125, 100});
  CHECK_FALSE(resolve_anchor(ds, "e", 1, Placement::kGround).has_value());
  CHECK_THROWS_AS(resolve_anchor(ds, "nobody", 0, Placement::kGround), Error);

  Keypoints kp;
  kp[static_cast<std::size_t>(Keypoint::kLeftEye)] = Point{120, 110};
  kp[static_cast<std::size_t>(Keypoint::kRightEye)] = Point{130, 112};
  kp[static_cast<std::size_t>(Keypoint::kLeftHip)] = Point{118, 150};
  kp[static_cast<std::size_t>(Keypoint::kRightHip)] = Point{134, 154};
  kp[static_cast<std::size_t>(Keypoint::kLeftAnkle)] = Point{115, 196};
  kp[static_cast<std::size_t>(Keypoint::kRightAnkle)] = Point{135, 198};
  ds.entities[0].samples.at(0).keypoints = kp;
  const auto head = resolve_anchor(ds, "e", 0, Placement::kHead);
  CHECK(head->x == doctest::Approx(125));
  CHECK(head->y == doctest::Approx(111 - 0.15 * 100));
  CHECK(resolve_anchor(ds, "e", 0, Placement::kWaist) == Point{126, 152});
  CHECK(resolve_anchor(ds, "e", 0, Placement::kGround) == Point{125, 197});
}
