#include <doctest.h>

#include "courtviz/error.hpp"
#include "courtviz/synth.hpp"
#include "support.hpp"

using namespace courtviz;

TEST_CASE("scripted motion lands where the script says") {
  synth::SceneSpec spec;
  spec.width = 320;
  spec.height = 240;
  spec.frame_count = 20;
  spec.entities = {{"a", {100, 100}, {2, 0}, 20, 40, std::nullopt}};
  const auto scene = synth::generate_scene(spec, 1);
  const TrackSample* s = scene.dataset.find("a")->sample_at(10);
  REQUIRE(s != nullptr);
  CHECK(s->bbox.x == 120);
  CHECK(s->bbox.y == 100);
  CHECK(s->bbox.w == 20);
  CHECK(s->bbox.h == 40);
}

TEST_CASE("same seed and spec give identical bytes") {
  const auto spec = testing::small_spec(6);
  const auto a = synth::generate_scene(spec, 42);
  const auto b = synth::generate_scene(spec, 42);
  const auto c = synth::generate_scene(spec, 43);
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(sha256_hex(std::span<const std::uint8_t>(a.frames[i].data)) ==
          sha256_hex(std::span<const std::uint8_t>(b.frames[i].data)));
    CHECK(a.masks[i] == b.masks[i]);
  }
  CHECK(a.dataset == b.dataset);
  CHECK(a.frames[0] != c.frames[0]);
}

TEST_CASE("an entity leaving the frame is an error") {
  auto spec = testing::small_spec(100);
  try {
    synth::generate_scene(spec, 1);
    FAIL("expected out of bounds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("mask foreground equals the union of tracking boxes") {
  const auto spec = testing::small_spec(10);
  const auto scene = synth::generate_scene(spec, 3);
  for (std::int64_t f = 0; f < 10; ++f) {
    const auto& mask = scene.masks[static_cast<std::size_t>(f)];
    const auto& frame = scene.frames[static_cast<std::size_t>(f)];
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        bool inside = false;
        for (const auto& e : scene.dataset.entities) {
          const TrackSample* s = e.sample_at(f);
          inside |= s && x >= s->bbox.x && x < s->bbox.x + s->bbox.w && y >= s->bbox.y && y < s->bbox.y + s->bbox.h;
        }
        CHECK(mask.pixel(x, y)[0] == (inside ? 255 : 0));
      }
    }
    // Rectangles are solid in the entity color.
    const TrackSample* s = scene.dataset.find("p1")->sample_at(f);
    const auto* corner = frame.pixel(static_cast<int>(s->bbox.x), static_cast<int>(s->bbox.y));
    const auto* far = frame.pixel(static_cast<int>(s->bbox.x + s->bbox.w - 1), static_cast<int>(s->bbox.y + s->bbox.h - 1));
    CHECK(std::equal(corner, corner + 3, far));
  }
}

TEST_CASE("written scenes round-trip through the ingest formats") {
  testing::TempDir dir;
  auto spec = testing::small_spec(5);
  spec.keypoints = true;
  const auto scene = synth::generate_scene(spec, 7);
  synth::write_scene(scene, dir.path());
  CHECK(std::filesystem::exists(dir.path() / "video" / "frame_000004.png"));
  CHECK(std::filesystem::exists(dir.path() / "masks" / "mask_000004.png"));
  CHECK(parse_tracking_canonical(read_text_file(dir.path() / "tracking.json")) == scene.dataset);
  CHECK(synth::scene_spec_from_json(synth::to_json(spec)).entities.size() == 2);
  const auto again = synth::scene_spec_from_json(synth::to_json(spec));
  CHECK(synth::generate_scene(again, 7).frames == scene.frames);
}

TEST_CASE("reference renderer: identity and full tint") {
  const auto spec = testing::small_spec(2);
  const auto scene = synth::generate_scene(spec, 2);
  FramePlan plan;
  plan.width = 64;
  plan.height = 36;
  AlphaPlane full(64, 36, 1);
  std::fill(full.data.begin(), full.data.end(), 255);
  const Canvas same = synth::reference_render(plan, scene.frames[0], full);
  for (int y = 0; y < 36; ++y) {
    for (int x = 0; x < 64; ++x) CHECK(std::equal(same.pixel(x, y), same.pixel(x, y) + 3, scene.frames[0].pixel(x, y)));
  }
  plan.bg_filter = BgFilterState{to_paint({128, 128, 128, 255}), FilterMode::kTint};
  const Canvas gray = synth::reference_render(plan, scene.frames[0], AlphaPlane(64, 36, 1));
  for (std::size_t i = 0; i < gray.data.size(); i += 4) CHECK(gray.data[i + 1] == 128);
}

TEST_CASE("stub captioner") {
  auto spec = testing::small_spec(90);
  spec.entities[0].velocity = {0.3, 0};
  spec.entities[1].velocity = {-0.1, 0.05};
  spec.entities.push_back({"p3", {30, 20}, {0, 0}, 6, 10, std::nullopt});
  const auto scene = synth::generate_scene(spec, 4);
  const auto caps = synth::stub_captioner(scene.dataset, 30);
  REQUIRE(caps.size() == 3);
  CHECK(caps[0].start_frame == 0);
  CHECK(caps[0].end_frame == 30);
  CHECK(caps[2].end_frame == 90);
  for (const auto& c : caps) CHECK(c.text.rfind("3 players visible; fastest: ", 0) == 0);
  CHECK(synth::stub_captioner(scene.dataset, 30) == caps);

  TrackingDataset empty;
  empty.meta = spec.meta();
  const auto none = synth::stub_captioner(empty, 45);
  REQUIRE(none.size() == 2);
  CHECK(none[0].text == "0 players visible");
}
