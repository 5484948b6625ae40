#include <doctest.h>

#include <random>

#include "courtviz/error.hpp"
#include "courtviz/session.hpp"
#include "courtviz/synth.hpp"
#include "random_commands.hpp"
#include "support.hpp"

using namespace courtviz;

namespace {

struct Fixture {
  synth::SceneSpec spec;
  std::shared_ptr<const TrackingDataset> dataset;
  Project baseline;

  Fixture() {
    spec = testing::small_spec(150);
    spec.entities[0].velocity = {0.2, 0};
    spec.entities[1].velocity = {-0.2, 0.05};
    dataset = std::make_shared<const TrackingDataset>(synth::generate_scene(spec, 6).dataset);
    baseline = synth::project_for_scene(spec);
  }
};

Command add_circle(std::string entity, std::int64_t start, std::int64_t end) {
  RenderObject o;
  o.kind = ObjectKind::kCircle;
  o.layer = default_layer(o.kind);
  o.start_frame = start;
  o.end_frame = end;
  CircleParams c;
  c.anchor_entity = std::move(entity);
  o.params = c;
  return {0, AddObject{o}};
}

/// Applies up to `count` accepted commands drawn at random.
std::vector<Command> random_run(Session& s, std::mt19937_64& rng, int count) {
  std::vector<Command> applied;
  for (int tries = 0; tries < 20 * count && static_cast<int>(applied.size()) < count; ++tries) {
    try {
      applied.push_back(s.apply(testing::random_command(rng, s.project(), {"p1", "p2"})));
    } catch (const CommandRejected&) {
    }
  }
  return applied;
}

}  // namespace

TEST_CASE("add, undo, redo and reset") {
  Fixture f;
  Session s(f.baseline, f.dataset);
  const Command c = s.apply(add_circle("p1", 30, 120));
  CHECK(c.id == 1);
  const RenderObject* o = s.project().find_object("circle-1");
  REQUIRE(o != nullptr);
  CHECK(o->start_frame == 30);
  CHECK(o->end_frame == 120);
  const Project after = s.project();

  CHECK(s.undo());
  CHECK(s.project() == f.baseline);
  CHECK_FALSE(s.undo());
  CHECK(s.redo());
  CHECK(s.project() == after);
  CHECK_FALSE(s.redo());

  s.apply({0, InsertFreeze{50, 10}});
  s.reset();
  CHECK(s.project() == f.baseline);
  CHECK(s.undo_depth() == 0);
  CHECK(s.redo_depth() == 0);
}

TEST_CASE("rejected commands leave the session untouched") {
  Fixture f;
  Session s(f.baseline, f.dataset);
  s.apply(add_circle("p2", 0, 10));
  const Project before = s.project();
  const auto rev = s.revision();
  CHECK_THROWS_AS(s.apply({0, SetSpeed{7, Rational(2)}}), CommandRejected);
  try {
    s.apply(add_circle("99", 0, 10));
    FAIL("expected rejection");
  } catch (const CommandRejected& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].find("unresolved anchor") != std::string::npos);
  }
  // Shrinking the clip under an object's span is refused.
  s.apply(add_circle("p1", 100, 150));
  CHECK_THROWS_AS(s.apply({0, SetSpeed{0, Rational(2)}}), CommandRejected);
  s.undo();
  CHECK(s.project() == before);
  CHECK(s.revision() == rev + 2);
  CHECK(s.undo_depth() == 1);
}

TEST_CASE("timeline commands keep base layers spanning the clip") {
  Fixture f;
  Session s(f.baseline, f.dataset);
  s.apply({0, InsertFreeze{40, 20}});
  CHECK(output_duration(s.project().timeline) == 170);
  for (const auto& o : s.project().objects) CHECK(o.end_frame == 170);
  s.apply({0, SplitAt{100}});
  s.apply({0, SetSpeed{2, Rational(1, 2)}});
  CHECK(validate_project(s.project(), *f.dataset).empty());
  s.apply(add_circle("p1", 10, 20));
  s.apply({0, RippleObjects{5, 7}});
  CHECK(s.project().find_object("circle-4")->start_frame == 17);
}

TEST_CASE("replaying the log reproduces random sessions; full undo and redo are total") {
  Fixture f;
  std::mt19937_64 rng(11);
  for (int round = 0; round < 15; ++round) {
    Session s(f.baseline, f.dataset);
    const auto applied = random_run(s, rng, 20);
    CHECK(applied.size() == 20);
    const Project final_state = s.project();

    Session replay(f.baseline, f.dataset);
    for (const auto& c : s.command_log()) replay.apply(c);
    CHECK(encode_project(replay.project()) == encode_project(final_state));

    s.undo();
    s.redo();
    CHECK(s.project() == final_state);

    while (s.undo()) {}
    CHECK(s.project() == f.baseline);
    while (s.redo()) {}
    CHECK(s.project() == final_state);
  }
}

TEST_CASE("save and load") {
  Fixture f;
  testing::TempDir dir;
  std::mt19937_64 rng(5);
  Session s(f.baseline, f.dataset);
  random_run(s, rng, 12);
  s.undo();
  s.undo();
  const auto path = dir.path() / "session.json";
  s.save(path);

  Session loaded = Session::load(path, f.dataset);
  CHECK(loaded.project() == s.project());
  CHECK(loaded.baseline() == s.baseline());
  CHECK(loaded.undo_depth() == s.undo_depth());
  CHECK(loaded.redo_depth() == s.redo_depth());
  CHECK(loaded.command_log() == s.command_log());
  loaded.undo();
  s.undo();
  CHECK(loaded.project() == s.project());
  loaded.redo();
  loaded.redo();
  s.redo();
  s.redo();
  CHECK(loaded.project() == s.project());
  // New commands continue the id sequence.
  CHECK(loaded.apply(add_circle("p1", 0, 5)).id == s.apply(add_circle("p1", 0, 5)).id);
}

TEST_CASE("corrupted session logs name the offending command") {
  Fixture f;
  std::mt19937_64 rng(9);
  Session s(f.baseline, f.dataset);
  random_run(s, rng, 8);
  const nlohmann::json doc = s.to_json();
  const auto last_id = doc["command_log"].back()["id"].get<std::int64_t>();

  nlohmann::json truncated = doc;
  truncated["command_log"].erase(truncated["command_log"].size() - 1);
  try {
    Session::from_json(truncated, f.dataset);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("command " + std::to_string(last_id) + ":", 0) == 0);
  }

  nlohmann::json garbled = doc;
  const auto id2 = garbled["command_log"][2]["id"].get<std::int64_t>();
  garbled["command_log"][2]["payload"] = "oops";
  try {
    Session::from_json(garbled, f.dataset);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("command " + std::to_string(id2) + ":", 0) == 0);
  }

  nlohmann::json reordered = doc;
  std::swap(reordered["command_log"][0]["id"], reordered["command_log"][1]["id"]);
  CHECK_THROWS_AS(Session::from_json(reordered, f.dataset), Error);
}

TEST_CASE("command JSON round trip") {
  Fixture f;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    Command c = testing::random_command(rng, f.baseline, {"p1", "p2"});
    c.id = i;
    CHECK(command_from_json(to_json(c)) == c);
  }
  CHECK_THROWS_AS(command_from_json(nlohmann::json{{"kind", "Explode"}, {"payload", nlohmann::json::object()}}), Error);
}
