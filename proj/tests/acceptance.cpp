// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "courtviz/export.hpp"
#include "courtviz/session.hpp"
#include "journey.hpp"
#include "random_commands.hpp"
#include "random_scene.hpp"
#include "service_fixture.hpp"
#include "timeline_oracle.hpp"

using namespace courtviz;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

RenderObject make(std::string id, ObjectKind kind, std::int64_t end, EffectParams params) {
  RenderObject o;
  o.id = std::move(id);
  o.kind = kind;
  o.start_frame = 0;
  o.end_frame = end;
  o.layer = default_layer(kind);
  o.params = std::move(params);
  return o;
}

Outcome latency() {
  const auto t0 = Clock::now();
  synth::SceneSpec spec;
  spec.width = 1920;
  spec.height = 1080;
  spec.frame_count = 38;
  for (int i = 0; i < 6; ++i) {
    spec.entities.push_back({"p" + std::to_string(i + 1),
                             {200.0 + 260.0 * i, 420.0 + 40.0 * (i % 3)},
                             {i % 2 == 0 ? 3.0 : -3.0, 1.0},
                             90,
                             220,
                             std::nullopt});
  }
  const auto scene = synth::generate_scene(spec, 99);
  Project p = synth::project_for_scene(spec);
  // Each source frame is shown eight times, so 38 decoded frames cover the run.
  p.timeline = set_speed(p.timeline, 0, Rational(1, 8));
  sync_base_layers(p);
  const std::int64_t n_out = output_duration(p.timeline);
  const std::int64_t measured = 300;

  CircleParams c1;
  c1.anchor_entity = "p1";
  c1.fill_alpha = 0.25;
  CircleParams c2;
  c2.anchor_entity = "p2";
  SpotlightParams spot;
  spot.anchor_entity = "p3";
  ConnectorParams conn;
  conn.anchor_entities = {"p4", "p5", "p6"};
  PathParams path;
  path.points = {{300, 950}, {700, 700}, {1200, 820}, {1650, 620}};
  path.width = 8;
  path.dashed = true;
  ZoneParams zone;
  zone.points = {{1300, 700}, {1750, 720}, {1800, 1000}, {1250, 1020}};
  TextParams text;
  text.content = "Score!";
  text.target = Anchor::entity("p1", Placement::kHead);
  text.font_px = 32;
  p.objects.push_back(make("circle-a", ObjectKind::kCircle, n_out, c1));
  p.objects.push_back(make("circle-b", ObjectKind::kCircle, n_out, c2));
  p.objects.push_back(make("spot", ObjectKind::kSpotlight, n_out, spot));
  p.objects.push_back(make("conn", ObjectKind::kConnector, n_out, conn));
  p.objects.push_back(make("path", ObjectKind::kPath, n_out, path));
  p.objects.push_back(make("zone", ObjectKind::kZone, n_out, zone));
  p.objects.push_back(make("mark-o", ObjectKind::kMarker, n_out, MarkerParams{MarkerSymbol::kO, {500, 900}, {255, 255, 255, 255}, 40}));
  p.objects.push_back(make("mark-x", ObjectKind::kMarker, n_out, MarkerParams{MarkerSymbol::kX, {900, 950}, {255, 60, 60, 255}, 40}));
  p.objects.push_back(make("text", ObjectKind::kText, n_out, text));
  p.objects.push_back(make("filter", ObjectKind::kBgFilter, n_out, BgFilterParams{}));
  if (!validate_project(p, scene.dataset).empty()) return {false, "benchmark project invalid"};

  std::vector<double> ms;
  std::size_t sink = 0;
  for (std::int64_t n = 0; n < measured; ++n) {
    const FramePlan plan = plan_frame(p, scene.dataset, n);
    if (plan.draws.size() != 9 || !plan.bg_filter) return {false, fmt("frame %lld: expected 10 active objects", static_cast<long long>(n))};
    const auto s = static_cast<std::size_t>(plan.source.source_frame);
    const auto r0 = Clock::now();
    const Canvas out = render_frame(plan, scene.frames[s], scene.masks[s]);
    ms.push_back(seconds_since(r0) * 1000.0);
    sink += out.data[static_cast<std::size_t>(n) % out.data.size()];
  }
  std::sort(ms.begin(), ms.end());
  const double median = ms[ms.size() / 2];
  const double p99 = ms[static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(ms.size()))) - 1];
  const double total = seconds_since(t0);
  const bool within = median < 10.0 && p99 < 16.7;
  const bool hard_ok = median < 20.0 && p99 < 33.4 && total < 60.0;
  std::string detail = fmt("1920x1080, 10 objects, %zu frames: median %.2f ms, p99 %.2f ms, run %.1f s", ms.size(),
                           median, p99, total);
  if (!within && hard_ok) detail += " (over budget, under the 2x hard limit)";
  (void)sink;
  return {hard_ok, detail};
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  int scenes = 0;
  int frames = 0;
  int mismatches = 0;
  for (; scenes < 500; ++scenes) {
    const auto rs = testing::random_scene(rng);
    if (!validate_project(rs.project, rs.scene.dataset).empty()) return {false, fmt("scene %d invalid", scenes)};
    for (std::int64_t n = 0; n < 8; ++n) {
      const FramePlan plan = plan_frame(rs.project, rs.scene.dataset, n, {rs.project.export_settings.burn_in});
      const auto s = static_cast<std::size_t>(plan.source.source_frame);
      mismatches += render_frame(plan, rs.scene.frames[s], rs.scene.masks[s]) !=
                    synth::reference_render(plan, rs.scene.frames[s], rs.scene.masks[s]);
      ++frames;
    }
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 120.0,
          fmt("%d scenes, %d frames, %d mismatches, %.1f s", scenes, frames, mismatches, t)};
}

Outcome timeline_properties() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4242);
  int sequences = 0;
  int edits_total = 0;
  for (; sequences < 1000; ++sequences) {
    const auto frames = 1 + static_cast<std::int64_t>(rng() % 300);
    Timeline tl = Timeline::identity(frames);
    testing::OracleTimeline oracle(frames);
    const int edits = 1 + static_cast<int>(rng() % 10);
    for (int e = 0; e < edits; ++e, ++edits_total) {
      const auto step = testing::random_edit(rng, tl, oracle);
      if (!step.ok) return {false, fmt("sequence %d edit %d: %s", sequences, e, step.what.c_str())};
      const auto cmp = testing::compare(tl, oracle);
      if (!cmp.ok) return {false, fmt("sequence %d edit %d: %s", sequences, e, cmp.what.c_str())};
      if (!timeline_violations(tl, frames).empty()) return {false, fmt("sequence %d: invalid timeline", sequences)};
    }
  }
  const double t = seconds_since(t0);
  return {t < 60.0, fmt("%d sequences, %d edits, 0 mismatches, %.1f s", sequences, edits_total, t)};
}

Outcome undo_totality() {
  const auto t0 = Clock::now();
  auto spec = testing::small_spec(150);
  spec.entities[0].velocity = {0.2, 0};
  spec.entities[1].velocity = {-0.2, 0.05};
  const auto dataset = std::make_shared<const TrackingDataset>(synth::generate_scene(spec, 6).dataset);
  const Project baseline = synth::project_for_scene(spec);
  std::mt19937_64 rng(777);
  int sequences = 0;
  std::size_t commands = 0;
  for (; sequences < 200; ++sequences) {
    Session s(baseline, dataset);
    const int target = 1 + static_cast<int>(rng() % 20);
    int applied = 0;
    for (int tries = 0; tries < 400 && applied < target; ++tries) {
      try {
        s.apply(testing::random_command(rng, s.project(), {"p1", "p2"}));
        ++applied;
      } catch (const CommandRejected&) {
      }
    }
    commands += static_cast<std::size_t>(applied);
    const Project final_state = s.project();
    while (s.undo()) {}
    if (!(s.project() == baseline)) return {false, fmt("sequence %d: undo-all differs from baseline", sequences)};
    while (s.redo()) {}
    if (!(s.project() == final_state)) return {false, fmt("sequence %d: redo-all differs from final", sequences)};
  }
  const double t = seconds_since(t0);
  return {t < 60.0, fmt("%d sequences, %zu commands, all deep-equal, %.1f s", sequences, commands, t)};
}

Outcome homography() {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> small(-0.2, 0.2);
  std::uniform_real_distribution<double> tiny(-5e-4, 5e-4);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  std::uniform_real_distribution<double> coord(-500.0, 500.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Homography h({1.0 + small(rng), small(rng), shift(rng), small(rng), 1.0 + small(rng), shift(rng), tiny(rng),
                        tiny(rng), 1.0});
    const Homography inv = inverse(h);
    for (int k = 0; k < 10; ++k) {
      const Point p{coord(rng), coord(rng)};
      const Point a = apply(inv, apply(h, p));
      const Point b = apply(h, apply(inv, p));
      worst = std::max({worst, std::abs(a.x - p.x), std::abs(a.y - p.y), std::abs(b.x - p.x), std::abs(b.y - p.y)});
    }
  }
  double corner = 0.0;
  for (const auto& [w, h] : {std::pair{1920.0, 1080.0}, std::pair{640.0, 360.0}, std::pair{64.0, 36.0}}) {
    const Homography g = default_ground_homography(static_cast<int>(w), static_cast<int>(h));
    const std::pair<Point, Point> pairs[] = {{{0, 0}, {0.2 * w, 0.55 * h}},
                                             {{1, 0}, {0.8 * w, 0.55 * h}},
                                             {{0, 1}, {0, h}},
                                             {{1, 1}, {w, h}}};
    for (const auto& [unit, screen] : pairs) corner = std::max(corner, distance(apply(g, unit), screen));
  }
  return {worst < 1e-9 && corner < 1e-6,
          fmt("1000 matrices x 10 points, max round-trip error %.2e; default ground corners max error %.2e px", worst,
              corner)};
}

Outcome export_determinism() {
  testing::TempDir dir;
  const auto spec = testing::journey_spec(640, 360, 240);
  const auto scene = synth::generate_scene(spec, 2025);
  synth::write_scene(scene, dir.path());
  const Project p = testing::journey_project(spec, scene);
  const Assets assets = load_assets(p, dir.path());
  const std::int64_t duration = output_duration(p.timeline);

  std::vector<ExportManifest> runs;
  double slowest = 0.0;
  for (int workers : {0, 3}) {
    ExportOptions options;
    options.workers = workers;
    options.burn_in = true;
    const auto t0 = Clock::now();
    runs.push_back(export_frames(p, assets, dir.path() / ("run" + std::to_string(workers)), options));
    slowest = std::max(slowest, seconds_since(t0));
  }
  const bool same = runs[0].run_digest == runs[1].run_digest && runs[0].frames == runs[1].frames;
  int preview_mismatch = 0;
  for (std::int64_t n = 0; n < duration; ++n) {
    const Canvas c = render_output_frame(p, assets, n, {true});
    preview_mismatch += sha256_hex(std::span<const std::uint8_t>(c.data)) !=
                        runs[0].frames[static_cast<std::size_t>(n)].digest;
  }
  return {same && preview_mismatch == 0 && duration == 300 && slowest < 30.0,
          fmt("journey %lld frames 640x360, digests %s, %d preview mismatches, slowest export %.1f s",
              static_cast<long long>(duration), same ? "identical" : "DIFFER", preview_mismatch, slowest)};
}

Outcome ingest() {
  auto spec = testing::journey_spec(640, 360, 120);
  for (std::size_t i = 0; i < spec.entities.size(); ++i) spec.entities[i].id = std::to_string(i + 1);
  const auto scene = synth::generate_scene(spec, 31);
  const auto canonical = parse_tracking_canonical(encode_tracking_canonical(scene.dataset));
  const auto mot = parse_tracking_mot_csv(encode_tracking_mot_csv(scene.dataset), spec.meta(), spec.sport);
  const bool parsers = canonical == scene.dataset && mot == scene.dataset;

  // Integer fixtures: every gap length divides the endpoint differences, so
  // the linear oracle is exact.
  std::mt19937_64 rng(8);
  int checked = 0;
  int wrong = 0;
  for (int trial = 0; trial < 200; ++trial) {
    EntityTrack t;
    t.entity_id = "e";
    std::int64_t f = 0;
    BBox box{static_cast<double>(rng() % 100), static_cast<double>(rng() % 100), 10, 20};
    t.samples[f] = {box, 1.0, std::nullopt, false};
    for (int k = 0; k < 6; ++k) {
      const std::int64_t gap = 1 + static_cast<std::int64_t>(rng() % 7);
      const BBox next{box.x + static_cast<double>(gap) * static_cast<double>(static_cast<int>(rng() % 7) - 3),
                      box.y + static_cast<double>(gap) * static_cast<double>(static_cast<int>(rng() % 5) - 2),
                      box.w + static_cast<double>(gap) * static_cast<double>(rng() % 3),
                      box.h + static_cast<double>(gap) * static_cast<double>(rng() % 3)};
      t.samples[f + gap] = {next, 1.0, std::nullopt, false};
      f += gap;
      box = next;
    }
    const EntityTrack filled = interpolate_gaps(t, 5);
    for (auto it = t.samples.begin(); std::next(it) != t.samples.end(); ++it) {
      const auto& [f0, s0] = *it;
      const auto& [f1, s1] = *std::next(it);
      const std::int64_t gap = f1 - f0;
      for (std::int64_t g = f0 + 1; g < f1; ++g) {
        const TrackSample* s = filled.sample_at(g);
        if (gap - 1 > 5) {
          wrong += s != nullptr;
          continue;
        }
        ++checked;
        const std::int64_t k = g - f0;
        auto lerp = [&](double a, double b) { return a + (b - a) / static_cast<double>(gap) * static_cast<double>(k); };
        wrong += s == nullptr || s->bbox.x != lerp(s0.bbox.x, s1.bbox.x) || s->bbox.y != lerp(s0.bbox.y, s1.bbox.y) ||
                 s->bbox.w != lerp(s0.bbox.w, s1.bbox.w) || s->bbox.h != lerp(s0.bbox.h, s1.bbox.h) ||
                 !s->interpolated;
      }
    }
  }
  return {parsers && wrong == 0,
          fmt("MOT-CSV %s canonical on %zu tracks; %d interpolated samples, %d mismatches",
              parsers ? "==" : "!=", scene.dataset.entities.size(), checked, wrong)};
}

Outcome service() {
  auto spec = testing::small_spec(40);
  spec.entities[0].velocity = {0.5, 0};
  spec.entities[1].velocity = {-0.5, 0.1};
  testing::LiveService svc(spec);
  const std::string id = svc.create_project();
  if (id.empty()) return {false, "project creation failed"};
  const std::string base = "/projects/" + id;
  const Project baseline = decode_project(svc.client().Get(base)->body);

  // Put some objects in the frames first, then compare every frame.
  std::mt19937_64 rng(55);
  int accepted = 0;
  for (int tries = 0; tries < 400 && accepted < 20; ++tries) {
    const Project now = decode_project(svc.client().Get(base)->body);
    auto res = svc.post(base + "/commands", to_json(testing::random_command(rng, now, {"p1", "p2"})));
    if (!res) return {false, "command request failed"};
    accepted += res->status == 200;
  }
  const Project edited = decode_project(svc.client().Get(base)->body);
  const Assets assets = load_assets(edited, svc.root());
  const std::int64_t duration = output_duration(edited.timeline);
  int frame_mismatch = 0;
  for (std::int64_t n = 0; n < duration; ++n) {
    auto res = svc.client().Get(base + "/frames/" + std::to_string(n));
    if (!res || res->status != 200) return {false, fmt("frame %lld request failed", static_cast<long long>(n))};
    const std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
    frame_mismatch += bytes != encode_png(render_output_frame(edited, assets, n));
  }
  for (int i = 0; i < accepted; ++i) svc.post(base + "/undo", nlohmann::json::object());
  const bool back = decode_project(svc.client().Get(base)->body) == baseline;
  return {accepted == 20 && frame_mismatch == 0 && back,
          fmt("%lld HTTP frames, %d byte mismatches; %d commands then %d undos %s baseline",
              static_cast<long long>(duration), frame_mismatch, accepted, accepted, back ? "==" : "!=")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"latency", latency},
      {"oracle-equivalence", oracle_equivalence},
      {"timeline-properties", timeline_properties},
      {"undo-totality", undo_totality},
      {"homography", homography},
      {"export-determinism", export_determinism},
      {"ingest", ingest},
      {"service-equivalence", service},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
