#pragma once

#include <vector>

#include "courtviz/session.hpp"
#include "courtviz/synth.hpp"

namespace testing {

/// Five players drifting across a WxH court for `frames` source frames.
inline courtviz::synth::SceneSpec journey_spec(int width, int height, std::int64_t frames) {
  courtviz::synth::SceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.frame_count = frames;
  const double w = width;
  const double h = height;
  for (int i = 0; i < 5; ++i) {
    courtviz::synth::EntityScript e;
    e.id = "p" + std::to_string(i + 1);
    e.start = {(0.1 + 0.18 * i) * w, (0.35 + 0.08 * (i % 3)) * h};
    e.velocity = {(i % 2 == 0 ? 1.0 : -1.0) * 0.08 * w / static_cast<double>(frames),
                  0.05 * h / static_cast<double>(frames)};
    e.width = std::max(4, width / 20);
    e.height = std::max(8, height / 6);
    spec.entities.push_back(e);
  }
  return spec;
}

inline courtviz::Command journey_add(courtviz::ObjectKind kind, std::int64_t start, std::int64_t end,
                                     courtviz::EffectParams params) {
  courtviz::RenderObject o;
  o.kind = kind;
  o.start_frame = start;
  o.end_frame = end;
  o.layer = courtviz::default_layer(kind);
  o.params = std::move(params);
  return {0, courtviz::AddObject{std::move(o)}};
}

/// Spotlight, tactic path, two circles, a freeze with background filter and
/// two more spotlights, "Score!" text, then narrative captions.
inline std::vector<courtviz::Command> journey_commands(const courtviz::synth::SceneSpec& spec,
                                                       const courtviz::TrackingDataset& dataset) {
  using namespace courtviz;
  const std::int64_t n = spec.frame_count;
  const std::int64_t freeze_at = n / 2;
  const std::int64_t freeze_len = std::max<std::int64_t>(1, n / 4);
  const double w = spec.width;
  const double h = spec.height;

  std::vector<Command> cmds;
  SpotlightParams spot;
  spot.anchor_entity = "p1";
  cmds.push_back(journey_add(ObjectKind::kSpotlight, 0, n, spot));

  PathParams path;
  path.points = {{0.15 * w, 0.8 * h}, {0.4 * w, 0.6 * h}, {0.6 * w, 0.75 * h}, {0.85 * w, 0.5 * h}};
  path.width = std::max(2.0, w / 160);
  cmds.push_back(journey_add(ObjectKind::kPath, 0, n, path));

  for (const char* id : {"p2", "p3"}) {
    CircleParams circle;
    circle.anchor_entity = id;
    circle.fill_alpha = 0.2;
    cmds.push_back(journey_add(ObjectKind::kCircle, 0, n, circle));
  }

  cmds.push_back({0, InsertFreeze{freeze_at, freeze_len}});
  cmds.push_back(journey_add(ObjectKind::kFreezeFrame, freeze_at, freeze_at + freeze_len, FreezeFrameParams{}));
  BgFilterParams filter;
  filter.mode = FilterMode::kGrayscale;
  cmds.push_back(journey_add(ObjectKind::kBgFilter, freeze_at, freeze_at + freeze_len, filter));
  for (const char* id : {"p4", "p5"}) {
    SpotlightParams s;
    s.anchor_entity = id;
    cmds.push_back(journey_add(ObjectKind::kSpotlight, freeze_at, freeze_at + freeze_len, s));
  }

  TextParams text;
  text.content = "Score!";
  text.target = Anchor::entity("p1", Placement::kHead);
  text.font_px = std::max(8, spec.height / 20);
  cmds.push_back(journey_add(ObjectKind::kText, freeze_at + freeze_len, n + freeze_len, text));

  for (const auto& c : synth::stub_captioner(dataset)) cmds.push_back({0, AddCaption{c}});
  return cmds;
}

/// Baseline project plus the journey, applied through a session.
inline courtviz::Project journey_project(const courtviz::synth::SceneSpec& spec,
                                         const courtviz::synth::Scene& scene) {
  auto dataset = std::make_shared<const courtviz::TrackingDataset>(scene.dataset);
  courtviz::Session session(courtviz::synth::project_for_scene(spec), dataset);
  for (auto& c : journey_commands(spec, scene.dataset)) session.apply(c);
  return session.project();
}

}  // namespace testing
