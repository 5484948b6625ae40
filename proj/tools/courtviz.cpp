#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <json.hpp>

#include "courtviz/error.hpp"
#include "courtviz/export.hpp"
#include "courtviz/service.hpp"
#include "courtviz/synth.hpp"

using namespace courtviz;
using nlohmann::json;

namespace {

Project load_project(const std::string& path) { return decode_project(read_text_file(path)); }

std::optional<FrameRange> parse_range(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--range must look like a:b");
  try {
    return FrameRange{std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "--range must look like a:b");
  }
}

int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  return v == nullptr ? fallback : std::atoi(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"courtviz: sports highlight authoring engine"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic clip with tracking and mattes");
  std::string spec_path;
  std::uint64_t seed = 42;
  std::string synth_out;
  bool synth_y4m = false;
  synth_cmd->add_option("--spec", spec_path, "scene spec (JSON)")->required();
  synth_cmd->add_option("--seed", seed, "RNG seed");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_flag("--y4m", synth_y4m, "also write video.y4m");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "convert tracking data to the canonical format");
  std::string ingest_in;
  std::string ingest_out;
  std::string ingest_format = "auto";
  std::string sport = "basketball";
  int width = 0;
  int height = 0;
  std::int64_t frames = 0;
  int fps = 30;
  std::int64_t max_gap = kDefaultMaxGap;
  ingest_cmd->add_option("--tracking", ingest_in, "input file")->required();
  ingest_cmd->add_option("--out", ingest_out, "canonical output")->required();
  ingest_cmd->add_option("--format", ingest_format, "auto, canonical or mot");
  ingest_cmd->add_option("--width", width, "frame width (MOT input)");
  ingest_cmd->add_option("--height", height, "frame height (MOT input)");
  ingest_cmd->add_option("--frames", frames, "frame count (MOT input)");
  ingest_cmd->add_option("--fps", fps, "frame rate (MOT input)");
  ingest_cmd->add_option("--sport", sport, "sport (MOT input)");
  ingest_cmd->add_option("--max-gap", max_gap, "interpolate gaps up to this many frames");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check a project against its assets");
  std::string project_path;
  std::string assets_dir;
  validate_cmd->add_option("--project", project_path)->required();
  validate_cmd->add_option("--assets", assets_dir)->required();

  // render
  auto* render_cmd = app.add_subcommand("render", "render one output frame to PNG");
  std::int64_t frame = 0;
  std::string render_out;
  bool burn_in = false;
  render_cmd->add_option("--project", project_path)->required();
  render_cmd->add_option("--assets", assets_dir)->required();
  render_cmd->add_option("--frame", frame)->required();
  render_cmd->add_option("--out", render_out)->required();
  render_cmd->add_flag("--burn-in", burn_in);

  // captions
  auto* captions_cmd = app.add_subcommand("captions", "add stub captions sampled every N frames");
  std::int64_t every = synth::kDefaultCaptionInterval;
  std::string captions_out;
  captions_cmd->add_option("--project", project_path)->required();
  captions_cmd->add_option("--assets", assets_dir)->required();
  captions_cmd->add_option("--every", every);
  captions_cmd->add_option("--out", captions_out)->required();

  // export
  auto* export_cmd = app.add_subcommand("export", "render the whole timeline to disk");
  std::string export_out;
  std::string y4m_out;
  std::string srt_out;
  std::string range_text;
  int workers = 0;
  export_cmd->add_option("--project", project_path)->required();
  export_cmd->add_option("--assets", assets_dir)->required();
  export_cmd->add_option("--out", export_out)->required();
  export_cmd->add_option("--y4m", y4m_out);
  export_cmd->add_option("--srt", srt_out);
  export_cmd->add_flag("--burn-in", burn_in);
  export_cmd->add_option("--range", range_text, "a:b, end exclusive");
  export_cmd->add_option("--workers", workers);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the local HTTP service");
  ServiceConfig config;
  config.port = env_int("COURTVIZ_PORT", config.port);
  config.workers = env_int("COURTVIZ_WORKERS", config.workers);
  if (const char* root = std::getenv("COURTVIZ_DATA_ROOT")) config.data_root = root;
  std::string data_root = config.data_root.string();
  serve_cmd->add_option("--port", config.port);
  serve_cmd->add_option("--data-root", data_root);
  serve_cmd->add_option("--workers", config.workers);
  serve_cmd->add_option("--host", config.host);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      const synth::SceneSpec spec = synth::scene_spec_from_json(json::parse(read_text_file(spec_path)));
      const synth::Scene scene = synth::generate_scene(spec, seed);
      synth::write_scene(scene, synth_out, synth_y4m);
      write_text_file(std::filesystem::path(synth_out) / "project.json", encode_project(synth::project_for_scene(spec)));
      std::cout << json{{"frames", scene.frames.size()}, {"entities", scene.dataset.entities.size()}}.dump() << "\n";
    } else if (*ingest_cmd) {
      const std::string text = read_text_file(ingest_in);
      const bool mot = ingest_format == "mot" || (ingest_format == "auto" && ingest_in.ends_with(".csv"));
      TrackingDataset ds;
      if (mot) {
        ds = parse_tracking_mot_csv(text, VideoMeta{width, height, Rational(fps), frames}, sport_from_string(sport));
      } else {
        ds = parse_tracking_canonical(text);
      }
      ds = interpolate_gaps(ds, max_gap);
      write_text_file(ingest_out, encode_tracking_canonical(ds));
      std::cout << json{{"entities", ds.entities.size()}}.dump() << "\n";
    } else if (*validate_cmd) {
      const Project project = load_project(project_path);
      const Assets assets = load_assets(project, assets_dir);
      const auto violations = validate_project(project, assets.dataset);
      std::cout << json{{"valid", violations.empty()}, {"violations", violations}}.dump() << "\n";
      return violations.empty() ? 0 : 1;
    } else if (*render_cmd) {
      const Project project = load_project(project_path);
      const Assets assets = load_assets(project, assets_dir);
      write_png(render_out, render_output_frame(project, assets, frame, PlanOptions{burn_in}));
    } else if (*captions_cmd) {
      Project project = load_project(project_path);
      const Assets assets = load_assets(project, assets_dir);
      project.captions = synth::stub_captioner(assets.dataset, every);
      for (auto& c : project.captions) c.end_frame = std::min(c.end_frame, output_duration(project.timeline));
      std::erase_if(project.captions, [](const Caption& c) { return c.start_frame >= c.end_frame; });
      write_text_file(captions_out, encode_project(project));
    } else if (*export_cmd) {
      const Project project = load_project(project_path);
      const Assets assets = load_assets(project, assets_dir);
      ExportOptions options;
      options.range = parse_range(range_text);
      options.workers = workers;
      options.burn_in = burn_in || project.export_settings.burn_in;
      if (!srt_out.empty()) export_srt(project.captions, project.meta.fps);  // fail before rendering
      ExportManifest manifest = export_frames(project, assets, export_out, options);
      if (!y4m_out.empty()) {
        const ExportManifest y4m = export_y4m(project, assets, y4m_out, options);
        manifest.y4m_file = y4m.y4m_file;
        manifest.y4m_digest = y4m.y4m_digest;
      }
      if (!srt_out.empty()) write_text_file(srt_out, export_srt(project.captions, project.meta.fps));
      std::cout << json{{"frame_count", manifest.frame_count}, {"run_digest", manifest.run_digest}}.dump() << "\n";
    } else if (*serve_cmd) {
      config.data_root = data_root;
      Service service(config);
      const int port = service.bind();
      std::cout << json{{"listening", config.host + ":" + std::to_string(port)}}.dump() << std::endl;
      service.run();
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }
  return 0;
}
