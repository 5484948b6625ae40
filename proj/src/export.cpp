#include "courtviz/export.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "courtviz/error.hpp"

namespace courtviz {

using nlohmann::json;

Assets load_assets(const Project& project, const std::filesystem::path& root, std::int64_t max_gap) {
  const auto tracking_path = root / project.tracking_ref;
  if (!std::filesystem::exists(tracking_path)) {
    throw Error(ErrorCode::kNotFound, "tracking asset " + tracking_path.string() + " does not exist");
  }
  TrackingDataset dataset;
  const std::string text = read_text_file(tracking_path);
  if (tracking_path.extension() == ".csv") {
    dataset = parse_tracking_mot_csv(text, project.meta);
  } else {
    dataset = parse_tracking_canonical(text);
  }
  const VideoMeta& m = project.meta;
  if (dataset.meta.width != m.width || dataset.meta.height != m.height || dataset.meta.frame_count != m.frame_count) {
    throw Error(ErrorCode::kDimensionMismatch, "tracking asset does not match the project's video metadata");
  }
  return {FrameSequence::open(root / project.video_ref, "frame_", m.width, m.height, m.frame_count),
          FrameSequence::open(root / project.mask_ref, "mask_", m.width, m.height, m.frame_count),
          interpolate_gaps(dataset, max_gap)};
}

Canvas render_output_frame(const Project& project, const Assets& assets, std::int64_t n, const PlanOptions& options) {
  const FramePlan plan = plan_frame(project, assets.dataset, n, options);
  const std::int64_t src = plan.source.source_frame;
  return render_frame(plan, assets.video.read_rgb(src), assets.masks.read_gray(src));
}

json to_json(const ExportManifest& manifest) {
  json frames = json::array();
  for (const auto& f : manifest.frames) {
    json j = {{"index", f.index}, {"digest", f.digest}};
    if (!f.file.empty()) j["file"] = f.file;
    frames.push_back(std::move(j));
  }
  json muted = json::array();
  for (const auto& r : manifest.muted_ranges) muted.push_back({r.start, r.end});
  json doc = {{"width", manifest.width},
              {"height", manifest.height},
              {"range", {manifest.range.start, manifest.range.end}},
              {"frame_count", manifest.frame_count},
              {"frames", std::move(frames)},
              {"run_digest", manifest.run_digest},
              {"muted_ranges", std::move(muted)}};
  if (!manifest.y4m_file.empty()) {
    doc["y4m_file"] = manifest.y4m_file;
    doc["y4m_digest"] = manifest.y4m_digest;
  }
  return doc;
}

std::string run_digest(const std::vector<FrameRecord>& frames) {
  Sha256 sha;
  for (const auto& f : frames) {
    sha.update(f.digest);
    sha.update("\n");
  }
  return sha.hex();
}

std::string y4m_stream_header(const VideoMeta& meta) {
  return "YUV4MPEG2 W" + std::to_string(meta.width) + " H" + std::to_string(meta.height) + " F" +
         std::to_string(meta.fps.num()) + ":" + std::to_string(meta.fps.den()) + " Ip A1:1 C420jpeg";
}

namespace {

struct Rendered {
  std::string digest;
  std::vector<std::uint8_t> bytes;  // encoded output for this frame
};

FrameRange resolve_range(const Project& project, const ExportOptions& options) {
  const std::int64_t duration = output_duration(project.timeline);
  const FrameRange range = options.range.value_or(FrameRange{0, duration});
  if (range.start < 0 || range.end > duration || range.start >= range.end) {
    throw Error(ErrorCode::kOutOfRange, "export range [" + std::to_string(range.start) + ", " +
                                            std::to_string(range.end) + ") is outside [0, " +
                                            std::to_string(duration) + ")");
  }
  return range;
}

/// Validates the project and checks every source frame the range needs
/// before anything is written.
void preflight(const Project& project, const Assets& assets, FrameRange range) {
  const auto violations = validate_project(project, assets.dataset);
  if (!violations.empty()) throw Error(ErrorCode::kValidation, "project is invalid: " + violations.front());
  std::set<std::int64_t> sources;
  for (std::int64_t n = range.start; n < range.end; ++n) sources.insert(map_output_frame(project.timeline, n).source_frame);
  for (const std::int64_t s : sources) {
    assets.video.check_available(s);
    assets.masks.check_available(s);
  }
}

std::vector<FrameRange> clipped_muted_ranges(const Timeline& tl, FrameRange range) {
  std::vector<FrameRange> out;
  for (const auto& r : muted_ranges(tl)) {
    const FrameRange c{std::max(r.start, range.start), std::min(r.end, range.end)};
    if (c.start < c.end) out.push_back(c);
  }
  return out;
}

/// Renders [range) on `workers` threads and hands results to `commit` in
/// index order on the calling thread. At most a bounded window of frames is
/// held in memory.
template <typename Encode, typename Commit>
void render_ordered(const Project& project, const Assets& assets, FrameRange range, const ExportOptions& options,
                    Encode&& encode, Commit&& commit) {
  const std::int64_t total = range.end - range.start;
  int workers = options.workers > 0 ? options.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp<int>(workers, 1, static_cast<int>(std::min<std::int64_t>(total, 256)));
  const std::int64_t window = 2LL * workers + 2;
  const PlanOptions plan_options{options.burn_in};

  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::optional<Rendered>> slots(static_cast<std::size_t>(total));
  std::int64_t next_task = 0;
  std::int64_t committed = 0;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      std::int64_t i = 0;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return failure || next_task >= total || next_task < committed + window; });
        if (failure || next_task >= total) return;
        i = next_task++;
      }
      try {
        const Canvas frame = render_output_frame(project, assets, range.start + i, plan_options);
        Rendered r{sha256_hex(frame.data), encode(frame)};
        std::lock_guard lock(mu);
        slots[static_cast<std::size_t>(i)] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
      cv.notify_all();
    }
  };

  std::vector<std::jthread> pool;
  for (int k = 0; k < workers; ++k) pool.emplace_back(worker);

  for (std::int64_t i = 0; i < total; ++i) {
    Rendered r;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return failure || slots[static_cast<std::size_t>(i)].has_value(); });
      if (failure) break;
      r = std::move(*slots[static_cast<std::size_t>(i)]);
      slots[static_cast<std::size_t>(i)].reset();
    }
    try {
      commit(range.start + i, std::move(r));
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      break;
    }
    {
      std::lock_guard lock(mu);
      committed = i + 1;
    }
    cv.notify_all();
    if (options.progress) options.progress(i + 1, total);
  }
  cv.notify_all();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

void write_manifest(const ExportManifest& manifest, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  write_text_file(tmp, to_json(manifest).dump(2));
  std::filesystem::rename(tmp, path);
}

}  // namespace

ExportManifest export_frames(const Project& project, const Assets& assets, const std::filesystem::path& out_dir,
                             const ExportOptions& options) {
  const FrameRange range = resolve_range(project, options);
  preflight(project, assets, range);
  std::filesystem::create_directories(out_dir);

  ExportManifest manifest;
  manifest.width = project.meta.width;
  manifest.height = project.meta.height;
  manifest.range = range;
  manifest.frame_count = range.end - range.start;
  manifest.muted_ranges = clipped_muted_ranges(project.timeline, range);

  render_ordered(
      project, assets, range, options, [](const Canvas& frame) { return encode_png(frame); },
      [&](std::int64_t n, Rendered r) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06lld.png", static_cast<long long>(n));
        write_file(out_dir / name, r.bytes);
        manifest.frames.push_back({n, name, std::move(r.digest)});
      });
  manifest.run_digest = run_digest(manifest.frames);
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

ExportManifest export_y4m(const Project& project, const Assets& assets, const std::filesystem::path& out_path,
                          const ExportOptions& options) {
  if (project.meta.width % 2 != 0 || project.meta.height % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "y4m 4:2:0 output needs even dimensions");
  }
  const FrameRange range = resolve_range(project, options);
  preflight(project, assets, range);
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());

  ExportManifest manifest;
  manifest.width = project.meta.width;
  manifest.height = project.meta.height;
  manifest.range = range;
  manifest.frame_count = range.end - range.start;
  manifest.muted_ranges = clipped_muted_ranges(project.timeline, range);
  manifest.y4m_file = out_path.filename().string();

  const auto tmp = std::filesystem::path(out_path.string() + ".tmp");
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  Sha256 stream_digest;
  auto put = [&](std::span<const std::uint8_t> bytes) {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    stream_digest.update(bytes);
  };
  auto put_text = [&](std::string_view text) {
    put({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  };

  put_text(y4m_stream_header(project.meta) + "\n");
  render_ordered(
      project, assets, range, options,
      [](const Canvas& frame) {
        std::vector<std::uint8_t> planes;
        rgb_to_yuv420(frame, planes);
        return planes;
      },
      [&](std::int64_t n, Rendered r) {
        put_text("FRAME\n");
        put(r.bytes);
        manifest.frames.push_back({n, "", std::move(r.digest)});
      });
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + tmp.string());
  std::filesystem::rename(tmp, out_path);
  manifest.y4m_digest = stream_digest.hex();
  manifest.run_digest = run_digest(manifest.frames);
  return manifest;
}

namespace {

std::string srt_time(std::int64_t frame, Rational fps) {
  // floor(frame / fps) in milliseconds.
  const std::int64_t ms = frame * 1000 * fps.den() / fps.num();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld,%03lld", static_cast<long long>(ms / 3600000),
                static_cast<long long>(ms / 60000 % 60), static_cast<long long>(ms / 1000 % 60),
                static_cast<long long>(ms % 1000));
  return buf;
}

}  // namespace

std::string export_srt(const std::vector<Caption>& captions, Rational fps) {
  std::vector<const Caption*> sorted;
  for (const auto& c : captions) sorted.push_back(&c);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Caption* a, const Caption* b) { return a->start_frame < b->start_frame; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->start_frame < sorted[i - 1]->end_frame) {
      throw Error(ErrorCode::kValidation, "captions overlap at frame " + std::to_string(sorted[i]->start_frame));
    }
  }
  std::string out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out += std::to_string(i + 1) + "\n";
    out += srt_time(sorted[i]->start_frame, fps) + " --> " + srt_time(sorted[i]->end_frame, fps) + "\n";
    out += sorted[i]->text + "\n\n";
  }
  return out;
}

}  // namespace courtviz
