#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "courtviz/compositor.hpp"
#include "courtviz/media.hpp"
#include "courtviz/model.hpp"

namespace courtviz {

/// Everything needed to render a project besides the project itself.
struct Assets {
  FrameSequence video;
  FrameSequence masks;
  TrackingDataset dataset;
};

/// Resolves the project's asset refs against `root`, checks that they match
/// the project's video metadata, and repairs tracking gaps up to max_gap.
Assets load_assets(const Project& project, const std::filesystem::path& root,
                   std::int64_t max_gap = kDefaultMaxGap);

/// The single render path shared by preview and export.
Canvas render_output_frame(const Project& project, const Assets& assets, std::int64_t n,
                           const PlanOptions& options = {});

struct ExportOptions {
  std::optional<FrameRange> range;
  int workers = 0;  // 0 = hardware concurrency
  bool burn_in = false;
  /// Called from the committing thread after each frame is written.
  std::function<void(std::int64_t done, std::int64_t total)> progress;
};

struct FrameRecord {
  std::int64_t index = 0;
  std::string file;
  std::string digest;  // SHA-256 of the RGBA pixels
  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct ExportManifest {
  int width = 0;
  int height = 0;
  FrameRange range;
  std::int64_t frame_count = 0;
  std::vector<FrameRecord> frames;
  std::string run_digest;
  std::vector<FrameRange> muted_ranges;
  std::string y4m_file;
  std::string y4m_digest;  // SHA-256 of the stream bytes
  friend bool operator==(const ExportManifest&, const ExportManifest&) = default;
};

nlohmann::json to_json(const ExportManifest& manifest);

/// Digest of a whole run: SHA-256 over the per-frame digests in order.
std::string run_digest(const std::vector<FrameRecord>& frames);

/// Renders the range in parallel and writes `frame_%06d.png` files in index
/// order, then `manifest.json` by atomic rename. All assets are checked
/// before the first file is written.
ExportManifest export_frames(const Project& project, const Assets& assets, const std::filesystem::path& out_dir,
                             const ExportOptions& options = {});

/// YUV4MPEG2 4:2:0 stream of the range.
ExportManifest export_y4m(const Project& project, const Assets& assets, const std::filesystem::path& out_path,
                          const ExportOptions& options = {});

std::string y4m_stream_header(const VideoMeta& meta);

/// SubRip text; entries numbered from 1, timestamps floor(frame / fps) in
/// milliseconds. Throws Error(kValidation) when captions overlap.
std::string export_srt(const std::vector<Caption>& captions, Rational fps);

}  // namespace courtviz
