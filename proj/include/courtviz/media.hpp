#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "courtviz/image.hpp"
#include "courtviz/video_meta.hpp"

namespace courtviz {

/// Reads one picture per index from either a directory of numbered PNGs
/// (`<prefix>%06d.png`) or a YUV4MPEG2 stream. Reads at distinct indices
/// may run concurrently.
class FrameSequence {
 public:
  enum class Kind { kPngDirectory, kY4m };

  /// `prefix` is "frame_" for video and "mask_" for mattes.
  static FrameSequence open(const std::filesystem::path& path, std::string prefix, int width, int height,
                            std::int64_t frame_count);

  Kind kind() const { return kind_; }
  const std::filesystem::path& path() const { return path_; }
  std::int64_t frame_count() const { return frame_count_; }

  /// Throws Error(kIo) when the frame is missing and Error(kDimensionMismatch)
  /// when its size differs from the expected one.
  RgbImage read_rgb(std::int64_t n) const;
  AlphaPlane read_gray(std::int64_t n) const;

  /// Cheap existence check used before rendering starts.
  void check_available(std::int64_t n) const;

 private:
  std::filesystem::path frame_path(std::int64_t n) const;
  void read_y4m_planes(std::int64_t n, std::vector<std::uint8_t>& yuv) const;
  void check_index(std::int64_t n) const;

  Kind kind_ = Kind::kPngDirectory;
  std::filesystem::path path_;
  std::string prefix_;
  int width_ = 0;
  int height_ = 0;
  std::int64_t frame_count_ = 0;
  std::uint64_t y4m_data_offset_ = 0;
  bool y4m_mono_ = false;
};

RgbImage load_video_frame(const FrameSequence& source, std::int64_t n);
AlphaPlane load_mask_frame(const FrameSequence& masks, std::int64_t n);

struct Y4mHeader {
  int width = 0;
  int height = 0;
  Rational fps{30};
  std::string colorspace = "420jpeg";
};

Y4mHeader parse_y4m_header(std::string_view line);

/// BT.601 full-range conversions with round-half-up integer arithmetic.
void rgb_to_yuv420(const Image8& rgb_or_rgba, std::vector<std::uint8_t>& out);
RgbImage yuv420_to_rgb(std::span<const std::uint8_t> yuv, int width, int height);

}  // namespace courtviz
