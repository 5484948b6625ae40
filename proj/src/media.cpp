#include "courtviz/media.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "courtviz/error.hpp"

namespace courtviz {

namespace {

constexpr std::string_view kY4mMagic = "YUV4MPEG2";
constexpr std::string_view kFrameTag = "FRAME\n";

std::uint8_t clamp8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

std::size_t plane_bytes(int width, int height, bool mono) {
  const auto luma = static_cast<std::size_t>(width) * height;
  return mono ? luma : luma + 2 * (static_cast<std::size_t>(width / 2) * (height / 2));
}

}  // namespace

Y4mHeader parse_y4m_header(std::string_view line) {
  if (line.substr(0, kY4mMagic.size()) != kY4mMagic) throw Error(ErrorCode::kParse, "not a YUV4MPEG2 stream");
  Y4mHeader h;
  std::istringstream in{std::string(line.substr(kY4mMagic.size()))};
  std::string token;
  while (in >> token) {
    const char tag = token[0];
    const std::string value = token.substr(1);
    switch (tag) {
      case 'W': h.width = std::stoi(value); break;
      case 'H': h.height = std::stoi(value); break;
      case 'F': {
        const auto colon = value.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::kParse, "y4m: bad frame rate '" + value + "'");
        h.fps = Rational(std::stoll(value.substr(0, colon)), std::stoll(value.substr(colon + 1)));
        break;
      }
      case 'C': h.colorspace = value; break;
      default: break;  // interlacing, aspect, comments
    }
  }
  if (h.width <= 0 || h.height <= 0) throw Error(ErrorCode::kParse, "y4m: missing dimensions");
  return h;
}

FrameSequence FrameSequence::open(const std::filesystem::path& path, std::string prefix, int width, int height,
                                  std::int64_t frame_count) {
  FrameSequence seq;
  seq.path_ = path;
  seq.prefix_ = std::move(prefix);
  seq.width_ = width;
  seq.height_ = height;
  seq.frame_count_ = frame_count;
  if (std::filesystem::is_directory(path)) {
    seq.kind_ = Kind::kPngDirectory;
    return seq;
  }
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kNotFound, "frame source " + path.string() + " does not exist");
  }
  seq.kind_ = Kind::kY4m;
  std::ifstream in(path, std::ios::binary);
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorCode::kParse, path.string() + ": empty y4m stream");
  const Y4mHeader h = parse_y4m_header(header);
  if (h.width != width || h.height != height) {
    throw Error(ErrorCode::kDimensionMismatch, path.string() + ": stream is " + std::to_string(h.width) + "x" +
                                                   std::to_string(h.height) + ", expected " + std::to_string(width) +
                                                   "x" + std::to_string(height));
  }
  seq.y4m_mono_ = h.colorspace.rfind("mono", 0) == 0;
  seq.y4m_data_offset_ = header.size() + 1;
  return seq;
}

void FrameSequence::check_index(std::int64_t n) const {
  if (n < 0 || n >= frame_count_) {
    throw Error(ErrorCode::kOutOfRange,
                "frame " + std::to_string(n) + " outside [0, " + std::to_string(frame_count_) + ")");
  }
}

std::filesystem::path FrameSequence::frame_path(std::int64_t n) const {
  char name[32];
  std::snprintf(name, sizeof(name), "%06lld.png", static_cast<long long>(n));
  return path_ / (prefix_ + name);
}

void FrameSequence::check_available(std::int64_t n) const {
  check_index(n);
  if (kind_ == Kind::kPngDirectory) {
    if (!std::filesystem::is_regular_file(frame_path(n))) {
      throw Error(ErrorCode::kIo, "missing frame file " + frame_path(n).string());
    }
    return;
  }
  const auto need = y4m_data_offset_ + static_cast<std::uint64_t>(n + 1) *
                                           (kFrameTag.size() + plane_bytes(width_, height_, y4m_mono_));
  if (std::filesystem::file_size(path_) < need) {
    throw Error(ErrorCode::kIo, path_.string() + ": stream ends before frame " + std::to_string(n));
  }
}

void FrameSequence::read_y4m_planes(std::int64_t n, std::vector<std::uint8_t>& yuv) const {
  const std::size_t frame_bytes = plane_bytes(width_, height_, y4m_mono_);
  const std::uint64_t offset = y4m_data_offset_ + static_cast<std::uint64_t>(n) * (kFrameTag.size() + frame_bytes);
  std::ifstream in(path_, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(offset));
  std::string tag(kFrameTag.size(), '\0');
  in.read(tag.data(), static_cast<std::streamsize>(tag.size()));
  if (!in || tag != kFrameTag) {
    throw Error(ErrorCode::kIo, path_.string() + ": frame " + std::to_string(n) + " missing or has parameters");
  }
  yuv.resize(frame_bytes);
  in.read(reinterpret_cast<char*>(yuv.data()), static_cast<std::streamsize>(frame_bytes));
  if (!in) throw Error(ErrorCode::kIo, path_.string() + ": truncated frame " + std::to_string(n));
}

RgbImage FrameSequence::read_rgb(std::int64_t n) const {
  check_index(n);
  if (kind_ == Kind::kPngDirectory) {
    const auto file = frame_path(n);
    if (!std::filesystem::is_regular_file(file)) throw Error(ErrorCode::kIo, "missing frame file " + file.string());
    RgbImage img = read_png(file, 3);
    if (img.width != width_ || img.height != height_) {
      throw Error(ErrorCode::kDimensionMismatch, file.string() + " is " + std::to_string(img.width) + "x" +
                                                     std::to_string(img.height) + ", expected " +
                                                     std::to_string(width_) + "x" + std::to_string(height_));
    }
    return img;
  }
  std::vector<std::uint8_t> yuv;
  read_y4m_planes(n, yuv);
  if (y4m_mono_) {
    RgbImage img(width_, height_, 3);
    for (std::size_t i = 0; i < static_cast<std::size_t>(width_) * height_; ++i) {
      img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = yuv[i];
    }
    return img;
  }
  return yuv420_to_rgb(yuv, width_, height_);
}

AlphaPlane FrameSequence::read_gray(std::int64_t n) const {
  check_index(n);
  if (kind_ == Kind::kPngDirectory) {
    const auto file = frame_path(n);
    if (!std::filesystem::is_regular_file(file)) throw Error(ErrorCode::kIo, "missing frame file " + file.string());
    AlphaPlane img = read_png(file, 1);
    if (img.width != width_ || img.height != height_) {
      throw Error(ErrorCode::kDimensionMismatch, file.string() + " is " + std::to_string(img.width) + "x" +
                                                     std::to_string(img.height) + ", expected " +
                                                     std::to_string(width_) + "x" + std::to_string(height_));
    }
    return img;
  }
  std::vector<std::uint8_t> yuv;
  read_y4m_planes(n, yuv);
  AlphaPlane img(width_, height_, 1);
  std::copy_n(yuv.begin(), img.data.size(), img.data.begin());
  return img;
}

RgbImage load_video_frame(const FrameSequence& source, std::int64_t n) { return source.read_rgb(n); }

AlphaPlane load_mask_frame(const FrameSequence& masks, std::int64_t n) { return masks.read_gray(n); }

void rgb_to_yuv420(const Image8& rgb, std::vector<std::uint8_t>& out) {
  const int w = rgb.width;
  const int h = rgb.height;
  if (w % 2 != 0 || h % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "4:2:0 output needs even dimensions, got " + std::to_string(w) + "x" +
                                                 std::to_string(h));
  }
  const int c = rgb.channels;
  const std::size_t luma = static_cast<std::size_t>(w) * h;
  const std::size_t chroma = static_cast<std::size_t>(w / 2) * (h / 2);
  out.resize(luma + 2 * chroma);
  std::uint8_t* y_plane = out.data();
  std::uint8_t* cb_plane = y_plane + luma;
  std::uint8_t* cr_plane = cb_plane + chroma;

  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = rgb.data.data() + static_cast<std::size_t>(y) * w * c;
    for (int x = 0; x < w; ++x) {
      const int r = row[x * c];
      const int g = row[x * c + 1];
      const int b = row[x * c + 2];
      y_plane[static_cast<std::size_t>(y) * w + x] = clamp8((77 * r + 150 * g + 29 * b + 128) >> 8);
    }
  }
  for (int y = 0; y < h / 2; ++y) {
    for (int x = 0; x < w / 2; ++x) {
      int sum[3] = {0, 0, 0};
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const std::uint8_t* p = rgb.pixel(2 * x + dx, 2 * y + dy);
          for (int k = 0; k < 3; ++k) sum[k] += p[k];
        }
      }
      const int r = (sum[0] + 2) >> 2;
      const int g = (sum[1] + 2) >> 2;
      const int b = (sum[2] + 2) >> 2;
      const std::size_t i = static_cast<std::size_t>(y) * (w / 2) + x;
      cb_plane[i] = clamp8(((-43 * r - 85 * g + 128 * b + 128) >> 8) + 128);
      cr_plane[i] = clamp8(((128 * r - 107 * g - 21 * b + 128) >> 8) + 128);
    }
  }
}

RgbImage yuv420_to_rgb(std::span<const std::uint8_t> yuv, int width, int height) {
  const std::size_t luma = static_cast<std::size_t>(width) * height;
  const std::size_t chroma = static_cast<std::size_t>(width / 2) * (height / 2);
  if (yuv.size() < luma + 2 * chroma) throw Error(ErrorCode::kDimensionMismatch, "yuv buffer too small");
  const std::uint8_t* cb_plane = yuv.data() + luma;
  const std::uint8_t* cr_plane = cb_plane + chroma;
  RgbImage img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int luma_v = yuv[static_cast<std::size_t>(y) * width + x];
      const std::size_t ci = static_cast<std::size_t>(y / 2) * (width / 2) + x / 2;
      const int cb = cb_plane[ci] - 128;
      const int cr = cr_plane[ci] - 128;
      std::uint8_t* p = img.pixel(x, y);
      p[0] = clamp8(luma_v + ((359 * cr + 128) >> 8));
      p[1] = clamp8(luma_v + ((-88 * cb - 183 * cr + 128) >> 8));
      p[2] = clamp8(luma_v + ((454 * cb + 128) >> 8));
    }
  }
  return img;
}

}  // namespace courtviz
