#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace courtviz {

/// Interleaved 8-bit image with `channels` samples per pixel (1, 3 or 4).
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Image8() = default;
  Image8(int w, int h, int c) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0) {}

  std::uint8_t* pixel(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * channels; }
  const std::uint8_t* pixel(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }

  friend bool operator==(const Image8&, const Image8&) = default;
};

using RgbImage = Image8;     // channels == 3
using AlphaPlane = Image8;   // channels == 1
using Canvas = Image8;       // channels == 4, RGBA

std::vector<std::uint8_t> encode_png(const Image8& image);
Image8 decode_png(std::span<const std::uint8_t> bytes, int channels);

void write_png(const std::filesystem::path& path, const Image8& image);
Image8 read_png(const std::filesystem::path& path, int channels);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// Incremental SHA-256 for streams too large to hold in memory.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::uint8_t> bytes);
  void update(std::string_view text);
  /// Finishes the digest; the object must not be updated afterwards.
  std::string hex();

 private:
  void* ctx_;
};

}  // namespace courtviz
