#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "courtviz/synth.hpp"

namespace testing {

/// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("courtviz-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Two players crossing a 64x36 court.
inline courtviz::synth::SceneSpec small_spec(std::int64_t frames = 10) {
  courtviz::synth::SceneSpec spec;
  spec.frame_count = frames;
  spec.entities = {
      {"p1", {4, 4}, {1, 0}, 10, 20, std::nullopt},
      {"p2", {44, 12}, {-1, 0.25}, 8, 16, std::nullopt},
  };
  return spec;
}

}  // namespace testing
