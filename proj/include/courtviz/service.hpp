#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace courtviz {

struct ServiceConfig {
  std::filesystem::path data_root = ".";
  std::string host = "127.0.0.1";
  int port = 8787;  // 0 picks a free port
  int workers = 0;  // export worker threads, 0 = hardware concurrency
};

/// Local HTTP/JSON facade over sessions, previews, hit-testing and export
/// jobs.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; returns the bound port.
  int bind();
  /// Serves until stop(). bind() must have been called.
  void run();
  void stop();

  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace courtviz
