#pragma once

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "courtviz/service.hpp"
#include "support.hpp"

namespace testing {

/// Service on a free port over a data root holding one written synth scene.
class LiveService {
 public:
  explicit LiveService(const courtviz::synth::SceneSpec& spec, std::uint64_t seed = 17, int workers = 2)
      : scene_(courtviz::synth::generate_scene(spec, seed)) {
    courtviz::synth::write_scene(scene_, dir_.path());
    courtviz::ServiceConfig config;
    config.data_root = dir_.path();
    config.port = 0;
    config.workers = workers;
    service_ = std::make_unique<courtviz::Service>(config);
    port_ = service_->bind();
    thread_ = std::thread([this] { service_->run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(60, 0);
  }
  ~LiveService() {
    service_->stop();
    thread_.join();
  }
  LiveService(const LiveService&) = delete;
  LiveService& operator=(const LiveService&) = delete;

  httplib::Client& client() { return *client_; }
  const courtviz::synth::Scene& scene() const { return scene_; }
  const std::filesystem::path& root() const { return dir_.path(); }
  int port() const { return port_; }

  httplib::Result post(const std::string& path, const nlohmann::json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

  /// Registers the written scene and returns the new project id.
  std::string create_project() {
    auto res = post("/projects", {{"video_ref", "video"}, {"tracking_ref", "tracking.json"}, {"mask_ref", "masks"}});
    if (!res || res->status != 201) return {};
    return nlohmann::json::parse(res->body)["project_id"].get<std::string>();
  }

  /// Polls an export job until it leaves the queued/running states.
  nlohmann::json wait_for_job(const std::string& job_id, std::vector<std::int64_t>* progress = nullptr) {
    for (int i = 0; i < 6000; ++i) {
      auto res = client_->Get("/exports/" + job_id);
      if (!res) break;
      auto body = nlohmann::json::parse(res->body);
      if (progress) progress->push_back(body["progress"]["done"].get<std::int64_t>());
      const auto state = body["state"].get<std::string>();
      if (state != "queued" && state != "running") return body;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return {};
  }

 private:
  TempDir dir_;
  courtviz::synth::Scene scene_;
  std::unique_ptr<courtviz::Service> service_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace testing
