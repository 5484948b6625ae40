#include "courtviz/service.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include <httplib.h>

#include "courtviz/error.hpp"
#include "courtviz/export.hpp"
#include "courtviz/session.hpp"

namespace courtviz {

using nlohmann::json;

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
  std::vector<std::string> violations;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kParse:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kDimensionMismatch: return 422;
    case ErrorCode::kValidation: return 409;
    case ErrorCode::kOutOfRange: return 416;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const HttpError& e) {
  json err = {{"code", e.code}, {"message", e.message}};
  if (!e.violations.empty()) err["violations"] = e.violations;
  send_json(res, e.status, {{"error", err}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw HttpError{422, "parse_error", "body: parse error at byte " + std::to_string(e.byte), {}};
  }
}

/// Runs a handler, mapping engine errors to the JSON error body.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const HttpError& e) {
      send_error(res, e);
    } catch (const CommandRejected& e) {
      send_error(res, {409, to_string(e.code()), e.what(), e.violations()});
    } catch (const Error& e) {
      send_error(res, {status_for(e.code()), to_string(e.code()), e.what(), {}});
    } catch (const std::exception& e) {
      send_error(res, {500, "internal", e.what(), {}});
    }
  };
}

std::int64_t int_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw HttpError{422, "invalid_argument", std::string("missing query parameter ") + name, {}};
  try {
    return std::stoll(req.get_param_value(name));
  } catch (const std::exception&) {
    throw HttpError{422, "invalid_argument", std::string("query parameter ") + name + " must be an integer", {}};
  }
}

double number_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw HttpError{422, "invalid_argument", std::string("missing query parameter ") + name, {}};
  try {
    return std::stod(req.get_param_value(name));
  } catch (const std::exception&) {
    throw HttpError{422, "invalid_argument", std::string("query parameter ") + name + " must be a number", {}};
  }
}

struct ProjectEntry {
  std::string id;
  std::shared_ptr<const Assets> assets;
  std::mutex write_mu;  // serializes mutations
  Session session;

  mutable std::mutex snapshot_mu;
  std::shared_ptr<const Project> snapshot;

  ProjectEntry(std::string project_id, std::shared_ptr<const Assets> a, Session s)
      : id(std::move(project_id)), assets(std::move(a)), session(std::move(s)),
        snapshot(std::make_shared<const Project>(session.project())) {}

  std::shared_ptr<const Project> current() const {
    std::lock_guard lock(snapshot_mu);
    return snapshot;
  }

  void publish() {
    auto next = std::make_shared<const Project>(session.project());
    std::lock_guard lock(snapshot_mu);
    snapshot = std::move(next);
  }

  json summary(bool changed) const {
    const Project& p = session.project();
    json objects = json::array();
    for (const auto& o : p.objects) {
      objects.push_back(
          {{"id", o.id}, {"kind", to_string(o.kind)}, {"start_frame", o.start_frame}, {"end_frame", o.end_frame}});
    }
    return {{"project_id", id},
            {"changed", changed},
            {"revision", session.revision()},
            {"output_duration", output_duration(p.timeline)},
            {"undo_depth", session.undo_depth()},
            {"redo_depth", session.redo_depth()},
            {"objects", std::move(objects)}};
  }
};

struct ExportJob {
  std::string id;
  std::shared_ptr<const Project> project;
  std::shared_ptr<const Assets> assets;
  std::filesystem::path out_dir;
  ExportOptions options;

  std::string state = "queued";
  std::int64_t done = 0;
  std::int64_t total = 0;
  std::optional<ExportManifest> manifest;
  std::string error;
};

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  httplib::Server server;
  int bound_port = -1;

  std::shared_mutex projects_mu;
  std::map<std::string, std::shared_ptr<ProjectEntry>> projects;
  std::int64_t next_project = 1;

  std::mutex jobs_mu;
  std::condition_variable jobs_cv;
  std::map<std::string, std::shared_ptr<ExportJob>> jobs;
  std::deque<std::shared_ptr<ExportJob>> queue;
  std::int64_t next_job = 1;
  bool stopping = false;
  std::thread job_runner;

  explicit Impl(ServiceConfig c) : config(std::move(c)) {
    routes();
    job_runner = std::thread([this] { run_jobs(); });
  }

  ~Impl() {
    {
      std::lock_guard lock(jobs_mu);
      stopping = true;
    }
    jobs_cv.notify_all();
    job_runner.join();
  }

  std::shared_ptr<ProjectEntry> find_project(const std::string& id) {
    std::shared_lock lock(projects_mu);
    const auto it = projects.find(id);
    if (it == projects.end()) throw HttpError{404, "not_found", "no project '" + id + "'", {}};
    return it->second;
  }

  std::filesystem::path asset_path(const std::string& ref) const {
    if (ref.empty()) throw HttpError{422, "invalid_argument", "asset refs must not be empty", {}};
    const std::filesystem::path rel(ref);
    if (rel.is_absolute()) throw HttpError{422, "invalid_argument", "asset refs must be relative to the data root", {}};
    for (const auto& part : rel) {
      if (part == "..") throw HttpError{422, "invalid_argument", "asset refs must stay inside the data root", {}};
    }
    const auto path = config.data_root / rel;
    if (!std::filesystem::exists(path)) throw HttpError{404, "not_found", "asset '" + ref + "' does not exist", {}};
    return path;
  }

  void create_project(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    Project project;
    if (body.contains("project")) {
      try {
        project = project_from_json(body["project"]);
      } catch (const Error& e) {
        throw HttpError{422, to_string(e.code()), e.what(), {}};
      }
    } else {
      auto ref = [&](const char* key) -> std::string {
        const auto it = body.find(key);
        if (it == body.end() || !it->is_string()) {
          throw HttpError{422, "parse_error", std::string("body: missing string field '") + key + "'", {}};
        }
        return it->get<std::string>();
      };
      const std::string tracking_ref = ref("tracking_ref");
      const TrackingDataset ds = parse_tracking_canonical(read_text_file(asset_path(tracking_ref)));
      project = make_project(ds.meta, ref("video_ref"), tracking_ref, ref("mask_ref"));
    }
    asset_path(project.video_ref);
    asset_path(project.mask_ref);
    asset_path(project.tracking_ref);
    auto assets = std::make_shared<const Assets>(load_assets(project, config.data_root));
    const auto violations = validate_project(project, assets->dataset);
    if (!violations.empty()) throw HttpError{422, "validation_failed", "project is invalid", violations};

    auto dataset = std::shared_ptr<const TrackingDataset>(assets, &assets->dataset);
    std::string id;
    {
      std::unique_lock lock(projects_mu);
      id = "p" + std::to_string(next_project++);
      projects.emplace(id, std::make_shared<ProjectEntry>(id, assets, Session(std::move(project), dataset)));
    }
    send_json(res, 201, {{"project_id", id}});
  }

  void routes() {
    server.Post("/projects", guarded([this](const auto& req, auto& res) { create_project(req, res); }));

    server.Get("/projects", guarded([this](const auto&, auto& res) {
      json list = json::array();
      std::shared_lock lock(projects_mu);
      for (const auto& [id, entry] : projects) {
        const auto p = entry->current();
        list.push_back({{"project_id", id}, {"objects", p->objects.size()}, {"output_duration", output_duration(p->timeline)}});
      }
      send_json(res, 200, {{"projects", std::move(list)}});
    }));

    server.Get(R"(/projects/([^/]+))", guarded([this](const auto& req, auto& res) {
      send_json(res, 200, to_json(*find_project(req.matches[1])->current()));
    }));

    server.Get(R"(/projects/([^/]+)/session)", guarded([this](const auto& req, auto& res) {
      auto entry = find_project(req.matches[1]);
      std::lock_guard lock(entry->write_mu);
      send_json(res, 200, entry->session.to_json());
    }));

    server.Post(R"(/projects/([^/]+)/commands)", guarded([this](const auto& req, auto& res) {
      auto entry = find_project(req.matches[1]);
      Command cmd;
      try {
        cmd = command_from_json(parse_body(req));
      } catch (const Error& e) {
        throw HttpError{422, to_string(e.code()), e.what(), {}};
      }
      std::lock_guard lock(entry->write_mu);
      const Command applied = entry->session.apply(std::move(cmd));
      entry->publish();
      json body = entry->summary(true);
      body["command"] = to_json(applied);
      send_json(res, 200, body);
    }));

    auto history = [this](const char* pattern, auto op) {
      server.Post(pattern, guarded([this, op](const auto& req, auto& res) {
        auto entry = find_project(req.matches[1]);
        std::lock_guard lock(entry->write_mu);
        const bool changed = op(entry->session);
        entry->publish();
        send_json(res, 200, entry->summary(changed));
      }));
    };
    history(R"(/projects/([^/]+)/undo)", [](Session& s) { return s.undo(); });
    history(R"(/projects/([^/]+)/redo)", [](Session& s) { return s.redo(); });
    history(R"(/projects/([^/]+)/reset)", [](Session& s) {
      s.reset();
      return true;
    });

    server.Get(R"(/projects/([^/]+)/frames/(-?\d+))", guarded([this](const auto& req, auto& res) {
      auto entry = find_project(req.matches[1]);
      const auto project = entry->current();
      const std::int64_t n = std::stoll(req.matches[2]);
      const std::int64_t duration = output_duration(project->timeline);
      if (n < 0 || n >= duration) {
        throw HttpError{416, "out_of_range",
                        "frame " + std::to_string(n) + " outside [0, " + std::to_string(duration) + ")", {}};
      }
      PlanOptions options;
      options.burn_in_captions = req.has_param("burn_in") && req.get_param_value("burn_in") != "0";
      const auto png = encode_png(render_output_frame(*project, *entry->assets, n, options));
      res.status = 200;
      res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
    }));

    server.Get(R"(/projects/([^/]+)/hittest)", guarded([this](const auto& req, auto& res) {
      auto entry = find_project(req.matches[1]);
      const auto project = entry->current();
      const std::int64_t n = int_param(req, "frame");
      const std::int64_t duration = output_duration(project->timeline);
      if (n < 0 || n >= duration) throw HttpError{416, "out_of_range", "frame outside the timeline", {}};
      const auto hit =
          hit_test(*project, entry->assets->dataset, n, {number_param(req, "x"), number_param(req, "y")});
      send_json(res, 200, {{"entity_id", hit ? json(*hit) : json(nullptr)}});
    }));

    server.Post(R"(/projects/([^/]+)/exports)", guarded([this](const auto& req, auto& res) {
      auto entry = find_project(req.matches[1]);
      const json body = parse_body(req);
      auto job = std::make_shared<ExportJob>();
      job->project = entry->current();
      job->assets = entry->assets;
      job->options.workers = config.workers;
      job->options.burn_in = body.value("burn_in", job->project->export_settings.burn_in);
      if (body.contains("range")) {
        const auto& r = body["range"];
        if (!r.is_array() || r.size() != 2) throw HttpError{422, "parse_error", "body.range: expected [start, end]", {}};
        job->options.range = FrameRange{r[0].get<std::int64_t>(), r[1].get<std::int64_t>()};
      }
      {
        std::lock_guard lock(jobs_mu);
        job->id = "job" + std::to_string(next_job++);
        job->out_dir = config.data_root / "exports" / job->id;
        jobs.emplace(job->id, job);
        queue.push_back(job);
      }
      jobs_cv.notify_all();
      send_json(res, 202, {{"job_id", job->id}});
    }));

    server.Get(R"(/exports/([^/]+))", guarded([this](const auto& req, auto& res) {
      std::lock_guard lock(jobs_mu);
      const auto it = jobs.find(req.matches[1]);
      if (it == jobs.end()) throw HttpError{404, "not_found", "no export job '" + std::string(req.matches[1]) + "'", {}};
      const ExportJob& job = *it->second;
      json body = {{"job_id", job.id}, {"state", job.state}, {"progress", {{"done", job.done}, {"total", job.total}}}};
      if (job.manifest) body["manifest"] = to_json(*job.manifest);
      if (!job.error.empty()) body["error"] = job.error;
      send_json(res, 200, body);
    }));
  }

  void run_jobs() {
    for (;;) {
      std::shared_ptr<ExportJob> job;
      {
        std::unique_lock lock(jobs_mu);
        jobs_cv.wait(lock, [this] { return stopping || !queue.empty(); });
        if (stopping) return;
        job = queue.front();
        queue.pop_front();
        job->state = "running";
      }
      ExportOptions options = job->options;
      options.progress = [this, job](std::int64_t done, std::int64_t total) {
        std::lock_guard lock(jobs_mu);
        job->done = done;
        job->total = total;
      };
      try {
        ExportManifest manifest = export_frames(*job->project, *job->assets, job->out_dir, options);
        std::lock_guard lock(jobs_mu);
        job->total = manifest.frame_count;
        job->done = manifest.frame_count;
        job->manifest = std::move(manifest);
        job->state = "done";
      } catch (const std::exception& e) {
        std::lock_guard lock(jobs_mu);
        job->error = e.what();
        job->state = "failed";
      }
    }
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
  const auto& c = impl_->config;
  if (c.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(c.host);
  } else if (impl_->server.bind_to_port(c.host, c.port)) {
    impl_->bound_port = c.port;
  } else {
    impl_->bound_port = -1;
  }
  if (impl_->bound_port < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + c.host + ":" + std::to_string(c.port));
  }
  return impl_->bound_port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

int Service::port() const { return impl_->bound_port; }

}  // namespace courtviz
