#include "courtviz/session.hpp"

#include <algorithm>
#include <set>

#include "courtviz/image.hpp"

namespace courtviz {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 14> kCommandNames{
    "AddObject", "RemoveObject", "MoveResizeObject", "SetParams",  "AddCaption",       "EditCaption",   "RemoveCaption",
    "SplitAt",   "InsertFreeze", "SetSpeed",         "SetMuted",   "DuplicateSegment", "SetHomography", "RippleObjects",
};

// Top-level keys a session file adds to the project document.
const std::set<std::string> kSessionKeys{"baseline", "command_log", "redo_log", "last_command_id"};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParse, where + ": " + what);
}

const json& req(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T req_as(const json& j, const char* key, const std::string& where) {
  const json& v = req(j, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key, "wrong type");
  }
}

Rational rational_from(const json& j, const std::string& where) {
  try {
    if (j.is_array() && j.size() == 2) return Rational(j[0].get<std::int64_t>(), j[1].get<std::int64_t>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  } catch (const json::exception&) {
  } catch (const Error& e) {
    fail(where, e.what());
  }
  fail(where, "expected [num, den]");
}

}  // namespace

std::string_view Command::kind_name() const { return kCommandNames[payload.index()]; }

json to_json(const Command& command) {
  json payload = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AddObject>) {
          return {{"object", to_json(p.object)}};
        } else if constexpr (std::is_same_v<T, RemoveObject>) {
          return {{"object_id", p.object_id}};
        } else if constexpr (std::is_same_v<T, MoveResizeObject>) {
          return {{"object_id", p.object_id}, {"start_frame", p.start_frame}, {"end_frame", p.end_frame}};
        } else if constexpr (std::is_same_v<T, SetParams>) {
          json j = {{"object_id", p.object_id},
                    {"kind", to_string(params_kind(p.params))},
                    {"params", to_json(p.params)}};
          if (p.z) j["z"] = *p.z;
          return j;
        } else if constexpr (std::is_same_v<T, AddCaption>) {
          return {{"caption", to_json(p.caption)}};
        } else if constexpr (std::is_same_v<T, EditCaption>) {
          return {{"index", p.index}, {"caption", to_json(p.caption)}};
        } else if constexpr (std::is_same_v<T, RemoveCaption>) {
          return {{"index", p.index}};
        } else if constexpr (std::is_same_v<T, SplitAt>) {
          return {{"frame", p.frame}};
        } else if constexpr (std::is_same_v<T, InsertFreeze>) {
          return {{"frame", p.frame}, {"duration", p.duration}};
        } else if constexpr (std::is_same_v<T, SetSpeed>) {
          return {{"segment_index", p.segment_index}, {"speed", {p.speed.num(), p.speed.den()}}};
        } else if constexpr (std::is_same_v<T, SetMuted>) {
          return {{"segment_index", p.segment_index}, {"muted", p.muted}};
        } else if constexpr (std::is_same_v<T, DuplicateSegment>) {
          return {{"segment_index", p.segment_index}};
        } else if constexpr (std::is_same_v<T, SetHomography>) {
          return {{"homography", to_json(p.homography)}};
        } else {
          return {{"from_frame", p.from_frame}, {"delta", p.delta}};
        }
      },
      command.payload);
  json j = {{"kind", command.kind_name()}, {"payload", std::move(payload)}};
  if (command.id != 0) j["id"] = command.id;
  return j;
}

Command command_from_json(const json& doc, const std::string& where) {
  Command cmd;
  const auto kind = req_as<std::string>(doc, "kind", where);
  if (const auto it = doc.find("id"); it != doc.end()) {
    if (!it->is_number_integer()) fail(where + ".id", "must be an integer");
    cmd.id = it->get<std::int64_t>();
  }
  const std::string at = where + ".payload";
  const json empty = json::object();
  const auto pit = doc.find("payload");
  const json& p = pit == doc.end() ? empty : *pit;
  if (!p.is_object()) fail(at, "expected an object");

  if (kind == "AddObject") {
    cmd.payload = AddObject{render_object_from_json(req(p, "object", at), at + ".object")};
  } else if (kind == "RemoveObject") {
    cmd.payload = RemoveObject{req_as<std::string>(p, "object_id", at)};
  } else if (kind == "MoveResizeObject") {
    cmd.payload = MoveResizeObject{req_as<std::string>(p, "object_id", at), req_as<std::int64_t>(p, "start_frame", at),
                                   req_as<std::int64_t>(p, "end_frame", at)};
  } else if (kind == "SetParams") {
    SetParams sp;
    sp.object_id = req_as<std::string>(p, "object_id", at);
    ObjectKind object_kind;
    try {
      object_kind = object_kind_from_string(req_as<std::string>(p, "kind", at));
    } catch (const Error& e) {
      fail(at + ".kind", e.what());
    }
    sp.params = params_from_json(object_kind, req(p, "params", at), at + ".params");
    if (p.contains("z") && !p["z"].is_null()) sp.z = req_as<int>(p, "z", at);
    cmd.payload = std::move(sp);
  } else if (kind == "AddCaption") {
    cmd.payload = AddCaption{caption_from_json(req(p, "caption", at), at + ".caption")};
  } else if (kind == "EditCaption") {
    cmd.payload = EditCaption{req_as<int>(p, "index", at), caption_from_json(req(p, "caption", at), at + ".caption")};
  } else if (kind == "RemoveCaption") {
    cmd.payload = RemoveCaption{req_as<int>(p, "index", at)};
  } else if (kind == "SplitAt") {
    cmd.payload = SplitAt{req_as<std::int64_t>(p, "frame", at)};
  } else if (kind == "InsertFreeze") {
    InsertFreeze f{req_as<std::int64_t>(p, "frame", at)};
    if (p.contains("duration")) f.duration = req_as<std::int64_t>(p, "duration", at);
    cmd.payload = f;
  } else if (kind == "SetSpeed") {
    cmd.payload = SetSpeed{req_as<int>(p, "segment_index", at), rational_from(req(p, "speed", at), at + ".speed")};
  } else if (kind == "SetMuted") {
    SetMuted m{req_as<int>(p, "segment_index", at)};
    if (p.contains("muted")) m.muted = req_as<bool>(p, "muted", at);
    cmd.payload = m;
  } else if (kind == "DuplicateSegment") {
    cmd.payload = DuplicateSegment{req_as<int>(p, "segment_index", at)};
  } else if (kind == "SetHomography") {
    cmd.payload = SetHomography{homography_from_json(req(p, "homography", at), at + ".homography")};
  } else if (kind == "RippleObjects") {
    cmd.payload = RippleObjects{req_as<std::int64_t>(p, "from_frame", at), req_as<std::int64_t>(p, "delta", at)};
  } else {
    fail(where + ".kind", "unknown command kind '" + kind + "'");
  }
  return cmd;
}

// ---------------------------------------------------------------------------

Session::Session(Project baseline, std::shared_ptr<const TrackingDataset> dataset)
    : baseline_(std::move(baseline)), project_(baseline_), dataset_(std::move(dataset)) {
  if (!dataset_) throw Error(ErrorCode::kInvalidArgument, "session: dataset is required");
}

namespace {

std::string fresh_object_id(const Project& p, ObjectKind kind, std::int64_t command_id) {
  std::string base(to_string(kind));
  std::transform(base.begin(), base.end(), base.begin(), [](unsigned char c) { return std::tolower(c); });
  base += "-" + std::to_string(command_id);
  std::string id = base;
  for (int k = 2; p.find_object(id) != nullptr; ++k) id = base + "-" + std::to_string(k);
  return id;
}

[[noreturn]] void reject(const std::string& message, std::vector<std::string> violations = {}) {
  if (violations.empty()) violations.push_back(message);
  throw CommandRejected(message, std::move(violations));
}

RenderObject& object_or_reject(Project& p, const std::string& id) {
  RenderObject* o = p.find_object(id);
  if (o == nullptr) reject("object_id: no object '" + id + "'");
  return *o;
}

void check_caption_index(const Project& p, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= p.captions.size()) {
    reject("index: caption index " + std::to_string(index) + " out of range");
  }
}

}  // namespace

Session::Entry Session::execute(Command cmd) const {
  Project p = project_;
  bool objects = false;
  bool captions = false;
  bool timeline = false;
  bool homography = false;

  auto edit_timeline = [&](auto&& op) {
    try {
      p.timeline = op(p.timeline);
    } catch (const Error& e) {
      reject(e.what());
    }
    sync_base_layers(p);
    timeline = true;
    objects = true;
  };

  std::visit(
      [&](auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AddObject>) {
          if (c.object.id.empty()) c.object.id = fresh_object_id(p, c.object.kind, cmd.id);
          if (p.find_object(c.object.id) != nullptr) reject("object.id: duplicate id '" + c.object.id + "'");
          p.objects.push_back(c.object);
          objects = true;
        } else if constexpr (std::is_same_v<T, RemoveObject>) {
          object_or_reject(p, c.object_id);
          std::erase_if(p.objects, [&](const RenderObject& o) { return o.id == c.object_id; });
          objects = true;
        } else if constexpr (std::is_same_v<T, MoveResizeObject>) {
          RenderObject& o = object_or_reject(p, c.object_id);
          o.start_frame = c.start_frame;
          o.end_frame = c.end_frame;
          objects = true;
        } else if constexpr (std::is_same_v<T, SetParams>) {
          RenderObject& o = object_or_reject(p, c.object_id);
          if (!params_match_kind(o.kind, c.params)) {
            reject("params: do not match kind " + std::string(to_string(o.kind)));
          }
          o.params = c.params;
          if (c.z) o.z = *c.z;
          objects = true;
        } else if constexpr (std::is_same_v<T, AddCaption>) {
          p.captions.push_back(c.caption);
          captions = true;
        } else if constexpr (std::is_same_v<T, EditCaption>) {
          check_caption_index(p, c.index);
          p.captions[static_cast<std::size_t>(c.index)] = c.caption;
          captions = true;
        } else if constexpr (std::is_same_v<T, RemoveCaption>) {
          check_caption_index(p, c.index);
          p.captions.erase(p.captions.begin() + c.index);
          captions = true;
        } else if constexpr (std::is_same_v<T, SplitAt>) {
          edit_timeline([&](const Timeline& tl) { return split_at(tl, c.frame); });
        } else if constexpr (std::is_same_v<T, InsertFreeze>) {
          edit_timeline([&](const Timeline& tl) { return insert_freeze(tl, c.frame, c.duration); });
        } else if constexpr (std::is_same_v<T, SetSpeed>) {
          edit_timeline([&](const Timeline& tl) { return set_speed(tl, c.segment_index, c.speed); });
        } else if constexpr (std::is_same_v<T, SetMuted>) {
          edit_timeline([&](const Timeline& tl) { return set_muted(tl, c.segment_index, c.muted); });
        } else if constexpr (std::is_same_v<T, DuplicateSegment>) {
          edit_timeline([&](const Timeline& tl) { return duplicate_segment(tl, c.segment_index); });
        } else if constexpr (std::is_same_v<T, SetHomography>) {
          if (!c.homography.invertible()) reject("homography: must be invertible");
          p.homography = c.homography;
          homography = true;
        } else {
          for (auto& o : p.objects) {
            if (o.kind == ObjectKind::kBackground || o.kind == ObjectKind::kForeground) continue;
            if (o.start_frame >= c.from_frame) {
              o.start_frame += c.delta;
              o.end_frame += c.delta;
            }
          }
          objects = true;
        }
      },
      cmd.payload);

  auto violations = validate_project(p, *dataset_);
  if (!violations.empty()) reject(std::string(cmd.kind_name()) + " would leave the project invalid", violations);

  Entry entry{std::move(cmd), {}, {}};
  if (timeline) {
    entry.before.timeline = project_.timeline;
    entry.after.timeline = p.timeline;
  }
  if (objects) {
    entry.before.objects = project_.objects;
    entry.after.objects = std::move(p.objects);
  }
  if (captions) {
    entry.before.captions = project_.captions;
    entry.after.captions = std::move(p.captions);
  }
  if (homography) {
    entry.before.homography = project_.homography;
    entry.after.homography = p.homography;
  }
  return entry;
}

void Session::restore(const ProjectDelta& delta) {
  if (delta.timeline) project_.timeline = *delta.timeline;
  if (delta.objects) project_.objects = *delta.objects;
  if (delta.captions) project_.captions = *delta.captions;
  if (delta.homography) project_.homography = *delta.homography;
  ++revision_;
}

Command Session::apply(Command cmd) {
  cmd.id = next_command_id_;
  Entry entry = execute(std::move(cmd));
  ++next_command_id_;
  restore(entry.after);
  Command applied = entry.command;
  undo_stack_.push_back(std::move(entry));
  redo_stack_.clear();
  return applied;
}

bool Session::undo() {
  if (undo_stack_.empty()) return false;
  Entry entry = std::move(undo_stack_.back());
  undo_stack_.pop_back();
  restore(entry.before);
  redo_stack_.push_back(std::move(entry));
  return true;
}

bool Session::redo() {
  if (redo_stack_.empty()) return false;
  Entry entry = std::move(redo_stack_.back());
  redo_stack_.pop_back();
  restore(entry.after);
  undo_stack_.push_back(std::move(entry));
  return true;
}

void Session::reset() {
  project_ = baseline_;
  undo_stack_.clear();
  redo_stack_.clear();
  ++revision_;
}

std::vector<Command> Session::command_log() const {
  std::vector<Command> log;
  log.reserve(undo_stack_.size());
  for (const auto& e : undo_stack_) log.push_back(e.command);
  return log;
}

json Session::to_json() const {
  json doc = courtviz::to_json(project_);
  doc["baseline"] = courtviz::to_json(baseline_);
  json log = json::array();
  for (const auto& e : undo_stack_) log.push_back(courtviz::to_json(e.command));
  doc["command_log"] = std::move(log);
  doc["last_command_id"] = undo_stack_.empty() ? 0 : undo_stack_.back().command.id;
  // Next command to redo first.
  json redo = json::array();
  for (auto it = redo_stack_.rbegin(); it != redo_stack_.rend(); ++it) redo.push_back(courtviz::to_json(it->command));
  doc["redo_log"] = std::move(redo);
  return doc;
}

Session Session::from_json(const json& doc, std::shared_ptr<const TrackingDataset> dataset) {
  if (!doc.is_object()) fail("session", "expected an object");
  json project_doc = doc;
  for (const auto& key : kSessionKeys) project_doc.erase(key);
  const Project saved = project_from_json(project_doc);
  const Project baseline = doc.contains("baseline") ? project_from_json(doc["baseline"]) : saved;

  Session session(baseline, std::move(dataset));
  auto replay = [&session](const json& entries, const char* name) {
    if (!entries.is_array()) fail(std::string("session.") + name, "expected an array");
    std::size_t applied = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string where = std::string(name) + "[" + std::to_string(i) + "]";
      Command cmd;
      try {
        cmd = command_from_json(entries[i], where);
      } catch (const Error& e) {
        std::string id = "?";
        if (entries[i].is_object() && entries[i].contains("id")) id = entries[i]["id"].dump();
        throw Error(ErrorCode::kParse, "command " + id + ": " + e.what());
      }
      if (cmd.id < session.next_command_id_) {
        throw Error(ErrorCode::kParse,
                    "command " + std::to_string(cmd.id) + ": " + where + ": ids must increase strictly");
      }
      session.next_command_id_ = cmd.id;
      try {
        session.apply(cmd);
      } catch (const CommandRejected& e) {
        std::string detail = e.what();
        for (const auto& v : e.violations()) detail += "; " + v;
        throw Error(ErrorCode::kValidation, "command " + std::to_string(cmd.id) + ": " + detail);
      }
      ++applied;
    }
    return applied;
  };

  replay(doc.contains("command_log") ? doc["command_log"] : json::array(), "command_log");
  const std::int64_t last = session.undo_stack_.empty() ? 0 : session.undo_stack_.back().command.id;
  if (doc.contains("last_command_id")) {
    const auto& expected = doc["last_command_id"];
    if (!expected.is_number_integer()) fail("session.last_command_id", "expected an integer");
    if (expected.get<std::int64_t>() != last) {
      throw Error(ErrorCode::kValidation, "command " + expected.dump() + ": missing from command_log (log ends at " +
                                              std::to_string(last) + ")");
    }
  }
  if (session.project_ != saved) {
    throw Error(ErrorCode::kValidation,
                "command " + std::to_string(last) + ": command_log does not reproduce the saved project");
  }
  const std::int64_t next_id = session.next_command_id_;
  const std::size_t redos = replay(doc.contains("redo_log") ? doc["redo_log"] : json::array(), "redo_log");
  for (std::size_t i = 0; i < redos; ++i) session.undo();
  session.next_command_id_ = std::max(next_id, session.next_command_id_);
  session.revision_ = 0;
  return session;
}

void Session::save(const std::filesystem::path& path) const {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  write_text_file(tmp, to_json().dump(2));
  std::filesystem::rename(tmp, path);
}

Session Session::load(const std::filesystem::path& path, std::shared_ptr<const TrackingDataset> dataset) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "session: parse error at byte " + std::to_string(e.byte));
  }
  return from_json(doc, std::move(dataset));
}

}  // namespace courtviz
