#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "courtviz/error.hpp"
#include "courtviz/model.hpp"

namespace courtviz {

struct AddObject {
  RenderObject object;  // an empty id is assigned on apply
  friend bool operator==(const AddObject&, const AddObject&) = default;
};
struct RemoveObject {
  std::string object_id;
  friend bool operator==(const RemoveObject&, const RemoveObject&) = default;
};
struct MoveResizeObject {
  std::string object_id;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 1;
  friend bool operator==(const MoveResizeObject&, const MoveResizeObject&) = default;
};
struct SetParams {
  std::string object_id;
  EffectParams params;
  std::optional<int> z;
  friend bool operator==(const SetParams&, const SetParams&) = default;
};
struct AddCaption {
  Caption caption;
  friend bool operator==(const AddCaption&, const AddCaption&) = default;
};
struct EditCaption {
  int index = 0;
  Caption caption;
  friend bool operator==(const EditCaption&, const EditCaption&) = default;
};
struct RemoveCaption {
  int index = 0;
  friend bool operator==(const RemoveCaption&, const RemoveCaption&) = default;
};
struct SplitAt {
  std::int64_t frame = 0;
  friend bool operator==(const SplitAt&, const SplitAt&) = default;
};
struct InsertFreeze {
  std::int64_t frame = 0;
  std::int64_t duration = kDefaultFreezeFrames;
  friend bool operator==(const InsertFreeze&, const InsertFreeze&) = default;
};
struct SetSpeed {
  int segment_index = 0;
  Rational speed{1};
  friend bool operator==(const SetSpeed&, const SetSpeed&) = default;
};
struct SetMuted {
  int segment_index = 0;
  bool muted = true;
  friend bool operator==(const SetMuted&, const SetMuted&) = default;
};
struct DuplicateSegment {
  int segment_index = 0;
  friend bool operator==(const DuplicateSegment&, const DuplicateSegment&) = default;
};
struct SetHomography {
  Homography homography;
  friend bool operator==(const SetHomography&, const SetHomography&) = default;
};
/// Shifts every user object starting at or after from_frame by delta frames.
struct RippleObjects {
  std::int64_t from_frame = 0;
  std::int64_t delta = 0;
  friend bool operator==(const RippleObjects&, const RippleObjects&) = default;
};

using CommandPayload =
    std::variant<AddObject, RemoveObject, MoveResizeObject, SetParams, AddCaption, EditCaption, RemoveCaption,
                 SplitAt, InsertFreeze, SetSpeed, SetMuted, DuplicateSegment, SetHomography, RippleObjects>;

struct Command {
  std::int64_t id = 0;  // assigned by the session
  CommandPayload payload;

  std::string_view kind_name() const;
  friend bool operator==(const Command&, const Command&) = default;
};

nlohmann::json to_json(const Command& command);
/// Accepts `{"kind": ..., "payload": {...}}` with an optional `id`.
Command command_from_json(const nlohmann::json& doc, const std::string& where = "command");

/// Thrown when a command would leave the project invalid. The session is
/// unchanged when this escapes.
class CommandRejected : public Error {
 public:
  CommandRejected(std::string message, std::vector<std::string> violations)
      : Error(ErrorCode::kValidation, std::move(message)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Pre- or post-image of the parts of a project a command touched.
struct ProjectDelta {
  std::optional<Timeline> timeline;
  std::optional<std::vector<RenderObject>> objects;
  std::optional<std::vector<Caption>> captions;
  std::optional<Homography> homography;
};

/// Editing document controller with linear undo/redo and reset to the
/// imported state. Not thread-safe: one owner serializes all mutations.
class Session {
 public:
  Session(Project baseline, std::shared_ptr<const TrackingDataset> dataset);

  const Project& project() const { return project_; }
  const Project& baseline() const { return baseline_; }
  const TrackingDataset& dataset() const { return *dataset_; }
  std::shared_ptr<const TrackingDataset> dataset_ptr() const { return dataset_; }

  /// Applies cmd and returns it with its assigned id (and object id, for
  /// AddObject). Throws CommandRejected leaving the session untouched.
  Command apply(Command cmd);

  /// False (and no change) when the respective stack is empty.
  bool undo();
  bool redo();
  void reset();

  std::size_t undo_depth() const { return undo_stack_.size(); }
  std::size_t redo_depth() const { return redo_stack_.size(); }
  /// Bumped by every change to the project.
  std::int64_t revision() const { return revision_; }

  /// Applied commands, oldest first.
  std::vector<Command> command_log() const;

  nlohmann::json to_json() const;
  static Session from_json(const nlohmann::json& doc, std::shared_ptr<const TrackingDataset> dataset);
  void save(const std::filesystem::path& path) const;
  static Session load(const std::filesystem::path& path, std::shared_ptr<const TrackingDataset> dataset);

 private:
  struct Entry {
    Command command;
    ProjectDelta before;
    ProjectDelta after;
  };

  Entry execute(Command cmd) const;
  void restore(const ProjectDelta& delta);

  Project baseline_;
  Project project_;
  std::shared_ptr<const TrackingDataset> dataset_;
  std::vector<Entry> undo_stack_;
  std::vector<Entry> redo_stack_;
  std::int64_t next_command_id_ = 1;
  std::int64_t revision_ = 0;
};

}  // namespace courtviz
