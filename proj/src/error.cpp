#include "courtviz/error.hpp"
#include "courtviz/video_meta.hpp"

namespace courtviz {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kUnsupportedVersion: return "unsupported_version";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kValidation: return "validation_failed";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

std::vector<std::string> meta_violations(const VideoMeta& meta, const std::string& prefix) {
  std::vector<std::string> out;
  if (meta.width < 16) out.push_back(prefix + ".width: must be at least 16");
  if (meta.height < 16) out.push_back(prefix + ".height: must be at least 16");
  if (meta.width % 2 != 0) out.push_back(prefix + ".width: must be even");
  if (meta.height % 2 != 0) out.push_back(prefix + ".height: must be even");
  if (meta.fps.num() <= 0) out.push_back(prefix + ".fps: must be positive");
  if (meta.frame_count < 1) out.push_back(prefix + ".frame_count: must be at least 1");
  return out;
}

}  // namespace courtviz
