#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace navkit {

enum class ErrorCode {
  DecodeError,
  BadMetadata,
  DegenerateField,
  NoMarkers,
  NoWalkableSpace,
  NoSamplableArea,
  EmptyRoom,
  ParseFailure,
  BackendError,
  NoPath,
  NoFreeCell,
  EmptyMask,
  AllDepthInvalid,
  SchemaError,
  StartInWall,
  EpisodeOver,
  EmptyBatch,
  InvalidArgument,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::BadMetadata: return "BadMetadata";
    case ErrorCode::DegenerateField: return "DegenerateField";
    case ErrorCode::NoMarkers: return "NoMarkers";
    case ErrorCode::NoWalkableSpace: return "NoWalkableSpace";
    case ErrorCode::NoSamplableArea: return "NoSamplableArea";
    case ErrorCode::EmptyRoom: return "EmptyRoom";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::NoFreeCell: return "NoFreeCell";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::AllDepthInvalid: return "AllDepthInvalid";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::StartInWall: return "StartInWall";
    case ErrorCode::EpisodeOver: return "EpisodeOver";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by navkit carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace navkit
