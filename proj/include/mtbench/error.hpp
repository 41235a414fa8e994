#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtbench {

enum class ErrorKind {
  kMissingFile,
  kMisalignedCorpus,
  kMalformedMetadata,
  kUnknownLanguage,
  kInvalidBoundaries,
  kAllEmpty,
  kNonpositiveTemperature,
  kVocabTooSmall,
  kEmptyCorpus,
  kUnknownPieceId,
  kMalformedModel,
  kLengthMismatch,
  kEmptyInput,
  kEmptyReference,
  kTooFew,
  kMissingEngineOutput,
  kEmptySource,
  kUntrainedModel,
  kOutOfRange,
  kEmptyBatch,
  kIllegalTransition,
  kMalformedLog,
  kMisalignedHypothesis,
  kUnknownDirection,
  kMissingMeta,
  kDegenerateMatrix,
  kShapeMismatch,
  kMalformedMatrix,
  kUnsupportedDirection,
  kLineCountMismatch,
  kPayloadTooLarge,
  kMalformedRequest,
  kInvalidArgument,
  kIoError,
};

// Stable machine-readable name, e.g. "MisalignedCorpus".
std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mtbench
