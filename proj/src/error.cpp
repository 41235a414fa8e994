#include "mtbench/error.hpp"

namespace mtbench {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingFile: return "MissingFile";
    case ErrorKind::kMisalignedCorpus: return "MisalignedCorpus";
    case ErrorKind::kMalformedMetadata: return "MalformedMetadata";
    case ErrorKind::kUnknownLanguage: return "UnknownLanguage";
    case ErrorKind::kInvalidBoundaries: return "InvalidBoundaries";
    case ErrorKind::kAllEmpty: return "AllEmpty";
    case ErrorKind::kNonpositiveTemperature: return "NonpositiveTemperature";
    case ErrorKind::kVocabTooSmall: return "VocabTooSmall";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kUnknownPieceId: return "UnknownPieceId";
    case ErrorKind::kMalformedModel: return "MalformedModel";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kEmptyReference: return "EmptyReference";
    case ErrorKind::kTooFew: return "TooFew";
    case ErrorKind::kMissingEngineOutput: return "MissingEngineOutput";
    case ErrorKind::kEmptySource: return "EmptySource";
    case ErrorKind::kUntrainedModel: return "UntrainedModel";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kEmptyBatch: return "EmptyBatch";
    case ErrorKind::kIllegalTransition: return "IllegalTransition";
    case ErrorKind::kMalformedLog: return "MalformedLog";
    case ErrorKind::kMisalignedHypothesis: return "MisalignedHypothesis";
    case ErrorKind::kUnknownDirection: return "UnknownDirection";
    case ErrorKind::kMissingMeta: return "MissingMeta";
    case ErrorKind::kDegenerateMatrix: return "DegenerateMatrix";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kMalformedMatrix: return "MalformedMatrix";
    case ErrorKind::kUnsupportedDirection: return "UnsupportedDirection";
    case ErrorKind::kLineCountMismatch: return "LineCountMismatch";
    case ErrorKind::kPayloadTooLarge: return "PayloadTooLarge";
    case ErrorKind::kMalformedRequest: return "MalformedRequest";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mtbench
