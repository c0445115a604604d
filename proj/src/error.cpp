#include "iotsense/error.hpp"

namespace iotsense {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedLinkType: return "UnsupportedLinkType";
    case ErrorKind::TruncatedHeader: return "TruncatedHeader";
    case ErrorKind::TruncatedRecord: return "TruncatedRecord";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::ManifestError: return "ManifestError";
    case ErrorKind::AllMissing: return "AllMissing";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::UnknownFeature: return "UnknownFeature";
    case ErrorKind::TooFewDevices: return "TooFewDevices";
    case ErrorKind::DegenerateFold: return "DegenerateFold";
    case ErrorKind::EmptyPoolAfterScreening: return "EmptyPoolAfterScreening";
    case ErrorKind::ModelWidthMismatch: return "ModelWidthMismatch";
    case ErrorKind::ModelFormat: return "ModelFormat";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace iotsense
