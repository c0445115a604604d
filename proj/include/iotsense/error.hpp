#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iotsense {

enum class ErrorKind {
  BadMagic,
  UnsupportedLinkType,
  TruncatedHeader,
  TruncatedRecord,
  SchemaError,
  EmptyManifest,
  ManifestError,
  AllMissing,
  SingleClass,
  WidthMismatch,
  UnknownFeature,
  TooFewDevices,
  DegenerateFold,
  EmptyPoolAfterScreening,
  ModelWidthMismatch,
  ModelFormat,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported through this type.
/// The message is prefixed with the kind name so a single `what()` line is a
/// complete diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace iotsense
