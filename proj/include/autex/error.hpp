#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autex {

enum class ErrorKind {
  EmptyKeyword,
  InvalidKeyword,
  InvalidFilter,
  UnknownKeyword,
  EmptyKeychain,
  EmptyPattern,
  UnknownKeychain,
  UnbalancedMath,
  DuplicateAlternative,
  UnknownEntry,
  MalformedTex,
  UnsupportedConstruct,
  EmptyApd,
  UnknownKeychainInReport,
  SourceMismatch,
  ParseError,
  EmptyCorpus,
  StoreLocked,
  CorruptStore,
  UnknownArticle,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library. `kind()` is stable and is what
/// the CLI and the HTTP layer map onto exit codes and status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace autex
