#include "autex/error.hpp"

namespace autex {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyKeyword: return "EmptyKeyword";
    case ErrorKind::InvalidKeyword: return "InvalidKeyword";
    case ErrorKind::InvalidFilter: return "InvalidFilter";
    case ErrorKind::UnknownKeyword: return "UnknownKeyword";
    case ErrorKind::EmptyKeychain: return "EmptyKeychain";
    case ErrorKind::EmptyPattern: return "EmptyPattern";
    case ErrorKind::UnknownKeychain: return "UnknownKeychain";
    case ErrorKind::UnbalancedMath: return "UnbalancedMath";
    case ErrorKind::DuplicateAlternative: return "DuplicateAlternative";
    case ErrorKind::UnknownEntry: return "UnknownEntry";
    case ErrorKind::MalformedTex: return "MalformedTex";
    case ErrorKind::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorKind::EmptyApd: return "EmptyApd";
    case ErrorKind::UnknownKeychainInReport: return "UnknownKeychainInReport";
    case ErrorKind::SourceMismatch: return "SourceMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::StoreLocked: return "StoreLocked";
    case ErrorKind::CorruptStore: return "CorruptStore";
    case ErrorKind::UnknownArticle: return "UnknownArticle";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace autex
