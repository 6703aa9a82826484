#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "autex/indexer.hpp"
#include "autex/vocabulary.hpp"

namespace autex {

enum class CompareMode { Exact, OrderInsensitive };
std::string_view to_string(CompareMode mode);
/// "exact" or "order-insensitive"; ParseError otherwise.
CompareMode parse_mode(std::string_view name);

struct ReferenceLine {
  Keychain keychain;
  bool irrelevant = false;
};

struct ReferenceReport {
  std::string source_id;  // empty when the file carries no `source:` line
  std::vector<ReferenceLine> keychains;
};

/// One keychain per line, optional leading "(0)", `#` comments, blank
/// lines ignored, optional `source: <id>` first line. Duplicate keychains
/// are a ParseError.
ReferenceReport parse_reference(std::string_view text);
std::string render_reference(const ReferenceReport& report);

struct KeychainPair {
  Keychain engine;
  Keychain reference;
};

struct ComparisonResult {
  std::vector<KeychainPair> matched;
  std::vector<Keychain> engine_only;
  std::vector<Keychain> reference_only;
  /// Unmatched pairs sharing at least one keyword. Not scored.
  std::vector<KeychainPair> partial_overlaps;
  double precision = 0.0;
  double recall = 0.0;
  CompareMode mode = CompareMode::Exact;
};

/// Identity of a keychain under a mode.
std::string compare_key(const Keychain& k, CompareMode mode);

/// Core comparison over plain lists; `reference` holds relevant keychains only.
ComparisonResult compare_keychains(const std::vector<Keychain>& engine, const std::vector<Keychain>& reference,
                                   CompareMode mode);

struct CompareOptions {
  CompareMode mode = CompareMode::Exact;
  bool include_manual = false;
};

/// Rejected engine keychains and irrelevant reference keychains are left out.
/// Throws SourceMismatch when both ids are set and differ.
ComparisonResult compare(const IndexReport& engine, const ReferenceReport& reference,
                         const CompareOptions& options = {});
/// Same, engine side given as a plain list (e.g. a transcribed report).
ComparisonResult compare(const ReferenceReport& engine, const ReferenceReport& reference,
                         const CompareOptions& options = {});

struct CorpusMetrics {
  std::size_t documents = 0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
};

/// Throws EmptyCorpus on an empty list.
CorpusMetrics corpus_metrics(const std::vector<ComparisonResult>& results);

/// Three-zone text: matched `engine\treference`, engine-only `engine\t`,
/// a `---` line, reference-only `\treference`, then the summary line.
std::string render_comparison(const ComparisonResult& result);
std::string summary_line(const ComparisonResult& result);

}  // namespace autex
