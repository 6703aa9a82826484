#pragma once

#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "autex/vocabulary.hpp"

namespace autex {

/// One entry of the Associative Patterns Dictionary: equivalent phrasings
/// (alternatives) of one idea, bound to the keychains that index it.
struct ApdEntry {
  std::string id;
  std::vector<std::string> alternatives;
  std::vector<Keychain> keychains;
  std::optional<std::string> note;

  friend bool operator==(const ApdEntry& a, const ApdEntry& b);
};

/// Splits on the top-level alternation bar. A `|` inside `$...$` never
/// splits. Pieces are trimmed. Throws UnbalancedMath.
std::vector<std::string> split_alternatives(std::string_view pattern);

/// Structural checks: at least one alternative and keychain, no empty
/// alternative, balanced math, pairwise-distinct alternatives.
void validate_entry(const ApdEntry& entry);

/// Key used to compare alternatives for duplication: folded, whitespace
/// collapsed, math segments normalized.
std::string alternative_key(std::string_view alternative);

struct LintFinding {
  enum class Kind { DuplicateAlternative, CompileFailure };
  Kind kind;
  std::vector<std::string> entry_ids;
  std::string message;
  bool fatal() const { return kind == Kind::CompileFailure; }
};

std::string_view to_string(LintFinding::Kind kind);

/// Reports alternatives shared between entries and entries that do not
/// compile.
std::vector<LintFinding> lint_apd(const std::vector<ApdEntry>& entries);

class Apd {
 public:
  Apd() = default;
  Apd(const Apd& other);
  Apd& operator=(const Apd& other);

  /// Each input string may carry several alternatives joined by `|`.
  /// Keychains must be known to `vocabulary` (UnknownKeychain).
  ApdEntry add_entry(const std::vector<std::string>& patterns, const std::vector<Keychain>& keychains,
                     const Vocabulary& vocabulary, std::optional<std::string> note = {});

  /// Inserts a fully formed entry (file ingestion). Generates an id when
  /// the entry has none; rejects duplicate ids.
  ApdEntry insert(ApdEntry entry);
  /// Replaces alternatives/keychains/note of an existing entry in place.
  ApdEntry replace(const std::string& id, const std::vector<std::string>& patterns,
                   const std::vector<Keychain>& keychains, const Vocabulary& vocabulary,
                   std::optional<std::string> note = {});
  void remove(const std::string& id);
  std::optional<ApdEntry> find(const std::string& id) const;

  /// Keychain selector keeps entries sharing at least one keychain;
  /// letter/prefix apply to the first alternative. Filters intersect.
  std::vector<ApdEntry> filter_entries(const VocabularyFilter& filter) const;
  std::vector<ApdEntry> entries() const;
  std::size_t size() const;

  friend bool operator==(const Apd& a, const Apd& b) { return a.entries() == b.entries(); }

 private:
  std::string next_id_locked() const;

  mutable std::shared_mutex mutex_;
  std::vector<ApdEntry> entries_;
};

/// APD file format. Throws ParseError with a line number.
std::vector<ApdEntry> parse_apd(std::string_view text);
std::string render_apd(const std::vector<ApdEntry>& entries);
std::string render_entry(const ApdEntry& entry);

}  // namespace autex
