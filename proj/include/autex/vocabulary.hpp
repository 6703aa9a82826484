#pragma once

#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace autex {

/// A controlled-vocabulary term in canonical form: trimmed, internal
/// whitespace collapsed, case preserved.
class Keyword {
 public:
  /// Throws EmptyKeyword / InvalidKeyword.
  explicit Keyword(std::string_view text);

  const std::string& text() const noexcept { return text_; }
  /// Case-folded form; the identity used for deduplication.
  std::string key() const;

  friend bool operator==(const Keyword& a, const Keyword& b);

 private:
  std::string text_;
};

/// Ordered sequence of keywords, the unit assigned to documents. Equality is
/// order-sensitive and case-insensitive per keyword.
class Keychain {
 public:
  /// Throws EmptyKeychain when `keywords` is empty.
  explicit Keychain(std::vector<Keyword> keywords);

  const std::vector<Keyword>& keywords() const noexcept { return keywords_; }
  std::size_t size() const noexcept { return keywords_.size(); }

  /// Keyword texts joined by ", ".
  std::string render() const;
  /// Folded rendering; equal keys <=> equal keychains.
  std::string key() const;

  friend bool operator==(const Keychain& a, const Keychain& b) { return a.key() == b.key(); }
  friend bool operator<(const Keychain& a, const Keychain& b) { return a.key() < b.key(); }

 private:
  std::vector<Keyword> keywords_;
};

/// Parses a keychain rendering. Lenient on the delimiter (comma with or
/// without a following blank); empty segments are skipped. Commas inside
/// `$...$` do not split. Throws EmptyKeychain when nothing remains.
Keychain parse_keychain(std::string_view rendering);

struct VocabularyFilter {
  std::optional<char32_t> letter;
  std::optional<std::string> prefix;
  /// Only consulted by APD queries.
  std::optional<std::vector<Keychain>> keychain_selector;

  /// Throws InvalidFilter when the letter is not alphabetic or the prefix
  /// is shorter than two characters.
  void validate() const;
  bool accepts(std::string_view text) const;
  bool empty() const noexcept { return !letter && !prefix && !keychain_selector; }
};

/// Keyword and keychain store. Readers share, writers are exclusive.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(const Vocabulary& other);
  Vocabulary& operator=(const Vocabulary& other);

  /// Idempotent for case-insensitive duplicates: returns the stored entry.
  Keyword add_keyword(std::string_view text);
  std::optional<Keyword> find_keyword(std::string_view text) const;
  bool contains(const Keyword& keyword) const;

  /// Sorted case-insensitively ascending.
  std::vector<Keyword> filter_keywords(const VocabularyFilter& filter) const;
  std::vector<Keyword> keywords() const { return filter_keywords({}); }

  /// Manager path: every keyword must already exist (UnknownKeyword).
  /// Keyword texts are resolved to their stored spelling.
  Keychain make_keychain(const std::vector<std::string>& keywords);
  /// Ingestion path: parses the rendering and creates unknown keywords.
  Keychain ingest_keychain(std::string_view rendering);
  bool contains(const Keychain& keychain) const;

  /// Stored keychains whose rendering passes the letter/prefix filter,
  /// sorted like keywords.
  std::vector<Keychain> filter_keychains(const VocabularyFilter& filter) const;
  std::vector<Keychain> keychains() const { return filter_keychains({}); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b);

 private:
  Keyword add_keyword_locked(std::string_view text);

  mutable std::shared_mutex mutex_;
  std::map<std::string, Keyword> keywords_;    // folded -> canonical
  std::map<std::string, Keychain> keychains_;  // folded rendering -> keychain
};

// Keyword list and keychain list files: one item per line, `#` comments and
// blank lines ignored.
std::vector<std::string> parse_list_file(std::string_view text);
std::string render_keyword_file(const Vocabulary& vocabulary);
std::string render_keychain_file(const Vocabulary& vocabulary);

}  // namespace autex
