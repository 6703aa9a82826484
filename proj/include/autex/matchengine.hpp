#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "autex/apd.hpp"
#include "autex/texprep.hpp"

namespace autex {

inline constexpr std::size_t kDefaultGapBound = 64;

/// One match instruction over the folded scalar stream of a slice.
struct MatchInstr {
  enum class Kind : std::uint8_t {
    Char,       // literal, case-folded
    WordClass,  // \w
    Class,      // [...]
    Separator,  // one or more blanks/hyphens
    Math,       // a whole $...$ segment with equal normalized form
  };
  Kind kind = Kind::Char;
  char32_t ch = 0;
  std::u32string class_chars;                          // Class: literal members
  std::vector<std::pair<char32_t, char32_t>> ranges;   // Class: a-z ranges
  bool class_word = false;                             // Class: contains \w
  bool class_space = false;                            // Class: contains a blank
  std::string math;                                    // Math: normalized form
  std::uint32_t min = 1;
  std::uint32_t max = 1;  // kUnbounded for + and *
  static constexpr std::uint32_t kUnbounded = UINT32_MAX;

  bool single_char() const { return kind == Kind::Char || kind == Kind::WordClass || kind == Kind::Class; }
};

struct CompiledAlternative {
  std::string source;
  std::vector<MatchInstr> program;
  bool plain = true;  // only literal words and separators
};

struct CompiledEntry {
  std::string entry_id;
  std::vector<CompiledAlternative> matchers;
};

/// Compiles one alternative. Throws UnsupportedConstruct / UnbalancedMath /
/// EmptyPattern.
CompiledAlternative compile_alternative(std::string_view source);
/// Total or nothing: the first failing alternative rejects the entry, and
/// the error message names it.
CompiledEntry compile_entry(const ApdEntry& entry);

struct MatchHit {
  std::string entry_id;
  std::size_t alternative_index = 0;
  Pointer origin = Pointer::FullText;
  std::size_t slice_ordinal = 0;
  Span span;  // scalar offsets within the slice text

  friend bool operator==(const MatchHit&, const MatchHit&) = default;
};

struct MatchOptions {
  std::size_t gap_bound = kDefaultGapBound;
};

/// A slice prepared for matching: folded text plus math-segment table.
class PreparedSlice {
 public:
  explicit PreparedSlice(const TextSlice& slice);

  const TextSlice& slice() const { return *slice_; }
  std::size_t size() const { return folded_.size(); }
  char32_t at(std::size_t i) const { return folded_[i]; }
  bool in_math(std::size_t i) const { return math_end_[i] != 0 || inside_math_[i]; }
  bool math_starts(std::size_t i) const { return math_end_[i] != 0; }
  std::size_t math_end(std::size_t i) const { return math_end_[i]; }
  const std::string& math_form(std::size_t i) const;
  bool word_at(std::size_t i) const;

 private:
  const TextSlice* slice_;
  std::u32string folded_;
  std::vector<std::size_t> math_end_;  // at a `$` opener: offset after the closer
  std::vector<bool> inside_math_;
  std::vector<std::pair<std::size_t, std::string>> math_forms_;
};

/// All non-overlapping leftmost-longest matches of one alternative.
std::vector<Span> find_matches(const CompiledAlternative& alternative, const PreparedSlice& slice,
                               const MatchOptions& options = {});

/// Serial reference kernel. Hits are ordered by span start, then entry
/// order, then alternative index.
std::vector<MatchHit> match_slice_serial(const std::vector<CompiledEntry>& compiled,
                                         const TextSlice& slice, const MatchOptions& options = {});

/// OpenMP kernel over alternatives; same result as the serial kernel.
std::vector<MatchHit> match_slice_parallel(const std::vector<CompiledEntry>& compiled,
                                           const TextSlice& slice, const MatchOptions& options = {});

std::vector<MatchHit> match_slice(const std::vector<CompiledEntry>& compiled, const TextSlice& slice,
                                  const MatchOptions& options = {});

/// Hits over all requested pointers, ordered by pointer, slice ordinal and
/// span start.
std::vector<MatchHit> match_document(const std::vector<CompiledEntry>& compiled,
                                     const DocumentParts& parts, const MatchOptions& options = {});

}  // namespace autex
