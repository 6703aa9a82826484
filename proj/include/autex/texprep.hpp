#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace autex {

/// The six document-part selectors, in canonical order.
enum class Pointer { Title, Abstract, Caption, Section, Conclusions, FullText };

inline constexpr std::array<Pointer, 6> kAllPointers = {
    Pointer::Title,   Pointer::Abstract,    Pointer::Caption,
    Pointer::Section, Pointer::Conclusions, Pointer::FullText};

std::string_view to_string(Pointer p);
std::optional<Pointer> parse_pointer(std::string_view name);

using PointerSet = std::set<Pointer>;

/// Parses "title,abstract" style lists. Throws ParseError naming the legal
/// values on an unknown name.
PointerSet parse_pointer_list(std::string_view list);
/// Comma-separated names in canonical order, no blanks.
std::string render_pointer_list(const PointerSet& pointers);

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct TextSlice {
  std::string text;   // UTF-8, pruned
  Pointer origin;
  Span span;          // scalar offsets into the document's pruned stream
  std::size_t ordinal = 0;
};

struct DocumentParts {
  std::string source_id;
  /// The whole pruned stream that every slice span points into.
  std::string stream;
  std::map<Pointer, std::vector<TextSlice>> slices;

  const std::vector<TextSlice>& of(Pointer p) const;
};

/// Locates the requested parts of a TeX source and prunes them. A pointer
/// without a matching construct yields no slices. Throws MalformedTex.
DocumentParts extract_parts(std::string_view tex_source, const PointerSet& pointers,
                            std::string source_id = {});

/// Removes comments and formatting markup, keeping visible text and `$...$`
/// math (display math is rewritten inline). Throws MalformedTex on
/// unbalanced braces outside math.
std::string prune_tex(std::string_view raw);

/// Canonical token rendering of a math segment interior.
std::string normalize_math(std::string_view segment);

/// Section titles that mark a conclusions section (matched as folded
/// substrings of the pruned title).
inline constexpr std::array<std::string_view, 4> kConclusionTitles = {
    "conclusion", "conclusions", "concluding remarks", "summary and conclusions"};

}  // namespace autex
