#include "autex/matchengine.hpp"

#include <algorithm>
#include <tuple>

#include "autex/error.hpp"
#include "autex/text.hpp"

namespace autex {

namespace {

bool is_separator_char(char32_t c) { return text::is_space(c) || c == U'-' || c == 0x2013 || c == 0x2014; }

[[noreturn]] void unsupported(std::string_view source, const std::string& what) {
  throw Error(ErrorKind::UnsupportedConstruct, what + " in pattern '" + std::string(source) + "'");
}

MatchInstr parse_class(std::string_view source, const std::u32string& s, std::size_t& i) {
  MatchInstr instr;
  instr.kind = MatchInstr::Kind::Class;
  ++i;  // '['
  if (i < s.size() && s[i] == U'^') unsupported(source, "negated character class");
  bool empty = true;
  while (true) {
    if (i >= s.size()) unsupported(source, "unterminated character class");
    char32_t c = s[i];
    if (c == U']') {
      ++i;
      break;
    }
    empty = false;
    if (c == U'[') unsupported(source, "nested character class");
    if (c == U'\\') {
      if (i + 1 >= s.size()) unsupported(source, "unterminated character class");
      const char32_t e = s[i + 1];
      i += 2;
      if (e == U'w') {
        instr.class_word = true;
        continue;
      }
      if (text::is_word_char(e)) unsupported(source, std::string("escape \\") + static_cast<char>(e));
      instr.class_chars.push_back(e);
      continue;
    }
    if (text::is_space(c)) {
      instr.class_space = true;
      ++i;
      continue;
    }
    if (i + 2 < s.size() && s[i + 1] == U'-' && s[i + 2] != U']') {
      const char32_t lo = text::fold(c);
      const char32_t hi = text::fold(s[i + 2]);
      if (hi < lo) unsupported(source, "reversed class range");
      instr.ranges.emplace_back(lo, hi);
      i += 3;
      continue;
    }
    instr.class_chars.push_back(text::fold(c));
    ++i;
  }
  if (empty) unsupported(source, "empty character class");
  return instr;
}

bool char_matches(const MatchInstr& instr, char32_t c) {
  switch (instr.kind) {
    case MatchInstr::Kind::Char:
      return c == instr.ch;
    case MatchInstr::Kind::WordClass:
      return text::is_word_char(c);
    case MatchInstr::Kind::Class:
      if (instr.class_word && text::is_word_char(c)) return true;
      if (instr.class_space && text::is_space(c)) return true;
      if (instr.class_chars.find(c) != std::u32string::npos) return true;
      for (auto [lo, hi] : instr.ranges)
        if (c >= lo && c <= hi) return true;
      return false;
    default:
      return false;
  }
}

}  // namespace

CompiledAlternative compile_alternative(std::string_view raw) {
  const auto source = text::trim(raw);
  if (source.empty()) throw Error(ErrorKind::EmptyPattern, "empty alternative");
  CompiledAlternative out;
  out.source = std::string(source);
  const auto s = text::decode_utf8(source);
  auto& prog = out.program;

  for (std::size_t i = 0; i < s.size();) {
    const char32_t c = s[i];
    if (c == U'$') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != U'$') j += (s[j] == U'\\') ? 2 : 1;
      if (j >= s.size())
        throw Error(ErrorKind::UnbalancedMath, "unbalanced '$' in pattern '" + out.source + "'");
      MatchInstr instr;
      instr.kind = MatchInstr::Kind::Math;
      instr.math = normalize_math(text::encode_utf8(s.substr(i + 1, j - i - 1)));
      prog.push_back(std::move(instr));
      out.plain = false;
      i = j + 1;
      continue;
    }
    if (is_separator_char(c)) {
      std::size_t j = i;
      while (j < s.size() && is_separator_char(s[j])) ++j;
      const bool interior = !prog.empty() && j < s.size();
      if (interior) {
        if (s[j] == U'?' || s[j] == U'+' || s[j] == U'*') unsupported(source, "quantified separator");
        MatchInstr instr;
        instr.kind = MatchInstr::Kind::Separator;
        instr.max = MatchInstr::kUnbounded;
        prog.push_back(instr);
      } else {
        for (std::size_t k = i; k < j; ++k)
          if (!text::is_space(s[k])) prog.push_back({MatchInstr::Kind::Char, s[k]});
      }
      i = j;
      continue;
    }
    switch (c) {
      case U'[':
        prog.push_back(parse_class(source, s, i));
        out.plain = false;
        continue;
      case U'\\': {
        if (i + 1 >= s.size()) unsupported(source, "trailing backslash");
        const char32_t e = s[i + 1];
        if (e == U'w') {
          prog.push_back({MatchInstr::Kind::WordClass});
        } else if (e >= U'1' && e <= U'9') {
          unsupported(source, "backreference");
        } else if (text::is_word_char(e)) {
          unsupported(source, std::string("escape \\") + text::encode_utf8(std::u32string(1, e)));
        } else {
          prog.push_back({MatchInstr::Kind::Char, text::fold(e)});
        }
        out.plain = false;
        i += 2;
        continue;
      }
      case U'?':
      case U'+':
      case U'*': {
        if (prog.empty() || !prog.back().single_char() || prog.back().min != 1 || prog.back().max != 1)
          unsupported(source, std::string("misplaced quantifier '") + static_cast<char>(c) + "'");
        auto& last = prog.back();
        last.min = (c == U'+') ? 1 : 0;
        last.max = (c == U'?') ? 1 : MatchInstr::kUnbounded;
        out.plain = false;
        ++i;
        continue;
      }
      case U'(':
      case U')':
        unsupported(source, "grouping parentheses (escape them as \\( \\))");
      case U'{':
      case U'}':
        unsupported(source, "interval braces");
      case U'^':
        unsupported(source, "anchor '^'");
      case U'.':
        unsupported(source, "wildcard '.' (escape it as \\.)");
      case U'|':
        unsupported(source, "alternation inside an alternative");
      default:
        prog.push_back({MatchInstr::Kind::Char, text::fold(c)});
        ++i;
    }
  }
  if (prog.empty()) throw Error(ErrorKind::EmptyPattern, "pattern '" + out.source + "' is empty");
  return out;
}

CompiledEntry compile_entry(const ApdEntry& entry) {
  CompiledEntry out;
  out.entry_id = entry.id;
  for (std::size_t i = 0; i < entry.alternatives.size(); ++i) {
    try {
      out.matchers.push_back(compile_alternative(entry.alternatives[i]));
    } catch (const Error& e) {
      throw Error(e.kind(), "alternative " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (out.matchers.empty()) throw Error(ErrorKind::EmptyPattern, "entry " + entry.id + " has no alternatives");
  return out;
}

PreparedSlice::PreparedSlice(const TextSlice& slice) : slice_(&slice) {
  const auto raw = text::decode_utf8(slice.text);
  folded_ = text::fold(raw);
  math_end_.assign(raw.size(), 0);
  inside_math_.assign(raw.size(), false);
  std::size_t open = std::u32string::npos;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == U'\\') {
      ++i;
      continue;
    }
    if (raw[i] != U'$') continue;
    if (open == std::u32string::npos) {
      open = i;
    } else {
      math_end_[open] = i + 1;
      for (std::size_t k = open; k <= i; ++k) inside_math_[k] = true;
      math_forms_.emplace_back(open, normalize_math(text::encode_utf8(raw.substr(open + 1, i - open - 1))));
      open = std::u32string::npos;
    }
  }
}

const std::string& PreparedSlice::math_form(std::size_t i) const {
  static const std::string kNone;
  for (const auto& [at, form] : math_forms_)
    if (at == i) return form;
  return kNone;
}

bool PreparedSlice::word_at(std::size_t i) const {
  return i < folded_.size() && !in_math(i) && text::is_word_char(folded_[i]);
}

namespace {

// Explores the alternative's program from `start` and returns the longest
// accepted end, or npos.
class Search {
 public:
  Search(const CompiledAlternative& alt, const PreparedSlice& slice, std::size_t gap_bound)
      : prog_(alt.program), slice_(slice), gap_bound_(gap_bound),
        width_(slice.size() + 1), stamp_((prog_.size() + 1) * width_, 0) {}

  std::size_t longest_from(std::size_t start) {
    ++generation_;
    best_ = std::string::npos;
    start_ = start;
    stack_.clear();
    push(0, start);
    while (!stack_.empty()) {
      const auto [i, pos] = stack_.back();
      stack_.pop_back();
      step(i, pos);
    }
    return best_;
  }

 private:
  void push(std::size_t i, std::size_t pos) {
    auto& s = stamp_[i * width_ + pos];
    if (s == generation_) return;
    s = generation_;
    stack_.emplace_back(i, pos);
  }

  bool usable(std::size_t pos) const { return pos < slice_.size() && !slice_.in_math(pos); }

  void step(std::size_t i, std::size_t pos) {
    if (i == prog_.size()) {
      if (pos > start_ && !(slice_.word_at(pos - 1) && slice_.word_at(pos)) &&
          (best_ == std::string::npos || pos > best_))
        best_ = pos;
      return;
    }
    const auto& instr = prog_[i];
    switch (instr.kind) {
      case MatchInstr::Kind::Math:
        if (pos < slice_.size() && slice_.math_starts(pos) && slice_.math_form(pos) == instr.math)
          push(i + 1, slice_.math_end(pos));
        return;
      case MatchInstr::Kind::Separator: {
        std::size_t run = 0;
        while (usable(pos + run) && is_separator_char(slice_.at(pos + run))) ++run;
        for (std::size_t k = run; k >= 1; --k) push(i + 1, pos + k);
        return;
      }
      default: {
        const std::size_t limit = instr.max == MatchInstr::kUnbounded ? gap_bound_ : instr.max;
        std::size_t count = 0;
        while (count < limit && usable(pos + count) && char_matches(instr, slice_.at(pos + count))) ++count;
        if (count < instr.min) return;
        for (std::size_t k = count + 1; k-- > instr.min;) push(i + 1, pos + k);
      }
    }
  }

  const std::vector<MatchInstr>& prog_;
  const PreparedSlice& slice_;
  std::size_t gap_bound_;
  std::size_t width_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t generation_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack_;
  std::size_t best_ = std::string::npos;
  std::size_t start_ = 0;
};

bool can_start(const MatchInstr& first, const PreparedSlice& slice, std::size_t pos) {
  if (first.kind == MatchInstr::Kind::Math) return slice.math_starts(pos);
  if (first.kind == MatchInstr::Kind::Char && first.min == 1) {
    return !slice.in_math(pos) && slice.at(pos) == first.ch;
  }
  return true;
}

using Tagged = std::tuple<std::size_t, std::size_t, std::size_t, Span>;  // start, entry, alt, span

std::vector<MatchHit> assemble(const std::vector<CompiledEntry>& compiled, std::vector<Tagged>& tagged,
                               const TextSlice& slice) {
  std::sort(tagged.begin(), tagged.end(), [](const Tagged& a, const Tagged& b) {
    return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a), std::get<3>(a).end) <
           std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b), std::get<3>(b).end);
  });
  std::vector<MatchHit> hits;
  hits.reserve(tagged.size());
  for (const auto& [start, entry, alt, span] : tagged)
    hits.push_back({compiled[entry].entry_id, alt, slice.origin, slice.ordinal, span});
  return hits;
}

}  // namespace

std::vector<Span> find_matches(const CompiledAlternative& alternative, const PreparedSlice& slice,
                               const MatchOptions& options) {
  std::vector<Span> spans;
  if (alternative.program.empty() || slice.size() == 0) return spans;
  Search search(alternative, slice, options.gap_bound);
  const auto& first = alternative.program.front();
  std::size_t pos = 0;
  while (pos < slice.size()) {
    const bool boundary = !(pos > 0 && slice.word_at(pos - 1) && slice.word_at(pos));
    if (boundary && can_start(first, slice, pos)) {
      const auto end = search.longest_from(pos);
      if (end != std::string::npos) {
        spans.push_back({pos, end});
        pos = end;
        continue;
      }
    }
    ++pos;
  }
  return spans;
}

std::vector<MatchHit> match_slice_serial(const std::vector<CompiledEntry>& compiled, const TextSlice& slice,
                                         const MatchOptions& options) {
  const PreparedSlice prepared(slice);
  std::vector<Tagged> tagged;
  for (std::size_t e = 0; e < compiled.size(); ++e)
    for (std::size_t a = 0; a < compiled[e].matchers.size(); ++a)
      for (const auto& span : find_matches(compiled[e].matchers[a], prepared, options))
        tagged.emplace_back(span.start, e, a, span);
  return assemble(compiled, tagged, slice);
}

std::vector<MatchHit> match_slice_parallel(const std::vector<CompiledEntry>& compiled, const TextSlice& slice,
                                           const MatchOptions& options) {
  const PreparedSlice prepared(slice);
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t e = 0; e < compiled.size(); ++e)
    for (std::size_t a = 0; a < compiled[e].matchers.size(); ++a) work.emplace_back(e, a);

  std::vector<std::vector<Span>> found(work.size());
  const auto n = static_cast<long>(work.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long k = 0; k < n; ++k) {
    const auto [e, a] = work[static_cast<std::size_t>(k)];
    found[static_cast<std::size_t>(k)] = find_matches(compiled[e].matchers[a], prepared, options);
  }

  std::vector<Tagged> tagged;
  for (std::size_t k = 0; k < work.size(); ++k)
    for (const auto& span : found[k]) tagged.emplace_back(span.start, work[k].first, work[k].second, span);
  return assemble(compiled, tagged, slice);
}

std::vector<MatchHit> match_slice(const std::vector<CompiledEntry>& compiled, const TextSlice& slice,
                                  const MatchOptions& options) {
  return match_slice_parallel(compiled, slice, options);
}

std::vector<MatchHit> match_document(const std::vector<CompiledEntry>& compiled, const DocumentParts& parts,
                                     const MatchOptions& options) {
  std::vector<MatchHit> hits;
  for (auto p : kAllPointers) {
    for (const auto& slice : parts.of(p)) {
      auto slice_hits = match_slice(compiled, slice, options);
      hits.insert(hits.end(), std::make_move_iterator(slice_hits.begin()),
                  std::make_move_iterator(slice_hits.end()));
    }
  }
  return hits;
}

}  // namespace autex
