#include "autex/texprep.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>
#include <unordered_set>

#include "autex/error.hpp"
#include "autex/text.hpp"

namespace autex {

namespace {

constexpr std::array<std::string_view, 6> kPointerNames = {
    "title", "abstract", "caption", "section", "conclusions", "full-text"};

enum class EventKind { Title, Caption, Section, AbstractBegin, AbstractEnd, DocumentBegin,
                       DocumentEnd, Appendix, Bibliography };

struct Event {
  EventKind kind;
  std::size_t start = 0;  // output offset
  std::size_t end = 0;
  int level = 0;          // sectioning depth
};

// Commands whose brace arguments are discarded. Values: number of mandatory
// arguments; optional [..] arguments and a `*` are skipped as well.
const std::unordered_map<std::u32string, int>& dropped_commands() {
  static const std::unordered_map<std::u32string, int> table = {
      {U"label", 1},        {U"ref", 1},          {U"eqref", 1},
      {U"pageref", 1},      {U"cite", 1},         {U"citep", 1},
      {U"citet", 1},        {U"nocite", 1},       {U"index", 1},
      {U"bibliographystyle", 1}, {U"epsffile", 1}, {U"includegraphics", 1},
      {U"vspace", 1},       {U"hspace", 1},       {U"setcounter", 2},
      {U"addtocounter", 2}, {U"setlength", 2},    {U"addcontentsline", 3},
      {U"usepackage", 1},   {U"documentclass", 1}, {U"input", 1},
      {U"include", 1},      {U"newcommand", 2},   {U"renewcommand", 2},
      {U"providecommand", 2}, {U"newenvironment", 3}, {U"thanks", 1},
      {U"pagestyle", 1},    {U"thispagestyle", 1}, {U"bibitem", 1},
      {U"psfig", 1},        {U"epsfig", 1},       {U"pacs", 1},
      {U"keywords", 0}};
  return table;
}

const std::unordered_map<std::u32string, std::u32string>& text_commands() {
  static const std::unordered_map<std::u32string, std::u32string> table = {
      {U"TeX", U"TeX"}, {U"LaTeX", U"LaTeX"}, {U"ldots", U"..."}, {U"dots", U"..."},
      {U"ss", U"ß"},    {U"slash", U"/"},     {U"textendash", U"-"}, {U"textemdash", U"-"}};
  return table;
}

const std::unordered_set<std::u32string>& spacing_commands() {
  static const std::unordered_set<std::u32string> table = {
      U"quad", U"qquad", U"par", U"newline", U"item", U"hfill", U"enspace", U"linebreak",
      U"smallskip", U"medskip", U"bigskip", U"newpage", U"clearpage", U"break", U"cr",
      U"vfill", U"maketitle"};
  return table;
}

const std::unordered_set<std::u32string>& math_environments() {
  static const std::unordered_set<std::u32string> table = {
      U"equation", U"equation*", U"eqnarray", U"eqnarray*", U"align", U"align*",
      U"displaymath", U"math", U"gather", U"gather*", U"multline", U"multline*"};
  return table;
}

int section_level(std::u32string_view name) {
  if (name == U"chapter") return 0;
  if (name == U"section") return 1;
  if (name == U"subsection") return 2;
  if (name == U"subsubsection") return 3;
  if (name == U"paragraph") return 4;
  return -1;
}

bool is_ascii_letter(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }

std::u32string collapse_math(std::u32string_view s) {
  std::u32string out;
  bool in_space = false;
  for (char32_t c : s) {
    if (text::is_space(c)) {
      if (!in_space) out.push_back(U' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

// Single pass over a TeX source producing the pruned stream and the output
// offsets of the structural constructs the pointers address.
class Pruner {
 public:
  explicit Pruner(std::u32string source) : src_(std::move(source)) {}

  void run() {
    parse(false);
    while (!out_.empty() && out_.back() == U' ') out_.pop_back();
  }

  const std::u32string& output() const { return out_; }
  const std::vector<Event>& events() const { return events_; }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    const auto line = 1 + std::count(src_.begin(), src_.begin() + std::min(at, src_.size()), U'\n');
    throw Error(ErrorKind::MalformedTex, what + " (line " + std::to_string(line) + ")");
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char32_t peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : U'\0';
  }

  void emit(char32_t c) {
    if (text::is_space(c)) {
      emit_space();
      return;
    }
    out_.push_back(c);
  }
  void emit(std::u32string_view s) {
    for (char32_t c : s) emit(c);
  }
  void emit_space() {
    if (!out_.empty() && out_.back() != U' ') out_.push_back(U' ');
  }

  void skip_comment() {
    while (!at_end() && peek() != U'\n') ++pos_;
    if (!at_end()) ++pos_;
    while (!at_end() && (peek() == U' ' || peek() == U'\t')) ++pos_;
  }

  void skip_spaces() {
    while (!at_end()) {
      if (text::is_space(peek())) {
        ++pos_;
      } else if (peek() == U'%') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  // Skips one balanced {...} (returns false if the next token is not `{`).
  bool skip_group() {
    skip_spaces();
    if (peek() != U'{') return false;
    const auto open = pos_;
    int depth = 0;
    while (!at_end()) {
      const char32_t c = src_[pos_];
      if (c == U'\\') {
        pos_ += 2;
        continue;
      }
      if (c == U'%') {
        skip_comment();
        continue;
      }
      ++pos_;
      if (c == U'{') ++depth;
      if (c == U'}' && --depth == 0) return true;
    }
    fail("unclosed brace", open);
  }

  void skip_optional() {
    skip_spaces();
    if (peek() != U'[') return;
    const auto open = pos_;
    int depth = 0;
    while (!at_end()) {
      const char32_t c = src_[pos_++];
      if (c == U'{') ++depth;
      if (c == U'}') --depth;
      if (c == U']' && depth == 0) return;
    }
    fail("unclosed optional argument", open);
  }

  void skip_star() {
    if (peek() == U'*') ++pos_;
  }

  std::u32string read_braced_name() {
    skip_spaces();
    if (peek() != U'{') return {};
    ++pos_;
    std::u32string name;
    while (!at_end() && peek() != U'}') name.push_back(src_[pos_++]);
    if (at_end()) fail("unclosed environment name", pos_);
    ++pos_;
    return std::u32string(text::decode_utf8(text::trim(text::encode_utf8(name))));
  }

  // Reads math up to `close` and emits it as an inline `$...$` segment.
  void read_math(std::u32string_view close, std::size_t open_at) {
    std::u32string body;
    while (true) {
      if (at_end()) fail("unterminated math", open_at);
      if (src_.compare(pos_, close.size(), close) == 0) {
        pos_ += close.size();
        break;
      }
      const char32_t c = src_[pos_];
      if (c == U'\\' && pos_ + 1 < src_.size()) {
        body.push_back(c);
        body.push_back(src_[pos_ + 1]);
        pos_ += 2;
        continue;
      }
      if (c == U'%') {
        skip_comment();
        body.push_back(U' ');
        continue;
      }
      body.push_back(c);
      ++pos_;
    }
    out_.push_back(U'$');
    out_ += collapse_math(body);
    out_.push_back(U'$');
  }

  void read_math_environment(const std::u32string& name, std::size_t open_at) {
    read_math(U"\\end{" + name + U"}", open_at);
  }

  // Parses an argument group as visible text and records its output span.
  void hooked_argument(EventKind kind, int level) {
    skip_star();
    skip_optional();
    skip_spaces();
    if (peek() != U'{') return;
    const auto open = pos_++;
    emit_space();
    Event ev{kind, out_.size(), 0, level};
    parse(true, open);
    ++pos_;  // closing brace
    ev.end = out_.size();
    events_.push_back(ev);
    emit_space();
  }

  void control_sequence() {
    const auto start = pos_;
    ++pos_;  // backslash
    if (at_end()) return;
    const char32_t c = peek();
    if (!is_ascii_letter(c)) {
      ++pos_;
      switch (c) {
        case U'\\':
          skip_star();
          skip_optional();
          emit_space();
          return;
        case U'%': case U'$': case U'&': case U'#': case U'_': case U'{': case U'}':
          out_.push_back(U'\\');
          out_.push_back(c);
          return;
        case U',': case U';': case U':': case U'!': case U' ': case U'\n': case U'\t':
          emit_space();
          return;
        case U'(':
          read_math(U"\\)", start);
          return;
        case U'[':
          read_math(U"\\]", start);
          return;
        default:
          // Accents and other control symbols vanish; their operand flows.
          return;
      }
    }
    std::u32string name;
    while (!at_end() && is_ascii_letter(peek())) name.push_back(src_[pos_++]);

    if (name == U"verb") {
      if (at_end()) return;
      const char32_t delim = src_[pos_++];
      while (!at_end() && peek() != delim) emit(src_[pos_++]);
      if (at_end()) fail("unterminated \\verb", start);
      ++pos_;
      return;
    }
    if (name == U"title") return hooked_argument(EventKind::Title, 0);
    if (name == U"caption") return hooked_argument(EventKind::Caption, 0);
    if (const int level = section_level(name); level >= 0)
      return hooked_argument(EventKind::Section, level);
    if (name == U"begin") return begin_environment(start);
    if (name == U"end") return end_environment();
    if (name == U"appendix") {
      events_.push_back({EventKind::Appendix, out_.size(), out_.size(), 0});
      return;
    }
    if (name == U"bibliography") {
      events_.push_back({EventKind::Bibliography, out_.size(), out_.size(), 0});
      skip_group();
      return;
    }
    if (name == U"def" || name == U"gdef") {
      skip_spaces();
      if (peek() == U'\\') {
        ++pos_;
        while (!at_end() && is_ascii_letter(peek())) ++pos_;
      }
      while (!at_end() && peek() != U'{') ++pos_;
      skip_group();
      return;
    }
    if (name == U"parbox") {
      skip_optional();
      skip_group();
      return;
    }
    if (auto it = dropped_commands().find(name); it != dropped_commands().end()) {
      skip_star();
      skip_optional();
      for (int i = 0; i < it->second; ++i) {
        skip_optional();
        skip_group();
      }
      return;
    }
    if (auto it = text_commands().find(name); it != text_commands().end()) {
      emit(it->second);
      return;
    }
    if (spacing_commands().count(name)) {
      if (name == U"item") skip_optional();
      emit_space();
      return;
    }
    // Unknown: the command itself disappears; a following group is unwrapped
    // by the ordinary brace handling.
  }

  void begin_environment(std::size_t start) {
    const auto name = read_braced_name();
    if (math_environments().count(name)) {
      read_math_environment(name, start);
      return;
    }
    emit_space();
    if (name == U"document") {
      events_.push_back({EventKind::DocumentBegin, out_.size(), out_.size(), 0});
    } else if (name == U"abstract") {
      events_.push_back({EventKind::AbstractBegin, out_.size(), out_.size(), 0});
    } else if (name == U"thebibliography") {
      events_.push_back({EventKind::Bibliography, out_.size(), out_.size(), 0});
      skip_group();
    } else if (name == U"verbatim") {
      const std::u32string close = U"\\end{verbatim}";
      const auto end = src_.find(close, pos_);
      if (end == std::u32string::npos) fail("unterminated verbatim", start);
      emit(std::u32string_view(src_).substr(pos_, end - pos_));
      pos_ = end + close.size();
    } else if (name == U"tabular" || name == U"array") {
      skip_optional();
      skip_group();
    } else if (name == U"tabular*") {
      skip_group();
      skip_optional();
      skip_group();
    } else if (name == U"minipage") {
      skip_optional();
      skip_group();
    } else if (name == U"figure" || name == U"figure*" || name == U"table" || name == U"table*") {
      skip_optional();
    }
  }

  void end_environment() {
    const auto name = read_braced_name();
    emit_space();
    if (name == U"document")
      events_.push_back({EventKind::DocumentEnd, out_.size(), out_.size(), 0});
    else if (name == U"abstract")
      events_.push_back({EventKind::AbstractEnd, out_.size(), out_.size(), 0});
  }

  void parse(bool in_group, std::size_t group_open = 0) {
    while (!at_end()) {
      const char32_t c = peek();
      switch (c) {
        case U'%':
          skip_comment();
          break;
        case U'\\':
          control_sequence();
          break;
        case U'{': {
          const auto open = pos_++;
          parse(true, open);
          ++pos_;
          break;
        }
        case U'}':
          if (in_group) return;
          fail("unbalanced '}'", pos_);
        case U'$': {
          const auto open = pos_;
          if (peek(1) == U'$') {
            pos_ += 2;
            read_math(U"$$", open);
          } else {
            ++pos_;
            read_math(U"$", open);
          }
          break;
        }
        case U'~':
        case U'&':
          ++pos_;
          emit_space();
          break;
        case U'`':
        case U'\'':
          if (peek(1) == c) {
            pos_ += 2;
            emit(U'"');
          } else {
            ++pos_;
            emit(c);
          }
          break;
        default:
          ++pos_;
          emit(c);
      }
    }
    if (in_group) fail("brace nesting never closes", group_open);
  }

  std::u32string src_;
  std::size_t pos_ = 0;
  std::u32string out_;
  std::vector<Event> events_;
};

Span trim_span(const std::u32string& stream, std::size_t start, std::size_t end) {
  end = std::min(end, stream.size());
  while (start < end && stream[start] == U' ') ++start;
  while (end > start && stream[end - 1] == U' ') --end;
  return {start, end};
}

bool is_conclusions_title(std::u32string_view title) {
  const auto folded = text::encode_utf8(text::fold(title));
  return std::any_of(kConclusionTitles.begin(), kConclusionTitles.end(),
                     [&](std::string_view marker) { return folded.find(marker) != std::string::npos; });
}

}  // namespace

std::string_view to_string(Pointer p) { return kPointerNames[static_cast<std::size_t>(p)]; }

std::optional<Pointer> parse_pointer(std::string_view name) {
  for (std::size_t i = 0; i < kPointerNames.size(); ++i)
    if (kPointerNames[i] == name) return kAllPointers[i];
  return std::nullopt;
}

PointerSet parse_pointer_list(std::string_view list) {
  PointerSet out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    if (comma == std::string_view::npos) comma = list.size();
    const auto name = text::trim(list.substr(start, comma - start));
    if (!name.empty()) {
      auto p = parse_pointer(name);
      if (!p) {
        std::string legal;
        for (auto n : kPointerNames) legal += (legal.empty() ? "" : ", ") + std::string(n);
        throw Error(ErrorKind::ParseError,
                    "unknown pointer '" + std::string(name) + "' (legal: " + legal + ")");
      }
      out.insert(*p);
    }
    start = comma + 1;
  }
  return out;
}

std::string render_pointer_list(const PointerSet& pointers) {
  std::string out;
  for (auto p : pointers) {
    if (!out.empty()) out += ',';
    out += to_string(p);
  }
  return out;
}

const std::vector<TextSlice>& DocumentParts::of(Pointer p) const {
  static const std::vector<TextSlice> kEmpty;
  auto it = slices.find(p);
  return it == slices.end() ? kEmpty : it->second;
}

DocumentParts extract_parts(std::string_view tex_source, const PointerSet& pointers,
                            std::string source_id) {
  Pruner pruner(text::decode_source(tex_source));
  pruner.run();
  const auto& stream = pruner.output();
  const auto& events = pruner.events();

  DocumentParts parts;
  parts.source_id = std::move(source_id);
  parts.stream = text::encode_utf8(stream);

  const auto add = [&](Pointer p, std::size_t start, std::size_t end) {
    const auto span = trim_span(stream, start, end);
    if (span.start >= span.end) return;
    auto& list = parts.slices[p];
    TextSlice slice;
    slice.text = text::encode_utf8(std::u32string_view(stream).substr(span.start, span.end - span.start));
    slice.origin = p;
    slice.span = span;
    slice.ordinal = list.size();
    list.push_back(std::move(slice));
  };

  for (auto p : pointers) parts.slices[p];

  if (pointers.count(Pointer::Title))
    for (const auto& ev : events)
      if (ev.kind == EventKind::Title) add(Pointer::Title, ev.start, ev.end);

  if (pointers.count(Pointer::Abstract)) {
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (events[i].kind != EventKind::AbstractBegin) continue;
      std::size_t end = stream.size();
      for (std::size_t j = i + 1; j < events.size(); ++j)
        if (events[j].kind == EventKind::AbstractEnd) {
          end = events[j].start;
          break;
        }
      add(Pointer::Abstract, events[i].start, end);
      break;  // a document has one abstract
    }
  }

  if (pointers.count(Pointer::Caption))
    for (const auto& ev : events)
      if (ev.kind == EventKind::Caption) add(Pointer::Caption, ev.start, ev.end);

  if (pointers.count(Pointer::Section))
    for (const auto& ev : events)
      if (ev.kind == EventKind::Section) add(Pointer::Section, ev.start, ev.end);

  if (pointers.count(Pointer::Conclusions)) {
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& ev = events[i];
      if (ev.kind != EventKind::Section) continue;
      if (!is_conclusions_title(std::u32string_view(stream).substr(ev.start, ev.end - ev.start)))
        continue;
      std::size_t end = stream.size();
      for (std::size_t j = i + 1; j < events.size(); ++j) {
        const auto& next = events[j];
        const bool closes = (next.kind == EventKind::Section && next.level <= ev.level) ||
                            next.kind == EventKind::Appendix ||
                            next.kind == EventKind::Bibliography ||
                            next.kind == EventKind::DocumentEnd;
        if (closes) {
          end = next.start;
          break;
        }
      }
      add(Pointer::Conclusions, ev.end, end);
    }
  }

  if (pointers.count(Pointer::FullText)) {
    std::size_t start = 0;
    std::size_t end = stream.size();
    for (const auto& ev : events) {
      if (ev.kind == EventKind::DocumentBegin) start = ev.start;
      if (ev.kind == EventKind::DocumentEnd) end = ev.start;
    }
    add(Pointer::FullText, start, end);
  }
  return parts;
}

std::string prune_tex(std::string_view raw) {
  Pruner pruner(text::decode_source(raw));
  pruner.run();
  return text::encode_utf8(pruner.output());
}

namespace {

struct MathNode {
  std::u32string token;            // empty for a group
  std::vector<MathNode> children;  // group contents
  bool is_group() const { return token.empty(); }
};

const std::unordered_map<std::u32string, std::u32string>& math_aliases() {
  static const std::unordered_map<std::u32string, std::u32string> table = {
      {U"\\rightarrow", U"\\to"}, {U"\\overline", U"\\bar"}};
  return table;
}

bool is_math_spacing(std::u32string_view tok) {
  return tok == U"\\," || tok == U"\\;" || tok == U"\\:" || tok == U"\\!" || tok == U"\\ " ||
         tok == U"\\quad" || tok == U"\\qquad";
}

std::vector<MathNode> parse_math(const std::u32string& s, std::size_t& pos, bool in_group) {
  std::vector<MathNode> nodes;
  while (pos < s.size()) {
    const char32_t c = s[pos];
    if (text::is_space(c)) {
      ++pos;
      continue;
    }
    if (c == U'{') {
      ++pos;
      MathNode group;
      group.children = parse_math(s, pos, true);
      // Simplification: empty groups vanish, single-child groups unwrap.
      if (group.children.empty()) continue;
      if (group.children.size() == 1) {
        nodes.push_back(std::move(group.children.front()));
      } else {
        nodes.push_back(std::move(group));
      }
      continue;
    }
    if (c == U'}') {
      ++pos;
      if (in_group) return nodes;
      nodes.push_back({U"}", {}});
      continue;
    }
    std::u32string tok;
    if (c == U'\\') {
      tok.push_back(c);
      ++pos;
      if (pos < s.size() && is_ascii_letter(s[pos])) {
        while (pos < s.size() && is_ascii_letter(s[pos])) tok.push_back(s[pos++]);
      } else if (pos < s.size()) {
        tok.push_back(s[pos++]);
      }
      if (is_math_spacing(tok)) continue;
      if (auto it = math_aliases().find(tok); it != math_aliases().end()) tok = it->second;
    } else {
      tok.push_back(c);
      ++pos;
    }
    nodes.push_back({std::move(tok), {}});
  }
  return nodes;
}

void render_math(const std::vector<MathNode>& nodes, std::u32string& out) {
  for (const auto& node : nodes) {
    if (!out.empty()) out.push_back(U' ');
    if (node.is_group()) {
      out.push_back(U'{');
      render_math(node.children, out);
      out += U" }";
    } else {
      out += node.token;
    }
  }
}

}  // namespace

std::string normalize_math(std::string_view segment) {
  const auto s = text::decode_utf8(segment);
  std::size_t pos = 0;
  const auto nodes = parse_math(s, pos, false);
  std::u32string out;
  render_math(nodes, out);
  return text::encode_utf8(out);
}

}  // namespace autex
