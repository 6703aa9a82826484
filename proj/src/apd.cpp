#include "autex/apd.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "autex/error.hpp"
#include "autex/matchengine.hpp"
#include "autex/texprep.hpp"
#include "autex/text.hpp"

namespace autex {

namespace {

// Splits `s` at `delim` outside math; reports whether math was balanced.
std::vector<std::string> split_top_level(std::string_view s, char delim, bool& balanced) {
  std::vector<std::string> parts;
  bool in_math = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      continue;
    }
    if (s[i] == '$') in_math = !in_math;
    if (!in_math && s[i] == delim) {
      parts.emplace_back(text::trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  parts.emplace_back(text::trim(s.substr(start)));
  balanced = !in_math;
  return parts;
}

bool math_balanced(std::string_view s) {
  bool balanced = true;
  split_top_level(s, '\0', balanced);
  return balanced;
}

Error parse_error(std::size_t line, const std::string& what) {
  return Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

bool operator==(const ApdEntry& a, const ApdEntry& b) {
  return a.id == b.id && a.alternatives == b.alternatives && a.keychains == b.keychains &&
         a.note == b.note;
}

std::vector<std::string> split_alternatives(std::string_view pattern) {
  bool balanced = true;
  auto parts = split_top_level(pattern, '|', balanced);
  if (!balanced)
    throw Error(ErrorKind::UnbalancedMath, "unbalanced '$' in pattern '" + std::string(pattern) + "'");
  return parts;
}

std::string alternative_key(std::string_view alternative) {
  std::string out;
  std::string plain;
  bool in_math = false;
  std::string math;
  const auto flush_plain = [&] {
    out += text::fold_utf8(text::collapse_whitespace(plain));
    plain.clear();
  };
  for (std::size_t i = 0; i < alternative.size(); ++i) {
    const char c = alternative[i];
    if (c == '\\' && i + 1 < alternative.size()) {
      (in_math ? math : plain) += alternative.substr(i, 2);
      ++i;
      continue;
    }
    if (c == '$') {
      if (in_math) {
        out += "$" + normalize_math(math) + "$";
        math.clear();
      } else {
        flush_plain();
        if (!out.empty() && out.back() != ' ') out += ' ';
      }
      in_math = !in_math;
      continue;
    }
    (in_math ? math : plain) += c;
  }
  flush_plain();
  return std::string(text::trim(out));
}

void validate_entry(const ApdEntry& entry) {
  if (entry.alternatives.empty()) throw Error(ErrorKind::EmptyPattern, "entry has no alternatives");
  if (entry.keychains.empty()) throw Error(ErrorKind::EmptyKeychain, "entry has no keychains");
  std::set<std::string> seen;
  for (const auto& alt : entry.alternatives) {
    if (text::trim(alt).empty()) throw Error(ErrorKind::EmptyPattern, "empty alternative");
    if (!math_balanced(alt))
      throw Error(ErrorKind::UnbalancedMath, "unbalanced '$' in alternative '" + alt + "'");
    if (!seen.insert(alternative_key(alt)).second)
      throw Error(ErrorKind::DuplicateAlternative, "alternative '" + alt + "' repeats within the entry");
  }
}

std::string_view to_string(LintFinding::Kind kind) {
  switch (kind) {
    case LintFinding::Kind::DuplicateAlternative: return "DuplicateAlternative";
    case LintFinding::Kind::CompileFailure: return "CompileFailure";
  }
  return "Unknown";
}

std::vector<LintFinding> lint_apd(const std::vector<ApdEntry>& entries) {
  std::vector<LintFinding> findings;

  std::map<std::string, std::vector<std::string>> owners;
  std::vector<std::string> order;
  for (const auto& entry : entries) {
    for (const auto& alt : entry.alternatives) {
      const auto key = alternative_key(alt);
      auto& ids = owners[key];
      if (ids.empty()) order.push_back(key);
      if (std::find(ids.begin(), ids.end(), entry.id) == ids.end()) ids.push_back(entry.id);
    }
  }
  for (const auto& key : order) {
    const auto& ids = owners[key];
    if (ids.size() < 2) continue;
    std::string joined;
    for (const auto& id : ids) joined += (joined.empty() ? "" : ", ") + id;
    findings.push_back({LintFinding::Kind::DuplicateAlternative, ids,
                        "alternative '" + key + "' appears in entries " + joined});
  }

  for (const auto& entry : entries) {
    try {
      compile_entry(entry);
    } catch (const Error& e) {
      findings.push_back({LintFinding::Kind::CompileFailure, {entry.id},
                          "entry " + entry.id + ": " + e.what()});
    }
  }
  return findings;
}

Apd::Apd(const Apd& other) {
  std::shared_lock lock(other.mutex_);
  entries_ = other.entries_;
}

Apd& Apd::operator=(const Apd& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_);
  std::shared_lock other_lock(other.mutex_);
  entries_ = other.entries_;
  return *this;
}

std::string Apd::next_id_locked() const {
  unsigned long next = 1;
  for (const auto& e : entries_) {
    if (e.id.size() < 2 || e.id[0] != 'e') continue;
    if (!std::all_of(e.id.begin() + 1, e.id.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
    next = std::max(next, std::stoul(e.id.substr(1)) + 1);
  }
  auto digits = std::to_string(next);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "e" + digits;
}

namespace {

std::vector<std::string> expand_patterns(const std::vector<std::string>& patterns) {
  std::vector<std::string> alternatives;
  for (const auto& p : patterns)
    for (auto& alt : split_alternatives(p)) alternatives.push_back(std::move(alt));
  return alternatives;
}

std::optional<std::string> clean_note(std::optional<std::string> note) {
  if (!note) return note;
  auto n = text::collapse_whitespace(*note);
  if (n.empty()) return std::nullopt;
  return n;
}

void check_keychains(const std::vector<Keychain>& keychains, const Vocabulary& vocabulary) {
  for (const auto& chain : keychains)
    if (!vocabulary.contains(chain))
      throw Error(ErrorKind::UnknownKeychain, "unknown keychain '" + chain.render() + "'");
}

}  // namespace

ApdEntry Apd::add_entry(const std::vector<std::string>& patterns, const std::vector<Keychain>& keychains,
                        const Vocabulary& vocabulary, std::optional<std::string> note) {
  ApdEntry entry{{}, expand_patterns(patterns), keychains, clean_note(std::move(note))};
  validate_entry(entry);
  check_keychains(keychains, vocabulary);
  std::scoped_lock lock(mutex_);
  entry.id = next_id_locked();
  entries_.push_back(entry);
  return entry;
}

ApdEntry Apd::insert(ApdEntry entry) {
  validate_entry(entry);
  std::scoped_lock lock(mutex_);
  if (entry.id.empty()) entry.id = next_id_locked();
  for (const auto& e : entries_)
    if (e.id == entry.id) throw Error(ErrorKind::ParseError, "duplicate entry id '" + entry.id + "'");
  entries_.push_back(entry);
  return entry;
}

ApdEntry Apd::replace(const std::string& id, const std::vector<std::string>& patterns,
                      const std::vector<Keychain>& keychains, const Vocabulary& vocabulary,
                      std::optional<std::string> note) {
  ApdEntry entry{id, expand_patterns(patterns), keychains, clean_note(std::move(note))};
  validate_entry(entry);
  check_keychains(keychains, vocabulary);
  std::scoped_lock lock(mutex_);
  for (auto& e : entries_) {
    if (e.id == id) {
      e = entry;
      return entry;
    }
  }
  throw Error(ErrorKind::UnknownEntry, "no APD entry '" + id + "'");
}

void Apd::remove(const std::string& id) {
  std::scoped_lock lock(mutex_);
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ApdEntry& e) { return e.id == id; });
  if (it == entries_.end()) throw Error(ErrorKind::UnknownEntry, "no APD entry '" + id + "'");
  entries_.erase(it);
}

std::optional<ApdEntry> Apd::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  for (const auto& e : entries_)
    if (e.id == id) return e;
  return std::nullopt;
}

std::vector<ApdEntry> Apd::filter_entries(const VocabularyFilter& filter) const {
  filter.validate();
  std::set<std::string> wanted;
  if (filter.keychain_selector)
    for (const auto& chain : *filter.keychain_selector) wanted.insert(chain.key());

  std::vector<ApdEntry> out;
  std::shared_lock lock(mutex_);
  for (const auto& e : entries_) {
    if (filter.keychain_selector &&
        std::none_of(e.keychains.begin(), e.keychains.end(),
                     [&](const Keychain& k) { return wanted.count(k.key()) != 0; }))
      continue;
    if (!filter.accepts(e.alternatives.front())) continue;
    out.push_back(e);
  }
  return out;
}

std::vector<ApdEntry> Apd::entries() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

std::size_t Apd::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<ApdEntry> parse_apd(std::string_view content) {
  std::vector<ApdEntry> entries;
  std::set<std::string> ids;

  struct Pending {
    std::size_t line = 0;
    std::string id;
    std::optional<std::string> pattern;
    std::optional<std::string> keys;
    std::optional<std::string> note;
    std::size_t pattern_line = 0;
    std::size_t keys_line = 0;
  };
  std::optional<Pending> cur;

  const auto finish = [&] {
    if (!cur) return;
    if (!cur->pattern) throw parse_error(cur->line, "entry '" + cur->id + "' has no 'pattern:' line");
    if (!cur->keys) throw parse_error(cur->line, "entry '" + cur->id + "' has no 'keys:' line");
    ApdEntry entry;
    entry.id = cur->id;
    entry.note = cur->note;
    try {
      entry.alternatives = split_alternatives(*cur->pattern);
    } catch (const Error& e) {
      throw parse_error(cur->pattern_line, e.what());
    }
    bool balanced = true;
    for (const auto& rendering : split_top_level(*cur->keys, ';', balanced)) {
      if (rendering.empty()) continue;
      try {
        entry.keychains.push_back(parse_keychain(rendering));
      } catch (const Error& e) {
        throw parse_error(cur->keys_line, e.what());
      }
    }
    try {
      validate_entry(entry);
    } catch (const Error& e) {
      throw parse_error(cur->line, std::string(to_string(e.kind())) + ": " + e.what());
    }
    entries.push_back(std::move(entry));
    cur.reset();
  };

  const auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto line = text::trim(lines[i]);
    if (line.empty()) {
      finish();
      continue;
    }
    if (line.front() == '#') continue;
    if (line.rfind("@entry", 0) == 0) {
      finish();
      const auto id = std::string(text::trim(line.substr(6)));
      if (id.empty()) throw parse_error(lineno, "'@entry' without an id");
      if (!ids.insert(id).second) throw parse_error(lineno, "duplicate entry id '" + id + "'");
      cur = Pending{lineno, id, {}, {}, {}, 0, 0};
      continue;
    }
    if (!cur) throw parse_error(lineno, "field outside an '@entry' record");
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw parse_error(lineno, "expected 'field: value'");
    const auto field = text::trim(line.substr(0, colon));
    const auto value = std::string(text::trim(line.substr(colon + 1)));
    const auto set = [&](std::optional<std::string>& slot) {
      if (slot) throw parse_error(lineno, "repeated field '" + std::string(field) + "'");
      slot = value;
    };
    if (field == "pattern") {
      set(cur->pattern);
      cur->pattern_line = lineno;
    } else if (field == "keys") {
      set(cur->keys);
      cur->keys_line = lineno;
    } else if (field == "note") {
      set(cur->note);
      *cur->note = text::collapse_whitespace(*cur->note);
    } else {
      throw parse_error(lineno, "unknown field '" + std::string(field) + "'");
    }
  }
  finish();
  return entries;
}

std::string render_entry(const ApdEntry& entry) {
  std::string out = "@entry " + entry.id + "\npattern: ";
  for (std::size_t i = 0; i < entry.alternatives.size(); ++i) {
    if (i) out += " | ";
    out += entry.alternatives[i];
  }
  out += "\nkeys: ";
  for (std::size_t i = 0; i < entry.keychains.size(); ++i) {
    if (i) out += " ; ";
    out += entry.keychains[i].render();
  }
  out += "\n";
  if (entry.note) out += "note: " + text::collapse_whitespace(*entry.note) + "\n";
  return out;
}

std::string render_apd(const std::vector<ApdEntry>& entries) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += "\n";
    out += render_entry(entries[i]);
  }
  return out;
}

}  // namespace autex
