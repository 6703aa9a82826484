#include "autex/vocabulary.hpp"

#include <algorithm>
#include <mutex>

#include "autex/error.hpp"
#include "autex/text.hpp"

namespace autex {

namespace {

// Splits on `delim` outside `$...$` segments.
std::vector<std::string_view> split_outside_math(std::string_view s, char delim) {
  std::vector<std::string_view> parts;
  bool in_math = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      continue;
    }
    if (s[i] == '$') in_math = !in_math;
    if (!in_math && s[i] == delim) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

template <class Item>
void sort_folded(std::vector<Item>& items) {
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return text::less_folded(a.text(), b.text());
  });
}

}  // namespace

Keyword::Keyword(std::string_view raw) : text_(text::collapse_whitespace(raw)) {
  if (text_.empty()) throw Error(ErrorKind::EmptyKeyword, "keyword is empty");
  for (auto delim : {',', ';'}) {
    if (split_outside_math(text_, delim).size() > 1)
      throw Error(ErrorKind::InvalidKeyword,
                  "keyword '" + text_ + "' contains the delimiter '" + delim + "'");
  }
}

std::string Keyword::key() const { return text::fold_utf8(text_); }

bool operator==(const Keyword& a, const Keyword& b) { return a.key() == b.key(); }

Keychain::Keychain(std::vector<Keyword> keywords) : keywords_(std::move(keywords)) {
  if (keywords_.empty()) throw Error(ErrorKind::EmptyKeychain, "keychain is empty");
}

std::string Keychain::render() const {
  std::string out;
  for (const auto& kw : keywords_) {
    if (!out.empty()) out += ", ";
    out += kw.text();
  }
  return out;
}

std::string Keychain::key() const { return text::fold_utf8(render()); }

Keychain parse_keychain(std::string_view rendering) {
  std::vector<Keyword> keywords;
  for (auto segment : split_outside_math(rendering, ',')) {
    if (text::trim(segment).empty()) continue;
    keywords.emplace_back(segment);
  }
  if (keywords.empty())
    throw Error(ErrorKind::EmptyKeychain, "no keywords in '" + std::string(rendering) + "'");
  return Keychain(std::move(keywords));
}

void VocabularyFilter::validate() const {
  if (letter && !text::is_alpha(*letter))
    throw Error(ErrorKind::InvalidFilter, "filter letter must be alphabetic");
  if (prefix && text::length(*prefix) < 2)
    throw Error(ErrorKind::InvalidFilter, "filter prefix needs more than one character");
}

bool VocabularyFilter::accepts(std::string_view item) const {
  const auto folded = text::fold(text::decode_utf8(item));
  if (letter && (folded.empty() || folded.front() != text::fold(*letter))) return false;
  if (prefix) {
    const auto p = text::fold(text::decode_utf8(*prefix));
    if (folded.compare(0, p.size(), p) != 0) return false;
  }
  return true;
}

Vocabulary::Vocabulary(const Vocabulary& other) {
  std::shared_lock lock(other.mutex_);
  keywords_ = other.keywords_;
  keychains_ = other.keychains_;
}

Vocabulary& Vocabulary::operator=(const Vocabulary& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_);
  std::shared_lock other_lock(other.mutex_);
  keywords_ = other.keywords_;
  keychains_ = other.keychains_;
  return *this;
}

Keyword Vocabulary::add_keyword_locked(std::string_view raw) {
  Keyword kw(raw);
  auto [it, inserted] = keywords_.try_emplace(kw.key(), kw);
  return it->second;
}

Keyword Vocabulary::add_keyword(std::string_view raw) {
  std::scoped_lock lock(mutex_);
  return add_keyword_locked(raw);
}

std::optional<Keyword> Vocabulary::find_keyword(std::string_view raw) const {
  const auto key = text::fold_utf8(text::collapse_whitespace(raw));
  std::shared_lock lock(mutex_);
  if (auto it = keywords_.find(key); it != keywords_.end()) return it->second;
  return std::nullopt;
}

bool Vocabulary::contains(const Keyword& keyword) const {
  std::shared_lock lock(mutex_);
  return keywords_.count(keyword.key()) != 0;
}

std::vector<Keyword> Vocabulary::filter_keywords(const VocabularyFilter& filter) const {
  filter.validate();
  std::vector<Keyword> out;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [key, kw] : keywords_)
      if (filter.accepts(kw.text())) out.push_back(kw);
  }
  sort_folded(out);
  return out;
}

Keychain Vocabulary::make_keychain(const std::vector<std::string>& names) {
  if (names.empty()) throw Error(ErrorKind::EmptyKeychain, "keychain is empty");
  std::scoped_lock lock(mutex_);
  std::vector<Keyword> resolved;
  for (const auto& name : names) {
    const Keyword probe(name);
    auto it = keywords_.find(probe.key());
    if (it == keywords_.end())
      throw Error(ErrorKind::UnknownKeyword, "unknown keyword '" + probe.text() + "'");
    resolved.push_back(it->second);
  }
  Keychain chain(std::move(resolved));
  keychains_.try_emplace(chain.key(), chain);
  return chain;
}

Keychain Vocabulary::ingest_keychain(std::string_view rendering) {
  const auto parsed = parse_keychain(rendering);
  std::scoped_lock lock(mutex_);
  std::vector<Keyword> resolved;
  for (const auto& kw : parsed.keywords()) resolved.push_back(add_keyword_locked(kw.text()));
  Keychain chain(std::move(resolved));
  auto [it, inserted] = keychains_.try_emplace(chain.key(), chain);
  return it->second;
}

bool Vocabulary::contains(const Keychain& keychain) const {
  std::shared_lock lock(mutex_);
  return keychains_.count(keychain.key()) != 0;
}

std::vector<Keychain> Vocabulary::filter_keychains(const VocabularyFilter& filter) const {
  filter.validate();
  std::vector<Keychain> out;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [key, chain] : keychains_)
      if (filter.accepts(chain.render())) out.push_back(chain);
  }
  std::sort(out.begin(), out.end(), [](const Keychain& a, const Keychain& b) {
    return text::less_folded(a.render(), b.render());
  });
  return out;
}

bool operator==(const Vocabulary& a, const Vocabulary& b) {
  const auto render_all = [](const Vocabulary& v) {
    return render_keyword_file(v) + "\n" + render_keychain_file(v);
  };
  return render_all(a) == render_all(b);
}

std::vector<std::string> parse_list_file(std::string_view content) {
  std::vector<std::string> items;
  for (const auto& line : text::split_lines(content)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    items.emplace_back(t);
  }
  return items;
}

std::string render_keyword_file(const Vocabulary& vocabulary) {
  std::string out;
  for (const auto& kw : vocabulary.keywords()) out += kw.text() + "\n";
  return out;
}

std::string render_keychain_file(const Vocabulary& vocabulary) {
  std::string out;
  for (const auto& chain : vocabulary.keychains()) out += chain.render() + "\n";
  return out;
}

}  // namespace autex
