#include "autex/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

#include "autex/error.hpp"
#include "autex/text.hpp"

namespace autex {

std::string_view to_string(CompareMode mode) {
  return mode == CompareMode::Exact ? "exact" : "order-insensitive";
}

CompareMode parse_mode(std::string_view name) {
  if (name == "exact") return CompareMode::Exact;
  if (name == "order-insensitive") return CompareMode::OrderInsensitive;
  throw Error(ErrorKind::ParseError,
              "unknown comparison mode '" + std::string(name) + "' (expected exact or order-insensitive)");
}

ReferenceReport parse_reference(std::string_view content) {
  ReferenceReport out;
  std::set<std::string> seen;
  const auto lines = text::split_lines(content);
  bool first = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = text::trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const auto where = "reference line " + std::to_string(i + 1) + ": ";
    if (first && line.rfind("source:", 0) == 0) {
      out.source_id = std::string(text::trim(line.substr(7)));
      first = false;
      continue;
    }
    first = false;
    bool irrelevant = false;
    if (line.rfind("(0)", 0) == 0) {
      irrelevant = true;
      line = text::trim(line.substr(3));
    }
    try {
      auto chain = parse_keychain(line);
      if (!seen.insert(chain.key()).second)
        throw Error(ErrorKind::ParseError, where + "duplicate keychain '" + chain.render() + "'");
      out.keychains.push_back({std::move(chain), irrelevant});
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ParseError) throw;
      throw Error(ErrorKind::ParseError, where + e.what());
    }
  }
  return out;
}

std::string render_reference(const ReferenceReport& report) {
  std::string out;
  if (!report.source_id.empty()) out += "source: " + report.source_id + "\n";
  for (const auto& line : report.keychains) {
    if (line.irrelevant) out += "(0) ";
    out += line.keychain.render() + "\n";
  }
  return out;
}

std::string compare_key(const Keychain& k, CompareMode mode) {
  if (mode == CompareMode::Exact) return k.key();
  std::vector<std::string> words;
  for (const auto& w : k.keywords()) words.push_back(w.key());
  std::sort(words.begin(), words.end());
  std::string out;
  for (const auto& w : words) {
    out += w;
    out.push_back('\x1f');
  }
  return out;
}

namespace {

double ratio(std::size_t num, std::size_t den, std::size_t other_den) {
  if (den == 0) return other_den == 0 ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool share_keyword(const Keychain& a, const Keychain& b) {
  for (const auto& x : a.keywords())
    for (const auto& y : b.keywords())
      if (x == y) return true;
  return false;
}

}  // namespace

ComparisonResult compare_keychains(const std::vector<Keychain>& engine, const std::vector<Keychain>& reference,
                                   CompareMode mode) {
  ComparisonResult out;
  out.mode = mode;
  std::unordered_map<std::string, std::vector<std::size_t>> available;
  for (std::size_t i = 0; i < reference.size(); ++i) available[compare_key(reference[i], mode)].push_back(i);
  for (auto& [key, idx] : available) std::reverse(idx.begin(), idx.end());

  std::vector<bool> used(reference.size(), false);
  for (const auto& e : engine) {
    auto it = available.find(compare_key(e, mode));
    if (it != available.end() && !it->second.empty()) {
      const auto r = it->second.back();
      it->second.pop_back();
      used[r] = true;
      out.matched.push_back({e, reference[r]});
    } else {
      out.engine_only.push_back(e);
    }
  }
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (!used[i]) out.reference_only.push_back(reference[i]);

  for (const auto& e : out.engine_only)
    for (const auto& r : out.reference_only)
      if (share_keyword(e, r)) out.partial_overlaps.push_back({e, r});

  out.precision = ratio(out.matched.size(), engine.size(), reference.size());
  out.recall = ratio(out.matched.size(), reference.size(), engine.size());
  return out;
}

namespace {

void check_sources(const std::string& engine, const std::string& reference) {
  if (!engine.empty() && !reference.empty() && engine != reference)
    throw Error(ErrorKind::SourceMismatch, "engine report is for '" + engine + "', reference for '" + reference + "'");
}

std::vector<Keychain> relevant(const ReferenceReport& r) {
  std::vector<Keychain> out;
  for (const auto& line : r.keychains)
    if (!line.irrelevant) out.push_back(line.keychain);
  return out;
}

}  // namespace

ComparisonResult compare(const IndexReport& engine, const ReferenceReport& reference, const CompareOptions& options) {
  check_sources(engine.source_id, reference.source_id);
  std::vector<Keychain> side;
  for (const auto& a : engine.assigned) {
    if (a.status == CurationStatus::Rejected) continue;
    if (a.manual && !options.include_manual) continue;
    side.push_back(a.keychain);
  }
  return compare_keychains(side, relevant(reference), options.mode);
}

ComparisonResult compare(const ReferenceReport& engine, const ReferenceReport& reference,
                         const CompareOptions& options) {
  check_sources(engine.source_id, reference.source_id);
  return compare_keychains(relevant(engine), relevant(reference), options.mode);
}

CorpusMetrics corpus_metrics(const std::vector<ComparisonResult>& results) {
  if (results.empty()) throw Error(ErrorKind::EmptyCorpus, "no document pairs to aggregate");
  CorpusMetrics m;
  m.documents = results.size();
  std::size_t matched = 0, engine = 0, reference = 0;
  for (const auto& r : results) {
    matched += r.matched.size();
    engine += r.matched.size() + r.engine_only.size();
    reference += r.matched.size() + r.reference_only.size();
    m.macro_precision += r.precision;
    m.macro_recall += r.recall;
  }
  m.macro_precision /= static_cast<double>(results.size());
  m.macro_recall /= static_cast<double>(results.size());
  m.micro_precision = ratio(matched, engine, reference);
  m.micro_recall = ratio(matched, reference, engine);
  return m;
}

std::string summary_line(const ComparisonResult& result) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "P=%.6f R=%.6f mode=", result.precision, result.recall);
  return std::string(buf) + std::string(to_string(result.mode));
}

std::string render_comparison(const ComparisonResult& result) {
  std::string out;
  for (const auto& p : result.matched) out += p.engine.render() + "\t" + p.reference.render() + "\n";
  for (const auto& k : result.engine_only) out += k.render() + "\t\n";
  out += "---\n";
  for (const auto& k : result.reference_only) out += "\t" + k.render() + "\n";
  out += summary_line(result) + "\n";
  return out;
}

}  // namespace autex
