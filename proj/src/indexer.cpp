#include "autex/indexer.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <map>

#include "autex/error.hpp"
#include "autex/text.hpp"

namespace autex {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string out;
  out.reserve(len * 2);
  static constexpr char kHex[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::shared_ptr<const ApdSnapshot> ApdSnapshot::build(std::vector<ApdEntry> entries) {
  auto snap = std::make_shared<ApdSnapshot>();
  snap->hash_ = sha256_hex(render_apd(entries));
  for (auto& entry : entries) {
    try {
      auto compiled = compile_entry(entry);
      snap->compiled_.push_back(std::move(compiled));
      snap->entries_.push_back(std::move(entry));
    } catch (const Error& e) {
      snap->diagnostics_.push_back("entry " + entry.id + ": " + e.what());
    }
  }
  if (snap->compiled_.empty()) throw Error(ErrorKind::EmptyApd, "the dictionary has no compilable entries");
  return snap;
}

const ApdEntry* ApdSnapshot::entry(const std::string& id) const {
  for (const auto& e : entries_)
    if (e.id == id) return &e;
  return nullptr;
}

std::string_view to_string(CurationStatus s) {
  switch (s) {
    case CurationStatus::Auto: return "auto";
    case CurationStatus::Confirmed: return "confirmed";
    case CurationStatus::Rejected: return "rejected";
  }
  return "auto";
}

std::optional<CurationStatus> parse_status(std::string_view s) {
  if (s == "auto") return CurationStatus::Auto;
  if (s == "confirmed") return CurationStatus::Confirmed;
  if (s == "rejected") return CurationStatus::Rejected;
  return std::nullopt;
}

const AssignedKeychain* IndexReport::find(const Keychain& k) const {
  for (const auto& a : assigned)
    if (a.keychain == k) return &a;
  return nullptr;
}

std::vector<AssignedKeychain> assign_keychains(const ApdSnapshot& apd, const std::vector<MatchHit>& hits) {
  std::vector<AssignedKeychain> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& hit : hits) {
    const auto* entry = apd.entry(hit.entry_id);
    if (!entry) continue;
    for (const auto& chain : entry->keychains) {
      auto [it, inserted] = slot.try_emplace(chain.key(), out.size());
      if (inserted) out.push_back({chain, {}, {}, CurationStatus::Auto, false});
      auto& assigned = out[it->second];
      assigned.hits.push_back(hit);
      assigned.sources.insert(hit.origin);
    }
  }
  return out;
}

IndexReport index_document(const IndexRequest& request) {
  if (!request.apd) throw Error(ErrorKind::EmptyApd, "no dictionary snapshot");
  const auto parts = extract_parts(request.tex_source, request.pointers, request.source_id);
  const auto hits = match_document(request.apd->compiled(), parts, {request.gap_bound});

  IndexReport report;
  report.source_id = request.source_id;
  report.assigned = assign_keychains(*request.apd, hits);
  report.generated_at = std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();
  report.config = {request.pointers, request.gap_bound, request.apd->content_hash()};
  return report;
}

IndexReport apply_correction(IndexReport report, const Keychain& keychain, CurationStatus new_status) {
  for (auto& a : report.assigned) {
    if (a.keychain == keychain) {
      a.status = new_status;
      return report;
    }
  }
  if (new_status != CurationStatus::Confirmed)
    throw Error(ErrorKind::UnknownKeychainInReport,
                "keychain '" + keychain.render() + "' is not in the report for " + report.source_id);
  report.assigned.push_back({keychain, {}, {}, CurationStatus::Confirmed, true});
  return report;
}

IndexReport reset_correction(IndexReport report, const Keychain& keychain) {
  auto it = std::find_if(report.assigned.begin(), report.assigned.end(),
                         [&](const AssignedKeychain& a) { return a.keychain == keychain; });
  if (it == report.assigned.end())
    throw Error(ErrorKind::UnknownKeychainInReport,
                "keychain '" + keychain.render() + "' is not in the report for " + report.source_id);
  if (it->manual) {
    report.assigned.erase(it);
  } else {
    it->status = CurationStatus::Auto;
  }
  return report;
}

namespace {

constexpr std::string_view kReportMagic = "# autex-report v1";

std::string render_line(const AssignedKeychain& a) {
  std::string out = a.keychain.render() + "\t";
  out += a.manual ? std::string("manual") : render_pointer_list(a.sources);
  out += "\t";
  out += to_string(a.status);
  out += "\n";
  return out;
}

std::string render_common(const IndexReport& report, bool include_rejected, bool archive) {
  std::string out(kReportMagic);
  out += "\nsource: " + report.source_id;
  out += "\napd: " + report.config.apd_hash;
  out += "\npointers: " + render_pointer_list(report.config.pointers) + "\n";
  if (archive) {
    out += "generated: " + std::to_string(report.generated_at) + "\n";
    out += "gap-bound: " + std::to_string(report.config.gap_bound) + "\n";
  }
  for (bool manual : {false, true})
    for (const auto& a : report.assigned)
      if (a.manual == manual && (include_rejected || a.status != CurationStatus::Rejected))
        out += render_line(a);
  return out;
}

Error report_error(std::size_t line, const std::string& what) {
  return Error(ErrorKind::ParseError, "report line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::size_t to_size(std::string_view s, std::size_t line) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw report_error(line, "expected a number, got '" + std::string(s) + "'");
  return std::stoull(std::string(s));
}

IndexReport parse_common(std::string_view content, bool archive) {
  const auto lines = text::split_lines(content);
  IndexReport report;
  if (lines.size() < 4 || lines[0] != kReportMagic) throw report_error(1, "missing '# autex-report v1' header");

  const auto header = [&](std::size_t i, std::string_view key) -> std::string {
    const std::string prefix = std::string(key) + ": ";
    if (lines[i].rfind(prefix, 0) != 0 && lines[i] != std::string(key) + ":")
      throw report_error(i + 1, "expected '" + std::string(key) + ":'");
    return lines[i].size() > prefix.size() ? lines[i].substr(prefix.size()) : std::string();
  };
  report.source_id = header(1, "source");
  report.config.apd_hash = header(2, "apd");
  try {
    report.config.pointers = parse_pointer_list(header(3, "pointers"));
  } catch (const Error& e) {
    throw report_error(4, e.what());
  }

  std::size_t i = 4;
  if (archive) {
    if (lines.size() < 6) throw report_error(lines.size(), "truncated archive header");
    const auto generated = header(4, "generated");
    try {
      report.generated_at = std::stoll(generated);
    } catch (const std::exception&) {
      throw report_error(5, "bad timestamp");
    }
    report.config.gap_bound = to_size(header(5, "gap-bound"), 6);
    i = 6;
  }

  for (; i < lines.size(); ++i) {
    const auto lineno = i + 1;
    const auto& line = lines[i];
    if (line.empty()) continue;
    if (archive && line.rfind("@hit ", 0) == 0) {
      const auto f = split_tabs(std::string_view(line).substr(5));
      if (f.size() != 7) throw report_error(lineno, "@hit needs 7 fields");
      const auto idx = to_size(f[0], lineno);
      if (idx >= report.assigned.size()) throw report_error(lineno, "@hit refers to an unknown line");
      const auto origin = parse_pointer(f[3]);
      if (!origin) throw report_error(lineno, "unknown pointer '" + f[3] + "'");
      MatchHit hit{f[1], to_size(f[2], lineno), *origin, to_size(f[4], lineno),
                   {to_size(f[5], lineno), to_size(f[6], lineno)}};
      report.assigned[idx].hits.push_back(std::move(hit));
      continue;
    }
    const auto f = split_tabs(line);
    if (f.size() != 3) throw report_error(lineno, "expected '<keychain>\\t<pointers>\\t<status>'");
    AssignedKeychain a{parse_keychain(f[0]), {}, {}, CurationStatus::Auto, false};
    if (f[1] == "manual") {
      a.manual = true;
    } else {
      try {
        a.sources = parse_pointer_list(f[1]);
      } catch (const Error& e) {
        throw report_error(lineno, e.what());
      }
    }
    const auto status = parse_status(f[2]);
    if (!status) throw report_error(lineno, "unknown status '" + f[2] + "'");
    a.status = *status;
    report.assigned.push_back(std::move(a));
  }
  return report;
}

}  // namespace

std::string render_report(const IndexReport& report, bool include_rejected) {
  return render_common(report, include_rejected, false);
}

IndexReport parse_report(std::string_view content) { return parse_common(content, false); }

std::string render_report_archive(const IndexReport& report) {
  // Lines are written in render order; @hit records refer to that order.
  std::vector<const AssignedKeychain*> order;
  for (bool manual : {false, true})
    for (const auto& a : report.assigned)
      if (a.manual == manual) order.push_back(&a);

  std::string out = render_common(report, true, true);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& h : order[i]->hits) {
      out += "@hit " + std::to_string(i) + "\t" + h.entry_id + "\t" + std::to_string(h.alternative_index) +
             "\t" + std::string(to_string(h.origin)) + "\t" + std::to_string(h.slice_ordinal) + "\t" +
             std::to_string(h.span.start) + "\t" + std::to_string(h.span.end) + "\n";
    }
  }
  return out;
}

IndexReport parse_report_archive(std::string_view content) { return parse_common(content, true); }

bool ProcessQueue::enqueue(IndexRequest request) {
  std::scoped_lock lock(mutex_);
  for (const auto& r : pending_)
    if (r.source_id == request.source_id) return false;
  pending_.push_back(std::move(request));
  return true;
}

std::vector<std::string> ProcessQueue::pending() const {
  std::scoped_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& r : pending_) ids.push_back(r.source_id);
  return ids;
}

std::size_t ProcessQueue::size() const {
  std::scoped_lock lock(mutex_);
  return pending_.size();
}

std::vector<IndexRequest> ProcessQueue::drain() {
  std::scoped_lock lock(mutex_);
  std::vector<IndexRequest> out(std::make_move_iterator(pending_.begin()),
                                std::make_move_iterator(pending_.end()));
  pending_.clear();
  return out;
}

namespace {

BatchResult index_one(const IndexRequest& request) {
  try {
    return index_document(request);
  } catch (const Error& e) {
    return BatchError{request.source_id, std::string(to_string(e.kind())), e.what()};
  } catch (const std::exception& e) {
    return BatchError{request.source_id, "Internal", e.what()};
  }
}

}  // namespace

std::vector<BatchResult> index_batch_serial(const std::vector<IndexRequest>& requests) {
  std::vector<BatchResult> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(index_one(r));
  return out;
}

std::vector<BatchResult> index_batch(const std::vector<IndexRequest>& requests) {
  std::vector<std::optional<BatchResult>> slots(requests.size());
  const auto n = static_cast<long>(requests.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) slots[static_cast<std::size_t>(i)] = index_one(requests[static_cast<std::size_t>(i)]);
  std::vector<BatchResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<BatchResult> run_batch(ProcessQueue& queue) { return index_batch(queue.drain()); }

}  // namespace autex
