#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "autex/apd.hpp"
#include "autex/matchengine.hpp"
#include "autex/texprep.hpp"

namespace autex {

/// A compiled, immutable view of a dictionary. Safe to share across threads.
class ApdSnapshot {
 public:
  /// Compiles every entry. Entries that fail to compile are skipped and
  /// listed in `diagnostics()`; throws EmptyApd when nothing compiles.
  static std::shared_ptr<const ApdSnapshot> build(std::vector<ApdEntry> entries);

  const std::vector<ApdEntry>& entries() const { return entries_; }
  const std::vector<CompiledEntry>& compiled() const { return compiled_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  /// SHA-256 of the rendered APD file.
  const std::string& content_hash() const { return hash_; }
  const ApdEntry* entry(const std::string& id) const;

 private:
  std::vector<ApdEntry> entries_;         // compiled ones, in dictionary order
  std::vector<CompiledEntry> compiled_;
  std::vector<std::string> diagnostics_;
  std::string hash_;
};

std::string sha256_hex(std::string_view data);

struct IndexRequest {
  std::string source_id;
  std::string tex_source;
  PointerSet pointers;
  std::shared_ptr<const ApdSnapshot> apd;
  std::size_t gap_bound = kDefaultGapBound;
};

enum class CurationStatus { Auto, Confirmed, Rejected };
std::string_view to_string(CurationStatus s);
std::optional<CurationStatus> parse_status(std::string_view s);

struct AssignedKeychain {
  Keychain keychain;
  PointerSet sources;
  std::vector<MatchHit> hits;
  CurationStatus status = CurationStatus::Auto;
  bool manual = false;

  friend bool operator==(const AssignedKeychain&, const AssignedKeychain&) = default;
};

struct EngineConfig {
  PointerSet pointers;
  std::size_t gap_bound = kDefaultGapBound;
  std::string apd_hash;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct IndexReport {
  std::string source_id;
  std::vector<AssignedKeychain> assigned;  // first-hit order, manual entries last
  std::int64_t generated_at = 0;           // unix seconds
  EngineConfig config;

  const AssignedKeychain* find(const Keychain& k) const;
  friend bool operator==(const IndexReport&, const IndexReport&) = default;
};

/// Extracts, matches and aggregates. Throws MalformedTex.
IndexReport index_document(const IndexRequest& request);

/// Aggregation step on its own: one AssignedKeychain per distinct keychain
/// over the hits' entries, ordered by first supporting hit.
std::vector<AssignedKeychain> assign_keychains(const ApdSnapshot& apd, const std::vector<MatchHit>& hits);

/// Confirm or reject an assigned keychain. Confirming an absent keychain
/// inserts it as a manual entry; rejecting one throws
/// UnknownKeychainInReport. Hits are never touched.
IndexReport apply_correction(IndexReport report, const Keychain& keychain, CurationStatus new_status);
/// Undo: back to `auto`, manual insertions removed.
IndexReport reset_correction(IndexReport report, const Keychain& keychain);

/// Canonical report file. Rejected keychains are omitted unless
/// `include_rejected` is set.
std::string render_report(const IndexReport& report, bool include_rejected = false);
/// Reads the canonical file back; hits are not part of it.
IndexReport parse_report(std::string_view text);

/// Full-fidelity form used by the store: canonical header and lines
/// (rejected included) followed by `@` provenance records.
std::string render_report_archive(const IndexReport& report);
IndexReport parse_report_archive(std::string_view text);

/// FIFO of pending requests; a source id is pending at most once.
class ProcessQueue {
 public:
  /// Returns false (no-op) when the id is already pending.
  bool enqueue(IndexRequest request);
  std::vector<std::string> pending() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::vector<IndexRequest> drain();

 private:
  mutable std::mutex mutex_;
  std::deque<IndexRequest> pending_;
};

struct BatchError {
  std::string source_id;
  std::string kind;
  std::string message;
};

using BatchResult = std::variant<IndexReport, BatchError>;

/// Indexes the given requests in parallel; results follow input order and a
/// failing document yields a BatchError instead of aborting the batch.
std::vector<BatchResult> index_batch(const std::vector<IndexRequest>& requests);
std::vector<BatchResult> index_batch_serial(const std::vector<IndexRequest>& requests);

/// Drains the queue in order.
std::vector<BatchResult> run_batch(ProcessQueue& queue);

}  // namespace autex
