#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autex/apd.hpp"
#include "autex/indexer.hpp"
#include "autex/vocabulary.hpp"

namespace autex {

struct ArticleProfile {
  std::optional<std::string> slac_id;
  std::optional<std::string> prefix;
  friend bool operator==(const ArticleProfile&, const ArticleProfile&) = default;
};

struct ArticleRecord {
  std::string source_id;
  ArticleProfile profile;
  std::string tex_source;
  std::int64_t uploaded_at = 0;
  int revision = 1;
  friend bool operator==(const ArticleRecord&, const ArticleRecord&) = default;
};

struct QueueItem {
  std::string source_id;
  PointerSet pointers;
  std::optional<std::size_t> gap_bound;
  friend bool operator==(const QueueItem&, const QueueItem&) = default;
};

struct StoreState {
  Vocabulary vocabulary;
  Apd apd;
  std::map<std::string, ArticleRecord> articles;  // latest revision
  std::map<std::string, IndexReport> reports;
  std::vector<QueueItem> queue;

  friend bool operator==(const StoreState&, const StoreState&) = default;
};

/// Percent-encoding used for file names derived from source ids.
std::string encode_id(std::string_view id);
std::string decode_id(std::string_view name);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// A store root on disk. The constructor creates the layout when missing
/// and takes the single-writer lock (StoreLocked if another holder exists).
class Store {
 public:
  explicit Store(std::filesystem::path root);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& root() const { return root_; }

  /// Reads everything. Throws CorruptStore naming the file and line.
  StoreState load() const;
  void persist(const StoreState& state);

  void save_vocabulary(const Vocabulary& vocabulary);
  void save_apd(const Apd& apd);
  /// Writes a new revision file plus the profile.
  void save_article(const ArticleRecord& record);
  void save_profile(const ArticleRecord& record);
  void save_report(const IndexReport& report);
  void save_queue(const std::vector<QueueItem>& queue);

 private:
  std::filesystem::path root_;
  int lock_fd_ = -1;
};

std::string render_queue(const std::vector<QueueItem>& queue);
std::vector<QueueItem> parse_queue(std::string_view text);

}  // namespace autex
