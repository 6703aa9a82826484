#include "autex/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "autex/error.hpp"
#include "autex/text.hpp"

namespace fs = std::filesystem;

namespace autex {

namespace {

constexpr const char* kKeywords = "keywords.txt";
constexpr const char* kKeychains = "keychains.txt";
constexpr const char* kApd = "apd.txt";
constexpr const char* kQueue = "queue.txt";
constexpr const char* kArticles = "articles";
constexpr const char* kReports = "reports";

Error corrupt(const fs::path& file, const std::string& what) {
  return Error(ErrorKind::CorruptStore, file.string() + ": " + what);
}

bool id_safe(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
         c == '.';
}

}  // namespace

std::string encode_id(std::string_view id) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (std::size_t i = 0; i < id.size(); ++i) {
    const auto c = static_cast<unsigned char>(id[i]);
    // a leading dot would make hidden files or "." / ".."
    if (id_safe(c) && !(i == 0 && c == '.')) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string decode_id(std::string_view name) {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '%' && i + 2 < name.size()) {
      out.push_back(static_cast<char>(std::stoi(std::string(name.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(name[i]);
    }
  }
  return out;
}

void write_atomic(const fs::path& path, std::string_view content) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render_queue(const std::vector<QueueItem>& queue) {
  std::string out;
  for (const auto& q : queue) {
    out += q.source_id + "\t" + render_pointer_list(q.pointers);
    if (q.gap_bound) out += "\t" + std::to_string(*q.gap_bound);
    out += "\n";
  }
  return out;
}

std::vector<QueueItem> parse_queue(std::string_view content) {
  std::vector<QueueItem> out;
  const auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto where = "line " + std::to_string(i + 1) + ": ";
    std::vector<std::string> f;
    std::stringstream ss(lines[i]);
    for (std::string part; std::getline(ss, part, '\t');) f.push_back(part);
    if (f.size() < 2 || f.size() > 3) throw Error(ErrorKind::ParseError, where + "expected id, pointers[, gap bound]");
    QueueItem item{f[0], {}, std::nullopt};
    try {
      item.pointers = parse_pointer_list(f[1]);
      if (f.size() == 3) item.gap_bound = std::stoull(f[2]);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::ParseError, where + e.what());
    }
    out.push_back(std::move(item));
  }
  return out;
}

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / kArticles, ec);
  fs::create_directories(root_ / kReports, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create store at " + root_.string() + ": " + ec.message());
  const auto lock_path = root_ / ".lock";
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw Error(ErrorKind::Io, "cannot open " + lock_path.string() + ": " + std::strerror(errno));
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorKind::StoreLocked, "store " + root_.string() + " is held by another process");
  }
}

Store::~Store() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

namespace {

std::string read_optional(const fs::path& p) { return fs::exists(p) ? read_file(p) : std::string(); }

ArticleRecord load_article(const fs::path& dir) {
  const auto meta_path = dir / "meta";
  ArticleRecord rec;
  rec.source_id = decode_id(dir.filename().string());
  const auto lines = text::split_lines(read_file(meta_path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto colon = lines[i].find(": ");
    if (colon == std::string::npos) throw corrupt(meta_path, "line " + std::to_string(i + 1) + ": expected key: value");
    const auto key = lines[i].substr(0, colon);
    const auto value = lines[i].substr(colon + 2);
    try {
      if (key == "source") rec.source_id = value;
      else if (key == "revision") rec.revision = std::stoi(value);
      else if (key == "uploaded") rec.uploaded_at = std::stoll(value);
      else if (key == "slac_id") rec.profile.slac_id = value;
      else if (key == "prefix") rec.profile.prefix = value;
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::exception& e) {
      throw corrupt(meta_path, "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  const auto tex = dir / ("r" + std::to_string(rec.revision) + ".tex");
  if (!fs::exists(tex)) throw corrupt(tex, "missing revision file");
  rec.tex_source = read_file(tex);
  return rec;
}

std::string render_meta(const ArticleRecord& rec) {
  std::string out = "source: " + rec.source_id + "\nrevision: " + std::to_string(rec.revision) +
                    "\nuploaded: " + std::to_string(rec.uploaded_at) + "\n";
  if (rec.profile.slac_id) out += "slac_id: " + *rec.profile.slac_id + "\n";
  if (rec.profile.prefix) out += "prefix: " + *rec.profile.prefix + "\n";
  return out;
}

template <typename F>
void as_corrupt(const fs::path& file, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptStore || e.kind() == ErrorKind::Io) throw;
    throw corrupt(file, e.what());
  }
}

}  // namespace

StoreState Store::load() const {
  StoreState state;

  const auto kw_path = root_ / kKeywords;
  const auto kw_lines = text::split_lines(read_optional(kw_path));
  for (std::size_t i = 0; i < kw_lines.size(); ++i) {
    const auto line = text::trim(kw_lines[i]);
    if (line.empty() || line[0] == '#') continue;
    as_corrupt(kw_path, [&] {
      try {
        state.vocabulary.add_keyword(line);
      } catch (const Error& e) {
        throw Error(e.kind(), "line " + std::to_string(i + 1) + ": " + e.what());
      }
    });
  }
  const auto kc_path = root_ / kKeychains;
  const auto kc_lines = text::split_lines(read_optional(kc_path));
  for (std::size_t i = 0; i < kc_lines.size(); ++i) {
    const auto line = text::trim(kc_lines[i]);
    if (line.empty() || line[0] == '#') continue;
    as_corrupt(kc_path, [&] {
      try {
        state.vocabulary.ingest_keychain(line);
      } catch (const Error& e) {
        throw Error(e.kind(), "line " + std::to_string(i + 1) + ": " + e.what());
      }
    });
  }

  const auto apd_path = root_ / kApd;
  as_corrupt(apd_path, [&] {
    for (auto& e : parse_apd(read_optional(apd_path))) state.apd.insert(std::move(e));
  });

  for (const auto& dir : fs::directory_iterator(root_ / kArticles)) {
    if (!dir.is_directory()) continue;
    auto rec = load_article(dir.path());
    state.articles.emplace(rec.source_id, std::move(rec));
  }

  for (const auto& file : fs::directory_iterator(root_ / kReports)) {
    if (file.path().extension() != ".report") continue;
    as_corrupt(file.path(), [&] {
      auto report = parse_report_archive(read_file(file.path()));
      state.reports.emplace(report.source_id, std::move(report));
    });
  }

  const auto queue_path = root_ / kQueue;
  as_corrupt(queue_path, [&] { state.queue = parse_queue(read_optional(queue_path)); });
  return state;
}

void Store::save_vocabulary(const Vocabulary& vocabulary) {
  write_atomic(root_ / kKeywords, render_keyword_file(vocabulary));
  write_atomic(root_ / kKeychains, render_keychain_file(vocabulary));
}

void Store::save_apd(const Apd& apd) { write_atomic(root_ / kApd, render_apd(apd.entries())); }

void Store::save_article(const ArticleRecord& record) {
  const auto dir = root_ / kArticles / encode_id(record.source_id);
  write_atomic(dir / ("r" + std::to_string(record.revision) + ".tex"), record.tex_source);
  save_profile(record);
}

void Store::save_profile(const ArticleRecord& record) {
  write_atomic(root_ / kArticles / encode_id(record.source_id) / "meta", render_meta(record));
}

void Store::save_report(const IndexReport& report) {
  write_atomic(root_ / kReports / (encode_id(report.source_id) + ".report"), render_report_archive(report));
}

void Store::save_queue(const std::vector<QueueItem>& queue) { write_atomic(root_ / kQueue, render_queue(queue)); }

void Store::persist(const StoreState& state) {
  save_vocabulary(state.vocabulary);
  save_apd(state.apd);
  for (const auto& [id, rec] : state.articles) save_article(rec);
  for (const auto& [id, report] : state.reports) save_report(report);
  save_queue(state.queue);
}

}  // namespace autex
