#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "autex/error.hpp"
#include "autex/store.hpp"

using namespace autex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("autex-store-" + std::to_string(::getpid()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

StoreState sample_state() {
  StoreState s;
  for (const auto& e : parse_apd(slurp(AUTEX_FIXTURES "/apd/example.apd"))) {
    for (const auto& k : e.keychains) s.vocabulary.ingest_keychain(k.render());
    s.apd.insert(e);
  }
  s.vocabulary.add_keyword("Majorana");
  const std::string tex =
      "\\documentclass{article}\\title{Axion decay into electron-positron pair}\\begin{document}\\maketitle"
      "\\begin{abstract}Leptogenesis in a plasma.\\end{abstract}\\end{document}";
  s.articles["hep-ph/9812408"] = {"hep-ph/9812408", {std::string("SLAC-1"), std::string("ax")}, tex, 1000, 2};
  s.articles["astro ph/1"] = {"astro ph/1", {}, "\\title{x}", 5, 1};
  auto report = index_document({"hep-ph/9812408", tex, {Pointer::Title, Pointer::Abstract},
                                ApdSnapshot::build(s.apd.entries())});
  report = apply_correction(report, parse_keychain("axion, leptonic decay"), CurationStatus::Rejected);
  report = apply_correction(report, parse_keychain("plasma"), CurationStatus::Confirmed);
  s.reports[report.source_id] = report;
  s.queue = {{"hep-ph/9812408", {Pointer::Title}, std::nullopt}, {"astro ph/1", {Pointer::FullText}, 12}};
  return s;
}

}  // namespace

TEST(StoreIds, EncodeDecode) {
  for (const auto* id : {"hep-ph/0106157", "a b", "..", ".hidden", "x%y", "plain-1.2_3", "ü"}) {
    const auto enc = encode_id(id);
    EXPECT_EQ(enc.find('/'), std::string::npos);
    EXPECT_NE(enc.front(), '.');
    EXPECT_EQ(decode_id(enc), id);
  }
  EXPECT_EQ(encode_id("hep-ph/0106157"), "hep-ph%2F0106157");
}

TEST(StoreQueue, RoundTrip) {
  const std::vector<QueueItem> q = {{"a/1", {Pointer::Title, Pointer::Abstract}, std::nullopt},
                                    {"b", {Pointer::FullText}, 48}};
  EXPECT_EQ(parse_queue(render_queue(q)), q);
  EXPECT_TRUE(parse_queue("").empty());
  EXPECT_THROW(parse_queue("a\tnowhere\n"), Error);
}

TEST(Store, EmptyRoundTrip) {
  TempDir dir;
  {
    Store store(dir.path);
    store.persist(StoreState{});
  }
  Store store(dir.path);
  EXPECT_EQ(store.load(), StoreState{});
}

TEST(Store, PersistLoadFixedPoint) {
  TempDir dir;
  const auto state = sample_state();
  {
    Store store(dir.path);
    store.persist(state);
  }
  Store store(dir.path);
  const auto loaded = store.load();
  EXPECT_EQ(loaded.apd, state.apd);
  EXPECT_EQ(loaded.vocabulary, state.vocabulary);
  EXPECT_EQ(loaded.articles, state.articles);
  EXPECT_EQ(loaded.reports, state.reports);
  EXPECT_EQ(loaded.queue, state.queue);
  const auto& r = loaded.reports.at("hep-ph/9812408");
  EXPECT_EQ(r.find(parse_keychain("axion, leptonic decay"))->status, CurationStatus::Rejected);
  EXPECT_TRUE(r.find(parse_keychain("plasma"))->manual);

  // persisting what was loaded changes nothing on disk
  const auto apd_file = slurp(dir.path / "apd.txt");
  store.persist(loaded);
  EXPECT_EQ(store.load(), loaded);
  EXPECT_EQ(slurp(dir.path / "apd.txt"), apd_file);
}

TEST(Store, ApdFileIsTheApdFormat) {
  TempDir dir;
  Store store(dir.path);
  const auto state = sample_state();
  store.save_apd(state.apd);
  EXPECT_EQ(slurp(dir.path / "apd.txt"), slurp(AUTEX_FIXTURES "/apd/example.apd"));
}

TEST(Store, SingleWriterLock) {
  TempDir dir;
  Store first(dir.path);
  try {
    Store second(dir.path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StoreLocked);
  }
}

TEST(Store, LockReleasedOnDestruction) {
  TempDir dir;
  { Store first(dir.path); }
  EXPECT_NO_THROW(Store second(dir.path));
}

TEST(Store, CorruptFileNamesFileAndLine) {
  TempDir dir;
  Store store(dir.path);
  store.persist(sample_state());
  std::ofstream(dir.path / "apd.txt", std::ios::app) << "\n@entry broken\npattern: x\n";
  try {
    store.load();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CorruptStore);
    const std::string what = e.what();
    EXPECT_NE(what.find("apd.txt"), std::string::npos);
    EXPECT_NE(what.find("line"), std::string::npos);
  }
}

TEST(Store, AtomicWriteLeavesNoTempFiles) {
  TempDir dir;
  fs::create_directories(dir.path);
  write_atomic(dir.path / "f.txt", "one");
  write_atomic(dir.path / "f.txt", "two");
  EXPECT_EQ(read_file(dir.path / "f.txt"), "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
  EXPECT_EQ(files, 1u);
  EXPECT_THROW(read_file(dir.path / "missing"), Error);
}
