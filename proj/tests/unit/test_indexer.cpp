#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "autex/error.hpp"
#include "autex/indexer.hpp"

using namespace autex;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const ApdSnapshot> example_apd() {
  static const auto snap = ApdSnapshot::build(parse_apd(slurp(AUTEX_FIXTURES "/apd/example.apd")));
  return snap;
}

std::string doc(const std::string& title, const std::string& abstract, const std::string& body = "") {
  return "\\documentclass{article}\n\\title{" + title + "}\n\\begin{document}\n\\maketitle\n\\begin{abstract}\n" +
         abstract + "\n\\end{abstract}\n" + body + "\n\\end{document}\n";
}

IndexRequest request(std::string id, std::string tex, PointerSet pointers = {Pointer::Title, Pointer::Abstract},
                     std::shared_ptr<const ApdSnapshot> apd = example_apd()) {
  return {std::move(id), std::move(tex), std::move(pointers), std::move(apd)};
}

std::set<std::string> keychains(const IndexReport& r) {
  std::set<std::string> out;
  for (const auto& a : r.assigned) out.insert(a.keychain.render());
  return out;
}

}  // namespace

TEST(Snapshot, HashAndDiagnostics) {
  const auto entries = parse_apd(slurp(AUTEX_FIXTURES "/apd/example.apd"));
  EXPECT_EQ(example_apd()->content_hash(), sha256_hex(render_apd(entries)));
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  auto with_bad = entries;
  with_bad.push_back({"bad", {"massless[ \\w+neutrinos?"}, {parse_keychain("neutrino, massless")}, {}});
  const auto snap = ApdSnapshot::build(with_bad);
  EXPECT_EQ(snap->entries().size(), 4u);
  ASSERT_EQ(snap->diagnostics().size(), 1u);
  EXPECT_NE(snap->diagnostics()[0].find("bad"), std::string::npos);

  try {
    ApdSnapshot::build({{"bad", {"x[y"}, {parse_keychain("k")}, {}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyApd);
  }
}

TEST(Index, SingleEntry) {
  const auto snap = ApdSnapshot::build({{"e1", {"leptogenesis"}, {parse_keychain("lepton, production")}, {}}});
  const auto r = index_document(request("a", doc("On baryons", "We discuss leptogenesis."), {Pointer::Title, Pointer::Abstract}, snap));
  ASSERT_EQ(r.assigned.size(), 1u);
  EXPECT_EQ(r.assigned[0].keychain.render(), "lepton, production");
  EXPECT_EQ(r.assigned[0].sources, (PointerSet{Pointer::Abstract}));
  EXPECT_EQ(r.assigned[0].status, CurationStatus::Auto);
  EXPECT_EQ(r.config.apd_hash, snap->content_hash());
}

TEST(Index, VirtualPhotonEntryYieldsFourKeychains) {
  const auto r = index_document(request("v", doc("Neutrino pair production by a virtual photon", "Nothing here.")));
  ASSERT_EQ(r.assigned.size(), 4u);
  EXPECT_EQ(keychains(r), (std::set<std::string>{"neutrino, pair production", "neutrino, photoproduction",
                                                 "photon, off-shell", "photon → neutrino antineutrino"}));
  for (const auto& a : r.assigned) {
    ASSERT_EQ(a.hits.size(), 1u);
    EXPECT_EQ(a.hits[0], r.assigned[0].hits[0]);
  }
}

TEST(Index, EachExampleEntryYieldsItsKeychains) {
  const std::vector<std::pair<std::string, std::set<std::string>>> cases = {
      {"Leptogenesis", {"lepton, production"}},
      {"A horizontal abelian charge", {"horizontal symmetry", "charge, abelian"}},
      {"The axion decay $a \\to e^+ e^-$",
       {"axion, leptonic decay", "electron, pair production", "axion → positron electron"}},
      {"Rate of $\\gamma_{virt}\\to\\nu\\bar\\nu$",
       {"neutrino, pair production", "neutrino, photoproduction", "photon, off-shell",
        "photon → neutrino antineutrino"}},
  };
  for (const auto& [title, expected] : cases)
    EXPECT_EQ(keychains(index_document(request("x", doc(title, "")))), expected) << title;
}

TEST(Index, NoMatchIsEmptyAndPrintable) {
  const auto r = index_document(request("n", doc("Unrelated", "Nothing to see.")));
  EXPECT_TRUE(r.assigned.empty());
  EXPECT_EQ(parse_report(render_report(r)).source_id, "n");
}

TEST(Index, UnionSemanticsAndMerging) {
  const auto snap = ApdSnapshot::build({
      {"a", {"neutrino mass"}, {parse_keychain("neutrino, mass")}, {}},
      {"b", {"massive neutrinos?"}, {parse_keychain("neutrino, mass"), parse_keychain("neutrino, massive")}, {}},
      {"c", {"supersymmetry"}, {parse_keychain("supersymmetry")}, {}},
  });
  const auto r = index_document(request("u", doc("Massive neutrinos", "The neutrino mass and massive neutrino."), {Pointer::Title, Pointer::Abstract}, snap));
  // brute force: union over matched entries
  const auto parts = extract_parts(doc("Massive neutrinos", "The neutrino mass and massive neutrino."), {Pointer::Title, Pointer::Abstract});
  std::set<std::string> expected;
  std::size_t hits = 0;
  for (const auto& h : match_document(snap->compiled(), parts)) {
    for (const auto& k : snap->entry(h.entry_id)->keychains) expected.insert(k.render());
    ++hits;
  }
  EXPECT_EQ(keychains(r), expected);
  EXPECT_EQ(expected, (std::set<std::string>{"neutrino, mass", "neutrino, massive"}));
  const auto* mass = r.find(parse_keychain("neutrino, mass"));
  ASSERT_TRUE(mass);
  EXPECT_EQ(mass->hits.size(), hits);
  EXPECT_EQ(mass->sources, (PointerSet{Pointer::Title, Pointer::Abstract}));
  EXPECT_EQ(r.assigned[0].keychain.render(), "neutrino, mass");
}

TEST(Index, MonotoneInPointers) {
  const std::string body = "\\section{Axions}In a plasma, leptogenesis and the axion decay $a\\to e^+e^-$.";
  const auto tex = doc("Horizontal abelian charge", "nothing", body);
  for (const auto& p : std::vector<PointerSet>{{Pointer::Title}, {Pointer::Abstract}, {Pointer::Section}, {Pointer::Title, Pointer::Abstract}}) {
    auto with_full = p;
    with_full.insert(Pointer::FullText);
    const auto small = keychains(index_document(request("m", tex, p)));
    const auto big = keychains(index_document(request("m", tex, with_full)));
    for (const auto& k : small) EXPECT_TRUE(big.count(k)) << k;
  }
  // the title sits in the preamble, outside the body
  EXPECT_EQ(keychains(index_document(request("m", tex, {Pointer::FullText}))).size(), 4u);
}

TEST(Index, CanonicalReportIsDeterministic) {
  const auto tex = doc("Axion decay into electron-positron pair", "and leptogenesis");
  const auto first = render_report(index_document(request("d", tex)));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(render_report(index_document(request("d", tex))), first);
}

TEST(Index, MalformedTex) {
  try {
    index_document(request("bad", doc("Open {brace", "")));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedTex);
  }
}

TEST(Correction, RejectConfirmInsert) {
  const auto base = index_document(request("c", doc("Axion decay into electron-positron pair", "")));
  const auto decay = parse_keychain("axion, leptonic decay");
  const auto rejected = apply_correction(base, decay, CurationStatus::Rejected);
  EXPECT_EQ(rejected.find(decay)->status, CurationStatus::Rejected);
  EXPECT_EQ(render_report(rejected).find("axion, leptonic decay"), std::string::npos);
  EXPECT_NE(render_report(rejected, true).find("axion, leptonic decay\ttitle\trejected"), std::string::npos);
  EXPECT_EQ(rejected.find(decay)->hits, base.find(decay)->hits);

  const auto confirmed = apply_correction(base, decay, CurationStatus::Confirmed);
  EXPECT_EQ(confirmed.find(decay)->status, CurationStatus::Confirmed);
  EXPECT_EQ(confirmed.assigned.size(), base.assigned.size());

  const auto manual = parse_keychain("coupling, (axion photon)");
  const auto inserted = apply_correction(base, manual, CurationStatus::Confirmed);
  const auto* m = inserted.find(manual);
  ASSERT_TRUE(m);
  EXPECT_TRUE(m->manual);
  EXPECT_TRUE(m->sources.empty());
  EXPECT_TRUE(m->hits.empty());
  EXPECT_NE(render_report(inserted).find("coupling, (axion photon)\tmanual\tconfirmed"), std::string::npos);

  try {
    apply_correction(base, parse_keychain("plasma"), CurationStatus::Rejected);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownKeychainInReport);
  }
}

TEST(Correction, ResetRecoversOriginal) {
  const auto base = index_document(request("c", doc("Axion decay into electron-positron pair", "leptogenesis")));
  for (const auto& a : base.assigned)
    for (auto s : {CurationStatus::Confirmed, CurationStatus::Rejected})
      EXPECT_EQ(reset_correction(apply_correction(base, a.keychain, s), a.keychain), base);
  const auto manual = parse_keychain("plasma");
  EXPECT_EQ(reset_correction(apply_correction(base, manual, CurationStatus::Confirmed), manual), base);
  EXPECT_THROW(reset_correction(base, manual), Error);
}

TEST(ReportFile, CanonicalRoundTrip) {
  auto r = index_document(request("hep-ph/0000001", doc("Axion decay into electron-positron pair", "Leptogenesis.")));
  r = apply_correction(r, parse_keychain("plasma"), CurationStatus::Confirmed);
  r = apply_correction(r, parse_keychain("lepton, production"), CurationStatus::Confirmed);
  const auto text = render_report(r);
  EXPECT_EQ(text.rfind("# autex-report v1\nsource: hep-ph/0000001\napd: " + example_apd()->content_hash() +
                           "\npointers: title,abstract\n",
                       0),
            0u);
  EXPECT_EQ(render_report(parse_report(text)), text);
  EXPECT_EQ(keychains(parse_report(text)), keychains(r));
}

TEST(ReportFile, ArchiveRoundTripIsExact) {
  auto r = index_document(request("x/1", doc("Axion decay into electron-positron pair", "leptogenesis $\\gamma_{virt} \\to \\nu \\bar\\nu$")));
  r = apply_correction(r, parse_keychain("lepton, production"), CurationStatus::Rejected);
  r = apply_correction(r, parse_keychain("plasma"), CurationStatus::Confirmed);
  r.config.gap_bound = 17;
  const auto text = render_report_archive(r);
  EXPECT_EQ(parse_report_archive(text), r);
  EXPECT_EQ(render_report_archive(parse_report_archive(text)), text);
}

TEST(ReportFile, ParseErrorsCarryLineNumbers) {
  const std::string bad = "# autex-report v1\nsource: a\napd: h\npointers: title\nfoo\tnowhere\tauto\n";
  try {
    parse_report(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
  }
  EXPECT_THROW(parse_report("not a report\n"), Error);
}

TEST(Queue, StateMachine) {
  ProcessQueue q;
  EXPECT_TRUE(q.enqueue(request("A", doc("t", ""))));
  EXPECT_TRUE(q.enqueue(request("B", doc("t", ""))));
  EXPECT_FALSE(q.enqueue(request("A", doc("t", ""))));
  EXPECT_EQ(q.pending(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(run_batch(q).size(), 2u);
  EXPECT_TRUE(q.empty());
  EXPECT_TRUE(q.enqueue(request("A", doc("t", ""))));
  EXPECT_EQ(q.pending(), (std::vector<std::string>{"A"}));
}

TEST(Batch, FailuresDoNotAbort) {
  ProcessQueue q;
  EXPECT_TRUE(run_batch(q).empty());
  q.enqueue(request("A", doc("Broken {title", "")));
  q.enqueue(request("B", doc("Leptogenesis", "")));
  const auto results = run_batch(q);
  ASSERT_EQ(results.size(), 2u);
  ASSERT_TRUE(std::holds_alternative<BatchError>(results[0]));
  EXPECT_EQ(std::get<BatchError>(results[0]).source_id, "A");
  EXPECT_EQ(std::get<BatchError>(results[0]).kind, "MalformedTex");
  ASSERT_TRUE(std::holds_alternative<IndexReport>(results[1]));
  EXPECT_EQ(std::get<IndexReport>(results[1]).source_id, "B");
}

TEST(Batch, ParallelEqualsSerial) {
  std::vector<IndexRequest> reqs;
  const std::vector<std::string> titles = {"Leptogenesis", "Horizontal abelian charge", "x {", "Axion decay into electron- positron pair",
                                           "virtual", "$\\gamma_{virt}\\to\\nu\\bar\\nu$"};
  for (int i = 0; i < 24; ++i) reqs.push_back(request("d" + std::to_string(i), doc(titles[i % titles.size()], "leptogenesis")));
  const auto par = index_batch(reqs);
  const auto ser = index_batch_serial(reqs);
  ASSERT_EQ(par.size(), ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    ASSERT_EQ(par[i].index(), ser[i].index());
    if (auto* r = std::get_if<IndexReport>(&par[i])) {
      auto a = *r, b = std::get<IndexReport>(ser[i]);
      a.generated_at = b.generated_at = 0;
      EXPECT_EQ(a, b);
    }
  }
}
