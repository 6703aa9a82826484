#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "autex/error.hpp"
#include "autex/matchengine.hpp"
#include "autex/text.hpp"
#include "support/oracles.hpp"

using namespace autex;

namespace {

TextSlice slice_of(const std::string& s, Pointer p = Pointer::Abstract) {
  return TextSlice{s, p, {0, text::length(s)}, 0};
}

std::vector<CompiledEntry> compile_one(std::vector<std::string> alternatives) {
  ApdEntry e{"x1", std::move(alternatives), {parse_keychain("k")}, std::nullopt};
  return {compile_entry(e)};
}

std::size_t count_hits(const std::string& pattern, const std::string& text, std::size_t gap = kDefaultGapBound) {
  return match_slice(compile_one(split_alternatives(pattern)), slice_of(text), {gap}).size();
}

std::vector<Span> spans(const std::vector<MatchHit>& hits) {
  std::vector<Span> out;
  for (const auto& h : hits) out.push_back(h.span);
  return out;
}

ErrorKind compile_error(const std::string& s) {
  try {
    compile_alternative(s);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

}  // namespace

TEST(Matcher, MasslessNeutrinoExample) {
  EXPECT_EQ(count_hits("massless[ \\w]+neutrinos?", "massless chiral neutrinos"), 1u);
  EXPECT_EQ(count_hits("massless[ \\w]+neutrinos?", "the neutrino is assumed to be massless"), 0u);
  const std::string both = "massless[ \\w]+neutrinos?|neutrinos?[ \\w]+massless";
  EXPECT_EQ(count_hits(both, "massless chiral neutrinos"), 1u);
  EXPECT_EQ(count_hits(both, "the neutrino is assumed to be massless"), 1u);
  // the false positive the engine cannot avoid
  EXPECT_EQ(count_hits(both, "neutrino decays into some particles one of which has to be massless"), 1u);
}

TEST(Matcher, GapIsNotImplicit) {
  EXPECT_EQ(count_hits("massless neutrino", "massless chiral neutrino"), 0u);
  EXPECT_EQ(count_hits("massless neutrino", "massless neutrino"), 1u);
}

TEST(Matcher, GapBound) {
  const std::string text = "neutrino decays into some particles one of which has to be massless";
  EXPECT_EQ(count_hits("neutrinos?[ \\w]+massless", text, 64), 1u);
  EXPECT_EQ(count_hits("neutrinos?[ \\w]+massless", text, 20), 0u);
}

TEST(Matcher, PrunedMarkupMatches) {
  EXPECT_EQ(count_hits("strong magnetic field", prune_tex("{\\it strong} magnetic field")), 1u);
}

TEST(Matcher, HyphenSpaceInvariance) {
  const auto compiled = compile_one({"electron-positron pair"});
  const auto a = match_slice(compiled, slice_of("an electron-positron pair is made"));
  const auto b = match_slice(compiled, slice_of("an electron positron pair is made"));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(spans(a), spans(b));
  EXPECT_EQ(count_hits("electron positron pair", "electron - positron  pair"), 1u);
}

TEST(Matcher, WordBoundaries) {
  EXPECT_EQ(count_hits("neutron", "neutrons and antineutron"), 0u);
  EXPECT_EQ(count_hits("neutrons?", "neutrons and neutron."), 2u);
  EXPECT_EQ(count_hits("axion", "(axion)"), 1u);
}

TEST(Matcher, MathLiteral) {
  const auto alt = compile_alternative("$\\nu \\to \\nu \\gamma$");
  ASSERT_EQ(alt.program.size(), 1u);
  EXPECT_EQ(alt.program[0].kind, MatchInstr::Kind::Math);
  EXPECT_EQ(alt.program[0].math, normalize_math("\\nu\\to\\nu\\gamma"));
  EXPECT_EQ(count_hits("$\\nu_i \\to \\nu_j \\gamma$", "radiative decay $\\nu_i \\rightarrow \\nu_j \\gamma$ in"), 1u);
  EXPECT_EQ(count_hits("axion decay $a \\to e^+ e^-$", "The axion decay $a\\to e^+e^-$ via a plasmon"), 1u);
  EXPECT_EQ(count_hits("$a \\to e^+ e^-$", "$a \\to e^+ e^- \\gamma$"), 0u);
}

TEST(Matcher, PlainLiteralCompiles) {
  const auto alt = compile_alternative("neutron stars");
  EXPECT_TRUE(alt.plain);
  EXPECT_FALSE(compile_alternative("neutrons?").plain);
}

TEST(Matcher, UnsupportedConstructs) {
  EXPECT_EQ(compile_error("massless[ \\w+neutrinos?"), ErrorKind::UnsupportedConstruct);
  EXPECT_EQ(compile_error("(a)\\1"), ErrorKind::UnsupportedConstruct);
  EXPECT_EQ(compile_error("[[a]]"), ErrorKind::UnsupportedConstruct);
  EXPECT_EQ(compile_error("$a"), ErrorKind::UnbalancedMath);
  EXPECT_EQ(compile_error("  "), ErrorKind::EmptyPattern);
  EXPECT_NO_THROW(compile_alternative("neutrinos*"));
}

TEST(Matcher, CompileEntryIsAllOrNothing) {
  ApdEntry e{"bad", {"fine words", "broken[ \\w"}, {parse_keychain("k")}, std::nullopt};
  try {
    compile_entry(e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("broken"), std::string::npos);
  }
}

TEST(Matcher, NonAsciiOffsetsAreScalars) {
  const auto hits = match_slice(compile_one({"effect"}), slice_of("Mössbauer effect"));
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].span, (Span{10, 16}));
}

TEST(Matcher, DocumentOrderAndOrigin) {
  DocumentParts parts;
  parts.slices[Pointer::Abstract] = {slice_of("we study leptogenesis here", Pointer::Abstract)};
  parts.slices[Pointer::Title] = {slice_of("Leptogenesis", Pointer::Title)};
  const auto compiled = compile_one({"leptogenesis"});
  const auto hits = match_document(compiled, parts);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].origin, Pointer::Title);
  EXPECT_EQ(hits[1].origin, Pointer::Abstract);
  EXPECT_EQ(hits[1].span, (Span{9, 21}));
  EXPECT_TRUE(match_document(compiled, DocumentParts{}).empty());
}

// plain-word dictionaries against the naive word-boundary oracle
TEST(MatcherProperty, AgreesWithNaiveOracle) {
  oracle::PlainWorld world(20240611);
  for (int round = 0; round < 400; ++round) {
    std::vector<std::vector<std::string>> dictionary(1 + world.pick(5));
    std::vector<CompiledEntry> compiled;
    for (std::size_t e = 0; e < dictionary.size(); ++e) {
      for (std::size_t a = 0, n = 1 + world.pick(3); a < n; ++a) dictionary[e].push_back(world.phrase(3));
      compiled.push_back(compile_entry({"p" + std::to_string(e), dictionary[e], {parse_keychain("k")}, {}}));
    }
    const auto doc = world.document(10 + world.pick(40));
    std::vector<oracle::Hit> got;
    for (const auto& h : match_slice(compiled, slice_of(doc))) {
      const auto e = std::stoul(h.entry_id.substr(1));
      got.push_back({e, h.alternative_index, h.span.start, h.span.end});
    }
    ASSERT_EQ(got, oracle::naive_match(dictionary, doc)) << doc;
  }
}

TEST(MatcherProperty, CaseInvariance) {
  oracle::PlainWorld world(77);
  for (int round = 0; round < 200; ++round) {
    std::vector<CompiledEntry> compiled;
    for (int e = 0; e < 3; ++e) compiled.push_back(compile_entry({"p" + std::to_string(e), {world.phrase(2)}, {parse_keychain("k")}, {}}));
    const auto doc = world.document(30);
    std::string upper = doc;
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    EXPECT_EQ(match_slice(compiled, slice_of(doc)), match_slice(compiled, slice_of(upper)));
  }
}

TEST(MatcherProperty, SerialEqualsParallel) {
  oracle::PlainWorld world(5);
  for (int round = 0; round < 100; ++round) {
    std::vector<CompiledEntry> compiled;
    for (int e = 0; e < 40; ++e) {
      std::vector<std::string> alts = {world.phrase(3)};
      if (e % 5 == 0) alts.push_back(world.phrase(1) + "[ \\w]+" + world.phrase(1));
      if (e % 7 == 0) alts.push_back(world.phrase(1) + "s?");
      compiled.push_back(compile_entry({"p" + std::to_string(e), alts, {parse_keychain("k")}, {}}));
    }
    const auto s = slice_of(world.document(80));
    EXPECT_EQ(match_slice_serial(compiled, s), match_slice_parallel(compiled, s));
  }
}

TEST(MatcherProperty, Deterministic) {
  std::ifstream in(AUTEX_FIXTURES "/texprep/autex_eprint.tex");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto parts = extract_parts(ss.str(), PointerSet(kAllPointers.begin(), kAllPointers.end()));
  const auto compiled = compile_one({"pattern", "keywords?", "associative[ \\w]+dictionary"});
  const auto first = match_document(compiled, parts);
  EXPECT_FALSE(first.empty());
  for (int i = 0; i < 5; ++i) EXPECT_EQ(match_document(compiled, parts), first);
}
