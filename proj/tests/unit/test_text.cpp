#include <gtest/gtest.h>

#include "autex/text.hpp"

using namespace autex;

TEST(Text, Utf8RoundTrip) {
  const std::string s = "photon → neutrino antineutrino, Gödel";
  EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
  EXPECT_EQ(text::length(s), 37u);
  EXPECT_TRUE(text::is_valid_utf8(s));
}

TEST(Text, Latin1Fallback) {
  const std::string latin1 = "G\xf6" "del";
  EXPECT_FALSE(text::is_valid_utf8(latin1));
  EXPECT_EQ(text::encode_utf8(text::decode_source(latin1)), "Gödel");
}

TEST(Text, FoldCoversCommonScripts) {
  EXPECT_EQ(text::fold_utf8("NEUTRINO"), "neutrino");
  EXPECT_EQ(text::fold_utf8("ÄÖÜ"), "äöü");
  EXPECT_EQ(text::fold_utf8("ΓΑΜΜΑ"), "γαμμα");
  EXPECT_EQ(text::fold_utf8("Ÿ"), "ÿ");
}

TEST(Text, WordChars) {
  EXPECT_TRUE(text::is_word_char(U'a'));
  EXPECT_TRUE(text::is_word_char(U'7'));
  EXPECT_TRUE(text::is_word_char(U'ß'));
  EXPECT_FALSE(text::is_word_char(U'-'));
  EXPECT_FALSE(text::is_word_char(U' '));
  EXPECT_FALSE(text::is_word_char(U'$'));
}

TEST(Text, WhitespaceHelpers) {
  EXPECT_EQ(text::collapse_whitespace("  dispersion \t  relations \n"), "dispersion relations");
  EXPECT_EQ(text::trim("  x  "), "x");
  const auto lines = text::split_lines("a\r\nb\n\nc");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[2], "");
}

TEST(Text, FoldedOrderingIsTotal) {
  EXPECT_TRUE(text::less_folded("apple", "Banana"));
  EXPECT_TRUE(text::equal_folded("Lepton", "lepton"));
  EXPECT_NE(text::less_folded("Lepton", "lepton"), text::less_folded("lepton", "Lepton"));
}
