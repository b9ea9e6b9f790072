#include <gtest/gtest.h>

#include <sdp/core.hpp>
#include <sdp/util.hpp>

#include "test_support.hpp"

using namespace sdp;

TEST(Tokenize, EmptyInput) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \t\n  ").empty());
}

TEST(Tokenize, BasicSentence) {
  std::vector<std::string> want{"outpatient", "copay", "rules"};
  EXPECT_EQ(tokenize("Outpatient copay rules."), want);
}

TEST(Tokenize, WhitespaceCollapse) {
  std::vector<std::string> want{"a", "b"};
  EXPECT_EQ(tokenize("A  B"), want);
}

TEST(Tokenize, EdgePunctuationStripped) {
  EXPECT_EQ(tokenize("(hello)"), std::vector<std::string>{"hello"});
  EXPECT_EQ(tokenize("\"quoted,\" text!"), (std::vector<std::string>{"quoted", "text"}));
  // Curly quotes, em dash and ellipsis count as punctuation at token edges.
  EXPECT_EQ(tokenize("“fancy” — dash…"),
            (std::vector<std::string>{"fancy", "dash"}));
}

TEST(Tokenize, InteriorPunctuationSurvives) {
  EXPECT_EQ(tokenize("co-pay")[0], "co-pay");
  EXPECT_EQ(tokenize("term_a_01")[0], "term_a_01");
  EXPECT_EQ(tokenize("u.s. rules"), (std::vector<std::string>{"u.s", "rules"}));
}

TEST(Tokenize, PurePunctuationTokenDropped) {
  EXPECT_EQ(tokenize("a -- b"), (std::vector<std::string>{"a", "b"}));
}

TEST(Tokenize, UnicodeWhitespaceSplits) {
  // U+00A0 no-break space and U+2003 em space both separate tokens.
  EXPECT_EQ(tokenize("a b c"), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Tokenize, Deterministic) {
  std::string text = "Mixed CASE, punctuation... and\tspacing";
  EXPECT_EQ(tokenize(text), tokenize(text));
  EXPECT_EQ(count_tokens(text), tokenize(text).size());
}

TEST(DocTypes, NamesRoundTrip) {
  for (DocType t : {DocType::normative, DocType::procedural, DocType::reference,
                    DocType::computational, DocType::unclassified}) {
    EXPECT_EQ(parse_doc_type(doc_type_name(t)), t);
  }
  EXPECT_EQ(parse_doc_type("no-such-type"), DocType::unclassified);
  EXPECT_EQ(parse_doc_type(""), DocType::unclassified);
}

TEST(ValidateDocument, IdentityOnValidInput) {
  auto d = testsup::doc("d1", {testsup::seg(0, "one two"), testsup::seg(1, "three"),
                               testsup::seg(2, "four five six")});
  Document before = d;
  validate_document(d);
  EXPECT_EQ(d.segments.size(), before.segments.size());
  for (std::size_t i = 0; i < d.segments.size(); ++i) {
    EXPECT_EQ(d.segments[i].text, before.segments[i].text);
    EXPECT_EQ(d.segments[i].index, int(i));
  }
}

TEST(ValidateDocument, RecomputesTokenCount) {
  Document d;
  d.id = "d1";
  d.segments.push_back(testsup::seg(0, "one two three"));
  d.segments[0].token_count = 99;
  Document stamped = validate_document(d);
  EXPECT_EQ(stamped.segments[0].token_count, 3u);
  EXPECT_EQ(stamped.segments[0].doc_id, "d1");
}

TEST(ValidateDocument, IndexGap) {
  Document d;
  d.id = "d1";
  d.segments.push_back(testsup::seg(0, "a"));
  d.segments.push_back(testsup::seg(2, "b"));
  try {
    validate_document(d);
    FAIL() << "expected INDEX_GAP";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::index_gap);
    EXPECT_NE(std::string(e.what()).find("INDEX_GAP"), std::string::npos);
  }
}

TEST(ValidateDocument, EmptySegment) {
  Document d;
  d.id = "d1";
  d.segments.push_back(testsup::seg(0, "   "));
  try {
    validate_document(d);
    FAIL() << "expected EMPTY_SEGMENT";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::empty_segment);
  }
}

TEST(ValidateDocument, DuplicateIndex) {
  Document d;
  d.id = "d1";
  d.segments.push_back(testsup::seg(0, "a"));
  d.segments.push_back(testsup::seg(0, "b"));
  try {
    validate_document(d);
    FAIL() << "expected DUPLICATE_ID";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::duplicate_id);
  }
}

TEST(ValidateDocument, Idempotent) {
  auto d = testsup::word_doc("d1", 4);
  validate_document(d);
  Document once = d;
  validate_document(d);
  for (std::size_t i = 0; i < d.segments.size(); ++i) {
    EXPECT_EQ(d.segments[i].text, once.segments[i].text);
    EXPECT_EQ(d.segments[i].token_count, once.segments[i].token_count);
    EXPECT_EQ(d.segments[i].index, once.segments[i].index);
  }
}

TEST(ValidateDocument, CollectsAllIssues) {
  Document d;
  d.id = "d1";
  d.segments.push_back(testsup::seg(0, " "));
  d.segments.push_back(testsup::seg(5, "b"));
  auto issues = validate_issues(d);
  EXPECT_EQ(issues.size(), 2u);
}

// Hash and RNG primitives sit under everything deterministic, so their
// outputs are pinned to published reference values.

TEST(Fnv1a64, ReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(SplitMix64, ReferenceSequenceFromSeedZero) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafull);
  EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ull);
  EXPECT_EQ(rng.next(), 0x06c45d188009454full);
}

TEST(SplitMix64, NextBelowInRangeAndDeterministic) {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 200; ++i) {
    auto va = a.next_below(7);
    EXPECT_LT(va, 7u);
    EXPECT_EQ(va, b.next_below(7));
  }
}

TEST(SplitMix64, GaussianDeterministic) {
  SplitMix64 a(7), b(7);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.next_gaussian(), b.next_gaussian());
}

TEST(MixSeed, DistinctSalts) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(9, 3), mix_seed(9, 3));
}

TEST(UnitNoiseVector, UnitNormAndKeyedByText) {
  auto v1 = unit_noise_vector("hello", 5, 8);
  auto v2 = unit_noise_vector("hello", 5, 8);
  auto v3 = unit_noise_vector("world", 5, 8);
  double norm = 0.0;
  for (double x : v1) norm += x * x;
  EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-12);
  EXPECT_EQ(v1, v2);
  EXPECT_NE(v1, v3);
  EXPECT_NE(unit_noise_vector("hello", 6, 8), v1);
}

TEST(AtomicFile, WriteThenRead) {
  testsup::TempDir tmp("atomic");
  auto path = tmp.file("out.txt");
  write_file_atomic(path, "line1\nline2\n");
  EXPECT_EQ(read_file(path), "line1\nline2\n");
  write_file_atomic(path, "replaced");
  EXPECT_EQ(read_file(path), "replaced");
}

TEST(AtomicFile, MissingFileFails) {
  try {
    read_file("/nonexistent/dir/nope.txt");
    FAIL() << "expected IO_ERROR";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::io_error);
  }
}
