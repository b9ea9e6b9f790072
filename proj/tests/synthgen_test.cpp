#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include <sdp/synthgen.hpp>

#include "test_support.hpp"

using namespace sdp;

namespace {

CorpusSpec small_spec() {
  CorpusSpec spec;
  spec.num_docs = 4;
  spec.topics = 3;
  spec.segments_per_doc = 6;
  spec.run_length = 2;
  spec.mu = 0.2;
  spec.sigma = 0.0;
  spec.dim = 8;
  spec.seed = 7;
  spec.tokens_per_segment = 5;
  return spec;
}

std::vector<std::string> all_texts(const SyntheticCorpus& c) {
  std::vector<std::string> out;
  for (const auto& d : c.documents)
    for (const auto& s : d.segments) out.push_back(s.text);
  return out;
}

}  // namespace

TEST(CorpusSpec, Validation) {
  auto bad = [](auto mutate) {
    CorpusSpec s;
    mutate(s);
    EXPECT_THROW(s.validate(), error);
  };
  bad([](CorpusSpec& s) { s.num_docs = 0; });
  bad([](CorpusSpec& s) { s.topics = 0; });
  bad([](CorpusSpec& s) { s.segments_per_doc = 0; });
  bad([](CorpusSpec& s) { s.run_length = 0; });
  bad([](CorpusSpec& s) { s.mu = 1.0; });
  bad([](CorpusSpec& s) { s.mu = -0.1; });
  bad([](CorpusSpec& s) { s.sigma = -0.5; });
  bad([](CorpusSpec& s) { s.topics = 8, s.dim = 8; });
  bad([](CorpusSpec& s) { s.tokens_per_segment = 0; });
  bad([](CorpusSpec& s) { s.vocab_per_topic = 0; });
  bad([](CorpusSpec& s) { s.vocab_overlap = 1.5; });
  EXPECT_NO_THROW(CorpusSpec{}.validate());
}

TEST(GenerateCorpus, ShapeIdsAndMetadata) {
  auto corpus = generate_corpus(small_spec());
  ASSERT_EQ(corpus.documents.size(), 4u);
  EXPECT_EQ(corpus.documents[0].id, "doc_0001");
  EXPECT_EQ(corpus.documents[3].id, "doc_0004");
  EXPECT_EQ(corpus.documents[0].doc_type, DocType::normative);
  EXPECT_EQ(corpus.documents[1].doc_type, DocType::procedural);
  EXPECT_EQ(corpus.documents[2].doc_type, DocType::reference);
  EXPECT_EQ(corpus.documents[3].doc_type, DocType::computational);
  EXPECT_EQ(corpus.topic_labels, (std::vector<TopicLabel>{"topic_a", "topic_b", "topic_c"}));
  for (const auto& doc : corpus.documents) {
    ASSERT_EQ(doc.segments.size(), 6u);
    EXPECT_NO_THROW(validate_document(doc));
    EXPECT_TRUE(doc.metadata.count("geographic"));
    EXPECT_TRUE(doc.metadata.count("temporal"));
    EXPECT_TRUE(doc.metadata.count("persona"));
    EXPECT_FALSE(doc.metadata.count("domain"));
    for (const auto& seg : doc.segments) {
      EXPECT_EQ(seg.token_count, 5);
      EXPECT_EQ(count_tokens(seg.text), 5);
      ASSERT_TRUE(seg.topic.has_value());
    }
  }
}

TEST(GenerateCorpus, StartTopicRotatesWithDocIndex) {
  auto corpus = generate_corpus(small_spec());
  EXPECT_EQ(corpus.documents[0].segments[0].topic.value(), "topic_a");
  EXPECT_EQ(corpus.documents[1].segments[0].topic.value(), "topic_b");
  EXPECT_EQ(corpus.documents[2].segments[0].topic.value(), "topic_c");
  EXPECT_EQ(corpus.documents[3].segments[0].topic.value(), "topic_a");
}

TEST(GenerateCorpus, PlantedBoundariesAreTopicChangeGaps) {
  auto corpus = generate_corpus(small_spec());  // runs of 2 in 6 segments
  for (const auto& doc : corpus.documents) {
    const auto& marks = corpus.annotations.by_doc.at(doc.id);
    ASSERT_EQ(marks.size(), 2u);  // two annotators
    EXPECT_EQ(marks[0], (BoundarySet{2, 4}));
    EXPECT_EQ(marks[1], marks[0]);
    // The marked gaps really are where the topic labels flip.
    for (int g : marks[0])
      EXPECT_NE(doc.segments[static_cast<std::size_t>(g - 1)].topic,
                doc.segments[static_cast<std::size_t>(g)].topic);
  }
  // Single-topic corpora have nothing to mark.
  auto spec = small_spec();
  spec.topics = 1;
  auto flat = generate_corpus(spec);
  for (const auto& [id, marks] : flat.annotations.by_doc) EXPECT_TRUE(marks[0].empty());
}

TEST(GenerateCorpus, AnnotationsPassAgreementGate) {
  auto corpus = generate_corpus(small_spec());
  auto gate = gate_annotations(corpus.annotations, corpus.documents);
  EXPECT_DOUBLE_EQ(gate.kappa, 1.0);
  EXPECT_TRUE(gate.kappa_pass);
  EXPECT_EQ(gate.consensus.at("doc_0001"), (BoundarySet{2, 4}));
}

TEST(GenerateCorpus, SegmentTextStartsWithLabelAndDrawsFromPool) {
  auto spec = small_spec();
  spec.vocab_overlap = 0.5;  // adds shared_00..shared_05 to every pool
  auto corpus = generate_corpus(spec);
  bool saw_shared = false;
  for (const auto& doc : corpus.documents) {
    for (const auto& seg : doc.segments) {
      auto toks = tokenize(seg.text);
      ASSERT_EQ(toks.size(), 5u);
      EXPECT_EQ(toks[0], seg.topic.value());
      std::string suffix = seg.topic->substr(6);  // "a", "b", ...
      for (std::size_t w = 1; w < toks.size(); ++w) {
        bool own = toks[w].rfind("term_" + suffix + "_", 0) == 0;
        bool shared = toks[w].rfind("shared_", 0) == 0;
        EXPECT_TRUE(own || shared) << toks[w];
        saw_shared = saw_shared || shared;
      }
    }
  }
  EXPECT_TRUE(saw_shared);
}

TEST(GenerateCorpus, DeterministicAndSeedSensitive) {
  auto a = generate_corpus(small_spec());
  auto b = generate_corpus(small_spec());
  EXPECT_EQ(all_texts(a), all_texts(b));
  auto spec = small_spec();
  spec.seed = 8;
  auto c = generate_corpus(spec);
  EXPECT_NE(all_texts(a), all_texts(c));
}

TEST(GenerateCorpus, DocumentsAreSeededIndependently) {
  auto spec = small_spec();
  spec.num_docs = 2;
  auto small = generate_corpus(spec);
  spec.num_docs = 4;
  auto big = generate_corpus(spec);
  for (int d = 0; d < 2; ++d) {
    const auto& sd = small.documents[static_cast<std::size_t>(d)];
    const auto& bd = big.documents[static_cast<std::size_t>(d)];
    for (std::size_t s = 0; s < sd.segments.size(); ++s)
      EXPECT_EQ(sd.segments[s].text, bd.segments[s].text);
  }
}

TEST(GenerateCorpus, LabelsExtendBeyondTwentySixTopics) {
  auto spec = small_spec();
  spec.topics = 28;
  spec.dim = 32;
  spec.num_docs = 1;
  spec.segments_per_doc = 1;
  auto corpus = generate_corpus(spec);
  EXPECT_EQ(corpus.topic_labels[0], "topic_a");
  EXPECT_EQ(corpus.topic_labels[25], "topic_z");
  EXPECT_EQ(corpus.topic_labels[26], "topic_aa");
  EXPECT_EQ(corpus.topic_labels[27], "topic_ab");
  std::set<std::string> uniq(corpus.topic_labels.begin(), corpus.topic_labels.end());
  EXPECT_EQ(uniq.size(), 28u);
}

TEST(GenerateCorpus, EmbedderConfigMirrorsSpec) {
  auto spec = small_spec();
  spec.mu = 0.35;
  spec.sigma = 0.02;
  auto corpus = generate_corpus(spec);
  EXPECT_EQ(corpus.embedder.dim, 8);
  EXPECT_EQ(corpus.embedder.topics, corpus.topic_labels);
  EXPECT_DOUBLE_EQ(corpus.embedder.cross_topic_sim, 0.35);
  EXPECT_DOUBLE_EQ(corpus.embedder.noise_scale, 0.02);
  EXPECT_EQ(corpus.embedder.seed, 7u);
  AnchorTextEmbedder emb(corpus.embedder);
  EXPECT_NEAR(cosine_sim(emb.anchor("topic_a"), emb.anchor("topic_b")), 0.35, 1e-9);
}

TEST(GenerateCorpus, PlantedBoundariesAreRecoverableAtDefaultTheta) {
  auto spec = small_spec();
  spec.num_docs = 6;
  spec.segments_per_doc = 9;
  spec.run_length = 3;
  auto corpus = generate_corpus(spec);
  AnchorTextEmbedder emb(corpus.embedder);
  for (const auto& doc : corpus.documents) {
    auto vectors = embed_segments(doc, emb);
    auto detected = detect_boundaries(similarity_profile(vectors), 0.72);
    auto truth = corpus.annotations.by_doc.at(doc.id)[0];
    auto score = boundary_f1(detected, truth, static_cast<int>(doc.segments.size()));
    EXPECT_DOUBLE_EQ(score.f1, 1.0) << doc.id;
  }
}

TEST(GenerateCorpus, EntanglementStepsAroundPlantedMu) {
  auto spec = small_spec();
  spec.mu = 0.6;
  spec.num_docs = 1;
  spec.segments_per_doc = 6;
  spec.run_length = 2;
  auto corpus = generate_corpus(spec);
  AnchorTextEmbedder emb(corpus.embedder);
  const auto& doc = corpus.documents[0];
  auto vectors = embed_segments(doc, emb);
  std::vector<TopicLabel> topics;
  for (const auto& seg : doc.segments) topics.push_back(seg.topic.value());
  EXPECT_DOUBLE_EQ(entanglement_index(topics, vectors, 0.5).ei, 1.0);
  EXPECT_DOUBLE_EQ(entanglement_index(topics, vectors, 0.7).ei, 0.0);
}

TEST(GenerateQueries, RoundRobinTopicsWithVocabDraws) {
  auto spec = small_spec();
  auto queries = generate_queries(spec, 5, 11);
  ASSERT_EQ(queries.size(), 5u);
  EXPECT_EQ(queries[0].tag, "topic_a");
  EXPECT_EQ(queries[1].tag, "topic_b");
  EXPECT_EQ(queries[2].tag, "topic_c");
  EXPECT_EQ(queries[3].tag, "topic_a");
  EXPECT_EQ(queries[4].tag, "topic_b");
  for (const auto& q : queries) {
    auto toks = tokenize(q.text);
    ASSERT_EQ(toks.size(), 3u);
    EXPECT_EQ(toks[0], q.tag);
    std::string suffix = q.tag.substr(6);
    for (std::size_t w = 1; w < toks.size(); ++w)
      EXPECT_EQ(toks[w].rfind("term_" + suffix + "_", 0), 0u) << toks[w];
  }
  auto again = generate_queries(spec, 5, 11);
  for (std::size_t i = 0; i < queries.size(); ++i) EXPECT_EQ(queries[i].text, again[i].text);
  EXPECT_TRUE(generate_queries(spec, 0, 11).empty());
  EXPECT_THROW(generate_queries(spec, -1, 11), error);
}

TEST(TopicTagHeaderGenerator, AppendsDominantLabel) {
  TopicTagHeaderGenerator gen({"topic_a", "topic_b"});
  auto parent = testsup::doc("d1", {testsup::seg(0, "topic_a term_a_01 topic_a topic_b")},
                             "Guide");
  std::string header = gen.generate("topic_a term_a_01 topic_a topic_b", parent, {});
  TemplateHeaderGenerator plain;
  std::string base = plain.generate("topic_a term_a_01 topic_a topic_b", parent, {});
  EXPECT_EQ(header, base + " — topic_a");
  // No label in the text: the template header passes through untouched.
  auto other = testsup::doc("d2", {testsup::seg(0, "plain words only")}, "Guide");
  EXPECT_EQ(gen.generate("plain words only", other, {}),
            plain.generate("plain words only", other, {}));
  // Equal counts keep the first listed label.
  std::string tied = gen.generate("topic_b topic_a filler", parent, {});
  EXPECT_NE(tied.find(" — topic_a"), std::string::npos);
}
