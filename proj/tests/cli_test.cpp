#include <gtest/gtest.h>

#include <cstdlib>
#include <string>

#include <json.hpp>

#include <sdp/util.hpp>

#include "test_support.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Drives the real binary; paths from our TempDir contain no shell metachars.
CliResult run_cli(const std::string& args, testsup::TempDir& tmp) {
  std::string out_path = tmp.file("cli_stdout.txt");
  std::string err_path = tmp.file("cli_stderr.txt");
  std::string cmd =
      std::string(SDP_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
  int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  try {
    r.out = sdp::read_file(out_path);
  } catch (...) {
  }
  try {
    r.err = sdp::read_file(err_path);
  } catch (...) {
  }
  return r;
}

// One document, four segments, two topics, with a lookup-table embedder
// whose geometry gives exactly two entangled cross-topic pairs at 0.75.
void write_ei_fixture(testsup::TempDir& tmp, std::string& corpus, std::string& table) {
  corpus = tmp.file("c.jsonl");
  sdp::write_file_atomic(
      corpus,
      R"({"id":"d1","segments":[{"index":0,"text":"s0","topic":"A"},{"index":1,"text":"s1","topic":"A"},{"index":2,"text":"s2","topic":"B"},{"index":3,"text":"s3","topic":"B"}]})"
      "\n");
  table = tmp.file("t.json");
  sdp::write_file_atomic(table, R"({"dim":2,"entries":{
    "s0":[1.0,0.0],"s1":[1.0,0.0],"s2":[0.8,0.6],"s3":[0.0,1.0]}})");
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  testsup::TempDir tmp("cli_usage");
  auto r = run_cli("frobnicate", tmp);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("USAGE"), std::string::npos);
  EXPECT_EQ(run_cli("", tmp).code, 2);  // a subcommand is required
}

TEST(Cli, HelpExitsZero) {
  testsup::TempDir tmp("cli_help");
  auto r = run_cli("--help", tmp);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("gen-corpus"), std::string::npos);
}

TEST(Cli, EiReportsHandWorkedValue) {
  testsup::TempDir tmp("cli_ei");
  std::string corpus, table;
  write_ei_fixture(tmp, corpus, table);
  auto r = run_cli("ei --corpus " + corpus + " --embedder table:" + table +
                       " --alpha 0.75 --pairs --no-timestamp",
                   tmp);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j.at("ei").get<double>(), 0.5);
  EXPECT_EQ(j.at("cross_topic_pairs"), 4);
  EXPECT_EQ(j.at("entangled_pairs"), 2);
  EXPECT_FALSE(j.at("pure").get<bool>());
  EXPECT_FALSE(j.contains("generated_at"));
  auto csv = j.at("pairs_csv").get<std::string>();
  EXPECT_NE(csv.find("i,j,sim"), std::string::npos);
  EXPECT_NE(csv.find("0,2,"), std::string::npos);
  EXPECT_NE(csv.find("1,2,"), std::string::npos);
}

TEST(Cli, EiDomainErrorsExitOne) {
  testsup::TempDir tmp("cli_ei_err");
  std::string corpus, table;
  write_ei_fixture(tmp, corpus, table);
  // alpha outside (0,1) is a domain failure with a stable code on stderr.
  auto r = run_cli("ei --corpus " + corpus + " --embedder table:" + table + " --alpha 1.5", tmp);
  EXPECT_EQ(r.code, 1);
  auto diag = json::parse(r.err);
  EXPECT_EQ(diag.at("code"), "ALPHA_OUT_OF_RANGE");
  auto missing = run_cli("ei --corpus " + tmp.file("nope.jsonl") + " --embedder table:" + table +
                             " --alpha 0.5",
                         tmp);
  EXPECT_EQ(missing.code, 1);
  EXPECT_EQ(json::parse(missing.err).at("code"), "IO_ERROR");
}

TEST(Cli, QueryAgainstEmptyStoreSucceeds) {
  testsup::TempDir tmp("cli_query_empty");
  auto store = tmp.file("empty.jsonl");
  sdp::write_file_atomic(store, R"({"schema_version":1,"dim":0,"count":0})"
                                "\n");
  auto r = run_cli("query --store " + store + " --k 5", tmp);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out).empty());
}

TEST(Cli, ConfigFileFillsFlagsButArgvWins) {
  testsup::TempDir tmp("cli_config");
  std::string corpus, table;
  write_ei_fixture(tmp, corpus, table);
  auto cfg = tmp.file("cfg.json");
  sdp::write_file_atomic(cfg, json{{"alpha", 0.75},
                                   {"corpus", corpus},
                                   {"embedder", "table:" + table},
                                   {"no_timestamp", true}}
                                  .dump());
  auto r = run_cli("ei --config " + cfg, tmp);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(json::parse(r.out).at("ei").get<double>(), 0.5);
  // Explicit --alpha overrides the file: 0.9 leaves no entangled pairs.
  auto over = run_cli("ei --config " + cfg + " --alpha 0.9", tmp);
  ASSERT_EQ(over.code, 0) << over.err;
  EXPECT_DOUBLE_EQ(json::parse(over.out).at("ei").get<double>(), 0.0);
}

TEST(Cli, GenCorpusIsDeterministicAndFeedsCalibrate) {
  testsup::TempDir tmp("cli_gen");
  std::string base = "gen-corpus --docs 4 --topics 2 --segments 6 --run-length 3 --dim 4"
                     " --seed 5 --no-timestamp -o ";
  auto a = run_cli(base + tmp.file("a.jsonl"), tmp);
  auto b = run_cli(base + tmp.file("b.jsonl"), tmp);
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(sdp::read_file(tmp.file("a.jsonl")), sdp::read_file(tmp.file("b.jsonl")));
  EXPECT_EQ(sdp::read_file(tmp.file("a.annotations.jsonl")),
            sdp::read_file(tmp.file("b.annotations.jsonl")));
  EXPECT_EQ(sdp::read_file(tmp.file("a.embedder.json")),
            sdp::read_file(tmp.file("b.embedder.json")));

  auto cal = run_cli("calibrate --corpus " + tmp.file("a.jsonl") + " --annotations " +
                         tmp.file("a.annotations.jsonl") + " --embedder anchor:" +
                         tmp.file("a.embedder.json") + " --no-timestamp -o " +
                         tmp.file("cal.json"),
                     tmp);
  ASSERT_EQ(cal.code, 0) << cal.err;
  auto j = json::parse(sdp::read_file(tmp.file("cal.json")));
  EXPECT_TRUE(j.at("kappa_pass").get<bool>());
  EXPECT_DOUBLE_EQ(j.at("f1_at_theta_star").get<double>(), 1.0);
  double theta_star = j.at("theta_star").get<double>();
  EXPECT_GE(theta_star, 0.50);
  EXPECT_LE(theta_star, 0.90);
  EXPECT_NEAR(j.at("alpha").get<double>(), 0.2, 1e-9);  // sigma 0: planted mu exactly
  auto csv = sdp::read_file(j.at("sweep_csv").get<std::string>());
  EXPECT_NE(csv.find("theta,precision,recall,f1"), std::string::npos);
}

TEST(Cli, SegmentWritesFragmentsAndProfile) {
  testsup::TempDir tmp("cli_seg");
  auto gen = run_cli("gen-corpus --docs 2 --topics 2 --segments 4 --run-length 2 --dim 4"
                     " --seed 3 --no-timestamp -o " +
                         tmp.file("c.jsonl"),
                     tmp);
  ASSERT_EQ(gen.code, 0) << gen.err;
  auto r = run_cli("segment --corpus " + tmp.file("c.jsonl") + " --embedder anchor:" +
                       tmp.file("c.embedder.json") + " --theta 0.72 -o " +
                       tmp.file("frags.jsonl") + " --profile-csv " + tmp.file("profile.csv") +
                       " --no-timestamp",
                   tmp);
  ASSERT_EQ(r.code, 0) << r.err;
  auto summary = json::parse(r.out);
  EXPECT_EQ(summary.at("fragments"), 4);  // one topic flip per document
  std::istringstream frags(sdp::read_file(tmp.file("frags.jsonl")));
  std::string line;
  int lines = 0;
  while (std::getline(frags, line))
    if (!line.empty()) {
      auto f = json::parse(line);
      EXPECT_TRUE(f.contains("span"));
      EXPECT_TRUE(f.contains("boundary_confidence"));
      ++lines;
    }
  EXPECT_EQ(lines, 4);
  auto profile = sdp::read_file(tmp.file("profile.csv"));
  EXPECT_NE(profile.find("doc_id,gap,sim"), std::string::npos);
  EXPECT_NE(profile.find("doc_0001,1,"), std::string::npos);
}

TEST(Cli, DisentangleIndexQueryFeedbackFlow) {
  testsup::TempDir tmp("cli_flow");
  auto gen = run_cli("gen-corpus --docs 2 --topics 2 --segments 4 --run-length 2 --dim 4"
                     " --seed 9 --no-timestamp -o " +
                         tmp.file("c.jsonl"),
                     tmp);
  ASSERT_EQ(gen.code, 0) << gen.err;
  std::string embedder = " --embedder anchor:" + tmp.file("c.embedder.json");
  auto dis = run_cli("disentangle --corpus " + tmp.file("c.jsonl") + embedder +
                         " --alpha 0.6 --theta 0.72 --no-timestamp -o " + tmp.file("kos.jsonl"),
                     tmp);
  ASSERT_EQ(dis.code, 0) << dis.err;
  auto summary = json::parse(dis.out);
  EXPECT_TRUE(summary.at("all_faithful").get<bool>());
  EXPECT_GT(summary.at("knowledge_objects").get<int>(), 0);
  EXPECT_DOUBLE_EQ(summary.at("mean_ei_after").get<double>(), 0.0);

  auto idx = run_cli("index --objects " + tmp.file("kos.jsonl") + " --no-timestamp -o " +
                         tmp.file("store.jsonl"),
                     tmp);
  ASSERT_EQ(idx.code, 0) << idx.err;
  EXPECT_EQ(json::parse(idx.out).at("objects"), summary.at("knowledge_objects"));

  auto qry = run_cli("query --store " + tmp.file("store.jsonl") + embedder +
                         " --query-text topic_a --k 2",
                     tmp);
  ASSERT_EQ(qry.code, 0) << qry.err;
  auto hits = json::parse(qry.out);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_GT(hits[0].at("similarity").get<double>(), hits[1].at("similarity").get<double>() - 1e-12);

  // Log two interactions against the best hit, then run the feedback report.
  std::string best = hits[0].at("id").get<std::string>();
  auto log = tmp.file("log.jsonl");
  sdp::write_file_atomic(
      log, json{{"query_text", "topic_a"}, {"retrieved_ids", {best}}, {"outcome", "answered"}, {"timestamp", 1}}
                 .dump() +
               "\n" +
               json{{"query_text", "topic_a"}, {"retrieved_ids", {best}}, {"outcome", "hallucinated"}, {"timestamp", 2}}
                   .dump() +
               "\n");
  auto fb = run_cli("feedback --log " + log + " --report --apply --queue --store " +
                        tmp.file("store.jsonl") + embedder +
                        " --alpha 0.6 --no-timestamp",
                    tmp);
  ASSERT_EQ(fb.code, 0) << fb.err;
  auto fbj = json::parse(fb.out);
  EXPECT_DOUBLE_EQ(fbj.at("report").at("task_completion_rate").get<double>(), 0.5);
  EXPECT_TRUE(fbj.contains("flags"));
  EXPECT_TRUE(fbj.contains("queue"));
  // The store now carries the recomputed counters.
  auto store = sdp::KnowledgeStore::load(tmp.file("store.jsonl"));
  EXPECT_EQ(store.get(best).usage.retrieval_count, 2);
  EXPECT_EQ(store.get(best).usage.hallucination_count, 1);

  // Feedback without a mode is a usage error.
  EXPECT_EQ(run_cli("feedback --log " + log, tmp).code, 2);
}

TEST(Cli, ReportRunsEndToEnd) {
  testsup::TempDir tmp("cli_report");
  auto gen = run_cli("gen-corpus --docs 3 --topics 2 --segments 4 --run-length 2 --dim 4"
                     " --seed 4 --no-timestamp -o " +
                         tmp.file("c.jsonl"),
                     tmp);
  ASSERT_EQ(gen.code, 0) << gen.err;
  auto queries = tmp.file("q.jsonl");
  sdp::write_file_atomic(queries, R"({"text":"topic_a","topic":"topic_a"})"
                                  "\n"
                                  R"({"text":"topic_b","topic":"topic_b"})"
                                  "\n");
  auto r = run_cli("report --corpus " + tmp.file("c.jsonl") + " --embedder anchor:" +
                       tmp.file("c.embedder.json") + " --queries " + queries +
                       " --alpha 0.6 --k 2 --resamples 200 --no-timestamp -o " +
                       tmp.file("report.json"),
                   tmp);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(sdp::read_file(tmp.file("report.json")));
  EXPECT_EQ(j.at("documents"), 3);
  EXPECT_TRUE(j.at("all_faithful").get<bool>());
  EXPECT_LE(j.at("ei_after").at("mean").get<double>(), j.at("ei_before").at("mean").get<double>());
  auto csv = sdp::read_file(j.at("csv").get<std::string>());
  EXPECT_NE(csv.find("metric,value,ci_lo,ci_hi,n"), std::string::npos);
  EXPECT_NE(csv.find("precision_after,"), std::string::npos);
}
