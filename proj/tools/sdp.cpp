// Command-line front end: every workflow stage as a subcommand over the
// file formats defined in sdp/io.hpp. Exit codes: 0 success, 1 domain error
// (JSON diagnostic on stderr), 2 usage error.

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <sdp/sdp.hpp>

using namespace sdp;

namespace {

std::string dtos(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void diagnostic(const std::string& code, const std::string& message) {
    std::cerr << json{{"code", code}, {"message", message}}.dump() << "\n";
}

// Strip a known extension so sibling artifacts can share a stem.
std::string stem_of(const std::string& path, const std::string& ext) {
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size());
    return path;
}

struct OutputOptions {
    bool no_timestamp = false;
};

void add_output_options(CLI::App* sub, OutputOptions& opts) {
    sub->add_flag("--no-timestamp", opts.no_timestamp,
                  "omit the generated_at field from JSON results");
}

// JSON results go to -o when given, stdout otherwise. Timestamps are only
// ever attached to object-shaped results so data artifacts stay byte-stable.
void emit_result(const std::string& path, json j, const OutputOptions& opts) {
    if (!opts.no_timestamp && j.is_object())
        j["generated_at"] = static_cast<std::int64_t>(std::time(nullptr));
    std::string text = j.dump(2) + "\n";
    if (path.empty())
        std::cout << text;
    else
        write_file_atomic(path, text);
}

std::vector<std::vector<EmbeddingVector>> embed_corpus(const std::vector<Document>& docs,
                                                       const Embedder& embedder) {
    std::vector<std::vector<EmbeddingVector>> vectors;
    vectors.reserve(docs.size());
    for (const auto& doc : docs) vectors.push_back(embed_segments(doc, embedder));
    return vectors;
}

std::vector<TopicLabel> corpus_topic_labels(const std::vector<Document>& docs) {
    std::vector<TopicLabel> labels;
    for (const auto& doc : docs)
        for (const auto& seg : doc.segments)
            if (seg.topic && !seg.topic->empty() &&
                std::find(labels.begin(), labels.end(), *seg.topic) == labels.end())
                labels.push_back(*seg.topic);
    return labels;
}

std::unique_ptr<HeaderGenerator> make_header_generator(const std::string& kind,
                                                       const std::vector<Document>& docs) {
    if (kind == "template") return std::make_unique<TemplateHeaderGenerator>();
    if (kind == "topic-tag")
        return std::make_unique<TopicTagHeaderGenerator>(corpus_topic_labels(docs));
    fail(errc::invalid_spec, "unknown header generator '" + kind + "'");
}

MetadataFilter parse_filters(const std::vector<std::string>& pairs) {
    MetadataFilter filter;
    for (const auto& p : pairs) {
        auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0)
            throw CLI::ValidationError("--filter", "expected key=value, got '" + p + "'");
        filter[p.substr(0, eq)] = p.substr(eq + 1);
    }
    return filter;
}

// A JSON config file may pre-fill any long flag of the invoked subcommand;
// flags given on the command line always win. Arrays expand to repeated
// flags, booleans to bare switches.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
    std::string config_path;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw CLI::ValidationError("--config", "expects a file path");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (config_path.empty()) return out;

    json cfg;
    try {
        cfg = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
        fail(errc::io_error, config_path + ": invalid JSON: " + e.what());
    }
    if (!cfg.is_object()) fail(errc::invalid_spec, config_path + ": config must be a JSON object");

    for (const auto& [raw_key, value] : cfg.items()) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '_', '-');
        std::string flag = "--" + key;
        bool present = std::any_of(out.begin(), out.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (present) continue;
        auto as_text = [](const json& v) {
            return v.is_string() ? v.get<std::string>() : v.dump();
        };
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& item : value) out.push_back(flag + "=" + as_text(item));
        } else {
            out.push_back(flag + "=" + as_text(value));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

struct GenCorpusOpts {
    CorpusSpec spec;
    std::string out = "corpus.jsonl";
    std::string annotations_out;
    std::string embedder_out;
    OutputOptions output;
};

void run_gen_corpus(const GenCorpusOpts& o) {
    auto corpus = generate_corpus(o.spec);
    std::string stem = stem_of(o.out, ".jsonl");
    std::string ann = o.annotations_out.empty() ? stem + ".annotations.jsonl" : o.annotations_out;
    std::string emb = o.embedder_out.empty() ? stem + ".embedder.json" : o.embedder_out;
    io::write_corpus(o.out, corpus.documents);
    io::write_annotations(ann, corpus.annotations);
    io::write_anchor_config(emb, corpus.embedder);
    emit_result("",
                json{{"documents", corpus.documents.size()},
                     {"topics", corpus.topic_labels},
                     {"corpus", o.out},
                     {"annotations", ann},
                     {"embedder", emb}},
                o.output);
}

struct CalibrateOpts {
    std::string corpus;
    std::string annotations;
    std::string embedder;
    std::string holdout;
    ThetaGrid grid;
    bool force = false;
    std::string out = "calibration.json";
    std::string sweep_csv;
    OutputOptions output;
};

void run_calibrate(const CalibrateOpts& o) {
    auto docs = io::read_corpus(o.corpus);
    auto annotations = io::read_annotations(o.annotations);
    auto embedder = io::make_embedder(o.embedder);
    auto vectors = embed_corpus(docs, *embedder);

    auto gate = gate_annotations(annotations, docs);
    auto result = sweep_theta(docs, vectors, gate, o.grid, o.force);

    try {
        result.alpha = calibrate_alpha(docs, vectors);
    } catch (const error& e) {
        if (e.code() != errc::no_cross_topic_pairs && e.code() != errc::empty_input) throw;
    }
    if (!o.holdout.empty()) {
        auto holdout_docs = io::read_corpus(o.holdout);
        auto holdout_vectors = embed_corpus(holdout_docs, *embedder);
        result.holdout_f1 =
            validate_holdout(result.theta_star, docs, holdout_docs, holdout_vectors, annotations);
    }

    std::string csv_path = o.sweep_csv.empty() ? stem_of(o.out, ".json") + ".sweep.csv" : o.sweep_csv;
    std::string csv = "theta,precision,recall,f1\n";
    for (const auto& row : result.sweep)
        csv += dtos(row.theta) + "," + dtos(row.precision) + "," + dtos(row.recall) + "," +
               dtos(row.f1) + "\n";
    write_file_atomic(csv_path, csv);

    json j{{"theta_star", result.theta_star},
           {"f1_at_theta_star", result.f1_at_theta_star},
           {"kappa", result.kappa},
           {"kappa_pass", result.kappa_pass},
           {"annotators", gate.annotators},
           {"sweep_points", result.sweep.size()},
           {"sweep_csv", csv_path}};
    if (result.alpha) j["alpha"] = *result.alpha;
    if (result.holdout_f1) j["holdout_f1"] = *result.holdout_f1;
    emit_result(o.out, std::move(j), o.output);
}

struct SegmentOpts {
    std::string corpus;
    std::string embedder;
    double theta = 0.72;
    int l_min = 100;
    std::string out = "fragments.jsonl";
    std::string profile_csv;
    OutputOptions output;
};

void run_segment(const SegmentOpts& o) {
    auto docs = io::read_corpus(o.corpus);
    auto embedder = io::make_embedder(o.embedder);
    std::string lines;
    std::string csv = "doc_id,gap,sim\n";
    std::size_t fragment_count = 0;
    for (const auto& doc : docs) {
        auto vectors = embed_segments(doc, *embedder);
        for (const auto& fragment : recursive_segment(doc, vectors, o.theta, o.l_min)) {
            lines += io::fragment_to_json(fragment).dump() + "\n";
            ++fragment_count;
        }
        auto profile = similarity_profile(vectors);
        for (std::size_t g = 0; g < profile.size(); ++g)
            csv += doc.id + "," + std::to_string(g + 1) + "," + dtos(profile[g]) + "\n";
    }
    write_file_atomic(o.out, lines);
    if (!o.profile_csv.empty()) write_file_atomic(o.profile_csv, csv);
    emit_result("",
                json{{"documents", docs.size()},
                     {"fragments", fragment_count},
                     {"theta", o.theta},
                     {"fragments_file", o.out}},
                o.output);
}

struct DisentangleOpts {
    std::string corpus;
    std::string embedder;
    std::string profile;
    std::string taxonomy;
    std::string header = "template";
    double theta = 0.72;
    double alpha = 0.0;
    double beta = 0.20;
    int l_min = 100;
    std::vector<double> candidates;
    std::string out = "kos.jsonl";
    OutputOptions output;
};

void run_disentangle(const DisentangleOpts& o) {
    auto docs = io::read_corpus(o.corpus);
    auto embedder = io::make_embedder(o.embedder);
    auto vectors = embed_corpus(docs, *embedder);
    ContextProfile psi = o.profile.empty() ? ContextProfile{} : io::read_profile(o.profile);
    auto gen = make_header_generator(o.header, docs);

    PipelineConfig config;
    config.theta = o.theta;
    config.alpha = o.alpha;
    config.beta = o.beta;
    config.l_min = o.l_min;
    config.candidate_thetas = o.candidates;
    config.taxonomy = o.taxonomy.empty() ? io::derive_taxonomy(docs) : io::read_taxonomy(o.taxonomy);

    auto run = run_pipeline(docs, vectors, psi, config, *embedder, *gen);
    run.store.persist(o.out);

    double ei_before = 0.0, ei_after = 0.0;
    int complete = 0;
    bool faithful = true;
    for (const auto& outcome : run.outcomes) {
        ei_before += outcome.ei_before;
        ei_after += outcome.ei_after;
        complete += outcome.complete ? 1 : 0;
        faithful = faithful && outcome.faithful;
    }
    auto n = static_cast<double>(run.outcomes.empty() ? 1 : run.outcomes.size());
    emit_result("",
                json{{"documents", docs.size()},
                     {"knowledge_objects", run.store.size()},
                     {"mean_ei_before", ei_before / n},
                     {"mean_ei_after", ei_after / n},
                     {"complete_documents", complete},
                     {"all_faithful", faithful},
                     {"store", o.out}},
                o.output);
}

struct IndexOpts {
    std::vector<std::string> objects;
    std::string out = "store.jsonl";
    OutputOptions output;
};

void run_index(const IndexOpts& o) {
    KnowledgeStore store;
    for (const auto& path : o.objects) {
        auto part = KnowledgeStore::load(path);
        for (const auto& id : part.ids()) store.add(part.get(id));
    }
    store.persist(o.out);
    emit_result("", json{{"objects", store.size()}, {"store", o.out}}, o.output);
}

struct QueryOpts {
    std::string store;
    std::string embedder;
    std::string query_text;
    std::string query_vector;
    int k = 5;
    std::vector<std::string> filters;
    std::string out;
    OutputOptions output;
};

EmbeddingVector resolve_query_vector(const QueryOpts& o) {
    if (!o.query_vector.empty()) {
        std::string text = o.query_vector;
        if (text.find('[') == std::string::npos) text = read_file(text);
        try {
            return json::parse(text).get<EmbeddingVector>();
        } catch (const json::exception& e) {
            fail(errc::io_error, std::string("query vector: ") + e.what());
        }
    }
    if (o.embedder.empty())
        throw CLI::ValidationError("query", "--query-text needs --embedder");
    return io::make_embedder(o.embedder)->embed(o.query_text);
}

void run_query(const QueryOpts& o) {
    auto store = KnowledgeStore::load(o.store);
    auto filter = parse_filters(o.filters);
    if (store.size() == 0) {
        emit_result(o.out, json::array(), o.output);
        return;
    }
    if (o.query_text.empty() && o.query_vector.empty())
        throw CLI::ValidationError("query", "one of --query-text or --query-vector is required");
    auto hits = store.query(resolve_query_vector(o), o.k, filter);
    json out = json::array();
    for (const auto& hit : hits)
        out.push_back(json{{"id", hit.id},
                           {"similarity", hit.similarity},
                           {"header", store.get(hit.id).header}});
    emit_result(o.out, std::move(out), o.output);
}

struct EiOpts {
    std::string corpus;
    std::string embedder;
    double alpha = 0.0;
    bool pairs = false;
    std::string out;
    OutputOptions output;
};

void run_ei(const EiOpts& o) {
    auto docs = io::read_corpus(o.corpus);
    auto embedder = io::make_embedder(o.embedder);
    std::vector<TopicLabel> topics;
    std::vector<EmbeddingVector> vectors;
    for (const auto& doc : docs) {
        auto doc_vectors = embed_segments(doc, *embedder);
        for (std::size_t s = 0; s < doc.segments.size(); ++s) {
            const auto& topic = doc.segments[s].topic;
            if (!topic || topic->empty()) continue;
            topics.push_back(*topic);
            vectors.push_back(doc_vectors[s]);
        }
    }
    auto report = entanglement_index(topics, vectors, o.alpha);
    json j{{"alpha", report.alpha},
           {"segments", topics.size()},
           {"cross_topic_pairs", report.cross_topic_pair_count},
           {"entangled_pairs", report.entangled_pair_count},
           {"ei", report.ei},
           {"pure", report.pure}};
    if (o.pairs) {
        std::string csv = "i,j,sim\n";
        for (const auto& pair : report.entangled_pairs)
            csv += std::to_string(pair.i) + "," + std::to_string(pair.j) + "," +
                   dtos(pair.similarity) + "\n";
        j["pairs_csv"] = csv;
    }
    emit_result(o.out, std::move(j), o.output);
}

struct FeedbackOpts {
    std::string log;
    std::string store;
    std::string embedder;
    bool apply = false;
    bool report = false;
    bool queue = false;
    SignpostThresholds thresholds;
    int queue_threshold = 3;
    std::string out;
    OutputOptions output;
};

void run_feedback(const FeedbackOpts& o) {
    if (!o.apply && !o.report && !o.queue)
        throw CLI::ValidationError("feedback",
                                   "pick at least one of --apply, --report, --queue");
    auto log = io::read_log(o.log);
    json j;
    if (o.report) {
        auto rep = performance_report(log);
        json r{{"record_count", rep.record_count}};
        if (rep.retrieval_precision) r["retrieval_precision"] = *rep.retrieval_precision;
        if (rep.task_completion_rate) r["task_completion_rate"] = *rep.task_completion_rate;
        if (rep.hallucination_rate) r["hallucination_rate"] = *rep.hallucination_rate;
        if (rep.reasoning_accuracy) r["reasoning_accuracy"] = *rep.reasoning_accuracy;
        j["report"] = std::move(r);
    }
    if (o.apply || o.queue) {
        if (o.store.empty())
            throw CLI::ValidationError("feedback", "--apply/--queue need --store");
        if (o.embedder.empty())
            throw CLI::ValidationError("feedback", "--apply/--queue need --embedder");
        auto store = KnowledgeStore::load(o.store);
        auto embedder = io::make_embedder(o.embedder);
        auto outcome = apply_signposts(store, log, o.thresholds, *embedder);
        if (o.apply) {
            store.persist(o.store);
            json flags = json::array();
            for (const auto& f : outcome.flags)
                flags.push_back(json{{"ko_id", f.ko_id},
                                     {"kind", signpost_kind_name(f.kind)},
                                     {"reason", f.reason},
                                     {"from_ts", f.from_ts},
                                     {"to_ts", f.to_ts}});
            j["flags"] = std::move(flags);
            j["unknown_ids"] = outcome.unknown_ids;
        }
        if (o.queue) {
            json q = json::array();
            for (const auto& entry : requeue_regions(store, outcome.flags, o.queue_threshold))
                q.push_back(json{{"doc_id", entry.doc_id},
                                 {"span", {entry.span_start, entry.span_end}},
                                 {"flag_count", entry.flag_count}});
            j["queue"] = std::move(q);
        }
    }
    emit_result(o.out, std::move(j), o.output);
}

struct ReportOpts {
    std::string corpus;
    std::string embedder;
    std::string queries;
    std::string profile;
    std::string taxonomy;
    std::string header = "template";
    ReportOptions options;
    std::vector<double> candidates;
    std::string out = "report.json";
    std::string csv;
    OutputOptions output;
};

void run_report_cmd(const ReportOpts& o) {
    auto docs = io::read_corpus(o.corpus);
    auto embedder = io::make_embedder(o.embedder);
    auto vectors = embed_corpus(docs, *embedder);
    ContextProfile psi = o.profile.empty() ? ContextProfile{} : io::read_profile(o.profile);
    auto queries = o.queries.empty() ? std::vector<ExampleQuery>{} : io::read_queries(o.queries);
    auto gen = make_header_generator(o.header, docs);

    ReportOptions options = o.options;
    options.candidate_thetas = o.candidates;
    options.taxonomy = o.taxonomy.empty() ? io::derive_taxonomy(docs) : io::read_taxonomy(o.taxonomy);

    auto report = run_report(docs, vectors, psi, queries, options, *embedder, *gen);

    auto summary_json = [](const MetricSummary& s) {
        return json{{"mean", s.mean}, {"ci_lo", s.ci_lo}, {"ci_hi", s.ci_hi}, {"n", s.n}};
    };
    json j{{"theta", report.theta},
           {"alpha", report.alpha},
           {"documents", report.documents},
           {"knowledge_objects", report.knowledge_objects},
           {"complete_documents", report.complete_documents},
           {"all_faithful", report.all_faithful},
           {"ei_before", summary_json(report.ei_before)},
           {"ei_after", summary_json(report.ei_after)},
           {"precision_before", summary_json(report.precision_before)},
           {"precision_after", summary_json(report.precision_after)}};

    std::string csv_path = o.csv.empty() ? stem_of(o.out, ".json") + ".csv" : o.csv;
    std::string csv = "metric,value,ci_lo,ci_hi,n\n";
    auto csv_row = [&](const char* name, const MetricSummary& s) {
        csv += std::string(name) + "," + dtos(s.mean) + "," + dtos(s.ci_lo) + "," + dtos(s.ci_hi) +
               "," + std::to_string(s.n) + "\n";
    };
    csv_row("ei_before", report.ei_before);
    csv_row("ei_after", report.ei_after);
    csv_row("precision_before", report.precision_before);
    csv_row("precision_after", report.precision_after);
    write_file_atomic(csv_path, csv);
    j["csv"] = csv_path;
    emit_result(o.out, std::move(j), o.output);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic disentanglement pipeline", "sdp"};
    app.require_subcommand(1);
    app.footer("Any long flag may be pre-filled from a JSON object file passed as --config FILE;\n"
               "explicit command-line flags take precedence. Exit codes: 0 ok, 1 domain error\n"
               "(JSON diagnostic on stderr), 2 usage error.");

    GenCorpusOpts gen;
    auto* gen_cmd = app.add_subcommand("gen-corpus", "generate a labeled synthetic corpus");
    gen_cmd->add_option("--topics", gen.spec.topics, "number of topics (k)");
    gen_cmd->add_option("--docs", gen.spec.num_docs, "number of documents");
    gen_cmd->add_option("--segments", gen.spec.segments_per_doc, "segments per document");
    gen_cmd->add_option("--run-length", gen.spec.run_length, "segments per topic run");
    gen_cmd->add_option("--mu", gen.spec.mu, "planted cross-topic similarity");
    gen_cmd->add_option("--sigma", gen.spec.sigma, "embedding noise scale");
    gen_cmd->add_option("--dim", gen.spec.dim, "embedding dimension");
    gen_cmd->add_option("--seed", gen.spec.seed, "generator seed");
    gen_cmd->add_option("--tokens-per-segment", gen.spec.tokens_per_segment, "tokens per segment");
    gen_cmd->add_option("--vocab", gen.spec.vocab_per_topic, "vocabulary size per topic");
    gen_cmd->add_option("--vocab-overlap", gen.spec.vocab_overlap, "shared vocabulary fraction");
    gen_cmd->add_option("-o,--out", gen.out, "corpus output path");
    gen_cmd->add_option("--annotations-out", gen.annotations_out, "annotations output path");
    gen_cmd->add_option("--embedder-out", gen.embedder_out, "embedder config output path");
    add_output_options(gen_cmd, gen.output);
    gen_cmd->callback([&] { run_gen_corpus(gen); });

    CalibrateOpts cal;
    auto* cal_cmd = app.add_subcommand("calibrate", "sweep theta against annotations");
    cal_cmd->add_option("--corpus", cal.corpus, "corpus JSONL")->required();
    cal_cmd->add_option("--annotations", cal.annotations, "annotations JSONL")->required();
    cal_cmd->add_option("--embedder", cal.embedder, "embedder selector kind:path")->required();
    cal_cmd->add_option("--holdout", cal.holdout, "held-out corpus JSONL");
    cal_cmd->add_option("--theta-min", cal.grid.lo, "sweep lower bound");
    cal_cmd->add_option("--theta-max", cal.grid.hi, "sweep upper bound");
    cal_cmd->add_option("--step", cal.grid.step, "sweep step");
    cal_cmd->add_flag("--force", cal.force, "proceed past a failing agreement gate");
    cal_cmd->add_option("-o,--out", cal.out, "calibration result JSON path");
    cal_cmd->add_option("--sweep-csv", cal.sweep_csv, "sweep table CSV path");
    add_output_options(cal_cmd, cal.output);
    cal_cmd->callback([&] { run_calibrate(cal); });

    SegmentOpts seg;
    auto* seg_cmd = app.add_subcommand("segment", "recursive boundary segmentation");
    seg_cmd->add_option("--corpus", seg.corpus, "corpus JSONL")->required();
    seg_cmd->add_option("--embedder", seg.embedder, "embedder selector kind:path")->required();
    seg_cmd->add_option("--theta", seg.theta, "boundary threshold");
    seg_cmd->add_option("--lmin", seg.l_min, "refinement token floor");
    seg_cmd->add_option("-o,--out", seg.out, "fragments JSONL path");
    seg_cmd->add_option("--profile-csv", seg.profile_csv, "per-gap similarity CSV path");
    add_output_options(seg_cmd, seg.output);
    seg_cmd->callback([&] { run_segment(seg); });

    DisentangleOpts dis;
    auto* dis_cmd = app.add_subcommand("disentangle", "full pipeline to knowledge objects");
    dis_cmd->add_option("--corpus", dis.corpus, "corpus JSONL")->required();
    dis_cmd->add_option("--embedder", dis.embedder, "embedder selector kind:path")->required();
    dis_cmd->add_option("--profile", dis.profile, "context profile JSON");
    dis_cmd->add_option("--taxonomy", dis.taxonomy, "domain taxonomy JSON");
    dis_cmd->add_option("--header", dis.header, "header generator: template or topic-tag");
    dis_cmd->add_option("--theta", dis.theta, "boundary threshold");
    dis_cmd->add_option("--alpha", dis.alpha, "entanglement threshold")->required();
    dis_cmd->add_option("--beta", dis.beta, "completeness bound on residual EI");
    dis_cmd->add_option("--lmin", dis.l_min, "refinement token floor");
    dis_cmd->add_option("--candidate", dis.candidates, "candidate theta (repeatable)");
    dis_cmd->add_option("-o,--out", dis.out, "knowledge object store path");
    add_output_options(dis_cmd, dis.output);
    dis_cmd->callback([&] { run_disentangle(dis); });

    IndexOpts idx;
    auto* idx_cmd = app.add_subcommand("index", "merge object files into one store");
    idx_cmd->add_option("--objects", idx.objects, "store files to merge (repeatable)")->required();
    idx_cmd->add_option("-o,--out", idx.out, "merged store path");
    add_output_options(idx_cmd, idx.output);
    idx_cmd->callback([&] { run_index(idx); });

    QueryOpts qry;
    auto* qry_cmd = app.add_subcommand("query", "top-k similarity search with filters");
    qry_cmd->add_option("--store", qry.store, "store path")->required();
    qry_cmd->add_option("--embedder", qry.embedder, "embedder selector kind:path");
    qry_cmd->add_option("--query-text", qry.query_text, "query text (needs --embedder)");
    qry_cmd->add_option("--query-vector", qry.query_vector, "inline JSON array or file path");
    qry_cmd->add_option("--k", qry.k, "result count");
    qry_cmd->add_option("--filter", qry.filters, "metadata key=value (repeatable, ANDed)");
    qry_cmd->add_option("-o,--out", qry.out, "write hits JSON here instead of stdout");
    add_output_options(qry_cmd, qry.output);
    qry_cmd->callback([&] { run_query(qry); });

    EiOpts ei;
    auto* ei_cmd = app.add_subcommand("ei", "entanglement index of a labeled corpus");
    ei_cmd->add_option("--corpus", ei.corpus, "corpus JSONL")->required();
    ei_cmd->add_option("--embedder", ei.embedder, "embedder selector kind:path")->required();
    ei_cmd->add_option("--alpha", ei.alpha, "entanglement threshold")->required();
    ei_cmd->add_flag("--pairs", ei.pairs, "include the entangled pair list as CSV");
    ei_cmd->add_option("-o,--out", ei.out, "write report JSON here instead of stdout");
    add_output_options(ei_cmd, ei.output);
    ei_cmd->callback([&] { run_ei(ei); });

    FeedbackOpts fb;
    auto* fb_cmd = app.add_subcommand("feedback", "ingest an interaction log");
    fb_cmd->add_option("--log", fb.log, "interaction log JSONL")->required();
    fb_cmd->add_option("--store", fb.store, "store path (mutated by --apply)");
    fb_cmd->add_option("--embedder", fb.embedder, "embedder selector kind:path");
    fb_cmd->add_flag("--apply", fb.apply, "recompute counters and write signpost flags");
    fb_cmd->add_flag("--report", fb.report, "emit the four-metric performance report");
    fb_cmd->add_flag("--queue", fb.queue, "emit the re-disentanglement queue");
    fb_cmd->add_option("--alpha", fb.thresholds.alpha, "entanglement threshold for near-misses");
    fb_cmd->add_option("--r-min", fb.thresholds.r_min, "structural rule retrieval floor");
    fb_cmd->add_option("--success-floor", fb.thresholds.success_floor, "structural success floor");
    fb_cmd->add_option("--h-rate", fb.thresholds.h_rate, "conflict hallucination rate");
    fb_cmd->add_option("--h-min", fb.thresholds.h_min, "conflict retrieval floor");
    fb_cmd->add_option("--nearmiss-delta", fb.thresholds.nearmiss_delta, "header near-miss band");
    fb_cmd->add_option("--queue-threshold", fb.queue_threshold, "flags per region to requeue");
    fb_cmd->add_option("-o,--out", fb.out, "write result JSON here instead of stdout");
    add_output_options(fb_cmd, fb.output);
    fb_cmd->callback([&] { run_feedback(fb); });

    ReportOpts rep;
    auto* rep_cmd = app.add_subcommand("report", "end-to-end before/after evaluation");
    rep_cmd->add_option("--corpus", rep.corpus, "corpus JSONL")->required();
    rep_cmd->add_option("--embedder", rep.embedder, "embedder selector kind:path")->required();
    rep_cmd->add_option("--queries", rep.queries, "example queries JSONL");
    rep_cmd->add_option("--profile", rep.profile, "context profile JSON");
    rep_cmd->add_option("--taxonomy", rep.taxonomy, "domain taxonomy JSON");
    rep_cmd->add_option("--header", rep.header, "header generator: template or topic-tag");
    rep_cmd->add_option("--theta", rep.options.theta, "boundary threshold");
    rep_cmd->add_option("--alpha", rep.options.alpha, "entanglement threshold")->required();
    rep_cmd->add_option("--beta", rep.options.beta, "completeness bound");
    rep_cmd->add_option("--lmin", rep.options.l_min, "refinement token floor");
    rep_cmd->add_option("--k", rep.options.k, "retrieval depth for precision");
    rep_cmd->add_option("--baseline-window", rep.options.baseline_window, "chunking baseline size");
    rep_cmd->add_option("--resamples", rep.options.bootstrap_resamples, "bootstrap resamples");
    rep_cmd->add_option("--ci", rep.options.ci_level, "confidence level");
    rep_cmd->add_option("--bootstrap-seed", rep.options.bootstrap_seed, "bootstrap seed");
    rep_cmd->add_option("--candidate", rep.candidates, "candidate theta (repeatable)");
    rep_cmd->add_option("-o,--out", rep.out, "report JSON path");
    rep_cmd->add_option("--csv", rep.csv, "report CSV path");
    add_output_options(rep_cmd, rep.output);
    rep_cmd->callback([&] { run_report_cmd(rep); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = merge_config_file(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        diagnostic("USAGE", e.what());
        return 2;
    } catch (const error& e) {
        diagnostic(errc_name(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        diagnostic("INTERNAL", e.what());
        return 1;
    }
    return 0;
}
