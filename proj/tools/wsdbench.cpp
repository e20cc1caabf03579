// wsdbench: disambiguation experiment runner.
//
// Subcommands: embed-train, gen-data, extract-features, run, compare, report.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsd/config.hpp"
#include "wsd/corpus.hpp"
#include "wsd/embeddings.hpp"
#include "wsd/errors.hpp"
#include "wsd/eval.hpp"
#include "wsd/reporting.hpp"

namespace fs = std::filesystem;
using namespace wsd;

namespace {

// ---- argument handling -----------------------------------------------------

class Args {
  public:
    Args(int argc, char** argv, int start, std::set<std::string> bool_flags)
        : known_flags_(std::move(bool_flags)) {
        for (int i = start; i < argc; ++i) {
            std::string tok = argv[i];
            if (tok.rfind("--", 0) != 0) {
                positional_.push_back(std::move(tok));
                continue;
            }
            std::string name = tok.substr(2);
            std::size_t eq = name.find('=');
            if (eq != std::string::npos) {
                opts_[name.substr(0, eq)] = name.substr(eq + 1);
                continue;
            }
            if (known_flags_.count(name)) {
                set_flags_.insert(name);
                continue;
            }
            if (i + 1 >= argc)
                throw UsageError("option --" + name + " needs a value");
            opts_[name] = argv[++i];
        }
    }

    bool has(const std::string& name) const { return opts_.count(name) > 0; }
    bool flag(const std::string& name) const { return set_flags_.count(name) > 0; }

    std::string get(const std::string& name, const std::string& fallback = "") const {
        auto it = opts_.find(name);
        return it == opts_.end() ? fallback : it->second;
    }

    std::string require(const std::string& name) const {
        auto it = opts_.find(name);
        if (it == opts_.end()) throw UsageError("missing required option --" + name);
        return it->second;
    }

    long long get_int(const std::string& name, long long fallback) const {
        if (!has(name)) return fallback;
        return parse_int(name, opts_.at(name));
    }

    std::uint64_t get_u64(const std::string& name, std::uint64_t fallback) const {
        if (!has(name)) return fallback;
        const std::string& s = opts_.at(name);
        try {
            std::size_t used = 0;
            std::uint64_t v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw UsageError("option --" + name + " expects an unsigned integer, got '" + s +
                             "'");
        }
    }

    double get_double(const std::string& name, double fallback) const {
        if (!has(name)) return fallback;
        const std::string& s = opts_.at(name);
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw UsageError("option --" + name + " expects a number, got '" + s + "'");
        }
    }

    const std::vector<std::string>& positional() const { return positional_; }

    static long long parse_int(const std::string& name, const std::string& s) {
        try {
            std::size_t used = 0;
            long long v = std::stoll(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw UsageError("option --" + name + " expects an integer, got '" + s + "'");
        }
    }

  private:
    std::map<std::string, std::string> opts_;
    std::set<std::string> known_flags_;
    std::set<std::string> set_flags_;
    std::vector<std::string> positional_;
};

void print_usage(std::ostream& out) {
    out << "usage: wsdbench <subcommand> [options]\n"
           "\n"
           "subcommands:\n"
           "  embed-train  --corpus F --out F [--d N] [--window N] [--negatives N]\n"
           "               [--epochs N] [--min-count N] [--alpha X] [--subsample X]\n"
           "               [--seed N] [--exclude ID-FILE] [--threads N] [--text-out F]\n"
           "               train CBOW embeddings on a text (.txt, one document per\n"
           "               line) or dataset (.jsonl) corpus\n"
           "  gen-data     --out F [--terms N] [--senses N] [--instances-per-sense N]\n"
           "               [--seed N] [--topic-vocab N] [--shared-vocab N] [--overlap X]\n"
           "               [--ctx-min N] [--ctx-max N] [--background F]\n"
           "               [--docs-per-topic N]\n"
           "               generate a pseudo-word dataset (and optional background text)\n"
           "  extract-features  --data F --features SPEC --out F [--embeddings F]\n"
           "               [--tagger]   write one feature line per instance\n"
           "  run          --config F [--out DIR] [--seed N] [--workers N]\n"
           "               run the configured feature x learner grid\n"
           "               (WSDBENCH_WORKERS overrides the config worker count)\n"
           "  compare      --a REPORT --b REPORT [--iterations N] [--seed N]\n"
           "               [--per-instance] [--out PREFIX]\n"
           "               paired significance test between two reports\n"
           "  report       [--out F] REPORT.json...\n"
           "               markdown summary table over saved reports\n";
}

// ---- shared helpers --------------------------------------------------------

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    write_text_file(tmp, content);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::set<std::string> read_id_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read exclusion list: " + path.string());
    std::set<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) ids.insert(line);
    }
    return ids;
}

struct CorpusStats {
    std::uint64_t kept_tokens = 0;
    std::uint64_t excluded_tokens = 0;
    int excluded_citations = 0;
};

// Text corpora hold one document per line; .jsonl corpora are datasets whose
// citations become documents, minus any excluded citation ids.
Docs corpus_docs(const fs::path& path, const std::set<std::string>& exclude, CorpusStats* st) {
    Docs docs;
    auto add_doc = [&](const std::string& text) {
        TokenStream ts = tokenize(text);
        if (ts.empty()) return;
        std::vector<std::string> words;
        words.reserve(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) words.push_back(ts[i].surface);
        if (st) st->kept_tokens += words.size();
        docs.push_back(std::move(words));
    };
    if (path.extension() == ".jsonl") {
        Dataset d = load_jsonl(path);
        for (const Citation& c : d.citations) {
            if (exclude.count(c.id)) {
                if (st) {
                    st->excluded_citations += 1;
                    st->excluded_tokens += tokenize(c.text()).size();
                }
                continue;
            }
            add_doc(c.text());
        }
    } else {
        if (!exclude.empty())
            throw UsageError("--exclude lists citation ids and needs a .jsonl corpus");
        std::ifstream in(path);
        if (!in) throw DataError("cannot read corpus: " + path.string());
        std::string line;
        while (std::getline(in, line)) add_doc(line);
    }
    if (docs.empty()) throw DataError("corpus has no usable documents: " + path.string());
    return docs;
}

// ---- subcommands -----------------------------------------------------------

int cmd_embed_train(const Args& args) {
    const fs::path corpus = args.require("corpus");
    const fs::path out = args.require("out");
    EmbeddingMeta meta;
    meta.d = static_cast<int>(args.get_int("d", 100));
    meta.window = static_cast<int>(args.get_int("window", 5));
    meta.negatives = static_cast<int>(args.get_int("negatives", 5));
    meta.epochs = static_cast<int>(args.get_int("epochs", 5));
    meta.min_count = static_cast<int>(args.get_int("min-count", 5));
    meta.alpha = args.get_double("alpha", 0.025);
    meta.subsample = args.get_double("subsample", 0.0);
    meta.seed = args.get_u64("seed", 1);
    const int threads = static_cast<int>(args.get_int("threads", 1));

    std::set<std::string> exclude;
    if (args.has("exclude")) exclude = read_id_file(args.get("exclude"));

    CorpusStats st;
    Docs docs = corpus_docs(corpus, exclude, &st);
    EmbeddingModel m = train_cbow(docs, meta, threads);
    save_model(m, out);
    if (args.has("text-out")) save_text(m, args.get("text-out"));

    std::printf("trained embeddings: vocab=%zu d=%d window=%d negatives=%d epochs=%d seed=%llu\n",
                m.vocab.size(), m.meta.d, m.meta.window, m.meta.negatives, m.meta.epochs,
                static_cast<unsigned long long>(m.meta.seed));
    std::printf("corpus: %zu documents, %llu tokens kept", docs.size(),
                static_cast<unsigned long long>(st.kept_tokens));
    if (!exclude.empty())
        std::printf(" (excluded %d citations, %llu tokens)", st.excluded_citations,
                    static_cast<unsigned long long>(st.excluded_tokens));
    std::printf("\ntokens per epoch in vocabulary: %llu\n",
                static_cast<unsigned long long>(m.meta.train_tokens));
    std::printf("epoch losses:");
    for (double l : m.epoch_losses) std::printf(" %.4f", l);
    std::printf("\nwrote %s\n", out.string().c_str());
    return 0;
}

int cmd_gen_data(const Args& args) {
    const fs::path out = args.require("out");
    const std::uint64_t seed = args.get_u64("seed", 0);
    const int terms = static_cast<int>(args.get_int("terms", 10));
    const int senses = static_cast<int>(args.get_int("senses", 2));
    const int per_sense = static_cast<int>(args.get_int("instances-per-sense", 100));
    TopicParams topic;
    topic.topic_vocab = static_cast<int>(args.get_int("topic-vocab", 50));
    topic.shared_vocab = static_cast<int>(args.get_int("shared-vocab", 100));
    topic.overlap = args.get_double("overlap", 0.0);
    topic.ctx_min = static_cast<int>(args.get_int("ctx-min", 15));
    topic.ctx_max = static_cast<int>(args.get_int("ctx-max", 40));

    std::vector<std::string> warnings;
    Dataset d = generate_pseudoword_dataset(seed, terms, senses, per_sense, topic, &warnings);
    for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_jsonl(d, out);
    std::printf("wrote %s: %zu terms, %zu citations, %zu instances (seed %llu)\n",
                out.string().c_str(), d.inventory.entries.size(), d.citations.size(),
                d.instances.size(), static_cast<unsigned long long>(seed));

    if (args.has("background")) {
        const fs::path bg = args.get("background");
        const int docs_per_topic = static_cast<int>(args.get_int("docs-per-topic", 10));
        std::vector<std::string> docs =
            generate_background_corpus(seed, terms, senses, docs_per_topic, topic);
        std::string text;
        for (const std::string& doc : docs) {
            text += doc;
            text += '\n';
        }
        write_text_file(bg, text);
        std::printf("wrote %s: %zu background documents\n", bg.string().c_str(), docs.size());
    }
    return 0;
}

int cmd_extract_features(const Args& args) {
    const fs::path data = args.require("data");
    const fs::path out = args.require("out");
    FeatureSpec spec = parse_feature_set(args.require("features"));
    if (!spec.any()) throw UsageError("feature spec selects no feature families");

    EmbeddingModel model;
    if (args.has("embeddings")) {
        model = load_model(args.get("embeddings"));
        spec.embeddings = &model;
    }
    LookupPosTagger tagger;
    if (args.flag("tagger")) spec.tagger = &tagger;

    Dataset d = load_jsonl(data);
    std::unordered_map<std::string, TokenStream> tokens;
    std::ofstream of(out);
    if (!of) throw DataError("cannot write " + out.string());
    std::vector<SparseFeatures> rows;
    rows.reserve(d.instances.size());
    for (const Instance& inst : d.instances) {
        const Citation* c = d.find_citation(inst.citation_id);
        auto [it, fresh] = tokens.try_emplace(inst.citation_id);
        if (fresh) it->second = tokenize(c->text());
        SparseFeatures f = instance_features(it->second, *c, inst.position, spec);
        write_feature_line(of, inst.citation_id + ":" + std::to_string(inst.position),
                           inst.sense, f);
        rows.push_back(std::move(f));
    }
    if (!of) throw DataError("write failed: " + out.string());
    const int dim = FeatureSpace::build(rows).dim();
    std::printf("wrote %zu feature lines to %s (feature space over all instances: %d)\n",
                rows.size(), out.string().c_str(), dim);
    return 0;
}

int cmd_run(const Args& args) {
    ExperimentConfig cfg = load_config(args.require("config"));
    if (args.has("seed")) cfg.seed = args.get_u64("seed", cfg.seed);
    if (args.has("out")) cfg.output = args.get("out");
    if (const char* env = std::getenv("WSDBENCH_WORKERS"))
        cfg.workers = static_cast<int>(Args::parse_int("WSDBENCH_WORKERS", env));
    if (args.has("workers")) cfg.workers = static_cast<int>(args.get_int("workers", 1));
    if (cfg.workers < 1) throw UsageError("worker count must be >= 1");

    fs::create_directories(cfg.output);

    Dataset d;
    if (!cfg.dataset_path.empty()) {
        d = load_jsonl(cfg.dataset_path);
        std::printf("dataset %s: %zu terms, %zu instances\n",
                    cfg.dataset_path.string().c_str(), d.inventory.entries.size(),
                    d.instances.size());
    } else {
        std::vector<std::string> warnings;
        d = generate_pseudoword_dataset(cfg.seed, cfg.generator.terms, cfg.generator.senses,
                                        cfg.generator.instances_per_sense, cfg.generator.topic,
                                        &warnings);
        for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        std::printf("generated dataset: %zu terms, %zu instances (seed %llu)\n",
                    d.inventory.entries.size(), d.instances.size(),
                    static_cast<unsigned long long>(cfg.seed));
    }

    EmbeddingModel model;
    bool have_model = false;
    if (!cfg.embeddings_path.empty()) {
        model = load_model(cfg.embeddings_path);
        have_model = true;
    } else if (cfg.embed_train.set) {
        EmbeddingMeta meta = cfg.embed_train.meta;
        if (!cfg.embed_train.seed_explicit) meta.seed = substream_seed(cfg.seed, "embeddings");
        Docs docs = corpus_docs(cfg.embed_train.corpus, {}, nullptr);
        model = train_cbow(docs, meta);
        have_model = true;
        save_model(model, cfg.output / "embeddings.bin");
        std::printf("trained embeddings: vocab=%zu d=%d (saved to %s)\n", model.vocab.size(),
                    model.meta.d, (cfg.output / "embeddings.bin").string().c_str());
    }
    if (have_model && !cfg.embeddings_path.empty())
        std::printf("embeddings %s: vocab=%zu d=%d\n", cfg.embeddings_path.string().c_str(),
                    model.vocab.size(), model.meta.d);

    FoldPlan folds = make_folds(d, cfg.seed, cfg.folds);
    LookupPosTagger tagger;

    json resolved = config_to_json(cfg);
    atomic_write(cfg.output / "resolved-config.json", resolved.dump(2) + "\n");

    std::vector<EvalReport> reports;
    reports.reserve(expand_grid(cfg).size());
    for (const GridCell& cell : expand_grid(cfg)) {
        FeatureSpec features = parse_feature_set(cell.first);
        if (features.needs_embeddings()) features.embeddings = &model;
        if (cfg.use_tagger) features.tagger = &tagger;
        LearnerSpec learner = learner_from_name(cell.second);
        learner.svm_c = cfg.svm_c;
        learner.svm_tol = cfg.svm_tol;
        learner.lstm = cfg.lstm;
        learner.lstm_window = cfg.lstm_window;
        if (learner.kind == LearnerKind::lstm) features.embeddings = &model;

        std::atomic<int> max_dim{0};
        ExperimentOptions opt;
        opt.workers = cfg.workers;
        opt.seed = cfg.seed;
        opt.fold_hook = [&max_dim](const FoldHookInfo& info) {
            int dim = info.space.dim();
            int seen = max_dim.load();
            while (dim > seen && !max_dim.compare_exchange_weak(seen, dim)) {
            }
        };

        EvalReport r = run_experiment(d, features, learner, folds, opt);
        const std::string stem = "report-" + cell.first + "-" + cell.second;
        atomic_write(cfg.output / (stem + ".json"), report_to_json(r).dump(2) + "\n");
        atomic_write(cfg.output / (stem + ".csv"), report_csv(r));
        std::printf("features=%s learner=%s macro=%.4f micro=%.4f ci=[%.4f, %.4f]",
                    cell.first.c_str(), cell.second.c_str(), r.macro, r.micro, r.ci.first,
                    r.ci.second);
        if (max_dim.load() > 0) std::printf(" dim<=%d", max_dim.load());
        std::printf("\n");
        reports.push_back(std::move(r));
    }

    std::vector<const EvalReport*> views;
    views.reserve(reports.size());
    for (const EvalReport& r : reports) views.push_back(&r);
    atomic_write(cfg.output / "summary.md", report_markdown(views));
    std::printf("wrote %zu reports and %s\n", reports.size(),
                (cfg.output / "summary.md").string().c_str());
    return 0;
}

int cmd_compare(const Args& args) {
    EvalReport a = load_report(args.require("a"));
    EvalReport b = load_report(args.require("b"));
    const int iterations = static_cast<int>(args.get_int("iterations", 100000));
    const std::uint64_t seed = args.get_u64("seed", 0);
    const bool per_instance = args.flag("per-instance");

    CompareResult res = compare_reports(a, b, iterations, seed, per_instance);
    const std::size_t pairs = per_instance ? a.predictions.size() : a.per_term.size();
    const char* method = pairs <= 20 ? "exhaustive" : "monte-carlo";

    std::printf("a: %s\n", a.fingerprint.c_str());
    std::printf("b: %s\n", b.fingerprint.c_str());
    std::printf("pairs: %zu (%s)\n", pairs, per_instance ? "per-instance" : "per-term");
    std::printf("mean difference: %s\n", format_pm(res.mean_diff, res.ci_half).c_str());
    std::printf("p-value: %.6f (%s sign-flip randomization)\n", res.p_value, method);

    if (args.has("out")) {
        const std::string prefix = args.get("out");
        const std::string la = fingerprint_field(a.fingerprint, "features") + " " +
                               fingerprint_field(a.fingerprint, "learner");
        const std::string lb = fingerprint_field(b.fingerprint, "features") + " " +
                               fingerprint_field(b.fingerprint, "learner");
        atomic_write(prefix + ".csv", diff_csv(res.diffs, la, lb));
        atomic_write(prefix + ".svg", diff_svg(res.diffs, la + " vs " + lb));
        std::printf("wrote %s.csv and %s.svg\n", prefix.c_str(), prefix.c_str());
    }
    return 0;
}

int cmd_report(const Args& args) {
    if (args.positional().empty()) throw UsageError("report needs at least one report file");
    std::vector<EvalReport> reports;
    reports.reserve(args.positional().size());
    for (const std::string& path : args.positional()) reports.push_back(load_report(path));
    std::vector<const EvalReport*> views;
    views.reserve(reports.size());
    for (const EvalReport& r : reports) views.push_back(&r);
    const std::string md = report_markdown(views);
    if (args.has("out")) {
        atomic_write(args.get("out"), md);
        std::printf("wrote %s\n", args.get("out").c_str());
    } else {
        std::fputs(md.c_str(), stdout);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        print_usage(std::cerr);
        return 1;
    }
    const std::string cmd = argv[1];
    if (cmd == "help" || cmd == "--help" || cmd == "-h") {
        print_usage(std::cout);
        return 0;
    }
    try {
        if (cmd == "embed-train")
            return cmd_embed_train(Args(argc, argv, 2, {}));
        if (cmd == "gen-data")
            return cmd_gen_data(Args(argc, argv, 2, {}));
        if (cmd == "extract-features")
            return cmd_extract_features(Args(argc, argv, 2, {"tagger"}));
        if (cmd == "run")
            return cmd_run(Args(argc, argv, 2, {}));
        if (cmd == "compare")
            return cmd_compare(Args(argc, argv, 2, {"per-instance"}));
        if (cmd == "report")
            return cmd_report(Args(argc, argv, 2, {}));
        throw UsageError("unknown subcommand: " + cmd);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "wsdbench %s: %s\n", cmd.c_str(), e.what());
        return exit_code_for(e);
    }
}
