#pragma once

// Experiment configuration: one JSON document describing the dataset, the
// embedding source, a feature-set x learner grid, and the top-level seed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wsd/corpus.hpp"
#include "wsd/embeddings.hpp"
#include "wsd/errors.hpp"
#include "wsd/eval.hpp"

namespace wsd {

// Splits "unigrams+we-avg" into FeatureSpec flags; "none" selects nothing
// (valid only for learners that ignore sparse features). Embedding and tagger
// pointers are attached later by the runner.
inline FeatureSpec parse_feature_set(const std::string& name) {
    FeatureSpec spec;
    if (name == "none") return spec;
    std::size_t start = 0;
    while (start <= name.size()) {
        std::size_t end = name.find('+', start);
        if (end == std::string::npos) end = name.size();
        const std::string family = name.substr(start, end - start);
        if (family == "unigrams")
            spec.unigrams = true;
        else if (family == "bigrams")
            spec.bigrams = true;
        else if (family == "pos")
            spec.pos = true;
        else if (family == "collocations")
            spec.collocations = true;
        else if (family == "concepts")
            spec.concepts = true;
        else if (family == "semtypes")
            spec.semtypes = true;
        else if (family == "we-sum")
            spec.we_sum = true;
        else if (family == "we-avg")
            spec.we_avg = true;
        else
            throw UsageError("unknown feature family: '" + family +
                             "' (expected unigrams|bigrams|pos|collocations|concepts|"
                             "semtypes|we-sum|we-avg)");
        start = end + 1;
    }
    return spec;
}

struct GeneratorSpec {
    bool set = false;
    int terms = 10;
    int senses = 2;
    int instances_per_sense = 100;
    TopicParams topic;
};

struct EmbeddingTrainSpec {
    bool set = false;
    std::filesystem::path corpus;  // text (one document per line) or dataset JSONL
    EmbeddingMeta meta;
    bool seed_explicit = false;  // unset seeds derive from the experiment seed
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::filesystem::path output = ".";
    std::filesystem::path dataset_path;  // exclusive with generator
    GeneratorSpec generator;
    std::filesystem::path embeddings_path;  // exclusive with embed_train
    EmbeddingTrainSpec embed_train;
    std::vector<std::string> feature_sets;
    std::vector<std::string> learners;
    int folds = 10;
    int workers = 1;
    double svm_c = 1.0;
    double svm_tol = 1e-3;
    LstmConfig lstm;      // per-fold seeds are derived, the seed field is ignored
    int lstm_window = 0;  // 0 = whole citation
    bool use_tagger = false;  // lookup fallback for the pos family

    bool has_dataset() const { return !dataset_path.empty() || generator.set; }
    bool has_embeddings() const { return !embeddings_path.empty() || embed_train.set; }
};

// One grid cell: a feature-set name paired with a learner name.
using GridCell = std::pair<std::string, std::string>;

inline std::vector<GridCell> expand_grid(const ExperimentConfig& cfg) {
    std::vector<GridCell> cells;
    for (const std::string& f : cfg.feature_sets)
        for (const std::string& l : cfg.learners) cells.push_back({f, l});
    return cells;
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (!cfg.has_dataset()) throw UsageError("config needs a dataset path or generator spec");
    if (!cfg.dataset_path.empty() && cfg.generator.set)
        throw UsageError("config gives both a dataset path and a generator spec");
    if (!cfg.embeddings_path.empty() && cfg.embed_train.set)
        throw UsageError("config gives both an embeddings path and a training spec");
    if (cfg.feature_sets.empty()) throw UsageError("config selects no feature sets");
    if (cfg.learners.empty()) throw UsageError("config selects no learners");
    if (cfg.folds < 2) throw UsageError("config needs at least two folds");

    bool needs_embeddings = false;
    for (const std::string& f : cfg.feature_sets) {
        FeatureSpec spec = parse_feature_set(f);  // validates family names
        needs_embeddings = needs_embeddings || spec.needs_embeddings();
    }
    for (const std::string& l : cfg.learners) {
        LearnerSpec spec = learner_from_name(l);  // validates learner names
        if (spec.kind == LearnerKind::lstm) needs_embeddings = true;
        // a learner that trains on sparse features needs at least one family
        if (spec.kind != LearnerKind::lstm && spec.kind != LearnerKind::majority) {
            bool all_none = true;
            for (const std::string& f : cfg.feature_sets)
                all_none = all_none && f == "none";
            if (all_none)
                throw UsageError("learner '" + l + "' needs at least one feature family");
        }
    }
    if (needs_embeddings && !cfg.has_embeddings())
        throw UsageError(
            "word-embedding features and the lstm learner require an embedding spec");
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.output = j.value("output", std::string{"."});
        cfg.folds = j.value("folds", 10);
        cfg.workers = j.value("workers", 1);
        cfg.use_tagger = j.value("tagger", false);

        if (j.contains("dataset")) {
            const json& d = j.at("dataset");
            if (d.contains("path")) cfg.dataset_path = d.at("path").get<std::string>();
            if (d.contains("generate")) {
                const json& g = d.at("generate");
                cfg.generator.set = true;
                cfg.generator.terms = g.value("terms", 10);
                cfg.generator.senses = g.value("senses", 2);
                cfg.generator.instances_per_sense = g.value("instances_per_sense", 100);
                cfg.generator.topic.topic_vocab = g.value("topic_vocab", 50);
                cfg.generator.topic.shared_vocab = g.value("shared_vocab", 100);
                cfg.generator.topic.overlap = g.value("overlap", 0.0);
                cfg.generator.topic.ctx_min = g.value("ctx_min", 15);
                cfg.generator.topic.ctx_max = g.value("ctx_max", 40);
            }
        }
        if (j.contains("embeddings")) {
            const json& e = j.at("embeddings");
            if (e.contains("path")) cfg.embeddings_path = e.at("path").get<std::string>();
            if (e.contains("train")) {
                const json& t = e.at("train");
                cfg.embed_train.set = true;
                cfg.embed_train.corpus = t.value("corpus", std::string{});
                cfg.embed_train.meta.d = t.value("d", 100);
                cfg.embed_train.meta.window = t.value("window", 5);
                cfg.embed_train.meta.negatives = t.value("negatives", 5);
                cfg.embed_train.meta.epochs = t.value("epochs", 5);
                cfg.embed_train.meta.min_count = t.value("min_count", 5);
                cfg.embed_train.meta.alpha = t.value("alpha", 0.025);
                cfg.embed_train.meta.subsample = t.value("subsample", 0.0);
                cfg.embed_train.seed_explicit = t.contains("seed");
                cfg.embed_train.meta.seed = t.value("seed", std::uint64_t{1});
            }
        }
        cfg.feature_sets = j.value("features", std::vector<std::string>{});
        cfg.learners = j.value("learners", std::vector<std::string>{});
        if (j.contains("svm")) {
            cfg.svm_c = j.at("svm").value("c", 1.0);
            cfg.svm_tol = j.at("svm").value("tol", 1e-3);
        }
        if (j.contains("lstm")) {
            const json& l = j.at("lstm");
            cfg.lstm.epochs = l.value("epochs", cfg.lstm.epochs);
            cfg.lstm.lr = l.value("lr", cfg.lstm.lr);
            cfg.lstm.decay = l.value("decay", cfg.lstm.decay);
            cfg.lstm.init_range = l.value("init_range", cfg.lstm.init_range);
            cfg.lstm.sum_hinge = l.value("sum_hinge", cfg.lstm.sum_hinge);
            cfg.lstm_window = l.value("window", 0);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed config: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("config is not valid JSON: " + path.string());
    return config_from_json(j);
}

// Full resolved form, written next to the reports for provenance.
inline json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["output"] = cfg.output.string();
    j["folds"] = cfg.folds;
    j["workers"] = cfg.workers;
    j["tagger"] = cfg.use_tagger;
    if (!cfg.dataset_path.empty()) j["dataset"]["path"] = cfg.dataset_path.string();
    if (cfg.generator.set) {
        json g;
        g["terms"] = cfg.generator.terms;
        g["senses"] = cfg.generator.senses;
        g["instances_per_sense"] = cfg.generator.instances_per_sense;
        g["topic_vocab"] = cfg.generator.topic.topic_vocab;
        g["shared_vocab"] = cfg.generator.topic.shared_vocab;
        g["overlap"] = cfg.generator.topic.overlap;
        g["ctx_min"] = cfg.generator.topic.ctx_min;
        g["ctx_max"] = cfg.generator.topic.ctx_max;
        j["dataset"]["generate"] = std::move(g);
    }
    if (!cfg.embeddings_path.empty()) j["embeddings"]["path"] = cfg.embeddings_path.string();
    if (cfg.embed_train.set) {
        json t;
        t["corpus"] = cfg.embed_train.corpus.string();
        t["d"] = cfg.embed_train.meta.d;
        t["window"] = cfg.embed_train.meta.window;
        t["negatives"] = cfg.embed_train.meta.negatives;
        t["epochs"] = cfg.embed_train.meta.epochs;
        t["min_count"] = cfg.embed_train.meta.min_count;
        t["alpha"] = cfg.embed_train.meta.alpha;
        t["subsample"] = cfg.embed_train.meta.subsample;
        t["seed"] = cfg.embed_train.meta.seed;
        j["embeddings"]["train"] = std::move(t);
    }
    j["features"] = cfg.feature_sets;
    j["learners"] = cfg.learners;
    j["svm"] = {{"c", cfg.svm_c}, {"tol", cfg.svm_tol}};
    j["lstm"] = {{"epochs", cfg.lstm.epochs},       {"lr", cfg.lstm.lr},
                 {"decay", cfg.lstm.decay},         {"init_range", cfg.lstm.init_range},
                 {"sum_hinge", cfg.lstm.sum_hinge}, {"window", cfg.lstm_window}};
    return j;
}

}  // namespace wsd
