#pragma once

// Cross-validated disambiguation experiments: stratified 10-fold plans, one
// classifier per ambiguous term, macro/micro accuracy with 95% confidence
// intervals, approximate-randomization significance tests, and per-term
// difference analysis.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wsd/classifiers.hpp"
#include "wsd/corpus.hpp"
#include "wsd/embeddings.hpp"
#include "wsd/errors.hpp"
#include "wsd/features.hpp"
#include "wsd/lstm.hpp"
#include "wsd/rng.hpp"
#include "wsd/tokenize.hpp"

namespace wsd {

// ---- fold plans --------------------------------------------------------------

struct FoldPlan {
    std::uint64_t seed = 0;
    int n_folds = 10;
    std::vector<int> assignment;  // parallel to Dataset::instances, 0..n_folds-1
};

// Stratified by sense within each term: each (term, sense) group is shuffled
// under its own named substream and dealt round-robin, so group sizes per fold
// differ by at most one and adding a term never reshuffles the others.
inline FoldPlan make_folds(const Dataset& d, std::uint64_t seed, int n_folds = 10) {
    if (n_folds < 2) throw UsageError("need at least two folds");
    FoldPlan plan;
    plan.seed = seed;
    plan.n_folds = n_folds;
    plan.assignment.assign(d.instances.size(), -1);
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < d.instances.size(); ++i)
        groups[{d.instances[i].term, d.instances[i].sense}].push_back(i);
    for (auto& [key, idxs] : groups) {
        Rng rng(substream_seed(seed, "folds:" + key.first + "|" + key.second));
        rng.shuffle(idxs);
        for (std::size_t i = 0; i < idxs.size(); ++i)
            plan.assignment[idxs[i]] = static_cast<int>(i % static_cast<std::size_t>(n_folds));
    }
    return plan;
}

// ---- experiment specs ----------------------------------------------------------

struct FeatureSpec {
    bool unigrams = false;
    bool bigrams = false;  // implies the unigram family (bigrams run combined)
    bool pos = false;
    bool collocations = false;
    bool concepts = false;
    bool semtypes = false;
    bool we_sum = false;
    bool we_avg = false;
    const EmbeddingModel* embeddings = nullptr;   // required by we_sum/we_avg
    const LookupPosTagger* tagger = nullptr;      // optional pos fallback

    bool any() const {
        return unigrams || bigrams || pos || collocations || concepts || semtypes || we_sum ||
               we_avg;
    }
    bool needs_embeddings() const { return we_sum || we_avg; }

    std::string name() const {
        std::string out;
        auto add = [&out](bool on, const char* label) {
            if (!on) return;
            if (!out.empty()) out += '+';
            out += label;
        };
        add(unigrams && !bigrams, "unigrams");
        add(bigrams, "bigrams");
        add(pos, "pos");
        add(collocations, "collocations");
        add(concepts, "concepts");
        add(semtypes, "semtypes");
        add(we_sum, "we-sum");
        add(we_avg, "we-avg");
        return out.empty() ? "none" : out;
    }
};

enum class LearnerKind { majority, nb, svm, knn, lstm };

struct LearnerSpec {
    LearnerKind kind = LearnerKind::nb;
    int knn_k = 1;
    double svm_c = 1.0;
    double svm_tol = 1e-3;
    LstmConfig lstm;
    int lstm_window = 0;  // context tokens each side for the LSTM; 0 = whole citation

    std::string name() const {
        switch (kind) {
            case LearnerKind::majority: return "majority";
            case LearnerKind::nb: return "nb";
            case LearnerKind::svm: return "svm";
            case LearnerKind::knn: return "knn" + std::to_string(knn_k);
            case LearnerKind::lstm: return "lstm";
        }
        return "?";
    }
};

inline LearnerSpec learner_from_name(const std::string& name) {
    LearnerSpec spec;
    if (name == "majority") {
        spec.kind = LearnerKind::majority;
    } else if (name == "nb") {
        spec.kind = LearnerKind::nb;
    } else if (name == "svm") {
        spec.kind = LearnerKind::svm;
    } else if (name.size() == 4 && name.rfind("knn", 0) == 0 && name[3] >= '1' &&
               name[3] <= '9') {
        spec.kind = LearnerKind::knn;
        spec.knn_k = name[3] - '0';
    } else if (name == "lstm") {
        spec.kind = LearnerKind::lstm;
    } else {
        throw UsageError("unknown learner: " + name +
                         " (expected majority|nb|svm|knn<k>|lstm)");
    }
    return spec;
}

// ---- per-instance representations -----------------------------------------------

// All token surfaces except the target occurrence, in order.
inline std::vector<std::string> context_surfaces(const TokenStream& ts, int target) {
    std::vector<std::string> out;
    if (!ts.empty()) out.reserve(ts.size() - 1);
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (static_cast<int>(i) != target) out.push_back(ts[i].surface);
    return out;
}

namespace detail {

// Dense aggregate written as sparse features with zero-padded component keys
// ("wea:0007") so one FeatureSpace covers sparse and dense families alike.
inline void append_embedding_block(SparseFeatures& f, const Aggregate& agg,
                                   const char* prefix) {
    char key[24];
    for (Eigen::Index k = 0; k < agg.v.size(); ++k) {
        std::snprintf(key, sizeof(key), "%s%04d", prefix, static_cast<int>(k));
        f[key] = agg.v[k];
    }
}

}  // namespace detail

// Sparse feature vector for one instance under a feature spec. The bigram
// family already contains unigrams, so both flags together add each family
// once. Missing annotation layers surface as data errors from the extractors.
inline SparseFeatures instance_features(const TokenStream& ts, const Citation& c, int target,
                                        const FeatureSpec& spec) {
    if (target < 0 || static_cast<std::size_t>(target) >= ts.size())
        throw DataError("instance position outside the citation token stream");
    std::vector<SparseFeatures> parts;
    if (spec.unigrams && !spec.bigrams) parts.push_back(extract_unigrams(ts, target));
    if (spec.bigrams) parts.push_back(extract_bigrams(ts, target));
    if (spec.pos) parts.push_back(extract_pos_window(ts, c, target, spec.tagger));
    if (spec.collocations) parts.push_back(extract_collocations(ts, target));
    if (spec.concepts) parts.push_back(extract_concepts(c));
    if (spec.semtypes) parts.push_back(extract_semtypes(c));
    if (spec.needs_embeddings()) {
        if (!spec.embeddings)
            throw UsageError("feature spec requests word embeddings but none are loaded");
        std::vector<std::string> ctx = context_surfaces(ts, target);
        SparseFeatures dense;
        if (spec.we_sum)
            detail::append_embedding_block(dense, aggregate_sum(*spec.embeddings, ctx), "wes:");
        if (spec.we_avg)
            detail::append_embedding_block(dense, aggregate_avg(*spec.embeddings, ctx), "wea:");
        parts.push_back(std::move(dense));
    }
    return combine(parts);
}

// Embedded context sequence for the LSTM: in-vocabulary context words in
// order, optionally restricted to a window around the target; a context with
// no vectors falls back to a single zero vector.
inline Sequence instance_sequence(const EmbeddingModel& m, const TokenStream& ts, int target,
                                  int window = 0) {
    if (target < 0 || static_cast<std::size_t>(target) >= ts.size())
        throw DataError("instance position outside the citation token stream");
    const int n = static_cast<int>(ts.size());
    const int lo = window > 0 ? std::max(0, target - window) : 0;
    const int hi = window > 0 ? std::min(n, target + window + 1) : n;
    Sequence seq;
    for (int i = lo; i < hi; ++i) {
        if (i == target) continue;
        if (std::optional<DenseVector> v = lookup(m, ts[static_cast<std::size_t>(i)].surface))
            seq.push_back(std::move(*v));
    }
    if (seq.empty()) seq.push_back(DenseVector::Zero(m.meta.d));
    return seq;
}

// ---- report types ------------------------------------------------------------------

struct PredictionRecord {
    std::string term;
    int fold = 0;
    std::size_t instance = 0;  // index into Dataset::instances
    int gold = 0;
    int predicted = 0;
};

struct GroupStats {
    int terms = 0;
    int correct = 0;
    int total = 0;
    double macro = 0.0;  // mean of per-term accuracies in the group
    double micro = 0.0;  // pooled correct/total in the group
};

struct EvalReport {
    std::map<std::string, double> per_term;                      // term -> accuracy
    std::map<std::string, std::pair<int, int>> per_term_counts;  // term -> correct,total
    double macro = 0.0;
    double micro = 0.0;
    std::pair<double, double> ci{0.0, 0.0};  // 95% interval over per-term accuracies
    std::map<int, GroupStats> by_sense_count;
    std::map<std::string, GroupStats> by_word_type;
    std::string fingerprint;  // resolved config description
    std::uint64_t seed = 0;
    std::vector<PredictionRecord> predictions;
};

// ---- statistics ----------------------------------------------------------------------

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// mu +/- 1.96 sigma/sqrt(N). sample_sd selects the N-1 denominator (default)
// over the population N denominator.
inline std::pair<double, double> ci95(const std::vector<double>& values,
                                      bool sample_sd = true) {
    const std::size_t n = values.size();
    if (n < 2) throw UsageError("confidence interval needs at least two values");
    const double mu = mean_of(values);
    double ss = 0.0;
    for (double x : values) ss += (x - mu) * (x - mu);
    const double denom = sample_sd ? static_cast<double>(n - 1) : static_cast<double>(n);
    const double sigma = std::sqrt(ss / denom);
    const double half = 1.96 * sigma / std::sqrt(static_cast<double>(n));
    return {mu - half, mu + half};
}

// Two-sided approximate randomization test on paired values: the statistic is
// the mean of the paired differences; sign patterns are enumerated exhaustively
// for N <= 20 and sampled `iterations` times otherwise (add-one smoothed).
// Ties within floating-point noise of the observed statistic count as extreme.
inline double randomization_test(const std::vector<double>& a, const std::vector<double>& b,
                                 int iterations = 100000, std::uint64_t seed = 0,
                                 bool force_monte_carlo = false) {
    if (a.size() != b.size()) throw UsageError("paired value lists differ in length");
    if (a.empty()) throw UsageError("paired value lists are empty");
    const std::size_t n = a.size();
    std::vector<double> diffs(n);
    for (std::size_t i = 0; i < n; ++i) diffs[i] = a[i] - b[i];
    const double observed = std::abs(mean_of(diffs));
    const double tol = 1e-12 * std::max(1.0, observed);
    const double threshold = observed - tol;
    const double inv_n = 1.0 / static_cast<double>(n);

    if (n <= 20 && !force_monte_carlo) {
        const std::uint64_t patterns = 1ull << n;
        std::uint64_t hits = 0;
        for (std::uint64_t mask = 0; mask < patterns; ++mask) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (mask >> i) & 1 ? -diffs[i] : diffs[i];
            if (std::abs(s) * inv_n >= threshold) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(patterns);
    }

    Rng rng(substream_seed(seed, "randomization"));
    std::uint64_t hits = 0;
    for (int it = 0; it < iterations; ++it) {
        double s = 0.0;
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 64 == 0) bits = rng.next_u64();
            s += (bits >> (i % 64)) & 1 ? -diffs[i] : diffs[i];
        }
        if (std::abs(s) * inv_n >= threshold) ++hits;
    }
    return static_cast<double>(hits + 1) / static_cast<double>(iterations + 1);
}

// ---- difference analysis ----------------------------------------------------------------

struct DiffEntry {
    std::string term;
    double a = 0.0;
    double b = 0.0;
    double diff = 0.0;  // a - b
};

// Per-term accuracy differences sorted in descending order (ties by term).
inline std::vector<DiffEntry> diff_report(const EvalReport& r1, const EvalReport& r2) {
    if (r1.per_term.size() != r2.per_term.size())
        throw DataError("reports cover different term sets");
    std::vector<DiffEntry> out;
    out.reserve(r1.per_term.size());
    for (const auto& [term, acc] : r1.per_term) {
        auto it = r2.per_term.find(term);
        if (it == r2.per_term.end())
            throw DataError("reports cover different term sets: missing " + term);
        out.push_back({term, acc, it->second, acc - it->second});
    }
    std::sort(out.begin(), out.end(), [](const DiffEntry& x, const DiffEntry& y) {
        if (x.diff != y.diff) return x.diff > y.diff;
        return x.term < y.term;
    });
    return out;
}

// ---- report assembly ------------------------------------------------------------------

// Builds the full report purely from the prediction log; run_experiment
// cross-checks this against its own fold-level accounting.
inline EvalReport assemble_report(const Dataset& d, std::vector<PredictionRecord> predictions,
                                  std::string fingerprint, std::uint64_t seed) {
    EvalReport r;
    r.predictions = std::move(predictions);
    r.fingerprint = std::move(fingerprint);
    r.seed = seed;

    for (const PredictionRecord& p : r.predictions) {
        auto& [correct, total] = r.per_term_counts[p.term];
        total += 1;
        if (p.predicted == p.gold) correct += 1;
    }
    long long pooled_correct = 0, pooled_total = 0;
    std::vector<double> accs;
    accs.reserve(r.per_term_counts.size());
    for (const auto& [term, ct] : r.per_term_counts) {
        const double acc = static_cast<double>(ct.first) / static_cast<double>(ct.second);
        r.per_term[term] = acc;
        accs.push_back(acc);
        pooled_correct += ct.first;
        pooled_total += ct.second;
    }
    r.macro = mean_of(accs);
    r.micro = pooled_total == 0
                  ? 0.0
                  : static_cast<double>(pooled_correct) / static_cast<double>(pooled_total);
    r.ci = accs.size() >= 2 ? ci95(accs) : std::pair<double, double>{r.macro, r.macro};

    for (const auto& [term, acc] : r.per_term) {
        auto it = d.inventory.entries.find(term);
        const int senses = it == d.inventory.entries.end()
                               ? 0
                               : static_cast<int>(it->second.senses.size());
        const std::string word_type =
            it == d.inventory.entries.end() || it->second.word_type.empty()
                ? "?"
                : it->second.word_type;
        const auto& ct = r.per_term_counts.at(term);
        for (GroupStats* g : {&r.by_sense_count[senses], &r.by_word_type[word_type]}) {
            g->terms += 1;
            g->correct += ct.first;
            g->total += ct.second;
            g->macro += acc;  // sum for now, divided below
        }
    }
    auto finish_groups = [](auto& groups) {
        for (auto& [key, g] : groups) {
            g.macro /= static_cast<double>(g.terms);
            g.micro = g.total == 0
                          ? 0.0
                          : static_cast<double>(g.correct) / static_cast<double>(g.total);
        }
    };
    finish_groups(r.by_sense_count);
    finish_groups(r.by_word_type);
    return r;
}

// ---- experiment runner --------------------------------------------------------------------

struct FoldHookInfo {
    const std::string& term;
    int fold;
    const FeatureSpace& space;          // built from training folds only
    const TrainingMatrix& train;
    const std::vector<std::size_t>& train_instances;  // dataset indices
    const std::vector<std::size_t>& test_instances;
};

struct ExperimentOptions {
    int workers = 1;          // term-level parallelism
    std::uint64_t seed = 0;   // learner randomness substreams from here
    // Instrumentation for tests (leakage assertions); called per fold for the
    // vector-space learners before prediction. Must be thread-safe when
    // workers > 1.
    std::function<void(const FoldHookInfo&)> fold_hook;
};

namespace detail {

struct TermJob {
    std::string term;
    std::vector<std::size_t> instances;  // dataset indices, ascending
};

struct TermOutcome {
    std::vector<PredictionRecord> predictions;  // fold-major, instance-ascending
    int correct = 0;                            // fold-level accounting for the
    int total = 0;                              // criterion-8 cross-check
};

// Rethrows the active exception with an added prefix, preserving type.
[[noreturn]] inline void rethrow_prefixed(const std::string& ctx) {
    try {
        throw;
    } catch (const UsageError& e) {
        throw UsageError(ctx + e.what());
    } catch (const DataError& e) {
        throw DataError(ctx + e.what());
    } catch (const NumericError& e) {
        throw NumericError(ctx + e.what());
    }
}

[[noreturn]] inline void rethrow_with_context(const std::string& term, int fold) {
    rethrow_prefixed("term '" + term + "' fold " + std::to_string(fold) + ": ");
}

inline int majority_class(const std::vector<int>& labels, int num_classes) {
    std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
    for (int y : labels) counts[static_cast<std::size_t>(y)] += 1;
    int best = 0;
    for (int j = 1; j < num_classes; ++j)
        if (counts[static_cast<std::size_t>(j)] > counts[static_cast<std::size_t>(best)])
            best = j;
    return best;
}

}  // namespace detail

// Runs one (feature spec, learner) cell: per term, train on nine folds and
// predict the held-out fold, for every fold; aggregates macro/micro accuracy,
// confidence interval, and group breakdowns. Feature vocabularies and
// normalization statistics are derived from training folds only. Per-term
// work is independent and seeded by named substreams, so results do not
// depend on the worker count.
inline EvalReport run_experiment(const Dataset& d, const FeatureSpec& features,
                                 const LearnerSpec& learner, const FoldPlan& folds,
                                 const ExperimentOptions& opt = {}) {
    if (folds.assignment.size() != d.instances.size())
        throw UsageError("fold plan does not match the dataset");
    if (d.instances.empty()) throw DataError("dataset has no instances");
    const bool is_lstm = learner.kind == LearnerKind::lstm;
    const bool is_majority = learner.kind == LearnerKind::majority;
    if (is_lstm && !features.embeddings)
        throw UsageError("the lstm learner requires word embeddings");
    if (!is_lstm && !is_majority && !features.any())
        throw UsageError("feature spec selects no feature families");
    if (features.needs_embeddings() && !features.embeddings)
        throw UsageError("feature spec requests word embeddings but none are loaded");

    // citation lookup + one tokenization per citation
    std::unordered_map<std::string, const Citation*> citation_by_id;
    citation_by_id.reserve(d.citations.size());
    for (const Citation& c : d.citations) citation_by_id[c.id] = &c;
    std::unordered_map<const Citation*, TokenStream> tokens;
    tokens.reserve(d.citations.size());

    std::map<std::string, detail::TermJob> jobs;
    for (std::size_t i = 0; i < d.instances.size(); ++i) {
        const Instance& inst = d.instances[i];
        auto cit = citation_by_id.find(inst.citation_id);
        if (cit == citation_by_id.end())
            throw DataError("instance cites unknown citation " + inst.citation_id);
        if (!tokens.count(cit->second)) tokens.emplace(cit->second, tokenize(cit->second->text()));
        detail::TermJob& job = jobs[inst.term];
        job.term = inst.term;
        job.instances.push_back(i);
    }

    auto run_term = [&](const detail::TermJob& job) -> detail::TermOutcome {
        const auto inv = d.inventory.entries.find(job.term);
        if (inv == d.inventory.entries.end())
            throw DataError("term missing from the sense inventory: " + job.term);
        const std::vector<std::string>& senses = inv->second.senses;
        const int num_classes = static_cast<int>(senses.size());
        std::map<std::string, int> sense_index;
        for (int s = 0; s < num_classes; ++s) sense_index[senses[static_cast<std::size_t>(s)]] = s;

        // labels and cached per-instance representations
        std::vector<int> label(job.instances.size());
        std::vector<SparseFeatures> feats;
        std::vector<Sequence> seqs;
        if (!is_majority && !is_lstm) feats.resize(job.instances.size());
        if (is_lstm) seqs.resize(job.instances.size());
        for (std::size_t n = 0; n < job.instances.size(); ++n) {
            const Instance& inst = d.instances[job.instances[n]];
            auto si = sense_index.find(inst.sense);
            if (si == sense_index.end())
                throw DataError("sense '" + inst.sense + "' missing from inventory of " +
                                job.term);
            label[n] = si->second;
            const Citation* c = citation_by_id.at(inst.citation_id);
            const TokenStream& ts = tokens.at(c);
            try {
                if (!is_majority && !is_lstm)
                    feats[n] = instance_features(ts, *c, inst.position, features);
                if (is_lstm)
                    seqs[n] = instance_sequence(*features.embeddings, ts, inst.position,
                                                learner.lstm_window);
            } catch (...) {
                detail::rethrow_prefixed("term '" + job.term + "' citation " +
                                         inst.citation_id + ": ");
            }
        }

        detail::TermOutcome out;
        for (int fold = 0; fold < folds.n_folds; ++fold) {
            std::vector<std::size_t> train_local, test_local;  // indices into job arrays
            for (std::size_t n = 0; n < job.instances.size(); ++n)
                (folds.assignment[job.instances[n]] == fold ? test_local : train_local)
                    .push_back(n);
            if (test_local.empty()) continue;
            try {
                std::vector<int> train_labels;
                train_labels.reserve(train_local.size());
                for (std::size_t n : train_local) train_labels.push_back(label[n]);

                std::vector<int> predicted(test_local.size());
                if (is_majority) {
                    if (train_labels.empty())
                        throw DataError("no training instances for this fold");
                    const int cls = detail::majority_class(train_labels, num_classes);
                    std::fill(predicted.begin(), predicted.end(), cls);
                } else if (is_lstm) {
                    std::vector<Sequence> train_seqs;
                    train_seqs.reserve(train_local.size());
                    for (std::size_t n : train_local) train_seqs.push_back(seqs[n]);
                    LstmConfig cfg = learner.lstm;
                    cfg.seed = substream_seed(
                        opt.seed, "lstm:" + job.term + ":" + std::to_string(fold));
                    LstmTrainResult tr =
                        train_lstm_classifier(train_seqs, train_labels, num_classes, cfg);
                    for (std::size_t t = 0; t < test_local.size(); ++t)
                        predicted[t] = lstm_predict(tr.params, seqs[test_local[t]]);
                } else {
                    std::vector<SparseFeatures> train_rows;
                    train_rows.reserve(train_local.size());
                    for (std::size_t n : train_local) train_rows.push_back(feats[n]);
                    FeatureSpace space = FeatureSpace::build(train_rows);
                    TrainingMatrix tm =
                        make_training_matrix(space, train_rows, train_labels, num_classes);
                    if (opt.fold_hook) {
                        std::vector<std::size_t> train_ds, test_ds;
                        for (std::size_t n : train_local) train_ds.push_back(job.instances[n]);
                        for (std::size_t n : test_local) test_ds.push_back(job.instances[n]);
                        opt.fold_hook({job.term, fold, space, tm, train_ds, test_ds});
                    }
                    auto predict_rows = [&](auto&& model, auto&& predict) {
                        for (std::size_t t = 0; t < test_local.size(); ++t)
                            predicted[t] =
                                predict(model, space.vectorize(feats[test_local[t]]));
                    };
                    if (learner.kind == LearnerKind::nb) {
                        NbModel m = nb_train(tm);
                        predict_rows(m, [](const NbModel& mm, const Eigen::VectorXd& x) {
                            return nb_predict(mm, x);
                        });
                    } else if (learner.kind == LearnerKind::svm) {
                        SvmModel m = svm_train(tm, learner.svm_c, learner.svm_tol);
                        predict_rows(m, [](const SvmModel& mm, const Eigen::VectorXd& x) {
                            return svm_predict(mm, x);
                        });
                    } else {
                        KnnModel m = knn_train(tm, learner.knn_k);
                        predict_rows(m, [](const KnnModel& mm, const Eigen::VectorXd& x) {
                            return knn_predict(mm, x);
                        });
                    }
                }

                for (std::size_t t = 0; t < test_local.size(); ++t) {
                    const std::size_t n = test_local[t];
                    out.predictions.push_back(
                        {job.term, fold, job.instances[n], label[n], predicted[t]});
                    out.total += 1;
                    if (predicted[t] == label[n]) out.correct += 1;
                }
            } catch (...) {
                detail::rethrow_with_context(job.term, fold);
            }
        }
        if (out.total == 0) throw DataError("term '" + job.term + "': no test predictions");
        return out;
    };

    // term-level parallel map; slot order (and thus the report) is fixed by
    // the sorted term map, not by scheduling
    std::vector<const detail::TermJob*> job_list;
    job_list.reserve(jobs.size());
    for (const auto& [term, job] : jobs) job_list.push_back(&job);
    std::vector<detail::TermOutcome> outcomes(job_list.size());
    std::vector<std::exception_ptr> errors(job_list.size());
    const int workers =
        std::max(1, std::min(opt.workers, static_cast<int>(job_list.size())));
    if (workers <= 1) {
        for (std::size_t j = 0; j < job_list.size(); ++j) outcomes[j] = run_term(*job_list[j]);
    } else {
        std::atomic<std::size_t> next{0};
        auto work = [&]() {
            for (;;) {
                const std::size_t j = next.fetch_add(1);
                if (j >= job_list.size()) return;
                try {
                    outcomes[j] = run_term(*job_list[j]);
                } catch (...) {
                    errors[j] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);  // first failing term in term order
    }

    std::string fingerprint = "features=" + features.name() + " learner=" + learner.name() +
                              " folds=" + std::to_string(folds.n_folds) +
                              " fold-seed=" + std::to_string(folds.seed) +
                              " seed=" + std::to_string(opt.seed);
    if (features.embeddings) {
        fingerprint += " embeddings-d=" + std::to_string(features.embeddings->meta.d) +
                       " embeddings-seed=" + std::to_string(features.embeddings->meta.seed);
    }
    if (is_lstm)
        fingerprint += " lstm-epochs=" + std::to_string(learner.lstm.epochs) +
                       " lstm-window=" + std::to_string(learner.lstm_window);

    std::vector<PredictionRecord> all;
    long long check_correct = 0, check_total = 0;
    for (detail::TermOutcome& o : outcomes) {
        check_correct += o.correct;
        check_total += o.total;
        for (PredictionRecord& p : o.predictions) all.push_back(std::move(p));
    }
    EvalReport report = assemble_report(d, std::move(all), std::move(fingerprint), opt.seed);

    // accounting cross-check: the assembled report must agree with the
    // fold-level counters and with a direct recount of the prediction log
    long long recount_correct = 0;
    double macro_recount = 0.0;
    {
        std::map<std::string, std::pair<long long, long long>> per_term;
        for (const PredictionRecord& p : report.predictions) {
            auto& [c, t] = per_term[p.term];
            t += 1;
            if (p.gold == p.predicted) {
                c += 1;
                recount_correct += 1;
            }
        }
        for (const auto& [term, ct] : per_term)
            macro_recount += static_cast<double>(ct.first) / static_cast<double>(ct.second);
        macro_recount /= static_cast<double>(per_term.size());
    }
    const double micro_recount =
        check_total == 0 ? 0.0
                         : static_cast<double>(recount_correct) / static_cast<double>(check_total);
    if (recount_correct != check_correct ||
        static_cast<long long>(report.predictions.size()) != check_total ||
        std::abs(report.macro - macro_recount) > 1e-12 ||
        std::abs(report.micro - micro_recount) > 1e-12)
        throw NumericError("report accounting mismatch against prediction recount");
    return report;
}

}  // namespace wsd
