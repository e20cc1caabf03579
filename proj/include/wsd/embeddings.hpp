#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "wsd/binio.hpp"
#include "wsd/errors.hpp"
#include "wsd/rng.hpp"

namespace wsd {

using DenseVector = Eigen::VectorXd;

struct EmbeddingMeta {
    int d = 100;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    int min_count = 5;
    std::uint64_t seed = 1;
    double alpha = 0.025;     // initial learning rate, linearly decayed
    double subsample = 0.0;   // frequent-word subsampling threshold, 0 = off
    bool dynamic_window = true;
    std::uint64_t train_tokens = 0;  // in-vocab tokens per epoch, filled by training

    bool operator==(const EmbeddingMeta&) const = default;
};

class EmbeddingModel {
  public:
    std::vector<std::string> vocab;     // descending frequency, ties lexicographic
    std::vector<std::uint64_t> counts;  // aligned with vocab
    std::vector<float> vectors;         // row-major |V| x d
    EmbeddingMeta meta;
    std::vector<double> epoch_losses;   // mean training loss per epoch (not serialized)

    void rebuild_index() {
        index_.clear();
        index_.reserve(vocab.size());
        for (std::size_t i = 0; i < vocab.size(); ++i) index_[vocab[i]] = static_cast<int>(i);
    }

    int word_index(const std::string& w) const {
        auto it = index_.find(w);
        return it == index_.end() ? -1 : it->second;
    }

    const float* row(int i) const {
        return vectors.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(meta.d);
    }

    bool operator==(const EmbeddingModel& o) const {
        return vocab == o.vocab && counts == o.counts && vectors == o.vectors && meta == o.meta;
    }

  private:
    std::unordered_map<std::string, int> index_;
};

inline std::optional<DenseVector> lookup(const EmbeddingModel& m, const std::string& word) {
    int i = m.word_index(word);
    if (i < 0) return std::nullopt;
    DenseVector v(m.meta.d);
    const float* r = m.row(i);
    for (int k = 0; k < m.meta.d; ++k) v[k] = r[k];
    return v;
}

struct Aggregate {
    DenseVector v;
    int in_vocab = 0;  // number of context words that were in the vocabulary

    bool all_oov() const { return in_vocab == 0; }
};

// Sum of the vectors of all in-vocab context words; OOV words are skipped.
// An all-OOV context yields the zero vector with in_vocab == 0.
inline Aggregate aggregate_sum(const EmbeddingModel& m, const std::vector<std::string>& context) {
    Aggregate agg;
    agg.v = DenseVector::Zero(m.meta.d);
    for (const std::string& w : context) {
        int i = m.word_index(w);
        if (i < 0) continue;
        const float* r = m.row(i);
        for (int k = 0; k < m.meta.d; ++k) agg.v[k] += r[k];
        ++agg.in_vocab;
    }
    return agg;
}

// Average = sum / (in-vocab count), computed literally from the sum so the
// identity avg == sum / n holds exactly.
inline Aggregate aggregate_avg(const EmbeddingModel& m, const std::vector<std::string>& context) {
    Aggregate agg = aggregate_sum(m, context);
    if (agg.in_vocab > 0) agg.v /= static_cast<double>(agg.in_vocab);
    return agg;
}

// One CBOW/negative-sampling gradient step: the averaged context vector is
// scored against the target's output vector (label 1) and each negative
// (label 0); logistic-loss gradients update the output vectors and, through
// the average, every context input vector. Returns the sampled loss.
inline double cbow_step(std::vector<float>& syn0, std::vector<float>& syn1, int d,
                        std::span<const int> context, int target,
                        std::span<const int> negatives, double lr) {
    std::vector<double> neu1(static_cast<std::size_t>(d), 0.0);
    std::vector<double> neu1e(static_cast<std::size_t>(d), 0.0);
    for (int c : context) {
        const float* r = syn0.data() + static_cast<std::size_t>(c) * d;
        for (int k = 0; k < d; ++k) neu1[k] += r[k];
    }
    const double inv = 1.0 / static_cast<double>(context.size());
    for (int k = 0; k < d; ++k) neu1[k] *= inv;

    double loss = 0.0;
    auto update = [&](int word, double label) {
        float* out = syn1.data() + static_cast<std::size_t>(word) * d;
        double f = 0.0;
        for (int k = 0; k < d; ++k) f += neu1[k] * out[k];
        double sig = 1.0 / (1.0 + std::exp(-f));
        double g = (label - sig) * lr;
        loss -= label > 0.5 ? std::log(sig + 1e-12) : std::log(1.0 - sig + 1e-12);
        for (int k = 0; k < d; ++k) {
            neu1e[k] += g * out[k];
            out[k] = static_cast<float>(out[k] + g * neu1[k]);
        }
    };
    update(target, 1.0);
    for (int n : negatives) update(n, 0.0);

    for (int c : context) {
        float* r = syn0.data() + static_cast<std::size_t>(c) * d;
        for (int k = 0; k < d; ++k) r[k] = static_cast<float>(r[k] + neu1e[k]);
    }
    return loss;
}

namespace detail {

// cumulative unigram^0.75 noise distribution, sampled by binary search
struct NoiseTable {
    std::vector<double> cum;

    explicit NoiseTable(const std::vector<std::uint64_t>& counts) {
        cum.resize(counts.size());
        double running = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            running += std::pow(static_cast<double>(counts[i]), 0.75);
            cum[i] = running;
        }
    }

    int sample(Rng& rng) const {
        double u = rng.uniform() * cum.back();
        auto it = std::lower_bound(cum.begin(), cum.end(), u);
        if (it == cum.end()) --it;
        return static_cast<int>(it - cum.begin());
    }
};

}  // namespace detail

using Docs = std::vector<std::vector<std::string>>;

// CBOW with negative sampling. Deterministic when threads == 1; with more
// threads the document shards race on the shared weight arrays (lock-free by
// design) and results vary run to run.
inline EmbeddingModel train_cbow(const Docs& docs, const EmbeddingMeta& cfg, int threads = 1) {
    if (cfg.d < 1) throw UsageError("embedding dimension must be >= 1");
    if (cfg.window < 1) throw UsageError("window must be >= 1");
    if (cfg.negatives < 0) throw UsageError("negatives must be >= 0");
    if (cfg.epochs < 1) throw UsageError("epochs must be >= 1");
    if (docs.empty()) throw DataError("empty corpus");

    EmbeddingModel m;
    m.meta = cfg;

    std::unordered_map<std::string, std::uint64_t> freq;
    for (const auto& doc : docs)
        for (const auto& w : doc) ++freq[w];
    for (const auto& [w, c] : freq)
        if (c >= static_cast<std::uint64_t>(cfg.min_count)) m.vocab.push_back(w);
    if (m.vocab.empty()) throw DataError("empty vocabulary after min-count filtering");
    std::sort(m.vocab.begin(), m.vocab.end(), [&](const std::string& a, const std::string& b) {
        std::uint64_t ca = freq[a], cb = freq[b];
        return ca != cb ? ca > cb : a < b;
    });
    m.counts.reserve(m.vocab.size());
    for (const auto& w : m.vocab) m.counts.push_back(freq[w]);
    m.rebuild_index();

    const int d = cfg.d;
    const std::size_t V = m.vocab.size();
    m.vectors.assign(V * static_cast<std::size_t>(d), 0.0f);
    std::vector<float> syn1(V * static_cast<std::size_t>(d), 0.0f);

    Rng root(cfg.seed);
    {
        Rng init = root.substream("init");
        for (std::size_t i = 0; i < m.vectors.size(); ++i)
            m.vectors[i] = static_cast<float>((init.uniform() - 0.5) / d);
    }

    // map documents to in-vocab word ids; OOV tokens are dropped up front
    std::vector<std::vector<int>> encoded;
    encoded.reserve(docs.size());
    std::uint64_t train_tokens = 0;
    for (const auto& doc : docs) {
        std::vector<int> ids;
        ids.reserve(doc.size());
        for (const auto& w : doc) {
            int i = m.word_index(w);
            if (i >= 0) ids.push_back(i);
        }
        train_tokens += ids.size();
        encoded.push_back(std::move(ids));
    }
    m.meta.train_tokens = train_tokens;
    if (train_tokens == 0) throw DataError("corpus has no in-vocab tokens");

    detail::NoiseTable noise(m.counts);
    const double total_positions =
        static_cast<double>(cfg.epochs) * static_cast<double>(train_tokens) + 1.0;

    threads = std::max(1, threads);
    m.epoch_losses.assign(static_cast<std::size_t>(cfg.epochs), 0.0);

    auto worker = [&](int tid, int n_threads, int epoch, double& loss_out,
                      std::uint64_t& positions_out) {
        Rng stream =
            root.substream("train/t" + std::to_string(tid) + "/e" + std::to_string(epoch));

        double loss = 0.0;
        std::uint64_t processed = 0, scored = 0;
        std::uint64_t base_processed =
            static_cast<std::uint64_t>(epoch) * (train_tokens / static_cast<std::uint64_t>(n_threads));
        std::vector<int> context;
        std::vector<int> negs;
        for (std::size_t di = static_cast<std::size_t>(tid); di < encoded.size();
             di += static_cast<std::size_t>(n_threads)) {
            const std::vector<int>& ids = encoded[di];
            for (std::size_t t = 0; t < ids.size(); ++t) {
                ++processed;
                double done = static_cast<double>(base_processed + processed) *
                              static_cast<double>(n_threads);
                double lr = cfg.alpha * (1.0 - done / total_positions);
                if (lr < cfg.alpha * 1e-4) lr = cfg.alpha * 1e-4;

                if (cfg.subsample > 0.0) {
                    double f = static_cast<double>(m.counts[ids[t]]) /
                               static_cast<double>(train_tokens);
                    double keep = (std::sqrt(f / cfg.subsample) + 1.0) * cfg.subsample / f;
                    if (keep < 1.0 && stream.uniform() >= keep) continue;
                }

                int shrink = cfg.dynamic_window
                                 ? static_cast<int>(stream.below(
                                       static_cast<std::uint64_t>(cfg.window)))
                                 : 0;
                int half = cfg.window - shrink;
                context.clear();
                for (int off = -half; off <= half; ++off) {
                    if (off == 0) continue;
                    std::int64_t p = static_cast<std::int64_t>(t) + off;
                    if (p < 0 || p >= static_cast<std::int64_t>(ids.size())) continue;
                    context.push_back(ids[static_cast<std::size_t>(p)]);
                }
                if (context.empty()) continue;

                negs.clear();
                for (int k = 0; k < cfg.negatives; ++k) {
                    int cand = noise.sample(stream);
                    if (cand == ids[t]) continue;  // skip, do not redraw
                    negs.push_back(cand);
                }
                loss += cbow_step(m.vectors, syn1, d, context, ids[t], negs, lr);
                ++scored;
            }
        }
        loss_out = loss;
        positions_out = scored;
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<double> losses(static_cast<std::size_t>(threads), 0.0);
        std::vector<std::uint64_t> position_counts(static_cast<std::size_t>(threads), 0);
        if (threads == 1) {
            worker(0, 1, epoch, losses[0], position_counts[0]);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back(worker, t, threads, epoch, std::ref(losses[t]),
                                  std::ref(position_counts[t]));
            for (auto& th : pool) th.join();
        }
        double total_loss = 0.0;
        std::uint64_t total_scored = 0;
        for (int t = 0; t < threads; ++t) {
            total_loss += losses[t];
            total_scored += position_counts[t];
        }
        m.epoch_losses[static_cast<std::size_t>(epoch)] =
            total_scored ? total_loss / static_cast<double>(total_scored) : 0.0;
    }
    return m;
}

// ---- serialization ---------------------------------------------------------

inline constexpr char kEmbeddingMagic[8] = {'W', 'S', 'D', 'E', 'M', 'B', '1', '\n'};

inline void save_model(const EmbeddingModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(kEmbeddingMagic, sizeof(kEmbeddingMagic));
    detail::put<std::uint32_t>(out, 1);
    detail::put<std::int32_t>(out, m.meta.d);
    detail::put<std::uint64_t>(out, m.vocab.size());
    detail::put<std::int32_t>(out, m.meta.window);
    detail::put<std::int32_t>(out, m.meta.negatives);
    detail::put<std::int32_t>(out, m.meta.epochs);
    detail::put<std::int32_t>(out, m.meta.min_count);
    detail::put<std::uint64_t>(out, m.meta.seed);
    detail::put<double>(out, m.meta.alpha);
    detail::put<double>(out, m.meta.subsample);
    detail::put<std::uint8_t>(out, m.meta.dynamic_window ? 1 : 0);
    detail::put<std::uint64_t>(out, m.meta.train_tokens);
    for (std::size_t i = 0; i < m.vocab.size(); ++i) {
        detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.vocab[i].size()));
        out.write(m.vocab[i].data(), static_cast<std::streamsize>(m.vocab[i].size()));
        detail::put<std::uint64_t>(out, m.counts[i]);
        out.write(reinterpret_cast<const char*>(m.row(static_cast<int>(i))),
                  static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(m.meta.d)));
    }
    if (!out) throw DataError("write failed: " + path.string());
}

inline EmbeddingModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kEmbeddingMagic, sizeof(magic)) != 0)
        throw DataError("not an embedding model file: " + path.string());
    if (detail::get<std::uint32_t>(in) != 1)
        throw DataError("unsupported embedding model version");
    EmbeddingModel m;
    m.meta.d = detail::get<std::int32_t>(in);
    std::uint64_t V = detail::get<std::uint64_t>(in);
    m.meta.window = detail::get<std::int32_t>(in);
    m.meta.negatives = detail::get<std::int32_t>(in);
    m.meta.epochs = detail::get<std::int32_t>(in);
    m.meta.min_count = detail::get<std::int32_t>(in);
    m.meta.seed = detail::get<std::uint64_t>(in);
    m.meta.alpha = detail::get<double>(in);
    m.meta.subsample = detail::get<double>(in);
    m.meta.dynamic_window = detail::get<std::uint8_t>(in) != 0;
    m.meta.train_tokens = detail::get<std::uint64_t>(in);
    if (m.meta.d < 1) throw DataError("corrupt embedding model: bad dimension");
    m.vocab.reserve(V);
    m.counts.reserve(V);
    m.vectors.resize(V * static_cast<std::size_t>(m.meta.d));
    for (std::uint64_t i = 0; i < V; ++i) {
        std::uint32_t len = detail::get<std::uint32_t>(in);
        std::string w(len, '\0');
        in.read(w.data(), len);
        m.vocab.push_back(std::move(w));
        m.counts.push_back(detail::get<std::uint64_t>(in));
        in.read(reinterpret_cast<char*>(m.vectors.data() +
                                        i * static_cast<std::uint64_t>(m.meta.d)),
                static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(m.meta.d)));
        if (!in) throw DataError("truncated embedding model file");
    }
    m.rebuild_index();
    return m;
}

// Text interop format: header "V d", then one "word v1 .. vd" line per word.
// Floats are printed shortest-round-trip, so reloading is value-exact.
inline void save_text(const EmbeddingModel& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << m.vocab.size() << ' ' << m.meta.d << '\n';
    char buf[64];
    for (std::size_t i = 0; i < m.vocab.size(); ++i) {
        out << m.vocab[i];
        const float* r = m.row(static_cast<int>(i));
        for (int k = 0; k < m.meta.d; ++k) {
            auto res = std::to_chars(buf, buf + sizeof(buf), r[k]);
            out << ' ';
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

inline EmbeddingModel load_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::size_t V = 0;
    int d = 0;
    in >> V >> d;
    if (!in || d < 1) throw DataError("bad text embedding header in " + path.string());
    EmbeddingModel m;
    m.meta.d = d;
    m.vocab.reserve(V);
    m.counts.assign(V, 0);
    m.vectors.resize(V * static_cast<std::size_t>(d));
    std::string w, tok;
    for (std::size_t i = 0; i < V; ++i) {
        if (!(in >> w)) throw DataError("truncated text embedding file");
        m.vocab.push_back(w);
        for (int k = 0; k < d; ++k) {
            if (!(in >> tok)) throw DataError("truncated text embedding file");
            float v = 0.0f;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc{})
                throw DataError("bad float in text embedding file: " + tok);
            m.vectors[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] = v;
        }
    }
    m.rebuild_index();
    return m;
}

}  // namespace wsd
