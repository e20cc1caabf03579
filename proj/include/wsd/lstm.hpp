#pragma once

// Peephole LSTM sequence classifier: gates with element-wise (diagonal)
// peephole connections, hidden outputs averaged over the context, a linear
// decision layer, multi-class hinge loss, and AdaGrad updates. Includes a
// sequence-to-sequence autoencoder whose encoder weights can seed training.
//
// Cell equations, with x the input, h/c the previous hidden and cell state:
//   i  = sigmoid(W_xi x + W_hi h + w_ci . c + b_i)
//   f  = sigmoid(W_xf x + W_hf h + w_cf . c + b_f)
//   c' = f . c + i . tanh(W_xc x + W_hc h + b_c)
//   o  = sigmoid(W_xo x + W_ho h + w_co . c' + b_o)
//   h' = o . tanh(c')
// where . is the element-wise product. The input and forget gates peek at the
// previous cell state, the output gate at the updated one.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wsd/binio.hpp"
#include "wsd/errors.hpp"
#include "wsd/rng.hpp"

namespace wsd {

using Sequence = std::vector<Eigen::VectorXd>;

// ---- parameters ------------------------------------------------------------

struct LstmParams {
    int d = 0;  // cell size, equal to the input vector size
    int k = 0;  // number of output classes (0 for a bare encoder)

    Eigen::MatrixXd w_xi, w_xf, w_xc, w_xo;  // d x d input weights
    Eigen::MatrixXd w_hi, w_hf, w_hc, w_ho;  // d x d recurrent weights
    Eigen::VectorXd w_ci, w_cf, w_co;        // d peephole vectors
    Eigen::VectorXd b_i, b_f, b_c, b_o;      // d biases
    Eigen::MatrixXd w_out;                   // k x d decision layer
    Eigen::VectorXd b_out;                   // k

    static LstmParams zeros(int d, int k) {
        LstmParams p;
        p.d = d;
        p.k = k;
        for (Eigen::MatrixXd* m : {&p.w_xi, &p.w_xf, &p.w_xc, &p.w_xo, &p.w_hi, &p.w_hf,
                                   &p.w_hc, &p.w_ho})
            *m = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::VectorXd* v : {&p.w_ci, &p.w_cf, &p.w_co, &p.b_i, &p.b_f, &p.b_c, &p.b_o})
            *v = Eigen::VectorXd::Zero(d);
        p.w_out = Eigen::MatrixXd::Zero(k, d);
        p.b_out = Eigen::VectorXd::Zero(k);
        return p;
    }

    // Uniform init over [-range, range]; coefficients are drawn in the fixed
    // visit order so two runs with the same seed build identical models.
    static LstmParams random_init(int d, int k, Rng& rng, double range = 0.08) {
        LstmParams p = zeros(d, k);
        p.visit([&](auto& m) {
            double* ptr = m.data();
            for (Eigen::Index n = 0; n < m.size(); ++n) ptr[n] = rng.uniform(-range, range);
        });
        return p;
    }

    // every parameter block in a fixed order
    template <class F>
    void visit(F&& f) {
        f(w_xi), f(w_xf), f(w_xc), f(w_xo);
        f(w_hi), f(w_hf), f(w_hc), f(w_ho);
        f(w_ci), f(w_cf), f(w_co);
        f(b_i), f(b_f), f(b_c), f(b_o);
        f(w_out), f(b_out);
    }
    template <class F>
    void visit(F&& f) const {
        const_cast<LstmParams*>(this)->visit([&](auto& m) { f(std::as_const(m)); });
    }

    std::int64_t param_count() const {
        return 8ll * d * d + 7ll * d + static_cast<std::int64_t>(k) * (d + 1);
    }

    // Cheap fingerprint of the current values, used to detect stale caches.
    std::uint64_t signature() const {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
        auto mix = [&h](const void* ptr, std::size_t bytes) {
            const unsigned char* b = static_cast<const unsigned char*>(ptr);
            for (std::size_t i = 0; i < bytes; ++i) {
                h ^= b[i];
                h *= 1099511628211ull;
            }
        };
        mix(&d, sizeof(d));
        mix(&k, sizeof(k));
        visit([&](const auto& m) {
            mix(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
        });
        return h;
    }
};

// Applies f to corresponding fields of two or three parameter sets, which
// must share shapes (same d and k).
template <class F>
void lstm_visit2(LstmParams& a, const LstmParams& b, F&& f) {
    f(a.w_xi, b.w_xi), f(a.w_xf, b.w_xf), f(a.w_xc, b.w_xc), f(a.w_xo, b.w_xo);
    f(a.w_hi, b.w_hi), f(a.w_hf, b.w_hf), f(a.w_hc, b.w_hc), f(a.w_ho, b.w_ho);
    f(a.w_ci, b.w_ci), f(a.w_cf, b.w_cf), f(a.w_co, b.w_co);
    f(a.b_i, b.b_i), f(a.b_f, b.b_f), f(a.b_c, b.b_c), f(a.b_o, b.b_o);
    f(a.w_out, b.w_out), f(a.b_out, b.b_out);
}

template <class F>
void lstm_visit3(LstmParams& a, const LstmParams& b, LstmParams& c, F&& f) {
    f(a.w_xi, b.w_xi, c.w_xi), f(a.w_xf, b.w_xf, c.w_xf);
    f(a.w_xc, b.w_xc, c.w_xc), f(a.w_xo, b.w_xo, c.w_xo);
    f(a.w_hi, b.w_hi, c.w_hi), f(a.w_hf, b.w_hf, c.w_hf);
    f(a.w_hc, b.w_hc, c.w_hc), f(a.w_ho, b.w_ho, c.w_ho);
    f(a.w_ci, b.w_ci, c.w_ci), f(a.w_cf, b.w_cf, c.w_cf), f(a.w_co, b.w_co, c.w_co);
    f(a.b_i, b.b_i, c.b_i), f(a.b_f, b.b_f, c.b_f), f(a.b_c, b.b_c, c.b_c),
        f(a.b_o, b.b_o, c.b_o);
    f(a.w_out, b.w_out, c.w_out), f(a.b_out, b.b_out, c.b_out);
}

inline bool lstm_params_equal(const LstmParams& a, const LstmParams& b) {
    if (a.d != b.d || a.k != b.k) return false;
    bool equal = true;
    lstm_visit2(const_cast<LstmParams&>(a), b, [&](const auto& ma, const auto& mb) {
        if (ma.rows() != mb.rows() || ma.cols() != mb.cols() || !(ma == mb)) equal = false;
    });
    return equal;
}

// ---- cell ------------------------------------------------------------------

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

inline LstmState lstm_zero_state(int d) {
    return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
}

namespace detail {

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

struct StepCache {
    Eigen::VectorXd x, h_prev, c_prev;
    Eigen::ArrayXd i, f, g, o;  // gate activations and tanh'd cell candidate
    Eigen::VectorXd c;          // updated cell
    Eigen::ArrayXd tanh_c;
};

inline LstmState cell_step_cached(const LstmParams& p, const LstmState& s,
                                  const Eigen::VectorXd& x, StepCache& cache) {
    if (x.size() != p.d || s.h.size() != p.d || s.c.size() != p.d)
        throw UsageError("LSTM cell input dimension mismatch");
    const Eigen::ArrayXd cp = s.c.array();
    cache.x = x;
    cache.h_prev = s.h;
    cache.c_prev = s.c;
    cache.i = sigmoid((p.w_xi * x + p.w_hi * s.h + p.b_i).array() + p.w_ci.array() * cp);
    cache.f = sigmoid((p.w_xf * x + p.w_hf * s.h + p.b_f).array() + p.w_cf.array() * cp);
    cache.g = (p.w_xc * x + p.w_hc * s.h + p.b_c).array().tanh();
    Eigen::ArrayXd c_new = cache.f * cp + cache.i * cache.g;
    cache.c = c_new.matrix();
    cache.o = sigmoid((p.w_xo * x + p.w_ho * s.h + p.b_o).array() + p.w_co.array() * c_new);
    cache.tanh_c = c_new.tanh();
    return {(cache.o * cache.tanh_c).matrix(), cache.c};
}

struct BpttResult {
    LstmParams grads;          // same shapes as the parameters
    Eigen::VectorXd dh0, dc0;  // gradient w.r.t. the state fed into step 0
};

// Backpropagation through time over cached steps. dh_steps[t] is the direct
// gradient reaching h_t from outside the recurrence (the caller folds any
// gradient on the final hidden state into dh_steps.back()); dc_final seeds
// the cell path. Peepholes route w_ci and w_cf through c_{t-1} and w_co
// through c_t.
inline BpttResult bptt(const LstmParams& p, const std::vector<StepCache>& steps,
                       const std::vector<Eigen::VectorXd>& dh_steps,
                       const Eigen::VectorXd& dc_final) {
    BpttResult out;
    out.grads = LstmParams::zeros(p.d, p.k);
    Eigen::ArrayXd dh_carry = Eigen::ArrayXd::Zero(p.d);
    Eigen::ArrayXd dc_carry = dc_final.array();
    for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
        const StepCache& s = steps[static_cast<std::size_t>(t)];
        Eigen::ArrayXd dh = dh_carry + dh_steps[static_cast<std::size_t>(t)].array();
        Eigen::ArrayXd dz_o = dh * s.tanh_c * s.o * (1.0 - s.o);
        Eigen::ArrayXd dc =
            dh * s.o * (1.0 - s.tanh_c.square()) + dc_carry + p.w_co.array() * dz_o;
        Eigen::ArrayXd dz_f = dc * s.c_prev.array() * s.f * (1.0 - s.f);
        Eigen::ArrayXd dz_i = dc * s.g * s.i * (1.0 - s.i);
        Eigen::ArrayXd dz_g = dc * s.i * (1.0 - s.g.square());

        out.grads.w_xi += dz_i.matrix() * s.x.transpose();
        out.grads.w_xf += dz_f.matrix() * s.x.transpose();
        out.grads.w_xc += dz_g.matrix() * s.x.transpose();
        out.grads.w_xo += dz_o.matrix() * s.x.transpose();
        out.grads.w_hi += dz_i.matrix() * s.h_prev.transpose();
        out.grads.w_hf += dz_f.matrix() * s.h_prev.transpose();
        out.grads.w_hc += dz_g.matrix() * s.h_prev.transpose();
        out.grads.w_ho += dz_o.matrix() * s.h_prev.transpose();
        out.grads.w_ci += (dz_i * s.c_prev.array()).matrix();
        out.grads.w_cf += (dz_f * s.c_prev.array()).matrix();
        out.grads.w_co += (dz_o * s.c.array()).matrix();
        out.grads.b_i += dz_i.matrix();
        out.grads.b_f += dz_f.matrix();
        out.grads.b_c += dz_g.matrix();
        out.grads.b_o += dz_o.matrix();

        dh_carry = (p.w_hi.transpose() * dz_i.matrix() + p.w_hf.transpose() * dz_f.matrix() +
                    p.w_hc.transpose() * dz_g.matrix() + p.w_ho.transpose() * dz_o.matrix())
                       .array();
        dc_carry = dc * s.f + p.w_ci.array() * dz_i + p.w_cf.array() * dz_f;
    }
    out.dh0 = dh_carry.matrix();
    out.dc0 = dc_carry.matrix();
    return out;
}

}  // namespace detail

inline LstmState cell_step(const LstmParams& p, const LstmState& s, const Eigen::VectorXd& x) {
    detail::StepCache scratch;
    return detail::cell_step_cached(p, s, x, scratch);
}

// ---- forward / loss / backward -----------------------------------------------

struct LstmCache {
    std::vector<detail::StepCache> steps;
    Eigen::VectorXd mean_h;
    std::uint64_t param_sig = 0;
};

struct LstmForward {
    Eigen::VectorXd scores;
    LstmCache cache;
};

// Runs the cell over the context from a zero state, averages the hidden
// outputs, and applies the decision layer: scores = W_out mean_t(h_t) + b_out.
inline LstmForward forward(const LstmParams& p, const Sequence& ctx) {
    if (ctx.empty()) throw DataError("LSTM forward needs a non-empty context");
    LstmForward out;
    out.cache.steps.resize(ctx.size());
    LstmState s = lstm_zero_state(p.d);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p.d);
    for (std::size_t t = 0; t < ctx.size(); ++t) {
        s = detail::cell_step_cached(p, s, ctx[t], out.cache.steps[t]);
        sum += s.h;
    }
    out.cache.mean_h = sum / static_cast<double>(ctx.size());
    out.cache.param_sig = p.signature();
    out.scores = p.w_out * out.cache.mean_h + p.b_out;
    return out;
}

struct MultiMarginLoss {
    double loss = 0.0;
    Eigen::VectorXd dscores;
};

// Multi-class hinge loss: mean over j != y of max(0, 1 - s_y + s_j).
// With average=false the plain sum is used instead of the mean.
inline MultiMarginLoss loss_multimargin(const Eigen::VectorXd& scores, int y,
                                        bool average = true) {
    const int k = static_cast<int>(scores.size());
    if (k < 2) throw UsageError("multi-margin loss needs at least two classes");
    if (y < 0 || y >= k) throw UsageError("multi-margin loss label out of range");
    MultiMarginLoss out;
    out.dscores = Eigen::VectorXd::Zero(k);
    const double scale = average ? 1.0 / k : 1.0;
    for (int j = 0; j < k; ++j) {
        if (j == y) continue;
        double margin = 1.0 - scores[y] + scores[j];
        if (margin > 0.0) {
            out.loss += scale * margin;
            out.dscores[j] += scale;
            out.dscores[y] -= scale;
        }
    }
    return out;
}

// Exact gradients of a scores-level objective w.r.t. every parameter, by
// backpropagation through time over the cached activations. The cache must
// come from forward() on the same parameter values.
inline LstmParams backward(const LstmParams& p, const LstmCache& cache,
                           const Eigen::VectorXd& dscores) {
    if (cache.param_sig != p.signature())
        throw UsageError("stale LSTM cache: parameters changed since forward");
    if (dscores.size() != p.k) throw UsageError("LSTM backward dscores size mismatch");
    const double t = static_cast<double>(cache.steps.size());
    Eigen::VectorXd dh_each = (p.w_out.transpose() * dscores) / t;
    std::vector<Eigen::VectorXd> dh_steps(cache.steps.size(), dh_each);
    detail::BpttResult res =
        detail::bptt(p, cache.steps, dh_steps, Eigen::VectorXd::Zero(p.d));
    res.grads.w_out = dscores * cache.mean_h.transpose();
    res.grads.b_out = dscores;
    return std::move(res.grads);
}

inline int lstm_predict(const LstmParams& p, const Sequence& ctx) {
    Eigen::VectorXd scores = forward(p, ctx).scores;
    int best = 0;
    for (int j = 1; j < p.k; ++j)
        if (scores[j] > scores[best]) best = j;
    return best;
}

// ---- AdaGrad -------------------------------------------------------------------

struct AdaGradState {
    double lr = 0.01;
    double decay = 0.01;
    double eps = 1e-10;
    long step = 0;   // updates already applied
    LstmParams acc;  // accumulated squared gradients, same shapes as the params

    static AdaGradState make(int d, int k, double lr = 0.01, double decay = 0.01) {
        AdaGradState a;
        a.lr = lr;
        a.decay = decay;
        a.acc = LstmParams::zeros(d, k);
        return a;
    }
};

// acc += g^2; theta -= lr/(1 + step*decay) * g / (sqrt(acc) + eps), with one
// shared step counter for all parameters. The counter reflects updates already
// applied, so the first update runs at the undecayed learning rate.
inline void adagrad_update(LstmParams& p, const LstmParams& g, AdaGradState& a) {
    if (p.d != g.d || p.k != g.k || p.d != a.acc.d || p.k != a.acc.k)
        throw UsageError("AdaGrad shape mismatch");
    const double lr_t = a.lr / (1.0 + static_cast<double>(a.step) * a.decay);
    lstm_visit3(p, g, a.acc, [&](auto& theta, const auto& grad, auto& acc) {
        acc.array() += grad.array().square();
        theta.array() -= lr_t * grad.array() / (acc.array().sqrt() + a.eps);
    });
    a.step += 1;
}

// ---- training --------------------------------------------------------------------

struct LstmConfig {
    int epochs = 30;
    double lr = 0.01;
    double decay = 0.01;
    std::uint64_t seed = 0;
    double init_range = 0.08;
    bool sum_hinge = false;  // use the summed hinge instead of the mean
};

struct LstmTrainResult {
    LstmParams params;
    std::vector<double> epoch_losses;  // mean loss per epoch, in order
};

// Trains a k-class peephole LSTM classifier on embedded context sequences.
// Visits instances in a freshly shuffled order each epoch and applies one
// AdaGrad update per instance. If init_cell is given, its cell weights seed
// the model (the decision layer is still randomly initialized); it must have
// a matching cell size.
inline LstmTrainResult train_lstm_classifier(const std::vector<Sequence>& seqs,
                                             const std::vector<int>& labels, int k,
                                             const LstmConfig& cfg = {},
                                             const LstmParams* init_cell = nullptr) {
    if (seqs.size() != labels.size()) throw UsageError("sequence and label counts differ");
    if (k < 2) throw UsageError("need at least two classes");
    if (seqs.empty()) throw DataError("no training sequences");
    const int d =
        static_cast<int>(seqs.front().empty() ? 0 : seqs.front().front().size());
    if (d <= 0) throw DataError("LSTM training needs non-empty contexts");
    std::vector<int> per_class(static_cast<std::size_t>(k), 0);
    for (std::size_t n = 0; n < seqs.size(); ++n) {
        if (labels[n] < 0 || labels[n] >= k) throw DataError("label out of range");
        if (seqs[n].empty()) throw DataError("LSTM training needs non-empty contexts");
        for (const Eigen::VectorXd& x : seqs[n])
            if (x.size() != d) throw DataError("inconsistent embedding size in contexts");
        per_class[static_cast<std::size_t>(labels[n])] += 1;
    }
    for (int j = 0; j < k; ++j)
        if (per_class[static_cast<std::size_t>(j)] == 0)
            throw DataError("a sense has no training instances");

    Rng rng(substream_seed(cfg.seed, "lstm-train"));
    LstmTrainResult out;
    out.params = LstmParams::random_init(d, k, rng, cfg.init_range);
    if (init_cell) {
        if (init_cell->d != d) throw UsageError("pretrained cell size mismatch");
        const LstmParams& enc = *init_cell;
        LstmParams& p = out.params;
        p.w_xi = enc.w_xi, p.w_xf = enc.w_xf, p.w_xc = enc.w_xc, p.w_xo = enc.w_xo;
        p.w_hi = enc.w_hi, p.w_hf = enc.w_hf, p.w_hc = enc.w_hc, p.w_ho = enc.w_ho;
        p.w_ci = enc.w_ci, p.w_cf = enc.w_cf, p.w_co = enc.w_co;
        p.b_i = enc.b_i, p.b_f = enc.b_f, p.b_c = enc.b_c, p.b_o = enc.b_o;
    }
    AdaGradState ada = AdaGradState::make(d, k, cfg.lr, cfg.decay);

    std::vector<std::size_t> order(seqs.size());
    for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
    out.epoch_losses.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t n : order) {
            LstmForward fwd = forward(out.params, seqs[n]);
            MultiMarginLoss ml = loss_multimargin(fwd.scores, labels[n], !cfg.sum_hinge);
            loss_sum += ml.loss;
            if (ml.loss == 0.0) continue;  // every margin satisfied, zero gradient
            LstmParams grads = backward(out.params, fwd.cache, ml.dscores);
            adagrad_update(out.params, grads, ada);
        }
        out.epoch_losses.push_back(loss_sum / static_cast<double>(seqs.size()));
    }
    return out;
}

// ---- autoencoder pretraining -------------------------------------------------------

struct AutoencoderResult {
    LstmParams encoder;                // k = 0, cell weights only
    std::vector<double> epoch_losses;  // mean reconstruction loss per epoch
};

// Sequence autoencoder. The encoder consumes the context; the decoder starts
// from the encoder's final state and reconstructs the inputs under teacher
// forcing (its input at step t is the true x_{t-1}, a zero vector at the first
// step). The decoder's linear head maps hidden states back to input space and
// the loss is (1/2T) sum_t |xhat_t - x_t|^2. Returns the trained encoder for
// use as a classifier warm start.
inline AutoencoderResult pretrain_autoencoder(const std::vector<Sequence>& seqs,
                                              const LstmConfig& cfg = {}) {
    if (seqs.empty()) throw DataError("no pretraining sequences");
    const int d =
        static_cast<int>(seqs.front().empty() ? 0 : seqs.front().front().size());
    if (d <= 0) throw DataError("autoencoder needs non-empty contexts");
    for (const Sequence& s : seqs) {
        if (s.empty()) throw DataError("autoencoder needs non-empty contexts");
        for (const Eigen::VectorXd& x : s)
            if (x.size() != d) throw DataError("inconsistent embedding size in contexts");
    }

    Rng rng(substream_seed(cfg.seed, "lstm-pretrain"));
    AutoencoderResult out;
    out.encoder = LstmParams::random_init(d, 0, rng, cfg.init_range);
    // decoder: same cell size plus a d x d reconstruction head living in w_out
    LstmParams decoder = LstmParams::random_init(d, d, rng, cfg.init_range);
    AdaGradState ada_enc = AdaGradState::make(d, 0, cfg.lr, cfg.decay);
    AdaGradState ada_dec = AdaGradState::make(d, d, cfg.lr, cfg.decay);
    const Eigen::VectorXd start_token = Eigen::VectorXd::Zero(d);

    std::vector<std::size_t> order(seqs.size());
    for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
    out.epoch_losses.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t n : order) {
            const Sequence& xs = seqs[n];
            const std::size_t t_len = xs.size();
            const double inv_2t = 0.5 / static_cast<double>(t_len);

            // encoder pass
            std::vector<detail::StepCache> enc_steps(t_len);
            LstmState s = lstm_zero_state(d);
            for (std::size_t t = 0; t < t_len; ++t)
                s = detail::cell_step_cached(out.encoder, s, xs[t], enc_steps[t]);

            // decoder pass, reconstructing each x_t
            std::vector<detail::StepCache> dec_steps(t_len);
            std::vector<Eigen::VectorXd> dh_dec(t_len);
            std::vector<Eigen::VectorXd> dxhat(t_len);
            LstmParams dec_grads = LstmParams::zeros(d, d);
            LstmState ds = s;
            double loss = 0.0;
            for (std::size_t t = 0; t < t_len; ++t) {
                const Eigen::VectorXd& input = t == 0 ? start_token : xs[t - 1];
                ds = detail::cell_step_cached(decoder, ds, input, dec_steps[t]);
                Eigen::VectorXd err = decoder.w_out * ds.h + decoder.b_out - xs[t];
                loss += inv_2t * err.squaredNorm();
                dxhat[t] = err * (2.0 * inv_2t);
                dh_dec[t] = decoder.w_out.transpose() * dxhat[t];
                dec_grads.w_out += dxhat[t] * ds.h.transpose();
                dec_grads.b_out += dxhat[t];
            }
            loss_sum += loss;

            // decoder backward; its dh0/dc0 are the gradients w.r.t. the
            // encoder's final state
            detail::BpttResult dec_res =
                detail::bptt(decoder, dec_steps, dh_dec, Eigen::VectorXd::Zero(d));
            dec_res.grads.w_out += dec_grads.w_out;
            dec_res.grads.b_out += dec_grads.b_out;

            std::vector<Eigen::VectorXd> dh_enc(t_len, Eigen::VectorXd::Zero(d));
            dh_enc.back() = dec_res.dh0;
            detail::BpttResult enc_res =
                detail::bptt(out.encoder, enc_steps, dh_enc, dec_res.dc0);

            adagrad_update(decoder, dec_res.grads, ada_dec);
            adagrad_update(out.encoder, enc_res.grads, ada_enc);
        }
        out.epoch_losses.push_back(loss_sum / static_cast<double>(seqs.size()));
    }
    return out;
}

// ---- checkpointing ------------------------------------------------------------------

inline constexpr char kLstmMagic[] = "WSDLST1\n";

struct LstmCheckpoint {
    LstmParams params;
    LstmConfig cfg;
};

inline void save_lstm(const std::filesystem::path& path, const LstmCheckpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out.write(kLstmMagic, 8);
    detail::put<std::uint32_t>(out, 1);  // format version
    detail::put<std::int32_t>(out, ckpt.params.d);
    detail::put<std::int32_t>(out, ckpt.params.k);
    detail::put<std::int32_t>(out, ckpt.cfg.epochs);
    detail::put<double>(out, ckpt.cfg.lr);
    detail::put<double>(out, ckpt.cfg.decay);
    detail::put<std::uint64_t>(out, ckpt.cfg.seed);
    detail::put<double>(out, ckpt.cfg.init_range);
    detail::put<std::uint8_t>(out, ckpt.cfg.sum_hinge ? 1 : 0);
    ckpt.params.visit([&](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Eigen::MatrixXd>)
            detail::put_mat(out, m);
        else
            detail::put_vec(out, m);
    });
    if (!out) throw DataError("write failed: " + path.string());
}

inline LstmCheckpoint load_lstm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != kLstmMagic)
        throw DataError("not an LSTM checkpoint: " + path.string());
    if (detail::get<std::uint32_t>(in) != 1)
        throw DataError("unsupported LSTM checkpoint version");
    LstmCheckpoint ckpt;
    const int d = detail::get<std::int32_t>(in);
    const int k = detail::get<std::int32_t>(in);
    if (d < 1 || k < 0) throw DataError("corrupt LSTM checkpoint header");
    ckpt.cfg.epochs = detail::get<std::int32_t>(in);
    ckpt.cfg.lr = detail::get<double>(in);
    ckpt.cfg.decay = detail::get<double>(in);
    ckpt.cfg.seed = detail::get<std::uint64_t>(in);
    ckpt.cfg.init_range = detail::get<double>(in);
    ckpt.cfg.sum_hinge = detail::get<std::uint8_t>(in) != 0;
    ckpt.params = LstmParams::zeros(d, k);
    ckpt.params.visit([&](auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Eigen::MatrixXd>)
            m = detail::get_mat(in);
        else
            m = detail::get_vec(in);
    });
    bool shape_ok = true;
    LstmParams expect = LstmParams::zeros(d, k);
    lstm_visit2(ckpt.params, expect, [&](const auto& got, const auto& want) {
        if (got.rows() != want.rows() || got.cols() != want.cols()) shape_ok = false;
    });
    if (!shape_ok) throw DataError("corrupt LSTM checkpoint: field shape mismatch");
    return ckpt;
}

}  // namespace wsd
