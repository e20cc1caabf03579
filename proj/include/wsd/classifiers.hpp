#pragma once

// Non-deep learners, one classifier per ambiguous term:
//   - Gaussian naive Bayes over dense feature vectors (floored variances)
//   - linear soft-margin SVM trained by sequential minimal optimization,
//     with per-feature min-max normalization and 1-vs-1 multiclass voting
//   - k-nearest-neighbours under cosine similarity (vectors normalized at fit)
// Sparse feature maps are materialized into an indexed dense space per
// training fold; feature names unseen at fit time are dropped at predict time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsd/binio.hpp"
#include "wsd/errors.hpp"
#include "wsd/features.hpp"
#include "wsd/rng.hpp"

namespace wsd {

// ---- feature space ----------------------------------------------------------

// Maps feature names to dense column indices. Built from training rows only;
// vectorize() silently drops names that were never seen at build time.
class FeatureSpace {
  public:
    static FeatureSpace build(const std::vector<SparseFeatures>& rows) {
        FeatureSpace space;
        std::map<std::string, int> index;
        for (const auto& row : rows)
            for (const auto& [name, value] : row) index.emplace(name, 0);
        int next = 0;
        for (auto& [name, col] : index) {
            col = next++;
            space.names_.push_back(name);
        }
        space.index_ = std::move(index);
        return space;
    }

    int dim() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

    int column(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    Eigen::VectorXd vectorize(const SparseFeatures& f) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim());
        for (const auto& [name, value] : f) {
            auto it = index_.find(name);
            if (it != index_.end()) v[it->second] = value;
        }
        return v;
    }

  private:
    std::map<std::string, int> index_;
    std::vector<std::string> names_;  // sorted, names_[col] == name
};

// ---- training matrix --------------------------------------------------------

struct TrainingMatrix {
    Eigen::MatrixXd x;   // n rows by dim() columns
    std::vector<int> y;  // sense indices in [0, num_classes)
    int num_classes = 0;

    int n() const { return static_cast<int>(x.rows()); }
    int dim() const { return static_cast<int>(x.cols()); }
};

inline TrainingMatrix make_training_matrix(const FeatureSpace& space,
                                           const std::vector<SparseFeatures>& rows,
                                           const std::vector<int>& labels, int num_classes) {
    if (rows.size() != labels.size())
        throw DataError("feature rows and labels differ in length");
    if (num_classes < 1) throw UsageError("num_classes must be at least 1");
    TrainingMatrix tm;
    tm.num_classes = num_classes;
    tm.x.resize(static_cast<Eigen::Index>(rows.size()), space.dim());
    tm.y = labels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes)
            throw DataError("label out of range at row " + std::to_string(i));
        tm.x.row(static_cast<Eigen::Index>(i)) = space.vectorize(rows[i]).transpose();
    }
    if (!tm.x.allFinite()) throw DataError("non-finite feature value in training matrix");
    return tm;
}

// ---- min-max normalization --------------------------------------------------

// Per-feature affine map to [0,1] fitted on training data. Constant features
// map to 0. Test-time values outside the training range are not clamped.
struct MinMaxScaler {
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    void fit(const Eigen::MatrixXd& x) {
        min = x.colwise().minCoeff();
        max = x.colwise().maxCoeff();
    }

    Eigen::VectorXd transform(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(v.size());
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            double range = max[k] - min[k];
            out[k] = range > 0.0 ? (v[k] - min[k]) / range : 0.0;
        }
        return out;
    }

    Eigen::MatrixXd transform_rows(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd out(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            out.row(i) = transform(x.row(i).transpose()).transpose();
        return out;
    }
};

// ---- Gaussian naive Bayes ---------------------------------------------------

struct NbModel {
    int num_classes = 0;
    int dim = 0;
    std::vector<double> log_prior;  // per class
    Eigen::MatrixXd mean;           // num_classes x dim
    Eigen::MatrixXd var;            // num_classes x dim, floored away from zero
};

inline NbModel nb_train(const TrainingMatrix& tm) {
    if (tm.n() == 0) throw DataError("naive Bayes needs at least one training row");
    NbModel m;
    m.num_classes = tm.num_classes;
    m.dim = tm.dim();
    m.mean = Eigen::MatrixXd::Zero(m.num_classes, m.dim);
    m.var = Eigen::MatrixXd::Zero(m.num_classes, m.dim);
    std::vector<int> count(static_cast<std::size_t>(m.num_classes), 0);
    for (int i = 0; i < tm.n(); ++i) {
        count[static_cast<std::size_t>(tm.y[i])]++;
        m.mean.row(tm.y[i]) += tm.x.row(i);
    }
    for (int c = 0; c < m.num_classes; ++c) {
        if (count[static_cast<std::size_t>(c)] == 0)
            throw DataError("class " + std::to_string(c) + " has no training rows");
        m.mean.row(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);
    }
    for (int i = 0; i < tm.n(); ++i) {
        Eigen::ArrayXd diff = (tm.x.row(i) - m.mean.row(tm.y[i])).array();
        m.var.row(tm.y[i]) += (diff * diff).matrix();
    }
    for (int c = 0; c < m.num_classes; ++c)
        m.var.row(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);

    // Floor each feature's class variances by a small multiple of its pooled
    // variance so constant-in-class features do not produce singular densities.
    Eigen::RowVectorXd global_mean = tm.x.colwise().mean();
    Eigen::RowVectorXd global_var = Eigen::RowVectorXd::Zero(m.dim);
    for (int i = 0; i < tm.n(); ++i) {
        Eigen::ArrayXd diff = (tm.x.row(i) - global_mean).array();
        global_var += (diff * diff).matrix();
    }
    global_var /= static_cast<double>(tm.n());
    for (int k = 0; k < m.dim; ++k) {
        double floor = 1e-9 * (global_var[k] + 1e-12);
        for (int c = 0; c < m.num_classes; ++c)
            if (m.var(c, k) < floor) m.var(c, k) = floor;
    }

    m.log_prior.resize(static_cast<std::size_t>(m.num_classes));
    for (int c = 0; c < m.num_classes; ++c)
        m.log_prior[static_cast<std::size_t>(c)] =
            std::log(static_cast<double>(count[static_cast<std::size_t>(c)]) / tm.n());
    return m;
}

inline std::vector<double> nb_log_posteriors(const NbModel& m, const Eigen::VectorXd& x) {
    constexpr double kLog2Pi = 1.8378770664093453;
    std::vector<double> post(static_cast<std::size_t>(m.num_classes));
    for (int c = 0; c < m.num_classes; ++c) {
        double lp = m.log_prior[static_cast<std::size_t>(c)];
        for (int k = 0; k < m.dim; ++k) {
            double v = m.var(c, k);
            double d = x[k] - m.mean(c, k);
            lp -= 0.5 * (kLog2Pi + std::log(v) + d * d / v);
        }
        post[static_cast<std::size_t>(c)] = lp;
    }
    return post;
}

// argmax of the log posteriors; ties go to the lowest class index
inline int nb_predict(const NbModel& m, const Eigen::VectorXd& x) {
    std::vector<double> post = nb_log_posteriors(m, x);
    int best = 0;
    for (int c = 1; c < m.num_classes; ++c)
        if (post[static_cast<std::size_t>(c)] > post[static_cast<std::size_t>(best)]) best = c;
    return best;
}

// ---- SMO solver for one binary linear SVM -----------------------------------

namespace detail {

struct SmoResult {
    Eigen::VectorXd alpha;
    Eigen::VectorXd w;
    double b = 0.0;  // decision function is u(x) = w.dot(x) - b
    int passes = 0;
};

// Sequential minimal optimization for the dual of the linear soft-margin SVM.
// Follows the classic two-heuristic working-set scheme: an outer loop that
// alternates full sweeps with non-bound sweeps, and an inner step that solves
// the two-variable subproblem analytically (endpoint objectives when the
// second derivative along the constraint line vanishes). Errors are computed
// on demand from the explicitly maintained weight vector.
class SmoSolver {
  public:
    SmoSolver(const Eigen::MatrixXd& x, const std::vector<int>& y, double c, double tol)
        : x_(x),
          y_(y),
          c_(c),
          tol_(tol),
          n_(static_cast<int>(x.rows())),
          alpha_(Eigen::VectorXd::Zero(x.rows())),
          w_(Eigen::VectorXd::Zero(x.cols())),
          rng_(substream_seed(0x534d4f5f32763177ull, "smo")) {}

    SmoResult solve() {
        int num_changed = 0;
        bool examine_all = true;
        int passes = 0;
        const int max_passes = 200 + 50 * n_;
        while (num_changed > 0 || examine_all) {
            if (++passes > max_passes) break;
            num_changed = 0;
            for (int i = 0; i < n_; ++i) {
                if (!examine_all && !non_bound(i)) continue;
                num_changed += examine(i);
            }
            if (examine_all)
                examine_all = false;
            else if (num_changed == 0)
                examine_all = true;
        }
        // snap arithmetic residue on the alphas to the exact bounds, then
        // rebuild w from scratch so incremental drift cannot survive either
        for (int i = 0; i < n_; ++i) {
            if (alpha_[i] < 1e-10 * c_)
                alpha_[i] = 0.0;
            else if (alpha_[i] > (1.0 - 1e-10) * c_)
                alpha_[i] = c_;
        }
        w_.setZero();
        for (int i = 0; i < n_; ++i)
            if (alpha_[i] > 0.0)
                w_ += alpha_[i] * y_[static_cast<std::size_t>(i)] * x_.row(i).transpose();
        finalize_threshold();
        return {alpha_, w_, b_, passes};
    }

  private:
    static constexpr double kEps = 1e-8;

    // The pairwise threshold updates keep b consistent for the two points of
    // the last step only. When every alpha ends up at a bound the dual leaves
    // b underdetermined and the running value can sit outside the interval the
    // KKT conditions allow, so recompute it from the final alphas: average
    // w.x - y over the free support vectors when there are any, otherwise the
    // midpoint of the feasible interval spanned by the bound points.
    void finalize_threshold() {
        double sum = 0.0;
        int free_count = 0;
        for (int i = 0; i < n_; ++i) {
            if (!non_bound(i)) continue;
            sum += w_.dot(x_.row(i)) - y_[static_cast<std::size_t>(i)];
            ++free_count;
        }
        if (free_count > 0) {
            b_ = sum / free_count;
            return;
        }
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_; ++i) {
            double f = w_.dot(x_.row(i));
            bool at_c = alpha_[i] > 0.5 * c_;  // alphas here are all at a bound
            if (y_[static_cast<std::size_t>(i)] > 0) {
                if (at_c)
                    lo = std::max(lo, f - 1.0);
                else
                    hi = std::min(hi, f - 1.0);
            } else {
                if (at_c)
                    hi = std::min(hi, f + 1.0);
                else
                    lo = std::max(lo, f + 1.0);
            }
        }
        if (std::isfinite(lo) && std::isfinite(hi))
            b_ = 0.5 * (lo + hi);
        else if (std::isfinite(lo))
            b_ = lo;
        else if (std::isfinite(hi))
            b_ = hi;
    }

    bool non_bound(int i) const { return alpha_[i] > 0.0 && alpha_[i] < c_; }
    double error(int i) const { return w_.dot(x_.row(i)) - b_ - y_[static_cast<std::size_t>(i)]; }

    int examine(int i2) {
        double y2 = y_[static_cast<std::size_t>(i2)];
        double alph2 = alpha_[i2];
        double e2 = error(i2);
        double r2 = e2 * y2;
        if (!((r2 < -tol_ && alph2 < c_) || (r2 > tol_ && alph2 > 0.0))) return 0;

        // first choice: the non-bound example with the largest |E1 - E2|
        int best = -1;
        double best_gap = -1.0;
        for (int i = 0; i < n_; ++i) {
            if (!non_bound(i)) continue;
            double gap = std::abs(error(i) - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best >= 0 && take_step(best, i2)) return 1;

        // second: sweep the non-bound set from a random start
        std::uint64_t offset = rng_.below(static_cast<std::uint64_t>(n_));
        for (int t = 0; t < n_; ++t) {
            int i1 = static_cast<int>((offset + static_cast<std::uint64_t>(t)) % n_);
            if (non_bound(i1) && take_step(i1, i2)) return 1;
        }
        // third: sweep everything from a random start
        offset = rng_.below(static_cast<std::uint64_t>(n_));
        for (int t = 0; t < n_; ++t) {
            int i1 = static_cast<int>((offset + static_cast<std::uint64_t>(t)) % n_);
            if (take_step(i1, i2)) return 1;
        }
        return 0;
    }

    bool take_step(int i1, int i2) {
        if (i1 == i2) return false;
        double alph1 = alpha_[i1], alph2 = alpha_[i2];
        double y1 = y_[static_cast<std::size_t>(i1)], y2 = y_[static_cast<std::size_t>(i2)];
        double e1 = error(i1), e2 = error(i2);
        double s = y1 * y2;
        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, alph2 - alph1);
            hi = std::min(c_, c_ + alph2 - alph1);
        } else {
            lo = std::max(0.0, alph1 + alph2 - c_);
            hi = std::min(c_, alph1 + alph2);
        }
        if (lo >= hi) return false;

        double k11 = x_.row(i1).dot(x_.row(i1));
        double k12 = x_.row(i1).dot(x_.row(i2));
        double k22 = x_.row(i2).dot(x_.row(i2));
        double eta = k11 + k22 - 2.0 * k12;
        double a2;
        if (eta > 0.0) {
            a2 = alph2 + y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // objective is linear (or flat) along the constraint line: compare
            // the two endpoints of the feasible segment
            double f1 = y1 * (e1 + b_) - alph1 * k11 - s * alph2 * k12;
            double f2 = y2 * (e2 + b_) - s * alph1 * k12 - alph2 * k22;
            double l1 = alph1 + s * (alph2 - lo);
            double h1 = alph1 + s * (alph2 - hi);
            double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                            s * lo * l1 * k12;
            double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                            s * hi * h1 * k12;
            if (lo_obj < hi_obj - kEps)
                a2 = lo;
            else if (lo_obj > hi_obj + kEps)
                a2 = hi;
            else
                a2 = alph2;
        }
        if (std::abs(a2 - alph2) < kEps * (a2 + alph2 + kEps)) return false;

        double a1 = alph1 + s * (alph2 - a2);
        if (a1 < 0.0) {  // guard rounding drift off the box
            a2 += s * a1;
            a1 = 0.0;
        } else if (a1 > c_) {
            a2 += s * (a1 - c_);
            a1 = c_;
        }

        double b1 = e1 + y1 * (a1 - alph1) * k11 + y2 * (a2 - alph2) * k12 + b_;
        double b2 = e2 + y1 * (a1 - alph1) * k12 + y2 * (a2 - alph2) * k22 + b_;
        if (a1 > 0.0 && a1 < c_)
            b_ = b1;
        else if (a2 > 0.0 && a2 < c_)
            b_ = b2;
        else
            b_ = 0.5 * (b1 + b2);

        w_ += y1 * (a1 - alph1) * x_.row(i1).transpose() +
              y2 * (a2 - alph2) * x_.row(i2).transpose();
        alpha_[i1] = a1;
        alpha_[i2] = a2;
        return true;
    }

    const Eigen::MatrixXd& x_;
    const std::vector<int>& y_;
    double c_, tol_;
    int n_;
    Eigen::VectorXd alpha_, w_;
    double b_ = 0.0;
    Rng rng_;
};

inline SmoResult smo_solve(const Eigen::MatrixXd& x, const std::vector<int>& y, double c,
                           double tol) {
    return SmoSolver(x, y, c, tol).solve();
}

}  // namespace detail

// ---- multiclass SVM ---------------------------------------------------------

struct SvmPair {
    int pos_class = 0;  // voted for when the decision value is >= 0
    int neg_class = 0;
    Eigen::VectorXd w;
    double b = 0.0;
    Eigen::VectorXd alpha;
    std::vector<std::int8_t> ysign;  // alpha[i] belongs to an example with this label sign
    bool degenerate = false;         // w vanished; pair votes for its majority class
    int fallback = 0;
};

struct SvmModel {
    int num_classes = 0;
    int dim = 0;
    double c = 1.0;
    double tol = 1e-3;
    MinMaxScaler scaler;
    std::vector<SvmPair> pairs;
};

inline SvmModel svm_train(const TrainingMatrix& tm, double c = 1.0, double tol = 1e-3) {
    if (!tm.x.allFinite()) throw DataError("non-finite feature value in SVM training data");
    std::vector<int> present;
    for (int cl = 0; cl < tm.num_classes; ++cl)
        if (std::find(tm.y.begin(), tm.y.end(), cl) != tm.y.end()) present.push_back(cl);
    if (present.size() < 2) throw DataError("SVM training needs at least two classes present");
    if (c <= 0.0) throw UsageError("SVM C must be positive");

    SvmModel m;
    m.num_classes = tm.num_classes;
    m.dim = tm.dim();
    m.c = c;
    m.tol = tol;
    m.scaler.fit(tm.x);
    Eigen::MatrixXd xs = m.scaler.transform_rows(tm.x);

    for (std::size_t a = 0; a < present.size(); ++a) {
        for (std::size_t bcl = a + 1; bcl < present.size(); ++bcl) {
            int ca = present[a], cb = present[bcl];
            std::vector<int> rows;
            for (int i = 0; i < tm.n(); ++i)
                if (tm.y[static_cast<std::size_t>(i)] == ca ||
                    tm.y[static_cast<std::size_t>(i)] == cb)
                    rows.push_back(i);
            Eigen::MatrixXd px(static_cast<Eigen::Index>(rows.size()), tm.dim());
            std::vector<int> py(rows.size());
            int na = 0;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                px.row(static_cast<Eigen::Index>(r)) = xs.row(rows[r]);
                bool is_a = tm.y[static_cast<std::size_t>(rows[r])] == ca;
                py[r] = is_a ? 1 : -1;
                na += is_a ? 1 : 0;
            }
            detail::SmoResult res = detail::smo_solve(px, py, c, tol);
            SvmPair pair;
            pair.pos_class = ca;
            pair.neg_class = cb;
            pair.w = res.w;
            pair.b = res.b;
            pair.alpha = res.alpha;
            pair.ysign.resize(py.size());
            for (std::size_t r = 0; r < py.size(); ++r)
                pair.ysign[r] = static_cast<std::int8_t>(py[r]);
            pair.degenerate = res.w.lpNorm<Eigen::Infinity>() < 1e-12;
            int nb = static_cast<int>(rows.size()) - na;
            pair.fallback = na >= nb ? ca : cb;
            m.pairs.push_back(std::move(pair));
        }
    }
    return m;
}

// 1-vs-1 vote; ties broken by summed signed margins, then by lowest index.
inline int svm_predict(const SvmModel& m, const Eigen::VectorXd& x) {
    Eigen::VectorXd xs = m.scaler.transform(x);
    std::vector<int> votes(static_cast<std::size_t>(m.num_classes), 0);
    std::vector<double> margin(static_cast<std::size_t>(m.num_classes), 0.0);
    for (const SvmPair& p : m.pairs) {
        if (p.degenerate) {
            votes[static_cast<std::size_t>(p.fallback)]++;
            continue;
        }
        double u = p.w.dot(xs) - p.b;
        votes[static_cast<std::size_t>(u >= 0.0 ? p.pos_class : p.neg_class)]++;
        margin[static_cast<std::size_t>(p.pos_class)] += u;
        margin[static_cast<std::size_t>(p.neg_class)] -= u;
    }
    int best = 0;
    for (int cl = 1; cl < m.num_classes; ++cl) {
        std::size_t ic = static_cast<std::size_t>(cl), ib = static_cast<std::size_t>(best);
        if (votes[ic] > votes[ib] || (votes[ic] == votes[ib] && margin[ic] > margin[ib]))
            best = cl;
    }
    return best;
}

// ---- cosine KNN -------------------------------------------------------------

struct KnnModel {
    int k = 1;
    int num_classes = 0;
    Eigen::MatrixXd x;  // rows normalized to unit length (zero rows kept as-is)
    std::vector<int> y;
    std::vector<std::uint8_t> zero_row;
};

inline KnnModel knn_train(const TrainingMatrix& tm, int k) {
    if (k < 1) throw UsageError("KNN needs k >= 1");
    if (tm.n() == 0) throw DataError("KNN needs a non-empty training set");
    if (k > tm.n()) throw DataError("KNN k exceeds the training-set size");
    KnnModel m;
    m.k = k;
    m.num_classes = tm.num_classes;
    m.x = tm.x;
    m.y = tm.y;
    m.zero_row.resize(static_cast<std::size_t>(tm.n()), 0);
    for (int i = 0; i < tm.n(); ++i) {
        double norm = m.x.row(i).norm();
        if (norm > 0.0)
            m.x.row(i) /= norm;
        else
            m.zero_row[static_cast<std::size_t>(i)] = 1;
    }
    return m;
}

// Majority label among the k most-similar stored vectors. Equal similarities
// rank in training order; vote ties go to the tied label whose best-ranked
// supporting neighbour comes first.
inline int knn_predict(const KnnModel& m, const Eigen::VectorXd& x) {
    Eigen::VectorXd q = x;
    double norm = q.norm();
    if (norm > 0.0) q /= norm;
    const int n = static_cast<int>(m.x.rows());
    std::vector<double> sim(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        sim[static_cast<std::size_t>(i)] =
            m.zero_row[static_cast<std::size_t>(i)] ? 0.0 : m.x.row(i).dot(q);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double sa = sim[static_cast<std::size_t>(a)], sb = sim[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    std::vector<int> count(static_cast<std::size_t>(m.num_classes), 0);
    std::vector<int> best_rank(static_cast<std::size_t>(m.num_classes),
                               std::numeric_limits<int>::max());
    for (int r = 0; r < m.k; ++r) {
        int label = m.y[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
        count[static_cast<std::size_t>(label)]++;
        best_rank[static_cast<std::size_t>(label)] =
            std::min(best_rank[static_cast<std::size_t>(label)], r);
    }
    int best = -1;
    for (int cl = 0; cl < m.num_classes; ++cl) {
        std::size_t ic = static_cast<std::size_t>(cl);
        if (count[ic] == 0) continue;
        if (best < 0) {
            best = cl;
            continue;
        }
        std::size_t ib = static_cast<std::size_t>(best);
        if (count[ic] > count[ib] ||
            (count[ic] == count[ib] && best_rank[ic] < best_rank[ib]))
            best = cl;
    }
    return best;
}

// ---- model containers -------------------------------------------------------

inline constexpr char kClassifierMagic[8] = {'W', 'S', 'D', 'C', 'L', 'S', '1', '\n'};

namespace detail {

enum class ModelKind : std::uint8_t { nb = 0, svm = 1, knn = 2 };

inline void put_header(std::ostream& out, ModelKind kind) {
    out.write(kClassifierMagic, sizeof(kClassifierMagic));
    put<std::uint32_t>(out, 1);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(kind));
}

inline void check_header(std::istream& in, ModelKind kind, const std::string& what) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || !std::equal(magic, magic + 8, kClassifierMagic))
        throw DataError("not a classifier model file");
    if (get<std::uint32_t>(in) != 1) throw DataError("unsupported classifier model version");
    if (get<std::uint8_t>(in) != static_cast<std::uint8_t>(kind))
        throw DataError("model file does not hold a " + what + " model");
}

inline std::ofstream open_model_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

inline std::ifstream open_model_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    return in;
}

}  // namespace detail

inline void save_nb(const NbModel& m, const std::filesystem::path& path) {
    auto out = detail::open_model_out(path);
    detail::put_header(out, detail::ModelKind::nb);
    detail::put<std::int32_t>(out, m.num_classes);
    detail::put<std::int32_t>(out, m.dim);
    for (double lp : m.log_prior) detail::put<double>(out, lp);
    detail::put_mat(out, m.mean);
    detail::put_mat(out, m.var);
    if (!out) throw DataError("write failed: " + path.string());
}

inline NbModel load_nb(const std::filesystem::path& path) {
    auto in = detail::open_model_in(path);
    detail::check_header(in, detail::ModelKind::nb, "naive Bayes");
    NbModel m;
    m.num_classes = detail::get<std::int32_t>(in);
    m.dim = detail::get<std::int32_t>(in);
    m.log_prior.resize(static_cast<std::size_t>(m.num_classes));
    for (double& lp : m.log_prior) lp = detail::get<double>(in);
    m.mean = detail::get_mat(in);
    m.var = detail::get_mat(in);
    return m;
}

inline void save_svm(const SvmModel& m, const std::filesystem::path& path) {
    auto out = detail::open_model_out(path);
    detail::put_header(out, detail::ModelKind::svm);
    detail::put<std::int32_t>(out, m.num_classes);
    detail::put<std::int32_t>(out, m.dim);
    detail::put<double>(out, m.c);
    detail::put<double>(out, m.tol);
    detail::put_vec(out, m.scaler.min);
    detail::put_vec(out, m.scaler.max);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.pairs.size()));
    for (const SvmPair& p : m.pairs) {
        detail::put<std::int32_t>(out, p.pos_class);
        detail::put<std::int32_t>(out, p.neg_class);
        detail::put<std::uint8_t>(out, p.degenerate ? 1 : 0);
        detail::put<std::int32_t>(out, p.fallback);
        detail::put<double>(out, p.b);
        detail::put_vec(out, p.w);
        detail::put_vec(out, p.alpha);
        for (std::int8_t s : p.ysign) detail::put<std::int8_t>(out, s);
    }
    if (!out) throw DataError("write failed: " + path.string());
}

inline SvmModel load_svm(const std::filesystem::path& path) {
    auto in = detail::open_model_in(path);
    detail::check_header(in, detail::ModelKind::svm, "SVM");
    SvmModel m;
    m.num_classes = detail::get<std::int32_t>(in);
    m.dim = detail::get<std::int32_t>(in);
    m.c = detail::get<double>(in);
    m.tol = detail::get<double>(in);
    m.scaler.min = detail::get_vec(in);
    m.scaler.max = detail::get_vec(in);
    auto n_pairs = detail::get<std::uint32_t>(in);
    m.pairs.resize(n_pairs);
    for (SvmPair& p : m.pairs) {
        p.pos_class = detail::get<std::int32_t>(in);
        p.neg_class = detail::get<std::int32_t>(in);
        p.degenerate = detail::get<std::uint8_t>(in) != 0;
        p.fallback = detail::get<std::int32_t>(in);
        p.b = detail::get<double>(in);
        p.w = detail::get_vec(in);
        p.alpha = detail::get_vec(in);
        p.ysign.resize(static_cast<std::size_t>(p.alpha.size()));
        for (std::int8_t& s : p.ysign) s = detail::get<std::int8_t>(in);
    }
    return m;
}

inline void save_knn(const KnnModel& m, const std::filesystem::path& path) {
    auto out = detail::open_model_out(path);
    detail::put_header(out, detail::ModelKind::knn);
    detail::put<std::int32_t>(out, m.k);
    detail::put<std::int32_t>(out, m.num_classes);
    detail::put_mat(out, m.x);
    detail::put<std::uint64_t>(out, m.y.size());
    for (int label : m.y) detail::put<std::int32_t>(out, label);
    for (std::uint8_t z : m.zero_row) detail::put<std::uint8_t>(out, z);
    if (!out) throw DataError("write failed: " + path.string());
}

inline KnnModel load_knn(const std::filesystem::path& path) {
    auto in = detail::open_model_in(path);
    detail::check_header(in, detail::ModelKind::knn, "KNN");
    KnnModel m;
    m.k = detail::get<std::int32_t>(in);
    m.num_classes = detail::get<std::int32_t>(in);
    m.x = detail::get_mat(in);
    auto n = detail::get<std::uint64_t>(in);
    m.y.resize(n);
    for (int& label : m.y) label = detail::get<std::int32_t>(in);
    m.zero_row.resize(n);
    for (std::uint8_t& z : m.zero_row) z = detail::get<std::uint8_t>(in);
    return m;
}

}  // namespace wsd
