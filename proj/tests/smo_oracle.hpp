#pragma once

// Exhaustive oracle for tiny soft-margin linear-SVM duals, used to verify the
// SMO solver. Every alpha is assigned to one of {at 0, free, at C}; for each
// of the 3^n assignments the stationarity system on the free set (bordered by
// the equality constraint) is solved, box feasibility and the sign conditions
// on the bound sets are checked, and the best feasible dual objective wins.
// Practical up to n around 12.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace smo_oracle {

inline Eigen::MatrixXd gram_q(const Eigen::MatrixXd& x, const std::vector<int>& y) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd q(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            q(i, j) = y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] *
                      x.row(i).dot(x.row(j));
    return q;
}

inline double dual_objective(const Eigen::MatrixXd& q, const Eigen::VectorXd& a) {
    return a.sum() - 0.5 * a.dot(q * a);
}

struct Best {
    bool found = false;
    double objective = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd alpha;
};

inline Best solve(const Eigen::MatrixXd& x, const std::vector<int>& y, double c) {
    const int n = static_cast<int>(x.rows());
    const Eigen::MatrixXd q = gram_q(x, y);
    const double slack = 1e-7;
    Best best;

    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) total *= 3;

    std::vector<int> state(static_cast<std::size_t>(n));
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t rest = code;
        for (int i = 0; i < n; ++i) {
            state[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3);
            rest /= 3;
        }
        std::vector<int> free_set, at_c;
        for (int i = 0; i < n; ++i) {
            if (state[static_cast<std::size_t>(i)] == 1) free_set.push_back(i);
            if (state[static_cast<std::size_t>(i)] == 2) at_c.push_back(i);
        }

        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
        for (int i : at_c) alpha[i] = c;
        double beta;  // multiplier of the equality constraint

        if (!free_set.empty()) {
            const int f = static_cast<int>(free_set.size());
            Eigen::MatrixXd a(f + 1, f + 1);
            Eigen::VectorXd rhs(f + 1);
            for (int r = 0; r < f; ++r) {
                int i = free_set[static_cast<std::size_t>(r)];
                for (int s = 0; s < f; ++s)
                    a(r, s) = q(i, free_set[static_cast<std::size_t>(s)]);
                a(r, f) = y[static_cast<std::size_t>(i)];
                double off = 0.0;
                for (int j : at_c) off += q(i, j) * c;
                rhs[r] = 1.0 - off;
            }
            for (int s = 0; s < f; ++s)
                a(f, s) = y[static_cast<std::size_t>(free_set[static_cast<std::size_t>(s)])];
            a(f, f) = 0.0;
            double csum = 0.0;
            for (int j : at_c) csum += y[static_cast<std::size_t>(j)] * c;
            rhs[f] = -csum;

            Eigen::VectorXd z = a.fullPivLu().solve(rhs);
            if (!z.allFinite() || (a * z - rhs).lpNorm<Eigen::Infinity>() > 1e-8) continue;
            bool in_box = true;
            for (int r = 0; r < f; ++r) {
                double v = z[r];
                if (v < -slack || v > c + slack) {
                    in_box = false;
                    break;
                }
                alpha[free_set[static_cast<std::size_t>(r)]] = std::clamp(v, 0.0, c);
            }
            if (!in_box) continue;
            beta = z[f];
        } else {
            double csum = 0.0;
            for (int j : at_c) csum += y[static_cast<std::size_t>(j)] * c;
            if (std::abs(csum) > 1e-9) continue;
            // beta must satisfy every bound-set inequality: intersect the interval
            double lo = -std::numeric_limits<double>::infinity();
            double hi = std::numeric_limits<double>::infinity();
            Eigen::VectorXd g = q * alpha;
            for (int i = 0; i < n; ++i) {
                double yi = y[static_cast<std::size_t>(i)];
                double margin = 1.0 - g[i];
                bool zero = state[static_cast<std::size_t>(i)] == 0;
                // zero set: g_i + beta*y_i >= 1 ; C set: <= 1
                if ((zero && yi > 0) || (!zero && yi < 0)) lo = std::max(lo, yi * margin);
                if ((zero && yi < 0) || (!zero && yi > 0)) hi = std::min(hi, yi * margin);
            }
            if (lo > hi + slack) continue;
            beta = lo <= hi ? std::clamp(0.0, lo, hi) : 0.5 * (lo + hi);
        }

        // sign conditions at the bound sets
        Eigen::VectorXd g = q * alpha;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            double cond = g[i] + beta * y[static_cast<std::size_t>(i)];
            if (state[static_cast<std::size_t>(i)] == 0 && cond < 1.0 - slack) ok = false;
            if (state[static_cast<std::size_t>(i)] == 2 && cond > 1.0 + slack) ok = false;
        }
        if (!ok) continue;

        double obj = dual_objective(q, alpha);
        if (!best.found || obj > best.objective) {
            best.found = true;
            best.objective = obj;
            best.alpha = alpha;
        }
    }
    return best;
}

// Largest violation of the KKT conditions for a trained pair, measured as
//   alpha=0:      max(0, 1 - y*u)
//   0<alpha<C:    |y*u - 1|
//   alpha=C:      max(0, y*u - 1)
// with u = w.x - b, plus the equality-constraint residual |sum alpha*y|.
inline double kkt_violation(const Eigen::MatrixXd& x, const std::vector<int>& y,
                            const Eigen::VectorXd& alpha, const Eigen::VectorXd& w, double b,
                            double c) {
    double worst = 0.0, eq = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double yu = y[static_cast<std::size_t>(i)] * (w.dot(x.row(i)) - b);
        double a = alpha[i];
        eq += a * y[static_cast<std::size_t>(i)];
        if (a < 1e-9)
            worst = std::max(worst, 1.0 - yu);
        else if (a > c - 1e-9)
            worst = std::max(worst, yu - 1.0);
        else
            worst = std::max(worst, std::abs(yu - 1.0));
    }
    return std::max(worst, std::abs(eq));
}

}  // namespace smo_oracle
