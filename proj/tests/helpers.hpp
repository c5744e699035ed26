#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "saln/rng.hpp"
#include "saln/textalign.hpp"
#include "saln/types.hpp"
#include "saln/vidcluster.hpp"

namespace saln::test {

inline Token tok(const std::string& verb, const std::string& object) { return {verb, object}; }

/// Sequence with unit caption spans starting at consecutive seconds.
inline TokenSequence seq(const std::string& id, const std::vector<Token>& tokens) {
    TokenSequence s;
    s.item_id = id;
    s.tokens = tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        s.spans.push_back({static_cast<double>(i), static_cast<double>(i) + 1.0});
    return s;
}

/// Direct expansion of the sum-of-pairs objective: for every unordered item
/// pair and every slot, add the cost of the two tokens mapped there (gaps
/// contribute nothing). Independent of the library's evaluation path.
inline double sum_of_pairs_reference(const textalign::GlobalAlignment& alignment,
                                     const std::vector<TokenSequence>& sequences,
                                     const textalign::TokenCostMatrix& cost) {
    const int n_items = static_cast<int>(sequences.size());
    double total = 0.0;
    for (int n = 0; n < n_items; ++n) {
        for (int m = n + 1; m < n_items; ++m) {
            for (int l = 0; l < alignment.num_slots; ++l) {
                const Token* a = nullptr;
                const Token* b = nullptr;
                for (std::size_t s = 0; s < sequences[n].tokens.size(); ++s)
                    if (alignment.slot_of_token[n][s] == l) a = &sequences[n].tokens[s];
                for (std::size_t s = 0; s < sequences[m].tokens.size(); ++s)
                    if (alignment.slot_of_token[m][s] == l) b = &sequences[m].tokens[s];
                if (a && b) total += cost.at(*a, *b);
            }
        }
    }
    return total;
}

/// All strictly increasing mappings of `len` tokens into `slots` slots.
inline std::vector<std::vector<int>> monotone_mappings(int len, int slots) {
    std::vector<std::vector<int>> all;
    std::vector<int> current(len);
    auto rec = [&](auto&& self, int idx, int from) -> void {
        if (idx == len) {
            all.push_back(current);
            return;
        }
        for (int l = from; l <= slots - (len - idx); ++l) {
            current[idx] = l;
            self(self, idx + 1, l + 1);
        }
    };
    rec(rec, 0, 0);
    return all;
}

/// All strictly increasing K-subsets of 0..intervals-1 satisfying the masks.
inline std::vector<std::vector<int>> feasible_placements(int intervals, int steps,
                                                         const vidcluster::StepWindows& windows) {
    std::vector<std::vector<int>> all;
    std::vector<int> current(steps);
    auto rec = [&](auto&& self, int k, int from) -> void {
        if (k == steps) {
            all.push_back(current);
            return;
        }
        for (int t = from; t < intervals; ++t) {
            if (k < static_cast<int>(windows.size()) && !windows[k].empty() && !windows[k][t])
                continue;
            current[k] = t;
            self(self, k + 1, t + 1);
        }
    };
    rec(rec, 0, 0);
    return all;
}

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double lo = -1.0,
                                     double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

/// Ridge fit through the singular value decomposition; an algebraic route
/// independent of the kernel's normal-equations solve.
inline Eigen::MatrixXd svd_ridge(const Eigen::MatrixXd& features, const Eigen::MatrixXd& target,
                                 double lambda) {
    const double total = static_cast<double>(features.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(features,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd shrink = svd.singularValues();
    for (Eigen::Index i = 0; i < shrink.size(); ++i)
        shrink(i) = shrink(i) / (shrink(i) * shrink(i) + total * lambda);
    return svd.matrixV() * shrink.asDiagonal() * svd.matrixU().transpose() * target;
}

/// The ridge objective the clustering cost minimizes over classifiers.
inline double ridge_objective(const Eigen::MatrixXd& assignment,
                              const Eigen::MatrixXd& features,
                              const Eigen::MatrixXd& classifier, double lambda) {
    const double total = static_cast<double>(features.rows());
    return (assignment - features * classifier).squaredNorm() / (2.0 * total) +
           0.5 * lambda * classifier.squaredNorm();
}

}  // namespace saln::test
