#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "saln/types.hpp"
#include "saln/vidcluster.hpp"

namespace saln::evalkit {

/// Corpus-level order-error, missing-step and repetition fractions, with the
/// per-item counts they are computed from.
struct CorpusStats {
    std::optional<double> order_error;  // O; null when no unique steps exist
    std::optional<double> missing;      // M
    std::optional<double> repetition;   // R; null when no unique steps exist

    struct ItemCounts {
        std::string item_id;
        int in_order = 0;       // l_n
        int unique_steps = 0;   // u_n
        int total_events = 0;   // g_n
    };
    std::vector<ItemCounts> items;
};

struct ScoreReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<int> matching;  // predicted step -> gt step, -1 when unmatched
    int correct = 0;
    int gt_occurrences = 0;  // sum over items of distinct annotated steps
    int predictions = 0;     // N * K_pred

    struct ItemDetail {
        std::string item_id;
        std::vector<std::uint8_t> step_correct;  // per predicted step
    };
    std::vector<ItemDetail> items;
};

/// Order / missing / repetition statistics of an annotated corpus.
CorpusStats corpus_stats(const CorpusAnnotation& annotation);

/// Maximum-score one-to-one matching of rows to columns (partial when the
/// matrix is rectangular). Returns, per row, the matched column or -1.
std::vector<int> hungarian_match(const Eigen::MatrixXd& score);

/// Hungarian-matched (or given-mapping) detection scores: a prediction is
/// correct when its interval lies inside a ground-truth event of the matched
/// step. Recall divides by the annotated step occurrences, precision by
/// N * K_pred.
ScoreReport localization_f1(const vidcluster::StepLocalization& localization,
                            const CorpusAnnotation& annotation,
                            const std::vector<int>* given_mapping = nullptr);

/// Script scores: precision = |LCS(mapped recovered order, gt order)| / k_pred,
/// recall = distinct gt steps hit by that subsequence / K_gt. Recovered labels
/// absent from the equivalence map cannot match.
std::pair<double, double> script_precision_recall(std::span<const Token> recovered,
                                                  std::span<const Token> gt_script,
                                                  const std::map<Token, Token>& equivalence);

}  // namespace saln::evalkit
