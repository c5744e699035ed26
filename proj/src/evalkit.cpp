#include "saln/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

namespace saln::evalkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Longest strictly increasing subsequence of a sequence of distinct indices;
// equals the LCS with the sorted unique sequence.
int longest_increasing(const std::vector<int>& values) {
    std::vector<int> best;
    for (std::size_t i = 0; i < values.size(); ++i) {
        int len = 1;
        for (std::size_t j = 0; j < i; ++j)
            if (values[j] < values[i]) len = std::max(len, best[j] + 1);
        best.push_back(len);
    }
    return best.empty() ? 0 : *std::max_element(best.begin(), best.end());
}

bool interval_inside(const TimeSpan& span, const AnnotationEvent& event) {
    return span.start_s >= event.start_s - 1e-9 && span.end_s <= event.end_s + 1e-9;
}

}  // namespace

CorpusStats corpus_stats(const CorpusAnnotation& annotation) {
    validate_annotation(annotation);
    CorpusStats stats;
    long long sum_l = 0, sum_u = 0, sum_g = 0;
    for (const auto& item : annotation.items) {
        std::vector<int> dedup;
        std::set<int> seen;
        for (const auto& ev : item.events)
            if (seen.insert(ev.step).second) dedup.push_back(ev.step);
        CorpusStats::ItemCounts counts;
        counts.item_id = item.item_id;
        counts.total_events = static_cast<int>(item.events.size());
        counts.unique_steps = static_cast<int>(dedup.size());
        counts.in_order = longest_increasing(dedup);
        sum_l += counts.in_order;
        sum_u += counts.unique_steps;
        sum_g += counts.total_events;
        stats.items.push_back(std::move(counts));
    }
    const double denom = static_cast<double>(annotation.num_gt_steps) *
                         static_cast<double>(annotation.items.size());
    stats.missing = denom > 0 ? 1.0 - static_cast<double>(sum_u) / denom : 1.0;
    if (sum_u > 0) {
        stats.order_error = 1.0 - static_cast<double>(sum_l) / static_cast<double>(sum_u);
        stats.repetition = 1.0 - static_cast<double>(sum_u) / static_cast<double>(sum_g);
    }
    return stats;
}

std::vector<int> hungarian_match(const Eigen::MatrixXd& score) {
    if (!score.allFinite()) throw schema_error("hungarian_match: non-finite scores");
    const int rows = static_cast<int>(score.rows());
    const int cols = static_cast<int>(score.cols());
    if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

    // Pad to square and minimize the negated score with the classic
    // potentials algorithm; padded cells cost 0.
    const int n = std::max(rows, cols);
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
    cost.topLeftCorner(rows, cols) = -score;

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> result(rows, -1);
    for (int j = 1; j <= n; ++j) {
        const int i = match[j];
        if (i >= 1 && i <= rows && j <= cols) result[i - 1] = j - 1;
    }
    return result;
}

ScoreReport localization_f1(const vidcluster::StepLocalization& localization,
                            const CorpusAnnotation& annotation,
                            const std::vector<int>* given_mapping) {
    validate_annotation(annotation);
    if (localization.items.empty()) throw schema_error("localization_f1: no localized items");
    const int k_pred = static_cast<int>(localization.items.front().interval_of_step.size());
    for (const auto& item : localization.items)
        if (static_cast<int>(item.interval_of_step.size()) != k_pred)
            throw schema_error("localization_f1: inconsistent step count across items");

    std::map<std::string, const ItemAnnotation*> ann_of;
    for (const auto& item : annotation.items) ann_of[item.item_id] = &item;

    // Per-item hit sets: which gt steps each predicted interval falls inside.
    struct ItemHits {
        const vidcluster::ItemLocalization* loc;
        std::vector<std::vector<int>> gt_steps_hit;  // per predicted step
        bool annotated = false;
        std::set<int> present;  // distinct annotated steps
    };
    std::vector<ItemHits> items;
    Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(k_pred, annotation.num_gt_steps);
    int gt_occurrences = 0;
    for (const auto& loc_item : localization.items) {
        ItemHits ih;
        ih.loc = &loc_item;
        ih.gt_steps_hit.resize(k_pred);
        auto it = ann_of.find(loc_item.item_id);
        if (it != ann_of.end()) {
            ih.annotated = true;
            for (const auto& ev : it->second->events) ih.present.insert(ev.step);
            gt_occurrences += static_cast<int>(ih.present.size());
            for (int k = 0; k < k_pred; ++k) {
                const int t = loc_item.interval_of_step[k];
                const TimeSpan span{t * loc_item.interval_duration_s,
                                    (t + 1) * loc_item.interval_duration_s};
                std::set<int> matched;
                for (const auto& ev : it->second->events)
                    if (interval_inside(span, ev)) matched.insert(ev.step);
                ih.gt_steps_hit[k].assign(matched.begin(), matched.end());
                for (int j : matched) hits(k, j) += 1.0;
            }
        }
        items.push_back(std::move(ih));
    }

    ScoreReport report;
    if (given_mapping) {
        if (static_cast<int>(given_mapping->size()) != k_pred)
            throw schema_error("localization_f1: mapping size does not match predicted steps");
        std::set<int> targets;
        for (int j : *given_mapping) {
            if (j < -1 || j >= annotation.num_gt_steps)
                throw schema_error("localization_f1: mapping references unknown gt step");
            if (j >= 0 && !targets.insert(j).second)
                throw schema_error("localization_f1: mapping is not one-to-one");
        }
        report.matching = *given_mapping;
    } else {
        report.matching = hungarian_match(hits);
    }

    int correct = 0;
    for (auto& ih : items) {
        ScoreReport::ItemDetail detail;
        detail.item_id = ih.loc->item_id;
        detail.step_correct.assign(k_pred, 0);
        for (int k = 0; k < k_pred; ++k) {
            const int j = report.matching[k];
            if (j < 0) continue;
            if (std::binary_search(ih.gt_steps_hit[k].begin(), ih.gt_steps_hit[k].end(), j)) {
                detail.step_correct[k] = 1;
                ++correct;
            }
        }
        report.items.push_back(std::move(detail));
    }

    report.correct = correct;
    report.gt_occurrences = gt_occurrences;
    report.predictions = static_cast<int>(localization.items.size()) * k_pred;
    report.precision = report.predictions > 0
                           ? static_cast<double>(correct) / report.predictions
                           : 0.0;
    report.recall =
        gt_occurrences > 0 ? static_cast<double>(correct) / gt_occurrences : 0.0;
    const double pr = report.precision + report.recall;
    report.f1 = pr > 0.0 ? 2.0 * report.precision * report.recall / pr : 0.0;
    return report;
}

std::pair<double, double> script_precision_recall(std::span<const Token> recovered,
                                                  std::span<const Token> gt_script,
                                                  const std::map<Token, Token>& equivalence) {
    const int n = static_cast<int>(recovered.size());
    const int m = static_cast<int>(gt_script.size());
    if (n == 0 || m == 0) return {0.0, 0.0};

    std::vector<std::optional<Token>> mapped(n);
    for (int i = 0; i < n; ++i) {
        auto it = equivalence.find(recovered[i]);
        if (it != equivalence.end()) mapped[i] = it->second;
    }

    Eigen::MatrixXi lcs = Eigen::MatrixXi::Zero(n + 1, m + 1);
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= m; ++j) {
            if (mapped[i - 1] && *mapped[i - 1] == gt_script[j - 1])
                lcs(i, j) = lcs(i - 1, j - 1) + 1;
            else
                lcs(i, j) = std::max(lcs(i - 1, j), lcs(i, j - 1));
        }
    }

    std::set<Token> hit;
    for (int i = n, j = m; i > 0 && j > 0;) {
        if (mapped[i - 1] && *mapped[i - 1] == gt_script[j - 1] &&
            lcs(i, j) == lcs(i - 1, j - 1) + 1) {
            hit.insert(gt_script[j - 1]);
            --i;
            --j;
        } else if (lcs(i - 1, j) >= lcs(i, j - 1)) {
            --i;
        } else {
            --j;
        }
    }

    const double precision = static_cast<double>(lcs(n, m)) / n;
    const double recall = static_cast<double>(hit.size()) / m;
    return {precision, recall};
}

}  // namespace saln::evalkit
