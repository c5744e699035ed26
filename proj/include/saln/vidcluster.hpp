#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "saln/textalign.hpp"
#include "saln/types.hpp"

namespace saln::vidcluster {

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Caption-timing constraints: marks[n](s, t) = 1 iff interval t of item n
/// overlaps token s's caption span widened by [start - delta_before_s,
/// end + delta_after_s].
struct ConstraintWindows {
    double delta_before_s = 0.0;
    double delta_after_s = 10.0;
    std::vector<std::string> item_ids;  // stream order
    std::vector<BinaryMatrix> marks;    // per item, S_n x T_n
};

/// Residual kernel B = I - X (X^T X + T lambda I)^-1 X^T of the shared ridge
/// classifier. B is symmetric with eigenvalues in (0, 1]. Products B*Z are
/// applied through a d x d Cholesky-class factorization; the dense T x T
/// matrix is materialized only when T does not exceed materialize_cap.
class ResidualKernel {
public:
    ResidualKernel(Eigen::MatrixXd features, double lambda, int materialize_cap = 5000);

    int total_intervals() const { return static_cast<int>(features_.rows()); }
    int dim() const { return static_cast<int>(features_.cols()); }
    double lambda() const { return lambda_; }
    const Eigen::MatrixXd& features() const { return features_; }

    /// B * Z without forming B.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& assignment) const;

    /// Closed-form optimal classifier W*(Z) = (X^T X + T lambda I)^-1 X^T Z.
    Eigen::MatrixXd classifier(const Eigen::MatrixXd& assignment) const;

    /// Dense B when materialized, nullptr otherwise.
    const Eigen::MatrixXd* dense() const { return dense_ ? &*dense_ : nullptr; }

private:
    Eigen::MatrixXd features_;
    double lambda_;
    Eigen::LDLT<Eigen::MatrixXd> gram_;
    std::optional<Eigen::MatrixXd> dense_;
};

/// h(Z) = (1 / 2T) Tr(Z^T B Z), the residual of the best linear classifier
/// fit to the assignment Z.
double clustering_cost(const Eigen::MatrixXd& assignment, const ResidualKernel& kernel);

/// Gradient (1/T) B Z of clustering_cost.
Eigen::MatrixXd clustering_gradient(const Eigen::MatrixXd& assignment,
                                    const ResidualKernel& kernel);

/// Per-step allowed-interval masks for one item. Entry k empty means step k
/// is unconstrained; otherwise allowed[k][t] != 0 marks a permitted interval.
using StepWindows = std::vector<std::vector<std::uint8_t>>;

/// Builds caption windows by joining sequences and streams on item_id.
ConstraintWindows build_constraint_windows(std::span<const TokenSequence> sequences,
                                           std::span<const FeatureStream> streams,
                                           double delta_before_s = 0.0,
                                           double delta_after_s = 10.0);

/// Resolves (A_n, R_n) into per-step masks: the feasible window of step k is
/// the union of the marked rows with step_of_token[s] == k.
StepWindows resolve_step_windows(const BinaryMatrix& marks,
                                 const std::vector<int>& step_of_token, int num_steps);

/// Exact linear minimization over one item's ordered placements: picks
/// strictly increasing intervals t_0 < ... < t_{K-1}, one per step, minimizing
/// the sum of cost entries, subject to the window masks. Implemented as a
/// dynamic program over the padded (T+1) x (2K+1) cost matrix with
/// interleaved zero columns. Ties prefer the earliest intervals.
std::vector<int> ordered_oracle(const Eigen::MatrixXd& costs,
                                const StepWindows& windows = {});

/// Convenience overload resolving (A_n, R_n) first.
std::vector<int> ordered_oracle(const Eigen::MatrixXd& costs, const BinaryMatrix& marks,
                                const std::vector<int>& step_of_token);

struct LocalizeOptions {
    double lambda = 0.0;     // 0 = auto: 1 / (N * K)
    int max_iters = 300;
    double rel_tol = 1e-7;
    bool line_search = false;
    std::uint64_t seed = 0;
    int materialize_cap = 5000;
};

struct ItemLocalization {
    std::string item_id;
    std::vector<int> interval_of_step;  // strictly increasing, one per step
    int intervals = 0;
    double interval_duration_s = 1.0;
};

/// Final per-item step placements with the shared classifier.
struct StepLocalization {
    std::vector<ItemLocalization> items;
    Eigen::MatrixXd classifier;  // d x K
    double lambda = 0.0;
};

struct LocalizeIterate {
    int iter = 0;
    double relaxed_cost = 0.0;
    double rounded_cost = 0.0;
    std::vector<std::vector<int>> placements;  // rounded, per item per step
};

struct LocalizeResult {
    StepLocalization localization;
    double best_cost = 0.0;
    int best_iter = 0;
    std::vector<LocalizeIterate> history;
    std::vector<std::string> warnings;  // dropped-constraint notices
};

/// Frank-Wolfe minimization of the clustering cost over ordered placements.
/// When windows is non-null the weak textual constraints derived from the
/// step assignment are enforced; conflicting constraints are dropped per item
/// in order of least step support, with a warning. Every iterate is rounded
/// through the classifier; the best rounded solution is returned.
LocalizeResult fw_localize(std::span<const FeatureStream> streams,
                           const ConstraintWindows* windows,
                           const textalign::StepAssignment& assignment,
                           const LocalizeOptions& options = {});

/// Rounds a relaxed stacked assignment: fits W* to it, then re-solves each
/// item's linear program with cost -2 X_n W*. Constraints, when given, must
/// be per item in stream order.
std::vector<std::vector<int>> round_solution(const Eigen::MatrixXd& relaxed,
                                             std::span<const FeatureStream> streams,
                                             double lambda,
                                             const std::vector<StepWindows>* constraints = nullptr);

/// Supervised training: fw_localize with ground-truth event windows as the
/// constraints; returns the fitted classifier (d x num_gt_steps).
Eigen::MatrixXd train_supervised(std::span<const FeatureStream> streams,
                                 const CorpusAnnotation& annotation, double lambda,
                                 const LocalizeOptions& options = {});

/// Ordered least-squares prediction for one unseen stream: ordered_oracle on
/// cost -2 X_n W with no textual constraints.
std::vector<int> predict_ordered(const Eigen::MatrixXd& classifier,
                                 const FeatureStream& stream);

/// Places step j at interval floor((j + 0.5) T / K), adjusted to remain
/// strictly increasing and within range.
std::vector<int> uniform_baseline(int intervals, int num_steps);

/// Throws unless placements are one interval per step, strictly increasing,
/// in range, and inside every supplied window mask.
void validate_placements(const std::vector<int>& placements, int intervals,
                         const StepWindows& windows = {});

}  // namespace saln::vidcluster
