#include "saln/vidcluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "saln/rng.hpp"

namespace saln::vidcluster {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::map<std::string, int> index_by_id(std::span<const std::string> ids) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!index.emplace(ids[i], static_cast<int>(i)).second)
            throw schema_error("duplicate item_id '" + ids[i] + "'");
    return index;
}

void mark_overlap(BinaryMatrix& marks, int row, double window_start, double window_end,
                  double dur, int intervals) {
    if (window_end > window_start) {
        // positive-measure overlap with [t*dur, (t+1)*dur)
        const int first = std::max(0, static_cast<int>(std::floor(window_start / dur)));
        for (int t = first; t < intervals; ++t) {
            if (t * dur >= window_end) break;
            if ((t + 1) * dur > window_start) marks(row, t) = 1;
        }
    } else {
        // degenerate span: mark the interval containing the point
        const int t = std::clamp(static_cast<int>(std::floor(window_start / dur)), 0,
                                 intervals - 1);
        if (intervals > 0) marks(row, t) = 1;
    }
}

// Greedy earliest placement; exact feasibility test for chained windows.
// Returns the first step that cannot be placed, or -1 when feasible.
int first_infeasible_step(const StepWindows& windows, int intervals, int num_steps) {
    int prev = -1;
    for (int k = 0; k < num_steps; ++k) {
        const bool constrained = k < static_cast<int>(windows.size()) && !windows[k].empty();
        int chosen = -1;
        if (constrained) {
            for (int t = prev + 1; t < intervals; ++t) {
                if (windows[k][t]) {
                    chosen = t;
                    break;
                }
            }
        } else if (prev + 1 < intervals) {
            chosen = prev + 1;
        }
        if (chosen < 0) return k;
        prev = chosen;
    }
    return -1;
}

struct StackedCorpus {
    Eigen::MatrixXd features;  // T x d
    std::vector<int> offsets;  // per item row offset
    std::vector<int> lengths;  // per item T_n
};

StackedCorpus stack_streams(std::span<const FeatureStream> streams) {
    if (streams.empty()) throw schema_error("no feature streams given");
    const int dim = streams[0].dim();
    int total = 0;
    for (const auto& s : streams) {
        if (s.dim() != dim)
            throw schema_error("feature dimension mismatch for item '" + s.item_id + "'");
        if (s.intervals() < 1)
            throw schema_error("item '" + s.item_id + "' has no intervals");
        total += s.intervals();
    }
    StackedCorpus stacked;
    stacked.features.resize(total, dim);
    int offset = 0;
    for (const auto& s : streams) {
        stacked.offsets.push_back(offset);
        stacked.lengths.push_back(s.intervals());
        stacked.features.middleRows(offset, s.intervals()) = s.features;
        offset += s.intervals();
    }
    return stacked;
}

Eigen::MatrixXd placements_to_dense(const std::vector<std::vector<int>>& placements,
                                    const StackedCorpus& stacked, int num_steps) {
    Eigen::MatrixXd dense =
        Eigen::MatrixXd::Zero(stacked.features.rows(), num_steps);
    for (std::size_t n = 0; n < placements.size(); ++n)
        for (int k = 0; k < num_steps; ++k)
            dense(stacked.offsets[n] + placements[n][k], k) = 1.0;
    return dense;
}

std::vector<std::vector<int>> round_with_kernel(const Eigen::MatrixXd& relaxed,
                                                const ResidualKernel& kernel,
                                                const StackedCorpus& stacked,
                                                const std::vector<StepWindows>& constraints) {
    const Eigen::MatrixXd classifier = kernel.classifier(relaxed);
    std::vector<std::vector<int>> placements(stacked.offsets.size());
    for (std::size_t n = 0; n < stacked.offsets.size(); ++n) {
        const Eigen::MatrixXd scores =
            stacked.features.middleRows(stacked.offsets[n], stacked.lengths[n]) * classifier;
        placements[n] = ordered_oracle(-2.0 * scores,
                                       n < constraints.size() ? constraints[n] : StepWindows{});
    }
    return placements;
}

struct CoreResult {
    std::vector<std::vector<int>> best_placements;
    double best_cost = kInf;
    int best_iter = 0;
    std::vector<LocalizeIterate> history;
    Eigen::MatrixXd classifier;
};

// Random feasible placement: a seeded walk over the allowed intervals, used
// to restart the search when a path converges before the budget is spent.
std::vector<int> random_feasible_placement(Rng& rng, const StepWindows& windows, int intervals,
                                           int num_steps) {
    std::vector<int> placements(num_steps);
    for (int attempt = 0; attempt < 32; ++attempt) {
        int prev = -1;
        bool ok = true;
        for (int k = 0; k < num_steps && ok; ++k) {
            std::vector<int> allowed;
            const bool constrained =
                k < static_cast<int>(windows.size()) && !windows[k].empty();
            const int slack = num_steps - 1 - k;
            for (int t = prev + 1; t < intervals - slack; ++t)
                if (!constrained || windows[k][t]) allowed.push_back(t);
            if (allowed.empty()) {
                ok = false;
                break;
            }
            prev = allowed[rng.uniform_int(0, static_cast<int>(allowed.size()) - 1)];
            placements[k] = prev;
        }
        if (ok) return placements;
    }
    // randomized walk painted itself into a corner; fall back to greedy
    int prev = -1;
    for (int k = 0; k < num_steps; ++k) {
        const bool constrained = k < static_cast<int>(windows.size()) && !windows[k].empty();
        int chosen = -1;
        for (int t = prev + 1; t < intervals; ++t) {
            if (!constrained || windows[k][t]) {
                chosen = t;
                break;
            }
        }
        if (chosen < 0) throw infeasible_error("no feasible placement for step " +
                                               std::to_string(k));
        placements[k] = prev = chosen;
    }
    return placements;
}

// Frank-Wolfe over the stacked relaxation with per-item linear oracles and
// classifier-based rounding at every iteration. A path that converges before
// the iteration budget is exhausted is restarted from a seeded random
// feasible corner; the best rounded solution over all paths is kept.
CoreResult core_localize(const StackedCorpus& stacked,
                         const std::vector<StepWindows>& constraints, int num_steps,
                         double lambda, const LocalizeOptions& options) {
    if (options.max_iters < 1) throw schema_error("fw_localize: max_iters must be >= 1");
    const int n_items = static_cast<int>(stacked.offsets.size());
    const ResidualKernel kernel(stacked.features, lambda, options.materialize_cap);

    std::vector<std::vector<int>> init(n_items);
    for (int n = 0; n < n_items; ++n)
        init[n] = uniform_baseline(stacked.lengths[n], num_steps);
    Eigen::MatrixXd iterate = placements_to_dense(init, stacked, num_steps);

    CoreResult result;
    // Re-fitting the classifier to a rounded point and re-solving the linear
    // programs minimizes the joint ridge objective coordinate-wise, so the
    // clustering cost can only go down. A few sweeps reach a fixpoint.
    auto refine = [&](std::vector<std::vector<int>> placements, double cost) {
        for (int sweep = 0; sweep < 10; ++sweep) {
            auto next = round_with_kernel(placements_to_dense(placements, stacked, num_steps),
                                          kernel, stacked, constraints);
            const double next_cost =
                clustering_cost(placements_to_dense(next, stacked, num_steps), kernel);
            if (next_cost >= cost - 1e-12) break;
            cost = next_cost;
            placements = std::move(next);
        }
        return std::make_pair(std::move(placements), cost);
    };

    // Each iteration yields feasible integer candidates: the classifier
    // rounding of the iterate, the direct projection of the iterate onto the
    // placement set, and the oracle corner. The best of them, refined to an
    // alternating-minimization fixpoint, is the iteration's rounded solution.
    auto record = [&](int iter, const Eigen::MatrixXd& relaxed,
                      const std::vector<std::vector<int>>* corner) {
        auto rounded = round_with_kernel(relaxed, kernel, stacked, constraints);
        double cost = clustering_cost(placements_to_dense(rounded, stacked, num_steps), kernel);

        std::vector<std::vector<int>> projected(stacked.offsets.size());
        for (std::size_t n = 0; n < stacked.offsets.size(); ++n)
            projected[n] = ordered_oracle(
                -2.0 * relaxed.middleRows(stacked.offsets[n], stacked.lengths[n]),
                n < constraints.size() ? constraints[n] : StepWindows{});
        const double projected_cost =
            clustering_cost(placements_to_dense(projected, stacked, num_steps), kernel);
        if (projected_cost < cost) {
            cost = projected_cost;
            rounded = std::move(projected);
        }
        if (corner) {
            const double corner_cost =
                clustering_cost(placements_to_dense(*corner, stacked, num_steps), kernel);
            if (corner_cost < cost) {
                cost = corner_cost;
                rounded = *corner;
            }
        }
        std::tie(rounded, cost) = refine(std::move(rounded), cost);
        if (cost < result.best_cost) {
            result.best_cost = cost;
            result.best_placements = rounded;
            result.best_iter = static_cast<int>(result.history.size());
        }
        result.history.push_back(
            {iter, clustering_cost(relaxed, kernel), cost, std::move(rounded)});
    };

    Rng restart_rng(options.seed);
    record(0, iterate, nullptr);
    double prev_cost = result.history.front().relaxed_cost;
    int path_step = 0;
    for (int t = 0; t < options.max_iters; ++t) {
        const Eigen::MatrixXd gradient = clustering_gradient(iterate, kernel);
        std::vector<std::vector<int>> corner(n_items);
        for (int n = 0; n < n_items; ++n)
            corner[n] = ordered_oracle(
                gradient.middleRows(stacked.offsets[n], stacked.lengths[n]),
                n < static_cast<int>(constraints.size()) ? constraints[n] : StepWindows{});

        const Eigen::MatrixXd direction =
            placements_to_dense(corner, stacked, num_steps) - iterate;
        double step = 2.0 / (path_step + 2.0);
        if (options.line_search) {
            const Eigen::MatrixXd bd = kernel.apply(direction);
            const double quad = 0.5 * direction.cwiseProduct(bd).sum();
            const double lin = direction.cwiseProduct(kernel.apply(iterate)).sum();
            step = quad > 0.0 ? std::clamp(-lin / (2.0 * quad), 0.0, 1.0)
                              : (quad + lin < 0.0 ? 1.0 : 0.0);
        }
        iterate += step * direction;
        ++path_step;

        record(t + 1, iterate, &corner);
        const double cost = result.history.back().relaxed_cost;
        if (std::abs(prev_cost - cost) <= options.rel_tol * std::max(1.0, std::abs(prev_cost))) {
            if (t + 1 >= options.max_iters) break;
            std::vector<std::vector<int>> fresh(n_items);
            for (int n = 0; n < n_items; ++n)
                fresh[n] = random_feasible_placement(
                    restart_rng,
                    n < static_cast<int>(constraints.size()) ? constraints[n] : StepWindows{},
                    stacked.lengths[n], num_steps);
            iterate = placements_to_dense(fresh, stacked, num_steps);
            path_step = 0;
            prev_cost = clustering_cost(iterate, kernel);
            continue;
        }
        prev_cost = cost;
    }

    result.classifier =
        kernel.classifier(placements_to_dense(result.best_placements, stacked, num_steps));
    return result;
}

}  // namespace

ResidualKernel::ResidualKernel(Eigen::MatrixXd features, double lambda, int materialize_cap)
    : features_(std::move(features)), lambda_(lambda) {
    if (lambda_ <= 0.0) throw schema_error("residual kernel: lambda must be > 0");
    if (!features_.allFinite()) throw schema_error("residual kernel: non-finite features");
    const int total = static_cast<int>(features_.rows());
    Eigen::MatrixXd gram = features_.transpose() * features_;
    gram.diagonal().array() += total * lambda_;
    gram_.compute(gram);
    if (total <= materialize_cap) {
        dense_ = Eigen::MatrixXd::Identity(total, total) -
                 features_ * gram_.solve(features_.transpose());
    }
}

Eigen::MatrixXd ResidualKernel::apply(const Eigen::MatrixXd& assignment) const {
    if (assignment.rows() != features_.rows())
        throw schema_error("residual kernel: assignment row count mismatch");
    // the factorized product costs T*d*K instead of T^2*K
    return assignment - features_ * gram_.solve(features_.transpose() * assignment);
}

Eigen::MatrixXd ResidualKernel::classifier(const Eigen::MatrixXd& assignment) const {
    if (assignment.rows() != features_.rows())
        throw schema_error("residual kernel: assignment row count mismatch");
    return gram_.solve(features_.transpose() * assignment);
}

double clustering_cost(const Eigen::MatrixXd& assignment, const ResidualKernel& kernel) {
    const double total = static_cast<double>(kernel.total_intervals());
    return assignment.cwiseProduct(kernel.apply(assignment)).sum() / (2.0 * total);
}

Eigen::MatrixXd clustering_gradient(const Eigen::MatrixXd& assignment,
                                    const ResidualKernel& kernel) {
    return kernel.apply(assignment) / static_cast<double>(kernel.total_intervals());
}

ConstraintWindows build_constraint_windows(std::span<const TokenSequence> sequences,
                                           std::span<const FeatureStream> streams,
                                           double delta_before_s, double delta_after_s) {
    if (delta_before_s < 0.0 || delta_after_s < 0.0)
        throw schema_error("constraint windows: deltas must be non-negative");

    std::vector<std::string> stream_ids;
    for (const auto& s : streams) stream_ids.push_back(s.item_id);
    const auto stream_index = index_by_id(stream_ids);

    std::vector<int> seq_of_stream(streams.size(), -1);
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        auto it = stream_index.find(sequences[i].item_id);
        if (it == stream_index.end())
            throw schema_error("no feature stream for item '" + sequences[i].item_id + "'");
        seq_of_stream[it->second] = static_cast<int>(i);
    }

    ConstraintWindows windows;
    windows.delta_before_s = delta_before_s;
    windows.delta_after_s = delta_after_s;
    for (std::size_t i = 0; i < streams.size(); ++i) {
        const auto& stream = streams[i];
        windows.item_ids.push_back(stream.item_id);
        const int seq_idx = seq_of_stream[i];
        const int rows = seq_idx < 0 ? 0 : sequences[seq_idx].length();
        BinaryMatrix marks = BinaryMatrix::Zero(rows, stream.intervals());
        if (seq_idx >= 0) {
            validate_sequence(sequences[seq_idx]);
            for (int s = 0; s < rows; ++s) {
                const auto& span = sequences[seq_idx].spans[s];
                mark_overlap(marks, s, span.start_s - delta_before_s, span.end_s + delta_after_s,
                             stream.interval_duration_s, stream.intervals());
            }
        }
        windows.marks.push_back(std::move(marks));
    }
    return windows;
}

StepWindows resolve_step_windows(const BinaryMatrix& marks,
                                 const std::vector<int>& step_of_token, int num_steps) {
    if (marks.rows() != static_cast<Eigen::Index>(step_of_token.size()))
        throw schema_error("constraint marks do not match the step assignment rows");
    StepWindows windows(num_steps);
    const int intervals = static_cast<int>(marks.cols());
    for (std::size_t s = 0; s < step_of_token.size(); ++s) {
        const int k = step_of_token[s];
        if (k < 0) continue;
        if (k >= num_steps) throw schema_error("step index out of range in assignment");
        if (windows[k].empty()) windows[k].assign(intervals, 0);
        for (int t = 0; t < intervals; ++t)
            if (marks(s, t)) windows[k][t] = 1;
    }
    return windows;
}

std::vector<int> ordered_oracle(const Eigen::MatrixXd& costs, const StepWindows& windows) {
    const int intervals = static_cast<int>(costs.rows());
    const int num_steps = static_cast<int>(costs.cols());
    if (num_steps == 0) return {};
    if (!costs.allFinite()) throw schema_error("ordered placement: non-finite costs");
    if (intervals < num_steps)
        throw infeasible_error("ordered placement: " + std::to_string(intervals) +
                               " intervals for " + std::to_string(num_steps) + " steps");
    for (const auto& mask : windows)
        if (!mask.empty() && static_cast<int>(mask.size()) != intervals)
            throw schema_error("window mask length does not match interval count");
    {
        const int violated = first_infeasible_step(windows, intervals, num_steps);
        if (violated >= 0)
            throw infeasible_error("ordered placement infeasible at step " +
                                       std::to_string(violated),
                                   violated);
    }

    // Padded cost matrix: subtract the global minimum, interleave zero
    // columns between the step columns, forbid cells outside the windows and
    // append a zero bottom row. Each row of the padded matrix is assigned to
    // exactly one column along a monotone path; odd columns are hit exactly
    // once and encode the step placements.
    const double shift = costs.minCoeff();
    const int pad_rows = intervals + 1;
    const int pad_cols = 2 * num_steps + 1;
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(pad_rows, pad_cols);
    for (int k = 0; k < num_steps; ++k) {
        const bool constrained = k < static_cast<int>(windows.size()) && !windows[k].empty();
        for (int t = 0; t < intervals; ++t) {
            const bool allowed = !constrained || windows[k][t];
            padded(t, 2 * k + 1) = allowed ? costs(t, k) - shift : kInf;
        }
        padded(intervals, 2 * k + 1) = kInf;  // the padding row holds no step
    }

    // cost(t, j): best path cost with row t assigned to column j. Rows may
    // stay only in even (dummy) columns; advancing by two columns lets
    // consecutive steps occupy consecutive rows.
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(pad_rows, pad_cols, kInf);
    Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> from(pad_rows, pad_cols);
    from.setConstant(-1);
    cost(0, 0) = padded(0, 0);
    if (pad_cols > 1) cost(0, 1) = padded(0, 1);
    for (int t = 1; t < pad_rows; ++t) {
        for (int j = 0; j < pad_cols; ++j) {
            if (!std::isfinite(padded(t, j))) continue;
            double best = kInf;
            std::int8_t arg = -1;
            // Ties prefer the larger predecessor column, which advances the
            // path as early as possible and yields the earliest placements.
            if (j % 2 == 0) {
                if (cost(t - 1, j) < best) {
                    best = cost(t - 1, j);
                    arg = 0;
                }
                if (j >= 1 && cost(t - 1, j - 1) < best) {
                    best = cost(t - 1, j - 1);
                    arg = 1;
                }
            } else {
                if (j >= 1 && cost(t - 1, j - 1) < best) {
                    best = cost(t - 1, j - 1);
                    arg = 1;
                }
                if (j >= 2 && cost(t - 1, j - 2) < best) {
                    best = cost(t - 1, j - 2);
                    arg = 2;
                }
            }
            if (arg >= 0) {
                cost(t, j) = best + padded(t, j);
                from(t, j) = arg;
            }
        }
    }

    if (!std::isfinite(cost(pad_rows - 1, pad_cols - 1)))
        throw infeasible_error("ordered placement infeasible");

    std::vector<int> placements(num_steps, -1);
    int j = pad_cols - 1;
    for (int t = pad_rows - 1; t >= 0; --t) {
        if (j % 2 == 1) placements[(j - 1) / 2] = t;
        if (t > 0) j -= from(t, j);
    }
    return placements;
}

std::vector<int> ordered_oracle(const Eigen::MatrixXd& costs, const BinaryMatrix& marks,
                                const std::vector<int>& step_of_token) {
    return ordered_oracle(costs,
                          resolve_step_windows(marks, step_of_token,
                                               static_cast<int>(costs.cols())));
}

LocalizeResult fw_localize(std::span<const FeatureStream> streams,
                           const ConstraintWindows* windows,
                           const textalign::StepAssignment& assignment,
                           const LocalizeOptions& options) {
    const int num_steps = assignment.num_steps;
    if (num_steps < 1) throw schema_error("fw_localize: step assignment has no steps");
    for (const auto& stream : streams)
        if (stream.intervals() < num_steps)
            throw infeasible_error("item '" + stream.item_id + "': " +
                                   std::to_string(stream.intervals()) + " intervals cannot hold " +
                                   std::to_string(num_steps) + " ordered steps");

    const StackedCorpus stacked = stack_streams(streams);
    const int n_items = static_cast<int>(streams.size());

    LocalizeResult result;
    std::vector<StepWindows> constraints(n_items);
    if (windows) {
        const auto assign_index = index_by_id(assignment.item_ids);
        const auto window_index = index_by_id(windows->item_ids);

        // Corpus-wide support per step, used to order constraint drops.
        std::vector<int> support(num_steps, 0);
        for (const auto& steps : assignment.step_of_token)
            for (int k : steps)
                if (k >= 0) ++support[k];

        for (int n = 0; n < n_items; ++n) {
            const auto& id = streams[n].item_id;
            auto ait = assign_index.find(id);
            auto wit = window_index.find(id);
            if (ait == assign_index.end() || wit == window_index.end()) continue;
            constraints[n] = resolve_step_windows(windows->marks[wit->second],
                                                  assignment.step_of_token[ait->second],
                                                  num_steps);
            // Conflicting textual constraints are dropped for this item in
            // order of least step support until a feasible placement exists.
            while (first_infeasible_step(constraints[n], stacked.lengths[n], num_steps) >= 0) {
                int drop = -1;
                for (int k = 0; k < num_steps; ++k) {
                    if (constraints[n][k].empty()) continue;
                    if (drop < 0 || support[k] < support[drop] ||
                        (support[k] == support[drop] && k > drop))
                        drop = k;
                }
                if (drop < 0)
                    throw infeasible_error("item '" + id +
                                           "': infeasible even without textual constraints");
                constraints[n][drop].clear();
                result.warnings.push_back("item '" + id + "': dropped textual constraint for step " +
                                          std::to_string(drop));
            }
        }
    }

    double lambda = options.lambda;
    if (lambda <= 0.0) lambda = 1.0 / (static_cast<double>(n_items) * num_steps);

    CoreResult core = core_localize(stacked, constraints, num_steps, lambda, options);

    result.best_cost = core.best_cost;
    result.best_iter = core.best_iter;
    result.history = std::move(core.history);
    result.localization.lambda = lambda;
    result.localization.classifier = std::move(core.classifier);
    for (int n = 0; n < n_items; ++n)
        result.localization.items.push_back({streams[n].item_id, core.best_placements[n],
                                             streams[n].intervals(),
                                             streams[n].interval_duration_s});
    return result;
}

std::vector<std::vector<int>> round_solution(const Eigen::MatrixXd& relaxed,
                                             std::span<const FeatureStream> streams,
                                             double lambda,
                                             const std::vector<StepWindows>* constraints) {
    const StackedCorpus stacked = stack_streams(streams);
    if (relaxed.rows() != stacked.features.rows())
        throw schema_error("round_solution: relaxed assignment row count mismatch");
    for (std::size_t n = 0; n < stacked.offsets.size(); ++n) {
        const auto block = relaxed.middleRows(stacked.offsets[n], stacked.lengths[n]);
        if (block.minCoeff() < -1e-9 ||
            (block.colwise().sum().array() - 1.0).abs().maxCoeff() > 1e-6)
            throw schema_error("round_solution: relaxed point outside the polytope");
    }
    const ResidualKernel kernel(stacked.features, lambda);
    return round_with_kernel(relaxed, kernel, stacked,
                             constraints ? *constraints : std::vector<StepWindows>{});
}

Eigen::MatrixXd train_supervised(std::span<const FeatureStream> streams,
                                 const CorpusAnnotation& annotation, double lambda,
                                 const LocalizeOptions& options) {
    validate_annotation(annotation);
    if (lambda <= 0.0) throw schema_error("train_supervised: lambda must be > 0");
    const StackedCorpus stacked = stack_streams(streams);
    const int num_steps = annotation.num_gt_steps;

    std::vector<std::string> ann_ids;
    for (const auto& item : annotation.items) ann_ids.push_back(item.item_id);
    const auto ann_index = index_by_id(ann_ids);

    std::vector<StepWindows> constraints(streams.size());
    for (std::size_t n = 0; n < streams.size(); ++n) {
        auto it = ann_index.find(streams[n].item_id);
        if (it == ann_index.end()) continue;
        const auto& events = annotation.items[it->second].events;
        BinaryMatrix marks = BinaryMatrix::Zero(static_cast<int>(events.size()),
                                                streams[n].intervals());
        std::vector<int> event_step(events.size());
        for (std::size_t e = 0; e < events.size(); ++e) {
            event_step[e] = events[e].step;
            mark_overlap(marks, static_cast<int>(e), events[e].start_s, events[e].end_s,
                         streams[n].interval_duration_s, streams[n].intervals());
        }
        constraints[n] = resolve_step_windows(marks, event_step, num_steps);
        const int violated =
            first_infeasible_step(constraints[n], streams[n].intervals(), num_steps);
        if (violated >= 0)
            throw infeasible_error("item '" + streams[n].item_id +
                                       "': ground-truth annotations admit no ordered placement " +
                                       "(step " + std::to_string(violated) + ")",
                                   violated);
    }

    CoreResult core = core_localize(stacked, constraints, num_steps, lambda, options);
    return core.classifier;
}

std::vector<int> predict_ordered(const Eigen::MatrixXd& classifier, const FeatureStream& stream) {
    if (stream.dim() != classifier.rows())
        throw schema_error("predict_ordered: classifier dimension mismatch");
    if (stream.intervals() < static_cast<int>(classifier.cols()))
        throw infeasible_error("predict_ordered: fewer intervals than steps");
    return ordered_oracle(-2.0 * (stream.features * classifier));
}

std::vector<int> uniform_baseline(int intervals, int num_steps) {
    if (num_steps < 1) throw schema_error("uniform baseline: num_steps must be >= 1");
    if (intervals < num_steps)
        throw infeasible_error("uniform baseline: fewer intervals than steps");
    std::vector<int> placements(num_steps);
    for (int j = 0; j < num_steps; ++j) {
        placements[j] = static_cast<int>((2LL * j + 1) * intervals / (2LL * num_steps));
        if (j > 0) placements[j] = std::max(placements[j], placements[j - 1] + 1);
    }
    for (int j = num_steps - 1; j >= 0; --j) {
        const int cap = intervals - num_steps + j;
        if (placements[j] > cap) placements[j] = cap;
    }
    return placements;
}

void validate_placements(const std::vector<int>& placements, int intervals,
                         const StepWindows& windows) {
    int prev = -1;
    for (std::size_t k = 0; k < placements.size(); ++k) {
        const int t = placements[k];
        if (t <= prev || t >= intervals)
            throw error("placements are not strictly increasing interval indices");
        if (k < windows.size() && !windows[k].empty() && !windows[k][t])
            throw error("placement for step " + std::to_string(k) + " violates its window");
        prev = t;
    }
}

}  // namespace saln::vidcluster
