#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "saln/types.hpp"

namespace saln::textalign {

/// Pairwise alignment costs over the deduplicated token vocabulary.
/// Aligning any token with a gap costs 0 by convention; gaps are handled
/// structurally and never appear in this matrix.
struct TokenCostMatrix {
    std::vector<Token> vocabulary;
    Eigen::MatrixXd cost;  // D x D, symmetric
    std::map<Token, int> index;

    int index_of(const Token& tok) const;
    double at(const Token& a, const Token& b) const;
};

/// Monotone remapping of every sequence into a shared template of
/// num_slots slots. slot_of_token[n][s] is the slot of token s of item n;
/// the list is strictly increasing per item, so each token occupies
/// exactly one slot and order is preserved.
struct GlobalAlignment {
    int num_slots = 0;
    std::vector<std::vector<int>> slot_of_token;

    int num_items() const { return static_cast<int>(slot_of_token.size()); }
};

/// Selected ordered steps and the per-item token-to-step assignment.
/// step_of_token[n][s] is the step index of token s of item n, or -1 when
/// the token was not assigned to any selected step.
struct StepAssignment {
    int num_steps = 0;                           // k <= requested K
    std::vector<Token> labels;                   // representative token per step
    std::vector<int> slot_of_step;               // template slots, ascending
    std::vector<std::string> item_ids;           // aligned with step_of_token
    std::vector<std::vector<int>> step_of_token;
    std::string warning;                         // non-empty when k was forced to 0

    int num_items() const { return static_cast<int>(step_of_token.size()); }
};

struct MsaOptions {
    int num_slots = 0;       // 0 = auto: max(2 * max_n S_n, slots of the heuristic seed)
    int max_iters = 300;
    double rel_tol = 1e-7;   // stop when the relative objective change drops below this
    bool line_search = false;
    std::uint64_t seed = 0;
};

struct MsaIterate {
    int iter = 0;
    double relaxed_objective = 0.0;
    double corner_objective = 0.0;
    double best_objective = 0.0;  // running minimum over visited corners
};

struct MsaResult {
    GlobalAlignment alignment;  // best integer corner visited
    double objective = 0.0;     // its sum-of-pairs cost
    int best_iter = 0;
    std::vector<MsaIterate> history;
};

/// Builds the exact-match cost matrix over the deduplicated vocabulary:
/// match_reward on identical (verb, object) pairs, mismatch_penalty otherwise.
TokenCostMatrix build_token_cost(std::span<const TokenSequence> sequences,
                                 double match_reward = -1.0,
                                 double mismatch_penalty = 100.0);

/// Token-level pairwise cost: entry (s, s') is the cost of aligning token s
/// with token s' for the stacked corpus (S x S, symmetric).
Eigen::MatrixXd token_pair_cost_matrix(std::span<const TokenSequence> sequences,
                                       const TokenCostMatrix& cost);

/// Sum over unordered item pairs of the per-slot alignment costs; slots where
/// either item has a gap contribute 0.
double sum_of_pairs_cost(const GlobalAlignment& alignment,
                         std::span<const TokenSequence> sequences,
                         const TokenCostMatrix& cost);

/// Exact linear minimization over one item's monotone remappings: returns the
/// strictly increasing slot list minimizing the sum of gradient entries.
/// Ties prefer the smallest slot index.
std::vector<int> msa_linear_oracle(const Eigen::MatrixXd& gradient);

/// Frank-Wolfe on the continuous relaxation of the alignment problem.
/// Every integer corner returned by the oracle (plus the heuristic seed) is
/// retained; the result is the visited corner with the lowest sum-of-pairs
/// cost.
MsaResult fw_msa(std::span<const TokenSequence> sequences, const TokenCostMatrix& cost,
                 const MsaOptions& options = {});

/// Heuristic baseline: folds each sequence into a growing linear template in
/// input order via pairwise dynamic programming (gap cost 0).
GlobalAlignment progressive_align(std::span<const TokenSequence> sequences,
                                  const TokenCostMatrix& cost);

/// Ranks template slots by support and keeps the top k <= max_steps, reducing
/// k whenever the cut would split a group of equal-support slots. Selected
/// steps are ordered by template position.
StepAssignment extract_main_steps(const GlobalAlignment& alignment,
                                  std::span<const TokenSequence> sequences, int max_steps);

/// Throws unless the alignment is a valid strictly increasing remapping of the
/// given sequences.
void validate_alignment(const GlobalAlignment& alignment,
                        std::span<const TokenSequence> sequences);

}  // namespace saln::textalign
