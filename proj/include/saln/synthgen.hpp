#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "saln/textalign.hpp"
#include "saln/types.hpp"
#include "saln/vidcluster.hpp"

namespace saln::synthgen {

/// Knobs for synthetic corpus generation. Noise-rate defaults follow the
/// measured statistics of real instruction corpora (order error 6%, missing
/// steps 27%, repetition 14%); captions precede their actions by a lag drawn
/// from [lag_min_s, lag_max_s].
struct SynthConfig {
    int num_gt_steps = 8;
    int num_items = 30;
    int intervals_min = 40;
    int intervals_max = 80;
    int feature_dim = 20;

    double swap_rate = 0.06;
    double miss_rate = 0.27;
    double repeat_rate = 0.14;
    double distractor_token_rate = 0.15;

    double lag_min_s = 0.0;
    double lag_max_s = 10.0;
    double feature_noise_sigma = 0.5;
    std::uint64_t seed = 1;

    double interval_duration_s = 1.0;
    int event_len_min = 2;  // event length in intervals
    int event_len_max = 3;
    double caption_len_s = 2.0;
};

struct SynthCorpus {
    std::vector<TokenSequence> sequences;
    std::vector<FeatureStream> streams;
    CorpusAnnotation annotation;
    std::vector<Token> true_script;
};

/// Generates a corpus: per item, subsample steps (miss_rate), apply adjacent
/// swaps (swap_rate), duplicate steps (repeat_rate), place the surviving
/// events at increasing intervals, emit lagged caption tokens interleaved
/// with distractors, and draw features from each step's center at its event
/// intervals (pure noise elsewhere). Pure function of the config.
SynthCorpus generate(const SynthConfig& config);

/// Exhaustive search over joint monotone remappings. Caps: N <= 3, S_n <= 4,
/// num_slots <= 6; throws cap_error beyond them.
textalign::GlobalAlignment brute_force_msa(std::span<const TokenSequence> sequences,
                                           const textalign::TokenCostMatrix& cost,
                                           int num_slots);

/// Exhaustive minimization of the clustering cost over all feasible integer
/// placements. Caps: T_n <= 8, num_steps <= 3, N <= 4; throws cap_error
/// beyond them. windows must be per item, aligned with intervals_per_item.
std::vector<std::vector<int>> brute_force_localize(
    const vidcluster::ResidualKernel& kernel,
    const std::vector<vidcluster::StepWindows>& windows,
    const std::vector<int>& intervals_per_item, int num_steps);

}  // namespace saln::synthgen
