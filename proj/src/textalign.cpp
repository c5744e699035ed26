#include "saln/textalign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "saln/rng.hpp"

namespace saln::textalign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int max_sequence_length(std::span<const TokenSequence> sequences) {
    int maxlen = 0;
    for (const auto& seq : sequences) maxlen = std::max(maxlen, seq.length());
    return maxlen;
}

// Vocabulary index of every token position, stacked in item order.
std::vector<std::vector<int>> vocab_indices(std::span<const TokenSequence> sequences,
                                            const TokenCostMatrix& cost) {
    std::vector<std::vector<int>> ids(sequences.size());
    for (std::size_t n = 0; n < sequences.size(); ++n) {
        ids[n].reserve(sequences[n].tokens.size());
        for (const auto& tok : sequences[n].tokens) ids[n].push_back(cost.index_of(tok));
    }
    return ids;
}

double alignment_cost_by_indices(const GlobalAlignment& alignment,
                                 const std::vector<std::vector<int>>& ids,
                                 const Eigen::MatrixXd& cost) {
    double total = 0.0;
    const int n_items = alignment.num_items();
    for (int n = 0; n < n_items; ++n) {
        for (int m = n + 1; m < n_items; ++m) {
            const auto& a = alignment.slot_of_token[n];
            const auto& b = alignment.slot_of_token[m];
            std::size_t i = 0, j = 0;
            while (i < a.size() && j < b.size()) {
                if (a[i] == b[j]) {
                    total += cost(ids[n][i], ids[m][j]);
                    ++i;
                    ++j;
                } else if (a[i] < b[j]) {
                    ++i;
                } else {
                    ++j;
                }
            }
        }
    }
    return total;
}

Eigen::MatrixXd corner_to_dense(const GlobalAlignment& corner, int total_tokens) {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(total_tokens, corner.num_slots);
    int row = 0;
    for (const auto& slots : corner.slot_of_token)
        for (int slot : slots) dense(row++, slot) = 1.0;
    return dense;
}

// Token-pair cost with self-pair (diagonal) blocks zeroed, so the stacked
// quadratic form counts cross-item pairs only.
Eigen::MatrixXd cross_pair_matrix(std::span<const TokenSequence> sequences,
                                  const TokenCostMatrix& cost) {
    Eigen::MatrixXd pair = token_pair_cost_matrix(sequences, cost);
    int offset = 0;
    for (const auto& seq : sequences) {
        const int len = seq.length();
        pair.block(offset, offset, len, len).setZero();
        offset += len;
    }
    return pair;
}

}  // namespace

int TokenCostMatrix::index_of(const Token& tok) const {
    auto it = index.find(tok);
    if (it == index.end())
        throw schema_error("token '" + tok.str() + "' missing from cost vocabulary");
    return it->second;
}

double TokenCostMatrix::at(const Token& a, const Token& b) const {
    return cost(index_of(a), index_of(b));
}

TokenCostMatrix build_token_cost(std::span<const TokenSequence> sequences, double match_reward,
                                 double mismatch_penalty) {
    TokenCostMatrix result;
    for (const auto& seq : sequences) {
        validate_sequence(seq);
        for (const auto& tok : seq.tokens)
            if (result.index.emplace(tok, 0).second) result.vocabulary.push_back(tok);
    }
    if (result.vocabulary.empty()) throw schema_error("empty corpus: no tokens in any sequence");
    std::sort(result.vocabulary.begin(), result.vocabulary.end());
    for (std::size_t i = 0; i < result.vocabulary.size(); ++i)
        result.index[result.vocabulary[i]] = static_cast<int>(i);

    const int vocab = static_cast<int>(result.vocabulary.size());
    result.cost = Eigen::MatrixXd::Constant(vocab, vocab, mismatch_penalty);
    result.cost.diagonal().setConstant(match_reward);
    return result;
}

Eigen::MatrixXd token_pair_cost_matrix(std::span<const TokenSequence> sequences,
                                       const TokenCostMatrix& cost) {
    std::vector<int> flat;
    for (const auto& seq : sequences)
        for (const auto& tok : seq.tokens) flat.push_back(cost.index_of(tok));
    const int total = static_cast<int>(flat.size());
    Eigen::MatrixXd pair(total, total);
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j) pair(i, j) = cost.cost(flat[i], flat[j]);
    return pair;
}

void validate_alignment(const GlobalAlignment& alignment,
                        std::span<const TokenSequence> sequences) {
    if (alignment.slot_of_token.size() != sequences.size())
        throw schema_error("alignment item count does not match corpus");
    for (std::size_t n = 0; n < sequences.size(); ++n) {
        const auto& slots = alignment.slot_of_token[n];
        if (static_cast<int>(slots.size()) != sequences[n].length())
            throw schema_error("alignment length mismatch for item '" + sequences[n].item_id + "'");
        int prev = -1;
        for (int slot : slots) {
            if (slot <= prev || slot >= alignment.num_slots)
                throw schema_error("alignment for item '" + sequences[n].item_id +
                                   "' is not a strictly increasing remapping");
            prev = slot;
        }
    }
}

double sum_of_pairs_cost(const GlobalAlignment& alignment,
                         std::span<const TokenSequence> sequences, const TokenCostMatrix& cost) {
    validate_alignment(alignment, sequences);
    return alignment_cost_by_indices(alignment, vocab_indices(sequences, cost), cost.cost);
}

std::vector<int> msa_linear_oracle(const Eigen::MatrixXd& gradient) {
    const int tokens = static_cast<int>(gradient.rows());
    const int slots = static_cast<int>(gradient.cols());
    if (slots < tokens)
        throw infeasible_error("linear oracle: fewer slots than tokens (" +
                               std::to_string(slots) + " < " + std::to_string(tokens) + ")");
    if (tokens == 0) return {};

    // best(s, l): optimal cost of placing tokens s.. into slots l.. ;
    // choice records whether token s takes slot l. Ties prefer taking, which
    // yields the smallest slot indices.
    Eigen::MatrixXd best = Eigen::MatrixXd::Constant(tokens + 1, slots + 1, kInf);
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> take(tokens + 1, slots + 1);
    take.setZero();
    best.row(tokens).setZero();
    for (int s = tokens - 1; s >= 0; --s) {
        for (int l = slots - (tokens - s); l >= 0; --l) {
            const double assigned = gradient(s, l) + best(s + 1, l + 1);
            const double skipped = best(s, l + 1);
            if (assigned <= skipped) {
                best(s, l) = assigned;
                take(s, l) = 1;
            } else {
                best(s, l) = skipped;
            }
        }
    }

    std::vector<int> result;
    result.reserve(tokens);
    int s = 0, l = 0;
    while (s < tokens) {
        if (take(s, l)) {
            result.push_back(l);
            ++s;
        }
        ++l;
    }
    return result;
}

GlobalAlignment progressive_align(std::span<const TokenSequence> sequences,
                                  const TokenCostMatrix& cost) {
    if (sequences.empty()) throw schema_error("progressive alignment: empty corpus");
    const auto ids = vocab_indices(sequences, cost);

    struct Slot {
        std::vector<std::pair<int, int>> members;  // (item, token)
        std::vector<int> vocab;                    // member vocabulary indices
    };
    std::vector<Slot> slots;
    for (int s = 0; s < sequences[0].length(); ++s)
        slots.push_back({{{0, s}}, {ids[0][s]}});

    for (std::size_t n = 1; n < sequences.size(); ++n) {
        const int rows = static_cast<int>(slots.size());
        const int cols = static_cast<int>(ids[n].size());
        auto match = [&](int slot, int tok) {
            double c = 0.0;
            for (int v : slots[slot].vocab) c += cost.cost(ids[n][tok], v);
            return c;
        };

        // dp(i, j): best cost of aligning the first i slots with the first j
        // tokens; moves are match, skip-slot (gap in the new sequence) and
        // insert-token (new slot), the last two at gap cost 0.
        Eigen::MatrixXd dp = Eigen::MatrixXd::Constant(rows + 1, cols + 1, kInf);
        Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> move(rows + 1, cols + 1);
        enum : std::uint8_t { kDiag = 1, kSkipSlot = 2, kInsert = 3 };
        dp(0, 0) = 0.0;
        move.setZero();
        for (int i = 0; i <= rows; ++i) {
            for (int j = 0; j <= cols; ++j) {
                if (i == 0 && j == 0) continue;
                double bestc = kInf;
                std::uint8_t bestm = 0;
                if (i > 0 && j > 0) {
                    const double c = dp(i - 1, j - 1) + match(i - 1, j - 1);
                    if (c < bestc) {
                        bestc = c;
                        bestm = kDiag;
                    }
                }
                if (i > 0 && dp(i - 1, j) < bestc) {
                    bestc = dp(i - 1, j);
                    bestm = kSkipSlot;
                }
                if (j > 0 && dp(i, j - 1) < bestc) {
                    bestc = dp(i, j - 1);
                    bestm = kInsert;
                }
                dp(i, j) = bestc;
                move(i, j) = bestm;
            }
        }

        std::vector<std::uint8_t> ops;
        for (int i = rows, j = cols; i > 0 || j > 0;) {
            const std::uint8_t m = move(i, j);
            ops.push_back(m);
            if (m == kDiag) {
                --i;
                --j;
            } else if (m == kSkipSlot) {
                --i;
            } else {
                --j;
            }
        }
        std::reverse(ops.begin(), ops.end());

        std::vector<Slot> merged;
        merged.reserve(slots.size() + ids[n].size());
        int i = 0, j = 0;
        for (std::uint8_t op : ops) {
            if (op == kDiag) {
                Slot slot = std::move(slots[i++]);
                slot.members.emplace_back(static_cast<int>(n), j);
                slot.vocab.push_back(ids[n][j]);
                merged.push_back(std::move(slot));
                ++j;
            } else if (op == kSkipSlot) {
                merged.push_back(std::move(slots[i++]));
            } else {
                merged.push_back({{{static_cast<int>(n), j}}, {ids[n][j]}});
                ++j;
            }
        }
        slots = std::move(merged);
    }

    GlobalAlignment alignment;
    alignment.num_slots = static_cast<int>(slots.size());
    alignment.slot_of_token.resize(sequences.size());
    for (std::size_t n = 0; n < sequences.size(); ++n)
        alignment.slot_of_token[n].resize(sequences[n].tokens.size());
    for (std::size_t l = 0; l < slots.size(); ++l)
        for (auto [item, tok] : slots[l].members)
            alignment.slot_of_token[item][tok] = static_cast<int>(l);
    validate_alignment(alignment, sequences);
    return alignment;
}

MsaResult fw_msa(std::span<const TokenSequence> sequences, const TokenCostMatrix& cost,
                 const MsaOptions& options) {
    if (options.max_iters < 1) throw schema_error("fw_msa: max_iters must be >= 1");
    if (sequences.empty()) throw schema_error("fw_msa: empty corpus");

    const int max_len = max_sequence_length(sequences);
    const GlobalAlignment seed_alignment = progressive_align(sequences, cost);

    int num_slots = options.num_slots;
    if (num_slots == 0) num_slots = std::max(2 * max_len, seed_alignment.num_slots);
    if (num_slots < max_len)
        throw infeasible_error("fw_msa: num_slots " + std::to_string(num_slots) +
                               " below longest sequence " + std::to_string(max_len));

    const auto ids = vocab_indices(sequences, cost);
    const Eigen::MatrixXd pair = cross_pair_matrix(sequences, cost);
    const int total_tokens = static_cast<int>(pair.rows());

    std::vector<int> offsets;
    offsets.reserve(sequences.size());
    for (int off = 0; const auto& seq : sequences) {
        offsets.push_back(off);
        off += seq.length();
    }

    auto corner_cost = [&](const GlobalAlignment& corner) {
        return alignment_cost_by_indices(corner, ids, cost.cost);
    };
    // Unordered-pair objective: the quadratic form counts each ordered cross
    // pair once, i.e. each unordered pair twice.
    auto relaxed_cost = [&](const Eigen::MatrixXd& iterate) {
        return 0.5 * (iterate.transpose() * (pair * iterate)).trace();
    };

    // The heuristic corner seeds the candidate set, so the rounded result is
    // never worse than the baseline. The iterate itself starts from a
    // fractional mixture of corners: an integer corner that is its own
    // oracle minimizer is stationary for Frank-Wolfe, so starting on one
    // would end the search immediately.
    GlobalAlignment seed_corner;
    seed_corner.num_slots = num_slots;
    if (seed_alignment.num_slots <= num_slots) {
        seed_corner.slot_of_token = seed_alignment.slot_of_token;
    } else {
        // Heuristic template wider than the requested one; fall back to the
        // identity corner.
        seed_corner.slot_of_token.resize(sequences.size());
        for (std::size_t n = 0; n < sequences.size(); ++n) {
            seed_corner.slot_of_token[n].resize(sequences[n].tokens.size());
            std::iota(seed_corner.slot_of_token[n].begin(), seed_corner.slot_of_token[n].end(),
                      0);
        }
    }

    MsaResult result;
    result.alignment = seed_corner;
    result.objective = corner_cost(seed_corner);
    result.best_iter = -1;  // seed corner

    Rng rng(options.seed);
    auto dense_of = [&](const std::vector<std::vector<int>>& slots) {
        GlobalAlignment corner;
        corner.num_slots = num_slots;
        corner.slot_of_token = slots;
        return corner_to_dense(corner, total_tokens);
    };
    auto random_corner_slots = [&]() {
        std::vector<std::vector<int>> slots(sequences.size());
        for (std::size_t n = 0; n < sequences.size(); ++n) {
            const int len = sequences[n].length();
            int slot = -1;
            for (int s = 0; s < len; ++s) {
                slot = rng.uniform_int(slot + 1, num_slots - (len - s));
                slots[n].push_back(slot);
            }
        }
        return slots;
    };

    // Initial point: a fractional mixture centered on the heuristic corner.
    // Starting on an integer corner that is its own oracle minimizer would be
    // Frank-Wolfe-stationary and end the search immediately.
    Eigen::MatrixXd iterate = 6.0 * corner_to_dense(seed_corner, total_tokens);
    {
        std::vector<std::vector<int>> left(sequences.size()), right(sequences.size());
        for (std::size_t n = 0; n < sequences.size(); ++n) {
            const int len = sequences[n].length();
            left[n].resize(len);
            right[n].resize(len);
            std::iota(left[n].begin(), left[n].end(), 0);
            std::iota(right[n].begin(), right[n].end(), num_slots - len);
        }
        iterate += dense_of(left) + dense_of(right) + dense_of(random_corner_slots()) +
                   dense_of(random_corner_slots());
        iterate /= 10.0;
    }
    double prev_relaxed = relaxed_cost(iterate);

    int path_step = 0;
    for (int t = 0; t < options.max_iters; ++t) {
        const Eigen::MatrixXd gradient = pair * iterate;

        GlobalAlignment corner;
        corner.num_slots = num_slots;
        corner.slot_of_token.resize(sequences.size());
        for (std::size_t n = 0; n < sequences.size(); ++n) {
            const int len = sequences[n].length();
            corner.slot_of_token[n] =
                msa_linear_oracle(gradient.block(offsets[n], 0, len, num_slots));
        }

        const double corner_obj = corner_cost(corner);
        if (corner_obj < result.objective) {
            result.objective = corner_obj;
            result.alignment = corner;
            result.best_iter = t;
        }

        const Eigen::MatrixXd direction = corner_to_dense(corner, total_tokens) - iterate;
        double step = 2.0 / (path_step + 2.0);
        if (options.line_search) {
            const Eigen::MatrixXd bd = pair * direction;
            const double quad = 0.5 * (direction.transpose() * bd).trace();
            const double lin = (direction.transpose() * (pair * iterate)).trace();
            if (quad > 0.0)
                step = std::clamp(-lin / (2.0 * quad), 0.0, 1.0);
            else
                step = (quad + lin < 0.0) ? 1.0 : 0.0;
        }
        iterate += step * direction;
        ++path_step;

        const double relaxed = relaxed_cost(iterate);
        if (!std::isfinite(relaxed)) throw error("fw_msa: non-finite relaxed objective");
        result.history.push_back({t, relaxed, corner_obj, result.objective});

        const double change = std::abs(prev_relaxed - relaxed);
        if (change <= options.rel_tol * std::max(1.0, std::abs(prev_relaxed))) {
            // The relaxation is non-convex; when a path settles before the
            // budget is spent, explore again from a mixture around the best
            // corner found so far.
            if (t + 1 >= options.max_iters) break;
            iterate = (4.0 * corner_to_dense(result.alignment, total_tokens) +
                       dense_of(random_corner_slots()) + dense_of(random_corner_slots())) /
                      6.0;
            path_step = 0;
            prev_relaxed = relaxed_cost(iterate);
            continue;
        }
        prev_relaxed = relaxed;
    }
    return result;
}

StepAssignment extract_main_steps(const GlobalAlignment& alignment,
                                  std::span<const TokenSequence> sequences, int max_steps) {
    if (max_steps < 1) throw schema_error("extract_main_steps: requested K must be >= 1");
    validate_alignment(alignment, sequences);

    std::vector<int> support(alignment.num_slots, 0);
    for (const auto& slots : alignment.slot_of_token)
        for (int slot : slots) ++support[slot];

    std::vector<int> candidates;
    for (int l = 0; l < alignment.num_slots; ++l)
        if (support[l] > 0) candidates.push_back(l);
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        if (support[a] != support[b]) return support[a] > support[b];
        return a < b;
    });

    StepAssignment assignment;
    assignment.step_of_token.resize(sequences.size());
    for (std::size_t n = 0; n < sequences.size(); ++n) {
        assignment.item_ids.push_back(sequences[n].item_id);
        assignment.step_of_token[n].assign(sequences[n].tokens.size(), -1);
    }

    if (candidates.empty()) {
        assignment.warning = "alignment has no occupied slots; no steps extracted";
        return assignment;
    }

    int keep = static_cast<int>(candidates.size());
    if (keep > max_steps) {
        const int cutoff = support[candidates[max_steps - 1]];
        if (support[candidates[max_steps]] == cutoff) {
            // Taking the top K would split a group of equal-support slots;
            // shrink k to exclude the whole tied group.
            keep = 0;
            while (keep < max_steps && support[candidates[keep]] > cutoff) ++keep;
        } else {
            keep = max_steps;
        }
    }
    if (keep == 0) {
        assignment.warning = "tied slot supports span beyond K; no steps remain";
        return assignment;
    }

    assignment.slot_of_step.assign(candidates.begin(), candidates.begin() + keep);
    std::sort(assignment.slot_of_step.begin(), assignment.slot_of_step.end());
    assignment.num_steps = keep;

    std::map<int, int> step_of_slot;
    for (int j = 0; j < keep; ++j) step_of_slot[assignment.slot_of_step[j]] = j;

    std::vector<std::map<Token, int>> label_counts(keep);
    for (std::size_t n = 0; n < sequences.size(); ++n) {
        const auto& slots = alignment.slot_of_token[n];
        for (std::size_t s = 0; s < slots.size(); ++s) {
            auto it = step_of_slot.find(slots[s]);
            if (it == step_of_slot.end()) continue;
            assignment.step_of_token[n][s] = it->second;
            ++label_counts[it->second][sequences[n].tokens[s]];
        }
    }

    assignment.labels.resize(keep);
    for (int j = 0; j < keep; ++j) {
        int best_count = 0;
        for (const auto& [tok, count] : label_counts[j]) {
            if (count > best_count) {  // map order breaks ties lexicographically
                best_count = count;
                assignment.labels[j] = tok;
            }
        }
    }
    return assignment;
}

}  // namespace saln::textalign
