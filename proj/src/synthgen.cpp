#include "saln/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "saln/rng.hpp"

namespace saln::synthgen {

namespace {

const char* kVerbs[] = {"open",   "loosen", "lift",  "place", "attach", "fill",
                        "turn",   "press",  "remove", "check", "pour",   "start",
                        "lower",  "tighten", "connect", "screw"};
const char* kObjects[] = {"valve",  "panel", "lever", "bracket", "filter", "tank",
                          "knob",   "latch", "cable", "gauge",   "spout",  "handle",
                          "clamp",  "socket", "hose",  "frame"};
constexpr int kWords = 16;

Token script_token(int step) {
    Token tok{kVerbs[step % kWords], kObjects[step % kWords]};
    if (step >= kWords) tok.object += "_" + std::to_string(step / kWords);
    return tok;
}

void validate_config(const SynthConfig& c) {
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (c.num_gt_steps < 1 || c.num_items < 1 || c.feature_dim < 1)
        throw schema_error("synth config: sizes must be positive");
    if (!rate_ok(c.swap_rate) || !rate_ok(c.miss_rate) || !rate_ok(c.repeat_rate) ||
        !rate_ok(c.distractor_token_rate))
        throw schema_error("synth config: rates must lie in [0, 1]");
    if (c.intervals_min < c.num_gt_steps || c.intervals_max < c.intervals_min)
        throw schema_error("synth config: interval range invalid or below num_gt_steps");
    if (c.lag_min_s < 0.0 || c.lag_max_s < c.lag_min_s)
        throw schema_error("synth config: lag range invalid");
    if (c.event_len_min < 1 || c.event_len_max < c.event_len_min)
        throw schema_error("synth config: event length range invalid");
    if (c.interval_duration_s <= 0.0 || c.feature_noise_sigma < 0.0 || c.caption_len_s < 0.0)
        throw schema_error("synth config: durations and sigma must be non-negative");
}

// Split `slack` into `parts` non-negative integers, proportional to
// exponential draws, exact by largest remainder.
std::vector<int> random_composition(Rng& rng, int slack, int parts) {
    std::vector<int> gaps(parts, 0);
    if (parts == 0 || slack == 0) return gaps;
    std::vector<double> weights(parts);
    double total = 0.0;
    for (double& w : weights) {
        w = -std::log(1.0 - rng.uniform());
        total += w;
    }
    int assigned = 0;
    std::vector<std::pair<double, int>> remainder(parts);
    for (int i = 0; i < parts; ++i) {
        const double exact = slack * weights[i] / total;
        gaps[i] = static_cast<int>(std::floor(exact));
        assigned += gaps[i];
        remainder[i] = {exact - gaps[i], i};
    }
    std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int i = 0; i < slack - assigned; ++i) ++gaps[remainder[i].second];
    return gaps;
}

}  // namespace

SynthCorpus generate(const SynthConfig& config) {
    validate_config(config);
    Rng corpus_rng(config.seed);

    SynthCorpus corpus;
    for (int k = 0; k < config.num_gt_steps; ++k) corpus.true_script.push_back(script_token(k));

    std::vector<Eigen::VectorXd> centers;
    for (int k = 0; k < config.num_gt_steps; ++k) {
        Eigen::VectorXd center(config.feature_dim);
        for (int i = 0; i < config.feature_dim; ++i) center(i) = corpus_rng.normal();
        center.normalize();
        centers.push_back(center);
    }

    corpus.annotation.num_gt_steps = config.num_gt_steps;
    const double dur = config.interval_duration_s;
    const double dup_odds =
        config.repeat_rate < 1.0 ? config.repeat_rate / (1.0 - config.repeat_rate) : 1.0;

    for (int n = 0; n < config.num_items; ++n) {
        Rng rng = corpus_rng.fork(static_cast<std::uint64_t>(n) + 1);
        std::string item_id = "item";
        if (n < 10) item_id += "0";
        item_id += std::to_string(n);

        // Structural noise: subsample, adjacent swaps, adjacent duplicates.
        std::vector<int> events;
        for (int k = 0; k < config.num_gt_steps; ++k)
            if (rng.uniform() >= config.miss_rate) events.push_back(k);
        if (events.empty()) events.push_back(rng.uniform_int(0, config.num_gt_steps - 1));
        if (events.size() > 1) {
            // A sequence of u steps has u-1 swappable boundaries and the
            // non-overlap pass shadows the boundary after each swap, so the
            // per-boundary probability is raised to keep the measured order
            // error centered on swap_rate.
            const double unique = static_cast<double>(events.size());
            const double boundary_rate =
                std::min(0.45, config.swap_rate * unique / (unique - 1.0));
            const double swap_prob = boundary_rate / (1.0 - boundary_rate);
            for (std::size_t i = 0; i + 1 < events.size();) {
                if (rng.uniform() < swap_prob) {
                    std::swap(events[i], events[i + 1]);
                    i += 2;
                } else {
                    ++i;
                }
            }
        }
        {
            std::vector<int> repeated;
            for (int step : events) {
                repeated.push_back(step);
                if (rng.uniform() < std::min(1.0, dup_odds)) repeated.push_back(step);
            }
            events = std::move(repeated);
        }

        const int intervals = rng.uniform_int(config.intervals_min, config.intervals_max);
        const int count = static_cast<int>(events.size());
        std::vector<int> lengths(count);
        int occupied = 0;
        for (int& len : lengths) {
            len = rng.uniform_int(config.event_len_min, config.event_len_max);
            occupied += len;
        }
        if (occupied > intervals)
            throw schema_error("item '" + item_id + "': " + std::to_string(intervals) +
                               " intervals cannot hold " + std::to_string(count) + " events");
        const std::vector<int> gaps = random_composition(rng, intervals - occupied, count + 1);

        ItemAnnotation annotation_item;
        annotation_item.item_id = item_id;
        struct Caption {
            Token token;
            TimeSpan span;
            int order;
        };
        std::vector<Caption> captions;
        Eigen::MatrixXd features(intervals, config.feature_dim);
        for (int t = 0; t < intervals; ++t)
            for (int i = 0; i < config.feature_dim; ++i)
                features(t, i) = config.feature_noise_sigma * rng.normal();

        int pos = 0;
        for (int e = 0; e < count; ++e) {
            pos += gaps[e];
            const int step = events[e];
            const double start = pos * dur;
            const double end = (pos + lengths[e]) * dur;
            annotation_item.events.push_back({step, start, end});
            for (int t = pos; t < pos + lengths[e]; ++t) features.row(t) += centers[step];

            const double lag = rng.uniform(config.lag_min_s, config.lag_max_s);
            const double cap_end = std::max(0.0, start - lag);
            const double cap_start = std::max(0.0, cap_end - config.caption_len_s);
            captions.push_back({script_token(step), {cap_start, cap_end},
                                static_cast<int>(captions.size())});
            pos += lengths[e];
        }

        int distractor_id = 0;
        for (int b = 0; b <= count; ++b) {
            while (rng.uniform() < config.distractor_token_rate) {
                Token tok{"mention",
                          "aside_" + std::to_string(n) + "_" + std::to_string(distractor_id++)};
                const double latest = std::max(0.0, intervals * dur - config.caption_len_s);
                const double t0 = rng.uniform(0.0, latest);
                captions.push_back({tok, {t0, t0 + config.caption_len_s},
                                    static_cast<int>(captions.size())});
            }
        }

        std::stable_sort(captions.begin(), captions.end(), [](const Caption& a, const Caption& b) {
            if (a.span.start_s != b.span.start_s) return a.span.start_s < b.span.start_s;
            return a.order < b.order;
        });

        TokenSequence sequence;
        sequence.item_id = item_id;
        for (const auto& cap : captions) {
            sequence.tokens.push_back(cap.token);
            sequence.spans.push_back(cap.span);
        }

        corpus.sequences.push_back(std::move(sequence));
        corpus.streams.push_back({item_id, std::move(features), dur});
        corpus.annotation.items.push_back(std::move(annotation_item));
    }
    return corpus;
}

textalign::GlobalAlignment brute_force_msa(std::span<const TokenSequence> sequences,
                                           const textalign::TokenCostMatrix& cost,
                                           int num_slots) {
    if (sequences.size() > 3) throw cap_error("brute_force_msa: at most 3 sequences");
    if (num_slots > 6) throw cap_error("brute_force_msa: at most 6 slots");
    for (const auto& seq : sequences) {
        if (seq.length() > 4) throw cap_error("brute_force_msa: sequences longer than 4 tokens");
        if (seq.length() > num_slots)
            throw infeasible_error("brute_force_msa: sequence longer than the template");
    }

    // All strictly increasing mappings of `len` tokens into `num_slots` slots.
    auto enumerate = [num_slots](int len) {
        std::vector<std::vector<int>> all;
        std::vector<int> current(len);
        auto rec = [&](auto&& self, int idx, int from) -> void {
            if (idx == len) {
                all.push_back(current);
                return;
            }
            for (int slot = from; slot <= num_slots - (len - idx); ++slot) {
                current[idx] = slot;
                self(self, idx + 1, slot + 1);
            }
        };
        rec(rec, 0, 0);
        return all;
    };

    std::vector<std::vector<std::vector<int>>> choices;
    for (const auto& seq : sequences) choices.push_back(enumerate(seq.length()));

    textalign::GlobalAlignment best;
    best.num_slots = num_slots;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(sequences.size(), 0);
    while (true) {
        textalign::GlobalAlignment candidate;
        candidate.num_slots = num_slots;
        for (std::size_t n = 0; n < sequences.size(); ++n)
            candidate.slot_of_token.push_back(choices[n][pick[n]]);
        const double c = textalign::sum_of_pairs_cost(candidate, sequences, cost);
        if (c < best_cost) {
            best_cost = c;
            best = std::move(candidate);
        }
        std::size_t level = pick.size();
        while (level > 0) {
            if (++pick[level - 1] < choices[level - 1].size()) break;
            pick[level - 1] = 0;
            --level;
        }
        if (level == 0) break;
    }
    return best;
}

std::vector<std::vector<int>> brute_force_localize(
    const vidcluster::ResidualKernel& kernel,
    const std::vector<vidcluster::StepWindows>& windows,
    const std::vector<int>& intervals_per_item, int num_steps) {
    const int n_items = static_cast<int>(intervals_per_item.size());
    if (n_items > 4) throw cap_error("brute_force_localize: at most 4 items");
    if (num_steps > 3) throw cap_error("brute_force_localize: at most 3 steps");
    int total = 0;
    for (int t : intervals_per_item) {
        if (t > 8) throw cap_error("brute_force_localize: items longer than 8 intervals");
        total += t;
    }
    if (total != kernel.total_intervals())
        throw schema_error("brute_force_localize: kernel does not match item lengths");

    Eigen::MatrixXd dense_kernel;
    if (kernel.dense())
        dense_kernel = *kernel.dense();
    else
        dense_kernel = kernel.apply(Eigen::MatrixXd::Identity(total, total));

    // Feasible increasing placements per item.
    std::vector<std::vector<std::vector<int>>> feasible(n_items);
    for (int n = 0; n < n_items; ++n) {
        const auto& item_windows = n < static_cast<int>(windows.size())
                                       ? windows[n]
                                       : vidcluster::StepWindows{};
        std::vector<int> current(num_steps);
        auto rec = [&](auto&& self, int k, int from) -> void {
            if (k == num_steps) {
                feasible[n].push_back(current);
                return;
            }
            for (int t = from; t < intervals_per_item[n]; ++t) {
                if (k < static_cast<int>(item_windows.size()) && !item_windows[k].empty() &&
                    !item_windows[k][t])
                    continue;
                current[k] = t;
                self(self, k + 1, t + 1);
            }
        };
        rec(rec, 0, 0);
        if (feasible[n].empty())
            throw infeasible_error("brute_force_localize: item " + std::to_string(n) +
                                   " has no feasible placement");
    }

    std::vector<int> offsets(n_items, 0);
    for (int n = 1; n < n_items; ++n) offsets[n] = offsets[n - 1] + intervals_per_item[n - 1];

    std::vector<std::size_t> pick(n_items, 0);
    std::vector<std::vector<int>> best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<int> rows(static_cast<std::size_t>(n_items) * num_steps);
    while (true) {
        double cost = 0.0;
        for (int k = 0; k < num_steps; ++k) {
            for (int n = 0; n < n_items; ++n)
                rows[n] = offsets[n] + feasible[n][pick[n]][k];
            for (int a = 0; a < n_items; ++a)
                for (int b = 0; b < n_items; ++b) cost += dense_kernel(rows[a], rows[b]);
        }
        cost /= 2.0 * total;
        if (cost < best_cost) {
            best_cost = cost;
            best.clear();
            for (int n = 0; n < n_items; ++n) best.push_back(feasible[n][pick[n]]);
        }
        int level = n_items;
        while (level > 0) {
            if (++pick[level - 1] < feasible[level - 1].size()) break;
            pick[level - 1] = 0;
            --level;
        }
        if (level == 0) break;
    }
    return best;
}

}  // namespace saln::synthgen
