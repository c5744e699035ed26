// saln command-line front end: synth, align, localize, supervised, stats and
// oracle-check subcommands wiring the pipeline stages together.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "saln/evalkit.hpp"
#include "saln/io.hpp"
#include "saln/rng.hpp"
#include "saln/synthgen.hpp"
#include "saln/textalign.hpp"
#include "saln/vidcluster.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace saln;

namespace {

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw schema_error("config '" + path + "': " + e.what());
    }
}

template <typename T>
void from_config(const json& section, const char* key, T& value) {
    if (section.contains(key)) value = section.at(key).get<T>();
}

json section(const json& config, const char* name) {
    return config.contains(name) ? config.at(name) : json::object();
}

vidcluster::StepLocalization placements_to_localization(
    std::span<const FeatureStream> streams, const std::vector<std::vector<int>>& placements) {
    vidcluster::StepLocalization loc;
    for (std::size_t n = 0; n < streams.size(); ++n)
        loc.items.push_back({streams[n].item_id, placements[n], streams[n].intervals(),
                             streams[n].interval_duration_s});
    return loc;
}

// F1 spread over the rounded iterates visited from the best one onward.
std::pair<double, double> error_bars(const vidcluster::LocalizeResult& result,
                                     std::span<const FeatureStream> streams,
                                     const CorpusAnnotation& annotation) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t i = result.best_iter; i < result.history.size(); ++i) {
        const auto loc = placements_to_localization(streams, result.history[i].placements);
        const double f1 = evalkit::localization_f1(loc, annotation).f1;
        lo = std::min(lo, f1);
        hi = std::max(hi, f1);
    }
    return {std::min(lo, hi), hi};
}

struct AlignArgs {
    std::string tokens_path, config_path, cost_path, out_dir, task = "task";
    std::string gt_script_path, equivalence_path;
    std::vector<int> requested_steps;
    double match_reward = -1.0, mismatch_penalty = 100.0;
    int num_slots = 0, max_iters = 300;
    bool line_search = false, exact_labels = false, use_poa = false;
    std::uint64_t seed = 1;
};

int run_align(AlignArgs args) {
    const json config = section(load_config(args.config_path), "align");
    from_config(config, "K", args.requested_steps);
    from_config(config, "num_slots", args.num_slots);
    from_config(config, "max_iters", args.max_iters);
    from_config(config, "line_search", args.line_search);
    from_config(config, "match_reward", args.match_reward);
    from_config(config, "mismatch_penalty", args.mismatch_penalty);
    from_config(config, "seed", args.seed);
    if (args.requested_steps.empty()) args.requested_steps = {10};

    const auto sequences = io::read_token_sequences(args.tokens_path);
    const auto cost = args.cost_path.empty()
                          ? textalign::build_token_cost(sequences, args.match_reward,
                                                        args.mismatch_penalty)
                          : io::read_cost_csv(args.cost_path);

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);

    textalign::MsaOptions options;
    options.num_slots = args.num_slots;
    options.max_iters = args.max_iters;
    options.line_search = args.line_search;
    options.seed = args.seed;

    textalign::GlobalAlignment alignment;
    json report;
    if (args.use_poa) {
        alignment = textalign::progressive_align(sequences, cost);
        report["objective"] = textalign::sum_of_pairs_cost(alignment, sequences, cost);
        report["method"] = "poa";
    } else {
        const auto result = textalign::fw_msa(sequences, cost, options);
        alignment = result.alignment;
        report["objective"] = result.objective;
        report["method"] = "fw";
        report["best_iter"] = result.best_iter;
        report["iterations"] = result.history.size();
        const auto poa = textalign::progressive_align(sequences, cost);
        report["poa_objective"] = textalign::sum_of_pairs_cost(poa, sequences, cost);
    }
    io::write_alignment(out / "alignment.json", alignment, sequences);
    {
        std::ofstream rep(out / "align_report.json");
        rep << report.dump(2) << "\n";
    }

    std::optional<std::vector<Token>> gt_script;
    if (!args.gt_script_path.empty()) gt_script = io::read_script(args.gt_script_path);

    for (int requested : args.requested_steps) {
        const auto steps = textalign::extract_main_steps(alignment, sequences, requested);
        if (!steps.warning.empty())
            std::cerr << "warning: K=" << requested << ": " << steps.warning << "\n";
        io::write_steps(out / ("steps_K" + std::to_string(requested) + ".json"), steps,
                        sequences);
        if (gt_script) {
            std::map<Token, Token> equivalence;
            if (!args.equivalence_path.empty()) {
                equivalence = io::read_equivalence(args.equivalence_path);
            } else {
                // exact-label equality, the synthetic-corpus default
                for (const auto& label : steps.labels) equivalence[label] = label;
            }
            const auto [precision, recall] =
                evalkit::script_precision_recall(steps.labels, *gt_script, equivalence);
            json score{{"precision", precision},
                       {"recall", recall},
                       {"k_pred", steps.num_steps},
                       {"K", requested}};
            std::ofstream sp(out / ("script_score_K" + std::to_string(requested) + ".json"));
            sp << score.dump(2) << "\n";
        }
    }
    return 0;
}

struct LocalizeArgs {
    std::string tokens_path, features_path, steps_path, annotations_path;
    std::string config_path, out_dir, task = "task", method = "full";
    double delta_before = 0.0, delta_after = 10.0, lambda = 0.0;
    int max_iters = 300;
    bool line_search = false;
    std::uint64_t seed = 1;
    int requested_steps = 0;  // recorded in the score row
};

int run_localize(LocalizeArgs args) {
    const json config = section(load_config(args.config_path), "localize");
    from_config(config, "delta_before_s", args.delta_before);
    from_config(config, "delta_after_s", args.delta_after);
    from_config(config, "lambda", args.lambda);
    from_config(config, "max_iters", args.max_iters);
    from_config(config, "line_search", args.line_search);
    from_config(config, "seed", args.seed);

    const auto streams = io::read_feature_manifest(args.features_path);
    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);

    std::optional<CorpusAnnotation> annotation;
    if (!args.annotations_path.empty())
        annotation = io::read_annotation(args.annotations_path);

    vidcluster::LocalizeOptions options;
    options.lambda = args.lambda;
    options.max_iters = args.max_iters;
    options.line_search = args.line_search;
    options.seed = args.seed;

    vidcluster::StepLocalization localization;
    double f1 = 0.0, f1_min = 0.0, f1_max = 0.0, precision = 0.0, recall = 0.0;
    int k_pred = 0;

    if (args.method == "uniform") {
        if (args.steps_path.empty() && args.requested_steps < 1)
            throw schema_error("uniform method needs --steps or --K");
        int num_steps = args.requested_steps;
        if (!args.steps_path.empty()) {
            if (args.tokens_path.empty())
                throw schema_error("reading --steps needs --tokens for the item join");
            const auto sequences = io::read_token_sequences(args.tokens_path);
            num_steps = io::read_steps(args.steps_path, sequences).num_steps;
        }
        std::vector<std::vector<int>> placements;
        for (const auto& stream : streams)
            placements.push_back(vidcluster::uniform_baseline(stream.intervals(), num_steps));
        localization = placements_to_localization(streams, placements);
        k_pred = num_steps;
        if (annotation) {
            const auto score = evalkit::localization_f1(localization, *annotation);
            precision = score.precision;
            recall = score.recall;
            f1 = f1_min = f1_max = score.f1;
            io::write_score(out / "score.json", score, f1_min, f1_max);
        }
    } else if (args.method == "full" || args.method == "video-only") {
        if (args.tokens_path.empty() || args.steps_path.empty())
            throw schema_error("method '" + args.method + "' needs --tokens and --steps");
        const auto sequences = io::read_token_sequences(args.tokens_path);
        const auto assignment = io::read_steps(args.steps_path, sequences);
        if (assignment.num_steps < 1)
            throw schema_error("steps file contains no steps to localize");
        k_pred = assignment.num_steps;

        std::optional<vidcluster::ConstraintWindows> windows;
        if (args.method == "full")
            windows = vidcluster::build_constraint_windows(sequences, streams,
                                                           args.delta_before, args.delta_after);
        const auto result = vidcluster::fw_localize(
            streams, windows ? &*windows : nullptr, assignment, options);
        for (const auto& warning : result.warnings)
            std::cerr << "warning: " << warning << "\n";
        localization = result.localization;
        if (annotation) {
            const auto score = evalkit::localization_f1(localization, *annotation);
            precision = score.precision;
            recall = score.recall;
            f1 = score.f1;
            std::tie(f1_min, f1_max) = error_bars(result, streams, *annotation);
            io::write_score(out / "score.json", score, f1_min, f1_max);
        }
    } else {
        throw schema_error("unknown method '" + args.method + "'");
    }

    io::write_localization(out / "localization.json", localization);
    if (annotation) {
        io::ScoreRow row{args.task,  args.method, args.requested_steps ? args.requested_steps
                                                                       : k_pred,
                         args.seed,  k_pred,      precision,
                         recall,     f1,          f1_min,
                         f1_max};
        io::append_score_csv(out / "scores.csv", row);
    }
    return 0;
}

struct SupervisedArgs {
    std::string features_path, annotations_path, config_path, out_dir, task = "task";
    int folds = 5, max_iters = 300;
    std::vector<double> lambda_grid;
    std::uint64_t seed = 1;
};

int run_supervised(SupervisedArgs args) {
    const json config = section(load_config(args.config_path), "supervised");
    from_config(config, "folds", args.folds);
    from_config(config, "max_iters", args.max_iters);
    from_config(config, "lambda_grid", args.lambda_grid);
    from_config(config, "seed", args.seed);

    const auto streams = io::read_feature_manifest(args.features_path);
    const auto annotation = io::read_annotation(args.annotations_path);
    const int n_items = static_cast<int>(streams.size());
    if (n_items < args.folds)
        throw schema_error("supervised: need at least " + std::to_string(args.folds) +
                           " items for " + std::to_string(args.folds) + " folds");
    const int num_steps = annotation.num_gt_steps;

    vidcluster::LocalizeOptions options;
    options.max_iters = args.max_iters;
    options.seed = args.seed;

    // Deterministic fold assignment: seeded shuffle, then round-robin.
    std::vector<int> order(n_items);
    for (int i = 0; i < n_items; ++i) order[i] = i;
    Rng rng(args.seed);
    for (int i = n_items - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(0, i)]);
    std::vector<std::vector<int>> folds(args.folds);
    for (int i = 0; i < n_items; ++i) folds[i % args.folds].push_back(order[i]);

    auto subset = [&](const std::vector<int>& indices) {
        std::vector<FeatureStream> picked;
        for (int i : indices) picked.push_back(streams[i]);
        return picked;
    };
    std::vector<int> identity(num_steps);
    for (int k = 0; k < num_steps; ++k) identity[k] = k;

    auto evaluate = [&](const Eigen::MatrixXd& classifier, const std::vector<int>& indices) {
        std::vector<std::vector<int>> placements;
        std::vector<FeatureStream> picked = subset(indices);
        for (const auto& stream : picked)
            placements.push_back(vidcluster::predict_ordered(classifier, stream));
        const auto loc = placements_to_localization(picked, placements);
        return evalkit::localization_f1(loc, annotation, &identity);
    };

    json fold_reports = json::array();
    std::vector<double> fold_f1;
    double precision_sum = 0.0, recall_sum = 0.0;
    for (int f = 0; f < args.folds; ++f) {
        std::vector<int> train_items;
        for (int g = 0; g < args.folds; ++g)
            if (g != f) train_items.insert(train_items.end(), folds[g].begin(), folds[g].end());

        std::vector<double> grid = args.lambda_grid;
        if (grid.empty()) {
            const double base = 1.0 / (static_cast<double>(train_items.size()) * num_steps);
            grid = {0.1 * base, base, 10.0 * base};
        }

        double best_lambda = grid.front();
        double best_inner = -1.0;
        if (grid.size() > 1) {
            const int inner_folds = std::min<int>(4, static_cast<int>(train_items.size()));
            for (double lambda : grid) {
                double mean = 0.0;
                for (int inner = 0; inner < inner_folds; ++inner) {
                    std::vector<int> fit_items, val_items;
                    for (std::size_t i = 0; i < train_items.size(); ++i)
                        (static_cast<int>(i) % inner_folds == inner ? val_items : fit_items)
                            .push_back(train_items[i]);
                    const auto fit = subset(fit_items);
                    const auto classifier =
                        vidcluster::train_supervised(fit, annotation, lambda, options);
                    mean += evaluate(classifier, val_items).f1;
                }
                mean /= inner_folds;
                if (mean > best_inner) {
                    best_inner = mean;
                    best_lambda = lambda;
                }
            }
        }

        const auto train = subset(train_items);
        const auto classifier =
            vidcluster::train_supervised(train, annotation, best_lambda, options);
        const auto score = evaluate(classifier, folds[f]);
        fold_f1.push_back(score.f1);
        precision_sum += score.precision;
        recall_sum += score.recall;
        fold_reports.push_back(json{{"fold", f},
                                    {"lambda", best_lambda},
                                    {"test_items", folds[f].size()},
                                    {"precision", score.precision},
                                    {"recall", score.recall},
                                    {"f1", score.f1}});
    }

    const double mean_f1 =
        std::accumulate(fold_f1.begin(), fold_f1.end(), 0.0) / fold_f1.size();
    const double min_f1 = *std::min_element(fold_f1.begin(), fold_f1.end());
    const double max_f1 = *std::max_element(fold_f1.begin(), fold_f1.end());
    const double mean_precision = precision_sum / fold_f1.size();
    const double mean_recall = recall_sum / fold_f1.size();

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    {
        std::ofstream rep(out / "supervised.json");
        rep << json{{"mean_f1", mean_f1}, {"min_f1", min_f1}, {"max_f1", max_f1},
                    {"folds", fold_reports}}
                   .dump(2)
            << "\n";
    }
    io::append_score_csv(out / "scores.csv",
                         {args.task, "supervised", num_steps, args.seed, num_steps,
                          mean_precision, mean_recall, mean_f1, min_f1, max_f1});
    std::cout << "supervised mean F1 " << mean_f1 << " [" << min_f1 << ", " << max_f1 << "]\n";
    return 0;
}

int run_synth(const std::string& config_path, const std::string& out_dir,
              const std::string& format, std::optional<std::uint64_t> seed_override) {
    const json config = section(load_config(config_path), "synth");
    synthgen::SynthConfig synth;
    from_config(config, "num_gt_steps", synth.num_gt_steps);
    from_config(config, "num_items", synth.num_items);
    from_config(config, "intervals_min", synth.intervals_min);
    from_config(config, "intervals_max", synth.intervals_max);
    from_config(config, "feature_dim", synth.feature_dim);
    from_config(config, "swap_rate", synth.swap_rate);
    from_config(config, "miss_rate", synth.miss_rate);
    from_config(config, "repeat_rate", synth.repeat_rate);
    from_config(config, "distractor_token_rate", synth.distractor_token_rate);
    from_config(config, "lag_min_s", synth.lag_min_s);
    from_config(config, "lag_max_s", synth.lag_max_s);
    from_config(config, "feature_noise_sigma", synth.feature_noise_sigma);
    from_config(config, "seed", synth.seed);
    from_config(config, "interval_duration_s", synth.interval_duration_s);
    from_config(config, "event_len_min", synth.event_len_min);
    from_config(config, "event_len_max", synth.event_len_max);
    from_config(config, "caption_len_s", synth.caption_len_s);
    if (seed_override) synth.seed = *seed_override;

    const auto corpus = synthgen::generate(synth);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    io::write_token_sequences(out / "tokens.json", corpus.sequences);
    io::write_feature_corpus(out / "features", corpus.streams, format);
    io::write_annotation(out / "annotations.json", corpus.annotation);
    io::write_script(out / "script.json", corpus.true_script);
    return 0;
}

int run_stats(const std::string& annotations_path, const std::string& out_path) {
    const auto annotation = io::read_annotation(annotations_path);
    const auto stats = evalkit::corpus_stats(annotation);
    io::write_stats(out_path, stats);
    return 0;
}

// Quick self-test of both linear oracles against exhaustive enumeration.
int run_oracle_check(int trials) {
    Rng rng(7);
    for (int trial = 0; trial < trials; ++trial) {
        const int tokens = rng.uniform_int(1, 4);
        const int slots = rng.uniform_int(tokens, 6);
        Eigen::MatrixXd gradient(tokens, slots);
        for (int s = 0; s < tokens; ++s)
            for (int l = 0; l < slots; ++l) gradient(s, l) = rng.uniform(-5.0, 5.0);
        const auto fast = textalign::msa_linear_oracle(gradient);
        double fast_cost = 0.0;
        for (int s = 0; s < tokens; ++s) fast_cost += gradient(s, fast[s]);

        double best = std::numeric_limits<double>::infinity();
        std::vector<int> pick(tokens);
        auto rec = [&](auto&& self, int idx, int from) -> void {
            if (idx == tokens) {
                double c = 0.0;
                for (int s = 0; s < tokens; ++s) c += gradient(s, pick[s]);
                best = std::min(best, c);
                return;
            }
            for (int l = from; l <= slots - (tokens - idx); ++l) {
                pick[idx] = l;
                self(self, idx + 1, l + 1);
            }
        };
        rec(rec, 0, 0);
        if (std::abs(fast_cost - best) > 1e-12) {
            std::cout << "FAIL msa oracle (trial " << trial << ")\n";
            return 1;
        }
    }
    std::cout << "PASS msa oracle (" << trials << " trials)\n";

    for (int trial = 0; trial < trials; ++trial) {
        const int intervals = rng.uniform_int(2, 8);
        const int steps = rng.uniform_int(1, std::min(3, intervals));
        Eigen::MatrixXd costs(intervals, steps);
        for (int t = 0; t < intervals; ++t)
            for (int k = 0; k < steps; ++k) costs(t, k) = rng.uniform(-5.0, 5.0);
        const auto fast = vidcluster::ordered_oracle(costs);
        double fast_cost = 0.0;
        for (int k = 0; k < steps; ++k) fast_cost += costs(fast[k], k);

        double best = std::numeric_limits<double>::infinity();
        std::vector<int> pick(steps);
        auto rec = [&](auto&& self, int k, int from) -> void {
            if (k == steps) {
                double c = 0.0;
                for (int j = 0; j < steps; ++j) c += costs(pick[j], j);
                best = std::min(best, c);
                return;
            }
            for (int t = from; t < intervals; ++t) {
                pick[k] = t;
                self(self, k + 1, t + 1);
            }
        };
        rec(rec, 0, 0);
        if (std::abs(fast_cost - best) > 1e-12) {
            std::cout << "FAIL ordered oracle (trial " << trial << ")\n";
            return 1;
        }
    }
    std::cout << "PASS ordered oracle (" << trials << " trials)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"saln: discover the shared ordered steps of a task from narrated token "
                 "sequences and localize them in per-item feature streams"};
    app.require_subcommand(1);

    AlignArgs align;
    auto* align_cmd = app.add_subcommand("align", "cluster token sequences into ordered steps");
    align_cmd->add_option("--tokens", align.tokens_path, "token sequences JSON")->required();
    align_cmd->add_option("--out", align.out_dir, "output directory")->required();
    align_cmd->add_option("--config", align.config_path, "config JSON");
    align_cmd->add_option("--K", align.requested_steps, "maximum step counts to extract");
    align_cmd->add_option("--cost", align.cost_path, "externally computed cost CSV");
    align_cmd->add_option("--match-reward", align.match_reward, "cost of an exact token match");
    align_cmd->add_option("--mismatch-penalty", align.mismatch_penalty,
                          "cost of aligning distinct tokens");
    align_cmd->add_option("--num-slots", align.num_slots, "template slots (0 = auto)");
    align_cmd->add_option("--max-iters", align.max_iters, "solver iteration budget");
    align_cmd->add_flag("--line-search", align.line_search, "exact line search");
    align_cmd->add_flag("--poa", align.use_poa, "use the progressive-alignment baseline");
    align_cmd->add_option("--seed", align.seed, "random seed");
    align_cmd->add_option("--task", align.task, "task name for reports");
    align_cmd->add_option("--gt-script", align.gt_script_path, "ground-truth script JSON");
    align_cmd->add_option("--equivalence", align.equivalence_path,
                          "recovered-to-gt label mapping JSON");

    LocalizeArgs localize;
    auto* loc_cmd = app.add_subcommand("localize", "localize steps in feature streams");
    loc_cmd->add_option("--tokens", localize.tokens_path, "token sequences JSON");
    loc_cmd->add_option("--features", localize.features_path, "feature manifest JSON")
        ->required();
    loc_cmd->add_option("--steps", localize.steps_path, "step assignment JSON");
    loc_cmd->add_option("--annotations", localize.annotations_path, "annotation JSON");
    loc_cmd->add_option("--out", localize.out_dir, "output directory")->required();
    loc_cmd->add_option("--config", localize.config_path, "config JSON");
    loc_cmd->add_option("--method", localize.method, "full | video-only | uniform");
    loc_cmd->add_option("--delta-before", localize.delta_before, "window widening before (s)");
    loc_cmd->add_option("--delta-after", localize.delta_after, "window widening after (s)");
    loc_cmd->add_option("--lambda", localize.lambda, "regularization (0 = 1/(N*K))");
    loc_cmd->add_option("--max-iters", localize.max_iters, "solver iteration budget");
    loc_cmd->add_flag("--line-search", localize.line_search, "exact line search");
    loc_cmd->add_option("--seed", localize.seed, "random seed");
    loc_cmd->add_option("--task", localize.task, "task name for reports");
    loc_cmd->add_option("--K", localize.requested_steps, "requested step count (uniform)");

    SupervisedArgs supervised;
    auto* sup_cmd = app.add_subcommand("supervised", "cross-validated supervised scoring");
    sup_cmd->add_option("--features", supervised.features_path, "feature manifest JSON")
        ->required();
    sup_cmd->add_option("--annotations", supervised.annotations_path, "annotation JSON")
        ->required();
    sup_cmd->add_option("--out", supervised.out_dir, "output directory")->required();
    sup_cmd->add_option("--config", supervised.config_path, "config JSON");
    sup_cmd->add_option("--folds", supervised.folds, "cross-validation folds");
    sup_cmd->add_option("--lambda-grid", supervised.lambda_grid, "candidate lambdas");
    sup_cmd->add_option("--max-iters", supervised.max_iters, "solver iteration budget");
    sup_cmd->add_option("--seed", supervised.seed, "fold-assignment seed");
    sup_cmd->add_option("--task", supervised.task, "task name for reports");

    std::string synth_config, synth_out, synth_format = "bin";
    std::optional<std::uint64_t> synth_seed;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--config", synth_config, "config JSON with a 'synth' section");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--format", synth_format, "feature format: bin | csv");
    synth_cmd->add_option("--seed", synth_seed, "override the config seed");

    std::string stats_annotations, stats_out = "stats.json";
    auto* stats_cmd = app.add_subcommand("stats", "corpus annotation statistics");
    stats_cmd->add_option("--annotations", stats_annotations, "annotation JSON")->required();
    stats_cmd->add_option("--out", stats_out, "output stats JSON");

    int oracle_trials = 50;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "self-test the linear oracles");
    oracle_cmd->add_option("--trials", oracle_trials, "instances per oracle");

    CLI11_PARSE(app, argc, argv);

    try {
        if (align_cmd->parsed()) return run_align(align);
        if (loc_cmd->parsed()) return run_localize(localize);
        if (sup_cmd->parsed()) return run_supervised(supervised);
        if (synth_cmd->parsed()) return run_synth(synth_config, synth_out, synth_format, synth_seed);
        if (stats_cmd->parsed()) return run_stats(stats_annotations, stats_out);
        if (oracle_cmd->parsed()) return run_oracle_check(oracle_trials);
    } catch (const schema_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const infeasible_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const cap_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
