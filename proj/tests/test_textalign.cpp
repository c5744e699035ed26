#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "saln/synthgen.hpp"
#include "saln/textalign.hpp"

using namespace saln;
using namespace saln::textalign;
using test::seq;
using test::tok;

namespace {

std::vector<TokenSequence> tire_pair() {
    return {seq("a", {tok("loosen", "nut"), tok("jack", "car")}),
            seq("b", {tok("loosen", "nut"), tok("jack", "car")})};
}

}  // namespace

TEST_CASE("token cost: exact match rewards, anything else penalized") {
    const auto sequences = tire_pair();
    const auto cost = build_token_cost(sequences);
    CHECK(cost.at(tok("loosen", "nut"), tok("loosen", "nut")) == -1.0);
    CHECK(cost.at(tok("loosen", "nut"), tok("jack", "car")) == 100.0);
    CHECK(cost.at(tok("jack", "car"), tok("loosen", "nut")) == 100.0);
    CHECK(cost.vocabulary.size() == 2);  // deduplicated across items
    CHECK((cost.cost - cost.cost.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("token cost: custom rewards and error paths") {
    const auto sequences = tire_pair();
    const auto cost = build_token_cost(sequences, -2.5, 7.0);
    CHECK(cost.at(tok("jack", "car"), tok("jack", "car")) == -2.5);
    CHECK(cost.at(tok("jack", "car"), tok("loosen", "nut")) == 7.0);

    CHECK_THROWS_AS(build_token_cost(std::vector<TokenSequence>{}), schema_error);
    const std::vector<TokenSequence> tokenless = {seq("empty", {})};
    CHECK_THROWS_AS(build_token_cost(tokenless), schema_error);
}

TEST_CASE("token pair cost: identical singleton sequences") {
    const std::vector<TokenSequence> sequences = {seq("a", {tok("loosen", "nut")}),
                                                  seq("b", {tok("loosen", "nut")})};
    const auto cost = build_token_cost(sequences);
    const auto pair = token_pair_cost_matrix(sequences, cost);
    REQUIRE(pair.rows() == 2);
    CHECK(pair(0, 0) == -1.0);
    CHECK(pair(0, 1) == -1.0);
    CHECK(pair(1, 0) == -1.0);
    CHECK(pair(1, 1) == -1.0);
}

TEST_CASE("token pair cost: matches the elementwise expansion") {
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("open", "hood"), tok("connect", "cable")}),
        seq("b", {tok("connect", "cable")}),
        seq("c", {tok("open", "hood"), tok("connect", "cable"), tok("open", "hood")})};
    const auto cost = build_token_cost(sequences);
    const auto pair = token_pair_cost_matrix(sequences, cost);

    std::vector<Token> stacked;
    for (const auto& s : sequences)
        for (const auto& t : s.tokens) stacked.push_back(t);
    REQUIRE(pair.rows() == static_cast<int>(stacked.size()));
    for (std::size_t i = 0; i < stacked.size(); ++i)
        for (std::size_t j = 0; j < stacked.size(); ++j)
            CHECK(pair(i, j) == cost.at(stacked[i], stacked[j]));

    const std::vector<TokenSequence> unknown = {seq("d", {tok("pump", "tire")})};
    CHECK_THROWS_AS(token_pair_cost_matrix(unknown, cost), schema_error);
}

TEST_CASE("sum of pairs: single sequence has no pairs") {
    const std::vector<TokenSequence> sequences = {seq("solo", {tok("open", "hood")})};
    const auto cost = build_token_cost(sequences);
    GlobalAlignment alignment{1, {{0}}};
    CHECK(sum_of_pairs_cost(alignment, sequences, cost) == 0.0);
}

TEST_CASE("sum of pairs: two identical sequences aligned slot for slot") {
    const auto sequences = tire_pair();
    const auto cost = build_token_cost(sequences);
    GlobalAlignment alignment{2, {{0, 1}, {0, 1}}};
    CHECK(sum_of_pairs_cost(alignment, sequences, cost) == -2.0);
}

TEST_CASE("sum of pairs: random alignments match the direct expansion") {
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("open", "hood"), tok("connect", "cable"), tok("start", "car")}),
        seq("b", {tok("connect", "cable"), tok("start", "car")}),
        seq("c", {tok("open", "hood"), tok("start", "car"), tok("open", "hood")})};
    const auto cost = build_token_cost(sequences);
    const int slots = 5;

    Rng rng(11);
    const auto all0 = test::monotone_mappings(3, slots);
    const auto all1 = test::monotone_mappings(2, slots);
    for (int trial = 0; trial < 40; ++trial) {
        GlobalAlignment alignment;
        alignment.num_slots = slots;
        alignment.slot_of_token = {
            all0[rng.uniform_int(0, static_cast<int>(all0.size()) - 1)],
            all1[rng.uniform_int(0, static_cast<int>(all1.size()) - 1)],
            all0[rng.uniform_int(0, static_cast<int>(all0.size()) - 1)]};
        CHECK(sum_of_pairs_cost(alignment, sequences, cost) ==
              doctest::Approx(test::sum_of_pairs_reference(alignment, sequences, cost))
                  .epsilon(1e-12));
    }
}

TEST_CASE("sum of pairs: equals the quadratic form with zeroed self blocks") {
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("open", "hood"), tok("connect", "cable")}),
        seq("b", {tok("connect", "cable"), tok("open", "hood")}),
        seq("c", {tok("open", "hood")})};
    const auto cost = build_token_cost(sequences);
    Eigen::MatrixXd pair = token_pair_cost_matrix(sequences, cost);
    int offset = 0;
    for (const auto& s : sequences) {
        pair.block(offset, offset, s.length(), s.length()).setZero();
        offset += s.length();
    }

    const int slots = 4;
    const auto all2 = test::monotone_mappings(2, slots);
    const auto all1 = test::monotone_mappings(1, slots);
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        GlobalAlignment alignment;
        alignment.num_slots = slots;
        alignment.slot_of_token = {
            all2[rng.uniform_int(0, static_cast<int>(all2.size()) - 1)],
            all2[rng.uniform_int(0, static_cast<int>(all2.size()) - 1)],
            all1[rng.uniform_int(0, static_cast<int>(all1.size()) - 1)]};

        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(5, slots);
        int row = 0;
        for (const auto& slots_n : alignment.slot_of_token)
            for (int slot : slots_n) dense(row++, slot) = 1.0;
        const double quadratic = 0.5 * (dense.transpose() * pair * dense).trace();
        CHECK(sum_of_pairs_cost(alignment, sequences, cost) ==
              doctest::Approx(quadratic).epsilon(1e-12));
    }
}

TEST_CASE("msa oracle: singleton row picks the cheapest slot") {
    Eigen::MatrixXd gradient(1, 3);
    gradient << 5.0, -1.0, 2.0;
    CHECK(msa_linear_oracle(gradient) == std::vector<int>{1});
}

TEST_CASE("msa oracle: zero gradient returns a valid zero-cost mapping") {
    const Eigen::MatrixXd gradient = Eigen::MatrixXd::Zero(3, 5);
    const auto slots = msa_linear_oracle(gradient);
    REQUIRE(slots.size() == 3);
    int prev = -1;
    double value = 0.0;
    for (int slot : slots) {
        CHECK(slot > prev);
        CHECK(slot < 5);
        value += gradient(0, slot);
        prev = slot;
    }
    CHECK(value == 0.0);
}

TEST_CASE("msa oracle: equals exhaustive enumeration") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const int tokens = rng.uniform_int(1, 4);
        const int slots = rng.uniform_int(tokens, 6);
        const auto gradient = test::random_matrix(rng, tokens, slots, -5.0, 5.0);

        const auto fast = msa_linear_oracle(gradient);
        double fast_cost = 0.0;
        int prev = -1;
        for (int s = 0; s < tokens; ++s) {
            CHECK(fast[s] > prev);
            prev = fast[s];
            fast_cost += gradient(s, fast[s]);
        }

        double best = std::numeric_limits<double>::infinity();
        for (const auto& mapping : test::monotone_mappings(tokens, slots)) {
            double c = 0.0;
            for (int s = 0; s < tokens; ++s) c += gradient(s, mapping[s]);
            best = std::min(best, c);
        }
        CHECK(fast_cost == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("msa oracle: rejects templates shorter than the sequence") {
    CHECK_THROWS_AS(msa_linear_oracle(Eigen::MatrixXd::Zero(4, 3)), infeasible_error);
}

TEST_CASE("progressive alignment: single sequence maps onto itself") {
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("open", "hood"), tok("connect", "cable"), tok("start", "car")})};
    const auto cost = build_token_cost(sequences);
    const auto alignment = progressive_align(sequences, cost);
    CHECK(alignment.num_slots == 3);
    CHECK(alignment.slot_of_token[0] == std::vector<int>{0, 1, 2});
}

TEST_CASE("progressive alignment: identical sequences collapse slot for slot") {
    const auto sequences = tire_pair();
    const auto cost = build_token_cost(sequences);
    const auto alignment = progressive_align(sequences, cost);
    CHECK(alignment.num_slots == 2);
    CHECK(sum_of_pairs_cost(alignment, sequences, cost) == -2.0);
}

TEST_CASE("fw_msa: identical sequences reach the slot-for-slot optimum") {
    std::vector<TokenSequence> sequences;
    const std::vector<Token> tokens = {tok("open", "hood"), tok("connect", "cable"),
                                       tok("start", "car")};
    for (int n = 0; n < 4; ++n) sequences.push_back(seq("item" + std::to_string(n), tokens));
    const auto cost = build_token_cost(sequences);

    MsaOptions options;
    options.num_slots = 3;
    const auto result = fw_msa(sequences, cost, options);
    // 3 matched slots over 6 unordered pairs
    CHECK(result.objective == -18.0);
    validate_alignment(result.alignment, sequences);
}

TEST_CASE("fw_msa: attains the brute-force optimum on a small fixture") {
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("open", "hood"), tok("connect", "cable"), tok("start", "car")}),
        seq("b", {tok("connect", "cable"), tok("start", "car")}),
        seq("c", {tok("open", "hood"), tok("start", "car")})};
    const auto cost = build_token_cost(sequences);

    MsaOptions options;
    options.num_slots = 5;
    const auto result = fw_msa(sequences, cost, options);
    const auto brute = synthgen::brute_force_msa(sequences, cost, 5);
    CHECK(result.objective ==
          doctest::Approx(sum_of_pairs_cost(brute, sequences, cost)).epsilon(1e-12));
}

TEST_CASE("fw_msa: never worse than progressive alignment, history well formed") {
    Rng rng(23);
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        synthgen::SynthConfig config;
        config.num_gt_steps = 5;
        config.num_items = 4 + static_cast<int>(trial);
        config.intervals_min = 20;
        config.intervals_max = 25;
        config.feature_dim = 4;
        config.swap_rate = 0.1;
        config.miss_rate = 0.2;
        config.repeat_rate = 0.1;
        config.distractor_token_rate = 0.2;
        config.seed = 100 + trial;
        const auto corpus = synthgen::generate(config);
        const auto cost = build_token_cost(corpus.sequences);

        const auto poa = progressive_align(corpus.sequences, cost);
        const double poa_cost = sum_of_pairs_cost(poa, corpus.sequences, cost);
        const auto result = fw_msa(corpus.sequences, cost);
        CHECK(result.objective <= poa_cost + 1e-9);
        validate_alignment(result.alignment, corpus.sequences);

        double best_so_far = std::numeric_limits<double>::infinity();
        for (const auto& it : result.history) {
            CHECK(std::isfinite(it.relaxed_objective));
            CHECK(it.best_objective <= best_so_far + 1e-12);
            best_so_far = it.best_objective;
        }
    }
}

TEST_CASE("fw_msa: rejects a non-positive iteration budget") {
    const auto sequences = tire_pair();
    const auto cost = build_token_cost(sequences);
    MsaOptions options;
    options.max_iters = 0;
    CHECK_THROWS_AS(fw_msa(sequences, cost, options), schema_error);
}

TEST_CASE("fw_msa: explicit template narrower than the heuristic still works") {
    // Disjoint vocabularies: the progressive template has 6 slots, but the
    // caller asks for 4, so the seed falls back to the identity corner.
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("open", "hood"), tok("close", "hood")}),
        seq("b", {tok("fill", "tank"), tok("check", "gauge")}),
        seq("c", {tok("turn", "key"), tok("start", "engine")})};
    const auto cost = build_token_cost(sequences);
    CHECK(progressive_align(sequences, cost).num_slots == 6);

    MsaOptions options;
    options.num_slots = 4;
    const auto result = fw_msa(sequences, cost, options);
    CHECK(result.alignment.num_slots == 4);
    validate_alignment(result.alignment, sequences);
    // six tokens in four slots force co-located mismatches; the identity
    // fallback corner costs 600 and the result may not exceed it
    CHECK(result.objective <= 600.0);

    options.num_slots = 1;
    CHECK_THROWS_AS(fw_msa(sequences, cost, options), infeasible_error);
}

namespace {

// Alignment with slot supports (5, 4, 3, 3, 3, 1) over five items.
std::pair<std::vector<TokenSequence>, GlobalAlignment> support_fixture() {
    const Token t = tok("do", "thing");
    std::vector<TokenSequence> sequences = {
        seq("i0", {t, t, t, t, t, t}), seq("i1", {t, t, t, t, t}), seq("i2", {t, t, t, t}),
        seq("i3", {t, t, t}),          seq("i4", {t})};
    GlobalAlignment alignment;
    alignment.num_slots = 6;
    alignment.slot_of_token = {{0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4}, {0, 1, 3, 4}, {0, 1, 2}, {0}};
    return {std::move(sequences), std::move(alignment)};
}

}  // namespace

TEST_CASE("extract steps: cutting through a tied group shrinks k") {
    auto [sequences, alignment] = support_fixture();
    const auto steps = extract_main_steps(alignment, sequences, 4);
    CHECK(steps.num_steps == 2);  // supports 5,4,3,3,3,1: K=4 splits the 3s
    CHECK(steps.slot_of_step == std::vector<int>{0, 1});
    CHECK(steps.warning.empty());
}

TEST_CASE("extract steps: K beyond the occupied slots keeps them all") {
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("open", "hood"), tok("connect", "cable"), tok("start", "car")}),
        seq("b", {tok("open", "hood"), tok("connect", "cable")}),
        seq("c", {tok("open", "hood")})};
    GlobalAlignment alignment;
    alignment.num_slots = 4;
    alignment.slot_of_token = {{0, 1, 2}, {0, 1}, {0}};
    const auto steps = extract_main_steps(alignment, sequences, 10);
    CHECK(steps.num_steps == 3);
    CHECK(steps.slot_of_step == std::vector<int>{0, 1, 2});
}

TEST_CASE("extract steps: a tie group wider than K leaves nothing") {
    const Token t = tok("do", "thing");
    const std::vector<TokenSequence> sequences = {seq("a", {t, t, t}), seq("b", {t, t, t})};
    GlobalAlignment alignment;
    alignment.num_slots = 3;
    alignment.slot_of_token = {{0, 1, 2}, {0, 1, 2}};  // supports 2,2,2
    const auto steps = extract_main_steps(alignment, sequences, 2);
    CHECK(steps.num_steps == 0);
    CHECK(!steps.warning.empty());
    for (const auto& row : steps.step_of_token)
        for (int k : row) CHECK(k == -1);
}

TEST_CASE("extract steps: representative labels are modes with lexicographic ties") {
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("zip", "bag")}), seq("b", {tok("zip", "bag")}),
        seq("c", {tok("add", "water")}), seq("d", {tok("add", "water")})};
    GlobalAlignment alignment;
    alignment.num_slots = 1;
    alignment.slot_of_token = {{0}, {0}, {0}, {0}};
    const auto steps = extract_main_steps(alignment, sequences, 1);
    REQUIRE(steps.num_steps == 1);
    CHECK(steps.labels[0] == tok("add", "water"));  // 2-2 tie, lexicographic
}

TEST_CASE("extract steps: assignments point at selected slots in template order") {
    auto [sequences, alignment] = support_fixture();
    const auto steps = extract_main_steps(alignment, sequences, 2);
    REQUIRE(steps.num_steps == 2);
    for (std::size_t n = 0; n < sequences.size(); ++n) {
        for (std::size_t s = 0; s < sequences[n].tokens.size(); ++s) {
            const int k = steps.step_of_token[n][s];
            if (k >= 0) CHECK(alignment.slot_of_token[n][s] == steps.slot_of_step[k]);
        }
    }
    CHECK_THROWS_AS(extract_main_steps(alignment, sequences, 0), schema_error);
}
