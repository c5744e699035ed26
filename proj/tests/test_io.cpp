#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "saln/io.hpp"
#include "saln/synthgen.hpp"

using namespace saln;
using test::seq;
using test::tok;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("saln_io_test_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("token sequences: round trip and schema errors") {
    TempDir dir;
    std::vector<TokenSequence> sequences = {
        seq("a", {tok("loosen", "nut"), tok("jack", "car")}),
        seq("b", {tok("jack", "car")})};
    sequences[0].spans[0] = {1.5, 3.25};
    const auto path = dir.path / "tokens.json";
    io::write_token_sequences(path, sequences);
    const auto loaded = io::read_token_sequences(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].tokens == sequences[0].tokens);
    CHECK(loaded[0].spans[0].start_s == 1.5);
    CHECK(loaded[0].spans[0].end_s == 3.25);
    CHECK(loaded[1].item_id == "b");

    std::ofstream(dir.path / "empty.json") << "[]\n";
    CHECK_THROWS_AS(io::read_token_sequences(dir.path / "empty.json"), schema_error);
    std::ofstream(dir.path / "garbage.json") << "{not json";
    try {
        io::read_token_sequences(dir.path / "garbage.json");
        FAIL("expected schema_error");
    } catch (const schema_error& e) {
        CHECK(std::string(e.what()).find("garbage.json") != std::string::npos);
    }
    CHECK_THROWS_AS(io::read_token_sequences(dir.path / "missing.json"), schema_error);
}

TEST_CASE("cost matrix csv: round trip") {
    TempDir dir;
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("loosen", "nut"), tok("jack", "car")})};
    const auto cost = textalign::build_token_cost(sequences, -1.0, 100.0);
    const auto path = dir.path / "cost.csv";
    io::write_cost_csv(path, cost);
    const auto loaded = io::read_cost_csv(path);
    CHECK(loaded.vocabulary == cost.vocabulary);
    CHECK((loaded.cost - cost.cost).cwiseAbs().maxCoeff() == 0.0);

    std::ofstream(dir.path / "bad.csv") << "loosen nut,jack car\n-1,100\n";
    CHECK_THROWS_AS(io::read_cost_csv(dir.path / "bad.csv"), schema_error);
}

TEST_CASE("feature streams: csv and binary round trips") {
    TempDir dir;
    Rng rng(9);
    FeatureStream stream{"clip", test::random_matrix(rng, 7, 3), 0.5};

    io::write_features_csv(dir.path / "clip.csv", stream);
    const auto from_csv = io::read_features_csv(dir.path / "clip.csv", "clip", 0.5);
    CHECK((from_csv.features - stream.features).cwiseAbs().maxCoeff() == 0.0);

    io::write_features_bin(dir.path / "clip.bin", stream);
    const auto from_bin = io::read_features_bin(dir.path / "clip.bin", "clip", 0.5);
    CHECK((from_bin.features - stream.features).cwiseAbs().maxCoeff() == 0.0);

    const auto bytes = slurp(dir.path / "clip.bin");
    REQUIRE(bytes.size() == 4 + 4 + 8 + 8 + 7 * 3 * 8);
    CHECK(bytes.substr(0, 4) == "SALN");

    std::ofstream(dir.path / "short.bin", std::ios::binary) << "SALN";
    CHECK_THROWS_AS(io::read_features_bin(dir.path / "short.bin", "x", 1.0), schema_error);
}

TEST_CASE("feature manifest: corpus round trip") {
    TempDir dir;
    Rng rng(10);
    std::vector<FeatureStream> streams = {{"a", test::random_matrix(rng, 4, 2), 2.0},
                                          {"b", test::random_matrix(rng, 6, 2), 2.0}};
    io::write_feature_corpus(dir.path / "features", streams, "bin");
    const auto loaded = io::read_feature_manifest(dir.path / "features" / "features.json");
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].item_id == "a");
    CHECK(loaded[0].interval_duration_s == 2.0);
    CHECK((loaded[1].features - streams[1].features).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("feature manifest: malformed inputs are rejected") {
    TempDir dir;
    Rng rng(12);
    std::vector<FeatureStream> mixed = {{"a", test::random_matrix(rng, 4, 2), 1.0},
                                        {"b", test::random_matrix(rng, 4, 2), 2.0}};
    CHECK_THROWS_AS(io::write_feature_corpus(dir.path / "f", mixed, "bin"), schema_error);
    CHECK_THROWS_AS(io::write_feature_corpus(dir.path / "f", mixed, "hdf5"), schema_error);

    std::ofstream(dir.path / "man.json")
        << R"({"interval_duration_s": 1.0, "items": [{"item_id": "a", "path": "a.bin"}]})";
    CHECK_THROWS_AS(io::read_feature_manifest(dir.path / "man.json"), schema_error);

    std::ofstream(dir.path / "zero.json") << R"({"interval_duration_s": 0, "items": []})";
    CHECK_THROWS_AS(io::read_feature_manifest(dir.path / "zero.json"), schema_error);

    std::ofstream(dir.path / "ext.json")
        << R"({"interval_duration_s": 1.0, "items": [{"item_id": "a", "path": "a.npz"}]})";
    CHECK_THROWS_AS(io::read_feature_manifest(dir.path / "ext.json"), schema_error);
}

TEST_CASE("annotations: round trip preserves events") {
    TempDir dir;
    CorpusAnnotation annotation;
    annotation.num_gt_steps = 3;
    ItemAnnotation item;
    item.item_id = "a";
    item.events = {{0, 0.0, 2.0}, {2, 3.5, 4.0}};
    annotation.items.push_back(item);
    const auto path = dir.path / "ann.json";
    io::write_annotation(path, annotation);
    const auto loaded = io::read_annotation(path);
    CHECK(loaded.num_gt_steps == 3);
    REQUIRE(loaded.items.size() == 1);
    CHECK(loaded.items[0].events[1].step == 2);
    CHECK(loaded.items[0].events[1].start_s == 3.5);
}

TEST_CASE("step assignments: write then read against the same corpus") {
    TempDir dir;
    const std::vector<TokenSequence> sequences = {
        seq("a", {tok("open", "hood"), tok("connect", "cable"), tok("start", "car")}),
        seq("b", {tok("open", "hood"), tok("connect", "cable")})};
    const auto cost = textalign::build_token_cost(sequences);
    const auto alignment = textalign::progressive_align(sequences, cost);
    const auto steps = textalign::extract_main_steps(alignment, sequences, 2);

    const auto path = dir.path / "steps.json";
    io::write_steps(path, steps, sequences);
    const auto loaded = io::read_steps(path, sequences);
    CHECK(loaded.num_steps == steps.num_steps);
    CHECK(loaded.labels == steps.labels);
    CHECK(loaded.slot_of_step == steps.slot_of_step);
    CHECK(loaded.step_of_token == steps.step_of_token);
}

TEST_CASE("script and equivalence files") {
    TempDir dir;
    const std::vector<Token> script = {tok("loosen", "nut"), tok("jack", "car")};
    io::write_script(dir.path / "script.json", script);
    CHECK(io::read_script(dir.path / "script.json") == script);

    std::ofstream(dir.path / "eq.json")
        << R"([{"from": {"verb": "undo", "object": "bolt"},
                "to": {"verb": "loosen", "object": "nut"}}])";
    const auto mapping = io::read_equivalence(dir.path / "eq.json");
    CHECK(mapping.at(tok("undo", "bolt")) == tok("loosen", "nut"));
}

TEST_CASE("synthetic corpus: serialized twice, byte identical") {
    TempDir dir;
    synthgen::SynthConfig config;
    config.num_items = 5;
    config.seed = 31;
    for (const char* run : {"one", "two"}) {
        const auto corpus = synthgen::generate(config);
        fs::create_directories(dir.path / run);
        io::write_token_sequences(dir.path / run / "tokens.json", corpus.sequences);
        io::write_annotation(dir.path / run / "ann.json", corpus.annotation);
        io::write_feature_corpus(dir.path / run / "features", corpus.streams, "bin");
    }
    CHECK(slurp(dir.path / "one" / "tokens.json") == slurp(dir.path / "two" / "tokens.json"));
    CHECK(slurp(dir.path / "one" / "ann.json") == slurp(dir.path / "two" / "ann.json"));
    CHECK(slurp(dir.path / "one" / "features" / "item00.bin") ==
          slurp(dir.path / "two" / "features" / "item00.bin"));
}
