#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "saln/evalkit.hpp"
#include "saln/textalign.hpp"
#include "saln/types.hpp"
#include "saln/vidcluster.hpp"

namespace saln::io {

// Token sequences: top-level JSON array of
//   {item_id, tokens: [{verb, object, start_s, end_s}]}.
std::vector<TokenSequence> read_token_sequences(const std::filesystem::path& path);
void write_token_sequences(const std::filesystem::path& path,
                           std::span<const TokenSequence> sequences);

// Cost matrix CSV: header row of "verb object" vocabulary cells, then the
// dense D x D matrix.
textalign::TokenCostMatrix read_cost_csv(const std::filesystem::path& path);
void write_cost_csv(const std::filesystem::path& path, const textalign::TokenCostMatrix& cost);

// Feature streams. CSV: one row of d values per interval, no header.
// Binary: magic "SALN", u32 version, u64 T, u64 d, then T*d little-endian
// doubles in row-major order.
FeatureStream read_features_csv(const std::filesystem::path& path, const std::string& item_id,
                                double interval_duration_s);
FeatureStream read_features_bin(const std::filesystem::path& path, const std::string& item_id,
                                double interval_duration_s);
void write_features_csv(const std::filesystem::path& path, const FeatureStream& stream);
void write_features_bin(const std::filesystem::path& path, const FeatureStream& stream);

// Manifest tying item ids to feature files:
//   {interval_duration_s, items: [{item_id, path}]}, paths relative to the
// manifest's directory; format inferred from the file extension (.bin / .csv).
std::vector<FeatureStream> read_feature_manifest(const std::filesystem::path& path);
void write_feature_corpus(const std::filesystem::path& dir,
                          std::span<const FeatureStream> streams, const std::string& format,
                          const std::string& manifest_name = "features.json");

CorpusAnnotation read_annotation(const std::filesystem::path& path);
void write_annotation(const std::filesystem::path& path, const CorpusAnnotation& annotation);

void write_alignment(const std::filesystem::path& path,
                     const textalign::GlobalAlignment& alignment,
                     std::span<const TokenSequence> sequences);

// Step assignment: {num_steps, steps: [{step, slot, label}], items:
//   [{item_id, r: [[token, step, 1], ...]}]} with R in sparse triplet form.
void write_steps(const std::filesystem::path& path, const textalign::StepAssignment& assignment,
                 std::span<const TokenSequence> sequences);
textalign::StepAssignment read_steps(const std::filesystem::path& path,
                                     std::span<const TokenSequence> sequences);

// Localization: top-level array of {item_id, steps: [{step, interval,
// start_s, end_s}]}.
void write_localization(const std::filesystem::path& path,
                        const vidcluster::StepLocalization& localization);

void write_score(const std::filesystem::path& path, const evalkit::ScoreReport& report,
                 double f1_min, double f1_max);

void write_stats(const std::filesystem::path& path, const evalkit::CorpusStats& stats);

std::vector<Token> read_script(const std::filesystem::path& path);
void write_script(const std::filesystem::path& path, std::span<const Token> script);

std::map<Token, Token> read_equivalence(const std::filesystem::path& path);

// Flat result rows, one per (task, method, K, seed), for table assembly.
struct ScoreRow {
    std::string task;
    std::string method;
    int requested_steps = 0;
    std::uint64_t seed = 0;
    int k_pred = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double f1_min = 0.0;
    double f1_max = 0.0;
};
void append_score_csv(const std::filesystem::path& path, const ScoreRow& row);

}  // namespace saln::io
