#pragma once

#include <compare>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "saln/errors.hpp"

namespace saln {

/// A (verb, direct object) pair, the atomic unit of the text stage.
/// Equality is exact string equality on both fields.
struct Token {
    std::string verb;
    std::string object;

    auto operator<=>(const Token&) const = default;

    std::string str() const { return verb + " " + object; }
};

/// Closed time interval in seconds.
struct TimeSpan {
    double start_s = 0.0;
    double end_s = 0.0;
};

/// One item's ordered tokens with their caption time spans.
/// Spans need not be disjoint; each must satisfy start_s <= end_s.
struct TokenSequence {
    std::string item_id;
    std::vector<Token> tokens;
    std::vector<TimeSpan> spans;

    int length() const { return static_cast<int>(tokens.size()); }
};

/// One item's interval-feature matrix: one row per time interval.
struct FeatureStream {
    std::string item_id;
    Eigen::MatrixXd features;  // T_n x d
    double interval_duration_s = 1.0;

    int intervals() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
    TimeSpan interval_span(int t) const {
        return {t * interval_duration_s, (t + 1) * interval_duration_s};
    }
};

/// A ground-truth occurrence of a step within an item.
struct AnnotationEvent {
    int step = 0;  // in [0, num_gt_steps)
    double start_s = 0.0;
    double end_s = 0.0;
};

struct ItemAnnotation {
    std::string item_id;
    std::vector<AnnotationEvent> events;  // temporal order
};

/// Ground-truth step intervals for a corpus; steps are indexed against a
/// global ordered script 0..num_gt_steps-1.
struct CorpusAnnotation {
    int num_gt_steps = 0;
    std::vector<ItemAnnotation> items;
};

inline void validate_sequence(const TokenSequence& seq) {
    if (seq.spans.size() != seq.tokens.size())
        throw schema_error("item '" + seq.item_id + "': spans/tokens length mismatch");
    for (const auto& tok : seq.tokens)
        if (tok.verb.empty() || tok.object.empty())
            throw schema_error("item '" + seq.item_id + "': token with empty verb or object");
    for (const auto& span : seq.spans)
        if (span.end_s < span.start_s)
            throw schema_error("item '" + seq.item_id + "': span with end_s < start_s");
}

inline void validate_annotation(const CorpusAnnotation& ann) {
    if (ann.num_gt_steps < 1) throw schema_error("annotation: num_gt_steps must be >= 1");
    for (const auto& item : ann.items) {
        double prev = -1.0;
        for (const auto& ev : item.events) {
            if (ev.step < 0 || ev.step >= ann.num_gt_steps)
                throw schema_error("item '" + item.item_id + "': event step out of range");
            if (ev.end_s < ev.start_s)
                throw schema_error("item '" + item.item_id + "': event with end_s < start_s");
            if (ev.start_s < prev)
                throw schema_error("item '" + item.item_id + "': events not in temporal order");
            prev = ev.start_s;
        }
    }
}

}  // namespace saln
