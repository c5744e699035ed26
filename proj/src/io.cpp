#include "saln/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "binary feature files are little-endian");

namespace saln::io {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw schema_error("'" + path.string() + "': " + e.what());
    }
}

void dump_file(const std::filesystem::path& path, const json& value) {
    std::ofstream out(path);
    if (!out) throw schema_error("cannot write '" + path.string() + "'");
    out << value.dump(2) << "\n";
}

template <typename T>
T require(const json& object, const char* key, const std::filesystem::path& path) {
    if (!object.contains(key))
        throw schema_error("'" + path.string() + "': missing field '" + key + "'");
    try {
        return object.at(key).get<T>();
    } catch (const json::exception& e) {
        throw schema_error("'" + path.string() + "': field '" + key + "': " + e.what());
    }
}

json token_json(const Token& tok) { return json{{"verb", tok.verb}, {"object", tok.object}}; }

Token token_from(const json& value, const std::filesystem::path& path) {
    return {require<std::string>(value, "verb", path),
            require<std::string>(value, "object", path)};
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace

std::vector<TokenSequence> read_token_sequences(const std::filesystem::path& path) {
    const json root = parse_file(path);
    if (!root.is_array()) throw schema_error("'" + path.string() + "': expected a JSON array");
    if (root.empty()) throw schema_error("'" + path.string() + "': empty corpus");
    std::vector<TokenSequence> sequences;
    for (const auto& item : root) {
        TokenSequence seq;
        seq.item_id = require<std::string>(item, "item_id", path);
        if (!item.contains("tokens"))
            throw schema_error("'" + path.string() + "': missing field 'tokens'");
        for (const auto& tok : item.at("tokens")) {
            seq.tokens.push_back(token_from(tok, path));
            seq.spans.push_back({require<double>(tok, "start_s", path),
                                 require<double>(tok, "end_s", path)});
        }
        validate_sequence(seq);
        sequences.push_back(std::move(seq));
    }
    return sequences;
}

void write_token_sequences(const std::filesystem::path& path,
                           std::span<const TokenSequence> sequences) {
    json root = json::array();
    for (const auto& seq : sequences) {
        json tokens = json::array();
        for (int s = 0; s < seq.length(); ++s) {
            json tok = token_json(seq.tokens[s]);
            tok["start_s"] = seq.spans[s].start_s;
            tok["end_s"] = seq.spans[s].end_s;
            tokens.push_back(std::move(tok));
        }
        root.push_back(json{{"item_id", seq.item_id}, {"tokens", std::move(tokens)}});
    }
    dump_file(path, root);
}

textalign::TokenCostMatrix read_cost_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        throw schema_error("'" + path.string() + "': missing vocabulary header");

    textalign::TokenCostMatrix cost;
    for (const auto& cell : split_csv_line(line)) {
        const auto space = cell.find(' ');
        if (space == std::string::npos || space == 0 || space + 1 == cell.size())
            throw schema_error("'" + path.string() + "': header cell '" + cell +
                               "' is not 'verb object'");
        Token tok{cell.substr(0, space), cell.substr(space + 1)};
        if (!cost.index.emplace(tok, static_cast<int>(cost.vocabulary.size())).second)
            throw schema_error("'" + path.string() + "': duplicate vocabulary token");
        cost.vocabulary.push_back(std::move(tok));
    }
    const int vocab = static_cast<int>(cost.vocabulary.size());
    cost.cost.resize(vocab, vocab);
    for (int i = 0; i < vocab; ++i) {
        if (!std::getline(in, line))
            throw schema_error("'" + path.string() + "': expected " + std::to_string(vocab) +
                               " matrix rows");
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != vocab)
            throw schema_error("'" + path.string() + "': row " + std::to_string(i + 1) +
                               " has wrong width");
        for (int j = 0; j < vocab; ++j) {
            try {
                cost.cost(i, j) = std::stod(cells[j]);
            } catch (const std::exception&) {
                throw schema_error("'" + path.string() + "': bad number '" + cells[j] + "'");
            }
        }
    }
    if ((cost.cost - cost.cost.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw schema_error("'" + path.string() + "': cost matrix is not symmetric");
    return cost;
}

void write_cost_csv(const std::filesystem::path& path, const textalign::TokenCostMatrix& cost) {
    std::ofstream out(path);
    if (!out) throw schema_error("cannot write '" + path.string() + "'");
    for (std::size_t i = 0; i < cost.vocabulary.size(); ++i)
        out << (i ? "," : "") << cost.vocabulary[i].str();
    out << "\n";
    for (Eigen::Index i = 0; i < cost.cost.rows(); ++i) {
        for (Eigen::Index j = 0; j < cost.cost.cols(); ++j)
            out << (j ? "," : "") << format_double(cost.cost(i, j));
        out << "\n";
    }
}

FeatureStream read_features_csv(const std::filesystem::path& path, const std::string& item_id,
                                double interval_duration_s) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split_csv_line(line)) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw schema_error("'" + path.string() + "': bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw schema_error("'" + path.string() + "': ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw schema_error("'" + path.string() + "': no intervals");

    FeatureStream stream;
    stream.item_id = item_id;
    stream.interval_duration_s = interval_duration_s;
    stream.features.resize(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t i = 0; i < rows[t].size(); ++i)
            stream.features(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
                rows[t][i];
    return stream;
}

namespace {
constexpr char kMagic[4] = {'S', 'A', 'L', 'N'};
constexpr std::uint32_t kBinVersion = 1;
}  // namespace

FeatureStream read_features_bin(const std::filesystem::path& path, const std::string& item_id,
                                double interval_duration_s) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw schema_error("cannot open '" + path.string() + "'");
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t rows = 0, cols = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw schema_error("'" + path.string() + "': not a SALN feature file");
    if (version != kBinVersion)
        throw schema_error("'" + path.string() + "': unsupported version " +
                           std::to_string(version));
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 20))
        throw schema_error("'" + path.string() + "': implausible dimensions");

    FeatureStream stream;
    stream.item_id = item_id;
    stream.interval_duration_s = interval_duration_s;
    stream.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    // Row-major on disk, column-major in memory.
    std::vector<double> buffer(cols);
    for (std::uint64_t t = 0; t < rows; ++t) {
        in.read(reinterpret_cast<char*>(buffer.data()),
                static_cast<std::streamsize>(cols * sizeof(double)));
        if (!in) throw schema_error("'" + path.string() + "': truncated feature data");
        for (std::uint64_t i = 0; i < cols; ++i)
            stream.features(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
                buffer[i];
    }
    return stream;
}

void write_features_csv(const std::filesystem::path& path, const FeatureStream& stream) {
    std::ofstream out(path);
    if (!out) throw schema_error("cannot write '" + path.string() + "'");
    for (int t = 0; t < stream.intervals(); ++t) {
        for (int i = 0; i < stream.dim(); ++i)
            out << (i ? "," : "") << format_double(stream.features(t, i));
        out << "\n";
    }
}

void write_features_bin(const std::filesystem::path& path, const FeatureStream& stream) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw schema_error("cannot write '" + path.string() + "'");
    const std::uint64_t rows = static_cast<std::uint64_t>(stream.intervals());
    const std::uint64_t cols = static_cast<std::uint64_t>(stream.dim());
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kBinVersion), sizeof kBinVersion);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    std::vector<double> buffer(cols);
    for (std::uint64_t t = 0; t < rows; ++t) {
        for (std::uint64_t i = 0; i < cols; ++i)
            buffer[i] = stream.features(static_cast<Eigen::Index>(t),
                                        static_cast<Eigen::Index>(i));
        out.write(reinterpret_cast<const char*>(buffer.data()),
                  static_cast<std::streamsize>(cols * sizeof(double)));
    }
}

std::vector<FeatureStream> read_feature_manifest(const std::filesystem::path& path) {
    const json root = parse_file(path);
    const double duration = require<double>(root, "interval_duration_s", path);
    if (duration <= 0.0)
        throw schema_error("'" + path.string() + "': interval_duration_s must be > 0");
    if (!root.contains("items"))
        throw schema_error("'" + path.string() + "': missing field 'items'");
    std::vector<FeatureStream> streams;
    for (const auto& entry : root.at("items")) {
        const auto item_id = require<std::string>(entry, "item_id", path);
        const auto rel = require<std::string>(entry, "path", path);
        const auto file = path.parent_path() / rel;
        if (file.extension() == ".bin")
            streams.push_back(read_features_bin(file, item_id, duration));
        else if (file.extension() == ".csv")
            streams.push_back(read_features_csv(file, item_id, duration));
        else
            throw schema_error("'" + file.string() + "': unknown feature format");
    }
    if (streams.empty()) throw schema_error("'" + path.string() + "': no feature streams");
    return streams;
}

void write_feature_corpus(const std::filesystem::path& dir,
                          std::span<const FeatureStream> streams, const std::string& format,
                          const std::string& manifest_name) {
    if (format != "bin" && format != "csv")
        throw schema_error("feature format must be 'bin' or 'csv'");
    std::filesystem::create_directories(dir);
    json items = json::array();
    double duration = streams.empty() ? 1.0 : streams.front().interval_duration_s;
    for (const auto& stream : streams)
        if (stream.interval_duration_s != duration)
            throw schema_error("feature corpus has mixed interval durations");
    for (const auto& stream : streams) {
        const std::string name = stream.item_id + "." + format;
        if (format == "bin")
            write_features_bin(dir / name, stream);
        else
            write_features_csv(dir / name, stream);
        items.push_back(json{{"item_id", stream.item_id}, {"path", name}});
    }
    dump_file(dir / manifest_name,
              json{{"interval_duration_s", duration}, {"items", std::move(items)}});
}

CorpusAnnotation read_annotation(const std::filesystem::path& path) {
    const json root = parse_file(path);
    CorpusAnnotation annotation;
    annotation.num_gt_steps = require<int>(root, "num_gt_steps", path);
    if (!root.contains("items"))
        throw schema_error("'" + path.string() + "': missing field 'items'");
    for (const auto& entry : root.at("items")) {
        ItemAnnotation item;
        item.item_id = require<std::string>(entry, "item_id", path);
        if (entry.contains("events")) {
            for (const auto& ev : entry.at("events"))
                item.events.push_back({require<int>(ev, "step", path),
                                       require<double>(ev, "start_s", path),
                                       require<double>(ev, "end_s", path)});
        }
        annotation.items.push_back(std::move(item));
    }
    validate_annotation(annotation);
    return annotation;
}

void write_annotation(const std::filesystem::path& path, const CorpusAnnotation& annotation) {
    json items = json::array();
    for (const auto& item : annotation.items) {
        json events = json::array();
        for (const auto& ev : item.events)
            events.push_back(
                json{{"step", ev.step}, {"start_s", ev.start_s}, {"end_s", ev.end_s}});
        items.push_back(json{{"item_id", item.item_id}, {"events", std::move(events)}});
    }
    dump_file(path,
              json{{"num_gt_steps", annotation.num_gt_steps}, {"items", std::move(items)}});
}

void write_alignment(const std::filesystem::path& path,
                     const textalign::GlobalAlignment& alignment,
                     std::span<const TokenSequence> sequences) {
    json items = json::array();
    for (std::size_t n = 0; n < sequences.size(); ++n)
        items.push_back(json{{"item_id", sequences[n].item_id},
                             {"slots", alignment.slot_of_token[n]}});
    dump_file(path, json{{"num_slots", alignment.num_slots}, {"items", std::move(items)}});
}

void write_steps(const std::filesystem::path& path, const textalign::StepAssignment& assignment,
                 std::span<const TokenSequence> sequences) {
    json steps = json::array();
    for (int j = 0; j < assignment.num_steps; ++j)
        steps.push_back(json{{"step", j},
                             {"slot", assignment.slot_of_step[j]},
                             {"label", token_json(assignment.labels[j])}});
    json items = json::array();
    for (std::size_t n = 0; n < sequences.size(); ++n) {
        json triplets = json::array();
        for (std::size_t s = 0; s < assignment.step_of_token[n].size(); ++s)
            if (assignment.step_of_token[n][s] >= 0)
                triplets.push_back(
                    json::array({s, assignment.step_of_token[n][s], 1}));
        items.push_back(json{{"item_id", sequences[n].item_id}, {"r", std::move(triplets)}});
    }
    json root{{"num_steps", assignment.num_steps},
              {"steps", std::move(steps)},
              {"items", std::move(items)}};
    if (!assignment.warning.empty()) root["warning"] = assignment.warning;
    dump_file(path, root);
}

textalign::StepAssignment read_steps(const std::filesystem::path& path,
                                     std::span<const TokenSequence> sequences) {
    const json root = parse_file(path);
    textalign::StepAssignment assignment;
    assignment.num_steps = require<int>(root, "num_steps", path);
    if (root.contains("warning")) assignment.warning = root.at("warning").get<std::string>();
    if (root.contains("steps")) {
        for (const auto& step : root.at("steps")) {
            assignment.slot_of_step.push_back(require<int>(step, "slot", path));
            assignment.labels.push_back(token_from(step.at("label"), path));
        }
    }
    if (static_cast<int>(assignment.labels.size()) != assignment.num_steps)
        throw schema_error("'" + path.string() + "': step list does not match num_steps");

    std::map<std::string, const json*> by_id;
    if (root.contains("items"))
        for (const auto& item : root.at("items"))
            by_id[require<std::string>(item, "item_id", path)] = &item;

    for (const auto& seq : sequences) {
        assignment.item_ids.push_back(seq.item_id);
        std::vector<int> steps(seq.tokens.size(), -1);
        auto it = by_id.find(seq.item_id);
        if (it != by_id.end() && it->second->contains("r")) {
            for (const auto& triplet : it->second->at("r")) {
                if (!triplet.is_array() || triplet.size() < 2)
                    throw schema_error("'" + path.string() + "': malformed triplet");
                const int s = triplet.at(0).get<int>();
                const int k = triplet.at(1).get<int>();
                if (s < 0 || s >= static_cast<int>(steps.size()) || k < 0 ||
                    k >= assignment.num_steps)
                    throw schema_error("'" + path.string() + "': triplet out of range for '" +
                                       seq.item_id + "'");
                steps[s] = k;
            }
        }
        assignment.step_of_token.push_back(std::move(steps));
    }
    return assignment;
}

void write_localization(const std::filesystem::path& path,
                        const vidcluster::StepLocalization& localization) {
    json root = json::array();
    for (const auto& item : localization.items) {
        json steps = json::array();
        for (std::size_t k = 0; k < item.interval_of_step.size(); ++k) {
            const int t = item.interval_of_step[k];
            steps.push_back(json{{"step", k},
                                 {"interval", t},
                                 {"start_s", t * item.interval_duration_s},
                                 {"end_s", (t + 1) * item.interval_duration_s}});
        }
        root.push_back(json{{"item_id", item.item_id}, {"steps", std::move(steps)}});
    }
    dump_file(path, root);
}

void write_score(const std::filesystem::path& path, const evalkit::ScoreReport& report,
                 double f1_min, double f1_max) {
    json items = json::array();
    for (const auto& item : report.items) {
        json flags = json::array();
        for (auto flag : item.step_correct) flags.push_back(static_cast<int>(flag));
        items.push_back(json{{"item_id", item.item_id}, {"step_correct", std::move(flags)}});
    }
    dump_file(path, json{{"precision", report.precision},
                         {"recall", report.recall},
                         {"f1", report.f1},
                         {"f1_min", f1_min},
                         {"f1_max", f1_max},
                         {"correct", report.correct},
                         {"gt_occurrences", report.gt_occurrences},
                         {"predictions", report.predictions},
                         {"matching", report.matching},
                         {"items", std::move(items)}});
}

void write_stats(const std::filesystem::path& path, const evalkit::CorpusStats& stats) {
    json items = json::array();
    for (const auto& item : stats.items)
        items.push_back(json{{"item_id", item.item_id},
                             {"in_order", item.in_order},
                             {"unique_steps", item.unique_steps},
                             {"total_events", item.total_events}});
    json root{{"missing", stats.missing.value()}, {"items", std::move(items)}};
    root["order_error"] = stats.order_error ? json(*stats.order_error) : json(nullptr);
    root["repetition"] = stats.repetition ? json(*stats.repetition) : json(nullptr);
    dump_file(path, root);
}

std::vector<Token> read_script(const std::filesystem::path& path) {
    const json root = parse_file(path);
    if (!root.contains("script"))
        throw schema_error("'" + path.string() + "': missing field 'script'");
    std::vector<Token> script;
    for (const auto& tok : root.at("script")) script.push_back(token_from(tok, path));
    if (script.empty()) throw schema_error("'" + path.string() + "': empty script");
    return script;
}

void write_script(const std::filesystem::path& path, std::span<const Token> script) {
    json tokens = json::array();
    for (const auto& tok : script) tokens.push_back(token_json(tok));
    dump_file(path, json{{"script", std::move(tokens)}});
}

std::map<Token, Token> read_equivalence(const std::filesystem::path& path) {
    const json root = parse_file(path);
    if (!root.is_array()) throw schema_error("'" + path.string() + "': expected a JSON array");
    std::map<Token, Token> mapping;
    for (const auto& entry : root) {
        if (!entry.contains("from") || !entry.contains("to"))
            throw schema_error("'" + path.string() + "': entries need 'from' and 'to'");
        mapping[token_from(entry.at("from"), path)] = token_from(entry.at("to"), path);
    }
    return mapping;
}

void append_score_csv(const std::filesystem::path& path, const ScoreRow& row) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw schema_error("cannot write '" + path.string() + "'");
    if (fresh) out << "task,method,K,seed,k_pred,precision,recall,f1,f1_min,f1_max\n";
    out << row.task << "," << row.method << "," << row.requested_steps << "," << row.seed << ","
        << row.k_pred << "," << format_double(row.precision) << ","
        << format_double(row.recall) << "," << format_double(row.f1) << ","
        << format_double(row.f1_min) << "," << format_double(row.f1_max) << "\n";
}

}  // namespace saln::io
