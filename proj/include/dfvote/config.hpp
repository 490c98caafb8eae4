#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfvote/cwm.hpp"
#include "dfvote/measure.hpp"
#include "dfvote/voting_model.hpp"
#include "json.hpp"

namespace dfvote {

/// JSON pointer -> 1-based source line of the value it names.
using LineMap = std::map<std::string, int>;

struct ParsedDocument {
    nlohmann::json value;
    LineMap lines;
};

/// Parses JSON text and records the line of every value. Syntax errors are
/// ConfigErrors carrying the offending line.
ParsedDocument parse_document(const std::string& text);

/// One experiment: the model description is kept as a JSON document so
/// that the config serializes back exactly.
struct ExperimentConfig {
    std::string experiment;
    nlohmann::json model;
    std::optional<std::int64_t> n;
    std::vector<std::int64_t> n_grid;
    std::int64_t count = 100000;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::map<std::string, double> thresholds;
    std::optional<double> delta;
    std::string input;

    bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string> kExperimentKinds = {
    "simulate", "verify-clt", "verify-llt", "verify-cwm", "estimate-alpha", "correlation-decay"};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);
/// to_json(config).dump(2)
std::string serialize(const ExperimentConfig& config);

/// FNV-1a 64 of the compact serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Builders for the model section; `lines` and `pointer` anchor errors.
BaseMeasure measure_from_json(const nlohmann::json& j, const LineMap& lines = {}, const std::string& pointer = "");
DeFinettiModel model_from_json(const nlohmann::json& j, const LineMap& lines = {}, const std::string& pointer = "");
CouplingSpec coupling_from_json(const nlohmann::json& j, const LineMap& lines = {}, const std::string& pointer = "");

/// Model of a parsed config (anchored to the original document lines when
/// the config came from parse_config).
DeFinettiModel build_model(const ExperimentConfig& config);

}  // namespace dfvote
