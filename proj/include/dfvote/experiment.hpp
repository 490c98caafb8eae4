#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dfvote/config.hpp"
#include "dfvote/stat_verify.hpp"

namespace dfvote {

inline constexpr const char* kToolVersion = "0.1.0";

struct MarginIngest {
    std::vector<std::pair<std::int64_t, double>> points;
    std::vector<std::string> warnings;
};

/// Reads a CSV with header population,abs_margin (raw counts, divided by
/// population) or population,margin_per_capita. Rows with nonpositive
/// population are dropped and exact duplicate rows collapsed, each with a
/// warning; unparsable rows raise a DataError listing their line numbers.
MarginIngest ingest_margins(const std::string& path);
MarginIngest ingest_margins_text(const std::string& text);

struct RunOptions {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> input;
    int workers = 0;
    /// Human-readable progress and results.
    std::ostream* log = nullptr;
};

struct RunResult {
    std::vector<VerificationReport> reports;
    std::string config_hash;
    std::string output_dir;
    /// 0 when every verification passed, 1 otherwise.
    int exit_code = 0;
};

/// Runs one experiment and writes its artifacts: margins.csv (when margins
/// are sampled), reports.jsonl, summary.csv and manifest.json.
RunResult run_experiment(ExperimentConfig config, const RunOptions& options);

}  // namespace dfvote
