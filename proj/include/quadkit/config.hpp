#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quadkit/domains.hpp"
#include "quadkit/stats.hpp"

namespace quadkit::config {

// Which language identifier the pipeline plugs in. None disables language
// agreement analysis (declared-tag distributions still work).
enum class IdentifierKind { None, Trigram, Oracle, Command };

std::string_view to_string(IdentifierKind kind);

// Every knob of a run. The struct round-trips losslessly through its textual
// form: parse_text(to_text(c)) == c for any in-range config.
struct PipelineConfig {
    std::vector<std::string> inputs;     // file paths or shell-style globs
    std::uint32_t parallelism = 1;       // chunk workers, >= 1
    std::uint64_t window = 145;          // node-assembly window, >= 1
    bool inclusive_offset = false;       // +1 on reported window spreads
    double misspelling_threshold = 0.3;  // [0, 1]
    double sample_rate = 0.01;           // (0, 1]
    std::uint64_t seed = 0;

    IdentifierKind identifier = IdentifierKind::None;
    std::string identifier_model;  // profile file, oracle sidecar, or command line

    // Trust policy; comparator unset means the trust filter is off.
    std::optional<domains::Comparator> trust_comparator;
    double trust_threshold = 0.0;
    domains::AbsentRank trust_absent = domains::AbsentRank::Quarantine;

    std::string rank_offline_csv;  // when set, ranks come from this file only
    std::string rank_cache;        // JSONL cache path ("" disables caching)
    std::uint64_t rank_cache_ttl_seconds = 7 * 24 * 3600;

    std::string report_path = "-";  // "-" writes to stdout
    std::string output_path;        // cleaned/normalized quads destination
    std::string exclusion_log;      // clean-run exclusion counters (JSON)
    stats::ReportFormat format = stats::ReportFormat::Json;

    bool operator==(const PipelineConfig&) const = default;
};

// Canonical text form: one key=value per line, fixed key order, shortest
// round-trip float formatting. Inputs repeat the "input" key.
std::string to_text(const PipelineConfig& config);

// Parses the line-oriented form; '#' starts a comment, blank lines are
// skipped. Unknown keys or malformed values throw std::runtime_error with the
// offending line number.
PipelineConfig parse_text(const std::string& text);
PipelineConfig load_file(const std::string& path);

// Applies one key=value assignment (shared by file lines and CLI flags).
// Throws std::runtime_error on unknown keys or unparsable values.
void assign(PipelineConfig& config, const std::string& key, const std::string& value);

// Enforces documented ranges; throws std::invalid_argument when violated.
void validate(const PipelineConfig& config);

// FNV-1a 64 over the canonical text, as 16 lowercase hex digits. The
// parallelism line is skipped: worker count tunes execution, not results, and
// reports must stay byte-identical across worker counts. Two configs share a
// digest exactly when their canonical forms match elsewhere.
std::string digest(const PipelineConfig& config);

// Builds the trust policy from the config fields. Returns nullopt when the
// comparator is unset (trust filtering disabled).
std::optional<domains::TrustPolicy> trust_policy(const PipelineConfig& config);

}  // namespace quadkit::config
