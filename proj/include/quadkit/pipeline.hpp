#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "quadkit/config.hpp"
#include "quadkit/rank_client.hpp"
#include "quadkit/stats.hpp"
#include "quadkit/synthetic.hpp"

namespace quadkit::pipeline {

// Everything a command run drops from the cleaned output or never parsed.
struct ExclusionCounts {
    std::uint64_t malformed_lines = 0;
    std::uint64_t untrusted_nodes = 0;
    std::uint64_t quarantined_nodes = 0;
    std::uint64_t invalid_nodes = 0;
    std::uint64_t invalid_properties = 0;  // property statements dropped from kept nodes
    std::uint64_t disagreeing_literals = 0;
    std::uint64_t kept_nodes = 0;
    std::uint64_t kept_quads = 0;

    void merge(const ExclusionCounts& other);
    bool operator==(const ExclusionCounts&) const = default;
};

// Per-run state beyond the serializable config: secrets and test seams.
struct RunContext {
    config::PipelineConfig config;
    std::string api_key;  // rank provider key, from the environment

    // When set, the rank client uses this transport instead of real HTTP.
    std::unique_ptr<rank::Transport> transport;

    std::ostream* out = nullptr;  // "-" outputs; defaults to std::cout
    std::ostream* err = nullptr;  // diagnostics; defaults to std::cerr
};

// Expands shell-style glob patterns into an ordered, deduplicated file list.
// Patterns without matches contribute nothing.
std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns);

// Writes content to path via a temporary file and rename, creating parent
// directories as needed; "-" streams to stdout_target instead.
void write_atomic(const std::string& path, const std::string& content,
                  std::ostream* stdout_target);

// Commands return the process exit code: 0 success, 2 usage/input error,
// 3 when some chunks failed but the run completed.
int cmd_profile(RunContext& ctx);
int cmd_validate(RunContext& ctx);
int cmd_languages(RunContext& ctx);
int cmd_windows(RunContext& ctx);
int cmd_domains(RunContext& ctx);
int cmd_clean(RunContext& ctx);
int cmd_normalize(RunContext& ctx);
int cmd_generate(RunContext& ctx, const synthetic::SyntheticSpec& spec,
                 const std::string& corpus_path, const std::string& truth_path);

}  // namespace quadkit::pipeline
