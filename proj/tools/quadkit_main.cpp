#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "quadkit/config.hpp"
#include "quadkit/pipeline.hpp"
#include "quadkit/synthetic.hpp"

#ifndef QUADKIT_VERSION
#define QUADKIT_VERSION "0.0.0-dev"
#endif

namespace {

// Flag values arrive as raw strings and funnel through the same assignment
// path as config-file lines, so both forms accept identical spellings.
struct FlagSet {
    std::vector<std::string> inputs;
    std::vector<std::pair<std::string, std::string>> assignments;
};

void add_common_options(CLI::App* cmd, std::string& config_path, FlagSet& flags) {
    cmd->add_option("--config", config_path, "configuration file (key=value lines)");
    cmd->add_option("-i,--input", flags.inputs, "input file or glob (repeatable)");
    auto bind = [cmd, &flags](const std::string& flag, const std::string& key,
                              const std::string& help) {
        cmd->add_option_function<std::string>(
            flag,
            [&flags, key](const std::string& value) { flags.assignments.push_back({key, value}); },
            help);
    };
    bind("--parallelism", "parallelism", "chunk worker count (default 1)");
    bind("--window", "window", "node assembly window in statements (default 145)");
    bind("--inclusive-offset", "inclusive_offset",
         "true/false: count window spreads inclusively (default false)");
    bind("--misspelling-threshold", "misspelling_threshold",
         "max normalized edit distance for vocabulary misspellings (default 0.3)");
    bind("--sample-rate", "sample_rate", "literal sampling rate in (0,1] (default 0.01)");
    bind("--seed", "seed", "sampling seed (default 0)");
    bind("--identifier", "identifier", "language identifier: none|trigram|oracle|command");
    bind("--identifier-model", "identifier_model",
         "identifier model: profile file, sidecar JSON, or command line");
    bind("--trust-comparator", "trust_comparator",
         "none|lower-is-trusted|higher-is-trusted (default none)");
    bind("--trust-threshold", "trust_threshold", "rank threshold (inclusive)");
    bind("--trust-absent", "trust_absent", "keep|drop|quarantine for unranked domains");
    bind("--rank-offline-csv", "rank_offline_csv", "rank snapshot CSV; disables network");
    bind("--rank-cache", "rank_cache", "rank cache file (JSON lines)");
    bind("--rank-cache-ttl", "rank_cache_ttl_seconds", "rank cache TTL in seconds");
    bind("--report", "report", "report destination (default - for stdout)");
    bind("--output", "output", "statement output path (clean/normalize)");
    bind("--exclusion-log", "exclusion_log", "clean-run exclusion counters (JSON)");
    bind("--format", "format", "report format: json|tsv (default json)");
}

quadkit::pipeline::RunContext build_context(const std::string& config_path,
                                            const FlagSet& flags) {
    quadkit::pipeline::RunContext ctx;
    if (!config_path.empty()) ctx.config = quadkit::config::load_file(config_path);
    for (const auto& input : flags.inputs) ctx.config.inputs.push_back(input);
    for (const auto& [key, value] : flags.assignments)
        quadkit::config::assign(ctx.config, key, value);
    if (const char* key = std::getenv("QUADKIT_RANK_API_KEY")) ctx.api_key = key;
    if (ctx.config.identifier_model.empty()) {
        if (const char* model = std::getenv("QUADKIT_IDENTIFIER_MODEL"))
            ctx.config.identifier_model = model;
    }
    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming profiler and cleaner for product structured-data dumps"};
    app.set_version_flag("--version", QUADKIT_VERSION);
    app.require_subcommand(1);

    struct SubSpec {
        std::string config_path;
        FlagSet flags;
    };
    std::map<std::string, SubSpec> specs;
    using Cmd = int (*)(quadkit::pipeline::RunContext&);
    const std::vector<std::pair<std::string, std::pair<const char*, Cmd>>> commands = {
        {"profile", {"full corpus profile report", &quadkit::pipeline::cmd_profile}},
        {"validate", {"property and node validity report", &quadkit::pipeline::cmd_validate}},
        {"languages", {"language distribution and tag agreement report",
                       &quadkit::pipeline::cmd_languages}},
        {"windows", {"statement window distribution report", &quadkit::pipeline::cmd_windows}},
        {"domains", {"pay-level-domain distribution report", &quadkit::pipeline::cmd_domains}},
        {"clean", {"apply all cleaning filters and write surviving statements",
                   &quadkit::pipeline::cmd_clean}},
        {"normalize", {"rewrite variant vocabulary hosts to canonical form",
                       &quadkit::pipeline::cmd_normalize}},
    };
    for (const auto& [name, info] : commands) {
        CLI::App* cmd = app.add_subcommand(name, info.first);
        SubSpec& spec = specs[name];
        add_common_options(cmd, spec.config_path, spec.flags);
    }

    // generate: corpus synthesis with a ground-truth sidecar.
    quadkit::synthetic::SyntheticSpec gen_spec;
    std::string gen_corpus = "-";
    std::string gen_truth;
    std::vector<std::string> gen_spreads;
    std::vector<std::string> gen_languages;
    {
        CLI::App* cmd = app.add_subcommand(
            "generate", "emit a deterministic synthetic corpus plus ground-truth sidecar");
        cmd->add_option("--nodes", gen_spec.node_count, "product node count");
        cmd->add_option("--validity-rate", gen_spec.validity_rate,
                        "share of nodes built valid [0,1]");
        cmd->add_option("--tag-rate", gen_spec.tag_rate,
                        "share of descriptions carrying a language tag [0,1]");
        cmd->add_option("--tag-correctness", gen_spec.tag_correctness_rate,
                        "share of tags matching the text language [0,1]");
        cmd->add_option("--variant-rate", gen_spec.variant_rate,
                        "share of nodes typed via variant vocabulary hosts [0,1]");
        cmd->add_option("--spread", gen_spreads,
                        "SPREAD=SHARE pair, repeatable (spreads are multiples of 5)");
        cmd->add_option("--languages", gen_languages, "language codes (repeatable)");
        cmd->add_option("--plds", gen_spec.pld_count, "distinct page domains");
        cmd->add_option("--seed", gen_spec.seed, "generator seed");
        cmd->add_option("--corpus", gen_corpus, "statement output path (default stdout)");
        cmd->add_option("--truth", gen_truth, "ground-truth sidecar path");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [name, info] : commands) {
            if (app.get_subcommand(name)->parsed()) {
                const SubSpec& spec = specs.at(name);
                auto ctx = build_context(spec.config_path, spec.flags);
                return info.second(ctx);
            }
        }
        if (app.get_subcommand("generate")->parsed()) {
            if (!gen_spreads.empty()) {
                gen_spec.spread_distribution.clear();
                for (const auto& pair : gen_spreads) {
                    std::size_t eq = pair.find('=');
                    if (eq == std::string::npos)
                        throw std::runtime_error("--spread expects SPREAD=SHARE: " + pair);
                    gen_spec.spread_distribution[std::stoull(pair.substr(0, eq))] =
                        std::stod(pair.substr(eq + 1));
                }
            }
            if (!gen_languages.empty()) gen_spec.languages = gen_languages;
            quadkit::pipeline::RunContext ctx;
            return quadkit::pipeline::cmd_generate(ctx, gen_spec, gen_corpus, gen_truth);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
