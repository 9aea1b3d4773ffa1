#include "quadkit/pipeline.hpp"

#include <glob.h>
#include <sys/stat.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "quadkit/domains.hpp"
#include "quadkit/language.hpp"
#include "quadkit/locality.hpp"
#include "quadkit/nquads.hpp"
#include "quadkit/validity.hpp"
#include "quadkit/vocab.hpp"

#ifndef QUADKIT_VERSION
#define QUADKIT_VERSION "0.0.0-dev"
#endif

namespace quadkit::pipeline {

namespace {

namespace fs = std::filesystem;
using config::PipelineConfig;
using nquads::Quad;
using nquads::QuadStream;
using nquads::Term;
using OrderedJson = nlohmann::ordered_json;

constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

std::ostream& out_stream(RunContext& ctx) { return ctx.out ? *ctx.out : std::cout; }
std::ostream& err_stream(RunContext& ctx) { return ctx.err ? *ctx.err : std::cerr; }

std::int64_t file_mtime(const std::string& path) {
    struct stat info {};
    if (::stat(path.c_str(), &info) != 0) return 0;
    return static_cast<std::int64_t>(info.st_mtime);
}

// One chunk's share of a run. Commands use the fields they need.
struct ChunkWork {
    stats::ProfileStats stats;
    nquads::ParseReport parse;
    std::string output;  // cleaned/normalized statements
    ExclusionCounts exclusions;
    bool failed = false;
    std::string error;
};

std::unique_ptr<language::Identifier> make_identifier(const PipelineConfig& cfg) {
    switch (cfg.identifier) {
        case config::IdentifierKind::None: return nullptr;
        case config::IdentifierKind::Trigram:
            if (cfg.identifier_model.empty())
                return std::make_unique<language::TrigramIdentifier>(
                    language::TrigramIdentifier::load_default());
            return std::make_unique<language::TrigramIdentifier>(cfg.identifier_model);
        case config::IdentifierKind::Oracle:
            if (cfg.identifier_model.empty())
                throw std::runtime_error("the oracle identifier needs identifier_model");
            return std::make_unique<language::OracleIdentifier>(
                language::OracleIdentifier::from_json_file(cfg.identifier_model));
        case config::IdentifierKind::Command:
            if (cfg.identifier_model.empty())
                throw std::runtime_error("the command identifier needs identifier_model");
            return std::make_unique<language::CommandIdentifier>(cfg.identifier_model);
    }
    return nullptr;
}

// Serialized access to one shared rank client; workers share nothing else.
struct RankService {
    std::unique_ptr<rank::RankClient> client;
    domains::TrustPolicy policy;
    std::mutex mutex;

    std::map<std::string, domains::DomainRank> fetch(const std::set<std::string>& plds) {
        std::vector<std::string> list(plds.begin(), plds.end());
        std::lock_guard<std::mutex> lock(mutex);
        return domains::ranks_by_pld(client->fetch(list));
    }
};

std::unique_ptr<RankService> make_rank_service(RunContext& ctx) {
    auto policy = config::trust_policy(ctx.config);
    if (!policy.has_value()) return nullptr;
    rank::ClientConfig rc;
    rc.api_key = ctx.api_key;
    rc.cache_path = ctx.config.rank_cache;
    rc.cache_ttl_seconds = static_cast<std::int64_t>(ctx.config.rank_cache_ttl_seconds);
    rc.offline_csv = ctx.config.rank_offline_csv;
    auto service = std::make_unique<RankService>();
    service->client =
        std::make_unique<rank::RankClient>(std::move(rc), std::move(ctx.transport));
    service->policy = *policy;
    return service;
}

// Rewrites variant vocabulary hosts to their canonical form, in the predicate
// and, for type statements, in the object.
void canonicalize_quad(Quad& quad, const vocab::VocabNormalizer& normalizer) {
    if (quad.predicate.is_iri()) {
        auto c = normalizer.classify(quad.predicate.lexical);
        if (c.canonical_uri.has_value()) quad.predicate.lexical = *c.canonical_uri;
    }
    if (quad.predicate.lexical == kRdfType && quad.object.is_iri()) {
        auto c = normalizer.classify(quad.object.lexical);
        if (c.canonical_uri.has_value()) quad.object.lexical = *c.canonical_uri;
    }
}

// A literal's declared language disagrees with the identifier's finding.
bool disagreeing_literal(const Term& object, const language::Identifier* identifier) {
    if (identifier == nullptr) return false;
    if (!object.is_literal() || object.language.empty()) return false;
    if (!language::LiteralSampler::eligible(object)) return false;
    std::string code = language::normalize_language_code(language::reconcile_tag(object.language));
    std::optional<std::string> reconciled;
    if (!code.empty()) reconciled = code;
    auto identified = identifier->identify(object.lexical);
    return language::judge_agreement(reconciled, identified) == language::Agreement::Disagree;
}

void rebuild_properties(validity::ProductRecord& record) {
    record.properties.clear();
    for (const auto& quad : record.quads)
        record.properties.push_back(
            validity::make_property_entry(quad.predicate.lexical, quad.object));
}

struct ChunkTools {
    const PipelineConfig* cfg = nullptr;
    const language::Identifier* identifier = nullptr;
    const vocab::VocabNormalizer* normalizer = nullptr;
    const domains::SuffixRules* rules = nullptr;
    RankService* ranks = nullptr;  // non-null only when the trust filter is on
};

// Single pass for profiling commands: quad folds, window spreads, sampling,
// node assembly, validity, and domain attribution.
ChunkWork profile_chunk(const std::string& path, const ChunkTools& tools) {
    const PipelineConfig& cfg = *tools.cfg;
    ChunkWork work;
    QuadStream stream = QuadStream::open_file(path);
    locality::SpreadTracker tracker(cfg.inclusive_offset);
    locality::NodeAssembler assembler(locality::AssemblyConfig{cfg.window, true});
    language::LiteralSampler sampler({cfg.sample_rate, cfg.seed, path});

    Quad quad;
    while (stream.next(quad)) {
        stats::fold_quad(work.stats, quad);
        tracker.push(quad);
        assembler.push(quad);
        if (auto sample = sampler.consider(quad, tools.identifier))
            stats::fold_sample(work.stats, *sample);
    }
    work.stats.window_histogram.merge(tracker.finish());
    assembler.finish();

    auto records = assembler.take_records();
    domains::annotate_plds(records, *tools.rules);
    if (tools.ranks != nullptr) {
        std::set<std::string> plds;
        for (const auto& record : records)
            if (!record.pay_level_domain.empty()) plds.insert(record.pay_level_domain);
        auto ranks = tools.ranks->fetch(plds);
        auto partition = domains::trust_filter(std::move(records), ranks, tools.ranks->policy);
        records = std::move(partition.kept);
    }
    for (auto& record : records) {
        validity::evaluate_record(record);
        stats::fold_record(work.stats, record, *tools.normalizer);
    }
    work.parse = stream.report();
    return work;
}

// Cleaning pass: canonicalize, drop disagreeing tagged literals, drop
// untrusted domains, drop invalid nodes, drop invalid property statements.
// Surviving nodes are written as contiguous statement blocks.
ChunkWork clean_chunk(const std::string& path, const ChunkTools& tools) {
    const PipelineConfig& cfg = *tools.cfg;
    ChunkWork work;
    QuadStream stream = QuadStream::open_file(path);
    locality::NodeAssembler assembler(locality::AssemblyConfig{cfg.window, true});
    Quad quad;
    while (stream.next(quad)) assembler.push(quad);
    assembler.finish();
    work.parse = stream.report();
    work.exclusions.malformed_lines = work.parse.malformed_lines;

    auto records = assembler.take_records();
    for (auto& record : records) {
        for (auto& q : record.quads) canonicalize_quad(q, *tools.normalizer);
        if (tools.identifier != nullptr) {
            std::vector<Quad> kept;
            for (auto& q : record.quads) {
                if (disagreeing_literal(q.object, tools.identifier)) {
                    work.exclusions.disagreeing_literals += 1;
                } else {
                    kept.push_back(std::move(q));
                }
            }
            record.quads = std::move(kept);
        }
        rebuild_properties(record);
        validity::evaluate_record(record);
    }

    domains::annotate_plds(records, *tools.rules);
    if (tools.ranks != nullptr) {
        std::set<std::string> plds;
        for (const auto& record : records)
            if (!record.pay_level_domain.empty()) plds.insert(record.pay_level_domain);
        auto ranks = tools.ranks->fetch(plds);
        auto partition = domains::trust_filter(std::move(records), ranks, tools.ranks->policy);
        work.exclusions.untrusted_nodes = partition.dropped.size();
        work.exclusions.quarantined_nodes = partition.quarantined.size();
        records = std::move(partition.kept);
    }

    for (const auto& record : records) {
        if (!record.node_valid) {
            work.exclusions.invalid_nodes += 1;
            continue;
        }
        work.exclusions.kept_nodes += 1;
        for (std::size_t i = 0; i < record.quads.size(); ++i) {
            if (record.properties[i].verdict.status == validity::Status::Invalid) {
                work.exclusions.invalid_properties += 1;
                continue;
            }
            nquads::append_quad(work.output, record.quads[i]);
            work.output += '\n';
            work.exclusions.kept_quads += 1;
        }
    }

    // Self-check: the cleaned text must re-parse without a single bad line.
    QuadStream check = QuadStream::from_string(work.output);
    Quad ignored;
    while (check.next(ignored)) {
    }
    if (check.report().malformed_lines != 0) {
        work.failed = true;
        work.error = "cleaned output failed to re-parse";
    }
    return work;
}

// Canonicalization only; every parsed statement passes through.
ChunkWork normalize_chunk(const std::string& path, const ChunkTools& tools) {
    ChunkWork work;
    QuadStream stream = QuadStream::open_file(path);
    Quad quad;
    while (stream.next(quad)) {
        canonicalize_quad(quad, *tools.normalizer);
        nquads::append_quad(work.output, quad);
        work.output += '\n';
        work.exclusions.kept_quads += 1;
    }
    work.parse = stream.report();
    work.exclusions.malformed_lines = work.parse.malformed_lines;
    return work;
}

template <typename Fn>
std::vector<ChunkWork> run_chunks(const std::vector<std::string>& paths,
                                  std::uint32_t parallelism, Fn&& chunk_fn) {
    std::vector<ChunkWork> results(paths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t index = next.fetch_add(1);
            if (index >= paths.size()) return;
            try {
                results[index] = chunk_fn(paths[index]);
            } catch (const std::exception& e) {
                results[index].failed = true;
                results[index].error = e.what();
            }
        }
    };
    std::size_t threads = std::min<std::size_t>(parallelism, paths.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return results;
}

stats::Report build_report(const PipelineConfig& cfg, stats::ProfileStats stats,
                           const std::vector<std::string>& paths) {
    stats::Report report;
    report.stats = std::move(stats);
    report.provenance.tool_version = QUADKIT_VERSION;
    report.provenance.config_digest = config::digest(cfg);
    for (const auto& path : paths)
        report.provenance.inputs.push_back({path, file_mtime(path)});
    return report;
}

// Keeps only the named top-level sections (plus provenance) of a report.
std::string filter_report(const std::string& text, stats::ReportFormat format,
                          const std::set<std::string>& keep) {
    if (format == stats::ReportFormat::Json) {
        OrderedJson doc = OrderedJson::parse(text);
        OrderedJson filtered;
        for (const auto& [key, value] : doc.items()) {
            if (key == "provenance" || keep.count(key) > 0) filtered[key] = value;
        }
        return filtered.dump(2) + "\n";
    }
    // TSV: one JSON section can span several "# name" blocks.
    std::set<std::string> blocks = {"provenance"};
    for (const auto& section : keep) {
        if (section == "entity_classes") {
            blocks.insert("entity_classes_top5");
            blocks.insert("entity_classes");
        } else if (section == "windows") {
            blocks.insert("windows");
            blocks.insert("windows_summary");
        } else {
            blocks.insert(section);
        }
    }
    std::istringstream in(text);
    std::string line;
    std::string out;
    bool keeping = false;
    bool first_block = true;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            keeping = blocks.count(line.substr(2)) > 0;
            if (keeping && !first_block) out += '\n';
            if (keeping) first_block = false;
        } else if (line.empty()) {
            continue;
        }
        if (keeping) {
            out += line;
            out += '\n';
        }
    }
    return out;
}

struct RunOutput {
    stats::ProfileStats stats;
    std::vector<std::string> paths;
    bool any_failed = false;
};

// Shared skeleton of the profiling commands.
int profile_run(RunContext& ctx, const std::set<std::string>* keep_sections) {
    PipelineConfig& cfg = ctx.config;
    config::validate(cfg);
    auto paths = expand_inputs(cfg.inputs);
    if (paths.empty()) {
        err_stream(ctx) << "error: no input files matched\n";
        return 2;
    }

    auto identifier = make_identifier(cfg);
    vocab::VocabNormalizer::Options vocab_options;
    vocab_options.threshold = cfg.misspelling_threshold;
    vocab::VocabNormalizer normalizer(vocab_options);
    const domains::SuffixRules& rules = domains::SuffixRules::bundled();
    std::unique_ptr<RankService> ranks;
    if (keep_sections != nullptr && keep_sections->count("domains") > 0)
        ranks = make_rank_service(ctx);

    ChunkTools tools;
    tools.cfg = &cfg;
    tools.identifier = identifier.get();
    tools.normalizer = &normalizer;
    tools.rules = &rules;
    tools.ranks = ranks.get();

    auto results = run_chunks(paths, cfg.parallelism,
                              [&](const std::string& path) { return profile_chunk(path, tools); });

    stats::ProfileStats merged;
    bool any_failed = false;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].failed) {
            any_failed = true;
            err_stream(ctx) << "error: chunk " << paths[i] << ": " << results[i].error << "\n";
            continue;
        }
        merged.merge(results[i].stats);
    }

    stats::Report report = build_report(cfg, std::move(merged), paths);
    std::string text = stats::render(report, cfg.format);
    if (keep_sections != nullptr) text = filter_report(text, cfg.format, *keep_sections);
    write_atomic(cfg.report_path, text, &out_stream(ctx));
    return any_failed ? 3 : 0;
}

}  // namespace

void ExclusionCounts::merge(const ExclusionCounts& other) {
    malformed_lines += other.malformed_lines;
    untrusted_nodes += other.untrusted_nodes;
    quarantined_nodes += other.quarantined_nodes;
    invalid_nodes += other.invalid_nodes;
    invalid_properties += other.invalid_properties;
    disagreeing_literals += other.disagreeing_literals;
    kept_nodes += other.kept_nodes;
    kept_quads += other.kept_quads;
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& pattern : patterns) {
        glob_t matches{};
        int rc = ::glob(pattern.c_str(), 0, nullptr, &matches);
        if (rc == 0) {
            for (std::size_t i = 0; i < matches.gl_pathc; ++i) {
                std::string path = matches.gl_pathv[i];
                if (seen.insert(path).second) out.push_back(std::move(path));
            }
        }
        ::globfree(&matches);
    }
    return out;
}

void write_atomic(const std::string& path, const std::string& content,
                  std::ostream* stdout_target) {
    if (path == "-" || path.empty()) {
        if (stdout_target != nullptr) (*stdout_target) << content;
        return;
    }
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path temp = target;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + temp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + temp.string());
    }
    fs::rename(temp, target);
}

int cmd_profile(RunContext& ctx) { return profile_run(ctx, nullptr); }

int cmd_validate(RunContext& ctx) {
    std::set<std::string> keep = {"quads", "properties", "node_validity"};
    return profile_run(ctx, &keep);
}

int cmd_languages(RunContext& ctx) {
    std::set<std::string> keep = {"quads", "languages", "agreement"};
    return profile_run(ctx, &keep);
}

int cmd_windows(RunContext& ctx) {
    std::set<std::string> keep = {"quads", "windows"};
    return profile_run(ctx, &keep);
}

int cmd_domains(RunContext& ctx) {
    std::set<std::string> keep = {"quads", "domains"};
    return profile_run(ctx, &keep);
}

int cmd_clean(RunContext& ctx) {
    PipelineConfig& cfg = ctx.config;
    config::validate(cfg);
    if (cfg.output_path.empty()) {
        err_stream(ctx) << "error: clean needs an output path\n";
        return 2;
    }
    auto paths = expand_inputs(cfg.inputs);
    if (paths.empty()) {
        err_stream(ctx) << "error: no input files matched\n";
        return 2;
    }

    auto identifier = make_identifier(cfg);
    vocab::VocabNormalizer::Options vocab_options;
    vocab_options.threshold = cfg.misspelling_threshold;
    vocab::VocabNormalizer normalizer(vocab_options);
    const domains::SuffixRules& rules = domains::SuffixRules::bundled();
    auto ranks = make_rank_service(ctx);

    ChunkTools tools;
    tools.cfg = &cfg;
    tools.identifier = identifier.get();
    tools.normalizer = &normalizer;
    tools.rules = &rules;
    tools.ranks = ranks.get();

    auto results = run_chunks(paths, cfg.parallelism,
                              [&](const std::string& path) { return clean_chunk(path, tools); });

    std::string cleaned;
    ExclusionCounts totals;
    bool any_failed = false;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].failed) {
            any_failed = true;
            err_stream(ctx) << "error: chunk " << paths[i] << ": " << results[i].error << "\n";
            continue;
        }
        cleaned += results[i].output;
        totals.merge(results[i].exclusions);
    }
    write_atomic(cfg.output_path, cleaned, &out_stream(ctx));

    OrderedJson log;
    log["malformed_lines"] = totals.malformed_lines;
    log["untrusted_nodes"] = totals.untrusted_nodes;
    log["quarantined_nodes"] = totals.quarantined_nodes;
    log["invalid_nodes"] = totals.invalid_nodes;
    log["invalid_properties"] = totals.invalid_properties;
    log["disagreeing_literals"] = totals.disagreeing_literals;
    log["kept_nodes"] = totals.kept_nodes;
    log["kept_quads"] = totals.kept_quads;
    std::string log_text = log.dump(2) + "\n";
    if (!cfg.exclusion_log.empty()) {
        write_atomic(cfg.exclusion_log, log_text, &out_stream(ctx));
    } else {
        err_stream(ctx) << log_text;
    }
    return any_failed ? 3 : 0;
}

int cmd_normalize(RunContext& ctx) {
    PipelineConfig& cfg = ctx.config;
    config::validate(cfg);
    if (cfg.output_path.empty()) {
        err_stream(ctx) << "error: normalize needs an output path\n";
        return 2;
    }
    auto paths = expand_inputs(cfg.inputs);
    if (paths.empty()) {
        err_stream(ctx) << "error: no input files matched\n";
        return 2;
    }

    vocab::VocabNormalizer::Options vocab_options;
    vocab_options.threshold = cfg.misspelling_threshold;
    vocab::VocabNormalizer normalizer(vocab_options);
    ChunkTools tools;
    tools.cfg = &cfg;
    tools.normalizer = &normalizer;

    auto results = run_chunks(paths, cfg.parallelism, [&](const std::string& path) {
        return normalize_chunk(path, tools);
    });

    std::string output;
    ExclusionCounts totals;
    bool any_failed = false;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].failed) {
            any_failed = true;
            err_stream(ctx) << "error: chunk " << paths[i] << ": " << results[i].error << "\n";
            continue;
        }
        output += results[i].output;
        totals.merge(results[i].exclusions);
    }
    write_atomic(cfg.output_path, output, &out_stream(ctx));
    if (totals.malformed_lines > 0)
        err_stream(ctx) << "note: skipped " << totals.malformed_lines << " malformed lines\n";
    return any_failed ? 3 : 0;
}

int cmd_generate(RunContext& ctx, const synthetic::SyntheticSpec& spec,
                 const std::string& corpus_path, const std::string& truth_path) {
    synthetic::SyntheticCorpus corpus = synthetic::generate(spec);
    write_atomic(corpus_path, corpus.quads, &out_stream(ctx));
    if (!truth_path.empty()) write_atomic(truth_path, corpus.truth_json, &out_stream(ctx));
    return 0;
}

}  // namespace quadkit::pipeline
