#include "quadkit/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace quadkit::config {

namespace {

std::string shortest(double value) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) throw std::runtime_error("config: cannot format number");
    return std::string(buffer, end);
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw std::runtime_error("config: bad number for " + key + ": " + value);
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw std::runtime_error("config: bad integer for " + key + ": " + value);
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw std::runtime_error("config: bad boolean for " + key + ": " + value);
}

std::string_view comparator_name(std::optional<domains::Comparator> comparator) {
    if (!comparator.has_value()) return "none";
    return *comparator == domains::Comparator::LowerIsTrusted ? "lower-is-trusted"
                                                              : "higher-is-trusted";
}

std::string_view absent_name(domains::AbsentRank absent) {
    switch (absent) {
        case domains::AbsentRank::Keep: return "keep";
        case domains::AbsentRank::Drop: return "drop";
        case domains::AbsentRank::Quarantine: return "quarantine";
    }
    return "quarantine";
}

}  // namespace

std::string_view to_string(IdentifierKind kind) {
    switch (kind) {
        case IdentifierKind::None: return "none";
        case IdentifierKind::Trigram: return "trigram";
        case IdentifierKind::Oracle: return "oracle";
        case IdentifierKind::Command: return "command";
    }
    return "none";
}

std::string to_text(const PipelineConfig& config) {
    std::string out;
    auto line = [&out](std::string_view key, std::string_view value) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    };
    for (const auto& input : config.inputs) line("input", input);
    line("parallelism", std::to_string(config.parallelism));
    line("window", std::to_string(config.window));
    line("inclusive_offset", config.inclusive_offset ? "true" : "false");
    line("misspelling_threshold", shortest(config.misspelling_threshold));
    line("sample_rate", shortest(config.sample_rate));
    line("seed", std::to_string(config.seed));
    line("identifier", to_string(config.identifier));
    line("identifier_model", config.identifier_model);
    line("trust_comparator", comparator_name(config.trust_comparator));
    line("trust_threshold", shortest(config.trust_threshold));
    line("trust_absent", absent_name(config.trust_absent));
    line("rank_offline_csv", config.rank_offline_csv);
    line("rank_cache", config.rank_cache);
    line("rank_cache_ttl_seconds", std::to_string(config.rank_cache_ttl_seconds));
    line("report", config.report_path);
    line("output", config.output_path);
    line("exclusion_log", config.exclusion_log);
    line("format", config.format == stats::ReportFormat::Tsv ? "tsv" : "json");
    return out;
}

void assign(PipelineConfig& config, const std::string& key, const std::string& value) {
    if (key == "input") {
        config.inputs.push_back(value);
    } else if (key == "parallelism") {
        config.parallelism = static_cast<std::uint32_t>(parse_u64(key, value));
    } else if (key == "window") {
        config.window = parse_u64(key, value);
    } else if (key == "inclusive_offset") {
        config.inclusive_offset = parse_bool(key, value);
    } else if (key == "misspelling_threshold") {
        config.misspelling_threshold = parse_double(key, value);
    } else if (key == "sample_rate") {
        config.sample_rate = parse_double(key, value);
    } else if (key == "seed") {
        config.seed = parse_u64(key, value);
    } else if (key == "identifier") {
        if (value == "none")
            config.identifier = IdentifierKind::None;
        else if (value == "trigram")
            config.identifier = IdentifierKind::Trigram;
        else if (value == "oracle")
            config.identifier = IdentifierKind::Oracle;
        else if (value == "command")
            config.identifier = IdentifierKind::Command;
        else
            throw std::runtime_error("config: unknown identifier kind: " + value);
    } else if (key == "identifier_model") {
        config.identifier_model = value;
    } else if (key == "trust_comparator") {
        if (value == "none")
            config.trust_comparator.reset();
        else if (value == "lower-is-trusted")
            config.trust_comparator = domains::Comparator::LowerIsTrusted;
        else if (value == "higher-is-trusted")
            config.trust_comparator = domains::Comparator::HigherIsTrusted;
        else
            throw std::runtime_error("config: unknown trust comparator: " + value);
    } else if (key == "trust_threshold") {
        config.trust_threshold = parse_double(key, value);
    } else if (key == "trust_absent") {
        if (value == "keep")
            config.trust_absent = domains::AbsentRank::Keep;
        else if (value == "drop")
            config.trust_absent = domains::AbsentRank::Drop;
        else if (value == "quarantine")
            config.trust_absent = domains::AbsentRank::Quarantine;
        else
            throw std::runtime_error("config: unknown trust_absent mode: " + value);
    } else if (key == "rank_offline_csv") {
        config.rank_offline_csv = value;
    } else if (key == "rank_cache") {
        config.rank_cache = value;
    } else if (key == "rank_cache_ttl_seconds") {
        config.rank_cache_ttl_seconds = parse_u64(key, value);
    } else if (key == "report") {
        config.report_path = value;
    } else if (key == "output") {
        config.output_path = value;
    } else if (key == "exclusion_log") {
        config.exclusion_log = value;
    } else if (key == "format") {
        if (value == "json")
            config.format = stats::ReportFormat::Json;
        else if (value == "tsv")
            config.format = stats::ReportFormat::Tsv;
        else
            throw std::runtime_error("config: unknown format: " + value);
    } else {
        throw std::runtime_error("config: unknown key: " + key);
    }
}

PipelineConfig parse_text(const std::string& text) {
    PipelineConfig config;
    config.inputs.clear();
    std::istringstream in(text);
    std::string raw;
    std::size_t line_number = 0;
    while (std::getline(in, raw)) {
        ++line_number;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::size_t start = raw.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        if (raw[start] == '#') continue;
        std::size_t eq = raw.find('=', start);
        if (eq == std::string::npos)
            throw std::runtime_error("config: line " + std::to_string(line_number) +
                                     ": expected key=value");
        std::string key = raw.substr(start, eq - start);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string value = raw.substr(eq + 1);
        try {
            assign(config, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error("config: line " + std::to_string(line_number) + ": " +
                                     e.what());
        }
    }
    return config;
}

PipelineConfig load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

void validate(const PipelineConfig& config) {
    if (config.parallelism < 1) throw std::invalid_argument("config: parallelism must be >= 1");
    if (config.window < 1) throw std::invalid_argument("config: window must be >= 1");
    if (config.misspelling_threshold < 0.0 || config.misspelling_threshold > 1.0)
        throw std::invalid_argument("config: misspelling_threshold must be in [0, 1]");
    if (!(config.sample_rate > 0.0) || config.sample_rate > 1.0)
        throw std::invalid_argument("config: sample_rate must be in (0, 1]");
}

std::string digest(const PipelineConfig& config) {
    // The worker count tunes execution, not results, so it stays out of the
    // digest: reports must be byte-identical across parallelism settings.
    std::uint64_t hash = 1469598103934665603ULL;
    const std::string text = to_text(config);
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size() - 1;
        std::string_view line(text.data() + pos, end + 1 - pos);
        pos = end + 1;
        if (line.rfind("parallelism=", 0) == 0) continue;
        for (unsigned char byte : line) {
            hash ^= byte;
            hash *= 1099511628211ULL;
        }
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

std::optional<domains::TrustPolicy> trust_policy(const PipelineConfig& config) {
    if (!config.trust_comparator.has_value()) return std::nullopt;
    domains::TrustPolicy policy;
    policy.comparator = config.trust_comparator;
    policy.threshold = config.trust_threshold;
    policy.absent = config.trust_absent;
    return policy;
}

}  // namespace quadkit::config
