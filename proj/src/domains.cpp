#include "quadkit/domains.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "quadkit/urlparse.hpp"

#ifndef QUADKIT_DATA_DIR
#define QUADKIT_DATA_DIR "data"
#endif

namespace quadkit::domains {

namespace {

std::vector<std::string_view> split_labels(std::string_view host) {
    std::vector<std::string_view> labels;
    std::size_t begin = 0;
    while (begin <= host.size()) {
        std::size_t dot = host.find('.', begin);
        if (dot == std::string_view::npos) {
            labels.push_back(host.substr(begin));
            break;
        }
        labels.push_back(host.substr(begin, dot - begin));
        begin = dot + 1;
    }
    return labels;
}

std::string join_tail(const std::vector<std::string_view>& labels, std::size_t from) {
    std::string out;
    for (std::size_t i = from; i < labels.size(); ++i) {
        if (!out.empty()) out += '.';
        out += labels[i];
    }
    return out;
}

bool all_digit_labels(const std::vector<std::string_view>& labels) {
    for (std::string_view label : labels) {
        if (label.empty()) return false;
        for (char ch : label)
            if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    }
    return true;
}

}  // namespace

const SuffixRules& SuffixRules::bundled() {
    static const SuffixRules rules =
        load_file(std::string(QUADKIT_DATA_DIR) + "/public_suffix_snapshot.dat");
    return rules;
}

SuffixRules SuffixRules::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("suffix rules: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
}

SuffixRules SuffixRules::from_string(std::string_view text) {
    SuffixRules rules;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
        while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        if (line.empty() || line.rfind("//", 0) == 0) continue;
        std::string rule;
        for (char ch : line) rule += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (rule.rfind("!", 0) == 0) {
            rules.exceptions_.insert(rule.substr(1));
        } else if (rule.rfind("*.", 0) == 0) {
            rules.wildcard_bases_.insert(rule.substr(2));
        } else {
            rules.exact_.insert(rule);
        }
    }
    return rules;
}

std::size_t SuffixRules::rule_count() const {
    return exact_.size() + wildcard_bases_.size() + exceptions_.size();
}

std::optional<std::string> SuffixRules::registrable(std::string_view host) const {
    if (!host.empty() && host.back() == '.') host.remove_suffix(1);
    if (host.empty()) return std::nullopt;
    auto labels = split_labels(host);
    for (std::string_view label : labels)
        if (label.empty()) return std::nullopt;

    // Exceptions beat every other rule; among normal rules the longest match
    // wins. A host with no matching rule falls under the implicit "*": its
    // last label is the public suffix.
    std::size_t suffix_labels = 1;
    bool exception_hit = false;
    for (std::size_t i = 0; i < labels.size() && !exception_hit; ++i) {
        std::string tail = join_tail(labels, i);
        if (exceptions_.count(tail)) {
            suffix_labels = (labels.size() - i) - 1;
            exception_hit = true;
        }
    }
    if (!exception_hit) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            std::size_t length = labels.size() - i;
            if (length < suffix_labels) break;
            std::string tail = join_tail(labels, i);
            if (exact_.count(tail)) suffix_labels = std::max(suffix_labels, length);
            if (length >= 2 && wildcard_bases_.count(join_tail(labels, i + 1)))
                suffix_labels = std::max(suffix_labels, length);
        }
    }
    if (labels.size() <= suffix_labels) return std::nullopt;
    return join_tail(labels, labels.size() - suffix_labels - 1);
}

std::optional<std::string> extract_pld(std::string_view url, const SuffixRules& rules) {
    urls::UrlParts parts;
    if (!urls::split_url(url, parts)) return std::nullopt;
    std::string host = urls::lower_ascii(parts.host);
    if (host.empty()) return std::nullopt;
    if (host.front() == '[') return host;  // IPv6 literal, verbatim
    auto labels = split_labels(host);
    if (all_digit_labels(labels) && labels.size() == 4) return host;  // IPv4 literal
    return rules.registrable(host);
}

std::optional<std::string> extract_pld(std::string_view url) {
    return extract_pld(url, SuffixRules::bundled());
}

void annotate_pld(validity::ProductRecord& record, const SuffixRules& rules) {
    record.pay_level_domain = extract_pld(record.source_page, rules).value_or("");
}

void annotate_plds(std::vector<validity::ProductRecord>& records, const SuffixRules& rules) {
    for (auto& record : records) annotate_pld(record, rules);
}

std::map<std::string, std::uint64_t> pld_distribution(
    const std::vector<validity::ProductRecord>& records) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& record : records) ++counts[record.pay_level_domain];
    return counts;
}

std::vector<std::pair<std::string, std::uint64_t>> top_plds(
    const std::map<std::string, std::uint64_t>& counts, std::size_t k) {
    std::vector<std::pair<std::string, std::uint64_t>> ordered(counts.begin(), counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ordered.size() > k) ordered.resize(k);
    return ordered;
}

std::string_view to_string(RankSource source) {
    switch (source) {
        case RankSource::Api: return "api";
        case RankSource::Cache: return "cache";
        case RankSource::File: return "file";
    }
    return "api";
}

std::map<std::string, DomainRank> ranks_by_pld(const std::vector<DomainRank>& ranks) {
    std::map<std::string, DomainRank> by_pld;
    for (const auto& rank : ranks) by_pld[rank.pld] = rank;
    return by_pld;
}

TrustReport trust_filter(std::vector<validity::ProductRecord> records,
                         const std::map<std::string, DomainRank>& ranks,
                         const TrustPolicy& policy) {
    if (!policy.comparator.has_value())
        throw std::invalid_argument(
            "trust filter: the comparator must be chosen explicitly "
            "(lower-is-trusted or higher-is-trusted)");
    TrustReport report;
    for (auto& record : records) {
        auto it = ranks.find(record.pay_level_domain);
        const bool usable = it != ranks.end() && it->second.rank_value.has_value() &&
                            !record.pay_level_domain.empty();
        if (!usable) {
            switch (policy.absent) {
                case AbsentRank::Keep: report.kept.push_back(std::move(record)); break;
                case AbsentRank::Drop: report.dropped.push_back(std::move(record)); break;
                case AbsentRank::Quarantine:
                    report.quarantined.push_back(std::move(record));
                    break;
            }
            continue;
        }
        double value = *it->second.rank_value;
        bool trusted = *policy.comparator == Comparator::LowerIsTrusted
                           ? value <= policy.threshold
                           : value >= policy.threshold;
        if (trusted) {
            report.kept.push_back(std::move(record));
        } else {
            report.dropped.push_back(std::move(record));
        }
    }
    return report;
}

}  // namespace quadkit::domains
