#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "quadkit/validity.hpp"

namespace quadkit::domains {

// Public-suffix rules: exact suffixes ("com", "co.uk"), wildcards ("*.ck",
// one label deep) and exceptions ("!www.ck"). Loaded from the bundled
// snapshot by default; the snapshot is pinned, refreshing it is an explicit
// action, never implicit.
class SuffixRules {
  public:
    static const SuffixRules& bundled();  // parsed once from the data file
    static SuffixRules load_file(const std::string& path);
    static SuffixRules from_string(std::string_view text);

    // Registrable domain (public suffix plus one label) for an already
    // lowercased host without scheme or port. Absent when the host is itself
    // a public suffix or empty. Hosts whose suffix is unknown fall under the
    // default rule: the last label is the suffix, so two labels register.
    std::optional<std::string> registrable(std::string_view host) const;

    std::size_t rule_count() const;

  private:
    std::set<std::string, std::less<>> exact_;
    std::set<std::string, std::less<>> wildcard_bases_;  // "ck" for "*.ck"
    std::set<std::string, std::less<>> exceptions_;      // "www.ck"
};

// Pay-level domain of an absolute http(s) URL: the registrable domain of its
// host. IP-literal hosts pass through verbatim; absent when the URL does not
// parse or its host is a bare public suffix.
std::optional<std::string> extract_pld(std::string_view url, const SuffixRules& rules);
std::optional<std::string> extract_pld(std::string_view url);  // bundled rules

// Fills record.pay_level_domain from record.source_page ("" when the page
// URL yields no domain).
void annotate_pld(validity::ProductRecord& record, const SuffixRules& rules);
void annotate_plds(std::vector<validity::ProductRecord>& records, const SuffixRules& rules);

// Node counts per pay-level domain over annotated records. Records without a
// domain are counted under the empty key, so the totals always equal the
// record count.
std::map<std::string, std::uint64_t> pld_distribution(
    const std::vector<validity::ProductRecord>& records);

// Top k by count, ties broken lexicographically by domain.
std::vector<std::pair<std::string, std::uint64_t>> top_plds(
    const std::map<std::string, std::uint64_t>& counts, std::size_t k);

enum class RankSource { Api, Cache, File };

std::string_view to_string(RankSource source);

// One domain's authority rank as reported by the rank provider. An absent
// rank_value means the lookup failed or the provider does not know the
// domain; `error` then says why. Present values are finite by construction.
struct DomainRank {
    std::string pld;
    std::optional<double> rank_value;
    std::optional<std::int64_t> rank_position;
    std::int64_t fetched_at = 0;  // unix seconds
    RankSource source = RankSource::Api;
    std::string error;
};

std::map<std::string, DomainRank> ranks_by_pld(const std::vector<DomainRank>& ranks);

enum class Comparator { LowerIsTrusted, HigherIsTrusted };
enum class AbsentRank { Keep, Drop, Quarantine };

// Which domains count as trusted. The comparator is deliberately optional
// with no default: rank providers disagree on whether low or high scores
// mean authority, so the caller must choose a reading explicitly.
struct TrustPolicy {
    std::optional<Comparator> comparator;
    double threshold = 0.0;
    AbsentRank absent = AbsentRank::Quarantine;
};

// Three-way partition of the input records.
struct TrustReport {
    std::vector<validity::ProductRecord> kept;
    std::vector<validity::ProductRecord> dropped;
    std::vector<validity::ProductRecord> quarantined;
};

// Routes each record by its pay_level_domain's rank: kept when the rank
// satisfies the comparator against the threshold (inclusive), dropped
// otherwise; records whose domain has no usable rank follow policy.absent.
// Throws std::invalid_argument when the comparator is unset.
TrustReport trust_filter(std::vector<validity::ProductRecord> records,
                         const std::map<std::string, DomainRank>& ranks,
                         const TrustPolicy& policy);

}  // namespace quadkit::domains
