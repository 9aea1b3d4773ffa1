#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "quadkit/language.hpp"
#include "quadkit/locality.hpp"
#include "quadkit/nquads.hpp"
#include "quadkit/validity.hpp"
#include "quadkit/vocab.hpp"

namespace quadkit::stats {

struct ValidityCounts {
    std::uint64_t valid = 0;
    std::uint64_t invalid = 0;
    std::uint64_t unvalidatable = 0;

    bool operator==(const ValidityCounts&) const = default;
};

// Mergeable profile accumulator. Only raw counts live here; shares and
// percentiles are derived at render time so merging stays exact. The empty
// accumulator is the merge identity, and merge is field-wise addition, so
// chunks can be folded in parallel and combined in any order.
struct ProfileStats {
    std::uint64_t quad_count = 0;
    std::map<std::string, std::uint64_t> entity_class_counts;  // canonical class -> nodes
    std::map<std::pair<vocab::Cluster, vocab::Variation>, std::uint64_t> variation_counts;
    std::map<validity::PropertyKey, std::uint64_t> property_frequency;   // nodes carrying key
    std::map<validity::PropertyKey, ValidityCounts> validity_shares;     // per property entry
    ValidityCounts node_validity;                                        // whole-node verdicts
    std::map<std::string, std::uint64_t> language_distribution;          // code -> literals
    std::map<std::string, language::AgreementRow> agreement;             // per declared code
    std::map<std::string, std::uint64_t> pld_counts;                     // domain -> nodes
    locality::WindowStats window_histogram;

    void merge(const ProfileStats& other);

    bool operator==(const ProfileStats&) const = default;
};

// Quad-level fold: total count and the declared-language distribution.
void fold_quad(ProfileStats& stats, const nquads::Quad& quad);

// Node-level fold: entity classes and vocabulary variations (from rdf:type
// statements, classified by the normalizer), property frequency, per-property
// and whole-node validity, and the domain counter. Expects verdicts and the
// pay-level domain to be filled in already.
void fold_record(ProfileStats& stats, const validity::ProductRecord& record,
                 const vocab::VocabNormalizer& normalizer);

// Sample-level fold: declared-vs-identified agreement per normalized code.
void fold_sample(ProfileStats& stats, const language::LanguageSample& sample);

ProfileStats merge(ProfileStats a, const ProfileStats& b);

struct InputFile {
    std::string path;
    std::int64_t mtime = 0;  // unix seconds

    bool operator==(const InputFile&) const = default;
};

// Where the numbers came from. The snapshot timestamp is the newest input
// mtime, never the wall clock, so identical inputs render identical bytes.
struct Provenance {
    std::string tool_version;
    std::string config_digest;
    std::vector<InputFile> inputs;

    std::int64_t timestamp() const;

    bool operator==(const Provenance&) const = default;
};

struct Report {
    ProfileStats stats;
    Provenance provenance;

    bool operator==(const Report&) const = default;
};

enum class ReportFormat { Json, Tsv };

// Deterministic bytes: stable section and key order, counts as integers,
// shares and means as fixed four-decimal strings.
std::string render(const Report& report, ReportFormat format);

// Reads a JSON render back into a report; derived numbers are recomputed, so
// render(load(render(r))) is byte-identical to render(r).
Report load_report_json(const std::string& text);

// Fixed-point helper shared by the renderers: 4 fractional digits.
std::string fixed4(double value);

}  // namespace quadkit::stats
