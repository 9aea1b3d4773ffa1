#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace quadkit::vocab {

enum class Cluster { SchemaOrg, DataVocabulary, Other };
enum class Variation { Base, SubdomainVariant, SldMisspelling, TldMisspelling, NotApplicable };

std::string_view to_string(Cluster c);
std::string_view to_string(Variation v);

// Host decomposition of a vocabulary URI.
struct HostParts {
    std::string subdomain;     // dotted labels before the second-level one; possibly empty
    std::string second_level;  // label before the final one; empty for single-label hosts
    std::string top_level;     // final label
    std::string scheme;
    std::string path;          // everything after the authority, including query/fragment
};

// Splits a URI with scheme and host into host labels plus scheme/path.
// Returns nullopt for opaque URIs without a host. Host labels come back lowercased.
std::optional<HostParts> split_host(std::string_view uri);

// Edit distance divided by the longer length; 0 when both strings are empty.
double normalized_levenshtein(std::string_view a, std::string_view b);

struct ConceptClassification {
    Cluster cluster = Cluster::Other;
    Variation variation = Variation::NotApplicable;
    std::optional<std::string> canonical_uri;  // absent iff cluster == Other
    // Normalized distance of the matched second-level label; 1 when nothing matched.
    double distance = 1.0;
    bool parse_failed = false;  // input had no parsable host
};

struct ClusterSpec {
    Cluster id = Cluster::Other;
    std::string label;                    // canonical second-level label, e.g. "schema"
    std::string base_host;                // e.g. "schema.org"
    std::set<std::string> base_prefixes;  // subdomain strings treated as the base form
};

std::vector<ClusterSpec> default_cluster_specs();

// Classifies vocabulary URIs into clusters and variation dimensions and rewrites
// variant hosts to the cluster's canonical host. Thread-safe; per-host verdicts
// are memoized behind a read-mostly cache.
class VocabNormalizer {
  public:
    struct Options {
        double threshold = 0.3;  // max normalized distance for a misspelled second-level label
        std::vector<ClusterSpec> clusters = default_cluster_specs();
    };

    VocabNormalizer() : VocabNormalizer(Options{}) {}
    explicit VocabNormalizer(Options options);

    ConceptClassification classify(std::string_view uri) const;

    // Audit dump of every host seen so far: variant_host,cluster,variation,canonical_host.
    void export_csv(std::ostream& out) const;

  private:
    struct HostVerdict {
        Cluster cluster = Cluster::Other;
        Variation variation = Variation::NotApplicable;
        double distance = 1.0;
        std::string canonical_host;  // empty for Cluster::Other
    };

    HostVerdict classify_host(const std::string& host) const;
    HostVerdict compute_host(const std::string& host) const;

    Options options_;
    mutable std::shared_mutex mutex_;
    mutable std::map<std::string, HostVerdict> cache_;
};

struct DbscanResult {
    std::vector<std::vector<std::string>> clusters;  // discovery order; members sorted
    std::vector<std::string> noise;                  // sorted
};

// Density clustering over the normalized-levenshtein metric. Deterministic:
// points are visited in lexicographic order. A point's neighborhood includes itself.
DbscanResult dbscan_string_clusters(std::vector<std::string> strings, double eps,
                                    std::size_t min_pts);

}  // namespace quadkit::vocab
