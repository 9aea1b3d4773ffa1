#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace quadkit::synthetic {

// Recipe for a generated product corpus. Rates are planted as exact quotas
// (largest-remainder apportionment), so the realized counts recorded in the
// ground-truth sidecar match the requested shares as closely as integer
// arithmetic allows; generation is fully deterministic per seed.
struct SyntheticSpec {
    std::uint64_t node_count = 100;
    double validity_rate = 1.0;         // share of nodes built to pass the node check
    double tag_rate = 1.0;              // share of descriptions carrying a language tag
    double tag_correctness_rate = 1.0;  // share of tagged descriptions tagged truthfully
    double variant_rate = 0.0;          // share of nodes typed via a variant vocabulary host

    // spread -> share. Every node has six statements laid out round-robin in
    // blocks of spread/5 nodes, so spreads must be positive multiples of 5.
    std::map<std::uint64_t, double> spread_distribution = {{5, 1.0}};

    std::vector<std::string> languages = {"en", "de", "fr", "it", "es"};
    std::uint64_t pld_count = 3;  // distinct page domains cycled across nodes
    std::uint64_t seed = 0;
};

struct SyntheticCorpus {
    std::string quads;       // N-Quads text
    std::string truth_json;  // ground-truth sidecar (JSON)
};

// Throws std::invalid_argument when a field is outside its documented range.
void validate(const SyntheticSpec& spec);

SyntheticCorpus generate(const SyntheticSpec& spec);

}  // namespace quadkit::synthetic
