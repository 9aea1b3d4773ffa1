#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quadkit/nquads.hpp"

namespace quadkit::validity {

// The ten validatable product properties; everything else is Unvalidated.
enum class PropertyKey {
    Name,
    Description,
    Image,
    Url,
    Offers,
    Brand,
    Sku,
    ProductId,
    AggregateRating,
    Price,
    Unvalidated,
};

std::string_view to_string(PropertyKey key);

// Final path segment of the predicate URI (after the last '/' or '#'),
// lowercased and mapped to a key; Unvalidated when it is not one of the ten.
PropertyKey property_key_from_predicate(std::string_view canonical_predicate);

enum class Status { Valid, Invalid, Unvalidatable };

std::string_view to_string(Status s);

struct ValidityVerdict {
    Status status = Status::Unvalidatable;
    std::optional<std::string> failed_rule;  // present iff status == Invalid
};

struct ValidityOptions {
    // Match null markers anywhere in the value instead of as the whole value.
    bool null_substring_match = false;
};

// Collapses unicode whitespace runs to single spaces and strips the ends.
std::string preprocess_literal(std::string_view text);

// True iff the preprocessed, case-folded text equals "null" or "n/a"
// (contains, in substring mode).
bool is_null_marker(std::string_view text, bool substring_match = false);

// True iff the term is an iri, or a literal whose preprocessed lexical parses
// as an absolute http/https URL with a host.
bool is_valid_url(const nquads::Term& term);

// Per-property shape rules. Throws std::invalid_argument for Unvalidated.
ValidityVerdict check_property(PropertyKey key, const nquads::Term& object,
                               const ValidityOptions& options = {});

struct PropertyEntry {
    PropertyKey key = PropertyKey::Unvalidated;
    std::string predicate;  // raw predicate as seen in the input
    nquads::Term object;
    ValidityVerdict verdict;  // populated by evaluate_record
};

// Derives the key from the predicate and leaves the verdict for evaluate_record.
PropertyEntry make_property_entry(std::string predicate, nquads::Term object);

struct ProductRecord {
    nquads::Term subject;
    std::string source_page;       // graph label of the node's quads, when present
    std::string pay_level_domain;  // filled in by the domain profiler
    std::vector<PropertyEntry> properties;
    std::vector<nquads::Quad> quads;  // every quad of the node, in input order
    bool node_valid = false;
    bool complete = true;
};

struct NodeDiagnostics {
    std::size_t distinct_valid_keys = 0;
    bool name_shorter_than_description = false;
};

// Fills every property verdict and the node_valid flag.
void evaluate_record(ProductRecord& record, const ValidityOptions& options = {});

// True iff (a) at least five distinct keys carry a valid verdict and (b) some
// valid name literal is shorter (in codepoints, after preprocessing) than some
// valid description literal. Requires verdicts to be populated.
bool check_node(const ProductRecord& record, NodeDiagnostics* diagnostics = nullptr);

}  // namespace quadkit::validity
