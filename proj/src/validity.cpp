#include "quadkit/validity.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

#include "quadkit/unicode.hpp"
#include "quadkit/urlparse.hpp"

namespace quadkit::validity {

namespace {

using nquads::Term;
using nquads::TermKind;

std::string fold_ascii(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text)
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

ValidityVerdict valid() { return {Status::Valid, std::nullopt}; }

ValidityVerdict invalid(const char* rule) { return {Status::Invalid, std::string(rule)}; }

ValidityVerdict unvalidatable() { return {Status::Unvalidatable, std::nullopt}; }

// Null markers apply to textual content: literal lexicals and iri strings,
// never blank-node labels.
bool term_is_null_marker(const Term& term, const ValidityOptions& options) {
    if (term.kind == TermKind::BlankNode) return false;
    return is_null_marker(term.lexical, options.null_substring_match);
}

ValidityVerdict check_text_property(const Term& object, bool reject_urls) {
    if (object.kind != TermKind::Literal) return invalid("must-be-literal");
    std::string text = preprocess_literal(object.lexical);
    if (text.empty()) return invalid("empty-literal");
    if (reject_urls && urls::is_http_url(text)) return invalid("must-not-be-url");
    return valid();
}

}  // namespace

std::string_view to_string(PropertyKey key) {
    switch (key) {
        case PropertyKey::Name: return "name";
        case PropertyKey::Description: return "description";
        case PropertyKey::Image: return "image";
        case PropertyKey::Url: return "url";
        case PropertyKey::Offers: return "offers";
        case PropertyKey::Brand: return "brand";
        case PropertyKey::Sku: return "sku";
        case PropertyKey::ProductId: return "productid";
        case PropertyKey::AggregateRating: return "aggregaterating";
        case PropertyKey::Price: return "price";
        case PropertyKey::Unvalidated: return "unvalidated";
    }
    return "unvalidated";
}

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Valid: return "valid";
        case Status::Invalid: return "invalid";
        case Status::Unvalidatable: return "unvalidatable";
    }
    return "unvalidatable";
}

PropertyKey property_key_from_predicate(std::string_view canonical_predicate) {
    std::size_t cut = canonical_predicate.find_last_of("/#");
    std::string_view segment =
        cut == std::string_view::npos ? canonical_predicate : canonical_predicate.substr(cut + 1);
    std::string folded = fold_ascii(segment);
    if (folded == "name") return PropertyKey::Name;
    if (folded == "description") return PropertyKey::Description;
    if (folded == "image") return PropertyKey::Image;
    if (folded == "url") return PropertyKey::Url;
    if (folded == "offers") return PropertyKey::Offers;
    if (folded == "brand") return PropertyKey::Brand;
    if (folded == "sku") return PropertyKey::Sku;
    if (folded == "productid") return PropertyKey::ProductId;
    if (folded == "aggregaterating") return PropertyKey::AggregateRating;
    if (folded == "price") return PropertyKey::Price;
    return PropertyKey::Unvalidated;
}

std::string preprocess_literal(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = 0;
        std::size_t len = unicode::decode(text, pos, cp);
        if (unicode::is_space(cp)) {
            if (!out.empty()) pending_space = true;
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out.append(text.substr(pos, len));
        }
        pos += len;
    }
    return out;
}

bool is_null_marker(std::string_view text, bool substring_match) {
    std::string folded = fold_ascii(preprocess_literal(text));
    if (substring_match)
        return folded.find("null") != std::string::npos || folded.find("n/a") != std::string::npos;
    return folded == "null" || folded == "n/a";
}

bool is_valid_url(const nquads::Term& term) {
    if (term.kind == TermKind::Iri) return true;
    if (term.kind != TermKind::Literal) return false;
    return urls::is_http_url(preprocess_literal(term.lexical));
}

ValidityVerdict check_property(PropertyKey key, const nquads::Term& object,
                               const ValidityOptions& options) {
    if (key == PropertyKey::Unvalidated)
        throw std::invalid_argument("check_property: key is not one of the ten product properties");
    if (key == PropertyKey::Price) return unvalidatable();
    if (term_is_null_marker(object, options)) return invalid("null-marker");
    switch (key) {
        case PropertyKey::Name:
        case PropertyKey::Description: return check_text_property(object, /*reject_urls=*/true);
        case PropertyKey::Sku:
        case PropertyKey::ProductId: return check_text_property(object, /*reject_urls=*/false);
        case PropertyKey::Image:
        case PropertyKey::Url:
            return is_valid_url(object) ? valid() : invalid("must-be-url");
        case PropertyKey::Offers:
            if (object.kind == TermKind::BlankNode || is_valid_url(object)) return valid();
            return invalid("must-be-node-or-url");
        case PropertyKey::Brand:
            if (object.kind == TermKind::BlankNode || object.kind == TermKind::Iri) return valid();
            return check_text_property(object, /*reject_urls=*/false);
        case PropertyKey::AggregateRating:
            return object.kind == TermKind::BlankNode ? valid() : invalid("must-be-node");
        default: break;
    }
    throw std::invalid_argument("check_property: unreachable key");
}

PropertyEntry make_property_entry(std::string predicate, nquads::Term object) {
    PropertyEntry entry;
    entry.key = property_key_from_predicate(predicate);
    entry.predicate = std::move(predicate);
    entry.object = std::move(object);
    return entry;
}

void evaluate_record(ProductRecord& record, const ValidityOptions& options) {
    for (auto& entry : record.properties) {
        if (entry.key == PropertyKey::Unvalidated) {
            entry.verdict = unvalidatable();
        } else {
            entry.verdict = check_property(entry.key, entry.object, options);
        }
    }
    record.node_valid = check_node(record);
}

bool check_node(const ProductRecord& record, NodeDiagnostics* diagnostics) {
    std::set<PropertyKey> valid_keys;
    std::optional<std::size_t> min_name;
    std::optional<std::size_t> max_description;
    for (const auto& entry : record.properties) {
        if (entry.verdict.status != Status::Valid) continue;
        valid_keys.insert(entry.key);
        if (entry.object.kind != TermKind::Literal) continue;
        std::size_t length = unicode::codepoint_length(preprocess_literal(entry.object.lexical));
        if (entry.key == PropertyKey::Name) {
            min_name = min_name ? std::min(*min_name, length) : length;
        } else if (entry.key == PropertyKey::Description) {
            max_description = max_description ? std::max(*max_description, length) : length;
        }
    }
    bool enough_keys = valid_keys.size() >= 5;
    bool name_shorter = min_name.has_value() && max_description.has_value() &&
                        *min_name < *max_description;
    if (diagnostics != nullptr) {
        diagnostics->distinct_valid_keys = valid_keys.size();
        diagnostics->name_shorter_than_description = name_shorter;
    }
    return enough_keys && name_shorter;
}

}  // namespace quadkit::validity
