#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixture_support.hpp"
#include "quadkit/nquads.hpp"
#include "quadkit/validity.hpp"
#include "test_support.hpp"

using namespace quadkit::validity;
using quadkit::nquads::Term;
using quadkit::nquads::TermKind;

namespace {

Term fixture_term(const std::string& kind, const std::string& value) {
    if (kind == "literal") return Term::literal(value);
    if (kind == "iri") return Term::iri(value);
    if (kind == "blank") return Term::blank(value);
    throw std::runtime_error("unknown term kind: " + kind);
}

PropertyKey key_by_name(const std::string& name) {
    static const std::map<std::string, PropertyKey> keys = {
        {"name", PropertyKey::Name},
        {"description", PropertyKey::Description},
        {"image", PropertyKey::Image},
        {"url", PropertyKey::Url},
        {"offers", PropertyKey::Offers},
        {"brand", PropertyKey::Brand},
        {"sku", PropertyKey::Sku},
        {"productid", PropertyKey::ProductId},
        {"aggregaterating", PropertyKey::AggregateRating},
        {"price", PropertyKey::Price},
    };
    return keys.at(name);
}

PropertyEntry entry_for(PropertyKey key, Term object) {
    PropertyEntry entry;
    entry.key = key;
    entry.predicate = "http://schema.org/" + std::string(to_string(key));
    entry.object = std::move(object);
    return entry;
}

// A known-valid property value for every validatable key.
PropertyEntry valid_entry(PropertyKey key, testsupport::Rng& rng) {
    switch (key) {
        case PropertyKey::Name: return entry_for(key, Term::literal("Item"));
        case PropertyKey::Description:
            return entry_for(key, Term::literal("A reasonably detailed description."));
        case PropertyKey::Image: return entry_for(key, Term::iri("http://img.example.com/a.jpg"));
        case PropertyKey::Url: return entry_for(key, Term::iri("http://example.com/p/1"));
        case PropertyKey::Offers:
            return entry_for(key, Term::blank("offer" + std::to_string(rng.below(1000))));
        case PropertyKey::Brand: return entry_for(key, Term::literal("Acme"));
        case PropertyKey::Sku: return entry_for(key, Term::literal("SKU-1"));
        case PropertyKey::ProductId: return entry_for(key, Term::literal("P01"));
        case PropertyKey::AggregateRating:
            return entry_for(key, Term::blank("r" + std::to_string(rng.below(1000))));
        default: throw std::runtime_error("no valid value for this key");
    }
}

}  // namespace

TEST_CASE("literal preprocessing collapses whitespace") {
    CHECK(preprocess_literal("  a\t\nb  ") == "a b");
    CHECK(preprocess_literal("") == "");
    CHECK(preprocess_literal("Shoe") == "Shoe");
    CHECK(preprocess_literal("a 　b") == "a b");
    CHECK(preprocess_literal("one  two\t three") == "one two three");
    CHECK(preprocess_literal(" \t\r\n ") == "");
    CHECK(preprocess_literal(" x y z") == "x y z");
    CHECK(preprocess_literal("日　本") == "日 本");
}

TEST_CASE("null markers match the whole preprocessed value") {
    CHECK(is_null_marker("Null"));
    CHECK(is_null_marker("N/A "));
    CHECK(is_null_marker(" null "));
    CHECK(is_null_marker("N/a"));
    CHECK(is_null_marker("NULL"));
    CHECK_FALSE(is_null_marker("nullable"));
    CHECK_FALSE(is_null_marker("Annullable Widget"));
    CHECK_FALSE(is_null_marker("not applicable"));
    CHECK_FALSE(is_null_marker(""));

    CHECK(is_null_marker("nullable", /*substring_match=*/true));
    CHECK(is_null_marker("brand: n/a today", /*substring_match=*/true));
    CHECK_FALSE(is_null_marker("plain text", /*substring_match=*/true));
}

TEST_CASE("url validity accepts iris and absolute http literals") {
    CHECK(is_valid_url(Term::iri("http://ex.com/a.jpg")));
    CHECK(is_valid_url(Term::iri("urn:isbn:12345")));
    CHECK(is_valid_url(Term::literal("http://example.com/x")));
    CHECK(is_valid_url(Term::literal("  https://example.com/x?q=1  ")));
    CHECK_FALSE(is_valid_url(Term::literal("ftp://x")));
    CHECK_FALSE(is_valid_url(Term::literal("see website")));
    CHECK_FALSE(is_valid_url(Term::literal("/relative/only")));
    CHECK_FALSE(is_valid_url(Term::literal("www.example.com/x")));
    CHECK_FALSE(is_valid_url(Term::literal("http://")));
    CHECK_FALSE(is_valid_url(Term::blank("b0")));
}

TEST_CASE("property keys derive from the final predicate segment") {
    CHECK(property_key_from_predicate("http://schema.org/name") == PropertyKey::Name);
    CHECK(property_key_from_predicate("http://schema.org/productID") == PropertyKey::ProductId);
    CHECK(property_key_from_predicate("http://schema.org/aggregateRating") ==
          PropertyKey::AggregateRating);
    CHECK(property_key_from_predicate("http://data-vocabulary.org/price") == PropertyKey::Price);
    CHECK(property_key_from_predicate("http://schema.org/Product") == PropertyKey::Unvalidated);
    CHECK(property_key_from_predicate("http://www.w3.org/1999/02/22-rdf-syntax-ns#type") ==
          PropertyKey::Unvalidated);
    CHECK(property_key_from_predicate("http://purl.org/dc/terms/title") ==
          PropertyKey::Unvalidated);
    CHECK(property_key_from_predicate("http://schema.org/Offers") == PropertyKey::Offers);
}

TEST_CASE("property rules give the documented verdicts") {
    auto verdict = check_property(PropertyKey::Name, Term::literal("Null"));
    CHECK(verdict.status == Status::Invalid);
    CHECK(verdict.failed_rule == "null-marker");

    verdict = check_property(PropertyKey::Offers, Term::literal("free shipping"));
    CHECK(verdict.status == Status::Invalid);
    CHECK(verdict.failed_rule == "must-be-node-or-url");

    verdict = check_property(PropertyKey::AggregateRating, Term::blank("b3"));
    CHECK(verdict.status == Status::Valid);
    CHECK_FALSE(verdict.failed_rule.has_value());

    verdict = check_property(PropertyKey::Name, Term::literal("http://ex.com/x"));
    CHECK(verdict.status == Status::Invalid);
    CHECK(verdict.failed_rule == "must-not-be-url");

    verdict = check_property(PropertyKey::Price, Term::literal("€ 5,00"));
    CHECK(verdict.status == Status::Unvalidatable);
    CHECK_FALSE(verdict.failed_rule.has_value());

    CHECK_THROWS_AS(check_property(PropertyKey::Unvalidated, Term::literal("x")),
                    std::invalid_argument);
}

TEST_CASE("the committed fixture reproduces every verdict") {
    auto rows = testsupport::load_validity_fixture(std::string(QUADKIT_TEST_DIR) +
                                                   "/fixtures/validity_fixture.tsv");
    REQUIRE(rows.size() > 90);
    std::map<std::pair<std::string, std::string>, int> coverage;
    for (const auto& row : rows) {
        CAPTURE(row.property);
        CAPTURE(row.value);
        auto verdict = check_property(key_by_name(row.property), fixture_term(row.kind, row.value));
        CHECK(std::string(to_string(verdict.status)) == row.status);
        CHECK(verdict.failed_rule.value_or("") == row.rule);
        CHECK((verdict.status == Status::Invalid) == verdict.failed_rule.has_value());
        coverage[{row.property, row.status}] += 1;
    }
    // Each property covers every verdict it can produce, five times over.
    for (const auto& [bucket, count] : coverage) {
        CAPTURE(bucket.first);
        CAPTURE(bucket.second);
        CHECK(count >= 5);
    }
    const char* validatable[] = {"name", "description", "image",     "url",
                                 "offers", "brand",     "sku",       "productid",
                                 "aggregaterating"};
    for (const char* property : validatable) {
        CHECK(coverage.count({property, "valid"}) == 1);
        CHECK(coverage.count({property, "invalid"}) == 1);
    }
    CHECK(coverage.count({"price", "unvalidatable"}) == 1);
}

TEST_CASE("null markers dominate every validatable rule") {
    const PropertyKey keys[] = {
        PropertyKey::Name, PropertyKey::Description, PropertyKey::Image,
        PropertyKey::Url,  PropertyKey::Offers,      PropertyKey::Brand,
        PropertyKey::Sku,  PropertyKey::ProductId,   PropertyKey::AggregateRating,
    };
    const char* markers[] = {"null", "Null", "NULL", "nUlL", "n/a", "N/A", "N/a", "n/A"};
    const char* pads[] = {"", " ", "\t", "\n", " ", "　", " \t "};
    testsupport::Rng rng(0xdeadULL);
    for (int i = 0; i < 2000; ++i) {
        std::string text = std::string(pads[rng.below(7)]) + markers[rng.below(8)] +
                           pads[rng.below(7)];
        Term object = rng.chance(0.8) ? Term::literal(text) : Term::iri(text);
        PropertyKey key = keys[rng.below(9)];
        CAPTURE(text);
        auto verdict = check_property(key, object);
        CHECK(verdict.status == Status::Invalid);
        CHECK(verdict.failed_rule == "null-marker");
    }
}

TEST_CASE("node validity needs five keys and a shorter name") {
    testsupport::Rng rng(0xbeefULL);
    ProductRecord record;
    record.subject = Term::blank("n0");
    record.properties.push_back(entry_for(PropertyKey::Name, Term::literal("Shoe")));
    record.properties.push_back(entry_for(
        PropertyKey::Description, Term::literal("A running shoe with excellent cushioning.")));
    record.properties.push_back(valid_entry(PropertyKey::Image, rng));
    record.properties.push_back(valid_entry(PropertyKey::Url, rng));
    record.properties.push_back(valid_entry(PropertyKey::Sku, rng));
    evaluate_record(record);
    NodeDiagnostics diag;
    CHECK(check_node(record, &diag));
    CHECK(record.node_valid);
    CHECK(diag.distinct_valid_keys == 5);
    CHECK(diag.name_shorter_than_description);

    // Six valid properties but no description: rule (b) has no witness.
    ProductRecord no_description;
    no_description.subject = Term::blank("n1");
    for (PropertyKey key : {PropertyKey::Name, PropertyKey::Image, PropertyKey::Url,
                            PropertyKey::Offers, PropertyKey::Brand, PropertyKey::Sku})
        no_description.properties.push_back(valid_entry(key, rng));
    evaluate_record(no_description);
    CHECK_FALSE(no_description.node_valid);

    // Only four valid properties.
    ProductRecord four;
    four.subject = Term::blank("n2");
    four.properties.push_back(entry_for(PropertyKey::Name, Term::literal("Shoe")));
    four.properties.push_back(entry_for(
        PropertyKey::Description, Term::literal("A description that is clearly longer.")));
    four.properties.push_back(valid_entry(PropertyKey::Image, rng));
    four.properties.push_back(valid_entry(PropertyKey::Url, rng));
    evaluate_record(four);
    NodeDiagnostics four_diag;
    CHECK_FALSE(check_node(four, &four_diag));
    CHECK(four_diag.distinct_valid_keys == 4);
    CHECK(four_diag.name_shorter_than_description);

    // Name at least as long as the description.
    ProductRecord long_name;
    long_name.subject = Term::blank("n3");
    long_name.properties.push_back(entry_for(
        PropertyKey::Name, Term::literal("An exceptionally verbose product name indeed")));
    long_name.properties.push_back(entry_for(PropertyKey::Description, Term::literal("Short.")));
    long_name.properties.push_back(valid_entry(PropertyKey::Image, rng));
    long_name.properties.push_back(valid_entry(PropertyKey::Url, rng));
    long_name.properties.push_back(valid_entry(PropertyKey::Sku, rng));
    evaluate_record(long_name);
    CHECK_FALSE(long_name.node_valid);

    // Duplicate keys count once toward the five.
    ProductRecord dupes;
    dupes.subject = Term::blank("n4");
    dupes.properties.push_back(entry_for(PropertyKey::Name, Term::literal("Shoe")));
    dupes.properties.push_back(entry_for(
        PropertyKey::Description, Term::literal("A description that is clearly longer.")));
    for (int i = 0; i < 5; ++i) dupes.properties.push_back(valid_entry(PropertyKey::Image, rng));
    evaluate_record(dupes);
    NodeDiagnostics dupe_diag;
    CHECK_FALSE(check_node(dupes, &dupe_diag));
    CHECK(dupe_diag.distinct_valid_keys == 3);
}

TEST_CASE("adding a valid property never invalidates a node") {
    testsupport::Rng rng(0xfeedULL);
    const PropertyKey addable[] = {
        PropertyKey::Name, PropertyKey::Description, PropertyKey::Image,
        PropertyKey::Url,  PropertyKey::Offers,      PropertyKey::Brand,
        PropertyKey::Sku,  PropertyKey::ProductId,   PropertyKey::AggregateRating,
    };
    int valid_seen = 0;
    for (int round = 0; round < 300; ++round) {
        ProductRecord record;
        record.subject = Term::blank("m" + std::to_string(round));
        record.properties.push_back(
            entry_for(PropertyKey::Name, Term::literal(rng.chance(0.5) ? "Shoe" : "Item 42")));
        record.properties.push_back(entry_for(
            PropertyKey::Description,
            Term::literal("Plenty of descriptive text about this particular product.")));
        std::size_t extra = rng.below(6);
        for (std::size_t i = 0; i < extra; ++i)
            record.properties.push_back(valid_entry(addable[rng.below(9)], rng));
        if (rng.chance(0.4))
            record.properties.push_back(entry_for(PropertyKey::Sku, Term::literal("Null")));
        evaluate_record(record);
        if (!record.node_valid) continue;
        ++valid_seen;
        PropertyKey added = addable[rng.below(9)];
        PropertyEntry entry = valid_entry(added, rng);
        if (added == PropertyKey::Name && rng.chance(0.5))
            entry = entry_for(added, Term::literal("A different but still quite long name"));
        record.properties.push_back(std::move(entry));
        evaluate_record(record);
        CAPTURE(round);
        CHECK(record.node_valid);
    }
    CHECK(valid_seen > 50);
}
