#include "quadkit/locality.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "quadkit/nquads.hpp"
#include "test_support.hpp"

using quadkit::locality::AssemblyConfig;
using quadkit::locality::assemble_nodes;
using quadkit::locality::min_window;
using quadkit::locality::NodeAssembler;
using quadkit::locality::SpreadTracker;
using quadkit::locality::window_distribution;
using quadkit::locality::WindowStats;
using quadkit::nquads::Quad;
using quadkit::nquads::QuadStream;
using quadkit::nquads::Term;
using quadkit::nquads::term_key;
using quadkit::validity::ProductRecord;

namespace {

Term subject_term(std::size_t i) {
    return Term::iri("http://shop.example/item/" + std::to_string(i));
}

// One line of N-Quads text for subject index `s`; the object carries the line
// position so every statement in a stream is distinct.
std::string line_for(std::size_t s, std::size_t position) {
    std::string line = "<http://shop.example/item/" + std::to_string(s) +
                       "> <http://schema.org/name> \"v" + std::to_string(position) +
                       "\" <http://shop.example/page/" + std::to_string(s) + "> .\n";
    return line;
}

// Text whose line i (== ordinal i) belongs to subject labels[i].
std::string stream_text(const std::vector<std::size_t>& labels) {
    std::string text;
    for (std::size_t i = 0; i < labels.size(); ++i) text += line_for(labels[i], i);
    return text;
}

Quad quad_at(std::size_t s, std::uint64_t ordinal) {
    Quad q;
    q.subject = subject_term(s);
    q.predicate = Term::iri("http://schema.org/name");
    q.object = Term::literal("v" + std::to_string(ordinal));
    q.graph = Term::iri("http://shop.example/page/" + std::to_string(s));
    q.ordinal = ordinal;
    return q;
}

// Per-subject spans computed by a direct scan of the label vector: the
// reference answer for window sizes.
std::map<std::size_t, std::pair<std::uint64_t, std::uint64_t>> reference_spans(
    const std::vector<std::size_t>& labels) {
    std::map<std::size_t, std::pair<std::uint64_t, std::uint64_t>> spans;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = spans.try_emplace(labels[i], std::make_pair(i, i));
        if (!inserted) it->second.second = i;
    }
    return spans;
}

WindowStats reference_distribution(const std::vector<std::size_t>& labels) {
    WindowStats stats;
    for (const auto& [subject, span] : reference_spans(labels))
        stats.add(span.second - span.first);
    return stats;
}

}  // namespace

TEST_CASE("window statistics summarize histograms") {
    WindowStats stats;
    CHECK(stats.total_nodes == 0);
    CHECK_FALSE(stats.mean().has_value());
    CHECK_FALSE(stats.percentile(50.0).has_value());
    CHECK_FALSE(stats.complete_rate(10).has_value());
    CHECK_THROWS_AS(stats.percentile(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(stats.percentile(100.5), std::invalid_argument);

    stats.add(0, 50);
    stats.add(10, 49);
    stats.add(100);
    CHECK(stats.total_nodes == 100);
    std::uint64_t histogram_sum = 0;
    for (const auto& [window, count] : stats.histogram) histogram_sum += count;
    CHECK(histogram_sum == stats.total_nodes);

    CHECK(*stats.mean() == doctest::Approx(5.9));
    CHECK(*stats.percentile(0.0) == 0);
    CHECK(*stats.percentile(50.0) == 0);
    CHECK(*stats.percentile(51.0) == 10);
    CHECK(*stats.percentile(99.0) == 10);
    CHECK(*stats.percentile(100.0) == 100);
    CHECK(stats.complete_nodes(9) == 50);
    CHECK(stats.complete_nodes(10) == 99);
    CHECK(*stats.complete_rate(10) == doctest::Approx(0.99));

    // Percentile is monotone in p.
    std::uint64_t previous = *stats.percentile(0.0);
    for (double p = 0.5; p <= 100.0; p += 0.5) {
        std::uint64_t here = *stats.percentile(p);
        CHECK(here >= previous);
        previous = here;
    }

    // Merging is commutative and associative, and sums fields.
    testsupport::Rng rng(0x10ca11ULL);
    for (int round = 0; round < 20; ++round) {
        WindowStats a, b, c;
        for (int i = 0; i < 12; ++i) {
            a.add(rng.below(30), 1 + rng.below(5));
            b.add(rng.below(30), 1 + rng.below(5));
            c.add(rng.below(30), 1 + rng.below(5));
        }
        WindowStats ab = a;
        ab.merge(b);
        WindowStats ba = b;
        ba.merge(a);
        CHECK(ab.histogram == ba.histogram);
        CHECK(ab.total_nodes == ba.total_nodes);

        WindowStats ab_c = ab;
        ab_c.merge(c);
        WindowStats bc = b;
        bc.merge(c);
        WindowStats a_bc = a;
        a_bc.merge(bc);
        CHECK(ab_c.histogram == a_bc.histogram);
        CHECK(ab_c.total_nodes == a_bc.total_nodes);
        CHECK(ab_c.total_nodes == a.total_nodes + b.total_nodes + c.total_nodes);
    }
}

TEST_CASE("min window follows the span of a subject") {
    // Subject 7 sits at ordinals 5, 6, 7; subject 9 only at ordinal 9.
    std::vector<std::size_t> labels = {0, 1, 2, 3, 4, 7, 7, 7, 8, 9};
    {
        auto stream = QuadStream::from_string(stream_text(labels));
        auto window = min_window(stream, subject_term(7));
        REQUIRE(window.has_value());
        CHECK(*window == 2);
    }
    {
        auto stream = QuadStream::from_string(stream_text(labels));
        auto window = min_window(stream, subject_term(9));
        REQUIRE(window.has_value());
        CHECK(*window == 0);
    }
    {
        auto stream = QuadStream::from_string(stream_text(labels));
        CHECK_FALSE(min_window(stream, subject_term(99)).has_value());
    }
}

TEST_CASE("min window agrees with a quadratic scan") {
    testsupport::Rng rng(0x5ca2ULL);
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < 1000; ++i) labels.push_back(rng.below(50));
    std::string text = stream_text(labels);
    auto spans = reference_spans(labels);
    REQUIRE(spans.size() == 50);
    for (const auto& [subject, span] : spans) {
        auto stream = QuadStream::from_string(text);
        auto window = min_window(stream, subject_term(subject));
        REQUIRE(window.has_value());
        CHECK(*window == span.second - span.first);
    }
}

TEST_CASE("window distribution matches planted spreads") {
    SUBCASE("contiguous groups measure group size minus one") {
        std::vector<std::size_t> labels;
        std::vector<std::size_t> group_sizes = {1, 4, 2, 6, 1, 3};
        for (std::size_t g = 0; g < group_sizes.size(); ++g)
            labels.insert(labels.end(), group_sizes[g], g);
        auto stream = QuadStream::from_string(stream_text(labels));
        WindowStats stats = window_distribution(stream);
        CHECK(stats.total_nodes == group_sizes.size());
        std::map<std::uint64_t, std::uint64_t> expected;
        for (std::size_t size : group_sizes) ++expected[size - 1];
        CHECK(stats.histogram == expected);
        Quad leftover;
        CHECK_FALSE(stream.next(leftover));  // the input was consumed in one pass
    }

    SUBCASE("interleaved plants reproduce their designed histogram") {
        // Slots: A{0,6,13} spread 13, B{1,9} spread 8, C{2,3,4} spread 2,
        // D{20} spread 0, E{21,29,34} spread 13; every other slot is a
        // distinct filler subject with spread 0.
        const std::size_t n = 40;
        std::vector<std::size_t> labels(n, 0);
        std::map<std::size_t, std::vector<std::size_t>> plan = {
            {1000, {0, 6, 13}}, {1001, {1, 9}}, {1002, {2, 3, 4}},
            {1003, {20}},       {1004, {21, 29, 34}},
        };
        std::set<std::size_t> taken;
        for (const auto& [subject, slots] : plan)
            for (std::size_t slot : slots) {
                labels[slot] = subject;
                taken.insert(slot);
            }
        std::size_t filler = 2000;
        for (std::size_t i = 0; i < n; ++i)
            if (!taken.count(i)) labels[i] = filler++;
        std::size_t filler_count = filler - 2000;

        auto stream = QuadStream::from_string(stream_text(labels));
        WindowStats stats = window_distribution(stream);
        std::map<std::uint64_t, std::uint64_t> expected = {
            {0, filler_count + 1}, {2, 1}, {8, 1}, {13, 2}};
        CHECK(stats.histogram == expected);
        CHECK(stats.total_nodes == filler_count + 5);

        // The inclusive toggle shifts every measured window up by one.
        auto again = QuadStream::from_string(stream_text(labels));
        WindowStats inclusive = window_distribution(again, true);
        std::map<std::uint64_t, std::uint64_t> shifted;
        for (const auto& [window, count] : expected) shifted[window + 1] = count;
        CHECK(inclusive.histogram == shifted);
    }

    SUBCASE("an empty stream yields an empty distribution") {
        auto stream = QuadStream::from_string("");
        WindowStats stats = window_distribution(stream);
        CHECK(stats.total_nodes == 0);
        CHECK(stats.histogram.empty());
        CHECK_FALSE(stats.mean().has_value());
    }

    SUBCASE("random streams agree with the direct scan") {
        testsupport::Rng rng(0xd157ULL);
        for (int round = 0; round < 10; ++round) {
            std::vector<std::size_t> labels;
            std::size_t n = 50 + rng.below(400);
            std::size_t subjects = 1 + rng.below(40);
            for (std::size_t i = 0; i < n; ++i) labels.push_back(rng.below(subjects));
            auto stream = QuadStream::from_string(stream_text(labels));
            WindowStats stats = window_distribution(stream);
            WindowStats expected = reference_distribution(labels);
            CHECK(stats.histogram == expected.histogram);
            CHECK(stats.total_nodes == expected.total_nodes);
        }
    }
}

TEST_CASE("an unbounded window reproduces a plain group-by") {
    testsupport::Rng rng(0xa55e3bULL);
    for (int round = 0; round < 5; ++round) {
        std::vector<std::size_t> labels;
        std::size_t n = 100 + rng.below(500);
        std::size_t subjects = 2 + rng.below(60);
        for (std::size_t i = 0; i < n; ++i) labels.push_back(rng.below(subjects));

        AssemblyConfig config;
        config.window = std::numeric_limits<std::uint64_t>::max();
        auto stream = QuadStream::from_string(stream_text(labels));
        auto records = assemble_nodes(stream, config);

        // Oracle: hash group-by over the same statements, in input order.
        std::map<std::string, std::vector<Quad>> expected;
        {
            auto again = QuadStream::from_string(stream_text(labels));
            Quad q;
            while (again.next(q)) expected[term_key(q.subject)].push_back(q);
        }
        REQUIRE(records.size() == expected.size());
        std::size_t total_quads = 0;
        for (const ProductRecord& record : records) {
            CHECK(record.complete);
            auto it = expected.find(term_key(record.subject));
            REQUIRE(it != expected.end());
            const std::vector<Quad>& group = it->second;
            REQUIRE(record.quads.size() == group.size());
            REQUIRE(record.properties.size() == group.size());
            for (std::size_t i = 0; i < group.size(); ++i) {
                CHECK(record.quads[i].same_statement(group[i]));
                CHECK(record.quads[i].ordinal == group[i].ordinal);
                CHECK(record.properties[i].key == quadkit::validity::PropertyKey::Name);
                CHECK(record.properties[i].object == group[i].object);
            }
            CHECK(record.source_page == group.front().graph.lexical);
            total_quads += record.quads.size();
        }
        CHECK(total_quads == n);  // conservation, fragments included
    }
}

TEST_CASE("distant repeats split into flagged fragments") {
    SUBCASE("a repeat past the window produces two flagged records") {
        NodeAssembler assembler(AssemblyConfig{2, true});
        assembler.push(quad_at(1, 0));
        assembler.push(quad_at(1, 10));
        assembler.finish();
        const auto& records = assembler.records();
        REQUIRE(records.size() == 2);
        CHECK_FALSE(records[0].complete);
        CHECK_FALSE(records[1].complete);
        CHECK(records[0].quads.size() == 1);
        CHECK(records[1].quads.size() == 1);
        CHECK(assembler.fragmented_subjects().count(term_key(subject_term(1))) == 1);
    }

    SUBCASE("every fragment of a thrice-split subject is flagged") {
        NodeAssembler assembler(AssemblyConfig{2, true});
        assembler.push(quad_at(1, 0));
        assembler.push(quad_at(1, 10));
        assembler.push(quad_at(1, 20));
        assembler.finish();
        const auto& records = assembler.records();
        REQUIRE(records.size() == 3);
        for (const auto& record : records) CHECK_FALSE(record.complete);
    }

    SUBCASE("suppressing incomplete records keeps only whole nodes") {
        NodeAssembler assembler(AssemblyConfig{2, false});
        assembler.push(quad_at(1, 0));
        assembler.push(quad_at(2, 1));
        assembler.push(quad_at(2, 2));
        assembler.push(quad_at(1, 10));
        assembler.finish();
        const auto& records = assembler.records();
        REQUIRE(records.size() == 1);
        CHECK(records[0].subject == subject_term(2));
        CHECK(records[0].complete);
        CHECK(assembler.fragmented_subjects().size() == 1);
    }

    SUBCASE("a window below one is rejected") {
        CHECK_THROWS_AS(NodeAssembler(AssemblyConfig{0, true}), std::invalid_argument);
    }
}

TEST_CASE("a wide window dominates bounded spreads") {
    // Forty subjects, each confined to its own block of 101 slots, so no
    // subject spans more than 100 statements; leftover slots are fillers.
    testsupport::Rng rng(0xb10c5ULL);
    const std::size_t block = 101;
    const std::size_t subjects = 40;
    std::vector<std::size_t> labels(block * subjects);
    std::size_t filler = 5000;
    std::uint64_t max_spread = 0;
    for (std::size_t s = 0; s < subjects; ++s) {
        std::size_t base = s * block;
        std::uint64_t spread = rng.below(block);  // 0..100
        max_spread = std::max(max_spread, spread);
        std::set<std::size_t> slots = {base, base + spread};
        slots.insert(base + rng.below(spread + 1));
        for (std::size_t i = 0; i < block; ++i) {
            std::size_t slot = base + i;
            labels[slot] = slots.count(slot) ? s : filler++;
        }
    }
    REQUIRE(max_spread <= 100);

    auto stream = QuadStream::from_string(stream_text(labels));
    auto records = assemble_nodes(stream, AssemblyConfig{145, true});
    std::size_t total_quads = 0;
    for (const auto& record : records) {
        CHECK(record.complete);
        total_quads += record.quads.size();
    }
    CHECK(total_quads == labels.size());
    CHECK(records.size() == subjects + (filler - 5000));
}

TEST_CASE("complete rate is monotone in the window and matches the distribution") {
    testsupport::Rng rng(0x3a7eULL);
    for (int round = 0; round < 3; ++round) {
        std::vector<std::size_t> labels;
        std::size_t n = 300 + rng.below(300);
        std::size_t subjects = 5 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i) labels.push_back(rng.below(subjects));
        std::string text = stream_text(labels);

        auto dist_stream = QuadStream::from_string(text);
        WindowStats stats = window_distribution(dist_stream);
        std::size_t distinct = stats.total_nodes;

        double previous_rate = -1.0;
        for (std::uint64_t window : {1ULL, 2ULL, 4ULL, 8ULL, 16ULL, 32ULL, 64ULL, 128ULL,
                                     256ULL, 512ULL}) {
            auto stream = QuadStream::from_string(text);
            NodeAssembler assembler(AssemblyConfig{window, true});
            Quad q;
            while (stream.next(q)) assembler.push(q);
            assembler.finish();

            std::size_t whole_subjects = distinct - assembler.fragmented_subjects().size();
            // The assembler's verdicts and the distribution's bound agree on
            // exactly which subjects fit the window.
            CHECK(whole_subjects == stats.complete_nodes(window));

            double rate =
                static_cast<double>(whole_subjects) / static_cast<double>(distinct);
            CHECK(rate >= previous_rate);
            previous_rate = rate;

            std::size_t total_quads = 0;
            for (const auto& record : assembler.records()) total_quads += record.quads.size();
            CHECK(total_quads == n);
        }
    }
}

TEST_CASE("a planted corpus meets its designed complete rate") {
    // 100 subjects: 99 with spread at most 20, one stretched to 50. At
    // window 20 the complete rate is exactly 99%.
    testsupport::Rng rng(0x99c3ULL);
    const std::size_t block = 51;
    const std::size_t subjects = 100;
    std::vector<std::size_t> labels(block * subjects);
    std::size_t filler = 9000;
    for (std::size_t s = 0; s < subjects; ++s) {
        std::size_t base = s * block;
        std::uint64_t spread = s == 0 ? 50 : rng.below(21);  // subject 0 is the outlier
        std::set<std::size_t> slots = {base, base + spread};
        for (std::size_t i = 0; i < block; ++i) {
            std::size_t slot = base + i;
            labels[slot] = slots.count(slot) ? s : filler++;
        }
    }

    std::string text = stream_text(labels);
    auto dist_stream = QuadStream::from_string(text);
    WindowStats stats = window_distribution(dist_stream);

    // Rate over the planted subjects alone (fillers excluded): count the
    // planted subjects that fit the window.
    std::size_t planted_complete = 0;
    {
        auto spans = reference_spans(labels);
        for (std::size_t s = 0; s < subjects; ++s) {
            auto span = spans.at(s);
            if (span.second - span.first <= 20) ++planted_complete;
        }
    }
    CHECK(planted_complete == subjects - 1);

    auto stream = QuadStream::from_string(text);
    NodeAssembler assembler(AssemblyConfig{20, true});
    Quad q;
    while (stream.next(q)) assembler.push(q);
    assembler.finish();
    REQUIRE(assembler.fragmented_subjects().size() == 1);
    CHECK(assembler.fragmented_subjects().count(term_key(subject_term(0))) == 1);

    // The whole-stream rate from the distribution matches the assembler.
    std::size_t whole = stats.total_nodes - assembler.fragmented_subjects().size();
    CHECK(stats.complete_nodes(20) == whole);
}
