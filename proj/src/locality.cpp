#include "quadkit/locality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace quadkit::locality {

void WindowStats::add(std::uint64_t window, std::uint64_t count) {
    if (count == 0) return;
    histogram[window] += count;
    total_nodes += count;
}

void WindowStats::merge(const WindowStats& other) {
    for (const auto& [window, count] : other.histogram) histogram[window] += count;
    total_nodes += other.total_nodes;
}

std::optional<double> WindowStats::mean() const {
    if (total_nodes == 0) return std::nullopt;
    double weighted = 0.0;
    for (const auto& [window, count] : histogram)
        weighted += static_cast<double>(window) * static_cast<double>(count);
    return weighted / static_cast<double>(total_nodes);
}

std::optional<std::uint64_t> WindowStats::percentile(double p) const {
    if (!(p >= 0.0 && p <= 100.0))
        throw std::invalid_argument("percentile: p must lie in [0, 100]");
    if (total_nodes == 0) return std::nullopt;
    // Nearest-rank: the value whose cumulative count first reaches
    // ceil(p/100 * total), with rank at least 1 so p = 0 yields the minimum.
    double exact = (p / 100.0) * static_cast<double>(total_nodes);
    std::uint64_t rank = static_cast<std::uint64_t>(std::ceil(exact));
    if (rank < 1) rank = 1;
    std::uint64_t seen = 0;
    for (const auto& [window, count] : histogram) {
        seen += count;
        if (seen >= rank) return window;
    }
    return histogram.rbegin()->first;
}

std::uint64_t WindowStats::complete_nodes(std::uint64_t window) const {
    std::uint64_t fit = 0;
    for (const auto& [size, count] : histogram) {
        if (size > window) break;
        fit += count;
    }
    return fit;
}

std::optional<double> WindowStats::complete_rate(std::uint64_t window) const {
    if (total_nodes == 0) return std::nullopt;
    return static_cast<double>(complete_nodes(window)) / static_cast<double>(total_nodes);
}

SpreadTracker::SpreadTracker(bool inclusive_offset) : inclusive_offset_(inclusive_offset) {}

void SpreadTracker::push(const nquads::Quad& quad) {
    std::string key = nquads::term_key(quad.subject);
    auto [it, inserted] = spans_.try_emplace(std::move(key), Span{quad.ordinal, quad.ordinal});
    if (!inserted) {
        it->second.first = std::min(it->second.first, quad.ordinal);
        it->second.last = std::max(it->second.last, quad.ordinal);
    }
}

WindowStats SpreadTracker::finish() {
    WindowStats stats;
    const std::uint64_t offset = inclusive_offset_ ? 1 : 0;
    for (const auto& [key, span] : spans_) stats.add(span.last - span.first + offset);
    spans_.clear();
    return stats;
}

std::optional<std::uint64_t> min_window(nquads::QuadStream& stream, const nquads::Term& subject) {
    std::optional<std::uint64_t> first;
    std::uint64_t last = 0;
    nquads::Quad quad;
    while (stream.next(quad)) {
        if (quad.subject != subject) continue;
        if (!first.has_value()) first = quad.ordinal;
        last = quad.ordinal;
    }
    if (!first.has_value()) return std::nullopt;
    return last - *first;
}

WindowStats window_distribution(nquads::QuadStream& stream, bool inclusive_offset) {
    SpreadTracker tracker(inclusive_offset);
    nquads::Quad quad;
    while (stream.next(quad)) tracker.push(quad);
    return tracker.finish();
}

NodeAssembler::NodeAssembler(AssemblyConfig config) : config_(config) {
    if (config_.window < 1) throw std::invalid_argument("assembler: window must be at least 1");
}

void NodeAssembler::push(const nquads::Quad& quad) {
    expire(quad.ordinal);
    std::string key = nquads::term_key(quad.subject);
    auto it = active_.find(key);
    if (it == active_.end()) {
        Active fresh;
        fresh.first = quad.ordinal;
        fresh.record.subject = quad.subject;
        auto emitted = emitted_at_.find(key);
        if (emitted != emitted_at_.end()) {
            // The subject resurfaced after being finalized: this record and
            // the one already emitted are both fragments.
            records_[emitted->second].complete = false;
            fresh.record.complete = false;
            fragmented_.insert(key);
        }
        by_first_.emplace(quad.ordinal, key);
        it = active_.emplace(std::move(key), std::move(fresh)).first;
    }
    validity::ProductRecord& record = it->second.record;
    if (record.source_page.empty() && quad.graph.is_iri() && quad.has_graph())
        record.source_page = quad.graph.lexical;
    record.properties.push_back(
        validity::make_property_entry(quad.predicate.lexical, quad.object));
    record.quads.push_back(quad);
}

void NodeAssembler::expire(std::uint64_t ordinal) {
    while (!by_first_.empty()) {
        auto oldest = by_first_.begin();
        if (ordinal - oldest->first <= config_.window) break;
        std::string key = oldest->second;
        by_first_.erase(oldest);
        finalize(key);
    }
}

void NodeAssembler::finalize(const std::string& key) {
    auto it = active_.find(key);
    if (it == active_.end()) return;
    emitted_at_[key] = records_.size();
    records_.push_back(std::move(it->second.record));
    active_.erase(it);
}

void NodeAssembler::finish() {
    if (finished_) return;
    for (const auto& [first, key] : by_first_) finalize(key);
    by_first_.clear();
    if (!config_.emit_incomplete) {
        std::erase_if(records_, [](const validity::ProductRecord& r) { return !r.complete; });
    }
    finished_ = true;
}

std::vector<validity::ProductRecord> NodeAssembler::take_records() {
    finish();
    return std::move(records_);
}

std::vector<validity::ProductRecord> assemble_nodes(nquads::QuadStream& stream,
                                                    const AssemblyConfig& config) {
    NodeAssembler assembler(config);
    nquads::Quad quad;
    while (stream.next(quad)) assembler.push(quad);
    return assembler.take_records();
}

}  // namespace quadkit::locality
