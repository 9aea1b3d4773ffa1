#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quadkit/nquads.hpp"
#include "quadkit/validity.hpp"

namespace quadkit::locality {

// Distribution of per-subject window sizes. A subject's window is the number
// of statements one must read past its first statement to reach its last one:
// last ordinal minus first ordinal, 0 for subjects seen once.
struct WindowStats {
    std::map<std::uint64_t, std::uint64_t> histogram;  // window size -> node count
    std::uint64_t total_nodes = 0;

    void add(std::uint64_t window, std::uint64_t count = 1);
    // Fieldwise sum; associative and commutative, so per-chunk stats can be
    // folded in any order.
    void merge(const WindowStats& other);

    // Absent on an empty distribution.
    std::optional<double> mean() const;
    // Nearest-rank percentile over the histogram; p in [0, 100], otherwise
    // std::invalid_argument. Absent on an empty distribution.
    std::optional<std::uint64_t> percentile(double p) const;

    // Nodes whose window fits the given bound, and their share of all nodes.
    std::uint64_t complete_nodes(std::uint64_t window) const;
    std::optional<double> complete_rate(std::uint64_t window) const;

    bool operator==(const WindowStats&) const = default;
};

// Single-pass accumulator behind window_distribution, exposed so callers with
// pre-filtered quads (ordinals no longer contiguous) can feed it directly.
class SpreadTracker {
  public:
    // When inclusive_offset is set, reported windows count the first
    // statement too (every window grows by one).
    explicit SpreadTracker(bool inclusive_offset = false);

    void push(const nquads::Quad& quad);
    WindowStats finish();

  private:
    struct Span {
        std::uint64_t first = 0;
        std::uint64_t last = 0;
    };
    bool inclusive_offset_ = false;
    std::map<std::string, Span> spans_;  // subject key -> ordinal span
};

// Window of one subject: last ordinal - first ordinal, 0 for a single
// occurrence, absent when the subject never appears. Consumes the stream.
std::optional<std::uint64_t> min_window(nquads::QuadStream& stream, const nquads::Term& subject);

// Window sizes of every subject in the stream, in one pass.
WindowStats window_distribution(nquads::QuadStream& stream, bool inclusive_offset = false);

struct AssemblyConfig {
    std::uint64_t window = 145;   // statements scanned past a subject's first one
    bool emit_incomplete = true;  // keep fragment records (flagged) in the output
};

// Groups statements into per-subject ProductRecords while holding at most a
// window's worth of them in memory. A subject is finalized once the stream
// moves more than `window` statements past its first one, or at end of input.
// Statements for an already-finalized subject open a fresh record, and every
// record of such a split subject is flagged complete = false.
//
// Quads must arrive in ordinal order (the parser's natural order); subject
// identity is scoped to one chunk, matching how blank-node labels behave.
class NodeAssembler {
  public:
    explicit NodeAssembler(AssemblyConfig config);  // window < 1 -> std::invalid_argument

    void push(const nquads::Quad& quad);
    // Finalizes everything still buffered and applies emit_incomplete.
    void finish();

    // Emitted records in finalization order; complete after finish().
    const std::vector<validity::ProductRecord>& records() const { return records_; }
    std::vector<validity::ProductRecord> take_records();

    // Keys (term_key of the subject) that were split across several records.
    const std::set<std::string>& fragmented_subjects() const { return fragmented_; }

  private:
    struct Active {
        validity::ProductRecord record;
        std::uint64_t first = 0;
    };

    void expire(std::uint64_t ordinal);
    void finalize(const std::string& key);

    AssemblyConfig config_;
    std::map<std::string, Active> active_;
    std::multimap<std::uint64_t, std::string> by_first_;  // expiry queue
    std::map<std::string, std::size_t> emitted_at_;       // key -> latest record index
    std::set<std::string> fragmented_;
    std::vector<validity::ProductRecord> records_;
    bool finished_ = false;
};

// Convenience wrapper: drains the stream through a NodeAssembler.
std::vector<validity::ProductRecord> assemble_nodes(nquads::QuadStream& stream,
                                                    const AssemblyConfig& config = {});

}  // namespace quadkit::locality
