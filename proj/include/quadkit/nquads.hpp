#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace quadkit::nquads {

enum class TermKind { Iri, BlankNode, Literal };

// One RDF term. For literals, `language` and `datatype` are mutually
// exclusive; both empty means a plain literal.
struct Term {
    TermKind kind = TermKind::Iri;
    std::string lexical;
    std::string language;
    std::string datatype;

    static Term iri(std::string lex);
    static Term blank(std::string label);
    static Term literal(std::string lex, std::string lang = {}, std::string dtype = {});

    bool is_iri() const { return kind == TermKind::Iri; }
    bool is_blank() const { return kind == TermKind::BlankNode; }
    bool is_literal() const { return kind == TermKind::Literal; }

    void clear();
    bool operator==(const Term&) const = default;
};

// One N-Quads statement. In WDC extractions the graph term holds the URL of
// the page the statement was extracted from. A graph term with empty lexical
// marks a statement that arrived as a bare triple.
struct Quad {
    Term subject;
    Term predicate;
    Term object;
    Term graph;
    std::uint64_t ordinal = 0;

    bool has_graph() const { return !graph.lexical.empty(); }
    // Field equality ignoring stream position.
    bool same_statement(const Quad& o) const {
        return subject == o.subject && predicate == o.predicate && object == o.object &&
               graph == o.graph;
    }
};

// Stable map/set key for a term (subject identity, etc.).
std::string term_key(const Term& t);

struct ParseError {
    std::size_t offset = 0;  // byte offset of the first unparseable token
    std::string message;
};

struct MalformedLine {
    std::uint64_t line_number = 0;  // 1-based
    std::string text;
};

struct ParseReport {
    std::uint64_t lines_read = 0;
    std::uint64_t quads_yielded = 0;
    std::uint64_t malformed_lines = 0;
    std::uint64_t ignored_lines = 0;  // blank and comment-only lines
    std::uint64_t encoding_repairs = 0;  // invalid UTF-8 sequences replaced
    std::size_t sample_cap = 10;
    std::vector<MalformedLine> malformed_samples;

    void note_malformed(std::uint64_t line_number, std::string_view text);
    void merge(const ParseReport& other);
};

// Parses one physical line (no trailing newline). Returns false and fills
// `err` on malformed input; `out` is reused across calls by design, its
// previous content is discarded. The ordinal is left untouched; streams
// assign it.
bool parse_quad(std::string_view line, Quad& out, ParseError& err);

// Canonical N-Quads serialization with escapes applied. parse_quad on the
// result reproduces the quad (modulo ordinal).
void append_quad(std::string& out, const Quad& q);
std::string write_quad(const Quad& q);
void append_term(std::string& out, const Term& t);

// Replaces invalid UTF-8 sequences in `line` with U+FFFD. Returns the number
// of replacements; on zero the output string is untouched and `repaired`
// stays false.
std::size_t repair_utf8(std::string_view line, std::string& out, bool& repaired);

// Raised when a chunk cannot be read further (decompression failure, I/O).
class ChunkError : public std::runtime_error {
  public:
    ChunkError(std::string message, std::uint64_t bytes_consumed)
        : std::runtime_error(std::move(message)), bytes_consumed_(bytes_consumed) {}
    std::uint64_t bytes_consumed() const { return bytes_consumed_; }

  private:
    std::uint64_t bytes_consumed_ = 0;
};

// Raw byte supplier for QuadStream. read() returns 0 on end of input and
// throws ChunkError on failure.
class ByteSource {
  public:
    virtual ~ByteSource() = default;
    virtual std::size_t read(char* buf, std::size_t cap) = 0;
};

enum class Compression { Auto, None, Gzip };

std::unique_ptr<ByteSource> open_byte_source(const std::string& path, Compression c);
std::unique_ptr<ByteSource> memory_byte_source(std::string text);

struct StreamOptions {
    std::size_t malformed_sample_cap = 10;
};

// Single-pass tolerant reader over one chunk. Yields quads in file order
// with consecutive ordinals starting at 0. Memory is bounded by one line
// plus decompressor state. Malformed lines are counted, sampled, and
// skipped; parsing one bad line never poisons the next.
class QuadStream {
  public:
    explicit QuadStream(std::unique_ptr<ByteSource> source, StreamOptions opts = {});

    static QuadStream open_file(const std::string& path, Compression c = Compression::Auto,
                                StreamOptions opts = {});
    static QuadStream from_string(std::string text, StreamOptions opts = {});

    // Fills `q` (its buffers are reused) and returns true, or returns false
    // at end of chunk. Throws ChunkError when the source fails.
    bool next(Quad& q);

    const ParseReport& report() const { return report_; }

  private:
    bool next_line(std::string_view& line);

    std::unique_ptr<ByteSource> source_;
    std::string block_;
    std::size_t block_pos_ = 0;
    std::size_t block_valid_ = 0;
    std::string carry_;
    std::string repaired_;
    bool source_done_ = false;
    std::uint64_t next_ordinal_ = 0;
    ParseReport report_;
};

}  // namespace quadkit::nquads
