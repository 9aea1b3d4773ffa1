#include "quadkit/nquads.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <utility>

namespace quadkit::nquads {

Term Term::iri(std::string lex) {
    Term t;
    t.kind = TermKind::Iri;
    t.lexical = std::move(lex);
    return t;
}

Term Term::blank(std::string label) {
    Term t;
    t.kind = TermKind::BlankNode;
    t.lexical = std::move(label);
    return t;
}

Term Term::literal(std::string lex, std::string lang, std::string dtype) {
    Term t;
    t.kind = TermKind::Literal;
    t.lexical = std::move(lex);
    t.language = std::move(lang);
    t.datatype = std::move(dtype);
    return t;
}

void Term::clear() {
    kind = TermKind::Iri;
    lexical.clear();
    language.clear();
    datatype.clear();
}

std::string term_key(const Term& t) {
    std::string k;
    k.reserve(t.lexical.size() + 2);
    switch (t.kind) {
        case TermKind::Iri: k += "I|"; break;
        case TermKind::BlankNode: k += "B|"; break;
        case TermKind::Literal: k += "L|"; break;
    }
    k += t.lexical;
    return k;
}

void ParseReport::note_malformed(std::uint64_t line_number, std::string_view text) {
    ++malformed_lines;
    if (malformed_samples.size() < sample_cap) {
        malformed_samples.push_back({line_number, std::string(text)});
    }
}

void ParseReport::merge(const ParseReport& other) {
    lines_read += other.lines_read;
    quads_yielded += other.quads_yielded;
    malformed_lines += other.malformed_lines;
    ignored_lines += other.ignored_lines;
    encoding_repairs += other.encoding_repairs;
    for (const auto& s : other.malformed_samples) {
        if (malformed_samples.size() >= sample_cap) break;
        malformed_samples.push_back(s);
    }
}

// ---------------------------------------------------------------------------
// UTF-8 repair

namespace {

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xc0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xe0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
        out += static_cast<char>(0xf0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        out += static_cast<char>(0x80 | (cp & 0x3f));
    }
}

// Returns the length of the valid UTF-8 sequence starting at p, or 0 if
// invalid (overlong, surrogate, out of range, truncated).
inline std::size_t utf8_sequence_length(const unsigned char* p, std::size_t avail) {
    unsigned char b = p[0];
    if (b < 0x80) return 1;
    std::size_t len;
    std::uint32_t cp;
    if ((b & 0xe0) == 0xc0) {
        len = 2;
        cp = b & 0x1f;
    } else if ((b & 0xf0) == 0xe0) {
        len = 3;
        cp = b & 0x0f;
    } else if ((b & 0xf8) == 0xf0) {
        len = 4;
        cp = b & 0x07;
    } else {
        return 0;
    }
    if (avail < len) return 0;
    for (std::size_t i = 1; i < len; ++i) {
        if ((p[i] & 0xc0) != 0x80) return 0;
        cp = (cp << 6) | (p[i] & 0x3f);
    }
    if (len == 2 && cp < 0x80) return 0;
    if (len == 3 && cp < 0x800) return 0;
    if (len == 4 && cp < 0x10000) return 0;
    if (cp >= 0xd800 && cp <= 0xdfff) return 0;
    if (cp > 0x10ffff) return 0;
    return len;
}

constexpr std::string_view kReplacement = "\xef\xbf\xbd";

}  // namespace

std::size_t repair_utf8(std::string_view line, std::string& out, bool& repaired) {
    repaired = false;
    const auto* p = reinterpret_cast<const unsigned char*>(line.data());
    std::size_t n = line.size();
    std::size_t i = 0;
    // Fast scan until the first invalid sequence.
    while (i < n) {
        if (p[i] < 0x80) {
            ++i;
            continue;
        }
        std::size_t len = utf8_sequence_length(p + i, n - i);
        if (len == 0) break;
        i += len;
    }
    if (i >= n) return 0;

    repaired = true;
    std::size_t repairs = 0;
    out.clear();
    out.reserve(line.size() + 8);
    out.append(line.substr(0, i));
    while (i < n) {
        if (p[i] < 0x80) {
            out += static_cast<char>(p[i]);
            ++i;
            continue;
        }
        std::size_t len = utf8_sequence_length(p + i, n - i);
        if (len == 0) {
            out += kReplacement;
            ++repairs;
            ++i;  // resync one byte at a time
        } else {
            out.append(line.substr(i, len));
            i += len;
        }
    }
    return repairs;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Cursor {
    const char* p;
    const char* end;
    const char* begin;

    bool done() const { return p >= end; }
    char peek() const { return *p; }
    std::size_t offset() const { return static_cast<std::size_t>(p - begin); }
};

inline void skip_ws(Cursor& c) {
    while (!c.done() && (*c.p == ' ' || *c.p == '\t')) ++c.p;
}

inline bool fail(ParseError& err, std::size_t offset, const char* msg) {
    err.offset = offset;
    err.message = msg;
    return false;
}

inline int hex_value(char ch) {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    return -1;
}

// \ already consumed; resolves ECHAR and \uXXXX / \UXXXXXXXX.
bool unescape_into(Cursor& c, std::string& out, std::size_t start, ParseError& err) {
    if (c.done()) return fail(err, start, "truncated escape");
    char ch = *c.p++;
    switch (ch) {
        case 't': out += '\t'; return true;
        case 'b': out += '\b'; return true;
        case 'n': out += '\n'; return true;
        case 'r': out += '\r'; return true;
        case 'f': out += '\f'; return true;
        case '"': out += '"'; return true;
        case '\'': out += '\''; return true;
        case '\\': out += '\\'; return true;
        case 'u':
        case 'U': {
            int digits = (ch == 'u') ? 4 : 8;
            std::uint32_t cp = 0;
            for (int i = 0; i < digits; ++i) {
                if (c.done()) return fail(err, start, "truncated unicode escape");
                int v = hex_value(*c.p++);
                if (v < 0) return fail(err, start, "bad unicode escape digit");
                cp = (cp << 4) | static_cast<std::uint32_t>(v);
            }
            if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
                return fail(err, start, "unicode escape out of range");
            }
            append_utf8(out, cp);
            return true;
        }
        default:
            return fail(err, start, "unknown escape");
    }
}

bool parse_iri(Cursor& c, std::string& out, ParseError& err) {
    std::size_t start = c.offset();
    ++c.p;  // consume '<'
    out.clear();
    while (true) {
        if (c.done()) return fail(err, start, "unterminated IRI");
        char ch = *c.p;
        if (ch == '>') {
            ++c.p;
            if (out.empty()) return fail(err, start, "empty IRI");
            return true;
        }
        if (ch == '\\') {
            ++c.p;
            if (!unescape_into(c, out, start, err)) return false;
            continue;
        }
        if (ch == ' ' || ch == '\t') return fail(err, start, "whitespace in IRI");
        out += ch;
        ++c.p;
    }
}

bool parse_blank(Cursor& c, std::string& out, ParseError& err) {
    std::size_t start = c.offset();
    c.p += 2;  // consume "_:"
    out.clear();
    while (!c.done()) {
        char ch = *c.p;
        if (ch == ' ' || ch == '\t') break;
        out += ch;
        ++c.p;
    }
    if (out.empty()) return fail(err, start, "empty blank node label");
    // A lone trailing '.' belongs to the statement, not the label.
    if (out.size() > 1 && out.back() == '.') {
        out.pop_back();
        --c.p;
    }
    return true;
}

bool parse_literal(Cursor& c, Term& t, ParseError& err) {
    std::size_t start = c.offset();
    ++c.p;  // consume '"'
    t.kind = TermKind::Literal;
    t.lexical.clear();
    t.language.clear();
    t.datatype.clear();
    while (true) {
        if (c.done()) return fail(err, start, "unterminated literal");
        char ch = *c.p;
        if (ch == '"') {
            ++c.p;
            break;
        }
        if (ch == '\\') {
            ++c.p;
            if (!unescape_into(c, t.lexical, start, err)) return false;
            continue;
        }
        t.lexical += ch;
        ++c.p;
    }
    if (!c.done() && *c.p == '@') {
        ++c.p;
        std::size_t tag_start = c.offset();
        while (!c.done() && *c.p != ' ' && *c.p != '\t') {
            t.language += *c.p;
            ++c.p;
        }
        if (t.language.empty()) return fail(err, tag_start, "empty language tag");
        if (t.language.size() > 1 && t.language.back() == '.') {
            t.language.pop_back();
            --c.p;
        }
        return true;
    }
    if (!c.done() && *c.p == '^') {
        std::size_t dt_start = c.offset();
        if (c.end - c.p < 3 || c.p[1] != '^' || c.p[2] != '<') {
            return fail(err, dt_start, "malformed datatype marker");
        }
        c.p += 2;
        return parse_iri(c, t.datatype, err);
    }
    return true;
}

bool parse_term(Cursor& c, Term& t, bool allow_literal, ParseError& err) {
    if (c.done()) return fail(err, c.offset(), "missing term");
    char ch = c.peek();
    if (ch == '<') {
        t.kind = TermKind::Iri;
        t.language.clear();
        t.datatype.clear();
        return parse_iri(c, t.lexical, err);
    }
    if (ch == '_' && (c.end - c.p) >= 2 && c.p[1] == ':') {
        t.kind = TermKind::BlankNode;
        t.language.clear();
        t.datatype.clear();
        return parse_blank(c, t.lexical, err);
    }
    if (ch == '"' && allow_literal) {
        return parse_literal(c, t, err);
    }
    return fail(err, c.offset(), allow_literal ? "expected IRI, blank node or literal"
                                              : "expected IRI or blank node");
}

}  // namespace

bool parse_quad(std::string_view line, Quad& out, ParseError& err) {
    Cursor c{line.data(), line.data() + line.size(), line.data()};
    skip_ws(c);
    if (!parse_term(c, out.subject, false, err)) return false;
    skip_ws(c);
    if (c.done() || c.peek() != '<') {
        return fail(err, c.offset(), "predicate must be an IRI");
    }
    out.predicate.kind = TermKind::Iri;
    out.predicate.language.clear();
    out.predicate.datatype.clear();
    if (!parse_iri(c, out.predicate.lexical, err)) return false;
    skip_ws(c);
    if (c.done() || c.peek() == '.') {
        return fail(err, c.offset(), "missing object");
    }
    if (!parse_term(c, out.object, true, err)) return false;
    skip_ws(c);

    out.graph.clear();
    if (!c.done() && c.peek() != '.') {
        // Graph label: IRI (WDC page URL) or, tolerated, a blank node.
        if (!parse_term(c, out.graph, false, err)) return false;
        skip_ws(c);
    }
    if (c.done() || c.peek() != '.') {
        return fail(err, c.offset(), "missing statement terminator");
    }
    ++c.p;
    skip_ws(c);
    if (!c.done() && c.peek() != '#') {
        return fail(err, c.offset(), "trailing tokens after terminator");
    }
    return true;
}

// ---------------------------------------------------------------------------
// Writer

namespace {

void append_escaped_iri(std::string& out, std::string_view lex) {
    out += '<';
    for (unsigned char ch : lex) {
        if (ch <= 0x20 || ch == '<' || ch == '>' || ch == '"' || ch == '{' || ch == '}' ||
            ch == '|' || ch == '^' || ch == '`' || ch == '\\') {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04X", ch);
            out += buf;
        } else {
            out += static_cast<char>(ch);
        }
    }
    out += '>';
}

void append_escaped_literal(std::string& out, std::string_view lex) {
    out += '"';
    for (unsigned char ch : lex) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (ch < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04X", ch);
                    out += buf;
                } else {
                    out += static_cast<char>(ch);
                }
        }
    }
    out += '"';
}

}  // namespace

void append_term(std::string& out, const Term& t) {
    switch (t.kind) {
        case TermKind::Iri:
            append_escaped_iri(out, t.lexical);
            break;
        case TermKind::BlankNode:
            out += "_:";
            out += t.lexical;
            break;
        case TermKind::Literal:
            append_escaped_literal(out, t.lexical);
            if (!t.language.empty()) {
                out += '@';
                out += t.language;
            } else if (!t.datatype.empty()) {
                out += "^^";
                append_escaped_iri(out, t.datatype);
            }
            break;
    }
}

void append_quad(std::string& out, const Quad& q) {
    append_term(out, q.subject);
    out += ' ';
    append_term(out, q.predicate);
    out += ' ';
    append_term(out, q.object);
    if (q.has_graph()) {
        out += ' ';
        append_term(out, q.graph);
    }
    out += " .";
}

std::string write_quad(const Quad& q) {
    std::string out;
    append_quad(out, q);
    return out;
}

// ---------------------------------------------------------------------------
// Byte sources

namespace {

// gzopen reads plain files transparently, so this source covers both the
// Auto and Gzip modes.
class GzFileSource final : public ByteSource {
  public:
    explicit GzFileSource(const std::string& path) : path_(path) {
        file_ = gzopen(path.c_str(), "rb");
        if (file_ == nullptr) {
            throw ChunkError("cannot open " + path, 0);
        }
        gzbuffer(file_, 1 << 18);
    }

    ~GzFileSource() override {
        if (file_ != nullptr) gzclose(file_);
    }

    std::size_t read(char* buf, std::size_t cap) override {
        int n = gzread(file_, buf, static_cast<unsigned>(cap));
        if (n < 0) {
            int errnum = 0;
            const char* msg = gzerror(file_, &errnum);
            throw ChunkError("decompression failed for " + path_ + " after " +
                                 std::to_string(gzoffset(file_)) + " compressed bytes: " +
                                 (msg != nullptr ? msg : "unknown error"),
                             static_cast<std::uint64_t>(gzoffset(file_)));
        }
        if (n == 0) {
            // A clean end reports Z_OK; a truncated member reports Z_BUF_ERROR.
            int errnum = 0;
            gzerror(file_, &errnum);
            if (errnum != Z_OK && errnum != Z_STREAM_END) {
                throw ChunkError("truncated gzip stream in " + path_ + " after " +
                                     std::to_string(gzoffset(file_)) + " compressed bytes",
                                 static_cast<std::uint64_t>(gzoffset(file_)));
            }
        }
        return static_cast<std::size_t>(n);
    }

  private:
    gzFile file_ = nullptr;
    std::string path_;
};

class PlainFileSource final : public ByteSource {
  public:
    explicit PlainFileSource(const std::string& path) : path_(path) {
        file_ = std::fopen(path.c_str(), "rb");
        if (file_ == nullptr) throw ChunkError("cannot open " + path, 0);
    }
    ~PlainFileSource() override {
        if (file_ != nullptr) std::fclose(file_);
    }
    std::size_t read(char* buf, std::size_t cap) override {
        std::size_t n = std::fread(buf, 1, cap, file_);
        if (n == 0 && std::ferror(file_)) {
            throw ChunkError("read failed for " + path_ + " after " + std::to_string(consumed_) +
                                 " bytes",
                             consumed_);
        }
        consumed_ += n;
        return n;
    }

  private:
    std::FILE* file_ = nullptr;
    std::string path_;
    std::uint64_t consumed_ = 0;
};

class MemorySource final : public ByteSource {
  public:
    explicit MemorySource(std::string text) : text_(std::move(text)) {}
    std::size_t read(char* buf, std::size_t cap) override {
        std::size_t n = std::min(cap, text_.size() - pos_);
        std::memcpy(buf, text_.data() + pos_, n);
        pos_ += n;
        return n;
    }

  private:
    std::string text_;
    std::size_t pos_ = 0;
};

}  // namespace

std::unique_ptr<ByteSource> open_byte_source(const std::string& path, Compression c) {
    if (c == Compression::None) return std::make_unique<PlainFileSource>(path);
    return std::make_unique<GzFileSource>(path);
}

std::unique_ptr<ByteSource> memory_byte_source(std::string text) {
    return std::make_unique<MemorySource>(std::move(text));
}

// ---------------------------------------------------------------------------
// QuadStream

QuadStream::QuadStream(std::unique_ptr<ByteSource> source, StreamOptions opts)
    : source_(std::move(source)) {
    report_.sample_cap = opts.malformed_sample_cap;
    block_.resize(1 << 18);
}

QuadStream QuadStream::open_file(const std::string& path, Compression c, StreamOptions opts) {
    return QuadStream(open_byte_source(path, c), opts);
}

QuadStream QuadStream::from_string(std::string text, StreamOptions opts) {
    return QuadStream(memory_byte_source(std::move(text)), opts);
}

bool QuadStream::next_line(std::string_view& line) {
    carry_.clear();
    while (true) {
        if (block_pos_ >= block_valid_) {
            if (source_done_) break;
            std::size_t n = source_->read(block_.data(), block_.size());
            block_pos_ = 0;
            block_valid_ = n;
            if (n == 0) {
                source_done_ = true;
                break;
            }
        }
        const char* start = block_.data() + block_pos_;
        const char* nl =
            static_cast<const char*>(std::memchr(start, '\n', block_valid_ - block_pos_));
        if (nl != nullptr) {
            std::size_t len = static_cast<std::size_t>(nl - start);
            block_pos_ += len + 1;
            if (carry_.empty()) {
                line = std::string_view(start, len);
            } else {
                carry_.append(start, len);
                line = carry_;
            }
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            return true;
        }
        carry_.append(start, block_valid_ - block_pos_);
        block_pos_ = block_valid_;
    }
    if (!carry_.empty()) {
        // Final line without trailing newline.
        line = carry_;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return true;
    }
    return false;
}

bool QuadStream::next(Quad& q) {
    std::string_view line;
    while (next_line(line)) {
        ++report_.lines_read;
        // Blank or comment-only line?
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '#') {
            ++report_.ignored_lines;
            continue;
        }
        bool repaired = false;
        std::size_t repairs = repair_utf8(line, repaired_, repaired);
        if (repaired) {
            report_.encoding_repairs += repairs;
            line = repaired_;
        }
        ParseError err;
        if (parse_quad(line, q, err)) {
            q.ordinal = next_ordinal_++;
            ++report_.quads_yielded;
            return true;
        }
        report_.note_malformed(report_.lines_read, line);
    }
    return false;
}

}  // namespace quadkit::nquads
