#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "quadkit/nquads.hpp"

namespace quadkit::language {

// Lowercase primary subtag: text before the first '-' or '_', trimmed.
// Returns the empty string for tags that trim to nothing.
std::string reconcile_tag(std::string_view tag);

// True iff at least half of the codepoints are ASCII digits; empty counts as
// numeric so it drops out of language analysis.
bool is_numeric_literal(std::string_view text);

// Maps common three-letter codes onto their two-letter equivalents and
// lowercases; unknown codes pass through unchanged.
std::string normalize_language_code(std::string_view code);

// True when the code lives in the normalized two-letter namespace (two ASCII
// letters, or a three-letter code the table knows).
bool is_mapped_code(std::string_view code);

// Pluggable language identifier.
class Identifier {
  public:
    struct Result {
        std::string code;
        double confidence = 0.0;  // in [0, 1]
    };

    virtual ~Identifier() = default;
    virtual std::optional<Result> identify(std::string_view text) const = 0;
    // Batched variant for adapters with per-invocation overhead.
    virtual std::vector<std::optional<Result>> identify_batch(
        const std::vector<std::string>& texts) const;
    // Empty set means the implementation cannot enumerate its codes.
    virtual const std::set<std::string>& supported_codes() const = 0;
    virtual std::string_view name() const = 0;
};

enum class Agreement { Agree, Disagree, Undetermined };

std::string_view to_string(Agreement a);

struct LanguageSample {
    std::string literal;
    std::optional<std::string> declared_tag;  // raw tag from the literal
    std::optional<std::string> reconciled;    // primary subtag, when derivable
    std::optional<Identifier::Result> identified;
    Agreement agreement = Agreement::Undetermined;
};

// Declared-vs-identified judgement: codes are compared after normalization;
// a mismatch counts as disagreement only when both codes are mapped.
Agreement judge_agreement(const std::optional<std::string>& reconciled,
                          const std::optional<Identifier::Result>& identified);

struct SampleOptions {
    double rate = 0.01;        // in (0, 1]
    std::uint64_t seed = 0;
    std::string stream_label;  // identity of the chunk; part of the sampling hash
};

// Deterministic Bernoulli sampler over text literals. The decision for a
// literal depends only on (seed, stream label, ordinal, content), so any
// worker layout reproduces the same sample set.
class LiteralSampler {
  public:
    explicit LiteralSampler(SampleOptions options);

    const SampleOptions& options() const { return options_; }

    // True for text-shaped literal objects that pass the numeric filter.
    static bool eligible(const nquads::Term& object);

    bool selects(std::uint64_t ordinal, std::string_view literal) const;

    // Builds a sample when the quad's object is eligible and selected.
    std::optional<LanguageSample> consider(const nquads::Quad& quad,
                                           const Identifier* identifier) const;

  private:
    SampleOptions options_;
};

// Drains the stream and returns every selected sample in stream order.
std::vector<LanguageSample> sample_literals(nquads::QuadStream& stream,
                                            const SampleOptions& options,
                                            const Identifier* identifier = nullptr);

struct AgreementRow {
    std::uint64_t agree = 0;
    std::uint64_t disagree = 0;
    std::uint64_t undetermined = 0;

    std::uint64_t support() const { return agree + disagree; }
    double agree_share() const;
    double disagree_share() const;

    bool operator==(const AgreementRow&) const = default;
};

// Groups samples by normalized declared code. Codes with no samples are absent.
std::map<std::string, AgreementRow> measure_agreement(const std::vector<LanguageSample>& samples);

// Offline character-trigram identifier trained from the shipped profile file.
class TrigramIdentifier : public Identifier {
  public:
    struct Options {
        std::size_t min_text_length = 20;  // codepoints; abstain below
        double confidence_floor = 0.1;     // abstain below
        std::size_t profile_size = 1200;   // trigrams kept per language
    };

    static TrigramIdentifier load_default() { return load_default(Options{}); }
    static TrigramIdentifier load_default(Options options);
    explicit TrigramIdentifier(const std::string& profile_path) : TrigramIdentifier(profile_path, Options{}) {}
    TrigramIdentifier(const std::string& profile_path, Options options);

    std::optional<Result> identify(std::string_view text) const override;
    const std::set<std::string>& supported_codes() const override;
    std::string_view name() const override { return "trigram"; }

  private:
    struct Profile {
        std::string code;
        std::map<std::string, std::size_t> rank;  // trigram -> position
    };

    Options options_;
    std::vector<Profile> profiles_;
    std::set<std::string> codes_;
};

// Deterministic lookup identifier: maps exact literal text to a code.
// Used as the perfect-oracle stub when the ground truth is known.
class OracleIdentifier : public Identifier {
  public:
    OracleIdentifier() = default;
    // Loads a JSON object {"literal text": "code", ...} or a ground-truth
    // sidecar whose "literal_languages" member has that shape.
    static OracleIdentifier from_json_file(const std::string& path);

    void insert(std::string literal, std::string code);

    std::optional<Result> identify(std::string_view text) const override;
    const std::set<std::string>& supported_codes() const override;
    std::string_view name() const override { return "oracle"; }

  private:
    std::map<std::string, std::string, std::less<>> mapping_;
    std::set<std::string> codes_;
};

// Adapter for an external identifier process. The command reads literals from
// stdin (one per line; '\\' and newline escaped as \\\\ and \\n) and writes one
// response per line: "<code>\t<confidence>" or "-" to abstain.
class CommandIdentifier : public Identifier {
  public:
    explicit CommandIdentifier(std::string command_line);

    std::optional<Result> identify(std::string_view text) const override;
    std::vector<std::optional<Result>> identify_batch(
        const std::vector<std::string>& texts) const override;
    const std::set<std::string>& supported_codes() const override;
    std::string_view name() const override { return "command"; }

  private:
    std::string command_line_;
};

}  // namespace quadkit::language
