#include "quadkit/language.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "quadkit/unicode.hpp"

#ifndef QUADKIT_DATA_DIR
#define QUADKIT_DATA_DIR "data"
#endif

namespace quadkit::language {

namespace {

using nquads::Term;
using nquads::TermKind;

constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";

std::string_view trim_ascii(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    auto is_ws = [](char ch) {
        return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
    };
    while (begin < end && is_ws(text[begin])) ++begin;
    while (end > begin && is_ws(text[end - 1])) --end;
    return text.substr(begin, end - begin);
}

std::string lower_ascii(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

// Three-letter codes (both bibliographic and terminological variants) that
// fold onto a two-letter code.
const std::map<std::string, std::string>& iso639_table() {
    static const std::map<std::string, std::string> table = {
        {"eng", "en"}, {"deu", "de"}, {"ger", "de"}, {"fra", "fr"}, {"fre", "fr"},
        {"spa", "es"}, {"ita", "it"}, {"nld", "nl"}, {"dut", "nl"}, {"por", "pt"},
        {"rus", "ru"}, {"jpn", "ja"}, {"zho", "zh"}, {"chi", "zh"}, {"kor", "ko"},
        {"ara", "ar"}, {"pol", "pl"}, {"swe", "sv"}, {"dan", "da"}, {"nor", "no"},
        {"fin", "fi"}, {"ces", "cs"}, {"cze", "cs"}, {"ell", "el"}, {"gre", "el"},
        {"tur", "tr"}, {"heb", "he"}, {"hin", "hi"}, {"tha", "th"}, {"vie", "vi"},
        {"ukr", "uk"}, {"hun", "hu"}, {"ron", "ro"}, {"rum", "ro"}, {"cat", "ca"},
        {"slk", "sk"}, {"slo", "sk"}, {"bul", "bg"}, {"hrv", "hr"}, {"srp", "sr"},
        {"lit", "lt"}, {"lav", "lv"}, {"est", "et"}, {"ind", "id"}, {"msa", "ms"},
        {"may", "ms"}, {"fas", "fa"}, {"per", "fa"},
    };
    return table;
}

bool two_ascii_letters(std::string_view code) {
    return code.size() == 2 && std::isalpha(static_cast<unsigned char>(code[0])) &&
           std::isalpha(static_cast<unsigned char>(code[1]));
}

}  // namespace

std::string reconcile_tag(std::string_view tag) {
    std::string_view trimmed = trim_ascii(tag);
    std::size_t cut = trimmed.find_first_of("-_");
    if (cut != std::string_view::npos) trimmed = trimmed.substr(0, cut);
    trimmed = trim_ascii(trimmed);
    return lower_ascii(trimmed);
}

bool is_numeric_literal(std::string_view text) {
    std::size_t digits = 0;
    std::size_t total = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = 0;
        pos += unicode::decode(text, pos, cp);
        ++total;
        if (cp >= '0' && cp <= '9') ++digits;
    }
    if (total == 0) return true;
    return digits * 2 >= total;
}

std::string normalize_language_code(std::string_view code) {
    std::string folded = lower_ascii(trim_ascii(code));
    auto it = iso639_table().find(folded);
    if (it != iso639_table().end()) return it->second;
    return folded;
}

bool is_mapped_code(std::string_view code) {
    std::string folded = lower_ascii(trim_ascii(code));
    return two_ascii_letters(folded) || iso639_table().count(folded) > 0;
}

std::vector<std::optional<Identifier::Result>> Identifier::identify_batch(
    const std::vector<std::string>& texts) const {
    std::vector<std::optional<Result>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(identify(text));
    return out;
}

std::string_view to_string(Agreement a) {
    switch (a) {
        case Agreement::Agree: return "agree";
        case Agreement::Disagree: return "disagree";
        case Agreement::Undetermined: return "undetermined";
    }
    return "undetermined";
}

Agreement judge_agreement(const std::optional<std::string>& reconciled,
                          const std::optional<Identifier::Result>& identified) {
    if (!reconciled.has_value() || !identified.has_value()) return Agreement::Undetermined;
    std::string declared = normalize_language_code(*reconciled);
    std::string detected = normalize_language_code(identified->code);
    if (declared == detected) return Agreement::Agree;
    if (is_mapped_code(*reconciled) && is_mapped_code(identified->code))
        return Agreement::Disagree;
    return Agreement::Undetermined;
}

LiteralSampler::LiteralSampler(SampleOptions options) : options_(std::move(options)) {
    if (!(options_.rate > 0.0 && options_.rate <= 1.0))
        throw std::invalid_argument("sampler: rate must be in (0, 1]");
}

bool LiteralSampler::eligible(const Term& object) {
    if (object.kind != TermKind::Literal) return false;
    if (!object.datatype.empty() && object.datatype != kXsdString) return false;
    return !is_numeric_literal(object.lexical);
}

bool LiteralSampler::selects(std::uint64_t ordinal, std::string_view literal) const {
    std::uint64_t h = 14695981039346656037ULL;
    h = fnv1a(h, &options_.seed, sizeof(options_.seed));
    h = fnv1a(h, options_.stream_label.data(), options_.stream_label.size());
    const unsigned char sep = 0xFF;
    h = fnv1a(h, &sep, 1);
    h = fnv1a(h, &ordinal, sizeof(ordinal));
    h = fnv1a(h, &sep, 1);
    h = fnv1a(h, literal.data(), literal.size());
    double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
    return unit < options_.rate;
}

std::optional<LanguageSample> LiteralSampler::consider(const nquads::Quad& quad,
                                                       const Identifier* identifier) const {
    const Term& object = quad.object;
    if (!eligible(object)) return std::nullopt;
    if (!selects(quad.ordinal, object.lexical)) return std::nullopt;
    LanguageSample sample;
    sample.literal = object.lexical;
    if (!object.language.empty()) {
        sample.declared_tag = object.language;
        std::string code = reconcile_tag(object.language);
        if (!code.empty()) sample.reconciled = std::move(code);
    }
    if (identifier != nullptr) sample.identified = identifier->identify(object.lexical);
    sample.agreement = judge_agreement(sample.reconciled, sample.identified);
    return sample;
}

std::vector<LanguageSample> sample_literals(nquads::QuadStream& stream,
                                            const SampleOptions& options,
                                            const Identifier* identifier) {
    LiteralSampler sampler(options);
    std::vector<LanguageSample> samples;
    nquads::Quad quad;
    while (stream.next(quad)) {
        if (auto sample = sampler.consider(quad, identifier)) samples.push_back(std::move(*sample));
    }
    return samples;
}

double AgreementRow::agree_share() const {
    return support() == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(support());
}

double AgreementRow::disagree_share() const {
    return support() == 0 ? 0.0 : static_cast<double>(disagree) / static_cast<double>(support());
}

std::map<std::string, AgreementRow> measure_agreement(const std::vector<LanguageSample>& samples) {
    std::map<std::string, AgreementRow> rows;
    for (const auto& sample : samples) {
        if (!sample.reconciled.has_value()) continue;
        AgreementRow& row = rows[normalize_language_code(*sample.reconciled)];
        switch (sample.agreement) {
            case Agreement::Agree: ++row.agree; break;
            case Agreement::Disagree: ++row.disagree; break;
            case Agreement::Undetermined: ++row.undetermined; break;
        }
    }
    return rows;
}

namespace {

std::string normalize_for_trigrams(std::string_view text) {
    std::string out;
    out.reserve(text.size() + 2);
    out += ' ';
    for (char ch : text) {
        if (ch == '\t' || ch == '\n' || ch == '\r') ch = ' ';
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    out += ' ';
    return out;
}

std::vector<std::pair<std::string, std::size_t>> ranked_trigrams(std::string_view normalized,
                                                                 std::size_t cap) {
    std::map<std::string, std::size_t> counts;
    if (normalized.size() >= 3) {
        for (std::size_t i = 0; i + 3 <= normalized.size(); ++i) {
            counts[std::string(normalized.substr(i, 3))] += 1;
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ordered.size() > cap) ordered.resize(cap);
    return ordered;
}

}  // namespace

TrigramIdentifier TrigramIdentifier::load_default(Options options) {
    return TrigramIdentifier(std::string(QUADKIT_DATA_DIR) + "/lang_profiles.txt", options);
}

TrigramIdentifier::TrigramIdentifier(const std::string& profile_path, Options options)
    : options_(options) {
    std::ifstream in(profile_path);
    if (!in) throw std::runtime_error("trigram identifier: cannot open " + profile_path);
    std::string line;
    std::string code;
    std::string text;
    auto flush = [&] {
        if (code.empty()) return;
        Profile profile;
        profile.code = code;
        auto ordered = ranked_trigrams(normalize_for_trigrams(text), options_.profile_size);
        for (std::size_t i = 0; i < ordered.size(); ++i) profile.rank[ordered[i].first] = i;
        profiles_.push_back(std::move(profile));
        codes_.insert(code);
    };
    while (std::getline(in, line)) {
        if (line.rfind("#lang ", 0) == 0) {
            flush();
            code = std::string(trim_ascii(std::string_view(line).substr(6)));
            text.clear();
        } else if (!line.empty() && line[0] == '#') {
            continue;
        } else {
            text += line;
            text += '\n';
        }
    }
    flush();
    if (profiles_.size() < 2)
        throw std::runtime_error("trigram identifier: profile file needs at least two languages");
}

std::optional<Identifier::Result> TrigramIdentifier::identify(std::string_view text) const {
    if (unicode::codepoint_length(text) < options_.min_text_length) return std::nullopt;
    std::string normalized = normalize_for_trigrams(text);
    std::set<std::string> grams;
    for (std::size_t i = 0; i + 3 <= normalized.size(); ++i)
        grams.insert(std::string(normalized.substr(i, 3)));
    if (grams.empty()) return std::nullopt;
    // Score each profile by coverage: the fraction of the text's distinct
    // trigrams it has never seen. Confidence is the relative margin between
    // the two closest profiles.
    double best = -1.0;
    double second = -1.0;
    const Profile* winner = nullptr;
    for (const auto& profile : profiles_) {
        std::size_t missing = 0;
        for (const auto& gram : grams)
            if (!profile.rank.count(gram)) ++missing;
        double distance = static_cast<double>(missing) / static_cast<double>(grams.size());
        if (best < 0.0 || distance < best) {
            second = best;
            best = distance;
            winner = &profile;
        } else if (second < 0.0 || distance < second) {
            second = distance;
        }
    }
    if (winner == nullptr || second <= 0.0) return std::nullopt;
    double confidence = std::clamp((second - best) / second, 0.0, 1.0);
    if (confidence < options_.confidence_floor) return std::nullopt;
    return Result{winner->code, confidence};
}

const std::set<std::string>& TrigramIdentifier::supported_codes() const { return codes_; }

OracleIdentifier OracleIdentifier::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("oracle identifier: cannot open " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    if (doc.contains("literal_languages")) doc = doc.at("literal_languages");
    if (!doc.is_object())
        throw std::runtime_error("oracle identifier: expected a JSON object of literal -> code");
    OracleIdentifier oracle;
    for (const auto& [literal, code] : doc.items())
        oracle.insert(literal, code.get<std::string>());
    return oracle;
}

void OracleIdentifier::insert(std::string literal, std::string code) {
    codes_.insert(code);
    mapping_[std::move(literal)] = std::move(code);
}

std::optional<Identifier::Result> OracleIdentifier::identify(std::string_view text) const {
    auto it = mapping_.find(text);
    if (it == mapping_.end()) return std::nullopt;
    return Result{it->second, 1.0};
}

const std::set<std::string>& OracleIdentifier::supported_codes() const { return codes_; }

namespace {

std::string escape_command_line(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        switch (ch) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += ch; break;
        }
    }
    return out;
}

std::filesystem::path fresh_temp_path(const char* tag) {
    static std::atomic<std::uint64_t> counter{0};
    std::ostringstream name;
    name << "quadkit-" << tag << "-" << ::getpid() << "-" << counter.fetch_add(1) << ".txt";
    return std::filesystem::temp_directory_path() / name.str();
}

}  // namespace

CommandIdentifier::CommandIdentifier(std::string command_line)
    : command_line_(std::move(command_line)) {
    if (command_line_.empty())
        throw std::invalid_argument("command identifier: empty command line");
}

std::optional<Identifier::Result> CommandIdentifier::identify(std::string_view text) const {
    auto results = identify_batch({std::string(text)});
    return results.at(0);
}

std::vector<std::optional<Identifier::Result>> CommandIdentifier::identify_batch(
    const std::vector<std::string>& texts) const {
    std::vector<std::optional<Result>> results(texts.size());
    if (texts.empty()) return results;
    auto in_path = fresh_temp_path("ident-in");
    auto out_path = fresh_temp_path("ident-out");
    {
        std::ofstream in_file(in_path);
        if (!in_file)
            throw std::runtime_error("command identifier: cannot write " + in_path.string());
        for (const auto& text : texts) in_file << escape_command_line(text) << '\n';
    }
    std::string command =
        command_line_ + " < " + in_path.string() + " > " + out_path.string();
    int status = std::system(command.c_str());
    std::vector<std::string> lines;
    {
        std::ifstream out_file(out_path);
        std::string line;
        while (std::getline(out_file, line)) lines.push_back(line);
    }
    std::filesystem::remove(in_path);
    std::filesystem::remove(out_path);
    if (status != 0)
        throw std::runtime_error("command identifier: '" + command_line_ +
                                 "' exited with a failure status");
    for (std::size_t i = 0; i < results.size() && i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty() || line == "-") continue;  // abstain
        std::size_t tab = line.find('\t');
        std::string code = tab == std::string::npos ? line : line.substr(0, tab);
        double confidence = 1.0;
        if (tab != std::string::npos) {
            try {
                confidence = std::stod(line.substr(tab + 1));
            } catch (const std::exception&) {
                continue;  // malformed response: treat this sample as abstained
            }
        }
        if (confidence < 0.0 || confidence > 1.0) continue;
        results[i] = Result{std::move(code), confidence};
    }
    return results;
}

const std::set<std::string>& CommandIdentifier::supported_codes() const {
    static const std::set<std::string> empty;
    return empty;
}

}  // namespace quadkit::language
