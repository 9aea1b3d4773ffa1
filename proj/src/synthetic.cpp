#include "quadkit/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "json.hpp"
#include "quadkit/nquads.hpp"

namespace quadkit::synthetic {

namespace {

using nquads::Quad;
using nquads::Term;
using OrderedJson = nlohmann::ordered_json;

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : next() % bound; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i)
            std::swap(items[i - 1], items[below(i)]);
    }

  private:
    std::uint64_t state_;
};

// Exact apportionment of `total` across weights: floor shares first, then the
// largest fractional remainders (ties to the lower index) receive one more.
std::vector<std::uint64_t> largest_remainder(std::uint64_t total,
                                             const std::vector<double>& weights) {
    double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::uint64_t> out(weights.size(), 0);
    if (sum <= 0.0 || weights.empty()) return out;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double exact = static_cast<double>(total) * weights[i] / sum;
        out[i] = static_cast<std::uint64_t>(std::floor(exact));
        assigned += out[i];
        remainders.push_back({exact - std::floor(exact), i});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) out[remainders[i].second] += 1;
    return out;
}

struct Fraction {
    std::uint64_t num;
    std::uint64_t den;
};

Fraction reduce_rate(double rate) {
    auto num = static_cast<std::uint64_t>(std::llround(rate * 10000.0));
    std::uint64_t den = 10000;
    std::uint64_t g = std::gcd(num == 0 ? den : num, den);
    return {num / g, den / g};
}

const std::map<std::string, std::string>& word_table() {
    static const std::map<std::string, std::string> kWords = {
        {"en", "fine quality woven basket"},
        {"de", "feiner geflochtener korb aus stroh"},
        {"fr", "panier tissé de belle qualité"},
        {"it", "cestino intrecciato di qualità"},
        {"es", "cesta tejida de calidad fina"},
        {"pt", "cesta trançada de boa qualidade"},
        {"nl", "fijn geweven mand van riet"},
        {"sv", "fin flätad korg av halm"},
        {"pl", "dobrze pleciony koszyk ze słomy"},
        {"cs", "jemně pletený košík ze slámy"},
        {"da", "fin flettet kurv af strå"},
        {"fi", "hieno punottu kori oljesta"},
    };
    return kWords;
}

std::string letters(Rng& rng, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i)
        out += static_cast<char>('a' + static_cast<char>(rng.below(26)));
    return out;
}

struct NodePlan {
    std::uint64_t id = 0;
    bool valid = true;
    std::string true_lang;
    std::optional<std::string> declared_tag;
    int variant = 0;  // 0 base, 1 subdomain, 2 sld misspelling, 3 tld misspelling
    std::uint64_t pld_index = 0;
    std::uint64_t spread = 5;
    std::string suffix;
};

const char* type_uri(int variant) {
    switch (variant) {
        case 1: return "http://product.schema.org/Product";
        case 2: return "http://scheme.org/Product";
        case 3: return "http://schema.ofg/Product";
        default: return "http://schema.org/Product";
    }
}

const char* variation_name(int variant) {
    switch (variant) {
        case 1: return "subdomain-variant";
        case 2: return "sld-misspelling";
        case 3: return "tld-misspelling";
        default: return "base";
    }
}

std::vector<Quad> node_quads(const NodePlan& node, const std::string& pld_host) {
    const std::string subject = "http://catalog.example/item/" + node.suffix;
    const std::string page = "http://www." + pld_host + "/p/" + node.suffix;
    const std::string desc_text =
        word_table().at(node.true_lang) + " item code " + node.suffix;

    Term subject_term = Term::iri(subject);
    Term graph = Term::iri(page);
    auto quad = [&](const char* predicate, Term object) {
        Quad q;
        q.subject = subject_term;
        q.predicate = Term::iri(predicate);
        q.object = std::move(object);
        q.graph = graph;
        return q;
    };

    Term desc = Term::literal(desc_text, node.declared_tag.value_or(""));
    std::vector<Quad> quads;
    quads.push_back(quad("http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
                         Term::iri(type_uri(node.variant))));
    if (node.valid) {
        quads.push_back(quad("http://schema.org/name",
                             Term::literal("Product " + node.suffix)));
        quads.push_back(quad("http://schema.org/description", std::move(desc)));
        quads.push_back(quad("http://schema.org/image",
                             Term::iri("http://img.catalog.example/" + node.suffix + ".jpg")));
        quads.push_back(quad("http://schema.org/sku", Term::literal("SKU-" + node.suffix)));
        quads.push_back(quad("http://schema.org/offers",
                             Term::blank("offer" + std::to_string(node.id))));
    } else {
        quads.push_back(quad("http://schema.org/name", Term::literal("null")));
        quads.push_back(quad("http://schema.org/description", std::move(desc)));
        quads.push_back(quad("http://schema.org/price", Term::literal("19.99")));
        quads.push_back(quad("http://schema.org/image",
                             Term::iri("http://img.catalog.example/" + node.suffix + ".jpg")));
        quads.push_back(quad("http://schema.org/sku", Term::literal("SKU-" + node.suffix)));
    }
    return quads;
}

}  // namespace

void validate(const SyntheticSpec& spec) {
    if (spec.node_count < 1) throw std::invalid_argument("synthetic: node_count must be >= 1");
    for (double rate : {spec.validity_rate, spec.tag_rate, spec.tag_correctness_rate,
                        spec.variant_rate}) {
        if (rate < 0.0 || rate > 1.0)
            throw std::invalid_argument("synthetic: rates must lie in [0, 1]");
    }
    if (spec.spread_distribution.empty())
        throw std::invalid_argument("synthetic: spread distribution must not be empty");
    double share_sum = 0.0;
    for (const auto& [spread, share] : spec.spread_distribution) {
        if (spread < 5 || spread % 5 != 0)
            throw std::invalid_argument(
                "synthetic: spreads must be positive multiples of 5 (six statements per node)");
        if (share < 0.0) throw std::invalid_argument("synthetic: spread shares must be >= 0");
        share_sum += share;
    }
    if (share_sum <= 0.0)
        throw std::invalid_argument("synthetic: spread shares must sum to a positive value");
    if (spec.languages.empty())
        throw std::invalid_argument("synthetic: at least one language is required");
    for (const auto& code : spec.languages) {
        if (word_table().find(code) == word_table().end())
            throw std::invalid_argument("synthetic: no word list for language: " + code);
    }
    if (spec.tag_correctness_rate < 1.0 && spec.languages.size() < 2)
        throw std::invalid_argument(
            "synthetic: incorrect tags need at least two languages to draw from");
    if (spec.pld_count < 1 || spec.pld_count > 10000)
        throw std::invalid_argument("synthetic: pld_count must be in [1, 10000]");
}

SyntheticCorpus generate(const SyntheticSpec& spec) {
    validate(spec);
    const std::uint64_t n = spec.node_count;
    const std::size_t lang_count = spec.languages.size();

    std::vector<NodePlan> nodes(n);
    {
        Rng rng(spec.seed ^ 0x5eedba5eULL);
        for (std::uint64_t i = 0; i < n; ++i) {
            nodes[i].id = i;
            nodes[i].suffix = letters(rng, 8) + "-" + std::to_string(i);
        }
    }

    // Validity: an exact quota of nodes is built to pass the node check.
    const auto valid_quota =
        static_cast<std::uint64_t>(std::llround(spec.validity_rate * static_cast<double>(n)));
    {
        std::vector<std::uint64_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(spec.seed ^ 0x7a11d17eULL);
        rng.shuffle(perm);
        for (std::uint64_t i = 0; i < n; ++i) nodes[perm[i]].valid = i < valid_quota;
    }

    // Language plan, grouped by declared code so each code's agree share is an
    // exact fraction. Tag quotas round down to a multiple of the correctness
    // rate's denominator.
    struct LangPlan {
        std::string true_lang;
        std::optional<std::string> declared;
    };
    std::map<std::string, std::array<std::uint64_t, 3>> tag_truth;  // tagged, agree, disagree
    std::map<std::string, std::uint64_t> nodes_per_language;
    {
        Fraction correctness = reduce_rate(spec.tag_correctness_rate);
        std::vector<double> even(lang_count, 1.0);
        std::vector<std::uint64_t> per_language = largest_remainder(n, even);
        std::vector<LangPlan> plan;
        plan.reserve(n);
        for (std::size_t c = 0; c < lang_count; ++c) {
            const std::string& code = spec.languages[c];
            const std::string& other = spec.languages[(c + 1) % lang_count];
            std::uint64_t s = per_language[c];
            nodes_per_language[code] = s;
            auto tag_target = static_cast<std::uint64_t>(
                std::llround(spec.tag_rate * static_cast<double>(s)));
            std::uint64_t tagged = (tag_target / correctness.den) * correctness.den;
            std::uint64_t agree = tagged / correctness.den * correctness.num;
            std::uint64_t disagree = tagged - agree;
            tag_truth[code] = {tagged, agree, disagree};
            for (std::uint64_t i = 0; i < agree; ++i) plan.push_back({code, code});
            for (std::uint64_t i = 0; i < disagree; ++i) plan.push_back({other, code});
            for (std::uint64_t i = 0; i < s - tagged; ++i) plan.push_back({code, std::nullopt});
        }
        Rng rng(spec.seed ^ 0x1a9c0defULL);
        rng.shuffle(plan);
        for (std::uint64_t i = 0; i < n; ++i) {
            nodes[i].true_lang = plan[i].true_lang;
            nodes[i].declared_tag = plan[i].declared;
        }
    }

    // Variant typing: the quota of variant-typed nodes splits evenly across
    // the three variation dimensions.
    std::map<std::string, std::uint64_t> variation_counts;
    {
        auto variant_quota = static_cast<std::uint64_t>(
            std::llround(spec.variant_rate * static_cast<double>(n)));
        std::vector<std::uint64_t> split = largest_remainder(variant_quota, {1.0, 1.0, 1.0});
        std::vector<int> assignment;
        assignment.reserve(n);
        for (int v = 1; v <= 3; ++v)
            assignment.insert(assignment.end(), split[static_cast<std::size_t>(v - 1)], v);
        assignment.insert(assignment.end(), n - variant_quota, 0);
        Rng rng(spec.seed ^ 0xfa7eULL);
        rng.shuffle(assignment);
        for (std::uint64_t i = 0; i < n; ++i) nodes[i].variant = assignment[i];
        variation_counts["base"] = n - variant_quota;
        for (int v = 1; v <= 3; ++v)
            variation_counts[variation_name(v)] = split[static_cast<std::size_t>(v - 1)];
    }

    // Page domains: exact quota per pay-level domain.
    std::vector<std::string> pld_hosts;
    std::map<std::string, std::uint64_t> pld_counts;
    {
        for (std::uint64_t k = 0; k < spec.pld_count; ++k)
            pld_hosts.push_back("store" + std::to_string(k) + "-mart.com");
        std::vector<double> even(spec.pld_count, 1.0);
        std::vector<std::uint64_t> per_pld = largest_remainder(n, even);
        std::vector<std::uint64_t> assignment;
        assignment.reserve(n);
        for (std::uint64_t k = 0; k < spec.pld_count; ++k) {
            assignment.insert(assignment.end(), per_pld[k], k);
            pld_counts[pld_hosts[k]] = per_pld[k];
        }
        Rng rng(spec.seed ^ 0x91d5ULL);
        rng.shuffle(assignment);
        for (std::uint64_t i = 0; i < n; ++i) nodes[i].pld_index = assignment[i];
    }

    // Spread scheduling: nodes with spread 5k are laid out round-robin in
    // blocks of k, so each block member's first and last lines are exactly 5k
    // apart. Quota remainders that cannot fill a whole block fall back to
    // contiguous layout (spread 5).
    std::vector<std::vector<std::uint64_t>> blocks;
    std::map<std::uint64_t, std::uint64_t> spread_counts;
    {
        std::vector<std::uint64_t> spreads;
        std::vector<double> shares;
        for (const auto& [spread, share] : spec.spread_distribution) {
            spreads.push_back(spread);
            shares.push_back(share);
        }
        std::vector<std::uint64_t> quota = largest_remainder(n, shares);

        std::vector<std::uint64_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(spec.seed ^ 0xb10c5ULL);
        rng.shuffle(order);

        std::size_t cursor = 0;
        std::vector<std::uint64_t> leftovers;
        for (std::size_t s = 0; s < spreads.size(); ++s) {
            std::uint64_t k = spreads[s] / 5;
            std::uint64_t whole_blocks = quota[s] / k;
            for (std::uint64_t b = 0; b < whole_blocks; ++b) {
                std::vector<std::uint64_t> block;
                for (std::uint64_t j = 0; j < k; ++j) block.push_back(order[cursor++]);
                for (std::uint64_t id : block) {
                    nodes[id].spread = spreads[s];
                    spread_counts[spreads[s]] += 1;
                }
                blocks.push_back(std::move(block));
            }
            std::uint64_t spare = quota[s] - whole_blocks * k;
            for (std::uint64_t j = 0; j < spare; ++j) leftovers.push_back(order[cursor++]);
        }
        for (std::uint64_t id : leftovers) {
            nodes[id].spread = 5;
            spread_counts[5] += 1;
            blocks.push_back({id});
        }
        rng.shuffle(blocks);
    }

    // Emit: rows of each block interleave its members.
    std::string quads_text;
    std::map<std::string, std::string> literal_languages;
    std::map<std::string, std::uint64_t> tag_distribution;
    for (const auto& block : blocks) {
        std::vector<std::vector<Quad>> member_quads;
        for (std::uint64_t id : block)
            member_quads.push_back(node_quads(nodes[id], pld_hosts[nodes[id].pld_index]));
        for (std::size_t row = 0; row < 6; ++row) {
            for (std::size_t j = 0; j < block.size(); ++j) {
                nquads::append_quad(quads_text, member_quads[j][row]);
                quads_text += '\n';
            }
        }
        for (std::uint64_t id : block) {
            const NodePlan& node = nodes[id];
            literal_languages[word_table().at(node.true_lang) + " item code " + node.suffix] =
                node.true_lang;
            if (node.declared_tag.has_value()) tag_distribution[*node.declared_tag] += 1;
        }
    }

    OrderedJson truth;
    truth["seed"] = spec.seed;
    truth["node_count"] = n;
    truth["quad_count"] = n * 6;
    truth["validity"] = OrderedJson{{"valid", valid_quota}, {"invalid", n - valid_quota}};
    {
        OrderedJson spreads = OrderedJson::object();
        for (const auto& [spread, count] : spread_counts)
            spreads[std::to_string(spread)] = count;
        truth["spreads"] = spreads;
    }
    {
        OrderedJson languages = OrderedJson::object();
        for (const auto& code : spec.languages) {
            const auto& t = tag_truth[code];
            OrderedJson row;
            row["nodes"] = nodes_per_language[code];
            row["tagged"] = t[0];
            row["agree"] = t[1];
            row["disagree"] = t[2];
            languages[code] = row;
        }
        truth["languages"] = languages;
    }
    {
        OrderedJson tags = OrderedJson::object();
        for (const auto& [code, count] : tag_distribution) tags[code] = count;
        truth["tag_distribution"] = tags;
    }
    {
        OrderedJson variations = OrderedJson::object();
        for (const auto& [name, count] : variation_counts) variations[name] = count;
        truth["variations"] = variations;
    }
    {
        OrderedJson plds = OrderedJson::object();
        for (const auto& [host, count] : pld_counts) plds[host] = count;
        truth["plds"] = plds;
    }
    {
        OrderedJson rows = OrderedJson::array();
        std::vector<const NodePlan*> ordered;
        for (const auto& node : nodes) ordered.push_back(&node);
        std::sort(ordered.begin(), ordered.end(),
                  [](const NodePlan* a, const NodePlan* b) { return a->id < b->id; });
        for (const NodePlan* node : ordered) {
            OrderedJson row;
            row["subject"] = "http://catalog.example/item/" + node->suffix;
            row["valid"] = node->valid;
            row["spread"] = node->spread;
            row["language"] = node->true_lang;
            row["declared"] = node->declared_tag.has_value() ? OrderedJson(*node->declared_tag)
                                                             : OrderedJson(nullptr);
            rows.push_back(row);
        }
        truth["nodes"] = rows;
    }
    {
        OrderedJson map = OrderedJson::object();
        for (const auto& [literal, code] : literal_languages) map[literal] = code;
        truth["literal_languages"] = map;
    }

    SyntheticCorpus corpus;
    corpus.quads = std::move(quads_text);
    corpus.truth_json = truth.dump(2) + "\n";
    return corpus;
}

}  // namespace quadkit::synthetic
