#include "quadkit/vocab.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "quadkit/urlparse.hpp"

namespace quadkit::vocab {

std::string_view to_string(Cluster c) {
    switch (c) {
        case Cluster::SchemaOrg: return "schema-org";
        case Cluster::DataVocabulary: return "data-vocabulary";
        case Cluster::Other: return "other";
    }
    return "other";
}

std::string_view to_string(Variation v) {
    switch (v) {
        case Variation::Base: return "base";
        case Variation::SubdomainVariant: return "subdomain-variant";
        case Variation::SldMisspelling: return "sld-misspelling";
        case Variation::TldMisspelling: return "tld-misspelling";
        case Variation::NotApplicable: return "not-applicable";
    }
    return "not-applicable";
}

namespace {

std::vector<std::string> host_labels(std::string_view host) {
    std::vector<std::string> labels;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = host.find('.', start);
        if (dot == std::string_view::npos) {
            labels.emplace_back(host.substr(start));
            break;
        }
        labels.emplace_back(host.substr(start, dot - start));
        start = dot + 1;
    }
    return labels;
}

std::string join_labels(const std::vector<std::string>& labels, std::size_t first,
                        std::size_t last) {
    std::string out;
    for (std::size_t i = first; i < last; ++i) {
        if (i > first) out += '.';
        out += labels[i];
    }
    return out;
}

}  // namespace

std::optional<HostParts> split_host(std::string_view uri) {
    urls::UrlParts parts;
    if (!urls::split_url(uri, parts)) return std::nullopt;
    std::string host = urls::lower_ascii(parts.host);
    auto labels = host_labels(host);
    HostParts out;
    out.scheme = std::string(parts.scheme);
    out.path = std::string(parts.rest);
    out.top_level = labels.back();
    if (labels.size() >= 2) out.second_level = labels[labels.size() - 2];
    if (labels.size() >= 3) out.subdomain = join_labels(labels, 0, labels.size() - 2);
    return out;
}

double normalized_levenshtein(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 0.0;
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::size_t> prev(m + 1);
    std::vector<std::size_t> cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t best = std::min(prev[j], cur[j - 1]) + 1;
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min(best, sub);
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

std::vector<ClusterSpec> default_cluster_specs() {
    // "www" counts as the base form for schema.org but as a subdomain variant
    // for data-vocabulary.org.
    return {
        {Cluster::SchemaOrg, "schema", "schema.org", {"", "www"}},
        {Cluster::DataVocabulary, "data-vocabulary", "data-vocabulary.org", {""}},
    };
}

VocabNormalizer::VocabNormalizer(Options options) : options_(std::move(options)) {}

VocabNormalizer::HostVerdict VocabNormalizer::compute_host(const std::string& host) const {
    auto labels = host_labels(host);

    struct ExactHit {
        const ClusterSpec* spec;
        std::size_t pos;     // index of the exact cluster label within the host
        bool suffix_is_org;  // exactly one label follows and it is "org"
        std::string prefix;  // dotted labels before the match
    };
    std::vector<ExactHit> hits;
    for (const auto& spec : options_.clusters) {
        for (std::size_t i = labels.size(); i-- > 0;) {
            if (labels[i] != spec.label) continue;
            ExactHit hit;
            hit.spec = &spec;
            hit.pos = i;
            hit.suffix_is_org = (i + 2 == labels.size() && labels[i + 1] == "org");
            hit.prefix = join_labels(labels, 0, i);
            hits.push_back(std::move(hit));
            break;  // rightmost occurrence only
        }
    }

    for (const auto& hit : hits) {
        if (hit.suffix_is_org && hit.spec->base_prefixes.count(hit.prefix))
            return {hit.spec->id, Variation::Base, 0.0, hit.spec->base_host};
    }
    for (const auto& hit : hits) {
        if (hit.suffix_is_org)
            return {hit.spec->id, Variation::SubdomainVariant, 0.0, hit.spec->base_host};
    }
    if (labels.size() >= 2 && labels.back() == "org") {
        const std::string& sld = labels[labels.size() - 2];
        const ClusterSpec* best = nullptr;
        double best_distance = 2.0;
        for (const auto& spec : options_.clusters) {
            double d = normalized_levenshtein(sld, spec.label);
            if (d < best_distance) {
                best_distance = d;
                best = &spec;
            }
        }
        if (best != nullptr && best_distance <= options_.threshold)
            return {best->id, Variation::SldMisspelling, best_distance, best->base_host};
    }
    // A correctly spelled cluster label followed by anything other than plain
    // "org" (missing, wrong, or extended trailing labels). When both cluster
    // labels occur, the one nearer the end of the host wins.
    const ExactHit* tld_pick = nullptr;
    for (const auto& hit : hits) {
        if (tld_pick == nullptr || hit.pos > tld_pick->pos) tld_pick = &hit;
    }
    if (tld_pick != nullptr)
        return {tld_pick->spec->id, Variation::TldMisspelling, 0.0, tld_pick->spec->base_host};
    return {};
}

VocabNormalizer::HostVerdict VocabNormalizer::classify_host(const std::string& host) const {
    {
        std::shared_lock lock(mutex_);
        auto it = cache_.find(host);
        if (it != cache_.end()) return it->second;
    }
    HostVerdict verdict = compute_host(host);
    std::unique_lock lock(mutex_);
    return cache_.emplace(host, std::move(verdict)).first->second;
}

ConceptClassification VocabNormalizer::classify(std::string_view uri) const {
    urls::UrlParts parts;
    ConceptClassification out;
    if (!urls::split_url(uri, parts)) {
        out.parse_failed = true;
        return out;
    }
    HostVerdict verdict = classify_host(urls::lower_ascii(parts.host));
    out.cluster = verdict.cluster;
    out.variation = verdict.variation;
    out.distance = verdict.distance;
    if (verdict.cluster != Cluster::Other) {
        std::string canonical;
        canonical.reserve(uri.size());
        canonical.append(parts.scheme);
        canonical += "://";
        canonical += verdict.canonical_host;
        if (!parts.port.empty()) {
            canonical += ':';
            canonical.append(parts.port);
        }
        canonical.append(parts.rest);
        out.canonical_uri = std::move(canonical);
    }
    return out;
}

void VocabNormalizer::export_csv(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    out << "variant_host,cluster,variation,canonical_host\n";
    for (const auto& [host, verdict] : cache_) {
        out << host << ',' << to_string(verdict.cluster) << ',' << to_string(verdict.variation)
            << ',' << verdict.canonical_host << '\n';
    }
}

DbscanResult dbscan_string_clusters(std::vector<std::string> strings, double eps,
                                    std::size_t min_pts) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("dbscan: eps must be in (0, 1]");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be at least 1");
    std::sort(strings.begin(), strings.end());
    strings.erase(std::unique(strings.begin(), strings.end()), strings.end());
    const std::size_t n = strings.size();

    auto neighbors = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j) {
            if (normalized_levenshtein(strings[i], strings[j]) <= eps) out.push_back(j);
        }
        return out;
    };

    constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
    constexpr std::size_t kNoise = static_cast<std::size_t>(-2);
    std::vector<std::size_t> label(n, kUnvisited);
    DbscanResult result;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        auto seeds = neighbors(i);
        if (seeds.size() < min_pts) {
            label[i] = kNoise;
            continue;
        }
        const std::size_t cid = result.clusters.size();
        result.clusters.emplace_back();
        label[i] = cid;
        std::deque<std::size_t> queue(seeds.begin(), seeds.end());
        while (!queue.empty()) {
            std::size_t j = queue.front();
            queue.pop_front();
            if (label[j] == kNoise) label[j] = cid;  // border point
            if (label[j] != kUnvisited) continue;
            label[j] = cid;
            auto reach = neighbors(j);
            if (reach.size() >= min_pts) queue.insert(queue.end(), reach.begin(), reach.end());
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == kNoise) {
            result.noise.push_back(strings[i]);
        } else {
            result.clusters[label[i]].push_back(strings[i]);
        }
    }
    // Assignment above walks indices in sorted order, so members are sorted already.
    return result;
}

}  // namespace quadkit::vocab
