#include "quadkit/stats.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace quadkit::stats {

namespace {

constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

using OrderedJson = nlohmann::ordered_json;

vocab::Cluster cluster_from(const std::string& text) {
    if (text == "schema-org") return vocab::Cluster::SchemaOrg;
    if (text == "data-vocabulary") return vocab::Cluster::DataVocabulary;
    if (text == "other") return vocab::Cluster::Other;
    throw std::runtime_error("report: unknown cluster name: " + text);
}

vocab::Variation variation_from(const std::string& text) {
    using vocab::Variation;
    for (Variation v : {Variation::Base, Variation::SubdomainVariant, Variation::SldMisspelling,
                        Variation::TldMisspelling, Variation::NotApplicable}) {
        if (text == vocab::to_string(v)) return v;
    }
    throw std::runtime_error("report: unknown variation name: " + text);
}

validity::PropertyKey property_from(const std::string& text) {
    using validity::PropertyKey;
    for (PropertyKey key :
         {PropertyKey::Name, PropertyKey::Description, PropertyKey::Image, PropertyKey::Url,
          PropertyKey::Offers, PropertyKey::Brand, PropertyKey::Sku, PropertyKey::ProductId,
          PropertyKey::AggregateRating, PropertyKey::Price, PropertyKey::Unvalidated}) {
        if (text == validity::to_string(key)) return key;
    }
    throw std::runtime_error("report: unknown property name: " + text);
}

std::string share_of(std::uint64_t part, std::uint64_t whole) {
    return fixed4(whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole));
}

std::vector<std::pair<std::string, std::uint64_t>> by_count_desc(
    const std::map<std::string, std::uint64_t>& counts) {
    std::vector<std::pair<std::string, std::uint64_t>> rows(counts.begin(), counts.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return rows;
}

}  // namespace

std::string fixed4(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4f", value);
    return buffer;
}

void ProfileStats::merge(const ProfileStats& other) {
    quad_count += other.quad_count;
    for (const auto& [key, count] : other.entity_class_counts) entity_class_counts[key] += count;
    for (const auto& [key, count] : other.variation_counts) variation_counts[key] += count;
    for (const auto& [key, count] : other.property_frequency) property_frequency[key] += count;
    for (const auto& [key, counts] : other.validity_shares) {
        ValidityCounts& mine = validity_shares[key];
        mine.valid += counts.valid;
        mine.invalid += counts.invalid;
        mine.unvalidatable += counts.unvalidatable;
    }
    node_validity.valid += other.node_validity.valid;
    node_validity.invalid += other.node_validity.invalid;
    node_validity.unvalidatable += other.node_validity.unvalidatable;
    for (const auto& [code, count] : other.language_distribution)
        language_distribution[code] += count;
    for (const auto& [code, row] : other.agreement) {
        language::AgreementRow& mine = agreement[code];
        mine.agree += row.agree;
        mine.disagree += row.disagree;
        mine.undetermined += row.undetermined;
    }
    for (const auto& [pld, count] : other.pld_counts) pld_counts[pld] += count;
    window_histogram.merge(other.window_histogram);
}

ProfileStats merge(ProfileStats a, const ProfileStats& b) {
    a.merge(b);
    return a;
}

void fold_quad(ProfileStats& stats, const nquads::Quad& quad) {
    ++stats.quad_count;
    const nquads::Term& object = quad.object;
    if (object.is_literal() && !object.language.empty()) {
        std::string code =
            language::normalize_language_code(language::reconcile_tag(object.language));
        if (!code.empty()) ++stats.language_distribution[code];
    }
}

void fold_record(ProfileStats& stats, const validity::ProductRecord& record,
                 const vocab::VocabNormalizer& normalizer) {
    std::set<std::string> classes;
    std::set<std::pair<vocab::Cluster, vocab::Variation>> variations;
    for (const auto& quad : record.quads) {
        if (quad.predicate.lexical != kRdfType || !quad.object.is_iri()) continue;
        vocab::ConceptClassification c = normalizer.classify(quad.object.lexical);
        classes.insert(c.canonical_uri.value_or(quad.object.lexical));
        variations.insert({c.cluster, c.variation});
    }
    for (const auto& name : classes) ++stats.entity_class_counts[name];
    for (const auto& variation : variations) ++stats.variation_counts[variation];

    std::set<validity::PropertyKey> keys;
    for (const auto& entry : record.properties) {
        if (entry.key == validity::PropertyKey::Unvalidated) continue;
        keys.insert(entry.key);
        ValidityCounts& counts = stats.validity_shares[entry.key];
        switch (entry.verdict.status) {
            case validity::Status::Valid: ++counts.valid; break;
            case validity::Status::Invalid: ++counts.invalid; break;
            case validity::Status::Unvalidatable: ++counts.unvalidatable; break;
        }
    }
    for (validity::PropertyKey key : keys) ++stats.property_frequency[key];

    if (record.node_valid) {
        ++stats.node_validity.valid;
    } else {
        ++stats.node_validity.invalid;
    }
    ++stats.pld_counts[record.pay_level_domain];
}

void fold_sample(ProfileStats& stats, const language::LanguageSample& sample) {
    if (!sample.reconciled.has_value()) return;
    language::AgreementRow& row =
        stats.agreement[language::normalize_language_code(*sample.reconciled)];
    switch (sample.agreement) {
        case language::Agreement::Agree: ++row.agree; break;
        case language::Agreement::Disagree: ++row.disagree; break;
        case language::Agreement::Undetermined: ++row.undetermined; break;
    }
}

std::int64_t Provenance::timestamp() const {
    std::int64_t latest = 0;
    for (const auto& input : inputs) latest = std::max(latest, input.mtime);
    return latest;
}

namespace {

OrderedJson render_json_doc(const Report& report) {
    const ProfileStats& s = report.stats;
    OrderedJson doc;

    OrderedJson provenance;
    provenance["tool_version"] = report.provenance.tool_version;
    provenance["config_digest"] = report.provenance.config_digest;
    provenance["timestamp"] = report.provenance.timestamp();
    OrderedJson inputs = OrderedJson::array();
    for (const auto& input : report.provenance.inputs) {
        OrderedJson row;
        row["path"] = input.path;
        row["mtime"] = input.mtime;
        inputs.push_back(row);
    }
    provenance["inputs"] = inputs;
    doc["provenance"] = provenance;

    doc["quads"] = OrderedJson{{"count", s.quad_count}};

    {
        std::uint64_t total = 0;
        for (const auto& [name, count] : s.entity_class_counts) total += count;
        OrderedJson rows = OrderedJson::array();
        for (const auto& [name, count] : by_count_desc(s.entity_class_counts)) {
            OrderedJson row;
            row["class"] = name;
            row["count"] = count;
            row["share"] = share_of(count, total);
            rows.push_back(row);
        }
        OrderedJson top5 = OrderedJson::array();
        for (std::size_t i = 0; i < rows.size() && i < 5; ++i) top5.push_back(rows[i]);
        doc["entity_classes"] = OrderedJson{{"total", total}, {"top5", top5}, {"rows", rows}};
    }

    {
        std::uint64_t total = 0;
        for (const auto& [key, count] : s.variation_counts) total += count;
        OrderedJson rows = OrderedJson::array();
        for (const auto& [key, count] : s.variation_counts) {
            OrderedJson row;
            row["cluster"] = std::string(vocab::to_string(key.first));
            row["variation"] = std::string(vocab::to_string(key.second));
            row["count"] = count;
            row["share"] = share_of(count, total);
            rows.push_back(row);
        }
        doc["variations"] = OrderedJson{{"total", total}, {"rows", rows}};
    }

    {
        OrderedJson rows = OrderedJson::array();
        std::set<validity::PropertyKey> keys;
        for (const auto& [key, count] : s.property_frequency) keys.insert(key);
        for (const auto& [key, counts] : s.validity_shares) keys.insert(key);
        for (validity::PropertyKey key : keys) {
            ValidityCounts counts;
            if (auto it = s.validity_shares.find(key); it != s.validity_shares.end())
                counts = it->second;
            std::uint64_t nodes = 0;
            if (auto it = s.property_frequency.find(key); it != s.property_frequency.end())
                nodes = it->second;
            std::uint64_t entries = counts.valid + counts.invalid + counts.unvalidatable;
            OrderedJson row;
            row["property"] = std::string(validity::to_string(key));
            row["nodes"] = nodes;
            row["valid"] = counts.valid;
            row["invalid"] = counts.invalid;
            row["unvalidatable"] = counts.unvalidatable;
            row["valid_share"] = share_of(counts.valid, entries);
            rows.push_back(row);
        }
        doc["properties"] = OrderedJson{{"rows", rows}};
    }

    {
        std::uint64_t nodes = s.node_validity.valid + s.node_validity.invalid;
        OrderedJson node_validity;
        node_validity["valid"] = s.node_validity.valid;
        node_validity["invalid"] = s.node_validity.invalid;
        node_validity["valid_share"] = share_of(s.node_validity.valid, nodes);
        doc["node_validity"] = node_validity;
    }

    {
        std::uint64_t total = 0;
        for (const auto& [code, count] : s.language_distribution) total += count;
        OrderedJson rows = OrderedJson::array();
        for (const auto& [code, count] : s.language_distribution) {
            OrderedJson row;
            row["code"] = code;
            row["literals"] = count;
            row["share"] = share_of(count, total);
            rows.push_back(row);
        }
        doc["languages"] = OrderedJson{{"total", total}, {"rows", rows}};
    }

    {
        OrderedJson rows = OrderedJson::array();
        for (const auto& [code, row] : s.agreement) {
            OrderedJson entry;
            entry["code"] = code;
            entry["agree"] = row.agree;
            entry["disagree"] = row.disagree;
            entry["undetermined"] = row.undetermined;
            entry["support"] = row.support();
            entry["agree_share"] = fixed4(row.agree_share());
            entry["disagree_share"] = fixed4(row.disagree_share());
            rows.push_back(entry);
        }
        doc["agreement"] = OrderedJson{{"rows", rows}};
    }

    {
        OrderedJson rows = OrderedJson::array();
        for (const auto& [pld, count] : by_count_desc(s.pld_counts)) {
            OrderedJson row;
            row["pld"] = pld;
            row["nodes"] = count;
            rows.push_back(row);
        }
        doc["domains"] = OrderedJson{{"distinct", s.pld_counts.size()}, {"rows", rows}};
    }

    {
        const locality::WindowStats& w = s.window_histogram;
        OrderedJson windows;
        windows["total_nodes"] = w.total_nodes;
        auto mean = w.mean();
        windows["mean"] = mean.has_value() ? OrderedJson(fixed4(*mean)) : OrderedJson(nullptr);
        constexpr std::array<std::pair<const char*, double>, 3> kPercentiles = {
            {{"p50", 50.0}, {"p90", 90.0}, {"p99", 99.0}}};
        for (const auto& [label, p] : kPercentiles) {
            auto value = w.percentile(p);
            windows[label] = value.has_value() ? OrderedJson(*value) : OrderedJson(nullptr);
        }
        // How much of the stream a p99-sized window would capture; derived
        // here so the accumulator itself stays a pure counter.
        if (auto p99 = w.percentile(99.0); p99.has_value()) {
            OrderedJson complete;
            complete["window"] = *p99;
            complete["nodes"] = w.complete_nodes(*p99);
            complete["rate"] = fixed4(*w.complete_rate(*p99));
            windows["complete_at_p99"] = complete;
        } else {
            windows["complete_at_p99"] = OrderedJson(nullptr);
        }
        OrderedJson histogram = OrderedJson::object();
        for (const auto& [window, count] : w.histogram)
            histogram[std::to_string(window)] = count;
        windows["histogram"] = histogram;
        doc["windows"] = windows;
    }

    return doc;
}

std::string render_tsv(const Report& report) {
    const ProfileStats& s = report.stats;
    std::string out;
    auto line = [&out](std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& cell : cells) {
            if (!first) out += '\t';
            out += cell;
            first = false;
        }
        out += '\n';
    };
    auto n = [](std::uint64_t value) { return std::to_string(value); };

    line({"# provenance"});
    line({"tool_version", report.provenance.tool_version});
    line({"config_digest", report.provenance.config_digest});
    line({"timestamp", std::to_string(report.provenance.timestamp())});
    for (const auto& input : report.provenance.inputs)
        line({"input", input.path, std::to_string(input.mtime)});
    out += '\n';

    line({"# quads"});
    line({"count", n(s.quad_count)});
    out += '\n';

    std::uint64_t class_total = 0;
    for (const auto& [name, count] : s.entity_class_counts) class_total += count;
    auto class_rows = by_count_desc(s.entity_class_counts);
    line({"# entity_classes_top5"});
    line({"class", "count", "share"});
    for (std::size_t i = 0; i < class_rows.size() && i < 5; ++i)
        line({class_rows[i].first, n(class_rows[i].second),
              share_of(class_rows[i].second, class_total)});
    out += '\n';
    line({"# entity_classes"});
    line({"class", "count", "share"});
    for (const auto& [name, count] : class_rows)
        line({name, n(count), share_of(count, class_total)});
    out += '\n';

    std::uint64_t variation_total = 0;
    for (const auto& [key, count] : s.variation_counts) variation_total += count;
    line({"# variations"});
    line({"cluster", "variation", "count", "share"});
    for (const auto& [key, count] : s.variation_counts)
        line({std::string(vocab::to_string(key.first)), std::string(vocab::to_string(key.second)),
              n(count), share_of(count, variation_total)});
    out += '\n';

    line({"# properties"});
    line({"property", "nodes", "valid", "invalid", "unvalidatable", "valid_share"});
    {
        std::set<validity::PropertyKey> keys;
        for (const auto& [key, count] : s.property_frequency) keys.insert(key);
        for (const auto& [key, counts] : s.validity_shares) keys.insert(key);
        for (validity::PropertyKey key : keys) {
            ValidityCounts counts;
            if (auto it = s.validity_shares.find(key); it != s.validity_shares.end())
                counts = it->second;
            std::uint64_t nodes = 0;
            if (auto it = s.property_frequency.find(key); it != s.property_frequency.end())
                nodes = it->second;
            std::uint64_t entries = counts.valid + counts.invalid + counts.unvalidatable;
            line({std::string(validity::to_string(key)), n(nodes), n(counts.valid),
                  n(counts.invalid), n(counts.unvalidatable), share_of(counts.valid, entries)});
        }
    }
    out += '\n';

    line({"# node_validity"});
    line({"valid", "invalid", "valid_share"});
    line({n(s.node_validity.valid), n(s.node_validity.invalid),
          share_of(s.node_validity.valid, s.node_validity.valid + s.node_validity.invalid)});
    out += '\n';

    std::uint64_t language_total = 0;
    for (const auto& [code, count] : s.language_distribution) language_total += count;
    line({"# languages"});
    line({"code", "literals", "share"});
    for (const auto& [code, count] : s.language_distribution)
        line({code, n(count), share_of(count, language_total)});
    out += '\n';

    line({"# agreement"});
    line({"code", "agree", "disagree", "undetermined", "support", "agree_share",
          "disagree_share"});
    for (const auto& [code, row] : s.agreement)
        line({code, n(row.agree), n(row.disagree), n(row.undetermined), n(row.support()),
              fixed4(row.agree_share()), fixed4(row.disagree_share())});
    out += '\n';

    line({"# domains"});
    line({"pld", "nodes"});
    for (const auto& [pld, count] : by_count_desc(s.pld_counts)) line({pld, n(count)});
    out += '\n';

    const locality::WindowStats& w = s.window_histogram;
    line({"# windows"});
    line({"window", "nodes"});
    for (const auto& [window, count] : w.histogram) line({n(window), n(count)});
    out += '\n';
    line({"# windows_summary"});
    line({"total", "mean", "p50", "p90", "p99", "complete_at_p99"});
    auto opt_u64 = [](std::optional<std::uint64_t> value) {
        return value.has_value() ? std::to_string(*value) : std::string("-");
    };
    auto p99 = w.percentile(99.0);
    line({n(w.total_nodes), w.mean().has_value() ? fixed4(*w.mean()) : std::string("-"),
          opt_u64(w.percentile(50.0)), opt_u64(w.percentile(90.0)), opt_u64(p99),
          p99.has_value() ? fixed4(*w.complete_rate(*p99)) : std::string("-")});
    return out;
}

}  // namespace

std::string render(const Report& report, ReportFormat format) {
    if (format == ReportFormat::Tsv) return render_tsv(report);
    return render_json_doc(report).dump(2) + "\n";
}

Report load_report_json(const std::string& text) {
    OrderedJson doc = OrderedJson::parse(text);
    Report report;
    ProfileStats& s = report.stats;

    const auto& provenance = doc.at("provenance");
    report.provenance.tool_version = provenance.value("tool_version", std::string());
    report.provenance.config_digest = provenance.value("config_digest", std::string());
    if (provenance.contains("inputs")) {
        for (const auto& row : provenance["inputs"]) {
            InputFile input;
            input.path = row.value("path", std::string());
            input.mtime = row.value("mtime", std::int64_t{0});
            report.provenance.inputs.push_back(std::move(input));
        }
    }

    s.quad_count = doc.at("quads").value("count", std::uint64_t{0});
    for (const auto& row : doc.at("entity_classes").at("rows"))
        s.entity_class_counts[row.at("class").get<std::string>()] =
            row.at("count").get<std::uint64_t>();
    for (const auto& row : doc.at("variations").at("rows")) {
        auto key = std::make_pair(cluster_from(row.at("cluster").get<std::string>()),
                                  variation_from(row.at("variation").get<std::string>()));
        s.variation_counts[key] = row.at("count").get<std::uint64_t>();
    }
    for (const auto& row : doc.at("properties").at("rows")) {
        validity::PropertyKey key = property_from(row.at("property").get<std::string>());
        std::uint64_t nodes = row.at("nodes").get<std::uint64_t>();
        if (nodes > 0) s.property_frequency[key] = nodes;
        ValidityCounts counts;
        counts.valid = row.at("valid").get<std::uint64_t>();
        counts.invalid = row.at("invalid").get<std::uint64_t>();
        counts.unvalidatable = row.at("unvalidatable").get<std::uint64_t>();
        if (counts.valid + counts.invalid + counts.unvalidatable > 0)
            s.validity_shares[key] = counts;
    }
    const auto& node_validity = doc.at("node_validity");
    s.node_validity.valid = node_validity.value("valid", std::uint64_t{0});
    s.node_validity.invalid = node_validity.value("invalid", std::uint64_t{0});
    for (const auto& row : doc.at("languages").at("rows"))
        s.language_distribution[row.at("code").get<std::string>()] =
            row.at("literals").get<std::uint64_t>();
    for (const auto& row : doc.at("agreement").at("rows")) {
        language::AgreementRow& agreement = s.agreement[row.at("code").get<std::string>()];
        agreement.agree = row.at("agree").get<std::uint64_t>();
        agreement.disagree = row.at("disagree").get<std::uint64_t>();
        agreement.undetermined = row.at("undetermined").get<std::uint64_t>();
    }
    for (const auto& row : doc.at("domains").at("rows"))
        s.pld_counts[row.at("pld").get<std::string>()] = row.at("nodes").get<std::uint64_t>();
    const auto& windows = doc.at("windows");
    for (const auto& [key, value] : windows.at("histogram").items())
        s.window_histogram.histogram[std::stoull(key)] = value.get<std::uint64_t>();
    s.window_histogram.total_nodes = windows.value("total_nodes", std::uint64_t{0});

    return report;
}

}  // namespace quadkit::stats
