#include "quadkit/domains.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "quadkit/rank_client.hpp"
#include "test_support.hpp"

using quadkit::domains::AbsentRank;
using quadkit::domains::annotate_plds;
using quadkit::domains::Comparator;
using quadkit::domains::DomainRank;
using quadkit::domains::extract_pld;
using quadkit::domains::pld_distribution;
using quadkit::domains::RankSource;
using quadkit::domains::ranks_by_pld;
using quadkit::domains::SuffixRules;
using quadkit::domains::top_plds;
using quadkit::domains::trust_filter;
using quadkit::domains::TrustPolicy;
using quadkit::rank::ClientConfig;
using quadkit::rank::RankClient;
using quadkit::rank::Transport;
using quadkit::validity::ProductRecord;

namespace {

ProductRecord record_for(const std::string& page) {
    ProductRecord record;
    record.subject = quadkit::nquads::Term::blank("n" + std::to_string(std::hash<std::string>{}(page) % 1000));
    record.source_page = page;
    return record;
}

std::filesystem::path fresh_path(const char* tag) {
    static std::atomic<int> counter{0};
    return std::filesystem::temp_directory_path() /
           ("quadkit-test-" + std::string(tag) + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
}

// Transport double that fails every call; used to prove code paths stay off
// the network.
class CountingTransport final : public Transport {
  public:
    Reply get(const std::string&, const std::map<std::string, std::string>&) override {
        calls.fetch_add(1);
        Reply reply;
        reply.error = "network disabled in this test";
        return reply;
    }
    std::atomic<int> calls{0};
};

std::vector<std::string> domains_in_url(const std::string& url) {
    // Queries look like ...?domains%5B0%5D=a.com&domains%5B1%5D=b.org; the
    // domain values themselves contain no percent-escapes.
    std::vector<std::string> out;
    std::size_t pos = url.find('?');
    while (pos != std::string::npos && pos < url.size()) {
        std::size_t eq = url.find('=', pos);
        if (eq == std::string::npos) break;
        std::size_t amp = url.find('&', eq);
        out.push_back(url.substr(eq + 1, amp == std::string::npos ? std::string::npos
                                                                  : amp - eq - 1));
        pos = amp;
    }
    return out;
}

std::string provider_body(const std::vector<std::string>& domains,
                          const std::set<std::string>& unknown = {}) {
    nlohmann::json response = nlohmann::json::array();
    for (const auto& domain : domains) {
        nlohmann::json entry;
        entry["domain"] = domain;
        if (unknown.count(domain)) {
            entry["status_code"] = 404;
            entry["error"] = "Domain not found";
            entry["page_rank_decimal"] = 0;
        } else {
            entry["status_code"] = 200;
            entry["error"] = "";
            entry["page_rank_decimal"] = 1.0 + static_cast<double>(domain.size() % 7);
            entry["rank"] = std::to_string(1000 + domain.size());
        }
        response.push_back(entry);
    }
    nlohmann::json doc;
    doc["status_code"] = 200;
    doc["response"] = response;
    return doc.dump();
}

// Serves canned provider answers and records every requested domain.
class FakeProvider final : public Transport {
  public:
    explicit FakeProvider(std::set<std::string> unknown = {}) : unknown_(std::move(unknown)) {}

    Reply get(const std::string& url, const std::map<std::string, std::string>&) override {
        std::lock_guard<std::mutex> lock(mutex_);
        ++calls_;
        auto domains = domains_in_url(url);
        batch_sizes_.push_back(domains.size());
        for (const auto& domain : domains) ++requested_[domain];
        Reply reply;
        reply.ok = true;
        reply.status = 200;
        reply.body = provider_body(domains, unknown_);
        return reply;
    }

    int calls() const { return calls_; }
    const std::vector<std::size_t>& batch_sizes() const { return batch_sizes_; }
    const std::map<std::string, int>& requested() const { return requested_; }

  private:
    std::set<std::string> unknown_;
    std::mutex mutex_;
    int calls_ = 0;
    std::vector<std::size_t> batch_sizes_;
    std::map<std::string, int> requested_;
};

}  // namespace

TEST_CASE("suffix rules resolve registrable domains") {
    SuffixRules rules = SuffixRules::from_string(
        "// toy snapshot\n"
        "com\n"
        "co.uk\n"
        "org\n"
        "*.ck\n"
        "!www.ck\n");
    CHECK(rules.rule_count() == 5);

    CHECK(rules.registrable("shop.rakuten.com") == "rakuten.com");
    CHECK(rules.registrable("rakuten.com") == "rakuten.com");
    CHECK(rules.registrable("a.b.example.co.uk") == "example.co.uk");
    CHECK_FALSE(rules.registrable("co.uk").has_value());
    CHECK_FALSE(rules.registrable("com").has_value());

    // Wildcard: every label under ck is a public suffix...
    CHECK(rules.registrable("store.shop.ck") == "store.shop.ck");
    CHECK(rules.registrable("deep.store.shop.ck") == "store.shop.ck");
    CHECK_FALSE(rules.registrable("shop.ck").has_value());
    // ...except the exception, which is registrable itself.
    CHECK(rules.registrable("www.ck") == "www.ck");
    CHECK(rules.registrable("sub.www.ck") == "www.ck");

    // Unknown suffix: the last label acts as the suffix.
    CHECK(rules.registrable("x.y.veryunknowntld") == "y.veryunknowntld");
    CHECK(rules.registrable("a.localhost") == "a.localhost");
    CHECK_FALSE(rules.registrable("localhost").has_value());

    // Degenerate hosts.
    CHECK_FALSE(rules.registrable("").has_value());
    CHECK_FALSE(rules.registrable("a..com").has_value());
    CHECK(rules.registrable("example.com.") == "example.com");  // trailing dot

    const SuffixRules& bundled = SuffixRules::bundled();
    CHECK(bundled.rule_count() > 100);
    CHECK(bundled.registrable("shop.rakuten.com") == "rakuten.com");
    CHECK(bundled.registrable("news.bbc.co.uk") == "bbc.co.uk");
    CHECK(bundled.registrable("store.example.com.au") == "example.com.au");
}

TEST_CASE("pay-level domains come from page urls") {
    CHECK(extract_pld("https://shop.rakuten.com/x") == "rakuten.com");
    CHECK(extract_pld("https://a.b.example.co.uk/p") == "example.co.uk");
    CHECK(extract_pld("http://127.0.0.1/x") == "127.0.0.1");
    CHECK(extract_pld("http://[2001:db8::1]:8080/x") == "[2001:db8::1]");
    CHECK(extract_pld("http://x.y.veryunknowntld/") == "y.veryunknowntld");
    CHECK(extract_pld("HTTP://WWW.EXAMPLE.COM/Path?q=1") == "example.com");
    CHECK(extract_pld("http://example.com:8080/") == "example.com");

    CHECK_FALSE(extract_pld("http://co.uk/").has_value());
    CHECK_FALSE(extract_pld("not a url").has_value());
    CHECK_FALSE(extract_pld("mailto:user@example.com").has_value());
    CHECK_FALSE(extract_pld("").has_value());

    // All-digit labels that are not a dotted quad are a host, not an address.
    CHECK(extract_pld("http://12.34.com/") == "34.com");
}

TEST_CASE("extraction is idempotent over its own output") {
    std::vector<std::string> urls = {
        "https://shop.rakuten.com/x",
        "https://a.b.example.co.uk/p",
        "http://127.0.0.1/x",
        "http://deep.store.example.com.au/item",
        "http://news.site.org.uk/a?b=c",
        "http://x.y.veryunknowntld/",
        "http://sub.www.ck/page",
        "http://a.b.c.d.example.de/x",
    };
    testsupport::Rng rng(0x1d3ULL);
    static const char* suffixes[] = {"com", "org", "co.uk", "de", "co.jp", "com.br", "io"};
    for (int i = 0; i < 60; ++i) {
        std::string host;
        int labels = 1 + static_cast<int>(rng.below(3));
        for (int j = 0; j < labels; ++j) {
            host += static_cast<char>('a' + rng.below(26));
            host += static_cast<char>('a' + rng.below(26));
            host += '.';
        }
        host += suffixes[rng.below(7)];
        urls.push_back("https://" + host + "/p" + std::to_string(i));
    }
    std::size_t extracted = 0;
    for (const auto& url : urls) {
        auto pld = extract_pld(url);
        if (!pld.has_value()) continue;
        ++extracted;
        auto again = extract_pld("http://" + *pld + "/");
        REQUIRE(again.has_value());
        CHECK(*again == *pld);
    }
    CHECK(extracted == urls.size());
}

TEST_CASE("node counts per domain are exact") {
    SUBCASE("one record per page across three domains") {
        std::vector<ProductRecord> records = {
            record_for("https://a.example.com/1"),
            record_for("https://b.example.org/2"),
            record_for("https://c.example.de/3"),
        };
        annotate_plds(records, SuffixRules::bundled());
        auto counts = pld_distribution(records);
        REQUIRE(counts.size() == 3);
        CHECK(counts.at("example.com") == 1);
        CHECK(counts.at("example.org") == 1);
        CHECK(counts.at("example.de") == 1);
    }

    SUBCASE("an empty record set yields an empty map") {
        CHECK(pld_distribution({}).empty());
    }

    SUBCASE("planted counts and the totals invariant") {
        std::map<std::string, std::uint64_t> plan = {
            {"alpha.com", 37}, {"beta.org", 12}, {"gamma.de", 12}, {"delta.io", 1}};
        std::vector<ProductRecord> records;
        for (const auto& [pld, count] : plan)
            for (std::uint64_t i = 0; i < count; ++i)
                records.push_back(record_for("https://shop." + pld + "/p" + std::to_string(i)));
        records.push_back(record_for(""));  // no source page -> empty bucket
        annotate_plds(records, SuffixRules::bundled());
        auto counts = pld_distribution(records);
        for (const auto& [pld, count] : plan) CHECK(counts.at(pld) == count);
        CHECK(counts.at("") == 1);
        std::uint64_t total = 0;
        for (const auto& [pld, count] : counts) total += count;
        CHECK(total == records.size());

        auto top = top_plds(counts, 3);
        REQUIRE(top.size() == 3);
        CHECK(top[0].first == "alpha.com");
        // Tie at 12 resolves lexicographically.
        CHECK(top[1].first == "beta.org");
        CHECK(top[2].first == "gamma.de");
    }
}

TEST_CASE("the trust filter partitions records by rank policy") {
    auto make_ranked_records = [] {
        std::vector<ProductRecord> records = {
            record_for("https://shop.alpha.com/1"),
            record_for("https://shop.beta.org/2"),
        };
        annotate_plds(records, SuffixRules::bundled());
        return records;
    };
    std::vector<DomainRank> ranks(2);
    ranks[0].pld = "alpha.com";
    ranks[0].rank_value = 3.0;
    ranks[1].pld = "beta.org";
    ranks[1].rank_value = 7.0;
    auto by_pld = ranks_by_pld(ranks);

    SUBCASE("lower-is-trusted keeps the low rank") {
        TrustPolicy policy;
        policy.comparator = Comparator::LowerIsTrusted;
        policy.threshold = 5.0;
        auto report = trust_filter(make_ranked_records(), by_pld, policy);
        REQUIRE(report.kept.size() == 1);
        REQUIRE(report.dropped.size() == 1);
        CHECK(report.kept[0].pay_level_domain == "alpha.com");
        CHECK(report.dropped[0].pay_level_domain == "beta.org");
        CHECK(report.quarantined.empty());
    }

    SUBCASE("higher-is-trusted mirrors the split") {
        TrustPolicy policy;
        policy.comparator = Comparator::HigherIsTrusted;
        policy.threshold = 5.0;
        auto report = trust_filter(make_ranked_records(), by_pld, policy);
        REQUIRE(report.kept.size() == 1);
        CHECK(report.kept[0].pay_level_domain == "beta.org");
        CHECK(report.dropped[0].pay_level_domain == "alpha.com");
    }

    SUBCASE("records without a usable rank follow the absent policy") {
        for (AbsentRank absent :
             {AbsentRank::Keep, AbsentRank::Drop, AbsentRank::Quarantine}) {
            TrustPolicy policy;
            policy.comparator = Comparator::LowerIsTrusted;
            policy.threshold = 5.0;
            policy.absent = absent;
            std::vector<ProductRecord> records = make_ranked_records();
            records.push_back(record_for("https://shop.unknown.de/3"));
            annotate_plds(records, SuffixRules::bundled());
            auto report = trust_filter(std::move(records), by_pld, policy);
            std::size_t expected_kept = absent == AbsentRank::Keep ? 2 : 1;
            std::size_t expected_dropped = absent == AbsentRank::Drop ? 2 : 1;
            std::size_t expected_quarantine = absent == AbsentRank::Quarantine ? 1 : 0;
            CHECK(report.kept.size() == expected_kept);
            CHECK(report.dropped.size() == expected_dropped);
            CHECK(report.quarantined.size() == expected_quarantine);
        }
    }

    SUBCASE("the three routes partition any input") {
        testsupport::Rng rng(0x7ab1eULL);
        std::vector<ProductRecord> records;
        std::set<std::string> subjects;
        for (int i = 0; i < 200; ++i) {
            std::string pld = "site" + std::to_string(rng.below(20)) + ".com";
            auto record = record_for("https://www." + pld + "/p" + std::to_string(i));
            record.subject = quadkit::nquads::Term::iri("http://x/" + std::to_string(i));
            subjects.insert(record.subject.lexical);
            records.push_back(std::move(record));
        }
        annotate_plds(records, SuffixRules::bundled());
        std::map<std::string, DomainRank> ranks_map;
        for (int s = 0; s < 20; ++s) {
            if (rng.chance(0.3)) continue;  // some domains stay unranked
            DomainRank rank;
            rank.pld = "site" + std::to_string(s) + ".com";
            rank.rank_value = static_cast<double>(rng.below(10));
            ranks_map[rank.pld] = rank;
        }
        TrustPolicy policy;
        policy.comparator = Comparator::LowerIsTrusted;
        policy.threshold = 4.0;
        policy.absent = AbsentRank::Quarantine;
        auto report = trust_filter(records, ranks_map, policy);
        CHECK(report.kept.size() + report.dropped.size() + report.quarantined.size() ==
              records.size());
        std::set<std::string> seen;
        for (const auto* bucket : {&report.kept, &report.dropped, &report.quarantined})
            for (const auto& record : *bucket) {
                CHECK(seen.insert(record.subject.lexical).second);
                bool has_rank = ranks_map.count(record.pay_level_domain) > 0;
                if (!has_rank) continue;
                double value = *ranks_map.at(record.pay_level_domain).rank_value;
                bool trusted = value <= policy.threshold;
                if (trusted) CHECK(&record >= report.kept.data());
            }
        CHECK(seen == subjects);
        // Every ranked record landed on the side its value dictates.
        for (const auto& record : report.kept)
            if (ranks_map.count(record.pay_level_domain))
                CHECK(*ranks_map.at(record.pay_level_domain).rank_value <= policy.threshold);
        for (const auto& record : report.dropped)
            if (ranks_map.count(record.pay_level_domain))
                CHECK(*ranks_map.at(record.pay_level_domain).rank_value > policy.threshold);
        for (const auto& record : report.quarantined)
            CHECK_FALSE(ranks_map.count(record.pay_level_domain));
    }

    SUBCASE("an unset comparator is rejected") {
        TrustPolicy policy;  // comparator deliberately left empty
        CHECK_THROWS_AS(trust_filter(make_ranked_records(), by_pld, policy),
                        std::invalid_argument);
    }
}

TEST_CASE("cached ranks short-circuit the network") {
    auto cache_path = fresh_path("cache");
    {
        std::ofstream out(cache_path);
        out << R"({"pld":"rakuten.com","fetched_at":1000000,"rank":6.1,"position":13794})"
            << "\n";
    }
    ClientConfig config;
    config.endpoint = "http://provider.test/api";
    config.cache_path = cache_path.string();
    config.cache_ttl_seconds = 3600;
    config.clock = [] { return std::int64_t{1000100}; };  // 100 s after the entry

    SUBCASE("a fresh entry answers without any network call") {
        auto transport = std::make_unique<CountingTransport>();
        CountingTransport* probe = transport.get();
        RankClient client(config, std::move(transport));
        auto ranks = client.fetch({"rakuten.com"});
        REQUIRE(ranks.size() == 1);
        CHECK(ranks[0].source == RankSource::Cache);
        REQUIRE(ranks[0].rank_value.has_value());
        CHECK(*ranks[0].rank_value == doctest::Approx(6.1));
        REQUIRE(ranks[0].rank_position.has_value());
        CHECK(*ranks[0].rank_position == 13794);
        CHECK(probe->calls.load() == 0);
        CHECK(client.network_requests() == 0);
    }

    SUBCASE("a stale entry is refetched and re-cached") {
        config.clock = [] { return std::int64_t{2000000}; };  // far past the TTL
        {
            auto transport = std::make_unique<FakeProvider>();
            RankClient client(config, std::move(transport));
            auto ranks = client.fetch({"rakuten.com"});
            REQUIRE(ranks.size() == 1);
            CHECK(ranks[0].source == RankSource::Api);
            CHECK(ranks[0].rank_value.has_value());
            CHECK(client.network_requests() == 1);
        }
        {
            // The refreshed entry now serves from cache.
            auto transport = std::make_unique<CountingTransport>();
            CountingTransport* probe = transport.get();
            RankClient client(config, std::move(transport));
            auto ranks = client.fetch({"rakuten.com"});
            REQUIRE(ranks.size() == 1);
            CHECK(ranks[0].source == RankSource::Cache);
            CHECK(probe->calls.load() == 0);
        }
    }

    std::filesystem::remove(cache_path);
}

TEST_CASE("the client retries rate limits with backoff") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Get("/api/rank", [&](const httplib::Request& req, httplib::Response& res) {
        int attempt = hits.fetch_add(1);
        if (attempt == 0) {
            res.status = 429;
            return;
        }
        std::vector<std::string> domains;
        for (const auto& [key, value] : req.params)
            if (key.rfind("domains", 0) == 0) domains.push_back(value);
        res.set_content(provider_body(domains), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ClientConfig config;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/api/rank";
    config.api_key = "test-key";
    config.max_retries = 2;
    config.backoff_initial_ms = 1;
    RankClient client(std::move(config));
    auto ranks = client.fetch({"rakuten.com"});
    server.stop();
    runner.join();

    REQUIRE(ranks.size() == 1);
    CHECK(ranks[0].rank_value.has_value());
    CHECK(hits.load() == 2);  // the 429 then the success
}

TEST_CASE("offline snapshots never touch the network") {
    auto csv_path = fresh_path("offline");
    {
        std::ofstream out(csv_path);
        out << "pld,rank\n";
        for (int i = 0; i < 10; ++i) out << "site" << i << ".com," << (i + 0.5) << "\n";
    }
    ClientConfig config;
    config.offline_csv = csv_path.string();
    auto transport = std::make_unique<CountingTransport>();
    CountingTransport* probe = transport.get();
    RankClient client(std::move(config), std::move(transport));

    std::vector<std::string> query;
    for (int i = 0; i < 12; ++i) query.push_back("site" + std::to_string(i) + ".com");
    auto ranks = client.fetch(query);
    REQUIRE(ranks.size() == 12);
    int present = 0, absent = 0;
    for (const auto& rank : ranks) {
        CHECK(rank.source == RankSource::File);
        if (rank.rank_value.has_value()) {
            ++present;
        } else {
            ++absent;
            CHECK_FALSE(rank.error.empty());
        }
    }
    CHECK(present == 10);
    CHECK(absent == 2);
    CHECK(probe->calls.load() == 0);
    CHECK(client.network_requests() == 0);
    std::filesystem::remove(csv_path);
}

TEST_CASE("large requests split into provider-sized batches with no duplicates") {
    std::vector<std::string> plds;
    for (int i = 0; i < 250; ++i) plds.push_back("shop" + std::to_string(i) + ".com");
    // Repeats and case variants must not cause duplicate requests.
    plds.push_back("shop0.com");
    plds.push_back("SHOP1.com");

    ClientConfig config;
    config.endpoint = "http://provider.test/api";
    config.batch_size = 100;
    config.max_in_flight = 3;
    auto transport = std::make_unique<FakeProvider>();
    FakeProvider* probe = transport.get();
    RankClient client(std::move(config), std::move(transport));
    auto ranks = client.fetch(plds);

    REQUIRE(ranks.size() == 250);
    CHECK(probe->calls() == 3);
    for (std::size_t size : probe->batch_sizes()) CHECK(size <= 100);
    CHECK(probe->requested().size() == 250);
    for (const auto& [domain, times] : probe->requested()) CHECK(times == 1);
    // Output preserves first-occurrence order and carries the fake values.
    for (int i = 0; i < 250; ++i) {
        CHECK(ranks[i].pld == "shop" + std::to_string(i) + ".com");
        REQUIRE(ranks[i].rank_value.has_value());
        CHECK(*ranks[i].rank_value ==
              doctest::Approx(1.0 + static_cast<double>(ranks[i].pld.size() % 7)));
    }
}

TEST_CASE("definitive provider answers are cached, transport failures are not") {
    auto cache_path = fresh_path("cache2");
    ClientConfig config;
    config.endpoint = "http://provider.test/api";
    config.cache_path = cache_path.string();
    config.max_retries = 0;
    config.backoff_initial_ms = 1;
    config.clock = [] { return std::int64_t{5000}; };

    SUBCASE("transport failure leaves the rank absent and the cache empty") {
        auto transport = std::make_unique<CountingTransport>();
        RankClient client(config, std::move(transport));
        auto ranks = client.fetch({"flaky.com"});
        REQUIRE(ranks.size() == 1);
        CHECK_FALSE(ranks[0].rank_value.has_value());
        CHECK(ranks[0].error.find("transport") != std::string::npos);
        CHECK_FALSE(std::filesystem::exists(cache_path));
    }

    SUBCASE("a provider miss is cached as a definitive answer") {
        {
            auto transport = std::make_unique<FakeProvider>(std::set<std::string>{"ghost.com"});
            RankClient client(config, std::move(transport));
            auto ranks = client.fetch({"ghost.com", "real.com"});
            REQUIRE(ranks.size() == 2);
            CHECK_FALSE(ranks[0].rank_value.has_value());
            CHECK(ranks[0].error == "Domain not found");
            CHECK(ranks[1].rank_value.has_value());
        }
        {
            // Both answers (the value and the miss) now come from the cache.
            auto transport = std::make_unique<CountingTransport>();
            CountingTransport* probe = transport.get();
            RankClient client(config, std::move(transport));
            auto ranks = client.fetch({"ghost.com", "real.com"});
            REQUIRE(ranks.size() == 2);
            CHECK(ranks[0].source == RankSource::Cache);
            CHECK_FALSE(ranks[0].rank_value.has_value());
            CHECK(ranks[0].error == "Domain not found");
            CHECK(ranks[1].source == RankSource::Cache);
            CHECK(ranks[1].rank_value.has_value());
            CHECK(probe->calls.load() == 0);
        }
    }

    std::filesystem::remove(cache_path);
}
