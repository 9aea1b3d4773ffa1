#include "quadkit/rank_client.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "quadkit/urlparse.hpp"

namespace quadkit::rank {

using domains::DomainRank;
using domains::RankSource;

namespace {

std::string percent_encode(std::string_view text) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char ch : text) {
        bool keep = std::isalnum(ch) || ch == '-' || ch == '.' || ch == '_' || ch == '~';
        if (keep) {
            out += static_cast<char>(ch);
        } else {
            out += '%';
            out += hex[ch >> 4];
            out += hex[ch & 0xF];
        }
    }
    return out;
}

std::string lower_copy(std::string_view text) {
    std::string out;
    for (char ch : text) out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

class HttpTransport final : public Transport {
  public:
    Reply get(const std::string& url,
              const std::map<std::string, std::string>& headers) override {
        Reply reply;
        urls::UrlParts parts;
        if (!urls::split_url(url, parts)) {
            reply.error = "unparseable url: " + url;
            return reply;
        }
        std::string base(parts.scheme);
        base += "://";
        base += parts.host;
        if (!parts.port.empty()) {
            base += ':';
            base += parts.port;
        }
        std::string target(parts.rest.empty() ? std::string_view("/") : parts.rest);
        httplib::Client client(base);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(15, 0);
        httplib::Headers request_headers(headers.begin(), headers.end());
        auto result = client.Get(target, request_headers);
        if (!result) {
            reply.error = httplib::to_string(result.error());
            return reply;
        }
        reply.ok = true;
        reply.status = result->status;
        reply.body = result->body;
        return reply;
    }
};

struct CacheEntry {
    std::int64_t fetched_at = 0;
    std::optional<double> rank_value;
    std::optional<std::int64_t> rank_position;
    std::string error;
};

std::map<std::string, CacheEntry> load_cache(const std::string& path) {
    std::map<std::string, CacheEntry> cache;
    std::ifstream in(path);
    if (!in) return cache;  // a missing cache file simply means an empty cache
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("pld")) continue;
        CacheEntry entry;
        entry.fetched_at = doc.value("fetched_at", std::int64_t{0});
        if (doc.contains("rank") && doc["rank"].is_number())
            entry.rank_value = doc["rank"].get<double>();
        if (doc.contains("position") && doc["position"].is_number_integer())
            entry.rank_position = doc["position"].get<std::int64_t>();
        entry.error = doc.value("error", std::string());
        cache[doc["pld"].get<std::string>()] = entry;  // later lines win
    }
    return cache;
}

void append_cache(const std::string& path, const std::vector<DomainRank>& ranks) {
    if (path.empty() || ranks.empty()) return;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("rank cache: cannot append to " + path);
    for (const auto& rank : ranks) {
        nlohmann::json doc;
        doc["pld"] = rank.pld;
        doc["fetched_at"] = rank.fetched_at;
        if (rank.rank_value.has_value()) doc["rank"] = *rank.rank_value;
        if (rank.rank_position.has_value()) doc["position"] = *rank.rank_position;
        if (!rank.error.empty()) doc["error"] = rank.error;
        out << doc.dump() << '\n';
    }
}

std::map<std::string, double> load_offline_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("offline ranks: cannot open " + path);
    std::map<std::string, double> ranks;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line_number == 1 && line == "pld,rank") continue;  // optional header
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("offline ranks: line " + std::to_string(line_number) +
                                     " has no comma: " + line);
        std::string pld = lower_copy(std::string_view(line).substr(0, comma));
        try {
            ranks[pld] = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw std::runtime_error("offline ranks: line " + std::to_string(line_number) +
                                     " has an unreadable rank: " + line);
        }
    }
    return ranks;
}

std::optional<std::int64_t> parse_position(const nlohmann::json& value) {
    if (value.is_number_integer()) return value.get<std::int64_t>();
    if (value.is_string()) {
        try {
            return static_cast<std::int64_t>(std::stoll(value.get<std::string>()));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttpTransport>(); }

RankClient::RankClient(ClientConfig config, std::unique_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.batch_size < 1) throw std::invalid_argument("rank client: batch size must be >= 1");
    if (!config_.clock) config_.clock = [] { return static_cast<std::int64_t>(std::time(nullptr)); };
    if (!transport_) transport_ = make_http_transport();
}

std::vector<DomainRank> RankClient::fetch_offline(const std::vector<std::string>& plds) {
    auto snapshot = load_offline_csv(config_.offline_csv);
    std::int64_t now = config_.clock();
    std::vector<DomainRank> results;
    results.reserve(plds.size());
    for (const auto& pld : plds) {
        DomainRank rank;
        rank.pld = pld;
        rank.fetched_at = now;
        rank.source = RankSource::File;
        auto it = snapshot.find(pld);
        if (it != snapshot.end() && std::isfinite(it->second)) {
            rank.rank_value = it->second;
        } else {
            rank.error = "not in the offline snapshot";
        }
        results.push_back(std::move(rank));
    }
    return results;
}

void RankClient::fetch_batch(const std::vector<std::string>& batch,
                             std::map<std::string, DomainRank>& out) {
    std::string url = config_.endpoint;
    url += '?';
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (i > 0) url += '&';
        url += "domains%5B" + std::to_string(i) + "%5D=" + percent_encode(batch[i]);
    }
    std::map<std::string, std::string> headers;
    if (!config_.api_key.empty()) headers["API-OPR"] = config_.api_key;

    std::string failure;
    nlohmann::json doc;
    bool got_response = false;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto pause = std::chrono::milliseconds(
                static_cast<std::int64_t>(config_.backoff_initial_ms) << (attempt - 1));
            std::this_thread::sleep_for(pause);
        }
        Transport::Reply reply = transport_->get(url, headers);
        if (!reply.ok) {
            failure = "transport: " + reply.error;
            continue;
        }
        if (reply.status == 429 || reply.status >= 500) {
            failure = "HTTP " + std::to_string(reply.status);
            continue;
        }
        if (reply.status != 200) {
            failure = "HTTP " + std::to_string(reply.status);
            break;  // definitive refusal; retrying will not help
        }
        doc = nlohmann::json::parse(reply.body, nullptr, false);
        if (doc.is_discarded()) {
            failure = "unparseable provider response";
            continue;
        }
        got_response = true;
        break;
    }

    std::int64_t now = config_.clock();
    if (!got_response) {
        for (const auto& pld : batch) {
            DomainRank rank;
            rank.pld = pld;
            rank.fetched_at = now;
            rank.source = RankSource::Api;
            rank.error = failure.empty() ? "no response" : failure;
            out[pld] = std::move(rank);
        }
        return;
    }

    std::map<std::string, const nlohmann::json*> entries;
    const nlohmann::json* list = nullptr;
    if (doc.is_object() && doc.contains("response") && doc["response"].is_array())
        list = &doc["response"];
    else if (doc.is_array())
        list = &doc;
    if (list != nullptr) {
        for (const auto& entry : *list) {
            if (entry.is_object() && entry.contains("domain") && entry["domain"].is_string())
                entries[lower_copy(entry["domain"].get<std::string>())] = &entry;
        }
    }

    for (const auto& pld : batch) {
        DomainRank rank;
        rank.pld = pld;
        rank.fetched_at = now;
        rank.source = RankSource::Api;
        auto it = entries.find(pld);
        if (it == entries.end()) {
            rank.error = "no entry in the provider response";
        } else {
            const nlohmann::json& entry = *it->second;
            int status = entry.value("status_code", 200);
            if (status != 200) {
                std::string cause = entry.value("error", std::string());
                rank.error = cause.empty() ? "provider status " + std::to_string(status) : cause;
            } else {
                double value = 0.0;
                bool have = false;
                if (entry.contains("page_rank_decimal") && entry["page_rank_decimal"].is_number()) {
                    value = entry["page_rank_decimal"].get<double>();
                    have = true;
                } else if (entry.contains("page_rank_integer") &&
                           entry["page_rank_integer"].is_number()) {
                    value = entry["page_rank_integer"].get<double>();
                    have = true;
                }
                if (have && std::isfinite(value)) {
                    rank.rank_value = value;
                    if (entry.contains("rank")) rank.rank_position = parse_position(entry["rank"]);
                } else {
                    rank.error = have ? "non-finite rank value" : "no rank value in the entry";
                }
            }
        }
        out[pld] = std::move(rank);
    }
}

std::vector<DomainRank> RankClient::fetch(const std::vector<std::string>& plds) {
    // Dedupe up front: no pld is asked about twice in one run.
    std::vector<std::string> unique_order;
    {
        std::set<std::string> seen;
        for (const auto& raw : plds) {
            std::string pld = lower_copy(raw);
            if (seen.insert(pld).second) unique_order.push_back(std::move(pld));
        }
    }

    if (!config_.offline_csv.empty()) return fetch_offline(unique_order);

    std::map<std::string, DomainRank> results;
    std::vector<std::string> to_fetch;
    std::int64_t now = config_.clock();
    if (!config_.cache_path.empty()) {
        auto cache = load_cache(config_.cache_path);
        for (const auto& pld : unique_order) {
            auto it = cache.find(pld);
            bool fresh =
                it != cache.end() && now - it->second.fetched_at <= config_.cache_ttl_seconds;
            if (fresh) {
                DomainRank rank;
                rank.pld = pld;
                rank.fetched_at = it->second.fetched_at;
                rank.source = RankSource::Cache;
                rank.rank_value = it->second.rank_value;
                rank.rank_position = it->second.rank_position;
                rank.error = it->second.error;
                results[pld] = std::move(rank);
            } else {
                to_fetch.push_back(pld);
            }
        }
    } else {
        to_fetch = unique_order;
    }

    std::vector<std::vector<std::string>> batches;
    for (std::size_t i = 0; i < to_fetch.size(); i += config_.batch_size) {
        std::size_t end = std::min(to_fetch.size(), i + config_.batch_size);
        batches.emplace_back(to_fetch.begin() + i, to_fetch.begin() + end);
    }

    std::vector<std::map<std::string, DomainRank>> batch_results(batches.size());
    std::size_t workers = std::max<std::size_t>(1, std::min(config_.max_in_flight, batches.size()));
    if (workers <= 1) {
        for (std::size_t b = 0; b < batches.size(); ++b) fetch_batch(batches[b], batch_results[b]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t b = next.fetch_add(1); b < batches.size();
                     b = next.fetch_add(1)) {
                    fetch_batch(batches[b], batch_results[b]);
                }
            });
        }
        for (auto& thread : pool) thread.join();
    }
    network_requests_ += batches.size();

    std::vector<DomainRank> fetched;
    for (auto& batch : batch_results)
        for (auto& [pld, rank] : batch) {
            // Cache only what the provider actually said; transport failures
            // stay uncached so the next run tries again.
            bool definitive = rank.rank_value.has_value() ||
                              (!rank.error.empty() && rank.error.rfind("transport:", 0) != 0 &&
                               rank.error.rfind("HTTP ", 0) != 0 &&
                               rank.error != "unparseable provider response" &&
                               rank.error != "no response");
            if (definitive) fetched.push_back(rank);
            results[pld] = std::move(rank);
        }
    append_cache(config_.cache_path, fetched);

    std::vector<DomainRank> ordered;
    ordered.reserve(unique_order.size());
    for (const auto& pld : unique_order) ordered.push_back(std::move(results.at(pld)));
    return ordered;
}

}  // namespace quadkit::rank
