#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "quadkit/domains.hpp"

namespace quadkit::rank {

// Minimal GET transport so tests can count or fake network traffic. get()
// may be called from several threads at once.
class Transport {
  public:
    struct Reply {
        bool ok = false;     // transport-level success (a response arrived)
        int status = 0;      // HTTP status when ok
        std::string body;
        std::string error;   // transport-level cause when !ok
    };

    virtual ~Transport() = default;
    virtual Reply get(const std::string& url,
                      const std::map<std::string, std::string>& headers) = 0;
};

std::unique_ptr<Transport> make_http_transport();

struct ClientConfig {
    // Endpoint speaking the Open PageRank HTTP contract:
    // GET {endpoint}?domains[0]=a&domains[1]=b with the key in an API-OPR
    // header, answering {"response":[{"domain":...,"status_code":...,
    // "page_rank_decimal":...,"rank":...}, ...]}.
    std::string endpoint = "https://openpagerank.com/api/v1.2/getPageRank";
    std::string api_key;
    std::size_t batch_size = 100;  // provider page size cap
    int max_retries = 3;           // extra attempts after the first
    int backoff_initial_ms = 100;  // doubles per retry
    std::size_t max_in_flight = 4; // concurrent batch requests

    // Line-oriented JSON cache; empty path disables caching. Entries older
    // than the TTL are refetched.
    std::string cache_path;
    std::int64_t cache_ttl_seconds = 7 * 24 * 3600;

    // When set, ranks come from this CSV snapshot (pld,rank per line) and the
    // network is never touched.
    std::string offline_csv;

    // Injectable clock (unix seconds) for cache-expiry tests.
    std::function<std::int64_t()> clock;
};

// Fetches domain ranks with per-run dedupe, caching, batching, retry with
// exponential backoff, and an offline mode. Lookup failures surface as
// absent ranks with a cause; fetch() itself only throws for broken local
// files (unreadable cache/CSV), never for network trouble.
class RankClient {
  public:
    explicit RankClient(ClientConfig config, std::unique_ptr<Transport> transport = nullptr);

    // One DomainRank per distinct pld, in first-occurrence order.
    std::vector<domains::DomainRank> fetch(const std::vector<std::string>& plds);

    std::size_t network_requests() const { return network_requests_; }

  private:
    std::vector<domains::DomainRank> fetch_offline(const std::vector<std::string>& plds);
    void fetch_batch(const std::vector<std::string>& batch,
                     std::map<std::string, domains::DomainRank>& out);

    ClientConfig config_;
    std::unique_ptr<Transport> transport_;
    std::size_t network_requests_ = 0;
};

}  // namespace quadkit::rank
