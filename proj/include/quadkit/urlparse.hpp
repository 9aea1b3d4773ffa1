#pragma once

// Minimal URL splitting shared by the normalizer, validity checks and PLD
// extraction. This is deliberately not an RFC 3986 validator; it recognizes
// the scheme://host shape that crawl data actually contains.

#include <string>
#include <string_view>

namespace quadkit::urls {

struct UrlParts {
    std::string_view scheme;  // without "://"
    std::string_view host;    // without userinfo or port
    std::string_view port;    // digits only, may be empty
    std::string_view rest;    // everything after the authority (path, query, fragment)
};

// Splits an absolute hierarchical URL. Returns false when there is no scheme
// or no host (opaque URIs like mailto: or urn:).
bool split_url(std::string_view url, UrlParts& out);

// True iff `text` is an absolute http/https URL with a non-empty host.
bool is_http_url(std::string_view text);

// ASCII lowercase copy (hosts compare case-insensitively).
std::string lower_ascii(std::string_view s);

}  // namespace quadkit::urls
