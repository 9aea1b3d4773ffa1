#include "quadkit/urlparse.hpp"

#include <cctype>

namespace quadkit::urls {

namespace {

bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (!std::isalnum(c) && ch != '+' && ch != '-' && ch != '.') return false;
    }
    return true;
}

}  // namespace

bool split_url(std::string_view url, UrlParts& out) {
    std::size_t colon = url.find(':');
    if (colon == std::string_view::npos) return false;
    std::string_view scheme = url.substr(0, colon);
    if (!valid_scheme(scheme)) return false;
    std::string_view after = url.substr(colon + 1);
    if (after.size() < 2 || after[0] != '/' || after[1] != '/') return false;
    after.remove_prefix(2);

    std::size_t authority_end = after.find_first_of("/?#");
    std::string_view authority =
        authority_end == std::string_view::npos ? after : after.substr(0, authority_end);
    std::string_view rest =
        authority_end == std::string_view::npos ? std::string_view{} : after.substr(authority_end);

    // Strip userinfo if present.
    std::size_t at = authority.rfind('@');
    if (at != std::string_view::npos) authority = authority.substr(at + 1);

    // Strip port. IPv6 literals keep their brackets.
    std::string_view host = authority;
    std::string_view port;
    if (!host.empty() && host.front() == '[') {
        std::size_t close = host.find(']');
        if (close == std::string_view::npos) return false;
        if (close + 1 < host.size() && host[close + 1] == ':') port = host.substr(close + 2);
        host = host.substr(0, close + 1);
    } else {
        std::size_t port_colon = host.rfind(':');
        if (port_colon != std::string_view::npos) {
            port = host.substr(port_colon + 1);
            for (char ch : port) {
                if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
            }
            host = host.substr(0, port_colon);
        }
    }
    if (host.empty()) return false;

    out.scheme = scheme;
    out.host = host;
    out.port = port;
    out.rest = rest;
    return true;
}

bool is_http_url(std::string_view text) {
    UrlParts p;
    if (!split_url(text, p)) return false;
    std::string scheme = lower_ascii(p.scheme);
    return scheme == "http" || scheme == "https";
}

std::string lower_ascii(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

}  // namespace quadkit::urls
