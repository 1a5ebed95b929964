#include "chatcot/http.hpp"

#include "chatcot/error.hpp"

#include <httplib.h>

namespace chatcot::http {

Endpoint
parse_endpoint(std::string const & url)
{
    auto const scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::InvalidRequest, "endpoint needs a scheme: " + url);
    }
    auto const path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

Response
post_json(Endpoint const & endpoint, nlohmann::json const & body, Headers const & headers, std::chrono::seconds timeout)
{
    httplib::Client client(endpoint.origin);
    if (!client.is_valid()) {
        throw Error(ErrorCode::TransportError, "unsupported endpoint " + endpoint.origin);
    }
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers hs;
    for (auto const & [key, value] : headers) {
        hs.emplace(key, value);
    }
    auto result = client.Post(endpoint.path, hs, body.dump(), "application/json");
    if (!result) {
        throw Error(ErrorCode::TransportError,
                    "request to " + endpoint.origin + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

} // namespace chatcot::http
