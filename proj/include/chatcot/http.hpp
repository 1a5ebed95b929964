#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace chatcot::http {

/// "http://host:port/v1/chat" split into the part httplib connects to and
/// the request path.
struct Endpoint
{
    std::string origin;
    std::string path;
};

Endpoint parse_endpoint(std::string const & url);

struct Response
{
    int status = 0;
    std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// One POST of a JSON body. Throws TransportError when no HTTP response
/// arrived at all; HTTP error statuses are returned to the caller.
Response post_json(
    Endpoint const & endpoint,
    nlohmann::json const & body,
    Headers const & headers,
    std::chrono::seconds timeout);

} // namespace chatcot::http
