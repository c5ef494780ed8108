#pragma once

#include <chrono>
#include <string>

#include <json.hpp>

namespace hwqa::http {

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{100};
    double backoff_multiplier = 2.0;
    std::chrono::seconds timeout{60};
};

// POSTs `body` as JSON to base_url + path and returns the parsed response.
// Transport failures and 5xx responses are retried with exponential backoff;
// any non-200 final outcome throws TransportError. A 200 response that is
// not JSON throws ErrorKind::ProviderContract.
nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const RetryPolicy& policy = {});

}  // namespace hwqa::http
