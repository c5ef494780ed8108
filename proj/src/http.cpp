#include "hwqa/http.hpp"

#include <thread>

#include <httplib.h>

#include "hwqa/error.hpp"
#include "hwqa/log.hpp"

namespace hwqa::http {

nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const RetryPolicy& policy) {
    std::string base = base_url;
    while (!base.empty() && base.back() == '/') base.pop_back();
    const std::string endpoint = base + path;

    httplib::Client client(base);
    if (!client.is_valid()) {
        throw TransportError(endpoint, 0, 0, "invalid endpoint URL");
    }
    client.set_connection_timeout(policy.timeout);
    client.set_read_timeout(policy.timeout);
    client.set_write_timeout(policy.timeout);

    const std::string payload = body.dump();
    auto backoff = policy.initial_backoff;
    int last_status = 0;
    std::string last_error;
    const int attempts = std::max(1, policy.attempts);
    int attempt = 1;
    for (;; ++attempt) {
        auto res = client.Post(path, payload, "application/json");
        if (res) {
            last_status = res->status;
            if (res->status == 200) {
                try {
                    return nlohmann::json::parse(res->body);
                } catch (const nlohmann::json::parse_error& e) {
                    throw Error(ErrorKind::ProviderContract, endpoint + ": response is not JSON: " + e.what());
                }
            }
            last_error = "HTTP " + std::to_string(res->status);
            // client errors will not improve on retry
            if (res->status < 500) break;
        } else {
            last_status = 0;
            last_error = httplib::to_string(res.error());
        }
        if (attempt >= attempts) break;
        log::warn(endpoint + ": " + last_error + ", retrying in " + std::to_string(backoff.count()) + " ms");
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(backoff.count()) * policy.backoff_multiplier));
    }
    throw TransportError(endpoint, attempt, last_status, last_error);
}

}  // namespace hwqa::http
