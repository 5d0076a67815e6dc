#pragma once

#include <memory>
#include <string>

#include "eis/error.hpp"
#include "eis/service/engine.hpp"

namespace httplib {
class Server;
}

namespace eis::service {

// HTTP status for an error category.
int http_status(ErrorCode code) noexcept;

// {"error": {"code", "message", "field"}}
nlohmann::json error_body(const Error& e);

/// JSON-over-HTTP front end for an Engine.
class HttpService {
public:
    explicit HttpService(Engine& engine);
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    // Blocks until stop(). Throws Error(io_error) when the port is busy.
    void listen(const std::string& host, int port);

    // Binds an ephemeral port and returns it; serve with run().
    int bind_any(const std::string& host);
    void run();
    void wait_until_ready() const;
    void stop();

private:
    void install_routes();

    Engine& engine_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace eis::service
