#pragma once

#include <memory>
#include <string>

#include <httplib.h>

#include "timetuner/store/api.hpp"

namespace timetuner::store {

/// HTTP front end of an Api. The Api must outlive the server.
class ApiServer {
public:
    explicit ApiServer(const Api& api) : api_(api), http_(std::make_unique<httplib::Server>()) {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            const auto r = api_.handle(req.method, req.target, req.body);
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        };
        http_->Get(".*", handler);
        http_->Post(".*", handler);
        http_->Put(".*", handler);
        http_->Delete(".*", handler);
        http_->Patch(".*", handler);
        // SO_REUSEADDR only; the library default also sets SO_REUSEPORT, which lets a second server share the port.
        http_->set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
        });
    }

    /// Binds to `port` (0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port) {
        if (port == 0) {
            const int p = http_->bind_to_any_port(host);
            if (p < 0) throw Error(ErrorCode::PortInUse, "no free port on " + host);
            return p;
        }
        if (!http_->bind_to_port(host, port))
            throw Error(ErrorCode::PortInUse, "cannot bind " + host + ":" + std::to_string(port));
        return port;
    }

    /// Serves until stop() is called.
    void run() { http_->listen_after_bind(); }
    void stop() { http_->stop(); }
    void wait_until_ready() const { http_->wait_until_ready(); }

private:
    const Api& api_;
    std::unique_ptr<httplib::Server> http_;
};

} // namespace timetuner::store
