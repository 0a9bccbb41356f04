#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

namespace statepat
{

struct ServiceOptions
{
    std::string cors_origin = "*";
    std::size_t history_limit = 500;
    std::size_t state_limit = 0; // 0 selects default_state_limit()
    std::size_t max_step_count = 10'000;
    std::optional<std::string> preload_model; // used when POST /sessions omits model_text
};

struct HttpResponse
{
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Session-oriented JSON API over the engine, patterns and verifier. Sessions
/// live in memory only. Requests on one session are serialized; distinct
/// sessions run in parallel.
class Service
{
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Routes one request without any socket involved.
    HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

    /// Binds `host:port` (port 0 picks a free one) and returns the bound port,
    /// or -1 when binding fails.
    int bind(const std::string& host, int port);
    /// Serves on the bound socket until stop(). Returns false on failure.
    bool listen_after_bind();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> _impl;
};

} // namespace statepat
