#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "simdetect/corpus.hpp"
#include "simdetect/errors.hpp"
#include "simdetect/outliers.hpp"
#include "simdetect/session.hpp"

namespace simdetect {

/// Error body of the HTTP API: {"error": {"status", "code", "message"}}.
class ApiError : public Error {
public:
    ApiError(int status, std::string code, const std::string& message)
        : Error(message), status_(status), code_(std::move(code)) {}

    [[nodiscard]] int status() const noexcept { return status_; }
    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    int status_;
    std::string code_;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

/// Request handling for the /api routes over one immutable report. The
/// corpus is needed only by the fragment and source routes. handle() is safe
/// to call concurrently.
class Api {
public:
    Api(AnalysisReport report, std::optional<ScanResult> corpus, CriticalValueTable* cache = nullptr);

    /// `path` is the decoded request path, e.g. "/api/graph/ncd_tokens".
    ApiResponse handle(std::string_view path, const QueryParams& query) const;

    [[nodiscard]] const AnalysisReport& report() const noexcept { return report_; }

private:
    AnalysisReport report_;
    AnalysisConfig config_;
    std::optional<ScanResult> corpus_;
    CriticalValueTable* cache_;
    mutable std::mutex mu_;
    mutable std::map<std::string, std::string> fragment_cache_;

    nlohmann::json summary() const;
    const TestResult& test(std::string_view name) const;
    const Submission& submission(std::string_view id) const;
    std::string fragments(const TestResult& t, std::string_view a, std::string_view b, std::size_t n) const;
};

/// Scans `root` with the report's own filters and checks that it yields the
/// report's submissions (ConfigError otherwise).
ScanResult corpus_for_report(const AnalysisReport& report, const std::filesystem::path& root);

/// HTTP/1.1 front end for an Api.
class HttpServer {
public:
    explicit HttpServer(const Api& api);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and returns the port; port 0 picks a free one. IoError on failure.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace simdetect
