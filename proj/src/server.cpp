#include "simdetect/server.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include <httplib.h>

#include "simdetect/fragments.hpp"
#include "simdetect/lexer.hpp"
#include "simdetect/structure.hpp"

namespace simdetect {

namespace {

using nlohmann::json;

constexpr double kDefaultAlpha = 0.05;
constexpr std::size_t kDefaultFragments = 5;

[[noreturn]] void not_found(const std::string& code, const std::string& message) { throw ApiError(404, code, message); }
[[noreturn]] void bad_request(const std::string& message) { throw ApiError(400, "bad_parameter", message); }

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto slash = path.find('/', start);
        const auto end = slash == std::string_view::npos ? path.size() : slash;
        if (end > start) out.emplace_back(path.substr(start, end - start));
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    return out;
}

std::optional<std::string> param(const QueryParams& q, std::string_view key) {
    const auto it = q.find(key);
    if (it == q.end()) return std::nullopt;
    return it->second;
}

double parse_real(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
        bad_request("'" + key + "' must be a number, got '" + text + "'");
    return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end) bad_request("'" + key + "' must be a nonnegative integer");
    return v;
}

std::string alpha_key(double alpha) { return json(alpha).dump(); }

ApiResponse json_response(const json& j) { return {200, "application/json", j.dump()}; }

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
    json body{{"error", {{"status", status}, {"code", code}, {"message", message}}}};
    return {status, "application/json", body.dump()};
}

double default_threshold(const TestResult& t) {
    const FlagReport* a = t.find_flags(Scenario::A, kDefaultAlpha);
    if (!a)
        for (const auto& f : t.flags)
            if (f.scenario == Scenario::A) {
                a = &f;
                break;
            }
    if (!a || !a->threshold_value) return 0.0;
    return std::clamp(*a->threshold_value, 0.0, 1.0);
}

constexpr std::string_view kIndexPage =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>simdetect</title></head>\n"
    "<body><p>The web interface is not bundled with this server. The JSON API is available under "
    "<a href=\"/api/report\">/api</a>.</p></body></html>\n";

}  // namespace

ScanResult corpus_for_report(const AnalysisReport& report, const std::filesystem::path& root) {
    const auto config = AnalysisConfig::from_json(report.config);
    auto corpus = load_corpus(config, root);
    std::vector<std::string> ids;
    for (const auto& s : corpus.submissions) ids.push_back(s.id);
    std::vector<std::string> expected;
    for (const auto& s : report.submissions) expected.push_back(s.id);
    if (ids != expected) throw ConfigError("the corpus under '" + root.string() + "' does not match the report");
    return corpus;
}

Api::Api(AnalysisReport report, std::optional<ScanResult> corpus, CriticalValueTable* cache)
    : report_(std::move(report)),
      config_(AnalysisConfig::from_json(report_.config)),
      corpus_(std::move(corpus)),
      cache_(cache) {}

const TestResult& Api::test(std::string_view name) const {
    const auto* t = report_.find_test(name);
    if (!t) not_found("unknown_test", "no test named '" + std::string(name) + "' in the report");
    return *t;
}

const Submission& Api::submission(std::string_view id) const {
    if (!corpus_) not_found("corpus_unavailable", "the server was started without the corpus root");
    for (const auto& s : corpus_->submissions)
        if (s.id == id) return s;
    not_found("unknown_id", "no submission '" + std::string(id) + "'");
}

json Api::summary() const {
    json tests = json::array();
    for (const auto& t : report_.tests) {
        json thresholds = json::object();
        json counts = {{"A", json::object()}, {"B", json::object()}};
        for (const auto& f : t.flags) {
            const auto key = alpha_key(f.alpha);
            if (f.scenario == Scenario::A) {
                if (f.threshold_value) thresholds[key] = *f.threshold_value;
                counts["A"][key] = f.pairs.size();
            } else {
                counts["B"][key] = f.pairs.size();
            }
        }
        json jt{{"name", t.name},
                {"algorithm", t.algorithm},
                {"thresholds", std::move(thresholds)},
                {"default_threshold", default_threshold(t)},
                {"flag_counts", std::move(counts)}};
        if (t.base) jt["base"] = *t.base;
        tests.push_back(std::move(jt));
    }
    json subs = json::array();
    for (const auto& s : report_.submissions) {
        json files = json::array();
        for (const auto& f : s.files) files.push_back({{"path", f.path}, {"size", f.size}});
        subs.push_back({{"id", s.id}, {"files", std::move(files)}});
    }
    return {{"schema_version", report_.schema_version},
            {"ids", report_.ids()},
            {"submissions", std::move(subs)},
            {"tests", std::move(tests)},
            {"alphas", config_.alphas},
            {"warnings", report_.warnings},
            {"notices", report_.notices}};
}

std::string Api::fragments(const TestResult& t, std::string_view a, std::string_view b, std::size_t n) const {
    const std::string key = t.name + "\n" + std::string(a) + "\n" + std::string(b) + "\n" + std::to_string(n);
    {
        std::lock_guard lock(mu_);
        if (const auto it = fragment_cache_.find(key); it != fragment_cache_.end()) return it->second;
    }
    const auto& sa = submission(a);
    const auto& sb = submission(b);
    const auto lang = config_.language_for(t.name);
    const auto fs = top_n(find_tiles(tokenize(sa, lang), tokenize(sb, lang), config_.min_match_for(t.name)), n);
    std::vector<std::string> pa, pb;
    for (const auto& f : sa.files) pa.push_back(f.relative_path);
    for (const auto& f : sb.files) pb.push_back(f.relative_path);
    auto body = to_json(fs, pa, pb).dump();
    std::lock_guard lock(mu_);
    fragment_cache_[key] = body;
    return body;
}

ApiResponse Api::handle(std::string_view path, const QueryParams& query) const {
    try {
        const auto seg = split_path(path);
        if (seg.empty() || seg[0] != "api") not_found("unknown_route", "no route for '" + std::string(path) + "'");
        const std::string route = seg.size() > 1 ? seg[1] : "";

        if (route == "report" && seg.size() == 2) return json_response(summary());
        if (route == "tokens" && seg.size() == 2) return json_response(token_table_json());

        if (route == "matrix" && seg.size() == 3) return json_response(test(seg[2]).matrix.to_json());

        if (route == "histogram" && seg.size() == 3) {
            const auto& t = test(seg[2]);
            const auto bins = param(query, "bins") ? parse_count("bins", *param(query, "bins")) : kDefaultBins;
            if (bins < 2) bad_request("'bins' must be at least 2");
            if (const auto row = param(query, "row")) {
                if (!t.matrix.index_of(*row)) not_found("unknown_id", "no submission '" + *row + "'");
                return json_response(to_json(row_histogram(t.matrix, *row, bins)));
            }
            return json_response(to_json(global_histogram(t.matrix, bins)));
        }

        if (route == "graph" && seg.size() == 3) {
            const auto& t = test(seg[2]);
            double threshold = default_threshold(t);
            if (const auto v = param(query, "threshold")) threshold = parse_real("threshold", *v);
            if (threshold < 0.0 || threshold > 1.0) bad_request("'threshold' must lie in [0,1]");
            if (const auto focus = param(query, "focus")) {
                if (!t.matrix.index_of(*focus)) not_found("unknown_id", "no submission '" + *focus + "'");
                const auto hops = param(query, "hops") ? parse_count("hops", *param(query, "hops")) : 1;
                return json_response(to_json(threshold_graph(t.matrix, threshold, *focus, hops), t.matrix.ids()));
            }
            return json_response(to_json(threshold_graph(t.matrix, threshold), t.matrix.ids()));
        }

        if (route == "dendrogram" && seg.size() == 3) {
            const auto& t = test(seg[2]);
            auto linkage = t.dendrogram.linkage;
            if (const auto v = param(query, "linkage")) {
                try {
                    linkage = parse_linkage(*v);
                } catch (const ConfigError& e) {
                    bad_request(e.what());
                }
            }
            if (linkage == t.dendrogram.linkage) return json_response(to_json(t.dendrogram, t.matrix.ids()));
            return json_response(to_json(dendrogram(t.matrix, linkage), t.matrix.ids()));
        }

        if (route == "flags" && seg.size() == 3) {
            const auto& t = test(seg[2]);
            Scenario scenario = Scenario::A;
            if (const auto v = param(query, "scenario")) {
                if (*v == "A") scenario = Scenario::A;
                else if (*v == "B") scenario = Scenario::B;
                else bad_request("'scenario' must be A or B");
            }
            double alpha = kDefaultAlpha;
            if (const auto v = param(query, "alpha")) alpha = parse_real("alpha", *v);
            if (!(alpha > 0.0 && alpha < 1.0)) bad_request("'alpha' must lie in (0,1)");
            if (const auto* f = t.find_flags(scenario, alpha)) return json_response(to_json(*f, t.matrix.ids()));
            const auto n = t.matrix.size();
            if (scenario == Scenario::A ? pair_count(n) < 3 : n < 4)
                not_found("ensemble_too_small", "the ensemble is too small for this scenario");
            const auto p = config_.hampel(alpha);
            const auto report = scenario == Scenario::A ? flag_scenario_a(t.matrix, p, cache_)
                                                        : flag_scenario_b(t.matrix, p, cache_);
            return json_response(to_json(report, t.matrix.ids()));
        }

        if (route == "pair" && seg.size() == 5) {
            const auto& t = test(seg[2]);
            for (const auto* id : {&seg[3], &seg[4]})
                if (!t.matrix.index_of(*id)) not_found("unknown_id", "no submission '" + *id + "'");
            const auto n = param(query, "n") ? parse_count("n", *param(query, "n")) : kDefaultFragments;
            if (n < 1) bad_request("'n' must be at least 1");
            return {200, "application/json", fragments(t, seg[3], seg[4], n)};
        }

        if (route == "source" && seg.size() >= 4) {
            const auto& sub = submission(seg[2]);
            std::string rel = seg[3];
            for (std::size_t k = 4; k < seg.size(); ++k) rel += "/" + seg[k];
            // only paths the scan produced are served; nothing is read from disk here
            for (const auto& f : sub.files)
                if (f.relative_path == rel) return {200, "text/plain; charset=utf-8", decode_utf8_lossy(f.bytes)};
            not_found("unknown_path", "no file '" + rel + "' in submission '" + sub.id + "'");
        }

        not_found("unknown_route", "no route for '" + std::string(path) + "'");
    } catch (const ApiError& e) {
        return error_response(e.status(), e.code(), e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

struct HttpServer::Impl {
    const Api& api;
    httplib::Server http;
    explicit Impl(const Api& a) : api(a) {}
};

HttpServer::HttpServer(const Api& api) : impl_(std::make_unique<Impl>(api)) {
    auto& http = impl_->http;
    http.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(std::string(kIndexPage), "text/html; charset=utf-8");
    });
    http.Get(R"(/api(/.*)?)", [this](const httplib::Request& req, httplib::Response& res) {
        QueryParams query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        const auto r = impl_->api.handle(req.path, query);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    int bound = -1;
    if (port == 0) {
        bound = impl_->http.bind_to_any_port(host);
    } else if (impl_->http.bind_to_port(host, port)) {
        bound = port;
    }
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { impl_->http.listen_after_bind(); }

void HttpServer::stop() { impl_->http.stop(); }

}  // namespace simdetect
