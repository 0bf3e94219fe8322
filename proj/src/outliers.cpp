#include "simdetect/outliers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "simdetect/errors.hpp"
#include "simdetect/random.hpp"

namespace simdetect {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Median of `v` (reordered in place).
double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return (lo + hi) / 2.0;
}

RobustStats stats_inplace(std::vector<double>& v) {
    RobustStats s;
    s.n = v.size();
    s.median = median_inplace(v);
    for (double& x : v) x = std::fabs(x - s.median);
    s.mad = median_inplace(v);
    return s;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Score of one value against (M, S) for lower outliers; the degenerate-MAD
// rule gives +inf strictly below the median and 0 otherwise.
double lower_score(double x, const RobustStats& s) {
    if (s.mad > 0.0) return (s.median - x) / s.mad;
    return x < s.median ? kInf : 0.0;
}

void sort_flags(FlagReport& r) {
    std::sort(r.flags.begin(), r.flags.end(), [](const Flag& a, const Flag& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.i != b.i) return a.i < b.i;
        if (a.j != b.j) return a.j < b.j;
        return a.row.value_or(0) < b.row.value_or(0);
    });
    r.pairs.clear();
    for (const auto& f : r.flags) {
        const std::pair p{f.i, f.j};
        if (std::find(r.pairs.begin(), r.pairs.end(), p) == r.pairs.end()) r.pairs.push_back(p);
    }
}

}  // namespace

void HampelParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie strictly between 0 and 1");
    if (replicates < 10000) throw ConfigError("at least 10000 Monte Carlo replicates are required");
}

RobustStats robust_stats(std::span<const double> sample) {
    if (sample.size() < 3) throw AnalysisError("sample too small for robust statistics");
    std::vector<double> v(sample.begin(), sample.end());
    return stats_inplace(v);
}

double max_standardized_deviation(std::span<const double> sample) {
    const auto s = robust_stats(sample);
    double worst = 0.0;
    for (double x : sample) worst = std::max(worst, std::fabs(x - s.median));
    if (s.mad > 0.0) return worst / s.mad;
    return worst > 0.0 ? kInf : 0.0;
}

// ---------------------------------------------------------------------------

CriticalValueTable::CriticalValueTable(const CriticalValueTable& other) {
    std::lock_guard lock(other.mu_);
    entries_ = other.entries_;
}

CriticalValueTable& CriticalValueTable::operator=(const CriticalValueTable& other) {
    if (this != &other) {
        auto copy = other.entries();
        std::lock_guard lock(mu_);
        entries_ = std::move(copy);
    }
    return *this;
}

std::string CriticalValueTable::key(std::size_t n, const HampelParams& p) {
    return std::to_string(n) + "," + format_double(p.alpha) + "," + std::to_string(p.replicates) + "," +
           std::to_string(p.seed);
}

std::optional<double> CriticalValueTable::find(std::size_t n, const HampelParams& p) const {
    std::lock_guard lock(mu_);
    const auto it = entries_.find(key(n, p));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void CriticalValueTable::put(std::size_t n, const HampelParams& p, double g) {
    std::lock_guard lock(mu_);
    entries_[key(n, p)] = g;
}

std::size_t CriticalValueTable::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::map<std::string, double> CriticalValueTable::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

nlohmann::json CriticalValueTable::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : entries()) j[k] = v;
    return j;
}

void CriticalValueTable::merge(const CriticalValueTable& other) {
    const auto incoming = other.entries();
    std::lock_guard lock(mu_);
    for (const auto& [k, g] : incoming) entries_[k] = g;
}

CriticalValueTable CriticalValueTable::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("critical-value table must be a JSON object");
    CriticalValueTable t;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw FormatError("critical value for '" + k + "' is not a number");
        t.entries_[k] = v.get<double>();
    }
    return t;
}

CriticalValueTable CriticalValueTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return {};
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("cannot parse critical-value table '" + path.string() + "': " + e.what());
    }
}

void CriticalValueTable::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write critical-value table '" + path.string() + "'");
    out << to_json().dump(2) << "\n";
}

// ---------------------------------------------------------------------------

double simulate_critical(std::size_t n, const HampelParams& p, unsigned workers) {
    if (n < 3) throw AnalysisError("critical values need samples of at least 3 values");
    p.validate();
    const std::size_t reps = p.replicates;
    std::vector<double> stats(reps);

    auto run = [&](std::size_t begin, std::size_t end) {
        std::vector<double> sample(n), scratch(n);
        for (std::size_t r = begin; r < end; ++r) {
            Rng rng = Rng::substream(p.seed, r);
            for (;;) {
                for (double& x : sample) x = rng.normal();
                scratch = sample;
                const auto s = stats_inplace(scratch);
                if (s.mad <= 0.0) continue;  // measure-zero event; redraw
                double worst = 0.0;
                for (double x : sample) worst = std::max(worst, std::fabs(x - s.median));
                stats[r] = worst / s.mad;
                break;
            }
        }
    };

    workers = std::max(1u, workers);
    if (workers == 1 || reps < 2 * workers) {
        run(0, reps);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (reps + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t b = w * chunk, e = std::min(reps, b + chunk);
            if (b < e) pool.emplace_back(run, b, e);
        }
    }

    std::sort(stats.begin(), stats.end());
    // Smallest value whose empirical CDF reaches 1 - alpha.
    const double target = (1.0 - p.alpha) * static_cast<double>(reps);
    auto k = static_cast<std::size_t>(std::ceil(target - 1e-9));
    k = std::clamp<std::size_t>(k, 1, reps);
    return stats[k - 1];
}

double hampel_critical(std::size_t n, const HampelParams& p, CriticalValueTable* cache, unsigned workers) {
    if (cache) {
        if (auto g = cache->find(n, p)) return *g;
    }
    const double g = simulate_critical(n, p, workers);
    if (cache) cache->put(n, p, g);
    return g;
}

// ---------------------------------------------------------------------------

FlagReport flag_scenario_a(const DistanceMatrix& m, const HampelParams& p, CriticalValueTable* cache,
                           unsigned workers) {
    const std::size_t n = m.size();
    const std::size_t big_n = pair_count(n);
    if (big_n < 3) throw AnalysisError("scenario A needs at least 3 pairwise distances");
    const auto values = m.upper_triangle();
    const auto stats = robust_stats(values);

    FlagReport r;
    r.scenario = Scenario::A;
    r.alpha = p.alpha;
    r.ensemble_size = big_n;
    r.critical_value = hampel_critical(big_n, p, cache, workers);
    r.median = stats.median;
    r.mad = stats.mad;
    r.threshold_value = stats.median - r.critical_value * stats.mad;

    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j, ++k) {
            const double score = lower_score(values[k], stats);
            if (score > r.critical_value) r.flags.push_back({i, j, values[k], score, std::nullopt});
        }
    }
    sort_flags(r);
    return r;
}

FlagReport flag_scenario_b(const DistanceMatrix& m, const HampelParams& p, CriticalValueTable* cache,
                           unsigned workers) {
    const std::size_t n = m.size();
    if (n < 4) throw AnalysisError("scenario B needs at least 4 submissions");
    FlagReport r;
    r.scenario = Scenario::B;
    r.alpha = p.alpha;
    r.ensemble_size = n - 1;
    r.critical_value = hampel_critical(n - 1, p, cache, workers);

    for (std::size_t k = 0; k < n; ++k) {
        const auto row = m.row_values(k);
        const auto stats = robust_stats(row);
        r.rows.push_back({k, stats.median, stats.mad, stats.median - r.critical_value * stats.mad});
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) continue;
            const double d = m.at(k, j);
            const double score = lower_score(d, stats);
            if (score > r.critical_value) r.flags.push_back({std::min(k, j), std::max(k, j), d, score, k});
        }
    }
    sort_flags(r);
    return r;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const FlagReport& r, const std::vector<std::string>& ids) {
    using nlohmann::json;
    json flags = json::array();
    for (const auto& f : r.flags) {
        json jf = {{"a", ids.at(f.i)}, {"b", ids.at(f.j)}, {"distance", f.distance}};
        jf["score"] = std::isinf(f.score) ? json(nullptr) : json(f.score);
        if (f.row) jf["row"] = ids.at(*f.row);
        flags.push_back(std::move(jf));
    }
    json pairs = json::array();
    for (const auto& [i, j] : r.pairs) pairs.push_back({ids.at(i), ids.at(j)});
    json out = {{"scenario", r.scenario == Scenario::A ? "A" : "B"},
                {"alpha", r.alpha},
                {"ensemble_size", r.ensemble_size},
                {"critical_value", r.critical_value},
                {"flags", std::move(flags)},
                {"pairs", std::move(pairs)}};
    if (r.threshold_value) out["threshold_value"] = *r.threshold_value;
    if (r.median) out["median"] = *r.median;
    if (r.mad) out["mad"] = *r.mad;
    if (r.scenario == Scenario::B) {
        json rows = json::array();
        for (const auto& row : r.rows)
            rows.push_back({{"id", ids.at(row.row)},
                            {"median", row.median},
                            {"mad", row.mad},
                            {"threshold", row.threshold}});
        out["rows"] = std::move(rows);
    }
    return out;
}

FlagReport flag_report_from_json(const nlohmann::json& j, const DistanceMatrix& m) {
    auto index = [&](const nlohmann::json& id) {
        const auto idx = m.index_of(id.get<std::string>());
        if (!idx) throw FormatError("flag report references unknown id '" + id.get<std::string>() + "'");
        return *idx;
    };
    try {
        FlagReport r;
        const auto sc = j.at("scenario").get<std::string>();
        if (sc != "A" && sc != "B") throw FormatError("unknown scenario '" + sc + "'");
        r.scenario = sc == "A" ? Scenario::A : Scenario::B;
        r.alpha = j.at("alpha").get<double>();
        r.ensemble_size = j.at("ensemble_size").get<std::size_t>();
        r.critical_value = j.at("critical_value").get<double>();
        if (j.contains("threshold_value")) r.threshold_value = j["threshold_value"].get<double>();
        if (j.contains("median")) r.median = j["median"].get<double>();
        if (j.contains("mad")) r.mad = j["mad"].get<double>();
        for (const auto& f : j.at("flags")) {
            Flag fl;
            fl.i = index(f.at("a"));
            fl.j = index(f.at("b"));
            fl.distance = f.at("distance").get<double>();
            fl.score = f.at("score").is_null() ? kInf : f.at("score").get<double>();
            if (f.contains("row")) fl.row = index(f["row"]);
            r.flags.push_back(fl);
        }
        for (const auto& pr : j.at("pairs")) r.pairs.emplace_back(index(pr.at(0)), index(pr.at(1)));
        if (j.contains("rows"))
            for (const auto& row : j["rows"])
                r.rows.push_back({index(row.at("id")), row.at("median").get<double>(), row.at("mad").get<double>(),
                                  row.at("threshold").get<double>()});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed flag report: ") + e.what());
    }
}

}  // namespace simdetect
