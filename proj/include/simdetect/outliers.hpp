#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simdetect/distance_matrix.hpp"

namespace simdetect {

/// Seed used for critical values unless a caller overrides it.
inline constexpr std::uint64_t kDefaultSeed = 20081017;

struct HampelParams {
    double alpha = 0.05;
    std::uint64_t replicates = 100000;
    std::uint64_t seed = kDefaultSeed;

    /// alpha in (0,1), replicates >= 10^4; throws ConfigError otherwise.
    void validate() const;
};

/// Median M and median absolute deviation S (unscaled) of a sample.
struct RobustStats {
    double median = 0.0;
    double mad = 0.0;
    std::size_t n = 0;
};

/// Even-sized samples use the mean of the two middle order statistics.
/// Throws AnalysisError for fewer than three values.
RobustStats robust_stats(std::span<const double> sample);

/// Largest standardized deviation max_i |x_i - M| / S of one sample
/// (+inf when S == 0 and some value differs from M, 0 when all are equal).
double max_standardized_deviation(std::span<const double> sample);

/// Persistent cache of Monte Carlo critical values keyed by
/// "n,alpha,replicates,seed". Safe for concurrent use.
class CriticalValueTable {
public:
    CriticalValueTable() = default;
    CriticalValueTable(const CriticalValueTable& other);
    CriticalValueTable& operator=(const CriticalValueTable& other);

    static std::string key(std::size_t n, const HampelParams& p);

    std::optional<double> find(std::size_t n, const HampelParams& p) const;
    void put(std::size_t n, const HampelParams& p, double g);
    /// Copies every entry of `other`, overwriting equal keys.
    void merge(const CriticalValueTable& other);
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::map<std::string, double> entries() const;

    [[nodiscard]] nlohmann::json to_json() const;
    static CriticalValueTable from_json(const nlohmann::json& j);
    /// Missing file -> empty table; malformed file -> FormatError.
    static CriticalValueTable load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    mutable std::mutex mu_;
    std::map<std::string, double> entries_;
};

/// Monte Carlo estimate of g(n, alpha): the (1 - alpha) empirical quantile of
/// max|x - M|/S over `replicates` standard normal samples of size n.
/// Replicate r draws from Rng::substream(seed, r), so the value does not
/// depend on `workers`.
double simulate_critical(std::size_t n, const HampelParams& p, unsigned workers = 1);

/// Cached lookup of simulate_critical(); computes and stores on a miss.
double hampel_critical(std::size_t n, const HampelParams& p, CriticalValueTable* cache = nullptr,
                       unsigned workers = 1);

enum class Scenario { A, B };

struct Flag {
    std::size_t i = 0;  // i < j, indices into the matrix ids
    std::size_t j = 0;
    double distance = 0.0;
    double score = 0.0;               // (M - D)/S; +inf under the degenerate-MAD rule
    std::optional<std::size_t> row;  // flagging row (scenario B)

    friend bool operator==(const Flag&, const Flag&) = default;
};

struct RowThreshold {
    std::size_t row = 0;
    double median = 0.0;
    double mad = 0.0;
    double threshold = 0.0;  // M_k - g * S_k

    friend bool operator==(const RowThreshold&, const RowThreshold&) = default;
};

struct FlagReport {
    Scenario scenario = Scenario::A;
    double alpha = 0.05;
    std::size_t ensemble_size = 0;  // N used for g(N, alpha)
    double critical_value = 0.0;
    // Scenario A only.
    std::optional<double> threshold_value;
    std::optional<double> median;
    std::optional<double> mad;
    std::vector<Flag> flags;                                  // ascending distance
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // de-duplicated flags, same order
    std::vector<RowThreshold> rows;                           // scenario B only

    friend bool operator==(const FlagReport&, const FlagReport&) = default;
};

/// Outliers over the whole upper triangle; needs n(n-1)/2 >= 3.
FlagReport flag_scenario_a(const DistanceMatrix& m, const HampelParams& p, CriticalValueTable* cache = nullptr,
                           unsigned workers = 1);

/// Outliers within each row's n-1 off-diagonal distances; needs n >= 4.
FlagReport flag_scenario_b(const DistanceMatrix& m, const HampelParams& p, CriticalValueTable* cache = nullptr,
                           unsigned workers = 1);

/// Ids are needed to render pair and row names.
nlohmann::json to_json(const FlagReport& r, const std::vector<std::string>& ids);
FlagReport flag_report_from_json(const nlohmann::json& j, const DistanceMatrix& m);

}  // namespace simdetect
