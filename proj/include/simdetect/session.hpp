#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simdetect/compress.hpp"
#include "simdetect/corpus.hpp"
#include "simdetect/filter.hpp"
#include "simdetect/lexer.hpp"
#include "simdetect/metrics.hpp"
#include "simdetect/outliers.hpp"
#include "simdetect/structure.hpp"

namespace simdetect {

inline constexpr int kSchemaVersion = 1;

/// One requested distance test. `name` is ncd_raw, ncd_tokens, token_count
/// or variance; a variance test refines the matrix of `base`.
struct AlgorithmSpec {
    std::string name = "ncd_tokens";
    std::optional<std::string> base;
    double alpha_row = 0.05;
    std::optional<Language> language;         // defaults to the config language
    std::optional<CompressorId> compressor;  // defaults to the config compressor

    /// Matrix name in the report: the algorithm, or "variance_<base>".
    [[nodiscard]] std::string test_name() const;

    friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

/// Contents of analysis.json. Every key is optional.
struct AnalysisConfig {
    std::optional<FilterQuery> selection;
    std::optional<FilterQuery> content;
    std::vector<AlgorithmSpec> algorithms{AlgorithmSpec{}};
    std::vector<double> alphas{0.01, 0.05};  // flag reports are produced for each
    CompressorId compressor;
    Language language = Language::CLike;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t replicates = 100000;
    std::optional<std::size_t> min_match_length;
    std::size_t bins = kDefaultBins;
    Linkage linkage = Linkage::Average;
    unsigned workers = 1;
    ScanOptions scan;
    bool record_timings = false;  // timings make reports differ run to run

    /// Throws ConfigError on unknown keys, bad values or dangling bases.
    static AnalysisConfig from_json(const nlohmann::json& j);
    static AnalysisConfig load(const std::filesystem::path& path);
    [[nodiscard]] nlohmann::json to_json() const;
    void validate() const;

    [[nodiscard]] HampelParams hampel(double alpha) const;
    /// Tokenization used by fragments for one test of this config.
    [[nodiscard]] Language language_for(const std::string& test) const;
    [[nodiscard]] std::size_t min_match_for(const std::string& test) const;
};

struct FileSummary {
    std::string path;
    std::size_t size = 0;

    friend bool operator==(const FileSummary&, const FileSummary&) = default;
};

struct SubmissionSummary {
    std::string id;
    std::string origin;
    std::vector<FileSummary> files;

    friend bool operator==(const SubmissionSummary&, const SubmissionSummary&) = default;
};

struct TestResult {
    std::string name;
    std::string algorithm;
    std::optional<std::string> base;
    std::optional<double> alpha_row;        // variance tests
    std::optional<std::string> compressor;  // compression tests: "deflate-9"
    std::optional<std::string> compressor_version;
    std::optional<std::string> language;    // tokenized tests
    DistanceMatrix matrix;
    std::vector<FlagReport> flags;  // per alpha: scenario A then B, when the ensemble allows
    Histogram histogram;
    Dendrogram dendrogram;

    [[nodiscard]] const FlagReport* find_flags(Scenario s, double alpha) const;

    friend bool operator==(const TestResult&, const TestResult&) = default;
};

struct AnalysisReport {
    int schema_version = kSchemaVersion;
    nlohmann::json config;  // canonical echo of the AnalysisConfig
    std::vector<SubmissionSummary> submissions;
    std::vector<std::string> warnings;
    std::vector<std::string> notices;
    std::vector<TestResult> tests;
    std::optional<nlohmann::json> timings;

    [[nodiscard]] const std::vector<std::string>& ids() const;
    [[nodiscard]] const TestResult* find_test(std::string_view name) const;

    friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

/// Scan, filter and prune the corpus as the config describes.
ScanResult load_corpus(const AnalysisConfig& config, const std::filesystem::path& root);

/// The analysis over an already-loaded corpus.
AnalysisReport analyze(const AnalysisConfig& config, const ScanResult& corpus, CriticalValueTable* cache = nullptr);

/// load_corpus + analyze. Errors keep their type and gain the failing stage
/// as a message prefix.
AnalysisReport run(const AnalysisConfig& config, const std::filesystem::path& root,
                   CriticalValueTable* cache = nullptr);

nlohmann::json to_json(const AnalysisReport& r);
/// FormatError on malformed input, including "unsupported report version".
AnalysisReport report_from_json(const nlohmann::json& j);

void save(const AnalysisReport& r, const std::filesystem::path& path);
AnalysisReport load(const std::filesystem::path& path);

}  // namespace simdetect
