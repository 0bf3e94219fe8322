#include "simdetect/session.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "simdetect/errors.hpp"
#include "simdetect/fragments.hpp"

namespace simdetect {

namespace {

using nlohmann::json;

template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(stage + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(stage + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(stage + ": " + e.what());
    } catch (const AnalysisError& e) {
        throw AnalysisError(stage + ": " + e.what());
    }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

CompressorId compressor_from_json(const json& j) {
    if (j.is_string()) return CompressorId::parse(j.get<std::string>(), 9);
    reject_unknown_keys(j, {"name", "level"}, "compressor");
    return CompressorId::parse(j.value("name", "deflate"), j.value("level", 9));
}

json compressor_to_json(const CompressorId& c) {
    return {{"name", c.name()}, {"level", c.level}};
}

bool is_compression(const std::string& algorithm) { return algorithm == "ncd_raw" || algorithm == "ncd_tokens"; }

const AlgorithmSpec* find_spec(const AnalysisConfig& c, const std::string& test) {
    for (const auto& a : c.algorithms)
        if (a.test_name() == test) return &a;
    return nullptr;
}

}  // namespace

std::string AlgorithmSpec::test_name() const {
    if (name == "variance") return "variance_" + base.value_or("");
    return name;
}

AnalysisConfig AnalysisConfig::from_json(const json& j) {
    try {
        if (!j.is_object()) throw ConfigError("analysis config must be a JSON object");
        reject_unknown_keys(j,
                            {"selection", "content", "algorithms", "alphas", "compressor", "language", "seed",
                             "replicates", "min_match_length", "bins", "linkage", "workers", "max_archive_depth",
                             "max_file_size", "record_timings"},
                            "analysis config");
        AnalysisConfig c;
        if (j.contains("selection") && !j["selection"].is_null()) c.selection = FilterQuery::from_json(j["selection"]);
        if (j.contains("content") && !j["content"].is_null()) c.content = FilterQuery::from_json(j["content"]);
        if (j.contains("compressor")) c.compressor = compressor_from_json(j["compressor"]);
        if (j.contains("language")) c.language = parse_language(j["language"].get<std::string>());
        if (j.contains("algorithms")) {
            c.algorithms.clear();
            for (const auto& a : j["algorithms"]) {
                AlgorithmSpec s;
                if (a.is_string()) {
                    s.name = a.get<std::string>();
                } else {
                    reject_unknown_keys(a, {"name", "base", "alpha_row", "language", "compressor"}, "algorithm");
                    s.name = a.at("name").get<std::string>();
                    if (a.contains("base")) s.base = a["base"].get<std::string>();
                    if (a.contains("alpha_row")) s.alpha_row = a["alpha_row"].get<double>();
                    if (a.contains("language")) s.language = parse_language(a["language"].get<std::string>());
                    if (a.contains("compressor")) s.compressor = compressor_from_json(a["compressor"]);
                }
                c.algorithms.push_back(std::move(s));
            }
        }
        if (j.contains("alphas")) c.alphas = j["alphas"].get<std::vector<double>>();
        c.seed = j.value("seed", c.seed);
        c.replicates = j.value("replicates", c.replicates);
        if (j.contains("min_match_length") && !j["min_match_length"].is_null())
            c.min_match_length = j["min_match_length"].get<std::size_t>();
        c.bins = j.value("bins", c.bins);
        if (j.contains("linkage")) c.linkage = parse_linkage(j["linkage"].get<std::string>());
        c.workers = j.value("workers", c.workers);
        c.scan.max_archive_depth = j.value("max_archive_depth", c.scan.max_archive_depth);
        c.scan.max_file_size = j.value("max_file_size", c.scan.max_file_size);
        c.record_timings = j.value("record_timings", c.record_timings);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed analysis config: ") + e.what());
    }
}

AnalysisConfig AnalysisConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

json AnalysisConfig::to_json() const {
    json algos = json::array();
    for (const auto& a : algorithms) {
        json ja{{"name", a.name}};
        if (a.base) ja["base"] = *a.base;
        if (a.name == "variance") ja["alpha_row"] = a.alpha_row;
        if (a.language) ja["language"] = simdetect::to_string(*a.language);
        if (a.compressor) ja["compressor"] = compressor_to_json(*a.compressor);
        algos.push_back(std::move(ja));
    }
    json j{{"algorithms", std::move(algos)},
           {"alphas", alphas},
           {"compressor", compressor_to_json(compressor)},
           {"language", simdetect::to_string(language)},
           {"seed", seed},
           {"replicates", replicates},
           {"min_match_length", min_match_length ? json(*min_match_length) : json(nullptr)},
           {"bins", bins},
           {"linkage", simdetect::to_string(linkage)},
           {"max_archive_depth", scan.max_archive_depth},
           {"max_file_size", scan.max_file_size}};
    j["selection"] = selection ? selection->to_json() : json(nullptr);
    j["content"] = content ? content->to_json() : json(nullptr);
    // workers and record_timings do not influence results, so they are not echoed
    return j;
}

void AnalysisConfig::validate() const {
    if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
    std::set<std::string> names;
    for (const auto& a : algorithms) {
        if (a.name == "variance") {
            if (!a.base) throw ConfigError("variance test needs a base algorithm");
            const auto* base = find_spec(*this, *a.base);
            if (!base || base->name == "variance")
                throw ConfigError("variance base '" + *a.base + "' is not a listed algorithm");
            if (!(a.alpha_row > 0.0 && a.alpha_row < 1.0)) throw ConfigError("alpha_row must lie in (0,1)");
        } else {
            parse_algorithm(a.name);
            if (a.base) throw ConfigError("only variance tests take a base");
        }
        if (!names.insert(a.test_name()).second) throw ConfigError("duplicate test '" + a.test_name() + "'");
    }
    if (alphas.empty()) throw ConfigError("at least one alpha is required");
    for (double a : alphas) hampel(a).validate();
    if (min_match_length && *min_match_length < 3) throw ConfigError("min_match_length must be at least 3");
    if (bins < 2) throw ConfigError("bins must be at least 2");
    if (workers == 0) throw ConfigError("workers must be at least 1");
    if (scan.max_archive_depth < 0) throw ConfigError("max_archive_depth must be nonnegative");
}

HampelParams AnalysisConfig::hampel(double alpha) const { return HampelParams{alpha, replicates, seed}; }

Language AnalysisConfig::language_for(const std::string& test) const {
    const auto* spec = find_spec(*this, test);
    if (spec && spec->name == "variance") spec = find_spec(*this, *spec->base);
    if (!spec) return language;
    if (spec->name == "ncd_raw") return Language::Raw;
    return spec->language.value_or(language);
}

std::size_t AnalysisConfig::min_match_for(const std::string& test) const {
    return min_match_length.value_or(default_min_match(language_for(test)));
}

const FlagReport* TestResult::find_flags(Scenario s, double alpha) const {
    for (const auto& f : flags)
        if (f.scenario == s && f.alpha == alpha) return &f;
    return nullptr;
}

const std::vector<std::string>& AnalysisReport::ids() const {
    static const std::vector<std::string> none;
    return tests.empty() ? none : tests.front().matrix.ids();
}

const TestResult* AnalysisReport::find_test(std::string_view name) const {
    for (const auto& t : tests)
        if (t.name == name) return &t;
    return nullptr;
}

ScanResult load_corpus(const AnalysisConfig& config, const std::filesystem::path& root) {
    ScanResult corpus = in_stage("scan", [&] { return scan(root, config.selection, config.scan); });
    if (config.content) {
        in_stage("prune", [&] {
            for (auto& s : corpus.submissions) s = prune(s, *config.content);
            return 0;
        });
    }
    return corpus;
}

AnalysisReport analyze(const AnalysisConfig& config, const ScanResult& corpus, CriticalValueTable* cache) {
    using Clock = std::chrono::steady_clock;
    config.validate();
    const auto& subs = corpus.submissions;
    const std::size_t n = subs.size();
    if (n < 2) throw AnalysisError("need at least 2 submissions, found " + std::to_string(n));

    AnalysisReport r;
    r.config = config.to_json();
    r.warnings = corpus.warnings;
    for (const auto& s : subs) {
        SubmissionSummary sum{s.id, s.origin, {}};
        for (const auto& f : s.files) sum.files.push_back({f.relative_path, f.size()});
        r.submissions.push_back(std::move(sum));
    }
    json timings = json::object();

    auto timed = [&](const std::string& key, auto&& fn) {
        const auto start = Clock::now();
        auto out = fn();
        timings[key] = std::chrono::duration<double>(Clock::now() - start).count();
        return out;
    };

    std::map<std::string, DistanceMatrix> matrices;
    for (const auto& spec : config.algorithms) {
        if (spec.name == "variance") continue;
        const auto algorithm = parse_algorithm(spec.name);
        MatrixParams params{spec.compressor.value_or(config.compressor), spec.language.value_or(config.language),
                            config.workers};
        const auto test = spec.test_name();
        matrices[test] = in_stage("metric " + test, [&] {
            return timed("metric " + test, [&] { return build_matrix(subs, algorithm, params); });
        });
        if (is_compression(spec.name) && params.compressor.backend == Backend::Deflate) {
            for (const auto& s : subs) {
                const auto bytes = metric_payload(s, algorithm, params.language).size();
                if (bytes > kDeflateWindow)
                    r.warnings.push_back(test + ": payload of '" + s.id + "' is " + std::to_string(bytes) +
                                         " bytes, beyond the 32 KiB deflate window; consider the block_sort "
                                         "compressor");
            }
        }
    }

    for (const auto& spec : config.algorithms) {
        const auto test = spec.test_name();
        TestResult t;
        t.name = test;
        t.algorithm = spec.name;
        if (spec.name == "variance") {
            t.base = spec.base;
            t.alpha_row = spec.alpha_row;
            if (n < 4) {
                r.notices.push_back(test + ": skipped, the variance subtest needs at least 4 submissions");
                continue;
            }
            t.matrix = in_stage("variance " + test, [&] {
                return timed("variance " + test, [&] {
                    auto m = variance_subtest(matrices.at(*spec.base), spec.alpha_row, config.hampel(spec.alpha_row),
                                              cache, config.workers);
                    m.rename(test);
                    return m;
                });
            });
        } else {
            t.matrix = matrices.at(test);
            if (is_compression(spec.name)) {
                const auto c = spec.compressor.value_or(config.compressor);
                t.compressor = c.name() + "-" + std::to_string(c.level);
                t.compressor_version = c.version();
            }
            if (spec.name != "ncd_raw") t.language = simdetect::to_string(spec.language.value_or(config.language));
        }

        in_stage("flags " + test, [&] {
            for (double alpha : config.alphas) {
                const auto p = config.hampel(alpha);
                if (pair_count(n) >= 3) {
                    t.flags.push_back(flag_scenario_a(t.matrix, p, cache, config.workers));
                } else {
                    r.notices.push_back(test + ": scenario A skipped at alpha " + json(alpha).dump() +
                                        ", it needs at least 3 pairwise distances");
                }
                if (n >= 4) {
                    t.flags.push_back(flag_scenario_b(t.matrix, p, cache, config.workers));
                } else {
                    r.notices.push_back(test + ": scenario B skipped at alpha " + json(alpha).dump() +
                                        ", it needs at least 4 submissions");
                }
            }
            return 0;
        });
        in_stage("structure " + test, [&] {
            t.histogram = global_histogram(t.matrix, config.bins);
            t.dendrogram = dendrogram(t.matrix, config.linkage);
            return 0;
        });
        r.tests.push_back(std::move(t));
    }
    if (config.record_timings) r.timings = std::move(timings);
    return r;
}

AnalysisReport run(const AnalysisConfig& config, const std::filesystem::path& root, CriticalValueTable* cache) {
    const auto corpus = load_corpus(config, root);
    return analyze(config, corpus, cache);
}

json to_json(const AnalysisReport& r) {
    json subs = json::array();
    for (const auto& s : r.submissions) {
        json files = json::array();
        for (const auto& f : s.files) files.push_back({{"path", f.path}, {"size", f.size}});
        subs.push_back({{"id", s.id}, {"origin", s.origin}, {"files", std::move(files)}});
    }
    json tests = json::array();
    for (const auto& t : r.tests) {
        const auto& ids = t.matrix.ids();
        json jt{{"name", t.name}, {"algorithm", t.algorithm}, {"matrix", t.matrix.to_json()}};
        if (t.base) jt["base"] = *t.base;
        if (t.alpha_row) jt["alpha_row"] = *t.alpha_row;
        if (t.compressor) jt["compressor"] = *t.compressor;
        if (t.compressor_version) jt["compressor_version"] = *t.compressor_version;
        if (t.language) jt["language"] = *t.language;
        json flags = json::array();
        for (const auto& f : t.flags) flags.push_back(to_json(f, ids));
        jt["flags"] = std::move(flags);
        jt["histogram"] = to_json(t.histogram);
        jt["dendrogram"] = to_json(t.dendrogram, ids);
        tests.push_back(std::move(jt));
    }
    json j{{"schema_version", r.schema_version},
           {"config", r.config},
           {"submissions", std::move(subs)},
           {"warnings", r.warnings},
           {"notices", r.notices},
           {"tests", std::move(tests)}};
    if (r.timings) j["timings"] = *r.timings;
    return j;
}

AnalysisReport report_from_json(const json& j) {
    try {
        if (!j.is_object() || !j.contains("schema_version")) throw FormatError("not an analysis report");
        const int version = j.at("schema_version").get<int>();
        if (version != kSchemaVersion)
            throw FormatError("unsupported report version " + std::to_string(version) + " (expected " +
                              std::to_string(kSchemaVersion) + ")");
        AnalysisReport r;
        r.schema_version = version;
        r.config = j.at("config");
        for (const auto& s : j.at("submissions")) {
            SubmissionSummary sum{s.at("id").get<std::string>(), s.at("origin").get<std::string>(), {}};
            for (const auto& f : s.at("files"))
                sum.files.push_back({f.at("path").get<std::string>(), f.at("size").get<std::size_t>()});
            r.submissions.push_back(std::move(sum));
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        r.notices = j.at("notices").get<std::vector<std::string>>();
        std::vector<std::string> expected_ids;
        for (const auto& s : r.submissions) expected_ids.push_back(s.id);
        for (const auto& jt : j.at("tests")) {
            TestResult t;
            t.name = jt.at("name").get<std::string>();
            t.algorithm = jt.at("algorithm").get<std::string>();
            if (jt.contains("base")) t.base = jt["base"].get<std::string>();
            if (jt.contains("alpha_row")) t.alpha_row = jt["alpha_row"].get<double>();
            if (jt.contains("compressor")) t.compressor = jt["compressor"].get<std::string>();
            if (jt.contains("compressor_version")) t.compressor_version = jt["compressor_version"].get<std::string>();
            if (jt.contains("language")) t.language = jt["language"].get<std::string>();
            t.matrix = DistanceMatrix::from_json(jt.at("matrix"));
            if (t.matrix.ids() != expected_ids) throw FormatError("test '" + t.name + "' has a different id list");
            for (const auto& f : jt.at("flags")) t.flags.push_back(flag_report_from_json(f, t.matrix));
            const auto& h = jt.at("histogram");
            t.histogram.bins = h.at("bins").get<std::size_t>();
            t.histogram.counts = h.at("counts").get<std::vector<std::size_t>>();
            t.histogram.total = h.at("total").get<std::size_t>();
            t.dendrogram = dendrogram_from_json(jt.at("dendrogram"), t.matrix);
            r.tests.push_back(std::move(t));
        }
        if (j.contains("timings")) r.timings = j["timings"];
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed report: ") + e.what());
    } catch (const AnalysisError& e) {
        throw FormatError(std::string("malformed report: ") + e.what());
    }
}

void save(const AnalysisReport& r, const std::filesystem::path& path) {
    const auto text = to_json(r).dump(1) + "\n";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("cannot write report '" + path.string() + "'");
}

AnalysisReport load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read report '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw FormatError("report '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return report_from_json(j);
}

}  // namespace simdetect
