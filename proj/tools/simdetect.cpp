// Command-line front end: scan, analyze, pair, synth, calibrate, serve, tokens.
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "simdetect/cache.hpp"
#include "simdetect/corpus.hpp"
#include "simdetect/errors.hpp"
#include "simdetect/fragments.hpp"
#include "simdetect/lexer.hpp"
#include "simdetect/server.hpp"
#include "simdetect/session.hpp"
#include "simdetect/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace simdetect;

namespace {

AnalysisConfig config_from(const std::string& path) {
    return path.empty() ? AnalysisConfig{} : AnalysisConfig::load(path);
}

std::string format_real(double v, int digits = 4) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << v;
    return out.str();
}

// ---- scan ------------------------------------------------------------------

struct ScanArgs {
    std::string root;
    std::string config;
    bool explain = false;
    bool json = false;
};

int cmd_scan(const ScanArgs& a) {
    const auto config = config_from(a.config);
    const auto result = scan(a.root, config.selection, config.scan);
    if (result.submissions.empty()) throw ConfigError("no submissions found under '" + a.root + "'");

    json subs = json::array();
    std::ostringstream text;
    for (const auto& s : result.submissions) {
        json files = json::array();
        std::size_t kept = 0;
        std::ostringstream lines;
        for (const auto& f : s.files) {
            bool accepted = true;
            std::string by;
            if (config.content) {
                const auto d = explain(*config.content, f, context_for(s, f));
                accepted = d.accepted;
                by = d.decided_by ? d.decided_by->describe() : "";
            }
            kept += accepted ? 1 : 0;
            json jf{{"path", f.relative_path}, {"size", f.size()}, {"included", accepted}};
            if (!by.empty()) jf["decided_by"] = by;
            files.push_back(std::move(jf));
            lines << "  " << (accepted ? '+' : '-') << ' ' << f.relative_path;
            if (!by.empty()) lines << "  [" << by << "]";
            lines << '\n';
        }
        subs.push_back({{"id", s.id}, {"origin", s.origin}, {"files", std::move(files)}, {"included", kept}});
        text << s.id << "  " << kept << "/" << s.files.size() << " files  (" << s.origin << ")\n";
        if (a.explain) text << lines.str();
    }
    for (const auto& w : result.warnings) text << "warning: " << w << '\n';

    if (a.json) std::cout << json{{"submissions", std::move(subs)}, {"warnings", result.warnings}}.dump(2) << '\n';
    else std::cout << text.str();
    return 0;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::string root;
    std::string config;
    std::string out;
    unsigned workers = 0;
    bool json = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
    auto config = config_from(a.config);
    if (a.workers > 0) config.workers = a.workers;
    auto table = load_critical_values();
    const auto before = table.size();
    const auto report = run(config, a.root, &table);
    save(report, a.out);
    if (table.size() != before) store_critical_values(table);

    json summary = json::array();
    for (const auto& t : report.tests) {
        json jt{{"test", t.name}};
        for (const auto& f : t.flags) {
            if (f.scenario != Scenario::A) continue;
            jt["alpha_" + json(f.alpha).dump()] = {{"threshold", f.threshold_value.value_or(0.0)},
                                                    {"flagged_pairs", f.pairs.size()}};
            if (!a.json)
                std::cout << t.name << ": scenario A threshold " << format_real(f.threshold_value.value_or(0.0))
                          << " at alpha " << f.alpha << ", " << f.pairs.size() << " flagged pairs\n";
        }
        summary.push_back(std::move(jt));
    }
    if (a.json) {
        std::cout << json{{"report", a.out}, {"submissions", report.submissions.size()}, {"tests", summary},
                          {"notices", report.notices}, {"warnings", report.warnings}}
                         .dump(2)
                  << '\n';
    } else {
        for (const auto& n : report.notices) std::cout << "notice: " << n << '\n';
        for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
        std::cout << "wrote " << a.out << '\n';
    }
    return 0;
}

// ---- pair ------------------------------------------------------------------

struct PairArgs {
    std::string report;
    std::string root;
    std::string a;
    std::string b;
    std::string test;
    std::size_t n = 5;
    bool json = false;
};

int cmd_pair(const PairArgs& p) {
    const auto report = load(p.report);
    const auto* test = p.test.empty() ? (report.tests.empty() ? nullptr : &report.tests.front())
                                      : report.find_test(p.test);
    if (!test) throw ConfigError("no test '" + p.test + "' in the report");
    for (const auto* id : {&p.a, &p.b})
        if (!test->matrix.index_of(*id)) throw ConfigError("unknown submission id '" + *id + "'");
    if (p.n < 1) throw ConfigError("--n must be at least 1");
    if (p.root.empty()) throw ConfigError("--root is required to read the submissions");

    const auto corpus = corpus_for_report(report, p.root);
    const auto config = AnalysisConfig::from_json(report.config);
    auto find = [&](const std::string& id) -> const Submission& {
        for (const auto& s : corpus.submissions)
            if (s.id == id) return s;
        throw ConfigError("unknown submission id '" + id + "'");
    };
    const auto& sa = find(p.a);
    const auto& sb = find(p.b);
    const auto lang = config.language_for(test->name);
    const auto fs = top_n(find_tiles(tokenize(sa, lang), tokenize(sb, lang), config.min_match_for(test->name)), p.n);
    std::vector<std::string> pa, pb;
    for (const auto& f : sa.files) pa.push_back(f.relative_path);
    for (const auto& f : sb.files) pb.push_back(f.relative_path);

    if (p.json) {
        std::cout << to_json(fs, pa, pb).dump(2) << '\n';
        return 0;
    }
    const auto ia = *test->matrix.index_of(p.a);
    const auto ib = *test->matrix.index_of(p.b);
    std::cout << p.a << " vs " << p.b << "  " << test->name << " distance "
              << format_real(ia == ib ? 0.0 : test->matrix.at(ia, ib)) << ", coverage " << format_real(fs.coverage)
              << '\n';
    for (std::size_t k = 0; k < fs.tiles.size(); ++k) {
        const auto& t = fs.tiles[k];
        std::cout << "tile " << k + 1 << ": " << t.length << " tokens\n"
                  << "  " << p.a << ':' << pa[t.a.file] << " bytes " << t.a.begin << '-' << t.a.end << " (tokens "
                  << t.a.start << '-' << t.a.start + t.length << ")\n"
                  << "  " << p.b << ':' << pb[t.b.file] << " bytes " << t.b.begin << '-' << t.b.end << " (tokens "
                  << t.b.start << '-' << t.b.start + t.length << ")\n";
    }
    if (fs.tiles.empty()) std::cout << "no shared fragment of at least " << fs.min_match_length << " tokens\n";
    return 0;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
    std::size_t orig = 30;
    std::size_t mut = 6;
    std::size_t rec = 8;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
    bool json = false;
};

int cmd_synth(const SynthArgs& s) {
    const auto corpus = synth::generate_corpus(s.orig, s.mut, s.rec, s.seed);
    synth::write_corpus(corpus, s.out);
    if (s.json) {
        std::cout << json{{"out", s.out}, {"submissions", corpus.submissions.size()},
                          {"edges", corpus.truth.edges.size()}}
                         .dump(2)
                  << '\n';
    } else {
        std::cout << "wrote " << corpus.submissions.size() << " submissions and ground_truth.json to " << s.out
                  << '\n';
    }
    return 0;
}

// ---- calibrate -------------------------------------------------------------

struct CalibrateArgs {
    std::vector<std::size_t> n_list{10, 50, 200};
    std::vector<double> alpha_list{0.01, 0.05};
    std::uint64_t replicates = 100000;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
    unsigned workers = 0;
    bool json = false;
};

int cmd_calibrate(const CalibrateArgs& c) {
    fs::path out;
    if (!c.out.empty()) {
        out = c.out;
    } else if (const auto user = user_table_path()) {
        out = *user;
    } else {
        throw ConfigError("no output location: pass --out or set SIMDETECT_CACHE_DIR");
    }
    const unsigned workers = c.workers > 0 ? c.workers : std::max(1u, std::thread::hardware_concurrency());
    auto table = CriticalValueTable::load(out);
    json values = json::array();
    for (auto n : c.n_list) {
        if (n < 3) throw ConfigError("sample sizes must be at least 3");
        for (double alpha : c.alpha_list) {
            const HampelParams p{alpha, c.replicates, c.seed};
            p.validate();
            const double g = hampel_critical(n, p, &table, workers);
            values.push_back({{"n", n}, {"alpha", alpha}, {"g", g}});
            if (!c.json) std::cout << "g(" << n << ", " << alpha << ") = " << format_real(g, 6) << '\n';
        }
    }
    table.save(out);
    if (c.json) std::cout << json{{"table", out.string()}, {"values", std::move(values)}}.dump(2) << '\n';
    else std::cout << "wrote " << out.string() << '\n';
    return 0;
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
    std::string report;
    std::string root;
    std::string host = "127.0.0.1";
    int port = 8080;
};

HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const ServeArgs& s) {
    auto report = load(s.report);
    std::optional<ScanResult> corpus;
    if (!s.root.empty()) corpus = corpus_for_report(report, s.root);
    auto table = load_critical_values();
    const Api api(std::move(report), std::move(corpus), &table);
    HttpServer server(api);
    const int port = server.bind(s.host, s.port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << s.host << ':' << port << '/' << std::endl;
    server.listen();
    g_server = nullptr;
    return 0;
}

// ---- tokens ----------------------------------------------------------------

struct TokensArgs {
    std::vector<std::string> files;
    std::string language = "c_like";
    bool table = false;
};

int cmd_tokens(const TokensArgs& t) {
    if (t.table) {
        std::cout << token_table_json().dump(2) << '\n';
        return 0;
    }
    if (t.files.empty()) throw ConfigError("pass files to tokenize or --table");
    const auto lang = parse_language(t.language);
    for (const auto& path : t.files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        Submission sub;
        sub.id = path;
        sub.files.push_back({fs::path(path).filename().string(), buf.str(), {}});
        const auto ts = tokenize(sub, lang);
        std::cout << path << ": " << ts.tokens.size() << " tokens";
        if (ts.unknown_count > 0) std::cout << ", " << ts.unknown_count << " unknown";
        std::cout << '\n';
        for (std::size_t k = 0; k < ts.tokens.size(); ++k)
            std::cout << (k % 16 == 0 ? "  " : " ") << token_name(ts.tokens[k], lang)
                      << (k % 16 == 15 || k + 1 == ts.tokens.size() ? "\n" : "");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Source-code similarity analysis"};
    app.require_subcommand(1);

    ScanArgs scan_args;
    auto* scan_cmd = app.add_subcommand("scan", "List submissions and per-file filter decisions");
    scan_cmd->add_option("--root", scan_args.root, "Corpus root directory")->required();
    scan_cmd->add_option("--config", scan_args.config, "analysis.json with selection/content filters");
    scan_cmd->add_flag("--explain", scan_args.explain, "List every file with the atom that decided it");
    scan_cmd->add_flag("--json", scan_args.json, "Machine-readable output");

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "Run the analysis pipeline and write a report");
    analyze_cmd->add_option("--root", analyze_args.root, "Corpus root directory")->required();
    analyze_cmd->add_option("--config", analyze_args.config, "analysis.json");
    analyze_cmd->add_option("--out", analyze_args.out, "Report file to write")->required();
    analyze_cmd->add_option("--workers", analyze_args.workers, "Worker threads (overrides the config)");
    analyze_cmd->add_flag("--json", analyze_args.json, "Machine-readable output");

    PairArgs pair_args;
    auto* pair_cmd = app.add_subcommand("pair", "Show the largest shared fragments of two submissions");
    pair_cmd->add_option("--report", pair_args.report, "Report file")->required();
    pair_cmd->add_option("--root", pair_args.root, "Corpus root the report was built from");
    pair_cmd->add_option("a", pair_args.a, "First submission id")->required();
    pair_cmd->add_option("b", pair_args.b, "Second submission id")->required();
    pair_cmd->add_option("--n", pair_args.n, "Number of fragments")->capture_default_str();
    pair_cmd->add_option("--test", pair_args.test, "Test whose tokenization to use (default: first)");
    pair_cmd->add_flag("--json", pair_args.json, "Machine-readable output");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    synth_cmd->add_option("--orig", synth_args.orig, "Original programs")->capture_default_str();
    synth_cmd->add_option("--mut", synth_args.mut, "Mutational copies")->capture_default_str();
    synth_cmd->add_option("--rec", synth_args.rec, "Recombinations")->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
    synth_cmd->add_flag("--json", synth_args.json, "Machine-readable output");

    CalibrateArgs cal_args;
    auto* cal_cmd = app.add_subcommand("calibrate", "Compute Hampel critical values into a table");
    cal_cmd->add_option("--n-list", cal_args.n_list, "Sample sizes")->delimiter(',')->capture_default_str();
    cal_cmd->add_option("--alpha-list", cal_args.alpha_list, "Significance levels")->delimiter(',')->capture_default_str();
    cal_cmd->add_option("--replicates", cal_args.replicates, "Monte Carlo replicates")->capture_default_str();
    cal_cmd->add_option("--seed", cal_args.seed, "Monte Carlo seed")->capture_default_str();
    cal_cmd->add_option("--out", cal_args.out, "Table file (default: the user cache)");
    cal_cmd->add_option("--workers", cal_args.workers, "Worker threads (default: all cores)");
    cal_cmd->add_flag("--json", cal_args.json, "Machine-readable output");

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the report over a local HTTP API");
    serve_cmd->add_option("--report", serve_args.report, "Report file")->required();
    serve_cmd->add_option("--root", serve_args.root, "Corpus root, enables fragment and source routes");
    serve_cmd->add_option("--host", serve_args.host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", serve_args.port, "Port (0 picks a free one)")->capture_default_str();

    TokensArgs tok_args;
    auto* tok_cmd = app.add_subcommand("tokens", "Print token streams or the token table");
    tok_cmd->add_option("files", tok_args.files, "Source files");
    tok_cmd->add_option("--language", tok_args.language, "c_like or raw")->capture_default_str();
    tok_cmd->add_flag("--table", tok_args.table, "Print the token table as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*scan_cmd) return cmd_scan(scan_args);
        if (*analyze_cmd) return cmd_analyze(analyze_args);
        if (*pair_cmd) return cmd_pair(pair_args);
        if (*synth_cmd) return cmd_synth(synth_args);
        if (*cal_cmd) return cmd_calibrate(cal_args);
        if (*serve_cmd) return cmd_serve(serve_args);
        if (*tok_cmd) return cmd_tokens(tok_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
