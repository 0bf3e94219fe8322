// Shared helpers and independent reference implementations for the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "simdetect/distance_matrix.hpp"
#include "simdetect/lexer.hpp"
#include "simdetect/random.hpp"
#include "simdetect/source_file.hpp"

namespace testing_support {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        static std::uint64_t counter = 0;
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("simdetect-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& bytes) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline simdetect::Submission make_submission(std::string id, std::vector<std::pair<std::string, std::string>> files) {
    simdetect::Submission s;
    s.id = id;
    s.origin = id;
    s.folder_name = id;
    std::sort(files.begin(), files.end());
    for (auto& [path, bytes] : files) s.files.push_back({path, bytes, {}});
    return s;
}

/// Token stream over one virtual file where token k covers bytes [k, k+1).
inline simdetect::TokenStream make_stream(std::string id, const std::vector<simdetect::TokenCode>& tokens) {
    simdetect::TokenStream ts;
    ts.submission_id = std::move(id);
    ts.tokens = tokens;
    for (std::uint32_t k = 0; k < tokens.size(); ++k) ts.spans.push_back({0, k, k + 1});
    return ts;
}

// ---- program rewrites ------------------------------------------------------

/// The ~200-line C program under tests/data.
inline std::string reference_program() { return read_file(fs::path(SIMDETECT_TEST_DATA) / "reference.c"); }

// Rebuilds `text` from its lexemes, renaming identifiers consistently and
// varying whitespace and comments between tokens.
inline std::string disguise(const std::string& text, std::uint64_t seed) {
    simdetect::Rng rng(seed);
    std::map<std::string, std::string> names;
    std::string out;
    std::uint32_t prev = 0;
    for (const auto& lx : simdetect::lex_c_like(text)) {
        std::string gap = text.substr(prev, lx.begin - prev);
        const auto r = rng.below(6);
        if (r == 0) gap += "  ";
        else if (r == 1) gap += " /* note */ ";
        else if (r == 2 && gap.find('\n') != std::string::npos) gap = " // moved\n\t";
        out += gap;
        std::string word = text.substr(lx.begin, lx.end - lx.begin);
        if (lx.code == simdetect::tok::kIdent) {
            auto [it, fresh] = names.try_emplace(word, "");
            if (fresh) it->second = "renamed_" + std::to_string(names.size());
            word = it->second;
        }
        out += word;
        prev = lx.end;
    }
    return out + text.substr(prev);
}

// Splits the reference program into its preamble and blank-line separated
// function definitions, then reverses the order of the functions.
inline std::string permute_functions(const std::string& text) {
    std::vector<std::string> chunks;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto next = text.find("\n\n", pos);
        if (next == std::string::npos) next = text.size();
        chunks.push_back(text.substr(pos, next - pos));
        pos = next + 2;
    }
    std::size_t first_fn = 0;
    while (first_fn < chunks.size() && chunks[first_fn].find(")\n{") == std::string::npos) ++first_fn;
    std::reverse(chunks.begin() + static_cast<std::ptrdiff_t>(first_fn), chunks.end());
    std::string out;
    for (const auto& c : chunks) out += c + "\n\n";
    return out;
}

// ---- reference implementations ---------------------------------------------

/// Median by full sort; mean of the two middle values for even sizes.
inline double ref_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline double ref_mad(const std::vector<double>& v) {
    const double m = ref_median(v);
    std::vector<double> dev;
    for (double x : v) dev.push_back(std::fabs(x - m));
    return ref_median(dev);
}

/// Cosine distance by an explicit loop over the union of keys.
inline double ref_cosine_distance(const std::map<simdetect::TokenCode, std::uint64_t>& a,
                                  const std::map<simdetect::TokenCode, std::uint64_t>& b) {
    std::vector<simdetect::TokenCode> keys;
    for (const auto& [k, _] : a) keys.push_back(k);
    for (const auto& [k, _] : b) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    long double dot = 0, na = 0, nb = 0;
    for (auto k : keys) {
        const long double x = a.count(k) ? a.at(k) : 0;
        const long double y = b.count(k) ? b.at(k) : 0;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    const long double d = 1.0L - dot / (std::sqrt(na) * std::sqrt(nb));
    return static_cast<double>(std::clamp(d, 0.0L, 1.0L));
}

struct RefMatch {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t length = 0;
};

/// Longest common substring by dynamic programming; ties go to the smallest
/// a start, then the smallest b start. Codes in `never` match nothing.
inline RefMatch ref_longest_common_substring(const std::vector<simdetect::TokenCode>& a,
                                             const std::vector<simdetect::TokenCode>& b,
                                             simdetect::TokenCode never = simdetect::tok::kFileBreak) {
    RefMatch best;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = (a[i - 1] == b[j - 1] && a[i - 1] != never) ? prev[j - 1] + 1 : 0;
            const std::size_t len = cur[j];
            if (len == 0) continue;
            const std::size_t sa = i - len, sb = j - len;
            if (len > best.length || (len == best.length && (sa < best.a || (sa == best.a && sb < best.b))))
                best = {sa, sb, len};
        }
        std::swap(prev, cur);
    }
    return best;
}

/// Minimum spanning forest weights by Prim's algorithm over edges with
/// distance <= t, sorted ascending.
inline std::vector<double> ref_msf_weights(const simdetect::DistanceMatrix& m, double t) {
    const std::size_t n = m.size();
    std::vector<bool> done(n, false);
    std::vector<double> weights;
    for (std::size_t root = 0; root < n; ++root) {
        if (done[root]) continue;
        std::vector<double> key(n, INFINITY);
        key[root] = 0;
        for (;;) {
            std::size_t u = n;
            for (std::size_t v = 0; v < n; ++v)
                if (!done[v] && std::isfinite(key[v]) && (u == n || key[v] < key[u])) u = v;
            if (u == n) break;
            done[u] = true;
            if (u != root) weights.push_back(key[u]);
            for (std::size_t v = 0; v < n; ++v)
                if (!done[v] && v != u && m.at(u, v) <= t && m.at(u, v) < key[v]) key[v] = m.at(u, v);
        }
    }
    std::sort(weights.begin(), weights.end());
    return weights;
}

/// Component label per vertex (smallest member) by repeated relaxation.
inline std::vector<std::size_t> ref_components(std::size_t n,
                                               const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), 0);
    for (bool changed = true; changed;) {
        changed = false;
        for (auto [i, j] : edges) {
            const auto lo = std::min(label[i], label[j]);
            if (label[i] != lo || label[j] != lo) {
                label[i] = label[j] = lo;
                changed = true;
            }
        }
    }
    return label;
}

/// Symmetric matrix with upper-triangle values drawn by `draw`.
template <class Draw>
simdetect::DistanceMatrix random_matrix(std::size_t n, Draw&& draw, const std::string& name = "test") {
    std::vector<std::string> ids;
    for (std::size_t k = 0; k < n; ++k) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%03zu", k);
        ids.emplace_back(buf);
    }
    simdetect::DistanceMatrix m(name, ids);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, std::clamp(draw(i, j), 0.0, 1.0));
    return m;
}

}  // namespace testing_support
