#include "simdetect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simdetect/errors.hpp"
#include "simdetect/parallel.hpp"

namespace simdetect {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

TokenVector token_vector(const TokenStream& ts) {
    TokenVector v;
    v.submission_id = ts.submission_id;
    const TokenCode brk = ts.language == Language::Raw ? tok::kRawFileBreak : tok::kFileBreak;
    for (TokenCode c : ts.tokens)
        if (c != brk) ++v.counts[c];
    if (v.counts.empty()) throw AnalysisError("submission '" + ts.submission_id + "' has no tokens to count");
    return v;
}

double ncd_from_lengths(std::size_t ca, std::size_t cb, std::size_t cab) {
    const auto lo = static_cast<double>(std::min(ca, cb));
    const auto hi = static_cast<double>(std::max(ca, cb));
    if (hi <= 0.0) return 0.0;
    return clamp01((static_cast<double>(cab) - lo) / hi);
}

double ncd_pair(std::string_view a, std::string_view b, const CompressorId& c) {
    if (a.empty() || b.empty()) throw AnalysisError("compression distance needs non-empty inputs");
    if (a == b) return 0.0;
    std::string ab;
    ab.reserve(a.size() + b.size());
    ab.append(a).append(b);
    return ncd_from_lengths(compressed_len(c, a), compressed_len(c, b), compressed_len(c, ab));
}

double token_distance(const TokenVector& va, const TokenVector& vb) {
    // Exact integer sums; counts are far below 2^31 in practice.
    using Wide = unsigned __int128;
    Wide dot = 0, na = 0, nb = 0;
    for (const auto& [code, n] : va.counts) na += Wide{n} * n;
    for (const auto& [code, n] : vb.counts) nb += Wide{n} * n;
    if (na == 0 || nb == 0) throw AnalysisError("token distance of a zero vector");
    // merge-walk over the two sorted maps
    auto ia = va.counts.begin();
    auto ib = vb.counts.begin();
    while (ia != va.counts.end() && ib != vb.counts.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            dot += Wide{ia->second} * ib->second;
            ++ia;
            ++ib;
        }
    }
    if (dot == 0) return 1.0;
    // Parallel vectors (equality in Cauchy-Schwarz) are exactly distance 0.
    constexpr Wide kLimit = Wide{1} << 63;
    if (na < kLimit && nb < kLimit && dot * dot == na * nb) return 0.0;
    const auto ld = [](Wide v) { return static_cast<long double>(v); };
    return clamp01(static_cast<double>(1.0L - ld(dot) / (std::sqrt(ld(na)) * std::sqrt(ld(nb)))));
}

DistanceMatrix variance_subtest(const DistanceMatrix& m, double alpha_row, const HampelParams& mc,
                                CriticalValueTable* cache, unsigned workers) {
    const std::size_t n = m.size();
    if (n < 4) throw AnalysisError("variance subtest needs at least 4 submissions");
    HampelParams p = mc;
    p.alpha = alpha_row;
    const double g = hampel_critical(n - 1, p, cache, workers);

    std::vector<RobustStats> rows;
    rows.reserve(n);
    for (std::size_t k = 0; k < n; ++k) rows.push_back(robust_stats(m.row_values(k)));

    auto score = [&](std::size_t k, double x) {
        const auto& s = rows[k];
        if (s.mad > 0.0) return (s.median - x) / s.mad;
        return x < s.median ? std::numeric_limits<double>::infinity() : 0.0;
    };

    DistanceMatrix out = m;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double x = m.at(i, j);
            const double s = std::max(score(i, x), score(j, x));
            if (s > g) out.set(i, j, std::isinf(s) ? 0.0 : x * (g / s));
        }
    }
    return out;
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "ncd_raw") return Algorithm::NcdRaw;
    if (name == "ncd_tokens") return Algorithm::NcdTokens;
    if (name == "token_count") return Algorithm::TokenCount;
    throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::NcdRaw: return "ncd_raw";
        case Algorithm::NcdTokens: return "ncd_tokens";
        case Algorithm::TokenCount: return "token_count";
    }
    return "?";
}

std::string metric_payload(const Submission& sub, Algorithm a, Language language) {
    if (a == Algorithm::NcdRaw) {
        std::string out;
        for (const auto& f : sub.files) out += f.bytes;
        return out;
    }
    return serialize(tokenize(sub, language).tokens);
}

DistanceMatrix build_matrix(const std::vector<Submission>& corpus, Algorithm a, const MatrixParams& params) {
    const std::size_t n = corpus.size();
    if (n < 2) throw AnalysisError("need at least 2 submissions to build a distance matrix");
    std::vector<std::string> ids;
    ids.reserve(n);
    for (const auto& s : corpus) ids.push_back(s.id);
    DistanceMatrix m(std::string(to_string(a)), ids);

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    cells.reserve(pair_count(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) cells.emplace_back(i, j);
    std::vector<double> values(cells.size());

    auto fail = [&](std::size_t k, const std::exception& e) -> AnalysisError {
        return AnalysisError("pair (" + ids[cells[k].first] + ", " + ids[cells[k].second] + "): " + e.what());
    };

    if (a == Algorithm::TokenCount) {
        std::vector<TokenVector> vecs(n);
        parallel_for(n, params.workers, [&](std::size_t i) { vecs[i] = token_vector(tokenize(corpus[i], params.language)); });
        parallel_for(cells.size(), params.workers, [&](std::size_t k) {
            try {
                values[k] = token_distance(vecs[cells[k].first], vecs[cells[k].second]);
            } catch (const std::exception& e) {
                throw fail(k, e);
            }
        });
    } else {
        std::vector<std::string> payloads(n);
        std::vector<std::size_t> single(n);
        parallel_for(n, params.workers, [&](std::size_t i) {
            payloads[i] = metric_payload(corpus[i], a, params.language);
            if (payloads[i].empty()) throw AnalysisError("submission '" + ids[i] + "' has an empty payload");
            single[i] = compressed_len(params.compressor, payloads[i]);
        });
        parallel_for(cells.size(), params.workers, [&](std::size_t k) {
            const auto [i, j] = cells[k];
            // ids are sorted, so payloads[i] is the canonical first half
            if (payloads[i] == payloads[j]) {
                values[k] = 0.0;
                return;
            }
            try {
                std::string ab;
                ab.reserve(payloads[i].size() + payloads[j].size());
                ab.append(payloads[i]).append(payloads[j]);
                values[k] = ncd_from_lengths(single[i], single[j], compressed_len(params.compressor, ab));
            } catch (const std::exception& e) {
                throw fail(k, e);
            }
        });
    }

    for (std::size_t k = 0; k < cells.size(); ++k) m.set(cells[k].first, cells[k].second, values[k]);
    return m;
}

}  // namespace simdetect
