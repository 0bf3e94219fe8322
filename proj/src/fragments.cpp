#include "simdetect/fragments.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "simdetect/errors.hpp"

namespace simdetect {

namespace {

// Prefix doubling with counting sort; O(n log n).
std::vector<std::size_t> suffix_array(const std::vector<std::uint32_t>& s) {
    const std::size_t n = s.size();
    std::vector<std::size_t> sa(n), rank(n), tmp(n);
    if (n == 0) return sa;
    std::iota(sa.begin(), sa.end(), std::size_t{0});
    std::sort(sa.begin(), sa.end(), [&](std::size_t x, std::size_t y) { return s[x] < s[y]; });
    rank[sa[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) rank[sa[i]] = rank[sa[i - 1]] + (s[sa[i]] != s[sa[i - 1]] ? 1 : 0);

    std::vector<std::size_t> count;
    for (std::size_t k = 1; rank[sa[n - 1]] < n - 1; k <<= 1) {
        // order by second key: suffixes without one first
        std::size_t p = 0;
        for (std::size_t i = n - std::min(k, n); i < n; ++i) tmp[p++] = i;
        for (std::size_t j = 0; j < n; ++j)
            if (sa[j] >= k) tmp[p++] = sa[j] - k;
        count.assign(rank[sa[n - 1]] + 1, 0);
        for (std::size_t i = 0; i < n; ++i) ++count[rank[i]];
        for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
        for (std::size_t j = n; j-- > 0;) sa[--count[rank[tmp[j]]]] = tmp[j];

        auto second = [&](std::size_t i) { return i + k < n ? static_cast<long long>(rank[i + k]) : -1LL; };
        tmp[sa[0]] = 0;
        for (std::size_t i = 1; i < n; ++i) {
            const std::size_t prev = sa[i - 1], cur = sa[i];
            const bool same = rank[prev] == rank[cur] && second(prev) == second(cur);
            tmp[cur] = tmp[prev] + (same ? 0 : 1);
        }
        std::swap(rank, tmp);
    }
    return sa;
}

// Kasai; lcp[i] = common prefix of sa[i-1] and sa[i].
std::vector<std::size_t> lcp_array(const std::vector<std::uint32_t>& s, const std::vector<std::size_t>& sa) {
    const std::size_t n = s.size();
    std::vector<std::size_t> rank(n), lcp(n, 0);
    for (std::size_t i = 0; i < n; ++i) rank[sa[i]] = i;
    std::size_t h = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rank[i] == 0) {
            h = 0;
            continue;
        }
        const std::size_t j = sa[rank[i] - 1];
        while (i + h < n && j + h < n && s[i + h] == s[j + h]) ++h;
        lcp[rank[i]] = h;
        if (h > 0) --h;
    }
    return lcp;
}

std::size_t matchable_count(const TokenStream& ts) {
    const TokenCode brk = ts.language == Language::Raw ? tok::kRawFileBreak : tok::kFileBreak;
    return static_cast<std::size_t>(std::count_if(ts.tokens.begin(), ts.tokens.end(), [&](TokenCode c) { return c != brk; }));
}

std::vector<bool> break_mask(const TokenStream& ts) {
    const TokenCode brk = ts.language == Language::Raw ? tok::kRawFileBreak : tok::kFileBreak;
    std::vector<bool> mask(ts.tokens.size());
    for (std::size_t i = 0; i < ts.tokens.size(); ++i) mask[i] = ts.tokens[i] == brk;
    return mask;
}

TileSide side_of(const TokenStream& ts, std::size_t start, std::size_t length) {
    TileSide s;
    s.start = start;
    s.file = ts.spans[start].file;
    s.begin = ts.spans[start].begin;
    s.end = ts.spans[start + length - 1].end;
    return s;
}

std::vector<std::size_t> occurrences(const std::vector<TokenCode>& hay, std::span<const TokenCode> needle) {
    std::vector<std::size_t> out;
    const std::boyer_moore_horspool_searcher searcher(needle.begin(), needle.end());
    auto it = hay.begin();
    while (true) {
        auto hit = std::search(it, hay.end(), searcher);
        if (hit == hay.end()) break;
        out.push_back(static_cast<std::size_t>(hit - hay.begin()));
        it = hit + 1;
    }
    return out;
}

double coverage_of(const FragmentSet& fs) {
    const std::size_t shorter = std::min(fs.a_matchable, fs.b_matchable);
    if (shorter == 0) return 0.0;
    std::size_t covered = 0;
    for (const auto& t : fs.tiles) covered += t.length;
    return std::min(1.0, static_cast<double>(covered) / static_cast<double>(shorter));
}

}  // namespace

std::size_t default_min_match(Language lang) { return lang == Language::Raw ? 16 : 8; }

Match longest_common_run(std::span<const TokenCode> a, std::span<const TokenCode> b,
                         const std::vector<bool>& a_blocked, const std::vector<bool>& b_blocked) {
    // Real codes stay below 2^16; every sentinel gets its own value above that.
    constexpr std::uint32_t kSentinelBase = 1u << 17;
    const std::size_t na = a.size(), nb = b.size();
    std::vector<std::uint32_t> s;
    s.reserve(na + nb + 1);
    std::uint32_t next_sentinel = kSentinelBase;
    for (std::size_t i = 0; i < na; ++i) s.push_back(a_blocked[i] ? next_sentinel++ : a[i]);
    s.push_back(next_sentinel++);
    for (std::size_t j = 0; j < nb; ++j) s.push_back(b_blocked[j] ? next_sentinel++ : b[j]);

    const auto sa = suffix_array(s);
    const auto lcp = lcp_array(s, sa);
    auto is_a = [&](std::size_t pos) { return pos < na; };

    // Longest length achieved by some adjacent a/b pair; any a/b pair
    // with common prefix L is joined by a run of lcp >= L containing such
    // an adjacent pair.
    std::size_t best = 0;
    for (std::size_t i = 1; i < sa.size(); ++i)
        if (is_a(sa[i]) != is_a(sa[i - 1])) best = std::max(best, lcp[i]);
    Match m;
    if (best == 0) return m;

    // Scan maximal SA intervals whose internal lcp >= best; within one
    // interval all suffixes share the same best-length prefix.
    bool found = false;
    std::size_t i = 0;
    while (i < sa.size()) {
        std::size_t j = i;
        while (j + 1 < sa.size() && lcp[j + 1] >= best) ++j;
        if (j > i) {
            std::size_t min_a = SIZE_MAX, min_b = SIZE_MAX;
            for (std::size_t k = i; k <= j; ++k) {
                if (is_a(sa[k])) {
                    min_a = std::min(min_a, sa[k]);
                } else {
                    min_b = std::min(min_b, sa[k] - na - 1);
                }
            }
            if (min_a != SIZE_MAX && min_b != SIZE_MAX &&
                (!found || min_a < m.a || (min_a == m.a && min_b < m.b))) {
                m = {min_a, min_b, best};
                found = true;
            }
        }
        i = j + 1;
    }
    return m;
}

FragmentSet find_tiles(const TokenStream& a, const TokenStream& b, std::size_t min_match_length) {
    if (min_match_length < 3) throw AnalysisError("min_match_length must be at least 3");
    FragmentSet fs;
    fs.a_id = a.submission_id;
    fs.b_id = b.submission_id;
    fs.min_match_length = min_match_length;
    fs.a_matchable = matchable_count(a);
    fs.b_matchable = matchable_count(b);

    auto a_blocked = break_mask(a);
    auto b_blocked = break_mask(b);
    while (true) {
        const Match m = longest_common_run(a.tokens, b.tokens, a_blocked, b_blocked);
        if (m.length < min_match_length) break;
        Tile t;
        t.length = m.length;
        t.a = side_of(a, m.a, m.length);
        t.b = side_of(b, m.b, m.length);
        const std::span<const TokenCode> content(a.tokens.data() + m.a, m.length);
        t.a_occurrences = occurrences(a.tokens, content);
        t.b_occurrences = occurrences(b.tokens, content);
        for (std::size_t k = 0; k < m.length; ++k) {
            a_blocked[m.a + k] = true;
            b_blocked[m.b + k] = true;
        }
        fs.tiles.push_back(std::move(t));
    }
    fs.coverage = coverage_of(fs);
    return fs;
}

FragmentSet top_n(const FragmentSet& fs, std::size_t n) {
    if (n == 0) throw AnalysisError("fragment count must be at least 1");
    FragmentSet out = fs;
    if (out.tiles.size() > n) out.tiles.resize(n);
    out.coverage = coverage_of(out);
    return out;
}

nlohmann::json to_json(const FragmentSet& fs, const std::vector<std::string>& a_paths,
                       const std::vector<std::string>& b_paths) {
    auto side = [](const TileSide& s, std::size_t length, const std::vector<std::string>& paths) {
        return nlohmann::json{{"start", s.start},
                              {"length", length},
                              {"file", s.file},
                              {"path", s.file < paths.size() ? paths[s.file] : std::string()},
                              {"begin", s.begin},
                              {"end", s.end}};
    };
    nlohmann::json tiles = nlohmann::json::array();
    for (const auto& t : fs.tiles) {
        tiles.push_back({{"length", t.length},
                         {"a", side(t.a, t.length, a_paths)},
                         {"b", side(t.b, t.length, b_paths)},
                         {"occurrences", {{"a", t.a_occurrences}, {"b", t.b_occurrences}}}});
    }
    return {{"a", fs.a_id},
            {"b", fs.b_id},
            {"min_match_length", fs.min_match_length},
            {"a_tokens", fs.a_matchable},
            {"b_tokens", fs.b_matchable},
            {"coverage", fs.coverage},
            {"tiles", std::move(tiles)}};
}

}  // namespace simdetect
