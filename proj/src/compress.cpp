#include "simdetect/compress.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include <zlib.h>

#include "simdetect/errors.hpp"

namespace simdetect {

namespace {

std::size_t deflate_len(std::string_view data, int level) {
    z_stream zs{};
    if (deflateInit2(&zs, level, Z_DEFLATED, -MAX_WBITS, 9, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error("deflateInit2 failed");
    const uLong bound = deflateBound(&zs, static_cast<uLong>(data.size()));
    std::vector<Bytef> out(bound + 16);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const std::size_t len = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error("deflate did not finish");
    return len;
}

// Suffix array of `s` (no sentinel) by prefix doubling with counting sorts.
std::vector<std::int32_t> suffix_array(std::string_view s) {
    const auto n = static_cast<std::int32_t>(s.size());
    std::vector<std::int32_t> sa(n), rank(n), tmp(n), cnt;
    if (n == 0) return sa;
    for (std::int32_t i = 0; i < n; ++i) rank[i] = static_cast<unsigned char>(s[i]);
    std::iota(sa.begin(), sa.end(), 0);
    std::sort(sa.begin(), sa.end(), [&](std::int32_t a, std::int32_t b) { return rank[a] < rank[b]; });
    std::int32_t classes = 256;
    for (std::int32_t k = 1;; k <<= 1) {
        // second key: rank[i+k] or -1 past the end -> order by shifting
        std::vector<std::int32_t> by_second;
        by_second.reserve(n);
        for (std::int32_t i = n - k; i < n; ++i)
            if (i >= 0) by_second.push_back(i);
        for (std::int32_t i : sa)
            if (i >= k) by_second.push_back(i - k);
        cnt.assign(static_cast<std::size_t>(std::max(classes, n)) + 1, 0);
        for (std::int32_t i : by_second) ++cnt[rank[i]];
        for (std::size_t c = 1; c < cnt.size(); ++c) cnt[c] += cnt[c - 1];
        for (std::int32_t j = n - 1; j >= 0; --j) sa[--cnt[rank[by_second[j]]]] = by_second[j];
        tmp[sa[0]] = 0;
        std::int32_t r = 0;
        for (std::int32_t j = 1; j < n; ++j) {
            const std::int32_t a = sa[j - 1], b = sa[j];
            const std::int32_t ra = a + k < n ? rank[a + k] : -1;
            const std::int32_t rb = b + k < n ? rank[b + k] : -1;
            if (rank[a] != rank[b] || ra != rb) ++r;
            tmp[b] = r;
        }
        rank.swap(tmp);
        classes = r + 1;
        if (classes == n) break;
    }
    return sa;
}

std::size_t block_sort_len(std::string_view data, int level) {
    const std::size_t block = static_cast<std::size_t>(level) * 100000;
    std::size_t total = 0;
    std::string mtf_out;
    for (std::size_t off = 0; off < data.size() || (off == 0 && data.empty()); off += block) {
        const auto chunk = data.substr(off, block);
        // BWT of chunk + virtual end marker: last column excludes the marker.
        const auto sa = suffix_array(chunk);
        std::string bwt;
        bwt.reserve(chunk.size());
        for (std::int32_t i : sa) bwt.push_back(i == 0 ? chunk.back() : chunk[static_cast<std::size_t>(i) - 1]);
        std::array<unsigned char, 256> order{};
        std::iota(order.begin(), order.end(), 0);
        for (char ch : bwt) {
            const auto c = static_cast<unsigned char>(ch);
            const auto it = std::find(order.begin(), order.end(), c);
            const auto idx = static_cast<unsigned char>(it - order.begin());
            std::rotate(order.begin(), it, it + 1);
            mtf_out.push_back(static_cast<char>(idx));
        }
        total += 4;  // primary index
        if (data.empty()) break;
    }
    return total + deflate_len(mtf_out, 9);
}

}  // namespace

CompressorId CompressorId::parse(std::string_view name, int level) {
    if (level < 1 || level > 9) throw ConfigError("compression level must be within 1..9");
    if (name == "deflate") return {Backend::Deflate, level};
    if (name == "block_sort") return {Backend::BlockSort, level};
    throw ConfigError("unknown compressor '" + std::string(name) + "' (expected deflate or block_sort)");
}

std::string CompressorId::name() const { return backend == Backend::Deflate ? "deflate" : "block_sort"; }

std::string CompressorId::version() const {
    const std::string zlib = std::string("zlib ") + zlibVersion();
    return backend == Backend::Deflate ? zlib : "bwt-mtf-deflate 1 (" + zlib + ")";
}

std::size_t compressed_len(const CompressorId& c, std::string_view data) {
    return c.backend == Backend::Deflate ? deflate_len(data, c.level) : block_sort_len(data, c.level);
}

}  // namespace simdetect
