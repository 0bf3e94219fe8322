// Minimal zip (stored or deflated), ustar and gzip writers for building fixtures.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include <zlib.h>

namespace testing_support {

using Members = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline void put16(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put32(std::string& s, std::uint32_t v) {
    put16(s, v & 0xFFFF);
    put16(s, v >> 16);
}

inline std::string raw_deflate(const std::string& in) {
    z_stream zs{};
    deflateInit2(&zs, 9, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
    std::string out(deflateBound(&zs, in.size()), '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

}  // namespace detail

inline std::string make_zip(const Members& members, bool compress = true) {
    std::string out, central;
    for (const auto& [name, bytes] : members) {
        const auto crc = static_cast<std::uint32_t>(
            crc32(0, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
        const std::string body = compress ? detail::raw_deflate(bytes) : bytes;
        const std::uint32_t method = compress ? 8 : 0;
        const auto offset = static_cast<std::uint32_t>(out.size());

        detail::put32(out, 0x04034b50);
        detail::put16(out, 20);
        detail::put16(out, 0);
        detail::put16(out, method);
        detail::put32(out, 0);
        detail::put32(out, crc);
        detail::put32(out, static_cast<std::uint32_t>(body.size()));
        detail::put32(out, static_cast<std::uint32_t>(bytes.size()));
        detail::put16(out, static_cast<std::uint32_t>(name.size()));
        detail::put16(out, 0);
        out += name;
        out += body;

        detail::put32(central, 0x02014b50);
        detail::put16(central, 20);
        detail::put16(central, 20);
        detail::put16(central, 0);
        detail::put16(central, method);
        detail::put32(central, 0);
        detail::put32(central, crc);
        detail::put32(central, static_cast<std::uint32_t>(body.size()));
        detail::put32(central, static_cast<std::uint32_t>(bytes.size()));
        detail::put16(central, static_cast<std::uint32_t>(name.size()));
        detail::put16(central, 0);
        detail::put16(central, 0);
        detail::put16(central, 0);
        detail::put16(central, 0);
        detail::put32(central, 0);
        detail::put32(central, offset);
        central += name;
    }
    const auto cd_offset = static_cast<std::uint32_t>(out.size());
    out += central;
    detail::put32(out, 0x06054b50);
    detail::put16(out, 0);
    detail::put16(out, 0);
    detail::put16(out, static_cast<std::uint32_t>(members.size()));
    detail::put16(out, static_cast<std::uint32_t>(members.size()));
    detail::put32(out, static_cast<std::uint32_t>(central.size()));
    detail::put32(out, cd_offset);
    detail::put16(out, 0);
    return out;
}

inline std::string make_tar(const Members& members) {
    std::string out;
    for (const auto& [name, bytes] : members) {
        char h[512];
        std::memset(h, 0, sizeof h);
        std::snprintf(h, 100, "%s", name.c_str());
        std::snprintf(h + 100, 8, "%07o", 0644);
        std::snprintf(h + 108, 8, "%07o", 0);
        std::snprintf(h + 116, 8, "%07o", 0);
        std::snprintf(h + 124, 12, "%011zo", bytes.size());
        std::snprintf(h + 136, 12, "%011o", 0);
        h[156] = '0';
        std::memcpy(h + 257, "ustar", 6);
        std::memcpy(h + 263, "00", 2);
        std::memset(h + 148, ' ', 8);
        unsigned sum = 0;
        for (unsigned char c : h) sum += c;
        std::snprintf(h + 148, 8, "%06o", sum);
        h[155] = ' ';
        out.append(h, sizeof h);
        out += bytes;
        out.append((512 - bytes.size() % 512) % 512, '\0');
    }
    out.append(1024, '\0');
    return out;
}

inline std::string make_gzip(const std::string& bytes) {
    z_stream zs{};
    deflateInit2(&zs, 9, Z_DEFLATED, MAX_WBITS + 16, 8, Z_DEFAULT_STRATEGY);
    std::string out(deflateBound(&zs, bytes.size()) + 32, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

}  // namespace testing_support
