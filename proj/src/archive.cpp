#include "simdetect/archive.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>

#include <zlib.h>

#include "simdetect/errors.hpp"
#include "simdetect/source_file.hpp"

namespace simdetect {

namespace {

bool ends_with_ci(std::string_view s, std::string_view suffix) {
    if (s.size() < suffix.size()) return false;
    return std::equal(suffix.begin(), suffix.end(), s.end() - static_cast<std::ptrdiff_t>(suffix.size()),
                      [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                      });
}

std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Inflates a raw deflate stream of known output size.
bool inflate_raw(std::string_view in, std::size_t expected, std::string& out) {
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) return false;
    out.assign(expected, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const bool ok = rc == Z_STREAM_END && zs.total_out == expected;
    inflateEnd(&zs);
    return ok;
}

ArchiveContents read_zip(std::string_view data, std::size_t max_member) {
    const auto* base = reinterpret_cast<const unsigned char*>(data.data());
    const std::size_t n = data.size();
    if (n < 22) throw FormatError("zip: file too short");

    // End of central directory: scan backwards over a possible comment.
    std::size_t eocd = std::string_view::npos;
    const std::size_t lowest = n >= 22 + 0xFFFF ? n - 22 - 0xFFFF : 0;
    for (std::size_t i = n - 22 + 1; i-- > lowest;) {
        if (le32(base + i) == 0x06054b50) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string_view::npos) throw FormatError("zip: end of central directory not found");

    const std::uint16_t count = le16(base + eocd + 10);
    const std::uint32_t cd_size = le32(base + eocd + 12);
    const std::uint32_t cd_offset = le32(base + eocd + 16);
    if (cd_offset == 0xFFFFFFFFu || count == 0xFFFF) throw FormatError("zip: zip64 archives are not supported");
    if (static_cast<std::uint64_t>(cd_offset) + cd_size > eocd) throw FormatError("zip: central directory out of range");

    ArchiveContents out;
    std::size_t pos = cd_offset;
    for (std::uint16_t e = 0; e < count; ++e) {
        if (pos + 46 > eocd || le32(base + pos) != 0x02014b50) throw FormatError("zip: corrupt central directory");
        const std::uint16_t flags = le16(base + pos + 8);
        const std::uint16_t method = le16(base + pos + 10);
        const std::uint32_t crc = le32(base + pos + 16);
        const std::uint32_t csize = le32(base + pos + 20);
        const std::uint32_t usize = le32(base + pos + 24);
        const std::uint16_t name_len = le16(base + pos + 28);
        const std::uint16_t extra_len = le16(base + pos + 30);
        const std::uint16_t comment_len = le16(base + pos + 32);
        const std::uint32_t local = le32(base + pos + 42);
        if (pos + 46 + name_len > eocd) throw FormatError("zip: corrupt central directory");
        std::string raw_name(data.substr(pos + 46, name_len));
        pos += 46 + std::size_t{name_len} + extra_len + comment_len;

        if (!raw_name.empty() && (raw_name.back() == '/' || raw_name.back() == '\\')) continue;
        const std::string name = sanitize_relative_path(raw_name);
        if (name.empty()) {
            out.warnings.push_back("zip: dropped member with unsafe path '" + raw_name + "'");
            continue;
        }
        if (flags & 1u) {
            out.warnings.push_back("zip: encrypted member '" + name + "' skipped");
            continue;
        }
        if (usize > max_member) {
            out.warnings.push_back("zip: member '" + name + "' exceeds the size limit");
            continue;
        }
        if (static_cast<std::uint64_t>(local) + 30 > n || le32(base + local) != 0x04034b50) {
            out.warnings.push_back("zip: bad local header for '" + name + "'");
            continue;
        }
        const std::size_t data_start = local + 30 + std::size_t{le16(base + local + 26)} + le16(base + local + 28);
        if (data_start + csize > n) {
            out.warnings.push_back("zip: truncated data for '" + name + "'");
            continue;
        }
        const auto payload = data.substr(data_start, csize);
        std::string bytes;
        if (method == 0) {
            if (csize != usize) {
                out.warnings.push_back("zip: size mismatch for stored member '" + name + "'");
                continue;
            }
            bytes.assign(payload);
        } else if (method == 8) {
            if (!inflate_raw(payload, usize, bytes)) {
                out.warnings.push_back("zip: cannot inflate '" + name + "'");
                continue;
            }
        } else {
            out.warnings.push_back("zip: unsupported compression method " + std::to_string(method) + " for '" +
                                   name + "'");
            continue;
        }
        const auto actual = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
        if (actual != crc) {
            out.warnings.push_back("zip: CRC mismatch for '" + name + "'");
            continue;
        }
        out.entries.push_back({name, std::move(bytes)});
    }
    return out;
}

std::uint64_t parse_octal(std::string_view field) {
    std::uint64_t v = 0;
    for (char c : field) {
        if (c == '\0' || c == ' ') {
            if (v != 0) break;
            continue;
        }
        if (c < '0' || c > '7') throw FormatError("tar: bad octal field");
        v = v * 8 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

std::string c_field(std::string_view field) {
    const auto z = field.find('\0');
    return std::string(field.substr(0, z));
}

ArchiveContents read_tar(std::string_view data, std::size_t max_member) {
    ArchiveContents out;
    std::size_t pos = 0;
    std::string long_name;
    bool saw_header = false;
    while (pos + 512 <= data.size()) {
        const auto hdr = data.substr(pos, 512);
        if (std::all_of(hdr.begin(), hdr.end(), [](char c) { return c == '\0'; })) break;

        std::uint64_t checksum = 0;
        for (std::size_t i = 0; i < 512; ++i)
            checksum += (i >= 148 && i < 156) ? 32u : static_cast<unsigned char>(hdr[i]);
        if (checksum != parse_octal(hdr.substr(148, 8))) {
            if (!saw_header) throw FormatError("tar: bad header checksum");
            out.warnings.push_back("tar: bad header checksum, stopping");
            break;
        }
        saw_header = true;

        const std::uint64_t size = parse_octal(hdr.substr(124, 12));
        const char type = hdr[156];
        const std::size_t body = pos + 512;
        const std::size_t next = body + static_cast<std::size_t>((size + 511) / 512 * 512);
        if (body + size > data.size()) {
            out.warnings.push_back("tar: truncated member, stopping");
            break;
        }
        const auto payload = data.substr(body, static_cast<std::size_t>(size));

        std::string name = c_field(hdr.substr(0, 100));
        if (hdr.substr(257, 5) == "ustar") {
            const auto prefix = c_field(hdr.substr(345, 155));
            if (!prefix.empty()) name = prefix + "/" + name;
        }

        if (type == 'L') {
            long_name = c_field(payload);
        } else if (type == 'x') {
            // pax extended header: records "len key=value\n"
            std::size_t p = 0;
            while (p < payload.size()) {
                const auto sp = payload.find(' ', p);
                if (sp == std::string_view::npos) break;
                const auto len = std::stoul(std::string(payload.substr(p, sp - p)));
                if (len == 0 || p + len > payload.size()) break;
                const auto rec = payload.substr(sp + 1, p + len - sp - 2);
                if (rec.starts_with("path=")) long_name = std::string(rec.substr(5));
                p += len;
            }
        } else if (type == '0' || type == '\0' || type == '7') {
            if (!long_name.empty()) name = long_name;
            long_name.clear();
            const auto clean = sanitize_relative_path(name);
            if (clean.empty()) {
                out.warnings.push_back("tar: dropped member with unsafe path '" + name + "'");
            } else if (size > max_member) {
                out.warnings.push_back("tar: member '" + clean + "' exceeds the size limit");
            } else {
                out.entries.push_back({clean, std::string(payload)});
            }
        } else {
            // directories, links, devices, global pax headers
            long_name.clear();
        }
        pos = next;
    }
    if (!saw_header && !data.empty()) throw FormatError("tar: no valid header");
    return out;
}

}  // namespace

ArchiveKind archive_kind(std::string_view filename) {
    if (ends_with_ci(filename, ".zip")) return ArchiveKind::Zip;
    if (ends_with_ci(filename, ".tar.gz") || ends_with_ci(filename, ".tgz")) return ArchiveKind::TarGz;
    if (ends_with_ci(filename, ".tar")) return ArchiveKind::Tar;
    for (auto ext : {".rar", ".7z", ".gz", ".bz2", ".xz", ".tbz2", ".tbz", ".txz", ".zst", ".lz", ".lzma", ".jar"})
        if (ends_with_ci(filename, ext)) return ArchiveKind::Unsupported;
    return ArchiveKind::None;
}

std::string archive_stem(std::string_view filename) {
    for (auto ext : {".tar.gz", ".tgz", ".tar", ".zip"})
        if (ends_with_ci(filename, ext)) return std::string(filename.substr(0, filename.size() - std::strlen(ext)));
    return std::string(filename);
}

std::string gunzip(std::string_view bytes, std::size_t max_output) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw FormatError("gzip: inflateInit failed");
    std::string out;
    char buf[1 << 16];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    for (;;) {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof buf;
        const int rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END && !(rc == Z_BUF_ERROR && zs.avail_in == 0)) {
            inflateEnd(&zs);
            throw FormatError("gzip: corrupt stream");
        }
        out.append(buf, sizeof buf - zs.avail_out);
        if (out.size() > max_output) {
            inflateEnd(&zs);
            throw FormatError("gzip: decompressed size exceeds limit");
        }
        if (rc == Z_STREAM_END) {
            if (zs.avail_in == 0) break;
            inflateReset(&zs);  // concatenated member
        } else if (zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw FormatError("gzip: truncated stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

ArchiveContents read_archive(ArchiveKind kind, std::string_view bytes, std::size_t max_member_size) {
    ArchiveContents contents;
    switch (kind) {
        case ArchiveKind::Zip: contents = read_zip(bytes, max_member_size); break;
        case ArchiveKind::Tar: contents = read_tar(bytes, max_member_size); break;
        case ArchiveKind::TarGz: {
            const auto raw = gunzip(bytes, std::size_t{1} << 30);
            contents = read_tar(raw, max_member_size);
            break;
        }
        case ArchiveKind::None:
        case ArchiveKind::Unsupported: throw FormatError("unsupported archive format");
    }
    std::stable_sort(contents.entries.begin(), contents.entries.end(),
                     [](const ArchiveEntry& a, const ArchiveEntry& b) { return a.path < b.path; });
    return contents;
}

}  // namespace simdetect
