#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace simdetect {

enum class Backend { Deflate, BlockSort };

/// Compressor selection for the compression-distance metrics.
///
/// "deflate" is raw DEFLATE (no zlib/gzip header or checksum) from zlib at
/// the given level. "block_sort" is a Burrows-Wheeler transform over blocks
/// of level x 100 kB, followed by move-to-front and a DEFLATE entropy stage;
/// its size includes a 4-byte primary index per block.
struct CompressorId {
    Backend backend = Backend::Deflate;
    int level = 9;

    /// Throws ConfigError for unknown names or levels outside 1..9.
    static CompressorId parse(std::string_view name, int level);
    [[nodiscard]] std::string name() const;
    /// Backend identification recorded in reports, e.g. "zlib 1.2.11".
    [[nodiscard]] std::string version() const;

    friend bool operator==(const CompressorId&, const CompressorId&) = default;
};

/// Length in bytes of the compressed representation of `data`.
std::size_t compressed_len(const CompressorId& c, std::string_view data);

/// Input size beyond which the deflate window no longer sees the whole
/// concatenation, so distances degrade.
inline constexpr std::size_t kDeflateWindow = 32 * 1024;

}  // namespace simdetect
