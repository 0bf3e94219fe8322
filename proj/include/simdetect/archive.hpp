#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace simdetect {

enum class ArchiveKind { None, Zip, Tar, TarGz, Unsupported };

/// Classifies a file name by extension. Plain files are `None`; compressed
/// container formats other than zip, tar and tar+gzip are `Unsupported`.
ArchiveKind archive_kind(std::string_view filename);

/// File name with any recognised archive extension removed ("s1.tar.gz" -> "s1").
std::string archive_stem(std::string_view filename);

struct ArchiveEntry {
    std::string path;  // sanitized, '/'-separated
    std::string bytes;
};

struct ArchiveContents {
    std::vector<ArchiveEntry> entries;
    std::vector<std::string> warnings;
};

/// Expands an archive fully in memory. Damaged individual members are skipped
/// with a warning; a container that cannot be parsed at all raises FormatError.
/// Members whose path escapes the archive root are dropped with a warning.
ArchiveContents read_archive(ArchiveKind kind, std::string_view bytes,
                             std::size_t max_member_size = std::size_t{256} << 20);

/// Inflates a gzip stream (concatenated members allowed).
std::string gunzip(std::string_view bytes, std::size_t max_output);

}  // namespace simdetect
