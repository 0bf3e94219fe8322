#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace simdetect {

/// One file contributed by a submission. `bytes` holds the raw content;
/// relative paths always use '/' and never contain a ".." segment.
struct SourceFile {
    std::string relative_path;
    std::string bytes;
    // Name of the innermost archive this file was extracted from, empty when
    // it was read straight from disk.
    std::string archive;

    [[nodiscard]] std::size_t size() const noexcept { return bytes.size(); }

    friend bool operator==(const SourceFile&, const SourceFile&) = default;
};

struct Submission {
    std::string id;
    // Path of the directory or archive relative to the scanned root; archive
    // members are written "outer.zip!/inner".
    std::string origin;
    // Folder name used by folder-matching filters (archive stem for archives).
    std::string folder_name;
    // Archive name when the submission itself is an archive, else empty.
    std::string archive_name;
    std::vector<SourceFile> files;  // sorted by relative_path

    friend bool operator==(const Submission&, const Submission&) = default;
};

/// Decodes bytes as UTF-8, replacing each invalid sequence with U+FFFD.
std::string decode_utf8_lossy(std::string_view bytes);

/// Normalizes an archive or filesystem relative path to '/' separators with
/// no empty or "." segments. Returns an empty string when the path would
/// escape its parent ("..") or is otherwise unusable.
std::string sanitize_relative_path(std::string_view raw);

}  // namespace simdetect
