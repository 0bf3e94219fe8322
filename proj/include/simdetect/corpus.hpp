#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "simdetect/filter.hpp"
#include "simdetect/source_file.hpp"

namespace simdetect {

struct ScanOptions {
    // Archive nesting levels expanded in memory; 1 = top-level archives only.
    int max_archive_depth = 2;
    // Larger files are excluded with a warning.
    std::size_t max_file_size = std::size_t{4} << 20;
};

struct ScanResult {
    std::vector<Submission> submissions;  // sorted by id
    std::vector<std::string> warnings;
};

/// Walks `root` and turns every directory or archive accepted by `selection`
/// into a Submission (archives are expanded in memory and behave like
/// folders). Unaccepted directories and archives are descended into. Without
/// a selection, every top-level directory and archive is a submission.
///
/// Throws IoError when the root is unreadable and ConfigError on duplicate
/// submission ids.
ScanResult scan(const std::filesystem::path& root, const std::optional<FilterQuery>& selection,
                const ScanOptions& options = {});

/// Facet values for a file inside `sub`: the innermost archive (or the
/// submission archive) and the file's parent folder (or the submission folder).
MatchContext context_for(const Submission& sub, const SourceFile& file);

/// Keeps exactly the files accepted by `content_filter`. Throws
/// AnalysisError "submission fully pruned" when nothing is left.
Submission prune(const Submission& sub, const FilterQuery& content_filter);

}  // namespace simdetect
