#pragma once

#include <filesystem>
#include <optional>

#include "simdetect/outliers.hpp"

namespace simdetect {

/// Critical-value table installed with the sources (data/critical_values.json).
std::filesystem::path shipped_table_path();

/// Writable table: $SIMDETECT_CACHE_DIR/critical_values.json, else the user
/// cache directory ($XDG_CACHE_HOME or ~/.cache, under "simdetect").
/// Empty when no location can be determined.
std::optional<std::filesystem::path> user_table_path();

/// Shipped entries overlaid with the user cache.
CriticalValueTable load_critical_values();

/// Writes `table` to the user cache location, creating the directory.
/// Returns false when there is no location or the write fails.
bool store_critical_values(const CriticalValueTable& table);

}  // namespace simdetect
