#include "simdetect/cache.hpp"

#include <cstdlib>

#include "simdetect/errors.hpp"

namespace simdetect {

namespace fs = std::filesystem;

fs::path shipped_table_path() { return fs::path(SIMDETECT_DATA_DIR) / "critical_values.json"; }

std::optional<fs::path> user_table_path() {
    if (const char* dir = std::getenv("SIMDETECT_CACHE_DIR"); dir && *dir) return fs::path(dir) / "critical_values.json";
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
        return fs::path(xdg) / "simdetect" / "critical_values.json";
    if (const char* home = std::getenv("HOME"); home && *home)
        return fs::path(home) / ".cache" / "simdetect" / "critical_values.json";
    return std::nullopt;
}

CriticalValueTable load_critical_values() {
    CriticalValueTable table = CriticalValueTable::load(shipped_table_path());
    if (const auto user = user_table_path()) table.merge(CriticalValueTable::load(*user));
    return table;
}

bool store_critical_values(const CriticalValueTable& table) {
    const auto path = user_table_path();
    if (!path) return false;
    try {
        std::error_code ec;
        fs::create_directories(path->parent_path(), ec);
        table.save(*path);
        return true;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace simdetect
