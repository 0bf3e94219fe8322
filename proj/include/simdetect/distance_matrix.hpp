#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace simdetect {

/// Symmetric n x n matrix of pairwise distances in [0,1] with a zero
/// diagonal. Symmetry holds by construction: set() writes both cells.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    /// Zero-filled matrix; `ids` must be sorted and unique (AnalysisError).
    DistanceMatrix(std::string test_name, std::vector<std::string> ids);

    /// Rebuilds a matrix from its row-major upper triangle (i < j).
    static DistanceMatrix from_upper_triangle(std::string test_name, std::vector<std::string> ids,
                                              const std::vector<double>& triu);

    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] const std::string& test_name() const noexcept { return test_; }
    [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view id) const;

    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values_[i * ids_.size() + j]; }
    /// Sets cells (i,j) and (j,i). Requires i != j and v in [0,1].
    void set(std::size_t i, std::size_t j, double v);

    /// Off-diagonal entries of row i in column order.
    [[nodiscard]] std::vector<double> row_values(std::size_t i) const;
    /// Row-major upper triangle, n(n-1)/2 values.
    [[nodiscard]] std::vector<double> upper_triangle() const;

    void rename(std::string test_name) { test_ = std::move(test_name); }

    /// {"test": ..., "ids": [...], "triu": [...]}
    [[nodiscard]] nlohmann::json to_json() const;
    static DistanceMatrix from_json(const nlohmann::json& j);

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    std::string test_;
    std::vector<std::string> ids_;
    std::vector<double> values_;
};

/// Number of unordered pairs, n(n-1)/2.
constexpr std::size_t pair_count(std::size_t n) noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }

}  // namespace simdetect
