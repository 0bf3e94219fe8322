#include "simdetect/distance_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "simdetect/errors.hpp"

namespace simdetect {

DistanceMatrix::DistanceMatrix(std::string test_name, std::vector<std::string> ids)
    : test_(std::move(test_name)), ids_(std::move(ids)), values_(ids_.size() * ids_.size(), 0.0) {
    for (std::size_t i = 1; i < ids_.size(); ++i)
        if (!(ids_[i - 1] < ids_[i])) throw AnalysisError("matrix ids must be sorted and unique");
}

DistanceMatrix DistanceMatrix::from_upper_triangle(std::string test_name, std::vector<std::string> ids,
                                                   const std::vector<double>& triu) {
    DistanceMatrix m(std::move(test_name), std::move(ids));
    const std::size_t n = m.size();
    if (triu.size() != pair_count(n))
        throw FormatError("matrix '" + m.test_ + "': expected " + std::to_string(pair_count(n)) +
                          " upper-triangle values, got " + std::to_string(triu.size()));
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, triu[k++]);
    return m;
}

std::optional<std::size_t> DistanceMatrix::index_of(std::string_view id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids_.begin());
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double v) {
    const std::size_t n = ids_.size();
    if (i >= n || j >= n || i == j) throw AnalysisError("invalid matrix cell");
    if (!(v >= 0.0 && v <= 1.0)) throw AnalysisError("distance outside [0,1] in matrix '" + test_ + "'");
    values_[i * n + j] = v;
    values_[j * n + i] = v;
}

std::vector<double> DistanceMatrix::row_values(std::size_t i) const {
    std::vector<double> out;
    out.reserve(ids_.size() - 1);
    for (std::size_t j = 0; j < ids_.size(); ++j)
        if (j != i) out.push_back(at(i, j));
    return out;
}

std::vector<double> DistanceMatrix::upper_triangle() const {
    std::vector<double> out;
    out.reserve(pair_count(ids_.size()));
    for (std::size_t i = 0; i < ids_.size(); ++i)
        for (std::size_t j = i + 1; j < ids_.size(); ++j) out.push_back(at(i, j));
    return out;
}

nlohmann::json DistanceMatrix::to_json() const {
    return {{"test", test_}, {"ids", ids_}, {"triu", upper_triangle()}};
}

DistanceMatrix DistanceMatrix::from_json(const nlohmann::json& j) {
    try {
        return from_upper_triangle(j.at("test").get<std::string>(), j.at("ids").get<std::vector<std::string>>(),
                                   j.at("triu").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed matrix: ") + e.what());
    } catch (const AnalysisError& e) {
        throw FormatError(std::string("malformed matrix: ") + e.what());
    }
}

}  // namespace simdetect
