#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simdetect/source_file.hpp"

namespace simdetect {

enum class Facet { Archive, Folder, Path, Content };
enum class Combinator { And, Or, Nor };

/// Facet values an atom can be tested against besides the file itself.
struct MatchContext {
    std::string archive_name;
    std::string folder_name;
};

/// Nested boolean query over archive, folder, path and content regexes.
///
/// Queries are immutable values. Regexes are compiled at construction, so a
/// successfully built query can always be evaluated. Composite nodes need at
/// least one child. Regex search semantics are used (unanchored unless the
/// pattern anchors itself), with ECMAScript/Perl syntax.
class FilterQuery {
public:
    static FilterQuery atom(Facet facet, std::string regex);
    static FilterQuery combine(Combinator op, std::vector<FilterQuery> children);

    static FilterQuery path(std::string regex) { return atom(Facet::Path, std::move(regex)); }
    static FilterQuery folder(std::string regex) { return atom(Facet::Folder, std::move(regex)); }
    static FilterQuery archive(std::string regex) { return atom(Facet::Archive, std::move(regex)); }
    static FilterQuery content(std::string regex) { return atom(Facet::Content, std::move(regex)); }
    static FilterQuery all_of(std::vector<FilterQuery> c) { return combine(Combinator::And, std::move(c)); }
    static FilterQuery any_of(std::vector<FilterQuery> c) { return combine(Combinator::Or, std::move(c)); }
    static FilterQuery none_of(std::vector<FilterQuery> c) { return combine(Combinator::Nor, std::move(c)); }

    /// Parses the canonical JSON encoding:
    ///   {"op":"and"|"or"|"nor","children":[...]}
    ///   {"atom":"path"|"folder"|"archive"|"content","regex":"..."}
    /// Throws ConfigError on any malformed node or bad regex.
    static FilterQuery from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::json to_json() const;

    [[nodiscard]] bool is_atom() const noexcept { return is_atom_; }
    [[nodiscard]] Facet facet() const noexcept { return facet_; }
    [[nodiscard]] Combinator combinator() const noexcept { return op_; }
    [[nodiscard]] const std::string& pattern() const noexcept { return pattern_; }
    [[nodiscard]] std::span<const FilterQuery> children() const noexcept { return children_; }

    /// Short human-readable rendering, e.g. `path~/\.c$/`.
    [[nodiscard]] std::string describe() const;

    /// Regex search against an arbitrary string (atoms only).
    [[nodiscard]] bool matches(const std::string& text) const;

private:
    struct Compiled;

    bool is_atom_ = false;
    Facet facet_ = Facet::Path;
    Combinator op_ = Combinator::And;
    std::string pattern_;
    std::shared_ptr<const Compiled> regex_;
    std::vector<FilterQuery> children_;
};

bool evaluate(const FilterQuery& query, const SourceFile& file, const MatchContext& context);

/// Result of evaluating a query together with the atom that settled it.
struct Decision {
    bool accepted = false;
    const FilterQuery* decided_by = nullptr;
};

/// Same truth value as evaluate(). For And the deciding atom is the first
/// false child (or the last child when all hold); Or mirrors that with the
/// first true child; Nor reports the first true child, else the last.
Decision explain(const FilterQuery& query, const SourceFile& file, const MatchContext& context);

}  // namespace simdetect
