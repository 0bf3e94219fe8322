#include "simdetect/filter.hpp"

#include <boost/regex.hpp>

#include "simdetect/errors.hpp"

namespace simdetect {

struct FilterQuery::Compiled {
    boost::regex re;
};

namespace {

const char* facet_name(Facet f) {
    switch (f) {
        case Facet::Archive: return "archive";
        case Facet::Folder: return "folder";
        case Facet::Path: return "path";
        case Facet::Content: return "content";
    }
    return "?";
}

const char* op_name(Combinator c) {
    switch (c) {
        case Combinator::And: return "and";
        case Combinator::Or: return "or";
        case Combinator::Nor: return "nor";
    }
    return "?";
}

bool atom_holds(const FilterQuery& q, const SourceFile& file, const MatchContext& ctx) {
    switch (q.facet()) {
        case Facet::Archive: return q.matches(ctx.archive_name);
        case Facet::Folder: return q.matches(ctx.folder_name);
        case Facet::Path: return q.matches(file.relative_path);
        case Facet::Content: return q.matches(decode_utf8_lossy(file.bytes));
    }
    return false;
}

}  // namespace

FilterQuery FilterQuery::atom(Facet facet, std::string regex) {
    FilterQuery q;
    q.is_atom_ = true;
    q.facet_ = facet;
    try {
        auto compiled = std::make_shared<Compiled>();
        compiled->re = boost::regex(regex, boost::regex::perl);
        q.regex_ = std::move(compiled);
    } catch (const boost::regex_error& e) {
        throw ConfigError("invalid regex '" + regex + "': " + e.what());
    }
    q.pattern_ = std::move(regex);
    return q;
}

FilterQuery FilterQuery::combine(Combinator op, std::vector<FilterQuery> children) {
    if (children.empty())
        throw ConfigError(std::string("'") + op_name(op) + "' query needs at least one child");
    FilterQuery q;
    q.op_ = op;
    q.children_ = std::move(children);
    return q;
}

bool FilterQuery::matches(const std::string& text) const {
    if (!regex_) return false;
    return boost::regex_search(text, regex_->re);
}

FilterQuery FilterQuery::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("filter node must be a JSON object");
    if (j.contains("atom")) {
        if (!j["atom"].is_string() || !j.contains("regex") || !j["regex"].is_string())
            throw ConfigError("atom node needs string fields 'atom' and 'regex'");
        const auto kind = j["atom"].get<std::string>();
        Facet f;
        if (kind == "path") f = Facet::Path;
        else if (kind == "folder") f = Facet::Folder;
        else if (kind == "archive") f = Facet::Archive;
        else if (kind == "content") f = Facet::Content;
        else throw ConfigError("unknown atom kind '" + kind + "'");
        return atom(f, j["regex"].get<std::string>());
    }
    if (j.contains("op")) {
        if (!j["op"].is_string()) throw ConfigError("'op' must be a string");
        const auto name = j["op"].get<std::string>();
        Combinator op;
        if (name == "and") op = Combinator::And;
        else if (name == "or") op = Combinator::Or;
        else if (name == "nor") op = Combinator::Nor;
        else throw ConfigError("unknown op '" + name + "'");
        if (!j.contains("children") || !j["children"].is_array())
            throw ConfigError("'" + name + "' node needs a 'children' array");
        std::vector<FilterQuery> kids;
        for (const auto& c : j["children"]) kids.push_back(from_json(c));
        return combine(op, std::move(kids));
    }
    throw ConfigError("filter node needs either 'atom' or 'op'");
}

nlohmann::json FilterQuery::to_json() const {
    if (is_atom_) return {{"atom", facet_name(facet_)}, {"regex", pattern_}};
    auto kids = nlohmann::json::array();
    for (const auto& c : children_) kids.push_back(c.to_json());
    return {{"op", op_name(op_)}, {"children", std::move(kids)}};
}

std::string FilterQuery::describe() const {
    if (is_atom_) return std::string(facet_name(facet_)) + "~/" + pattern_ + "/";
    std::string out = op_name(op_);
    out += "(";
    for (std::size_t i = 0; i < children_.size(); ++i) {
        if (i) out += ", ";
        out += children_[i].describe();
    }
    out += ")";
    return out;
}

Decision explain(const FilterQuery& q, const SourceFile& file, const MatchContext& ctx) {
    if (q.is_atom()) return {atom_holds(q, file, ctx), &q};
    const auto kids = q.children();
    Decision last;
    switch (q.combinator()) {
        case Combinator::And:
            for (const auto& c : kids) {
                last = explain(c, file, ctx);
                if (!last.accepted) return last;
            }
            return last;
        case Combinator::Or:
            for (const auto& c : kids) {
                last = explain(c, file, ctx);
                if (last.accepted) return last;
            }
            return last;
        case Combinator::Nor:
            for (const auto& c : kids) {
                last = explain(c, file, ctx);
                if (last.accepted) return {false, last.decided_by};
            }
            return {true, last.decided_by};
    }
    return last;
}

bool evaluate(const FilterQuery& q, const SourceFile& file, const MatchContext& ctx) {
    return explain(q, file, ctx).accepted;
}

}  // namespace simdetect
