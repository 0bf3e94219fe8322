#include "simdetect/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "simdetect/archive.hpp"
#include "simdetect/errors.hpp"

namespace simdetect {

namespace fs = std::filesystem;

namespace {

struct Node {
    enum class Kind { Dir, File, Archive };
    Kind kind = Kind::Dir;
    std::string name;
    std::string origin;
    std::string bytes;
    std::string archive;  // innermost enclosing archive (files); own name (archives)
    std::map<std::string, Node> children;
};

class TreeBuilder {
public:
    TreeBuilder(const ScanOptions& opts, std::vector<std::string>& warnings) : opts_(opts), warnings_(warnings) {}

    void load_dir(const fs::path& dir, const std::string& origin, Node& into) {
        std::vector<fs::directory_entry> entries;
        std::error_code ec;
        for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) entries.push_back(*it);
        if (ec) {
            warnings_.push_back("cannot list '" + origin + "': " + ec.message());
            return;
        }
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.path().filename() < b.path().filename(); });
        for (const auto& e : entries) {
            const std::string name = e.path().filename().string();
            const std::string child_origin = origin.empty() ? name : origin + "/" + name;
            if (e.is_symlink()) {
                warnings_.push_back("skipping symbolic link '" + child_origin + "'");
                continue;
            }
            if (e.is_directory()) {
                Node child;
                child.kind = Node::Kind::Dir;
                child.name = name;
                child.origin = child_origin;
                load_dir(e.path(), child_origin, child);
                into.children.emplace(name, std::move(child));
            } else if (e.is_regular_file()) {
                const auto kind = archive_kind(name);
                const auto size = e.file_size(ec);
                if (kind == ArchiveKind::None && size > opts_.max_file_size) {
                    warnings_.push_back("excluding '" + child_origin + "': larger than the file size cap");
                    continue;
                }
                std::string bytes;
                if (!read_file(e.path(), bytes)) {
                    warnings_.push_back("cannot read '" + child_origin + "'");
                    continue;
                }
                add_file(into, name, child_origin, std::move(bytes), "", 0);
            }
        }
    }

private:
    static bool read_file(const fs::path& p, std::string& out) {
        std::ifstream in(p, std::ios::binary);
        if (!in) return false;
        std::ostringstream ss;
        ss << in.rdbuf();
        out = std::move(ss).str();
        return static_cast<bool>(in) || in.eof();
    }

    // `depth` = number of archives enclosing `parent`.
    void add_file(Node& parent, const std::string& name, const std::string& origin, std::string bytes,
                  const std::string& enclosing_archive, int depth) {
        const auto kind = archive_kind(name);
        if (kind == ArchiveKind::Unsupported) {
            warnings_.push_back("excluding '" + origin + "': unsupported archive format");
            return;
        }
        if (kind == ArchiveKind::None) {
            if (bytes.size() > opts_.max_file_size) {
                warnings_.push_back("excluding '" + origin + "': larger than the file size cap");
                return;
            }
            Node f;
            f.kind = Node::Kind::File;
            f.name = name;
            f.origin = origin;
            f.bytes = std::move(bytes);
            f.archive = enclosing_archive;
            parent.children.insert_or_assign(name, std::move(f));
            return;
        }
        if (depth >= opts_.max_archive_depth) {
            warnings_.push_back("excluding '" + origin + "': archive nesting deeper than " +
                                std::to_string(opts_.max_archive_depth));
            return;
        }
        Node arc;
        arc.kind = Node::Kind::Archive;
        arc.name = name;
        arc.origin = origin;
        arc.archive = name;
        try {
            auto contents = read_archive(kind, bytes);
            for (auto& w : contents.warnings) warnings_.push_back(origin + ": " + w);
            for (auto& entry : contents.entries) {
                Node* dir = &arc;
                std::string_view rest = entry.path;
                std::string sub_origin = origin + "!";
                for (auto slash = rest.find('/'); slash != std::string_view::npos; slash = rest.find('/')) {
                    const std::string seg(rest.substr(0, slash));
                    sub_origin += "/" + seg;
                    auto [it, inserted] = dir->children.try_emplace(seg);
                    if (inserted) {
                        it->second.kind = Node::Kind::Dir;
                        it->second.name = seg;
                        it->second.origin = sub_origin;
                    } else if (it->second.kind == Node::Kind::File) {
                        break;
                    }
                    dir = &it->second;
                    rest.remove_prefix(slash + 1);
                }
                if (dir->kind == Node::Kind::File) {
                    warnings_.push_back(origin + ": conflicting member '" + entry.path + "'");
                    continue;
                }
                add_file(*dir, std::string(rest), origin + "!/" + entry.path, std::move(entry.bytes), name, depth + 1);
            }
        } catch (const std::exception& e) {
            warnings_.push_back("corrupt archive '" + origin + "': " + e.what());
        }
        parent.children.insert_or_assign(name, std::move(arc));
    }

    const ScanOptions& opts_;
    std::vector<std::string>& warnings_;
};

void collect_files(const Node& node, const std::string& prefix, std::vector<SourceFile>& out) {
    for (const auto& [name, child] : node.children) {
        const std::string rel = prefix.empty() ? name : prefix + "/" + name;
        if (child.kind == Node::Kind::File) out.push_back({rel, child.bytes, child.archive});
        else collect_files(child, rel, out);
    }
}

Submission make_submission(const Node& node) {
    Submission s;
    const bool is_archive = node.kind == Node::Kind::Archive;
    s.folder_name = is_archive ? archive_stem(node.name) : node.name;
    s.id = s.folder_name;
    s.origin = node.origin;
    s.archive_name = is_archive ? node.name : std::string{};
    collect_files(node, "", s.files);
    std::sort(s.files.begin(), s.files.end(),
              [](const SourceFile& a, const SourceFile& b) { return a.relative_path < b.relative_path; });
    return s;
}

void select_submissions(const Node& node, const std::string& prefix, const std::string& enclosing_archive,
                        const std::optional<FilterQuery>& selection, std::vector<Submission>& out,
                        std::vector<std::string>& warnings) {
    for (const auto& [name, child] : node.children) {
        if (child.kind == Node::Kind::File) continue;
        const std::string rel = prefix.empty() ? name : prefix + "/" + name;
        const bool is_archive = child.kind == Node::Kind::Archive;
        bool take = true;
        if (selection) {
            const SourceFile probe{rel, {}, {}};
            const MatchContext ctx{is_archive ? name : enclosing_archive, is_archive ? archive_stem(name) : name};
            take = evaluate(*selection, probe, ctx);
        }
        if (take) {
            auto sub = make_submission(child);
            if (sub.files.empty()) warnings.push_back("submission '" + sub.id + "' yields no files; skipped");
            else out.push_back(std::move(sub));
        } else if (selection) {
            select_submissions(child, rel, is_archive ? name : enclosing_archive, selection, out, warnings);
        }
    }
}

}  // namespace

ScanResult scan(const fs::path& root, const std::optional<FilterQuery>& selection, const ScanOptions& options) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw IoError("cannot read corpus root '" + root.string() + "'");
    fs::directory_iterator probe(root, ec);
    if (ec) throw IoError("cannot read corpus root '" + root.string() + "': " + ec.message());

    ScanResult result;
    Node tree;
    TreeBuilder(options, result.warnings).load_dir(root, "", tree);
    select_submissions(tree, "", "", selection, result.submissions, result.warnings);

    std::stable_sort(result.submissions.begin(), result.submissions.end(),
                     [](const Submission& a, const Submission& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < result.submissions.size(); ++i) {
        const auto& a = result.submissions[i - 1];
        const auto& b = result.submissions[i];
        if (a.id == b.id)
            throw ConfigError("duplicate submission id '" + a.id + "' from '" + a.origin + "' and '" + b.origin + "'");
    }
    return result;
}

MatchContext context_for(const Submission& sub, const SourceFile& file) {
    MatchContext ctx;
    ctx.archive_name = file.archive.empty() ? sub.archive_name : file.archive;
    const auto slash = file.relative_path.rfind('/');
    if (slash == std::string::npos) {
        ctx.folder_name = sub.folder_name;
    } else {
        const auto prev = file.relative_path.rfind('/', slash == 0 ? 0 : slash - 1);
        const auto start = prev == std::string::npos || prev >= slash ? 0 : prev + 1;
        ctx.folder_name = file.relative_path.substr(start, slash - start);
    }
    return ctx;
}

Submission prune(const Submission& sub, const FilterQuery& content_filter) {
    Submission out = sub;
    out.files.clear();
    for (const auto& f : sub.files)
        if (evaluate(content_filter, f, context_for(sub, f))) out.files.push_back(f);
    if (out.files.empty()) throw AnalysisError("submission fully pruned: '" + sub.id + "'");
    return out;
}

}  // namespace simdetect
