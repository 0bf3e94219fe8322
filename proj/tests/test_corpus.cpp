#include <gtest/gtest.h>

#include "archive_writer.hpp"
#include "simdetect/archive.hpp"
#include "simdetect/corpus.hpp"
#include "simdetect/errors.hpp"
#include "simdetect/filter.hpp"
#include "support.hpp"

using namespace simdetect;
using namespace testing_support;

namespace {

SourceFile file(std::string path, std::string bytes = {}) { return {std::move(path), std::move(bytes), {}}; }

std::vector<std::string> ids_of(const ScanResult& r) {
    std::vector<std::string> ids;
    for (const auto& s : r.submissions) ids.push_back(s.id);
    return ids;
}

std::vector<std::string> paths_of(const Submission& s) {
    std::vector<std::string> out;
    for (const auto& f : s.files) out.push_back(f.relative_path);
    return out;
}

}  // namespace

// ---- filter ----------------------------------------------------------------

TEST(Filter, CompositeNeedsChildren) {
    EXPECT_THROW(FilterQuery::none_of({}), ConfigError);
    EXPECT_THROW(FilterQuery::all_of({}), ConfigError);
    EXPECT_THROW(FilterQuery::any_of({}), ConfigError);
}

TEST(Filter, BadRegexRejectedAtConstruction) {
    EXPECT_THROW(FilterQuery::path("(unclosed"), ConfigError);
}

TEST(Filter, AnchoredPrefix) {
    EXPECT_TRUE(evaluate(FilterQuery::path("^src/"), file("src/x.c"), {}));
    EXPECT_FALSE(evaluate(FilterQuery::path("^src/"), file("lib/src/x.c"), {}));
}

TEST(Filter, NestedTruthTable) {
    // "abc" matches both "a" and "b": Or(a) is true, Nor(b) is false.
    const auto q = FilterQuery::all_of({FilterQuery::any_of({FilterQuery::path("a")}),
                                        FilterQuery::none_of({FilterQuery::path("b")})});
    EXPECT_FALSE(evaluate(q, file("abc"), {}));
    EXPECT_TRUE(evaluate(q, file("axc"), {}));
}

TEST(Filter, SingleChildIdentities) {
    const std::vector<FilterQuery> atoms{FilterQuery::path("\\.c$"), FilterQuery::content("main"),
                                         FilterQuery::folder("^s1$"), FilterQuery::archive("zip$")};
    const std::vector<std::pair<SourceFile, MatchContext>> cases{
        {file("a.c", "int main;"), {"", "s1"}},       {file("a.h", "x"), {"s1.zip", "s1"}},
        {file("dir/b.c", "nothing"), {"", "dir"}},    {file("b.java", "main"), {"t.tar", "t"}}};
    for (const auto& q : atoms) {
        for (const auto& [f, ctx] : cases) {
            const bool v = evaluate(q, f, ctx);
            EXPECT_EQ(evaluate(FilterQuery::none_of({q}), f, ctx), !v);
            EXPECT_EQ(evaluate(FilterQuery::all_of({q}), f, ctx), v);
            EXPECT_EQ(evaluate(FilterQuery::any_of({q}), f, ctx), v);
        }
    }
}

TEST(Filter, ContentMatchesDecodedText) {
    // Invalid UTF-8 becomes U+FFFD; the rest of the text still matches.
    const auto f = file("x.c", std::string("abc\xff\xfe" " GENERATED"));
    EXPECT_TRUE(evaluate(FilterQuery::content("GENERATED"), f, {}));
    EXPECT_TRUE(evaluate(FilterQuery::content("\xEF\xBF\xBD"), f, {}));
}

TEST(Filter, JsonRoundTrip) {
    const nlohmann::json j = {
        {"op", "and"},
        {"children",
         {{{"atom", "path"}, {"regex", "\\.c$"}},
          {{"op", "nor"}, {"children", {{{"atom", "content"}, {"regex", "AUTO-GENERATED"}}}}}}}};
    const auto q = FilterQuery::from_json(j);
    EXPECT_EQ(q.to_json(), j);
    EXPECT_THROW(FilterQuery::from_json({{"op", "xor"}, {"children", nlohmann::json::array()}}), ConfigError);
    EXPECT_THROW(FilterQuery::from_json({{"atom", "size"}, {"regex", "x"}}), ConfigError);
    EXPECT_THROW(FilterQuery::from_json({{"op", "or"}, {"children", nlohmann::json::array()}}), ConfigError);
}

TEST(Filter, ExplainNamesDecidingAtom) {
    const auto q = FilterQuery::all_of(
        {FilterQuery::path("\\.c$"), FilterQuery::none_of({FilterQuery::content("AUTO-GENERATED")})});
    const auto d1 = explain(q, file("notes.txt", "x"), {});
    EXPECT_FALSE(d1.accepted);
    ASSERT_NE(d1.decided_by, nullptr);
    EXPECT_EQ(d1.decided_by->describe(), "path~/\\.c$/");
    const auto d2 = explain(q, file("gen.c", "// AUTO-GENERATED"), {});
    EXPECT_FALSE(d2.accepted);
    ASSERT_NE(d2.decided_by, nullptr);
    EXPECT_EQ(d2.decided_by->describe(), "content~/AUTO-GENERATED/");
}

// ---- prune -----------------------------------------------------------------

TEST(Prune, KeepsOnlyAcceptedFiles) {
    const auto sub = make_submission("s1", {{"main.c", "int main(){}"},
                                            {"gen.c", "/* AUTO-GENERATED */"},
                                            {"notes.txt", "hello"}});
    const auto q = FilterQuery::all_of(
        {FilterQuery::path("\\.c$"), FilterQuery::none_of({FilterQuery::content("AUTO-GENERATED")})});
    const auto out = prune(sub, q);
    EXPECT_EQ(paths_of(out), std::vector<std::string>{"main.c"});
    EXPECT_EQ(prune(out, q), out);
}

TEST(Prune, TautologyIsIdentity) {
    const auto sub = make_submission("s1", {{"a.c", "1"}, {"b/c.h", "2"}});
    EXPECT_EQ(prune(sub, FilterQuery::any_of({FilterQuery::path(".*")})), sub);
}

TEST(Prune, FullyPrunedIsAnError) {
    const auto sub = make_submission("s7", {{"a.c", "1"}});
    try {
        prune(sub, FilterQuery::path("\\.java$"));
        FAIL() << "expected an error";
    } catch (const AnalysisError& e) {
        EXPECT_NE(std::string(e.what()).find("submission fully pruned"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("s7"), std::string::npos);
    }
}

// ---- archives --------------------------------------------------------------

TEST(Archive, KindAndStem) {
    EXPECT_EQ(archive_kind("a.zip"), ArchiveKind::Zip);
    EXPECT_EQ(archive_kind("a.TAR"), ArchiveKind::Tar);
    EXPECT_EQ(archive_kind("a.tar.gz"), ArchiveKind::TarGz);
    EXPECT_EQ(archive_kind("a.tgz"), ArchiveKind::TarGz);
    EXPECT_EQ(archive_kind("a.rar"), ArchiveKind::Unsupported);
    EXPECT_EQ(archive_kind("a.c"), ArchiveKind::None);
    EXPECT_EQ(archive_stem("s1.tar.gz"), "s1");
    EXPECT_EQ(archive_stem("s2.zip"), "s2");
}

TEST(Archive, ReadsZipTarAndTarGz) {
    const Members m{{"a.c", "int a;"}, {"dir/b.c", "int b;"}};
    for (const auto& [kind, bytes] : std::vector<std::pair<ArchiveKind, std::string>>{
             {ArchiveKind::Zip, make_zip(m)},
             {ArchiveKind::Zip, make_zip(m, false)},
             {ArchiveKind::Tar, make_tar(m)},
             {ArchiveKind::TarGz, make_gzip(make_tar(m))}}) {
        const auto c = read_archive(kind, bytes);
        ASSERT_EQ(c.entries.size(), 2u);
        EXPECT_EQ(c.entries[0].path, "a.c");
        EXPECT_EQ(c.entries[0].bytes, "int a;");
        EXPECT_EQ(c.entries[1].path, "dir/b.c");
        EXPECT_TRUE(c.warnings.empty());
    }
}

TEST(Archive, TraversalMembersDropped) {
    const auto c = read_archive(ArchiveKind::Tar, make_tar({{"../evil.c", "x"}, {"ok.c", "y"}}));
    ASSERT_EQ(c.entries.size(), 1u);
    EXPECT_EQ(c.entries[0].path, "ok.c");
    EXPECT_FALSE(c.warnings.empty());
}

TEST(Archive, GarbageIsFormatError) {
    EXPECT_THROW(read_archive(ArchiveKind::Zip, "not a zip at all, definitely"), FormatError);
}

// ---- scan ------------------------------------------------------------------

TEST(Scan, FolderSelection) {
    TempDir root;
    write_file(root / "s1/a.c", "int a;");
    write_file(root / "s2/b.c", "int b;");
    write_file(root / "other/c.c", "int c;");
    const auto r = scan(root.path(), FilterQuery::folder("^s[0-9]+$"));
    EXPECT_EQ(ids_of(r), (std::vector<std::string>{"s1", "s2"}));
}

TEST(Scan, NorSelection) {
    TempDir root;
    write_file(root / "s1/a.c", "int a;");
    write_file(root / "solution/a.c", "int a;");
    const auto r = scan(root.path(), FilterQuery::none_of({FilterQuery::folder("solution")}));
    EXPECT_EQ(ids_of(r), std::vector<std::string>{"s1"});
}

TEST(Scan, ArchiveIsAFolder) {
    TempDir root;
    write_file(root / "s1.zip", make_zip({{"a.c", "int a;"}}));
    write_file(root / "s2.tar.gz", make_gzip(make_tar({{"src/b.c", "int b;"}})));
    const auto r = scan(root.path(), std::nullopt);
    ASSERT_EQ(ids_of(r), (std::vector<std::string>{"s1", "s2"}));
    EXPECT_EQ(paths_of(r.submissions[0]), std::vector<std::string>{"a.c"});
    EXPECT_EQ(r.submissions[0].archive_name, "s1.zip");
    EXPECT_EQ(paths_of(r.submissions[1]), std::vector<std::string>{"src/b.c"});
}

TEST(Scan, NestedArchivesRespectDepth) {
    TempDir root;
    const auto inner = make_zip({{"deep.c", "int d;"}});
    write_file(root / "s1.zip", make_zip({{"top.c", "int t;"}, {"inner.zip", inner}}));
    const auto two = scan(root.path(), std::nullopt);
    ASSERT_EQ(two.submissions.size(), 1u);
    EXPECT_EQ(paths_of(two.submissions[0]), (std::vector<std::string>{"inner.zip/deep.c", "top.c"}));

    ScanOptions shallow;
    shallow.max_archive_depth = 1;
    const auto one = scan(root.path(), std::nullopt, shallow);
    ASSERT_EQ(one.submissions.size(), 1u);
    for (const auto& f : one.submissions[0].files) EXPECT_EQ(f.relative_path.find("deep.c"), std::string::npos);
}

TEST(Scan, CorruptArchiveWarnsAndSkips) {
    TempDir root;
    write_file(root / "bad.zip", "garbage garbage garbage garbage");
    write_file(root / "s1/a.c", "int a;");
    const auto r = scan(root.path(), std::nullopt);
    EXPECT_EQ(ids_of(r), std::vector<std::string>{"s1"});
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Scan, OversizedFilesExcludedWithWarning) {
    TempDir root;
    write_file(root / "s1/a.c", "int a;");
    write_file(root / "s1/big.c", std::string(2000, 'x'));
    ScanOptions o;
    o.max_file_size = 1000;
    const auto r = scan(root.path(), std::nullopt, o);
    ASSERT_EQ(r.submissions.size(), 1u);
    EXPECT_EQ(paths_of(r.submissions[0]), std::vector<std::string>{"a.c"});
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Scan, DuplicateIdsNameBothOrigins) {
    TempDir root;
    write_file(root / "s1/a.c", "int a;");
    write_file(root / "s1.zip", make_zip({{"a.c", "int a;"}}));
    try {
        scan(root.path(), std::nullopt);
        FAIL() << "expected duplicate id error";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("s1.zip"), std::string::npos);
        EXPECT_NE(msg.find("'s1'"), std::string::npos);
    }
}

TEST(Scan, MissingRootIsIoError) {
    EXPECT_THROW(scan("/nonexistent/simdetect/root", std::nullopt), IoError);
}

TEST(Scan, DeterministicAndSorted) {
    TempDir root;
    for (const char* id : {"zeta", "alpha", "mid"}) {
        write_file(root / id / "z.c", std::string("int z; // ") + id);
        write_file(root / id / "a/b.c", "int b;");
    }
    const auto r1 = scan(root.path(), std::nullopt);
    const auto r2 = scan(root.path(), std::nullopt);
    EXPECT_EQ(r1.submissions, r2.submissions);
    EXPECT_EQ(ids_of(r1), (std::vector<std::string>{"alpha", "mid", "zeta"}));
    for (const auto& s : r1.submissions) {
        EXPECT_EQ(paths_of(s), (std::vector<std::string>{"a/b.c", "z.c"}));
        for (const auto& f : s.files) {
            EXPECT_EQ(f.size(), f.bytes.size());
            EXPECT_EQ(f.relative_path.find(".."), std::string::npos);
            EXPECT_EQ(f.relative_path.find('\\'), std::string::npos);
        }
    }
}

TEST(Scan, SelectionDescendsIntoUnselectedFolders) {
    TempDir root;
    write_file(root / "course/s1/a.c", "int a;");
    write_file(root / "course/s2/a.c", "int a;");
    const auto r = scan(root.path(), FilterQuery::folder("^s[0-9]$"));
    EXPECT_EQ(ids_of(r), (std::vector<std::string>{"s1", "s2"}));
}

TEST(Utf8, LossyDecode) {
    EXPECT_EQ(decode_utf8_lossy("ok"), "ok");
    EXPECT_EQ(decode_utf8_lossy(std::string("a\xff" "b")), "a\xEF\xBF\xBD" "b");
    EXPECT_EQ(decode_utf8_lossy("\xC3\xA9"), "\xC3\xA9");
}

TEST(Paths, Sanitize) {
    EXPECT_EQ(sanitize_relative_path("a\\b/./c.c"), "a/b/c.c");
    EXPECT_EQ(sanitize_relative_path("../x.c"), "");
    EXPECT_EQ(sanitize_relative_path("/abs/x.c"), "abs/x.c");
}
