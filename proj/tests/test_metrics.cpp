#include <gtest/gtest.h>

#include "simdetect/compress.hpp"
#include "simdetect/errors.hpp"
#include "simdetect/metrics.hpp"
#include "simdetect/outliers.hpp"
#include "simdetect/random.hpp"
#include "support.hpp"

using namespace simdetect;
using namespace testing_support;

namespace {

std::string random_bytes(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::string s(n, '\0');
    for (auto& c : s) c = static_cast<char>(rng.next() & 0xFF);
    return s;
}

TokenVector vec(std::map<TokenCode, std::uint64_t> counts) { return {"v", std::move(counts)}; }

}  // namespace

// ---- compress --------------------------------------------------------------

TEST(Compress, PinnedLengths) {
    const CompressorId deflate;
    const auto block = CompressorId::parse("block_sort", 9);
    EXPECT_EQ(compressed_len(deflate, ""), 2u);
    EXPECT_EQ(compressed_len(deflate, ""), compressed_len(deflate, ""));
    EXPECT_EQ(compressed_len(deflate, std::string(10000, 'a')), 28u);
    EXPECT_EQ(compressed_len(block, std::string(10000, 'a')), 32u);
    const auto noise = random_bytes(10000, 7);
    EXPECT_GE(compressed_len(deflate, noise), 9900u);
    EXPECT_GE(compressed_len(block, noise), 9900u);
}

TEST(Compress, ConcatenationIsExploited) {
    for (std::size_t n : {1024u, 4096u, 16000u}) {
        const auto x = random_bytes(n, n);
        for (const auto& c : {CompressorId{}, CompressorId::parse("block_sort", 9), CompressorId::parse("deflate", 1)})
            EXPECT_LT(compressed_len(c, x + x), 2 * compressed_len(c, x)) << c.name() << " " << n;
    }
}

TEST(Compress, ParseRejectsBadIds) {
    EXPECT_THROW(CompressorId::parse("ppmz", 9), ConfigError);
    EXPECT_THROW(CompressorId::parse("deflate", 0), ConfigError);
    EXPECT_THROW(CompressorId::parse("deflate", 10), ConfigError);
    EXPECT_EQ(CompressorId::parse("deflate", 9), CompressorId{});
    EXPECT_FALSE(CompressorId{}.version().empty());
}

// ---- ncd -------------------------------------------------------------------

TEST(Ncd, IdenticalIsZero) {
    const auto x = random_bytes(3000, 1);
    EXPECT_EQ(ncd_pair(x, x, {}), 0.0);
    EXPECT_EQ(ncd_pair("abc", "abc", {}), 0.0);
}

TEST(Ncd, IndependentRandomIsNearOne) {
    const auto a = random_bytes(8192, 7).substr(0, 8192);
    const auto b = random_bytes(8192, 11);
    const double d = ncd_pair(a, b, {});
    EXPECT_GE(d, 0.9);
    EXPECT_LE(d, 1.0);
}

TEST(Ncd, FormulaFromLengths) {
    EXPECT_DOUBLE_EQ(ncd_from_lengths(100, 50, 120), 0.7);
    EXPECT_EQ(ncd_from_lengths(100, 100, 250), 1.0);  // clamped
    EXPECT_EQ(ncd_from_lengths(100, 100, 90), 0.0);   // clamped
}

TEST(Ncd, RenamedProgramTokenized) {
    const auto text = reference_program();
    std::string renamed = text;
    for (const auto& [from, to] : std::vector<std::pair<std::string, std::string>>{
             {"table", "inventory"}, {"quantity", "qty"}, {"item_count", "n_items"}, {"index", "slot"}}) {
        for (auto pos = renamed.find(from); pos != std::string::npos; pos = renamed.find(from, pos + to.size()))
            renamed.replace(pos, from.size(), to);
    }
    ASSERT_NE(renamed, text);
    const auto a = metric_payload(make_submission("a", {{"a.c", text}}), Algorithm::NcdTokens, Language::CLike);
    const auto b = metric_payload(make_submission("b", {{"a.c", renamed}}), Algorithm::NcdTokens, Language::CLike);
    EXPECT_EQ(a, b);
    EXPECT_LE(ncd_pair(a, b, {}), 0.1);
    // The raw formula without the identity short-circuit is still small.
    const CompressorId c;
    EXPECT_LE(ncd_from_lengths(compressed_len(c, a), compressed_len(c, b), compressed_len(c, a + b)), 0.1);
}

// ---- token distance --------------------------------------------------------

TEST(TokenDistance, HandExamples) {
    EXPECT_EQ(token_distance(vec({{3, 2}, {4, 7}}), vec({{3, 2}, {4, 7}})), 0.0);
    EXPECT_EQ(token_distance(vec({{3, 2}}), vec({{4, 7}})), 1.0);
    EXPECT_NEAR(token_distance(vec({{1, 2}, {2, 1}}), vec({{2, 1}, {3, 2}})), 0.8, 1e-15);
    EXPECT_EQ(token_distance(vec({{3, 1}, {4, 2}}), vec({{3, 2}, {4, 4}})), 0.0);
}

TEST(TokenDistance, MatchesBruteForce) {
    Rng rng(4242);
    for (int trial = 0; trial < 1000; ++trial) {
        std::map<TokenCode, std::uint64_t> a, b;
        const auto na = 1 + rng.below(40), nb = 1 + rng.below(40);
        for (std::uint64_t k = 0; k < na; ++k) a[static_cast<TokenCode>(rng.below(120))] += 1 + rng.below(500);
        for (std::uint64_t k = 0; k < nb; ++k) b[static_cast<TokenCode>(rng.below(120))] += 1 + rng.below(500);
        const double got = token_distance(vec(a), vec(b));
        EXPECT_NEAR(got, ref_cosine_distance(a, b), 1e-12);
        EXPECT_EQ(got, token_distance(vec(b), vec(a)));
    }
}

TEST(TokenDistance, ZeroVectorRejected) {
    const auto sub = make_submission("e", {{"a.c", "/* only a comment */"}});
    EXPECT_THROW(token_vector(tokenize(sub, Language::CLike)), AnalysisError);
}

TEST(TokenDistance, FileBreakNotCounted) {
    const auto one = make_submission("a", {{"a.c", "int a; int b;"}});
    const auto two = make_submission("b", {{"a.c", "int a;"}, {"b.c", "int b;"}});
    EXPECT_EQ(token_vector(tokenize(one, Language::CLike)).counts, token_vector(tokenize(two, Language::CLike)).counts);
}

TEST(PositionIndependence, FunctionPermutation) {
    const auto text = reference_program();
    const auto permuted = permute_functions(text);
    ASSERT_NE(permuted, text);
    const auto a = make_submission("a", {{"a.c", text}});
    const auto b = make_submission("b", {{"a.c", permuted}});
    EXPECT_EQ(token_distance(token_vector(tokenize(a, Language::CLike)), token_vector(tokenize(b, Language::CLike))),
              0.0);
    const auto pa = metric_payload(a, Algorithm::NcdTokens, Language::CLike);
    const auto pb = metric_payload(b, Algorithm::NcdTokens, Language::CLike);
    EXPECT_NE(pa, pb);
    EXPECT_LE(ncd_pair(pa, pb, {}), 0.15);
}

// ---- build_matrix ----------------------------------------------------------

TEST(BuildMatrix, TwoIdenticalSubmissions) {
    const std::vector<Submission> corpus{make_submission("a", {{"x.c", "int main() { return 0; }"}}),
                                         make_submission("b", {{"x.c", "int main() { return 0; }"}})};
    for (auto alg : {Algorithm::NcdRaw, Algorithm::NcdTokens, Algorithm::TokenCount}) {
        const auto m = build_matrix(corpus, alg, {});
        EXPECT_EQ(m.at(0, 1), 0.0);
        EXPECT_EQ(m.at(1, 0), 0.0);
        EXPECT_EQ(m.test_name(), to_string(alg));
    }
}

TEST(BuildMatrix, TokenCountHandValues) {
    // Vectors {IDENT:1}, {IDENT:1}, {INT_LIT:1}.
    const std::vector<Submission> corpus{make_submission("a", {{"x.c", "foo"}}), make_submission("b", {{"x.c", "bar"}}),
                                         make_submission("c", {{"x.c", "42"}})};
    const auto m = build_matrix(corpus, Algorithm::TokenCount, {});
    EXPECT_EQ(m.at(0, 1), 0.0);
    EXPECT_EQ(m.at(0, 2), 1.0);
    EXPECT_EQ(m.at(1, 2), 1.0);
}

TEST(BuildMatrix, CanonicalOrderAndWorkerIndependence) {
    std::vector<Submission> corpus;
    for (int k = 0; k < 7; ++k)
        corpus.push_back(make_submission("s" + std::to_string(k),
                                         {{"a.c", random_bytes(300 + 40 * k, 100 + k) + reference_program()}}));
    for (auto alg : {Algorithm::NcdRaw, Algorithm::NcdTokens, Algorithm::TokenCount}) {
        const auto serial = build_matrix(corpus, alg, {});
        for (unsigned w : {2u, 3u, 8u}) {
            MatrixParams p;
            p.workers = w;
            EXPECT_EQ(build_matrix(corpus, alg, p), serial);
        }
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            EXPECT_EQ(serial.at(i, i), 0.0);
            for (std::size_t j = 0; j < corpus.size(); ++j) {
                EXPECT_EQ(serial.at(i, j), serial.at(j, i));
                EXPECT_GE(serial.at(i, j), 0.0);
                EXPECT_LE(serial.at(i, j), 1.0);
            }
        }
        if (alg != Algorithm::TokenCount) {
            const auto pa = metric_payload(corpus[1], alg, Language::CLike);
            const auto pb = metric_payload(corpus[4], alg, Language::CLike);
            EXPECT_EQ(serial.at(4, 1), ncd_pair(pa, pb, {}));
        }
    }
}

TEST(BuildMatrix, NeedsTwoSubmissions) {
    EXPECT_THROW(build_matrix({make_submission("a", {{"x.c", "int a;"}})}, Algorithm::NcdRaw, {}), AnalysisError);
}

TEST(BuildMatrix, PairErrorsCarryContext) {
    const std::vector<Submission> corpus{make_submission("a", {{"x.c", "int a;"}}),
                                         make_submission("b", {{"x.c", "// nothing"}})};
    try {
        build_matrix(corpus, Algorithm::TokenCount, {});
        FAIL() << "expected an error";
    } catch (const AnalysisError& e) {
        EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
    }
}

TEST(Algorithms, Names) {
    EXPECT_EQ(parse_algorithm("ncd_raw"), Algorithm::NcdRaw);
    EXPECT_EQ(parse_algorithm("ncd_tokens"), Algorithm::NcdTokens);
    EXPECT_EQ(parse_algorithm("token_count"), Algorithm::TokenCount);
    EXPECT_THROW(parse_algorithm("winnowing"), ConfigError);
}

// ---- variance subtest ------------------------------------------------------

namespace {

// Shrunk values computed independently: sort-based row statistics, the same
// critical value, and the g/s rule.
DistanceMatrix ref_variance(const DistanceMatrix& m, double g) {
    const auto n = m.size();
    std::vector<double> med(n), mad(n);
    for (std::size_t i = 0; i < n; ++i) {
        med[i] = ref_median(m.row_values(i));
        mad[i] = ref_mad(m.row_values(i));
    }
    auto score = [&](std::size_t row, double x) {
        if (mad[row] == 0.0) return x < med[row] ? INFINITY : 0.0;
        return (med[row] - x) / mad[row];
    };
    DistanceMatrix out = m;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double x = m.at(i, j);
            const double s = std::max(score(i, x), score(j, x));
            if (s > g) out.set(i, j, std::isinf(s) ? 0.0 : x * g / s);
        }
    return out;
}

}  // namespace

TEST(VarianceSubtest, FlatMatrixUnchanged) {
    const auto m = random_matrix(6, [](auto, auto) { return 0.5; });
    EXPECT_EQ(variance_subtest(m, 0.05), m);
}

TEST(VarianceSubtest, PlantedLowCellOnlyShrinks) {
    Rng rng(3);
    auto m = random_matrix(10, [&](auto, auto) { return 0.6 + 0.05 * rng.normal(); });
    m.set(2, 7, 0.05);
    const auto out = variance_subtest(m, 0.05);
    EXPECT_LT(out.at(2, 7), 0.05);
    EXPECT_EQ(out.at(7, 2), out.at(2, 7));
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j)
            if (!((i == 2 && j == 7) || (i == 7 && j == 2))) {
                EXPECT_EQ(out.at(i, j), m.at(i, j));
            }
}

TEST(VarianceSubtest, MatchesReferenceAndNeverIncreases) {
    const HampelParams p{0.05, 100000, kDefaultSeed};
    CriticalValueTable table;
    const double g = hampel_critical(11, p, &table);
    Rng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        auto m = random_matrix(12, [&](auto, auto) { return 0.55 + 0.08 * rng.normal(); });
        for (int k = 0; k < 3; ++k) {
            const auto i = rng.below(12), j = rng.below(12);
            if (i != j) m.set(i, j, 0.3 * rng.uniform());
        }
        const auto out = variance_subtest(m, 0.05, p, &table);
        const auto ref = ref_variance(m, g);
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = 0; j < 12; ++j) {
                EXPECT_LE(out.at(i, j), m.at(i, j));
                EXPECT_NEAR(out.at(i, j), ref.at(i, j), 1e-12);
                if (ref.at(i, j) == m.at(i, j)) {
                    EXPECT_EQ(out.at(i, j), m.at(i, j));
                }
            }
        const auto again = variance_subtest(out, 0.05, p, &table);
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = 0; j < 12; ++j) EXPECT_LE(again.at(i, j), out.at(i, j));
    }
}

TEST(VarianceSubtest, DegenerateRowShrinksBelowMedianToZero) {
    auto m = random_matrix(5, [](auto, auto) { return 0.5; });
    m.set(0, 1, 0.2);
    const auto out = variance_subtest(m, 0.05);
    EXPECT_EQ(out.at(0, 1), 0.0);
    EXPECT_EQ(out.at(2, 3), 0.5);
}

TEST(VarianceSubtest, WorkerIndependent) {
    Rng rng(5);
    auto m = random_matrix(15, [&](auto, auto) { return rng.uniform(); });
    m.set(1, 2, 0.01);
    EXPECT_EQ(variance_subtest(m, 0.05, {}, nullptr, 1), variance_subtest(m, 0.05, {}, nullptr, 4));
}

TEST(VarianceSubtest, NeedsFour) {
    const auto m = random_matrix(3, [](auto, auto) { return 0.5; });
    EXPECT_THROW(variance_subtest(m, 0.05), AnalysisError);
}

// Order within row i is kept among cells whose shrink, if any, was decided by
// row i itself. A cell shrunk by its other row's score can drop below a
// smaller, untouched neighbour; that case is excluded here on purpose.
TEST(VarianceSubtest, OwnRowShrinksKeepRowOrder) {
    const HampelParams p{0.05, 100000, kDefaultSeed};
    CriticalValueTable table;
    const double g = hampel_critical(11, p, &table);
    Rng rng(606);
    std::size_t compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto m = random_matrix(12, [&](auto, auto) { return 0.55 + 0.08 * rng.normal(); });
        for (int k = 0; k < 4; ++k) {
            const auto i = rng.below(12), j = rng.below(12);
            if (i != j) m.set(i, j, 0.3 * rng.uniform());
        }
        const auto out = variance_subtest(m, 0.05, p, &table);
        std::vector<double> med(12), mad(12);
        for (std::size_t i = 0; i < 12; ++i) {
            med[i] = ref_median(m.row_values(i));
            mad[i] = ref_mad(m.row_values(i));
        }
        auto score = [&](std::size_t row, double x) { return (med[row] - x) / mad[row]; };
        for (std::size_t i = 0; i < 12; ++i) {
            std::vector<std::size_t> own;
            for (std::size_t j = 0; j < 12; ++j) {
                if (j == i) continue;
                const double x = m.at(i, j);
                if (std::max(score(i, x), score(j, x)) <= g || score(i, x) >= score(j, x)) own.push_back(j);
            }
            for (auto j : own)
                for (auto k : own)
                    if (m.at(i, j) < m.at(i, k)) {
                        EXPECT_LE(out.at(i, j), out.at(i, k)) << trial << " row " << i;
                        ++compared;
                    }
        }
    }
    EXPECT_GT(compared, 0u);
}
