#include <gtest/gtest.h>

#include <set>

#include "simdetect/errors.hpp"
#include "simdetect/lexer.hpp"
#include "simdetect/metrics.hpp"
#include "simdetect/synth.hpp"
#include "support.hpp"

using namespace simdetect;
using namespace simdetect::synth;
using namespace testing_support;

namespace {

const std::string& text_of(const Submission& s) { return s.files.at(0).bytes; }

std::vector<TokenCode> tokens_of(const Submission& s) { return tokenize(s, Language::CLike).tokens; }

double ncd_tokens(const Submission& a, const Submission& b) {
    const auto pa = metric_payload(a, Algorithm::NcdTokens, Language::CLike);
    const auto pb = metric_payload(b, Algorithm::NcdTokens, Language::CLike);
    return ncd_pair(pa, pb, CompressorId{});
}

Submission original(std::uint64_t seed, std::uint64_t index) {
    return make_submission("P" + std::to_string(index + 1),
                           {{std::string(kSourceName), print_program(generate_program(seed, index))}});
}

}  // namespace

TEST(Generate, ProgramsAreWellFormedAndDistinct) {
    std::set<std::string> seen;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto text = print_program(generate_program(7, k));
        EXPECT_TRUE(well_formed(text)) << text;
        EXPECT_TRUE(seen.insert(text).second);
        const auto n = lex_c_like(text).size();
        EXPECT_GT(n, 400u);
        EXPECT_LT(n, 3000u);
    }
    EXPECT_EQ(print_program(generate_program(7, 3)), print_program(generate_program(7, 3)));
}

TEST(Generate, ParsePrintRoundTrip) {
    for (std::uint64_t k = 0; k < 10; ++k) {
        const auto p = generate_program(11, k);
        const auto text = print_program(p);
        EXPECT_EQ(parse_program(text), p);
        EXPECT_EQ(print_program(parse_program(text)), text);
    }
}

TEST(Checker, RejectsScopeErrors) {
    EXPECT_TRUE(well_formed("int f(int a) { int b = a + 1; return b; }"));
    EXPECT_FALSE(well_formed("int f(int a) { b = a; return a; }"));             // unknown name
    EXPECT_FALSE(well_formed("int f(int a) { int a = 1; return a; }"));         // duplicate
    EXPECT_FALSE(well_formed("int f(int a) { int b = a; }"));                   // no return
    EXPECT_FALSE(well_formed("int f(int a) { if (a < 1) { int c = 1; } return c; }"));
    EXPECT_FALSE(well_formed("int f(int a) { return a; } int f(int b) { return b; }"));
    EXPECT_FALSE(well_formed("int f(int a) { return a }"));                     // syntax
    EXPECT_THROW(parse_program("int f("), FormatError);
}

TEST(Mutate, RateBounds) {
    const auto p = original(3, 0);
    EXPECT_THROW(mutate(p, 0.0, 1), ConfigError);
    EXPECT_THROW(mutate(p, 0.31, 1), ConfigError);
    EXPECT_NO_THROW(mutate(p, 0.3, 1));
}

TEST(Mutate, MutantsAreValidAndCloserToTheirSource) {
    std::vector<Submission> originals;
    for (std::uint64_t k = 0; k < 8; ++k) originals.push_back(original(5, k));
    std::vector<double> between;
    for (std::size_t i = 0; i < originals.size(); ++i)
        for (std::size_t j = i + 1; j < originals.size(); ++j) between.push_back(ncd_tokens(originals[i], originals[j]));
    const double median = ref_median(between);
    for (std::size_t k = 0; k < originals.size(); ++k) {
        const auto m = mutate(originals[k], kDefaultMutationRate, 100 + k);
        EXPECT_EQ(m.id, "M" + originals[k].id);
        EXPECT_TRUE(check_program(parse_program(text_of(m))).empty()) << text_of(m);
        EXPECT_NE(text_of(m), text_of(originals[k]));
        EXPECT_LT(ncd_tokens(m, originals[k]), median);
        EXPECT_EQ(text_of(m), text_of(mutate(originals[k], kDefaultMutationRate, 100 + k)));
    }
}

TEST(Recombine, IdenticalParentsReproduceTheParent) {
    const auto p = original(9, 0);
    auto q = p;
    q.id = "Q";
    for (auto kind : {Crossover::OnePoint, Crossover::TwoPoint}) {
        const auto child = recombine(p, q, 4, kind);
        EXPECT_EQ(tokens_of(child), tokens_of(p));
    }
}

TEST(Recombine, ChildIsCloserToParentsThanStrangers) {
    const auto a = original(13, 0), b = original(13, 1), c = original(13, 2);
    for (auto kind : {Crossover::OnePoint, Crossover::TwoPoint}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto child = recombine(a, b, seed, kind);
            EXPECT_EQ(child.id, kind == Crossover::OnePoint ? "P1RGP2" : "P1RFP2");
            EXPECT_TRUE(well_formed(text_of(child))) << text_of(child);
            EXPECT_LT(ncd_tokens(child, a), ncd_tokens(child, c));
            EXPECT_LT(ncd_tokens(child, b), ncd_tokens(child, c));
        }
    }
}

TEST(Corpus, DefaultShape) {
    const auto c = generate_corpus(30, 6, 8, kDefaultSeed);
    ASSERT_EQ(c.submissions.size(), 44u);
    std::size_t originals = 0, mutants = 0, recombinants = 0;
    for (const auto& s : c.submissions) {
        const auto& l = c.truth.labels.at(s.id);
        originals += l.kind == Label::Kind::Original;
        mutants += l.kind == Label::Kind::Mutational;
        recombinants += l.kind == Label::Kind::Recombination;
        EXPECT_TRUE(well_formed(text_of(s))) << s.id;
        ASSERT_EQ(s.files.size(), 1u);
        EXPECT_EQ(s.files[0].relative_path, kSourceName);
    }
    EXPECT_EQ(originals, 30u);
    EXPECT_EQ(mutants, 6u);
    EXPECT_EQ(recombinants, 8u);
    for (std::size_t k = 1; k < c.submissions.size(); ++k) EXPECT_LT(c.submissions[k - 1].id, c.submissions[k].id);
    // Mutants come from distinct originals while there are enough of them.
    std::set<std::string> sources;
    for (const auto& [id, l] : c.truth.labels)
        if (l.kind == Label::Kind::Mutational) sources.insert(l.sources.at(0));
    EXPECT_EQ(sources.size(), 6u);
}

TEST(Corpus, EdgesFollowLabels) {
    const auto c = generate_corpus(10, 3, 4, 77);
    for (const auto& e : c.truth.edges) {
        EXPECT_LT(e.a, e.b);
        EXPECT_EQ(c.truth.relation(e.b, e.a), &e);
    }
    for (const auto& [id, l] : c.truth.labels) {
        for (const auto& src : l.sources) {
            const auto* rel = c.truth.relation(id, src);
            ASSERT_NE(rel, nullptr) << id << " " << src;
            EXPECT_EQ(rel->relation, l.kind == Label::Kind::Mutational ? Relation::Direct : Relation::SourceOf);
        }
    }
    // Two originals are never related to each other.
    EXPECT_EQ(c.truth.relation("P1", "P2"), nullptr);
}

TEST(Corpus, TwoOriginalsOnly) {
    const auto c = generate_corpus(2, 0, 0, 1);
    EXPECT_EQ(c.submissions.size(), 2u);
    EXPECT_TRUE(c.truth.edges.empty());
}

TEST(Corpus, TooFewOriginals) {
    EXPECT_THROW(generate_corpus(1, 0, 0, 1), ConfigError);
    EXPECT_THROW(generate_corpus(1, 0, 3, 1), ConfigError);
    EXPECT_THROW(generate_corpus(0, 2, 0, 1), ConfigError);
}

TEST(Corpus, Deterministic) {
    const auto a = generate_corpus(6, 2, 2, 31);
    const auto b = generate_corpus(6, 2, 2, 31);
    ASSERT_EQ(a.submissions.size(), b.submissions.size());
    for (std::size_t k = 0; k < a.submissions.size(); ++k) {
        EXPECT_EQ(a.submissions[k].id, b.submissions[k].id);
        EXPECT_EQ(text_of(a.submissions[k]), text_of(b.submissions[k]));
    }
    EXPECT_EQ(a.truth, b.truth);
    const auto other = generate_corpus(6, 2, 2, 32);
    EXPECT_NE(text_of(other.submissions[0]), text_of(a.submissions[0]));
}

TEST(Corpus, GroundTruthJsonRoundTrip) {
    const auto c = generate_corpus(8, 3, 4, 5);
    const auto j = to_json(c.truth);
    EXPECT_EQ(ground_truth_from_json(nlohmann::json::parse(j.dump())), c.truth);
    EXPECT_THROW(ground_truth_from_json(nlohmann::json::object()), FormatError);
}

TEST(Corpus, WrittenLayout) {
    TempDir dir;
    const auto c = generate_corpus(4, 1, 1, 3);
    write_corpus(c, dir.path());
    for (const auto& s : c.submissions) EXPECT_EQ(read_file(dir / (s.id + "/main.c")), text_of(s));
    const auto truth = ground_truth_from_json(nlohmann::json::parse(read_file(dir / "ground_truth.json")));
    EXPECT_EQ(truth, c.truth);
}

TEST(Corpus, RelatedPairsAreCloserOnAverage) {
    const auto c = generate_corpus(12, 4, 4, 2024);
    double related = 0, unrelated = 0;
    std::size_t nr = 0, nu = 0;
    for (std::size_t i = 0; i < c.submissions.size(); ++i) {
        for (std::size_t j = i + 1; j < c.submissions.size(); ++j) {
            const double d = ncd_tokens(c.submissions[i], c.submissions[j]);
            const auto* rel = c.truth.relation(c.submissions[i].id, c.submissions[j].id);
            if (rel && rel->relation != Relation::Indirect) {
                related += d;
                ++nr;
            } else if (!rel) {
                unrelated += d;
                ++nu;
            }
        }
    }
    ASSERT_GT(nr, 0u);
    ASSERT_GT(nu, 0u);
    EXPECT_LT(related / nr + 0.1, unrelated / nu);
}
