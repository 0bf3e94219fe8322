#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "simdetect/source_file.hpp"

namespace simdetect::synth {

// Program model of the template grammar:
//
//   program  := function+
//   function := "int" NAME "(" ["int" NAME {"," "int" NAME}] ")" "{" stmt* "}"
//   stmt     := "int" NAME "=" expr ";"
//             | NAME ("=" | "+=" | "-=" | "*=") expr ";"
//             | "if" "(" cond ")" "{" stmt* "}" ["else" "{" stmt* "}"]
//             | "while" "(" cond ")" "{" stmt* "}"
//             | "for" "(" "int" NAME "=" expr ";" NAME "<" expr ";" NAME "++" ")" "{" stmt* "}"
//             | "printf" "(" STRING "," expr ")" ";"
//             | "return" expr ";"
//   expr     := operand {("+" | "-" | "*" | "/" | "%") operand}
//   operand  := NAME | INT | "(" expr ")"
//   cond     := expr ("<" | ">" | "<=" | ">=" | "==" | "!=") expr

/// An expression kept as its lexeme spellings.
struct Expr {
    std::vector<std::string> parts;

    friend bool operator==(const Expr&, const Expr&) = default;
};

struct Stmt {
    enum class Kind { Decl, Assign, If, While, For, Print, Return };
    Kind kind = Kind::Decl;
    std::string name;     // Decl/Assign target, For loop variable
    std::string op;       // Assign operator, condition comparator
    std::string format;   // Print format literal, quotes included
    Expr value;           // Decl/Assign/Print/Return value, For init, condition lhs
    Expr bound;           // condition rhs, For bound
    std::vector<Stmt> body;
    std::vector<Stmt> else_body;
    bool has_else = false;

    friend bool operator==(const Stmt&, const Stmt&) = default;
};

struct Function {
    std::string name;
    std::vector<std::string> params;
    std::vector<Stmt> body;

    friend bool operator==(const Function&, const Function&) = default;
};

struct Program {
    std::vector<Function> functions;

    friend bool operator==(const Program&, const Program&) = default;
};

/// Throws FormatError with the offending position when the text does not
/// follow the grammar.
Program parse_program(std::string_view text);
std::string print_program(const Program& p);

/// Scope problems: unknown or duplicate names, use before declaration,
/// functions not ending in return. Empty when the program is well formed.
std::vector<std::string> check_program(const Program& p);
/// Parses and checks; false on any problem.
bool well_formed(std::string_view text);

/// Name of the single file every synthetic submission holds.
inline constexpr std::string_view kSourceName = "main.c";

struct GenerateOptions {
    std::size_t functions = 8;
    std::size_t min_statements = 5;  // top-level statements per function, before the return
    std::size_t max_statements = 8;
};

Program generate_program(std::uint64_t seed, std::uint64_t index, const GenerateOptions& opts = {});

enum class Crossover { OnePoint, TwoPoint };

inline constexpr double kDefaultMutationRate = 0.1;

/// Per token, with probability `rate`, applies one of: consistent identifier
/// rename, literal tweak, swap with an adjacent independent statement,
/// spurious declaration insertion. 0 < rate <= 0.3, else ConfigError.
/// The result has id "M" + src.id.
Submission mutate(const Submission& src, double rate, std::uint64_t seed);

/// Crossover at function boundaries. One-point takes a prefix of `a` and the
/// rest of `b` (id aRGb); two-point takes a's ends and b's middle (id aRFb).
/// Each parent contributes at least a quarter of the functions.
Submission recombine(const Submission& a, const Submission& b, std::uint64_t seed,
                     Crossover kind = Crossover::OnePoint);

struct Label {
    enum class Kind { Original, Mutational, Recombination };
    Kind kind = Kind::Original;
    std::vector<std::string> sources;
    Crossover crossover = Crossover::OnePoint;  // recombination only

    friend bool operator==(const Label&, const Label&) = default;
};

enum class Relation { Direct, SourceOf, Indirect };

struct RelationEdge {
    std::string a;  // a < b
    std::string b;
    Relation relation = Relation::Direct;

    friend bool operator==(const RelationEdge&, const RelationEdge&) = default;
};

struct GroundTruth {
    std::uint64_t seed = 0;
    std::map<std::string, Label> labels;
    std::vector<RelationEdge> edges;  // sorted by (a, b)

    /// Relation of a pair, if any.
    [[nodiscard]] const RelationEdge* relation(std::string_view x, std::string_view y) const;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

nlohmann::json to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const nlohmann::json& j);

struct Corpus {
    std::vector<Submission> submissions;  // sorted by id
    GroundTruth truth;
};

/// Originals P1..Pk; mutants MPx of distinct originals where possible;
/// recombinants alternate one-point (PxRGPy) and two-point (PxRFPy).
/// ConfigError when n_orig < 2.
Corpus generate_corpus(std::size_t n_orig, std::size_t n_mut, std::size_t n_rec, std::uint64_t seed);

/// Writes <dir>/<id>/main.c per submission plus <dir>/ground_truth.json.
void write_corpus(const Corpus& c, const std::filesystem::path& dir);

}  // namespace simdetect::synth
