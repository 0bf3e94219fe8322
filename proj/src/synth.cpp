#include "simdetect/synth.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <optional>
#include <set>

#include "simdetect/errors.hpp"
#include "simdetect/lexer.hpp"
#include "simdetect/random.hpp"

namespace simdetect::synth {

namespace {

using Kind = Stmt::Kind;

// ---- parsing ---------------------------------------------------------------

struct Lex {
    std::string text;
    TokenCode code;
    std::size_t offset;
};

class Parser {
public:
    explicit Parser(std::string_view src) {
        for (const auto& l : lex_c_like(src))
            toks_.push_back({std::string(src.substr(l.begin, l.end - l.begin)), l.code, l.begin});
    }

    Program program() {
        Program p;
        while (!done()) p.functions.push_back(function());
        if (p.functions.empty()) fail("program has no functions");
        return p;
    }

private:
    std::vector<Lex> toks_;
    std::size_t pos_ = 0;

    bool done() const { return pos_ >= toks_.size(); }

    [[noreturn]] void fail(const std::string& what) const {
        const std::string where = done() ? "end of input" : "offset " + std::to_string(toks_[pos_].offset);
        throw FormatError("template grammar: " + what + " at " + where);
    }

    const std::string& peek(std::size_t ahead = 0) const {
        static const std::string eof;
        return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead].text : eof;
    }

    bool accept(std::string_view s) {
        if (!done() && toks_[pos_].text == s) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(std::string_view s) {
        if (!accept(s)) fail("expected '" + std::string(s) + "'");
    }

    bool at_ident() const { return !done() && toks_[pos_].code == tok::kIdent; }

    std::string ident() {
        if (!at_ident()) fail("expected identifier");
        return toks_[pos_++].text;
    }

    Function function() {
        Function f;
        expect("int");
        f.name = ident();
        expect("(");
        if (!accept(")")) {
            do {
                expect("int");
                f.params.push_back(ident());
            } while (accept(","));
            expect(")");
        }
        f.body = block();
        return f;
    }

    std::vector<Stmt> block() {
        expect("{");
        std::vector<Stmt> out;
        while (!accept("}")) {
            if (done()) fail("unterminated block");
            out.push_back(statement());
        }
        return out;
    }

    void condition(Stmt& s) {
        s.value = expr();
        static const std::set<std::string> cmps{"<", ">", "<=", ">=", "==", "!="};
        if (!cmps.contains(peek())) fail("expected comparison");
        s.op = toks_[pos_++].text;
        s.bound = expr();
    }

    Stmt statement() {
        Stmt s;
        if (accept("int")) {
            s.kind = Kind::Decl;
            s.name = ident();
            expect("=");
            s.value = expr();
            expect(";");
        } else if (accept("if")) {
            s.kind = Kind::If;
            expect("(");
            condition(s);
            expect(")");
            s.body = block();
            if (accept("else")) {
                s.has_else = true;
                s.else_body = block();
            }
        } else if (accept("while")) {
            s.kind = Kind::While;
            expect("(");
            condition(s);
            expect(")");
            s.body = block();
        } else if (accept("for")) {
            s.kind = Kind::For;
            expect("(");
            expect("int");
            s.name = ident();
            expect("=");
            s.value = expr();
            expect(";");
            if (ident() != s.name) fail("loop condition must test the loop variable");
            expect("<");
            s.op = "<";
            s.bound = expr();
            expect(";");
            if (ident() != s.name) fail("loop step must advance the loop variable");
            expect("++");
            expect(")");
            s.body = block();
        } else if (accept("return")) {
            s.kind = Kind::Return;
            s.value = expr();
            expect(";");
        } else if (peek() == "printf") {
            ++pos_;
            s.kind = Kind::Print;
            expect("(");
            if (done() || toks_[pos_].code != tok::kStringLit) fail("expected format string");
            s.format = toks_[pos_++].text;
            expect(",");
            s.value = expr();
            expect(")");
            expect(";");
        } else {
            s.kind = Kind::Assign;
            s.name = ident();
            static const std::set<std::string> ops{"=", "+=", "-=", "*="};
            if (!ops.contains(peek())) fail("expected assignment operator");
            s.op = toks_[pos_++].text;
            s.value = expr();
            expect(";");
        }
        return s;
    }

    Expr expr() {
        Expr e;
        operand(e);
        static const std::set<std::string> ops{"+", "-", "*", "/", "%"};
        while (ops.contains(peek())) {
            e.parts.push_back(toks_[pos_++].text);
            operand(e);
        }
        return e;
    }

    void operand(Expr& e) {
        if (accept("(")) {
            e.parts.emplace_back("(");
            const Expr inner = expr();
            e.parts.insert(e.parts.end(), inner.parts.begin(), inner.parts.end());
            expect(")");
            e.parts.emplace_back(")");
        } else if (at_ident() || (!done() && toks_[pos_].code == tok::kIntLit)) {
            e.parts.push_back(toks_[pos_++].text);
        } else {
            fail("expected operand");
        }
    }
};

bool is_name(const std::string& part) {
    return !part.empty() && (std::isalpha(static_cast<unsigned char>(part[0])) || part[0] == '_');
}

bool is_int(const std::string& part) {
    return !part.empty() && std::isdigit(static_cast<unsigned char>(part[0]));
}

// ---- printing --------------------------------------------------------------

std::string render(const Expr& e) {
    std::string out;
    for (std::size_t k = 0; k < e.parts.size(); ++k) {
        const auto& p = e.parts[k];
        if (k > 0 && p != ")" && e.parts[k - 1] != "(") out += ' ';
        out += p;
    }
    return out;
}

void print_block(const std::vector<Stmt>& block, int depth, std::string& out);

void print_stmt(const Stmt& s, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(depth) * 4, ' ');
    switch (s.kind) {
        case Kind::Decl: out += pad + "int " + s.name + " = " + render(s.value) + ";\n"; break;
        case Kind::Assign: out += pad + s.name + " " + s.op + " " + render(s.value) + ";\n"; break;
        case Kind::Return: out += pad + "return " + render(s.value) + ";\n"; break;
        case Kind::Print: out += pad + "printf(" + s.format + ", " + render(s.value) + ");\n"; break;
        case Kind::If:
            out += pad + "if (" + render(s.value) + " " + s.op + " " + render(s.bound) + ") {\n";
            print_block(s.body, depth + 1, out);
            if (s.has_else) {
                out += pad + "} else {\n";
                print_block(s.else_body, depth + 1, out);
            }
            out += pad + "}\n";
            break;
        case Kind::While:
            out += pad + "while (" + render(s.value) + " " + s.op + " " + render(s.bound) + ") {\n";
            print_block(s.body, depth + 1, out);
            out += pad + "}\n";
            break;
        case Kind::For:
            out += pad + "for (int " + s.name + " = " + render(s.value) + "; " + s.name + " < " + render(s.bound) +
                   "; " + s.name + "++) {\n";
            print_block(s.body, depth + 1, out);
            out += pad + "}\n";
            break;
    }
}

void print_block(const std::vector<Stmt>& block, int depth, std::string& out) {
    for (const auto& s : block) print_stmt(s, depth, out);
}

// ---- scope analysis --------------------------------------------------------

void expr_names(const Expr& e, std::set<std::string>& out) {
    for (const auto& p : e.parts)
        if (is_name(p)) out.insert(p);
}

// Names a statement reads and writes, recursively. Output statements share a
// pseudo-name so two of them never count as independent.
void reads_writes(const Stmt& s, std::set<std::string>& reads, std::set<std::string>& writes) {
    static const std::string io = "@io";
    expr_names(s.value, reads);
    expr_names(s.bound, reads);
    switch (s.kind) {
        case Kind::Decl:
        case Kind::For: writes.insert(s.name); break;
        case Kind::Assign:
            writes.insert(s.name);
            if (s.op != "=") reads.insert(s.name);
            break;
        case Kind::Print:
            reads.insert(io);
            writes.insert(io);
            break;
        default: break;
    }
    for (const auto& c : s.body) reads_writes(c, reads, writes);
    for (const auto& c : s.else_body) reads_writes(c, reads, writes);
}

bool independent(const Stmt& x, const Stmt& y) {
    if (x.kind == Kind::Return || y.kind == Kind::Return) return false;
    std::set<std::string> rx, wx, ry, wy;
    reads_writes(x, rx, wx);
    reads_writes(y, ry, wy);
    auto meets = [](const std::set<std::string>& a, const std::set<std::string>& b) {
        return std::any_of(a.begin(), a.end(), [&](const std::string& v) { return b.contains(v); });
    };
    return !meets(wx, ry) && !meets(wx, wy) && !meets(wy, rx);
}

class Checker {
public:
    std::vector<std::string> run(const Program& p) {
        std::set<std::string> fnames;
        for (const auto& f : p.functions) {
            fn_ = f.name;
            if (!fnames.insert(f.name).second) problem("duplicate function name");
            declared_.clear();
            std::vector<std::string> scope;
            for (const auto& prm : f.params) declare(prm, scope);
            block(f.body, scope);
            if (f.body.empty() || f.body.back().kind != Kind::Return) problem("does not end with return");
        }
        return problems_;
    }

private:
    std::string fn_;
    std::set<std::string> declared_;  // every name declared in the function
    std::vector<std::string> problems_;

    void problem(const std::string& what) { problems_.push_back("function '" + fn_ + "': " + what); }

    void declare(const std::string& name, std::vector<std::string>& scope) {
        if (name == "printf") problem("reserved name 'printf' declared");
        if (!declared_.insert(name).second) problem("name '" + name + "' declared twice");
        scope.push_back(name);
    }

    void uses(const Expr& e, const std::vector<std::string>& scope) {
        for (const auto& p : e.parts)
            if (is_name(p) && std::find(scope.begin(), scope.end(), p) == scope.end())
                problem("'" + p + "' used outside its scope");
    }

    void block(const std::vector<Stmt>& stmts, std::vector<std::string> scope) {
        for (const auto& s : stmts) {
            switch (s.kind) {
                case Kind::Decl:
                    uses(s.value, scope);
                    declare(s.name, scope);
                    break;
                case Kind::Assign:
                    uses(s.value, scope);
                    uses(Expr{{s.name}}, scope);
                    break;
                case Kind::Print:
                case Kind::Return: uses(s.value, scope); break;
                case Kind::If:
                case Kind::While:
                    uses(s.value, scope);
                    uses(s.bound, scope);
                    block(s.body, scope);
                    block(s.else_body, scope);
                    break;
                case Kind::For: {
                    uses(s.value, scope);
                    auto inner = scope;
                    declare(s.name, inner);
                    uses(s.bound, inner);
                    block(s.body, inner);
                    break;
                }
            }
        }
    }
};

// ---- generation ------------------------------------------------------------

const std::vector<std::string>& name_pool() {
    static const std::vector<std::string> pool{
        "acc",  "base", "buf",  "count", "delta", "diff", "hi",    "idx",  "key",   "len",  "limit",
        "lo",   "mid",  "num",  "off",   "prev",  "res",  "scale", "step", "sum",   "tmp",  "total",
        "val",  "width", "x",   "y",     "z",     "n",    "k",     "m",    "cur",   "next", "best",
        "carry", "gain", "load", "peak", "rate", "seed", "span", "tally", "unit", "weight"};
    return pool;
}

const std::vector<std::string>& function_pool() {
    static const std::vector<std::string> pool{
        "accumulate", "adjust", "balance", "blend",  "bound",  "clip",   "combine", "compute", "count_up",
        "decay",      "fold",   "gather",  "grow",   "mix",    "normalize", "probe", "reduce", "rescale",
        "score",      "shift",  "shrink",  "smooth", "spread", "step_through", "sum_up", "tally_up", "update",
        "walk",       "weigh",  "wrap"};
    return pool;
}

const std::vector<std::string>& format_pool() {
    static const std::vector<std::string> pool{"\"%d\\n\"", "\"value %d\\n\"", "\"r=%d\\n\"", "\"step %d\\n\"",
                                               "\"total: %d\\n\""};
    return pool;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[rng.below(v.size())];
}

std::string fresh_name(Rng& rng, const std::set<std::string>& taken) {
    for (int attempt = 0;; ++attempt) {
        std::string n = pick(rng, name_pool());
        if (attempt > 8) n += std::to_string(rng.below(100));
        if (!taken.contains(n) && n != "printf") return n;
    }
}

class Generator {
public:
    Generator(Rng& rng, const GenerateOptions& opts) : rng_(rng), opts_(opts) {}

    Function function(const std::string& name) {
        Function f;
        f.name = name;
        taken_.clear();
        std::vector<std::string> scope;
        const auto nparams = 1 + rng_.below(3);
        for (std::size_t k = 0; k < nparams; ++k) {
            f.params.push_back(fresh_name(rng_, taken_));
            taken_.insert(f.params.back());
            scope.push_back(f.params.back());
        }
        const auto span = opts_.max_statements - opts_.min_statements + 1;
        const auto count = opts_.min_statements + rng_.below(span);
        f.body = block(scope, count, 0);
        Stmt ret;
        ret.kind = Kind::Return;
        ret.value = expr(scope, 2);
        f.body.push_back(std::move(ret));
        return f;
    }

    Expr expr(const std::vector<std::string>& scope, std::size_t max_operands) {
        Expr e;
        const auto operands = 1 + rng_.below(max_operands);
        static const std::vector<std::string> ops{"+", "-", "*", "/", "%"};
        for (std::size_t k = 0; k < operands; ++k) {
            if (k > 0) e.parts.push_back(pick(rng_, ops));
            if (operands > 2 && k == 0 && rng_.bernoulli(0.2)) {
                e.parts.emplace_back("(");
                e.parts.push_back(operand(scope));
                e.parts.push_back(pick(rng_, ops));
                e.parts.push_back(operand(scope));
                e.parts.emplace_back(")");
            } else {
                e.parts.push_back(operand(scope));
            }
        }
        return e;
    }

private:
    Rng& rng_;
    GenerateOptions opts_;
    std::set<std::string> taken_;

    std::string operand(const std::vector<std::string>& scope) {
        if (!scope.empty() && rng_.bernoulli(0.6)) return pick(rng_, scope);
        return std::to_string(rng_.below(100));
    }

    std::vector<Stmt> block(std::vector<std::string> scope, std::size_t count, int depth) {
        std::vector<Stmt> out;
        for (std::size_t k = 0; k < count; ++k) out.push_back(statement(scope, depth));
        return out;
    }

    void condition(Stmt& s, const std::vector<std::string>& scope) {
        static const std::vector<std::string> cmps{"<", ">", "<=", ">=", "==", "!="};
        s.value = expr(scope, 2);
        s.op = pick(rng_, cmps);
        s.bound = expr(scope, 2);
    }

    Stmt statement(std::vector<std::string>& scope, int depth) {
        const double r = rng_.uniform();
        const bool nest = depth < 2;
        Stmt s;
        if (r < 0.32 || scope.empty()) {
            s.kind = Kind::Decl;
            s.value = expr(scope, 4);
            s.name = fresh_name(rng_, taken_);
            taken_.insert(s.name);
            scope.push_back(s.name);
        } else if (r < 0.60) {
            static const std::vector<std::string> ops{"=", "+=", "-=", "*="};
            s.kind = Kind::Assign;
            s.name = pick(rng_, scope);
            s.op = pick(rng_, ops);
            s.value = expr(scope, 3);
        } else if (r < 0.72 && nest) {
            s.kind = Kind::If;
            condition(s, scope);
            s.body = block(scope, 1 + rng_.below(3), depth + 1);
            if (rng_.bernoulli(0.4)) {
                s.has_else = true;
                s.else_body = block(scope, 1 + rng_.below(2), depth + 1);
            }
        } else if (r < 0.84 && nest) {
            s.kind = Kind::For;
            s.value = Expr{{std::to_string(rng_.below(3))}};
            s.op = "<";
            s.bound = expr(scope, 2);
            s.name = fresh_name(rng_, taken_);
            taken_.insert(s.name);
            auto inner = scope;
            inner.push_back(s.name);
            s.body = block(inner, 1 + rng_.below(3), depth + 1);
        } else if (r < 0.90 && nest) {
            s.kind = Kind::While;
            condition(s, scope);
            s.body = block(scope, 1 + rng_.below(2), depth + 1);
        } else {
            s.kind = Kind::Print;
            s.format = pick(rng_, format_pool());
            s.value = expr(scope, 2);
        }
        return s;
    }
};

// ---- mutation --------------------------------------------------------------

struct BlockRef {
    std::vector<Stmt>* block;
    std::vector<std::string> scope;  // names visible at the start of the block
};

void collect_blocks(std::vector<Stmt>& block, std::vector<std::string> scope, std::vector<BlockRef>& out) {
    out.push_back({&block, scope});
    for (auto& s : block) {
        if (s.kind == Kind::Decl) scope.push_back(s.name);
        if (s.kind == Kind::For) {
            auto inner = scope;
            inner.push_back(s.name);
            collect_blocks(s.body, inner, out);
        } else {
            if (!s.body.empty() || s.kind == Kind::If || s.kind == Kind::While) collect_blocks(s.body, scope, out);
            if (s.has_else) collect_blocks(s.else_body, scope, out);
        }
    }
}

void for_each_expr(std::vector<Stmt>& block, const std::function<void(Expr&)>& fn) {
    for (auto& s : block) {
        fn(s.value);
        fn(s.bound);
        for_each_expr(s.body, fn);
        for_each_expr(s.else_body, fn);
    }
}

void rename_in(std::vector<Stmt>& block, const std::string& from, const std::string& to) {
    for (auto& s : block) {
        if (s.name == from) s.name = to;
        for (auto* e : {&s.value, &s.bound})
            for (auto& p : e->parts)
                if (p == from) p = to;
        rename_in(s.body, from, to);
        rename_in(s.else_body, from, to);
    }
}

void declared_names(const std::vector<Stmt>& block, std::set<std::string>& out) {
    for (const auto& s : block) {
        if (s.kind == Kind::Decl || s.kind == Kind::For) out.insert(s.name);
        declared_names(s.body, out);
        declared_names(s.else_body, out);
    }
}

std::set<std::string> function_names(const Function& f) {
    std::set<std::string> names(f.params.begin(), f.params.end());
    declared_names(f.body, names);
    return names;
}

class Mutator {
public:
    Mutator(Program& p, Rng& rng) : p_(p), rng_(rng) {}

    void apply() {
        switch (rng_.below(4)) {
            case 0: rename(); break;
            case 1: tweak_literal(); break;
            case 2:
                if (!swap()) insert();
                break;
            default: insert(); break;
        }
    }

private:
    Program& p_;
    Rng& rng_;

    Function& any_function() { return p_.functions[rng_.below(p_.functions.size())]; }

    void rename() {
        auto& f = any_function();
        const auto names = function_names(f);
        std::vector<std::string> list(names.begin(), names.end());
        const auto from = pick(rng_, list);
        const auto to = fresh_name(rng_, names);
        for (auto& prm : f.params)
            if (prm == from) prm = to;
        rename_in(f.body, from, to);
    }

    void tweak_literal() {
        std::vector<std::string*> lits;
        for (auto& f : p_.functions)
            for_each_expr(f.body, [&](Expr& e) {
                for (auto& part : e.parts)
                    if (is_int(part)) lits.push_back(&part);
            });
        if (lits.empty()) return;
        auto* lit = lits[rng_.below(lits.size())];
        const auto old = std::stoull(*lit);
        *lit = std::to_string((old + 1 + rng_.below(98)) % 100);
    }

    std::vector<BlockRef> blocks(Function& f) {
        std::vector<BlockRef> out;
        collect_blocks(f.body, f.params, out);
        return out;
    }

    bool swap() {
        std::vector<std::pair<std::vector<Stmt>*, std::size_t>> candidates;
        for (auto& f : p_.functions)
            for (auto& b : blocks(f))
                for (std::size_t k = 0; k + 1 < b.block->size(); ++k)
                    if (independent((*b.block)[k], (*b.block)[k + 1])) candidates.emplace_back(b.block, k);
        if (candidates.empty()) return false;
        const auto [block, k] = candidates[rng_.below(candidates.size())];
        std::swap((*block)[k], (*block)[k + 1]);
        return true;
    }

    void insert() {
        auto& f = any_function();
        auto refs = blocks(f);
        auto& ref = refs[rng_.below(refs.size())];
        auto& block = *ref.block;
        // never after the function's final return
        std::size_t limit = block.size();
        if (ref.block == &f.body && !block.empty() && block.back().kind == Kind::Return) --limit;
        const std::size_t at = rng_.below(limit + 1);
        auto scope = ref.scope;
        for (std::size_t k = 0; k < at; ++k)
            if (block[k].kind == Kind::Decl) scope.push_back(block[k].name);
        Stmt s;
        s.kind = Kind::Decl;
        s.name = fresh_name(rng_, function_names(f));
        Generator gen(rng_, {});
        s.value = gen.expr(scope, 3);
        block.insert(block.begin() + static_cast<std::ptrdiff_t>(at), std::move(s));
    }
};

const std::string& single_source(const Submission& sub) {
    if (sub.files.size() != 1) throw AnalysisError("synthetic submission '" + sub.id + "' must hold exactly one file");
    return sub.files.front().bytes;
}

Submission make_submission(const std::string& id, std::string text) {
    Submission s;
    s.id = id;
    s.origin = "synth:" + id;
    s.folder_name = id;
    s.files.push_back({std::string(kSourceName), std::move(text), {}});
    return s;
}

std::size_t token_count(std::string_view text) { return lex_c_like(text).size(); }

std::string_view relation_name(Relation r) {
    switch (r) {
        case Relation::Direct: return "direct";
        case Relation::SourceOf: return "source-of";
        case Relation::Indirect: return "indirect";
    }
    return "?";
}

std::string_view kind_name(Label::Kind k) {
    switch (k) {
        case Label::Kind::Original: return "original";
        case Label::Kind::Mutational: return "mutational";
        case Label::Kind::Recombination: return "recombination";
    }
    return "?";
}

// Substream index ranges per role, far enough apart never to collide.
constexpr std::uint64_t kMutantStream = 1u << 20;
constexpr std::uint64_t kRecombineStream = 2u << 20;
constexpr std::uint64_t kLayoutStream = 3u << 20;

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).program(); }

std::string print_program(const Program& p) {
    std::string out;
    for (std::size_t k = 0; k < p.functions.size(); ++k) {
        const auto& f = p.functions[k];
        if (k > 0) out += '\n';
        out += "int " + f.name + "(";
        for (std::size_t i = 0; i < f.params.size(); ++i) out += (i ? ", int " : "int ") + f.params[i];
        out += ") {\n";
        print_block(f.body, 1, out);
        out += "}\n";
    }
    return out;
}

std::vector<std::string> check_program(const Program& p) { return Checker().run(p); }

bool well_formed(std::string_view text) {
    try {
        return check_program(parse_program(text)).empty();
    } catch (const FormatError&) {
        return false;
    }
}

Program generate_program(std::uint64_t seed, std::uint64_t index, const GenerateOptions& opts) {
    if (opts.functions == 0 || opts.min_statements == 0 || opts.max_statements < opts.min_statements)
        throw ConfigError("invalid program generation options");
    Rng rng = Rng::substream(seed, index);
    Generator gen(rng, opts);
    Program p;
    std::set<std::string> used;
    for (std::size_t k = 0; k < opts.functions; ++k) {
        std::string name;
        do {
            name = pick(rng, function_pool());
            if (used.contains(name)) name += "_" + std::to_string(rng.below(10));
        } while (used.contains(name));
        used.insert(name);
        p.functions.push_back(gen.function(name));
    }
    return p;
}

Submission mutate(const Submission& src, double rate, std::uint64_t seed) {
    if (!(rate > 0.0 && rate <= 0.3)) throw ConfigError("mutation rate must lie in (0, 0.3]");
    const auto& text = single_source(src);
    Program p = parse_program(text);
    Rng rng = Rng::substream(seed, 0);
    const auto tokens = token_count(text);
    std::size_t events = 0;
    for (std::size_t k = 0; k < tokens; ++k)
        if (rng.bernoulli(rate)) ++events;
    Mutator mut(p, rng);
    for (std::size_t e = 0; e < events; ++e) mut.apply();
    return make_submission("M" + src.id, print_program(p));
}

Submission recombine(const Submission& a, const Submission& b, std::uint64_t seed, Crossover kind) {
    const Program pa = parse_program(single_source(a));
    const Program pb = parse_program(single_source(b));
    const std::size_t k = std::min(pa.functions.size(), pb.functions.size());
    if (k < 4) throw AnalysisError("recombination needs parents with at least 4 functions");
    Rng rng = Rng::substream(seed, 0);
    const std::size_t quarter = (k + 3) / 4;

    // positions index functions; child takes [0,c1) from a, [c1,c2) from b, [c2,..) from a
    std::size_t c1 = 0, c2 = 0;
    if (kind == Crossover::OnePoint) {
        c1 = quarter + rng.below(k - 2 * quarter + 1);
        c2 = pb.functions.size();
    } else {
        c1 = 1 + rng.below(k - 2 * quarter);
        const std::size_t hi = std::min(k - 1, c1 + k - 2 * quarter);
        c2 = c1 + quarter + rng.below(hi - (c1 + quarter) + 1);
    }

    Program child;
    std::set<std::string> names;
    auto take = [&](const Function& f) {
        Function g = f;
        while (names.contains(g.name)) g.name += "_b";
        names.insert(g.name);
        child.functions.push_back(std::move(g));
    };
    for (std::size_t i = 0; i < c1; ++i) take(pa.functions[i]);
    for (std::size_t i = c1; i < c2; ++i) take(pb.functions[i]);
    if (kind == Crossover::TwoPoint)
        for (std::size_t i = c2; i < pa.functions.size(); ++i) take(pa.functions[i]);
    const std::string tag = kind == Crossover::OnePoint ? "RG" : "RF";
    return make_submission(a.id + tag + b.id, print_program(child));
}

const RelationEdge* GroundTruth::relation(std::string_view x, std::string_view y) const {
    if (y < x) std::swap(x, y);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{x, y}, [](const RelationEdge& e, const auto& key) {
        return std::pair<std::string_view, std::string_view>{e.a, e.b} < key;
    });
    if (it != edges.end() && it->a == x && it->b == y) return &*it;
    return nullptr;
}

nlohmann::json to_json(const GroundTruth& gt) {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [id, l] : gt.labels) {
        nlohmann::json j{{"kind", kind_name(l.kind)}};
        if (l.kind != Label::Kind::Original) j["sources"] = l.sources;
        if (l.kind == Label::Kind::Recombination)
            j["crossover"] = l.crossover == Crossover::OnePoint ? "one_point" : "two_point";
        labels[id] = std::move(j);
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : gt.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"relation", relation_name(e.relation)}});
    return {{"seed", gt.seed}, {"labels", std::move(labels)}, {"edges", std::move(edges)}};
}

GroundTruth ground_truth_from_json(const nlohmann::json& j) {
    try {
        GroundTruth gt;
        gt.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& [id, l] : j.at("labels").items()) {
            Label label;
            const auto kind = l.at("kind").get<std::string>();
            if (kind == "original") label.kind = Label::Kind::Original;
            else if (kind == "mutational") label.kind = Label::Kind::Mutational;
            else if (kind == "recombination") label.kind = Label::Kind::Recombination;
            else throw FormatError("unknown label kind '" + kind + "'");
            if (l.contains("sources")) label.sources = l.at("sources").get<std::vector<std::string>>();
            if (l.value("crossover", "one_point") == "two_point") label.crossover = Crossover::TwoPoint;
            gt.labels[id] = std::move(label);
        }
        for (const auto& e : j.at("edges")) {
            RelationEdge edge{e.at("a").get<std::string>(), e.at("b").get<std::string>(), Relation::Direct};
            const auto rel = e.at("relation").get<std::string>();
            if (rel == "source-of") edge.relation = Relation::SourceOf;
            else if (rel == "indirect") edge.relation = Relation::Indirect;
            else if (rel != "direct") throw FormatError("unknown relation '" + rel + "'");
            gt.edges.push_back(std::move(edge));
        }
        return gt;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed ground truth: ") + e.what());
    }
}

Corpus generate_corpus(std::size_t n_orig, std::size_t n_mut, std::size_t n_rec, std::uint64_t seed) {
    if (n_orig < 2) {
        throw ConfigError(n_rec > 0 ? "recombination needs at least 2 originals"
                                    : "a synthetic corpus needs at least 2 originals");
    }
    Corpus c;
    c.truth.seed = seed;
    std::vector<Submission> originals;
    for (std::size_t k = 0; k < n_orig; ++k) {
        const std::string id = "P" + std::to_string(k + 1);
        originals.push_back(make_submission(id, print_program(generate_program(seed, k))));
        c.truth.labels[id] = Label{};
    }

    Rng layout = Rng::substream(seed, kLayoutStream);
    std::set<std::string> ids;
    for (const auto& o : originals) ids.insert(o.id);
    auto unique_id = [&](std::string id) {
        const std::string base = id;
        for (int k = 2; ids.contains(id); ++k) id = base + "-" + std::to_string(k);
        ids.insert(id);
        return id;
    };

    // mutants: a shuffled order of originals, cycled if more mutants than originals
    std::vector<std::size_t> order(n_orig);
    for (std::size_t k = 0; k < n_orig; ++k) order[k] = k;
    for (std::size_t k = n_orig; k-- > 1;) std::swap(order[k], order[layout.below(k + 1)]);
    std::vector<Submission> derived;
    for (std::size_t k = 0; k < n_mut; ++k) {
        const auto& src = originals[order[k % n_orig]];
        auto m = mutate(src, kDefaultMutationRate, Rng::substream(seed, kMutantStream + k).next());
        m.id = m.folder_name = unique_id(m.id);
        m.origin = "synth:" + m.id;
        c.truth.labels[m.id] = Label{Label::Kind::Mutational, {src.id}, Crossover::OnePoint};
        derived.push_back(std::move(m));
    }

    std::set<std::pair<std::size_t, std::size_t>> used_pairs;
    const std::size_t all_pairs = n_orig * (n_orig - 1);
    for (std::size_t k = 0; k < n_rec; ++k) {
        std::size_t x = 0, y = 0;
        do {
            x = layout.below(n_orig);
            y = layout.below(n_orig - 1);
            if (y >= x) ++y;
        } while (used_pairs.size() < all_pairs && used_pairs.contains({x, y}));
        used_pairs.insert({x, y});
        const auto kind = k % 2 == 0 ? Crossover::OnePoint : Crossover::TwoPoint;
        auto r = recombine(originals[x], originals[y], Rng::substream(seed, kRecombineStream + k).next(), kind);
        r.id = r.folder_name = unique_id(r.id);
        r.origin = "synth:" + r.id;
        c.truth.labels[r.id] = Label{Label::Kind::Recombination, {originals[x].id, originals[y].id}, kind};
        derived.push_back(std::move(r));
    }

    c.submissions = std::move(originals);
    for (auto& d : derived) c.submissions.push_back(std::move(d));
    std::sort(c.submissions.begin(), c.submissions.end(),
              [](const Submission& a, const Submission& b) { return a.id < b.id; });

    // relation edges from the label table
    auto ancestry = [&](const std::string& id) {
        const auto& l = c.truth.labels.at(id);
        if (l.kind == Label::Kind::Original) return std::set<std::string>{id};
        return std::set<std::string>(l.sources.begin(), l.sources.end());
    };
    for (std::size_t i = 0; i < c.submissions.size(); ++i) {
        for (std::size_t j = i + 1; j < c.submissions.size(); ++j) {
            const auto& a = c.submissions[i].id;
            const auto& b = c.submissions[j].id;
            const auto& la = c.truth.labels.at(a);
            const auto& lb = c.truth.labels.at(b);
            auto derives = [](const Label& child, const std::string& parent) {
                return std::find(child.sources.begin(), child.sources.end(), parent) != child.sources.end();
            };
            std::optional<Relation> rel;
            if ((la.kind == Label::Kind::Mutational && derives(la, b)) ||
                (lb.kind == Label::Kind::Mutational && derives(lb, a))) {
                rel = Relation::Direct;
            } else if ((la.kind == Label::Kind::Recombination && derives(la, b)) ||
                       (lb.kind == Label::Kind::Recombination && derives(lb, a))) {
                rel = Relation::SourceOf;
            } else if (la.kind != Label::Kind::Original || lb.kind != Label::Kind::Original) {
                const auto xa = ancestry(a);
                const auto xb = ancestry(b);
                if (std::any_of(xa.begin(), xa.end(), [&](const std::string& s) { return xb.contains(s); }))
                    rel = Relation::Indirect;
            }
            if (rel) c.truth.edges.push_back({a, b, *rel});
        }
    }
    return c;
}

void write_corpus(const Corpus& c, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    auto write = [](const fs::path& path, const std::string& bytes) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("cannot write '" + path.string() + "'");
    };
    for (const auto& s : c.submissions) {
        const auto sub_dir = dir / s.id;
        fs::create_directories(sub_dir, ec);
        if (ec) throw IoError("cannot create '" + sub_dir.string() + "': " + ec.message());
        for (const auto& f : s.files) write(sub_dir / f.relative_path, f.bytes);
    }
    write(dir / "ground_truth.json", to_json(c.truth).dump(2) + "\n");
}

}  // namespace simdetect::synth
