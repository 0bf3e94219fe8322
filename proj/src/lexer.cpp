#include "simdetect/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <unordered_map>

#include "simdetect/errors.hpp"

namespace simdetect {

namespace {

// Union of C, C++ and Java reserved words. Alternative operator spellings
// (and, or, not, ...) and Java contextual keywords are left as identifiers
// because they are ordinary names in the other languages.
constexpr std::array kKeywords = {
    "_Alignas", "_Alignof", "_Atomic", "_Bool", "_Complex", "_Generic", "_Imaginary", "_Noreturn",
    "_Static_assert", "_Thread_local", "abstract", "alignas", "alignof", "asm", "assert", "auto", "bool",
    "boolean", "break", "byte", "case", "catch", "char", "char16_t", "char32_t", "char8_t", "class", "co_await",
    "co_return", "co_yield", "concept", "const", "const_cast", "consteval", "constexpr", "constinit",
    "continue", "decltype", "default", "delete", "do", "double", "dynamic_cast", "else", "enum", "explicit",
    "export", "extends", "extern", "false", "final", "finally", "float", "for", "friend", "goto", "if",
    "implements", "import", "inline", "instanceof", "int", "interface", "long", "mutable", "namespace",
    "native", "new", "noexcept", "null", "nullptr", "operator", "package", "private", "protected", "public",
    "register", "reinterpret_cast", "requires", "restrict", "return", "short", "signed", "sizeof", "static",
    "static_assert", "static_cast", "strictfp", "struct", "super", "switch", "synchronized", "template",
    "this", "thread_local", "throw", "throws", "transient", "true", "try", "typedef", "typeid", "typename",
    "union", "unsigned", "using", "virtual", "void", "volatile", "wchar_t", "while",
};

// Matched longest-first by trying lengths 4..1.
constexpr std::array kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->*", "<=>", "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", ".*", "##", "+", "-", "*", "/", "%", "=", "<",
    ">", "!", "~", "&", "|", "^", "?", ":", ".",
};

constexpr std::array kPunctuators = {"(", ")", "[", "]", "{", "}", ";", ",", "#", "@"};

struct Tables {
    std::vector<TokenInfo> infos;
    std::unordered_map<std::string, TokenCode> by_spelling;

    Tables() {
        infos.push_back({tok::kUnknown, TokenClass::Unknown, "UNKNOWN"});
        infos.push_back({tok::kFileBreak, TokenClass::FileBreak, "FILE_BREAK"});
        infos.push_back({tok::kIdent, TokenClass::Ident, "IDENT"});
        infos.push_back({tok::kIntLit, TokenClass::IntLit, "INT_LIT"});
        infos.push_back({tok::kFloatLit, TokenClass::FloatLit, "FLOAT_LIT"});
        infos.push_back({tok::kStringLit, TokenClass::StringLit, "STRING_LIT"});
        infos.push_back({tok::kCharLit, TokenClass::CharLit, "CHAR_LIT"});
        TokenCode next = tok::kFirstKeyword;
        auto add = [&](const char* s, TokenClass cls) {
            infos.push_back({next, cls, s});
            by_spelling.emplace(s, next);
            ++next;
        };
        for (const char* k : kKeywords) add(k, TokenClass::Keyword);
        for (const char* o : kOperators) add(o, TokenClass::Operator);
        for (const char* p : kPunctuators) add(p, TokenClass::Punct);
    }

    const TokenInfo* find(TokenCode code) const {
        if (code < tok::kFirstKeyword) return code <= tok::kCharLit ? &infos[code] : nullptr;
        const std::size_t idx = code - tok::kFirstKeyword + 7;
        return idx < infos.size() ? &infos[idx] : nullptr;
    }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

class CLikeLexer {
public:
    explicit CLikeLexer(std::string_view text) : s_(text) {}

    std::vector<Lexeme> run(std::size_t& unknown) {
        std::vector<Lexeme> out;
        while (skip_trivia(), pos_ < s_.size()) {
            const std::size_t start = pos_;
            const TokenCode code = next();
            if (code == tok::kUnknown) ++unknown;
            out.push_back({code, static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(pos_)});
        }
        return out;
    }

private:
    unsigned char at(std::size_t i) const { return i < s_.size() ? static_cast<unsigned char>(s_[i]) : 0; }

    void skip_trivia() {
        while (pos_ < s_.size()) {
            const unsigned char c = at(pos_);
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
                ++pos_;
            } else if (c == '/' && at(pos_ + 1) == '/') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else if (c == '/' && at(pos_ + 1) == '*') {
                const auto close = s_.find("*/", pos_ + 2);
                pos_ = close == std::string_view::npos ? s_.size() : close + 2;
            } else if (c == '\\' && (at(pos_ + 1) == '\n' || (at(pos_ + 1) == '\r' && at(pos_ + 2) == '\n'))) {
                pos_ += at(pos_ + 1) == '\n' ? 2 : 3;  // line splice
            } else {
                return;
            }
        }
    }

    TokenCode next() {
        const unsigned char c = at(pos_);
        if (is_ident_start(c)) return identifier();
        if (is_digit(c) || (c == '.' && is_digit(at(pos_ + 1)))) return number();
        if (c == '"') return string_literal();
        if (c == '\'') return quoted('\'', tok::kCharLit);
        return op_or_punct();
    }

    TokenCode identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && is_ident_char(at(pos_))) ++pos_;
        const auto word = s_.substr(start, pos_ - start);
        // Encoding prefixes glued to a literal: L"..", u8'..', R"(..)"
        if (at(pos_) == '"' || at(pos_) == '\'') {
            static constexpr std::array kPrefixes = {"L", "u", "U", "u8"};
            static constexpr std::array kRawPrefixes = {"R", "LR", "uR", "UR", "u8R"};
            for (auto p : kRawPrefixes)
                if (word == p && at(pos_) == '"') return raw_string();
            for (auto p : kPrefixes)
                if (word == p) return at(pos_) == '"' ? string_literal() : quoted('\'', tok::kCharLit);
        }
        const auto& t = tables();
        if (auto it = t.by_spelling.find(std::string(word)); it != t.by_spelling.end()) return it->second;
        return tok::kIdent;
    }

    TokenCode number() {
        bool is_float = false;
        const auto digits = [&](auto pred) {
            while (pred(at(pos_)) || (at(pos_) == '_' && pred(at(pos_ + 1)))) ++pos_;
        };
        const auto dec = [](unsigned char c) { return is_digit(c); };
        if (at(pos_) == '0' && (at(pos_ + 1) == 'x' || at(pos_ + 1) == 'X')) {
            pos_ += 2;
            const auto hex = [](unsigned char c) { return std::isxdigit(c) != 0; };
            digits(hex);
            if (at(pos_) == '.') {
                is_float = true;
                ++pos_;
                digits(hex);
            }
            if (at(pos_) == 'p' || at(pos_) == 'P') {
                is_float = true;
                ++pos_;
                if (at(pos_) == '+' || at(pos_) == '-') ++pos_;
                digits(dec);
            }
        } else if (at(pos_) == '0' && (at(pos_ + 1) == 'b' || at(pos_ + 1) == 'B')) {
            pos_ += 2;
            digits([](unsigned char c) { return c == '0' || c == '1'; });
        } else {
            digits(dec);
            if (at(pos_) == '.' && at(pos_ + 1) != '.') {
                is_float = true;
                ++pos_;
                digits(dec);
            }
            if (at(pos_) == 'e' || at(pos_) == 'E') {
                const std::size_t save = pos_;
                ++pos_;
                if (at(pos_) == '+' || at(pos_) == '-') ++pos_;
                if (is_digit(at(pos_))) {
                    is_float = true;
                    digits(dec);
                } else {
                    pos_ = save;
                }
            }
        }
        // Suffixes: u, l, ul, ll, f, d (Java)
        for (;;) {
            const unsigned char c = at(pos_);
            if (c == 'f' || c == 'F' || c == 'd' || c == 'D') {
                is_float = true;
                ++pos_;
            } else if (c == 'u' || c == 'U' || c == 'l' || c == 'L') {
                ++pos_;
            } else {
                break;
            }
        }
        return is_float ? tok::kFloatLit : tok::kIntLit;
    }

    TokenCode string_literal() {
        if (s_.substr(pos_, 3) == "\"\"\"") {  // Java text block
            const auto close = s_.find("\"\"\"", pos_ + 3);
            pos_ = close == std::string_view::npos ? s_.size() : close + 3;
            return tok::kStringLit;
        }
        return quoted('"', tok::kStringLit);
    }

    TokenCode raw_string() {
        // at '"': R"delim( ... )delim"
        const std::size_t open = s_.find('(', pos_);
        const std::size_t nl = s_.find('\n', pos_);
        if (open == std::string_view::npos || (nl != std::string_view::npos && nl < open) || open - pos_ > 17)
            return quoted('"', tok::kStringLit);
        const std::string terminator = ")" + std::string(s_.substr(pos_ + 1, open - pos_ - 1)) + "\"";
        const auto close = s_.find(terminator, open + 1);
        pos_ = close == std::string_view::npos ? s_.size() : close + terminator.size();
        return tok::kStringLit;
    }

    // Quoted literal; an unterminated one stops at the end of the line.
    TokenCode quoted(char q, TokenCode code) {
        ++pos_;
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '\\' && pos_ + 1 < s_.size()) {
                pos_ += 2;
                continue;
            }
            if (c == '\n') break;
            ++pos_;
            if (c == q) break;
        }
        return code;
    }

    TokenCode op_or_punct() {
        const auto& t = tables();
        for (std::size_t len = 4; len >= 1; --len) {
            if (pos_ + len > s_.size()) continue;
            if (auto it = t.by_spelling.find(std::string(s_.substr(pos_, len))); it != t.by_spelling.end()) {
                pos_ += len;
                return it->second;
            }
        }
        ++pos_;
        return tok::kUnknown;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

Language parse_language(std::string_view name) {
    if (name == "c_like") return Language::CLike;
    if (name == "raw") return Language::Raw;
    throw ConfigError("unknown language '" + std::string(name) + "' (expected c_like or raw)");
}

std::string_view to_string(Language lang) { return lang == Language::CLike ? "c_like" : "raw"; }

const std::vector<TokenInfo>& token_table() { return tables().infos; }

nlohmann::json token_table_json() {
    static constexpr std::array kClassNames = {"UNKNOWN", "FILE_BREAK", "KEYWORD", "IDENT", "INT_LIT", "FLOAT_LIT",
                                               "STRING_LIT", "CHAR_LIT", "OPERATOR", "PUNCT", "BYTE"};
    auto arr = nlohmann::json::array();
    for (const auto& info : token_table())
        arr.push_back({{"code", info.code}, {"class", kClassNames[static_cast<int>(info.cls)]}, {"text", info.text}});
    return {{"language", "c_like"}, {"tokens", std::move(arr)}};
}

TokenCode code_for(std::string_view spelling) {
    const auto& t = tables();
    const auto it = t.by_spelling.find(std::string(spelling));
    return it == t.by_spelling.end() ? tok::kUnknown : it->second;
}

TokenClass class_of(TokenCode code, Language lang) {
    if (lang == Language::Raw) return code == tok::kRawFileBreak ? TokenClass::FileBreak : TokenClass::Byte;
    const auto* info = tables().find(code);
    return info ? info->cls : TokenClass::Unknown;
}

std::string token_name(TokenCode code, Language lang) {
    if (lang == Language::Raw) {
        if (code == tok::kRawFileBreak) return "FILE_BREAK";
        char buf[8];
        std::snprintf(buf, sizeof buf, "0x%02X", code & 0xFFu);
        return buf;
    }
    const auto* info = tables().find(code);
    return info ? info->text : "UNKNOWN";
}

std::vector<Lexeme> lex_c_like(std::string_view text, std::size_t* unknown_count) {
    std::size_t unknown = 0;
    auto out = CLikeLexer(text).run(unknown);
    if (unknown_count) *unknown_count += unknown;
    return out;
}

TokenStream tokenize(const Submission& sub, Language language) {
    TokenStream ts;
    ts.submission_id = sub.id;
    ts.language = language;
    for (std::size_t f = 0; f < sub.files.size(); ++f) {
        const auto file = static_cast<std::uint32_t>(f);
        if (f > 0) {
            ts.tokens.push_back(language == Language::Raw ? tok::kRawFileBreak : tok::kFileBreak);
            ts.spans.push_back({file, 0, 0});
        }
        const std::string& bytes = sub.files[f].bytes;
        if (language == Language::Raw) {
            ts.tokens.reserve(ts.tokens.size() + bytes.size());
            for (std::uint32_t i = 0; i < bytes.size(); ++i) {
                ts.tokens.push_back(static_cast<unsigned char>(bytes[i]));
                ts.spans.push_back({file, i, i + 1});
            }
        } else {
            for (const auto& lx : lex_c_like(bytes, &ts.unknown_count)) {
                ts.tokens.push_back(lx.code);
                ts.spans.push_back({file, lx.begin, lx.end});
            }
        }
    }
    return ts;
}

std::string serialize(const std::vector<TokenCode>& tokens) {
    std::string out;
    out.reserve(tokens.size());
    for (TokenCode c : tokens) {
        if (c < 0xFF) {
            out.push_back(static_cast<char>(c));
        } else {
            if (c - 0xFF > 0xFF) throw FormatError("token code out of serializable range");
            out.push_back(static_cast<char>(0xFF));
            out.push_back(static_cast<char>(c - 0xFF));
        }
    }
    return out;
}

std::vector<TokenCode> deserialize(std::string_view bytes) {
    std::vector<TokenCode> out;
    out.reserve(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const auto b = static_cast<unsigned char>(bytes[i]);
        if (b != 0xFF) {
            out.push_back(b);
            continue;
        }
        if (i + 1 >= bytes.size()) throw FormatError("dangling escape byte in token serialization");
        out.push_back(static_cast<TokenCode>(0xFF + static_cast<unsigned char>(bytes[++i])));
    }
    return out;
}

}  // namespace simdetect
