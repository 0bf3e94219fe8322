#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "simdetect/source_file.hpp"

namespace simdetect {

using TokenCode = std::uint16_t;

enum class Language { CLike, Raw };

Language parse_language(std::string_view name);  // "c_like" | "raw"; ConfigError otherwise
std::string_view to_string(Language lang);

enum class TokenClass { Unknown, FileBreak, Keyword, Ident, IntLit, FloatLit, StringLit, CharLit, Operator, Punct, Byte };

/// Fixed codes of the c_like alphabet. Keywords, operators and punctuators
/// follow from kFirstKeyword in table order (see token_table()).
namespace tok {
inline constexpr TokenCode kUnknown = 0;
inline constexpr TokenCode kFileBreak = 1;
inline constexpr TokenCode kIdent = 2;
inline constexpr TokenCode kIntLit = 3;
inline constexpr TokenCode kFloatLit = 4;
inline constexpr TokenCode kStringLit = 5;
inline constexpr TokenCode kCharLit = 6;
inline constexpr TokenCode kFirstKeyword = 16;
// Raw mode: codes 0..255 are byte values, 256 separates files.
inline constexpr TokenCode kRawFileBreak = 256;
}  // namespace tok

struct TokenInfo {
    TokenCode code;
    TokenClass cls;
    std::string text;  // spelling for keywords/operators/punctuators, class name otherwise
};

/// The complete c_like alphabet, ordered by code.
const std::vector<TokenInfo>& token_table();
/// token_table() as JSON, for UI tooltips.
nlohmann::json token_table_json();

/// Code for a keyword/operator/punctuator spelling, or kUnknown.
TokenCode code_for(std::string_view spelling);
TokenClass class_of(TokenCode code, Language lang = Language::CLike);
/// Display name for a code ("int", "IDENT", "<<=", "0x41").
std::string token_name(TokenCode code, Language lang = Language::CLike);

struct ByteSpan {
    std::uint32_t file = 0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

struct Lexeme {
    TokenCode code;
    std::uint32_t begin;
    std::uint32_t end;
};

/// Lexes one c_like text, dropping whitespace and comments.
std::vector<Lexeme> lex_c_like(std::string_view text, std::size_t* unknown_count = nullptr);

struct TokenStream {
    std::string submission_id;
    Language language = Language::CLike;
    std::vector<TokenCode> tokens;
    std::vector<ByteSpan> spans;  // aligned with tokens; FILE_BREAK has an empty span at the next file's start
    std::size_t unknown_count = 0;

    friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

/// Lexes every file of `sub` in path order, separated by FILE_BREAK.
TokenStream tokenize(const Submission& sub, Language language);

/// One byte per code below 0xFF; larger codes as 0xFF followed by (code - 0xFF).
std::string serialize(const std::vector<TokenCode>& tokens);
/// Inverse of serialize(); throws FormatError on a dangling escape byte.
std::vector<TokenCode> deserialize(std::string_view bytes);

}  // namespace simdetect
