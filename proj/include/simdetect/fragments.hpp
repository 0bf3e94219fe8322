#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simdetect/lexer.hpp"

namespace simdetect {

/// Default minimum tile length for a tokenization.
std::size_t default_min_match(Language lang);

/// One side of a tile: token range plus the byte range it covers in one file.
struct TileSide {
    std::size_t start = 0;  // token index
    std::uint32_t file = 0;
    std::uint32_t begin = 0;  // byte offsets within the file
    std::uint32_t end = 0;

    friend bool operator==(const TileSide&, const TileSide&) = default;
};

struct Tile {
    std::size_t length = 0;
    TileSide a;
    TileSide b;
    // Every start index where the tile's token content occurs in each stream.
    std::vector<std::size_t> a_occurrences;
    std::vector<std::size_t> b_occurrences;

    friend bool operator==(const Tile&, const Tile&) = default;
};

struct FragmentSet {
    std::string a_id;
    std::string b_id;
    std::size_t min_match_length = 0;
    std::size_t a_matchable = 0;  // tokens other than FILE_BREAK
    std::size_t b_matchable = 0;
    std::vector<Tile> tiles;  // discovery order: nonincreasing length
    double coverage = 0.0;    // covered tokens / matchable tokens of the shorter stream

    friend bool operator==(const FragmentSet&, const FragmentSet&) = default;
};

struct Match {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t length = 0;

    friend bool operator==(const Match&, const Match&) = default;
};

/// Longest common run of a and b that avoids blocked positions, ties broken
/// by smallest a index then smallest b index. Length 0 when nothing matches.
/// Uses a suffix array over both sequences with blocked positions replaced by
/// unique sentinels.
Match longest_common_run(std::span<const TokenCode> a, std::span<const TokenCode> b,
                         const std::vector<bool>& a_blocked, const std::vector<bool>& b_blocked);

/// Greedy string tiling. FILE_BREAK tokens never match, so tiles stay
/// within one file on each side. Throws AnalysisError if min_match_length < 3.
FragmentSet find_tiles(const TokenStream& a, const TokenStream& b, std::size_t min_match_length);

/// The n longest tiles in tile order, coverage recomputed.
FragmentSet top_n(const FragmentSet& fs, std::size_t n);

/// Paths are the files of each submission in stream file order.
nlohmann::json to_json(const FragmentSet& fs, const std::vector<std::string>& a_paths,
                       const std::vector<std::string>& b_paths);

}  // namespace simdetect
