#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "simdetect/compress.hpp"
#include "simdetect/distance_matrix.hpp"
#include "simdetect/lexer.hpp"
#include "simdetect/outliers.hpp"
#include "simdetect/source_file.hpp"

namespace simdetect {

/// Token-type frequency signature of one submission.
struct TokenVector {
    std::string submission_id;
    std::map<TokenCode, std::uint64_t> counts;
};

/// Counts every token except FILE_BREAK. Throws AnalysisError when the
/// stream has no countable token (a zero vector has no direction).
TokenVector token_vector(const TokenStream& ts);

/// Normalized compression distance
///   (C(ab) - min(C(a), C(b))) / max(C(a), C(b)), clamped to [0,1],
/// with `a` concatenated first. Byte-identical inputs give exactly 0.
double ncd_pair(std::string_view a, std::string_view b, const CompressorId& c);

/// The same formula from precomputed lengths.
double ncd_from_lengths(std::size_t ca, std::size_t cb, std::size_t cab);

/// 1 - cosine similarity of the two frequency vectors, clamped to [0,1].
double token_distance(const TokenVector& va, const TokenVector& vb);

/// Shrinks row-wise lower outliers. For each off-diagonal cell the score is
/// the larger of its two row scores (M_k - x)/S_k; cells scoring above
/// g = g(n-1, alpha_row) are multiplied by g/score, every other cell is left
/// bit-for-bit unchanged. Needs n >= 4.
DistanceMatrix variance_subtest(const DistanceMatrix& m, double alpha_row, const HampelParams& mc = {},
                                CriticalValueTable* cache = nullptr, unsigned workers = 1);

enum class Algorithm { NcdRaw, NcdTokens, TokenCount };

Algorithm parse_algorithm(std::string_view name);  // ConfigError on unknown names
std::string_view to_string(Algorithm a);

struct MatrixParams {
    CompressorId compressor;
    Language language = Language::CLike;  // tokenization for ncd_tokens and token_count
    unsigned workers = 1;
};

/// Byte payload a compression metric sees for one submission: the raw file
/// bytes in path order (ncd_raw) or the serialized token stream (ncd_tokens).
std::string metric_payload(const Submission& sub, Algorithm a, Language language);

/// All n(n-1)/2 distances, mirrored, zero diagonal. Submissions must have
/// sorted unique ids; C(x) is computed once per submission. The result is
/// identical for every worker count.
DistanceMatrix build_matrix(const std::vector<Submission>& corpus, Algorithm a, const MatrixParams& params);

}  // namespace simdetect
