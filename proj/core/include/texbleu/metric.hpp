#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "texbleu/embeddings.hpp"
#include "texbleu/tokenizer.hpp"

namespace texbleu {

// How reference n-grams are paired with prediction n-grams.
//   index_aligned: the i-th n-gram of R against the i-th n-gram of P; both
//     tokens then share the ordinal slot, so the positional term vanishes.
//   best_match: each reference n-gram is paired with the prediction n-gram
//     whose embedding-only distance is smallest; matched tokens may sit at
//     different offsets, which is what activates the positional term.
enum class PairingMode { index_aligned, best_match };

// Positional contribution to the token distance.
//   off: distance is the alpha-powered cosine distance alone (ablation row).
//   vector_l1: tanh(beta * L1 between positional-encoding rows).
//   index_delta: tanh(beta * |ordinal difference|).
enum class PositionalMode { off, vector_l1, index_delta };

std::string_view to_string(PairingMode mode);
std::string_view to_string(PositionalMode mode);
std::optional<PairingMode> parse_pairing_mode(std::string_view name);

struct MetricConfig {
    double alpha = 2.0;
    double beta = 0.1;
    std::size_t max_n = 3;
    std::vector<double> weights;  // empty = uniform 1/max_n
    PairingMode pairing = PairingMode::best_match;
    PositionalMode positional = PositionalMode::vector_l1;
    double sim_floor = 1e-9;  // log protection in the final aggregation

    std::vector<double> effective_weights() const;
    void validate() const;  // throws data_error on violated invariants
};

// A token bound to its embedding row and positional-encoding row. The spans
// alias the tables they came from, which must outlive the token.
struct EmbeddedToken {
    std::string token;
    std::span<const float> embedding;
    std::span<const float> position_vec;
    std::size_t position_idx = 0;
};

// d = (cosDist(e1,e2)^alpha + tanh(beta * |p1 - p2|)) / 2, in [0,1].
// With PositionalMode::off the positional term is dropped and d is the
// cosine part alone (not halved), keeping its ceiling at 1.
double token_distance(const EmbeddedToken& a, const EmbeddedToken& b,
                      const MetricConfig& cfg);

// sim_n = 1 - sum of token distances over paired n-grams / (L_n * n) with
// L_n = min(|ref|-n+1, |pred|-n+1). Returns nullopt when L_n <= 0 (the
// undefined case; callers drop the n and renormalize weights).
std::optional<double> ngram_similarity(std::span<const EmbeddedToken> ref,
                                       std::span<const EmbeddedToken> pred,
                                       std::size_t n, const MetricConfig& cfg);

// exp(sum w_n log sim_n) over the defined entries, weights renormalized to
// the defined mass, each sim clamped to [sim_floor, 1]. sims[i] is the
// similarity for n = i+1; sims.size() must equal cfg.max_n.
double aggregate_similarities(std::span<const std::optional<double>> sims,
                              const MetricConfig& cfg);

// Binds a vocab to its embedding and positional tables and scores pairs.
// Construction throws binding_error when the artifacts do not fit together.
class Scorer {
public:
    Scorer(const Vocab& vocab, const EmbeddingTable& embeddings,
           const PositionalTable& positions);

    std::vector<EmbeddedToken> embed(const TokenSeq& seq) const;

    // The full pipeline: normalize both sides, encode, embed, n-gram
    // similarities for n = 1..max_n (undefined n dropped, weights
    // renormalized), then exp of the weighted log sum. Both sides empty
    // scores 1; exactly one empty scores 0.
    double score(std::string_view ref, std::string_view pred,
                 const MetricConfig& cfg = {}) const;

    const Vocab& vocab() const { return *vocab_; }

private:
    const Vocab* vocab_;
    const EmbeddingTable* embeddings_;
    const PositionalTable* positions_;
};

// One-shot convenience over Scorer.
double texbleu(std::string_view ref, std::string_view pred, const Vocab& vocab,
               const EmbeddingTable& embeddings, const PositionalTable& positions,
               const MetricConfig& cfg = {});

}  // namespace texbleu
