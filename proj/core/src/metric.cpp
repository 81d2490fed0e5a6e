#include "texbleu/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "texbleu/errors.hpp"
#include "texbleu/textnorm.hpp"

namespace texbleu {

std::string_view to_string(PairingMode mode) {
    return mode == PairingMode::index_aligned ? "index-aligned" : "best-match";
}

std::string_view to_string(PositionalMode mode) {
    switch (mode) {
        case PositionalMode::off: return "off";
        case PositionalMode::index_delta: return "index-delta";
        case PositionalMode::vector_l1: break;
    }
    return "vector-l1";
}

std::optional<PairingMode> parse_pairing_mode(std::string_view name) {
    if (name == "index" || name == "index-aligned") {
        return PairingMode::index_aligned;
    }
    if (name == "best" || name == "best-match") return PairingMode::best_match;
    return std::nullopt;
}

std::vector<double> MetricConfig::effective_weights() const {
    if (!weights.empty()) return weights;
    return std::vector<double>(max_n, 1.0 / static_cast<double>(max_n));
}

void MetricConfig::validate() const {
    if (!(alpha > 0.0)) throw data_error("metric config: alpha must be > 0");
    if (!(beta > 0.0)) throw data_error("metric config: beta must be > 0");
    if (max_n < 1) throw data_error("metric config: max_n must be >= 1");
    if (!(sim_floor > 0.0 && sim_floor < 1.0)) {
        throw data_error("metric config: sim_floor must lie in (0,1)");
    }
    if (weights.empty()) return;
    if (weights.size() != max_n) {
        throw data_error("metric config: expected " + std::to_string(max_n) +
                         " weights, got " + std::to_string(weights.size()));
    }
    double sum = 0.0;
    for (const double w : weights) {
        if (w < 0.0) throw data_error("metric config: weights must be >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw data_error("metric config: weights must sum to 1");
    }
}

double token_distance(const EmbeddedToken& a, const EmbeddedToken& b,
                      const MetricConfig& cfg) {
    const double d_emb = std::pow(cos_dist(a.embedding, b.embedding), cfg.alpha);
    if (cfg.positional == PositionalMode::off) return d_emb;

    double pos_gap;
    if (cfg.positional == PositionalMode::vector_l1) {
        pos_gap = l1_dist(a.position_vec, b.position_vec);
    } else {
        pos_gap = std::abs(static_cast<double>(a.position_idx) -
                           static_cast<double>(b.position_idx));
    }
    return (d_emb + std::tanh(cfg.beta * pos_gap)) / 2.0;
}

namespace {

// Embedding-only distance used to select best-match pairings.
double embedding_gap(const EmbeddedToken& a, const EmbeddedToken& b,
                     double alpha) {
    return std::pow(cos_dist(a.embedding, b.embedding), alpha);
}

}  // namespace

std::optional<double> ngram_similarity(std::span<const EmbeddedToken> ref,
                                       std::span<const EmbeddedToken> pred,
                                       std::size_t n, const MetricConfig& cfg) {
    if (n < 1) throw data_error("ngram_similarity: n must be >= 1");
    if (ref.size() < n || pred.size() < n) return std::nullopt;

    const std::size_t ref_ngrams = ref.size() - n + 1;
    const std::size_t pred_ngrams = pred.size() - n + 1;
    const std::size_t count = std::min(ref_ngrams, pred_ngrams);

    double total = 0.0;
    if (cfg.pairing == PairingMode::index_aligned) {
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                total += token_distance(ref[i + j], pred[i + j], cfg);
            }
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            // Ties on the embedding gap go to the offset nearest the
            // reference slot (then the smallest offset), so identical
            // sequences pair with themselves.
            std::size_t best_start = 0;
            double best_gap = std::numeric_limits<double>::infinity();
            std::size_t best_prox = std::numeric_limits<std::size_t>::max();
            for (std::size_t s = 0; s < pred_ngrams; ++s) {
                double gap = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    gap += embedding_gap(ref[i + j], pred[s + j], cfg.alpha);
                }
                const std::size_t prox = s > i ? s - i : i - s;
                if (gap < best_gap || (gap == best_gap && prox < best_prox)) {
                    best_gap = gap;
                    best_start = s;
                    best_prox = prox;
                }
            }
            for (std::size_t j = 0; j < n; ++j) {
                total += token_distance(ref[i + j], pred[best_start + j], cfg);
            }
        }
    }
    const double sim = 1.0 - total / (static_cast<double>(count) * n);
    return std::clamp(sim, 0.0, 1.0);
}

Scorer::Scorer(const Vocab& vocab, const EmbeddingTable& embeddings,
               const PositionalTable& positions)
    : vocab_(&vocab), embeddings_(&embeddings), positions_(&positions) {
    if (embeddings.vocab_size() != vocab.size()) {
        throw binding_error("embedding table has " +
                            std::to_string(embeddings.vocab_size()) +
                            " rows but vocab has " + std::to_string(vocab.size()) +
                            " tokens");
    }
    if (embeddings.dim() == 0) {
        throw binding_error("embedding table has dim 0");
    }
    if (positions.dim() != embeddings.dim()) {
        throw binding_error("positional table dim " +
                            std::to_string(positions.dim()) +
                            " differs from embedding dim " +
                            std::to_string(embeddings.dim()));
    }
}

std::vector<EmbeddedToken> Scorer::embed(const TokenSeq& seq) const {
    std::vector<EmbeddedToken> out;
    out.reserve(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        out.push_back(EmbeddedToken{seq.tokens[i], embeddings_->row(seq.ids[i]),
                                    positions_->row(i), i});
    }
    return out;
}

double aggregate_similarities(std::span<const std::optional<double>> sims,
                              const MetricConfig& cfg) {
    if (sims.size() != cfg.max_n) {
        throw data_error("aggregate_similarities: expected " +
                         std::to_string(cfg.max_n) + " entries, got " +
                         std::to_string(sims.size()));
    }
    const auto weights = cfg.effective_weights();
    double weight_sum = 0.0;
    double log_sum = 0.0;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        if (!sims[i]) continue;  // input shorter than n: drop and renormalize
        weight_sum += weights[i];
        log_sum += weights[i] * std::log(std::clamp(*sims[i], cfg.sim_floor, 1.0));
    }
    if (weight_sum <= 0.0) return 0.0;  // all weight on undefined n-grams
    return std::exp(log_sum / weight_sum);
}

double Scorer::score(std::string_view ref, std::string_view pred,
                     const MetricConfig& cfg) const {
    cfg.validate();

    const TokenSeq ref_seq = encode(*vocab_, ref);
    const TokenSeq pred_seq = encode(*vocab_, pred);
    if (ref_seq.empty() && pred_seq.empty()) return 1.0;
    if (ref_seq.empty() || pred_seq.empty()) return 0.0;

    const auto ref_emb = embed(ref_seq);
    const auto pred_emb = embed(pred_seq);

    std::vector<std::optional<double>> sims;
    sims.reserve(cfg.max_n);
    for (std::size_t n = 1; n <= cfg.max_n; ++n) {
        sims.push_back(ngram_similarity(ref_emb, pred_emb, n, cfg));
    }
    return aggregate_similarities(sims, cfg);
}

double texbleu(std::string_view ref, std::string_view pred, const Vocab& vocab,
               const EmbeddingTable& embeddings,
               const PositionalTable& positions, const MetricConfig& cfg) {
    return Scorer(vocab, embeddings, positions).score(ref, pred, cfg);
}

}  // namespace texbleu
