#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "texbleu/baselines.hpp"
#include "texbleu/embeddings.hpp"
#include "texbleu/metric.hpp"
#include "texbleu/textnorm.hpp"
#include "texbleu/tokenizer.hpp"

namespace {

using namespace texbleu;

std::vector<std::string> make_corpus(std::size_t lines) {
    // Deterministic LaTeX-ish corpus; no RNG so runs are comparable.
    static const std::vector<std::string> stems = {
        "\\frac { a } { b } + x ^ 2",     "\\sqrt { b ^ 2 - 4 a c }",
        "\\sum _ { i } x _ i = \\alpha",  "\\int f ( x ) d x",
        "\\alpha \\cdot \\beta - \\pi",   "x ^ { n + 1 } / y _ { k }",
    };
    std::vector<std::string> out;
    out.reserve(lines);
    for (std::size_t i = 0; i < lines; ++i) {
        out.push_back(stems[i % stems.size()]);
    }
    return out;
}

struct World {
    Vocab vocab;
    EmbeddingTable embeddings;
    PositionalTable positions;
    Scorer scorer;

    World()
        : vocab(train_bpe(std::span<const std::string>(corpus()), 256 + 100, 2)),
          embeddings(train()),
          positions(sinusoidal_positions(256, 32)),
          scorer(vocab, embeddings, positions) {}

    static const std::vector<std::string>& corpus() {
        static const auto lines = make_corpus(300);
        return lines;
    }

    EmbeddingTable train() {
        std::vector<TokenSeq> seqs;
        for (const auto& line : corpus()) seqs.push_back(encode(vocab, line));
        SgnsParams params;
        params.dim = 32;
        params.epochs = 2;
        return train_embeddings(seqs, vocab, params);
    }
};

const World& world() {
    static const World w;
    return w;
}

const std::string kRef = "\\frac{a^2+b}{c_1-d}!";
const std::string kPred = "\\sqrt{b^2-4ac}+x_1*y";

void BM_NormalizeSpacing(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalize_spacing(kRef));
    }
}
BENCHMARK(BM_NormalizeSpacing);

void BM_Encode(benchmark::State& state) {
    const auto& w = world();
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode(w.vocab, kRef));
    }
}
BENCHMARK(BM_Encode);

void BM_ScoreBestMatch(benchmark::State& state) {
    const auto& w = world();
    MetricConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(w.scorer.score(kRef, kPred, cfg));
    }
}
BENCHMARK(BM_ScoreBestMatch);

void BM_ScoreIndexAligned(benchmark::State& state) {
    const auto& w = world();
    MetricConfig cfg;
    cfg.pairing = PairingMode::index_aligned;
    for (auto _ : state) {
        benchmark::DoNotOptimize(w.scorer.score(kRef, kPred, cfg));
    }
}
BENCHMARK(BM_ScoreIndexAligned);

void BM_ScoreLongInputs(benchmark::State& state) {
    const auto& w = world();
    MetricConfig cfg;
    std::string ref, pred;
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
        ref += " \\frac { a } { b } + x ^ " + std::to_string(i % 10);
        pred += " \\frac { a } { c } - x ^ " + std::to_string(i % 7);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(w.scorer.score(ref, pred, cfg));
    }
}
BENCHMARK(BM_ScoreLongInputs)->Arg(4)->Arg(16)->Arg(64);

void BM_BaselineBleu(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(bleu(kRef, kPred));
    }
}
BENCHMARK(BM_BaselineBleu);

void BM_LevenshteinChars(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(levenshtein_bytes(kRef, kPred));
    }
}
BENCHMARK(BM_LevenshteinChars);

void BM_TrainBpe(benchmark::State& state) {
    const auto lines = make_corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            train_bpe(std::span<const std::string>(lines), 256 + 100, 2));
    }
}
BENCHMARK(BM_TrainBpe)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
