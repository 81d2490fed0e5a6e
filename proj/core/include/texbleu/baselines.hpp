#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace texbleu {

// Reference metrics the paper-style comparison tables are built around.
// These deliberately use plain whitespace tokenization on the raw strings,
// not the canonical spacing pass, so they keep their well-known sensitivity
// to LaTeX spacing differences.
struct BaselineScores {
    double bleu = 0.0;
    double rouge1_f = 0.0;
    double cer = 0.0;
    double wer = 0.0;
};

// Unit-cost edit distance between two token sequences.
std::size_t levenshtein(std::span<const std::string> a,
                        std::span<const std::string> b);
std::size_t levenshtein_bytes(std::string_view a, std::string_view b);

// Geometric mean of clipped modified n-gram precisions times the brevity
// penalty; zero precisions are floored at 1e-9. Empty prediction scores 0.
double bleu(std::string_view ref, std::string_view pred, std::size_t max_n = 4);

// Unigram-overlap F1 with clipped counts. Both sides empty scores 1, one
// empty scores 0.
double rouge1(std::string_view ref, std::string_view pred);

// Edit distance over raw characters divided by reference length; an empty
// reference against a non-empty prediction is defined as 1.
double cer(std::string_view ref, std::string_view pred);

// Same, over whitespace-split words.
double wer(std::string_view ref, std::string_view pred);

BaselineScores compute_baselines(std::string_view ref, std::string_view pred);

}  // namespace texbleu
