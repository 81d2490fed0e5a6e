#include "texbleu/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace texbleu {

namespace {

constexpr double kPrecisionFloor = 1e-9;

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ws(text[i])) ++i;
        std::size_t j = i;
        while (j < text.size() && !is_ws(text[j])) ++j;
        if (j > i) tokens.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return tokens;
}

template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

// n-gram multiset counts, n-gram keyed by its joined tokens.
std::unordered_map<std::string, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t n) {
    std::unordered_map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (std::size_t j = 0; j < n; ++j) {
            key += tokens[i + j];
            key.push_back('\x1f');
        }
        counts[key] += 1;
    }
    return counts;
}

}  // namespace

std::size_t levenshtein(std::span<const std::string> a,
                        std::span<const std::string> b) {
    return edit_distance(a, b);
}

std::size_t levenshtein_bytes(std::string_view a, std::string_view b) {
    return edit_distance(a, b);
}

double bleu(std::string_view ref, std::string_view pred, std::size_t max_n) {
    if (max_n < 1) max_n = 1;
    const auto ref_tokens = whitespace_tokens(ref);
    const auto pred_tokens = whitespace_tokens(pred);
    if (pred_tokens.empty()) return 0.0;

    double log_sum = 0.0;
    std::size_t orders = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        const auto ref_counts = ngram_counts(ref_tokens, n);
        const auto pred_counts = ngram_counts(pred_tokens, n);
        std::size_t clipped = 0;
        std::size_t total = 0;
        for (const auto& [gram, count] : pred_counts) {
            total += count;
            const auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) clipped += std::min(count, it->second);
        }
        if (total == 0) continue;  // prediction shorter than n: order undefined
        double precision = static_cast<double>(clipped) / total;
        if (precision <= 0.0) precision = kPrecisionFloor;
        log_sum += std::log(precision);
        ++orders;
    }
    if (orders == 0) return 0.0;
    log_sum /= static_cast<double>(orders);

    double brevity = 1.0;
    if (pred_tokens.size() < ref_tokens.size()) {
        brevity = std::exp(1.0 - static_cast<double>(ref_tokens.size()) /
                                     static_cast<double>(pred_tokens.size()));
    }
    return brevity * std::exp(log_sum);
}

double rouge1(std::string_view ref, std::string_view pred) {
    const auto ref_tokens = whitespace_tokens(ref);
    const auto pred_tokens = whitespace_tokens(pred);
    if (ref_tokens.empty() && pred_tokens.empty()) return 1.0;
    if (ref_tokens.empty() || pred_tokens.empty()) return 0.0;

    const auto ref_counts = ngram_counts(ref_tokens, 1);
    const auto pred_counts = ngram_counts(pred_tokens, 1);
    std::size_t match = 0;
    for (const auto& [gram, count] : pred_counts) {
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) match += std::min(count, it->second);
    }
    if (match == 0) return 0.0;
    const double precision = static_cast<double>(match) / pred_tokens.size();
    const double recall = static_cast<double>(match) / ref_tokens.size();
    return 2.0 * precision * recall / (precision + recall);
}

double cer(std::string_view ref, std::string_view pred) {
    if (ref.empty()) return pred.empty() ? 0.0 : 1.0;
    return static_cast<double>(levenshtein_bytes(ref, pred)) /
           static_cast<double>(ref.size());
}

double wer(std::string_view ref, std::string_view pred) {
    const auto ref_words = whitespace_tokens(ref);
    const auto pred_words = whitespace_tokens(pred);
    if (ref_words.empty()) return pred_words.empty() ? 0.0 : 1.0;
    return static_cast<double>(levenshtein(ref_words, pred_words)) /
           static_cast<double>(ref_words.size());
}

BaselineScores compute_baselines(std::string_view ref, std::string_view pred) {
    return BaselineScores{bleu(ref, pred), rouge1(ref, pred), cer(ref, pred),
                          wer(ref, pred)};
}

}  // namespace texbleu
