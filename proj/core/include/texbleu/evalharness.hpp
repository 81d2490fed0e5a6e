#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "texbleu/metric.hpp"

namespace texbleu {

// One evaluation pair: ground-truth LaTeX, model output, and (optionally)
// per-rater human scores on a 1-5 scale, one inner vector per rater group.
// `external` carries precomputed metric columns (e.g. a sacreBLEU score from
// the reference tool) that the harness reports alongside its own metrics.
struct EvalRecord {
    std::string ref;
    std::string pred;
    std::vector<std::vector<int>> human;
    std::map<std::string, double> external;
};

enum class LoadMode { strict, lenient };

struct DatasetLoadResult {
    std::vector<EvalRecord> records;
    std::vector<std::string> warnings;
};

// Line-delimited JSON, one object per line with fields `ref` (string,
// required, non-empty), `pred` (string, required), `human` (optional array of
// arrays of integers in 1..5), `metrics` (optional object of numbers).
// strict: any malformed line throws data_error listing every offender.
// lenient: malformed lines are skipped and reported in warnings.
DatasetLoadResult load_dataset(const std::filesystem::path& path,
                               LoadMode mode = LoadMode::strict);

// Sample Pearson correlation; nullopt when either side has zero variance.
// Throws data_error on length mismatch or fewer than two samples.
std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y);

// Pearson over average ranks; ties get the mean of their rank span.
std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y);

// 1-based average ranks (exposed for the rank-consistency checks).
std::vector<double> average_ranks(std::span<const double> values);

// Table-2-style switches. bleu_baseline restricts the metric set to BLEU;
// no_positional drops the tanh positional term; no_tokenizer swaps in the
// merge-free byte vocabulary (embedding rows 0..255 are the byte tokens in
// every trained table, so the tables stay usable).
enum class AblationMode { full, bleu_baseline, no_positional, no_tokenizer };

std::string_view to_string(AblationMode mode);
std::optional<AblationMode> parse_ablation(std::string_view name);

struct GroupCorrelation {
    std::optional<double> pearson;   // nullopt = undefined (reported, not 0)
    std::optional<double> spearman;
    std::size_t samples = 0;
};

struct MetricReport {
    std::string metric;
    double mean_score = 0.0;
    std::vector<GroupCorrelation> groups;
};

struct CorrelationReport {
    std::vector<MetricReport> metrics;
    std::size_t record_count = 0;
    std::size_t group_count = 0;
    MetricConfig config;  // effective config (after ablation switches)
    AblationMode ablation = AblationMode::full;
};

struct EvalOptions {
    std::set<std::string> metrics;  // empty = all built-ins plus externals
    MetricConfig config;
    AblationMode ablation = AblationMode::full;
};

// Scores every record with every selected metric and correlates each metric
// with the per-group mean human score. Deterministic for fixed inputs.
CorrelationReport run_evaluation(std::span<const EvalRecord> records,
                                 const Vocab& vocab,
                                 const EmbeddingTable& embeddings,
                                 const PositionalTable& positions,
                                 const EvalOptions& options = {});

// The same values in three shapes: aligned text, CSV, JSON.
std::string format_report_text(const CorrelationReport& report);
std::string format_report_csv(const CorrelationReport& report);
std::string format_report_json(const CorrelationReport& report);

}  // namespace texbleu
