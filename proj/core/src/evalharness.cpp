#include "texbleu/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "texbleu/baselines.hpp"
#include "texbleu/errors.hpp"

namespace texbleu {

namespace {

using nlohmann::json;

const std::vector<std::string> kBuiltinMetrics = {"texbleu", "bleu", "rouge1",
                                                  "cer", "wer"};

std::optional<EvalRecord> parse_record(const std::string& line,
                                       std::size_t line_no,
                                       std::string& issue) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        issue = "line " + std::to_string(line_no) + ": invalid JSON (" +
                e.what() + ")";
        return std::nullopt;
    }
    if (!obj.is_object()) {
        issue = "line " + std::to_string(line_no) + ": not a JSON object";
        return std::nullopt;
    }

    EvalRecord record;
    if (!obj.contains("ref") || !obj["ref"].is_string()) {
        issue = "line " + std::to_string(line_no) + ": missing string field 'ref'";
        return std::nullopt;
    }
    record.ref = obj["ref"].get<std::string>();
    if (record.ref.empty()) {
        issue = "line " + std::to_string(line_no) + ": 'ref' must be non-empty";
        return std::nullopt;
    }
    if (!obj.contains("pred") || !obj["pred"].is_string()) {
        issue = "line " + std::to_string(line_no) + ": missing string field 'pred'";
        return std::nullopt;
    }
    record.pred = obj["pred"].get<std::string>();

    if (obj.contains("human")) {
        const auto& human = obj["human"];
        if (!human.is_array()) {
            issue = "line " + std::to_string(line_no) +
                    ": 'human' must be an array of arrays";
            return std::nullopt;
        }
        for (const auto& group : human) {
            if (!group.is_array() || group.empty()) {
                issue = "line " + std::to_string(line_no) +
                        ": each rater group must be a non-empty array";
                return std::nullopt;
            }
            std::vector<int> scores;
            for (const auto& s : group) {
                if (!s.is_number_integer()) {
                    issue = "line " + std::to_string(line_no) +
                            ": human scores must be integers";
                    return std::nullopt;
                }
                const int v = s.get<int>();
                if (v < 1 || v > 5) {
                    issue = "line " + std::to_string(line_no) +
                            ": human score " + std::to_string(v) +
                            " outside 1..5";
                    return std::nullopt;
                }
                scores.push_back(v);
            }
            record.human.push_back(std::move(scores));
        }
    }

    if (obj.contains("metrics")) {
        const auto& metrics = obj["metrics"];
        if (!metrics.is_object()) {
            issue = "line " + std::to_string(line_no) +
                    ": 'metrics' must be an object of numbers";
            return std::nullopt;
        }
        for (const auto& [name, value] : metrics.items()) {
            if (!value.is_number()) {
                issue = "line " + std::to_string(line_no) + ": metric '" + name +
                        "' is not a number";
                return std::nullopt;
            }
            const double v = value.get<double>();
            if (!std::isfinite(v)) {
                issue = "line " + std::to_string(line_no) + ": metric '" + name +
                        "' is not finite";
                return std::nullopt;
            }
            record.external.emplace(name, v);
        }
    }
    return record;
}

std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string cell(const std::optional<double>& v, const char* fmt,
                 const char* undefined_marker) {
    return v ? format_double(*v, fmt) : std::string(undefined_marker);
}

}  // namespace

DatasetLoadResult load_dataset(const std::filesystem::path& path,
                               LoadMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read dataset: " + path.string());

    DatasetLoadResult result;
    std::vector<std::string> issues;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string issue;
        auto record = parse_record(line, line_no, issue);
        if (record) {
            result.records.push_back(std::move(*record));
        } else {
            issues.push_back(std::move(issue));
        }
    }
    if (in.bad()) throw io_error("read failed: " + path.string());

    if (!issues.empty()) {
        if (mode == LoadMode::strict) {
            std::string msg = "dataset " + path.string() + " has " +
                              std::to_string(issues.size()) + " malformed line(s):";
            for (const auto& issue : issues) msg += "\n  " + issue;
            throw data_error(msg);
        }
        result.warnings = std::move(issues);
    }
    if (result.records.empty()) {
        result.warnings.push_back("dataset " + path.string() +
                                  " contains no records");
    }
    return result;
}

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y) {
    if (x.size() != y.size()) {
        throw data_error("pearson: length mismatch (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) {
        throw data_error("pearson: need at least two samples");
    }
    const double n = static_cast<double>(x.size());
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if (var_x == 0.0 || var_y == 0.0) return std::nullopt;
    return std::clamp(cov / std::sqrt(var_x * var_y), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b];
    });
    std::vector<double> ranks(values.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        // Tied block [i, j] shares the mean of ranks i+1 .. j+1.
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y) {
    if (x.size() != y.size()) {
        throw data_error("spearman: length mismatch (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

std::string_view to_string(AblationMode mode) {
    switch (mode) {
        case AblationMode::bleu_baseline: return "bleu-baseline";
        case AblationMode::no_positional: return "no-positional";
        case AblationMode::no_tokenizer: return "no-tokenizer";
        case AblationMode::full: break;
    }
    return "full";
}

std::optional<AblationMode> parse_ablation(std::string_view name) {
    if (name == "full") return AblationMode::full;
    if (name == "bleu-baseline") return AblationMode::bleu_baseline;
    if (name == "no-positional") return AblationMode::no_positional;
    if (name == "no-tokenizer") return AblationMode::no_tokenizer;
    return std::nullopt;
}

CorrelationReport run_evaluation(std::span<const EvalRecord> records,
                                 const Vocab& vocab,
                                 const EmbeddingTable& embeddings,
                                 const PositionalTable& positions,
                                 const EvalOptions& options) {
    if (records.empty()) throw data_error("run_evaluation: no records");

    MetricConfig cfg = options.config;
    if (options.ablation == AblationMode::no_positional) {
        cfg.positional = PositionalMode::off;
    }
    cfg.validate();

    // Metric selection. The BLEU-baseline row pins the set to BLEU alone.
    std::vector<std::string> selected;
    if (options.ablation == AblationMode::bleu_baseline) {
        selected = {"bleu"};
    } else if (!options.metrics.empty()) {
        selected.assign(options.metrics.begin(), options.metrics.end());
        std::sort(selected.begin(), selected.end());
    } else {
        selected = kBuiltinMetrics;
        std::set<std::string> externals;
        for (const auto& r : records) {
            for (const auto& [name, _] : r.external) externals.insert(name);
        }
        selected.insert(selected.end(), externals.begin(), externals.end());
    }
    if (selected.empty()) throw data_error("run_evaluation: no metrics selected");

    // Keep the built-in ordering stable in reports.
    std::stable_sort(selected.begin(), selected.end(),
                     [](const std::string& a, const std::string& b) {
                         auto rank = [](const std::string& m) {
                             const auto it = std::find(kBuiltinMetrics.begin(),
                                                       kBuiltinMetrics.end(), m);
                             return it - kBuiltinMetrics.begin();
                         };
                         return rank(a) < rank(b);
                     });

    // Ablation row "no tokenizer": byte-level vocab; ids 0..255 of any
    // trained embedding table are exactly the byte tokens.
    const bool byte_mode = options.ablation == AblationMode::no_tokenizer;
    const Vocab byte_vocab = Vocab::byte_level();
    EmbeddingTable byte_emb;
    const Vocab* eff_vocab = &vocab;
    const EmbeddingTable* eff_emb = &embeddings;
    if (byte_mode) {
        byte_emb = embeddings.head_rows(std::min<std::size_t>(
            256, embeddings.vocab_size()));
        eff_vocab = &byte_vocab;
        eff_emb = &byte_emb;
    }

    const bool needs_scorer =
        std::find(selected.begin(), selected.end(), "texbleu") != selected.end();
    std::optional<Scorer> scorer;
    if (needs_scorer) scorer.emplace(*eff_vocab, *eff_emb, positions);

    // Score matrix: metric name -> per-record values.
    std::map<std::string, std::vector<double>> scores;
    for (const auto& name : selected) scores[name].reserve(records.size());

    for (const auto& record : records) {
        for (const auto& name : selected) {
            double value;
            if (name == "texbleu") {
                value = scorer->score(record.ref, record.pred, cfg);
            } else if (name == "bleu") {
                value = bleu(record.ref, record.pred);
            } else if (name == "rouge1") {
                value = rouge1(record.ref, record.pred);
            } else if (name == "cer") {
                value = cer(record.ref, record.pred);
            } else if (name == "wer") {
                value = wer(record.ref, record.pred);
            } else {
                const auto it = record.external.find(name);
                if (it == record.external.end()) {
                    throw data_error("metric column '" + name +
                                     "' missing from at least one record");
                }
                value = it->second;
            }
            scores[name].push_back(value);
        }
    }

    std::size_t group_count = 0;
    for (const auto& r : records) {
        group_count = std::max(group_count, r.human.size());
    }

    // Mean human score per group, over the records that rated that group.
    std::vector<std::vector<double>> group_human(group_count);
    std::vector<std::vector<std::size_t>> group_rows(group_count);
    for (std::size_t row = 0; row < records.size(); ++row) {
        const auto& human = records[row].human;
        for (std::size_t g = 0; g < human.size(); ++g) {
            const auto& raters = human[g];
            const double mean =
                std::accumulate(raters.begin(), raters.end(), 0.0) /
                static_cast<double>(raters.size());
            group_human[g].push_back(mean);
            group_rows[g].push_back(row);
        }
    }

    CorrelationReport report;
    report.record_count = records.size();
    report.group_count = group_count;
    report.config = cfg;
    report.ablation = options.ablation;

    for (const auto& name : selected) {
        const auto& values = scores[name];
        MetricReport mr;
        mr.metric = name;
        mr.mean_score = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
        for (std::size_t g = 0; g < group_count; ++g) {
            GroupCorrelation gc;
            gc.samples = group_rows[g].size();
            if (gc.samples >= 2) {
                std::vector<double> metric_col;
                metric_col.reserve(gc.samples);
                for (const auto row : group_rows[g]) {
                    metric_col.push_back(values[row]);
                }
                gc.pearson = pearson(metric_col, group_human[g]);
                gc.spearman = spearman(metric_col, group_human[g]);
            }
            mr.groups.push_back(std::move(gc));
        }
        report.metrics.push_back(std::move(mr));
    }
    return report;
}

std::string format_report_text(const CorrelationReport& report) {
    std::ostringstream out;
    out << "records " << report.record_count << "  groups " << report.group_count
        << "  pairing " << to_string(report.config.pairing) << "  positional "
        << to_string(report.config.positional) << "  alpha "
        << format_double(report.config.alpha, "%g") << "  beta "
        << format_double(report.config.beta, "%g") << "  max_n "
        << report.config.max_n << "  ablation " << to_string(report.ablation)
        << "\n";

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"metric", "mean"};
    for (std::size_t g = 1; g <= report.group_count; ++g) {
        header.push_back("H" + std::to_string(g) + "-pearson");
        header.push_back("H" + std::to_string(g) + "-spearman");
    }
    rows.push_back(std::move(header));
    for (const auto& mr : report.metrics) {
        std::vector<std::string> row = {mr.metric,
                                        format_double(mr.mean_score, "%.6f")};
        for (const auto& gc : mr.groups) {
            row.push_back(cell(gc.pearson, "%.6f", "undef"));
            row.push_back(cell(gc.spearman, "%.6f", "undef"));
        }
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << "  ";
            out << row[c];
            if (c + 1 < row.size()) {
                out << std::string(widths[c] - row[c].size(), ' ');
            }
        }
        out << "\n";
    }
    return std::move(out).str();
}

std::string format_report_csv(const CorrelationReport& report) {
    std::ostringstream out;
    out << "# records " << report.record_count << " groups "
        << report.group_count << " pairing " << to_string(report.config.pairing)
        << " positional " << to_string(report.config.positional) << " alpha "
        << format_double(report.config.alpha, "%g") << " beta "
        << format_double(report.config.beta, "%g") << " max_n "
        << report.config.max_n << " ablation " << to_string(report.ablation)
        << "\n";
    out << "metric,mean";
    for (std::size_t g = 1; g <= report.group_count; ++g) {
        out << ",h" << g << "_pearson,h" << g << "_spearman";
    }
    out << "\n";
    for (const auto& mr : report.metrics) {
        out << mr.metric << ',' << format_double(mr.mean_score, "%.17g");
        for (const auto& gc : mr.groups) {
            out << ',' << cell(gc.pearson, "%.17g", "");
            out << ',' << cell(gc.spearman, "%.17g", "");
        }
        out << "\n";
    }
    return std::move(out).str();
}

std::string format_report_json(const CorrelationReport& report) {
    json j;
    j["records"] = report.record_count;
    j["groups"] = report.group_count;
    j["config"] = {{"pairing", std::string(to_string(report.config.pairing))},
                   {"positional", std::string(to_string(report.config.positional))},
                   {"alpha", report.config.alpha},
                   {"beta", report.config.beta},
                   {"max_n", report.config.max_n},
                   {"weights", report.config.effective_weights()},
                   {"ablation", std::string(to_string(report.ablation))}};
    j["metrics"] = json::array();
    for (const auto& mr : report.metrics) {
        json jm;
        jm["name"] = mr.metric;
        jm["mean"] = mr.mean_score;
        jm["groups"] = json::array();
        for (const auto& gc : mr.groups) {
            json jg;
            jg["samples"] = gc.samples;
            jg["pearson"] = gc.pearson ? json(*gc.pearson) : json(nullptr);
            jg["spearman"] = gc.spearman ? json(*gc.spearman) : json(nullptr);
            jm["groups"].push_back(std::move(jg));
        }
        j["metrics"].push_back(std::move(jm));
    }
    return j.dump(2) + "\n";
}

}  // namespace texbleu
