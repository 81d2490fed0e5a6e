// texbleu command-line tool: corpus ingestion, tokenizer and embedding
// training, pair scoring, dataset evaluation, and a latency check.
//
// Exit codes: 0 success, 1 validation/data error, 2 I/O error,
// 3 artifact-consistency error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "texbleu/baselines.hpp"
#include "texbleu/corpus.hpp"
#include "texbleu/embeddings.hpp"
#include "texbleu/errors.hpp"
#include "texbleu/evalharness.hpp"
#include "texbleu/metric.hpp"
#include "texbleu/textnorm.hpp"
#include "texbleu/tokenizer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitBinding = 3;

// Fills an omitted artifact path from TEXBLEU_HOME.
std::string resolve_artifact(std::string value, const char* flag,
                             const char* default_name) {
    if (!value.empty()) return value;
    if (const char* home = std::getenv("TEXBLEU_HOME")) {
        return (std::filesystem::path(home) / default_name).string();
    }
    throw texbleu::data_error(std::string(flag) +
                              " not given and TEXBLEU_HOME is unset");
}

void require_exists(const std::string& path, const char* what) {
    if (!std::filesystem::exists(path)) {
        throw texbleu::io_error(std::string(what) + " does not exist: " + path);
    }
}

std::vector<std::string> read_corpus_lines(const std::string& path) {
    require_exists(path, "corpus file");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw texbleu::io_error("cannot read corpus file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (in.bad()) throw texbleu::io_error("read failed: " + path);
    return lines;
}

std::vector<double> parse_weights(const std::string& csv) {
    std::vector<double> weights;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double w = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            weights.push_back(w);
        } catch (const std::exception&) {
            throw texbleu::data_error("bad weight value: '" + item + "'");
        }
    }
    return weights;
}

struct MetricFlags {
    double alpha = 2.0;
    double beta = 0.1;
    std::size_t max_n = 3;
    std::string weights_csv;
    std::string pairing = "best";
    std::string positional = "vector-l1";

    texbleu::MetricConfig to_config() const {
        texbleu::MetricConfig cfg;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.max_n = max_n;
        if (!weights_csv.empty()) cfg.weights = parse_weights(weights_csv);
        const auto mode = texbleu::parse_pairing_mode(pairing);
        if (!mode) {
            throw texbleu::data_error("unknown pairing mode: " + pairing);
        }
        cfg.pairing = *mode;
        if (positional == "off") {
            cfg.positional = texbleu::PositionalMode::off;
        } else if (positional == "index-delta") {
            cfg.positional = texbleu::PositionalMode::index_delta;
        } else {
            cfg.positional = texbleu::PositionalMode::vector_l1;
        }
        cfg.validate();
        return cfg;
    }
};

void add_metric_flags(CLI::App* cmd, MetricFlags& flags) {
    cmd->add_option("--alpha", flags.alpha, "Exponent on the cosine distance")
        ->capture_default_str();
    cmd->add_option("--beta", flags.beta, "Scale inside the positional tanh")
        ->capture_default_str();
    cmd->add_option("--max-n", flags.max_n, "Largest n-gram order N")
        ->capture_default_str();
    cmd->add_option("--weights", flags.weights_csv,
                    "Comma-separated n-gram weights (default: uniform 1/N)");
    cmd->add_option("--pairing", flags.pairing,
                    "N-gram pairing: index (literal alignment) or best "
                    "(content-matched)")
        ->check(CLI::IsMember({"index", "best", "index-aligned", "best-match"}))
        ->capture_default_str();
    cmd->add_option("--positional", flags.positional,
                    "Positional term: vector-l1, index-delta, or off")
        ->check(CLI::IsMember({"vector-l1", "index-delta", "off"}))
        ->capture_default_str();
}

struct ArtifactFlags {
    std::string vocab_path;
    std::string emb_path;
    std::string pos_path;
};

void add_artifact_flags(CLI::App* cmd, ArtifactFlags& flags) {
    cmd->add_option("--vocab", flags.vocab_path,
                    "Vocab file (default: $TEXBLEU_HOME/vocab.txt)");
    cmd->add_option("--emb", flags.emb_path,
                    "Embedding table (default: $TEXBLEU_HOME/embeddings.tbl)");
    cmd->add_option("--pos", flags.pos_path,
                    "Positional table (default: $TEXBLEU_HOME/positions.tbl)");
}

struct Artifacts {
    texbleu::Vocab vocab;
    texbleu::EmbeddingTable embeddings;
    texbleu::PositionalTable positions;
};

Artifacts load_artifacts(const ArtifactFlags& flags) {
    const auto vocab_path =
        resolve_artifact(flags.vocab_path, "--vocab", "vocab.txt");
    const auto emb_path =
        resolve_artifact(flags.emb_path, "--emb", "embeddings.tbl");
    const auto pos_path =
        resolve_artifact(flags.pos_path, "--pos", "positions.tbl");
    require_exists(vocab_path, "vocab file");
    require_exists(emb_path, "embedding table");
    require_exists(pos_path, "positional table");
    return Artifacts{texbleu::load_vocab(vocab_path),
                     texbleu::load_embedding_table(emb_path),
                     texbleu::load_positional_table(pos_path)};
}

int cmd_ingest(const std::string& corpus_dir, const std::string& out_path,
               const std::string& mode_name) {
    const auto mode = mode_name == "math" ? texbleu::IngestMode::math_only
                                          : texbleu::IngestMode::whole_file;
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw texbleu::io_error("cannot write corpus file: " + out_path);

    const auto stats =
        texbleu::ingest_corpus(corpus_dir, mode, [&](texbleu::CorpusLine&& line) {
            out << line.text.text << "\n";
        });
    out.flush();
    if (!out) throw texbleu::io_error("write failed: " + out_path);

    std::cerr << "files_ingested " << stats.file_count << "\n"
              << "files_skipped " << stats.skipped_files() << "\n"
              << "lines " << stats.line_count << "\n"
              << "chars " << stats.char_count << "\n"
              << "lenient_decoded " << stats.lenient_decoded_files << "\n"
              << "dropped_math_spans " << stats.dropped_math_spans << "\n";
    for (const auto& [path, reason] : stats.skipped) {
        std::cerr << "skipped " << path << " (" << reason << ")\n";
    }
    if (stats.file_count == 0) {
        std::cerr << "warning: no .tex files ingested under " << corpus_dir
                  << "\n";
    }
    return kExitOk;
}

int cmd_train_tokenizer(const std::string& corpus_path,
                        const std::string& out_path, std::size_t vocab_size,
                        std::size_t min_pair_freq) {
    const auto lines = read_corpus_lines(corpus_path);
    const auto vocab = texbleu::train_bpe(lines, vocab_size, min_pair_freq);
    texbleu::save_vocab(vocab, out_path);
    std::cerr << "vocab_size " << vocab.size() << "\n"
              << "merges " << vocab.merges().size() << "\n";
    return kExitOk;
}

int cmd_train_embeddings(const std::string& corpus_path,
                         const std::string& vocab_path,
                         const std::string& emb_out, const std::string& pos_out,
                         const texbleu::SgnsParams& params, std::size_t max_len) {
    require_exists(vocab_path, "vocab file");
    const auto vocab = texbleu::load_vocab(vocab_path);
    const auto lines = read_corpus_lines(corpus_path);

    std::vector<texbleu::TokenSeq> sequences;
    sequences.reserve(lines.size());
    for (const auto& line : lines) {
        auto seq = texbleu::encode(vocab, line);
        if (!seq.empty()) sequences.push_back(std::move(seq));
    }

    const auto table = texbleu::train_embeddings(sequences, vocab, params);
    texbleu::save_table(table, emb_out);
    std::cerr << "embedding_rows " << table.vocab_size() << "\n"
              << "embedding_dim " << table.dim() << "\n";

    if (!pos_out.empty()) {
        const auto positions = texbleu::sinusoidal_positions(max_len, params.dim);
        texbleu::save_table(positions, pos_out);
        std::cerr << "positional_rows " << positions.max_len() << "\n";
    }
    return kExitOk;
}

int cmd_score(const std::string& ref, const std::string& pred,
              const ArtifactFlags& artifacts, const MetricFlags& flags) {
    const auto cfg = flags.to_config();
    const auto loaded = load_artifacts(artifacts);
    const texbleu::Scorer scorer(loaded.vocab, loaded.embeddings,
                                 loaded.positions);
    const double score = scorer.score(ref, pred, cfg);
    std::printf("%.6f (pairing=%s)\n", score,
                std::string(to_string(cfg.pairing)).c_str());
    return kExitOk;
}

int cmd_evaluate(const std::string& dataset_path, const ArtifactFlags& artifacts,
                 const MetricFlags& flags, const std::string& metrics_csv,
                 const std::string& format, bool lenient,
                 const std::string& ablation_name) {
    require_exists(dataset_path, "dataset");
    const auto loaded = texbleu::load_dataset(
        dataset_path,
        lenient ? texbleu::LoadMode::lenient : texbleu::LoadMode::strict);
    for (const auto& warning : loaded.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    if (loaded.records.empty()) {
        throw texbleu::data_error("dataset has no usable records: " +
                                  dataset_path);
    }

    texbleu::EvalOptions options;
    options.config = flags.to_config();
    const auto ablation = texbleu::parse_ablation(ablation_name);
    if (!ablation) {
        throw texbleu::data_error("unknown ablation mode: " + ablation_name);
    }
    options.ablation = *ablation;
    if (!metrics_csv.empty()) {
        std::stringstream ss(metrics_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) options.metrics.insert(item);
        }
    }

    const auto arts = load_artifacts(artifacts);
    const auto report = texbleu::run_evaluation(
        loaded.records, arts.vocab, arts.embeddings, arts.positions, options);

    if (format == "csv") {
        std::cout << texbleu::format_report_csv(report);
    } else if (format == "json") {
        std::cout << texbleu::format_report_json(report);
    } else {
        std::cout << texbleu::format_report_text(report);
    }
    return kExitOk;
}

int cmd_bench(const ArtifactFlags& artifacts, const MetricFlags& flags,
              std::size_t iterations) {
    using clock = std::chrono::steady_clock;
    const auto cfg = flags.to_config();

    const auto load_start = clock::now();
    const auto loaded = load_artifacts(artifacts);
    const texbleu::Scorer scorer(loaded.vocab, loaded.embeddings,
                                 loaded.positions);
    const double load_ms =
        std::chrono::duration<double, std::milli>(clock::now() - load_start)
            .count();

    // Two fixed 20-character inputs.
    const std::string ref = "\\frac{a^2+b}{c_1-d}!";
    const std::string pred = "\\sqrt{b^2-4ac}+x_1*y";
    if (ref.size() != 20 || pred.size() != 20) {
        throw texbleu::data_error("bench strings must be 20 characters");
    }

    double total_ms = 0.0;
    double last_score = 0.0;
    for (std::size_t i = 0; i < iterations; ++i) {
        const auto t0 = clock::now();
        last_score = scorer.score(ref, pred, cfg);
        total_ms +=
            std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    }
    const double mean_ms =
        iterations > 0 ? total_ms / static_cast<double>(iterations) : 0.0;

    std::printf("load_ms %.3f\n", load_ms);
    std::printf("iterations %zu\n", iterations);
    std::printf("mean_ms %.3f\n", mean_ms);
    std::printf("score %.6f\n", last_score);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TeXBLEU: similarity scoring for LaTeX math expressions"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "Seed for all randomized steps")
        ->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand(
        "ingest", "Build a normalized corpus file from a directory of .tex files");
    std::string corpus_dir, ingest_out;
    std::string ingest_mode = "whole";
    ingest->add_option("--corpus-dir", corpus_dir, "Directory of .tex files")
        ->required();
    ingest->add_option("--out", ingest_out, "Output corpus file")->required();
    ingest
        ->add_option("--mode", ingest_mode,
                     "whole (full files) or math (math segments only)")
        ->check(CLI::IsMember({"whole", "math"}))
        ->capture_default_str();

    // train-tokenizer
    auto* train_tok = app.add_subcommand(
        "train-tokenizer", "Train a byte-pair-encoding vocab on a corpus file");
    std::string tok_corpus, tok_out;
    std::size_t vocab_size = 30000;
    std::size_t min_pair_freq = 2;
    train_tok->add_option("--corpus", tok_corpus, "Normalized corpus file")
        ->required();
    train_tok->add_option("--out", tok_out, "Output vocab file")->required();
    train_tok->add_option("--vocab-size", vocab_size, "Target vocabulary size")
        ->capture_default_str();
    train_tok
        ->add_option("--min-pair-freq", min_pair_freq,
                     "Stop merging below this pair frequency")
        ->capture_default_str();

    // train-embeddings
    auto* train_emb = app.add_subcommand(
        "train-embeddings",
        "Train token embeddings (and write a sinusoidal positional table)");
    std::string emb_corpus, emb_vocab, emb_out, pos_out;
    texbleu::SgnsParams sgns;
    std::size_t max_len = 1024;
    train_emb->add_option("--corpus", emb_corpus, "Normalized corpus file")
        ->required();
    train_emb->add_option("--vocab", emb_vocab, "Trained vocab file")->required();
    train_emb->add_option("--emb-out", emb_out, "Output embedding table")
        ->required();
    train_emb->add_option("--pos-out", pos_out,
                          "Output positional table (optional)");
    train_emb->add_option("--dim", sgns.dim, "Embedding dimension")
        ->capture_default_str();
    train_emb->add_option("--window", sgns.window, "Context window")
        ->capture_default_str();
    train_emb->add_option("--negatives", sgns.negatives, "Negative samples")
        ->capture_default_str();
    train_emb->add_option("--epochs", sgns.epochs, "Training epochs")
        ->capture_default_str();
    train_emb->add_option("--max-len", max_len, "Positional table length")
        ->capture_default_str();

    // score
    auto* score =
        app.add_subcommand("score", "Score one reference/prediction pair");
    std::string score_ref, score_pred;
    ArtifactFlags score_artifacts;
    MetricFlags score_flags;
    score->add_option("--ref", score_ref, "Reference LaTeX string")->required();
    score->add_option("--pred", score_pred, "Predicted LaTeX string")->required();
    add_artifact_flags(score, score_artifacts);
    add_metric_flags(score, score_flags);

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "Score a dataset and correlate metrics with human ratings");
    std::string dataset_path, metrics_csv, eval_format = "text";
    std::string ablation = "full";
    bool lenient = false;
    ArtifactFlags eval_artifacts;
    MetricFlags eval_flags;
    evaluate->add_option("--dataset", dataset_path, "JSONL dataset")->required();
    evaluate->add_option("--metrics", metrics_csv,
                         "Comma-separated metric subset (default: all)");
    evaluate->add_option("--format", eval_format, "text, csv, or json")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    evaluate->add_flag("--lenient", lenient,
                       "Skip malformed dataset lines instead of failing");
    evaluate
        ->add_option("--ablation", ablation,
                     "full, bleu-baseline, no-positional, or no-tokenizer")
        ->check(CLI::IsMember(
            {"full", "bleu-baseline", "no-positional", "no-tokenizer"}))
        ->capture_default_str();
    add_artifact_flags(evaluate, eval_artifacts);
    add_metric_flags(evaluate, eval_flags);

    // bench
    auto* bench = app.add_subcommand(
        "bench", "Measure scoring latency on two 20-character strings");
    std::size_t iterations = 10;
    ArtifactFlags bench_artifacts;
    MetricFlags bench_flags;
    bench->add_option("--iterations", iterations, "Number of timed runs")
        ->capture_default_str();
    add_artifact_flags(bench, bench_artifacts);
    add_metric_flags(bench, bench_flags);

    // Unmatched options inside a subcommand (e.g. a trailing --seed) fall
    // through to the top-level parser.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            return cmd_ingest(corpus_dir, ingest_out, ingest_mode);
        }
        if (train_tok->parsed()) {
            return cmd_train_tokenizer(tok_corpus, tok_out, vocab_size,
                                       min_pair_freq);
        }
        if (train_emb->parsed()) {
            sgns.seed = seed;
            return cmd_train_embeddings(emb_corpus, emb_vocab, emb_out, pos_out,
                                        sgns, max_len);
        }
        if (score->parsed()) {
            return cmd_score(score_ref, score_pred, score_artifacts, score_flags);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(dataset_path, eval_artifacts, eval_flags,
                                metrics_csv, eval_format, lenient, ablation);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_artifacts, bench_flags, iterations);
        }
    } catch (const texbleu::binding_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBinding;
    } catch (const texbleu::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const texbleu::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
