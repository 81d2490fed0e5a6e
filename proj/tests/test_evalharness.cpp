#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "testutil.hpp"
#include "texbleu/errors.hpp"
#include "texbleu/evalharness.hpp"

using namespace texbleu;

TEST_CASE("pearson pinned examples") {
    const std::vector<double> a = {1, 2, 3};
    CHECK(*pearson(a, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
    CHECK(*pearson(a, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(*pearson(std::vector<double>{1, 2, 3, 4},
                   std::vector<double>{1, 3, 2, 4}) ==
          doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("pearson edge cases") {
    const std::vector<double> flat = {2, 2, 2};
    const std::vector<double> rising = {1, 2, 3};
    CHECK(!pearson(flat, rising).has_value());
    CHECK(!pearson(rising, flat).has_value());
    CHECK_THROWS_AS(pearson(rising, std::vector<double>{1, 2}), data_error);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}),
                    data_error);
}

TEST_CASE("spearman pinned examples") {
    CHECK(*spearman(std::vector<double>{1, 5, 9, 20},
                    std::vector<double>{2, 3, 4, 100}) == doctest::Approx(1.0));
    CHECK(*spearman(std::vector<double>{1, 2, 3},
                    std::vector<double>{9, 5, 1}) == doctest::Approx(-1.0));
    // Tie in x: ranks 1, 2.5, 2.5, 4.
    CHECK(*spearman(std::vector<double>{1, 2, 2, 4},
                    std::vector<double>{1, 2, 3, 4}) ==
          doctest::Approx(0.9486833).epsilon(1e-6));
}

TEST_CASE("average_ranks handles ties with rank-span means") {
    const auto ranks = average_ranks(std::vector<double>{1, 2, 2, 4});
    CHECK(ranks == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    const auto all_tied = average_ranks(std::vector<double>{7, 7, 7});
    CHECK(all_tied == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("spearman equals pearson of ranks exactly") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(12), y(12);
        for (auto& v : x) v = std::round(dist(rng));  // rounding forces ties
        for (auto& v : y) v = std::round(dist(rng));
        const auto direct = spearman(x, y);
        const auto via_ranks = pearson(average_ranks(x), average_ranks(y));
        REQUIRE(direct.has_value() == via_ranks.has_value());
        if (direct) CHECK(*direct == *via_ranks);
    }
}

TEST_CASE("load_dataset accepts well-formed records") {
    testutil::TempDir dir("texbleu-ds");
    testutil::write_file(dir.file("ok.jsonl"),
                         R"({"ref":"a + b","pred":"a+b"})"
                         "\n"
                         R"({"ref":"x","pred":"y","human":[[5,4],[3,3]]})"
                         "\n"
                         R"({"ref":"z","pred":"z","metrics":{"sbleu":46.8}})"
                         "\n");
    const auto loaded = load_dataset(dir.file("ok.jsonl"));
    REQUIRE(loaded.records.size() == 3);
    CHECK(loaded.warnings.empty());
    CHECK(loaded.records[0].ref == "a + b");
    REQUIRE(loaded.records[1].human.size() == 2);
    CHECK(loaded.records[1].human[0] == std::vector<int>{5, 4});
    CHECK(loaded.records[2].external.at("sbleu") == doctest::Approx(46.8));
}

TEST_CASE("load_dataset strict mode names offending lines") {
    testutil::TempDir dir("texbleu-ds-bad");
    testutil::write_file(dir.file("bad.jsonl"),
                         R"({"ref":"a","pred":"b"})"
                         "\n"
                         R"({"ref":"a","pred":"b","human":[[6]]})"
                         "\n");
    try {
        load_dataset(dir.file("bad.jsonl"));
        FAIL("expected data_error");
    } catch (const data_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("6") != std::string::npos);
    }
}

TEST_CASE("load_dataset lenient mode skips with warnings") {
    testutil::TempDir dir("texbleu-ds-len");
    testutil::write_file(dir.file("mixed.jsonl"),
                         R"({"ref":"a","pred":"b"})"
                         "\n"
                         "not json at all\n"
                         R"({"ref":"","pred":"b"})"
                         "\n");
    const auto loaded = load_dataset(dir.file("mixed.jsonl"), LoadMode::lenient);
    CHECK(loaded.records.size() == 1);
    CHECK(loaded.warnings.size() == 2);
}

TEST_CASE("load_dataset on an empty file warns") {
    testutil::TempDir dir("texbleu-ds-empty");
    testutil::write_file(dir.file("empty.jsonl"), "");
    const auto loaded = load_dataset(dir.file("empty.jsonl"));
    CHECK(loaded.records.empty());
    CHECK(loaded.warnings.size() == 1);
    CHECK_THROWS_AS(load_dataset(dir.file("missing.jsonl")), io_error);
}

namespace {

struct HarnessWorld {
    Vocab vocab;
    EmbeddingTable embeddings;
    PositionalTable positions;

    static const HarnessWorld& get() {
        static const HarnessWorld w = [] {
            testutil::LatexGen gen(606);
            const auto lines = gen.corpus_lines(200);
            Vocab vocab =
                train_bpe(std::span<const std::string>(lines), 256 + 40, 2);
            std::vector<TokenSeq> seqs;
            for (const auto& line : lines) seqs.push_back(encode(vocab, line));
            SgnsParams params;
            params.dim = 12;
            params.epochs = 2;
            EmbeddingTable emb = train_embeddings(seqs, vocab, params);
            PositionalTable pos = sinusoidal_positions(96, 12);
            return HarnessWorld{std::move(vocab), std::move(emb), std::move(pos)};
        }();
        return w;
    }
};

EvalRecord make_record(std::string ref, std::string pred,
                       std::vector<std::vector<int>> human = {},
                       std::map<std::string, double> external = {}) {
    return EvalRecord{std::move(ref), std::move(pred), std::move(human),
                      std::move(external)};
}

}  // namespace

TEST_CASE("run_evaluation correlates an external column with human means") {
    const auto& w = HarnessWorld::get();
    // External metric linear in the human means: both correlations 1.
    std::vector<EvalRecord> records = {
        make_record("a + b", "a - b", {{1, 1}}, {{"ext", 0.1}}),
        make_record("a + b", "a + c", {{2, 2}}, {{"ext", 0.2}}),
        make_record("a + b", "a + b", {{3, 3}}, {{"ext", 0.3}}),
        make_record("c", "c", {{4, 4}}, {{"ext", 0.4}}),
    };
    EvalOptions options;
    options.metrics = {"ext"};
    const auto report = run_evaluation(records, w.vocab, w.embeddings,
                                       w.positions, options);
    REQUIRE(report.metrics.size() == 1);
    CHECK(report.metrics[0].metric == "ext");
    CHECK(report.metrics[0].mean_score == doctest::Approx(0.25));
    REQUIRE(report.metrics[0].groups.size() == 1);
    CHECK(*report.metrics[0].groups[0].pearson == doctest::Approx(1.0));
    CHECK(*report.metrics[0].groups[0].spearman == doctest::Approx(1.0));
}

TEST_CASE("run_evaluation matches hand-computed correlations") {
    const auto& w = HarnessWorld::get();
    // Metric column 1,2,3,4 against human means 1,3,2,4: pearson 0.8 and
    // spearman 0.8 (ranks equal the values).
    std::vector<EvalRecord> records = {
        make_record("r", "p1", {{1}}, {{"m", 1.0}}),
        make_record("r", "p2", {{3}}, {{"m", 2.0}}),
        make_record("r", "p3", {{2}}, {{"m", 3.0}}),
        make_record("r", "p4", {{4}}, {{"m", 4.0}}),
    };
    EvalOptions options;
    options.metrics = {"m"};
    const auto report =
        run_evaluation(records, w.vocab, w.embeddings, w.positions, options);
    CHECK(*report.metrics[0].groups[0].pearson ==
          doctest::Approx(0.8).epsilon(1e-12));
    CHECK(*report.metrics[0].groups[0].spearman ==
          doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("zero-variance metrics report undefined, not zero") {
    const auto& w = HarnessWorld::get();
    std::vector<EvalRecord> records = {
        make_record("a", "a", {{1}}), make_record("b", "b", {{3}}),
        make_record("c", "c", {{5}})};  // identical predictions: texbleu all 1
    EvalOptions options;
    options.metrics = {"texbleu"};
    const auto report =
        run_evaluation(records, w.vocab, w.embeddings, w.positions, options);
    CHECK(report.metrics[0].mean_score == doctest::Approx(1.0));
    CHECK(!report.metrics[0].groups[0].pearson.has_value());
    CHECK(!report.metrics[0].groups[0].spearman.has_value());
}

TEST_CASE("records without human scores still yield mean scores") {
    const auto& w = HarnessWorld::get();
    std::vector<EvalRecord> records = {make_record("a + b", "a + b"),
                                       make_record("a + b", "a - b")};
    const auto report =
        run_evaluation(records, w.vocab, w.embeddings, w.positions, {});
    CHECK(report.group_count == 0);
    for (const auto& mr : report.metrics) CHECK(mr.groups.empty());
    CHECK(report.metrics[0].metric == "texbleu");
    CHECK(report.metrics[0].mean_score > 0.0);
}

TEST_CASE("default metric set covers built-ins plus externals") {
    const auto& w = HarnessWorld::get();
    std::vector<EvalRecord> records = {
        make_record("a", "a", {}, {{"sbleu", 40.0}}),
        make_record("b", "b", {}, {{"sbleu", 50.0}})};
    const auto report =
        run_evaluation(records, w.vocab, w.embeddings, w.positions, {});
    std::vector<std::string> names;
    for (const auto& mr : report.metrics) names.push_back(mr.metric);
    CHECK(names == std::vector<std::string>{"texbleu", "bleu", "rouge1", "cer",
                                            "wer", "sbleu"});
}

TEST_CASE("missing external column is an error") {
    const auto& w = HarnessWorld::get();
    std::vector<EvalRecord> records = {
        make_record("a", "a", {}, {{"ext", 1.0}}), make_record("b", "b")};
    EvalOptions options;
    options.metrics = {"ext"};
    CHECK_THROWS_AS(
        run_evaluation(records, w.vocab, w.embeddings, w.positions, options),
        data_error);
}

TEST_CASE("ablation switches change the effective configuration") {
    const auto& w = HarnessWorld::get();
    std::vector<EvalRecord> records = {
        make_record("\\sqrt { x }", "\\sqrt { y }", {{2}}),
        make_record("\\frac { a } { b }", "a / b", {{4}}),
        make_record("x ^ 2", "x ^ 2", {{5}})};

    EvalOptions full;
    const auto report_full =
        run_evaluation(records, w.vocab, w.embeddings, w.positions, full);

    SUBCASE("bleu baseline restricts the metric set") {
        EvalOptions options;
        options.ablation = AblationMode::bleu_baseline;
        const auto report =
            run_evaluation(records, w.vocab, w.embeddings, w.positions, options);
        REQUIRE(report.metrics.size() == 1);
        CHECK(report.metrics[0].metric == "bleu");
    }

    SUBCASE("no-positional turns the tanh term off") {
        EvalOptions options;
        options.ablation = AblationMode::no_positional;
        const auto report =
            run_evaluation(records, w.vocab, w.embeddings, w.positions, options);
        CHECK(report.config.positional == PositionalMode::off);
    }

    SUBCASE("no-tokenizer swaps in the byte-level vocab") {
        EvalOptions options;
        options.ablation = AblationMode::no_tokenizer;
        options.metrics = {"texbleu"};
        const auto report =
            run_evaluation(records, w.vocab, w.embeddings, w.positions, options);
        // Multi-byte commands fragment into byte tokens, so the n-gram
        // structure and the score change.
        const auto full_texbleu = report_full.metrics[0].mean_score;
        CHECK(report.metrics[0].mean_score != full_texbleu);
    }
}

TEST_CASE("report formats carry identical values") {
    const auto& w = HarnessWorld::get();
    std::vector<EvalRecord> records = {
        make_record("a + b", "a - b", {{1, 2}}),
        make_record("x ^ 2", "x ^ 3", {{3, 4}}),
        make_record("\\pi", "\\pi", {{5, 5}})};
    const auto report =
        run_evaluation(records, w.vocab, w.embeddings, w.positions, {});

    const auto text = format_report_text(report);
    const auto csv = format_report_csv(report);
    const auto parsed = nlohmann::json::parse(format_report_json(report));

    CHECK(text.find("texbleu") != std::string::npos);
    CHECK(text.find("H1-pearson") != std::string::npos);
    CHECK(csv.find("metric,mean,h1_pearson,h1_spearman") != std::string::npos);
    CHECK(csv.find("# records 3") == 0);  // config echo rides in a comment row

    REQUIRE(parsed["metrics"].is_array());
    CHECK(parsed["records"] == records.size());
    for (std::size_t i = 0; i < report.metrics.size(); ++i) {
        const auto& jm = parsed["metrics"][i];
        CHECK(jm["name"] == report.metrics[i].metric);
        CHECK(jm["mean"].get<double>() == report.metrics[i].mean_score);
        const auto& gc = report.metrics[i].groups[0];
        if (gc.pearson) {
            CHECK(jm["groups"][0]["pearson"].get<double>() == *gc.pearson);
        } else {
            CHECK(jm["groups"][0]["pearson"].is_null());
        }
    }
}

TEST_CASE("report generation is deterministic") {
    const auto& w = HarnessWorld::get();
    std::vector<EvalRecord> records = {make_record("a + b", "a - b", {{2, 3}}),
                                       make_record("c", "d", {{1, 4}})};
    const auto r1 =
        run_evaluation(records, w.vocab, w.embeddings, w.positions, {});
    const auto r2 =
        run_evaluation(records, w.vocab, w.embeddings, w.positions, {});
    CHECK(format_report_json(r1) == format_report_json(r2));
}
