#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "support/text_stub.hpp"
#include "varskip/error.hpp"
#include "varskip/model.hpp"
#include "varskip/rng.hpp"
#include "varskip/textdata.hpp"
#include "varskip/textmatch.hpp"
#include "varskip/train.hpp"

using namespace varskip;
using testing::TextStub;

TEST_CASE("parse_pattern maps bytes through the char vocab") {
    Vocab v = Vocab::build({"", "a", "b", "c"});
    Pattern p = parse_pattern("cab", v);
    CHECK(p.chars == std::vector<int32_t>{3, 1, 2});
    CHECK_THROWS_WITH_AS(parse_pattern("ax", v), doctest::Contains("'x'"), Error);
    CHECK_THROWS_AS(parse_pattern("", v), Error);
}

TEST_CASE("position_match_prob is an exact product on the independence stub") {
    TextStub stub = TextStub::uniform(6, {"0", "1"});
    Pattern p;
    p.chars = {1, 1, 0};
    for (int32_t start : {0, 1, 3}) {
        stub.calls = 0;
        CHECK(position_match_prob(stub, p, start) == 0.125);
        CHECK(stub.calls == 3);  // exactly L evaluations, independent of start
    }
    CHECK_THROWS_AS(position_match_prob(stub, p, 4), Error);
    CHECK_THROWS_AS(position_match_prob(stub, p, -1), Error);
}

TEST_CASE("pattern estimation requires a prefix-trained model") {
    std::vector<std::string> lines(8, "abab");
    Table t = make_text_table("t", lines, 4);
    ModelConfig cfg;
    cfg.blocks = 1;
    cfg.hidden = 8;
    cfg.d_emb = 2;
    cfg.tied_embeddings = true;
    cfg.mask_mode = "random";  // masked, but not prefix-masked
    ArModel model = ArModel::init(t.columns(), cfg);
    Pattern p = parse_pattern("ab", t.column(0).vocab);
    Rng rng(1);
    CHECK_THROWS_WITH_AS(position_match_prob(model, p, 0), doctest::Contains("prefix"), Error);
    CHECK_THROWS_WITH_AS(contains_prob(model, p, 100, rng), doctest::Contains("prefix"), Error);
    CHECK_NOTHROW(naive_contains(model, p, 16, rng));  // needs no masking
}

TEST_CASE("contains_prob matches the enumeration oracle on product stubs") {
    // Biased Bernoulli over {0,1}, W=4: all 16 strings enumerable.
    std::vector<std::vector<double>> probs(4, {0.7, 0.3});
    TextStub stub({"0", "1"}, probs);
    Pattern p;
    p.chars = {1, 1};
    const double truth = stub.enumerate_contains(p.chars);

    Rng rng(17);
    MatchEstimate est = contains_prob(stub, p, 60000, rng);
    REQUIRE(est.first_terms.size() == 3);
    CHECK(est.first_terms[0] == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(std::abs(est.probability - truth) <= 3.0 * est.std_error + 1e-9);

    // The uncorrected position sum double-counts multi-match strings.
    double uncorrected = 0.0;
    for (double f : est.first_terms) uncorrected += f;
    CHECK(uncorrected > truth + 1e-6);

    MatchEstimate naive = naive_contains(stub, p, 60000, rng);
    CHECK(std::abs(naive.probability - truth) <= 3.0 * naive.std_error + 1e-9);
    CHECK(naive.forward_passes == 60000 * 4);
}

TEST_CASE("full-width patterns have no later-match correction") {
    TextStub stub = TextStub::uniform(3, {"0", "1"});
    Pattern p;
    p.chars = {1, 0, 1};
    Rng rng(3);
    MatchEstimate est = contains_prob(stub, p, 500, rng);
    REQUIRE(est.first_terms.size() == 1);
    CHECK(est.probability == est.first_terms[0]);
    CHECK(est.probability == 0.125);
    CHECK(est.forward_passes == 3);  // the exact chain only, no sampling
    CHECK(est.std_error == 0.0);

    Pattern longer;
    longer.chars = {1, 0, 1, 1};
    MatchEstimate none = contains_prob(stub, longer, 500, rng);
    CHECK(none.probability == 0.0);
    CHECK(none.first_terms.empty());
}

TEST_CASE("estimates shrink as the pattern grows on the uniform stub") {
    TextStub stub = TextStub::uniform(8, {"0", "1"});
    Rng rng(9);
    Pattern one;
    one.chars = {1};
    MatchEstimate first = contains_prob(stub, one, 20000, rng);
    CHECK(first.probability >= 0.95);  // truth 1 - 0.5^8
    CHECK(first.probability <= 1.0);
    double prev = 1.0;
    for (int32_t len : {2, 3, 4}) {
        Pattern p;
        p.chars.assign(static_cast<size_t>(len), 1);
        MatchEstimate est = contains_prob(stub, p, 20000, rng);
        CHECK(est.probability < prev);
        CHECK(est.probability >= 0.0);
        prev = est.probability;
    }
}

TEST_CASE("matches never follow the string end") {
    // Degenerate stub that always emits "bb" PAD "aa": the trailing "aa"
    // sits past the string end and must not count as containment.
    std::vector<std::vector<double>> probs = {
        {0.0, 0.0, 1.0},  // b
        {0.0, 0.0, 1.0},  // b
        {1.0, 0.0, 0.0},  // PAD
        {0.0, 1.0, 0.0},  // a
        {0.0, 1.0, 0.0},  // a
    };
    TextStub stub({"", "a", "b"}, probs);
    Rng rng(5);
    Pattern p = parse_pattern("aa", stub.schema()[0].vocab);
    MatchEstimate naive = naive_contains(stub, p, 200, rng);
    CHECK(naive.probability == 0.0);
    Pattern bb = parse_pattern("bb", stub.schema()[0].vocab);
    CHECK(naive_contains(stub, bb, 200, rng).probability == 1.0);
}

TEST_CASE("estimation is deterministic for a fixed seed") {
    TextStub stub = TextStub::uniform(6, {"0", "1", "2"});
    Pattern p;
    p.chars = {2, 1};
    Rng r1(11), r2(11);
    MatchEstimate a = contains_prob(stub, p, 3000, r1);
    MatchEstimate b = contains_prob(stub, p, 3000, r2);
    CHECK(a.probability == b.probability);
    CHECK(a.forward_passes == b.forward_passes);
    CHECK(a.second_term_budget == 3000 / 5);
}

TEST_CASE("textmatch input validation") {
    TextStub stub = TextStub::uniform(4, {"0", "1"});
    Pattern p;
    p.chars = {1};
    Rng rng(1);
    CHECK_THROWS_AS(contains_prob(stub, p, 0, rng), Error);
    CHECK_THROWS_AS(naive_contains(stub, p, 0, rng), Error);
    Pattern bad;
    bad.chars = {7};
    CHECK_THROWS_AS(contains_prob(stub, bad, 100, rng), Error);
    CHECK_THROWS_AS(naive_contains(stub, bad, 100, rng), Error);
    Pattern empty;
    CHECK_THROWS_AS(contains_prob(stub, empty, 100, rng), Error);
}

TEST_CASE("exact_contains_count scans with the string-end rule") {
    Table t = make_text_table("txt", {"abc", "bca", "cab", "abb", "a"}, 3);
    const Vocab& v = t.column(0).vocab;
    CHECK(exact_contains_count(t, parse_pattern("ab", v)) == 3);
    CHECK(exact_contains_count(t, parse_pattern("a", v)) == 5);
    CHECK(exact_contains_count(t, parse_pattern("bc", v)) == 2);
    CHECK(exact_contains_count(t, parse_pattern("abc", v)) == 1);
    CHECK(exact_contains_count(t, parse_pattern("ca", v)) == 2);  // bca, cab
    Pattern too_long;
    too_long.chars = {1, 1, 1, 1};
    CHECK(exact_contains_count(t, too_long) == 0);
    Pattern bad;
    bad.chars = {99};
    CHECK_THROWS_AS(exact_contains_count(t, bad), Error);
}

TEST_CASE("run_text_bench compares both estimators against the scan oracle") {
    Table t = make_text_table("txt", {"aba", "bab", "abb", "bba"}, 3);
    std::vector<std::vector<double>> probs(3, {0.1, 0.5, 0.4});  // PAD, a, b
    TextStub stub({"", "a", "b"}, probs);
    std::vector<std::string> patterns = {"ab", "a", "bb"};
    TextBenchSpec spec;
    spec.budget = 400;
    spec.seed = 21;
    spec.resamples = 50;

    TextBenchReport rep = run_text_bench(stub, t, patterns, spec);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.table_rows == 4);
    CHECK(rep.width == 3);
    CHECK(rep.rows[0].actual == 0.75);  // aba, bab, abb contain "ab"
    CHECK(rep.rows[1].actual == 1.0);
    for (const PatternRow& row : rep.rows) {
        CHECK(row.q_skipping >= 1.0);
        CHECK(row.q_naive >= 1.0);
        CHECK(row.skipping.probability >= 0.0);
        CHECK(row.skipping.probability <= 1.0);
    }
    for (const QuantileBlock* q : {&rep.skip_quant, &rep.naive_quant}) {
        CHECK(q->median <= q->p99);
        CHECK(q->p99 <= q->max);
    }

    // Byte-stable data block, independent of the worker pool size.
    TextBenchReport rep2 = run_text_bench(stub, t, patterns, spec);
    CHECK(text_bench_json_data(rep) == text_bench_json_data(rep2));
    TextBenchSpec serial = spec;
    serial.workers = 1;
    TextBenchSpec wide = spec;
    wide.workers = 3;
    CHECK(text_bench_json_data(run_text_bench(stub, t, patterns, serial)) ==
          text_bench_json_data(rep));
    CHECK(text_bench_json_data(run_text_bench(stub, t, patterns, wide)) ==
          text_bench_json_data(rep));

    nlohmann::json doc = nlohmann::json::parse(text_bench_json(rep));
    CHECK(doc["data"] == nlohmann::json::parse(text_bench_json_data(rep)));
    CHECK(doc["meta"].contains("wall_ms_total"));
    const auto& row = doc["data"]["rows"][0];
    for (const char* key : {"pattern", "probability", "per_position_first_terms", "budget",
                            "forward_passes", "std_error", "actual", "q"})
        CHECK(row.contains(key));
    std::string text = text_bench_text(rep);
    CHECK(text.find("skipping") != std::string::npos);
    CHECK(text.find("naive") != std::string::npos);
    CHECK(text.find("'ab'") != std::string::npos);
}

TEST_CASE("run_text_bench rejects bad inputs") {
    Table t = make_text_table("txt", {"aba", "bab"}, 3);
    TextStub stub = TextStub::uniform(3, {"", "a", "b"});
    TextBenchSpec spec;
    spec.budget = 10;
    CHECK_THROWS_AS(run_text_bench(stub, t, {}, spec), Error);
    CHECK_THROWS_WITH_AS(run_text_bench(stub, t, {"az"}, spec), doctest::Contains("'z'"),
                         Error);
    TextStub narrow = TextStub::uniform(2, {"", "a", "b"});
    CHECK_THROWS_WITH_AS(run_text_bench(narrow, t, {"a"}, spec), doctest::Contains("match"),
                         Error);
    ModelConfig cfg;
    cfg.blocks = 1;
    cfg.hidden = 8;
    cfg.d_emb = 2;
    cfg.tied_embeddings = true;
    cfg.mask_mode = "none";
    ArModel plain = ArModel::init(t.columns(), cfg);
    CHECK_THROWS_WITH_AS(run_text_bench(plain, t, {"a"}, spec), doctest::Contains("prefix"),
                         Error);
    TextBenchSpec bad = spec;
    bad.budget = 0;
    CHECK_THROWS_AS(run_text_bench(stub, t, {"a"}, bad), Error);
}

TEST_CASE("a model trained on one string is confident about it") {
    std::vector<std::string> lines(64, "abca");
    Table t = make_text_table("t", lines, 4);
    ModelConfig cfg;
    cfg.blocks = 2;
    cfg.layers_per_block = 1;
    cfg.hidden = 16;
    cfg.d_emb = 4;
    cfg.batch_size = 64;
    cfg.epochs = 300;
    cfg.lr = 5e-3;
    cfg.mask_mode = "prefix";
    cfg.tied_embeddings = true;
    cfg.seed = 4;
    ArModel model = ArModel::init(t.columns(), cfg);
    Rng rng(4);
    train(model, t, rng);

    const Vocab& vocab = t.column(0).vocab;
    CHECK(position_match_prob(model, parse_pattern("abca", vocab), 0) >= 0.95);
    Rng erng(7);
    MatchEstimate hit = contains_prob(model, parse_pattern("bc", vocab), 400, erng);
    CHECK(hit.probability >= 0.9);
    MatchEstimate miss = contains_prob(model, parse_pattern("ba", vocab), 400, erng);
    CHECK(miss.probability <= 0.05);
}
