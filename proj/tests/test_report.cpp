#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "symrank/report.hpp"

using namespace symrank;

namespace {

SurveyRow sample_row() {
    SurveyRow r;
    r.n = 4;
    r.trials = 1000;
    r.singular_count = 500;
    r.nonsingular_count = 500;
    r.p_hat = make_rat(1, 2);
    r.stderr_ = 0.0158113883;
    r.mean_log_det_scaled = 0.2345678;
    return r;
}

}  // namespace

TEST_CASE("render_table csv schema for survey rows") {
    const std::vector<AnyRecord> empty;
    CHECK(render_table(empty, OutputFormat::Csv) == "n,trials,singular,p_hat,stderr,logdet_scaled\n");

    const std::vector<AnyRecord> one = {sample_row()};
    const auto text = render_table(one, OutputFormat::Csv);
    CHECK(text ==
          "n,trials,singular,p_hat,stderr,logdet_scaled\n"
          "4,1000,500,1/2,0.0158114,0.234568\n");
}

TEST_CASE("rationals render as p/q, never decimals") {
    auto r = sample_row();
    r.p_hat = make_rat(1, 2);
    const std::vector<AnyRecord> recs = {r};
    const auto text = render_table(recs, OutputFormat::Csv);
    CHECK(text.find("1/2") != std::string::npos);
    CHECK(text.find("0.5,") == std::string::npos);
}

TEST_CASE("mixed record types are rejected") {
    std::vector<AnyRecord> recs = {sample_row(), ChainStepRow{}};
    CHECK_THROWS_AS(render_table(recs, OutputFormat::Csv), std::invalid_argument);
}

TEST_CASE("survey csv round-trip is byte stable") {
    auto r = sample_row();
    r.mean_log_det_scaled = std::numeric_limits<double>::quiet_NaN();  // n=1-style hole
    std::vector<AnyRecord> recs = {sample_row(), r};
    const auto text = render_table(recs, OutputFormat::Csv);
    const auto parsed = parse_survey_csv(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].p_hat == make_rat(1, 2));
    CHECK(parsed[0].trials == 1000);
    CHECK(std::isnan(parsed[1].mean_log_det_scaled));
    const std::vector<AnyRecord> again(parsed.begin(), parsed.end());
    CHECK(render_table(again, OutputFormat::Csv) == text);
}

TEST_CASE("survey jsonl round-trip recovers records exactly") {
    auto rized = sample_row();
    rized.exhaustive = true;
    std::vector<AnyRecord> recs = {sample_row(), rized};
    const auto text = render_table(recs, OutputFormat::Jsonl);
    const auto parsed = parse_survey_jsonl(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].n == 4);
    CHECK(parsed[0].stderr_ == sample_row().stderr_);  // full precision in jsonl
    CHECK(parsed[0].mean_log_det_scaled == sample_row().mean_log_det_scaled);
    CHECK(parsed[1].exhaustive);
    const std::vector<AnyRecord> again(parsed.begin(), parsed.end());
    CHECK(render_table(again, OutputFormat::Jsonl) == text);
}

TEST_CASE("chain step jsonl round-trip") {
    ChainStepRow s{3, 12345678901234567ull, 7, 6, 2, "singular_normal", 1.21};
    const std::vector<AnyRecord> recs = {s, ChainStepRow{4, 1, 1, 1, 0, "not_classified", 0.0}};
    const auto text = render_table(recs, OutputFormat::Jsonl);
    const auto parsed = parse_chain_steps_jsonl(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].seed == 12345678901234567ull);
    CHECK(parsed[0].x_value == 1.21);
    CHECK(parsed[0].cls == "singular_normal");
    const std::vector<AnyRecord> again(parsed.begin(), parsed.end());
    CHECK(render_table(again, OutputFormat::Jsonl) == text);
}

TEST_CASE("matrix jsonl round-trip") {
    const auto m = SymMatrix::from_rows({{1, 0, 2}, {0, 1, 1}, {2, 1, 0}});
    const auto line = matrix_to_json(m);
    CHECK(matrix_from_json(line) == m);
    CHECK_THROWS(matrix_from_json("{\"schema\":\"other\"}"));
}

TEST_CASE("real formatting contract") {
    CHECK(fmt_real(0.5) == "0.5");
    CHECK(fmt_real(1.0 / 3.0) == "0.333333");
    CHECK(fmt_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(fmt_real(123456789.0) == "1.23457e+08");
}

TEST_CASE("manifest serializes config echo") {
    RunManifest m;
    m.command = "survey";
    m.config = {{"n", "1..4"}, {"seed", "7"}};
    m.total_trials = 100;
    m.summary = {{"p_hat_n1", "1/2"}};
    const auto j = manifest_to_json(m);
    CHECK(j.find("\"schema\": \"symrank.manifest.v1\"") != std::string::npos);
    CHECK(j.find("\"command\": \"survey\"") != std::string::npos);
    CHECK(j.find("\"n\": \"1..4\"") != std::string::npos);
    CHECK(j.find("\"p_hat_n1\": \"1/2\"") != std::string::npos);
}

TEST_CASE("format parsing") {
    CHECK(parse_format("csv") == OutputFormat::Csv);
    CHECK(parse_format("jsonl") == OutputFormat::Jsonl);
    CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
}
