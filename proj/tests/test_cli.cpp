#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "symrank/report.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli = SYMRANK_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("symrank_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("oracle reproduces the exact small-n values") {
    TempDir tmp;
    const auto out = tmp.file("oracle.csv");
    REQUIRE(run("oracle --n 1..3 --output " + out) == 0);
    const auto rows = symrank::parse_survey_csv(slurp(out));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].p_hat == symrank::make_rat(1, 2));
    CHECK(rows[1].p_hat == symrank::make_rat(1, 2));
    CHECK(rows[2].p_hat == symrank::make_rat(1, 2));
    CHECK(fs::exists(out + ".manifest.json"));
}

TEST_CASE("survey --exhaustive equals the oracle output") {
    TempDir tmp;
    const auto a = tmp.file("a.csv"), b = tmp.file("b.csv");
    REQUIRE(run("survey --n 1..4 --exhaustive --output " + a) == 0);
    REQUIRE(run("oracle --n 1..4 --output " + b) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("identical configs give byte-identical files; threads do not matter") {
    TempDir tmp;
    const auto a = tmp.file("a.jsonl"), b = tmp.file("b.jsonl"), c = tmp.file("c.jsonl");
    const std::string base = "survey --n 3,4 --trials 4000 --seed 11 --format jsonl ";
    REQUIRE(run(base + "--threads 1 --output " + a) == 0);
    REQUIRE(run(base + "--threads 1 --output " + b) == 0);
    REQUIRE(run(base + "--threads 4 --output " + c) == 0);
    const auto ta = slurp(a);
    CHECK(ta == slurp(b));
    CHECK(ta == slurp(c));
    CHECK_FALSE(ta.empty());
}

TEST_CASE("chain command determinism and jsonl output") {
    TempDir tmp;
    const auto a = tmp.file("a.jsonl"), b = tmp.file("b.jsonl");
    const std::string base = "chain --n-max 5 --seeds 1 --epsilon 0.1 --seed 3 --format jsonl ";
    REQUIRE(run(base + "--output " + a) == 0);
    REQUIRE(run(base + "--output " + b) == 0);
    CHECK(slurp(a) == slurp(b));
    const auto steps = symrank::parse_chain_steps_jsonl(slurp(a));
    REQUIRE(steps.size() == 5);
    for (const auto& s : steps) {
        CHECK(s.increment >= 0);
        CHECK(s.increment <= 2);
    }
}

TEST_CASE("decoupling exhaustive sweep reports all events hold") {
    TempDir tmp;
    const auto out = tmp.file("dec.csv");
    REQUIRE(run("decoupling --exhaustive-bits 1,1 --output " + out) == 0);
    const auto text = slurp(out);
    CHECK(text.find("desc,k,events,violations,min_slack") == 0);
    CHECK(text.find("exhaustive-bits 1x1,2,16,0,") != std::string::npos);
}

TEST_CASE("exit codes: config errors 2, guard violations 3") {
    TempDir tmp;
    CHECK(run("survey --n 4 --trials 10") == 2);                 // missing --seed
    CHECK(run("survey --trials 10 --seed 1") == 2);              // missing --n
    CHECK(run("nonsense") == 2);                                 // unknown command
    CHECK(run("survey --n 4 --trials 10 --seed 1 --format xml") == 2);
    CHECK(run("oracle --n 9") == 3);                             // exhaustive guard
    CHECK(run("decoupling --exhaustive-bits 4,4") == 3);         // sweep guard
    CHECK(run("survey --n 4 --trials 10 --seed 1 --dist custom:0:1/2,1:1/3") == 2);
}

TEST_CASE("classify command emits class frequencies") {
    TempDir tmp;
    const auto out = tmp.file("cls.csv");
    REQUIRE(run("classify --n 5 --trials 400 --seed 9 --epsilon 0.1 --output " + out) == 0);
    const auto text = slurp(out);
    CHECK(text.find("n,class,count,group_total,freq,se") == 0);
    CHECK(text.find("singular_normal") != std::string::npos);
    CHECK(text.find("nonsingular_perfect") != std::string::npos);
}

TEST_CASE("concentration command fits the bound at the smallest size") {
    TempDir tmp;
    const auto out = tmp.file("conc.csv");
    REQUIRE(run("concentration --family ones-offdiag --sizes 4,8 --trials 1000 --seed 5 --output " +
                out) == 0);
    const auto text = slurp(out);
    CHECK(text.find("form,interval,size,method,exact,prob,estimate,stderr,trials,atom_value,bound,"
                    "hypothesis_met") == 0);
    CHECK(text.find("3/8") != std::string::npos);
}

TEST_CASE("failed runs leave no partial outputs") {
    TempDir tmp;
    const auto out = tmp.file("never.csv");
    CHECK(run("oracle --n 9 --output " + out) == 3);
    CHECK_FALSE(fs::exists(out));
    CHECK_FALSE(fs::exists(out + ".tmp"));
}
