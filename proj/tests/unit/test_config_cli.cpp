#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "dfvote/config.hpp"
#include "dfvote/errors.hpp"
#include "dfvote/experiment.hpp"

using namespace dfvote;
namespace fs = std::filesystem;

namespace {

const char* kIndependentClt = R"({
  "experiment": "verify-clt",
  "model": {
    "groups": 1,
    "sequence": {"type": "static", "base": {"type": "point_mass", "location": [0.0]}}
  },
  "n": 10000,
  "count": 100000,
  "seed": 42
})";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dfvote_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int cli(const std::string& args) {
    const std::string cmd = std::string(DFVOTE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int config_error_line(const std::string& text) {
    try {
        build_model(parse_config(text));
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("config round trips through serialization") {
        const auto c = parse_config(kIndependentClt);
        CHECK(c.experiment == "verify-clt");
        CHECK(c.n == 10000);
        CHECK(c.seed == 42);
        const auto again = parse_config(serialize(c));
        CHECK(again == c);
        CHECK(serialize(again) == serialize(c));
        CHECK(config_hash(again) == config_hash(c));
        CHECK(config_hash(c).size() == 16);
        auto other = c;
        other.seed = 43;
        CHECK(config_hash(other) != config_hash(c));
    }

    TEST_CASE("seed is mandatory") {
        const std::string text = R"({"experiment": "simulate", "n": 10,
          "model": {"groups": 1, "sequence": {"type": "static", "base": {"type": "point_mass", "location": [0.0]}}}})";
        CHECK_THROWS_AS(parse_config(text), ConfigError);
    }

    TEST_CASE("errors carry the offending line") {
        const std::string growing = R"({
  "experiment": "simulate",
  "n": 100,
  "seed": 1,
  "model": {
    "groups": 1,
    "sequence": {
      "type": "contracted",
      "base": {"type": "uniform_box", "lower": [-1.0], "upper": [1.0]},
      "schedule": {"type": "power_law",
                   "exponents": [-0.2]}
    }
  }
})";
        CHECK(config_error_line(growing) >= 10);
        CHECK(config_error_line(growing) <= 11);
        try {
            build_model(parse_config(growing));
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("eps_n -> 0") != std::string::npos);
        }
        const std::string typo = "{\n  \"experiment\": \"simulate\",\n  \"seed\": 1,\n  \"cuont\": 5\n}";
        try {
            parse_config(typo);
            FAIL("expected a ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.line() == 4);
            CHECK(std::string(e.what()).find("cuont") != std::string::npos);
        }
        try {
            parse_config("{\n\"seed\": 1,\n\"n\": [1,\n}\n");
            FAIL("expected a ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.line() >= 3);
        }
        CHECK_THROWS_AS(parse_config(R"({"experiment": "plot", "seed": 1})"), ConfigError);
    }

    TEST_CASE("every model family builds from json") {
        const auto m = model_from_json(nlohmann::json::parse(R"({
          "groups": {"proportions": [0.5, 0.5]},
          "sequence": {"type": "contracted",
            "base": {"type": "mixture", "components": [
              {"weight": 0.5, "measure": {"type": "gaussian", "mean": [0, 0], "covariance": [[1, 0.2], [0.2, 1]]}},
              {"weight": 0.5, "measure": {"type": "product", "factors": [
                 {"type": "uniform_box", "lower": [-1], "upper": [1]},
                 {"type": "point_masses", "atoms": [{"location": [-1], "weight": 0.5}, {"location": [1], "weight": 0.5}]}]}}]},
            "schedule": {"type": "explicit", "groups": [
              {"regime": "fast", "table": [{"n": 10, "eps": 0.1}, {"n": 100, "eps": 0.01}]},
              {"regime": "critical", "h": 1.0, "table": [{"n": 10, "eps": 0.3}, {"n": 100, "eps": 0.1}]}]}},
          "bias_map": "tanh"})"));
        CHECK(m.dimension() == 2);
        CHECK(m.regime_tags() == std::vector<std::string>{"fast", "critical"});
        const auto cw = model_from_json(nlohmann::json::parse(
            R"({"groups": 2, "sequence": {"type": "curie_weiss", "coupling": [[0.5, 0.2], [0.2, 0.5]]}})"));
        CHECK(cw.bias_map().kind() == BiasMapKind::tanh);
    }
}

TEST_SUITE("ingest") {
    TEST_CASE("raw counts are divided by population") {
        const auto in = ingest_margins_text("population,abs_margin\n100,10\n10000,50\n");
        REQUIRE(in.points.size() == 2);
        CHECK(in.points[0] == std::pair<std::int64_t, double>{100, 0.1});
        CHECK(in.points[1] == std::pair<std::int64_t, double>{10000, 0.005});
    }

    TEST_CASE("rejections and duplicates warn") {
        const auto in = ingest_margins_text("population,margin_per_capita\n100,0.1\n0,0.5\n100,0.1\n-3,1\n1000,0.05\n");
        CHECK(in.points.size() == 2);
        CHECK(in.warnings.size() == 3);
    }

    TEST_CASE("malformed input") {
        CHECK_THROWS_AS(ingest_margins_text(""), DataError);
        CHECK_THROWS_AS(ingest_margins_text("pop,margin\n1,2\n"), DataError);
        try {
            ingest_margins_text("population,abs_margin\n100,x\n200,3\n1e,2\n");
            FAIL("expected a DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("2, 4") != std::string::npos);
        }
        CHECK_THROWS_AS(ingest_margins("/nonexistent/margins.csv"), DataError);
    }
}

TEST_SUITE("experiment") {
    TEST_CASE("two-point alpha from a file") {
        const auto dir = scratch("alpha");
        std::ostringstream csv;
        csv.precision(17);
        csv << "population,margin_per_capita\n100," << std::pow(100.0, -0.2) << "\n10000," << std::pow(1e4, -0.2) << "\n";
        spit(dir / "m.csv", csv.str());
        ExperimentConfig c;
        c.experiment = "estimate-alpha";
        c.seed = 0;
        RunOptions o;
        o.input = (dir / "m.csv").string();
        o.output_dir = (dir / "out").string();
        std::ostringstream log;
        o.log = &log;
        const auto r = run_experiment(c, o);
        CHECK(r.exit_code == 0);
        CHECK(log.str().find("alpha = 0.2000") != std::string::npos);
        CHECK(r.reports.front().observed == doctest::Approx(0.2).epsilon(1e-12));
    }

    TEST_CASE("independent baseline passes and writes traceable artifacts") {
        const auto dir = scratch("clt");
        RunOptions o;
        o.output_dir = (dir / "a").string();
        o.workers = 2;
        const auto a = run_experiment(parse_config(kIndependentClt), o);
        CHECK(a.exit_code == 0);
        for (const auto& r : a.reports) {
            CHECK(r.pass);
            CHECK(r.config_hash == a.config_hash);
        }
        for (const char* f : {"margins.csv", "reports.jsonl", "summary.csv", "manifest.json"}) CHECK(fs::exists(dir / "a" / f));
        const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
        CHECK(manifest["config_hash"] == a.config_hash);
        CHECK(manifest["seed"] == 42);

        o.output_dir = (dir / "b").string();
        const auto b = run_experiment(parse_config(kIndependentClt), o);
        CHECK(slurp(dir / "a" / "margins.csv") == slurp(dir / "b" / "margins.csv"));
        CHECK(slurp(dir / "a" / "reports.jsonl") == slurp(dir / "b" / "reports.jsonl"));
        CHECK(a.config_hash == b.config_hash);

        o.output_dir = (dir / "c").string();
        o.workers = 3;
        const auto c = run_experiment(parse_config(kIndependentClt), o);
        REQUIRE(c.reports.size() == a.reports.size());
        for (std::size_t i = 0; i < a.reports.size(); ++i) CHECK(c.reports[i].observed == a.reports[i].observed);
        CHECK(slurp(dir / "a" / "margins.csv") == slurp(dir / "c" / "margins.csv"));
    }

    TEST_CASE("seed override changes the hash and the sample") {
        const auto dir = scratch("seed");
        RunOptions o;
        o.output_dir = (dir / "a").string();
        const auto a = run_experiment(parse_config(kIndependentClt), o);
        o.seed = 7;
        o.output_dir = (dir / "b").string();
        const auto b = run_experiment(parse_config(kIndependentClt), o);
        CHECK(a.config_hash != b.config_hash);
        CHECK(slurp(dir / "a" / "margins.csv") != slurp(dir / "b" / "margins.csv"));
    }
}

TEST_SUITE("cli") {
    TEST_CASE("exit codes") {
        const auto dir = scratch("cli");
        spit(dir / "ok.json", kIndependentClt);
        CHECK(cli("verify-clt --config " + (dir / "ok.json").string() + " --out " + (dir / "ok").string()) == 0);
        CHECK(cli("simulate --config " + (dir / "ok.json").string()) == 2);

        spit(dir / "decay.json", R"({"experiment": "correlation-decay", "seed": 1, "n_grid": [100, 1000, 10000],
          "model": {"groups": 1, "sequence": {"type": "static", "base": {"type": "uniform_box", "lower": [-1], "upper": [1]}}}})");
        CHECK(cli("correlation-decay --config " + (dir / "decay.json").string() + " --out " + (dir / "decay").string()) == 1);

        spit(dir / "grow.json", R"({"experiment": "simulate", "seed": 1, "n": 100,
          "model": {"groups": 1, "sequence": {"type": "contracted", "base": {"type": "uniform_box", "lower": [-1], "upper": [1]},
            "schedule": {"type": "power_law", "exponents": [-0.3]}}}})");
        const std::string err = (dir / "err.txt").string();
        const int code = std::system((std::string(DFVOTE_CLI_PATH) + " simulate --config " + (dir / "grow.json").string() +
                                      " --out " + (dir / "g").string() + " 2> " + err).c_str());
        CHECK(WEXITSTATUS(code) == 2);
        CHECK(slurp(err).find("eps_n -> 0") != std::string::npos);
        CHECK(slurp(err).find("(line ") != std::string::npos);

        spit(dir / "huge.json", R"({"experiment": "verify-llt", "seed": 1, "n_grid": [100000000],
          "model": {"groups": 1, "sequence": {"type": "static", "base": {"type": "point_mass", "location": [0]}}}})");
        CHECK(cli("verify-llt --config " + (dir / "huge.json").string() + " --out " + (dir / "h").string()) == 3);

        spit(dir / "m.csv", "population,margin_per_capita\n100,0.1\n1000,0.05\n10000,0.025\n");
        CHECK(cli("estimate-alpha --input " + (dir / "m.csv").string() + " --out " + (dir / "alpha").string()) == 0);
        CHECK(cli("estimate-alpha --input " + (dir / "missing.csv").string() + " --out " + (dir / "alpha2").string()) == 2);
    }

    TEST_CASE("estimate-alpha prints the fitted exponent") {
        const auto dir = scratch("cli_alpha");
        std::ostringstream csv;
        csv.precision(17);
        csv << "population,margin_per_capita\n";
        for (double n : {1e3, 1e4, 1e5}) csv << static_cast<std::int64_t>(n) << "," << std::pow(n, -0.15) << "\n";
        spit(dir / "m.csv", csv.str());
        const std::string out = (dir / "stdout.txt").string();
        const int code = std::system((std::string(DFVOTE_CLI_PATH) + " estimate-alpha --input " + (dir / "m.csv").string() +
                                      " --out " + (dir / "o").string() + " > " + out).c_str());
        CHECK(WEXITSTATUS(code) == 0);
        CHECK(slurp(out).find("alpha = 0.1500") != std::string::npos);
    }
}
