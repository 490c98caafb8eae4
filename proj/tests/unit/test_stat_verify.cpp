#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "dfvote/errors.hpp"
#include "dfvote/stat_verify.hpp"
#include "models.hpp"

using namespace dfvote;
using namespace dfvote::testing;

namespace {

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double phi_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("stat_verify") {
    TEST_CASE("ks statistic examples") {
        std::vector<double> q;
        for (int i = 1; i <= 1000; ++i) q.push_back(phi_quantile((i - 0.5) / 1000.0));
        CHECK(ks_statistic(q, phi_cdf) <= 0.0005 + 1e-12);
        CHECK(ks_statistic({0.0}, phi_cdf) == doctest::Approx(0.5));
        CHECK(ks_statistic(std::vector<double>(50, 0.0), phi_cdf) == doctest::Approx(0.5));
        CHECK(ks_statistic({-50.0, -60.0}, phi_cdf) == doctest::Approx(1.0));
        CHECK(ks_threshold(100000) == doctest::Approx(1.5 * 1.9495 / std::sqrt(1e5)));
    }

    TEST_CASE("ks statistic handles ties as one step") {
        // F_N jumps 0 -> 1/2 -> 1 at 0 and 1 under a uniform [0, 2] cdf
        const auto unif = [](double x) { return std::clamp(x / 2.0, 0.0, 1.0); };
        CHECK(ks_statistic({0.0, 0.0, 1.0, 1.0}, unif) == doctest::Approx(0.5));
    }

    TEST_CASE("ks statistic is affine equivariant") {
        const auto draws = sample(BaseMeasure::gaussian({0.3}, Eigen::MatrixXd::Constant(1, 1, 1.5)), 4, 2000);
        std::vector<double> x, y;
        for (const auto& d : draws) {
            x.push_back(d[0]);
            y.push_back(3.0 * d[0] - 7.0);
        }
        const double a = ks_statistic(x, phi_cdf);
        const double b = ks_statistic(y, [](double v) { return phi_cdf((v + 7.0) / 3.0); });
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }

    TEST_CASE("ecf distance examples") {
        const auto law = LimitLaw::standard_gaussian(1);
        const auto draws = sample(gaussian(1), 42, 100000);
        std::vector<double> flat;
        for (const auto& d : draws) flat.push_back(d[0]);
        const auto grid = default_cf_grid(1);
        CHECK(grid.size() == 21);
        CHECK(ecf_distance(flat, 1, law, grid) < 0.02);
        const std::vector<double> t0{0.0};
        CHECK(ecf_distance(flat, 1, law, t0) < 1e-15);
        const std::vector<double> atoms(100, 0.0), t2{2.0};
        CHECK(ecf_distance(atoms, 1, law, t2) == doctest::Approx(0.864664716763387).epsilon(1e-14));
        const auto g2 = default_cf_grid(2);
        CHECK(g2.size() == 2 * 42);
    }

    TEST_CASE("factorization discrepancy separates dependent coordinates") {
        std::vector<double> ind, dep;
        for (const auto& d : sample(gaussian(2), 8, 50000)) {
            ind.insert(ind.end(), {d[0], d[1]});
            dep.insert(dep.end(), {d[0], d[0]});
        }
        const std::vector<int> first{0}, second{1};
        CHECK(factorization_discrepancy(ind, 2, first, second) < 0.03);
        CHECK(factorization_discrepancy(dep, 2, first, second) > 0.2);
    }

    TEST_CASE("local limit error") {
        const auto model = static_model(origin(1));
        double prev = 1.0;
        for (std::int64_t n : {100, 1000, 10000}) {
            const double e = llt_sup_error(model, n);
            CHECK(e < prev);
            prev = e;
        }
        CHECK(prev < 0.01);
        const auto prof = llt_profile(exact_margin_pmf(model, 1000));
        CHECK(prof.recovered_mass == doctest::Approx(1.0).epsilon(1e-12));
        const auto fast = contracted_model(uniform(1), 0.75);
        prev = 1.0;
        for (std::int64_t n : {100, 1000, 10000}) {
            const double e = llt_sup_error(fast, n);
            CHECK(e < prev);
            prev = e;
        }
        CHECK(prev < 0.01);
    }

    TEST_CASE("local limit error matches a direct binomial computation") {
        const std::int64_t n = 400;
        double oracle = 0.0;
        for (std::int64_t j = 0; j <= n; ++j) {
            const double x = (2.0 * j - n) / std::sqrt(n);
            const double p = std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) - n * std::log(2.0));
            oracle = std::max(oracle, std::abs(std::sqrt(n) / 2.0 * p - std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi)));
        }
        CHECK(llt_sup_error(static_model(origin(1)), n) == doctest::Approx(oracle).epsilon(1e-10));
    }

    TEST_CASE("two-group local limit mass identity") {
        const auto prof = llt_profile(exact_margin_pmf(contracted_model(gaussian(2), 0.75, 1.0, BiasMap(BiasMapKind::tanh)), 60));
        CHECK(prof.recovered_mass == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("alpha estimation") {
        std::vector<std::pair<std::int64_t, double>> pts;
        for (std::int64_t n : {1000, 10000, 100000, 1000000}) pts.emplace_back(n, std::pow(n, -0.15));
        const auto fit = estimate_alpha(pts);
        CHECK(fit.alpha == doctest::Approx(0.15).epsilon(1e-12));
        CHECK(fit.residual_variance < 1e-25);
        std::vector<std::pair<std::int64_t, double>> sq, scaled;
        for (std::int64_t n : {10, 300, 5000}) {
            sq.emplace_back(n, 3.7 / std::sqrt(n));
            scaled.emplace_back(n, 1e-3 / std::sqrt(n));
        }
        CHECK(estimate_alpha(sq).alpha == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(estimate_alpha(scaled).alpha == doctest::Approx(estimate_alpha(sq).alpha).epsilon(1e-12));
        const std::vector<std::pair<std::int64_t, double>> two{{100, std::pow(100.0, -0.2)}, {10000, std::pow(1e4, -0.2)}};
        CHECK(estimate_alpha(two).alpha == doctest::Approx(0.2).epsilon(1e-12));
        const std::vector<std::pair<std::int64_t, double>> bad{{100, 0.1}, {1000, 0.0}};
        CHECK_THROWS_AS(estimate_alpha(bad), DataError);
        const std::vector<std::pair<std::int64_t, double>> dup{{100, 0.1}, {100, 0.2}};
        CHECK_THROWS_AS(estimate_alpha(dup), DataError);
        const std::vector<std::pair<std::int64_t, double>> one{{100, 0.1}};
        CHECK_THROWS_AS(estimate_alpha(one), DataError);
    }

    TEST_CASE("pearson correlation") {
        const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1};
        CHECK(pearson_correlation(x, y) == doctest::Approx(1.0));
        CHECK(pearson_correlation(x, z) == doctest::Approx(-1.0));
    }

    TEST_CASE("correlation decay reports") {
        const std::vector<std::int64_t> grid{100, 1000, 10000};
        const auto zero = correlation_decay_report(static_model(origin(1)), grid);
        CHECK(zero.pass);
        CHECK(zero.observed == 0.0);
        const auto contracted = correlation_decay_report(contracted_model(uniform(1), 0.5), grid);
        CHECK(contracted.pass);
        CHECK(contracted.observed == doctest::Approx(1.0 / 3e4).epsilon(1e-12));
        const auto values = contracted.details["pair_correlation"];
        CHECK(values[1][0].get<double>() / values[0][0].get<double>() == doctest::Approx(0.1).epsilon(1e-10));
        const auto cbm = correlation_decay_report(static_model(uniform(1)), grid);
        CHECK_FALSE(cbm.pass);
        CHECK(cbm.details["pair_correlation"][2][0].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }

    TEST_CASE("reports serialize to json lines and csv") {
        auto r = make_report("exp", "ks", 0.004, 0.01);
        CHECK(r.pass);
        r.seed = 42;
        r.n_grid = {100};
        auto fail = make_report("exp", "decay", std::numeric_limits<double>::infinity(), 1e-3);
        CHECK_FALSE(fail.pass);
        std::vector<VerificationReport> reports{r, fail};
        std::ostringstream jl, csv;
        write_jsonl(reports, jl);
        std::istringstream in(jl.str());
        std::string line;
        std::getline(in, line);
        const auto j = nlohmann::json::parse(line);
        CHECK(j["experiment_id"] == "exp");
        CHECK(j["pass"] == true);
        CHECK(j["seed"] == 42);
        std::getline(in, line);
        CHECK(nlohmann::json::parse(line)["observed"] == "inf");
        write_summary_csv(reports, csv);
        CHECK(csv.str().rfind("experiment_id,statistic,observed,threshold,pass\n", 0) == 0);
    }
}
