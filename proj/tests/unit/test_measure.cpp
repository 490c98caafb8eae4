#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dfvote/errors.hpp"
#include "dfvote/measure.hpp"

using namespace dfvote;

namespace {

BaseMeasure uniform1() { return BaseMeasure::uniform_box({-1.0}, {1.0}); }
BaseMeasure std_normal() { return BaseMeasure::gaussian({0.0}, Eigen::MatrixXd::Identity(1, 1)); }
BaseMeasure two_atoms(double a) { return BaseMeasure::point_masses({{-a}, {a}}, {0.5, 0.5}); }

std::complex<double> cf1(const BaseMeasure& m, double t) { return m.characteristic_function(std::span<const double>(&t, 1)); }

double mass1(const BaseMeasure& m, double a, double b) {
    return m.mass_in_box(std::span<const double>(&a, 1), std::span<const double>(&b, 1));
}

}  // namespace

TEST_SUITE("measure") {
    TEST_CASE("sampling a single atom returns the atom") {
        const auto draws = sample(BaseMeasure::point_mass({0.0}), 1, 5);
        REQUIRE(draws.size() == 5);
        for (const auto& d : draws) CHECK(d[0] == 0.0);
    }

    TEST_CASE("uniform sample mean is within 3 SE of zero") {
        const std::int64_t n = 100000;
        const auto draws = sample(uniform1(), 7, n);
        double s = 0.0;
        for (const auto& d : draws) s += d[0];
        CHECK(std::abs(s / n) < 3.0 * std::sqrt(1.0 / 3.0 / n));
    }

    TEST_CASE("gaussian sample variance is within 3 SE of one") {
        const std::int64_t n = 100000;
        const auto draws = sample(std_normal(), 7, n);
        double s = 0.0, sq = 0.0;
        for (const auto& d : draws) {
            s += d[0];
            sq += d[0] * d[0];
        }
        const double var = sq / n - (s / n) * (s / n);
        CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
    }

    TEST_CASE("sampling is deterministic for a fixed seed") {
        CHECK(sample(uniform1(), 9, 100) == sample(uniform1(), 9, 100));
        CHECK(sample(uniform1(), 9, 100) != sample(uniform1(), 10, 100));
    }

    TEST_CASE("characteristic function examples") {
        CHECK(cf1(BaseMeasure::point_mass({0.0}), 3.7) == std::complex<double>(1.0, 0.0));
        CHECK(cf1(std_normal(), 1.0).real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
        CHECK(cf1(uniform1(), 2.0).real() == doctest::Approx(0.454648713412841).epsilon(1e-14));
        CHECK(std::abs(cf1(uniform1(), 2.0).imag()) < 1e-16);
        const auto shifted = BaseMeasure::uniform_box({0.0}, {1.0});
        for (double t : {0.3, 1.7, -4.0}) {
            const auto a = cf1(shifted, t), b = cf1(shifted, -t);
            CHECK(a.real() == doctest::Approx(b.real()));
            CHECK(a.imag() == doctest::Approx(-b.imag()));
            CHECK(std::abs(a) <= 1.0 + 1e-15);
        }
    }

    TEST_CASE("products and mixtures combine characteristic functions") {
        const auto prod = BaseMeasure::product({uniform1(), two_atoms(1.0)});
        const std::vector<double> t{2.0, 0.5};
        CHECK(prod.characteristic_function(t).real() ==
              doctest::Approx(0.454648713412841 * std::cos(0.5)).epsilon(1e-14));
        const auto mix = BaseMeasure::mixture({std_normal(), BaseMeasure::point_mass({0.0})}, {0.25, 0.75});
        CHECK(cf1(mix, 1.0).real() == doctest::Approx(0.25 * std::exp(-0.5) + 0.75).epsilon(1e-15));
    }

    TEST_CASE("contraction is the componentwise pushforward") {
        const std::vector<double> eps{0.1};
        const auto c1 = uniform1().contracted(eps);
        const auto& box = std::get<UniformBox>(c1.variant());
        CHECK(box.lower[0] == doctest::Approx(-0.1));
        CHECK(box.upper[0] == doctest::Approx(0.1));
        const std::vector<double> e2{0.2};
        const auto c2 = two_atoms(1.0).contracted(e2);
        const auto& atoms = std::get<PointMassMixture>(c2.variant());
        CHECK(atoms.locations[0][0] == doctest::Approx(-0.2));
        CHECK(atoms.locations[1][0] == doctest::Approx(0.2));
        const std::vector<double> e3{0.5};
        const auto c3 = std_normal().contracted(e3);
        const auto& g = std::get<Gaussian>(c3.variant());
        CHECK(g.covariance(0, 0) == doctest::Approx(0.25));
    }

    TEST_CASE("mass in box examples") {
        CHECK(mass1(BaseMeasure::uniform_box({-0.1}, {0.1}), -0.05, 0.05) == doctest::Approx(0.5).epsilon(1e-14));
        for (double e : {1e-9, 0.3, 5.0}) CHECK(mass1(BaseMeasure::point_mass({0.0}), -e, e) == 1.0);
        CHECK(mass1(std_normal(), -1.0, 1.0) == doctest::Approx(0.682689492137086).epsilon(1e-14));
        // atoms on the boundary count fully
        CHECK(mass1(two_atoms(1.0), -1.0, 1.0) == 1.0);
        CHECK(mass1(two_atoms(1.0), 0.0, 1.0) == 0.5);
    }

    TEST_CASE("correlated gaussian box mass matches an independent quadrature") {
        Eigen::MatrixXd cov(2, 2);
        cov << 1.0, 0.6, 0.6, 2.0;
        const auto g = BaseMeasure::gaussian({0.0, 0.0}, cov);
        const std::vector<double> lo{-0.5, -1.0}, hi{1.0, 0.7};
        // Oracle: P = E[ P(Y in [lo, hi] | X) 1{X in [lo, hi]} ] by brute-force midpoint sums.
        const double s1 = 1.0, rho = 0.6 / std::sqrt(2.0), s2 = std::sqrt(2.0);
        double acc = 0.0;
        const int steps = 20000;
        const double h = (hi[0] - lo[0]) / steps;
        for (int i = 0; i < steps; ++i) {
            const double x = lo[0] + (i + 0.5) * h;
            const double mu = rho * s2 / s1 * x, sd = s2 * std::sqrt(1 - rho * rho);
            const double cond = 0.5 * (std::erfc(-(hi[1] - mu) / sd / std::numbers::sqrt2) -
                                       std::erfc(-(lo[1] - mu) / sd / std::numbers::sqrt2));
            acc += h * std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi) * cond;
        }
        CHECK(g.mass_in_box(lo, hi) == doctest::Approx(acc).epsilon(1e-8));
    }

    TEST_CASE("bias maps") {
        const BiasMap tanh_map(BiasMapKind::tanh), clamp(BiasMapKind::clamp_identity);
        CHECK(apply_bias_map(tanh_map, std::vector<double>{0.0})[0] == 0.0);
        CHECK(apply_bias_map(tanh_map, std::vector<double>{0.5})[0] == doctest::Approx(0.462117157260010).epsilon(1e-14));
        const auto c = apply_bias_map(clamp, std::vector<double>{0.3, -2.0});
        CHECK(c[0] == 0.3);
        CHECK(c[1] == -1.0);
        for (const auto& map : {tanh_map, clamp}) {
            double prev = -2.0;
            for (int i = -400; i <= 400; ++i) {
                const double m = i * 0.05;
                const double v = map.apply(m);
                CHECK(v >= prev);
                CHECK(std::abs(v) <= 1.0);
                CHECK(map.apply(-m) == -v);
                prev = v;
            }
            CHECK(map.apply(1e6) == doctest::Approx(1.0));
            CHECK(map.apply(-1e6) == doctest::Approx(-1.0));
        }
        CHECK(BiasMap::parse("tanh") == tanh_map);
        CHECK(BiasMap::parse("clamp") == clamp);
        CHECK_THROWS_AS(BiasMap::parse("sigmoid"), ConfigError);
    }

    TEST_CASE("invalid measures are rejected") {
        CHECK_THROWS_AS(BaseMeasure::uniform_box({1.0}, {1.0}), ConfigError);
        CHECK_THROWS_AS(BaseMeasure::point_masses({{0.0}, {1.0}}, {0.5, 0.6}), ConfigError);
        CHECK_THROWS_AS(BaseMeasure::point_masses({{0.0}}, {-1.0}), ConfigError);
        Eigen::MatrixXd bad(2, 2);
        bad << 1.0, 2.0, 2.0, 1.0;
        CHECK_THROWS_AS(BaseMeasure::gaussian({0.0, 0.0}, bad), ConfigError);
    }

    TEST_CASE("symmetry detection") {
        CHECK(uniform1().is_symmetric());
        CHECK(two_atoms(2.0).is_symmetric());
        CHECK(std_normal().is_symmetric());
        CHECK_FALSE(BaseMeasure::uniform_box({-1.0}, {2.0}).is_symmetric());
        CHECK_FALSE(BaseMeasure::point_masses({{-1.0}, {1.0}}, {0.4, 0.6}).is_symmetric());
    }

    TEST_CASE("schedules classify every group and validate eps_n -> 0") {
        const auto s = ContractionSchedule::power_law({1.0, 2.0, 1.0}, {0.75, 0.5, 0.15});
        CHECK(s.regime(0) == Regime::fast);
        CHECK(s.regime(1) == Regime::critical);
        CHECK(s.critical_constant(1) == 2.0);
        CHECK(s.regime(2) == Regime::subcritical);
        CHECK(s.eps(0, 10000) == doctest::Approx(1e-3));
        try {
            ContractionSchedule::power_law({1.0}, {-0.1});
            FAIL("expected a ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("eps_n -> 0") != std::string::npos);
        }
        ExplicitSequence growing;
        growing.eps_by_size = {{10, 0.1}, {100, 0.2}};
        CHECK_THROWS_AS(ContractionSchedule({GroupSchedule{growing, std::nullopt}}), ConfigError);
        ExplicitSequence crit;
        crit.eps_by_size = {{10, 0.3}};
        crit.regime = Regime::critical;
        CHECK_THROWS_AS(ContractionSchedule({GroupSchedule{crit, std::nullopt}}), ConfigError);
        CHECK(ContractionSchedule({GroupSchedule{crit, 1.0}}).regime(0) == Regime::critical);
    }
}
