#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "dfvote/quadrature.hpp"
#include "dfvote/rng.hpp"
#include "dfvote/special.hpp"

using namespace dfvote;

TEST_SUITE("rng") {
    TEST_CASE("philox block matches the Random123 known answer for zero key and counter") {
        const auto out = CounterRng::block({0, 0, 0, 0}, {0, 0});
        CHECK(out[0] == 0x16554d9eca36314cULL);
        CHECK(out[1] == 0xdb20fe9d672d0fdcULL);
        CHECK(out[2] == 0xd7e772cee186176bULL);
        CHECK(out[3] == 0x7e68b68aec7ba23bULL);
    }

    TEST_CASE("philox block matches the Random123 known answer for all-ones input") {
        const std::uint64_t f = ~0ULL;
        const auto out = CounterRng::block({f, f, f, f}, {f, f});
        CHECK(out[0] == 0x87b092c3013fe90bULL);
        CHECK(out[1] == 0x438c3c67be8d0224ULL);
        CHECK(out[2] == 0x9cc7d7c69cd777b6ULL);
        CHECK(out[3] == 0xa09caebf594f0ba0ULL);
    }

    TEST_CASE("streams are deterministic and distinct") {
        CounterRng a(7, 0), b(7, 0), c(7, 1), d(8, 0);
        std::set<std::uint64_t> firsts;
        for (int i = 0; i < 100; ++i) {
            const auto va = a();
            CHECK(va == b());
            firsts.insert(va);
        }
        CHECK(firsts.size() == 100);
        CHECK(CounterRng(7, 1)() == c());
        CHECK(CounterRng(7, 0)() != CounterRng(7, 1)());
        CHECK(CounterRng(7, 0)() != d());
    }

    TEST_CASE("uniform doubles lie in [0, 1) with mean near one half") {
        CounterRng rng(3, 0);
        double sum = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double u = rng.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            sum += u;
        }
        CHECK(std::abs(sum / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
    }

    TEST_CASE("mix_seed separates indices") {
        CHECK(mix_seed(1, 0) != mix_seed(1, 1));
        CHECK(mix_seed(1, 0) == mix_seed(1, 0));
    }
}

TEST_SUITE("quadrature") {
    TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
        for (int order : {1, 2, 5, 16, 64}) {
            const int deg = 2 * order - 1;
            const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
            const double got = integrate_gl([&](double x) { return std::pow(x, deg); }, -1.0, 1.0, order);
            CHECK(got == doctest::Approx(exact).epsilon(1e-13));
            const double even = integrate_gl([&](double x) { return std::pow(x, deg - 1); }, -1.0, 1.0, order);
            CHECK(even == doctest::Approx(2.0 / deg).epsilon(1e-13));
        }
        const auto t = gauss_legendre(128);
        double w = 0.0;
        for (double v : t->weights) w += v;
        CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    }

    TEST_CASE("adaptive integration of the normal density") {
        const double m = integrate_adaptive(normal_pdf, -1.0, 1.0);
        CHECK(m == doctest::Approx(0.682689492137086).epsilon(1e-13));
        CHECK(normal_cdf(1.0) - normal_cdf(-1.0) == doctest::Approx(0.682689492137086).epsilon(1e-14));
    }

    TEST_CASE("box integration matches a separable product") {
        std::vector<double> lo{0.0, -1.0}, hi{1.0, 2.0};
        const double v = integrate_box_adaptive(
            [](std::span<const double> x) { return std::exp(x[0]) * x[1] * x[1]; }, lo, hi);
        CHECK(v == doctest::Approx((std::exp(1.0) - 1.0) * 3.0).epsilon(1e-12));
    }

    TEST_CASE("interval rules split at breakpoints") {
        const std::vector<double> bp{-1.0, 1.0};
        const auto rule = interval_rule(-2.0, 2.0, 8, bp);
        CHECK(rule.size() == 24);
        double total = 0.0, clipped = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            total += rule.weights[q];
            clipped += rule.weights[q] * std::clamp(rule.points[q], -1.0, 1.0) * rule.points[q];
        }
        CHECK(total == doctest::Approx(4.0).epsilon(1e-14));
        // integral of x * clamp(x) over [-2, 2] = 2/3 + 2 * 3/2
        CHECK(clipped == doctest::Approx(2.0 / 3.0 + 3.0).epsilon(1e-13));
    }

    TEST_CASE("tensor product multiplies weights") {
        const auto a = interval_rule(0.0, 1.0, 4, {});
        const auto b = interval_rule(0.0, 2.0, 3, {});
        const auto t = tensor_product({a, b});
        CHECK(t.dim == 2);
        CHECK(t.size() == 12);
        double s = 0.0;
        for (std::size_t q = 0; q < t.size(); ++q) s += t.weights[q] * t.point(q)[0] * t.point(q)[1];
        CHECK(s == doctest::Approx(0.5 * 2.0).epsilon(1e-14));
    }
}

TEST_SUITE("special") {
    TEST_CASE("binomial rows sum to one and are mirror symmetric at p = 1/2") {
        const auto coeffs = log_binomial_row(31);
        std::vector<double> row(32);
        binomial_pmf_row(31, 0.5, 0.5, coeffs, row);
        double s = 0.0;
        for (double v : row) s += v;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
        for (int k = 0; k <= 31; ++k) CHECK(row[static_cast<std::size_t>(k)] == doctest::Approx(row[static_cast<std::size_t>(31 - k)]).epsilon(1e-13));
        binomial_pmf_row(5, 0.0, 1.0, log_binomial_row(5), std::span<double>(row.data(), 6));
        CHECK(row[0] == 1.0);
    }

    TEST_CASE("log_cosh is even and accurate for large arguments") {
        for (double x : {0.0, 0.3, 5.0, 400.0}) {
            CHECK(log_cosh(x) == log_cosh(-x));
            if (x < 300) CHECK(log_cosh(x) == doctest::Approx(std::log(std::cosh(x))).epsilon(1e-14));
        }
        CHECK(log_cosh(400.0) == doctest::Approx(400.0 - std::numbers::ln2).epsilon(1e-15));
    }

    TEST_CASE("line fit recovers an exact line") {
        std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
        const auto f = fit_line(x, y);
        CHECK(f.slope == doctest::Approx(2.0));
        CHECK(f.intercept == doctest::Approx(1.0));
        CHECK(f.residual_variance == doctest::Approx(0.0).epsilon(1e-20));
        CHECK(f.r2 == doctest::Approx(1.0));
    }
}
