#include <cmath>
#include <map>
#include <numbers>

#include "doctest.h"
#include "dfvote/errors.hpp"
#include "dfvote/voting_model.hpp"
#include "models.hpp"

using namespace dfvote;
using namespace dfvote::testing;

TEST_SUITE("voting_model") {
    TEST_CASE("conditional margin pmf examples") {
        const std::vector<double> half{0.5}, zero{0.0}, one{1.0};
        CHECK(conditional_margin_pmf(half, GroupSizes{{4}}).at(2) == doctest::Approx(27.0 / 64.0).epsilon(1e-15));
        CHECK(conditional_margin_pmf(zero, GroupSizes{{2}}).at(0) == 0.5);
        CHECK(conditional_margin_pmf(one, GroupSizes{{10}}).at(10) == 1.0);
        const auto p = conditional_margin_pmf(half, GroupSizes{{4}});
        CHECK(p.at(1) == 0.0);
        CHECK(p.at(6) == 0.0);
        CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("conditional pmf matches configuration enumeration") {
        // Independent oracle: walk all 2^n spin configurations.
        const std::vector<double> m{0.3, -0.7};
        const GroupSizes sizes{{3, 4}};
        std::map<std::pair<int, int>, double> oracle;
        for (int mask = 0; mask < (1 << 7); ++mask) {
            int s1 = 0, s2 = 0;
            double p = 1.0;
            for (int i = 0; i < 7; ++i) {
                const int x = (mask >> i) & 1 ? 1 : -1;
                const double mi = i < 3 ? m[0] : m[1];
                p *= (1.0 + x * mi) / 2.0;
                (i < 3 ? s1 : s2) += x;
            }
            oracle[{s1, s2}] += p;
        }
        const auto pmf = conditional_margin_pmf(m, sizes);
        for (const auto& [k, v] : oracle) {
            const std::vector<std::int64_t> kk{k.first, k.second};
            CHECK(pmf.at(kk) == doctest::Approx(v).epsilon(1e-13));
        }
    }

    TEST_CASE("exact margin pmf examples") {
        const auto fair = exact_margin_pmf(static_model(origin(1)), 2);
        CHECK(fair.at(-2) == 0.25);
        CHECK(fair.at(0) == 0.5);
        CHECK(fair.at(2) == 0.25);
        const auto unanimous = exact_margin_pmf(static_model(two_atom(1)), 3);
        CHECK(unanimous.at(-3) == 0.5);
        CHECK(unanimous.at(3) == 0.5);
        CHECK(unanimous.at(1) == 0.0);

        ExplicitSequence table;
        table.eps_by_size = {{4, 0.1}};
        table.regime = Regime::subcritical;
        const DeFinettiModel model(GroupStructure::single(),
                                   ContractedSequence{uniform(1), ContractionSchedule({GroupSchedule{table, std::nullopt}})},
                                   BiasMap(BiasMapKind::clamp_identity));
        // k = 0 has probability E[3 (1 - m^2)^2 / 8] for m ~ U[-0.1, 0.1].
        const double oracle = 3.0 / 8.0 * (1.0 - 2.0 * 0.01 / 3.0 + 1e-4 / 5.0);
        CHECK(exact_margin_pmf(model, 4).at(0) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(brute_force_pmf(model, 4).at(0) == doctest::Approx(oracle).epsilon(1e-12));
    }

    TEST_CASE("brute force examples") {
        const auto p = brute_force_pmf(static_model(origin(1)), 4);
        const double expect[] = {1, 4, 6, 4, 1};
        for (int j = 0; j <= 4; ++j) CHECK(p.at(2 * j - 4) == doctest::Approx(expect[j] / 16.0).epsilon(1e-15));
        CHECK_THROWS_AS(brute_force_pmf(static_model(origin(1)), 21), ResourceError);
    }

    TEST_CASE("brute force agrees with exact pmf, symmetry and totality across the model matrix") {
        for (const auto& [name, model] : model_matrix()) {
            CAPTURE(name);
            const std::int64_t max_n = model.dimension() == 1 ? 12 : 8;
            for (std::int64_t n = 2 * model.dimension(); n <= max_n; n += 3) {
                CAPTURE(n);
                const auto exact = exact_margin_pmf(model, n);
                const auto brute = brute_force_pmf(model, n);
                CHECK(exact.max_abs_difference(brute) < 1e-10);
                CHECK(exact.symmetry_defect() < 1e-10);
                CHECK(brute.symmetry_defect() < 1e-10);
                CHECK(exact.total() == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("atomic models are symmetric to rounding") {
        for (std::int64_t n = 2; n <= 20; ++n) CHECK(exact_margin_pmf(static_model(two_atom(1, 0.3)), n).symmetry_defect() < 1e-15);
    }

    TEST_CASE("lattice guard") {
        CHECK_THROWS_AS(exact_margin_pmf(static_model(origin(2)), 20000000), ResourceError);
    }

    TEST_CASE("sampled margins are deterministic, on the lattice and normalized") {
        const auto model = static_model(origin(1));
        const auto a = sample_margins(model, 100, 100000, 42);
        const auto b = sample_margins(model, 100, 100000, 42);
        CHECK(a.raw == b.raw);
        CHECK(a.normalized == b.normalized);
        double s = 0.0, sq = 0.0;
        for (std::int64_t i = 0; i < a.count; ++i) {
            const auto k = a.raw_at(i, 0);
            CHECK(std::abs(k) <= 100);
            CHECK((k + 100) % 2 == 0);
            const double v = a.normalized_at(i, 0);
            s += v;
            sq += v * v;
        }
        const double mean = s / a.count, var = sq / a.count - mean * mean;
        CHECK(std::abs(mean) < 3.0 / std::sqrt(a.count));
        // Var of a sample variance is about (mu4 - 1) / count with mu4 ~ 3 - 2/n.
        CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt((2.0 - 2.0 / 100) / a.count));
        CHECK(a.gamma[0] == 10.0);
    }

    TEST_CASE("normalization by regime") {
        const auto sub = contracted_model(uniform(1), 0.15);
        const auto sizes = sub.sizes(1000000);
        CHECK(sub.normalization(sizes)[0] == doctest::Approx(std::pow(1e6, 0.85)).epsilon(1e-12));
        CHECK(contracted_model(uniform(1), 0.75).normalization(sizes)[0] == 1000.0);
        CHECK(contracted_model(uniform(1), 0.5).normalization(sizes)[0] == 1000.0);
        CHECK(static_model(origin(1)).normalization(sizes)[0] == 1000.0);
        CHECK(static_model(uniform(1)).normalization(sizes)[0] == 1e6);
        CHECK(contracted_model(uniform(1), 0.15).regime_tags() == std::vector<std::string>{"subcritical"});
    }

    TEST_CASE("sample margin parity holds for odd group sizes") {
        const auto model = contracted_model(gaussian(2), 0.5, 1.0, BiasMap(BiasMapKind::tanh));
        const auto s = sample_margins(model, 15, 20000, 3);
        for (std::int64_t i = 0; i < s.count; ++i)
            for (int l = 0; l < 2; ++l) {
                const auto nl = s.sizes[l];
                CHECK(std::abs(s.raw_at(i, l)) <= nl);
                CHECK(((s.raw_at(i, l) + nl) % 2 + 2) % 2 == 0);
            }
    }

    TEST_CASE("empirical pmf matches the exact pmf for small n") {
        const std::int64_t count = 1000000;
        for (const auto& [name, model] :
             {NamedModel{"uniform critical", contracted_model(uniform(1), 0.5)},
              NamedModel{"two-atom static", static_model(two_atom(1, 0.6))},
              NamedModel{"gaussian tanh 2D", contracted_model(gaussian(2), 0.15, 1.0, BiasMap(BiasMapKind::tanh))}}) {
            CAPTURE(name);
            const std::int64_t n = model.dimension() == 1 ? 14 : 8;
            const auto exact = exact_margin_pmf(model, n);
            const auto s = sample_margins(model, n, count, 11);
            std::map<MarginVector, double> counts;
            for (std::int64_t i = 0; i < count; ++i) {
                MarginVector k(static_cast<std::size_t>(model.dimension()));
                for (int l = 0; l < model.dimension(); ++l) k[static_cast<std::size_t>(l)] = s.raw_at(i, l);
                counts[k] += 1.0;
            }
            exact.for_each([&](const MarginVector& k, double p) {
                const double emp = counts.count(k) ? counts[k] / count : 0.0;
                CHECK(std::abs(emp - p) <= 4.0 * std::sqrt(p * (1 - p) / count) + 1e-12);
            });
        }
    }

    TEST_CASE("expected absolute margin") {
        CHECK(expected_abs_margin(static_model(origin(1)), 2, EstimateMode::exact).values[0] == 0.5);
        for (std::int64_t n : {3, 10, 1000})
            CHECK(expected_abs_margin(static_model(two_atom(1)), n, EstimateMode::exact).values[0] == 1.0);
        const auto mc = expected_abs_margin(static_model(origin(1)), 10000, EstimateMode::monte_carlo, 1000000, 5);
        // E|S|/n ~ sqrt(2/pi)/sqrt(n) up to the lattice correction of order 1/n^1.5
        CHECK(std::abs(mc.values[0] - 0.00797884560802865) < 3.0 * mc.standard_errors[0]);
        CHECK(mc.standard_errors[0] > 0.0);
    }

    TEST_CASE("pair correlation") {
        CHECK(pair_correlation(static_model(origin(1)), 500)[0] == 0.0);
        const auto model = contracted_model(uniform(1), 0.5);
        CHECK(pair_correlation(model, 10000)[0] == doctest::Approx(1.0 / 3e4).epsilon(1e-12));
        double prev = 1.0;
        for (std::int64_t n : {100, 1000, 10000}) {
            const double v = pair_correlation(model, n)[0];
            CHECK(v < prev);
            CHECK(v >= 0.0);
            prev = v;
        }
        // tanh map: E tanh(Z)^2 for Z ~ N(0, 1/4) by a midpoint sum.
        double oracle = 0.0;
        for (int i = -40000; i < 40000; ++i) {
            const double z = (i + 0.5) * 2.5e-4;
            oracle += 2.5e-4 * std::pow(std::tanh(z), 2) * std::exp(-2.0 * z * z) * std::sqrt(2.0 / std::numbers::pi);
        }
        const auto t = contracted_model(gaussian(1), 0.5, 1.0, BiasMap(BiasMapKind::tanh));
        CHECK(pair_correlation(t, 4)[0] == doctest::Approx(oracle).epsilon(1e-9));
    }

    TEST_CASE("group resolver") {
        const GroupStructure g({0.5, 0.3, 0.2});
        for (std::int64_t n : {6, 7, 10, 11, 99, 1000003}) {
            const auto s = g.resolve(n);
            CHECK(s.total() == n);
            for (auto v : s.sizes) CHECK(v >= 2);
        }
        CHECK(g.resolve(10).sizes == std::vector<std::int64_t>{5, 3, 2});
        CHECK_THROWS_AS(g.resolve(5), ConfigError);
        CHECK_THROWS_AS(GroupStructure({0.5, 0.6}), ConfigError);
    }

    TEST_CASE("model validation") {
        CHECK_THROWS_AS(static_model(BaseMeasure::uniform_box({-1.0}, {2.0})), ConfigError);
        CHECK_THROWS_AS(DeFinettiModel(GroupStructure::equal(2), StaticSequence{uniform(1)}, BiasMap()), ConfigError);
        CHECK_THROWS_AS(DeFinettiModel(GroupStructure::single(), CurieWeissSequence{CouplingSpec::single_group(0.5)},
                                       BiasMap(BiasMapKind::clamp_identity)),
                        ConfigError);
    }
}
