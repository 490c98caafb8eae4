#include "dfvote/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "dfvote/errors.hpp"
#include "dfvote/special.hpp"

namespace dfvote {
namespace {

constexpr double kWeightTol = 1e-12;
// Gaussian quadrature window, in standard deviations (tail mass ~1.5e-23).
constexpr double kGaussWindow = 10.0;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_weights(const std::vector<double>& w, const char* what) {
    if (w.empty()) throw ConfigError(std::string(what) + ": no components");
    double total = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + ": weights must be nonnegative");
        total += v;
    }
    if (std::abs(total - 1.0) > kWeightTol)
        throw ConfigError(std::string(what) + ": weights must sum to 1 (got " + std::to_string(total) + ")");
}

double truncated_normal_mass(double a, double b) {
    if (a >= b) return 0.0;
    // Use the tail that avoids cancellation.
    if (a > 0.0) return normal_cdf(-a) - normal_cdf(-b);
    return normal_cdf(b) - normal_cdf(a);
}

// P(l <= mu + L z <= u) for z ~ N(0, I), by sequential conditioning.
double gaussian_box_mass(const Gaussian& g, std::span<const double> lower, std::span<const double> upper,
                         std::vector<double>& z, std::size_t k) {
    const std::size_t d = g.mean.size();
    double shift = g.mean[k];
    for (std::size_t j = 0; j < k; ++j) shift += g.factor(k, j) * z[j];
    const double lkk = g.factor(k, k);
    const double a = (lower[k] - shift) / lkk;
    const double b = (upper[k] - shift) / lkk;
    if (k + 1 == d) return truncated_normal_mass(a, b);
    const double lo = std::max(a, -12.0);
    const double hi = std::min(b, 12.0);
    if (lo >= hi) return 0.0;
    return integrate_adaptive(
        [&](double v) {
            z[k] = v;
            return normal_pdf(v) * gaussian_box_mass(g, lower, upper, z, k + 1);
        },
        lo, hi, 1e-13, 1e-300, 30);
}

}  // namespace

BaseMeasure::BaseMeasure(Variant v, int dim)
    : data_(std::make_shared<const Variant>(std::move(v))), dim_(dim) {}

BaseMeasure BaseMeasure::point_mass(RealVector location) {
    return point_masses({std::move(location)}, {1.0});
}

BaseMeasure BaseMeasure::point_masses(std::vector<RealVector> locations, std::vector<double> weights) {
    if (locations.size() != weights.size()) throw ConfigError("point masses: locations/weights size mismatch");
    check_weights(weights, "point masses");
    const std::size_t d = locations.front().size();
    if (d == 0) throw ConfigError("point masses: zero-dimensional location");
    for (const auto& x : locations) {
        if (x.size() != d) throw ConfigError("point masses: inconsistent dimensions");
        for (double v : x)
            if (!std::isfinite(v)) throw ConfigError("point masses: non-finite location");
    }
    return {PointMassMixture{std::move(locations), std::move(weights)}, static_cast<int>(d)};
}

BaseMeasure BaseMeasure::uniform_box(RealVector lower, RealVector upper) {
    if (lower.empty() || lower.size() != upper.size()) throw ConfigError("uniform box: bad bounds");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw ConfigError("uniform box: need finite lower < upper in every coordinate");
    const int d = static_cast<int>(lower.size());
    return {UniformBox{std::move(lower), std::move(upper)}, d};
}

BaseMeasure BaseMeasure::gaussian(RealVector mean, Eigen::MatrixXd covariance) {
    const auto d = static_cast<Eigen::Index>(mean.size());
    if (d == 0 || covariance.rows() != d || covariance.cols() != d)
        throw ConfigError("gaussian: covariance shape does not match mean");
    if ((covariance - covariance.transpose()).norm() > 1e-12 * std::max(1.0, covariance.norm()))
        throw ConfigError("gaussian: covariance must be symmetric");
    Gaussian g;
    g.mean = std::move(mean);
    g.covariance = covariance;
    g.diagonal = covariance.isDiagonal(0.0);
    if (g.diagonal) {
        g.factor = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            if (covariance(i, i) < 0.0) throw ConfigError("gaussian: covariance must be positive semi-definite");
            g.factor(i, i) = std::sqrt(covariance(i, i));
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
        if (eig.eigenvalues().minCoeff() < -1e-12)
            throw ConfigError("gaussian: covariance must be positive semi-definite");
        Eigen::LLT<Eigen::MatrixXd> llt(covariance);
        if (llt.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
            throw ConfigError("gaussian: a correlated covariance must be positive definite");
        g.factor = llt.matrixL();
    }
    return {std::move(g), static_cast<int>(d)};
}

BaseMeasure BaseMeasure::product(std::vector<BaseMeasure> factors) {
    if (factors.empty()) throw ConfigError("product: no factors");
    int d = 0;
    for (const auto& f : factors) d += f.dimension();
    return {Product{std::move(factors)}, d};
}

BaseMeasure BaseMeasure::mixture(std::vector<BaseMeasure> components, std::vector<double> weights) {
    if (components.size() != weights.size()) throw ConfigError("mixture: components/weights size mismatch");
    check_weights(weights, "mixture");
    const int d = components.front().dimension();
    for (const auto& c : components)
        if (c.dimension() != d) throw ConfigError("mixture: components differ in dimension");
    return {Mixture{std::move(components), std::move(weights)}, d};
}

bool BaseMeasure::is_atomic() const {
    return std::visit(overloaded{
                          [](const PointMassMixture&) { return true; },
                          [](const UniformBox&) { return false; },
                          [](const Gaussian& g) { return g.diagonal && g.covariance.isZero(0.0); },
                          [](const Product& p) {
                              return std::all_of(p.factors.begin(), p.factors.end(),
                                                 [](const BaseMeasure& f) { return f.is_atomic(); });
                          },
                          [](const Mixture& m) {
                              return std::all_of(m.components.begin(), m.components.end(),
                                                 [](const BaseMeasure& c) { return c.is_atomic(); });
                          },
                      },
                      *data_);
}

bool BaseMeasure::is_symmetric(double tol) const {
    const auto d = static_cast<std::size_t>(dim_);
    std::vector<RealVector> directions;
    for (std::size_t i = 0; i < d; ++i) {
        RealVector e(d, 0.0);
        e[i] = 1.0;
        directions.push_back(e);
    }
    if (d > 1) {
        directions.emplace_back(d, 1.0);
        CounterRng rng(0x5eed, 0);
        for (int k = 0; k < 8; ++k) {
            RealVector v(d);
            for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
            directions.push_back(v);
        }
    }
    RealVector t(d);
    for (const auto& dir : directions) {
        for (int s = 1; s <= 100; ++s) {
            const double scale = 0.1 * s;
            for (std::size_t i = 0; i < d; ++i) t[i] = scale * dir[i];
            if (std::abs(characteristic_function(t).imag()) > tol) return false;
        }
    }
    return true;
}

void BaseMeasure::sample_into(CounterRng& rng, std::span<double> out) const {
    std::visit(overloaded{
                   [&](const PointMassMixture& p) {
                       double u = rng.uniform();
                       std::size_t pick = p.weights.size() - 1;
                       for (std::size_t i = 0; i < p.weights.size(); ++i) {
                           if (u < p.weights[i]) {
                               pick = i;
                               break;
                           }
                           u -= p.weights[i];
                       }
                       std::copy(p.locations[pick].begin(), p.locations[pick].end(), out.begin());
                   },
                   [&](const UniformBox& b) {
                       for (std::size_t i = 0; i < b.lower.size(); ++i)
                           out[i] = b.lower[i] + (b.upper[i] - b.lower[i]) * rng.uniform();
                   },
                   [&](const Gaussian& g) {
                       std::normal_distribution<double> normal;
                       const std::size_t d = g.mean.size();
                       RealVector z(d);
                       for (auto& v : z) v = normal(rng);
                       for (std::size_t i = 0; i < d; ++i) {
                           double x = g.mean[i];
                           for (std::size_t j = 0; j <= i; ++j) x += g.factor(i, j) * z[j];
                           out[i] = x;
                       }
                   },
                   [&](const Product& p) {
                       std::size_t offset = 0;
                       for (const auto& f : p.factors) {
                           const auto fd = static_cast<std::size_t>(f.dimension());
                           f.sample_into(rng, out.subspan(offset, fd));
                           offset += fd;
                       }
                   },
                   [&](const Mixture& m) {
                       double u = rng.uniform();
                       std::size_t pick = m.weights.size() - 1;
                       for (std::size_t i = 0; i < m.weights.size(); ++i) {
                           if (u < m.weights[i]) {
                               pick = i;
                               break;
                           }
                           u -= m.weights[i];
                       }
                       m.components[pick].sample_into(rng, out);
                   },
               },
               *data_);
}

std::complex<double> BaseMeasure::characteristic_function(std::span<const double> t) const {
    using cd = std::complex<double>;
    return std::visit(
        overloaded{
            [&](const PointMassMixture& p) {
                cd sum = 0.0;
                for (std::size_t a = 0; a < p.weights.size(); ++a) {
                    double phase = 0.0;
                    for (std::size_t i = 0; i < t.size(); ++i) phase += t[i] * p.locations[a][i];
                    sum += p.weights[a] * cd(std::cos(phase), std::sin(phase));
                }
                return sum;
            },
            [&](const UniformBox& b) {
                cd value = 1.0;
                for (std::size_t i = 0; i < t.size(); ++i) {
                    const double c = 0.5 * (b.lower[i] + b.upper[i]);
                    const double h = 0.5 * (b.upper[i] - b.lower[i]);
                    const double th = t[i] * h;
                    const double sinc = th == 0.0 ? 1.0 : std::sin(th) / th;
                    value *= (c == 0.0 ? cd(1.0, 0.0) : cd(std::cos(t[i] * c), std::sin(t[i] * c))) * sinc;
                }
                return value;
            },
            [&](const Gaussian& g) {
                const auto d = g.mean.size();
                double phase = 0.0, quad = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    phase += t[i] * g.mean[i];
                    for (std::size_t j = 0; j < d; ++j) quad += t[i] * g.covariance(i, j) * t[j];
                }
                const double mod = std::exp(-0.5 * quad);
                return phase == 0.0 ? cd(mod, 0.0) : mod * cd(std::cos(phase), std::sin(phase));
            },
            [&](const Product& p) {
                cd value = 1.0;
                std::size_t offset = 0;
                for (const auto& f : p.factors) {
                    const auto fd = static_cast<std::size_t>(f.dimension());
                    value *= f.characteristic_function(t.subspan(offset, fd));
                    offset += fd;
                }
                return value;
            },
            [&](const Mixture& m) {
                cd sum = 0.0;
                for (std::size_t i = 0; i < m.weights.size(); ++i)
                    sum += m.weights[i] * m.components[i].characteristic_function(t);
                return sum;
            },
        },
        *data_);
}

BaseMeasure BaseMeasure::contracted(std::span<const double> eps) const {
    if (static_cast<int>(eps.size()) != dim_) throw ConfigError("contract: eps dimension mismatch");
    for (double e : eps)
        if (!(e > 0.0)) throw ConfigError("contract: eps must be componentwise positive");
    return std::visit(
        overloaded{
            [&](const PointMassMixture& p) {
                auto locs = p.locations;
                for (auto& x : locs)
                    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= eps[i];
                return point_masses(std::move(locs), p.weights);
            },
            [&](const UniformBox& b) {
                RealVector lo = b.lower, hi = b.upper;
                for (std::size_t i = 0; i < lo.size(); ++i) {
                    lo[i] *= eps[i];
                    hi[i] *= eps[i];
                }
                return uniform_box(std::move(lo), std::move(hi));
            },
            [&](const Gaussian& g) {
                RealVector mean = g.mean;
                Eigen::MatrixXd cov = g.covariance;
                for (std::size_t i = 0; i < mean.size(); ++i) {
                    mean[i] *= eps[i];
                    for (std::size_t j = 0; j < mean.size(); ++j) cov(i, j) *= eps[i] * eps[j];
                }
                return gaussian(std::move(mean), std::move(cov));
            },
            [&](const Product& p) {
                std::vector<BaseMeasure> factors;
                std::size_t offset = 0;
                for (const auto& f : p.factors) {
                    const auto fd = static_cast<std::size_t>(f.dimension());
                    factors.push_back(f.contracted(eps.subspan(offset, fd)));
                    offset += fd;
                }
                return product(std::move(factors));
            },
            [&](const Mixture& m) {
                std::vector<BaseMeasure> comps;
                for (const auto& c : m.components) comps.push_back(c.contracted(eps));
                return mixture(std::move(comps), m.weights);
            },
        },
        *data_);
}

double BaseMeasure::mass_in_box(std::span<const double> lower, std::span<const double> upper) const {
    return std::visit(
        overloaded{
            [&](const PointMassMixture& p) {
                double mass = 0.0;
                for (std::size_t a = 0; a < p.weights.size(); ++a) {
                    bool inside = true;
                    for (std::size_t i = 0; i < lower.size() && inside; ++i)
                        inside = p.locations[a][i] >= lower[i] && p.locations[a][i] <= upper[i];
                    if (inside) mass += p.weights[a];
                }
                return mass;
            },
            [&](const UniformBox& b) {
                double mass = 1.0;
                for (std::size_t i = 0; i < lower.size(); ++i) {
                    const double lo = std::max(lower[i], b.lower[i]);
                    const double hi = std::min(upper[i], b.upper[i]);
                    mass *= hi > lo ? (hi - lo) / (b.upper[i] - b.lower[i]) : 0.0;
                }
                return mass;
            },
            [&](const Gaussian& g) {
                if (g.diagonal) {
                    double mass = 1.0;
                    for (std::size_t i = 0; i < lower.size(); ++i) {
                        const double s = g.factor(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
                        if (s == 0.0) {
                            mass *= (g.mean[i] >= lower[i] && g.mean[i] <= upper[i]) ? 1.0 : 0.0;
                        } else {
                            mass *= truncated_normal_mass((lower[i] - g.mean[i]) / s, (upper[i] - g.mean[i]) / s);
                        }
                    }
                    return mass;
                }
                std::vector<double> z(g.mean.size(), 0.0);
                return gaussian_box_mass(g, lower, upper, z, 0);
            },
            [&](const Product& p) {
                double mass = 1.0;
                std::size_t offset = 0;
                for (const auto& f : p.factors) {
                    const auto fd = static_cast<std::size_t>(f.dimension());
                    mass *= f.mass_in_box(lower.subspan(offset, fd), upper.subspan(offset, fd));
                    offset += fd;
                }
                return mass;
            },
            [&](const Mixture& m) {
                double mass = 0.0;
                for (std::size_t i = 0; i < m.weights.size(); ++i)
                    mass += m.weights[i] * m.components[i].mass_in_box(lower, upper);
                return mass;
            },
        },
        *data_);
}

BaseMeasure BaseMeasure::marginal(std::span<const int> coords) const {
    if (coords.empty()) throw ConfigError("marginal: no coordinates selected");
    for (std::size_t i = 0; i < coords.size(); ++i)
        if (coords[i] < 0 || coords[i] >= dim_ || (i > 0 && coords[i] <= coords[i - 1]))
            throw ConfigError("marginal: coordinates must be ascending and in range");
    return std::visit(
        overloaded{
            [&](const PointMassMixture& p) {
                std::vector<RealVector> locs;
                for (const auto& x : p.locations) {
                    RealVector y;
                    for (int c : coords) y.push_back(x[static_cast<std::size_t>(c)]);
                    locs.push_back(std::move(y));
                }
                return point_masses(std::move(locs), p.weights);
            },
            [&](const UniformBox& b) {
                RealVector lo, hi;
                for (int c : coords) {
                    lo.push_back(b.lower[static_cast<std::size_t>(c)]);
                    hi.push_back(b.upper[static_cast<std::size_t>(c)]);
                }
                return uniform_box(std::move(lo), std::move(hi));
            },
            [&](const Gaussian& g) {
                const auto k = static_cast<Eigen::Index>(coords.size());
                RealVector mean;
                Eigen::MatrixXd cov(k, k);
                for (Eigen::Index i = 0; i < k; ++i) {
                    mean.push_back(g.mean[static_cast<std::size_t>(coords[static_cast<std::size_t>(i)])]);
                    for (Eigen::Index j = 0; j < k; ++j)
                        cov(i, j) = g.covariance(coords[static_cast<std::size_t>(i)], coords[static_cast<std::size_t>(j)]);
                }
                return gaussian(std::move(mean), std::move(cov));
            },
            [&](const Product& p) {
                std::vector<BaseMeasure> factors;
                int offset = 0;
                for (const auto& f : p.factors) {
                    std::vector<int> local;
                    for (int c : coords)
                        if (c >= offset && c < offset + f.dimension()) local.push_back(c - offset);
                    if (!local.empty()) factors.push_back(f.marginal(local));
                    offset += f.dimension();
                }
                return factors.size() == 1 ? factors.front() : product(std::move(factors));
            },
            [&](const Mixture& m) {
                std::vector<BaseMeasure> comps;
                for (const auto& c : m.components) comps.push_back(c.marginal(coords));
                return mixture(std::move(comps), m.weights);
            },
        },
        *data_);
}

QuadratureRule BaseMeasure::quadrature_rule(int order, std::span<const double> breakpoints) const {
    return std::visit(
        overloaded{
            [&](const PointMassMixture& p) {
                QuadratureRule rule;
                rule.dim = dim_;
                rule.exact = true;
                for (std::size_t a = 0; a < p.weights.size(); ++a) rule.add(p.locations[a], p.weights[a]);
                return rule;
            },
            [&](const UniformBox& b) {
                std::vector<QuadratureRule> axes;
                for (std::size_t i = 0; i < b.lower.size(); ++i)
                    axes.push_back(interval_rule(b.lower[i], b.upper[i], order, breakpoints,
                                                 1.0 / (b.upper[i] - b.lower[i])));
                auto rule = tensor_product(axes);
                rule.exact = false;
                return rule;
            },
            [&](const Gaussian& g) {
                const auto d = g.mean.size();
                if (g.diagonal) {
                    std::vector<QuadratureRule> axes;
                    bool all_atoms = true;
                    for (std::size_t i = 0; i < d; ++i) {
                        const double s = g.factor(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
                        const double mu = g.mean[i];
                        if (s == 0.0) {
                            QuadratureRule atom;
                            atom.dim = 1;
                            atom.exact = true;
                            atom.add(std::span<const double>(&mu, 1), 1.0);
                            axes.push_back(std::move(atom));
                            continue;
                        }
                        all_atoms = false;
                        auto axis = interval_rule(mu - kGaussWindow * s, mu + kGaussWindow * s, order, breakpoints);
                        for (std::size_t q = 0; q < axis.size(); ++q)
                            axis.weights[q] *= normal_pdf((axis.points[q] - mu) / s) / s;
                        axes.push_back(std::move(axis));
                    }
                    auto rule = tensor_product(axes);
                    rule.exact = all_atoms;
                    return rule;
                }
                std::vector<QuadratureRule> axes;
                for (std::size_t i = 0; i < d; ++i) {
                    auto axis = interval_rule(-kGaussWindow, kGaussWindow, order, {});
                    for (std::size_t q = 0; q < axis.size(); ++q) axis.weights[q] *= normal_pdf(axis.points[q]);
                    axes.push_back(std::move(axis));
                }
                auto zrule = tensor_product(axes);
                QuadratureRule rule;
                rule.dim = dim_;
                RealVector x(d);
                for (std::size_t q = 0; q < zrule.size(); ++q) {
                    auto z = zrule.point(q);
                    for (std::size_t i = 0; i < d; ++i) {
                        x[i] = g.mean[i];
                        for (std::size_t j = 0; j <= i; ++j)
                            x[i] += g.factor(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
                    }
                    rule.add(x, zrule.weights[q]);
                }
                return rule;
            },
            [&](const Product& p) {
                std::vector<QuadratureRule> rules;
                for (const auto& f : p.factors) rules.push_back(f.quadrature_rule(order, breakpoints));
                return tensor_product(rules);
            },
            [&](const Mixture& m) {
                QuadratureRule rule;
                rule.dim = dim_;
                rule.exact = true;
                for (std::size_t c = 0; c < m.weights.size(); ++c) {
                    auto part = m.components[c].quadrature_rule(order, breakpoints);
                    rule.exact = rule.exact && part.exact;
                    for (std::size_t q = 0; q < part.size(); ++q) rule.add(part.point(q), m.weights[c] * part.weights[q]);
                }
                return rule;
            },
        },
        *data_);
}

std::string BaseMeasure::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const PointMassMixture& p) { os << "atoms(" << p.weights.size() << ")"; },
                   [&](const UniformBox& b) {
                       os << "uniform[";
                       for (std::size_t i = 0; i < b.lower.size(); ++i)
                           os << (i ? "x" : "") << b.lower[i] << "," << b.upper[i];
                       os << "]";
                   },
                   [&](const Gaussian& g) { os << "gaussian(d=" << g.mean.size() << ")"; },
                   [&](const Product& p) {
                       os << "product(";
                       for (std::size_t i = 0; i < p.factors.size(); ++i) os << (i ? "," : "") << p.factors[i].describe();
                       os << ")";
                   },
                   [&](const Mixture& m) { os << "mixture(" << m.weights.size() << ")"; },
               },
               *data_);
    return os.str();
}

std::vector<RealVector> sample(const BaseMeasure& measure, std::uint64_t seed, std::int64_t count) {
    if (count < 1) throw ConfigError("sample: count must be at least 1");
    CounterRng rng(seed, 0);
    std::vector<RealVector> out(static_cast<std::size_t>(count), RealVector(static_cast<std::size_t>(measure.dimension())));
    for (auto& x : out) measure.sample_into(rng, x);
    return out;
}

std::complex<double> characteristic_function(const BaseMeasure& measure, std::span<const double> t) {
    return measure.characteristic_function(t);
}

BaseMeasure contract(const BaseMeasure& measure, std::span<const double> eps) {
    return measure.contracted(eps);
}

double mass_in_box(const BaseMeasure& measure, std::span<const double> lower, std::span<const double> upper) {
    return measure.mass_in_box(lower, upper);
}

// --- bias maps -------------------------------------------------------------

double BiasMap::apply(double m) const {
    if (kind_ == BiasMapKind::tanh) return std::tanh(m);
    return std::clamp(m, -1.0, 1.0);
}

void BiasMap::apply(std::span<const double> m, std::span<double> out) const {
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = apply(m[i]);
}

std::span<const double> BiasMap::breakpoints() const {
    static constexpr double kClampKinks[] = {-1.0, 1.0};
    if (kind_ == BiasMapKind::clamp_identity) return kClampKinks;
    return {};
}

std::string BiasMap::name() const { return kind_ == BiasMapKind::tanh ? "tanh" : "clamp"; }

BiasMap BiasMap::parse(const std::string& name) {
    if (name == "tanh") return BiasMap(BiasMapKind::tanh);
    if (name == "clamp" || name == "clamp_identity") return BiasMap(BiasMapKind::clamp_identity);
    throw ConfigError("unknown bias map '" + name + "' (expected tanh or clamp)");
}

RealVector apply_bias_map(const BiasMap& map, std::span<const double> m) {
    RealVector out(m.size());
    map.apply(m, out);
    return out;
}

// --- schedules -------------------------------------------------------------

std::string to_string(Regime r) {
    switch (r) {
        case Regime::fast: return "fast";
        case Regime::critical: return "critical";
        case Regime::subcritical: return "subcritical";
    }
    return "?";
}

Regime parse_regime(const std::string& s) {
    if (s == "fast") return Regime::fast;
    if (s == "critical") return Regime::critical;
    if (s == "subcritical") return Regime::subcritical;
    throw ConfigError("unknown regime '" + s + "'");
}

ContractionSchedule::ContractionSchedule(std::vector<GroupSchedule> groups) : groups_(std::move(groups)) {
    if (groups_.empty()) throw ConfigError("schedule: no groups");
    for (std::size_t l = 0; l < groups_.size(); ++l) {
        const auto& g = groups_[l];
        const std::string where = "schedule group " + std::to_string(l) + ": ";
        if (const auto* p = std::get_if<PowerLaw>(&g.rule)) {
            if (!(p->coefficient > 0.0)) throw ConfigError(where + "coefficient must be > 0 (eps_n > 0)");
            if (!(p->exponent > 0.0))
                throw ConfigError(where + "exponent must be > 0 so that eps_n -> 0 as n grows");
        } else {
            const auto& e = std::get<ExplicitSequence>(g.rule);
            if (e.eps_by_size.empty()) throw ConfigError(where + "explicit sequence is empty");
            double previous = std::numeric_limits<double>::infinity();
            for (const auto& [size, eps] : e.eps_by_size) {
                if (!(eps > 0.0)) throw ConfigError(where + "eps values must be > 0");
                if (!(eps < previous))
                    throw ConfigError(where + "eps must decrease strictly with n so that eps_n -> 0 (violated at n=" +
                                      std::to_string(size) + ")");
                previous = eps;
            }
            if (e.regime == Regime::critical && !g.critical_constant)
                throw ConfigError(where + "critical explicit sequence needs a critical constant h");
        }
        if (g.critical_constant && !(*g.critical_constant > 0.0))
            throw ConfigError(where + "critical constant h must be > 0");
    }
}

ContractionSchedule ContractionSchedule::power_law(std::vector<double> coefficients, std::vector<double> exponents) {
    if (coefficients.size() != exponents.size()) throw ConfigError("schedule: coefficient/exponent count mismatch");
    std::vector<GroupSchedule> groups;
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        groups.push_back({PowerLaw{coefficients[i], exponents[i]}, std::nullopt});
    return ContractionSchedule(std::move(groups));
}

double ContractionSchedule::eps(int group, std::int64_t group_size) const {
    const auto& g = groups_.at(static_cast<std::size_t>(group));
    if (const auto* p = std::get_if<PowerLaw>(&g.rule))
        return p->coefficient * std::pow(static_cast<double>(group_size), -p->exponent);
    const auto& table = std::get<ExplicitSequence>(g.rule).eps_by_size;
    const auto it = table.find(group_size);
    if (it == table.end())
        throw ConfigError("schedule group " + std::to_string(group) + ": no tabulated eps for group size " +
                          std::to_string(group_size));
    return it->second;
}

RealVector ContractionSchedule::eps(std::span<const std::int64_t> group_sizes) const {
    if (static_cast<int>(group_sizes.size()) != group_count())
        throw ConfigError("schedule: group count does not match model");
    RealVector out;
    for (int l = 0; l < group_count(); ++l) out.push_back(eps(l, group_sizes[static_cast<std::size_t>(l)]));
    return out;
}

Regime ContractionSchedule::regime(int group) const {
    const auto& g = groups_.at(static_cast<std::size_t>(group));
    if (const auto* p = std::get_if<PowerLaw>(&g.rule)) {
        if (p->exponent > 0.5) return Regime::fast;
        if (p->exponent == 0.5) return Regime::critical;
        return Regime::subcritical;
    }
    return std::get<ExplicitSequence>(g.rule).regime;
}

double ContractionSchedule::critical_constant(int group) const {
    const auto& g = groups_.at(static_cast<std::size_t>(group));
    if (g.critical_constant) return *g.critical_constant;
    if (const auto* p = std::get_if<PowerLaw>(&g.rule)) return p->coefficient;
    return 1.0;
}

}  // namespace dfvote
