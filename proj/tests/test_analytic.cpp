#include "doctest.h"

#include "dwabm/analytic.hpp"
#include "dwabm/markov_sim.hpp"
#include "dwabm/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace dwabm;
using boost::math::quadrature::gauss_kronrod;

namespace {

double integrate(const auto& f, double a, double b)
{
    return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// sign-free relative agreement to d significant digits
bool same_digits(double a, double b, int d)
{
    return std::abs(a - b) <= 0.5 * std::pow(10.0, -d + 1) * std::abs(b);
}

} // namespace

TEST_CASE("eigenvalues match their closed forms")
{
    const auto& s = eigen_system();
    const auto lc = lambda_closed_form();
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(s.lambda(k) - std::complex<double>(lc[k], 0)) <= 1e-10);
    }
    const auto cc = complex_lambda_closed_form();
    CHECK(std::abs(s.lambda(4) - cc[0]) <= 1e-10);
    CHECK(std::abs(s.lambda(5) - cc[1]) <= 1e-10);
    CHECK(std::abs(s.lam[0] - 0.157764) <= 1e-5);
}

TEST_CASE("eigenvectors and linear solves have small residuals")
{
    const auto& s = eigen_system();
    const CMat6 A = s.A.cast<std::complex<double>>();
    for (int k = 0; k < 6; ++k) {
        const CVec6 r = A * s.V.col(k) - s.lambda(k) * s.V.col(k);
        CHECK(r.cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(std::abs(s.V(5, k) - 1.0) <= 1e-15);
    }
    const CVec6 rc = s.V * s.c - s.d.cast<std::complex<double>>();
    CHECK(rc.cwiseAbs().maxCoeff() <= 1e-10);
    const Vec6 rn = s.A * s.nu + s.b;
    CHECK(rn.cwiseAbs().maxCoeff() == 0.0);

    const Vec6 v1 = v1_closed_form();
    for (int j = 0; j < 6; ++j) CHECK(std::abs(s.V(j, 0) - v1(j)) <= 1e-9 * std::abs(v1(j)));
}

TEST_CASE("eigenvector table to four decimals")
{
    const double table[6][4] = {
        {126.09952, 0.52922, 0.36088, 0.010381}, {19.89401, 0.79016, 1.26557, 0.050266},
        {3.13856, 1.17975, 4.43828, 0.243402},   {40.17745, 0.44859, 0.08131, 0.042649},
        {6.33857, 0.66977, 0.28515, 0.206516},   {1, 1, 1, 1}};
    const auto& s = eigen_system();
    for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 4; ++k) {
            CAPTURE(j);
            CAPTURE(k);
            CHECK(std::abs(s.V(j, k).imag()) <= 1e-12);
            CHECK(std::abs(s.V(j, k).real() - table[j][k]) <= 5e-5);
        }
}

TEST_CASE("coefficients c, alpha and beta")
{
    const auto& s = eigen_system();
    const double numc[4] = {-0.00546374, -0.230522, -0.427837, -3.33618};
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(s.c(k).imag()) <= 1e-12);
        CHECK(same_digits(s.c(k).real(), numc[k], 5));
    }
    CHECK(std::abs(s.c(4)) <= 1e-8);
    CHECK(std::abs(s.c(5)) <= 1e-8);
    for (double b : s.beta) CHECK(std::abs(b) <= 1e-8);
    double sum = 0;
    for (double a : s.alpha) sum += a;
    CHECK(std::abs(sum - 1) <= 1e-8);
    CHECK(std::abs(s.alpha[0] - 0.938911) <= 1e-5);
    CHECK(std::abs(s.alpha[1] - 0.037177) <= 1e-5);
    CHECK(std::abs(s.alpha[2] - 0.239215) <= 1e-5);
    CHECK(std::abs(s.alpha[3] + 0.215302) <= 1e-5);
}

TEST_CASE("phi boundary values and derivatives at 1")
{
    const auto p = phi(1.0);
    CHECK(std::abs(p.phi1) <= 1e-8);
    CHECK(std::abs(p.phi2) <= 1e-8);

    // one-sided differences; phi is only defined up to 1
    const double h = 1e-6;
    const double d1 =
        (3 * phi(1).phi1 - 4 * phi(1 - h).phi1 + phi(1 - 2 * h).phi1) / (2 * h);
    CHECK(std::abs(d1 + 1) <= 1e-4);
    const double d2p =
        (3 * phi(1).phi2 - 4 * phi(1 - h).phi2 + phi(1 - 2 * h).phi2) / (2 * h);
    CHECK(std::abs(d2p + 1) <= 1e-4);
    const double g = 1e-3;
    const double dd2 = (2 * phi(1).phi2 - 5 * phi(1 - g).phi2 + 4 * phi(1 - 2 * g).phi2 -
                        phi(1 - 3 * g).phi2) /
                       (g * g);
    CHECK(std::abs(dd2 - 1) <= 1e-3);
    const double dd1 = (2 * phi(1).phi1 - 5 * phi(1 - g).phi1 + 4 * phi(1 - 2 * g).phi1 -
                        phi(1 - 3 * g).phi1) /
                       (g * g);
    CHECK(std::abs(dd1) <= 1e-3);

    CHECK_THROWS_AS(phi(0.0), std::domain_error);
    CHECK_THROWS_AS(phi(1.5), std::domain_error);
}

TEST_CASE("phi agrees with its defining integrals")
{
    for (double y : {0.05, 0.3, 0.7, 0.95}) {
        const auto p = phi(y);
        const double i1 = integrate([&](double z) { return alpha_absorb(y, z) / (z * z); }, y, 1);
        const double i2 =
            integrate([&](double z) { return alpha_absorb(y, z) / (z * z * z); }, y, 1);
        CAPTURE(y);
        CHECK(std::abs(p.phi1 - i1) <= 1e-8 * std::max(1.0, std::abs(i1)));
        CHECK(std::abs(p.phi2 - i2) <= 1e-8 * std::max(1.0, std::abs(i2)));
    }
}

TEST_CASE("alpha on the diagonal and at the top")
{
    for (double x : {0.01, 0.2, 0.5, 0.9, 0.999}) {
        CHECK(std::abs(alpha_absorb(x, x) - 1) <= 1e-12);
        CHECK(std::abs(alpha_absorb(x, 1.0) - x * x) <= 1e-8);
    }
    CHECK_THROWS_AS(alpha_absorb(0.6, 0.3), std::domain_error);
    CHECK_THROWS_AS(alpha_absorb(0.0, 0.3), std::domain_error);
}

TEST_CASE("alpha solves its integral equation")
{
    auto residual = [](double x, double y) {
        const double rhs =
            (x / y) * (x / y) +
            integrate(
                [&](double z) { return transition_density({x, y}, z) * alpha_absorb(y, z); },
                y, 1);
        return std::abs(alpha_absorb(x, y) - rhs);
    };
    CHECK(residual(0.3, 0.6) <= 1e-6);
    CounterRng rng(99);
    for (int i = 0; i < 20; ++i) {
        double x = rng.uniform(), y = rng.uniform();
        if (x > y) std::swap(x, y);
        CAPTURE(x);
        CAPTURE(y);
        CHECK(residual(x, y) <= 1e-6);
    }
}

TEST_CASE("alpha is a probability and decreases in y")
{
    int bad_range = 0, bad_mono = 0;
    for (int i = 1; i <= 100; ++i) {
        const double x = i / 101.0;
        double prev = 2;
        for (int j = 0; j < 100; ++j) {
            const double y = x + (1 - x) * j / 99.0;
            const double a = alpha_absorb(x, y);
            bad_range += a < -1e-12 || a > 1 + 1e-12;
            bad_mono += a > prev + 1e-12;
            prev = a;
        }
    }
    CHECK(bad_range == 0);
    CHECK(bad_mono == 0);
}

TEST_CASE("ruin formula against its integral representation")
{
    for (double x : {0.1, 0.5, 0.9}) {
        const double q = integrate(
            [&](double y) { return 2 * (1 - x / y) * (x / (y * y)) * alpha_absorb(x, y); }, x,
            1);
        CAPTURE(x);
        CHECK(std::abs(ruin_formula(x) - (1 - q)) <= 1e-8);
    }
    const auto& s = eigen_system();
    const double x = 1e-6;
    CHECK(std::abs(ruin_formula(x) / (s.alpha[0] * std::pow(x, s.lam[0])) - 1) <= 1e-3);
    CHECK(std::abs(ruin_formula(1.0) - 1) <= 1e-8);
    CHECK_THROWS_AS(ruin_formula(0.0), std::domain_error);
}

TEST_CASE("algorithm ruin probability against quadrature and a sampled oracle")
{
    // closed form against direct quadrature of 1 - E over the law of H1
    for (double x : {0.1, 0.3, 0.5, 0.9}) {
        const double q = integrate(
            [&](double y) { return 2 * (1 - x / y) * (x / (y * y)) * (1 - ruin_formula(y)); },
            x, 1);
        CAPTURE(x);
        CHECK(std::abs(dw_ruin_probability(x) - (1 - q)) <= 1e-10);
        CHECK(dw_ruin_probability(x) >= ruin_formula(x));
    }
    CHECK(std::abs(dw_ruin_probability(1.0) - 1) <= 1e-12);

    // H1 and H2 by inversion of P{H <= y} = (1 - x/y)^2, then the chain
    const double x0 = 0.3;
    const std::size_t n = 100000;
    std::size_t win = 0;
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(2024, i);
        const double h1 = x0 / (1 - std::sqrt(rng.uniform()));
        if (h1 >= 1) {
            ++win;
            continue;
        }
        const double h2 = h1 / (1 - std::sqrt(rng.uniform()));
        ChainState st = chain_start(h1, h2);
        while (st.status == ChainStatus::running) st = step_chain(st, rng);
        win += st.status == ChainStatus::reached_S;
    }
    const double p = static_cast<double>(win) / n;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(p - dw_ruin_probability(x0)) <= 3 * se);
}

TEST_CASE("transition survival and density")
{
    const TransitionLaw law{0.3, 0.6};
    const double r = 0.5;
    CHECK(std::abs(transition_survival(law, 0.6) - (1 - r * r)) <= 1e-15);
    const double mass = integrate([&](double z) { return transition_density(law, z); }, 0.6,
                                  std::numeric_limits<double>::infinity());
    CHECK(std::abs(mass - (1 - r * r)) <= 1e-10);
    const double h = 1e-5, z = 1.2;
    const double fd = (transition_survival(law, z + h) - transition_survival(law, z - h)) / (2 * h);
    CHECK(std::abs(fd + transition_density(law, z)) <= 1e-6);
    CHECK_THROWS_AS(transition_survival(law, 0.5), std::domain_error);
}

TEST_CASE("sampler inverts the survival function")
{
    const TransitionLaw law{0.3, 0.6};
    CHECK_FALSE(sample_next(law, 0.25 - 1e-9).has_value());
    CHECK_FALSE(sample_next({0.4, 0.4}, 0.999).has_value());
    CounterRng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double u = 0.25 + 0.75 * rng.uniform();
        const auto z = sample_next(law, u);
        REQUIRE(z.has_value());
        CHECK(*z >= 0.6);
        CHECK(std::abs(transition_survival(law, *z) - (1 - u)) <= 1e-12);
    }
}

TEST_CASE("sampled law matches the survival function (KS)")
{
    const TransitionLaw law{0.3, 0.6};
    CounterRng rng(77);
    std::vector<double> z;
    const int n = 100000;
    int absorbed = 0;
    for (int i = 0; i < n; ++i) {
        const auto s = sample_next(law, rng.uniform());
        if (s)
            z.push_back(*s);
        else
            ++absorbed;
    }
    const double p = absorbed / double(n);
    CHECK(std::abs(p - 0.25) <= 3 * std::sqrt(0.25 * 0.75 / n));

    // unconditional CDF with the atom placed at y: F(t) = 1 - S(t) for t > y
    std::sort(z.begin(), z.end());
    double ks = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double F = 1 - transition_survival(law, z[i]);
        const double lo = (absorbed + double(i)) / n, hi = (absorbed + double(i) + 1) / n;
        ks = std::max({ks, std::abs(F - lo), std::abs(F - hi)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("dimension constant")
{
    const double d = dimension_constant();
    CHECK(std::abs(d - 1.421) <= 1e-3);
    CHECK(std::abs(d - 1.4211178) <= 1e-7);
    CHECK(std::abs(d - 0.25 * (1 + std::sqrt(13 + 4 * std::sqrt(5.0)))) <= 1e-12);
    CHECK(std::abs(3 - 2 * d - eigen_system().lam[0]) <= 1e-15);
}
