#include "dwabm/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dwabm {

namespace {

void check_domain(bool ok, const char* what)
{
    if (!ok) throw std::domain_error(what);
}

} // namespace

std::array<double, 4> lambda_closed_form()
{
    const double s5 = std::sqrt(5.0);
    const double a = std::sqrt(13 + 4 * s5), b = std::sqrt(13 - 4 * s5);
    return {(5 - a) / 2, (5 - b) / 2, (5 + b) / 2, (5 + a) / 2};
}

std::array<std::complex<double>, 2> complex_lambda_closed_form()
{
    const double s7 = std::sqrt(7.0);
    return {std::complex<double>(2.5, -s7 / 2), std::complex<double>(2.5, s7 / 2)};
}

Vec6 v1_closed_form()
{
    const double s5 = std::sqrt(5.0);
    const double r = std::sqrt(13 + 4 * s5);
    const double x1 = -5 + r, x2 = 7 + 2 * s5 + r;
    Vec6 v;
    v << 4 * (3 + s5) * (5 + r) / (x1 * x1 * x2), 32 / (x1 * x1 * x2), -16 / (x1 * x2),
        4 / (x1 * x1), -2 / x1, 1;
    return v;
}

EigenSystem compute_eigen_system()
{
    EigenSystem s;
    s.A << 0, 1, 0, 0, 0, 0,
           0, 0, 1, 0, 0, 0,
           0, -9, 6, 4, 0, 0,
           0, 0, 0, 0, 1, 0,
           0, 0, 0, 0, 0, 1,
           -8, 2, 0, 28, -26, 9;
    s.d << -1, -1, -3, -0.5, -1, -4;
    s.b << 0, 0, -2, 0, 0, -6;
    s.nu << 1, 0, 0, 0.5, 0, 0;

    Eigen::EigenSolver<Mat6> es(s.A);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigen-solver failed");
    CVec6 lam = es.eigenvalues();
    CMat6 vec = es.eigenvectors();

    // polish each eigenpair by inverse iteration in complex arithmetic
    const CMat6 Ac = s.A.cast<std::complex<double>>();
    for (int k = 0; k < 6; ++k) {
        CVec6 x = vec.col(k);
        std::complex<double> l = lam(k);
        for (int it = 0; it < 3; ++it) {
            CMat6 B = Ac - (l + std::complex<double>(1e-13, 0)) * CMat6::Identity();
            CVec6 y = B.partialPivLu().solve(x);
            x = y / y(5);
            const CVec6 Ax = Ac * x;
            l = Ax(5) / x(5);
        }
        lam(k) = l;
        vec.col(k) = x / x(5);
    }

    std::array<int, 6> order;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        if (lam(i).real() != lam(j).real()) {
            // the complex pair shares a real part; keep them adjacent at the end
            const bool ci = std::abs(lam(i).imag()) > 1e-9, cj = std::abs(lam(j).imag()) > 1e-9;
            if (ci != cj) return cj;
            return lam(i).real() < lam(j).real();
        }
        return lam(i).imag() < lam(j).imag();
    });
    for (int k = 0; k < 6; ++k) {
        s.lambda(k) = lam(order[k]);
        s.V.col(k) = vec.col(order[k]);
    }
    s.c = s.V.partialPivLu().solve(s.d.cast<std::complex<double>>());

    for (int k = 0; k < 4; ++k) {
        s.lam[k] = s.lambda(k).real();
        s.ck[k] = s.c(k).real();
        s.v1[k] = s.V(0, k).real();
        s.v4[k] = s.V(3, k).real();
    }
    double b1 = 0, b2 = 0, b3 = 0, b4 = 0;
    for (int k = 0; k < 4; ++k) {
        const double l = s.lam[k], c = s.ck[k], v1 = s.v1[k], v4 = s.v4[k];
        s.alpha[k] = c * (4 * (v1 - v4) / (l - 1) - 4 * (2 * v1 - 3 * v4) / (l - 2) -
                          4 * (3 * v4 - v1) / (l - 3) + 4 * v4 / (l - 4));
        b1 += c * (v1 - v4) / (l - 1);
        b2 += c * (2 * v1 - 3 * v4) / (l - 2);
        b3 += c * (3 * v4 - v1) / (l - 3);
        b4 += c * v4 / (l - 4);
    }
    s.beta = {2 - 4 * b1, -1 + 4 * b2, 4 * b3, -4 * b4};
    return s;
}

const EigenSystem& eigen_system()
{
    static const EigenSystem sys = compute_eigen_system();
    return sys;
}

Phi phi(double y)
{
    check_domain(y > 0 && y <= 1, "phi needs 0 < y <= 1");
    const auto& s = eigen_system();
    double p1 = 1 / y, p2 = 1 / (2 * y * y);
    for (int k = 0; k < 4; ++k) {
        p1 += s.ck[k] * std::pow(y, s.lam[k] - 1) * s.v1[k];
        p2 += s.ck[k] * std::pow(y, s.lam[k] - 2) * s.v4[k];
    }
    return {p1, p2};
}

double alpha_absorb(double x, double y)
{
    check_domain(x > 0 && x <= y && y <= 1, "alpha needs 0 < x <= y <= 1");
    const auto p = phi(y);
    const double r = x / y;
    return r * r + 2 * (y - x) * p.phi1 - 2 * (y - x) * (y - x) * p.phi2;
}

double ruin_formula(double x)
{
    check_domain(x > 0 && x <= 1, "E needs 0 < x <= 1");
    const auto& s = eigen_system();
    double e = 0;
    for (int k = 0; k < 4; ++k) e += s.alpha[k] * std::pow(x, s.lam[k]);
    return e;
}

double dw_ruin_probability(double x)
{
    check_domain(x > 0 && x <= 1, "ruin needs 0 < x <= 1");
    // 1 - int_x^1 2 (1 - x/y) x/y^2 (1 - E(y)) dy, termwise
    const auto& s = eigen_system();
    double fail = (1 - x) * (1 - x);
    for (int k = 0; k < 4; ++k) {
        const double l = s.lam[k];
        const double i1 = (1 - std::pow(x, l - 1)) / (l - 1);
        const double i2 = (1 - std::pow(x, l - 2)) / (l - 2);
        fail -= s.alpha[k] * 2 * x * (i1 - x * i2);
    }
    return 1 - fail;
}

double transition_survival(const TransitionLaw& law, double z)
{
    const double x = law.x, y = law.y;
    check_domain(x > 0 && x <= y && z >= y, "survival needs 0 < x <= y <= z");
    const double q = 1 - x / y;
    return (2 * y / z - y * y / (z * z)) * q * q + (2 * x / z) * q;
}

double transition_density(const TransitionLaw& law, double z)
{
    const double x = law.x, y = law.y;
    check_domain(x > 0 && x <= y && z >= y, "density needs 0 < x <= y <= z");
    return 2 * (y - x) / (z * z) - 2 * (x - y) * (x - y) / (z * z * z);
}

std::optional<double> sample_next(const TransitionLaw& law, double u)
{
    const double x = law.x, y = law.y;
    check_domain(x > 0 && x <= y, "sample_next needs 0 < x <= y");
    const double r = x / y;
    if (u < r * r) return std::nullopt;
    // Given survival, 1 - u is uniform on (0, S(y)]. With w = 1/z,
    // S(z) = A w - B w^2; take the root on the branch w <= 1/y.
    const double s = 1 - u;
    const double q = 1 - r;
    const double A = 2 * y * q * q + 2 * x * q;
    const double B = y * y * q * q;
    const double disc = std::max(0.0, A * A - 4 * B * s);
    const double w = 2 * s / (A + std::sqrt(disc));
    return 1 / w;
}

double dimension_constant() { return (3 - eigen_system().lam[0]) / 2; }

} // namespace dwabm
