#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <optional>

namespace dwabm {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using CMat6 = Eigen::Matrix<std::complex<double>, 6, 6>;
using CVec6 = Eigen::Matrix<std::complex<double>, 6, 1>;

struct EigenSystem {
    Mat6 A;
    Vec6 d;
    Vec6 b;
    Vec6 nu;
    CVec6 lambda;     // ordered by real part, then imaginary part
    CMat6 V;          // columns are eigenvectors with last entry 1
    CVec6 c;          // V c = d
    std::array<double, 4> lam{};  // real parts of lambda_1..4
    std::array<double, 4> ck{};   // real parts of c_1..4
    std::array<double, 4> v1{};   // first entries of v_1..4
    std::array<double, 4> v4{};   // fourth entries of v_1..4
    std::array<double, 4> alpha{};
    std::array<double, 4> beta{};
};

// Built once and cached; the returned reference is shared and immutable.
const EigenSystem& eigen_system();
EigenSystem compute_eigen_system();

struct Phi {
    double phi1;
    double phi2;
};
Phi phi(double y);

double alpha_absorb(double x, double y);
double ruin_formula(double x);
// Probability that the DW-algorithm started with value x reaches level 1.
// Stages 1 and 2 cannot stop, so the chain is entered at (H_1, H_2):
// 1 - E_x[(1 - E(H_1)) 1{H_1 < 1}].
double dw_ruin_probability(double x);

struct TransitionLaw {
    double x;
    double y;
};

double transition_survival(const TransitionLaw& law, double z);
double transition_density(const TransitionLaw& law, double z);
// nullopt means absorbed on the diagonal
std::optional<double> sample_next(const TransitionLaw& law, double u);

double dimension_constant();

// closed forms used as cross-checks
std::array<double, 4> lambda_closed_form();
std::array<std::complex<double>, 2> complex_lambda_closed_form();
Vec6 v1_closed_form();

} // namespace dwabm
