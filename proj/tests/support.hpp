#pragma once

// Shared test oracles and fixture builders. Everything here is independent of
// the library code paths it is used to check: matrix exponentials come from a
// truncated Taylor series or a closed form, integrals from dense trapezoid
// rules.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "cbilab/model.hpp"
#include "cbilab/rng.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
    return std::string(CBILAB_FIXTURE_DIR) + "/" + name;
}

// e^{tA} oracle: scale until the Taylor series converges in a few terms,
// run 30 terms, square back.
inline Eigen::MatrixXd taylor_matrix_exp(const Eigen::MatrixXd& A, double t) {
    const int d = static_cast<int>(A.rows());
    int squarings = 0;
    double scale = A.norm() * std::abs(t);
    while (scale > 1.0 / 64.0) {
        scale *= 0.5;
        ++squarings;
    }
    const Eigen::MatrixXd As = A * (t / std::pow(2.0, squarings));
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(d, d);
    for (int j = 1; j <= 30; ++j) {
        term = (term * As) / j;
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

// The symmetric mixing matrix [[-1,1],[1,-1]] has eigenvalues 0 and -2, so
// e^{tA} = Pi + e^{-2t}(I - Pi) with Pi = [[.5,.5],[.5,.5]] in closed form.
inline Eigen::MatrixXd mixing_matrix() {
    Eigen::MatrixXd A(2, 2);
    A << -1.0, 1.0, 1.0, -1.0;
    return A;
}

inline Eigen::MatrixXd mixing_exp(double t) {
    Eigen::MatrixXd Pi = Eigen::MatrixXd::Constant(2, 2, 0.5);
    return Pi + std::exp(-2.0 * t) * (Eigen::MatrixXd::Identity(2, 2) - Pi);
}

template <typename F>
auto trapezoid(F&& f, double a, double b, int panels) {
    using Result = std::decay_t<decltype(f(a))>;
    Result acc = 0.5 * (f(a) + f(b));
    const double h = (b - a) / panels;
    for (int i = 1; i < panels; ++i) acc += f(a + i * h);
    return Result(h * acc);
}

// The reference two-type model used throughout: mixing matrix drift,
// Brownian branching c = (1/2, 1/2), immigration beta = (1, 0) plus a joint
// jump atom (1,1) at rate 1/2. Derived values: u = (1/2,1/2), v = (1,1),
// betatilde = (3/2, 1/2), Cbar = I/2, a = 2, b = 1.
inline cbilab::ModelSpec reference_spec() {
    cbilab::ModelSpec s;
    s.d = 2;
    s.c = Eigen::VectorXd::Constant(2, 0.5);
    s.beta = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    s.B = mixing_matrix();
    s.nu.atoms.push_back({(Eigen::VectorXd(2) << 1.0, 1.0).finished(), 0.5});
    s.mu.assign(2, cbilab::AtomMeasure{});
    s.x0_mean = Eigen::VectorXd::Zero(2);
    return s;
}

// Same geometry with zero branching noise: b = 0, a = 2.
inline cbilab::ModelSpec no_diffusion_spec() {
    cbilab::ModelSpec s = reference_spec();
    s.c = Eigen::VectorXd::Zero(2);
    return s;
}

// d = 1 critical fixture: branching drift cancels the jump excess.
inline cbilab::ModelSpec single_type_spec() {
    cbilab::ModelSpec s;
    s.d = 1;
    s.c = Eigen::VectorXd::Constant(1, 0.3);
    s.beta = Eigen::VectorXd::Constant(1, 0.5);
    s.B = Eigen::MatrixXd::Constant(1, 1, -0.5);
    s.nu.atoms.push_back({Eigen::VectorXd::Constant(1, 1.0), 0.5});
    s.mu.assign(1, cbilab::AtomMeasure{});
    s.mu[0].atoms.push_back({Eigen::VectorXd::Constant(1, 2.0), 0.5});
    s.x0_mean = Eigen::VectorXd::Zero(1);
    return s;
}

inline cbilab::ModelSpec zero_spec(int d = 1) {
    cbilab::ModelSpec s;
    s.d = d;
    s.c = Eigen::VectorXd::Zero(d);
    s.beta = Eigen::VectorXd::Zero(d);
    s.B = Eigen::MatrixXd::Zero(d, d);
    s.mu.assign(d, cbilab::AtomMeasure{});
    s.x0_mean = Eigen::VectorXd::Zero(d);
    return s;
}

// Random admissible spec with strictly positive mixing (hence irreducible
// Btilde), then the diagonal of B is shifted so that s(Btilde) = 0.
cbilab::ModelSpec random_critical_spec(int d, cbilab::Rng& rng);

// Random essentially non-negative matrix; roughly half the draws get a block
// upper-triangular sparsity pattern, which makes them reducible.
Eigen::MatrixXd random_essentially_nonneg(int d, cbilab::Rng& rng);

}  // namespace testsupport
