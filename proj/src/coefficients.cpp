#include "cbilab/coefficients.hpp"

#include <cmath>

#include "cbilab/quadrature.hpp"

namespace cbilab {

namespace {

constexpr int kNodes = 64;           // Gauss-Legendre order for all unit-interval integrals
constexpr double kCriticalTol = 1e-9;

Eigen::MatrixXd symmetrize(Eigen::MatrixXd M) { return 0.5 * (M + M.transpose()); }

}  // namespace

Eigen::MatrixXd effective_branching(const ValidatedModel& model) {
    const int d = model.d();
    Eigen::MatrixXd Btilde = model.B();
    for (int j = 0; j < d; ++j) {
        const AtomMeasure& mu_j = model.mu()[j];
        if (mu_j.empty()) continue;
        for (int i = 0; i < d; ++i) {
            Btilde(i, j) += mu_j.positive_part_moment(i, i == j ? 1.0 : 0.0);
        }
    }
    return Btilde;
}

Eigen::VectorXd immigration_mean(const ValidatedModel& model) {
    return model.beta() + model.nu().mean(model.d());
}

std::vector<Eigen::MatrixXd> branching_covariances(const ValidatedModel& model) {
    const int d = model.d();
    std::vector<Eigen::MatrixXd> Ck;
    Ck.reserve(d);
    for (int k = 0; k < d; ++k) {
        Eigen::MatrixXd C = model.mu()[k].second_moment(d);
        C(k, k) += 2.0 * model.c()[k];
        Ck.push_back(symmetrize(std::move(C)));
    }
    return Ck;
}

Eigen::MatrixXd aggregate_covariance(const std::vector<Eigen::MatrixXd>& Ck,
                                     const Eigen::VectorXd& u) {
    if (Ck.empty()) throw InvalidArgument("aggregate_covariance: empty C_k list");
    const int d = static_cast<int>(Ck.size());
    if (u.size() != d) throw LengthMismatch("aggregate_covariance: u size does not match C_k count");
    if (std::abs(u.sum() - 1.0) > 1e-8) {
        throw InvalidArgument("aggregate_covariance: u must have coordinate sum 1");
    }
    Eigen::MatrixXd Cbar = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < d; ++k) Cbar += u[k] * Ck[k];
    return symmetrize(std::move(Cbar));
}

Eigen::VectorXd unit_time_drift(const Eigen::MatrixXd& Btilde, const Eigen::VectorXd& betatilde) {
    Eigen::VectorXd out = integrate_gl(
        [&](double s) -> Eigen::VectorXd { return matrix_exp(Btilde, s) * betatilde; }, 0.0, 1.0,
        kNodes);
    if (!out.allFinite()) throw QuadratureFailure("unit_time_drift produced non-finite values");
    // The exact value is componentwise non-negative; shave quadrature round-off.
    return out.cwiseMax(0.0);
}

Eigen::MatrixXd integrated_covariance(const Eigen::MatrixXd& Btilde,
                                      const std::vector<Eigen::MatrixXd>& Ck,
                                      const Eigen::VectorXd& u) {
    const int d = static_cast<int>(Btilde.rows());
    Eigen::EigenSolver<Eigen::MatrixXd> solver(Btilde, false);
    const double s_bound = solver.eigenvalues().real().maxCoeff();
    if (std::abs(s_bound) >= kCriticalTol) {
        throw NotCritical("integrated_covariance requires |s(Btilde)| < 1e-9, got s = " +
                          std::to_string(s_bound));
    }
    Eigen::MatrixXd C = integrate_gl(
        [&](double s) -> Eigen::MatrixXd {
            const Eigen::MatrixXd Es = matrix_exp(Btilde, s);
            const Eigen::VectorXd g = matrix_exp(Btilde, 1.0 - s) * u;
            Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
            for (int k = 0; k < d; ++k) acc += g[k] * (Es * Ck[k] * Es.transpose());
            return acc;
        },
        0.0, 1.0, kNodes);
    if (!C.allFinite()) throw QuadratureFailure("integrated_covariance produced non-finite values");
    return symmetrize(std::move(C));
}

Eigen::MatrixXd noise_matrix_V(const ValidatedModel& model, const Eigen::MatrixXd& Btilde,
                               const Eigen::VectorXd& betatilde,
                               const std::vector<Eigen::MatrixXd>& Ck) {
    const int d = model.d();
    const Eigen::MatrixXd nu_second = model.nu().second_moment(d);
    Eigen::MatrixXd V = integrate_gl(
        [&](double t) -> Eigen::MatrixXd {
            const Eigen::MatrixXd Et = matrix_exp(Btilde, t);
            Eigen::MatrixXd acc = Et * nu_second * Et.transpose();
            // phi(t) = int_0^{1-t} e^{vB~} betatilde dv, all coordinates at once
            Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
            if (1.0 - t > 0.0) {
                phi = integrate_gl(
                    [&](double v) -> Eigen::VectorXd { return matrix_exp(Btilde, v) * betatilde; },
                    0.0, 1.0 - t, kNodes);
            }
            for (int k = 0; k < d; ++k) acc += phi[k] * (Et * Ck[k] * Et.transpose());
            return acc;
        },
        0.0, 1.0, kNodes);
    if (!V.allFinite()) throw QuadratureFailure("noise_matrix_V produced non-finite values");
    return symmetrize(std::move(V));
}

std::pair<double, double> limit_sde_coefficients(const Eigen::VectorXd& betatilde,
                                                 const Eigen::MatrixXd& Cbar,
                                                 const Eigen::VectorXd& v) {
    const double a = v.dot(betatilde);
    const double b = v.dot(Cbar * v);
    return {std::max(0.0, a), std::max(0.0, b)};
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw InvalidArgument("psd_sqrt: matrix must be square");
    if (operator_norm(M - M.transpose()) > 1e-10) {
        throw NotSymmetric("psd_sqrt: input asymmetric beyond 1e-10");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrize(M));
    if (solver.info() != Eigen::Success) throw EigenSolverFailure("psd_sqrt eigendecomposition failed");
    Eigen::VectorXd lambda = solver.eigenvalues();
    for (int i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -1e-8) {
            throw NegativeEigenvalue("psd_sqrt: eigenvalue " + std::to_string(lambda[i]) +
                                     " below -1e-8");
        }
        lambda[i] = std::max(0.0, lambda[i]);
    }
    const Eigen::MatrixXd Q = solver.eigenvectors();
    return symmetrize(Q * lambda.cwiseSqrt().asDiagonal() * Q.transpose());
}

DerivedBundle derive(const ValidatedModel& model) {
    DerivedBundle bundle;
    DerivedCoefficients& co = bundle.coeffs;
    co.Btilde = effective_branching(model);
    co.betatilde = immigration_mean(model);
    co.Ck = branching_covariances(model);
    bundle.spectral = perron(co.Btilde);
    co.Cbar = aggregate_covariance(co.Ck, bundle.spectral.u);
    co.betatilde2 = unit_time_drift(co.Btilde, co.betatilde);
    if (std::abs(bundle.spectral.s) < kCriticalTol) {
        co.Ctilde = integrated_covariance(co.Btilde, co.Ck, bundle.spectral.u);
        bundle.ctilde_valid = true;
    } else {
        co.Ctilde = Eigen::MatrixXd::Zero(model.d(), model.d());
    }
    co.V = noise_matrix_V(model, co.Btilde, co.betatilde, co.Ck);
    std::tie(co.a, co.b) = limit_sde_coefficients(co.betatilde, co.Cbar, bundle.spectral.v);
    return bundle;
}

}  // namespace cbilab
