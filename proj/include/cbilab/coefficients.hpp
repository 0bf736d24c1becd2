#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cbilab/model.hpp"
#include "cbilab/spectral.hpp"

namespace cbilab {

/// Every derived quantity of the branching/immigration mechanism:
///   Btilde      effective branching matrix (drift linearization)
///   betatilde   effective immigration mean
///   Ck          per-type branching covariance matrices
///   Cbar        u-weighted aggregate covariance
///   betatilde2  unit-time immigration drift (int_0^1 e^{sB~} ds) betatilde
///   Ctilde      integrated covariance of the unit-time transition
///   V           unit-time immigration noise covariance
///   a, b        drift and squared diffusion coefficient of the scalar limit SDE
struct DerivedCoefficients {
    Eigen::MatrixXd Btilde;
    Eigen::VectorXd betatilde;
    std::vector<Eigen::MatrixXd> Ck;
    Eigen::MatrixXd Cbar;
    Eigen::VectorXd betatilde2;
    Eigen::MatrixXd Ctilde;
    Eigen::MatrixXd V;
    double a = 0.0;
    double b = 0.0;
};

/// Btilde(i,j) = b_{i,j} + int (z_i - delta_{i,j})^+ mu_j(dz); off-diagonals >= 0.
Eigen::MatrixXd effective_branching(const ValidatedModel& model);

/// betatilde = beta + int z nu(dz), componentwise >= 0.
Eigen::VectorXd immigration_mean(const ValidatedModel& model);

/// C_k = 2 c_k e_k e_k^T + int z z^T mu_k(dz); each symmetric PSD.
std::vector<Eigen::MatrixXd> branching_covariances(const ValidatedModel& model);

/// Cbar = sum_k <e_k, u> C_k for the right Perron vector u (sum u_k = 1).
Eigen::MatrixXd aggregate_covariance(const std::vector<Eigen::MatrixXd>& Ck,
                                     const Eigen::VectorXd& u);

/// betatilde2 = (int_0^1 e^{s Btilde} ds) betatilde, by 64-node Gauss-Legendre.
Eigen::VectorXd unit_time_drift(const Eigen::MatrixXd& Btilde, const Eigen::VectorXd& betatilde);

/// Ctilde = sum_k int_0^1 (e_k^T e^{(1-s)B~} u) e^{sB~} C_k e^{sB~^T} ds.
/// Only defined for critical models: throws NotCritical when |s(Btilde)| >= 1e-9.
Eigen::MatrixXd integrated_covariance(const Eigen::MatrixXd& Btilde,
                                      const std::vector<Eigen::MatrixXd>& Ck,
                                      const Eigen::VectorXd& u);

/// V = int_0^1 e^{uB~} (int z z^T nu(dz)) e^{uB~^T} du
///   + sum_k int_0^1 (int_0^{1-u} e_k^T e^{vB~} betatilde dv) e^{uB~} C_k e^{uB~^T} du.
Eigen::MatrixXd noise_matrix_V(const ValidatedModel& model, const Eigen::MatrixXd& Btilde,
                               const Eigen::VectorXd& betatilde,
                               const std::vector<Eigen::MatrixXd>& Ck);

/// (a, b) = (<v, betatilde>, <Cbar v, v>), both non-negative.
std::pair<double, double> limit_sde_coefficients(const Eigen::VectorXd& betatilde,
                                                 const Eigen::MatrixXd& Cbar,
                                                 const Eigen::VectorXd& v);

/// Unique symmetric PSD square root. Eigenvalues in [-1e-8, 0) clamp to 0;
/// below -1e-8 throws NegativeEigenvalue; asymmetry beyond 1e-10 throws.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M);

/// Convenience: all derived quantities for a validated model. Requires an
/// irreducible Btilde; Ctilde is filled only for critical models (zero matrix
/// with `ctilde_valid = false` otherwise).
struct DerivedBundle {
    DerivedCoefficients coeffs;
    SpectralSummary spectral;  // of Btilde
    bool ctilde_valid = false;
};
DerivedBundle derive(const ValidatedModel& model);

}  // namespace cbilab
