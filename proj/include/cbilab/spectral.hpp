#pragma once

#include <Eigen/Dense>

#include "cbilab/errors.hpp"

namespace cbilab {

/// Perron data of an irreducible essentially non-negative matrix A:
/// spectral bound s, Perron pair (u, v), projection Pi = u v^T, and the
/// constants of the exponential envelope  ||e^{-st} e^{tA} - Pi|| <= c e^{-kappa t}.
struct SpectralSummary {
    Eigen::MatrixXd A;
    double s = 0.0;
    Eigen::VectorXd u;   // right Perron vector, coordinates sum to 1
    Eigen::VectorXd v;   // left Perron vector, v^T u = 1
    Eigen::MatrixXd Pi;  // u v^T
    double kappa = 0.0;  // +inf sentinel for d = 1
    double cconst = 0.0; // 0 for d = 1
    bool irreducible = false;
};

/// e^{tA} by scaling-and-squaring. For essentially non-negative A and t >= 0
/// the result is entrywise non-negative; round-off negatives above -1e-12 are
/// clamped to 0. Throws NonFinite on overflow.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& A, double t);

/// Induced 2-norm (largest singular value); the matrix norm used for all
/// envelope and deviation measurements.
double operator_norm(const Eigen::MatrixXd& M);

/// True iff the directed graph with an edge i -> j whenever i != j and
/// a_{i,j} > 1e-12 is strongly connected; every 1x1 matrix is irreducible.
/// Throws NotEssentiallyNonnegative if an off-diagonal entry < -1e-12.
bool is_irreducible(const Eigen::MatrixXd& A);

/// True iff e^{tA} is entrywise strictly positive (threshold 1e-14 relative
/// to the largest entry; the shift A -> A - s(A) I keeps the comparison
/// scale-free). Agrees with is_irreducible for every t > 0.
bool positivity_check(const Eigen::MatrixXd& A, double t);

/// Full Perron data for an irreducible essentially non-negative matrix.
/// kappa is the half-gap (s - second largest real part) / 2; cconst is
/// calibrated as 1.05 x the largest grid value of ||e^{-st}e^{tA} - Pi|| e^{kappa t}
/// over t in [0, 50] step 0.5.
SpectralSummary perron(const Eigen::MatrixXd& A);

/// The envelope value c e^{-kappa t}; dominates the measured deviation on the
/// calibration grid by construction.
double decay_envelope(const SpectralSummary& summary, double t);

/// (1/t) int_0^t e^{-s(A)u} e^{uA} du by composite Simpson with 4*ceil(t)
/// panels; converges to Pi with deviation at most c/(kappa t).
Eigen::MatrixXd cesaro_average(const Eigen::MatrixXd& A, double t);

}  // namespace cbilab
