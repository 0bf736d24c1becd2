#pragma once

#include <Eigen/Dense>
#include <string>

#include "cbilab/coefficients.hpp"
#include "cbilab/model.hpp"

namespace cbilab {

enum class Regime { Subcritical, Critical, Supercritical };

std::string to_string(Regime r);

/// Criticality class by the sign of s(Btilde) within a 1e-9 band.
struct Classification {
    Regime regime = Regime::Critical;
    double s = 0.0;
};

/// Regime-specific long-run limit of the first moment:
///   Subcritical:   E(X_t)            ->  -Btilde^{-1} betatilde
///   Critical:      E(X_t) / t        ->  Pi betatilde
///   Supercritical: e^{-st} E(X_t)    ->  Pi E(X_0) + (1/s) Pi betatilde
struct MeanAsymptote {
    Regime regime = Regime::Critical;
    Eigen::VectorXd limit_vector;
    std::string normalization;  // "none" | "divide-by-t" | "multiply-by-e^{-st}"
};

/// Classify the model; requires an irreducible Btilde (NotIrreducible otherwise).
Classification classify(const ValidatedModel& model);

/// Exact first moment E(X_t) = e^{t Btilde} E(X_0) + (int_0^t e^{u Btilde} du) betatilde.
/// The integral is Btilde^{-1}(e^{tB~} - I) when Btilde is comfortably invertible,
/// Gauss-Legendre with ceil(4t)+16 nodes otherwise (critical Btilde is singular).
Eigen::VectorXd mean_at(const ValidatedModel& model, double t);

/// Same formula from precomputed coefficients (avoids re-deriving per call).
Eigen::VectorXd mean_at(const Eigen::MatrixXd& Btilde, const Eigen::VectorXd& betatilde,
                        const Eigen::VectorXd& x0_mean, double t);

/// The three-regime mean asymptote.
MeanAsymptote mean_asymptote(const ValidatedModel& model);

}  // namespace cbilab
