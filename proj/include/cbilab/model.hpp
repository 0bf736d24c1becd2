#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cbilab/errors.hpp"

namespace cbilab {

/// A single weighted jump atom; the point lives in U_d = R_+^d \ {0}.
struct Atom {
    Eigen::VectorXd point;
    double weight = 0.0;
};

/// Finite-atom jump measure. An empty atom list is the zero measure, so every
/// integral against the measure is an exact finite sum.
struct AtomMeasure {
    std::vector<Atom> atoms;

    double total_mass() const;
    /// integral of z over the measure
    Eigen::VectorXd mean(int d) const;
    /// integral of z z^T over the measure
    Eigen::MatrixXd second_moment(int d) const;
    /// integral of (z_i - delta) ^+ over the measure
    double positive_part_moment(int i, double delta) const;
    /// integral of (1 and z_i) over the measure
    double truncated_first_moment(int i) const;
    /// integral of ||z||^q over {||z|| >= 1}
    double tail_moment(int q) const;
    bool empty() const { return atoms.empty(); }
};

/// Raw parameter tuple (d, c, beta, B, nu, mu_1..mu_d) plus E(X_0).
struct ModelSpec {
    int d = 0;
    Eigen::VectorXd c;
    Eigen::VectorXd beta;
    Eigen::MatrixXd B;
    AtomMeasure nu;
    std::vector<AtomMeasure> mu;
    Eigen::VectorXd x0_mean;  // defaults to zero when empty
};

enum class ValidationCode {
    NegativeOffDiagonal,
    NegativeParameter,
    AtomOutsideUd,
    NonpositiveWeight,
    BadShape,
};

struct ValidationError {
    ValidationCode code;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationError> errors;
    std::vector<std::string> warnings;  // e.g. tiny negatives clamped to zero
    bool ok() const { return errors.empty(); }
    std::string summary() const;
};

class ValidationFailure : public Error {
public:
    ValidationFailure(ValidationReport report)
        : Error("ValidationFailure", report.summary()), report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// Immutable admissible parameter set. Construction goes through validate();
/// instances are safe to share across simulation workers.
class ValidatedModel {
public:
    const ModelSpec& spec() const { return spec_; }
    int d() const { return spec_.d; }
    const Eigen::VectorXd& c() const { return spec_.c; }
    const Eigen::VectorXd& beta() const { return spec_.beta; }
    const Eigen::MatrixXd& B() const { return spec_.B; }
    const AtomMeasure& nu() const { return spec_.nu; }
    const std::vector<AtomMeasure>& mu() const { return spec_.mu; }
    const Eigen::VectorXd& x0_mean() const { return spec_.x0_mean; }

private:
    friend ValidatedModel validate(const ModelSpec&);
    explicit ValidatedModel(ModelSpec spec) : spec_(std::move(spec)) {}
    ModelSpec spec_;
};

/// Check every admissibility invariant and collect all violations (does not
/// throw). Entries in [-1e-12, 0) are treated as round-off and reported as
/// warnings; the validated copy has them clamped to 0.
ValidationReport check(const ModelSpec& spec);

/// Wrap the spec as validated or throw ValidationFailure carrying the full
/// error list. Idempotent: validating an already-validated spec is a no-op.
ValidatedModel validate(const ModelSpec& spec);

/// Largest verified moment order for the jump measures.
struct MomentOrder {
    int q = 0;
    bool verified = false;
};

/// Result of the moment-condition check: the tail integrals
/// int ||z||^q 1_{||z|| >= 1} d(measure) are computed as exact atom sums.
struct MomentCheck {
    bool ok = false;
    double nu_tail = 0.0;
    std::vector<double> mu_tails;
};

/// True iff the order-q tail integrals of nu and every mu_i are finite; for
/// finite atom measures this only fails on non-finite weights or points.
MomentCheck check_moment_condition(const ValidatedModel& model, int q);

/// The requested moment order together with its verification outcome.
MomentOrder verify_moment_order(const ValidatedModel& model, int q);

}  // namespace cbilab
