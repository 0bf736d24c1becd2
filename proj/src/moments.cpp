#include "cbilab/moments.hpp"

#include <cmath>

#include "cbilab/quadrature.hpp"

namespace cbilab {

namespace {

constexpr double kCriticalTol = 1e-9;

Regime regime_of(double s) {
    if (std::abs(s) < kCriticalTol) return Regime::Critical;
    return s < 0.0 ? Regime::Subcritical : Regime::Supercritical;
}

// int_0^t e^{u Btilde} du
Eigen::MatrixXd exp_integral(const Eigen::MatrixXd& Btilde, double t) {
    const int d = static_cast<int>(Btilde.rows());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    if (t == 0.0) return Eigen::MatrixXd::Zero(d, d);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Btilde);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin > 0.0 && smax / smin < 1e12) {
        const Eigen::MatrixXd E = matrix_exp(Btilde, t);
        return Btilde.fullPivLu().solve(E - I);
    }
    const int nodes = static_cast<int>(std::ceil(4.0 * t)) + 16;
    return integrate_gl([&](double u) -> Eigen::MatrixXd { return matrix_exp(Btilde, u); }, 0.0, t,
                        nodes);
}

}  // namespace

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        case Regime::Supercritical: return "supercritical";
    }
    return "unknown";
}

Classification classify(const ValidatedModel& model) {
    const Eigen::MatrixXd Btilde = effective_branching(model);
    if (!is_irreducible(Btilde)) {
        throw NotIrreducible("classification requires an irreducible effective branching matrix");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(Btilde, false);
    if (solver.info() != Eigen::Success) throw EigenSolverFailure("eigenvalue computation failed");
    Classification out;
    out.s = solver.eigenvalues().real().maxCoeff();
    out.regime = regime_of(out.s);
    return out;
}

Eigen::VectorXd mean_at(const Eigen::MatrixXd& Btilde, const Eigen::VectorXd& betatilde,
                        const Eigen::VectorXd& x0_mean, double t) {
    if (t < 0.0) throw InvalidArgument("mean_at requires t >= 0");
    if (t == 0.0) return x0_mean;
    Eigen::VectorXd mean = matrix_exp(Btilde, t) * x0_mean + exp_integral(Btilde, t) * betatilde;
    if (!mean.allFinite()) throw QuadratureFailure("mean_at produced non-finite values");
    return mean.cwiseMax(0.0);
}

Eigen::VectorXd mean_at(const ValidatedModel& model, double t) {
    return mean_at(effective_branching(model), immigration_mean(model), model.x0_mean(), t);
}

MeanAsymptote mean_asymptote(const ValidatedModel& model) {
    const Eigen::MatrixXd Btilde = effective_branching(model);
    const Eigen::VectorXd betatilde = immigration_mean(model);
    const SpectralSummary sp = perron(Btilde);

    MeanAsymptote out;
    out.regime = regime_of(sp.s);
    switch (out.regime) {
        case Regime::Subcritical: {
            Eigen::FullPivLU<Eigen::MatrixXd> lu(Btilde);
            if (!lu.isInvertible()) {
                throw SingularBtilde("subcritical model with numerically singular Btilde");
            }
            out.limit_vector = -lu.solve(betatilde);
            out.normalization = "none";
            break;
        }
        case Regime::Critical:
            out.limit_vector = sp.Pi * betatilde;
            out.normalization = "divide-by-t";
            break;
        case Regime::Supercritical:
            out.limit_vector = sp.Pi * model.x0_mean() + (1.0 / sp.s) * (sp.Pi * betatilde);
            out.normalization = "multiply-by-e^{-st}";
            break;
    }
    if (!out.limit_vector.allFinite()) throw NonFinite("mean asymptote not finite");
    return out;
}

}  // namespace cbilab
