#include "support.hpp"

#include "cbilab/coefficients.hpp"

namespace testsupport {

cbilab::ModelSpec random_critical_spec(int d, cbilab::Rng& rng) {
    cbilab::ModelSpec s;
    s.d = d;
    s.c = Eigen::VectorXd::Zero(d);
    s.beta = Eigen::VectorXd::Zero(d);
    s.B = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        s.c[i] = 0.8 * rng.uniform();
        s.beta[i] = rng.uniform();
        for (int j = 0; j < d; ++j) {
            s.B(i, j) = (i == j) ? -1.0 - rng.uniform() : 0.2 + 0.8 * rng.uniform();
        }
    }
    auto random_atom = [&](double weight_lo, double weight_hi) {
        cbilab::Atom a;
        a.point = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < d; ++i) a.point[i] = 1.2 * rng.uniform();
        a.point[static_cast<int>(rng.uniform() * d) % d] += 0.2;  // keep it inside U_d
        a.weight = weight_lo + (weight_hi - weight_lo) * rng.uniform();
        return a;
    };
    const int nu_atoms = 1 + static_cast<int>(rng.uniform() * 2.0);
    for (int k = 0; k < nu_atoms; ++k) s.nu.atoms.push_back(random_atom(0.1, 0.5));
    s.mu.assign(d, cbilab::AtomMeasure{});
    for (int i = 0; i < d; ++i) {
        const int n_atoms = static_cast<int>(rng.uniform() * 3.0);  // 0..2
        for (int k = 0; k < n_atoms; ++k) s.mu[i].atoms.push_back(random_atom(0.05, 0.3));
    }
    s.x0_mean = Eigen::VectorXd::Zero(d);

    // Shift the diagonal so the effective branching matrix becomes critical;
    // the jump correction is unaffected by the shift.
    const Eigen::MatrixXd Btilde = cbilab::effective_branching(cbilab::validate(s));
    const double s0 = Eigen::EigenSolver<Eigen::MatrixXd>(Btilde, false)
                          .eigenvalues()
                          .real()
                          .maxCoeff();
    s.B.diagonal().array() -= s0;
    return s;
}

Eigen::MatrixXd random_essentially_nonneg(int d, cbilab::Rng& rng) {
    Eigen::MatrixXd A(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i == j) {
                A(i, j) = -1.5 + 2.0 * rng.uniform();
            } else {
                // zero or comfortably positive, never borderline
                A(i, j) = (rng.uniform() < 0.45) ? 0.0 : 0.1 + 0.9 * rng.uniform();
            }
        }
    }
    if (d >= 2 && rng.uniform() < 0.5) {
        // force a block upper-triangular pattern (reducible)
        const int r = 1 + static_cast<int>(rng.uniform() * (d - 1));
        for (int i = r; i < d; ++i) {
            for (int j = 0; j < r; ++j) A(i, j) = 0.0;
        }
    }
    return A;
}

}  // namespace testsupport
