#include "cbilab/model.hpp"

#include <cmath>
#include <sstream>

namespace cbilab {

namespace {

constexpr double kClampTol = 1e-12;

std::string idx(int i) { return std::to_string(i + 1); }  // 1-based in messages

bool clampable(double x) { return x < 0.0 && x >= -kClampTol; }

}  // namespace

double AtomMeasure::total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.weight;
    return m;
}

Eigen::VectorXd AtomMeasure::mean(int d) const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
    for (const auto& a : atoms) m += a.weight * a.point;
    return m;
}

Eigen::MatrixXd AtomMeasure::second_moment(int d) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (const auto& a : atoms) m += a.weight * (a.point * a.point.transpose());
    return m;
}

double AtomMeasure::positive_part_moment(int i, double delta) const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.weight * std::max(0.0, a.point[i] - delta);
    return m;
}

double AtomMeasure::truncated_first_moment(int i) const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.weight * std::min(1.0, a.point[i]);
    return m;
}

double AtomMeasure::tail_moment(int q) const {
    double m = 0.0;
    for (const auto& a : atoms) {
        const double n = a.point.norm();
        if (n >= 1.0) m += a.weight * std::pow(n, q);
    }
    return m;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << errors.size() << " validation error(s)";
    for (const auto& e : errors) os << "; " << e.message;
    return os.str();
}

namespace {

void check_measure(const AtomMeasure& m, const std::string& name, int d, ValidationReport& rep) {
    for (std::size_t k = 0; k < m.atoms.size(); ++k) {
        const Atom& a = m.atoms[k];
        if (a.point.size() != d) {
            rep.errors.push_back({ValidationCode::BadShape,
                                  name + " atom " + idx(static_cast<int>(k)) + ": point has dimension " +
                                      std::to_string(a.point.size()) + ", expected " + std::to_string(d)});
            continue;
        }
        bool in_ud = a.point.maxCoeff() > 0.0;
        for (int i = 0; i < d; ++i) {
            if (a.point[i] < -kClampTol) in_ud = false;
        }
        if (!in_ud) {
            rep.errors.push_back({ValidationCode::AtomOutsideUd,
                                  "AtomOutsideUd(" + name + ", " + idx(static_cast<int>(k)) + ")"});
        }
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
            rep.errors.push_back({ValidationCode::NonpositiveWeight,
                                  "NonpositiveWeight(" + name + ", " + idx(static_cast<int>(k)) + ")"});
        }
        if (!a.point.allFinite()) {
            rep.errors.push_back({ValidationCode::BadShape,
                                  name + " atom " + idx(static_cast<int>(k)) + ": non-finite point"});
        }
    }
}

void check_nonnegative_vector(const Eigen::VectorXd& v, const std::string& name, ValidationReport& rep) {
    for (int i = 0; i < v.size(); ++i) {
        if (v[i] < -kClampTol) {
            rep.errors.push_back({ValidationCode::NegativeParameter,
                                  "NegativeParameter(" + name + ", " + idx(i) + ")"});
        } else if (clampable(v[i])) {
            rep.warnings.push_back(name + "[" + idx(i) + "] = " + std::to_string(v[i]) + " clamped to 0");
        }
    }
}

}  // namespace

ValidationReport check(const ModelSpec& spec) {
    ValidationReport rep;
    if (spec.d < 1) {
        rep.errors.push_back({ValidationCode::BadShape, "d must be a positive integer"});
        return rep;
    }
    const int d = spec.d;
    if (spec.c.size() != d || spec.beta.size() != d || spec.B.rows() != d || spec.B.cols() != d ||
        static_cast<int>(spec.mu.size()) != d ||
        (spec.x0_mean.size() != 0 && spec.x0_mean.size() != d)) {
        rep.errors.push_back({ValidationCode::BadShape, "parameter shapes inconsistent with d"});
        return rep;
    }

    check_nonnegative_vector(spec.c, "c", rep);
    check_nonnegative_vector(spec.beta, "beta", rep);
    if (spec.x0_mean.size() == d) check_nonnegative_vector(spec.x0_mean, "x0_mean", rep);

    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            const double b = spec.B(i, j);
            if (b < -kClampTol) {
                rep.errors.push_back({ValidationCode::NegativeOffDiagonal,
                                      "NegativeOffDiagonal(" + idx(i) + "," + idx(j) + ")"});
            } else if (clampable(b)) {
                rep.warnings.push_back("B(" + idx(i) + "," + idx(j) + ") clamped to 0");
            }
        }
    }
    if (!spec.B.allFinite()) {
        rep.errors.push_back({ValidationCode::BadShape, "B has non-finite entries"});
    }

    check_measure(spec.nu, "nu", d, rep);
    for (int i = 0; i < d; ++i) check_measure(spec.mu[i], "mu_" + idx(i), d, rep);

    // Finiteness guards of the admissibility conditions; automatic for finite
    // atom lists, asserted anyway.
    if (rep.ok()) {
        double total = spec.nu.total_mass();
        for (const auto& m : spec.mu) total += m.total_mass();
        if (!std::isfinite(total)) {
            rep.errors.push_back({ValidationCode::NonpositiveWeight, "non-finite total jump mass"});
        }
    }
    return rep;
}

ValidatedModel validate(const ModelSpec& spec) {
    ValidationReport rep = check(spec);
    if (!rep.ok()) throw ValidationFailure(std::move(rep));

    ModelSpec clean = spec;
    auto clamp_vec = [](Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i) {
            if (clampable(v[i])) v[i] = 0.0;
        }
    };
    clamp_vec(clean.c);
    clamp_vec(clean.beta);
    if (clean.x0_mean.size() == 0) clean.x0_mean = Eigen::VectorXd::Zero(clean.d);
    clamp_vec(clean.x0_mean);
    for (int i = 0; i < clean.d; ++i) {
        for (int j = 0; j < clean.d; ++j) {
            if (i != j && clampable(clean.B(i, j))) clean.B(i, j) = 0.0;
        }
    }
    for (auto& a : clean.nu.atoms) {
        for (int i = 0; i < clean.d; ++i) {
            if (clampable(a.point[i])) a.point[i] = 0.0;
        }
    }
    for (auto& m : clean.mu) {
        for (auto& a : m.atoms) {
            for (int i = 0; i < clean.d; ++i) {
                if (clampable(a.point[i])) a.point[i] = 0.0;
            }
        }
    }
    return ValidatedModel(std::move(clean));
}

MomentCheck check_moment_condition(const ValidatedModel& model, int q) {
    if (q < 1) throw InvalidArgument("moment order q must be positive");
    MomentCheck out;
    out.nu_tail = model.nu().tail_moment(q);
    out.mu_tails.reserve(model.d());
    bool ok = std::isfinite(out.nu_tail);
    for (const auto& m : model.mu()) {
        out.mu_tails.push_back(m.tail_moment(q));
        ok = ok && std::isfinite(out.mu_tails.back());
    }
    out.ok = ok;
    return out;
}

MomentOrder verify_moment_order(const ValidatedModel& model, int q) {
    return MomentOrder{q, check_moment_condition(model, q).ok};
}

}  // namespace cbilab
