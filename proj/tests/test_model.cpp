#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cbilab/model.hpp"
#include "support.hpp"

using namespace cbilab;

namespace {

bool has_code(const ValidationReport& rep, ValidationCode code) {
    for (const auto& e : rep.errors) {
        if (e.code == code) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("reference two-type parameters are admissible") {
    const ModelSpec spec = testsupport::reference_spec();
    CHECK(check(spec).ok());
    const ValidatedModel model = validate(spec);
    CHECK(model.d() == 2);
}

TEST_CASE("the all-zero single-type model is admissible") {
    const ModelSpec spec = testsupport::zero_spec(1);
    CHECK(check(spec).ok());
    CHECK_NOTHROW(validate(spec));
}

TEST_CASE("negative off-diagonal entry is rejected with its indices") {
    ModelSpec spec = testsupport::reference_spec();
    spec.B(0, 1) = -0.3;
    const ValidationReport rep = check(spec);
    REQUIRE_FALSE(rep.ok());
    CHECK(has_code(rep, ValidationCode::NegativeOffDiagonal));
    CHECK(rep.errors[0].message == "NegativeOffDiagonal(1,2)");
    CHECK_THROWS_AS(validate(spec), ValidationFailure);
}

TEST_CASE("negative rate parameters and bad atoms are each reported") {
    ModelSpec spec = testsupport::reference_spec();
    spec.c[1] = -0.5;
    spec.beta[0] = -2.0;
    spec.nu.atoms.push_back({Eigen::VectorXd::Zero(2), 0.5});       // zero vector not in U_d
    spec.nu.atoms.push_back({spec.nu.atoms[0].point, 0.0});         // weight must be > 0
    spec.mu[0].atoms.push_back({(Eigen::VectorXd(2) << -1.0, 1.0).finished(), 0.1});
    const ValidationReport rep = check(spec);
    CHECK(has_code(rep, ValidationCode::NegativeParameter));
    CHECK(has_code(rep, ValidationCode::AtomOutsideUd));
    CHECK(has_code(rep, ValidationCode::NonpositiveWeight));
    CHECK(rep.errors.size() >= 4);
}

TEST_CASE("round-off negatives are clamped with a warning") {
    ModelSpec spec = testsupport::reference_spec();
    spec.c[0] = -1e-13;
    spec.B(0, 1) = -5e-13;
    const ValidationReport rep = check(spec);
    CHECK(rep.ok());
    CHECK(rep.warnings.size() == 2);
    const ValidatedModel model = validate(spec);
    CHECK(model.c()[0] == 0.0);
    CHECK(model.B()(0, 1) == 0.0);
}

TEST_CASE("validate is idempotent") {
    ModelSpec spec = testsupport::reference_spec();
    spec.c[0] = -1e-13;  // clamped on the first pass
    const ValidatedModel once = validate(spec);
    const ValidatedModel twice = validate(once.spec());
    CHECK(once.c() == twice.c());
    CHECK(once.B() == twice.B());
    CHECK(once.beta() == twice.beta());
}

TEST_CASE("moment condition holds at q = 4 for any finite-atom model") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    CHECK(check_moment_condition(model, 4).ok);
}

TEST_CASE("tail moment values are exact atom sums") {
    ModelSpec spec = testsupport::zero_spec(2);
    spec.nu.atoms.push_back({(Eigen::VectorXd(2) << 2.0, 0.0).finished(), 0.5});
    const MomentCheck mc = check_moment_condition(validate(spec), 2);
    CHECK(mc.ok);
    CHECK(mc.nu_tail == doctest::Approx(0.5 * 4.0).epsilon(1e-15));  // w * ||z||^2
    CHECK(mc.mu_tails[0] == 0.0);
    CHECK(mc.mu_tails[1] == 0.0);
}

TEST_CASE("zero measures give zero moment integrals at every order") {
    const ValidatedModel model = validate(testsupport::zero_spec(3));
    for (int q : {1, 2, 4, 8}) {
        const MomentCheck mc = check_moment_condition(model, q);
        CHECK(mc.ok);
        CHECK(mc.nu_tail == 0.0);
    }
}

TEST_CASE("moment condition is monotone in q") {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const ValidatedModel model = validate(testsupport::random_critical_spec(3, rng));
        if (check_moment_condition(model, 4).ok) {
            CHECK(check_moment_condition(model, 2).ok);
            CHECK(check_moment_condition(model, 1).ok);
        }
    }
}

TEST_CASE("second moment agrees with the split at ||z|| = 1") {
    Rng rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const ValidatedModel model = validate(testsupport::random_critical_spec(2, rng));
        // full second moment via atom summation
        double full = 0.0, below = 0.0;
        for (const auto& a : model.nu().atoms) {
            const double n2 = a.point.squaredNorm();
            full += a.weight * n2;
            if (a.point.norm() < 1.0) below += a.weight * n2;
        }
        const double tail = check_moment_condition(model, 2).nu_tail;
        CHECK(full == doctest::Approx(below + tail).epsilon(1e-14));
    }
}
