#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cbilab/moments.hpp"
#include "support.hpp"

using namespace cbilab;

TEST_CASE("classification by the sign of the spectral bound") {
    const ValidatedModel critical = validate(testsupport::reference_spec());
    CHECK(classify(critical).regime == Regime::Critical);
    CHECK(std::abs(classify(critical).s) < 1e-12);

    ModelSpec down = testsupport::reference_spec();
    down.B.diagonal().array() -= 0.1;
    CHECK(classify(validate(down)).regime == Regime::Subcritical);

    ModelSpec up = testsupport::reference_spec();
    up.B.diagonal().array() += 0.1;
    CHECK(classify(validate(up)).regime == Regime::Supercritical);
}

TEST_CASE("classification requires irreducibility") {
    ModelSpec spec = testsupport::zero_spec(2);
    spec.B << -1.0, 1.0, 0.0, -1.0;  // upper triangular, reducible
    CHECK_THROWS_AS(classify(validate(spec)), NotIrreducible);
}

TEST_CASE("mean at time zero is the initial mean") {
    ModelSpec spec = testsupport::reference_spec();
    spec.x0_mean = (Eigen::VectorXd(2) << 0.3, 0.7).finished();
    CHECK((mean_at(validate(spec), 0.0) - spec.x0_mean).norm() == 0.0);
}

TEST_CASE("mean with identity semigroup is linear in t") {
    ModelSpec spec = testsupport::zero_spec(2);
    spec.beta = (Eigen::VectorXd(2) << 0.4, 0.1).finished();
    spec.x0_mean = (Eigen::VectorXd(2) << 1.0, 2.0).finished();
    const ValidatedModel model = validate(spec);
    for (double t : {0.5, 1.0, 7.0}) {
        const Eigen::VectorXd expected = spec.x0_mean + t * spec.beta;
        CHECK((mean_at(model, t) - expected).norm() < 1e-12);
    }
}

TEST_CASE("unit-time mean equals the unit-time drift when started from zero") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    const DerivedBundle bundle = derive(model);
    CHECK((mean_at(model, 1.0) - bundle.coeffs.betatilde2).norm() < 1e-9);
}

TEST_CASE("mean satisfies the semigroup identity") {
    Rng rng(17);
    for (int rep = 0; rep < 6; ++rep) {
        ModelSpec spec = testsupport::random_critical_spec(2 + rep % 2, rng);
        for (int i = 0; i < spec.d; ++i) spec.x0_mean[i] = rng.uniform();
        const ValidatedModel model = validate(spec);
        const Eigen::MatrixXd Btilde = effective_branching(model);
        const Eigen::VectorXd betatilde = immigration_mean(model);
        const double t = 2.0, s = 1.5;
        const Eigen::VectorXd direct = mean_at(model, t + s);
        const Eigen::VectorXd chained = mean_at(Btilde, betatilde, mean_at(model, t), s);
        CHECK((direct - chained).norm() < 1e-9);
    }
}

TEST_CASE("critical mean asymptote is the projected immigration mean") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    const MeanAsymptote asym = mean_asymptote(model);
    CHECK(asym.regime == Regime::Critical);
    CHECK(asym.normalization == "divide-by-t");
    CHECK((asym.limit_vector - Eigen::VectorXd::Ones(2)).norm() < 1e-12);  // Pi betatilde

    // convergence of mean_at(t)/t at the proof's rate envelope
    const DerivedBundle bundle = derive(model);
    const double t = 200.0;
    const Eigen::VectorXd ratio = mean_at(model, t) / t;
    const double bound = 2.0 * (bundle.spectral.cconst / bundle.spectral.kappa) *
                         (model.x0_mean().norm() + bundle.coeffs.betatilde.norm()) / t;
    CHECK((ratio - asym.limit_vector).norm() <= bound);
}

TEST_CASE("subcritical mean asymptote solves the linear system") {
    ModelSpec spec = testsupport::zero_spec(1);
    spec.B(0, 0) = -0.5;
    spec.beta[0] = 1.0;
    const ValidatedModel model = validate(spec);
    const MeanAsymptote asym = mean_asymptote(model);
    CHECK(asym.regime == Regime::Subcritical);
    CHECK(asym.limit_vector[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(mean_at(model, 50.0)[0] - 2.0) < 1e-6);
}

TEST_CASE("supercritical mean asymptote includes the initial state") {
    ModelSpec spec = testsupport::zero_spec(1);
    spec.B(0, 0) = 0.5;
    spec.beta[0] = 1.0;
    spec.x0_mean[0] = 1.0;
    const MeanAsymptote asym = mean_asymptote(validate(spec));
    CHECK(asym.regime == Regime::Supercritical);
    CHECK(asym.normalization == "multiply-by-e^{-st}");
    CHECK(asym.limit_vector[0] == doctest::Approx(3.0).epsilon(1e-12));  // 1 + 1/0.5
}

TEST_CASE("mean stays non-negative componentwise") {
    Rng rng(19);
    for (int rep = 0; rep < 5; ++rep) {
        const ValidatedModel model = validate(testsupport::random_critical_spec(3, rng));
        for (double t : {0.3, 1.0, 10.0, 100.0}) {
            CHECK(mean_at(model, t).minCoeff() >= 0.0);
        }
    }
}
