#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

#include "cbilab/harness.hpp"
#include "cbilab/io.hpp"
#include "cbilab/moments.hpp"
#include "support.hpp"

using namespace cbilab;

TEST_CASE("martingale differences vanish for the noiseless recursion") {
    // analytic skeleton following X_k = e^{B~} X_{k-1} + betatilde2 exactly
    const ValidatedModel model = validate(testsupport::reference_spec());
    const DerivedBundle bundle = derive(model);
    const Eigen::MatrixXd expB = matrix_exp(bundle.coeffs.Btilde, 1.0);
    Skeleton skeleton{Eigen::VectorXd::Zero(2)};
    for (int k = 1; k <= 8; ++k) {
        skeleton.push_back(expB * skeleton.back() + bundle.coeffs.betatilde2);
    }
    const MartingaleSeries series =
        martingale_differences(skeleton, bundle.coeffs.Btilde, bundle.coeffs.betatilde2);
    REQUIRE(series.M.size() == 8);
    for (const auto& m : series.M) CHECK(m.norm() < 1e-12);
}

TEST_CASE("martingale differences need at least two states") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    const DerivedBundle bundle = derive(model);
    Skeleton too_short{Eigen::VectorXd::Zero(2)};
    CHECK_THROWS_AS(martingale_differences(too_short, bundle.coeffs.Btilde,
                                           bundle.coeffs.betatilde2),
                    LengthMismatch);
}

TEST_CASE("simulated martingale differences have mean zero within noise") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    const DerivedBundle bundle = derive(model);
    const int N = 2000, K = 5;
    const auto paths = skeleton_ensemble(model, K, 0.01, 4242, N);
    for (int k : {1, 5}) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(2), sumsq = Eigen::VectorXd::Zero(2);
        for (const auto& sk : paths) {
            const MartingaleSeries series =
                martingale_differences(sk, bundle.coeffs.Btilde, bundle.coeffs.betatilde2);
            const Eigen::VectorXd& m = series.M[k - 1];
            sum += m;
            sumsq += m.cwiseProduct(m);
        }
        for (int i = 0; i < 2; ++i) {
            const double mean = sum[i] / N;
            const double var = (sumsq[i] - N * mean * mean) / (N - 1);
            CHECK(std::abs(mean) <= 3.0 * std::sqrt(var / N));
        }
    }
}

TEST_CASE("the skeleton is reconstructed exactly from its martingale differences") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    const DerivedBundle bundle = derive(model);
    const Eigen::MatrixXd expB = matrix_exp(bundle.coeffs.Btilde, 1.0);
    const auto paths = skeleton_ensemble(model, 10, 0.01, 555, 25);
    for (const auto& sk : paths) {
        const MartingaleSeries series =
            martingale_differences(sk, bundle.coeffs.Btilde, bundle.coeffs.betatilde2);
        // X_k = e^{kB~} X_0 + sum_j e^{(k-j)B~} (M_j + betatilde2)
        std::vector<Eigen::MatrixXd> powers{Eigen::MatrixXd::Identity(2, 2)};
        for (int k = 1; k <= 10; ++k) powers.push_back(expB * powers.back());
        for (int k = 1; k <= 10; ++k) {
            Eigen::VectorXd rebuilt = powers[k] * sk[0];
            for (int j = 1; j <= k; ++j) {
                rebuilt += powers[k - j] * (series.M[j - 1] + bundle.coeffs.betatilde2);
            }
            CHECK((rebuilt - sk[k]).norm() < 1e-9);
        }
    }
}

TEST_CASE("scaled projection basics") {
    const Eigen::VectorXd v = Eigen::VectorXd::Ones(2);
    Skeleton skeleton;
    const Eigen::VectorXd drift = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    for (int k = 0; k <= 10; ++k) skeleton.push_back(k * drift);
    CHECK(scaled_projection(skeleton, 10, v, 0.0) == 0.0);
    CHECK(scaled_projection(skeleton, 10, v, 1.0) == doctest::Approx(1.0));  // v^T X_10 / 10
    CHECK_THROWS_AS(scaled_projection(skeleton, 10, v, 2.0), HorizonTooShort);
}

TEST_CASE("KS distance of a gamma sample against its own law is small") {
    const LimitSample s = sample_limit_exact(2.0, 1.0, 1.0, 10000, 31415);
    CHECK(ks_distance(s.values, 4.0, 2.0) < 0.02);
}

TEST_CASE("KS distance of a point mass against a continuous law is 1") {
    CHECK(ks_distance(std::vector<double>(100, 0.0), 4.0, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("KS distance separates different gamma laws") {
    // oracle: the analytic sup-distance between gamma(4,2) and gamma(8,2)
    double analytic = 0.0;
    for (int i = 1; i < 4000; ++i) {
        const double x = 0.005 * i;
        analytic = std::max(analytic, std::abs(boost::math::gamma_p(4.0, 2.0 * x) -
                                               boost::math::gamma_p(8.0, 2.0 * x)));
    }
    CHECK(analytic > 0.2);
    const LimitSample s = sample_limit_exact(2.0, 1.0, 1.0, 10000, 161803);  // gamma(4, 2)
    const double measured = ks_distance(s.values, 8.0, 2.0);
    CHECK(measured > 0.2);
    CHECK(std::abs(measured - analytic) < 0.05);
}

TEST_CASE("KS distance rejects empty samples") {
    CHECK_THROWS_AS(ks_distance({}, 4.0, 2.0), EmptySample);
}

TEST_CASE("relative frequencies on the exact ray are zero") {
    const Eigen::VectorXd u = (Eigen::VectorXd(2) << 0.5, 0.5).finished();
    std::vector<Eigen::VectorXd> states;
    for (int i = 1; i <= 5; ++i) states.push_back(i * u);
    const FrequencyErrors err = relative_frequencies(states, u);
    CHECK(err.median_error.maxCoeff() == 0.0);
    CHECK(err.dropped == 0);
}

TEST_CASE("relative frequencies drop and count zero-mass paths") {
    const Eigen::VectorXd u = (Eigen::VectorXd(2) << 0.5, 0.5).finished();
    std::vector<Eigen::VectorXd> states{Eigen::VectorXd::Zero(2), u, Eigen::VectorXd::Zero(2)};
    const FrequencyErrors err = relative_frequencies(states, u);
    CHECK(err.dropped == 2);
    CHECK(err.total == 3);
    std::vector<Eigen::VectorXd> all_zero(4, Eigen::VectorXd::Zero(2));
    CHECK_THROWS_AS(relative_frequencies(all_zero, u), AllZeroMass);
}

TEST_CASE("state moment ratios of the constant path decay like (1+t)^-q") {
    ModelSpec spec = testsupport::zero_spec(2);
    spec.x0_mean = (Eigen::VectorXd(2) << 3.0, 4.0).finished();  // norm 5
    const auto paths = skeleton_ensemble(validate(spec), 20, 0.01, 12, 3);
    const MomentGrowthSeries series = state_moment_growth(paths, 1, {5, 10, 20});
    REQUIRE(series.ratios.size() == 3);
    CHECK(series.ratios[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(series.ratios[1] == doctest::Approx(5.0 / 11.0).epsilon(1e-12));
    CHECK(series.ratios[2] > 0.0);
    CHECK(series.ratios[0] > series.ratios[1]);
    CHECK(series.slope < 0.0);
}

TEST_CASE("growth ratios of the reference model stay in a band") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    const DerivedBundle bundle = derive(model);
    const auto paths = skeleton_ensemble(model, 40, 0.01, 808, 600);
    const MomentGrowthSeries xs = state_moment_growth(paths, 1, {10, 20, 30, 40});
    CHECK(xs.spread < 2.0);
    const MomentGrowthSeries ms = martingale_moment_growth(
        paths, bundle.coeffs.Btilde, bundle.coeffs.betatilde2, 2, {5, 10, 20, 40});
    CHECK(ms.spread < 2.0);
}

TEST_CASE("the noise matrix V is the unit-time covariance started from zero") {
    // with X_0 = 0 the conditional covariance of X_1 reduces to V itself
    const ValidatedModel model = validate(testsupport::reference_spec());
    const DerivedBundle bundle = derive(model);
    const int N = 20000;
    const auto finals = final_state_ensemble(model, 1.0, 0.01, 13579, N);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    for (const auto& x : finals) mean += x;
    mean /= N;
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            double cov = 0.0, varw = 0.0;
            for (const auto& x : finals) {
                const double w = (x[i] - mean[i]) * (x[j] - mean[j]);
                cov += w;
            }
            cov /= N - 1;
            for (const auto& x : finals) {
                const double w = (x[i] - mean[i]) * (x[j] - mean[j]);
                varw += (w - cov) * (w - cov);
            }
            const double se = std::sqrt(varw / (N - 1.0) / N);
            CHECK(std::abs(cov - bundle.coeffs.V(i, j)) <= 3.0 * se + 0.02);
        }
    }
}

TEST_CASE("run_convergence rejects non-critical and reducible models") {
    ModelSpec super = testsupport::reference_spec();
    super.B.diagonal().array() += 0.1;
    ConvergenceOptions small;
    small.n_grid = {5};
    small.paths = 10;
    CHECK_THROWS_AS(run_convergence(validate(super), small), NotCritical);

    ModelSpec reducible = testsupport::zero_spec(2);
    reducible.B << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(run_convergence(validate(reducible), small), NotIrreducible);
}

TEST_CASE("run_convergence on the degenerate branch checks the deterministic ray") {
    const ValidatedModel model = validate(testsupport::no_diffusion_spec());
    ConvergenceOptions opts;
    opts.n_grid = {25, 50};
    opts.paths = 400;
    opts.seed = 2025;
    const ConvergenceReport report = run_convergence(model, opts);
    CHECK(report.degenerate);
    CHECK(report.a == doctest::Approx(2.0));
    for (const auto& level : report.levels) {
        CHECK(level.ks < level.ks_threshold);  // |mean - a t| < 3/sqrt(n)
    }
}

TEST_CASE("run_convergence treats a model without immigration as degenerate at zero") {
    ModelSpec spec = testsupport::reference_spec();
    spec.beta.setZero();
    spec.nu.atoms.clear();  // betatilde = 0, so a = 0 and X stays at 0
    ConvergenceOptions opts;
    opts.n_grid = {10};
    opts.paths = 50;
    const ConvergenceReport report = run_convergence(validate(spec), opts);
    CHECK(report.degenerate);
    CHECK(report.a == 0.0);
    CHECK(report.levels[0].ks == 0.0);  // |mean proj - 0|
    CHECK(report.levels[0].dropped_paths == 50);
}

TEST_CASE("paths collapse onto the Perron ray at large scaling") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    const DerivedBundle bundle = derive(model);
    const int n = 200, N = 500;
    const auto finals = final_state_ensemble(model, static_cast<double>(n), 0.01, 424242, N);
    std::vector<double> angles;
    const double u_norm = bundle.spectral.u.norm();
    for (const auto& x : finals) {
        if (!(x.norm() > 0.0)) continue;
        const double cosine =
            std::clamp(x.dot(bundle.spectral.u) / (x.norm() * u_norm), -1.0, 1.0);
        angles.push_back(std::acos(cosine));
    }
    REQUIRE(angles.size() > 400);
    std::sort(angles.begin(), angles.end());
    CHECK(angles[angles.size() / 2] < 0.1);  // median angle in radians

    // pairwise type ratio: for the symmetric geometry u_1/u_2 = 1
    std::vector<double> ratios;
    for (const auto& x : finals) {
        if (x[1] > 0.0) ratios.push_back(x[0] / x[1]);
    }
    std::sort(ratios.begin(), ratios.end());
    CHECK(ratios[ratios.size() / 2] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("run_convergence produces a deterministic, well-formed report") {
    const ValidatedModel model = validate(testsupport::reference_spec());
    ConvergenceOptions opts;
    opts.n_grid = {5, 10};
    opts.paths = 150;
    opts.seed = 7;
    const ConvergenceReport r1 = run_convergence(model, opts);
    const ConvergenceReport r2 = run_convergence(model, opts);

    CHECK(r1.gamma_shape == doctest::Approx(4.0));
    CHECK(r1.gamma_rate == doctest::Approx(2.0));
    REQUIRE(r1.levels.size() == 2);
    for (const auto& level : r1.levels) {
        CHECK(level.ks >= 0.0);
        CHECK(level.ks <= 1.0);
        CHECK(level.freq_median_error.size() == 2);
        CHECK(level.dropped_paths >= 0);
        CHECK(std::isfinite(level.median_angle));
    }

    // identical inputs and seed give identical documents, timestamps aside
    nlohmann::json j1 = report_to_json(r1);
    nlohmann::json j2 = report_to_json(r2);
    j1.erase("metadata");
    j2.erase("metadata");
    CHECK(j1 == j2);

    // the echoed model document re-parses to an identical validated model
    const ValidatedModel reparsed = validate(model_from_json(j1["model"]));
    CHECK((reparsed.B() - model.B()).norm() == 0.0);
    CHECK((reparsed.c() - model.c()).norm() == 0.0);
    CHECK(reparsed.nu().atoms[0].weight == model.nu().atoms[0].weight);
}
