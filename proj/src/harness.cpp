#include "cbilab/harness.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "cbilab/io.hpp"
#include "cbilab/moments.hpp"

namespace cbilab {

namespace {

double median(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double m = xs[mid];
    if (xs.size() % 2 == 0) {
        const double lo = *std::max_element(xs.begin(), xs.begin() + mid);
        m = 0.5 * (m + lo);
    }
    return m;
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<int>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(static_cast<double>(xs[i]));
        const double ly = std::log(std::max(ys[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

void finish_series(MomentGrowthSeries& s) {
    if (s.ratios.empty()) return;
    const double lo = *std::min_element(s.ratios.begin(), s.ratios.end());
    const double hi = *std::max_element(s.ratios.begin(), s.ratios.end());
    s.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    s.slope = loglog_slope(s.grid, s.ratios);
}

}  // namespace

MartingaleSeries martingale_differences(const Skeleton& skeleton, const Eigen::MatrixXd& Btilde,
                                        const Eigen::VectorXd& betatilde2) {
    if (skeleton.size() < 2) throw LengthMismatch("martingale_differences requires length >= 2");
    const Eigen::MatrixXd expB = matrix_exp(Btilde, 1.0);
    MartingaleSeries out;
    out.skeleton = skeleton;
    out.M.reserve(skeleton.size() - 1);
    for (std::size_t k = 1; k < skeleton.size(); ++k) {
        out.M.push_back(skeleton[k] - expB * skeleton[k - 1] - betatilde2);
    }
    return out;
}

double scaled_projection(const Skeleton& skeleton, int n, const Eigen::VectorXd& v, double t) {
    if (n < 1) throw InvalidArgument("scaling level n must be positive");
    if (t < 0.0) throw InvalidArgument("t must be non-negative");
    const std::size_t idx = static_cast<std::size_t>(std::floor(n * t));
    if (idx >= skeleton.size()) {
        throw HorizonTooShort("skeleton covers " + std::to_string(skeleton.size() - 1) +
                              " units, need " + std::to_string(idx));
    }
    return v.dot(skeleton[idx]) / n;
}

double ks_distance(std::vector<double> samples, double shape, double rate) {
    if (samples.empty()) throw EmptySample("ks_distance requires a non-empty sample");
    if (!(shape > 0.0) || !(rate > 0.0)) throw InvalidArgument("gamma shape and rate must be positive");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = std::max(0.0, samples[i]);
        const double cdf = boost::math::gamma_p(shape, rate * x);
        d = std::max(d, std::abs((i + 1) / n - cdf));
        d = std::max(d, std::abs(i / n - cdf));
    }
    return d;
}

FrequencyErrors relative_frequencies(const std::vector<Eigen::VectorXd>& states,
                                     const Eigen::VectorXd& u) {
    if (states.empty()) throw EmptySample("relative_frequencies requires states");
    const int d = static_cast<int>(u.size());
    FrequencyErrors out;
    out.total = static_cast<int>(states.size());
    std::vector<std::vector<double>> errs(d);
    for (const auto& x : states) {
        const double mass = x.sum();
        if (!(mass > 0.0)) {
            ++out.dropped;
            continue;
        }
        for (int i = 0; i < d; ++i) errs[i].push_back(std::abs(x[i] / mass - u[i]));
    }
    if (out.dropped == out.total) throw AllZeroMass("every path has zero total mass");
    out.median_error = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) out.median_error[i] = median(std::move(errs[i]));
    return out;
}

MomentGrowthSeries state_moment_growth(const std::vector<Skeleton>& paths, int q,
                                       const std::vector<int>& t_grid) {
    MomentGrowthSeries out;
    out.q = q;
    for (int t : t_grid) {
        double acc = 0.0;
        std::size_t count = 0;
        for (const auto& sk : paths) {
            if (static_cast<std::size_t>(t) >= sk.size()) continue;
            acc += std::pow(sk[t].norm(), q);
            ++count;
        }
        if (count == 0) continue;
        out.grid.push_back(t);
        out.ratios.push_back(acc / count / std::pow(1.0 + t, q));
    }
    finish_series(out);
    return out;
}

MomentGrowthSeries martingale_moment_growth(const std::vector<Skeleton>& paths,
                                            const Eigen::MatrixXd& Btilde,
                                            const Eigen::VectorXd& betatilde2, int q,
                                            const std::vector<int>& n_grid) {
    const Eigen::MatrixXd expB = matrix_exp(Btilde, 1.0);
    MomentGrowthSeries out;
    out.q = q;
    for (int n : n_grid) {
        double acc = 0.0;
        std::size_t count = 0;
        for (const auto& sk : paths) {
            if (static_cast<std::size_t>(n) >= sk.size()) continue;
            const Eigen::VectorXd M = sk[n] - expB * sk[n - 1] - betatilde2;
            acc += std::pow(M.norm(), 2 * q);
            ++count;
        }
        if (count == 0) continue;
        out.grid.push_back(n);
        out.ratios.push_back(acc / count / std::pow(static_cast<double>(n), q));
    }
    finish_series(out);
    return out;
}

ConvergenceReport run_convergence(const ValidatedModel& model, const ConvergenceOptions& options,
                                  const nlohmann::json* model_echo) {
    const auto t_start = std::chrono::steady_clock::now();
    if (options.n_grid.empty()) throw InvalidArgument("n_grid must be non-empty");
    for (std::size_t i = 1; i < options.n_grid.size(); ++i) {
        if (options.n_grid[i] <= options.n_grid[i - 1]) {
            throw InvalidArgument("n_grid must be strictly increasing");
        }
    }
    if (!(options.t > 0.0)) throw InvalidArgument("t must be positive");

    const Classification cls = classify(model);  // throws NotIrreducible when applicable
    if (cls.regime != Regime::Critical) {
        throw NotCritical("run_convergence requires a critical model, got " + to_string(cls.regime));
    }
    const MomentOrder order = verify_moment_order(model, 4);  // hypothesis of the limit theorem
    if (!order.verified) {
        throw InvalidArgument("fourth-order jump moment condition could not be verified");
    }
    const DerivedBundle bundle = derive(model);
    const DerivedCoefficients& co = bundle.coeffs;
    const Eigen::VectorXd& u = bundle.spectral.u;
    const Eigen::VectorXd& v = bundle.spectral.v;

    ConvergenceReport report;
    report.model_echo = model_echo ? *model_echo : model_to_json(model.spec());
    report.spectral = bundle.spectral;
    report.coefficients = co;
    report.ctilde_valid = bundle.ctilde_valid;
    report.n_grid = options.n_grid;
    report.t = options.t;
    report.paths = options.paths;
    report.seed = options.seed;
    report.dt = options.dt;
    report.a = co.a;
    report.b = co.b;
    // Degenerate limit marginals: the point a t when b = 0, the point 0 when
    // a = 0 (started from 0 with no immigration the process never leaves 0).
    report.degenerate = !(co.b > 0.0) || !(co.a > 0.0);
    if (!report.degenerate) {
        report.gamma_shape = 2.0 * co.a / co.b;
        report.gamma_rate = 2.0 / (co.b * options.t);
    }

    const double u_norm = u.norm();
    for (std::size_t level = 0; level < options.n_grid.size(); ++level) {
        const int n = options.n_grid[level];
        const int K = static_cast<int>(std::floor(n * options.t));
        const int horizon = std::max(K, 1);
        LevelStats stats;
        stats.n = n;
        stats.level_seed = mix_seed(options.seed, 1000 + level);

        const std::vector<Skeleton> paths =
            skeleton_ensemble(model, horizon, options.dt, stats.level_seed, options.paths,
                              options.threads);

        std::vector<double> projections(paths.size());
        std::vector<Eigen::VectorXd> finals(paths.size());
        for (std::size_t p = 0; p < paths.size(); ++p) {
            projections[p] = scaled_projection(paths[p], n, v, options.t);
            finals[p] = paths[p][K];
        }

        if (report.degenerate) {
            // Degenerate limit marginal: the point mass at a t.
            const double mean =
                std::accumulate(projections.begin(), projections.end(), 0.0) / projections.size();
            stats.ks = std::abs(mean - co.a * options.t);
            stats.ks_threshold = 3.0 / std::sqrt(static_cast<double>(n));
        } else {
            stats.ks = ks_distance(projections, report.gamma_shape, report.gamma_rate);
            // Kolmogorov 99% noise floor plus an allowance for Euler and finite-n bias.
            stats.ks_threshold = 1.628 / std::sqrt(static_cast<double>(options.paths)) + 0.0236;
        }

        if (co.a > 0.0) {
            const FrequencyErrors freq = relative_frequencies(finals, u);
            stats.freq_median_error = freq.median_error;
            stats.dropped_paths = freq.dropped;
        } else {
            // frequency limits require immigration (betatilde != 0)
            stats.freq_median_error = Eigen::VectorXd::Zero(model.d());
            stats.dropped_paths = static_cast<int>(finals.size());
        }

        std::vector<double> angles;
        angles.reserve(finals.size());
        for (const auto& x : finals) {
            const double mass = x.norm();
            if (!(mass > 0.0)) continue;
            const double cosine = std::clamp(x.dot(u) / (mass * u_norm), -1.0, 1.0);
            angles.push_back(std::acos(cosine));
        }
        stats.median_angle = median(std::move(angles));

        for (int k : {1, 5, 10}) {
            if (k <= horizon) stats.martingale_k.push_back(k);
        }
        const Eigen::MatrixXd expB = matrix_exp(co.Btilde, 1.0);
        stats.martingale_z.resize(static_cast<int>(stats.martingale_k.size()), model.d());
        for (std::size_t r = 0; r < stats.martingale_k.size(); ++r) {
            const int k = stats.martingale_k[r];
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.d());
            Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(model.d());
            for (const auto& sk : paths) {
                const Eigen::VectorXd M = sk[k] - expB * sk[k - 1] - co.betatilde2;
                sum += M;
                sumsq += M.cwiseProduct(M);
            }
            const double N = static_cast<double>(paths.size());
            for (int i = 0; i < model.d(); ++i) {
                const double mean = sum[i] / N;
                const double var = std::max(0.0, (sumsq[i] - N * mean * mean) / (N - 1.0));
                const double se = std::sqrt(var / N);
                stats.martingale_z(static_cast<int>(r), i) = se > 0.0 ? mean / se : 0.0;
            }
        }

        {
            double acc = 0.0;
            for (const auto& sk : paths) acc += sk[K].norm();
            stats.x_ratio_q1 = acc / paths.size() / (1.0 + K);
        }

        if (level + 1 == options.n_grid.size()) {
            std::vector<int> t_grid, m_grid;
            for (int t = 10; t <= std::min(100, horizon); t += 10) t_grid.push_back(t);
            for (int m = 5; m <= std::min(50, horizon); m += 5) m_grid.push_back(m);
            report.state_growth = state_moment_growth(paths, options.state_q, t_grid);
            report.martingale_growth =
                martingale_moment_growth(paths, co.Btilde, co.betatilde2, options.martingale_q,
                                         m_grid);
        }

        report.levels.push_back(std::move(stats));
    }

    report.max_ks_step_increase = 0.0;
    for (std::size_t i = 1; i < report.levels.size(); ++i) {
        report.max_ks_step_increase =
            std::max(report.max_ks_step_increase, report.levels[i].ks - report.levels[i - 1].ks);
    }
    report.ks_weakly_decreasing = report.max_ks_step_increase < 0.02;

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

}  // namespace cbilab
