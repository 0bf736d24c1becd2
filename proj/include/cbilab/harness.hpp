#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cbilab/coefficients.hpp"
#include "cbilab/model.hpp"
#include "cbilab/simulate.hpp"

#include "json.hpp"

namespace cbilab {

/// Martingale differences of the integer-time chain:
/// M_k = X_k - e^{Btilde} X_{k-1} - betatilde2, recomputable from the skeleton.
struct MartingaleSeries {
    std::vector<Eigen::VectorXd> M;  // M_1 .. M_K
    Skeleton skeleton;
};

MartingaleSeries martingale_differences(const Skeleton& skeleton, const Eigen::MatrixXd& Btilde,
                                        const Eigen::VectorXd& betatilde2);

/// v^T X_{floor(n t)} / n. Throws HorizonTooShort if the skeleton ends sooner.
double scaled_projection(const Skeleton& skeleton, int n, const Eigen::VectorXd& v, double t);

/// Sup distance between the empirical CDF of the samples and the gamma CDF
/// with the given shape and rate (regularized incomplete gamma function).
double ks_distance(std::vector<double> samples, double shape, double rate);

/// Per-type median of |X_i / sum_k X_k - u_i| over paths with positive total
/// mass; zero-mass paths are dropped and counted.
struct FrequencyErrors {
    Eigen::VectorXd median_error;
    int dropped = 0;
    int total = 0;
};
FrequencyErrors relative_frequencies(const std::vector<Eigen::VectorXd>& states,
                                     const Eigen::VectorXd& u);

/// Monte Carlo growth-rate diagnostics:
///  state ratios   E||X_t||^q  / (1+t)^q over an integer t-grid,
///  noise ratios   E||M_n||^{2q} / n^q   over an integer n-grid.
/// spread = max ratio / min ratio; slope = least-squares slope of log(ratio)
/// against log(t or n).
struct MomentGrowthSeries {
    int q = 0;
    std::vector<int> grid;
    std::vector<double> ratios;
    double spread = 0.0;
    double slope = 0.0;
};
MomentGrowthSeries state_moment_growth(const std::vector<Skeleton>& paths, int q,
                                       const std::vector<int>& t_grid);
MomentGrowthSeries martingale_moment_growth(const std::vector<Skeleton>& paths,
                                            const Eigen::MatrixXd& Btilde,
                                            const Eigen::VectorXd& betatilde2, int q,
                                            const std::vector<int>& n_grid);

/// Per-scaling-level statistics of a convergence run.
struct LevelStats {
    int n = 0;
    double ks = 0.0;  // KS to the gamma law, or |mean(proj) - a t| on the degenerate branch
    double ks_threshold = 0.0;
    Eigen::VectorXd freq_median_error;
    int dropped_paths = 0;
    double median_angle = 0.0;  // radians between X_{floor(nt)} and u
    std::vector<int> martingale_k;
    Eigen::MatrixXd martingale_z;  // rows follow martingale_k, one column per type
    double x_ratio_q1 = 0.0;       // E||X_K|| / (1 + K)
    std::uint64_t level_seed = 0;
};

struct ConvergenceReport {
    nlohmann::json model_echo;
    SpectralSummary spectral;          // of the effective branching matrix
    DerivedCoefficients coefficients;
    bool ctilde_valid = false;
    std::vector<int> n_grid;
    double t = 1.0;
    int paths = 0;
    std::uint64_t seed = 0;
    double dt = 0.01;
    double a = 0.0, b = 0.0;
    double gamma_shape = 0.0, gamma_rate = 0.0;
    bool degenerate = false;  // b = 0 branch: the limit marginal is the point a t
    std::vector<LevelStats> levels;
    MomentGrowthSeries state_growth;       // q = 1, from the largest level
    MomentGrowthSeries martingale_growth;  // q = 2, from the largest level
    double max_ks_step_increase = 0.0;
    bool ks_weakly_decreasing = false;  // every step increase < 0.02
    double runtime_seconds = 0.0;
};

struct ConvergenceOptions {
    std::vector<int> n_grid{25, 50, 100, 200};
    double t = 1.0;
    int paths = 2000;
    std::uint64_t seed = 42;
    double dt = 0.01;  // macro step cap; substeps bound jump probabilities per step
    int threads = 0;
    int state_q = 1;       // order of the state growth table E||X_t||^q/(1+t)^q
    int martingale_q = 2;  // half-order of the noise growth table E||M_n||^{2q}/n^q
};

/// Full Monte Carlo verification run for a critical irreducible model:
/// per level, simulates `paths` skeletons to floor(n t), compares the scaled
/// projections v^T X / n with the gamma (or degenerate) limit marginal, and
/// collects frequency, martingale, and moment-growth statistics.
ConvergenceReport run_convergence(const ValidatedModel& model, const ConvergenceOptions& options,
                                  const nlohmann::json* model_echo = nullptr);

}  // namespace cbilab
