#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cbilab/model.hpp"
#include "cbilab/rng.hpp"

namespace cbilab {

enum class Scheme { CbiEuler, LimitEuler, LimitExact };

std::string to_string(Scheme s);

/// A simulated trajectory on a uniform grid starting at 0; states stay in R_+^d.
struct Path {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::CbiEuler;
};

/// Independent draws of the scalar limit process at a fixed time.
struct LimitSample {
    double t = 0.0;
    std::vector<double> values;
    double a = 0.0;
    double b = 0.0;
};

/// States at integer times 0, 1, ..., K.
using Skeleton = std::vector<Eigen::VectorXd>;

/// Euler-Maruyama jump-diffusion path of the branching process:
/// continuous part X += (beta + B X) dt + sum_i sqrt(2 c_i X_i^+ dt) xi_i e_i
/// minus the small-jump compensation drift dt * X_i int(1 ^ z_i) mu_i(dz) e_i;
/// jumps by per-step Bernoulli thinning with rates frozen at the step's left
/// endpoint (nu at total mass, mu_i at X_i * mass); states clamped at 0.
/// Requires dt <= 0.01 and T an integer multiple of dt. Throws StepTooLarge
/// if any per-step jump probability exceeds 0.1.
Path simulate_cbi(const ValidatedModel& model, double T, double dt, std::uint64_t seed);

/// Same scheme, but only the states at integer times are kept, and each macro
/// step is subdivided on the fly so per-substep jump probabilities stay at or
/// below 0.1 (the rate is re-bounded at every substep). Memory stays O(K d).
Skeleton simulate_cbi_skeleton(const ValidatedModel& model, int horizon, double dt,
                               std::uint64_t seed);

/// Final state at time T only (adaptive substepping as above).
Eigen::VectorXd simulate_cbi_final(const ValidatedModel& model, double T, double dt,
                                   std::uint64_t seed);

/// Exact time-t marginal of the limit SDE dX = a dt + sqrt(b X^+) dW, X_0 = 0:
/// n copies of a*t when b = 0, otherwise gamma(shape 2a/b, rate 2/(b t)) draws
/// (shape 0 degenerates to the zero distribution).
LimitSample sample_limit_exact(double a, double b, double t, int n, std::uint64_t seed);

/// Euler path of the scalar limit SDE: x += a dt + sqrt(b x^+ dt) xi, clamped
/// at 0. Requires dt <= 0.001.
Path simulate_limit_euler(double a, double b, double T, double dt, std::uint64_t seed, double x0);

/// States at t = 0, 1, ..., floor(T); requires the path grid to contain every
/// integer (dt divides 1), else GridMismatch.
Skeleton integer_skeleton(const Path& path);

/// Number of Monte Carlo workers: requested if > 0, else the CBI_LAB_THREADS
/// environment variable, else hardware concurrency.
int resolve_thread_count(int requested);

/// Ensemble of integer-time skeletons, one decorrelated RNG stream per path
/// index; results are ordered by index, so output never depends on scheduling.
std::vector<Skeleton> skeleton_ensemble(const ValidatedModel& model, int horizon, double dt,
                                        std::uint64_t base_seed, int n_paths, int threads = 0);

/// Ensemble of final states at time T.
std::vector<Eigen::VectorXd> final_state_ensemble(const ValidatedModel& model, double T, double dt,
                                                  std::uint64_t base_seed, int n_paths,
                                                  int threads = 0);

/// Ensemble of time-T values of the Euler-discretized limit SDE started at 0.
std::vector<double> limit_euler_ensemble(double a, double b, double T, double dt,
                                         std::uint64_t base_seed, int n_paths, int threads = 0);

}  // namespace cbilab
