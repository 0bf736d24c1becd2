#include "cbilab/simulate.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace cbilab {

namespace {

constexpr double kMaxJumpProb = 0.1;

// Per-measure tables reused across steps: cumulative weights for atom
// selection plus the compensation integrals int (1 ^ z_i) mu_i(dz).
struct JumpTable {
    double mass = 0.0;
    std::vector<double> cumulative;
    const std::vector<Atom>* atoms = nullptr;

    explicit JumpTable(const AtomMeasure& m) : atoms(&m.atoms) {
        cumulative.reserve(m.atoms.size());
        for (const auto& a : m.atoms) {
            mass += a.weight;
            cumulative.push_back(mass);
        }
    }

    const Eigen::VectorXd& draw(Rng& rng) const {
        const double target = rng.uniform() * mass;
        std::size_t lo = 0;
        while (lo + 1 < cumulative.size() && cumulative[lo] < target) ++lo;
        return (*atoms)[lo].point;
    }
};

// Shared per-path stepping state: jump tables plus preallocated work vectors
// so the hot loop stays allocation-free.
class CbiStepper {
public:
    explicit CbiStepper(const ValidatedModel& model) : model_(model), nu_(model.nu()) {
        const int d = model.d();
        mu_.reserve(d);
        compensation_ = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < d; ++i) {
            mu_.emplace_back(model.mu()[i]);
            compensation_[i] = model.mu()[i].truncated_first_moment(i);
            if (model.c()[i] > 0.0) diffusive_.push_back(i);
        }
        next_.resize(d);
    }

    // Advance by one macro step of length dt. In adaptive mode the step is
    // subdivided so every substep keeps jump probabilities at or below the
    // cap, with the rate re-bounded from the running state; otherwise a
    // single substep is taken and a cap violation is an error.
    void macro_step(double dt, bool adaptive, Eigen::VectorXd& x, Rng& rng) {
        if (!adaptive) {
            const double prob = max_jump_rate(x) * dt;
            if (prob > kMaxJumpProb) {
                throw StepTooLarge("per-step jump probability " + std::to_string(prob) +
                                   " exceeds 0.1; reduce dt");
            }
            substep(dt, x, rng);
            return;
        }
        double remaining = dt;
        while (remaining > 0.0) {
            const double rate = max_jump_rate(x);
            double h = remaining;
            if (rate > 0.0) h = std::min(h, kMaxJumpProb / rate);
            substep(h, x, rng);
            remaining -= h;
        }
    }

private:
    double max_jump_rate(const Eigen::VectorXd& x) const {
        double r = nu_.mass;
        for (int i = 0; i < model_.d(); ++i) r = std::max(r, x[i] * mu_[i].mass);
        return r;
    }

    // One Euler substep of length h from state x (in place).
    void substep(double h, Eigen::VectorXd& x, Rng& rng) {
        next_.noalias() = model_.B() * x;
        next_ += model_.beta();
        next_ -= x.cwiseProduct(compensation_);
        next_ = x + h * next_;
        for (int i : diffusive_) {
            next_[i] += std::sqrt(2.0 * model_.c()[i] * std::max(0.0, x[i]) * h) * rng.normal();
        }
        if (nu_.mass > 0.0 && rng.uniform() < nu_.mass * h) next_ += nu_.draw(rng);
        for (int i = 0; i < model_.d(); ++i) {
            const double rate = x[i] * mu_[i].mass;
            if (rate > 0.0 && rng.uniform() < rate * h) next_ += mu_[i].draw(rng);
        }
        x = next_.cwiseMax(0.0);
        if (!x.allFinite()) throw NonFinite("simulated state overflowed");
    }

    const ValidatedModel& model_;
    JumpTable nu_;
    std::vector<JumpTable> mu_;
    Eigen::VectorXd compensation_;
    std::vector<int> diffusive_;
    Eigen::VectorXd next_;
};

long steps_for(double T, double dt) {
    const long n = std::lround(T / dt);
    if (n < 0 || std::abs(n * dt - T) > 1e-9 * std::max(1.0, T)) {
        throw InvalidArgument("T must be an integer multiple of dt");
    }
    return n;
}

int substeps_per_unit(double dt) {
    const int m = static_cast<int>(std::lround(1.0 / dt));
    if (m < 1 || std::abs(m * dt - 1.0) > 1e-9) {
        throw GridMismatch("dt must divide 1 so the grid contains every integer time");
    }
    return m;
}

template <typename Work>
void parallel_for_paths(int n_paths, int threads, Work&& work) {
    const int workers = std::min(threads, n_paths);
    if (workers <= 1) {
        for (int i = 0; i < n_paths; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mtx;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            try {
                for (int i = next.fetch_add(1); i < n_paths; i = next.fetch_add(1)) work(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mtx);
                if (!error) error = std::current_exception();
                next.store(n_paths);  // stop handing out work
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::CbiEuler: return "CBI-Euler";
        case Scheme::LimitEuler: return "Limit-Euler";
        case Scheme::LimitExact: return "Limit-Exact";
    }
    return "unknown";
}

Path simulate_cbi(const ValidatedModel& model, double T, double dt, std::uint64_t seed) {
    if (!(dt > 0.0) || dt > 0.01 + 1e-15) throw InvalidArgument("simulate_cbi requires 0 < dt <= 0.01");
    const long n_steps = steps_for(T, dt);
    CbiStepper stepper(model);
    Rng rng(seed);

    Path path;
    path.seed = seed;
    path.scheme = Scheme::CbiEuler;
    path.times.reserve(n_steps + 1);
    path.states.reserve(n_steps + 1);
    Eigen::VectorXd x = model.x0_mean();
    path.times.push_back(0.0);
    path.states.push_back(x);
    for (long k = 1; k <= n_steps; ++k) {
        stepper.macro_step(dt, false, x, rng);
        path.times.push_back(k * dt);
        path.states.push_back(x);
    }
    return path;
}

Skeleton simulate_cbi_skeleton(const ValidatedModel& model, int horizon, double dt,
                               std::uint64_t seed) {
    if (horizon < 0) throw InvalidArgument("horizon must be non-negative");
    if (!(dt > 0.0) || dt > 0.01 + 1e-15) throw InvalidArgument("requires 0 < dt <= 0.01");
    const int m = substeps_per_unit(dt);
    CbiStepper stepper(model);
    Rng rng(seed);

    Skeleton skeleton;
    skeleton.reserve(horizon + 1);
    Eigen::VectorXd x = model.x0_mean();
    skeleton.push_back(x);
    for (int k = 1; k <= horizon; ++k) {
        for (int j = 0; j < m; ++j) stepper.macro_step(dt, true, x, rng);
        skeleton.push_back(x);
    }
    return skeleton;
}

Eigen::VectorXd simulate_cbi_final(const ValidatedModel& model, double T, double dt,
                                   std::uint64_t seed) {
    if (!(dt > 0.0) || dt > 0.01 + 1e-15) throw InvalidArgument("requires 0 < dt <= 0.01");
    const long n_steps = steps_for(T, dt);
    CbiStepper stepper(model);
    Rng rng(seed);
    Eigen::VectorXd x = model.x0_mean();
    for (long k = 0; k < n_steps; ++k) stepper.macro_step(dt, true, x, rng);
    return x;
}

LimitSample sample_limit_exact(double a, double b, double t, int n, std::uint64_t seed) {
    if (a < 0.0 || b < 0.0) throw InvalidArgument("limit coefficients must be non-negative");
    if (!(t > 0.0)) throw InvalidArgument("sample_limit_exact requires t > 0");
    LimitSample out;
    out.t = t;
    out.a = a;
    out.b = b;
    out.values.resize(n);
    if (b == 0.0) {
        std::fill(out.values.begin(), out.values.end(), a * t);
        return out;
    }
    const double shape = 2.0 * a / b;
    const double scale = 0.5 * b * t;  // 1 / rate
    if (shape == 0.0) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    Rng rng(seed);
    for (int i = 0; i < n; ++i) out.values[i] = scale * rng.gamma(shape);
    return out;
}

Path simulate_limit_euler(double a, double b, double T, double dt, std::uint64_t seed, double x0) {
    if (!(dt > 0.0) || dt > 0.001 + 1e-15) {
        throw InvalidArgument("simulate_limit_euler requires 0 < dt <= 0.001");
    }
    if (x0 < 0.0) throw InvalidArgument("x0 must be non-negative");
    const long n_steps = steps_for(T, dt);
    Rng rng(seed);

    Path path;
    path.seed = seed;
    path.scheme = Scheme::LimitEuler;
    path.times.reserve(n_steps + 1);
    path.states.reserve(n_steps + 1);
    double x = x0;
    path.times.push_back(0.0);
    path.states.push_back(Eigen::VectorXd::Constant(1, x));
    for (long k = 1; k <= n_steps; ++k) {
        x += a * dt + std::sqrt(b * std::max(0.0, x) * dt) * rng.normal();
        x = std::max(0.0, x);
        if (!std::isfinite(x)) throw NonFinite("limit Euler state overflowed");
        path.times.push_back(k * dt);
        path.states.push_back(Eigen::VectorXd::Constant(1, x));
    }
    return path;
}

Skeleton integer_skeleton(const Path& path) {
    if (path.times.empty()) throw GridMismatch("empty path");
    const double dt = path.times.size() > 1 ? path.times[1] - path.times[0] : 1.0;
    const int m = substeps_per_unit(dt);
    Skeleton skeleton;
    for (std::size_t i = 0; i < path.times.size(); i += m) skeleton.push_back(path.states[i]);
    return skeleton;
}

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CBI_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<Skeleton> skeleton_ensemble(const ValidatedModel& model, int horizon, double dt,
                                        std::uint64_t base_seed, int n_paths, int threads) {
    std::vector<Skeleton> out(n_paths);
    parallel_for_paths(n_paths, resolve_thread_count(threads), [&](int i) {
        out[i] = simulate_cbi_skeleton(model, horizon, dt, mix_seed(base_seed, i));
    });
    return out;
}

std::vector<Eigen::VectorXd> final_state_ensemble(const ValidatedModel& model, double T, double dt,
                                                  std::uint64_t base_seed, int n_paths,
                                                  int threads) {
    std::vector<Eigen::VectorXd> out(n_paths);
    parallel_for_paths(n_paths, resolve_thread_count(threads), [&](int i) {
        out[i] = simulate_cbi_final(model, T, dt, mix_seed(base_seed, i));
    });
    return out;
}

std::vector<double> limit_euler_ensemble(double a, double b, double T, double dt,
                                         std::uint64_t base_seed, int n_paths, int threads) {
    if (!(dt > 0.0) || dt > 0.001 + 1e-15) {
        throw InvalidArgument("limit_euler_ensemble requires 0 < dt <= 0.001");
    }
    const long n_steps = steps_for(T, dt);
    std::vector<double> out(n_paths);
    parallel_for_paths(n_paths, resolve_thread_count(threads), [&](int i) {
        Rng rng(mix_seed(base_seed, i));
        double x = 0.0;
        for (long k = 0; k < n_steps; ++k) {
            x += a * dt + std::sqrt(b * std::max(0.0, x) * dt) * rng.normal();
            x = std::max(0.0, x);
        }
        if (!std::isfinite(x)) throw NonFinite("limit Euler state overflowed");
        out[i] = x;
    });
    return out;
}

}  // namespace cbilab
