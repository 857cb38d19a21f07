#pragma once

#include "dwabm/dw_core.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dwabm {

struct Estimate {
    double p_hat = 0;
    std::size_t trials = 0;     // trials that produced an outcome
    std::size_t successes = 0;
    std::size_t horizon = 0;    // trials lost to the horizon, not in `trials`
    double std_err = 0;
    double ci_lo = 0, ci_hi = 0;
    std::uint64_t seed = 0;
    double wall_time = 0;
    bool flagged = false;       // horizon share above 0.1%

    bool within(double target, double n_se, double floor = 0) const;
};

Estimate make_estimate(std::size_t successes, std::size_t trials, std::size_t horizon,
                       std::uint64_t seed, double wall_time);

// 0 means: DWABM_THREADS if set, else the hardware concurrency
int resolve_threads(int requested);

// Calls body(i) for i in [0, n). Work is handed out dynamically; results
// must be written to per-index slots so the caller can reduce in order.
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body)
{
    const int t = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                                        std::max<std::size_t>(n, 1));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto worker = [&] {
        try {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!err) err = std::current_exception();
            next = n;
        }
    };
    std::vector<std::thread> pool;
    for (int k = 1; k < t; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

enum class Outcome : std::uint8_t { failure, success, horizon };

struct McOptions {
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    int threads = 0;
    PathParams path;  // seed field is ignored; each trial gets its own
};

// Field for trial i of an experiment seeded with `seed`.
ABMField trial_field(const McOptions& o, std::size_t i);

// Runs trial(i) -> Outcome for every trial and folds them in trial order.
template <class Trial>
Estimate run_trials(std::size_t trials, std::uint64_t seed, int threads, Trial&& trial)
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Outcome> out(trials);
    parallel_for(trials, threads, [&](std::size_t i) { out[i] = trial(i); });
    std::size_t win = 0, hz = 0;
    for (const Outcome r : out) {
        win += r == Outcome::success;
        hz += r == Outcome::horizon;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return make_estimate(win, trials - hz, hz, seed, wall);
}

Estimate gambler_mc(double x0, const McOptions& o);
Estimate escape_mc(double x0, double a, const McOptions& o);
Estimate level_before_escape_mc(double x, double y, const McOptions& o);

struct FitPoint {
    double lx = 0;  // log abscissa
    double ly = 0;  // log ordinate
    double w = 1;
};
FitPoint log_point(double x, double y, double w = 1);

struct ScalingFit {
    std::vector<FitPoint> points;
    double slope = 0, intercept = 0, r2 = 0;
    double slope_se = 0;  // from weighted residuals; 0 for an exact fit
};

ScalingFit scaling_fit(const std::vector<FitPoint>& points);

// Weight 1/var(log p) for a Monte Carlo proportion.
double log_weight(const Estimate& e);

} // namespace dwabm
