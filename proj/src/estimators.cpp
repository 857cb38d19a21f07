#include "dwabm/estimators.hpp"

#include "dwabm/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dwabm {

bool Estimate::within(double target, double n_se, double floor) const
{
    return std::abs(p_hat - target) <= std::max(n_se * std_err, floor);
}

Estimate make_estimate(std::size_t successes, std::size_t trials, std::size_t horizon,
                       std::uint64_t seed, double wall_time)
{
    Estimate e;
    e.successes = successes;
    e.trials = trials;
    e.horizon = horizon;
    e.seed = seed;
    e.wall_time = wall_time;
    if (trials > 0) {
        e.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
        e.std_err = std::sqrt(e.p_hat * (1 - e.p_hat) / static_cast<double>(trials));
    }
    e.ci_lo = std::max(0.0, e.p_hat - 1.959963984540054 * e.std_err);
    e.ci_hi = std::min(1.0, e.p_hat + 1.959963984540054 * e.std_err);
    const std::size_t all = trials + horizon;
    e.flagged = all > 0 && static_cast<double>(horizon) > 1e-3 * static_cast<double>(all);
    return e;
}

int resolve_threads(int requested)
{
    if (requested > 0) return requested;
    if (const char* env = std::getenv("DWABM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

ABMField trial_field(const McOptions& o, std::size_t i)
{
    PathParams p = o.path;
    p.seed = hash_key(o.seed, i);
    return new_abm(p);
}

namespace {

Outcome classify(DWStatus s, DWStatus win)
{
    if (s == DWStatus::horizon) return Outcome::horizon;
    return s == win ? Outcome::success : Outcome::failure;
}

} // namespace

Estimate gambler_mc(double x0, const McOptions& o)
{
    if (!(x0 > 0 && x0 < 1)) throw std::invalid_argument("gambler needs 0 < x0 < 1");
    return run_trials(o.trials, o.seed, o.threads, [&](std::size_t i) {
        ABMField f = trial_field(o, i);
        const auto r = dw_run(f, x0, {0, 0}, StopRule::at_level(1.0));
        return classify(r.status, DWStatus::reached_level);
    });
}

Estimate escape_mc(double x0, double a, const McOptions& o)
{
    if (!(x0 > 0)) throw std::invalid_argument("escape needs x0 > 0");
    if (!(a >= x0 * x0)) throw std::invalid_argument("escape needs a >= x0^2");
    const Rect box{-a, a, -a, a};
    return run_trials(o.trials, o.seed, o.threads, [&](std::size_t i) {
        ABMField f = trial_field(o, i);
        const auto r = dw_run(f, x0, {0, 0}, StopRule::escape(box));
        return classify(r.status, DWStatus::escaped);
    });
}

Estimate level_before_escape_mc(double x, double y, const McOptions& o)
{
    if (!(x >= 1 && y >= 1)) throw std::invalid_argument("level-escape needs x, y >= 1");
    if (y == 1) return make_estimate(0, o.trials, 0, o.seed, 0.0);  // level held at the start
    const double a = x * x;
    const Rect box{-a, a, -a, a};
    return run_trials(o.trials, o.seed, o.threads, [&](std::size_t i) {
        ABMField f = trial_field(o, i);
        const auto r = dw_run(f, 1.0, {0, 0}, StopRule::level_or_escape(y, box));
        return classify(r.status, DWStatus::escaped);
    });
}

FitPoint log_point(double x, double y, double w)
{
    if (!(x > 0 && y > 0)) throw std::domain_error("log-log points need positive coordinates");
    return {std::log(x), std::log(y), w};
}

double log_weight(const Estimate& e)
{
    if (!(e.p_hat > 0)) throw std::domain_error("cannot weight a zero estimate in log space");
    if (e.std_err == 0) return static_cast<double>(e.trials);
    return e.p_hat * e.p_hat / (e.std_err * e.std_err);
}

ScalingFit scaling_fit(const std::vector<FitPoint>& points)
{
    if (points.size() < 3) throw std::invalid_argument("scaling fit needs at least 3 points");
    double sw = 0, sx = 0, sy = 0;
    for (const auto& p : points) {
        if (!(p.w > 0)) throw std::invalid_argument("weights must be positive");
        sw += p.w;
        sx += p.w * p.lx;
        sy += p.w * p.ly;
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : points) {
        sxx += p.w * (p.lx - mx) * (p.lx - mx);
        sxy += p.w * (p.lx - mx) * (p.ly - my);
        syy += p.w * (p.ly - my) * (p.ly - my);
    }
    if (!(sxx > 1e-300)) throw std::invalid_argument("degenerate abscissas");
    ScalingFit f;
    f.points = points;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0;
    for (const auto& p : points) {
        const double r = p.ly - (f.intercept + f.slope * p.lx);
        ssr += p.w * r * r;
    }
    f.r2 = syy > 0 ? 1 - ssr / syy : 1.0;
    const double dof = static_cast<double>(points.size()) - 2;
    f.slope_se = std::sqrt(ssr / dof / sxx);
    return f;
}

} // namespace dwabm
