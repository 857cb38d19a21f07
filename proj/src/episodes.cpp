#include "dwabm/dw_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace dwabm {

int dyadic_order(double h)
{
    if (!(h > 0)) throw std::invalid_argument("dyadic order needs a positive value");
    int k = -static_cast<int>(std::floor(std::log2(h)));
    while (h < std::ldexp(1.0, -k)) ++k;
    while (h >= std::ldexp(1.0, 1 - k)) --k;
    return k;
}

double f_n(double n, double ell) { return std::pow(ell, -n) * std::exp2(-ell); }

std::vector<Episode> decompose_episodes(DWRecord& rec)
{
    if (rec.stages.empty()) throw std::invalid_argument("record has no stages");
    std::vector<Episode> out;
    for (const auto& st : rec.stages) {
        AxisView& y = st.orientation == Orientation::horizontal ? rec.y1 : rec.y2;
        const int k = dyadic_order(st.H_prev);
        for (int side : {-1, +1}) {
            const double from = side < 0 ? st.prev_lo : st.prev_hi;
            const double to = side < 0 ? st.lo : st.hi;
            if (from == to) continue;
            const double ssup = side < 0 ? st.left_sup : st.right_sup;
            const bool level_end = side < 0 ? st.level_hit_left : st.level_hit_right;
            int j = 0;
            if (ssup >= std::ldexp(1.0, 1 - k)) j = k - dyadic_order(ssup);

            double pos = from;
            for (int ell = 0; ell <= j; ++ell) {
                double next = to;
                if (ell < j) {
                    const double level = std::ldexp(1.0, ell + 1 - k);
                    const auto r = scan_line(y, st.line, pos, side, -inf, level, to);
                    if (r.crossed()) next = r.event.time;
                }
                Episode e;
                e.axis = st.orientation;
                e.stage = st.n;
                e.side = side;
                e.ell = ell;
                e.j = j;
                e.order = k - ell;
                e.kind = ell < j ? EpisodeKind::interior : EpisodeKind::extremity;
                e.start = pos;
                e.end = next;
                e.t_lo = std::min(pos, next);
                e.t_hi = std::max(pos, next);
                if (j == 0) {
                    const bool advanced = !st.stopped && !st.reached_level;
                    e.type = advanced && ssup >= std::ldexp(1.0, -k) ? 1 : 0;
                } else if (ell == 0) {
                    e.type = 2;
                } else if (ell < j) {
                    e.type = 3;
                } else {
                    e.type = level_end ? 0 : 4;
                }
                pos = next;
                if (e.t_hi > e.t_lo) {
                    e.max_value = sup_line(y, st.line, e.t_lo, e.t_hi).value;
                    // an interior episode ends at the first passage of its level
                    if (ell < j) e.max_value = std::min(e.max_value, std::ldexp(1.0, ell + 1 - k));
                    out.push_back(e);
                }
            }
        }
    }
    return out;
}

RobustHit robust_hit(AxisView& y, const LineFn& f, double start, int dir, double target, double v,
                     double ell, bool from_below)
{
    RobustHit h;
    const double a = f_n(8, ell) / (v * v);
    const double w = std::exp2(-2 * ell) * std::pow(ell, -10.0) / v;
    const double cap = std::pow(v, -0.25) * f_n(4, ell);
    // G = target - F (from below) or F - target (from above); G hits 0
    const double s = from_below ? -1.0 : 1.0;
    auto level = [&](double g) { return target + s * g; };
    auto dist = [&](double t) { return std::abs(t - start); };

    const double g0 = s * (y.value(start) * f.sign + f.offset - target);
    double t1 = start;
    if (g0 > a) {
        const auto r = from_below ? scan_line(y, f, start, dir, -inf, level(a))
                                  : scan_line(y, f, start, dir, level(a), inf);
        if (!r.crossed()) {
            h.why = "tau1 not reached";
            return h;
        }
        t1 = r.event.time;
    }
    h.tau1 = dist(t1);
    // from tau1: G must reach 0 before cap, within w
    auto leg = [&](double from, double gtarget, double& t_out) -> bool {
        const double lim = from + dir * w;
        const double lo = from_below ? level(cap) : level(gtarget);
        const double hi = from_below ? level(gtarget) : level(cap);
        const auto r = scan_line(y, f, from, dir, lo, hi, lim);
        if (r.status == ScanStatus::horizon) {
            h.why = "horizon";
            return false;
        }
        if (r.status == ScanStatus::time_limit) {
            h.why = "window exceeded";
            return false;
        }
        const bool reached_target = from_below ? r.event.level_hit == LevelHit::upper
                                               : r.event.level_hit == LevelHit::lower;
        if (!reached_target) {
            h.why = "excursion above cap";
            return false;
        }
        t_out = r.event.time;
        return true;
    };
    double t0 = 0, t2 = 0;
    if (!leg(t1, 0.0, t0)) return h;
    h.tau0 = dist(t0);
    if (!leg(t0, -a, t2)) {
        if (h.why == "window exceeded") h.tau2 = inf;
        return h;
    }
    h.tau2 = dist(t2);
    if (h.tau0 - h.tau1 > w || h.tau2 - h.tau0 > w) {
        h.why = "window exceeded";
        return h;
    }
    const double lo = std::min(t1, t2), hi = std::max(t1, t2);
    h.excursion = from_below ? target - inf_line(y, f, lo, hi).value : sup_line(y, f, lo, hi).value - target;
    h.ok = h.excursion <= cap;
    if (!h.ok) h.why = "excursion above cap";
    return h;
}

bool RobustnessReport::all() const
{
    for (const auto* p : {&r1, &r2, &r3, &r4, &r5a_avoid, &r5a_robust, &r5b, &r6a_avoid, &r6a_robust,
                          &r6b, &r7})
        if (!p->pass) return false;
    return true;
}

namespace {

std::string wit(int stage, int side, int order, const std::string& what)
{
    std::ostringstream os;
    os << "stage " << stage << " side " << side << " order " << order << ": " << what;
    return os.str();
}

} // namespace

RobustnessReport check_robustness(DWRecord& rec, const std::vector<Episode>& episodes, double v,
                                  int k0)
{
    if (!(v >= 1)) throw std::invalid_argument("v must be at least 1");
    if (k0 < 1) throw std::invalid_argument("k0 must be at least 1");
    RobustnessReport rep;
    rep.v = v;
    rep.k0 = k0;
    auto kk = [](int k) { return static_cast<double>(k); };

    // (R1)
    const int kmax = dyadic_order(rec.x0) + 1;
    for (int k = k0; k <= kmax; ++k) {
        int count = 0;
        double hprev = rec.x0;
        for (const auto& st : rec.stages) {
            if (hprev < std::ldexp(1.0, 1 - k) && st.H >= std::ldexp(1.0, -k)) ++count;
            hprev = st.H;
        }
        rep.V.emplace_back(k, count);
        if (count > kk(k) * std::sqrt(v))
            rep.r1.fail("V(" + std::to_string(k) + ") = " + std::to_string(count));
    }

    // (R2), (R3)
    for (const auto& e : episodes) {
        if (e.order < k0) continue;
        const double k = e.order;
        const double len = e.t_hi - e.t_lo;
        if (len > v * k * std::exp2(-2 * k))
            rep.r2.fail(wit(e.stage, e.side, e.order, "length " + std::to_string(len)));
        if (len < std::pow(v, -2) * std::pow(k, -7) * std::exp2(-2 * k))
            rep.r3.fail(wit(e.stage, e.side, e.order, "length " + std::to_string(len)));
    }

    // (R4), (R7)
    for (const auto& st : rec.stages) {
        const int k = dyadic_order(st.H);
        if (k < k0) continue;
        if (!st.stopped && st.H - st.H_prev < st.H / (v * kk(k) * kk(k) * kk(k)))
            rep.r4.fail(wit(st.n, 0, k, "increment " + std::to_string(st.H - st.H_prev)));
        if (st.H > st.H_prev * v * kk(k) * kk(k) * kk(k))
            rep.r7.fail(wit(st.n, 0, k, "ratio " + std::to_string(st.H / st.H_prev)));
    }

    // (R5), (R6)
    std::map<std::tuple<int, int, int>, const Episode*> by_pos;
    for (const auto& e : episodes) by_pos[{e.stage, e.side, e.ell}] = &e;
    for (const auto& st : rec.stages) {
        const int k = dyadic_order(st.H_prev);
        if (k < k0) continue;
        const bool odd = st.n % 2 == 1;
        PropertyResult& avoid = odd ? rep.r5a_avoid : rep.r6a_avoid;
        PropertyResult& robust = odd ? rep.r5a_robust : rep.r6a_robust;
        PropertyResult& sep = odd ? rep.r5b : rep.r6b;
        AxisView& y = odd ? rec.y1 : rec.y2;
        int jside[2] = {0, 0};
        for (int side : {-1, +1}) {
            const Episode* first = nullptr;
            for (int ell = 0; !first && ell < 64; ++ell) {
                auto it = by_pos.find({st.n, side, ell});
                if (it != by_pos.end()) first = it->second;
            }
            if (!first) continue;
            const int j = first->j;
            jside[side > 0] = j;
            for (int ell = 1; ell <= j; ++ell) {
                if (k - ell < k0) continue;
                auto it = by_pos.find({st.n, side, ell - 1});
                if (it == by_pos.end()) continue;
                const Episode& e = *it->second;
                const double thr = f_n(8, k - ell) / v;
                const double low = inf_line(y, st.line, e.t_lo, e.t_hi).value;
                if (low <= thr)
                    avoid.fail(wit(st.n, side, k - ell, "dips to " + std::to_string(low)));
                const auto h = robust_hit(y, st.line, e.start, side, std::ldexp(1.0, ell - k), v,
                                          k - ell, true);
                if (!h.ok) robust.fail(wit(st.n, side, k - ell, "level hit: " + h.why));
            }
            const bool level_end = side < 0 ? st.level_hit_left : st.level_hit_right;
            if (!level_end && k - j >= k0) {
                auto it = by_pos.find({st.n, side, j});
                if (it != by_pos.end()) {
                    const auto h = robust_hit(y, st.line, it->second->start, side, 0.0, v, k - j, false);
                    if (!h.ok) robust.fail(wit(st.n, side, k - j, "zero hit: " + h.why));
                }
            }
        }
        const int ord = k - std::max(jside[0], jside[1]);
        if (ord >= k0) {
            const double gap = std::abs(st.left_sup - st.right_sup);
            if (!(gap > f_n(7, ord) / (v * v)))
                sep.fail(wit(st.n, 0, ord, "side maxima differ by " + std::to_string(gap)));
        }
    }
    return rep;
}

} // namespace dwabm
