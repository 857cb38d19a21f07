#include "dwabm/path_engine.hpp"

#include "dwabm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace dwabm {

namespace {

constexpr double max_time = 1e250;
constexpr int max_depth = 60;

double interp(double ta, double va, double tb, double vb, double t)
{
    if (t <= ta) return va;
    if (t >= tb) return vb;
    return va + (vb - va) * ((t - ta) / (tb - ta));
}

// P(bridge from va to vb over variance h leaves (lower, upper))
double exit_bound(double va, double vb, double h, double lower, double upper)
{
    if (va <= lower || vb <= lower || va >= upper || vb >= upper) return 1.0;
    double p = 0;
    if (lower > -inf) p += std::exp(-2.0 * (va - lower) * (vb - lower) / h);
    if (upper < inf) p += std::exp(-2.0 * (upper - va) * (upper - vb) / h);
    return p;
}

} // namespace

BMPath BMPath::brownian(const PathParams& p)
{
    if (!(p.base_step > 0) || !(p.min_step > 0))
        throw std::invalid_argument("step sizes must be positive");
    if (p.min_step > p.base_step)
        throw std::invalid_argument("refinement_min_step must not exceed base_step");
    if (!(p.rel_res >= 0) || !(p.prune_eps > 0))
        throw std::invalid_argument("bad resolution parameters");
    BMPath b;
    b.p_ = p;
    return b;
}

BMPath BMPath::injected(double base_step, std::vector<double> pos_increments,
                        std::vector<double> neg_increments)
{
    if (!(base_step > 0)) throw std::invalid_argument("step sizes must be positive");
    BMPath b;
    b.p_.base_step = base_step;
    b.p_.min_step = base_step;
    b.injected_ = true;
    b.inc_[0] = std::move(pos_increments);
    b.inc_[1] = std::move(neg_increments);
    return b;
}

BMPath new_bm(std::uint64_t seed, double base_step, double refinement_min_step)
{
    PathParams p;
    p.seed = seed;
    p.base_step = base_step;
    p.min_step = refinement_min_step;
    return BMPath::brownian(p);
}

ABMField new_abm(const PathParams& p)
{
    PathParams p1 = p, p2 = p;
    p1.seed = hash_key(p.seed, 1);
    p2.seed = hash_key(p.seed, 2);
    return {BMPath::brownian(p1), BMPath::brownian(p2)};
}

double abm_value(ABMField& f, double s1, double s2)
{
    return f.z1.sample_at(s1) - f.z2.sample_at(s2);
}

double BMPath::knot_time(std::int64_t j) const
{
    if (injected_) return static_cast<double>(j) * p_.base_step;
    if (j == 0) return 0.0;
    return std::ldexp(p_.base_step, static_cast<int>(j - 1));
}

double BMPath::knot_value(int side, std::int64_t j)
{
    auto& v = vals_[side];
    while (static_cast<std::int64_t>(v.size()) <= j) {
        const auto k = static_cast<std::int64_t>(v.size()) - 1;
        double step;
        if (injected_) {
            const auto& inc = inc_[side];
            step = k < static_cast<std::int64_t>(inc.size()) ? inc[k] : 0.0;
        } else {
            const double h = knot_time(k + 1) - knot_time(k);
            step = std::sqrt(h) * normal_from_key(hash_key(p_.seed, 0x5e6ULL + side, k));
        }
        v.push_back(v.back() + step);
    }
    return v[j];
}

// Segment g >= 0 is [knot(g), knot(g+1)]; g < 0 is [-knot(j+1), -knot(j)]
// with j = -g-1. A time on a knot belongs to the segment ahead of it in
// direction dir.
std::int64_t BMPath::segment_of(double t, int dir) const
{
    const double s = std::abs(t);
    if (!(s < max_time)) throw HorizonError("time outside representable range");
    std::int64_t j;
    if (injected_) {
        j = static_cast<std::int64_t>(std::floor(s / p_.base_step));
    } else if (s < p_.base_step) {
        j = 0;
    } else {
        j = static_cast<std::int64_t>(std::floor(std::log2(s / p_.base_step))) + 1;
    }
    // closed on the left: knot(j) <= s < knot(j+1)
    while (j > 0 && knot_time(j) > s) --j;
    while (knot_time(j + 1) <= s) ++j;
    const bool positive = t > 0 || (t == 0 && dir > 0);
    if (positive) {
        // for dir < 0 the segment is (knot(j), knot(j+1)]
        if (dir < 0 && knot_time(j) == s) --j;
        return j;
    }
    // negative side, t in [-knot(j+1), -knot(j)) for dir > 0
    if (dir > 0 && knot_time(j) == s) --j;
    return -j - 1;
}

BMPath::Node BMPath::root(std::int64_t g)
{
    Node n{};
    n.g = g;
    n.depth = 0;
    n.idx = 0;
    if (g >= 0) {
        n.ta = knot_time(g);
        n.tb = knot_time(g + 1);
        n.va = knot_value(0, g);
        n.vb = knot_value(0, g + 1);
    } else {
        const std::int64_t j = -g - 1;
        n.ta = -knot_time(j + 1);
        n.tb = -knot_time(j);
        n.va = knot_value(1, j + 1);
        n.vb = knot_value(1, j);
    }
    if (!(std::abs(n.ta) < max_time) || !(std::abs(n.tb) < max_time))
        throw HorizonError("time outside representable range");
    n.leaf = 0;
    if (!injected_) {
        const double near = std::min(std::abs(n.ta), std::abs(n.tb));
        const double res = std::max(p_.min_step, p_.rel_res * near);
        double len = n.tb - n.ta;
        while (len > res && n.leaf < max_depth) {
            len *= 0.5;
            ++n.leaf;
        }
    }
    return n;
}

std::pair<BMPath::Node, BMPath::Node> BMPath::split(const Node& n) const
{
    const double tm = 0.5 * (n.ta + n.tb);
    const std::uint64_t key =
        hash_key(hash_key(p_.seed, static_cast<std::uint64_t>(n.g)),
                 static_cast<std::uint64_t>(n.depth), n.idx);
    const double vm = 0.5 * (n.va + n.vb) + std::sqrt(0.25 * (n.tb - n.ta)) * normal_from_key(key);
    Node l = n, r = n;
    l.tb = tm;
    l.vb = vm;
    r.ta = tm;
    r.va = vm;
    l.depth = r.depth = n.depth + 1;
    l.idx = 2 * n.idx;
    r.idx = 2 * n.idx + 1;
    return {l, r};
}

void BMPath::tick()
{
    if (++visited_ > p_.node_budget) throw HorizonError("node budget exhausted");
}

double BMPath::sample_at(double t)
{
    if (t == 0) return 0.0;
    Node n = root(segment_of(t, +1));
    while (!is_leaf(n)) {
        if (t == n.ta) return n.va;
        if (t == n.tb) return n.vb;
        auto [l, r] = split(n);
        n = t < l.tb ? l : r;
    }
    return interp(n.ta, n.va, n.tb, n.vb, t);
}

std::optional<CrossingEvent> BMPath::dfs_cross(const Node& n, int dir, double wlo, double whi,
                                               double lower, double upper)
{
    if (n.tb <= wlo || n.ta >= whi) return std::nullopt;
    tick();
    if (is_leaf(n)) {
        const double ca = std::max(n.ta, wlo), cb = std::min(n.tb, whi);
        const double va = interp(n.ta, n.va, n.tb, n.vb, ca);
        const double vb = interp(n.ta, n.va, n.tb, n.vb, cb);
        const double tp = dir > 0 ? ca : cb, vp = dir > 0 ? va : vb;
        const double tq = dir > 0 ? cb : ca, vq = dir > 0 ? vb : va;
        if (vq <= lower || vq >= upper) {
            const bool low = vq <= lower;
            const double level = low ? lower : upper;
            double frac = (vp - level) / (vp - vq);
            frac = std::clamp(frac, 0.0, 1.0);
            CrossingEvent e;
            e.time = tp + (tq - tp) * frac;
            e.level_hit = low ? LevelHit::lower : LevelHit::upper;
            e.value = level;
            return e;
        }
        return std::nullopt;
    }
    if (exit_bound(n.va, n.vb, n.tb - n.ta, lower, upper) < p_.prune_eps) return std::nullopt;
    auto [l, r] = split(n);
    const Node& first = dir > 0 ? l : r;
    const Node& second = dir > 0 ? r : l;
    if (auto e = dfs_cross(first, dir, wlo, whi, lower, upper)) return e;
    return dfs_cross(second, dir, wlo, whi, lower, upper);
}

ScanResult BMPath::scan(double start, int dir, double lower, double upper, double limit)
{
    if (dir != 1 && dir != -1) throw std::invalid_argument("direction must be +1 or -1");
    if (!(lower < upper)) throw std::invalid_argument("lower level must be below upper level");
    if (std::isinf(limit)) limit = dir > 0 ? inf : -inf;  // unbounded in the scan direction
    if (dir > 0 ? !(limit >= start) : !(limit <= start))
        throw std::invalid_argument("scan limit lies behind the start");
    ScanResult res;
    visited_ = 0;
    try {
        const double v0 = sample_at(start);
        if (v0 <= lower || v0 >= upper) {
            res.status = ScanStatus::crossed;
            res.event = {start, v0 <= lower ? LevelHit::lower : LevelHit::upper,
                         v0 <= lower ? lower : upper};
            return res;
        }
        const double wlo = dir > 0 ? start : limit;
        const double whi = dir > 0 ? limit : start;
        for (std::int64_t g = segment_of(start, dir);; g += dir) {
            if (injected_) {
                const auto side = g >= 0 ? 0 : 1;
                const auto j = g >= 0 ? g : -g - 1;
                if (j >= static_cast<std::int64_t>(inc_[side].size()))
                    throw HorizonError("scan ran past injected data");
            }
            const Node n = root(g);
            if (dir > 0 ? n.ta >= whi : n.tb <= wlo) break;
            if (auto e = dfs_cross(n, dir, wlo, whi, lower, upper)) {
                res.status = ScanStatus::crossed;
                res.event = *e;
                return res;
            }
            if (dir > 0 ? n.tb >= whi : n.ta <= wlo) break;
        }
        res.status = ScanStatus::time_limit;
        res.event.time = limit;
        res.event.value = sample_at(limit);
    } catch (const HorizonError&) {
        res.status = ScanStatus::horizon;
    }
    return res;
}

ScanResult BMPath::first_crossing(double start, int dir, double lower, double upper, double limit)
{
    const double v0 = sample_at(start);
    if (!(v0 > lower && v0 < upper))
        throw std::invalid_argument("value at start must lie strictly between the levels");
    return scan(start, dir, lower, upper, limit);
}

Extremum BMPath::extremum(double t0, double t1, double sgn)
{
    if (!(t0 <= t1)) throw std::invalid_argument("interval endpoints out of order");
    visited_ = 0;
    Extremum best{sgn * sample_at(t0), t0};
    if (t0 == t1) {
        best.value *= sgn;
        return best;
    }
    auto offer = [&](double v, double t) {
        if (t < t0 || t > t1) return;
        if (v > best.value || (v == best.value && t < best.time)) best = {v, t};
    };
    offer(sgn * sample_at(t1), t1);

    struct Item {
        double prio;
        Node n;
        bool operator<(const Item& o) const { return prio < o.prio; }
    };
    std::priority_queue<Item> pq;
    auto push = [&](const Node& n) {
        const double hi = std::max(sgn * n.va, sgn * n.vb);
        pq.push({hi + std::sqrt(n.tb - n.ta), n});
    };
    const std::int64_t g0 = segment_of(t0, +1), g1 = segment_of(t1, -1);
    for (std::int64_t g = g0; g <= g1; ++g) {
        const Node n = root(g);
        offer(sgn * n.va, n.ta);
        offer(sgn * n.vb, n.tb);
        push(n);
    }
    while (!pq.empty()) {
        const Node n = pq.top().n;
        pq.pop();
        if (n.tb <= t0 || n.ta >= t1) continue;
        tick();
        const double va = sgn * n.va, vb = sgn * n.vb;
        if (is_leaf(n)) {
            const double ca = std::max(n.ta, t0), cb = std::min(n.tb, t1);
            offer(sgn * interp(n.ta, n.va, n.tb, n.vb, ca), ca);
            offer(sgn * interp(n.ta, n.va, n.tb, n.vb, cb), cb);
            continue;
        }
        if (best.value >= std::max(va, vb)) {
            const double p = std::exp(-2.0 * (best.value - va) * (best.value - vb) / (n.tb - n.ta));
            if (p < p_.prune_eps) continue;
        }
        auto [l, r] = split(n);
        offer(sgn * l.vb, l.tb);
        push(l);
        push(r);
    }
    best.value *= sgn;
    return best;
}

Extremum BMPath::sup_on_interval(double t0, double t1) { return extremum(t0, t1, 1.0); }

Extremum BMPath::inf_on_interval(double t0, double t1) { return extremum(t0, t1, -1.0); }

std::vector<std::pair<double, double>> BMPath::knots(int side) const
{
    std::vector<std::pair<double, double>> out;
    const auto& v = vals_[side];
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double t = knot_time(static_cast<std::int64_t>(j));
        out.emplace_back(side == 0 ? t : -t, v[j]);
    }
    return out;
}

} // namespace dwabm
