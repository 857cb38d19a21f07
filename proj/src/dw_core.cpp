#include "dwabm/dw_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwabm {

const char* to_string(DWStatus s)
{
    switch (s) {
    case DWStatus::running: return "running";
    case DWStatus::stopped: return "stopped";
    case DWStatus::reached_level: return "reached_level";
    case DWStatus::escaped: return "escaped";
    case DWStatus::horizon: return "horizon";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// AxisView

double AxisView::value(double u)
{
    if (u >= 0) return path->sample_at(c_r + u) - path->sample_at(c_r);
    return path->sample_at(c_l + u) - path->sample_at(c_l);
}

namespace {

ScanResult shifted(ScanResult r, double c, double z)
{
    r.event.time -= c;
    r.event.value -= z;
    return r;
}

} // namespace

ScanResult AxisView::scan(double u, int dir, double lower, double upper, double limit)
{
    if (dir > 0) {
        if (u < 0) {
            const double zl = path->sample_at(c_l);
            const double lim = std::min(limit, 0.0);
            auto r = path->scan(c_l + u, +1, lower + zl, upper + zl, c_l + lim);
            if (r.status != ScanStatus::time_limit || lim == limit) return shifted(r, c_l, zl);
            u = 0;
        }
        const double zr = path->sample_at(c_r);
        return shifted(path->scan(c_r + u, +1, lower + zr, upper + zr, c_r + limit), c_r, zr);
    }
    if (u > 0) {
        const double zr = path->sample_at(c_r);
        const double lim = std::max(limit, 0.0);
        auto r = path->scan(c_r + u, -1, lower + zr, upper + zr, c_r + lim);
        if (r.status != ScanStatus::time_limit || lim == limit) return shifted(r, c_r, zr);
        u = 0;
    }
    const double zl = path->sample_at(c_l);
    return shifted(path->scan(c_l + u, -1, lower + zl, upper + zl, c_l + limit), c_l, zl);
}

Extremum AxisView::sup(double u0, double u1)
{
    if (u1 <= 0 || u0 >= 0) {
        const double c = u1 <= 0 ? c_l : c_r;
        const double z = path->sample_at(c);
        auto e = path->sup_on_interval(c + u0, c + u1);
        return {e.value - z, e.time - c};
    }
    const auto l = sup(u0, 0.0);
    const auto r = sup(0.0, u1);
    return r.value > l.value ? r : l;
}

Extremum AxisView::inf(double u0, double u1)
{
    if (u1 <= 0 || u0 >= 0) {
        const double c = u1 <= 0 ? c_l : c_r;
        const double z = path->sample_at(c);
        auto e = path->inf_on_interval(c + u0, c + u1);
        return {e.value - z, e.time - c};
    }
    const auto l = inf(u0, 0.0);
    const auto r = inf(0.0, u1);
    return r.value < l.value ? r : l;
}

ScanResult scan_line(AxisView& y, const LineFn& f, double start, int dir, double flo, double fhi,
                     double limit)
{
    ScanResult r;
    if (f.sign > 0) {
        r = y.scan(start, dir, flo - f.offset, fhi - f.offset, limit);
        if (r.crossed()) r.event.value = r.event.level_hit == LevelHit::lower ? flo : fhi;
        else r.event.value += f.offset;
        return r;
    }
    r = y.scan(start, dir, f.offset - fhi, f.offset - flo, limit);
    if (r.crossed()) {
        const bool hit_hi = r.event.level_hit == LevelHit::lower;
        r.event.level_hit = hit_hi ? LevelHit::upper : LevelHit::lower;
        r.event.value = hit_hi ? fhi : flo;
    } else {
        r.event.value = f.offset - r.event.value;
    }
    return r;
}

Extremum sup_line(AxisView& y, const LineFn& f, double t0, double t1)
{
    if (f.sign > 0) {
        auto e = y.sup(t0, t1);
        return {f.offset + e.value, e.time};
    }
    auto e = y.inf(t0, t1);
    return {f.offset - e.value, e.time};
}

Extremum inf_line(AxisView& y, const LineFn& f, double t0, double t1)
{
    if (f.sign > 0) {
        auto e = y.inf(t0, t1);
        return {f.offset + e.value, e.time};
    }
    auto e = y.sup(t0, t1);
    return {f.offset - e.value, e.time};
}

// ---------------------------------------------------------------------------
// DW-algorithm

namespace {

void update_explored(DWRecord& r, double lo, double hi, bool horiz, double olo, double ohi)
{
    if (horiz) r.explored = {lo, hi, olo, ohi};
    else r.explored = {olo, ohi, lo, hi};
    const Rect& e = r.explored;
    r.explored_real = {r.y1.real(e.lo1), r.y1.real(e.hi1), r.y2.real(e.lo2), r.y2.real(e.hi2)};
}

} // namespace

DWState dw_init(AxisView y1, AxisView y2, double x0, const StopRule& stop)
{
    if (!(x0 > 0)) throw std::invalid_argument("x0 must be positive");
    if (stop.level && !(*stop.level > x0)) throw std::invalid_argument("level M must exceed x0");
    if (!y1.path || !y2.path) throw std::invalid_argument("view without a path");
    DWState s;
    s.rec.x0 = x0;
    s.rec.stop = stop;
    s.rec.y1 = y1;
    s.rec.y2 = y2;
    s.rec.origin = {y1.c_r, y2.c_r};
    if (stop.box) {
        const Rect& b = *stop.box;
        if (!(b.lo1 <= y1.c_l && y1.c_r <= b.hi1 && b.lo2 <= y2.c_l && y2.c_r <= b.hi2))
            throw std::invalid_argument("origin must lie in the escape rectangle");
    }
    s.rec.corner_path.push_back({0.0, 0.0});
    update_explored(s.rec, 0, 0, true, 0, 0);
    return s;
}

void dw_stage(DWState& s)
{
    DWRecord& r = s.rec;
    if (r.status != DWStatus::running) throw std::logic_error("dw_stage on a finished run");
    const int n = static_cast<int>(r.stages.size()) + 1;
    if (n > r.stop.max_stages) {
        r.status = DWStatus::horizon;
        return;
    }
    const bool horiz = n % 2 == 1;
    AxisView& y = horiz ? r.y1 : r.y2;

    DWStage st;
    st.n = n;
    st.orientation = horiz ? Orientation::horizontal : Orientation::vertical;
    st.H_prev = r.H();
    st.H_prev2 = n >= 3 ? r.stages[n - 3].H : r.x0;
    st.line = horiz ? LineFn{+1.0, r.x0 - s.y2_T2} : LineFn{-1.0, r.x0 + s.y1_T1};
    st.prev_lo = horiz ? s.u_lo : s.v_lo;
    st.prev_hi = horiz ? s.u_hi : s.v_hi;

    const double top = r.stop.level ? *r.stop.level : inf;
    double lim_lo = -inf, lim_hi = inf;
    if (r.stop.box) {
        const Rect& b = *r.stop.box;
        lim_lo = (horiz ? b.lo1 : b.lo2) - y.c_l;
        lim_hi = (horiz ? b.hi1 : b.hi2) - y.c_r;
    }

    const auto right = scan_line(y, st.line, st.prev_hi, +1, 0.0, top, lim_hi);
    const auto left = scan_line(y, st.line, st.prev_lo, -1, 0.0, top, lim_lo);
    if (right.status == ScanStatus::horizon || left.status == ScanStatus::horizon) {
        r.status = DWStatus::horizon;
        return;
    }
    const double olo = horiz ? s.v_lo : s.u_lo;
    const double ohi = horiz ? s.v_hi : s.u_hi;
    st.lo = left.event.time;
    st.hi = right.event.time;
    if (right.status == ScanStatus::time_limit || left.status == ScanStatus::time_limit) {
        update_explored(r, st.lo, st.hi, horiz, olo, ohi);
        r.status = DWStatus::escaped;
        return;
    }

    try {
        st.level_hit_left = left.event.level_hit == LevelHit::upper;
        st.level_hit_right = right.event.level_hit == LevelHit::upper;
        const auto ls = st.level_hit_left ? Extremum{top, st.lo} : sup_line(y, st.line, st.lo, st.prev_lo);
        const auto rs = st.level_hit_right ? Extremum{top, st.hi} : sup_line(y, st.line, st.prev_hi, st.hi);
        st.left_sup = ls.value;
        st.right_sup = rs.value;

        if (st.level_hit_left || st.level_hit_right) {
            st.reached_level = true;
            st.H = top;
            bool take_right = st.level_hit_right;
            if (st.level_hit_left && st.level_hit_right)
                take_right = (st.hi - st.prev_hi) < (st.prev_lo - st.lo);
            st.argmax = take_right ? st.hi : st.lo;
        } else {
            const bool take_right = rs.value > ls.value;
            const double cand = take_right ? rs.value : ls.value;
            st.argmax = take_right ? rs.time : ls.time;
            if (cand <= st.H_prev + r.stop.rel_tol * std::abs(st.H_prev)) {
                st.stopped = true;
                st.H = st.H_prev;
                st.argmax = horiz ? s.T1 : s.T2;
            } else {
                st.H = cand;
            }
        }
        if (!st.stopped) {
            if (horiz) {
                s.T1 = st.argmax;
                s.y1_T1 = y.value(s.T1);
            } else {
                s.T2 = st.argmax;
                s.y2_T2 = y.value(s.T2);
            }
        }
    } catch (const HorizonError&) {
        r.status = DWStatus::horizon;
        return;
    }

    if (horiz) {
        s.u_lo = st.lo;
        s.u_hi = st.hi;
    } else {
        s.v_lo = st.lo;
        s.v_hi = st.hi;
    }
    st.corner = {s.T1, s.T2};
    update_explored(r, st.lo, st.hi, horiz, olo, ohi);
    if (!st.stopped) r.corner_path.push_back(st.corner);
    if (st.stopped) r.status = DWStatus::stopped;
    else if (st.reached_level) r.status = DWStatus::reached_level;
    r.stages.push_back(st);
}

DWRecord dw_run(AxisView y1, AxisView y2, double x0, const StopRule& stop)
{
    DWState s = dw_init(y1, y2, x0, stop);
    while (s.rec.status == DWStatus::running) dw_stage(s);
    return std::move(s.rec);
}

DWRecord dw_run(ABMField& f, double x0, Point origin, const StopRule& stop)
{
    return dw_run(AxisView{&f.z1, origin[0], origin[0]}, AxisView{&f.z2, origin[1], origin[1]}, x0,
                  stop);
}

BoundaryAudit audit_boundary(AxisView& y1, AxisView& y2, double x0, const Rect& e)
{
    const double a_lo = y1.value(e.lo1), a_hi = y1.value(e.hi1);
    const double b_lo = y2.value(e.lo2), b_hi = y2.value(e.hi2);
    const double s1 = y1.sup(e.lo1, e.hi1).value;
    const double i2 = y2.inf(e.lo2, e.hi2).value;
    BoundaryAudit a;
    a.boundary_max = x0 + std::max({a_lo - i2, a_hi - i2, s1 - b_lo, s1 - b_hi});
    a.interior_max = x0 + s1 - i2;
    return a;
}

int stages_between_levels(const DWRecord& rec, int ell)
{
    const double lo = std::ldexp(1.0, ell), hi = std::ldexp(1.0, ell + 1);
    int nu = 1;
    const int N = rec.terminated() ? static_cast<int>(rec.stages.size()) : 1 << 30;
    for (const auto& st : rec.stages)
        if (st.H > lo && st.H < hi && N > st.n) ++nu;
    return nu;
}

} // namespace dwabm
