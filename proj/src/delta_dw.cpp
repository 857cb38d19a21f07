#include "dwabm/dw_core.hpp"
#include "dwabm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwabm {

namespace {

// One stage on views anchored at a. Returns false on a horizon; pos receives
// the ladder end points (B1..B4 in local coordinates).
bool delta_stage(ABMField& f, const std::array<double, 4>& a, double M_prev, double delta,
                 DeltaStage& st, double pos[4])
{
    AxisView y1{&f.z1, a[0], a[1]}, y2{&f.z2, a[2], a[3]};
    st.anchors_before = a;
    st.M_prev = M_prev;
    st.inner = dw_run(y1, y2, M_prev, StopRule::termination());
    if (st.inner.status != DWStatus::stopped) return false;
    const double M = st.inner.H();
    st.M = M;
    const Rect R = st.inner.explored;
    st.tau = {R.hi1, R.hi2, -R.lo1, -R.lo2};

    // B1, B2, B3, B4 beyond the explored rectangle
    AxisView* view[4] = {&y1, &y2, &y1, &y2};
    const double start[4] = {R.hi1, R.hi2, R.lo1, R.lo2};
    const int dir[4] = {+1, +1, -1, -1};
    LineFn line[4];
    for (int j = 0; j < 4; ++j) {
        const double y0 = view[j]->value(start[j]);
        line[j] = (j % 2 == 0) ? LineFn{+1.0, -y0} : LineFn{-1.0, y0};
        pos[j] = start[j];
    }
    try {
        for (int k = 1; k < 1100; ++k) {
            const double lo = -std::ldexp(delta * M, k);
            const double up = std::ldexp(delta * M, k - 1);
            const bool capped = up >= M / 4;
            const double hi = capped ? M / 4 : up;
            bool any_up = false, all_down = true;
            for (int j = 0; j < 4; ++j) {
                const auto r = scan_line(*view[j], line[j], pos[j], dir[j], lo, hi);
                if (!r.crossed()) return false;
                pos[j] = r.event.time;
                const bool went_up = r.event.level_hit == LevelHit::upper;
                any_up = any_up || (went_up && capped);
                all_down = all_down && !went_up;
            }
            if (any_up || all_down) {
                st.exit = all_down ? DeltaExit::terminal : DeltaExit::proceed;
                st.k0 = k;
                st.sigma = {pos[0] - R.hi1, pos[1] - R.hi2, R.lo1 - pos[2], R.lo2 - pos[3]};
                return true;
            }
        }
    } catch (const HorizonError&) {
    }
    return false;
}

void check_delta(double x0, double delta)
{
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
    if (!(x0 > 0)) throw std::invalid_argument("x0 must be positive");
}

} // namespace

DeltaDWRecord delta_dw_run(ABMField& f, double x0, double delta, int max_stages)
{
    check_delta(x0, delta);
    DeltaDWRecord out;
    out.delta = delta;
    out.x0 = x0;

    // anchors of the collapsed views: c_r1, c_l1, c_r2, c_l2
    std::array<double, 4> a{0, 0, 0, 0};
    std::array<double, 4> T{0, 0, 0, 0};
    double M_prev = x0;

    for (int i = 1; i <= max_stages; ++i) {
        DeltaStage st;
        double pos[4];
        if (!delta_stage(f, a, M_prev, delta, st, pos)) {
            out.stages.push_back(std::move(st));
            out.status = DWStatus::horizon;
            return out;
        }
        for (int j = 0; j < 4; ++j) T[j] += st.tau[j] + st.sigma[j];
        st.T = T;
        a = {a[0] + pos[0], a[1] + pos[2], a[2] + pos[1], a[3] + pos[3]};
        const bool terminal = st.exit == DeltaExit::terminal;
        M_prev = st.M;
        out.stages.push_back(std::move(st));
        if (terminal) {
            out.status = DWStatus::stopped;
            out.I = i;
            out.terminal_real = {a[1], a[0], a[3], a[2]};
            out.terminal_local = {pos[2], pos[0], pos[3], pos[1]};
            return out;
        }
    }
    out.status = DWStatus::horizon;
    return out;
}

DeltaStageCount delta_dw_stage_count(const PathParams& base, double delta, int max_stages)
{
    check_delta(1.0, delta);
    DeltaStageCount out;
    for (int i = 1; i <= max_stages; ++i) {
        PathParams p = base;
        p.seed = hash_key(base.seed, static_cast<std::uint64_t>(i));
        ABMField f = new_abm(p);
        DeltaStage st;
        double pos[4];
        if (!delta_stage(f, {0, 0, 0, 0}, 1.0, delta, st, pos)) {
            out.status = DWStatus::horizon;
            return out;
        }
        out.exits.push_back(st.exit);
        if (st.exit == DeltaExit::terminal) {
            out.status = DWStatus::stopped;
            out.I = i;
            return out;
        }
    }
    out.status = DWStatus::running;
    return out;
}

DeltaAudit audit_delta(ABMField& f, const DeltaDWRecord& rec)
{
    if (rec.status != DWStatus::stopped || rec.stages.empty())
        throw std::invalid_argument("audit needs a terminated delta-DW run");
    const DeltaStage& st = rec.stages.back();
    const auto& a = st.anchors_before;
    AxisView y1{&f.z1, a[0], a[1]}, y2{&f.z2, a[2], a[3]};
    DeltaAudit out;
    const auto loc = audit_boundary(y1, y2, st.M_prev, rec.terminal_local);
    out.local_boundary_max = loc.boundary_max;
    out.local_bound = -rec.delta * st.M;
    out.max_consistency_err = std::abs(loc.interior_max - st.M);

    AxisView p1{&f.z1, 0, 0}, p2{&f.z2, 0, 0};
    const auto re = audit_boundary(p1, p2, rec.x0, rec.terminal_real);
    out.real_boundary_max = re.boundary_max;
    out.real_bound = -rec.delta * re.interior_max;
    return out;
}

} // namespace dwabm
