#pragma once

#include "dwabm/path_engine.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace dwabm {

using Point = std::array<double, 2>;

struct Rect {
    double lo1 = 0, hi1 = 0, lo2 = 0, hi2 = 0;
    bool contains(const Rect& o) const
    {
        return lo1 <= o.lo1 && o.hi1 <= hi1 && lo2 <= o.lo2 && o.hi2 <= hi2;
    }
};

// One axis of an ABM seen from a cut: Y(u) = z(c_r + u) - z(c_r) for u >= 0
// and Y(u) = z(c_l + u) - z(c_l) for u < 0. With c_l = c_r = r this is the
// axis process of X^r; with c_l < c_r the interval [c_l, c_r] is collapsed.
struct AxisView {
    BMPath* path = nullptr;
    double c_r = 0;
    double c_l = 0;

    double real(double u) const { return u >= 0 ? c_r + u : c_l + u; }
    double value(double u);
    ScanResult scan(double u, int dir, double lower, double upper, double limit = dwabm::inf);
    Extremum sup(double u0, double u1);
    Extremum inf(double u0, double u1);
};

// x0 + X restricted to a row or column: F(t) = offset + sign * Y(t).
struct LineFn {
    double sign = 1;
    double offset = 0;
};

// Two-level exit of F from (flo, fhi); the event time is local, the value is F.
ScanResult scan_line(AxisView& y, const LineFn& f, double start, int dir, double flo,
                     double fhi, double limit = inf);
Extremum sup_line(AxisView& y, const LineFn& f, double t0, double t1);
Extremum inf_line(AxisView& y, const LineFn& f, double t0, double t1);

enum class Orientation { horizontal, vertical };

struct DWStage {
    int n = 0;
    Orientation orientation = Orientation::horizontal;
    double lo = 0, hi = 0;           // U_n, U'_n or V_n, V'_n
    double prev_lo = 0, prev_hi = 0; // previous interval of the same orientation
    double H = 0;
    double H_prev = 0;
    double H_prev2 = 0;
    double argmax = 0;
    LineFn line;                     // x0 + X along the scanned line
    double left_sup = 0, right_sup = 0;
    Point corner{};                  // (T1, T2) after the stage
    bool stopped = false;
    bool reached_level = false;
    bool level_hit_left = false, level_hit_right = false;
};

enum class DWStatus { running, stopped, reached_level, escaped, horizon };
const char* to_string(DWStatus s);

struct StopRule {
    std::optional<double> level; // M
    std::optional<Rect> box;     // escape rectangle, real coordinates
    int max_stages = 1000;
    double rel_tol = 1e-12;      // STOP if the new supremum is within this of H

    static StopRule termination() { return {}; }
    static StopRule at_level(double m)
    {
        StopRule s;
        s.level = m;
        return s;
    }
    static StopRule escape(const Rect& r)
    {
        StopRule s;
        s.box = r;
        return s;
    }
    static StopRule level_or_escape(double m, const Rect& r)
    {
        StopRule s;
        s.level = m;
        s.box = r;
        return s;
    }
};

struct DWRecord {
    double x0 = 0;
    Point origin{};
    StopRule stop;
    std::vector<DWStage> stages;
    DWStatus status = DWStatus::running;
    Rect explored;                  // local coordinates
    Rect explored_real;
    std::vector<Point> corner_path; // local coordinates, starts at (0,0)
    AxisView y1, y2;                // views the run was made on

    double H() const { return stages.empty() ? x0 : stages.back().H; }
    bool terminated() const { return status == DWStatus::stopped; }
};

struct DWState {
    DWRecord rec;
    double u_lo = 0, u_hi = 0, v_lo = 0, v_hi = 0;
    double T1 = 0, T2 = 0;
    double y1_T1 = 0, y2_T2 = 0;
};

DWState dw_init(AxisView y1, AxisView y2, double x0, const StopRule& stop);
// Advance by one stage. Requires state.rec.status == running.
void dw_stage(DWState& s);

DWRecord dw_run(AxisView y1, AxisView y2, double x0, const StopRule& stop);
DWRecord dw_run(ABMField& f, double x0, Point origin, const StopRule& stop);

// Largest value of x0 + X on the boundary of the explored rectangle and the
// largest value inside it. Exact for an ABM: each edge is a sup of z1 minus an
// inf of z2.
struct BoundaryAudit {
    double boundary_max = 0;
    double interior_max = 0;
};
BoundaryAudit audit_boundary(AxisView& y1, AxisView& y2, double x0, const Rect& local);

// nu_l = 1 + #{n : 2^l < H_n < 2^(l+1), N > n}
int stages_between_levels(const DWRecord& rec, int ell);

// ---------------------------------------------------------------------------
// delta-DW

enum class DeltaExit { terminal, proceed };

struct DeltaStage {
    DWRecord inner;
    double M = 0;             // M_i
    double M_prev = 0;
    DeltaExit exit = DeltaExit::terminal;
    int k0 = 0;
    std::array<double, 4> sigma{}; // ladder offsets for B1..B4
    std::array<double, 4> tau{};   // (U', V', -U, -V) of the inner run
    std::array<double, 4> T{};     // T^(i) after the stage
    std::array<double, 4> anchors_before{}; // c_r1, c_l1, c_r2, c_l2 of the inner views
};

struct DeltaDWRecord {
    double delta = 0;
    double x0 = 0;
    std::vector<DeltaStage> stages;
    DWStatus status = DWStatus::running;
    int I = 0;
    Rect terminal_real;   // R(T^(I))
    Rect terminal_local;  // R(tau + sigma) of the last stage, in its collapsed coordinates
};

DeltaDWRecord delta_dw_run(ABMField& f, double x0, double delta, int max_stages = 200);

// Stage count of the delta-DW-algorithm by renewal: each stage depends only on
// increments beyond the previous terminal rectangle, and its outcome is scale
// free, so stage i runs on a fresh field (seed hash_key(base.seed, i)) started
// at value 1. Avoids the geometric growth of the pathwise run. Status is
// running when max_stages stages all proceeded.
struct DeltaStageCount {
    DWStatus status = DWStatus::running;
    int I = 0;
    std::vector<DeltaExit> exits;
};
DeltaStageCount delta_dw_stage_count(const PathParams& base, double delta, int max_stages);

struct DeltaAudit {
    // collapsed coordinates of the terminal stage: M_{I-1} + X^{T} on the
    // boundary against -delta * M_I
    double local_boundary_max = 0;
    double local_bound = 0;
    // real coordinates: x0 + X on the boundary of R(T^(I)) against
    // -delta * sup over R(T^(I))
    double real_boundary_max = 0;
    double real_bound = 0;
    // M_I versus M_{I-1} + sup of X^T over R(tau + sigma)
    double max_consistency_err = 0;
    bool local_ok(double tol) const { return local_boundary_max <= local_bound + tol; }
    bool real_ok(double tol) const { return real_boundary_max <= real_bound + tol; }
};
DeltaAudit audit_delta(ABMField& f, const DeltaDWRecord& rec);

// ---------------------------------------------------------------------------
// episodes and robustness

enum class EpisodeKind { interior, extremity };

struct Episode {
    Orientation axis = Orientation::horizontal;
    double t_lo = 0, t_hi = 0;
    int order = 0;
    EpisodeKind kind = EpisodeKind::extremity;
    int type = 0;       // 1..4, 0 when none of the four applies
    int stage = 0;
    int side = 0;       // -1 left/below, +1 right/above
    int ell = 0;        // position within the side's split
    int j = 0;          // number of dyadic levels crossed on this side
    double start = 0;   // scan-order start and end of the episode
    double end = 0;
    double max_value = 0;
};

std::vector<Episode> decompose_episodes(DWRecord& rec);

// order k with h in [2^-k, 2^(1-k))
int dyadic_order(double h);
double f_n(double n, double ell);

struct RobustHit {
    bool ok = false;
    double tau1 = 0, tau0 = 0, tau2 = 0;
    double excursion = 0;  // sup of (y - B) over [tau1, tau2]
    std::string why;
};

// Does y - F hit 0 v-robustly for order ell, F scanned from start in dir?
RobustHit robust_hit(AxisView& y, const LineFn& f, double start, int dir, double target,
                     double v, double ell, bool from_below);

struct PropertyResult {
    bool pass = true;
    std::string witness;
    void fail(const std::string& w)
    {
        if (pass) witness = w;
        pass = false;
    }
};

struct RobustnessReport {
    double v = 1;
    int k0 = 1;
    PropertyResult r1, r2, r3, r4, r5a_avoid, r5a_robust, r5b, r6a_avoid, r6a_robust, r6b, r7;
    std::vector<std::pair<int, int>> V; // (k, V(k))
    bool all() const;
};

RobustnessReport check_robustness(DWRecord& rec, const std::vector<Episode>& episodes, double v,
                                  int k0);

} // namespace dwabm
