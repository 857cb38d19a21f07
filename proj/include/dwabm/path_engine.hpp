#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dwabm {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Raised when a query needs more nodes than its budget or leaves the
// representable time range. Callers turn it into a "horizon" status.
struct HorizonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PathParams {
    std::uint64_t seed = 1;
    double base_step = 1e-4;
    double min_step = 1e-9;
    // leaves never need to be shorter than rel_res * |t|
    double rel_res = 1e-9;
    // nodes whose bridge-exit probability is below this are not refined
    double prune_eps = 1e-9;
    std::size_t node_budget = 2'000'000;
};

enum class LevelHit { lower, upper };

struct CrossingEvent {
    double time = 0;
    LevelHit level_hit = LevelHit::lower;
    double value = 0;
};

enum class ScanStatus { crossed, time_limit, horizon };

struct ScanResult {
    ScanStatus status = ScanStatus::horizon;
    CrossingEvent event;
    bool crossed() const { return status == ScanStatus::crossed; }
};

struct Extremum {
    double value = 0;
    double time = 0;
};

// Two-sided Brownian motion with B(0) = 0.
//
// Each half-line is cut at 0, b, 2b, 4b, 8b, ... (b = base_step). Values at
// those knots come from independent Gaussian increments and are cached.
// Inside a segment the path is a binary Brownian-bridge tree whose midpoint
// noise is a hash of (seed, segment, depth, index), so every value is a pure
// function of the seed and the time. The tree stops at leaves no longer than
// max(min_step, rel_res * |t|); the path is linear inside a leaf.
//
// Injected paths are piecewise linear through explicit knots at multiples of
// base_step and carry no bridge noise.
class BMPath {
public:
    BMPath() = default;

    static BMPath brownian(const PathParams& p);
    static BMPath injected(double base_step, std::vector<double> pos_increments,
                           std::vector<double> neg_increments = {});

    double sample_at(double t);

    // Two-level exit from (lower, upper) scanning from start in direction
    // dir (+1 or -1), never past limit. Throws std::invalid_argument if the
    // value at start is not strictly between the levels.
    ScanResult first_crossing(double start, int dir, double lower, double upper,
                              double limit = inf);
    // Same, but a start value on or outside a level is an immediate crossing.
    ScanResult scan(double start, int dir, double lower, double upper, double limit = inf);

    // Ties are broken toward the smaller time. May throw HorizonError.
    Extremum sup_on_interval(double t0, double t1);
    Extremum inf_on_interval(double t0, double t1);

    // cached knots of one half-line as (time, value), side 0 = t >= 0
    std::vector<std::pair<double, double>> knots(int side) const;

    const PathParams& params() const { return p_; }
    bool is_injected() const { return injected_; }
    std::size_t last_query_nodes() const { return visited_; }

private:
    struct Node {
        double ta, tb, va, vb;
        std::int64_t g;
        int depth;
        int leaf;
        std::uint64_t idx;
    };

    double knot_time(std::int64_t j) const;
    double knot_value(int side, std::int64_t j);
    std::int64_t segment_of(double t, int dir) const;
    Node root(std::int64_t g);
    static bool is_leaf(const Node& n) { return n.depth >= n.leaf; }
    std::pair<Node, Node> split(const Node& n) const;
    void tick();

    std::optional<CrossingEvent> dfs_cross(const Node& n, int dir, double wlo, double whi,
                                           double lower, double upper);
    Extremum extremum(double t0, double t1, double sgn);

    PathParams p_;
    bool injected_ = false;
    std::vector<double> vals_[2] = {{0.0}, {0.0}};
    std::vector<double> inc_[2];
    std::size_t visited_ = 0;
};

BMPath new_bm(std::uint64_t seed, double base_step, double refinement_min_step);

// Additive Brownian motion X(s1,s2) = z1(s1) - z2(s2).
struct ABMField {
    BMPath z1;
    BMPath z2;
};

ABMField new_abm(const PathParams& p);
double abm_value(ABMField& f, double s1, double s2);

} // namespace dwabm
