#include "dwabm/analytic.hpp"
#include "dwabm/dw_core.hpp"
#include "dwabm/estimators.hpp"
#include "dwabm/fielddim.hpp"
#include "dwabm/markov_sim.hpp"
#include "dwabm/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace dwabm;
using nlohmann::ordered_json;

namespace {

constexpr const char* version = "dwabm 1.0.0";

enum Exit { ok = 0, invalid = 2, horizon_dominated = 3 };

struct Config {
    std::string subcommand;
    std::string format = "json";
    std::string out;
    std::uint64_t seed = 1;
    std::size_t trials = 10000;
    int threads = 0;
    std::vector<double> x0;
    double y = 0.5;
    double a = 1;
    std::vector<double> delta{0.1, 0.01, 0.001};
    int max_stages = 4;
    std::vector<double> v{1, 4, 1e4};
    int k0 = 1;
    int grid_n = 1024;
    double extent = 1;
    double q = 0;
    int min_extent = 64;
    std::string grid_out;
    std::size_t node_budget = PathParams{}.node_budget;
};

std::string num(double x)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string list(const std::vector<double>& xs)
{
    std::string s;
    for (double x : xs) s += (s.empty() ? "" : " ") + num(x);
    return s;
}

// Options each subcommand reads, in the order they are echoed.
std::vector<std::string> used_options(const std::string& sub)
{
    if (sub == "analytic") return {"x0"};
    if (sub == "gambler") return {"x0", "trials", "seed", "node-budget"};
    if (sub == "chain") return {"x0", "y", "trials", "seed"};
    if (sub == "escape") return {"x0", "a", "trials", "seed", "node-budget"};
    if (sub == "level-escape") return {"x0", "y", "trials", "seed", "node-budget"};
    if (sub == "deltadw") return {"delta", "max-stages", "trials", "seed", "node-budget"};
    if (sub == "robustness") return {"x0", "v", "k0", "trials", "seed", "node-budget"};
    return {"grid-n", "extent", "q", "min-extent", "trials", "seed"};
}

ordered_json config_json(const Config& c)
{
    ordered_json j;
    j["subcommand"] = c.subcommand;
    j["format"] = c.format;
    for (const auto& o : used_options(c.subcommand)) {
        if (o == "x0") j["x0"] = c.x0;
        else if (o == "y") j["y"] = c.y;
        else if (o == "a") j["a"] = c.a;
        else if (o == "trials") j["trials"] = c.trials;
        else if (o == "seed") j["seed"] = c.seed;
        else if (o == "delta") j["delta"] = c.delta;
        else if (o == "max-stages") j["max_stages"] = c.max_stages;
        else if (o == "v") j["v"] = c.v;
        else if (o == "k0") j["k0"] = c.k0;
        else if (o == "grid-n") j["grid_n"] = c.grid_n;
        else if (o == "extent") j["extent"] = c.extent;
        else if (o == "q") j["q"] = c.q;
        else if (o == "min-extent") j["min_extent"] = c.min_extent;
        else if (o == "node-budget") j["node_budget"] = c.node_budget;
    }
    return j;
}

// A command line that reproduces the output; threads and paths do not
// affect results and are left out.
std::string command_line(const Config& c)
{
    std::string s = "dwabm " + c.subcommand + " --format " + c.format;
    for (const auto& o : used_options(c.subcommand)) {
        std::string val;
        if (o == "x0") {
            if (c.x0.empty()) continue;
            val = list(c.x0);
        } else if (o == "y") val = num(c.y);
        else if (o == "a") val = num(c.a);
        else if (o == "trials") val = std::to_string(c.trials);
        else if (o == "seed") val = std::to_string(c.seed);
        else if (o == "delta") val = list(c.delta);
        else if (o == "max-stages") val = std::to_string(c.max_stages);
        else if (o == "v") val = list(c.v);
        else if (o == "k0") val = std::to_string(c.k0);
        else if (o == "grid-n") val = std::to_string(c.grid_n);
        else if (o == "extent") val = num(c.extent);
        else if (o == "q") val = num(c.q);
        else if (o == "min-extent") val = std::to_string(c.min_extent);
        else if (o == "node-budget") val = std::to_string(c.node_budget);
        s += " --" + o + " " + val;
    }
    return s;
}

struct Check {
    std::string name;
    bool pass = false;
    double value = 0, target = 0, tol = 0;
};

// Result of one experiment: a table (CSV rows) plus JSON detail.
struct Output {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    ordered_json results = ordered_json::object();
    std::vector<Check> checks;
    bool flagged = false;
};

ordered_json estimate_json(const Estimate& e)
{
    ordered_json j;
    j["p_hat"] = e.p_hat;
    j["std_err"] = e.std_err;
    j["ci_lo"] = e.ci_lo;
    j["ci_hi"] = e.ci_hi;
    j["trials"] = e.trials;
    j["successes"] = e.successes;
    j["horizon"] = e.horizon;
    j["flagged"] = e.flagged;
    return j;
}

const std::vector<std::string> estimate_columns{"p_hat", "std_err", "ci_lo", "ci_hi", "trials",
                                                "successes", "horizon", "flagged"};

std::vector<std::string> estimate_cells(const Estimate& e)
{
    return {num(e.p_hat), num(e.std_err), num(e.ci_lo), num(e.ci_hi), std::to_string(e.trials),
            std::to_string(e.successes), std::to_string(e.horizon), e.flagged ? "1" : "0"};
}

McOptions mc(const Config& c)
{
    McOptions o;
    o.trials = c.trials;
    o.seed = c.seed;
    o.threads = c.threads;
    o.path.node_budget = c.node_budget;
    return o;
}

std::vector<std::string> cat(std::vector<std::string> head, const std::vector<std::string>& tail)
{
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

Output run_analytic(const Config& c)
{
    const EigenSystem& es = eigen_system();
    Output out;
    out.columns = {"name", "value"};
    auto row = [&](const std::string& name, double v) {
        out.rows.push_back({name, num(v)});
        out.results[name] = v;
    };
    const auto closed = lambda_closed_form();
    const auto cplx = complex_lambda_closed_form();
    double lam_err = 0;
    for (int i = 0; i < 4; ++i) {
        row("lambda" + std::to_string(i + 1), es.lam[i]);
        lam_err = std::max(lam_err, std::abs(es.lambda[i] - closed[i]));
    }
    for (int i = 0; i < 2; ++i) {
        row("lambda" + std::to_string(i + 5) + "_re", es.lambda[4 + i].real());
        row("lambda" + std::to_string(i + 5) + "_im", es.lambda[4 + i].imag());
        lam_err = std::max(lam_err, std::abs(es.lambda[4 + i] - cplx[i]));
    }
    for (int i = 0; i < 6; ++i) {
        row("c" + std::to_string(i + 1) + "_re", es.c[i].real());
        row("c" + std::to_string(i + 1) + "_im", es.c[i].imag());
    }
    double alpha_sum = 0, beta_max = 0;
    for (int i = 0; i < 4; ++i) {
        row("alpha" + std::to_string(i + 1), es.alpha[i]);
        row("beta" + std::to_string(i + 1), es.beta[i]);
        alpha_sum += es.alpha[i];
        beta_max = std::max(beta_max, std::abs(es.beta[i]));
    }
    row("dimension_constant", dimension_constant());
    for (double x : c.x0) {
        if (!(x >= 0 && x <= 1)) throw std::invalid_argument("analytic --x0 must lie in [0, 1]");
        row("E(" + num(x) + ")", ruin_formula(x));
    }
    const double c56 = std::max(std::abs(es.c[4]), std::abs(es.c[5]));
    out.checks.push_back({"eigenvalues_closed_form", lam_err <= 1e-10, lam_err, 0, 1e-10});
    out.checks.push_back({"c5_c6_zero", c56 <= 1e-8, c56, 0, 1e-8});
    out.checks.push_back({"beta_zero", beta_max <= 1e-8, beta_max, 0, 1e-8});
    out.checks.push_back({"alpha_sum", std::abs(alpha_sum - 1) <= 1e-8, alpha_sum, 1, 1e-8});
    out.checks.push_back(
        {"alpha1", std::abs(es.alpha[0] - 0.938911) <= 1e-5, es.alpha[0], 0.938911, 1e-5});
    return out;
}

Output run_gambler(const Config& c)
{
    Output out;
    out.columns = cat({"x0"}, estimate_columns);
    out.columns.insert(out.columns.end(), {"ruin_formula", "algorithm_ruin"});
    ordered_json rows = ordered_json::array();
    for (double x : c.x0) {
        const Estimate e = gambler_mc(x, mc(c));
        const double formula = ruin_formula(x), exact = dw_ruin_probability(x);
        auto cells = cat({num(x)}, estimate_cells(e));
        cells.insert(cells.end(), {num(formula), num(exact)});
        out.rows.push_back(cells);
        auto j = estimate_json(e);
        j["x0"] = x;
        j["ruin_formula"] = formula;
        j["algorithm_ruin"] = exact;
        rows.push_back(j);
        const double tol = std::max(3 * e.std_err, 0.01);
        out.checks.push_back({"algorithm_ruin(" + num(x) + ")", std::abs(e.p_hat - exact) <= tol,
                              e.p_hat, exact, tol});
        out.checks.push_back({"ruin_formula(" + num(x) + ")", std::abs(e.p_hat - formula) <= tol,
                              e.p_hat, formula, tol});
        out.flagged |= e.flagged;
    }
    out.results["estimates"] = rows;
    return out;
}

Output run_chain(const Config& c)
{
    Output out;
    out.columns = cat({"x", "y"}, estimate_columns);
    out.columns.push_back("alpha");
    ordered_json rows = ordered_json::array();
    for (double x : c.x0) {
        const Estimate e = absorption_mc(x, c.y, c.trials, c.seed, c.threads);
        const double alpha = alpha_absorb(x, c.y);
        auto cells = cat({num(x), num(c.y)}, estimate_cells(e));
        cells.push_back(num(alpha));
        out.rows.push_back(cells);
        auto j = estimate_json(e);
        j["x"] = x;
        j["y"] = c.y;
        j["alpha"] = alpha;
        rows.push_back(j);
        out.checks.push_back({"alpha(" + num(x) + "," + num(c.y) + ")", e.within(alpha, 3), e.p_hat,
                              alpha, 3 * e.std_err});
    }
    out.results["estimates"] = rows;
    return out;
}

Output run_escape(const Config& c)
{
    Output out;
    out.columns = cat({"x0", "a"}, estimate_columns);
    ordered_json rows = ordered_json::array();
    std::vector<FitPoint> pts;
    for (double x : c.x0) {
        const Estimate e = escape_mc(x, c.a, mc(c));
        out.rows.push_back(cat({num(x), num(c.a)}, estimate_cells(e)));
        auto j = estimate_json(e);
        j["x0"] = x;
        j["a"] = c.a;
        rows.push_back(j);
        if (e.p_hat > 0) pts.push_back(log_point(x, e.p_hat, log_weight(e)));
        out.flagged |= e.flagged;
    }
    out.results["estimates"] = rows;
    if (pts.size() >= 3) {
        const ScalingFit f = scaling_fit(pts);
        const double lam1 = eigen_system().lam[0];
        out.results["slope"] = f.slope;
        out.results["slope_se"] = f.slope_se;
        out.results["lambda1"] = lam1;
        out.checks.push_back({"escape_exponent", std::abs(f.slope - lam1) <= 0.05, f.slope, lam1, 0.05});
    }
    return out;
}

Output run_level_escape(const Config& c)
{
    Output out;
    out.columns = cat({"x", "y"}, estimate_columns);
    ordered_json rows = ordered_json::array();
    for (double x : c.x0) {
        const Estimate e = level_before_escape_mc(x, c.y, mc(c));
        out.rows.push_back(cat({num(x), num(c.y)}, estimate_cells(e)));
        auto j = estimate_json(e);
        j["x"] = x;
        j["y"] = c.y;
        rows.push_back(j);
        out.flagged |= e.flagged;
    }
    out.results["estimates"] = rows;
    return out;
}

Output run_deltadw(const Config& c)
{
    if (c.max_stages < 1) throw std::invalid_argument("--max-stages must be at least 1");
    Output out;
    out.columns = {"delta", "stage", "at_risk", "terminated", "hazard", "std_err"};
    ordered_json rows = ordered_json::array();
    std::vector<std::pair<double, double>> c1s;
    for (double d : c.delta) {
        if (!(d > 0 && d < 1)) throw std::invalid_argument("--delta must lie in (0, 1)");
        std::vector<DeltaStageCount> res(c.trials);
        parallel_for(c.trials, c.threads, [&](std::size_t i) {
            PathParams p;
            p.seed = hash_key(c.seed, i);
            p.node_budget = c.node_budget;
            res[i] = delta_dw_stage_count(p, d, c.max_stages);
        });
        std::size_t horizon = 0;
        std::vector<std::size_t> at_risk(c.max_stages, 0), term(c.max_stages, 0);
        for (const auto& r : res) {
            if (r.status == DWStatus::horizon) {
                ++horizon;
                continue;
            }
            for (std::size_t k = 0; k < r.exits.size(); ++k) {
                ++at_risk[k];
                term[k] += r.exits[k] == DeltaExit::terminal;
            }
        }
        ordered_json j;
        j["delta"] = d;
        j["horizon"] = horizon;
        ordered_json stages = ordered_json::array();
        for (int k = 0; k < c.max_stages; ++k) {
            const double n = static_cast<double>(at_risk[k]);
            const double h = n > 0 ? term[k] / n : 0.0;
            const double se = n > 0 ? std::sqrt(h * (1 - h) / n) : 0.0;
            out.rows.push_back({num(d), std::to_string(k + 1), std::to_string(at_risk[k]),
                                std::to_string(term[k]), num(h), num(se)});
            stages.push_back({{"stage", k + 1}, {"at_risk", at_risk[k]}, {"terminated", term[k]},
                              {"hazard", h}, {"std_err", se}});
        }
        j["stages"] = stages;
        const double c1 = at_risk[0] ? term[0] / static_cast<double>(at_risk[0]) : 0.0;
        j["one_stage_termination"] = c1;
        rows.push_back(j);
        c1s.push_back({d, c1});
        out.flagged |= horizon * 1000 > c.trials;
    }
    out.results["deltas"] = rows;
    std::sort(c1s.begin(), c1s.end());
    bool monotone = true;
    for (std::size_t k = 1; k < c1s.size(); ++k) monotone &= c1s[k - 1].second > c1s[k].second;
    if (c1s.size() >= 2)
        out.checks.push_back({"termination_grows_as_delta_shrinks", monotone, 0, 0, 0});
    return out;
}

Output run_robustness(const Config& c)
{
    const double x0 = c.x0.front();
    if (!(x0 > 0 && x0 < 1)) throw std::invalid_argument("robustness --x0 must lie in (0, 1)");
    for (double v : c.v)
        if (!(v >= 1)) throw std::invalid_argument("--v must be at least 1");
    struct Trial {
        bool horizon = false, reached = false;
        std::vector<std::array<bool, 12>> pass;  // per v: all, R1..R7 parts
    };
    std::vector<Trial> res(c.trials);
    const McOptions o = mc(c);
    parallel_for(c.trials, c.threads, [&](std::size_t i) {
        ABMField f = trial_field(o, i);
        auto r = dw_run(f, x0, {0, 0}, StopRule::at_level(1.0));
        Trial& t = res[i];
        t.horizon = r.status == DWStatus::horizon;
        t.reached = r.status == DWStatus::reached_level;
        if (!t.reached) return;
        const auto eps = decompose_episodes(r);
        for (double v : c.v) {
            const auto rep = check_robustness(r, eps, v, c.k0);
            t.pass.push_back({rep.all(), rep.r1.pass, rep.r2.pass, rep.r3.pass, rep.r4.pass,
                              rep.r5a_avoid.pass, rep.r5a_robust.pass, rep.r5b.pass,
                              rep.r6a_avoid.pass, rep.r6a_robust.pass, rep.r6b.pass, rep.r7.pass});
        }
    });
    static const char* names[] = {"all", "r1", "r2", "r3", "r4", "r5a_avoid", "r5a_robust",
                                  "r5b", "r6a_avoid", "r6a_robust", "r6b", "r7"};
    std::size_t reached = 0, horizon = 0;
    for (const auto& t : res) {
        reached += t.reached;
        horizon += t.horizon;
    }
    Output out;
    out.columns = {"v", "property", "reached", "passed", "rate"};
    ordered_json rows = ordered_json::array();
    for (std::size_t k = 0; k < c.v.size(); ++k) {
        ordered_json j;
        j["v"] = c.v[k];
        for (int p = 0; p < 12; ++p) {
            std::size_t n = 0;
            for (const auto& t : res)
                if (t.reached) n += t.pass[k][p];
            const double rate = reached ? static_cast<double>(n) / reached : 0.0;
            out.rows.push_back({num(c.v[k]), names[p], std::to_string(reached), std::to_string(n), num(rate)});
            j[names[p]] = n;
        }
        rows.push_back(j);
    }
    out.results["x0"] = x0;
    out.results["k0"] = c.k0;
    out.results["reached"] = reached;
    out.results["horizon"] = horizon;
    out.results["passed"] = rows;
    out.flagged = horizon * 1000 > c.trials;
    return out;
}

Output run_dimension(const Config& c)
{
    if (c.grid_n < 2 || c.grid_n > max_grid_side) throw std::invalid_argument("--grid-n out of range");
    if (!(c.extent > 0)) throw std::invalid_argument("--extent must be positive");
    const SheetGrid g = simulate_sheet(c.grid_n, c.extent, c.extent, c.seed);
    if (!c.grid_out.empty()) {
        std::ofstream os(c.grid_out, std::ios::binary);
        if (!os) throw std::invalid_argument("cannot write " + c.grid_out);
        write_grid_binary(os, g);
    }
    const int count = static_cast<int>(std::min<std::size_t>(c.trials, 1u << 20));
    const auto bubbles = sample_bubble_dimensions(g, c.q, count, c.min_extent, c.seed);
    Output out;
    out.columns = {"bubble", "anchor_i", "anchor_j", "area", "boundary", "scale", "count", "in_fit", "slope"};
    ordered_json rows = ordered_json::array();
    double sum = 0;
    for (std::size_t b = 0; b < bubbles.size(); ++b) {
        const BubbleDim& bd = bubbles[b];
        for (std::size_t k = 0; k < bd.dim.scales.size(); ++k) {
            const bool in = static_cast<int>(k) >= bd.dim.fit_lo && static_cast<int>(k) <= bd.dim.fit_hi;
            out.rows.push_back({std::to_string(b), std::to_string(bd.anchor.i), std::to_string(bd.anchor.j),
                                std::to_string(bd.area), std::to_string(bd.boundary),
                                std::to_string(bd.dim.scales[k]), std::to_string(bd.dim.counts[k]),
                                in ? "1" : "0", num(bd.dim.slope)});
        }
        rows.push_back({{"anchor", {bd.anchor.i, bd.anchor.j}},
                        {"area", bd.area},
                        {"boundary", bd.boundary},
                        {"scales", bd.dim.scales},
                        {"counts", bd.dim.counts},
                        {"fit", {bd.dim.fit_lo, bd.dim.fit_hi}},
                        {"slope", bd.dim.slope},
                        {"r2", bd.dim.r2}});
        sum += bd.dim.slope;
    }
    out.results["bubbles"] = rows;
    out.results["mean_slope"] = bubbles.empty() ? 0.0 : sum / bubbles.size();
    out.results["theory"] = dimension_constant();
    return out;
}

void write(std::ostream& os, const Config& c, const Output& o)
{
    if (c.format == "json") {
        ordered_json j;
        j["version"] = version;
        j["command"] = command_line(c);
        j["config"] = config_json(c);
        j["results"] = o.results;
        ordered_json checks = ordered_json::array();
        for (const auto& k : o.checks)
            checks.push_back({{"name", k.name}, {"pass", k.pass}, {"value", k.value},
                              {"target", k.target}, {"tol", k.tol}});
        j["checks"] = checks;
        os << j.dump(2) << '\n';
        return;
    }
    os << "# " << version << '\n';
    os << "# command: " << command_line(c) << '\n';
    os << "# config: " << config_json(c).dump() << '\n';
    for (const auto& k : o.checks)
        os << "# check " << k.name << ' ' << (k.pass ? "PASS" : "FAIL") << " value=" << num(k.value)
           << " target=" << num(k.target) << " tol=" << num(k.tol) << '\n';
    for (std::size_t i = 0; i < o.columns.size(); ++i) os << (i ? "," : "") << o.columns[i];
    os << '\n';
    for (const auto& r : o.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
}

} // namespace

int main(int argc, char** argv)
{
    Config c;
    CLI::App app{"Simulation and analysis of the DW-algorithm for additive Brownian motion"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    auto common = [&](CLI::App* s, bool mc_opts, bool paths = true) {
        s->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
        s->add_option("--out", c.out, "Output file (default stdout)");
        if (mc_opts) {
            s->add_option("--seed", c.seed, "Experiment seed");
            s->add_option("--trials", c.trials, "Number of trials")->check(CLI::PositiveNumber);
            if (paths)
                s->add_option("--node-budget", c.node_budget, "Path refinement budget per trial")
                    ->check(CLI::PositiveNumber);
            s->add_option("--threads", c.threads, "Worker threads (0: DWABM_THREADS or all cores)")
                ->check(CLI::NonNegativeNumber);
        }
    };

    auto* analytic = app.add_subcommand("analytic", "Eigen system, coefficients, E(x) and the dimension constant");
    common(analytic, false);
    analytic->add_option("--x0", c.x0, "Points at which to evaluate E");

    auto* gambler = app.add_subcommand("gambler", "Monte Carlo gambler's ruin for the DW-algorithm");
    common(gambler, true);
    gambler->add_option("--x0", c.x0, "Starting values in (0, 1)")->required();

    auto* chain = app.add_subcommand("chain", "Absorption frequency of the (H_{n-1}, H_n) chain");
    common(chain, true, false);
    chain->add_option("--x0", c.x0, "First coordinates x")->required();
    chain->add_option("--y", c.y, "Second coordinate y");

    auto* escape = app.add_subcommand("escape", "Escape from [-a, a]^2 before termination");
    common(escape, true);
    escape->add_option("--x0", c.x0, "Starting values")->required();
    escape->add_option("--a", c.a, "Half side of the escape square");

    auto* lescape = app.add_subcommand("level-escape", "Escape from [-x^2, x^2]^2 before level y, from value 1");
    common(lescape, true);
    lescape->add_option("--x0", c.x0, "Values of x (>= 1)")->required();
    lescape->add_option("--y", c.y, "Level y (>= 1)");

    auto* delta = app.add_subcommand("deltadw", "Stage counts of the delta-DW-algorithm");
    common(delta, true);
    delta->add_option("--delta", c.delta, "Values of delta in (0, 1)");
    delta->add_option("--max-stages", c.max_stages, "Stages simulated per trial");

    auto* robust = app.add_subcommand("robustness", "Robustness properties of runs that reach level 1");
    common(robust, true);
    robust->add_option("--x0", c.x0, "Starting value (default 1/16)")->expected(1);
    robust->add_option("--v", c.v, "Robustness parameters (>= 1)");
    robust->add_option("--k0", c.k0, "Order threshold");

    auto* dim = app.add_subcommand("dimension", "Box dimension of Brownian sheet bubble boundaries");
    common(dim, true, false);
    dim->add_option("--grid-n", c.grid_n, "Lattice side");
    dim->add_option("--extent", c.extent, "Side of the square domain");
    dim->add_option("--q", c.q, "Level");
    dim->add_option("--min-extent", c.min_extent, "Smallest bubble extent in cells");
    dim->add_option("--grid-out", c.grid_out, "Also write the grid in binary form");
    dim->get_option("--trials")->default_str("1")->description("Number of bubbles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return invalid;
    }
    c.subcommand = app.get_subcommands().front()->get_name();
    if (c.subcommand == "dimension" && dim->count("--trials") == 0) c.trials = 1;
    if (c.subcommand == "robustness" && c.x0.empty()) c.x0 = {1.0 / 16};
    if (c.subcommand == "chain" || c.subcommand == "gambler" || c.subcommand == "escape" ||
        c.subcommand == "level-escape") {
        if (c.x0.empty()) {
            std::cerr << "--x0 is required\n";
            return invalid;
        }
    }

    Output out;
    try {
        if (c.subcommand == "analytic") out = run_analytic(c);
        else if (c.subcommand == "gambler") out = run_gambler(c);
        else if (c.subcommand == "chain") out = run_chain(c);
        else if (c.subcommand == "escape") out = run_escape(c);
        else if (c.subcommand == "level-escape") out = run_level_escape(c);
        else if (c.subcommand == "deltadw") out = run_deltadw(c);
        else if (c.subcommand == "robustness") out = run_robustness(c);
        else out = run_dimension(c);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return invalid;
    }

    if (c.out.empty()) {
        write(std::cout, c, out);
    } else {
        std::ostringstream buf;
        write(buf, c, out);
        std::ofstream os(c.out, std::ios::binary);
        if (!(os << buf.str())) {
            std::cerr << "cannot write " << c.out << '\n';
            return invalid;
        }
    }
    if (out.flagged) {
        std::cerr << "more than 0.1% of trials hit the simulation horizon\n";
        return horizon_dominated;
    }
    return ok;
}
