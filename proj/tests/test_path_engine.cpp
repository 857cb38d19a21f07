#include "doctest.h"

#include "dwabm/path_engine.hpp"
#include "dwabm/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace dwabm;

namespace {

BMPath bm(std::uint64_t seed)
{
    PathParams p;
    p.seed = seed;
    return BMPath::brownian(p);
}

struct Moments {
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    void add(double x, double y)
    {
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    double var_x() const { return sxx / n - (sx / n) * (sx / n); }
    double var_y() const { return syy / n - (sy / n) * (sy / n); }
    double corr() const
    {
        return (sxy / n - sx / n * sy / n) / std::sqrt(var_x() * var_y());
    }
};

} // namespace

TEST_CASE("new path starts at zero and validates step sizes")
{
    BMPath p = new_bm(1, 1e-4, 1e-8);
    CHECK(p.sample_at(0.0) == 0.0);
    CHECK_THROWS_AS(new_bm(1, 0.0, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(new_bm(1, 1e-4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(new_bm(1, 1e-4, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(new_bm(1, -1e-4, 1e-8), std::invalid_argument);
}

TEST_CASE("values are a pure function of seed and time")
{
    BMPath a = new_bm(11, 1e-4, 1e-8), b = new_bm(11, 1e-4, 1e-8);
    const std::vector<double> ts{0.3, -2.5, 1e-5, 17.0, -1e-7, 0.3};
    std::vector<double> va, vb;
    for (double t : ts) va.push_back(a.sample_at(t));
    for (auto it = ts.rbegin(); it != ts.rend(); ++it) vb.push_back(b.sample_at(*it));
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(va[i] == vb[ts.size() - 1 - i]);
    CHECK(a.sample_at(0.3) == a.sample_at(0.3));
    CHECK(new_bm(12, 1e-4, 1e-8).sample_at(0.3) != va[0]);
}

TEST_CASE("refinement never changes returned values")
{
    BMPath p = bm(5);
    std::vector<double> ts, before;
    for (int i = -20; i <= 20; ++i) ts.push_back(0.037 * i);
    for (double t : ts) before.push_back(p.sample_at(t));
    p.sup_on_interval(-0.5, 0.5);
    p.scan(0.0, +1, -0.3, 0.3);
    p.scan(0.0, -1, -0.3, 0.3);
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(p.sample_at(ts[i]) == before[i]);
}

TEST_CASE("cached knots start at the origin and grow in |t|")
{
    BMPath p = bm(2);
    p.sample_at(3.0);
    p.sample_at(-0.5);
    for (int side : {0, 1}) {
        const auto k = p.knots(side);
        REQUIRE(k.size() >= 2);
        CHECK(k[0].first == 0.0);
        CHECK(k[0].second == 0.0);
        for (std::size_t i = 1; i < k.size(); ++i)
            CHECK(std::abs(k[i].first) > std::abs(k[i - 1].first));
    }
}

TEST_CASE("variance at t = 1 and increment structure")
{
    const int N = 10000;
    double s = 0, ss = 0;
    Moments inc, disj;
    for (int i = 0; i < N; ++i) {
        BMPath p = bm(1000 + i);
        const double v = p.sample_at(1.0);
        s += v;
        ss += v * v;
        const double a = p.sample_at(0.2), b = p.sample_at(0.7), c = p.sample_at(-0.4);
        inc.add(b - a, c);   // gaps 0.5 and 0.4
        disj.add(a, b - a);  // disjoint increments
    }
    const double var = ss / N - (s / N) * (s / N);
    CHECK(std::abs(var - 1.0) < 0.05);
    CHECK(std::abs(inc.var_x() / 0.5 - 1.0) < 0.05);
    CHECK(std::abs(inc.var_y() / 0.4 - 1.0) < 0.05);
    CHECK(std::abs(disj.corr()) < 3.0 / std::sqrt(N));
    CHECK(std::abs(inc.corr()) < 3.0 / std::sqrt(N));
}

TEST_CASE("injected increments: crossing and supremum")
{
    const double h = 1e-4;
    BMPath p = BMPath::injected(h, {1, 1, 1, 1, 1});
    const auto r = p.first_crossing(0.0, +1, -1.0, 2.5);
    REQUIRE(r.crossed());
    CHECK(r.event.level_hit == LevelHit::upper);
    CHECK(r.event.value == 2.5);
    CHECK(r.event.time > 2 * h);
    CHECK(r.event.time <= 3 * h);

    BMPath q = BMPath::injected(h, {1, 2, -1});
    const auto e = q.sup_on_interval(0, 3 * h);
    CHECK(e.value == doctest::Approx(3.0));
    CHECK(e.time == doctest::Approx(2 * h));
    const auto d = q.sup_on_interval(1.5 * h, 1.5 * h);
    CHECK(d.value == q.sample_at(1.5 * h));
    CHECK(d.time == 1.5 * h);
}

TEST_CASE("first crossing rejects a start on a level")
{
    BMPath p = BMPath::injected(1e-4, {1, 1, 1});
    CHECK_THROWS_AS(p.first_crossing(0.0, +1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(p.first_crossing(1e-4, +1, -1.0, 1.0), std::invalid_argument);
    // scan treats it as an immediate crossing
    CHECK(p.scan(0.0, +1, 0.0, 1.0).crossed());
}

TEST_CASE("scans report horizon and time limits explicitly")
{
    BMPath p = BMPath::injected(1e-4, {0.1, 0.1});
    CHECK(p.scan(0.0, +1, -1.0, 1.0).status == ScanStatus::horizon);
    BMPath b = bm(3);
    const auto r = b.scan(0.0, +1, -100.0, 100.0, 1e-3);
    CHECK(r.status == ScanStatus::time_limit);
    CHECK(r.event.time == 1e-3);
    PathParams tiny;
    tiny.node_budget = 10;
    BMPath c = BMPath::brownian(tiny);
    CHECK(c.scan(0.0, +1, -1.0, 1.0).status == ScanStatus::horizon);
}

TEST_CASE("crossing values are clamped and times bracket the sign change")
{
    for (std::uint64_t s = 0; s < 200; ++s) {
        BMPath p = bm(77 + s);
        const int dir = s % 2 ? 1 : -1;
        const auto r = p.first_crossing(0.0, dir, -0.1, 0.2);
        REQUIRE(r.crossed());
        CHECK((r.event.value == -0.1 || r.event.value == 0.2));
        const double v = p.sample_at(r.event.time);
        CHECK(std::abs(v - r.event.value) < 1e-9);
        // strictly inside just before the crossing
        const double back = r.event.time - dir * 1e-6;
        if (dir * back > 0) {
            const double w = p.sample_at(back);
            CHECK((w > -0.1 - 1e-9 && w < 0.2 + 1e-9));
        }
    }
}

TEST_CASE("gambler's ruin for one Brownian motion")
{
    struct Case {
        double a, b;
    };
    for (const Case c : {Case{0.3, 0.7}, Case{1, 1}, Case{1, 3}}) {
        const int N = c.a == 0.3 ? 100000 : 20000;
        int up = 0;
        for (int i = 0; i < N; ++i) {
            BMPath p = bm(hash_key(static_cast<std::uint64_t>(c.b * 10), i));
            const auto r = p.first_crossing(0.0, i % 2 ? 1 : -1, -c.a, c.b);
            REQUIRE(r.crossed());
            up += r.event.level_hit == LevelHit::upper;
        }
        const double p = c.a / (c.a + c.b);
        const double phat = static_cast<double>(up) / N;
        CHECK(std::abs(phat - p) < 3 * std::sqrt(p * (1 - p) / N));
    }
}

TEST_CASE("mean supremum on [0,1] matches the reflection principle")
{
    const int N = 10000;
    double s = 0;
    for (int i = 0; i < N; ++i) {
        BMPath p = bm(5000 + i);
        const auto e = p.sup_on_interval(0.0, 1.0);
        CHECK(e.value >= p.sample_at(1.0));
        s += e.value;
    }
    CHECK(std::abs(s / N / std::sqrt(2 / std::numbers::pi) - 1.0) < 0.02);
}

TEST_CASE("supremum agrees with a dense scan")
{
    for (std::uint64_t k = 0; k < 20; ++k) {
        BMPath p = bm(300 + k);
        const double t0 = -0.05, t1 = 0.08;
        const auto e = p.sup_on_interval(t0, t1);
        double dense = -inf;
        for (int i = 0; i <= 13000; ++i) dense = std::max(dense, p.sample_at(t0 + (t1 - t0) * i / 13000));
        CHECK(e.value >= dense);
        CHECK(e.value - dense < 0.015);  // grid spacing 1e-5
        CHECK(p.sample_at(e.time) == doctest::Approx(e.value).epsilon(1e-12));
        const auto m = p.inf_on_interval(t0, t1);
        CHECK(m.value <= e.value);
    }
}

TEST_CASE("ABM values and rectangular increments")
{
    PathParams pp;
    pp.seed = 9;
    ABMField f = new_abm(pp);
    CHECK(abm_value(f, 0, 0) == 0.0);
    CounterRng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const double s1 = 4 * rng.uniform() - 2, s2 = 4 * rng.uniform() - 2;
        const double t1 = 4 * rng.uniform() - 2, t2 = 4 * rng.uniform() - 2;
        CHECK(abm_value(f, s1, s2) == f.z1.sample_at(s1) - f.z2.sample_at(s2));
        const double d = abm_value(f, s1, s2) + abm_value(f, t1, t2) - abm_value(f, s1, t2) -
                         abm_value(f, t1, s2);
        CHECK(std::abs(d) < 1e-14);
    }
}
