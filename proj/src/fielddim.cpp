#include "dwabm/fielddim.hpp"

#include "dwabm/estimators.hpp"
#include "dwabm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace dwabm {

namespace {

void check_side(int n)
{
    if (n < 2) throw std::invalid_argument("grid side must be at least 2");
    if (n > max_grid_side) throw std::invalid_argument("grid side exceeds the memory guard");
}

std::size_t idx(int n, int i, int j) { return static_cast<std::size_t>(i) * n + j; }

} // namespace

std::size_t Mask::count() const
{
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

SheetGrid simulate_sheet(int n, double S1, double S2, std::uint64_t seed)
{
    check_side(n);
    if (!(S1 > 0 && S2 > 0)) throw std::invalid_argument("extent must be positive");
    SheetGrid g;
    g.n = n;
    g.S1 = S1;
    g.S2 = S2;
    g.kind = GridKind::sheet;
    g.seed = seed;
    g.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    const double sd = std::sqrt(S1 / (n - 1) * (S2 / (n - 1)));
    std::vector<double> row(n, 0.0);  // running column sums of the noise
    for (int i = 1; i < n; ++i) {
        double acc = 0;
        for (int j = 1; j < n; ++j) {
            const std::uint64_t cell = static_cast<std::uint64_t>(i - 1) * (n - 1) + (j - 1);
            acc += sd * normal_from_key(hash_key(seed, cell));
            row[j] += acc;
            g.values[idx(n, i, j)] = row[j];
        }
    }
    return g;
}

SheetGrid simulate_abm_grid(int n, double S1, double S2, std::uint64_t seed)
{
    check_side(n);
    if (!(S1 > 0 && S2 > 0)) throw std::invalid_argument("extent must be positive");
    SheetGrid g;
    g.n = n;
    g.S1 = S1;
    g.S2 = S2;
    g.kind = GridKind::abm;
    g.seed = seed;
    std::vector<double> z1(n, 0.0), z2(n, 0.0);
    const double s1 = std::sqrt(S1 / (n - 1)), s2 = std::sqrt(S2 / (n - 1));
    for (int i = 1; i < n; ++i) {
        z1[i] = z1[i - 1] + s1 * normal_from_key(hash_key(seed, 1, i));
        z2[i] = z2[i - 1] + s2 * normal_from_key(hash_key(seed, 2, i));
    }
    g.values.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g.values[idx(n, i, j)] = z1[i] - z2[j];
    return g;
}

SheetGrid grid_from_values(int n, std::vector<double> values)
{
    if (n < 1 || n > max_grid_side) throw std::invalid_argument("bad grid side");
    if (values.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("value count does not match n*n");
    SheetGrid g;
    g.n = n;
    g.kind = GridKind::injected;
    g.values = std::move(values);
    return g;
}

// ---------------------------------------------------------------------------
// components

Labeling label_components(const SheetGrid& g, double q)
{
    const int n = g.n;
    const std::size_t N = static_cast<std::size_t>(n) * n;
    std::vector<std::int32_t> parent(N, -1);
    auto find = [&](std::int32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    auto unite = [&](std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) std::swap(a, b);
        parent[a] = b;  // the smaller index is the root
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t c = idx(n, i, j);
            if (!(g.values[c] > q)) continue;
            parent[c] = static_cast<std::int32_t>(c);
            if (i > 0 && parent[c - n] >= 0) unite(static_cast<std::int32_t>(c), static_cast<std::int32_t>(c - n));
            if (j > 0 && parent[c - 1] >= 0) unite(static_cast<std::int32_t>(c), static_cast<std::int32_t>(c - 1));
        }
    }
    Labeling lab;
    lab.n = n;
    lab.q = q;
    lab.label.assign(N, -1);
    std::vector<std::int32_t> id_of_root(N, -1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const std::size_t c = idx(n, i, j);
            if (parent[c] < 0) continue;
            const std::int32_t r = find(static_cast<std::int32_t>(c));
            std::int32_t& id = id_of_root[r];
            if (id < 0) {
                id = static_cast<std::int32_t>(lab.comps.size());
                ComponentInfo info;
                info.imin = info.imax = i;
                info.jmin = info.jmax = j;
                lab.comps.push_back(info);
            }
            lab.label[c] = id;
            ComponentInfo& info = lab.comps[id];
            ++info.area;
            info.imin = std::min(info.imin, i);
            info.imax = std::max(info.imax, i);
            info.jmin = std::min(info.jmin, j);
            info.jmax = std::max(info.jmax, j);
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1) info.touches_edge = true;
        }
    }
    return lab;
}

ComponentMask component_mask(const Labeling& lab, std::int32_t id, Cell anchor)
{
    if (id < 0 || id >= static_cast<std::int32_t>(lab.comps.size()))
        throw std::invalid_argument("unknown component");
    ComponentMask cm;
    cm.mask = Mask(lab.n);
    cm.anchor = anchor;
    cm.q = lab.q;
    const ComponentInfo& info = lab.comps[id];
    for (int i = info.imin; i <= info.imax; ++i)
        for (int j = info.jmin; j <= info.jmax; ++j)
            if (lab.at(i, j) == id) cm.mask.set(i, j);
    cm.area = info.area;
    cm.touches_edge = info.touches_edge;
    return cm;
}

ComponentMask extract_bubble(const SheetGrid& g, double q, Cell anchor)
{
    if (anchor.i < 0 || anchor.j < 0 || anchor.i >= g.n || anchor.j >= g.n)
        throw std::invalid_argument("anchor outside the grid");
    if (!(g.at(anchor.i, anchor.j) > q)) throw std::invalid_argument("anchor is not above the level");
    const Labeling lab = label_components(g, q);
    return component_mask(lab, lab.at(anchor.i, anchor.j), anchor);
}

BoundaryMask boundary_cells(const Mask& m)
{
    const int n = m.n;
    BoundaryMask b;
    b.mask = Mask(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!m.get(i, j)) continue;
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1) b.edge = true;
            const bool out = (i > 0 && !m.get(i - 1, j)) || (i + 1 < n && !m.get(i + 1, j)) ||
                             (j > 0 && !m.get(i, j - 1)) || (j + 1 < n && !m.get(i, j + 1));
            if (out) {
                b.mask.set(i, j);
                ++b.count;
            }
        }
    }
    return b;
}

std::vector<std::size_t> box_count(const Mask& m, const std::vector<int>& scales)
{
    const int n = m.n;
    for (int s : scales)
        if (s < 1 || n % s != 0) throw std::invalid_argument("box scale must divide the grid side");
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (m.get(i, j)) cells.emplace_back(i, j);
    std::vector<std::size_t> counts;
    std::vector<std::uint64_t> keys(cells.size());
    for (int s : scales) {
        const std::uint64_t w = static_cast<std::uint64_t>(n / s);
        for (std::size_t k = 0; k < cells.size(); ++k)
            keys[k] = static_cast<std::uint64_t>(cells[k].first / s) * w +
                      static_cast<std::uint64_t>(cells[k].second / s);
        std::sort(keys.begin(), keys.end());
        counts.push_back(static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin()));
    }
    return counts;
}

DimEstimate estimate_dimension(const Mask& m, const std::vector<int>& scales,
                               const FitPolicy& policy)
{
    DimEstimate d;
    d.scales = scales;
    d.counts = box_count(m, scales);
    if (d.counts.empty() || d.counts.front() == 0) throw std::invalid_argument("empty mask");
    d.fit_lo = policy.drop_fine;
    d.fit_hi = static_cast<int>(scales.size()) - 1 - policy.drop_coarse;
    if (d.fit_hi - d.fit_lo + 1 < 3) throw std::invalid_argument("too few scales for a dimension fit");
    std::vector<FitPoint> pts;
    for (int k = d.fit_lo; k <= d.fit_hi; ++k)
        pts.push_back(log_point(1.0 / scales[k], static_cast<double>(d.counts[k])));
    const ScalingFit f = scaling_fit(pts);
    d.slope = f.slope;
    d.r2 = f.r2;
    return d;
}

DimEstimate estimate_dimension(const Mask& m, const FitPolicy& policy)
{
    int imin = m.n, imax = -1, jmin = m.n, jmax = -1;
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j)
            if (m.get(i, j)) {
                imin = std::min(imin, i);
                imax = std::max(imax, i);
                jmin = std::min(jmin, j);
                jmax = std::max(jmax, j);
            }
    if (imax < 0) throw std::invalid_argument("empty mask");
    const int extent = std::max(imax - imin, jmax - jmin) + 1;
    std::vector<int> scales;
    for (int s = 1; s <= std::min(m.n, extent) && m.n % s == 0; s *= 2) scales.push_back(s);
    return estimate_dimension(m, scales, policy);
}

// ---------------------------------------------------------------------------
// calibration patterns

Mask sierpinski_carpet(int depth)
{
    if (depth < 0 || depth > 8) throw std::invalid_argument("carpet depth must lie in [0, 8]");
    int n = 1;
    for (int k = 0; k < depth; ++k) n *= 3;
    Mask m(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            bool in = true;
            for (int a = i, b = j; a > 0 || b > 0; a /= 3, b /= 3)
                if (a % 3 == 1 && b % 3 == 1) {
                    in = false;
                    break;
                }
            m.set(i, j, in);
        }
    }
    return m;
}

Mask line_mask(int n)
{
    Mask m(n);
    for (int j = 0; j < n; ++j) m.set(n / 2, j);
    return m;
}

Mask square_mask(int n)
{
    Mask m(n);
    std::fill(m.bits.begin(), m.bits.end(), std::uint8_t{1});
    return m;
}

Mask disk_mask(int n, double radius)
{
    Mask m(n);
    const double c = 0.5 * (n - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if ((i - c) * (i - c) + (j - c) * (j - c) <= radius * radius) m.set(i, j);
    return m;
}

// ---------------------------------------------------------------------------
// bubble sampling

std::vector<Cell> candidate_anchors(const SheetGrid& g, double q, std::uint64_t seed)
{
    std::vector<double> gap;
    for (double v : g.values)
        if (v > q) gap.push_back(v - q);
    if (gap.empty()) return {};
    std::vector<double> sorted = gap;
    const std::size_t k1 = sorted.size() / 4, k3 = (3 * sorted.size()) / 4;
    std::nth_element(sorted.begin(), sorted.begin() + k1, sorted.end());
    const double lo = sorted[k1];
    std::nth_element(sorted.begin(), sorted.begin() + k3, sorted.end());
    const double hi = sorted[std::min(k3, sorted.size() - 1)];
    std::vector<Cell> out;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const double v = g.at(i, j) - q;
            if (v > 0 && v >= lo && v <= hi) out.push_back({i, j});
        }
    // Fisher-Yates with the counter stream, so the order is portable
    CounterRng rng(seed, 0xa11c);
    for (std::size_t k = out.size(); k > 1; --k) {
        const auto r = static_cast<std::size_t>(rng.uniform() * static_cast<double>(k));
        std::swap(out[k - 1], out[std::min(r, k - 1)]);
    }
    return out;
}

std::vector<BubbleDim> sample_bubble_dimensions(const SheetGrid& g, double q, int count,
                                                int min_extent, std::uint64_t seed,
                                                const FitPolicy& policy)
{
    // at least three dyadic scales must survive the policy
    if (count < 0 || min_extent < (4 << (policy.drop_fine + policy.drop_coarse)))
        throw std::invalid_argument("min_extent too small for the fit policy");
    const Labeling lab = label_components(g, q);
    std::vector<char> seen(lab.comps.size(), 0);
    std::vector<BubbleDim> out;
    for (const Cell& a : candidate_anchors(g, q, seed)) {
        if (static_cast<int>(out.size()) >= count) break;
        const std::int32_t id = lab.at(a.i, a.j);
        if (seen[id]) continue;
        seen[id] = 1;
        const ComponentInfo& info = lab.comps[id];
        if (info.touches_edge) continue;
        const int extent = std::max(info.imax - info.imin, info.jmax - info.jmin) + 1;
        if (extent < min_extent) continue;
        const ComponentMask cm = component_mask(lab, id, a);
        const BoundaryMask b = boundary_cells(cm.mask);
        BubbleDim bd;
        bd.anchor = a;
        bd.area = cm.area;
        bd.boundary = b.count;
        bd.dim = estimate_dimension(b.mask, policy);
        out.push_back(std::move(bd));
    }
    return out;
}

// ---------------------------------------------------------------------------
// exports

void write_counts_csv(std::ostream& os, const DimEstimate& d)
{
    os << "scale,count,in_fit\n";
    for (std::size_t k = 0; k < d.scales.size(); ++k) {
        const int in = static_cast<int>(k) >= d.fit_lo && static_cast<int>(k) <= d.fit_hi;
        os << d.scales[k] << ',' << d.counts[k] << ',' << in << '\n';
    }
}

void write_mask_csv(std::ostream& os, const Mask& m)
{
    os << "i,j\n";
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j)
            if (m.get(i, j)) os << i << ',' << j << '\n';
}

namespace {

constexpr char grid_magic[4] = {'D', 'W', 'S', 'G'};

template <class T>
void put(std::ostream& os, T v)
{
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is)
{
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw std::runtime_error("truncated grid file");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace

void write_grid_binary(std::ostream& os, const SheetGrid& g)
{
    os.write(grid_magic, 4);
    put<std::int32_t>(os, g.n);
    put<float>(os, static_cast<float>(g.S1));
    put<float>(os, static_cast<float>(g.S2));
    for (double v : g.values) put<double>(os, v);
}

SheetGrid read_grid_binary(std::istream& is)
{
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, grid_magic, 4) != 0)
        throw std::runtime_error("not a grid file");
    const int n = get<std::int32_t>(is);
    if (n < 1 || n > max_grid_side) throw std::runtime_error("bad grid side in file");
    const double S1 = get<float>(is), S2 = get<float>(is);
    std::vector<double> v(static_cast<std::size_t>(n) * n);
    for (double& x : v) x = get<double>(is);
    SheetGrid g = grid_from_values(n, std::move(v));
    g.S1 = S1;
    g.S2 = S2;
    return g;
}

// ---------------------------------------------------------------------------
// local decomposition

LocalTerms local_decomposition(const Field2& W, double u1, double u2)
{
    const double w11 = W(1, 1);
    const double a = u1 >= 0 ? 1 + u1 : 1 / (1 - u1);
    const double b = u2 >= 0 ? 1 + u2 : 1 / (1 - u2);
    auto rect = [&](double s0, double s1, double t0, double t1) {
        return W(s1, t1) - W(s0, t1) - W(s1, t0) + W(s0, t0);
    };
    LocalTerms r;
    r.s1 = a;
    r.s2 = b;
    const double z1 = u1 >= 0 ? W(a, 1) - w11 : (1 - u1) * W(a, 1) - w11;
    const double z2 = u2 >= 0 ? W(1, b) - w11 : (1 - u2) * W(1, b) - w11;
    r.abm = z1 + z2;
    if (u1 >= 0 && u2 >= 0) {
        r.error = rect(1, a, 1, b);
    } else if (u1 < 0 && u2 >= 0) {
        r.error = -rect(a, 1, 1, b) + u1 * W(a, 1);
    } else if (u1 < 0) {
        r.error = rect(a, 1, b, 1) + u1 * W(a, 1) + u2 * W(1, b);
    } else {
        r.error = -rect(1, a, b, 1) + u2 * W(1, b);
    }
    return r;
}

} // namespace dwabm
