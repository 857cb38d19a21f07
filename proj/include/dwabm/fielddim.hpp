#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dwabm {

enum class GridKind { sheet, abm, injected };

// Lattice values at s = (i * S1 / (n-1), j * S2 / (n-1)), row-major in i.
struct SheetGrid {
    int n = 0;
    double S1 = 1, S2 = 1;
    GridKind kind = GridKind::injected;
    std::uint64_t seed = 0;
    std::vector<double> values;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
};

// Largest accepted lattice side (memory guard).
inline constexpr int max_grid_side = 16384;

SheetGrid simulate_sheet(int n, double S1, double S2, std::uint64_t seed);
SheetGrid simulate_abm_grid(int n, double S1, double S2, std::uint64_t seed);
SheetGrid grid_from_values(int n, std::vector<double> values);

struct Cell {
    int i = 0;
    int j = 0;
};

// n x n bitmask
struct Mask {
    int n = 0;
    std::vector<std::uint8_t> bits;

    explicit Mask(int side = 0) : n(side), bits(static_cast<std::size_t>(side) * side, 0) {}
    bool get(int i, int j) const { return bits[static_cast<std::size_t>(i) * n + j] != 0; }
    void set(int i, int j, bool v = true) { bits[static_cast<std::size_t>(i) * n + j] = v; }
    std::size_t count() const;
};

struct ComponentMask {
    Mask mask;
    Cell anchor;
    double q = 0;
    std::size_t area = 0;
    bool touches_edge = false;
};

struct ComponentInfo {
    std::size_t area = 0;
    int imin = 0, imax = 0, jmin = 0, jmax = 0;
    bool touches_edge = false;
};

// 4-connected components of {value > q} by union-find; label -1 marks cells
// at or below q.
struct Labeling {
    int n = 0;
    double q = 0;
    std::vector<std::int32_t> label;
    std::vector<ComponentInfo> comps;

    std::int32_t at(int i, int j) const { return label[static_cast<std::size_t>(i) * n + j]; }
};

Labeling label_components(const SheetGrid& g, double q);
ComponentMask component_mask(const Labeling& lab, std::int32_t id, Cell anchor);
ComponentMask extract_bubble(const SheetGrid& g, double q, Cell anchor);

struct BoundaryMask {
    Mask mask;
    std::size_t count = 0;
    bool edge = false;  // the component touches the grid edge
};

// Mask cells 4-adjacent to a cell outside the mask. The grid edge does not
// count as outside.
BoundaryMask boundary_cells(const Mask& m);

// Number of s x s boxes meeting the mask, for each s (each must divide n).
std::vector<std::size_t> box_count(const Mask& m, const std::vector<int>& scales);

struct FitPolicy {
    int drop_fine = 2;
    int drop_coarse = 2;
};

struct DimEstimate {
    std::vector<int> scales;
    std::vector<std::size_t> counts;
    double slope = 0;
    double r2 = 0;
    int fit_lo = 0, fit_hi = 0;  // inclusive index range used in the fit
};

// Powers of two from 1 up to the smaller of n and the mask's bounding-box
// extent, fitted after the policy drops its fine and coarse scales.
DimEstimate estimate_dimension(const Mask& m, const FitPolicy& policy = {});
DimEstimate estimate_dimension(const Mask& m, const std::vector<int>& scales,
                               const FitPolicy& policy);

// calibration patterns
Mask sierpinski_carpet(int depth);
Mask line_mask(int n);
Mask square_mask(int n);
Mask disk_mask(int n, double radius);

// Anchors for bubble sampling: cells above q whose value lies in the middle
// two quartiles of |W - q|, shuffled deterministically by seed.
std::vector<Cell> candidate_anchors(const SheetGrid& g, double q, std::uint64_t seed);

struct BubbleDim {
    Cell anchor;
    std::size_t area = 0;
    std::size_t boundary = 0;
    DimEstimate dim;
};

// Distinct non-edge bubbles whose bounding box spans at least min_extent
// cells, up to `count` of them. min_extent must be at least
// 2^(drop_fine + drop_coarse + 2).
std::vector<BubbleDim> sample_bubble_dimensions(const SheetGrid& g, double q, int count,
                                                int min_extent, std::uint64_t seed,
                                                const FitPolicy& policy = {});

// exports
void write_counts_csv(std::ostream& os, const DimEstimate& d);
void write_mask_csv(std::ostream& os, const Mask& m);
// 16-byte header: magic "DWSG", int32 n, float32 S1, float32 S2; then n*n
// little-endian doubles, row-major.
void write_grid_binary(std::ostream& os, const SheetGrid& g);
SheetGrid read_grid_binary(std::istream& is);

// Local decomposition of a sheet around (1,1) into an ABM and an error term.
using Field2 = std::function<double(double, double)>;
struct LocalTerms {
    double s1 = 0, s2 = 0;   // S(u1, u2)
    double abm = 0;          // X(u1, u2) built from B1..B4
    double error = 0;        // E(u1, u2)
};
LocalTerms local_decomposition(const Field2& W, double u1, double u2);

} // namespace dwabm
