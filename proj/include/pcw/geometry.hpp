#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "pcw/errors.hpp"

namespace pcw {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }

// Symmetric dielectric slab reduced to its fundamental TE mode.
// All lengths in nm.
struct SlabSpec {
    double n_core = 3.475;
    double n_clad = 1.0;
    double thickness_nm = 175.0;
    double wavelength_nm = 930.0;

    void validate() const;
};

// Effective index of the fundamental TE mode of a symmetric slab,
// from the transcendental dispersion relation solved by bracketed
// bisection to 1e-9 absolute. Throws NoGuidedMode if the bracket
// carries no sign change (only possible for broken inputs).
double slab_te_effective_index(const SlabSpec &spec);

// Triangular-lattice crystal parameters. eps_bg is the 2D background
// permittivity (square of the slab effective index), eps_hole the
// permittivity inside the etched holes.
struct LatticeSpec {
    double a_nm = 240.0;
    double r0_nm = 64.0;
    double eps_bg = 0.0;
    double eps_hole = 1.0;

    // Row pitch of the triangular lattice, a*sqrt(3)/2.
    double w0_nm() const;

    void validate() const;
};

// Line-defect waveguide parameters. Row offsets follow the convention of
// the three engineered rows nearest the defect; rows beyond the third sit
// at bulk pitch. The W1 waveguide is w1_factor = 1, d1 = d2 = w0,
// center_row = false.
struct WaveguideParams {
    double w1_factor = 1.07;
    double d1_nm = 0.0;
    double d2_nm = 0.0;
    bool center_row = false;
    int rows_per_side = 7;

    void validate(const LatticeSpec &lattice) const;
};

struct Hole {
    double x_nm = 0.0;
    double y_nm = 0.0;
    double r_nm = 0.0;
};

// Periodic 2D cell: two lattice vectors plus the holes it contains.
// Hole coordinates may sit on the cell boundary; all point queries and
// overlap checks are taken modulo the lattice. When symmetry_axis is set,
// every hole with y > 0 must have an exact (x, -y) partner (the builders
// guarantee this); Fourier coefficients then use a mirror-paired sum that
// is bitwise symmetric under gy -> -gy.
struct SupercellGeometry {
    Vec2 a1_nm;
    Vec2 a2_nm;
    std::vector<Hole> holes;
    LatticeSpec lattice;
    bool symmetry_axis = false;

    double cell_area_nm2() const;

    // Analytic permittivity at a point (periodic circle test).
    double eps_at(double x_nm, double y_nm) const;

    // Distance from a point to the nearest hole edge over all periodic
    // images; negative inside a hole.
    double clearance_at(double x_nm, double y_nm) const;

    // Smallest |y| of any off-axis hole center: the half-width of the
    // defect channel. Throws InvalidSpec when there are no off-axis holes.
    double channel_halfwidth_nm() const;

    // FNV-1a over the cell vectors, lattice and hole list; used as
    // provenance in band structures and output metadata.
    std::uint64_t hash() const;
};

// Primitive triangular cell with one hole at the origin.
// r0 = 0 is accepted and produces a homogeneous (hole-free) cell.
SupercellGeometry build_bulk_cell(const LatticeSpec &lattice);

// Rectangular supercell of one waveguide period: rows at +-w1, +-(w1+d1),
// +-(w1+d1+d2), then bulk pitch outward, alternating x-offsets of a/2.
// A shared boundary row sits on the cell edge at +-ly/2 so the tiled
// structure continues the bulk registry with no stacking fault. With
// center_row a mode-filter hole row is added at y = 0, x = a/2.
SupercellGeometry build_waveguide_cell(const LatticeSpec &lattice, const WaveguideParams &params);

// Area fraction covered by holes.
double fill_fraction(const SupercellGeometry &geom);

// Fourier coefficient of eps(r) at reciprocal vector g (rad/nm):
//   eps(G) = eps_bg*delta_{G,0} + (eps_hole - eps_bg) * sum_h e^{-iG.r_h} * 2 f_h J1(|G|r_h)/(|G|r_h)
// with f_h = pi r_h^2 / A_cell; the hole term degenerates to f_h at G = 0.
std::complex<double> epsilon_fourier_coefficient(const SupercellGeometry &geom, Vec2 g_per_nm);

} // namespace pcw
