#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "pcw/geometry.hpp"

namespace pcw {

// All wavevectors below are in units of 2*pi/a (a = lattice constant),
// frequencies in units of a/(2*pi*c) i.e. omega*a/(2*pi*c) = a/lambda.

struct GIndex {
    int m = 0;
    int n = 0;
};

struct PlaneWaveBasis {
    double cutoff = 0.0;      // |G| <= cutoff, in 2*pi/a
    Vec2 b1;                  // supercell reciprocal vectors, 2*pi/a
    Vec2 b2;
    std::vector<GIndex> index;
    std::vector<Vec2> g;      // Cartesian, 2*pi/a

    int size() const { return static_cast<int>(g.size()); }
};

// Reciprocal vectors of the supercell within the cutoff, ordered by |G|
// then (m, n). Throws BasisTooSmall for a single-vector basis and
// BasisTooLarge above the cap.
PlaneWaveBasis build_basis(const SupercellGeometry &geom, double cutoff, int cap = 4000);

// Matrix [eps(G_i - G_j)] over the basis (Hermitian).
Eigen::MatrixXcd epsilon_matrix(const SupercellGeometry &geom, const PlaneWaveBasis &basis);

// Matrix [eps(G_i - G_j)] for caller-supplied reciprocal vectors (rad/nm).
// Reference path evaluated pairwise; the basis overload uses a
// difference-indexed table and is the one used by the solver.
Eigen::MatrixXcd epsilon_fourier(const SupercellGeometry &geom, const std::vector<Vec2> &gvecs_per_nm);

struct PlaneWaveOperator {
    Vec2 k;
    Eigen::MatrixXcd matrix;
    std::shared_ptr<const PlaneWaveBasis> basis;
};

struct Mode {
    double omega = 0.0;           // a/(2*pi*c) units
    Eigen::VectorXcd coeffs;      // plane-wave amplitudes h_G, unit norm
};

// Inverse-rule TE operator M_{GG'} = (k+G).(k+G') * [eps]^{-1}_{GG'},
// symmetrized after assembly. Throws SingularEpsilon when cond(eps) > 1e12.
PlaneWaveOperator assemble_te_operator(const SupercellGeometry &geom, const PlaneWaveBasis &basis,
                                       Vec2 k);

// Lowest nbands eigenpairs of the operator, omega = sqrt(lambda),
// eigenvalues below 1e-16 clamped to zero frequency. Eigenvector phase is
// fixed by rotating the largest-magnitude component to the positive real
// axis.
std::vector<Mode> solve_bands(const PlaneWaveOperator &op, int nbands);

// Precomputes the basis and the inverted dielectric matrix once per
// geometry so per-k assembly is a rank-weighted Hadamard product.
class SupercellSolver {
public:
    SupercellSolver(SupercellGeometry geom, double cutoff, int basis_cap = 4000);

    const SupercellGeometry &geometry() const { return geom_; }
    const PlaneWaveBasis &basis() const { return *basis_; }
    double epsilon_condition() const { return eps_condition_; }

    PlaneWaveOperator assemble(Vec2 k) const;
    std::vector<Mode> solve(Vec2 k, int nbands) const;

private:
    SupercellGeometry geom_;
    std::shared_ptr<const PlaneWaveBasis> basis_;
    Eigen::MatrixXcd eta_; // [eps(G-G')]^{-1}
    double eps_condition_ = 0.0;
};

struct FieldGrid {
    int nx = 0;
    int ny = 0;
    double dx_nm = 0.0;
    double dy_nm = 0.0;
    double x0_nm = 0.0;
    double y0_nm = 0.0;

    double x(int i) const { return x0_nm + i * dx_nm; }
    double y(int j) const { return y0_nm + j * dy_nm; }
};

// One Bloch mode sampled on a uniform grid over the supercell.
// Arrays are indexed (row j = y, column i = x).
struct ModeField {
    FieldGrid grid;
    Eigen::ArrayXXcd hz;
    Eigen::ArrayXXcd ex;
    Eigen::ArrayXXcd ey;
    Vec2 k;
    int band_index = -1;
    double omega = 0.0;
    bool normalized = false;
};

// Sample Hz and the TE-derived E field on a grid of roughly the requested
// spacing (ny forced even so the mirror j -> ny-j is exact). The E scale is
// arbitrary until normalize_mode. Requires an axis-aligned rectangular cell.
ModeField reconstruct_field(const SupercellGeometry &geom, const PlaneWaveBasis &basis, Vec2 k,
                            const Mode &mode, double grid_spacing_nm);

// Fraction of the eps-weighted field energy within |y| <= half_width.
double energy_fraction_within(const ModeField &field, const SupercellGeometry &geom,
                              double half_width_nm);

} // namespace pcw
