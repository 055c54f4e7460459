#pragma once

#include <string>
#include <vector>

#include "pcw/pwe.hpp"

namespace pcw {

enum class Parity { Even, Odd, Mixed };

const char *to_string(Parity p);

// Eigenmodes of one k-point, input to band tracking.
struct KPointModes {
    double kx = 0.0; // 2*pi/a
    std::vector<Mode> modes;
};

// Tracked bands over a kx scan. omega/ng are [band][ik]; vectors keeps the
// eigenvectors for parity classification and field reconstruction.
struct BandStructure {
    std::vector<double> kgrid;
    std::vector<std::vector<double>> omega;
    std::vector<std::vector<double>> ng;
    std::vector<Parity> parity;
    std::vector<bool> tracking_ok;
    std::vector<bool> guided;
    std::vector<std::vector<Eigen::VectorXcd>> vectors; // [band][ik], may be empty

    std::uint64_t geometry_hash = 0;
    double cutoff = 0.0;

    int num_bands() const { return static_cast<int>(omega.size()); }
    int num_k() const { return static_cast<int>(kgrid.size()); }
};

struct GapInfo {
    double omega_lo = 0.0;
    double omega_hi = 0.0;

    double mid() const { return 0.5 * (omega_lo + omega_hi); }
    bool contains(double w) const { return w > omega_lo && w < omega_hi; }
};

// Assign band identity across k by maximal eigenvector overlap (greedy,
// ties broken by frequency proximity). Bands whose best overlap drops
// below 0.5 at any step are flagged (tracking_ok = false) and will be
// labelled Mixed.
BandStructure track_bands(const std::vector<KPointModes> &raw);

// TE gap between the first two bulk bands: max_k omega_1 vs min_k omega_2.
// Throws NoGap when they overlap.
GapInfo find_bandgap(const BandStructure &bulk);

// Group index n_g = c/v_g = dk/dw in normalized units, central difference
// (one-sided at the scan endpoints). |dw| < 1e-12 returns +inf.
double group_index(const BandStructure &bands, int band, int ik);
std::vector<double> group_index_curve(const BandStructure &bands, int band);

// Mirror symmetry of Ey about y = 0: s = <Ey(x,y), Ey(x,-y)> / <Ey,Ey>,
// Even above +0.9, Odd below -0.9, Mixed otherwise.
Parity classify_parity(const ModeField &field, const SupercellGeometry &geom);

struct GuidedCrossing {
    int band = -1;
    double k = 0.0; // 2*pi/a
    Parity parity = Parity::Mixed;
    double ng = 0.0;
};

// k-points where guided bands cross the target frequency, refined on a
// monotone local interpolant to 1e-6 in k. Throws NoneFound when no
// guided band crosses or the target lies outside the gap.
std::vector<GuidedCrossing> guided_mode_at_wavelength(const BandStructure &bands,
                                                      const GapInfo &gap, double omega_target);

// Re-solve at the crossing wavevector and return the eigenmode matching
// the tracked band (largest eigenvector overlap with the nearest stored
// scan vector).
Mode solve_crossing_mode(const SupercellSolver &solver, const BandStructure &bands,
                         const GuidedCrossing &crossing);

// Crossing re-validated at its own k: parity and axis localization are
// classified on the freshly solved mode, independent of band-tracking
// stitches.
struct VerifiedCrossing {
    GuidedCrossing crossing;
    Mode mode;
    double localization = 0.0;
    Parity parity = Parity::Mixed;
};

VerifiedCrossing verify_crossing(const SupercellSolver &solver, const BandStructure &bands,
                                 const GuidedCrossing &crossing, double grid_spacing_nm = 8.0);

// Bulk bands along Gamma-M-K-Gamma.
struct BulkBands {
    BandStructure bands;
    std::vector<Vec2> kpath;        // Cartesian, 2*pi/a
    std::vector<double> arclength;  // along the path, 2*pi/a
};

BulkBands compute_bulk_bands(const LatticeSpec &lattice, double cutoff, int npoints, int nbands = 8,
                             int threads = 1);

// Full waveguide characterization: scan kx in [0, 1/2], track, flag
// guided bands (in-gap and >= 80% of the eps-weighted energy within
// 2*w0 of the axis), classify parity, fill group indices.
struct WaveguideScanSettings {
    double cutoff = 3.5;
    int nk = 201;
    int nbands = 26;
    int basis_cap = 4000;
    int threads = 1;
    double parity_grid_nm = 8.0;       // sampling for parity/localization checks
    double localization_threshold = 0.8;
};

BandStructure scan_waveguide_bands(const SupercellGeometry &geom, const GapInfo &gap,
                                   const WaveguideScanSettings &settings);

} // namespace pcw
