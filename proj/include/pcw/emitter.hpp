#pragma once

#include <map>
#include <vector>

#include "pcw/bands.hpp"
#include "pcw/pwe.hpp"

namespace pcw {

// Unit bookkeeping for the Purcell map. The 2D mode is treated as uniform
// over the membrane thickness, so the 3D normalization integral becomes
// height_nm times the 2D one, and the homogeneous emission-rate reference
// uses the bulk slab index:
//   F = (3/(4*pi)) * n_g * |Ey|^2 * a^3 / (height_nm * n_slab * omega^2)
// with |Ey|^2 from a mode normalized to sum eps |E|^2 dA = 1 (E in 1/nm)
// and omega in a/(2*pi*c) units.
struct EmitterContext {
    double n_slab = 3.475;
    double height_nm = 175.0;
    double f_ng = 0.13; // Purcell factor into non-guided channels
};

struct ImpurityParams {
    double eta = 1e-5; // pump extinction ratio, linear (-50 dB)
    double epsilon_threshold = 5e-3;
    std::vector<double> beta_thresholds = {0.85, 0.90, 0.95};

    void validate() const;
};

using BoolMap = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Scale E so that sum_cell eps|E|^2 dx dy = 1 (periodic rectangle rule,
// analytic eps per point). Throws ZeroField when the integral underflows.
ModeField normalize_mode(const ModeField &field, const SupercellGeometry &geom);

// Purcell-factor map of a normalized mode for a y-polarized dipole.
Eigen::ArrayXXd purcell_map(const ModeField &field, double ng, double omega,
                            const SupercellGeometry &geom, const EmitterContext &ctx);

// beta_j = F_j / (F1 + F2 + F_ng) pointwise.
std::pair<Eigen::ArrayXXd, Eigen::ArrayXXd> beta_map(const Eigen::ArrayXXd &f1,
                                                     const Eigen::ArrayXXd &f2, double f_ng);

// True where the point clears every hole edge (periodic images included)
// by more than clearance_nm and lies in the defect channel |y| <= w1.
BoolMap effective_area_mask(const SupercellGeometry &geom, const FieldGrid &grid,
                            double clearance_nm);

// Fraction of mask points where map >= threshold.
double area_fraction(const Eigen::ArrayXXd &map, const BoolMap &mask, double threshold);

// epsilon = eta / (beta1 * beta2), +inf where beta2 (or beta1) vanishes.
Eigen::ArrayXXd impurity_map(const Eigen::ArrayXXd &beta1, const Eigen::ArrayXXd &beta2,
                             const ImpurityParams &params);

// Fraction of mask points with beta1 >= beta0 and epsilon <= eps0.
double working_area(const Eigen::ArrayXXd &beta1, const Eigen::ArrayXXd &epsilon, double beta0,
                    double eps0, const BoolMap &mask);

struct FractionRow {
    double threshold = 0.0;
    double beta_fraction = 0.0;    // area fraction with beta1 >= threshold
    double working_fraction = 0.0; // additionally epsilon <= epsilon_threshold
};

// Spatial maps over one unit cell of the defect channel at one wavelength.
struct EmitterMaps {
    FieldGrid grid; // cropped to |y| <= w1 plus a small guard band
    Eigen::ArrayXXd F1, F2;
    Eigen::ArrayXXd beta1, beta2;
    Eigen::ArrayXXd impurity;
    BoolMap mask;

    double wavelength_nm = 0.0;
    double omega = 0.0;
    double f_ng = 0.13;
    double ng1 = 0.0, ng2 = 0.0; // group indices of the two modes at this frequency
    double k1 = 0.0, k2 = 0.0;   // crossing wavevectors, 2*pi/a
    double beta1_max = 0.0;      // over the effective-area mask
    double mask_fraction = 0.0;  // mask area / channel area
    std::vector<FractionRow> fractions;
};

struct EmitterMapSettings {
    double grid_spacing_nm = 3.75; // a/64 for a = 240
    double clearance_nm = 43.0;
    EmitterContext context;
    ImpurityParams impurity;
};

// Full map pipeline at one wavelength: locate the even (collection) and
// odd (excitation) crossings, rebuild and normalize both mode fields,
// apply the Purcell/beta/impurity algebra and reduce to area fractions.
// Throws NoneFound when no even guided mode crosses the frequency. A
// missing odd mode gives F2 = 0 and an impurity map of +inf (single-mode
// waveguide).
EmitterMaps compute_emitter_maps(const SupercellGeometry &geom, const SupercellSolver &solver,
                                 const BandStructure &bands, const GapInfo &gap,
                                 double wavelength_nm, const EmitterMapSettings &settings);

} // namespace pcw
