#include "pcw/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pcw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string &message) {
    if (!ok) throw InvalidSpec(message);
}

} // namespace

void ImpurityParams::validate() const {
    require(eta > 0.0, "impurity: eta must be positive");
    require(epsilon_threshold > 0.0 && epsilon_threshold < 1.0,
            "impurity: epsilon threshold must be in (0,1)");
    for (double t : beta_thresholds)
        require(t > 0.0 && t < 1.0, "impurity: beta thresholds must be in (0,1)");
}

ModeField normalize_mode(const ModeField &field, const SupercellGeometry &geom) {
    const FieldGrid &grid = field.grid;
    double integral = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double eps = geom.eps_at(grid.x(i), grid.y(j));
            integral += eps * (std::norm(field.ex(j, i)) + std::norm(field.ey(j, i)));
        }
    }
    integral *= grid.dx_nm * grid.dy_nm;
    if (!(integral > 1e-300)) throw ZeroField("mode normalization integral underflowed");

    ModeField out = field;
    const double scale = 1.0 / std::sqrt(integral);
    out.hz *= scale;
    out.ex *= scale;
    out.ey *= scale;
    out.normalized = true;
    return out;
}

Eigen::ArrayXXd purcell_map(const ModeField &field, double ng, double omega,
                            const SupercellGeometry &geom, const EmitterContext &ctx) {
    require(field.normalized, "purcell_map needs a normalized mode");
    require(std::isfinite(ng), "purcell_map needs a finite group index");
    require(omega > 0.0, "purcell_map needs a positive frequency");
    require(ctx.height_nm > 0.0 && ctx.n_slab >= 1.0, "purcell_map: bad emitter context");

    const double a = geom.lattice.a_nm;
    const double prefactor = (3.0 / (4.0 * kPi)) * std::abs(ng) * a * a * a /
                             (ctx.height_nm * ctx.n_slab * omega * omega);
    Eigen::ArrayXXd f(field.grid.ny, field.grid.nx);
    for (int j = 0; j < field.grid.ny; ++j)
        for (int i = 0; i < field.grid.nx; ++i) f(j, i) = prefactor * std::norm(field.ey(j, i));
    return f;
}

std::pair<Eigen::ArrayXXd, Eigen::ArrayXXd> beta_map(const Eigen::ArrayXXd &f1,
                                                     const Eigen::ArrayXXd &f2, double f_ng) {
    require(f1.rows() == f2.rows() && f1.cols() == f2.cols(),
            "beta_map: F1 and F2 grids differ");
    require(f_ng >= 0.0, "beta_map: F_ng must be non-negative");
    Eigen::ArrayXXd b1(f1.rows(), f1.cols());
    Eigen::ArrayXXd b2(f1.rows(), f1.cols());
    for (Eigen::Index j = 0; j < f1.rows(); ++j) {
        for (Eigen::Index i = 0; i < f1.cols(); ++i) {
            const double den = f1(j, i) + f2(j, i) + f_ng;
            b1(j, i) = den > 0.0 ? f1(j, i) / den : 0.0;
            b2(j, i) = den > 0.0 ? f2(j, i) / den : 0.0;
        }
    }
    return {b1, b2};
}

BoolMap effective_area_mask(const SupercellGeometry &geom, const FieldGrid &grid,
                            double clearance_nm) {
    require(clearance_nm >= 0.0, "effective_area_mask: clearance must be >= 0");
    const double w1 = geom.channel_halfwidth_nm();
    BoolMap mask(grid.ny, grid.nx);
    int count = 0;
    for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        for (int i = 0; i < grid.nx; ++i) {
            const bool in = std::abs(y) <= w1 && geom.clearance_at(grid.x(i), y) > clearance_nm;
            mask(j, i) = in;
            if (in) ++count;
        }
    }
    if (count == 0) throw EmptyMask("no grid point clears the holes by the requested distance");
    return mask;
}

double area_fraction(const Eigen::ArrayXXd &map, const BoolMap &mask, double threshold) {
    require(map.rows() == mask.rows() && map.cols() == mask.cols(),
            "area_fraction: map and mask grids differ");
    long total = 0;
    long above = 0;
    for (Eigen::Index j = 0; j < map.rows(); ++j) {
        for (Eigen::Index i = 0; i < map.cols(); ++i) {
            if (!mask(j, i)) continue;
            ++total;
            if (map(j, i) >= threshold) ++above;
        }
    }
    if (total == 0) throw EmptyMask("area_fraction over an empty mask");
    return static_cast<double>(above) / static_cast<double>(total);
}

Eigen::ArrayXXd impurity_map(const Eigen::ArrayXXd &beta1, const Eigen::ArrayXXd &beta2,
                             const ImpurityParams &params) {
    params.validate();
    require(beta1.rows() == beta2.rows() && beta1.cols() == beta2.cols(),
            "impurity_map: beta grids differ");
    Eigen::ArrayXXd eps(beta1.rows(), beta1.cols());
    for (Eigen::Index j = 0; j < beta1.rows(); ++j) {
        for (Eigen::Index i = 0; i < beta1.cols(); ++i) {
            const double den = beta1(j, i) * beta2(j, i);
            // An emitter on the waveguide axis never couples to the odd
            // pump mode: +inf, not a clipped value.
            eps(j, i) = den > 0.0 ? params.eta / den : kInf;
        }
    }
    return eps;
}

double working_area(const Eigen::ArrayXXd &beta1, const Eigen::ArrayXXd &epsilon, double beta0,
                    double eps0, const BoolMap &mask) {
    require(beta1.rows() == epsilon.rows() && beta1.cols() == epsilon.cols(),
            "working_area: map grids differ");
    require(beta1.rows() == mask.rows() && beta1.cols() == mask.cols(),
            "working_area: map and mask grids differ");
    long total = 0;
    long good = 0;
    for (Eigen::Index j = 0; j < beta1.rows(); ++j) {
        for (Eigen::Index i = 0; i < beta1.cols(); ++i) {
            if (!mask(j, i)) continue;
            ++total;
            if (beta1(j, i) >= beta0 && epsilon(j, i) <= eps0) ++good;
        }
    }
    if (total == 0) throw EmptyMask("working_area over an empty mask");
    return static_cast<double>(good) / static_cast<double>(total);
}

namespace {

// Pick the verified crossing of the requested parity; highest |n_g| wins
// when a band crosses more than once.
const VerifiedCrossing *pick_crossing(const std::vector<VerifiedCrossing> &crossings,
                                      Parity parity, double min_localization) {
    const VerifiedCrossing *best = nullptr;
    for (const VerifiedCrossing &c : crossings) {
        if (c.parity != parity || c.localization < min_localization) continue;
        if (!best || std::abs(c.crossing.ng) > std::abs(best->crossing.ng)) best = &c;
    }
    return best;
}

} // namespace

EmitterMaps compute_emitter_maps(const SupercellGeometry &geom, const SupercellSolver &solver,
                                 const BandStructure &bands, const GapInfo &gap,
                                 double wavelength_nm, const EmitterMapSettings &settings) {
    settings.impurity.validate();
    const double a = geom.lattice.a_nm;
    const double omega = a / wavelength_nm;

    std::vector<VerifiedCrossing> verified;
    for (const GuidedCrossing &c : guided_mode_at_wavelength(bands, gap, omega)) {
        verified.push_back(verify_crossing(solver, bands, c));
    }
    const VerifiedCrossing *even = pick_crossing(verified, Parity::Even, 0.8);
    const VerifiedCrossing *odd = pick_crossing(verified, Parity::Odd, 0.8);
    if (!even) throw NoneFound("no even (collection) guided mode at this wavelength");

    const ModeField even_field = normalize_mode(
        reconstruct_field(geom, solver.basis(), {even->crossing.k, 0.0}, even->mode,
                          settings.grid_spacing_nm),
        geom);
    Eigen::ArrayXXd f1_full =
        purcell_map(even_field, even->crossing.ng, even_field.omega, geom, settings.context);

    Eigen::ArrayXXd f2_full = Eigen::ArrayXXd::Zero(even_field.grid.ny, even_field.grid.nx);
    double ng2 = 0.0;
    double k2 = 0.0;
    if (odd) {
        const ModeField odd_field = normalize_mode(
            reconstruct_field(geom, solver.basis(), {odd->crossing.k, 0.0}, odd->mode,
                              settings.grid_spacing_nm),
            geom);
        f2_full = purcell_map(odd_field, odd->crossing.ng, odd_field.omega, geom, settings.context);
        ng2 = odd->crossing.ng;
        k2 = odd->crossing.k;
    }

    // Crop to the channel plus a small guard band for contour context.
    const FieldGrid &full = even_field.grid;
    const double w1 = geom.channel_halfwidth_nm();
    const double view = std::min(w1 + 4.0 * full.dy_nm, -full.y0_nm);
    int j_lo = full.ny;
    int j_hi = -1;
    for (int j = 0; j < full.ny; ++j) {
        if (std::abs(full.y(j)) <= view) {
            j_lo = std::min(j_lo, j);
            j_hi = std::max(j_hi, j);
        }
    }
    require(j_lo <= j_hi, "channel crop is empty");

    EmitterMaps maps;
    maps.grid = full;
    maps.grid.ny = j_hi - j_lo + 1;
    maps.grid.y0_nm = full.y(j_lo);
    maps.wavelength_nm = wavelength_nm;
    maps.omega = omega;
    maps.f_ng = settings.context.f_ng;
    maps.ng1 = even->crossing.ng;
    maps.ng2 = ng2;
    maps.k1 = even->crossing.k;
    maps.k2 = k2;

    maps.F1 = f1_full.block(j_lo, 0, maps.grid.ny, full.nx);
    maps.F2 = f2_full.block(j_lo, 0, maps.grid.ny, full.nx);
    auto betas = beta_map(maps.F1, maps.F2, settings.context.f_ng);
    maps.beta1 = std::move(betas.first);
    maps.beta2 = std::move(betas.second);
    maps.impurity = impurity_map(maps.beta1, maps.beta2, settings.impurity);
    maps.mask = effective_area_mask(geom, maps.grid, settings.clearance_nm);

    long channel_points = 0;
    long mask_points = 0;
    maps.beta1_max = 0.0;
    for (int j = 0; j < maps.grid.ny; ++j) {
        const double y = maps.grid.y(j);
        for (int i = 0; i < maps.grid.nx; ++i) {
            if (std::abs(y) <= w1) ++channel_points;
            if (maps.mask(j, i)) {
                ++mask_points;
                maps.beta1_max = std::max(maps.beta1_max, maps.beta1(j, i));
            }
        }
    }
    maps.mask_fraction =
        channel_points > 0 ? static_cast<double>(mask_points) / static_cast<double>(channel_points)
                           : 0.0;

    for (double threshold : settings.impurity.beta_thresholds) {
        FractionRow row;
        row.threshold = threshold;
        row.beta_fraction = area_fraction(maps.beta1, maps.mask, threshold);
        row.working_fraction = working_area(maps.beta1, maps.impurity, threshold,
                                            settings.impurity.epsilon_threshold, maps.mask);
        maps.fractions.push_back(row);
    }
    return maps;
}

} // namespace pcw
