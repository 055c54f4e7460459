#include "pcw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

namespace pcw {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string &message) {
    if (!ok) throw InvalidSpec(message);
}

// Fractional coordinates of r in the cell spanned by (a1, a2).
Vec2 fractional(const SupercellGeometry &g, double x, double y) {
    const double det = g.a1_nm.x * g.a2_nm.y - g.a1_nm.y * g.a2_nm.x;
    const double fx = (x * g.a2_nm.y - y * g.a2_nm.x) / det;
    const double fy = (-x * g.a1_nm.y + y * g.a1_nm.x) / det;
    return {fx, fy};
}

// Squared distance from r to the nearest periodic image of c.
double periodic_dist2(const SupercellGeometry &g, Vec2 r, Vec2 c) {
    Vec2 f = fractional(g, r.x - c.x, r.y - c.y);
    f.x -= std::floor(f.x);
    f.y -= std::floor(f.y);
    double best = std::numeric_limits<double>::max();
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            const double ux = f.x + i;
            const double uy = f.y + j;
            const double dx = ux * g.a1_nm.x + uy * g.a2_nm.x;
            const double dy = ux * g.a1_nm.y + uy * g.a2_nm.y;
            best = std::min(best, dx * dx + dy * dy);
        }
    }
    return best;
}

void check_no_overlap(const SupercellGeometry &g) {
    const std::size_t n = g.holes.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt(periodic_dist2(
                g, {g.holes[i].x_nm, g.holes[i].y_nm}, {g.holes[j].x_nm, g.holes[j].y_nm}));
            if (d < g.holes[i].r_nm + g.holes[j].r_nm) {
                std::ostringstream oss;
                oss << "holes " << i << " and " << j << " overlap: center distance " << d
                    << " nm < " << g.holes[i].r_nm + g.holes[j].r_nm << " nm";
                throw OverlappingHoles(oss.str());
            }
        }
    }
}

void hash_bytes(std::uint64_t &h, const void *p, std::size_t n) {
    const auto *b = static_cast<const unsigned char *>(p);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ULL;
    }
}

void hash_double(std::uint64_t &h, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    hash_bytes(h, &bits, sizeof bits);
}

} // namespace

void SlabSpec::validate() const {
    require(n_clad >= 1.0, "slab: n_clad must be >= 1");
    require(n_core > n_clad, "slab: n_core must exceed n_clad");
    require(thickness_nm > 0.0, "slab: thickness must be positive");
    require(wavelength_nm > 0.0, "slab: wavelength must be positive");
}

double slab_te_effective_index(const SlabSpec &spec) {
    spec.validate();
    const double k0 = 2.0 * kPi / spec.wavelength_nm;
    const double n1 = spec.n_core;
    const double n2 = spec.n_clad;

    // Fundamental TE root of tan(kappa t/2) = gamma/kappa, written in the
    // pole-free form u - atan(gamma/kappa) with u = kappa t/2. Strictly
    // decreasing in n_eff, positive at n_clad, negative at n_core.
    const auto residual = [&](double neff) {
        const double kappa = k0 * std::sqrt(std::max(0.0, n1 * n1 - neff * neff));
        const double gamma = k0 * std::sqrt(std::max(0.0, neff * neff - n2 * n2));
        const double u = 0.5 * kappa * spec.thickness_nm;
        if (kappa <= 0.0) return -0.5 * kPi;
        return u - std::atan(gamma / kappa);
    };

    double lo = n2;
    double hi = n1;
    const double f_lo = residual(lo);
    const double f_hi = residual(hi);
    if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
        throw NoGuidedMode("slab dispersion residual has no sign change over (n_clad, n_core)");
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double LatticeSpec::w0_nm() const { return a_nm * std::sqrt(3.0) / 2.0; }

void LatticeSpec::validate() const {
    require(a_nm > 0.0, "lattice: a must be positive");
    require(r0_nm >= 0.0 && r0_nm < 0.5 * a_nm, "lattice: need 0 <= r0 < a/2");
    require(eps_hole >= 1.0, "lattice: eps_hole must be >= 1");
    require(eps_bg > eps_hole, "lattice: eps_bg must exceed eps_hole");
}

void WaveguideParams::validate(const LatticeSpec &lattice) const {
    require(w1_factor >= 1.0, "waveguide: w1_factor must be >= 1");
    require(d1_nm > lattice.r0_nm, "waveguide: d1 must exceed r0");
    require(d2_nm > lattice.r0_nm, "waveguide: d2 must exceed r0");
    require(rows_per_side >= 5, "waveguide: rows_per_side must be >= 5");
}

double SupercellGeometry::cell_area_nm2() const {
    return std::abs(a1_nm.x * a2_nm.y - a1_nm.y * a2_nm.x);
}

double SupercellGeometry::eps_at(double x_nm, double y_nm) const {
    for (const Hole &h : holes) {
        const double d2 = periodic_dist2(*this, {x_nm, y_nm}, {h.x_nm, h.y_nm});
        if (d2 < h.r_nm * h.r_nm) return lattice.eps_hole;
    }
    return lattice.eps_bg;
}

double SupercellGeometry::clearance_at(double x_nm, double y_nm) const {
    double best = std::numeric_limits<double>::max();
    for (const Hole &h : holes) {
        const double d = std::sqrt(periodic_dist2(*this, {x_nm, y_nm}, {h.x_nm, h.y_nm}));
        best = std::min(best, d - h.r_nm);
    }
    return best;
}

double SupercellGeometry::channel_halfwidth_nm() const {
    double best = std::numeric_limits<double>::max();
    for (const Hole &h : holes) {
        const double ay = std::abs(h.y_nm);
        if (ay > 1e-9) best = std::min(best, ay);
    }
    if (best == std::numeric_limits<double>::max())
        throw InvalidSpec("geometry has no off-axis holes; channel half-width undefined");
    return best;
}

std::uint64_t SupercellGeometry::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    hash_double(h, a1_nm.x);
    hash_double(h, a1_nm.y);
    hash_double(h, a2_nm.x);
    hash_double(h, a2_nm.y);
    hash_double(h, lattice.a_nm);
    hash_double(h, lattice.r0_nm);
    hash_double(h, lattice.eps_bg);
    hash_double(h, lattice.eps_hole);
    for (const Hole &hole : holes) {
        hash_double(h, hole.x_nm);
        hash_double(h, hole.y_nm);
        hash_double(h, hole.r_nm);
    }
    const std::uint64_t sym = symmetry_axis ? 1 : 0;
    hash_bytes(h, &sym, sizeof sym);
    return h;
}

SupercellGeometry build_bulk_cell(const LatticeSpec &lattice) {
    lattice.validate();
    SupercellGeometry g;
    g.lattice = lattice;
    g.a1_nm = {lattice.a_nm, 0.0};
    g.a2_nm = {0.5 * lattice.a_nm, lattice.w0_nm()};
    if (lattice.r0_nm > 0.0) g.holes.push_back({0.0, 0.0, lattice.r0_nm});
    g.symmetry_axis = false;
    check_no_overlap(g);
    return g;
}

SupercellGeometry build_waveguide_cell(const LatticeSpec &lattice, const WaveguideParams &params) {
    lattice.validate();
    params.validate(lattice);

    const double a = lattice.a_nm;
    const double w0 = lattice.w0_nm();
    const int rows = params.rows_per_side;

    std::vector<double> row_y(static_cast<std::size_t>(rows));
    row_y[0] = params.w1_factor * w0; // row 1
    row_y[1] = row_y[0] + params.d1_nm;
    row_y[2] = row_y[1] + params.d2_nm;
    for (int j = 3; j < rows; ++j) row_y[static_cast<std::size_t>(j)] = row_y[2] + (j - 2) * w0;
    // Shared boundary row, one bulk pitch beyond the outermost full row.
    const double y_boundary = row_y[static_cast<std::size_t>(rows - 1)] + w0;

    SupercellGeometry g;
    g.lattice = lattice;
    g.a1_nm = {a, 0.0};
    g.a2_nm = {0.0, 2.0 * y_boundary};
    g.symmetry_axis = true;

    const auto row_offset = [&](int j) { return (j % 2 == 1) ? 0.5 * a : 0.0; };
    for (int j = 1; j <= rows; ++j) {
        const double y = row_y[static_cast<std::size_t>(j - 1)];
        const double x = row_offset(j);
        g.holes.push_back({x, y, lattice.r0_nm});
        g.holes.push_back({x, -y, lattice.r0_nm});
    }
    g.holes.push_back({row_offset(rows + 1), y_boundary, lattice.r0_nm});
    if (params.center_row) g.holes.push_back({0.5 * a, 0.0, lattice.r0_nm});

    check_no_overlap(g);
    return g;
}

double fill_fraction(const SupercellGeometry &geom) {
    double holes_area = 0.0;
    for (const Hole &h : geom.holes) holes_area += kPi * h.r_nm * h.r_nm;
    return holes_area / geom.cell_area_nm2();
}

namespace {

// Circle transform amplitude 2 f_h J1(x)/x of one hole.
double hole_shape_factor(const Hole &h, double gnorm, double area) {
    const double x = gnorm * h.r_nm;
    const double f_h = kPi * h.r_nm * h.r_nm / area;
    return 2.0 * f_h * std::cyl_bessel_j(1, x) / x;
}

std::complex<double> phase_factor(double arg) { return {std::cos(arg), std::sin(arg)}; }

} // namespace

std::complex<double> epsilon_fourier_coefficient(const SupercellGeometry &geom, Vec2 g_per_nm) {
    const double area = geom.cell_area_nm2();
    const double gnorm = norm(g_per_nm);
    const double contrast = geom.lattice.eps_hole - geom.lattice.eps_bg;

    if (gnorm < 1e-14) {
        double f_total = 0.0;
        for (const Hole &h : geom.holes) f_total += kPi * h.r_nm * h.r_nm / area;
        return {geom.lattice.eps_bg + contrast * f_total, 0.0};
    }

    if (geom.symmetry_axis) {
        // Structurally mirror-symmetric sum: +-y hole pairs combine into a
        // real cosine, so eps(gx, gy) == eps(gx, -gy) bitwise. Holes on the
        // axis carry no gy phase; a hole on the cell edge (2|y| = ly of a
        // rectangular cell) sits at a mirror point where the gy phase is
        // +-1, taken from the cosine alone.
        const double ly = geom.a2_nm.y;
        std::complex<double> sum = 0.0;
        for (const Hole &h : geom.holes) {
            if (h.r_nm <= 0.0 || h.y_nm < 0.0) continue;
            const double shape = hole_shape_factor(h, gnorm, area);
            const std::complex<double> px = phase_factor(-g_per_nm.x * h.x_nm);
            if (h.y_nm == 0.0) {
                sum += shape * px;
            } else if (std::abs(2.0 * h.y_nm - ly) < 1e-9 * ly) {
                sum += shape * px * std::cos(std::abs(g_per_nm.y * h.y_nm));
            } else {
                sum += 2.0 * shape * px * std::cos(std::abs(g_per_nm.y * h.y_nm));
            }
        }
        return contrast * sum;
    }

    std::complex<double> sum = 0.0;
    for (const Hole &h : geom.holes) {
        if (h.r_nm <= 0.0) continue;
        const double shape = hole_shape_factor(h, gnorm, area);
        sum += shape * phase_factor(-(g_per_nm.x * h.x_nm + g_per_nm.y * h.y_nm));
    }
    return contrast * sum;
}

} // namespace pcw
