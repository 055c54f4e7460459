#include "pcw/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcw/parallel.hpp"

namespace pcw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fritsch-Carlson monotone cubic slopes for a local window, evaluated on
// the bracket [i, i+1].
struct HermiteBracket {
    double x0, x1, y0, y1, m0, m1;

    double eval(double x) const {
        const double h = x1 - x0;
        const double t = (x - x0) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 +
               (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
    }
};

double secant(const std::vector<double> &x, const std::vector<double> &y, std::size_t i) {
    return (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
}

double fc_slope(const std::vector<double> &x, const std::vector<double> &y, std::size_t i) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    if (i == 0) return secant(x, y, 0);
    if (i == n - 1) return secant(x, y, n - 2);
    const double d0 = secant(x, y, i - 1);
    const double d1 = secant(x, y, i);
    if (d0 * d1 <= 0.0) return 0.0;
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    const double w0 = 2.0 * h1 + h0;
    const double w1 = h1 + 2.0 * h0;
    return (w0 + w1) / (w0 / d0 + w1 / d1);
}

HermiteBracket monotone_bracket(const std::vector<double> &x, const std::vector<double> &y,
                                std::size_t i) {
    HermiteBracket b{x[i], x[i + 1], y[i], y[i + 1], fc_slope(x, y, i), fc_slope(x, y, i + 1)};
    const double d = secant(x, y, i);
    if (d == 0.0) {
        b.m0 = b.m1 = 0.0;
        return b;
    }
    const double alpha = b.m0 / d;
    const double beta = b.m1 / d;
    if (alpha < 0.0) b.m0 = 0.0;
    if (beta < 0.0) b.m1 = 0.0;
    const double r = alpha * alpha + beta * beta;
    if (r > 9.0) {
        const double tau = 3.0 / std::sqrt(r);
        b.m0 = tau * alpha * d;
        b.m1 = tau * beta * d;
    }
    return b;
}

} // namespace

const char *to_string(Parity p) {
    switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    default: return "mixed";
    }
}

BandStructure track_bands(const std::vector<KPointModes> &raw) {
    if (raw.empty()) throw InvalidSpec("track_bands: no k-points");
    const int nk = static_cast<int>(raw.size());
    const int nb = static_cast<int>(raw.front().modes.size());
    for (const auto &kp : raw) {
        if (static_cast<int>(kp.modes.size()) != nb)
            throw InvalidSpec("track_bands: band count differs between k-points");
    }

    BandStructure bs;
    bs.kgrid.resize(static_cast<std::size_t>(nk));
    for (int ik = 0; ik < nk; ++ik) bs.kgrid[static_cast<std::size_t>(ik)] = raw[static_cast<std::size_t>(ik)].kx;
    bs.omega.assign(static_cast<std::size_t>(nb), std::vector<double>(static_cast<std::size_t>(nk), 0.0));
    bs.vectors.assign(static_cast<std::size_t>(nb), std::vector<Eigen::VectorXcd>(static_cast<std::size_t>(nk)));
    bs.parity.assign(static_cast<std::size_t>(nb), Parity::Mixed);
    bs.tracking_ok.assign(static_cast<std::size_t>(nb), true);
    bs.guided.assign(static_cast<std::size_t>(nb), false);

    // Band b starts as eigenmode b of the first k-point; "perm" maps band
    // identity to the eigenmode index at the current k.
    std::vector<int> perm(static_cast<std::size_t>(nb));
    for (int b = 0; b < nb; ++b) perm[static_cast<std::size_t>(b)] = b;

    for (int ik = 0; ik < nk; ++ik) {
        const auto &modes = raw[static_cast<std::size_t>(ik)].modes;
        if (ik > 0) {
            const auto &prev = raw[static_cast<std::size_t>(ik - 1)].modes;
            // Candidate pairs sorted by overlap (then frequency proximity).
            struct Cand {
                double overlap;
                double dfreq;
                int from, to;
            };
            std::vector<Cand> cands;
            cands.reserve(static_cast<std::size_t>(nb) * nb);
            for (int i = 0; i < nb; ++i) {
                for (int j = 0; j < nb; ++j) {
                    const double ov = std::abs(
                        prev[static_cast<std::size_t>(i)].coeffs.dot(modes[static_cast<std::size_t>(j)].coeffs));
                    const double df = std::abs(prev[static_cast<std::size_t>(i)].omega -
                                               modes[static_cast<std::size_t>(j)].omega);
                    cands.push_back({ov, df, i, j});
                }
            }
            std::sort(cands.begin(), cands.end(), [](const Cand &a, const Cand &b) {
                if (a.overlap != b.overlap) return a.overlap > b.overlap;
                if (a.dfreq != b.dfreq) return a.dfreq < b.dfreq;
                if (a.from != b.from) return a.from < b.from;
                return a.to < b.to;
            });

            std::vector<int> match(static_cast<std::size_t>(nb), -1);
            std::vector<double> match_overlap(static_cast<std::size_t>(nb), 0.0);
            std::vector<bool> used(static_cast<std::size_t>(nb), false);
            int assigned = 0;
            for (const Cand &c : cands) {
                if (assigned == nb) break;
                if (match[static_cast<std::size_t>(c.from)] >= 0 || used[static_cast<std::size_t>(c.to)]) continue;
                match[static_cast<std::size_t>(c.from)] = c.to;
                match_overlap[static_cast<std::size_t>(c.from)] = c.overlap;
                used[static_cast<std::size_t>(c.to)] = true;
                ++assigned;
            }

            std::vector<int> next_perm(static_cast<std::size_t>(nb));
            for (int b = 0; b < nb; ++b) {
                const int from = perm[static_cast<std::size_t>(b)];
                next_perm[static_cast<std::size_t>(b)] = match[static_cast<std::size_t>(from)];
                if (match_overlap[static_cast<std::size_t>(from)] < 0.5)
                    bs.tracking_ok[static_cast<std::size_t>(b)] = false;
            }
            perm = next_perm;
        }
        for (int b = 0; b < nb; ++b) {
            const Mode &m = modes[static_cast<std::size_t>(perm[static_cast<std::size_t>(b)])];
            bs.omega[static_cast<std::size_t>(b)][static_cast<std::size_t>(ik)] = m.omega;
            bs.vectors[static_cast<std::size_t>(b)][static_cast<std::size_t>(ik)] = m.coeffs;
        }
    }

    for (int b = 0; b < nb; ++b) {
        if (nk < 2) {
            bs.ng.emplace_back(1, kInf); // group index undefined on a single sample
        } else {
            bs.ng.push_back(group_index_curve(bs, b));
        }
    }
    return bs;
}

GapInfo find_bandgap(const BandStructure &bulk) {
    if (bulk.num_bands() < 2) throw InvalidSpec("find_bandgap: need at least two bands");
    if (bulk.num_k() < 30) throw InvalidSpec("find_bandgap: need >= 30 k-points along the path");
    const auto &b1 = bulk.omega[0];
    const auto &b2 = bulk.omega[1];
    GapInfo gap;
    gap.omega_lo = *std::max_element(b1.begin(), b1.end());
    gap.omega_hi = *std::min_element(b2.begin(), b2.end());
    if (!(gap.omega_lo < gap.omega_hi)) {
        std::ostringstream oss;
        oss << "no TE gap: max(band1) = " << gap.omega_lo << " >= min(band2) = " << gap.omega_hi;
        throw NoGap(oss.str());
    }
    return gap;
}

double group_index(const BandStructure &bands, int band, int ik) {
    const int nk = bands.num_k();
    if (band < 0 || band >= bands.num_bands()) throw InvalidSpec("group_index: band out of range");
    if (ik < 0 || ik >= nk) throw InvalidSpec("group_index: k index out of range");
    if (nk < 2) throw InvalidSpec("group_index: need at least two k samples");

    const int lo = ik == 0 ? 0 : ik - 1;
    const int hi = ik == nk - 1 ? nk - 1 : ik + 1;
    const double dk = bands.kgrid[static_cast<std::size_t>(hi)] - bands.kgrid[static_cast<std::size_t>(lo)];
    const double dw = bands.omega[static_cast<std::size_t>(band)][static_cast<std::size_t>(hi)] -
                      bands.omega[static_cast<std::size_t>(band)][static_cast<std::size_t>(lo)];
    if (std::abs(dw) < 1e-12) return kInf; // flat band
    return dk / dw;
}

std::vector<double> group_index_curve(const BandStructure &bands, int band) {
    std::vector<double> ng(static_cast<std::size_t>(bands.num_k()));
    for (int ik = 0; ik < bands.num_k(); ++ik) ng[static_cast<std::size_t>(ik)] = group_index(bands, band, ik);
    return ng;
}

Parity classify_parity(const ModeField &field, const SupercellGeometry &geom) {
    if (!geom.symmetry_axis)
        throw AsymmetricGeometry("parity classification needs a y-mirror-symmetric geometry");
    if (std::abs(field.k.y) > 1e-12)
        throw InvalidSpec("parity classification requires k_y = 0");

    const int nx = field.grid.nx;
    const int ny = field.grid.ny;
    std::complex<double> num = 0.0;
    double den = 0.0;
    for (int j = 0; j < ny; ++j) {
        const int jm = (ny - j) % ny; // y -> -y on the periodic grid
        for (int i = 0; i < nx; ++i) {
            num += std::conj(field.ey(jm, i)) * field.ey(j, i);
            den += std::norm(field.ey(j, i));
        }
    }
    if (den <= 0.0) throw ZeroField("parity classification on a vanishing Ey field");
    const double s = num.real() / den;
    if (s > 0.9) return Parity::Even;
    if (s < -0.9) return Parity::Odd;
    return Parity::Mixed;
}

std::vector<GuidedCrossing> guided_mode_at_wavelength(const BandStructure &bands,
                                                      const GapInfo &gap, double omega_target) {
    std::vector<GuidedCrossing> out;
    if (!gap.contains(omega_target)) {
        std::ostringstream oss;
        oss << "target frequency " << omega_target << " lies outside the gap [" << gap.omega_lo
            << ", " << gap.omega_hi << "]";
        throw NoneFound(oss.str());
    }

    const bool have_flags = !bands.guided.empty();
    for (int b = 0; b < bands.num_bands(); ++b) {
        if (have_flags && !bands.guided[static_cast<std::size_t>(b)]) continue;
        const auto &w = bands.omega[static_cast<std::size_t>(b)];
        const auto &ng = bands.ng[static_cast<std::size_t>(b)];
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            const double f0 = w[i] - omega_target;
            const double f1 = w[i + 1] - omega_target;
            if (f0 == 0.0 && f1 == 0.0) continue; // flat at target; ambiguous
            if (f0 * f1 > 0.0) continue;
            if (f1 == 0.0 && i + 2 < w.size()) continue; // counted by the next bracket

            const HermiteBracket h = monotone_bracket(bands.kgrid, w, i);
            double lo = h.x0;
            double hi = h.x1;
            double flo = h.eval(lo) - omega_target;
            for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = h.eval(mid) - omega_target;
                if ((fm <= 0.0) == (flo <= 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            GuidedCrossing c;
            c.band = b;
            c.k = 0.5 * (lo + hi);
            c.parity = bands.parity[static_cast<std::size_t>(b)];
            const double t = (c.k - h.x0) / (h.x1 - h.x0);
            const double ng0 = ng[i];
            const double ng1 = ng[i + 1];
            c.ng = (std::isinf(ng0) || std::isinf(ng1)) ? kInf : (1.0 - t) * ng0 + t * ng1;
            out.push_back(c);
        }
    }
    if (out.empty()) {
        std::ostringstream oss;
        oss << "no guided band crosses omega = " << omega_target;
        throw NoneFound(oss.str());
    }
    return out;
}

Mode solve_crossing_mode(const SupercellSolver &solver, const BandStructure &bands,
                         const GuidedCrossing &crossing) {
    const std::vector<Mode> modes = solver.solve({crossing.k, 0.0}, bands.num_bands());

    int nearest_ik = 0;
    double best_dist = kInf;
    for (int ik = 0; ik < bands.num_k(); ++ik) {
        const double d = std::abs(bands.kgrid[static_cast<std::size_t>(ik)] - crossing.k);
        if (d < best_dist) {
            best_dist = d;
            nearest_ik = ik;
        }
    }
    const Eigen::VectorXcd &ref =
        bands.vectors[static_cast<std::size_t>(crossing.band)][static_cast<std::size_t>(nearest_ik)];

    int best_mode = 0;
    double best_overlap = -1.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const double ov = std::abs(ref.dot(modes[m].coeffs));
        if (ov > best_overlap) {
            best_overlap = ov;
            best_mode = static_cast<int>(m);
        }
    }
    return modes[static_cast<std::size_t>(best_mode)];
}

VerifiedCrossing verify_crossing(const SupercellSolver &solver, const BandStructure &bands,
                                 const GuidedCrossing &crossing, double grid_spacing_nm) {
    const SupercellGeometry &geom = solver.geometry();
    VerifiedCrossing out;
    out.crossing = crossing;
    out.mode = solve_crossing_mode(solver, bands, crossing);
    const ModeField field =
        reconstruct_field(geom, solver.basis(), {crossing.k, 0.0}, out.mode, grid_spacing_nm);
    out.localization = energy_fraction_within(field, geom, 2.0 * geom.lattice.w0_nm());
    out.parity = classify_parity(field, geom);
    return out;
}

BulkBands compute_bulk_bands(const LatticeSpec &lattice, double cutoff, int npoints, int nbands,
                             int threads) {
    if (npoints < 30) throw InvalidSpec("bulk path needs >= 30 k-points");
    const SupercellGeometry geom = build_bulk_cell(lattice);
    const SupercellSolver solver(geom, cutoff);

    const Vec2 b1 = solver.basis().b1;
    const Vec2 b2 = solver.basis().b2;
    const Vec2 gamma{0.0, 0.0};
    const Vec2 mpt = 0.5 * (b1 + b2);
    const Vec2 kpt = (1.0 / 3.0) * (b1 + 2.0 * b2);

    const Vec2 verts[4] = {gamma, mpt, kpt, gamma};
    double seg_len[3];
    double total = 0.0;
    for (int s = 0; s < 3; ++s) {
        seg_len[s] = norm(verts[s + 1] - verts[s]);
        total += seg_len[s];
    }

    BulkBands result;
    for (int s = 0; s < 3; ++s) {
        const int steps = std::max(1, static_cast<int>(std::lround(npoints * seg_len[s] / total)));
        for (int i = (s == 0 ? 0 : 1); i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            result.kpath.push_back(verts[s] + t * (verts[s + 1] - verts[s]));
        }
    }
    result.arclength.resize(result.kpath.size());
    for (std::size_t i = 0; i < result.kpath.size(); ++i) {
        result.arclength[i] =
            i == 0 ? 0.0 : result.arclength[i - 1] + norm(result.kpath[i] - result.kpath[i - 1]);
    }

    const int nk = static_cast<int>(result.kpath.size());
    std::vector<KPointModes> raw(static_cast<std::size_t>(nk));
    parallel_for(nk, threads, [&](int ik) {
        raw[static_cast<std::size_t>(ik)].kx = result.arclength[static_cast<std::size_t>(ik)];
        raw[static_cast<std::size_t>(ik)].modes = solver.solve(result.kpath[static_cast<std::size_t>(ik)], nbands);
    });

    result.bands = track_bands(raw);
    result.bands.geometry_hash = geom.hash();
    result.bands.cutoff = cutoff;
    return result;
}

BandStructure scan_waveguide_bands(const SupercellGeometry &geom, const GapInfo &gap,
                                   const WaveguideScanSettings &settings) {
    const SupercellSolver solver(geom, settings.cutoff, settings.basis_cap);
    const int nk = settings.nk;
    if (nk < 2) throw InvalidSpec("waveguide scan needs >= 2 k-points");

    std::vector<KPointModes> raw(static_cast<std::size_t>(nk));
    parallel_for(nk, settings.threads, [&](int ik) {
        const double kx = 0.5 * ik / (nk - 1);
        raw[static_cast<std::size_t>(ik)].kx = kx;
        raw[static_cast<std::size_t>(ik)].modes = solver.solve({kx, 0.0}, settings.nbands);
    });

    BandStructure bs = track_bands(raw);
    bs.geometry_hash = geom.hash();
    bs.cutoff = settings.cutoff;

    const double w0 = geom.lattice.w0_nm();
    for (int b = 0; b < bs.num_bands(); ++b) {
        // In-gap samples of this band, spread over its in-gap range. A band
        // can stitch defect and continuum-edge segments at avoided
        // crossings, so the guided flag accepts any localized sample and
        // the parity label comes from the best-localized one.
        std::vector<int> in_gap;
        for (int ik = 0; ik < nk; ++ik) {
            if (gap.contains(bs.omega[static_cast<std::size_t>(b)][static_cast<std::size_t>(ik)]))
                in_gap.push_back(ik);
        }
        if (in_gap.empty()) continue;

        std::vector<int> samples;
        const std::size_t m = in_gap.size();
        for (double frac : {0.5, 0.0, 1.0, 0.25, 0.75}) {
            const int ik = in_gap[static_cast<std::size_t>(frac * (static_cast<double>(m) - 1))];
            if (std::find(samples.begin(), samples.end(), ik) == samples.end()) samples.push_back(ik);
        }

        double best_loc = -1.0;
        Parity best_parity = Parity::Mixed;
        for (int ik : samples) {
            Mode mode;
            mode.omega = bs.omega[static_cast<std::size_t>(b)][static_cast<std::size_t>(ik)];
            mode.coeffs = bs.vectors[static_cast<std::size_t>(b)][static_cast<std::size_t>(ik)];
            const ModeField field = reconstruct_field(
                geom, solver.basis(), {bs.kgrid[static_cast<std::size_t>(ik)], 0.0}, mode,
                settings.parity_grid_nm);
            const double loc = energy_fraction_within(field, geom, 2.0 * w0);
            if (loc > best_loc) {
                best_loc = loc;
                best_parity = classify_parity(field, geom);
            }
        }
        bs.guided[static_cast<std::size_t>(b)] = best_loc >= settings.localization_threshold;
        if (bs.tracking_ok[static_cast<std::size_t>(b)]) {
            bs.parity[static_cast<std::size_t>(b)] = best_parity;
        }
    }
    return bs;
}

} // namespace pcw
