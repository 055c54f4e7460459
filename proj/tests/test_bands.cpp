#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pcw/bands.hpp"
#include "support/field_eval.hpp"

using namespace pcw;
using pcw_test::homogeneous_cell;

namespace {

LatticeSpec paper_lattice(double eps_bg = 9.0774504) {
    LatticeSpec lat;
    lat.a_nm = 240.0;
    lat.r0_nm = 64.0;
    lat.eps_bg = eps_bg;
    lat.eps_hole = 1.0;
    return lat;
}

// Synthetic two-band crossing with fixed eigenvectors per physical band.
std::vector<KPointModes> synthetic_crossing(int nk) {
    std::vector<KPointModes> raw(nk);
    for (int ik = 0; ik < nk; ++ik) {
        const double k = nk > 1 ? static_cast<double>(ik) / (nk - 1) : 0.0;
        Mode a;
        a.omega = 0.30 - 0.10 * k; // falling band, vector e0
        a.coeffs = Eigen::VectorXcd::Zero(4);
        a.coeffs(0) = 1.0;
        Mode b;
        b.omega = 0.22 + 0.10 * k; // rising band, vector e1
        b.coeffs = Eigen::VectorXcd::Zero(4);
        b.coeffs(1) = 1.0;
        KPointModes kp;
        kp.kx = k;
        // solver order: ascending omega
        if (a.omega <= b.omega) {
            kp.modes = {a, b};
        } else {
            kp.modes = {b, a};
        }
        raw[ik].kx = k;
        raw[ik].modes = kp.modes;
    }
    return raw;
}

} // namespace

TEST_CASE("find_bandgap: homogeneous medium has no gap") {
    LatticeSpec lat = paper_lattice();
    lat.r0_nm = 0.0;
    CHECK_THROWS_AS(find_bandgap(compute_bulk_bands(lat, 5.0, 40, 4).bands), NoGap);
}

TEST_CASE("find_bandgap: paper lattice with slab-derived index") {
    // regression-pinned after the cutoff convergence study
    const BulkBands bulk = compute_bulk_bands(paper_lattice(), 7.0, 60, 4, 2);
    const GapInfo gap = find_bandgap(bulk.bands);
    CHECK(gap.omega_lo == doctest::Approx(0.231356).epsilon(2e-3));
    CHECK(gap.omega_hi == doctest::Approx(0.276418).epsilon(2e-3));
    // a/lambda for 930 nm lies inside
    CHECK(gap.contains(240.0 / 930.0));
}

TEST_CASE("find_bandgap: gap shrinks and dies as r0 -> 0") {
    auto width = [](double r0) {
        LatticeSpec lat = paper_lattice();
        lat.r0_nm = r0;
        try {
            const GapInfo g = find_bandgap(compute_bulk_bands(lat, 5.0, 40, 4, 2).bands);
            return g.omega_hi - g.omega_lo;
        } catch (const NoGap &) {
            return 0.0;
        }
    };
    const double w10 = width(10.0);
    const double w40 = width(40.0);
    const double w64 = width(64.0);
    CHECK(w10 <= w40);
    CHECK(w40 < w64);
    CHECK(w64 > 0.0);
}

TEST_CASE("track_bands: identity ordering preserved without crossings") {
    std::vector<KPointModes> raw(5);
    for (int ik = 0; ik < 5; ++ik) {
        raw[ik].kx = 0.1 * ik;
        for (int b = 0; b < 3; ++b) {
            Mode m;
            m.omega = 0.1 * (b + 1) + 0.01 * ik;
            m.coeffs = Eigen::VectorXcd::Zero(3);
            m.coeffs(b) = 1.0;
            raw[ik].modes.push_back(m);
        }
    }
    const BandStructure bs = track_bands(raw);
    for (int b = 0; b < 3; ++b) {
        CHECK(bs.tracking_ok[b]);
        for (int ik = 0; ik < 5; ++ik)
            CHECK(bs.omega[b][ik] == doctest::Approx(0.1 * (b + 1) + 0.01 * ik));
    }
}

TEST_CASE("track_bands: labels follow eigenvectors through a crossing") {
    const BandStructure bs = track_bands(synthetic_crossing(21));
    // each tracked band stays linear; second differences vanish
    for (int b = 0; b < 2; ++b) {
        for (int ik = 1; ik < bs.num_k() - 1; ++ik) {
            const double d2 =
                bs.omega[b][ik + 1] - 2.0 * bs.omega[b][ik] + bs.omega[b][ik - 1];
            CHECK(std::abs(d2) < 1e-12);
        }
    }
    // and the sorted-by-frequency view would kink: the tracked bands swap order
    CHECK(bs.omega[0][0] < bs.omega[1][0]);
    CHECK(bs.omega[0][bs.num_k() - 1] > bs.omega[1][bs.num_k() - 1]);
}

TEST_CASE("track_bands: single k-point keeps input order") {
    std::vector<KPointModes> raw = synthetic_crossing(1);
    const BandStructure bs = track_bands(raw);
    CHECK(bs.num_k() == 1);
    CHECK(bs.omega[0][0] <= bs.omega[1][0]);
}

TEST_CASE("track_bands: ambiguity is flagged") {
    // two k-points with disjoint eigenvector spans
    std::vector<KPointModes> raw(2);
    for (int ik = 0; ik < 2; ++ik) {
        raw[ik].kx = ik * 0.1;
        for (int b = 0; b < 2; ++b) {
            Mode m;
            m.omega = 0.1 * (b + 1);
            m.coeffs = Eigen::VectorXcd::Zero(4);
            m.coeffs(2 * ik + b) = 1.0; // {e0,e1} then {e2,e3}
            raw[ik].modes.push_back(m);
        }
    }
    const BandStructure bs = track_bands(raw);
    CHECK_FALSE(bs.tracking_ok[0]);
    CHECK_FALSE(bs.tracking_ok[1]);
    CHECK(bs.parity[0] == Parity::Mixed);
}

TEST_CASE("group_index: homogeneous medium gives the refractive index") {
    const double n = 3.475;
    const SupercellGeometry g = homogeneous_cell(n * n, 240.0);
    const SupercellSolver solver(g, 2.0);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uk(0.05, 0.45);
    for (int trial = 0; trial < 20; ++trial) {
        const double k = uk(rng);
        const double dk = 1e-3;
        std::vector<KPointModes> raw(3);
        for (int i = 0; i < 3; ++i) {
            raw[i].kx = k + (i - 1) * dk;
            raw[i].modes = solver.solve({raw[i].kx, 0.0}, 1);
        }
        const BandStructure bs = track_bands(raw);
        CHECK(std::abs(group_index(bs, 0, 1)) == doctest::Approx(n).epsilon(1e-4 / n));
    }
}

TEST_CASE("group_index: flat band returns the +inf sentinel") {
    std::vector<KPointModes> raw(3);
    for (int ik = 0; ik < 3; ++ik) {
        raw[ik].kx = 0.1 * ik;
        Mode m;
        m.omega = 0.25; // exactly flat
        m.coeffs = Eigen::VectorXcd::Ones(2).normalized();
        raw[ik].modes = {m};
    }
    const BandStructure bs = track_bands(raw);
    CHECK(std::isinf(group_index(bs, 0, 1)));
}

TEST_CASE("group_index: halving the k-step moves ng by under 2 percent") {
    // smooth synthetic band omega(k) = 0.2 + 0.05 k + 0.03 k^3
    auto make = [](int nk) {
        std::vector<KPointModes> raw(nk);
        for (int ik = 0; ik < nk; ++ik) {
            const double k = 0.2 + 0.2 * ik / (nk - 1);
            Mode m;
            m.omega = 0.2 + 0.05 * k + 0.03 * k * k * k;
            m.coeffs = Eigen::VectorXcd::Ones(2).normalized();
            raw[ik].kx = k;
            raw[ik].modes = {m};
        }
        return track_bands(raw);
    };
    const BandStructure coarse = make(11);
    const BandStructure fine = make(21);
    for (int ik = 1; ik + 1 < coarse.num_k(); ++ik) {
        const double a = group_index(coarse, 0, ik);
        const double b = group_index(fine, 0, 2 * ik);
        CHECK(std::abs(a - b) < 0.02 * std::abs(b));
    }
}

TEST_CASE("classify_parity: homogeneous lowest mode is even") {
    const SupercellGeometry g = homogeneous_cell(9.0, 240.0);
    const SupercellSolver solver(g, 2.0);
    const auto modes = solver.solve({0.3, 0.0}, 1);
    const ModeField f = reconstruct_field(g, solver.basis(), {0.3, 0.0}, modes[0], 10.0);
    CHECK(classify_parity(f, g) == Parity::Even);
}

TEST_CASE("classify_parity: W1 in-gap bands are even (lower) and odd (upper)") {
    const LatticeSpec lat = paper_lattice();
    WaveguideParams wp;
    wp.w1_factor = 1.0;
    wp.d1_nm = lat.w0_nm();
    wp.d2_nm = lat.w0_nm();
    wp.rows_per_side = 5;
    const SupercellGeometry geom = build_waveguide_cell(lat, wp);
    const SupercellSolver solver(geom, 3.0);

    // at the zone edge the two defect states sit around 0.236 and 0.252
    const auto modes = solver.solve({0.5, 0.0}, 16);
    int found = 0;
    for (const Mode &m : modes) {
        if (m.omega < 0.225 || m.omega > 0.26) continue;
        const ModeField f = reconstruct_field(geom, solver.basis(), {0.5, 0.0}, m, 8.0);
        if (energy_fraction_within(f, geom, 2.0 * lat.w0_nm()) < 0.8) continue;
        const Parity p = classify_parity(f, geom);
        if (m.omega < 0.245) CHECK(p == Parity::Even);
        if (m.omega > 0.245) CHECK(p == Parity::Odd);
        ++found;
    }
    CHECK(found == 2);
}

TEST_CASE("classify_parity: invariant under a global eigenvector phase") {
    const SupercellGeometry g = homogeneous_cell(9.0, 240.0);
    const SupercellSolver solver(g, 2.0);
    auto modes = solver.solve({0.3, 0.0}, 2);
    const ModeField f0 = reconstruct_field(g, solver.basis(), {0.3, 0.0}, modes[1], 10.0);
    modes[1].coeffs *= std::exp(std::complex<double>(0.0, 0.7));
    const ModeField f1 = reconstruct_field(g, solver.basis(), {0.3, 0.0}, modes[1], 10.0);
    CHECK(classify_parity(f0, g) == classify_parity(f1, g));
}

TEST_CASE("classify_parity: asymmetric geometry rejected") {
    SupercellGeometry g = homogeneous_cell(9.0, 240.0);
    g.symmetry_axis = false;
    const SupercellSolver solver(g, 2.0);
    const auto modes = solver.solve({0.3, 0.0}, 1);
    const ModeField f = reconstruct_field(g, solver.basis(), {0.3, 0.0}, modes[0], 10.0);
    CHECK_THROWS_AS(classify_parity(f, g), AsymmetricGeometry);
}

TEST_CASE("guided_mode_at_wavelength: crossings hit the target frequency") {
    // synthetic guided band omega(k) = 0.20 + 0.10 k^2 on [0,0.5]
    const int nk = 101;
    std::vector<KPointModes> raw(nk);
    for (int ik = 0; ik < nk; ++ik) {
        const double k = 0.5 * ik / (nk - 1);
        Mode m;
        m.omega = 0.20 + 0.10 * k * k;
        m.coeffs = Eigen::VectorXcd::Ones(2).normalized();
        raw[ik].kx = k;
        raw[ik].modes = {m};
    }
    BandStructure bs = track_bands(raw);
    bs.parity[0] = Parity::Even;
    bs.guided[0] = true;

    const GapInfo gap{0.19, 0.24};
    const double target = 0.213;
    const auto crossings = guided_mode_at_wavelength(bs, gap, target);
    REQUIRE(crossings.size() == 1);
    const double k_true = std::sqrt((target - 0.20) / 0.10);
    CHECK(std::abs(crossings[0].k - k_true) < 1e-5);
    CHECK(std::abs(0.20 + 0.10 * crossings[0].k * crossings[0].k - target) < 1e-6);
    CHECK(crossings[0].parity == Parity::Even);

    // frequency above the gap
    CHECK_THROWS_AS(guided_mode_at_wavelength(bs, gap, 0.25), NoneFound);
    // inside the gap but above the band: no crossing
    CHECK_THROWS_AS(guided_mode_at_wavelength(bs, gap, 0.2301), NoneFound);
}

TEST_CASE("scan_waveguide_bands: W1 has exactly one even and one odd guided band") {
    const LatticeSpec lat = paper_lattice();
    WaveguideParams wp;
    wp.w1_factor = 1.0;
    wp.d1_nm = lat.w0_nm();
    wp.d2_nm = lat.w0_nm();
    wp.rows_per_side = 5;
    const SupercellGeometry geom = build_waveguide_cell(lat, wp);
    const GapInfo gap{0.231356, 0.276418};

    WaveguideScanSettings st;
    st.cutoff = 3.0;
    st.nk = 31;
    st.nbands = 18;
    st.threads = 2;
    const BandStructure bs = scan_waveguide_bands(geom, gap, st);

    int even = 0, odd = 0, mixed_guided = 0;
    for (int b = 0; b < bs.num_bands(); ++b) {
        if (!bs.guided[b]) continue;
        if (bs.parity[b] == Parity::Even) ++even;
        if (bs.parity[b] == Parity::Odd) ++odd;
        if (bs.parity[b] == Parity::Mixed) ++mixed_guided;
    }
    CHECK(even == 1);
    CHECK(odd == 1);
    CHECK(mixed_guided == 0);
}
