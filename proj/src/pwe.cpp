#include "pcw/pwe.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace pcw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::complex<double> kI{0.0, 1.0};

// Reciprocal vectors of the cell in 2*pi/a units.
void reciprocal_vectors(const SupercellGeometry &geom, Vec2 &b1, Vec2 &b2) {
    const double a = geom.lattice.a_nm;
    const Vec2 a1 = {geom.a1_nm.x / a, geom.a1_nm.y / a};
    const Vec2 a2 = {geom.a2_nm.x / a, geom.a2_nm.y / a};
    const double det = a1.x * a2.y - a1.y * a2.x;
    // b_i . a_j = delta_ij in these units (the 2*pi went into the unit).
    b1 = {a2.y / det, -a2.x / det};
    b2 = {-a1.y / det, a1.x / det};
}

bool is_rectangular(const SupercellGeometry &geom) {
    const double scale = std::max(norm(geom.a1_nm), norm(geom.a2_nm));
    return std::abs(geom.a1_nm.y) < 1e-9 * scale && std::abs(geom.a2_nm.x) < 1e-9 * scale;
}

} // namespace

PlaneWaveBasis build_basis(const SupercellGeometry &geom, double cutoff, int cap) {
    if (!(cutoff >= 0.0)) throw InvalidSpec("basis cutoff must be non-negative");

    PlaneWaveBasis basis;
    basis.cutoff = cutoff;
    reciprocal_vectors(geom, basis.b1, basis.b2);

    // Loose index bounds from a lower bound on the smallest singular value
    // of [b1 b2]: sigma_min >= det / (|b1| + |b2|).
    const double det = std::abs(basis.b1.x * basis.b2.y - basis.b1.y * basis.b2.x);
    const double sigma_lower = det / (norm(basis.b1) + norm(basis.b2));
    const int mmax = static_cast<int>(std::ceil((cutoff + 1e-12) / sigma_lower)) + 1;

    const double limit2 = cutoff * cutoff * (1.0 + 1e-9);
    for (int m = -mmax; m <= mmax; ++m) {
        for (int n = -mmax; n <= mmax; ++n) {
            const Vec2 g = {m * basis.b1.x + n * basis.b2.x, m * basis.b1.y + n * basis.b2.y};
            if (dot(g, g) <= limit2) {
                basis.index.push_back({m, n});
                basis.g.push_back(g);
            }
        }
    }

    std::vector<std::size_t> order(basis.g.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        const double nl = dot(basis.g[lhs], basis.g[lhs]);
        const double nr = dot(basis.g[rhs], basis.g[rhs]);
        if (nl != nr) return nl < nr;
        if (basis.index[lhs].m != basis.index[rhs].m) return basis.index[lhs].m < basis.index[rhs].m;
        return basis.index[lhs].n < basis.index[rhs].n;
    });
    PlaneWaveBasis sorted;
    sorted.cutoff = basis.cutoff;
    sorted.b1 = basis.b1;
    sorted.b2 = basis.b2;
    sorted.index.reserve(order.size());
    sorted.g.reserve(order.size());
    for (std::size_t i : order) {
        sorted.index.push_back(basis.index[i]);
        sorted.g.push_back(basis.g[i]);
    }

    if (sorted.size() < 2)
        throw BasisTooSmall("basis has fewer than two plane waves; increase the cutoff");
    if (sorted.size() > cap) {
        std::ostringstream oss;
        oss << "basis size " << sorted.size() << " exceeds cap " << cap;
        throw BasisTooLarge(oss.str());
    }
    return sorted;
}

Eigen::MatrixXcd epsilon_matrix(const SupercellGeometry &geom, const PlaneWaveBasis &basis) {
    const int n = basis.size();
    int mspan = 0;
    int nspan = 0;
    for (const GIndex &gi : basis.index) {
        mspan = std::max(mspan, std::abs(gi.m));
        nspan = std::max(nspan, std::abs(gi.n));
    }

    // eps(G - G') depends only on the index difference; tabulate once.
    const int mdim = 4 * mspan + 1;
    const int ndim = 4 * nspan + 1;
    const double two_pi_over_a = 2.0 * kPi / geom.lattice.a_nm;
    std::vector<std::complex<double>> table(static_cast<std::size_t>(mdim) * ndim);
    for (int dm = -2 * mspan; dm <= 2 * mspan; ++dm) {
        for (int dn = -2 * nspan; dn <= 2 * nspan; ++dn) {
            const Vec2 g = {(dm * basis.b1.x + dn * basis.b2.x) * two_pi_over_a,
                            (dm * basis.b1.y + dn * basis.b2.y) * two_pi_over_a};
            table[static_cast<std::size_t>(dm + 2 * mspan) * ndim + (dn + 2 * nspan)] =
                epsilon_fourier_coefficient(geom, g);
        }
    }

    Eigen::MatrixXcd eps(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int dm = basis.index[i].m - basis.index[j].m;
            const int dn = basis.index[i].n - basis.index[j].n;
            eps(i, j) = table[static_cast<std::size_t>(dm + 2 * mspan) * ndim + (dn + 2 * nspan)];
        }
    }
    return eps;
}

Eigen::MatrixXcd epsilon_fourier(const SupercellGeometry &geom, const std::vector<Vec2> &gvecs) {
    const int n = static_cast<int>(gvecs.size());
    Eigen::MatrixXcd eps(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            eps(i, j) = epsilon_fourier_coefficient(geom, gvecs[i] - gvecs[j]);
        }
    }
    return eps;
}

namespace {

// Shared by SupercellSolver and the free assemble function.
Eigen::MatrixXcd invert_epsilon(const Eigen::MatrixXcd &eps, double *condition_out) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(eps);
    if (es.info() != Eigen::Success) throw EigSolveFailure("eigensolve of epsilon matrix failed");
    const auto &vals = es.eigenvalues();
    const double lambda_min = vals(0);
    const double lambda_max = vals(vals.size() - 1);
    const double condition = lambda_min > 0.0 ? lambda_max / lambda_min
                                              : std::numeric_limits<double>::infinity();
    if (condition_out) *condition_out = condition;
    if (!(lambda_min > 0.0) || condition > 1e12) {
        std::ostringstream oss;
        oss << "epsilon matrix is numerically singular (condition " << condition << ")";
        throw SingularEpsilon(oss.str());
    }
    Eigen::MatrixXcd eta =
        es.eigenvectors() * vals.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    eta = 0.5 * (eta + Eigen::MatrixXcd(eta.adjoint()));
    return eta;
}

Eigen::MatrixXcd te_operator_matrix(const PlaneWaveBasis &basis, const Eigen::MatrixXcd &eta,
                                    Vec2 k) {
    const int n = basis.size();
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        const Vec2 ki = k + basis.g[i];
        for (int j = 0; j < n; ++j) {
            const Vec2 kj = k + basis.g[j];
            m(i, j) = dot(ki, kj) * eta(i, j);
        }
    }
    m = 0.5 * (m + Eigen::MatrixXcd(m.adjoint()));
    return m;
}

} // namespace

PlaneWaveOperator assemble_te_operator(const SupercellGeometry &geom, const PlaneWaveBasis &basis,
                                       Vec2 k) {
    const Eigen::MatrixXcd eta = invert_epsilon(epsilon_matrix(geom, basis), nullptr);
    PlaneWaveOperator op;
    op.k = k;
    op.basis = std::make_shared<PlaneWaveBasis>(basis);
    op.matrix = te_operator_matrix(basis, eta, k);
    return op;
}

std::vector<Mode> solve_bands(const PlaneWaveOperator &op, int nbands) {
    const int n = static_cast<int>(op.matrix.rows());
    if (nbands < 1 || nbands > n) throw InvalidSpec("nbands must be in [1, basis size]");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.matrix);
    if (es.info() != Eigen::Success) throw EigSolveFailure("Hermitian eigensolve failed");

    std::vector<Mode> modes(static_cast<std::size_t>(nbands));
    for (int b = 0; b < nbands; ++b) {
        const double lambda = es.eigenvalues()(b);
        Mode &mode = modes[static_cast<std::size_t>(b)];
        mode.omega = lambda <= 1e-16 ? 0.0 : std::sqrt(lambda);
        mode.coeffs = es.eigenvectors().col(b);

        // Deterministic phase: largest component rotated to real positive.
        int imax = 0;
        double amax = -1.0;
        for (int i = 0; i < n; ++i) {
            const double a = std::norm(mode.coeffs(i));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        const std::complex<double> pivot = mode.coeffs(imax);
        if (std::abs(pivot) > 0.0) mode.coeffs *= std::conj(pivot) / std::abs(pivot);
    }
    return modes;
}

SupercellSolver::SupercellSolver(SupercellGeometry geom, double cutoff, int basis_cap)
    : geom_(std::move(geom)) {
    basis_ = std::make_shared<PlaneWaveBasis>(build_basis(geom_, cutoff, basis_cap));
    eta_ = invert_epsilon(epsilon_matrix(geom_, *basis_), &eps_condition_);
}

PlaneWaveOperator SupercellSolver::assemble(Vec2 k) const {
    PlaneWaveOperator op;
    op.k = k;
    op.basis = basis_;
    op.matrix = te_operator_matrix(*basis_, eta_, k);
    return op;
}

std::vector<Mode> SupercellSolver::solve(Vec2 k, int nbands) const {
    return solve_bands(assemble(k), nbands);
}

ModeField reconstruct_field(const SupercellGeometry &geom, const PlaneWaveBasis &basis, Vec2 k,
                            const Mode &mode, double grid_spacing_nm) {
    if (!is_rectangular(geom))
        throw InvalidSpec("field reconstruction requires an axis-aligned rectangular cell");
    if (mode.coeffs.size() != basis.size())
        throw InvalidSpec("eigenvector length does not match basis size");
    if (mode.omega <= 1e-12)
        throw ZeroField("zero-frequency mode has no transverse electric field");

    const double lx = geom.a1_nm.x;
    const double ly = geom.a2_nm.y;
    ModeField field;
    field.k = k;
    field.omega = mode.omega;

    FieldGrid &grid = field.grid;
    grid.nx = std::max(4, static_cast<int>(std::lround(lx / grid_spacing_nm)));
    int ny = std::max(4, static_cast<int>(std::lround(ly / grid_spacing_nm)));
    if (ny % 2 == 1) ++ny; // keep the y -> -y mirror an exact index map
    grid.ny = ny;
    grid.dx_nm = lx / grid.nx;
    grid.dy_nm = ly / grid.ny;
    grid.x0_nm = 0.0;
    grid.y0_nm = -0.5 * ly;

    const double a = geom.lattice.a_nm;
    const int n = basis.size();

    // The sum over G separates into per-m column transforms followed by a
    // phase multiply in x: G = m b1 + n b2 on the rectangular reciprocal.
    int mmin = 0, mmax = 0;
    for (const GIndex &gi : basis.index) {
        mmin = std::min(mmin, gi.m);
        mmax = std::max(mmax, gi.m);
    }
    const int mcount = mmax - mmin + 1;

    Eigen::MatrixXcd hz_part = Eigen::MatrixXcd::Zero(grid.ny, mcount);
    Eigen::MatrixXcd ex_part = Eigen::MatrixXcd::Zero(grid.ny, mcount);
    Eigen::MatrixXcd ey_part = Eigen::MatrixXcd::Zero(grid.ny, mcount);

    for (int idx = 0; idx < n; ++idx) {
        const int mcol = basis.index[idx].m - mmin;
        const Vec2 kg = k + basis.g[idx]; // 2*pi/a units
        const std::complex<double> h = mode.coeffs(idx);
        // Transverse E from the TE relation E ~ (z x grad Hz) / (eps w).
        const std::complex<double> fx = kI * (-kg.y) * h;
        const std::complex<double> fy = kI * (kg.x) * h;
        const double phase_rate = 2.0 * kPi * kg.y / a; // rad/nm in y
        for (int j = 0; j < grid.ny; ++j) {
            const double yp = grid.y(j) * phase_rate;
            const std::complex<double> ph(std::cos(yp), std::sin(yp));
            hz_part(j, mcol) += h * ph;
            ex_part(j, mcol) += fx * ph;
            ey_part(j, mcol) += fy * ph;
        }
    }

    field.hz = Eigen::ArrayXXcd::Zero(grid.ny, grid.nx);
    field.ex = Eigen::ArrayXXcd::Zero(grid.ny, grid.nx);
    field.ey = Eigen::ArrayXXcd::Zero(grid.ny, grid.nx);

    for (int mcol = 0; mcol < mcount; ++mcol) {
        const double kx = k.x + (mmin + mcol) * 1.0; // b1 = (1, 0) for rectangular cells
        const double rate = 2.0 * kPi * kx / a;
        for (int i = 0; i < grid.nx; ++i) {
            const double xp = grid.x(i) * rate;
            const std::complex<double> ph(std::cos(xp), std::sin(xp));
            for (int j = 0; j < grid.ny; ++j) {
                field.hz(j, i) += hz_part(j, mcol) * ph;
                field.ex(j, i) += ex_part(j, mcol) * ph;
                field.ey(j, i) += ey_part(j, mcol) * ph;
            }
        }
    }

    // 1/(eps w) completes the TE relation; overall scale is fixed later by
    // normalize_mode.
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double eps = geom.eps_at(grid.x(i), grid.y(j));
            const double scale = 1.0 / (eps * mode.omega);
            field.ex(j, i) *= scale;
            field.ey(j, i) *= scale;
        }
    }
    return field;
}

double energy_fraction_within(const ModeField &field, const SupercellGeometry &geom,
                              double half_width_nm) {
    double total = 0.0;
    double inner = 0.0;
    for (int j = 0; j < field.grid.ny; ++j) {
        const double y = field.grid.y(j);
        for (int i = 0; i < field.grid.nx; ++i) {
            const double eps = geom.eps_at(field.grid.x(i), y);
            const double u = eps * (std::norm(field.ex(j, i)) + std::norm(field.ey(j, i)));
            total += u;
            if (std::abs(y) <= half_width_nm) inner += u;
        }
    }
    if (total <= 0.0) throw ZeroField("field energy vanished");
    return inner / total;
}

} // namespace pcw
