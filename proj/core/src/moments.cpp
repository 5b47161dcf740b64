#include "unravel/moments.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace unravel {

namespace {

using Mat2 = std::array<std::array<cplx, 2>, 2>;

Mat2 mul(const Mat2& a, const Mat2& b) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

Mat2 add(const Mat2& a, const Mat2& b, cplx fb = 1.0) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = a[i][j] + fb * b[i][j];
    return r;
}

Mat2 scale(const Mat2& a, cplx s) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = s * a[i][j];
    return r;
}

cplx trace(const Mat2& a) { return a[0][0] + a[1][1]; }

constexpr double kInvSqrt2 = 0.70710678118654752440;

const Mat2 kSigmaX{{{cplx(0), cplx(1)}, {cplx(1), cplx(0)}}};
const Mat2 kSigmaY{{{cplx(0), cplx(0, 1)}, {cplx(0, -1), cplx(0)}}}; // s- = (sx + i sy)/2
const Mat2 kSigmaZ{{{cplx(1), cplx(0)}, {cplx(0), cplx(-1)}}};
const Mat2 kIdentity{{{cplx(1), cplx(0)}, {cplx(0), cplx(1)}}};
const Mat2 kSigmaMinus{{{cplx(0), cplx(0)}, {cplx(1), cplx(0)}}}; // |down><up|
const Mat2 kSigmaPlus{{{cplx(0), cplx(1)}, {cplx(0), cplx(0)}}};

std::array<cplx, 4> decompose(const Mat2& A) {
    std::array<cplx, 4> c;
    for (int j = 0; j < 4; ++j) {
        const auto& X = hs_basis()[j].matrix;
        c[j] = trace(mul(X, A)); // X Hermitian: Tr(X^dag A) = Tr(X A)
    }
    return c;
}

/// <A> as an affine polynomial on the physical shell <I> = 1 (x0 -> 1/sqrt2).
Poly reduced_form(const Mat2& A) {
    const auto c = decompose(A);
    Poly p = Poly::constant(c[0] * kInvSqrt2);
    for (int j = 1; j < 4; ++j) p += Poly::variable(j, c[j]);
    return p;
}

Mat2 hamiltonian_matrix(const SystemParams& p) {
    Mat2 h = scale(kSigmaZ, -0.5 * p.detuning);
    h = add(h, kSigmaPlus, p.omega * std::exp(cplx(0.0, p.drive_phase)));
    h = add(h, kSigmaMinus, p.omega * std::exp(cplx(0.0, -p.drive_phase)));
    return h;
}

Mat2 adjoint_lindblad(const SystemParams& p, const Mat2& X) {
    // L^dag[X] = i[H,X] + gamma (s+ X s- - 1/2 {s+s-, X})
    const Mat2 H = hamiltonian_matrix(p);
    Mat2 r = scale(add(mul(H, X), mul(X, H), -1.0), cplx(0.0, 1.0));
    const Mat2 sandwich = mul(kSigmaPlus, mul(X, kSigmaMinus));
    const Mat2 n_op = mul(kSigmaPlus, kSigmaMinus);
    const Mat2 anti = add(mul(n_op, X), mul(X, n_op));
    r = add(r, sandwich, p.gamma);
    r = add(r, anti, -0.5 * p.gamma);
    return r;
}

std::uint64_t key_of(const MomentIndex& idx) {
    std::uint64_t k = 0;
    for (auto d : idx) k = k * 5 + (d + 1);
    return k;
}

void enumerate_indices(int order, std::vector<MomentIndex>& out) {
    // degree-major, lexicographic: guarantees order-K indices are a prefix of
    // the order-(K+1) list, so truncation sub-blocks can be compared directly.
    for (int n = 1; n <= order; ++n) {
        MomentIndex idx(static_cast<std::size_t>(n), 0);
        for (;;) {
            out.push_back(idx);
            int j = n - 1;
            while (j >= 0 && idx[static_cast<std::size_t>(j)] == 3) --j;
            if (j < 0) break;
            const std::uint8_t v = static_cast<std::uint8_t>(idx[static_cast<std::size_t>(j)] + 1);
            for (int k = j; k < n; ++k) idx[static_cast<std::size_t>(k)] = v;
        }
    }
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::array<int, 4> counts_of(const MomentIndex& idx) {
    std::array<int, 4> c{};
    for (auto d : idx) ++c[d];
    return c;
}

Poly monomial_poly(const std::array<int, 4>& counts) {
    Monomial m;
    for (int v = 0; v < 4; ++v) m.e[v] = static_cast<std::uint8_t>(counts[v]);
    Poly p;
    p.add_term(m, 1.0);
    return p;
}

} // namespace

const std::array<BasisOperator, 4>& hs_basis() {
    static const std::array<BasisOperator, 4> basis = [] {
        std::array<BasisOperator, 4> b;
        const Mat2 mats[4] = {kIdentity, kSigmaX, kSigmaY, kSigmaZ};
        for (int i = 0; i < 4; ++i) {
            b[i].index = i;
            b[i].matrix = scale(mats[i], kInvSqrt2);
        }
        return b;
    }();
    return basis;
}

std::array<double, 4> observable_vector(const Mat2& A) {
    const auto c = decompose(A);
    std::array<double, 4> a;
    for (int j = 0; j < 4; ++j) a[j] = std::real(c[j]);
    return a;
}

CoeffTables coeff_tables(const SystemParams& p, Unraveling unr) {
    (void)unr; // both noise tables are cheap; callers pick the relevant one
    if (p.nbar != 0.0 || p.efficiency != 1.0)
        throw param_error("moment tables assume the ideal single channel L = sqrt(gamma) s-");
    CoeffTables t;
    const double sg = std::sqrt(p.gamma);

    for (int i = 0; i < 4; ++i)
        t.u[i] = reduced_form(adjoint_lindblad(p, hs_basis()[i].matrix));

    t.l = reduced_form(scale(mul(kSigmaPlus, kSigmaMinus), p.gamma));

    const Poly l_form = reduced_form(scale(kSigmaMinus, sg)); // <L>
    for (int i = 0; i < 4; ++i) {
        const Poly xi = (i == 0) ? Poly::constant(kInvSqrt2) : Poly::variable(i);
        // f^i = <X_i L> - <L> x_i
        t.f[i] = reduced_form(scale(mul(hs_basis()[i].matrix, kSigmaMinus), sg)) - l_form * xi;
        // g^i = (<L+ X_i L> - <L+L> x_i) / <L+L>, exact polynomial division
        const Poly vi =
            reduced_form(scale(mul(kSigmaPlus, mul(hs_basis()[i].matrix, kSigmaMinus)), p.gamma));
        const auto div = divide_affine(vi - t.l * xi, t.l);
        t.g[i] = div.quotient;
        t.max_division_remainder =
            std::max(t.max_division_remainder, div.remainder.max_abs_coeff());
    }
    if (t.max_division_remainder > 1e-12)
        throw numerical_error("Poisson polynomial division left a nonzero remainder");
    return t;
}

int MomentSystem::index_of(const MomentIndex& idx) const {
    const std::uint64_t k = key_of(idx);
    for (std::size_t i = 0; i < indices.size(); ++i)
        if (key_of(indices[i]) == k) return static_cast<int>(i);
    return -1;
}

MomentSystem build_system(const SystemParams& p, Unraveling unr, int order) {
    if (order < 2) throw param_error("truncation order must be >= 2");
    MomentSystem sys;
    sys.params = p;
    sys.unraveling = unr;
    sys.order = order;
    sys.tables = coeff_tables(p, unr);
    enumerate_indices(order, sys.indices);

    std::unordered_map<std::uint64_t, int> lookup;
    lookup.reserve(sys.indices.size() * 2);
    for (std::size_t i = 0; i < sys.indices.size(); ++i) lookup[key_of(sys.indices[i])] = static_cast<int>(i);

    const int dim = static_cast<int>(sys.indices.size());
    sys.generator = Eigen::MatrixXd::Zero(dim, dim);

    // g and f powers reused across equations
    std::array<std::vector<Poly>, 4> gpow;
    for (int v = 0; v < 4; ++v) {
        gpow[v].resize(static_cast<std::size_t>(order) + 1);
        gpow[v][0] = Poly::constant(1.0);
        for (int e = 1; e <= order; ++e) gpow[v][e] = gpow[v][e - 1] * sys.tables.g[v];
    }
    std::array<std::array<Poly, 4>, 4> fpair;
    for (int v = 0; v < 4; ++v)
        for (int w = v; w < 4; ++w) {
            Poly prod = sys.tables.f[v] * sys.tables.f[w].conjugated();
            Poly pair = prod + prod.conjugated();
            if (pair.max_abs_imag() > 1e-12)
                throw numerical_error("Wiener pair term has a nonreal coefficient");
            fpair[v][w] = pair;
        }

    const int x0_col = lookup.at(key_of(MomentIndex{0}));
    const double sqrt2 = std::sqrt(2.0);

    for (int row = 0; row < dim; ++row) {
        const auto counts = counts_of(sys.indices[static_cast<std::size_t>(row)]);
        Poly rhs;

        for (int v = 0; v < 4; ++v) { // drift, one term per slot
            if (counts[v] == 0 || sys.tables.u[v].is_zero()) continue;
            auto rest = counts;
            --rest[v];
            rhs += sys.tables.u[v] * monomial_poly(rest) * cplx(static_cast<double>(counts[v]));
        }

        if (unr == Unraveling::WienerHeterodyne) {
            for (int v = 0; v < 4; ++v)
                for (int w = v; w < 4; ++w) {
                    const double mult = (v == w) ? binom(counts[v], 2)
                                                 : static_cast<double>(counts[v]) * counts[w];
                    if (mult == 0.0 || fpair[v][w].is_zero()) continue;
                    auto rest = counts;
                    --rest[v];
                    --rest[w];
                    rhs += fpair[v][w] * monomial_poly(rest) * cplx(mult);
                }
        } else {
            // every sub-multiset of >= 2 slots jumps together
            for (int k0 = 0; k0 <= counts[0]; ++k0)
                for (int k1 = 0; k1 <= counts[1]; ++k1)
                    for (int k2 = 0; k2 <= counts[2]; ++k2)
                        for (int k3 = 0; k3 <= counts[3]; ++k3) {
                            const int m = k0 + k1 + k2 + k3;
                            if (m < 2) continue;
                            const double mult = binom(counts[0], k0) * binom(counts[1], k1) *
                                                binom(counts[2], k2) * binom(counts[3], k3);
                            Poly gp = gpow[0][k0] * gpow[1][k1];
                            gp *= gpow[2][k2];
                            gp *= gpow[3][k3];
                            if (gp.is_zero()) continue;
                            auto rest = counts;
                            rest[0] -= k0;
                            rest[1] -= k1;
                            rest[2] -= k2;
                            rest[3] -= k3;
                            rhs += gp * sys.tables.l * monomial_poly(rest) * cplx(mult);
                        }
        }

        // scatter monomials onto moment columns. x0 = <I>/sqrt2 is pathwise
        // constant, so x0^a M is the same moment as 2^{-a/2} M: reduce powers
        // of x0 exactly instead of spending truncation budget on them, and
        // let pure constants ride on the x0 carrier itself.
        for (const auto& [mono, coef] : rhs.terms()) {
            if (std::abs(std::imag(coef)) > 1e-12)
                throw numerical_error("moment equation coefficient has a nonreal part");
            double c = std::real(coef);
            Monomial m = mono;
            if (m.e[0] > 0) {
                c *= std::pow(0.5, 0.5 * m.e[0]);
                m.e[0] = 0;
            }
            const int deg = m.degree();
            if (deg == 0) {
                sys.generator(row, x0_col) += sqrt2 * c;
                continue;
            }
            if (deg > order) continue; // hard truncation
            MomentIndex target;
            for (std::uint8_t v = 1; v < 4; ++v)
                for (int e = 0; e < m.e[v]; ++e) target.push_back(v);
            sys.generator(row, lookup.at(key_of(target))) += c;
        }
    }

    // deterministic ground-state start: moments are products of x(0)
    sys.y0 = Eigen::VectorXd::Zero(dim);
    const std::array<double, 4> x0vals{kInvSqrt2, 0.0, 0.0, -kInvSqrt2};
    for (int i = 0; i < dim; ++i) {
        double v = 1.0;
        for (auto d : sys.indices[static_cast<std::size_t>(i)]) v *= x0vals[d];
        sys.y0[i] = v;
    }
    return sys;
}

MomentTrajectory integrate(const MomentSystem& sys, const std::vector<double>& t_grid) {
    if (t_grid.size() < 2 || t_grid.front() != 0.0)
        throw param_error("moment integration grid must start at 0 with >= 2 points");
    const double h = t_grid[1] - t_grid[0];
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (std::abs(t_grid[i] - t_grid[i - 1] - h) > 1e-9)
            throw param_error("moment integration grid must be uniform");

    MomentTrajectory out;
    out.t_grid = t_grid;
    const Eigen::MatrixXd step = (sys.generator * h).exp();
    out.y.resize(sys.y0.size(), static_cast<Eigen::Index>(t_grid.size()));
    Eigen::VectorXd y = sys.y0;
    out.y.col(0) = y;
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        y = step * y;
        out.y.col(static_cast<Eigen::Index>(k)) = y;
    }

    // truncation-quality heuristic: |E prod x| <= 2^{-n/2} for physical paths
    for (std::size_t i = 0; i < sys.indices.size(); ++i) {
        if (static_cast<int>(sys.indices[i].size()) != sys.order) continue;
        const double bound = 2.0 * std::pow(2.0, -0.5 * sys.order);
        if (out.y.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() > bound) {
            out.truncation_flagged = true;
            break;
        }
    }
    return out;
}

EnsembleCurve qtav_from_moments(const MomentSystem& sys, const MomentTrajectory& traj,
                                const std::array<double, 4>& a) {
    std::array<int, 4> first;
    std::array<std::array<int, 4>, 4> second;
    for (std::uint8_t i = 0; i < 4; ++i) {
        first[i] = sys.index_of({i});
        for (std::uint8_t j = i; j < 4; ++j) {
            MomentIndex idx{i, j};
            second[i][j] = sys.index_of(idx);
        }
    }
    EnsembleCurve c;
    c.t_grid = traj.t_grid;
    c.n_traj = 0;
    const std::size_t nt = traj.t_grid.size();
    c.mean.resize(nt);
    c.qtav.resize(nt);
    c.stderr_mean.assign(nt, 0.0);
    c.stderr_qtav.assign(nt, 0.0);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto y = traj.y.col(static_cast<Eigen::Index>(t));
        double mean = 0.0, sq = 0.0;
        for (int i = 0; i < 4; ++i) {
            if (a[i] == 0.0) continue;
            mean += a[i] * y[first[i]];
            for (int j = i; j < 4; ++j) {
                if (a[j] == 0.0) continue;
                const double w = (i == j) ? 1.0 : 2.0;
                sq += w * a[i] * a[j] * y[second[i][j]];
            }
        }
        c.mean[t] = mean;
        c.qtav[t] = sq - mean * mean;
    }
    return c;
}

std::vector<std::complex<double>> spectrum(const MomentSystem& sys) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(sys.generator, false);
    const auto& ev = solver.eigenvalues();
    std::vector<std::complex<double>> out(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) out[static_cast<std::size_t>(i)] = ev[i];
    return out;
}

double poisson_division_remainder(const SystemParams& p, int order) {
    const CoeffTables t = coeff_tables(p, Unraveling::Poisson);
    // raw numerators N_v = <L+ X_v L> - <L+L> x_v (before any division)
    std::array<Poly, 4> numer;
    for (int v = 0; v < 4; ++v) {
        const Poly xi = (v == 0) ? Poly::constant(kInvSqrt2) : Poly::variable(v);
        numer[v] = reduced_form(scale(mul(kSigmaPlus, mul(hs_basis()[v].matrix, kSigmaMinus)),
                                      p.gamma)) -
                   t.l * xi;
    }
    std::vector<MomentIndex> indices;
    enumerate_indices(order, indices);
    double worst = 0.0;
    for (const auto& idx : indices) {
        const auto counts = counts_of(idx);
        for (int k0 = 0; k0 <= counts[0]; ++k0)
            for (int k1 = 0; k1 <= counts[1]; ++k1)
                for (int k2 = 0; k2 <= counts[2]; ++k2)
                    for (int k3 = 0; k3 <= counts[3]; ++k3) {
                        const int m = k0 + k1 + k2 + k3;
                        if (m < 2) continue;
                        Poly prod = Poly::constant(1.0);
                        const int kk[4] = {k0, k1, k2, k3};
                        for (int v = 0; v < 4; ++v)
                            for (int e = 0; e < kk[v]; ++e) prod *= numer[v];
                        if (prod.is_zero()) continue;
                        auto rest = counts;
                        rest[0] -= k0;
                        rest[1] -= k1;
                        rest[2] -= k2;
                        rest[3] -= k3;
                        prod *= monomial_poly(rest);
                        const double scale_ref = std::max(1.0, prod.max_abs_coeff());
                        for (int d = 0; d < m - 1; ++d) {
                            const auto div = divide_affine(prod, t.l);
                            worst = std::max(worst, div.remainder.max_abs_coeff() / scale_ref);
                            prod = div.quotient;
                        }
                    }
    }
    return worst;
}

} // namespace unravel
