#pragma once

#include <array>
#include <complex>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "unravel/ensemble.hpp"
#include "unravel/params.hpp"
#include "unravel/polynomial.hpp"

namespace unravel {

enum class Unraveling { Poisson, WienerHeterodyne };

// Hilbert-Schmidt-normalized operator basis {I, sx, sy, sz}/sqrt(2); the
// quantum expectations x_i = <X_i> are the coordinates every moment is built
// from, so <sigma_z> = sqrt(2) x_3 and the observable vector for sigma_z is
// (0,0,0,sqrt(2)).
struct BasisOperator {
    int index = 0;
    std::array<std::array<cplx, 2>, 2> matrix{};
};

const std::array<BasisOperator, 4>& hs_basis();

/// Vector a with <A> = (a, x) for a Hermitian A given by its 2x2 matrix.
std::array<double, 4> observable_vector(const std::array<std::array<cplx, 2>, 2>& A);

/// Noise/drift coefficient polynomials of the single-channel problem,
/// reduced on the physical shell <I> = 1 (so f^0 = g^0 = 0 identically).
struct CoeffTables {
    std::array<Poly, 4> u; // drift: d<X_i> = (u^i, x) dt + martingale
    std::array<Poly, 4> f; // Wiener: <X_i (L - <L>)>
    std::array<Poly, 4> g; // Poisson: (<L+ X_i L> - <L+L><X_i>)/<L+L>
    Poly l;                // <L+L> as affine form
    double max_division_remainder = 0.0; // from the Poisson polynomial division
};

CoeffTables coeff_tables(const SystemParams& p, Unraveling unr);

using MomentIndex = std::vector<std::uint8_t>; // sorted multiset over {0,1,2,3}

struct MomentSystem {
    SystemParams params;
    Unraveling unraveling = Unraveling::Poisson;
    int order = 0;                    // truncation order K
    std::vector<MomentIndex> indices; // degree-major, lexicographic
    Eigen::MatrixXd generator;        // dy/dt = M y
    Eigen::VectorXd y0;               // ground-state product initialization
    CoeffTables tables;

    int index_of(const MomentIndex& idx) const;
};

/// Builds the truncated linear moment system (dropped moments of degree > K).
MomentSystem build_system(const SystemParams& p, Unraveling unr, int order);

struct MomentTrajectory {
    std::vector<double> t_grid;
    Eigen::MatrixXd y; // one column per grid time
    bool truncation_flagged = false; // top-degree moments exceeded their bound
};

/// Propagates y(t) = exp(M t) y0 on a uniform grid (scaling-and-squaring).
MomentTrajectory integrate(const MomentSystem& sys, const std::vector<double>& t_grid);

/// Mean and variance curves of the observable with vector a (e.g. sigma_z).
EnsembleCurve qtav_from_moments(const MomentSystem& sys, const MomentTrajectory& traj,
                                const std::array<double, 4>& a);

std::vector<std::complex<double>> spectrum(const MomentSystem& sys);

/// Re-derives every Poisson moment equation from the raw rational form,
/// dividing the jump products by <L+L>^{m-1}; returns the largest remainder
/// across all equations (0 up to float dust when the algebra is right).
double poisson_division_remainder(const SystemParams& p, int order);

} // namespace unravel
