#pragma once

#include <array>
#include <complex>

#include "unravel/params.hpp"

namespace unravel {

using cplx = std::complex<double>;

// Basis convention throughout: index 0 = excited |up>, index 1 = ground |down>.
// sigma_z = diag(+1, -1), sigma_- |up> = |down>.

enum class Observable { SigmaX, SigmaY, SigmaZ, ExcitedPop, SigmaMinus };

struct BlochVector {
    double x = 0.0, y = 0.0, z = 0.0;

    double norm_sq() const { return x * x + y * y + z * z; }
    bool inside_sphere(double tol = 1e-9) const { return norm_sq() <= 1.0 + tol; }
};

/// Normalized two-component state of the atom.
struct PureState {
    cplx up{0.0, 0.0};
    cplx down{1.0, 0.0};

    static PureState ground() { return {}; }

    double norm_sq() const { return std::norm(up) + std::norm(down); }
    void normalize();

    double sigma_x() const { return 2.0 * std::real(std::conj(c_up()) * c_down()); }
    double sigma_y() const { return -2.0 * std::imag(std::conj(c_up()) * c_down()); }
    double sigma_z() const { return std::norm(up) - std::norm(down); }
    cplx sigma_minus() const { return std::conj(c_down()) * c_up(); }
    double excited_pop() const { return std::norm(up); }

    BlochVector bloch() const { return {sigma_x(), sigma_y(), sigma_z()}; }

  private:
    cplx c_up() const { return up; }
    cplx c_down() const { return down; }
};

/// 2x2 density matrix; conditional states may carry trace != 1, the norm is
/// tracked explicitly by the propagation schemes.
struct MixedState {
    // rho[0][0] = <up|rho|up>, rho[0][1] = <up|rho|down>, etc.
    std::array<std::array<cplx, 2>, 2> rho{};

    static MixedState ground();
    static MixedState excited();
    static MixedState maximally_mixed();
    static MixedState from_pure(const PureState& psi);
    static MixedState from_bloch(const BlochVector& b, double trace = 1.0);

    double trace_re() const { return std::real(rho[0][0] + rho[1][1]); }
    void rescale(double f);

    double sigma_x() const { return 2.0 * std::real(rho[1][0]); }
    double sigma_y() const { return -2.0 * std::imag(rho[1][0]); }
    double sigma_z() const { return std::real(rho[0][0] - rho[1][1]); }
    cplx sigma_minus() const { return rho[0][1]; } // Tr(sigma_- rho) = <down|rho|up>
    double excited_pop() const { return std::real(rho[0][0]); }

    BlochVector bloch() const { return {sigma_x(), sigma_y(), sigma_z()}; }
    double purity() const;

    /// Hermiticity defect max|rho - rho^dag|.
    double hermiticity_defect() const;
    /// Smallest eigenvalue (exact for 2x2); >= -1e-10 for physical states.
    double min_eigenvalue() const;
    /// Throws param_error unless Hermitian, unit-trace and positive within tol.
    void require_valid(double tol = 1e-10) const;
};

double expectation(const PureState& psi, Observable o);
double expectation(const MixedState& rho, Observable o);
cplx expectation_complex(const PureState& psi, Observable o);
cplx expectation_complex(const MixedState& rho, Observable o);

} // namespace unravel
