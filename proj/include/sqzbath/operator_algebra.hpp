#pragma once

// Operators and states on truncated tensor-product Hilbert spaces.
//
// Mode ordering is system first, bath second. Kronecker products follow the
// order of HilbertSpace::mode_dims, so the last mode is the fastest-varying
// index of the flattened basis.
//
// Qubit basis: index 0 is |g> (sigma_z = -1), index 1 is |e> (sigma_z = +1),
// which makes sigma_minus identical to annihilation(2).

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

#include "sqzbath/errors.hpp"

namespace sqzbath {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Warnings = std::vector<std::string>;

inline constexpr cplx kI{0.0, 1.0};

class HilbertSpace {
public:
    explicit HilbertSpace(std::vector<int> mode_dims);

    static HilbertSpace single(int dim) { return HilbertSpace({dim}); }

    const std::vector<int>& mode_dims() const { return dims_; }
    int num_modes() const { return static_cast<int>(dims_.size()); }
    int mode_dim(int slot) const;
    Eigen::Index total_dim() const { return total_; }

    bool operator==(const HilbertSpace& other) const { return dims_ == other.dims_; }
    bool operator!=(const HilbertSpace& other) const { return !(*this == other); }

    std::string describe() const;

private:
    std::vector<int> dims_;
    Eigen::Index total_ = 1;
};

class Operator {
public:
    Operator(HilbertSpace space, Matrix matrix);

    const HilbertSpace& space() const { return space_; }
    const Matrix& matrix() const { return matrix_; }
    Eigen::Index dim() const { return matrix_.rows(); }

    Operator adjoint() const { return Operator(space_, matrix_.adjoint()); }
    cplx trace() const { return matrix_.trace(); }

    Operator& operator+=(const Operator& rhs);
    Operator& operator-=(const Operator& rhs);
    Operator& operator*=(cplx s);

    friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
    friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
    friend Operator operator*(Operator lhs, cplx s) { return lhs *= s; }
    friend Operator operator*(cplx s, Operator rhs) { return rhs *= s; }
    friend Operator operator*(const Operator& lhs, const Operator& rhs);

private:
    HilbertSpace space_;
    Matrix matrix_;
};

Operator commutator(const Operator& a, const Operator& b);

// Tolerances used by the DensityMatrix invariants.
struct StateTolerance {
    double hermiticity = 1e-10;
    double trace = 1e-9;
    double min_eigenvalue = -1e-9;
};

struct StateCheck {
    double hermiticity_error = 0.0;  // max |rho - rho^dagger| elementwise
    double trace_error = 0.0;        // |Tr rho - 1|
    double min_eigenvalue = 0.0;
    bool ok(const StateTolerance& tol = {}) const;
};

StateCheck check_state(const Matrix& rho);

// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
public:
    // Validates against the default StateTolerance; throws InvalidState.
    explicit DensityMatrix(Operator op, const StateTolerance& tol = {});

    // Skips validation. For engine internals that maintain the invariants
    // themselves and check them a posteriori.
    static DensityMatrix unchecked(Operator op);

    const Operator& op() const { return op_; }
    const Matrix& matrix() const { return op_.matrix(); }
    const HilbertSpace& space() const { return op_.space(); }
    Eigen::Index dim() const { return op_.dim(); }

private:
    struct Unchecked {};
    DensityMatrix(Operator op, Unchecked) : op_(std::move(op)) {}
    Operator op_;
};

enum class Pauli { x, y, z, plus, minus };

Operator identity(const HilbertSpace& space);
Operator annihilation(int dim);
Operator creation(int dim);
Operator number(int dim);
Operator pauli(Pauli which);

// op acting on mode `slot`, identity elsewhere.
Operator embed(const Operator& op, const HilbertSpace& space, int slot);

Operator tensor(const Operator& a, const Operator& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

// Matrix elements <m|S(xi)|n>, m, n < dim, of S(xi) = exp[(conj(xi) a^2 -
// xi a^dag^2) / 2]. The exponential is taken in a padded space so the block
// matches the untruncated operator. Appends a warning when exp(2|xi|) > dim/4.
Operator squeeze_operator(int dim, cplx xi, Warnings* warnings = nullptr);

DensityMatrix thermal_state(int dim, double nbar);

// Squeezed thermal state labelled so that the fluctuations are enhanced by
// e^r along the quadrature angle theta/2 and reduced along theta/2 + pi/2:
// S(xi)^dag rho_th S(xi). This is the stationary state of a mode relaxing
// through the jump S(xi)^dag a S(xi). Built in a padded space, projected
// onto the first dim levels and renormalized; warns when more than 1e-6 of
// the population is projected away.
DensityMatrix squeezed_thermal_state(int dim, double nbar, cplx xi, Warnings* warnings = nullptr);

DensityMatrix pure_state(const HilbertSpace& space, const Vector& ket);
Vector basis_ket(int dim, int n);

// Reduced state over the modes listed in `keep` (kept in ascending order).
DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<int> keep);
Operator partial_trace(const Operator& op, std::vector<int> keep);

// X_phi = a e^{-i phi} + a^dag e^{i phi}; vacuum variance 1.
Operator quadrature_operator(int dim, double phi);

// Summed population of the top two Fock levels of `slot`.
double top_fock_population(const DensityMatrix& rho, int slot);

}  // namespace sqzbath
