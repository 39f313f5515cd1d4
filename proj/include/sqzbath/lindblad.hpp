#pragma once

// Lindblad master equation engine: right-hand side, time evolution and
// steady states.
//
//   d rho/dt = -i[H, rho] + sum_k rate_k (J_k rho J_k^dag - 1/2 {J_k^dag J_k, rho})
//
// The right-hand side is applied matrix-free in operator form. Operators are
// stored in compressed form when they are sparse enough, which keeps the cost
// per evaluation near O(nnz * d) for the banded ladder operators used here.

#include <Eigen/SparseCore>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sqzbath/operator_algebra.hpp"

namespace sqzbath {

struct LindbladTerm {
    Operator jump;
    double rate = 0.0;  // 1/time
};

namespace detail {

// Left multiplication by a fixed operator, sparse or dense.
class OperatorKernel {
public:
    OperatorKernel() = default;
    explicit OperatorKernel(const Matrix& m);

    // out = op * x
    void apply(const Matrix& x, Matrix& out) const;
    // out += s * op * x
    void apply_add(const Matrix& x, cplx s, Matrix& out) const;
    bool is_sparse() const { return sparse_; }

private:
    bool sparse_ = false;
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> sp_;
    Matrix dense_;
};

}  // namespace detail

class MasterEquation {
public:
    // Throws ShapeError when operators live on different spaces, InvalidParameter
    // when a rate is negative or the Hamiltonian is not Hermitian within 1e-10.
    MasterEquation(Operator hamiltonian, std::vector<LindbladTerm> terms);

    const Operator& hamiltonian() const { return hamiltonian_; }
    const std::vector<LindbladTerm>& terms() const { return terms_; }
    const HilbertSpace& space() const { return hamiltonian_.space(); }
    Eigen::Index dim() const { return hamiltonian_.dim(); }

    // General right-hand side; rho need not be Hermitian.
    void rhs(const Matrix& rho, Matrix& out) const;
    // Faster path that assumes rho is Hermitian.
    void rhs_hermitian(const Matrix& rho, Matrix& out) const;

private:
    Operator hamiltonian_;
    std::vector<LindbladTerm> terms_;
    // K = H - (i/2) sum_k rate_k J_k^dag J_k
    detail::OperatorKernel effective_;
    std::vector<detail::OperatorKernel> jumps_;
    std::vector<double> rates_;
};

Operator rhs(const MasterEquation& me, const Operator& rho);
Operator rhs(const MasterEquation& me, const DensityMatrix& rho);

cplx expectation(const DensityMatrix& rho, const Operator& op);
cplx expectation(const Matrix& rho, const Matrix& op);

enum class Integrator { rk4, dopri5 };

struct EvolveOptions {
    double t_max = 1.0;
    double dt = 1e-2;       // fixed step (rk4) or initial step (dopri5)
    int record_stride = 1;  // records are spaced dt * record_stride apart
    Integrator method = Integrator::rk4;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    bool keep_states = false;
    bool check_positivity = true;  // min eigenvalue at every record
    long max_steps = 50'000'000;

    void validate() const;
};

struct Observable {
    std::string name;
    Operator op;
};

struct EngineDiagnostics {
    double max_trace_drift = 0.0;
    double min_eigenvalue = 1.0;  // over checked records
    long steps = 0;
    long rejected_steps = 0;
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<cplx>> columns;
    std::vector<DensityMatrix> states;  // filled when keep_states is set
    EngineDiagnostics diagnostics;

    const std::vector<cplx>& column(const std::string& name) const;
    std::vector<double> real_column(const std::string& name) const;
};

using RecordCallback = std::function<void(double t, const DensityMatrix& rho)>;

TimeSeries evolve(const MasterEquation& me, const DensityMatrix& rho0, const EvolveOptions& opts,
                  const std::vector<Observable>& observables, const RecordCallback& on_record = {});

enum class SteadyStateMethod { automatic, dense, sparse, integrate };

struct SteadyStateOptions {
    SteadyStateMethod method = SteadyStateMethod::automatic;
    int dense_max_dim = 64;
    double dt = 0.01;              // integration step
    double check_interval = 1.0;   // time between residual checks
    double max_time = 1e5;
    double tolerance = 1e-8;       // integration: stop when ||rhs||_max below this
    double dense_tolerance = 1e-10;
    std::optional<DensityMatrix> initial;
};

struct SteadyStateResult {
    DensityMatrix rho;
    double residual = 0.0;  // ||rhs(rho)||_max
    std::string method;
    double integrated_time = 0.0;
};

// automatic: dense null-space solve when dim <= dense_max_dim, sparse LU for
// larger single-mode problems, long-time integration otherwise.
SteadyStateResult steady_state(const MasterEquation& me, const SteadyStateOptions& opts = {});

// Vectorized Liouvillian in column-stacking convention, vec(rho)(i + j d) = rho(i, j).
Eigen::SparseMatrix<cplx> liouvillian_sparse(const MasterEquation& me);
Matrix liouvillian_dense(const MasterEquation& me);

}  // namespace sqzbath
