#include "sqzbath/lindblad.hpp"

#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sqzbath {

namespace detail {

OperatorKernel::OperatorKernel(const Matrix& m) {
    const Eigen::Index nnz = (m.array() != cplx(0.0)).count();
    // Dense GEMM wins once a quarter of the entries are populated.
    sparse_ = nnz * 4 < m.size();
    if (sparse_) {
        sp_ = m.sparseView();
        sp_.makeCompressed();
    } else {
        dense_ = m;
    }
}

void OperatorKernel::apply(const Matrix& x, Matrix& out) const {
    if (sparse_)
        out.noalias() = sp_ * x;
    else
        out.noalias() = dense_ * x;
}

void OperatorKernel::apply_add(const Matrix& x, cplx s, Matrix& out) const {
    if (sparse_)
        out.noalias() += s * (sp_ * x);
    else
        out.noalias() += s * (dense_ * x);
}

}  // namespace detail

MasterEquation::MasterEquation(Operator hamiltonian, std::vector<LindbladTerm> terms)
    : hamiltonian_(std::move(hamiltonian)), terms_(std::move(terms)) {
    const Matrix& h = hamiltonian_.matrix();
    const double herm = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) {
        std::ostringstream os;
        os << "MasterEquation: Hamiltonian is not Hermitian (max deviation " << herm << ")";
        throw InvalidParameter(os.str());
    }
    Matrix k = h;
    for (const auto& term : terms_) {
        if (term.jump.space() != hamiltonian_.space())
            throw ShapeError("MasterEquation: jump operator lives on " + term.jump.space().describe() +
                             " but the Hamiltonian on " + hamiltonian_.space().describe());
        if (!(term.rate >= 0.0)) throw InvalidParameter("MasterEquation: negative Lindblad rate");
        if (term.rate == 0.0) continue;
        const Matrix& j = term.jump.matrix();
        k.noalias() -= cplx(0.0, 0.5 * term.rate) * (j.adjoint() * j);
        jumps_.emplace_back(j);
        rates_.push_back(term.rate);
    }
    effective_ = detail::OperatorKernel(k);
}

void MasterEquation::rhs_hermitian(const Matrix& rho, Matrix& out) const {
    Matrix t(rho.rows(), rho.cols());
    effective_.apply(rho, t);
    t *= -kI;
    out = t + t.adjoint();
    Matrix m(rho.rows(), rho.cols());
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        jumps_[k].apply(rho, m);                      // J rho
        jumps_[k].apply_add(m.adjoint(), rates_[k], out);  // J (J rho)^dag = J rho J^dag
    }
}

void MasterEquation::rhs(const Matrix& rho, Matrix& out) const {
    const Matrix rho_dag = rho.adjoint();
    Matrix t1(rho.rows(), rho.cols()), t2(rho.rows(), rho.cols());
    effective_.apply(rho, t1);
    effective_.apply(rho_dag, t2);
    out = -kI * t1 + kI * t2.adjoint();
    Matrix m(rho.rows(), rho.cols());
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        jumps_[k].apply(rho_dag, m);                   // J rho^dag
        jumps_[k].apply_add(m.adjoint(), rates_[k], out);  // J rho J^dag
    }
}

Operator rhs(const MasterEquation& me, const Operator& rho) {
    if (rho.space() != me.space())
        throw ShapeError("rhs: state on " + rho.space().describe() + " but model on " + me.space().describe());
    Matrix out;
    me.rhs(rho.matrix(), out);
    return Operator(me.space(), std::move(out));
}

Operator rhs(const MasterEquation& me, const DensityMatrix& rho) { return rhs(me, rho.op()); }

cplx expectation(const Matrix& rho, const Matrix& op) {
    // Tr(rho op) = sum_ij rho_ij op_ji
    return rho.transpose().cwiseProduct(op).sum();
}

cplx expectation(const DensityMatrix& rho, const Operator& op) {
    if (rho.space() != op.space())
        throw ShapeError("expectation: state on " + rho.space().describe() + " but operator on " +
                         op.space().describe());
    return expectation(rho.matrix(), op.matrix());
}

void EvolveOptions::validate() const {
    if (!(t_max >= 0.0)) throw InvalidParameter("EvolveOptions: t_max must be >= 0");
    if (!(dt > 0.0)) throw InvalidParameter("EvolveOptions: dt must be > 0");
    if (record_stride < 1) throw InvalidParameter("EvolveOptions: record_stride must be >= 1");
    if (method == Integrator::dopri5 && !(rel_tol > 0.0 && abs_tol > 0.0))
        throw InvalidParameter("EvolveOptions: adaptive tolerances must be > 0");
}

const std::vector<cplx>& TimeSeries::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidParameter("TimeSeries: no column named '" + name + "'");
    return columns[static_cast<std::size_t>(it - names.begin())];
}

std::vector<double> TimeSeries::real_column(const std::string& name) const {
    const auto& c = column(name);
    std::vector<double> out(c.size());
    std::transform(c.begin(), c.end(), out.begin(), [](cplx v) { return v.real(); });
    return out;
}

namespace {

void hermitize(Matrix& y) {
    Matrix tmp = 0.5 * (y + y.adjoint());
    y.swap(tmp);
}

class Rk4Stepper {
public:
    explicit Rk4Stepper(const MasterEquation& me) : me_(me) {}

    void step(Matrix& y, double h) {
        me_.rhs_hermitian(y, k1_);
        tmp_ = y + (0.5 * h) * k1_;
        me_.rhs_hermitian(tmp_, k2_);
        tmp_ = y + (0.5 * h) * k2_;
        me_.rhs_hermitian(tmp_, k3_);
        k1_ += 2.0 * k2_ + 2.0 * k3_;
        tmp_ = y + h * k3_;
        me_.rhs_hermitian(tmp_, k4_);
        k1_ += k4_;
        y += (h / 6.0) * k1_;
        hermitize(y);
    }

private:
    const MasterEquation& me_;
    Matrix k1_, k2_, k3_, k4_, tmp_;
};

// Dormand-Prince 5(4) with FSAL.
class Dopri5Stepper {
public:
    Dopri5Stepper(const MasterEquation& me, double rel_tol, double abs_tol)
        : me_(me), rel_tol_(rel_tol), abs_tol_(abs_tol) {}

    // Attempts one step of size h. Returns the scaled error norm; on
    // acceptance (err <= 1) y is advanced.
    double try_step(Matrix& y, double h) {
        static constexpr double a21 = 1.0 / 5.0;
        static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                                a54 = -212.0 / 729.0;
        static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                                a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
        static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                                b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
        static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                                e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        if (!have_k1_) {
            me_.rhs_hermitian(y, k1_);
            have_k1_ = true;
        }
        tmp_ = y + (h * a21) * k1_;
        me_.rhs_hermitian(tmp_, k2_);
        tmp_ = y + h * (a31 * k1_ + a32 * k2_);
        me_.rhs_hermitian(tmp_, k3_);
        tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        me_.rhs_hermitian(tmp_, k4_);
        tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        me_.rhs_hermitian(tmp_, k5_);
        tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        me_.rhs_hermitian(tmp_, k6_);
        ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        me_.rhs_hermitian(ynew_, k7_);
        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);

        const Eigen::ArrayXXd scale =
            abs_tol_ + rel_tol_ * y.cwiseAbs().array().max(ynew_.cwiseAbs().array());
        const double norm = (err_.cwiseAbs().array() / scale).maxCoeff();
        if (norm <= 1.0) {
            y.swap(ynew_);
            hermitize(y);
            k1_.swap(k7_);
        }
        return norm;
    }

    // Called whenever the state is modified externally.
    void reset() { have_k1_ = false; }

private:
    const MasterEquation& me_;
    double rel_tol_, abs_tol_;
    bool have_k1_ = false;
    Matrix k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_, err_;
};

double min_eigenvalue(const Matrix& y) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(y, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TimeSeries evolve(const MasterEquation& me, const DensityMatrix& rho0, const EvolveOptions& opts,
                  const std::vector<Observable>& observables, const RecordCallback& on_record) {
    opts.validate();
    if (rho0.space() != me.space())
        throw ShapeError("evolve: initial state on " + rho0.space().describe() + " but model on " +
                         me.space().describe());
    for (const auto& obs : observables)
        if (obs.op.space() != me.space()) throw ShapeError("evolve: observable '" + obs.name + "' on wrong space");

    TimeSeries ts;
    for (const auto& obs : observables) ts.names.push_back(obs.name);
    ts.columns.resize(observables.size());

    Matrix y = rho0.matrix();
    const double spacing = opts.dt * opts.record_stride;
    std::vector<double> record_times{0.0};
    if (opts.t_max > 0.0) {
        const auto n_full = static_cast<long>(std::floor(opts.t_max / spacing + 1e-9));
        for (long k = 1; k <= n_full; ++k) record_times.push_back(static_cast<double>(k) * spacing);
        if (opts.t_max - record_times.back() > 1e-9 * spacing) record_times.push_back(opts.t_max);
    }

    auto record = [&](double t) {
        ts.times.push_back(t);
        for (std::size_t i = 0; i < observables.size(); ++i)
            ts.columns[i].push_back(expectation(y, observables[i].op.matrix()));
        ts.diagnostics.max_trace_drift =
            std::max(ts.diagnostics.max_trace_drift, std::abs(y.trace() - cplx(1.0)));
        if (opts.check_positivity)
            ts.diagnostics.min_eigenvalue = std::min(ts.diagnostics.min_eigenvalue, min_eigenvalue(y));
        if (opts.keep_states || on_record) {
            DensityMatrix snap = DensityMatrix::unchecked(Operator(me.space(), y));
            if (on_record) on_record(t, snap);
            if (opts.keep_states) ts.states.push_back(std::move(snap));
        }
    };

    record(0.0);
    Rk4Stepper rk4(me);
    Dopri5Stepper dopri(me, opts.rel_tol, opts.abs_tol);
    double h = opts.dt;
    for (std::size_t r = 1; r < record_times.size(); ++r) {
        const double t0 = record_times[r - 1];
        const double t1 = record_times[r];
        if (opts.method == Integrator::rk4) {
            const auto n = std::max<long>(1, static_cast<long>(std::ceil((t1 - t0) / opts.dt - 1e-9)));
            const double step = (t1 - t0) / static_cast<double>(n);
            for (long s = 0; s < n; ++s) rk4.step(y, step);
            ts.diagnostics.steps += n;
        } else {
            double t = t0;
            while (t1 - t > 1e-12 * std::max(1.0, std::abs(t1))) {
                const bool last = h >= t1 - t;
                const double step = last ? t1 - t : h;
                const double err = dopri.try_step(y, step);
                if (!std::isfinite(err)) {
                    std::ostringstream os;
                    os << "evolve: non-finite error estimate at t=" << t << " (h=" << step << ")";
                    throw IntegrationFailure(os.str());
                }
                const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
                if (err <= 1.0) {
                    t = last ? t1 : t + step;
                    ++ts.diagnostics.steps;
                    // Keep the pre-clamp step size when the step was shortened to hit a record.
                    h = last ? std::max(h, step * factor) : step * factor;
                } else {
                    ++ts.diagnostics.rejected_steps;
                    h = step * factor;
                }
                if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                    std::ostringstream os;
                    os << "evolve: step size underflow at t=" << t << " (h=" << h << ", error norm " << err
                       << ", rel_tol " << opts.rel_tol << ", abs_tol " << opts.abs_tol << ")";
                    throw IntegrationFailure(os.str());
                }
                if (ts.diagnostics.steps + ts.diagnostics.rejected_steps > opts.max_steps)
                    throw IntegrationFailure("evolve: step budget exhausted");
            }
        }
        if (!y.allFinite()) throw IntegrationFailure("evolve: state became non-finite");
        record(t1);
    }
    return ts;
}

Eigen::SparseMatrix<cplx> liouvillian_sparse(const MasterEquation& me) {
    using Sp = Eigen::SparseMatrix<cplx>;
    const Eigen::Index d = me.dim();
    Sp id(d, d);
    id.setIdentity();
    Matrix k = me.hamiltonian().matrix();
    for (const auto& term : me.terms())
        k -= cplx(0.0, 0.5 * term.rate) * (term.jump.matrix().adjoint() * term.jump.matrix());
    const Sp ks = k.sparseView();
    const Sp kc = Matrix(k.conjugate()).sparseView();
    // vec(A X B) = (B^T kron A) vec(X)
    Sp l = cplx(0.0, -1.0) * Sp(Eigen::kroneckerProduct(id, ks)) + cplx(0.0, 1.0) * Sp(Eigen::kroneckerProduct(kc, id));
    for (const auto& term : me.terms()) {
        if (term.rate == 0.0) continue;
        const Sp j = term.jump.matrix().sparseView();
        const Sp jc = Matrix(term.jump.matrix().conjugate()).sparseView();
        l += term.rate * Sp(Eigen::kroneckerProduct(jc, j));
    }
    l.makeCompressed();
    return l;
}

Matrix liouvillian_dense(const MasterEquation& me) { return Matrix(liouvillian_sparse(me)); }

namespace {

double residual_max(const MasterEquation& me, const Matrix& rho) {
    Matrix out;
    me.rhs_hermitian(rho, out);
    return out.cwiseAbs().maxCoeff();
}

Matrix finalize_state(const Vector& x, Eigen::Index d) {
    Matrix rho = Eigen::Map<const Matrix>(x.data(), d, d);
    hermitize(rho);
    rho /= rho.trace();
    return rho;
}

SteadyStateResult dense_steady_state(const MasterEquation& me, const SteadyStateOptions& opts) {
    const Eigen::Index d = me.dim();
    Matrix l = liouvillian_dense(me);
    // Replace the (0,0) equation by the trace condition.
    l.row(0).setZero();
    for (Eigen::Index i = 0; i < d; ++i) l(0, i + i * d) = 1.0;
    Vector b = Vector::Zero(d * d);
    b(0) = 1.0;
    const Vector x = l.partialPivLu().solve(b);
    Matrix rho = finalize_state(x, d);
    const double res = residual_max(me, rho);
    if (!(res < opts.dense_tolerance)) {
        std::ostringstream os;
        os << "steady_state: dense null-space residual " << res << " exceeds " << opts.dense_tolerance
           << " (steady state may not be unique)";
        throw ConvergenceError(os.str());
    }
    return {DensityMatrix::unchecked(Operator(me.space(), std::move(rho))), res, "dense", 0.0};
}

SteadyStateResult sparse_steady_state(const MasterEquation& me, const SteadyStateOptions& opts) {
    const Eigen::Index d = me.dim();
    const Eigen::SparseMatrix<cplx> l = liouvillian_sparse(me);
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<std::size_t>(l.nonZeros() + d));
    for (Eigen::Index c = 0; c < l.outerSize(); ++c)
        for (Eigen::SparseMatrix<cplx>::InnerIterator it(l, c); it; ++it)
            if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < d; ++i) trips.emplace_back(0, i + i * d, 1.0);
    Eigen::SparseMatrix<cplx> a(d * d, d * d);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw ConvergenceError("steady_state: sparse LU factorization failed");
    Vector b = Vector::Zero(d * d);
    b(0) = 1.0;
    const Vector x = lu.solve(b);
    Matrix rho = finalize_state(x, d);
    const double res = residual_max(me, rho);
    if (!(res < opts.dense_tolerance)) {
        std::ostringstream os;
        os << "steady_state: sparse null-space residual " << res << " exceeds " << opts.dense_tolerance;
        throw ConvergenceError(os.str());
    }
    return {DensityMatrix::unchecked(Operator(me.space(), std::move(rho))), res, "sparse", 0.0};
}

SteadyStateResult integrated_steady_state(const MasterEquation& me, const SteadyStateOptions& opts) {
    if (!(opts.dt > 0.0) || !(opts.check_interval > 0.0) || !(opts.max_time > 0.0))
        throw InvalidParameter("steady_state: dt, check_interval and max_time must be > 0");
    const Eigen::Index d = me.dim();
    Matrix y;
    if (opts.initial) {
        if (opts.initial->space() != me.space()) throw ShapeError("steady_state: initial state on wrong space");
        y = opts.initial->matrix();
    } else {
        y = Matrix::Zero(d, d);
        y(0, 0) = 1.0;
    }
    Rk4Stepper rk4(me);
    const auto steps_per_check = std::max<long>(1, static_cast<long>(std::ceil(opts.check_interval / opts.dt)));
    const double h = opts.check_interval / static_cast<double>(steps_per_check);
    double t = 0.0;
    double res = residual_max(me, y);
    while (res >= opts.tolerance) {
        if (t >= opts.max_time) {
            std::ostringstream os;
            os << "steady_state: no convergence after integrating to t=" << t << " (residual " << res
               << ", tolerance " << opts.tolerance << ")";
            throw ConvergenceError(os.str());
        }
        for (long s = 0; s < steps_per_check; ++s) rk4.step(y, h);
        t += opts.check_interval;
        const double size = y.cwiseAbs().maxCoeff();
        if (!y.allFinite() || size > 10.0) {
            std::ostringstream os;
            os << "steady_state: state norm grew to " << size << " at t=" << t << "; the dynamics are unstable";
            throw InstabilityError(os.str());
        }
        res = residual_max(me, y);
    }
    y /= y.trace();
    res = residual_max(me, y);
    return {DensityMatrix::unchecked(Operator(me.space(), std::move(y))), res, "integrate", t};
}

}  // namespace

SteadyStateResult steady_state(const MasterEquation& me, const SteadyStateOptions& opts) {
    switch (opts.method) {
        case SteadyStateMethod::dense: return dense_steady_state(me, opts);
        case SteadyStateMethod::sparse: return sparse_steady_state(me, opts);
        case SteadyStateMethod::integrate: return integrated_steady_state(me, opts);
        case SteadyStateMethod::automatic: break;
    }
    if (me.dim() <= opts.dense_max_dim) return dense_steady_state(me, opts);
    if (me.space().num_modes() == 1) return sparse_steady_state(me, opts);
    return integrated_steady_state(me, opts);
}

}  // namespace sqzbath
