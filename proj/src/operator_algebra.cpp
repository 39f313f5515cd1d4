#include "sqzbath/operator_algebra.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sqzbath {

HilbertSpace::HilbertSpace(std::vector<int> mode_dims) : dims_(std::move(mode_dims)) {
    if (dims_.empty()) throw InvalidDimension("HilbertSpace: at least one mode is required");
    for (int d : dims_) {
        if (d < 2) throw InvalidDimension("HilbertSpace: every mode dimension must be >= 2, got " + std::to_string(d));
        total_ *= d;
    }
}

int HilbertSpace::mode_dim(int slot) const {
    if (slot < 0 || slot >= num_modes())
        throw ShapeError("HilbertSpace: mode index " + std::to_string(slot) + " out of range for " + describe());
    return dims_[static_cast<std::size_t>(slot)];
}

std::string HilbertSpace::describe() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
    os << ']';
    return os.str();
}

Operator::Operator(HilbertSpace space, Matrix matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() != space_.total_dim()) {
        std::ostringstream os;
        os << "Operator: matrix of shape " << matrix_.rows() << "x" << matrix_.cols()
           << " does not match space " << space_.describe();
        throw ShapeError(os.str());
    }
}

namespace {
void require_same_space(const Operator& a, const Operator& b, const char* what) {
    if (a.space() != b.space())
        throw ShapeError(std::string(what) + ": operands live on " + a.space().describe() + " and " +
                         b.space().describe());
}
}  // namespace

Operator& Operator::operator+=(const Operator& rhs) {
    require_same_space(*this, rhs, "operator+");
    matrix_ += rhs.matrix_;
    return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
    require_same_space(*this, rhs, "operator-");
    matrix_ -= rhs.matrix_;
    return *this;
}

Operator& Operator::operator*=(cplx s) {
    matrix_ *= s;
    return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
    require_same_space(lhs, rhs, "operator*");
    return Operator(lhs.space(), lhs.matrix() * rhs.matrix());
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

bool StateCheck::ok(const StateTolerance& tol) const {
    return hermiticity_error <= tol.hermiticity && trace_error <= tol.trace && min_eigenvalue >= tol.min_eigenvalue;
}

StateCheck check_state(const Matrix& rho) {
    StateCheck c;
    c.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    c.trace_error = std::abs(rho.trace() - cplx(1.0));
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

DensityMatrix::DensityMatrix(Operator op, const StateTolerance& tol) : op_(std::move(op)) {
    const StateCheck c = check_state(op_.matrix());
    if (!c.ok(tol)) {
        std::ostringstream os;
        os << "DensityMatrix: invariants violated (hermiticity " << c.hermiticity_error << ", trace error "
           << c.trace_error << ", min eigenvalue " << c.min_eigenvalue << ")";
        throw InvalidState(os.str());
    }
}

DensityMatrix DensityMatrix::unchecked(Operator op) { return DensityMatrix(std::move(op), Unchecked{}); }

Operator identity(const HilbertSpace& space) {
    return Operator(space, Matrix::Identity(space.total_dim(), space.total_dim()));
}

Operator annihilation(int dim) {
    if (dim < 2) throw InvalidDimension("annihilation: dim must be >= 2, got " + std::to_string(dim));
    Matrix m = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(HilbertSpace::single(dim), std::move(m));
}

Operator creation(int dim) { return annihilation(dim).adjoint(); }

Operator number(int dim) {
    if (dim < 2) throw InvalidDimension("number: dim must be >= 2, got " + std::to_string(dim));
    Matrix m = Matrix::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) m(n, n) = static_cast<double>(n);
    return Operator(HilbertSpace::single(dim), std::move(m));
}

Operator pauli(Pauli which) {
    Matrix m = Matrix::Zero(2, 2);
    switch (which) {
        case Pauli::minus: m(0, 1) = 1.0; break;
        case Pauli::plus: m(1, 0) = 1.0; break;
        case Pauli::x: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
        case Pauli::y: m(0, 1) = kI; m(1, 0) = -kI; break;
        case Pauli::z: m(0, 0) = -1.0; m(1, 1) = 1.0; break;
    }
    return Operator(HilbertSpace::single(2), std::move(m));
}

Operator embed(const Operator& op, const HilbertSpace& space, int slot) {
    const int d = space.mode_dim(slot);
    if (op.space().num_modes() != 1 || op.dim() != d) {
        std::ostringstream os;
        os << "embed: operator of dimension " << op.dim() << " cannot act on slot " << slot << " of "
           << space.describe();
        throw ShapeError(os.str());
    }
    Matrix result = Matrix::Identity(1, 1);
    for (int s = 0; s < space.num_modes(); ++s) {
        const int ds = space.mode_dims()[static_cast<std::size_t>(s)];
        const Matrix factor = (s == slot) ? op.matrix() : Matrix(Matrix::Identity(ds, ds));
        result = Matrix(Eigen::kroneckerProduct(result, factor));
    }
    return Operator(space, std::move(result));
}

Operator tensor(const Operator& a, const Operator& b) {
    std::vector<int> dims = a.space().mode_dims();
    dims.insert(dims.end(), b.space().mode_dims().begin(), b.space().mode_dims().end());
    return Operator(HilbertSpace(std::move(dims)), Matrix(Eigen::kroneckerProduct(a.matrix(), b.matrix())));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix::unchecked(tensor(a.op(), b.op()));
}

DensityMatrix thermal_state(int dim, double nbar) {
    if (dim < 2) throw InvalidDimension("thermal_state: dim must be >= 2, got " + std::to_string(dim));
    if (!(nbar >= 0.0)) throw InvalidParameter("thermal_state: nbar must be >= 0");
    Eigen::VectorXd p(dim);
    const double ratio = nbar / (nbar + 1.0);
    double w = 1.0;
    for (int n = 0; n < dim; ++n) {
        p(n) = w;
        w *= ratio;
    }
    p /= p.sum();
    Matrix m = Matrix::Zero(dim, dim);
    m.diagonal() = p.cast<cplx>();
    return DensityMatrix::unchecked(Operator(HilbertSpace::single(dim), std::move(m)));
}

namespace {

// S(r) = exp(r/2 (a^2 - a^dag^2)) on `levels` Fock levels. The generator is
// real and only couples levels of equal parity, so each parity sector is
// exponentiated separately.
Eigen::MatrixXd real_squeeze(int levels, double r) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(levels, levels);
    for (int parity = 0; parity < 2; ++parity) {
        const int n = (levels - parity + 1) / 2;
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i + 1 < n; ++i) {
            const double lvl = parity + 2.0 * i;
            g(i, i + 1) = 0.5 * r * std::sqrt((lvl + 1.0) * (lvl + 2.0));
            g(i + 1, i) = -g(i, i + 1);
        }
        const Eigen::MatrixXd e = g.exp();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s(parity + 2 * i, parity + 2 * j) = e(i, j);
    }
    return s;
}

// Top-left dim x dim block of the untruncated S(r): the padded exponential is
// grown until the block stops changing.
Eigen::MatrixXd exact_squeeze_block(int dim, double r) {
    int padded = dim + 40;
    Eigen::MatrixXd block = real_squeeze(padded, r).topLeftCorner(dim, dim);
    for (int iter = 0; iter < 10; ++iter) {
        padded += std::max(40, padded / 2);
        Eigen::MatrixXd next = real_squeeze(padded, r).topLeftCorner(dim, dim);
        const double change = (next - block).cwiseAbs().maxCoeff();
        block = std::move(next);
        if (change < 1e-13) break;
    }
    return block;
}

// S(xi) = V S(r) V^dag with V = exp(i theta n / 2).
Matrix rotate_phase(const Eigen::MatrixXd& m, double theta) {
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.rows(); ++j)
        for (Eigen::Index k = 0; k < m.cols(); ++k) out(j, k) = std::polar(m(j, k), 0.5 * theta * double(j - k));
    return out;
}

}  // namespace

Operator squeeze_operator(int dim, cplx xi, Warnings* warnings) {
    if (dim < 2) throw InvalidDimension("squeeze_operator: dim must be >= 2, got " + std::to_string(dim));
    if (warnings && std::exp(2.0 * std::abs(xi)) > dim / 4.0) {
        std::ostringstream os;
        os << "squeeze_operator: |xi| = " << std::abs(xi) << " stresses Fock truncation " << dim;
        warnings->push_back(os.str());
    }
    return Operator(HilbertSpace::single(dim), rotate_phase(exact_squeeze_block(dim, std::abs(xi)), std::arg(xi)));
}


DensityMatrix squeezed_thermal_state(int dim, double nbar, cplx xi, Warnings* warnings) {
    if (xi == cplx(0.0)) return thermal_state(dim, nbar);
    const double r = std::abs(xi), theta = std::arg(xi);
    // exp of the truncated generator is wrong near the cutoff, so build the
    // state in a padded space, grown until the kept block stops changing.
    auto block = [&](int padded) {
        const Eigen::MatrixXd s = real_squeeze(padded, r);
        const Eigen::VectorXd p = thermal_state(padded, nbar).matrix().diagonal().real();
        return Eigen::MatrixXd((s.transpose() * p.asDiagonal() * s).topLeftCorner(dim, dim));
    };
    int padded = dim + 40;
    Eigen::MatrixXd m = block(padded);
    for (int iter = 0; iter < 10; ++iter) {
        padded += std::max(40, padded / 2);
        Eigen::MatrixXd next = block(padded);
        const double change = (next - m).cwiseAbs().maxCoeff();
        m = std::move(next);
        if (change < 1e-13) break;
    }
    const double lost = 1.0 - m.trace();
    if (warnings && lost > 1e-6) {
        std::ostringstream os;
        os << "squeezed_thermal_state: population " << lost << " lies above Fock truncation " << dim;
        warnings->push_back(os.str());
    }
    Matrix out = rotate_phase(m, theta);
    out = 0.5 * (out + out.adjoint());
    out /= out.trace();
    return DensityMatrix::unchecked(Operator(HilbertSpace::single(dim), std::move(out)));
}

Vector basis_ket(int dim, int n) {
    if (n < 0 || n >= dim) throw ShapeError("basis_ket: level out of range");
    Vector v = Vector::Zero(dim);
    v(n) = 1.0;
    return v;
}

DensityMatrix pure_state(const HilbertSpace& space, const Vector& ket) {
    if (ket.size() != space.total_dim()) throw ShapeError("pure_state: ket size does not match space");
    const double norm = ket.norm();
    if (norm == 0.0) throw InvalidState("pure_state: zero vector");
    const Vector v = ket / norm;
    return DensityMatrix::unchecked(Operator(space, v * v.adjoint()));
}

namespace {

struct TraceMap {
    HilbertSpace reduced;
    std::vector<Eigen::Index> kept_index;    // flat index -> kept flat index
    std::vector<Eigen::Index> traced_index;  // flat index -> traced flat index
};

TraceMap build_trace_map(const HilbertSpace& space, std::vector<int>& keep) {
    if (keep.empty()) throw ShapeError("partial_trace: keep set is empty");
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    const int n = space.num_modes();
    std::vector<bool> kept(static_cast<std::size_t>(n), false);
    std::vector<int> kept_dims;
    for (int k : keep) {
        if (k < 0 || k >= n) throw ShapeError("partial_trace: mode index " + std::to_string(k) + " out of range");
        kept[static_cast<std::size_t>(k)] = true;
        kept_dims.push_back(space.mode_dims()[static_cast<std::size_t>(k)]);
    }
    TraceMap map{HilbertSpace(kept_dims), {}, {}};
    const Eigen::Index total = space.total_dim();
    map.kept_index.resize(static_cast<std::size_t>(total));
    map.traced_index.resize(static_cast<std::size_t>(total));
    std::vector<int> digits(static_cast<std::size_t>(n), 0);
    for (Eigen::Index flat = 0; flat < total; ++flat) {
        Eigen::Index ki = 0, ti = 0;
        for (int s = 0; s < n; ++s) {
            const auto us = static_cast<std::size_t>(s);
            if (kept[us])
                ki = ki * space.mode_dims()[us] + digits[us];
            else
                ti = ti * space.mode_dims()[us] + digits[us];
        }
        map.kept_index[static_cast<std::size_t>(flat)] = ki;
        map.traced_index[static_cast<std::size_t>(flat)] = ti;
        for (int s = n - 1; s >= 0; --s) {
            const auto us = static_cast<std::size_t>(s);
            if (++digits[us] < space.mode_dims()[us]) break;
            digits[us] = 0;
        }
    }
    return map;
}

}  // namespace

Operator partial_trace(const Operator& op, std::vector<int> keep) {
    const TraceMap map = build_trace_map(op.space(), keep);
    const Eigen::Index rd = map.reduced.total_dim();
    Matrix out = Matrix::Zero(rd, rd);
    const Eigen::Index total = op.dim();
    const Matrix& m = op.matrix();
    for (Eigen::Index j = 0; j < total; ++j) {
        const auto tj = map.traced_index[static_cast<std::size_t>(j)];
        const auto kj = map.kept_index[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < total; ++i) {
            if (map.traced_index[static_cast<std::size_t>(i)] == tj)
                out(map.kept_index[static_cast<std::size_t>(i)], kj) += m(i, j);
        }
    }
    return Operator(map.reduced, std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<int> keep) {
    return DensityMatrix::unchecked(partial_trace(rho.op(), std::move(keep)));
}

Operator quadrature_operator(int dim, double phi) {
    const Matrix a = annihilation(dim).matrix();
    const cplx phase = std::polar(1.0, -phi);
    return Operator(HilbertSpace::single(dim), phase * a + std::conj(phase) * a.adjoint());
}

double top_fock_population(const DensityMatrix& rho, int slot) {
    const int d = rho.space().mode_dim(slot);
    const Operator reduced = rho.space().num_modes() == 1 ? rho.op() : partial_trace(rho.op(), {slot});
    double pop = reduced.matrix()(d - 1, d - 1).real();
    if (d > 2) pop += reduced.matrix()(d - 2, d - 2).real();
    return pop;
}

}  // namespace sqzbath
