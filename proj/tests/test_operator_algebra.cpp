#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sqzbath/analysis.hpp"
#include "sqzbath/operator_algebra.hpp"

using namespace sqzbath;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(HilbertSpace, RejectsSmallModes) {
    EXPECT_THROW(HilbertSpace({1}), InvalidDimension);
    EXPECT_THROW(HilbertSpace({3, 0}), InvalidDimension);
    EXPECT_THROW(HilbertSpace(std::vector<int>{}), InvalidDimension);
    EXPECT_EQ(HilbertSpace({2, 5, 3}).total_dim(), 30);
}

TEST(Ladder, LowestDimension) {
    const Matrix a = annihilation(2).matrix();
    Matrix expected(2, 2);
    expected << 0, 1, 0, 0;
    EXPECT_EQ(max_abs(a - expected), 0.0);
}

TEST(Ladder, SqrtRule) {
    const Matrix a = annihilation(3).matrix();
    EXPECT_DOUBLE_EQ(a(0, 1).real(), 1.0);
    EXPECT_DOUBLE_EQ(a(1, 2).real(), std::sqrt(2.0));
    EXPECT_EQ(a.cwiseAbs().sum(), 1.0 + std::sqrt(2.0));
}

TEST(Ladder, CommutatorTruncationArtifact) {
    const Operator a = annihilation(10);
    const Matrix c = commutator(a, a.adjoint()).matrix();
    for (int m = 0; m < 9; ++m) EXPECT_NEAR(c(m, m).real(), 1.0, 1e-14);
    EXPECT_NEAR(c(9, 9).real(), -9.0, 1e-13);
}

TEST(Ladder, InvalidDimension) {
    EXPECT_THROW(annihilation(1), InvalidDimension);
    EXPECT_THROW(creation(0), InvalidDimension);
    EXPECT_THROW(number(1), InvalidDimension);
}

TEST(Pauli, BasisConvention) {
    EXPECT_EQ(max_abs(pauli(Pauli::minus).matrix() - annihilation(2).matrix()), 0.0);
    const DensityMatrix excited = pure_state(HilbertSpace::single(2), basis_ket(2, 1));
    EXPECT_NEAR((excited.matrix() * pauli(Pauli::z).matrix()).trace().real(), 1.0, 1e-15);
    const Matrix sx = pauli(Pauli::x).matrix();
    EXPECT_EQ(max_abs(sx - (pauli(Pauli::plus).matrix() + pauli(Pauli::minus).matrix())), 0.0);
}

TEST(Pauli, Algebra) {
    const Operator sx = pauli(Pauli::x), sy = pauli(Pauli::y), sz = pauli(Pauli::z);
    EXPECT_LT(max_abs(commutator(sx, sy).matrix() - 2.0 * kI * sz.matrix()), 1e-15);
    EXPECT_LT(max_abs(commutator(sy, sz).matrix() - 2.0 * kI * sx.matrix()), 1e-15);
    EXPECT_LT(max_abs((sx * sx).matrix() - Matrix::Identity(2, 2)), 1e-15);
}

TEST(Operator, ShapeChecks) {
    EXPECT_THROW(Operator(HilbertSpace({2, 3}), Matrix::Zero(5, 5)), ShapeError);
    const Operator a = annihilation(3);
    const Operator b = annihilation(4);
    EXPECT_THROW(a + b, ShapeError);
    EXPECT_THROW(a * b, ShapeError);
    EXPECT_THROW(commutator(a, b), ShapeError);
}

TEST(Operator, EmbedMatchesTensor) {
    const HilbertSpace space({3, 4});
    const Operator a = annihilation(3);
    const Operator b = annihilation(4);
    EXPECT_EQ(max_abs(embed(a, space, 0).matrix() - tensor(a, identity(HilbertSpace::single(4))).matrix()), 0.0);
    EXPECT_EQ(max_abs(embed(b, space, 1).matrix() - tensor(identity(HilbertSpace::single(3)), b).matrix()), 0.0);
    // Operators on different modes commute.
    EXPECT_LT(max_abs(commutator(embed(a, space, 0), embed(b, space, 1)).matrix()), 1e-15);
    EXPECT_THROW(embed(a, space, 1), ShapeError);
    EXPECT_THROW(embed(a, space, 2), ShapeError);
}

TEST(DensityMatrix, Invariants) {
    const HilbertSpace q = HilbertSpace::single(2);
    Matrix m(2, 2);
    m << 0.5, 0.1, 0.2, 0.5;
    EXPECT_THROW(DensityMatrix(Operator(q, m)), InvalidState);  // not Hermitian
    m << 0.6, 0, 0, 0.6;
    EXPECT_THROW(DensityMatrix(Operator(q, m)), InvalidState);  // trace
    m << 1.1, 0, 0, -0.1;
    EXPECT_THROW(DensityMatrix(Operator(q, m)), InvalidState);  // negative eigenvalue
    m << 0.5, 0.5, 0.5, 0.5;
    EXPECT_NO_THROW(DensityMatrix(Operator(q, m)));
}

TEST(States, ThermalOccupation) {
    for (double nbar : {0.0, 0.5, 1.0, 2.0}) {
        const DensityMatrix rho = thermal_state(80, nbar);
        EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
        EXPECT_NEAR((rho.matrix() * number(80).matrix()).trace().real(), nbar, 1e-9);
    }
    EXPECT_THROW(thermal_state(10, -0.1), InvalidParameter);
}

TEST(States, SqueezeOperatorUnitaryOnLowBlock) {
    const int dim = 60;
    const Matrix s = squeeze_operator(dim, std::polar(0.5, 0.7)).matrix();
    const Matrix u = s.adjoint() * s;
    EXPECT_LT(max_abs(u.topLeftCorner(10, 10) - Matrix::Identity(10, 10)), 1e-8);
}

TEST(States, SqueezeWarnsWhenTruncationIsTight) {
    Warnings w;
    squeeze_operator(8, 1.0, &w);
    EXPECT_FALSE(w.empty());
    w.clear();
    squeeze_operator(40, 0.3, &w);
    EXPECT_TRUE(w.empty());
}

TEST(States, SqueezedVacuumTransformsLadder) {
    // S^dag a S = cosh r a - e^{i theta} sinh r a^dag on the low block. At
    // dim 40, S|10> still has 6e-4 of its weight above the cutoff.
    const int dim = 60;
    for (double theta : {0.0, 1.1}) {
        const double r = 0.5;
        const Matrix s = squeeze_operator(dim, std::polar(r, theta)).matrix();
        const Matrix a = annihilation(dim).matrix();
        const Matrix lhs = s.adjoint() * a * s;
        const Matrix rhs = std::cosh(r) * a - std::polar(std::sinh(r), theta) * Matrix(a.adjoint());
        EXPECT_LT(max_abs((lhs - rhs).topLeftCorner(11, 11)), 1e-6);
    }
}

TEST(States, SqueezedThermalIsProjectedTransform) {
    const cplx xi = std::polar(0.6, 2.2);
    const Matrix s = squeeze_operator(120, xi).matrix();
    const Matrix direct = (s.adjoint() * thermal_state(120, 0.3).matrix() * s).topLeftCorner(30, 30);
    const DensityMatrix rho = squeezed_thermal_state(30, 0.3, xi);
    // rho is renormalized after the projection.
    EXPECT_LT(max_abs(rho.matrix() - direct / direct.trace()), 1e-12);
}

TEST(States, SqueezeOperatorBlockIsTruncationIndependent) {
    const cplx xi = std::polar(0.8, 0.4);
    const Matrix small = squeeze_operator(10, xi).matrix();
    const Matrix large = squeeze_operator(50, xi).matrix();
    EXPECT_LT(max_abs(small - large.topLeftCorner(10, 10)), 1e-13);
    // Vacuum column: S|0> has amplitude sqrt((2k)!)/(2^k k!) (-e^{i theta} tanh r)^k / sqrt(cosh r) on |2k>.
    const double r = std::abs(xi), theta = std::arg(xi);
    for (int k = 0; k < 5; ++k) {
        const double mag = std::exp(0.5 * std::lgamma(2.0 * k + 1) - std::lgamma(k + 1.0) - k * std::log(2.0)) *
                           std::pow(std::tanh(r), k) / std::sqrt(std::cosh(r));
        const cplx expected = mag * std::pow(-std::polar(1.0, theta), k);
        EXPECT_LT(std::abs(large(2 * k, 0) - expected), 1e-13);
    }
}

TEST(States, SqueezedThermalWarnsWhenPopulationIsCut) {
    Warnings w;
    squeezed_thermal_state(20, 2.0, 1.0, &w);
    EXPECT_FALSE(w.empty());
    w.clear();
    squeezed_thermal_state(40, 0.0, 0.3, &w);
    EXPECT_TRUE(w.empty());
}

TEST(PartialTrace, RecoversFactors) {
    const DensityMatrix a = thermal_state(3, 0.4);
    const DensityMatrix b = squeezed_thermal_state(5, 0.2, 0.3);
    const DensityMatrix c = pure_state(HilbertSpace::single(2), Vector::Constant(2, 1.0));
    const DensityMatrix abc = tensor(tensor(a, b), c);
    EXPECT_LT(max_abs(partial_trace(abc, {0}).matrix() - a.matrix()), 1e-14);
    EXPECT_LT(max_abs(partial_trace(abc, {1}).matrix() - b.matrix()), 1e-14);
    EXPECT_LT(max_abs(partial_trace(abc, {2}).matrix() - c.matrix()), 1e-14);
    EXPECT_LT(max_abs(partial_trace(abc, {2, 0}).matrix() - tensor(a, c).matrix()), 1e-14);
    EXPECT_THROW(partial_trace(abc, {3}), ShapeError);
    EXPECT_THROW(partial_trace(abc, {}), ShapeError);
}

TEST(PartialTrace, EntangledState) {
    // Bell state: each half is maximally mixed.
    Vector psi = Vector::Zero(4);
    psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
    const DensityMatrix bell = pure_state(HilbertSpace({2, 2}), psi);
    EXPECT_LT(max_abs(partial_trace(bell, {0}).matrix() - 0.5 * Matrix::Identity(2, 2)), 1e-15);
}

TEST(Quadrature, VacuumVarianceIsOne) {
    const DensityMatrix vac = thermal_state(20, 0.0);
    for (double phi : {0.0, 0.3, 1.2, 2.9}) EXPECT_NEAR(quadrature_variance(vac, phi), 1.0, 1e-12);
}

TEST(Truncation, TopFockPopulation) {
    const DensityMatrix th = thermal_state(10, 1.0);
    const double p8 = th.matrix()(8, 8).real(), p9 = th.matrix()(9, 9).real();
    EXPECT_NEAR(top_fock_population(th, 0), p8 + p9, 1e-15);
    const DensityMatrix joint = tensor(pure_state(HilbertSpace::single(2), basis_ket(2, 1)), th);
    EXPECT_NEAR(top_fock_population(joint, 1), p8 + p9, 1e-15);
    EXPECT_NEAR(top_fock_population(joint, 0), 1.0, 1e-15);  // a qubit's top level is its excited state
}
