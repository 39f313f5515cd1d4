#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sqzbath/analysis.hpp"
#include "sqzbath/reservoir.hpp"

using namespace sqzbath;

namespace {

constexpr double kPi = std::numbers::pi;

PhysicalParams boson(double ws, double wb, double kappa, double g, double nbar = 0.0) {
    PhysicalParams p;
    p.omega_s = ws;
    p.omega_b = wb;
    p.kappa = kappa;
    p.g = g;
    p.nbar = nbar;
    p.system_kind = SystemKind::boson;
    return p;
}

PhysicalParams qubit(double wq, double wb, double kappa, double g, double nbar = 0.0) {
    PhysicalParams p = boson(wq, wb, kappa, g, nbar);
    p.system_kind = SystemKind::qubit;
    return p;
}

PhysicalParams random_params(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PhysicalParams p;
    p.omega_s = 0.1 + 5.0 * u(rng);
    p.omega_b = 0.1 + 20.0 * u(rng);
    p.kappa = 0.01 + 5.0 * u(rng);
    p.g = 0.001 + 2.0 * u(rng);
    p.nbar = 3.0 * u(rng);
    p.phi_s = 2.0 * kPi * u(rng);
    p.phi_b = 2.0 * kPi * u(rng);
    return p;
}

double angle_diff(double a, double b) {
    const double d = std::remainder(a - b, 2.0 * kPi);
    return std::abs(d);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(PhysicalParams, Validation) {
    EXPECT_THROW(boson(1, 3, 0.2, 0.0).validate(), InvalidParameter);
    EXPECT_THROW(boson(-1, 3, 0.2, 0.1).validate(), InvalidParameter);
    EXPECT_THROW(boson(1, 0, 0.2, 0.1).validate(), InvalidParameter);
    EXPECT_THROW(boson(1, 3, -0.2, 0.1).validate(), InvalidParameter);
    EXPECT_THROW(boson(1, 3, 0.2, 0.1, -1.0).validate(), InvalidParameter);
    PhysicalParams p = boson(1, 3, 0.2, 0.1);
    p.phi_s = -0.5;
    p.phi_b = 7.0;
    const PhysicalParams r = p.reduced();
    EXPECT_NEAR(r.phi_s, 2.0 * kPi - 0.5, 1e-15);
    EXPECT_NEAR(r.phi_b, 7.0 - 2.0 * kPi, 1e-15);
}

TEST(SqueezeParams, BadCavityLimitValues) {
    const SqueezeParams s = squeeze_params(boson(1, 3, 0.2, 0.05));
    EXPECT_NEAR(s.r, 0.549930656652, 1e-11);
    EXPECT_NEAR(s.theta, 3.116629051487, 1e-11);
}

TEST(SqueezeParams, ZeroKappaLimit) {
    const SqueezeParams s = squeeze_params(boson(1, 3, 0.0, 0.05));
    EXPECT_DOUBLE_EQ(s.theta, kPi);
    EXPECT_NEAR(s.r, 0.5 * std::log(3.0), 1e-15);
    const SqueezeParams e2 = squeeze_params(boson(1, std::exp(2.0), 1e-8, 0.05));
    EXPECT_NEAR(e2.r, 1.0, 1e-12);
}

TEST(SqueezeParams, PhaseCovariance) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        PhysicalParams p = random_params(rng);
        const SqueezeParams base = squeeze_params(p);
        const double delta = u(rng);
        p.phi_s += delta;
        p.phi_b += u(rng);
        const SqueezeParams shifted = squeeze_params(p);
        EXPECT_NEAR(shifted.r, base.r, 1e-15);
        EXPECT_LT(angle_diff(shifted.theta, base.theta + 2.0 * delta), 1e-12);
        EXPECT_GE(shifted.theta, 0.0);
        EXPECT_LT(shifted.theta, 2.0 * kPi);
    }
}

TEST(EffectiveRate, Values) {
    EXPECT_NEAR(effective_rate(boson(1, 3, 0.2, 0.02)), 1.49532477364e-5, 1e-15);
    EXPECT_NEAR(effective_rate(boson(1, 3, 0.2, 0.05)), 9.34577983523e-5, 1e-15);
    EXPECT_NEAR(effective_rate(boson(1, 3, 0.2, 1e-9)) / 1e-18, 9.34577983523e-5 / 0.0025, 1e-12);
    EXPECT_THROW(effective_rate(boson(1, 1, 0.0, 0.1)), DegenerateParameters);
}

TEST(EffectiveRate, SinhFormAgreesForModerateR) {
    std::mt19937 rng(23);
    for (int k = 0; k < 500; ++k) {
        const PhysicalParams p = random_params(rng);
        const double r = squeeze_params(p).r;
        if (r > 5.0 || r < 1e-3) continue;
        const double sinh_form = p.g * p.g * p.kappa / (p.omega_s * p.omega_b * std::pow(std::sinh(2.0 * r), 2));
        EXPECT_NEAR(effective_rate(p) / sinh_form, 1.0, 1e-10);
    }
}

TEST(EffectiveRate, AmplitudeMatchingIdentities) {
    std::mt19937 rng(29);
    for (int k = 0; k < 1000; ++k) {
        const PhysicalParams p = random_params(rng);
        const double r = squeeze_params(p).r;
        const double gamma = effective_rate(p);
        const double target = p.g * p.g * p.kappa;
        const double c2 = std::pow(std::cosh(r), 2), s2 = std::pow(std::sinh(r), 2);
        EXPECT_NEAR(gamma * c2 * d_minus_sq(p) / target, 1.0, 1e-12);
        EXPECT_NEAR(gamma * s2 * d_plus_sq(p) / target, 1.0, 1e-12);
    }
}

TEST(JumpCoefficients, NormalizationAndPhase) {
    std::mt19937 rng(31);
    for (int k = 0; k < 300; ++k) {
        const PhysicalParams p = random_params(rng);
        const auto [mu, nu] = effective_jump_coefficients(p);
        const SqueezeParams s = squeeze_params(p);
        EXPECT_NEAR(std::norm(mu) - std::norm(nu), 1.0, 1e-12);
        EXPECT_EQ(mu.imag(), 0.0);
        EXPECT_GT(mu.real(), 0.0);
        EXPECT_NEAR(std::abs(nu / mu), std::tanh(s.r), 1e-12);
        // nu = -e^{i theta} sinh r
        EXPECT_LT(std::abs(nu + std::polar(std::sinh(s.r), s.theta)), 1e-10 * std::max(1.0, std::sinh(s.r)));
    }
}

TEST(JumpCoefficients, ZeroKappaSigns) {
    const auto [mu, nu] = effective_jump_coefficients(boson(1, 3, 0.0, 0.1));
    const double r = 0.5 * std::log(3.0);
    EXPECT_NEAR(mu.real(), std::cosh(r), 1e-14);
    EXPECT_NEAR(nu.real(), std::sinh(r), 1e-14);
    EXPECT_NEAR(nu.imag(), 0.0, 1e-15);
}

TEST(FullModel, StructureAndHermiticity) {
    std::mt19937 rng(37);
    for (int k = 0; k < 20; ++k) {
        PhysicalParams p = random_params(rng);
        p.system_kind = k % 2 ? SystemKind::qubit : SystemKind::boson;
        const MasterEquation me = build_full_model(p, 4, 5);
        const Matrix& h = me.hamiltonian().matrix();
        EXPECT_LT(max_abs(h - h.adjoint()), 1e-12);
        EXPECT_EQ(me.space().mode_dims()[0], p.system_kind == SystemKind::qubit ? 2 : 4);
        ASSERT_EQ(me.terms().size(), p.nbar > 0 ? 2u : 1u);
        EXPECT_DOUBLE_EQ(me.terms()[0].rate, (p.nbar + 1.0) * p.kappa);
    }
    EXPECT_THROW(build_full_model(boson(1, 3, 0.2, 0.1), 1, 5), InvalidDimension);
    EXPECT_THROW(build_full_model(boson(1, 3, 0.2, 0.1), 4, 1), InvalidDimension);
}

TEST(FullModel, QubitHamiltonianIsShiftedSigmaZ) {
    PhysicalParams p = qubit(1.3, 3.0, 0.5, 0.1);
    p.g = 1e-300;  // coupling negligible; the bare terms are what is checked
    const MasterEquation me = build_full_model(p, 2, 3);
    const HilbertSpace& space = me.space();
    const Operator expected = cplx(0.5 * 1.3) * embed(pauli(Pauli::z), space, 0) +
                              cplx(0.5 * 1.3) * identity(space) + cplx(3.0) * embed(number(3), space, 1);
    EXPECT_LT(max_abs(me.hamiltonian().matrix() - expected.matrix()), 1e-14);
}

TEST(FullModel, DecoupledModesPreserveSystemPopulation) {
    PhysicalParams p = boson(1.0, 2.0, 0.5, 0.1, 0.3);
    p.g = 1e-300;
    const MasterEquation me = build_full_model(p, 4, 4);
    const DensityMatrix rho0 = tensor(thermal_state(4, 0.7), thermal_state(4, 0.0));
    EvolveOptions o;
    o.t_max = 5.0;
    o.dt = 0.01;
    const TimeSeries ts = evolve(me, rho0, o, {{"n", embed(number(4), me.space(), 0)}});
    const auto n = ts.real_column("n");
    for (double v : n) EXPECT_NEAR(v, n.front(), 1e-12);
}

TEST(RabiModel, GoesToBareFrequencyAsCouplingVanishes) {
    const EffectiveModel em = rabi_effective_model(qubit(1.0, 3.0, 0.5, 1e-8));
    EXPECT_NEAR(em.omega_eff, 1.0, 1e-14);
    EXPECT_TRUE(em.bloch.has_value());
    EXPECT_EQ(em.lambda, cplx(0.0));
}

TEST(RabiModel, ShiftLowersFrequency) {
    std::mt19937 rng(41);
    for (int k = 0; k < 500; ++k) {
        PhysicalParams p = random_params(rng);
        p.system_kind = SystemKind::qubit;
        if (!(p.omega_b > p.omega_s && p.kappa < 2.0 * p.omega_b)) continue;
        if (p.omega_b * p.omega_b - p.omega_s * p.omega_s - 0.25 * p.kappa * p.kappa <= 0.0) continue;
        EXPECT_LT(rabi_effective_model(p).omega_eff, p.omega_s);
    }
}

TEST(RabiModel, RejectsBoson) { EXPECT_THROW(rabi_effective_model(boson(1, 3, 1, 0.1)), InvalidParameter); }

TEST(BosonicModel, ReferenceValues) {
    const EffectiveModel em = bosonic_effective_model(boson(1, 3, 0.2, 0.05));
    EXPECT_NEAR(em.lambda.real(), 4.67288991762e-5, 1e-15);
    EXPECT_NEAR(em.lambda.imag(), 1.87149241201e-3, 1e-14);
    EXPECT_NEAR(std::abs(em.lambda), 1.87207570312e-3, 1e-14);
    EXPECT_NEAR(em.omega_eff, 0.998128507588, 1e-11);
    EXPECT_NEAR(em.gamma_eff, 9.34577983523e-5, 1e-15);
    EXPECT_TRUE(em.regime.stable);
    EXPECT_FALSE(em.bloch.has_value());
}

TEST(BosonicModel, WeakCouplingLimit) {
    const EffectiveModel em = bosonic_effective_model(boson(1, 3, 0.2, 1e-8));
    EXPECT_LT(std::abs(em.lambda), 1e-15);
    EXPECT_NEAR(em.omega_eff, 1.0, 1e-14);
}

TEST(BosonicModel, LambdaLosslessLimit) {
    const double g = 0.05, wa = 1.0, wb = 3.0;
    const EffectiveModel em = bosonic_effective_model(boson(wa, wb, 1e-6, g));
    const cplx limit = kI * g * g * 2.0 * wb / (wb * wb - wa * wa);
    EXPECT_LT(std::abs(em.lambda - limit) / std::abs(limit), 1e-6);
    EXPECT_NEAR(limit.imag(), 0.001875, 1e-15);
}

TEST(BosonicModel, InstabilityIsAFlag) {
    // Strong coupling near resonance drives omega_eff below |Lambda|.
    const EffectiveModel em = bosonic_effective_model(boson(1.0, 1.2, 0.05, 0.5));
    EXPECT_FALSE(em.regime.stable);
    bool mentioned = false;
    for (const auto& w : regime_warnings(em)) mentioned |= w.find("unstable") != std::string::npos;
    EXPECT_TRUE(mentioned);
}

TEST(RegimeFlags, Thresholds) {
    const RegimeFlags ok = regime_flags(boson(1, 3, 2, 0.2));
    EXPECT_TRUE(ok.off_resonant);
    EXPECT_TRUE(ok.bad_cavity);
    const RegimeFlags bad = regime_flags(boson(1, 3, 1, 0.21));
    EXPECT_FALSE(bad.off_resonant);
    EXPECT_FALSE(bad.bad_cavity);
}

TEST(EffectiveBuilder, ZeroSqueezingIsOrdinaryDamping) {
    EffectiveModel em;
    em.system_kind = SystemKind::boson;
    em.gamma_eff = 0.3;
    em.omega_eff = 1.0;
    em.nbar = 0.5;
    const MasterEquation me = build_effective_model(em, 6);
    ASSERT_EQ(me.terms().size(), 2u);
    EXPECT_LT(max_abs(me.terms()[0].jump.matrix() - annihilation(6).matrix()), 1e-15);
    EXPECT_DOUBLE_EQ(me.terms()[0].rate, 1.5 * 0.3);
    EXPECT_DOUBLE_EQ(me.terms()[1].rate, 0.5 * 0.3);

    em.system_kind = SystemKind::qubit;
    const MasterEquation mq = build_effective_model(em);
    EXPECT_LT(max_abs(mq.terms()[0].jump.matrix() - pauli(Pauli::minus).matrix()), 1e-15);
    EXPECT_LT(max_abs(mq.hamiltonian().matrix() - 0.5 * pauli(Pauli::z).matrix()), 1e-15);
}

TEST(EffectiveBuilder, BosonJumpMatchesSqueezeTransform) {
    const EffectiveModel em = bosonic_effective_model(boson(1, 3, 0.2, 0.05));
    const int dim = 80;
    const MasterEquation me = build_effective_model(em, dim);
    const Matrix s = squeeze_operator(dim, em.squeeze.xi()).matrix();
    const Matrix a = annihilation(dim).matrix();
    const Matrix route = s.adjoint() * a * s;
    EXPECT_LT(max_abs((me.terms()[0].jump.matrix() - route).topLeftCorner(11, 11)), 1e-6);
}

TEST(EffectiveBuilder, QubitJumpAtThetaPi) {
    EffectiveModel em;
    em.system_kind = SystemKind::qubit;
    em.squeeze = {0.7, kPi};
    em.gamma_eff = 1.0;
    const MasterEquation me = build_effective_model(em);
    const Matrix expected = std::cosh(0.7) * pauli(Pauli::minus).matrix() + std::sinh(0.7) * pauli(Pauli::plus).matrix();
    EXPECT_LT(max_abs(me.terms()[0].jump.matrix() - expected), 1e-15);
}

TEST(BlochRates, Values) {
    const BlochRates b = bloch_rates(0.001, 0.1, 1.0);
    EXPECT_NEAR(b.gamma_x, 8.12011699420e-5, 1e-15);
    EXPECT_NEAR(b.gamma_y, 4.43343365936e-3, 1e-14);
    EXPECT_NEAR(b.gamma_z, 4.51463482930e-3, 1e-14);
    EXPECT_DOUBLE_EQ(b.drive_z, -0.001);
    const BlochRates z = bloch_rates(0.4, 0.5, 0.0);
    EXPECT_DOUBLE_EQ(z.gamma_x, 0.4);
    EXPECT_DOUBLE_EQ(z.gamma_y, 0.4);
    EXPECT_DOUBLE_EQ(z.gamma_z, 0.8);
}

TEST(BlochRates, Identities) {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double gamma = 2.0 * u(rng), nbar = 3.0 * u(rng), r = 3.0 * u(rng);
        const BlochRates b = bloch_rates(gamma, nbar, r);
        const double base = 0.5 * gamma * (2.0 * nbar + 1.0);
        EXPECT_NEAR(b.gamma_x + b.gamma_y, b.gamma_z, 1e-12 * b.gamma_z);
        EXPECT_NEAR(b.gamma_x * b.gamma_y, base * base, 1e-12 * base * base);
    }
}

TEST(Design, ZeroEffectiveFrequency) {
    const double g = design_zero_effective_frequency(1.0, 10.0, 1.0, 0.0);
    EXPECT_NEAR(g, 7.06267152811, 1e-10);
    const EffectiveModel em = rabi_effective_model(qubit(1.0, 10.0, 1.0, g));
    EXPECT_LT(std::abs(em.omega_eff), 1e-10);
    EXPECT_THROW(design_zero_effective_frequency(1.0, 0.9, 0.1, 0.0), NoSolution);
    EXPECT_THROW(design_zero_effective_frequency(1.0, 1.1, 1.0, 0.0), NoSolution);
}

TEST(Design, ZeroEffectiveFrequencyMatchesBisection) {
    // Independent route: bisection on omega_eff(g), which decreases in g.
    const double wq = 1.0, wb = 6.0, kappa = 2.0, nbar = 0.3;
    double lo = 1e-6, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (rabi_effective_model(qubit(wq, wb, kappa, mid, nbar)).omega_eff > 0.0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(design_zero_effective_frequency(wq, wb, kappa, nbar), 0.5 * (lo + hi), 1e-10);
}

TEST(Design, ZeroEffectiveFrequencyThermalScaling) {
    const double g0 = design_zero_effective_frequency(1.0, 5.0, 1.0, 0.0);
    for (double nbar : {1.0, 10.0, 100.0})
        EXPECT_NEAR(design_zero_effective_frequency(1.0, 5.0, 1.0, nbar), g0 / std::sqrt(2.0 * nbar + 1.0), 1e-12);
}

TEST(Design, ZeroEffectiveFrequencyRoundTrips) {
    std::mt19937 rng(47);
    for (int k = 0; k < 500; ++k) {
        PhysicalParams p = random_params(rng);
        p.system_kind = SystemKind::qubit;
        if (p.omega_b * p.omega_b - p.omega_s * p.omega_s - 0.25 * p.kappa * p.kappa <= 0.0) continue;
        p.g = design_zero_effective_frequency(p.omega_s, p.omega_b, p.kappa, p.nbar);
        EXPECT_LT(std::abs(rabi_effective_model(p).omega_eff), 1e-9 * std::max(1.0, p.omega_s));
    }
}

TEST(Design, TargetSqueezingLosslessLimit) {
    EXPECT_NEAR(design_target_squeezing(2.0, 1.0, 0.0), 54.5981500331, 1e-8);
    EXPECT_NEAR(design_target_squeezing(1.0, 1.0, 0.0), 7.38905609893, 1e-9);
}

TEST(Design, TargetSqueezingRoundTrips) {
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int solved = 0;
    for (int k = 0; k < 500; ++k) {
        const double r = 0.05 + 3.0 * u(rng), ws = 0.2 + 3.0 * u(rng), kappa = 2.0 * u(rng);
        double wb = 0.0;
        try {
            wb = design_target_squeezing(r, ws, kappa);
        } catch (const NoSolution&) {
            continue;  // r below what this kappa allows near resonance
        }
        ++solved;
        EXPECT_NEAR(squeeze_params(boson(ws, wb, kappa, 0.1)).r, r, 1e-9);
    }
    EXPECT_GT(solved, 400);
}

TEST(Design, TargetSqueezingOutOfReach) {
    // With heavy damping the minimum r on the bracket exceeds a tiny target.
    EXPECT_THROW(design_target_squeezing(0.01, 1.0, 5.0), NoSolution);
    EXPECT_THROW(design_target_squeezing(-1.0, 1.0, 0.0), InvalidParameter);
}
