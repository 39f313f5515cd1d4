#include "sqzbath/reservoir.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace sqzbath {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidParameter(what);
}

}  // namespace

void PhysicalParams::validate() const {
    require(std::isfinite(omega_s) && omega_s > 0.0, "omega_s must be > 0");
    require(std::isfinite(omega_b) && omega_b > 0.0, "omega_b must be > 0");
    require(std::isfinite(g) && g > 0.0, "g must be > 0");
    require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be >= 0");
    require(std::isfinite(nbar) && nbar >= 0.0, "nbar must be >= 0");
    require(std::isfinite(phi_s) && std::isfinite(phi_b), "phases must be finite");
}

double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    // fmod of a value just below a multiple of 2 pi can round up to 2 pi.
    return w >= kTwoPi ? 0.0 : w;
}

PhysicalParams PhysicalParams::reduced() const {
    PhysicalParams out = *this;
    out.phi_s = wrap_angle(phi_s);
    out.phi_b = wrap_angle(phi_b);
    return out;
}

double d_minus_sq(const PhysicalParams& p) {
    const double d = p.omega_b - p.omega_s;
    return d * d + 0.25 * p.kappa * p.kappa;
}

double d_plus_sq(const PhysicalParams& p) {
    const double d = p.omega_b + p.omega_s;
    return d * d + 0.25 * p.kappa * p.kappa;
}

SqueezeParams squeeze_params(const PhysicalParams& p) {
    p.validate();
    // atanh(D-/D+) = ln[(D+ + D-) / (2 sqrt(w_s w_b))], using D+^2 - D-^2 = 4 w_s w_b.
    // The log form keeps full precision when D-/D+ is close to 1.
    const double dm = std::sqrt(d_minus_sq(p));
    const double dp = std::sqrt(d_plus_sq(p));
    SqueezeParams s;
    s.r = std::max(0.0, std::log((dp + dm) / (2.0 * std::sqrt(p.omega_s * p.omega_b))));
    const cplx z1(p.omega_b - p.omega_s, -0.5 * p.kappa);
    const cplx z2(p.omega_b + p.omega_s, -0.5 * p.kappa);
    s.theta = wrap_angle(2.0 * p.phi_s + std::numbers::pi + std::arg(z1 * std::conj(z2)));
    return s;
}

double effective_rate(const PhysicalParams& p) {
    p.validate();
    const double dm2 = d_minus_sq(p);
    if (dm2 == 0.0)
        throw DegenerateParameters("effective_rate: omega_b == omega_s with kappa == 0 gives r = 0");
    return 4.0 * p.g * p.g * p.kappa * p.omega_s * p.omega_b / (dm2 * d_plus_sq(p));
}

std::pair<cplx, cplx> effective_jump_coefficients(const PhysicalParams& p) {
    p.validate();
    if (d_minus_sq(p) == 0.0)
        throw DegenerateParameters("effective_jump_coefficients: omega_b == omega_s with kappa == 0");
    // The common factor -g sqrt(kappa) cancels in the normalization, so it is
    // dropped; this keeps kappa = 0 well defined.
    const cplx a1 = std::polar(1.0, -p.phi_s) / cplx(p.omega_b - p.omega_s, -0.5 * p.kappa);
    const cplx a2 = std::polar(1.0, p.phi_s) / cplx(p.omega_b + p.omega_s, -0.5 * p.kappa);
    const double n2 = std::norm(a1) - std::norm(a2);
    if (!(n2 > 0.0))
        throw ConsistencyError("effective_jump_coefficients: |A1| <= |A2| cannot be normalized");
    const double norm = std::sqrt(n2);
    const cplx phase = std::conj(a1) / std::abs(a1);
    return {cplx(std::abs(a1) / norm, 0.0), a2 * phase / norm};
}

RegimeFlags regime_flags(const PhysicalParams& p) {
    RegimeFlags f;
    f.off_resonant = std::abs(p.omega_b - p.omega_s) >= 10.0 * p.g;
    f.bad_cavity = p.kappa >= 10.0 * p.g;
    return f;
}

Warnings regime_warnings(const EffectiveModel& em) {
    Warnings w;
    if (!em.regime.off_resonant)
        w.emplace_back("regime: |omega_b - omega_s| < 10 g, adiabatic elimination is not off-resonant");
    if (!em.regime.bad_cavity) w.emplace_back("regime: kappa < 10 g, bath mode is not strongly damped");
    if (!em.regime.stable) {
        std::ostringstream os;
        os << "regime: effective boson unstable (omega_eff = " << em.omega_eff << " <= |Lambda| = "
           << std::abs(em.lambda) << ")";
        w.push_back(os.str());
    }
    return w;
}

MasterEquation build_full_model(const PhysicalParams& p, int trunc_system, int trunc_bath) {
    p.validate();
    if (trunc_bath < 2) throw InvalidDimension("build_full_model: bath truncation must be >= 2");
    const bool qubit = p.system_kind == SystemKind::qubit;
    if (!qubit && trunc_system < 2) throw InvalidDimension("build_full_model: system truncation must be >= 2");
    const int ns = qubit ? 2 : trunc_system;
    const HilbertSpace space({ns, trunc_bath});

    const Operator s = embed(annihilation(ns), space, 0);
    const Operator b = embed(annihilation(trunc_bath), space, 1);
    const Operator sd = s.adjoint();
    const Operator bd = b.adjoint();
    const Operator xs = s * std::polar(1.0, -p.phi_s) + sd * std::polar(1.0, p.phi_s);
    const Operator xb = b * std::polar(1.0, -p.phi_b) + bd * std::polar(1.0, p.phi_b);
    Operator h = cplx(p.omega_s) * (sd * s) + cplx(p.omega_b) * (bd * b) + cplx(p.g) * (xs * xb);
    // Remove rounding asymmetry so the Hermiticity check is exact.
    h = Operator(space, 0.5 * (h.matrix() + h.matrix().adjoint()));

    std::vector<LindbladTerm> terms;
    terms.push_back({b, (p.nbar + 1.0) * p.kappa});
    if (p.nbar > 0.0) terms.push_back({bd, p.nbar * p.kappa});
    return MasterEquation(std::move(h), std::move(terms));
}

EffectiveModel rabi_effective_model(const PhysicalParams& p) {
    p.validate();
    if (p.system_kind != SystemKind::qubit)
        throw InvalidParameter("rabi_effective_model: system_kind must be qubit");
    EffectiveModel em;
    em.system_kind = SystemKind::qubit;
    em.squeeze = squeeze_params(p);
    em.gamma_eff = effective_rate(p);
    em.nbar = p.nbar;
    const double wq = p.omega_s, wb = p.omega_b;
    // gamma_eff / (2 kappa w_b) = 2 g^2 w_q / (D-^2 D+^2), which stays finite at kappa = 0.
    const double shift = 2.0 * p.g * p.g * wq * (2.0 * p.nbar + 1.0) *
                         (wb * wb - wq * wq - 0.25 * p.kappa * p.kappa) / (d_minus_sq(p) * d_plus_sq(p));
    em.omega_eff = wq - shift;
    em.bloch = bloch_rates(em.gamma_eff, p.nbar, em.squeeze.r);
    em.regime = regime_flags(p);
    return em;
}

EffectiveModel bosonic_effective_model(const PhysicalParams& p) {
    p.validate();
    if (p.system_kind != SystemKind::boson)
        throw InvalidParameter("bosonic_effective_model: system_kind must be boson");
    EffectiveModel em;
    em.system_kind = SystemKind::boson;
    em.squeeze = squeeze_params(p);
    em.gamma_eff = effective_rate(p);
    em.nbar = p.nbar;
    const double wa = p.omega_s, wb = p.omega_b, k2 = 0.25 * p.kappa * p.kappa;
    const double shift = 2.0 * p.g * p.g * wb * (wb * wb - wa * wa + k2) / (d_minus_sq(p) * d_plus_sq(p));
    em.omega_eff = wa - shift;
    em.lambda = kI * p.g * p.g *
                (1.0 / cplx(wb - wa, 0.5 * p.kappa) + 1.0 / cplx(wb + wa, -0.5 * p.kappa));
    em.regime = regime_flags(p);
    em.regime.stable = em.omega_eff > std::abs(em.lambda);
    return em;
}

EffectiveModel effective_model(const PhysicalParams& p) {
    return p.system_kind == SystemKind::qubit ? rabi_effective_model(p) : bosonic_effective_model(p);
}

MasterEquation build_effective_model(const EffectiveModel& em, int trunc) {
    const double r = em.squeeze.r;
    const cplx e_theta = std::polar(1.0, em.squeeze.theta);
    const double rate_down = (em.nbar + 1.0) * em.gamma_eff;
    const double rate_up = em.nbar * em.gamma_eff;
    const int dim = em.system_kind == SystemKind::qubit ? 2 : trunc;
    if (dim < 2) throw InvalidDimension("build_effective_model: truncation must be >= 2");

    // Same jump for both kinds: cosh r a - e^{i theta} sinh r a^dag.
    const Operator a = annihilation(dim);
    const Operator ad = a.adjoint();
    const Operator jump = cplx(std::cosh(r)) * a - e_theta * std::sinh(r) * ad;

    Operator h = cplx(0.0) * a;
    if (em.system_kind == SystemKind::qubit) {
        h = cplx(0.5 * em.omega_eff) * pauli(Pauli::z);
    } else {
        h = cplx(em.omega_eff) * (ad * a) +
            0.5 * kI * (em.lambda * (ad * ad) - std::conj(em.lambda) * (a * a));
        h = Operator(h.space(), 0.5 * (h.matrix() + h.matrix().adjoint()));
    }
    std::vector<LindbladTerm> terms;
    terms.push_back({jump, rate_down});
    if (rate_up > 0.0) terms.push_back({jump.adjoint(), rate_up});
    return MasterEquation(std::move(h), std::move(terms));
}

BlochRates bloch_rates(double gamma_eff, double nbar, double r) {
    require(gamma_eff >= 0.0 && nbar >= 0.0 && r >= 0.0, "bloch_rates: arguments must be >= 0");
    const double base = 0.5 * gamma_eff * (2.0 * nbar + 1.0);
    BlochRates b;
    b.gamma_x = base * std::exp(-2.0 * r);
    b.gamma_y = base * std::exp(2.0 * r);
    b.gamma_z = 2.0 * base * std::cosh(2.0 * r);
    b.drive_z = -gamma_eff;
    return b;
}

double design_zero_effective_frequency(double omega_q, double omega_b, double kappa, double nbar) {
    require(omega_q > 0.0 && omega_b > 0.0 && kappa >= 0.0 && nbar >= 0.0,
            "design_zero_effective_frequency: frequencies must be > 0, kappa and nbar >= 0");
    const double x = omega_b * omega_b - omega_q * omega_q - 0.25 * kappa * kappa;
    if (!(x > 0.0))
        throw NoSolution("design_zero_effective_frequency: requires omega_b^2 - omega_q^2 - kappa^2/4 > 0");
    PhysicalParams p;
    p.omega_s = omega_q;
    p.omega_b = omega_b;
    p.kappa = kappa;
    return std::sqrt(d_minus_sq(p) * d_plus_sq(p) / (2.0 * (2.0 * nbar + 1.0) * x));
}

double design_target_squeezing(double r_target, double omega_s, double kappa) {
    require(std::isfinite(r_target) && r_target > 0.0, "design_target_squeezing: r_target must be > 0");
    require(omega_s > 0.0 && kappa >= 0.0, "design_target_squeezing: omega_s must be > 0, kappa >= 0");
    PhysicalParams p;
    p.omega_s = omega_s;
    p.kappa = kappa;
    p.g = 1.0;
    auto r_of = [&](double wb) {
        p.omega_b = wb;
        return squeeze_params(p).r;
    };
    double lo = omega_s;
    double hi = 10.0 * omega_s * std::exp(2.0 * r_target);
    const double f_lo = r_of(lo) - r_target;
    const double f_hi = r_of(hi) - r_target;
    if (f_lo > 0.0 || f_hi < 0.0) {
        std::ostringstream os;
        os << "design_target_squeezing: r = " << r_target << " not bracketed on (" << lo << ", " << hi
           << "]; achievable range [" << f_lo + r_target << ", " << f_hi + r_target << "]";
        throw NoSolution(os.str());
    }
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (r_of(mid) < r_target ? lo : hi) = mid;
    }
    // Return whichever endpoint is closer in r.
    return std::abs(r_of(lo) - r_target) <= std::abs(r_of(hi) - r_target) ? lo : hi;
}

}  // namespace sqzbath
