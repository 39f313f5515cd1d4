#pragma once

// Closed-form machinery of the engineered squeezed reservoir: squeezing
// parameters, effective rates and frequencies, Bloch rates, inverse design,
// and builders for the full and effective master equations.
//
// Notation: D-^2 = (w_b - w_s)^2 + k^2/4, D+^2 = (w_b + w_s)^2 + k^2/4.

#include <utility>

#include "sqzbath/lindblad.hpp"
#include "sqzbath/operator_algebra.hpp"

namespace sqzbath {

enum class SystemKind { qubit, boson };

struct PhysicalParams {
    double omega_s = 1.0;  // system frequency
    double omega_b = 3.0;  // bath-mode frequency
    double g = 0.05;       // coupling
    double kappa = 0.2;    // bath-mode dissipation rate
    double nbar = 0.0;     // thermal occupation of the bath drive
    double phi_s = 0.0;
    double phi_b = 0.0;
    SystemKind system_kind = SystemKind::boson;

    // Throws InvalidParameter. kappa = 0 is accepted because the formulas have
    // well-defined limits there.
    void validate() const;
    // Copy with both phases reduced to [0, 2 pi).
    PhysicalParams reduced() const;
};

struct SqueezeParams {
    double r = 0.0;
    double theta = 0.0;  // [0, 2 pi)

    cplx xi() const { return std::polar(r, theta); }
};

struct RegimeFlags {
    bool off_resonant = true;  // |w_b - w_s| >= 10 g
    bool bad_cavity = true;    // kappa >= 10 g
    bool stable = true;        // boson: w_a,eff > |Lambda|
};

struct BlochRates {
    double gamma_x = 0.0;
    double gamma_y = 0.0;
    double gamma_z = 0.0;
    double drive_z = 0.0;  // constant term in d<sigma_z>/dt
};

struct EffectiveModel {
    SystemKind system_kind = SystemKind::qubit;
    SqueezeParams squeeze;
    double gamma_eff = 0.0;
    double omega_eff = 0.0;
    cplx lambda{0.0, 0.0};  // zero for the qubit
    double nbar = 0.0;
    std::optional<BlochRates> bloch;  // qubit only
    RegimeFlags regime;
};

double d_minus_sq(const PhysicalParams& p);
double d_plus_sq(const PhysicalParams& p);

double wrap_angle(double a);  // into [0, 2 pi)

SqueezeParams squeeze_params(const PhysicalParams& p);

// 4 g^2 kappa w_s w_b / (D-^2 D+^2). Throws DegenerateParameters when r = 0.
double effective_rate(const PhysicalParams& p);

// (mu, nu) with |mu|^2 - |nu|^2 = 1 and mu real positive, so that
// mu = cosh r and nu = -e^{i theta} sinh r.
std::pair<cplx, cplx> effective_jump_coefficients(const PhysicalParams& p);

RegimeFlags regime_flags(const PhysicalParams& p);
Warnings regime_warnings(const EffectiveModel& em);

// System mode first, bath second. trunc_system is ignored for the qubit.
MasterEquation build_full_model(const PhysicalParams& p, int trunc_system, int trunc_bath);

EffectiveModel rabi_effective_model(const PhysicalParams& p);
EffectiveModel bosonic_effective_model(const PhysicalParams& p);
EffectiveModel effective_model(const PhysicalParams& p);  // dispatches on system_kind

// Effective single-mode master equation. trunc is ignored for the qubit.
MasterEquation build_effective_model(const EffectiveModel& em, int trunc = 2);

// Valid for theta = pi and vanishing effective qubit frequency.
BlochRates bloch_rates(double gamma_eff, double nbar, double r);

// Coupling g that makes the effective qubit frequency vanish. Throws
// NoSolution unless w_b^2 - w_q^2 - k^2/4 > 0.
double design_zero_effective_frequency(double omega_q, double omega_b, double kappa, double nbar);

// Bath frequency in (w_s, 10 w_s e^{2r}] realising squeezing r_target.
double design_target_squeezing(double r_target, double omega_s, double kappa);

}  // namespace sqzbath
