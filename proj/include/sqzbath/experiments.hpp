#pragma once

// The two experiments and the sweep driver behind the sqzbath CLI. Each
// run_* function returns its results in memory; the cmd_* wrappers write the
// documented CSV and JSON artifacts.

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqzbath/analysis.hpp"
#include "sqzbath/config.hpp"
#include "sqzbath/reservoir.hpp"

namespace sqzbath {

struct CommandOverrides {
    std::optional<std::pair<int, int>> truncation;  // system, bath
    std::optional<double> t_max;
    std::optional<std::uint64_t> seed;
};

RunConfig apply_overrides(RunConfig cfg, const CommandOverrides& o);

// Populations above this in the top two Fock levels trigger one automatic
// truncation increase.
inline constexpr double kTruncationThreshold = 1e-6;

// Step size for fixed-step RK4 from a bound on the generator norm.
double suggested_dt(const MasterEquation& me);

nlohmann::json effective_model_json(const EffectiveModel& em);

struct ParamsResult {
    RunConfig config;  // resolved
    EffectiveModel model;
    std::pair<cplx, cplx> jump_coefficients;
    Warnings warnings;

    nlohmann::json summary() const;
};

ParamsResult run_params(const RunConfig& cfg);

struct RateFits {
    std::optional<double> gamma_x;
    std::optional<double> gamma_y;
};

struct RabiResult {
    RunConfig config;
    EffectiveModel model;
    double axis_angle = 0.0;  // rotation of the fit axes away from sigma_x
    double dt = 0.0;
    double t_max = 0.0;
    int bath_truncation = 0;
    double bath_top_population = 0.0;
    // Runs from |+x> and |+y>; observables sx, sy, sz, sx_rot, sy_rot.
    std::optional<TimeSeries> full_x, full_y;
    TimeSeries eff_x, eff_y, ref_x, ref_y;
    RateFits fit_full, fit_eff, fit_ref;
    double reference_rate = 0.0;  // (gamma_eff / 2)(2 nbar + 1)
    // Full vs effective qubit state, max over records, for the |+x> run (the
    // experiment proper) and the auxiliary |+y> run.
    std::optional<double> max_trace_distance;
    std::optional<double> max_trace_distance_y;
    EngineDiagnostics diagnostics;  // worst case over all runs
    Warnings warnings;

    nlohmann::json summary() const;
};

RabiResult run_rabi(const RunConfig& cfg);

struct BosonicResult {
    BosonicResult(RunConfig cfg, EffectiveModel em, int trunc, DensityMatrix state)
        : config(std::move(cfg)), model(std::move(em)), effective_truncation(trunc), eff_state(std::move(state)) {}

    RunConfig config;
    EffectiveModel model;
    int effective_truncation = 0;
    DensityMatrix eff_state;
    SqueezedThermalFit eff_fit;
    Eigen::Matrix2d eff_covariance;
    std::string eff_method;
    std::optional<WignerGrid> eff_wigner;

    bool full_run = false;
    std::optional<DensityMatrix> full_state;  // reduced system state
    std::optional<SqueezedThermalFit> full_fit;
    std::optional<Eigen::Matrix2d> full_covariance;
    std::optional<WignerGrid> full_wigner;
    std::optional<double> trace_distance;  // reduced full vs effective at the system truncation
    std::pair<int, int> full_truncation{0, 0};
    double full_residual = 0.0;
    double full_integrated_time = 0.0;
    double system_top_population = 0.0;
    double bath_top_population = 0.0;
    Warnings warnings;

    nlohmann::json summary() const;
};

BosonicResult run_bosonic(const RunConfig& cfg, bool compute_wigner = true);

struct SweepRow {
    double value = 0.0;
    std::optional<ParamsResult> params;
    // Simulated signatures, when requested.
    std::optional<double> gamma_x_fit, gamma_y_fit;        // rabi, effective model
    std::optional<double> r_a, theta_a, nbar_a, fidelity;  // bosonic, effective steady state
    std::string error;
};

std::vector<SweepRow> run_sweep(const RunConfig& cfg, unsigned threads);

// Thread cap from SQZBATH_THREADS, else hardware concurrency (at least 1).
unsigned sweep_thread_count();

// Command wrappers: write artifacts into out_dir and return the summary JSON.
nlohmann::json cmd_params(const RunConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_rabi(const RunConfig& cfg, const std::string& out_dir);
nlohmann::json cmd_bosonic(const RunConfig& cfg, const std::string& out_dir);
// Throws NumericalError when every sweep point fails.
nlohmann::json cmd_sweep(const RunConfig& cfg, const std::string& out_dir);

}  // namespace sqzbath
