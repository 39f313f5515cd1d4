#pragma once

// JSON run configuration. Parsing is strict: unknown keys and wrong types are
// rejected with a ConfigError naming the offending path.

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqzbath/lindblad.hpp"
#include "sqzbath/reservoir.hpp"

namespace sqzbath {

enum class ModelKind { rabi, bosonic };

struct DesignConfig {
    bool zero_effective_frequency = false;  // rabi: solve for g
    std::optional<double> target_squeezing;  // solve for omega_b
};

struct TruncationConfig {
    int system = 20;     // boson system mode; ignored for the qubit
    int bath = 15;       // rabi default; bosonic default is 20
    int effective = 20;  // effective boson model
};

struct EvolveConfig {
    std::optional<double> t_max;  // rabi default: 3 / ((gamma_eff / 2)(2 nbar + 1))
    std::optional<double> dt;     // default derived from the full model's spectral scale
    int record_stride = 10;
    Integrator method = Integrator::rk4;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
};

struct WignerConfig {
    double half_width = 4.0;
    int points = 81;
};

struct RabiConfig {
    bool run_full_model = true;
};

struct BosonicConfig {
    bool run_full_model = true;
    double steady_tolerance = 1e-8;  // ||d rho/dt||_max for the full model
    double max_time = 1e5;           // integration budget for the full model
    double check_interval = 5.0;
};

struct SweepConfig {
    std::string vary;
    std::vector<double> values;
    bool simulate = false;
};

struct RunConfig {
    ModelKind model = ModelKind::rabi;
    PhysicalParams physical;
    DesignConfig design;
    TruncationConfig truncation;
    EvolveConfig evolve;
    WignerConfig wigner;
    RabiConfig rabi;
    BosonicConfig bosonic;
    std::optional<SweepConfig> sweep;
    std::string time_unit = "1/omega_s";
    std::string outputs;
    std::optional<std::uint64_t> seed;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Applies the design block (target squeezing first, then zero effective
// frequency) and validates the physical parameters. Throws ConfigError.
RunConfig resolve_design(RunConfig cfg);

nlohmann::json to_json(const RunConfig& cfg);

// Names accepted by sweep.vary and set_physical.
const std::vector<std::string>& physical_field_names();
void set_physical(PhysicalParams& p, const std::string& name, double value);
double get_physical(const PhysicalParams& p, const std::string& name);

std::string to_string(ModelKind m);
std::string to_string(Integrator m);

}  // namespace sqzbath
