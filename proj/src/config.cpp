#include "sqzbath/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sqzbath {

namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were read so that the rest
// can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    double number(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number()) fail(sub(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(sub(key), "must be finite");
        return x;
    }

    int integer(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number_integer()) fail(sub(key), "expected an integer");
        return v.get<int>();
    }

    bool boolean(const std::string& key) {
        const json& v = at(key);
        if (!v.is_boolean()) fail(sub(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) fail(sub(key), "expected a string");
        return v.get<std::string>();
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) fail(sub(key), "missing");
        return j_.at(key);
    }

    void optional(const std::string& key, double& out) {
        if (has(key)) out = number(key);
    }
    void optional(const std::string& key, int& out) {
        if (has(key)) out = integer(key);
    }
    void optional(const std::string& key, bool& out) {
        if (has(key)) out = boolean(key);
    }

    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(sub(it.key()), "unknown key");
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string& path, const std::string& what) {
    if (!ok) ObjectReader::fail(path, what);
}

}  // namespace

const std::vector<std::string>& physical_field_names() {
    static const std::vector<std::string> names{"omega_s", "omega_b", "g", "kappa", "nbar", "phi_s", "phi_b"};
    return names;
}

void set_physical(PhysicalParams& p, const std::string& name, double value) {
    if (name == "omega_s") p.omega_s = value;
    else if (name == "omega_b") p.omega_b = value;
    else if (name == "g") p.g = value;
    else if (name == "kappa") p.kappa = value;
    else if (name == "nbar") p.nbar = value;
    else if (name == "phi_s") p.phi_s = value;
    else if (name == "phi_b") p.phi_b = value;
    else throw ConfigError("config: '" + name + "' is not a physical parameter");
}

double get_physical(const PhysicalParams& p, const std::string& name) {
    if (name == "omega_s") return p.omega_s;
    if (name == "omega_b") return p.omega_b;
    if (name == "g") return p.g;
    if (name == "kappa") return p.kappa;
    if (name == "nbar") return p.nbar;
    if (name == "phi_s") return p.phi_s;
    if (name == "phi_b") return p.phi_b;
    throw ConfigError("config: '" + name + "' is not a physical parameter");
}

std::string to_string(ModelKind m) { return m == ModelKind::rabi ? "rabi" : "bosonic"; }
std::string to_string(Integrator m) { return m == Integrator::rk4 ? "rk4" : "dopri5"; }

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    ObjectReader root(j, "");

    const std::string model = root.string("model");
    if (model == "rabi") cfg.model = ModelKind::rabi;
    else if (model == "bosonic") cfg.model = ModelKind::bosonic;
    else ObjectReader::fail("model", "expected \"rabi\" or \"bosonic\", got \"" + model + "\"");
    const bool rabi = cfg.model == ModelKind::rabi;
    cfg.physical.system_kind = rabi ? SystemKind::qubit : SystemKind::boson;
    cfg.truncation.bath = rabi ? 15 : 20;

    if (root.has("design")) {
        ObjectReader d(root.at("design"), "design");
        d.optional("zero_effective_frequency", cfg.design.zero_effective_frequency);
        if (d.has("target_squeezing")) cfg.design.target_squeezing = d.number("target_squeezing");
        d.finish();
        check(!(cfg.design.zero_effective_frequency && !rabi), "design.zero_effective_frequency",
              "only defined for the rabi model");
    }

    {
        ObjectReader p(root.at("physical"), "physical");
        // g may be omitted when it is designed.
        p.optional("omega_s", cfg.physical.omega_s);
        if (!cfg.design.target_squeezing) cfg.physical.omega_b = p.number("omega_b");
        else if (p.has("omega_b")) ObjectReader::fail("physical.omega_b", "set by design.target_squeezing");
        if (!cfg.design.zero_effective_frequency) cfg.physical.g = p.number("g");
        else if (p.has("g")) ObjectReader::fail("physical.g", "set by design.zero_effective_frequency");
        cfg.physical.kappa = p.number("kappa");
        p.optional("nbar", cfg.physical.nbar);
        p.optional("phi_s", cfg.physical.phi_s);
        p.optional("phi_b", cfg.physical.phi_b);
        p.finish();
    }

    if (root.has("truncation")) {
        ObjectReader t(root.at("truncation"), "truncation");
        t.optional("system", cfg.truncation.system);
        t.optional("bath", cfg.truncation.bath);
        t.optional("effective", cfg.truncation.effective);
        t.finish();
    }
    check(cfg.truncation.system >= 2 && cfg.truncation.bath >= 2 && cfg.truncation.effective >= 2, "truncation",
          "all truncations must be >= 2");

    if (root.has("evolve")) {
        ObjectReader e(root.at("evolve"), "evolve");
        if (e.has("t_max")) cfg.evolve.t_max = e.number("t_max");
        if (e.has("dt")) cfg.evolve.dt = e.number("dt");
        e.optional("record_stride", cfg.evolve.record_stride);
        if (e.has("method")) {
            const std::string m = e.string("method");
            if (m == "rk4") cfg.evolve.method = Integrator::rk4;
            else if (m == "dopri5") cfg.evolve.method = Integrator::dopri5;
            else ObjectReader::fail("evolve.method", "expected \"rk4\" or \"dopri5\"");
        }
        e.optional("rel_tol", cfg.evolve.rel_tol);
        e.optional("abs_tol", cfg.evolve.abs_tol);
        e.finish();
    }
    check(!cfg.evolve.t_max || *cfg.evolve.t_max > 0.0, "evolve.t_max", "must be > 0");
    check(!cfg.evolve.dt || *cfg.evolve.dt > 0.0, "evolve.dt", "must be > 0");
    check(cfg.evolve.record_stride >= 1, "evolve.record_stride", "must be >= 1");
    check(cfg.evolve.rel_tol > 0.0 && cfg.evolve.abs_tol > 0.0, "evolve", "tolerances must be > 0");

    if (root.has("wigner")) {
        ObjectReader w(root.at("wigner"), "wigner");
        w.optional("half_width", cfg.wigner.half_width);
        w.optional("points", cfg.wigner.points);
        w.finish();
    }
    check(cfg.wigner.half_width > 0.0, "wigner.half_width", "must be > 0");
    check(cfg.wigner.points >= 32, "wigner.points", "must be >= 32");

    if (root.has("rabi")) {
        check(rabi, "rabi", "block given for a bosonic model");
        ObjectReader r(root.at("rabi"), "rabi");
        r.optional("run_full_model", cfg.rabi.run_full_model);
        r.finish();
    }

    if (root.has("bosonic")) {
        check(!rabi, "bosonic", "block given for a rabi model");
        ObjectReader b(root.at("bosonic"), "bosonic");
        b.optional("run_full_model", cfg.bosonic.run_full_model);
        b.optional("steady_tolerance", cfg.bosonic.steady_tolerance);
        b.optional("max_time", cfg.bosonic.max_time);
        b.optional("check_interval", cfg.bosonic.check_interval);
        b.finish();
        check(cfg.bosonic.steady_tolerance > 0.0 && cfg.bosonic.max_time > 0.0 && cfg.bosonic.check_interval > 0.0,
              "bosonic", "tolerance, max_time and check_interval must be > 0");
    }

    if (root.has("sweep")) {
        ObjectReader s(root.at("sweep"), "sweep");
        SweepConfig sw;
        sw.vary = s.string("vary");
        const json& vals = s.at("values");
        check(vals.is_array() && !vals.empty(), "sweep.values", "expected a non-empty array of numbers");
        for (std::size_t k = 0; k < vals.size(); ++k) {
            check(vals[k].is_number(), "sweep.values[" + std::to_string(k) + "]", "expected a number");
            sw.values.push_back(vals[k].get<double>());
        }
        s.optional("simulate", sw.simulate);
        s.finish();
        const auto& names = physical_field_names();
        check(std::find(names.begin(), names.end(), sw.vary) != names.end(), "sweep.vary",
              "'" + sw.vary + "' is not a physical parameter");
        check(!(sw.vary == "g" && cfg.design.zero_effective_frequency), "sweep.vary",
              "g is fixed by design.zero_effective_frequency");
        check(!(sw.vary == "omega_b" && cfg.design.target_squeezing), "sweep.vary",
              "omega_b is fixed by design.target_squeezing");
        cfg.sweep = std::move(sw);
    }

    if (root.has("time_unit")) cfg.time_unit = root.string("time_unit");
    if (root.has("outputs")) cfg.outputs = root.string("outputs");
    if (root.has("seed")) {
        const json& s = root.at("seed");
        check(s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0), "seed",
              "expected a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    root.finish();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return parse_config(j);
}

RunConfig resolve_design(RunConfig cfg) {
    PhysicalParams& p = cfg.physical;
    try {
        if (cfg.design.target_squeezing)
            p.omega_b = design_target_squeezing(*cfg.design.target_squeezing, p.omega_s, p.kappa);
        if (cfg.design.zero_effective_frequency)
            p.g = design_zero_effective_frequency(p.omega_s, p.omega_b, p.kappa, p.nbar);
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: physical: ") + e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("config: design: ") + e.what());
    }
    return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
    json j;
    j["model"] = to_string(cfg.model);
    const PhysicalParams& p = cfg.physical;
    j["physical"] = {{"omega_s", p.omega_s}, {"omega_b", p.omega_b}, {"g", p.g},         {"kappa", p.kappa},
                     {"nbar", p.nbar},       {"phi_s", p.phi_s},     {"phi_b", p.phi_b}};
    json design = json::object();
    if (cfg.design.zero_effective_frequency) design["zero_effective_frequency"] = true;
    if (cfg.design.target_squeezing) design["target_squeezing"] = *cfg.design.target_squeezing;
    j["design"] = design;
    j["truncation"] = {{"system", cfg.truncation.system},
                       {"bath", cfg.truncation.bath},
                       {"effective", cfg.truncation.effective}};
    json ev = {{"record_stride", cfg.evolve.record_stride},
               {"method", to_string(cfg.evolve.method)},
               {"rel_tol", cfg.evolve.rel_tol},
               {"abs_tol", cfg.evolve.abs_tol}};
    if (cfg.evolve.t_max) ev["t_max"] = *cfg.evolve.t_max;
    if (cfg.evolve.dt) ev["dt"] = *cfg.evolve.dt;
    j["evolve"] = ev;
    j["wigner"] = {{"half_width", cfg.wigner.half_width}, {"points", cfg.wigner.points}};
    if (cfg.model == ModelKind::rabi) {
        j["rabi"] = {{"run_full_model", cfg.rabi.run_full_model}};
    } else {
        j["bosonic"] = {{"run_full_model", cfg.bosonic.run_full_model},
                        {"steady_tolerance", cfg.bosonic.steady_tolerance},
                        {"max_time", cfg.bosonic.max_time},
                        {"check_interval", cfg.bosonic.check_interval}};
    }
    if (cfg.sweep)
        j["sweep"] = {{"vary", cfg.sweep->vary}, {"values", cfg.sweep->values}, {"simulate", cfg.sweep->simulate}};
    j["time_unit"] = cfg.time_unit;
    j["outputs"] = cfg.outputs;
    if (cfg.seed) j["seed"] = *cfg.seed;
    return j;
}

}  // namespace sqzbath
