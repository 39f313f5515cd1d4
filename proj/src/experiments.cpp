#include "sqzbath/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

namespace sqzbath {

namespace {

using nlohmann::json;

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
        out << '\n';
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::filesystem::path prepare_dir(const std::string& out_dir) {
    std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

double relative_error(double fitted, double predicted) { return std::abs(fitted - predicted) / std::abs(predicted); }

double max_row_sum(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

int bumped(int n) { return n + std::max(2, n / 2); }

void merge(EngineDiagnostics& into, const EngineDiagnostics& d) {
    into.max_trace_drift = std::max(into.max_trace_drift, d.max_trace_drift);
    into.min_eigenvalue = std::min(into.min_eigenvalue, d.min_eigenvalue);
    into.steps += d.steps;
    into.rejected_steps += d.rejected_steps;
}

json diagnostics_json(const EngineDiagnostics& d) {
    return {{"max_trace_drift", d.max_trace_drift},
            {"min_eigenvalue", d.min_eigenvalue},
            {"steps", d.steps},
            {"rejected_steps", d.rejected_steps}};
}

json covariance_json(const Eigen::Matrix2d& v) {
    return json::array({json::array({v(0, 0), v(0, 1)}), json::array({v(1, 0), v(1, 1)})});
}

json fit_json(const SqueezedThermalFit& f) {
    return {{"xi_a", complex_json(f.xi_a)},
            {"r_a", f.r()},
            {"theta_a", std::arg(f.xi_a) < 0 ? std::arg(f.xi_a) + 2.0 * std::numbers::pi : std::arg(f.xi_a)},
            {"nbar_a", f.nbar_a},
            {"fidelity", f.fidelity}};
}

}  // namespace

RunConfig apply_overrides(RunConfig cfg, const CommandOverrides& o) {
    if (o.truncation) {
        if (o.truncation->first < 2 || o.truncation->second < 2)
            throw ConfigError("--truncation: both values must be >= 2");
        cfg.truncation.system = o.truncation->first;
        cfg.truncation.effective = o.truncation->first;
        cfg.truncation.bath = o.truncation->second;
    }
    if (o.t_max) {
        if (!(*o.t_max > 0.0)) throw ConfigError("--tmax: must be > 0");
        if (cfg.model == ModelKind::rabi) cfg.evolve.t_max = *o.t_max;
        else cfg.bosonic.max_time = *o.t_max;
    }
    if (o.seed) cfg.seed = *o.seed;
    return cfg;
}

double suggested_dt(const MasterEquation& me) {
    // |eigenvalues| of the generator are bounded by 2 ||K|| + sum rate ||J||^2
    // in the induced infinity norm. RK4 stays stable up to dt |lambda| ~ 2.7 on
    // both axes, so dt * bound = 2 leaves a margin.
    Matrix k = me.hamiltonian().matrix();
    double jumps = 0.0;
    for (const auto& t : me.terms()) {
        k -= cplx(0.0, 0.5 * t.rate) * (t.jump.matrix().adjoint() * t.jump.matrix());
        const double n = max_row_sum(t.jump.matrix());
        jumps += t.rate * n * n;
    }
    const double bound = 2.0 * max_row_sum(k) + jumps;
    return bound > 0.0 ? 2.0 / bound : 1e-2;
}

json effective_model_json(const EffectiveModel& em) {
    json j = {{"system_kind", em.system_kind == SystemKind::qubit ? "qubit" : "boson"},
              {"r", em.squeeze.r},
              {"theta", em.squeeze.theta},
              {"xi", complex_json(em.squeeze.xi())},
              {"gamma_eff", em.gamma_eff},
              {"omega_eff", em.omega_eff},
              {"lambda", complex_json(em.lambda)},
              {"lambda_abs", std::abs(em.lambda)},
              {"nbar", em.nbar},
              {"regime",
               {{"off_resonant", em.regime.off_resonant},
                {"bad_cavity", em.regime.bad_cavity},
                {"stable", em.regime.stable}}}};
    if (em.bloch)
        j["bloch"] = {{"gamma_x", em.bloch->gamma_x},
                      {"gamma_y", em.bloch->gamma_y},
                      {"gamma_z", em.bloch->gamma_z},
                      {"drive_z", em.bloch->drive_z}};
    return j;
}

// ---------------------------------------------------------------- params

ParamsResult run_params(const RunConfig& cfg_in) {
    RunConfig cfg = resolve_design(cfg_in);
    try {
        EffectiveModel em = effective_model(cfg.physical);
        auto coeffs = effective_jump_coefficients(cfg.physical);
        Warnings w = regime_warnings(em);
        return {std::move(cfg), std::move(em), coeffs, std::move(w)};
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("config: physical: ") + e.what());
    }
}

json ParamsResult::summary() const {
    json j;
    j["config"] = to_json(config);
    j["effective"] = effective_model_json(model);
    j["jump_coefficients"] = {{"mu", complex_json(jump_coefficients.first)},
                              {"nu", complex_json(jump_coefficients.second)}};
    j["time_unit"] = config.time_unit;
    j["warnings"] = warnings;
    return j;
}

// ---------------------------------------------------------------- rabi

namespace {

std::vector<Observable> qubit_observables(const HilbertSpace& space, double beta) {
    const Operator sx = embed(pauli(Pauli::x), space, 0);
    const Operator sy = embed(pauli(Pauli::y), space, 0);
    const Operator sz = embed(pauli(Pauli::z), space, 0);
    const double c = std::cos(beta), s = std::sin(beta);
    return {{"sx", sx},
            {"sy", sy},
            {"sz", sz},
            {"sx_rot", cplx(c) * sx + cplx(s) * sy},
            {"sy_rot", cplx(-s) * sx + cplx(c) * sy}};
}

Vector qubit_ket(bool along_y) {
    Vector k(2);
    // |+y> = (|g> - i|e>)/sqrt(2) in the |g>, |e> ordering.
    const double h = 1.0 / std::sqrt(2.0);
    k << h, along_y ? cplx(0.0, -h) : cplx(h);
    return k;
}

std::optional<double> try_fit(const TimeSeries& ts, const std::string& column, const std::string& label,
                              Warnings& warnings) {
    try {
        return fit_decay_rate(ts, column).rate;
    } catch (const Unfittable& e) {
        warnings.push_back("fit " + label + ": " + e.what());
        return std::nullopt;
    }
}

}  // namespace

RabiResult run_rabi(const RunConfig& cfg_in) {
    if (cfg_in.model != ModelKind::rabi) throw ConfigError("run_rabi: config model is not rabi");
    ParamsResult params = run_params(cfg_in);
    RabiResult res;
    res.config = params.config;
    res.model = params.model;
    res.warnings = params.warnings;
    const PhysicalParams& p = res.config.physical;
    const EffectiveModel& em = res.model;

    // The effective jump cosh r s - e^{i theta} sinh r s^dag maps onto the
    // theta = pi form after rotating the qubit axes by beta.
    res.axis_angle = 0.5 * (std::numbers::pi - em.squeeze.theta);
    res.reference_rate = 0.5 * em.gamma_eff * (2.0 * p.nbar + 1.0);
    res.t_max = res.config.evolve.t_max.value_or(3.0 / res.reference_rate);
    res.config.evolve.t_max = res.t_max;
    if (std::abs(em.omega_eff) > 0.1 * res.reference_rate)
        res.warnings.push_back("effective qubit frequency " + format_double(em.omega_eff) +
                               " is not small against the decay rates; transverse decays mix");

    int nb = res.config.truncation.bath;
    const bool full = res.config.rabi.run_full_model;
    const int stride = res.config.evolve.record_stride;

    EffectiveModel ref_model = em;
    ref_model.squeeze.r = 0.0;
    const MasterEquation me_eff = build_effective_model(em);
    const MasterEquation me_ref = build_effective_model(ref_model);
    const auto obs_eff = qubit_observables(me_eff.space(), res.axis_angle);

    for (int attempt = 0; attempt < 2; ++attempt) {
        const MasterEquation me_full = build_full_model(p, 2, nb);
        res.dt = res.config.evolve.dt.value_or(std::min(suggested_dt(me_full), res.t_max / 2000.0));
        EvolveOptions opts;
        opts.t_max = res.t_max;
        opts.dt = res.dt;
        opts.record_stride = stride;
        opts.method = res.config.evolve.method;
        opts.rel_tol = res.config.evolve.rel_tol;
        opts.abs_tol = res.config.evolve.abs_tol;
        res.diagnostics = EngineDiagnostics{};

        EvolveOptions eff_opts = opts;
        eff_opts.keep_states = true;
        res.eff_x = evolve(me_eff, pure_state(me_eff.space(), qubit_ket(false)), eff_opts, obs_eff);
        res.eff_y = evolve(me_eff, pure_state(me_eff.space(), qubit_ket(true)), eff_opts, obs_eff);
        res.ref_x = evolve(me_ref, pure_state(me_ref.space(), qubit_ket(false)), opts, obs_eff);
        res.ref_y = evolve(me_ref, pure_state(me_ref.space(), qubit_ket(true)), opts, obs_eff);
        for (const auto* ts : {&res.eff_x, &res.eff_y, &res.ref_x, &res.ref_y}) merge(res.diagnostics, ts->diagnostics);
        if (!full) break;

        const auto obs_full = qubit_observables(me_full.space(), res.axis_angle);
        const DensityMatrix bath0 = thermal_state(nb, p.nbar);
        double top = 0.0;
        double td_x = 0.0, td_y = 0.0;
        auto run_full = [&](bool along_y, const TimeSeries& eff) {
            double& td = along_y ? td_y : td_x;
            const DensityMatrix q0 = pure_state(HilbertSpace::single(2), qubit_ket(along_y));
            std::size_t k = 0;
            auto on_record = [&](double, const DensityMatrix& rho) {
                top = std::max(top, top_fock_population(rho, 1));
                const DensityMatrix q = partial_trace(rho, {0});
                td = std::max(td, trace_distance(q, eff.states.at(k++)));
            };
            return evolve(me_full, tensor(q0, bath0), opts, obs_full, on_record);
        };
        res.full_x = run_full(false, res.eff_x);
        res.full_y = run_full(true, res.eff_y);
        merge(res.diagnostics, res.full_x->diagnostics);
        merge(res.diagnostics, res.full_y->diagnostics);
        res.bath_top_population = top;
        res.max_trace_distance = td_x;
        res.max_trace_distance_y = td_y;
        res.bath_truncation = nb;
        if (top <= kTruncationThreshold) break;
        if (attempt == 0) {
            res.warnings.push_back("bath truncation " + std::to_string(nb) + " has top-Fock population " +
                                   format_double(top) + "; retrying with " + std::to_string(bumped(nb)));
            nb = bumped(nb);
        } else {
            res.warnings.push_back("bath truncation " + std::to_string(nb) + " still has top-Fock population " +
                                   format_double(top));
        }
    }
    res.config.truncation.bath = nb;
    res.config.evolve.dt = res.dt;
    for (auto* ts : {&res.eff_x, &res.eff_y}) ts->states.clear();

    res.fit_eff = {try_fit(res.eff_x, "sx_rot", "effective gamma_x", res.warnings),
                   try_fit(res.eff_y, "sy_rot", "effective gamma_y", res.warnings)};
    res.fit_ref = {try_fit(res.ref_x, "sx_rot", "reference gamma_x", res.warnings),
                   try_fit(res.ref_y, "sy_rot", "reference gamma_y", res.warnings)};
    if (full)
        res.fit_full = {try_fit(*res.full_x, "sx_rot", "full gamma_x", res.warnings),
                        try_fit(*res.full_y, "sy_rot", "full gamma_y", res.warnings)};
    return res;
}

json RabiResult::summary() const {
    json j;
    j["config"] = to_json(config);
    j["effective"] = effective_model_json(model);
    j["time_unit"] = config.time_unit;
    j["axis_angle"] = axis_angle;
    j["predictions"] = {{"gamma_x", model.bloch->gamma_x},
                        {"gamma_y", model.bloch->gamma_y},
                        {"gamma_z", model.bloch->gamma_z},
                        {"gamma_thermal", reference_rate}};
    auto fits = [](const RateFits& f) {
        return json{{"gamma_x", optional_json(f.gamma_x)}, {"gamma_y", optional_json(f.gamma_y)}};
    };
    j["fitted"] = {{"effective", fits(fit_eff)}, {"reference", fits(fit_ref)}};
    if (full_x) j["fitted"]["full"] = fits(fit_full);

    json rel = json::object();
    auto add_rel = [&](const std::string& name, const RateFits& f, double px, double py) {
        json r = json::object();
        if (f.gamma_x) r["gamma_x"] = relative_error(*f.gamma_x, px);
        if (f.gamma_y) r["gamma_y"] = relative_error(*f.gamma_y, py);
        rel[name] = r;
    };
    add_rel("effective", fit_eff, model.bloch->gamma_x, model.bloch->gamma_y);
    add_rel("reference", fit_ref, reference_rate, reference_rate);
    if (full_x) add_rel("full", fit_full, model.bloch->gamma_x, model.bloch->gamma_y);
    j["relative_errors"] = rel;

    json agree = json::object();
    if (max_trace_distance) agree["max_trace_distance"] = *max_trace_distance;
    if (max_trace_distance_y) agree["max_trace_distance_y_run"] = *max_trace_distance_y;
    j["agreement"] = agree;
    j["truncation"] = {{"bath", bath_truncation}, {"bath_top_population", bath_top_population}};
    j["integration"] = {{"dt", dt}, {"t_max", t_max}, {"record_stride", config.evolve.record_stride}};
    j["diagnostics"] = diagnostics_json(diagnostics);
    j["warnings"] = warnings;
    return j;
}

// ---------------------------------------------------------------- bosonic

namespace {

SteadyStateResult effective_steady(const EffectiveModel& em, int trunc) {
    return steady_state(build_effective_model(em, trunc));
}

// Largest system x bath dimension for which the warm start uses sparse LU.
constexpr int kWarmStartMaxDim = 200;

// Zero-pads a system x bath state to a larger bath cutoff.
DensityMatrix pad_bath(const DensityMatrix& rho, int ns, int nb_from, int nb_to) {
    Matrix m = Matrix::Zero(ns * nb_to, ns * nb_to);
    for (int a = 0; a < ns; ++a)
        for (int b = 0; b < ns; ++b)
            m.block(a * nb_to, b * nb_to, nb_from, nb_from) = rho.matrix().block(a * nb_from, b * nb_from, nb_from, nb_from);
    return DensityMatrix::unchecked(Operator(HilbertSpace({ns, nb_to}), m));
}

// Initial state for the full-model integration. The bath of the full model
// stays close to vacuum, so an exact sparse solve with a small bath cutoff,
// zero-padded, is usually already steady to the requested tolerance and the
// integration only has to confirm it. Falls back to the effective state
// times the bath thermal state when the small problem is still too large.
// warm_bath_top receives the top bath population of the small solve, which
// the zero padding would otherwise hide.
DensityMatrix full_model_initial(const PhysicalParams& p, int ns, int nb, const DensityMatrix& eff_ns,
                                 double& warm_bath_top) {
    warm_bath_top = 0.0;
    int nw = std::min(nb, 6);
    if (ns * nw <= kWarmStartMaxDim) {
        for (;;) {
            SteadyStateOptions o;
            o.method = SteadyStateMethod::sparse;
            const SteadyStateResult small = steady_state(build_full_model(p, ns, nw), o);
            const int next = std::min(nb, bumped(nw));
            warm_bath_top = top_fock_population(small.rho, 1);
            if (nw == nb || warm_bath_top <= 1e-2 * kTruncationThreshold ||
                ns * next > kWarmStartMaxDim)
                return nw == nb ? small.rho : pad_bath(small.rho, ns, nw, nb);
            nw = next;
        }
    }
    return tensor(eff_ns, thermal_state(nb, p.nbar));
}

}  // namespace

BosonicResult run_bosonic(const RunConfig& cfg_in, bool compute_wigner) {
    if (cfg_in.model != ModelKind::bosonic) throw ConfigError("run_bosonic: config model is not bosonic");
    ParamsResult params = run_params(cfg_in);
    const EffectiveModel& em = params.model;
    if (!em.regime.stable) {
        std::ostringstream os;
        os << "effective boson model is unstable: omega_eff = " << em.omega_eff << " <= |Lambda| = "
           << std::abs(em.lambda) << "; no steady state exists";
        throw InstabilityError(os.str());
    }
    Warnings warnings = params.warnings;
    RunConfig cfg = params.config;
    const PhysicalParams& p = cfg.physical;

    int ne = cfg.truncation.effective;
    SteadyStateResult eff = effective_steady(em, ne);
    double top = top_fock_population(eff.rho, 0);
    if (top > kTruncationThreshold) {
        warnings.push_back("effective truncation " + std::to_string(ne) + " has top-Fock population " +
                           format_double(top) + "; retrying with " + std::to_string(bumped(ne)));
        ne = bumped(ne);
        eff = effective_steady(em, ne);
        top = top_fock_population(eff.rho, 0);
        if (top > kTruncationThreshold)
            warnings.push_back("effective truncation " + std::to_string(ne) + " still has top-Fock population " +
                               format_double(top));
    }
    cfg.truncation.effective = ne;

    BosonicResult res{cfg, em, ne, eff.rho};
    res.eff_method = eff.method;
    res.eff_covariance = covariance(res.eff_state);
    res.eff_fit = fit_squeezed_thermal(res.eff_state);
    if (compute_wigner) {
        res.eff_wigner = wigner(res.eff_state, cfg.wigner.half_width, cfg.wigner.points);
        for (const auto& w : res.eff_wigner->warnings) warnings.push_back("effective " + w);
    }

    if (cfg.bosonic.run_full_model) {
        int ns = cfg.truncation.system;
        int nb = cfg.truncation.bath;
        for (int attempt = 0; attempt < 2; ++attempt) {
            const DensityMatrix eff_ns = ns == ne ? res.eff_state : effective_steady(em, ns).rho;
            const MasterEquation me_full = build_full_model(p, ns, nb);
            SteadyStateOptions so;
            so.method = SteadyStateMethod::integrate;
            so.dt = cfg.evolve.dt.value_or(suggested_dt(me_full));
            so.check_interval = cfg.bosonic.check_interval;
            so.max_time = cfg.bosonic.max_time;
            so.tolerance = cfg.bosonic.steady_tolerance;
            double warm_bath_top = 0.0;
            so.initial = full_model_initial(p, ns, nb, eff_ns, warm_bath_top);
            const SteadyStateResult full = steady_state(me_full, so);
            res.full_residual = full.residual;
            res.full_integrated_time = full.integrated_time;
            res.system_top_population = top_fock_population(full.rho, 0);
            res.bath_top_population = std::max(top_fock_population(full.rho, 1), warm_bath_top);
            res.full_state = partial_trace(full.rho, {0});
            res.trace_distance = trace_distance(*res.full_state, eff_ns);
            res.full_truncation = {ns, nb};
            const bool sys_ok = res.system_top_population <= kTruncationThreshold;
            const bool bath_ok = res.bath_top_population <= kTruncationThreshold;
            if (sys_ok && bath_ok) break;
            std::ostringstream os;
            os << "full model truncation " << ns << "x" << nb << " has top-Fock populations "
               << res.system_top_population << " (system), " << res.bath_top_population << " (bath)";
            if (attempt == 0) {
                if (!sys_ok) ns = bumped(ns);
                if (!bath_ok) nb = bumped(nb);
                os << "; retrying with " << ns << "x" << nb;
            }
            warnings.push_back(os.str());
        }
        res.config.truncation.system = res.full_truncation.first;
        res.config.truncation.bath = res.full_truncation.second;
        res.full_run = true;
        res.full_covariance = covariance(*res.full_state);
        res.full_fit = fit_squeezed_thermal(*res.full_state);
        if (compute_wigner) {
            res.full_wigner = wigner(*res.full_state, cfg.wigner.half_width, cfg.wigner.points);
            for (const auto& w : res.full_wigner->warnings) warnings.push_back("full " + w);
        }
    }
    res.warnings = std::move(warnings);
    return res;
}

json BosonicResult::summary() const {
    json j;
    j["config"] = to_json(config);
    j["effective"] = effective_model_json(model);
    j["time_unit"] = config.time_unit;
    j["fitted"] = {{"effective", fit_json(eff_fit)}};
    j["steady_state"] = {{"effective", {{"method", eff_method}, {"truncation", effective_truncation}}}};
    json agree = json::object();
    if (full_run) {
        j["fitted"]["full"] = fit_json(*full_fit);
        j["steady_state"]["full"] = {{"method", "integrate"},
                                     {"truncation", {full_truncation.first, full_truncation.second}},
                                     {"residual", full_residual},
                                     {"integrated_time", full_integrated_time},
                                     {"system_top_population", system_top_population},
                                     {"bath_top_population", bath_top_population}};
        agree["trace_distance"] = *trace_distance;
        j["relative_errors"] = {
            {"r_a", eff_fit.r() > 0 ? relative_error(full_fit->r(), eff_fit.r()) : std::abs(full_fit->r())},
            {"nbar_a", eff_fit.nbar_a > 0 ? relative_error(full_fit->nbar_a, eff_fit.nbar_a)
                                          : std::abs(full_fit->nbar_a)}};
    }
    j["agreement"] = agree;
    if (eff_wigner) j["wigner_integral"] = {{"effective", eff_wigner->integral()}};
    if (full_wigner) j["wigner_integral"]["full"] = full_wigner->integral();
    j["warnings"] = warnings;
    return j;
}

// ---------------------------------------------------------------- sweep

unsigned sweep_thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SQZBATH_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg, unsigned threads) {
    if (!cfg.sweep) throw ConfigError("config: sweep block is required for the sweep command");
    const SweepConfig& sw = *cfg.sweep;
    std::vector<SweepRow> rows(sw.values.size());

    auto work = [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = sw.values[i];
        try {
            RunConfig point = cfg;
            point.sweep.reset();
            set_physical(point.physical, sw.vary, row.value);
            row.params = run_params(point);
            if (sw.simulate) {
                if (cfg.model == ModelKind::rabi) {
                    point.rabi.run_full_model = false;
                    const RabiResult r = run_rabi(point);
                    row.gamma_x_fit = r.fit_eff.gamma_x;
                    row.gamma_y_fit = r.fit_eff.gamma_y;
                } else {
                    point.bosonic.run_full_model = false;
                    const BosonicResult b = run_bosonic(point, false);
                    row.r_a = b.eff_fit.r();
                    row.theta_a = fit_json(b.eff_fit)["theta_a"].get<double>();
                    row.nbar_a = b.eff_fit.nbar_a;
                    row.fidelity = b.eff_fit.fidelity;
                }
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) work(i);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

// ---------------------------------------------------------------- commands

json cmd_params(const RunConfig& cfg, const std::string& out_dir) {
    const ParamsResult r = run_params(cfg);
    const json j = r.summary();
    write_json(prepare_dir(out_dir) / "params.json", j);
    return j;
}

json cmd_rabi(const RunConfig& cfg, const std::string& out_dir) {
    const RabiResult r = run_rabi(cfg);
    const auto dir = prepare_dir(out_dir);
    auto cols = [](const TimeSeries& ts, std::size_t k, std::vector<double>& row) {
        for (const char* name : {"sx", "sy", "sz"}) row.push_back(ts.column(name)[k].real());
    };
    const std::vector<std::string> three = {"sx", "sy", "sz"};
    auto names = [&](const std::string& suffix) {
        std::vector<std::string> out;
        for (const auto& s : three) out.push_back(s + "_" + suffix);
        return out;
    };
    auto header = [&](std::initializer_list<const char*> parts) {
        std::vector<std::string> h{"t"};
        for (const char* p : parts) {
            const auto n = names(p);
            h.insert(h.end(), n.begin(), n.end());
        }
        return h;
    };
    const std::size_t n = r.eff_x.times.size();

    std::vector<std::vector<double>> eff_rows, full_rows, y_rows;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> row{r.eff_x.times[k]};
        cols(r.eff_x, k, row);
        cols(r.ref_x, k, row);
        eff_rows.push_back(std::move(row));

        std::vector<double> yrow{r.eff_y.times[k]};
        if (r.full_y) cols(*r.full_y, k, yrow);
        else yrow.insert(yrow.end(), 3, std::nan(""));
        cols(r.eff_y, k, yrow);
        cols(r.ref_y, k, yrow);
        y_rows.push_back(std::move(yrow));

        if (r.full_x) {
            std::vector<double> frow{r.full_x->times[k]};
            cols(*r.full_x, k, frow);
            full_rows.push_back(std::move(frow));
        }
    }
    write_csv(dir / "timeseries_eff.csv", header({"eff", "ref"}), eff_rows);
    write_csv(dir / "timeseries_y.csv", header({"full", "eff", "ref"}), y_rows);
    if (r.full_x) write_csv(dir / "timeseries_full.csv", header({"full"}), full_rows);
    const json j = r.summary();
    write_json(dir / "summary.json", j);
    return j;
}

json cmd_bosonic(const RunConfig& cfg, const std::string& out_dir) {
    const BosonicResult r = run_bosonic(cfg, true);
    const auto dir = prepare_dir(out_dir);
    const WignerGrid& we = *r.eff_wigner;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < we.re_alpha.size(); ++i)
        for (std::size_t j = 0; j < we.im_alpha.size(); ++j)
            rows.push_back({we.re_alpha[i], we.im_alpha[j],
                            r.full_wigner ? r.full_wigner->values(i, j) : std::nan(""), we.values(i, j)});
    write_csv(dir / "wigner.csv", {"re_alpha", "im_alpha", "w_full", "w_eff"}, rows);

    json cov = {{"quadratures", {"X_0", "X_pi/2"}},
                {"effective", {{"covariance", covariance_json(r.eff_covariance)}, {"fit", fit_json(r.eff_fit)}}}};
    if (r.full_run)
        cov["full"] = {{"covariance", covariance_json(*r.full_covariance)}, {"fit", fit_json(*r.full_fit)}};
    write_json(dir / "covariance.json", cov);
    const json j = r.summary();
    write_json(dir / "summary.json", j);
    return j;
}

json cmd_sweep(const RunConfig& cfg, const std::string& out_dir) {
    const unsigned threads = sweep_thread_count();
    const std::vector<SweepRow> rows = run_sweep(cfg, threads);
    const auto dir = prepare_dir(out_dir);
    const SweepConfig& sw = *cfg.sweep;
    const bool rabi = cfg.model == ModelKind::rabi;

    std::vector<std::string> header{"value", "omega_b", "g",         "r",           "theta",       "gamma_eff",
                                    "omega_eff", "lambda_re", "lambda_im", "lambda_abs", "gamma_x", "gamma_y",
                                    "gamma_z",   "off_resonant", "bad_cavity", "stable"};
    if (sw.simulate) {
        if (rabi) header.insert(header.end(), {"gamma_x_fit", "gamma_y_fit"});
        else header.insert(header.end(), {"r_a", "theta_a", "nbar_a", "fidelity"});
    }
    header.push_back("error");

    std::ofstream out(dir / "sweep.csv");
    if (!out) throw std::runtime_error("cannot write sweep.csv");
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    std::size_t failures = 0;
    const auto nan = std::nan("");
    for (const auto& row : rows) {
        std::vector<double> v{row.value};
        if (row.params) {
            const EffectiveModel& m = row.params->model;
            const PhysicalParams& p = row.params->config.physical;
            const BlochRates b = m.bloch.value_or(BlochRates{nan, nan, nan, nan});
            v.insert(v.end(), {p.omega_b, p.g, m.squeeze.r, m.squeeze.theta, m.gamma_eff, m.omega_eff,
                               m.lambda.real(), m.lambda.imag(), std::abs(m.lambda), b.gamma_x, b.gamma_y,
                               b.gamma_z, double(m.regime.off_resonant), double(m.regime.bad_cavity),
                               double(m.regime.stable)});
        } else {
            v.insert(v.end(), 15, nan);
        }
        auto opt = [&](const std::optional<double>& x) { v.push_back(x.value_or(nan)); };
        if (sw.simulate) {
            if (rabi) {
                opt(row.gamma_x_fit);
                opt(row.gamma_y_fit);
            } else {
                opt(row.r_a);
                opt(row.theta_a);
                opt(row.nbar_a);
                opt(row.fidelity);
            }
        }
        for (std::size_t k = 0; k < v.size(); ++k) out << (k ? "," : "") << format_double(v[k]);
        std::string err = row.error;
        std::replace(err.begin(), err.end(), '"', '\'');
        out << ",\"" << err << "\"\n";
        if (!row.error.empty()) ++failures;
    }

    json j;
    j["config"] = to_json(cfg);
    j["points"] = rows.size();
    j["failures"] = failures;
    j["threads"] = threads;
    write_json(dir / "sweep.json", j);
    if (failures == rows.size()) throw NumericalError("sweep: every point failed; first error: " + rows.front().error);
    return j;
}

}  // namespace sqzbath
