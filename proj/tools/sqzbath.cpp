// sqzbath params|rabi|bosonic|sweep --config <file.json> --out <dir>
//         [--truncation N,M] [--tmax T] [--seed S]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <iostream>
#include <utility>

#include "sqzbath/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::pair<int, int> parse_truncation(const std::string& s) {
    const auto comma = s.find(',');
    try {
        std::size_t used = 0;
        if (comma == std::string::npos) {
            const int n = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return {n, n};
        }
        const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
        const int n = std::stoi(a, &used);
        if (used != a.size()) throw std::invalid_argument(s);
        const int m = std::stoi(b, &used);
        if (used != b.size()) throw std::invalid_argument(s);
        return {n, m};
    } catch (const std::logic_error&) {
        throw sqzbath::ConfigError("--truncation: expected N or N,M, got '" + s + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezed thermal reservoir engineering: effective models, simulations and sweeps"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir = ".", truncation;
    double t_max = 0.0;
    std::uint64_t seed = 0;
    const std::pair<const char*, const char*> commands[] = {
        {"params", "effective parameters and rates, no simulation"},
        {"rabi", "qubit transverse decay: full, effective and thermal reference"},
        {"bosonic", "bosonic steady state, Wigner function and squeezing fit"},
        {"sweep", "vary one physical parameter over a list of values"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--truncation", truncation, "system,bath Fock truncations");
        sub->add_option("--tmax", t_max, "rabi: evolution time; bosonic: steady-state integration budget");
        sub->add_option("--seed", seed, "recorded in outputs; the pipelines are deterministic");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    const CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    try {
        sqzbath::CommandOverrides o;
        if (sub->count("--truncation")) o.truncation = parse_truncation(truncation);
        if (sub->count("--tmax")) o.t_max = t_max;
        if (sub->count("--seed")) o.seed = seed;
        const sqzbath::RunConfig cfg = sqzbath::apply_overrides(sqzbath::load_config(config_path), o);

        nlohmann::json summary;
        if (command == "params") {
            summary = sqzbath::cmd_params(cfg, out_dir);
        } else if (command == "rabi") {
            if (cfg.model != sqzbath::ModelKind::rabi) throw sqzbath::ConfigError("rabi command needs model \"rabi\"");
            summary = sqzbath::cmd_rabi(cfg, out_dir);
        } else if (command == "bosonic") {
            if (cfg.model != sqzbath::ModelKind::bosonic)
                throw sqzbath::ConfigError("bosonic command needs model \"bosonic\"");
            summary = sqzbath::cmd_bosonic(cfg, out_dir);
        } else {
            summary = sqzbath::cmd_sweep(cfg, out_dir);
        }
        std::cout << summary.dump(2) << '\n';
        if (summary.contains("warnings"))
            for (const auto& w : summary["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
        return kExitOk;
    } catch (const sqzbath::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sqzbath::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}
