// Batch front-end: every subcommand wraps one library pipeline and writes
// deterministic CSV/JSON artifacts plus a manifest into --out.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gkpsim/io.hpp"

using namespace gkpsim;

namespace {

struct CommonOpts {
    int d = 2;
    double delta = 0.3;
    int fock = 0;  // 0 = automatic
    std::uint64_t seed = 1;
    std::string noise_preset = "paper-device";
    std::string out = ".";
    int threads = 0;
};

int auto_fock(const CommonOpts& o) {
    if (o.fock > 0) return o.fock;
    return o.d == 4 ? 140 : 100;
}

NoiseModel preset_noise(const std::string& name) {
    if (name == "paper-device") return NoiseModel::paper_device();
    if (name == "none") return NoiseModel::none();
    throw CLI::ValidationError("--noise-preset must be paper-device or none");
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--d", o.d, "logical dimension")->check(CLI::Range(1, 4));
    cmd->add_option("--delta", o.delta, "envelope width");
    cmd->add_option("--fock", o.fock, "cavity truncation (0 = automatic)");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--noise-preset", o.noise_preset, "paper-device | none");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--threads", o.threads, "worker pool size (0 = automatic)");
}

std::map<std::string, std::string> base_config(const CommonOpts& o) {
    return {{"d", std::to_string(o.d)},
            {"delta", format_double(o.delta)},
            {"fock", std::to_string(auto_fock(o))},
            {"seed", std::to_string(o.seed)},
            {"noise_preset", o.noise_preset}};
}

struct Manifest {
    std::string command;
    std::map<std::string, std::string> config;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    void finish(const std::string& dir) const {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_manifest(dir + "/" + command + "_manifest.json", command, config, wall);
    }
};

std::vector<LogicalBasis> all_bases(const GkpCode& code) {
    std::vector<LogicalBasis> bases;
    for (const PauliLabel& label : measurement_pauli_set(code.d))
        bases.push_back(pauli_eigenbasis(code, label));
    if (parity_basis_required(code.d)) bases.push_back(parity_basis(code));
    return bases;
}

std::string basis_name(const GkpCode& code, const LogicalBasis& b) {
    return b.kind == LogicalBasis::Kind::Parity ? "parity" : pauli_name(code.d, b.label);
}

PhaseSpaceGrid::Kind kind_cf_real = PhaseSpaceGrid::Kind::CfReal;

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
    return v;
}

// --- subcommand bodies --------------------------------------------------------

int cmd_build_code(const CommonOpts& o) {
    Manifest m{"build-code", base_config(o)};
    const HilbertSpace sp{auto_fock(o)};
    const GkpCode code = build_code(o.d, o.delta, sp);
    std::filesystem::create_directories(o.out);
    export_codewords_csv(o.out + "/codewords.csv", code);

    // invariant report: norms, overlaps, stabilizer expectations
    std::vector<CsvRow> rows;
    for (int k = 0; k < o.d; ++k) {
        const Vec& w = code.codewords[k];
        rows.push_back({"norm_z" + std::to_string(k), format_double(w.norm())});
        rows.push_back({"stab_x_z" + std::to_string(k),
                        format_double(std::real(expectation(w, code.stab_x)))});
        rows.push_back({"stab_z_z" + std::to_string(k),
                        format_double(std::real(expectation(w, code.stab_z)))});
        for (int j = k + 1; j < o.d; ++j)
            rows.push_back({"overlap_z" + std::to_string(k) + "_z" + std::to_string(j),
                            format_double(std::abs(code.codewords[j].dot(w)))});
    }
    write_csv(o.out + "/code_report.csv", {"quantity", "value"}, rows);
    m.finish(o.out);
    return 0;
}

int cmd_sbs_run(const CommonOpts& o, int rounds) {
    Manifest m{"sbs-run", base_config(o)};
    m.config["rounds"] = std::to_string(rounds);
    const HilbertSpace sp{auto_fock(o)};
    const Mat rho = noiseless_steady_state(o.d, o.delta, sp, rounds);
    std::filesystem::create_directories(o.out);

    const double lim = std::sqrt(M_PI * o.d) + 1.0;
    const std::vector<double> axis = linspace(-lim, lim, 41);
    auto [cfr, cfi] = characteristic_function(rho, axis, axis);
    export_grid_csv(o.out + "/cf_real.csv", cfr);
    const PhaseSpaceGrid wig = wigner(rho, axis, axis);
    export_grid_csv(o.out + "/wigner.csv", wig);

    std::vector<CsvRow> rows;
    rows.push_back({"mean_photons", format_double(photon_stats_from_cf(rho))});
    rows.push_back({"delta_eff", format_double(fit_delta_eff(rho).delta_eff)});
    write_csv(o.out + "/sbs_report.csv", {"quantity", "value"}, rows);
    m.finish(o.out);
    return 0;
}

int cmd_measure_backaction(const CommonOpts& o, const std::string& which) {
    Manifest m{"measure-backaction", base_config(o)};
    m.config["basis"] = which;
    const HilbertSpace sp{auto_fock(o)};
    const GkpCode code = build_code(o.d, o.delta, sp);
    const Mat mixed = maximally_mixed(code);
    std::filesystem::create_directories(o.out);

    std::vector<CsvRow> rows;
    for (const LogicalBasis& basis : all_bases(code)) {
        const std::string name = basis_name(code, basis);
        if (which != "all" && which != name) continue;
        const LogicalMeasurement meas = logical_measurement(code, basis);
        for (const OutcomeBranch& br : measure_branches(mixed, meas)) {
            const Vec& ref = basis.states[br.outcome];
            const double post_f = std::real(ref.dot(br.post_cavity * ref));
            rows.push_back({name, std::to_string(br.outcome), format_double(br.prob),
                            format_double(post_f)});
        }
    }
    write_csv(o.out + "/backaction.csv", {"basis", "outcome", "prob", "post_fidelity"}, rows);
    m.finish(o.out);
    return 0;
}

int cmd_lifetime(const CommonOpts& o, const std::string& rounds_csv) {
    Manifest m{"lifetime", base_config(o)};
    m.config["rounds"] = rounds_csv;
    const std::vector<int> rounds = parse_int_list(rounds_csv);
    SimulationPlan plan;
    plan.d = o.d;
    plan.delta = o.delta;
    plan.space = HilbertSpace{auto_fock(o)};
    plan.noise = preset_noise(o.noise_preset);
    const GkpCode code = build_code(o.d, o.delta, plan.space);
    std::filesystem::create_directories(o.out);

    std::vector<LifetimeCurve> curves;
    std::vector<double> gamma_table;
    std::vector<CsvRow> fit_rows;
    for (const LogicalBasis& basis : all_bases(code)) {
        for (int s = 0; s < o.d; ++s) {
            LifetimeCurve c = run_memory_experiment(plan, basis, s, rounds);
            const DecayFit fit = fit_exponential(c.t_us, c.survival, o.d);
            gamma_table.push_back(fit.gamma);
            fit_rows.push_back({c.basis_label, format_double(fit.gamma),
                                format_double(1.0 / fit.gamma), format_double(fit.gamma_err)});
            curves.push_back(std::move(c));
        }
    }
    export_lifetime_csv(o.out + "/lifetime.csv", curves);

    const double gamma_d = effective_rate_from_decays(gamma_table, o.d);
    const double fock_rate = fock_qudit_rate(o.d, plan.noise.kappa1c, plan.noise.kappa_phi_c);
    fit_rows.push_back({"Gamma_d", format_double(gamma_d), format_double(1.0 / gamma_d),
                        format_double(qec_gain(fock_rate, gamma_d))});
    write_csv(o.out + "/lifetime_summary.csv",
              {"state", "gamma_per_us", "lifetime_us", "gamma_err_or_gain"}, fit_rows);
    m.finish(o.out);
    return 0;
}

int cmd_error_budget(const CommonOpts& o, const std::string& rounds_csv) {
    Manifest m{"error-budget", base_config(o)};
    m.config["rounds"] = rounds_csv;
    SimulationPlan plan;
    plan.d = o.d;
    plan.delta = o.delta;
    plan.space = HilbertSpace{o.fock > 0 ? o.fock : (o.d == 4 ? 100 : 80)};
    plan.noise = preset_noise(o.noise_preset);
    std::filesystem::create_directories(o.out);
    export_budget_csv(o.out + "/budget.csv", error_budget(plan, parse_int_list(rounds_csv)));
    m.finish(o.out);
    return 0;
}

int cmd_tomo(const CommonOpts& o, const std::string& state, int rounds) {
    Manifest m{"tomo", base_config(o)};
    m.config["state"] = state;
    const HilbertSpace sp{auto_fock(o)};
    Mat rho;
    if (state == "steady") {
        rho = noiseless_steady_state(o.d, o.delta, sp, rounds);
    } else {
        const GkpCode code = build_code(o.d, o.delta, sp);
        if (state == "mixed") {
            rho = maximally_mixed(code);
        } else {
            const int idx = std::stoi(state);
            if (idx < 0 || idx >= o.d) throw CLI::ValidationError("--state out of range");
            rho = code.codewords[idx] * code.codewords[idx].adjoint();
        }
    }
    std::filesystem::create_directories(o.out);
    const double lim = std::sqrt(M_PI * o.d) + 1.0;
    const std::vector<double> axis = linspace(-lim, lim, 41);
    auto [cfr, cfi] = characteristic_function(rho, axis, axis);
    export_grid_csv(o.out + "/cf_real.csv", cfr);
    export_grid_csv(o.out + "/cf_imag.csv", cfi);
    export_grid_csv(o.out + "/wigner.csv", wigner(rho, axis, axis));
    std::vector<CsvRow> rows;
    rows.push_back({"mean_photons", format_double(photon_stats_from_cf(rho))});
    rows.push_back({"delta_eff", format_double(fit_delta_eff(rho).delta_eff)});
    write_csv(o.out + "/tomo_report.csv", {"quantity", "value"}, rows);
    m.finish(o.out);
    return 0;
}

int cmd_prep_optimize(const CommonOpts& o, const std::string& target, int depth, int restarts,
                      long budget) {
    Manifest m{"prep-optimize", base_config(o)};
    m.config["target"] = target;
    m.config["depth"] = std::to_string(depth);
    m.config["restarts"] = std::to_string(restarts);
    m.config["budget"] = std::to_string(budget);
    const HilbertSpace sp{auto_fock(o)};
    const GkpCode code = build_code(o.d, o.delta, sp);

    // target names follow the basis state naming, e.g. Z_0, X_1, sqwXZ_0
    Vec goal;
    for (const LogicalBasis& basis : all_bases(code))
        for (size_t s = 0; s < basis.state_names.size(); ++s)
            if (basis.state_names[s] == target) goal = basis.states[s];
    if (goal.size() == 0) throw CLI::ValidationError("unknown --target " + target);

    const OptimizationReport rep = optimize_prep(sp, goal, depth, restarts, o.seed, budget);
    std::filesystem::create_directories(o.out);
    save_circuit_json(o.out + "/circuit.json", rep.best, rep.fidelity);
    std::vector<CsvRow> rows;
    rows.push_back({"fidelity", format_double(rep.fidelity)});
    rows.push_back({"restarts_used", std::to_string(rep.restarts_used)});
    rows.push_back({"evaluations", std::to_string(rep.evaluations)});
    rows.push_back({"budget_exhausted", rep.budget_exhausted ? "1" : "0"});
    write_csv(o.out + "/prep_report.csv", {"quantity", "value"}, rows);
    m.finish(o.out);
    return 0;
}

int cmd_fidelity_sweep(const CommonOpts& o, const std::string& deltas_csv) {
    Manifest m{"fidelity-sweep", base_config(o)};
    m.config["deltas"] = deltas_csv;
    const HilbertSpace sp{auto_fock(o)};
    std::filesystem::create_directories(o.out);
    export_sweep_csv(o.out + "/sweep.csv",
                     measurement_fidelity_sweep(o.d, parse_double_list(deltas_csv), sp));
    m.finish(o.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-energy GKP qudit simulator"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string rounds_csv = "0,4,8,12,16,20";
    std::string deltas_csv = "0.25,0.30,0.35,0.40,0.45";
    std::string basis = "all";
    std::string state = "0";
    std::string target = "Z_0";
    int rounds_single = 300;
    int depth = 8, restarts = 10;
    long budget = 2000;

    auto* c_build = app.add_subcommand("build-code", "codewords and invariant report");
    add_common(c_build, o);
    auto* c_sbs = app.add_subcommand("sbs-run", "noiseless stabilization from vacuum");
    add_common(c_sbs, o);
    c_sbs->add_option("--rounds", rounds_single, "number of sBs rounds");
    auto* c_back = app.add_subcommand("measure-backaction", "measurement outcome statistics");
    add_common(c_back, o);
    c_back->add_option("--basis", basis, "basis name or all");
    auto* c_life = app.add_subcommand("lifetime", "memory experiment decay curves");
    add_common(c_life, o);
    c_life->add_option("--rounds", rounds_csv, "comma list of round counts (multiples of 4)");
    auto* c_budget = app.add_subcommand("error-budget", "per-error-source rates");
    add_common(c_budget, o);
    c_budget->add_option("--rounds", rounds_csv, "comma list of round counts (multiples of 4)");
    auto* c_tomo = app.add_subcommand("tomo", "phase-space tomography exports");
    add_common(c_tomo, o);
    c_tomo->add_option("--state", state, "codeword index, mixed, or steady");
    c_tomo->add_option("--rounds", rounds_single, "rounds when --state steady");
    auto* c_prep = app.add_subcommand("prep-optimize", "ECD preparation circuit search");
    add_common(c_prep, o);
    c_prep->add_option("--target", target, "target state name, e.g. Z_0");
    c_prep->add_option("--depth", depth, "circuit depth");
    c_prep->add_option("--restarts", restarts, "optimizer restarts");
    c_prep->add_option("--budget", budget, "evaluations per restart");
    auto* c_sweep = app.add_subcommand("fidelity-sweep", "measurement fidelity vs delta");
    add_common(c_sweep, o);
    c_sweep->add_option("--deltas", deltas_csv, "comma list of delta values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (o.threads > 0) setenv("GKPSIM_THREADS", std::to_string(o.threads).c_str(), 1);

    try {
        if (c_build->parsed()) return cmd_build_code(o);
        if (c_sbs->parsed()) return cmd_sbs_run(o, rounds_single);
        if (c_back->parsed()) return cmd_measure_backaction(o, basis);
        if (c_life->parsed()) return cmd_lifetime(o, rounds_csv);
        if (c_budget->parsed()) return cmd_error_budget(o, rounds_csv);
        if (c_tomo->parsed()) return cmd_tomo(o, state, rounds_single);
        if (c_prep->parsed()) return cmd_prep_optimize(o, target, depth, restarts, budget);
        if (c_sweep->parsed()) return cmd_fidelity_sweep(o, deltas_csv);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const NotConverged& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const FitDiverged& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const ResourceLimit& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 4;
    } catch (const OverflowError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 4;
    } catch (const TruncationError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
