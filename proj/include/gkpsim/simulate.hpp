#pragma once

// Noisy time-domain protocol simulation: segmented timing model, memory
// experiments (prepare / N sBs rounds / logical measurement), measurement
// fidelity sweeps, steady-state preparation, and the error-budget study.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gkpsim/channels.hpp"
#include "gkpsim/circuits.hpp"

namespace gkpsim {

struct ResourceLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TimingPlan {
    double round_us = 7.0;
    double readout_reset_us = 3.632;
    double sbs_gates_us = 1.792;  // 1.792 / 1.808 / 1.648 for d = 2/3/4
    double fpga_us = 0.224;
    double idle_us() const { return round_us - readout_reset_us - sbs_gates_us - fpga_us; }
    static TimingPlan for_dimension(int d);
};

struct ErrorSwitches {
    bool bitflip_sbs = true;    // ancilla decay + thermal excitation during gates
    bool dephase_sbs = true;    // ancilla dephasing during gates
    bool loss_sbs = true;       // cavity loss during gates
    bool loss_idle = true;      // cavity loss during idle + readout segments
    bool dephase_idle = true;   // cavity dephasing during idle + readout segments
    bool ancilla_readout = false;  // ancilla decay during the readout segment
    static ErrorSwitches all();
    static ErrorSwitches none();
    static ErrorSwitches only(const std::string& name);
};

struct SimulationPlan {
    int d = 2;
    double delta = 0.3;
    HilbertSpace space{100};
    NoiseModel noise = NoiseModel::paper_device();
    ErrorSwitches switches = ErrorSwitches::all();
    double substep_us = 0.1;
    bool noiseless() const;
};

// H_CD = (i/2) chi alpha (e^{i theta} a^dag - e^{-i theta} a) sigma_z;
// evolving for t = |beta|/(chi alpha) and echoing realizes ECD(beta).
Mat conditional_displacement_hamiltonian(const HilbertSpace& space, double chi,
                                         double alpha, double theta_beta);

// One noisy sBs round applied to a composite density matrix. The frame phase
// at entry selects the round's displacement axis; frame_out receives the
// updated value. Ancilla gates are instantaneous, ECD segments get gate time
// split proportional to |beta|, noise is first-order Kraus splitting on a
// substep grid.
Mat noisy_sbs_round(const Mat& rho, const SimulationPlan& plan, const SbsParams& params,
                    int round_index, double frame_in, double* frame_out);

struct LifetimeCurve {
    std::string basis_label;   // e.g. "X_0"
    std::vector<int> rounds;
    std::vector<double> survival;
    std::vector<double> t_us;  // rounds * round_us
};

// Survival of one basis state under N rounds of noisy stabilization followed
// by the logical measurement, via density-matrix propagation.
LifetimeCurve run_memory_experiment(const SimulationPlan& plan, const LogicalBasis& basis,
                                    int state_index, const std::vector<int>& round_counts);

// Noiseless measurement fidelity F = (1/d) sum_n p(n | prepared n) per basis
// per Delta.
struct FidelitySweepRow {
    double delta = 0.0;
    std::string basis_label;
    double fidelity = 0.0;
};
std::vector<FidelitySweepRow> measurement_fidelity_sweep(int d, const std::vector<double>& deltas,
                                                         const HilbertSpace& space);

struct ErrorBudgetEntry {
    std::string error_type;
    std::vector<double> gamma;      // per measured basis-state curve
    double gamma_total = 0.0;       // aggregated Gamma_d
    double percent_share = 0.0;     // vs all-errors rate
};

// Per-error-source rates from memory experiments over the reduced |P_0⟩
// basis-state set, plus the sbs-only / idle-only / all aggregates.
std::vector<ErrorBudgetEntry> error_budget(const SimulationPlan& plan,
                                           const std::vector<int>& round_counts);

// Cavity state after `rounds` of stabilization from vacuum; asserts the
// final round-to-round trace distance is below 1e-3 (NotConverged otherwise).
Mat steady_state_rho(const SimulationPlan& plan, int rounds, bool noiseless = true);

// Noiseless variant used by tests and the CLI: propagates the cavity density
// matrix with four cached round unitaries (one per frame value) and traces
// out the ancilla after each round to realize the reset.
Mat noiseless_steady_state(int d, double delta, const HilbertSpace& space, int rounds);

}  // namespace gkpsim
