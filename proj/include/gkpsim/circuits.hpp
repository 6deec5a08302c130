#pragma once

// Circuit elements and protocols: ECD gates, ancilla rotations/phases,
// controlled-Pauli compilation, sBs stabilization rounds with the frame-phase
// schedule, and the logical measurement circuits with their decoders.

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gkpsim/code.hpp"

namespace gkpsim {

struct NormCollapseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Axis { X, Y, Z };

struct CircuitStep {
    enum class Kind { Ecd, Rotate, ZPhase, Displace, Frame, Measure, Reset };
    Kind kind = Kind::Ecd;
    cx beta{};          // Ecd / Displace amplitude (before frame rotation)
    double phi = 0.0;   // Rotate axis angle, or Frame increment
    double theta = 0.0; // Rotate / ZPhase angle
    Axis axis = Axis::Z;
    std::string tag;    // Measure record tag

    static CircuitStep ecd(cx beta);
    static CircuitStep rotate(double phi, double theta);
    static CircuitStep zphase(double theta);
    static CircuitStep displace(cx alpha);
    static CircuitStep frame(double phi);
    static CircuitStep measure(Axis axis, std::string tag);
    static CircuitStep reset();
};

struct CircuitSchedule {
    HilbertSpace space;
    std::vector<CircuitStep> steps;
    void append(CircuitStep s) { steps.push_back(std::move(s)); }
    void extend(const CircuitSchedule& other);
};

// gate constructors (composite space unless stated otherwise)
Mat ecd_unitary(const HilbertSpace& space, cx beta);
Eigen::Matrix2cd rotation_unitary(double phi, double theta);  // R_phi(theta)
Eigen::Matrix2cd zphase_unitary(double theta);                // diag(1, e^{i theta})

struct SbsParams {
    int d = 2;
    double delta = 0.3;
    double epsilon() const;    // sqrt(pi d) sinh(delta^2)
    double ell_delta() const;  // sqrt(pi d) cosh(delta^2)
};

// Frame-phase increment applied after round j: pi/2 for even d; the period-4
// schedule (pi, -pi/2, pi, pi/2) for odd d.
double frame_phase_increment(int d, int j);

// One sBs round: prepare |+⟩, small-Big-small ECD sequence with the two
// intermediate ancilla rotations, reset, then the frame update for round j.
CircuitSchedule sbs_round(const SbsParams& params, const HilbertSpace& space, int j);

// Conditional-displacement amplitude and phase-correction angle of the
// compiled CP gate for a given label (minimal-amplitude convention for
// n = d-1, d > 2).
cx cp_beta(int d, const PauliLabel& label);
double cp_phi(int d, const PauliLabel& label);

// CP_d = [D(beta/2)] sigma_z(-phi_nm) ECD(beta_nm) sigma_x, emitted in
// application order. The unconditional displacement is omitted by default,
// matching the experimental convention.
CircuitSchedule controlled_pauli(int d, const PauliLabel& label, const HilbertSpace& space,
                                 bool include_displacement = false);
CircuitSchedule controlled_pauli_dagger(int d, const PauliLabel& label, const HilbertSpace& space,
                                        bool include_displacement = false);

// A logical measurement: one or two measured parts plus an explicit decoder
// table. part2 may depend on the first outcome (ququart conditional axis).
struct LogicalMeasurement {
    int d = 2;
    std::string name;
    int parts = 1;
    CircuitSchedule part1;  // ends with measure("m1") + reset
    std::function<CircuitSchedule(int m1)> part2;   // null when parts == 1
    std::function<int(int m1, int m2)> decode;      // outcome index 0..d-1
};

LogicalMeasurement qubit_pauli_measurement(const GkpCode& code, const PauliLabel& label,
                                           bool include_displacement = false);
LogicalMeasurement qutrit_pauli_measurement(const GkpCode& code, const PauliLabel& label,
                                            int symmetrization_k = 0,
                                            bool include_displacement = false);
LogicalMeasurement ququart_pauli_measurement(const GkpCode& code, const PauliLabel& label,
                                             bool include_displacement = false);
LogicalMeasurement ququart_parity_measurement(const GkpCode& code,
                                              bool include_displacement = false);
LogicalMeasurement logical_measurement(const GkpCode& code, const LogicalBasis& basis);

// --- execution -------------------------------------------------------------

struct RunResult {
    Vec state;                           // composite
    std::map<std::string, int> outcomes; // measure tag -> 0 (+) / 1 (-)
    double frame = 0.0;                  // accumulated frame phase at exit
};

// Pure-state execution; measurements sample Born probabilities from rng.
RunResult run_schedule(const Vec& state, const CircuitSchedule& schedule,
                       std::mt19937_64& rng, double frame0 = 0.0);

// Density-matrix execution for measurement-free schedules (reset allowed).
Mat run_schedule_dm(const Mat& rho, const CircuitSchedule& schedule,
                    double frame0 = 0.0, double* frame_out = nullptr);

// Deterministic branch enumeration of a logical measurement applied to a
// cavity density matrix: returns per-outcome probability and post state.
struct OutcomeBranch {
    int outcome = 0;
    int m1 = 0, m2 = 0;
    double prob = 0.0;
    Mat post_cavity;  // normalized cavity state conditioned on the outcome
};
std::vector<OutcomeBranch> measure_branches(const Mat& rho_cavity,
                                            const LogicalMeasurement& meas);

// Composite unitary of a measurement-free schedule with the frame resolved
// starting from frame0 (frame steps only shift subsequent amplitudes).
Mat schedule_unitary(const CircuitSchedule& schedule, double frame0 = 0.0,
                     double* frame_out = nullptr);

}  // namespace gkpsim
