#pragma once

// Derivative-free optimization of depth-K ECD state-preparation circuits and
// a small sBs parameter tuner.

#include <string>
#include <vector>

#include "gkpsim/circuits.hpp"

namespace gkpsim {

struct EcdCircuitParams {
    int depth = 8;
    std::vector<cx> beta;      // size depth
    std::vector<double> phi;   // size depth
    std::vector<double> theta; // size depth
    static EcdCircuitParams from_flat(int depth, const std::vector<double>& x);
    std::vector<double> to_flat() const;  // [Re b, Im b, phi, theta] x depth
};

// U = ECD(b_K) R_{phi_K}(theta_K) ... ECD(b_1) R_{phi_1}(theta_1)
Mat ecd_circuit_unitary(const HilbertSpace& space, const EcdCircuitParams& params);

// F = |<g|<psi| U |g>|0>|², target on the cavity space. The fast variant
// applies the circuit to |g>|0> with a shared DisplacementEngine.
double prep_fidelity(const HilbertSpace& space, const EcdCircuitParams& params,
                     const Vec& target);
Vec apply_ecd_circuit(const DisplacementEngine& engine, const EcdCircuitParams& params);

struct OptimizationReport {
    EcdCircuitParams best;
    double fidelity = 0.0;
    std::vector<double> best_trace;  // best-so-far after each restart
    int restarts_used = 0;
    long evaluations = 0;
    bool budget_exhausted = false;   // target not reached within budget
};

// Multi-start CMA-ES over the 4K real parameters: a few wide random probes,
// then warm restarts perturbed around the best-so-far with shrinking radius.
// Deterministic given (seed, restarts, budget). Stops early at target_fidelity.
OptimizationReport optimize_prep(const HilbertSpace& space, const Vec& target, int depth,
                                 int restarts, std::uint64_t seed, long budget_per_restart,
                                 double target_fidelity = 0.995);

// R = (1/2)[<Z_0|E^N|Z_0> + <X_1|E^N|X_1>] under noiseless stabilization with
// the given (epsilon, ell) overrides; the survival includes prep-free ideal
// initialization and projective readout onto the target word.
double reward_objective(const GkpCode& code, double epsilon, double ell, int n_rounds);

}  // namespace gkpsim
