#pragma once

// Noise channels and rate analysis: Kraus channels, average channel fidelity
// (direct and survival-probability decompositions), short-time depolarization
// rates, Fock-qudit baselines, QEC gain, exponential decay fits.

#include <functional>
#include <string>
#include <vector>

#include "gkpsim/code.hpp"

namespace gkpsim {

struct StepTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BasisNotOrthogonal : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IncompleteTable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedDimension : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonlinearRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FitDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KrausChannel {
    std::vector<Mat> ops;
    double dt = 0.0;  // us time tag, informational
    // completeness defect allowed up to `tol`; throws on construction otherwise
    KrausChannel(std::vector<Mat> kraus, double dt_us, double tol = 1e-6);
    Mat apply(const Mat& rho) const;
    double completeness_defect() const;
};

// Rates in 1/us, chi in rad/us. Defaults are the measured device values.
struct NoiseModel {
    double kappa1c = 1.0 / 631.0;
    double kappa_phi_c = 1.0 / 1030.0 - 1.0 / (2.0 * 631.0);
    double kappa1q = 1.0 / 295.0;
    double kappa_phi_q = 1.0 / 286.0 - 1.0 / (2.0 * 295.0);
    double n_th = 0.022;
    double chi = 2.0 * M_PI * 0.0418;
    static NoiseModel paper_device();
    static NoiseModel none();
};

// Three printed Kraus operators: K0 = I - (k1 dt/2) n - k_phi dt n^2,
// K1 = sqrt(k1 dt) a, K2 = sqrt(2 k_phi dt) n. First order in dt.
KrausChannel cavity_idle_kraus(const NoiseModel& model, double dt, const HilbertSpace& space);

// Depolarizing map on a d-dim logical space (explicit Tr[rho] so it is linear
// on all operators, not only states).
std::function<Mat(const Mat&)> depolarizing_channel(int d, double gamma, double t);

// F_d(E, I) = 1/(d+1) + 1/(d^2(d+1)) sum_nm Tr[U_nm^dag E(U_nm)] over the
// full d^2 Weyl basis (abstract d-dim matrices).
double average_channel_fidelity(const std::function<Mat(const Mat&)>& channel, int d);

// Survival-probability forms of the same fidelity. probs are ordered by
// measurement_pauli_set(d) x eigenstate index (and for d=4 the Pauli set is
// followed by the 4 parity-basis survivals).
double decomposed_fidelity(const std::vector<double>& survival_probs, int d);

// Gamma_2 = (1/6) sum, Gamma_3 = (1/12) sum,
// Gamma_4 = (1/20)[sum_Pauli - sum_parity]. gamma_table ordered like
// decomposed_fidelity's probs.
double effective_rate_from_decays(const std::vector<double>& gamma_table, int d);

// Closed-form truncated-cavity baselines: {2/3,2/3}, {9/8,3/2}, {8/5,8/3}.
double fock_qudit_rate(int d, double kappa1c, double kappa_phi_c);

// Effective depolarization rate from 1 - F ~ ((d-1)/d) Gamma dt, Richardson
// extrapolated over dt, dt/2, dt/4, dt/8 (default dt = 10 ns).
double short_time_rate(const std::function<std::function<Mat(const Mat&)>(double)>& channel_at,
                       int d, double dt0 = 0.010);

double qec_gain(double gamma_physical, double gamma_logical);

struct DecayFit {
    double gamma = 0.0;      // 1/us
    double amplitude = 0.0;
    double offset = 0.0;     // fixed 1/d unless free_offset
    double gamma_err = 0.0;  // 1-sigma from linearized covariance
    bool degenerate = false; // flat curve, gamma pinned near 0
};

// Least squares of p(t) = A e^{-gamma t} + 1/d with the offset fixed
// (free_offset releases it for diagnostics). Needs >= 5 points.
DecayFit fit_exponential(const std::vector<double>& t_us, const std::vector<double>& p,
                         int d, bool free_offset = false);

}  // namespace gkpsim
