#include "gkpsim/simulate.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <Eigen/Eigenvalues>

namespace gkpsim {

TimingPlan TimingPlan::for_dimension(int d) {
    TimingPlan t;
    if (d == 3) t.sbs_gates_us = 1.808;
    if (d == 4) t.sbs_gates_us = 1.648;
    return t;
}

ErrorSwitches ErrorSwitches::all() {
    return ErrorSwitches{};
}

ErrorSwitches ErrorSwitches::none() {
    ErrorSwitches s;
    s.bitflip_sbs = s.dephase_sbs = s.loss_sbs = s.loss_idle = s.dephase_idle = false;
    return s;
}

ErrorSwitches ErrorSwitches::only(const std::string& name) {
    ErrorSwitches s = none();
    if (name == "bitflip_sbs") s.bitflip_sbs = true;
    else if (name == "dephase_sbs") s.dephase_sbs = true;
    else if (name == "loss_sbs") s.loss_sbs = true;
    else if (name == "loss_idle") s.loss_idle = true;
    else if (name == "dephase_idle") s.dephase_idle = true;
    else throw std::invalid_argument("ErrorSwitches::only: unknown switch " + name);
    return s;
}

bool SimulationPlan::noiseless() const {
    const bool any_switch = switches.bitflip_sbs || switches.dephase_sbs || switches.loss_sbs ||
                            switches.loss_idle || switches.dephase_idle;
    const bool any_rate = noise.kappa1c > 0 || noise.kappa_phi_c > 0 || noise.kappa1q > 0 ||
                          noise.kappa_phi_q > 0;
    return !(any_switch && any_rate);
}

Mat conditional_displacement_hamiltonian(const HilbertSpace& space, double chi, double alpha,
                                         double theta_beta) {
    const Mat a = annihilation(space);
    const cx i(0.0, 1.0);
    Mat hc = 0.5 * i * chi * alpha *
             (std::exp(i * theta_beta) * a.adjoint() - std::exp(-i * theta_beta) * a);
    Eigen::Matrix2cd sz;
    sz << 1, 0, 0, -1;
    return embed(hc, Subsystem::Cavity, space) * embed(sz, Subsystem::Ancilla, space);
}

// --- structured noise substeps on the composite density matrix ---------------

namespace {

// exact-trace photon loss: K0 = sqrt(I - k dt n), K1 = sqrt(k dt) a, applied
// to the cavity index of every ancilla block
void cavity_loss_substep(Mat& rho, int n, double k1, double dt) {
    const double kd = k1 * dt;
    if (kd * (n - 1) >= 1.0) throw StepTooLarge("cavity loss substep too large");
    Eigen::VectorXd d0(n);
    for (int m = 0; m < n; ++m) d0(m) = std::sqrt(1.0 - kd * m);
    Mat out = Mat::Zero(2 * n, 2 * n);
    for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj)
            for (int mi = 0; mi < n; ++mi)
                for (int mj = 0; mj < n; ++mj) {
                    cx v = d0(mi) * d0(mj) * rho(bi * n + mi, bj * n + mj);
                    if (mi + 1 < n && mj + 1 < n)
                        v += kd * std::sqrt(double(mi + 1) * (mj + 1)) *
                             rho(bi * n + mi + 1, bj * n + mj + 1);
                    out(bi * n + mi, bj * n + mj) = v;
                }
    rho = std::move(out);
}

// exact dephasing damping of cavity coherences; kphi * (n - m)^2 matches the
// K2 = sqrt(2 kphi dt) a^dag a Kraus convention (kphi = 1/T2R - 1/2T1)
void cavity_dephase_substep(Mat& rho, int n, double kphi, double dt) {
    for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj)
            for (int mi = 0; mi < n; ++mi)
                for (int mj = 0; mj < n; ++mj) {
                    const double diff = mi - mj;
                    rho(bi * n + mi, bj * n + mj) *=
                        std::exp(-kphi * dt * diff * diff);
                }
}

// symmetric bit-flip channel at rate k (combined heating and decay model)
void ancilla_flip_substep(Mat& rho, int n, double k, double dt) {
    const double p = 0.5 * (1.0 - std::exp(-2.0 * k * dt));
    Mat flipped(2 * n, 2 * n);
    flipped.block(0, 0, n, n) = rho.block(n, n, n, n);
    flipped.block(n, n, n, n) = rho.block(0, 0, n, n);
    flipped.block(0, n, n, n) = rho.block(n, 0, n, n);
    flipped.block(n, 0, n, n) = rho.block(0, n, n, n);
    rho = (1.0 - p) * rho + p * flipped;
}

void ancilla_dephase_substep(Mat& rho, int n, double kphi, double dt) {
    const double f = std::exp(-kphi * dt);
    rho.block(0, n, n, n) *= f;
    rho.block(n, 0, n, n) *= f;
}

// amplitude damping |e> -> |g> (used for the optional readout-segment decay)
void ancilla_decay_substep(Mat& rho, int n, double k, double dt) {
    const double g = 1.0 - std::exp(-k * dt);
    const double s = std::sqrt(1.0 - g);
    Mat out(2 * n, 2 * n);
    out.block(0, 0, n, n) = rho.block(0, 0, n, n) + g * rho.block(n, n, n, n);
    out.block(0, n, n, n) = s * rho.block(0, n, n, n);
    out.block(n, 0, n, n) = s * rho.block(n, 0, n, n);
    out.block(n, n, n, n) = (1.0 - g) * rho.block(n, n, n, n);
    rho = std::move(out);
}

void apply_ancilla_unitary(Mat& rho, int n, const Eigen::Matrix2cd& u) {
    Mat out = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    if (u(i, k) != cx(0.0, 0.0) && u(j, l) != cx(0.0, 0.0))
                        out.block(i * n, j * n, n, n) +=
                            u(i, k) * std::conj(u(j, l)) * rho.block(k * n, l * n, n, n);
    rho = std::move(out);
}

// U = diag(D(b/2), D(-b/2)) acting on the composite state
void apply_cd_unitary(Mat& rho, int n, const Mat& dhalf) {
    const Mat dh_adj = dhalf.adjoint();
    Mat gg = dhalf * rho.block(0, 0, n, n) * dh_adj;
    Mat ge = dhalf * rho.block(0, n, n, n) * dhalf;
    Mat eg = dh_adj * rho.block(n, 0, n, n) * dh_adj;
    Mat ee = dh_adj * rho.block(n, n, n, n) * dhalf;
    rho.block(0, 0, n, n) = gg;
    rho.block(0, n, n, n) = ge;
    rho.block(n, 0, n, n) = eg;
    rho.block(n, n, n, n) = ee;
}

struct SegmentNoise {
    double cav_loss = 0.0;
    double cav_dephase = 0.0;
    double anc_flip = 0.0;
    double anc_dephase = 0.0;
    double anc_decay = 0.0;
    bool active() const {
        return cav_loss > 0 || cav_dephase > 0 || anc_flip > 0 || anc_dephase > 0 ||
               anc_decay > 0;
    }
};

void apply_noise_substep(Mat& rho, int n, const SegmentNoise& sn, double dt) {
    if (sn.cav_loss > 0) cavity_loss_substep(rho, n, sn.cav_loss, dt);
    if (sn.cav_dephase > 0) cavity_dephase_substep(rho, n, sn.cav_dephase, dt);
    if (sn.anc_flip > 0) ancilla_flip_substep(rho, n, sn.anc_flip, dt);
    if (sn.anc_dephase > 0) ancilla_dephase_substep(rho, n, sn.anc_dephase, dt);
    if (sn.anc_decay > 0) ancilla_decay_substep(rho, n, sn.anc_decay, dt);
}

void noisy_idle(Mat& rho, int n, const SegmentNoise& sn, double duration, double substep) {
    if (!sn.active() || duration <= 0) return;
    const int nsub = std::max(1, int(std::ceil(duration / substep)));
    const double dt = duration / nsub;
    for (int k = 0; k < nsub; ++k) apply_noise_substep(rho, n, sn, dt);
}

void reset_ancilla(Mat& rho, int n) {
    Mat cav = rho.block(0, 0, n, n) + rho.block(n, n, n, n);
    rho.setZero();
    rho.block(0, 0, n, n) = cav;
}

SegmentNoise gate_noise(const SimulationPlan& plan) {
    SegmentNoise sn;
    if (plan.switches.loss_sbs) sn.cav_loss = plan.noise.kappa1c;
    if (plan.switches.bitflip_sbs) sn.anc_flip = plan.noise.kappa1q;
    if (plan.switches.dephase_sbs) sn.anc_dephase = plan.noise.kappa_phi_q;
    return sn;
}

SegmentNoise idle_noise(const SimulationPlan& plan) {
    SegmentNoise sn;
    if (plan.switches.loss_idle) sn.cav_loss = plan.noise.kappa1c;
    if (plan.switches.dephase_idle) sn.cav_dephase = plan.noise.kappa_phi_c;
    return sn;
}

double trace_distance(const Mat& a, const Mat& b) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a - b);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

int worker_count() {
    if (const char* env = std::getenv("GKPSIM_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 4;
}

}  // namespace

Mat noisy_sbs_round(const Mat& rho_in, const SimulationPlan& plan, const SbsParams& params,
                    int round_index, double frame_in, double* frame_out) {
    const HilbertSpace& sp = plan.space;
    const int n = sp.cavity_dim;
    if (rho_in.rows() != 2 * n) throw DimensionMismatch("noisy_sbs_round");
    Mat rho = rho_in;

    const cx f = std::exp(cx(0.0, frame_in));
    const cx betas[3] = {f * params.epsilon() / 2.0, f * cx(0.0, -params.ell_delta()),
                         f * params.epsilon() / 2.0};
    const Eigen::Matrix2cd rots[3] = {rotation_unitary(-M_PI / 2.0, M_PI / 2.0),
                                      rotation_unitary(0.0, M_PI / 2.0),
                                      rotation_unitary(0.0, -M_PI / 2.0)};
    const TimingPlan timing = TimingPlan::for_dimension(params.d);
    double beta_sum = 0.0;
    for (const cx& b : betas) beta_sum += std::abs(b);

    const SegmentNoise gn = gate_noise(plan);
    Eigen::Matrix2cd sx;
    sx << 0, 1, 1, 0;

    // each compiled ECD spends 4 cavity displacement pulses of 48 ns; the
    // conditional displacement itself only accrues during the wait windows,
    // which share the rest of the printed gate segment in proportion to |beta|.
    // noise runs through the pulse windows too, but a flip there lands between
    // conditional displacements instead of mid-way through one.
    const double pulse_us = 4 * 0.048;
    const double wait_total = timing.sbs_gates_us - 3 * pulse_us;

    for (int g = 0; g < 3; ++g) {
        apply_ancilla_unitary(rho, n, rots[g]);
        noisy_idle(rho, n, gn, pulse_us / 2.0, plan.substep_us);
        const double t_gate = wait_total * std::abs(betas[g]) / beta_sum;
        const int nsub =
            gn.active() ? std::max(1, int(std::ceil(t_gate / plan.substep_us))) : 1;
        const Mat dhalf = displacement(sp, betas[g] / (2.0 * nsub));
        const double dt = t_gate / nsub;
        for (int s = 0; s < nsub; ++s) {
            apply_cd_unitary(rho, n, dhalf);
            if (gn.active()) apply_noise_substep(rho, n, gn, dt);
        }
        noisy_idle(rho, n, gn, pulse_us / 2.0, plan.substep_us);
        apply_ancilla_unitary(rho, n, sx);  // echo completes the ECD
    }

    // ancilla readout + reset segment: cavity idle noise, ancilla ideal
    // unless the readout-decay switch is on
    SegmentNoise rn = idle_noise(plan);
    if (plan.switches.ancilla_readout) rn.anc_decay = plan.noise.kappa1q;
    noisy_idle(rho, n, rn, timing.readout_reset_us, plan.substep_us);
    reset_ancilla(rho, n);

    noisy_idle(rho, n, idle_noise(plan), timing.idle_us() + timing.fpga_us, plan.substep_us);

    if (frame_out) *frame_out = frame_in + frame_phase_increment(params.d, round_index);
    return rho;
}

LifetimeCurve run_memory_experiment(const SimulationPlan& plan, const LogicalBasis& basis,
                                    int state_index, const std::vector<int>& round_counts) {
    const HilbertSpace& sp = plan.space;
    const int n = sp.cavity_dim;
    if (size_t(n) * n * 16 > size_t(1) << 33)
        throw ResourceLimit("run_memory_experiment: density matrix too large");
    for (size_t k = 0; k < round_counts.size(); ++k) {
        if (round_counts[k] % 4 != 0)
            throw std::invalid_argument(
                "run_memory_experiment: round counts must be multiples of 4 so the "
                "frame phase returns to zero before measuring");
        if (k > 0 && round_counts[k] <= round_counts[k - 1])
            throw std::invalid_argument("run_memory_experiment: rounds must increase");
    }

    const GkpCode code = build_code(plan.d, plan.delta, sp);
    const LogicalMeasurement meas = logical_measurement(code, basis);
    const SbsParams params{plan.d, plan.delta};
    const TimingPlan timing = TimingPlan::for_dimension(plan.d);

    const Vec& psi = basis.states.at(state_index);
    Mat rho = Mat::Zero(2 * n, 2 * n);
    rho.block(0, 0, n, n) = psi * psi.adjoint();

    LifetimeCurve curve;
    curve.basis_label = basis.state_names.at(state_index);
    double frame = 0.0;
    int done = 0;
    for (int target : round_counts) {
        for (; done < target; ++done) rho = noisy_sbs_round(rho, plan, params, done, frame, &frame);
        double survival = 0.0;
        const Mat cav = partial_trace_ancilla(rho, sp);
        for (const OutcomeBranch& br : measure_branches(cav, meas))
            if (br.outcome == state_index) survival += br.prob;
        curve.rounds.push_back(target);
        curve.survival.push_back(survival);
        curve.t_us.push_back(target * timing.round_us);
    }
    return curve;
}

std::vector<FidelitySweepRow> measurement_fidelity_sweep(int d, const std::vector<double>& deltas,
                                                         const HilbertSpace& space) {
    std::vector<FidelitySweepRow> rows;
    for (double delta : deltas) {
        const GkpCode code = build_code(d, delta, space);
        std::vector<LogicalBasis> bases;
        for (const PauliLabel& label : measurement_pauli_set(d))
            bases.push_back(pauli_eigenbasis(code, label));
        if (parity_basis_required(d)) bases.push_back(parity_basis(code));
        for (const LogicalBasis& basis : bases) {
            const LogicalMeasurement meas = logical_measurement(code, basis);
            double f = 0.0;
            for (int s = 0; s < d; ++s) {
                const Vec& psi = basis.states[s];
                const Mat rho = psi * psi.adjoint();
                for (const OutcomeBranch& br : measure_branches(rho, meas))
                    if (br.outcome == s) f += br.prob;
            }
            std::string label = basis.kind == LogicalBasis::Kind::Parity
                                    ? "parity"
                                    : pauli_name(d, basis.label);
            rows.push_back({delta, label, f / d});
        }
    }
    return rows;
}

std::vector<ErrorBudgetEntry> error_budget(const SimulationPlan& plan,
                                           const std::vector<int>& round_counts) {
    // the budget error model attributes cavity dephasing entirely to the
    // ancilla thermal population
    SimulationPlan base = plan;
    base.noise.kappa_phi_c = base.noise.n_th * base.noise.kappa1q;

    const GkpCode code = build_code(plan.d, plan.delta, plan.space);
    std::vector<LogicalBasis> bases;
    for (const PauliLabel& label : measurement_pauli_set(plan.d))
        bases.push_back(pauli_eigenbasis(code, label));
    if (parity_basis_required(plan.d)) bases.push_back(parity_basis(code));
    const int nb = int(bases.size());

    const std::vector<std::pair<std::string, ErrorSwitches>> configs = {
        {"all_errors", ErrorSwitches::all()},
        {"bitflip_sbs", ErrorSwitches::only("bitflip_sbs")},
        {"dephase_sbs", ErrorSwitches::only("dephase_sbs")},
        {"loss_sbs", ErrorSwitches::only("loss_sbs")},
        {"all_sbs",
         [] {
             ErrorSwitches s = ErrorSwitches::none();
             s.bitflip_sbs = s.dephase_sbs = s.loss_sbs = true;
             return s;
         }()},
        {"loss_idle", ErrorSwitches::only("loss_idle")},
        {"dephase_idle", ErrorSwitches::only("dephase_idle")},
        {"all_idle",
         [] {
             ErrorSwitches s = ErrorSwitches::none();
             s.loss_idle = s.dephase_idle = true;
             return s;
         }()},
    };

    // one |P_0>-style curve per basis per configuration, run on a worker pool
    const int njobs = int(configs.size()) * nb;
    std::vector<double> gammas(njobs, 0.0);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int j = next.fetch_add(1); j < njobs; j = next.fetch_add(1)) {
            SimulationPlan p = base;
            p.switches = configs[j / nb].second;
            const LifetimeCurve curve =
                run_memory_experiment(p, bases[j % nb], 0, round_counts);
            gammas[j] = fit_exponential(curve.t_us, curve.survival, plan.d).gamma;
        }
    };
    std::vector<std::thread> pool;
    const int nw = std::min(worker_count(), njobs);
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    auto aggregate = [&](const double* g) {
        if (plan.d == 2) return (g[0] + g[1] + g[2]) / 3.0;
        if (plan.d == 3) return (g[0] + g[1] + g[2] + g[3]) / 4.0;
        return (g[0] + g[1] + g[2] + g[3] + g[4] + g[5] - g[6]) / 5.0;
    };

    std::vector<ErrorBudgetEntry> entries;
    double gamma_all = 0.0;
    for (size_t c = 0; c < configs.size(); ++c) {
        ErrorBudgetEntry e;
        e.error_type = configs[c].first;
        e.gamma.assign(gammas.begin() + c * nb, gammas.begin() + (c + 1) * nb);
        e.gamma_total = aggregate(e.gamma.data());
        if (c == 0) gamma_all = e.gamma_total;
        e.percent_share = 100.0 * e.gamma_total / gamma_all;
        entries.push_back(std::move(e));
    }
    return entries;
}

Mat steady_state_rho(const SimulationPlan& plan, int rounds, bool noiseless) {
    if (rounds < 100) throw std::invalid_argument("steady_state_rho: need rounds >= 100");
    SimulationPlan p = plan;
    if (noiseless) p.switches = ErrorSwitches::none();
    const int n = p.space.cavity_dim;
    const SbsParams params{p.d, p.delta};
    Mat rho = Mat::Zero(2 * n, 2 * n);
    rho(0, 0) = 1.0;
    double frame = 0.0;
    for (int j = 0; j < rounds; ++j) rho = noisy_sbs_round(rho, p, params, j, frame, &frame);
    Mat ref = partial_trace_ancilla(rho, p.space);
    // compare against the state four rounds later (same frame) for stationarity
    for (int j = rounds; j < rounds + 4; ++j)
        rho = noisy_sbs_round(rho, p, params, j, frame, &frame);
    Mat out = partial_trace_ancilla(rho, p.space);
    if (trace_distance(ref, out) >= 1e-3)
        throw NotConverged("steady_state_rho: not stationary after the requested rounds");
    return out;
}

Mat noiseless_steady_state(int d, double delta, const HilbertSpace& space, int rounds) {
    const int n = space.cavity_dim;
    const SbsParams params{d, delta};
    // the frame phase is periodic with period 4, so four round unitaries
    // (gate steps only, reset handled separately) cover the whole evolution
    Mat units[4];
    double frame = 0.0;
    for (int j = 0; j < 4; ++j) {
        CircuitSchedule sch = sbs_round(params, space, j);
        CircuitSchedule gates{space, {}};
        for (const CircuitStep& s : sch.steps)
            if (s.kind != CircuitStep::Kind::Reset && s.kind != CircuitStep::Kind::Frame)
                gates.append(s);
        units[j] = schedule_unitary(gates, frame);
        frame += frame_phase_increment(d, j);
    }
    Mat cav = Mat::Zero(n, n);
    cav(0, 0) = 1.0;
    Mat comp(2 * n, 2 * n);
    for (int j = 0; j < rounds; ++j) {
        comp.setZero();
        comp.block(0, 0, n, n) = cav;
        const Mat& u = units[j % 4];
        comp = u * comp * u.adjoint();
        cav = partial_trace_ancilla(comp, space);
    }
    return cav;
}

}  // namespace gkpsim
