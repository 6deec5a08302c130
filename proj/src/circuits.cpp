#include "gkpsim/circuits.hpp"

#include <cmath>

namespace gkpsim {

CircuitStep CircuitStep::ecd(cx beta) {
    CircuitStep s;
    s.kind = Kind::Ecd;
    s.beta = beta;
    return s;
}
CircuitStep CircuitStep::rotate(double phi, double theta) {
    CircuitStep s;
    s.kind = Kind::Rotate;
    s.phi = phi;
    s.theta = theta;
    return s;
}
CircuitStep CircuitStep::zphase(double theta) {
    CircuitStep s;
    s.kind = Kind::ZPhase;
    s.theta = theta;
    return s;
}
CircuitStep CircuitStep::displace(cx alpha) {
    CircuitStep s;
    s.kind = Kind::Displace;
    s.beta = alpha;
    return s;
}
CircuitStep CircuitStep::frame(double phi) {
    CircuitStep s;
    s.kind = Kind::Frame;
    s.phi = phi;
    return s;
}
CircuitStep CircuitStep::measure(Axis axis, std::string tag) {
    CircuitStep s;
    s.kind = Kind::Measure;
    s.axis = axis;
    s.tag = std::move(tag);
    return s;
}
CircuitStep CircuitStep::reset() {
    CircuitStep s;
    s.kind = Kind::Reset;
    return s;
}

void CircuitSchedule::extend(const CircuitSchedule& other) {
    if (other.space != space) throw DimensionMismatch("CircuitSchedule::extend");
    steps.insert(steps.end(), other.steps.begin(), other.steps.end());
}

Mat ecd_unitary(const HilbertSpace& space, cx beta) {
    const int n = space.cavity_dim;
    const Mat dp = displacement(space, beta / 2.0);
    Mat u = Mat::Zero(2 * n, 2 * n);
    u.block(n, 0, n, n) = dp;            // |e⟩⟨g| ⊗ D(beta/2)
    u.block(0, n, n, n) = dp.adjoint();  // |g⟩⟨e| ⊗ D(-beta/2)
    return u;
}

Eigen::Matrix2cd rotation_unitary(double phi, double theta) {
    const cx i(0.0, 1.0);
    Eigen::Matrix2cd sx, sy;
    sx << 0, 1, 1, 0;
    sy << 0, -i, i, 0;
    return std::cos(theta / 2.0) * Eigen::Matrix2cd::Identity() +
           i * std::sin(theta / 2.0) * (std::cos(phi) * sx + std::sin(phi) * sy);
}

Eigen::Matrix2cd zphase_unitary(double theta) {
    Eigen::Matrix2cd z = Eigen::Matrix2cd::Identity();
    z(1, 1) = std::exp(cx(0.0, theta));
    return z;
}

double SbsParams::epsilon() const {
    return std::sqrt(M_PI * d) * std::sinh(delta * delta);
}
double SbsParams::ell_delta() const {
    return std::sqrt(M_PI * d) * std::cosh(delta * delta);
}

double frame_phase_increment(int d, int j) {
    if (d % 2 == 0) return M_PI / 2.0;
    static const double odd[4] = {M_PI, -M_PI / 2.0, M_PI, M_PI / 2.0};
    return odd[((j % 4) + 4) % 4];
}

CircuitSchedule sbs_round(const SbsParams& params, const HilbertSpace& space, int j) {
    const double e2 = params.epsilon() / 2.0;
    const double ell = params.ell_delta();
    CircuitSchedule sch{space, {}};
    sch.append(CircuitStep::rotate(-M_PI / 2.0, M_PI / 2.0));  // |g⟩ -> |+⟩
    sch.append(CircuitStep::ecd(e2));
    sch.append(CircuitStep::rotate(0.0, M_PI / 2.0));
    sch.append(CircuitStep::ecd(cx(0.0, -ell)));
    sch.append(CircuitStep::rotate(0.0, -M_PI / 2.0));
    sch.append(CircuitStep::ecd(e2));
    sch.append(CircuitStep::reset());
    sch.append(CircuitStep::frame(frame_phase_increment(params.d, j)));
    return sch;
}

// n exponent actually compiled: the shorter X^{-1} displacement replaces
// X^{d-1} for d > 2 (stabilizer-equivalent on the code space)
static int effective_n(int d, const PauliLabel& label) {
    const int n = ((label.n % d) + d) % d;
    if (n == d - 1 && d > 2) return -1;
    return n;
}

cx cp_beta(int d, const PauliLabel& label) {
    const int m = ((label.m % d) + d) % d;
    const double lam = std::sqrt(M_PI / d);
    return cx(effective_n(d, label) * lam, m * lam);
}

double cp_phi(int d, const PauliLabel& label) {
    const int m = ((label.m % d) + d) % d;
    return effective_n(d, label) * m * M_PI / d - std::arg(label.phase);
}

CircuitSchedule controlled_pauli(int d, const PauliLabel& label, const HilbertSpace& space,
                                 bool include_displacement) {
    const cx beta = cp_beta(d, label);
    const double phi = cp_phi(d, label);
    CircuitSchedule sch{space, {}};
    sch.append(CircuitStep::rotate(0.0, M_PI));  // sigma_x up to a global phase
    sch.append(CircuitStep::ecd(beta));
    sch.append(CircuitStep::zphase(-phi));
    if (include_displacement) sch.append(CircuitStep::displace(beta / 2.0));
    return sch;
}

CircuitSchedule controlled_pauli_dagger(int d, const PauliLabel& label, const HilbertSpace& space,
                                        bool include_displacement) {
    const cx beta = cp_beta(d, label);
    const double phi = cp_phi(d, label);
    CircuitSchedule sch{space, {}};
    if (include_displacement) sch.append(CircuitStep::displace(-beta / 2.0));
    sch.append(CircuitStep::zphase(phi));
    sch.append(CircuitStep::ecd(beta));  // ECD is Hermitian
    sch.append(CircuitStep::rotate(0.0, M_PI));
    return sch;
}

// --- execution helpers ------------------------------------------------------

static std::pair<Eigen::Vector2cd, Eigen::Vector2cd> axis_vectors(Axis axis) {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Vector2cd b0, b1;
    switch (axis) {
        case Axis::X:
            b0 << s, s;
            b1 << s, -s;
            break;
        case Axis::Y:
            b0 << s, cx(0.0, s);
            b1 << s, cx(0.0, -s);
            break;
        case Axis::Z:
            b0 << 1, 0;
            b1 << 0, 1;
            break;
    }
    return {b0, b1};
}

// composite unitary of one non-measurement step in the current frame
static Mat step_unitary(const CircuitStep& s, const HilbertSpace& space, double frame) {
    const int n = space.cavity_dim;
    const cx f = std::exp(cx(0.0, frame));
    switch (s.kind) {
        case CircuitStep::Kind::Ecd:
            return ecd_unitary(space, f * s.beta);
        case CircuitStep::Kind::Rotate:
            return embed(rotation_unitary(s.phi, s.theta), Subsystem::Ancilla, space);
        case CircuitStep::Kind::ZPhase:
            return embed(zphase_unitary(s.theta), Subsystem::Ancilla, space);
        case CircuitStep::Kind::Displace:
            return embed(displacement(space, f * s.beta), Subsystem::Cavity, space);
        case CircuitStep::Kind::Frame:
            return Mat::Identity(2 * n, 2 * n);
        default:
            throw std::invalid_argument("step_unitary: step is not unitary");
    }
}

RunResult run_schedule(const Vec& state, const CircuitSchedule& schedule,
                       std::mt19937_64& rng, double frame0) {
    const HilbertSpace& sp = schedule.space;
    const int n = sp.cavity_dim;
    if (state.size() != sp.total_dim()) throw DimensionMismatch("run_schedule");
    RunResult res;
    res.state = state;
    res.frame = frame0;
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    auto collapse = [&](Axis axis, bool record, const std::string& tag) {
        auto [b0, b1] = axis_vectors(axis);
        Vec c0 = std::conj(b0(0)) * res.state.segment(0, n) +
                 std::conj(b0(1)) * res.state.segment(n, n);
        Vec c1 = std::conj(b1(0)) * res.state.segment(0, n) +
                 std::conj(b1(1)) * res.state.segment(n, n);
        const double p0 = c0.squaredNorm();
        const double p1 = c1.squaredNorm();
        if (p0 + p1 < 1e-12) throw NormCollapseError("run_schedule: state norm collapsed");
        const int outcome = (uni(rng) * (p0 + p1) < p0) ? 0 : 1;
        const Vec& c = outcome == 0 ? c0 : c1;
        const Eigen::Vector2cd& b = outcome == 0 ? b0 : b1;
        const double nn = c.norm();
        if (nn < 1e-12) throw NormCollapseError("run_schedule: post-measurement norm < 1e-12");
        res.state.segment(0, n) = b(0) / nn * c;
        res.state.segment(n, n) = b(1) / nn * c;
        if (record) {
            if (res.outcomes.count(tag))
                throw std::invalid_argument("run_schedule: duplicate measure tag " + tag);
            res.outcomes[tag] = outcome;
        }
        return outcome;
    };

    for (const CircuitStep& s : schedule.steps) {
        switch (s.kind) {
            case CircuitStep::Kind::Frame:
                res.frame += s.phi;
                break;
            case CircuitStep::Kind::Measure:
                collapse(s.axis, true, s.tag);
                break;
            case CircuitStep::Kind::Reset: {
                // unfolded trace-replace: sample z, then flip |e⟩ to |g⟩
                int out = collapse(Axis::Z, false, "");
                if (out == 1) {
                    res.state.segment(0, n).swap(res.state.segment(n, n));
                }
                break;
            }
            default:
                res.state = step_unitary(s, sp, res.frame) * res.state;
        }
    }
    return res;
}

static void apply_step_dm(Mat& rho, const CircuitStep& s, const HilbertSpace& sp,
                          double& frame) {
    const int n = sp.cavity_dim;
    switch (s.kind) {
        case CircuitStep::Kind::Frame:
            frame += s.phi;
            return;
        case CircuitStep::Kind::Reset: {
            Mat cav = rho.block(0, 0, n, n) + rho.block(n, n, n, n);
            rho.setZero();
            rho.block(0, 0, n, n) = cav;
            return;
        }
        case CircuitStep::Kind::Measure:
            throw std::invalid_argument("run_schedule_dm: measure step not supported");
        default: {
            const Mat u = step_unitary(s, sp, frame);
            rho = u * rho * u.adjoint();
        }
    }
}

Mat run_schedule_dm(const Mat& rho, const CircuitSchedule& schedule, double frame0,
                    double* frame_out) {
    if (rho.rows() != schedule.space.total_dim()) throw DimensionMismatch("run_schedule_dm");
    Mat out = rho;
    double frame = frame0;
    for (const CircuitStep& s : schedule.steps) apply_step_dm(out, s, schedule.space, frame);
    if (frame_out) *frame_out = frame;
    return out;
}

Mat schedule_unitary(const CircuitSchedule& schedule, double frame0, double* frame_out) {
    const int t = schedule.space.total_dim();
    Mat u = Mat::Identity(t, t);
    double frame = frame0;
    for (const CircuitStep& s : schedule.steps) {
        if (s.kind == CircuitStep::Kind::Measure || s.kind == CircuitStep::Kind::Reset)
            throw std::invalid_argument("schedule_unitary: schedule is not unitary");
        if (s.kind == CircuitStep::Kind::Frame) {
            frame += s.phi;
            continue;
        }
        u = step_unitary(s, schedule.space, frame) * u;
    }
    if (frame_out) *frame_out = frame;
    return u;
}

// --- logical measurements ----------------------------------------------------

static CircuitSchedule prep_plus(const HilbertSpace& space) {
    CircuitSchedule sch{space, {}};
    sch.append(CircuitStep::rotate(-M_PI / 2.0, M_PI / 2.0));
    return sch;
}

static PauliLabel pauli_square(int d, const PauliLabel& label) {
    const int n = ((label.n % d) + d) % d;
    const int m = ((label.m % d) + d) % d;
    PauliLabel sq;
    sq.n = (2 * n) % d;
    sq.m = (2 * m) % d;
    // X^n Z^m X^n Z^m = omega^{nm} X^{2n} Z^{2m}
    sq.phase = label.phase * label.phase * std::pow(omega(d), n * m);
    return sq;
}

LogicalMeasurement qubit_pauli_measurement(const GkpCode& code, const PauliLabel& label,
                                           bool include_displacement) {
    if (code.d != 2) throw WrongDimension("qubit_pauli_measurement: requires d = 2");
    LogicalMeasurement meas;
    meas.d = 2;
    meas.name = pauli_name(2, label);
    meas.parts = 1;
    meas.part1 = prep_plus(code.space);
    meas.part1.extend(controlled_pauli(2, label, code.space, include_displacement));
    meas.part1.append(CircuitStep::measure(Axis::X, "m1"));
    meas.part1.append(CircuitStep::reset());
    meas.decode = [](int m1, int) { return m1; };
    return meas;
}

LogicalMeasurement qutrit_pauli_measurement(const GkpCode& code, const PauliLabel& label,
                                            int symmetrization_k, bool include_displacement) {
    if (code.d != 3) throw WrongDimension("qutrit_pauli_measurement: requires d = 3");
    const int k = ((symmetrization_k % 3) + 3) % 3;
    const double th0 = 2.0 * std::atan(1.0 / std::sqrt(2.0));
    const double sk = 2.0 * M_PI * k / 3.0;
    const HilbertSpace& sp = code.space;

    auto cp = controlled_pauli(3, label, sp, include_displacement);
    auto cpd = controlled_pauli_dagger(3, label, sp, include_displacement);

    LogicalMeasurement meas;
    meas.d = 3;
    meas.name = pauli_name(3, label);
    meas.parts = 2;

    CircuitSchedule p1 = prep_plus(sp);
    p1.extend(cp);
    p1.append(CircuitStep::zphase(sk));
    p1.append(CircuitStep::rotate(0.0, th0));
    p1.extend(cpd);
    p1.append(CircuitStep::zphase(-sk));
    p1.append(CircuitStep::rotate(0.0, -th0));
    p1.extend(cp);
    p1.append(CircuitStep::zphase(sk));
    p1.append(CircuitStep::rotate(M_PI / 2.0, -M_PI / 2.0));
    p1.append(CircuitStep::measure(Axis::Z, "m1"));
    p1.append(CircuitStep::reset());
    meas.part1 = std::move(p1);

    CircuitSchedule p2 = prep_plus(sp);
    p2.extend(cp);
    p2.append(CircuitStep::zphase(sk));
    p2.append(CircuitStep::rotate(2.0 * M_PI / 3.0, th0));
    p2.extend(cpd);
    p2.append(CircuitStep::zphase(-sk));
    p2.append(CircuitStep::rotate(0.0, -th0));
    p2.extend(cp);
    p2.append(CircuitStep::zphase(sk));
    p2.append(CircuitStep::rotate(7.0 * M_PI / 6.0, -M_PI / 2.0));
    p2.append(CircuitStep::measure(Axis::Z, "m2"));
    p2.append(CircuitStep::reset());
    meas.part2 = [p2](int) { return p2; };

    // (m1=e) -> P_0 class, (g,e) -> P_1, (g,g) -> P_2, all shifted by k
    meas.decode = [k](int m1, int m2) {
        int base = (m1 == 1) ? 0 : (m2 == 1 ? 1 : 2);
        return ((base - k) % 3 + 3) % 3;
    };
    return meas;
}

// Second-outcome inversion caused by the omitted unconditional displacement
// of the first gate: D(-beta1/2) conjugates the part-2 Pauli into
// e^{-i Im(beta2 conj(beta1))} P, and a -1 phase swaps the two outcomes
// within each parity class. Verified against branch enumeration on
// small-Delta codewords (see tests).
static bool part2_outcome_flip(cx beta1, cx beta2) {
    const double phase = -std::imag(beta2 * std::conj(beta1));
    return std::abs(std::remainder(phase, 2.0 * M_PI)) > M_PI / 2.0;
}

LogicalMeasurement ququart_pauli_measurement(const GkpCode& code, const PauliLabel& label,
                                             bool include_displacement) {
    if (code.d != 4) throw WrongDimension("ququart_pauli_measurement: requires d = 4");
    const HilbertSpace& sp = code.space;
    const PauliLabel sq = pauli_square(4, label);

    LogicalMeasurement meas;
    meas.d = 4;
    meas.name = pauli_name(4, label);
    meas.parts = 2;

    CircuitSchedule p1 = prep_plus(sp);
    p1.extend(controlled_pauli(4, sq, sp, include_displacement));
    p1.append(CircuitStep::measure(Axis::X, "m1"));
    p1.append(CircuitStep::reset());
    meas.part1 = std::move(p1);

    CircuitSchedule base = prep_plus(sp);
    base.extend(controlled_pauli(4, label, sp, include_displacement));
    meas.part2 = [base](int m1) {
        CircuitSchedule p2 = base;
        p2.append(CircuitStep::measure(m1 == 0 ? Axis::X : Axis::Y, "m2"));
        p2.append(CircuitStep::reset());
        return p2;
    };

    const bool flip =
        !include_displacement && part2_outcome_flip(cp_beta(4, sq), cp_beta(4, label));
    meas.decode = [flip](int m1, int m2) { return m1 + 2 * (flip ? 1 - m2 : m2); };
    return meas;
}

LogicalMeasurement ququart_parity_measurement(const GkpCode& code, bool include_displacement) {
    if (code.d != 4) throw WrongDimension("ququart_parity_measurement: requires d = 4");
    const HilbertSpace& sp = code.space;
    const PauliLabel x2{2, 0, 1.0};
    const PauliLabel z2{0, 2, 1.0};

    LogicalMeasurement meas;
    meas.d = 4;
    meas.name = "parity";
    meas.parts = 2;

    CircuitSchedule p1 = prep_plus(sp);
    p1.extend(controlled_pauli(4, x2, sp, include_displacement));
    p1.append(CircuitStep::measure(Axis::X, "m1"));
    p1.append(CircuitStep::reset());
    meas.part1 = std::move(p1);

    CircuitSchedule p2 = prep_plus(sp);
    p2.extend(controlled_pauli(4, z2, sp, include_displacement));
    p2.append(CircuitStep::measure(Axis::X, "m2"));
    p2.append(CircuitStep::reset());
    meas.part2 = [p2](int) { return p2; };

    const bool flip =
        !include_displacement && part2_outcome_flip(cp_beta(4, x2), cp_beta(4, z2));
    // outcome index into the (+,0), (-,0), (+,1), (-,1) order
    meas.decode = [flip](int m1, int m2) { return 2 * (flip ? 1 - m2 : m2) + m1; };
    return meas;
}

LogicalMeasurement logical_measurement(const GkpCode& code, const LogicalBasis& basis) {
    if (basis.kind == LogicalBasis::Kind::Parity) return ququart_parity_measurement(code);
    switch (code.d) {
        case 2:
            return qubit_pauli_measurement(code, basis.label);
        case 3:
            return qutrit_pauli_measurement(code, basis.label);
        case 4:
            return ququart_pauli_measurement(code, basis.label);
        default:
            throw WrongDimension("logical_measurement: d must be 2, 3 or 4");
    }
}

// --- branch enumeration -------------------------------------------------------

namespace {

struct DmBranch {
    Mat rho;
    double prob = 1.0;
    int outcome = -1;
};

// applies a one-measurement schedule to each input branch, splitting at the
// measure step; drops branches below the probability floor
std::vector<DmBranch> run_part(const std::vector<DmBranch>& in, const CircuitSchedule& sch,
                               const HilbertSpace& sp) {
    const int n = sp.cavity_dim;
    std::vector<DmBranch> out;
    for (const DmBranch& br : in) {
        std::vector<DmBranch> live{{br.rho, br.prob, -1}};
        for (const CircuitStep& s : sch.steps) {
            if (s.kind == CircuitStep::Kind::Measure) {
                std::vector<DmBranch> next;
                auto [b0, b1] = axis_vectors(s.axis);
                for (const DmBranch& lb : live) {
                    for (int o = 0; o < 2; ++o) {
                        const Eigen::Vector2cd& b = o == 0 ? b0 : b1;
                        const Mat proj =
                            embed(b * b.adjoint(), Subsystem::Ancilla, sp);
                        Mat post = proj * lb.rho * proj;
                        const double p = std::real(post.trace());
                        if (p < 1e-14) continue;
                        next.push_back({post / p, lb.prob * p, o});
                    }
                }
                live = std::move(next);
            } else {
                double frame = 0.0;
                for (DmBranch& lb : live) apply_step_dm(lb.rho, s, sp, frame);
            }
        }
        for (DmBranch& lb : live) out.push_back(std::move(lb));
    }
    return out;
}

}  // namespace

std::vector<OutcomeBranch> measure_branches(const Mat& rho_cavity,
                                            const LogicalMeasurement& meas) {
    const HilbertSpace& sp = meas.part1.space;
    const int n = sp.cavity_dim;
    if (rho_cavity.rows() != n) throw DimensionMismatch("measure_branches");
    Mat comp = Mat::Zero(2 * n, 2 * n);
    comp.block(0, 0, n, n) = rho_cavity;  // ancilla starts in |g⟩

    std::vector<DmBranch> after1 = run_part({{comp, 1.0, -1}}, meas.part1, sp);
    std::vector<OutcomeBranch> result;
    for (const DmBranch& b1 : after1) {
        std::vector<DmBranch> final_branches;
        if (meas.parts == 2) {
            final_branches = run_part({{b1.rho, b1.prob, -1}}, meas.part2(b1.outcome), sp);
        } else {
            final_branches = {b1};
        }
        for (const DmBranch& b2 : final_branches) {
            OutcomeBranch ob;
            ob.m1 = b1.outcome;
            ob.m2 = meas.parts == 2 ? b2.outcome : 0;
            ob.outcome = meas.decode(ob.m1, ob.m2);
            ob.prob = b2.prob;
            ob.post_cavity = partial_trace_ancilla(b2.rho, sp);
            result.push_back(std::move(ob));
        }
    }
    return result;
}

}  // namespace gkpsim
