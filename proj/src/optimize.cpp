#include "gkpsim/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "gkpsim/code.hpp"

namespace gkpsim {

EcdCircuitParams EcdCircuitParams::from_flat(int depth, const std::vector<double>& x) {
    if (int(x.size()) != 4 * depth)
        throw DimensionMismatch("EcdCircuitParams::from_flat: need 4*depth values");
    EcdCircuitParams p;
    p.depth = depth;
    for (int k = 0; k < depth; ++k) {
        p.beta.emplace_back(x[k], x[depth + k]);
        p.phi.push_back(x[2 * depth + k]);
        p.theta.push_back(x[3 * depth + k]);
    }
    return p;
}

std::vector<double> EcdCircuitParams::to_flat() const {
    std::vector<double> x(4 * depth);
    for (int k = 0; k < depth; ++k) {
        x[k] = beta[k].real();
        x[depth + k] = beta[k].imag();
        x[2 * depth + k] = phi[k];
        x[3 * depth + k] = theta[k];
    }
    return x;
}

Mat ecd_circuit_unitary(const HilbertSpace& space, const EcdCircuitParams& params) {
    Mat u = Mat::Identity(space.total_dim(), space.total_dim());
    for (int k = 0; k < params.depth; ++k) {
        const Eigen::Matrix2cd r = rotation_unitary(params.phi[k], params.theta[k]);
        u = ecd_unitary(space, params.beta[k]) * embed(r, Subsystem::Ancilla, space) * u;
    }
    return u;
}

Vec apply_ecd_circuit(const DisplacementEngine& engine, const EcdCircuitParams& params) {
    const int n = engine.dim();
    Vec pg = Vec::Zero(n), pe = Vec::Zero(n);
    pg(0) = 1.0;
    for (int k = 0; k < params.depth; ++k) {
        const Eigen::Matrix2cd r = rotation_unitary(params.phi[k], params.theta[k]);
        Vec g2 = r(0, 0) * pg + r(0, 1) * pe;
        Vec e2 = r(1, 0) * pg + r(1, 1) * pe;
        pg = engine.apply(-params.beta[k] / 2.0, e2);
        pe = engine.apply(params.beta[k] / 2.0, g2);
    }
    return pg;  // unnormalized projection onto ancilla |g>
}

double prep_fidelity(const HilbertSpace& space, const EcdCircuitParams& params,
                     const Vec& target) {
    DisplacementEngine engine(HilbertSpace{space.cavity_dim});
    return std::norm(target.dot(apply_ecd_circuit(engine, params)));
}

namespace {

// portable deterministic gaussians (std::normal_distribution is
// implementation-defined)
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform() {
        return (gen() >> 11) * (1.0 / 9007199254740992.0);
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

struct CmaResult {
    std::vector<double> x;
    double f = -1e300;
    long evals = 0;
};

// standard (mu/mu_w, lambda) CMA-ES, maximizing f
template <typename F>
CmaResult cmaes(const F& f, const std::vector<double>& x0, double sigma0, long budget, Rng& rng) {
    const int n = int(x0.size());
    const int lam = 4 + int(3.0 * std::log(double(n)));
    const int mu = lam / 2;
    Eigen::VectorXd w(mu);
    for (int i = 0; i < mu; ++i) w(i) = std::log(mu + 0.5) - std::log(i + 1.0);
    w /= w.sum();
    const double mueff = 1.0 / w.squaredNorm();
    const double cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
    const double cs = (mueff + 2.0) / (n + mueff + 5.0);
    const double c1 = 2.0 / ((n + 1.3) * (n + 1.3) + mueff);
    const double cmu =
        std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0) * (n + 2.0) + mueff));
    const double damps =
        1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (n + 1.0)) - 1.0) + cs;
    const double chi_n = std::sqrt(double(n)) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

    Eigen::VectorXd xmean = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
    double sigma = sigma0;
    Eigen::VectorXd pc = Eigen::VectorXd::Zero(n), ps = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd dd = Eigen::VectorXd::Ones(n);
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd invsqrt_c = Eigen::MatrixXd::Identity(n, n);
    long eigeneval = 0;

    CmaResult best;
    best.x = x0;
    long counteval = 0;
    std::vector<Eigen::VectorXd> arx(lam);
    std::vector<double> fit(lam);
    std::vector<int> idx(lam);
    while (counteval < budget) {
        for (int k = 0; k < lam; ++k) {
            Eigen::VectorXd z(n);
            for (int i = 0; i < n; ++i) z(i) = rng.normal();
            arx[k] = xmean + sigma * (b * (dd.asDiagonal() * z));
            fit[k] = f(std::vector<double>(arx[k].data(), arx[k].data() + n));
        }
        counteval += lam;
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int i, int j) { return fit[i] > fit[j]; });
        if (fit[idx[0]] > best.f) {
            best.f = fit[idx[0]];
            best.x.assign(arx[idx[0]].data(), arx[idx[0]].data() + n);
        }
        const Eigen::VectorXd xold = xmean;
        xmean.setZero();
        for (int i = 0; i < mu; ++i) xmean += w(i) * arx[idx[i]];
        ps = (1.0 - cs) * ps +
             std::sqrt(cs * (2.0 - cs) * mueff) * (invsqrt_c * (xmean - xold)) / sigma;
        const bool hsig =
            ps.norm() / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * counteval / lam)) / chi_n <
            1.4 + 2.0 / (n + 1.0);
        pc = (1.0 - cc) * pc +
             (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * (xmean - xold) / sigma;
        Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < mu; ++i) {
            const Eigen::VectorXd y = (arx[idx[i]] - xold) / sigma;
            rank_mu += w(i) * y * y.transpose();
        }
        c = (1.0 - c1 - cmu) * c +
            c1 * (pc * pc.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * c) + cmu * rank_mu;
        sigma *= std::exp((cs / damps) * (ps.norm() / chi_n - 1.0));
        if (counteval - eigeneval > lam / (c1 + cmu) / n / 10.0) {
            eigeneval = counteval;
            c = (c + c.transpose()) / 2.0;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
            dd = es.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
            b = es.eigenvectors();
            invsqrt_c = b * dd.cwiseInverse().asDiagonal() * b.transpose();
        }
    }
    best.evals = counteval;
    return best;
}

}  // namespace

OptimizationReport optimize_prep(const HilbertSpace& space, const Vec& target, int depth,
                                 int restarts, std::uint64_t seed, long budget_per_restart,
                                 double target_fidelity) {
    DisplacementEngine engine(HilbertSpace{space.cavity_dim});
    auto objective = [&](const std::vector<double>& x) {
        return std::norm(target.dot(apply_ecd_circuit(engine, EcdCircuitParams::from_flat(depth, x))));
    };

    Rng rng(seed);
    OptimizationReport report;
    report.fidelity = -1.0;
    // a couple of wide probes, then warm restarts around the incumbent with a
    // shrinking perturbation radius (basin hopping)
    static const double anneal[] = {0.25, 0.18, 0.14, 0.10, 0.08, 0.06, 0.05, 0.04};
    const int n_anneal = int(sizeof(anneal) / sizeof(anneal[0]));
    const int n = 4 * depth;
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> x0(n);
        double sigma = 0.6;
        if (r < 2 || report.fidelity < 0) {
            for (int k = 0; k < 2 * depth; ++k) x0[k] = 0.7 * rng.normal();
            for (int k = 2 * depth; k < n; ++k) x0[k] = rng.uniform(-M_PI, M_PI);
        } else {
            const double p = anneal[std::min(r - 2, n_anneal - 1)];
            x0 = report.best.to_flat();
            for (double& v : x0) v += p * rng.normal();
            sigma = std::max(p, 0.08);
        }
        const CmaResult res = cmaes(objective, x0, sigma, budget_per_restart, rng);
        report.evaluations += res.evals;
        report.restarts_used = r + 1;
        if (res.f > report.fidelity) {
            report.fidelity = res.f;
            report.best = EcdCircuitParams::from_flat(depth, res.x);
        }
        report.best_trace.push_back(report.fidelity);
        if (report.fidelity >= target_fidelity) return report;
    }
    report.budget_exhausted = true;
    return report;
}

double reward_objective(const GkpCode& code, double epsilon, double ell, int n_rounds) {
    const HilbertSpace& sp = code.space;
    const int n = sp.cavity_dim;
    const int d = code.d;

    // gate-only round unitaries for the four frame values, with the tuned
    // (epsilon, ell) in place of the code's nominal amplitudes
    Mat units[4];
    double frame = 0.0;
    for (int j = 0; j < 4; ++j) {
        CircuitSchedule sch{sp, {}};
        sch.append(CircuitStep::rotate(-M_PI / 2.0, M_PI / 2.0));
        sch.append(CircuitStep::ecd(epsilon / 2.0));
        sch.append(CircuitStep::rotate(0.0, M_PI / 2.0));
        sch.append(CircuitStep::ecd(cx(0.0, -ell)));
        sch.append(CircuitStep::rotate(0.0, -M_PI / 2.0));
        sch.append(CircuitStep::ecd(epsilon / 2.0));
        units[j] = schedule_unitary(sch, frame);
        frame += frame_phase_increment(d, j);
    }

    const Vec& z0 = code.codewords[0];
    const LogicalBasis xb = pauli_eigenbasis(code, PauliLabel{1, 0, 1.0});
    const Vec& x1 = xb.states[std::min(1, d - 1)];

    double reward = 0.0;
    for (const Vec* psi : {&z0, &x1}) {
        Mat cav = (*psi) * psi->adjoint();
        Mat comp(2 * n, 2 * n);
        for (int j = 0; j < n_rounds; ++j) {
            comp.setZero();
            comp.block(0, 0, n, n) = cav;
            comp = units[j % 4] * comp * units[j % 4].adjoint();
            cav = partial_trace_ancilla(comp, sp);
        }
        reward += 0.5 * std::real(psi->dot(cav * (*psi)));
    }
    return reward;
}

}  // namespace gkpsim
