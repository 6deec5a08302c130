#include "gkpsim/channels.hpp"

#include <cmath>
#include <iostream>

namespace gkpsim {

KrausChannel::KrausChannel(std::vector<Mat> kraus, double dt_us, double tol)
    : ops(std::move(kraus)), dt(dt_us) {
    if (ops.empty()) throw IncompleteTable("KrausChannel: no operators");
    const double defect = completeness_defect();
    if (defect > tol)
        throw StepTooLarge("KrausChannel: completeness defect " + std::to_string(defect));
}

Mat KrausChannel::apply(const Mat& rho) const {
    Mat out = Mat::Zero(rho.rows(), rho.cols());
    for (const Mat& k : ops) out += k * rho * k.adjoint();
    return out;
}

double KrausChannel::completeness_defect() const {
    Mat s = Mat::Zero(ops[0].rows(), ops[0].cols());
    for (const Mat& k : ops) s += k.adjoint() * k;
    s -= Mat::Identity(s.rows(), s.cols());
    return s.cwiseAbs().maxCoeff();
}

NoiseModel NoiseModel::paper_device() {
    return NoiseModel{};
}

NoiseModel NoiseModel::none() {
    NoiseModel m;
    m.kappa1c = m.kappa_phi_c = m.kappa1q = m.kappa_phi_q = m.n_th = 0.0;
    return m;
}

KrausChannel cavity_idle_kraus(const NoiseModel& model, double dt, const HilbertSpace& space) {
    const int n = space.cavity_dim;
    if (model.kappa1c * dt > 0.05 || model.kappa_phi_c * dt > 0.05)
        std::cerr << "gkpsim: cavity_idle_kraus step " << dt << " us is large for the rates\n";
    const Mat a = annihilation(space);
    const Mat num = number_operator(space);
    Mat k0 = Mat::Identity(n, n) - (model.kappa1c * dt / 2.0) * num -
             model.kappa_phi_c * dt * num * num;
    Mat k1 = std::sqrt(model.kappa1c * dt) * a;
    Mat k2 = std::sqrt(2.0 * model.kappa_phi_c * dt) * num;
    // first-order completeness only; the defect grows like (dt n^2)^2 at the
    // truncation edge, so the tolerance scales with the worst diagonal term
    const double worst = model.kappa1c * dt * (n - 1) / 2.0 +
                         model.kappa_phi_c * dt * double(n - 1) * (n - 1);
    const double tol = std::max(1e-9, 4.0 * worst * worst);
    return KrausChannel({std::move(k0), std::move(k1), std::move(k2)}, dt, tol);
}

std::function<Mat(const Mat&)> depolarizing_channel(int d, double gamma, double t) {
    const double w = std::exp(-gamma * t);
    return [d, w](const Mat& rho) -> Mat {
        return w * rho + (1.0 - w) * rho.trace() / double(d) * Mat::Identity(d, d);
    };
}

static std::vector<Eigen::MatrixXcd> weyl_basis(int d) {
    std::vector<Eigen::MatrixXcd> basis;
    for (int n = 0; n < d; ++n)
        for (int m = 0; m < d; ++m) basis.push_back(weyl_matrix(d, {n, m, 1.0}));
    return basis;
}

double average_channel_fidelity(const std::function<Mat(const Mat&)>& channel, int d) {
    cx s = 0.0;
    for (const Eigen::MatrixXcd& u : weyl_basis(d)) s += (u.adjoint() * channel(u)).trace();
    return 1.0 / (d + 1.0) + std::real(s) / (double(d) * d * (d + 1.0));
}

static size_t expected_table_size(int d) {
    switch (d) {
        case 2: return 6;
        case 3: return 12;
        case 4: return 28;  // 6 Paulis x 4 states + 4 parity states
        default: throw UnsupportedDimension("expected d in {2,3,4}");
    }
}

double decomposed_fidelity(const std::vector<double>& survival_probs, int d) {
    if (survival_probs.size() != expected_table_size(d))
        throw IncompleteTable("decomposed_fidelity: wrong table size");
    double pauli = 0.0;
    for (size_t k = 0; k < (d == 4 ? 24u : survival_probs.size()); ++k)
        pauli += survival_probs[k];
    if (d == 2) return pauli / 6.0;
    if (d == 3) return pauli / 12.0;
    double parity = 0.0;
    for (size_t k = 24; k < 28; ++k) parity += survival_probs[k];
    return (pauli - parity) / 20.0;
}

double effective_rate_from_decays(const std::vector<double>& gamma_table, int d) {
    if (gamma_table.size() != expected_table_size(d))
        throw IncompleteTable("effective_rate_from_decays: wrong table size");
    double pauli = 0.0;
    for (size_t k = 0; k < (d == 4 ? 24u : gamma_table.size()); ++k) pauli += gamma_table[k];
    if (d == 2) return pauli / 6.0;
    if (d == 3) return pauli / 12.0;
    double parity = 0.0;
    for (size_t k = 24; k < 28; ++k) parity += gamma_table[k];
    return (pauli - parity) / 20.0;
}

double fock_qudit_rate(int d, double kappa1c, double kappa_phi_c) {
    switch (d) {
        case 2: return (2.0 / 3.0) * kappa1c + (2.0 / 3.0) * kappa_phi_c;
        case 3: return (9.0 / 8.0) * kappa1c + (3.0 / 2.0) * kappa_phi_c;
        case 4: return (8.0 / 5.0) * kappa1c + (8.0 / 3.0) * kappa_phi_c;
        default: throw UnsupportedDimension("fock_qudit_rate: d must be 2, 3 or 4");
    }
}

double short_time_rate(const std::function<std::function<Mat(const Mat&)>(double)>& channel_at,
                       int d, double dt0) {
    constexpr int levels = 4;
    double dts[levels], g[levels];
    for (int k = 0; k < levels; ++k) {
        const double dt = dt0 / std::pow(2.0, k);
        const double f = average_channel_fidelity(channel_at(dt), d);
        dts[k] = dt;
        g[k] = (1.0 - f) / ((d - 1.0) / d * dt);
    }
    // Neville polynomial extrapolation to dt = 0
    double p[levels];
    std::copy(g, g + levels, p);
    for (int j = 1; j < levels; ++j)
        for (int k = 0; k < levels - j; ++k)
            p[k] = (dts[k] * p[k + 1] - dts[k + j] * p[k]) / (dts[k] - dts[k + j]);
    const double gamma = p[0];
    if (gamma > 0 && std::abs(g[0] - gamma) > 0.5 * std::abs(gamma))
        throw NonlinearRegime("short_time_rate: quadratic term dominates at dt0");
    return gamma;
}

double qec_gain(double gamma_physical, double gamma_logical) {
    if (gamma_physical <= 0 || gamma_logical <= 0)
        throw std::invalid_argument("qec_gain: rates must be positive");
    return gamma_physical / gamma_logical;
}

DecayFit fit_exponential(const std::vector<double>& t_us, const std::vector<double>& p, int d,
                         bool free_offset) {
    const size_t n = t_us.size();
    if (n < 5 || p.size() != n) throw FitDiverged("fit_exponential: need >= 5 points");
    const double off0 = 1.0 / d;

    // flat-curve detection
    double dev = 0.0;
    for (double v : p) dev = std::max(dev, std::abs(v - off0));
    if (dev < 1e-3) {
        DecayFit flat;
        flat.offset = off0;
        flat.degenerate = true;
        return flat;
    }

    // log-linear initial guess on points above the offset
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (size_t k = 0; k < n; ++k) {
        const double y = p[k] - off0;
        if (y <= 1e-6) continue;
        const double ly = std::log(y);
        sx += t_us[k]; sy += ly; sxx += t_us[k] * t_us[k]; sxy += t_us[k] * ly;
        ++cnt;
    }
    double gamma = 1e-4, amp = 1.0 - off0;
    if (cnt >= 2 && cnt * sxx - sx * sx > 1e-12) {
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        const double inter = (sy - slope * sx) / cnt;
        gamma = std::max(1e-8, -slope);
        amp = std::exp(inter);
    }
    double off = off0;

    // Gauss-Newton on (amp, gamma[, off])
    const int np = free_offset ? 3 : 2;
    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd jac(n, np);
        Eigen::VectorXd r(n);
        for (size_t k = 0; k < n; ++k) {
            const double e = std::exp(-gamma * t_us[k]);
            r(k) = p[k] - (amp * e + off);
            jac(k, 0) = e;
            jac(k, 1) = -amp * t_us[k] * e;
            if (np == 3) jac(k, 2) = 1.0;
        }
        Eigen::VectorXd step = (jac.transpose() * jac)
                                   .ldlt()
                                   .solve(jac.transpose() * r);
        if (!step.allFinite()) throw FitDiverged("fit_exponential: singular normal equations");
        amp += step(0);
        gamma += step(1);
        if (np == 3) off += step(2);
        if (gamma <= 0) gamma = 1e-10;
        if (step.cwiseAbs().maxCoeff() < 1e-14) break;
    }

    DecayFit fit;
    fit.amplitude = amp;
    fit.gamma = gamma;
    fit.offset = off;
    // first-order covariance from the final Jacobian
    Eigen::MatrixXd jac(n, np);
    double ssr = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double e = std::exp(-gamma * t_us[k]);
        const double res = p[k] - (amp * e + off);
        ssr += res * res;
        jac(k, 0) = e;
        jac(k, 1) = -amp * t_us[k] * e;
        if (np == 3) jac(k, 2) = 1.0;
    }
    const double dof = std::max<double>(1.0, double(n) - np);
    Eigen::MatrixXd cov = (jac.transpose() * jac).inverse() * (ssr / dof);
    fit.gamma_err = std::sqrt(std::max(0.0, cov(1, 1)));
    if (!(fit.gamma > 0) || !std::isfinite(fit.gamma))
        throw FitDiverged("fit_exponential: non-positive rate");
    return fit;
}

}  // namespace gkpsim
