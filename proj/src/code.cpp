#include "gkpsim/code.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace gkpsim {

cx omega(int d) {
    return std::exp(cx(0.0, 2.0 * M_PI / d));
}

static cx sqrt_omega(int d) {
    return std::exp(cx(0.0, M_PI / d));
}

std::vector<PauliLabel> measurement_pauli_set(int d) {
    switch (d) {
        case 2:
            return {{1, 0, 1.0}, {0, 1, 1.0}, {1, 1, sqrt_omega(2)}};
        case 3:
            return {{1, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}, {2, 1, 1.0}};
        case 4:
            return {{1, 0, 1.0},          {0, 1, 1.0}, {1, 1, sqrt_omega(4)},
                    {2, 1, 1.0},          {3, 1, sqrt_omega(4)}, {1, 2, 1.0}};
        default:
            throw WrongDimension("measurement_pauli_set: d must be 2, 3 or 4");
    }
}

bool parity_basis_required(int d) {
    return d == 4;
}

std::string pauli_name(int d, const PauliLabel& label) {
    std::string s;
    if (std::abs(label.phase - sqrt_omega(d)) < 1e-9) s += "sqw";
    auto pow = [&](const char* base, int k) {
        if (k == 0) return std::string();
        std::string r(base);
        if (k > 1) r += std::to_string(k);
        return r;
    };
    s += pow("X", ((label.n % d) + d) % d);
    s += pow("Z", ((label.m % d) + d) % d);
    if (s.empty() || s == "sqw") s += "I";
    return s;
}

Eigen::MatrixXcd weyl_matrix(int d, const PauliLabel& label) {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) x((k + 1) % d, k) = 1.0;
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) z(k, k) = std::pow(omega(d), k);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
    for (int k = 0; k < ((label.n % d) + d) % d; ++k) u = x * u;
    for (int k = 0; k < ((label.m % d) + d) % d; ++k) u = u * z;
    return label.phase * u;
}

Eigen::MatrixXcd logical_eigenvectors(int d, const PauliLabel& label) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(weyl_matrix(d, label));
    Eigen::MatrixXcd out(d, d);
    std::vector<bool> used(d, false);
    for (int n = 0; n < d; ++n) {
        const cx target = std::pow(omega(d), n);
        int best = -1;
        double bestdist = 1e9;
        for (int k = 0; k < d; ++k) {
            if (used[k]) continue;
            double dist = std::abs(es.eigenvalues()(k) - target);
            if (dist < bestdist) {
                bestdist = dist;
                best = k;
            }
        }
        if (best < 0 || bestdist > 1e-6)
            throw DegenerateSpectrumError("logical_eigenvectors: spectrum is not {omega^n}");
        used[best] = true;
        Vec v = es.eigenvectors().col(best);
        for (int k = 0; k < d; ++k) {
            if (std::abs(v(k)) > 1e-9) {
                v *= std::abs(v(k)) / v(k);
                break;
            }
        }
        out.col(n) = v.normalized();
    }
    return out;
}

Eigen::MatrixXcd parity_eigenvectors() {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(4, 4);
    const double s = 1.0 / std::sqrt(2.0);
    out(0, 0) = s; out(2, 0) = s;    // (+,0)
    out(0, 1) = s; out(2, 1) = -s;   // (-,0)
    out(1, 2) = s; out(3, 2) = s;    // (+,1)
    out(1, 3) = s; out(3, 3) = -s;   // (-,1)
    return out;
}

GkpCode build_code(int d, double delta, const HilbertSpace& space) {
    if (d < 1 || d > 4) throw WrongDimension("build_code: d must be 1..4");
    const int n = space.cavity_dim;
    const double ell = std::sqrt(M_PI * d);
    const double lam = std::sqrt(M_PI / d);

    const Mat sx = displacement_envelope_conjugate(space, ell, delta);
    const Mat sxm = displacement_envelope_conjugate(space, -ell, delta);
    const Mat sz = displacement_envelope_conjugate(space, cx(0.0, ell), delta);
    const Mat szm = displacement_envelope_conjugate(space, cx(0.0, -ell), delta);
    const Mat lz = displacement_envelope_conjugate(space, cx(0.0, lam), delta);
    const Mat lzm = displacement_envelope_conjugate(space, cx(0.0, -lam), delta);
    Mat h = -0.5 * (sx + sxm) - 0.5 * (sz + szm) - double(d) * (lz + lzm);

    auto phase_fix = [](Vec& v) {
        int k = 0;
        for (int i = 1; i < v.size(); ++i)
            if (std::abs(v(i)) > std::abs(v(k))) k = i;
        if (std::abs(v(k)) > 0) v *= std::abs(v(k)) / v(k);
    };
    auto tail_check = [&](const Vec& v) {
        double tail = 0.0;
        for (int i = std::max(0, n - 10); i < n; ++i) tail += std::norm(v(i));
        if (tail > 1e-6) throw TruncationError("build_code: codeword tail weight above N-10 exceeds 1e-6");
    };

    GkpCode code;
    code.d = d;
    code.delta = delta;
    code.space = space;
    code.ell = ell;

    auto [e0, v0] = lowest_real_eigenpair(h);
    (void)e0;
    phase_fix(v0);
    tail_check(v0);
    code.codewords.push_back(v0);
    const Mat lx = displacement_envelope_conjugate(space, lam, delta);
    for (int k = 1; k < d; ++k) {
        Vec w = lx * code.codewords.back();
        w.normalize();
        phase_fix(w);
        tail_check(w);
        code.codewords.push_back(std::move(w));
    }

    // gauge: rotate each codeword so <Z_k|D(lambda)|Z_{k-1}> is real positive,
    // otherwise superpositions built from the abstract Weyl coefficients are
    // not eigenstates of the physical displacement operators
    const Mat dlam = displacement(space, lam);
    for (int k = 1; k < d; ++k) {
        const cx c = code.codewords[k].dot(dlam * code.codewords[k - 1]);
        if (std::abs(c) > 1e-15) code.codewords[k] *= c / std::abs(c);
    }

    code.stab_x = displacement(space, ell);
    code.stab_z = displacement(space, cx(0.0, ell));
    code.logical_x = displacement(space, lam);
    code.logical_z = displacement(space, cx(0.0, lam));
    return code;
}

Mat pauli_operator(const GkpCode& code, const PauliLabel& label) {
    const int d = code.d;
    const int n = ((label.n % d) + d) % d;
    const int m = ((label.m % d) + d) % d;
    if (n == 0 && m == 0)
        return label.phase * Mat::Identity(code.space.cavity_dim, code.space.cavity_dim);
    const double lam = std::sqrt(M_PI / d);
    const cx geo = std::exp(cx(0.0, -double(n) * m * M_PI / d));
    return label.phase * geo * displacement(code.space, cx(n * lam, m * lam));
}

LogicalBasis pauli_eigenbasis(const GkpCode& code, const PauliLabel& label) {
    const int d = code.d;
    const Eigen::MatrixXcd coef = logical_eigenvectors(d, label);
    LogicalBasis basis;
    basis.kind = LogicalBasis::Kind::Pauli;
    basis.label = label;
    for (int n = 0; n < d; ++n) {
        Vec s = Vec::Zero(code.space.cavity_dim);
        for (int k = 0; k < d; ++k) s += coef(k, n) * code.codewords[k];
        s.normalize();
        basis.states.push_back(std::move(s));
        basis.eigenvalues.push_back(std::pow(omega(d), n));
        basis.state_names.push_back(pauli_name(d, label) + "_" + std::to_string(n));
    }
    return basis;
}

LogicalBasis parity_basis(const GkpCode& code) {
    if (code.d != 4) throw WrongDimension("parity_basis: requires d = 4");
    const Eigen::MatrixXcd coef = parity_eigenvectors();
    LogicalBasis basis;
    basis.kind = LogicalBasis::Kind::Parity;
    static const char* names[] = {"par_p0", "par_m0", "par_p1", "par_m1"};
    static const double eig[] = {1.0, -1.0, 1.0, -1.0};
    for (int n = 0; n < 4; ++n) {
        Vec s = Vec::Zero(code.space.cavity_dim);
        for (int k = 0; k < 4; ++k) s += coef(k, n) * code.codewords[k];
        s.normalize();
        basis.states.push_back(std::move(s));
        basis.eigenvalues.push_back(eig[n]);
        basis.state_names.push_back(names[n]);
    }
    return basis;
}

Mat maximally_mixed(const GkpCode& code) {
    const int n = code.space.cavity_dim;
    Mat rho = Mat::Zero(n, n);
    for (const Vec& w : code.codewords) rho += w * w.adjoint();
    return rho / double(code.d);
}

}  // namespace gkpsim
