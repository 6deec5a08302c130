#include "gkpsim/fock.hpp"

#include <cmath>
#include <iostream>

#include <Eigen/Eigenvalues>

namespace gkpsim {

Mat annihilation(const HilbertSpace& space) {
    const int n = space.cavity_dim;
    if (n < 2) throw DimensionMismatch("annihilation: cavity_dim must be >= 2");
    Mat a = Mat::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

Mat number_operator(const HilbertSpace& space) {
    const int n = space.cavity_dim;
    Mat num = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) num(k, k) = double(k);
    return num;
}

std::pair<Mat, Mat> quadratures(const HilbertSpace& space) {
    const Mat a = annihilation(space);
    const Mat ad = a.adjoint();
    const double s = 1.0 / std::sqrt(2.0);
    Mat q = s * (a + ad);
    Mat p = cx(0.0, s) * (ad - a);
    return {std::move(q), std::move(p)};
}

Mat displacement(const HilbertSpace& space, cx alpha) {
    const int n = space.cavity_dim;
    if (alpha == cx(0.0, 0.0)) return Mat::Identity(n, n);
    // G = -i(alpha a† - alpha* a) is Hermitian; D = exp(iG) via eigensolve
    const Mat a = annihilation(space);
    Mat g = cx(0.0, -1.0) * (alpha * a.adjoint() - std::conj(alpha) * a);
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Eigen::VectorXd& w = es.eigenvalues();
    Vec phases(n);
    for (int k = 0; k < n; ++k) phases(k) = std::exp(cx(0.0, w(k)));
    Mat d = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    if (std::norm(alpha) > 0.25 * n) {
        double defect = unitarity_defect(d);
        if (defect > 1e-6)
            std::cerr << "gkpsim: displacement |alpha|=" << std::abs(alpha)
                      << " truncation defect " << defect << "\n";
    }
    return d;
}

Mat envelope(const HilbertSpace& space, double delta) {
    const int n = space.cavity_dim;
    Mat e = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) e(k, k) = std::exp(-delta * delta * k);
    return e;
}

Mat envelope_conjugate(const Mat& op, double delta) {
    const int n = int(op.rows());
    if (op.cols() != n) throw DimensionMismatch("envelope_conjugate: not square");
    Mat out(n, n);
    const double d2 = delta * delta;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = op(i, j) * std::exp(d2 * (j - i));
    if (!out.allFinite() || out.cwiseAbs().maxCoeff() > 1e12)
        throw OverflowError("envelope_conjugate: amplified entries exceed 1e12");
    return out;
}

Mat displacement_envelope_conjugate(const HilbertSpace& space, cx alpha, double delta) {
    const Mat a = annihilation(space);
    const double d2 = delta * delta;
    Mat g = alpha * std::exp(-d2) * a.adjoint() - std::conj(alpha) * std::exp(d2) * a;
    return matrix_exp(g);
}

Mat matrix_exp(const Mat& a) {
    // Pade-13 scaling and squaring (Higham 2005 coefficients)
    if (a.rows() != a.cols()) throw DimensionMismatch("matrix_exp: not square");
    if (!a.allFinite()) throw ConvergenceError("matrix_exp: non-finite input");
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const int n = int(a.rows());
    const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    int s = 0;
    const double theta13 = 5.371920351148152;
    if (nrm > theta13) s = int(std::ceil(std::log2(nrm / theta13)));
    Mat x = a / std::pow(2.0, s);
    const Mat x2 = x * x;
    const Mat x4 = x2 * x2;
    const Mat x6 = x4 * x2;
    const Mat id = Mat::Identity(n, n);
    Mat u = x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) +
                 b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
    Mat v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) +
            b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
    Mat r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < s; ++k) r = r * r;
    if (!r.allFinite()) throw ConvergenceError("matrix_exp: result diverged");
    return r;
}

std::pair<double, Vec> ground_state(const Mat& h) {
    if (hermiticity_defect(h) > 1e-9) throw NonHermitianError("ground_state: input not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec v = es.eigenvectors().col(0);
    v.normalize();
    return {es.eigenvalues()(0), std::move(v)};
}

std::pair<cx, Vec> lowest_real_eigenpair(const Mat& m) {
    Eigen::ComplexEigenSolver<Mat> es(m);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("lowest_real_eigenpair: eigensolver failed");
    int best = 0;
    for (int k = 1; k < m.rows(); ++k)
        if (es.eigenvalues()(k).real() < es.eigenvalues()(best).real()) best = k;
    Vec v = es.eigenvectors().col(best);
    v.normalize();
    return {es.eigenvalues()(best), std::move(v)};
}

Mat embed(const Mat& op, Subsystem which, const HilbertSpace& space) {
    const int n = space.cavity_dim;
    const int t = space.total_dim();
    Mat out = Mat::Zero(t, t);
    if (which == Subsystem::Cavity) {
        if (op.rows() != n) throw DimensionMismatch("embed: cavity operator size");
        out.block(0, 0, n, n) = op;
        out.block(n, n, n, n) = op;
    } else {
        if (op.rows() != 2) throw DimensionMismatch("embed: ancilla operator size");
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.block(i * n, j * n, n, n) = op(i, j) * Mat::Identity(n, n);
    }
    return out;
}

Mat partial_trace_ancilla(const Mat& rho, const HilbertSpace& space) {
    const int n = space.cavity_dim;
    if (rho.rows() != space.total_dim()) throw DimensionMismatch("partial_trace_ancilla");
    return rho.block(0, 0, n, n) + rho.block(n, n, n, n);
}

Eigen::Matrix2cd partial_trace_cavity(const Mat& rho, const HilbertSpace& space) {
    const int n = space.cavity_dim;
    if (rho.rows() != space.total_dim()) throw DimensionMismatch("partial_trace_cavity");
    Eigen::Matrix2cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out(i, j) = rho.block(i * n, j * n, n, n).trace();
    return out;
}

cx expectation(const Mat& rho, const Mat& op) {
    if (rho.rows() != op.rows()) throw DimensionMismatch("expectation");
    return (rho * op).trace();
}

cx expectation(const Vec& psi, const Mat& op) {
    if (psi.size() != op.rows()) throw DimensionMismatch("expectation");
    return psi.dot(op * psi);  // Eigen dot conjugates the left argument
}

double state_fidelity(const Mat& rho, const Vec& psi) {
    if (rho.rows() != psi.size()) throw DimensionMismatch("state_fidelity");
    return std::real(psi.dot(rho * psi));
}

double state_fidelity(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("state_fidelity");
    return std::norm(a.dot(b));
}

double unitarity_defect(const Mat& u) {
    Mat d = u.adjoint() * u - Mat::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const Mat& a) {
    Mat d = a - a.adjoint();
    return d.cwiseAbs().maxCoeff();
}

DisplacementEngine::DisplacementEngine(const HilbertSpace& space) : n_(space.cavity_dim) {
    const Mat a = annihilation(space);
    const Mat ad = a.adjoint();
    Mat ga = cx(0.0, -1.0) * (ad - a);
    Mat gb = ad + a;
    Eigen::SelfAdjointEigenSolver<Mat> ea(ga), eb(gb);
    la_ = ea.eigenvalues();
    va_ = ea.eigenvectors();
    lb_ = eb.eigenvalues();
    vb_ = eb.eigenvectors();
}

Vec DisplacementEngine::apply(cx alpha, const Vec& psi) const {
    if (psi.size() != n_) throw DimensionMismatch("DisplacementEngine::apply");
    const double x = alpha.real(), y = alpha.imag();
    Vec out = vb_.adjoint() * psi;
    for (int k = 0; k < n_; ++k) out(k) *= std::exp(cx(0.0, y * lb_(k)));
    out = vb_ * out;
    out = va_.adjoint() * out;
    for (int k = 0; k < n_; ++k) out(k) *= std::exp(cx(0.0, x * la_(k)));
    out = va_ * out;
    return std::exp(cx(0.0, x * y)) * out;
}

}  // namespace gkpsim
