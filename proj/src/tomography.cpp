#include "gkpsim/tomography.hpp"

#include <cmath>

#include "gkpsim/channels.hpp"

#include <Eigen/Eigenvalues>

namespace gkpsim {

namespace {

// rank decomposition of rho shared across grid points; each point then costs
// O(rank N^2) through the displacement engine. The engine runs in a padded
// space: displacements truncated at the state's own dimension distort the
// phase-space values away from the origin (and make displaced parity
// rank-deficient as an observable family), so a guard band is required.
struct RankState {
    HilbertSpace padded;
    DisplacementEngine engine;
    std::vector<double> weights;
    std::vector<Vec> vectors;

    explicit RankState(const Mat& rho)
        : padded{2 * int(rho.rows()) + 32}, engine(padded) {
        Eigen::SelfAdjointEigenSolver<Mat> es(rho);
        for (int k = 0; k < rho.rows(); ++k) {
            const double w = es.eigenvalues()(k);
            if (std::abs(w) < 1e-12) continue;
            weights.push_back(w);
            Vec v = Vec::Zero(padded.cavity_dim);
            v.head(rho.rows()) = es.eigenvectors().col(k);
            vectors.push_back(std::move(v));
        }
    }

    double wigner(cx alpha) const {
        double sum = 0.0;
        for (size_t k = 0; k < weights.size(); ++k) {
            const Vec w = engine.apply(-alpha, vectors[k]);
            double par = 0.0;
            for (int m = 0; m < w.size(); ++m)
                par += (m % 2 == 0 ? 1.0 : -1.0) * std::norm(w(m));
            sum += weights[k] * par;
        }
        return sum;
    }

    cx cf(cx beta) const {
        cx sum = 0.0;
        for (size_t k = 0; k < weights.size(); ++k)
            sum += weights[k] * vectors[k].dot(engine.apply(beta, vectors[k]));
        return sum;
    }
};

}  // namespace

PhaseSpaceGrid wigner(const Mat& rho, const std::vector<double>& re_axis,
                      const std::vector<double>& im_axis) {
    RankState st(rho);
    PhaseSpaceGrid grid;
    grid.kind = PhaseSpaceGrid::Kind::Wigner;
    grid.re_axis = re_axis;
    grid.im_axis = im_axis;
    grid.values.resize(re_axis.size(), im_axis.size());
    for (size_t i = 0; i < re_axis.size(); ++i)
        for (size_t j = 0; j < im_axis.size(); ++j)
            grid.values(i, j) = st.wigner(cx(re_axis[i], im_axis[j]));
    return grid;
}

double wigner_point(const Mat& rho, cx alpha) {
    return RankState(rho).wigner(alpha);
}

std::pair<PhaseSpaceGrid, PhaseSpaceGrid> characteristic_function(
    const Mat& rho, const std::vector<double>& re_axis, const std::vector<double>& im_axis) {
    RankState st(rho);
    PhaseSpaceGrid re, im;
    re.kind = PhaseSpaceGrid::Kind::CfReal;
    im.kind = PhaseSpaceGrid::Kind::CfImag;
    re.re_axis = im.re_axis = re_axis;
    re.im_axis = im.im_axis = im_axis;
    re.values.resize(re_axis.size(), im_axis.size());
    im.values.resize(re_axis.size(), im_axis.size());
    for (size_t i = 0; i < re_axis.size(); ++i)
        for (size_t j = 0; j < im_axis.size(); ++j) {
            const cx v = st.cf(cx(re_axis[i], im_axis[j]));
            re.values(i, j) = v.real();
            im.values(i, j) = v.imag();
        }
    return {std::move(re), std::move(im)};
}

cx cf_point(const Mat& rho, cx beta) {
    return RankState(rho).cf(beta);
}

double photon_stats_from_cf_samples(double c0, double cxp, double cxm, double cyp, double cym,
                                    double h) {
    if (h > 0.05) throw GridTooCoarse("photon_stats_from_cf: need h <= 0.05");
    const double lap = (cxp + cxm + cyp + cym - 4.0 * c0) / (h * h);
    return -0.5 - 0.25 * lap;
}

double photon_stats_from_cf(const Mat& rho, double h) {
    if (h > 0.05) throw GridTooCoarse("photon_stats_from_cf: need h <= 0.05");
    RankState st(rho);
    return photon_stats_from_cf_samples(
        st.cf(0.0).real(), st.cf(cx(h, 0.0)).real(), st.cf(cx(-h, 0.0)).real(),
        st.cf(cx(0.0, h)).real(), st.cf(cx(0.0, -h)).real(), h);
}

DeltaEffFit fit_delta_eff(const std::vector<cx>& betas, const std::vector<double>& re_cf) {
    const size_t n = betas.size();
    if (n < 4 || re_cf.size() != n) throw FitDiverged("fit_delta_eff: need >= 4 samples");
    double ymax = re_cf[0], ymin = re_cf[0];
    for (double y : re_cf) {
        ymax = std::max(ymax, y);
        ymin = std::min(ymin, y);
    }
    double amp = ymax, off = 0.0, del = 0.3;
    // slope of log y vs |beta|^2 away from the origin for the width guess
    for (size_t k = 0; k < n; ++k) {
        const double r2 = std::norm(betas[k]);
        if (r2 > 1e-6 && re_cf[k] > 0.05 * ymax && ymax > 0) {
            del = std::sqrt(r2 / (2.0 * std::log(ymax / re_cf[k])));
            break;
        }
    }
    for (int it = 0; it < 300; ++it) {
        Eigen::MatrixXd jac(n, 3);
        Eigen::VectorXd r(n);
        for (size_t k = 0; k < n; ++k) {
            const double r2 = std::norm(betas[k]);
            const double e = std::exp(-r2 / (2.0 * del * del));
            r(k) = re_cf[k] - (amp * e + off);
            jac(k, 0) = e;
            jac(k, 1) = amp * e * r2 / (del * del * del);
            jac(k, 2) = 1.0;
        }
        Eigen::VectorXd step =
            (jac.transpose() * jac + 1e-12 * Eigen::MatrixXd::Identity(3, 3))
                .ldlt()
                .solve(jac.transpose() * r);
        if (!step.allFinite()) throw FitDiverged("fit_delta_eff: singular step");
        amp += step(0);
        // damp the width update so one bad linearization cannot collapse it
        del += std::clamp(step(1), -0.5 * del, 0.5 * del);
        off += step(2);
        if (step.cwiseAbs().maxCoeff() < 1e-12) break;
    }
    if (!(del > 0) || !std::isfinite(del)) throw FitDiverged("fit_delta_eff: diverged");
    return {del, amp, off};
}

DeltaEffFit fit_delta_eff(const Mat& rho, double radius) {
    RankState st(rho);
    if (radius <= 0) {
        const double nbar = std::max(
            0.0, photon_stats_from_cf_samples(st.cf(0.0).real(), st.cf(cx(0.02, 0)).real(),
                                              st.cf(cx(-0.02, 0)).real(), st.cf(cx(0, 0.02)).real(),
                                              st.cf(cx(0, -0.02)).real(), 0.02));
        // stay inside the central Gaussian peak; the next grid peak sits at
        // sqrt(pi/d) and would break the single-Gaussian model
        radius = 2.0 / std::sqrt(2.0 * nbar + 1.0);
    }
    std::vector<cx> betas;
    std::vector<double> vals;
    const int g = 9;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const cx b(radius * (2.0 * i / (g - 1.0) - 1.0), radius * (2.0 * j / (g - 1.0) - 1.0));
            if (std::abs(b) > radius) continue;
            betas.push_back(b);
            vals.push_back(st.cf(b).real());
        }
    return fit_delta_eff(betas, vals);
}

ReconstructionResult reconstruct_density_matrix(const std::vector<cx>& points,
                                                const std::vector<double>& wigner_values,
                                                const HilbertSpace& space) {
    const int n = space.cavity_dim;
    const size_t ns = points.size();
    if (wigner_values.size() != ns) throw DimensionMismatch("reconstruct_density_matrix");
    if (int(ns) < n * n)
        throw Underdetermined("reconstruct_density_matrix: need >= dim^2 samples");

    // real Hermitian parameterization: n diagonal + n(n-1) off-diagonal dofs.
    // The displaced-parity observables are evaluated in a guarded space and
    // restricted to the n x n corner: at the bare truncation the family has
    // an exact nullspace (whole coherence sectors become invisible).
    const int np = n * n;
    double rmax = 0.0;
    for (const cx& p : points) rmax = std::max(rmax, std::abs(p));
    const int big = std::max(2 * n + 32,
                             int(std::ceil((std::sqrt(double(n)) + rmax) *
                                           (std::sqrt(double(n)) + rmax))) + 16);
    const HilbertSpace guarded{big};
    Eigen::MatrixXd a(ns, np);
    Vec parity(big);
    for (int k = 0; k < big; ++k) parity(k) = (k % 2 == 0) ? 1.0 : -1.0;
    for (size_t s = 0; s < ns; ++s) {
        const Mat d = displacement(guarded, points[s]);
        const Mat m =
            Mat(d * parity.asDiagonal() * d.adjoint()).block(0, 0, n, n);  // Hermitian
        int col = 0;
        for (int i = 0; i < n; ++i) a(s, col++) = m(i, i).real();
        const double rt2 = std::sqrt(2.0);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                a(s, col++) = rt2 * m(j, i).real();
                a(s, col++) = -rt2 * m(j, i).imag();
            }
    }
    Eigen::Map<const Eigen::VectorXd> w(wigner_values.data(), ns);
    Eigen::VectorXd x = (a.transpose() * a + 1e-10 * Eigen::MatrixXd::Identity(np, np))
                            .ldlt()
                            .solve(a.transpose() * w);

    Mat rho = Mat::Zero(n, n);
    int col = 0;
    for (int i = 0; i < n; ++i) rho(i, i) = x(col++);
    const double rt2 = std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double re = x(col++) / rt2;
            const double im = x(col++) / rt2;
            rho(i, j) = cx(re, im);
            rho(j, i) = cx(re, -im);
        }

    // PSD projection by eigenvalue clipping, then trace renormalization
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const double tr = ev.sum();
    if (tr < 1e-12) throw Underdetermined("reconstruct_density_matrix: zero trace after clip");
    ev /= tr;
    Mat psd = es.eigenvectors() * ev.asDiagonal().toDenseMatrix().cast<cx>() *
              es.eigenvectors().adjoint();

    ReconstructionResult res;
    res.rho = psd;
    double ssr = 0.0;
    RankState st(psd);
    for (size_t s = 0; s < ns; ++s) {
        const double diff = st.wigner(points[s]) - wigner_values[s];
        ssr += diff * diff;
    }
    res.residual = std::sqrt(ssr / ns);
    return res;
}

}  // namespace gkpsim
