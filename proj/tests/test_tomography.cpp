#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gkpsim/tomography.hpp"

using namespace gkpsim;

namespace {

Mat coherent_dm(const HilbertSpace& sp, cx alpha) {
    Vec vac = Vec::Zero(sp.cavity_dim);
    vac(0) = 1.0;
    Vec coh = displacement(sp, alpha) * vac;
    return coh * coh.adjoint();
}

}  // namespace

TEST_CASE("wigner of fock states") {
    HilbertSpace sp{40};
    Mat vac = Mat::Zero(40, 40);
    vac(0, 0) = 1.0;
    CHECK(wigner_point(vac, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // W(alpha) of vacuum is a Gaussian e^{-2|alpha|^2}
    CHECK(wigner_point(vac, cx(0.5, -0.3)) ==
          doctest::Approx(std::exp(-2.0 * (0.25 + 0.09))).epsilon(1e-9));

    Mat one = Mat::Zero(40, 40);
    one(1, 1) = 1.0;
    CHECK(wigner_point(one, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));

    PhaseSpaceGrid g = wigner(vac, {-1.0, 0.0, 1.0}, {0.0, 0.5});
    CHECK(g.kind == PhaseSpaceGrid::Kind::Wigner);
    CHECK(g.values.rows() == 3);
    CHECK(g.values.cols() == 2);
    CHECK(g.values(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.values(0, 1) == doctest::Approx(wigner_point(vac, cx(-1.0, 0.5))).epsilon(1e-12));
}

TEST_CASE("characteristic function invariants") {
    HilbertSpace sp{60};
    Mat rho = coherent_dm(sp, cx(0.8, 0.2));
    CHECK(std::abs(cf_point(rho, 0.0) - 1.0) < 1e-12);
    // C(-beta) = C(beta)^* for Hermitian rho
    cx b(0.4, -0.7);
    CHECK(std::abs(cf_point(rho, -b) - std::conj(cf_point(rho, b))) < 1e-12);
    // coherent-state CF oracle: e^{-|b|^2/2} e^{2i Im(b conj(alpha))}
    cx alpha(0.8, 0.2);
    cx want = std::exp(-std::norm(b) / 2.0) * std::exp(cx(0.0, 2.0 * std::imag(b * std::conj(alpha))));
    CHECK(std::abs(cf_point(rho, b) - want) < 1e-9);

    auto [re, im] = characteristic_function(rho, {0.0, 0.4}, {-0.7, 0.0});
    CHECK(re.kind == PhaseSpaceGrid::Kind::CfReal);
    CHECK(im.kind == PhaseSpaceGrid::Kind::CfImag);
    CHECK(re.values(1, 0) == doctest::Approx(std::real(cf_point(rho, b))).epsilon(1e-12));
    CHECK(im.values(1, 0) == doctest::Approx(std::imag(cf_point(rho, b))).epsilon(1e-12));
}

TEST_CASE("photon statistics from cf curvature") {
    HilbertSpace sp{60};
    for (double a : {0.0, 1.0, 1.5}) {
        Mat rho = coherent_dm(sp, a);
        CHECK(photon_stats_from_cf(rho) == doctest::Approx(a * a).epsilon(1e-3));
    }
    // finite-difference curvature has O(h^2) bias, larger for excited states
    Mat two = Mat::Zero(60, 60);
    two(2, 2) = 1.0;
    CHECK(photon_stats_from_cf(two) == doctest::Approx(2.0).epsilon(1e-3));

    CHECK_THROWS_AS(photon_stats_from_cf(coherent_dm(sp, 1.0), 0.2), GridTooCoarse);

    // sample-based variant on an exact thermal CF e^{-(nbar+1/2)|b|^2}
    const double nbar = 3.7, h = 0.02;
    const double c = std::exp(-(nbar + 0.5) * h * h);
    CHECK(photon_stats_from_cf_samples(1.0, c, c, c, c, h) ==
          doctest::Approx(nbar).epsilon(1e-3));
}

TEST_CASE("effective envelope fit") {
    // synthetic Gaussian CF with known width
    const double delta = 0.29;
    std::vector<cx> betas;
    std::vector<double> vals;
    for (int i = -6; i <= 6; ++i)
        for (int j = -6; j <= 6; ++j) {
            cx b(0.08 * i, 0.08 * j);
            betas.push_back(b);
            vals.push_back(std::exp(-std::norm(b) / (2.0 * delta * delta)));
        }
    DeltaEffFit fit = fit_delta_eff(betas, vals);
    CHECK(fit.delta_eff == doctest::Approx(delta).epsilon(1e-3 / delta));
    CHECK(fit.amplitude == doctest::Approx(1.0).epsilon(1e-3));

    // state-based overload on a squeezed-vacuum-free sanity case: vacuum has
    // CF e^{-|b|^2/2}, so delta_eff = 1
    HilbertSpace sp{40};
    Mat vac = Mat::Zero(40, 40);
    vac(0, 0) = 1.0;
    DeltaEffFit vfit = fit_delta_eff(vac);
    CHECK(vfit.delta_eff == doctest::Approx(1.0).epsilon(0.02));

    // thermal state: CF is exactly Gaussian with delta_eff = 1/sqrt(2 nbar + 1)
    const double nbar = 4.0;
    HilbertSpace tsp{80};
    Mat th = Mat::Zero(80, 80);
    double norm = 0.0;
    for (int k = 0; k < 80; ++k) {
        th(k, k) = std::pow(nbar / (nbar + 1.0), k) / (nbar + 1.0);
        norm += th(k, k).real();
    }
    th /= norm;
    DeltaEffFit tfit = fit_delta_eff(th);
    CHECK(tfit.delta_eff == doctest::Approx(1.0 / std::sqrt(2.0 * nbar + 1.0)).epsilon(0.01));
    CHECK(photon_stats_from_cf(th) == doctest::Approx(nbar).epsilon(1e-3));
}

TEST_CASE("density matrix reconstruction") {
    HilbertSpace sp{12};
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    // random low-energy pure state
    Vec psi = envelope(sp, 0.6) * Vec::NullaryExpr(12, [&](int) { return cx(g(rng), g(rng)); });
    psi.normalize();
    Mat rho = psi * psi.adjoint();

    // grid must cover the state's phase-space extent (~sqrt(dim)) and sample
    // densely enough that 1% noise stays well conditioned
    std::vector<cx> pts;
    std::vector<double> w;
    for (int i = -17; i <= 17; ++i)
        for (int j = -17; j <= 17; ++j) {
            cx a(0.25 * i, 0.25 * j);
            pts.push_back(a);
            w.push_back(wigner_point(rho, a));
        }

    ReconstructionResult rec = reconstruct_density_matrix(pts, w, sp);
    CHECK(std::abs(rec.rho.trace().real() - 1.0) < 1e-8);
    CHECK(state_fidelity(rec.rho, psi) > 0.99);

    // 1% measurement noise still reconstructs well
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> wn = w;
    for (double& v : wn) v += noise(rng);
    ReconstructionResult noisy = reconstruct_density_matrix(pts, wn, sp);
    CHECK(state_fidelity(noisy.rho, psi) > 0.95);
    CHECK(noisy.residual > 0.0);

    // too few samples for the space dimension
    std::vector<cx> few(pts.begin(), pts.begin() + 50);
    std::vector<double> feww(w.begin(), w.begin() + 50);
    CHECK_THROWS_AS(reconstruct_density_matrix(few, feww, sp), Underdetermined);
}
