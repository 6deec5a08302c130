#pragma once

// Phase-space diagnostics: Wigner and characteristic functions on grids,
// photon statistics from CF curvature, effective-envelope Gaussian fits, and
// density-matrix reconstruction from Wigner samples.

#include <string>
#include <vector>

#include "gkpsim/fock.hpp"

namespace gkpsim {

struct GridTooCoarse : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Underdetermined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhaseSpaceGrid {
    enum class Kind { Wigner, CfReal, CfImag };
    Kind kind = Kind::Wigner;
    std::vector<double> re_axis;
    std::vector<double> im_axis;
    Eigen::MatrixXd values;  // values(i, j) at re_axis[i] + i*im_axis[j]
};

// W(alpha) = <D(alpha) P D(-alpha)> in the bare parity-expectation
// normalization, range [-1, 1]. Cavity-space rho.
PhaseSpaceGrid wigner(const Mat& rho, const std::vector<double>& re_axis,
                      const std::vector<double>& im_axis);
double wigner_point(const Mat& rho, cx alpha);

// C(beta) = <D(beta)>; returns the real and imaginary grids.
std::pair<PhaseSpaceGrid, PhaseSpaceGrid> characteristic_function(
    const Mat& rho, const std::vector<double>& re_axis, const std::vector<double>& im_axis);
cx cf_point(const Mat& rho, cx beta);

// <a†a> = -1/2 - (1/4)[d²C/dx² + d²C/dy²] at the origin by central
// differences on a 5-point cross of spacing h (h <= 0.05 enforced).
double photon_stats_from_cf(const Mat& rho, double h = 0.02);
// Same estimator applied to externally supplied CF values at
// {0, ±h, ±ih} = {c0, cxp, cxm, cyp, cym}.
double photon_stats_from_cf_samples(double c0, double cxp, double cxm, double cyp, double cym,
                                    double h);

struct DeltaEffFit {
    double delta_eff = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
};

// Fit Re C(beta) = A exp(-|beta|²/(2 delta_eff²)) + B near the origin by
// Gauss-Newton least squares.
DeltaEffFit fit_delta_eff(const std::vector<cx>& betas, const std::vector<double>& re_cf);
DeltaEffFit fit_delta_eff(const Mat& rho, double radius = -1.0);

// Regularized linear inversion of Wigner samples, then eigenvalue clipping
// to the PSD trace-one cone. Needs at least dim² informative samples.
struct ReconstructionResult {
    Mat rho;
    double residual = 0.0;  // rms misfit of the PSD-projected state
};
ReconstructionResult reconstruct_density_matrix(const std::vector<cx>& points,
                                                const std::vector<double>& wigner_values,
                                                const HilbertSpace& space);

}  // namespace gkpsim
