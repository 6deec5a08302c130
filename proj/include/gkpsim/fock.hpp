#pragma once

// Truncated-Fock-space linear algebra: ladder operators, displacements,
// Gaussian envelopes, matrix functions, spectral solves, and helpers for the
// composite (ancilla ⊗ cavity) space.
//
// Conventions fixed across the library:
//   - composite basis ordering is |ancilla⟩⊗|cavity⟩ with |g⟩ -> index 0,
//     i.e. composite index = a*N + n for ancilla level a and Fock level n
//   - sigma_z = diag(+1, -1) in the (g, e) ordering

#include <complex>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace gkpsim {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonHermitianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HilbertSpace {
    int cavity_dim = 0;                 // Fock truncation N
    static constexpr int ancilla_dim = 2;
    int total_dim() const { return ancilla_dim * cavity_dim; }
    bool operator==(const HilbertSpace&) const = default;
};

enum class Subsystem { Cavity, Ancilla };

// ladder / quadrature / number operators on the cavity space
Mat annihilation(const HilbertSpace& space);
Mat number_operator(const HilbertSpace& space);
std::pair<Mat, Mat> quadratures(const HilbertSpace& space);  // (q, p)

// D(alpha) = exp(alpha a† - alpha* a), built from the spectral decomposition
// of the Hermitian generator (independent of matrix_exp). Emits a warning on
// stderr when the truncation makes the result visibly non-unitary.
Mat displacement(const HilbertSpace& space, cx alpha);

// E_Delta = exp(-Delta^2 a†a), diagonal
Mat envelope(const HilbertSpace& space, double delta);

// E_Delta O E_Delta^{-1} by explicit diagonal conjugation. Throws
// OverflowError when the e^{Delta^2 n} amplification blows up the result.
Mat envelope_conjugate(const Mat& op, double delta);

// E_Delta D(alpha) E_Delta^{-1} = exp(alpha e^{-Δ²} a† - alpha* e^{Δ²} a),
// evaluated through the conjugated generator (stable at any truncation).
Mat displacement_envelope_conjugate(const HilbertSpace& space, cx alpha, double delta);

// Padé-13 scaling-and-squaring exponential
Mat matrix_exp(const Mat& a);

// Lowest eigenpair of a Hermitian matrix (deterministic tie-break: smallest
// index returned by the symmetric eigensolver's ascending order).
std::pair<double, Vec> ground_state(const Mat& h);

// Eigenpair with the smallest real part of a general (possibly non-normal)
// matrix; used for the fictitious code Hamiltonian which is similar to, but
// not exactly, a Hermitian operator.
std::pair<cx, Vec> lowest_real_eigenpair(const Mat& m);

// composite-space helpers
Mat embed(const Mat& op, Subsystem which, const HilbertSpace& space);
Mat partial_trace_ancilla(const Mat& rho, const HilbertSpace& space);
Eigen::Matrix2cd partial_trace_cavity(const Mat& rho, const HilbertSpace& space);

cx expectation(const Mat& rho, const Mat& op);
cx expectation(const Vec& psi, const Mat& op);
double state_fidelity(const Mat& rho, const Vec& psi);   // Re⟨ψ|ρ|ψ⟩
double state_fidelity(const Vec& a, const Vec& b);       // |⟨a|b⟩|²

double unitarity_defect(const Mat& u);    // max-norm of U†U - I
double hermiticity_defect(const Mat& a);  // max-norm of A - A†

// Fast application of D(alpha) to vectors via two cached quadrature
// eigenbases: D(x+iy) = e^{ixy} D(x) D(iy). Used by tomography grids and the
// prep optimizer where building a dense matrix per point is too slow.
class DisplacementEngine {
  public:
    explicit DisplacementEngine(const HilbertSpace& space);
    Vec apply(cx alpha, const Vec& psi) const;  // D(alpha)|psi⟩, cavity space
    int dim() const { return n_; }

  private:
    int n_;
    Mat va_, vb_;                 // eigenbases of -i(a†-a) and (a†+a)
    Eigen::VectorXd la_, lb_;     // their (real) spectra
};

}  // namespace gkpsim
