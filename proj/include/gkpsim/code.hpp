#pragma once

// Square-lattice GKP qudit codes (d = 1..4): finite-energy codewords from the
// fictitious-Hamiltonian construction, stabilizers and logical displacement
// operators, Pauli eigenbases, the ququart parity basis, and the abstract
// d-dimensional Weyl algebra shared with the channel-fidelity machinery.

#include <vector>

#include "gkpsim/fock.hpp"

namespace gkpsim {

struct DegenerateSpectrumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct WrongDimension : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Generalized Pauli label: phase * X^n Z^m. phase is 1 or exp(i*pi/d)
// (the sqrt(omega) convention used by the measurement bases).
struct PauliLabel {
    int n = 0;       // X power, mod d
    int m = 0;       // Z power, mod d
    cx phase{1.0, 0.0};
};

// omega_d = exp(2*pi*i/d)
cx omega(int d);

// Measurement sets: P2 = {X, Z, vwXZ}, P3 = {X, Z, XZ, X2Z},
// P4 = {X, Z, vwXZ, X2Z, vwX3Z, XZ2}. For d=4 the parity basis is required
// in addition (see parity_basis_required).
std::vector<PauliLabel> measurement_pauli_set(int d);
bool parity_basis_required(int d);

// Human-readable label like "X", "Z", "wXZ^2" used in CSV outputs
std::string pauli_name(int d, const PauliLabel& label);

// Abstract d×d Weyl algebra (exact logical space, no oscillator)
Eigen::MatrixXcd weyl_matrix(int d, const PauliLabel& label);
// Eigenvectors ordered by eigenvalue omega^0..omega^{d-1}; each column's
// first nonzero entry is made real positive. Throws DegenerateSpectrumError.
Eigen::MatrixXcd logical_eigenvectors(int d, const PauliLabel& label);
// Ququart parity eigenvectors in the order (+,0), (-,0), (+,1), (-,1)
Eigen::MatrixXcd parity_eigenvectors();

struct GkpCode {
    int d = 2;
    double delta = 0.3;
    HilbertSpace space;
    double ell = 0.0;            // stabilizer length sqrt(pi*d)
    std::vector<Vec> codewords;  // |Z_n⟩ for n = 0..d-1, finite energy
    Mat stab_x, stab_z;          // ideal D(ell), D(i*ell)
    Mat logical_x, logical_z;    // ideal D(sqrt(pi/d)), D(i*sqrt(pi/d))
};

// Builds the code: |Z_0⟩ is the minimal-real-eigenvalue eigenvector of
//   H = -1/2 E(S_X + S_X†)E^-1 - 1/2 E(S_Z + S_Z†)E^-1 - d E(Z + Z†)E^-1
// and the remaining words follow from the envelope-conjugated logical X.
// Global phases are fixed by making the largest Fock amplitude real positive.
GkpCode build_code(int d, double delta, const HilbertSpace& space);

// phase * e^{-i n m pi / d} * D((n + i m) sqrt(pi/d)) == phase * X^n Z^m
Mat pauli_operator(const GkpCode& code, const PauliLabel& label);

struct LogicalBasis {
    enum class Kind { Pauli, Parity };
    Kind kind = Kind::Pauli;
    PauliLabel label;
    std::vector<Vec> states;
    std::vector<cx> eigenvalues;            // omega^n, or ±1 for parity
    std::vector<std::string> state_names;   // "X_0", "+,0", ...
};

LogicalBasis pauli_eigenbasis(const GkpCode& code, const PauliLabel& label);
LogicalBasis parity_basis(const GkpCode& code);

Mat maximally_mixed(const GkpCode& code);

}  // namespace gkpsim
