#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace detloop {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kTol = 1e-9;

// Density matrix; the constructor enforces Hermiticity, unit trace and PSD.
class QuantumState {
 public:
  explicit QuantumState(CMatrix mat);
  static QuantumState pure(const CVector& psi);

  const CMatrix& mat() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  CMatrix mat_;
};

class Povm {
 public:
  explicit Povm(std::vector<CMatrix> effects);

  const std::vector<CMatrix>& effects() const { return effects_; }
  const CMatrix& operator[](std::size_t k) const { return effects_[k]; }
  std::size_t size() const { return effects_.size(); }
  Eigen::Index dim() const { return effects_.front().rows(); }

 private:
  std::vector<CMatrix> effects_;
};

class KrausChannel {
 public:
  explicit KrausChannel(std::vector<CMatrix> kraus);

  const std::vector<CMatrix>& kraus() const { return kraus_; }
  Eigen::Index dim() const { return kraus_.front().rows(); }

 private:
  std::vector<CMatrix> kraus_;
};

bool is_hermitian(const CMatrix& m, double tol = kTol);

CMatrix tensor(const CMatrix& a, const CMatrix& b);
CMatrix tensor(std::span<const CMatrix> factors);

// Tr[(E_1 x ... x E_n) rho], clamped into [0,1] when within tolerance.
double born_joint(const QuantumState& state, std::span<const CMatrix> effects);

QuantumState apply_channel(const KrausChannel& ch, const QuantumState& s);
CMatrix apply_channel(const KrausChannel& ch, const CMatrix& rho);
// Heisenberg-picture action sum_k K_k^dag M K_k.
CMatrix dual_apply(const KrausChannel& ch, const CMatrix& effect);

// Qubit amplitude damping with decay probability t.
KrausChannel amplitude_damping(double t);
// Bosonic amplitude damping truncated to photon numbers 0..dim-1.
KrausChannel amplitude_damping_fock(double t, int dim);
// rho -> (1-q) rho + q I/d, realized with the Weyl operator basis.
KrausChannel depolarizing(double q, int d);

// Probability that a detector of efficiency eta fails to click on a state whose
// photon-number distribution is photon_probs[n].
double no_click_probability(double eta, std::span<const double> photon_probs);

// Effect seen through a lossy detector: dual of the truncated damping channel.
CMatrix lossy_effect(const CMatrix& effect, double eta);

// Pauli matrices and friends.
CMatrix identity(int d);
CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
CMatrix ket_bra(int d, int i, int j);

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

CVector bell_vector(BellKind k);
QuantumState singlet();
QuantumState bell_state(BellKind k);
QuantumState schmidt_pair(double theta);
QuantumState ghz(int n);
QuantumState qutrit_schmidt(double theta0, double phi0);
QuantumState bloch_qubit(const Eigen::Vector3d& r);

Povm bloch_projective(const Eigen::Vector3d& m);
// Phase gate diag(e^{i phi_k}) followed by the discrete Fourier transform, then
// computational-basis projectors. The inverse flag uses the conjugate transform.
Povm qutrit_phase_fourier(double phi0, double phi1, double phi2, bool inverse = false);
Povm bell_state_measurement();
Povm computational_basis(int d);

// Unit Bloch direction from polar/azimuthal angles.
Eigen::Vector3d bloch_direction(double polar, double azimuth);

double max_eigenvalue(const CMatrix& op);

// (1/2i)(prod(X + iY) - prod(X - iY)) on n qubits.
CMatrix mermin_operator(int n);
// A0 x (B0 + B1) + A1 x (B0 - B1) for qubit observables given by Bloch vectors.
CMatrix chsh_operator(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                      const Eigen::Vector3d& b0, const Eigen::Vector3d& b1);

}  // namespace detloop
