#include "detloop/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "detloop/errors.hpp"

namespace detloop {
namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

QuantumState::QuantumState(CMatrix mat) : mat_(std::move(mat)) {
  require_square(mat_, "QuantumState");
  if (!is_hermitian(mat_)) throw NumericalError("QuantumState: matrix is not Hermitian");
  cplx tr = mat_.trace();
  if (std::abs(tr.real() - 1.0) > kTol || std::abs(tr.imag()) > kTol)
    throw NumericalError("QuantumState: trace differs from 1");
  if (hermitian_eigenvalues(mat_).minCoeff() < -kTol)
    throw NumericalError("QuantumState: matrix is not positive semidefinite");
}

QuantumState QuantumState::pure(const CVector& psi) {
  double n = psi.norm();
  if (n == 0.0) throw DomainError("QuantumState::pure: zero vector");
  CVector v = psi / n;
  return QuantumState(v * v.adjoint());
}

Povm::Povm(std::vector<CMatrix> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) throw DimensionError("Povm: no effects");
  const auto d = effects_.front().rows();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& e : effects_) {
    require_square(e, "Povm");
    if (e.rows() != d) throw DimensionError("Povm: effects of differing dimension");
    if (!is_hermitian(e)) throw NumericalError("Povm: effect is not Hermitian");
    Eigen::VectorXd ev = hermitian_eigenvalues(e);
    if (ev.minCoeff() < -kTol || ev.maxCoeff() > 1.0 + kTol)
      throw NumericalError("Povm: effect eigenvalues outside [0,1]");
    sum += e;
  }
  if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kTol)
    throw NumericalError("Povm: effects do not sum to the identity");
}

KrausChannel::KrausChannel(std::vector<CMatrix> kraus) : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw DimensionError("KrausChannel: no Kraus operators");
  const auto d = kraus_.front().rows();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& k : kraus_) {
    require_square(k, "KrausChannel");
    if (k.rows() != d) throw DimensionError("KrausChannel: operators of differing dimension");
    sum += k.adjoint() * k;
  }
  if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kTol)
    throw NumericalError("KrausChannel: not trace preserving");
}

CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  return out;
}

CMatrix tensor(std::span<const CMatrix> factors) {
  if (factors.empty()) return CMatrix::Identity(1, 1);
  CMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = tensor(out, factors[i]);
  return out;
}

double born_joint(const QuantumState& state, std::span<const CMatrix> effects) {
  Eigen::Index d = 1;
  for (const auto& e : effects) {
    require_square(e, "born_joint");
    d *= e.rows();
  }
  if (d != state.dim())
    throw DimensionError("born_joint: effect dimensions do not match the state (" +
                         std::to_string(d) + " vs " + std::to_string(state.dim()) + ")");
  cplx v = (tensor(effects) * state.mat()).trace();
  if (std::abs(v.imag()) >= kTol)
    throw NumericalError("born_joint: imaginary part " + std::to_string(v.imag()));
  double p = v.real();
  if (p < -kTol || p > 1.0 + kTol)
    throw NumericalError("born_joint: value " + std::to_string(p) + " is not a probability");
  return std::clamp(p, 0.0, 1.0);
}

CMatrix apply_channel(const KrausChannel& ch, const CMatrix& rho) {
  if (rho.rows() != ch.dim() || rho.cols() != ch.dim())
    throw DimensionError("apply_channel: dimension mismatch");
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ch.kraus()) out += k * rho * k.adjoint();
  return out;
}

QuantumState apply_channel(const KrausChannel& ch, const QuantumState& s) {
  return QuantumState(apply_channel(ch, s.mat()));
}

CMatrix dual_apply(const KrausChannel& ch, const CMatrix& effect) {
  if (effect.rows() != ch.dim() || effect.cols() != ch.dim())
    throw DimensionError("dual_apply: dimension mismatch");
  CMatrix out = CMatrix::Zero(effect.rows(), effect.cols());
  for (const auto& k : ch.kraus()) out += k.adjoint() * effect * k;
  return out;
}

KrausChannel amplitude_damping(double t) { return amplitude_damping_fock(t, 2); }

KrausChannel amplitude_damping_fock(double t, int dim) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("amplitude_damping: t must lie in [0,1]");
  if (dim < 2) throw DomainError("amplitude_damping: dim must be at least 2");
  // F_k = sum_n sqrt(C(n,k)) (1-t)^{(n-k)/2} t^{k/2} |n-k><n|
  std::vector<CMatrix> ks;
  for (int k = 0; k < dim; ++k) {
    CMatrix f = CMatrix::Zero(dim, dim);
    for (int n = k; n < dim; ++n) {
      double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
      f(n - k, n) = std::sqrt(binom) * std::pow(1.0 - t, 0.5 * (n - k)) * std::pow(t, 0.5 * k);
    }
    ks.push_back(std::move(f));
  }
  return KrausChannel(std::move(ks));
}

KrausChannel depolarizing(double q, int d) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("depolarizing: q must lie in [0,1]");
  if (d < 2) throw DomainError("depolarizing: d must be at least 2");
  // Averaging over all d^2 Weyl operators X^a Z^b yields Tr(rho) I/d.
  const double two_pi = 2.0 * std::numbers::pi;
  CMatrix shift = CMatrix::Zero(d, d);
  CMatrix clock = CMatrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    shift((j + 1) % d, j) = 1.0;
    clock(j, j) = std::polar(1.0, two_pi * j / d);
  }
  std::vector<CMatrix> ks;
  CMatrix xa = CMatrix::Identity(d, d);
  for (int a = 0; a < d; ++a) {
    CMatrix zb = CMatrix::Identity(d, d);
    for (int b = 0; b < d; ++b) {
      double w = (a == 0 && b == 0) ? 1.0 - q + q / (d * d) : q / (d * d);
      ks.push_back(std::sqrt(w) * (xa * zb));
      zb = zb * clock;
    }
    xa = xa * shift;
  }
  return KrausChannel(std::move(ks));
}

double no_click_probability(double eta, std::span<const double> photon_probs) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("no_click_probability: eta must lie in [0,1]");
  double h = 0.0, fail = 1.0;
  for (double pn : photon_probs) {
    h += pn * fail;
    fail *= 1.0 - eta;
  }
  return h;
}

CMatrix lossy_effect(const CMatrix& effect, double eta) {
  require_square(effect, "lossy_effect");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("lossy_effect: eta must lie in [0,1]");
  return dual_apply(amplitude_damping_fock(1.0 - eta, static_cast<int>(effect.rows())), effect);
}

CMatrix identity(int d) { return CMatrix::Identity(d, d); }

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMatrix ket_bra(int d, int i, int j) {
  CMatrix m = CMatrix::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

CVector bell_vector(BellKind k) {
  const double s = std::numbers::sqrt2 / 2.0;
  CVector v = CVector::Zero(4);
  switch (k) {
    case BellKind::PhiPlus: v(0) = s; v(3) = s; break;
    case BellKind::PhiMinus: v(0) = s; v(3) = -s; break;
    case BellKind::PsiPlus: v(1) = s; v(2) = s; break;
    case BellKind::PsiMinus: v(1) = s; v(2) = -s; break;
  }
  return v;
}

QuantumState singlet() { return bell_state(BellKind::PsiMinus); }

QuantumState bell_state(BellKind k) { return QuantumState::pure(bell_vector(k)); }

QuantumState schmidt_pair(double theta) {
  CVector v = CVector::Zero(4);
  v(0) = std::cos(theta);
  v(3) = std::sin(theta);
  return QuantumState::pure(v);
}

QuantumState ghz(int n) {
  if (n < 1 || n > 6) throw DomainError("ghz: n must lie in 1..6");
  CVector v = CVector::Zero(Eigen::Index{1} << n);
  v(0) = v(v.size() - 1) = std::numbers::sqrt2 / 2.0;
  return QuantumState::pure(v);
}

QuantumState qutrit_schmidt(double theta0, double phi0) {
  CVector v = CVector::Zero(9);
  v(0) = std::cos(phi0) * std::sin(theta0);
  v(4) = std::sin(phi0) * std::sin(theta0);
  v(8) = std::cos(theta0);
  return QuantumState::pure(v);
}

QuantumState bloch_qubit(const Eigen::Vector3d& r) {
  if (r.norm() > 1.0 + 1e-12) throw DomainError("bloch_qubit: Bloch vector norm exceeds 1");
  CMatrix m = 0.5 * (identity(2) + r(0) * pauli_x() + r(1) * pauli_y() + r(2) * pauli_z());
  return QuantumState(m);
}

Povm bloch_projective(const Eigen::Vector3d& m) {
  if (m.norm() > 1.0 + 1e-12) throw DomainError("bloch_projective: Bloch vector norm exceeds 1");
  CMatrix dot = m(0) * pauli_x() + m(1) * pauli_y() + m(2) * pauli_z();
  return Povm({0.5 * (identity(2) + dot), 0.5 * (identity(2) - dot)});
}

Povm qutrit_phase_fourier(double phi0, double phi1, double phi2, bool inverse) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double sign = inverse ? -1.0 : 1.0;
  CMatrix u(3, 3);
  const double phases[3] = {phi0, phi1, phi2};
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      u(k, j) = std::polar(1.0 / std::sqrt(3.0), sign * two_pi * j * k / 3.0 + phases[j]);
  std::vector<CMatrix> effects;
  for (int k = 0; k < 3; ++k) {
    CVector row = u.row(k).adjoint();
    effects.push_back(row * row.adjoint());
  }
  return Povm(std::move(effects));
}

Povm bell_state_measurement() {
  std::vector<CMatrix> effects;
  for (BellKind k : {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus}) {
    CVector v = bell_vector(k);
    effects.push_back(v * v.adjoint());
  }
  return Povm(std::move(effects));
}

Povm computational_basis(int d) {
  std::vector<CMatrix> effects;
  for (int k = 0; k < d; ++k) effects.push_back(ket_bra(d, k, k));
  return Povm(std::move(effects));
}

Eigen::Vector3d bloch_direction(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

double max_eigenvalue(const CMatrix& op) {
  require_square(op, "max_eigenvalue");
  if (!is_hermitian(op)) throw DomainError("max_eigenvalue: operator is not Hermitian");
  return hermitian_eigenvalues(op).maxCoeff();
}

CMatrix mermin_operator(int n) {
  if (n < 2 || n > 6) throw DomainError("mermin_operator: n must lie in 2..6");
  const cplx i(0, 1);
  CMatrix plus = pauli_x() + i * pauli_y();
  CMatrix minus = pauli_x() - i * pauli_y();
  CMatrix p = plus, m = minus;
  for (int k = 1; k < n; ++k) {
    p = tensor(p, plus);
    m = tensor(m, minus);
  }
  return (p - m) / (2.0 * i);
}

CMatrix chsh_operator(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                      const Eigen::Vector3d& b0, const Eigen::Vector3d& b1) {
  auto obs = [](const Eigen::Vector3d& v) -> CMatrix {
    return v(0) * pauli_x() + v(1) * pauli_y() + v(2) * pauli_z();
  };
  return tensor(obs(a0), obs(b0) + obs(b1)) + tensor(obs(a1), obs(b0) - obs(b1));
}

}  // namespace detloop
