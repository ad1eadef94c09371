#include "detloop/strategy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "detloop/errors.hpp"
#include "detloop/functionals.hpp"

namespace detloop {
namespace {

constexpr double kPi = std::numbers::pi;

// Projective qubit measurement along Bloch angles: row k is <m_k| (conjugated ket).
struct QubitBasis {
  std::array<std::array<cplx, 2>, 2> bra;
};

QubitBasis qubit_basis(double polar, double azimuth) {
  const double c = std::cos(polar / 2), s = std::sin(polar / 2);
  const cplx ph = std::polar(1.0, -azimuth);
  QubitBasis q;
  q.bra[0] = {cplx(c), ph * s};
  q.bra[1] = {cplx(s), -ph * c};
  return q;
}

// bra of outcome k for the phase-Fourier qutrit measurement, sign -1 for the inverse transform.
std::array<std::array<cplx, 3>, 3> qutrit_bras(double phi1, double phi2, double sign) {
  std::array<std::array<cplx, 3>, 3> u{};
  const double phases[3] = {0.0, phi1, phi2};
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j) u[k][j] = std::polar(1.0 / std::sqrt(3.0), sign * 2 * kPi * j * k / 3.0 + phases[j]);
  return u;
}

void require_size(const StrategySpace& s, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != s.num_params())
    throw DimensionError(fmt::format("strategy space {} expects {} parameters, got {}", space_kind_name(s.kind),
                                     s.num_params(), x.size()));
}

Povm qubit_povm(double polar, double azimuth) { return bloch_projective(bloch_direction(polar, azimuth)); }

// Pads binary qubit effects with zero effects up to n outcomes.
Povm padded(const Povm& p, int n) {
  std::vector<CMatrix> e = p.effects();
  while (static_cast<int>(e.size()) < n) e.push_back(CMatrix::Zero(p.dim(), p.dim()));
  return Povm(std::move(e));
}

Eigen::Vector3d bloch_of(const CMatrix& rho) {
  return {2 * rho(0, 1).real(), -2 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

}  // namespace

const char* space_kind_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::BellQubit: return "bell_qubit";
    case SpaceKind::BellQutrit: return "bell_qutrit";
    case SpaceKind::InstrumentalQubit: return "instrumental_qubit";
    case SpaceKind::PamQubit: return "pam_qubit";
    case SpaceKind::BilocalQubit: return "bilocal_qubit";
  }
  return "?";
}

SpaceKind space_kind_from_name(const std::string& name) {
  for (SpaceKind k : {SpaceKind::BellQubit, SpaceKind::BellQutrit, SpaceKind::InstrumentalQubit,
                      SpaceKind::PamQubit, SpaceKind::BilocalQubit})
    if (name == space_kind_name(k)) return k;
  throw DomainError("unknown strategy space '" + name + "'");
}

std::pair<Eigen::Matrix3d, Eigen::Vector3d> bloch_affine(const KrausChannel& ch) {
  if (ch.dim() != 2) throw DimensionError("bloch_affine: channel must act on a qubit");
  Eigen::Vector3d t = bloch_of(apply_channel(ch, CMatrix(0.5 * identity(2))));
  Eigen::Matrix3d T;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d e = Eigen::Vector3d::Unit(i);
    CMatrix rho = 0.5 * (identity(2) + e(0) * pauli_x() + e(1) * pauli_y() + e(2) * pauli_z());
    T.col(i) = bloch_of(apply_channel(ch, rho)) - t;
  }
  return {T, t};
}

StrategySpace StrategySpace::bell_qubit(int nx, int ny) {
  if (nx < 1 || ny < 1) throw DomainError("bell_qubit: need at least one setting per party");
  StrategySpace s;
  s.kind = SpaceKind::BellQubit;
  s.nx = nx;
  s.ny = ny;
  return s;
}

StrategySpace StrategySpace::bell_qutrit() {
  StrategySpace s;
  s.kind = SpaceKind::BellQutrit;
  s.outcomes_a = s.outcomes_b = 3;
  return s;
}

StrategySpace StrategySpace::instrumental_qubit(int nx, int outcomes_a, int outcomes_b) {
  if (nx < 1 || outcomes_a < 2 || outcomes_b < 2) throw DomainError("instrumental_qubit: invalid cardinalities");
  StrategySpace s;
  s.kind = SpaceKind::InstrumentalQubit;
  s.nx = nx;
  s.outcomes_a = outcomes_a;
  s.outcomes_b = outcomes_b;
  s.n_bob = outcomes_a;
  return s;
}

StrategySpace StrategySpace::pam_qubit(int nx, int ny, bool mixed) {
  if (nx < 1 || ny < 1) throw DomainError("pam_qubit: need at least one preparation and one measurement");
  StrategySpace s;
  s.kind = SpaceKind::PamQubit;
  s.nx = nx;
  s.ny = ny;
  s.outcomes_a = 1;
  s.mixed_states = mixed;
  return s;
}

StrategySpace StrategySpace::bilocal_qubit() {
  StrategySpace s;
  s.kind = SpaceKind::BilocalQubit;
  return s;
}

int StrategySpace::num_params() const {
  switch (kind) {
    case SpaceKind::BellQubit: return 1 + 2 * (nx + ny);
    case SpaceKind::BellQutrit: return 2 + 2 * 2 * 2;
    case SpaceKind::InstrumentalQubit: return 1 + 2 * (nx + n_bob);
    case SpaceKind::PamQubit: return (mixed_states ? 3 : 2) * nx + 2 * ny;
    case SpaceKind::BilocalQubit: return 2 + 2 * 4;
  }
  return 0;
}

std::vector<std::pair<double, double>> StrategySpace::bounds() const {
  std::vector<std::pair<double, double>> b;
  auto angles = [&](int n) {
    for (int i = 0; i < n; ++i) {
      b.push_back({0.0, kPi});
      b.push_back({0.0, 2 * kPi});
    }
  };
  switch (kind) {
    case SpaceKind::BellQubit:
      b.push_back({0.0, kPi / 2});
      angles(nx + ny);
      break;
    case SpaceKind::BellQutrit:
      b.push_back({0.0, kPi / 2});
      b.push_back({0.0, kPi / 2});
      for (int i = 0; i < 8; ++i) b.push_back({0.0, 2 * kPi});
      break;
    case SpaceKind::InstrumentalQubit:
      b.push_back({0.0, kPi / 2});
      angles(nx + n_bob);
      break;
    case SpaceKind::PamQubit:
      for (int x = 0; x < nx; ++x) {
        if (mixed_states) b.push_back({0.0, 1.0});
        b.push_back({0.0, kPi});
        b.push_back({0.0, 2 * kPi});
      }
      angles(ny);
      break;
    case SpaceKind::BilocalQubit:
      b.push_back({0.0, kPi / 2});
      b.push_back({0.0, kPi / 2});
      angles(4);
      break;
  }
  return b;
}

Behavior StrategySpace::behavior(const std::vector<double>& x) const {
  require_size(*this, x);
  switch (kind) {
    case SpaceKind::BellQubit: {
      const double c = std::cos(x[0]), s = std::sin(x[0]);
      std::vector<QubitBasis> A, B;
      for (int i = 0; i < nx; ++i) A.push_back(qubit_basis(x[1 + 2 * i], x[2 + 2 * i]));
      for (int j = 0; j < ny; ++j) B.push_back(qubit_basis(x[1 + 2 * nx + 2 * j], x[2 + 2 * nx + 2 * j]));
      auto out = BellBehavior::zeros(nx, ny, outcomes_a, outcomes_b);
      for (int xi = 0; xi < nx; ++xi)
        for (int yi = 0; yi < ny; ++yi)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              out.at(a, b, xi, yi) =
                  std::norm(c * A[xi].bra[a][0] * B[yi].bra[b][0] + s * A[xi].bra[a][1] * B[yi].bra[b][1]);
      return out;
    }
    case SpaceKind::BellQutrit: {
      const double g[3] = {std::cos(x[1]) * std::sin(x[0]), std::sin(x[1]) * std::sin(x[0]), std::cos(x[0])};
      auto out = BellBehavior::zeros(2, 2, 3, 3);
      std::array<std::array<std::array<cplx, 3>, 3>, 2> ua, ub;
      for (int i = 0; i < 2; ++i) {
        ua[i] = qutrit_bras(x[2 + 2 * i], x[3 + 2 * i], 1.0);
        ub[i] = qutrit_bras(x[6 + 2 * i], x[7 + 2 * i], -1.0);
      }
      for (int xi = 0; xi < 2; ++xi)
        for (int yi = 0; yi < 2; ++yi)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              cplx amp = 0;
              for (int j = 0; j < 3; ++j) amp += g[j] * ua[xi][a][j] * ub[yi][b][j];
              out.at(a, b, xi, yi) = std::norm(amp);
            }
      return out;
    }
    case SpaceKind::InstrumentalQubit: {
      const double c = std::cos(x[0]), s = std::sin(x[0]);
      std::vector<QubitBasis> A, B;
      for (int i = 0; i < nx; ++i) A.push_back(qubit_basis(x[1 + 2 * i], x[2 + 2 * i]));
      for (int j = 0; j < n_bob; ++j) B.push_back(qubit_basis(x[1 + 2 * nx + 2 * j], x[2 + 2 * nx + 2 * j]));
      auto out = InstrumentalBehavior::zeros(nx, outcomes_a, outcomes_b);
      for (int xi = 0; xi < nx; ++xi)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            out.p_at(a, b, xi) = std::norm(c * A[xi].bra[a][0] * B[a].bra[b][0] + s * A[xi].bra[a][1] * B[a].bra[b][1]);
      for (int a = 0; a < n_bob; ++a)
        for (int b = 0; b < 2; ++b)
          out.pdo_at(b, a) = c * c * std::norm(B[a].bra[b][0]) + s * s * std::norm(B[a].bra[b][1]);
      return out;
    }
    case SpaceKind::PamQubit: {
      const int per = mixed_states ? 3 : 2;
      auto out = PamBehavior::zeros(nx, ny, 2);
      std::vector<Eigen::Vector3d> r(nx), m(ny);
      for (int i = 0; i < nx; ++i) {
        const double* p = &x[per * i];
        r[i] = mixed_states ? Eigen::Vector3d(p[0] * bloch_direction(p[1], p[2])) : bloch_direction(p[0], p[1]);
        if (bloch_map) r[i] = bloch_map->first * r[i] + bloch_map->second;
      }
      for (int j = 0; j < ny; ++j) m[j] = bloch_direction(x[per * nx + 2 * j], x[per * nx + 2 * j + 1]);
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
          const double p0 = std::clamp(0.5 * (1 + r[i].dot(m[j])), 0.0, 1.0);
          out.at(0, i, j) = p0;
          out.at(1, i, j) = 1 - p0;
        }
      return out;
    }
    case SpaceKind::BilocalQubit: {
      const double l1[2] = {std::cos(x[0]), std::sin(x[0])};
      const double l2[2] = {std::cos(x[1]), std::sin(x[1])};
      QubitBasis A[2], C[2];
      for (int i = 0; i < 2; ++i) {
        A[i] = qubit_basis(x[2 + 2 * i], x[3 + 2 * i]);
        C[i] = qubit_basis(x[6 + 2 * i], x[7 + 2 * i]);
      }
      // Bell-basis bras (real): Phi+, Phi-, Psi+, Psi- over |ij>.
      const double h = std::numbers::sqrt2 / 2;
      const double bell[4][2][2] = {{{h, 0}, {0, h}}, {{h, 0}, {0, -h}}, {{0, h}, {h, 0}}, {{0, h}, {-h, 0}}};
      auto out = BilocalBehavior::zeros(2, 2, 2, 2);
      for (int xi = 0; xi < 2; ++xi)
        for (int z = 0; z < 2; ++z)
          for (int a = 0; a < 2; ++a)
            for (int k = 0; k < 4; ++k)
              for (int cc = 0; cc < 2; ++cc) {
                cplx amp = 0;
                for (int i = 0; i < 2; ++i)
                  for (int j = 0; j < 2; ++j)
                    amp += A[xi].bra[a][i] * bell[k][i][j] * C[z].bra[cc][j] * l1[i] * l2[j];
                out.at(a, k / 2, k % 2, cc, xi, z) = std::norm(amp);
              }
      return out;
    }
  }
  throw DomainError("behavior: unsupported strategy space");
}

DecodedStrategy StrategySpace::decode(const std::vector<double>& x) const {
  require_size(*this, x);
  DecodedStrategy d;
  auto qubit_measurements = [&](int offset, int n, int outcomes) {
    std::vector<Povm> v;
    for (int i = 0; i < n; ++i) v.push_back(padded(qubit_povm(x[offset + 2 * i], x[offset + 2 * i + 1]), outcomes));
    return v;
  };
  switch (kind) {
    case SpaceKind::BellQubit:
      d.states.push_back(schmidt_pair(x[0]));
      d.povms.push_back(qubit_measurements(1, nx, outcomes_a));
      d.povms.push_back(qubit_measurements(1 + 2 * nx, ny, outcomes_b));
      break;
    case SpaceKind::BellQutrit: {
      d.states.push_back(qutrit_schmidt(x[0], x[1]));
      std::vector<Povm> a, b;
      for (int i = 0; i < 2; ++i) {
        a.push_back(qutrit_phase_fourier(0.0, x[2 + 2 * i], x[3 + 2 * i], false));
        b.push_back(qutrit_phase_fourier(0.0, x[6 + 2 * i], x[7 + 2 * i], true));
      }
      d.povms = {a, b};
      break;
    }
    case SpaceKind::InstrumentalQubit:
      d.states.push_back(schmidt_pair(x[0]));
      d.povms.push_back(qubit_measurements(1, nx, outcomes_a));
      d.povms.push_back(qubit_measurements(1 + 2 * nx, n_bob, outcomes_b));
      break;
    case SpaceKind::PamQubit: {
      const int per = mixed_states ? 3 : 2;
      for (int i = 0; i < nx; ++i) {
        const double* p = &x[per * i];
        Eigen::Vector3d r = mixed_states ? Eigen::Vector3d(p[0] * bloch_direction(p[1], p[2])) : bloch_direction(p[0], p[1]);
        if (bloch_map) r = bloch_map->first * r + bloch_map->second;
        if (r.norm() > 1.0) r /= r.norm();
        d.states.push_back(bloch_qubit(r));
      }
      d.povms.push_back(qubit_measurements(per * nx, ny, 2));
      break;
    }
    case SpaceKind::BilocalQubit:
      d.states.push_back(schmidt_pair(x[0]));
      d.states.push_back(schmidt_pair(x[1]));
      d.povms.push_back(qubit_measurements(2, 2, 2));
      d.povms.push_back({bell_state_measurement()});
      d.povms.push_back(qubit_measurements(6, 2, 2));
      break;
  }
  return d;
}

Behavior StrategySpace::behavior_from_decoded(const std::vector<double>& x) const {
  DecodedStrategy d = decode(x);
  switch (kind) {
    case SpaceKind::BellQubit:
    case SpaceKind::BellQutrit: return bell_from_quantum(d.states[0], d.povms[0], d.povms[1]);
    case SpaceKind::InstrumentalQubit: return instrumental_from_quantum(d.states[0], d.povms[0], d.povms[1]);
    case SpaceKind::PamQubit: return pam_from_quantum(d.states, d.povms[0]);
    case SpaceKind::BilocalQubit:
      return bilocal_from_quantum(d.states[0], d.states[1], d.povms[0], d.povms[1][0], d.povms[2]);
  }
  throw DomainError("behavior_from_decoded: unsupported strategy space");
}

std::string StrategySpace::describe() const {
  switch (kind) {
    case SpaceKind::BellQubit:
      return fmt::format("bell_qubit: Schmidt angle + Bloch angles for {}+{} projective measurements ({} params)", nx,
                         ny, num_params());
    case SpaceKind::BellQutrit:
      return fmt::format("bell_qutrit: two Schmidt angles + two phases per Fourier measurement ({} params)",
                         num_params());
    case SpaceKind::InstrumentalQubit:
      return fmt::format("instrumental_qubit: Schmidt angle + {} Alice and {} Bob measurements ({} params)", nx,
                         n_bob, num_params());
    case SpaceKind::PamQubit:
      return fmt::format("pam_qubit: {} {} preparations + {} measurements{} ({} params)", nx,
                         mixed_states ? "Bloch-ball" : "pure", ny, bloch_map ? " through a channel" : "",
                         num_params());
    case SpaceKind::BilocalQubit:
      return fmt::format("bilocal_qubit: two Schmidt angles + end measurements, fixed Bell-state measurement ({} params)",
                         num_params());
  }
  return "?";
}

}  // namespace detloop
