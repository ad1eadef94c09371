#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "detloop/behaviors.hpp"

namespace detloop {

enum class SpaceKind {
  BellQubit,          // Schmidt angle + Bloch angles per projective measurement
  BellQutrit,         // qutrit Schmidt angles + two free phases per Fourier measurement
  InstrumentalQubit,  // Schmidt angle + Alice per x + Bob per Alice outcome
  PamQubit,           // Bloch angles per preparation (radius too if mixed) + per measurement
  BilocalQubit,       // two Schmidt angles + end-party Bloch angles; middle Bell-state measurement
};

const char* space_kind_name(SpaceKind k);
SpaceKind space_kind_from_name(const std::string& name);

struct DecodedStrategy {
  std::vector<QuantumState> states;
  std::vector<std::vector<Povm>> povms;  // per party, per setting
};

// Parametrized family of quantum strategies. Every vector inside bounds()
// decodes to valid states and measurements.
struct StrategySpace {
  SpaceKind kind = SpaceKind::BellQubit;
  int nx = 2;  // Alice settings / preparations
  int ny = 2;  // Bob settings (Bell), measurements (PAM), Charlie settings (bilocal)
  // Instrumental: Bob's measurement count, one per Alice outcome it is keyed on.
  int n_bob = 2;
  // Ideal outcomes are padded with never-occurring labels up to these counts.
  int outcomes_a = 2;
  int outcomes_b = 2;
  bool mixed_states = false;  // PAM: search the Bloch ball instead of the sphere
  // PAM: affine Bloch map r -> T r + t applied to prepared states.
  std::optional<std::pair<Eigen::Matrix3d, Eigen::Vector3d>> bloch_map;

  static StrategySpace bell_qubit(int nx = 2, int ny = 2);
  static StrategySpace bell_qutrit();
  static StrategySpace instrumental_qubit(int nx = 2, int outcomes_a = 2, int outcomes_b = 2);
  static StrategySpace pam_qubit(int nx, int ny, bool mixed = false);
  static StrategySpace bilocal_qubit();

  int num_params() const;
  std::vector<std::pair<double, double>> bounds() const;
  Behavior behavior(const std::vector<double>& x) const;
  DecodedStrategy decode(const std::vector<double>& x) const;
  // Builds the behavior through the general Born-rule builders (slow, for checks).
  Behavior behavior_from_decoded(const std::vector<double>& x) const;
  std::string describe() const;
};

// Affine Bloch-vector action of a qubit channel.
std::pair<Eigen::Matrix3d, Eigen::Vector3d> bloch_affine(const KrausChannel& ch);

}  // namespace detloop
