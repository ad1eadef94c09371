#pragma once

#include <string>
#include <vector>

#include "detloop/behaviors.hpp"

namespace detloop {

enum class LossModel { None, Absorption, ExtraOutcome, Hybrid, PerfectAlice };

const char* loss_model_name(LossModel m);
LossModel loss_model_from_name(const std::string& name);

// Detector-inefficiency model. `eta` holds {eta1, eta2} for two-party
// scenarios and one efficiency per measurement setting for prepare-and-measure
// (a single value is broadcast to every setting). Sinks are the outcomes that
// absorb no-click events; sink_b doubles as the PAM sink.
struct LossSpec {
  LossModel model = LossModel::None;
  std::vector<double> eta;
  int sink_a = 1;
  int sink_b = 0;

  void validate() const;
  double eta1() const;
  double eta2() const;
};

BellBehavior bell_absorb(const BellBehavior& b, double eta1, double eta2, int sink_a, int sink_b);
// Appends a no-click outcome as the last index of each party.
BellBehavior bell_extra_outcome(const BellBehavior& b, double eta1, double eta2);

// Observational rows route Alice's no-click to sink_a, where Bob then measures
// his setting for a = sink_a (the do-term). Works for any outcome counts.
InstrumentalBehavior instrumental_absorb(const InstrumentalBehavior& b, double eta1, double eta2, int sink_a,
                                         int sink_b);
InstrumentalBehavior instrumental_perfect_alice(const InstrumentalBehavior& b, double eta2);
InstrumentalBehavior instrumental_hybrid(const InstrumentalBehavior& b, double eta1, double eta2, int sink_a);

PamBehavior pam_absorb(const PamBehavior& b, const std::vector<double>& eta_y, int sink);
PamBehavior pam_extra_outcome(const PamBehavior& b, const std::vector<double>& eta_y);

// Alice and Charlie each gain a no-click outcome; Bob's joint measurement is
// heralded and always conclusive.
BilocalBehavior bilocal_end_loss(const BilocalBehavior& b, double eta1, double eta2);

// Dispatches on the scenario of `b` and the model in `spec`.
Behavior apply_loss(const Behavior& b, const LossSpec& spec);

}  // namespace detloop
