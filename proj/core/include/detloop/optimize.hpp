#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "detloop/functionals.hpp"
#include "detloop/loss.hpp"
#include "detloop/strategy.hpp"

namespace detloop {

struct OptimizerConfig {
  int restarts = 64;
  std::uint64_t seed = 20240917;
  int max_evals = 20000;      // per restart, across simplex rebuilds
  double xtol = 1e-10;        // simplex diameter
  double ftol = 1e-12;        // spread of values across the simplex
  int threads = 1;
  // Replaces the random start of the first restarts, in order.
  std::vector<std::vector<double>> warm_starts;

  void validate() const;
};

// Box-bounded Nelder-Mead minimization (adaptive coefficients, reflection at the
// walls, restarted from the best vertex until it stops improving).
struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  long evals = 0;
  bool converged = false;
};
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x0,
                             const std::vector<std::pair<double, double>>& bounds, int max_evals, double xtol,
                             double ftol);

// Restart seeds are derived from (seed, index) so results do not depend on threading.
std::uint64_t restart_seed(std::uint64_t seed, int restart);

struct MaximizeResult {
  double value = 0.0;  // functional value at the best strategy
  double score = 0.0;  // violation(f, value); the maximized quantity
  std::vector<double> params;
  bool converged = false;
  long evaluations = 0;
  int best_restart = 0;
};

// Prepares a functional/space/loss triple once so repeated evaluations are cheap.
// Shapes are reconciled automatically: the functional is extended when the lossy
// behavior carries more outcomes, or the behavior is padded in the other case.
class Objective {
 public:
  Objective(Functional f, StrategySpace space, LossSpec loss);

  double value(const std::vector<double>& params) const;
  double score(const std::vector<double>& params) const;
  const Functional& functional() const { return f_; }
  const StrategySpace& space() const { return space_; }
  const LossSpec& loss() const { return loss_; }

 private:
  Functional f_;
  StrategySpace space_;
  LossSpec loss_;
  std::optional<Shape> pad_;
};

// Qubit (or qutrit, for three-outcome Bell functionals) space whose lossy
// behavior lines up with the functional's shape under the given loss model.
StrategySpace default_space(const Functional& f, const LossSpec& loss);

MaximizeResult maximize(const Functional& f, const StrategySpace& space, const LossSpec& loss,
                        const OptimizerConfig& cfg);
MaximizeResult maximize(const Objective& obj, const OptimizerConfig& cfg);

// How a single efficiency parameter is mapped onto a LossSpec.
enum class EtaFamily {
  Symmetric,  // eta1 = eta2 = eta (PAM: every setting)
  FreeEta2,   // eta1 fixed, eta2 = eta
  FreeEta1,   // eta2 fixed, eta1 = eta
};
const char* eta_family_name(EtaFamily f);
EtaFamily eta_family_from_name(const std::string& name);

struct LossFamily {
  LossSpec base;
  EtaFamily family = EtaFamily::Symmetric;
  double fixed = 1.0;

  LossSpec at(double eta) const;
};

struct ThresholdConfig {
  double bisect_tol = 1e-3;
  double value_tol = 1e-7;  // a probe counts as violating when score exceeds this
  double lo = 0.0;
  double hi = 1.0;
};

enum class ThresholdStatus { Crossing, NoViolationBelowOne };

struct Probe {
  double param = 0.0;
  double score = 0.0;
};

struct ThresholdResult {
  ThresholdStatus status = ThresholdStatus::Crossing;
  double star = 0.0;           // critical efficiency or noise parameter
  double value_at_star = 0.0;  // functional value of the best strategy at `star`
  std::vector<double> best_params;
  double lo = 0.0, hi = 0.0;
  long evaluations = 0;
  std::vector<Probe> probes;
  std::vector<std::string> warnings;
};

// Smallest efficiency at which the maximal violation is positive.
ThresholdResult critical_efficiency(const Functional& f, const StrategySpace& space, const LossFamily& family,
                                    const OptimizerConfig& cfg, const ThresholdConfig& tcfg = {});

enum class CurveMode { Fixed, Reoptimize };
const char* curve_mode_name(CurveMode m);
CurveMode curve_mode_from_name(const std::string& name);

struct CurvePoint {
  double eta1 = 0.0;
  double eta2 = 0.0;  // NaN when no crossing exists for this eta1
  bool crossing = false;
};

struct CurveResult {
  std::vector<CurvePoint> points;
  std::vector<std::string> warnings;
};

// For each eta1 in the grid, the eta2 at which the value meets the bound. Fixed
// mode evaluates one strategy (affine in eta2); reoptimize runs a threshold search
// per grid point.
CurveResult boundary_curve(const Functional& f, const StrategySpace& space, const LossSpec& base, CurveMode mode,
                           const std::vector<double>& fixed_params, const std::vector<double>& grid,
                           const OptimizerConfig& cfg, const ThresholdConfig& tcfg = {});

enum class ChannelFamily { AmplitudeDamping, Depolarizing };
const char* channel_family_name(ChannelFamily c);
ChannelFamily channel_family_from_name(const std::string& name);

StrategySpace with_channel(StrategySpace space, ChannelFamily family, double p);

struct NoiseOptions {
  // When set, states and measurements stay fixed and only the channel varies.
  std::optional<std::vector<double>> fixed_params;
};

// Largest channel parameter at which the prepare-and-measure witness is still violated.
ThresholdResult noise_threshold(const Functional& witness, const StrategySpace& space, ChannelFamily family,
                                const OptimizerConfig& cfg, const ThresholdConfig& tcfg = {},
                                const NoiseOptions& opts = {});

}  // namespace detloop
