#pragma once

#include <map>
#include <string>
#include <vector>

#include "detloop/behaviors.hpp"

namespace detloop {

enum class Direction { Above, Below };

// Linear: value = <coeffs, p> + constant.
// Abs: same value, but the violation score uses |value|.
// Ij: the nonlinear bilocal quantity sqrt|I| + sqrt|J|; coeffs unused.
enum class ValueMode { Linear, Abs, Ij };

using Params = std::map<std::string, std::string>;

struct Functional {
  std::string name;
  Shape shape;
  std::vector<double> coeffs;
  double constant = 0.0;
  double classical_bound = 0.0;
  Direction direction = Direction::Above;
  ValueMode mode = ValueMode::Linear;

  // Canonical text "c*p(..|..) + ... <= bound" (or >= for violations below).
  std::string to_text() const;
};

Functional build(const std::string& name, const Params& params = {});

struct FunctionalInfo {
  std::string name;
  std::string scenario;
  std::string shape;
  double classical_bound;
  std::string params;
};
std::vector<FunctionalInfo> list_functionals();

double evaluate(const Functional& f, const Behavior& b);
// Positive iff the value lies on the violating side of the classical bound.
double violation(const Functional& f, double value);

// sqrt|I| + sqrt|J| from conclusive end outcomes only.
double evaluate_ij(const BilocalBehavior& b);
struct IjParts {
  double i = 0.0, j = 0.0;
};
IjParts ij_parts(const BilocalBehavior& b);

// Largest value of a prepare-and-measure functional over classical strategies
// sending a message of dimension d (deterministic decoders, best message per x).
double pam_dimension_bound(const Functional& f, int d);

// Re-indexes f onto a shape with the same settings but at least as many
// outcomes; the new outcomes get zero weight.
Functional extend_to(const Functional& f, const Shape& target);
// Embeds a behavior into a shape with more outcomes (new outcomes have zero mass).
Behavior pad_to(const Behavior& b, const Shape& target);
// Maps a flat index of `from` into `to`, or -1 if the index has no image.
int embed_index(const Shape& from, const Shape& to, int idx);

}  // namespace detloop
