#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detloop/behaviors.hpp"
#include "detloop/functionals.hpp"

namespace detloop {

// Deterministic points of a classical polytope. Coordinates follow the flat
// layout of `shape`, truncated to `dim` entries (observational-only instrumental
// sets drop the do-block).
struct VertexSet {
  Shape shape;
  int dim = 0;
  std::vector<std::vector<int>> vertices;  // 0/1 entries
  std::size_t raw_count = 0;               // strategies enumerated before dedup
  bool dedup = true;
  std::string description;

  std::string label(int coord) const { return shape.label(coord); }
};

enum class InstrumentalSet { Observational, Hybrid };

inline constexpr std::size_t kVertexGuard = 1000000;

VertexSet bell_vertices(int nx, int ny, int na, int nb);
VertexSet instrumental_vertices(int nx, int na, int nb, InstrumentalSet set);
// Deterministic encoders x -> m < d and decoders (m, y) -> b.
VertexSet pam_vertices(int nx, int ny, int nb, int d);

struct Facet {
  std::vector<double> normal;   // <normal, v> <= offset for every vertex
  double offset = 0.0;
  std::vector<std::int64_t> int_normal;  // exact integer form of the same inequality
  std::int64_t int_offset = 0;
  std::vector<int> tight;       // indices of saturating vertices

  std::string to_text(const VertexSet& vs) const;
};

struct MembershipResult {
  bool inside = false;
  std::vector<double> weights;  // convex weights over vertices when inside
  double reconstruction_error = 0.0;
  Facet certificate;            // separating hyperplane when outside
  double margin = 0.0;          // <normal, point> - offset
};

MembershipResult membership(const std::vector<double>& point, const VertexSet& vs);

// Complete irredundant facet list via exact integer double description, in
// the affine hull of the vertices. Guard: affine dimension <= 24, vertices <= 300.
std::vector<Facet> facet_enumeration(const VertexSet& vs);

// Coordinates j whose zero set {v : v_j = 0} equals a facet's tight set.
bool is_nonnegativity_facet(const Facet& f, const VertexSet& vs);
// True when the two inequalities define the same face (same tight vertex set).
bool same_face(const std::vector<int>& tight_a, const std::vector<int>& tight_b);
std::vector<int> tight_set(const Functional& f, const VertexSet& vs, double target);

struct ValidationReport {
  double extreme = 0.0;  // max (or min for Below) over vertices
  double classical_bound = 0.0;
  bool matches = false;
  std::vector<int> attaining;
};

double vertex_value(const Functional& f, const VertexSet& vs, int vertex);
ValidationReport validate_functional(const Functional& f, const VertexSet& vs);

}  // namespace detloop
