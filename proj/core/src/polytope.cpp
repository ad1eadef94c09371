#include "detloop/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "detloop/errors.hpp"
#include "detloop/lp.hpp"

namespace detloop {
namespace {

double ipow(int base, int exp) { return std::pow(static_cast<double>(base), static_cast<double>(exp)); }

void guard(double count, const char* what) {
  if (count > static_cast<double>(kVertexGuard))
    throw GuardError(fmt::format("{}: {} deterministic strategies exceed the guard of {}", what, count, kVertexGuard));
}

// Calls fn(digits) for every assignment of `len` digits in [0, radix).
template <class Fn>
void for_each_function(int len, int radix, Fn fn) {
  std::vector<int> d(len, 0);
  while (true) {
    fn(d);
    int i = len - 1;
    while (i >= 0 && ++d[i] == radix) d[i--] = 0;
    if (i < 0) break;
  }
}

void add_unique(VertexSet& vs, std::set<std::vector<int>>& seen, std::vector<int> v) {
  ++vs.raw_count;
  if (seen.insert(v).second) vs.vertices.push_back(std::move(v));
}

}  // namespace

VertexSet bell_vertices(int nx, int ny, int na, int nb) {
  guard(ipow(na, nx) * ipow(nb, ny), "bell_vertices");
  VertexSet vs;
  vs.shape = {Scenario::Bell, {nx, ny, na, nb}};
  vs.dim = static_cast<int>(vs.shape.flat_size());
  vs.description = fmt::format("local deterministic points of Bell ({},{};{},{})", nx, na, ny, nb);
  std::set<std::vector<int>> seen;
  for_each_function(nx, na, [&](const std::vector<int>& fa) {
    for_each_function(ny, nb, [&](const std::vector<int>& gb) {
      auto p = flatten(deterministic_bell(nx, ny, na, nb, fa, gb));
      add_unique(vs, seen, std::vector<int>(p.begin(), p.end()));
    });
  });
  return vs;
}

VertexSet instrumental_vertices(int nx, int na, int nb, InstrumentalSet set) {
  guard(ipow(na, nx) * ipow(nb, na), "instrumental_vertices");
  VertexSet vs;
  vs.shape = {Scenario::Instrumental, {nx, na, nb}};
  const int obs_dim = nx * na * nb;
  vs.dim = set == InstrumentalSet::Hybrid ? obs_dim + na * nb : obs_dim;
  vs.description = fmt::format("{} instrumental ({},{},{}) deterministic points",
                               set == InstrumentalSet::Hybrid ? "hybrid" : "observational", nx, na, nb);
  std::set<std::vector<int>> seen;
  for_each_function(nx, na, [&](const std::vector<int>& f) {
    for_each_function(na, nb, [&](const std::vector<int>& g) {
      std::vector<int> v(vs.dim, 0);
      for (int x = 0; x < nx; ++x) v[(x * na + f[x]) * nb + g[f[x]]] = 1;
      if (set == InstrumentalSet::Hybrid)
        for (int a = 0; a < na; ++a) v[obs_dim + a * nb + g[a]] = 1;
      add_unique(vs, seen, std::move(v));
    });
  });
  return vs;
}

VertexSet pam_vertices(int nx, int ny, int nb, int d) {
  if (d < 1) throw DomainError("pam_vertices: message dimension must be positive");
  guard(ipow(d, nx) * ipow(nb, d * ny), "pam_vertices");
  VertexSet vs;
  vs.shape = {Scenario::Pam, {nx, ny, nb}};
  vs.dim = nx * ny * nb;
  vs.description = fmt::format("prepare-and-measure ({},{},{}) classical points with {}-valued messages", nx, ny, nb, d);
  std::set<std::vector<int>> seen;
  for_each_function(nx, d, [&](const std::vector<int>& enc) {
    for_each_function(d * ny, nb, [&](const std::vector<int>& dec) {
      std::vector<int> v(vs.dim, 0);
      for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) v[(x * ny + y) * nb + dec[enc[x] * ny + y]] = 1;
      add_unique(vs, seen, std::move(v));
    });
  });
  return vs;
}

std::string Facet::to_text(const VertexSet& vs) const {
  std::string s;
  for (std::size_t i = 0; i < int_normal.size(); ++i) {
    const auto c = int_normal[i];
    if (c == 0) continue;
    const auto mag = c < 0 ? -c : c;
    if (s.empty()) s += c < 0 ? "-" : "";
    else s += c < 0 ? " - " : " + ";
    if (mag != 1) s += fmt::format("{}*", mag);
    s += vs.label(static_cast<int>(i));
  }
  if (s.empty()) s = "0";
  return fmt::format("{} <= {}", s, int_offset);
}

MembershipResult membership(const std::vector<double>& point, const VertexSet& vs) {
  if (static_cast<int>(point.size()) != vs.dim)
    throw DimensionError(fmt::format("membership: point has {} coordinates, vertex set has {}", point.size(), vs.dim));
  const int D = vs.dim, V = static_cast<int>(vs.vertices.size());
  // Separation: maximize <c,p> - t over c in [-1,1]^D with <c,v> <= t. Variables
  // u = c + 1 in [0,2], t = tp - tn.
  LinearProgram sep;
  sep.num_vars = D + 2;
  sep.objective.assign(D + 2, 0.0);
  for (int i = 0; i < D; ++i) sep.objective[i] = point[i];
  sep.objective[D] = -1.0;
  sep.objective[D + 1] = 1.0;
  for (const auto& v : vs.vertices) {
    std::vector<double> row(D + 2, 0.0);
    double sum = 0.0;
    for (int i = 0; i < D; ++i) {
      row[i] = v[i];
      sum += v[i];
    }
    row[D] = -1.0;
    row[D + 1] = 1.0;
    sep.add(std::move(row), Relation::Le, sum);
  }
  for (int i = 0; i < D; ++i) {
    std::vector<double> row(D + 2, 0.0);
    row[i] = 1.0;
    sep.add(std::move(row), Relation::Le, 2.0);
  }
  // Keeps the free offset bounded below; any separating offset lies within [-D, D].
  {
    std::vector<double> row(D + 2, 0.0);
    row[D] = 1.0;
    sep.add(row, Relation::Le, D + 1.0);
    row[D] = 0.0;
    row[D + 1] = 1.0;
    sep.add(row, Relation::Le, D + 1.0);
  }
  LpResult r = solve_lp(sep);
  if (r.status != LpStatus::Optimal)
    throw LpError(fmt::format("membership: separation LP ended with status {}", lp_status_name(r.status)));
  double psum = 0.0;
  for (double p : point) psum += p;
  const double margin = r.value - psum;

  MembershipResult out;
  if (margin > 1e-8) {
    out.inside = false;
    out.margin = margin;
    out.certificate.normal.resize(D);
    for (int i = 0; i < D; ++i) out.certificate.normal[i] = r.x[i] - 1.0;
    out.certificate.offset = r.x[D] - r.x[D + 1];
    for (int k = 0; k < V; ++k) {
      double s = 0.0;
      for (int i = 0; i < D; ++i) s += out.certificate.normal[i] * vs.vertices[k][i];
      if (std::abs(s - out.certificate.offset) <= 1e-9) out.certificate.tight.push_back(k);
    }
    return out;
  }
  LinearProgram feas;
  feas.num_vars = V;
  feas.objective.assign(V, 0.0);
  for (int i = 0; i < D; ++i) {
    std::vector<double> row(V);
    for (int k = 0; k < V; ++k) row[k] = vs.vertices[k][i];
    feas.add(std::move(row), Relation::Eq, point[i]);
  }
  feas.add(std::vector<double>(V, 1.0), Relation::Eq, 1.0);
  LpResult w = solve_lp(feas);
  if (w.status != LpStatus::Optimal)
    throw LpError(fmt::format("membership: weight LP ended with status {}", lp_status_name(w.status)));
  out.inside = true;
  out.weights = w.x;
  for (int i = 0; i < D; ++i) {
    double s = 0.0;
    for (int k = 0; k < V; ++k) s += w.x[k] * vs.vertices[k][i];
    out.reconstruction_error = std::max(out.reconstruction_error, std::abs(s - point[i]));
  }
  return out;
}

bool same_face(const std::vector<int>& a, const std::vector<int>& b) {
  auto x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

bool is_nonnegativity_facet(const Facet& f, const VertexSet& vs) {
  for (int j = 0; j < vs.dim; ++j) {
    std::vector<int> zero;
    for (int k = 0; k < static_cast<int>(vs.vertices.size()); ++k)
      if (vs.vertices[k][j] == 0) zero.push_back(k);
    if (same_face(zero, f.tight)) return true;
  }
  return false;
}

double vertex_value(const Functional& f, const VertexSet& vs, int vertex) {
  if (f.shape != vs.shape)
    throw DimensionError(fmt::format("vertex_value: functional on {} but vertices on {}", f.shape.describe(),
                                     vs.shape.describe()));
  if (f.mode == ValueMode::Ij) throw DomainError("vertex_value: nonlinear functionals have no vertex form");
  for (std::size_t i = vs.dim; i < f.coeffs.size(); ++i)
    if (f.coeffs[i] != 0.0)
      throw DimensionError(fmt::format("vertex_value: {} weights {} outside the vertex coordinates", f.name,
                                       f.shape.label(static_cast<int>(i))));
  double s = f.constant;
  const auto& v = vs.vertices.at(vertex);
  for (int i = 0; i < vs.dim; ++i) s += f.coeffs[i] * v[i];
  return s;
}

std::vector<int> tight_set(const Functional& f, const VertexSet& vs, double target) {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(vs.vertices.size()); ++k)
    if (std::abs(vertex_value(f, vs, k) - target) <= 1e-9) out.push_back(k);
  return out;
}

ValidationReport validate_functional(const Functional& f, const VertexSet& vs) {
  if (vs.vertices.empty()) throw DomainError("validate_functional: empty vertex set");
  ValidationReport r;
  r.classical_bound = f.classical_bound;
  std::vector<double> vals(vs.vertices.size());
  for (std::size_t k = 0; k < vals.size(); ++k) {
    vals[k] = vertex_value(f, vs, static_cast<int>(k));
    if (f.mode == ValueMode::Abs) vals[k] = std::abs(vals[k]);
  }
  const bool below = f.direction == Direction::Below && f.mode != ValueMode::Abs;
  r.extreme = below ? *std::min_element(vals.begin(), vals.end()) : *std::max_element(vals.begin(), vals.end());
  for (std::size_t k = 0; k < vals.size(); ++k)
    if (std::abs(vals[k] - r.extreme) <= 1e-9) r.attaining.push_back(static_cast<int>(k));
  r.matches = std::abs(r.extreme - r.classical_bound) <= 1e-9;
  return r;
}

}  // namespace detloop
