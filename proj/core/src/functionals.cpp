#include "detloop/functionals.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "detloop/closedform.hpp"
#include "detloop/errors.hpp"

namespace detloop {
namespace {

int get_int(const Params& p, const std::string& key, int def) {
  auto it = p.find(key);
  if (it == p.end()) return def;
  try {
    std::size_t used = 0;
    int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw DomainError(fmt::format("parameter '{}' must be an integer, got '{}'", key, it->second));
  }
}

double get_double(const Params& p, const std::string& key, double def) {
  auto it = p.find(key);
  if (it == p.end()) return def;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw DomainError(fmt::format("parameter '{}' must be a number, got '{}'", key, it->second));
  }
}

std::string get_string(const Params& p, const std::string& key, const std::string& def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

void require_bit(int v, const char* key) {
  if (v != 0 && v != 1) throw DomainError(fmt::format("parameter '{}' must be 0 or 1", key));
}

// k-th permutation of {0..n-1} in lexicographic order.
std::vector<int> nth_permutation(int n, int k) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < k; ++i) std::next_permutation(perm.begin(), perm.end());
  return perm;
}

int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

Functional make(std::string name, Shape shape, double bound, Direction dir, ValueMode mode = ValueMode::Linear) {
  Functional f;
  f.name = std::move(name);
  f.coeffs.assign(shape.flat_size(), 0.0);
  f.shape = std::move(shape);
  f.classical_bound = bound;
  f.direction = dir;
  f.mode = mode;
  return f;
}

// Accessors that write into a coefficient vector by scenario indices.
struct BellCoeffs {
  Functional& f;
  double& operator()(int a, int b, int x, int y) {
    const auto& e = f.shape.ext;
    return f.coeffs[((x * e[1] + y) * e[2] + a) * e[3] + b];
  }
};

struct InstrCoeffs {
  Functional& f;
  double& obs(int a, int b, int x) {
    const auto& e = f.shape.ext;
    return f.coeffs[(x * e[1] + a) * e[2] + b];
  }
  double& pdo(int b, int a) {
    const auto& e = f.shape.ext;
    return f.coeffs[e[0] * e[1] * e[2] + a * e[2] + b];
  }
};

struct PamCoeffs {
  Functional& f;
  double& operator()(int b, int x, int y) {
    const auto& e = f.shape.ext;
    return f.coeffs[(x * e[1] + y) * e[2] + b];
  }
};

Functional chsh(const Params& p) {
  std::string orientation = get_string(p, "orientation", "abs");
  double sign = 1.0;
  ValueMode mode = ValueMode::Abs;
  if (orientation == "plus") {
    mode = ValueMode::Linear;
  } else if (orientation == "minus") {
    mode = ValueMode::Linear;
    sign = -1.0;
  } else if (orientation != "abs") {
    throw DomainError("chsh: orientation must be abs, plus or minus");
  }
  auto f = make("chsh", {Scenario::Bell, {2, 2, 2, 2}}, 2.0, Direction::Above, mode);
  BellCoeffs c{f};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) c(a, b, x, y) = sign * ((a + b) % 2 ? -1.0 : 1.0) * (x == 1 && y == 1 ? -1.0 : 1.0);
  return f;
}

Functional eberhard() {
  auto f = make("eberhard", {Scenario::Bell, {2, 2, 3, 3}}, 0.0, Direction::Below);
  BellCoeffs c{f};
  c(0, 1, 0, 1) += 1;
  c(0, 2, 0, 1) += 1;
  c(1, 0, 1, 0) += 1;
  c(2, 0, 1, 0) += 1;
  c(0, 0, 1, 1) += 1;
  c(0, 0, 0, 0) -= 1;
  return f;
}

Functional cglmp3() {
  auto f = make("cglmp3", {Scenario::Bell, {2, 2, 3, 3}}, 2.0, Direction::Above);
  BellCoeffs c{f};
  auto mod3 = [](int v) { return ((v % 3) + 3) % 3; };
  // For each (x, y) add +P(a - b = plus) - P(a - b = minus) (mod 3).
  auto pair = [&](int x, int y, int plus, int minus) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (mod3(a - b) == mod3(plus)) c(a, b, x, y) += 1;
        if (mod3(a - b) == mod3(minus)) c(a, b, x, y) -= 1;
      }
  };
  pair(0, 0, 0, -1);  // P(A1 = B1) - P(A1 = B1 - 1)
  pair(1, 0, -1, 0);  // P(B1 = A2 + 1) - P(B1 = A2)
  pair(1, 1, 0, -1);  // P(A2 = B2) - P(A2 = B2 - 1)
  pair(0, 1, 0, 1);   // P(B2 = A1) - P(B2 = A1 - 1)
  return f;
}

// Correlator coefficient helper for n-party binary outcomes: adds w*E(settings).
void add_correlator(Functional& f, int n, int setting_tuple, double w) {
  const int no = 1 << n;
  for (int o = 0; o < no; ++o) f.coeffs[setting_tuple * no + o] += w * ((std::popcount(unsigned(o)) % 2) ? -1.0 : 1.0);
}

Functional mermin(int n) {
  if (n < 2 || n > 4) throw DomainError("mermin: n must lie in 2..4");
  auto f = make(n == 3 ? "mermin3" : fmt::format("mermin{}", n), {Scenario::NParty, {n, 2, 2}},
                mermin_classical_bound(n), Direction::Above);
  // Imaginary part of prod_k (X_k + i Y_k): weight sin(k pi / 2) for k parties measuring Y.
  for (int s = 0; s < (1 << n); ++s) {
    int k = std::popcount(unsigned(s));
    double w = (k % 2 == 0) ? 0.0 : (k % 4 == 1 ? 1.0 : -1.0);
    if (w != 0.0) add_correlator(f, n, s, w);
  }
  return f;
}

Functional svetlichny3() {
  auto f = make("svetlichny3", {Scenario::NParty, {3, 2, 2}}, 4.0, Direction::Above);
  for (int s = 0; s < 8; ++s) {
    int k = std::popcount(unsigned(s));
    add_correlator(f, 3, s, (k == 1 || k == 2) ? 1.0 : -1.0);
  }
  return f;
}

Functional ch_nsite(int n) {
  if (n < 2 || n > 4) throw DomainError("ch_nsite: n must lie in 2..4");
  auto f = make(fmt::format("ch_nsite{}", n), {Scenario::NParty, {n, 2, 2}}, 0.0, Direction::Above);
  const int no = 1 << n;
  const int all_zero = 0;  // every party reports outcome 0
  for (int s = 1; s < (1 << n); ++s) {
    int k = std::popcount(unsigned(s));
    if (k == 1) f.coeffs[s * no + all_zero] += 1.0;
    else if (k % 2 == 0) f.coeffs[s * no + all_zero] -= 1.0;
  }
  // p_S with |S| = n-1: parties in S report 0 under setting 0, the excluded one is free.
  for (int excluded = 0; excluded < n; ++excluded) {
    int bit = 1 << (n - 1 - excluded);
    f.coeffs[all_zero] -= 1.0;
    f.coeffs[bit] -= 1.0;
  }
  f.coeffs[all_zero] += n - 1.0;
  return f;
}

Functional pearl(const Params& p) {
  int a = get_int(p, "a", 0), b = get_int(p, "b", 0), x = get_int(p, "x", 0);
  require_bit(a, "a");
  require_bit(b, "b");
  require_bit(x, "x");
  auto f = make("pearl", {Scenario::Instrumental, {2, 2, 2}}, 1.0, Direction::Above);
  InstrCoeffs c{f};
  c.obs(a, b, x) += 1;
  c.obs(a, b ^ 1, x ^ 1) += 1;
  return f;
}

Functional bonet(const Params& p) {
  int a = get_int(p, "a", 0), b = get_int(p, "b", 0), k = get_int(p, "perm", 0);
  require_bit(a, "a");
  require_bit(b, "b");
  if (k < 0 || k >= 6) throw DomainError("bonet: perm must lie in 0..5");
  auto x = nth_permutation(3, k);
  auto f = make("bonet", {Scenario::Instrumental, {3, 2, 2}}, 0.0, Direction::Above);
  InstrCoeffs c{f};
  c.obs(a, b, x[0]) += 1;
  c.obs(a, b, x[1]) -= 1;
  c.obs(a ^ 1, b, x[1]) -= 1;
  c.obs(a ^ 1, b ^ 1, x[2]) -= 1;
  c.obs(a, b, x[2]) -= 1;
  return f;
}

Functional kedagni(const Params& p) {
  int a = get_int(p, "a", 0), b = get_int(p, "b", 0), k = get_int(p, "perm", 0);
  require_bit(a, "a");
  require_bit(b, "b");
  if (k < 0 || k >= 24) throw DomainError("kedagni: perm must lie in 0..23");
  auto x = nth_permutation(4, k);
  auto f = make("kedagni", {Scenario::Instrumental, {4, 2, 2}}, 0.0, Direction::Above);
  InstrCoeffs c{f};
  c.obs(a, b, x[0]) += 1;
  c.obs(a ^ 1, b, x[0]) += 1;
  c.obs(a, b ^ 1, x[1]) -= 1;
  c.obs(a ^ 1, b, x[1]) -= 1;
  c.obs(a, b, x[2]) -= 1;
  c.obs(a ^ 1, b, x[2]) -= 1;
  c.obs(a, b, x[3]) -= 1;
  c.obs(a ^ 1, b ^ 1, x[3]) -= 1;
  return f;
}

Functional i222() {
  auto f = make("i222", {Scenario::Instrumental, {2, 2, 2}}, 0.0, Direction::Below);
  InstrCoeffs c{f};
  c.pdo(1, 0) += 1;
  c.obs(0, 1, 1) -= 1;
  c.obs(0, 0, 0) += 1;
  c.obs(1, 1, 0) += 1;
  c.obs(1, 1, 1) -= 1;
  return f;
}

Functional i223() {
  auto f = make("i223", {Scenario::Instrumental, {2, 2, 3}}, 0.0, Direction::Below);
  InstrCoeffs c{f};
  c.obs(0, 0, 1) += 1;
  c.obs(0, 1, 0) -= 1;
  c.obs(0, 2, 1) += 1;
  c.obs(1, 1, 0) -= 1;
  c.obs(1, 1, 1) += 1;
  c.pdo(1, 0) += 1;
  return f;
}

Functional i233() {
  auto f = make("i233", {Scenario::Instrumental, {2, 3, 3}}, 0.0, Direction::Below);
  InstrCoeffs c{f};
  c.obs(0, 0, 1) -= 1;
  c.obs(0, 1, 0) -= 1;
  c.obs(0, 2, 1) -= 1;
  c.pdo(0, 1) += 1;
  c.obs(1, 0, 0) -= 1;
  c.obs(1, 0, 1) -= 1;
  f.constant = 1.0;
  return f;
}

Functional ace_lb(double eta, bool with_eta) {
  // Largest vertex value of the observational part is 3.
  double offset = with_eta ? -1.0 - eta * eta : -2.0;
  auto f = make(with_eta ? "ace_lb_eta" : "ace_lb", {Scenario::Instrumental, {2, 2, 2}}, 3.0 + offset,
                Direction::Above);
  InstrCoeffs c{f};
  c.obs(0, 0, 0) += 2;
  c.obs(1, 1, 0) += 1;
  c.obs(0, 1, 1) += 1;
  c.obs(1, 1, 1) += 1;
  f.constant = offset;
  return f;
}

Functional s3() {
  auto f = make("s3", {Scenario::Pam, {3, 2, 2}}, 3.0, Direction::Above);
  PamCoeffs c{f};
  auto corr = [&](int x, int y, double w) {
    c(0, x, y) += w;
    c(1, x, y) -= w;
  };
  corr(0, 0, 1);
  corr(0, 1, 1);
  corr(1, 0, 1);
  corr(1, 1, -1);
  corr(2, 0, -1);
  return f;
}

Functional tn(int n) {
  if (n < 2 || n > 5) throw DomainError("tn: n must lie in 2..5");
  auto f = make(fmt::format("t{}", n), {Scenario::Pam, {1 << n, n, 2}}, 0.0, Direction::Above);
  PamCoeffs c{f};
  for (int x = 0; x < (1 << n); ++x)
    for (int y = 0; y < n; ++y) {
      int bit = (x >> (n - 1 - y)) & 1;  // y-th bit of x, most significant first
      c(0, x, y) += bit ? -1.0 : 1.0;
    }
  f.classical_bound = pam_dimension_bound(f, 2);
  return f;
}

Functional id_witness(int d) {
  if (d < 2 || d > 8) throw DomainError("id_witness: d must lie in 2..8");
  auto f = make(fmt::format("id_witness{}", d), {Scenario::Pam, {d + 1, d, 3}}, d - 1.0, Direction::Above);
  PamCoeffs c{f};
  for (int y = 0; y < d; ++y) c(0, 0, y) -= 1;
  for (int x = 1; x <= d; ++x)
    for (int y = 0; y <= d - x; ++y) c(0, x, y) += (x + y <= d - 1) ? -1.0 : 1.0;
  return f;
}

Functional ij() {
  return make("ij", {Scenario::Bilocal, {2, 2, 2, 2}}, 1.0, Direction::Above, ValueMode::Ij);
}

struct Block {
  int offset;
  std::vector<int> radices;
  std::vector<bool> outcome;
};

std::vector<Block> blocks(const Shape& s) {
  const auto& e = s.ext;
  switch (s.kind) {
    case Scenario::Bell: return {{0, {e[0], e[1], e[2], e[3]}, {false, false, true, true}}};
    case Scenario::Instrumental:
      return {{0, {e[0], e[1], e[2]}, {false, true, true}}, {e[0] * e[1] * e[2], {e[1], e[2]}, {true, true}}};
    case Scenario::Pam: return {{0, {e[0], e[1], e[2]}, {false, false, true}}};
    case Scenario::Bilocal:
      return {{0, {e[0], e[1], e[2], 2, 2, e[3]}, {false, false, true, false, false, true}}};
    case Scenario::NParty: {
      Block b{0, {}, {}};
      for (int i = 0; i < e[0]; ++i) b.radices.push_back(e[1]), b.outcome.push_back(false);
      for (int i = 0; i < e[0]; ++i) b.radices.push_back(e[2]), b.outcome.push_back(true);
      return {b};
    }
  }
  return {};
}

}  // namespace

std::string Functional::to_text() const {
  if (mode == ValueMode::Ij) return "sqrt|I| + sqrt|J| <= " + fmt::format("{:g}", classical_bound);
  std::string s;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    double c = coeffs[i];
    if (c == 0.0) continue;
    std::string mag = std::abs(c) == 1.0 ? "" : fmt::format("{:g}*", std::abs(c));
    if (s.empty()) s += (c < 0 ? "-" : "") + mag + shape.label(static_cast<int>(i));
    else s += (c < 0 ? " - " : " + ") + mag + shape.label(static_cast<int>(i));
  }
  if (constant != 0.0) s += fmt::format(" {} {:g}", constant < 0 ? "-" : "+", std::abs(constant));
  if (s.empty()) s = "0";
  if (mode == ValueMode::Abs) s = "|" + s + "|";
  return s + (direction == Direction::Above ? " <= " : " >= ") + fmt::format("{:g}", classical_bound);
}

Functional build(const std::string& name, const Params& p) {
  if (name == "chsh") return chsh(p);
  if (name == "eberhard") return eberhard();
  if (name == "cglmp3") return cglmp3();
  if (name == "mermin3") return mermin(3);
  if (name == "mermin") return mermin(get_int(p, "n", 3));
  if (name == "svetlichny3") return svetlichny3();
  if (name == "ch_nsite") return ch_nsite(get_int(p, "n", 2));
  if (name == "pearl") return pearl(p);
  if (name == "bonet") return bonet(p);
  if (name == "kedagni") return kedagni(p);
  if (name == "i222") return i222();
  if (name == "i223") return i223();
  if (name == "i233") return i233();
  if (name == "ace_lb") return ace_lb(1.0, false);
  if (name == "ace_lb_eta") {
    double eta = get_double(p, "eta", 1.0);
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("ace_lb_eta: eta must lie in [0,1]");
    return ace_lb(eta, true);
  }
  if (name == "s3") return s3();
  if (name == "tn") return tn(get_int(p, "n", 2));
  if (name == "id_witness") return id_witness(get_int(p, "d", 2));
  if (name == "ij") return ij();
  throw DomainError("unknown functional '" + name + "'");
}

std::vector<FunctionalInfo> list_functionals() {
  const std::vector<std::pair<std::string, std::string>> names = {
      {"chsh", "orientation=abs|plus|minus"},
      {"eberhard", ""},
      {"cglmp3", ""},
      {"mermin3", ""},
      {"mermin", "n=2..4"},
      {"svetlichny3", ""},
      {"ch_nsite", "n=2..4"},
      {"pearl", "a,b,x in {0,1}"},
      {"bonet", "a,b in {0,1}; perm=0..5"},
      {"kedagni", "a,b in {0,1}; perm=0..23"},
      {"i222", ""},
      {"i223", ""},
      {"i233", ""},
      {"ace_lb", ""},
      {"ace_lb_eta", "eta in [0,1]"},
      {"s3", ""},
      {"tn", "n=2..5"},
      {"id_witness", "d=2..8"},
      {"ij", ""},
  };
  std::vector<FunctionalInfo> out;
  for (const auto& [n, params] : names) {
    auto f = build(n);
    out.push_back({n, scenario_name(f.shape.kind), f.shape.describe(), f.classical_bound, params});
  }
  return out;
}

IjParts ij_parts(const BilocalBehavior& b) {
  IjParts r;
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 2; ++z) {
      double c0 = 0.0, c1 = 0.0;
      for (int a = 0; a < std::min(b.na, 2); ++a)
        for (int b0 = 0; b0 < 2; ++b0)
          for (int b1 = 0; b1 < 2; ++b1)
            for (int c = 0; c < std::min(b.nc, 2); ++c) {
              double v = b(a, b0, b1, c, x, z);
              c0 += ((a + b0 + c) % 2 ? -1.0 : 1.0) * v;
              c1 += ((a + b1 + c) % 2 ? -1.0 : 1.0) * v;
            }
      r.i += 0.25 * c0;
      r.j += 0.25 * ((x + z) % 2 ? -1.0 : 1.0) * c1;
    }
  return r;
}

double evaluate_ij(const BilocalBehavior& b) {
  if (b.nx != 2 || b.nz != 2) throw DimensionError("evaluate_ij: needs two settings for each end party");
  auto r = ij_parts(b);
  return std::sqrt(std::abs(r.i)) + std::sqrt(std::abs(r.j));
}

double evaluate(const Functional& f, const Behavior& b) {
  if (f.mode == ValueMode::Ij) {
    auto* bil = std::get_if<BilocalBehavior>(&b);
    if (!bil) throw DimensionError("evaluate: " + f.name + " needs a bilocal behavior");
    return evaluate_ij(*bil);
  }
  Shape s = shape_of(b);
  if (!(s == f.shape))
    throw DimensionError(fmt::format("evaluate: {} expects {}, got {}", f.name, f.shape.describe(), s.describe()));
  auto v = flatten(b);
  double acc = f.constant;
  for (std::size_t i = 0; i < v.size(); ++i) acc += f.coeffs[i] * v[i];
  return acc;
}

double violation(const Functional& f, double value) {
  if (f.mode == ValueMode::Abs) return std::abs(value) - f.classical_bound;
  return f.direction == Direction::Above ? value - f.classical_bound : f.classical_bound - value;
}

int embed_index(const Shape& from, const Shape& to, int idx) {
  if (from.kind != to.kind) return -1;
  auto bf = blocks(from), bt = blocks(to);
  if (bf.size() != bt.size()) return -1;
  for (std::size_t k = bf.size(); k-- > 0;) {
    if (idx < bf[k].offset) continue;
    int local = idx - bf[k].offset;
    const auto& rf = bf[k].radices;
    const auto& rt = bt[k].radices;
    if (rf.size() != rt.size()) return -1;
    std::vector<int> dig(rf.size());
    for (std::size_t i = rf.size(); i-- > 0;) {
      dig[i] = local % rf[i];
      local /= rf[i];
    }
    int out = 0;
    for (std::size_t i = 0; i < rt.size(); ++i) {
      if (dig[i] >= rt[i]) return -1;
      out = out * rt[i] + dig[i];
    }
    return bt[k].offset + out;
  }
  return -1;
}

namespace {

void require_embeddable(const Shape& from, const Shape& to, const char* what) {
  if (from.kind != to.kind || from.ext.size() != to.ext.size())
    throw DimensionError(fmt::format("{}: cannot map {} onto {}", what, from.describe(), to.describe()));
  auto bf = blocks(from), bt = blocks(to);
  for (std::size_t k = 0; k < bf.size(); ++k)
    for (std::size_t i = 0; i < bf[k].radices.size(); ++i) {
      bool ok = bf[k].outcome[i] ? bt[k].radices[i] >= bf[k].radices[i] : bt[k].radices[i] == bf[k].radices[i];
      if (!ok) throw DimensionError(fmt::format("{}: cannot map {} onto {}", what, from.describe(), to.describe()));
    }
}

}  // namespace

Functional extend_to(const Functional& f, const Shape& target) {
  if (f.shape == target) return f;
  require_embeddable(f.shape, target, "extend_to");
  Functional g = f;
  g.shape = target;
  g.coeffs.assign(target.flat_size(), 0.0);
  if (f.mode != ValueMode::Ij)
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) g.coeffs[embed_index(f.shape, target, static_cast<int>(i))] = f.coeffs[i];
  return g;
}

Behavior pad_to(const Behavior& b, const Shape& target) {
  Shape s = shape_of(b);
  if (s == target) return b;
  require_embeddable(s, target, "pad_to");
  auto v = flatten(b);
  std::vector<double> out(target.flat_size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) out[embed_index(s, target, static_cast<int>(i))] = v[i];
  return unflatten(target, std::move(out));
}

double pam_dimension_bound(const Functional& f, int d) {
  if (f.shape.kind != Scenario::Pam) throw DimensionError("pam_dimension_bound: not a prepare-and-measure functional");
  const int nx = f.shape.ext[0], ny = f.shape.ext[1], nb = f.shape.ext[2];
  double guard = std::pow(double(nb), double(d * ny));
  if (guard > 5e6) throw GuardError("pam_dimension_bound: too many decoding strategies");
  // Deterministic decoders g(m, y); the encoder then picks the best message per x.
  std::vector<int> g(d * ny, 0);
  double best = -1e300;
  const auto total = static_cast<long>(guard);
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < d * ny; ++i) {
      g[i] = static_cast<int>(c % nb);
      c /= nb;
    }
    double val = f.constant;
    for (int x = 0; x < nx; ++x) {
      double bx = -1e300;
      for (int m = 0; m < d; ++m) {
        double s = 0.0;
        for (int y = 0; y < ny; ++y) s += f.coeffs[(x * ny + y) * nb + g[m * ny + y]];
        bx = std::max(bx, s);
      }
      val += bx;
    }
    best = std::max(best, val);
  }
  return best;
}

}  // namespace detloop
