// Facet enumeration by the double description method over exact integers.
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <fmt/format.h>

#include "detloop/errors.hpp"
#include "detloop/polytope.hpp"

namespace detloop {
namespace {

using i128 = __int128;
constexpr int kMaxVertices = 300;
constexpr int kMaxDim = 24;
constexpr int kWords = (kMaxVertices + 63) / 64;

struct Bits {
  std::array<std::uint64_t, kWords> w{};
  void set(int i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  int count() const {
    int c = 0;
    for (auto x : w) c += std::popcount(x);
    return c;
  }
  Bits operator&(const Bits& o) const {
    Bits r;
    for (int i = 0; i < kWords; ++i) r.w[i] = w[i] & o.w[i];
    return r;
  }
  bool subset_of(const Bits& o) const {
    for (int i = 0; i < kWords; ++i)
      if (w[i] & ~o.w[i]) return false;
    return true;
  }
};

struct Ray {
  std::vector<std::int64_t> a;
  Bits zero;
};

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw NumericalError("facet_enumeration: integer overflow in ray arithmetic");
  return static_cast<std::int64_t>(v);
}

std::vector<std::int64_t> normalized(std::vector<i128> v) {
  i128 g = 0;
  for (auto x : v) g = gcd128(g, x);
  std::vector<std::int64_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = narrow(g > 1 ? v[i] / g : v[i]);
  return out;
}

i128 dot(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  i128 s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<i128>(a[i]) * b[i];
  return s;
}

// Integer generator of the one-dimensional kernel of an (r-1) x r integer matrix.
std::vector<std::int64_t> kernel_vector(std::vector<std::vector<i128>> m, int r) {
  const int rows = static_cast<int>(m.size());
  std::vector<int> pivcol(rows, -1);
  int row = 0;
  for (int c = 0; c < r && row < rows; ++c) {
    int p = -1;
    for (int i = row; i < rows; ++i)
      if (m[i][c] != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    std::swap(m[p], m[row]);
    for (int i = 0; i < rows; ++i) {
      if (i == row || m[i][c] == 0) continue;
      const i128 f = m[i][c], g = m[row][c];
      i128 gg = 0;
      for (int j = 0; j < r; ++j) {
        m[i][j] = g * m[i][j] - f * m[row][j];
        gg = gcd128(gg, m[i][j]);
      }
      if (gg > 1)
        for (int j = 0; j < r; ++j) m[i][j] /= gg;
    }
    pivcol[row] = c;
    ++row;
  }
  if (row != rows) throw NumericalError("facet_enumeration: initial constraint rows are dependent");
  std::vector<char> is_piv(r, 0);
  for (int i = 0; i < rows; ++i) is_piv[pivcol[i]] = 1;
  int free = -1;
  for (int c = 0; c < r; ++c)
    if (!is_piv[c]) free = c;
  i128 L = 1;
  for (int i = 0; i < rows; ++i) {
    const i128 d = abs128(m[i][pivcol[i]]);
    L = L / gcd128(L, d) * d;
  }
  std::vector<i128> v(r, 0);
  v[free] = L;
  for (int i = 0; i < rows; ++i) v[pivcol[i]] = -m[i][free] * (L / m[i][pivcol[i]]);
  return normalized(std::move(v));
}

// Column indices (0 = homogenizing constant) whose restriction keeps the rank.
std::vector<int> rank_columns(const std::vector<std::vector<double>>& X, std::vector<int>& independent_rows) {
  const int n = static_cast<int>(X.size()), m = static_cast<int>(X.front().size());
  // Gaussian elimination on the transpose picks independent columns; on X picks rows.
  auto pick = [](std::vector<std::vector<double>> A) {
    const int rows = static_cast<int>(A.size()), cols = static_cast<int>(A.front().size());
    std::vector<int> chosen;
    std::vector<char> used(rows, 0);
    for (int c = 0; c < cols; ++c) {
      int p = -1;
      double best = 1e-9;
      for (int i = 0; i < rows; ++i)
        if (!used[i] && std::abs(A[i][c]) > best) {
          best = std::abs(A[i][c]);
          p = i;
        }
      if (p < 0) continue;
      used[p] = 1;
      chosen.push_back(p);
      for (int i = 0; i < rows; ++i) {
        if (i == p) continue;
        const double f = A[i][c] / A[p][c];
        if (f != 0.0)
          for (int j = c; j < cols; ++j) A[i][j] -= f * A[p][j];
      }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  };
  std::vector<std::vector<double>> T(m, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) T[j][i] = X[i][j];
  independent_rows = pick(X);
  return pick(T);
}

}  // namespace

std::vector<Facet> facet_enumeration(const VertexSet& vs) {
  const int N = static_cast<int>(vs.vertices.size());
  const int D = vs.dim;
  if (N == 0) throw DomainError("facet_enumeration: empty vertex set");
  if (N > kMaxVertices)
    throw GuardError(fmt::format("facet_enumeration: {} vertices exceed the guard of {}", N, kMaxVertices));

  std::vector<std::vector<double>> X(N, std::vector<double>(D + 1, 1.0));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < D; ++j) X[i][j + 1] = vs.vertices[i][j];
  std::vector<int> init_rows;
  const std::vector<int> cols = rank_columns(X, init_rows);
  const int r = static_cast<int>(cols.size());
  if (r - 1 > kMaxDim)
    throw GuardError(fmt::format("facet_enumeration: affine dimension {} exceeds the guard of {}", r - 1, kMaxDim));
  if (r < 2) throw DomainError("facet_enumeration: a single point has no facets");

  std::vector<std::vector<std::int64_t>> Y(N, std::vector<std::int64_t>(r));
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < r; ++k) Y[i][k] = static_cast<std::int64_t>(X[i][cols[k]]);

  // Initial simplicial cone from r independent points.
  std::vector<Ray> rays;
  for (int j = 0; j < r; ++j) {
    std::vector<std::vector<i128>> m;
    for (int k = 0; k < r; ++k)
      if (k != j) m.emplace_back(Y[init_rows[k]].begin(), Y[init_rows[k]].end());
    Ray ray{kernel_vector(std::move(m), r), {}};
    if (dot(ray.a, Y[init_rows[j]]) < 0)
      for (auto& v : ray.a) v = -v;
    for (int k = 0; k < r; ++k)
      if (k != j) ray.zero.set(init_rows[k]);
    rays.push_back(std::move(ray));
  }

  std::vector<char> processed(N, 0);
  for (int i : init_rows) processed[i] = 1;
  for (int h = 0; h < N; ++h) {
    if (processed[h]) continue;
    processed[h] = 1;
    std::vector<i128> val(rays.size());
    std::vector<int> pos, neg;
    for (std::size_t k = 0; k < rays.size(); ++k) {
      val[k] = dot(rays[k].a, Y[h]);
      if (val[k] > 0) pos.push_back(static_cast<int>(k));
      else if (val[k] < 0) neg.push_back(static_cast<int>(k));
      else rays[k].zero.set(h);
    }
    if (neg.empty()) continue;
    std::vector<Ray> next;
    next.reserve(rays.size());
    for (std::size_t k = 0; k < rays.size(); ++k)
      if (val[k] >= 0) next.push_back(rays[k]);
    for (int p : pos)
      for (int q : neg) {
        Bits common = rays[p].zero & rays[q].zero;
        if (common.count() < r - 2) continue;
        bool adjacent = true;
        for (std::size_t k = 0; k < rays.size() && adjacent; ++k)
          if (static_cast<int>(k) != p && static_cast<int>(k) != q && common.subset_of(rays[k].zero)) adjacent = false;
        if (!adjacent) continue;
        std::vector<i128> c(r);
        for (int t = 0; t < r; ++t) c[t] = val[p] * rays[q].a[t] - val[q] * rays[p].a[t];
        Ray nr{normalized(std::move(c)), common};
        nr.zero.set(h);
        next.push_back(std::move(nr));
      }
    rays = std::move(next);
  }

  std::vector<Facet> facets;
  for (const auto& ray : rays) {
    Facet f;
    f.int_normal.assign(D, 0);
    f.int_offset = 0;
    for (int k = 0; k < r; ++k) {
      if (cols[k] == 0) f.int_offset = ray.a[k];
      else f.int_normal[cols[k] - 1] = -ray.a[k];
    }
    f.normal.assign(f.int_normal.begin(), f.int_normal.end());
    f.offset = static_cast<double>(f.int_offset);
    for (int i = 0; i < N; ++i)
      if (dot(ray.a, Y[i]) == 0) f.tight.push_back(i);
    facets.push_back(std::move(f));
  }
  std::sort(facets.begin(), facets.end(), [](const Facet& a, const Facet& b) { return a.tight < b.tight; });
  return facets;
}

}  // namespace detloop
