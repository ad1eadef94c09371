#include "detloop/serialize.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "detloop/errors.hpp"

namespace detloop {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("csv: cannot parse number '" + s + "'");
  }
}

int parse_int(const std::string& s) {
  double v = parse_double(s);
  if (v != static_cast<int>(v) || v < 0) throw DomainError("csv: expected a nonnegative integer, got '" + s + "'");
  return static_cast<int>(v);
}

std::vector<std::string> index_columns(const Shape& s) {
  switch (s.kind) {
    case Scenario::Bell: return {"x", "y", "a", "b"};
    case Scenario::Instrumental: return {"part", "x", "a", "b"};
    case Scenario::Pam: return {"x", "y", "b"};
    case Scenario::Bilocal: return {"x", "z", "a", "b0", "b1", "c"};
    case Scenario::NParty: {
      std::vector<std::string> c;
      for (int i = 0; i < s.ext[0]; ++i) c.push_back(fmt::format("x{}", i));
      for (int i = 0; i < s.ext[0]; ++i) c.push_back(fmt::format("a{}", i));
      return c;
    }
  }
  return {};
}

// Digits of v in the given radices, most significant first.
std::vector<int> digits(long v, const std::vector<int>& radix) {
  std::vector<int> d(radix.size());
  for (std::size_t i = radix.size(); i-- > 0;) {
    d[i] = static_cast<int>(v % radix[i]);
    v /= radix[i];
  }
  return d;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string behavior_to_csv(const Behavior& b) {
  const Shape s = shape_of(b);
  const auto v = flatten(b);
  std::string out = "scenario";
  for (const auto& c : index_columns(s)) out += "," + c;
  out += ",value\n";
  const char* name = scenario_name(s.kind);
  auto row = [&](const std::vector<std::string>& idx, double val) {
    out += name;
    for (const auto& i : idx) out += "," + i;
    out += "," + format_double(val) + "\n";
  };
  auto str = [](int i) { return std::to_string(i); };
  switch (s.kind) {
    case Scenario::Bell: {
      const auto& e = s.ext;
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto d = digits(static_cast<long>(i), {e[0], e[1], e[2], e[3]});
        row({str(d[0]), str(d[1]), str(d[2]), str(d[3])}, v[i]);
      }
      break;
    }
    case Scenario::Instrumental: {
      const int nx = s.ext[0], na = s.ext[1], nb = s.ext[2];
      const std::size_t obs = static_cast<std::size_t>(nx) * na * nb;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i < obs) {
          auto d = digits(static_cast<long>(i), {nx, na, nb});
          row({"obs", str(d[0]), str(d[1]), str(d[2])}, v[i]);
        } else {
          auto d = digits(static_cast<long>(i - obs), {na, nb});
          row({"do", "", str(d[0]), str(d[1])}, v[i]);
        }
      }
      break;
    }
    case Scenario::Pam: {
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto d = digits(static_cast<long>(i), {s.ext[0], s.ext[1], s.ext[2]});
        row({str(d[0]), str(d[1]), str(d[2])}, v[i]);
      }
      break;
    }
    case Scenario::Bilocal: {
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto d = digits(static_cast<long>(i), {s.ext[0], s.ext[1], s.ext[2], 2, 2, s.ext[3]});
        row({str(d[0]), str(d[1]), str(d[2]), str(d[3]), str(d[4]), str(d[5])}, v[i]);
      }
      break;
    }
    case Scenario::NParty: {
      const int n = s.ext[0];
      std::vector<int> rs(n, s.ext[1]), ro(n, s.ext[2]);
      long per = 1;
      for (int k = 0; k < n; ++k) per *= s.ext[2];
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto xs = digits(static_cast<long>(i) / per, rs);
        auto as = digits(static_cast<long>(i) % per, ro);
        std::vector<std::string> idx;
        for (int x : xs) idx.push_back(str(x));
        for (int a : as) idx.push_back(str(a));
        row(idx, v[i]);
      }
      break;
    }
  }
  return out;
}

Behavior behavior_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2) throw DomainError("behavior csv: no data rows");
  const auto header = split_csv_line(lines[0]);
  if (header.size() < 3 || header.front() != "scenario" || header.back() != "value")
    throw DomainError("behavior csv: header must start with 'scenario' and end with 'value'");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    rows.push_back(split_csv_line(lines[i]));
    if (rows.back().size() != header.size())
      throw DomainError(fmt::format("behavior csv: row {} has {} fields, expected {}", i + 1, rows.back().size(),
                                    header.size()));
  }
  const Scenario kind = scenario_from_name(rows[0][0]);
  const std::size_t ncol = header.size() - 2;
  // Extents come from the largest index seen in each column.
  std::vector<int> maxi(ncol, 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < ncol; ++c) {
      const auto& f = r[c + 1];
      if (f.empty() || f == "obs" || f == "do") continue;
      maxi[c] = std::max(maxi[c], parse_int(f) + 1);
    }
  Shape s;
  s.kind = kind;
  switch (kind) {
    case Scenario::Bell: s.ext = {maxi[0], maxi[1], maxi[2], maxi[3]}; break;
    case Scenario::Instrumental: s.ext = {maxi[1], maxi[2], maxi[3]}; break;
    case Scenario::Pam: s.ext = {maxi[0], maxi[1], maxi[2]}; break;
    case Scenario::Bilocal: s.ext = {maxi[0], maxi[1], maxi[2], maxi[5]}; break;
    case Scenario::NParty: {
      const int n = static_cast<int>(ncol / 2);
      int st = 0, oc = 0;
      for (int k = 0; k < n; ++k) {
        st = std::max(st, maxi[k]);
        oc = std::max(oc, maxi[n + k]);
      }
      s.ext = {n, st, oc};
      break;
    }
  }
  std::vector<double> vals(s.flat_size(), 0.0);
  std::vector<char> seen(vals.size(), 0);
  for (const auto& r : rows) {
    if (scenario_from_name(r[0]) != kind) throw DomainError("behavior csv: mixed scenarios");
    std::size_t idx = 0;
    auto num = [&](std::size_t c) { return parse_int(r[c + 1]); };
    switch (kind) {
      case Scenario::Bell: idx = ((num(0) * s.ext[1] + num(1)) * s.ext[2] + num(2)) * s.ext[3] + num(3); break;
      case Scenario::Instrumental:
        if (r[1] == "obs") idx = (num(1) * s.ext[1] + num(2)) * s.ext[2] + num(3);
        else if (r[1] == "do")
          idx = static_cast<std::size_t>(s.ext[0]) * s.ext[1] * s.ext[2] + num(2) * s.ext[2] + num(3);
        else throw DomainError("behavior csv: instrumental part must be 'obs' or 'do'");
        break;
      case Scenario::Pam: idx = (num(0) * s.ext[1] + num(1)) * s.ext[2] + num(2); break;
      case Scenario::Bilocal:
        idx = ((((num(0) * s.ext[1] + num(1)) * s.ext[2] + num(2)) * 2 + num(3)) * 2 + num(4)) * s.ext[3] + num(5);
        break;
      case Scenario::NParty: {
        const int n = s.ext[0];
        long st = 0, oc = 0;
        for (int k = 0; k < n; ++k) {
          st = st * s.ext[1] + num(k);
          oc = oc * s.ext[2] + num(n + k);
        }
        long per = 1;
        for (int k = 0; k < n; ++k) per *= s.ext[2];
        idx = static_cast<std::size_t>(st * per + oc);
        break;
      }
    }
    if (idx >= vals.size() || seen[idx]) throw DomainError("behavior csv: duplicate or out-of-range entry");
    seen[idx] = 1;
    vals[idx] = parse_double(r.back());
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw DomainError("behavior csv: missing entries");
  return unflatten(s, std::move(vals));
}

std::string behavior_to_json(const Behavior& b) {
  const Shape s = shape_of(b);
  nlohmann::ordered_json j;
  j["scenario"] = scenario_name(s.kind);
  j["ext"] = s.ext;
  j["values"] = flatten(b);
  return j.dump(2);
}

Behavior behavior_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    Shape s{scenario_from_name(j.at("scenario").get<std::string>()), j.at("ext").get<std::vector<int>>()};
    return unflatten(s, j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("behavior json: ") + e.what());
  }
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(r.task), csv_field(r.functional),
                       csv_field(r.loss_model), format_double(r.eta1), format_double(r.eta2), format_double(r.value),
                       format_double(r.classical_bound), r.converged ? "true" : "false");
  return out;
}

std::vector<ResultRow> results_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kResultsHeader) throw DomainError("results csv: unexpected header");
  std::vector<ResultRow> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_csv_line(lines[i]);
    if (f.size() != 8) throw DomainError(fmt::format("results csv: row {} has {} fields", i + 1, f.size()));
    if (f[7] != "true" && f[7] != "false") throw DomainError("results csv: converged must be true or false");
    out.push_back({f[0], f[1], f[2], parse_double(f[3]), parse_double(f[4]), parse_double(f[5]), parse_double(f[6]),
                   f[7] == "true"});
  }
  return out;
}

std::string facets_to_csv(const std::vector<Facet>& facets, const VertexSet& vs) {
  std::string out;
  for (int i = 0; i < vs.dim; ++i) out += csv_field(vs.label(i)) + ",";
  out += "offset\n";
  for (const auto& f : facets) {
    for (int i = 0; i < vs.dim; ++i) out += std::to_string(f.int_normal[i]) + ",";
    out += std::to_string(f.int_offset) + "\n";
  }
  return out;
}

std::vector<Facet> facets_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw DomainError("facet csv: empty");
  const auto header = split_csv_line(lines[0]);
  if (header.back() != "offset") throw DomainError("facet csv: last column must be 'offset'");
  std::vector<Facet> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_csv_line(lines[i]);
    if (f.size() != header.size()) throw DomainError(fmt::format("facet csv: row {} has {} fields", i + 1, f.size()));
    Facet fc;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) {
      fc.int_normal.push_back(std::stoll(f[k]));
      fc.normal.push_back(static_cast<double>(fc.int_normal.back()));
    }
    fc.int_offset = std::stoll(f.back());
    fc.offset = static_cast<double>(fc.int_offset);
    out.push_back(std::move(fc));
  }
  return out;
}

}  // namespace detloop
