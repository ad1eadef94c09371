#include "detloop/loss.hpp"

#include <fmt/format.h>

#include "detloop/errors.hpp"

namespace detloop {
namespace {

void require_eta(double eta, const char* what) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError(fmt::format("{}: efficiency {} outside [0,1]", what, eta));
}

void require_sink(int sink, int n, const char* what) {
  if (sink < 0 || sink >= n) throw DomainError(fmt::format("{}: sink {} outside 0..{}", what, sink, n - 1));
}

std::vector<double> broadcast_eta(const std::vector<double>& eta_y, int ny, const char* what) {
  if (eta_y.size() == 1) return std::vector<double>(ny, eta_y[0]);
  if (static_cast<int>(eta_y.size()) != ny)
    throw DimensionError(fmt::format("{}: {} efficiencies for {} settings", what, eta_y.size(), ny));
  for (double e : eta_y) require_eta(e, what);
  return eta_y;
}

}  // namespace

const char* loss_model_name(LossModel m) {
  switch (m) {
    case LossModel::None: return "none";
    case LossModel::Absorption: return "absorption";
    case LossModel::ExtraOutcome: return "extra_outcome";
    case LossModel::Hybrid: return "hybrid";
    case LossModel::PerfectAlice: return "perfect_alice";
  }
  return "?";
}

LossModel loss_model_from_name(const std::string& name) {
  for (LossModel m : {LossModel::None, LossModel::Absorption, LossModel::ExtraOutcome, LossModel::Hybrid,
                      LossModel::PerfectAlice})
    if (name == loss_model_name(m)) return m;
  throw DomainError("unknown loss model '" + name + "'");
}

void LossSpec::validate() const {
  if (model == LossModel::None) return;
  if (eta.empty()) throw DomainError("loss: efficiency list is empty");
  for (double e : eta) require_eta(e, "loss");
  if (sink_a < 0 || sink_b < 0) throw DomainError("loss: sinks must be nonnegative");
}

double LossSpec::eta1() const { return eta.empty() ? 1.0 : eta[0]; }
double LossSpec::eta2() const { return eta.size() < 2 ? eta1() : eta[1]; }

BellBehavior bell_absorb(const BellBehavior& b, double eta1, double eta2, int sink_a, int sink_b) {
  require_eta(eta1, "bell_absorb");
  require_eta(eta2, "bell_absorb");
  require_sink(sink_a, b.na, "bell_absorb");
  require_sink(sink_b, b.nb, "bell_absorb");
  BellBehavior out = b;
  const double cc = eta1 * eta2, cn = eta1 * (1 - eta2), nc = (1 - eta1) * eta2, nn = (1 - eta1) * (1 - eta2);
  for (int x = 0; x < b.nx; ++x)
    for (int y = 0; y < b.ny; ++y) {
      for (int a = 0; a < b.na; ++a)
        for (int bb = 0; bb < b.nb; ++bb) out.at(a, bb, x, y) = cc * b(a, bb, x, y);
      for (int a = 0; a < b.na; ++a) out.at(a, sink_b, x, y) += cn * b.marginal_a(a, x, y);
      for (int bb = 0; bb < b.nb; ++bb) out.at(sink_a, bb, x, y) += nc * b.marginal_b(bb, x, y);
      out.at(sink_a, sink_b, x, y) += nn;
    }
  return out;
}

BellBehavior bell_extra_outcome(const BellBehavior& b, double eta1, double eta2) {
  require_eta(eta1, "bell_extra_outcome");
  require_eta(eta2, "bell_extra_outcome");
  auto out = BellBehavior::zeros(b.nx, b.ny, b.na + 1, b.nb + 1);
  const int na0 = b.na, nb0 = b.nb;
  for (int x = 0; x < b.nx; ++x)
    for (int y = 0; y < b.ny; ++y) {
      for (int a = 0; a < b.na; ++a)
        for (int bb = 0; bb < b.nb; ++bb) out.at(a, bb, x, y) = eta1 * eta2 * b(a, bb, x, y);
      for (int a = 0; a < b.na; ++a) out.at(a, nb0, x, y) = eta1 * (1 - eta2) * b.marginal_a(a, x, y);
      for (int bb = 0; bb < b.nb; ++bb) out.at(na0, bb, x, y) = (1 - eta1) * eta2 * b.marginal_b(bb, x, y);
      out.at(na0, nb0, x, y) = (1 - eta1) * (1 - eta2);
    }
  return out;
}

InstrumentalBehavior instrumental_absorb(const InstrumentalBehavior& b, double eta1, double eta2, int sink_a,
                                         int sink_b) {
  require_eta(eta1, "instrumental_absorb");
  require_eta(eta2, "instrumental_absorb");
  require_sink(sink_a, b.na, "instrumental_absorb");
  require_sink(sink_b, b.nb, "instrumental_absorb");
  InstrumentalBehavior out = b;
  const double cc = eta1 * eta2, cn = eta1 * (1 - eta2), nc = (1 - eta1) * eta2, nn = (1 - eta1) * (1 - eta2);
  for (int x = 0; x < b.nx; ++x) {
    for (int a = 0; a < b.na; ++a)
      for (int bb = 0; bb < b.nb; ++bb) out.p_at(a, bb, x) = cc * b.p(a, bb, x);
    for (int a = 0; a < b.na; ++a) out.p_at(a, sink_b, x) += cn * b.marginal_a(a, x);
    for (int bb = 0; bb < b.nb; ++bb) out.p_at(sink_a, bb, x) += nc * b.pdo(bb, sink_a);
    out.p_at(sink_a, sink_b, x) += nn;
  }
  for (int a = 0; a < b.na; ++a) {
    for (int bb = 0; bb < b.nb; ++bb) out.pdo_at(bb, a) = eta2 * b.pdo(bb, a);
    out.pdo_at(sink_b, a) += 1 - eta2;
  }
  return out;
}

InstrumentalBehavior instrumental_perfect_alice(const InstrumentalBehavior& b, double eta2) {
  require_eta(eta2, "instrumental_perfect_alice");
  auto out = InstrumentalBehavior::zeros(b.nx, b.na, b.nb + 1);
  const int none = b.nb;
  for (int x = 0; x < b.nx; ++x)
    for (int a = 0; a < b.na; ++a) {
      for (int bb = 0; bb < b.nb; ++bb) out.p_at(a, bb, x) = eta2 * b.p(a, bb, x);
      out.p_at(a, none, x) = (1 - eta2) * b.marginal_a(a, x);
    }
  for (int a = 0; a < b.na; ++a) {
    for (int bb = 0; bb < b.nb; ++bb) out.pdo_at(bb, a) = eta2 * b.pdo(bb, a);
    out.pdo_at(none, a) = 1 - eta2;
  }
  return out;
}

InstrumentalBehavior instrumental_hybrid(const InstrumentalBehavior& b, double eta1, double eta2, int sink_a) {
  require_eta(eta1, "instrumental_hybrid");
  require_eta(eta2, "instrumental_hybrid");
  require_sink(sink_a, b.na, "instrumental_hybrid");
  auto out = InstrumentalBehavior::zeros(b.nx, b.na, b.nb + 1);
  const int none = b.nb;
  for (int x = 0; x < b.nx; ++x) {
    double used = 0.0;
    for (int a = 0; a < b.na; ++a) {
      for (int bb = 0; bb < b.nb; ++bb) {
        double v = eta1 * eta2 * b.p(a, bb, x);
        if (a == sink_a) v += (1 - eta1) * eta2 * b.pdo(bb, sink_a);
        out.p_at(a, bb, x) = v;
        used += v;
      }
      if (a != sink_a) {
        out.p_at(a, none, x) = eta1 * (1 - eta2) * b.marginal_a(a, x);
        used += out.p(a, none, x);
      }
    }
    out.p_at(sink_a, none, x) = std::max(0.0, 1.0 - used);
  }
  for (int a = 0; a < b.na; ++a) {
    for (int bb = 0; bb < b.nb; ++bb) out.pdo_at(bb, a) = eta2 * b.pdo(bb, a);
    out.pdo_at(none, a) = 1 - eta2;
  }
  return out;
}

PamBehavior pam_absorb(const PamBehavior& b, const std::vector<double>& eta_y, int sink) {
  require_sink(sink, b.nb, "pam_absorb");
  auto eta = broadcast_eta(eta_y, b.ny, "pam_absorb");
  PamBehavior out = b;
  for (int x = 0; x < b.nx; ++x)
    for (int y = 0; y < b.ny; ++y) {
      for (int bb = 0; bb < b.nb; ++bb) out.at(bb, x, y) = eta[y] * b(bb, x, y);
      out.at(sink, x, y) += 1 - eta[y];
    }
  return out;
}

PamBehavior pam_extra_outcome(const PamBehavior& b, const std::vector<double>& eta_y) {
  auto eta = broadcast_eta(eta_y, b.ny, "pam_extra_outcome");
  auto out = PamBehavior::zeros(b.nx, b.ny, b.nb + 1);
  for (int x = 0; x < b.nx; ++x)
    for (int y = 0; y < b.ny; ++y) {
      for (int bb = 0; bb < b.nb; ++bb) out.at(bb, x, y) = eta[y] * b(bb, x, y);
      out.at(b.nb, x, y) = 1 - eta[y];
    }
  return out;
}

BilocalBehavior bilocal_end_loss(const BilocalBehavior& b, double eta1, double eta2) {
  require_eta(eta1, "bilocal_end_loss");
  require_eta(eta2, "bilocal_end_loss");
  auto out = BilocalBehavior::zeros(b.nx, b.nz, b.na + 1, b.nc + 1);
  const int na0 = b.na, nc0 = b.nc;
  for (int x = 0; x < b.nx; ++x)
    for (int z = 0; z < b.nz; ++z)
      for (int b0 = 0; b0 < 2; ++b0)
        for (int b1 = 0; b1 < 2; ++b1) {
          double pb = 0.0;
          for (int a = 0; a < b.na; ++a) {
            double pab = 0.0;
            for (int c = 0; c < b.nc; ++c) {
              double v = b(a, b0, b1, c, x, z);
              out.at(a, b0, b1, c, x, z) = eta1 * eta2 * v;
              pab += v;
            }
            out.at(a, b0, b1, nc0, x, z) = eta1 * (1 - eta2) * pab;
            pb += pab;
          }
          for (int c = 0; c < b.nc; ++c) {
            double pbc = 0.0;
            for (int a = 0; a < b.na; ++a) pbc += b(a, b0, b1, c, x, z);
            out.at(na0, b0, b1, c, x, z) = (1 - eta1) * eta2 * pbc;
          }
          out.at(na0, b0, b1, nc0, x, z) = (1 - eta1) * (1 - eta2) * pb;
        }
  return out;
}

Behavior apply_loss(const Behavior& b, const LossSpec& spec) {
  spec.validate();
  if (spec.model == LossModel::None) return b;
  const auto model = spec.model;
  auto unsupported = [&]() -> Behavior {
    throw DomainError(fmt::format("loss model '{}' does not apply to the {} scenario", loss_model_name(model),
                                  scenario_name(shape_of(b).kind)));
  };
  if (auto* bell = std::get_if<BellBehavior>(&b)) {
    if (model == LossModel::Absorption) return bell_absorb(*bell, spec.eta1(), spec.eta2(), spec.sink_a, spec.sink_b);
    if (model == LossModel::ExtraOutcome) return bell_extra_outcome(*bell, spec.eta1(), spec.eta2());
    return unsupported();
  }
  if (auto* ins = std::get_if<InstrumentalBehavior>(&b)) {
    switch (model) {
      case LossModel::Absorption: return instrumental_absorb(*ins, spec.eta1(), spec.eta2(), spec.sink_a, spec.sink_b);
      case LossModel::PerfectAlice: return instrumental_perfect_alice(*ins, spec.eta2());
      case LossModel::Hybrid: return instrumental_hybrid(*ins, spec.eta1(), spec.eta2(), spec.sink_a);
      default: return unsupported();
    }
  }
  if (auto* pam = std::get_if<PamBehavior>(&b)) {
    if (model == LossModel::Absorption) return pam_absorb(*pam, spec.eta, spec.sink_b);
    if (model == LossModel::ExtraOutcome) return pam_extra_outcome(*pam, spec.eta);
    return unsupported();
  }
  if (auto* bil = std::get_if<BilocalBehavior>(&b)) {
    if (model == LossModel::ExtraOutcome) return bilocal_end_loss(*bil, spec.eta1(), spec.eta2());
    return unsupported();
  }
  return unsupported();
}

}  // namespace detloop
