#include "ringcap/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ringcap/numeric.hpp"

namespace ringcap {

BallMassProfile::BallMassProfile(const DiscreteSpace& space, NodeId center) : center_(center) {
  const auto d = space.distances_from(center);
  std::vector<std::pair<double, double>> rows(d.size());
  for (NodeId i = 0; i < d.size(); ++i) rows[i] = {d[i], space.node_mass(i)};
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  sorted_.resize(rows.size());
  prefix_.assign(rows.size() + 1, 0.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    sorted_[k] = rows[k].first;
    prefix_[k + 1] = prefix_[k] + rows[k].second;
  }
}

double BallMassProfile::open(double r) const {
  return prefix_[static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), r) - sorted_.begin())];
}

double BallMassProfile::closed(double r) const {
  return prefix_[static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), r) - sorted_.begin())];
}

std::vector<double> sample_radii(const DiscreteSpace& space, double r_max, std::size_t count) {
  const double lo = 5.0 * space.params().resolution;
  if (!(r_max > lo)) throw std::invalid_argument("sample_radii: need r_max > 5h");
  return log_spaced(lo, r_max, count);
}

DoublingEstimate doubling_constant(const DiscreteSpace& space, const NodeSet& K, double R_K,
                                   std::size_t radii_count) {
  if (K.empty()) throw std::invalid_argument("doubling_constant: K is empty");
  const double h = space.params().resolution;
  if (R_K < 10.0 * h || space.size() < 2) throw std::invalid_argument("doubling_constant: insufficient resolution (R_K < 10h)");
  DoublingEstimate est;
  est.radii = radii_count < 2 ? std::vector<double>{5.0 * h} : log_spaced(5.0 * h, 0.5 * R_K, radii_count);
  est.C_K = 1.0;
  for (NodeId x : K) {
    const BallMassProfile prof(space, x);
    for (double r : est.radii) {
      const double q = prof.open(2.0 * r) / prof.open(r);
      if (q > est.C_K) {
        est.C_K = q;
        est.worst_node = x;
        est.worst_radius = r;
      }
    }
  }
  return est;
}

double local_dimension(double C_K) {
  if (!(C_K >= 1.0)) throw std::invalid_argument("local_dimension: C_K must be >= 1");
  return std::log2(C_K);
}

PointwiseFit pointwise_dimension(const DiscreteSpace& space, NodeId x, const std::vector<double>& radii) {
  if (radii.size() < 4) throw std::invalid_argument("pointwise_dimension: need at least 4 radii");
  const auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
  if (*hi < 10.0 * *lo * (1.0 - 1e-12)) throw std::invalid_argument("pointwise_dimension: radii must span a decade");
  const BallMassProfile prof(space, x);
  PointwiseFit fit;
  fit.node = x;
  fit.radii = radii;
  for (double r : radii) {
    const double m = prof.open(r);
    if (!(m > 0.0)) throw std::invalid_argument("pointwise_dimension: empty ball");
    fit.masses.push_back(m);
  }
  const auto line = fit_loglog(fit.radii, fit.masses);
  fit.Qx = line.slope;
  fit.intercept = line.intercept;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double model = std::exp(line.intercept + line.slope * std::log(radii[k]));
    fit.fit_residual = std::max(fit.fit_residual, std::abs(fit.masses[k] - model) / model);
  }
  return fit;
}

VolumeBoundsCheck check_volume_bounds(const DiscreteSpace& space, NodeId x, double R_K, double Q, double Qx,
                                      std::size_t radii_count, double slack) {
  VolumeBoundsCheck out;
  out.radii = sample_radii(space, R_K, radii_count);
  const BallMassProfile prof(space, x);
  const double whole = prof.open(R_K);
  out.c1 = std::numeric_limits<double>::infinity();
  out.c2 = 0.0;
  for (double r : out.radii) {
    const double ratio = prof.open(r) / whole;
    out.ratios.push_back(ratio);
    const double s = r / R_K;
    out.c1 = std::min(out.c1, ratio / std::pow(s, Q));
    out.c2 = std::max(out.c2, ratio / std::pow(s, Qx));
  }
  out.pass = out.c1 >= 1.0 / (1.0 + slack) && out.c2 <= 1.0 + slack;
  return out;
}

AhlforsRatio ahlfors_regularity(const DiscreteSpace& space, double Q_cand, const NodeSet& samples,
                                const std::vector<double>& radii) {
  AhlforsRatio out;
  out.m = std::numeric_limits<double>::infinity();
  for (NodeId x : samples) {
    const BallMassProfile prof(space, x);
    for (double r : radii) {
      const double v = prof.open(r) / std::pow(r, Q_cand);
      out.m = std::min(out.m, v);
      out.M = std::max(out.M, v);
    }
  }
  if (samples.empty() || radii.empty()) out.m = 0.0;
  return out;
}

DimensionReport analyze_dimensions(const DiscreteSpace& space, const NodeSet& K, const NodeSet& nodes,
                                   double R_K, std::size_t radii_count) {
  DimensionReport rep;
  const auto dbl = doubling_constant(space, K, R_K, radii_count);
  rep.C_K = dbl.C_K;
  rep.Q = local_dimension(rep.C_K);
  rep.radii_used = sample_radii(space, R_K, std::max<std::size_t>(radii_count, 4));
  rep.lower_C = std::numeric_limits<double>::infinity();
  rep.upper_C = 0.0;
  rep.volume_bounds_pass = true;
  for (NodeId x : nodes) {
    auto fit = pointwise_dimension(space, x, rep.radii_used);
    rep.fit_residual = std::max(rep.fit_residual, fit.fit_residual);
    const auto vb = check_volume_bounds(space, x, R_K, rep.Q, fit.Qx, rep.radii_used.size());
    rep.lower_C = std::min(rep.lower_C, vb.c1);
    rep.upper_C = std::max(rep.upper_C, vb.c2);
    rep.volume_bounds_pass = rep.volume_bounds_pass && vb.pass;
    rep.Qx.push_back(std::move(fit));
  }
  if (nodes.empty()) rep.lower_C = 0.0;
  return rep;
}

std::string DimensionReport::to_key_value() const {
  std::ostringstream out;
  out << "C_K = " << format_double(C_K) << '\n';
  out << "Q = " << format_double(Q) << '\n';
  out << "fit_residual = " << format_double(fit_residual) << '\n';
  out << "lower_C = " << format_double(lower_C) << '\n';
  out << "upper_C = " << format_double(upper_C) << '\n';
  out << "volume_bounds = " << (volume_bounds_pass ? "pass" : "fail") << '\n';
  out << "radii =";
  for (double r : radii_used) out << ' ' << format_double(r);
  out << '\n';
  for (const auto& f : Qx) out << "Qx[" << f.node << "] = " << format_double(f.Qx) << '\n';
  return out.str();
}

std::string DimensionReport::to_csv() const {
  std::ostringstream out;
  out << "node,radius,mass,Qx\n";
  for (const auto& f : Qx)
    for (std::size_t k = 0; k < f.radii.size(); ++k)
      out << f.node << ',' << format_double(f.radii[k]) << ',' << format_double(f.masses[k]) << ','
          << format_double(f.Qx) << '\n';
  return out.str();
}

}  // namespace ringcap
