#include "ringcap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>


namespace ringcap {

Condenser Condenser::ring_about(const DiscreteSpace& space, NodeId x0, double r, double R) {
  if (!(r > 0.0) || !(R > r)) throw std::invalid_argument("ring condenser: need 0 < r < R");
  if (x0 >= space.size()) throw std::invalid_argument("ring condenser: center out of range");
  Condenser c;
  const auto d = space.distances_from(x0);
  for (NodeId i = 0; i < space.size(); ++i) {
    if (d[i] <= r) c.inner.push_back(i);
    if (d[i] < R) c.domain.push_back(i);
  }
  c.ring = RingForm{x0, r, R};
  return c;
}

void Condenser::validate(const DiscreteSpace& space) const {
  if (inner.empty()) throw std::invalid_argument("condenser: inner set E is empty");
  if (!std::is_sorted(inner.begin(), inner.end()) || !std::is_sorted(domain.begin(), domain.end()))
    throw std::invalid_argument("condenser: node sets must be sorted");
  if (!domain.empty() && domain.back() >= space.size())
    throw std::invalid_argument("condenser: node id out of range");
  if (!is_subset(inner, domain)) throw std::invalid_argument("condenser: E must lie inside the domain");
  if (domain.size() <= inner.size()) throw std::invalid_argument("condenser: domain minus E is empty");
}

namespace {

enum : std::uint8_t { fixed_zero = 0, fixed_one = 1, free_node = 2, unreachable = 3 };

struct Problem {
  double p = 2.0;
  std::vector<NodeId> free;         // free (reachable) node ids
  std::vector<std::int32_t> ea, eb;  // free index of endpoints, -1 if fixed
  std::vector<double> va, vb;        // fixed values where the endpoint is fixed
  std::vector<double> c;             // c_e = mean mass / len^p
  std::vector<double> len;
  std::vector<double> hw;            // mean mass / len^2
  double constant_energy = 0.0;      // edges between E and the zero set
};

struct EdgeState {
  // Δ_e = value(a) - value(b) for the current free vector
  static double delta(const Problem& pb, std::size_t e, const std::vector<double>& x) {
    const double a = pb.ea[e] >= 0 ? x[static_cast<std::size_t>(pb.ea[e])] : pb.va[e];
    const double b = pb.eb[e] >= 0 ? x[static_cast<std::size_t>(pb.eb[e])] : pb.vb[e];
    return a - b;
  }
  static double dir(const Problem& pb, std::size_t e, const std::vector<double>& d) {
    const double a = pb.ea[e] >= 0 ? d[static_cast<std::size_t>(pb.ea[e])] : 0.0;
    const double b = pb.eb[e] >= 0 ? d[static_cast<std::size_t>(pb.eb[e])] : 0.0;
    return a - b;
  }
};

// a^q for a >= 0 with small integer exponents unrolled.
inline double powq(double a, double q) {
  switch (static_cast<int>(q)) {
    case 0: if (q == 0.0) return 1.0; break;
    case 1: if (q == 1.0) return a; break;
    case 2: if (q == 2.0) return a * a; break;
    case 3: if (q == 3.0) return a * a * a; break;
    case 4: if (q == 4.0) return (a * a) * (a * a); break;
    default: break;
  }
  return std::pow(a, q);
}

double power_abs(double v, double p) { return powq(std::abs(v), p); }

double active_energy(const Problem& pb, const std::vector<double>& x) {
  long double s = 0.0L;
  for (std::size_t e = 0; e < pb.c.size(); ++e) {
    const double dl = EdgeState::delta(pb, e, x);
    if (dl != 0.0) s += pb.c[e] * power_abs(dl, pb.p);
  }
  return static_cast<double>(s);
}

// Gradient of the energy w.r.t. the free values, plus the flux scale
// max_i sum_e p c_e |Δ_e|^(p-1).
void gradient(const Problem& pb, const std::vector<double>& x, std::vector<double>& grad, double& flux_scale) {
  const std::size_t nf = pb.free.size();
  grad.assign(nf, 0.0);
  std::vector<double> flux(nf, 0.0);
  for (std::size_t e = 0; e < pb.c.size(); ++e) {
    const double dl = EdgeState::delta(pb, e, x);
    if (dl == 0.0) continue;
    const double mag = pb.p * pb.c[e] * powq(std::abs(dl), pb.p - 1.0);
    const double g = dl > 0.0 ? mag : -mag;
    if (pb.ea[e] >= 0) {
      grad[static_cast<std::size_t>(pb.ea[e])] += g;
      flux[static_cast<std::size_t>(pb.ea[e])] += mag;
    }
    if (pb.eb[e] >= 0) {
      grad[static_cast<std::size_t>(pb.eb[e])] -= g;
      flux[static_cast<std::size_t>(pb.eb[e])] += mag;
    }
  }
  flux_scale = 0.0;
  for (double f : flux) flux_scale = std::max(flux_scale, f);
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Dirichlet graph Laplacian on the free nodes in CSR form; values are
// refreshed from the edge conductances before every linear solve.
struct Laplacian {
  std::vector<std::size_t> row;
  std::vector<std::uint32_t> col;
  std::vector<std::uint32_t> edge;  // edge behind each off-diagonal entry
  std::vector<double> val;
  std::vector<double> diag;

  explicit Laplacian(const Problem& pb) {
    const std::size_t n = pb.free.size();
    row.assign(n + 1, 0);
    for (std::size_t e = 0; e < pb.c.size(); ++e)
      if (pb.ea[e] >= 0 && pb.eb[e] >= 0) {
        ++row[static_cast<std::size_t>(pb.ea[e]) + 1];
        ++row[static_cast<std::size_t>(pb.eb[e]) + 1];
      }
    for (std::size_t i = 0; i < n; ++i) row[i + 1] += row[i];
    col.resize(row[n]);
    edge.resize(row[n]);
    val.resize(row[n]);
    diag.resize(n);
    std::vector<std::size_t> fill(row.begin(), row.end() - 1);
    for (std::size_t e = 0; e < pb.c.size(); ++e) {
      if (pb.ea[e] < 0 || pb.eb[e] < 0) continue;
      const auto a = static_cast<std::size_t>(pb.ea[e]), b = static_cast<std::size_t>(pb.eb[e]);
      col[fill[a]] = static_cast<std::uint32_t>(b);
      edge[fill[a]++] = static_cast<std::uint32_t>(e);
      col[fill[b]] = static_cast<std::uint32_t>(a);
      edge[fill[b]++] = static_cast<std::uint32_t>(e);
    }
  }

  void assign(const Problem& pb, const std::vector<double>& w) {
    std::fill(diag.begin(), diag.end(), 0.0);
    for (std::size_t e = 0; e < w.size(); ++e) {
      if (pb.ea[e] >= 0) diag[static_cast<std::size_t>(pb.ea[e])] += w[e];
      if (pb.eb[e] >= 0) diag[static_cast<std::size_t>(pb.eb[e])] += w[e];
    }
    for (std::size_t k = 0; k < val.size(); ++k) val[k] = w[edge[k]];
  }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      for (std::size_t k = row[i]; k < row[i + 1]; ++k) s -= val[k] * x[col[k]];
      y[i] = s;
    }
  }
};

std::size_t pcg(const Laplacian& A, const std::vector<double>& rhs, double abs_tol, std::size_t max_iter,
                std::vector<double>& x) {
  const std::size_t n = rhs.size();
  const auto& diag = A.diag;
  x.assign(n, 0.0);
  std::vector<double> r = rhs, z(n), dir(n), q(n);
  if (inf_norm(r) <= abs_tol) return 0;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = r[i] / diag[i];
    dir[i] = z[i];
    rz += r[i] * z[i];
  }
  std::size_t it = 0;
  while (it < max_iter) {
    ++it;
    A.apply(dir, q);
    double dq = 0.0;
    for (std::size_t i = 0; i < n; ++i) dq += dir[i] * q[i];
    if (!(dq > 0.0)) break;
    const double alpha = rz / dq;
    double rmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * dir[i];
      r[i] -= alpha * q[i];
      rmax = std::max(rmax, std::abs(r[i]));
    }
    if (rmax <= abs_tol) break;
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = r[i] / diag[i];
      rz_new += r[i] * z[i];
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) dir[i] = z[i] + beta * dir[i];
  }
  return it;
}

// φ'(t), φ''(t) for φ(t) = sum_e c_e |Δ_e + t δ_e|^p.
void line_derivatives(const Problem& pb, const std::vector<double>& delta, const std::vector<double>& ddir,
                      double t, double& d1, double& d2) {
  d1 = 0.0;
  d2 = 0.0;
  const double p = pb.p;
  for (std::size_t e = 0; e < delta.size(); ++e) {
    if (ddir[e] == 0.0) continue;
    const double s = delta[e] + t * ddir[e];
    const double as = std::abs(s);
    if (as == 0.0) {
      if (p < 2.0) d2 = std::numeric_limits<double>::infinity();
      continue;
    }
    const double pw = powq(as, p - 2.0);
    d1 += p * pb.c[e] * pw * s * ddir[e];
    d2 += p * (p - 1.0) * pb.c[e] * pw * ddir[e] * ddir[e];
  }
}

// φ(t) - φ(0) summed edge by edge, each term with relative accuracy, so a
// descent far below the roundoff of φ itself is still resolved.
double line_energy_change(const Problem& pb, const std::vector<double>& delta, const std::vector<double>& ddir,
                          double t) {
  double s = 0.0;
  for (std::size_t e = 0; e < delta.size(); ++e) {
    const double step = t * ddir[e];
    if (step == 0.0) continue;
    const double a = delta[e];
    const double b = a + step;
    if (a == 0.0 || b == 0.0 || (a > 0.0) != (b > 0.0)) {
      s += pb.c[e] * (power_abs(b, pb.p) - power_abs(a, pb.p));
      continue;
    }
    s += pb.c[e] * power_abs(a, pb.p) * std::expm1(pb.p * std::log1p(step / a));
  }
  return s;
}

// Minimizer of the convex function φ along the direction; safeguarded Newton
// inside a sign bracket of φ'.
double line_search(const Problem& pb, const std::vector<double>& delta, const std::vector<double>& ddir,
                   double t0, double slope0) {
  double lo = 0.0, hi = 0.0;
  double d1 = 0.0, d2 = 0.0;
  double t = t0;
  line_derivatives(pb, delta, ddir, t, d1, d2);
  if (d1 < 0.0) {
    lo = t;
    hi = t;
    for (int k = 0; k < 80 && d1 < 0.0; ++k) {
      lo = hi;
      hi *= 2.0;
      line_derivatives(pb, delta, ddir, hi, d1, d2);
    }
    if (d1 < 0.0) return hi;
    t = hi;
  } else {
    hi = t;
  }
  const double target = 1e-13 * std::abs(slope0);
  for (int k = 0; k < 100; ++k) {
    if (std::abs(d1) <= target || hi - lo <= 1e-15 * hi) break;
    double next = (std::isfinite(d2) && d2 > 0.0) ? t - d1 / d2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
    line_derivatives(pb, delta, ddir, t, d1, d2);
    if (d1 < 0.0)
      lo = t;
    else
      hi = t;
  }
  return t;
}

// Multi-source shortest path lengths along edges.
std::vector<double> graph_distance(const DiscreteSpace& space, const std::vector<std::uint8_t>& status,
                                   std::uint8_t source) {
  std::vector<double> dist(space.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (NodeId i = 0; i < space.size(); ++i)
    if (status[i] == source) {
      dist[i] = 0.0;
      heap.push({0.0, i});
    }
  const auto edges = space.edges();
  while (!heap.empty()) {
    const auto [dv, v] = heap.top();
    heap.pop();
    if (dv > dist[v]) continue;
    const auto nb = space.neighbors(v);
    const auto inc = space.incident_edges(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double nd = dv + edges[inc[k]].length;
      if (nd < dist[nb[k]]) {
        dist[nb[k]] = nd;
        heap.push({nd, nb[k]});
      }
    }
  }
  return dist;
}

}  // namespace

CapacityResult solve_condenser(const DiscreteSpace& space, const Condenser& condenser, double p0,
                               const SolverOptions& options) {
  if (!(p0 > 1.0) || !std::isfinite(p0)) throw std::invalid_argument("solve_condenser: p0 must be > 1");
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_condenser: tol must be > 0");
  condenser.validate(space);

  const std::size_t n = space.size();
  std::vector<std::uint8_t> status(n, fixed_zero);
  for (NodeId i : condenser.domain) status[i] = free_node;
  for (NodeId i : condenser.inner) status[i] = fixed_one;

  // Free nodes with no path to a constrained node carry no energy; pin them to 0.
  std::vector<char> seen(n, 0);
  std::queue<NodeId> queue;
  for (NodeId i = 0; i < n; ++i)
    if (status[i] != free_node) {
      seen[i] = 1;
      queue.push(i);
    }
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop();
    for (NodeId w : space.neighbors(v))
      if (!seen[w] && status[w] == free_node) {
        seen[w] = 1;
        queue.push(w);
      }
  }

  CapacityResult result;
  Problem pb;
  pb.p = p0;
  std::vector<std::int32_t> index(n, -1);
  for (NodeId i = 0; i < n; ++i) {
    if (status[i] != free_node) continue;
    if (!seen[i]) {
      status[i] = unreachable;
      ++result.unreachable_nodes;
      continue;
    }
    index[i] = static_cast<std::int32_t>(pb.free.size());
    pb.free.push_back(i);
  }
  result.free_nodes = pb.free.size();

  for (const auto& e : space.edges()) {
    const auto sa = status[e.a], sb = status[e.b];
    const double m = 0.5 * (space.node_mass(e.a) + space.node_mass(e.b));
    const double c = m / std::pow(e.length, p0);
    if (sa != free_node && sb != free_node) {
      if ((sa == fixed_one) != (sb == fixed_one)) pb.constant_energy += c;
      continue;
    }
    pb.ea.push_back(index[e.a]);
    pb.eb.push_back(index[e.b]);
    pb.va.push_back(sa == fixed_one ? 1.0 : 0.0);
    pb.vb.push_back(sb == fixed_one ? 1.0 : 0.0);
    pb.c.push_back(c);
    pb.len.push_back(e.length);
    pb.hw.push_back(m / (e.length * e.length));
  }

  const std::size_t nf = pb.free.size();
  const std::size_t ne = pb.c.size();
  std::vector<double> x(nf, 0.0), grad, d, w(ne), delta(ne), ddir(ne);
  // For p0 > 2 start from the path-distance interpolant d_0 / (d_0 + d_1):
  // far closer to the minimizer than the harmonic field when E is small.
  bool reweight_first = false;
  if (p0 > 2.0 && nf > 0) {
    const auto d_one = graph_distance(space, status, fixed_one);
    const auto d_zero = graph_distance(space, status, fixed_zero);
    for (std::size_t k = 0; k < nf; ++k) {
      const double a = d_one[pb.free[k]], b = d_zero[pb.free[k]];
      x[k] = std::isinf(b) ? 1.0 : b / (a + b);
    }
    reweight_first = true;
  }
  double energy = active_energy(pb, x);
  result.energy_history.push_back(energy + pb.constant_energy);

  double flux = 0.0;
  gradient(pb, x, grad, flux);
  result.residual = flux > 0.0 ? inf_norm(grad) / flux : 0.0;
  if (nf == 0 || result.residual == 0.0) result.converged = true;

  const double t0 = 1.0 / (p0 - 1.0);
  // For p0 < 2 roundoff in near-flat edges is amplified by |Δ|^(p0-1).
  const double residual_tol =
      std::max(options.tol, p0 < 2.0 ? 100.0 * std::pow(std::numeric_limits<double>::epsilon(), p0 - 1.0) : 0.0);
  Laplacian laplacian(pb);
  for (int iter = 1; iter <= options.max_iter && !result.converged; ++iter) {
    result.iterations = iter;
    // Conductances: first pass is the p = 2 problem, then c_e |Δ_e|^(p-2)
    // with the ratio to the extreme conductance clamped.
    if ((iter == 1 && !reweight_first) || p0 == 2.0) {
      w = pb.hw;
    } else {
      double gmax = 0.0;
      for (std::size_t e = 0; e < ne; ++e) {
        delta[e] = std::abs(EdgeState::delta(pb, e, x)) / pb.len[e];
        gmax = std::max(gmax, delta[e]);
      }
      const double gmin = p0 > 2.0 ? gmax * std::pow(options.weight_floor, 1.0 / (p0 - 2.0))
                                   : gmax * std::pow(options.weight_cap, -1.0 / (2.0 - p0));
      for (std::size_t e = 0; e < ne; ++e)
        w[e] = pb.hw[e] * powq(std::max(delta[e], gmin), p0 - 2.0);
    }
    std::vector<double> rhs(nf);
    for (std::size_t i = 0; i < nf; ++i) rhs[i] = -grad[i] / p0;
    const double cg_tol = std::max(0.1 * options.tol * flux / p0, (p0 == 2.0 ? 0.0 : 1e-2) * inf_norm(rhs));
    laplacian.assign(pb, w);
    result.cg_iterations += pcg(laplacian, rhs, cg_tol, options.max_cg_iter, d);

    for (std::size_t e = 0; e < ne; ++e) {
      delta[e] = EdgeState::delta(pb, e, x);
      ddir[e] = EdgeState::dir(pb, e, d);
    }
    double slope0 = 0.0, curv0 = 0.0;
    line_derivatives(pb, delta, ddir, 0.0, slope0, curv0);
    double new_energy = energy;
    if (slope0 < 0.0) {
      double t = line_search(pb, delta, ddir, t0, slope0);
      if (line_energy_change(pb, delta, ddir, t) > 0.0) {
        // Fall back to a plain backtracking step; φ'(0) < 0 guarantees one exists.
        t = t0;
        for (int k = 0; k < 200 && line_energy_change(pb, delta, ddir, t) > 0.0; ++k) t *= 0.5;
        if (line_energy_change(pb, delta, ddir, t) > 0.0) t = 0.0;
      }
      for (std::size_t i = 0; i < nf; ++i) x[i] += t * d[i];
      if (t > 0.0) new_energy = active_energy(pb, x);
    }
    const double total_old = energy + pb.constant_energy;
    const double total_new = new_energy + pb.constant_energy;
    if (total_new > total_old * (1.0 + 1e-13)) result.energy_monotone = false;
    result.energy_history.push_back(total_new);
    const double rel_decrease = total_new > 0.0 ? (total_old - total_new) / total_new : 0.0;
    energy = new_energy;

    gradient(pb, x, grad, flux);
    result.residual = flux > 0.0 ? inf_norm(grad) / flux : 0.0;
    const bool stalled = !(slope0 < 0.0);
    if ((rel_decrease <= options.tol || stalled) && result.residual <= residual_tol) result.converged = true;
    if (stalled && !result.converged) break;
  }

  std::vector<double> u(n, 0.0);
  for (NodeId i = 0; i < n; ++i)
    if (status[i] == fixed_one) u[i] = 1.0;
  double lo = 0.0, hi = 1.0;
  for (std::size_t k = 0; k < nf; ++k) {
    u[pb.free[k]] = x[k];
    lo = std::min(lo, x[k]);
    hi = std::max(hi, x[k]);
  }
  result.range_violation = std::max(-lo, hi - 1.0);
  result.field = make_field(space, std::move(u), p0);
  result.value = result.field.energy_edge;
  return result;
}

CapacityResult relative_capacity(const DiscreteSpace& space, NodeId x0, double r, double R, double p0,
                                 const SolverOptions& options) {
  if (!(r < R)) throw std::invalid_argument("relative_capacity: need r < R");
  return solve_condenser(space, Condenser::ring_about(space, x0, r, R), p0, options);
}

}  // namespace ringcap
