#pragma once

// Independent reference values used by the tests. Nothing here calls the
// library's solver or bound evaluators.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "ringcap/space.hpp"

namespace oracle {

// Surface area of the unit sphere in R^n.
inline double sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

// Composite Simpson on [a, b] with `m` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int m = 20000) {
  const double step = (b - a) / m;
  double s = f(a) + f(b);
  for (int k = 1; k < m; ++k) s += f(a + k * step) * (k % 2 ? 4.0 : 2.0);
  return s * step / 3.0;
}

// p-capacity of the ring r < |x| < R in R^n. The radial Euler-Lagrange
// equation makes t^(n-1) |u'|^(p-1) constant, so the minimizer has
// u'(t) proportional to t^(-(n-1)/(p-1)); the integral is taken numerically
// in s = log t.
inline double radial_ring_capacity(int n, double p, double r, double R) {
  const double e = -(n - 1.0) / (p - 1.0);
  const double I = simpson([&](double s) { return std::exp((e + 1.0) * s); }, std::log(r), std::log(R));
  return sphere_area(n) * std::pow(I, 1.0 - p);
}

// Dirichlet energy of the radial minimizer restricted to the shell a < |x| < b.
inline double radial_shell_energy(int n, double p, double r, double R, double a, double b) {
  const double e = -(n - 1.0) / (p - 1.0);
  auto integral = [&](double lo, double hi) {
    return simpson([&](double s) { return std::exp((e + 1.0) * s); }, std::log(lo), std::log(hi));
  };
  const double I = integral(r, R);
  // |u'| = t^e / I, energy density |u'|^p t^(n-1) integrated over t
  return sphere_area(n) * std::pow(I, -p) * integral(a, b);
}

// Chain of conductances in series: total conductance of resistors 1/c_k.
inline double series_conductance(const std::vector<double>& c) {
  double resistance = 0.0;
  for (double v : c) resistance += 1.0 / v;
  return 1.0 / resistance;
}

// Discrete p = 2 condenser energy by a direct sparse Cholesky solve of the
// Dirichlet graph Laplacian with edge conductances mean(m_a, m_b) / len^2.
// `fixed` holds 1 (E), 0 (outside Omega) or -1 (free).
inline double dirichlet_energy_p2(const ringcap::DiscreteSpace& space, const std::vector<int>& fixed,
                                  std::vector<double>* u_out = nullptr) {
  const std::size_t n = space.size();
  std::vector<int> index(n, -1);
  int nf = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (fixed[i] < 0) index[i] = nf++;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nf);
  for (const auto& e : space.edges()) {
    const double w = 0.5 * (space.node_mass(e.a) + space.node_mass(e.b)) / (e.length * e.length);
    const int ia = index[e.a], ib = index[e.b];
    if (ia >= 0) trip.emplace_back(ia, ia, w);
    if (ib >= 0) trip.emplace_back(ib, ib, w);
    if (ia >= 0 && ib >= 0) {
      trip.emplace_back(ia, ib, -w);
      trip.emplace_back(ib, ia, -w);
    }
    if (ia >= 0 && ib < 0) b[ia] += w * fixed[e.b];
    if (ib >= 0 && ia < 0) b[ib] += w * fixed[e.a];
  }
  Eigen::SparseMatrix<double> A(nf, nf);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  const Eigen::VectorXd x = ldlt.solve(b);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = fixed[i] < 0 ? x[index[i]] : fixed[i];
  double energy = 0.0;
  for (const auto& e : space.edges()) {
    const double w = 0.5 * (space.node_mass(e.a) + space.node_mass(e.b)) / (e.length * e.length);
    energy += w * (u[e.a] - u[e.b]) * (u[e.a] - u[e.b]);
  }
  if (u_out) *u_out = std::move(u);
  return energy;
}

}  // namespace oracle
