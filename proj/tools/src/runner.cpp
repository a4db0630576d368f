#include "ringcap/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ringcap/bounds.hpp"
#include "ringcap/dimension.hpp"
#include "ringcap/green.hpp"
#include "ringcap/numeric.hpp"
#include "ringcap/profiles.hpp"
#include "ringcap/solver.hpp"
#include "ringcap/space.hpp"

#ifndef RINGCAP_VERSION
#define RINGCAP_VERSION "0.0.0"
#endif

namespace ringcap::runner {

namespace {

// Strict reader over one JSON object: every key must be consumed.
class Section {
 public:
  Section(const Json& json, std::string where) : json_(json), where_(std::move(where)) {
    if (!json_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return json_.contains(key); }

  double number(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path(key) + ": must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
  std::optional<double> maybe_number(const std::string& key) {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  long integer(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
    return v.get<long>();
  }
  long integer(const std::string& key, long fallback) { return has(key) ? integer(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = get(key);
    if (!v.is_boolean()) throw ConfigError(path(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = get(key);
    if (!v.is_array() || v.empty()) throw ConfigError(path(key) + ": expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>()))
        throw ConfigError(path(key) + ": expected finite numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  const Json& raw(const std::string& key) { return get(key); }
  Section child(const std::string& key) { return Section(get(key), path(key)); }

  void finish() const {
    for (const auto& item : json_.items())
      if (!used_.count(item.key())) throw ConfigError(path(item.key()) + ": unknown key");
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  const Json& get(const std::string& key) {
    if (!json_.contains(key)) throw ConfigError(path(key) + ": missing");
    used_.insert(key);
    return json_.at(key);
  }

  const Json& json_;
  std::string where_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double positive(Section& s, const std::string& key) {
  const double v = s.number(key);
  require(v > 0.0, s.path(key) + ": must be > 0");
  return v;
}

double exponent(Section& s, const std::string& key) {
  const double p = s.number(key);
  require(p > 1.0, s.path(key) + ": p0 must be > 1");
  return p;
}

std::vector<double> exponents(Section& s, const std::string& key) {
  auto ps = s.numbers(key);
  for (double p : ps) require(p > 1.0, s.path(key) + ": every p0 must be > 1");
  return ps;
}

std::vector<double> radii(Section& s, const std::string& key) {
  auto rs = s.numbers(key);
  for (double r : rs) require(r > 0.0, s.path(key) + ": radii must be > 0");
  return rs;
}

int dimension_n(Section& s, int lo, int hi) {
  const long n = s.integer("n");
  require(n >= lo && n <= hi, s.path("n") + ": must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(n);
}

// ---- spaces -------------------------------------------------------------

struct SpaceSpec {
  std::string generator;
  int n = 2;
  double half_extent = 0.0, h = 0.0, alpha = 0.0, segment_length = 0.0;
  bool diagonal = false, clip = false;
  std::optional<double> t_half_extent;
  std::string file, metric;
  SpaceParams params;
};

SpaceSpec parse_space(Section s) {
  SpaceSpec spec;
  spec.generator = s.string("generator");
  const auto& g = spec.generator;
  if (g == "euclidean_grid") {
    spec.n = dimension_n(s, 1, 4);
    spec.half_extent = positive(s, "half_extent");
    spec.h = positive(s, "h");
    spec.alpha = s.number("alpha");
    require(spec.alpha > -spec.n, s.path("alpha") + ": must exceed -n");
    spec.diagonal = s.boolean("diagonal_edges", false);
    require(spec.half_extent >= 10.0 * spec.h * (1.0 - 1e-12), "space: half_extent must be >= 10 h");
  } else if (g == "heisenberg_grid") {
    spec.half_extent = positive(s, "half_extent");
    spec.h = positive(s, "h");
    spec.t_half_extent = s.maybe_number("t_half_extent");
    if (spec.t_half_extent) require(*spec.t_half_extent > 0.0, s.path("t_half_extent") + ": must be > 0");
    spec.clip = s.boolean("clip_to_gauge_ball", false);
    require(spec.h < spec.half_extent, "space: need h < half_extent");
  } else if (g == "double_cone") {
    spec.n = dimension_n(s, 2, 4);
    spec.half_extent = positive(s, "half_extent");
    spec.h = positive(s, "h");
    require(spec.half_extent >= 10.0 * spec.h * (1.0 - 1e-12), "space: half_extent must be >= 10 h");
  } else if (g == "glued_balls") {
    spec.n = dimension_n(s, 2, 4);
    spec.h = positive(s, "h");
    spec.segment_length = positive(s, "segment_length");
    require(spec.h <= 0.1, "space: glued_balls needs h <= 0.1");
  } else if (g == "file") {
    spec.file = s.string("path");
    spec.metric = s.string("metric");
    require(spec.metric == "euclidean" || spec.metric == "koranyi" || spec.metric == "graph_path",
            "space.metric: expected euclidean, koranyi or graph_path");
    spec.params.doubling_constant = positive(s, "doubling_constant");
    spec.params.doubling_radius = positive(s, "doubling_radius");
    spec.params.resolution = positive(s, "resolution");
    spec.params.poincare_dilation = s.number("poincare_dilation", 1.0);
  } else {
    throw ConfigError("space.generator: unknown generator '" + g + "'");
  }
  s.finish();
  return spec;
}

DiscreteSpace build_space(const SpaceSpec& spec) {
  const auto& g = spec.generator;
  if (g == "euclidean_grid") return build_euclidean_grid(spec.n, spec.half_extent, spec.h, spec.alpha, {spec.diagonal});
  if (g == "heisenberg_grid") {
    HeisenbergOptions o;
    o.t_half_extent = spec.t_half_extent;
    o.clip_to_gauge_ball = spec.clip;
    return build_heisenberg_grid(spec.half_extent, spec.h, o);
  }
  if (g == "double_cone") return build_double_cone(spec.n, spec.half_extent, spec.h);
  if (g == "glued_balls") return build_glued_balls(spec.n, spec.h, spec.segment_length);
  std::ifstream in(spec.file);
  if (!in) throw ConfigError("space.path: cannot open '" + spec.file + "'");
  const MetricKind kind = spec.metric == "euclidean" ? MetricKind::euclidean
                          : spec.metric == "koranyi" ? MetricKind::koranyi
                                                     : MetricKind::graph_path;
  try {
    return read_space(in, kind, spec.params);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("space.path: ") + e.what());
  }
}

NodeId locate(const DiscreteSpace& space, const std::vector<double>& x) { return space.nearest_node(x); }

std::size_t coord_dim(const SpaceSpec& spec) {
  if (spec.generator == "heisenberg_grid") return 3;
  if (spec.generator == "file") return 0;  // known after loading
  return static_cast<std::size_t>(spec.n);
}

// Distance from x0 to the nearest node whose degree is below the maximum.
double inradius(const DiscreteSpace& space, NodeId x0) {
  std::size_t top = 0;
  for (NodeId i = 0; i < space.size(); ++i) top = std::max(top, space.degree(i));
  const auto d = space.distances_from(x0);
  double best = std::numeric_limits<double>::infinity();
  for (NodeId i = 0; i < space.size(); ++i)
    if (space.degree(i) < top) best = std::min(best, d[i]);
  if (!std::isfinite(best)) best = *std::max_element(d.begin(), d.end());
  return best;
}

SolverOptions solver_options(Section& s) {
  SolverOptions o;
  o.tol = s.number("tol", o.tol);
  require(o.tol > 0.0 && o.tol < 1.0, s.path("tol") + ": must be in (0, 1)");
  o.max_iter = static_cast<int>(s.integer("max_iter", o.max_iter));
  require(o.max_iter > 0, s.path("max_iter") + ": must be > 0");
  return o;
}

struct Dims {
  std::optional<double> Q, Qx0;
};

Dims dims_from(Section& s) {
  Dims d;
  d.Q = s.maybe_number("Q");
  d.Qx0 = s.maybe_number("Qx0");
  if (d.Q) require(*d.Q > 0.0, s.path("Q") + ": must be > 0");
  if (d.Qx0) require(*d.Qx0 > 0.0, s.path("Qx0") + ": must be > 0");
  return d;
}

DimensionInputs resolve(const Dims& d, const DiscreteSpace& space, double p0, const RunOptions& options) {
  DimensionInputs out = default_dimensions(space);
  if (d.Q) out.Q = *d.Q;
  if (d.Qx0) out.Qx0 = *d.Qx0;
  if (options.snap_critical && std::abs(p0 - out.Qx0) <= options.snap_tolerance) out.Qx0 = p0;
  return out;
}

// ---- output helpers -----------------------------------------------------

std::string num(double v) { return format_double(v); }

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << '\n';
  }
  Csv& cell(const std::string& v) {
    out_ << (first_ ? "" : ",") << v;
    first_ = false;
    return *this;
  }
  Csv& cell(double v) { return cell(num(v)); }
  Csv& cell(std::size_t v) { return cell(std::to_string(v)); }
  Csv& cell(int v) { return cell(std::to_string(v)); }
  Csv& flag(bool v) { return cell(std::string(v ? "1" : "0")); }
  void end() {
    out_ << '\n';
    first_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

// Doubles go through format_double so the JSON text is reproducible.
Json jnum(double v) { return std::isfinite(v) ? Json(std::stod(num(v))) : Json(nullptr); }

Json jnums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---- tasks --------------------------------------------------------------

struct Context {
  const RunOptions& options;
  std::uint64_t seed;
  RunResult result;
  void add(std::string name, std::string content) { result.files.push_back({std::move(name), std::move(content)}); }
  void unconverged(const std::string& what) {
    result.status = ExitCode::not_converged;
    if (result.message.empty()) result.message = what + " did not converge";
  }
};

void task_dimension(Context& ctx, const SpaceSpec& spec, Section p) {
  const auto dim = coord_dim(spec);
  std::optional<std::vector<double>> x0_raw;
  if (p.has("x0")) x0_raw = p.numbers("x0");
  const auto K_radius = p.maybe_number("K_radius");
  const auto R_K_in = p.maybe_number("R_K");
  std::vector<std::vector<double>> points;
  if (p.has("points")) {
    const auto& arr = p.raw("points");
    require(arr.is_array() && !arr.empty(), "params.points: expected a non-empty array of points");
    for (const auto& pt : arr) {
      require(pt.is_array(), "params.points: each point must be an array");
      std::vector<double> x;
      for (const auto& c : pt) {
        require(c.is_number(), "params.points: coordinates must be numbers");
        x.push_back(c.get<double>());
      }
      points.push_back(std::move(x));
    }
  }
  const long radii_count = p.integer("radii_count", 8);
  const long K_samples = p.integer("K_samples", 256);
  const long metric_samples = p.integer("metric_samples", 200);
  require(radii_count >= 4, "params.radii_count: must be >= 4");
  require(K_samples >= 1 && metric_samples >= 1, "params: sample counts must be >= 1");
  if (K_radius) require(*K_radius > 0.0, "params.K_radius: must be > 0");
  if (R_K_in) require(*R_K_in > 0.0, "params.R_K: must be > 0");
  p.finish();

  const auto space = build_space(spec);
  const std::size_t d = dim ? dim : space.coord_dim();
  const std::vector<double> x0 = x0_raw.value_or(std::vector<double>(d, 0.0));
  require(x0.size() == d, "params.x0: wrong number of coordinates");
  for (const auto& x : points) require(x.size() == d, "params.points: wrong number of coordinates");
  const NodeId center = locate(space, x0);

  NodeSet K;
  if (K_radius) {
    K = closed_ball(space, center, *K_radius);
  } else {
    K.resize(space.size());
    std::iota(K.begin(), K.end(), NodeId{0});
  }
  std::mt19937_64 rng(ctx.seed);
  if (K.size() > static_cast<std::size_t>(K_samples)) {
    NodeSet pick;
    std::sample(K.begin(), K.end(), std::back_inserter(pick), K_samples, rng);
    K = std::move(pick);
  }
  NodeSet nodes;
  if (points.empty()) nodes.push_back(center);
  for (const auto& x : points) nodes.push_back(locate(space, x));
  const double R_K = R_K_in.value_or(space.params().doubling_radius);

  const auto report = analyze_dimensions(space, K, nodes, R_K, static_cast<std::size_t>(radii_count));
  const auto metric = verify_metric(space, static_cast<std::size_t>(metric_samples), ctx.seed);

  Json j;
  j["space"] = space.kind();
  j["nodes"] = space.size();
  j["C_K"] = jnum(report.C_K);
  j["Q"] = jnum(report.Q);
  for (std::size_t k = 0; k < report.Qx.size(); ++k) {
    j["Qx_" + std::to_string(k)] = jnum(report.Qx[k].Qx);
    j["Qx_node_" + std::to_string(k)] = report.Qx[k].node;
  }
  j["fit_residual"] = jnum(report.fit_residual);
  j["lower_C"] = jnum(report.lower_C);
  j["upper_C"] = jnum(report.upper_C);
  j["volume_bounds_pass"] = report.volume_bounds_pass;
  j["metric_pass"] = metric.pass();
  j["metric_max_relative_triangle_violation"] = jnum(metric.max_relative_triangle_violation);
  j["metric_max_edge_length_error"] = jnum(metric.max_edge_length_error);
  ctx.add("dimension.csv", report.to_csv());
  ctx.add("dimension.txt", report.to_key_value());
  ctx.add("dimension.json", dump(j));
}

void task_bounds(Context& ctx, const SpaceSpec& spec, Section p) {
  const auto x0_req = p.has("x0");
  std::vector<double> x0_in = x0_req ? p.numbers("x0") : std::vector<double>{};
  const auto rs = radii(p, "r_list");
  const auto Rs = radii(p, "R_list");
  const auto ps = exponents(p, "p0_list");
  const auto dims = dims_from(p);
  const auto R0_in = p.maybe_number("R0");
  if (R0_in) require(*R0_in > 0.0, "params.R0: must be > 0");
  p.finish();
  bool any = false;
  for (double r : rs)
    for (double R : Rs) any = any || r < R;
  require(any, "params: need at least one pair with r < R");

  const auto space = build_space(spec);
  const auto x0c = x0_req ? x0_in : std::vector<double>(space.coord_dim(), 0.0);
  require(x0c.size() == space.coord_dim(), "params.x0: wrong number of coordinates");
  const NodeId x0 = locate(space, x0c);
  const double R0 = R0_in.value_or(0.25 * inradius(space, x0));
  const BallMassProfile masses(space, x0);

  Csv csv({"p0", "r", "R", "regime", "lower", "upper", "Q", "Qx0", "mass_inner", "R0", "R_within_R0", "constants"});
  for (double p0 : ps)
    for (double R : Rs)
      for (double r : rs) {
        if (!(r < R)) continue;
        const auto d = resolve(dims, space, p0, ctx.options);
        BoundInputs in;
        in.r = r;
        in.R = R;
        in.p0 = p0;
        in.Q = d.Q;
        in.Qx0 = d.Qx0;
        in.mass_inner = masses.open(r);
        require(in.mass_inner > 0.0, "params.r_list: ball about x0 of radius " + num(r) + " holds no mass");
        const auto est = estimate_ring(in);
        std::string constants;
        for (const auto& [name, value] : est.constants)
          constants += (constants.empty() ? "" : ";") + name + "=" + num(value);
        csv.cell(p0).cell(r).cell(R).cell(std::string(to_string(est.regime))).cell(est.lower).cell(est.upper);
        csv.cell(d.Q).cell(d.Qx0).cell(in.mass_inner).cell(R0).flag(R <= R0 * (1.0 + 1e-12)).cell(constants);
        csv.end();
      }
  ctx.add("bounds.csv", csv.str());
}

void task_profile_energy(Context& ctx, const SpaceSpec& spec, Section p) {
  std::vector<double> x0_in = p.has("x0") ? p.numbers("x0") : std::vector<double>{};
  const double r = positive(p, "r");
  const double R = positive(p, "R");
  const double p0 = exponent(p, "p0");
  const std::string kind = p.string("kind", "auto");
  const auto Qi = p.maybe_number("Qi");
  const auto dims = dims_from(p);
  p.finish();
  require(r < R, "params: need r < R");
  require(kind == "auto" || kind == "power" || kind == "log", "params.kind: expected auto, power or log");
  if (Qi) require(kind == "power", "params.Qi: only meaningful with kind = power");

  const auto space = build_space(spec);
  const auto x0c = x0_in.empty() ? std::vector<double>(space.coord_dim(), 0.0) : x0_in;
  require(x0c.size() == space.coord_dim(), "params.x0: wrong number of coordinates");
  const NodeId x0 = locate(space, x0c);
  const auto d = resolve(dims, space, p0, ctx.options);
  const Regime regime = classify_regime(p0, d.Qx0);

  std::string chosen = kind;
  double base = 0.0;
  if (kind == "auto") chosen = regime == Regime::critical ? "log" : "power";
  if (chosen == "power") {
    base = Qi.value_or(regime == Regime::below ? d.Q : d.Qx0);
    require(std::abs(p0 - base) > 1e-12, "params: power profile needs p0 != Qi, use the log profile");
  }
  const RadialProfile profile = chosen == "log" ? log_profile(r, R) : power_profile(r, R, p0, base);
  const auto field = radialize(space, x0, profile, p0);
  const auto shells = dyadic_shell_energy(space, x0, field, p0, r, R);

  Csv top({"kind", "Qi", "r", "R", "p0", "regime", "k0", "energy_edge", "energy_node", "energy_analytic",
           "annulus_energy"});
  top.cell(chosen).cell(chosen == "log" ? std::string("") : num(base)).cell(r).cell(R).cell(p0);
  top.cell(std::string(to_string(regime))).cell(shells.k0).cell(field.energy_edge).cell(field.energy_node);
  top.cell(field.energy_analytic).cell(shells.annulus_energy).end();
  Csv rows({"k", "inner", "outer", "energy"});
  for (const auto& s : shells.shells) rows.cell(s.k).cell(s.inner).cell(s.outer).cell(s.energy).end();
  ctx.add("profile_energy.csv", top.str());
  ctx.add("profile_shells.csv", rows.str());
}

void task_solve(Context& ctx, const SpaceSpec& spec, Section p) {
  std::vector<double> x0_in = p.has("x0") ? p.numbers("x0") : std::vector<double>{};
  const double r = positive(p, "r");
  const double R = positive(p, "R");
  const double p0 = exponent(p, "p0");
  const auto opts = solver_options(p);
  const bool dump_field = p.boolean("dump_field", false);
  p.finish();
  require(r < R, "params: need r < R");

  const auto space = build_space(spec);
  const auto x0c = x0_in.empty() ? std::vector<double>(space.coord_dim(), 0.0) : x0_in;
  require(x0c.size() == space.coord_dim(), "params.x0: wrong number of coordinates");
  const NodeId x0 = locate(space, x0c);
  const auto res = relative_capacity(space, x0, r, R, p0, opts);

  Csv csv({"value", "iterations", "residual", "converged", "free_nodes", "unreachable_nodes", "energy_monotone",
           "range_violation"});
  csv.cell(res.value).cell(res.iterations).cell(res.residual).flag(res.converged).cell(res.free_nodes);
  csv.cell(res.unreachable_nodes).flag(res.energy_monotone).cell(res.range_violation).end();
  Json j;
  j["value"] = jnum(res.value);
  j["iterations"] = res.iterations;
  j["residual"] = jnum(res.residual);
  j["converged"] = res.converged;
  j["free_nodes"] = res.free_nodes;
  j["unreachable_nodes"] = res.unreachable_nodes;
  j["energy_monotone"] = res.energy_monotone;
  ctx.add("solve.csv", csv.str());
  ctx.add("solve.json", dump(j));
  if (dump_field) {
    Csv field({"id", "u"});
    for (NodeId i = 0; i < space.size(); ++i) field.cell(std::size_t{i}).cell(res.field.u[i]).end();
    ctx.add("field.csv", field.str());
  }
  if (!res.converged) ctx.unconverged("solve");
}

void task_sandwich(Context& ctx, const SpaceSpec& spec, Section p, bool sweep) {
  std::vector<double> x0_in = p.has("x0") ? p.numbers("x0") : std::vector<double>{};
  const auto rs = radii(p, "r_list");
  const double R = positive(p, "R");
  const auto ps = sweep ? exponents(p, "p0_list") : std::vector<double>{exponent(p, "p0")};
  const auto dims = dims_from(p);
  const auto opts = solver_options(p);
  p.finish();
  for (double r : rs) require(r < R, "params.r_list: every r must be < R");

  const auto space = build_space(spec);
  const auto x0c = x0_in.empty() ? std::vector<double>(space.coord_dim(), 0.0) : x0_in;
  require(x0c.size() == space.coord_dim(), "params.x0: wrong number of coordinates");
  const NodeId x0 = locate(space, x0c);

  Csv csv({"p0", "r", "R", "regime", "profile", "solved", "profile_energy", "lower", "upper", "solver_over_lower",
           "profile_over_upper", "solver_below_profile", "converged"});
  Json j;
  for (double p0 : ps) {
    double lo_min = std::numeric_limits<double>::infinity(), lo_max = 0.0;
    double up_min = std::numeric_limits<double>::infinity(), up_max = 0.0;
    bool below = true;
    for (double r : rs) {
      const auto rep = verify_sandwich(space, x0, r, R, p0, resolve(dims, space, p0, ctx.options), opts);
      csv.cell(p0).cell(r).cell(R).cell(rep.regime).cell(rep.profile).cell(rep.solver_value);
      csv.cell(rep.profile_energy).cell(rep.lower).cell(rep.upper).cell(rep.solver_over_lower);
      csv.cell(rep.profile_over_upper).flag(rep.solver_below_profile).flag(rep.converged).end();
      lo_min = std::min(lo_min, rep.solver_over_lower);
      lo_max = std::max(lo_max, rep.solver_over_lower);
      up_min = std::min(up_min, rep.profile_over_upper);
      up_max = std::max(up_max, rep.profile_over_upper);
      below = below && rep.solver_below_profile;
      if (!rep.converged) ctx.unconverged(sweep ? "regime-sweep" : "sandwich");
    }
    if (!sweep) {
      j["solver_below_profile"] = below;
      j["solver_over_lower_spread"] = jnum(lo_max / lo_min);
      j["profile_over_upper_spread"] = jnum(up_max / up_min);
    }
  }
  ctx.add(sweep ? "regime_sweep.csv" : "sandwich.csv", csv.str());
  if (!sweep) ctx.add("sandwich.json", dump(j));
}

void task_green(Context& ctx, const SpaceSpec& spec, Section p) {
  std::vector<double> x0_in = p.has("x0") ? p.numbers("x0") : std::vector<double>{};
  const double omega_radius = positive(p, "omega_radius");
  const double p0 = exponent(p, "p0");
  const auto rho = p.maybe_number("rho");
  std::vector<LevelPair> levels;
  if (p.has("levels")) {
    const auto& arr = p.raw("levels");
    require(arr.is_array(), "params.levels: expected an array of [alpha, beta] pairs");
    for (const auto& pair : arr) {
      require(pair.is_array() && pair.size() == 2 && pair[0].is_number() && pair[1].is_number(),
              "params.levels: expected [alpha, beta] pairs");
      const LevelPair lv{pair[0].get<double>(), pair[1].get<double>()};
      require(lv.alpha >= 0.0 && lv.alpha < lv.beta, "params.levels: need 0 <= alpha < beta");
      levels.push_back(lv);
    }
  }
  const bool fractions = p.boolean("fractions", true);
  const double band = p.number("band", 4.0);
  require(band >= 1.0, "params.band: must be >= 1");
  if (fractions)
    for (const auto& lv : levels) require(lv.beta <= 1.0, "params.levels: fractions must not exceed 1");
  const auto opts = solver_options(p);
  std::vector<double> h_list;
  std::optional<double> trend_Qx0;
  double critical_scale = 1.0;
  if (p.has("refinement")) {
    auto ref = p.child("refinement");
    h_list = radii(ref, "h_list");
    trend_Qx0 = ref.maybe_number("Qx0");
    critical_scale = ref.number("critical_scale", 1.0);
    ref.finish();
    require(h_list.size() >= 3, "params.refinement.h_list: need at least 3 levels");
    require(spec.generator != "file", "params.refinement: needs a generated space");
  }
  p.finish();

  const auto space = build_space(spec);
  const auto x0c = x0_in.empty() ? std::vector<double>(space.coord_dim(), 0.0) : x0_in;
  require(x0c.size() == space.coord_dim(), "params.x0: wrong number of coordinates");
  const NodeId x0 = locate(space, x0c);
  const auto green = build_green(space, ball(space, x0, omega_radius), x0, p0, rho, opts);
  const auto mp = maximum_principle_check(space, green);

  Csv field({"id", "G"});
  for (NodeId i = 0; i < space.size(); ++i) field.cell(std::size_t{i}).cell(green.G[i]).end();
  ctx.add("green_field.csv", field.str());

  Json j;
  j["max_G"] = jnum(green.max_G);
  j["rho"] = jnum(green.rho);
  j["cap_rho"] = jnum(green.cap_rho);
  j["converged"] = green.converged;
  j["iterations"] = green.iterations;
  j["max_edge_jump"] = jnum(green.max_edge_jump);
  j["maximum_principle_pass"] = mp.pass;
  j["strict_local_maxima"] = mp.strict_local_maxima;
  if (!green.converged) ctx.unconverged("green");

  if (!levels.empty()) {
    const auto rep = check_level_sets(space, green, levels, fractions, band, opts);
    Csv csv({"alpha", "beta", "skipped", "capacity", "ratio", "converged"});
    for (const auto& row : rep.rows) {
      csv.cell(row.levels.alpha).cell(row.levels.beta).flag(row.skipped).cell(row.capacity).cell(row.ratio);
      csv.flag(row.converged).end();
      if (!row.skipped && !row.converged) ctx.unconverged("level-set condenser");
    }
    ctx.add("green_levels.csv", csv.str());
    j["level_min_ratio"] = jnum(rep.min_ratio);
    j["level_max_ratio"] = jnum(rep.max_ratio);
    j["level_pass"] = rep.pass;
  }
  ctx.add("green.json", dump(j));

  if (!h_list.empty()) {
    std::vector<DiscreteSpace> spaces;
    for (double h : h_list) {
      SpaceSpec s = spec;
      s.h = h;
      spaces.push_back(build_space(s));
    }
    std::vector<std::reference_wrapper<const DiscreteSpace>> refs(spaces.begin(), spaces.end());
    const double Qx0 = trend_Qx0.value_or(resolve({}, space, p0, ctx.options).Qx0);
    const auto t = blowup_trend(refs, x0c, omega_radius, p0, Qx0, critical_scale, opts);
    Json tj;
    tj["regime"] = t.regime;
    tj["h"] = jnums(t.h);
    tj["max_G"] = jnums(t.max_G);
    tj["strictly_increasing"] = t.strictly_increasing;
    tj["growth_slope"] = jnum(t.growth_slope);
    tj["last_relative_change"] = jnum(t.last_relative_change);
    tj["pass"] = t.pass;
    ctx.add("green_trend.json", dump(tj));
  }
}

void task_singleton(Context& ctx, const SpaceSpec& spec, Section p) {
  std::vector<double> x0_in = p.has("x0") ? p.numbers("x0") : std::vector<double>{};
  const double p0 = exponent(p, "p0");
  const double R = positive(p, "R");
  std::vector<double> rs;
  require(p.has("radii") != p.has("k_max"), "params: give exactly one of radii or k_max");
  if (p.has("radii")) {
    rs = radii(p, "radii");
  } else {
    const long k_max = p.integer("k_max");
    require(k_max >= 2 && k_max <= 30, "params.k_max: must be in [2, 30]");
    for (long k = 1; k <= k_max; ++k) rs.push_back(R * std::ldexp(1.0, static_cast<int>(-k)));
  }
  const auto opts = solver_options(p);
  p.finish();
  for (std::size_t k = 1; k < rs.size(); ++k) require(rs[k] < rs[k - 1], "params.radii: must be strictly decreasing");
  require(rs.front() < R, "params.radii: must lie below R");

  const auto space = build_space(spec);
  const auto x0c = x0_in.empty() ? std::vector<double>(space.coord_dim(), 0.0) : x0_in;
  require(x0c.size() == space.coord_dim(), "params.x0: wrong number of coordinates");
  const NodeId x0 = locate(space, x0c);
  const auto lim = singleton_capacity_limit(space, x0, p0, R, rs, opts);

  Csv csv({"r", "capacity", "converged"});
  for (std::size_t k = 0; k < lim.radii.size(); ++k) {
    csv.cell(lim.radii[k]).cell(lim.capacities[k]).flag(lim.converged[k]).end();
    if (!lim.converged[k]) ctx.unconverged("singleton-limit");
  }
  Json j;
  j["limit"] = jnum(lim.limit);
  j["last_relative_change"] = jnum(lim.last_relative_change);
  j["non_increasing"] = lim.non_increasing;
  j["strictly_decreasing"] = lim.strictly_decreasing;
  j["trend"] = lim.trend;
  ctx.add("singleton.csv", csv.str());
  ctx.add("singleton.json", dump(j));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

void task_fit(Context& ctx, Section p) {
  const std::string path = p.string("csv");
  const std::string xc = p.string("x");
  const std::string yc = p.string("y");
  const std::string transform = p.string("x_transform", "none");
  const auto scale = p.maybe_number("scale");
  p.finish();
  require(transform == "none" || transform == "log_ratio", "params.x_transform: expected none or log_ratio");
  require((transform == "log_ratio") == scale.has_value(), "params.scale: required exactly for log_ratio");

  std::ifstream in(path);
  require(static_cast<bool>(in), "params.csv: cannot open '" + path + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "params.csv: empty file");
  const auto header = split(line);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    require(it != header.end(), "params: column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ix = col(xc), iy = col(yc);
  std::vector<double> xs, ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    require(cells.size() == header.size(), "params.csv: ragged row");
    try {
      double x = std::stod(cells[ix]);
      if (transform == "log_ratio") x = std::log(*scale / x);
      xs.push_back(x);
      ys.push_back(std::stod(cells[iy]));
    } catch (const std::logic_error&) {
      throw ConfigError("params.csv: non-numeric cell");
    }
  }
  require(xs.size() >= 4, "fit: need at least 4 points");
  for (std::size_t k = 0; k < xs.size(); ++k)
    require(xs[k] > 0.0 && ys[k] > 0.0, "fit: log-log fit needs positive data");
  const auto f = fit_loglog(xs, ys);
  Json j;
  j["points"] = xs.size();
  j["slope"] = jnum(f.slope);
  j["intercept"] = jnum(f.intercept);
  j["max_abs_residual"] = jnum(f.max_abs_residual);
  j["r_squared"] = jnum(f.r_squared);
  j["note"] = f.r_squared >= 0.99 ? "power law fits well" : "weak power law; read the slope as a trend only";
  ctx.add("fit.json", dump(j));
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

Json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

RunResult execute(const std::string& task, const Json& config, const RunOptions& options) {
  if (std::find(task_names().begin(), task_names().end(), task) == task_names().end())
    throw ConfigError("unknown task '" + task + "'");
  Section top(config, "config");
  if (top.has("task")) require(top.string("task") == task, "config.task: does not match the subcommand");
  std::uint64_t seed = 0;
  if (top.has("seed")) {
    const long s = top.integer("seed");
    require(s >= 0, "config.seed: must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  }
  if (options.seed) seed = *options.seed;
  Context ctx{options, seed, {}};
  if (task == "fit") {
    auto params = top.child("params");
    top.finish();
    task_fit(ctx, std::move(params));
    return std::move(ctx.result);
  }
  const auto spec = parse_space(top.child("space"));
  auto params = top.child("params");
  top.finish();
  if (task == "dimension") task_dimension(ctx, spec, std::move(params));
  else if (task == "bounds") task_bounds(ctx, spec, std::move(params));
  else if (task == "profile-energy") task_profile_energy(ctx, spec, std::move(params));
  else if (task == "solve") task_solve(ctx, spec, std::move(params));
  else if (task == "sandwich") task_sandwich(ctx, spec, std::move(params), false);
  else if (task == "regime-sweep") task_sandwich(ctx, spec, std::move(params), true);
  else if (task == "green") task_green(ctx, spec, std::move(params));
  else if (task == "singleton-limit") task_singleton(ctx, spec, std::move(params));
  return std::move(ctx.result);
}

int run(const std::string& task, const Json& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  try {
    result = execute(task, config, options);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return ExitCode::internal_error;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    std::filesystem::create_directories(options.out_dir);
    Json manifest;
    manifest["software"] = "ringcap";
    manifest["version"] = RINGCAP_VERSION;
    manifest["task"] = task;
    manifest["status"] = result.status;
    manifest["wall_time_seconds"] = wall;
    manifest["config"] = config;
    manifest["files"] = Json::array();
    for (const auto& f : result.files) {
      std::ofstream out(options.out_dir / f.name, std::ios::binary);
      out << f.content;
      if (!out) throw std::runtime_error("cannot write " + (options.out_dir / f.name).string());
      Json entry;
      entry["name"] = f.name;
      entry["bytes"] = f.content.size();
      entry["sha256"] = sha256_hex(f.content);
      manifest["files"].push_back(entry);
    }
    std::ofstream out(options.out_dir / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write manifest.json");
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return ExitCode::internal_error;
  }
  if (!options.quiet) {
    for (const auto& f : result.files) std::cout << (options.out_dir / f.name).string() << '\n';
    if (!result.message.empty()) std::cerr << result.message << '\n';
  }
  return result.status;
}

}  // namespace ringcap::runner
