#include "stepbunch/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stepbunch/asymptotics.hpp"
#include "stepbunch/discrete.hpp"
#include "stepbunch/experiments.hpp"

namespace stepbunch::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

const char* const kUsageText =
    "usage: stepbunch <command> --config <file.json> [--out <dir>] [--threads <n>]\n"
    "commands: kernel, energy, minimize, evolve, evolve-steps, consistency, quadrature, scaling, evidence\n";

const std::set<std::string> kCommands{"kernel",      "energy",     "minimize", "evolve",  "evolve-steps",
                                      "consistency", "quadrature", "scaling",  "evidence"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- config access --------------------------------------------------------

class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigurationError("config: '" + path_ + "' must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigurationError("config: unknown key '" + where(k) + "'");
  }

  bool has(const char* key) const { return j_.contains(key); }

  double number(const char* key, double def) const {
    if (!j_.contains(key)) return def;
    return number(key);
  }
  double number(const char* key) const {
    if (!j_.contains(key)) throw ConfigurationError("config: missing '" + where(key) + "'");
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigurationError("config: '" + where(key) + "' must be a number");
    return v.get<double>();
  }
  long integer(const char* key, long def) const {
    if (!j_.contains(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigurationError("config: '" + where(key) + "' must be an integer");
    return v.get<long>();
  }
  bool boolean(const char* key, bool def) const {
    if (!j_.contains(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigurationError("config: '" + where(key) + "' must be a boolean");
    return v.get<bool>();
  }
  std::string string(const char* key, const std::string& def) const {
    if (!j_.contains(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigurationError("config: '" + where(key) + "' must be a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const char* key, std::vector<double> def) const {
    if (!j_.contains(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigurationError("config: '" + where(key) + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigurationError("config: '" + where(key) + "' must contain numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Section sub(const char* key) const {
    static const Json empty = Json::object();
    return j_.contains(key) ? Section(j_.at(key), where(key)) : Section(empty, where(key));
  }
  const Json& raw() const { return j_; }

 private:
  std::string where(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const Json& j_;
  std::string path_;
};

std::size_t grid_size(const Section& cfg, long def) {
  const auto g = cfg.sub("grid");
  g.allow({"N"});
  const long N = g.integer("N", def);
  if (N < 16 || !is_power_of_two(static_cast<std::size_t>(N)))
    throw ConfigurationError("config: grid.N must be a power of two >= 16");
  return static_cast<std::size_t>(N);
}

PhysicalParams physical_params(const Section& s) {
  PhysicalParams p;
  p.alpha1 = s.number("alpha1", p.alpha1);
  p.alpha2 = s.number("alpha2", p.alpha2);
  p.lattice_a = s.number("a", p.lattice_a);
  p.m = s.number("m", p.m);
  p.n = s.number("n", p.n);
  validate(p);
  return p;
}

Json physical_json(const PhysicalParams& p) {
  return Json{{"alpha1", p.alpha1}, {"alpha2", p.alpha2}, {"a", p.lattice_a}, {"m", p.m}, {"n", p.n}};
}

Json model_json(const ModelParams& p) {
  return Json{{"m", p.m}, {"n", p.n}, {"gamma", p.gamma}, {"epsilon", p.epsilon}, {"A", p.A}};
}

// Exactly one of "model" / "physical"; the resolved model goes into `resolved`.
ModelParams model_params(const Section& cfg, Json& resolved) {
  const bool hm = cfg.has("model"), hp = cfg.has("physical");
  if (hm == hp) throw ConfigurationError("config: exactly one of 'model' or 'physical' is required");
  ModelParams p;
  if (hm) {
    const auto s = cfg.sub("model");
    s.allow({"m", "n", "gamma", "epsilon", "A"});
    p.m = s.number("m", p.m);
    p.n = s.number("n", p.n);
    p.gamma = s.number("gamma", p.gamma);
    p.epsilon = s.number("epsilon", p.epsilon);
    p.A = s.number("A", p.A);
    validate(p);
  } else {
    const auto s = cfg.sub("physical");
    s.allow({"alpha1", "alpha2", "a", "m", "n", "A"});
    const auto ph = physical_params(s);
    p = derive_model_params(ph, s.number("A", 1.0));
    resolved["physical"] = physical_json(ph);
    resolved["physical"]["A"] = p.A;
  }
  resolved["model"] = model_json(p);
  return p;
}

MinimizeOptions minimize_options(const Section& cfg, Json& resolved, MinimizeOptions o) {
  const auto s = cfg.sub("solver");
  s.allow({"max_iters", "grad_tol", "step_init", "armijo_c", "backtrack_factor", "rearrange_every", "rho_floor",
           "parity_polish"});
  o.max_iters = static_cast<int>(s.integer("max_iters", o.max_iters));
  o.grad_tol = s.number("grad_tol", o.grad_tol);
  o.step_init = s.number("step_init", o.step_init);
  o.armijo_c = s.number("armijo_c", o.armijo_c);
  o.backtrack_factor = s.number("backtrack_factor", o.backtrack_factor);
  o.rearrange_every = static_cast<int>(s.integer("rearrange_every", o.rearrange_every));
  o.rho_floor = s.number("rho_floor", o.rho_floor);
  o.parity_polish = s.boolean("parity_polish", o.parity_polish);
  o.validate();
  resolved["solver"] = Json{{"max_iters", o.max_iters},         {"grad_tol", o.grad_tol},
                            {"step_init", o.step_init},         {"armijo_c", o.armijo_c},
                            {"backtrack_factor", o.backtrack_factor}, {"rearrange_every", o.rearrange_every},
                            {"rho_floor", o.rho_floor},         {"parity_polish", o.parity_polish}};
  return o;
}

GridProfile initial_profile(const Section& cfg, const ModelParams& p, std::size_t N, std::uint64_t seed,
                            Json& resolved) {
  std::string type = "perturbed";
  double amplitude = 0.01;
  long mode = 1;
  std::string path;
  if (cfg.has("init") && cfg.raw().at("init").is_string()) {
    type = cfg.raw().at("init").get<std::string>();
  } else if (cfg.has("init")) {
    const auto s = cfg.sub("init");
    s.allow({"type", "amplitude", "mode", "profile"});
    type = s.string("type", type);
    amplitude = s.number("amplitude", amplitude);
    mode = s.integer("mode", mode);
    path = s.string("profile", "");
  }
  Json r{{"type", type}};
  GridProfile out = GridProfile::uniform(N, p.A);
  if (type == "uniform") {
  } else if (type == "ansatz") {
    out = ansatz_profile(p, N);
  } else if (type == "perturbed") {
    if (!(std::abs(amplitude) < 1.0)) throw ConfigurationError("config: init.amplitude must lie in (-1, 1)");
    std::vector<double> rho(N);
    for (std::size_t j = 0; j < N; ++j)
      rho[j] = p.A * (1.0 + amplitude * std::cos(2.0 * std::numbers::pi * mode * grid_x(N, j)));
    out = GridProfile(std::move(rho), p.A);
    r["amplitude"] = amplitude;
    r["mode"] = mode;
  } else if (type == "random") {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> rho(N);
    for (auto& v : rho) v = u(rng);
    out = project_feasible(rho, p.A);
  } else if (type == "profile") {
    if (path.empty()) throw ConfigurationError("config: init.profile path is required");
    out = read_profile_csv(fs::path(path));
    if (out.size() != N) throw ConfigurationError("config: init profile size differs from grid.N");
    if (std::abs(out.mean_slope() - p.A) > 1e-12 * std::max(1.0, p.A))
      throw ConfigurationError("config: init profile mean differs from A");
    r["profile"] = path;
  } else {
    throw ConfigurationError("config: init.type must be uniform, ansatz, perturbed, random or profile");
  }
  resolved["init"] = r;
  return out;
}

// ---- output ---------------------------------------------------------------

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {}

  std::string write(const std::string& name, const std::string& content) {
    const fs::path target = dir_ / name;
    fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw ConfigurationError("cannot write " + tmp.string());
      os << content;
      if (!os) throw ConfigurationError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
    files_.push_back(Json{{"file", name}, {"fnv1a", hex64(fnv1a64(content))}});
    return target.string();
  }

  const Json& files() const { return files_; }

 private:
  fs::path dir_;
  Json files_ = Json::array();
};

std::string profile_csv(const GridProfile& p) { return profile_to_csv(p); }

struct Context {
  Section cfg;
  Json resolved = Json::object();
  Json results = Json::object();
  Json summary = Json::object();  // extra fields for the stdout line
  Writer writer;
  int threads = 1;
  std::string report_name = "result.json";
};

void energy_fields(Json& j, const EnergyBreakdown& e) {
  j["nonlocal_tilde"] = e.nonlocal_tilde;
  j["null_lagrangian"] = e.null_lagrangian;
  j["local"] = e.local;
  j["total"] = e.total;
}

// ---- commands -------------------------------------------------------------

void cmd_kernel(Context& c) {
  c.cfg.allow({"model", "physical", "grid"});
  const auto p = model_params(c.cfg, c.resolved);
  const std::size_t N = grid_size(c.cfg, 1024);
  c.resolved["grid"] = Json{{"N", N}};
  std::string csv = "z,K,Kprime\n";
  for (std::size_t j = 0; j < N; ++j) {
    const double z = -0.5 + (static_cast<double>(j) + 0.5) / static_cast<double>(N);
    csv += num(z) + "," + num(kernel_value(p.m, z)) + "," + num(kernel_derivative(p.m, z)) + "\n";
  }
  c.writer.write("kernel.csv", csv);
  const auto K = build_kernel_table(p.m, N);
  c.results["l1_norm"] = K.l1_norm;
  c.summary["l1_norm"] = K.l1_norm;
}

void cmd_energy(Context& c) {
  c.cfg.allow({"model", "physical", "profile"});
  const auto p = model_params(c.cfg, c.resolved);
  const std::string path = c.cfg.string("profile", "");
  if (path.empty()) throw ConfigurationError("config: 'profile' (CSV path) is required");
  c.resolved["profile"] = path;
  const auto prof = read_profile_csv(fs::path(path));
  if (std::abs(prof.mean_slope() - p.A) > 1e-12 * std::max(1.0, p.A))
    throw ConfigurationError("energy: profile mean differs from model.A");
  const auto K = build_kernel_table(p.m, prof.size());
  const auto e = total_energy(prof, K, p);
  energy_fields(c.results, e);
  energy_fields(c.summary, e);
  c.report_name = "energy.json";
}

void cmd_minimize(Context& c) {
  c.cfg.allow({"model", "physical", "grid", "init", "solver", "seed"});
  const auto p = model_params(c.cfg, c.resolved);
  const std::size_t N = grid_size(c.cfg, 1024);
  c.resolved["grid"] = Json{{"N", N}};
  const auto seed = static_cast<std::uint64_t>(c.cfg.integer("seed", 0));
  c.resolved["seed"] = seed;
  auto opts = minimize_options(c.cfg, c.resolved, MinimizeOptions{});
  opts.seed = seed;
  const auto init = initial_profile(c.cfg, p, N, seed, c.resolved);
  const auto K = build_kernel_table(p.m, N);
  const auto res = minimize_energy(init, K, p, opts);
  c.writer.write("profile.csv", profile_csv(res.profile));
  Json e;
  energy_fields(e, res.energy);
  c.results["energy"] = e;
  c.results["iterations"] = res.iterations;
  c.results["converged"] = res.converged;
  c.results["el_residual"] = res.el_residual;
  c.results["R0"] = res.support_radius;
  c.results["pg_norm"] = res.pg_norm;
  c.summary["energy"] = res.energy.total;
  c.summary["iterations"] = res.iterations;
  c.summary["converged"] = res.converged;
  c.summary["R0"] = res.support_radius;
}

void cmd_evolve(Context& c) {
  c.cfg.allow({"model", "physical", "grid", "init", "evolve", "seed"});
  const auto p = model_params(c.cfg, c.resolved);
  const std::size_t N = grid_size(c.cfg, 256);
  c.resolved["grid"] = Json{{"N", N}};
  const auto seed = static_cast<std::uint64_t>(c.cfg.integer("seed", 0));
  c.resolved["seed"] = seed;
  const auto ev = c.cfg.sub("evolve");
  ev.allow({"T", "dt", "snapshot_interval", "energy_tol", "max_halvings"});
  const double T = ev.number("T", 1.0), dt = ev.number("dt", 1e-4);
  const double interval = ev.number("snapshot_interval", 0.0);
  EvolveOptions eo;
  eo.energy_tol = ev.number("energy_tol", eo.energy_tol);
  eo.max_halvings = static_cast<int>(ev.integer("max_halvings", eo.max_halvings));
  if (!(interval >= 0.0)) throw ConfigurationError("config: evolve.snapshot_interval must be >= 0");
  c.resolved["evolve"] = Json{{"T", T},
                              {"dt", dt},
                              {"snapshot_interval", interval},
                              {"energy_tol", eo.energy_tol},
                              {"max_halvings", eo.max_halvings}};
  const auto init = initial_profile(c.cfg, p, N, seed, c.resolved);
  const auto K = build_kernel_table(p.m, N);

  std::vector<std::pair<double, std::string>> snaps;
  double next = interval;
  eo.observer = [&](double t, const GridProfile& q) {
    if (interval > 0.0 && t >= next * (1.0 - 1e-12)) {
      snaps.emplace_back(t, profile_csv(q));
      while (next <= t * (1.0 + 1e-12)) next += interval;
    }
  };
  const auto out = evolve_continuum(init, K, p, T, dt, eo);
  Json times = Json::array();
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "snapshots/snapshot_%05zu.csv", i);
    c.writer.write(name, snaps[i].second);
    times.push_back(snaps[i].first);
  }
  c.writer.write("profile.csv", profile_csv(out));
  Json e;
  const auto en = total_energy(out, K, p);
  energy_fields(e, en);
  c.results["energy"] = e;
  c.results["initial_energy"] = total_energy(init, K, p).total;
  c.results["snapshot_times"] = times;
  c.results["R0"] = detect_support(out);
  c.summary["energy"] = en.total;
  c.summary["snapshots"] = snaps.size();
}

void cmd_evolve_steps(Context& c) {
  c.cfg.allow({"physical", "steps", "dynamics"});
  if (!c.cfg.has("physical")) throw ConfigurationError("config: 'physical' is required for evolve-steps");
  const auto ps = c.cfg.sub("physical");
  ps.allow({"alpha1", "alpha2", "a", "m", "n"});
  const auto p = physical_params(ps);
  c.resolved["physical"] = physical_json(p);
  const double le = equilibrium_spacing(p);

  const auto st = c.cfg.sub("steps");
  st.allow({"Ns", "spacing", "L", "positions", "perturbation"});
  std::vector<double> x;
  double L = 0.0;
  if (st.has("positions")) {
    x = st.numbers("positions", {});
    L = st.number("L");
  } else {
    const long Ns = st.integer("Ns", 16);
    if (Ns < 2) throw ConfigurationError("config: steps.Ns must be >= 2");
    const double spacing = st.number("spacing", 10.0 * le);
    if (!(spacing > 0.0)) throw ConfigurationError("config: steps.spacing must be positive");
    L = Ns * spacing;
    const auto pert = st.sub("perturbation");
    pert.allow({"amplitude", "mode"});
    const double amp = pert.number("amplitude", 0.01);
    const long mode = pert.integer("mode", 1);
    if (!(std::abs(amp) < 0.5)) throw ConfigurationError("config: steps.perturbation.amplitude must lie in (-0.5, 0.5)");
    x.resize(Ns);
    for (long i = 0; i < Ns; ++i)
      x[i] = spacing * (i + amp * std::sin(2.0 * std::numbers::pi * mode * i / static_cast<double>(Ns)));
  }
  StepConfiguration cfg0(L, x, p.lattice_a);
  c.resolved["steps"] = Json{{"L", L}, {"positions", x}};

  const auto dy = c.cfg.sub("dynamics");
  dy.allow({"t_end", "dt_init", "rel_tol", "min_spacing_stop", "snapshot_every", "sigma_tol"});
  DynamicsOptions o;
  o.t_end = dy.number("t_end", o.t_end);
  o.dt_init = dy.number("dt_init", o.dt_init);
  o.rel_tol = dy.number("rel_tol", o.rel_tol);
  o.min_spacing_stop = dy.number("min_spacing_stop", 1e-3 * le);
  o.snapshot_every = static_cast<int>(dy.integer("snapshot_every", 1));
  o.sigma_tol = dy.number("sigma_tol", o.sigma_tol);
  o.threads = c.threads;
  o.validate();
  c.resolved["dynamics"] = Json{{"t_end", o.t_end},
                                {"dt_init", o.dt_init},
                                {"rel_tol", o.rel_tol},
                                {"min_spacing_stop", o.min_spacing_stop},
                                {"snapshot_every", o.snapshot_every},
                                {"sigma_tol", o.sigma_tol}};

  const auto tr = step_dynamics(cfg0, p, o);
  std::string csv = "t";
  for (std::size_t i = 0; i < x.size(); ++i) csv += ",x_" + std::to_string(i);
  csv += "\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    csv += num(tr.times[k]);
    for (double v : tr.positions[k]) csv += "," + num(v);
    csv += "\n";
  }
  c.writer.write("trajectory.csv", csv);
  const auto& last = tr.positions.back();
  double ms = last.front() + L - last.back();
  for (std::size_t i = 0; i + 1 < last.size(); ++i) ms = std::min(ms, last[i + 1] - last[i]);
  c.results["t_final"] = tr.times.back();
  c.results["stopped_early"] = tr.stopped_early;
  c.results["accepted_steps"] = tr.accepted_steps;
  c.results["rejected_steps"] = tr.rejected_steps;
  c.results["final_min_spacing"] = ms;
  c.results["equilibrium_spacing"] = le;
  c.summary["t_final"] = tr.times.back();
  c.summary["stopped_early"] = tr.stopped_early;
  c.summary["final_min_spacing"] = ms;
}

std::vector<double> dyadic(int lo, int hi) {
  std::vector<double> a;
  for (int k = lo; k <= hi; ++k) a.push_back(std::ldexp(1.0, -k));
  return a;
}

void cmd_consistency(Context& c) {
  c.cfg.allow({"physical", "surface", "a_list", "xi"});
  if (!c.cfg.has("physical")) throw ConfigurationError("config: 'physical' is required for consistency");
  const auto ps = c.cfg.sub("physical");
  ps.allow({"alpha1", "alpha2", "a", "m", "n"});
  const auto p = physical_params(ps);
  const auto ss = c.cfg.sub("surface");
  ss.allow({"A", "delta", "harmonic"});
  TestSurface ts;
  ts.A = ss.number("A", 1.0);
  ts.delta = ss.number("delta", 0.05);
  ts.harmonic = static_cast<int>(ss.integer("harmonic", 1));
  ts.validate();
  const auto a_list = c.cfg.numbers("a_list", dyadic(4, 9));
  const double xi = c.cfg.number("xi", 0.25);
  c.resolved["physical"] = physical_json(p);
  c.resolved["surface"] = Json{{"A", ts.A}, {"delta", ts.delta}, {"harmonic", ts.harmonic}};
  c.resolved["a_list"] = a_list;
  c.resolved["xi"] = xi;

  const auto rows = consistency_experiment(ts, p, a_list, xi);
  std::string csv = "a,mu_atomistic,mu_continuum,ratio\n";
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv += num(r.a) + "," + num(r.mu_atomistic) + "," + num(r.mu_continuum) + "," + num(r.ratio) + "\n";
    if (i > 0 && !(std::abs(r.ratio) < std::abs(rows[i - 1].ratio))) decreasing = false;
  }
  c.writer.write("consistency.csv", csv);
  c.results["gamma"] = rows.front().gamma;
  c.results["strictly_decreasing"] = decreasing;
  c.summary["strictly_decreasing"] = decreasing;
}

void cmd_quadrature(Context& c) {
  c.cfg.allow({"m", "p", "a_list", "leading_correction"});
  const double m = c.cfg.number("m", 0.0);
  const long p = c.cfg.integer("p", 2);
  const bool lead = c.cfg.boolean("leading_correction", true);
  const auto a_list = c.cfg.numbers("a_list", dyadic(4, 12));
  if (p < 1 || p > 4) throw ConfigurationError("config: p must lie in 1..4");
  c.resolved = Json{{"m", m}, {"p", p}, {"a_list", a_list}, {"leading_correction", lead}};
  const auto rows = quadrature_convergence(m, static_cast<int>(p), a_list, lead);
  std::string csv = "a,error,observed_order\n";
  double min_order = 1e300;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += num(rows[i].a) + "," + num(rows[i].error) + "," + (i > 0 ? num(rows[i].observed_order) : "") + "\n";
    if (i > 0) min_order = std::min(min_order, rows[i].observed_order);
  }
  c.writer.write("quadrature.csv", csv);
  if (rows.size() > 1) {
    c.results["min_observed_order"] = min_order;
    c.summary["min_observed_order"] = min_order;
  }
}

void cmd_scaling(Context& c) {
  c.cfg.allow({"model", "physical", "grid", "eps_list", "solver", "exploratory", "seed"});
  const auto p = model_params(c.cfg, c.resolved);
  const std::size_t N = grid_size(c.cfg, 4096);
  c.resolved["grid"] = Json{{"N", N}};
  const auto eps = c.cfg.numbers("eps_list", {1e-2, 3e-3, 1e-3, 3e-4, 1e-4});
  c.resolved["eps_list"] = eps;
  ScalingOptions so;
  so.minimize = minimize_options(c.cfg, c.resolved, so.minimize);
  so.allow_nonzero_m = c.cfg.boolean("exploratory", false);
  so.threads = c.threads;
  c.resolved["exploratory"] = so.allow_nonzero_m;
  const auto rep = scaling_sweep(p, eps, N, so);

  std::string csv = "epsilon,E_min,R0,iterations\n";
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    csv += num(r.epsilon) + "," + num(r.E_min) + "," + num(r.R0) + "," + std::to_string(r.iterations) + "\n";
    rows.push_back(Json{{"epsilon", r.epsilon},
                        {"E_min", r.E_min},
                        {"R0", r.R0},
                        {"iterations", r.iterations},
                        {"winner", r.winner},
                        {"E_ansatz", r.E_ansatz},
                        {"E_uniform", r.E_uniform},
                        {"converged", r.converged}});
  }
  c.writer.write("scaling.csv", csv);
  c.results["rows"] = rows;
  c.results["fitted_slope"] = rep.fitted_slope;
  c.results["fitted_intercept"] = rep.fitted_intercept;
  c.results["residual"] = rep.residual;
  c.results["band"] = rep.band;
  c.summary["fitted_slope"] = rep.fitted_slope;
  c.summary["band"] = rep.band;
}

void cmd_evidence(Context& c) {
  c.cfg.allow({"model", "physical", "grid", "inits", "seed", "solver"});
  const auto p = model_params(c.cfg, c.resolved);
  const std::size_t N = grid_size(c.cfg, 1024);
  c.resolved["grid"] = Json{{"N", N}};
  EvidenceOptions eo;
  eo.inits = static_cast<int>(c.cfg.integer("inits", 5));
  eo.seed = static_cast<std::uint64_t>(c.cfg.integer("seed", 1));
  eo.threads = c.threads;
  eo.minimize = minimize_options(c.cfg, c.resolved, eo.minimize);
  c.resolved["inits"] = eo.inits;
  c.resolved["seed"] = eo.seed;
  const auto rep = bunching_evidence(p, N, eo);
  Json runs = Json::array();
  for (const auto& r : rep.runs)
    runs.push_back(Json{{"seed", r.seed},
                        {"energy", r.energy},
                        {"symmetry_defect", r.symmetry_defect},
                        {"rearrangement_defect", r.rearrangement_defect},
                        {"el_residual", r.el_residual},
                        {"conv_sup", r.conv_sup},
                        {"R0", r.R0},
                        {"iterations", r.iterations},
                        {"converged", r.converged}});
  c.results["runs"] = runs;
  c.results["energy_spread"] = rep.energy_spread;
  c.results["max_symmetry_defect"] = rep.max_symmetry_defect;
  c.results["max_rearrangement_defect"] = rep.max_rearrangement_defect;
  c.results["max_relative_el_residual"] = rep.max_relative_el_residual;
  c.summary["energy_spread"] = rep.energy_spread;
  c.summary["max_symmetry_defect"] = rep.max_symmetry_defect;
  c.summary["max_rearrangement_defect"] = rep.max_rearrangement_defect;
  c.report_name = "evidence.json";
}

const std::map<std::string, std::function<void(Context&)>> kHandlers{
    {"kernel", cmd_kernel},           {"energy", cmd_energy},     {"minimize", cmd_minimize},
    {"evolve", cmd_evolve},           {"evolve-steps", cmd_evolve_steps}, {"consistency", cmd_consistency},
    {"quadrature", cmd_quadrature},   {"scaling", cmd_scaling},   {"evidence", cmd_evidence}};

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

int fail(std::ostream& out, std::ostream& err, const std::string& command, int code, const std::string& kind,
         const std::string& msg) {
  err << "stepbunch " << command << ": " << msg << "\n";
  out << Json{{"status", "error"}, {"command", command}, {"kind", kind}, {"message", msg}}.dump() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || !kCommands.count(args[0])) {
    if (!args.empty() && args[0] != "--help" && args[0] != "-h") err << "unknown command '" << args[0] << "'\n";
    err << kUsageText;
    return kUsage;
  }
  const std::string command = args[0];

  CLI::App app{"stepbunch " + command};
  std::string config_path, out_dir = ".";
  int threads = 0;
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);
  // `kernel dump` is accepted as a synonym for `kernel`.
  std::vector<std::string> extra;
  if (command == "kernel") app.add_option("mode", extra)->check(CLI::IsMember({"dump"}));
  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    err << app.help() << kUsageText;
    return kUsage;
  } catch (const CLI::ParseError& e) {
    return fail(out, err, command, kValidation, "usage", e.what());
  }
  if (threads == 0) {
    if (const char* env = std::getenv("STEPBUNCH_THREADS")) threads = std::atoi(env);
  }
  threads = std::max(threads, 1);

  std::string text;
  try {
    std::ifstream is(config_path, std::ios::binary);
    if (!is) throw ConfigurationError("cannot open config file '" + config_path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    text = ss.str();
    Json cfg;
    try {
      cfg = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      std::string what = e.what();
      if (const auto k = what.find(": "); k != std::string::npos) what = what.substr(k + 2);
      if (what.rfind("parse error", 0) == 0) what = what.substr(what.find(": ") + 2);
      throw ConfigurationError("config parse error at " + line_column(text, e.byte) + ": " + what);
    }

    Context ctx{Section(cfg, ""), Json::object(), Json::object(), Json::object(), Writer(out_dir), threads};
    kHandlers.at(command)(ctx);

    Json report;
    report["command"] = command;
    report["config"] = ctx.resolved;
    report["config_fnv1a"] = hex64(fnv1a64(text));
    report["results"] = ctx.results;
    report["outputs"] = ctx.writer.files();
    const std::string hash = hex64(fnv1a64(report.dump()));
    report["hash"] = hash;
    const std::string report_path = ctx.writer.write(ctx.report_name, report.dump(2) + "\n");

    Json summary{{"status", "ok"}, {"command", command}};
    for (auto& [k, v] : ctx.summary.items()) summary[k] = v;
    Json files = Json::array();
    for (const auto& f : ctx.writer.files()) files.push_back((fs::path(out_dir) / f["file"].get<std::string>()).string());
    summary["outputs"] = files;
    summary["report"] = report_path;
    summary["hash"] = hash;
    out << summary.dump() << "\n";
    return kOk;
  } catch (const ValidationError& e) {
    return fail(out, err, command, kValidation, "validation", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(out, err, command, kValidation, "validation", e.what());
  } catch (const TopologyError& e) {
    return fail(out, err, command, kNumerical, "numerical", e.what());
  } catch (const NumericalError& e) {
    return fail(out, err, command, kNumerical, "numerical", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(out, err, command, kValidation, "io", e.what());
  } catch (const std::exception& e) {
    return fail(out, err, command, kNumerical, "internal", e.what());
  }
}

}  // namespace stepbunch::cli
