#include "volterra/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "volterra/bessel.hpp"
#include "volterra/coefficients.hpp"
#include "volterra/driver.hpp"
#include "volterra/kernel.hpp"
#include "volterra/solver.hpp"
#include "volterra/stats.hpp"
#include "volterra/verify.hpp"
#include "volterra/yw.hpp"

#ifndef VOLTERRA_LAB_BUILD
#define VOLTERRA_LAB_BUILD "unknown"
#endif

namespace volterra::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands{"densities", "simulate",     "lift",  "yw-table",
                                         "verify-lemmas", "uniqueness", "dspde"};

struct XGrid {
  double a, b;
  std::size_t n;
};

XGrid parse_x_grid(const std::string& s) {
  std::istringstream in(s);
  XGrid g{};
  char c1 = 0, c2 = 0;
  long n = 0;
  if (!(in >> g.a >> c1 >> g.b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || !in.eof() ||
      !std::isfinite(g.a) || !std::isfinite(g.b))
    throw std::invalid_argument("x_grid must look like a:b:n with n >= 1, got '" + s + "'");
  g.n = static_cast<std::size_t>(n);
  return g;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = {{"command", c.command},
                      {"alpha", c.alpha},
                      {"xi", c.xi},
                      {"c", c.c},
                      {"drift_a", c.drift_a},
                      {"drift_b", c.drift_b},
                      {"x0", c.x0},
                      {"T", c.T},
                      {"base_steps", c.base_steps},
                      {"level", c.level},
                      {"seeds", c.seeds},
                      {"first_seed", c.first_seed},
                      {"x_max", c.x_max},
                      {"space_nodes", c.space_nodes},
                      {"kernel_normalization", c.kernel_normalization},
                      {"out_dir", c.out_dir},
                      {"format", c.format},
                      {"force", c.force},
                      {"t", c.t},
                      {"x_grid", c.x_grid},
                      {"n_max", c.n_max},
                      {"eta", c.eta},
                      {"iterations", c.iterations}};
  if (c.coefficients) j["coefficients"] = *c.coefficients;
  return j;
}

RunConfig apply_json(RunConfig c, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "command") continue;
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "xi") c.xi = v.get<double>();
      else if (key == "c") c.c = v.get<double>();
      else if (key == "drift_a") c.drift_a = v.get<double>();
      else if (key == "drift_b") c.drift_b = v.get<double>();
      else if (key == "x0") c.x0 = v.get<double>();
      else if (key == "T") c.T = v.get<double>();
      else if (key == "base_steps") c.base_steps = v.get<std::size_t>();
      else if (key == "level") c.level = v.get<int>();
      else if (key == "seeds") c.seeds = v.get<std::size_t>();
      else if (key == "first_seed") c.first_seed = v.get<std::uint64_t>();
      else if (key == "x_max") c.x_max = v.get<double>();
      else if (key == "space_nodes") c.space_nodes = v.get<std::size_t>();
      else if (key == "kernel_normalization") c.kernel_normalization = v.get<std::string>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "force") c.force = v.get<bool>();
      else if (key == "t") c.t = v.get<double>();
      else if (key == "x_grid") c.x_grid = v.get<std::string>();
      else if (key == "n_max") c.n_max = v.get<int>();
      else if (key == "eta") c.eta = v.get<double>();
      else if (key == "iterations") c.iterations = v.get<int>();
      else if (key == "coefficients") c.coefficients = v;
      else throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end())
    fail("unknown command '" + c.command + "'");
  if (!(c.alpha >= 0.0 && c.alpha < 0.5)) fail("alpha must lie in [0, 0.5)");
  if (!(c.T > 0.0) || !std::isfinite(c.T)) fail("T must be positive");
  if (c.base_steps < 2) fail("base_steps must be >= 2");
  if (c.level < 0) fail("level must be >= 0");
  if (c.level > 16 && !c.force) fail("level > 16 exceeds the desk-scale guard (use --force)");
  if (c.level > 30) fail("level must be <= 30");
  if (c.seeds < 1) fail("seeds must be >= 1");
  if (!(c.x_max > 0.0)) fail("x_max must be positive");
  if (c.space_nodes < 3) fail("space_nodes must be >= 3");
  if (c.format != "csv" && c.format != "json") fail("format must be csv or json");
  if (c.iterations < 3) fail("iterations must be >= 3");
  if (c.n_max < 1) fail("n_max must be >= 1");
  parse_normalization(c.kernel_normalization);
  parse_x_grid(c.x_grid);
  if (!(c.t > 0.0)) fail("t must be positive");
  const bool needs_density = c.command == "densities" || c.command == "lift" || c.command == "dspde" ||
                             c.command == "verify-lemmas";
  if (needs_density && c.alpha == 0.0) fail(c.command + " needs alpha > 0 (the density family is disabled at alpha = 0)");
  const bool needs_coefficients = c.command == "simulate" || c.command == "lift" || c.command == "uniqueness" ||
                                  c.command == "dspde";
  if (needs_coefficients) {
    if (c.coefficients) coefficients_from_json(*c.coefficients);
    else if (!(c.xi >= 0.5 && c.xi <= 1.0)) fail("xi must lie in [0.5, 1]");
  }
}

std::vector<std::uint64_t> seed_list(const RunConfig& c) {
  std::vector<std::uint64_t> s(c.seeds);
  for (std::size_t i = 0; i < c.seeds; ++i) s[i] = c.first_seed + i;
  return s;
}

namespace {

CoefficientPair make_pair(const RunConfig& c) {
  if (c.coefficients) return coefficients_from_json(*c.coefficients);
  return builtin_power_diffusion(c.xi, c.c, c.drift_a, c.drift_b);
}

class Artifacts {
 public:
  explicit Artifacts(const RunConfig& c) : dir_(c.out_dir) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return out;
  }
  void write_json(const std::string& name, const nlohmann::json& j) { open(name) << j.dump(2) << "\n"; }
  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

void csv_row(std::ostream& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out << ',';
    out << format_number(v);
    first = false;
  }
  out << '\n';
}

int run_densities(const RunConfig& c, Artifacts& art) {
  const KernelSpec spec = KernelSpec::make(c.alpha, std::max(c.T, c.t));
  const XGrid g = parse_x_grid(c.x_grid);
  const auto xs = linspace(g.a, g.b, g.n);
  std::vector<double> p;
  for (double x : xs) p.push_back(density(spec, c.t, x));
  if (c.format == "csv") {
    auto out = art.open("densities.csv");
    out << "x,p\n";
    for (std::size_t i = 0; i < xs.size(); ++i) csv_row(out, {xs[i], p[i]});
  } else {
    art.write_json("densities.json", {{"t", c.t}, {"c_theta", spec.c_theta()}, {"x", xs}, {"p", p}});
  }
  return kExitOk;
}

int run_simulate(const RunConfig& c, Artifacts& art, bool lift) {
  const KernelSpec spec = KernelSpec::make(c.alpha, c.T);
  const CoefficientPair pair = make_pair(c);
  const InitialCondition x0 = constant_initial(c.x0);
  const auto norm = lift ? KernelNormalization::c_theta : parse_normalization(c.kernel_normalization);
  const auto seeds = seed_list(c);
  const auto space = lift ? space_grid(c.x_max, c.space_nodes) : std::vector<double>{};
  std::vector<VolterraSolution> sols(seeds.size());
  std::vector<RandomField> fields(lift ? seeds.size() : 0);
  parallel_for(seeds.size(), [&](std::size_t i) {
    sols[i] = solve_sve(spec, pair, x0, sample_path(seeds[i], c.level, c.base_steps, c.T), norm);
    if (lift) fields[i] = lift_field(sols[i], space);
  });
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const std::string stem = std::string(lift ? "lift" : "simulate") + "_seed" + std::to_string(seeds[i]);
    const auto& s = sols[i];
    if (c.format == "csv") {
      auto out = art.open(stem + ".csv");
      if (!lift) {
        out << "t,X\n";
        for (std::size_t k = 0; k < s.times.size(); ++k) csv_row(out, {s.times[k], s.values[k]});
      } else {
        out << "t,x,X,Z\n";
        const auto& f = fields[i];
        for (std::size_t k = 0; k < f.times.size(); ++k)
          for (std::size_t j = 0; j < f.space.size(); ++j) csv_row(out, {f.times[k], f.space[j], f.at(k, j), f.z_at(k, j)});
      }
    } else {
      nlohmann::json j = {{"seed", seeds[i]}, {"t", s.times}, {"X", s.values}, {"warnings", s.warnings}};
      if (lift) j = {{"seed", seeds[i]}, {"t", fields[i].times}, {"x", fields[i].space},
                     {"X", fields[i].values}, {"Z", fields[i].z_values}};
      art.write_json(stem + ".json", j);
    }
  }
  return kExitOk;
}

int run_yw_table(const RunConfig& c, Artifacts& art) {
  const auto fam = MollifierFamily::build(c.n_max);
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream csv;
  csv << "n,a_n,m_n,b_n,sup_err,psi_mass,bump_mass\n";
  for (int n = 1; n <= c.n_max; ++n) {
    const BumpTest b = build_bump(n, c.eta, 0.0, c.xi);
    const double sup_err = fam.sup_gap(n);
    const double psi_mass = fam.psi_mass(n);
    const double bump_mass = bump_mass_at_zero(n, c.eta, c.xi);
    csv_row(csv, {double(n), fam.a(n), b.m, b.b_n, sup_err, psi_mass, bump_mass});
    rows.push_back({{"n", n}, {"a_n", fam.a(n)}, {"m_n", b.m}, {"b_n", b.b_n}, {"sup_err", sup_err},
                    {"psi_mass", psi_mass}, {"bump_mass", bump_mass}});
  }
  if (c.format == "csv") art.open("yw_table.csv") << csv.str();
  else art.write_json("yw_table.json", rows);
  return kExitOk;
}

int run_verify_lemmas(const RunConfig& c, Artifacts& art) {
  const KernelSpec spec = KernelSpec::make(c.alpha, c.T);
  const auto reports = verify_kernel_lemmas(spec, LemmaSweep{});
  bool pass = true;
  for (const auto& r : reports) pass = pass && r.pass;
  art.write_json("lemmas.json", reports);
  return pass ? kExitOk : 2;
}

int run_uniqueness(const RunConfig& c, Artifacts& art) {
  const KernelSpec spec = KernelSpec::make(c.alpha, c.T);
  UniquenessOptions o;
  o.level = c.level;
  o.base_steps = c.base_steps;
  o.T = c.T;
  o.iterations = c.iterations;
  o.normalization = parse_normalization(c.kernel_normalization);
  const auto r = picard_uniqueness(spec, make_pair(c), constant_initial(c.x0), seed_list(c), o);
  art.write_json("uniqueness.json", r);
  auto out = art.open("uniqueness_gaps.csv");
  out << "iteration,median_gap";
  for (auto s : r.seeds) out << ",seed" << s;
  out << '\n';
  for (std::size_t it = 0; it < r.median_gaps.size(); ++it) {
    out << it + 1 << ',' << format_number(r.median_gaps[it]);
    for (const auto& run : r.runs) out << ',' << format_number(run.gaps[it]);
    out << '\n';
  }
  return exit_code(r.verdict);
}

int run_dspde(const RunConfig& c, Artifacts& art) {
  const KernelSpec spec = KernelSpec::make(c.alpha, c.T);
  const CoefficientPair pair = make_pair(c);
  const auto seeds = seed_list(c);
  const auto space = space_grid(c.x_max, c.space_nodes);
  const auto phi = radial_test_function(spec, 0.5 * c.x_max);
  std::vector<DspdeTerms> terms(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    const auto sol = solve_sve(spec, pair, constant_initial(c.x0), sample_path(seeds[i], c.level, c.base_steps, c.T),
                               KernelNormalization::c_theta);
    terms[i] = dspde_residual(lift_field(sol, space), sol, phi);
  });
  std::vector<double> res;
  for (const auto& t : terms) res.push_back(t.residual);
  art.write_json("dspde.json", {{"seeds", seeds}, {"terms", terms}, {"median_residual", median(res)}});
  return kExitOk;
}

}  // namespace

int run(const RunConfig& c, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  Artifacts art(c);
  int code = kExitOk;
  if (c.command == "densities") code = run_densities(c, art);
  else if (c.command == "simulate") code = run_simulate(c, art, false);
  else if (c.command == "lift") code = run_simulate(c, art, true);
  else if (c.command == "yw-table") code = run_yw_table(c, art);
  else if (c.command == "verify-lemmas") code = run_verify_lemmas(c, art);
  else if (c.command == "uniqueness") code = run_uniqueness(c, art);
  else if (c.command == "dspde") code = run_dspde(c, art);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json manifest = {{"config", to_json(c)},
                             {"build", VOLTERRA_LAB_BUILD},
                             {"wall_time_seconds", wall},
                             {"seeds", seed_list(c)},
                             {"artifacts", art.files()},
                             {"exit_code", code}};
  std::ofstream(art.dir() / "manifest.json") << manifest.dump(2) << "\n";
  for (const auto& f : art.files()) log << (art.dir() / f).string() << "\n";
  return code;
}

int main(int argc, char** argv) {
  CLI::App app{"Singular-kernel stochastic Volterra experiments"};
  app.require_subcommand(1);
  RunConfig flags;
  std::string config_path;
  struct Bound {
    CLI::Option* opt;
    std::function<void(RunConfig&)> copy;
  };
  std::vector<Bound> bound;

  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name);
    auto add = [&](const std::string& flag, auto member, const std::string& help) {
      CLI::Option* o = sub->add_option(flag, flags.*member, help);
      bound.push_back({o, [member, &flags](RunConfig& c) { c.*member = flags.*member; }});
    };
    add("--alpha", &RunConfig::alpha, "kernel exponent in [0, 0.5)");
    add("--xi", &RunConfig::xi, "Hoelder exponent of the power diffusion");
    add("--c", &RunConfig::c, "scale of the power diffusion");
    add("--drift-a", &RunConfig::drift_a, "drift intercept");
    add("--drift-b", &RunConfig::drift_b, "drift slope");
    add("--x0", &RunConfig::x0, "constant initial condition");
    add("--T", &RunConfig::T, "time horizon");
    add("--base-steps", &RunConfig::base_steps, "steps on level 0");
    add("--level", &RunConfig::level, "refinement level (steps = base_steps 2^level)");
    add("--seeds", &RunConfig::seeds, "number of seeds");
    add("--first-seed", &RunConfig::first_seed, "first seed");
    add("--x-max", &RunConfig::x_max, "half width of the space grid");
    add("--space-nodes", &RunConfig::space_nodes, "space grid nodes");
    add("--kernel-normalization", &RunConfig::kernel_normalization, "plain or c_theta");
    add("--out-dir", &RunConfig::out_dir, "artifact directory");
    add("--format", &RunConfig::format, "csv or json");
    add("--t", &RunConfig::t, "evaluation time (densities)");
    add("--x-grid", &RunConfig::x_grid, "a:b:n (densities)");
    add("--n-max", &RunConfig::n_max, "deepest mollifier level (yw-table)");
    add("--eta", &RunConfig::eta, "bump exponent (yw-table)");
    add("--iterations", &RunConfig::iterations, "Picard iterations (uniqueness)");
    CLI::Option* force = sub->add_flag("--force", flags.force, "allow level > 16");
    bound.push_back({force, [&flags](RunConfig& c) { c.force = flags.force; }});
    sub->add_option("--config", config_path, "JSON config file; flags win");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  RunConfig config;
  try {
    config.command = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::invalid_argument("cannot read config file " + config_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config file is not valid JSON: " + std::string(e.what()));
      }
      config = apply_json(config, j);
    }
    for (const auto& b : bound)
      if (b.opt->count() > 0) b.copy(config);
    validate(config);
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    return run(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace volterra::cli
