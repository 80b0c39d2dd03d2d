// Experiment runner: subcommands wrap the library modules, emit JSON reports
// (schema 1.0.0) plus CSV traces, and exit 0 (ok) / 1 (error) / 2 (violated).
#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spinglass/advice.hpp"
#include "spinglass/dynamics.hpp"
#include "spinglass/localization.hpp"
#include "spinglass/mixture.hpp"
#include "spinglass/rmt.hpp"
#include "spinglass/tap.hpp"

using json = nlohmann::ordered_json;
using Cfg = std::map<std::string, std::string>;

static const char* kSchemaVersion = "1.0.0";

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace {

std::string get_str(const Cfg& c, const std::string& key) {
  auto it = c.find(key);
  if (it == c.end() || it->second.empty())
    throw ConfigError("missing required field: " + key);
  return it->second;
}

std::string get_str(const Cfg& c, const std::string& key, const std::string& def) {
  auto it = c.find(key);
  return it == c.end() ? def : it->second;
}

double get_num(const Cfg& c, const std::string& key, double def) {
  auto it = c.find(key);
  if (it == c.end()) return def;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field " + key + " is not a number: " + it->second);
  }
}

int get_int(const Cfg& c, const std::string& key, int def) {
  return static_cast<int>(get_num(c, key, def));
}

std::uint64_t get_seed(const Cfg& c) {
  return static_cast<std::uint64_t>(get_num(c, "seed", 1.0));
}

spg::MixtureFunction parse_mixture(const Cfg& c) {
  const std::string spec = get_str(c, "mixture");
  std::vector<std::pair<int, double>> pairs;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw ConfigError("field mixture: expected p:gamma_sq pairs, got '" + tok + "'");
    try {
      pairs.emplace_back(std::stoi(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ConfigError("field mixture: bad pair '" + tok + "'");
    }
  }
  if (pairs.empty()) throw ConfigError("field mixture: empty specification");
  return spg::MixtureFunction::from_pairs(pairs, get_num(c, "tilt", 0.0));
}

std::string out_dir(const Cfg& c) {
  const char* env = std::getenv("SPG_OUT");
  std::string dir = get_str(c, "out", env ? env : ".");
  std::filesystem::create_directories(dir);
  return dir;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

void emit_report(json report, const Cfg& cfg, const std::string& name, double seconds) {
  report["schema_version"] = kSchemaVersion;
  report["experiment"] = name;
  report["config"] = json::object();
  for (const auto& [k, v] : cfg) report["config"][k] = v;
  json hashed = report;  // hash covers everything except timing
  hashed["content_hash"] = "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(hashed.dump())));
  report["content_hash"] = buf;
  report["timing_seconds"] = seconds;
  const std::string path = out_dir(cfg) + "/" + name + "_report.json";
  std::ofstream f(path);
  f << report.dump(2) << "\n";
  std::cout << report.dump(2) << std::endl;
}

void write_csv(const Cfg& cfg, const std::string& name, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(out_dir(cfg) + "/" + name + ".csv");
  f << header << "\n";
  f.precision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------- experiments

int run_thresholds(const Cfg& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int pmin = get_int(cfg, "pmin", 3), pmax = get_int(cfg, "pmax", 16);
  json rows = json::array();
  bool ok = true;
  for (int p = pmin; p <= pmax; ++p) {
    const double bsl = spg::beta_sl_pure(p), bsh = spg::beta_shatter_pure(p);
    const double ratio = bsl / bsh;
    ok = ok && ratio >= std::sqrt(std::exp(1.0)) / 2.0;
    rows.push_back({{"p", p}, {"beta_sl", bsl}, {"beta_shatter", bsh}, {"ratio", ratio}});
  }
  json rep;
  rep["results"] = {{"thresholds", rows}, {"ratio_bound_holds", ok}};
  emit_report(rep, cfg, "thresholds",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return ok ? 0 : 2;
}

int run_anneal(const Cfg& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mix = parse_mixture(cfg);
  const int n = get_int(cfg, "n", 40);
  const int replicas = get_int(cfg, "replicas", 2);
  const std::uint64_t seed = get_seed(cfg);
  spg::AnnealSchedule sched;
  sched.beta_max = get_num(cfg, "beta-max", 1.0);
  sched.delta = get_num(cfg, "delta", 0.25);
  sched.stage_time = get_num(cfg, "stage-time", 1.0);
  sched.step = get_num(cfg, "step", 0.01);
  sched.validate();
  const auto h = spg::Hamiltonian::sample(mix, n, seed);

  std::vector<spg::Vec> finals(replicas);
  std::vector<spg::ChainDiagnostics> diags(replicas);
  parallel_for(replicas, get_int(cfg, "workers", 1), [&](int r) {
    spg::Rng rng(seed, 1 + r);  // hierarchical: disorder stream 0, chains 1..R
    auto [state, d] = spg::run_annealed(h, sched, rng);
    finals[r] = state;
    diags[r] = d;
  });

  std::vector<std::vector<double>> rows;
  json per = json::array();
  bool ok = true;
  for (int r = 0; r < replicas; ++r) {
    const auto& d = diags[r];
    ok = ok && !d.blowup;
    for (int k = 0; k < sched.stage_count(); ++k) {
      double acc = 0.0;
      for (int s = 0; s < d.steps_per_stage; ++s)
        acc += d.energy_trace[static_cast<std::size_t>(k) * d.steps_per_stage + s];
      rows.push_back({static_cast<double>(r), static_cast<double>(k), k * sched.delta,
                      acc / d.steps_per_stage});
    }
    per.push_back({{"replica", r},
                   {"final_energy_per_spin", h.energy(finals[r]) / n},
                   {"sl_warning", d.sl_warning},
                   {"blowup", d.blowup}});
  }
  write_csv(cfg, "anneal_trace", "replica,stage,beta,mean_energy_per_spin", rows);
  json results;
  results["replicas"] = per;
  if (replicas >= 2) results["overlap_01"] = spg::overlap(finals[0], finals[1]);
  results["stage_count"] = sched.stage_count();
  json rep;
  rep["results"] = results;
  emit_report(rep, cfg, "anneal",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return ok ? 0 : 2;
}

int run_localize(const Cfg& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int d = get_int(cfg, "d", 6);
  if (d < 1 || d > 12) throw ConfigError("field d: cube dimension must be in [1,12]");
  const double T = get_num(cfg, "T", 1.0);
  const int steps = get_int(cfg, "steps", 100);
  const double K = get_num(cfg, "K", 0.0);  // 0 disables stopping
  spg::Rng rng(get_seed(cfg));
  spg::Vec w(1 << d);
  for (int i = 0; i < w.size(); ++i) w[i] = 0.2 + rng.uniform();
  const auto pi = spg::DiscreteMeasure::cube(d, w);
  auto path = spg::sl_path(pi, T, steps, rng);
  if (K > 0.0) path = spg::stop_tau(path, K, T);

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < path.times.size(); ++k)
    rows.push_back({path.times[k], path.y.row(static_cast<int>(k)).norm(), path.cov_opnorm[k],
                    path.stopped_early && static_cast<int>(k) == path.stopped_index ? 1.0 : 0.0});
  write_csv(cfg, "localize_trace", "t,y_norm,cov_opnorm,stopped", rows);
  json rep;
  rep["results"] = {{"stopped_at", path.stopped_at},
                    {"stopped_early", path.stopped_early},
                    {"final_cov_opnorm", path.cov_opnorm.back()}};
  emit_report(rep, cfg, "localize",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int run_rmt_check(const Cfg& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = get_int(cfg, "n", 24);
  const double xi2 = get_num(cfg, "xi2", 0.25);
  const int draws = get_int(cfg, "draws", 5);
  const long long samples = static_cast<long long>(get_num(cfg, "mc-samples", 1e5));
  const double tol = get_num(cfg, "tol", 1.0);
  const std::uint64_t seed = get_seed(cfg);
  const spg::MixtureFunction mix({0.0, xi2 / 2.0});

  json per = json::array();
  std::vector<json> slots(draws);
  std::vector<int> passes(draws, 0);
  parallel_for(draws, get_int(cfg, "workers", 1), [&](int d) {
    const auto h = spg::Hamiltonian::sample(mix, n, seed + d);
    const auto an = spg::analyze_deg2(h);
    const auto full = spg::logz_full_prediction(h);
    spg::Rng rng(seed, 100 + d);
    const auto mc = spg::mc_partition(h, samples, rng);
    passes[d] = std::abs(mc.log_estimate - an.logz2) <= tol ? 1 : 0;
    slots[d] = {{"draw", d},
                {"eig_min", an.eigs.minCoeff()},
                {"eig_max", an.eigs.maxCoeff()},
                {"gamma_star", an.gamma_star},
                {"logz2_prediction", an.logz2},
                {"logz_full_prediction", full.value},
                {"logz_full_valid", full.valid},
                {"mc_log", mc.log_estimate},
                {"mc_ci", {mc.ci_lo, mc.ci_hi}},
                {"within_tol", passes[d] == 1}};
  });
  int total = 0;
  for (int d = 0; d < draws; ++d) {
    per.push_back(slots[d]);
    total += passes[d];
  }
  const bool ok = 10 * total >= 9 * draws;
  json rep;
  rep["results"] = {{"draws", per}, {"passes", total}, {"ok", ok}};
  emit_report(rep, cfg, "rmt_check",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return ok ? 0 : 2;
}

int run_tap(const Cfg& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto mix = parse_mixture(cfg);
  const int n = get_int(cfg, "n", 30);
  const double t = get_num(cfg, "t", 0.0);
  const double iota = get_num(cfg, "iota", 0.15);
  const double tol = get_num(cfg, "tol", 1e-7);
  spg::Rng rng(get_seed(cfg));
  const spg::Vec x = spg::uniform_sphere(n, rng);
  auto ctx = spg::TapContext::make(mix, t, n, get_seed(cfg), x, iota);
  const double qs = ctx.xi.q_star(0.0);
  auto res = spg::find_tap_point(ctx, qs * x, tol);
  ctx.m = res.m;

  json rep;
  json results;
  results["q_star"] = qs;
  results["converged"] = res.converged;
  results["residual"] = res.residual;
  results["iterations"] = res.iterations;
  results["exited_region"] = res.exited_region;
  results["q_m"] = ctx.q_m();
  results["q_x"] = ctx.q_x();
  results["f_tap_per_spin"] = spg::f_tap(ctx, res.m) / n;
  const auto bg = spg::band(ctx, 0.0, 0.0);
  results["band_00"] = {{"vsq", bg.vsq},
                        {"r2", bg.r2},
                        {"V", bg.v_scalar},
                        {"xi_ab_coeffs", bg.xi_ab.coeffs()}};
  const auto g = ctx.geometry();
  const auto grad = spg::e_hat_gradient(g, 0.0, 0.0);
  const auto hess = spg::e_hat_hessian(g, 0.0, 0.0);
  results["e_hat"] = {{"value", spg::e_hat(g, 0.0, 0.0)},
                      {"gradient", {grad[0], grad[1]}},
                      {"hessian", {hess(0, 0), hess(0, 1), hess(1, 1)}}};
  rep["results"] = results;
  emit_report(rep, cfg, "tap",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return res.converged ? 0 : 2;
}

int run_advice_cmd(const Cfg& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const double sep = get_num(cfg, "sep", 10.0);
  const double sigma = get_num(cfg, "sigma", 1.0);
  spg::Vec mu(1);
  mu << -sep;
  spg::GaussianComponent a{0.5, mu, sigma};
  mu << sep;
  spg::GaussianComponent b{0.5, mu, sigma};
  const spg::MixtureTarget target({a, b});
  int m = get_int(cfg, "m", 0);
  if (m <= 0)
    m = spg::sample_count(get_num(cfg, "delta", 0.1), target.p_star(), get_num(cfg, "eps", 0.25));
  const std::string init = get_str(cfg, "init", "advice");
  if (init != "advice" && init != "adversarial")
    throw ConfigError("field init: expected advice or adversarial");
  spg::Rng rng(get_seed(cfg));
  const auto trace = spg::run_advice(target, m, get_num(cfg, "T", 10.0), get_num(cfg, "step", 0.05),
                                     rng, init == "advice" ? spg::AdviceInit::Advice
                                                           : spg::AdviceInit::Adversarial,
                                     get_int(cfg, "checkpoints", 20));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < trace.times.size(); ++k)
    rows.push_back({trace.times[k], trace.tv[k], trace.chi2[k]});
  write_csv(cfg, "advice_trace", "t,tv,chi2", rows);
  const double tv_max = get_num(cfg, "tv-max", 0.0);
  const bool ok = tv_max <= 0.0 || trace.tv.back() <= tv_max;
  json rep;
  rep["results"] = {{"m", m},
                    {"counts", trace.counts},
                    {"imbalance", trace.imbalance},
                    {"c_pi", trace.c_pi},
                    {"final_tv", trace.tv.back()},
                    {"final_chi2", trace.chi2.back()},
                    {"ok", ok}};
  emit_report(rep, cfg, "advice",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return ok ? 0 : 2;
}

int run_functional_suite(const Cfg& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int d = get_int(cfg, "d", 4);
  if (d < 1 || d > 10) throw ConfigError("field d: cube dimension must be in [1,10]");
  const int chains = get_int(cfg, "chains", 20);
  const std::uint64_t seed = get_seed(cfg);
  json per = json::array();
  bool ok = true;
  for (int c = 0; c < chains; ++c) {
    spg::Rng rng(seed, c);
    spg::Vec w(1 << d);
    for (int i = 0; i < w.size(); ++i) w[i] = 0.1 + rng.uniform();
    const auto pi = spg::DiscreteMeasure::cube(d, w);
    const auto P = spg::glauber_matrix(pi);
    double db = 0.0;
    for (int i = 0; i < P.rows(); ++i)
      for (int j = 0; j < P.cols(); ++j)
        db = std::max(db, std::abs(pi.weights[i] * P(i, j) - pi.weights[j] * P(j, i)));
    const double gap = spg::spectral_gap(pi);

    spg::Vec point = spg::Vec::Zero(1 << d);
    point[static_cast<int>(rng.index(1 << d))] = 1.0;
    const auto nu0 = spg::DiscreteMeasure(pi.atoms, point);
    const auto traj = spg::chi2_trajectory(pi, nu0, 2.0, 20);
    const double chi0 = traj.chi2.front();
    bool envelope = true, dominated = true;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      envelope = envelope &&
                 traj.chi2[k] <= std::exp(-2.0 * gap * traj.times[k]) * chi0 * (1.0 + 1e-9) + 1e-12;
      dominated = dominated &&
                  traj.chi2[k] <= spg::mixing_bound({gap, 0.0}, chi0, traj.times[k],
                                                    spg::MixingMode::Chi2) + 1e-12;
    }
    const auto probe = spg::weak_pi_probe(pi, {gap, 0.0}, 50, rng);
    const bool pass = db <= 1e-14 && envelope && dominated && !probe.refuted;
    ok = ok && pass;
    per.push_back({{"chain", c},
                   {"detailed_balance_residual", db},
                   {"spectral_gap", gap},
                   {"chi2_envelope_holds", envelope},
                   {"mixing_bound_dominates", dominated},
                   {"probe_refuted", probe.refuted},
                   {"pass", pass}});
  }
  json rep;
  rep["results"] = {{"chains", per}, {"all_pass", ok}};
  emit_report(rep, cfg, "functional_suite",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return ok ? 0 : 2;
}

int dispatch(const std::string& name, const Cfg& cfg) {
  if (name == "thresholds") return run_thresholds(cfg);
  if (name == "anneal") return run_anneal(cfg);
  if (name == "localize") return run_localize(cfg);
  if (name == "rmt-check") return run_rmt_check(cfg);
  if (name == "tap") return run_tap(cfg);
  if (name == "advice") return run_advice_cmd(cfg);
  if (name == "functional-suite") return run_functional_suite(cfg);
  throw ConfigError("unknown experiment: " + name);
}

Cfg parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  Cfg cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const auto kend = line.find_last_not_of(" \t", eq - 1);
    const auto vstart = line.find_first_not_of(" \t", eq + 1);
    cfg[line.substr(0, kend + 1)] =
        vstart == std::string::npos ? "" : line.substr(vstart);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spherical p-spin sampling experiments"};
  app.require_subcommand(0, 1);
  bool print_schema = false;
  app.add_flag("--schema-version", print_schema, "print the report schema version and exit");

  const std::vector<std::pair<std::string, std::vector<std::string>>> subs = {
      {"thresholds", {"pmin", "pmax", "out"}},
      {"anneal",
       {"mixture", "tilt", "beta-max", "delta", "stage-time", "step", "n", "seed", "replicas",
        "workers", "out"}},
      {"localize", {"d", "T", "steps", "K", "seed", "out"}},
      {"rmt-check", {"n", "xi2", "draws", "mc-samples", "tol", "seed", "workers", "out"}},
      {"tap", {"n", "mixture", "tilt", "t", "iota", "tol", "seed", "out"}},
      {"advice",
       {"sep", "sigma", "m", "delta", "eps", "T", "step", "init", "checkpoints", "tv-max", "seed",
        "out"}},
      {"functional-suite", {"d", "chains", "seed", "out"}},
  };
  Cfg cfg;
  for (const auto& [name, keys] : subs) {
    auto* sub = app.add_subcommand(name, name + " experiment");
    for (const auto& key : keys) {
      sub->add_option_function<std::string>(
          "--" + key, [&cfg, key](const std::string& v) { cfg[key] = v; }, key);
    }
  }
  std::string config_path;
  auto* runcmd = app.add_subcommand("run", "run an experiment described by a key=value config");
  runcmd->add_option("config", config_path, "config file path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (print_schema) {
    std::cout << kSchemaVersion << std::endl;
    return 0;
  }
  try {
    if (runcmd->parsed()) {
      Cfg file_cfg = parse_config_file(config_path);
      const std::string name = get_str(file_cfg, "experiment");
      file_cfg.erase("experiment");
      return dispatch(name, file_cfg);
    }
    for (const auto& [name, keys] : subs)
      if (app.get_subcommand(name)->parsed()) return dispatch(name, cfg);
    std::cerr << app.help() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
