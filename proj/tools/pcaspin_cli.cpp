// Command-line front end for the pcaspin library: model construction,
// seeded reproducible simulation runs, exact small-system analyses,
// uniqueness-condition checks, coalescence experiments, mean-field analysis,
// and a throughput benchmark.
//
// Exit codes: 0 success, 2 usage error, 3 malformed input/config,
// 4 resource cap exceeded, 5 I/O failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pcaspin/bounds.hpp"
#include "pcaspin/common.hpp"
#include "pcaspin/curie_weiss.hpp"
#include "pcaspin/exact.hpp"
#include "pcaspin/io.hpp"
#include "pcaspin/model.hpp"
#include "pcaspin/parallel.hpp"
#include "pcaspin/rng.hpp"
#include "pcaspin/sampler.hpp"

#ifndef PCASPIN_VERSION
#define PCASPIN_VERSION "0.1.0"
#endif

namespace {

using namespace pcaspin;
using nlohmann::json;

constexpr const char* kVersion = PCASPIN_VERSION;

/// Filesystem failure carrying the offending path.
struct io_failure {
  std::string message;
};

// ---------------------------------------------------------------------------
// Config file layer
// ---------------------------------------------------------------------------

/// Values from a JSON config file, applied wherever the command line did not
/// set the option.  Keys must match the long option names (without dashes);
/// unknown keys are rejected.
class ConfigLayer {
 public:
  ConfigLayer() : data_(json::object()) {}

  void load(const std::string& path) {
    if (path.empty()) return;
    std::ifstream f(path);
    if (!f) throw io_failure{"cannot open config file: " + path};
    try {
      data_ = json::parse(f);
    } catch (const json::parse_error& e) {
      throw parse_error(0, std::string("config file ") + path + ": " +
                               e.what());
    }
    if (!data_.is_object())
      throw parse_error(0, "config file " + path +
                               ": top level must be an object");
  }

  /// Merges one scalar option.  Returns true when either the command line or
  /// the config provided a value.
  template <class T>
  bool apply(const CLI::Option* opt, const std::string& key, T& var) {
    seen_.push_back(key);
    if (opt != nullptr && opt->count() > 0) return true;
    if (!data_.contains(key)) return false;
    try {
      var = data_.at(key).get<T>();
    } catch (const json::exception&) {
      throw parse_error(0, "config key '" + key + "' has the wrong type");
    }
    return true;
  }

  /// Merges a repeatable numeric option (accepts a number or an array).
  bool apply_list(const CLI::Option* opt, const std::string& key,
                  std::vector<double>& var) {
    seen_.push_back(key);
    if (opt != nullptr && opt->count() > 0) return true;
    if (!data_.contains(key)) return false;
    const json& v = data_.at(key);
    try {
      if (v.is_array())
        var = v.get<std::vector<double>>();
      else
        var = {v.get<double>()};
    } catch (const json::exception&) {
      throw parse_error(0, "config key '" + key + "' has the wrong type");
    }
    return true;
  }

  /// Rejects any config key that no option consumed.
  void finish() const {
    for (const auto& item : data_.items()) {
      bool known = false;
      for (const std::string& k : seen_)
        if (k == item.key()) {
          known = true;
          break;
        }
      if (!known)
        throw parse_error(0, "unknown config key '" + item.key() + "'");
    }
  }

 private:
  json data_;
  std::vector<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Model options
// ---------------------------------------------------------------------------

struct ModelOptions {
  std::string model;  // lattice2d | powerlaw | cw | edgefile
  int L = 4;
  bool periodic = true;
  double J0 = 0.1;
  std::uint64_t n = 100;
  double J1 = 1.0;
  double J = 0.5;
  std::string convention = "half";
  std::string edges;

  CLI::Option* model_opt = nullptr;
  CLI::Option* L_opt = nullptr;
  CLI::Option* periodic_opt = nullptr;
  CLI::Option* J0_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* J1_opt = nullptr;
  CLI::Option* J_opt = nullptr;
  CLI::Option* convention_opt = nullptr;
  CLI::Option* edges_opt = nullptr;
};

void add_model_options(CLI::App* cmd, ModelOptions& mo) {
  mo.model_opt =
      cmd->add_option("--model", mo.model,
                      "Model family: lattice2d, powerlaw, cw, edgefile")
          ->check(CLI::IsMember({"lattice2d", "powerlaw", "cw", "edgefile"}));
  mo.L_opt = cmd->add_option("--L", mo.L, "Lattice side length (lattice2d)");
  mo.periodic_opt = cmd->add_flag("--periodic,!--open", mo.periodic,
                                  "Wrap lattice edges (default periodic)");
  mo.J0_opt = cmd->add_option("--J0", mo.J0,
                              "Nearest-neighbour coupling (lattice2d)");
  mo.n_opt = cmd->add_option("--n", mo.n, "Number of sites (powerlaw, cw)");
  mo.J1_opt = cmd->add_option(
      "--J1", mo.J1, "Distance-1 coupling; decays as 1/d^2 (powerlaw)");
  mo.J_opt = cmd->add_option("--J", mo.J, "Mean-field coupling strength (cw)");
  mo.convention_opt =
      cmd->add_option("--convention", mo.convention,
                      "Mean-field normalization: half (J/2n) or full (J/n)")
          ->check(CLI::IsMember({"half", "full"}));
  mo.edges_opt = cmd->add_option("--edges", mo.edges,
                                 "Path to an edge-list model file (edgefile)");
}

void merge_model_config(ConfigLayer& cfg, ModelOptions& mo) {
  cfg.apply(mo.model_opt, "model", mo.model);
  cfg.apply(mo.L_opt, "L", mo.L);
  cfg.apply(mo.periodic_opt, "periodic", mo.periodic);
  cfg.apply(mo.J0_opt, "J0", mo.J0);
  cfg.apply(mo.n_opt, "n", mo.n);
  cfg.apply(mo.J1_opt, "J1", mo.J1);
  cfg.apply(mo.J_opt, "J", mo.J);
  cfg.apply(mo.convention_opt, "convention", mo.convention);
  cfg.apply(mo.edges_opt, "edges", mo.edges);
}

MeanFieldConvention parse_convention(const std::string& s) {
  if (s == "half") return MeanFieldConvention::kHalf;
  if (s == "full") return MeanFieldConvention::kFull;
  throw invalid_argument_error("--convention must be 'half' or 'full'");
}

CouplingModel build_model(const ModelOptions& mo) {
  if (mo.model.empty())
    throw invalid_argument_error("--model is required (or 'model' in --config)");
  if (mo.model == "lattice2d") {
    if (mo.L < 1) throw invalid_argument_error("--L must be >= 1");
    return lattice2d(static_cast<std::size_t>(mo.L), mo.J0, mo.periodic);
  }
  if (mo.model == "powerlaw") {
    if (mo.n < 1) throw invalid_argument_error("--n must be >= 1");
    return power_law_1d(static_cast<std::size_t>(mo.n), mo.J1);
  }
  if (mo.model == "cw") {
    if (mo.n < 1) throw invalid_argument_error("--n must be >= 1");
    return curie_weiss_model(static_cast<std::size_t>(mo.n), mo.J,
                             parse_convention(mo.convention));
  }
  if (mo.model == "edgefile") {
    if (mo.edges.empty())
      throw invalid_argument_error("--edges is required for --model edgefile");
    std::ifstream f(mo.edges);
    if (!f) throw io_failure{"cannot open model file: " + mo.edges};
    return parse_edge_list(f);  // parse_error on malformed content
  }
  throw invalid_argument_error("unknown model '" + mo.model + "'");
}

void describe_model(const ModelOptions& mo, const CouplingModel& m,
                    io::CsvDocument& doc) {
  doc.set_meta("model", mo.model);
  doc.set_meta("sites", static_cast<std::uint64_t>(m.size()));
  doc.set_meta("sup_norm", m.sup_norm());
  if (mo.model == "lattice2d") {
    doc.set_meta("L", static_cast<std::int64_t>(mo.L));
    doc.set_meta("periodic", mo.periodic ? "true" : "false");
    doc.set_meta("J0", mo.J0);
  } else if (mo.model == "powerlaw") {
    doc.set_meta("J1", mo.J1);
  } else if (mo.model == "cw") {
    doc.set_meta("J", mo.J);
    doc.set_meta("convention", mo.convention);
  } else if (mo.model == "edgefile") {
    doc.set_meta("edges", mo.edges);
  }
}

json model_json(const ModelOptions& mo, const CouplingModel& m) {
  json j;
  j["model"] = mo.model;
  j["sites"] = m.size();
  j["sup_norm"] = m.sup_norm();
  j["ferromagnetic"] = m.is_ferromagnetic();
  if (mo.model == "lattice2d") {
    j["L"] = mo.L;
    j["periodic"] = mo.periodic;
    j["J0"] = mo.J0;
  } else if (mo.model == "powerlaw") {
    j["J1"] = mo.J1;
  } else if (mo.model == "cw") {
    j["J"] = mo.J;
    j["convention"] = mo.convention;
  } else if (mo.model == "edgefile") {
    j["edges"] = mo.edges;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Inertia options (exactly one of delta / q)
// ---------------------------------------------------------------------------

struct InertiaOptions {
  double delta = 0.0;
  double q = 0.0;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* q_opt = nullptr;
};

void add_inertia_options(CLI::App* cmd, InertiaOptions& io_opts) {
  io_opts.delta_opt = cmd->add_option(
      "--delta", io_opts.delta, "Flip density delta = e^{-2q}, in [0, 1]");
  io_opts.q_opt =
      cmd->add_option("--q", io_opts.q, "Inertia parameter q = -ln(delta)/2");
  io_opts.delta_opt->excludes(io_opts.q_opt);
  io_opts.q_opt->excludes(io_opts.delta_opt);
}

InertiaParameter merge_inertia(ConfigLayer& cfg, InertiaOptions& io_opts) {
  bool has_delta = cfg.apply(io_opts.delta_opt, "delta", io_opts.delta);
  bool has_q = cfg.apply(io_opts.q_opt, "q", io_opts.q);
  // Command-line flags override the config; a flag plus the *other* key in
  // the config is not a conflict, the flag wins.
  if (io_opts.delta_opt->count() > 0) has_q = false;
  if (io_opts.q_opt->count() > 0) has_delta = false;
  if (has_delta && has_q)
    throw invalid_argument_error("--delta and --q are mutually exclusive");
  if (has_delta) return InertiaParameter::from_delta(io_opts.delta);
  if (has_q) return InertiaParameter::from_q(io_opts.q);
  throw invalid_argument_error("one of --delta / --q is required");
}

void set_inertia_meta(io::CsvDocument& doc, const InertiaParameter& in) {
  doc.set_meta("delta", in.delta());
  doc.set_meta("q", in.q());
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

/// Writes through `fn(stream)` to `path` ("-" = stdout).  Throws io_failure
/// when the file cannot be opened or the stream ends in a failed state.
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_failure{"cannot open output file: " + path};
  fn(f);
  f.flush();
  if (!f) throw io_failure{"write failed: " + path};
}

void emit(const io::CsvDocument& doc, const std::string& path, bool jsonl) {
  with_output(path, [&](std::ostream& os) {
    if (jsonl)
      doc.write_jsonl(os);
    else
      doc.write(os);
  });
}

std::string fmt(double x) { return io::format_double(x); }

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

struct SampleCmd {
  ModelOptions model;
  InertiaOptions inertia;
  std::string sampler = "pca";
  std::int64_t steps = 1000;
  std::int64_t burnin = 0;
  std::int64_t record_every = 1;
  std::string init = "random";
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = "-";
  bool jsonl = false;
  std::string config_path;

  CLI::Option* sampler_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* burnin_opt = nullptr;
  CLI::Option* record_every_opt = nullptr;
  CLI::Option* init_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* jsonl_opt = nullptr;

  CLI::App* attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand(
        "sample", "Run a seeded chain and record observables");
    add_model_options(cmd, model);
    add_inertia_options(cmd, inertia);
    sampler_opt = cmd->add_option("--sampler", sampler,
                                  "Chain: pca (synchronous) or gibbs (sweeps)")
                      ->check(CLI::IsMember({"pca", "gibbs"}));
    steps_opt = cmd->add_option("--steps", steps, "Recorded steps (or sweeps)");
    burnin_opt = cmd->add_option("--burnin", burnin,
                                 "Steps discarded before recording");
    record_every_opt = cmd->add_option("--record-every", record_every,
                                       "Record every k-th step");
    init_opt = cmd->add_option("--init", init,
                               "Initial state: plus, minus, random")
                   ->check(CLI::IsMember({"plus", "minus", "random"}));
    seed_opt = cmd->add_option("--seed", seed, "RNG seed");
    threads_opt = cmd->add_option(
        "--threads", threads,
        "Worker threads (0 = PCASPIN_THREADS env or 1)");
    out_opt = cmd->add_option("--out", out, "Output path ('-' = stdout)");
    jsonl_opt = cmd->add_flag("--jsonl", jsonl, "Emit JSON lines instead of CSV");
    cmd->add_option("--config", config_path, "JSON config file");
    return cmd;
  }

  int run() {
    ConfigLayer cfg;
    cfg.load(config_path);
    merge_model_config(cfg, model);
    InertiaParameter in = merge_inertia(cfg, inertia);
    cfg.apply(sampler_opt, "sampler", sampler);
    cfg.apply(steps_opt, "steps", steps);
    cfg.apply(burnin_opt, "burnin", burnin);
    cfg.apply(record_every_opt, "record-every", record_every);
    cfg.apply(init_opt, "init", init);
    cfg.apply(seed_opt, "seed", seed);
    cfg.apply(threads_opt, "threads", threads);
    cfg.apply(out_opt, "out", out);
    cfg.apply(jsonl_opt, "jsonl", jsonl);
    cfg.finish();

    if (steps < 0 || burnin < 0 || record_every < 1)
      throw invalid_argument_error(
          "--steps/--burnin must be >= 0 and --record-every >= 1");
    if (sampler != "pca" && sampler != "gibbs")
      throw invalid_argument_error("--sampler must be 'pca' or 'gibbs'");
    if (init != "plus" && init != "minus" && init != "random")
      throw invalid_argument_error("--init must be plus, minus or random");

    CouplingModel m = build_model(model);
    const std::size_t n = m.size();
    unsigned workers = parallel::resolve_threads(threads);

    SpinConfiguration c = init == "plus"    ? sampler::all_plus(n)
                          : init == "minus" ? sampler::all_minus(n)
                                            : sampler::random_configuration(n, seed);

    io::CsvDocument doc("sample");
    doc.set_meta("version", std::string(kVersion));
    describe_model(model, m, doc);
    set_inertia_meta(doc, in);
    doc.set_meta("sampler", sampler);
    doc.set_meta("steps", static_cast<std::int64_t>(steps));
    doc.set_meta("burnin", static_cast<std::int64_t>(burnin));
    doc.set_meta("record_every", static_cast<std::int64_t>(record_every));
    doc.set_meta("init", init);
    doc.set_meta("seed", seed);
    doc.set_columns({"step", "magnetization", "energy", "flips"});

    auto record = [&](std::int64_t step, long flips) {
      doc.add_row({std::to_string(step), fmt(magnetization(c)),
                   fmt(hamiltonian(m, c)), std::to_string(flips)});
    };

    if (sampler == "pca") {
      sampler::Workspace ws;
      for (std::int64_t t = 1; t <= burnin; ++t)
        sampler::pca_step(m, in, c, ws, seed, static_cast<std::uint64_t>(t),
                          workers);
      if (steps > 0) record(0, 0);  // steps = 0: header-only output
      for (std::int64_t t = 1; t <= steps; ++t) {
        long flips = sampler::pca_step(
            m, in, c, ws, seed, static_cast<std::uint64_t>(burnin + t), workers);
        if (t % record_every == 0) record(t, flips);
      }
    } else {
      // One "step" is a sweep of n sequential single-site updates; the RNG
      // step index runs over individual updates so streams never collide.
      std::uint64_t u = 0;
      auto sweep = [&]() {
        long flips = 0;
        for (std::size_t k = 0; k < n; ++k)
          flips += sampler::gibbs_step(m, c, seed, ++u);
        return flips;
      };
      for (std::int64_t t = 1; t <= burnin; ++t) sweep();
      if (steps > 0) record(0, 0);
      for (std::int64_t t = 1; t <= steps; ++t) {
        long flips = sweep();
        if (t % record_every == 0) record(t, flips);
      }
    }

    emit(doc, out, jsonl);
    return io::kOk;
  }
};

// ---------------------------------------------------------------------------
// exact-tv
// ---------------------------------------------------------------------------

struct ExactTvCmd {
  ModelOptions model;
  std::vector<double> deltas;
  std::vector<double> qs;
  std::string out = "-";
  bool jsonl = false;
  std::string config_path;

  CLI::Option* deltas_opt = nullptr;
  CLI::Option* qs_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* jsonl_opt = nullptr;

  CLI::App* attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand(
        "exact-tv",
        "Enumerate the stationary law and report TV distances to the Gibbs "
        "law over a flip-density grid");
    add_model_options(cmd, model);
    deltas_opt = cmd->add_option("--delta", deltas,
                                 "Flip densities (repeatable or comma-separated)")
                     ->delimiter(',');
    qs_opt = cmd->add_option("--q", qs,
                             "Inertia values (repeatable or comma-separated)")
                 ->delimiter(',');
    deltas_opt->excludes(qs_opt);
    qs_opt->excludes(deltas_opt);
    out_opt = cmd->add_option("--out", out, "Output path ('-' = stdout)");
    jsonl_opt = cmd->add_flag("--jsonl", jsonl, "Emit JSON lines instead of CSV");
    cmd->add_option("--config", config_path, "JSON config file");
    return cmd;
  }

  int run() {
    ConfigLayer cfg;
    cfg.load(config_path);
    merge_model_config(cfg, model);
    bool has_deltas = cfg.apply_list(deltas_opt, "delta", deltas);
    bool has_qs = cfg.apply_list(qs_opt, "q", qs);
    if (deltas_opt->count() > 0) has_qs = false;
    if (qs_opt->count() > 0) has_deltas = false;
    cfg.apply(out_opt, "out", out);
    cfg.apply(jsonl_opt, "jsonl", jsonl);
    cfg.finish();

    if (has_deltas && has_qs)
      throw invalid_argument_error("--delta and --q are mutually exclusive");
    std::vector<InertiaParameter> grid;
    if (has_deltas)
      for (double d : deltas) grid.push_back(InertiaParameter::from_delta(d));
    else if (has_qs)
      for (double q : qs) grid.push_back(InertiaParameter::from_q(q));
    else
      throw invalid_argument_error("one of --delta / --q is required");

    CouplingModel m = build_model(model);
    exact::check_enumeration_cap(m.size());  // resource_cap_error beyond
    exact::ExactDistribution gibbs = exact::enumerate_gibbs(m);

    io::CsvDocument doc("exact-tv");
    doc.set_meta("version", std::string(kVersion));
    describe_model(model, m, doc);
    {
      std::string list;
      for (std::size_t i = 0; i < grid.size(); ++i)
        list += (i ? "," : "") + fmt(grid[i].delta());
      doc.set_meta("delta_grid", list);
    }
    doc.set_columns({"n", "q", "delta", "tv", "delta_ratio", "tv_upper_bound"});
    for (const InertiaParameter& in : grid) {
      double tv = exact::tv_distance(exact::enumerate_pca(m, in), gibbs);
      double ratio = exact::delta_ratio(m, in);
      double bound = exact::tv_bound_from_delta_ratio(ratio);
      doc.add_row({std::to_string(m.size()), fmt(in.q()), fmt(in.delta()),
                   fmt(tv), fmt(ratio), fmt(bound)});
    }
    emit(doc, out, jsonl);
    return io::kOk;
  }
};

// ---------------------------------------------------------------------------
// dobrushin-check
// ---------------------------------------------------------------------------

struct DobrushinCmd {
  ModelOptions model;
  InertiaOptions inertia;
  std::string measure = "pca";
  std::string mode = "analytic";
  std::string out = "-";
  std::string config_path;

  CLI::Option* measure_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* out_opt = nullptr;

  CLI::App* attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand(
        "dobrushin-check",
        "Evaluate the uniqueness condition and the bounds built on it (JSON)");
    add_model_options(cmd, model);
    add_inertia_options(cmd, inertia);
    measure_opt = cmd->add_option("--measure", measure,
                                  "Stationary law: gibbs, pca, tilde")
                      ->check(CLI::IsMember({"gibbs", "pca", "tilde"}));
    mode_opt = cmd->add_option("--mode", mode,
                               "Oscillation mode: exhaustive (small n) or "
                               "analytic (any n)")
                   ->check(CLI::IsMember({"exhaustive", "analytic"}));
    out_opt = cmd->add_option("--out", out, "Output path ('-' = stdout)");
    cmd->add_option("--config", config_path, "JSON config file");
    return cmd;
  }

  int run() {
    ConfigLayer cfg;
    cfg.load(config_path);
    merge_model_config(cfg, model);
    cfg.apply(measure_opt, "measure", measure);
    cfg.apply(mode_opt, "mode", mode);
    cfg.apply(out_opt, "out", out);

    CouplingModel m = build_model(model);
    json j;
    j["tool"] = "dobrushin-check";
    j["version"] = kVersion;
    j["model"] = model_json(model, m);
    j["measure"] = measure;

    if (measure == "gibbs") {
      // The base condition needs no flip density; reject a supplied one only
      // through the shared options (it is simply ignored here).
      cfg.apply(inertia.delta_opt, "delta", inertia.delta);
      cfg.apply(inertia.q_opt, "q", inertia.q);
      cfg.finish();
      // With a zero flip density the tilt vanishes, so the summary path
      // reproduces the base condition's row sums at any system size.
      double gs = bounds::gamma_sup_analytic(m, InertiaParameter::from_delta(0.0),
                                             bounds::Measure::kPCA);
      j["gamma_sup"] = gs;
      j["satisfied"] = gs < 1.0;
    } else {
      InertiaParameter in = merge_inertia(cfg, inertia);
      cfg.finish();
      bounds::Measure meas =
          measure == "pca" ? bounds::Measure::kPCA : bounds::Measure::kTilde;
      bounds::OscillationMode om = mode == "exhaustive"
                                       ? bounds::OscillationMode::kExhaustive
                                       : bounds::OscillationMode::kAnalytic;
      j["delta"] = in.delta();
      j["q"] = std::isinf(in.q()) ? json("inf") : json(in.q());
      j["mode"] = mode;
      if (om == bounds::OscillationMode::kAnalytic) {
        // Row-sum summary: no matrix, so no size limit.
        double gs = bounds::gamma_sup_analytic(m, in, meas);
        j["gamma_sup"] = gs;
        j["satisfied"] = gs < 1.0;
      } else {
        bounds::InfluenceBound b = bounds::pca_gamma_bound(m, in, meas, om);
        j["gamma_sup"] = b.gamma_sup;
        j["satisfied"] = b.satisfied;
      }
      bounds::VarianceBound vb = bounds::variance_bound(m, in, meas, om);
      j["variance_bound"] =
          vb.satisfied ? json(vb.value) : json("inf");
      bounds::TvBound tv = bounds::tv_upper_bound(m, in, om);
      j["tv_upper_bound"] = std::isinf(tv.value) ? json("inf") : json(tv.value);
      j["delta_ratio_bound"] =
          std::isinf(tv.delta_ratio) ? json("inf") : json(tv.delta_ratio);
    }
    j["config_hash"] = [&] {
      char buf[24];
      std::snprintf(buf, sizeof buf, "0x%016llx",
                    static_cast<unsigned long long>(
                        io::fnv1a(j.dump())));
      return std::string(buf);
    }();

    with_output(out, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    return io::kOk;
  }
};

// ---------------------------------------------------------------------------
// mixing
// ---------------------------------------------------------------------------

struct MixingCmd {
  ModelOptions model;
  InertiaOptions inertia;
  std::int64_t trials = 200;
  std::int64_t max_steps = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = "-";
  bool jsonl = false;
  std::string config_path;

  CLI::Option* trials_opt = nullptr;
  CLI::Option* max_steps_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* jsonl_opt = nullptr;

  CLI::App* attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand(
        "mixing",
        "Coalescence-time experiment for coupled chains from the extreme "
        "starts");
    add_model_options(cmd, model);
    add_inertia_options(cmd, inertia);
    trials_opt = cmd->add_option("--trials", trials, "Independent trials");
    max_steps_opt = cmd->add_option("--max-steps", max_steps,
                                    "Censoring horizon per trial");
    seed_opt = cmd->add_option("--seed", seed, "RNG seed");
    threads_opt = cmd->add_option(
        "--threads", threads,
        "Worker threads (0 = PCASPIN_THREADS env or 1)");
    out_opt = cmd->add_option("--out", out, "Output path ('-' = stdout)");
    jsonl_opt = cmd->add_flag("--jsonl", jsonl, "Emit JSON lines instead of CSV");
    cmd->add_option("--config", config_path, "JSON config file");
    return cmd;
  }

  int run() {
    ConfigLayer cfg;
    cfg.load(config_path);
    merge_model_config(cfg, model);
    InertiaParameter in = merge_inertia(cfg, inertia);
    cfg.apply(trials_opt, "trials", trials);
    cfg.apply(max_steps_opt, "max-steps", max_steps);
    cfg.apply(seed_opt, "seed", seed);
    cfg.apply(threads_opt, "threads", threads);
    cfg.apply(out_opt, "out", out);
    cfg.apply(jsonl_opt, "jsonl", jsonl);
    cfg.finish();

    if (trials < 1 || max_steps < 1)
      throw invalid_argument_error("--trials and --max-steps must be >= 1");
    CouplingModel m = build_model(model);
    unsigned workers = parallel::resolve_threads(threads);

    sampler::CoalescenceResult r = sampler::estimate_coalescence(
        m, in, static_cast<std::size_t>(trials), max_steps, seed, workers);

    io::CsvDocument doc("mixing");
    doc.set_meta("version", std::string(kVersion));
    describe_model(model, m, doc);
    set_inertia_meta(doc, in);
    doc.set_meta("seed", seed);
    doc.set_meta("trials", static_cast<std::int64_t>(trials));
    doc.set_meta("max_steps", static_cast<std::int64_t>(max_steps));
    doc.set_meta("censored", static_cast<std::int64_t>(r.censored));
    doc.set_meta("median_tau", r.quantile(0.5));
    doc.set_meta("p90_tau", r.quantile(0.9));
    doc.set_meta("max_tau", static_cast<std::int64_t>(r.max_tau));
    doc.set_meta("monotone", m.is_ferromagnetic() ? "true" : "false");
    if (model.model == "cw") {
      double a = cw::effective_slope(model.J,
                                     parse_convention(model.convention));
      doc.set_meta("contraction_factor",
                   cw::contraction_factor(a, in.delta()));
      if (a < 1.0)
        doc.set_meta("predicted_mixing_time",
                     cw::mixing_time_prediction(m.size(), a, in.delta()));
    }
    doc.set_columns({"trial", "tau", "censored"});
    for (std::size_t t = 0; t < r.taus.size(); ++t)
      doc.add_row({std::to_string(t), std::to_string(r.taus[t]),
                   r.taus[t] < 0 ? "1" : "0"});
    emit(doc, out, jsonl);
    return io::kOk;
  }
};

// ---------------------------------------------------------------------------
// cw-analyze
// ---------------------------------------------------------------------------

struct CwAnalyzeCmd {
  std::uint64_t n = 100;
  double J = 0.5;
  InertiaOptions inertia;
  std::string convention = "half";
  std::string out = "-";
  std::string summary;
  std::string config_path;

  CLI::Option* n_opt = nullptr;
  CLI::Option* J_opt = nullptr;
  CLI::Option* convention_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* summary_opt = nullptr;

  CLI::App* attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand(
        "cw-analyze",
        "Mean-field analysis: exact magnetization laws, peaks, and "
        "closed-form predictions");
    n_opt = cmd->add_option("--n", n, "Number of sites")->required();
    J_opt = cmd->add_option("--J", J, "Mean-field coupling strength");
    add_inertia_options(cmd, inertia);
    convention_opt =
        cmd->add_option("--convention", convention,
                        "Mean-field normalization: half (J/2n) or full (J/n)")
            ->check(CLI::IsMember({"half", "full"}));
    out_opt = cmd->add_option("--out", out,
                              "Magnetization-law CSV path ('-' = stdout)");
    summary_opt = cmd->add_option("--summary", summary,
                                  "JSON summary path ('-' = stdout)");
    cmd->add_option("--config", config_path, "JSON config file");
    return cmd;
  }

  int run() {
    ConfigLayer cfg;
    cfg.load(config_path);
    cfg.apply(n_opt, "n", n);
    cfg.apply(J_opt, "J", J);
    InertiaParameter in = merge_inertia(cfg, inertia);
    cfg.apply(convention_opt, "convention", convention);
    cfg.apply(out_opt, "out", out);
    cfg.apply(summary_opt, "summary", summary);
    cfg.finish();

    if (n < 1) throw invalid_argument_error("--n must be >= 1");
    MeanFieldConvention conv = parse_convention(convention);
    const double delta = in.delta();
    const std::size_t nn = static_cast<std::size_t>(n);

    std::vector<double> law_g =
        cw::magnetization_law(nn, J, delta, conv, cw::CwMeasure::kGibbs);
    std::vector<double> law_p =
        cw::magnetization_law(nn, J, delta, conv, cw::CwMeasure::kPCA);
    std::vector<double> law_t =
        cw::magnetization_law(nn, J, delta, conv, cw::CwMeasure::kTilde);

    io::CsvDocument doc("cw-analyze");
    doc.set_meta("version", std::string(kVersion));
    doc.set_meta("n", n);
    doc.set_meta("J", J);
    set_inertia_meta(doc, in);
    doc.set_meta("convention", convention);
    doc.set_columns({"k", "m", "p_gibbs", "p_pca", "p_tilde"});
    for (std::size_t k = 0; k <= nn; ++k) {
      double m = 2.0 * static_cast<double>(k) / static_cast<double>(nn) - 1.0;
      doc.add_row({std::to_string(k), fmt(m), fmt(law_g[k]), fmt(law_p[k]),
                   fmt(law_t[k])});
    }
    emit(doc, out, false);

    double a = cw::effective_slope(J, conv);
    json s;
    s["tool"] = "cw-analyze";
    s["version"] = kVersion;
    s["n"] = n;
    s["J"] = J;
    s["delta"] = delta;
    s["q"] = std::isinf(in.q()) ? json("inf") : json(in.q());
    s["convention"] = convention;
    s["effective_slope"] = a;
    s["m_star"] = cw::spontaneous_magnetization(J, conv);
    s["m_bar"] = cw::tilted_peak(J, delta, conv);
    s["delta_ratio"] = cw::delta_ratio_cw(nn, J, delta, conv);
    s["tv_upper_bound"] =
        exact::tv_bound_from_delta_ratio(s["delta_ratio"].get<double>());
    s["law"] = {{"mean_gibbs", cw::law_mean(law_g)},
                {"mean_pca", cw::law_mean(law_p)},
                {"var_gibbs", cw::law_variance(law_g)},
                {"var_pca", cw::law_variance(law_p)},
                {"mean_pca_reflected",
                 cw::law_mean(cw::condition_nonnegative(law_p))}};
    s["predictions"] = {
        {"contraction_factor", cw::contraction_factor(a, delta)},
        {"mixing_time_prediction",
         a < 1.0 ? json(cw::mixing_time_prediction(nn, a, delta))
                 : json("inf")}};
    if (a < 1.0) {
      cw::GaussianApproxCheck g = cw::gaussian_approx_check(nn, J, delta, conv);
      s["gaussian"] = {{"var_gibbs", g.var_gibbs},
                       {"var_pca", g.var_pca},
                       {"target_gibbs", g.target_gibbs},
                       {"target_pca", g.target_pca},
                       {"rel_err_gibbs", g.rel_err_gibbs},
                       {"rel_err_pca", g.rel_err_pca}};
    }
    with_output(summary.empty() ? "-" : summary,
                [&](std::ostream& os) { os << s.dump(2) << "\n"; });
    return io::kOk;
  }
};

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchCmd {
  ModelOptions model;
  InertiaOptions inertia;
  std::int64_t steps = 100;
  unsigned max_threads = 0;
  std::uint64_t seed = 1;
  std::string out = "-";
  std::string config_path;

  CLI::Option* steps_opt = nullptr;
  CLI::Option* max_threads_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;

  CLI::App* attach(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand(
        "bench",
        "Throughput of the synchronous update at 1..T threads vs sequential "
        "sweeps");
    add_model_options(cmd, model);
    add_inertia_options(cmd, inertia);
    steps_opt = cmd->add_option("--steps", steps, "Steps per measurement");
    max_threads_opt = cmd->add_option("--max-threads", max_threads,
                                      "Largest thread count (0 = hardware)");
    seed_opt = cmd->add_option("--seed", seed, "RNG seed");
    out_opt = cmd->add_option("--out", out, "Output path ('-' = stdout)");
    cmd->add_option("--config", config_path, "JSON config file");
    return cmd;
  }

  int run() {
    ConfigLayer cfg;
    cfg.load(config_path);
    merge_model_config(cfg, model);
    InertiaParameter in = merge_inertia(cfg, inertia);
    cfg.apply(steps_opt, "steps", steps);
    cfg.apply(max_threads_opt, "max-threads", max_threads);
    cfg.apply(seed_opt, "seed", seed);
    cfg.apply(out_opt, "out", out);
    cfg.finish();

    if (steps < 1) throw invalid_argument_error("--steps must be >= 1");
    CouplingModel m = build_model(model);
    const std::size_t n = m.size();
    unsigned top = max_threads != 0 ? max_threads
                                    : std::max(1u, std::thread::hardware_concurrency());

    io::CsvDocument doc("bench");
    doc.set_meta("version", std::string(kVersion));
    describe_model(model, m, doc);
    set_inertia_meta(doc, in);
    doc.set_meta("seed", seed);
    doc.set_meta("steps", static_cast<std::int64_t>(steps));
    // Timings are measurements of this host, not reproducible output.
    doc.set_meta("reproducible", "false");
    doc.set_columns({"kind", "threads", "steps", "site_updates", "seconds",
                     "updates_per_sec", "flips_per_sec"});

    std::vector<std::int8_t> reference;
    bool deterministic = true;
    for (unsigned t = 1; t <= top; ++t) {
      SpinConfiguration c = sampler::random_configuration(n, seed);
      sampler::Workspace ws;
      long flips = 0;
      auto t0 = std::chrono::steady_clock::now();
      for (std::int64_t s = 1; s <= steps; ++s)
        flips += sampler::pca_step(m, in, c, ws, seed,
                                   static_cast<std::uint64_t>(s), t);
      double sec = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
      if (t == 1)
        reference = c.s;
      else if (c.s != reference)
        deterministic = false;
      double updates = static_cast<double>(n) * static_cast<double>(steps);
      doc.add_row({"pca", std::to_string(t), std::to_string(steps),
                   fmt(updates), fmt(sec), fmt(updates / sec),
                   fmt(static_cast<double>(flips) / sec)});
    }
    {
      // The sequential baseline performs the same number of site updates.
      SpinConfiguration c = sampler::random_configuration(n, seed);
      long flips = 0;
      std::uint64_t u = 0;
      auto t0 = std::chrono::steady_clock::now();
      for (std::int64_t s = 1; s <= steps; ++s)
        for (std::size_t k = 0; k < n; ++k)
          flips += sampler::gibbs_step(m, c, seed, ++u);
      double sec = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
      double updates = static_cast<double>(n) * static_cast<double>(steps);
      doc.add_row({"gibbs-sweep", "1", std::to_string(steps), fmt(updates),
                   fmt(sec), fmt(updates / sec),
                   fmt(static_cast<double>(flips) / sec)});
    }
    doc.set_meta("deterministic", deterministic ? "true" : "false");
    emit(doc, out, false);
    return deterministic ? io::kOk : 1;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pcaspin: synchronous spin-flip dynamics with exact oracles, "
      "uniqueness bounds, and mean-field analysis"};
  app.set_version_flag("--version", std::string("pcaspin ") + kVersion);
  app.require_subcommand(1);

  SampleCmd sample;
  ExactTvCmd exact_tv;
  DobrushinCmd dobrushin;
  MixingCmd mixing;
  CwAnalyzeCmd cw_analyze;
  BenchCmd bench;

  CLI::App* c_sample = sample.attach(app);
  CLI::App* c_exact_tv = exact_tv.attach(app);
  CLI::App* c_dobrushin = dobrushin.attach(app);
  CLI::App* c_mixing = mixing.attach(app);
  CLI::App* c_cw = cw_analyze.attach(app);
  CLI::App* c_bench = bench.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pcaspin::io::kUsage;
  }

  try {
    if (c_sample->parsed()) return sample.run();
    if (c_exact_tv->parsed()) return exact_tv.run();
    if (c_dobrushin->parsed()) return dobrushin.run();
    if (c_mixing->parsed()) return mixing.run();
    if (c_cw->parsed()) return cw_analyze.run();
    if (c_bench->parsed()) return bench.run();
  } catch (const pcaspin::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pcaspin::io::kParseError;
  } catch (const pcaspin::resource_cap_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pcaspin::io::kResourceCap;
  } catch (const io_failure& e) {
    std::cerr << "error: " << e.message << "\n";
    return pcaspin::io::kIoError;
  } catch (const pcaspin::invalid_argument_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pcaspin::io::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pcaspin::io::kUsage;
  }
  return pcaspin::io::kUsage;
}
