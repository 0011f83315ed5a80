#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "almostcomm/algebra.hpp"
#include "almostcomm/matrix_io.hpp"
#include "almostcomm/stampfli.hpp"
#include "almostcomm/tsirelson.hpp"
#include "almostcomm/weyl.hpp"

#ifndef ALMOSTCOMM_BUILD_ID
#define ALMOSTCOMM_BUILD_ID "unknown"
#endif

namespace almostcomm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::string out;
  std::string csv;
};

json seed_json(std::uint64_t seed) { return {{"seed", seed}, {"stream_id", 0}}; }

json header(const std::string& command, const Common& c, json params) {
  return {{"command", command},
          {"build_id", ALMOSTCOMM_BUILD_ID},
          {"master_seed", seed_json(c.seed)},
          {"tol", c.tol},
          {"out", c.out.empty() ? json(nullptr) : json(c.out)},
          {"csv", c.csv.empty() ? json(nullptr) : json(c.csv)},
          {"params", std::move(params)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const json& report, const Common& c, std::ostream& out) {
  if (c.out.empty()) {
    out << dump(report);
  } else {
    io::write_file_atomic(c.out, dump(report));
  }
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string spec;
  int count = 0;
  int jobs = 1;
};

json gen_bundle(const tsirelson::PlantedInstance& inst, const tsirelson::PlantSpec& spec,
                const json& config) {
  json j{{"config", config},
         {"spec", tsirelson::io::plant_spec_to_json(spec)},
         {"strategy", tsirelson::io::strategy_to_json(inst.strategy)},
         {"ground_truth", io::decomposition_to_json(inst.ground_truth)},
         {"achieved_epsilon", inst.achieved_epsilon}};
  j["certificate"] = inst.certificate ? tsirelson::io::certificate_to_json(*inst.certificate) : json(nullptr);
  return j;
}

int cmd_gen(const GenArgs& a, const Common& c, std::ostream& out) {
  const auto spec = tsirelson::io::plant_spec_from_json(io::read_json_file(a.spec));
  if (c.out.empty()) throw InvalidInput("gen: --out is required");
  // Thread count is left out so sweeps are byte-identical for any --jobs.
  json params{{"spec", a.spec}, {"count", a.count}};
  const json config = header("gen", c, params);

  if (a.count <= 0) {
    const auto inst = tsirelson::plant_instance(spec, RngSeed{c.seed, 0});
    io::write_file_atomic(c.out, dump(gen_bundle(inst, spec, config)));
    out << dump({{"out", c.out}, {"dim", inst.strategy.rho.rows()}, {"achieved_epsilon", inst.achieved_epsilon}});
    return kOk;
  }

  // Sweep: instance i uses stream i; files are written independently and the
  // manifest is assembled afterwards in instance order.
  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::vector<json> entries(static_cast<std::size_t>(a.count));
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::string first_error;
  auto worker = [&]() {
    for (int i = next++; i < a.count; i = next++) {
      try {
        const auto inst = tsirelson::plant_instance(spec, RngSeed{c.seed, static_cast<std::uint64_t>(i)});
        char name[32];
        std::snprintf(name, sizeof name, "instance_%05d.json", i);
        json cfg = config;
        cfg["instance"] = i;
        io::write_file_atomic(dir / name, dump(gen_bundle(inst, spec, cfg)));
        entries[static_cast<std::size_t>(i)] = {{"id", i},
                                                {"file", name},
                                                {"stream_id", i},
                                                {"dim", inst.strategy.rho.rows()},
                                                {"achieved_epsilon", inst.achieved_epsilon}};
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min(a.jobs, a.count));
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!first_error.empty()) throw InvalidInput("gen: " + first_error);

  json manifest{{"config", config}, {"count", a.count}, {"instances", entries}};
  io::write_file_atomic(dir / "manifest.json", dump(manifest));
  out << dump({{"out", c.out}, {"count", a.count}, {"manifest", (dir / "manifest.json").string()}});
  return kOk;
}

// ---------------------------------------------------------------- schur

struct SchurArgs {
  std::string matrix;
  std::vector<int> bipartite;
};

int cmd_schur(const SchurArgs& a, const Common& c, std::ostream& out) {
  const CMatrix m = io::matrix_from_json(io::read_json_file(a.matrix));
  json params{{"matrix", a.matrix}};
  bool holds = true;
  json cert;
  if (!a.bipartite.empty()) {
    params["bipartite"] = a.bipartite;
    const auto r = weyl::approx_schur_bipartite(m, a.bipartite[0], a.bipartite[1]);
    cert = weyl::to_json(r);
    holds = r.holds(c.tol);
  } else if (m.rows() == 1) {
    cert = weyl::to_json(weyl::SchurCertificate{0.0, m(0, 0), 0.0, 0.0});
  } else {
    const auto r = weyl::approx_schur_scalar(m, weyl::weyl_pair(static_cast<int>(m.rows())));
    cert = weyl::to_json(r);
    holds = r.holds(c.tol);
  }
  json report{{"config", header("schur", c, params)}, {"certificate", cert}, {"holds", holds}};
  emit(report, c, out);
  return holds ? kOk : kTheoremViolation;
}

// ---------------------------------------------------------------- decompose

struct DecomposeArgs {
  std::string family;
};

int cmd_decompose(const DecomposeArgs& a, const Common& c, std::ostream& out) {
  const auto fam = io::family_from_json(io::read_json_file(a.family));
  const auto dec = algebra::decompose(fam, RngSeed{c.seed, 0});
  json dims = json::array();
  for (const auto& b : dec.blocks) dims.push_back({b.d_A, b.d_B});
  json report{{"config", header("decompose", c, {{"family", a.family}})},
              {"residual", dec.residual},
              {"block_dims", dims},
              {"decomposition", io::decomposition_to_json(dec)}};
  emit(report, c, out);
  return kOk;
}

// ---------------------------------------------------------------- stampfli

struct StampfliArgs {
  std::string matrix;
  std::string mode = "exact";
  double epsilon = 0.0;
  long samples = 10000;
  long n_unitaries = 1000;
  long n_subspaces = 50;
  double delta_target = 0.1;
  double confidence = 0.999;
  std::vector<int> frame;
};

constexpr const char* kStampfliCsvHeader = "mode,d,n,epsilon,delta,eta,dist,bound,valid,mc,closed_form,sigma";

int cmd_stampfli(const StampfliArgs& a, const Common& c, std::ostream& out) {
  const CMatrix m = io::matrix_from_json(io::read_json_file(a.matrix));
  const int d = static_cast<int>(m.rows());
  const RngSeed rng{c.seed, 0};
  json params{{"matrix", a.matrix},        {"mode", a.mode},
              {"epsilon", a.epsilon},      {"samples", a.samples},
              {"n_unitaries", a.n_unitaries}, {"n_subspaces", a.n_subspaces},
              {"delta_target", a.delta_target}, {"confidence", a.confidence},
              {"frame", a.frame}};
  json report{{"config", header("stampfli", c, params)}, {"mode", a.mode}};
  const bool selfadjoint = linalg::is_hermitian(m, linalg::default_tol(m));
  const double norm_c = linalg::op_norm(m);
  const auto ns = stampfli::nearest_scalar(m);
  report["dist"] = ns.dist;
  report["c"] = io::complex_to_json(ns.c);
  report["norm_c"] = norm_c;
  report["selfadjoint"] = selfadjoint;

  std::string na = "n/a";
  std::vector<std::string> row{a.mode, std::to_string(d), na, na, na, na, num(ns.dist), na, na, na, na, na};
  int code = kOk;

  if (a.mode == "exact") {
    const double probe = stampfli::derivation_norm_probe(m, a.samples, rng);
    const bool valid = probe <= 2.0 * ns.dist + 1e-9;
    report["probe"] = probe;
    report["bound"] = 2.0 * ns.dist;
    report["valid"] = valid;
    if (linalg::is_normal(m, linalg::default_tol(m))) {
      report["disk"] = stampfli::to_json(stampfli::min_enclosing_disk(linalg::eigenvalues(m)));
    }
    row[2] = std::to_string(a.samples);
    row[7] = num(2.0 * ns.dist);
    row[8] = valid ? "1" : "0";
    if (!valid) code = kTheoremViolation;
  } else if (a.mode == "single" || a.mode == "double") {
    if (!(a.epsilon > 0.0)) throw InvalidInput("stampfli: --epsilon must be positive for sampling modes");
    if (d < 2) throw InvalidInput("stampfli: sampling modes need d >= 2");
    stampfli::ProbabilisticCert cert;
    double bound = 0.0;
    if (a.mode == "single") {
      Isometry frame = [&] {
        if (!a.frame.empty()) return Isometry::coordinates(d, a.frame);
        Rng fr(rng.child(1));
        return Isometry(linalg::haar_frame(d, 2, fr));
      }();
      cert = stampfli::estimate_commutation_prob(m, frame, a.epsilon, a.n_unitaries, a.confidence, rng);
      const auto kind = selfadjoint ? stampfli::BoundKind::single_selfadjoint : stampfli::BoundKind::single_general;
      bound = stampfli::stampfli_bound(kind, cert.epsilon, cert.delta, 0.0, norm_c, d, selfadjoint);
      report["bound_kind"] = stampfli::to_string(kind);
      row[2] = std::to_string(a.n_unitaries);
    } else {
      cert = stampfli::doubly_estimate(m, a.epsilon, a.n_subspaces, a.n_unitaries, a.delta_target,
                                       a.confidence, rng);
      bound = stampfli::stampfli_bound(stampfli::BoundKind::doubly, cert.epsilon, cert.delta,
                                       cert.eta.value_or(0.0), norm_c, d, selfadjoint);
      report["bound_kind"] = stampfli::to_string(stampfli::BoundKind::doubly);
      row[2] = std::to_string(a.n_subspaces * a.n_unitaries);
      row[5] = num(*cert.eta);
    }
    const bool valid = ns.dist <= bound + 1e-9;
    report["certificate"] = stampfli::to_json(cert);
    report["bound"] = bound;
    report["valid"] = valid;
    row[3] = num(cert.epsilon);
    row[4] = num(cert.delta);
    row[7] = num(bound);
    row[8] = valid ? "1" : "0";
  } else if (a.mode == "weingarten") {
    const auto w = stampfli::expected_block_radius_sq(m, a.samples, rng);
    const double band = std::max(3.0 * w.sigma / std::sqrt(static_cast<double>(w.n)), 1e-12);
    report["weingarten"] = {{"d", w.d}, {"n", w.n}, {"mc", w.mc}, {"closed_form", w.closed_form},
                            {"sigma", w.sigma}, {"within_3sigma", std::abs(w.mc - w.closed_form) <= band}};
    row[2] = std::to_string(w.n);
    row[9] = num(w.mc);
    row[10] = num(w.closed_form);
    row[11] = num(w.sigma);
  } else {
    throw InvalidInput("stampfli: unknown mode '" + a.mode + "'");
  }

  emit(report, c, out);
  if (!c.csv.empty()) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) line += (i ? "," : "") + row[i];
    io::write_file_atomic(c.csv, std::string(kStampfliCsvHeader) + "\n" + line + "\n");
  }
  return code;
}

// ---------------------------------------------------------------- tsirelson

struct TsirelsonArgs {
  std::string strategy;
  std::string cert;
  bool probabilistic = false;
  tsirelson::ProbabilisticOptions prob;
};

int cmd_tsirelson(const TsirelsonArgs& a, const Common& c, std::ostream& out) {
  const json input = io::read_json_file(a.strategy);
  // Accept either a bare strategy or a gen bundle.
  const json& sj = input.contains("strategy") ? input.at("strategy") : input;
  const auto s = tsirelson::io::strategy_from_json(sj);

  tsirelson::PipelineOptions opts;
  json params{{"strategy", a.strategy}, {"cert", a.cert.empty() ? json(nullptr) : json(a.cert)},
              {"probabilistic", a.probabilistic}};
  if (!a.cert.empty()) {
    const json cj = io::read_json_file(a.cert);
    opts.certificate = tsirelson::io::certificate_from_json(cj.contains("certificate") ? cj.at("certificate") : cj);
  }
  opts.certificate_tol = std::max(1e-8, c.tol);
  if (a.probabilistic) {
    opts.probabilistic = a.prob;
    params["prob"] = {{"epsilon", a.prob.epsilon}, {"n_subspaces", a.prob.n_subspaces},
                      {"n_unitaries", a.prob.n_unitaries}, {"delta_target", a.prob.delta_target},
                      {"confidence", a.prob.confidence}};
  }
  const auto res = tsirelson::run_factorization(s, RngSeed{c.seed, 0}, opts);
  json report{{"config", header("tsirelson", c, params)},
              {"report", tsirelson::io::report_to_json(res.report)}};

  if (c.out.empty()) {
    out << dump(report);
  } else {
    const fs::path dir(c.out);
    io::write_file_atomic(dir / "report.json", dump(report));
    io::write_file_atomic(dir / "tensor_strategy.json",
                          dump({{"config", report["config"]},
                                {"strategy", tsirelson::io::strategy_to_json(res.tensor)}}));
    if (c.csv.empty()) io::write_file_atomic(dir / "report.csv", tsirelson::io::report_to_csv(res.report));
    out << dump({{"out", c.out}, {"max_error", res.report.max_error},
                 {"correlation_distance", res.report.correlation_distance}});
  }
  if (!c.csv.empty()) io::write_file_atomic(c.csv, tsirelson::io::report_to_csv(res.report));
  return res.report.certified_violation() ? kTheoremViolation : kOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--tol", c.tol, "Comparison tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "Output path");
  sub->add_option("--csv", c.csv, "CSV output path");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Almost-commuting matrix toolkit", "almostcomm"};
  app.require_subcommand(1);

  Common common;
  GenArgs gen_args;
  SchurArgs schur_args;
  DecomposeArgs dec_args;
  StampfliArgs st_args;
  TsirelsonArgs ts_args;

  auto* gen = app.add_subcommand("gen", "Generate planted strategy instances");
  gen->add_option("--spec", gen_args.spec, "Plant spec JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--count", gen_args.count, "Number of instances (writes a directory)");
  gen->add_option("--jobs", gen_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_common(gen, common);

  auto* schur = app.add_subcommand("schur", "Approximate Schur certificate for a matrix");
  schur->add_option("matrix", schur_args.matrix, "Matrix JSON")->required()->check(CLI::ExistingFile);
  schur->add_option("--bipartite", schur_args.bipartite, "d1 d2")->expected(2);
  add_common(schur, common);

  auto* decompose = app.add_subcommand("decompose", "Block decomposition of a generator family");
  decompose->add_option("family", dec_args.family, "Family JSON")->required()->check(CLI::ExistingFile);
  add_common(decompose, common);

  auto* stampfli_cmd = app.add_subcommand("stampfli", "Nearest scalar and commutation certificates");
  stampfli_cmd->add_option("matrix", st_args.matrix, "Matrix JSON")->required()->check(CLI::ExistingFile);
  stampfli_cmd->add_option("--mode", st_args.mode, "exact | single | double | weingarten")
      ->check(CLI::IsMember({"exact", "single", "double", "weingarten"}));
  stampfli_cmd->add_option("--epsilon", st_args.epsilon, "Commutator threshold");
  stampfli_cmd->add_option("--samples", st_args.samples, "Samples for exact/weingarten")->check(CLI::Range(2L, 100000000L));
  stampfli_cmd->add_option("--n-unitaries", st_args.n_unitaries, "Unitaries per subspace")->check(CLI::PositiveNumber);
  stampfli_cmd->add_option("--n-subspaces", st_args.n_subspaces, "Subspaces (double mode)")->check(CLI::PositiveNumber);
  stampfli_cmd->add_option("--delta-target", st_args.delta_target, "Per-subspace failure target")->check(CLI::Range(0.0, 1.0));
  stampfli_cmd->add_option("--confidence", st_args.confidence, "Clopper-Pearson level")->check(CLI::Range(0.0, 1.0));
  stampfli_cmd->add_option("--frame", st_args.frame, "Coordinate frame indices (single mode)");
  add_common(stampfli_cmd, common);

  auto* ts = app.add_subcommand("tsirelson", "Approximate commutant projection and tensor strategy");
  ts->add_option("strategy", ts_args.strategy, "Strategy or gen bundle JSON")->required()->check(CLI::ExistingFile);
  ts->add_option("--cert", ts_args.cert, "Generating certificate JSON")->check(CLI::ExistingFile);
  ts->add_flag("--probabilistic", ts_args.probabilistic, "Run the sampled block certificate");
  ts->add_option("--prob-epsilon", ts_args.prob.epsilon, "Sampled commutator threshold");
  ts->add_option("--n-subspaces", ts_args.prob.n_subspaces, "Subspaces per block and element")->check(CLI::PositiveNumber);
  ts->add_option("--n-unitaries", ts_args.prob.n_unitaries, "Unitaries per subspace")->check(CLI::PositiveNumber);
  ts->add_option("--delta-target", ts_args.prob.delta_target, "Per-subspace failure target")->check(CLI::Range(0.0, 1.0));
  ts->add_option("--confidence", ts_args.prob.confidence, "Clopper-Pearson level")->check(CLI::Range(0.0, 1.0));
  add_common(ts, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*gen) return cmd_gen(gen_args, common, out);
    if (*schur) return cmd_schur(schur_args, common, out);
    if (*decompose) return cmd_decompose(dec_args, common, out);
    if (*stampfli_cmd) return cmd_stampfli(st_args, common, out);
    if (*ts) {
      if (ts_args.probabilistic && !(ts_args.prob.epsilon > 0.0)) {
        throw InvalidInput("tsirelson: --probabilistic needs a positive --prob-epsilon");
      }
      return cmd_tsirelson(ts_args, common, out);
    }
  } catch (const NotSemisimpleWithinTol& e) {
    err << "error: " << e.what() << "\n";
    return kDecompositionFailure;
  } catch (const DegenerateSample& e) {
    err << "error: " << e.what() << "\n";
    return kDecompositionFailure;
  } catch (const DegreeExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kDecompositionFailure;
  } catch (const ResidualTooLarge& e) {
    err << "error: " << e.what() << "\n";
    return kDecompositionFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInputError;
}

}  // namespace almostcomm::cli
