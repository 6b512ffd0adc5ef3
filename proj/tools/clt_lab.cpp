// clt_lab: command-line driver for weight arrays, normal-approximation
// bounds, Monte Carlo Kolmogorov distances and kappa sweeps.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cltlab/bounds.hpp"
#include "cltlab/error.hpp"
#include "cltlab/fixtures.hpp"
#include "cltlab/io.hpp"
#include "cltlab/montecarlo.hpp"
#include "cltlab/summation.hpp"

namespace fs = std::filesystem;
using namespace cltlab;

namespace {

constexpr const char* kVersion = "clt_lab 1.0.0";
constexpr int kExitValidation = 2;
constexpr int kExitUnsound = 3;

struct RunConfig {
  std::string command;
  std::string instance;
  std::string dist;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 0;
  double alpha = 0.01;
  std::string epsilon = "0.1";
  std::string h_class = "rademacher";
  std::string out = ".";
  std::string format = "json";
  std::string family = "square";
  std::string sizes = "2,4,8,16,32";
  std::string route = "direct";
  int kappa_norm = 2;
  std::size_t selftest_instances = 200;
  bool trace_bounds = false;
  bool emit_plots = false;
};

void fail_json(const std::string& code, const std::string& message) {
  std::cerr << dump_json(Json{{"error", code}, {"message", message}}, -1);
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

class OutputDir {
 public:
  OutputDir(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.out) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& text) {
    write_text_file(dir_ / name, text);
    outputs_[name] = fnv1a64_hex(text);
  }

  // Config plus output hashes; everything needed to rerun bit-exactly.
  void write_manifest(const std::string& instance_hash) {
    Json config = {{"instance", cfg_.instance},
                   {"dist", cfg_.dist},
                   {"samples", cfg_.samples},
                   {"seed", cfg_.seed},
                   {"alpha", cfg_.alpha},
                   {"epsilon", cfg_.epsilon},
                   {"class", cfg_.h_class},
                   {"format", cfg_.format},
                   {"family", cfg_.family},
                   {"sizes", cfg_.sizes},
                   {"route", cfg_.route},
                   {"kappa_norm", cfg_.kappa_norm},
                   {"trace_bounds", cfg_.trace_bounds},
                   {"emit_plots", cfg_.emit_plots}};
    Json m = {{"command", cfg_.command},
              {"version", kVersion},
              {"config", config},
              {"instance_hash", instance_hash},
              {"outputs", outputs_}};
    write_text_file(dir_ / "manifest.json", dump_json(m));
  }

 private:
  const RunConfig& cfg_;
  fs::path dir_;
  Json outputs_ = Json::object();
};

WeightArray weights_for(const Instance& inst, const std::string& route) {
  if (route == "transform") return compute_b_transform(inst.a, inst.gamma);
  if (route == "direct") return compute_b_direct(inst.a, inst.gamma);
  throw InvalidParameter("route must be 'direct' or 'transform'");
}

void check_format(const RunConfig& cfg) {
  if (cfg.format != "json" && cfg.format != "csv")
    throw InvalidParameter("format must be 'json' or 'csv'");
}

int run_analyze(const RunConfig& cfg) {
  check_format(cfg);
  const Instance inst = load_instance(cfg.instance);
  const std::string hash = instance_hash(inst);
  const InnovationModel f = InnovationModel::from_name(cfg.dist.empty() ? "rademacher" : cfg.dist);
  const WeightArray b = weights_for(inst, cfg.route);
  BoundReport report = make_bound_report(inst.a, inst.gamma, b, f, cfg.trace_bounds);
  report.instance_hash = hash;

  OutputDir out(cfg);
  if (cfg.format == "csv")
    out.write("weights.csv", weights_to_csv(b));
  else
    out.write("weights.json", dump_json(weights_to_json(b)));
  Json doc = bound_report_to_json(report, cfg.trace_bounds);
  doc["instance"] = instance_to_json(inst);
  out.write("bounds.json", dump_json(doc));
  out.write_manifest(hash);

  std::cout << "sigma " << format_double(b.sigma()) << "  rho " << format_double(b.rho())
            << "  crude_p1 " << format_double(report.crude_p1) << "  ks_upper "
            << format_double(report.ks_upper.value) << '\n';
  const auto violations = soundness_violations(report);
  for (const auto& v : violations) std::cerr << "soundness violation: " << v << '\n';
  return violations.empty() ? 0 : kExitUnsound;
}

int run_simulate(const RunConfig& cfg) {
  check_format(cfg);
  const Instance inst = load_instance(cfg.instance);
  const std::string hash = instance_hash(inst);
  const InnovationModel f = InnovationModel::from_name(cfg.dist.empty() ? "normal" : cfg.dist);
  const WeightArray b = weights_for(inst, cfg.route);
  const SimulationReport rep = simulate(b, f, cfg.samples, cfg.seed, cfg.alpha, hash);

  OutputDir out(cfg);
  if (cfg.format == "csv")
    out.write("simulation.csv", simulation_report_to_csv(rep));
  else
    out.write("simulation.json", dump_json(simulation_report_to_json(rep)));
  out.write_manifest(hash);

  std::cout << "ks_empirical " << format_double(rep.ks_empirical) << "  dkw_margin "
            << format_double(rep.dkw_margin) << '\n';
  const double upper = ks_upper_bound(b, f).value;
  if (upper < 1.0 && rep.ks_empirical > upper + rep.dkw_margin) {
    std::cerr << "soundness violation: empirical distance exceeds the certified bound\n";
    return kExitUnsound;
  }
  return 0;
}

int run_certify(const RunConfig& cfg) {
  std::vector<InnovationModel> members;
  const auto names = split_csv(cfg.h_class);
  for (const auto& n : names) members.push_back(InnovationModel::from_name(n));
  const HClass h(std::move(members));
  const ExactConstants exact = certificate_constants_exact(cfg.epsilon);
  const Certificate c = epsilon_delta_certificate(std::stod(cfg.epsilon), h);
  const std::string text = dump_json(certificate_to_json(c, &exact, names));
  OutputDir out(cfg);
  out.write("certificate.json", text);
  out.write_manifest("");
  std::cout << text;
  return 0;
}

int run_sweep(const RunConfig& cfg) {
  check_format(cfg);
  SweepFamily family;
  if (cfg.family == "square")
    family.kind = SweepFamily::Kind::Square;
  else if (cfg.family == "two_squares")
    family.kind = SweepFamily::Kind::TwoSquares;
  else
    throw InvalidParameter("family must be 'square' or 'two_squares'");
  std::string hash;
  if (!cfg.instance.empty()) {
    const Instance inst = load_instance(cfg.instance);
    hash = instance_hash(inst);
    family.a = inst.a;
  }
  for (const auto& s : split_csv(cfg.sizes)) {
    try {
      family.sizes.push_back(std::stoll(s));
    } catch (const std::exception&) {
      throw InvalidParameter("sizes must be a comma-separated list of integers");
    }
  }
  family.kappa_norm = cfg.kappa_norm;
  const InnovationModel f = InnovationModel::from_name(cfg.dist.empty() ? "rademacher" : cfg.dist);
  const SweepResult res = sweep(family, f, cfg.samples, cfg.seed, cfg.alpha);

  OutputDir out(cfg);
  out.write("sweep.csv", sweep_to_csv(res));
  if (cfg.format == "json") out.write("sweep.json", dump_json(sweep_to_json(res)));
  if (cfg.emit_plots) out.write("sweep.svg", sweep_to_svg(res));
  out.write_manifest(hash);

  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  int code = 0;
  for (const auto& r : res.rows) {
    std::cout << r.descriptor << "  kappa " << format_double(r.kappa) << "  rho "
              << format_double(r.rho) << "  D_N " << format_double(r.ks_empirical) << '\n';
    if (r.ks_upper < 1.0 && r.ks_empirical > r.ks_upper + r.dkw_margin) {
      std::cerr << "soundness violation at " << r.descriptor << '\n';
      code = kExitUnsound;
    }
  }
  return code;
}

int run_selftest(const RunConfig& cfg) {
  const SelfTestResult res = cltlab::run_selftest(cfg.seed, cfg.selftest_instances);
  for (const auto& line : res.lines) std::cout << line << '\n';
  return res.passed ? 0 : kExitUnsound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal approximation toolkit for sums of two-dimensional linear random fields"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  RunConfig cfg;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Output directory");
    sub->add_option("--format", cfg.format, "Report format: json or csv");
  };
  const auto instance_opt = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--instance", cfg.instance, "Instance JSON file");
    if (required) opt->required();
    sub->add_option("--route", cfg.route, "Weight computation: direct or transform");
  };
  const auto sampling = [&](CLI::App* sub) {
    sub->add_option("--dist", cfg.dist, "Innovation law: normal|rademacher|uniform|exponential");
    sub->add_option("--samples", cfg.samples, "Monte Carlo replicates")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--alpha", cfg.alpha, "DKW level")->check(CLI::Range(1e-300, 0.999999));
  };

  auto* analyze = app.add_subcommand("analyze", "Weight array and every bound on rho");
  instance_opt(analyze, true);
  common(analyze);
  analyze->add_option("--dist", cfg.dist, "Innovation law for the smoothing bound");
  analyze->add_flag("--trace-bounds", cfg.trace_bounds, "Record every (T, eta) probe");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo Kolmogorov distance of S/sigma");
  instance_opt(sim, true);
  common(sim);
  sampling(sim);

  auto* cert = app.add_subcommand("certify", "Epsilon-delta certificate for a class of laws");
  cert->add_option("--epsilon", cfg.epsilon, "Target Kolmogorov distance in (0, 1)");
  cert->add_option("--class", cfg.h_class, "Comma-separated innovation laws");
  cert->add_option("--out", cfg.out, "Output directory");

  auto* sw = app.add_subcommand("sweep", "Kappa sweep over a family of regions");
  instance_opt(sw, false);
  common(sw);
  sampling(sw);
  sw->add_option("--family", cfg.family, "square or two_squares");
  sw->add_option("--sizes", cfg.sizes, "Comma-separated side lengths");
  sw->add_option("--kappa-norm", cfg.kappa_norm, "Norm in kappa = sigma/||a||_p")
      ->check(CLI::IsMember({1, 2}));
  sw->add_flag("--emit-plots", cfg.emit_plots, "Write sweep.svg");

  auto* st = app.add_subcommand("selftest", "Randomized oracle-equivalence suite");
  st->add_option("--seed", cfg.seed, "Random seed");
  st->add_option("--instances", cfg.selftest_instances, "Number of random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_json("InvalidArguments", e.what());
    return kExitValidation;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (analyze->parsed()) return run_analyze(cfg);
    if (sim->parsed()) return run_simulate(cfg);
    if (cert->parsed()) return run_certify(cfg);
    if (sw->parsed()) return run_sweep(cfg);
    if (st->parsed()) return run_selftest(cfg);
  } catch (const Error& e) {
    fail_json(e.code(), e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    fail_json("InvalidArguments", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}
