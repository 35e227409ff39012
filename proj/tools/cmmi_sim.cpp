// Monte Carlo driver: runs one experiment kind and writes trials.csv,
// aggregate.csv, plot.<kind>.txt and run.cfg into the output directory.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cmmi/cmmi.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> workers;
  std::string out_dir;
  std::string methods;
  std::string rank_mode;
  std::string sweep;
};

void add_common_flags(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "key = value configuration file");
  sub->add_option("--seed", f.seed, "master seed (u64)");
  sub->add_option("--trials", f.trials, "trials per sweep point");
  sub->add_option("--out", f.out_dir, "output directory (default out/<kind>)");
  sub->add_option("--methods", f.methods, "comma list of SCM,EVD,PCA-EVD,JD,ideal");
  sub->add_option("--rank-mode", f.rank_mode, "oracle | aic");
  sub->add_option("--workers", f.workers, "worker threads");
  sub->add_option("--sweep", f.sweep, "comma list of sweep values (dB or sample counts)");
}

cmmi::ExperimentSpec build_spec(cmmi::ExperimentKind kind, const CommonFlags& f) {
  using namespace cmmi;
  ExperimentSpec spec;
  spec.kind = kind;
  spec.sweep = default_sweep(kind);
  spec.trials = default_trials(kind);
  if (kind == ExperimentKind::RankDetection) spec.methods = {Method::PcaEvd};

  if (!f.config_path.empty()) apply_config(load_config_file(f.config_path), spec);

  ConfigMap overrides;
  if (f.seed) overrides["seed"] = std::to_string(*f.seed);
  if (f.trials) overrides["trials"] = std::to_string(*f.trials);
  if (f.workers) overrides["workers"] = std::to_string(*f.workers);
  if (!f.methods.empty()) overrides["methods"] = f.methods;
  if (!f.rank_mode.empty()) overrides["rank_mode"] = f.rank_mode;
  if (!f.sweep.empty()) overrides["sweep"] = f.sweep;
  apply_config(overrides, spec);
  if (!f.methods.empty() && spec.methods.empty()) {
    throw std::invalid_argument("--methods selected no method");
  }
  spec.validate();
  return spec;
}

int run_kind(cmmi::ExperimentKind kind, const CommonFlags& f) {
  using namespace cmmi;
  const ExperimentSpec spec = build_spec(kind, f);
  const fs::path out = f.out_dir.empty() ? fs::path("out") / std::string(kind_name(kind))
                                         : fs::path(f.out_dir);
  const auto records = run_experiment(spec);
  emit_csv(records, spec.methods, out);
  const fs::path plot = emit_plot_script(out / "aggregate.csv", kind_name(kind));
  {
    auto cfg_out = detail::open_for_write(out / "run.cfg");
    cfg_out << format_config(spec);
  }
  std::cout << kind_name(kind) << ": " << records.size() << " trials -> " << out.string()
            << " (" << plot.filename().string() << ")\n";
  return 0;
}

int run_flops(std::int64_t k, std::int64_t nr, std::int64_t r, std::int64_t nb) {
  const cmmi::FlopCounts c = cmmi::flop_counts(k, nr, r, nb);
  std::cout << "method,flops\n";
  std::cout << "SCM," << c.scm << "\nPCA-EVD," << c.pca_evd << "\nJD," << c.jd << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMMI estimation Monte Carlo simulator"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<cmmi::ExperimentKind> chosen;
  for (auto kind : {cmmi::ExperimentKind::NmseVsSinr, cmmi::ExperimentKind::NmseVsSamples,
                    cmmi::ExperimentKind::SrVsSinr, cmmi::ExperimentKind::RankDetection}) {
    auto* sub = app.add_subcommand(std::string(cmmi::kind_name(kind)));
    add_common_flags(sub, flags);
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  std::int64_t fk = 8, fnr = 8, fr = 3, fnb = 8;
  bool flops = false;
  auto* fsub = app.add_subcommand("flops", "closed-form FLOP counts");
  fsub->add_option("--samples", fk, "sample count K");
  fsub->add_option("--nr", fnr, "covariance dimension Nr");
  fsub->add_option("--rank", fr, "interference rank r");
  fsub->add_option("--nb", fnb, "Bob antennas Nb");
  fsub->callback([&flops] { flops = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (flops) return run_flops(fk, fnr, fr, fnb);
    return run_kind(*chosen, flags);
  } catch (const std::exception& e) {
    std::cerr << "cmmi_sim: error: " << e.what() << "\n";
    return 2;
  }
}
