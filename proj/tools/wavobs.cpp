// Command-line driver: wavobs <spectrum|constants|control|filters> with a
// config file plus flag overrides (flags win). See runner.hpp for the config
// grammar, pipeline tags, CSV formats and exit codes.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wavobs/runner.hpp"

namespace {

struct FlagSet {
  std::string config_path;
  std::string out_dir;
  std::string n_list;
  std::string t_value;
  std::string gamma_value;
  std::string pipelines;
  std::string n_t;
  std::string eta_points;
  std::string workers;
  std::vector<std::string> filter_specs;
};

void add_common_options(CLI::App* cmd, FlagSet& flags) {
  cmd->add_option("--config", flags.config_path,
                  "config file (key = value, optional [command] section)");
  cmd->add_option("--out", flags.out_dir, "output directory for CSV files");
  cmd->add_option("--workers", flags.workers,
                  "worker threads for the (pipeline, N) sweep");
  cmd->add_option("--N", flags.n_list,
                  "comma-separated ascending polynomial degrees");
  cmd->add_option("--T", flags.t_value, "time horizon");
  cmd->add_option("--gamma", flags.gamma_value,
                  "default Nitsche penalty for tags without an explicit one");
  cmd->add_option("--pipelines", flags.pipelines,
                  "comma-separated pipeline tags (constants/control)");
  cmd->add_option("--n-t", flags.n_t,
                  "control: time samples (0 = 32N); constants: quadrature "
                  "node floor (>= 64)");
  cmd->add_option("--eta-points", flags.eta_points,
                  "filters: size of the uniform eta grid");
  cmd->add_option("--filter", flags.filter_specs,
                  "filter spec name[:p[:alpha]]; for the filters command it "
                  "selects the tabulated filters, otherwise it appends a "
                  "filter:<spec> pipeline")
      ->take_all();
}

int run_command(const std::string& command, const FlagSet& flags) {
  using wavobs::runner::RunOptions;
  RunOptions opt;
  if (!flags.config_path.empty())
    opt = wavobs::runner::load_config(flags.config_path, command);
  opt.command = command;
  if (!flags.n_list.empty()) apply_override(opt, "N", flags.n_list);
  if (!flags.t_value.empty()) apply_override(opt, "T", flags.t_value);
  if (!flags.gamma_value.empty())
    apply_override(opt, "gamma", flags.gamma_value);
  if (!flags.pipelines.empty())
    apply_override(opt, "pipelines", flags.pipelines);
  if (!flags.n_t.empty()) apply_override(opt, "n_t", flags.n_t);
  if (!flags.eta_points.empty())
    apply_override(opt, "eta_points", flags.eta_points);
  if (!flags.workers.empty()) apply_override(opt, "workers", flags.workers);
  if (!flags.out_dir.empty()) apply_override(opt, "out", flags.out_dir);
  if (!flags.filter_specs.empty()) {
    if (command == "filters") {
      opt.filters = flags.filter_specs;
    } else {
      for (const auto& spec : flags.filter_specs)
        opt.pipelines.push_back("filter:" + spec);
    }
  }
  return wavobs::runner::run(opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "wavobs: observability constants, spectra, filters and boundary "
      "controls for spectral semi-discretizations of the 1-D wave equation"};
  app.require_subcommand(1);
  FlagSet flags;
  for (const char* name : {"spectrum", "constants", "control", "filters"}) {
    CLI::App* cmd = app.add_subcommand(name);
    add_common_options(cmd, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run_command(command, flags);
  } catch (const wavobs::runner::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
