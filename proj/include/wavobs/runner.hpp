#pragma once
// Experiment runner: reads a key=value config (with optional [command]
// section), applies command-line overrides, sweeps (pipeline, N) tasks with an
// optional worker pool, and emits deterministic CSV tables.
//
// Commands and outputs (written into the output directory):
//   spectrum  -> spectrum.csv         (N,k,sqrt_lambda,k_pi,gap,delta)
//   constants -> constants.csv        (pipeline,N,T,c_NT,C_NT,
//                                      gramian_check_residual,error)
//   control   -> controls.csv         (pipeline,N,t,vN)
//                control_errors.csv   (pipeline,N,e_u0,e_u1,e_v,c_NT,error)
//   filters   -> filters.csv          (filter,eta,sigma)
//
// Every CSV starts with one '#' metadata line carrying the config hash and
// the fixed numeric tolerances, then the exact header row.
//
// Pipeline tags:
//   classical
//   mixed
//   nitsche-sym[:gamma][:dropped]      dropped = observation without the
//   nitsche-nonsym[:gamma][:dropped]   penalty term (boundary derivative only)
//   filter:<name>[:<p>[:<alpha>]]      filtered classical observation
//   truncated[:<fraction>]             modal truncation, M = floor(frac*N);
//                                      default M = floor(2N/pi) - 2
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure in any row.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavobs::runner {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string command;                 // spectrum | constants | control | filters
  std::vector<int> n_list;             // nonempty, ascending
  double T = 8.0;
  double gamma = 1.0;                  // default Nitsche penalty for tags without one
  std::vector<std::string> pipelines;  // constants / control
  std::vector<std::string> filters;    // filters command (empty = all six)
  int eta_points = 101;                // filters command grid size
  int n_t = 0;                         // control: time samples (0 = 32N);
                                       // constants: quadrature node floor (0 = 64)
  int workers = 1;
  std::string out_dir = ".";
};

// Parse the config grammar:  '#' comments, optional [command] section header
// (must match the invoked command), key = value lines with keys
// N, T, gamma, pipelines, filters, eta_points, n_t, workers, out.
// Lists are comma-separated. Throws UsageError on malformed input.
RunOptions parse_config(std::istream& in, const std::string& command);
RunOptions load_config(const std::string& path, const std::string& command);

// One override; keys are the config keys. Throws UsageError on bad values.
void apply_override(RunOptions& opt, const std::string& key,
                    const std::string& value);

// Full validation of an options record (list shapes, pipeline tags parse,
// command-specific requirements). Throws UsageError.
void validate(const RunOptions& opt);

// FNV-1a hash of the computation-relevant fields (excludes workers/out_dir,
// which cannot change file contents).
std::uint64_t config_hash(const RunOptions& opt);

// Fixed float formatting used in all CSV cells: %.17g.
std::string fmt17(double x);

// Individual commands, writing CSV to the given streams. Return 0 or 3.
int cmd_spectrum(const RunOptions& opt, std::ostream& out);
int cmd_constants(const RunOptions& opt, std::ostream& out);
int cmd_control(const RunOptions& opt, std::ostream& controls,
                std::ostream& errors);
int cmd_filters(const RunOptions& opt, std::ostream& out);

// Dispatch + file creation in opt.out_dir. Returns the process exit code.
int run(const RunOptions& opt);

}  // namespace wavobs::runner
