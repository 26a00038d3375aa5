#include "wavobs/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include "wavobs/assembly.hpp"
#include "wavobs/filters.hpp"
#include "wavobs/hum.hpp"
#include "wavobs/kernels.hpp"
#include "wavobs/observability.hpp"

namespace wavobs::runner {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " from '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " from '" + s + "'");
  }
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const std::string& part : split(s, ',')) {
    const std::string p = trim(part);
    if (!p.empty()) out.push_back(parse_int(p, what));
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& s) {
  std::vector<std::string> out;
  for (const std::string& part : split(s, ',')) {
    const std::string p = trim(part);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// pipeline tags

struct PipelineSpec {
  enum class Kind {
    Classical,
    Mixed,
    NitscheSym,
    NitscheNonSym,
    Filtered,
    Truncated,
  };
  Kind kind = Kind::Classical;
  double gamma = 1.0;
  bool dropped = false;      // Nitsche observation without the penalty term
  filters::Filter filter;    // Filtered
  double fraction = -1.0;    // Truncated; < 0 selects floor(2N/pi) - 2
  std::string tag;           // echoed in the CSV
};

PipelineSpec parse_pipeline(const std::string& tag, double default_gamma) {
  PipelineSpec ps;
  ps.tag = tag;
  ps.gamma = default_gamma;
  const std::vector<std::string> parts = split(tag, ':');
  const std::string& head = parts[0];
  auto expect_parts = [&](std::size_t max_n) {
    if (parts.size() > max_n)
      throw UsageError("too many ':' fields in pipeline '" + tag + "'");
  };
  if (head == "classical") {
    expect_parts(1);
    ps.kind = PipelineSpec::Kind::Classical;
  } else if (head == "mixed") {
    expect_parts(1);
    ps.kind = PipelineSpec::Kind::Mixed;
  } else if (head == "nitsche-sym" || head == "nitsche-nonsym") {
    ps.kind = head == "nitsche-sym" ? PipelineSpec::Kind::NitscheSym
                                    : PipelineSpec::Kind::NitscheNonSym;
    expect_parts(3);
    bool have_gamma = false;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      if (parts[i] == "dropped") {
        if (i + 1 != parts.size())
          throw UsageError("'dropped' must be last in pipeline '" + tag + "'");
        ps.dropped = true;
      } else if (!have_gamma) {
        ps.gamma = parse_double(parts[i], "gamma in pipeline '" + tag + "'");
        have_gamma = true;
      } else {
        throw UsageError("unexpected field '" + parts[i] + "' in pipeline '" +
                         tag + "'");
      }
    }
    if (!(std::isfinite(ps.gamma) && ps.gamma > 0.0))
      throw UsageError("gamma must be finite and positive in '" + tag + "'");
  } else if (head == "filter") {
    expect_parts(4);
    if (parts.size() < 2 || trim(parts[1]).empty())
      throw UsageError("pipeline 'filter' needs a name: filter:<name>[:p[:alpha]]");
    int p = 4;
    double alpha = filters::kDefaultAlpha;
    if (parts.size() >= 3) p = parse_int(parts[2], "filter order p");
    if (parts.size() >= 4) alpha = parse_double(parts[3], "filter alpha");
    try {
      ps.filter = filters::Filter::from_name(parts[1], p, alpha);
    } catch (const std::exception& e) {
      throw UsageError(std::string("bad filter spec '") + tag + "': " + e.what());
    }
    ps.kind = PipelineSpec::Kind::Filtered;
  } else if (head == "truncated") {
    expect_parts(2);
    if (parts.size() == 2) {
      ps.fraction = parse_double(parts[1], "truncation fraction");
      if (!(ps.fraction > 0.0 && ps.fraction <= 1.0))
        throw UsageError("truncation fraction must lie in (0,1] in '" + tag +
                         "'");
    }
    ps.kind = PipelineSpec::Kind::Truncated;
  } else {
    throw UsageError("unknown pipeline '" + tag + "'");
  }
  return ps;
}

filters::Filter parse_filter_spec(const std::string& spec) {
  const std::vector<std::string> parts = split(spec, ':');
  if (parts.size() > 3)
    throw UsageError("too many ':' fields in filter spec '" + spec + "'");
  int p = 4;
  double alpha = filters::kDefaultAlpha;
  if (parts.size() >= 2) p = parse_int(parts[1], "filter order p");
  if (parts.size() >= 3) alpha = parse_double(parts[2], "filter alpha");
  try {
    return filters::Filter::from_name(parts[0], p, alpha);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad filter spec '") + spec + "': " + e.what());
  }
}

int truncation_modes(const PipelineSpec& ps, int N) {
  int M = ps.fraction < 0.0
              ? static_cast<int>(std::floor(2.0 * N / kPi)) - 2
              : static_cast<int>(std::floor(ps.fraction * N));
  return std::max(1, std::min(N - 1, M));
}

// boundary-derivative-only observation for the Nitsche "dropped" comparison
kernels::Vector derivative_only_row(const assembly::SemiDiscreteSystem& sys) {
  kernels::Vector row(2 * sys.dof, 0.0);
  for (int j = 1; j <= sys.dof; ++j)
    row[j - 1] = 0.5 * j * (j + 1);
  return row;
}

struct Prepared {
  assembly::SemiDiscreteSystem sys;
  kernels::Vector obs;
};

Prepared prepare(const PipelineSpec& ps, int N) {
  using assembly::Formulation;
  Prepared prep;
  switch (ps.kind) {
    case PipelineSpec::Kind::Classical:
      prep.sys = assembly::assemble(Formulation::classical(), N);
      prep.obs = prep.sys.observation_row;
      break;
    case PipelineSpec::Kind::Mixed:
      prep.sys = assembly::assemble(Formulation::mixed(), N);
      prep.obs = prep.sys.observation_row;
      break;
    case PipelineSpec::Kind::NitscheSym:
      prep.sys =
          assembly::assemble(Formulation::nitsche_symmetric(ps.gamma), N);
      prep.obs = ps.dropped ? derivative_only_row(prep.sys)
                            : prep.sys.observation_row;
      break;
    case PipelineSpec::Kind::NitscheNonSym:
      prep.sys =
          assembly::assemble(Formulation::nitsche_nonsymmetric(ps.gamma), N);
      prep.obs = ps.dropped ? derivative_only_row(prep.sys)
                            : prep.sys.observation_row;
      break;
    case PipelineSpec::Kind::Filtered:
      prep.sys = assembly::assemble(Formulation::classical(), N);
      prep.obs = filters::filtered_observation_row(prep.sys, ps.filter);
      break;
    case PipelineSpec::Kind::Truncated: {
      const auto classical = assembly::assemble(Formulation::classical(), N);
      const auto report = observability::spectrum(classical);
      prep.sys = observability::truncated_observation(classical, report,
                                                      truncation_modes(ps, N));
      prep.obs = prep.sys.observation_row;
      break;
    }
  }
  return prep;
}

// ---------------------------------------------------------------------------
// shared output plumbing

void write_metadata(std::ostream& out, const RunOptions& opt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(opt)));
  out << "# config=" << buf << " command=" << opt.command
      << " T=" << fmt17(opt.T)
      << " solver_tol=1e-08 pencil_ridge_rel=1e-12 quad_panel_max=0.125\n";
}

void parallel_for(int n_tasks, int workers,
                  const std::function<void(int)>& fn) {
  if (workers <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto drain = [&] {
    for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(workers, n_tasks);
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
}

std::string csv_escape(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (c == ',' || c == '\n' || c == '\r') ? ';' : c;
  return out;
}

}  // namespace

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t config_hash(const RunOptions& opt) {
  std::string canon = opt.command;
  canon += "|N=";
  for (int n : opt.n_list) canon += std::to_string(n) + ",";
  canon += "|T=" + fmt17(opt.T) + "|gamma=" + fmt17(opt.gamma);
  canon += "|pipelines=";
  for (const auto& p : opt.pipelines) canon += p + ";";
  canon += "|filters=";
  for (const auto& f : opt.filters) canon += f + ";";
  canon += "|eta_points=" + std::to_string(opt.eta_points);
  canon += "|n_t=" + std::to_string(opt.n_t);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void apply_override(RunOptions& opt, const std::string& key,
                    const std::string& value) {
  if (key == "N") {
    opt.n_list = parse_int_list(value, "N");
  } else if (key == "T") {
    opt.T = parse_double(value, "T");
  } else if (key == "gamma") {
    opt.gamma = parse_double(value, "gamma");
  } else if (key == "pipelines") {
    opt.pipelines = parse_string_list(value);
  } else if (key == "filters") {
    opt.filters = parse_string_list(value);
  } else if (key == "eta_points") {
    opt.eta_points = parse_int(value, "eta_points");
  } else if (key == "n_t") {
    opt.n_t = parse_int(value, "n_t");
  } else if (key == "workers") {
    opt.workers = parse_int(value, "workers");
  } else if (key == "out") {
    opt.out_dir = value;
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

RunOptions parse_config(std::istream& in, const std::string& command) {
  RunOptions opt;
  opt.command = command;
  std::string line;
  int lineno = 0;
  bool seen_section = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw UsageError("config line " + std::to_string(lineno) +
                         ": unterminated section header");
      const std::string section = trim(line.substr(1, line.size() - 2));
      if (seen_section)
        throw UsageError("config line " + std::to_string(lineno) +
                         ": only one section per config file");
      if (!command.empty() && section != command)
        throw UsageError("config section [" + section +
                         "] does not match command '" + command + "'");
      if (command.empty()) opt.command = section;
      seen_section = true;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    apply_override(opt, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return opt;
}

RunOptions load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_config(in, command);
}

void validate(const RunOptions& opt) {
  if (opt.command != "spectrum" && opt.command != "constants" &&
      opt.command != "control" && opt.command != "filters")
    throw UsageError("unknown command '" + opt.command + "'");
  if (!(opt.T > 0.0)) throw UsageError("T must be positive");
  if (!(std::isfinite(opt.gamma) && opt.gamma > 0.0))
    throw UsageError("gamma must be finite and positive");
  if (opt.workers < 1) throw UsageError("workers must be at least 1");
  if (opt.n_t < 0) throw UsageError("n_t must be nonnegative");

  if (opt.command != "filters") {
    if (opt.n_list.empty()) throw UsageError("N list must not be empty");
    for (std::size_t i = 0; i < opt.n_list.size(); ++i) {
      if (opt.n_list[i] < 4)
        throw UsageError("every N must be at least 4");
      if (i > 0 && opt.n_list[i] <= opt.n_list[i - 1])
        throw UsageError("N list must be strictly ascending");
    }
  }
  if (opt.command == "constants" || opt.command == "control") {
    if (opt.pipelines.empty())
      throw UsageError("at least one pipeline is required");
    for (const auto& tag : opt.pipelines) {
      const PipelineSpec ps = parse_pipeline(tag, opt.gamma);
      if (opt.command == "control" &&
          ps.kind == PipelineSpec::Kind::Truncated)
        throw UsageError(
            "pipeline 'truncated' is not supported by the control command");
    }
    if (opt.command == "constants" && opt.n_t > 0 && opt.n_t < 64)
      throw UsageError("constants needs n_t >= 64 quadrature nodes");
  }
  if (opt.command == "filters") {
    if (opt.eta_points < 2) throw UsageError("eta_points must be at least 2");
    for (const auto& spec : opt.filters) parse_filter_spec(spec);
  }
}

int cmd_spectrum(const RunOptions& opt, std::ostream& out) {
  write_metadata(out, opt);
  out << "N,k,sqrt_lambda,k_pi,gap,delta\n";
  std::vector<std::string> blocks(opt.n_list.size());
  parallel_for(
      static_cast<int>(opt.n_list.size()), opt.workers, [&](int i) {
        const int N = opt.n_list[i];
        const auto sys =
            assembly::assemble(assembly::Formulation::classical(), N);
        const auto report = observability::spectrum(sys);
        std::string rows;
        for (int k = 1; k <= N - 1; ++k) {
          rows += std::to_string(N) + "," + std::to_string(k) + "," +
                  fmt17(std::sqrt(report.lambdas[k - 1])) + "," +
                  fmt17(k * kPi / 2.0) + "," +
                  fmt17(report.sqrt_gaps[k - 1]) + "," +
                  fmt17(report.deltas[k - 1]) + "\n";
        }
        blocks[i] = std::move(rows);
      });
  for (const auto& b : blocks) out << b;
  return 0;
}

int cmd_constants(const RunOptions& opt, std::ostream& out) {
  write_metadata(out, opt);
  out << "pipeline,N,T,c_NT,C_NT,gramian_check_residual,error\n";
  struct Job {
    PipelineSpec ps;
    int N = 0;
  };
  std::vector<Job> jobs;
  for (const auto& tag : opt.pipelines) {
    const PipelineSpec ps = parse_pipeline(tag, opt.gamma);
    for (int N : opt.n_list) jobs.push_back({ps, N});
  }
  std::vector<std::string> rows(jobs.size());
  std::atomic<bool> failed{false};
  const int quad_nodes = opt.n_t > 0 ? opt.n_t : 64;
  parallel_for(static_cast<int>(jobs.size()), opt.workers, [&](int i) {
    const Job& job = jobs[i];
    std::string row = csv_escape(job.ps.tag) + "," + std::to_string(job.N) +
                      "," + fmt17(opt.T) + ",";
    try {
      const Prepared prep = prepare(job.ps, job.N);
      const kernels::Matrix Wc = observability::gramian_chen(
          prep.sys.state_matrix, prep.obs, opt.T);
      const kernels::Matrix Wq = observability::gramian_quadrature(
          prep.sys.state_matrix, prep.obs, opt.T, quad_nodes);
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < Wc.a.size(); ++j) {
        const double d = Wc.a[j] - Wq.a[j];
        num += d * d;
        den += Wc.a[j] * Wc.a[j];
      }
      const double resid = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
      const auto rhs = observability::energy_pencil_rhs(prep.sys);
      const auto cc = observability::constants(Wc, rhs.B);
      row += fmt17(cc.first) + "," + fmt17(cc.second) + "," + fmt17(resid) +
             ",";
    } catch (const std::exception& e) {
      row += "nan,nan,nan," + csv_escape(e.what());
      failed = true;
    }
    rows[i] = row + "\n";
  });
  for (const auto& r : rows) out << r;
  return failed ? 3 : 0;
}

int cmd_control(const RunOptions& opt, std::ostream& controls,
                std::ostream& errors) {
  write_metadata(controls, opt);
  controls << "pipeline,N,t,vN\n";
  write_metadata(errors, opt);
  errors << "pipeline,N,e_u0,e_u1,e_v,c_NT,error\n";

  // closed-form reference rows first, on a fixed 512-interval grid
  const auto exact = hum::exact_example();
  {
    const int n_exact = 512;
    for (int j = 0; j <= n_exact; ++j) {
      const double t = opt.T * j / n_exact;
      controls << "exact,0," << fmt17(t) << "," << fmt17(exact.v(t)) << "\n";
    }
  }

  struct Job {
    PipelineSpec ps;
    int N = 0;
  };
  std::vector<Job> jobs;
  for (const auto& tag : opt.pipelines) {
    const PipelineSpec ps = parse_pipeline(tag, opt.gamma);
    for (int N : opt.n_list) jobs.push_back({ps, N});
  }
  std::vector<std::string> control_blocks(jobs.size());
  std::vector<std::string> error_rows(jobs.size());
  std::atomic<bool> failed{false};

  hum::ControlProblem problem;
  problem.y0 = [](double x) { return x + 1.0; };
  problem.y1 = [](double) { return 0.0; };
  problem.T = opt.T;

  parallel_for(static_cast<int>(jobs.size()), opt.workers, [&](int i) {
    const Job& job = jobs[i];
    const std::string prefix =
        csv_escape(job.ps.tag) + "," + std::to_string(job.N) + ",";
    try {
      const Prepared prep = prepare(job.ps, job.N);
      const kernels::Matrix W = observability::gramian_chen(
          prep.sys.state_matrix, prep.obs, opt.T);
      const auto result =
          hum::solve_control(problem, prep.sys, prep.obs, W, opt.n_t);
      const auto norms = hum::error_norms(result, prep.sys, exact);
      const auto rhs = observability::energy_pencil_rhs(prep.sys);
      const double c = observability::constants(W, rhs.B).first;
      std::string rows;
      for (std::size_t j = 0; j < result.t_samples.size(); ++j)
        rows += prefix + fmt17(result.t_samples[j]) + "," +
                fmt17(result.v_samples[j]) + "\n";
      control_blocks[i] = std::move(rows);
      error_rows[i] = prefix + fmt17(norms.e_u0) + "," + fmt17(norms.e_u1) +
                      "," + fmt17(norms.e_v) + "," + fmt17(c) + ",";
      if (!result.warning.empty())
        error_rows[i] += csv_escape(result.warning);
      error_rows[i] += "\n";
    } catch (const std::exception& e) {
      error_rows[i] =
          prefix + "nan,nan,nan,nan," + csv_escape(e.what()) + "\n";
      failed = true;
    }
  });
  for (const auto& b : control_blocks) controls << b;
  for (const auto& r : error_rows) errors << r;
  return failed ? 3 : 0;
}

int cmd_filters(const RunOptions& opt, std::ostream& out) {
  write_metadata(out, opt);
  out << "filter,eta,sigma\n";
  std::vector<std::string> specs = opt.filters;
  if (specs.empty())
    specs = {"cesaro",   "lanczos", "raised-cosine",
             "sharpened-raised-cosine", "vandeven", "exponential"};
  for (const auto& spec : specs) {
    const filters::Filter f = parse_filter_spec(spec);
    for (int i = 0; i < opt.eta_points; ++i) {
      const double eta = static_cast<double>(i) / (opt.eta_points - 1);
      out << csv_escape(spec) << "," << fmt17(eta) << ","
          << fmt17(filters::sigma(f, eta)) << "\n";
    }
  }
  return 0;
}

int run(const RunOptions& opt) {
  validate(opt);
  namespace fs = std::filesystem;
  fs::create_directories(opt.out_dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(opt.out_dir) / name);
    if (!out) throw UsageError("cannot write to '" + opt.out_dir + "'");
    return out;
  };
  if (opt.command == "spectrum") {
    auto out = open("spectrum.csv");
    return cmd_spectrum(opt, out);
  }
  if (opt.command == "constants") {
    auto out = open("constants.csv");
    return cmd_constants(opt, out);
  }
  if (opt.command == "control") {
    auto controls = open("controls.csv");
    auto errors = open("control_errors.csv");
    return cmd_control(opt, controls, errors);
  }
  auto out = open("filters.csv");
  return cmd_filters(opt, out);
}

}  // namespace wavobs::runner
