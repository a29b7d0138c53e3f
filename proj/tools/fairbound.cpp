// fairbound: bounds on the alpha-optimal value of a one-dimensional cake.
//
//   fairbound bounds   <instance.json> (--beta b1,b2,... ... | --legut | --single b1,...)
//   fairbound refine   <instance.json> [--mode random|subgradient] [--iters N] ...
//   fairbound oracle   <instance.json> [--cells K]
//   fairbound plotdata <instance.json> --out DIR [--trace trace.csv]
//
// The JSON report goes to stdout at full precision; a 6-digit summary goes
// to stderr. Exit codes: 0 ok, 1 usage or numerical failure, 2 invalid or
// unreadable instance, 3 output I/O failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fairbound/fairbound.hpp"

namespace fs = std::filesystem;
using namespace fairbound;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInstance = 2;
constexpr int kExitIo = 3;

struct ExitError {
  int code;
  std::string message;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::size_t thread_budget() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FAIRBOUND_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    } catch (const std::exception&) {
      throw ExitError{kExitUsage, "FAIRBOUND_THREADS must be a positive integer"};
    }
  }
  return n;
}

// "0.4,0.3,0.3" or "1/3,1/3,1/3".
double parse_component(const std::string& tok) {
  std::size_t used = 0;
  const auto slash = tok.find('/');
  double v = 0.0;
  if (slash == std::string::npos) {
    v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
  } else {
    const std::string num = tok.substr(0, slash);
    const std::string den = tok.substr(slash + 1);
    std::size_t u1 = 0, u2 = 0;
    v = std::stod(num, &u1) / std::stod(den, &u2);
    if (u1 != num.size() || u2 != den.size()) throw std::invalid_argument(tok);
  }
  return v;
}

WeightVector parse_beta(const std::string& text, std::size_t n) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  try {
    while (std::getline(ss, tok, ',')) v.push_back(parse_component(tok));
  } catch (const std::exception&) {
    throw ExitError{kExitUsage, "cannot parse weight vector '" + text + "'"};
  }
  if (v.size() != n) {
    throw ExitError{kExitUsage, "weight vector '" + text + "' needs " + std::to_string(n) +
                                    " components"};
  }
  double s = 0.0;
  for (double b : v) s += b;
  if (std::abs(s - 1.0) > 1e-6) throw ExitError{kExitUsage, "weights '" + text + "' do not sum to 1"};
  try {
    return WeightVector::normalize(std::move(v));
  } catch (const std::invalid_argument& e) {
    throw ExitError{kExitUsage, e.what()};
  }
}

Instance load_or_exit(const std::string& path) {
  try {
    return load_instance(path);
  } catch (const InstanceIoError& e) {
    throw ExitError{kExitInstance, e.what()};
  } catch (const InstanceError& e) {
    throw ExitError{kExitInstance, std::string(path) + ": " + e.what()};
  }
}

void print_summary(const RunReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << r.mode << ": ";
  if (r.oracle) {
    os << "oracle value " << r.oracle->value << " (K=" << r.oracle->cells << ", dual "
       << r.oracle->dual_value << ", slack " << r.oracle->slack << ")";
  } else {
    if (r.lower) {
      os << *r.lower;
    } else {
      os << "(no lower bound)";
    }
    os << " <= v <= ";
    if (r.upper) {
      os << *r.upper;
    } else {
      os << "inf";
    }
    os << "  [cone " << r.cone_status << ", " << r.evvs.size() << " supporting EVVs";
    if (r.iterations) os << ", " << r.iterations << " iterations";
    os << "]";
  }
  std::cerr << os.str() << '\n';
}

void emit(RunReport r, const Stopwatch& clock) {
  r.wall_time_s = clock.seconds();
  std::cout << to_json(r).dump(2) << '\n';
  print_summary(r);
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExitError{kExitIo, "cannot write " + path.string()};
  out << body;
  out.flush();
  if (!out) throw ExitError{kExitIo, "write failed for " + path.string()};
}

// --- subcommands ----------------------------------------------------------

struct BoundsArgs {
  std::string path;
  std::vector<std::string> betas;
  bool legut = false;
  std::string single;
  bool normalize = false;
};

void cmd_bounds(const BoundsArgs& a) {
  Stopwatch clock;
  Instance inst = load_or_exit(a.path);
  const std::string digest = instance_digest(inst.raw());
  if (a.normalize) inst = inst.normalized();
  const auto& alpha = inst.claims();

  const int modes = (a.legut ? 1 : 0) + (a.single.empty() ? 0 : 1) + (a.betas.empty() ? 0 : 1);
  if (modes != 1) throw ExitError{kExitUsage, "give exactly one of --beta, --legut, --single"};

  BoundsResult b;
  std::string mode;
  try {
    if (a.legut) {
      mode = "legut";
      b = legut_bounds(inst, compute_evv(inst, WeightVector::uniform(inst.n())), alpha);
    } else if (!a.single.empty()) {
      mode = "single";
      b = single_evv_bounds(inst, compute_evv(inst, parse_beta(a.single, inst.n())), alpha);
    } else {
      mode = "multi";
      std::vector<WeightVector> betas;
      for (const auto& s : a.betas) betas.push_back(parse_beta(s, inst.n()));
      const auto evvs = compute_evvs(inst, betas, {}, thread_budget());
      b = cone_bounds(evvs, alpha);
    }
  } catch (const std::invalid_argument& e) {
    throw ExitError{kExitInstance, e.what()};
  }

  RunReport r = RunReport::from_bounds(b);
  r.digest = digest;
  r.mode = mode;
  r.alpha = alpha;
  emit(std::move(r), clock);
}

struct RefineArgs {
  std::string path;
  std::string mode = "subgradient";
  std::size_t iters = 200;
  std::uint64_t seed = 42;
  double gap = 1e-3;
  double step = 0.5;
  double floor = 1e-6;
  std::string trace = "trace.csv";
};

void cmd_refine(const RefineArgs& a) {
  Stopwatch clock;
  const Instance inst = load_or_exit(a.path);
  const auto& alpha = inst.claims();

  RefineOutcome out;
  if (a.iters == 0) {
    // Nothing evaluated: the corner basis alone.
    out.bounds = SupportSet::corners(inst, alpha).current();
  } else if (a.mode == "random") {
    out = refine_random(inst, alpha, a.iters, a.seed);
  } else {
    RefineConfig cfg;
    cfg.mode = RefineMode::subgradient;
    cfg.max_iter = a.iters;
    cfg.seed = a.seed;
    cfg.gap_tol = a.gap;
    cfg.step = a.step;
    cfg.floor = a.floor;
    try {
      cfg.validate(inst.n());
    } catch (const std::invalid_argument& e) {
      throw ExitError{kExitUsage, e.what()};
    }
    out = refine_subgradient(inst, alpha, cfg);
  }

  if (!a.trace.empty()) {
    std::ostringstream csv;
    out.trace.write_csv(csv);
    write_file(a.trace, csv.str());
  }

  RunReport r = RunReport::from_bounds(out.bounds);
  r.digest = instance_digest(inst.raw());
  r.mode = "refine-" + a.mode;
  r.alpha = alpha;
  r.iterations = out.iterations;
  emit(std::move(r), clock);
}

void cmd_oracle(const std::string& path, std::size_t cells) {
  Stopwatch clock;
  const Instance inst = load_or_exit(path);
  if (cells < inst.n()) throw ExitError{kExitUsage, "--cells must be at least the number of agents"};
  const auto d = discretize(inst, cells);
  const auto o = oracle_value(d);

  RunReport r;
  r.digest = instance_digest(inst.raw());
  r.mode = "oracle";
  r.alpha = inst.claims();
  r.cone_status = "n/a";
  r.oracle = OracleSummary{d.cells(), o.value, o.dual_value, resolution_slack(d), o.pivots};
  emit(std::move(r), clock);
}

void cmd_plotdata(const std::string& path, const std::string& out_dir, const std::string& trace) {
  const Instance inst = load_or_exit(path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw ExitError{kExitIo, "cannot create directory " + out_dir};

  constexpr std::size_t kSamples = 512;
  std::ostringstream dens;
  dens.precision(17);
  dens << "x";
  for (std::size_t i = 0; i < inst.n(); ++i) dens << ",f_" << i + 1;
  dens << '\n';
  for (std::size_t k = 0; k < kSamples; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(kSamples - 1);
    dens << x;
    for (const auto& f : inst.densities()) dens << ',' << f(x);
    dens << '\n';
  }
  write_file(fs::path(out_dir) / "densities.csv", dens.str());

  if (!trace.empty()) {
    std::ifstream in(trace);
    if (!in) throw ExitError{kExitIo, "cannot read trace " + trace};
    RefineTrace tr;
    try {
      tr = RefineTrace::read_csv(in);
    } catch (const std::exception& e) {
      throw ExitError{kExitIo, "malformed trace " + trace + ": " + e.what()};
    }
    std::ostringstream series;
    series.precision(17);
    series << "iteration,lower,upper\n";
    for (const auto& s : tr.steps) series << s.iteration << ',' << s.lower << ',' << s.upper << '\n';
    write_file(fs::path(out_dir) / "bounds.csv", series.str());
  }
  std::cerr << "wrote plot data to " << out_dir << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guaranteed bounds on the alpha-optimal partition value"};
  app.require_subcommand(1);

  BoundsArgs bounds;
  auto* sb = app.add_subcommand("bounds", "Bounds from a list of EVVs");
  sb->add_option("instance", bounds.path, "Instance JSON file")->required();
  sb->add_option("--beta", bounds.betas, "Weight vector, e.g. 0.4,0.3,0.3 (repeatable)")
      ->allow_extra_args(false);
  sb->add_flag("--legut", bounds.legut, "Uniform weights, single-EVV bounds (probability measures)");
  sb->add_option("--single", bounds.single, "Single-EVV bounds for the given weights");
  sb->add_flag("--normalize", bounds.normalize, "Rescale every density to total mass 1");

  RefineArgs refine;
  auto* sr = app.add_subcommand("refine", "Improve the bounds by updating the EVV set");
  sr->add_option("instance", refine.path, "Instance JSON file")->required();
  sr->add_option("--mode", refine.mode, "random or subgradient")
      ->check(CLI::IsMember({"random", "subgradient"}));
  sr->add_option("--iters", refine.iters, "Random samples or subgradient iterations");
  sr->add_option("--seed", refine.seed, "Seed for random mode");
  sr->add_option("--gap", refine.gap, "Stop once upper - lower <= gap (subgradient)");
  sr->add_option("--step", refine.step, "Subgradient step constant");
  sr->add_option("--floor", refine.floor, "Minimum weight after projection");
  sr->add_option("--trace", refine.trace, "Trace CSV path (empty to skip)");

  std::string oracle_path;
  std::size_t cells = 400;
  auto* so = app.add_subcommand("oracle", "Discretized LP value");
  so->add_option("instance", oracle_path, "Instance JSON file")->required();
  so->add_option("--cells", cells, "Number of uniform cells");

  std::string plot_path, plot_out, plot_trace;
  auto* sp = app.add_subcommand("plotdata", "Density samples and bound series as CSV");
  sp->add_option("instance", plot_path, "Instance JSON file")->required();
  sp->add_option("--out", plot_out, "Output directory")->required();
  sp->add_option("--trace", plot_trace, "Trace CSV written by refine");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sb) cmd_bounds(bounds);
    if (*sr) cmd_refine(refine);
    if (*so) cmd_oracle(oracle_path, cells);
    if (*sp) cmd_plotdata(plot_path, plot_out, plot_trace);
  } catch (const ExitError& e) {
    std::cerr << "fairbound: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "fairbound: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
