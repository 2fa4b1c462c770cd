#include "sramm/cli.hpp"

#include "sramm/amm.hpp"
#include "sramm/bss.hpp"
#include "sramm/error.hpp"
#include "sramm/experiments.hpp"
#include "sramm/generators.hpp"
#include "sramm/io.hpp"
#include "sramm/parallel.hpp"
#include "sramm/rng.hpp"
#include "sramm/solvers.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace sramm::cli {

namespace {

/// Invalid configuration value; `key` names the offending option.
struct UsageError : std::runtime_error {
  UsageError(const std::string& key, const std::string& msg) : std::runtime_error(key + ": " + msg) {}
};

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw UsageError(key, msg);
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Expands "--config FILE" into "--key=value" tokens placed before the explicit
// flags, so explicit flags win under the take-last policy.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::vector<std::string> from_file;
  std::vector<std::string> rest;
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      require(i + 1 < args.size(), "config", "missing file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::Io, "cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      require(eq != std::string::npos, "config", path + ":" + std::to_string(line_no) + ": expected key=value");
      from_file.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
    }
  }
  std::vector<std::string> out{args[0]};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

struct DataOptions {
  std::string a_path;
  std::string b_path;
  Eigen::Index n = 512;
  Eigen::Index d = 64;
  std::string spectrum = "geom:0.7071067811865476";
};

struct SketchOptions {
  std::string family = "gaussian";
  Eigen::Index k = 8;
  double eps = 0.25;
  double delta = 0.05;
  double c = 1.0;
  Eigen::Index m = 0;
  Eigen::Index s = 0;
  std::string chain;
};

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
};

void add_data_options(CLI::App* app, DataOptions& o) {
  app->add_option("--a", o.a_path, "Matrix file for A");
  app->add_option("--b", o.b_path, "Matrix file for B (defaults to A when --a is given)");
  app->add_option("--n", o.n, "Rows of generated inputs");
  app->add_option("--d", o.d, "Columns of generated inputs");
  app->add_option("--spectrum", o.spectrum, "Spectrum of generated inputs (geom:q, poly:p, flat:r, list:...)");
}

void add_sketch_options(CLI::App* app, SketchOptions& o) {
  app->add_option("--family", o.family, "gaussian | sign | srht | sparse | composed | identity");
  app->add_option("--k", o.k, "Stable-rank budget k");
  app->add_option("--eps", o.eps, "Accuracy eps");
  app->add_option("--delta", o.delta, "Failure probability delta");
  app->add_option("--c", o.c, "Planner constant");
  app->add_option("--m", o.m, "Explicit sketch rows (overrides the planner)");
  app->add_option("--s", o.s, "Nonzeros per column for sparse embeddings with explicit --m");
  app->add_option("--chain", o.chain, "Composed factors outermost first, e.g. gaussian:176,sparse:2048:1");
}

void add_common(CLI::App* app, Common& o, bool with_out = true) {
  app->add_option("--seed", o.seed, "Base seed");
  app->add_option("--threads", o.threads, "Worker threads for Monte-Carlo trials");
  if (with_out) app->add_option("--out", o.out, "Output file (stdout when omitted)");
}

struct Pair {
  Matrix a;
  Matrix b;
};

Pair load_pair(const DataOptions& o, std::uint64_t seed) {
  Pair p;
  if (!o.a_path.empty()) {
    p.a = read_matrix(o.a_path);
    p.b = o.b_path.empty() ? p.a : read_matrix(o.b_path);
    require(p.a.rows() == p.b.rows(), "b", "A and B must have the same number of rows");
    return p;
  }
  require(o.b_path.empty(), "b", "--b requires --a");
  require(o.n >= 1, "n", "must be >= 1");
  require(o.d >= 1, "d", "must be >= 1");
  const auto spectrum = parse_spectrum(o.spectrum, std::min(o.n, o.d));
  require(static_cast<Eigen::Index>(spectrum.size()) <= std::min(o.n, o.d), "spectrum", "longer than min(n, d)");
  p.a = gen_decay(o.n, o.d, spectrum, derive_seed(seed, 101));
  p.b = gen_decay(o.n, o.d, spectrum, derive_seed(seed, 102));
  return p;
}

Family family_of(const SketchOptions& o) {
  const auto f = parse_family(o.family);
  require(f.has_value(), "family", "unknown family '" + o.family + "'");
  return *f;
}

void check_sketch_ranges(const SketchOptions& o, bool planner_used) {
  require(o.k >= 1, "k", "must be >= 1");
  require(o.eps > 0.0, "eps", "must be positive");
  require(o.c > 0.0, "c", "must be positive");
  require(o.m >= 0, "m", "must be non-negative");
  require(o.s >= 0, "s", "must be non-negative");
  if (planner_used) {
    require(o.eps <= 0.5, "eps", "planner requires eps <= 1/2");
    require(o.delta > 0.0 && o.delta < 0.5, "delta", "planner requires 0 < delta < 1/2");
  }
}

SketchSpec parse_factor(const std::string& text, Eigen::Index n) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  require(parts.size() >= 2, "chain", "factor '" + text + "' needs family:m");
  const auto family = parse_family(parts[0]);
  require(family.has_value() && *family != Family::Composed, "chain", "bad factor family in '" + text + "'");
  SketchSpec spec;
  spec.family = *family;
  spec.n = n;
  try {
    spec.m = std::stoll(parts[1]);
    if (spec.family == Family::SparseEmbedding) spec.s = parts.size() > 2 ? std::stoll(parts[2]) : 1;
  } catch (const std::exception&) {
    throw UsageError("chain", "bad number in '" + text + "'");
  }
  return spec;
}

SketchSpec make_spec(const SketchOptions& o, Eigen::Index n, std::uint64_t seed) {
  const Family family = family_of(o);
  if (family == Family::Identity) return identity_spec(n);
  if (family == Family::Composed) {
    require(!o.chain.empty(), "chain", "composed family needs --chain");
    std::vector<std::string> items;
    std::stringstream ss(o.chain);
    std::string item;
    while (std::getline(ss, item, ',')) items.push_back(trim(item));
    std::vector<SketchSpec> specs(items.size());
    Eigen::Index input = n;
    for (std::size_t i = items.size(); i-- > 0;) {
      specs[i] = parse_factor(items[i], input);
      input = specs[i].m;
    }
    try {
      return with_seed(compose(specs), seed);
    } catch (const Error& e) {
      throw UsageError("chain", e.what());
    }
  }
  check_sketch_ranges(o, o.m == 0);
  if (o.m > 0) {
    SketchSpec spec{family, o.m, n, family == Family::SparseEmbedding ? std::max<Eigen::Index>(o.s, 1) : 0, {}, seed};
    try {
      validate(spec);
    } catch (const Error& e) {
      throw UsageError("m", e.what());
    }
    return spec;
  }
  return planned_spec(family, o.k, o.eps, o.delta, o.c, n, seed);
}

/// Writes CSV to --out or `out`.
class CsvSink {
 public:
  CsvSink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    }
    os_ = file_ ? file_.get() : &fallback;
  }
  std::ostream& stream() { return *os_; }
  bool to_file() const { return file_ != nullptr; }
  void finish() {
    os_->flush();
    if (!*os_) throw Error(ErrorCode::Io, "failed writing report");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

std::string fmt(double x) { return format_double(x); }
const char* yes_no(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------- commands

int cmd_gen(const DataOptions& d, Eigen::Index rank_r, double noise, const Common& c, std::ostream& out) {
  require(!c.out.empty(), "out", "gen needs an output file");
  require(d.n >= 1, "n", "must be >= 1");
  require(d.d >= 1, "d", "must be >= 1");
  Matrix a;
  if (rank_r >= 0) {
    require(rank_r <= std::min(d.n, d.d), "rank", "must not exceed min(n, d)");
    require(noise >= 0.0, "noise", "must be non-negative");
    a = gen_lowrank_plus_noise(d.n, d.d, rank_r, noise, c.seed);
  } else {
    const auto spectrum = parse_spectrum(d.spectrum, std::min(d.n, d.d));
    require(static_cast<Eigen::Index>(spectrum.size()) <= std::min(d.n, d.d), "spectrum", "longer than min(n, d)");
    a = gen_decay(d.n, d.d, spectrum, c.seed);
  }
  write_matrix(c.out, a);
  out << "wrote " << a.rows() << "x" << a.cols() << " matrix to " << c.out << " (stable_rank="
      << fmt(a.norm() > 0 ? stable_rank(a) : 0.0) << ")\n";
  return kExitOk;
}

int cmd_amm(const DataOptions& d, const SketchOptions& so, int trials, const Common& c, std::ostream& out) {
  require(trials >= 1, "trials", "must be >= 1");
  const Pair p = load_pair(d, c.seed);
  const SketchSpec spec = make_spec(so, p.a.rows(), c.seed);
  const FailureEstimate est =
      estimate_failure_rate(spec, p.a, p.b, static_cast<double>(so.k), so.eps, trials, c.seed, c.threads);

  CsvSink sink(c.out, out);
  auto& os = sink.stream();
  os << "trial,error,bound,pass\n";
  double mean_error = 0.0;
  for (std::size_t t = 0; t < est.reports.size(); ++t) {
    const auto& r = est.reports[t];
    os << t << ',' << fmt(r.error) << ',' << fmt(r.bound) << ',' << yes_no(r.pass) << '\n';
    mean_error += r.error / trials;
  }
  const double threshold = 2.0 * so.delta;
  os << "summary," << fmt(mean_error) << ',' << fmt(est.reports.front().bound) << ',' << fmt(1.0 - est.rate) << '\n';
  sink.finish();
  if (sink.to_file()) {
    out << "sketch=" << describe(spec) << " failure_rate=" << fmt(est.rate) << " threshold=" << fmt(threshold) << '\n';
  }
  return est.rate <= threshold ? kExitOk : kExitCheckFailed;
}

int cmd_ose(const SketchOptions& so, Eigen::Index n, Eigen::Index dim, int ell, int trials, const Common& c,
            std::ostream& out) {
  require(trials >= 1, "trials", "must be >= 1");
  require(ell >= 1, "ell", "must be >= 1");
  require(n >= 1, "n", "must be >= 1");
  require(dim >= 1 && dim <= n, "dim", "must be in [1, n]");
  require(so.eps > 0.0, "eps", "must be positive");
  require(so.delta > 0.0 && so.delta < 1.0, "delta", "must be in (0, 1)");
  SketchOptions planned = so;
  planned.k = dim;
  const SketchSpec spec = make_spec(planned, n, c.seed);
  const Matrix u = random_orthonormal(n, dim, derive_seed(c.seed, 103));
  const MomentEstimate est = estimate_ose_moment(spec, u, ell, trials, c.seed, c.threads);
  const double threshold = std::pow(so.eps, ell) * so.delta;

  CsvSink sink(c.out, out);
  auto& os = sink.stream();
  os << "trial,distortion,moment_term,threshold\n";
  double mean = 0.0;
  for (std::size_t t = 0; t < est.distortions.size(); ++t) {
    const double x = est.distortions[t];
    os << t << ',' << fmt(x) << ',' << fmt(std::pow(x, ell)) << ',' << fmt(threshold) << '\n';
    mean += x / trials;
  }
  os << "summary," << fmt(mean) << ',' << fmt(est.mean) << ',' << fmt(threshold) << '\n';
  sink.finish();
  if (sink.to_file()) {
    out << "sketch=" << describe(spec) << " moment=" << fmt(est.mean) << " std_error=" << fmt(est.std_error)
        << " threshold=" << fmt(threshold) << '\n';
  }
  return est.mean <= threshold ? kExitOk : kExitCheckFailed;
}

int cmd_bss(const DataOptions& d, double k, double eps, const std::string& method, Eigen::Index samples,
            const Common& c, std::ostream& out) {
  require(k > 0.0, "k", "must be positive");
  require(eps > 0.0 && eps < 1.0, "eps", "must be in (0, 1)");
  require(method == "bss" || method == "importance", "method", "must be bss or importance");
  require(!c.out.empty(), "out", "bss needs an output selection file");

  Pair p;
  bool paired = !d.b_path.empty();
  if (d.a_path.empty()) {
    p = load_pair(d, c.seed);
    // Generated inputs are scaled into the |A|^2 <= 1, |A|_F^2 <= k regime.
    const double scale = std::max(spectral_norm(p.a), frobenius_norm(p.a) / std::sqrt(k));
    p.a /= scale;
    p.b = p.a;
  } else {
    p.a = read_matrix(d.a_path);
    p.b = paired ? read_matrix(d.b_path) : p.a;
    require(p.a.rows() == p.b.rows(), "b", "A and B must have the same number of rows");
  }

  RowSelection sel;
  double bound = 0.0;
  if (method == "importance") {
    require(samples >= 1, "samples", "must be >= 1");
    sel = importance_sample(p.a, p.b, samples, c.seed);
    bound = amm_bound(p.a, p.b, std::max(1.0, k), eps);
  } else if (paired) {
    sel = bss_amm(p.a, p.b, k, eps);
    bound = amm_bound(p.a, p.b, std::max(1.0, k), eps);
  } else {
    sel = bss_select(p.a, k, eps);
    bound = eps;
  }
  const Matrix sa = apply_selection(sel, p.a);
  const Matrix sb = apply_selection(sel, p.b);
  const double error = spectral_norm(sa.transpose() * sb - p.a.transpose() * p.b);
  const bool pass = error <= bound;
  write_selection(c.out, sel);
  out << "method=" << method << " nnz=" << sel.nnz << " steps=" << sel.steps << " error=" << fmt(error)
      << " bound=" << fmt(bound) << " pass=" << yes_no(pass) << '\n';
  return pass ? kExitOk : kExitCheckFailed;
}

struct TrialRow {
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

int write_trial_csv(const std::vector<TrialRow>& rows, const std::string& value_name, const std::string& bound_name,
                    double required_fraction, const Common& c, std::ostream& out, const std::string& extra) {
  CsvSink sink(c.out, out);
  auto& os = sink.stream();
  os << "trial," << value_name << ',' << bound_name << ",pass\n";
  double mean_value = 0.0;
  double mean_bound = 0.0;
  int passes = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    os << t << ',' << fmt(rows[t].value) << ',' << fmt(rows[t].bound) << ',' << yes_no(rows[t].pass) << '\n';
    mean_value += rows[t].value / static_cast<double>(rows.size());
    mean_bound += rows[t].bound / static_cast<double>(rows.size());
    passes += rows[t].pass ? 1 : 0;
  }
  const double fraction = static_cast<double>(passes) / static_cast<double>(rows.size());
  os << "summary," << fmt(mean_value) << ',' << fmt(mean_bound) << ',' << fmt(fraction) << '\n';
  sink.finish();
  if (sink.to_file()) out << extra << " pass_fraction=" << fmt(fraction) << " required=" << fmt(required_fraction) << '\n';
  return fraction >= required_fraction ? kExitOk : kExitCheckFailed;
}

constexpr double kRequiredPassFraction = 0.9;

int cmd_regress(const DataOptions& d, Eigen::Index p_cols, double noise, const SketchOptions& so, int trials,
                const Common& c, std::ostream& out) {
  require(trials >= 1, "trials", "must be >= 1");
  Matrix a;
  Matrix b;
  if (!d.a_path.empty()) {
    require(!d.b_path.empty(), "b", "regress needs both --a and --b");
    a = read_matrix(d.a_path);
    b = read_matrix(d.b_path);
    require(a.rows() == b.rows(), "b", "A and B must have the same number of rows");
  } else {
    require(d.n >= 1 && d.d >= 1 && d.d <= d.n, "d", "must be in [1, n]");
    require(p_cols >= 1, "p", "must be >= 1");
    require(noise >= 0.0, "noise", "must be non-negative");
    auto inst = gen_regression_instance(d.n, d.d, p_cols, noise, derive_seed(c.seed, 104));
    a = std::move(inst.a);
    b = std::move(inst.b);
  }
  const SketchSpec spec = make_spec(so, a.rows(), c.seed);
  std::vector<TrialRow> rows(static_cast<std::size_t>(trials));
  parallel_for(rows.size(), c.threads, [&](std::size_t t) {
    const Sketch sk = build(with_seed(spec, derive_seed(c.seed, t)));
    try {
      const auto rep = sketched_regression(a, b, sk, static_cast<double>(so.k), so.eps);
      rows[t] = {rep.err_sq, rep.bound, rep.pass};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankCollapse) throw;
      rows[t] = {std::numeric_limits<double>::infinity(), 0.0, false};
    }
  });
  return write_trial_csv(rows, "err_sq", "bound", kRequiredPassFraction, c, out, "sketch=" + describe(spec));
}

int cmd_lowrank(const DataOptions& d, const SketchOptions& so, int trials, const Common& c, std::ostream& out) {
  require(trials >= 1, "trials", "must be >= 1");
  Matrix a;
  if (!d.a_path.empty()) {
    a = read_matrix(d.a_path);
  } else {
    require(d.n >= 1 && d.d >= 1, "n", "dimensions must be positive");
    a = gen_decay(d.n, d.d, parse_spectrum(d.spectrum, std::min(d.n, d.d)), derive_seed(c.seed, 105));
  }
  const SketchSpec spec = make_spec(so, a.rows(), c.seed);
  std::vector<TrialRow> rows(static_cast<std::size_t>(trials));
  double tail_sr = 0.0;
  parallel_for(rows.size(), c.threads, [&](std::size_t t) {
    const auto rep = sketched_lowrank(a, so.k, build(with_seed(spec, derive_seed(c.seed, t))), so.eps);
    rows[t] = {rep.err_sq, rep.bound, rep.pass};
    if (t == 0) tail_sr = rep.tail_stable_rank;
  });
  return write_trial_csv(rows, "err_sq", "bound", kRequiredPassFraction, c, out,
                         "sketch=" + describe(spec) + " tail_stable_rank=" + fmt(tail_sr));
}

int cmd_krr(Eigen::Index n, double bandwidth, double lambda, double noise, double tolerance, const SketchOptions& so,
            int trials, const Common& c, std::ostream& out) {
  require(trials >= 1, "trials", "must be >= 1");
  require(n >= 2, "n", "must be >= 2");
  require(bandwidth > 0.0, "bandwidth", "must be positive");
  require(lambda > 0.0, "lambda", "must be positive");
  require(noise >= 0.0, "noise", "must be non-negative");
  const Family family = family_of(so);
  require(family != Family::Composed, "family", "krr takes a single sketch family");

  const KrrInstance inst = gen_krr_instance(n, noise, derive_seed(c.seed, 106));
  const KrrProblem problem{gaussian_kernel(inst.points, bandwidth), inst.y, lambda};
  const Vector alpha = krr_exact(problem);
  const double sr = stable_rank(problem.kernel);
  Eigen::Index m = so.m > 0 ? so.m : 4 * static_cast<Eigen::Index>(std::ceil(sr)) + 16;
  m = std::min(m, n);
  if (tolerance <= 0.0) tolerance = krr_reference(problem, alpha, inst.f_true, family, n / 2, derive_seed(c.seed, 107)).tolerance;

  SketchSpec spec{family, m, n, 0, {}, c.seed};
  if (family == Family::SparseEmbedding) spec.s = 1;
  if (family == Family::Identity) spec.m = n;
  std::vector<TrialRow> rows(static_cast<std::size_t>(trials));
  parallel_for(rows.size(), c.threads, [&](std::size_t t) {
    const auto res = krr_sketched(problem, build(with_seed(spec, derive_seed(c.seed, t))), alpha);
    rows[t] = {res.n_norm_gap, tolerance, res.n_norm_gap <= tolerance};
  });
  return write_trial_csv(rows, "gap", "tolerance", kRequiredPassFraction, c, out,
                         "sketch=" + describe(spec) + " kernel_stable_rank=" + fmt(sr));
}

int cmd_verify(const DataOptions& d, const SketchOptions& so, double c_const, double cprime_const, const Common& c,
               std::ostream& out) {
  require(c_const > 0.0, "c-const", "must be positive");
  require(cprime_const > 0.0, "cprime-const", "must be positive");
  const Pair p = load_pair(d, c.seed);
  const Sketch sk = build(make_spec(so, p.a.rows(), c.seed));
  const ConditionReport rep = verify_deterministic_conditions(sk, p.a, p.b, so.k, so.eps, c_const, cprime_const);

  CsvSink sink(c.out, out);
  auto& os = sink.stream();
  os << "check,dimension,required,measured,pass\n";
  int checks = 0;
  int passed = 0;
  auto row = [&](const std::string& name, Eigen::Index dim, double required, double measured, bool ok) {
    os << name << ',' << dim << ',' << fmt(required) << ',' << fmt(measured) << ',' << yes_no(ok) << '\n';
    ++checks;
    passed += ok ? 1 : 0;
  };
  for (const auto& s : rep.subspace_checks) {
    row("subspace_level_" + std::to_string(s.level), s.dimension, s.required, s.distortion, s.pass);
  }
  const auto& t = rep.tail_norm_checks;
  row("tail_a", rep.w, t.threshold, t.sketched_tail_a, t.sketched_tail_a <= t.threshold);
  row("tail_b", rep.w_prime, t.threshold, t.sketched_tail_b, t.sketched_tail_b <= t.threshold);
  row("level_sum", static_cast<Eigen::Index>(rep.level_dimensions.size()), 8.0 * static_cast<double>(so.k),
      rep.sum_bound, rep.sum_pass);
  os << "summary," << checks << ',' << passed << ',' << fmt(static_cast<double>(passed) / checks) << ','
     << yes_no(rep.all_pass) << '\n';
  sink.finish();
  if (sink.to_file()) {
    out << "w=" << rep.w << " w_prime=" << rep.w_prime << " branch=" << (rep.low_rank_branch ? "low_rank" : "graded")
        << " all_pass=" << yes_no(rep.all_pass) << '\n';
  }
  return rep.all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_calibrate(const DataOptions& d, const SketchOptions& so, int trials, double target, const Common& c,
                  std::ostream& out) {
  require(trials >= 1, "trials", "must be >= 1");
  const Family family = family_of(so);
  require(family != Family::Composed && family != Family::Identity, "family", "calibration needs a planned family");
  check_sketch_ranges(so, true);
  if (target < 0.0) target = so.delta;
  require(target >= 0.0 && target < 1.0, "target", "must be in [0, 1)");
  const Pair p = load_pair(d, c.seed);
  const CalibrationResult res =
      calibrate(family, p.a, p.b, so.k, so.eps, so.delta, target, trials, derive_seed(c.seed, 108), c.threads);
  if (!c.out.empty()) {
    CsvSink sink(c.out, out);
    auto& os = sink.stream();
    os << "step,c,m,failure_rate\n";
    for (std::size_t i = 0; i < res.history.size(); ++i) {
      const auto& h = res.history[i];
      os << i << ',' << fmt(h.c) << ',' << h.m << ',' << fmt(h.failure_rate) << '\n';
    }
    os << "summary," << fmt(res.c) << ',' << res.history.size() << ',' << fmt(target) << '\n';
    sink.finish();
  }
  if (!res.found) {
    out << "c=none\n";
    return kExitCheckFailed;
  }
  out << "c=" << fmt(res.c) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stable-rank approximate matrix multiplication experiments", "sramm"};
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  common.threads = default_threads();
  DataOptions data;
  SketchOptions sketch;
  int trials = 100;
  Eigen::Index rank_r = -1;
  double noise = 0.0;

  auto* gen = app.add_subcommand("gen", "Write a generated matrix");
  add_data_options(gen, data);
  gen->add_option("--rank", rank_r, "Low-rank-plus-noise mode: signal rank");
  gen->add_option("--noise", noise, "Low-rank-plus-noise mode: noise spectral norm");
  add_common(gen, common);

  auto* amm = app.add_subcommand("amm", "Failure rate of the stable-rank AMM bound");
  add_data_options(amm, data);
  add_sketch_options(amm, sketch);
  amm->add_option("--trials", trials);
  add_common(amm, common);

  Eigen::Index ose_n = 256;
  Eigen::Index ose_dim = 4;
  int ell = 2;
  auto* ose = app.add_subcommand("ose-moment", "Monte-Carlo OSE moment estimate");
  add_sketch_options(ose, sketch);
  ose->add_option("--n", ose_n, "Ambient dimension");
  ose->add_option("--dim", ose_dim, "Subspace dimension");
  ose->add_option("--ell", ell, "Moment order");
  ose->add_option("--trials", trials);
  add_common(ose, common);

  double bss_k = 4.0;
  double bss_eps = 0.5;
  std::string method = "bss";
  Eigen::Index samples = 0;
  auto* bss = app.add_subcommand("bss", "Deterministic or sampled row selection");
  add_data_options(bss, data);
  bss->add_option("--k", bss_k, "Stable-rank budget");
  bss->add_option("--eps", bss_eps, "Accuracy");
  bss->add_option("--method", method, "bss | importance");
  bss->add_option("--samples", samples, "Draws for importance sampling");
  add_common(bss, common);

  Eigen::Index p_cols = 16;
  double reg_noise = 1.0;
  auto* regress = app.add_subcommand("regress", "Sketched generalized regression");
  add_data_options(regress, data);
  add_sketch_options(regress, sketch);
  regress->add_option("--p", p_cols, "Columns of B for generated instances");
  regress->add_option("--noise", reg_noise, "Residual noise scale for generated instances");
  regress->add_option("--trials", trials);
  add_common(regress, common);

  auto* lowrank = app.add_subcommand("lowrank", "Sketched low-rank approximation");
  add_data_options(lowrank, data);
  add_sketch_options(lowrank, sketch);
  lowrank->add_option("--trials", trials);
  add_common(lowrank, common);

  Eigen::Index krr_n = 256;
  double bandwidth = 0.02;
  double lambda = 1e-3;
  double krr_noise = 0.1;
  double tolerance = 0.0;
  auto* krr = app.add_subcommand("krr", "Sketched kernel ridge regression against the exact solve");
  add_sketch_options(krr, sketch);
  krr->add_option("--n", krr_n, "Sample count");
  krr->add_option("--bandwidth", bandwidth, "Gaussian kernel bandwidth");
  krr->add_option("--lambda", lambda, "Ridge parameter");
  krr->add_option("--noise", krr_noise, "Response noise level");
  krr->add_option("--tolerance", tolerance, "Gap tolerance (derived from a reference run when omitted)");
  krr->add_option("--trials", trials);
  add_common(krr, common);

  double c_const = kDefaultConditionC;
  double cprime_const = kDefaultConditionC;
  auto* verify = app.add_subcommand("verify-conditions", "Deterministic sufficient conditions for one sketch");
  add_data_options(verify, data);
  add_sketch_options(verify, sketch);
  verify->add_option("--c-const", c_const, "Embedding constant C");
  verify->add_option("--cprime-const", cprime_const, "Tail constant C'");
  add_common(verify, common);

  double target = -1.0;
  auto* calib = app.add_subcommand("calibrate", "Smallest planner constant meeting a target failure rate");
  add_data_options(calib, data);
  add_sketch_options(calib, sketch);
  calib->add_option("--trials", trials);
  calib->add_option("--target", target, "Target failure rate (defaults to delta)");
  add_common(calib, common);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    require(common.threads >= 1, "threads", "must be >= 1");
    if (gen->parsed()) return cmd_gen(data, rank_r, noise, common, out);
    if (amm->parsed()) return cmd_amm(data, sketch, trials, common, out);
    if (ose->parsed()) return cmd_ose(sketch, ose_n, ose_dim, ell, trials, common, out);
    if (bss->parsed()) return cmd_bss(data, bss_k, bss_eps, method, samples, common, out);
    if (regress->parsed()) return cmd_regress(data, p_cols, reg_noise, sketch, trials > 0 ? trials : 20, common, out);
    if (lowrank->parsed()) return cmd_lowrank(data, sketch, trials, common, out);
    if (krr->parsed()) return cmd_krr(krr_n, bandwidth, lambda, krr_noise, tolerance, sketch, trials, common, out);
    if (verify->parsed()) return cmd_verify(data, sketch, c_const, cprime_const, common, out);
    if (calib->parsed()) return cmd_calibrate(data, sketch, trials, target, common, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sramm::cli
