#include "qtwist/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "qtwist/error.hpp"
#include "qtwist/lfun.hpp"
#include "qtwist/parallel.hpp"
#include "qtwist/primesum.hpp"
#include "qtwist/stats.hpp"

namespace qtwist::cli {

using io::Cell;
using io::RunConfig;
using io::Table;

namespace {

using Handler = Table (*)(const RunConfig&, std::ostream&);

curve::EllipticCurve require_curve(const RunConfig& c) {
  if (!c.has("curves")) throw ConfigError("this command needs 'curves' (fixture path)");
  if (!c.has("curve")) throw ConfigError("this command needs 'curve' (fixture label)");
  const auto curves = io::load_curves(c.get("curves"));
  return io::find_curve(curves, c.get("curve"));
}

curve::ApTable require_table(const RunConfig& c, const curve::EllipticCurve& e, std::uint64_t bound,
                             std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  auto res = io::cache_load(c.get("cache_dir"), e, bound);
  if (!res.warning.empty()) log << "warning: " << res.warning << '\n';
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (res.hit)
    log << "cache hit: a_p table for " << e.label << " up to " << bound << " loaded in " << secs << " s\n";
  else
    log << "built a_p table for " << e.label << " up to " << bound << " in " << secs << " s\n";
  return std::move(res.table);
}

arith::WeightSpec weight(const RunConfig& c, const char* key, const char* fallback) {
  return arith::parse_weight(c.get(key, fallback));
}

primesum::Signs signs(const RunConfig& c) {
  const auto s = c.get("signs", "both");
  if (s == "both") return primesum::Signs::Both;
  if (s == "positive") return primesum::Signs::Positive;
  throw ConfigError("signs must be 'both' or 'positive'");
}

std::uint64_t positive(const RunConfig& c, const char* key, std::int64_t fallback) {
  const auto v = c.get_int(key, fallback);
  if (v < 1) throw ConfigError(std::string("'") + key + "' must be set to a positive integer");
  return static_cast<std::uint64_t>(v);
}

Cell opt(const std::optional<double>& v) { return v ? Cell(*v) : Cell(std::string()); }

// --- commands ---------------------------------------------------------------

Table cmd_ap_table(const RunConfig& c, std::ostream& log) {
  const auto e = require_curve(c);
  const auto table = require_table(c, e, positive(c, "P", 0), log);
  Table t{{"p", "a_p", "reduction"}, {}};
  for (std::size_t i = 0; i < table.size(); ++i)
    t.add({static_cast<std::int64_t>(table.primes->primes[i]), static_cast<std::int64_t>(table.ap[i]),
           std::string(curve::to_string(table.reduction[i]))});
  return t;
}

Table cmd_prime_sum(const RunConfig& c, std::ostream& log) {
  const auto e = require_curve(c);
  primesum::PrimeSumConfig cfg;
  cfg.D = static_cast<std::int64_t>(positive(c, "D", 0));
  cfg.P = positive(c, "P", 0);
  cfg.w = weight(c, "w", "gaussian:1");
  cfg.g = weight(c, "g", "triangular");
  cfg.coprime_only = c.get_bool("coprime", true);
  cfg.signs = signs(c);
  const auto path = c.get("path", "both");
  cfg.path = path == "twist" ? primesum::SumPath::TwistLoop
             : path == "table" ? primesum::SumPath::ResidueTable
             : path == "both"  ? primesum::SumPath::Both
                               : throw ConfigError("path must be twist, table or both");
  cfg.validate();
  const auto table = require_table(c, e, cfg.P, log);
  const auto r = primesum::prime_sum_S(e, table, cfg);
  Table t{{"curve", "D", "P", "w", "g", "signs", "S", "normalized", "S_twist", "S_table", "path_discrepancy",
           "seconds_twist", "seconds_table"},
          {}};
  t.add({e.label, cfg.D, static_cast<std::int64_t>(cfg.P), cfg.w.id(), cfg.g.id(), c.get("signs", "both"), r.S,
         r.normalized, opt(r.S_twist), opt(r.S_table), opt(r.path_discrepancy), r.seconds_twist, r.seconds_table});
  return t;
}

Table cmd_sym_check(const RunConfig& c, std::ostream& log) {
  const auto e = require_curve(c);
  const auto h = weight(c, "h", "triangular");
  const auto xs = c.get_int_list("x_grid", {10000, 100000, 1000000});
  if (xs.empty()) throw ConfigError("x_grid is empty");
  const double top = static_cast<double>(*std::max_element(xs.begin(), xs.end())) * h.support_cutoff();
  const auto table = require_table(c, e, static_cast<std::uint64_t>(std::ceil(top)), log);
  const double Mh1 = arith::mellin(h, 1.0).real();
  Table t{{"curve", "k", "x", "sum", "main_term", "scaled_deviation"}, {}};
  for (auto x : xs) {
    const double xd = static_cast<double>(x);
    const double s2 = primesum::sym2_prime_sum(table, xd, h);
    t.add({e.label, std::int64_t{2}, x, s2, -xd * Mh1, (s2 + xd * Mh1) / xd});
    const double s3 = primesum::sym3_prime_sum(table, xd, h);
    t.add({e.label, std::int64_t{3}, x, s3, 0.0, s3 / std::sqrt(xd)});
  }
  return t;
}

Table cmd_rank_estimate(const RunConfig& c, std::ostream& log) {
  const auto e = require_curve(c);
  const auto P = positive(c, "P", 0);
  const auto g = weight(c, "g", "triangular");
  primesum::RankOptions opts{c.get_bool("sym2", true), c.get_bool("sym3", false)};
  const auto table = require_table(c, e, P, log);
  if (c.has("d")) {
    const auto r = primesum::rank_estimator(e, table, c.get_int("d", 1), P, g, opts);
    Table t{{"curve", "d", "P", "r_hat", "prime_term", "sym2_term", "sym3_term"}, {}};
    t.add({e.label, r.d, static_cast<std::int64_t>(P), r.r_hat, r.prime_term, r.sym2_term, r.sym3_term});
    return t;
  }
  primesum::PrimeSumConfig cfg;
  cfg.D = static_cast<std::int64_t>(positive(c, "D", 0));
  cfg.P = P;
  cfg.w = weight(c, "w", "gaussian:1");
  cfg.g = g;
  cfg.signs = signs(c);
  cfg.path = primesum::SumPath::TwistLoop;
  cfg.validate();
  const auto fr = primesum::family_average_rank(e, table, cfg, opts);
  const auto S = primesum::prime_sum_S(e, table, cfg).S;
  const double rootP = std::sqrt(static_cast<double>(P));
  const double Mg = arith::mellin(g, 0.5).real();
  const double gap = std::abs(Mg * fr.weighted_excess + fr.sym_correction_aggregate / rootP - S / rootP) /
                     (1.0 + std::abs(S / rootP));
  Table t{{"curve", "D", "P", "average", "weight_mass", "weighted_excess", "sym_aggregate", "consistency_gap"}, {}};
  t.add({e.label, cfg.D, static_cast<std::int64_t>(P), fr.average, fr.weight_mass, fr.weighted_excess,
         fr.sym_correction_aggregate, gap});
  return t;
}

Table cmd_analytic_rank(const RunConfig& c, std::ostream& log) {
  const auto e = require_curve(c);
  lfun::ClassifyOptions opts;
  opts.tolerance = c.get_double("tol", opts.tolerance);
  Table t{{"curve", "d", "root_number", "class", "parity", "value", "threshold", "low_confidence"}, {}};
  auto add = [&](const lfun::TwistClass& tc) {
    t.add({e.label, tc.d, static_cast<std::int64_t>(tc.root_number), static_cast<std::int64_t>(tc.rank.cls),
           std::string(tc.rank.parity == lfun::Parity::Odd ? "odd" : "even"), tc.rank.value, tc.rank.threshold,
           static_cast<std::int64_t>(tc.rank.low_confidence)});
  };
  if (c.has("d")) {
    const auto tw = curve::make_twist(e, c.get_int("d", 1));
    const auto M = std::max(lfun::default_cutoff(tw.conductor, opts.series.tail_tolerance, lfun::ValueKind::Central),
                            lfun::default_cutoff(tw.conductor, opts.series.tail_tolerance, lfun::ValueKind::FirstDerivative));
    const auto table = require_table(c, e, std::max<std::uint64_t>(M, 2), log);
    add({tw.d, tw.root_number, lfun::classify_rank(tw, table, opts)});
    return t;
  }
  const auto D = static_cast<std::int64_t>(positive(c, "D", 0));
  const auto table = require_table(c, e, lfun::family_table_bound(e, D, opts), log);
  const auto classes = lfun::classify_family(e, table, D, opts);
  for (const auto& tc : classes) add(tc);
  const auto dist = stats::rank_distribution(classes);
  log << "classes 0/1/>=2: " << dist.proportions[0] << " / " << dist.proportions[1] << " / " << dist.proportions[2]
      << " of " << dist.total << "; parity mismatches " << dist.parity_mismatches << '\n';
  if (c.has("ranks")) {
    const auto ranks = lfun::load_ranks(c.get("ranks"));
    std::int64_t checked = 0, disagree = 0;
    for (const auto& tc : classes) {
      auto it = ranks.find(tc.d);
      if (it == ranks.end()) continue;
      ++checked;
      if (std::min(it->second, 2) != tc.rank.cls) ++disagree;
    }
    log << "ranks fixture: " << checked << " twists compared, " << disagree << " disagree\n";
  }
  return t;
}

Table cmd_root_numbers(const RunConfig& c, std::ostream& log) {
  const auto e = require_curve(c);
  const auto mode_s = c.get("mode", "coprime");
  const auto mode = mode_s == "coprime"          ? stats::RootNumberMode::Coprime
                    : mode_s == "all_squarefree" ? stats::RootNumberMode::AllSquarefree
                                                 : throw ConfigError("mode must be coprime or all_squarefree");
  const auto grid = c.get_int_list("D_grid", stats::geometric_grid(1000, 100000, 5));
  const auto r = stats::root_number_sum(e, grid, mode, weight(c, "w", "gaussian:1"));
  if (r.fit) log << "growth exponent beta = " << r.fit->beta << " (residual " << r.fit->residual << ")\n";
  Table t{{"curve", "mode", "D", "sum", "weighted_sum", "count", "running_max", "beta"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i)
    t.add({e.label, mode_s, grid[i], r.sums[i], r.weighted_sums[i], r.counts[i], r.running_max[i],
           r.fit ? Cell(r.fit->beta) : Cell(std::string())});
  return t;
}

Table cmd_char_sum(const RunConfig& c, std::ostream& log) {
  const auto e = require_curve(c);
  const auto n = positive(c, "n", 1);
  const auto w = weight(c, "w", "gaussian:1");
  const auto grid = c.has("D_grid") ? c.get_int_list("D_grid", {}) : std::vector<std::int64_t>{c.get_int("D", 1000)};
  const auto scan = stats::squarefree_char_sum_scan(e, n, grid, w);
  if (scan.residual_fit) log << "residual growth exponent = " << scan.residual_fit->beta << '\n';
  Table t{{"curve", "n", "D", "kappa", "direct", "main_term", "residual", "admissible"}, {}};
  for (const auto& r : scan.reports)
    t.add({e.label, static_cast<std::int64_t>(r.n), r.D, static_cast<std::int64_t>(r.kappa), r.direct, r.main_term,
           r.residual, r.admissible});
  return t;
}

Table cmd_omega_moments(const RunConfig& c, std::ostream&) {
  const auto r = stats::omega_moments(positive(c, "D", 0), static_cast<unsigned>(positive(c, "q", 1)),
                                      static_cast<std::uint64_t>(c.get_int("memory_budget", arith::kDefaultMemoryBudget)));
  Table t{{"D", "q", "moment", "bound", "ratio"}, {}};
  t.add({static_cast<std::int64_t>(r.D), static_cast<std::int64_t>(r.q), r.moment.str(), r.bound, r.ratio});
  return t;
}

Table cmd_all_curves_sum(const RunConfig& c, std::ostream&) {
  primesum::AllCurvesConfig cfg;
  cfg.A = static_cast<std::int64_t>(positive(c, "A", 0));
  cfg.B = static_cast<std::int64_t>(positive(c, "B", 0));
  cfg.P = positive(c, "P", 0);
  cfg.w2 = weight(c, "w", "gaussian2d:1,1");
  cfg.g = weight(c, "g", "triangular");
  cfg.signs = signs(c);
  cfg.work_limit = c.get_double("work_budget", 5e7);
  const auto r = primesum::all_curves_prime_sum(cfg);
  Table t{{"A", "B", "P", "S", "normalized", "pairs", "weight_mass"}, {}};
  t.add({cfg.A, cfg.B, static_cast<std::int64_t>(cfg.P), r.S, r.normalized, static_cast<std::int64_t>(r.pairs),
         r.weight_mass});
  return t;
}

Table cmd_poisson_check(const RunConfig& c, std::ostream&) {
  const auto a = c.get_int("a", 1), cc = c.get_int("c", 1), p = c.get_int("p", 7), x = c.get_int("x", 1);
  const double D = c.get_double("D", 100.0);
  const auto r = primesum::poisson_identity_check(a, cc, p, D, weight(c, "w", "gaussian:1"), x);
  Table t{{"a", "c", "p", "D", "x", "lcm", "lhs_re", "lhs_im", "rhs", "abs_diff"}, {}};
  t.add({a, cc, p, D, x, r.lcm, r.lhs.real(), r.lhs.imag(), r.rhs.real(), r.abs_diff});
  return t;
}

Table cmd_gauss_check(const RunConfig& c, std::ostream&) {
  Table t{{"p", "max_deviation"}, {}};
  std::vector<std::uint64_t> ps;
  if (c.has("p")) {
    ps.push_back(positive(c, "p", 3));
  } else {
    const auto top = positive(c, "p_max", 500);
    for (std::uint64_t p = 3; p <= top; p += 2)
      if (arith::is_prime(p)) ps.push_back(p);
  }
  for (auto p : ps) t.add({static_cast<std::int64_t>(p), primesum::gauss_sum_check(p).max_deviation});
  return t;
}

lfun::ZeroData require_zeros(const RunConfig& c) {
  if (!c.has("zeros")) throw ConfigError("this command needs 'zeros' (CSV d,gamma,multiplicity)");
  return lfun::load_zeros(c.get("zeros"));
}

std::vector<double> y_grid(const RunConfig& c) {
  return stats::uniform_grid(c.get_double("y_lo", 2.0), c.get_double("y_hi", 1000.0), c.get_double("y_step", 0.1));
}

Table cmd_t_stat(const RunConfig& c, std::ostream&) {
  const auto e = require_curve(c);
  const auto zeros = require_zeros(c);
  const auto D = static_cast<std::int64_t>(positive(c, "D", 0));
  const auto fam = primesum::make_family(e.conductor, D, weight(c, "w", "gaussian:1"), true, signs(c));
  const auto ts = stats::t_statistic(zeros, fam, D, y_grid(c));
  Table t{{"curve", "D", "grid_points", "mean_re", "mean_im", "variance", "standard_error"}, {}};
  t.add({e.label, D, static_cast<std::int64_t>(ts.y.size()), ts.mean.real(), ts.mean.imag(), ts.variance,
         ts.standard_error()});
  return t;
}

Table cmd_t_variance(const RunConfig& c, std::ostream& log) {
  const auto e = require_curve(c);
  const auto zeros = require_zeros(c);
  const auto grid = c.get_int_list("D_grid", {});
  if (grid.empty()) throw ConfigError("t-variance needs 'D_grid'");
  const auto v = stats::t_variance_scaling(zeros, e.conductor, grid, weight(c, "w", "gaussian:1"), y_grid(c), signs(c));
  log << "variance ~ " << v.constant << " D log D (relative residual " << v.residual << ")\n";
  for (const auto& [d, n] : v.zero_counts) log << "  d=" << d << ": " << n << " ordinates\n";
  Table t{{"curve", "D", "d_log_d", "variance", "constant", "residual"}, {}};
  for (std::size_t i = 0; i < v.D.size(); ++i)
    t.add({e.label, v.D[i], v.d_log_d[i], v.variance[i], v.constant, v.residual});
  return t;
}

Table cmd_census(const RunConfig& c, std::ostream& log) {
  const auto zeros = require_zeros(c);
  const auto r = stats::multiplicity_census(zeros, c.get_double("tol", 1e-6));
  for (const auto& cl : r.offending) {
    log << "cluster across " << cl.distinct_twists << " twists:";
    for (const auto& [d, g] : cl.members) log << " (d=" << d << ", " << g << ")";
    log << '\n';
  }
  Table t{{"tol", "max_multiplicity", "offending_clusters", "zeros"}, {}};
  t.add({r.tol, static_cast<std::int64_t>(r.max_multiplicity), static_cast<std::int64_t>(r.offending.size()),
         static_cast<std::int64_t>(zeros.total_zeros())});
  return t;
}

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h = {
      {"ap-table", cmd_ap_table},         {"prime-sum", cmd_prime_sum},       {"sym-check", cmd_sym_check},
      {"rank-estimate", cmd_rank_estimate}, {"analytic-rank", cmd_analytic_rank}, {"root-numbers", cmd_root_numbers},
      {"char-sum", cmd_char_sum},         {"omega-moments", cmd_omega_moments}, {"all-curves-sum", cmd_all_curves_sum},
      {"poisson-check", cmd_poisson_check}, {"gauss-check", cmd_gauss_check}, {"t-stat", cmd_t_stat},
      {"t-variance", cmd_t_variance},     {"census", cmd_census}};
  return h;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

std::string usage() {
  std::ostringstream os;
  os << "usage: qtwist <command> [--config FILE] [key=value ...]\n\ncommands:\n";
  for (const auto& name : commands()) os << "  " << name << '\n';
  os << "\ncommon keys: curves, curve, D, P, A, B, w, g, coprime, signs, threads, work_budget,\n"
        "             output, json, cache_dir\n";
  return os.str();
}

void run(const RunConfig& config, std::ostream& out, std::ostream& log) {
  config.validate();
  const auto& h = handlers();
  auto it = std::find_if(h.begin(), h.end(), [&](const auto& p) { return p.first == config.command; });
  if (it == h.end()) throw Error(ErrorKind::Usage, "unknown command '" + config.command + "'");
  if (config.has("threads")) set_num_threads(static_cast<unsigned>(config.get_int("threads", 0)));
  const Table t = it->second(config, log);
  const auto output = config.get("output");
  if (output.empty())
    io::write_csv(t, out, true);
  else
    io::write_csv(t, output, true);
  if (config.has("json")) io::write_json(t, config.get("json"));
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    (args.empty() ? err : out) << usage();
    return args.empty() ? static_cast<int>(ErrorKind::Usage) : 0;
  }
  RunConfig cfg;
  cfg.command = args[0];
  if (std::find(commands().begin(), commands().end(), cfg.command) == commands().end()) {
    err << "qtwist: unknown command '" << cfg.command << "'\n\n" << usage();
    return static_cast<int>(ErrorKind::Usage);
  }
  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == "--config" || args[i] == "-c") {
        if (i + 1 >= args.size()) throw Error(ErrorKind::Usage, "--config needs a file argument");
        for (auto& [k, v] : io::load_config(args[++i])) cfg.values[k] = v;
      } else {
        overrides.push_back(io::parse_override(args[i]));
      }
    }
    for (auto& [k, v] : overrides) cfg.values[k] = v;
    run(cfg, out, err);
    return 0;
  } catch (const Error& e) {
    err << "qtwist: " << e.what() << '\n';
    if (e.kind() == ErrorKind::Usage) err << '\n' << usage();
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "qtwist: internal error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Internal);
  }
}

}  // namespace qtwist::cli
