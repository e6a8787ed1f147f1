#pragma once

// Command line front end. run() takes the arguments after the program name
// and writes to the given streams, so tests can drive it in-process.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "anisoboot/bounds.hpp"
#include "anisoboot/droplets.hpp"
#include "anisoboot/dynamics.hpp"
#include "anisoboot/enhancement.hpp"
#include "anisoboot/error.hpp"
#include "anisoboot/estimator.hpp"
#include "anisoboot/lattice.hpp"
#include "anisoboot/parallel.hpp"
#include "anisoboot/verify.hpp"

namespace anisoboot::cli {

enum class Format { csv, json };

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string, bool>;

/// A result table printed as CSV (header + rows) or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  bool bare = false;  // single value: CSV prints it without a header
};

inline std::string cell_text(const Cell& c) {
  struct V {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(V{}, c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_double(v);
        }
        return v;
      },
      c);
}

inline std::string csv_line(const std::vector<Cell>& row) {
  std::string s;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) s += ',';
    s += cell_text(row[i]);
  }
  return s;
}

inline nlohmann::ordered_json row_json(const std::vector<std::string>& cols, const std::vector<Cell>& row) {
  nlohmann::ordered_json o = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < cols.size(); ++i) o[cols[i]] = cell_json(row[i]);
  return o;
}

inline void print(std::ostream& out, const Table& t, Format f) {
  if (f == Format::csv) {
    if (!t.bare) {
      for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
      out << '\n';
    }
    for (const auto& r : t.rows) out << csv_line(r) << '\n';
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) arr.push_back(row_json(t.columns, r));
  out << arr.dump(2) << '\n';
}

/// L itself when it fits in a double, else "lnln:<ln ln L>".
inline std::string format_length(const LogLength& l) {
  if (l.representable()) return format_double(l.value());
  return "lnln:" + format_double(l.lnln());
}

inline std::string format_count(const std::optional<std::int64_t>& n, double ln_n) {
  if (n) return std::to_string(*n);
  return format_length(LogLength::from_ln(ln_n));
}

// ---------------------------------------------------------------------------
// Configuration files: key=value lines, '#' comments. A key fills in
// --key only when the command line does not give it.

inline std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw DomainError("--config needs a file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw IoError("cannot read config file '" + *path + "'");
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError(*path + ":" + std::to_string(no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw DomainError(*path + ":" + std::to_string(no) + ": empty key");
    if (!given(key)) extra.push_back("--" + key + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// ---------------------------------------------------------------------------

struct Options {
  std::string format = "csv";
  unsigned threads = 1;
  std::string config;  // consumed by apply_config; listed for --help
  std::vector<int> model;
  std::vector<int> Ls;
  std::vector<double> ps;
  int L = 0;
  double p = -1;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  double target = 0.5;
  std::optional<double> target_opt;
  double tol = 1e-3;
  std::string output;
  std::optional<std::string> timestamp;
  std::string input;
  std::string form;
  // droplet
  double eps = 0.1;
  double gamma = DropletConstants::C_H;
  double Gamma = DropletConstants::two_C_H;
  int arena = 0;
  std::vector<int> block;
  double C = 0;
  int generations = -1;
  // bounds
  std::string kind;
  int x = 0, y = 0;
  std::optional<double> p_tilde, p_hat;
  double l = 0;
  double bound_eps = kDefaultEpsilon;
  // verify
  std::string suite = "all";
  std::optional<std::uint64_t> cases;
  // enhance
  std::string load, dump;
  std::uint64_t trial = 0;
  std::optional<std::size_t> S;
  std::optional<long> x_c, y_c;
  double enhance_eps = kDefaultEnhanceEps;
};

inline NeighborhoodSpec model_of(const Options& o) {
  detail::require(!o.model.empty(), "--model is required");
  return NeighborhoodSpec(o.model);
}

inline void require_p(const Options& o, bool open = false) {
  detail::require(o.p >= 0, "--p is required");
  if (open) {
    detail::require(o.p > 0 && o.p < 1, "--p must lie in (0,1)");
  } else {
    detail::require(o.p <= 1, "--p must lie in [0,1]");
  }
}

inline std::vector<std::string> estimate_columns() {
  return {"L", "p", "trials", "successes", "p_hat", "ci_low", "ci_high", "seed"};
}

inline std::vector<Cell> estimate_cells(const SweepRow& r) {
  const SpanEstimate& e = r.est;
  return {std::int64_t{r.L}, e.p, e.trials, e.successes, e.p_hat, e.ci_low, e.ci_high, e.seed};
}

inline int cmd_span(const Options& o, std::ostream& out, Format f) {
  const NeighborhoodSpec spec = model_of(o);
  require_p(o);
  detail::require(o.L >= 1, "--L is required and must be >= 1");
  const SweepRow row{o.L, estimate_spanning(box_shape(spec, o.L), o.p, spec, o.trials, o.seed, o.threads)};
  print(out, Table{estimate_columns(), {estimate_cells(row)}}, f);
  return 0;
}

inline int cmd_threshold(const Options& o, std::ostream& out, Format f) {
  const NeighborhoodSpec spec = model_of(o);
  detail::require(o.L >= 1, "--L is required and must be >= 1");
  const auto th = threshold_p(o.L, spec, o.target, o.tol, o.trials, o.seed, o.threads);
  Table t{{"L", "target", "p_th", "lo", "hi", "probes", "max_trials", "seed"},
          {{std::int64_t{o.L}, o.target, th.p, th.lo, th.hi, std::int64_t{th.probes}, th.max_trials, o.seed}}};
  print(out, t, f);
  return 0;
}

inline int cmd_sweep(const Options& o, std::ostream& out, Format f) {
  const NeighborhoodSpec spec = model_of(o);
  detail::require(!o.Ls.empty(), "--L list is required");
  detail::require(o.target_opt.has_value() != !o.ps.empty(), "give exactly one of --p (list) and --target");
  std::ofstream file;
  if (!o.output.empty()) {
    file.open(o.output);
    if (!file) throw IoError("cannot write '" + o.output + "'");
    file << kCsvHeader << '\n';
  }
  if (f == Format::csv) out << kCsvHeader << '\n';
  const RowSink sink = [&](const SweepRow& row) {
    if (f == Format::csv) out << csv_row(row) << std::endl;
    if (file.is_open()) file << csv_row(row) << std::endl;
  };
  SweepResult r = o.target_opt
                      ? sweep_target(o.Ls, spec, *o.target_opt, o.tol, o.trials, o.seed, o.threads, sink)
                      : sweep_grid(o.Ls, o.ps, spec, o.trials, o.seed, o.threads, sink);
  r.meta.timestamp = resolve_timestamp(o.timestamp);
  if (file.is_open()) {
    file.close();
    std::ofstream side(o.output + ".json");
    if (!side) throw IoError("cannot write '" + o.output + ".json'");
    side << sidecar_json(r).dump(2) << '\n';
    if (!side || !file) throw IoError("write to '" + o.output + "' failed");
  }
  if (f == Format::json) {
    Table t{estimate_columns(), {}};
    for (const auto& row : r.rows) t.rows.push_back(estimate_cells(row));
    print(out, t, f);
  }
  return 0;
}

inline SweepResult load_sweep(const std::string& path) {
  std::ifstream csv(path);
  if (!csv) throw IoError("cannot read '" + path + "'");
  std::ifstream side(path + ".json");
  if (!side) throw IoError("cannot read sidecar '" + path + ".json'");
  return read_sweep(csv, side);
}

inline int cmd_fit(const Options& o, std::ostream& out, Format f) {
  detail::require(!o.input.empty(), "--input is required");
  const SweepResult r = load_sweep(o.input);
  const NeighborhoodSpec& s = r.meta.spec;
  detail::require(s.rank() >= 2, "fits need a 2D or 3D model");
  ScalingForm form = scaling_form_for(s.sorted_radius(0), s.sorted_radius(1));
  if (!o.form.empty()) form = o.form == "f_aa" ? ScalingForm::f_aa : ScalingForm::f_ab;
  const ScalingFit fit = fit_scaling(r, form);
  Table t{{"form", "slope", "intercept", "residual_norm", "n", "x_min", "x_max", "L_min", "L_max"},
          {{std::string(to_string(fit.form)), fit.slope, fit.intercept, fit.residual_norm,
            static_cast<std::uint64_t>(fit.n), fit.x_min, fit.x_max, std::int64_t{fit.L_min},
            std::int64_t{fit.L_max}}}};
  print(out, t, f);
  return 0;
}

struct GrowthSummary {
  std::uint64_t filled = 0;
  std::array<double, 3> mean_advance{};
};

inline GrowthSummary run_growth(const Shape& block, const Shape& arena, const NeighborhoodSpec& spec,
                                const Options& o) {
  const int gens = o.generations < 0 ? std::numeric_limits<int>::max() : o.generations;
  const auto outs = parallel_map<GrowthOutcome>(o.trials, o.threads, [&](std::size_t t) {
    return simulate_growth(block, o.p, arena, spec, o.seed, t, gens);
  });
  GrowthSummary s;
  for (const auto& g : outs) {
    s.filled += g.filled;
    for (int a = 0; a < arena.rank(); ++a) s.mean_advance[a] += g.advance[a];
  }
  for (auto& m : s.mean_advance) m /= static_cast<double>(o.trials);
  return s;
}

inline int cmd_droplet(const Options& o, std::ostream& out, Format f) {
  const NeighborhoodSpec spec = model_of(o);
  require_p(o, true);
  Table t;
  std::optional<Shape> block;
  if (!o.block.empty()) block = Shape(o.block);
  if (spec.rank() == 3) {
    const auto plan = plan_droplet(spec, o.p, o.eps, asymptotic_brackets(spec, o.p, o.gamma, o.Gamma));
    if (!block) block = plan.block;
    t.columns = {"axis", "N", "ln_N", "M", "ln_M", "ln_P", "l_plus_bar", "log_density"};
    t.rows.push_back({std::int64_t{plan.axis}, format_count(plan.N, plan.ln_N), plan.ln_N,
                      format_count(plan.M, plan.ln_M), plan.ln_M, plan.ln_P, format_length(plan.l_plus_bar),
                      plan.log_density});
  } else {
    detail::require(spec.rank() == 2, "droplets need a 2D or 3D model");
    if (!block) {
      detail::require(o.C > 0, "2D droplets need --C or --block");
      block = rect_droplet(spec, o.p, o.C);
    }
    t.columns = {"block"};
    t.rows.push_back({block->to_string()});
  }
  if (o.arena > 0) {
    detail::require(block.has_value(), "planned block does not fit in memory; give --block");
    const Shape arena = Shape::cube(spec.rank(), o.arena);
    const GrowthSummary s = run_growth(*block, arena, spec, o);
    for (const char* c : {"trials", "filled", "filled_fraction", "mean_advance_x", "mean_advance_y"}) {
      t.columns.push_back(c);
    }
    auto& row = t.rows.back();
    row.push_back(o.trials);
    row.push_back(s.filled);
    row.push_back(static_cast<double>(s.filled) / static_cast<double>(o.trials));
    row.push_back(s.mean_advance[0]);
    row.push_back(s.mean_advance[1]);
    if (spec.rank() == 3) {
      t.columns.push_back("mean_advance_z");
      row.push_back(s.mean_advance[2]);
    }
  }
  print(out, t, f);
  return 0;
}

inline int cmd_bounds(const Options& o, std::ostream& out, Format f) {
  const std::string& k = o.kind;
  auto value = [&](double v) {
    print(out, Table{{"value"}, {{v}}, true}, f);
    return 0;
  };
  if (k == "density11") {
    require_p(o, true);
    return value(droplet_density_11(o.p));
  }
  const NeighborhoodSpec spec = model_of(o);
  require_p(o, true);
  if (k == "rect-span" || k == "rect-weak-span") {
    detail::require(spec.rank() == 2, "rectangle bounds need a 2D model");
    const double pt = o.p_tilde.value_or(o.p), ph = o.p_hat.value_or(o.p);
    const BoundValue b = k == "rect-span" ? rect_span_upper(o.x, o.y, spec.radius(0), spec.radius(1), pt, ph)
                                          : rect_weak_span_upper(o.x, o.y, spec.radius(0), spec.radius(1), pt, ph);
    return value(b.value);
  }
  if (k == "scaling") {
    detail::require(spec.rank() >= 2, "scaling needs a 2D or 3D model");
    return value(f_scaling(spec.sorted_radius(0), spec.sorted_radius(1), o.p));
  }
  if (k == "e-crossed") {
    detail::require(spec.rank() == 3, "e-crossed needs a 3D model");
    return value(e_crossed_upper(o.l, o.p, spec.sorted_radius(0), spec.sorted_radius(1), spec.sorted_radius(2),
                                 o.bound_eps, o.gamma)
                     .bound.value);
  }
  if (k == "spanned") {
    detail::require(o.L >= 1, "--L is required");
    return value(spanned_upper(o.L, o.p, spec, o.bound_eps, o.gamma).bound.value);
  }
  if (k == "bracket") {
    const ThresholdBracket b = threshold_bracket(spec, o.p, o.gamma, o.Gamma);
    print(out, Table{{"l_minus", "l_plus"}, {{format_length(b.l_minus), format_length(b.l_plus)}}}, f);
    return 0;
  }
  throw DomainError("unknown bound '" + k +
                    "' (rect-span, rect-weak-span, scaling, e-crossed, spanned, bracket, density11)");
}

inline int cmd_verify(const Options& o, std::ostream& out, std::ostream& err, Format f) {
  const std::vector<std::string> all{"oracle", "monotone", "slab", "lemma1", "domination"};
  std::vector<std::string> suites;
  if (o.suite == "all") {
    suites = all;
  } else {
    suites.push_back(o.suite);
  }
  Table t{{"suite", "cases", "failures"}, {}};
  bool ok = true;
  auto add = [&](const SuiteResult& r) {
    t.rows.push_back({r.name, r.cases, r.failures});
    ok = ok && r.ok();
  };
  for (const auto& s : suites) {
    if (s == "oracle") {
      add(verify_oracle(o.cases.value_or(1000), o.seed));
    } else if (s == "monotone") {
      add(verify_monotone(o.cases.value_or(500), o.seed));
    } else if (s == "slab") {
      add(verify_slab(o.cases.value_or(500), o.seed));
    } else if (s == "lemma1") {
      add(verify_lemma1(o.cases.value_or(100), o.seed).suite);
    } else if (s == "domination") {
      add(verify_domination(o.cases.value_or(300), o.seed));
    } else if (s == "bounds") {
      SuiteResult span{"bounds-span", 0, 0, ""}, weak{"bounds-weak", 0, 0, ""};
      for (const NeighborhoodSpec& m : {NeighborhoodSpec{1, 2}, NeighborhoodSpec{2, 3}}) {
        for (const auto& c : measure_bound_domination(m, {0.1, 0.2, 0.3}, o.cases.value_or(10000), o.seed)) {
          ++span.cases;
          ++weak.cases;
          span.failures += !c.span_ok();
          weak.failures += !c.weak_ok();
        }
      }
      add(span);
      add(weak);
    } else {
      throw DomainError("unknown suite '" + s + "' (oracle, monotone, slab, lemma1, domination, bounds, all)");
    }
  }
  print(out, t, f);
  if (!ok) err << "verification failed\n";
  return ok ? 0 : 1;
}

inline int cmd_enhance(const Options& o, std::ostream& out, Format f) {
  const NeighborhoodSpec spec = model_of(o);
  detail::require(spec.rank() == 3, "enhance needs a 3D model");
  require_p(o, true);
  Lattice lat;
  if (!o.load.empty()) {
    std::ifstream in(o.load);
    if (!in) throw IoError("cannot read '" + o.load + "'");
    lat = read_snapshot(in);
    detail::require(lat.shape().rank() == 3, "loaded configuration must be 3D");
  } else {
    detail::require(o.L >= 1, "--L or --load is required");
    lat = random_fill(Shape::cube(3, o.L), o.p, o.seed, o.trial);
  }
  EnhanceParams prm = EnhanceParams::defaults(spec, o.p, o.enhance_eps);
  if (o.S || o.x_c || o.y_c) {
    prm = EnhanceParams::make(o.S.value_or(prm.S), o.x_c.value_or(prm.x_c), o.y_c.value_or(prm.y_c), o.enhance_eps,
                              o.p, spec.sorted_radius(1));
  }
  const Lattice enh = enhance(lat, spec, prm);
  const std::string snap = to_snapshot(enh);
  if (!o.dump.empty()) {
    std::ofstream d(o.dump);
    if (!d) throw IoError("cannot write '" + o.dump + "'");
    d << snap;
    if (!d) throw IoError("write to '" + o.dump + "' failed");
  }
  if (f == Format::csv) {
    out << snap;
  } else {
    nlohmann::ordered_json j;
    j["dims"] = enh.shape().extents();
    j["occupied"] = enh.count();
    j["e_crossed"] = has_crossing(enh, spec.easiest_axis());
    j["snapshot"] = snap;
    out << j.dump(2) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anisotropic bootstrap percolation experiments", "anisoboot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kRevision));
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--threads", o.threads, "Worker threads (default ANISOBOOT_THREADS or 1)")
        ->check(CLI::Range(1u, 1024u));
    s->add_option("--config", o.config, "key=value file; command line flags win");
    s->add_option("--seed", o.seed, "RNG seed");
  };
  auto model = [&](CLI::App* s) {
    s->add_option("--model", o.model, "Radii, e.g. 1,2 or 1,1,2")->delimiter(',');
  };

  auto* span = app.add_subcommand("span", "Estimate P(internally spanned)");
  common(span);
  model(span);
  span->add_option("--L", o.L, "Box size");
  span->add_option("--p", o.p, "Occupation probability");
  span->add_option("--trials", o.trials, "Trials")->check(CLI::PositiveNumber);

  auto* thr = app.add_subcommand("threshold", "Bisect p for a spanning-probability level");
  common(thr);
  model(thr);
  thr->add_option("--L", o.L, "Box size");
  thr->add_option("--target", o.target, "Crossing level")->check(CLI::Range(0.0, 1.0));
  thr->add_option("--tol", o.tol, "Bracket width");
  thr->add_option("--trials", o.trials, "Trials per probe")->check(CLI::PositiveNumber);

  auto* sw = app.add_subcommand("sweep", "Grid of estimates or thresholds");
  common(sw);
  model(sw);
  sw->add_option("--L", o.Ls, "List of box sizes")->delimiter(',');
  sw->add_option("--p", o.ps, "List of probabilities")->delimiter(',');
  sw->add_option("--target", o.target_opt, "Bisect each L for this level instead of a p grid");
  sw->add_option("--tol", o.tol, "Bracket width");
  sw->add_option("--trials", o.trials, "Trials per point")->check(CLI::PositiveNumber);
  sw->add_option("--output", o.output, "CSV file; metadata goes to <file>.json");
  sw->add_option("--timestamp", o.timestamp, "Timestamp recorded in the metadata");

  auto* fit = app.add_subcommand("fit", "Fit ln L (2D) or ln ln L (3D) against the scaling variable");
  common(fit);
  fit->add_option("--input", o.input, "Sweep CSV (with <file>.json)");
  fit->add_option("--form", o.form, "f_aa or f_ab")->check(CLI::IsMember({"f_aa", "f_ab"}));

  auto* drop = app.add_subcommand("droplet", "Plan a critical droplet and simulate its growth");
  common(drop);
  model(drop);
  drop->add_option("--p", o.p, "Occupation probability");
  drop->add_option("--eps", o.eps, "Size margin");
  drop->add_option("--gamma", o.gamma, "Lower threshold constant");
  drop->add_option("--Gamma", o.Gamma, "Upper threshold constant");
  drop->add_option("--arena", o.arena, "Arena side; simulate when given");
  drop->add_option("--block", o.block, "Seed block extents")->delimiter(',');
  drop->add_option("--C", o.C, "2D droplet length constant");
  drop->add_option("--trials", o.trials, "Growth trials")->check(CLI::PositiveNumber);
  drop->add_option("--generations", o.generations, "Stop the dynamics after this many steps");

  auto* bnd = app.add_subcommand("bounds", "Evaluate a bound formula");
  common(bnd);
  model(bnd);
  bnd->add_option("kind", o.kind, "rect-span, rect-weak-span, scaling, e-crossed, spanned, bracket, density11")
      ->required();
  bnd->add_option("--p", o.p, "Occupation probability");
  bnd->add_option("--x", o.x, "Rectangle side along the first axis");
  bnd->add_option("--y", o.y, "Rectangle side along the second axis");
  bnd->add_option("--p-tilde", o.p_tilde, "Column probability (default p)");
  bnd->add_option("--p-hat", o.p_hat, "Row probability (default p)");
  bnd->add_option("--l", o.l, "Block side");
  bnd->add_option("--L", o.L, "Box size");
  bnd->add_option("--eps", o.bound_eps, "Epsilon");
  bnd->add_option("--gamma", o.gamma, "Lower constant");
  bnd->add_option("--Gamma", o.Gamma, "Upper constant");

  auto* ver = app.add_subcommand("verify", "Run self-check suites");
  common(ver);
  ver->add_option("--suite", o.suite, "oracle, monotone, slab, lemma1, domination, bounds or all");
  ver->add_option("--cases", o.cases, "Cases per model / axis / p");

  auto* enh = app.add_subcommand("enhance", "Dump the enhanced configuration");
  common(enh);
  model(enh);
  enh->add_option("--L", o.L, "Cube side");
  enh->add_option("--p", o.p, "Occupation probability");
  enh->add_option("--trial", o.trial, "Trial index of the random fill");
  enh->add_option("--load", o.load, "Read the initial configuration from a snapshot");
  enh->add_option("--dump", o.dump, "Also write the enhanced snapshot to this file");
  enh->add_option("--S", o.S, "Flooding size");
  enh->add_option("--x-c", o.x_c, "Stepping-stone cap along a");
  enh->add_option("--y-c", o.y_c, "Stepping-stone cap along b");
  enh->add_option("--eps", o.enhance_eps, "Epsilon");

  try {
    o.threads = default_threads();
    args = apply_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code != 0) err << app.help();
    return code == 0 ? 0 : 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const Format f = o.format == "json" ? Format::json : Format::csv;
  try {
    if (*span) return cmd_span(o, out, f);
    if (*thr) return cmd_threshold(o, out, f);
    if (*sw) return cmd_sweep(o, out, f);
    if (*fit) return cmd_fit(o, out, f);
    if (*drop) return cmd_droplet(o, out, f);
    if (*bnd) return cmd_bounds(o, out, f);
    if (*ver) return cmd_verify(o, out, err, f);
    if (*enh) return cmd_enhance(o, out, f);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 1;
}

}  // namespace anisoboot::cli
