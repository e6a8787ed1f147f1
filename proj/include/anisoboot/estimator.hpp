#pragma once

// Monte Carlo spanning estimates, threshold bisection, sweeps and scaling fits.
//
// Every trial t of a (seed, shape) pair reads the same fill words at every p,
// so spanning indicators are nondecreasing in p sample by sample.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "anisoboot/bounds.hpp"
#include "anisoboot/dynamics.hpp"
#include "anisoboot/error.hpp"
#include "anisoboot/lattice.hpp"
#include "anisoboot/parallel.hpp"

#ifndef ANISOBOOT_REVISION
#define ANISOBOOT_REVISION "unknown"
#endif

namespace anisoboot {

inline constexpr const char* kRevision = ANISOBOOT_REVISION;
inline constexpr double kWilsonZ = 1.959963984540054;

/// The box [0,L]^d. One-dimensional boxes hold the L+1 sites of the closed
/// interval; higher-dimensional boxes have side L.
inline Shape box_shape(const NeighborhoodSpec& spec, int L) {
  detail::require(L >= 1, "L must be >= 1");
  if (spec.rank() == 1) {
    detail::require(L < std::numeric_limits<int>::max(), "L too large");
    return Shape{L + 1};
  }
  return Shape::cube(spec.rank(), L);
}

struct Interval {
  double low = 0;
  double high = 1;
};

inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ) {
  detail::require(trials >= 1, "trials must be >= 1");
  detail::require(successes <= trials, "successes exceed trials");
  const double n = static_cast<double>(trials);
  const double x = static_cast<double>(successes);
  const double ph = x / n;
  const double z2 = z * z;
  const double centre = (x + z2 / 2) / (n + z2);
  const double half = z / (n + z2) * std::sqrt(x * (n - x) / n + z2 / 4);
  return {std::clamp(std::min(centre - half, ph), 0.0, 1.0), std::clamp(std::max(centre + half, ph), 0.0, 1.0)};
}

struct SpanEstimate {
  Shape dims;
  double p = 0;
  NeighborhoodSpec spec;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double p_hat = 0;
  double ci_low = 0;
  double ci_high = 1;
  std::uint64_t seed = 0;

  bool straddles(double target) const noexcept { return ci_low <= target && target <= ci_high; }
};

/// Number of internally spanned trials among [first, first + count).
inline std::uint64_t count_spanning(const Shape& dims, double p, const NeighborhoodSpec& spec,
                                    std::uint64_t seed, std::uint64_t first, std::uint64_t count,
                                    unsigned threads = 1) {
  detail::require(spec.rank() == dims.rank(), "model and lattice dimensionality differ");
  detail::require(p >= 0.0 && p <= 1.0, "occupation probability must lie in [0,1]");
  const auto parts = parallel_blocks<std::uint64_t>(count, threads, [&](std::size_t b, std::size_t e) {
    BootstrapEngine engine(dims, spec);
    Lattice lat(dims);
    std::uint64_t hits = 0;
    for (std::size_t t = b; t < e; ++t) {
      random_fill_into(lat, p, seed, first + t);
      engine.run(lat);
      hits += lat.is_full();
    }
    return hits;
  });
  std::uint64_t total = 0;
  for (auto h : parts) total += h;
  return total;
}

inline SpanEstimate make_estimate(const Shape& dims, double p, const NeighborhoodSpec& spec,
                                  std::uint64_t trials, std::uint64_t successes, std::uint64_t seed) {
  SpanEstimate e{dims, p, spec, trials, successes, 0, 0, 1, seed};
  e.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
  const Interval ci = wilson_interval(successes, trials);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  return e;
}

inline SpanEstimate estimate_spanning(const Shape& dims, double p, const NeighborhoodSpec& spec,
                                      std::uint64_t trials, std::uint64_t seed, unsigned threads = 1) {
  detail::require(trials >= 1, "trials must be >= 1");
  return make_estimate(dims, p, spec, trials, count_spanning(dims, p, spec, seed, 0, trials, threads), seed);
}

struct ThresholdEstimate {
  double p = 0;  // bracket midpoint
  double lo = 0;
  double hi = 1;
  int probes = 0;
  std::uint64_t max_trials = 0;  // largest trial count used at one probe
};

inline constexpr int kMaxTrialFactor = 16;

/// Bisection on p for P(spanned) = target. A probe whose interval straddles
/// the target doubles its trials (extending the same trial sequence) up to
/// kMaxTrialFactor times the base count before deciding by p_hat.
inline ThresholdEstimate threshold_p(int L, const NeighborhoodSpec& spec, double target, double tol,
                                     std::uint64_t trials_per_probe, std::uint64_t seed,
                                     unsigned threads = 1) {
  detail::require(target > 0 && target < 1, "target must lie in (0,1)");
  detail::require(tol > 0, "tol must be positive");
  detail::require(trials_per_probe >= 1, "trials per probe must be >= 1");
  const Shape dims = box_shape(spec, L);
  ThresholdEstimate out;

  auto probe = [&](double p) {
    std::uint64_t n = trials_per_probe;
    std::uint64_t hits = count_spanning(dims, p, spec, seed, 0, n, threads);
    while (n < trials_per_probe * kMaxTrialFactor) {
      if (!make_estimate(dims, p, spec, n, hits, seed).straddles(target)) break;
      hits += count_spanning(dims, p, spec, seed, n, n, threads);
      n *= 2;
    }
    ++out.probes;
    out.max_trials = std::max(out.max_trials, n);
    return static_cast<double>(hits) / static_cast<double>(n) >= target;
  };

  if (probe(0.0) || !probe(1.0)) throw DomainError("threshold bracket not established within [0,1]");
  while (out.hi - out.lo > tol) {
    const double mid = 0.5 * (out.lo + out.hi);
    (probe(mid) ? out.hi : out.lo) = mid;
  }
  out.p = 0.5 * (out.lo + out.hi);
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepMode { grid, target };

inline const char* to_string(SweepMode m) { return m == SweepMode::grid ? "grid" : "target"; }

struct SweepRow {
  int L = 0;
  SpanEstimate est;
};

struct SweepMeta {
  NeighborhoodSpec spec;
  SweepMode mode = SweepMode::grid;
  double target = 0;  // crossing level in target mode, 0 otherwise
  std::uint64_t seed = 0;
  std::string timestamp;
  std::string revision = kRevision;
};

struct SweepResult {
  SweepMeta meta;
  std::vector<SweepRow> rows;  // sorted by (L, p), keys unique
};

using RowSink = std::function<void(const SweepRow&)>;

namespace detail {

inline std::vector<int> sorted_unique_lengths(std::vector<int> Ls) {
  require(!Ls.empty(), "L list must not be empty");
  std::sort(Ls.begin(), Ls.end());
  require(std::adjacent_find(Ls.begin(), Ls.end()) == Ls.end(), "duplicate L in sweep grid");
  return Ls;
}

inline bool row_less(const SweepRow& a, const SweepRow& b) {
  return a.L != b.L ? a.L < b.L : a.est.p < b.est.p;
}

inline bool same_key(const SweepRow& a, const SweepRow& b) { return a.L == b.L && a.est.p == b.est.p; }

}  // namespace detail

/// Estimates on the (L, p) grid in canonical order; `sink` sees each row as
/// soon as it is computed.
inline SweepResult sweep_grid(std::vector<int> Ls, std::vector<double> ps, const NeighborhoodSpec& spec,
                              std::uint64_t trials, std::uint64_t seed, unsigned threads = 1,
                              const RowSink& sink = {}) {
  Ls = detail::sorted_unique_lengths(std::move(Ls));
  detail::require(!ps.empty(), "p list must not be empty");
  std::sort(ps.begin(), ps.end());
  detail::require(std::adjacent_find(ps.begin(), ps.end()) == ps.end(), "duplicate p in sweep grid");
  SweepResult r;
  r.meta.spec = spec;
  r.meta.seed = seed;
  for (int L : Ls) {
    for (double p : ps) {
      SweepRow row{L, estimate_spanning(box_shape(spec, L), p, spec, trials, seed, threads)};
      if (sink) sink(row);
      r.rows.push_back(std::move(row));
    }
  }
  return r;
}

/// One bisected threshold per L; the row holds the estimate at that p.
inline SweepResult sweep_target(std::vector<int> Ls, const NeighborhoodSpec& spec, double target, double tol,
                                std::uint64_t trials, std::uint64_t seed, unsigned threads = 1,
                                const RowSink& sink = {}) {
  Ls = detail::sorted_unique_lengths(std::move(Ls));
  SweepResult r;
  r.meta.spec = spec;
  r.meta.seed = seed;
  r.meta.mode = SweepMode::target;
  r.meta.target = target;
  for (int L : Ls) {
    const double p = threshold_p(L, spec, target, tol, trials, seed, threads).p;
    SweepRow row{L, estimate_spanning(box_shape(spec, L), p, spec, trials, seed, threads)};
    if (sink) sink(row);
    r.rows.push_back(std::move(row));
  }
  return r;
}

/// Union of two sweeps of the same model and mode. Duplicate keys are an
/// error. Metadata merges by min seed, max timestamp and min revision, so
/// the operation is associative and commutative.
inline SweepResult merge(const SweepResult& a, const SweepResult& b) {
  detail::require(a.meta.spec == b.meta.spec, "cannot merge sweeps of different models");
  detail::require(a.meta.mode == b.meta.mode && a.meta.target == b.meta.target,
                  "cannot merge sweeps of different modes or targets");
  SweepResult r;
  r.meta = a.meta;
  r.meta.seed = std::min(a.meta.seed, b.meta.seed);
  r.meta.timestamp = std::max(a.meta.timestamp, b.meta.timestamp);
  r.meta.revision = std::min(a.meta.revision, b.meta.revision);
  r.rows.reserve(a.rows.size() + b.rows.size());
  std::merge(a.rows.begin(), a.rows.end(), b.rows.begin(), b.rows.end(), std::back_inserter(r.rows),
             detail::row_less);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    if (detail::same_key(r.rows[i - 1], r.rows[i])) {
      throw DomainError("duplicate sweep key L=" + std::to_string(r.rows[i].L));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Persistence

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("bad number '" + s + "'");
  return v;
}

inline std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("bad integer '" + s + "'");
  return v;
}

inline constexpr const char* kCsvHeader = "L,p,trials,successes,p_hat,ci_low,ci_high,seed";

inline std::string csv_row(const SweepRow& r) {
  const SpanEstimate& e = r.est;
  std::string s = std::to_string(r.L);
  for (const std::string& f : {format_double(e.p), std::to_string(e.trials), std::to_string(e.successes),
                               format_double(e.p_hat), format_double(e.ci_low), format_double(e.ci_high),
                               std::to_string(e.seed)}) {
    s += ',';
    s += f;
  }
  return s;
}

inline void write_csv(std::ostream& os, const SweepResult& r) {
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) os << csv_row(row) << '\n';
}

/// Rows of a sweep CSV. Estimates are rebuilt from the counts for `spec`.
inline std::vector<SweepRow> read_csv(std::istream& is, const NeighborhoodSpec& spec) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw IoError("missing or wrong sweep CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw IoError("sweep CSV row needs 8 fields: " + line);
    const auto L = parse_uint(f[0]);
    if (L < 1 || L > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw IoError("bad L");
    const auto trials = parse_uint(f[2]);
    const auto successes = parse_uint(f[3]);
    if (trials < 1 || successes > trials) throw IoError("bad trial counts: " + line);
    SweepRow row{static_cast<int>(L), make_estimate(box_shape(spec, static_cast<int>(L)), parse_double(f[1]),
                                                    spec, trials, successes, parse_uint(f[7]))};
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), detail::row_less);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (detail::same_key(rows[i - 1], rows[i])) throw IoError("duplicate (L,p) key in sweep CSV");
  }
  return rows;
}

/// SOURCE_DATE_EPOCH as UTC ISO-8601 when set, else the current time.
inline std::string resolve_timestamp(const std::optional<std::string>& given = std::nullopt) {
  if (given) return *given;
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(parse_uint(env));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json sidecar_json(const SweepResult& r) {
  nlohmann::json j;
  const NeighborhoodSpec& s = r.meta.spec;
  j["model"] = s.radii();
  j["mode"] = to_string(r.meta.mode);
  j["target"] = r.meta.target;
  j["seed"] = r.meta.seed;
  j["timestamp"] = r.meta.timestamp;
  j["revision"] = r.meta.revision;
  j["rows"] = r.rows.size();
  if (s.rank() >= 2) {
    j["form"] = to_string(scaling_form_for(s.sorted_radius(0), s.sorted_radius(1)));
  } else {
    j["form"] = nullptr;
  }
  j["columns"] = kCsvHeader;
  return j;
}

inline SweepMeta meta_from_json(const nlohmann::json& j) {
  try {
    SweepMeta m;
    m.spec = NeighborhoodSpec(j.at("model").get<std::vector<int>>());
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "grid" && mode != "target") throw IoError("unknown sweep mode '" + mode + "'");
    m.mode = mode == "grid" ? SweepMode::grid : SweepMode::target;
    m.target = j.at("target").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.timestamp = j.at("timestamp").get<std::string>();
    m.revision = j.at("revision").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad sweep metadata: ") + e.what());
  }
}

inline SweepResult read_sweep(std::istream& csv, std::istream& sidecar) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(sidecar);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad sweep metadata: ") + e.what());
  }
  SweepResult r;
  r.meta = meta_from_json(j);
  r.rows = read_csv(csv, r.meta.spec);
  return r;
}

// ---------------------------------------------------------------------------
// Scaling fits

struct ScalingFit {
  ScalingForm form = ScalingForm::f_aa;
  double slope = 0;
  double intercept = 0;
  double residual_norm = 0;
  std::size_t n = 0;
  double x_min = 0, x_max = 0;  // range of the scaling variable
  int L_min = 0, L_max = 0;
};

/// Least squares of ln L (2D) or ln ln L (3D) against the scaling variable of
/// `form` evaluated at each row's p.
inline ScalingFit fit_scaling(const SweepResult& sweep, ScalingForm form) {
  const NeighborhoodSpec& spec = sweep.meta.spec;
  detail::require(spec.rank() == 2 || spec.rank() == 3, "scaling fits need a 2D or 3D model");
  detail::require(sweep.rows.size() >= 3, "scaling fits need at least 3 rows");
  const int a = spec.sorted_radius(0);
  std::vector<double> xs, ys;
  ScalingFit fit;
  fit.form = form;
  fit.n = sweep.rows.size();
  fit.L_min = std::numeric_limits<int>::max();
  for (const auto& row : sweep.rows) {
    xs.push_back(scaling_value(form, a, row.est.p));
    const double lnL = std::log(static_cast<double>(row.L));
    if (spec.rank() == 3) detail::require(row.L >= 2, "ln ln L needs L >= 2");
    ys.push_back(spec.rank() == 2 ? lnL : std::log(lnL));
    fit.L_min = std::min(fit.L_min, row.L);
    fit.L_max = std::max(fit.L_max, row.L);
  }
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  fit.x_min = *xmin;
  fit.x_max = *xmax;
  detail::require(fit.x_max - fit.x_min > 1e-12 * std::max(1.0, std::abs(fit.x_max)),
                  "degenerate fit design: all scaling values equal");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

}  // namespace anisoboot
