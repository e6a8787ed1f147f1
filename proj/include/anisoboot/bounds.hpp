#pragma once

// Closed-form threshold scales, droplet densities and spanning / crossing
// upper bounds. Everything is computed in log space; lengths that would
// overflow a double are carried as ln ln L.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "anisoboot/error.hpp"
#include "anisoboot/lattice.hpp"
#include "anisoboot/regions.hpp"

namespace anisoboot {

struct DropletConstants {
  static constexpr double C_H = std::numbers::pi * std::numbers::pi / 18.0;
  static constexpr double two_C_H = std::numbers::pi * std::numbers::pi / 9.0;
};

inline constexpr double kDefaultEpsilon = 0.25;

enum class ScalingForm { f_aa, f_ab };

inline const char* to_string(ScalingForm f) { return f == ScalingForm::f_aa ? "f_aa" : "f_ab"; }

inline ScalingForm scaling_form_for(int a, int b) { return a == b ? ScalingForm::f_aa : ScalingForm::f_ab; }

namespace detail {

inline void require_open_unit(double p, const char* what) {
  require(p > 0.0 && p < 1.0, std::string(what) + " must lie in (0,1)");
}

}  // namespace detail

/// p^-a for f_aa, p^-a ln^2 p for f_ab.
inline double scaling_value(ScalingForm form, int a, double p) {
  detail::require_open_unit(p, "p");
  const double base = std::pow(p, -a);
  if (form == ScalingForm::f_aa) return base;
  const double lp = std::log(p);
  return base * lp * lp;
}

/// Leading-order threshold scale of the (a,b) model.
inline double f_scaling(int a, int b, double p) {
  detail::require(a >= 1 && a <= b, "f_scaling needs 1 <= a <= b");
  return scaling_value(scaling_form_for(a, b), a, p);
}

inline double log_droplet_density_11(double p) {
  detail::require_open_unit(p, "p");
  return -DropletConstants::two_C_H / p;
}

/// Density of critical droplets of the (1,1) model, exp(-2 C_H / p).
inline double droplet_density_11(double p) { return std::exp(log_droplet_density_11(p)); }

/// A length L > 0 stored as ln ln L so that e^{e^{x}} stays representable.
class LogLength {
 public:
  LogLength() = default;

  static LogLength from_lnln(double lnln) {
    LogLength l;
    l.lnln_ = lnln;
    return l;
  }
  static LogLength from_ln(double ln) {
    return from_lnln(ln > 0 ? std::log(ln) : -std::numeric_limits<double>::infinity());
  }

  double lnln() const noexcept { return lnln_; }
  double ln() const noexcept { return std::exp(lnln_); }
  /// L itself; +inf when it does not fit in a double.
  double value() const noexcept { return std::exp(ln()); }
  bool representable() const noexcept { return ln() < 700.0; }

  friend bool operator<(const LogLength& l, const LogLength& r) noexcept { return l.lnln_ < r.lnln_; }
  friend bool operator<=(const LogLength& l, const LogLength& r) noexcept { return l.lnln_ <= r.lnln_; }
  friend bool operator==(const LogLength& l, const LogLength& r) noexcept { return l.lnln_ == r.lnln_; }

 private:
  double lnln_ = -std::numeric_limits<double>::infinity();  // L = 1
};

struct ThresholdBracket {
  LogLength l_minus;
  LogLength l_plus;
  double gamma = 0;
  double Gamma = 0;
  ScalingForm form = ScalingForm::f_aa;
  int rank = 2;
};

/// 2D: L = e^{gamma f};  3D: L = e^{e^{gamma f}}, with f from the two smallest radii.
inline ThresholdBracket threshold_bracket(const NeighborhoodSpec& spec, double p, double gamma,
                                          double Gamma) {
  detail::require(spec.rank() == 2 || spec.rank() == 3, "threshold brackets need a 2D or 3D model");
  detail::require_open_unit(p, "p");
  detail::require(gamma <= Gamma, "gamma must not exceed Gamma");
  detail::require(gamma >= 0, "gamma must be non-negative");
  const int a = spec.sorted_radius(0);
  const int b = spec.sorted_radius(1);
  ThresholdBracket t;
  t.gamma = gamma;
  t.Gamma = Gamma;
  t.form = scaling_form_for(a, b);
  t.rank = spec.rank();
  const double f = f_scaling(a, b, p);
  if (spec.rank() == 2) {
    t.l_minus = LogLength::from_ln(gamma * f);
    t.l_plus = LogLength::from_ln(Gamma * f);
  } else {
    t.l_minus = LogLength::from_lnln(gamma * f);
    t.l_plus = LogLength::from_lnln(Gamma * f);
  }
  return t;
}

/// A probability bound. `log_value` is the raw (unclamped) logarithm;
/// `value` is min(1, exp(log_value)).
struct BoundValue {
  double value = 1;
  double log_value = 0;
  bool clamped = false;

  static BoundValue from_log(double log_raw) {
    BoundValue b;
    b.log_value = log_raw;
    b.clamped = log_raw > 0;
    b.value = b.clamped ? 1.0 : std::exp(log_raw);
    return b;
  }
};

namespace detail {

// ln(1 - (1 - q)^n) for q in (0,1], n >= 0.
inline double log_one_minus_pow_complement(double q, double n) {
  if (q >= 1.0) return 0.0;
  return std::log(-std::expm1(n * std::log1p(-q)));
}

inline void require_rect_args(int x, int y, int a, int b, double pt, double ph) {
  require(x >= 1 && y >= 1, "rectangle sides must be >= 1");
  require(a >= 1 && b >= 1, "radii must be >= 1");
  require_open_unit(pt, "p_tilde");
  require_open_unit(ph, "p_hat");
}

}  // namespace detail

/// Every column (x of them, length y) and every row (y of them, length x)
/// must hold a site that can be occupied given a full neighboring line.
inline BoundValue rect_span_upper(int x, int y, int a, int b, double p_tilde, double p_hat) {
  detail::require_rect_args(x, y, a, b, p_tilde, p_hat);
  const double cols = x * detail::log_one_minus_pow_complement(std::pow(p_tilde, b), y);
  const double rows = y * detail::log_one_minus_pow_complement(std::pow(p_hat, a), x);
  return BoundValue::from_log(std::min(cols, rows));
}

/// As rect_span_upper, with the weakly spanned sites of 2a+1 columns / 2b+1 rows.
inline BoundValue rect_weak_span_upper(int x, int y, int a, int b, double p_tilde, double p_hat) {
  detail::require_rect_args(x, y, a, b, p_tilde, p_hat);
  const double cols =
      x * detail::log_one_minus_pow_complement(std::pow(p_tilde, b), (2.0 * a + 1) * y);
  const double rows =
      y * detail::log_one_minus_pow_complement(std::pow(p_hat, a), (2.0 * b + 1) * x);
  return BoundValue::from_log(std::min(cols, rows));
}

enum class ECrossBranch { stepping_stones, flooding };

struct ECrossBound {
  BoundValue bound;
  ECrossBranch branch = ECrossBranch::stepping_stones;
};

/// Bound on the probability that [0,l]^3 is e-crossed in the (a,b,c) model
/// (a <= b <= c), slices of thickness s = c+1. `gamma` fixes the lower
/// threshold length of the (a,b) model that bounds flooded-slice density.
inline ECrossBound e_crossed_upper(double l, double p, int a, int b, int c, double eps, double gamma) {
  detail::require_open_unit(p, "p");
  detail::require(a >= 1 && a <= b && b <= c, "e_crossed_upper needs 1 <= a <= b <= c");
  detail::require(l > std::pow(p, -0.25), "l must exceed p^(-1/4)");
  const double s = c + 1.0;
  const double sp = s * p;
  ECrossBound out;
  if (l < std::pow(p, -b + eps)) {
    out.branch = ECrossBranch::stepping_stones;
    const double log_base = std::log(2.0) + 0.5 * std::log(sp);
    out.bound = BoundValue::from_log(std::log(2.0) + 2 * std::log(l) + (l / s - 2) * log_base);
  } else {
    out.branch = ECrossBranch::flooding;
    const double log_pbar = -gamma * f_scaling(a, b, p);
    const double inner = 3 * std::log(l) + 0.5 * (s - 1) * std::log(sp) +
                         2.0 * b * (1 - eps) * std::log(p) + log_pbar;
    out.bound = BoundValue::from_log(std::log(4.0) + 2 * std::log(l) + (l / s) * inner);
  }
  return out;
}

enum class SpanRegime {
  tiny,       // L <= p^{-1/4}: direct p^{1/4}
  small,      // L < p^{-b+eps}: e-crossing of the whole cube
  scan,       // min over k / max over l of block e-crossing bounds
  scan_empty  // no admissible k; bound is vacuous
};

inline const char* to_string(SpanRegime r) {
  switch (r) {
    case SpanRegime::tiny: return "tiny";
    case SpanRegime::small: return "small";
    case SpanRegime::scan: return "scan";
    case SpanRegime::scan_empty: return "scan_empty";
  }
  return "?";
}

struct SpanBound {
  BoundValue bound;
  SpanRegime regime = SpanRegime::tiny;
  int best_k = 0;
};

/// Upper bound on P([0,L]^3 internally spanned):
///   L^3 min_{1<=k<=(L-lambda)/kappa} ((kappa-1)k+lambda) max_{k<=l<=kappa k+lambda} P_l(e-crossed).
/// Blocks with l <= p^{-1/4} enter the max with the trivial bound 1.
inline SpanBound spanned_upper(long L, double p, const NeighborhoodSpec& spec, double eps, double gamma) {
  detail::require(spec.rank() == 3, "spanned_upper needs a three-dimensional model");
  detail::require_open_unit(p, "p");
  detail::require(L >= 1, "L must be >= 1");
  const int a = spec.sorted_radius(0), b = spec.sorted_radius(1), c = spec.sorted_radius(2);
  const double Ld = static_cast<double>(L);
  SpanBound out;
  if (Ld <= std::pow(p, -0.25)) {
    out.regime = SpanRegime::tiny;
    out.bound = BoundValue::from_log(0.25 * std::log(p));
    return out;
  }
  if (Ld < std::pow(p, -b + eps)) {
    out.regime = SpanRegime::small;
    out.bound = e_crossed_upper(Ld, p, a, b, c, eps, gamma).bound;
    return out;
  }
  const auto [kappa, lambda] = kappa_lambda(spec);
  const long kmax = (L - lambda) / kappa;
  if (kmax < 1) {
    out.regime = SpanRegime::scan_empty;
    out.bound = BoundValue::from_log(0.0);
    return out;
  }
  const long lmax = kappa * kmax + lambda;
  const double lmin_regime = std::pow(p, -0.25);
  std::vector<double> log_e(static_cast<std::size_t>(lmax) + 1, 0.0);
  for (long l = 1; l <= lmax; ++l) {
    if (static_cast<double>(l) > lmin_regime) {
      log_e[l] = e_crossed_upper(static_cast<double>(l), p, a, b, c, eps, gamma).bound.log_value;
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= kmax; ++k) {
    const long hi = kappa * k + lambda;
    const double worst = *std::max_element(log_e.begin() + k, log_e.begin() + hi + 1);
    const double term = std::log(static_cast<double>((kappa - 1) * k + lambda)) + worst;
    if (term < best) {
      best = term;
      out.best_k = static_cast<int>(k);
    }
  }
  out.regime = SpanRegime::scan;
  out.bound = BoundValue::from_log(3 * std::log(Ld) + best);
  return out;
}

}  // namespace anisoboot
