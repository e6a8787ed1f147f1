#pragma once

// Critical droplet planning and droplet-seeded growth.

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "anisoboot/bounds.hpp"
#include "anisoboot/dynamics.hpp"
#include "anisoboot/error.hpp"
#include "anisoboot/lattice.hpp"

namespace anisoboot {

/// Brackets of the three reduced models, indexed by the removed axis.
using ReducedBrackets = std::array<ThresholdBracket, 3>;

inline ReducedBrackets asymptotic_brackets(const NeighborhoodSpec& spec, double p, double gamma,
                                           double Gamma) {
  ReducedBrackets out;
  for (int axis = 0; axis < 3; ++axis) out[axis] = threshold_bracket(reduce(spec, axis), p, gamma, Gamma);
  return out;
}

/// Bracket from measured 2D lengths, e.g. bisected thresholds at two levels.
inline ThresholdBracket measured_bracket(double l_minus, double l_plus) {
  detail::require(l_minus >= 1 && l_minus <= l_plus, "measured bracket needs 1 <= L- <= L+");
  ThresholdBracket t;
  t.l_minus = LogLength::from_ln(std::log(l_minus));
  t.l_plus = LogLength::from_ln(std::log(l_plus));
  return t;
}

/// Axis whose perpendicular reduced model has the smallest scaling value at p.
/// Ties go to the higher axis.
inline int easiest_growth_axis(const NeighborhoodSpec& spec, double p) {
  detail::require(spec.rank() == 3, "growth axis needs a three-dimensional model");
  int best = 2;
  double best_f = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const NeighborhoodSpec r = reduce(spec, axis);
    const double f = f_scaling(r.sorted_radius(0), r.sorted_radius(1), p);
    if (f <= best_f) {
      best_f = f;
      best = axis;
    }
  }
  return best;
}

enum class DensitySource {
  automatic,  // closed form for a (1,1) reduced model, bracket otherwise
  bracket,
};

struct CriticalDropletPlan {
  std::optional<Shape> block;  // absent when N does not fit an extent
  int axis = 2;                // thickness-2 axis (growth direction)
  double ln_P = 0;             // log density of critical droplets of the reduced model
  double ln_N_exact = 0;       // -(1+eps)/2 ln P before rounding
  double ln_N = 0;
  std::optional<std::int64_t> N;
  double ln_M = 0;
  std::optional<std::int64_t> M;
  LogLength l_plus_bar;
  double eps = 0;
  double log_density = 0;  // ln of p^{cells}

  bool satisfies_invariants() const {
    const double tol = 1e-12 * std::max(1.0, std::abs(ln_P));
    const bool size_ok = 2 * ln_N >= -(1 + eps) * ln_P - tol;
    const bool slabs_ok = ln_M + ln_N >= 2 * l_plus_bar.ln() - 1e-12 * std::max(1.0, l_plus_bar.ln());
    return size_ok && slabs_ok;
  }
};

namespace detail {

inline constexpr double kMaxLnCount = 40.0;  // e^40 ~ 2.4e17 fits an int64

/// ceil(e^x) for moderate x, nudged so that ln(result) >= x holds in floating point.
inline std::int64_t ceil_exp(double x) {
  auto n = static_cast<std::int64_t>(std::ceil(std::exp(x)));
  n = std::max<std::int64_t>(n, 1);
  while (std::log(static_cast<double>(n)) < x) ++n;
  return n;
}

}  // namespace detail

inline CriticalDropletPlan plan_droplet(const NeighborhoodSpec& spec, double p, double eps,
                                        const ReducedBrackets& brackets,
                                        DensitySource source = DensitySource::automatic) {
  detail::require(spec.rank() == 3, "droplet plans need a three-dimensional model");
  detail::require_open_unit(p, "p");
  detail::require(eps >= 0 && std::isfinite(eps), "eps must be non-negative");
  CriticalDropletPlan plan;
  plan.eps = eps;
  plan.axis = easiest_growth_axis(spec, p);
  const NeighborhoodSpec r = reduce(spec, plan.axis);
  const bool closed_form = source == DensitySource::automatic && r.sorted_radius(0) == 1 && r.sorted_radius(1) == 1;
  plan.ln_P = closed_form ? log_droplet_density_11(p) : -brackets[plan.axis].l_minus.ln();
  detail::require(plan.ln_P <= 0, "droplet density must not exceed 1");

  plan.ln_N_exact = -(1 + eps) / 2 * plan.ln_P;
  if (plan.ln_N_exact < detail::kMaxLnCount) {
    plan.N = detail::ceil_exp(plan.ln_N_exact);
    plan.ln_N = std::log(static_cast<double>(*plan.N));
  } else {
    plan.ln_N = plan.ln_N_exact;
  }

  plan.l_plus_bar = std::max({brackets[0].l_plus, brackets[1].l_plus, brackets[2].l_plus});
  const double ln_M = std::max(0.0, 2 * plan.l_plus_bar.ln() - plan.ln_N);
  if (ln_M < detail::kMaxLnCount) {
    plan.M = detail::ceil_exp(ln_M);
    plan.ln_M = std::log(static_cast<double>(*plan.M));
  } else {
    plan.ln_M = ln_M;
  }

  const double cells = 2 * std::exp(2 * plan.ln_N);
  plan.log_density = cells * std::log(p);
  if (plan.N && *plan.N <= INT_MAX) {
    std::vector<int> ext(3, static_cast<int>(*plan.N));
    ext[plan.axis] = 2;
    plan.block = Shape(ext);
  }
  return plan;
}

/// ln of the probability that every cell of the block is occupied.
inline double droplet_seed_probability(const Shape& block, double p) {
  detail::require_open_unit(p, "p");
  return static_cast<double>(block.size()) * std::log(p);
}

/// ceil(C p^-a) sites along the a axis by b along the b axis.
inline Shape rect_droplet(const NeighborhoodSpec& spec, double p, double C) {
  detail::require(spec.rank() == 2, "rectangular droplets need a two-dimensional model");
  detail::require_open_unit(p, "p");
  detail::require(C > 0, "C must be positive");
  const double len = std::ceil(C * std::pow(p, -spec.sorted_radius(0)));
  detail::require(len <= INT_MAX, "droplet length overflows");
  std::vector<int> ext(2);
  ext[spec.rank_axis(0)] = static_cast<int>(len);
  ext[spec.rank_axis(1)] = spec.sorted_radius(1);
  return Shape(ext);
}

namespace detail {

inline bool slab_full(const Lattice& lat, const Coord& lo, const Coord& hi, int axis, int layer) {
  const Shape& s = lat.shape();
  Coord c = lo;
  c[axis] = layer;
  for (;;) {
    if (!lat.test(s.index(c))) return false;
    int a = 0;
    for (; a < s.rank(); ++a) {
      if (a == axis) continue;
      if (++c[a] <= hi[a]) break;
      c[a] = lo[a];
    }
    if (a == s.rank()) return true;
  }
}

}  // namespace detail

struct GrowthOutcome {
  bool filled = false;
  Coord lo{}, hi{};  // fully occupied box grown from the seed, inclusive
  std::array<int, kMaxRank> advance{};  // box side minus block side, per axis
  int slabs_advanced = 0;               // sum of advance

  int side(int axis) const noexcept { return hi[axis] - lo[axis] + 1; }
};

/// Occupies the centred block, fills the rest of the arena at p from
/// (seed, trial) and runs closure. Growth is the largest box reachable from
/// the block by adding fully occupied face slabs. A finite `max_generations`
/// stops the dynamics early.
inline GrowthOutcome simulate_growth(const Shape& block, double p, const Shape& arena,
                                     const NeighborhoodSpec& spec, std::uint64_t seed,
                                     std::uint64_t trial = 0,
                                     int max_generations = std::numeric_limits<int>::max()) {
  const int d = arena.rank();
  detail::require(block.rank() == d && spec.rank() == d, "block, arena and model ranks differ");
  Coord off{};
  for (int a = 0; a < d; ++a) {
    detail::require(block.extent(a) <= arena.extent(a), "block larger than arena");
    off[a] = (arena.extent(a) - block.extent(a)) / 2;
  }
  Lattice lat = random_fill(arena, p, seed, trial);
  for (std::size_t i = 0; i < block.size(); ++i) {
    Coord c = block.coord(i);
    for (int a = 0; a < d; ++a) c[a] += off[a];
    lat.set(arena.index(c));
  }
  BootstrapEngine engine(arena, spec);
  engine.run(lat, max_generations);

  GrowthOutcome out;
  out.filled = lat.is_full();
  for (int a = 0; a < d; ++a) {
    out.lo[a] = off[a];
    out.hi[a] = off[a] + block.extent(a) - 1;
  }
  // Grow the occupied box one full face slab at a time, axes in order.
  for (bool grew = true; grew;) {
    grew = false;
    for (int a = 0; a < d; ++a) {
      for (int dir : {-1, 1}) {
        const int layer = dir < 0 ? out.lo[a] - 1 : out.hi[a] + 1;
        if (layer < 0 || layer >= arena.extent(a)) continue;
        if (detail::slab_full(lat, out.lo, out.hi, a, layer)) {
          (dir < 0 ? out.lo[a] : out.hi[a]) = layer;
          grew = true;
        }
      }
    }
  }
  for (int a = 0; a < d; ++a) {
    out.advance[a] = out.side(a) - block.extent(a);
    out.slabs_advanced += out.advance[a];
  }
  return out;
}

}  // namespace anisoboot
