#pragma once

// Slice / minicolumn enhancement of 3D configurations, e-crossing, and the
// stepping-stone statistic of the reduced 2D models.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "anisoboot/dynamics.hpp"
#include "anisoboot/error.hpp"
#include "anisoboot/lattice.hpp"
#include "anisoboot/rng.hpp"

namespace anisoboot {

struct SliceDecomposition {
  int s = 1;
  int slice_count = 0;
  int axis = 2;
  double q = 0;
};

/// Slices of thickness s = c+1 stacked along the easiest axis.
inline SliceDecomposition decompose(const Shape& dims, const NeighborhoodSpec& spec, double p) {
  detail::require(spec.rank() == 3 && dims.rank() == 3, "enhancement needs a three-dimensional model");
  detail::require(p >= 0.0 && p <= 1.0, "occupation probability must lie in [0,1]");
  SliceDecomposition d;
  d.axis = spec.easiest_axis();
  d.s = spec.radius(d.axis) + 1;
  const int ext = dims.extent(d.axis);
  detail::require(ext % d.s == 0, "extent " + std::to_string(ext) + " along the enhanced axis is not a multiple of " +
                                      std::to_string(d.s));
  d.slice_count = ext / d.s;
  d.q = p >= 1.0 ? 1.0 : -std::expm1(d.s * std::log1p(-p));
  return d;
}

inline constexpr double kDefaultEnhanceEps = 0.25;

struct EnhanceParams {
  std::size_t S = 1;
  long x_c = 1;
  long y_c = 2;
  double eps = kDefaultEnhanceEps;
  double d_S = 3;

  /// Checks x_c < y_c < p^{-b+eps} (and x_c >= 1).
  void validate(double p, int b) const {
    detail::require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
    detail::require(S >= 1, "flooding size S must be >= 1");
    const double cap = std::pow(p, -b + eps);
    detail::require(x_c >= 1 && x_c < y_c && static_cast<double>(y_c) < cap,
                    "stepping-stone caps need 1 <= x_c < y_c < p^(-b+eps)");
  }

  static EnhanceParams make(std::size_t S, long x_c, long y_c, double eps, double p, int b) {
    EnhanceParams e;
    e.S = S;
    e.x_c = x_c;
    e.y_c = y_c;
    e.eps = eps;
    e.d_S = std::pow(p, -b + eps);
    e.validate(p, b);
    return e;
  }

  /// y_c = ceil(p^{-b+eps}) - 1, x_c = min(ceil(p^{-a} ln(1/p)), y_c - 1), S = x_c y_c,
  /// with (a,b) the two smallest radii.
  static EnhanceParams defaults(const NeighborhoodSpec& spec, double p, double eps = kDefaultEnhanceEps) {
    detail::require(spec.rank() >= 2, "enhancement parameters need a 2D or 3D model");
    detail::require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
    const int a = spec.sorted_radius(0);
    const int b = spec.sorted_radius(1);
    const long y_c = static_cast<long>(std::ceil(std::pow(p, -b + eps))) - 1;
    const long x_raw = static_cast<long>(std::ceil(std::pow(p, -a) * std::log(1.0 / p)));
    const long x_c = std::min(x_raw, y_c - 1);
    return make(static_cast<std::size_t>(std::max(x_c, 1L) * y_c), x_c, y_c, eps, p, b);
  }
};

namespace detail {

struct SliceGeometry {
  int axis = 2;
  int s = 1;
  int slice_count = 0;
  std::array<int, 2> other{0, 1};
  Shape plane;
  NeighborhoodSpec reduced;

  SliceGeometry(const Shape& dims, const NeighborhoodSpec& spec) {
    const SliceDecomposition d = decompose(dims, spec, 0.0);
    axis = d.axis;
    s = d.s;
    slice_count = d.slice_count;
    int j = 0;
    for (int a = 0; a < 3; ++a) {
      if (a != axis) other[j++] = a;
    }
    plane = Shape{dims.extent(other[0]), dims.extent(other[1])};
    reduced = reduce(spec, axis);
  }

  // Minicolumn (slice, plane site) holding a 3D site.
  std::size_t slice_of(const Coord& c) const { return static_cast<std::size_t>(c[axis] / s); }
  std::size_t plane_of(const Coord& c) const { return plane.index(Coord{c[other[0]], c[other[1]], 0}); }
};

// Largest component of `occ` under the model's neighborhood graph.
inline std::size_t largest_component(const Lattice& occ, const NeighborhoodSpec& spec) {
  const Shape& s = occ.shape();
  std::vector<std::uint8_t> seen(s.size(), 0);
  std::vector<std::size_t> stack;
  std::size_t best = 0;
  occ.for_each_set([&](std::size_t start) {
    if (seen[start]) return;
    seen[start] = 1;
    stack.assign(1, start);
    std::size_t size = 0;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      for_each_neighbor(s, spec, i, [&](std::size_t j) {
        if (occ.test(j) && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      });
    }
    best = std::max(best, size);
  });
  return best;
}

}  // namespace detail

/// The 3D configuration after each of the five enhancement steps.
struct EnhanceStages {
  std::array<Lattice, 5> after;
  std::vector<bool> flooded;  // per slice
  const Lattice& result() const noexcept { return after[4]; }
};

inline EnhanceStages enhance_stages(const Lattice& lat, const NeighborhoodSpec& spec, const EnhanceParams& params) {
  const Shape& dims = lat.shape();
  const detail::SliceGeometry g(dims, spec);
  std::vector<Lattice> cols(static_cast<std::size_t>(g.slice_count), Lattice(g.plane));

  auto paint = [&]() {
    Lattice out(dims);
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const Coord c = dims.coord(i);
      if (cols[g.slice_of(c)].test(g.plane_of(c))) out.set(i);
    }
    return out;
  };

  EnhanceStages st;
  // 1: minicolumns holding an occupied site.
  lat.for_each_set([&](std::size_t i) {
    const Coord c = dims.coord(i);
    cols[g.slice_of(c)].set(g.plane_of(c));
  });
  st.after[0] = paint();

  // 2: reduced 2D dynamics inside each slice.
  BootstrapEngine engine(g.plane, g.reduced);
  for (auto& slice : cols) engine.run(slice);
  st.after[1] = paint();

  // 3: flooding.
  st.flooded.assign(cols.size(), false);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (detail::largest_component(cols[k], g.reduced) >= params.S) {
      st.flooded[k] = true;
      cols[k] = Lattice::full(g.plane);
    }
  }
  st.after[2] = paint();

  // 4: minicolumns holding a weakly spanned site of the 3D configuration.
  {
    BootstrapEngine e3(dims, spec);
    Lattice final = lat;
    e3.run(final);
    weakly_spanned_sites(final, e3.added(), spec).for_each_set([&](std::size_t i) {
      const Coord c = dims.coord(i);
      cols[g.slice_of(c)].set(g.plane_of(c));
    });
  }
  st.after[3] = paint();

  // 5: first and last slice.
  if (!cols.empty()) {
    cols.front() = Lattice::full(g.plane);
    cols.back() = Lattice::full(g.plane);
  }
  st.after[4] = paint();
  return st;
}

inline Lattice enhance(const Lattice& lat, const NeighborhoodSpec& spec, const EnhanceParams& params) {
  return enhance_stages(lat, spec, params).after[4];
}

/// Union of the minicolumns that meet `lat`.
inline Lattice minicolumn_hull(const Lattice& lat, const NeighborhoodSpec& spec) {
  const Shape& dims = lat.shape();
  const detail::SliceGeometry g(dims, spec);
  std::vector<Lattice> cols(static_cast<std::size_t>(g.slice_count), Lattice(g.plane));
  lat.for_each_set([&](std::size_t i) {
    const Coord c = dims.coord(i);
    cols[g.slice_of(c)].set(g.plane_of(c));
  });
  Lattice out(dims);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const Coord c = dims.coord(i);
    if (cols[g.slice_of(c)].test(g.plane_of(c))) out.set(i);
  }
  return out;
}

inline bool is_e_crossed(const Lattice& lat, const NeighborhoodSpec& spec, const EnhanceParams& params) {
  return has_crossing(enhance(lat, spec, params), spec.easiest_axis());
}

struct SteppingStoneStats {
  double chi = 0;
  std::size_t trials = 0;
  double ci = 0;  // 95% half-width
  double chi_uncapped = 0;
  std::size_t violations = 0;
};

namespace detail {

struct OriginComponent {
  std::size_t size = 0;
  std::array<int, 2> side{0, 0};
  bool touches_edge = false;
};

// Occupied component of the window centre after closure plus weakly spanned
// sites, under the model's neighborhood graph.
inline OriginComponent origin_component(const Lattice& enhanced, const NeighborhoodSpec& spec) {
  const Shape& s = enhanced.shape();
  const Coord centre{s.extent(0) / 2, s.extent(1) / 2, 0};
  const std::size_t origin = s.index(centre);
  OriginComponent oc;
  if (!enhanced.test(origin)) return oc;
  std::vector<std::uint8_t> seen(s.size(), 0);
  std::vector<std::size_t> stack{origin};
  seen[origin] = 1;
  std::array<int, 2> lo{centre[0], centre[1]}, hi = lo;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    ++oc.size;
    const Coord c = s.coord(i);
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
    for_each_neighbor(s, spec, i, [&](std::size_t j) {
      if (enhanced.test(j) && !seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    });
  }
  for (int a = 0; a < 2; ++a) {
    oc.side[a] = hi[a] - lo[a] + 1;
    oc.touches_edge = oc.touches_edge || lo[a] == 0 || hi[a] == s.extent(a) - 1;
  }
  return oc;
}

}  // namespace detail

/// Monte Carlo estimate of the expected size of the origin's occupied
/// component (closure plus weakly spanned sites) with bounding-box sides
/// below x_c (along the a axis) and y_c (along the b axis); larger
/// components contribute 0 to chi and are counted in `violations`.
///
/// The reference lattice is the window of half-widths (x_c, y_c) around the
/// origin. Each trial starts from a small window and doubles it while the
/// component touches the window edge; all windows read the cells of the
/// reference window, so growth stops at the caps.
inline SteppingStoneStats measure_chi(const NeighborhoodSpec& spec2d, double p, const EnhanceParams& params,
                                      std::size_t trials, std::uint64_t seed) {
  detail::require(spec2d.rank() == 2, "measure_chi needs a two-dimensional model");
  detail::require(p >= 0.0 && p <= 1.0, "occupation probability must lie in [0,1]");
  detail::require(trials >= 1, "trials must be >= 1");
  SteppingStoneStats out;
  out.trials = trials;
  if (p == 0.0) return out;
  detail::require(params.x_c > 1 && params.y_c > 1, "stepping-stone caps must exceed 1");

  std::array<long, 2> cap{};
  cap[spec2d.rank_axis(0)] = params.x_c;
  cap[spec2d.rank_axis(1)] = params.y_c;
  const long ref_width = 2 * cap[0] + 1;
  const std::uint64_t cut = occupancy_cutoff(p);

  double sum = 0, sum_sq = 0, sum_uncapped = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const CellStream cells(seed, t, Stream::stepping_stone);
    std::array<long, 2> half{std::min(cap[0], 8L), std::min(cap[1], 8L)};
    detail::OriginComponent oc;
    for (;;) {
      const Shape win{static_cast<int>(2 * half[0] + 1), static_cast<int>(2 * half[1] + 1)};
      Lattice lat(win);
      for (int y = 0; y < win.extent(1); ++y) {
        for (int x = 0; x < win.extent(0); ++x) {
          const long rx = x - half[0] + cap[0];
          const long ry = y - half[1] + cap[1];
          if (cells.word(static_cast<std::uint64_t>(rx + ref_width * ry)) < cut) lat.set(Coord{x, y, 0});
        }
      }
      oc = detail::origin_component(weak_enhance(lat, spec2d), spec2d);
      const bool at_cap = half[0] == cap[0] && half[1] == cap[1];
      if (!oc.touches_edge || at_cap) break;
      half = {std::min(cap[0], 2 * half[0]), std::min(cap[1], 2 * half[1])};
    }
    const auto size = static_cast<double>(oc.size);
    sum_uncapped += size;
    const bool violates = oc.side[0] >= cap[0] || oc.side[1] >= cap[1];
    if (violates) {
      ++out.violations;
    } else {
      sum += size;
      sum_sq += size * size;
    }
  }
  const auto n = static_cast<double>(trials);
  out.chi = sum / n;
  out.chi_uncapped = sum_uncapped / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * out.chi * out.chi) / (n - 1)) : 0.0;
  out.ci = 1.96 * std::sqrt(var / n);
  return out;
}

}  // namespace anisoboot
