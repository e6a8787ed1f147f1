#pragma once

// Bootstrap closure, spanning and crossing predicates, weak enhancement and
// dimensional reduction.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "anisoboot/error.hpp"
#include "anisoboot/lattice.hpp"

namespace anisoboot {

struct ClosureResult {
  Lattice final;
  int generations = 0;
  std::size_t newly_occupied = 0;
};

/// Reusable closure workspace for one (shape, model) pair.
///
/// Runs the synchronous bootstrap rule to its fixpoint with a frontier
/// worklist: only neighbors of sites occupied in generation g are examined
/// for generation g+1. Generation counts therefore agree with full sweeps.
class BootstrapEngine {
 public:
  BootstrapEngine(const Shape& shape, const NeighborhoodSpec& spec) : shape_(shape), spec_(spec) {
    detail::require(spec.rank() == shape.rank(), "model and lattice dimensionality differ");
    counts_.resize(shape.size());
  }

  const Shape& shape() const noexcept { return shape_; }
  const NeighborhoodSpec& spec() const noexcept { return spec_; }

  /// Replaces lat by its closure, or by the configuration after
  /// `max_generations` synchronous steps. Returns the number of generations.
  int run(Lattice& lat, int max_generations = std::numeric_limits<int>::max()) {
    std::fill(counts_.begin(), counts_.end(), 0);
    added_.clear();
    const auto k = static_cast<std::uint16_t>(spec_.k());
    lat.for_each_set([&](std::size_t i) {
      for_each_neighbor(shape_, spec_, i, [&](std::size_t j) { ++counts_[j]; });
    });
    frontier_.clear();
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] >= k && !lat.test(i)) frontier_.push_back(i);
    }
    int generations = 0;
    while (!frontier_.empty() && generations < max_generations) {
      ++generations;
      for (auto i : frontier_) lat.set(i);
      next_.clear();
      for (auto i : frontier_) {
        for_each_neighbor(shape_, spec_, i, [&](std::size_t j) {
          if (++counts_[j] == k && !lat.test(j)) next_.push_back(j);
        });
      }
      added_.insert(added_.end(), frontier_.begin(), frontier_.end());
      frontier_.swap(next_);
    }
    return generations;
  }

  /// Sites occupied by the last run(), in order of occupation.
  const std::vector<std::size_t>& added() const noexcept { return added_; }

 private:
  Shape shape_;
  NeighborhoodSpec spec_;
  std::vector<std::uint16_t> counts_;
  std::vector<std::size_t> frontier_, next_, added_;
};

inline ClosureResult closure(const Lattice& lat, const NeighborhoodSpec& spec) {
  BootstrapEngine engine(lat.shape(), spec);
  ClosureResult r{lat, 0, 0};
  r.generations = engine.run(r.final);
  r.newly_occupied = engine.added().size();
  return r;
}

inline constexpr std::size_t kDefaultOracleCap = 1'000'000;

/// Reference closure: full synchronous sweeps recounting every neighborhood
/// until nothing changes.
inline ClosureResult closure_naive(const Lattice& lat, const NeighborhoodSpec& spec,
                                   std::size_t cap = kDefaultOracleCap) {
  const Shape& s = lat.shape();
  detail::require(spec.rank() == s.rank(), "model and lattice dimensionality differ");
  detail::require(s.size() <= cap, "lattice volume exceeds the oracle cap");
  ClosureResult r{lat, 0, 0};
  std::vector<std::size_t> turn_on;
  for (;;) {
    turn_on.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (r.final.test(i)) continue;
      int occupied = 0;
      for (const Coord& n : neighborhood(spec, s.coord(i), s)) occupied += r.final.test(n) ? 1 : 0;
      if (occupied >= spec.k()) turn_on.push_back(i);
    }
    if (turn_on.empty()) break;
    for (auto i : turn_on) r.final.set(i);
    r.newly_occupied += turn_on.size();
    ++r.generations;
  }
  return r;
}

inline bool is_internally_spanned(const Lattice& lat, const NeighborhoodSpec& spec) {
  return closure(lat, spec).final.is_full();
}

/// Nearest-neighbor path of occupied sites from the face axis = 0 to the face
/// axis = extent-1, on the configuration as given (no dynamics).
inline bool has_crossing(const Lattice& lat, int axis) {
  const Shape& s = lat.shape();
  detail::require(axis >= 0 && axis < s.rank(), "axis out of range");
  const int last = s.extent(axis) - 1;
  std::vector<std::uint8_t> seen(s.size(), 0);
  std::vector<std::size_t> stack;
  lat.for_each_set([&](std::size_t i) {
    if (s.coord(i)[axis] == 0) {
      seen[i] = 1;
      stack.push_back(i);
    }
  });
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const Coord c = s.coord(i);
    if (c[axis] == last) return true;
    for (int a = 0; a < s.rank(); ++a) {
      const std::size_t st = s.stride(a);
      if (c[a] > 0 && lat.test(i - st) && !seen[i - st]) {
        seen[i - st] = 1;
        stack.push_back(i - st);
      }
      if (c[a] + 1 < s.extent(a) && lat.test(i + st) && !seen[i + st]) {
        seen[i + st] = 1;
        stack.push_back(i + st);
      }
    }
  }
  return false;
}

inline bool has_crossing_every_axis(const Lattice& lat) {
  for (int a = 0; a < lat.shape().rank(); ++a) {
    if (!has_crossing(lat, a)) return false;
  }
  return true;
}

inline bool is_crossed(const Lattice& lat, const NeighborhoodSpec& spec, int axis) {
  detail::require(axis >= 0 && axis < lat.shape().rank(), "axis out of range");
  return has_crossing(closure(lat, spec).final, axis);
}

/// Weakly spanned sites: empty sites of `final` strictly between a site of
/// `added` (occupied by the dynamics) and an occupied site of its
/// neighborhood along the same axis.
inline Lattice weakly_spanned_sites(const Lattice& final, const std::vector<std::size_t>& added,
                                    const NeighborhoodSpec& spec) {
  const Shape& s = final.shape();
  Lattice weak(s);
  for (auto i : added) {
    const Coord c = s.coord(i);
    for (int a = 0; a < spec.rank(); ++a) {
      const std::size_t st = s.stride(a);
      const int up = std::min(spec.radius(a), s.extent(a) - 1 - c[a]);
      const int down = std::min(spec.radius(a), c[a]);
      for (int d = 2; d <= up; ++d) {
        if (!final.test(i + st * d)) continue;
        for (int m = 1; m < d; ++m) {
          if (!final.test(i + st * m)) weak.set(i + st * m);
        }
      }
      for (int d = 2; d <= down; ++d) {
        if (!final.test(i - st * d)) continue;
        for (int m = 1; m < d; ++m) {
          if (!final.test(i - st * m)) weak.set(i - st * m);
        }
      }
    }
  }
  return weak;
}

/// Closure followed by one pass of weakly spanned sites.
inline Lattice weak_enhance(const Lattice& lat, const NeighborhoodSpec& spec) {
  BootstrapEngine engine(lat.shape(), spec);
  Lattice final = lat;
  engine.run(final);
  Lattice weak = weakly_spanned_sites(final, engine.added(), spec);
  final |= weak;
  return final;
}

inline bool is_weakly_crossed(const Lattice& lat, const NeighborhoodSpec& spec) {
  return has_crossing_every_axis(weak_enhance(lat, spec));
}

/// Reduced model along `axis`: the 2D model of the remaining radii, in axis order.
inline NeighborhoodSpec reduce(const NeighborhoodSpec& spec, int axis) {
  detail::require(spec.rank() == 3, "reduction needs a three-dimensional model");
  detail::require(axis >= 0 && axis < 3, "axis out of range");
  std::vector<int> r;
  for (int a = 0; a < 3; ++a) {
    if (a != axis) r.push_back(spec.radius(a));
  }
  return NeighborhoodSpec(r);
}

struct SlabReduction {
  bool slab_filled_3d = false;
  bool spanned_reduced = false;
  bool agree() const noexcept { return slab_filled_3d == spanned_reduced; }
};

/// Places `slab` on the face of a fully occupied block of thickness r_axis and
/// compares the 3D dynamics on that layer with the reduced 2D model.
inline SlabReduction check_slab_reduction(const NeighborhoodSpec& spec, int axis, const Lattice& slab) {
  const NeighborhoodSpec reduced = reduce(spec, axis);
  detail::require(slab.shape().rank() == 2, "slab must be two-dimensional");
  const int thickness = spec.radius(axis);
  std::vector<int> other;
  for (int a = 0; a < 3; ++a) {
    if (a != axis) other.push_back(a);
  }
  std::vector<int> ext(3);
  ext[axis] = thickness + 1;
  ext[other[0]] = slab.shape().extent(0);
  ext[other[1]] = slab.shape().extent(1);
  const Shape box(ext);
  Lattice lat(box);
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Coord c = box.coord(i);
    if (c[axis] < thickness) {
      lat.set(i);
    } else if (slab.test(Coord{c[other[0]], c[other[1]], 0})) {
      lat.set(i);
    }
  }
  const Lattice final = closure(lat, spec).final;
  SlabReduction r;
  r.slab_filled_3d = final.is_full();
  r.spanned_reduced = is_internally_spanned(slab, reduced);
  return r;
}

}  // namespace anisoboot
