#pragma once

// Randomised self-check suites shared by the command line tool and the
// acceptance runner. Every suite is a deterministic function of its seed.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "anisoboot/bounds.hpp"
#include "anisoboot/dynamics.hpp"
#include "anisoboot/enhancement.hpp"
#include "anisoboot/error.hpp"
#include "anisoboot/lattice.hpp"
#include "anisoboot/regions.hpp"
#include "anisoboot/rng.hpp"

namespace anisoboot {

struct SuiteResult {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t failures = 0;
  std::string note;
  bool ok() const noexcept { return failures == 0; }
};

namespace detail {

inline int draw_int(CounterEngine& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint32_t>(hi - lo + 1));
}

inline Shape random_dims(CounterEngine& rng, int rank) {
  std::vector<int> ext(rank);
  for (auto& e : ext) e = draw_int(rng, 1, rank == 3 ? 6 : 12);
  return Shape(ext);
}

inline const std::vector<NeighborhoodSpec>& suite_models() {
  static const std::vector<NeighborhoodSpec> m{{1, 1}, {1, 2}, {2, 3}, {1, 1, 1}, {1, 1, 2}, {2, 3, 4}};
  return m;
}

}  // namespace detail

/// closure == closure_naive on `cases` random lattices per model.
inline SuiteResult verify_oracle(std::uint64_t cases, std::uint64_t seed) {
  SuiteResult r{"oracle", 0, 0, ""};
  const double ps[3] = {0.05, 0.15, 0.3};
  for (std::size_t m = 0; m < detail::suite_models().size(); ++m) {
    const NeighborhoodSpec& spec = detail::suite_models()[m];
    for (std::uint64_t i = 0; i < cases; ++i) {
      const std::uint64_t trial = m * cases + i;
      CounterEngine rng(seed, trial, Stream::auxiliary);
      const Shape dims = detail::random_dims(rng, spec.rank());
      const Lattice lat = random_fill(dims, ps[i % 3], seed, trial);
      ++r.cases;
      if (!(closure(lat, spec).final == closure_naive(lat, spec).final)) ++r.failures;
    }
  }
  return r;
}

/// Coupled pairs p < p': the spanning indicator never decreases.
inline SuiteResult verify_monotone(std::uint64_t pairs, std::uint64_t seed) {
  SuiteResult r{"monotone", 0, 0, ""};
  const auto& models = detail::suite_models();
  for (std::uint64_t i = 0; i < pairs; ++i) {
    CounterEngine rng(seed, i, Stream::auxiliary);
    const NeighborhoodSpec& spec = models[i % models.size()];
    const Shape dims = detail::random_dims(rng, spec.rank());
    double p = rng.uniform(), q = rng.uniform();
    if (p > q) std::swap(p, q);
    const Lattice lo = random_fill(dims, p, seed, i);
    const Lattice hi = random_fill(dims, q, seed, i);
    ++r.cases;
    const Lattice flo = closure(lo, spec).final;
    const Lattice fhi = closure(hi, spec).final;
    if (!lo.is_subset_of(hi) || !flo.is_subset_of(fhi) || (flo.is_full() && !fhi.is_full())) ++r.failures;
  }
  return r;
}

/// check_slab_reduction for (1,1,2) along each axis on random 12x12 slabs.
inline SuiteResult verify_slab(std::uint64_t cases_per_axis, std::uint64_t seed) {
  SuiteResult r{"slab", 0, 0, ""};
  const NeighborhoodSpec spec{1, 1, 2};
  for (int axis = 0; axis < 3; ++axis) {
    for (std::uint64_t i = 0; i < cases_per_axis; ++i) {
      const std::uint64_t trial = axis * cases_per_axis + i;
      CounterEngine rng(seed, trial, Stream::auxiliary);
      const Lattice slab = random_fill(Shape{12, 12}, 0.02 + 0.4 * rng.uniform(), seed, trial);
      ++r.cases;
      if (!check_slab_reduction(spec, axis, slab).agree()) ++r.failures;
    }
  }
  return r;
}

struct Lemma1Result {
  SuiteResult suite{"lemma1", 0, 0, ""};
  std::uint64_t lattices = 0;
  std::uint64_t lemma_range_checks = 0;  // k inside 1 <= k <= (l - lambda) / kappa
  std::uint64_t extended_checks = 0;     // k inside 1 <= k <= l
  std::uint64_t trace_violations = 0;
  std::uint64_t block_failures = 0;
};

/// Internally spanned lattices of side `side` per model; every k in the
/// lemma's range and in [1, side] must yield a weakly crossed block with
/// longest side in [k, kappa k + lambda].
inline Lemma1Result verify_lemma1(std::uint64_t lattices_per_model, std::uint64_t seed, int side = 10) {
  Lemma1Result out;
  struct Model {
    NeighborhoodSpec spec;
    double p;
  };
  const Model models[2] = {{{1, 1, 1}, 0.2}, {{1, 1, 2}, 0.35}};
  for (int m = 0; m < 2; ++m) {
    const NeighborhoodSpec& spec = models[m].spec;
    const auto [kappa, lambda] = kappa_lambda(spec);
    const int kmax_lemma = side >= lambda ? (side - lambda) / kappa : 0;
    std::uint64_t trial = static_cast<std::uint64_t>(m) << 40;
    for (std::uint64_t n = 0; n < lattices_per_model; ++n) {
      Lattice lat;
      do {
        lat = random_fill(Shape::cube(3, side), models[m].p, seed, trial++);
      } while (!is_internally_spanned(lat, spec));
      ++out.lattices;
      ++out.suite.cases;
      const RegionTrace tr = decompose_regions(lat, spec);
      bool bad = false;
      if (!tr.invariants_hold()) {
        ++out.trace_violations;
        bad = true;
      }
      for (int k = 1; k <= side; ++k) {
        const bool in_lemma = k <= kmax_lemma;
        const auto w = find_weakly_crossed_block(tr, lat, spec, k, in_lemma ? KRange::lemma : KRange::extended);
        (in_lemma ? out.lemma_range_checks : out.extended_checks) += 1;
        if (!w || w->longest_side < k || w->longest_side > kappa * k + lambda || !w->weakly_crossed) {
          ++out.block_failures;
          bad = true;
        }
      }
      out.suite.failures += bad;
    }
  }
  out.suite.note = "lemma-range checks " + std::to_string(out.lemma_range_checks) + ", extended checks " +
                   std::to_string(out.extended_checks);
  return out;
}

/// Weakly enhanced sites lie in occupied minicolumns of the enhancement, and
/// weak crossing along the enhanced axis implies e-crossing.
inline SuiteResult verify_domination(std::uint64_t cases_per_p, std::uint64_t seed, int side = 12) {
  SuiteResult r{"domination", 0, 0, ""};
  const NeighborhoodSpec spec{1, 1, 2};
  const double ps[2] = {0.1, 0.2};
  std::uint64_t crossed = 0;
  for (int j = 0; j < 2; ++j) {
    const EnhanceParams params = EnhanceParams::defaults(spec, ps[j]);
    for (std::uint64_t i = 0; i < cases_per_p; ++i) {
      const Lattice lat = random_fill(Shape::cube(3, side), ps[j], seed, j * cases_per_p + i);
      const Lattice weak = weak_enhance(lat, spec);
      const Lattice enh = enhance(lat, spec, params);
      ++r.cases;
      bool bad = !minicolumn_hull(weak, spec).is_subset_of(enh);
      if (has_crossing(weak, spec.easiest_axis())) {
        ++crossed;
        bad = bad || !has_crossing(enh, spec.easiest_axis());
      }
      r.failures += bad;
    }
  }
  r.note = "weakly crossed instances " + std::to_string(crossed);
  return r;
}

struct BoundCell {
  NeighborhoodSpec spec;
  int x = 0, y = 0;
  double p = 0;
  std::uint64_t trials = 0;
  std::uint64_t spanned = 0, weakly_spanned = 0;
  double span_bound = 0, weak_bound = 0;

  static double sigma(std::uint64_t hits, std::uint64_t n) {
    const double f = static_cast<double>(hits) / static_cast<double>(n);
    return std::sqrt(f * (1 - f) / static_cast<double>(n));
  }
  double span_freq() const { return static_cast<double>(spanned) / static_cast<double>(trials); }
  double weak_freq() const { return static_cast<double>(weakly_spanned) / static_cast<double>(trials); }
  bool span_ok() const { return span_freq() <= span_bound + 3 * sigma(spanned, trials); }
  bool weak_ok() const { return weak_freq() <= weak_bound + 3 * sigma(weakly_spanned, trials); }
};

/// Spanning and weak-spanning frequencies of x-by-y rectangles against
/// rect_span_upper and rect_weak_span_upper (p_tilde = p_hat = p), x, y in
/// [2, max_side]. The rectangles of one trial are corners of one fill, so all
/// grid cells and all p share their random words.
inline std::vector<BoundCell> measure_bound_domination(const NeighborhoodSpec& spec, const std::vector<double>& ps,
                                                       std::uint64_t trials, std::uint64_t seed,
                                                       int max_side = 8) {
  detail::require(spec.rank() == 2, "rectangle bounds need a two-dimensional model");
  const int a = spec.radius(0), b = spec.radius(1);
  const int n = max_side - 1;
  std::vector<BoundCell> cells;
  std::vector<BootstrapEngine> engines;
  std::vector<Lattice> lats;
  for (double p : ps) {
    for (int x = 2; x <= max_side; ++x) {
      for (int y = 2; y <= max_side; ++y) {
        BoundCell c;
        c.spec = spec;
        c.x = x;
        c.y = y;
        c.p = p;
        c.trials = trials;
        c.span_bound = rect_span_upper(x, y, a, b, p, p).value;
        c.weak_bound = rect_weak_span_upper(x, y, a, b, p, p).value;
        cells.push_back(c);
      }
    }
  }
  for (int x = 2; x <= max_side; ++x) {
    for (int y = 2; y <= max_side; ++y) {
      engines.emplace_back(Shape{x, y}, spec);
      lats.emplace_back(Shape{x, y});
    }
  }
  std::vector<std::uint64_t> cuts;
  for (double p : ps) cuts.push_back(occupancy_cutoff(p));
  std::vector<std::uint32_t> words(static_cast<std::size_t>(max_side * max_side));
  for (std::uint64_t t = 0; t < trials; ++t) {
    const CellStream cs(seed, t, Stream::auxiliary);
    for (std::size_t i = 0; i < words.size(); ++i) words[i] = cs.word(i);
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
      for (int x = 2; x <= max_side; ++x) {
        for (int y = 2; y <= max_side; ++y) {
          const std::size_t g = static_cast<std::size_t>((x - 2) * n + (y - 2));
          Lattice& lat = lats[g];
          lat.clear();
          for (int j = 0; j < y; ++j) {
            for (int i = 0; i < x; ++i) {
              if (words[static_cast<std::size_t>(i + max_side * j)] < cuts[pi]) lat.set(static_cast<std::size_t>(i + x * j));
            }
          }
          BootstrapEngine& eng = engines[g];
          eng.run(lat);
          BoundCell& c = cells[pi * n * n + g];
          if (lat.is_full()) {
            ++c.spanned;
            ++c.weakly_spanned;
          } else {
            Lattice w = weakly_spanned_sites(lat, eng.added(), spec);
            w |= lat;
            if (w.is_full()) ++c.weakly_spanned;
          }
        }
      }
    }
  }
  return cells;
}

}  // namespace anisoboot
