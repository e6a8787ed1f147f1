#include "anisoboot/enhancement.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace anisoboot {
namespace {

// Step-by-step enhancement written against coordinates: naive closures and
// weak sites taken as weak_enhance minus the closure.
Lattice enhance_oracle(const Lattice& lat, const NeighborhoodSpec& spec, std::size_t S) {
  const Shape& d = lat.shape();
  const int ax = spec.easiest_axis();
  const int s = spec.radius(ax) + 1;
  const int u = ax == 0 ? 1 : 0;
  const int v = ax == 2 ? 1 : 2;
  const Shape plane{d.extent(u), d.extent(v)};
  const NeighborhoodSpec red{spec.radius(u), spec.radius(v)};
  const int n = d.extent(ax) / s;

  auto column_hit = [&](const Lattice& src, int slice, int i, int j) {
    for (int t = slice * s; t < (slice + 1) * s; ++t) {
      Coord c{};
      c[ax] = t;
      c[u] = i;
      c[v] = j;
      if (src.test(c)) return true;
    }
    return false;
  };

  std::vector<Lattice> cols;
  for (int k = 0; k < n; ++k) {
    Lattice m(plane);
    for (int i = 0; i < plane.extent(0); ++i) {
      for (int j = 0; j < plane.extent(1); ++j) {
        if (column_hit(lat, k, i, j)) m.set(Coord{i, j, 0});
      }
    }
    m = closure_naive(m, red).final;
    // Flooding: flood-fill components through coordinate neighborhoods.
    std::vector<int> label(plane.size(), -1);
    std::size_t biggest = 0;
    for (std::size_t start = 0; start < plane.size(); ++start) {
      if (!m.test(start) || label[start] >= 0) continue;
      std::vector<std::size_t> todo{start};
      label[start] = 1;
      std::size_t size = 0;
      while (!todo.empty()) {
        const std::size_t x = todo.back();
        todo.pop_back();
        ++size;
        for (const Coord& nb : neighborhood(red, plane.coord(x), plane)) {
          const std::size_t y = plane.index(nb);
          if (m.test(y) && label[y] < 0) {
            label[y] = 1;
            todo.push_back(y);
          }
        }
      }
      biggest = std::max(biggest, size);
    }
    if (biggest >= S) m = Lattice::full(plane);
    cols.push_back(m);
  }

  Lattice weak = weak_enhance(lat, spec);
  const Lattice fin = closure_naive(lat, spec).final;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (weak.test(i) && !fin.test(i)) {
      const Coord c = d.coord(i);
      cols[c[ax] / s].set(Coord{c[u], c[v], 0});
    }
  }
  cols.front() = Lattice::full(plane);
  cols.back() = Lattice::full(plane);

  Lattice out(d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Coord c = d.coord(i);
    if (cols[c[ax] / s].test(Coord{c[u], c[v], 0})) out.set(i);
  }
  return out;
}

TEST(Decompose, Examples) {
  const auto d = decompose(Shape::cube(3, 12), {1, 1, 2}, 0.1);
  EXPECT_EQ(d.s, 3);
  EXPECT_EQ(d.slice_count, 4);
  EXPECT_EQ(d.axis, 2);
  EXPECT_NEAR(d.q, 0.271, 1e-12);

  const auto e = decompose(Shape::cube(3, 10), {1, 1, 1}, 0.3);
  EXPECT_EQ(e.s, 2);
  EXPECT_EQ(e.slice_count, 5);
  EXPECT_EQ(e.axis, 2);

  EXPECT_EQ(decompose(Shape{9, 4, 4}, {2, 1, 1}, 0.1).axis, 0);
  EXPECT_EQ(decompose(Shape{4, 9, 6}, {1, 2, 2}, 0.1).axis, 2);
  EXPECT_EQ(decompose(Shape{4, 9, 4}, {1, 2, 1}, 0.1).slice_count, 3);
}

TEST(Decompose, Errors) {
  EXPECT_THROW(decompose(Shape::cube(3, 10), {1, 1, 2}, 0.1), DomainError);
  EXPECT_THROW(decompose(Shape{12, 12}, {1, 2}, 0.1), DomainError);
  EXPECT_THROW(decompose(Shape::cube(3, 12), {1, 1, 2}, 1.5), DomainError);
}

TEST(Decompose, QBetweenPAndSp) {
  for (int c = 1; c <= 4; ++c) {
    const int s = c + 1;
    for (double p : {1e-6, 0.001, 0.05, 0.2, 0.5, 0.9}) {
      const auto d = decompose(Shape{3, 3, 3 * s}, {1, 1, c}, p);
      EXPECT_NEAR(d.q, 1 - std::pow(1 - p, s), 1e-14);
      EXPECT_GE(d.q, p);
      EXPECT_LE(d.q, s * p + 1e-15);
      EXPECT_EQ(d.slice_count * d.s, 3 * s);
    }
  }
}

TEST(Params, Defaults) {
  // p = 0.1, (a,b) = (1,1): p^{-3/4} = 5.62, so y_c = 5; p^{-1} ln 10 = 23.03 is capped at 4.
  const auto e = EnhanceParams::defaults({1, 1, 2}, 0.1);
  EXPECT_EQ(e.y_c, 5);
  EXPECT_EQ(e.x_c, 4);
  EXPECT_EQ(e.S, 20u);
  EXPECT_NEAR(e.d_S, std::pow(0.1, -0.75), 1e-12);

  // (1,2) at p = 0.01: y_c = ceil(10^{3.5}) - 1 = 3162, x_c = ceil(100 ln 100) = 461.
  const auto f = EnhanceParams::defaults({1, 2}, 0.01);
  EXPECT_EQ(f.y_c, 3162);
  EXPECT_EQ(f.x_c, 461);
  EXPECT_EQ(f.S, 461u * 3162u);
}

TEST(Params, Validation) {
  EXPECT_THROW(EnhanceParams::make(10, 5, 5, 0.25, 0.1, 1), DomainError);
  EXPECT_THROW(EnhanceParams::make(10, 2, 6, 0.25, 0.1, 1), DomainError);
  EXPECT_NO_THROW(EnhanceParams::make(10, 2, 5, 0.25, 0.1, 1));
  EXPECT_THROW(EnhanceParams::defaults({1, 1, 2}, 0.6), DomainError);
}

const EnhanceParams kParams = EnhanceParams::make(25, 4, 5, 0.25, 0.1, 1);

TEST(Enhance, FullAndEmpty) {
  const Shape cube = Shape::cube(3, 12);
  EXPECT_TRUE(enhance(Lattice::full(cube), {1, 1, 2}, kParams).is_full());

  const Lattice out = enhance(Lattice(cube), {1, 1, 2}, kParams);
  for (std::size_t i = 0; i < cube.size(); ++i) {
    const int z = cube.coord(i)[2];
    EXPECT_EQ(out.test(i), z < 3 || z >= 9) << i;
  }
  EXPECT_FALSE(is_e_crossed(Lattice(cube), {1, 1, 2}, kParams));
  EXPECT_TRUE(is_e_crossed(Lattice::full(cube), {1, 1, 2}, kParams));
}

TEST(Enhance, SingleSiteFillsItsMinicolumn) {
  Lattice l(Shape::cube(3, 12));
  l.set(Coord{5, 7, 4});
  const Lattice out = enhance(l, {1, 1, 2}, kParams);
  for (int z = 3; z < 6; ++z) EXPECT_TRUE(out.test(Coord{5, 7, z}));
  EXPECT_FALSE(out.test(Coord{5, 7, 6}));
  EXPECT_EQ(out.count(), 2u * 3 * 144 + 3);
}

TEST(Enhance, MatchesOracle) {
  struct Case {
    NeighborhoodSpec spec;
    Shape shape;
    std::size_t S;
  };
  const std::vector<Case> cases{
      {{1, 1, 2}, Shape::cube(3, 12), 25},
      {{1, 1, 1}, Shape{8, 7, 10}, 6},
      {{2, 1, 1}, Shape{9, 6, 5}, 4},
      {{1, 2, 1}, Shape{6, 9, 7}, 8},
  };
  for (const auto& c : cases) {
    EnhanceParams prm = kParams;
    prm.S = c.S;
    for (double p : {0.05, 0.15, 0.25}) {
      for (int t = 0; t < 40; ++t) {
        const Lattice lat = random_fill(c.shape, p, 77, t);
        ASSERT_EQ(enhance(lat, c.spec, prm), enhance_oracle(lat, c.spec, c.S))
            << c.spec.label() << " p=" << p << " trial " << t;
      }
    }
  }
}

TEST(Enhance, StagesMonotoneAndColumnar) {
  const NeighborhoodSpec spec{1, 1, 2};
  for (double p : {0.1, 0.2}) {
    for (int t = 0; t < 30; ++t) {
      const Lattice lat = random_fill(Shape::cube(3, 12), p, 5, t);
      const auto st = enhance_stages(lat, spec, kParams);
      EXPECT_TRUE(lat.is_subset_of(st.after[0]));
      for (int k = 1; k < 5; ++k) EXPECT_TRUE(st.after[k - 1].is_subset_of(st.after[k]));
      for (const auto& stage : st.after) EXPECT_EQ(minicolumn_hull(stage, spec), stage);
    }
  }
}

TEST(Enhance, DominatesWeakEnhancement) {
  const NeighborhoodSpec spec{1, 1, 2};
  const Lattice lat = random_fill(Shape::cube(3, 12), 0.2, 20261014);
  const Lattice weak = weak_enhance(lat, spec);
  const Lattice enh = enhance(lat, spec, kParams);
  EXPECT_TRUE(minicolumn_hull(weak, spec).is_subset_of(enh));

  int crossed = 0;
  for (int t = 0; t < 60; ++t) {
    const Lattice l = random_fill(Shape::cube(3, 12), t % 2 ? 0.2 : 0.1, 9, t);
    const Lattice w = weak_enhance(l, spec);
    ASSERT_TRUE(minicolumn_hull(w, spec).is_subset_of(enhance(l, spec, kParams))) << t;
    if (has_crossing(w, 2)) {
      ++crossed;
      EXPECT_TRUE(is_e_crossed(l, spec, kParams)) << t;
    }
  }
  EXPECT_GT(crossed, 0);
}

TEST(Chi, ZeroDensity) {
  const auto st = measure_chi({1, 1}, 0.0, kParams, 100, 1);
  EXPECT_EQ(st.chi, 0.0);
  EXPECT_EQ(st.ci, 0.0);
  EXPECT_EQ(st.violations, 0u);
}

TEST(Chi, CapsOnlyTruncate) {
  for (double p : {0.05, 0.1}) {
    const auto prm = EnhanceParams::make(10, 3, 4, 0.25, p, 1);
    const auto st = measure_chi({1, 1}, p, prm, 3000, 3);
    EXPECT_GE(st.chi_uncapped, st.chi);
    EXPECT_GE(st.chi, 0.0);
    EXPECT_EQ(st.trials, 3000u);
  }
}

// The statistic recomputed from scratch: windows of half-width 8, 16, ...
// (capped) around the origin, naive closure, coordinate-based component; the
// first window whose component stays off the edge decides.
double chi_oracle(const NeighborhoodSpec& spec, double p, long xc, long yc, int trials, std::uint64_t seed) {
  const std::uint64_t cut = occupancy_cutoff(p);
  const long ref_w = 2 * xc + 1;
  double sum = 0;
  for (int t = 0; t < trials; ++t) {
    const CellStream cells(seed, t, Stream::stepping_stone);
    long hx = std::min(xc, 8L), hy = std::min(yc, 8L);
    for (;;) {
      const int W = 2 * hx + 1, H = 2 * hy + 1;
      Lattice lat(Shape{W, H});
      for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
          if (cells.word((x - hx + xc) + ref_w * (y - hy + yc)) < cut) lat.set(Coord{x, y, 0});
        }
      }
      const Lattice fin = closure_naive(lat, spec).final;
      Lattice enh = fin;
      for (std::size_t i = 0; i < fin.size(); ++i) {
        if (!fin.test(i) || lat.test(i)) continue;
        const Coord u = lat.shape().coord(i);
        for (const Coord& v : neighborhood(spec, u, lat.shape())) {
          if (!fin.test(v)) continue;
          for (int ax = 0; ax < 2; ++ax) {
            for (int m = std::min(u[ax], v[ax]) + 1; m < std::max(u[ax], v[ax]); ++m) {
              Coord w = u;
              w[ax] = m;
              enh.set(w);
            }
          }
        }
      }
      const Coord o{static_cast<int>(hx), static_cast<int>(hy), 0};
      int size = 0;
      int lo[2] = {o[0], o[1]}, hi[2] = {o[0], o[1]};
      if (enh.test(o)) {
        std::vector<char> seen(W * H, 0);
        std::vector<Coord> todo{o};
        seen[lat.shape().index(o)] = 1;
        while (!todo.empty()) {
          const Coord c = todo.back();
          todo.pop_back();
          ++size;
          for (int ax = 0; ax < 2; ++ax) {
            lo[ax] = std::min(lo[ax], c[ax]);
            hi[ax] = std::max(hi[ax], c[ax]);
          }
          for (const Coord& nb : neighborhood(spec, c, lat.shape())) {
            const auto j = lat.shape().index(nb);
            if (enh.test(j) && !seen[j]) {
              seen[j] = 1;
              todo.push_back(nb);
            }
          }
        }
      }
      const bool edge = size > 0 && (lo[0] == 0 || lo[1] == 0 || hi[0] == W - 1 || hi[1] == H - 1);
      if (edge && (hx < xc || hy < yc)) {
        hx = std::min(xc, 2 * hx);
        hy = std::min(yc, 2 * hy);
        continue;
      }
      if (hi[0] - lo[0] + 1 < xc && hi[1] - lo[1] + 1 < yc) sum += size;
      break;
    }
  }
  return sum / trials;
}

TEST(Chi, MatchesOracle) {
  struct Case {
    NeighborhoodSpec spec;
    double p;
    long xc, yc;
  };
  for (const auto& c : {Case{{1, 1}, 0.03, 12, 13}, Case{{1, 1}, 0.01, 20, 30}, Case{{1, 2}, 0.02, 30, 200}}) {
    const auto prm = EnhanceParams::make(50, c.xc, c.yc, 0.25, c.p, c.spec.sorted_radius(1));
    const auto st = measure_chi(c.spec, c.p, prm, 1500, 11);
    EXPECT_NEAR(st.chi, chi_oracle(c.spec, c.p, c.xc, c.yc, 1500, 11), 1e-12) << c.spec.label();
  }
}

TEST(Chi, SmallAtLowDensity) {
  const double p = 0.02;
  const auto prm = EnhanceParams::defaults({1, 1}, p);
  const auto st = measure_chi({1, 1}, p, prm, 5000, 8);
  EXPECT_LT(st.chi + st.ci, std::sqrt(p));
  EXPECT_GT(st.chi, 0.0);
}

}  // namespace
}  // namespace anisoboot
