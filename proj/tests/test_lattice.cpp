#include "anisoboot/lattice.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace anisoboot {
namespace {

TEST(NeighborhoodSpec, ThresholdIsHalfTheNeighborhood) {
  const NeighborhoodSpec s{2, 3, 4};
  EXPECT_EQ(s.k(), 9);
  EXPECT_EQ(s.neighborhood_size(), 18);
  EXPECT_EQ(s.label(), "(2,3,4)");
}

TEST(NeighborhoodSpec, CanonicalOrderKeepsPermutation) {
  const NeighborhoodSpec s{2, 1, 1};
  EXPECT_EQ(s.canonical(), (std::vector<int>{1, 1, 2}));
  EXPECT_EQ(s.rank_axis(2), 0);
  EXPECT_EQ(s.easiest_axis(), 0);
  EXPECT_EQ(s.radius(0), 2);
  // Ties rank the later axis higher so the default easy axis is z.
  EXPECT_EQ((NeighborhoodSpec{1, 1, 1}).easiest_axis(), 2);
  EXPECT_EQ((NeighborhoodSpec{1, 2, 2}).easiest_axis(), 2);
}

TEST(NeighborhoodSpec, RejectsBadRadii) {
  EXPECT_THROW(NeighborhoodSpec({0, 1}), DomainError);
  EXPECT_THROW(NeighborhoodSpec(std::vector<int>{}), DomainError);
  EXPECT_THROW(NeighborhoodSpec({1, 1, 1, 1}), DomainError);
}

TEST(Neighborhood, VonNeumannCenter) {
  const auto n = neighborhood({1, 1}, {2, 2, 0}, Shape{5, 5});
  EXPECT_EQ(n.size(), 4u);
}

TEST(Neighborhood, Model234Interior) {
  const auto n = neighborhood({2, 3, 4}, {5, 5, 5}, Shape{11, 11, 11});
  EXPECT_EQ(n.size(), 18u);
}

TEST(Neighborhood, CornerIsClipped) {
  const auto n = neighborhood({1, 2}, {0, 0, 0}, Shape{5, 5});
  EXPECT_EQ(n.size(), 3u);
  const std::set<Coord> got(n.begin(), n.end());
  EXPECT_EQ(got, (std::set<Coord>{{1, 0, 0}, {0, 1, 0}, {0, 2, 0}}));
}

TEST(Neighborhood, OutOfBoxSiteIsDomainError) {
  EXPECT_THROW(neighborhood({1, 1}, {5, 0, 0}, Shape{5, 5}), DomainError);
  EXPECT_THROW(neighborhood({1, 1}, {0, -1, 0}, Shape{5, 5}), DomainError);
}

// Interior sites see exactly 2k sites, boundary sites strictly fewer, and
// membership is symmetric. Checked over every site of several boxes.
TEST(Neighborhood, SizeAndSymmetryProperty) {
  const std::vector<std::pair<NeighborhoodSpec, Shape>> cases = {
      {{1, 2}, Shape{7, 9}}, {{2, 3}, Shape{8, 8}}, {{1, 1, 2}, Shape{5, 6, 7}}, {{2, 3, 4}, Shape{9, 9, 9}}};
  for (const auto& [spec, shape] : cases) {
    for (std::size_t i = 0; i < shape.size(); ++i) {
      const Coord c = shape.coord(i);
      const auto n = neighborhood(spec, c, shape);
      bool interior = true;
      for (int a = 0; a < shape.rank(); ++a) {
        interior = interior && c[a] >= spec.radius(a) && c[a] + spec.radius(a) < shape.extent(a);
      }
      if (interior) {
        EXPECT_EQ(n.size(), static_cast<std::size_t>(2 * spec.k()));
      } else {
        EXPECT_LT(n.size(), static_cast<std::size_t>(2 * spec.k()));
      }
      EXPECT_EQ(std::count(n.begin(), n.end(), c), 0);
      EXPECT_EQ(std::set<Coord>(n.begin(), n.end()).size(), n.size());
      for (const Coord& m : n) {
        const auto back = neighborhood(spec, m, shape);
        EXPECT_EQ(std::count(back.begin(), back.end(), c), 1);
      }
      // The index-based walker agrees with the coordinate list.
      std::set<std::size_t> fast;
      for_each_neighbor(shape, spec, i, [&](std::size_t j) { fast.insert(j); });
      std::set<std::size_t> slow;
      for (const Coord& m : n) slow.insert(shape.index(m));
      EXPECT_EQ(fast, slow);
    }
  }
}

TEST(Shape, IndexRoundTrip) {
  const Shape s{4, 5, 6};
  EXPECT_EQ(s.size(), 120u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.index(s.coord(i)), i);
  EXPECT_THROW(Shape({0, 3}), DomainError);
}

TEST(RandomFill, Extremes) {
  EXPECT_TRUE(random_fill(Shape{10, 10}, 0.0, 1).empty());
  EXPECT_TRUE(random_fill(Shape{10, 10}, 1.0, 1).is_full());
  EXPECT_THROW(random_fill(Shape{3, 3}, 1.5, 1), DomainError);
  EXPECT_THROW(random_fill(Shape{3, 3}, -0.1, 1), DomainError);
}

TEST(RandomFill, FractionWithinBinomialBand) {
  const Lattice l = random_fill(Shape{64, 64}, 0.1, 2024);
  const double n = 64.0 * 64.0;
  const double sigma = std::sqrt(n * 0.1 * 0.9);
  EXPECT_NEAR(static_cast<double>(l.count()), n * 0.1, 4 * sigma);
}

TEST(RandomFill, DeterministicAndNestedInP) {
  const Shape s{17, 13, 3};
  EXPECT_EQ(random_fill(s, 0.3, 9), random_fill(s, 0.3, 9));
  EXPECT_NE(random_fill(s, 0.3, 9), random_fill(s, 0.3, 10));
  EXPECT_TRUE(random_fill(s, 0.2, 9).is_subset_of(random_fill(s, 0.35, 9)));
}

// Pinned words so a change to the RNG or the fill layout shows up here.
TEST(RandomFill, PinnedSnapshot) {
  const Lattice l = random_fill(Shape{8, 2}, 0.5, 1);
  const Lattice again = from_snapshot(to_snapshot(l));
  EXPECT_EQ(l, again);
  const CellStream cells(1, 0);
  for (std::size_t i = 0; i < l.size(); ++i) EXPECT_EQ(l.test(i), cells.word(i) < (1ull << 31));
}

TEST(Snapshot, FormatAndRoundTrip) {
  Lattice l{Shape{3, 2}};
  l.set(Coord{0, 0, 0});
  l.set(Coord{2, 1, 0});
  EXPECT_EQ(to_snapshot(l), "dims: 3 2\n100\n001\n");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Lattice r = random_fill(Shape{5, 4, 3}, 0.4, seed);
    EXPECT_EQ(from_snapshot(to_snapshot(r)), r);
  }
}

TEST(Snapshot, MalformedInputIsIoError) {
  EXPECT_THROW(from_snapshot(""), IoError);
  EXPECT_THROW(from_snapshot("size: 2 2\n0000\n"), IoError);
  EXPECT_THROW(from_snapshot("dims: 2 2\n000\n"), IoError);
  EXPECT_THROW(from_snapshot("dims: 2 2\n00000\n"), IoError);
  EXPECT_THROW(from_snapshot("dims: 2 2\n0x00\n"), IoError);
}

}  // namespace
}  // namespace anisoboot
