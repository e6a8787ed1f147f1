#pragma once

// Finite boxes with free boundaries, bit-packed occupancy and axis-aligned
// anisotropic neighborhoods.

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "anisoboot/error.hpp"
#include "anisoboot/rng.hpp"

namespace anisoboot {

inline constexpr int kMaxRank = 3;

/// Site coordinate; axes beyond the lattice rank are zero.
using Coord = std::array<int, kMaxRank>;

/// Extents of a box of rank 1..3. Cell index is x + X*(y + Y*z).
class Shape {
 public:
  Shape() = default;

  Shape(std::initializer_list<int> extents) : Shape(std::vector<int>(extents)) {}

  explicit Shape(const std::vector<int>& extents) {
    detail::require(!extents.empty() && extents.size() <= kMaxRank,
                    "lattice rank must be 1, 2 or 3");
    rank_ = static_cast<int>(extents.size());
    for (int a = 0; a < rank_; ++a) {
      detail::require(extents[a] >= 1, "lattice extents must be >= 1");
      ext_[a] = extents[a];
    }
    stride_ = {1, ext_[0], ext_[0] * ext_[1]};
    size_ = static_cast<std::size_t>(ext_[0]) * ext_[1] * ext_[2];
  }

  /// Cube of side `side` in `rank` dimensions.
  static Shape cube(int rank, int side) { return Shape(std::vector<int>(rank, side)); }

  int rank() const noexcept { return rank_; }
  int extent(int axis) const noexcept { return ext_[axis]; }
  std::size_t stride(int axis) const noexcept { return static_cast<std::size_t>(stride_[axis]); }
  std::size_t size() const noexcept { return size_; }

  std::vector<int> extents() const { return {ext_.begin(), ext_.begin() + rank_}; }

  int longest_side() const noexcept { return *std::max_element(ext_.begin(), ext_.begin() + rank_); }

  bool contains(const Coord& c) const noexcept {
    for (int a = 0; a < kMaxRank; ++a) {
      if (c[a] < 0 || c[a] >= ext_[a]) return false;
    }
    return true;
  }

  std::size_t index(const Coord& c) const noexcept {
    return static_cast<std::size_t>(c[0]) + static_cast<std::size_t>(stride_[1]) * c[1] +
           static_cast<std::size_t>(stride_[2]) * c[2];
  }

  Coord coord(std::size_t i) const noexcept {
    Coord c{};
    c[0] = static_cast<int>(i % ext_[0]);
    i /= ext_[0];
    c[1] = static_cast<int>(i % ext_[1]);
    c[2] = static_cast<int>(i / ext_[1]);
    return c;
  }

  friend bool operator==(const Shape& a, const Shape& b) noexcept {
    return a.rank_ == b.rank_ && a.ext_ == b.ext_;
  }

  std::string to_string() const {
    std::string s;
    for (int a = 0; a < rank_; ++a) {
      if (a) s += 'x';
      s += std::to_string(ext_[a]);
    }
    return s;
  }

 private:
  int rank_ = 1;
  std::array<int, kMaxRank> ext_{1, 1, 1};
  std::array<int, kMaxRank> stride_{1, 1, 1};
  std::size_t size_ = 1;
};

/// The (a,b[,c]) model: per-axis radii, threshold k = sum of radii.
///
/// Radii are stored in lattice axis order (x, y, z) exactly as given. The
/// canonical ascending order a <= b <= c is available through rank_axis(),
/// so a (1,2,1) model is the canonical (1,1,2) model with its easy axis on y.
class NeighborhoodSpec {
 public:
  NeighborhoodSpec() = default;

  NeighborhoodSpec(std::initializer_list<int> radii) : NeighborhoodSpec(std::vector<int>(radii)) {}

  explicit NeighborhoodSpec(const std::vector<int>& radii) {
    detail::require(!radii.empty() && radii.size() <= kMaxRank,
                    "a model needs 1, 2 or 3 radii");
    rank_ = static_cast<int>(radii.size());
    for (int a = 0; a < rank_; ++a) {
      detail::require(radii[a] >= 1, "model radii must be >= 1");
      radius_[a] = radii[a];
    }
    std::iota(order_.begin(), order_.begin() + rank_, 0);
    // Stable: among equal radii the later axis ranks higher, so ties put the
    // easiest direction on z.
    std::stable_sort(order_.begin(), order_.begin() + rank_,
                     [&](int l, int r) { return radius_[l] < radius_[r]; });
  }

  int rank() const noexcept { return rank_; }
  int radius(int axis) const noexcept { return axis < rank_ ? radius_[axis] : 0; }
  int k() const noexcept { return std::accumulate(radius_.begin(), radius_.begin() + rank_, 0); }
  int neighborhood_size() const noexcept { return 2 * k(); }
  std::vector<int> radii() const { return {radius_.begin(), radius_.begin() + rank_}; }

  /// Lattice axis holding the r-th smallest radius (0 = a, 1 = b, 2 = c).
  int rank_axis(int r) const noexcept { return order_[r]; }

  /// r-th smallest radius.
  int sorted_radius(int r) const noexcept { return radius_[order_[r]]; }

  std::vector<int> canonical() const {
    std::vector<int> out;
    for (int r = 0; r < rank_; ++r) out.push_back(sorted_radius(r));
    return out;
  }

  /// Axis with the largest radius (ties: highest axis). Deleting it leaves the
  /// reduced model with the smallest threshold scale.
  int easiest_axis() const noexcept { return order_[rank_ - 1]; }

  std::string label() const {
    std::string s = "(";
    for (int a = 0; a < rank_; ++a) {
      if (a) s += ',';
      s += std::to_string(radius_[a]);
    }
    return s + ")";
  }

  friend bool operator==(const NeighborhoodSpec& l, const NeighborhoodSpec& r) noexcept {
    return l.rank_ == r.rank_ && l.radius_ == r.radius_;
  }

 private:
  int rank_ = 1;
  std::array<int, kMaxRank> radius_{1, 0, 0};
  std::array<int, kMaxRank> order_{0, 1, 2};
};

/// Calls f(neighbor_index) for every in-box site at axis offset 1..r_axis.
template <class F>
inline void for_each_neighbor(const Shape& shape, const NeighborhoodSpec& spec, std::size_t site,
                              F&& f) {
  const Coord c = shape.coord(site);
  for (int a = 0; a < spec.rank(); ++a) {
    const int r = spec.radius(a);
    const std::size_t st = shape.stride(a);
    const int lo = std::min(r, c[a]);
    const int hi = std::min(r, shape.extent(a) - 1 - c[a]);
    for (int d = 1; d <= lo; ++d) f(site - st * d);
    for (int d = 1; d <= hi; ++d) f(site + st * d);
  }
}

/// Neighborhood of `site` clipped to the box.
inline std::vector<Coord> neighborhood(const NeighborhoodSpec& spec, const Coord& site,
                                       const Shape& dims) {
  detail::require(spec.rank() == dims.rank(), "model and lattice dimensionality differ");
  detail::require(dims.contains(site), "site outside the lattice");
  std::vector<Coord> out;
  out.reserve(spec.neighborhood_size());
  for (int a = 0; a < spec.rank(); ++a) {
    for (int d = -spec.radius(a); d <= spec.radius(a); ++d) {
      if (d == 0) continue;
      Coord n = site;
      n[a] += d;
      if (dims.contains(n)) out.push_back(n);
    }
  }
  return out;
}

/// Bit-packed occupancy over a Shape. Sites outside the box never exist.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(Shape shape) : shape_(shape), words_((shape.size() + 63) / 64, 0) {}

  static Lattice full(Shape shape) {
    Lattice l(shape);
    for (auto& w : l.words_) w = ~std::uint64_t{0};
    l.trim();
    return l;
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return shape_.size(); }

  bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) noexcept { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void assign(std::size_t i, bool v) noexcept { v ? set(i) : reset(i); }

  bool test(const Coord& c) const noexcept { return test(shape_.index(c)); }
  void set(const Coord& c) noexcept { set(shape_.index(c)); }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool empty() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
  }
  bool is_full() const noexcept { return count() == size(); }

  void clear() noexcept { std::fill(words_.begin(), words_.end(), 0); }

  /// f(index) for every occupied site in increasing index order.
  template <class F>
  void for_each_set(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int b = std::countr_zero(bits);
        f(w * 64 + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
  }

  bool is_subset_of(const Lattice& other) const noexcept {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if (words_[w] & ~other.words_[w]) return false;
    }
    return true;
  }

  Lattice& operator|=(const Lattice& o) noexcept {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }

  friend bool operator==(const Lattice& a, const Lattice& b) noexcept {
    return a.shape_ == b.shape_ && a.words_ == b.words_;
  }

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

 private:
  void trim() noexcept {
    const std::size_t tail = shape_.size() & 63;
    if (tail && !words_.empty()) words_.back() &= (std::uint64_t{1} << tail) - 1;
  }

  Shape shape_;
  std::vector<std::uint64_t> words_ = std::vector<std::uint64_t>(1, 0);
};

/// Fills cells in place: cell i occupied iff the i-th fill word is below the
/// cutoff for p. Same (seed, trial) at p <= p' gives nested lattices.
inline void random_fill_into(Lattice& lat, double p, std::uint64_t seed, std::uint64_t trial = 0) {
  lat.clear();
  const std::uint64_t cut = occupancy_cutoff(p);
  if (cut == 0) return;
  const CellStream cells(seed, trial, Stream::fill);
  const std::size_t n = lat.size();
  for (std::size_t b = 0; b * 4 < n; ++b) {
    const auto words = cells.block(b);
    for (std::size_t j = 0; j < 4 && b * 4 + j < n; ++j) {
      if (words[j] < cut) lat.set(b * 4 + j);
    }
  }
}

inline Lattice random_fill(const Shape& dims, double p, std::uint64_t seed, std::uint64_t trial = 0) {
  detail::require(p >= 0.0 && p <= 1.0, "occupation probability must lie in [0,1]");
  Lattice lat(dims);
  random_fill_into(lat, p, seed, trial);
  return lat;
}

// Snapshot text format:
//   dims: X [Y [Z]]
//   then one line of X '0'/'1' characters per (y, z) row, z outermost.

inline void write_snapshot(std::ostream& os, const Lattice& lat) {
  const Shape& s = lat.shape();
  os << "dims:";
  for (int a = 0; a < s.rank(); ++a) os << ' ' << s.extent(a);
  os << '\n';
  std::string row(static_cast<std::size_t>(s.extent(0)), '0');
  for (std::size_t start = 0; start < s.size(); start += s.extent(0)) {
    for (int x = 0; x < s.extent(0); ++x) row[x] = lat.test(start + x) ? '1' : '0';
    os << row << '\n';
  }
}

inline std::string to_snapshot(const Lattice& lat) {
  std::ostringstream os;
  write_snapshot(os, lat);
  return os.str();
}

inline Lattice read_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw IoError("snapshot: missing header line");
  std::istringstream hs(header);
  std::string tag;
  hs >> tag;
  if (tag != "dims:") throw IoError("snapshot: header must start with 'dims:'");
  std::vector<int> dims;
  for (int v; hs >> v;) dims.push_back(v);
  if (dims.empty() || dims.size() > kMaxRank) throw IoError("snapshot: bad dims header");
  Lattice lat{Shape(dims)};
  std::size_t i = 0;
  for (char ch; is.get(ch);) {
    if (ch == '0' || ch == '1') {
      if (i >= lat.size()) throw IoError("snapshot: more cells than dims allow");
      if (ch == '1') lat.set(i);
      ++i;
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      throw IoError(std::string("snapshot: unexpected character '") + ch + "'");
    }
  }
  if (i != lat.size()) throw IoError("snapshot: fewer cells than dims require");
  return lat;
}

inline Lattice from_snapshot(const std::string& text) {
  std::istringstream is(text);
  return read_snapshot(is);
}

}  // namespace anisoboot
