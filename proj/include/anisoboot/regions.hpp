#pragma once

// Region decomposition of internally spanned configurations: regions are
// merged in a fixed order until one covers the box, and every intermediate
// region yields a weakly crossed block.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <iterator>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "anisoboot/dynamics.hpp"
#include "anisoboot/error.hpp"
#include "anisoboot/lattice.hpp"

namespace anisoboot {

/// (kappa, lambda) = (a+b+c, (2c+1)(a+b+c)) for a 3D model.
inline std::pair<int, int> kappa_lambda(const NeighborhoodSpec& spec) {
  detail::require(spec.rank() == 3, "kappa/lambda are defined for three-dimensional models");
  const int kappa = spec.k();
  const int c = spec.sorted_radius(2);
  return {kappa, (2 * c + 1) * kappa};
}

struct Block {
  Coord lo{0, 0, 0};
  Coord hi{0, 0, 0};  // inclusive

  int side(int axis) const noexcept { return hi[axis] - lo[axis] + 1; }
  int longest_side(int rank) const noexcept {
    int m = 0;
    for (int a = 0; a < rank; ++a) m = std::max(m, side(a));
    return m;
  }
};

/// Occupied sites (initial seeds plus sites added by the iteration) together
/// with their covering block.
struct Region {
  std::vector<std::size_t> sites;  // sorted
  std::vector<std::size_t> seeds;  // sorted, subset of sites
  Block bbox;
  int diameter = 1;
  std::size_t min_site() const noexcept { return sites.front(); }
};

namespace detail {

inline Block bounding_block(const Shape& s, const std::vector<std::size_t>& sites) {
  Block b;
  b.lo = b.hi = s.coord(sites.front());
  for (auto i : sites) {
    const Coord c = s.coord(i);
    for (int a = 0; a < s.rank(); ++a) {
      b.lo[a] = std::min(b.lo[a], c[a]);
      b.hi[a] = std::max(b.hi[a], c[a]);
    }
  }
  return b;
}

inline Shape block_shape(const Block& b, int rank) {
  std::vector<int> ext;
  for (int a = 0; a < rank; ++a) ext.push_back(b.side(a));
  return Shape(ext);
}

inline std::size_t to_block(const Shape& s, const Block& b, const Shape& sub, std::size_t i) {
  Coord c = s.coord(i);
  for (int a = 0; a < s.rank(); ++a) c[a] -= b.lo[a];
  return sub.index(c);
}

// Lattice on block b holding exactly `sites`.
inline Lattice block_lattice(const Shape& s, const Block& b, const std::vector<std::size_t>& sites) {
  const Shape sub = block_shape(b, s.rank());
  Lattice l(sub);
  for (auto i : sites) l.set(to_block(s, b, sub, i));
  return l;
}

// Are all of `members` in one nearest-neighbor component of `occ`?
inline bool one_component(const Lattice& occ, const std::vector<std::size_t>& members) {
  if (members.empty()) return true;
  const Shape& s = occ.shape();
  std::vector<std::uint8_t> seen(s.size(), 0);
  std::vector<std::size_t> stack{members.front()};
  seen[members.front()] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const Coord c = s.coord(i);
    for (int a = 0; a < s.rank(); ++a) {
      const std::size_t st = s.stride(a);
      if (c[a] > 0 && occ.test(i - st) && !seen[i - st]) {
        seen[i - st] = 1;
        stack.push_back(i - st);
      }
      if (c[a] + 1 < s.extent(a) && occ.test(i + st) && !seen[i + st]) {
        seen[i + st] = 1;
        stack.push_back(i + st);
      }
    }
  }
  return std::all_of(members.begin(), members.end(), [&](std::size_t m) { return seen[m] != 0; });
}

inline std::vector<std::size_t> sorted_union(const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
  std::vector<std::size_t> out;
  out.reserve(x.size() + y.size());
  std::merge(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

inline int chebyshev_gap(const Block& l, const Block& r, int rank) {
  int g = 0;
  for (int a = 0; a < rank; ++a) g = std::max({g, r.lo[a] - l.hi[a] - 1, l.lo[a] - r.hi[a] - 1});
  return g;
}

}  // namespace detail

namespace detail {

// Region membership test on a fixed box. Works on the sites it touches only
// (closures never leave the covering block of their seeds, and weak segments
// join occupied sites), so a test costs O(|closure| k) whatever the box size.
class RegionTester {
 public:
  RegionTester(const Shape& shape, const NeighborhoodSpec& spec)
      : shape_(shape), spec_(spec), count_(shape.size(), 0), state_(shape.size(), kEmpty), mark_(shape.size(), 0) {}

  bool is_region(const std::vector<std::size_t>& sites, const std::vector<std::size_t>& seeds) {
    if (sites.empty()) return false;
    reset();
    for (auto i : seeds) touch_state(i, kSeed);
    const auto k = static_cast<std::uint16_t>(spec_.k());
    queue_.clear();
    for (auto i : seeds) {
      for_each_neighbor(shape_, spec_, i, [&](std::size_t j) { bump(j, k); });
    }
    for (std::size_t h = 0; h < queue_.size(); ++h) {
      for_each_neighbor(shape_, spec_, queue_[h], [&](std::size_t j) { bump(j, k); });
    }
    // Weakly spanned sites.
    for (auto u : queue_) {
      const Coord c = shape_.coord(u);
      for (int a = 0; a < spec_.rank(); ++a) {
        const std::size_t st = shape_.stride(a);
        const int up = std::min(spec_.radius(a), shape_.extent(a) - 1 - c[a]);
        const int down = std::min(spec_.radius(a), c[a]);
        for (int d = 2; d <= up; ++d) {
          if (!occupied(u + st * d)) continue;
          for (int m = 1; m < d; ++m) {
            if (state_[u + st * m] == kEmpty) touch_state(u + st * m, kWeak);
          }
        }
        for (int d = 2; d <= down; ++d) {
          if (!occupied(u - st * d)) continue;
          for (int m = 1; m < d; ++m) {
            if (state_[u - st * m] == kEmpty) touch_state(u - st * m, kWeak);
          }
        }
      }
    }
    for (auto i : sites) {
      if (state_[i] == kEmpty) return false;
    }
    return connected(sites, [&](std::size_t i) { return state_[i] != kEmpty; });
  }

  /// Nearest-neighbor connectivity of `sites` on their own.
  bool plain_connected(const std::vector<std::size_t>& sites) {
    reset();
    for (auto i : sites) touch_state(i, kSeed);
    return connected(sites, [&](std::size_t i) { return state_[i] != kEmpty; });
  }

 private:
  static constexpr std::uint8_t kEmpty = 0, kSeed = 1, kAdded = 2, kWeak = 3;

  bool occupied(std::size_t i) const noexcept { return state_[i] == kSeed || state_[i] == kAdded; }

  void touch_state(std::size_t i, std::uint8_t s) {
    if (state_[i] == kEmpty && count_[i] == 0) touched_.push_back(i);
    state_[i] = s;
  }

  void bump(std::size_t j, std::uint16_t k) {
    if (count_[j] == 0 && state_[j] == kEmpty) touched_.push_back(j);
    if (++count_[j] >= k && state_[j] == kEmpty) {
      state_[j] = kAdded;
      queue_.push_back(j);
    }
  }

  void reset() {
    for (auto i : touched_) {
      count_[i] = 0;
      state_[i] = kEmpty;
    }
    touched_.clear();
  }

  template <class Occ>
  bool connected(const std::vector<std::size_t>& members, Occ&& occ) {
    if (++stamp_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      stamp_ = 1;
    }
    stack_.assign(1, members.front());
    mark_[members.front()] = stamp_;
    while (!stack_.empty()) {
      const std::size_t i = stack_.back();
      stack_.pop_back();
      const Coord c = shape_.coord(i);
      for (int a = 0; a < shape_.rank(); ++a) {
        const std::size_t st = shape_.stride(a);
        if (c[a] > 0 && mark_[i - st] != stamp_ && occ(i - st)) {
          mark_[i - st] = stamp_;
          stack_.push_back(i - st);
        }
        if (c[a] + 1 < shape_.extent(a) && mark_[i + st] != stamp_ && occ(i + st)) {
          mark_[i + st] = stamp_;
          stack_.push_back(i + st);
        }
      }
    }
    return std::all_of(members.begin(), members.end(), [&](std::size_t m) { return mark_[m] == stamp_; });
  }

  Shape shape_;
  NeighborhoodSpec spec_;
  std::vector<std::uint16_t> count_;
  std::vector<std::uint8_t> state_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<std::size_t> touched_, queue_, stack_;
};

}  // namespace detail

/// A set of sites with seeds is a region when, after weakly enhancing the
/// seeds inside the covering block, all of its sites lie in one
/// nearest-neighbor component.
inline bool is_region(const Shape& shape, const NeighborhoodSpec& spec, const std::vector<std::size_t>& sites,
                      const std::vector<std::size_t>& seeds) {
  detail::RegionTester t(shape, spec);
  return t.is_region(sites, seeds);
}

enum class StepKind { initial, merge, influence };

struct RegionStep {
  StepKind kind = StepKind::initial;
  std::size_t region_count = 0;
  int max_diameter = 0;
  int new_region = -1;           // index into RegionTrace::regions
  bool adjacent = false;         // merge steps: the pair touches
  std::size_t site = 0;          // influence steps: the occupied site x
  int influence_size = 0;        // influence steps: |S_i|
  int influence_spread = 0;      // influence steps: pairwise distance bound within S_i
  bool plain_connected = false;  // influence steps: union plus x connected without weak sites
  bool is_region = true;         // the new set passes is_region
};

struct RegionTrace {
  int kappa = 0;
  int lambda = 0;
  std::vector<Region> regions;  // every region ever formed, in creation order
  std::vector<RegionStep> steps;
  std::size_t growth_violations = 0;     // steps with D' > kappa (D + 2c + 1)
  std::size_t influence_violations = 0;  // sets outside [1, k] or spread > 2c+1
  std::size_t non_regions = 0;           // new sets failing is_region

  int final_max_diameter() const noexcept { return steps.empty() ? 0 : steps.back().max_diameter; }
  bool invariants_hold() const noexcept {
    return growth_violations == 0 && influence_violations == 0 && non_regions == 0;
  }
};

/// Runs the merging iteration. Each round takes the first applicable of
///   1. merging two touching regions whose union is a region,
///   2. occupying the smallest site with a set of influencing regions,
///   3. merging two non-touching regions whose union is a region;
/// ties go to the smallest site indices involved.
inline RegionTrace decompose_regions(const Lattice& lat, const NeighborhoodSpec& spec) {
  const auto [kappa, lambda] = kappa_lambda(spec);
  const Shape& shape = lat.shape();
  detail::require(shape.rank() == 3, "region decomposition needs a three-dimensional lattice");
  const int rank = 3;
  const int c = spec.sorted_radius(2);
  const int k = spec.k();

  RegionTrace tr;
  tr.kappa = kappa;
  tr.lambda = lambda;
  detail::RegionTester tester(shape, spec);
  std::vector<int> owner(shape.size(), -1);
  std::vector<int> alive;  // region ids
  std::vector<char> plain;  // per region id: sites connected on their own
  std::vector<std::uint16_t> occ_count(shape.size(), 0);
  using PairKey = std::tuple<std::size_t, std::size_t, int, int>;  // min sites, then ids
  std::set<PairKey> touching;                                       // mergeable touching pairs
  std::set<std::pair<int, int>> rejected;

  auto key = [&](int a, int b) {
    const std::size_t ma = tr.regions[a].min_site(), mb = tr.regions[b].min_site();
    return ma < mb ? PairKey{ma, mb, a, b} : PairKey{mb, ma, b, a};
  };

  auto union_is_region = [&](int a, int b, bool adjacent) {
    const std::pair<int, int> id{std::min(a, b), std::max(a, b)};
    if (rejected.count(id)) return false;
    // Touching connected parts stay connected; every site lies in the closure of the seeds.
    if (adjacent && plain[a] && plain[b]) return true;
    const bool ok = tester.is_region(detail::sorted_union(tr.regions[a].sites, tr.regions[b].sites),
                                     detail::sorted_union(tr.regions[a].seeds, tr.regions[b].seeds));
    if (!ok) rejected.insert(id);
    return ok;
  };

  auto max_diameter = [&]() {
    int m = 0;
    for (int id : alive) m = std::max(m, tr.regions[id].diameter);
    return m;
  };

  auto add_region = [&](Region r, bool is_plain) {
    r.bbox = detail::bounding_block(shape, r.sites);
    r.diameter = r.bbox.longest_side(rank);
    const int id = static_cast<int>(tr.regions.size());
    for (auto i : r.sites) owner[i] = id;
    tr.regions.push_back(std::move(r));
    plain.push_back(is_plain ? 1 : 0);
    return id;
  };

  auto touching_regions = [&](int id) {
    std::vector<int> out;
    for (auto i : tr.regions[id].sites) {
      const Coord cc = shape.coord(i);
      for (int a = 0; a < rank; ++a) {
        const std::size_t st = shape.stride(a);
        if (cc[a] > 0 && owner[i - st] >= 0 && owner[i - st] != id) out.push_back(owner[i - st]);
        if (cc[a] + 1 < shape.extent(a) && owner[i + st] >= 0 && owner[i + st] != id) out.push_back(owner[i + st]);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  // Alive region ids become live once pushed; touching pairs are tested on creation.
  auto activate = [&](int id) {
    for (int other : touching_regions(id)) {
      if (union_is_region(id, other, true)) touching.insert(key(id, other));
    }
    alive.push_back(id);
  };

  auto retire = [&](const std::vector<int>& gone) {
    for (int g : gone) alive.erase(std::find(alive.begin(), alive.end(), g));
    for (auto it = touching.begin(); it != touching.end();) {
      const int a = std::get<2>(*it), b = std::get<3>(*it);
      const bool stale = std::find(gone.begin(), gone.end(), a) != gone.end() ||
                         std::find(gone.begin(), gone.end(), b) != gone.end();
      it = stale ? touching.erase(it) : std::next(it);
    }
  };

  auto merge = [&](int a, int b, bool adjacent, RegionStep& step) {
    Region r;
    r.sites = detail::sorted_union(tr.regions[a].sites, tr.regions[b].sites);
    r.seeds = detail::sorted_union(tr.regions[a].seeds, tr.regions[b].seeds);
    const bool is_plain = adjacent && plain[a] && plain[b] ? true : tester.plain_connected(r.sites);
    retire({a, b});
    const int id = add_region(std::move(r), is_plain);
    activate(id);
    step.kind = StepKind::merge;
    step.new_region = id;
    step.adjacent = adjacent;
  };

  // Singletons: all of them exist before any pair is examined.
  lat.for_each_set([&](std::size_t i) {
    Region r;
    r.sites = {i};
    r.seeds = {i};
    add_region(std::move(r), true);
    for_each_neighbor(shape, spec, i, [&](std::size_t j) { ++occ_count[j]; });
  });
  for (int id = 0; id < static_cast<int>(tr.regions.size()); ++id) activate(id);
  tr.steps.push_back({StepKind::initial, alive.size(), max_diameter(), -1, false, 0, 0, 0, false, true});

  for (;;) {
    const int before = tr.steps.back().max_diameter;
    RegionStep step;
    std::size_t x = shape.size();
    if (touching.empty()) {
      for (std::size_t i = 0; i < shape.size(); ++i) {
        if (owner[i] < 0 && occ_count[i] >= k) {
          x = i;
          break;
        }
      }
    }
    if (!touching.empty()) {
      const auto [ma, mb, a, b] = *touching.begin();
      merge(a, b, true, step);
    } else if (x < shape.size()) {
      // Neighbor counts per adjacent region, regions ordered by min site.
      std::vector<std::pair<int, int>> touch;  // (region, count)
      for_each_neighbor(shape, spec, x, [&](std::size_t j) {
        if (owner[j] < 0) return;
        auto it = std::find_if(touch.begin(), touch.end(), [&](auto& t) { return t.first == owner[j]; });
        if (it == touch.end()) {
          touch.emplace_back(owner[j], 1);
        } else {
          ++it->second;
        }
      });
      std::sort(touch.begin(), touch.end(), [&](auto& l, auto& r) {
        return tr.regions[l.first].min_site() < tr.regions[r.first].min_site();
      });
      // Smallest subset reaching k; the first such subset in lexicographic order.
      const int n = static_cast<int>(touch.size());
      std::vector<int> chosen;
      for (int size = 1; size <= n && chosen.empty(); ++size) {
        std::vector<int> pick(size);
        for (int i = 0; i < size; ++i) pick[i] = i;
        for (;;) {
          int sum = 0;
          for (int i : pick) sum += touch[i].second;
          if (sum >= k) {
            chosen = pick;
            break;
          }
          int pos = size - 1;
          while (pos >= 0 && pick[pos] == n - size + pos) --pos;
          if (pos < 0) break;
          ++pick[pos];
          for (int i = pos + 1; i < size; ++i) pick[i] = pick[i - 1] + 1;
        }
      }

      std::vector<int> set_ids;
      for (int i : chosen) set_ids.push_back(touch[i].first);
      step.influence_size = static_cast<int>(set_ids.size());
      // Chebyshev distance between the regions' sites inside the neighborhood of x.
      std::vector<std::pair<int, Coord>> near;
      for_each_neighbor(shape, spec, x, [&](std::size_t j) {
        if (owner[j] >= 0 && std::find(set_ids.begin(), set_ids.end(), owner[j]) != set_ids.end()) {
          near.emplace_back(owner[j], shape.coord(j));
        }
      });
      for (std::size_t u = 0; u < set_ids.size(); ++u) {
        for (std::size_t v = u + 1; v < set_ids.size(); ++v) {
          int best = 1 << 30;
          for (const auto& [ru, cu] : near) {
            if (ru != set_ids[u]) continue;
            for (const auto& [rv, cv] : near) {
              if (rv != set_ids[v]) continue;
              int d = 0;
              for (int a = 0; a < rank; ++a) d = std::max(d, std::abs(cu[a] - cv[a]));
              best = std::min(best, d);
            }
          }
          step.influence_spread = std::max(step.influence_spread, best);
        }
      }
      if (step.influence_size < 1 || step.influence_size > k || step.influence_spread > 2 * c + 1) {
        ++tr.influence_violations;
      }

      Region r;
      r.sites = {x};
      for (int id : set_ids) {
        r.sites = detail::sorted_union(r.sites, tr.regions[id].sites);
        r.seeds = detail::sorted_union(r.seeds, tr.regions[id].seeds);
      }
      step.plain_connected = tester.plain_connected(r.sites);
      step.is_region = tester.is_region(r.sites, r.seeds);
      if (!step.is_region) ++tr.non_regions;
      retire(set_ids);
      const int id = add_region(std::move(r), step.plain_connected);
      for_each_neighbor(shape, spec, x, [&](std::size_t j) { ++occ_count[j]; });
      activate(id);
      step.kind = StepKind::influence;
      step.new_region = id;
      step.site = x;
    } else {
      // Non-touching pairs within reach of one another, in key order.
      std::vector<int> order = alive;
      std::sort(order.begin(), order.end(),
                [&](int l, int r) { return tr.regions[l].min_site() < tr.regions[r].min_site(); });
      bool merged = false;
      for (std::size_t u = 0; u < order.size() && !merged; ++u) {
        for (std::size_t v = u + 1; v < order.size() && !merged; ++v) {
          const int a = order[u], b = order[v];
          if (detail::chebyshev_gap(tr.regions[a].bbox, tr.regions[b].bbox, rank) > 2 * c) continue;
          if (union_is_region(a, b, false)) {
            merge(a, b, false, step);
            merged = true;
          }
        }
      }
      if (!merged) break;
    }
    step.region_count = alive.size();
    step.max_diameter = max_diameter();
    if (step.max_diameter > kappa * (before + 2 * c + 1)) ++tr.growth_violations;
    tr.steps.push_back(step);
  }
  return tr;
}

/// One line per step: index, region count, max diameter.
inline void write_trace(std::ostream& os, const RegionTrace& tr) {
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    os << i << ' ' << tr.steps[i].region_count << ' ' << tr.steps[i].max_diameter << '\n';
  }
}

struct BlockWitness {
  Block block;
  int longest_side = 0;
  int region = -1;
  bool weakly_crossed = false;
};

enum class KRange {
  lemma,    // 1 <= k <= (l - lambda) / kappa
  extended  // 1 <= k <= l
};

/// The first region of the trace with diameter >= k, provided its diameter is
/// at most kappa k + lambda; its block is checked for weak crossing on the
/// region's seeds alone.
inline std::optional<BlockWitness> find_weakly_crossed_block(const RegionTrace& tr, const Lattice& lat,
                                                             const NeighborhoodSpec& spec, int k,
                                                             KRange range = KRange::lemma) {
  const int l = lat.shape().longest_side();
  const int kmax = range == KRange::lemma ? (l - tr.lambda) / tr.kappa : l;
  detail::require(k >= 1 && k <= kmax, "k = " + std::to_string(k) + " outside [1, " + std::to_string(kmax) + "]");
  for (std::size_t id = 0; id < tr.regions.size(); ++id) {
    const Region& r = tr.regions[id];
    if (r.diameter < k) continue;
    if (r.diameter > tr.kappa * k + tr.lambda) return std::nullopt;
    BlockWitness w;
    w.block = r.bbox;
    w.longest_side = r.diameter;
    w.region = static_cast<int>(id);
    w.weakly_crossed = is_weakly_crossed(detail::block_lattice(lat.shape(), r.bbox, r.seeds), spec);
    return w;
  }
  return std::nullopt;
}

inline std::optional<BlockWitness> find_weakly_crossed_block(const Lattice& lat, const NeighborhoodSpec& spec, int k,
                                                             KRange range = KRange::lemma) {
  const auto [kappa, lambda] = kappa_lambda(spec);
  const int l = lat.shape().longest_side();
  const int kmax = range == KRange::lemma ? (l - lambda) / kappa : l;
  detail::require(k >= 1 && k <= kmax, "k = " + std::to_string(k) + " outside [1, " + std::to_string(kmax) + "]");
  return find_weakly_crossed_block(decompose_regions(lat, spec), lat, spec, k, range);
}

}  // namespace anisoboot
