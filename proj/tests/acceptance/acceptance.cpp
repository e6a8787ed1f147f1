// Acceptance runner: one PASS/FAIL line per criterion. With arguments, only
// the listed criterion numbers run. Exit status is 0 iff every run criterion
// passed.

#include "cli.hpp"

#include <anisoboot/anisoboot.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace anisoboot;

// Pinned parameters and tolerances.
constexpr std::uint64_t kSeed = 20240611;
constexpr double kOracleBudgetSeconds = 120;
constexpr std::uint64_t kOracleCases = 1000;
constexpr std::uint64_t kMonotonePairs = 500;
constexpr std::uint64_t kExactRuns = 40;
constexpr std::uint64_t kExactTrials = 10000;
constexpr std::uint64_t kExactMinCovered = 38;  // 95% of 40
constexpr std::uint64_t kSlabCases = 500;
constexpr std::uint64_t kLemmaLattices = 100;
constexpr std::uint64_t kBoundTrials = 100000;
constexpr std::uint64_t kChiTrials = 100000;
constexpr std::uint64_t kDominationCases = 300;
constexpr std::uint64_t kThresholdTrials = 1000;
constexpr double kThresholdTol = 5e-4;
constexpr double kBandRatio = 1.6;
constexpr double kScalingBudgetSeconds = 1800;
constexpr std::uint64_t kDropletSeeds = 200;
constexpr double kOneSided99 = 2.3263478740408408;
constexpr int kEarlyGenerations = 8;

struct Verdict {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

Verdict oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = verify_oracle(kOracleCases, kSeed);
  const double s = seconds_since(t0);
  return {r.ok() && s < kOracleBudgetSeconds,
          std::to_string(r.cases) + " lattices, " + std::to_string(r.failures) + " mismatches, " + fmt(s, 3) + " s"};
}

Verdict monotone() {
  const auto r = verify_monotone(kMonotonePairs, kSeed);
  return {r.ok(), std::to_string(r.cases) + " pairs, " + std::to_string(r.failures) + " violations"};
}

Verdict exact1d() {
  const NeighborhoodSpec spec{1};
  bool pass = true;
  std::string detail;
  std::uint64_t pooled = 0;
  for (int L : {10, 100, 1000}) {
    for (double p : {0.001, 0.01}) {
      const double exact = 1 - std::pow(1 - p, L + 1);
      std::uint64_t covered = 0;
      for (std::uint64_t run = 0; run < kExactRuns; ++run) {
        const auto e = estimate_spanning(box_shape(spec, L), p, spec, kExactTrials, kSeed + run, default_threads());
        covered += e.ci_low <= exact && exact <= e.ci_high;
      }
      pass = pass && covered >= kExactMinCovered;
      pooled += covered;
      detail += (detail.empty() ? "" : ", ") + ("L=" + std::to_string(L) + " p=" + fmt(p) + ": " +
                                                std::to_string(covered) + "/" + std::to_string(kExactRuns));
    }
  }
  detail += "; pooled " + std::to_string(pooled) + "/" + std::to_string(6 * kExactRuns) + ", need " +
            std::to_string(kExactMinCovered) + " per pair";
  return {pass, detail};
}

Verdict slab() {
  const auto r = verify_slab(kSlabCases, kSeed);
  return {r.ok(), std::to_string(r.cases) + " slabs over 3 axes, " + std::to_string(r.failures) + " mismatches"};
}

Verdict lemma1() {
  const auto r = verify_lemma1(kLemmaLattices, kSeed);
  return {r.suite.ok(), std::to_string(r.lattices) + " spanned lattices, lemma-range k checks " +
                            std::to_string(r.lemma_range_checks) + ", extended k checks " +
                            std::to_string(r.extended_checks) + ", block failures " +
                            std::to_string(r.block_failures) + ", trace violations " +
                            std::to_string(r.trace_violations)};
}

Verdict bound_domination() {
  bool span_pass = true, weak_pass = true;
  std::string detail;
  for (const NeighborhoodSpec& spec : {NeighborhoodSpec{1, 2}, NeighborhoodSpec{2, 3}}) {
    const auto cells = measure_bound_domination(spec, {0.1, 0.2, 0.3}, kBoundTrials, kSeed);
    std::size_t span_bad = 0, weak_bad = 0;
    const BoundCell* worst = nullptr;
    double worst_excess = -1;
    for (const auto& c : cells) {
      span_bad += !c.span_ok();
      weak_bad += !c.weak_ok();
      const double excess = c.span_freq() - c.span_bound;
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = &c;
      }
    }
    span_pass = span_pass && span_bad == 0;
    weak_pass = weak_pass && weak_bad == 0;
    detail += (detail.empty() ? "" : "; ") + spec.label() + ": span exceeds bound+3sigma in " +
              std::to_string(span_bad) + "/" + std::to_string(cells.size()) + " cells, weak in " +
              std::to_string(weak_bad) + "/" + std::to_string(cells.size());
    if (worst != nullptr && span_bad > 0) {
      detail += " (worst x=" + std::to_string(worst->x) + " y=" + std::to_string(worst->y) +
                " p=" + fmt(worst->p) + ": freq " + fmt(worst->span_freq()) + " vs bound " + fmt(worst->span_bound) + ")";
    }
  }
  detail = std::string("span half ") + (span_pass ? "PASS" : "FAIL") + ", weak half " + (weak_pass ? "PASS" : "FAIL") +
           "; " + detail;
  return {span_pass && weak_pass, detail};
}

Verdict chi() {
  struct Case {
    NeighborhoodSpec spec;
    double p;
  };
  bool pass = true;
  std::string detail;
  for (const Case& c : {Case{{1, 1}, 0.005}, Case{{1, 2}, 0.01}}) {
    const auto st = measure_chi(c.spec, c.p, EnhanceParams::defaults(c.spec, c.p), kChiTrials, kSeed);
    const double edge = st.chi + st.ci;
    pass = pass && edge < std::sqrt(c.p);
    detail += (detail.empty() ? "" : ", ") + c.spec.label() + " p=" + fmt(c.p) + ": chi " + fmt(st.chi) +
              " +" + fmt(st.ci, 2) + " vs sqrt(p) " + fmt(std::sqrt(c.p));
  }
  return {pass, detail};
}

Verdict domination() {
  const auto r = verify_domination(kDominationCases, kSeed);
  return {r.ok(), std::to_string(r.cases) + " lattices, " + std::to_string(r.failures) + " violations, " + r.note};
}

Verdict scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const NeighborhoodSpec spec{1, 1};
  std::vector<double> th, band;
  std::string detail;
  for (int L : {32, 64, 128, 256}) {
    const auto t = threshold_p(L, spec, 0.5, kThresholdTol, kThresholdTrials, kSeed, default_threads());
    th.push_back(t.p);
    band.push_back(std::log(static_cast<double>(L)) * t.p);
    detail += (detail.empty() ? "" : ", ") + ("L=" + std::to_string(L) + " p_th " + fmt(t.p) + " (ln L p_th " +
                                              fmt(band.back()) + ")");
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < th.size(); ++i) decreasing = decreasing && th[i] < th[i - 1];
  const auto [mn, mx] = std::minmax_element(band.begin(), band.end());
  const double ratio = *mx / *mn;
  const double s = seconds_since(t0);
  detail += "; band ratio " + fmt(ratio) + ", " + fmt(s, 3) + " s";
  return {decreasing && ratio < kBandRatio && s < kScalingBudgetSeconds, detail};
}

struct Paired {
  double mean_z = 0, mean_x = 0, t = 0;
};

Paired paired_advance(int generations) {
  const NeighborhoodSpec spec{1, 1, 2};
  const auto outs = parallel_map<GrowthOutcome>(kDropletSeeds, default_threads(), [&](std::size_t s) {
    return simulate_growth(Shape{8, 8, 2}, 0.25, Shape::cube(3, 40), spec, kSeed + s, 0, generations);
  });
  double sum = 0, sum_sq = 0;
  Paired r;
  for (const auto& g : outs) {
    const double d = g.advance[2] - g.advance[0];
    r.mean_z += g.advance[2];
    r.mean_x += g.advance[0];
    sum += d;
    sum_sq += d * d;
  }
  const auto n = static_cast<double>(outs.size());
  r.mean_z /= n;
  r.mean_x /= n;
  const double mean = sum / n;
  const double sd = std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)));
  r.t = sd > 0 ? mean / (sd / std::sqrt(n)) : (mean > 0 ? INFINITY : 0);
  return r;
}

Verdict droplet() {
  const Paired fix = paired_advance(std::numeric_limits<int>::max());
  const Paired early = paired_advance(kEarlyGenerations);
  const bool pass = fix.t > kOneSided99 && early.t > kOneSided99;
  return {pass, "fixpoint mean advance z " + fmt(fix.mean_z) + " vs x " + fmt(fix.mean_x) + " (t " + fmt(fix.t, 3) +
                    "); after " + std::to_string(kEarlyGenerations) + " generations z " + fmt(early.mean_z) +
                    " vs x " + fmt(early.mean_x) + " (t " + fmt(early.t, 3) + ")"};
}

Verdict determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "anisoboot_acceptance";
  std::filesystem::create_directories(dir);
  const std::string sweep = (dir / "sweep.csv").string();
  const std::string snap = (dir / "snap.txt").string();
  {
    std::ostringstream o, e;
    cli::run({"enhance", "--model", "1,1,2", "--L", "8", "--p", "0.15", "--dump", snap}, o, e);
  }
  const std::vector<std::vector<std::string>> cmds{
      {"span", "--model", "1,2", "--L", "16", "--p", "0.2", "--trials", "2000"},
      {"span", "--model", "1", "--L", "100", "--p", "0.01", "--trials", "2000", "--format", "json"},
      {"threshold", "--model", "1,1", "--L", "32", "--trials", "200", "--tol", "0.005"},
      {"sweep", "--model", "1,1", "--L", "8,16,32", "--target", "0.5", "--tol", "0.01", "--trials", "200",
       "--output", sweep, "--timestamp", "fixed"},
      {"sweep", "--model", "1,1,2", "--L", "6,8", "--p", "0.1,0.2", "--trials", "200"},
      {"fit", "--input", sweep},
      {"droplet", "--model", "1,1,2", "--p", "0.25"},
      {"droplet", "--model", "1,1,2", "--p", "0.25", "--arena", "24", "--trials", "20", "--block", "8,8,2"},
      {"droplet", "--model", "1,2", "--p", "0.1", "--C", "2", "--arena", "60", "--trials", "20"},
      {"bounds", "rect-span", "--model", "2,3", "--x", "5", "--y", "7", "--p", "0.2"},
      {"bounds", "bracket", "--model", "1,1,2", "--p", "0.05"},
      {"verify", "--suite", "all", "--cases", "40"},
      {"verify", "--suite", "bounds", "--cases", "200"},
      {"enhance", "--model", "1,1,2", "--load", snap, "--p", "0.15", "--format", "json"},
      {"enhance", "--model", "1,1,2", "--L", "10", "--p", "0.1", "--trial", "3"},
  };
  std::size_t bad = 0;
  std::string which;
  for (const auto& c : cmds) {
    std::vector<std::string> outs;
    for (const char* threads : {"1", "1", "3"}) {
      auto args = c;
      args.insert(args.end(), {"--threads", threads, "--seed", "11"});
      std::ostringstream o, e;
      const int code = cli::run(args, o, e);
      std::string bytes = std::to_string(code) + "\n" + o.str();
      if (c[0] == "sweep" && std::find(c.begin(), c.end(), sweep) != c.end()) {
        std::ifstream f(sweep), j(sweep + ".json");
        std::stringstream ss;
        ss << f.rdbuf() << j.rdbuf();
        bytes += ss.str();
      }
      outs.push_back(bytes);
    }
    if (outs[0] != outs[1] || outs[0] != outs[2]) {
      ++bad;
      which += " " + c[0];
    }
  }
  return {bad == 0, std::to_string(cmds.size()) + " invocations x 3 runs (threads 1, 1, 3), " + std::to_string(bad) +
                        " differ" + which};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Verdict()>>> criteria{
      {1, {"oracle equivalence", oracle}},
      {2, {"coupled monotonicity", monotone}},
      {3, {"1D exactness", exact1d}},
      {4, {"dimensional reduction", slab}},
      {5, {"weakly crossed block witness", lemma1}},
      {6, {"rectangle bound domination", bound_domination}},
      {7, {"stepping-stone statistic", chi}},
      {8, {"enhancement domination", domination}},
      {9, {"qualitative threshold scaling", scaling}},
      {10, {"droplet anisotropy", droplet}},
      {11, {"determinism", determinism}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [n, c] : criteria) selected.push_back(n);
  }
  int failed = 0;
  for (int n : selected) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::cerr << "no criterion " << n << "\n";
      return 2;
    }
    Verdict v{false, ""};
    try {
      v = it->second.second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << it->second.first << " (" << v.detail
              << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
