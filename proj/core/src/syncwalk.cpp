#include "quire/syncwalk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace quire {

namespace {

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

int ProjGroup::find(const Mat& m, double tol) const {
  Mat c = canonicalize_phase(m);
  double sc = c.norm_max();
  if (!(sc > 0)) return -1;
  for (size_t i = 0; i < elements.size(); ++i) {
    if (elements[i].rows() != c.rows() || elements[i].cols() != c.cols()) continue;
    if ((elements[i] - c * cx(elements[i].norm_max() / sc, 0)).norm_max() <= tol) return static_cast<int>(i);
  }
  return -1;
}

ProjGroup close_group(const std::vector<Mat>& generators, int cap) {
  if (generators.empty()) throw std::invalid_argument("close_group: no generators");
  int dim = generators[0].rows();
  for (const auto& g : generators)
    if (!g.is_unitary(1e-9)) throw std::invalid_argument("close_group: generator not unitary");

  ProjGroup g;
  g.elements.push_back(canonicalize_phase(Mat::identity(dim)));
  std::deque<int> queue{0};
  for (const auto& gen : generators) {
    Mat c = canonicalize_phase(gen);
    if (g.find(c) < 0) {
      g.elements.push_back(c);
      g.generator_indices.push_back(static_cast<int>(g.elements.size()) - 1);
      queue.push_back(static_cast<int>(g.elements.size()) - 1);
    } else {
      g.generator_indices.push_back(g.find(c));
    }
  }
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    for (const auto& gen : generators) {
      Mat prod = canonicalize_phase(gen * g.elements[i]);
      if (g.find(prod) < 0) {
        if (static_cast<int>(g.elements.size()) >= cap)
          throw std::length_error("close_group: closure exceeds cap");
        g.elements.push_back(prod);
        queue.push_back(static_cast<int>(g.elements.size()) - 1);
      }
      Mat prod_r = canonicalize_phase(g.elements[i] * gen);
      if (g.find(prod_r) < 0) {
        if (static_cast<int>(g.elements.size()) >= cap)
          throw std::length_error("close_group: closure exceeds cap");
        g.elements.push_back(prod_r);
        queue.push_back(static_cast<int>(g.elements.size()) - 1);
      }
    }
  }
  int n = g.order();
  g.table.assign(n, std::vector<int>(n, -1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int k = g.find(canonicalize_phase(g.elements[i] * g.elements[j]));
      if (k < 0) throw std::logic_error("close_group: set not closed under multiplication");
      g.table[i][j] = k;
    }
  return g;
}

int walk_period(const ProjGroup& g, const std::vector<Mat>& steps) {
  if (steps.empty()) throw std::invalid_argument("walk_period: empty step set");
  std::vector<int> step_idx;
  for (const auto& s : steps) {
    int i = g.find(s);
    if (i < 0) throw std::invalid_argument("walk_period: step outside the group");
    step_idx.push_back(i);
  }
  int n = g.order();
  std::vector<char> cur(n, 0);
  cur[0] = 1;  // identity
  int period = 0;
  for (int len = 1; len <= 2 * n; ++len) {
    std::vector<char> next(n, 0);
    for (int e = 0; e < n; ++e)
      if (cur[e])
        for (int s : step_idx) next[g.mul(s, e)] = 1;
    cur = std::move(next);
    if (cur[0]) period = period == 0 ? len : std::gcd(period, len);
  }
  if (period == 0) throw std::runtime_error("walk_period: identity unreachable within 2|G| steps");
  return period;
}

DihedralVerdict dihedral_check(double theta, int cap, int* order_out) {
  Mat c = rot_pi_xz(theta);
  Mat b = pauli('Z');
  ProjGroup g;
  try {
    g = close_group({c, b}, cap);
  } catch (const std::length_error&) {
    if (order_out) *order_out = 0;
    return DihedralVerdict::NotFiniteAtCap;
  }
  if (order_out) *order_out = g.order();
  int n = g.order();
  if (n % 2 != 0) return DihedralVerdict::NotDihedral;
  int m = n / 2;

  int ci = g.find(c), bi = g.find(b);
  int r = g.mul(ci, bi);  // rotation generator C*B
  // powers of r must form a cyclic subgroup of order m
  std::vector<int> pow{0};
  int x = 0;
  for (int i = 0; i < m; ++i) {
    x = g.mul(r, x);
    if (x == 0) break;
    pow.push_back(x);
  }
  if (x != 0 || static_cast<int>(pow.size()) != m) return DihedralVerdict::NotDihedral;
  std::vector<char> in_pow(n, 0);
  for (int p : pow) in_pow[p] = 1;
  if (in_pow[bi]) return DihedralVerdict::NotDihedral;
  // s r s = r^{-1}
  int rinv = 0;
  for (int p : pow)
    if (g.mul(r, p) == 0) rinv = p;
  if (g.mul(g.mul(bi, r), bi) != rinv) return DihedralVerdict::NotDihedral;
  // coverage: every element is r^k or r^k * s
  for (int e = 0; e < n; ++e) {
    bool covered = in_pow[e];
    for (int p : pow)
      if (g.mul(p, bi) == e) covered = true;
    if (!covered) return DihedralVerdict::NotDihedral;
  }
  return DihedralVerdict::Dihedral;
}

namespace {

struct HzWalk {
  ProjGroup g;
  int h_idx, hz_idx, z_idx;

  HzWalk() {
    g = close_group({pauli('H'), pauli('Z')});
    h_idx = g.find(pauli('H'));
    hz_idx = g.find(pauli('H') * pauli('Z'));
    z_idx = g.find(pauli('Z'));
    if (g.order() != 8 || h_idx < 0 || hz_idx < 0 || z_idx < 0)
      throw std::logic_error("sync: <H,Z> closure is not the expected order-8 group");
  }

  int step(int state, int letter) const { return g.mul(letter ? hz_idx : h_idx, state); }
};

}  // namespace

namespace {

// One trial: chain B walks alone for `delay` ticks, then both walk together.
// Returns the first tick t >= delay with (a, b) = (I, target_b), or -1.
int sync_trial(Rng& rng, const HzWalk& walk, int delay, int target_b, int cap) {
  int a = 0, b = 0;
  for (int t = 0; t <= cap; ++t) {
    if (t >= delay && a == 0 && b == target_b) return t;
    if (t == cap) break;
    b = walk.step(b, rng.uniform() < 0.5 ? 1 : 0);
    if (t >= delay) a = walk.step(a, rng.uniform() < 0.5 ? 1 : 0);
  }
  return -1;
}

}  // namespace

SyncReport sync_simulate(int diff, int trials, int cap, uint64_t seed) {
  if (diff < 0) throw std::invalid_argument("sync_simulate: diff must be >= 0");
  if (cap < diff) throw std::invalid_argument("sync_simulate: cap must be >= diff");
  if (trials < 1) throw std::invalid_argument("sync_simulate: trials must be >= 1");

  static const HzWalk walk;
  const bool odd = diff % 2 != 0;
  // an odd offset never reaches (I, I); one Z byproduct declared on the longer
  // chain substitutes for a step, restores the parity, and the walk waits for
  // (I, Z) instead
  const int delay = odd ? diff - 1 : diff;
  const int target_b = odd ? walk.z_idx : 0;

  SyncReport rep;
  rep.diff = diff;
  rep.trials = trials;
  rep.cap = cap;
  rep.seed = seed;
  rep.target = odd ? "(I,Z)" : "(I,I)";

  Rng root(seed);
  long hits = 0, ii_hits = 0;
  double time_sum = 0, time_sum2 = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = root.split(static_cast<uint64_t>(trial));
    int hit_at = sync_trial(rng, walk, delay, target_b, cap);
    if (hit_at >= 0) {
      ++hits;
      time_sum += hit_at;
      time_sum2 += static_cast<double>(hit_at) * hit_at;
    }
    // (I, I) frequency under the true offset (no byproduct declared)
    Rng rng_ii = root.split(0x5000000ull + trial);
    if (odd) {
      if (sync_trial(rng_ii, walk, diff, 0, cap) >= 0) ++ii_hits;
    } else if (hit_at >= 0) {
      ++ii_hits;
    }
  }
  rep.hit_frequency = static_cast<double>(hits) / trials;
  rep.ii_frequency = static_cast<double>(ii_hits) / trials;
  if (hits > 0) {
    rep.mean_hit_time = time_sum / hits;
    if (hits > 1) {
      double var = (time_sum2 - time_sum * time_sum / hits) / (hits - 1);
      rep.stderr_hit_time = std::sqrt(std::max(0.0, var) / hits);
    }
  }
  rep.exact_frequency = sync_exact_hit_probability(diff, cap);
  return rep;
}

double sync_exact_hit_probability(int diff, int cap) {
  static const HzWalk walk;
  const bool odd = diff % 2 != 0;
  const int delay = odd ? diff - 1 : diff;
  const int target_b = odd ? walk.z_idx : 0;
  const int n = walk.g.order();

  // distribution over (a, b) pairs with the target state absorbing
  std::vector<double> dist(n * n, 0.0);
  dist[0 * n + 0] = 1.0;
  double absorbed = 0;
  auto idx = [n](int a, int b) { return a * n + b; };
  for (int t = 0; t <= cap; ++t) {
    if (t >= delay) {
      double p = dist[idx(0, target_b)];
      absorbed += p;
      dist[idx(0, target_b)] = 0;
    }
    if (t == cap) break;
    std::vector<double> next(n * n, 0.0);
    if (t < delay) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double p = dist[idx(a, b)];
          if (p == 0) continue;
          next[idx(a, walk.step(b, 0))] += 0.5 * p;
          next[idx(a, walk.step(b, 1))] += 0.5 * p;
        }
    } else {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double p = dist[idx(a, b)];
          if (p == 0) continue;
          for (int la = 0; la < 2; ++la)
            for (int lb = 0; lb < 2; ++lb)
              next[idx(walk.step(a, la), walk.step(b, lb))] += 0.25 * p;
        }
    }
    dist = std::move(next);
  }
  return absorbed;
}

std::string sync_report_csv(const SyncReport& r) {
  std::ostringstream os;
  os << "diff,trials,cap,target,hit_frequency,mean_hit_time,stderr_hit_time,exact_frequency,"
        "ii_frequency\n";
  os << r.diff << "," << r.trials << "," << r.cap << "," << r.target << ","
     << fmt12(r.hit_frequency) << "," << fmt12(r.mean_hit_time) << ","
     << fmt12(r.stderr_hit_time) << "," << fmt12(r.exact_frequency) << ","
     << fmt12(r.ii_frequency) << "\n";
  return os.str();
}

}  // namespace quire
