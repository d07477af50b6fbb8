#include "quire/peps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace quire {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// leg bit patterns: outcome j flips one leg of the all-(b) pattern
//   j = 0: (b, b, b)   j = 1: (b, b, !b)   j = 2: (b, !b, b)
int leg_bit(int j, int b, int leg) {
  if (j == 1 && leg == 2) return 1 - b;
  if (j == 2 && leg == 1) return 1 - b;
  return b;
}

// which leg carries the X error for outcome j (none for 0)
int error_leg(int j) { return j == 1 ? 2 : (j == 2 ? 1 : -1); }

}  // namespace

void Lattice::validate() const {
  if (nodes < 0 || nodes > 16) throw std::invalid_argument("lattice: node count outside [0, 16]");
  std::vector<std::vector<bool>> used(nodes, std::vector<bool>(3, false));
  auto take = [&](int node, int leg) {
    if (node < 0 || node >= nodes || leg < 0 || leg > 2)
      throw std::invalid_argument("lattice: leg reference out of range");
    if (used[node][leg]) throw std::invalid_argument("lattice: leg used twice");
    used[node][leg] = true;
  };
  for (const auto& e : edges) {
    take(e.a, e.leg_a);
    take(e.b, e.leg_b);
  }
  for (const auto& d : dangles) {
    take(d.node, d.leg);
    if (d.state.size() != 2) throw std::invalid_argument("lattice: dangle state must be 2-dim");
    if (norm2(d.state) < 1e-12) throw std::invalid_argument("lattice: dangle state is zero");
  }
  for (int v = 0; v < nodes; ++v)
    for (int l = 0; l < 3; ++l)
      if (!used[v][l]) throw std::invalid_argument("lattice: node degree mismatch (leg unused)");
}

std::vector<std::pair<int, int>> Lattice::graph_edges() const {
  std::vector<std::pair<int, int>> g;
  for (const auto& e : edges) g.emplace_back(e.a, e.b);
  return g;
}

Lattice Lattice::grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid: empty");
  if (rows > 2) throw std::invalid_argument("grid: only one or two rows keep node degrees <= 3");
  Lattice l;
  l.nodes = rows * cols;
  auto id = [cols](int r, int c) { return r * cols + c; };
  Vec plus{kInvSqrt2, kInvSqrt2};
  // legs: 0 = west, 1 = east, 2 = vertical
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) l.edges.push_back({id(r, c), 1, id(r, c + 1), 0});
      if (c == 0) l.dangles.push_back({id(r, c), 0, plus});
      if (c + 1 == cols) l.dangles.push_back({id(r, c), 1, plus});
      if (r + 1 < rows) l.edges.push_back({id(r, c), 2, id(r + 1, c), 2});
      if (rows == 1) l.dangles.push_back({id(r, c), 2, plus});
    }
  l.validate();
  return l;
}

Lattice Lattice::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.contains("grid")) {
    auto g = j.at("grid");
    return grid(g.at(0).get<int>(), g.at(1).get<int>());
  }
  Lattice l;
  l.nodes = j.at("nodes").get<int>();
  for (const auto& e : j.at("edges"))
    l.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>(), e.at(3).get<int>()});
  if (j.contains("dangles"))
    for (const auto& d : j.at("dangles")) {
      std::string kind = d.size() > 2 ? d.at(2).get<std::string>() : "plus";
      Vec state = kind == "zero"  ? Vec{1, 0}
                  : kind == "one" ? Vec{0, 1}
                                  : Vec{kInvSqrt2, kInvSqrt2};
      l.dangles.push_back({d.at(0).get<int>(), d.at(1).get<int>(), state});
    }
  l.validate();
  return l;
}

std::string Lattice::to_json() const {
  nlohmann::json j;
  j["nodes"] = nodes;
  auto edges_j = nlohmann::json::array();
  for (const auto& e : edges) edges_j.push_back({e.a, e.leg_a, e.b, e.leg_b});
  j["edges"] = edges_j;
  auto dangles_j = nlohmann::json::array();
  for (const auto& d : dangles) {
    std::string kind = std::abs(d.state[0] - cx(1, 0)) < 1e-9 ? "zero"
                       : std::abs(d.state[1] - cx(1, 0)) < 1e-9 ? "one"
                                                                : "plus";
    dangles_j.push_back({d.node, d.leg, kind});
  }
  j["dangles"] = dangles_j;
  return j.dump(2);
}

Vec PepsState::bond_state() {
  // (|+>|0> + |->|1>)/sqrt2, amplitudes over |x_first x_second>
  return Vec{0.5, 0.5, 0.5, -0.5};
}

Mat PepsState::projector(int j) {
  if (j < 0 || j > 2) throw std::invalid_argument("projector: j outside 0..2");
  Mat p(2, 8);
  for (int b = 0; b < 2; ++b) {
    int idx = (leg_bit(j, b, 0) << 2) | (leg_bit(j, b, 1) << 1) | leg_bit(j, b, 2);
    p(b, idx) = 1.0;
  }
  return p;
}

namespace {

// amplitude of one node-bit assignment: product of bond and dangle overlaps
cx config_amp(const Lattice& l, const std::vector<int>& j_of, const std::vector<int>& b_of) {
  cx amp = 1.0;
  for (const auto& e : l.edges) {
    int x = leg_bit(j_of[e.a], b_of[e.a], e.leg_a);
    int y = leg_bit(j_of[e.b], b_of[e.b], e.leg_b);
    amp *= ((x & y) ? -0.5 : 0.5);  // <xy|H> = (-1)^{xy} / 2
  }
  for (const auto& d : l.dangles) {
    int x = leg_bit(j_of[d.node], b_of[d.node], d.leg);
    amp *= d.state[x];
  }
  return amp;
}

}  // namespace

StateVector build_tricluster(const Lattice& l) {
  l.validate();
  size_t dim = 1;
  for (int v = 0; v < l.nodes; ++v) {
    if (dim > (size_t(6) << 24)) throw std::length_error("build_tricluster: lattice too large");
    dim *= 6;
  }
  StateVector out;
  out.dims.assign(l.nodes, 6);
  out.amps.assign(dim, cx{});
  std::vector<int> level(l.nodes, 0), j_of(l.nodes), b_of(l.nodes);
  for (size_t idx = 0; idx < dim; ++idx) {
    size_t rem = idx;
    for (int v = l.nodes - 1; v >= 0; --v) {
      level[v] = static_cast<int>(rem % 6);
      rem /= 6;
    }
    for (int v = 0; v < l.nodes; ++v) {
      j_of[v] = level[v] / 2;
      b_of[v] = level[v] % 2;
    }
    out.amps[idx] = config_amp(l, j_of, b_of);
  }
  out.zero = (out.norm_sq() < 1e-300);
  return out;
}

StateVector graph_cluster_state(int nodes, const std::vector<std::pair<int, int>>& edges) {
  if (nodes < 1 || nodes > 20) throw std::length_error("graph_cluster_state: node count outside 1..20");
  StateVector v;
  v.dims.assign(nodes, 2);
  v.amps.resize(size_t(1) << nodes);
  double norm = std::pow(2.0, -0.5 * nodes);
  for (size_t idx = 0; idx < v.amps.size(); ++idx) {
    int sign = 0;
    for (const auto& [a, b] : edges) {
      int xa = (idx >> (nodes - 1 - a)) & 1;
      int xb = (idx >> (nodes - 1 - b)) & 1;
      sign ^= (xa & xb);
    }
    v.amps[idx] = sign ? -norm : norm;
  }
  return v;
}

TriReduction tricluster_apply(const Lattice& l, const std::vector<int>& outcomes) {
  l.validate();
  if (static_cast<int>(outcomes.size()) != l.nodes)
    throw std::invalid_argument("tricluster_apply: outcome count mismatch");
  TriReduction r;
  r.outcomes = outcomes;

  // post-measurement state: levels {2j, 2j+1} per node, relabeled to a qubit
  StateVector v;
  v.dims.assign(l.nodes, 2);
  v.amps.assign(size_t(1) << l.nodes, cx{});
  std::vector<int> b_of(l.nodes);
  for (size_t idx = 0; idx < v.amps.size(); ++idx) {
    for (int n = 0; n < l.nodes; ++n) b_of[n] = (idx >> (l.nodes - 1 - n)) & 1;
    v.amps[idx] = config_amp(l, outcomes, b_of);
  }
  v.zero = (v.norm_sq() < 1e-300);
  r.state = v;

  // X on one bond end acts as Z on the other: collect Z parities per node
  r.z_parity.assign(l.nodes, 0);
  bool correctable = true;
  for (int n = 0; n < l.nodes; ++n) {
    int leg = error_leg(outcomes[n]);
    if (leg < 0) continue;
    bool found = false;
    for (const auto& e : l.edges) {
      if (e.a == n && e.leg_a == leg) {
        r.z_parity[e.b] ^= 1;
        found = true;
      } else if (e.b == n && e.leg_b == leg) {
        r.z_parity[e.a] ^= 1;
        found = true;
      }
    }
    if (!found) {
      // dangling error leg: an X-invariant termination absorbs it
      for (const auto& d : l.dangles)
        if (d.node == n && d.leg == leg) {
          Vec flipped{d.state[1], d.state[0]};
          if (!equal_up_to_phase(std::span<const cx>(flipped), std::span<const cx>(d.state), 1e-9))
            correctable = false;
        }
    }
  }

  StateVector corrected = v;
  for (int n = 0; n < l.nodes; ++n)
    if (r.z_parity[n]) corrected = apply_site_op(corrected, n, pauli('Z'));

  StateVector ref = graph_cluster_state(l.nodes, l.graph_edges());
  r.fidelity = corrected.zero ? 0.0 : fidelity(corrected.amps, ref.amps);
  r.verified = correctable && r.fidelity >= 1 - 1e-9;
  return r;
}

TriReduction tricluster_reduce(const Lattice& l, Rng& rng) {
  StateVector full = build_tricluster(l);
  std::vector<int> outcomes(l.nodes);
  std::vector<double> probs;
  StateVector cur = full;
  for (int n = 0; n < l.nodes; ++n) {
    double total = cur.norm_sq();
    std::vector<double> w(3);
    for (int j = 0; j < 3; ++j) {
      StateVector part = slice_site(cur, n, {2 * j, 2 * j + 1});
      w[j] = part.norm_sq() / total;
    }
    int j = rng.sample(w);
    outcomes[n] = j;
    probs.push_back(w[j]);
    // project the node onto its block (keep all six levels, zero the rest)
    Mat block(6, 6);
    block(2 * j, 2 * j) = 1;
    block(2 * j + 1, 2 * j + 1) = 1;
    cur = apply_site_op(cur, n, block);
  }
  TriReduction r = tricluster_apply(l, outcomes);
  r.step_probs = probs;
  return r;
}

StateVector couple_wires(int top_len, int bottom_len,
                         const std::vector<std::pair<int, int>>& couplings) {
  if (top_len < 1 || bottom_len < 1) throw std::invalid_argument("couple_wires: empty wire");
  if (top_len + bottom_len > 20) throw std::length_error("couple_wires: too many sites");
  std::vector<int> top_pos, bot_pos;
  for (const auto& [t, b] : couplings) {
    if (t < 0 || t >= top_len || b < 0 || b >= bottom_len)
      throw std::invalid_argument("couple_wires: coupling position out of range");
    top_pos.push_back(t);
    bot_pos.push_back(b);
  }
  const int m = static_cast<int>(couplings.size());

  // wire in (|+><0|, |-><1|) form with closing boundaries |L> = |+>, <R| = <0|
  auto wire_amp = [](const std::vector<int>& x) {
    // <0| A[x_n] ... A[x_1] |+> with A[x] = H pi_x: product of H matrix elements
    double amp = std::pow(kInvSqrt2, static_cast<double>(x.size()) + 1);
    for (size_t j = 0; j + 1 < x.size(); ++j)
      if (x[j] && x[j + 1]) amp = -amp;
    return amp;
  };

  StateVector out;
  out.dims.assign(top_len + bottom_len, 2);
  out.amps.assign(size_t(1) << (top_len + bottom_len), cx{});
  std::vector<int> xs(top_len), ys(bottom_len);
  for (size_t idx = 0; idx < out.amps.size(); ++idx) {
    for (int i = 0; i < top_len; ++i) xs[i] = (idx >> (top_len + bottom_len - 1 - i)) & 1;
    for (int i = 0; i < bottom_len; ++i) ys[i] = (idx >> (bottom_len - 1 - i)) & 1;
    double amp = wire_amp(xs) * wire_amp(ys);
    for (int c = 0; c < m; ++c) {
      // B emits |+/-> downward, C absorbs |0/1> upward: the contraction is a
      // controlled-Z phase with a 1/sqrt2 weight
      if (xs[top_pos[c]] && ys[bot_pos[c]]) amp = -amp;
      amp *= kInvSqrt2;
    }
    out.amps[idx] = amp;
  }
  out.zero = (out.norm_sq() < 1e-300);
  return out;
}

}  // namespace quire
