#pragma once

#include <string>
#include <vector>

#include "quire/mps.hpp"
#include "quire/rng.hpp"

namespace quire {

/// Degree-3 lattice for the six-level PEPS construction. Every node has
/// exactly three ordered legs; each leg is either one end of an edge or a
/// dangling bond terminated in a fixed qubit state.
struct Lattice {
  struct Edge {
    int a, leg_a, b, leg_b;
  };
  struct Dangle {
    int node, leg;
    Vec state;  // 2-dim termination ket
  };

  int nodes = 0;
  std::vector<Edge> edges;
  std::vector<Dangle> dangles;

  void validate() const;  // every (node, leg) used exactly once, degrees = 3
  std::vector<std::pair<int, int>> graph_edges() const;

  /// 2 x cols grid: horizontal neighbors in each row, vertical rungs, spare
  /// legs dangling in |+>.
  static Lattice grid(int rows, int cols);

  static Lattice from_json(const std::string& text);
  std::string to_json() const;
};

struct PepsState {
  Lattice lattice;

  /// The two-qubit bond (|+>|0> + |->|1>)/sqrt2.
  static Vec bond_state();
  /// P_j as a 2 x 8 map from the three ordered leg qubits onto the two
  /// levels {2j, 2j+1} of the physical space.
  static Mat projector(int j);
};

/// Contract the bonds through the node projectors into the full state
/// (local dimension 6 per node).
StateVector build_tricluster(const Lattice& l);

struct TriReduction {
  std::vector<int> outcomes;       // j per node
  std::vector<double> step_probs;  // Born probability per node measurement
  StateVector state;               // post-measurement, two levels per node
  std::vector<int> z_parity;       // Z corrections per node (mod 2)
  double fidelity = 0;             // vs the graph cluster state, corrections applied
  bool verified = false;
};

/// Measure every node with Q_j = P_j P_j^dag (outcomes sampled by the Born
/// rule), rewrite the run as all-zeros with X errors pushed through the bonds
/// as Z corrections on neighbors, and verify against the CZ-built cluster.
TriReduction tricluster_reduce(const Lattice& l, Rng& rng);

/// Same with a fixed outcome assignment (used for exhaustive enumeration).
TriReduction tricluster_apply(const Lattice& l, const std::vector<int>& outcomes);

/// Reference oracle: |+> per node, controlled-Z per edge.
StateVector graph_cluster_state(int nodes, const std::vector<std::pair<int, int>>& edges);

/// Two cluster wires in (|+><0|, |-><1|) form joined by coupling tensors at
/// the listed (top position, bottom position) pairs. Qubit order: top sites,
/// then bottom sites.
StateVector couple_wires(int top_len, int bottom_len,
                         const std::vector<std::pair<int, int>>& couplings);

}  // namespace quire
