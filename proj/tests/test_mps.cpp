#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quire/mps.hpp"
#include "quire/protocols.hpp"

using namespace quire;

namespace {

constexpr double kPi = 3.14159265358979323846;

Mps ghz_chain(int n) {
  double s = 1.0 / std::sqrt(2.0);
  return make_chain(ghz_site(), n, Vec{s, s}, Vec{std::sqrt(2.0) * s, std::sqrt(2.0) * s});
}

}  // namespace

TEST_CASE("expand: single site") {
  Mps m;
  m.sites.push_back(Site({pauli('I'), pauli('Z')}));
  m.left = {1, 0};
  m.right = {1, 0};
  StateVector v = expand(m);
  CHECK(v.dims == std::vector<int>{2});
  CHECK(std::abs(v.amps[0] - cx(1, 0)) < 1e-15);
  CHECK(std::abs(v.amps[1] - cx(1, 0)) < 1e-15);
}

TEST_CASE("expand: (I,Z) with |+> boundaries supports even-parity strings") {
  // <R| Z^{#1s} |L> with |L> = |+>, <R| = sqrt2 <+| is 1 on even-weight
  // strings and 0 on odd ones: the GHZ state rotated to the X basis.
  double s = 1.0 / std::sqrt(2.0);
  Mps raw = make_chain(Site({pauli('I'), pauli('Z')}), 3, Vec{s, s}, Vec{s, s});
  StateVector v = expand(raw);
  for (size_t idx = 0; idx < v.amps.size(); ++idx) {
    int weight = __builtin_popcount(static_cast<unsigned>(idx));
    if (weight % 2 == 0)
      CHECK(std::abs(v.amps[idx] - cx(1, 0)) < 1e-12);
    else
      CHECK(std::abs(v.amps[idx]) < 1e-12);
  }
  // H on every site carries it onto |000> + |111>
  StateVector rot = v;
  for (int s = 0; s < 3; ++s) rot = apply_site_op(rot, s, pauli('H'));
  StateVector ghz;
  ghz.dims = {2, 2, 2};
  ghz.amps.assign(8, cx{});
  ghz.amps[0] = 1;
  ghz.amps[7] = 1;
  CHECK(fidelity(rot.amps, ghz.amps) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expand: 2-site cluster matches the CZ oracle") {
  // (H,HZ)/sqrt2 with |L> = |+>, <R| = <0|
  double s = 1.0 / std::sqrt(2.0);
  Mps m = make_chain(wire_site(kPi / 4), 2, Vec{s, s}, Vec{1, 0});
  StateVector v = expand(m);
  // CZ |+>|+> amplitudes: (1,1,1,-1)/2
  std::vector<cx> cz{0.5, 0.5, 0.5, -0.5};
  CHECK(fidelity(v.amps, cz) == doctest::Approx(1.0).epsilon(1e-12));

  // the exact-form site (|x><h_x|) with |L> = |0>, <R| = (1,1) gives the
  // same state with equal amplitudes
  Mps m2 = make_chain(cluster_site(), 2, Vec{1, 0}, Vec{1, 1});
  StateVector v2 = expand(m2);
  CHECK(fidelity(v2.amps, cz) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expand: ordering fixes the amplitude of mixed strings") {
  // two distinct sites so a transpose bug cannot hide: site1 (I, X), site2 (I, Z)
  Mps m;
  m.sites.push_back(Site({pauli('I'), pauli('X')}));
  m.sites.push_back(Site({pauli('I'), pauli('Z')}));
  m.left = {1, 0};   // |0>
  m.right = {1, 1};  // <0| + <1|
  StateVector v = expand(m);
  // amp(x1=1, x2=0) = <R| I . X |0> = <R|1> = 1
  CHECK(std::abs(v.amps[v.index({1, 0})] - cx(1, 0)) < 1e-15);
  // amp(x1=0, x2=1) = <R| Z . I |0> = <R|0> = 1
  CHECK(std::abs(v.amps[v.index({0, 1})] - cx(1, 0)) < 1e-15);
  // amp(1,1) = <R| Z X |0> = <R| Z |1> = -1
  CHECK(std::abs(v.amps[v.index({1, 1})] - cx(-1, 0)) < 1e-15);
}

TEST_CASE("expand cap") {
  Mps m = ghz_chain(21);  // 2^21 > cap
  CHECK_THROWS_AS(expand(m), std::length_error);
}

TEST_CASE("expand is multilinear in site matrices") {
  Rng rng(5);
  auto random_site = [&](int d) {
    std::vector<Mat> mats;
    for (int x = 0; x < d; ++x) {
      Mat a(2, 2);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) a(r, c) = cx(rng.uniform() - 0.5, rng.uniform() - 0.5);
      mats.push_back(a);
    }
    return Site(std::move(mats));
  };
  for (int trial = 0; trial < 5; ++trial) {
    Mps m;
    for (int i = 0; i < 4; ++i) m.sites.push_back(random_site(2));
    m.left = {cx(rng.uniform(), rng.uniform()), cx(rng.uniform(), rng.uniform())};
    m.right = {cx(rng.uniform(), rng.uniform()), cx(rng.uniform(), rng.uniform())};

    int target = trial % 4;
    Site extra = random_site(2);
    Mps sum = m;
    for (int x = 0; x < 2; ++x) sum.sites[target].mats[x] = m.sites[target].mats[x] + extra.mats[x];
    Mps other = m;
    other.sites[target] = extra;

    StateVector vs = expand(sum), v1 = expand(m), v2 = expand(other);
    for (size_t i = 0; i < vs.amps.size(); ++i)
      CHECK(std::abs(vs.amps[i] - v1.amps[i] - v2.amps[i]) < 1e-10);
  }
}

TEST_CASE("check_normalized and normalize_site") {
  CHECK(check_normalized(wire_site(kPi / 4)));           // (H,HZ)/sqrt2
  CHECK(check_normalized(aklt_spin1_site()));            // spin-1 tuple / sqrt3
  CHECK_FALSE(check_normalized(Site({pauli('I'), pauli('X'), pauli('Z')})));

  Site n1 = normalize_site(Site({pauli('I'), pauli('X'), pauli('Z')}));
  CHECK(check_normalized(n1));
  CHECK((n1.mats[0] - pauli('I') * (1.0 / std::sqrt(3.0))).norm_max() < 1e-12);

  Site n2 = normalize_site(Site({pauli('H'), pauli('H') * pauli('Z')}));
  CHECK(check_normalized(n2));

  // (sin t Z, cos t sqrt2 |0><1|, cos t sqrt2 |1><0|) at t = pi/4: c = 3/2
  double t = kPi / 4;
  Site s({pauli('Z') * std::sin(t), Mat::ketbra(2, 0, 1) * (std::sqrt(2.0) * std::cos(t)),
          Mat::ketbra(2, 1, 0) * (std::sqrt(2.0) * std::cos(t))});
  Mat sum(2, 2);
  for (const auto& a : s.mats) sum = sum + a.adjoint() * a;
  cx c;
  CHECK(sum.is_scalar_multiple_of_identity(1e-12, &c));
  CHECK(std::abs(c - cx(1.5, 0)) < 1e-12);
  CHECK(check_normalized(normalize_site(s)));

  // not proportional to the identity: refuse
  Site bad({pauli('I'), Mat(2, 2, {1, 0, 0, 0})});
  CHECK_THROWS_AS(normalize_site(bad), std::invalid_argument);
}

TEST_CASE("born_measure: identity measurement is a no-op") {
  Mps m = ghz_chain(3);
  Rng rng(1);
  BornResult r = born_measure(m, 1, MeasurementOp::identity_op(2), rng);
  CHECK(r.probability == doctest::Approx(1.0));
  CHECK(fidelity(expand(r.post).amps, expand(m).amps) == doctest::Approx(1.0));
}

TEST_CASE("born_measure: projective outcome on the GHZ chain") {
  // {|0><0|, |1><1|} on the even-parity state: outcome 0 with prob 1/2,
  // posterior is a product state
  Mps m = ghz_chain(3);
  std::vector<double> p = born_probabilities(m, 0, MeasurementOp::computational(2));
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

  Rng rng(2);
  BornResult r = born_measure(m, 0, MeasurementOp::computational(2), rng);
  StateVector post = expand(r.post);
  // posterior = |o> (x) (even-parity state of the rest): check factorization
  StateVector rest = factor_out_site(post, 0, r.outcome);
  CHECK(rest.dims.size() == 2);
}

TEST_CASE("born_measure posterior equals Kraus applied to the prior, every outcome") {
  Mps m = make_chain(aklt_site(), 4, protocol_left_boundary(), protocol_right_boundary());
  MeasurementOp n1 = MeasurementOp::projective_split(3, {0, 1});
  StateVector prior = expand(m);
  std::vector<double> probs = born_probabilities(m, 2, n1);
  double total = prior.norm_sq();
  for (int o = 0; o < n1.outcomes(); ++o) {
    StateVector direct = apply_site_op(prior, 2, n1.kraus[o]);
    CHECK(direct.norm_sq() / total == doctest::Approx(probs[o]).epsilon(1e-9));
    // posterior mps expands to the same vector
    Mps post = m;
    Site ns = m.sites[2];
    for (int row = 0; row < 3; ++row) {
      Mat b(2, 2);
      for (int col = 0; col < 3; ++col)
        if (n1.kraus[o](row, col) != cx{}) b = b + m.sites[2].mats[col] * n1.kraus[o](row, col);
      ns.mats[row] = b;
    }
    post.sites[2] = ns;
    if (direct.norm_sq() > 1e-12)
      CHECK(fidelity(expand(post).amps, direct.amps) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("born_measure: AKLT two-dimensional outcome has probability 2/3 in the bulk") {
  // translation-symmetric chain; the maximally mixed right boundary is the
  // average over an orthonormal <R| basis
  int n = 8;
  double p_succ = 0;
  for (int b = 0; b < 2; ++b) {
    Vec right{0, 0};
    right[b] = 1;
    Mps m = make_chain(aklt_site(), n, Vec{1, 0}, right);
    std::vector<double> p = born_probabilities(m, 0, MeasurementOp::projective_split(3, {0, 1}));
    double w = expand(m).norm_sq();
    p_succ += p[0] * w;  // weight by the branch norm
  }
  // sum over the basis elements normalizes to the mixed-boundary probability
  double total = 0;
  for (int b = 0; b < 2; ++b) {
    Vec right{0, 0};
    right[b] = 1;
    Mps m = make_chain(aklt_site(), n, Vec{1, 0}, right);
    total += expand(m).norm_sq();
  }
  CHECK(p_succ / total == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("sampled outcome frequencies match probabilities (3 sigma)") {
  Mps m = make_chain(aklt_site(), 5, protocol_left_boundary(), protocol_right_boundary());
  MeasurementOp n1 = MeasurementOp::projective_split(3, {0, 1});
  std::vector<double> p = born_probabilities(m, 2, n1);
  int trials = 20000;
  Rng root(99);
  int succ = 0;
  for (int i = 0; i < trials; ++i) {
    Rng r = root.split(i);
    if (born_measure(m, 2, n1, r).outcome == 0) ++succ;
  }
  double freq = static_cast<double>(succ) / trials;
  double sigma = std::sqrt(p[0] * (1 - p[0]) / trials);
  CHECK(std::abs(freq - p[0]) < 3 * sigma + 1e-12);
}

TEST_CASE("mps json round trip") {
  Mps m = make_chain(aklt_site(), 3, protocol_left_boundary(), protocol_right_boundary());
  std::string text = mps_to_json(m);
  Mps back = mps_from_json(text);
  CHECK(back.size() == 3);
  CHECK(fidelity(expand(back).amps, expand(m).amps) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(mps_from_json("{\"left\": [[1,0]]}"));
}
