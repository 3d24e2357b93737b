#include <algorithm>
#include <numeric>

#include <catch_amalgamated.hpp>

#include "helpers.hpp"
#include "semchange/measures.hpp"

using namespace semchange;
using namespace testing_helpers;

namespace {

// Graph whose uses are laid out by sense: d[i] C1 uses and e[i] C2 uses in sense i.
std::pair<UsageGraph, Clustering> sense_layout(const std::vector<long>& d, const std::vector<long>& e) {
  UsageGraph g("w");
  Clustering c;
  for (std::size_t s = 0; s < d.size(); ++s) {
    for (long i = 0; i < d[s]; ++i) {
      const auto id = "a" + std::to_string(s) + "_" + std::to_string(i);
      g.add_node(use(id, Epoch::C1));
      c.assign(id, static_cast<int>(s));
    }
    for (long i = 0; i < e[s]; ++i) {
      const auto id = "b" + std::to_string(s) + "_" + std::to_string(i);
      g.add_node(use(id, Epoch::C2));
      c.assign(id, static_cast<int>(s));
    }
  }
  return {g, c};
}

}  // namespace

TEST_CASE("published change-score fixtures") {
  // Reference values from scipy.spatial.distance.jensenshannon(base=2).
  const std::vector<long> ld{58, 0, 4, 0}, le{52, 14, 5, 1};
  const std::vector<long> ed{12, 45, 0, 1}, ee{85, 6, 1, 1};
  CHECK(graded_change(ld, le) == Catch::Approx(0.33786822016960444).margin(1e-12));
  CHECK(graded_change(ed, ee) == Catch::Approx(0.660060310523166).margin(1e-12));
  CHECK(std::abs(graded_change(ld, le) - 0.34) <= 0.005);
  CHECK(std::abs(graded_change(ed, ee) - 0.66) <= 0.005);
  CHECK(binary_change(ld, le, 2, 5) == 1);
  CHECK(binary_change(ed, ee, 2, 5) == 0);
  // cell
  CHECK(binary_change({12, 18, 0}, {4, 11, 18}, 2, 5) == 1);
  CHECK(binary_change({12, 18, 0}, {4, 11, 18}, 0, 1) == 1);
  CHECK(graded_change({12, 18, 0}, {4, 11, 18}) == Catch::Approx(0.5977375709662975).margin(1e-12));
  CHECK(graded_change({3, 1, 0, 2}, {0, 0, 5, 1}) == Catch::Approx(0.8777391648356462).margin(1e-12));
}

TEST_CASE("binary and graded change are independent") {
  const auto ledning = change_scores("ledning", {{58, 0, 4, 0}, {52, 14, 5, 1}}, {2, 5});
  const auto fliege = change_scores("Eintagsfliege", {{12, 45, 0, 1}, {85, 6, 1, 1}}, {2, 5});
  CHECK((ledning.binary == 1 && ledning.graded < 0.4));
  CHECK((fliege.binary == 0 && fliege.graded > 0.6));
}

TEST_CASE("sfd from a clustering recovers the ledning distributions") {
  const std::vector<long> d{58, 0, 4, 0}, e{52, 14, 5, 1};
  auto [g, c] = sense_layout(d, e);
  g.add_node(SenseDefNode{"def", "a gloss", "w"});
  c.assign("def", 0);
  const auto sfd = sfd_from_clustering(g, c);
  CHECK(sfd.d == d);
  CHECK(sfd.e == e);
  CHECK(std::accumulate(sfd.d.begin(), sfd.d.end(), 0L) == static_cast<long>(subgraph(g, Epoch::C1).nodes().size()));
  CHECK(std::accumulate(sfd.e.begin(), sfd.e.end(), 0L) == static_cast<long>(subgraph(g, Epoch::C2).nodes().size()));
  const auto s = change_scores(g, c);
  CHECK(s.binary == 1);
  CHECK(s.thresholds.k == 2);
  CHECK(s.thresholds.n == 5);
}

TEST_CASE("all-C1 uses leave E at zero") {
  auto [g, c] = sense_layout({3, 2}, {0, 0});
  const auto sfd = sfd_from_clustering(g, c);
  CHECK(sfd.e == std::vector<long>{0, 0});
  CHECK_THROWS_AS(graded_change(sfd.d, sfd.e), Error);
}

TEST_CASE("thresholds by sample size") {
  CHECK(thresholds_for_sample_size(30).k == 0);
  CHECK(thresholds_for_sample_size(30).n == 1);
  CHECK(thresholds_for_sample_size(31).k == 2);
  CHECK(thresholds_for_sample_size(31).n == 5);
  CHECK(thresholds_for_sample_size(100).n == 5);
  CHECK_THROWS_AS(thresholds_for_sample_size(0), Error);
}

TEST_CASE("graded change bounds and invariances") {
  CHECK(graded_change({3, 4}, {3, 4}) == 0.0);
  CHECK(graded_change({3, 4}, {6, 8}) == Catch::Approx(0.0).margin(1e-12));
  CHECK(graded_change({3, 0}, {0, 4}) == 1.0);
  CHECK(graded_change({3, 0, 0}, {0, 4, 0}) == 1.0);
  CHECK_THROWS_AS(graded_change({0, 0}, {1, 2}), Error);
  CHECK_THROWS_AS(graded_change({1}, {1, 2}), Error);
  CHECK_THROWS_AS(graded_change({-1, 2}, {1, 2}), Error);

  Rng rng(17);
  for (int t = 0; t < 500; ++t) {
    const std::size_t k = 1 + uniform_index(rng, 6);
    std::vector<long> d(k), e(k);
    for (auto& x : d) x = static_cast<long>(uniform_index(rng, 20));
    for (auto& x : e) x = static_cast<long>(uniform_index(rng, 20));
    d[0] += 1;
    e[k - 1] += 1;
    const double g = graded_change(d, e);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
    CHECK(g == Catch::Approx(graded_change(e, d)).margin(1e-15));
    auto d3 = d;
    for (auto& x : d3) x *= 3;
    CHECK(g == Catch::Approx(graded_change(d3, e)).margin(1e-12));
    // Joint permutation leaves both scores unchanged.
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle(perm, rng);
    std::vector<long> pd(k), pe(k);
    for (std::size_t i = 0; i < k; ++i) {
      pd[i] = d[perm[i]];
      pe[i] = e[perm[i]];
    }
    CHECK(binary_change(d, e, 2, 5) == binary_change(pd, pe, 2, 5));
    CHECK(g == Catch::Approx(graded_change(pd, pe)).margin(1e-12));
  }
}

TEST_CASE("zero-in-both senses are ignored") {
  CHECK(graded_change({5, 0, 3}, {2, 0, 7}) == Catch::Approx(graded_change({5, 3}, {2, 7})).margin(1e-15));
  CHECK(binary_change({5, 0, 3}, {2, 0, 7}, 2, 5) == binary_change({5, 3}, {2, 7}, 2, 5));
}
