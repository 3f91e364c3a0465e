#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>
#include <vector>

#include "sparsepce/multi_index.hpp"

using sparsepce::MultiIndexSet;
using sparsepce::total_degree_cardinality;

TEST_CASE("cardinality matches known counts") {
  CHECK(total_degree_cardinality(2, 20) == 231);
  CHECK(total_degree_cardinality(20, 2) == 231);
  CHECK(total_degree_cardinality(10, 3) == 286);
  CHECK(total_degree_cardinality(3, 2) == 10);
  CHECK(total_degree_cardinality(6, 4) == 210);
  CHECK(total_degree_cardinality(7, 0) == 1);
  CHECK(total_degree_cardinality(1, 5) == 6);
}

TEST_CASE("cardinality rejects bad arguments") {
  CHECK_THROWS_AS(total_degree_cardinality(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(total_degree_cardinality(-1, 3), std::invalid_argument);
  CHECK_THROWS_AS(total_degree_cardinality(2, -1), std::invalid_argument);
  // C(70,35) exceeds 64 bits.
  CHECK_THROWS_AS(total_degree_cardinality(35, 35), std::overflow_error);
}

TEST_CASE("one-dimensional set enumerates degrees in order") {
  const MultiIndexSet set(1, 5);
  REQUIRE(set.size() == 6);
  for (std::size_t j = 0; j < 6; ++j) CHECK(set[j][0] == static_cast<int>(j));
}

TEST_CASE("graded ordering of the 2-d quadratic set") {
  const MultiIndexSet set(2, 2);
  const std::vector<std::vector<int>> expected = {{0, 0}, {1, 0}, {0, 1},
                                                  {2, 0}, {1, 1}, {0, 2}};
  REQUIRE(set.size() == expected.size());
  for (std::size_t j = 0; j < expected.size(); ++j) {
    CHECK(set[j][0] == expected[j][0]);
    CHECK(set[j][1] == expected[j][1]);
  }
}

TEST_CASE("enumeration size equals cardinality over a (d, k) grid") {
  for (int d = 1; d <= 8; ++d)
    for (int k = 0; k <= 8; ++k) {
      const MultiIndexSet set(d, k);
      CHECK(set.size() == total_degree_cardinality(d, k));
    }
  CHECK(MultiIndexSet(2, 20).size() == 231);
  CHECK(MultiIndexSet(20, 2).size() == 231);
}

TEST_CASE("every index appears exactly once and respects the degree bound") {
  const MultiIndexSet set(4, 5);
  std::set<std::vector<int>> seen;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const auto alpha = set[j];
    int total = 0;
    for (int component : alpha) {
      CHECK(component >= 0);
      total += component;
    }
    CHECK(total <= 5);
    seen.insert(std::vector<int>(alpha.begin(), alpha.end()));
  }
  CHECK(seen.size() == set.size());
}

TEST_CASE("set is closed under decrementing any positive component") {
  const MultiIndexSet set(3, 6);
  std::set<std::vector<int>> members;
  for (std::size_t j = 0; j < set.size(); ++j)
    members.insert(std::vector<int>(set[j].begin(), set[j].end()));
  for (const auto& alpha : members) {
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (alpha[i] == 0) continue;
      std::vector<int> reduced = alpha;
      --reduced[i];
      CHECK(members.count(reduced) == 1);
    }
  }
}

TEST_CASE("two constructions agree element for element") {
  const MultiIndexSet a(5, 4);
  const MultiIndexSet b(5, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j)
    for (int i = 0; i < 5; ++i)
      CHECK(a[j][static_cast<std::size_t>(i)] == b[j][static_cast<std::size_t>(i)]);
}

TEST_CASE("csv listing has one row per index") {
  const MultiIndexSet set(2, 1);
  std::ostringstream out;
  set.write_csv(out);
  CHECK(out.str() == "0,0\n1,0\n0,1\n");
}
