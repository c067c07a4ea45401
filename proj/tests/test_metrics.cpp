#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "grasp/metrics.hpp"
#include "grasp/rng.hpp"
#include "oracles.hpp"

using namespace grasp;

namespace {

RankedList list_of(std::initializer_list<std::pair<const char*, double>> items) {
  std::vector<RankedItem> v;
  for (auto& [id, score] : items) v.push_back({id, score});
  return RankedList::from_scores(v);
}

std::vector<oracle::ScoredId> to_oracle(const RankedList& l) {
  std::vector<oracle::ScoredId> out;
  for (const RankedItem& it : l.items) out.push_back({it.id, it.score});
  return out;
}

}  // namespace

TEST_CASE("ranked lists sort by score with id tiebreak") {
  RankedList l = list_of({{"b", 0.3}, {"a", 0.3}, {"c", 0.9}});
  REQUIRE(l.items.size() == 3);
  CHECK(l.items[0].id == "c");
  CHECK(l.items[1].id == "a");
  CHECK(l.items[2].id == "b");
  std::vector<RankedItem> dup = {{"x", 1.0}, {"x", 0.5}};
  CHECK_THROWS_AS(RankedList::from_scores(dup), InvalidArgumentError);
}

TEST_CASE("relevance grades cover both documented boundary cases") {
  // A single item gets the top grade.
  RankedList one = list_of({{"only", 0.7}});
  auto rel = assign_relevance(one);
  CHECK(rel[0] == 15);

  // Sixteen items step down one grade per rank.
  std::vector<RankedItem> items;
  for (int i = 0; i < 16; ++i)
    items.push_back({"a" + std::to_string(i), 1.0 - 0.01 * static_cast<double>(i)});
  auto rel16 = assign_relevance(RankedList::from_scores(items));
  REQUIRE(rel16.size() == 16);
  for (int i = 0; i < 16; ++i) CHECK(rel16[static_cast<std::size_t>(i)] == 15 - i);
}

TEST_CASE("relevance grades match the oracle for many sizes") {
  for (int n : {1, 2, 3, 5, 7, 16, 17, 40, 100, 1000}) {
    std::vector<RankedItem> items;
    for (int i = 0; i < n; ++i)
      items.push_back({"a" + std::to_string(i), static_cast<double>(n - i)});
    auto got = assign_relevance(RankedList::from_scores(items));
    std::vector<oracle::ScoredId> scored;
    for (const RankedItem& it : items) scored.push_back({it.id, it.score});
    auto expect = oracle::grades(oracle::sort_ranking(scored), 16);
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] == expect.at("a" + std::to_string(i)));
      CHECK(got[i] >= 0);
      CHECK(got[i] <= 15);
    }
    // Grades never increase with rank.
    for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i] <= got[i - 1]);
  }
}

TEST_CASE("dcg matches a hand calculation") {
  // Grades 3, 2 at ranks 1, 2: (2^3 - 1)/log2(3... ) handworked below.
  RankedList truth = list_of({{"p", 0.9}, {"q", 0.8}});
  RankedList pred = truth;
  auto rel = detail::relevance_by_id(truth, 4);  // grades: p=3, q=1
  CHECK(rel.at("p") == 3);
  CHECK(rel.at("q") == 1);
  double expect = 7.0 / 1.0 + 1.0 / std::log2(3.0);
  CHECK(dcg_at_k(pred, rel, 2) == Catch::Approx(expect).epsilon(1e-14));
}

TEST_CASE("ndcg is one for the truth ordering and degrades otherwise") {
  RankedList truth = list_of({{"a", 0.9}, {"b", 0.8}, {"c", 0.7}, {"d", 0.6}});
  CHECK(ndcg_at_k(truth, truth, 4) == Catch::Approx(1.0).epsilon(1e-14));

  RankedList reversed = list_of({{"a", 0.6}, {"b", 0.7}, {"c", 0.8}, {"d", 0.9}});
  double r = ndcg_at_k(reversed, truth, 4);
  CHECK(r > 0.0);
  CHECK(r < 1.0);
}

TEST_CASE("ranking metrics agree with brute force over all small permutations") {
  const int n = 5;
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back(std::string(1, static_cast<char>('a' + i)));
  std::vector<RankedItem> truth_items;
  for (int i = 0; i < n; ++i) truth_items.push_back({ids[static_cast<std::size_t>(i)], 1.0 - 0.1 * i});
  RankedList truth = RankedList::from_scores(truth_items);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<RankedItem> pred_items;
    for (int i = 0; i < n; ++i)
      pred_items.push_back({ids[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])],
                            1.0 - 0.1 * i});
    RankedList pred = RankedList::from_scores(pred_items);
    for (int k = 1; k <= n; ++k) {
      double fast = ndcg_at_k(pred, truth, k);
      double slow = oracle::ndcg(to_oracle(pred), to_oracle(truth), k, 16);
      CHECK(std::abs(fast - slow) <= 1e-12);
      double pfast = precision_at_k(pred, truth, k);
      double pslow = oracle::precision(to_oracle(pred), to_oracle(truth), k);
      CHECK(std::abs(pfast - pslow) <= 1e-12);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("precision at k counts the overlap of top sets") {
  RankedList truth = list_of({{"a", 0.9}, {"b", 0.8}, {"c", 0.7}, {"d", 0.6}});
  RankedList pred = list_of({{"a", 0.6}, {"b", 0.9}, {"c", 0.8}, {"d", 0.7}});
  // pred top-2 = {b, c}; truth top-2 = {a, b} -> overlap 1.
  CHECK(precision_at_k(pred, truth, 2) == Catch::Approx(0.5));
  CHECK(precision_at_k(pred, truth, 4) == Catch::Approx(1.0));
  CHECK_THROWS_AS(precision_at_k(pred, truth, 0), InvalidArgumentError);
  CHECK_THROWS_AS(precision_at_k(pred, truth, 5), InvalidArgumentError);
}

TEST_CASE("kendall tau reproduces the worked three-item example") {
  // Orders (1,2,3) vs (2,1,3): one discordant pair out of three.
  std::vector<double> x = {1, 2, 3};
  std::vector<double> y = {2, 1, 3};
  CHECK(kendall_tau(x, y) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));

  std::vector<double> same = {0.5, 0.1, 0.9};
  CHECK(kendall_tau(same, same) == Catch::Approx(1.0));
  std::vector<double> flipped = {0.9, 0.1, 0.5};
  std::vector<double> anti = {-0.9, -0.1, -0.5};
  CHECK(kendall_tau(flipped, anti) == Catch::Approx(-1.0));
}

TEST_CASE("kendall tau neglects tied pairs") {
  std::vector<double> x = {1, 1, 2, 3};
  std::vector<double> y = {5, 6, 7, 8};
  // Pair (0,1) is tied in x and skipped; the remaining five pairs are all
  // concordant.
  CHECK(kendall_tau(x, y) == Catch::Approx(1.0));
  std::vector<double> all_tied = {2, 2, 2};
  std::vector<double> distinct = {1, 2, 3};
  CHECK(kendall_tau(all_tied, distinct) == 0.0);  // no comparable pairs
}

TEST_CASE("kendall tau matches brute force on random vectors") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
      x.push_back(rng.unit());
      y.push_back(rng.unit());
    }
    CHECK(kendall_tau(x, y) == Catch::Approx(oracle::kendall(x, y)).margin(1e-14));
  }
}

TEST_CASE("rank change statistics flag exactly the moved items") {
  // Three epochs over items a, b, c; b and c swap between epochs 1 and 2.
  std::vector<RankedList> per_epoch = {
      list_of({{"a", 0.9}, {"b", 0.8}, {"c", 0.7}}),
      list_of({{"a", 0.9}, {"b", 0.7}, {"c", 0.8}}),
      list_of({{"a", 0.9}, {"b", 0.7}, {"c", 0.8}}),
  };
  RankChangeStats stats = rank_change_stats(per_epoch, 16);
  REQUIRE(stats.ids == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(stats.changed.size() == 3);
  CHECK(stats.changed[0] == std::vector<int>{0, 0, 0});
  CHECK(stats.changed[1] == std::vector<int>{0, 1, 1});
  CHECK(stats.changed[2] == std::vector<int>{0, 0, 0});
  REQUIRE(stats.cumulative.size() == 3);
  CHECK(stats.cumulative[0] == std::vector<int>{0, 0, 0});
  CHECK(stats.cumulative[1] == std::vector<int>{0, 1, 1});
  CHECK(stats.cumulative[2] == std::vector<int>{0, 1, 1});
}

TEST_CASE("the convergence curve ends at exactly zero distance") {
  std::vector<RankedList> per_epoch;
  Rng rng(4);
  for (int e = 0; e < 5; ++e) {
    std::vector<RankedItem> items;
    for (int i = 0; i < 12; ++i)
      items.push_back({"m" + std::to_string(i), rng.unit()});
    per_epoch.push_back(RankedList::from_scores(items));
  }
  auto curve = ndcg_vs_final_curve(per_epoch, 0, 16);
  REQUIRE(curve.size() == 5);
  CHECK(curve.back() == 0.0);
  for (double v : curve) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
}
