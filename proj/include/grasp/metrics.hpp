#pragma once

// Ranking quality metrics.
//
// A RankedList orders items by descending score, breaking score ties by
// ascending id so every ranking is total and reproducible. Graded relevance
// for NDCG is assigned from the truth ranking with
//
//   rel(rank) = floor((levels - 1) * (1 - rank / n)),  rank zero-based,
//
// which gives the top item grade levels-1 and walks down to 0. DCG uses the
// exponential gain form  sum_i (2^rel_i - 1) / log2(i + 1)  with 1-based
// positions; NDCG divides by the DCG of the truth ordering. Kendall's tau
// counts strictly concordant minus strictly discordant pairs over the pairs
// that are tied in neither list.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "grasp/errors.hpp"

namespace grasp {

struct RankedItem {
  std::string id;
  double score = 0.0;
};

struct RankedList {
  std::vector<RankedItem> items;  // descending score, ties by ascending id

  static RankedList from_scores(std::vector<RankedItem> items) {
    std::set<std::string> ids;
    for (const RankedItem& it : items)
      if (!ids.insert(it.id).second)
        throw InvalidArgumentError("duplicate id in ranked list: " + it.id);
    std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.id < b.id;
    });
    return RankedList{std::move(items)};
  }

  std::size_t size() const { return items.size(); }
};

inline constexpr int kDefaultRelevanceLevels = 16;

// Relevance grade per item of `truth`, by rank.
inline std::vector<int> assign_relevance(const RankedList& truth,
                                         int levels = kDefaultRelevanceLevels) {
  if (truth.size() == 0) throw InvalidArgumentError("cannot grade an empty ranking");
  if (levels < 1) throw InvalidArgumentError("levels must be >= 1");
  const double n = static_cast<double>(truth.size());
  std::vector<int> rel(truth.size());
  for (std::size_t rank = 0; rank < truth.size(); ++rank) {
    int grade = static_cast<int>(
        std::floor((levels - 1) * (1.0 - static_cast<double>(rank) / n)));
    rel[rank] = std::clamp(grade, 0, levels - 1);
  }
  return rel;
}

namespace detail {

inline std::map<std::string, int> relevance_by_id(const RankedList& truth, int levels) {
  std::vector<int> rel = assign_relevance(truth, levels);
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < truth.size(); ++i) out[truth.items[i].id] = rel[i];
  return out;
}

inline void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) throw InvalidArgumentError("k out of range for list size");
}

inline void check_same_ids(const RankedList& a, const RankedList& b) {
  if (a.size() != b.size()) throw InvalidArgumentError("rankings cover different items");
  std::set<std::string> ia, ib;
  for (const RankedItem& it : a.items) ia.insert(it.id);
  for (const RankedItem& it : b.items) ib.insert(it.id);
  if (ia != ib) throw InvalidArgumentError("rankings cover different items");
}

}  // namespace detail

inline double dcg_at_k(const RankedList& predicted, const std::map<std::string, int>& rel,
                       std::size_t k) {
  detail::check_k(k, predicted.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    auto it = rel.find(predicted.items[i].id);
    if (it == rel.end())
      throw InvalidArgumentError("no relevance grade for id " + predicted.items[i].id);
    dcg += (std::exp2(it->second) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

inline double ndcg_at_k(const RankedList& predicted, const RankedList& truth, std::size_t k,
                        int levels = kDefaultRelevanceLevels) {
  detail::check_same_ids(predicted, truth);
  detail::check_k(k, predicted.size());
  auto rel = detail::relevance_by_id(truth, levels);
  double ideal = dcg_at_k(truth, rel, k);
  if (ideal == 0.0) return 0.0;
  return dcg_at_k(predicted, rel, k) / ideal;
}

// |top-k(predicted) intersect top-k(truth)| / k. Symmetric in its arguments.
inline double precision_at_k(const RankedList& predicted, const RankedList& truth,
                             std::size_t k) {
  detail::check_same_ids(predicted, truth);
  detail::check_k(k, predicted.size());
  std::set<std::string> top;
  for (std::size_t i = 0; i < k; ++i) top.insert(truth.items[i].id);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += top.count(predicted.items[i].id);
  return static_cast<double>(hits) / static_cast<double>(k);
}

// Kendall's tau over two equal-length score lists. Pairs tied in either list
// are dropped from both the numerator and the denominator; if every pair is
// tied the correlation is defined as 0.
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgumentError("score lists differ in length");
  if (x.size() < 2) throw InvalidArgumentError("kendall_tau needs at least two items");
  std::int64_t concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0))
        ++concordant;
      else
        ++discordant;
    }
  std::int64_t counted = concordant + discordant;
  if (counted == 0) return 0.0;
  return static_cast<double>(concordant - discordant) / static_cast<double>(counted);
}

// --- ranking stability over training epochs ---------------------------------

struct RankChangeStats {
  std::vector<std::string> ids;  // ascending
  // changed[e][i] is 1 when item ids[i] held a different relevance grade at
  // epoch e than at epoch e-1; row 0 is all zeros. cumulative accumulates the
  // rows.
  std::vector<std::vector<int>> changed;
  std::vector<std::vector<int>> cumulative;
};

inline RankChangeStats rank_change_stats(const std::vector<RankedList>& per_epoch,
                                         int levels = kDefaultRelevanceLevels) {
  if (per_epoch.size() < 2)
    throw InvalidArgumentError("need at least two epochs of rankings");
  for (std::size_t e = 1; e < per_epoch.size(); ++e)
    detail::check_same_ids(per_epoch[0], per_epoch[e]);

  RankChangeStats out;
  for (const RankedItem& it : per_epoch[0].items) out.ids.push_back(it.id);
  std::sort(out.ids.begin(), out.ids.end());

  std::vector<std::map<std::string, int>> grades;
  grades.reserve(per_epoch.size());
  for (const RankedList& list : per_epoch)
    grades.push_back(detail::relevance_by_id(list, levels));

  const std::size_t n = out.ids.size();
  out.changed.assign(per_epoch.size(), std::vector<int>(n, 0));
  out.cumulative.assign(per_epoch.size(), std::vector<int>(n, 0));
  for (std::size_t e = 1; e < per_epoch.size(); ++e)
    for (std::size_t i = 0; i < n; ++i) {
      out.changed[e][i] = grades[e][out.ids[i]] != grades[e - 1][out.ids[i]] ? 1 : 0;
      out.cumulative[e][i] = out.cumulative[e - 1][i] + out.changed[e][i];
    }
  return out;
}

// 1 - NDCG@k of each epoch's ranking against the final epoch as truth. The
// last entry is exactly 0. k = 0 means "full list".
inline std::vector<double> ndcg_vs_final_curve(const std::vector<RankedList>& per_epoch,
                                               std::size_t k = 0,
                                               int levels = kDefaultRelevanceLevels) {
  if (per_epoch.size() < 2)
    throw InvalidArgumentError("need at least two epochs of rankings");
  const RankedList& truth = per_epoch.back();
  std::size_t use_k = k == 0 ? truth.size() : k;
  std::vector<double> out;
  out.reserve(per_epoch.size());
  for (const RankedList& list : per_epoch)
    out.push_back(1.0 - ndcg_at_k(list, truth, use_k, levels));
  return out;
}

}  // namespace grasp
