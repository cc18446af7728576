#include "privshard/cluster_engine.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "privshard/error.h"

namespace privshard::cluster {
namespace {

double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double SparseSquaredDistance(const vec::TfIdfVector& a,
                             const vec::TfIdfVector& b) {
  double d = a.norm() * a.norm() + b.norm() * b.norm() - 2.0 * a.Dot(b);
  return std::max(d, 0.0);
}

std::vector<double> Densify(const vec::TfIdfVector& v, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (const auto& [id, w] : v.entries()) out[id] = w;
  return out;
}

// Index drawn with probability proportional to weights[i].
std::size_t SampleWeighted(std::span<const double> weights, double total,
                           std::mt19937_64& rng) {
  double target = UniformUnit(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (acc > target) return i;
  }
  return last_positive;
}

// Greedy k-means++: each new center is the best of a few D^2-weighted draws.
std::vector<std::size_t> SeedCenters(std::span<const vec::TfIdfVector> vectors,
                                     std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = vectors.size();
  const std::size_t trials =
      2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<std::size_t> centers;
  std::vector<bool> chosen(n, false);

  std::size_t first = static_cast<std::size_t>(rng() % n);
  centers.push_back(first);
  chosen[first] = true;
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) {
    closest[i] = SparseSquaredDistance(vectors[i], vectors[first]);
  }

  std::vector<double> candidate_closest(n);
  std::vector<double> best_closest(n);
  while (centers.size() < k) {
    double potential = std::accumulate(closest.begin(), closest.end(), 0.0);
    if (potential <= 0.0) {
      // Fewer distinct points than k: take the next unused index.
      std::size_t next = 0;
      while (chosen[next]) ++next;
      centers.push_back(next);
      chosen[next] = true;
      continue;
    }
    std::size_t best = n;
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      std::size_t cand = SampleWeighted(closest, potential, rng);
      double cand_potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate_closest[i] = std::min(
            closest[i], SparseSquaredDistance(vectors[i], vectors[cand]));
        cand_potential += candidate_closest[i];
      }
      if (cand_potential < best_potential) {
        best_potential = cand_potential;
        best = cand;
        best_closest.swap(candidate_closest);
      }
    }
    centers.push_back(best);
    chosen[best] = true;
    closest.swap(best_closest);
  }
  return centers;
}

bool BetterHit(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

std::vector<Hit> TopN(std::vector<Hit> hits, std::size_t top_n) {
  if (hits.size() > top_n) {
    std::partial_sort(hits.begin(), hits.begin() + top_n, hits.end(), BetterHit);
    hits.resize(top_n);
  } else {
    std::sort(hits.begin(), hits.end(), BetterHit);
  }
  return hits;
}

}  // namespace

void ClusterModel::RebuildMembers() {
  members.assign(k, {});
  for (std::size_t doc = 0; doc < assignment.size(); ++doc) {
    members[assignment[doc]].push_back(doc);
  }
}

double SquaredDistance(const vec::TfIdfVector& x,
                       std::span<const double> centroid) {
  const auto& e = x.entries();
  std::size_t j = 0;
  double sum = 0.0;
  for (std::size_t d = 0; d < centroid.size(); ++d) {
    double xv = 0.0;
    if (j < e.size() && e[j].first == d) xv = e[j++].second;
    double diff = xv - centroid[d];
    sum += diff * diff;
  }
  // Entries beyond the centroid dimension sit on axes the centroid is 0 on.
  for (; j < e.size(); ++j) sum += e[j].second * e[j].second;
  return sum;
}

ClusterModel KMeansFit(std::span<const vec::TfIdfVector> vectors,
                       std::size_t dim, std::size_t k, std::size_t max_iter,
                       uint64_t seed) {
  PRIVSHARD_ENFORCE(k >= 1, ErrorCode::kArgument, "k must be at least 1");
  PRIVSHARD_ENFORCE(k <= vectors.size(), ErrorCode::kArgument,
                    "k (" + std::to_string(k) + ") exceeds corpus size (" +
                        std::to_string(vectors.size()) + ")");
  PRIVSHARD_ENFORCE(max_iter >= 1, ErrorCode::kArgument,
                    "max_iter must be at least 1");
  for (const auto& v : vectors) {
    PRIVSHARD_ENFORCE(v.empty() || v.entries().back().first < dim,
                      ErrorCode::kArgument,
                      "vector term id outside the vocabulary dimension");
  }

  const std::size_t n = vectors.size();
  std::mt19937_64 rng(seed);

  ClusterModel model;
  model.k = k;
  model.dim = dim;
  model.seed = seed;
  for (std::size_t c : SeedCenters(vectors, k, rng)) {
    model.centroids.push_back(Densify(vectors[c], dim));
  }

  std::vector<ClusterId> assignment(n, 0);
  std::vector<double> dist(n, 0.0);
  for (std::size_t iter = 1; iter <= max_iter; ++iter) {
    bool changed = iter == 1;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ClusterId best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        double d = SquaredDistance(vectors[i], model.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<ClusterId>(c);
        }
      }
      if (assignment[i] != best) changed = true;
      assignment[i] = best;
      dist[i] = best_d;
      sse += best_d;
    }
    if (!model.sse_history.empty()) {
      double prev = model.sse_history.back();
      PRIVSHARD_ENFORCE(sse <= prev + 1e-9 * std::max(1.0, prev),
                        ErrorCode::kInternal,
                        "k-means SSE increased between iterations");
    }
    model.sse_history.push_back(sse);
    model.iterations_run = iter;
    if (!changed || iter == max_iter) break;

    // Update step: centroids become member means.
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assignment[i]];
      for (const auto& [id, w] : vectors[i].entries()) {
        sums[assignment[i]][id] += w;
      }
    }
    std::vector<bool> repaired_from(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (double& x : sums[c]) x /= static_cast<double>(counts[c]);
      model.centroids[c] = std::move(sums[c]);
    }
    // Empty clusters take the point farthest from its own centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (repaired_from[i]) continue;
        double d = SquaredDistance(vectors[i], model.centroids[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) continue;
      repaired_from[far] = true;
      model.centroids[c] = Densify(vectors[far], dim);
    }
  }

  model.assignment = std::move(assignment);
  model.final_sse = model.sse_history.back();
  model.RebuildMembers();
  return model;
}

ClusterId AssignCluster(const vec::TfIdfVector& q, const ClusterModel& model) {
  ClusterId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    double d = SquaredDistance(q, model.centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<ClusterId>(c);
    }
  }
  return best;
}

std::vector<ClusterId> RankClusters(const vec::TfIdfVector& q,
                                    const ClusterModel& model) {
  std::vector<std::pair<double, ClusterId>> ranked;
  ranked.reserve(model.centroids.size());
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    ranked.emplace_back(SquaredDistance(q, model.centroids[c]),
                        static_cast<ClusterId>(c));
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<ClusterId> out;
  out.reserve(ranked.size());
  for (const auto& [d, c] : ranked) out.push_back(c);
  return out;
}

std::vector<Hit> FullScanSearch(const vec::TfIdfVector& q,
                                std::span<const vec::TfIdfVector> corpus,
                                std::size_t top_n, SearchStats* stats) {
  PRIVSHARD_ENFORCE(top_n >= 1, ErrorCode::kArgument, "top_n must be >= 1");
  std::vector<Hit> hits;
  for (std::size_t doc = 0; doc < corpus.size(); ++doc) {
    double s = vec::CosineSimilarity(q, corpus[doc]);
    if (s > 0.0) hits.push_back({doc, s});
  }
  if (stats) stats->similarity_evaluations += corpus.size();
  return TopN(std::move(hits), top_n);
}

std::vector<Hit> RankedSearch(const vec::TfIdfVector& q,
                              const ClusterModel& model,
                              std::span<const vec::TfIdfVector> corpus,
                              std::size_t top_n, std::size_t probe,
                              SearchStats* stats) {
  PRIVSHARD_ENFORCE(top_n >= 1, ErrorCode::kArgument, "top_n must be >= 1");
  PRIVSHARD_ENFORCE(probe >= 1, ErrorCode::kArgument, "probe must be >= 1");
  std::vector<ClusterId> clusters;
  if (probe == 1) {
    clusters.push_back(AssignCluster(q, model));
  } else {
    clusters = RankClusters(q, model);
    clusters.resize(std::min(probe, clusters.size()));
  }
  std::vector<Hit> hits;
  std::size_t evaluations = 0;
  for (ClusterId c : clusters) {
    for (DocId doc : model.members[c]) {
      double s = vec::CosineSimilarity(q, corpus[doc]);
      ++evaluations;
      if (s > 0.0) hits.push_back({doc, s});
    }
  }
  if (stats) {
    stats->similarity_evaluations += evaluations;
    stats->clusters_probed += clusters.size();
  }
  return TopN(std::move(hits), top_n);
}

}  // namespace privshard::cluster
