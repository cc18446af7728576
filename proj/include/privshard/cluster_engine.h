#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "privshard/vector_index.h"

namespace privshard::cluster {

using ClusterId = uint32_t;
using DocId = uint64_t;

struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  uint64_t seed = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<ClusterId> assignment;  // doc id -> cluster id
  std::size_t iterations_run = 0;
  double final_sse = 0.0;
  std::vector<double> sse_history;  // one entry per assignment step

  // Doc ids per cluster, ascending. Derived from `assignment`.
  std::vector<std::vector<DocId>> members;

  void RebuildMembers();
};

// Squared Euclidean distance between a sparse vector and a dense centroid.
double SquaredDistance(const vec::TfIdfVector& x, std::span<const double> centroid);

// Lloyd's iteration from a greedy k-means++ start drawn with `seed`. Stops
// when assignments are stable or after `max_iter` assignment steps. The SSE
// sequence is checked to be non-increasing; a violation throws
// Error(kInternal). Throws Error(kArgument) when k == 0, k > vectors.size()
// or max_iter == 0.
ClusterModel KMeansFit(std::span<const vec::TfIdfVector> vectors,
                       std::size_t dim, std::size_t k, std::size_t max_iter,
                       uint64_t seed);

// Nearest centroid; ties go to the lowest id.
ClusterId AssignCluster(const vec::TfIdfVector& q, const ClusterModel& model);

// All cluster ids ordered by centroid distance, ties by id.
std::vector<ClusterId> RankClusters(const vec::TfIdfVector& q,
                                    const ClusterModel& model);

struct Hit {
  DocId doc_id = 0;
  double score = 0.0;

  bool operator==(const Hit&) const = default;
};

struct SearchStats {
  std::size_t similarity_evaluations = 0;
  std::size_t clusters_probed = 0;
};

// Cosine ranking over every vector. Zero-score documents are not hits.
// Order: score descending, doc id ascending.
std::vector<Hit> FullScanSearch(const vec::TfIdfVector& q,
                                std::span<const vec::TfIdfVector> corpus,
                                std::size_t top_n, SearchStats* stats = nullptr);

// Cosine ranking restricted to the `probe` clusters nearest to q.
std::vector<Hit> RankedSearch(const vec::TfIdfVector& q,
                              const ClusterModel& model,
                              std::span<const vec::TfIdfVector> corpus,
                              std::size_t top_n, std::size_t probe = 1,
                              SearchStats* stats = nullptr);

}  // namespace privshard::cluster
