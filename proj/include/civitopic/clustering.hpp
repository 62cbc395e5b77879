#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace civitopic::clustering {

/// Row-major N x d view over point coordinates.
struct Points {
  std::span<const double> values;
  std::size_t dim = 0;

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t i) const { return values.subspan(i * dim, dim); }
};

double euclidean(std::span<const double> a, std::span<const double> b);

struct ClusterParams {
  std::size_t min_cluster_size = 10;
  /// 0 means "same as min_cluster_size".
  std::size_t min_samples = 0;

  std::size_t effective_min_samples() const { return min_samples == 0 ? min_cluster_size : min_samples; }
};

void validate(const ClusterParams& params);

struct ClusterAssignment {
  std::vector<int> labels;           // -1 outlier, else 0..k-1
  std::vector<double> probabilities; // 0 for outliers
  int k = 0;
};

struct MstEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

/// Distance to the min_samples-th nearest point, counting the point itself
/// as the first (min_samples = 1 gives 0).
std::vector<double> core_distances(const Points& points, std::size_t min_samples);

/// Prim's algorithm over the dense mutual-reachability graph
/// max(core_a, core_b, |a - b|). Ties go to the lower vertex index.
std::vector<MstEdge> mutual_reachability_mst(const Points& points, std::span<const double> core);

struct CondensedRow {
  int parent = 0;           // cluster id, root = 0
  std::size_t child = 0;    // point index or cluster id
  bool child_is_cluster = false;
  double lambda = 0.0;      // 1 / distance; +inf at distance 0
  std::size_t size = 1;
};

struct HdbscanResult {
  ClusterAssignment assignment;
  std::vector<double> core_distances;
  std::vector<MstEdge> mst;
  std::vector<CondensedRow> condensed;
  std::vector<double> stability;        // per condensed cluster id
  std::vector<int> selected_clusters;   // condensed ids, in output label order
};

/// Full HDBSCAN run with excess-of-mass selection (the root is never
/// selected). When every mutual-reachability distance is zero the whole set
/// is one cluster with probability 1.
HdbscanResult hdbscan(const Points& points, const ClusterParams& params);

ClusterAssignment fit_predict(const Points& points, const ClusterParams& params);

/// CSV `doc_id,topic,probability`.
void write_assignment_csv(const ClusterAssignment& assignment, std::span<const std::string> doc_ids,
                          const std::string& path);

}  // namespace civitopic::clustering
