#include "civitopic/clustering.hpp"

#include "civitopic/csv.hpp"
#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace civitopic::clustering {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  std::vector<std::size_t> parent;
  std::vector<std::size_t> size;
};

// Single-linkage dendrogram: internal node i (id N + i) joins left/right at
// `distance`.
struct Dendrogram {
  std::size_t n = 0;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  std::vector<double> distance;
  std::vector<std::size_t> size;

  std::size_t count(std::size_t node) const { return node < n ? 1 : size[node - n]; }
};

Dendrogram single_linkage(std::size_t n, std::vector<MstEdge> edges) {
  std::stable_sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    const auto xa = std::min(x.a, x.b), ya = std::min(y.a, y.b);
    if (xa != ya) return xa < ya;
    return std::max(x.a, x.b) < std::max(y.a, y.b);
  });
  Dendrogram tree;
  tree.n = n;
  UnionFind uf(2 * n - 1);
  // Maps a union-find root to the dendrogram node currently representing it.
  std::vector<std::size_t> node_of(2 * n - 1);
  std::iota(node_of.begin(), node_of.end(), 0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::size_t ra = uf.find(edges[i].a);
    const std::size_t rb = uf.find(edges[i].b);
    const std::size_t na = node_of[ra], nb = node_of[rb];
    const std::size_t id = n + i;
    tree.left.push_back(na);
    tree.right.push_back(nb);
    tree.distance.push_back(edges[i].weight);
    tree.size.push_back(tree.count(na) + tree.count(nb));
    uf.parent[ra] = id;
    uf.parent[rb] = id;
    node_of[id] = id;
  }
  return tree;
}

void collect_leaves(const Dendrogram& tree, std::size_t node, std::vector<std::size_t>& out) {
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    if (cur < tree.n) {
      out.push_back(cur);
    } else {
      stack.push_back(tree.right[cur - tree.n]);
      stack.push_back(tree.left[cur - tree.n]);
    }
  }
}

struct CondensedTree {
  std::vector<CondensedRow> rows;
  std::vector<double> birth;  // per cluster id
  std::vector<int> parent;    // per cluster id, -1 for root
};

CondensedTree condense(const Dendrogram& tree, std::size_t min_cluster_size) {
  CondensedTree ct;
  ct.birth.push_back(0.0);
  ct.parent.push_back(-1);
  const std::size_t root = 2 * tree.n - 2;
  std::vector<std::pair<std::size_t, int>> stack{{root, 0}};
  std::vector<std::size_t> leaves;
  while (!stack.empty()) {
    auto [node, cluster] = stack.back();
    stack.pop_back();
    const std::size_t i = node - tree.n;
    const std::size_t l = tree.left[i], r = tree.right[i];
    const double d = tree.distance[i];
    const double lambda = d > 0.0 ? 1.0 / d : kInf;
    const std::size_t lc = tree.count(l), rc = tree.count(r);

    auto fall_out = [&](std::size_t sub) {
      leaves.clear();
      collect_leaves(tree, sub, leaves);
      for (std::size_t p : leaves) ct.rows.push_back({cluster, p, false, lambda, 1});
    };

    if (lc >= min_cluster_size && rc >= min_cluster_size) {
      std::pair<std::size_t, int> pushes[2];
      std::size_t k = 0;
      for (std::size_t child : {l, r}) {
        const int id = static_cast<int>(ct.birth.size());
        ct.birth.push_back(lambda);
        ct.parent.push_back(cluster);
        ct.rows.push_back({cluster, static_cast<std::size_t>(id), true, lambda, tree.count(child)});
        pushes[k++] = {child, id};
      }
      // Right pushed first so the left subtree is expanded first.
      stack.push_back(pushes[1]);
      stack.push_back(pushes[0]);
    } else if (lc < min_cluster_size && rc < min_cluster_size) {
      fall_out(l);
      fall_out(r);
    } else if (lc < min_cluster_size) {
      fall_out(l);
      stack.push_back({r, cluster});
    } else {
      fall_out(r);
      stack.push_back({l, cluster});
    }
  }
  return ct;
}

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

void validate(const ClusterParams& params) {
  require(params.min_cluster_size >= 2, ErrorCode::parameter, "min_cluster_size must be >= 2");
  const std::size_t ms = params.effective_min_samples();
  require(ms >= 1, ErrorCode::parameter, "min_samples must be >= 1");
  require(ms <= params.min_cluster_size, ErrorCode::parameter, "min_samples must not exceed min_cluster_size");
}

std::vector<double> core_distances(const Points& points, std::size_t min_samples) {
  const std::size_t n = points.rows();
  require(min_samples >= 1 && min_samples <= n, ErrorCode::parameter, "min_samples out of range");
  std::vector<double> core(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = i == j ? 0.0 : euclidean(points.row(i), points.row(j));
    auto kth = dist.begin() + static_cast<std::ptrdiff_t>(min_samples - 1);
    std::nth_element(dist.begin(), kth, dist.end());
    core[i] = *kth;
  }
  return core;
}

std::vector<MstEdge> mutual_reachability_mst(const Points& points, std::span<const double> core) {
  const std::size_t n = points.rows();
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  edges.reserve(n - 1);
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, kInf);
  std::vector<std::size_t> link(n, 0);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    for (std::size_t u = 0; u < n; ++u) {
      if (in_tree[u]) continue;
      const double w = std::max({core[current], core[u], euclidean(points.row(current), points.row(u))});
      if (w < best[u] || (w == best[u] && current < link[u])) {
        best[u] = w;
        link[u] = current;
      }
    }
    std::size_t next = n;
    for (std::size_t u = 0; u < n; ++u) {
      if (!in_tree[u] && (next == n || best[u] < best[next])) next = u;
    }
    in_tree[next] = true;
    edges.push_back({link[next], next, best[next]});
    current = next;
  }
  return edges;
}

HdbscanResult hdbscan(const Points& points, const ClusterParams& params) {
  validate(params);
  const std::size_t n = points.rows();
  require(points.dim > 0, ErrorCode::parameter, "points have dimension 0");
  require(n >= params.min_cluster_size, ErrorCode::parameter,
          "need at least min_cluster_size = " + std::to_string(params.min_cluster_size) + " points, got " +
              std::to_string(n));

  HdbscanResult result;
  result.core_distances = core_distances(points, params.effective_min_samples());
  result.mst = mutual_reachability_mst(points, result.core_distances);
  auto& out = result.assignment;
  out.labels.assign(n, -1);
  out.probabilities.assign(n, 0.0);

  const bool collapsed = std::all_of(result.mst.begin(), result.mst.end(), [](const MstEdge& e) { return e.weight == 0.0; });
  if (collapsed) {
    std::fill(out.labels.begin(), out.labels.end(), 0);
    std::fill(out.probabilities.begin(), out.probabilities.end(), 1.0);
    out.k = 1;
    result.stability = {kInf};
    result.selected_clusters = {0};
    return result;
  }

  const Dendrogram tree = single_linkage(n, result.mst);
  CondensedTree ct = condense(tree, params.min_cluster_size);
  result.condensed = ct.rows;
  const std::size_t clusters = ct.birth.size();

  std::vector<double> stability(clusters, 0.0);
  std::vector<std::vector<int>> children(clusters);
  std::vector<double> death(clusters, 0.0);
  for (const auto& row : ct.rows) {
    const double birth = ct.birth[static_cast<std::size_t>(row.parent)];
    // lambda == birth (including inf == inf) contributes nothing.
    const double span = row.lambda == birth ? 0.0 : row.lambda - birth;
    stability[static_cast<std::size_t>(row.parent)] += span * static_cast<double>(row.size);
    death[static_cast<std::size_t>(row.parent)] = std::max(death[static_cast<std::size_t>(row.parent)], row.lambda);
    if (row.child_is_cluster) children[static_cast<std::size_t>(row.parent)].push_back(static_cast<int>(row.child));
  }
  result.stability = stability;

  // Excess of mass, leaves first; cluster ids grow with depth.
  std::vector<bool> selected(clusters, true);
  selected[0] = false;
  std::vector<double> best = stability;
  for (std::size_t c = clusters; c-- > 1;) {
    double subtree = 0.0;
    for (int child : children[c]) subtree += best[static_cast<std::size_t>(child)];
    if (!children[c].empty() && subtree > best[c]) {
      selected[c] = false;
      best[c] = subtree;
    } else {
      std::vector<int> stack(children[c].begin(), children[c].end());
      while (!stack.empty()) {
        const auto d = static_cast<std::size_t>(stack.back());
        stack.pop_back();
        selected[d] = false;
        stack.insert(stack.end(), children[d].begin(), children[d].end());
      }
    }
  }

  // Each point hangs under the cluster it fell out of; its label is the
  // nearest selected ancestor.
  std::vector<int> owner(clusters, -1);
  for (std::size_t c = 0; c < clusters; ++c) {
    int cur = static_cast<int>(c);
    while (cur != -1 && !selected[static_cast<std::size_t>(cur)]) cur = ct.parent[static_cast<std::size_t>(cur)];
    owner[c] = cur;
  }
  std::vector<int> point_cluster(n, -1);
  std::vector<double> point_lambda(n, 0.0);
  for (const auto& row : ct.rows) {
    if (row.child_is_cluster) continue;
    point_cluster[row.child] = owner[static_cast<std::size_t>(row.parent)];
    point_lambda[row.child] = row.lambda;
  }

  // Output labels numbered by the lowest member index.
  std::vector<int> relabel(clusters, -1);
  int next_label = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const int c = point_cluster[p];
    if (c < 0) continue;
    if (relabel[static_cast<std::size_t>(c)] < 0) {
      relabel[static_cast<std::size_t>(c)] = next_label++;
      result.selected_clusters.push_back(c);
    }
    out.labels[p] = relabel[static_cast<std::size_t>(c)];
    const double max_lambda = death[static_cast<std::size_t>(c)];
    if (max_lambda == 0.0 || !std::isfinite(point_lambda[p])) {
      out.probabilities[p] = 1.0;
    } else if (!std::isfinite(max_lambda)) {
      out.probabilities[p] = 0.0;
    } else {
      out.probabilities[p] = std::min(point_lambda[p], max_lambda) / max_lambda;
    }
  }
  out.k = next_label;
  return result;
}

ClusterAssignment fit_predict(const Points& points, const ClusterParams& params) {
  return hdbscan(points, params).assignment;
}

void write_assignment_csv(const ClusterAssignment& assignment, std::span<const std::string> doc_ids,
                          const std::string& path) {
  require(doc_ids.size() == assignment.labels.size(), ErrorCode::parameter, "doc ids do not match assignment");
  std::ostringstream out;
  csv::Writer writer(out);
  writer.write({"doc_id", "topic", "probability"});
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    writer.write({doc_ids[i], std::to_string(assignment.labels[i]), text::format_double(assignment.probabilities[i])});
  }
  io::write_file(path, out.str());
}

}  // namespace civitopic::clustering
