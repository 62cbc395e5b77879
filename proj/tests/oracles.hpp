#pragma once

// Straightforward reference computations, written independently of the
// library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace oracle {

inline double dist(const std::vector<double>& pts, std::size_t dim, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = pts[a * dim + j] - pts[b * dim + j];
    s += d * d;
  }
  return std::sqrt(s);
}

/// k-th smallest distance to any point, the point itself included.
inline std::vector<double> core(const std::vector<double>& pts, std::size_t dim, std::size_t k) {
  const std::size_t n = pts.size() / dim;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j) d.push_back(dist(pts, dim, i, j));
    std::sort(d.begin(), d.end());
    out[i] = d[std::min(k, n) - 1];
  }
  return out;
}

/// MST edge weights over mutual reachability, by brute force: every step
/// scans all (tree, non-tree) vertex pairs for the cheapest edge.
inline std::vector<double> mst_weights(const std::vector<double>& pts, std::size_t dim,
                                       const std::vector<double>& core_d) {
  const std::size_t n = pts.size() / dim;
  std::vector<bool> in(n, false);
  in[0] = true;
  std::vector<double> weights;
  for (std::size_t step = 1; step < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!in[a]) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (in[b]) continue;
        const double w = std::max({core_d[a], core_d[b], dist(pts, dim, a, b)});
        if (w < best) {
          best = w;
          pick = b;
        }
      }
    }
    in[pick] = true;
    weights.push_back(best);
  }
  return weights;
}

inline double mst_weight(const std::vector<double>& pts, std::size_t dim, const std::vector<double>& core_d) {
  double total = 0.0;
  for (double w : mst_weights(pts, dim, core_d)) total += w;
  return total;
}

/// Adjusted Rand index from the four pair counts.
inline double ari(const std::vector<int>& x, const std::vector<int>& y) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const bool sx = x[i] == x[j], sy = y[i] == y[j];
      if (sx && sy) ++a;
      else if (sx) ++b;
      else if (sy) ++c;
      else ++d;
    }
  }
  const double den = (a + b) * (b + d) + (a + c) * (c + d);
  if (den == 0.0) return 1.0;
  return 2.0 * (a * d - b * c) / den;
}

/// Mutual information over the arithmetic mean of the two entropies.
inline double nmi(const std::vector<int>& x, const std::vector<int>& y) {
  const double n = static_cast<double>(x.size());
  std::map<int, double> px, py;
  std::map<std::pair<int, int>, double> pxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    px[x[i]] += 1.0 / n;
    py[y[i]] += 1.0 / n;
    pxy[{x[i], y[i]}] += 1.0 / n;
  }
  double hx = 0, hy = 0, mi = 0;
  for (auto& [k, p] : px) hx -= p * std::log(p);
  for (auto& [k, p] : py) hy -= p * std::log(p);
  for (auto& [k, p] : pxy) mi += p * std::log(p / (px[k.first] * py[k.second]));
  if (hx + hy == 0.0) return 1.0;
  return mi / (0.5 * (hx + hy));
}

/// Class TF-IDF straight from the definition: documents are grouped per
/// label, tf is a term's share of its class, A is the mean class length
/// over all classes, f_t the corpus frequency of t. Returns weights for
/// labels 0..K-1, keyed by term.
inline std::vector<std::map<std::string, double>> ctfidf(const std::vector<std::vector<std::string>>& docs,
                                                          const std::vector<int>& labels,
                                                          const std::vector<std::string>& boosted = {},
                                                          double multiplier = 1.0) {
  std::map<int, std::map<std::string, double>> tf;
  std::map<std::string, double> f;
  double total = 0.0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& w : docs[i]) {
      tf[labels[i]][w] += 1.0;
      f[w] += 1.0;
      total += 1.0;
    }
    tf[labels[i]];
  }
  const double avg = total / static_cast<double>(tf.size());
  int k = 0;
  for (const auto& [label, terms] : tf) k = std::max(k, label + 1);
  std::vector<std::map<std::string, double>> out(static_cast<std::size_t>(k));
  for (const auto& [label, terms] : tf) {
    if (label < 0) continue;
    double length = 0.0;
    for (const auto& [w, count] : terms) length += count;
    for (const auto& [w, count] : terms) {
      double v = count / length * std::log(1.0 + avg / f[w]);
      if (std::find(boosted.begin(), boosted.end(), w) != boosted.end()) v *= multiplier;
      out[static_cast<std::size_t>(label)][w] = v;
    }
  }
  return out;
}

/// Every labeling of n items with at most `max_blocks` blocks, as
/// restricted growth strings.
inline std::vector<std::vector<int>> partitions(std::size_t n, int max_blocks) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  auto rec = [&](auto&& self, std::size_t i, int used) -> void {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (int b = 0; b <= std::min(used, max_blocks - 1); ++b) {
      cur[i] = b;
      self(self, i + 1, std::max(used, b + 1));
    }
  };
  if (n > 0) {
    cur[0] = 0;
    rec(rec, 1, 1);
  }
  return out;
}

}  // namespace oracle
