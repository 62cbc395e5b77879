#pragma once

#include "civitopic/topics.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace civitopic::metrics {

inline constexpr std::size_t kTopWords = 10;

struct InternalScores {
  double nc = 0.0;
  double nd = 0.0;
  double ws = 0.0;
};

/// NPMI of a word pair from document counts, in [-1, 1]. Never co-occurring
/// pairs give -1; pairs present in every document give 1.
double npmi(std::size_t docs_with_a, std::size_t docs_with_b, std::size_t docs_with_both, std::size_t total_docs);

/// Mean over topics of the mean pairwise NPMI of each topic's top words
/// (document co-occurrence), mapped to [0,1] by (npmi + 1) / 2.
double coherence_nc(const std::vector<topics::TopicRepresentation>& topics,
                    const std::vector<std::vector<std::string>>& documents, std::size_t top_n = kTopWords);

/// Unique words across all top-word lists over the total list length.
double diversity_nd(const std::vector<topics::TopicRepresentation>& topics, std::size_t top_n = kTopWords);

/// 0.8 * nc + 0.2 * nd; both inputs must lie in [0,1].
double weighted_score(double nc, double nd);

InternalScores internal_scores(const std::vector<topics::TopicRepresentation>& topics,
                               const std::vector<std::vector<std::string>>& documents);

/// Dense integer codes in order of first appearance.
std::vector<int> encode_labels(std::span<const std::string> labels);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);
double normalized_mutual_information(std::span<const int> a, std::span<const int> b);

struct Contingency {
  std::vector<int> row_labels;            // sorted topic ids
  std::vector<std::string> col_labels;    // sorted reference labels
  std::vector<std::size_t> counts;        // rows x cols

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  std::size_t at(std::size_t r, std::size_t c) const { return counts[r * cols() + c]; }

  /// Each row divided by its sum.
  std::vector<double> row_normalized() const;
  /// Each column divided by its sum (share of a reference category per topic).
  std::vector<double> col_normalized() const;
};

Contingency contingency(std::span<const int> topics, std::span<const std::string> labels);

/// Header row = reference labels, first column = topic ids.
void write_contingency_counts(const Contingency& table, const std::string& path);
void write_contingency_normalized(const Contingency& table, const std::vector<double>& values, const std::string& path);

}  // namespace civitopic::metrics
