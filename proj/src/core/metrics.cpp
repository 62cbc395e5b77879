#include "civitopic/metrics.hpp"

#include "civitopic/csv.hpp"
#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace civitopic::metrics {

double npmi(std::size_t docs_with_a, std::size_t docs_with_b, std::size_t docs_with_both, std::size_t total_docs) {
  if (docs_with_both == 0) return -1.0;
  if (docs_with_both == total_docs) return 1.0;
  // With a = log(N/n_a), b = log(N/n_b), c = log(N/n_ab) this is
  // (a + b) / c - 1; since 0 <= a, b <= c the result stays in [-1, 1] under
  // monotone rounding.
  const auto n = static_cast<double>(total_docs);
  const double a = std::log(n / static_cast<double>(docs_with_a));
  const double b = std::log(n / static_cast<double>(docs_with_b));
  const double c = std::log(n / static_cast<double>(docs_with_both));
  return (a + b) / c - 1.0;
}

namespace {

std::vector<std::string> top_terms(const topics::TopicRepresentation& t, std::size_t top_n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(top_n, t.top_words.size()); ++i) out.push_back(t.top_words[i].term);
  return out;
}

std::size_t intersection_size(const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
  std::size_t i = 0, j = 0, count = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) {
      ++i;
    } else if (y[j] < x[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

}  // namespace

double coherence_nc(const std::vector<topics::TopicRepresentation>& topic_list,
                    const std::vector<std::vector<std::string>>& documents, std::size_t top_n) {
  require(!topic_list.empty(), ErrorCode::parameter, "coherence needs at least one topic");
  require(!documents.empty(), ErrorCode::parameter, "coherence needs a non-empty reference corpus");

  std::map<std::string, std::vector<std::size_t>> postings;
  int max_len = 1;
  for (const auto& t : topic_list) {
    require(std::min(top_n, t.top_words.size()) >= 2, ErrorCode::parameter,
            "topic " + std::to_string(t.topic_id) + " has fewer than 2 top words");
    for (const auto& term : top_terms(t, top_n)) {
      postings[term];
      max_len = std::max(max_len, static_cast<int>(std::count(term.begin(), term.end(), ' ')) + 1);
    }
  }
  std::set<std::string> seen;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    seen.clear();
    for (auto& gram : topics::ngrams(documents[d], {1, std::min(max_len, 2)})) {
      auto it = postings.find(gram);
      if (it != postings.end() && seen.insert(gram).second) it->second.push_back(d);
    }
  }

  const std::size_t n_docs = documents.size();
  double total = 0.0;
  for (const auto& t : topic_list) {
    const auto terms = top_terms(t, top_n);
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      for (std::size_t j = i + 1; j < terms.size(); ++j) {
        const auto& pi = postings.at(terms[i]);
        const auto& pj = postings.at(terms[j]);
        double value = -1.0;
        if (!pi.empty() && !pj.empty()) value = npmi(pi.size(), pj.size(), intersection_size(pi, pj), n_docs);
        sum += (value + 1.0) / 2.0;
        ++pairs;
      }
    }
    total += sum / static_cast<double>(pairs);
  }
  return total / static_cast<double>(topic_list.size());
}

double diversity_nd(const std::vector<topics::TopicRepresentation>& topic_list, std::size_t top_n) {
  require(!topic_list.empty(), ErrorCode::parameter, "diversity needs at least one topic");
  std::set<std::string> unique;
  std::size_t listed = 0;
  for (const auto& t : topic_list) {
    for (auto& term : top_terms(t, top_n)) {
      unique.insert(std::move(term));
      ++listed;
    }
  }
  if (listed == 0) return 0.0;
  return static_cast<double>(unique.size()) / static_cast<double>(listed);
}

double weighted_score(double nc, double nd) {
  require(nc >= 0.0 && nc <= 1.0, ErrorCode::parameter, "nc must lie in [0,1]");
  require(nd >= 0.0 && nd <= 1.0, ErrorCode::parameter, "nd must lie in [0,1]");
  return 0.8 * nc + 0.2 * nd;
}

InternalScores internal_scores(const std::vector<topics::TopicRepresentation>& topic_list,
                               const std::vector<std::vector<std::string>>& documents) {
  InternalScores s;
  s.nc = coherence_nc(topic_list, documents);
  s.nd = diversity_nd(topic_list);
  s.ws = weighted_score(s.nc, s.nd);
  return s;
}

std::vector<int> encode_labels(std::span<const std::string> labels) {
  std::unordered_map<std::string, int> codes;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto [it, inserted] = codes.emplace(l, static_cast<int>(codes.size()));
    out.push_back(it->second);
  }
  return out;
}

namespace {

struct Table {
  std::map<std::pair<int, int>, std::size_t> cells;
  std::map<int, std::size_t> a_sums;
  std::map<int, std::size_t> b_sums;
  std::size_t n = 0;
};

Table tabulate(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size(), ErrorCode::parameter,
          "label lists differ in length (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  require(a.size() >= 2, ErrorCode::parameter, "agreement metrics need at least 2 labels");
  Table t;
  t.n = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++t.cells[{a[i], b[i]}];
    ++t.a_sums[a[i]];
    ++t.b_sums[b[i]];
  }
  return t;
}

double pairs(std::size_t k) { return static_cast<double>(k) * static_cast<double>(k - (k > 0 ? 1 : 0)) / 2.0; }

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  const Table t = tabulate(a, b);
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, count] : t.cells) index += pairs(count);
  for (const auto& [key, count] : t.a_sums) sum_a += pairs(count);
  for (const auto& [key, count] : t.b_sums) sum_b += pairs(count);
  const double total = pairs(t.n);
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  // Zero only when both partitions are all-singletons or both all-one-cluster.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double normalized_mutual_information(std::span<const int> a, std::span<const int> b) {
  const Table t = tabulate(a, b);
  const auto n = static_cast<double>(t.n);
  auto entropy = [n](const std::map<int, std::size_t>& sums) {
    double h = 0.0;
    for (const auto& [key, count] : sums) {
      const double p = static_cast<double>(count) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(t.a_sums);
  const double hb = entropy(t.b_sums);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  const bool one_to_one = t.cells.size() == t.a_sums.size() && t.cells.size() == t.b_sums.size();
  if (one_to_one) return 1.0;
  double mi = 0.0;
  for (const auto& [key, count] : t.cells) {
    const auto nij = static_cast<double>(count);
    const auto ai = static_cast<double>(t.a_sums.at(key.first));
    const auto bj = static_cast<double>(t.b_sums.at(key.second));
    mi += nij / n * std::log(n * nij / (ai * bj));
  }
  mi = std::max(0.0, mi);
  const double nmi = mi / (0.5 * (ha + hb));
  // Rounding guard; mathematically MI <= min(Ha, Hb).
  return std::min(1.0, nmi);
}

std::vector<double> Contingency::row_normalized() const {
  std::vector<double> out(counts.size(), 0.0);
  for (std::size_t r = 0; r < rows(); ++r) {
    std::size_t sum = 0;
    for (std::size_t c = 0; c < cols(); ++c) sum += at(r, c);
    if (sum == 0) continue;
    for (std::size_t c = 0; c < cols(); ++c) {
      out[r * cols() + c] = static_cast<double>(at(r, c)) / static_cast<double>(sum);
    }
  }
  return out;
}

std::vector<double> Contingency::col_normalized() const {
  std::vector<double> out(counts.size(), 0.0);
  for (std::size_t c = 0; c < cols(); ++c) {
    std::size_t sum = 0;
    for (std::size_t r = 0; r < rows(); ++r) sum += at(r, c);
    if (sum == 0) continue;
    for (std::size_t r = 0; r < rows(); ++r) {
      out[r * cols() + c] = static_cast<double>(at(r, c)) / static_cast<double>(sum);
    }
  }
  return out;
}

Contingency contingency(std::span<const int> topic_labels, std::span<const std::string> labels) {
  require(topic_labels.size() == labels.size(), ErrorCode::parameter, "label lists differ in length");
  Contingency t;
  std::set<int> rows(topic_labels.begin(), topic_labels.end());
  std::set<std::string> cols(labels.begin(), labels.end());
  t.row_labels.assign(rows.begin(), rows.end());
  t.col_labels.assign(cols.begin(), cols.end());
  t.counts.assign(t.rows() * t.cols(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = static_cast<std::size_t>(
        std::lower_bound(t.row_labels.begin(), t.row_labels.end(), topic_labels[i]) - t.row_labels.begin());
    const auto c = static_cast<std::size_t>(
        std::lower_bound(t.col_labels.begin(), t.col_labels.end(), labels[i]) - t.col_labels.begin());
    ++t.counts[r * t.cols() + c];
  }
  return t;
}

namespace {

template <typename Cell>
void write_matrix(const Contingency& table, const std::string& path, Cell cell) {
  std::ostringstream out;
  csv::Writer writer(out);
  csv::Row header{"topic"};
  header.insert(header.end(), table.col_labels.begin(), table.col_labels.end());
  writer.write(header);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    csv::Row row{std::to_string(table.row_labels[r])};
    for (std::size_t c = 0; c < table.cols(); ++c) row.push_back(cell(r, c));
    writer.write(row);
  }
  io::write_file(path, out.str());
}

}  // namespace

void write_contingency_counts(const Contingency& table, const std::string& path) {
  write_matrix(table, path, [&](std::size_t r, std::size_t c) { return std::to_string(table.at(r, c)); });
}

void write_contingency_normalized(const Contingency& table, const std::vector<double>& values, const std::string& path) {
  require(values.size() == table.counts.size(), ErrorCode::parameter, "normalized values do not match the table");
  write_matrix(table, path,
               [&](std::size_t r, std::size_t c) { return text::format_double(values[r * table.cols() + c]); });
}

}  // namespace civitopic::metrics
