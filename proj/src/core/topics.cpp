#include "civitopic/topics.hpp"

#include "civitopic/csv.hpp"
#include "civitopic/embeddings.hpp"
#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace civitopic::topics {

void validate(const NgramRange& range) {
  require(range.lo >= 1 && range.lo <= range.hi && range.hi <= 2, ErrorCode::parameter,
          "n_gram_range must satisfy 1 <= lo <= hi <= 2");
}

std::vector<std::string> ngrams(std::span<const std::string> tokens, NgramRange range) {
  std::vector<std::string> out;
  for (int n = range.lo; n <= range.hi; ++n) {
    const auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < len; ++k) {
        gram.push_back(' ');
        gram += tokens[i + k];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

std::optional<std::size_t> Vectorizer::term_index(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vectorizer make_vectorizer(NgramRange range, std::vector<std::string> vocabulary) {
  validate(range);
  Vectorizer v;
  v.range = range;
  v.vocabulary = std::move(vocabulary);
  for (std::size_t i = 0; i < v.vocabulary.size(); ++i) v.index_.emplace(v.vocabulary[i], i);
  return v;
}

Vectorizer fit_vectorizer(const std::vector<std::vector<std::string>>& token_lists, NgramRange range) {
  validate(range);
  require(!token_lists.empty(), ErrorCode::parameter, "cannot fit a vectorizer on an empty corpus");
  std::vector<std::vector<std::string>> grams;
  grams.reserve(token_lists.size());
  std::set<std::string> vocab;
  for (const auto& tokens : token_lists) {
    grams.push_back(ngrams(tokens, range));
    vocab.insert(grams.back().begin(), grams.back().end());
  }
  require(!vocab.empty(), ErrorCode::parameter, "corpus produced an empty vocabulary");
  Vectorizer v = make_vectorizer(range, std::vector<std::string>(vocab.begin(), vocab.end()));
  v.doc_counts.reserve(grams.size());
  for (const auto& doc : grams) {
    std::map<std::size_t, std::size_t> counts;
    for (const auto& g : doc) ++counts[v.index_.at(g)];
    v.doc_counts.emplace_back(counts.begin(), counts.end());
  }
  return v;
}

std::set<std::string> seed_terms(const std::vector<SeedList>& lists, const corpus::PreprocessConfig& config,
                                 NgramRange range) {
  std::set<std::string> out;
  for (const auto& list : lists) {
    for (const auto& phrase : list.phrases) {
      const auto tokens = corpus::tokenize(phrase, config);
      for (auto& g : ngrams(tokens, range)) out.insert(std::move(g));
    }
  }
  return out;
}

TopicWeights class_tfidf(const Vectorizer& vectorizer, std::span<const int> labels, const SeedBoostConfig* boost) {
  require(labels.size() == vectorizer.doc_counts.size(), ErrorCode::parameter,
          "assignment covers " + std::to_string(labels.size()) + " documents, vectorizer has " +
              std::to_string(vectorizer.doc_counts.size()));
  if (boost) require(boost->seed_multiplier > 0.0, ErrorCode::parameter, "seed_multiplier must be positive");
  const std::size_t terms = vectorizer.vocabulary.size();
  int max_label = -1;
  bool has_outliers = false;
  for (int l : labels) {
    require(l >= -1, ErrorCode::parameter, "topic labels must be >= -1");
    max_label = std::max(max_label, l);
    has_outliers = has_outliers || l == -1;
  }
  const auto topics = static_cast<std::size_t>(max_label + 1);

  // Class rows 0..K-1 are topics; row K holds the outliers.
  std::vector<double> counts((topics + 1) * terms, 0.0);
  TopicWeights w;
  w.topics = topics;
  w.terms = terms;
  w.sizes.assign(topics, 0);
  for (std::size_t d = 0; d < labels.size(); ++d) {
    const std::size_t cls = labels[d] < 0 ? topics : static_cast<std::size_t>(labels[d]);
    if (labels[d] >= 0) ++w.sizes[cls];
    for (const auto& [term, count] : vectorizer.doc_counts[d]) counts[cls * terms + term] += static_cast<double>(count);
  }

  std::vector<double> class_total(topics + 1, 0.0);
  std::vector<double> term_total(terms, 0.0);
  for (std::size_t c = 0; c <= topics; ++c) {
    for (std::size_t t = 0; t < terms; ++t) {
      class_total[c] += counts[c * terms + t];
      term_total[t] += counts[c * terms + t];
    }
  }
  for (std::size_t c = 0; c < topics; ++c) {
    if (class_total[c] == 0.0) fail(ErrorCode::empty_topic, "topic " + std::to_string(c) + " has no terms");
  }
  const std::size_t classes = topics + (has_outliers ? 1 : 0);
  const double avg = std::accumulate(class_total.begin(), class_total.end(), 0.0) / static_cast<double>(classes);

  std::vector<double> idf(terms, 0.0);
  std::vector<double> multiplier(terms, 1.0);
  for (std::size_t t = 0; t < terms; ++t) {
    if (term_total[t] > 0.0) idf[t] = std::log(1.0 + avg / term_total[t]);
    if (boost && boost->seed_words.contains(vectorizer.vocabulary[t])) multiplier[t] = boost->seed_multiplier;
  }

  w.values.assign(topics * terms, 0.0);
  for (std::size_t c = 0; c < topics; ++c) {
    for (std::size_t t = 0; t < terms; ++t) {
      const double tf = counts[c * terms + t] / class_total[c];
      w.values[c * terms + t] = tf * idf[t] * multiplier[t];
    }
  }
  return w;
}

std::vector<TopicRepresentation> top_k_words(const TopicWeights& weights, std::span<const std::string> vocabulary,
                                             std::size_t k_top) {
  require(k_top >= 1, ErrorCode::parameter, "k_top must be >= 1");
  require(vocabulary.size() == weights.terms, ErrorCode::parameter, "vocabulary does not match weights");
  std::vector<TopicRepresentation> out;
  out.reserve(weights.topics);
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < weights.topics; ++c) {
    const auto row = weights.row(c);
    order.clear();
    for (std::size_t t = 0; t < weights.terms; ++t) {
      if (row[t] > 0.0) order.push_back(t);
    }
    const std::size_t keep = std::min(k_top, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return vocabulary[a] < vocabulary[b];
                      });
    TopicRepresentation rep;
    rep.topic_id = static_cast<int>(c);
    rep.size = c < weights.sizes.size() ? weights.sizes[c] : 0;
    rep.name = std::to_string(c);
    for (std::size_t i = 0; i < keep; ++i) {
      rep.top_words.push_back({vocabulary[order[i]], row[order[i]]});
      if (i < 4) rep.name += "_" + vocabulary[order[i]];
    }
    out.push_back(std::move(rep));
  }
  return out;
}

ReducedTopics reduce_topics(const Vectorizer& vectorizer, std::vector<int> labels, std::optional<int> nr_topics,
                            const SeedBoostConfig* boost) {
  if (nr_topics) require(*nr_topics >= 2, ErrorCode::parameter, "nr_topics must be >= 2 or auto");
  ReducedTopics out;
  out.weights = class_tfidf(vectorizer, labels, boost);
  if (!nr_topics) {
    out.labels = std::move(labels);
    return out;
  }
  const auto target = static_cast<std::size_t>(*nr_topics);
  while (out.weights.topics > target) {
    const TopicWeights& w = out.weights;
    std::size_t smallest = 0;
    for (std::size_t c = 1; c < w.topics; ++c) {
      if (w.sizes[c] < w.sizes[smallest]) smallest = c;
    }
    std::size_t into = w.topics;
    double best = -2.0;
    for (std::size_t c = 0; c < w.topics; ++c) {
      if (c == smallest) continue;
      const double sim = embeddings::cosine_similarity(w.row(smallest), w.row(c));
      if (sim > best) {
        best = sim;
        into = c;
      }
    }
    const int from = static_cast<int>(smallest);
    const int to = static_cast<int>(into);
    out.merges.push_back({from, to});
    for (int& l : labels) {
      if (l == from) l = to;
      if (l > from) --l;
    }
    out.weights = class_tfidf(vectorizer, labels, boost);
  }
  out.labels = std::move(labels);
  return out;
}

void write_topic_table(const std::vector<TopicRepresentation>& topics, std::size_t outlier_count,
                       const std::string& path) {
  std::ostringstream out;
  csv::Writer writer(out);
  writer.write({"topic", "size", "name", "top_words"});
  if (outlier_count > 0) writer.write({"-1", std::to_string(outlier_count), "-1_outliers", ""});
  for (const auto& t : topics) {
    std::vector<std::string> words;
    for (const auto& w : t.top_words) words.push_back(w.term);
    writer.write({std::to_string(t.topic_id), std::to_string(t.size), t.name, text::join(words, "|")});
  }
  io::write_file(path, out.str());
}

}  // namespace civitopic::topics
