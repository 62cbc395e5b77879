#include "civitopic/corpus.hpp"

#include "civitopic/csv.hpp"
#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/random.hpp"
#include "civitopic/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace civitopic::corpus {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
  }
  return "unassigned";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  if (name.empty() || name == "unassigned") return Split::unassigned;
  fail(ErrorCode::schema, "unknown split value '" + std::string(name) + "'");
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "jsonl") return Format::jsonl;
  fail(ErrorCode::parameter, "unknown corpus format '" + std::string(name) + "'");
}

namespace {

void check_unique_ids(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (const auto& doc : corpus.documents) {
    if (!seen.insert(doc.id).second) fail(ErrorCode::data, "duplicate document id '" + doc.id + "'");
  }
}

Corpus load_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_table(path.string());
  if (table.header().empty()) fail(ErrorCode::schema, "missing required field 'id'");
  const std::size_t id_col = table.required_column("id");
  const std::size_t text_col = table.required_column("text");
  const auto process_col = table.column("process");
  const auto category_col = table.column("category");
  const auto split_col = table.column("split");
  const auto clean_col = table.column("clean_text");
  const auto tokens_col = table.column("tokens");

  Corpus corpus;
  corpus.documents.reserve(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    Document doc;
    doc.id = std::string(table.field(r, id_col));
    doc.raw_text = std::string(table.field(r, text_col));
    if (process_col) doc.process = std::string(table.field(r, *process_col));
    if (category_col) {
      auto category = table.field(r, *category_col);
      if (!category.empty()) doc.declared_category = std::string(category);
    }
    if (split_col) doc.split = parse_split(table.field(r, *split_col));
    if (clean_col) doc.clean_text = std::string(table.field(r, *clean_col));
    if (tokens_col) doc.tokens = text::split_whitespace(table.field(r, *tokens_col));
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::string json_field_as_string(const json& value) {
  if (value.is_null()) return {};
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::format, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) fail(ErrorCode::format, "line " + std::to_string(line_no) + ": not an object");
    for (const char* key : {"id", "text"}) {
      if (!obj.contains(key)) fail(ErrorCode::schema, "missing required field '" + std::string(key) + "'");
    }
    Document doc;
    doc.id = json_field_as_string(obj["id"]);
    doc.raw_text = json_field_as_string(obj["text"]);
    if (obj.contains("process")) doc.process = json_field_as_string(obj["process"]);
    if (obj.contains("category")) {
      auto category = json_field_as_string(obj["category"]);
      if (!category.empty()) doc.declared_category = std::move(category);
    }
    if (obj.contains("split")) doc.split = parse_split(json_field_as_string(obj["split"]));
    if (obj.contains("clean_text")) doc.clean_text = json_field_as_string(obj["clean_text"]);
    if (obj.contains("tokens") && obj["tokens"].is_array()) {
      doc.tokens = obj["tokens"].get<std::vector<std::string>>();
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, Format format) {
  Corpus corpus = format == Format::csv ? load_csv(path) : load_jsonl(path);
  check_unique_ids(corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ostringstream out;
  csv::Writer writer(out);
  writer.write({"id", "text", "process", "category", "split", "clean_text", "tokens"});
  for (const auto& doc : corpus.documents) {
    writer.write({doc.id, doc.raw_text, doc.process, doc.declared_category.value_or(""),
                  std::string(to_string(doc.split)), doc.clean_text, text::join(doc.tokens, " ")});
  }
  io::write_file(path, out.str());
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::set<std::string> words;
  for (const auto& line : io::read_lines(path)) {
    auto word = text::trim(line);
    if (word.empty() || word.front() == '#') continue;
    words.insert(text::lowercase(word));
  }
  return words;
}

std::map<std::string, std::string> load_lemma_lexicon(const std::filesystem::path& path) {
  std::map<std::string, std::string> lexicon;
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(path)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorCode::format, "lemma lexicon line " + std::to_string(line_no) + ": expected surface<TAB>lemma");
    }
    lexicon[text::lowercase(text::trim(line.substr(0, tab)))] = text::lowercase(text::trim(line.substr(tab + 1)));
  }
  return lexicon;
}

std::vector<std::string> tokenize(std::string_view raw, const PreprocessConfig& config) {
  std::vector<std::string> tokens;
  for (auto& word : text::split_whitespace(text::clean(raw))) {
    if (config.stopwords.contains(word)) continue;
    if (auto it = config.lemma_lexicon.find(word); it != config.lemma_lexicon.end()) {
      if (!it->second.empty()) tokens.push_back(it->second);
    } else {
      tokens.push_back(std::move(word));
    }
  }
  return tokens;
}

Corpus preprocess(const Corpus& corpus, const PreprocessConfig& config) {
  Corpus out;
  out.split_seed = corpus.split_seed;
  out.train_fraction = corpus.train_fraction;
  out.documents.reserve(corpus.size());
  for (const auto& source : corpus.documents) {
    Document doc = source;
    doc.clean_text = text::clean(doc.raw_text);
    doc.tokens = tokenize(doc.raw_text, config);
    if (text::length(doc.clean_text) < config.min_chars_after_clean || doc.tokens.empty()) continue;
    out.documents.push_back(std::move(doc));
  }
  return out;
}

DedupeResult dedupe_and_filter(const Corpus& corpus) {
  DedupeResult result;
  result.corpus.split_seed = corpus.split_seed;
  result.corpus.train_fraction = corpus.train_fraction;
  std::unordered_set<std::string> seen;
  for (const auto& doc : corpus.documents) {
    std::string key = text::normalize_whitespace_lower(doc.raw_text);
    if (key.empty()) {
      result.removed.push_back({doc.id, RemovalReason::empty});
    } else if (!seen.insert(std::move(key)).second) {
      result.removed.push_back({doc.id, RemovalReason::duplicate});
    } else {
      result.corpus.documents.push_back(doc);
    }
  }
  return result;
}

void write_removal_report(const std::vector<Removal>& removed, const std::filesystem::path& path) {
  std::ostringstream out;
  csv::Writer writer(out);
  writer.write({"id", "reason"});
  for (const auto& r : removed) {
    writer.write({r.id, r.reason == RemovalReason::duplicate ? "duplicate" : "empty"});
  }
  io::write_file(path, out.str());
}

Corpus split(const Corpus& corpus, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorCode::parameter, "train_fraction must lie in (0,1)");
  }
  Corpus out = corpus;
  out.split_seed = seed;
  out.train_fraction = train_fraction;
  const std::size_t n = out.size();
  if (n == 0) return out;

  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const std::size_t with_category = static_cast<std::size_t>(
      std::count_if(out.documents.begin(), out.documents.end(),
                    [](const Document& d) { return d.declared_category.has_value(); }));

  Rng rng(seed);
  std::vector<std::size_t> train_indices;
  if (10 * with_category >= 9 * n) {
    std::map<std::optional<std::string>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < n; ++i) strata[out.documents[i].declared_category].push_back(i);

    // Largest-remainder apportionment keeps the total at exactly n_train.
    struct Quota {
      std::vector<std::size_t>* members;
      std::size_t take;
      double remainder;
      std::size_t order;
    };
    std::vector<Quota> quotas;
    std::size_t assigned = 0;
    for (auto& [key, members] : strata) {
      const double exact = train_fraction * static_cast<double>(members.size());
      const auto base = std::min(members.size(), static_cast<std::size_t>(std::floor(exact)));
      quotas.push_back({&members, base, exact - static_cast<double>(base), quotas.size()});
      assigned += base;
    }
    std::vector<std::size_t> by_remainder(quotas.size());
    std::iota(by_remainder.begin(), by_remainder.end(), 0);
    std::stable_sort(by_remainder.begin(), by_remainder.end(), [&](std::size_t a, std::size_t b) {
      return quotas[a].remainder > quotas[b].remainder;
    });
    for (std::size_t k = 0; assigned < n_train && k < by_remainder.size(); ++k) {
      Quota& q = quotas[by_remainder[k]];
      if (q.take < q.members->size()) {
        ++q.take;
        ++assigned;
      }
    }
    for (auto& q : quotas) {
      rng.shuffle(std::span<std::size_t>(*q.members));
      train_indices.insert(train_indices.end(), q.members->begin(), q.members->begin() + static_cast<std::ptrdiff_t>(q.take));
    }
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  }

  for (auto& doc : out.documents) doc.split = Split::test;
  for (std::size_t i : train_indices) out.documents[i].split = Split::train;
  return out;
}

std::vector<Document> select(const Corpus& corpus, Split split) {
  std::vector<Document> out;
  for (const auto& doc : corpus.documents) {
    if (doc.split == split) out.push_back(doc);
  }
  return out;
}

}  // namespace civitopic::corpus
