#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace civitopic::corpus {

enum class Split { unassigned, train, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct Document {
  std::string id;
  std::string raw_text;
  std::string process;
  std::optional<std::string> declared_category;
  std::string clean_text;
  std::vector<std::string> tokens;
  Split split = Split::unassigned;
};

struct PreprocessConfig {
  std::set<std::string> stopwords;
  std::map<std::string, std::string> lemma_lexicon;
  std::size_t min_chars_after_clean = 1;
};

struct Corpus {
  std::vector<Document> documents;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.0;

  std::size_t size() const { return documents.size(); }
};

enum class Format { csv, jsonl };

Format parse_format(std::string_view name);

/// Reads `id,text[,process,category]`. Columns written by save_corpus
/// (`split,clean_text,tokens`) are picked up too, so a processed corpus can be
/// reloaded without re-running the earlier stages.
Corpus load_corpus(const std::filesystem::path& path, Format format);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

std::set<std::string> load_stopwords(const std::filesystem::path& path);
std::map<std::string, std::string> load_lemma_lexicon(const std::filesystem::path& path);

/// Clean-text tokenization shared with seed-word normalization: clean, split
/// on spaces, drop stopwords, map through the lemma lexicon.
std::vector<std::string> tokenize(std::string_view text, const PreprocessConfig& config);

Corpus preprocess(const Corpus& corpus, const PreprocessConfig& config);

enum class RemovalReason { duplicate, empty };

struct Removal {
  std::string id;
  RemovalReason reason;
};

struct DedupeResult {
  Corpus corpus;
  std::vector<Removal> removed;
};

/// Keeps the first occurrence of each normalized raw text (lowercased,
/// whitespace-collapsed, trimmed); drops empty texts.
DedupeResult dedupe_and_filter(const Corpus& corpus);
void write_removal_report(const std::vector<Removal>& removed, const std::filesystem::path& path);

/// Deterministic train/test assignment. Stratifies on declared_category when
/// at least 90% of documents carry one. The train count is always
/// round(train_fraction * N).
Corpus split(const Corpus& corpus, double train_fraction, std::uint64_t seed);

/// Documents with the given split, in corpus order.
std::vector<Document> select(const Corpus& corpus, Split split);

}  // namespace civitopic::corpus
