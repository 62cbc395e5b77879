#include "civitopic/synthetic.hpp"

#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/random.hpp"
#include "civitopic/text.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace civitopic::synthetic {

namespace {

struct CategoryDef {
  const char* n1;
  const char* n2[3];
};

constexpr CategoryDef kCategories[] = {
    {"Saúde", {"Hospital", "Vacinação", "Medicamentos"}},
    {"Educação", {"Escola", "Professores", "Universidade"}},
    {"Transporte", {"Ônibus", "Rodovias", "Ferrovias"}},
    {"Meio ambiente", {"Reciclagem", "Florestas", "Saneamento"}},
    {"Segurança", {"Policiamento", "Presídios", "Defesa civil"}},
    {"Cultura", {"Museus", "Música", "Patrimônio"}},
    {"Agricultura", {"Irrigação", "Sementes", "Pecuária"}},
    {"Habitação", {"Moradia", "Aluguel", "Loteamento"}},
    {"Energia", {"Eletricidade", "Painéis solares", "Petróleo"}},
    {"Esporte", {"Atletismo", "Futebol", "Ginásios"}},
};

constexpr const char* kSyllables[] = {"ba", "be", "ca", "co", "da", "di", "fa", "fe", "ga", "go", "la", "li",
                                      "ma", "mo", "na", "ni", "pa", "pe", "ra", "ro", "sa", "su", "ta", "to",
                                      "va", "vi", "za", "zu", "bri", "cla", "dro", "fla", "gre", "pro", "tri"};

constexpr const char* kStopwords[] = {"de", "da", "do", "para", "com", "que", "uma", "um", "os", "as", "no", "na"};

constexpr std::size_t kPoolSize = 24;
constexpr std::size_t kFillerSize = 40;

std::string make_word(Rng& rng, std::set<std::string>& used) {
  for (;;) {
    std::string w;
    const auto parts = 2 + rng.uniform_index(2);
    for (std::uint64_t i = 0; i < parts; ++i) w += kSyllables[rng.uniform_index(std::size(kSyllables))];
    if (w.size() >= 4 && used.insert(w).second) return w;
  }
}

std::vector<double> gaussian_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

const std::string& pick(Rng& rng, const std::vector<std::string>& words) {
  return words[rng.uniform_index(words.size())];
}

}  // namespace

Fixture make_fixture(const FixtureSpec& spec) {
  require(spec.categories >= 1 && spec.categories <= std::size(kCategories), ErrorCode::parameter,
          "categories must lie in [1, 10]");
  require(spec.subcategories >= 1 && spec.subcategories <= 3, ErrorCode::parameter,
          "subcategories must lie in [1, 3]");
  require(spec.dim >= 2, ErrorCode::parameter, "dim must be >= 2");
  require(spec.documents >= 1, ErrorCode::parameter, "documents must be >= 1");
  require(spec.min_words >= 1 && spec.min_words <= spec.max_words, ErrorCode::parameter,
          "need 1 <= min_words <= max_words");

  Rng rng(spec.seed);
  Fixture f;
  f.stopwords.insert(std::begin(kStopwords), std::end(kStopwords));

  // Taxonomy, seed tokens and word pools.
  std::set<std::string> used(f.stopwords.begin(), f.stopwords.end());
  std::vector<std::vector<std::string>> n1_tokens(spec.categories);
  std::vector<std::vector<std::vector<std::string>>> n2_tokens(spec.categories);
  std::vector<std::vector<std::string>> pools(spec.categories);
  for (std::size_t c = 0; c < spec.categories; ++c) {
    const auto& def = kCategories[c];
    std::vector<std::string> n2;
    for (std::size_t s = 0; s < spec.subcategories; ++s) n2.emplace_back(def.n2[s]);
    n2.push_back(std::string("Outros em ") + def.n1);
    f.taxonomy.n1_to_n2.emplace_back(def.n1, n2);
    n1_tokens[c] = text::split_whitespace(text::clean(def.n1));
    for (std::size_t s = 0; s < spec.subcategories; ++s) n2_tokens[c].push_back(text::split_whitespace(text::clean(def.n2[s])));
    for (const auto& t : n1_tokens[c]) used.insert(t);
    for (const auto& list : n2_tokens[c]) used.insert(list.begin(), list.end());
  }
  for (std::size_t c = 0; c < spec.categories; ++c) {
    for (std::size_t w = 0; w < kPoolSize; ++w) pools[c].push_back(make_word(rng, used));
  }
  std::vector<std::string> filler;
  for (std::size_t w = 0; w < kFillerSize; ++w) filler.push_back(make_word(rng, used));
  const std::vector<std::string> stop_list(std::begin(kStopwords), std::end(kStopwords));

  // Embedding geometry.
  std::vector<std::vector<double>> centroid(spec.categories);
  std::vector<std::vector<std::vector<double>>> offset(spec.categories);
  for (std::size_t c = 0; c < spec.categories; ++c) {
    centroid[c] = gaussian_unit(rng, spec.dim);
    for (std::size_t s = 0; s < spec.subcategories; ++s) offset[c].push_back(gaussian_unit(rng, spec.dim));
  }

  f.embeddings.provider_tag = spec.provider_tag;
  f.embeddings.dim = spec.dim;
  f.corpus.documents.reserve(spec.documents);
  const int width = static_cast<int>(std::to_string(spec.documents).size());
  const double noise_scale = spec.noise / std::sqrt(static_cast<double>(spec.dim));

  for (std::size_t i = 0; i < spec.documents; ++i) {
    const std::size_t c = rng.uniform_index(spec.categories);
    const std::size_t s = rng.uniform_index(spec.subcategories);
    char id[32];
    std::snprintf(id, sizeof id, "p%0*zu", width, i + 1);

    const std::size_t length = spec.min_words + rng.uniform_index(spec.max_words - spec.min_words + 1);
    std::vector<std::string> words;
    for (std::size_t w = 0; w < length; ++w) {
      const double r = rng.uniform01();
      if (r < 0.20) {
        words.push_back(pick(rng, stop_list));
      } else if (r < 0.42) {
        words.push_back(pick(rng, filler));
      } else if (r < 0.52) {
        const auto& seeds = rng.uniform01() < 0.6 ? n2_tokens[c][s] : n1_tokens[c];
        words.push_back(pick(rng, seeds));
      } else if (r < 0.60) {
        words.push_back(pick(rng, pools[rng.uniform_index(spec.categories)]));
      } else {
        // Skewed toward the head of the pool so topics have clear top words.
        const double u = rng.uniform01();
        words.push_back(pools[c][static_cast<std::size_t>(u * u * kPoolSize)]);
      }
    }
    std::string raw = text::join(words, " ");
    if (!raw.empty()) raw[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(raw[0])));
    raw += ".";

    corpus::Document doc;
    doc.id = id;
    doc.raw_text = std::move(raw);
    doc.process = "processo-" + std::to_string(1 + i % 3);
    doc.declared_category = kCategories[c].n1;
    f.corpus.documents.push_back(std::move(doc));

    f.embeddings.doc_ids.push_back(id);
    for (std::size_t d = 0; d < spec.dim; ++d) {
      f.embeddings.values.push_back(centroid[c][d] + spec.subcategory_weight * offset[c][s][d] +
                                    noise_scale * rng.normal());
    }

    llm::LabelResult label{id, kCategories[c].n1, kCategories[c].n2[s], {}};
    if (rng.uniform01() < spec.no_match_rate) label.n2 = std::string(llm::kNoMatch);
    label.raw_response = label.n1 + ", " + label.n2;
    f.labels.push_back(std::move(label));
  }

  // Seed phrase vectors: category names sit on the centroid, subcategory
  // names near centroid + offset, catch-all entries on the centroid.
  f.seed_embeddings.provider_tag = spec.provider_tag;
  f.seed_embeddings.dim = spec.dim;
  const double seed_noise = 0.05 / std::sqrt(static_cast<double>(spec.dim));
  for (std::size_t c = 0; c < spec.categories; ++c) {
    const auto& [n1, n2] = f.taxonomy.n1_to_n2[c];
    f.seed_embeddings.doc_ids.push_back(n1);
    for (std::size_t d = 0; d < spec.dim; ++d) f.seed_embeddings.values.push_back(centroid[c][d] + seed_noise * rng.normal());
    for (std::size_t s = 0; s < n2.size(); ++s) {
      f.seed_embeddings.doc_ids.push_back(n2[s]);
      const double w = s < spec.subcategories ? spec.subcategory_weight : 0.0;
      for (std::size_t d = 0; d < spec.dim; ++d) {
        const double off = s < spec.subcategories ? offset[c][s][d] : 0.0;
        f.seed_embeddings.values.push_back(centroid[c][d] + w * off + seed_noise * rng.normal());
      }
    }
  }
  return f;
}

embeddings::EmbeddingMatrix noise_embeddings(const embeddings::EmbeddingMatrix& like, std::uint64_t seed,
                                             const std::string& provider_tag) {
  Rng rng(seed);
  embeddings::EmbeddingMatrix m;
  m.doc_ids = like.doc_ids;
  m.dim = like.dim;
  m.provider_tag = provider_tag;
  m.values.resize(like.values.size());
  for (auto& v : m.values) v = rng.normal();
  return m;
}

void write_fixture(const Fixture& fixture, const std::filesystem::path& dir) {
  io::ensure_directory(dir);
  corpus::save_corpus(fixture.corpus, dir / "corpus.csv");
  embeddings::save_binary(fixture.embeddings, dir / "embeddings.bin");
  embeddings::save_text(fixture.seed_embeddings, dir / "seed_embeddings.txt");

  nlohmann::ordered_json tax = nlohmann::ordered_json::object();
  for (const auto& [n1, n2] : fixture.taxonomy.n1_to_n2) tax[n1] = n2;
  io::write_file(dir / "taxonomy.json", tax.dump(2) + "\n");

  llm::write_labels_csv(fixture.labels, (dir / "labels.csv").string());

  std::string stop;
  for (const auto& w : fixture.stopwords) stop += w + "\n";
  io::write_file(dir / "stopwords.txt", stop);
}

}  // namespace civitopic::synthetic
