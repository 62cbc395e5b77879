#include "civitopic/taxonomy.hpp"

#include "civitopic/error.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/text.hpp"

#include "json.hpp"

#include <map>
#include <set>

namespace civitopic {

std::vector<std::string> Taxonomy::n1_options() const {
  std::vector<std::string> out;
  for (const auto& [n1, n2s] : n1_to_n2) out.push_back(n1);
  return out;
}

std::vector<std::string> Taxonomy::n2_options() const {
  std::vector<std::string> out;
  for (const auto& [n1, n2s] : n1_to_n2) out.insert(out.end(), n2s.begin(), n2s.end());
  return out;
}

std::optional<std::string> Taxonomy::parent_of(std::string_view n2) const {
  for (const auto& [n1, n2s] : n1_to_n2) {
    for (const auto& option : n2s) {
      if (option == n2) return n1;
    }
  }
  return std::nullopt;
}

void validate(const Taxonomy& taxonomy) {
  require(!taxonomy.n1_to_n2.empty(), ErrorCode::schema, "taxonomy has no N1 entries");
  auto check_option = [](const std::string& option, const char* level) {
    require(!text::trim(option).empty(), ErrorCode::schema, std::string("empty ") + level + " option");
    require(option.find(',') == std::string::npos, ErrorCode::schema,
            std::string(level) + " option '" + option + "' contains a comma");
  };
  std::set<std::string> n1_seen;
  std::map<std::string, std::string> n2_owner;
  for (const auto& [n1, n2s] : taxonomy.n1_to_n2) {
    check_option(n1, "N1");
    require(n1_seen.insert(text::fold(n1)).second, ErrorCode::schema, "duplicate N1 option '" + n1 + "'");
    for (const auto& n2 : n2s) {
      check_option(n2, "N2");
      auto [it, inserted] = n2_owner.emplace(text::fold(n2), n1);
      require(inserted, ErrorCode::schema,
              "N2 option '" + n2 + "' listed under both '" + it->second + "' and '" + n1 + "'");
    }
  }
}

Taxonomy parse_taxonomy(std::string_view json_text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::ordered_json::exception& e) {
    fail(ErrorCode::format, std::string("taxonomy: ") + e.what());
  }
  require(doc.is_object(), ErrorCode::schema, "taxonomy must be a JSON object of N1 -> [N2]");
  Taxonomy taxonomy;
  for (const auto& [n1, n2s] : doc.items()) {
    require(n2s.is_array(), ErrorCode::schema, "taxonomy entry '" + n1 + "' must be an array");
    std::vector<std::string> list;
    for (const auto& n2 : n2s) {
      require(n2.is_string(), ErrorCode::schema, "taxonomy entry '" + n1 + "' holds a non-string N2");
      list.push_back(n2.get<std::string>());
    }
    taxonomy.n1_to_n2.emplace_back(n1, std::move(list));
  }
  validate(taxonomy);
  return taxonomy;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) { return parse_taxonomy(io::read_file(path)); }

std::vector<SeedList> seed_lists(const Taxonomy& taxonomy, std::size_t max_subterms) {
  std::vector<SeedList> out;
  for (const auto& [n1, n2s] : taxonomy.n1_to_n2) {
    SeedList seeds{n1, {n1}};
    std::size_t taken = 0;
    for (const auto& n2 : n2s) {
      if (taken == max_subterms) break;
      if (text::fold(n2).starts_with("outros")) continue;
      seeds.phrases.push_back(n2);
      ++taken;
    }
    out.push_back(std::move(seeds));
  }
  return out;
}

}  // namespace civitopic
