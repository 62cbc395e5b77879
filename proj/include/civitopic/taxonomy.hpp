#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace civitopic {

/// Two-level controlled vocabulary: N1 domains, each owning a list of N2
/// subterms. File order is preserved everywhere.
struct Taxonomy {
  std::vector<std::pair<std::string, std::vector<std::string>>> n1_to_n2;

  std::vector<std::string> n1_options() const;
  std::vector<std::string> n2_options() const;

  /// Parent N1 of an N2 option (exact text), if any.
  std::optional<std::string> parent_of(std::string_view n2) const;
};

/// Validates: non-empty, options unique under case/accent folding, no option
/// contains a comma, every N2 listed under exactly one N1.
void validate(const Taxonomy& taxonomy);

/// JSON object mapping N1 name to an array of N2 names.
Taxonomy load_taxonomy(const std::filesystem::path& path);
Taxonomy parse_taxonomy(std::string_view json_text);

struct SeedList {
  std::string label;
  std::vector<std::string> phrases;
};

/// Per N1: the N1 name followed by up to `max_subterms` N2 names in file order,
/// skipping "Outros ..." catch-all entries.
std::vector<SeedList> seed_lists(const Taxonomy& taxonomy, std::size_t max_subterms = 5);

}  // namespace civitopic
