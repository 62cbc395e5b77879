#pragma once

#include "civitopic/corpus.hpp"
#include "civitopic/io_util.hpp"
#include "civitopic/synthetic.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <unistd.h>

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("civitopic_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Fixture corpus cleaned with its stopwords, every document marked train.
inline civitopic::corpus::Corpus prepared_corpus(const civitopic::synthetic::Fixture& f) {
  civitopic::corpus::PreprocessConfig pc;
  pc.stopwords = f.stopwords;
  auto c = civitopic::corpus::preprocess(f.corpus, pc);
  for (auto& d : c.documents) d.split = civitopic::corpus::Split::train;
  return c;
}

/// Every regular file under dir, relative path -> bytes.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    out[std::filesystem::relative(entry.path(), dir).string()] = civitopic::io::read_file(entry.path());
  }
  return out;
}

}  // namespace testing
