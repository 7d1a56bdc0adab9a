#pragma once

#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "authorship/common.hpp"
#include "authorship/corpus.hpp"

namespace authorship::test {

inline AnnotatedDocument make_doc(std::string id, std::string author, const std::vector<std::string>& surfaces) {
  AnnotatedDocument doc;
  doc.doc_id = std::move(id);
  doc.author = std::move(author);
  for (const auto& s : surfaces) doc.tokens.push_back({s, std::nullopt, false});
  return doc;
}

// Tokens as (surface, pos, phrase_start).
inline AnnotatedDocument make_annotated(std::string id, std::string author,
                                        const std::vector<std::tuple<std::string, std::string, bool>>& tokens) {
  AnnotatedDocument doc;
  doc.doc_id = std::move(id);
  doc.author = std::move(author);
  doc.phrase_annotated = true;
  for (const auto& [s, p, b] : tokens) doc.tokens.push_back({s, p, b});
  return doc;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(std::filesystem::temp_directory_path() / ("authorship_" + name)) {
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

 private:
  std::filesystem::path path_;
};

// Runs `fn` and returns the code of the authorship::Error it throws.
template <typename Fn>
ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected an authorship::Error");
}

}  // namespace authorship::test
