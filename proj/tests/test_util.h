#ifndef WSNER_TESTS_TEST_UTIL_H_
#define WSNER_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wsner/corpus.h"

namespace wsner::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("wsner-" + tag + "-" + std::to_string(reinterpret_cast<uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& rel) const { return (path_ / rel).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Document make_doc(const std::string& id, const std::string& text) {
  Document d;
  d.id = id;
  d.text = text;
  d.sentences = tokenize(text);
  return d;
}

inline Corpus make_corpus(const std::vector<std::string>& texts) {
  Corpus c;
  for (size_t i = 0; i < texts.size(); ++i) c.documents.push_back(make_doc("d" + std::to_string(i), texts[i]));
  return c;
}

inline std::vector<std::string> token_texts(const Sentence& s) {
  std::vector<std::string> out;
  for (const auto& t : s.tokens) out.push_back(t.text);
  return out;
}

inline std::vector<std::string> all_token_texts(const std::vector<Sentence>& ss) {
  std::vector<std::string> out;
  for (const auto& s : ss)
    for (const auto& t : s.tokens) out.push_back(t.text);
  return out;
}

}  // namespace wsner::test

#endif  // WSNER_TESTS_TEST_UTIL_H_
