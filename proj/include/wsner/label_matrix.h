#ifndef WSNER_LABEL_MATRIX_H_
#define WSNER_LABEL_MATRIX_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsner/corpus.h"

namespace wsner {

// n tokens x m sources of votes in {-1, 0..k-1}, row-major.
struct LabelMatrix {
  size_t n = 0;
  size_t m = 0;
  std::vector<int8_t> values;
  std::vector<std::string> source_names;
  std::vector<std::string> doc_ids;  // RowRef::doc indexes this table
  std::vector<RowRef> rows;

  int at(size_t i, size_t j) const { return values[i * m + j]; }
  std::span<const int8_t> row(size_t i) const { return {values.data() + i * m, m}; }
  std::vector<int8_t> column(size_t j) const;

  // Shape, row index and vote domain checks; throws Error.
  void validate(int k) const;

  // Empty matrix with row index taken from a corpus.
  static LabelMatrix for_corpus(const Corpus& corpus, std::vector<std::string> sources);
};

// Binary file: "TRLM", uint64 n, uint64 m (little-endian), then n*m int8
// votes. The sidecar `<path>.index` lists source names and the row mapping.
void write_label_matrix(const LabelMatrix& L, const std::string& path);
LabelMatrix read_label_matrix(const std::string& path);
std::string label_matrix_index_path(const std::string& path);

}  // namespace wsner

#endif  // WSNER_LABEL_MATRIX_H_
