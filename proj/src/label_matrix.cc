#include "wsner/label_matrix.h"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "wsner/text.h"

namespace wsner {

namespace {

constexpr std::array<char, 4> kMagic = {'T', 'R', 'L', 'M'};

void put_u64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(path + ": truncated header");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

size_t parse_size(std::string_view s, const std::string& where) {
  size_t v = 0;
  if (s.empty()) throw Error(where + ": expected a number");
  for (char c : s) {
    if (!text::is_digit(c)) throw Error(where + ": expected a number, got '" + std::string(s) + "'");
    v = v * 10 + static_cast<size_t>(c - '0');
  }
  return v;
}

}  // namespace

std::vector<int8_t> LabelMatrix::column(size_t j) const {
  std::vector<int8_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = values[i * m + j];
  return out;
}

void LabelMatrix::validate(int k) const {
  if (values.size() != n * m) throw Error("label matrix: value count does not match n*m");
  if (source_names.size() != m) throw Error("label matrix: source name count does not match m");
  if (rows.size() != n) throw Error("label matrix: row index size does not match n");
  for (size_t i = 0; i < values.size(); ++i) {
    const int v = values[i];
    if (v < kAbstain || v >= k)
      throw Error("label matrix: vote " + std::to_string(v) + " at row " + std::to_string(i / m) +
                  " column '" + source_names[i % m] + "' outside {-1, 0.." + std::to_string(k - 1) +
                  "}");
  }
  for (const auto& r : rows)
    if (r.doc >= doc_ids.size()) throw Error("label matrix: row references unknown document");
}

LabelMatrix LabelMatrix::for_corpus(const Corpus& corpus, std::vector<std::string> sources) {
  LabelMatrix L;
  L.rows = corpus.rows();
  L.n = L.rows.size();
  L.m = sources.size();
  L.source_names = std::move(sources);
  L.values.assign(L.n * L.m, static_cast<int8_t>(kAbstain));
  L.doc_ids.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) L.doc_ids.push_back(d.id);
  return L;
}

std::string label_matrix_index_path(const std::string& path) { return path + ".index"; }

void write_label_matrix(const LabelMatrix& L, const std::string& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write label matrix '" + path + "'");
    out.write(kMagic.data(), kMagic.size());
    put_u64(out, L.n);
    put_u64(out, L.m);
    out.write(reinterpret_cast<const char*>(L.values.data()),
              static_cast<std::streamsize>(L.values.size()));
    if (!out) throw Error("write failed for '" + path + "'");
  }
  const std::string index = label_matrix_index_path(path);
  std::ofstream out(index, std::ios::binary);
  if (!out) throw Error("cannot write label matrix index '" + index + "'");
  out << "sources " << L.m << '\n';
  for (const auto& s : L.source_names) out << s << '\n';
  out << "rows " << L.n << '\n';
  for (const auto& r : L.rows) out << L.doc_ids[r.doc] << '\t' << r.sentence << '\t' << r.token << '\n';
  if (!out) throw Error("write failed for '" + index + "'");
}

LabelMatrix read_label_matrix(const std::string& path) {
  LabelMatrix L;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open label matrix '" + path + "'");
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != kMagic)
      throw Error(path + ": not a label matrix (bad magic)");
    L.n = get_u64(in, path);
    L.m = get_u64(in, path);
    L.values.resize(L.n * L.m);
    if (!in.read(reinterpret_cast<char*>(L.values.data()),
                 static_cast<std::streamsize>(L.values.size())))
      throw Error(path + ": truncated vote block");
    if (in.peek() != std::char_traits<char>::eof()) throw Error(path + ": trailing bytes");
  }
  const std::string index = label_matrix_index_path(path);
  std::ifstream in(index);
  if (!in) throw Error("cannot open label matrix index '" + index + "'");
  std::string line;
  size_t line_no = 0;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw Error(index + ": unexpected end of file");
    ++line_no;
    return line;
  };
  auto where = [&] { return index + ":" + std::to_string(line_no); };

  next();
  if (line.rfind("sources ", 0) != 0) throw Error(where() + ": expected 'sources <m>'");
  if (parse_size(std::string_view(line).substr(8), where()) != L.m)
    throw Error(where() + ": source count disagrees with matrix header");
  for (size_t j = 0; j < L.m; ++j) L.source_names.push_back(next());
  next();
  if (line.rfind("rows ", 0) != 0) throw Error(where() + ": expected 'rows <n>'");
  if (parse_size(std::string_view(line).substr(5), where()) != L.n)
    throw Error(where() + ": row count disagrees with matrix header");
  L.rows.reserve(L.n);
  for (size_t i = 0; i < L.n; ++i) {
    const auto fields = text::split(next(), '\t');
    if (fields.size() != 3) throw Error(where() + ": expected doc_id<TAB>sentence<TAB>token");
    const std::string doc(fields[0]);
    if (L.doc_ids.empty() || L.doc_ids.back() != doc) L.doc_ids.push_back(doc);
    L.rows.push_back({L.doc_ids.size() - 1, parse_size(fields[1], where()),
                      parse_size(fields[2], where())});
  }
  return L;
}

}  // namespace wsner
