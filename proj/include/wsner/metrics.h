#ifndef WSNER_METRICS_H_
#define WSNER_METRICS_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "wsner/corpus.h"

namespace wsner {

// BIO tag: kind is 'B', 'I' or 'O'; cls is meaningful for B and I only.
struct BioTag {
  char kind = 'O';
  int cls = 0;
  bool operator==(const BioTag&) const = default;
};

std::vector<BioTag> io_to_bio(std::span<const int> tags, int default_class);
std::string bio_string(const BioTag& t, const TaskSchema& schema);

struct Span {
  size_t start = 0;
  size_t end = 0;  // exclusive
  int cls = 0;
  auto operator<=>(const Span&) const = default;
};

// Maximal spans. An I tag that does not continue a span of its class opens a
// new one and counts as one repair in `repairs`.
std::vector<Span> extract_spans(std::span<const BioTag> bio, size_t* repairs = nullptr);

// IO tags per row, split into spans per sentence. Spans are in row indices and
// never cross sentence boundaries.
std::vector<Span> spans_from_rows(std::span<const int> tags, std::span<const RowRef> rows,
                                  int default_class);

enum class MatchMode { kExactSpan, kTokenMicro };

struct Counts {
  size_t tp = 0, fp = 0, fn = 0;
  double precision() const;
  double recall() const;
  double f1() const;
};

struct EvalReport {
  std::string mode;
  Counts micro;
  std::map<int, Counts> per_class;
  double precision() const { return micro.precision(); }
  double recall() const { return micro.recall(); }
  double f1() const { return micro.f1(); }
};

EvalReport span_prf(std::span<const Span> pred, std::span<const Span> gold, MatchMode mode);

// "key=value" lines; names come from the schema.
std::string report_kv(const EvalReport& r, const TaskSchema& schema, const std::string& prefix = "");

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
};
MeanSd mean_sd(std::span<const double> values);
std::string format_mean_sd(const MeanSd& v, int precision = 4);

}  // namespace wsner

#endif  // WSNER_METRICS_H_
