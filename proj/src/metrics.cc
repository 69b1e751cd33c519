#include "wsner/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace wsner {

std::vector<BioTag> io_to_bio(std::span<const int> tags, int default_class) {
  std::vector<BioTag> out;
  out.reserve(tags.size());
  for (size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == default_class)
      out.push_back({'O', 0});
    else if (i > 0 && tags[i - 1] == tags[i])
      out.push_back({'I', tags[i]});
    else
      out.push_back({'B', tags[i]});
  }
  return out;
}

std::string bio_string(const BioTag& t, const TaskSchema& schema) {
  if (t.kind == 'O') return "O";
  return std::string(1, t.kind) + "-" + schema.name(t.cls);
}

std::vector<Span> extract_spans(std::span<const BioTag> bio, size_t* repairs) {
  std::vector<Span> out;
  bool open = false;
  for (size_t i = 0; i < bio.size(); ++i) {
    const BioTag& t = bio[i];
    if (t.kind == 'I' && open && out.back().cls == t.cls) {
      out.back().end = i + 1;
      continue;
    }
    if (t.kind == 'O') {
      open = false;
      continue;
    }
    if (t.kind == 'I' && repairs) ++*repairs;
    out.push_back({i, i + 1, t.cls});
    open = true;
  }
  return out;
}

std::vector<Span> spans_from_rows(std::span<const int> tags, std::span<const RowRef> rows,
                                  int default_class) {
  if (tags.size() != rows.size()) throw Error("tag count does not match the row index");
  std::vector<Span> out;
  size_t b = 0;
  while (b < rows.size()) {
    size_t e = b + 1;
    while (e < rows.size() && rows[e].doc == rows[b].doc && rows[e].sentence == rows[b].sentence) ++e;
    for (const Span& s : extract_spans(io_to_bio(tags.subspan(b, e - b), default_class)))
      out.push_back({s.start + b, s.end + b, s.cls});
    b = e;
  }
  return out;
}

double Counts::precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
double Counts::recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
double Counts::f1() const {
  const double p = precision(), r = recall();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

namespace {

// (position, class) units compared by the chosen mode.
std::vector<std::pair<Span, int>> units(std::span<const Span> spans, MatchMode mode) {
  std::vector<std::pair<Span, int>> out;
  for (const Span& s : spans) {
    if (mode == MatchMode::kExactSpan) {
      out.push_back({s, s.cls});
    } else {
      for (size_t t = s.start; t < s.end; ++t) out.push_back({Span{t, t + 1, s.cls}, s.cls});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

EvalReport span_prf(std::span<const Span> pred, std::span<const Span> gold, MatchMode mode) {
  EvalReport r;
  r.mode = mode == MatchMode::kExactSpan ? "exact_span" : "token_micro";
  const auto p = units(pred, mode);
  const auto g = units(gold, mode);
  size_t i = 0, j = 0;
  while (i < p.size() || j < g.size()) {
    if (j == g.size() || (i < p.size() && p[i] < g[j])) {
      ++r.per_class[p[i].second].fp;
      ++i;
    } else if (i == p.size() || g[j] < p[i]) {
      ++r.per_class[g[j].second].fn;
      ++j;
    } else {
      ++r.per_class[p[i].second].tp;
      ++i;
      ++j;
    }
  }
  for (const auto& [_, c] : r.per_class) {
    r.micro.tp += c.tp;
    r.micro.fp += c.fp;
    r.micro.fn += c.fn;
  }
  return r;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
}  // namespace

std::string report_kv(const EvalReport& r, const TaskSchema& schema, const std::string& prefix) {
  std::string out;
  auto line = [&](const std::string& key, const std::string& value) {
    out += prefix + key + "=" + value + "\n";
  };
  line("mode", r.mode);
  line("precision", fmt(r.precision()));
  line("recall", fmt(r.recall()));
  line("f1", fmt(r.f1()));
  line("tp", std::to_string(r.micro.tp));
  line("fp", std::to_string(r.micro.fp));
  line("fn", std::to_string(r.micro.fn));
  for (const auto& [cls, c] : r.per_class) {
    const std::string n = schema.valid_class(cls) ? schema.name(cls) : std::to_string(cls);
    line(n + ".precision", fmt(c.precision()));
    line(n + ".recall", fmt(c.recall()));
    line(n + ".f1", fmt(c.f1()));
    line(n + ".tp", std::to_string(c.tp));
    line(n + ".fp", std::to_string(c.fp));
    line(n + ".fn", std::to_string(c.fn));
  }
  return out;
}

MeanSd mean_sd(std::span<const double> values) {
  MeanSd r;
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return r;
}

std::string format_mean_sd(const MeanSd& v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", precision, v.mean, precision, v.sd);
  return buf;
}

}  // namespace wsner
