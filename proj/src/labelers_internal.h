#ifndef WSNER_SRC_LABELERS_INTERNAL_H_
#define WSNER_SRC_LABELERS_INTERNAL_H_

#include <map>
#include <memory>
#include <string>

#include "wsner/labelers.h"

namespace wsner::internal {

// Synset labeling state shared across documents: member-term matcher and
// per-synset classes are computed once.
class SynsetLabeler {
 public:
  SynsetLabeler(std::shared_ptr<const SynsetIndex> syn, std::shared_ptr<const TermClassMap> tcm);
  DocumentVotes apply_any_pair(const Document& doc) const;
  DocumentVotes apply_schwartz_hearst(const Document& doc) const;

 private:
  std::shared_ptr<const SynsetIndex> syn_;
  std::shared_ptr<const TermClassMap> tcm_;
  std::map<std::string, int> classes_;
  TermSet members_;
};

}  // namespace wsner::internal

#endif  // WSNER_SRC_LABELERS_INTERNAL_H_
