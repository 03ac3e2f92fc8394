#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "cre/corpus.h"

namespace cre {
namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Maximal runs of one non-"O" tag.
std::vector<EntityMention> mentions_from_ner(
    const std::vector<std::string>& tokens, const std::vector<std::string>& ner) {
  std::vector<EntityMention> out;
  std::size_t i = 0;
  while (i < ner.size()) {
    if (ner[i] == "O") {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < ner.size() && ner[j + 1] == ner[i]) ++j;
    out.push_back(make_mention(tokens, static_cast<int>(i),
                               static_cast<int>(j), ner[i]));
    i = j + 1;
  }
  return out;
}

}  // namespace

DatasetStats dataset_stats(const CreDataset& dataset) {
  DatasetStats st;
  st.group_count = dataset.groups.size();
  st.instance_count = dataset.instances.size();

  std::map<std::string, std::vector<const CandidateInstance*>> by_sentence;
  for (const auto& inst : dataset.instances) {
    by_sentence[inst.sentence_id].push_back(&inst);
    PolarityCounts& rel = st.per_relation[inst.relation];
    if (inst.gold.value_or(false)) {
      ++rel.positive;
      ++st.total.positive;
    } else {
      ++rel.negative;
      ++st.total.negative;
    }
  }

  std::unordered_map<std::string, std::size_t> token_count;
  for (const auto& [group, sentences] : dataset.groups) {
    for (const auto& s : sentences) {
      token_count.emplace(s.sentence_id, s.tokens.size());
    }
  }
  st.sentence_count = token_count.size();

  std::size_t conflicting = 0;
  std::size_t sharing = 0;
  std::size_t tokens = 0;
  for (const auto& [sentence_id, members] : by_sentence) {
    std::map<std::string, std::pair<bool, bool>> seen;  // relation -> (1, 0)
    for (const auto* m : members) {
      auto& flags = seen[m->relation];
      (m->gold.value_or(false) ? flags.first : flags.second) = true;
    }
    if (std::any_of(seen.begin(), seen.end(), [](const auto& kv) {
          return kv.second.first && kv.second.second;
        })) {
      ++conflicting;
    }
    bool share = false;
    for (std::size_t i = 0; i < members.size() && !share; ++i) {
      for (std::size_t j = i + 1; j < members.size() && !share; ++j) {
        share = shares_argument(*members[i], *members[j]);
      }
    }
    if (share) ++sharing;
  }
  for (const auto& [id, n] : token_count) tokens += n;

  st.mean_pairs_per_sentence = ratio(st.instance_count, st.sentence_count);
  st.conflicting_label_fraction = ratio(conflicting, st.sentence_count);
  st.shared_argument_fraction = ratio(sharing, st.sentence_count);
  st.mean_sentence_tokens = ratio(tokens, st.sentence_count);
  return st;
}

AnnotationCoverage annotation_coverage(const std::vector<TacredRecord>& records,
                                       const SchemaConfig& schema) {
  struct Group {
    const TacredRecord* first = nullptr;
    std::set<std::tuple<int, int, int, int>> pairs;
    std::set<std::string> labels;
    std::vector<EntityMention> mentions;
  };
  std::map<std::vector<std::string>, Group> groups;
  for (const auto& r : records) {
    Group& g = groups[r.sentence.tokens];
    if (!g.first) g.first = &r;
    g.pairs.emplace(r.subject.start, r.subject.end, r.object.start,
                    r.object.end);
    g.labels.insert(r.label);
    for (const auto* m : {&r.subject, &r.object}) {
      const bool known = std::any_of(
          g.mentions.begin(), g.mentions.end(),
          [&](const EntityMention& x) { return x.same_span(*m); });
      if (!known) g.mentions.push_back(*m);
    }
  }

  AnnotationCoverage cov;
  cov.sentence_count = groups.size();
  for (auto& [tokens, g] : groups) {
    if (g.pairs.size() > 1) ++cov.sentences_with_multiple_pairs;
    if (g.labels.size() > 1) ++cov.sentences_with_multiple_labels;
    if (!g.first->ner.empty()) {
      for (auto& m : mentions_from_ner(tokens, g.first->ner)) {
        const bool known = std::any_of(
            g.mentions.begin(), g.mentions.end(),
            [&](const EntityMention& x) { return x.same_span(m); });
        if (!known) g.mentions.push_back(std::move(m));
      }
    }
    for (const auto& a : g.mentions) {
      for (const auto& b : g.mentions) {
        if (&a == &b || a.overlaps(b)) continue;
        if (schema.compatible(a.etype, b.etype).empty()) continue;
        ++cov.compatible_pairs;
        if (g.pairs.contains({a.start, a.end, b.start, b.end})) {
          ++cov.annotated_compatible_pairs;
        }
      }
    }
  }
  cov.multiple_pair_sentence_fraction =
      ratio(cov.sentences_with_multiple_pairs, cov.sentence_count);
  cov.multiple_label_sentence_fraction =
      ratio(cov.sentences_with_multiple_labels, cov.sentence_count);
  cov.annotated_pair_fraction =
      ratio(cov.annotated_compatible_pairs, cov.compatible_pairs);
  return cov;
}

}  // namespace cre
