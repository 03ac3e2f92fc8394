#include "cre/inoculate.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "cre/error.h"
#include "cre/rng.h"
#include "json_util.h"

namespace cre {

using internal::Json;
using internal::OrderedJson;

std::string split_mode_name(SplitMode mode) {
  return mode == SplitMode::kInstance ? "instance" : "sentence";
}

SplitMode parse_split_mode(std::string_view name) {
  if (name == "instance") return SplitMode::kInstance;
  if (name == "sentence") return SplitMode::kSentence;
  throw ValidationError("unknown split mode '" + std::string(name) +
                        "' (expected instance or sentence)");
}

SplitManifest split_cre(const CreDataset& cre, std::uint64_t rng_seed,
                        SplitMode mode) {
  SplitManifest m;
  m.rng_seed = rng_seed;
  m.mode = mode;

  std::map<std::string, std::vector<const CandidateInstance*>> strata;
  for (const auto& inst : cre.instances) strata[inst.relation].push_back(&inst);

  // Side that receives the extra element of the next odd stratum.
  bool extra_to_a = (derive_seed(rng_seed, "odd-start") & 1u) == 0;

  if (mode == SplitMode::kSentence) {
    // A sentence can hold several relations, so sentences are dealt out
    // globally rather than per stratum. Largest first keeps the gap small.
    std::map<std::string, std::vector<const CandidateInstance*>> by_sentence;
    for (const auto& inst : cre.instances) by_sentence[inst.sentence_id].push_back(&inst);
    std::vector<std::string> sentences;
    for (const auto& [sid, members] : by_sentence) sentences.push_back(sid);
    std::mt19937_64 gen(derive_seed(rng_seed, "sentences"));
    deterministic_shuffle(sentences, gen);
    std::stable_sort(sentences.begin(), sentences.end(),
                     [&](const std::string& x, const std::string& y) {
                       return by_sentence[x].size() > by_sentence[y].size();
                     });
    for (const auto& sid : sentences) {
      const bool to_a = m.half_a.size() < m.half_b.size() ||
                        (m.half_a.size() == m.half_b.size() && extra_to_a);
      if (m.half_a.size() == m.half_b.size()) extra_to_a = !extra_to_a;
      for (const auto* inst : by_sentence[sid]) {
        (to_a ? m.half_a : m.half_b).push_back(inst->instance_id);
        HalfCounts& counts = m.per_relation[inst->relation];
        ++(to_a ? counts.half_a : counts.half_b);
      }
    }
    std::sort(m.half_a.begin(), m.half_a.end());
    std::sort(m.half_b.begin(), m.half_b.end());
    return m;
  }

  for (auto& [relation, members] : strata) {
    std::mt19937_64 gen(derive_seed(rng_seed, relation));
    HalfCounts& counts = m.per_relation[relation];
    std::vector<std::string> ids;
    ids.reserve(members.size());
    for (const auto* inst : members) ids.push_back(inst->instance_id);
    std::sort(ids.begin(), ids.end());
    deterministic_shuffle(ids, gen);
    std::size_t to_a = ids.size() / 2;
    if (ids.size() % 2 == 1) {
      if (extra_to_a) ++to_a;
      extra_to_a = !extra_to_a;
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < to_a ? m.half_a : m.half_b).push_back(ids[i]);
    }
    counts.half_a = to_a;
    counts.half_b = ids.size() - to_a;
  }
  std::sort(m.half_a.begin(), m.half_a.end());
  std::sort(m.half_b.begin(), m.half_b.end());
  return m;
}

SplitManifest read_manifest(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>()};
  const Json j = internal::parse_json(text, "manifest");
  SplitManifest m;
  m.rng_seed = internal::require(j, "rng_seed", "manifest").get<std::uint64_t>();
  m.mode = parse_split_mode(internal::require_string(j, "mode", "manifest"));
  m.half_a = internal::require_tokens(j, "half_a", "manifest");
  m.half_b = internal::require_tokens(j, "half_b", "manifest");
  const Json& per = internal::require(j, "per_relation", "manifest");
  if (!per.is_object()) throw ParseError("manifest: per_relation must be an object");
  for (const auto& [relation, c] : per.items()) {
    const std::string where = "manifest relation " + relation;
    HalfCounts counts;
    counts.half_a = static_cast<std::size_t>(internal::require_int(c, "half_a", where));
    counts.half_b = static_cast<std::size_t>(internal::require_int(c, "half_b", where));
    m.per_relation.emplace(relation, counts);
  }
  return m;
}

SplitManifest load_manifest(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_manifest(in);
}

void write_manifest(const SplitManifest& m, std::ostream& out) {
  OrderedJson j;
  j["rng_seed"] = m.rng_seed;
  j["mode"] = split_mode_name(m.mode);
  OrderedJson per = OrderedJson::object();
  for (const auto& [relation, c] : m.per_relation) {
    OrderedJson r;
    r["half_a"] = c.half_a;
    r["half_b"] = c.half_b;
    per[relation] = std::move(r);
  }
  j["per_relation"] = std::move(per);
  j["half_a"] = m.half_a;
  j["half_b"] = m.half_b;
  out << j.dump(2) << '\n';
}

std::vector<TacredRecord> export_augmented_train(
    std::vector<TacredRecord> train, std::span<const std::string> half,
    const CreDataset& cre, const SchemaConfig& schema) {
  std::unordered_map<std::string, const CandidateInstance*> by_id;
  for (const auto& inst : cre.instances) by_id.emplace(inst.instance_id, &inst);
  std::unordered_map<std::string, const Sentence*> sentences;
  for (const auto& [group, list] : cre.groups) {
    for (const auto& s : list) sentences.emplace(s.sentence_id, &s);
  }
  std::unordered_set<std::string> taken;
  for (const auto& r : train) taken.insert(r.id);

  train.reserve(train.size() + half.size());
  for (const auto& id : half) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw NotFoundError("instance " + id + " is not in the CRE dataset");
    }
    const CandidateInstance& inst = *it->second;
    if (!inst.gold) {
      throw ValidationError("instance " + id + " has no gold label");
    }
    auto sit = sentences.find(inst.sentence_id);
    if (sit == sentences.end()) {
      throw NotFoundError("sentence '" + inst.sentence_id + "' of instance " +
                          id + " is not in any group");
    }
    TacredRecord r;
    r.id = std::string(kCreIdPrefix) + id;
    if (!taken.insert(r.id).second) {
      throw CollisionError("exported id " + r.id + " already exists");
    }
    r.sentence.sentence_id = r.id;
    r.sentence.tokens = sit->second->tokens;
    r.sentence.source = sit->second->source;
    r.subject = inst.subject;
    r.object = inst.object;
    r.sentence.mentions = {r.subject, r.object};
    r.label = *inst.gold ? inst.relation : schema.no_relation_label();
    train.push_back(std::move(r));
  }
  return train;
}

void check_uncontaminated(std::span<const CandidateInstance> evaluated,
                          std::span<const std::string> training_half) {
  const std::unordered_set<std::string> train(training_half.begin(),
                                              training_half.end());
  std::vector<std::string> leaked;
  for (const auto& inst : evaluated) {
    if (train.contains(inst.instance_id)) leaked.push_back(inst.instance_id);
  }
  if (leaked.empty()) return;
  std::string list;
  for (std::size_t i = 0; i < leaked.size() && i < 20; ++i) {
    if (i > 0) list += ", ";
    list += leaked[i];
  }
  if (leaked.size() > 20) list += ", ...";
  throw ValidationError(std::to_string(leaked.size()) +
                        " evaluated instance(s) belong to the training half: " +
                        list);
}

}  // namespace cre
