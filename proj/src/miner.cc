#include "cre/miner.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "cre/error.h"
#include "cre/parallel.h"
#include "cre/rng.h"
#include "json_util.h"

namespace cre {

using internal::Json;
using internal::OrderedJson;

namespace {

std::size_t distinct_pairs(const std::vector<CandidateInstance>& candidates) {
  std::set<std::tuple<int, int, int, int>> pairs;
  for (const auto& c : candidates) {
    pairs.emplace(c.subject.start, c.subject.end, c.object.start, c.object.end);
  }
  return pairs.size();
}

bool any_shared(const std::vector<const CandidateInstance*>& members) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      if (shares_argument(*members[i], *members[j])) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<SuspiciousGroup> mine(const std::vector<Sentence>& corpus,
                                  const Predictor& seed,
                                  const SchemaConfig& schema,
                                  const MineOptions& options) {
  {
    std::unordered_set<std::string> seen;
    for (const auto& s : corpus) {
      if (!seen.insert(s.sentence_id).second) {
        throw CollisionError("sentence id '" + s.sentence_id +
                             "' occurs more than once in the corpus");
      }
    }
  }
  const int workers = std::max(1, options.workers);

  // Condition (a): at least two type-compatible pairs.
  std::vector<std::vector<CandidateInstance>> per_sentence(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    auto candidates = enumerate_pairs(corpus[i], schema);
    if (distinct_pairs(candidates) >= 2) per_sentence[i] = std::move(candidates);
  });

  std::vector<CandidateInstance> flat;
  std::vector<std::size_t> offset(corpus.size() + 1, 0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    offset[i + 1] = offset[i] + per_sentence[i].size();
  }
  flat.reserve(offset.back());
  for (auto& c : per_sentence) {
    std::move(c.begin(), c.end(), std::back_inserter(flat));
    c.clear();
  }

  const SentenceIndex index(corpus);
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk_size);
  const std::size_t chunks = (flat.size() + chunk - 1) / chunk;
  std::vector<std::vector<Prediction>> chunk_predictions(chunks);
  const std::span<const CandidateInstance> all(flat);
  parallel_for(chunks, workers, [&](std::size_t k) {
    const std::size_t begin = k * chunk;
    const std::size_t len = std::min(chunk, flat.size() - begin);
    chunk_predictions[k] =
        predict_batch(seed, all.subspan(begin, len), index, schema);
  });
  std::vector<bool> positive(flat.size(), false);
  for (std::size_t k = 0; k < chunks; ++k) {
    for (std::size_t j = 0; j < chunk_predictions[k].size(); ++j) {
      positive[k * chunk + j] = chunk_predictions[k][j].binary();
    }
  }

  // Condition (b): two or more predicted-positive pairs of one relation.
  std::vector<std::vector<SuspiciousGroup>> found(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    std::map<std::string, std::vector<const CandidateInstance*>> by_relation;
    for (std::size_t j = offset[i]; j < offset[i + 1]; ++j) {
      if (positive[j]) by_relation[flat[j].relation].push_back(&flat[j]);
    }
    for (const auto& [relation, members] : by_relation) {
      if (members.size() < 2) continue;
      SuspiciousGroup g;
      g.sentence_id = corpus[i].sentence_id;
      g.relation = relation;
      for (const auto* m : members) g.members.push_back(m->instance_id);
      g.shares_argument = any_shared(members);
      found[i].push_back(std::move(g));
    }
  });

  std::vector<SuspiciousGroup> out;
  for (auto& f : found) std::move(f.begin(), f.end(), std::back_inserter(out));

  // Re-check both conditions on the final output.
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < flat.size(); ++j) {
    position.emplace(flat[j].instance_id, j);
  }
  for (const auto& g : out) {
    std::set<std::string> distinct(g.members.begin(), g.members.end());
    if (distinct.size() < 2 || distinct.size() != g.members.size()) {
      throw ValidationError("group " + g.sentence_id + "/" + g.relation +
                            " has fewer than two distinct members");
    }
    for (const auto& id : g.members) {
      const std::size_t j = position.at(id);
      if (flat[j].sentence_id != g.sentence_id || flat[j].relation != g.relation ||
          !positive[j]) {
        throw ValidationError("group " + g.sentence_id + "/" + g.relation +
                              " holds an inconsistent member " + id);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<SuspiciousGroup> read_groups(std::istream& in) {
  std::vector<SuspiciousGroup> out;
  internal::for_each_json_line(in, [&](const Json& rec, const std::string& where) {
    SuspiciousGroup g;
    g.sentence_id = internal::require_string(rec, "sentence_id", where);
    g.relation = internal::require_string(rec, "relation", where);
    g.members = internal::require_tokens(rec, "members", where);
    const Json& share = internal::require(rec, "shares_argument", where);
    if (!share.is_boolean()) {
      throw ParseError(where + ": field 'shares_argument' must be a boolean");
    }
    g.shares_argument = share.get<bool>();
    if (g.members.size() < 2) {
      throw ValidationError(where + ": a group needs at least two members");
    }
    out.push_back(std::move(g));
  });
  return out;
}

std::vector<SuspiciousGroup> load_groups(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_groups(in);
}

void write_groups(const std::vector<SuspiciousGroup>& groups, std::ostream& out) {
  for (const auto& g : groups) {
    OrderedJson j;
    j["sentence_id"] = g.sentence_id;
    j["relation"] = g.relation;
    j["members"] = g.members;
    j["shares_argument"] = g.shares_argument;
    out << internal::dump_line(j) << '\n';
  }
}

// ---------------------------------------------------------------------------

Sample sample_batches(const std::vector<SuspiciousGroup>& groups,
                      std::size_t per_relation, std::uint64_t rng_seed,
                      const std::optional<std::set<std::string>>& only) {
  if (per_relation == 0) {
    throw ValidationError("per_relation must be at least 1");
  }
  std::map<std::string, std::set<std::string>> pool;
  for (const auto& g : groups) {
    if (only && !only->contains(g.relation)) continue;
    pool[g.relation].insert(g.sentence_id);
  }

  Sample sample;
  sample.rng_seed = rng_seed;
  sample.per_relation = per_relation;
  for (const auto& [relation, ids] : pool) {
    std::vector<std::string> items(ids.begin(), ids.end());
    RelationSample rs;
    rs.available = items.size();
    rs.shortfall = items.size() < per_relation;
    const std::size_t take = std::min(per_relation, items.size());
    std::mt19937_64 gen(derive_seed(rng_seed, relation));
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + uniform_below(gen, items.size() - i);
      std::swap(items[i], items[j]);
    }
    items.resize(take);
    std::sort(items.begin(), items.end());
    rs.sentence_ids = std::move(items);
    sample.relations.emplace(relation, std::move(rs));
  }
  return sample;
}

Sample read_sample(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>()};
  const Json j = internal::parse_json(text, "sample");
  Sample s;
  s.rng_seed = internal::require(j, "rng_seed", "sample").get<std::uint64_t>();
  s.per_relation =
      static_cast<std::size_t>(internal::require_int(j, "per_relation", "sample"));
  const Json& rels = internal::require(j, "relations", "sample");
  if (!rels.is_object()) throw ParseError("sample: 'relations' must be an object");
  for (const auto& [name, body] : rels.items()) {
    const std::string where = "sample relation " + name;
    RelationSample rs;
    rs.sentence_ids = internal::require_tokens(body, "sentence_ids", where);
    rs.available =
        static_cast<std::size_t>(internal::require_int(body, "available", where));
    rs.shortfall = internal::require(body, "shortfall", where).get<bool>();
    s.relations.emplace(name, std::move(rs));
  }
  return s;
}

Sample load_sample(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_sample(in);
}

void write_sample(const Sample& sample, std::ostream& out) {
  OrderedJson j;
  j["rng_seed"] = sample.rng_seed;
  j["per_relation"] = sample.per_relation;
  OrderedJson rels = OrderedJson::object();
  for (const auto& [name, rs] : sample.relations) {
    OrderedJson r;
    r["sentence_ids"] = rs.sentence_ids;
    r["available"] = rs.available;
    r["shortfall"] = rs.shortfall;
    rels[name] = std::move(r);
  }
  j["relations"] = std::move(rels);
  out << j.dump(2, ' ', false, OrderedJson::error_handler_t::replace) << '\n';
}

// ---------------------------------------------------------------------------

std::vector<CreRecord> export_tasks(const Sample& sample,
                                    const std::vector<Sentence>& corpus,
                                    const SchemaConfig& schema) {
  const SentenceIndex index(corpus);
  std::vector<CreRecord> tasks;
  std::size_t next = 0;
  for (const auto& [relation, rs] : sample.relations) {
    for (const auto& sid : rs.sentence_ids) {
      const Sentence* s = index.find(sid);
      if (!s) {
        throw NotFoundError("sampled sentence '" + sid + "' (" + relation +
                            ") is not in the corpus");
      }
      for (auto& inst : enumerate_pairs(*s, schema)) {
        if (inst.relation != relation) continue;
        CreRecord rec;
        rec.instance = std::move(inst);
        rec.tokens = s->tokens;
        rec.group = relation;
        rec.source = s->source;
        rec.task_index = next++;
        tasks.push_back(std::move(rec));
      }
    }
  }
  return tasks;
}

}  // namespace cre
