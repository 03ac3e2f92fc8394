#ifndef CRE_MINER_H_
#define CRE_MINER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cre/corpus.h"
#include "cre/predict.h"
#include "cre/schema.h"

namespace cre {

// Two or more candidate pairs of one sentence that the seed predictor
// assigned the same relation.
struct SuspiciousGroup {
  std::string sentence_id;
  std::string relation;
  std::vector<std::string> members;  // instance ids, enumeration order
  bool shares_argument = false;

  bool operator==(const SuspiciousGroup&) const = default;
};

struct MineOptions {
  int workers = 1;
  // Instances per predictor call.
  std::size_t chunk_size = 4096;
};

// Runs `seed` over every type-compatible pair of every sentence and returns
// one group per (sentence, relation) with at least two members whose
// predicted relation equals the queried one. Groups are ordered by corpus
// position, then relation name. Throws CollisionError on repeated sentence
// ids and propagates predictor errors.
std::vector<SuspiciousGroup> mine(const std::vector<Sentence>& corpus,
                                  const Predictor& seed,
                                  const SchemaConfig& schema,
                                  const MineOptions& options = {});

// Group file: one {sentence_id, relation, members, shares_argument} per line.
std::vector<SuspiciousGroup> read_groups(std::istream& in);
std::vector<SuspiciousGroup> load_groups(const std::filesystem::path& path);
void write_groups(const std::vector<SuspiciousGroup>& groups, std::ostream& out);

struct RelationSample {
  std::vector<std::string> sentence_ids;  // sorted
  std::size_t available = 0;              // distinct suspicious sentences
  bool shortfall = false;                 // available < per_relation
  bool operator==(const RelationSample&) const = default;
};

struct Sample {
  std::uint64_t rng_seed = 0;
  std::size_t per_relation = 0;
  std::map<std::string, RelationSample> relations;
  bool operator==(const Sample&) const = default;
};

// Per relation, a uniform sample without replacement of `per_relation`
// distinct sentence ids. Each relation draws from its own stream derived
// from rng_seed and the relation name. When `only` is given, relations
// outside it are ignored. Throws ValidationError when per_relation is 0.
Sample sample_batches(const std::vector<SuspiciousGroup>& groups,
                      std::size_t per_relation, std::uint64_t rng_seed,
                      const std::optional<std::set<std::string>>& only = {});

Sample read_sample(std::istream& in);
Sample load_sample(const std::filesystem::path& path);
void write_sample(const Sample& sample, std::ostream& out);

// Annotation tasks: every candidate of every sampled sentence whose relation
// is the sample's relation, unlabeled, with group = relation and a running
// task_index. Throws NotFoundError for a sampled sentence absent from
// `corpus`.
std::vector<CreRecord> export_tasks(const Sample& sample,
                                    const std::vector<Sentence>& corpus,
                                    const SchemaConfig& schema);

}  // namespace cre

#endif  // CRE_MINER_H_
