#ifndef CRE_EVAL_H_
#define CRE_EVAL_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cre/corpus.h"
#include "cre/predict.h"
#include "cre/schema.h"

namespace cre {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return tn + fp; }
  void add(bool gold, bool predicted);
  ConfusionCounts& operator+=(const ConfusionCounts& other);
  bool operator==(const ConfusionCounts&) const = default;
};

// Percentages in [0, 100] at full precision. nullopt marks a zero
// denominator.
struct Metrics {
  std::optional<double> acc;
  std::optional<double> acc_pos;
  std::optional<double> acc_neg;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;

  bool operator==(const Metrics&) const = default;
};

Metrics compute_metrics(const ConfusionCounts& counts);

struct ScoredCounts {
  ConfusionCounts counts;
  Metrics metrics;
  bool operator==(const ScoredCounts&) const = default;
};

struct EvalReport {
  ConfusionCounts counts;
  Metrics metrics;
  std::map<std::string, ScoredCounts> per_relation;
  bool operator==(const EvalReport&) const = default;
};

// One binary decision problem: does `relation` hold for the item `key`?
// The prediction looked up under `key` answers 1 iff its predicted relation
// equals `relation`.
struct BinaryQuery {
  std::string key;
  std::string relation;
  bool gold = false;
  bool operator==(const BinaryQuery&) const = default;
};

// Scores the queries. Throws NotFoundError listing every key without a
// prediction. Totals are micro sums over the per-relation counts.
EvalReport score_queries(std::span<const BinaryQuery> queries,
                         const PredictionIndex& predictions);

// Gold-labeled binary instances; throws ValidationError on a missing label.
EvalReport score_binary(std::span<const CandidateInstance> gold,
                        const PredictionIndex& predictions);

// For every relation r, one query per record whose argument types are
// compatible with r; gold is label == r. Keys are record ids.
std::vector<BinaryQuery> binarize_tacred(std::span<const TacredRecord> records,
                                         const SchemaConfig& schema);

// Multi-class predictions keyed by TACRED record id.
EvalReport score_tacred_binarized(std::span<const TacredRecord> records,
                                  const PredictionIndex& predictions,
                                  const SchemaConfig& schema);

enum class Polarity { kPositive, kNegative };

// Binarized TACRED plus every CRE instance of the chosen polarity (keyed by
// instance_id, attached to its own relation). Throws CollisionError when a
// CRE instance_id equals a TACRED record id.
std::vector<BinaryQuery> build_tacred_plus(std::span<const TacredRecord> records,
                                           const CreDataset& cre,
                                           Polarity polarity,
                                           const SchemaConfig& schema);

// Fixed-width text table, one decimal, "undefined" for missing values.
std::string render_table(const EvalReport& report);
// Pretty JSON with raw counts; missing values are null.
std::string render_json(const EvalReport& report);

}  // namespace cre

#endif  // CRE_EVAL_H_
