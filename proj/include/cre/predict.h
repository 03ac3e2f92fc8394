#ifndef CRE_PREDICT_H_
#define CRE_PREDICT_H_

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cre/corpus.h"
#include "cre/schema.h"

namespace cre {

// A predictor's answer for one instance. The binary decision is derived:
// 1 iff the predicted relation is the queried one.
struct Prediction {
  std::string instance_id;
  std::string queried_relation;
  // A schema relation or the no-relation label.
  std::string predicted_relation;
  std::string predictor_id;
  std::optional<double> score;

  bool binary() const { return predicted_relation == queried_relation; }
  bool operator==(const Prediction&) const = default;
};

// Prediction file: one {instance_id, predicted_relation, score?, predictor_id}
// object per line. queried_relation is not stored.
std::vector<Prediction> read_predictions(std::istream& in);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
void write_predictions(std::span<const Prediction> predictions,
                       std::ostream& out);

// instance_id -> prediction. Throws CollisionError on repeated ids.
using PredictionIndex = std::unordered_map<std::string, Prediction>;
PredictionIndex index_predictions(std::vector<Prediction> predictions);

enum class PredictorKind { kFile, kRemote, kOracleEvent, kOracleType, kOracleEventType };

// Textual form "KIND[:PARAM]": file:PATH, remote:URL, oracle-event:GOLD,
// oracle-type, oracle-event-type:GOLD. GOLD is a labeled CRE file.
struct PredictorSpec {
  PredictorKind kind = PredictorKind::kFile;
  std::string parameter;

  static PredictorSpec parse(std::string_view text);
  std::string to_string() const;
};

struct RemoteOptions {
  std::size_t batch_size = 64;
  int max_in_flight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds retry_backoff{200};
};

// Sentence lookup for predictors that need the text of an instance.
class SentenceIndex {
 public:
  SentenceIndex() = default;
  explicit SentenceIndex(const std::vector<Sentence>& sentences);
  explicit SentenceIndex(const CreDataset& dataset);

  void add(const Sentence& sentence);
  // nullptr when unknown.
  const Sentence* find(std::string_view sentence_id) const;

 private:
  std::unordered_map<std::string, const Sentence*> by_id_;
};

class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual const std::string& id() const = 0;
  // One prediction per instance, in input order.
  virtual std::vector<Prediction> predict(
      std::span<const CandidateInstance> instances,
      const SentenceIndex& sentences) const = 0;
};

// Gold-positive (sentence, relation) pairs of a labeled instance set.
class GoldIndex {
 public:
  explicit GoldIndex(std::span<const CandidateInstance> labeled);

  bool has_sentence(std::string_view sentence_id) const;
  // True iff some gold-positive instance of `relation` exists in the sentence.
  bool attests(std::string_view sentence_id, std::string_view relation) const;

 private:
  std::unordered_set<std::string> sentences_;
  std::unordered_set<std::string> positive_;  // sentence_id \x1f relation
};

// Heuristic decision rules. These read gold labels, so they bound what a
// shortcut learner could exploit rather than imitate any trained model.

// Does the sentence attest the relation? Ignores the arguments.
// Throws NotFoundError when the sentence is absent from the gold source.
bool oracle_event(const CandidateInstance& instance, const GoldIndex& gold);
// Are the argument types compatible with the relation? Ignores the sentence.
bool oracle_type(const CandidateInstance& instance, const SchemaConfig& schema);
// Conjunction of the two rules above.
bool oracle_event_type(const CandidateInstance& instance, const GoldIndex& gold,
                       const SchemaConfig& schema);

class FilePredictor : public Predictor {
 public:
  FilePredictor(std::string id, PredictionIndex predictions);
  static std::unique_ptr<FilePredictor> load(const std::filesystem::path& path);

  const std::string& id() const override { return id_; }
  // Throws NotFoundError listing every instance id absent from the file.
  std::vector<Prediction> predict(std::span<const CandidateInstance> instances,
                                  const SentenceIndex& sentences) const override;

 private:
  std::string id_;
  PredictionIndex predictions_;
};

class OraclePredictor : public Predictor {
 public:
  // `gold` may be empty only for kOracleType.
  OraclePredictor(PredictorKind kind, const SchemaConfig& schema,
                  std::vector<CandidateInstance> gold = {});

  const std::string& id() const override { return id_; }
  std::vector<Prediction> predict(std::span<const CandidateInstance> instances,
                                  const SentenceIndex& sentences) const override;

 private:
  PredictorKind kind_;
  const SchemaConfig& schema_;
  std::vector<CandidateInstance> gold_instances_;
  GoldIndex gold_;
  std::string id_;
};

// Client of the remote inference protocol (POST {endpoint}/v1/predict).
// Batches are sent with bounded concurrency and retried; a batch either
// completes entirely or the call throws TransportError.
class RemotePredictor : public Predictor {
 public:
  explicit RemotePredictor(std::string endpoint, RemoteOptions options = {});

  const std::string& id() const override { return id_; }
  std::vector<Prediction> predict(std::span<const CandidateInstance> instances,
                                  const SentenceIndex& sentences) const override;

 private:
  std::string endpoint_;
  RemoteOptions options_;
  std::string id_;
};

// `schema` must outlive the predictor.
std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec,
                                          const SchemaConfig& schema,
                                          const RemoteOptions& options = {});

// Runs `predictor` and checks the result: exactly one prediction per input,
// keyed and ordered like the input, every predicted label known to `schema`.
std::vector<Prediction> predict_batch(const Predictor& predictor,
                                      std::span<const CandidateInstance> instances,
                                      const SentenceIndex& sentences,
                                      const SchemaConfig& schema);

}  // namespace cre

#endif  // CRE_PREDICT_H_
