#ifndef CRE_QA_H_
#define CRE_QA_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cre/corpus.h"
#include "cre/predict.h"
#include "cre/schema.h"

namespace cre {

// Wire sentinel for abstention.
inline constexpr std::string_view kNoAnswer = "NO_ANSWER";

struct QuestionPair {
  std::string instance_id;
  // Asks about the subject; the object surface answers it.
  std::string question_for_object;
  // Asks about the object; the subject surface answers it.
  std::string question_for_subject;
  std::string expected_object;
  std::string expected_subject;

  bool operator==(const QuestionPair&) const = default;
};

// Fills both templates of the instance's relation with the argument
// surfaces. Throws NotFoundError for a relation without templates and
// ValidationError for an empty surface or a placeholder left unfilled.
QuestionPair instantiate(const CandidateInstance& instance,
                         const SchemaConfig& schema);

// Lowercase, trim surrounding whitespace and punctuation, collapse inner
// whitespace, drop one leading article.
std::string normalize_answer(std::string_view text);

// nullopt is NO_ANSWER and never matches.
bool match_answer(const std::optional<std::string>& predicted,
                  std::string_view expected);

struct QaQuery {
  std::string id;
  std::string question;
  std::string context;
};

struct QaAnswer {
  std::string id;
  std::optional<std::string> text;  // nullopt = NO_ANSWER
  std::optional<double> score;
  // Character offsets into the context, end exclusive.
  std::optional<std::size_t> char_start;
  std::optional<std::size_t> char_end;

  bool operator==(const QaAnswer&) const = default;
};

class QaPredictor {
 public:
  virtual ~QaPredictor() = default;
  virtual const std::string& id() const = 0;
  // One answer per query, in query order.
  virtual std::vector<QaAnswer> answer(std::span<const QaQuery> queries) const = 0;
};

// Client of POST {endpoint}/v1/qa. Same batching and retry contract as
// RemotePredictor.
class RemoteQaPredictor : public QaPredictor {
 public:
  explicit RemoteQaPredictor(std::string endpoint, RemoteOptions options = {});
  const std::string& id() const override { return id_; }
  std::vector<QaAnswer> answer(std::span<const QaQuery> queries) const override;

 private:
  std::string endpoint_;
  RemoteOptions options_;
  std::string id_;
};

// Answer file: one {id, answer_text, score?, char_start?, char_end?} per line.
std::vector<QaAnswer> read_answers(std::istream& in);
void write_answers(std::span<const QaAnswer> answers, std::ostream& out);

class FileQaPredictor : public QaPredictor {
 public:
  FileQaPredictor(std::string id, std::vector<QaAnswer> answers);
  static std::unique_ptr<FileQaPredictor> load(const std::filesystem::path& path);

  const std::string& id() const override { return id_; }
  // Throws NotFoundError listing every unanswered query id.
  std::vector<QaAnswer> answer(std::span<const QaQuery> queries) const override;

 private:
  std::string id_;
  std::unordered_map<std::string, QaAnswer> answers_;
};

// "file:PATH" or "remote:URL".
std::unique_ptr<QaPredictor> make_qa_predictor(std::string_view spec,
                                               const RemoteOptions& options = {});

// Query ids used for the two questions of an instance.
std::string question_id_for_object(std::string_view instance_id);
std::string question_id_for_subject(std::string_view instance_id);

// The two queries of a record; context is the sentence text.
std::vector<QaQuery> make_queries(const CreRecord& record,
                                  const SchemaConfig& schema);

enum class MatchMode {
  kNormalized,
  // Answer offsets must equal the expected argument's character span.
  kStrictSpan,
};

struct QaVerdict {
  std::string instance_id;
  bool match_q1 = false;  // question_for_object answered with the object
  bool match_q2 = false;  // question_for_subject answered with the subject
  QaAnswer answer_q1;
  QaAnswer answer_q2;

  bool decision() const { return match_q1 || match_q2; }
  bool operator==(const QaVerdict&) const = default;
};

// One verdict per record, in input order. Strict mode throws
// ValidationError when an answer lacks offsets.
std::vector<QaVerdict> qa_classify(std::span<const CreRecord> records,
                                   const QaPredictor& predictor,
                                   const SchemaConfig& schema,
                                   MatchMode mode = MatchMode::kNormalized);

// Verdicts as relation predictions: the queried relation for decision 1,
// the no-relation label otherwise.
std::vector<Prediction> verdict_predictions(std::span<const QaVerdict> verdicts,
                                            std::span<const CreRecord> records,
                                            const SchemaConfig& schema,
                                            const std::string& predictor_id);

void write_verdicts(std::span<const QaVerdict> verdicts, std::ostream& out);

}  // namespace cre

#endif  // CRE_QA_H_
