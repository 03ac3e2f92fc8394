#ifndef CRE_CORPUS_H_
#define CRE_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cre/schema.h"

namespace cre {

// Token span with inclusive end, as in the TACRED record layout.
struct EntityMention {
  int start = 0;
  int end = 0;
  EntityType etype;
  std::string surface;

  bool same_span(const EntityMention& other) const {
    return start == other.start && end == other.end;
  }
  bool overlaps(const EntityMention& other) const {
    return start <= other.end && other.start <= end;
  }
  bool operator==(const EntityMention&) const = default;
};

struct Sentence {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<EntityMention> mentions;
  std::string source;

  // Tokens joined by single spaces; the QA context string.
  std::string text() const;
  bool operator==(const Sentence&) const = default;
};

// Builds a mention over `tokens`, checking bounds and deriving the surface.
EntityMention make_mention(const std::vector<std::string>& tokens, int start,
                           int end, EntityType etype);

// Throws ValidationError when the sentence id or tokens are empty, or a
// mention is out of bounds or has a stale surface.
void validate_sentence(const Sentence& sentence);

// The binary decision unit (s, e1, e2, r) with an optional gold label.
struct CandidateInstance {
  std::string instance_id;
  std::string sentence_id;
  EntityMention subject;
  EntityMention object;
  std::string relation;
  std::optional<bool> gold;

  bool operator==(const CandidateInstance&) const = default;
};

// Deterministic digest of sentence id, both spans and the relation.
std::string make_instance_id(std::string_view sentence_id,
                             const EntityMention& subject,
                             const EntityMention& object,
                             std::string_view relation);

CandidateInstance make_instance(std::string_view sentence_id,
                                const EntityMention& subject,
                                const EntityMention& object,
                                std::string relation,
                                std::optional<bool> gold = std::nullopt);

// ---------------------------------------------------------------------------
// Sentence corpus (input to mining): one JSON object per line,
// {sentence_id, tokens, mentions: [{start, end, type}], source}.

std::vector<Sentence> read_sentences(std::istream& in);
std::vector<Sentence> load_sentences(const std::filesystem::path& path);
void write_sentences(const std::vector<Sentence>& sentences, std::ostream& out);

// ---------------------------------------------------------------------------
// TACRED-style records.

// One TACRED record: a sentence, an ordered pair and a multi-class label
// (possibly the no-relation label).
struct TacredRecord {
  std::string id;
  Sentence sentence;
  EntityMention subject;
  EntityMention object;
  std::string label;
  // Per-token NE tags when the source carries them (stanford_ner).
  std::vector<std::string> ner;

  // The binary instance for `relation`; gold is label == relation.
  CandidateInstance instance_for(const std::string& relation) const;
  bool operator==(const TacredRecord&) const = default;
};

// Accepts the public release layout (a JSON array) or one record per line.
std::vector<TacredRecord> read_tacred(std::istream& in);
std::vector<TacredRecord> load_tacred(const std::filesystem::path& path);
// Writes a JSON array with one record per line.
void write_tacred(const std::vector<TacredRecord>& records, std::ostream& out);

// ---------------------------------------------------------------------------
// CRE records: the canonical line format for labeled challenge-set
// instances and, without the label, for annotation tasks.

struct CreRecord {
  CandidateInstance instance;
  std::vector<std::string> tokens;
  std::string group;
  std::string source;
  // Position in an annotation task file; absent in CRE files.
  std::optional<std::size_t> task_index;

  bool operator==(const CreRecord&) const = default;
};

// Canonical single-line serialization (no trailing newline). Field order:
// instance_id, sentence_id, tokens, subj, obj, relation, label, group,
// source, then task_index when present. label is omitted when gold is absent.
std::string serialize_cre_record(const CreRecord& record);
// `where` prefixes error messages (e.g. "line 12").
CreRecord parse_cre_record(std::string_view line, const std::string& where);

std::vector<CreRecord> read_cre_records(std::istream& in);
std::vector<CreRecord> load_cre_records(const std::filesystem::path& path);
void write_cre_records(const std::vector<CreRecord>& records, std::ostream& out);

// Challenge set arranged by relation group.
struct CreDataset {
  std::map<std::string, std::vector<Sentence>> groups;
  std::vector<CandidateInstance> instances;

  // nullptr when absent from every group.
  const Sentence* find_sentence(std::string_view sentence_id) const;
  // One record per instance, in instance order.
  std::vector<CreRecord> records() const;
  bool operator==(const CreDataset&) const = default;
};

// Assembles a dataset from labeled records, checking that every record
// carries a binary label, matches its group, and has a unique, recomputable
// instance_id. Sentence mentions are the distinct argument spans seen.
CreDataset make_cre_dataset(const std::vector<CreRecord>& records);
CreDataset read_cre(std::istream& in);
CreDataset load_cre(const std::filesystem::path& path);
void write_cre(const CreDataset& dataset, std::ostream& out);

// ---------------------------------------------------------------------------
// Pair enumeration.

// For every ordered pair of distinct, non-overlapping mentions and every
// compatible relation, one instance without gold. Sorted by subject start,
// object start, relation.
std::vector<CandidateInstance> enumerate_pairs(const Sentence& sentence,
                                               const SchemaConfig& schema);

// Every other candidate in the sentence with the same subject type, object
// type and relation as `annotated`. Throws NotFoundError when `annotated` is
// not a candidate of the sentence.
std::vector<CandidateInstance> expand_confusion_set(
    const Sentence& sentence, const CandidateInstance& annotated,
    const SchemaConfig& schema);

// True when the two instances have an argument span in common (any of
// subject/object of one equals subject/object of the other).
bool shares_argument(const CandidateInstance& a, const CandidateInstance& b);

// ---------------------------------------------------------------------------
// Statistics.

struct PolarityCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
  bool operator==(const PolarityCounts&) const = default;
};

struct DatasetStats {
  std::size_t group_count = 0;
  std::size_t sentence_count = 0;  // distinct sentence ids
  std::size_t instance_count = 0;
  PolarityCounts total;
  std::map<std::string, PolarityCounts> per_relation;
  // Fractions are over distinct sentences; nullopt for an empty dataset.
  std::optional<double> mean_pairs_per_sentence;
  // Some relation has both a gold-1 and a gold-0 instance in the sentence.
  std::optional<double> conflicting_label_fraction;
  // Some two instances of the sentence share an argument span.
  std::optional<double> shared_argument_fraction;
  std::optional<double> mean_sentence_tokens;
};

DatasetStats dataset_stats(const CreDataset& dataset);

// How exhaustively a TACRED-style file annotates its sentences. Records with
// identical token sequences are treated as one sentence. Candidate pairs use
// the annotated arguments plus mentions recovered from NER tags when present.
struct AnnotationCoverage {
  std::size_t sentence_count = 0;
  std::size_t sentences_with_multiple_pairs = 0;
  std::size_t sentences_with_multiple_labels = 0;
  std::size_t compatible_pairs = 0;
  std::size_t annotated_compatible_pairs = 0;
  std::optional<double> multiple_pair_sentence_fraction;
  std::optional<double> multiple_label_sentence_fraction;
  std::optional<double> annotated_pair_fraction;
};

AnnotationCoverage annotation_coverage(const std::vector<TacredRecord>& records,
                                       const SchemaConfig& schema);

}  // namespace cre

#endif  // CRE_CORPUS_H_
