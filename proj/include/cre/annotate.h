#ifndef CRE_ANNOTATE_H_
#define CRE_ANNOTATE_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cre/corpus.h"

namespace cre {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string format_timestamp(Timestamp t);
// Accepts RFC 3339 UTC with optional fraction ("Z" or "+00:00").
Timestamp parse_timestamp(std::string_view text);

enum class LogKind {
  kLabel,    // an annotator's binary decision
  kResolve,  // an adjudicator fixes the final label
  kReopen,   // discards earlier labels and resolutions of the instance
};

// One line of the append-only label log.
struct LogEntry {
  LogKind kind = LogKind::kLabel;
  std::string instance_id;
  // Annotator for labels, adjudicator otherwise.
  std::string actor;
  std::optional<bool> label;  // absent only for kReopen
  Timestamp timestamp{};
  std::string guideline_version;

  bool operator==(const LogEntry&) const = default;
};

std::string serialize_log_entry(const LogEntry& entry);
LogEntry parse_log_entry(std::string_view line, const std::string& where);
std::vector<LogEntry> read_log(std::istream& in);
std::vector<LogEntry> load_log(const std::filesystem::path& path);

enum class LabelStatus {
  kUnlabeled,
  kSingle,      // one annotator so far
  kAgreed,      // two or more annotators, identical latest labels
  kConflicted,  // latest labels disagree; no final label
  kResolved,    // final label set by an adjudicator
};

std::string status_name(LabelStatus status);

struct AdjudicatedLabel {
  std::string instance_id;
  std::optional<bool> label;  // set for agreed and resolved
  LabelStatus status = LabelStatus::kUnlabeled;
  // Latest label per annotator since the last reopen.
  std::map<std::string, bool> annotator_labels;

  bool operator==(const AdjudicatedLabel&) const = default;
};

struct Adjudication {
  std::vector<AdjudicatedLabel> labels;  // instance_id order
  std::size_t agreed = 0;
  std::size_t conflicted = 0;
  std::size_t single = 0;
  std::size_t resolved = 0;
  // agreed / (agreed + conflicted); nullopt when neither occurs.
  std::optional<double> agreement_rate;

  const AdjudicatedLabel* find(std::string_view instance_id) const;
  bool operator==(const Adjudication&) const = default;
};

// Pure fold over the log. Per annotator the latest timestamp wins, with log
// order breaking ties; entries before an instance's latest reopen are
// ignored. A resolution overrides the annotators until the next reopen.
Adjudication adjudicate(std::span<const LogEntry> log);

struct BuildReport {
  CreDataset dataset;
  std::size_t included = 0;
  std::size_t excluded_conflicted = 0;
  std::size_t excluded_single = 0;
  std::size_t excluded_unlabeled = 0;
  DatasetStats stats;
};

// Labeled CRE dataset from the tasks whose status is agreed or resolved.
// Everything else is excluded and counted.
BuildReport build_cre(const Adjudication& adjudication,
                      std::span<const CreRecord> tasks);

// Task queue and label log behind the annotation HTTP API. Thread-safe:
// appends are serialized, reads run concurrently. All state is derived from
// the log, which is replayed on construction.
class AnnotationService {
 public:
  using Clock = std::function<Timestamp()>;

  // Tasks must carry distinct instance ids. A torn final log line (from a
  // crash mid-append) is dropped and truncated away.
  AnnotationService(std::vector<CreRecord> tasks, std::filesystem::path log_path,
                    std::string guideline_version, Clock clock = {});
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  struct SubmitResult {
    LogEntry entry;
    bool duplicate = false;  // nothing appended
  };

  // Lowest-ordered task the annotator has not labeled since the task's last
  // reopen; resolved tasks are skipped.
  std::optional<CreRecord> next_task(std::string_view annotator_id) const;

  // Appends and fsyncs a label before returning. Resubmitting the
  // annotator's current label is acknowledged without a new entry. Throws
  // NotFoundError for an unknown instance and ValidationError for an empty
  // annotator id.
  SubmitResult submit_label(const std::string& instance_id,
                            const std::string& annotator_id, bool label,
                            std::optional<std::string> guideline_version = {});
  LogEntry resolve(const std::string& instance_id, const std::string& adjudicator,
                   bool label);
  LogEntry reopen(const std::string& instance_id, const std::string& adjudicator);

  Adjudication adjudication() const;
  // Conflicted tasks in task order.
  std::vector<CreRecord> conflicts() const;
  // Labels recorded per annotator since the respective reopen.
  std::map<std::string, std::size_t> labels_per_annotator() const;

  const std::vector<CreRecord>& tasks() const { return tasks_; }
  const CreRecord* find_task(std::string_view instance_id) const;
  const std::string& guideline_version() const { return guideline_version_; }
  std::vector<LogEntry> log() const;

 private:
  void append(const LogEntry& entry);
  void apply(const LogEntry& entry);

  std::vector<CreRecord> tasks_;
  std::unordered_map<std::string, std::size_t> task_index_;
  std::filesystem::path log_path_;
  std::string guideline_version_;
  Clock clock_;
  int fd_ = -1;

  mutable std::shared_mutex mu_;
  std::vector<LogEntry> log_;
  // Per task: entries since the last reopen.
  std::vector<std::vector<LogEntry>> live_;
};

}  // namespace cre

#endif  // CRE_ANNOTATE_H_
