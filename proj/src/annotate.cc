#include "cre/annotate.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <istream>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "cre/error.h"
#include "json_util.h"

namespace cre {

using internal::Json;
using internal::OrderedJson;

namespace {

const char* kind_name(LogKind kind) {
  switch (kind) {
    case LogKind::kLabel: return "label";
    case LogKind::kResolve: return "resolve";
    case LogKind::kReopen: return "reopen";
  }
  return "label";
}

bool read_digits(std::string_view s, std::size_t& pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  pos += n;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c) return false;
  ++pos;
  return true;
}

struct Fold {
  // annotator -> (timestamp, label)
  std::map<std::string, std::pair<Timestamp, bool>> latest;
  std::optional<bool> resolution;

  void apply(const LogEntry& e) {
    switch (e.kind) {
      case LogKind::kReopen:
        latest.clear();
        resolution.reset();
        break;
      case LogKind::kResolve:
        resolution = e.label;
        break;
      case LogKind::kLabel: {
        auto it = latest.find(e.actor);
        if (it == latest.end() || e.timestamp >= it->second.first) {
          latest[e.actor] = {e.timestamp, *e.label};
        }
        break;
      }
    }
  }

  AdjudicatedLabel result(const std::string& instance_id) const {
    AdjudicatedLabel a;
    a.instance_id = instance_id;
    for (const auto& [who, v] : latest) a.annotator_labels.emplace(who, v.second);
    if (resolution) {
      a.status = LabelStatus::kResolved;
      a.label = resolution;
      return a;
    }
    if (latest.empty()) {
      a.status = LabelStatus::kUnlabeled;
    } else if (latest.size() == 1) {
      a.status = LabelStatus::kSingle;
    } else {
      const bool first = latest.begin()->second.second;
      const bool same = std::all_of(latest.begin(), latest.end(), [&](const auto& kv) {
        return kv.second.second == first;
      });
      a.status = same ? LabelStatus::kAgreed : LabelStatus::kConflicted;
      if (same) a.label = first;
    }
    return a;
  }
};

std::string errno_text() { return std::strerror(errno); }

}  // namespace

// ---------------------------------------------------------------------------
// Timestamps

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z",
                     static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()), hms.hours().count(),
                     hms.minutes().count(), hms.seconds().count(),
                     hms.subseconds().count());
}

Timestamp parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  auto bad = [&] {
    return ParseError("invalid RFC 3339 UTC timestamp '" + std::string(s) + "'");
  };
  std::size_t pos = 0;
  int y, mo, d, h, mi, sec;
  if (!read_digits(s, pos, 4, y) || !expect(s, pos, '-') ||
      !read_digits(s, pos, 2, mo) || !expect(s, pos, '-') ||
      !read_digits(s, pos, 2, d)) {
    throw bad();
  }
  if (pos >= s.size() || (s[pos] != 'T' && s[pos] != 't')) throw bad();
  ++pos;
  if (!read_digits(s, pos, 2, h) || !expect(s, pos, ':') ||
      !read_digits(s, pos, 2, mi) || !expect(s, pos, ':') ||
      !read_digits(s, pos, 2, sec)) {
    throw bad();
  }
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int scale = 100;
    const std::size_t begin = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      millis += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == begin) throw bad();
  }
  const std::string_view zone = s.substr(pos);
  if (zone != "Z" && zone != "z" && zone != "+00:00") throw bad();
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) throw bad();
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} +
         milliseconds{millis};
}

// ---------------------------------------------------------------------------
// Log format

std::string serialize_log_entry(const LogEntry& e) {
  OrderedJson j;
  j["kind"] = kind_name(e.kind);
  j["instance_id"] = e.instance_id;
  j[e.kind == LogKind::kLabel ? "annotator_id" : "adjudicator_id"] = e.actor;
  if (e.label) j["label"] = *e.label ? 1 : 0;
  j["timestamp"] = format_timestamp(e.timestamp);
  j["guideline_version"] = e.guideline_version;
  return internal::dump_line(j);
}

LogEntry parse_log_entry(std::string_view line, const std::string& where) {
  const Json j = internal::parse_json(line, where);
  LogEntry e;
  const std::string kind = internal::optional_string(j, "kind");
  if (kind.empty() || kind == "label") {
    e.kind = LogKind::kLabel;
  } else if (kind == "resolve") {
    e.kind = LogKind::kResolve;
  } else if (kind == "reopen") {
    e.kind = LogKind::kReopen;
  } else {
    throw ParseError(where + ": unknown entry kind '" + kind + "'");
  }
  e.instance_id = internal::require_string(j, "instance_id", where);
  e.actor = internal::require_string(
      j, e.kind == LogKind::kLabel ? "annotator_id" : "adjudicator_id", where);
  if (e.kind != LogKind::kReopen) {
    const auto label = internal::require_int(j, "label", where);
    if (label != 0 && label != 1) {
      throw ValidationError(where + ": label must be 0 or 1");
    }
    e.label = label == 1;
  }
  try {
    e.timestamp = parse_timestamp(internal::require_string(j, "timestamp", where));
  } catch (const ParseError& err) {
    throw ParseError(where + ": " + err.what());
  }
  e.guideline_version = internal::optional_string(j, "guideline_version");
  return e;
}

std::vector<LogEntry> read_log(std::istream& in) {
  std::vector<LogEntry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_log_entry(line, "log line " + std::to_string(n)));
  }
  return out;
}

std::vector<LogEntry> load_log(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_log(in);
}

std::string status_name(LabelStatus status) {
  switch (status) {
    case LabelStatus::kUnlabeled: return "unlabeled";
    case LabelStatus::kSingle: return "single";
    case LabelStatus::kAgreed: return "agreed";
    case LabelStatus::kConflicted: return "conflicted";
    case LabelStatus::kResolved: return "resolved";
  }
  return "unlabeled";
}

// ---------------------------------------------------------------------------
// Adjudication

const AdjudicatedLabel* Adjudication::find(std::string_view instance_id) const {
  auto it = std::lower_bound(
      labels.begin(), labels.end(), instance_id,
      [](const AdjudicatedLabel& a, std::string_view id) { return a.instance_id < id; });
  return it != labels.end() && it->instance_id == instance_id ? &*it : nullptr;
}

Adjudication adjudicate(std::span<const LogEntry> log) {
  std::map<std::string, Fold> folds;
  for (const auto& e : log) folds[e.instance_id].apply(e);
  Adjudication out;
  for (const auto& [id, fold] : folds) {
    AdjudicatedLabel a = fold.result(id);
    switch (a.status) {
      case LabelStatus::kAgreed: ++out.agreed; break;
      case LabelStatus::kConflicted: ++out.conflicted; break;
      case LabelStatus::kSingle: ++out.single; break;
      case LabelStatus::kResolved: ++out.resolved; break;
      case LabelStatus::kUnlabeled: break;
    }
    out.labels.push_back(std::move(a));
  }
  if (out.agreed + out.conflicted > 0) {
    out.agreement_rate = static_cast<double>(out.agreed) /
                         static_cast<double>(out.agreed + out.conflicted);
  }
  return out;
}

BuildReport build_cre(const Adjudication& adjudication,
                      std::span<const CreRecord> tasks) {
  BuildReport report;
  std::vector<CreRecord> records;
  for (const auto& task : tasks) {
    const AdjudicatedLabel* a = adjudication.find(task.instance.instance_id);
    const LabelStatus status = a ? a->status : LabelStatus::kUnlabeled;
    switch (status) {
      case LabelStatus::kAgreed:
      case LabelStatus::kResolved: {
        CreRecord r = task;
        r.instance.gold = a->label;
        r.group = r.instance.relation;
        r.task_index.reset();
        records.push_back(std::move(r));
        break;
      }
      case LabelStatus::kConflicted: ++report.excluded_conflicted; break;
      case LabelStatus::kSingle: ++report.excluded_single; break;
      case LabelStatus::kUnlabeled: ++report.excluded_unlabeled; break;
    }
  }
  report.included = records.size();
  report.dataset = make_cre_dataset(records);
  report.stats = dataset_stats(report.dataset);
  return report;
}

// ---------------------------------------------------------------------------
// Service

AnnotationService::AnnotationService(std::vector<CreRecord> tasks,
                                     std::filesystem::path log_path,
                                     std::string guideline_version, Clock clock)
    : tasks_(std::move(tasks)),
      log_path_(std::move(log_path)),
      guideline_version_(std::move(guideline_version)),
      clock_(std::move(clock)) {
  if (!clock_) {
    clock_ = [] {
      return std::chrono::floor<std::chrono::milliseconds>(
          std::chrono::system_clock::now());
    };
  }
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (!task_index_.emplace(tasks_[i].instance.instance_id, i).second) {
      throw CollisionError("task instance_id " + tasks_[i].instance.instance_id +
                           " occurs more than once");
    }
  }
  live_.resize(tasks_.size());

  if (std::filesystem::exists(log_path_)) {
    std::string content;
    {
      auto in = internal::open_input(log_path_);
      content.assign(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
    }
    const auto last_newline = content.rfind('\n');
    const std::size_t keep =
        last_newline == std::string::npos ? 0 : last_newline + 1;
    if (keep < content.size()) {
      content.resize(keep);
      std::filesystem::resize_file(log_path_, keep);
    }
    std::istringstream in(content);
    for (auto& e : read_log(in)) apply(e);
  }
  fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error("io_error", "cannot open label log " + log_path_.string() + ": " +
                                errno_text());
  }
}

AnnotationService::~AnnotationService() {
  if (fd_ >= 0) ::close(fd_);
}

void AnnotationService::apply(const LogEntry& entry) {
  log_.push_back(entry);
  auto it = task_index_.find(entry.instance_id);
  if (it == task_index_.end()) return;
  auto& live = live_[it->second];
  if (entry.kind == LogKind::kReopen) live.clear();
  live.push_back(entry);
}

void AnnotationService::append(const LogEntry& entry) {
  const std::string line = serialize_log_entry(entry) + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("io_error", "label log write failed: " + errno_text());
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw Error("io_error", "label log fsync failed: " + errno_text());
  }
  apply(entry);
}

const CreRecord* AnnotationService::find_task(std::string_view instance_id) const {
  auto it = task_index_.find(std::string(instance_id));
  return it == task_index_.end() ? nullptr : &tasks_[it->second];
}

std::optional<CreRecord> AnnotationService::next_task(
    std::string_view annotator_id) const {
  std::shared_lock lock(mu_);
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    bool skip = false;
    for (const auto& e : live_[i]) {
      if ((e.kind == LogKind::kLabel && e.actor == annotator_id) ||
          e.kind == LogKind::kResolve) {
        skip = true;
        break;
      }
    }
    if (!skip) return tasks_[i];
  }
  return std::nullopt;
}

AnnotationService::SubmitResult AnnotationService::submit_label(
    const std::string& instance_id, const std::string& annotator_id, bool label,
    std::optional<std::string> guideline_version) {
  if (annotator_id.empty()) throw ValidationError("annotator id is empty");
  std::unique_lock lock(mu_);
  auto it = task_index_.find(instance_id);
  if (it == task_index_.end()) {
    throw NotFoundError("unknown instance_id " + instance_id);
  }
  Fold fold;
  for (const auto& e : live_[it->second]) fold.apply(e);
  SubmitResult result;
  result.entry.kind = LogKind::kLabel;
  result.entry.instance_id = instance_id;
  result.entry.actor = annotator_id;
  result.entry.label = label;
  result.entry.guideline_version = guideline_version.value_or(guideline_version_);
  if (auto cur = fold.latest.find(annotator_id);
      cur != fold.latest.end() && cur->second.second == label) {
    result.entry.timestamp = cur->second.first;
    result.duplicate = true;
    return result;
  }
  result.entry.timestamp = clock_();
  append(result.entry);
  return result;
}

LogEntry AnnotationService::resolve(const std::string& instance_id,
                                    const std::string& adjudicator, bool label) {
  if (adjudicator.empty()) throw ValidationError("adjudicator id is empty");
  std::unique_lock lock(mu_);
  if (!task_index_.contains(instance_id)) {
    throw NotFoundError("unknown instance_id " + instance_id);
  }
  LogEntry e{LogKind::kResolve, instance_id, adjudicator, label, clock_(),
             guideline_version_};
  append(e);
  return e;
}

LogEntry AnnotationService::reopen(const std::string& instance_id,
                                   const std::string& adjudicator) {
  if (adjudicator.empty()) throw ValidationError("adjudicator id is empty");
  std::unique_lock lock(mu_);
  if (!task_index_.contains(instance_id)) {
    throw NotFoundError("unknown instance_id " + instance_id);
  }
  LogEntry e{LogKind::kReopen, instance_id, adjudicator, std::nullopt, clock_(),
             guideline_version_};
  append(e);
  return e;
}

Adjudication AnnotationService::adjudication() const {
  std::shared_lock lock(mu_);
  return adjudicate(log_);
}

std::vector<CreRecord> AnnotationService::conflicts() const {
  std::shared_lock lock(mu_);
  std::vector<CreRecord> out;
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    Fold fold;
    for (const auto& e : live_[i]) fold.apply(e);
    if (fold.result(tasks_[i].instance.instance_id).status ==
        LabelStatus::kConflicted) {
      out.push_back(tasks_[i]);
    }
  }
  return out;
}

std::map<std::string, std::size_t> AnnotationService::labels_per_annotator() const {
  std::shared_lock lock(mu_);
  std::map<std::string, std::size_t> out;
  for (const auto& live : live_) {
    std::unordered_set<std::string> seen;
    for (const auto& e : live) {
      if (e.kind == LogKind::kLabel && seen.insert(e.actor).second) ++out[e.actor];
    }
  }
  return out;
}

std::vector<LogEntry> AnnotationService::log() const {
  std::shared_lock lock(mu_);
  return log_;
}

}  // namespace cre
