#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <sstream>
#include <thread>

#include "cre/annotate.h"
#include "cre/error.h"
#include "testing/generators.h"

namespace cre {
namespace {

using namespace std::chrono_literals;
using testing::default_schema;

Timestamp at(long long ms) { return Timestamp(std::chrono::milliseconds(ms)); }

LogEntry label(const std::string& id, const std::string& who, bool value, long long ms) {
  return {LogKind::kLabel, id, who, value, at(ms), "g1"};
}
LogEntry resolve(const std::string& id, bool value, long long ms) {
  return {LogKind::kResolve, id, "adj", value, at(ms), "g1"};
}
LogEntry reopen(const std::string& id, long long ms) {
  return {LogKind::kReopen, id, "adj", std::nullopt, at(ms), "g1"};
}

TEST(Timestamp, FormatAndParse) {
  const Timestamp t = at(1700000000123);
  EXPECT_EQ(format_timestamp(t), "2023-11-14T22:13:20.123Z");
  EXPECT_EQ(parse_timestamp("2023-11-14T22:13:20.123Z"), t);
  EXPECT_EQ(parse_timestamp("2023-11-14T22:13:20.123+00:00"), t);
  EXPECT_EQ(parse_timestamp("2023-11-14T22:13:20Z"), at(1700000000000));
  EXPECT_THROW(parse_timestamp("2023-11-14 22:13:20"), ParseError);
  EXPECT_THROW(parse_timestamp("2023-13-14T22:13:20Z"), ParseError);
}

TEST(LogEntry, RoundTripAndWireNames) {
  for (const auto& e : {label("i", "ann", true, 5), resolve("i", false, 6), reopen("i", 7)}) {
    const auto line = serialize_log_entry(e);
    EXPECT_EQ(parse_log_entry(line, "t"), e);
  }
  const auto line = serialize_log_entry(label("i", "ann", true, 0));
  EXPECT_NE(line.find(R"("annotator_id":"ann")"), std::string::npos);
  EXPECT_NE(line.find(R"("label":1)"), std::string::npos);
  EXPECT_NE(serialize_log_entry(resolve("i", true, 0)).find("adjudicator_id"), std::string::npos);
  EXPECT_THROW(parse_log_entry(R"({"kind":"vote","instance_id":"i"})", "t"), ParseError);
}

TEST(Adjudicate, StatusesOfSmallCases) {
  const std::vector<LogEntry> log{
      label("agree", "a", true, 1),  label("agree", "b", true, 2),
      label("split", "a", true, 1),  label("split", "b", false, 2),
      label("one", "a", false, 1),
      label("fixed", "a", true, 1),  label("fixed", "b", false, 2), resolve("fixed", false, 3),
      label("changed", "a", true, 1), label("changed", "b", false, 2),
      label("changed", "b", true, 3),
      label("late", "a", false, 9), label("late", "a", true, 4), label("late", "b", false, 5),
      label("reset", "a", true, 1), label("reset", "b", false, 2), resolve("reset", true, 3),
      reopen("reset", 4), label("reset", "c", false, 5)};
  const auto adj = adjudicate(log);
  auto status = [&](const std::string& id) { return adj.find(id)->status; };
  EXPECT_EQ(status("agree"), LabelStatus::kAgreed);
  EXPECT_EQ(adj.find("agree")->label, true);
  EXPECT_EQ(status("split"), LabelStatus::kConflicted);
  EXPECT_FALSE(adj.find("split")->label);
  EXPECT_EQ(status("one"), LabelStatus::kSingle);
  EXPECT_EQ(status("fixed"), LabelStatus::kResolved);
  EXPECT_EQ(adj.find("fixed")->label, false);
  EXPECT_EQ(status("changed"), LabelStatus::kAgreed);
  // The later timestamp wins even when logged first.
  EXPECT_EQ(status("late"), LabelStatus::kAgreed);
  EXPECT_EQ(adj.find("late")->label, false);
  EXPECT_EQ(status("reset"), LabelStatus::kSingle);
  EXPECT_EQ(adj.find("reset")->annotator_labels.size(), 1u);
  EXPECT_EQ(adj.agreed, 3u);
  EXPECT_EQ(adj.conflicted, 1u);
  EXPECT_EQ(adj.single, 2u);
  EXPECT_EQ(adj.resolved, 1u);
  EXPECT_DOUBLE_EQ(*adj.agreement_rate, 0.75);
  EXPECT_EQ(adj.find("absent"), nullptr);
}

// Reference fold: locate the last reopen, then pick winners by sorting.
AdjudicatedLabel brute(const std::string& id, const std::vector<LogEntry>& log) {
  std::vector<std::pair<std::size_t, LogEntry>> live;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].instance_id != id) continue;
    if (log[i].kind == LogKind::kReopen) live.clear();
    else live.emplace_back(i, log[i]);
  }
  AdjudicatedLabel a;
  a.instance_id = id;
  std::optional<bool> resolution;
  std::map<std::string, std::vector<std::pair<Timestamp, std::size_t>>> per;
  for (const auto& [pos, e] : live) {
    if (e.kind == LogKind::kResolve) resolution = e.label;
    if (e.kind == LogKind::kLabel) per[e.actor].emplace_back(e.timestamp, pos);
  }
  for (auto& [who, v] : per) {
    const auto best = *std::max_element(v.begin(), v.end());
    a.annotator_labels[who] = *log[best.second].label;
  }
  std::set<bool> values;
  for (const auto& [who, v] : a.annotator_labels) values.insert(v);
  if (resolution) {
    a.status = LabelStatus::kResolved;
    a.label = resolution;
  } else if (a.annotator_labels.empty()) {
    a.status = LabelStatus::kUnlabeled;
  } else if (a.annotator_labels.size() == 1) {
    a.status = LabelStatus::kSingle;
  } else if (values.size() == 1) {
    a.status = LabelStatus::kAgreed;
    a.label = *values.begin();
  } else {
    a.status = LabelStatus::kConflicted;
  }
  return a;
}

TEST(Adjudicate, MatchesReferenceOnRandomLogs) {
  std::mt19937_64 gen(31);
  const std::vector<std::string> ids{"i0", "i1", "i2", "i3", "i4"};
  const std::vector<std::string> people{"a", "b", "c"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<LogEntry> log;
    const std::size_t n = testing::draw(gen, 30);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& id = ids[testing::draw(gen, ids.size())];
      const long long ms = static_cast<long long>(testing::draw(gen, 8));
      const std::size_t roll = testing::draw(gen, 12);
      if (roll == 0) log.push_back(reopen(id, ms));
      else if (roll == 1) log.push_back(resolve(id, gen() % 2, ms));
      else log.push_back(label(id, people[testing::draw(gen, 3)], gen() % 2, ms));
    }
    const auto adj = adjudicate(log);
    std::size_t agreed = 0, conflicted = 0;
    for (const auto& a : adj.labels) {
      const auto b = brute(a.instance_id, log);
      EXPECT_EQ(a, b) << trial;
      agreed += b.status == LabelStatus::kAgreed;
      conflicted += b.status == LabelStatus::kConflicted;
    }
    if (agreed + conflicted == 0) {
      EXPECT_FALSE(adj.agreement_rate.has_value());
    } else {
      EXPECT_DOUBLE_EQ(*adj.agreement_rate, static_cast<double>(agreed) / (agreed + conflicted));
    }
    EXPECT_TRUE(std::is_sorted(adj.labels.begin(), adj.labels.end(),
                               [](const auto& x, const auto& y) { return x.instance_id < y.instance_id; }));
  }
}

std::vector<CreRecord> make_tasks(int sentences = 3) {
  std::mt19937_64 gen(77);
  auto records = testing::random_cre_records(gen, default_schema(), 200, "t");
  records.resize(std::min<std::size_t>(records.size(), static_cast<std::size_t>(sentences)));
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].instance.gold.reset();
    records[i].task_index = i;
  }
  return records;
}

TEST(BuildCre, KeepsOnlyAgreedAndResolved) {
  const auto tasks = make_tasks(5);
  auto id = [&](int i) { return tasks[static_cast<std::size_t>(i)].instance.instance_id; };
  const std::vector<LogEntry> log{label(id(0), "a", true, 1), label(id(0), "b", true, 1),
                                  label(id(1), "a", true, 1), label(id(1), "b", false, 1),
                                  label(id(2), "a", false, 1),
                                  label(id(3), "a", true, 1), resolve(id(3), false, 2)};
  const auto report = build_cre(adjudicate(log), tasks);
  EXPECT_EQ(report.included, 2u);
  EXPECT_EQ(report.excluded_conflicted, 1u);
  EXPECT_EQ(report.excluded_single, 1u);
  EXPECT_EQ(report.excluded_unlabeled, 1u);
  ASSERT_EQ(report.dataset.instances.size(), 2u);
  EXPECT_EQ(report.dataset.instances[0].gold, true);
  EXPECT_EQ(report.dataset.instances[1].gold, false);
  EXPECT_EQ(report.stats.instance_count, 2u);
}

class ServiceTest : public ::testing::Test {
 protected:
  testing::TempDir dir_;
  std::filesystem::path log_path_ = dir_.file("labels.jsonl");
  std::atomic<long long> now_{1000};
  AnnotationService::Clock clock_ = [this] { return at(now_++); };
};

TEST_F(ServiceTest, QueueAdvancesPerAnnotator) {
  const auto tasks = make_tasks(3);
  AnnotationService svc(tasks, log_path_, "g1", clock_);
  EXPECT_EQ(svc.next_task("a")->instance.instance_id, tasks[0].instance.instance_id);
  svc.submit_label(tasks[0].instance.instance_id, "a", true);
  EXPECT_EQ(svc.next_task("a")->instance.instance_id, tasks[1].instance.instance_id);
  EXPECT_EQ(svc.next_task("b")->instance.instance_id, tasks[0].instance.instance_id);
  for (const auto& t : tasks) svc.submit_label(t.instance.instance_id, "a", false);
  EXPECT_FALSE(svc.next_task("a").has_value());
  EXPECT_EQ(svc.labels_per_annotator().at("a"), 3u);
}

TEST_F(ServiceTest, ResubmittingTheSameLabelAppendsNothing) {
  const auto tasks = make_tasks(2);
  AnnotationService svc(tasks, log_path_, "g1", clock_);
  const auto& id = tasks[0].instance.instance_id;
  const auto first = svc.submit_label(id, "a", true);
  const auto again = svc.submit_label(id, "a", true);
  EXPECT_FALSE(first.duplicate);
  EXPECT_TRUE(again.duplicate);
  EXPECT_EQ(again.entry.timestamp, first.entry.timestamp);
  EXPECT_EQ(load_log(log_path_).size(), 1u);
  EXPECT_FALSE(svc.submit_label(id, "a", false).duplicate);
  EXPECT_EQ(load_log(log_path_).size(), 2u);
}

TEST_F(ServiceTest, BadRequests) {
  AnnotationService svc(make_tasks(1), log_path_, "g1", clock_);
  EXPECT_THROW(svc.submit_label("nope", "a", true), NotFoundError);
  EXPECT_THROW(svc.submit_label(svc.tasks()[0].instance.instance_id, "", true), ValidationError);
  EXPECT_THROW(svc.resolve("nope", "adj", true), NotFoundError);
  auto dup = make_tasks(1);
  dup.push_back(dup[0]);
  EXPECT_THROW(AnnotationService(dup, dir_.file("x.jsonl"), "g1", clock_), CollisionError);
}

TEST_F(ServiceTest, ConflictResolveReopen) {
  const auto tasks = make_tasks(2);
  AnnotationService svc(tasks, log_path_, "g1", clock_);
  const auto& id = tasks[1].instance.instance_id;
  svc.submit_label(id, "a", true);
  svc.submit_label(id, "b", false);
  ASSERT_EQ(svc.conflicts().size(), 1u);
  EXPECT_EQ(svc.conflicts()[0].instance.instance_id, id);
  svc.resolve(id, "adj", true);
  EXPECT_TRUE(svc.conflicts().empty());
  EXPECT_EQ(svc.adjudication().find(id)->status, LabelStatus::kResolved);
  // Resolved tasks leave every queue.
  EXPECT_EQ(svc.next_task("c")->instance.instance_id, tasks[0].instance.instance_id);
  svc.submit_label(tasks[0].instance.instance_id, "c", true);
  EXPECT_FALSE(svc.next_task("c").has_value());
  svc.reopen(id, "adj");
  EXPECT_EQ(svc.adjudication().find(id)->status, LabelStatus::kUnlabeled);
  EXPECT_EQ(svc.next_task("a")->instance.instance_id, tasks[0].instance.instance_id);
  svc.submit_label(tasks[0].instance.instance_id, "a", true);
  EXPECT_EQ(svc.next_task("a")->instance.instance_id, id);
}

TEST_F(ServiceTest, ReplayRestoresStateAndDropsTornLine) {
  const auto tasks = make_tasks(3);
  Adjudication before;
  {
    AnnotationService svc(tasks, log_path_, "g1", clock_);
    svc.submit_label(tasks[0].instance.instance_id, "a", true);
    svc.submit_label(tasks[0].instance.instance_id, "b", true);
    svc.submit_label(tasks[1].instance.instance_id, "a", false);
    before = svc.adjudication();
  }
  const auto intact = testing::read_file(log_path_);
  {
    std::ofstream out(log_path_, std::ios::app);
    out << R"({"kind":"label","instance_id":")" << tasks[2].instance.instance_id << R"(","annot)";
  }
  AnnotationService svc(tasks, log_path_, "g1", clock_);
  EXPECT_EQ(svc.adjudication(), before);
  EXPECT_EQ(testing::read_file(log_path_), intact);
  EXPECT_EQ(svc.next_task("a")->instance.instance_id, tasks[2].instance.instance_id);
  svc.submit_label(tasks[2].instance.instance_id, "a", true);
  EXPECT_EQ(load_log(log_path_).size(), 4u);
}

TEST_F(ServiceTest, ConcurrentSubmissionsAllLand) {
  const auto tasks = make_tasks(40);
  AnnotationService svc(tasks, log_path_, "g1", clock_);
  std::vector<std::thread> threads;
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      const std::string who = "w" + std::to_string(t);
      while (auto task = svc.next_task(who)) {
        svc.submit_label(task->instance.instance_id, who, t % 2 == 0);
        (void)svc.adjudication();
      }
    });
  }
  for (auto& th : threads) th.join();
  const auto log = load_log(log_path_);
  EXPECT_EQ(log.size(), 6u * tasks.size());
  EXPECT_EQ(adjudicate(log), svc.adjudication());
  EXPECT_EQ(svc.adjudication().conflicted, tasks.size());
}

}  // namespace
}  // namespace cre
