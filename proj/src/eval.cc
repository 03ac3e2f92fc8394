#include "cre/eval.h"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>

#include "cre/error.h"
#include "json_util.h"

namespace cre {

using internal::OrderedJson;

namespace {

std::optional<double> percent(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::string cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.1f}", *v) : std::string("undefined");
}

OrderedJson number_or_null(const std::optional<double>& v) {
  return v ? OrderedJson(*v) : OrderedJson(nullptr);
}

OrderedJson scored_json(const ConfusionCounts& c, const Metrics& m) {
  OrderedJson j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["tn"] = c.tn;
  j["fn"] = c.fn;
  j["total"] = c.total();
  j["acc"] = number_or_null(m.acc);
  j["acc_pos"] = number_or_null(m.acc_pos);
  j["acc_neg"] = number_or_null(m.acc_neg);
  j["precision"] = number_or_null(m.precision);
  j["recall"] = number_or_null(m.recall);
  j["f1"] = number_or_null(m.f1);
  return j;
}

std::string table_row(const std::string& name, const ConfusionCounts& c,
                      const Metrics& m) {
  return fmt::format("{:<36} {:>7} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
                     name, c.total(), c.tp, c.fp, c.tn, c.fn, cell(m.acc),
                     cell(m.acc_pos), cell(m.acc_neg), cell(m.precision),
                     cell(m.recall), cell(m.f1));
}

}  // namespace

void ConfusionCounts::add(bool gold, bool predicted) {
  if (gold) {
    ++(predicted ? tp : fn);
  } else {
    ++(predicted ? fp : tn);
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  tp += other.tp;
  fp += other.fp;
  tn += other.tn;
  fn += other.fn;
  return *this;
}

Metrics compute_metrics(const ConfusionCounts& c) {
  Metrics m;
  m.acc = percent(c.tp + c.tn, c.total());
  m.acc_pos = percent(c.tp, c.tp + c.fn);
  m.acc_neg = percent(c.tn, c.tn + c.fp);
  m.precision = percent(c.tp, c.tp + c.fp);
  m.recall = m.acc_pos;
  if (m.precision && m.recall) m.f1 = percent(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  return m;
}

EvalReport score_queries(std::span<const BinaryQuery> queries,
                         const PredictionIndex& predictions) {
  EvalReport report;
  std::vector<std::string> missing;
  std::unordered_set<std::string> reported;
  for (const auto& q : queries) {
    auto it = predictions.find(q.key);
    if (it == predictions.end()) {
      if (reported.insert(q.key).second) missing.push_back(q.key);
      continue;
    }
    const bool predicted = it->second.predicted_relation == q.relation;
    report.per_relation[q.relation].counts.add(q.gold, predicted);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i > 0) list += ", ";
      list += missing[i];
    }
    throw NotFoundError(std::to_string(missing.size()) +
                        " id(s) without a prediction: " + list);
  }
  for (auto& [relation, scored] : report.per_relation) {
    scored.metrics = compute_metrics(scored.counts);
    report.counts += scored.counts;
  }
  report.metrics = compute_metrics(report.counts);
  return report;
}

EvalReport score_binary(std::span<const CandidateInstance> gold,
                        const PredictionIndex& predictions) {
  std::vector<BinaryQuery> queries;
  queries.reserve(gold.size());
  for (const auto& inst : gold) {
    if (!inst.gold) {
      throw ValidationError("instance " + inst.instance_id + " has no gold label");
    }
    queries.push_back({inst.instance_id, inst.relation, *inst.gold});
  }
  return score_queries(queries, predictions);
}

std::vector<BinaryQuery> binarize_tacred(std::span<const TacredRecord> records,
                                         const SchemaConfig& schema) {
  std::vector<BinaryQuery> out;
  for (const auto& r : records) {
    for (const auto& relation :
         schema.compatible(r.subject.etype, r.object.etype)) {
      out.push_back({r.id, relation, r.label == relation});
    }
  }
  return out;
}

EvalReport score_tacred_binarized(std::span<const TacredRecord> records,
                                  const PredictionIndex& predictions,
                                  const SchemaConfig& schema) {
  return score_queries(binarize_tacred(records, schema), predictions);
}

std::vector<BinaryQuery> build_tacred_plus(std::span<const TacredRecord> records,
                                           const CreDataset& cre,
                                           Polarity polarity,
                                           const SchemaConfig& schema) {
  std::vector<BinaryQuery> out = binarize_tacred(records, schema);
  std::unordered_set<std::string> tacred_ids;
  for (const auto& r : records) tacred_ids.insert(r.id);
  const bool want = polarity == Polarity::kPositive;
  for (const auto& inst : cre.instances) {
    if (!inst.gold) {
      throw ValidationError("CRE instance " + inst.instance_id +
                            " has no gold label");
    }
    if (*inst.gold != want) continue;
    if (tacred_ids.contains(inst.instance_id)) {
      throw CollisionError("CRE instance id " + inst.instance_id +
                           " collides with a TACRED record id");
    }
    out.push_back({inst.instance_id, inst.relation, *inst.gold});
  }
  return out;
}

std::string render_table(const EvalReport& report) {
  std::string out = fmt::format(
      "{:<36} {:>7} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
      "relation", "N", "TP", "FP", "TN", "FN", "Acc", "Acc+", "Acc-", "P", "R",
      "F1");
  for (const auto& [relation, scored] : report.per_relation) {
    out += table_row(relation, scored.counts, scored.metrics);
  }
  out += table_row("TOTAL", report.counts, report.metrics);
  return out;
}

std::string render_json(const EvalReport& report) {
  OrderedJson j;
  j["total"] = scored_json(report.counts, report.metrics);
  OrderedJson per = OrderedJson::object();
  for (const auto& [relation, scored] : report.per_relation) {
    per[relation] = scored_json(scored.counts, scored.metrics);
  }
  j["per_relation"] = std::move(per);
  return j.dump(2) + "\n";
}

}  // namespace cre
