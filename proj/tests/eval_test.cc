#include <gtest/gtest.h>

#include <random>

#include "cre/error.h"
#include "cre/eval.h"
#include "json.hpp"
#include "testing/generators.h"
#include "testing/oracles.h"

namespace cre {
namespace {

using testing::default_schema;

TEST(Metrics, DefinitionsOnSmallCounts) {
  const ConfusionCounts c{3, 1, 4, 2};
  const auto m = compute_metrics(c);
  EXPECT_DOUBLE_EQ(*m.acc, 70.0);
  EXPECT_DOUBLE_EQ(*m.acc_pos, 60.0);
  EXPECT_DOUBLE_EQ(*m.acc_neg, 80.0);
  EXPECT_DOUBLE_EQ(*m.precision, 75.0);
  EXPECT_DOUBLE_EQ(*m.recall, 60.0);
  EXPECT_NEAR(*m.f1, 100.0 * 2 * 0.75 * 0.6 / 1.35, 1e-9);
}

TEST(Metrics, ZeroDenominatorsAreUndefined) {
  const auto none = compute_metrics({});
  EXPECT_FALSE(none.acc);
  EXPECT_FALSE(none.f1);
  const auto only_neg = compute_metrics({0, 0, 5, 0});
  EXPECT_DOUBLE_EQ(*only_neg.acc, 100.0);
  EXPECT_FALSE(only_neg.acc_pos);
  EXPECT_FALSE(only_neg.precision);
  EXPECT_FALSE(only_neg.recall);
  EXPECT_FALSE(only_neg.f1);
  const auto no_hits = compute_metrics({0, 0, 2, 3});
  EXPECT_FALSE(no_hits.precision);
  EXPECT_DOUBLE_EQ(*no_hits.recall, 0.0);
}

TEST(Metrics, AccuracyIsWeightedMeanOfPolarityAccuracies) {
  std::mt19937_64 gen(2);
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{testing::draw(gen, 50) + 1, testing::draw(gen, 50),
                            testing::draw(gen, 50) + 1, testing::draw(gen, 50)};
    const auto m = compute_metrics(c);
    const double pos = static_cast<double>(c.positives());
    const double neg = static_cast<double>(c.negatives());
    EXPECT_NEAR(*m.acc, (*m.acc_pos * pos + *m.acc_neg * neg) / (pos + neg), 1e-9);
    EXPECT_LE(*m.acc, std::max(*m.acc_pos, *m.acc_neg) + 1e-9);
    EXPECT_GE(*m.acc, std::min(*m.acc_pos, *m.acc_neg) - 1e-9);
  }
}

TEST(Metrics, PercentageRowRecoversAccuracyTriple) {
  // TP/FP/TN/FN as percentages of one challenge set.
  const ConfusionCounts c{399, 318, 236, 45};
  const auto m = compute_metrics(c);
  EXPECT_NEAR(*m.acc, 63.5, 0.5);
  EXPECT_NEAR(*m.acc_pos, 89.7, 0.5);
  EXPECT_NEAR(*m.acc_neg, 42.5, 0.5);
}

PredictionIndex index_of(const std::vector<std::pair<std::string, std::string>>& v) {
  PredictionIndex idx;
  for (const auto& [k, rel] : v) idx.emplace(k, Prediction{k, "", rel, "", {}});
  return idx;
}

TEST(ScoreQueries, AgreesWithDirectCount) {
  std::mt19937_64 gen(13);
  const std::vector<std::string> rels{"per:spouse", "per:age", "org:founded"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<BinaryQuery> qs;
    std::vector<std::pair<std::string, std::string>> preds;
    std::map<std::string, std::pair<std::vector<bool>, std::vector<bool>>> per;
    std::vector<bool> all_gold, all_pred;
    const std::size_t n = 1 + testing::draw(gen, 60);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string key = "k" + std::to_string(i);
      const auto& rel = rels[testing::draw(gen, rels.size())];
      const bool gold = gen() % 2;
      const auto& said = testing::draw(gen, 3) == 0 ? std::string("no_relation")
                                                     : rels[testing::draw(gen, rels.size())];
      qs.push_back({key, rel, gold});
      preds.emplace_back(key, said);
      per[rel].first.push_back(gold);
      per[rel].second.push_back(said == rel);
      all_gold.push_back(gold);
      all_pred.push_back(said == rel);
    }
    const auto report = score_queries(qs, index_of(preds));
    const auto total = testing::count(all_gold, all_pred);
    EXPECT_EQ(report.counts, (ConfusionCounts{total.tp, total.fp, total.tn, total.fn}));
    for (const auto& [rel, gp] : per) {
      const auto c = testing::count(gp.first, gp.second);
      EXPECT_EQ(report.per_relation.at(rel).counts, (ConfusionCounts{c.tp, c.fp, c.tn, c.fn}));
    }
  }
}

TEST(ScoreQueries, MissingPredictionsAreListed) {
  const std::vector<BinaryQuery> qs{{"a", "per:age", true}, {"b", "per:age", false},
                                    {"b", "per:title", false}, {"c", "per:age", false}};
  try {
    score_queries(qs, index_of({{"a", "per:age"}}));
    FAIL();
  } catch (const NotFoundError& e) {
    EXPECT_NE(std::string(e.what()).find("2 id(s)"), std::string::npos) << e.what();
  }
}

TEST(ScoreBinary, UnlabeledIsRejected) {
  CandidateInstance inst;
  inst.instance_id = "x";
  inst.relation = "per:age";
  EXPECT_THROW(score_binary(std::vector<CandidateInstance>{inst}, index_of({{"x", "per:age"}})),
               ValidationError);
}

TacredRecord tacred(const std::string& id, const std::string& label,
                    const std::string& subj_type, const std::string& obj_type) {
  TacredRecord r;
  r.id = id;
  r.sentence = testing::make_sentence(id, "A B C", {});
  r.subject = make_mention(r.sentence.tokens, 0, 0, subj_type);
  r.object = make_mention(r.sentence.tokens, 2, 2, obj_type);
  r.label = label;
  return r;
}

TEST(Binarize, OneQueryPerCompatibleRelation) {
  const std::vector<TacredRecord> records{tacred("t1", "per:age", "PERSON", "NUMBER"),
                                          tacred("t2", "no_relation", "PERSON", "PERSON"),
                                          tacred("t3", "per:spouse", "PERSON", "DATE")};
  const auto qs = binarize_tacred(records, default_schema());
  std::map<std::string, int> per_key;
  int positives = 0;
  for (const auto& q : qs) {
    ++per_key[q.key];
    positives += q.gold;
    EXPECT_TRUE(testing::scan_compatible(
                    q.key == "t1" ? "PERSON" : "PERSON",
                    q.key == "t1" ? "NUMBER" : (q.key == "t2" ? "PERSON" : "DATE"),
                    default_schema())
                    .contains(q.relation));
  }
  EXPECT_EQ(per_key["t1"],
            static_cast<int>(testing::scan_compatible("PERSON", "NUMBER", default_schema()).size()));
  EXPECT_EQ(per_key["t2"], 6);
  // per:spouse does not take a DATE object, so t3 has no positive query.
  EXPECT_EQ(positives, 1);
}

CreDataset tiny_cre() {
  std::vector<CreRecord> records;
  const auto s = testing::make_sentence("c1", "Ann met Bob and Cy",
                                        {{0, 0, "PERSON"}, {2, 2, "PERSON"}, {4, 4, "PERSON"}});
  int k = 0;
  for (auto inst : enumerate_pairs(s, default_schema())) {
    if (inst.relation != "per:spouse") continue;
    inst.gold = (k++ % 3) == 0;
    records.push_back({inst, s.tokens, inst.relation, "x", {}});
  }
  return make_cre_dataset(records);
}

TEST(TacredPlus, AddsOnlyTheChosenPolarity) {
  const std::vector<TacredRecord> records{tacred("t1", "per:spouse", "PERSON", "PERSON"),
                                          tacred("t2", "no_relation", "PERSON", "PERSON")};
  const auto cre = tiny_cre();
  const auto base = binarize_tacred(records, default_schema());
  for (auto pol : {Polarity::kPositive, Polarity::kNegative}) {
    const auto plus = build_tacred_plus(records, cre, pol, default_schema());
    ASSERT_GE(plus.size(), base.size());
    EXPECT_TRUE(std::equal(base.begin(), base.end(), plus.begin()));
    std::size_t expected_added = 0;
    for (const auto& inst : cre.instances) {
      if (*inst.gold == (pol == Polarity::kPositive)) ++expected_added;
    }
    EXPECT_EQ(plus.size() - base.size(), expected_added);
    for (std::size_t i = base.size(); i < plus.size(); ++i) {
      EXPECT_EQ(plus[i].gold, pol == Polarity::kPositive);
      EXPECT_EQ(plus[i].relation, "per:spouse");
    }
  }
}

TEST(TacredPlus, IdCollisionIsRejected) {
  const auto cre = tiny_cre();
  const std::string clash = cre.instances.front().instance_id;
  const std::vector<TacredRecord> records{tacred(clash, "per:spouse", "PERSON", "PERSON")};
  EXPECT_THROW(build_tacred_plus(records, cre, Polarity::kPositive, default_schema()),
               CollisionError);
}

TEST(Render, TableAndJsonMarkUndefined) {
  const std::vector<BinaryQuery> qs{{"a", "per:age", false}, {"b", "per:age", false}};
  const auto report = score_queries(qs, index_of({{"a", "per:age"}, {"b", "no_relation"}}));
  const auto table = render_table(report);
  EXPECT_NE(table.find("undefined"), std::string::npos);
  EXPECT_NE(table.find("50.0"), std::string::npos);
  EXPECT_NE(table.find("TOTAL"), std::string::npos);
  const auto j = nlohmann::json::parse(render_json(report));
  EXPECT_TRUE(j["total"]["acc_pos"].is_null());
  EXPECT_EQ(j["total"]["fp"], 1);
  EXPECT_DOUBLE_EQ(j["per_relation"]["per:age"]["acc_neg"].get<double>(), 50.0);
}

TEST(ScoreTacred, PerfectAndAbstaining) {
  const std::vector<TacredRecord> records{tacred("t1", "per:age", "PERSON", "NUMBER"),
                                          tacred("t2", "per:spouse", "PERSON", "PERSON"),
                                          tacred("t3", "no_relation", "PERSON", "PERSON")};
  const auto perfect = score_tacred_binarized(
      records, index_of({{"t1", "per:age"}, {"t2", "per:spouse"}, {"t3", "no_relation"}}),
      default_schema());
  EXPECT_DOUBLE_EQ(*perfect.metrics.precision, 100.0);
  EXPECT_DOUBLE_EQ(*perfect.metrics.recall, 100.0);
  EXPECT_DOUBLE_EQ(*perfect.metrics.f1, 100.0);
  const auto silent = score_tacred_binarized(
      records, index_of({{"t1", "no_relation"}, {"t2", "no_relation"}, {"t3", "no_relation"}}),
      default_schema());
  EXPECT_DOUBLE_EQ(*silent.metrics.recall, 0.0);
  EXPECT_FALSE(silent.metrics.precision.has_value());
}

TEST(TacredPlus, EmptyCreChangesNothing) {
  const std::vector<TacredRecord> records{tacred("t1", "per:spouse", "PERSON", "PERSON")};
  EXPECT_EQ(build_tacred_plus(records, CreDataset{}, Polarity::kNegative, default_schema()),
            binarize_tacred(records, default_schema()));
}

TEST(ScoreBinary, AllCorrect) {
  std::mt19937_64 gen(1);
  const auto cre = testing::random_cre(gen, default_schema(), 20);
  PredictionIndex idx;
  for (const auto& inst : cre.instances) {
    idx.emplace(inst.instance_id, Prediction{inst.instance_id, "",
                                             *inst.gold ? inst.relation : "no_relation", "", {}});
  }
  const auto r = score_binary(cre.instances, idx);
  EXPECT_DOUBLE_EQ(*r.metrics.acc, 100.0);
  EXPECT_DOUBLE_EQ(*r.metrics.acc_pos, 100.0);
  EXPECT_DOUBLE_EQ(*r.metrics.acc_neg, 100.0);
}

}  // namespace
}  // namespace cre
