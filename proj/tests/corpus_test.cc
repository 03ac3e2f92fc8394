#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "cre/corpus.h"
#include "cre/error.h"
#include "testing/generators.h"
#include "testing/oracles.h"

namespace cre {
namespace {

using testing::default_schema;
using testing::make_sentence;

Sentence birth_sentence() {
  return make_sentence(
      "birth", "Ed was born in 1561 , the son of John , and his wife Mary",
      {{0, 0, "PERSON"}, {4, 4, "DATE"}, {9, 9, "PERSON"}, {14, 14, "PERSON"}});
}

Sentence spouse_sentence() {
  return make_sentence(
      "spouse",
      "Loomis is married to Hilary Mills , who wrote a biography about Norman Mailer .",
      {{0, 0, "PERSON"}, {4, 5, "PERSON"}, {12, 13, "PERSON"}});
}

const CandidateInstance& find(const std::vector<CandidateInstance>& v,
                              int subj_start, int obj_start,
                              const std::string& relation) {
  for (const auto& c : v) {
    if (c.subject.start == subj_start && c.object.start == obj_start &&
        c.relation == relation) {
      return c;
    }
  }
  throw std::runtime_error("candidate not found");
}

TEST(Mention, SurfaceIsDerivedFromTokens) {
  const auto s = spouse_sentence();
  EXPECT_EQ(s.mentions[1].surface, "Hilary Mills");
  EXPECT_EQ(s.text().substr(0, 20), "Loomis is married to");
}

TEST(Mention, OutOfBoundsIsRejected) {
  const std::vector<std::string> tokens{"a", "b"};
  EXPECT_THROW(make_mention(tokens, 1, 2, "PERSON"), ValidationError);
  EXPECT_THROW(make_mention(tokens, 1, 0, "PERSON"), ValidationError);
  EXPECT_THROW(make_mention(tokens, -1, 0, "PERSON"), ValidationError);
}

TEST(Sentence, ValidationCatchesStaleSurfaceAndDuplicateSpans) {
  auto s = spouse_sentence();
  EXPECT_NO_THROW(validate_sentence(s));
  s.mentions[0].surface = "Lomis";
  EXPECT_THROW(validate_sentence(s), ValidationError);
  s = spouse_sentence();
  s.mentions.push_back(make_mention(s.tokens, 0, 0, "ORGANIZATION"));
  EXPECT_THROW(validate_sentence(s), ValidationError);
  s = spouse_sentence();
  s.tokens.clear();
  s.mentions.clear();
  EXPECT_THROW(validate_sentence(s), ValidationError);
}

TEST(Instance, IdIsAFrozenDigest) {
  const std::vector<std::string> tokens{"Ed", "was", "born", "in", "1561"};
  const auto inst = make_instance("s1", make_mention(tokens, 0, 0, "PERSON"),
                                  make_mention(tokens, 4, 4, "DATE"),
                                  "per:date_of_birth");
  EXPECT_EQ(inst.instance_id, "8233649899b63d91a3344187");
}

TEST(Instance, IdenticalSpansAreRejected) {
  const std::vector<std::string> tokens{"a", "b"};
  const auto m = make_mention(tokens, 0, 0, "PERSON");
  EXPECT_THROW(make_instance("s", m, m, "per:spouse"), ValidationError);
}

TEST(SentenceFile, RoundTrip) {
  const std::vector<Sentence> in{birth_sentence(), spouse_sentence()};
  std::stringstream buf;
  write_sentences(in, buf);
  EXPECT_EQ(read_sentences(buf), in);
}

TEST(SentenceFile, DuplicateIdsAreRejected) {
  std::stringstream buf;
  write_sentences({birth_sentence(), birth_sentence()}, buf);
  EXPECT_THROW(read_sentences(buf), ValidationError);
}

constexpr const char* kTacredRecord = R"({"id": "r1", "docid": "d", "relation": "per:age",
 "token": ["Tom", ",", "42", ",", "left"], "subj_start": 0, "subj_end": 0,
 "obj_start": 2, "obj_end": 2, "subj_type": "PERSON", "obj_type": "NUMBER",
 "stanford_ner": ["PERSON", "O", "NUMBER", "O", "O"]})";

TEST(Tacred, FieldsMapDirectly) {
  std::stringstream buf(std::string("[") + kTacredRecord + "]");
  const auto records = read_tacred(buf);
  ASSERT_EQ(records.size(), 1u);
  const auto& r = records[0];
  EXPECT_EQ(r.id, "r1");
  EXPECT_EQ(r.label, "per:age");
  EXPECT_EQ(r.subject.etype, "PERSON");
  EXPECT_EQ(r.object.etype, "NUMBER");
  EXPECT_EQ(r.object.surface, "42");
  const auto inst = r.instance_for("per:age");
  EXPECT_EQ(inst.relation, "per:age");
  EXPECT_EQ(inst.gold, true);
  EXPECT_EQ(r.instance_for("per:title").gold, false);
}

TEST(Tacred, AcceptsOneRecordPerLine) {
  std::string line = kTacredRecord;
  std::erase(line, '\n');
  std::stringstream buf(line + "\n" + line + "\n");
  EXPECT_EQ(read_tacred(buf).size(), 2u);
}

TEST(Tacred, InvertedSpanNamesTheRecord) {
  std::string rec = kTacredRecord;
  rec.replace(rec.find("\"subj_end\": 0"), 13, "\"subj_end\": -1");
  std::stringstream buf("[" + rec + "]");
  try {
    read_tacred(buf);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("r1"), std::string::npos) << e.what();
  }
}

TEST(Tacred, MissingFieldIsParseError) {
  std::stringstream buf(R"([{"id": "x", "token": ["a"]}])");
  EXPECT_THROW(read_tacred(buf), ParseError);
}

TEST(Tacred, WriteThenReadRoundTrips) {
  std::stringstream buf(std::string("[") + kTacredRecord + "]");
  const auto records = read_tacred(buf);
  std::stringstream out;
  write_tacred(records, out);
  EXPECT_EQ(read_tacred(out), records);
}

CreRecord sample_record() {
  const std::vector<std::string> tokens{"Ed", "was", "born", "in", "1561"};
  CreRecord r;
  r.instance = make_instance("s1", make_mention(tokens, 0, 0, "PERSON"),
                             make_mention(tokens, 4, 4, "DATE"),
                             "per:date_of_birth", true);
  r.tokens = tokens;
  r.group = "per:date_of_birth";
  r.source = "doc7";
  return r;
}

TEST(CreRecordFormat, CanonicalBytes) {
  EXPECT_EQ(serialize_cre_record(sample_record()),
            R"({"instance_id":"8233649899b63d91a3344187","sentence_id":"s1",)"
            R"("tokens":["Ed","was","born","in","1561"],)"
            R"("subj":{"start":0,"end":0,"type":"PERSON"},)"
            R"("obj":{"start":4,"end":4,"type":"DATE"},)"
            R"("relation":"per:date_of_birth","label":1,)"
            R"("group":"per:date_of_birth","source":"doc7"})");
}

TEST(CreRecordFormat, LabelOmittedAndTaskIndexAppended) {
  auto r = sample_record();
  r.instance.gold.reset();
  r.task_index = 3;
  const auto line = serialize_cre_record(r);
  EXPECT_EQ(line.find("label"), std::string::npos);
  EXPECT_TRUE(line.ends_with(R"("source":"doc7","task_index":3})"));
  EXPECT_EQ(parse_cre_record(line, "t"), r);
}

TEST(CreRecordFormat, TamperedIdIsRejected) {
  auto line = serialize_cre_record(sample_record());
  line.replace(line.find("8233"), 4, "0000");
  EXPECT_THROW(parse_cre_record(line, "t"), ValidationError);
}

TEST(CreRecordFormat, NonBinaryLabelIsRejected) {
  auto line = serialize_cre_record(sample_record());
  line.replace(line.find("\"label\":1"), 9, "\"label\":2");
  EXPECT_THROW(parse_cre_record(line, "t"), ValidationError);
}

TEST(CreDataset, EmptyFileIsEmptyDataset) {
  std::stringstream buf("");
  const auto d = read_cre(buf);
  EXPECT_TRUE(d.groups.empty());
  EXPECT_TRUE(d.instances.empty());
}

TEST(CreDataset, DuplicateIdIsCollision) {
  std::stringstream buf;
  write_cre_records({sample_record(), sample_record()}, buf);
  EXPECT_THROW(read_cre(buf), CollisionError);
}

TEST(CreDataset, GroupMustMatchRelation) {
  auto r = sample_record();
  r.group = "per:spouse";
  EXPECT_THROW(make_cre_dataset({r}), ValidationError);
}

TEST(CreDataset, MissingLabelIsRejected) {
  auto r = sample_record();
  r.instance.gold.reset();
  EXPECT_THROW(make_cre_dataset({r}), ValidationError);
}

TEST(CreDataset, RandomRoundTrip) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CreRecord> records;
    for (int k = 0; k < 8; ++k) {
      const auto s = testing::random_sentence(gen, default_schema(),
                                              "s" + std::to_string(k), 5);
      for (auto& inst : enumerate_pairs(s, default_schema())) {
        inst.gold = gen() % 2 == 0;
        records.push_back({inst, s.tokens, inst.relation, s.source, {}});
      }
    }
    const auto d = make_cre_dataset(records);
    std::stringstream buf;
    write_cre(d, buf);
    const auto back = read_cre(buf);
    ASSERT_EQ(back, d);
    for (const auto& inst : back.instances) {
      EXPECT_EQ(inst.instance_id, make_instance_id(inst.sentence_id, inst.subject,
                                                   inst.object, inst.relation));
    }
  }
}

TEST(Enumerate, SingleMentionYieldsNothing) {
  const auto s = make_sentence("one", "Ed slept", {{0, 0, "PERSON"}});
  EXPECT_TRUE(enumerate_pairs(s, default_schema()).empty());
}

TEST(Enumerate, EveryPersonPairsWithTheBirthDate) {
  const auto pairs = enumerate_pairs(birth_sentence(), default_schema());
  for (int subj : {0, 9, 14}) {
    EXPECT_NO_THROW(find(pairs, subj, 4, "per:date_of_birth")) << subj;
  }
  EXPECT_EQ(testing::keys_of(pairs),
            testing::brute_pairs(birth_sentence(), default_schema()));
}

TEST(Enumerate, DirectionalPairsBothEmitted) {
  const auto pairs = enumerate_pairs(spouse_sentence(), default_schema());
  EXPECT_NO_THROW(find(pairs, 0, 4, "per:spouse"));
  EXPECT_NO_THROW(find(pairs, 4, 0, "per:spouse"));
  // 3 PERSON mentions, 6 ordered pairs, 6 PERSON x PERSON relations.
  EXPECT_EQ(pairs.size(), 36u);
}

TEST(Enumerate, OverlappingMentionsAreNeverPaired) {
  const auto s = make_sentence("nested", "New York Times reporter Ann",
                               {{0, 2, "ORGANIZATION"}, {0, 1, "CITY"}, {4, 4, "PERSON"}});
  for (const auto& c : enumerate_pairs(s, default_schema())) {
    EXPECT_FALSE(c.subject.overlaps(c.object));
  }
}

TEST(Enumerate, OrderIsSortedAndIdsUnique) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 300; ++i) {
    const auto s = testing::random_sentence(gen, default_schema(), "r", 6);
    const auto pairs = enumerate_pairs(s, default_schema());
    std::set<std::string> ids;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      EXPECT_TRUE(ids.insert(pairs[k].instance_id).second);
      if (k > 0) {
        const auto& a = pairs[k - 1];
        const auto& b = pairs[k];
        EXPECT_LE(std::tie(a.subject.start, a.object.start, a.relation),
                  std::tie(b.subject.start, b.object.start, b.relation));
      }
    }
    EXPECT_EQ(testing::keys_of(pairs), testing::brute_pairs(s, default_schema()));
  }
}

TEST(Confusion, SpouseExpansionIncludesTheOtherPerson) {
  const auto s = spouse_sentence();
  const auto pairs = enumerate_pairs(s, default_schema());
  const auto& annotated = find(pairs, 0, 4, "per:spouse");
  const auto expanded = expand_confusion_set(s, annotated, default_schema());
  EXPECT_NO_THROW(find(expanded, 0, 12, "per:spouse"));
  for (const auto& x : expanded) EXPECT_NE(x.instance_id, annotated.instance_id);
}

TEST(Confusion, OnlyTypeMatchingPairIsEmpty) {
  const auto s = make_sentence("rel", "Ann is Catholic", {{0, 0, "PERSON"}, {2, 2, "RELIGION"}});
  const auto pairs = enumerate_pairs(s, default_schema());
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_TRUE(expand_confusion_set(s, pairs[0], default_schema()).empty());
}

TEST(Confusion, ForeignInstanceIsNotFound) {
  const auto other = enumerate_pairs(spouse_sentence(), default_schema());
  EXPECT_THROW(expand_confusion_set(birth_sentence(), other[0], default_schema()),
               NotFoundError);
}

TEST(Confusion, MatchesFilterOfEnumeration) {
  std::mt19937_64 gen(9);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    auto s = testing::random_sentence(gen, default_schema(), "c", 5);
    const auto pairs = enumerate_pairs(s, default_schema());
    if (pairs.empty()) continue;
    const auto& x = pairs[testing::draw(gen, pairs.size())];
    std::set<std::string> expected;
    for (const auto& c : pairs) {
      if (c.instance_id != x.instance_id && c.relation == x.relation &&
          c.subject.etype == x.subject.etype && c.object.etype == x.object.etype) {
        expected.insert(c.instance_id);
      }
    }
    std::set<std::string> got;
    for (const auto& c : expand_confusion_set(s, x, default_schema())) {
      got.insert(c.instance_id);
    }
    EXPECT_EQ(got, expected);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(SharesArgument, MatchesSpanCheck) {
  const auto pairs = enumerate_pairs(spouse_sentence(), default_schema());
  for (const auto& a : pairs) {
    for (const auto& b : pairs) {
      EXPECT_EQ(shares_argument(a, b), testing::spans_touch(a, b));
    }
  }
}

TEST(Stats, OneSentenceMixedLabelsSharingSubject) {
  const auto s = testing::make_sentence("s", "Ann wed Bob not Cy",
                                        {{0, 0, "PERSON"}, {2, 2, "PERSON"}, {4, 4, "PERSON"}});
  auto a = make_instance("s", s.mentions[0], s.mentions[1], "per:spouse", true);
  auto b = make_instance("s", s.mentions[0], s.mentions[2], "per:spouse", false);
  const auto d = make_cre_dataset({{a, s.tokens, "per:spouse", "x", {}},
                                   {b, s.tokens, "per:spouse", "x", {}}});
  const auto st = dataset_stats(d);
  EXPECT_EQ(st.sentence_count, 1u);
  EXPECT_DOUBLE_EQ(*st.conflicting_label_fraction, 1.0);
  EXPECT_DOUBLE_EQ(*st.shared_argument_fraction, 1.0);
  EXPECT_DOUBLE_EQ(*st.mean_pairs_per_sentence, 2.0);
  EXPECT_DOUBLE_EQ(*st.mean_sentence_tokens, 5.0);
  EXPECT_EQ(st.total, (PolarityCounts{1, 1}));
}

TEST(Stats, EmptyDatasetIsUndefined) {
  const auto st = dataset_stats({});
  EXPECT_EQ(st.group_count, 0u);
  EXPECT_FALSE(st.conflicting_label_fraction.has_value());
}

TEST(Stats, FractionsMatchDirectCount) {
  std::mt19937_64 gen(17);
  const auto d = testing::random_cre(gen, default_schema(), 80);
  std::map<std::string, std::vector<const CandidateInstance*>> by_sentence;
  for (const auto& inst : d.instances) by_sentence[inst.sentence_id].push_back(&inst);
  std::size_t conflicting = 0, sharing = 0;
  for (const auto& [sid, list] : by_sentence) {
    bool c = false, sh = false;
    for (const auto* x : list) {
      for (const auto* y : list) {
        if (x == y) continue;
        c = c || (x->relation == y->relation && x->gold != y->gold);
        sh = sh || testing::spans_touch(*x, *y);
      }
    }
    conflicting += c;
    sharing += sh;
  }
  const auto st = dataset_stats(d);
  const double n = static_cast<double>(by_sentence.size());
  EXPECT_DOUBLE_EQ(*st.conflicting_label_fraction, conflicting / n);
  EXPECT_DOUBLE_EQ(*st.shared_argument_fraction, sharing / n);
  EXPECT_DOUBLE_EQ(*st.mean_pairs_per_sentence, d.instances.size() / n);
}

TEST(Coverage, SingleAnnotatedPairOutOfSeveral) {
  std::stringstream buf(
      R"([{"id": "r1", "relation": "per:spouse", "token": ["Ann", "wed", "Bob", "and", "Cy"],
           "subj_start": 0, "subj_end": 0, "obj_start": 2, "obj_end": 2,
           "subj_type": "PERSON", "obj_type": "PERSON",
           "stanford_ner": ["PERSON", "O", "PERSON", "O", "PERSON"]}])");
  const auto cov = annotation_coverage(read_tacred(buf), default_schema());
  EXPECT_EQ(cov.sentence_count, 1u);
  EXPECT_EQ(cov.compatible_pairs, 6u);
  EXPECT_EQ(cov.annotated_compatible_pairs, 1u);
  EXPECT_EQ(cov.sentences_with_multiple_pairs, 0u);
}

}  // namespace
}  // namespace cre
