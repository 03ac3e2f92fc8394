#include "cre/qa.h"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "cre/error.h"
#include "cre/parallel.h"
#include "json_util.h"
#include "wire.h"

namespace cre {

using internal::Json;
using internal::OrderedJson;

namespace {

// Substitutes {e1}/{e2}; any other {...} is left unfilled and rejected.
std::string fill(std::string_view tmpl, const std::string& e1,
                 const std::string& e2, const std::string& relation) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out.push_back(tmpl[i++]);
      continue;
    }
    const std::size_t close = tmpl.find('}', i);
    const std::string_view token =
        close == std::string_view::npos ? tmpl.substr(i) : tmpl.substr(i, close - i + 1);
    if (token == kSubjectPlaceholder) {
      out += e1;
    } else if (token == kObjectPlaceholder) {
      out += e2;
    } else {
      throw ValidationError("template of " + relation + " leaves placeholder '" +
                            std::string(token) + "' unfilled");
    }
    i += token.size();
  }
  return out;
}

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 128 && std::ispunct(c) != 0; }

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (is_space(s[b]) || is_punct(s[b]))) ++b;
  while (e > b && (is_space(s[e - 1]) || is_punct(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Character span of tokens[start..=end] in the space-joined sentence text.
std::pair<std::size_t, std::size_t> char_span(const std::vector<std::string>& tokens,
                                              const EntityMention& m) {
  std::size_t pos = 0;
  for (int i = 0; i < m.start; ++i) pos += tokens[static_cast<std::size_t>(i)].size() + 1;
  return {pos, pos + m.surface.size()};
}

void check_answers(std::span<const QaQuery> queries,
                   const std::vector<QaAnswer>& answers, const std::string& who) {
  if (answers.size() != queries.size()) {
    throw ValidationError("QA predictor " + who + " returned " +
                          std::to_string(answers.size()) + " answers for " +
                          std::to_string(queries.size()) + " questions");
  }
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (answers[i].id != queries[i].id) {
      throw ValidationError("QA predictor " + who +
                            " misaligned answer at position " + std::to_string(i));
    }
  }
}

QaAnswer parse_answer(const Json& rec, const std::string& where) {
  QaAnswer a;
  a.id = internal::require_string(rec, "id", where);
  const Json& text = internal::require(rec, "answer_text", where);
  if (text.is_null()) {
    a.text.reset();
  } else if (!text.is_string()) {
    throw ParseError(where + ": field 'answer_text' must be a string");
  } else if (text.get<std::string>() != kNoAnswer) {
    a.text = text.get<std::string>();
  }
  if (auto it = rec.find("score"); it != rec.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError(where + ": score must be a number");
    a.score = it->get<double>();
  }
  const bool has_start = rec.contains("char_start") && !rec["char_start"].is_null();
  const bool has_end = rec.contains("char_end") && !rec["char_end"].is_null();
  if (has_start != has_end) {
    throw ParseError(where + ": char_start and char_end go together");
  }
  if (has_start) {
    const auto s = internal::require_int(rec, "char_start", where);
    const auto e = internal::require_int(rec, "char_end", where);
    if (s < 0 || e < s) throw ParseError(where + ": bad character offsets");
    a.char_start = static_cast<std::size_t>(s);
    a.char_end = static_cast<std::size_t>(e);
  }
  return a;
}

OrderedJson answer_json(const QaAnswer& a) {
  OrderedJson j;
  j["id"] = a.id;
  j["answer_text"] = a.text ? *a.text : std::string(kNoAnswer);
  if (a.score) j["score"] = *a.score;
  if (a.char_start) j["char_start"] = *a.char_start;
  if (a.char_end) j["char_end"] = *a.char_end;
  return j;
}

}  // namespace

QuestionPair instantiate(const CandidateInstance& instance,
                         const SchemaConfig& schema) {
  const RelationSchema* rel = schema.find(instance.relation);
  if (!rel) {
    throw NotFoundError("no question templates for relation '" +
                        instance.relation + "'");
  }
  if (rel->question_subject.empty() || rel->question_object.empty()) {
    throw NotFoundError("relation '" + instance.relation +
                        "' is missing a question template");
  }
  const std::string& e1 = instance.subject.surface;
  const std::string& e2 = instance.object.surface;
  if (e1.empty() || e2.empty()) {
    throw ValidationError("instance " + instance.instance_id +
                          " has an empty argument surface");
  }
  QuestionPair q;
  q.instance_id = instance.instance_id;
  q.question_for_object = fill(rel->question_subject, e1, e2, rel->relation);
  q.question_for_subject = fill(rel->question_object, e1, e2, rel->relation);
  q.expected_object = e2;
  q.expected_subject = e1;
  return q;
}

std::string normalize_answer(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
    return c < 128 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  });
  const std::string trimmed = trim(lower);
  std::string collapsed;
  bool gap = false;
  for (char c : trimmed) {
    if (is_space(c)) {
      gap = true;
      continue;
    }
    if (gap && !collapsed.empty()) collapsed.push_back(' ');
    gap = false;
    collapsed.push_back(c);
  }
  for (std::string_view article : {"a ", "an ", "the "}) {
    if (collapsed.starts_with(article)) {
      return trim(std::string_view(collapsed).substr(article.size()));
    }
  }
  return collapsed;
}

bool match_answer(const std::optional<std::string>& predicted,
                  std::string_view expected) {
  if (!predicted) return false;
  return normalize_answer(*predicted) == normalize_answer(expected);
}

// ---------------------------------------------------------------------------

RemoteQaPredictor::RemoteQaPredictor(std::string endpoint, RemoteOptions options)
    : endpoint_(std::move(endpoint)), options_(options), id_("remote:" + endpoint_) {
  if (options_.batch_size == 0) options_.batch_size = 1;
}

std::vector<QaAnswer> RemoteQaPredictor::answer(
    std::span<const QaQuery> queries) const {
  const std::size_t batch = options_.batch_size;
  const std::size_t chunks = (queries.size() + batch - 1) / batch;
  std::vector<QaAnswer> out(queries.size());
  parallel_for(chunks, options_.max_in_flight, [&](std::size_t k) {
    const std::size_t begin = k * batch;
    const std::size_t end = std::min(queries.size(), begin + batch);
    OrderedJson list = OrderedJson::array();
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = begin; i < end; ++i) {
      OrderedJson q;
      q["id"] = queries[i].id;
      q["question"] = queries[i].question;
      q["context"] = queries[i].context;
      list.push_back(std::move(q));
      position.emplace(queries[i].id, i);
    }
    OrderedJson body;
    body["version"] = 1;
    body["questions"] = std::move(list);
    std::vector<QaAnswer> parsed;
    auto validate = [&](const Json& response) {
      parsed.clear();
      const Json& answers = internal::require(response, "answers", "response");
      if (!answers.is_array() || answers.size() != end - begin) {
        throw ParseError("answer count does not match the batch");
      }
      std::unordered_set<std::string> seen;
      for (const Json& rec : answers) {
        QaAnswer a = parse_answer(rec, "answer");
        if (!position.contains(a.id) || !seen.insert(a.id).second) {
          throw ParseError("unexpected or repeated question id " + a.id);
        }
        parsed.push_back(std::move(a));
      }
    };
    internal::post_json(endpoint_, "/v1/qa", body, options_, validate);
    for (auto& a : parsed) {
      const std::size_t i = position.at(a.id);
      out[i] = std::move(a);
    }
  });
  return out;
}

std::vector<QaAnswer> read_answers(std::istream& in) {
  std::vector<QaAnswer> out;
  internal::for_each_json_line(in, [&](const Json& rec, const std::string& where) {
    out.push_back(parse_answer(rec, where));
  });
  return out;
}

void write_answers(std::span<const QaAnswer> answers, std::ostream& out) {
  for (const auto& a : answers) out << internal::dump_line(answer_json(a)) << '\n';
}

FileQaPredictor::FileQaPredictor(std::string id, std::vector<QaAnswer> answers)
    : id_(std::move(id)) {
  for (auto& a : answers) {
    std::string key = a.id;
    if (!answers_.emplace(std::move(key), std::move(a)).second) {
      throw CollisionError("duplicate answer for question " + a.id);
    }
  }
}

std::unique_ptr<FileQaPredictor> FileQaPredictor::load(
    const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return std::make_unique<FileQaPredictor>("file:" + path.string(),
                                           read_answers(in));
}

std::vector<QaAnswer> FileQaPredictor::answer(
    std::span<const QaQuery> queries) const {
  std::vector<QaAnswer> out;
  std::string missing;
  std::size_t missing_count = 0;
  for (const auto& q : queries) {
    auto it = answers_.find(q.id);
    if (it == answers_.end()) {
      if (missing_count++ > 0) missing += ", ";
      missing += q.id;
      continue;
    }
    out.push_back(it->second);
  }
  if (missing_count > 0) {
    throw NotFoundError(std::to_string(missing_count) +
                        " question(s) missing from answer file: " + missing);
  }
  return out;
}

std::unique_ptr<QaPredictor> make_qa_predictor(std::string_view spec,
                                               const RemoteOptions& options) {
  const auto colon = spec.find(':');
  const std::string_view kind = spec.substr(0, colon);
  const std::string param =
      colon == std::string_view::npos ? "" : std::string(spec.substr(colon + 1));
  if (param.empty()) {
    throw ValidationError("QA predictor spec needs KIND:PARAM, got '" +
                          std::string(spec) + "'");
  }
  if (kind == "file") return FileQaPredictor::load(param);
  if (kind == "remote") return std::make_unique<RemoteQaPredictor>(param, options);
  throw ValidationError("unknown QA predictor kind '" + std::string(kind) + "'");
}

// ---------------------------------------------------------------------------

std::string question_id_for_object(std::string_view instance_id) {
  return std::string(instance_id) + "#q1";
}

std::string question_id_for_subject(std::string_view instance_id) {
  return std::string(instance_id) + "#q2";
}

std::vector<QaQuery> make_queries(const CreRecord& record,
                                  const SchemaConfig& schema) {
  const QuestionPair q = instantiate(record.instance, schema);
  Sentence s;
  s.tokens = record.tokens;
  const std::string context = s.text();
  return {
      {question_id_for_object(q.instance_id), q.question_for_object, context},
      {question_id_for_subject(q.instance_id), q.question_for_subject, context},
  };
}

std::vector<QaVerdict> qa_classify(std::span<const CreRecord> records,
                                   const QaPredictor& predictor,
                                   const SchemaConfig& schema, MatchMode mode) {
  std::vector<QaQuery> queries;
  queries.reserve(records.size() * 2);
  for (const auto& r : records) {
    for (auto& q : make_queries(r, schema)) queries.push_back(std::move(q));
  }
  const std::vector<QaAnswer> answers = predictor.answer(queries);
  check_answers(queries, answers, predictor.id());

  auto matches = [&](const QaAnswer& a, const CreRecord& r,
                     const EntityMention& expected) {
    if (mode == MatchMode::kNormalized) return match_answer(a.text, expected.surface);
    if (!a.text) return false;
    if (!a.char_start || !a.char_end) {
      throw ValidationError("strict span matching needs offsets; answer " + a.id +
                            " has none");
    }
    const auto [start, end] = char_span(r.tokens, expected);
    return *a.char_start == start && *a.char_end == end;
  };

  std::vector<QaVerdict> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const CreRecord& r = records[i];
    QaVerdict v;
    v.instance_id = r.instance.instance_id;
    v.answer_q1 = answers[2 * i];
    v.answer_q2 = answers[2 * i + 1];
    v.match_q1 = matches(v.answer_q1, r, r.instance.object);
    v.match_q2 = matches(v.answer_q2, r, r.instance.subject);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Prediction> verdict_predictions(std::span<const QaVerdict> verdicts,
                                            std::span<const CreRecord> records,
                                            const SchemaConfig& schema,
                                            const std::string& predictor_id) {
  if (verdicts.size() != records.size()) {
    throw ValidationError("verdict count does not match the record count");
  }
  std::vector<Prediction> out;
  out.reserve(verdicts.size());
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const CandidateInstance& inst = records[i].instance;
    if (verdicts[i].instance_id != inst.instance_id) {
      throw ValidationError("verdict " + std::to_string(i) + " is misaligned");
    }
    Prediction p;
    p.instance_id = inst.instance_id;
    p.queried_relation = inst.relation;
    p.predicted_relation =
        verdicts[i].decision() ? inst.relation : schema.no_relation_label();
    p.predictor_id = predictor_id;
    out.push_back(std::move(p));
  }
  return out;
}

void write_verdicts(std::span<const QaVerdict> verdicts, std::ostream& out) {
  for (const auto& v : verdicts) {
    OrderedJson j;
    j["instance_id"] = v.instance_id;
    j["match_q1"] = v.match_q1;
    j["match_q2"] = v.match_q2;
    j["decision"] = v.decision() ? 1 : 0;
    j["answer_q1"] = answer_json(v.answer_q1);
    j["answer_q2"] = answer_json(v.answer_q2);
    out << internal::dump_line(j) << '\n';
  }
}

}  // namespace cre
