#include "cre/predict.h"

#include <algorithm>
#include <istream>
#include <ostream>

#include "cre/error.h"
#include "json_util.h"

namespace cre {

using internal::Json;
using internal::OrderedJson;

namespace {

constexpr char kSep = '\x1f';

std::string kind_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kFile: return "file";
    case PredictorKind::kRemote: return "remote";
    case PredictorKind::kOracleEvent: return "oracle-event";
    case PredictorKind::kOracleType: return "oracle-type";
    case PredictorKind::kOracleEventType: return "oracle-event-type";
  }
  return "unknown";
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ", ";
    out += ids[i];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Prediction files

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  internal::for_each_json_line(in, [&](const Json& rec,
                                       const std::string& where) {
    Prediction p;
    p.instance_id = internal::require_string(rec, "instance_id", where);
    p.predicted_relation =
        internal::require_string(rec, "predicted_relation", where);
    p.predictor_id = internal::optional_string(rec, "predictor_id");
    if (auto it = rec.find("score"); it != rec.end() && !it->is_null()) {
      if (!it->is_number()) {
        throw ParseError(where + ": score must be a number");
      }
      const double score = it->get<double>();
      if (score < 0.0 || score > 1.0) {
        throw ValidationError(where + ": score outside [0, 1]");
      }
      p.score = score;
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_predictions(in);
}

void write_predictions(std::span<const Prediction> predictions,
                       std::ostream& out) {
  for (const auto& p : predictions) {
    OrderedJson j;
    j["instance_id"] = p.instance_id;
    j["predicted_relation"] = p.predicted_relation;
    if (p.score) j["score"] = *p.score;
    j["predictor_id"] = p.predictor_id;
    out << internal::dump_line(j) << '\n';
  }
}

PredictionIndex index_predictions(std::vector<Prediction> predictions) {
  PredictionIndex index;
  index.reserve(predictions.size());
  for (auto& p : predictions) {
    std::string id = p.instance_id;
    if (!index.emplace(std::move(id), std::move(p)).second) {
      throw CollisionError("duplicate prediction for instance " +
                           p.instance_id);
    }
  }
  return index;
}

// ---------------------------------------------------------------------------
// Specs

PredictorSpec PredictorSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string parameter =
      colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  PredictorSpec spec;
  spec.parameter = parameter;
  if (kind == "file") {
    spec.kind = PredictorKind::kFile;
  } else if (kind == "remote") {
    spec.kind = PredictorKind::kRemote;
  } else if (kind == "oracle-event") {
    spec.kind = PredictorKind::kOracleEvent;
  } else if (kind == "oracle-type") {
    spec.kind = PredictorKind::kOracleType;
  } else if (kind == "oracle-event-type") {
    spec.kind = PredictorKind::kOracleEventType;
  } else {
    throw ValidationError("unknown predictor kind '" + std::string(kind) + "'");
  }
  const bool needs_parameter = spec.kind != PredictorKind::kOracleType;
  if (needs_parameter && spec.parameter.empty()) {
    throw ValidationError("predictor '" + std::string(kind) +
                          "' needs a parameter (KIND:PARAM)");
  }
  return spec;
}

std::string PredictorSpec::to_string() const {
  return parameter.empty() ? kind_name(kind) : kind_name(kind) + ":" + parameter;
}

// ---------------------------------------------------------------------------
// Sentence lookup

SentenceIndex::SentenceIndex(const std::vector<Sentence>& sentences) {
  for (const auto& s : sentences) add(s);
}

SentenceIndex::SentenceIndex(const CreDataset& dataset) {
  for (const auto& [group, sentences] : dataset.groups) {
    for (const auto& s : sentences) add(s);
  }
}

void SentenceIndex::add(const Sentence& sentence) {
  by_id_.emplace(sentence.sentence_id, &sentence);
}

const Sentence* SentenceIndex::find(std::string_view sentence_id) const {
  auto it = by_id_.find(std::string(sentence_id));
  return it == by_id_.end() ? nullptr : it->second;
}

// ---------------------------------------------------------------------------
// Oracles

GoldIndex::GoldIndex(std::span<const CandidateInstance> labeled) {
  for (const auto& inst : labeled) {
    sentences_.insert(inst.sentence_id);
    if (inst.gold.value_or(false)) {
      positive_.insert(inst.sentence_id + kSep + inst.relation);
    }
  }
}

bool GoldIndex::has_sentence(std::string_view sentence_id) const {
  return sentences_.contains(std::string(sentence_id));
}

bool GoldIndex::attests(std::string_view sentence_id,
                        std::string_view relation) const {
  std::string key(sentence_id);
  key += kSep;
  key.append(relation);
  return positive_.contains(key);
}

bool oracle_event(const CandidateInstance& instance, const GoldIndex& gold) {
  if (!gold.has_sentence(instance.sentence_id)) {
    throw NotFoundError("sentence '" + instance.sentence_id +
                        "' is absent from the gold source");
  }
  return gold.attests(instance.sentence_id, instance.relation);
}

bool oracle_type(const CandidateInstance& instance, const SchemaConfig& schema) {
  const auto& names =
      schema.compatible(instance.subject.etype, instance.object.etype);
  return std::binary_search(names.begin(), names.end(), instance.relation);
}

bool oracle_event_type(const CandidateInstance& instance, const GoldIndex& gold,
                       const SchemaConfig& schema) {
  const bool event = oracle_event(instance, gold);
  const bool type = oracle_type(instance, schema);
  return event && type;
}

OraclePredictor::OraclePredictor(PredictorKind kind, const SchemaConfig& schema,
                                 std::vector<CandidateInstance> gold)
    : kind_(kind),
      schema_(schema),
      gold_instances_(std::move(gold)),
      gold_(gold_instances_),
      id_(kind_name(kind)) {
  if (kind != PredictorKind::kOracleEvent && kind != PredictorKind::kOracleType &&
      kind != PredictorKind::kOracleEventType) {
    throw ValidationError("'" + kind_name(kind) + "' is not an oracle kind");
  }
  for (const auto& g : gold_instances_) {
    if (!g.gold) {
      throw ValidationError("gold source instance " + g.instance_id +
                            " has no label");
    }
  }
}

std::vector<Prediction> OraclePredictor::predict(
    std::span<const CandidateInstance> instances, const SentenceIndex&) const {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    bool decision = false;
    switch (kind_) {
      case PredictorKind::kOracleEvent:
        decision = oracle_event(inst, gold_);
        break;
      case PredictorKind::kOracleType:
        decision = oracle_type(inst, schema_);
        break;
      default:
        decision = oracle_event_type(inst, gold_, schema_);
        break;
    }
    Prediction p;
    p.instance_id = inst.instance_id;
    p.queried_relation = inst.relation;
    p.predicted_relation =
        decision ? inst.relation : schema_.no_relation_label();
    p.predictor_id = id_;
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// File predictor

FilePredictor::FilePredictor(std::string id, PredictionIndex predictions)
    : id_(std::move(id)), predictions_(std::move(predictions)) {}

std::unique_ptr<FilePredictor> FilePredictor::load(
    const std::filesystem::path& path) {
  return std::make_unique<FilePredictor>("file:" + path.string(),
                                         index_predictions(load_predictions(path)));
}

std::vector<Prediction> FilePredictor::predict(
    std::span<const CandidateInstance> instances, const SentenceIndex&) const {
  std::vector<Prediction> out;
  std::vector<std::string> missing;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    auto it = predictions_.find(inst.instance_id);
    if (it == predictions_.end()) {
      missing.push_back(inst.instance_id);
      continue;
    }
    Prediction p = it->second;
    p.queried_relation = inst.relation;
    if (p.predictor_id.empty()) p.predictor_id = id_;
    out.push_back(std::move(p));
  }
  if (!missing.empty()) {
    throw NotFoundError(std::to_string(missing.size()) +
                        " instance(s) missing from prediction file: " +
                        join_ids(missing));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec,
                                          const SchemaConfig& schema,
                                          const RemoteOptions& options) {
  switch (spec.kind) {
    case PredictorKind::kFile:
      return FilePredictor::load(spec.parameter);
    case PredictorKind::kRemote:
      return std::make_unique<RemotePredictor>(spec.parameter, options);
    case PredictorKind::kOracleType:
      return std::make_unique<OraclePredictor>(spec.kind, schema);
    case PredictorKind::kOracleEvent:
    case PredictorKind::kOracleEventType:
      return std::make_unique<OraclePredictor>(
          spec.kind, schema, load_cre(spec.parameter).instances);
  }
  throw ValidationError("unsupported predictor " + spec.to_string());
}

std::vector<Prediction> predict_batch(const Predictor& predictor,
                                      std::span<const CandidateInstance> instances,
                                      const SentenceIndex& sentences,
                                      const SchemaConfig& schema) {
  std::vector<Prediction> out = predictor.predict(instances, sentences);
  if (out.size() != instances.size()) {
    throw ValidationError("predictor " + predictor.id() + " returned " +
                          std::to_string(out.size()) + " predictions for " +
                          std::to_string(instances.size()) + " instances");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].instance_id != instances[i].instance_id) {
      throw ValidationError("predictor " + predictor.id() +
                            " misaligned prediction at position " +
                            std::to_string(i));
    }
    out[i].queried_relation = instances[i].relation;
    const auto& label = out[i].predicted_relation;
    if (!schema.is_no_relation(label) && !schema.has_relation(label)) {
      throw ValidationError("predictor " + predictor.id() +
                            " returned unknown relation '" + label +
                            "' for instance " + out[i].instance_id);
    }
  }
  return out;
}

}  // namespace cre
