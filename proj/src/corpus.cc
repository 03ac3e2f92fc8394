#include "cre/corpus.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "cre/digest.h"
#include "cre/error.h"
#include "json_util.h"
#include "wire.h"

namespace cre {

using internal::Json;
using internal::OrderedJson;

std::string Sentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

namespace {

std::string join_tokens(const std::vector<std::string>& tokens, int start,
                        int end) {
  std::string out;
  for (int i = start; i <= end; ++i) {
    if (i > start) out.push_back(' ');
    out += tokens[static_cast<std::size_t>(i)];
  }
  return out;
}

OrderedJson mention_json(const EntityMention& m) {
  OrderedJson j;
  j["start"] = m.start;
  j["end"] = m.end;
  j["type"] = m.etype;
  return j;
}

EntityMention parse_mention(const Json& obj,
                            const std::vector<std::string>& tokens,
                            const std::string& where) {
  const auto start = internal::require_int(obj, "start", where);
  const auto end = internal::require_int(obj, "end", where);
  const auto type = internal::require_string(obj, "type", where);
  return make_mention(tokens, static_cast<int>(start), static_cast<int>(end),
                      type);
}

// Read either a JSON array of records or one record per line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return;
  if (text[first] == '[') {
    const Json all = internal::parse_json(text, "file");
    std::size_t index = 0;
    for (const Json& rec : all) {
      fn(rec, "record " + std::to_string(index++));
    }
    return;
  }
  std::istringstream lines(text);
  std::size_t index = 0;
  internal::for_each_json_line(lines, [&](const Json& rec, const std::string&) {
    fn(rec, "record " + std::to_string(index++));
  });
}

}  // namespace

EntityMention make_mention(const std::vector<std::string>& tokens, int start,
                           int end, EntityType etype) {
  if (start < 0 || end < start ||
      static_cast<std::size_t>(end) >= tokens.size()) {
    throw ValidationError("span [" + std::to_string(start) + ", " +
                          std::to_string(end) + "] out of bounds for " +
                          std::to_string(tokens.size()) + " tokens");
  }
  if (etype.empty()) throw ValidationError("mention has an empty type");
  EntityMention m;
  m.start = start;
  m.end = end;
  m.etype = std::move(etype);
  m.surface = join_tokens(tokens, start, end);
  return m;
}

void validate_sentence(const Sentence& sentence) {
  if (sentence.sentence_id.empty()) {
    throw ValidationError("sentence has an empty id");
  }
  if (sentence.tokens.empty()) {
    throw ValidationError("sentence '" + sentence.sentence_id +
                          "' has no tokens");
  }
  for (std::size_t i = 0; i < sentence.mentions.size(); ++i) {
    const EntityMention& m = sentence.mentions[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (sentence.mentions[j].same_span(m)) {
        throw ValidationError("sentence '" + sentence.sentence_id +
                              "' has two mentions on span [" +
                              std::to_string(m.start) + ", " +
                              std::to_string(m.end) + "]");
      }
    }
    const EntityMention rebuilt =
        make_mention(sentence.tokens, m.start, m.end, m.etype);
    if (rebuilt.surface != m.surface) {
      throw ValidationError("sentence '" + sentence.sentence_id +
                            "': mention surface does not match its tokens");
    }
  }
}

std::string make_instance_id(std::string_view sentence_id,
                             const EntityMention& subject,
                             const EntityMention& object,
                             std::string_view relation) {
  std::string material(sentence_id);
  material += '\x1f';
  material += std::to_string(subject.start) + ':' + std::to_string(subject.end);
  material += '\x1f';
  material += std::to_string(object.start) + ':' + std::to_string(object.end);
  material += '\x1f';
  material.append(relation);
  return sha256_hex(material).substr(0, 24);
}

CandidateInstance make_instance(std::string_view sentence_id,
                                const EntityMention& subject,
                                const EntityMention& object,
                                std::string relation,
                                std::optional<bool> gold) {
  if (subject.same_span(object)) {
    throw ValidationError("subject and object share the span [" +
                          std::to_string(subject.start) + ", " +
                          std::to_string(subject.end) + "]");
  }
  CandidateInstance inst;
  inst.instance_id = make_instance_id(sentence_id, subject, object, relation);
  inst.sentence_id = std::string(sentence_id);
  inst.subject = subject;
  inst.object = object;
  inst.relation = std::move(relation);
  inst.gold = gold;
  return inst;
}

// ---------------------------------------------------------------------------
// Sentence corpus

std::vector<Sentence> read_sentences(std::istream& in) {
  std::vector<Sentence> out;
  std::unordered_set<std::string> seen;
  internal::for_each_json_line(in, [&](const Json& rec,
                                       const std::string& where) {
    Sentence s;
    s.sentence_id = internal::require_string(rec, "sentence_id", where);
    s.tokens = internal::require_tokens(rec, "tokens", where);
    s.source = internal::optional_string(rec, "source");
    if (auto it = rec.find("mentions"); it != rec.end()) {
      if (!it->is_array()) {
        throw ParseError(where + ": field 'mentions' must be an array");
      }
      for (const Json& m : *it) {
        try {
          s.mentions.push_back(parse_mention(m, s.tokens, where));
        } catch (const ValidationError& e) {
          throw ValidationError(where + " (sentence '" + s.sentence_id +
                                "'): " + e.what());
        }
      }
    }
    try {
      validate_sentence(s);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!seen.insert(s.sentence_id).second) {
      throw ValidationError(where + ": duplicate sentence_id '" +
                            s.sentence_id + "'");
    }
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<Sentence> load_sentences(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_sentences(in);
}

void write_sentences(const std::vector<Sentence>& sentences,
                     std::ostream& out) {
  for (const auto& s : sentences) {
    OrderedJson j;
    j["sentence_id"] = s.sentence_id;
    j["tokens"] = s.tokens;
    OrderedJson mentions = OrderedJson::array();
    for (const auto& m : s.mentions) mentions.push_back(mention_json(m));
    j["mentions"] = std::move(mentions);
    j["source"] = s.source;
    out << internal::dump_line(j) << '\n';
  }
}

// ---------------------------------------------------------------------------
// TACRED

CandidateInstance TacredRecord::instance_for(const std::string& relation) const {
  return make_instance(sentence.sentence_id, subject, object, relation,
                       label == relation);
}

std::vector<TacredRecord> read_tacred(std::istream& in) {
  std::vector<TacredRecord> out;
  for_each_record(in, [&](const Json& rec, const std::string& index) {
    TacredRecord r;
    r.id = internal::require_string(rec, "id", index);
    const std::string where = index + " (id=" + r.id + ")";
    r.sentence.sentence_id = r.id;
    r.sentence.tokens = internal::require_tokens(rec, "token", where);
    r.sentence.source = internal::optional_string(rec, "docid");
    r.label = internal::require_string(rec, "relation", where);
    const auto ss = internal::require_int(rec, "subj_start", where);
    const auto se = internal::require_int(rec, "subj_end", where);
    const auto os = internal::require_int(rec, "obj_start", where);
    const auto oe = internal::require_int(rec, "obj_end", where);
    const auto st = internal::require_string(rec, "subj_type", where);
    const auto ot = internal::require_string(rec, "obj_type", where);
    try {
      r.subject = make_mention(r.sentence.tokens, static_cast<int>(ss),
                               static_cast<int>(se), st);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": subject " + e.what());
    }
    try {
      r.object = make_mention(r.sentence.tokens, static_cast<int>(os),
                              static_cast<int>(oe), ot);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": object " + e.what());
    }
    if (r.subject.same_span(r.object)) {
      throw ValidationError(where + ": subject and object share a span");
    }
    if (auto it = rec.find("stanford_ner"); it != rec.end() && it->is_array()) {
      r.ner = internal::require_tokens(rec, "stanford_ner", where);
      if (r.ner.size() != r.sentence.tokens.size()) {
        throw ValidationError(where + ": stanford_ner length differs from token");
      }
    }
    r.sentence.mentions = {r.subject, r.object};
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<TacredRecord> load_tacred(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_tacred(in);
}

void write_tacred(const std::vector<TacredRecord>& records, std::ostream& out) {
  out << "[";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const TacredRecord& r = records[i];
    OrderedJson j;
    j["id"] = r.id;
    j["docid"] = r.sentence.source;
    j["relation"] = r.label;
    j["token"] = r.sentence.tokens;
    j["subj_start"] = r.subject.start;
    j["subj_end"] = r.subject.end;
    j["obj_start"] = r.object.start;
    j["obj_end"] = r.object.end;
    j["subj_type"] = r.subject.etype;
    j["obj_type"] = r.object.etype;
    if (!r.ner.empty()) j["stanford_ner"] = r.ner;
    out << (i == 0 ? "\n" : ",\n") << internal::dump_line(j);
  }
  out << "\n]\n";
}

// ---------------------------------------------------------------------------
// CRE records

namespace internal {

OrderedJson cre_record_json(const CreRecord& record) {
  const CandidateInstance& inst = record.instance;
  OrderedJson j;
  j["instance_id"] = inst.instance_id;
  j["sentence_id"] = inst.sentence_id;
  j["tokens"] = record.tokens;
  j["subj"] = mention_json(inst.subject);
  j["obj"] = mention_json(inst.object);
  j["relation"] = inst.relation;
  if (inst.gold) j["label"] = *inst.gold ? 1 : 0;
  j["group"] = record.group;
  j["source"] = record.source;
  if (record.task_index) j["task_index"] = *record.task_index;
  return j;
}

}  // namespace internal

std::string serialize_cre_record(const CreRecord& record) {
  return internal::dump_line(internal::cre_record_json(record));
}

CreRecord parse_cre_record(std::string_view line, const std::string& where) {
  const Json rec = internal::parse_json(line, where);
  CreRecord out;
  CandidateInstance& inst = out.instance;
  inst.instance_id = internal::require_string(rec, "instance_id", where);
  const std::string at = where + " (instance " + inst.instance_id + ")";
  inst.sentence_id = internal::require_string(rec, "sentence_id", at);
  out.tokens = internal::require_tokens(rec, "tokens", at);
  inst.relation = internal::require_string(rec, "relation", at);
  out.group = internal::optional_string(rec, "group");
  out.source = internal::optional_string(rec, "source");
  try {
    inst.subject = parse_mention(internal::require(rec, "subj", at), out.tokens,
                                 at + " subj");
    inst.object = parse_mention(internal::require(rec, "obj", at), out.tokens,
                                at + " obj");
  } catch (const ValidationError& e) {
    throw ValidationError(at + ": " + e.what());
  }
  if (inst.subject.same_span(inst.object)) {
    throw ValidationError(at + ": subject and object share a span");
  }
  if (auto it = rec.find("label"); it != rec.end() && !it->is_null()) {
    if (!it->is_number_integer() ||
        (it->get<long long>() != 0 && it->get<long long>() != 1)) {
      throw ValidationError(at + ": label must be 0 or 1");
    }
    inst.gold = it->get<long long>() == 1;
  }
  if (auto it = rec.find("task_index"); it != rec.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) {
      throw ParseError(at + ": task_index must be a non-negative integer");
    }
    out.task_index = it->get<std::size_t>();
  }
  const std::string expected = make_instance_id(
      inst.sentence_id, inst.subject, inst.object, inst.relation);
  if (expected != inst.instance_id) {
    throw ValidationError(at + ": instance_id does not match its content (expected " +
                          expected + ")");
  }
  return out;
}

std::vector<CreRecord> read_cre_records(std::istream& in) {
  std::vector<CreRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_cre_record(line, "line " + std::to_string(line_no)));
  }
  return out;
}

std::vector<CreRecord> load_cre_records(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_cre_records(in);
}

void write_cre_records(const std::vector<CreRecord>& records,
                       std::ostream& out) {
  for (const auto& r : records) out << serialize_cre_record(r) << '\n';
}

const Sentence* CreDataset::find_sentence(std::string_view sentence_id) const {
  for (const auto& [group, sentences] : groups) {
    for (const auto& s : sentences) {
      if (s.sentence_id == sentence_id) return &s;
    }
  }
  return nullptr;
}

std::vector<CreRecord> CreDataset::records() const {
  std::unordered_map<std::string, const Sentence*> index;
  for (const auto& [group, sentences] : groups) {
    for (const auto& s : sentences) index.emplace(s.sentence_id, &s);
  }
  std::vector<CreRecord> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    auto it = index.find(inst.sentence_id);
    if (it == index.end()) {
      throw NotFoundError("sentence '" + inst.sentence_id + "' of instance " +
                          inst.instance_id + " is not in any group");
    }
    CreRecord r;
    r.instance = inst;
    r.tokens = it->second->tokens;
    r.group = inst.relation;
    r.source = it->second->source;
    out.push_back(std::move(r));
  }
  return out;
}

CreDataset make_cre_dataset(const std::vector<CreRecord>& records) {
  CreDataset d;
  std::unordered_set<std::string> ids;
  // sentence_id -> (tokens, source) of the first record that named it.
  std::unordered_map<std::string, const CreRecord*> first_record;
  // (group, sentence_id) -> index into d.groups[group]
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  std::map<std::pair<std::string, std::string>,
           std::set<std::tuple<int, int, std::string>>>
      spans;

  for (const auto& r : records) {
    const CandidateInstance& inst = r.instance;
    const std::string at = "instance " + inst.instance_id;
    if (!inst.gold) throw ValidationError(at + ": missing label");
    const std::string group = r.group.empty() ? inst.relation : r.group;
    if (group != inst.relation) {
      throw ValidationError(at + ": relation '" + inst.relation +
                            "' does not match group '" + group + "'");
    }
    if (!ids.insert(inst.instance_id).second) {
      throw CollisionError("duplicate instance_id " + inst.instance_id);
    }
    auto [it, inserted] = first_record.emplace(inst.sentence_id, &r);
    if (!inserted && it->second->tokens != r.tokens) {
      throw ValidationError(at + ": sentence '" + inst.sentence_id +
                            "' has inconsistent tokens across records");
    }
    const auto key = std::make_pair(group, inst.sentence_id);
    if (!slot.contains(key)) {
      Sentence s;
      s.sentence_id = inst.sentence_id;
      s.tokens = r.tokens;
      s.source = r.source;
      auto& list = d.groups[group];
      slot.emplace(key, list.size());
      list.push_back(std::move(s));
    }
    auto& span_set = spans[key];
    span_set.emplace(inst.subject.start, inst.subject.end, inst.subject.etype);
    span_set.emplace(inst.object.start, inst.object.end, inst.object.etype);
    d.instances.push_back(inst);
  }
  for (const auto& [key, span_set] : spans) {
    Sentence& s = d.groups[key.first][slot.at(key)];
    for (const auto& [start, end, type] : span_set) {
      s.mentions.push_back(make_mention(s.tokens, start, end, type));
    }
  }
  return d;
}

CreDataset read_cre(std::istream& in) {
  return make_cre_dataset(read_cre_records(in));
}

CreDataset load_cre(const std::filesystem::path& path) {
  auto in = internal::open_input(path);
  return read_cre(in);
}

void write_cre(const CreDataset& dataset, std::ostream& out) {
  write_cre_records(dataset.records(), out);
}

// ---------------------------------------------------------------------------
// Enumeration

std::vector<CandidateInstance> enumerate_pairs(const Sentence& sentence,
                                               const SchemaConfig& schema) {
  std::vector<CandidateInstance> out;
  const auto& mentions = sentence.mentions;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    for (std::size_t j = 0; j < mentions.size(); ++j) {
      if (i == j || mentions[i].overlaps(mentions[j])) continue;
      for (const auto& relation :
           schema.compatible(mentions[i].etype, mentions[j].etype)) {
        out.push_back(make_instance(sentence.sentence_id, mentions[i],
                                    mentions[j], relation));
      }
    }
  }
  auto key = [](const CandidateInstance& x) {
    return std::tie(x.subject.start, x.object.start, x.relation, x.subject.end,
                    x.object.end, x.subject.etype, x.object.etype);
  };
  std::sort(out.begin(), out.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });
  // Two mentions with one span and different types may yield the same id.
  std::unordered_set<std::string> seen;
  std::erase_if(out, [&](const CandidateInstance& x) {
    return !seen.insert(x.instance_id).second;
  });
  return out;
}

std::vector<CandidateInstance> expand_confusion_set(
    const Sentence& sentence, const CandidateInstance& annotated,
    const SchemaConfig& schema) {
  std::vector<CandidateInstance> candidates = enumerate_pairs(sentence, schema);
  const bool found = std::any_of(
      candidates.begin(), candidates.end(), [&](const CandidateInstance& c) {
        return c.instance_id == annotated.instance_id;
      });
  if (!found) {
    throw NotFoundError("instance " + annotated.instance_id +
                        " is not a candidate of sentence '" +
                        sentence.sentence_id + "'");
  }
  std::vector<CandidateInstance> out;
  for (auto& c : candidates) {
    if (c.instance_id == annotated.instance_id) continue;
    if (c.relation == annotated.relation &&
        c.subject.etype == annotated.subject.etype &&
        c.object.etype == annotated.object.etype) {
      out.push_back(std::move(c));
    }
  }
  return out;
}

bool shares_argument(const CandidateInstance& a, const CandidateInstance& b) {
  for (const auto* x : {&a.subject, &a.object}) {
    for (const auto* y : {&b.subject, &b.object}) {
      if (x->same_span(*y)) return true;
    }
  }
  return false;
}

}  // namespace cre
