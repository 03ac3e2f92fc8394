#include "cre/schema.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "cre/error.h"

namespace cre {
namespace {

// Placeholders are "{...}"; only {e1} and {e2} are defined.
void check_template(const std::string& relation, const char* field,
                    const std::string& text, std::string_view required) {
  static const std::regex kPlaceholder(R"(\{[^{}]*\})");
  if (text.find(kSubjectPlaceholder) == std::string::npos &&
      text.find(kObjectPlaceholder) == std::string::npos) {
    throw ValidationError("relation '" + relation + "': " + field +
                          " has no {e1}/{e2} placeholder");
  }
  if (text.find(required) == std::string::npos) {
    throw ValidationError("relation '" + relation + "': " + field +
                          " must mention " + std::string(required));
  }
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kPlaceholder);
       it != std::sregex_iterator(); ++it) {
    const std::string token = it->str();
    if (token != kSubjectPlaceholder && token != kObjectPlaceholder) {
      throw ValidationError("relation '" + relation + "': " + field +
                            " has unknown placeholder " + token);
    }
  }
}

std::set<EntityType> read_type_set(const YAML::Node& node,
                                   const std::string& relation,
                                   const char* field) {
  std::set<EntityType> out;
  if (!node) return out;
  if (!node.IsSequence()) {
    throw ParseError("relation '" + relation + "': " + field +
                     " must be a list");
  }
  for (const auto& item : node) {
    const auto name = item.as<std::string>();
    if (name.empty()) {
      throw ValidationError("relation '" + relation + "': empty type name in " +
                            field);
    }
    out.insert(name);
  }
  return out;
}

std::string read_scalar(const YAML::Node& node, const char* field,
                        const std::string& where) {
  const YAML::Node v = node[field];
  if (!v) return {};
  if (!v.IsScalar()) throw ParseError(where + ": " + field + " must be text");
  return v.as<std::string>();
}

}  // namespace

SchemaConfig::SchemaConfig(std::vector<RelationSchema> relations,
                           std::string no_relation_label,
                           std::set<EntityType> entity_types)
    : relations_(std::move(relations)),
      no_relation_label_(std::move(no_relation_label)),
      entity_types_(std::move(entity_types)) {
  if (relations_.empty()) {
    throw ValidationError("schema declares no relations");
  }
  if (no_relation_label_.empty()) {
    throw ValidationError("no_relation_label is empty");
  }
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    const RelationSchema& r = relations_[i];
    if (r.relation.empty()) {
      throw ValidationError("relation #" + std::to_string(i) +
                            " has an empty name");
    }
    if (r.relation == no_relation_label_) {
      throw ValidationError("relation '" + r.relation +
                            "' collides with the no-relation label");
    }
    if (!by_name_.emplace(r.relation, i).second) {
      throw ValidationError("duplicate relation '" + r.relation + "'");
    }
    if (r.subject_types.empty()) {
      throw ValidationError("relation '" + r.relation +
                            "': subject_types is empty");
    }
    if (r.object_types.empty()) {
      throw ValidationError("relation '" + r.relation +
                            "': object_types is empty");
    }
    if (!entity_types_.empty()) {
      for (const auto* types : {&r.subject_types, &r.object_types}) {
        for (const auto& t : *types) {
          if (!entity_types_.contains(t)) {
            throw ValidationError("relation '" + r.relation +
                                  "': undeclared entity type '" + t + "'");
          }
        }
      }
    }
    check_template(r.relation, "question_subject", r.question_subject,
                   kSubjectPlaceholder);
    check_template(r.relation, "question_object", r.question_object,
                   kObjectPlaceholder);
    for (const auto& s : r.subject_types) {
      for (const auto& o : r.object_types) {
        compatibility_[{s, o}].push_back(r.relation);
      }
    }
  }
  for (auto& [types, names] : compatibility_) {
    std::sort(names.begin(), names.end());
  }
}

const RelationSchema* SchemaConfig::find(std::string_view relation) const {
  auto it = by_name_.find(relation);
  return it == by_name_.end() ? nullptr : &relations_[it->second];
}

const std::vector<std::string>& SchemaConfig::compatible(
    const EntityType& subject_type, const EntityType& object_type) const {
  static const std::vector<std::string> kNone;
  auto it = compatibility_.find({subject_type, object_type});
  return it == compatibility_.end() ? kNone : it->second;
}

SchemaConfig parse_schema(std::string_view text, std::string_view profile) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
  if (!root.IsMap()) throw ParseError("schema: top level must be a mapping");

  try {
    const std::string no_relation = read_scalar(root, "no_relation_label",
                                                "schema");
    std::set<EntityType> declared;
    if (const YAML::Node types = root["entity_types"]) {
      if (!types.IsSequence()) {
        throw ParseError("schema: entity_types must be a list");
      }
      for (const auto& t : types) {
        const auto name = t.as<std::string>();
        if (name.empty()) throw ValidationError("schema: empty entity type");
        if (!declared.insert(name).second) {
          throw ValidationError("schema: duplicate entity type '" + name + "'");
        }
      }
    }

    const YAML::Node list = root["relations"];
    if (list && !list.IsSequence()) {
      throw ParseError("schema: relations must be a list");
    }
    std::vector<RelationSchema> relations;
    if (list) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        const YAML::Node node = list[i];
        if (!node.IsMap()) {
          throw ParseError("schema: relation #" + std::to_string(i) +
                           " must be a mapping");
        }
        RelationSchema r;
        r.relation = read_scalar(node, "relation",
                                 "relation #" + std::to_string(i));
        const std::string where = "relation '" + r.relation + "'";
        r.subject_types = read_type_set(node["subject_types"], r.relation,
                                        "subject_types");
        r.object_types = read_type_set(node["object_types"], r.relation,
                                       "object_types");
        r.question_subject = read_scalar(node, "question_subject", where);
        r.question_object = read_scalar(node, "question_object", where);
        r.gloss = read_scalar(node, "gloss", where);
        relations.push_back(std::move(r));
      }
    }

    if (!profile.empty()) {
      const YAML::Node selected = root["profiles"][std::string(profile)];
      if (!selected || !selected.IsSequence()) {
        throw ValidationError("schema: unknown profile '" +
                              std::string(profile) + "'");
      }
      std::vector<RelationSchema> subset;
      for (const auto& item : selected) {
        const auto name = item.as<std::string>();
        auto it = std::find_if(relations.begin(), relations.end(),
                               [&](const RelationSchema& r) {
                                 return r.relation == name;
                               });
        if (it == relations.end()) {
          throw ValidationError("profile '" + std::string(profile) +
                                "' names unknown relation '" + name + "'");
        }
        subset.push_back(*it);
      }
      relations = std::move(subset);
    }
    return SchemaConfig(std::move(relations), no_relation, std::move(declared));
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
}

SchemaConfig load_schema(const std::filesystem::path& path,
                         std::string_view profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open schema " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str(), profile);
}

std::filesystem::path default_schema_path() { return CRE_DEFAULT_SCHEMA_PATH; }

std::set<std::string> compatible_relations(const EntityType& subject_type,
                                           const EntityType& object_type,
                                           const SchemaConfig& schema) {
  const auto& names = schema.compatible(subject_type, object_type);
  return {names.begin(), names.end()};
}

}  // namespace cre
