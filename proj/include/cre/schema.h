#ifndef CRE_SCHEMA_H_
#define CRE_SCHEMA_H_

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cre {

// Named-entity tag (TACRED inventory, e.g. PERSON, RELIGION). Compared by
// exact case-sensitive match.
using EntityType = std::string;

inline constexpr std::string_view kSubjectPlaceholder = "{e1}";
inline constexpr std::string_view kObjectPlaceholder = "{e2}";

struct RelationSchema {
  std::string relation;
  std::set<EntityType> subject_types;
  std::set<EntityType> object_types;
  // Asks about the subject ({e1}); answered by the object surface.
  std::string question_subject;
  // Asks about the object ({e2}); answered by the subject surface.
  std::string question_object;
  // Plain-language prompt shown to annotators. Optional.
  std::string gloss;

  bool operator==(const RelationSchema&) const = default;
};

// Validated, immutable relation inventory. Safe to share across threads.
class SchemaConfig {
 public:
  // Throws ValidationError naming the offending relation when an invariant
  // fails. An empty `entity_types` set disables the declared-type check.
  SchemaConfig(std::vector<RelationSchema> relations,
               std::string no_relation_label,
               std::set<EntityType> entity_types = {});

  const std::vector<RelationSchema>& relations() const { return relations_; }
  const std::string& no_relation_label() const { return no_relation_label_; }
  const std::set<EntityType>& entity_types() const { return entity_types_; }

  // nullptr when the relation is unknown.
  const RelationSchema* find(std::string_view relation) const;
  bool has_relation(std::string_view relation) const {
    return find(relation) != nullptr;
  }
  bool is_no_relation(std::string_view label) const {
    return label == no_relation_label_;
  }

  // Relations admitting (subject_type, object_type), sorted by name.
  const std::vector<std::string>& compatible(const EntityType& subject_type,
                                             const EntityType& object_type) const;

  bool operator==(const SchemaConfig& other) const {
    return relations_ == other.relations_ &&
           no_relation_label_ == other.no_relation_label_ &&
           entity_types_ == other.entity_types_;
  }

 private:
  std::vector<RelationSchema> relations_;
  std::string no_relation_label_;
  std::set<EntityType> entity_types_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::map<std::pair<EntityType, EntityType>, std::vector<std::string>>
      compatibility_;
};

// Parses the YAML schema format documented in docs/formats.md. A non-empty
// `profile` restricts the relation list to the named profile.
SchemaConfig parse_schema(std::string_view text, std::string_view profile = {});
SchemaConfig load_schema(const std::filesystem::path& path,
                         std::string_view profile = {});

// Path of the schema shipped with the toolkit.
std::filesystem::path default_schema_path();

// Every relation whose subject_types contains subject_type and whose
// object_types contains object_type.
std::set<std::string> compatible_relations(const EntityType& subject_type,
                                           const EntityType& object_type,
                                           const SchemaConfig& schema);

}  // namespace cre

#endif  // CRE_SCHEMA_H_
