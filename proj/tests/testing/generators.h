// Random inputs and shared fixtures for the tests.
#ifndef CRE_TESTS_TESTING_GENERATORS_H_
#define CRE_TESTS_TESTING_GENERATORS_H_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cre/corpus.h"
#include "cre/schema.h"

namespace cre::testing {

inline const SchemaConfig& default_schema() {
  static const SchemaConfig schema = load_schema(default_schema_path());
  return schema;
}

inline const SchemaConfig& cre_schema() {
  static const SchemaConfig schema = load_schema(default_schema_path(), "cre");
  return schema;
}

inline std::size_t draw(std::mt19937_64& gen, std::size_t n) {
  return static_cast<std::size_t>(gen() % n);
}

// Whitespace-separated tokens; mentions given as {start, end, type}.
inline Sentence make_sentence(
    const std::string& id, const std::string& text,
    const std::vector<std::tuple<int, int, std::string>>& mentions,
    const std::string& source = "test") {
  Sentence s;
  s.sentence_id = id;
  std::istringstream in(text);
  for (std::string t; in >> t;) s.tokens.push_back(t);
  for (const auto& [a, b, type] : mentions) {
    s.mentions.push_back(make_mention(s.tokens, a, b, type));
  }
  s.source = source;
  return s;
}

// Up to `max_mentions` random mentions over a random-length sentence.
// Spans may overlap; types come from the schema's entity inventory plus an
// unknown tag.
inline Sentence random_sentence(std::mt19937_64& gen, const SchemaConfig& schema,
                                const std::string& id, int max_mentions) {
  std::vector<std::string> types(schema.entity_types().begin(),
                                 schema.entity_types().end());
  types.push_back("UNKNOWN_TAG");
  Sentence s;
  s.sentence_id = id;
  const std::size_t len = 3 + draw(gen, 20);
  for (std::size_t i = 0; i < len; ++i) s.tokens.push_back("t" + std::to_string(i));
  const std::size_t n = draw(gen, static_cast<std::size_t>(max_mentions) + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const int start = static_cast<int>(draw(gen, len));
    const int end = std::min<int>(static_cast<int>(len) - 1, start + static_cast<int>(draw(gen, 3)));
    auto m = make_mention(s.tokens, start, end, types[draw(gen, types.size())]);
    const bool taken = std::any_of(s.mentions.begin(), s.mentions.end(),
                                   [&](const EntityMention& x) { return x.same_span(m); });
    if (!taken) s.mentions.push_back(std::move(m));
  }
  s.source = "random";
  return s;
}

// Labeled records for every candidate of `sentences` random sentences.
// Sentence ids are prefixed with `prefix`.
inline std::vector<CreRecord> random_cre_records(std::mt19937_64& gen,
                                                 const SchemaConfig& schema,
                                                 int sentences,
                                                 const std::string& prefix = "c") {
  std::vector<CreRecord> out;
  for (int i = 0; i < sentences; ++i) {
    const auto s = random_sentence(gen, schema, prefix + std::to_string(i), 5);
    for (auto& inst : enumerate_pairs(s, schema)) {
      inst.gold = gen() % 3 == 0;
      out.push_back({inst, s.tokens, inst.relation, s.source, {}});
    }
  }
  return out;
}

inline CreDataset random_cre(std::mt19937_64& gen, const SchemaConfig& schema,
                             int sentences, const std::string& prefix = "c") {
  return make_cre_dataset(random_cre_records(gen, schema, sentences, prefix));
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("cre-test-" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace cre::testing

#endif  // CRE_TESTS_TESTING_GENERATORS_H_
