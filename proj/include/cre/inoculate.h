#ifndef CRE_INOCULATE_H_
#define CRE_INOCULATE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cre/corpus.h"
#include "cre/schema.h"

namespace cre {

enum class SplitMode {
  // Each relation's instances are halved independently.
  kInstance,
  // Whole sentences go to one half; instance counts are balanced greedily.
  kSentence,
};

struct HalfCounts {
  std::size_t half_a = 0;
  std::size_t half_b = 0;
  bool operator==(const HalfCounts&) const = default;
};

struct SplitManifest {
  std::uint64_t rng_seed = 0;
  SplitMode mode = SplitMode::kInstance;
  std::vector<std::string> half_a;  // sorted instance ids
  std::vector<std::string> half_b;
  std::map<std::string, HalfCounts> per_relation;

  bool operator==(const SplitManifest&) const = default;
};

// Stratified random halving. In instance mode each relation's counts differ
// by at most one, and the larger side of odd relations alternates between
// the halves (starting side drawn from the seed) so the totals stay within
// one of each other as well.
SplitManifest split_cre(const CreDataset& cre, std::uint64_t rng_seed,
                        SplitMode mode = SplitMode::kInstance);

std::string split_mode_name(SplitMode mode);
SplitMode parse_split_mode(std::string_view name);

SplitManifest read_manifest(std::istream& in);
SplitManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const SplitManifest& manifest, std::ostream& out);

// Prefix that keeps exported CRE ids apart from TACRED ids.
inline constexpr std::string_view kCreIdPrefix = "cre:";

// `train` followed by the CRE instances named in `half`, converted to TACRED
// records: label is the relation for gold 1 and the no-relation label for
// gold 0. Throws NotFoundError for an unknown id and CollisionError when a
// namespaced id already exists in `train`.
std::vector<TacredRecord> export_augmented_train(
    std::vector<TacredRecord> train, std::span<const std::string> half,
    const CreDataset& cre, const SchemaConfig& schema);

// Throws ValidationError listing evaluation ids that belong to the training
// half.
void check_uncontaminated(std::span<const CandidateInstance> evaluated,
                          std::span<const std::string> training_half);

}  // namespace cre

#endif  // CRE_INOCULATE_H_
