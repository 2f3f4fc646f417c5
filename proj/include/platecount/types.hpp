#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "platecount/box.hpp"

namespace platecount {

enum class ColonyClass : std::uint8_t {
  SAureus,
  BSubtilis,
  PAeruginosa,
  EColi,
  CAlbicans,
  Defect,
  Contamination,
};

inline constexpr std::size_t kNumClasses = 7;
inline constexpr std::size_t kNumMicrobes = 5;

inline constexpr std::array<ColonyClass, kNumClasses> kAllClasses = {
    ColonyClass::SAureus, ColonyClass::BSubtilis,     ColonyClass::PAeruginosa,
    ColonyClass::EColi,   ColonyClass::CAlbicans,     ColonyClass::Defect,
    ColonyClass::Contamination};

inline constexpr std::array<ColonyClass, kNumMicrobes> kMicrobeClasses = {
    ColonyClass::SAureus, ColonyClass::BSubtilis, ColonyClass::PAeruginosa, ColonyClass::EColi,
    ColonyClass::CAlbicans};

constexpr std::size_t index_of(ColonyClass c) { return static_cast<std::size_t>(c); }

/// Defect and Contamination are not colonies and never enter colony counts.
constexpr bool is_microbe(ColonyClass c) {
  return c != ColonyClass::Defect && c != ColonyClass::Contamination;
}

/// Canonical spelling written to AGAR JSON, e.g. "S.aureus".
std::string_view canonical_name(ColonyClass c);

enum class BackgroundCategory : std::uint8_t { Bright, Dark, Vague, LowerResolution };

inline constexpr std::array<BackgroundCategory, 4> kAllBackgrounds = {
    BackgroundCategory::Bright, BackgroundCategory::Dark, BackgroundCategory::Vague,
    BackgroundCategory::LowerResolution};

std::string_view canonical_name(BackgroundCategory b);

enum class CountabilityStatus : std::uint8_t { Empty, Countable, Uncountable };

std::string_view canonical_name(CountabilityStatus s);

/// Counts above this are uncountable and recorded as colonies_number = -1.
inline constexpr long kUncountableCap = 300;

/// Name lookup for classes and backgrounds. Keys are compared after trimming
/// and lower-casing; extra aliases can be registered for other spellings.
class AliasTable {
 public:
  AliasTable();

  void add(std::string_view alias, ColonyClass c);
  void add(std::string_view alias, BackgroundCategory b);

  std::optional<ColonyClass> find_class(std::string_view name) const;
  std::optional<BackgroundCategory> find_background(std::string_view name) const;

  static const AliasTable& defaults();

 private:
  std::map<std::string, ColonyClass> classes_;
  std::map<std::string, BackgroundCategory> backgrounds_;
};

std::string normalize_name(std::string_view name);

struct Label {
  long id = 0;
  ColonyClass cls = ColonyClass::SAureus;
  BBox box;
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const Label&, const Label&) = default;
};

struct SampleAnnotation {
  long sample_id = 0;
  BackgroundCategory background = BackgroundCategory::Bright;
  std::vector<ColonyClass> classes;
  long colonies_number = 0;
  std::vector<Label> labels;
  /// Unknown top-level keys, preserved verbatim on write.
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const SampleAnnotation&, const SampleAnnotation&) = default;
};

long microbe_label_count(const SampleAnnotation& s);
CountabilityStatus status_of(const SampleAnnotation& s);

struct Detection {
  BBox box;
  ColonyClass cls = ColonyClass::SAureus;
  double score = 1.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Per-class tallies plus the colony total over the five microbe classes.
struct ClassCounts {
  std::array<long, kNumClasses> per_class{};

  long& operator[](ColonyClass c) { return per_class[index_of(c)]; }
  long operator[](ColonyClass c) const { return per_class[index_of(c)]; }

  long microbe_total() const;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts count_labels(const std::vector<Label>& labels);

}  // namespace platecount
