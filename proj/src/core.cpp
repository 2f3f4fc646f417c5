#include <algorithm>
#include <cctype>

#include "platecount/error.hpp"
#include "platecount/types.hpp"

namespace platecount {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::UnknownBackground: return "UnknownBackground";
    case ErrorCode::InvalidBox: return "InvalidBox";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::OversizedBox: return "OversizedBox";
    case ErrorCode::NoEmptyRegion: return "NoEmptyRegion";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::UnknownWindowIndex: return "UnknownWindowIndex";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingSample: return "MissingSample";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NoHighCountSamples: return "NoHighCountSamples";
    case ErrorCode::InfeasiblePlacement: return "InfeasiblePlacement";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string_view canonical_name(ColonyClass c) {
  switch (c) {
    case ColonyClass::SAureus: return "S.aureus";
    case ColonyClass::BSubtilis: return "B.subtilis";
    case ColonyClass::PAeruginosa: return "P.aeruginosa";
    case ColonyClass::EColi: return "E.coli";
    case ColonyClass::CAlbicans: return "C.albicans";
    case ColonyClass::Defect: return "Defect";
    case ColonyClass::Contamination: return "Contamination";
  }
  return "?";
}

std::string_view canonical_name(BackgroundCategory b) {
  switch (b) {
    case BackgroundCategory::Bright: return "bright";
    case BackgroundCategory::Dark: return "dark";
    case BackgroundCategory::Vague: return "vague";
    case BackgroundCategory::LowerResolution: return "lower-resolution";
  }
  return "?";
}

std::string_view canonical_name(CountabilityStatus s) {
  switch (s) {
    case CountabilityStatus::Empty: return "empty";
    case CountabilityStatus::Countable: return "countable";
    case CountabilityStatus::Uncountable: return "uncountable";
  }
  return "?";
}

std::string normalize_name(std::string_view name) {
  auto first = std::find_if_not(name.begin(), name.end(),
                                [](unsigned char ch) { return std::isspace(ch); });
  auto last = std::find_if_not(name.rbegin(), name.rend(),
                               [](unsigned char ch) { return std::isspace(ch); })
                  .base();
  std::string out;
  if (first < last) out.assign(first, last);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

AliasTable::AliasTable() {
  for (ColonyClass c : kAllClasses) add(canonical_name(c), c);
  for (BackgroundCategory b : kAllBackgrounds) add(canonical_name(b), b);

  add("s. aureus", ColonyClass::SAureus);
  add("s_aureus", ColonyClass::SAureus);
  add("saureus", ColonyClass::SAureus);
  add("staphylococcus aureus", ColonyClass::SAureus);
  add("b. subtilis", ColonyClass::BSubtilis);
  add("b_subtilis", ColonyClass::BSubtilis);
  add("bsubtilis", ColonyClass::BSubtilis);
  add("bacillus subtilis", ColonyClass::BSubtilis);
  add("p. aeruginosa", ColonyClass::PAeruginosa);
  add("p_aeruginosa", ColonyClass::PAeruginosa);
  add("paeruginosa", ColonyClass::PAeruginosa);
  add("pseudomonas aeruginosa", ColonyClass::PAeruginosa);
  add("e. coli", ColonyClass::EColi);
  add("e_coli", ColonyClass::EColi);
  add("ecoli", ColonyClass::EColi);
  add("escherichia coli", ColonyClass::EColi);
  add("c. albicans", ColonyClass::CAlbicans);
  add("c_albicans", ColonyClass::CAlbicans);
  add("calbicans", ColonyClass::CAlbicans);
  add("candida albicans", ColonyClass::CAlbicans);
  add("defects", ColonyClass::Defect);
  add("contaminations", ColonyClass::Contamination);

  add("lower_resolution", BackgroundCategory::LowerResolution);
  add("lowerresolution", BackgroundCategory::LowerResolution);
  add("lower resolution", BackgroundCategory::LowerResolution);
}

void AliasTable::add(std::string_view alias, ColonyClass c) { classes_[normalize_name(alias)] = c; }

void AliasTable::add(std::string_view alias, BackgroundCategory b) {
  backgrounds_[normalize_name(alias)] = b;
}

std::optional<ColonyClass> AliasTable::find_class(std::string_view name) const {
  auto it = classes_.find(normalize_name(name));
  if (it == classes_.end()) return std::nullopt;
  return it->second;
}

std::optional<BackgroundCategory> AliasTable::find_background(std::string_view name) const {
  auto it = backgrounds_.find(normalize_name(name));
  if (it == backgrounds_.end()) return std::nullopt;
  return it->second;
}

const AliasTable& AliasTable::defaults() {
  static const AliasTable table;
  return table;
}

long microbe_label_count(const SampleAnnotation& s) {
  return static_cast<long>(std::count_if(s.labels.begin(), s.labels.end(),
                                         [](const Label& l) { return is_microbe(l.cls); }));
}

CountabilityStatus status_of(const SampleAnnotation& s) {
  if (s.colonies_number < 0) return CountabilityStatus::Uncountable;
  if (s.colonies_number == 0 && microbe_label_count(s) == 0) return CountabilityStatus::Empty;
  return CountabilityStatus::Countable;
}

long ClassCounts::microbe_total() const {
  long total = 0;
  for (ColonyClass c : kMicrobeClasses) total += (*this)[c];
  return total;
}

ClassCounts count_labels(const std::vector<Label>& labels) {
  ClassCounts counts;
  for (const Label& l : labels) ++counts[l.cls];
  return counts;
}

}  // namespace platecount
