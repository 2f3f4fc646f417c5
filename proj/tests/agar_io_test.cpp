#include <gtest/gtest.h>

#include <filesystem>

#include "platecount/agar_io.hpp"
#include "platecount/detections_io.hpp"
#include "test_support.hpp"

namespace platecount {
namespace {

using nlohmann::json;

const char* kEmptyDark = R"({"background": "dark", "classes": [], "colonies_number": 0, "labels": [], "sample_id": 7})";

std::string three_aureus_one_contamination() {
  json doc = {{"background", "bright"}, {"classes", {"S.aureus", "Contamination"}}, {"colonies_number", 3},
              {"sample_id", 12}};
  json labels = json::array();
  for (int i = 0; i < 3; ++i)
    labels.push_back({{"id", i + 1}, {"class", "S.aureus"}, {"x", 10 * i}, {"y", 5}, {"width", 8}, {"height", 9}});
  labels.push_back({{"id", 4}, {"class", "Contamination"}, {"x", 400}, {"y", 400}, {"width", 80}, {"height", 60}});
  doc["labels"] = labels;
  return doc.dump();
}

ErrorCode error_code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

TEST(ParseAgar, EmptySample) {
  const SampleAnnotation s = parse_agar(kEmptyDark);
  EXPECT_EQ(s.sample_id, 7);
  EXPECT_EQ(s.background, BackgroundCategory::Dark);
  EXPECT_EQ(status_of(s), CountabilityStatus::Empty);
}

TEST(ParseAgar, UncountableSample) {
  const SampleAnnotation s =
      parse_agar(R"({"background": "vague", "classes": ["E.coli"], "colonies_number": -1, "labels": [], "sample_id": 3})");
  EXPECT_EQ(status_of(s), CountabilityStatus::Uncountable);
}

TEST(ParseAgar, ContaminationNotCounted) {
  const SampleAnnotation s = parse_agar(three_aureus_one_contamination(), {{Strictness::Strict}});
  long direct = 0;
  for (const Label& l : s.labels) direct += l.cls == ColonyClass::SAureus;
  EXPECT_EQ(direct, 3);
  EXPECT_EQ(microbe_label_count(s), 3);
  EXPECT_EQ(s.labels.size(), 4u);
  EXPECT_EQ(status_of(s), CountabilityStatus::Countable);
}

TEST(ParseAgar, Errors) {
  EXPECT_EQ(error_code_of([] { parse_agar("{not json"); }), ErrorCode::MalformedJson);
  EXPECT_EQ(error_code_of([] { parse_agar(R"({"background": "dark"})"); }), ErrorCode::MissingField);
  EXPECT_EQ(error_code_of([] {
              parse_agar(R"({"background": "dark", "classes": ["Yeast"], "colonies_number": 0, "labels": [], "sample_id": 1})");
            }),
            ErrorCode::UnknownClass);
  EXPECT_EQ(error_code_of([] {
              parse_agar(R"({"background": "pink", "classes": [], "colonies_number": 0, "labels": [], "sample_id": 1})");
            }),
            ErrorCode::UnknownBackground);
}

TEST(ParseAgar, CountMismatchWarnsOrThrows) {
  json doc = json::parse(three_aureus_one_contamination());
  doc["colonies_number"] = 5;
  std::vector<Warning> warnings;
  const SampleAnnotation s = parse_agar(doc.dump(), {}, &warnings);
  EXPECT_EQ(s.colonies_number, 5);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].code, ErrorCode::CountMismatch);
  EXPECT_EQ(error_code_of([&] { parse_agar(doc.dump(), {Strictness::Strict}); }), ErrorCode::CountMismatch);
}

TEST(ParseAgar, UnknownFieldsPreservedWhenLenient) {
  json doc = json::parse(kEmptyDark);
  doc["photographer"] = "lab 2";
  std::vector<Warning> warnings;
  const SampleAnnotation s = parse_agar(doc.dump(), {}, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(json::parse(write_agar(s))["photographer"], "lab 2");
  EXPECT_EQ(error_code_of([&] { parse_agar(doc.dump(), {Strictness::Strict}); }), ErrorCode::UnknownField);
}

TEST(WriteAgar, EmptyRoundTripIsCanonical) {
  const std::string canonical = json::parse(kEmptyDark).dump(2) + "\n";
  EXPECT_EQ(write_agar(parse_agar(kEmptyDark)), canonical);
}

TEST(WriteAgar, UncountableEmitsMinusOne) {
  SampleAnnotation s;
  s.colonies_number = -1;
  EXPECT_EQ(json::parse(write_agar(s))["colonies_number"], -1);
}

TEST(WriteAgar, LargeFixtureRoundTrip) {
  testing::Rng rng(250);
  SampleAnnotation s = testing::random_sample(rng, 1, 0);
  s.colonies_number = 0;
  s.labels.clear();
  for (long i = 0; i < 250; ++i)
    s.labels.push_back({i + 1, testing::random_class(rng, true), testing::random_box(rng, 3000, 200), json::object()});
  s.colonies_number = 250;
  const SampleAnnotation back = parse_agar(write_agar(s), {Strictness::Strict});
  ASSERT_EQ(back.labels.size(), 250u);
  for (std::size_t i = 0; i < 250; ++i) {
    EXPECT_EQ(back.labels[i].id, s.labels[i].id);
    EXPECT_EQ(back.labels[i].cls, s.labels[i].cls);
    EXPECT_EQ(back.labels[i].box, s.labels[i].box);
  }
  EXPECT_EQ(back, s);
}

TEST(WriteAgar, RoundTripProperty) {
  testing::Rng rng(99);
  for (long i = 0; i < 300; ++i) {
    const SampleAnnotation s = testing::random_sample(rng, i);
    EXPECT_EQ(parse_agar(write_agar(s), {Strictness::Strict}), s) << i;
  }
}

TEST(Coco, EmptyList) {
  const json doc = to_coco_json({});
  EXPECT_EQ(doc["categories"].size(), 7u);
  EXPECT_TRUE(doc["images"].empty());
  EXPECT_TRUE(doc["annotations"].empty());
}

TEST(Coco, OneLabel) {
  SampleAnnotation s;
  s.sample_id = 4;
  s.background = BackgroundCategory::Vague;
  s.colonies_number = 1;
  s.labels.push_back({1, ColonyClass::PAeruginosa, {10, 20, 7, 3}, {}});
  const json doc = to_coco_json({s}, {{4, {4000, 6000}}});
  ASSERT_EQ(doc["images"].size(), 1u);
  EXPECT_EQ(doc["images"][0]["background"], "vague");
  EXPECT_EQ(doc["images"][0]["width"], 4000);
  ASSERT_EQ(doc["annotations"].size(), 1u);
  const json& a = doc["annotations"][0];
  EXPECT_EQ(a["area"].get<double>(), 7.0 * 3.0);
  EXPECT_EQ(a["image_id"], 4);
  EXPECT_EQ(a["category_id"], coco_category_id(ColonyClass::PAeruginosa));
}

TEST(Coco, DuplicateSampleId) {
  SampleAnnotation s;
  EXPECT_EQ(error_code_of([&] { to_coco_json({s, s}); }), ErrorCode::DuplicateSampleId);
}

TEST(Directory, CollectsErrorsPerFile) {
  const auto dir = std::filesystem::temp_directory_path() / "platecount_agar_io_test";
  std::filesystem::remove_all(dir);
  write_text_file(dir / "a.json", kEmptyDark);
  write_text_file(dir / "b.json", "[1, 2");
  write_text_file(dir / "notes.txt", "ignored");
  const LoadedDataset data = load_agar_directory(dir);
  EXPECT_EQ(data.samples.size(), 1u);
  ASSERT_EQ(data.errors.size(), 1u);
  EXPECT_NE(data.errors.begin()->first.find("b.json"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(DetectionsIo, RoundTrip) {
  testing::Rng rng(5);
  std::vector<DetectionRecord> records;
  for (int i = 0; i < 50; ++i) {
    DetectionRecord r;
    r.sample_id = i % 7;
    if (i % 2) r.window_index = i % 5;
    r.detection = {testing::random_int_box(rng, 500), testing::random_class(rng), 0.125 * (i % 8)};
    records.push_back(r);
  }
  EXPECT_EQ(parse_detections_jsonl(write_detections_jsonl(records)), records);
}

TEST(DetectionsIo, GroupBySample) {
  const auto records = parse_detections_jsonl(
      "{\"sample_id\": 2, \"class\": \"E.coli\", \"x\": 1, \"y\": 1, \"w\": 2, \"h\": 2, \"score\": 0.5}\n"
      "\n"
      "{\"sample_id\": 1, \"class\": \"E.coli\", \"x\": 1, \"y\": 1, \"w\": 2, \"h\": 2, \"score\": 0.7}\n");
  const auto grouped = group_by_sample(records);
  ASSERT_EQ(grouped.size(), 2u);
  EXPECT_EQ(grouped.at(1)[0].score, 0.7);
}

}  // namespace
}  // namespace platecount
