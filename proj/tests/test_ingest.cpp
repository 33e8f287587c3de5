// Core utilities + ingest: CSV parsing, date handling, label harmonization,
// dataset loading, JSONL round trips.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>

#include "dqa/csv.hpp"
#include "dqa/ingest.hpp"
#include "dqa/records.hpp"
#include "dqa/rng.hpp"
#include "dqa/sha256.hpp"

using namespace dqa;

namespace {

std::string fixture(const std::string& name) { return std::string(DQA_TEST_DATA_DIR "/") + name; }
std::string shipped(const std::string& name) { return std::string(DQA_DATA_DIR "/") + name; }

std::string temp_path(const std::string& name) {
  return std::string("/tmp/dqa_test_") + std::to_string(::getpid()) + "_" + name;
}

}  // namespace

TEST_CASE("sha256 matches known vectors") {
  CHECK(Sha256::hash_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(Sha256::hash_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(Sha256::hash_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  // block-boundary message
  CHECK(Sha256::hash_hex(std::string(64, 'a')) ==
        "ffe054fe7ae0cb6dc65c3af9b61d5209f439851db43d0ba5997337df154668eb");
}

TEST_CASE("seed derivation is stable and spread") {
  CHECK(derive_seed(0, 1) != derive_seed(0, 2));
  CHECK(derive_seed(0, 1) == derive_seed(0, 1));
  CHECK(derive_seed(1, 1) != derive_seed(2, 1));
  Rng rng(42);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(bounded(rng, 10));
  CHECK(seen.size() == 10);  // all residues hit
}

TEST_CASE("csv parser handles quotes and newlines") {
  auto rows = parse_csv("a,b\n\"x,y\",\"he said \"\"hi\"\"\"\n\"line\nbreak\",z\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "x,y");
  CHECK(rows[1][1] == "he said \"hi\"");
  CHECK(rows[2][0] == "line\nbreak");

  auto tsv = parse_csv("a\tb\nc\td\n", '\t');
  REQUIRE(tsv.size() == 2);
  CHECK(tsv[1][0] == "c");

  CHECK_THROWS_AS(parse_csv("\"open,b\n"), MalformedRowError);
}

TEST_CASE("date patterns parse in order") {
  auto iso = parse_date("2020-01-11", "%Y-%m-%d");
  REQUIRE(iso);
  CHECK(iso->year == 2020);
  CHECK(iso->day == 11);

  auto dmy = parse_date("15/04/2020", "%d/%m/%Y");
  REQUIRE(dmy);
  CHECK(dmy->month == 4);
  CHECK(dmy->day == 15);

  auto my = parse_date("04/2020", "%m/%Y");
  REQUIRE(my);
  CHECK(my->day == 1);  // day defaults to 1

  CHECK_FALSE(parse_date("2020-13-01", "%Y-%m-%d"));  // invalid month
  CHECK_FALSE(parse_date("2020-02-30", "%Y-%m-%d"));  // invalid day
  CHECK_FALSE(parse_date("junk", "%Y-%m-%d"));

  std::vector<std::string> patterns = {"%Y-%m-%d", "%d/%m/%Y", "%m/%Y"};
  CHECK(parse_date_any("2020-03-01", patterns)->month == 3);
  CHECK(parse_date_any("01/03/2020", patterns)->month == 3);

  CHECK(days_between(Date{2020, 1, 1}, Date{2020, 1, 11}) == 10);
  CHECK(days_between(Date{2020, 1, 1}, Date{2020, 1, 1}) == 0);
  CHECK(days_between(Date{2019, 12, 31}, Date{2020, 1, 2}) == 2);
}

TEST_CASE("harmonize_label is case-insensitive and total") {
  std::unordered_map<std::string, Label> map{
      {"unproven", Label::Unknown}, {"half-true", Label::Mixed}, {"true", Label::True}};
  CHECK(harmonize_label("unproven", map) == Label::Unknown);
  CHECK(harmonize_label("half-true", map) == Label::Mixed);
  CHECK(harmonize_label("TRUE ", map) == Label::True);
  CHECK(harmonize_label("  Half-True\t", map) == Label::Mixed);
  CHECK_THROWS_MATCHES(harmonize_label("hoax", map), UnmappedLabelError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("hoax")));
}

TEST_CASE("load_dataset with the shipped LIAR mapping") {
  auto cfg = load_mapping(shipped("mappings/liar.json"));
  auto d = load_dataset(fixture("liar_sample.tsv"), cfg);
  REQUIRE(d.records.size() == 6);
  CHECK(d.dataset_id == "liar");
  CHECK(d.records[0].record_id == "2635.json");
  CHECK(d.records[0].label == Label::False);  // "false"
  CHECK(d.records[1].label == Label::Mixed);  // "half-true"
  CHECK(d.records[2].label == Label::False);  // "pants-fire"
  CHECK(d.records[3].label == Label::True);
  CHECK(d.records[4].label == Label::True);  // "barely-true" folds to true
  CHECK(d.records[5].label == Label::True);  // "mostly-true"
}

TEST_CASE("load_dataset drops empty text and warns, keeps row order") {
  auto cfg = load_mapping(fixture("toy_mapping.json"));
  auto d = load_dataset(fixture("toy.csv"), cfg);
  REQUIRE(d.records.size() == 5);  // a5 dropped (blank text)
  CHECK(d.records[0].record_id == "a1");
  CHECK(d.records[4].record_id == "a6");
  bool warned_drop = false, warned_date = false;
  for (const auto& w : d.load_warnings) {
    if (w.find("dropped") != std::string::npos) warned_drop = true;
    if (w.find("unparseable date") != std::string::npos) warned_date = true;
  }
  CHECK(warned_drop);
  CHECK(warned_date);  // a6 has "not-a-date"

  CHECK(d.records[0].date == Date{2020, 3, 1});
  CHECK(d.records[2].date == Date{2020, 4, 15});  // DD/MM/YYYY
  CHECK(d.records[3].date == Date{2020, 4, 1});   // MM/YYYY -> day 1
  CHECK_FALSE(d.records[4].date.has_value());
  REQUIRE(d.records[4].tweet_id.has_value());
  CHECK(*d.records[4].tweet_id == "12345678901");
}

TEST_CASE("unmapped raw label is an error naming the label") {
  auto cfg = load_mapping(fixture("toy_mapping.json"));
  std::string path = temp_path("unmapped.csv");
  {
    std::ofstream out(path);
    out << "id,verdict,claim\nz1,hoax,Some claim text.\n";
  }
  CHECK_THROWS_MATCHES(load_dataset(path, cfg), UnmappedLabelError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("hoax")));
  std::remove(path.c_str());
}

TEST_CASE("malformed row reports its row number") {
  auto cfg = load_mapping(fixture("toy_mapping.json"));
  std::string path = temp_path("malformed.csv");
  {
    std::ofstream out(path);
    out << "id,verdict,claim\na,yes,ok\nb,yes\n";  // row 3 short
  }
  CHECK_THROWS_MATCHES(load_dataset(path, cfg), MalformedRowError,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("row 3")));
  std::remove(path.c_str());
}

TEST_CASE("duplicate record ids are rejected") {
  auto cfg = load_mapping(fixture("toy_mapping.json"));
  std::string path = temp_path("dup.csv");
  {
    std::ofstream out(path);
    out << "id,verdict,claim\nsame,yes,First claim.\nsame,no,Second claim.\n";
  }
  CHECK_THROWS_MATCHES(
      load_dataset(path, cfg), MalformedRowError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("duplicate")));
  std::remove(path.c_str());
}

TEST_CASE("jsonl ingestion with empty-text drop and fallback ids") {
  MappingConfig cfg;
  cfg.format = SourceFormat::Jsonl;
  cfg.dataset_id = "jl";
  cfg.column_map = {{"text", "body"}, {"label", "tag"}};
  cfg.label_map = {{"t", Label::True}, {"f", Label::False}};
  std::string path = temp_path("in.jsonl");
  {
    std::ofstream out(path);
    out << R"({"body": "The dam holds.", "tag": "t"})" << "\n";
    out << R"({"body": "", "tag": "f"})" << "\n";
    out << R"({"body": "It fell in May.", "tag": "f"})" << "\n";
  }
  auto d = load_dataset(path, cfg);
  REQUIRE(d.records.size() == 2);
  CHECK(d.records[0].record_id == "row-0");
  CHECK(d.records[1].record_id == "row-2");
  CHECK(d.records[1].label == Label::False);
  REQUIRE(d.load_warnings.size() == 1);
  std::remove(path.c_str());
}

TEST_CASE("filter_by_labels preserves order and supports empty results") {
  Dataset d;
  d.dataset_id = "x";
  const Label labels[] = {Label::True, Label::False, Label::Mixed, Label::Unknown, Label::True};
  int i = 0;
  for (Label l : labels) {
    ClaimRecord r;
    r.record_id = "r" + std::to_string(i++);
    r.dataset_id = "x";
    r.text = "text";
    r.label = l;
    d.records.push_back(r);
  }

  auto tf = filter_by_labels(d, {Label::True, Label::False});
  REQUIRE(tf.records.size() == 3);
  CHECK(tf.records[0].record_id == "r0");
  CHECK(tf.records[1].record_id == "r1");
  CHECK(tf.records[2].record_id == "r4");

  auto all = filter_by_labels(d, {Label::True, Label::False, Label::Mixed, Label::Unknown});
  CHECK(all.records.size() == d.records.size());

  auto none = filter_by_labels(d, {Label::Mixed});
  CHECK(none.records.size() == 1);
  CHECK(filter_by_labels(none, {Label::True}).records.empty());
  CHECK_THROWS_AS(filter_by_labels(d, {}), Error);
}

TEST_CASE("label_distribution sums to one") {
  Dataset d;
  for (int i = 0; i < 2; ++i) {
    ClaimRecord r;
    r.record_id = "t" + std::to_string(i);
    r.text = "x";
    r.label = Label::True;
    d.records.push_back(r);
  }
  for (int i = 0; i < 2; ++i) {
    ClaimRecord r;
    r.record_id = "f" + std::to_string(i);
    r.text = "x";
    r.label = Label::False;
    d.records.push_back(r);
  }
  auto dist = label_distribution(d);
  CHECK(dist[Label::True] == Catch::Approx(0.5));
  CHECK(dist[Label::False] == Catch::Approx(0.5));
  double sum = 0;
  for (auto [l, f] : dist) sum += f;
  CHECK(std::abs(sum - 1.0) < 1e-9);

  Dataset u;
  for (int i = 0; i < 3; ++i) {
    ClaimRecord r;
    r.record_id = "u" + std::to_string(i);
    r.text = "x";
    r.label = Label::Unknown;
    u.records.push_back(r);
  }
  auto ud = label_distribution(u);
  CHECK(ud[Label::Unknown] == Catch::Approx(1.0));

  Dataset empty;
  CHECK_THROWS_AS(label_distribution(empty), Error);
}

TEST_CASE("dataset jsonl round trip is exact") {
  auto cfg = load_mapping(fixture("toy_mapping.json"));
  auto d = load_dataset(fixture("toy.csv"), cfg);
  std::string path = temp_path("roundtrip.jsonl");
  write_dataset_jsonl(path, d);
  auto d2 = read_dataset_jsonl(path);
  REQUIRE(d2.records.size() == d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) CHECK(d2.records[i] == d.records[i]);

  // serialize -> load -> serialize is a fixed point
  CHECK(dataset_to_jsonl(d2) == dataset_to_jsonl(d));
  std::remove(path.c_str());
}

TEST_CASE("record json omits absent fields") {
  ClaimRecord r;
  r.record_id = "a";
  r.dataset_id = "d";
  r.text = "t";
  r.raw_label = "yes";
  r.label = Label::True;
  auto j = record_to_json(r);
  CHECK_FALSE(j.contains("date"));
  CHECK_FALSE(j.contains("tweet_id"));
  CHECK_FALSE(j.contains("language"));
  r.date = Date{2020, 1, 2};
  CHECK(record_to_json(r)["date"] == "2020-01-02");
}
