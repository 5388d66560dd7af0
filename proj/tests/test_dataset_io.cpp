#include <sstream>

#include "doctest.h"
#include "visrank/dataset_io.hpp"

using namespace visrank;

TEST_CASE("minimal record line parses") {
  auto record = parse_record_line(
      R"({"id":"r1","gold":"way","hypotheses":[{"word":"way","p":0.4}],)"
      R"("contexts":[{"label":"street","p":0.6}]})",
      1);
  CHECK(record.id == "r1");
  CHECK(record.gold == "way");
  REQUIRE(record.hypotheses.k() == 1);
  CHECK(record.hypotheses.items[0].word == "way");
  CHECK(record.hypotheses.items[0].score == 0.4);
  REQUIRE(record.contexts.size() == 1);
  CHECK(record.contexts[0].label == "street");
  CHECK(record.contexts[0].confidence == 0.6);
}

TEST_CASE("empty stream yields no records") {
  std::istringstream in("");
  CHECK(parse_records(in).empty());
}

TEST_CASE("score outside unit interval is a validation error naming the line") {
  std::istringstream in(
      "\n"
      R"({"id":"r1","gold":"a","hypotheses":[{"word":"a","p":1.3}],"contexts":[]})"
      "\n");
  CHECK_THROWS_WITH_AS(parse_records(in), doctest::Contains("line 2"), ValidationError);
}

TEST_CASE("context confidence outside unit interval is rejected") {
  std::istringstream in(
      R"({"id":"r1","gold":"a","hypotheses":[{"word":"a","p":0.5}],)"
      R"("contexts":[{"label":"sky","p":-0.1}]})");
  CHECK_THROWS_AS(parse_records(in), ValidationError);
}

TEST_CASE("malformed json is a parse error naming the line") {
  std::istringstream in("{not json\n");
  CHECK_THROWS_WITH_AS(parse_records(in), doctest::Contains("line 1"), ParseError);
}

TEST_CASE("missing keys are parse errors") {
  CHECK_THROWS_AS(parse_record_line(R"({"gold":"a","hypotheses":[]})", 1), ParseError);
  CHECK_THROWS_AS(parse_record_line(R"({"id":"r1","hypotheses":[]})", 1), ParseError);
  CHECK_THROWS_AS(parse_record_line(R"({"id":"r1","gold":"a"})", 1), ParseError);
}

TEST_CASE("unknown keys are ignored") {
  auto record = parse_record_line(
      R"({"id":"r1","gold":"a","box":[1,2],"hypotheses":[{"word":"a","p":0.5,"extra":9}],)"
      R"("contexts":[],"note":"x"})",
      1);
  CHECK(record.id == "r1");
  CHECK(record.hypotheses.k() == 1);
}

TEST_CASE("token normalization") {
  CHECK(normalize_token("Way ") == "way");
  CHECK(normalize_token("kt") == "kt");
  CHECK(normalize_token("24:7") == "24:7");
  CHECK(normalize_token("  STOP\t") == "stop");
  CHECK(normalize_token("   ") == "");
}

TEST_CASE("normalize_token is idempotent") {
  for (const char* raw : {"Way ", "kt", "24:7", " MiXeD cAsE ", "a_b-c"}) {
    std::string once = normalize_token(raw);
    CHECK(normalize_token(once) == once);
  }
}

TEST_CASE("gold and words are normalized on ingest") {
  auto record = parse_record_line(
      R"({"id":"r1","gold":" WAY","hypotheses":[{"word":"Way ","p":0.4}],)"
      R"("contexts":[{"label":" Street","p":0.6}]})",
      1);
  CHECK(record.gold == "way");
  CHECK(record.hypotheses.items[0].word == "way");
  CHECK(record.contexts[0].label == "street");
}

TEST_CASE("empty gold after normalization is rejected") {
  CHECK_THROWS_AS(
      parse_record_line(R"({"id":"r1","gold":"  ","hypotheses":[{"word":"a","p":0.1}],)"
                        R"("contexts":[]})",
                        1),
      ValidationError);
}

TEST_CASE("unsorted hypotheses are sorted on ingest, ties keep input order") {
  auto record = parse_record_line(
      R"({"id":"r1","gold":"a","hypotheses":[{"word":"low","p":0.1},{"word":"hi","p":0.9},)"
      R"({"word":"tie1","p":0.5},{"word":"tie2","p":0.5}],"contexts":[]})",
      1);
  REQUIRE(record.hypotheses.k() == 4);
  CHECK(record.hypotheses.items[0].word == "hi");
  CHECK(record.hypotheses.items[1].word == "tie1");
  CHECK(record.hypotheses.items[2].word == "tie2");
  CHECK(record.hypotheses.items[3].word == "low");
}

TEST_CASE("duplicate ids in one stream are rejected") {
  std::istringstream in(
      R"({"id":"r1","gold":"a","hypotheses":[{"word":"a","p":0.5}],"contexts":[]})"
      "\n"
      R"({"id":"r1","gold":"b","hypotheses":[{"word":"b","p":0.5}],"contexts":[]})"
      "\n");
  CHECK_THROWS_WITH_AS(parse_records(in), doctest::Contains("r1"), ValidationError);
}

TEST_CASE("oversized candidate lists are counted, not rejected") {
  std::string hyps;
  for (int i = 0; i < 10; ++i) {
    if (i) hyps += ',';
    hyps += R"({"word":"w)" + std::to_string(i) + R"(","p":0.01})";
  }
  std::istringstream in(R"({"id":"r1","gold":"w0","hypotheses":[)" + hyps +
                        R"(],"contexts":[]})" + "\n");
  ParseStats stats;
  auto records = parse_records(in, &stats);
  REQUIRE(records.size() == 1);
  CHECK(records[0].hypotheses.k() == 10);
  CHECK(stats.records == 1);
  CHECK(stats.oversized_lists == 1);
}

TEST_CASE("parse serialize parse is identity") {
  std::istringstream in(
      R"({"id":"r1","gold":"way","hypotheses":[{"word":"way","p":0.4},{"word":"wav","p":0.35}],)"
      R"("contexts":[{"label":"street","p":0.6},{"label":"sky","p":0.05}]})"
      "\n"
      R"({"id":"r2","gold":"stop","hypotheses":[{"word":"stop","p":1.0}],"contexts":[]})"
      "\n");
  auto records = parse_records(in);
  REQUIRE(records.size() == 2);

  std::ostringstream out;
  write_records(out, records);
  std::istringstream back(out.str());
  auto reparsed = parse_records(back);
  REQUIRE(reparsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) CHECK(reparsed[i] == records[i]);

  std::ostringstream out2;
  write_records(out2, reparsed);
  CHECK(out.str() == out2.str());
}

TEST_CASE("top k view clamps to available hypotheses") {
  auto record = parse_record_line(
      R"({"id":"r1","gold":"a","hypotheses":[{"word":"a","p":0.6},{"word":"b","p":0.4}],)"
      R"("contexts":[]})",
      1);
  CHECK(record.hypotheses.top(1).size() == 1);
  CHECK(record.hypotheses.top(2).size() == 2);
  CHECK(record.hypotheses.top(5).size() == 2);
  CHECK(record.hypotheses.top(1)[0].word == "a");
}
