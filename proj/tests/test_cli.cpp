// End-to-end CLI checks: exit-code contract, file outputs, offline replay.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <nlohmann/json.hpp>

using json = nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  std::string tmp = "/tmp/dqa_cli_out_" + std::to_string(::getpid()) + ".txt";
  std::string cmd = std::string(DQA_CLI_PATH) + " " + args + " > " + tmp + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stdout_text = ss.str();
  std::remove(tmp.c_str());
  return r;
}

std::string data_dir() { return DQA_TEST_DATA_DIR; }

std::string temp_file(const std::string& name) {
  return "/tmp/dqa_cli_" + std::to_string(::getpid()) + "_" + name;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// planted dataset in unified-schema JSONL: token leaks the False label
std::string make_planted_jsonl() {
  std::string path = temp_file("planted.jsonl");
  std::ostringstream out;
  for (int i = 0; i < 120; ++i) {
    json j;
    j["record_id"] = "r" + std::to_string(i);
    j["dataset_id"] = "planted";
    bool is_false = i % 2 == 0;
    j["label"] = is_false ? "false" : "true";
    j["raw_label"] = j["label"];
    std::string text = "claim number alpha beta gamma delta tok" + std::to_string(i % 17);
    if (is_false) text += " xyzzy";
    j["text"] = text;
    out << j.dump() << "\n";
  }
  write_file(path, out.str());
  return path;
}

}  // namespace

TEST_CASE("check subcommand writes a QualityReport and honors --strict") {
  auto dataset = make_planted_jsonl();
  auto out = temp_file("report.json");

  auto r = run_cli("check --dataset " + dataset + " --checks keywords,temporal --seed 7 --trees 30 --baseline-reps 30 --out " + out);
  CHECK(r.exit_code == 0);

  std::ifstream in(out);
  REQUIRE(in.good());
  json rep = json::parse(in);
  CHECK(rep["dataset_id"] == "planted");
  CHECK(rep["verdicts"]["keywords"]["verdict"] == "fail");
  CHECK(rep["verdicts"]["temporal"]["verdict"] == "not_applicable");
  CHECK(rep["seed"] == 7);

  // same invocation with --strict must exit 1 (flagged dataset)
  auto strict =
      run_cli("check --dataset " + dataset + " --checks keywords --seed 7 --trees 30 --baseline-reps 30 --strict --out " + out);
  CHECK(strict.exit_code == 1);

  std::remove(dataset.c_str());
  std::remove(out.c_str());
}

TEST_CASE("check reports missing files as operational errors (exit 2)") {
  auto r = run_cli("check --dataset /nonexistent/x.jsonl");
  CHECK(r.exit_code == 2);
  auto r2 = run_cli("check --dataset /nonexistent/x.jsonl --mapping /nonexistent/m.json");
  CHECK(r2.exit_code == 2);
  auto r3 = run_cli("check --unknown-flag");
  CHECK(r3.exit_code == 2);
}

TEST_CASE("check loads CSV via a mapping config") {
  auto out = temp_file("toy_report.json");
  auto r = run_cli("check --dataset " + data_dir() + "/toy.csv --mapping " + data_dir() +
                   "/toy_mapping.json --checks temporal --out " + out);
  CHECK(r.exit_code == 0);
  std::ifstream in(out);
  json rep = json::parse(in);
  CHECK(rep["dataset_id"] == "toy");
  CHECK(rep["n_records"] == 5);
  std::remove(out.c_str());
}

TEST_CASE("feasibility aggregate and gate") {
  auto ann = temp_file("ann.csv");
  write_file(ann,
             "record_id,annotator_id,rating\n"
             "r1,alice,feasible\n"
             "r1,bob,not_feasible\n"
             "r2,alice,feasible_with_search\n"
             "r3,alice,feasible\n"
             "r4,alice,feasible\n");
  auto out = temp_file("feas.json");
  auto r = run_cli("feasibility aggregate --annotations " + ann + " --dataset-id toy --out " + out);
  CHECK(r.exit_code == 0);
  std::ifstream in(out);
  json rep = json::parse(in);
  CHECK(rep["n_annotated"] == 4);
  CHECK(rep["rate_average"] == 0.875);  // (0.5 + 1 + 1 + 1) / 4
  CHECK(rep["gate_passed"] == true);

  auto pass = run_cli("feasibility gate --rate 0.75");
  CHECK(pass.exit_code == 0);
  CHECK(pass.stdout_text.find("PASS") != std::string::npos);
  auto fail = run_cli("feasibility gate --rate 0.74 --strict");
  CHECK(fail.exit_code == 1);
  auto from_report = run_cli("feasibility gate --report " + out + " --strict");
  CHECK(from_report.exit_code == 0);

  std::remove(ann.c_str());
  std::remove(out.c_str());
}

TEST_CASE("feasibility annotate via mock provider") {
  auto dataset = make_planted_jsonl();
  auto script = temp_file("script.json");
  write_file(script, R"({"reply": "clear claim | 1"})");
  auto out = temp_file("ai.csv");
  auto r = run_cli("feasibility annotate --dataset " + dataset + " --out " + out +
                   " --model mock --sample 5 --mock-script " + script);
  CHECK(r.exit_code == 0);
  std::ifstream in(out);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "record_id,annotator_id,rating");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      ++rows;
      last = line;
    }
  }
  CHECK(rows == 5);
  CHECK(last.find("AI,feasible") != std::string::npos);
  std::remove(dataset.c_str());
  std::remove(script.c_str());
  std::remove(out.c_str());
}

TEST_CASE("judge batch with mock provider, then offline replay") {
  auto batch = temp_file("batch.jsonl");
  write_file(batch,
             json{{"record_id", "r1"},
                  {"statement", "s"},
                  {"article", "a"},
                  {"prediction", "p"}}
                     .dump() +
                 "\n");
  auto script = temp_file("jscript.json");
  write_file(script, R"({"replies": ["x | 2", "x | 3", "x | 3", "x | 2", "x | 3"]})");
  auto cache = temp_file("jcache.jsonl");
  auto out1 = temp_file("verdicts1.jsonl");

  auto r = run_cli("judge --batch " + batch + " --mode score --model mock --mock-script " +
                   script + " --cache " + cache + " --out " + out1);
  CHECK(r.exit_code == 0);

  // replay with the provider disabled: byte-identical output
  auto out2 = temp_file("verdicts2.jsonl");
  auto replay = run_cli("judge --batch " + batch + " --mode score --model mock --offline --cache " +
                        cache + " --out " + out2);
  CHECK(replay.exit_code == 0);
  std::ifstream a(out1), b(out2);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().find("\"aggregate\":2.6") != std::string::npos);
  CHECK(sa.str().find("not_wrong") != std::string::npos);

  for (const auto& f : {batch, script, cache, out1, out2}) std::remove(f.c_str());
}

TEST_CASE("stats predictability over example outcomes") {
  auto in_path = temp_file("examples.jsonl");
  std::ostringstream rows;
  // dataset a: rate 0.5, macro F1 0.5; dataset b: rate 0.75, macro F1 1.0
  auto row = [](const std::string& id, bool f, bool c) {
    return json{{"dataset_id", id}, {"feasible", f}, {"prediction_correct", c}}.dump() + "\n";
  };
  rows << row("a", true, true) << row("a", false, false) << row("a", true, false)
       << row("a", false, true);
  for (int i = 0; i < 6; ++i) rows << row("b", true, true);
  rows << row("b", false, false) << row("b", false, false);
  write_file(in_path, rows.str());

  auto out = temp_file("stats.json");
  auto r = run_cli("stats predictability --in " + in_path + " --out " + out);
  CHECK(r.exit_code == 0);
  std::ifstream in(out);
  json s = json::parse(in);
  CHECK(s["cross_dataset_pearson"] == 1.0);
  CHECK(s["per_dataset"].size() == 2);
  std::remove(in_path.c_str());
  std::remove(out.c_str());
}

TEST_CASE("report render round trips through files") {
  auto dataset = make_planted_jsonl();
  auto rep = temp_file("rr.json");
  run_cli("check --dataset " + dataset + " --checks keywords --seed 3 --trees 30 --baseline-reps 30 --out " + rep);

  auto text = run_cli("report render --in " + rep + " --format text");
  CHECK(text.exit_code == 0);
  CHECK(text.stdout_text.find("keywords: FAIL") != std::string::npos);
  CHECK(text.stdout_text.find("dataset: planted") != std::string::npos);

  auto as_json = run_cli("report render --in " + rep + " --format json");
  std::ifstream in(rep);
  std::stringstream original;
  original << in.rdbuf();
  CHECK(as_json.stdout_text == original.str());

  std::remove(dataset.c_str());
  std::remove(rep.c_str());
}

TEST_CASE("version flag") {
  auto r = run_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("dqa") != std::string::npos);
}
