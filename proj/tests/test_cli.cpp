#include "doctest.h"

#include "support/scratch.hpp"

#include "hatelab/checkpoint.hpp"
#include "hatelab/commands.hpp"
#include "hatelab/csv.hpp"
#include "hatelab/experiment.hpp"

#include <cstdlib>
#include <sstream>

using namespace hatelab;
using testing::ScratchDir;
using testing::slurp;

namespace {

nlohmann::json small_spec(const std::string& out_dir) {
  return {{"synthetic", testing::fixture("synthetic_3class.json").string()},
          {"synthetic_n", 100},
          {"arch", "cnn"},
          {"embedding", {{"dim", 8}}},
          {"filters", 4},
          {"max_len", 16},
          {"epochs", 2},
          {"batch", 16},
          {"seed", 42},
          {"output_dir", out_dir}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HATELAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("preprocess writes a tokens column") {
    ScratchDir dir("pre");
    std::ostringstream out, err;
    PreprocessOptions o;
    o.input = testing::fixture("d1_sample.csv");
    o.output = dir / "out.csv";
    REQUIRE(cmd_preprocess(o, out, err) == 0);
    const auto in_rows = csv::read_file(o.input);
    const auto rows = csv::read_file(o.output);
    CHECK(rows.size() == in_rows.size());
    CHECK(rows.front().fields.back() == "tokens");
    int tagged = 0;
    for (const auto& r : rows) {
      if (r.fields[1].find("#Feminism") == std::string::npos) continue;
      ++tagged;
      CHECK((" " + r.fields.back() + " ").find(" feminism ") != std::string::npos);
    }
    CHECK(tagged > 0);
    CHECK(out.str().find("hashtags segmented:") != std::string::npos);
    CHECK(out.str().find("emoticons mapped:") != std::string::npos);
    CHECK(out.str().find("contractions expanded:") != std::string::npos);

    std::ostringstream again_err;
    CHECK(cmd_preprocess(o, out, again_err) == 1);
    CHECK(again_err.str().find("--force") != std::string::npos);
    o.force = true;
    CHECK(cmd_preprocess(o, out, err) == 0);
  }

  TEST_CASE("preprocess errors") {
    ScratchDir dir("pre-err");
    std::ostringstream out, err;
    PreprocessOptions o;
    o.input = dir / "missing.csv";
    o.output = dir / "out.csv";
    CHECK(cmd_preprocess(o, out, err) == 1);

    o.input = dir.write("bad.csv", "id,text,label\n1,ok,x\n2,too,many,fields\n3,fine,y\n4\n");
    std::ostringstream bad_err;
    CHECK(cmd_preprocess(o, out, bad_err) == 1);
    CHECK(bad_err.str().find("malformed rows") != std::string::npos);
    CHECK(bad_err.str().find(" 2 4") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(o.output));
  }

  TEST_CASE("experiment writes every artifact, deterministically") {
    ScratchDir dir("exp");
    const auto spec = dir.write("spec.json", small_spec("run").dump());
    std::ostringstream out, err;
    ExperimentOptions o;
    o.spec = spec;
    o.quiet = true;
    REQUIRE_MESSAGE(cmd_experiment(o, out, err) == 0, err.str());
    const auto report = nlohmann::json::parse(slurp(dir / "run/report.json"));
    CHECK(report["folds"].size() == 5);
    CHECK(report["aggregate"].contains("mean_weighted_f1"));
    CHECK(report["aggregate"].contains("pooled_weighted_f1"));
    for (int f = 0; f < 5; ++f) CHECK(std::filesystem::exists(dir / ("run/folds/fold_" + std::to_string(f) + ".csv")));
    CHECK(slurp(dir / "run/report.txt").find("Accuracy") != std::string::npos);
    CHECK(load_checkpoint(dir / "run/model.hlck").config().classes == 3);

    std::ostringstream refuse;
    CHECK(cmd_experiment(o, out, refuse) == 1);
    CHECK(refuse.str().find("--force") != std::string::npos);

    const std::string first = slurp(dir / "run/report.json");
    o.force = true;
    REQUIRE(cmd_experiment(o, out, err) == 0);
    CHECK(slurp(dir / "run/report.json") == first);

    o.jobs = 3;
    REQUIRE(cmd_experiment(o, out, err) == 0);
    CHECK(slurp(dir / "run/report.json") == first);
  }

  TEST_CASE("schema violations are enumerated") {
    ScratchDir dir("schema");
    std::ostringstream out, err;
    ExperimentOptions o;
    auto zero_batch = small_spec("run");
    zero_batch["batch"] = 0;
    o.spec = dir.write("s.json", zero_batch.dump());
    CHECK(cmd_experiment(o, out, err) == 1);
    CHECK(err.str().find("batch") != std::string::npos);

    std::ostringstream err2;
    o.spec = dir.write("s2.json", R"({"arch": "rnn", "dataset": "nope.csv", "colour": 1, "k_folds": 1})");
    CHECK(cmd_experiment(o, out, err2) == 1);
    const std::string e = err2.str();
    CHECK(e.find("'seed' is required") != std::string::npos);
    CHECK(e.find("'output_dir' is required") != std::string::npos);
    CHECK(e.find("unknown key 'colour'") != std::string::npos);
    CHECK(e.find("does not exist") != std::string::npos);
    CHECK(e.find("'arch'") != std::string::npos);
    CHECK(e.find("'k_folds'") != std::string::npos);

    try {
      auto j = small_spec("x");
      j["dropout"] = 1.5;
      j["lr"] = "fast";
      parse_experiment_spec(j, dir.path());
      FAIL("expected a spec error");
    } catch (const SpecError& s) {
      CHECK(s.problems().size() >= 2);
    }
  }

  TEST_CASE("spec paths resolve against the spec directory") {
    ScratchDir dir("paths");
    std::filesystem::copy_file(testing::fixture("d1_sample.csv"), dir / "data.csv");
    const auto spec = parse_experiment_spec(
        nlohmann::json::parse(R"({"dataset": "data.csv", "preset": "CharCNN", "seed": 1, "output_dir": "out"})"),
        dir.path());
    CHECK(spec.dataset == dir / "data.csv");
    CHECK(spec.output_dir == dir / "out");
    CHECK(spec.model.name == "CharCNN");
  }

  TEST_CASE("compare") {
    ScratchDir dir("cmp");
    ExperimentOptions o;
    o.quiet = true;
    std::ostringstream out, err;
    o.spec = dir.write("a.json", small_spec("a").dump());
    REQUIRE(cmd_experiment(o, out, err) == 0);
    auto other = small_spec("b");
    other["name"] = "other";
    other["seed"] = 43;
    o.spec = dir.write("b.json", other.dump());
    REQUIRE_MESSAGE(cmd_experiment(o, out, err) == 0, err.str());

    CompareOptions c;
    c.a = dir / "a/report.json";
    c.b = c.a;
    c.output = dir / "self.json";
    std::ostringstream cout_;
    REQUIRE(cmd_compare(c, cout_, err) == 0);
    CHECK(nlohmann::json::parse(slurp(c.output))["p_value"] == 0.0);
    CHECK(cout_.str().find("p-value") != std::string::npos);

    c.b = dir / "b/report.json";
    c.output = dir / "ab.json";
    REQUIRE(cmd_compare(c, out, err) == 0);
    const auto j = nlohmann::json::parse(slurp(c.output));
    const double p = j["p_value"].get<double>();
    CHECK(std::abs(p * 10 - std::round(p * 10)) < 1e-12);
    CHECK(j["subset_count"] == 10);

    auto three = nlohmann::json::parse(slurp(c.b));
    three["folds"].erase(3);
    three["folds"].erase(3);
    dir.write("three.json", three.dump());
    c.b = dir / "three.json";
    c.output = dir / "bad.json";
    std::ostringstream mismatch;
    CHECK(cmd_compare(c, out, mismatch) == 1);
    CHECK(mismatch.str().find("fold counts differ") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(c.output));
  }

  TEST_CASE("binary exit codes") {
    ScratchDir dir("bin");
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("preprocess --input " + (dir / "missing.csv").string() + " --output " + (dir / "o.csv").string()) == 1);
    CHECK(run_cli("preprocess --input " + testing::fixture("d1_sample.csv").string() + " --output " + (dir / "o.csv").string()) == 0);
    CHECK(run_cli("experiment --spec " + (dir / "none.json").string()) == 1);
    CHECK(run_cli("compare --a x.json") == 1);
  }
}
