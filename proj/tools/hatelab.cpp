#include "hatelab/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"hatelab: text classification experiments"};
  app.require_subcommand(1);

  hatelab::PreprocessOptions pre;
  auto* preprocess = app.add_subcommand("preprocess", "Clean and tokenise a CSV; adds a tokens column");
  preprocess->add_option("--input", pre.input, "Input CSV")->required();
  preprocess->add_option("--output", pre.output, "Output CSV")->required();
  preprocess->add_option("--fixtures", pre.fixtures, "Lexicon directory (default $HATELAB_FIXTURES)");
  preprocess->add_option("--text-column", pre.text_column, "Column holding the raw text");
  preprocess->add_flag("--force", pre.force, "Overwrite an existing output file");

  hatelab::ExperimentOptions exp;
  auto* experiment = app.add_subcommand("experiment", "Cross-validate one model from a JSON spec");
  experiment->add_option("--spec", exp.spec, "Experiment spec (JSON)")->required();
  experiment->add_option("--jobs", exp.jobs, "Folds trained concurrently")->check(CLI::PositiveNumber);
  experiment->add_flag("--force", exp.force, "Overwrite existing reports");
  experiment->add_flag("--quiet", exp.quiet, "Only print the final table");

  hatelab::CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Fold-subset bootstrap test between two reports");
  compare->add_option("--a", cmp.a, "First report.json")->required();
  compare->add_option("--b", cmp.b, "Second report.json")->required();
  compare->add_option("--subset", cmp.subset, "Folds per subset")->check(CLI::PositiveNumber);
  compare->add_option("--output", cmp.output, "Comparison JSON");
  compare->add_flag("--force", cmp.force, "Overwrite an existing comparison file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*preprocess) return hatelab::cmd_preprocess(pre, std::cout, std::cerr);
  if (*experiment) return hatelab::cmd_experiment(exp, std::cout, std::cerr);
  return hatelab::cmd_compare(cmp, std::cout, std::cerr);
}
