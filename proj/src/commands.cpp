#include "hatelab/commands.hpp"

#include "hatelab/checkpoint.hpp"
#include "hatelab/csv.hpp"
#include "hatelab/experiment.hpp"
#include "hatelab/significance.hpp"

#include <fstream>
#include <sstream>

namespace hatelab {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Writes via a temporary file, then re-reads to verify.
void write_text(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("failed writing " + path.string());
  }
  fs::rename(tmp, path);
  if (read_text(path) != content) throw std::runtime_error("verification of " + path.string() + " failed");
}

bool refuse_overwrite(const std::vector<fs::path>& paths, bool force, std::ostream& err) {
  if (force) return false;
  for (const auto& p : paths) {
    if (fs::exists(p)) {
      err << "error: " << p.string() << " exists; pass --force to overwrite\n";
      return true;
    }
  }
  return false;
}

}  // namespace

int cmd_preprocess(const PreprocessOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (!fs::exists(opts.input)) {
      err << "error: input file " << opts.input.string() << " not found\n";
      return 1;
    }
    if (refuse_overwrite({opts.output}, opts.force, err)) return 1;
    const auto records = csv::read_file(opts.input);
    if (records.empty()) {
      err << "error: " << opts.input.string() << " has no header row\n";
      return 1;
    }
    const auto& header = records.front().fields;
    std::size_t text_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == opts.text_column) text_col = c;
    if (text_col == header.size()) {
      err << "error: missing column '" << opts.text_column << "'\n";
      return 1;
    }
    for (const auto& name : header) {
      if (name == "tokens") {
        err << "error: input already has a 'tokens' column\n";
        return 1;
      }
    }

    std::vector<std::size_t> bad;
    for (std::size_t r = 1; r < records.size(); ++r)
      if (records[r].fields.size() != header.size()) bad.push_back(r);
    if (!bad.empty()) {
      err << "error: malformed rows (expected " << header.size() << " fields):";
      for (std::size_t r : bad) err << ' ' << r;
      err << '\n';
      return 1;
    }

    const auto resources = PipelineResources::load(resolve_fixture_dir(opts.fixtures));
    PipelineStats stats;
    std::ostringstream csv_out;
    auto out_header = header;
    out_header.push_back("tokens");
    csv::write_row(csv_out, out_header);
    for (std::size_t r = 1; r < records.size(); ++r) {
      auto row = records[r].fields;
      row.push_back(join_tokens(preprocess(row[text_col], resources, &stats)));
      csv::write_row(csv_out, row);
    }
    write_text(opts.output, csv_out.str());
    if (csv::parse(read_text(opts.output)).size() != records.size())
      throw std::runtime_error("row count changed while writing " + opts.output.string());

    out << "rows: " << records.size() - 1 << '\n'
        << "hashtags segmented: " << stats.hashtags_segmented << '\n'
        << "emoticons mapped: " << stats.emoticons_mapped << '\n'
        << "contractions expanded: " << stats.contractions_expanded << '\n'
        << "misspellings expanded: " << stats.misspellings_expanded << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_experiment(const ExperimentOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentSpec spec = load_experiment_spec(opts.spec);
    const fs::path dir = spec.output_dir;
    const fs::path report_json = dir / "report.json";
    const fs::path report_txt = dir / "report.txt";
    const fs::path folds_dir = dir / "folds";
    const fs::path model_path = dir / "model.hlck";
    if (refuse_overwrite({report_json, report_txt, folds_dir, model_path}, opts.force, err)) return 1;

    ExperimentOutcome outcome = run_experiment(spec, opts.jobs, opts.quiet ? nullptr : &out);
    const ExperimentReport& rep = outcome.report;

    fs::create_directories(folds_dir);
    const std::string json_text = report_to_json(rep).dump(2) + "\n";
    write_text(report_json, json_text);
    write_text(report_txt, format_report_table({&rep}));
    for (const auto& f : rep.cv.folds) {
      write_text(folds_dir / ("fold_" + std::to_string(f.fold) + ".csv"),
                 format_confusion_csv(f.confusion, rep.label_names));
    }
    save_checkpoint(outcome.final_model, model_path);

    const auto reread = load_system_folds(report_json);
    if (reread.folds.size() != rep.cv.folds.size())
      throw std::runtime_error("report.json does not round-trip");
    const auto restored = load_checkpoint(model_path);
    if (restored.parameters().size() != outcome.final_model.parameters().size())
      throw std::runtime_error("checkpoint does not round-trip");

    out << format_report_table({&rep});
    return 0;
  } catch (const SpecError& e) {
    err << "error: " << e.problems().size() << " spec problem(s)\n";
    for (const auto& p : e.problems()) err << "  - " << p << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (refuse_overwrite({opts.output}, opts.force, err)) return 1;
    const SystemFolds a = load_system_folds(opts.a);
    SystemFolds b = load_system_folds(opts.b);
    if (a.id == b.id) b.id += " (b)";
    const BootstrapResult r = bootstrap_compare(a, b, opts.subset);
    const auto j = comparison_to_json(r, a, b);
    write_text(opts.output, j.dump(2) + "\n");
    out << "full winner: " << j["full_winner"].get<std::string>() << '\n'
        << "p-value: " << r.p_value << " (" << r.disagreements << "/" << r.subset_count << " subsets)\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace hatelab
