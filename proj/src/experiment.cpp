#include "hatelab/experiment.hpp"

#include "hatelab/random.hpp"

#include <fstream>
#include <set>

namespace hatelab {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string msg = "invalid experiment spec:";
  for (const auto& p : problems) msg += "\n  - " + p;
  return msg;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "dataset", "synthetic", "test_dataset", "text_column", "label_column", "id_column",
      "preprocess", "fixtures", "synthetic_n", "synthetic_noise", "preset", "name", "arch",
      "embedding", "max_len", "hidden", "windows", "filters", "char_filters", "dropout",
      "batch", "epochs", "lr", "min_freq", "k_folds", "seed", "output_dir"};
  return keys;
}

}  // namespace

SpecError::SpecError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

ExperimentSpec parse_experiment_spec(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  using nlohmann::json;
  std::vector<std::string> problems;
  if (!j.is_object()) throw SpecError({"spec must be a JSON object"});

  for (const auto& [key, value] : j.items()) {
    if (!known_keys().contains(key)) problems.push_back("unknown key '" + key + "'");
  }

  auto want = [&](const char* key, bool ok, const char* what) {
    if (j.contains(key) && !ok) problems.push_back(std::string("'") + key + "' must be " + what);
    return j.contains(key) && ok;
  };
  auto is_count = [&](const char* key) {
    const auto& v = j[key];
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  };
  auto is_positive = [&](const char* key) {
    const auto& v = j[key];
    return v.is_number_integer() && v.get<std::int64_t>() > 0;
  };
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  auto existing = [&](const char* key, std::filesystem::path& out) {
    if (!want(key, j.contains(key) && j[key].is_string(), "a path string")) return;
    out = resolve(j[key].get<std::string>());
    if (!std::filesystem::exists(out)) problems.push_back(std::string("'") + key + "' " + out.string() + " does not exist");
  };

  ExperimentSpec spec;
  const bool has_dataset = j.contains("dataset");
  const bool has_synthetic = j.contains("synthetic");
  if (has_dataset == has_synthetic) problems.push_back("exactly one of 'dataset' or 'synthetic' is required");
  existing("dataset", spec.dataset);
  existing("synthetic", spec.synthetic);
  existing("test_dataset", spec.test_dataset);
  existing("fixtures", spec.fixtures);

  auto str = [&](const char* key, std::string& out) {
    if (want(key, j.contains(key) && j[key].is_string(), "a string")) out = j[key].get<std::string>();
  };
  str("text_column", spec.columns.text);
  str("label_column", spec.columns.label);
  str("id_column", spec.columns.id);
  if (want("preprocess", j.contains("preprocess") && j["preprocess"].is_boolean(), "a boolean"))
    spec.preprocess = j["preprocess"].get<bool>();
  if (want("synthetic_n", j.contains("synthetic_n") && is_positive("synthetic_n"), "a positive integer"))
    spec.synthetic_n = j["synthetic_n"].get<std::size_t>();
  if (want("synthetic_noise", j.contains("synthetic_noise") && j["synthetic_noise"].is_number(), "a number")) {
    const double noise = j["synthetic_noise"].get<double>();
    if (noise < 0.0 || noise > 1.0) problems.push_back("'synthetic_noise' must lie in [0, 1]");
    spec.synthetic_noise = noise;
  }
  if (!has_synthetic && (j.contains("synthetic_n") || j.contains("synthetic_noise")))
    problems.push_back("'synthetic_n' and 'synthetic_noise' require 'synthetic'");

  if (!j.contains("seed")) {
    problems.push_back("'seed' is required");
  } else if (want("seed", is_count("seed"), "a non-negative integer")) {
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  if (!j.contains("output_dir")) {
    problems.push_back("'output_dir' is required");
  } else if (want("output_dir", j["output_dir"].is_string(), "a path string")) {
    spec.output_dir = resolve(j["output_dir"].get<std::string>());
  }
  if (want("k_folds", j.contains("k_folds") && is_count("k_folds"), "a non-negative integer")) {
    spec.k_folds = j["k_folds"].get<std::size_t>();
    if (spec.k_folds < 2) problems.push_back("'k_folds' must be at least 2");
  }

  // Model fields.
  json model = json::object();
  if (!j.contains("arch") && !j.contains("preset")) problems.push_back("one of 'arch' or 'preset' is required");
  if (j.contains("preset") && !(j["preset"].is_string() || is_positive("preset")))
    problems.push_back("'preset' must be a name or a row number");
  else if (j.contains("preset"))
    model["preset"] = j["preset"];
  if (want("name", j.contains("name") && j["name"].is_string(), "a string")) model["name"] = j["name"];
  if (want("arch", j.contains("arch") && j["arch"].is_string(), "a string")) {
    try {
      parse_arch(j["arch"].get<std::string>());
      model["arch"] = j["arch"];
    } catch (const std::invalid_argument& e) {
      problems.push_back(std::string("'arch': ") + e.what());
    }
  }
  for (const char* key : {"max_len", "hidden", "filters", "char_filters", "batch", "epochs", "min_freq"}) {
    if (want(key, j.contains(key) && is_count(key), "a non-negative integer")) model[key] = j[key];
  }
  for (const char* key : {"dropout", "lr"}) {
    if (want(key, j.contains(key) && j[key].is_number(), "a number")) model[key] = j[key];
  }
  if (j.contains("windows")) {
    bool ok = j["windows"].is_array() && !j["windows"].empty();
    if (ok)
      for (const auto& w : j["windows"]) ok = ok && w.is_number_integer() && w.get<std::int64_t>() >= 0;
    if (want("windows", ok, "a non-empty array of non-negative integers")) model["windows"] = j["windows"];
  }
  if (j.contains("embedding")) {
    const auto& e = j["embedding"];
    if (!e.is_object()) {
      problems.push_back("'embedding' must be an object");
    } else {
      json emb = json::object();
      for (const auto& [key, value] : e.items()) {
        if (key != "kind" && key != "path" && key != "dim") problems.push_back("unknown key 'embedding." + key + "'");
      }
      if (e.contains("kind")) {
        if (e["kind"].is_string()) emb["kind"] = e["kind"];
        else problems.push_back("'embedding.kind' must be a string");
      }
      if (e.contains("dim")) {
        if (e["dim"].is_number_integer() && e["dim"].get<std::int64_t>() >= 0) emb["dim"] = e["dim"];
        else problems.push_back("'embedding.dim' must be a non-negative integer");
      }
      if (e.contains("path")) {
        if (!e["path"].is_string()) {
          problems.push_back("'embedding.path' must be a path string");
        } else {
          const auto p = resolve(e["path"].get<std::string>());
          if (!std::filesystem::exists(p)) problems.push_back("'embedding.path' " + p.string() + " does not exist");
          emb["path"] = p.string();
        }
      }
      model["embedding"] = emb;
    }
  }

  try {
    spec.model = config_from_json(model);
    if (spec.model.name.empty()) spec.model.name = arch_name(spec.model.arch);
    spec.model.seed = spec.seed;
    ModelConfig probe = spec.model;
    probe.classes = std::max<std::size_t>(probe.classes, 2);
    probe.validate();
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }

  if (!problems.empty()) throw SpecError(std::move(problems));
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError({"cannot open spec " + path.string()});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError({path.string() + ": " + e.what()});
  }
  return parse_experiment_spec(j, path.parent_path());
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::size_t jobs, std::ostream* log) {
  Dataset dataset;
  if (!spec.synthetic.empty()) {
    const SyntheticSpec syn = load_synthetic_spec(spec.synthetic);
    dataset = generate_synthetic(syn, spec.synthetic_n.value_or(syn.n),
                                 spec.synthetic_noise.value_or(syn.noise_rate), syn.seed);
  } else {
    dataset = load_dataset_csv(spec.dataset, spec.columns);
  }

  std::optional<PipelineResources> resources;
  if (spec.preprocess) resources = PipelineResources::load(resolve_fixture_dir(spec.fixtures));
  const PipelineResources* res = resources ? &*resources : nullptr;

  ExperimentReport report;
  report.system = spec.model.name;
  report.config = spec.model;
  report.config.classes = dataset.classes();
  report.label_names = dataset.label_names;
  report.k_folds = spec.k_folds;
  report.seed = spec.seed;
  report.preprocess = spec.preprocess;
  report.documents = dataset.size();
  const PreparedCorpus corpus = prepare_corpus(dataset, res, &report.stats);

  std::optional<PretrainedEmbeddings> pretrained;
  if (!report.config.embedding.path.empty() && uses_words(report.config.arch)) {
    pretrained = load_embedding_file(report.config.embedding.path);
    if (pretrained->dimension() != report.config.embedding.dim) {
      throw std::invalid_argument("embedding file has dimension " +
                                  std::to_string(pretrained->dimension()) + " but the config says " +
                                  std::to_string(report.config.embedding.dim));
    }
  }
  const PretrainedEmbeddings* emb = pretrained ? &*pretrained : nullptr;

  if (log) *log << report.system << ": " << spec.k_folds << "-fold CV over " << dataset.size() << " documents\n";
  report.cv = run_cv(report.config, corpus, spec.k_folds, spec.seed, emb, jobs);
  if (log) {
    for (const auto& f : report.cv.folds)
      *log << "  fold " << f.fold << ": accuracy " << f.accuracy << ", weighted F1 " << f.weighted_f1 << '\n';
  }

  ModelConfig final_config = report.config;
  final_config.seed = derive_seed(spec.seed, streams::kFoldRun + spec.k_folds);
  FittedModel final_fit = fit_model(final_config, corpus, all_indices(corpus.size()), emb);

  if (!spec.test_dataset.empty()) {
    const Dataset test = load_dataset_csv(spec.test_dataset, spec.columns, &dataset.label_names);
    const PreparedCorpus test_corpus = prepare_corpus(test, res);
    HoldoutResult h;
    h.train_size = corpus.size();
    h.result = make_fold_result(0, evaluate_model(final_fit.model, test_corpus,
                                                  all_indices(test_corpus.size())));
    report.holdout = std::move(h);
  }

  return ExperimentOutcome{std::move(report), std::move(final_fit.model)};
}

}  // namespace hatelab
