#include "rbias/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "rbias/attacks.hpp"
#include "rbias/data/dataset.hpp"
#include "rbias/data/partition.hpp"
#include "rbias/data/synthetic.hpp"
#include "rbias/error.hpp"
#include "rbias/estimates.hpp"
#include "rbias/io/csv.hpp"
#include "rbias/io/files.hpp"
#include "rbias/metrics.hpp"
#include "rbias/models/training.hpp"
#include "rbias/parallel.hpp"
#include "rbias/smoothing.hpp"

namespace rbias::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Shared plumbing

struct SchemaOptions {
  std::string schema_file;
  std::string label;
  std::vector<std::string> features;
  std::vector<std::string> attributes;

  void add_to(CLI::App& app) {
    app.add_option("--schema", schema_file, "Dataset manifest JSON giving column roles");
    app.add_option("--label", label, "Label column (default: label)");
    app.add_option("--features", features, "Feature columns (default: all others)")->delimiter(',');
    app.add_option("--attributes", attributes, "Sensitive-attribute columns")->delimiter(',');
  }
};

fs::path sidecar_manifest(const fs::path& data) {
  fs::path p = data;
  p.replace_extension(".manifest.json");
  return p;
}

// Resolution order: --schema, explicit column flags, the dataset's sidecar
// manifest, a fallback manifest (e.g. the one embedded in a model file),
// then label="label".
ColumnSchema resolve_schema(const SchemaOptions& opts, const fs::path& data,
                            const json& fallback = json::object()) {
  if (!opts.schema_file.empty()) return dataset_manifest_from_json(read_json(opts.schema_file)).schema;
  if (!opts.label.empty() || !opts.features.empty() || !opts.attributes.empty()) {
    return ColumnSchema{opts.label.empty() ? "label" : opts.label, opts.features, opts.attributes};
  }
  if (fs::exists(sidecar_manifest(data))) {
    return dataset_manifest_from_json(read_json(sidecar_manifest(data))).schema;
  }
  if (fallback.contains("columns")) return dataset_manifest_from_json(fallback).schema;
  return ColumnSchema{"label", {}, {}};
}

std::string rfc3339_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&t, &utc);
  std::ostringstream s;
  s << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Deterministic run identity; outputs carry it so they can be traced back to
// the manifest even though the manifest itself records wall-clock time.
struct Manifest {
  std::string command;
  json config = json::object();
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  std::string id() const {
    const json identity = {{"command", command}, {"config", config}, {"inputs", inputs},
                           {"tool_version", kToolVersion}};
    return sha256_hex(identity.dump()).substr(0, 16);
  }

  void write(const fs::path& path) const {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json j;
    j["manifest_id"] = id();
    j["command"] = command;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["tool_version"] = kToolVersion;
    j["timestamp"] = rfc3339_now();
    j["duration_seconds"] = seconds;
    csv::write_file(path, dump_json(j));
  }
};

std::string file_hash(const fs::path& path) { return sha256_hex(csv::read_file(path)); }

fs::path manifest_path_for(const std::string& explicit_path, const fs::path& output) {
  if (!explicit_path.empty()) return explicit_path;
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

// Appends `--key value` tokens from a JSON config for every key not given on
// the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  const auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) throw ConfigError("--config needs a file path");
  const json config = read_json(*(it + 1));
  if (!config.is_object()) throw ConfigError("config file must hold a JSON object");

  std::vector<std::string> merged(args.begin(), it);
  merged.insert(merged.end(), it + 2, args.end());
  const auto given = [&](const std::string& flag) {
    return std::find(merged.begin(), merged.end(), flag) != merged.end();
  };
  const auto scalar = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return csv::format_double(v.get<double>());
    throw ConfigError("config values must be strings, numbers, booleans or arrays of those");
  };
  for (const auto& [key, value] : config.items()) {
    const std::string flag = "--" + key;
    if (key == "command" || given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& item : value) {
        merged.push_back(flag);
        merged.push_back(scalar(item));
      }
    } else {
      merged.push_back(flag);
      merged.push_back(scalar(value));
    }
  }
  return merged;
}

Dataset apply_standardization(Dataset data, const std::optional<Standardization>& s) {
  if (s) {
    if (s->mean.size() != data.dim()) throw ConfigError("model standardization does not match the data width");
    data.features = s->apply(data.features);
  }
  return data;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::string kind = "blobs";
  std::size_t n = 50;
  double separation = 1.0;
  double stddev = 0.5;
  double radius = 2.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  Manifest manifest;
  manifest.command = "generate";
  manifest.seed = o.seed;
  manifest.config = {{"kind", o.kind}, {"n", o.n}, {"seed", o.seed}};

  Dataset data;
  if (o.kind == "toy") {
    manifest.config["separation"] = o.separation;
    data = make_two_subgroup_toy(o.n, o.separation, o.seed).data;
  } else if (o.kind == "margin-gap") {
    data = make_margin_gap_toy(o.n, o.seed).data;
  } else if (o.kind == "blobs") {
    manifest.config["stddev"] = o.stddev;
    manifest.config["radius"] = o.radius;
    data = make_three_class_gaussians(o.n, triangle_means(o.radius), o.stddev, o.seed);
  } else {
    throw ConfigError("--kind must be 'toy', 'margin-gap' or 'blobs'");
  }

  DatasetManifest dm;
  dm.schema = schema_of(data);
  dm.class_names = data.class_names;
  dm.seed = o.seed;
  dm.generator = o.kind;
  write_csv(data, o.out);
  csv::write_file(sidecar_manifest(o.out), dump_json(to_json(dm)));
  manifest.outputs = {o.out, sidecar_manifest(o.out).string()};
  manifest.write(manifest_path_for(o.manifest, o.out));
  out << "wrote " << data.size() << " rows to " << o.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string data;
  SchemaOptions schema;
  std::string arch = "affine";
  int epochs = 100;
  int batch_size = 32;
  double lr = 0.1;
  std::uint64_t seed = 0;
  std::string objective = "erm";
  double alpha = 0.0;
  double tau = 0.0;
  double temperature = 0.1;
  std::string partition;
  bool standardize = false;
  std::string out;
  std::string loss_trace;
  std::string manifest;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
  const ColumnSchema schema = resolve_schema(o.schema, o.data);
  Dataset data = load_csv(o.data, schema);

  TrainConfig config;
  config.epochs = o.epochs;
  config.batch_size = o.batch_size;
  config.learning_rate = o.lr;
  config.seed = o.seed;
  config.objective = parse_objective(o.objective);
  config.alpha = o.alpha;
  config.tau = o.tau;
  config.temperature = o.temperature;
  if (!o.partition.empty()) {
    const PartitionSpec spec = PartitionSpec::parse(o.partition);
    const auto parts = partitions_of(data, spec);
    if (parts.size() != 1) {
      throw ConfigError("--partition for training must select one group, e.g. attribute:gender=F");
    }
    config.protected_partition = parts.front();
  }
  config.validate();
  const Architecture arch = Architecture::parse(o.arch);

  std::optional<Standardization> standardization;
  if (o.standardize) {
    standardization = fit_standardization(data.features);
    data.features = standardization->apply(data.features);
  }

  Manifest manifest;
  manifest.command = "train";
  manifest.seed = o.seed;
  manifest.config = train_config_to_json(config);
  manifest.config["arch"] = arch.to_string();
  manifest.config["standardize"] = o.standardize;
  manifest.inputs = {{"dataset_hash", file_hash(o.data)}};

  const TrainResult result = train(data, arch, config);

  DatasetManifest dm;
  dm.schema = schema;
  dm.class_names = data.class_names;
  dm.standardized = o.standardize;

  ModelFile file;
  file.model = result.model;
  file.architecture = arch;
  file.standardization = standardization;
  file.train_config = manifest.config;
  file.dataset = to_json(dm);
  file.dataset_hash = manifest.inputs["dataset_hash"].get<std::string>();
  file.manifest_id = manifest.id();
  csv::write_file(o.out, dump_json(to_json(file)));
  manifest.outputs.push_back(o.out);

  const std::string trace_path = o.loss_trace.empty() ? o.out + ".loss.csv" : o.loss_trace;
  csv::write_file(trace_path, loss_trace_to_csv(result.loss_trace, manifest.id()));
  manifest.outputs.push_back(trace_path);
  manifest.write(manifest_path_for(o.manifest, o.out));

  out << "trained " << arch.to_string() << " model, training accuracy "
      << accuracy(result.model, data) << ", wrote " << o.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateOptions {
  std::string model;
  std::string data;
  SchemaOptions schema;
  std::string method;
  unsigned workers = default_workers();
  // DeepFool / C&W
  int max_iter = 50;
  double overshoot = 0.02;
  double cw_c = 1e-2;
  int cw_steps = 9;
  int cw_iterations = 1000;
  double cw_lr = 1e-2;
  double cw_confidence = 0.0;
  std::vector<double> box_lo;
  std::vector<double> box_hi;
  // smoothing
  std::optional<double> sigma;
  int n0 = 100;
  int n = 1000;
  double alpha = 0.001;
  std::uint64_t seed = 0;
  std::string certificates;
  std::string out;
  std::string manifest;
};

int cmd_estimate(const EstimateOptions& o, std::ostream& out) {
  const ModelFile model_file = load_model_file(o.model);
  const Classifier& model = model_file.model;
  const ColumnSchema schema = resolve_schema(o.schema, o.data, model_file.dataset);
  const Dataset data = apply_standardization(load_csv(o.data, schema), model_file.standardization);
  if (data.dim() != model.input_dim()) throw ConfigError("dataset width does not match the model");

  Manifest manifest;
  manifest.command = "estimate";
  manifest.config = {{"method", o.method}, {"standardized", model_file.standardization.has_value()}};
  manifest.inputs = {{"dataset_hash", file_hash(o.data)}, {"model_hash", file_hash(o.model)}};

  std::vector<DistanceEstimate> estimates;
  std::string certificates_text;
  if (o.method == "exact") {
    const auto affine = model.as_affine();
    if (!affine) {
      throw ConfigError("exact distances need an affine model; this model has " +
                        std::to_string(model.layers().size()) +
                        " layers and no closed-form boundary distance (use deepfool, cw or smoothing)");
    }
    estimates = exact_distances(*affine, data);
  } else if (o.method == "deepfool" || o.method == "cw") {
    AttackConfig config;
    config.max_iterations = o.max_iter;
    config.overshoot = o.overshoot;
    config.cw = CwConfig{o.cw_c, o.cw_steps, o.cw_iterations, o.cw_lr, o.cw_confidence};
    if (!o.box_lo.empty() || !o.box_hi.empty()) {
      const auto d = static_cast<std::size_t>(data.dim());
      const auto expand = [d](const std::vector<double>& v) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(d));
        if (v.size() == 1) {
          out.setConstant(v[0]);
        } else if (v.size() == d) {
          for (std::size_t i = 0; i < d; ++i) out(static_cast<Eigen::Index>(i)) = v[i];
        } else {
          throw ConfigError("box bounds need one value or one per feature");
        }
        return out;
      };
      if (o.box_lo.empty() || o.box_hi.empty()) throw ConfigError("--box-lo and --box-hi go together");
      config.box = Box{expand(o.box_lo), expand(o.box_hi)};
    }
    config.validate();
    manifest.config["max_iter"] = o.max_iter;
    manifest.config["overshoot"] = o.overshoot;
    manifest.config["cw"] = {{"initial_c", o.cw_c}, {"binary_search_steps", o.cw_steps},
                             {"inner_iterations", o.cw_iterations}, {"learning_rate", o.cw_lr},
                             {"confidence", o.cw_confidence}};
    manifest.config["box"] = config.box ? json{{"lo", o.box_lo}, {"hi", o.box_hi}} : json(nullptr);
    const AttackMethod method = o.method == "deepfool" ? AttackMethod::kDeepFool : AttackMethod::kCarliniWagner;
    estimates = attack_distances(model, data, method, config, o.workers);
  } else if (o.method == "smoothing") {
    SmoothingConfig config;
    config.noise_stddev = o.sigma ? *o.sigma : 0.25 * median_pairwise_distance(data.features);
    config.n0 = o.n0;
    config.n = o.n;
    config.alpha = o.alpha;
    config.seed = o.seed;
    config.validate();
    manifest.seed = o.seed;
    manifest.config["sigma_noise"] = config.noise_stddev;
    manifest.config["sigma_from_median_heuristic"] = !o.sigma.has_value();
    manifest.config["n0"] = o.n0;
    manifest.config["n"] = o.n;
    manifest.config["alpha"] = o.alpha;
    manifest.config["seed"] = o.seed;
    const auto certificates = certify_all(model, data, config, o.workers);
    estimates = to_estimates(data, certificates, config);
    certificates_text = certificates_to_csv(data, certificates, config, manifest.id());
  } else {
    throw ConfigError("--method must be one of exact, deepfool, cw, smoothing");
  }

  csv::write_file(o.out, distances_to_csv(estimates, manifest.id()));
  manifest.outputs.push_back(o.out);
  if (!certificates_text.empty()) {
    const std::string path = o.certificates.empty() ? o.out + ".certificates.csv" : o.certificates;
    csv::write_file(path, certificates_text);
    manifest.outputs.push_back(path);
  }
  std::size_t failed = 0;
  std::size_t errors = 0;
  for (const auto& e : estimates) {
    failed += std::isinf(e.distance) ? 1 : 0;
    errors += e.error.empty() ? 0 : 1;
  }
  manifest.config["workers_are_output_neutral"] = true;
  manifest.write(manifest_path_for(o.manifest, o.out));
  out << "estimated " << estimates.size() << " distances with " << o.method << " (" << failed
      << " unbounded, " << errors << " errors), wrote " << o.out << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------
// audit

struct AuditOptions {
  std::string data;
  SchemaOptions schema;
  std::vector<std::string> distances;
  std::string partition = "class";
  std::vector<double> taus;
  double tolerance = 0.05;
  std::string curves;
  std::string scores;
  std::string manifest;
};

int cmd_audit(const AuditOptions& o, std::ostream& out) {
  const Dataset data = load_csv(o.data, resolve_schema(o.schema, o.data));
  const std::vector<Partition> partitions = partitions_of(data, PartitionSpec::parse(o.partition));
  for (const Partition& p : partitions) {
    if (p.members.size() == data.size()) {
      throw DegeneratePartition("partition '" + p.name + "' has an empty complement");
    }
  }

  Manifest manifest;
  manifest.command = "audit";
  manifest.config = {{"partition", o.partition}, {"taus", o.taus}, {"tolerance", o.tolerance}};
  manifest.inputs["dataset_hash"] = file_hash(o.data);
  json distance_hashes = json::array();
  for (const auto& path : o.distances) distance_hashes.push_back(file_hash(path));
  manifest.inputs["distances_hashes"] = distance_hashes;

  std::vector<MethodCurves> all_curves;
  std::vector<std::vector<BiasScore>> all_scores;
  std::vector<std::string> methods;
  json scores;
  scores["manifest_id"] = manifest.id();
  scores["partition_spec"] = o.partition;
  scores["tolerance"] = o.tolerance;
  scores["taus"] = o.taus;
  scores["methods"] = json::object();

  for (const auto& path : o.distances) {
    const auto estimates = parse_distances_csv(csv::read_file(path));
    const DistanceTable table = DistanceTable::from_estimates(estimates);
    if (table.size() != data.size()) {
      throw ConfigError(path + " has " + std::to_string(table.size()) + " rows, dataset has " +
                        std::to_string(data.size()));
    }
    if (std::find(methods.begin(), methods.end(), table.method) != methods.end()) {
      throw ConfigError("two distance files use method '" + table.method + "'");
    }
    methods.push_back(table.method);

    MethodCurves mc{table.method, {}};
    std::vector<BiasScore> method_scores;
    json per_partition = json::object();
    for (const Partition& p : partitions) {
      mc.curves.push_back(curve(table, p));
      json entry;
      try {
        const BiasScore s = sigma(table, p, o.taus);
        method_scores.push_back(s);
        entry["sigma"] = s.sigma;
        entry["auc_in"] = s.auc_in;
        entry["auc_out"] = s.auc_out;
        json rb_at = json::object();
        for (const auto& [tau, value] : s.rb_at) rb_at[csv::format_double(tau)] = value;
        entry["rb_at"] = rb_at;
      } catch (const DegenerateComplement& e) {
        entry["error"] = e.what();
      }
      try {
        const double worst = max_rb(table, p);
        entry["max_rb"] = worst;
        entry["no_bias"] = worst <= o.tolerance;
      } catch (const NoCorrectExamples& e) {
        entry["max_rb"] = nullptr;
        entry["no_bias"] = nullptr;
        entry["rb_error"] = e.what();
      }
      per_partition[p.name] = entry;
    }
    scores["methods"][table.method] = {{"bound", to_string(table.bound)},
                                      {"failure_rate", table.failure_rate()},
                                      {"partitions", per_partition}};
    all_curves.push_back(std::move(mc));
    all_scores.push_back(std::move(method_scores));
  }

  if (methods.size() >= 2) {
    json agreement = json::array();
    for (std::size_t a = 0; a < methods.size(); ++a) {
      for (std::size_t b = a + 1; b < methods.size(); ++b) {
        // Partitions whose sigma failed for either method are left out.
        std::vector<BiasScore> left;
        std::vector<BiasScore> right;
        for (const BiasScore& s : all_scores[a]) {
          const auto match = std::find_if(all_scores[b].begin(), all_scores[b].end(),
                                          [&](const BiasScore& t) { return t.partition == s.partition; });
          if (match == all_scores[b].end()) continue;
          left.push_back(s);
          right.push_back(*match);
        }
        const Agreement ag = sign_agreement(left, right);
        agreement.push_back({{"method_a", methods[a]},
                             {"method_b", methods[b]},
                             {"count_agree", ag.count_agree},
                             {"total", ag.total},
                             {"percent", ag.total == 0 ? 0.0
                                                       : 100.0 * static_cast<double>(ag.count_agree) /
                                                             static_cast<double>(ag.total)},
                             {"mean_diff", ag.mean_diff},
                             {"var_diff", ag.var_diff}});
      }
    }
    scores["agreement"] = agreement;
  }

  csv::write_file(o.curves, curves_to_csv(all_curves, manifest.id()));
  csv::write_file(o.scores, dump_json(scores));
  manifest.outputs = {o.curves, o.scores};
  manifest.write(manifest_path_for(o.manifest, o.scores));
  out << "audited " << partitions.size() << " partitions across " << methods.size()
      << " estimator(s), wrote " << o.curves << " and " << o.scores << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robustness-bias auditing for classifiers", "rbias"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset");
  generate->add_option("--kind", gen.kind, "toy | margin-gap (two subgroups) or blobs (three classes)");
  generate->add_option("--n", gen.n, "Points per subgroup cell (toy) or per class (blobs)");
  generate->add_option("--separation", gen.separation, "Toy attack budget");
  generate->add_option("--stddev", gen.stddev, "Blob standard deviation");
  generate->add_option("--radius", gen.radius, "Blob means circumradius");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--out", gen.out)->required();
  generate->add_option("--manifest", gen.manifest);
  generate->add_option("--config", "JSON file with option values");

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train an affine or MLP classifier");
  train_cmd->add_option("--data", tr.data)->required();
  tr.schema.add_to(*train_cmd);
  train_cmd->add_option("--arch", tr.arch, "affine | mlp:<w1>,<w2>,...");
  train_cmd->add_option("--epochs", tr.epochs);
  train_cmd->add_option("--batch-size", tr.batch_size);
  train_cmd->add_option("--lr", tr.lr);
  train_cmd->add_option("--seed", tr.seed);
  train_cmd->add_option("--objective", tr.objective, "erm | adverm");
  train_cmd->add_option("--alpha", tr.alpha);
  train_cmd->add_option("--tau", tr.tau);
  train_cmd->add_option("--temperature", tr.temperature);
  train_cmd->add_option("--partition", tr.partition, "Protected group, e.g. attribute:gender=F");
  train_cmd->add_flag("--standardize", tr.standardize);
  train_cmd->add_option("--out", tr.out)->required();
  train_cmd->add_option("--loss-trace", tr.loss_trace);
  train_cmd->add_option("--manifest", tr.manifest);
  train_cmd->add_option("--config", "JSON file with option values");

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Per-example distance estimates");
  estimate->add_option("--model", est.model)->required();
  estimate->add_option("--data", est.data)->required();
  est.schema.add_to(*estimate);
  estimate->add_option("--method", est.method, "exact | deepfool | cw | smoothing")->required();
  estimate->add_option("--workers", est.workers);
  estimate->add_option("--max-iter", est.max_iter);
  estimate->add_option("--overshoot", est.overshoot);
  estimate->add_option("--cw-c", est.cw_c);
  estimate->add_option("--cw-steps", est.cw_steps);
  estimate->add_option("--cw-iterations", est.cw_iterations);
  estimate->add_option("--cw-lr", est.cw_lr);
  estimate->add_option("--cw-confidence", est.cw_confidence);
  estimate->add_option("--box-lo", est.box_lo)->delimiter(',');
  estimate->add_option("--box-hi", est.box_hi)->delimiter(',');
  estimate->add_option("--sigma", est.sigma, "Smoothing noise (default 0.25 x median pairwise distance)");
  estimate->add_option("--n0", est.n0);
  estimate->add_option("--n", est.n);
  estimate->add_option("--alpha", est.alpha);
  estimate->add_option("--seed", est.seed);
  estimate->add_option("--certificates", est.certificates);
  estimate->add_option("--out", est.out)->required();
  estimate->add_option("--manifest", est.manifest);
  estimate->add_option("--config", "JSON file with option values");

  AuditOptions au;
  auto* audit = app.add_subcommand("audit", "Robustness curves, sigma and RB per partition");
  audit->add_option("--data", au.data)->required();
  au.schema.add_to(*audit);
  audit->add_option("--distances", au.distances, "Distance files (repeatable)")->required();
  audit->add_option("--partition", au.partition, "class | attribute:<name> | attribute:<name>=<value>");
  audit->add_option("--taus", au.taus, "Budgets at which RB is reported")->delimiter(',');
  audit->add_option("--tolerance", au.tolerance, "No-bias tolerance on max RB");
  audit->add_option("--curves", au.curves)->required();
  audit->add_option("--scores", au.scores)->required();
  audit->add_option("--manifest", au.manifest);
  audit->add_option("--config", "JSON file with option values");

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (estimate->parsed()) return cmd_estimate(est, out);
    if (audit->parsed()) return cmd_audit(au, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace rbias::cli
