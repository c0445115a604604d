#include "iotsense/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "iotsense/decode.hpp"
#include "iotsense/demux.hpp"
#include "iotsense/dhcp_classifier.hpp"
#include "iotsense/error.hpp"
#include "iotsense/event_log.hpp"
#include "iotsense/features.hpp"
#include "iotsense/linear_model.hpp"
#include "iotsense/manifest.hpp"
#include "iotsense/metrics.hpp"
#include "iotsense/pcap.hpp"
#include "iotsense/selection.hpp"
#include "iotsense/unified.hpp"

namespace iotsense {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::vector<std::string> pcaps;
  std::string events;
  std::string manifest;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--pcap", in.pcaps, "classic pcap capture(s)");
  cmd->add_option("--events", in.events, "packet event log (JSON lines)");
  cmd->add_option("--manifest", in.manifest, "device manifest CSV (mac,name,label)")->required();
}

std::vector<DeviceTrace> load_traces(const InputOptions& in, const DeviceManifest& manifest) {
  if (in.pcaps.empty() == in.events.empty())
    throw UsageError("exactly one of --pcap or --events is required");
  if (!in.events.empty()) return group_by_device(read_event_log_file(in.events), manifest);
  std::vector<DecodedFrame> frames;
  for (const auto& path : in.pcaps) {
    for (const auto& raw : read_pcap_file(path)) {
      if (auto f = decode_frame(raw.bytes, raw.timestamp, raw.orig_len)) frames.push_back(std::move(*f));
    }
  }
  return demux_by_device(frames, manifest);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  return out;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ModelFormat, path + ": " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<LabeledSlot> label_rows(const std::vector<SlotFeatureVector>& rows,
                                    const DeviceManifest& manifest, std::int64_t width) {
  std::vector<LabeledSlot> out;
  bool other_width = false;
  for (const auto& row : rows) {
    if (row.width_seconds != width) {
      other_width = true;
      continue;
    }
    if (const auto* e = manifest.find(row.device_key)) out.push_back({row, e->label});
  }
  if (out.empty() && other_width)
    throw Error(ErrorKind::WidthMismatch,
                "feature file holds no slots of width " + std::to_string(width) + " s");
  return out;
}

// ---- extract --------------------------------------------------------------

struct ExtractArgs {
  InputOptions input;
  std::int64_t width = 0;
  std::string out;
};

void run_extract(const ExtractArgs& a) {
  auto manifest = read_manifest_file(a.input.manifest);
  auto traces = load_traces(a.input, manifest);
  std::vector<SlotFeatureVector> rows;
  for (const auto& t : traces) {
    auto r = extract_trace_features(t, SlotConfig{a.width, std::nullopt});
    rows.insert(rows.end(), r.begin(), r.end());
  }
  auto out = open_out(a.out);
  write_feature_csv(out, rows);
}

// ---- train-traffic --------------------------------------------------------

struct TrainTrafficArgs {
  std::string features;
  std::string manifest;
  std::int64_t width = 0;
  bool select = false;
  std::string feature_set;
  double alpha = 0.01;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  double screen_threshold = 0.5;
  double lambda = 1.0;
  std::size_t max_per_device = 100;
  std::string report;
  std::string out;
};

void run_train_traffic(const TrainTrafficArgs& a) {
  if (a.select == !a.feature_set.empty())
    throw UsageError("exactly one of --select or --feature-set is required");
  auto manifest = read_manifest_file(a.manifest);
  std::ifstream in(a.features);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + a.features);
  auto slots = label_rows(read_feature_csv(in), manifest, a.width);

  LinearTrainOptions train;
  train.logreg.lambda = a.lambda;
  train.logreg.seed = a.seed;
  train.max_per_device = a.max_per_device;

  std::vector<FeatureId> features;
  if (a.select) {
    SelectionConfig cfg;
    cfg.k = a.k;
    cfg.alpha = a.alpha;
    cfg.screen_threshold = a.screen_threshold;
    cfg.seed = a.seed;
    cfg.slot_width = a.width;
    cfg.training = train;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    auto result = greedy_select(all_features(), slots, cfg);
    features = result.selected;
    if (!a.report.empty()) open_out(a.report) << to_json(result).dump(2) << '\n';
  } else {
    for (const auto& name : split_list(a.feature_set)) {
      auto id = parse_feature(name);
      if (!id) throw Error(ErrorKind::UnknownFeature, name);
      features.push_back(*id);
    }
  }
  auto model = train_linear_model(slots, features, a.width, train);
  open_out(a.out) << to_json(model).dump(2) << '\n';
}

// ---- train-dhcp -----------------------------------------------------------

struct TrainDhcpArgs {
  InputOptions input;
  int max_depth = 5;
  std::string out;
};

void run_train_dhcp(const TrainDhcpArgs& a) {
  auto manifest = read_manifest_file(a.input.manifest);
  auto traces = load_traces(a.input, manifest);
  std::vector<LabelSet> sets;
  std::vector<DeviceClass> y;
  for (const auto& t : traces) {
    if (auto labels = device_dhcp_labels(t.records)) {
      sets.push_back(std::move(*labels));
      y.push_back(t.label);
    }
  }
  TreeOptions opts;
  opts.max_depth = a.max_depth;
  auto model = train_dhcp_classifier(sets, y, opts);
  open_out(a.out) << to_json(model).dump(2) << '\n';
}

// ---- predict --------------------------------------------------------------

struct PredictArgs {
  std::vector<std::string> models;
  bool unified = false;
  InputOptions input;
  std::string features;
  std::optional<std::int64_t> width;
  std::string out;
};

struct LoadedModels {
  std::vector<LinearModel> linear;
  std::optional<DhcpSignatureModel> dhcp;
};

LoadedModels load_models(const std::vector<std::string>& paths) {
  LoadedModels m;
  for (const auto& path : paths) {
    auto j = read_json_file(path);
    std::string kind = j.is_object() ? j.value("kind", "") : "";
    if (kind == "linear") {
      m.linear.push_back(linear_model_from_json(j));
    } else if (kind == "dhcp_tree") {
      if (m.dhcp) throw UsageError("at most one DHCP model may be given");
      m.dhcp = dhcp_model_from_json(j);
    } else {
      throw Error(ErrorKind::ModelFormat, path + ": unknown model kind");
    }
  }
  return m;
}

nlohmann::ordered_json slot_line(const SlotFeatureVector& row, const Prediction& p) {
  nlohmann::ordered_json j;
  j["device"] = row.device_key;
  j["window_start"] = row.slot_start.micros / 1'000'000;
  j["width"] = row.width_seconds;
  j["score"] = p.score;
  j["verdict"] = to_string(p.verdict);
  return j;
}

void predict_linear(const PredictArgs& a, const LinearModel& model, std::ostream& out) {
  if (a.width && *a.width != model.slot_width)
    throw Error(ErrorKind::WidthMismatch, "requested width " + std::to_string(*a.width) +
                                              " s does not match model width " +
                                              std::to_string(model.slot_width) + " s");
  if (!a.features.empty()) {
    std::ifstream in(a.features);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + a.features);
    for (const auto& row : read_feature_csv(in)) out << slot_line(row, predict(model, row)).dump() << '\n';
    return;
  }
  auto manifest = read_manifest_file(a.input.manifest);
  for (const auto& t : load_traces(a.input, manifest)) {
    for (const auto& row : extract_trace_features(t, SlotConfig{model.slot_width, std::nullopt}))
      out << slot_line(row, predict(model, row)).dump() << '\n';
  }
}

void predict_dhcp(const PredictArgs& a, const DhcpSignatureModel& model, std::ostream& out) {
  auto manifest = read_manifest_file(a.input.manifest);
  for (const auto& t : load_traces(a.input, manifest)) {
    nlohmann::ordered_json j;
    j["device"] = t.device_key;
    j["verdict"] = to_string(predict_device(model, device_dhcp_labels(t.records)));
    out << j.dump() << '\n';
  }
}

void predict_unified(const PredictArgs& a, const LoadedModels& models, std::ostream& out) {
  std::map<std::int64_t, const LinearModel*> by_width;
  for (const auto& m : models.linear) by_width[m.slot_width] = &m;
  UnifiedModels um;
  auto pick = [&](std::int64_t w) -> const LinearModel* {
    auto it = by_width.find(w);
    if (it == by_width.end() || models.linear.size() != 3)
      throw Error(ErrorKind::ModelWidthMismatch,
                  "unified prediction needs exactly three linear models of widths 300/600/1200 s");
    return it->second;
  };
  um.m5 = pick(300);
  um.m10 = pick(600);
  um.m20 = pick(kUnifiedWindow);
  if (models.dhcp) um.dhcp = &*models.dhcp;

  auto manifest = read_manifest_file(a.input.manifest);
  const std::int64_t window = kUnifiedWindow * 1'000'000;
  for (const auto& t : load_traces(a.input, manifest)) {
    for (const auto& slot : slice_slots(t.records, SlotConfig{kUnifiedWindow, std::nullopt})) {
      Timestamp end{slot.start.micros + window};
      auto labels = device_dhcp_labels(t.records, end);
      auto rec = unified_predict(slot.records, slot.start, um, labels);
      nlohmann::ordered_json j;
      j["device"] = t.device_key;
      j["window_start"] = slot.start.micros / 1'000'000;
      auto body = to_json(rec);
      j["votes"] = body["votes"];
      j["verdict"] = body["verdict"];
      out << j.dump() << '\n';
    }
  }
}

void run_predict(const PredictArgs& a) {
  std::vector<std::string> paths;
  for (const auto& m : a.models) {
    auto parts = split_list(m);
    paths.insert(paths.end(), parts.begin(), parts.end());
  }
  if (paths.empty()) throw UsageError("--model is required");
  auto models = load_models(paths);
  auto out = open_out(a.out);
  if (a.unified) {
    predict_unified(a, models, out);
    return;
  }
  if (paths.size() != 1) throw UsageError("several models given without --unified");
  if (models.dhcp) predict_dhcp(a, *models.dhcp, out);
  else predict_linear(a, models.linear.front(), out);
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string verdicts;
  std::string manifest;
  std::string out;
  std::string cdf_csv;
};

void run_evaluate(const EvaluateArgs& a) {
  auto manifest = read_manifest_file(a.manifest);
  std::ifstream in(a.verdicts);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + a.verdicts);
  std::vector<DevicePrediction> preds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = "verdicts line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::SchemaError, where + e.what());
    }
    if (!j.is_object() || !j.contains("device") || !j.contains("verdict") ||
        !j["device"].is_string() || !j["verdict"].is_string())
      throw Error(ErrorKind::SchemaError, where + "expected string keys 'device' and 'verdict'");
    auto verdict = parse_verdict(j["verdict"].get<std::string>());
    if (!verdict) throw Error(ErrorKind::SchemaError, where + "unknown verdict");
    std::string device = j["device"].get<std::string>();
    if (auto mac = parse_mac(device)) device = format_mac(*mac);
    const auto* entry = manifest.find(device);
    if (!entry) throw Error(ErrorKind::SchemaError, where + "device " + device + " not in manifest");
    preds.push_back({device, entry->label, *verdict});
  }
  if (preds.empty()) throw Error(ErrorKind::SchemaError, "no verdicts in " + a.verdicts);
  auto report = evaluate(preds);
  open_out(a.out) << to_json(report).dump(2) << '\n';
  if (!a.cdf_csv.empty()) {
    auto csv = open_out(a.cdf_csv);
    csv << "rate,fraction\n";
    char buf[80];
    for (const auto& p : report.success.cdf) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.rate, p.fraction);
      csv << buf;
    }
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"IoT / NoT device classification from packet captures", "iotsense"};
  app.require_subcommand(1);

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "dump per-slot traffic features as CSV");
  add_input_options(c_extract, extract.input);
  c_extract->add_option("--width", extract.width, "slot width in seconds")->required()->check(CLI::PositiveNumber);
  c_extract->add_option("--out", extract.out, "output CSV")->required();

  TrainTrafficArgs traffic;
  auto* c_traffic = app.add_subcommand("train-traffic", "train the traffic-feature classifier");
  c_traffic->add_option("--features", traffic.features, "feature CSV from `extract`")->required();
  c_traffic->add_option("--manifest", traffic.manifest)->required();
  c_traffic->add_option("--width", traffic.width)->required()->check(CLI::PositiveNumber);
  c_traffic->add_flag("--select", traffic.select, "run screening and greedy selection");
  c_traffic->add_option("--feature-set", traffic.feature_set, "comma-separated feature names");
  c_traffic->add_option("--alpha", traffic.alpha, "relative-gain threshold")->capture_default_str();
  c_traffic->add_option("--k", traffic.k, "cross-validation folds")->capture_default_str();
  c_traffic->add_option("--seed", traffic.seed, "fold shuffle seed")->capture_default_str();
  c_traffic->add_option("--screen-threshold", traffic.screen_threshold, "single-feature F1 cut")->capture_default_str();
  c_traffic->add_option("--lambda", traffic.lambda, "L2 penalty")->capture_default_str();
  c_traffic->add_option("--max-per-device", traffic.max_per_device, "slots kept per device")->capture_default_str();
  c_traffic->add_option("--report", traffic.report, "selection report JSON");
  c_traffic->add_option("--out", traffic.out, "model JSON")->required();

  TrainDhcpArgs dhcp;
  auto* c_dhcp = app.add_subcommand("train-dhcp", "train the DHCP decision tree");
  add_input_options(c_dhcp, dhcp.input);
  c_dhcp->add_option("--max-depth", dhcp.max_depth, "tree height bound")->capture_default_str();
  c_dhcp->add_option("--out", dhcp.out, "model JSON")->required();

  PredictArgs predict;
  std::int64_t predict_width = 0;
  auto* c_predict = app.add_subcommand("predict", "classify slots, devices or 20-minute windows");
  c_predict->add_option("--model", predict.models, "model JSON file(s), comma-separated")->required();
  c_predict->add_flag("--unified", predict.unified, "combine 5/10/20-minute and DHCP models");
  c_predict->add_option("--pcap", predict.input.pcaps);
  c_predict->add_option("--events", predict.input.events);
  c_predict->add_option("--features", predict.features, "feature CSV (linear models only)");
  c_predict->add_option("--manifest", predict.input.manifest);
  auto* width_opt = c_predict->add_option("--width", predict_width, "expected slot width");
  c_predict->add_option("--out", predict.out, "verdicts (JSON lines)")->required();

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "score verdicts against the manifest");
  c_eval->add_option("--verdicts", eval.verdicts)->required();
  c_eval->add_option("--manifest", eval.manifest)->required();
  c_eval->add_option("--out", eval.out, "report JSON")->required();
  c_eval->add_option("--cdf-csv", eval.cdf_csv, "per-device success CDF as CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (c_extract->parsed()) run_extract(extract);
    if (c_traffic->parsed()) run_train_traffic(traffic);
    if (c_dhcp->parsed()) run_train_dhcp(dhcp);
    if (c_predict->parsed()) {
      if (width_opt->count() > 0) predict.width = predict_width;
      bool has_traces = !predict.input.pcaps.empty() || !predict.input.events.empty();
      if (predict.features.empty() && predict.input.manifest.empty())
        throw UsageError("--manifest is required with --pcap/--events");
      if (!predict.features.empty() && has_traces)
        throw UsageError("--features cannot be combined with --pcap/--events");
      run_predict(predict);
    }
    if (c_eval->parsed()) run_evaluate(eval);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace iotsense
