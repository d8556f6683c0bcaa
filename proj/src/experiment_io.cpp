#include "lcl/experiment_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "lcl/error.hpp"
#include "lcl/losses.hpp"
#include "lcl/rng.hpp"

namespace lcl {

const char* const kToolVersion = "0.1.0";

using nlohmann::json;

std::string to_token(LossKind kind) {
  switch (kind) {
    case LossKind::kJoint: return "joint";
    case LossKind::kTask: return "task";
    case LossKind::kInverseSupervised: return "inverse";
    case LossKind::kDistalTeacher: return "distal";
  }
  throw Error("unreachable loss kind");
}

std::string to_token(PlantKind kind) {
  switch (kind) {
    case PlantKind::kPendulum: return "pendulum";
    case PlantKind::kArm: return "arm";
    case PlantKind::kHopper: return "hopper";
  }
  throw Error("unreachable plant kind");
}

std::string to_token(TaskSpace space) {
  switch (space) {
    case TaskSpace::kJoint: return "joint";
    case TaskSpace::kEndEffector: return "ee";
    case TaskSpace::kHopperHeight: return "hopper_height";
  }
  throw Error("unreachable task space");
}

std::string to_token(Activation activation) {
  switch (activation) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  throw Error("unreachable activation");
}

LossKind loss_from_token(const std::string& token) {
  if (token == "joint") return LossKind::kJoint;
  if (token == "task") return LossKind::kTask;
  if (token == "inverse") return LossKind::kInverseSupervised;
  if (token == "distal") return LossKind::kDistalTeacher;
  throw ConfigError("unknown loss '" + token + "' (expected joint, task, inverse, or distal)");
}

PlantKind plant_from_token(const std::string& token) {
  if (token == "pendulum") return PlantKind::kPendulum;
  if (token == "arm") return PlantKind::kArm;
  if (token == "hopper") return PlantKind::kHopper;
  throw ConfigError("unknown plant '" + token + "' (expected pendulum, arm, or hopper)");
}

TaskSpace space_from_token(const std::string& token) {
  if (token == "joint") return TaskSpace::kJoint;
  if (token == "ee") return TaskSpace::kEndEffector;
  if (token == "hopper_height") return TaskSpace::kHopperHeight;
  throw ConfigError("unknown task space '" + token +
                    "' (expected joint, ee, or hopper_height)");
}

Activation activation_from_token(const std::string& token) {
  if (token == "relu") return Activation::kRelu;
  if (token == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + token + "' (expected relu or tanh)");
}

namespace {

std::string join_path(const std::string& prefix, const char* key) {
  return prefix.empty() ? std::string(key) : prefix + "." + key;
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError("'" + path + "' must be an object");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key '" + join_path(path, item.key().c_str()) + "'");
  }
}

double get_double(const json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("'" + join_path(path, key) + "' must be a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, const std::string& path, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("'" + join_path(path, key) + "' must be an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const json& j, const char* key, const std::string& path,
                      std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError("'" + join_path(path, key) + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const char* key, const std::string& path,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError("'" + join_path(path, key) + "' must be a string");
  return v.get<std::string>();
}

std::vector<int> get_int_list(const json& j, const char* key, const std::string& path,
                              std::vector<int> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError("'" + join_path(path, key) + "' must be an array");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer() || e.get<int>() < 1) {
      throw ConfigError("'" + join_path(path, key) + "' entries must be positive integers");
    }
    out.push_back(e.get<int>());
  }
  return out;
}

OptimSettings parse_optim(const json& j, const std::string& path, const OptimSettings& fallback) {
  expect_object(j, path);
  check_keys(j, path, {"lr", "epochs", "batch"});
  OptimSettings out;
  out.lr = get_double(j, "lr", path, fallback.lr);
  out.epochs = get_int(j, "epochs", path, fallback.epochs);
  out.batch = get_int(j, "batch", path, fallback.batch);
  return out;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  expect_object(j, "config");
  check_keys(j, "", {"plant", "task", "loss", "networks", "optimizer", "loop", "gains", "seed"});
  ExperimentConfig c;

  if (j.contains("plant")) {
    const json& p = j.at("plant");
    expect_object(p, "plant");
    check_keys(p, "plant", {"kind", "arm_links"});
    c.plant = plant_from_token(get_string(p, "kind", "plant", to_token(c.plant)));
    c.arm_links = get_int(p, "arm_links", "plant", c.arm_links);
  }
  // Unless named, each plant gets its native space, and the hopper a
  // duration long enough for the default hop cycle.
  c.space = c.plant == PlantKind::kHopper ? TaskSpace::kHopperHeight : TaskSpace::kJoint;
  if (c.plant == PlantKind::kHopper) c.duration = 3.0;
  if (j.contains("task")) {
    const json& t = j.at("task");
    expect_object(t, "task");
    check_keys(t, "task", {"space", "target_id", "duration"});
    c.space = space_from_token(get_string(t, "space", "task", to_token(c.space)));
    c.target_id = get_int(t, "target_id", "task", c.target_id);
    c.duration = get_double(t, "duration", "task", c.duration);
  }
  if (j.contains("loss")) {
    if (!j.at("loss").is_string()) throw ConfigError("'loss' must be a string");
    c.loss = loss_from_token(j.at("loss").get<std::string>());
  }
  if (j.contains("networks")) {
    const json& n = j.at("networks");
    expect_object(n, "networks");
    check_keys(n, "networks", {"f_hidden", "g_hidden", "ensemble_members", "activation"});
    c.f_hidden = get_int_list(n, "f_hidden", "networks", c.f_hidden);
    c.g_hidden = get_int_list(n, "g_hidden", "networks", c.g_hidden);
    c.ensemble_members = get_int(n, "ensemble_members", "networks", c.ensemble_members);
    c.activation =
        activation_from_token(get_string(n, "activation", "networks", to_token(c.activation)));
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    expect_object(o, "optimizer");
    check_keys(o, "optimizer", {"pretrain_epochs", "f", "g"});
    c.pretrain_epochs = get_int(o, "pretrain_epochs", "optimizer", c.pretrain_epochs);
    if (o.contains("f")) c.f_opt = parse_optim(o.at("f"), "optimizer.f", c.f_opt);
    if (o.contains("g")) c.g_opt = parse_optim(o.at("g"), "optimizer.g", c.g_opt);
  }
  if (j.contains("loop")) {
    const json& l = j.at("loop");
    expect_object(l, "loop");
    check_keys(l, "loop", {"iterations", "babble_steps", "horizon"});
    c.iterations = get_int(l, "iterations", "loop", c.iterations);
    c.babble_steps = get_int(l, "babble_steps", "loop", c.babble_steps);
    c.horizon = get_int(l, "horizon", "loop", c.horizon);
  }
  if (j.contains("gains")) {
    const json& g = j.at("gains");
    expect_object(g, "gains");
    check_keys(g, "gains", {"kp", "kd"});
    c.gains.kp = get_double(g, "kp", "gains", c.gains.kp);
    c.gains.kd = get_double(g, "kd", "gains", c.gains.kd);
  }
  c.seed = get_u64(j, "seed", "", c.seed);
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["plant"] = {{"kind", to_token(c.plant)}, {"arm_links", c.arm_links}};
  j["task"] = {{"space", to_token(c.space)},
               {"target_id", c.target_id},
               {"duration", c.duration}};
  j["loss"] = to_token(c.loss);
  j["networks"] = {{"f_hidden", c.f_hidden},
                   {"g_hidden", c.g_hidden},
                   {"ensemble_members", c.ensemble_members},
                   {"activation", to_token(c.activation)}};
  j["optimizer"] = {
      {"pretrain_epochs", c.pretrain_epochs},
      {"f", {{"lr", c.f_opt.lr}, {"epochs", c.f_opt.epochs}, {"batch", c.f_opt.batch}}},
      {"g", {{"lr", c.g_opt.lr}, {"epochs", c.g_opt.epochs}, {"batch", c.g_opt.batch}}}};
  j["loop"] = {{"iterations", c.iterations},
               {"babble_steps", c.babble_steps},
               {"horizon", c.horizon}};
  j["gains"] = {{"kp", c.gains.kp}, {"kd", c.gains.kd}};
  j["seed"] = c.seed;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::string run_id(const ExperimentConfig& config) {
  // FNV-1a, 64-bit, with a house offset so ids change if the scheme does.
  const std::string canon = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull ^ 0x6c636c616230312full;
  for (const char ch : canon) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace {

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed ") + what + " '" + path + "': " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

}  // namespace

void write_manifest(const RunManifest& manifest, const std::string& path) {
  json j;
  j["run_id"] = manifest.id;
  j["tool_version"] = manifest.tool_version;
  j["started_at"] = manifest.started_at;
  j["config"] = manifest.config;
  write_text_file(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  const json j = load_json_file(path, "manifest");
  RunManifest m;
  try {
    m.id = j.at("run_id").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.config = j.at("config");
  } catch (const json::exception& e) {
    throw IoError("manifest '" + path + "' is missing fields: " + e.what());
  }
  return m;
}

const char* const kMetricsCsvHeader =
    "run_id,iteration,loss_kind,plant,task_id,seed,tracking_mse,fwd_pred_mse,pred_task_err,"
    "force_track_mse,ctrl_loss_final,fwd_loss_final,diverged,wall_time_s";

void write_metrics_csv(const std::vector<IterationReport>& reports,
                       const ExperimentConfig& config, const std::string& id,
                       const std::string& path) {
  std::ostringstream out;
  out << kMetricsCsvHeader << "\n";
  for (const IterationReport& r : reports) {
    out << id << ',' << r.iteration << ',' << to_token(r.loss_kind) << ','
        << to_token(config.plant) << ',' << config.target_id << ',' << config.seed << ','
        << fmt17(r.tracking_mse) << ',' << fmt17(r.fwd_pred_mse) << ','
        << fmt17(r.pred_task_err) << ','
        << (r.force_track_mse ? fmt17(*r.force_track_mse) : std::string()) << ','
        << fmt17(r.ctrl_loss_final) << ',' << fmt17(r.fwd_loss_final) << ','
        << (r.diverged ? 1 : 0) << ',' << fmt17(r.wall_time_s) << "\n";
  }
  write_text_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw IoError("bad numeric cell '" + cell + "' in '" + path + "'");
  }
  return v;
}

long parse_long(const std::string& cell, const std::string& path) {
  char* end = nullptr;
  const long v = std::strtol(cell.c_str(), &end, 10);
  if (end == cell.c_str() || *end != '\0') {
    throw IoError("bad integer cell '" + cell + "' in '" + path + "'");
  }
  return v;
}

}  // namespace

std::vector<IterationReport> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsCsvHeader) {
    throw IoError("metrics file '" + path + "' does not start with the expected header");
  }
  std::vector<IterationReport> reports;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 14) {
      throw IoError("metrics row with " + std::to_string(cells.size()) + " cells in '" + path +
                    "'");
    }
    IterationReport r;
    r.iteration = static_cast<int>(parse_long(cells[1], path));
    r.loss_kind = loss_from_token(cells[2]);
    r.tracking_mse = parse_double(cells[6], path);
    r.fwd_pred_mse = parse_double(cells[7], path);
    r.pred_task_err = parse_double(cells[8], path);
    if (!cells[9].empty()) r.force_track_mse = parse_double(cells[9], path);
    r.ctrl_loss_final = parse_double(cells[10], path);
    r.fwd_loss_final = parse_double(cells[11], path);
    r.diverged = parse_long(cells[12], path) != 0;
    r.wall_time_s = parse_double(cells[13], path);
    reports.push_back(std::move(r));
  }
  return reports;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ostringstream out;
  Eigen::Index sdim = 0, adim = 0, gdim = 0;
  if (!data.empty()) {
    sdim = data.transitions[0].s.size();
    adim = data.transitions[0].tau_run.size();
    gdim = data.transitions[0].s_desired.size();
  }
  out << "iteration,loss_kind,source,synthetic_desired,t_index";
  for (Eigen::Index k = 0; k < sdim; ++k) out << ",s" << k;
  for (Eigen::Index k = 0; k < adim; ++k) out << ",tau" << k;
  for (Eigen::Index k = 0; k < sdim; ++k) out << ",snext" << k;
  for (Eigen::Index k = 0; k < gdim; ++k) out << ",sdes" << k;
  out << "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Transition& t = data.transitions[static_cast<std::size_t>(i)];
    const Provenance& p = data.provenance[static_cast<std::size_t>(i)];
    if (t.s.size() != sdim || t.tau_run.size() != adim || t.s_next.size() != sdim ||
        t.s_desired.size() != gdim) {
      throw IoError("dataset rows disagree on dimensions; cannot serialize");
    }
    out << p.iteration << ',' << to_token(p.loss) << ','
        << (p.source == DataSource::kBabble ? "babble" : "rollout") << ','
        << (p.synthetic_desired ? 1 : 0) << ',' << t.t_index;
    for (Eigen::Index k = 0; k < sdim; ++k) out << ',' << fmt17(t.s[k]);
    for (Eigen::Index k = 0; k < adim; ++k) out << ',' << fmt17(t.tau_run[k]);
    for (Eigen::Index k = 0; k < sdim; ++k) out << ',' << fmt17(t.s_next[k]);
    for (Eigen::Index k = 0; k < gdim; ++k) out << ',' << fmt17(t.s_desired[k]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

namespace {

// Columns of one block are contiguous and numbered from zero.
Eigen::Index count_prefixed(const std::vector<std::string>& cells, std::size_t start,
                            const char* prefix) {
  Eigen::Index n = 0;
  for (std::size_t i = start; i < cells.size(); ++i) {
    if (cells[i] != std::string(prefix) + std::to_string(n)) break;
    ++n;
  }
  return n;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset file '" + path + "' is empty");
  const std::vector<std::string> head = split_csv_line(line);
  const std::vector<std::string> fixed = {"iteration", "loss_kind", "source",
                                          "synthetic_desired", "t_index"};
  if (head.size() < fixed.size()) throw IoError("dataset header too short in '" + path + "'");
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    if (head[k] != fixed[k]) {
      throw IoError("dataset header mismatch at column '" + head[k] + "' in '" + path + "'");
    }
  }
  std::size_t at = fixed.size();
  const Eigen::Index sdim = count_prefixed(head, at, "s");
  at += static_cast<std::size_t>(sdim);
  const Eigen::Index adim = count_prefixed(head, at, "tau");
  at += static_cast<std::size_t>(adim);
  const Eigen::Index ndim = count_prefixed(head, at, "snext");
  at += static_cast<std::size_t>(ndim);
  const Eigen::Index gdim = count_prefixed(head, at, "sdes");
  at += static_cast<std::size_t>(gdim);
  if (ndim != sdim || at != head.size()) {
    throw IoError("dataset header blocks are inconsistent in '" + path + "'");
  }

  Dataset data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != head.size()) {
      throw IoError("dataset row width mismatch in '" + path + "'");
    }
    Provenance p;
    p.iteration = static_cast<int>(parse_long(cells[0], path));
    p.loss = loss_from_token(cells[1]);
    if (cells[2] == "babble") {
      p.source = DataSource::kBabble;
    } else if (cells[2] == "rollout") {
      p.source = DataSource::kRollout;
    } else {
      throw IoError("unknown data source '" + cells[2] + "' in '" + path + "'");
    }
    p.synthetic_desired = parse_long(cells[3], path) != 0;

    Transition t;
    t.t_index = static_cast<int>(parse_long(cells[4], path));
    std::size_t c = 5;
    t.s.resize(sdim);
    for (Eigen::Index k = 0; k < sdim; ++k) t.s[k] = parse_double(cells[c++], path);
    t.tau_run.resize(adim);
    for (Eigen::Index k = 0; k < adim; ++k) t.tau_run[k] = parse_double(cells[c++], path);
    t.s_next.resize(sdim);
    for (Eigen::Index k = 0; k < sdim; ++k) t.s_next[k] = parse_double(cells[c++], path);
    t.s_desired.resize(gdim);
    for (Eigen::Index k = 0; k < gdim; ++k) t.s_desired[k] = parse_double(cells[c++], path);
    data.append(std::move(t), p);
  }
  return data;
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json ivec_to_json(const Eigen::VectorXi& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a, const char* what) {
  if (!a.is_array()) throw IoError(std::string("checkpoint field '") + what + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (const json& e : a) {
    if (!e.is_number()) {
      throw IoError(std::string("checkpoint field '") + what + "' holds a non-number");
    }
    v[i++] = e.get<double>();
  }
  return v;
}

Eigen::VectorXi ivec_from_json(const json& a, const char* what) {
  if (!a.is_array()) throw IoError(std::string("checkpoint field '") + what + "' must be an array");
  Eigen::VectorXi v(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (const json& e : a) {
    if (!e.is_number_integer()) {
      throw IoError(std::string("checkpoint field '") + what + "' holds a non-integer");
    }
    v[i++] = e.get<int>();
  }
  return v;
}

}  // namespace

void write_checkpoint(const ParamStore& store, const EnsembleForwardModel& f,
                      const ControllerModel& g, const Normalizer& norm,
                      const ExperimentConfig& config, int iteration, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["tool_version"] = kToolVersion;
  j["iteration"] = iteration;
  j["config"] = config_to_json(config);
  j["forward"] = {{"sizes", f.member_spec.sizes},
                  {"activation", to_token(f.member_spec.activation)},
                  {"segments", f.segments},
                  {"state_dim", f.state_dim},
                  {"action_dim", f.action_dim},
                  {"logvar_min", f.logvar_min},
                  {"logvar_max", f.logvar_max}};
  j["controller"] = {{"sizes", g.spec.sizes},
                     {"activation", to_token(g.spec.activation)},
                     {"segment", g.segment},
                     {"state_dim", g.state_dim},
                     {"task_dims", ivec_to_json(g.task_dims)},
                     {"torque_limit", vec_to_json(g.torque_limit)}};
  j["normalizer"] = {{"s_mean", vec_to_json(norm.s_mean)}, {"s_std", vec_to_json(norm.s_std)},
                     {"a_mean", vec_to_json(norm.a_mean)}, {"a_std", vec_to_json(norm.a_std)},
                     {"d_mean", vec_to_json(norm.d_mean)}, {"d_std", vec_to_json(norm.d_std)}};
  json segs = json::array();
  for (int id = 0; id < store.segment_count(); ++id) {
    const ParamStore::Segment& s = store.segment(id);
    segs.push_back({{"name", s.name}, {"size", s.size}});
  }
  j["segments"] = std::move(segs);
  j["params"] = vec_to_json(store.values());
  write_text_file(path, j.dump() + "\n");
}

Checkpoint read_checkpoint(const std::string& path) {
  const json j = load_json_file(path, "checkpoint");
  Checkpoint ck;
  try {
    ck.format_version = j.at("format_version").get<int>();
    if (ck.format_version != 1) {
      throw IoError("checkpoint '" + path + "' has unsupported format_version " +
                    std::to_string(ck.format_version));
    }
    ck.iteration = j.at("iteration").get<int>();
    ck.config = config_from_json(j.at("config"));

    const json& fw = j.at("forward");
    ck.f.member_spec.sizes = fw.at("sizes").get<std::vector<int>>();
    ck.f.member_spec.activation = activation_from_token(fw.at("activation").get<std::string>());
    ck.f.segments = fw.at("segments").get<std::vector<int>>();
    ck.f.state_dim = fw.at("state_dim").get<int>();
    ck.f.action_dim = fw.at("action_dim").get<int>();
    ck.f.logvar_min = fw.at("logvar_min").get<double>();
    ck.f.logvar_max = fw.at("logvar_max").get<double>();
    ck.f.member_spec.validate();

    const json& ct = j.at("controller");
    ck.g.spec.sizes = ct.at("sizes").get<std::vector<int>>();
    ck.g.spec.activation = activation_from_token(ct.at("activation").get<std::string>());
    ck.g.segment = ct.at("segment").get<int>();
    ck.g.state_dim = ct.at("state_dim").get<int>();
    ck.g.task_dims = ivec_from_json(ct.at("task_dims"), "controller.task_dims");
    ck.g.torque_limit = vec_from_json(ct.at("torque_limit"), "controller.torque_limit");
    ck.g.spec.validate();

    const json& nm = j.at("normalizer");
    ck.norm.s_mean = vec_from_json(nm.at("s_mean"), "normalizer.s_mean");
    ck.norm.s_std = vec_from_json(nm.at("s_std"), "normalizer.s_std");
    ck.norm.a_mean = vec_from_json(nm.at("a_mean"), "normalizer.a_mean");
    ck.norm.a_std = vec_from_json(nm.at("a_std"), "normalizer.a_std");
    ck.norm.d_mean = vec_from_json(nm.at("d_mean"), "normalizer.d_mean");
    ck.norm.d_std = vec_from_json(nm.at("d_std"), "normalizer.d_std");

    for (const json& s : j.at("segments")) {
      ck.store.add_segment(s.at("name").get<std::string>(), s.at("size").get<Eigen::Index>());
    }
    const Eigen::VectorXd params = vec_from_json(j.at("params"), "params");
    if (params.size() != ck.store.size()) {
      throw IoError("checkpoint '" + path + "' parameter count disagrees with its segments");
    }
    ck.store.values() = params;
  } catch (const json::exception& e) {
    throw IoError("checkpoint '" + path + "' is missing fields: " + e.what());
  }

  for (const int id : ck.f.segments) {
    if (id < 0 || id >= ck.store.segment_count() ||
        ck.store.segment(id).size != ck.f.member_spec.param_count()) {
      throw IoError("checkpoint '" + path + "' forward segments disagree with the layout");
    }
  }
  if (ck.g.segment < 0 || ck.g.segment >= ck.store.segment_count() ||
      ck.store.segment(ck.g.segment).size != ck.g.spec.param_count()) {
    throw IoError("checkpoint '" + path + "' controller segment disagrees with the layout");
  }
  return ck;
}

std::vector<GradCheckCase> gradcheck_experiment_losses(double step, double tol) {
  std::vector<ExperimentConfig> plants;
  {
    ExperimentConfig c;
    c.plant = PlantKind::kPendulum;
    c.space = TaskSpace::kJoint;
    plants.push_back(c);
  }
  {
    ExperimentConfig c;
    c.plant = PlantKind::kArm;
    c.arm_links = 3;
    c.space = TaskSpace::kEndEffector;
    plants.push_back(c);
  }
  {
    ExperimentConfig c;
    c.plant = PlantKind::kHopper;
    c.space = TaskSpace::kHopperHeight;
    c.duration = 3.0;
    plants.push_back(c);
  }

  std::vector<GradCheckCase> out;
  for (const ExperimentConfig& config : plants) {
    const PlantSpec plant = config.make_plant();
    const TrajectorySpec traj =
        make_target(plant, config.space, config.target_id, config.duration);
    const TaskSetup setup = make_task_setup(plant, traj);
    const Dataset data =
        motor_babble(setup, 10, mix_seed(config.seed, 0x6c0de), config.gains);
    const LossBatch batch = to_batch(data);

    Eigen::MatrixXd states(setup.obs_dim(), data.size());
    Eigen::MatrixXd actions(plant.dof(), data.size());
    Eigen::MatrixXd deltas(setup.obs_dim(), data.size());
    for (Eigen::Index c = 0; c < data.size(); ++c) {
      const Transition& t = data.transitions[static_cast<std::size_t>(c)];
      states.col(c) = t.s;
      actions.col(c) = t.tau_run;
      deltas.col(c) = t.s_next - t.s;
    }
    const Normalizer norm = Normalizer::fit(states, actions, deltas);

    ParamStore store;
    const EnsembleForwardModel f =
        init_ensemble(store, "f", setup.obs_dim(), plant.dof(), config.f_hidden,
                      config.ensemble_members, config.activation, mix_seed(config.seed, 0x9c));
    const ControllerModel g =
        init_controller(store, "g", setup.obs_dim(), setup.task_dims, plant.dof(),
                        config.g_hidden, config.activation, mix_seed(config.seed, 0x9d),
                        plant.torque_limit);
    const std::string prefix = to_token(config.plant) + "/";

    {
      std::vector<int> freeze;
      for (int id = 0; id < store.segment_count(); ++id) {
        if (id != f.segments[0]) freeze.push_back(id);
      }
      const FreezeGuard guard(store, freeze);
      const GraphFn fn = [&](Tape& tape, const ParamStore& params) {
        return forward_sup_loss(tape, params, f, 0, norm, batch);
      };
      out.push_back({prefix + "forward", grad_check(fn, store, step, tol)});
    }
    const std::vector<int> fsegs(f.segments.begin(), f.segments.end());
    for (const LossKind kind : {LossKind::kJoint, LossKind::kTask,
                                LossKind::kInverseSupervised, LossKind::kDistalTeacher}) {
      const FreezeGuard guard(store, fsegs);
      const GraphFn fn = [&, kind](Tape& tape, const ParamStore& params) {
        switch (kind) {
          case LossKind::kJoint: return joint_loss(tape, params, f, g, norm, batch);
          case LossKind::kTask: return task_loss(tape, params, f, g, norm, batch);
          case LossKind::kInverseSupervised: return inverse_sup_loss(tape, params, g, norm, batch);
          case LossKind::kDistalTeacher:
            return distal_teacher_loss(tape, params, f, g, norm, batch);
        }
        throw Error("unreachable loss kind");
      };
      out.push_back({prefix + to_token(kind), grad_check(fn, store, step, tol)});
    }
  }
  return out;
}

}  // namespace lcl
