// Copyright 2026 The demorl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "demorl/config/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "demorl/envs/factory.hpp"
#include "demorl/errors.hpp"

namespace demorl::config {
namespace {

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.is_null() ? 0 : mark.line + 1;
}

// ---------------------------------------------------------------------------
// Scalar conversion

template <class T>
T scalar_as(const YAML::Node& node, const std::string& path, const char* what) {
  if (!node.IsScalar()) throw ConfigError(path, line_of(node), std::string("expected ") + what);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, line_of(node), std::string("expected ") + what);
  }
}

void decode(const YAML::Node& n, const std::string& p, std::string& out) {
  out = scalar_as<std::string>(n, p, "a string");
}
void decode(const YAML::Node& n, const std::string& p, int& out) {
  out = scalar_as<int>(n, p, "an integer");
}
void decode(const YAML::Node& n, const std::string& p, std::uint64_t& out) {
  out = scalar_as<std::uint64_t>(n, p, "a non-negative integer");
}
void decode(const YAML::Node& n, const std::string& p, double& out) {
  out = scalar_as<double>(n, p, "a number");
}
void decode(const YAML::Node& n, const std::string& p, bool& out) {
  out = scalar_as<bool>(n, p, "true or false");
}
void decode(const YAML::Node& n, const std::string& p, std::optional<double>& out) {
  if (n.IsNull() || (n.IsScalar() && n.Scalar() == "auto")) {
    out.reset();
    return;
  }
  out = scalar_as<double>(n, p, "a number, null or auto");
}
template <class T>
void decode(const YAML::Node& n, const std::string& p, std::vector<T>& out) {
  if (!n.IsSequence()) throw ConfigError(p, line_of(n), "expected a list");
  out.clear();
  for (std::size_t i = 0; i < n.size(); ++i) {
    T v{};
    decode(n[i], p + "[" + std::to_string(i) + "]", v);
    out.push_back(v);
  }
}
void decode(const YAML::Node& n, const std::string& p, Vector& out) {
  std::vector<double> v;
  decode(n, p, v);
  out = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}
void decode(const YAML::Node& n, const std::string& p, envs::Vec2& out) {
  Vector v;
  decode(n, p, v);
  if (v.size() != 2) throw ConfigError(p, line_of(n), "expected a list of two numbers");
  out = v;
}
void decode(const YAML::Node& n, const std::string& p, Matrix& out) {
  if (!n.IsSequence() || n.size() == 0) {
    throw ConfigError(p, line_of(n), "expected a non-empty list of rows");
  }
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < n.size(); ++i) {
    Vector r;
    decode(n[i], p + "[" + std::to_string(i) + "]", r);
    if (!rows.empty() && r.size() != rows.front().size()) {
      throw ConfigError(p, line_of(n[i]), "rows have different lengths");
    }
    rows.push_back(r);
  }
  out.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i];
}

template <class E, class F>
void decode_enum(const YAML::Node& n, const std::string& p, E& out, F parse) {
  const auto s = scalar_as<std::string>(n, p, "a name");
  try {
    out = parse(s);
  } catch (const ParameterError& e) {
    throw ConfigError(p, line_of(n), e.what());
  }
}
void decode(const YAML::Node& n, const std::string& p, Mode& out) {
  decode_enum(n, p, out, [](const std::string& s) {
    if (s == "demorl") return Mode::kDemorl;
    if (s == "sac-baseline") return Mode::kSacBaseline;
    throw ParameterError("mode must be 'demorl' or 'sac-baseline'");
  });
}
void decode(const YAML::Node& n, const std::string& p, Activation& out) {
  decode_enum(n, p, out, [](const std::string& s) {
    try {
      return activation_from_string(s);
    } catch (const Error&) {
      throw ParameterError("activation must be 'tanh', 'relu' or 'linear'");
    }
  });
}
void decode(const YAML::Node& n, const std::string& p, dmdmpc::Aggregation& out) {
  decode_enum(n, p, out, [](const std::string& s) { return dmdmpc::aggregation_from_string(s); });
}
void decode(const YAML::Node& n, const std::string& p, regret::StepSchedule& out) {
  decode_enum(n, p, out, [](const std::string& s) { return regret::step_schedule_from_string(s); });
}

// ---------------------------------------------------------------------------
// Emission

void encode(YAML::Emitter& e, const std::string& v) { e << v; }
void encode(YAML::Emitter& e, int v) { e << v; }
void encode(YAML::Emitter& e, std::uint64_t v) { e << static_cast<unsigned long long>(v); }
void encode(YAML::Emitter& e, double v) { e << v; }
void encode(YAML::Emitter& e, bool v) { e << v; }
void encode(YAML::Emitter& e, const std::optional<double>& v) {
  if (v) e << *v; else e << YAML::Null;
}
template <class T>
void encode(YAML::Emitter& e, const std::vector<T>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (const T& x : v) encode(e, x);
  e << YAML::EndSeq;
}
void encode(YAML::Emitter& e, const Eigen::Ref<const Vector>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) e << v[i];
  e << YAML::EndSeq;
}
void encode(YAML::Emitter& e, const Vector& v) { encode(e, Eigen::Ref<const Vector>(v)); }
void encode(YAML::Emitter& e, const envs::Vec2& v) { encode(e, Eigen::Ref<const Vector>(Vector(v))); }
void encode(YAML::Emitter& e, const Matrix& m) {
  e << YAML::BeginSeq;
  for (Eigen::Index r = 0; r < m.rows(); ++r) encode(e, Vector(m.row(r).transpose()));
  e << YAML::EndSeq;
}
void encode(YAML::Emitter& e, Mode v) { e << std::string(to_string(v)); }
void encode(YAML::Emitter& e, Activation v) { e << std::string(to_string(v)); }
void encode(YAML::Emitter& e, dmdmpc::Aggregation v) { e << std::string(dmdmpc::to_string(v)); }
void encode(YAML::Emitter& e, regret::StepSchedule v) { e << std::string(regret::to_string(v)); }

// ---------------------------------------------------------------------------
// Visitors. `describe` lists every field once; the reader and the writer walk
// the same list.

class Reader {
 public:
  Reader(YAML::Node root, std::map<std::string, int>& lines) : lines_(lines) {
    stack_.push_back({std::move(root), "", {}});
  }

  template <class T>
  void field(const char* key, T& out) {
    Frame& f = stack_.back();
    f.seen.insert(key);
    if (!f.node.IsMap()) return;
    const YAML::Node child = f.node[key];
    if (!child.IsDefined()) return;
    const std::string path = f.prefix + key;
    lines_[path] = line_of(child);
    decode(child, path, out);
  }

  void section(const char* key, const std::function<void()>& body) {
    Frame& f = stack_.back();
    f.seen.insert(key);
    YAML::Node child = f.node.IsMap() ? f.node[key] : YAML::Node();
    const std::string path = f.prefix + key;
    if (child.IsDefined() && !child.IsNull() && !child.IsMap()) {
      throw ConfigError(path, line_of(child), "expected a mapping");
    }
    if (child.IsDefined()) lines_[path] = line_of(child);
    stack_.push_back({child, path + ".", {}});
    body();
    finish();
    stack_.pop_back();
  }

  void finish() {
    const Frame& f = stack_.back();
    if (!f.node.IsDefined() || !f.node.IsMap()) return;
    for (const auto& kv : f.node) {
      const auto key = kv.first.as<std::string>();
      if (!f.seen.count(key)) {
        throw ConfigError(f.prefix + key, line_of(kv.first), "unknown key");
      }
    }
  }

 private:
  struct Frame {
    YAML::Node node;
    std::string prefix;
    std::set<std::string> seen;
  };
  std::vector<Frame> stack_;
  std::map<std::string, int>& lines_;
};

class Writer {
 public:
  explicit Writer(YAML::Emitter& e) : e_(e) {}

  template <class T>
  void field(const char* key, const T& v) {
    e_ << YAML::Key << key << YAML::Value;
    encode(e_, v);
  }

  void section(const char* key, const std::function<void()>& body) {
    e_ << YAML::Key << key << YAML::Value << YAML::BeginMap;
    body();
    e_ << YAML::EndMap;
  }

 private:
  YAML::Emitter& e_;
};

template <class V, class C>
void describe(V& v, C& c) {
  v.field("env", c.env);
  v.field("mode", c.mode);
  v.field("seeds", c.seeds);
  v.field("epochs", c.epochs);
  v.field("steps_per_epoch", c.steps_per_epoch);
  v.field("sac_updates_per_epoch", c.sac_updates_per_epoch);
  v.field("eval_episodes", c.eval_episodes);
  v.field("threshold", c.threshold);
  v.field("stop_at_threshold", c.stop_at_threshold);
  v.field("checkpoint_every", c.checkpoint_every);
  v.field("output_dir", c.output_dir);
  v.field("mix_ratio", c.mix_ratio);
  v.field("env_buffer_capacity", c.env_buffer_capacity);
  v.field("ablate_fractions", c.ablate_fractions);
  v.section("schedule", [&] {
    v.field("horizon_min", c.schedule.horizon_min);
    v.field("horizon_max", c.schedule.horizon_max);
    v.field("mpc_batch_max", c.schedule.mpc_batch_max);
    v.field("ramp_epochs", c.schedule.ramp_epochs);
  });
  v.section("planner", [&] {
    v.field("rollouts", c.planner.rollouts);
    v.field("elite_fraction", c.planner.elite_fraction);
    v.field("alpha", c.planner.alpha);
    v.field("std_scale", c.planner.std_scale);
    v.field("aggregation", c.planner.aggregation);
    v.field("temperature", c.planner.temperature);
    v.field("inner_iters", c.planner.inner_iters);
  });
  v.section("model", [&] {
    v.field("members", c.model.members);
    v.field("hidden", c.model.hidden);
    v.field("activation", c.model.activation);
    v.field("epochs", c.model.epochs);
    v.field("max_updates", c.model.max_updates);
    v.field("batch_size", c.model.batch_size);
    v.field("learning_rate", c.model.learning_rate);
    v.field("validation_fraction", c.model.validation_fraction);
    v.field("min_transitions", c.model.min_transitions);
    v.field("warm_start", c.model.warm_start);
    v.field("gaussian_nll", c.model.gaussian_nll);
  });
  v.section("sac", [&] {
    v.field("hidden", c.sac.hidden);
    v.field("activation", c.sac.activation);
    v.field("actor_lr", c.sac.actor_lr);
    v.field("critic_lr", c.sac.critic_lr);
    v.field("temperature_lr", c.sac.temperature_lr);
    v.field("tau", c.sac.tau);
    v.field("gamma", c.sac.gamma);
    v.field("target_entropy", c.sac.target_entropy);
    v.field("init_temperature", c.sac.init_temperature);
    v.field("learn_temperature", c.sac.learn_temperature);
    v.field("batch_size", c.sac.batch_size);
  });
  v.section("pendulum", [&] {
    auto& p = c.pendulum;
    v.field("mass", p.mass);
    v.field("length", p.length);
    v.field("gravity", p.gravity);
    v.field("damping", p.damping);
    v.field("dt", p.dt);
    v.field("substeps", p.substeps);
    v.field("max_torque", p.max_torque);
    v.field("max_speed", p.max_speed);
    v.field("horizon", p.horizon);
    v.field("gamma", p.gamma);
    v.field("init_angle_range", p.init_angle_range);
    v.field("init_speed_range", p.init_speed_range);
  });
  v.section("leg", [&] {
    auto& p = c.leg;
    v.field("lengths", p.lengths);
    v.field("masses", p.masses);
    v.field("gravity", p.gravity);
    v.field("damping", p.damping);
    v.field("dt", p.dt);
    v.field("substeps", p.substeps);
    v.field("max_torque", p.max_torque);
    v.field("max_joint_speed", p.max_joint_speed);
    v.field("q_min", p.q_min);
    v.field("q_max", p.q_max);
    v.field("ellipse_center", p.ellipse_center);
    v.field("ellipse_axes", p.ellipse_axes);
    v.field("gait_period", p.gait_period);
    v.field("init_joint_noise", p.init_joint_noise);
    v.field("horizon", p.horizon);
    v.field("gamma", p.gamma);
  });
  v.section("lq", [&] {
    auto& p = c.lq;
    v.field("A", p.A);
    v.field("B", p.B);
    v.field("Q", p.Q);
    v.field("R", p.R);
    v.field("x0", p.x0);
    v.field("init_std", p.init_std);
    v.field("action_bound", p.action_bound);
    v.field("state_box", p.state_box);
    v.field("horizon", p.horizon);
    v.field("gamma", p.gamma);
  });
  v.section("regret", [&] {
    auto& r = c.regret;
    v.field("steps", r.steps);
    v.field("horizon", r.horizon);
    v.field("rollouts", r.rollouts);
    v.field("elite_fraction", r.elite_fraction);
    v.field("alpha", r.alpha);
    v.field("step_schedule", r.step_schedule);
    v.field("std_scale", r.std_scale);
    v.field("aggregation", r.aggregation);
    v.field("model_error", r.model_error);
    v.field("shift_gain_scale", r.shift_gain_scale);
    v.field("gap_rollouts", r.gap_rollouts);
    v.field("gap_state_box", r.gap_state_box);
    v.field("slope_min_exponent", r.slope_min_exponent);
    v.field("slope_max_exponent", r.slope_max_exponent);
  });
}

void apply_override(YAML::Node& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(spec, 0, "override must look like key.path=value");
  }
  const std::string path = spec.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(spec.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError(path, 0, std::string("cannot parse override value: ") + e.msg);
  }
  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string k; std::getline(ss, k, '.');) keys.push_back(k);
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    YAML::Node next = cur[keys[i]];
    if (!next.IsDefined() || next.IsNull()) {
      cur[keys[i]] = YAML::Node(YAML::NodeType::Map);
      next = cur[keys[i]];
    } else if (!next.IsMap()) {
      throw ConfigError(path, 0, "'" + keys[i] + "' is not a section");
    }
    cur.reset(next);
  }
  cur[keys.back()] = value;
}

template <class F>
void wrap(const std::string& field, F&& check) {
  try {
    check();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, 0, e.what());
  }
}

}  // namespace

std::string_view to_string(Mode m) {
  return m == Mode::kDemorl ? "demorl" : "sac-baseline";
}

void RunConfig::validate() const {
  if (env.empty()) throw ConfigError("env", 0, "required field is missing");
  const auto names = envs::environment_names();
  if (std::find(names.begin(), names.end(), env) == names.end()) {
    throw ConfigError("env", 0, "unknown environment '" + env + "' (pendulum, leg, lq)");
  }
  if (seeds.empty()) throw ConfigError("seeds", 0, "at least one seed is required");
  if (epochs < 0) throw ConfigError("epochs", 0, "must be non-negative");
  if (steps_per_epoch < 1) throw ConfigError("steps_per_epoch", 0, "must be positive");
  if (sac_updates_per_epoch < 0) throw ConfigError("sac_updates_per_epoch", 0, "must be non-negative");
  if (eval_episodes < 1) throw ConfigError("eval_episodes", 0, "must be positive");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every", 0, "must be non-negative");
  if (output_dir.empty()) throw ConfigError("output_dir", 0, "must not be empty");
  if (mix_ratio && !(*mix_ratio >= 0 && *mix_ratio <= 1)) {
    throw ConfigError("mix_ratio", 0, "must lie in [0, 1]");
  }
  if (env_buffer_capacity < 1) throw ConfigError("env_buffer_capacity", 0, "must be positive");
  for (double p : ablate_fractions) {
    if (!(p > 0 && p <= 1)) throw ConfigError("ablate_fractions", 0, "values must lie in (0, 1]");
  }
  wrap("schedule", [&] { schedule.validate(); });
  wrap("planner", [&] {
    dmdmpc::PlannerConfig p = planner;
    p.horizon = schedule.horizon_min;
    p.validate();
  });
  wrap("model", [&] { model.validate(); });
  wrap("sac", [&] { sac.validate(); });
  wrap("pendulum", [&] { envs::Pendulum{pendulum}; });
  wrap("leg", [&] { envs::Leg{leg}; });
  wrap("lq", [&] { envs::LinearQuadratic{lq}; });
  wrap("regret", [&] { regret.validate(); });
}

RunConfig parse_config(std::string_view yaml_text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
  }
  if (root.IsNull() || !root.IsDefined()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("", line_of(root), "top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);

  RunConfig c;
  std::map<std::string, int> lines;
  Reader reader(root, lines);
  describe(reader, c);
  reader.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    const auto it = lines.find(e.field());
    if (e.line() == 0 && it != lines.end() && it->second > 0) {
      // Strip the field prefix the first formatting added.
      std::string msg = e.what();
      const std::string lead = "'" + e.field() + "': ";
      if (msg.rfind(lead, 0) == 0) msg = msg.substr(lead.size());
      throw ConfigError(e.field(), it->second, msg);
    }
    throw;
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", 0, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string to_yaml(const RunConfig& config) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  Writer w(e);
  describe(w, config);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::unique_ptr<envs::Environment> make_env(const RunConfig& c) {
  if (c.env == "pendulum") return std::make_unique<envs::Pendulum>(c.pendulum);
  if (c.env == "leg") return std::make_unique<envs::Leg>(c.leg);
  if (c.env == "lq") return std::make_unique<envs::LinearQuadratic>(c.lq);
  return envs::make_environment(c.env);
}

std::filesystem::path resolve_output_dir(const RunConfig& c) {
  const std::filesystem::path dir(c.output_dir);
  const char* root = std::getenv(kOutputRootEnv);
  if (root != nullptr && *root != '\0' && dir.is_relative()) return std::filesystem::path(root) / dir;
  return dir;
}

}  // namespace demorl::config
