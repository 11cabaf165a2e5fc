// Copyright 2026 The cerebellar-residual Authors
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

#include "cerebellar/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <type_traits>
#include <sstream>
#include <utility>

#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"

namespace cerebellar {

static_assert(std::is_same_v<std::uint64_t, std::size_t>,
              "seed lists decode through the size_t path");

const char* MethodName(Method m) {
  switch (m) {
    case Method::kFrozen:
      return "frozen";
    case Method::kOurs:
      return "ours";
    case Method::kLms:
      return "lms";
    case Method::kCmac:
      return "cmac";
    case Method::kAdapter:
      return "adapter";
  }
  return "?";
}

Method ParseMethod(const std::string& name) {
  for (Method m : {Method::kFrozen, Method::kOurs, Method::kLms, Method::kCmac,
                   Method::kAdapter}) {
    if (name == MethodName(m)) return m;
  }
  throw ConfigError("unknown method '" + name + "'");
}

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ApplyAblationList(const std::string& list, Ablations& a) {
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const std::string name = Trim(item.substr(0, eq));
    if (name == "phase_offset") {
      if (eq == std::string::npos) {
        throw ConfigError("phase_offset needs a value (phase_offset=0.1)");
      }
      try {
        a.phase_offset = ParseDouble(Trim(item.substr(eq + 1)));
      } catch (const Error&) {
        throw ConfigError("bad phase_offset value in '" + item + "'");
      }
      continue;
    }
    if (eq != std::string::npos) {
      throw ConfigError("ablation flag '" + name + "' takes no value");
    }
    if (name == "no_granule_expansion") {
      a.no_granule_expansion = true;
    } else if (name == "no_temporal_filter") {
      a.no_temporal_filter = true;
    } else if (name == "no_microzones") {
      a.no_microzones = true;
    } else if (name == "no_fast_slow") {
      a.no_fast_slow = true;
    } else if (name == "no_meta") {
      a.no_meta = true;
    } else if (name == "no_reference_accel") {
      a.no_reference_accel = true;
    } else if (name == "time_indexed_reference") {
      a.time_indexed_reference = true;
    } else if (name == "no_directional_gate") {
      a.no_directional_gate = true;
    } else {
      throw ConfigError("unknown ablation flag '" + name + "'");
    }
  }
}

PlantModel PlantConfig::Model() const {
  PlantModel m;
  m.inertia = inertia;
  m.damping = damping;
  m.coupling = ChainCoupling(ground_stiffness, chain_stiffness);
  m.friction = friction;
  m.torque_limit = torque_limit;
  m.friction_velocity = friction_velocity;
  return m;
}

PeriodicTask PlantConfig::Task() const {
  PeriodicTask t;
  t.amplitude = amplitude;
  if (offset.size() == 0) {
    t.offset.resize(amplitude.size());
    for (Eigen::Index j = 0; j < amplitude.size(); ++j) {
      t.offset[j] = -static_cast<double>(j) * std::numbers::pi / 4.0;
    }
  } else {
    t.offset = offset;
  }
  t.period = period;
  return t;
}

NominalGains PlantConfig::Gains() const { return NominalGains{kp, kd}; }

std::size_t PlantConfig::PeriodSteps() const {
  return static_cast<std::size_t>(std::llround(period / dt));
}

FaultSpec FaultConfig::SpecFor(const std::string& fam, double sev) const {
  FaultSpec f;
  try {
    f.family = ParseFaultFamily(fam);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  f.severity = sev;
  f.affected_joints = affected_joints;
  f.onset_step = onset_step;
  f.removal_step = removal_step;
  return f;
}

FaultSpec FaultConfig::Spec() const { return SpecFor(family, severity); }

namespace {

using Grid = std::map<std::string, std::vector<double>>;

// Calls v(section, key, field) for every configurable field, grouped by
// section in serialization order. Top-level fields use an empty section.
template <class Cfg, class V>
void VisitFields(Cfg& c, V&& v) {
  v("", "schema_version", c.schema_version);
  v("", "method", c.method);
  v("", "seeds", c.seeds);
  v("", "episodes", c.episodes);
  v("", "calibration_episodes", c.calibration_episodes);
  v("", "workers", c.workers);
  v("", "output_dir", c.output_dir);
  v("", "sweep_methods", c.sweep_methods);
  v("", "lambda", c.lambda);
  v("", "tau_max", c.tau_max);

  auto& p = c.plant;
  v("plant", "inertia", p.inertia);
  v("plant", "damping", p.damping);
  v("plant", "ground_stiffness", p.ground_stiffness);
  v("plant", "chain_stiffness", p.chain_stiffness);
  v("plant", "friction", p.friction);
  v("plant", "torque_limit", p.torque_limit);
  v("plant", "friction_velocity", p.friction_velocity);
  v("plant", "kp", p.kp);
  v("plant", "kd", p.kd);
  v("plant", "amplitude", p.amplitude);
  v("plant", "offset", p.offset);
  v("plant", "period", p.period);
  v("plant", "dt", p.dt);
  v("plant", "horizon", p.horizon);
  v("plant", "init_noise", p.init_noise);

  auto& f = c.fault;
  v("fault", "family", f.family);
  v("fault", "severity", f.severity);
  v("fault", "affected_joints", f.affected_joints);
  v("fault", "onset_step", f.onset_step);
  v("fault", "removal_step", f.removal_step);
  v("fault", "grid", f.grid);

  auto& fe = c.features;
  v("features", "count", fe.count);
  v("features", "init_std", fe.init_std);
  v("features", "tau_excit", fe.tau_excit);
  v("features", "tau_inhib", fe.tau_inhib);

  v("phase", "smoothing", c.phase.smoothing);
  v("phase", "dominant_joint", c.phase.dominant_joint);

  auto& z = c.microzones;
  v("microzones", "zones", z.zones);
  v("microzones", "width", z.width);
  v("microzones", "min_weight", z.min_weight);
  v("microzones", "w_max", z.w_max);
  v("microzones", "weighting", z.weighting);

  auto& a = c.adaptation;
  v("adaptation", "eta_base", a.eta_base);
  v("adaptation", "fast_scale", a.fast_scale);
  v("adaptation", "slow_scale", a.slow_scale);
  v("adaptation", "single_scale", a.single_scale);
  v("adaptation", "fast_decay", a.fast_decay);
  v("adaptation", "slow_decay", a.slow_decay);
  v("adaptation", "deadzone", a.deadzone);
  v("adaptation", "momentum", a.momentum);
  v("adaptation", "l2", a.l2);
  v("adaptation", "epsilon", a.epsilon);
  v("adaptation", "learning_start", a.learning_start);

  auto& m = c.meta;
  v("meta", "rho", m.rho);
  v("meta", "window", m.window);
  v("meta", "check_every", m.check_every);
  v("meta", "drop_threshold", m.drop_threshold);
  v("meta", "drop_scale", m.drop_scale);
  v("meta", "stagnation_horizon", m.stagnation_horizon);
  v("meta", "kappa", m.kappa);
  v("meta", "lambda_meta", m.lambda_meta);
  v("meta", "g0", m.g0);
  v("meta", "g_max", m.g_max);
  v("meta", "c0", m.c0);
  v("meta", "confidence", m.confidence);
  v("meta", "lr_mult", m.lr_mult);
  v("meta", "gain_mult", m.gain_mult);
  v("meta", "lambda_mult", m.lambda_mult);
  v("meta", "drop_lr", m.drop_lr);
  v("meta", "drop_gain", m.drop_gain);
  v("meta", "drop_lambda", m.drop_lambda);
  v("meta", "stagnation_lr", m.stagnation_lr);
  v("meta", "soft_gating", m.soft_gating);
  v("meta", "initial_gate", m.initial_gate);

  v("lms", "eta", c.lms.eta);
  v("lms", "gain", c.lms.gain);
  v("lms", "lambda", c.lms.lambda);
  v("lms", "warmup", c.lms.warmup);
  v("lms", "epsilon", c.lms.epsilon);
  v("lms", "directional_gate", c.lms.directional_gate);

  v("cmac", "eta", c.cmac.eta);
  v("cmac", "gain", c.cmac.gain);
  v("cmac", "lambda", c.cmac.lambda);
  v("cmac", "directional_gate", c.cmac.directional_gate);

  v("consolidation", "ridge_lambda", c.consolidation.ridge_lambda);
  v("consolidation", "transient_skip", c.consolidation.transient_skip);
  v("consolidation", "allow_cross_severity",
    c.consolidation.allow_cross_severity);

  auto& ab = c.ablations;
  v("ablations", "no_granule_expansion", ab.no_granule_expansion);
  v("ablations", "no_temporal_filter", ab.no_temporal_filter);
  v("ablations", "no_microzones", ab.no_microzones);
  v("ablations", "no_fast_slow", ab.no_fast_slow);
  v("ablations", "no_meta", ab.no_meta);
  v("ablations", "no_reference_accel", ab.no_reference_accel);
  v("ablations", "time_indexed_reference", ab.time_indexed_reference);
  v("ablations", "no_directional_gate", ab.no_directional_gate);
  v("ablations", "phase_offset", ab.phase_offset);
}

[[noreturn]] void Bad(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

template <class T>
T Scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) Bad(path, "expected a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    Bad(path, "cannot convert '" + n.Scalar() + "'");
  }
}

std::size_t Count(const YAML::Node& n, const std::string& path) {
  const auto v = Scalar<long long>(n, path);
  if (v < 0) Bad(path, "must be >= 0");
  return static_cast<std::size_t>(v);
}

double Real(const YAML::Node& n, const std::string& path) {
  const auto v = Scalar<double>(n, path);
  if (!std::isfinite(v)) Bad(path, "must be finite");
  return v;
}

void RequireSeq(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) Bad(path, "expected a list");
}

void Decode(const YAML::Node& n, const std::string& p, int& out) {
  out = Scalar<int>(n, p);
}
void Decode(const YAML::Node& n, const std::string& p, std::size_t& out) {
  out = Count(n, p);
}
void Decode(const YAML::Node& n, const std::string& p, double& out) {
  out = Real(n, p);
}
void Decode(const YAML::Node& n, const std::string& p, bool& out) {
  out = Scalar<bool>(n, p);
}
void Decode(const YAML::Node& n, const std::string& p, std::string& out) {
  out = Scalar<std::string>(n, p);
}
void Decode(const YAML::Node& n, const std::string& p, Vector& out) {
  RequireSeq(n, p);
  out.resize(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = Real(n[i], p);
  }
}
void Decode(const YAML::Node& n, const std::string& p,
            std::vector<double>& out) {
  RequireSeq(n, p);
  out.clear();
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(Real(n[i], p));
}
void Decode(const YAML::Node& n, const std::string& p,
            std::vector<std::size_t>& out) {
  RequireSeq(n, p);
  out.clear();
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(Count(n[i], p));
}
void Decode(const YAML::Node& n, const std::string& p,
            std::vector<std::string>& out) {
  RequireSeq(n, p);
  out.clear();
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(Scalar<std::string>(n[i], p));
  }
}
void Decode(const YAML::Node& n, const std::string& p,
            std::optional<std::size_t>& out) {
  if (n.IsNull() || (n.IsScalar() && n.Scalar() == "none")) {
    out.reset();
  } else {
    out = Count(n, p);
  }
}
void Decode(const YAML::Node& n, const std::string& p, Method& out) {
  out = ParseMethod(Scalar<std::string>(n, p));
}
void Decode(const YAML::Node& n, const std::string& p, ZoneWeighting& out) {
  const auto s = Scalar<std::string>(n, p);
  if (s == "soft") {
    out = ZoneWeighting::kSoft;
  } else if (s == "hard") {
    out = ZoneWeighting::kHard;
  } else {
    Bad(p, "expected soft or hard");
  }
}
void Decode(const YAML::Node& n, const std::string& p, DropScale& out) {
  const auto s = Scalar<std::string>(n, p);
  if (s == "relative") {
    out = DropScale::kRelative;
  } else if (s == "absolute") {
    out = DropScale::kAbsolute;
  } else {
    Bad(p, "expected relative or absolute");
  }
}
void Decode(const YAML::Node& n, const std::string& p, Range& out) {
  RequireSeq(n, p);
  if (n.size() != 2) Bad(p, "expected [lo, hi]");
  out.lo = Real(n[0], p);
  out.hi = Real(n[1], p);
}
void Decode(const YAML::Node& n, const std::string& p, Grid& out) {
  if (!n.IsMap()) Bad(p, "expected a table of family: [severities]");
  out.clear();
  for (const auto& kv : n) {
    const auto fam = Scalar<std::string>(kv.first, p);
    std::vector<double> sev;
    Decode(kv.second, p + "." + fam, sev);
    out[fam] = std::move(sev);
  }
}

class Reader {
 public:
  explicit Reader(const YAML::Node& root) : root_(root) {}

  template <class T>
  void operator()(const char* section, const char* key, T& field) {
    if (*section) {
      const YAML::Node table = root_[section];
      if (!table.IsDefined()) return;
      Read(table[key], std::string(section) + "." + key, field);
    } else {
      Read(root_[key], key, field);
    }
  }

 private:
  template <class T>
  static void Read(const YAML::Node& node, const std::string& path, T& field) {
    if (node.IsDefined()) Decode(node, path, field);
  }

  const YAML::Node& root_;
};

struct KeyCollector {
  std::set<std::string> sections;
  std::set<std::pair<std::string, std::string>> keys;

  template <class T>
  void operator()(const char* section, const char* key, const T&) {
    if (*section) sections.insert(section);
    keys.emplace(section, key);
  }
};

void CheckKeys(const YAML::Node& root) {
  KeyCollector known;
  ExperimentConfig probe;
  VisitFields(probe, known);
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (known.sections.count(key)) {
      if (!kv.second.IsMap()) Bad(key, "expected a table");
      for (const auto& inner : kv.second) {
        const auto sub = inner.first.as<std::string>();
        if (!known.keys.count({key, sub})) Bad(key + "." + sub, "unknown key");
      }
    } else if (!known.keys.count({"", key})) {
      Bad(key, "unknown key");
    }
  }
}

void Emit(YAML::Emitter& e, int v) { e << v; }
void Emit(YAML::Emitter& e, std::size_t v) { e << static_cast<unsigned long long>(v); }
void Emit(YAML::Emitter& e, double v) { e << FormatDouble(v); }
void Emit(YAML::Emitter& e, bool v) { e << (v ? "true" : "false"); }
void Emit(YAML::Emitter& e, const std::string& v) { e << v; }
void Emit(YAML::Emitter& e, const Vector& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) Emit(e, v[i]);
  e << YAML::EndSeq;
}
template <class T>
void Emit(YAML::Emitter& e, const std::vector<T>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (const auto& x : v) {
    Emit(e, x);
  }
  e << YAML::EndSeq;
}
void Emit(YAML::Emitter& e, const std::optional<std::size_t>& v) {
  if (v) {
    Emit(e, *v);
  } else {
    e << "none";
  }
}
void Emit(YAML::Emitter& e, Method m) { e << MethodName(m); }
void Emit(YAML::Emitter& e, ZoneWeighting w) {
  e << (w == ZoneWeighting::kSoft ? "soft" : "hard");
}
void Emit(YAML::Emitter& e, DropScale s) {
  e << (s == DropScale::kRelative ? "relative" : "absolute");
}
void Emit(YAML::Emitter& e, const Range& r) {
  e << YAML::Flow << YAML::BeginSeq;
  Emit(e, r.lo);
  Emit(e, r.hi);
  e << YAML::EndSeq;
}
void Emit(YAML::Emitter& e, const Grid& g) {
  e << YAML::BeginMap;
  for (const auto& [fam, sev] : g) {
    e << YAML::Key << fam << YAML::Value;
    Emit(e, sev);
  }
  e << YAML::EndMap;
}

class Writer {
 public:
  explicit Writer(YAML::Emitter& e) : e_(e) {}

  template <class T>
  void operator()(const char* section, const char* key, const T& field) {
    if (section_ != section) {
      if (!section_.empty()) e_ << YAML::EndMap;
      section_ = section;
      e_ << YAML::Key << section_ << YAML::Value << YAML::BeginMap;
    }
    e_ << YAML::Key << key << YAML::Value;
    Emit(e_, field);
  }

  void Finish() {
    if (!section_.empty()) e_ << YAML::EndMap;
  }

 private:
  YAML::Emitter& e_;
  std::string section_;
};

void Require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void ValidateConfig(const ExperimentConfig& c) {
  Require(c.schema_version == kSchemaVersion,
          "schema_version " + std::to_string(c.schema_version) +
              " is not supported (expected " + std::to_string(kSchemaVersion) +
              ")");
  Require(!c.seeds.empty(), "seeds must not be empty");
  Require(c.episodes >= 1, "episodes must be >= 1");
  Require(c.calibration_episodes >= 1, "calibration_episodes must be >= 1");
  for (const auto& m : c.sweep_methods) ParseMethod(m);

  const auto& p = c.plant;
  try {
    p.Model().Validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("plant: ") + e.what());
  }
  const auto j = static_cast<Eigen::Index>(p.joints());
  Require(p.kp.size() == j && p.kd.size() == j, "plant gains need one entry per joint");
  Require(p.amplitude.size() == j, "plant amplitude needs one entry per joint");
  Require(p.offset.size() == 0 || p.offset.size() == j,
          "plant offset must be empty or one entry per joint");
  Require(p.dt > 0.0 && p.period > 0.0, "plant dt and period must be > 0");
  Require(p.PeriodSteps() >= 2, "plant period must span at least two steps");
  Require(p.horizon >= 1, "plant horizon must be >= 1");
  Require(p.init_noise >= 0.0, "plant init_noise must be >= 0");

  try {
    c.fault.Spec().Validate(p.joints());
    for (const auto& [fam, sevs] : c.fault.grid) {
      for (double s : sevs) c.fault.SpecFor(fam, s).Validate(p.joints());
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("fault: ") + e.what());
  }

  Require(c.features.count >= 1, "features.count must be >= 1");
  Require(c.features.init_std > 0.0, "features.init_std must be > 0");
  Require(c.features.tau_excit > 0.0 && c.features.tau_inhib > c.features.tau_excit,
          "features need 0 < tau_excit < tau_inhib");
  Require(c.phase.smoothing >= 0.0 && c.phase.smoothing < 1.0,
          "phase.smoothing must be in [0, 1)");
  Require(!c.phase.dominant_joint || *c.phase.dominant_joint < p.joints(),
          "phase.dominant_joint out of range");

  Require(c.microzones.zones >= 1, "microzones.zones must be >= 1");
  Require(c.microzones.w_max > 0.0, "microzones.w_max must be > 0");
  Require(c.microzones.min_weight >= 0.0, "microzones.min_weight must be >= 0");

  const auto& a = c.adaptation;
  Require(a.eta_base > 0.0, "adaptation.eta_base must be > 0");
  Require(a.momentum >= 0.0 && a.momentum < 1.0, "adaptation.momentum must be in [0, 1)");
  Require(a.epsilon > 0.0, "adaptation.epsilon must be > 0");
  Require(a.deadzone >= 0.0 && a.l2 >= 0.0, "adaptation deadzone and l2 must be >= 0");
  Require(a.fast_decay >= 0.0 && a.fast_decay <= 1.0 && a.slow_decay >= 0.0 &&
              a.slow_decay <= 1.0,
          "adaptation decays must be in [0, 1]");
  Require(c.lambda > 0.0, "lambda must be > 0");
  Require(c.tau_max > 0.0, "tau_max must be > 0");

  const auto& m = c.meta;
  Require(m.rho > 0.0 && m.rho <= 1.0, "meta.rho must be in (0, 1]");
  Require(m.window >= 1 && m.check_every >= 1, "meta window and check_every must be >= 1");
  Require(m.kappa >= 0.0 && m.kappa <= 1.0 && m.lambda_meta >= 0.0 &&
              m.lambda_meta <= 1.0,
          "meta kappa and lambda_meta must be in [0, 1]");
  Require(m.g0 >= 0.0 && m.g0 <= m.g_max, "meta needs 0 <= g0 <= g_max");
  for (const Range* r : {&m.confidence, &m.lr_mult, &m.gain_mult, &m.lambda_mult}) {
    Require(r->lo <= r->hi, "meta ranges need lo <= hi");
  }
  Require(m.confidence.lo >= 0.0, "meta confidence range must be nonnegative");
  Require(m.c0 >= m.confidence.lo && m.c0 <= m.confidence.hi, "meta.c0 outside the confidence range");
  Require(m.initial_gate >= 0.0 && m.initial_gate <= 1.0, "meta.initial_gate must be in [0, 1]");

  Require(c.lms.eta > 0.0 && c.lms.lambda > 0.0 && c.lms.epsilon > 0.0,
          "lms eta, lambda and epsilon must be > 0");
  Require(c.cmac.eta > 0.0 && c.cmac.lambda > 0.0, "cmac eta and lambda must be > 0");
  Require(c.consolidation.ridge_lambda >= 0.0, "consolidation.ridge_lambda must be >= 0");
  Require(c.consolidation.transient_skip >= 0.0 && c.consolidation.transient_skip < 1.0,
          "consolidation.transient_skip must be in [0, 1)");
}

ExperimentConfig ParseConfig(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig cfg;
  if (root.IsNull()) {
    ValidateConfig(cfg);
    return cfg;
  }
  if (!root.IsMap()) throw ConfigError("config must be a table of keys");
  CheckKeys(root);
  const YAML::Node& croot = root;
  Reader reader(croot);
  VisitFields(cfg, reader);
  ValidateConfig(cfg);
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string SerializeConfig(const ExperimentConfig& cfg) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  Writer w(e);
  VisitFields(cfg, w);
  w.Finish();
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

void ApplyFastProfile(ExperimentConfig& cfg) {
  cfg.seeds = {0, 1, 2};
  cfg.episodes = 1;
  cfg.features.count = 256;
}

}  // namespace cerebellar
