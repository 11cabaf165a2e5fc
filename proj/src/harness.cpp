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

#include "cerebellar/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "cerebellar/adaptation.hpp"
#include "cerebellar/baselines.hpp"
#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"
#include "cerebellar/feature_pathway.hpp"
#include "cerebellar/kernels.hpp"
#include "cerebellar/plant_sim.hpp"
#include "cerebellar/residual_core.hpp"

namespace cerebellar {

PhaseEstimator Calibration::Estimator() const {
  return PhaseEstimator(dominant_joint, smoothing, velocity_scale);
}

namespace {

PlantState InitialState(const ExperimentConfig& cfg, std::uint64_t seed,
                        std::size_t episode) {
  const ReferenceSample start = cfg.plant.Task().At(0.0);
  PlantState s;
  s.q = start.q;
  s.qd = start.qd;
  s.dt = cfg.plant.dt;
  if (cfg.plant.init_noise > 0.0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(episode)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, cfg.plant.init_noise);
    for (Eigen::Index j = 0; j < s.q.size(); ++j) s.q[j] += noise(rng);
  }
  return s;
}

// Phase, reference and feature activity for the current state. Shared by
// every learner so they see identical inputs.
class Frontend {
 public:
  Frontend(const ExperimentConfig& cfg, const Calibration& cal,
           std::uint64_t feature_seed, bool features, bool traces)
      : cfg_(cfg),
        cal_(cal),
        estimator_(cal.Estimator()),
        traces_(features && traces ? FeatureCount(cfg) : 1,
                FilterRate(cfg.plant.dt, cfg.features.tau_excit),
                FilterRate(cfg.plant.dt, cfg.features.tau_inhib)),
        features_(features),
        traces_on_(features && traces && !cfg.ablations.no_temporal_filter) {
    if (features && !cfg.ablations.no_granule_expansion) {
      expansion_.emplace(InputDim(cfg), cfg.features.count, feature_seed,
                         cfg.features.init_std);
    }
  }

  static std::size_t InputDim(const ExperimentConfig& cfg) {
    return (cfg.ablations.no_reference_accel ? 2 : 3) * cfg.plant.joints();
  }
  static std::size_t FeatureCount(const ExperimentConfig& cfg) {
    return cfg.ablations.no_granule_expansion ? InputDim(cfg)
                                              : cfg.features.count;
  }

  void Observe(const PlantState& s, std::size_t step) {
    phase_ = estimator_.Estimate(s.q, s.qd);
    const ReferenceTrajectory& ref = cal_.reference;
    const Ablations& ab = cfg_.ablations;
    ref_ = ab.time_indexed_reference
               ? &ref[ref.TimeIndex(step)]
               : &ref[ref.NearestPhaseIndex(WrapPhase(phase_ + ab.phase_offset))];
    x_ = AssembleInput(s.q, s.qd, ref_->qdd, !ab.no_reference_accel);
    if (!features_) return;
    if (expansion_) {
      expansion_->ExpandInto(x_, h_);
    } else {
      h_ = x_;
    }
    if (traces_on_) {
      traces_.StepInto(h_, phi_);
    } else {
      phi_ = h_;
    }
  }

  double phase() const { return phase_; }
  const ReferenceSample& ref() const { return *ref_; }
  const Vector& x() const { return x_; }
  const Vector& phi() const { return phi_; }

 private:
  const ExperimentConfig& cfg_;
  const Calibration& cal_;
  PhaseEstimator estimator_;
  std::optional<FeatureExpansion> expansion_;
  TraceState traces_;
  bool features_;
  bool traces_on_;
  double phase_ = 0.0;
  const ReferenceSample* ref_ = nullptr;
  Vector x_;
  Vector h_;
  Vector phi_;
};

MicrozoneConfig ZonesFor(const ExperimentConfig& cfg) {
  MicrozoneConfig z = cfg.microzones;
  if (cfg.ablations.no_microzones) z.zones = 1;
  z.split_heads = !cfg.ablations.no_fast_slow;
  return z;
}

// The proposed controller: microzone heads, local learning and the meta
// layer that sets its authority.
class AdaptiveLearner {
 public:
  AdaptiveLearner(const ExperimentConfig& cfg, const Calibration& cal)
      : cfg_(cfg),
        bank_(ZonesFor(cfg), cfg.plant.joints(), Frontend::FeatureCount(cfg)) {
    auth_.tau_max = cfg.tau_max;
    if (!cfg.ablations.no_meta) {
      meta_.emplace(cfg.meta, cal.nominal_reward_rate);
    }
    SyncAuthority();
  }

  // Learns from the error of the state just observed against the features
  // of the previous tick.
  void Learn(const Frontend& fe, const PlantState& s) {
    if (!prev_) return;
    const MetaMultipliers mults = Multipliers();
    const Vector lambda =
        Vector::Constant(s.q.size(), cfg_.lambda * mults.lambda_mult);
    const TrackingError err = CompositeError(s.q, s.qd, fe.ref(), lambda);
    const double r_norm = kernels::Norm2(err.r);
    if (prev_step_ < cfg_.adaptation.learning_start ||
        r_norm < cfg_.adaptation.deadzone) {
      return;
    }
    const Vector eta =
        Vector::Constant(s.q.size(), cfg_.adaptation.eta_base * mults.lr_mult);
    NlmsDeltaInto(err.r, prev_phi_, eta, cfg_.adaptation.epsilon, delta_);
    UpdateHeads(bank_, prev_weights_, delta_, cfg_.adaptation, momentum_,
                prev_step_, r_norm);
  }

  Vector Residual(const Frontend& fe, const Vector& base, std::size_t step) {
    const Vector weights = MicrozoneWeights(bank_, fe.phase());
    const double scale = auth_.Scale();
    Vector res = ClipResidual(scale * ReadoutRaw(bank_, weights, fe.phi()),
                              auth_.tau_max);
    bool suppressed = false;
    if (!cfg_.ablations.no_directional_gate) {
      suppressed = kernels::Dot(res, base) < 0.0;
      if (suppressed) res.setZero();
    }
    if (suppressed) {
      slow_target_ = Vector::Zero(res.size());
    } else {
      slow_target_ = scale * ReadoutSlow(bank_, weights, fe.phi());
    }
    prev_ = true;
    prev_step_ = step;
    prev_phi_ = fe.phi();
    prev_weights_ = weights;
    return res;
  }

  void Tick(std::size_t step, double reward) {
    if (!meta_) return;
    meta_->Tick(step, reward);
    SyncAuthority();
  }

  const AuthorityState& authority() const { return auth_; }
  const Vector& slow_target() const { return slow_target_; }
  std::vector<MetaTraceRow> trace() const {
    return meta_ ? meta_->trace() : std::vector<MetaTraceRow>{};
  }

 private:
  MetaMultipliers Multipliers() const {
    if (meta_) return meta_->multipliers();
    MetaMultipliers m;
    m.confidence = cfg_.meta.c0;
    return m;
  }

  void SyncAuthority() {
    if (!meta_) {
      auth_.soft_gate = 1.0;
      auth_.confidence = cfg_.meta.c0;
      auth_.gain = cfg_.meta.g0;
      auth_.gain_mult = 1.0;
      return;
    }
    auth_.soft_gate = meta_->gate();
    auth_.confidence = meta_->multipliers().confidence;
    auth_.gain = meta_->gain();
    auth_.gain_mult = meta_->multipliers().gain_mult;
  }

  const ExperimentConfig& cfg_;
  MicrozoneBank bank_;
  MomentumState momentum_;
  std::optional<MetaController> meta_;
  AuthorityState auth_;
  bool prev_ = false;
  std::size_t prev_step_ = 0;
  Vector prev_phi_;
  Vector prev_weights_;
  Matrix delta_;
  Vector slow_target_;
};

CmacConfig CmacFor(const ExperimentConfig& cfg) {
  CmacConfig c;
  c.eta = cfg.cmac.eta;
  c.gain = cfg.cmac.gain;
  c.lambda = cfg.cmac.lambda;
  c.directional_gate = cfg.cmac.directional_gate;
  c.warmup = cfg.adaptation.learning_start;
  c.tau_max = cfg.tau_max;
  c.epsilon = cfg.adaptation.epsilon;
  c.deadzone = cfg.adaptation.deadzone;
  c.momentum = cfg.adaptation.momentum;
  c.l2 = cfg.adaptation.l2;
  c.w_max = cfg.microzones.w_max;
  return c;
}

LmsConfig LmsFor(const ExperimentConfig& cfg) {
  LmsConfig c = cfg.lms;
  c.tau_max = cfg.tau_max;
  return c;
}

void CheckFinite(const PlantState& s, std::size_t step) {
  if (!s.q.allFinite() || !s.qd.allFinite()) {
    std::ostringstream os;
    os << "plant state went non-finite at step " << step;
    throw DivergenceError(os.str());
  }
}

}  // namespace

EpisodeResult RunEpisode(const ExperimentConfig& cfg, const Calibration& cal,
                         Method method, const FaultSpec& fault,
                         std::uint64_t seed, std::size_t episode,
                         const EpisodeOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const PlantModel model = cfg.plant.Model();
  const PeriodicTask task = cfg.plant.Task();
  const NominalController nominal(model, cfg.plant.Gains());
  fault.Validate(model.joints());
  if (method == Method::kAdapter && options.base_adapter == nullptr) {
    throw MissingArtifactError("method adapter needs a fitted adapter");
  }

  const bool adapter = options.base_adapter != nullptr;
  const bool needs_frontend = method != Method::kFrozen || adapter;
  const bool needs_phi = method == Method::kOurs || adapter;
  const std::uint64_t fseed = options.feature_seed.value_or(seed);
  std::optional<Frontend> fe;
  if (needs_frontend) fe.emplace(cfg, cal, fseed, needs_phi, needs_phi);

  std::optional<AdaptiveLearner> ours;
  std::optional<LmsBaseline> lms;
  std::optional<CmacBaseline> cmac;
  const std::size_t joints = model.joints();
  switch (method) {
    case Method::kOurs:
      ours.emplace(cfg, cal);
      break;
    case Method::kLms:
      lms.emplace(LmsFor(cfg), joints);
      break;
    case Method::kCmac:
      cmac.emplace(CmacFor(cfg),
                   FeatureExpansion(Frontend::InputDim(cfg), cfg.features.count,
                                    fseed, cfg.features.init_std),
                   joints);
      break;
    case Method::kFrozen:
    case Method::kAdapter:
      break;
  }

  const std::size_t horizon = cfg.plant.horizon;
  const auto skip = static_cast<std::size_t>(
      std::floor(cfg.consolidation.transient_skip * static_cast<double>(horizon)));
  EpisodeResult out;
  if (options.record_steps) out.steps.reserve(horizon);
  PlantState s = InitialState(cfg, seed, episode);
  double sq_err = 0.0;
  double energy = 0.0;
  Vector prev_x;
  Vector prev_h;
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(joints));

  for (std::size_t t = 0; t < horizon; ++t) {
    const ReferenceSample target = task.At(static_cast<double>(t) * cfg.plant.dt);
    Vector base = nominal.Action(s, target);
    if (fe) fe->Observe(s, t);
    if (adapter) base += AdapterAction(*options.base_adapter, fe->phi());

    Vector residual = zero;
    if (ours) {
      ours->Learn(*fe, s);
      residual = ours->Residual(*fe, base, t);
      if (options.collect != nullptr && t >= skip) {
        options.collect->Add(fe->phi(), ours->slow_target());
      }
    } else if (lms) {
      if (t > 0) {
        const TrackingError err = CompositeError(
            s.q, s.qd, fe->ref(), Vector::Constant(s.q.size(), lms->config().lambda));
        lms->Learn(prev_x, err.r, t - 1);
      }
      residual = lms->Residual(fe->x(), base);
      prev_x = fe->x();
    } else if (cmac) {
      if (t > 0) {
        const TrackingError err = CompositeError(
            s.q, s.qd, fe->ref(), Vector::Constant(s.q.size(), cmac->config().lambda));
        cmac->Learn(prev_h, err.r, t - 1);
      }
      prev_h = cmac->Features(fe->x());
      residual = cmac->Residual(prev_h, base);
    }

    const Vector action = ComposeAction(base, residual);
    const double reward = Reward(s, target, action);
    out.episode_return += reward;
    sq_err += (target.q - s.q).squaredNorm();
    energy += residual.squaredNorm();
    if (options.record_steps) {
      StepRecord rec;
      rec.reward = reward;
      rec.nominal = base;
      rec.action = action;
      rec.residual = residual;
      rec.phi_norm = needs_phi ? kernels::Norm2(fe->phi()) : 0.0;
      if (ours) {
        const AuthorityState& a = ours->authority();
        rec.gate = a.soft_gate;
        rec.gain = a.gain;
        rec.gain_mult = a.gain_mult;
        rec.confidence = a.confidence;
      }
      out.steps.push_back(std::move(rec));
    }

    s = PlantStep(model, s, action, fault, t);
    CheckFinite(s, t);
    if (ours) ours->Tick(t, reward);
  }

  const double n = static_cast<double>(horizon);
  out.rms = std::sqrt(sq_err / (n * static_cast<double>(joints)));
  out.residual_energy = energy / n;
  out.success = true;
  if (ours) out.meta_trace = ours->trace();
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

EpisodeResult RunEpisode(const ExperimentConfig& cfg, const Calibration& cal,
                         std::uint64_t seed, std::size_t episode) {
  return RunEpisode(cfg, cal, cfg.method, cfg.fault.Spec(), seed, episode);
}

Calibration Calibrate(const ExperimentConfig& cfg) {
  ValidateConfig(cfg);
  const PlantModel model = cfg.plant.Model();
  const PeriodicTask task = cfg.plant.Task();
  const NominalController nominal(model, cfg.plant.Gains());
  const std::size_t period = cfg.plant.PeriodSteps();
  constexpr std::size_t kWarmPeriods = 2;

  PlantState s;
  const ReferenceSample start = task.At(0.0);
  s.q = start.q;
  s.qd = start.qd;
  s.dt = cfg.plant.dt;
  const FaultSpec none = NoFault();
  std::vector<KinematicSample> rollout;
  for (std::size_t t = 0; t <= (kWarmPeriods + 1) * period; ++t) {
    rollout.push_back({s.q, s.qd});
    const ReferenceSample target = task.At(static_cast<double>(t) * cfg.plant.dt);
    s = PlantStep(model, s, nominal.Action(s, target), none, t);
    CheckFinite(s, t);
  }

  PhaseEstimator est = DefaultEstimatorFor(rollout, cfg.phase.smoothing);
  if (cfg.phase.dominant_joint) {
    est = PhaseEstimator(*cfg.phase.dominant_joint, cfg.phase.smoothing,
                         est.velocity_scale());
  }
  Calibration cal;
  cal.dominant_joint = est.dominant_joint();
  cal.velocity_scale = est.velocity_scale();
  cal.smoothing = est.smoothing();
  const std::size_t first = kWarmPeriods * period;
  for (std::size_t t = 0; t < first; ++t) est.Estimate(rollout[t].q, rollout[t].qd);
  const std::vector<KinematicSample> last(rollout.begin() + static_cast<std::ptrdiff_t>(first),
                                          rollout.end());
  const ReferenceTrajectory full = BuildReference(last, cfg.plant.dt, est);
  std::vector<ReferenceSample> samples(full.samples().begin(),
                                       full.samples().begin() + static_cast<std::ptrdiff_t>(period));
  cal.reference = ReferenceTrajectory(std::move(samples), cfg.plant.dt);

  double rate = 0.0;
  for (std::size_t i = 0; i < cfg.calibration_episodes; ++i) {
    const EpisodeResult r = RunEpisode(cfg, cal, Method::kFrozen, none, i, 0);
    cal.nominal.push_back({i, r.episode_return, r.rms});
    rate += r.episode_return / static_cast<double>(cfg.plant.horizon);
  }
  cal.nominal_reward_rate = rate / static_cast<double>(cfg.calibration_episodes);
  return cal;
}

void WriteCalibration(const Calibration& cal, const std::string& dir) {
  std::filesystem::create_directories(dir);
  WriteReferenceCsv(cal.reference, dir + "/reference.csv");
  std::ofstream nom(dir + "/nominal.csv");
  if (!nom) throw MissingArtifactError("cannot write " + dir + "/nominal.csv");
  nom << "seed,return,rms\n";
  for (const auto& e : cal.nominal) {
    nom << e.seed << ',' << FormatDouble(e.episode_return) << ','
        << FormatDouble(e.rms) << '\n';
  }
  std::ofstream kv(dir + "/calibration.txt");
  kv << "dominant_joint=" << cal.dominant_joint << '\n'
     << "velocity_scale=" << FormatDouble(cal.velocity_scale) << '\n'
     << "smoothing=" << FormatDouble(cal.smoothing) << '\n'
     << "nominal_reward_rate=" << FormatDouble(cal.nominal_reward_rate) << '\n';
}

Calibration ReadCalibration(const std::string& dir, double dt) {
  const std::string kv_path = dir + "/calibration.txt";
  std::ifstream kv(kv_path);
  if (!kv) {
    throw MissingArtifactError("no calibration in " + dir +
                               " (run the calibrate subcommand first)");
  }
  Calibration cal;
  std::string line;
  std::map<std::string, std::string> values;
  while (std::getline(kv, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  try {
    cal.dominant_joint = static_cast<std::size_t>(ParseInt(values.at("dominant_joint")));
    cal.velocity_scale = ParseDouble(values.at("velocity_scale"));
    cal.smoothing = ParseDouble(values.at("smoothing"));
    cal.nominal_reward_rate = ParseDouble(values.at("nominal_reward_rate"));
  } catch (const std::out_of_range&) {
    throw MissingArtifactError(kv_path + " is incomplete");
  }
  if (!std::filesystem::exists(dir + "/reference.csv")) {
    throw MissingArtifactError("missing " + dir + "/reference.csv");
  }
  cal.reference = ReadReferenceCsv(dir + "/reference.csv", dt);
  if (std::filesystem::exists(dir + "/nominal.csv")) {
    const CsvTable t = ReadCsvFile(dir + "/nominal.csv");
    for (const auto& row : t.rows) {
      cal.nominal.push_back({static_cast<std::uint64_t>(ParseInt(row[0])),
                             ParseDouble(row[1]), ParseDouble(row[2])});
    }
  }
  return cal;
}

bool ResultRow::operator<(const ResultRow& o) const {
  return std::tie(family, severity, method, seed, episode) <
         std::tie(o.family, o.severity, o.method, o.seed, o.episode);
}

std::vector<SweepCell> GridCells(const ExperimentConfig& cfg) {
  std::vector<SweepCell> cells;
  for (const auto& [fam, sevs] : cfg.fault.grid) {
    for (double s : sevs) cells.push_back({fam, s});
  }
  return cells;
}

namespace {

int ErrorCode(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError&) {
    return 2;
  } catch (const DivergenceError&) {
    return 3;
  } catch (const NonFiniteError&) {
    return 3;
  } catch (const MissingArtifactError&) {
    return 4;
  } catch (...) {
    return 1;
  }
}

}  // namespace

std::vector<ResultRow> RunSweep(const ExperimentConfig& cfg,
                                const Calibration& cal,
                                const std::vector<SweepCell>& cells,
                                const std::vector<Method>& methods) {
  std::vector<ResultRow> rows;
  for (const auto& cell : cells) {
    for (Method m : methods) {
      for (std::uint64_t seed : cfg.seeds) {
        for (std::size_t e = 0; e < cfg.episodes; ++e) {
          ResultRow r;
          r.family = cell.family;
          r.severity = cell.severity;
          r.method = MethodName(m);
          r.seed = seed;
          r.episode = e;
          rows.push_back(std::move(r));
        }
      }
    }
  }
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  const int workers = cfg.workers == 0 ? kernels::parallel::MaxThreads()
                                       : static_cast<int>(cfg.workers);
  (void)workers;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    ResultRow& r = rows[static_cast<std::size_t>(i)];
    try {
      const FaultSpec fault = cfg.fault.SpecFor(r.family, r.severity);
      const EpisodeResult res =
          RunEpisode(cfg, cal, ParseMethod(r.method), fault, r.seed, r.episode);
      r.episode_return = res.episode_return;
      r.rms = res.rms;
      r.residual_energy = res.residual_energy;
      r.success = res.success;
      r.wall_seconds = res.wall_seconds;
    } catch (...) {
      r.success = false;
      r.error_code = ErrorCode(std::current_exception());
    }
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::pair<double, double> MeanStd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, double, std::string>;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[{r.family, r.severity, r.method}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    std::tie(s.family, s.severity, s.method) = key;
    std::vector<double> ret;
    std::vector<double> rms;
    double energy = 0.0;
    for (const ResultRow* r : members) {
      if (!r->success) {
        ++s.failures;
        continue;
      }
      ret.push_back(r->episode_return);
      rms.push_back(r->rms);
      energy += r->residual_energy;
    }
    s.count = ret.size();
    std::tie(s.return_mean, s.return_std) = MeanStd(ret);
    std::tie(s.rms_mean, s.rms_std) = MeanStd(rms);
    s.energy_mean = ret.empty() ? 0.0 : energy / static_cast<double>(ret.size());
    out.push_back(s);
  }
  for (auto& s : out) {
    for (const auto& f : out) {
      if (f.method == "frozen" && f.family == s.family &&
          f.severity == s.severity && f.count > 0 && f.return_mean != 0.0) {
        s.relative_improvement =
            (s.return_mean - f.return_mean) / std::abs(f.return_mean);
      }
    }
  }
  return out;
}

void WriteResultsCsv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "family,severity,method,seed,episode,return,rms,residual_energy,"
         "success,error_code\n";
  for (const auto& r : rows) {
    out << r.family << ',' << FormatDouble(r.severity) << ',' << r.method << ','
        << r.seed << ',' << r.episode << ',' << FormatDouble(r.episode_return)
        << ',' << FormatDouble(r.rms) << ',' << FormatDouble(r.residual_energy)
        << ',' << (r.success ? 1 : 0) << ',' << r.error_code << '\n';
  }
}

void WriteTimingsCsv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "family,severity,method,seed,episode,wall_seconds\n";
  for (const auto& r : rows) {
    out << r.family << ',' << FormatDouble(r.severity) << ',' << r.method << ','
        << r.seed << ',' << r.episode << ',' << FormatDouble(r.wall_seconds)
        << '\n';
  }
}

std::vector<ResultRow> ReadResultsCsv(std::istream& in) {
  const CsvTable t = ReadCsv(in);
  const std::size_t c_fam = t.Column("family");
  const std::size_t c_sev = t.Column("severity");
  const std::size_t c_met = t.Column("method");
  const std::size_t c_seed = t.Column("seed");
  const std::size_t c_ep = t.Column("episode");
  const std::size_t c_ret = t.Column("return");
  const std::size_t c_rms = t.Column("rms");
  const std::size_t c_en = t.Column("residual_energy");
  const std::size_t c_ok = t.Column("success");
  const std::size_t c_err = t.Column("error_code");
  std::vector<ResultRow> rows;
  for (const auto& f : t.rows) {
    ResultRow r;
    r.family = f[c_fam];
    r.severity = ParseDouble(f[c_sev]);
    r.method = f[c_met];
    r.seed = static_cast<std::uint64_t>(ParseInt(f[c_seed]));
    r.episode = static_cast<std::size_t>(ParseInt(f[c_ep]));
    r.episode_return = ParseDouble(f[c_ret]);
    r.rms = ParseDouble(f[c_rms]);
    r.residual_energy = ParseDouble(f[c_en]);
    r.success = ParseInt(f[c_ok]) != 0;
    r.error_code = static_cast<int>(ParseInt(f[c_err]));
    rows.push_back(std::move(r));
  }
  return rows;
}

void WriteSummaryCsv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "family,severity,method,count,failures,return_mean,return_std,"
         "rms_mean,rms_std,energy_mean,relative_improvement\n";
  for (const auto& s : rows) {
    out << s.family << ',' << FormatDouble(s.severity) << ',' << s.method << ','
        << s.count << ',' << s.failures << ',' << FormatDouble(s.return_mean)
        << ',' << FormatDouble(s.return_std) << ',' << FormatDouble(s.rms_mean)
        << ',' << FormatDouble(s.rms_std) << ',' << FormatDouble(s.energy_mean)
        << ','
        << (s.relative_improvement ? FormatDouble(*s.relative_improvement) : "")
        << '\n';
  }
}

void WriteSummaryTable(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "| fault | severity | method | n | return | rms | E_res | vs frozen |\n"
      << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& s : rows) {
    std::ostringstream rel;
    if (s.relative_improvement) {
      rel << std::showpos << std::fixed << std::setprecision(1)
          << 100.0 * *s.relative_improvement << '%';
    }
    std::ostringstream line;
    line << std::setprecision(4) << "| " << s.family << " | " << s.severity
         << " | " << s.method << " | " << s.count << " | " << s.return_mean
         << " ± " << s.return_std << " | " << s.rms_mean << " | "
         << s.energy_mean << " | " << rel.str() << " |\n";
    out << line.str();
  }
}

namespace {

ResultRow RowFor(const FaultSpec& cell, const std::string& method,
                 std::uint64_t seed, std::size_t episode,
                 const EpisodeResult& r) {
  ResultRow row;
  row.family = FaultFamilyName(cell.family);
  row.severity = cell.severity;
  row.method = method;
  row.seed = seed;
  row.episode = episode;
  row.episode_return = r.episode_return;
  row.rms = r.rms;
  row.residual_energy = r.residual_energy;
  row.success = r.success;
  row.wall_seconds = r.wall_seconds;
  return row;
}

}  // namespace

ConsolidationOutcome ConsolidateCell(const ExperimentConfig& cfg,
                                     const Calibration& cal,
                                     const FaultSpec& cell) {
  ValidateConfig(cfg);
  const std::uint64_t seed = cfg.seeds.front();
  ConsolidationDataset ds;
  ds.transient_skip = static_cast<std::size_t>(std::floor(
      cfg.consolidation.transient_skip * static_cast<double>(cfg.plant.horizon)));
  ds.source = cell.Key();

  ConsolidationOutcome out;
  std::vector<ResultRow> ours_rows;
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    EpisodeOptions opt;
    opt.collect = &ds;
    const EpisodeResult r = RunEpisode(cfg, cal, Method::kOurs, cell, seed, e, opt);
    ours_rows.push_back(RowFor(cell, "ours", seed, e, r));
  }
  if (ds.size() == 0) {
    throw MissingArtifactError("no stabilized pairs were collected for " + cell.Key());
  }
  out.pairs = ds.size();
  out.adapter = FitAdapter(ds, cfg.consolidation.ridge_lambda);
  out.adapter.tau_max = cfg.tau_max;
  out.metadata.family = FaultFamilyName(cell.family);
  out.metadata.severity = cell.severity;
  out.metadata.ridge_lambda = cfg.consolidation.ridge_lambda;
  out.metadata.gain = out.adapter.gain;
  out.metadata.features = static_cast<std::size_t>(out.adapter.weights.cols());
  out.metadata.seed = seed;
  out.metadata.tau_max = cfg.tau_max;

  std::vector<ResultRow> frozen_rows;
  std::vector<ResultRow> adapter_rows;
  std::vector<ResultRow> stacked_rows;
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    frozen_rows.push_back(RowFor(
        cell, "frozen", seed, e,
        RunEpisode(cfg, cal, Method::kFrozen, cell, seed, e)));
    adapter_rows.push_back(RowFor(
        cell, "adapter", seed, e,
        EvaluateAdapter(cfg, cal, out.adapter, out.metadata, cell,
                        Method::kAdapter, seed, e)));
    stacked_rows.push_back(RowFor(
        cell, "ours+adapter", seed, e,
        EvaluateAdapter(cfg, cal, out.adapter, out.metadata, cell, Method::kOurs,
                        seed, e)));
  }
  auto mean_energy = [](const std::vector<ResultRow>& rs) {
    double s = 0.0;
    for (const auto& r : rs) s += r.residual_energy;
    return s / static_cast<double>(rs.size());
  };
  out.ours_energy = mean_energy(ours_rows);
  out.stacked_energy = mean_energy(stacked_rows);
  for (auto* group : {&frozen_rows, &ours_rows, &adapter_rows, &stacked_rows}) {
    out.rows.insert(out.rows.end(), group->begin(), group->end());
  }
  return out;
}

EpisodeResult EvaluateAdapter(const ExperimentConfig& cfg,
                              const Calibration& cal,
                              const StaticAdapter& adapter,
                              const AdapterMetadata& meta,
                              const FaultSpec& cell, Method method,
                              std::uint64_t seed, std::size_t episode) {
  CheckAdapterCell(meta, FaultFamilyName(cell.family), cell.severity,
                   cfg.consolidation.allow_cross_severity);
  RequireSameSize(static_cast<std::size_t>(adapter.weights.cols()),
                  Frontend::FeatureCount(cfg), "adapter features");
  EpisodeOptions opt;
  opt.base_adapter = &adapter;
  opt.feature_seed = meta.seed;
  return RunEpisode(cfg, cal, method, cell, seed, episode, opt);
}

}  // namespace cerebellar
