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

#ifndef CEREBELLAR_META_CONTROLLER_HPP_
#define CEREBELLAR_META_CONTROLLER_HPP_

// Authority regulation from sustained reward trends: a smoothed reward
// monitor, drop / stagnation events, bounded multiplier relaxation, the
// dissipative gain law and the performance-based soft gate.

#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cerebellar {

enum class DropScale {
  kRelative,  // threshold = best + drop_threshold * |best|
  kAbsolute,  // threshold = best + drop_threshold
};

struct Range {
  double lo;
  double hi;
  double Clamp(double v) const;
};

struct MetaConfig {
  double rho = 0.10;
  std::size_t window = 50;
  std::size_t check_every = 20;
  double drop_threshold = -0.30;
  DropScale drop_scale = DropScale::kRelative;
  std::size_t stagnation_horizon = 100;
  double kappa = 0.05;
  double lambda_meta = 0.01;

  double g0 = 0.35;
  double g_max = 0.70;
  double c0 = 0.40;
  Range confidence{0.0, 0.70};
  Range lr_mult{0.5, 2.0};
  Range gain_mult{0.5, 2.0};
  Range lambda_mult{0.7, 1.5};

  // Event targets.
  double drop_lr = 2.0;
  double drop_gain = 2.0;
  double drop_lambda = 1.5;
  double stagnation_lr = 0.5;

  bool soft_gating = true;
  double initial_gate = 0.0;
};

// Threshold below which `value` counts as a drop relative to `anchor`.
double DropLevel(double anchor, double drop_threshold, DropScale scale);

class PerformanceMonitor {
 public:
  PerformanceMonitor(const MetaConfig& cfg, double initial_ema);

  // Per-step reward into the smoothing window. Throws NonFiniteError.
  void Observe(double reward);
  // Mean of the last `window` observed rewards (0 if none yet).
  double WindowMean() const;

  // Exponential moving average update with the given reward, maintaining the
  // running best and the no-improvement counter (advanced by `elapsed`
  // steps). Throws NonFiniteError.
  void EmaUpdate(double reward, std::size_t elapsed = 1);

  // Restarts the average and the running best at `value`.
  void Reseed(double value);

  void SetNominal(double nominal) { nominal_ = nominal; }
  std::optional<double> nominal() const { return nominal_; }

  double ema() const { return ema_; }
  double best() const { return best_; }
  std::size_t steps_since_improvement() const { return since_improvement_; }
  double rho() const { return cfg_.rho; }

  bool DropEvent() const;
  bool Stagnating() const;
  // Throws MissingArtifactError if no nominal baseline has been set.
  bool BelowNominal() const;

 private:
  MetaConfig cfg_;
  double ema_;
  double best_;
  std::size_t since_improvement_ = 0;
  std::deque<double> window_;
  double window_sum_ = 0.0;
  std::optional<double> nominal_;
};

struct MetaMultipliers {
  double lr_mult = 1.0;
  double gain_mult = 1.0;
  double lambda_mult = 1.0;
  double confidence = 0.4;

  bool operator==(const MetaMultipliers&) const = default;
};

enum class MetaEvent { kNone, kDrop, kStagnation };
const char* MetaEventName(MetaEvent e);

// g + kappa * [degraded] - lambda * g, clamped to [0, g_max].
double GainStep(double g, bool degraded, double kappa, double lambda_meta,
                double g_max);

// Event classification at a check step; drop outranks stagnation.
MetaEvent DetectEvent(const PerformanceMonitor& mon);

// Relaxes multipliers toward the event's targets at rate kappa, or toward
// nominal at rate lambda_meta when there is no event. Does nothing unless
// step is a multiple of check_every.
MetaMultipliers MetaStep(const PerformanceMonitor& mon,
                         const MetaMultipliers& mults, std::size_t step,
                         const MetaConfig& cfg);
// Same, with the event supplied by the caller.
MetaMultipliers RelaxMultipliers(MetaEvent event, const MetaMultipliers& mults,
                                 const MetaConfig& cfg);

// Gate relaxes toward 1 while the smoothed reward sits below the nominal
// band and toward 0 otherwise; result in [0, 1].
double SoftGate(const PerformanceMonitor& mon, double current_gate,
                double kappa);

struct MetaTraceRow {
  std::size_t step;
  double ema;
  double best;
  double gate;
  double gain_mult;
  double lr_mult;
  double lambda_mult;
  double confidence;
  MetaEvent event;
};

void WriteMetaTraceCsv(const std::vector<MetaTraceRow>& rows,
                       std::ostream& out);

// Stateful bundle used by the controller: one per episode.
class MetaController {
 public:
  MetaController(const MetaConfig& cfg, std::optional<double> nominal);

  // Feeds the step's reward; on check steps runs the event logic and
  // updates multipliers, gain and gate. `step` is the zero-based index of the
  // step that produced the reward.
  void Tick(std::size_t step, double reward);

  const MetaMultipliers& multipliers() const { return mults_; }
  double gain() const { return gain_; }
  double gate() const { return gate_; }
  const PerformanceMonitor& monitor() const { return monitor_; }
  const std::vector<MetaTraceRow>& trace() const { return trace_; }

 private:
  MetaConfig cfg_;
  PerformanceMonitor monitor_;
  MetaMultipliers mults_;
  double gain_;
  double gate_;
  bool seeded_;
  std::vector<MetaTraceRow> trace_;
};

}  // namespace cerebellar

#endif  // CEREBELLAR_META_CONTROLLER_HPP_
