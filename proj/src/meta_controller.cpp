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

#include "cerebellar/meta_controller.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cerebellar/csv.hpp"
#include "cerebellar/errors.hpp"

namespace cerebellar {

double Range::Clamp(double v) const { return std::clamp(v, lo, hi); }

double DropLevel(double anchor, double drop_threshold, DropScale scale) {
  return scale == DropScale::kRelative
             ? anchor + drop_threshold * std::fabs(anchor)
             : anchor + drop_threshold;
}

PerformanceMonitor::PerformanceMonitor(const MetaConfig& cfg,
                                       double initial_ema)
    : cfg_(cfg), ema_(initial_ema), best_(initial_ema) {
  if (!(cfg.rho > 0.0 && cfg.rho <= 1.0)) {
    throw InvalidArgument("reward EMA factor must lie in (0, 1]");
  }
  if (cfg.window == 0 || cfg.check_every == 0) {
    throw InvalidArgument("reward window and check period must be >= 1");
  }
}

void PerformanceMonitor::Observe(double reward) {
  if (!std::isfinite(reward)) throw NonFiniteError("non-finite reward");
  window_.push_back(reward);
  window_sum_ += reward;
  if (window_.size() > cfg_.window) {
    window_sum_ -= window_.front();
    window_.pop_front();
  }
}

double PerformanceMonitor::WindowMean() const {
  if (window_.empty()) return 0.0;
  // Re-summing keeps the mean free of running-sum drift; the window is short.
  double s = 0.0;
  for (double r : window_) s += r;
  return s / static_cast<double>(window_.size());
}

void PerformanceMonitor::EmaUpdate(double reward, std::size_t elapsed) {
  if (!std::isfinite(reward)) throw NonFiniteError("non-finite reward");
  ema_ = (1.0 - cfg_.rho) * ema_ + cfg_.rho * reward;
  if (ema_ > best_) {
    best_ = ema_;
    since_improvement_ = 0;
  } else {
    since_improvement_ += elapsed;
  }
}

void PerformanceMonitor::Reseed(double value) {
  ema_ = value;
  best_ = value;
  since_improvement_ = 0;
}

bool PerformanceMonitor::DropEvent() const {
  return ema_ < DropLevel(best_, cfg_.drop_threshold, cfg_.drop_scale);
}

bool PerformanceMonitor::Stagnating() const {
  return since_improvement_ >= cfg_.stagnation_horizon;
}

bool PerformanceMonitor::BelowNominal() const {
  if (!nominal_) {
    throw MissingArtifactError("soft gating needs a nominal reward baseline");
  }
  return ema_ < DropLevel(*nominal_, cfg_.drop_threshold, cfg_.drop_scale);
}

const char* MetaEventName(MetaEvent e) {
  switch (e) {
    case MetaEvent::kDrop:
      return "drop";
    case MetaEvent::kStagnation:
      return "stagnation";
    case MetaEvent::kNone:
      break;
  }
  return "none";
}

double GainStep(double g, bool degraded, double kappa, double lambda_meta,
                double g_max) {
  const double next = g + (degraded ? kappa : 0.0) - lambda_meta * g;
  return std::clamp(next, 0.0, g_max);
}

MetaEvent DetectEvent(const PerformanceMonitor& mon) {
  if (mon.DropEvent()) return MetaEvent::kDrop;
  if (mon.Stagnating()) return MetaEvent::kStagnation;
  return MetaEvent::kNone;
}

MetaMultipliers RelaxMultipliers(MetaEvent event, const MetaMultipliers& mults,
                                 const MetaConfig& cfg) {
  auto toward = [](double v, double target, double rate) {
    return v + rate * (target - v);
  };
  MetaMultipliers out = mults;
  switch (event) {
    case MetaEvent::kDrop:
      out.lr_mult = toward(mults.lr_mult, cfg.drop_lr, cfg.kappa);
      out.gain_mult = toward(mults.gain_mult, cfg.drop_gain, cfg.kappa);
      out.lambda_mult = toward(mults.lambda_mult, cfg.drop_lambda, cfg.kappa);
      out.confidence = toward(mults.confidence, cfg.confidence.hi, cfg.kappa);
      break;
    case MetaEvent::kStagnation:
      out.lr_mult = toward(mults.lr_mult, cfg.stagnation_lr, cfg.kappa);
      out.gain_mult = toward(mults.gain_mult, 1.0, cfg.kappa);
      out.lambda_mult = toward(mults.lambda_mult, 1.0, cfg.kappa);
      out.confidence = toward(mults.confidence, cfg.c0, cfg.kappa);
      break;
    case MetaEvent::kNone:
      out.lr_mult = toward(mults.lr_mult, 1.0, cfg.lambda_meta);
      out.gain_mult = toward(mults.gain_mult, 1.0, cfg.lambda_meta);
      out.lambda_mult = toward(mults.lambda_mult, 1.0, cfg.lambda_meta);
      out.confidence = toward(mults.confidence, cfg.c0, cfg.lambda_meta);
      break;
  }
  out.lr_mult = cfg.lr_mult.Clamp(out.lr_mult);
  out.gain_mult = cfg.gain_mult.Clamp(out.gain_mult);
  out.lambda_mult = cfg.lambda_mult.Clamp(out.lambda_mult);
  out.confidence = cfg.confidence.Clamp(out.confidence);
  return out;
}

MetaMultipliers MetaStep(const PerformanceMonitor& mon,
                         const MetaMultipliers& mults, std::size_t step,
                         const MetaConfig& cfg) {
  if (step % cfg.check_every != 0) return mults;
  return RelaxMultipliers(DetectEvent(mon), mults, cfg);
}

double SoftGate(const PerformanceMonitor& mon, double current_gate,
                double kappa) {
  const double target = mon.BelowNominal() ? 1.0 : 0.0;
  return std::clamp(current_gate + kappa * (target - current_gate), 0.0, 1.0);
}

void WriteMetaTraceCsv(const std::vector<MetaTraceRow>& rows,
                       std::ostream& out) {
  out << "step,ema,best,gate,gain_mult,lr_mult,lambda_mult,confidence,event\n";
  for (const auto& r : rows) {
    out << r.step << ',' << FormatDouble(r.ema) << ',' << FormatDouble(r.best)
        << ',' << FormatDouble(r.gate) << ',' << FormatDouble(r.gain_mult)
        << ',' << FormatDouble(r.lr_mult) << ','
        << FormatDouble(r.lambda_mult) << ',' << FormatDouble(r.confidence)
        << ',' << MetaEventName(r.event) << '\n';
  }
}

MetaController::MetaController(const MetaConfig& cfg,
                               std::optional<double> nominal)
    : cfg_(cfg),
      monitor_(cfg, nominal.value_or(0.0)),
      gain_(cfg.g0),
      gate_(cfg.soft_gating ? cfg.initial_gate : 1.0),
      seeded_(nominal.has_value()) {
  mults_.confidence = cfg.c0;
  if (nominal) monitor_.SetNominal(*nominal);
  if (cfg.soft_gating && !nominal) {
    throw MissingArtifactError("soft gating needs a nominal reward baseline");
  }
}

void MetaController::Tick(std::size_t step, double reward) {
  monitor_.Observe(reward);
  const std::size_t completed = step + 1;
  if (completed % cfg_.check_every != 0) return;
  // Without a nominal baseline the first window mean anchors the average.
  if (!seeded_) {
    monitor_.Reseed(monitor_.WindowMean());
    seeded_ = true;
  } else {
    monitor_.EmaUpdate(monitor_.WindowMean(), cfg_.check_every);
  }
  const MetaEvent event = DetectEvent(monitor_);
  mults_ = RelaxMultipliers(event, mults_, cfg_);
  gain_ = GainStep(gain_, event == MetaEvent::kDrop, cfg_.kappa,
                   cfg_.lambda_meta, cfg_.g_max);
  if (cfg_.soft_gating) gate_ = SoftGate(monitor_, gate_, cfg_.kappa);
  trace_.push_back({completed, monitor_.ema(), monitor_.best(), gate_,
                    mults_.gain_mult, mults_.lr_mult, mults_.lambda_mult,
                    mults_.confidence, event});
}

}  // namespace cerebellar
