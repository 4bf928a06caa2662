#include "habdf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "habdf/errors.hpp"

namespace habdf {

void validate(const SecondOrderPlant& plant) {
  if (!(plant.natural_freq > 0.0) || !(plant.damping >= 0.0) || !(plant.dt > 0.0) ||
      !std::isfinite(plant.gain) || !std::isfinite(plant.natural_freq) ||
      !std::isfinite(plant.damping) || !std::isfinite(plant.dt)) {
    throw ContractError("plant: need natural_freq > 0, damping >= 0, dt > 0, finite gain");
  }
}

DiscretePlant discretize(const SecondOrderPlant& plant) {
  validate(plant);
  const double wn = plant.natural_freq;
  Eigen::Matrix3d aug = Eigen::Matrix3d::Zero();
  aug(0, 1) = 1.0;
  aug(1, 0) = -wn * wn;
  aug(1, 1) = -2.0 * plant.damping * wn;
  aug(1, 2) = plant.gain * wn * wn;
  const Eigen::Matrix3d e = (aug * plant.dt).exp();
  return {e.topLeftCorner<2, 2>(), e.topRightCorner<2, 1>()};
}

PlantStep plant_step(const DiscretePlant& plant, const PlantState& state, double input) {
  const Eigen::Vector2d x = plant.Phi * Eigen::Vector2d(state.y, state.ydot) + plant.Gamma * input;
  return {{x[0], x[1]}, x[0]};
}

PlantStep plant_step(const SecondOrderPlant& plant, const PlantState& state, double input) {
  return plant_step(discretize(plant), state, input);
}

void validate(const FaultProfile& p) {
  if (!(p.noise_sigma >= 0.0) || !std::isfinite(p.noise_sigma)) {
    throw ContractError("fault profile: noise_sigma must be finite and >= 0");
  }
  if (!(p.spike_prob >= 0.0 && p.spike_prob <= 1.0)) {
    throw ContractError("fault profile: spike_prob must lie in [0, 1]");
  }
  if (!std::isfinite(p.spike_mag) || !std::isfinite(p.drift_rate) ||
      !std::isfinite(p.shock_offset)) {
    throw ContractError("fault profile: magnitudes must be finite");
  }
  if (p.shock_end < p.shock_start) throw ContractError("fault profile: shock window is reversed");
}

std::vector<double> inject_faults(const std::vector<double>& clean, const FaultProfile& p) {
  validate(p);
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<double> out(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto t = static_cast<std::int64_t>(i);
    // Both draws happen every sample so the stream stays aligned across profiles.
    const double g = noise(rng);
    const bool spike = coin(rng) < p.spike_prob;
    double y = clean[i];
    if (p.noise_sigma > 0.0) y += p.noise_sigma * g;
    if (spike) y += p.spike_mag;
    if (p.drift_rate != 0.0) y += p.drift_rate * static_cast<double>(t);
    if (t >= p.shock_start && t < p.shock_end) y += p.shock_offset;
    out[i] = y;
  }
  return out;
}

PidStep pid_step(double error, const PidState& state, const PidGains& gains) {
  if (!(gains.dt > 0.0)) throw ContractError("pid: dt must be positive");
  if (!std::isfinite(error)) throw ContractError("pid: error must be finite");
  PidStep out;
  out.state.integral = std::clamp(state.integral + 0.5 * (error + state.prev_error) * gains.dt,
                                  -gains.integral_limit, gains.integral_limit);
  out.state.prev_error = error;
  const double derivative = (error - state.prev_error) / gains.dt;
  out.command = gains.kp * error + gains.ki * out.state.integral + gains.kd * derivative;
  return out;
}

std::vector<double> run_pan_regulation(const PidGains& gains, const PanAxis& axis, double target,
                                       double disturbance, int disturbance_at, int steps) {
  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  double angle = 0.0;
  PidState pid;
  for (int k = 0; k < steps; ++k) {
    const double e = target - angle;
    errors.push_back(e);
    const PidStep s = pid_step(e, pid, gains);
    pid = s.state;
    const double d = k >= disturbance_at ? disturbance : 0.0;
    angle += axis.gain * (s.command + d) * gains.dt;
  }
  return errors;
}

double setpoint_at(const SignalProfile& signal, std::int64_t t) {
  const std::int64_t period = std::max(signal.period, 4);
  const std::int64_t quarter = period / 4;
  const std::int64_t phase = ((t % period) + period) % period;
  const double a = signal.amplitude;
  if (phase < quarter) return a;
  if (phase < 2 * quarter) return -a;
  if (phase < 3 * quarter) {
    const double s = static_cast<double>(phase - 2 * quarter) / static_cast<double>(quarter);
    return -a + 2.0 * a * s;
  }
  return a;
}

std::uint64_t sensor_seed(std::uint64_t run_seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                    static_cast<std::uint32_t>(index), 0x68616264u};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

SimRecord run_sim_experiment(const Scenario& sc) {
  if (sc.sensors.size() < 3) {
    throw InsufficientDetectors("simulation needs at least 3 sensors, got " +
                                std::to_string(sc.sensors.size()));
  }
  if (sc.frames < 1) throw ContractError("simulation: frames must be >= 1");

  const DiscretePlant plant = discretize(sc.plant);
  std::vector<double> truth(static_cast<std::size_t>(sc.frames));
  PlantState ps;
  for (int t = 0; t < sc.frames; ++t) {
    const PlantStep s = plant_step(plant, ps, setpoint_at(sc.signal, t));
    ps = s.state;
    truth[static_cast<std::size_t>(t)] = s.output;
  }

  const std::size_t n = sc.sensors.size();
  std::vector<std::vector<double>> readings(n);
  for (std::size_t i = 0; i < n; ++i) {
    FaultProfile p = sc.sensors[i];
    p.seed = sensor_seed(sc.seed, i);
    readings[i] = inject_faults(truth, p);
  }

  PipelineParams params = sc.params;
  params.model.axes = 1;
  Pipeline pipeline = make_pipeline(n, params, sc.fusion);

  SimRecord record;
  record.sensors = n;
  record.frames.reserve(truth.size());
  std::vector<std::optional<Vector>> meas(n);
  for (int t = 0; t < sc.frames; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    for (std::size_t i = 0; i < n; ++i) meas[i] = Vector::Constant(1, readings[i][ti]);
    const PipelineFrame pf = pipeline.step(t, meas);

    SimFrame f;
    f.frame = t;
    f.truth = truth[ti];
    f.sensor.resize(n);
    f.expert.resize(n);
    f.w_M.resize(n);
    f.w_d.resize(n);
    f.rvv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      f.sensor[i] = readings[i][ti];
      f.expert[i] = pf.reports[i].posterior.mean[0];
      f.w_M[i] = pf.fused.per_detector[i].w_M;
      f.w_d[i] = pf.fused.per_detector[i].w_d;
      f.rvv[i] = pf.fused.per_detector[i].rvv_scale;
    }
    f.fused = pf.fused.state.mean[0];
    f.fused_var = pf.fused.state.cov(0, 0);
    record.frames.push_back(std::move(f));
  }
  return record;
}

SimSummary summarize(const SimRecord& record) {
  if (record.frames.empty()) throw ContractError("summarize: empty simulation record");
  const std::size_t n = record.sensors;
  SimSummary s;
  s.sensor_rmse.assign(n, 0.0);
  s.expert_rmse.assign(n, 0.0);
  s.mean_w_M.assign(n, 0.0);
  s.mean_w_d.assign(n, 0.0);
  s.mean_rvv.assign(n, 0.0);
  for (const SimFrame& f : record.frames) {
    for (std::size_t i = 0; i < n; ++i) {
      s.sensor_rmse[i] += (f.sensor[i] - f.truth) * (f.sensor[i] - f.truth);
      s.expert_rmse[i] += (f.expert[i] - f.truth) * (f.expert[i] - f.truth);
      s.mean_w_M[i] += f.w_M[i];
      s.mean_w_d[i] += f.w_d[i];
      s.mean_rvv[i] += f.rvv[i];
    }
    s.fused_rmse += (f.fused - f.truth) * (f.fused - f.truth);
  }
  const auto count = static_cast<double>(record.frames.size());
  for (std::size_t i = 0; i < n; ++i) {
    s.sensor_rmse[i] = std::sqrt(s.sensor_rmse[i] / count);
    s.expert_rmse[i] = std::sqrt(s.expert_rmse[i] / count);
    s.mean_w_M[i] /= count;
    s.mean_w_d[i] /= count;
    s.mean_rvv[i] /= count;
  }
  s.fused_rmse = std::sqrt(s.fused_rmse / count);
  return s;
}

}  // namespace habdf
