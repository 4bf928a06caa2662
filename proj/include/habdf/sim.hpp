#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "habdf/fusion.hpp"

namespace habdf {

/// y'' + 2 zeta wn y' + wn^2 y = gain wn^2 u, sampled every dt seconds.
struct SecondOrderPlant {
  double natural_freq = 1.0;  // rad/s
  double damping = 0.7;
  double gain = 1.0;
  double dt = 0.05;  // s
};

void validate(const SecondOrderPlant& plant);

struct PlantState {
  double y = 0.0;
  double ydot = 0.0;
};

/// Zero-order-hold discretization x[k+1] = Phi x[k] + Gamma u[k] of the
/// companion form, computed with the matrix exponential.
struct DiscretePlant {
  Eigen::Matrix2d Phi;
  Eigen::Vector2d Gamma;
};

DiscretePlant discretize(const SecondOrderPlant& plant);

struct PlantStep {
  PlantState state;
  double output = 0.0;
};

PlantStep plant_step(const DiscretePlant& plant, const PlantState& state, double input);
PlantStep plant_step(const SecondOrderPlant& plant, const PlantState& state, double input);

/// Fault model added on top of a clean signal:
///   y[t] = clean[t] + N(0, noise_sigma) + spike_mag * Bernoulli(spike_prob)
///          + drift_rate * t + shock_offset * [shock_start <= t < shock_end]
struct FaultProfile {
  double noise_sigma = 0.0;
  double spike_prob = 0.0;
  double spike_mag = 0.0;
  double drift_rate = 0.0;
  double shock_offset = 0.0;
  std::int64_t shock_start = 0;
  std::int64_t shock_end = 0;
  std::uint64_t seed = 0;
};

void validate(const FaultProfile& profile);

std::vector<double> inject_faults(const std::vector<double>& clean, const FaultProfile& profile);

struct PidGains {
  double kp = 35.0;
  double ki = 3.4;
  double kd = 8.0;
  double dt = 1.0 / 30.0;
  double integral_limit = std::numeric_limits<double>::infinity();  // anti-windup clamp
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
};

struct PidStep {
  double command = 0.0;
  PidState state;
};

/// Positional PID: trapezoidal integral, backward-difference derivative.
PidStep pid_step(double error, const PidState& state, const PidGains& gains);

/// Pan axis of a camera mount: the angle integrates the servo command,
/// angle' = gain * (command + disturbance).
struct PanAxis {
  double gain = 0.05;
};

/// Closed-loop pan regulation of a target sitting at `target` (the image
/// error is target - angle) with a constant input disturbance switched on at
/// step `disturbance_at`. Returns the error before each controller update.
std::vector<double> run_pan_regulation(const PidGains& gains, const PanAxis& axis, double target,
                                       double disturbance, int disturbance_at, int steps);

/// Repeating set-point: hold +A, step to -A, ramp back to +A, hold +A; each
/// phase lasts a quarter of `period` samples.
struct SignalProfile {
  double amplitude = 10.0;
  int period = 400;
};

double setpoint_at(const SignalProfile& signal, std::int64_t t);

struct Scenario {
  int frames = 1000;
  std::uint64_t seed = 1;
  SecondOrderPlant plant;
  SignalProfile signal;
  std::vector<FaultProfile> sensors;  // seeds are derived from `seed`
  PipelineParams params;              // params.model.axes is forced to 1
  FusionConfig fusion;
};

struct SimFrame {
  std::int64_t frame = 0;
  double truth = 0.0;
  std::vector<double> sensor;
  std::vector<double> expert;
  std::vector<double> w_M;
  std::vector<double> w_d;
  std::vector<double> rvv;
  double fused = 0.0;
  double fused_var = 0.0;
};

struct SimRecord {
  std::size_t sensors = 0;
  std::vector<SimFrame> frames;
};

/// Seed of sensor `index`'s fault stream, mixed from the run seed so that
/// every sensor draws from its own stream.
std::uint64_t sensor_seed(std::uint64_t run_seed, std::size_t index);

SimRecord run_sim_experiment(const Scenario& scenario);

struct SimSummary {
  std::vector<double> sensor_rmse;
  std::vector<double> expert_rmse;
  double fused_rmse = 0.0;
  std::vector<double> mean_w_M;
  std::vector<double> mean_w_d;
  std::vector<double> mean_rvv;
};

SimSummary summarize(const SimRecord& record);

}  // namespace habdf
