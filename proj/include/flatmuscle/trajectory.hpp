#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flatmuscle/core.hpp"

namespace flatmuscle {

// Joint trajectory with time derivatives up to third order.
struct TrajectorySample {
  Vec y;
  Vec yd;
  Vec ydd;
  Vec yddd;
};

class FlatTrajectory {
 public:
  using Sampler = std::function<TrajectorySample(double)>;

  FlatTrajectory() = default;
  FlatTrajectory(Sampler sampler, double horizon, int joints)
      : sampler_(std::move(sampler)), horizon_(horizon), joints_(joints) {}

  TrajectorySample sample(double t) const { return sampler_(t); }
  double horizon() const { return horizon_; }
  int joint_count() const { return joints_; }

 private:
  Sampler sampler_;
  double horizon_ = 0.0;
  int joints_ = 0;
};

inline FlatTrajectory constant_trajectory(const Vec& y0, double horizon) {
  const int n = static_cast<int>(y0.size());
  return FlatTrajectory(
      [y0, n](double) {
        return TrajectorySample{y0, Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
      },
      horizon, n);
}

struct SineComponent {
  double amplitude = 0.0;
  double frequency_hz = 0.0;
  double phase = 0.0;
  double offset = 0.0;
};

inline FlatTrajectory multi_joint_sinusoid(
    std::vector<std::vector<SineComponent>> per_joint, double horizon) {
  const int n = static_cast<int>(per_joint.size());
  return FlatTrajectory(
      [per_joint = std::move(per_joint), n](double t) {
        TrajectorySample s{Vec::Zero(n), Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
        for (int j = 0; j < n; ++j) {
          for (const auto& c : per_joint[j]) {
            const double w = 2.0 * M_PI * c.frequency_hz;
            const double ph = w * t + c.phase;
            s.y[j] += c.offset + c.amplitude * std::sin(ph);
            s.yd[j] += c.amplitude * w * std::cos(ph);
            s.ydd[j] += -c.amplitude * w * w * std::sin(ph);
            s.yddd[j] += -c.amplitude * w * w * w * std::cos(ph);
          }
        }
        return s;
      },
      horizon, n);
}

inline FlatTrajectory sinusoid_trajectory(std::vector<SineComponent> components,
                                          double horizon) {
  return multi_joint_sinusoid({std::move(components)}, horizon);
}

// Piecewise-quintic spline through uniformly sampled joint positions.
// Nodal first and second derivatives come from five-point finite-difference
// stencils, then each interval is the unique quintic matching position,
// velocity, and acceleration at both ends.
class QuinticSpline {
 public:
  QuinticSpline(std::vector<double> times, std::vector<Vec> values)
      : t_(std::move(times)), p_(std::move(values)) {
    const std::size_t count = t_.size();
    if (count < 5) throw ConfigError("trajectory: need at least 5 samples");
    h_ = t_[1] - t_[0];
    if (h_ <= 0.0) throw ConfigError("trajectory: time column must increase");
    for (std::size_t k = 1; k + 1 < count; ++k) {
      if (std::abs((t_[k + 1] - t_[k]) - h_) > 1e-9 * std::max(1.0, h_))
        throw ConfigError("trajectory: sample grid must be uniform");
    }
    n_ = static_cast<int>(p_[0].size());
    estimate_derivatives();
    validate_consistency();
  }

  int joint_count() const { return n_; }
  double duration() const { return t_.back() - t_.front(); }

  TrajectorySample sample(double t) const {
    const double tc = std::clamp(t, t_.front(), t_.back());
    std::size_t k = static_cast<std::size_t>((tc - t_.front()) / h_);
    k = std::min(k, t_.size() - 2);
    const double s = (tc - t_[k]) / h_;
    TrajectorySample out{Vec::Zero(n_), Vec::Zero(n_), Vec::Zero(n_), Vec::Zero(n_)};
    for (int j = 0; j < n_; ++j) {
      const auto c = interval_coeffs(k, j);
      double y = 0.0, y1 = 0.0, y2 = 0.0, y3 = 0.0;
      for (int d = 5; d >= 0; --d) y = y * s + c[d];
      for (int d = 5; d >= 1; --d) y1 = y1 * s + d * c[d];
      for (int d = 5; d >= 2; --d) y2 = y2 * s + d * (d - 1) * c[d];
      for (int d = 5; d >= 3; --d) y3 = y3 * s + d * (d - 1) * (d - 2) * c[d];
      out.y[j] = y;
      out.yd[j] = y1 / h_;
      out.ydd[j] = y2 / (h_ * h_);
      out.yddd[j] = y3 / (h_ * h_ * h_);
    }
    return out;
  }

 private:
  std::array<double, 6> interval_coeffs(std::size_t k, int j) const {
    const double p0 = p_[k][j], p1 = p_[k + 1][j];
    const double v0 = v_[k][j] * h_, v1 = v_[k + 1][j] * h_;
    const double a0 = a_[k][j] * h_ * h_, a1 = a_[k + 1][j] * h_ * h_;
    const double d = p1 - p0;
    return {p0,
            v0,
            0.5 * a0,
            10.0 * d - 6.0 * v0 - 4.0 * v1 - 1.5 * a0 + 0.5 * a1,
            -15.0 * d + 8.0 * v0 + 7.0 * v1 + 1.5 * a0 - a1,
            6.0 * d - 3.0 * v0 - 3.0 * v1 - 0.5 * a0 + 0.5 * a1};
  }

  void estimate_derivatives() {
    const std::size_t count = t_.size();
    v_.assign(count, Vec::Zero(n_));
    a_.assign(count, Vec::Zero(n_));
    auto y = [&](std::size_t k) -> const Vec& { return p_[k]; };
    for (std::size_t k = 0; k < count; ++k) {
      if (k >= 2 && k + 2 < count) {
        v_[k] = (-y(k + 2) + 8.0 * y(k + 1) - 8.0 * y(k - 1) + y(k - 2)) / (12.0 * h_);
        a_[k] = (-y(k + 2) + 16.0 * y(k + 1) - 30.0 * y(k) + 16.0 * y(k - 1) - y(k - 2)) /
                (12.0 * h_ * h_);
      } else if (k < 2) {
        v_[k] = (-25.0 * y(k) + 48.0 * y(k + 1) - 36.0 * y(k + 2) + 16.0 * y(k + 3) -
                 3.0 * y(k + 4)) /
                (12.0 * h_);
        a_[k] = (2.0 * y(k) - 5.0 * y(k + 1) + 4.0 * y(k + 2) - y(k + 3)) / (h_ * h_);
      } else {
        v_[k] = (25.0 * y(k) - 48.0 * y(k - 1) + 36.0 * y(k - 2) - 16.0 * y(k - 3) +
                 3.0 * y(k - 4)) /
                (12.0 * h_);
        a_[k] = (2.0 * y(k) - 5.0 * y(k - 1) + 4.0 * y(k - 2) - y(k - 3)) / (h_ * h_);
      }
    }
  }

  // The fitted velocities must agree with a plain central difference of the
  // positions; rejects grids that are too coarse for the signal.
  void validate_consistency() const {
    double scale = 1.0;
    for (const auto& v : v_) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    for (std::size_t k = 1; k + 1 < t_.size(); ++k) {
      const Vec fd = (p_[k + 1] - p_[k - 1]) / (2.0 * h_);
      if ((fd - v_[k]).cwiseAbs().maxCoeff() > 1e-4 * scale)
        throw ConfigError("trajectory: positions and fitted velocities disagree at t=" +
                          std::to_string(t_[k]));
    }
  }

  std::vector<double> t_;
  std::vector<Vec> p_;
  std::vector<Vec> v_;
  std::vector<Vec> a_;
  double h_ = 0.0;
  int n_ = 0;
};

// CSV with header "t,y1,...,yn"; derivatives are fitted on load.
inline FlatTrajectory load_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  int columns = 1;
  for (char c : line) columns += (c == ',');
  if (columns < 2) throw ConfigError(path + ": expected columns t,y1,...");
  const int n = columns - 1;

  std::vector<double> times;
  std::vector<Vec> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vec row(n);
    double t = 0.0;
    for (int c = 0; c < columns; ++c) {
      if (!std::getline(ss, cell, ','))
        throw ConfigError(path + ":" + std::to_string(lineno) + ": missing column " +
                          std::to_string(c + 1));
      try {
        const double x = std::stod(cell);
        if (c == 0) t = x;
        else row[c - 1] = x;
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" +
                          cell + "'");
      }
    }
    times.push_back(t);
    values.push_back(row);
  }
  auto spline = std::make_shared<QuinticSpline>(std::move(times), std::move(values));
  const double horizon = spline->duration();
  return FlatTrajectory([spline](double t) { return spline->sample(t); }, horizon,
                        spline->joint_count());
}

}  // namespace flatmuscle
