#include "dgcg/forward.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace dgcg {

namespace {

constexpr double ramp_width = 0.1;
constexpr double two_pi = 2.0 * std::numbers::pi;

// Quintic smoothstep 10u^3 - 15u^4 + 6u^5 on [0,1]; C^2 with flat ends.
double smoothstep(double u) { return ((6.0 * u - 15.0) * u + 10.0) * u * u * u; }
double smoothstep_deriv(double u) { return ((30.0 * u - 60.0) * u + 30.0) * u * u; }

void check_length(const FrequencySchedule& schedule, int i,
                  const MeasurementVector& h) {
  if (static_cast<int>(h.size()) != schedule.count(i))
    throw std::invalid_argument("measurement vector length does not match schedule");
}

}  // namespace

double cutoff(double z) {
  if (z < 0.0 || z > 1.0) return 0.0;
  if (z < ramp_width) return smoothstep(z / ramp_width);
  if (z > 1.0 - ramp_width) return smoothstep((1.0 - z) / ramp_width);
  return 1.0;
}

double cutoff_deriv(double z) {
  if (z < 0.0 || z > 1.0) return 0.0;
  if (z < ramp_width) return smoothstep_deriv(z / ramp_width) / ramp_width;
  if (z > 1.0 - ramp_width) return -smoothstep_deriv((1.0 - z) / ramp_width) / ramp_width;
  return 0.0;
}

MeasurementVector kernel(const FrequencySchedule& schedule, int i, Vec2 x) {
  const auto& freqs = schedule.freqs.at(i);
  MeasurementVector psi(freqs.size());
  const double chi = cutoff(x.x) * cutoff(x.y);
  if (chi == 0.0) return psi;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double phase = -two_pi * dot(x, freqs[k]);
    psi[k] = Complex(chi * std::cos(phase), chi * std::sin(phase));
  }
  return psi;
}

KernelGradient kernel_grad(const FrequencySchedule& schedule, int i, Vec2 x) {
  const auto& freqs = schedule.freqs.at(i);
  KernelGradient g;
  g.dx.assign(freqs.size(), Complex(0.0, 0.0));
  g.dy.assign(freqs.size(), Complex(0.0, 0.0));
  const double cx = cutoff(x.x), cy = cutoff(x.y);
  const double dcx = cutoff_deriv(x.x), dcy = cutoff_deriv(x.y);
  if (cx * cy == 0.0 && dcx * cy == 0.0 && cx * dcy == 0.0) return g;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double phase = -two_pi * dot(x, freqs[k]);
    const Complex e(std::cos(phase), std::sin(phase));
    const Complex phase_dx = Complex(0.0, -two_pi * freqs[k].x) * e * (cx * cy);
    const Complex phase_dy = Complex(0.0, -two_pi * freqs[k].y) * e * (cx * cy);
    g.dx[k] = phase_dx + e * (dcx * cy);
    g.dy[k] = phase_dy + e * (cx * dcy);
  }
  return g;
}

double h_inner(const MeasurementVector& u, const MeasurementVector& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("h_inner: mismatched lengths");
  if (u.empty()) throw std::invalid_argument("h_inner: empty vectors");
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k)
    sum += u[k].real() * v[k].real() + u[k].imag() * v[k].imag();
  return sum / static_cast<double>(u.size());
}

double h_norm2(const MeasurementVector& u) { return h_inner(u, u); }

MeasurementVector apply_forward(const SparseMeasure& measure,
                                const FrequencySchedule& schedule,
                                const TimeGrid& grid, int i) {
  MeasurementVector out(schedule.count(i), Complex(0.0, 0.0));
  const double t = grid.t(i);
  for (const Atom& a : measure.atoms) {
    if (a.curve.intervals() != grid.intervals())
      throw std::invalid_argument("atom curve does not match grid");
    const double scale =
        a.weight * normalization(a.curve, measure.alpha, measure.beta);
    const MeasurementVector psi = kernel(schedule, i, a.curve.eval(t));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += scale * psi[k];
  }
  return out;
}

double apply_preadjoint(const FrequencySchedule& schedule, int i,
                        const MeasurementVector& h, Vec2 x) {
  check_length(schedule, i, h);
  const auto& freqs = schedule.freqs.at(i);
  const double chi = cutoff(x.x) * cutoff(x.y);
  if (chi == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double phase = -two_pi * dot(x, freqs[k]);
    // Re(psi_k conj(h_k)) with psi_k = chi * exp(i phase)
    sum += chi * (std::cos(phase) * h[k].real() + std::sin(phase) * h[k].imag());
  }
  return sum / static_cast<double>(freqs.size());
}

ScalarGradient apply_preadjoint_grad(const FrequencySchedule& schedule, int i,
                                     const MeasurementVector& h, Vec2 x) {
  check_length(schedule, i, h);
  const auto& freqs = schedule.freqs.at(i);
  ScalarGradient out;
  const double cx = cutoff(x.x), cy = cutoff(x.y);
  const double dcx = cutoff_deriv(x.x), dcy = cutoff_deriv(x.y);
  const double chi = cx * cy;
  if (chi == 0.0 && dcx * cy == 0.0 && cx * dcy == 0.0) return out;
  double v = 0.0, gx = 0.0, gy = 0.0;
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double phase = -two_pi * dot(x, freqs[k]);
    const double c = std::cos(phase), s = std::sin(phase);
    // re/im of exp(i phase) conj(h_k)
    const double re = c * h[k].real() + s * h[k].imag();
    const double im = s * h[k].real() - c * h[k].imag();
    v += chi * re;
    // d/dx Re(e^{i phase} conj(h)) = -2 pi f_x * (-im) ... chain rule on phase
    const double dre_dphase = -im;
    gx += chi * dre_dphase * (-two_pi * freqs[k].x) + dcx * cy * re;
    gy += chi * dre_dphase * (-two_pi * freqs[k].y) + cx * dcy * re;
  }
  const double n = static_cast<double>(freqs.size());
  out.value = v / n;
  out.grad = {gx / n, gy / n};
  return out;
}

FrequencySchedule spiral_schedule(int times, int n, double pitch,
                                  double max_radius) {
  if (times < 1 || n < 1) throw std::invalid_argument("spiral_schedule: bad sizes");
  if (pitch <= 0.0 || max_radius <= 0.0)
    throw std::invalid_argument("spiral_schedule: pitch and max_radius must be positive");
  std::vector<Vec2> freqs;
  freqs.reserve(n);
  const double theta_max = two_pi * max_radius / pitch;
  for (int k = 0; k < n; ++k) {
    const double theta = n == 1 ? 0.0 : theta_max * k / (n - 1);
    const double r = pitch * theta / two_pi;
    freqs.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  FrequencySchedule schedule;
  schedule.freqs.assign(times, freqs);
  return schedule;
}

FrequencySchedule rotating_line_schedule(int times, int line_count,
                                         double spacing, int per_time) {
  if (times < 1 || line_count < 1 || per_time < 1 || spacing <= 0.0)
    throw std::invalid_argument("rotating_line_schedule: bad parameters");
  FrequencySchedule schedule;
  schedule.freqs.resize(times);
  for (int i = 0; i < times; ++i) {
    const double theta = std::numbers::pi * i / line_count;
    const double c = std::cos(theta), s = std::sin(theta);
    auto& row = schedule.freqs[i];
    row.reserve(per_time);
    for (int k = 1; k <= per_time; ++k) {
      const double u = spacing * (k - 0.5 * (per_time + 1));
      // rotation matrix [[cos, sin], [-sin, cos]] applied to (u, 0)
      row.push_back({c * u, -s * u});
    }
  }
  return schedule;
}

std::string schedule_to_json(const FrequencySchedule& schedule) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : schedule.freqs) {
    nlohmann::json jr = nlohmann::json::array();
    for (const Vec2& f : row) jr.push_back({f.x, f.y});
    j.push_back(std::move(jr));
  }
  return j.dump();
}

FrequencySchedule schedule_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  FrequencySchedule schedule;
  for (const auto& jr : j) {
    std::vector<Vec2> row;
    for (const auto& f : jr) row.push_back({f.at(0).get<double>(), f.at(1).get<double>()});
    if (row.empty()) throw std::invalid_argument("schedule time with no frequencies");
    schedule.freqs.push_back(std::move(row));
  }
  if (schedule.freqs.empty()) throw std::invalid_argument("empty schedule");
  return schedule;
}

std::string measurements_to_json(const Measurements& data) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : data) {
    nlohmann::json jr = nlohmann::json::array();
    for (const Complex& v : row) jr.push_back({v.real(), v.imag()});
    j.push_back(std::move(jr));
  }
  return j.dump();
}

Measurements measurements_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Measurements data;
  for (const auto& jr : j) {
    MeasurementVector row;
    for (const auto& v : jr)
      row.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    data.push_back(std::move(row));
  }
  return data;
}

}  // namespace dgcg
