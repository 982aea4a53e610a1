#pragma once

#include <complex>
#include <string>
#include <vector>

#include "dgcg/geometry.hpp"

namespace dgcg {

using Complex = std::complex<double>;

// One data vector per sample time; entries live in the realification of C^n
// with inner product Re<u,v> / n.
using MeasurementVector = std::vector<Complex>;
using Measurements = std::vector<MeasurementVector>;

// Per sample time, the list of 2-D frequencies the Fourier transform is
// sampled at.
struct FrequencySchedule {
  std::vector<std::vector<Vec2>> freqs;

  int times() const { return static_cast<int>(freqs.size()); }
  int count(int i) const { return static_cast<int>(freqs.at(i).size()); }
};

// C^{1,1} spatial cutoff: quintic ramps on [0,0.1] and [0.9,1], identically 1
// on [0.1,0.9], zero outside [0,1].
double cutoff(double z);
double cutoff_deriv(double z);

// Cut-off Fourier kernel psi_i(x) = (exp(-2*pi*i x.S_k) cutoff(x1) cutoff(x2))_k
// and its spatial gradient. Both vanish outside the unit square.
MeasurementVector kernel(const FrequencySchedule& schedule, int i, Vec2 x);
struct KernelGradient {
  MeasurementVector dx;
  MeasurementVector dy;
};
KernelGradient kernel_grad(const FrequencySchedule& schedule, int i, Vec2 x);

// Inner product and squared norm of the per-time data space: Re<u,v> / n.
double h_inner(const MeasurementVector& u, const MeasurementVector& v);
double h_norm2(const MeasurementVector& u);

// Forward measurement of a sparse measure at sample time i:
// sum_j weight_j a_j psi_i(curve_j(t_i)).
MeasurementVector apply_forward(const SparseMeasure& measure,
                                const FrequencySchedule& schedule,
                                const TimeGrid& grid, int i);

// Pre-adjoint evaluation (K h)(x) = Re<psi_i(x), h> / n_i, and its spatial
// gradient.
double apply_preadjoint(const FrequencySchedule& schedule, int i,
                        const MeasurementVector& h, Vec2 x);
struct ScalarGradient {
  double value = 0.0;
  Vec2 grad;
};
ScalarGradient apply_preadjoint_grad(const FrequencySchedule& schedule, int i,
                                     const MeasurementVector& h, Vec2 x);

// Time-constant Archimedean spiral: n frequencies with radius growing by
// `pitch` per turn up to max_radius; the first sample sits at the origin.
FrequencySchedule spiral_schedule(int times, int n, double pitch = 4.0,
                                  double max_radius = 4.0);

// Frequencies on a line through the origin rotating by pi/line_count per
// sample time: S_{i,k} = R(theta_i) (h (k - (n_i+1)/2), 0), k = 1..n_i.
FrequencySchedule rotating_line_schedule(int times, int line_count,
                                         double spacing, int per_time);

// JSON layouts: schedule [[ [fx,fy], ...] per time];
// measurements [[ [re,im], ...] per time].
std::string schedule_to_json(const FrequencySchedule& schedule);
FrequencySchedule schedule_from_json(const std::string& text);
std::string measurements_to_json(const Measurements& data);
Measurements measurements_from_json(const std::string& text);

}  // namespace dgcg
