#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace dgcg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return s * a; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }

// Uniform grid of sample times t_i = i/T, i = 0..T.
class TimeGrid {
 public:
  explicit TimeGrid(int intervals);

  int intervals() const { return intervals_; }
  int nodes() const { return intervals_ + 1; }
  double t(int i) const { return static_cast<double>(i) / intervals_; }

 private:
  int intervals_;
};

// Piecewise-linear trajectory with one node per sample time.
struct Curve {
  std::vector<Vec2> nodes;

  Curve() = default;
  explicit Curve(std::vector<Vec2> n) : nodes(std::move(n)) {}

  int intervals() const { return static_cast<int>(nodes.size()) - 1; }

  // Linear interpolation between nodes; t is clamped to [0,1].
  Vec2 eval(double t) const;
};

// Samples the segment from -> to on the grid nodes.
Curve linear_curve(Vec2 from, Vec2 to, const TimeGrid& grid);

// Largest node-wise distance; curves must have equal node counts.
double curve_distance(const Curve& a, const Curve& b);

// Node arrays closer than curve_identity_tol are treated as the same curve.
inline constexpr double curve_identity_tol = 1e-6;

// Weights at or below this threshold are dropped after coefficient solves.
inline constexpr double weight_deletion_threshold = 1e-10;

// Dirichlet energy of the piecewise-linear interpolant:
// integral of |velocity|^2 over [0,1] = T * sum_i |node_{i+1} - node_i|^2.
double kinetic_energy(const Curve& curve, const TimeGrid& grid);

// L(curve) = beta/2 * kinetic_energy + alpha.
double curve_energy(const Curve& curve, double alpha, double beta);

// Normalization a = 1/L that scales an atom to unit regularizer value.
double normalization(const Curve& curve, double alpha, double beta);

// Per-time signal strength of an atom: weight * normalization.
double intensity(double weight, const Curve& curve, double alpha, double beta);

struct Atom {
  double weight = 0.0;
  Curve curve;
};

// Conic combination of normalized atoms; the solver's iterate.
struct SparseMeasure {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<Atom> atoms;

  bool empty() const { return atoms.empty(); }
  std::size_t size() const { return atoms.size(); }

  // Regularizer value J = sum of weights (linear on conic combinations).
  double regularizer() const;

  double intensity_of(std::size_t j) const;

  // Total spatial mass at sample time i; constant in i by construction.
  double mass_at_time(int i, const TimeGrid& grid) const;

  // Rejects non-positive weights and curves duplicating an existing atom.
  void add_atom(double weight, Curve curve);

  // Removes atoms with weight <= threshold; returns how many were dropped.
  std::size_t delete_light_atoms(double threshold = weight_deletion_threshold);
};

// CSV rows: index, x_0, y_0, ..., x_T, y_T.
std::string curves_to_csv(const std::vector<Curve>& curves);

// JSON layout: {alpha, beta, atoms: [{weight, intensity, nodes: [[x,y],...]}]}
std::string measure_to_json(const SparseMeasure& measure);
SparseMeasure measure_from_json(const std::string& text);

}  // namespace dgcg
