#include "dgcg/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace dgcg {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_same_length(const Curve& a, const Curve& b) {
  if (a.nodes.size() != b.nodes.size())
    throw std::invalid_argument("curves have different node counts");
}

}  // namespace

TimeGrid::TimeGrid(int intervals) : intervals_(intervals) {
  if (intervals < 1) throw std::invalid_argument("TimeGrid needs at least one interval");
}

Vec2 Curve::eval(double t) const {
  if (nodes.empty()) throw std::invalid_argument("empty curve");
  const int T = intervals();
  if (T == 0) return nodes.front();
  t = std::clamp(t, 0.0, 1.0);
  const double s = t * T;
  int i = std::min(static_cast<int>(s), T - 1);
  const double tau = s - i;
  return (1.0 - tau) * nodes[i] + tau * nodes[i + 1];
}

Curve linear_curve(Vec2 from, Vec2 to, const TimeGrid& grid) {
  Curve c;
  c.nodes.reserve(grid.nodes());
  for (int i = 0; i < grid.nodes(); ++i) {
    const double t = grid.t(i);
    c.nodes.push_back((1.0 - t) * from + t * to);
  }
  return c;
}

double curve_distance(const Curve& a, const Curve& b) {
  check_same_length(a, b);
  double d = 0.0;
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    d = std::max(d, norm(a.nodes[i] - b.nodes[i]));
  return d;
}

double kinetic_energy(const Curve& curve, const TimeGrid& grid) {
  if (curve.intervals() != grid.intervals())
    throw std::invalid_argument("curve node count does not match grid");
  const int T = grid.intervals();
  double sum = 0.0;
  for (int i = 0; i < T; ++i) sum += norm2(curve.nodes[i + 1] - curve.nodes[i]);
  return T * sum;
}

double curve_energy(const Curve& curve, double alpha, double beta) {
  if (alpha <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("alpha and beta must be positive");
  const TimeGrid grid(curve.intervals());
  return 0.5 * beta * kinetic_energy(curve, grid) + alpha;
}

double normalization(const Curve& curve, double alpha, double beta) {
  return 1.0 / curve_energy(curve, alpha, beta);
}

double intensity(double weight, const Curve& curve, double alpha, double beta) {
  return weight * normalization(curve, alpha, beta);
}

double SparseMeasure::regularizer() const {
  double sum = 0.0;
  for (const Atom& a : atoms) sum += a.weight;
  return sum;
}

double SparseMeasure::intensity_of(std::size_t j) const {
  return intensity(atoms.at(j).weight, atoms.at(j).curve, alpha, beta);
}

double SparseMeasure::mass_at_time(int i, const TimeGrid& grid) const {
  if (i < 0 || i >= grid.nodes()) throw std::invalid_argument("time index out of range");
  double mass = 0.0;
  for (const Atom& a : atoms) mass += intensity(a.weight, a.curve, alpha, beta);
  return mass;
}

void SparseMeasure::add_atom(double weight, Curve curve) {
  if (!(weight > 0.0)) throw std::invalid_argument("atom weight must be positive");
  for (const Atom& a : atoms) {
    if (a.curve.nodes.size() == curve.nodes.size() &&
        curve_distance(a.curve, curve) <= curve_identity_tol)
      throw std::invalid_argument("atom duplicates an existing curve");
  }
  atoms.push_back(Atom{weight, std::move(curve)});
}

std::size_t SparseMeasure::delete_light_atoms(double threshold) {
  const std::size_t before = atoms.size();
  std::erase_if(atoms, [threshold](const Atom& a) { return a.weight <= threshold; });
  return before - atoms.size();
}

std::string curves_to_csv(const std::vector<Curve>& curves) {
  std::string out;
  for (std::size_t j = 0; j < curves.size(); ++j) {
    out += std::to_string(j);
    for (const Vec2& p : curves[j].nodes) {
      out += ',';
      out += format_double(p.x);
      out += ',';
      out += format_double(p.y);
    }
    out += '\n';
  }
  return out;
}

std::string measure_to_json(const SparseMeasure& measure) {
  nlohmann::json j;
  j["alpha"] = measure.alpha;
  j["beta"] = measure.beta;
  j["atoms"] = nlohmann::json::array();
  for (std::size_t k = 0; k < measure.atoms.size(); ++k) {
    const Atom& a = measure.atoms[k];
    nlohmann::json ja;
    ja["weight"] = a.weight;
    ja["intensity"] = measure.intensity_of(k);
    auto nodes = nlohmann::json::array();
    for (const Vec2& p : a.curve.nodes) nodes.push_back({p.x, p.y});
    ja["nodes"] = std::move(nodes);
    j["atoms"].push_back(std::move(ja));
  }
  return j.dump(2);
}

SparseMeasure measure_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  SparseMeasure m;
  m.alpha = j.at("alpha").get<double>();
  m.beta = j.at("beta").get<double>();
  for (const auto& ja : j.at("atoms")) {
    Curve c;
    for (const auto& p : ja.at("nodes"))
      c.nodes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    m.add_atom(ja.at("weight").get<double>(), std::move(c));
  }
  return m;
}

}  // namespace dgcg
