#include "fsi/norms.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

// Splits v into per-component scalar vectors over the interior interface nodes.
std::vector<Vec> components_of(const InterfaceGram& gram, const Vec& v) {
  const int n = gram.size();
  if (v.size() == n) return {v};
  if (v.size() != 2 * n) {
    throw ShapeError("interface vector has " + std::to_string(v.size()) + " entries, expected " +
                     std::to_string(n) + " or " + std::to_string(2 * n));
  }
  std::vector<Vec> out(2, Vec(n));
  for (int i = 0; i < n; ++i) {
    out[0][i] = v[2 * i];
    out[1][i] = v[2 * i + 1];
  }
  return out;
}

double weighted_coefficients(const InterfaceGram& gram, double power, const Vec& c) {
  double sum = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    sum += std::pow(1.0 + gram.eigenvalues()[i], power) * c[i] * c[i];
  }
  return sum;
}

double half_squared(const InterfaceGram& gram, const Vec& v) {
  double sum = 0.0;
  for (const auto& comp : components_of(gram, v)) {
    sum += weighted_coefficients(gram, 0.5, gram.coefficients(comp));
  }
  return sum;
}

double l2_trace_squared(const InterfaceGram& gram, const Vec& v) {
  double sum = 0.0;
  for (const auto& comp : components_of(gram, v)) sum += gram.l2_squared(comp);
  return sum;
}

double h1_trace_squared(const InterfaceGram& gram, const Vec& v) {
  double sum = 0.0;
  for (const auto& comp : components_of(gram, v)) {
    sum += comp.dot((gram.mass() + gram.stiff()) * comp);
  }
  return sum;
}

void require_levels(const TimeGrid& grid, int levels) {
  if (levels != grid.n_steps() + 1) {
    throw ShapeError("series has " + std::to_string(levels) + " levels, time grid needs " +
                     std::to_string(grid.n_steps() + 1));
  }
}

}  // namespace

InterfaceGram::InterfaceGram(int nodes, const std::vector<std::array<int, 3>>& segments,
                             const std::vector<double>& lengths) {
  Eigen::MatrixXd m_full = Eigen::MatrixXd::Zero(nodes, nodes);
  Eigen::MatrixXd k_full = Eigen::MatrixXd::Zero(nodes, nodes);
  Eigen::Matrix3d m_ref, k_ref;
  m_ref << 4, 2, -1, 2, 16, 2, -1, 2, 4;
  k_ref << 7, -8, 1, -8, 16, -8, 1, -8, 7;
  for (std::size_t e = 0; e < segments.size(); ++e) {
    const double len = lengths[e];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        m_full(segments[e][i], segments[e][j]) += len / 30.0 * m_ref(i, j);
        k_full(segments[e][i], segments[e][j]) += k_ref(i, j) / (3.0 * len);
      }
    }
  }
  const int n = nodes - 2;
  if (n < 1) throw GeometryError("interface has no interior nodes");
  mass_ = m_full.block(1, 1, n, n);
  stiff_ = k_full.block(1, 1, n, n);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(stiff_, mass_);
  if (solver.info() != Eigen::Success) throw NumericalFailure("interface eigensolve failed");
  lambda_ = solver.eigenvalues().cwiseMax(0.0);
  phi_ = solver.eigenvectors();
}

InterfaceGram::InterfaceGram(const InterfaceDofs& dofs)
    : InterfaceGram(dofs.size(),
                    [&] {
                      std::vector<std::array<int, 3>> s;
                      for (const auto& f : dofs.facets) s.push_back({f.a, f.mid, f.b});
                      return s;
                    }(),
                    [&] {
                      std::vector<double> l;
                      for (const auto& f : dofs.facets) l.push_back(f.length);
                      return l;
                    }()) {}

InterfaceGram InterfaceGram::uniform(int segments, double length) {
  if (segments < 1 || !(length > 0.0)) throw DomainError("uniform interface needs segments >= 1");
  std::vector<std::array<int, 3>> s;
  for (int e = 0; e < segments; ++e) s.push_back({2 * e, 2 * e + 1, 2 * e + 2});
  return InterfaceGram(2 * segments + 1, s,
                       std::vector<double>(static_cast<std::size_t>(segments), length / segments));
}

Vec InterfaceGram::coefficients(const Vec& v) const { return phi_.transpose() * (mass_ * v); }

Vec InterfaceGram::riesz_half(const Vec& v) const {
  const auto comps = components_of(*this, v);
  const int stride = static_cast<int>(comps.size());
  const Vec weight = (1.0 + lambda_.array()).sqrt().matrix();
  Vec out(v.size());
  for (int c = 0; c < stride; ++c) {
    const Vec g = mass_ * (phi_ * coefficients(comps[static_cast<std::size_t>(c)]).cwiseProduct(weight));
    for (int i = 0; i < size(); ++i) out[stride * i + c] = g[i];
  }
  return out;
}

double InterfaceGram::l2_squared(const Vec& v) const { return v.dot(mass_ * v); }

double fractional_norm(const InterfaceGram& gram, double s, const Vec& v) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("fractional order must lie in [0,1]");
  double sum = 0.0;
  for (const auto& comp : components_of(gram, v)) {
    sum += weighted_coefficients(gram, s, gram.coefficients(comp));
  }
  return std::sqrt(sum);
}

double dual_half_norm(const InterfaceGram& gram, const Vec& g) {
  double sum = 0.0;
  for (const auto& comp : components_of(gram, g)) {
    sum += weighted_coefficients(gram, -0.5, gram.eigenvectors().transpose() * comp);
  }
  return std::sqrt(sum);
}

std::string csv_row(const NormReport& r) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << r.name << ',' << r.value;
  for (std::size_t k = 0; k < 3; ++k) {
    os << ',';
    if (k < r.components.size()) os << r.components[k];
  }
  return os.str();
}

NormReport x_norm(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& u) {
  require_levels(grid, u.levels());
  if (u.role() != TraceRole::Displacement) throw PreconditionError("x_norm needs a displacement trace");
  const double scale = 1.0 + u.max_abs();
  if (u[0].size() > 0 && u[0].cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw PreconditionError("x_norm: displacement trace must vanish at t = 0");
  }
  const int N = grid.n_steps();
  const double dt = grid.dt();
  double gagliardo = 0.0;
  for (int m = 1; m <= N; ++m) {
    for (int n = 1; n <= N; ++n) {
      if (m == n) continue;
      const double gap = (m - n) * dt;
      gagliardo += dt * dt * l2_trace_squared(gram, u[m] - u[n]) / (gap * gap);
    }
  }
  double l2 = 0.0, half = 0.0;
  for (int n = 1; n <= N; ++n) {
    l2 += dt * l2_trace_squared(gram, u[n]);
    half += dt * half_squared(gram, u[n]);
  }
  return {"x_norm", std::sqrt(gagliardo + l2 + half),
          {std::sqrt(gagliardo), std::sqrt(l2), std::sqrt(half)}};
}

double dual_series_norm(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& g) {
  require_levels(grid, g.levels());
  double sum = 0.0;
  for (int n = 1; n <= grid.n_steps(); ++n) {
    const double d = dual_half_norm(gram, g[n]);
    sum += grid.dt() * d * d;
  }
  return std::sqrt(sum);
}

double l2_series_norm(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& u) {
  require_levels(grid, u.levels());
  double sum = 0.0;
  for (int n = 1; n <= grid.n_steps(); ++n) sum += grid.dt() * l2_trace_squared(gram, u[n]);
  return std::sqrt(sum);
}

double h1_series_norm(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& u) {
  require_levels(grid, u.levels());
  const double dt = grid.dt();
  double sum = 0.0;
  for (int n = 1; n <= grid.n_steps(); ++n) {
    const Vec diff = (u[n] - u[n - 1]) / dt;
    sum += dt * (l2_trace_squared(gram, diff) + h1_trace_squared(gram, u[n]));
  }
  return std::sqrt(sum);
}

double bochner_norm(BochnerKind kind, const TimeGrid& grid, const SpMat& mass, const SpMat& stiff,
                    const std::vector<Vec>& series) {
  require_levels(grid, static_cast<int>(series.size()));
  const double dt = grid.dt();
  double sum = 0.0;
  for (int n = 1; n <= grid.n_steps(); ++n) {
    const auto& v = series[static_cast<std::size_t>(n)];
    if (v.size() != mass.rows()) throw ShapeError("bochner_norm: field size does not match Gram");
    switch (kind) {
      case BochnerKind::L2L2: sum += dt * v.dot(mass * v); break;
      case BochnerKind::L2H1: sum += dt * (v.dot(mass * v) + v.dot(stiff * v)); break;
      case BochnerKind::H1L2: {
        const Vec d = (v - series[static_cast<std::size_t>(n - 1)]) / dt;
        sum += dt * d.dot(mass * d);
        break;
      }
    }
  }
  return std::sqrt(sum);
}

}  // namespace fsi
