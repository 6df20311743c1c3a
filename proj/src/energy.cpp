#include "energy.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "error.hpp"

namespace surfgrow {

void MaterialParams::check() const {
  for (double k : {k_stretch, k_shear, k_bend}) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw Error(ErrorCode::InvalidArgument, "material coefficients must be positive and finite");
    }
  }
}

void SolverConfig::check() const {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "solver dt must be positive");
  if (substeps_per_frame < 1) {
    throw Error(ErrorCode::InvalidArgument, "substeps_per_frame must be at least 1");
  }
  if (max_step_halvings < 0) {
    throw Error(ErrorCode::InvalidArgument, "max_step_halvings must be non-negative");
  }
}

namespace {

struct RestTriangle {
  Eigen::Matrix2d inv;  // inverse of the rest edge matrix
  double area;
};

RestTriangle rest_triangle(const Mesh& mesh, int f) {
  const double l01 = mesh.edge(mesh.he_edge(3 * f + 0)).rest_length;
  const double l12 = mesh.edge(mesh.he_edge(3 * f + 1)).rest_length;
  const double l20 = mesh.edge(mesh.he_edge(3 * f + 2)).rest_length;
  const double u = (l01 * l01 + l20 * l20 - l12 * l12) / (2.0 * l01);
  const double v2 = l20 * l20 - u * u;
  const double area = 0.5 * l01 * std::sqrt(std::max(v2, 0.0));
  if (!(v2 > 0.0) || area < kMinFaceArea) {
    throw Error(ErrorCode::DegenerateRest, "rest lengths of face " +
                                               std::to_string(mesh.face(f).id.value) +
                                               " violate the triangle inequality");
  }
  const double v = std::sqrt(v2);
  Eigen::Matrix2d inv;
  inv << 1.0 / l01, -u / (l01 * v), 0.0, 1.0 / v;
  return {inv, area};
}

Eigen::Matrix<double, 3, 2> current_edges(const Mesh& mesh, int f) {
  const auto& v = mesh.face(f).v;
  Eigen::Matrix<double, 3, 2> d;
  d.col(0) = mesh.position(v[1]) - mesh.position(v[0]);
  d.col(1) = mesh.position(v[2]) - mesh.position(v[0]);
  return d;
}

Eigen::Matrix2d deviatoric_green_strain(const Eigen::Matrix<double, 3, 2>& F) {
  Eigen::Matrix2d e = 0.5 * (F.transpose() * F - Eigen::Matrix2d::Identity());
  const double half_trace = 0.5 * e.trace();
  e(0, 0) -= half_trace;
  e(1, 1) -= half_trace;
  return e;
}

struct Hinge {
  int a, b, c, d;  // edge a->b in the first face (a, b, c); second face (b, a, d)
};

Hinge hinge_of(const Mesh& mesh, int e) {
  const int h = mesh.edge(e).he[0];
  const int t = mesh.edge(e).he[1];
  return {mesh.he_origin(h), mesh.he_dest(h), mesh.he_opposite_vertex(h),
          mesh.he_opposite_vertex(t)};
}

}  // namespace

Eigen::Matrix2d face_shear_tensor(const Mesh& mesh, int face) {
  const RestTriangle rest = rest_triangle(mesh, face);
  return deviatoric_green_strain(current_edges(mesh, face) * rest.inv);
}

double dihedral_angle(const Mesh& mesh, int edge) {
  if (mesh.is_boundary_edge(edge)) return 0.0;
  const Hinge k = hinge_of(mesh, edge);
  const Vec3& xa = mesh.position(k.a);
  const Vec3& xb = mesh.position(k.b);
  const Vec3 e = xb - xa;
  const Vec3 n0 = e.cross(mesh.position(k.c) - xa);
  const Vec3 n1 = (xa - xb).cross(mesh.position(k.d) - xb);
  const double len = e.norm();
  if (len == 0.0) return 0.0;
  return std::atan2(n0.cross(n1).dot(e) / len, n0.dot(n1));
}

EnergyBreakdown evaluate_energy(const Mesh& mesh, const MaterialParams& params,
                                std::vector<Vec3>* gradient, PerVertexEnergies* per_vertex) {
  const int nv = mesh.vertex_count();
  if (gradient) gradient->assign(nv, Vec3::Zero());
  if (per_vertex) {
    per_vertex->w_memb.assign(nv, 0.0);
    per_vertex->w_flex.assign(nv, 0.0);
  }
  EnergyBreakdown out;

  // Stretch: k_stretch (|e| - rest)^2 per edge.
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (!mesh.edge_alive(e)) continue;
    const auto& ed = mesh.edge(e);
    const Vec3 d = mesh.position(ed.v[1]) - mesh.position(ed.v[0]);
    const double len = d.norm();
    const double gap = len - ed.rest_length;
    const double energy = params.k_stretch * gap * gap;
    out.stretch += energy;
    if (per_vertex) {
      per_vertex->w_memb[ed.v[0]] += 0.5 * energy;
      per_vertex->w_memb[ed.v[1]] += 0.5 * energy;
    }
    if (gradient && len > 0.0) {
      const Vec3 g = (2.0 * params.k_stretch * gap / len) * d;
      (*gradient)[ed.v[1]] += g;
      (*gradient)[ed.v[0]] -= g;
    }
  }

  // Shear: k_shear |S_f|_F^2 per face.
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    const RestTriangle rest = rest_triangle(mesh, f);
    const Eigen::Matrix<double, 3, 2> F = current_edges(mesh, f) * rest.inv;
    const Eigen::Matrix2d S = deviatoric_green_strain(F);
    const double energy = params.k_shear * S.squaredNorm();
    out.shear += energy;
    const auto& v = mesh.face(f).v;
    if (per_vertex) {
      for (int k = 0; k < 3; ++k) per_vertex->w_memb[v[k]] += energy / 3.0;
    }
    if (gradient) {
      // d|S|^2 = 2 (F S) : dF and dF = dD * rest.inv.
      const Eigen::Matrix<double, 3, 2> G = 2.0 * params.k_shear * F * S * rest.inv.transpose();
      (*gradient)[v[1]] += G.col(0);
      (*gradient)[v[2]] += G.col(1);
      (*gradient)[v[0]] -= G.col(0) + G.col(1);
    }
  }

  // Bending: k_bend theta^2 per interior edge. theta^2 does not depend on
  // which face supplies the local orientation, so seam hinges need no special
  // case.
  for (int e = 0; e < mesh.edge_slots(); ++e) {
    if (!mesh.edge_alive(e) || mesh.is_boundary_edge(e)) continue;
    const Hinge k = hinge_of(mesh, e);
    const Vec3& xa = mesh.position(k.a);
    const Vec3& xb = mesh.position(k.b);
    const Vec3& xc = mesh.position(k.c);
    const Vec3& xd = mesh.position(k.d);
    const Vec3 edge = xb - xa;
    const Vec3 n0 = edge.cross(xc - xa);
    const Vec3 n1 = (xa - xb).cross(xd - xb);
    const double len = edge.norm();
    const double n0sq = n0.squaredNorm(), n1sq = n1.squaredNorm();
    double theta = 0.0;
    if (len > 0.0) theta = std::atan2(n0.cross(n1).dot(edge) / len, n0.dot(n1));
    const double energy = params.k_bend * theta * theta;
    out.flexural += energy;
    if (per_vertex) {
      for (int v : {k.a, k.b, k.c, k.d}) per_vertex->w_flex[v] += 0.25 * energy;
    }
    if (gradient) {
      if (0.5 * std::sqrt(n0sq) < kMinFaceArea || 0.5 * std::sqrt(n1sq) < kMinFaceArea) {
        throw Error(ErrorCode::DegenerateFace, "hinge at edge " +
                                                   std::to_string(mesh.edge(e).id.value) +
                                                   " has a face below minimum area");
      }
      // dtheta/dx_c = -n0_hat / h0 with h0 = |n0| / |e|, likewise for d.
      const Vec3 gc = -(len / n0sq) * n0;
      const Vec3 gd = -(len / n1sq) * n1;
      const double sc = (xc - xa).dot(edge) / (len * len);
      const double sd = (xd - xa).dot(edge) / (len * len);
      const Vec3 ga = -(1.0 - sc) * gc - (1.0 - sd) * gd;
      const Vec3 gb = -sc * gc - sd * gd;
      const double scale = 2.0 * params.k_bend * theta;
      (*gradient)[k.a] += scale * ga;
      (*gradient)[k.b] += scale * gb;
      (*gradient)[k.c] += scale * gc;
      (*gradient)[k.d] += scale * gd;
    }
  }

  out.membrane = out.stretch + out.shear;
  out.total = out.membrane + out.flexural;
  return out;
}

EnergyBreakdown total_energy(const Mesh& mesh, const MaterialParams& params) {
  return evaluate_energy(mesh, params, nullptr, nullptr);
}

std::vector<Vec3> energy_gradient(const Mesh& mesh, const MaterialParams& params) {
  std::vector<Vec3> g;
  evaluate_energy(mesh, params, &g, nullptr);
  return g;
}

PerVertexEnergies per_vertex_energies(const Mesh& mesh, const MaterialParams& params) {
  PerVertexEnergies w;
  evaluate_energy(mesh, params, nullptr, &w);
  return w;
}

namespace {

std::vector<Vec3> face_area_vectors(const Mesh& mesh) {
  std::vector<Vec3> out(mesh.face_slots(), Vec3::Zero());
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (mesh.face_alive(f)) out[f] = face_area_vector(mesh, f);
  }
  return out;
}

// A trial step is admissible when no face degenerates or turns over.
bool faces_intact(const Mesh& mesh, const std::vector<Vec3>& before) {
  for (int f = 0; f < mesh.face_slots(); ++f) {
    if (!mesh.face_alive(f)) continue;
    const Vec3 a = face_area_vector(mesh, f);
    if (a.norm() < kMinFaceArea || a.dot(before[f]) <= 0.0) return false;
  }
  return true;
}

}  // namespace

StepResult euler_step(Mesh& mesh, const MaterialParams& params, double dt, int max_halvings) {
  StepResult r;
  std::vector<Vec3> grad;
  r.energy_before = evaluate_energy(mesh, params, &grad, nullptr).total;
  r.energy_after = r.energy_before;
  bool moving = false;
  for (const auto& g : grad) moving |= !g.isZero(0.0);
  if (!moving) return r;

  const std::vector<Vec3> start(mesh.positions().begin(), mesh.positions().end());
  const std::vector<Vec3> areas = face_area_vectors(mesh);
  auto positions = mesh.positions();
  double step = dt;
  for (int attempt = 0; attempt <= max_halvings; ++attempt) {
    for (std::size_t v = 0; v < start.size(); ++v) positions[v] = start[v] - step * grad[v];
    bool ok = faces_intact(mesh, areas);
    double trial = 0.0;
    if (ok) {
      try {
        trial = total_energy(mesh, params).total;
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok && std::isfinite(trial) && trial <= r.energy_before + 1e-12) {
      r.dt_used = step;
      r.energy_after = trial;
      r.halvings = attempt;
      return r;
    }
    step *= 0.5;
  }
  std::copy(start.begin(), start.end(), positions.begin());
  r.accepted = false;
  r.halvings = max_halvings;
  return r;
}

RelaxResult relax_frame(Mesh& mesh, const MaterialParams& params, const SolverConfig& solver) {
  solver.check();
  RelaxResult out;
  for (int s = 0; s < solver.substeps_per_frame; ++s) {
    const StepResult r = euler_step(mesh, params, solver.dt, solver.max_step_halvings);
    out.halvings += r.halvings;
    if (!r.accepted) ++out.failed_steps;
  }
  out.energy = total_energy(mesh, params);
  return out;
}

}  // namespace surfgrow
