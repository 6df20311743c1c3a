#pragma once

#include <Eigen/Core>

#include <vector>

#include "mesh.hpp"

namespace surfgrow {

/// The control triple. All coefficients must be positive and finite.
struct MaterialParams {
  double k_stretch = 1.0;
  double k_shear = 0.3;
  double k_bend = 0.01;

  void check() const;
  friend bool operator==(const MaterialParams&, const MaterialParams&) = default;
};

struct EnergyBreakdown {
  double stretch = 0.0;
  double shear = 0.0;
  double membrane = 0.0;  // stretch + shear
  double flexural = 0.0;
  double total = 0.0;     // membrane + flexural
};

struct PerVertexEnergies {
  std::vector<double> w_memb;
  std::vector<double> w_flex;
};

struct SolverConfig {
  double dt = 1e-2;
  int substeps_per_frame = 10;
  int max_step_halvings = 8;

  void check() const;
};

/// Deviatoric part of the in-plane Green strain of the map from the rest
/// triangle (built from the three rest lengths) to the current triangle.
/// Throws DegenerateRest when the rest lengths violate the triangle inequality.
Eigen::Matrix2d face_shear_tensor(const Mesh& mesh, int face);

/// Signed dihedral angle across an interior edge, measured in the local
/// orientation of the edge's first face; zero when the hinge is flat.
double dihedral_angle(const Mesh& mesh, int edge);

EnergyBreakdown total_energy(const Mesh& mesh, const MaterialParams& params);

/// Analytic gradient with respect to every vertex position.
std::vector<Vec3> energy_gradient(const Mesh& mesh, const MaterialParams& params);

/// Stretch terms split 1/2 per endpoint, shear 1/3 per corner, bending 1/4 per
/// hinge stencil vertex.
PerVertexEnergies per_vertex_energies(const Mesh& mesh, const MaterialParams& params);

/// Single pass computing any combination of energy, gradient and attribution.
EnergyBreakdown evaluate_energy(const Mesh& mesh, const MaterialParams& params,
                                std::vector<Vec3>* gradient, PerVertexEnergies* per_vertex);

struct StepResult {
  bool accepted = true;
  int halvings = 0;
  double dt_used = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
};

/// Forward Euler on the gradient flow, x <- x - dt * grad E. The step size is
/// halved until the energy does not increase by more than 1e-12; if that never
/// happens the positions are restored and the step is reported as failed.
StepResult euler_step(Mesh& mesh, const MaterialParams& params, double dt, int max_halvings = 8);

struct RelaxResult {
  EnergyBreakdown energy;
  int failed_steps = 0;
  int halvings = 0;
};

RelaxResult relax_frame(Mesh& mesh, const MaterialParams& params, const SolverConfig& solver);

}  // namespace surfgrow
