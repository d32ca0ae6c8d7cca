// SPDX-License-Identifier: Apache-2.0
//
// Thin-wire electric-field integral equation: triangle basis functions on
// segment pairs, Galerkin testing, reduced kernel with static-part
// extraction, series lumped loads and a delta-gap driven solve.

#pragma once

#include "isocma/geometry.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>

namespace isocma {

/// One half of a triangle basis function living on a single segment.
struct BasisPiece {
    int segment = -1;
    double sign = 1.0;     // current direction relative to the segment direction
    bool rising = true;    // value is u along the segment (else 1 - u)
    double divergence = 0; // d/dl of the basis along its own flow, per metre
};

struct BasisFunction {
    int node = -1;                    // peak node
    std::array<BasisPiece, 2> pieces; // [0] flows into the node, [1] out of it
};

/// Triangle basis over the interior nodes of a mesh. Free wire ends carry no
/// basis; a junction of k segments carries k - 1.
class BasisSet {
public:
    explicit BasisSet(const SegmentMesh& mesh);

    int size() const { return static_cast<int>(functions_.size()); }
    const BasisFunction& operator[](int i) const { return functions_[i]; }
    const std::vector<BasisFunction>& functions() const { return functions_; }

    /// Basis index peaked on `node`, or -1 if the node is not a simple joint.
    int at_node(int node) const;
    /// Basis carrying the port, load or any element on `segment`'s end node.
    int at_segment_end(const SegmentMesh& mesh, int segment) const;

    /// Current at both ends of every segment, along the segment direction.
    std::vector<std::array<cplx, 2>> segment_end_currents(const SegmentMesh& mesh,
                                                          const Eigen::VectorXcd& coeffs) const;
    /// Project a prescribed current onto the basis by sampling it at the
    /// basis peak nodes. `current(position, flow)` returns the current in
    /// amperes flowing along the unit vector `flow`.
    Eigen::VectorXcd coefficients_from(const SegmentMesh& mesh,
                                       const std::function<cplx(const Vec3&, const Vec3&)>& current) const;

private:
    std::vector<BasisFunction> functions_;
    std::vector<int> node_to_basis_;
};

struct ExecPolicy {
    unsigned jobs = 1;
};

struct ImpedanceOperator {
    double frequency = 0.0;
    Eigen::MatrixXcd matrix;
    std::shared_ptr<const BasisSet> basis;

    int size() const { return static_cast<int>(matrix.rows()); }
};

/// Free-space impedance matrix of the bare conductor (loads not included).
ImpedanceOperator assemble(const SegmentMesh& mesh, double frequency, const ExecPolicy& exec = {});

/// Adds each load's series impedance to the diagonal entry of its basis.
ImpedanceOperator apply_loads(const ImpedanceOperator& z, const SegmentMesh& mesh);

/// assemble + apply_loads.
ImpedanceOperator assemble_loaded(const SegmentMesh& mesh, double frequency, const ExecPolicy& exec = {});

struct DrivenSolution {
    double frequency = 0.0;
    Eigen::VectorXcd current;
    Eigen::VectorXcd excitation;
    cplx zin;
    cplx s11;
    double accepted_power = 0.0;
    double rcond = 0.0;
};

/// Excitation vector of a delta-gap source on the mesh port.
Eigen::VectorXcd port_excitation(const SegmentMesh& mesh, const BasisSet& basis, cplx gap_voltage = 1.0);

/// Solves Z I = V. Throws Numerical when the reciprocal condition estimate
/// drops below `min_rcond`.
DrivenSolution solve_driven(const ImpedanceOperator& z, const SegmentMesh& mesh, cplx gap_voltage = 1.0,
                            double z0 = 50.0, double min_rcond = 1e-13);

/// Relative asymmetry ||Z - Z^T|| / ||Z||.
double asymmetry(const Eigen::MatrixXcd& z);

}  // namespace isocma
