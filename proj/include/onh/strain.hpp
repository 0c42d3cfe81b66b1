#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

#include "onh/phantom.hpp"

namespace onh::strain {

using Index = Eigen::Index;

/// Central-difference displacement gradient at an interior voxel, scaled
/// by the voxel spacing. Exact for affine fields. Throws on border voxels.
Eigen::Matrix3d displacement_gradient(const phantom::DisplacementField& field,
                                      const std::array<Index, 3>& voxel);

/// Green-Lagrange strain E = (grad_u + grad_u^T + grad_u^T grad_u) / 2.
template <typename Derived>
Eigen::Matrix3d green_lagrange(const Eigen::MatrixBase<Derived>& grad_u) {
    const Eigen::Matrix3d g = grad_u;
    return 0.5 * (g + g.transpose() + g.transpose() * g);
}

/// Scalar summary of the strain tensor. VonMises is the deviatoric
/// equivalent sqrt(2/3 dev(E):dev(E)); Frobenius is sqrt(E:E). The exact
/// formula behind the source study's E_eff is not public, hence the seam.
enum class EffectiveStrainFormula { VonMises, Frobenius };

EffectiveStrainFormula formula_from_name(const std::string& name);
const char* formula_name(EffectiveStrainFormula f);

double effective_strain(const Eigen::Matrix3d& strain,
                        EffectiveStrainFormula formula = EffectiveStrainFormula::VonMises);

/// Unweighted mean effective strain over the one-voxel-eroded LC mask
/// (central differences are undefined on mask and volume borders).
double lc_average_effective_strain(const phantom::DisplacementField& field,
                                   EffectiveStrainFormula formula = EffectiveStrainFormula::VonMises);

struct RobustnessLabel {
    enum Class { Robust = 0, Fragile = 1 };
    Class label = Robust;
    double e_eff = 0.0;
    double threshold = 0.04;

    const char* name() const { return label == Fragile ? "fragile" : "robust"; }
};

/// Fragile iff e_eff > threshold; the exact threshold goes to Robust
/// (both published inequalities are strict, leaving the boundary open).
RobustnessLabel label(double e_eff, double threshold = 0.04);

}  // namespace onh::strain
