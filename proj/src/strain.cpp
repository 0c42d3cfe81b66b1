#include "onh/strain.hpp"

#include <cmath>

namespace onh::strain {

Eigen::Matrix3d displacement_gradient(const phantom::DisplacementField& field,
                                      const std::array<Index, 3>& voxel) {
    for (int a = 0; a < 3; ++a)
        require(voxel[static_cast<std::size_t>(a)] >= 1 &&
                    voxel[static_cast<std::size_t>(a)] + 1 < field.dims[static_cast<std::size_t>(a)],
                "displacement_gradient: voxel on or outside the volume border");
    const Index ib = voxel[0], ia = voxel[1], id = voxel[2];
    Eigen::Matrix3d grad;  // grad(i,j) = d u_i / d x_j
    const Eigen::Vector3d d0 = (field.at(ib + 1, ia, id) - field.at(ib - 1, ia, id)) / (2.0 * field.spacing_mm[0]);
    const Eigen::Vector3d d1 = (field.at(ib, ia + 1, id) - field.at(ib, ia - 1, id)) / (2.0 * field.spacing_mm[1]);
    const Eigen::Vector3d d2 = (field.at(ib, ia, id + 1) - field.at(ib, ia, id - 1)) / (2.0 * field.spacing_mm[2]);
    grad.col(0) = d0;
    grad.col(1) = d1;
    grad.col(2) = d2;
    return grad;
}

EffectiveStrainFormula formula_from_name(const std::string& name) {
    if (name == "von_mises") return EffectiveStrainFormula::VonMises;
    if (name == "frobenius") return EffectiveStrainFormula::Frobenius;
    fail("unknown effective strain formula '" + name + "' (expected von_mises or frobenius)");
}

const char* formula_name(EffectiveStrainFormula f) {
    return f == EffectiveStrainFormula::VonMises ? "von_mises" : "frobenius";
}

double effective_strain(const Eigen::Matrix3d& strain, EffectiveStrainFormula formula) {
    require((strain - strain.transpose()).cwiseAbs().maxCoeff() <= 1e-9,
            "effective_strain: tensor is not symmetric");
    const Eigen::Matrix3d sym = 0.5 * (strain + strain.transpose());
    switch (formula) {
        case EffectiveStrainFormula::VonMises: {
            const Eigen::Matrix3d dev = sym - (sym.trace() / 3.0) * Eigen::Matrix3d::Identity();
            return std::sqrt(2.0 / 3.0 * dev.cwiseProduct(dev).sum());
        }
        case EffectiveStrainFormula::Frobenius:
            return std::sqrt(sym.cwiseProduct(sym).sum());
    }
    fail("effective_strain: unreachable");
}

double lc_average_effective_strain(const phantom::DisplacementField& field,
                                   EffectiveStrainFormula formula) {
    const Index nb = field.dims[0], na = field.dims[1], nd = field.dims[2];
    auto in_mask = [&](Index ib, Index ia, Index id) {
        return field.lc_mask[static_cast<std::size_t>(field.flat(ib, ia, id))] != 0;
    };
    double total = 0.0;
    Index count = 0;
    for (Index ib = 1; ib + 1 < nb; ++ib)
        for (Index ia = 1; ia + 1 < na; ++ia)
            for (Index id = 1; id + 1 < nd; ++id) {
                if (!in_mask(ib, ia, id)) continue;
                if (!in_mask(ib - 1, ia, id) || !in_mask(ib + 1, ia, id) ||
                    !in_mask(ib, ia - 1, id) || !in_mask(ib, ia + 1, id) ||
                    !in_mask(ib, ia, id - 1) || !in_mask(ib, ia, id + 1))
                    continue;
                const Eigen::Matrix3d grad = displacement_gradient(field, {ib, ia, id});
                total += effective_strain(green_lagrange(grad), formula);
                count += 1;
            }
    require(count > 0, "lc_average_effective_strain: eroded LC mask is empty");
    return total / static_cast<double>(count);
}

RobustnessLabel label(double e_eff, double threshold) {
    require(e_eff >= 0.0, "label: effective strain must be non-negative");
    RobustnessLabel out;
    out.e_eff = e_eff;
    out.threshold = threshold;
    out.label = e_eff > threshold ? RobustnessLabel::Fragile : RobustnessLabel::Robust;
    return out;
}

}  // namespace onh::strain
