#pragma once

#include "feqi/exterior.hpp"
#include "feqi/spaces.hpp"

#include <functional>
#include <memory>
#include <string>

namespace feqi {

/// Scalar coefficient with its gradient.
struct ScalarField {
  std::function<double(const double*)> value;
  std::function<void(const double*, double*)> gradient;
};

/// k-form with the given dx_I coefficients (subsets(n, k) order); d is
/// assembled from the gradients.
SampledForm form_from_fields(int n, int k, std::vector<ScalarField> comps, std::string name);

/// Piecewise polynomial form from local forms on the cells of a mesh. A point
/// on a shared face takes the value of the lowest-id cell holding it.
SampledForm piecewise_form(std::shared_ptr<const SimplicialComplex> mesh, std::vector<PolyForm> local,
                           std::string name);

/// Finite element form with coefficients over the geometric-decomposition basis.
SampledForm fe_form(const GlobalFESpace& space, const Eigen::VectorXd& coefficients);

struct TargetParams {
  int n = 2;
  int k = 0;
  int r = 1;  // poly has degree r; broken_fe lies in TRIMMED P_{r+1}
  unsigned seed = 0;
};

/// Manufactured targets on the unit box: trig, poly, bc_trig (vanishing on
/// the whole boundary), broken_fe (FE form on the unrefined mesh), zero.
/// Throws UnknownTarget.
SampledForm manufactured_target(const std::string& name, const TargetParams& params);

}  // namespace feqi
