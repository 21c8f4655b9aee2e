#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bvc/geometry.hpp"
#include "bvc/smoothfn.hpp"

namespace bvc {

// One wedge monomial c(z) dz_I ^ dzbar_J in normal form (I, J ascending,
// holomorphic block first). Coefficients are tensor products of per-factor
// smooth functions; sums of monomials represent general coefficients.
struct FormMonomial {
  unsigned holo = 0;  // bitmask over factors
  unsigned anti = 0;
  cplx weight = 1.0;
  std::vector<SmoothFn> coef;  // one per factor

  cplx coef_value(const std::vector<cplx>& z) const {
    cplx r = weight;
    for (size_t j = 0; j < coef.size(); ++j) r *= coef[j](z[j]);
    return r;
  }
  int degree_in_factor(int k) const {
    return int((holo >> k) & 1u) + int((anti >> k) & 1u);
  }
};

struct TestForm {
  int n = 1;  // number of factors
  int p = 0, q = 0;
  std::vector<FormMonomial> monomials;

  // Adds c dz_{holo_idx} ^ dzbar_{anti_idx} with the indices in the given
  // order; sorts into normal form, folding the permutation sign into the
  // weight. Repeated indices make the monomial vanish (skipped).
  void add_monomial(const std::vector<int>& holo_idx, const std::vector<int>& anti_idx,
                    cplx weight, std::vector<SmoothFn> coef);

  bool zero() const { return monomials.empty(); }
};

// permutation parity of sorting `keys` ascending; 0 if keys repeat
int sort_parity(std::vector<int> keys);

// dbar with the left-insertion convention dbar(c w) = sum_j (dc/dzbar_j) dzbar_j ^ w
TestForm dbar(const TestForm& form);
// partial operator along factor k (tensor-slot convention, no crossing signs)
TestForm dbar_factor(int k, const TestForm& form);
// sign operator sigma_j: multiplies each monomial by (-1)^{sum_{k<j} deg_k}
TestForm sigma_apply(int j, const TestForm& form);

TestForm form_add(const TestForm& a, const TestForm& b);
TestForm form_scale(cplx s, const TestForm& a);

// evaluate the form as an alternating multilinear map on real tangent vectors
// (given by their complex factor components)
cplx form_eval_on_vectors(const TestForm& form, const std::vector<cplx>& z,
                          const std::vector<std::vector<cplx>>& vectors);

// Lebesgue volume coefficient of a top-degree (N,N) form:
// form = phi0 dV with dV the Lebesgue volume of C^N.
// Returned as tensor terms; weight carries the reordering sign and (-2i)^N.
struct TensorCoefTerm {
  cplx weight;
  std::vector<SmoothFn> coef;
  cplx value(const std::vector<cplx>& z) const {
    cplx r = weight;
    for (size_t j = 0; j < coef.size(); ++j) r *= coef[j](z[j]);
    return r;
  }
};
std::vector<TensorCoefTerm> volume_coefficient(const TestForm& form);

// Weinstock test forms --------------------------------------------------------

// omega = chi * g * dz_1^...^dz_N ^ (sum_k anti_weights[k] dzbar_{(full minus k)}),
// with chi == 1 on a neighborhood of the closed product and supported inside
// the declared holomorphy margin of g. dbar(omega) vanishes on the closure by
// construction. g is given as tensor terms (e.g. an expanded polynomial).
struct HoloTensorTerm {
  cplx weight;
  std::vector<SmoothFn> fs;     // holomorphic per-factor parts
  double holo_margin = 1e300;  // distance beyond each factor closure
};
TestForm make_weinstock_form(const ProductDomain& dom, const std::vector<HoloTensorTerm>& g,
                             double cutoff_margin, const std::vector<cplx>& anti_weights);

// Boundary restriction --------------------------------------------------------

// A form on the extended face bd(Omega_k) = bd(D_k) x prod_{j != k} C, written
// in the variables (t, z_j). The angular coefficient is a smooth function of
// the boundary parameter t; the remaining coefficient is a tensor product.
struct FaceMonomial {
  bool has_dt = false;
  unsigned holo = 0, anti = 0;  // masks over factors != k
  cplx weight = 1.0;
  std::function<cplx(double)> ang;  // coefficient factor carried by the circle
  std::vector<SmoothFn> coef;       // per factor (slot k unused)
};
struct FaceForm {
  int n = 1;
  int face = 0;
  std::vector<FaceMonomial> monomials;
  bool zero() const { return monomials.empty(); }
};

// Pullback under the inclusion of the extended face: substitutes
// z_k = gamma(t), dz_k = gamma'(t) dt, dzbar_k = conj(gamma'(t)) dt.
// Monomials containing both dz_k and dzbar_k vanish.
FaceForm pullback_to_face(const TestForm& form, const ProductDomain& dom, int k);

// Pairing-ready top-degree face data: sum of terms
//   weight * a(t) dt (x) prod_{j != k} q_j(w_j) dV_j  (dV = Lebesgue).
struct FaceTestTerm {
  cplx weight = 1.0;
  std::function<cplx(double)> ang;
  std::vector<SmoothFn> wcoef;  // per factor (slot k unused)
};
struct FaceTestData {
  int n = 1;
  int face = 0;
  std::vector<FaceTestTerm> terms;
  bool zero() const { return terms.empty(); }
};

// Converts a top-degree FaceForm (dt present, full masks off the face factor)
// to Lebesgue face test data; throws on degree mismatch.
FaceTestData face_form_to_test_data(const FaceForm& ff);

// Transversal (0,1) vector fields --------------------------------------------

// T = a d/dzbar on one factor with T r = 1 on the cutoff band.
struct VectorFieldT {
  int factor = 0;
  SmoothFn a;
};
VectorFieldT make_transversal_field(const PlanarDomain& dom, int factor_index);

// formal transpose against the bilinear pairing int u v dV:
// tstar(u) = -a du/dzbar - (da/dzbar) u
SmoothFn tstar_apply(const VectorFieldT& T, const SmoothFn& u);

}  // namespace bvc
