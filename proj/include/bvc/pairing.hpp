#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bvc/forms.hpp"
#include "bvc/geometry.hpp"
#include "bvc/holofunc.hpp"

namespace bvc {

struct LadderEntry {
  double h;
  cplx value;
};

// Extrapolated pairing value. error_estimate is the magnitude of the last
// extrapolation correction (a diagnostic, not a rigorous bound).
struct PairingResult {
  cplx value = 0.0;
  double error_estimate = 0.0;
  std::vector<LadderEntry> ladder;
  int extrapolation_order = 0;
  bool converged = false;
};

// Geometric-ladder Richardson extrapolation assuming an expansion in integer
// powers of h starting at h^order_hint.
PairingResult richardson(const std::vector<LadderEntry>& ladder, int order_hint,
                         double tol = 1e-10, double conv_ratio = 0.75);

enum class CeMode { PatchwiseTranslate, DiscDilate };
enum class BcRoute { DbarOfCe, BoundaryLimit };

struct PairingOptions {
  int level = 0;       // 0: choose by dimension (3 for N=1, 1 for N>=2)
  int ibp_levels = 2;  // quadrature-level ladder length for the ibp route
  int limit_level = 0; // 0: same as `level`
  int rungs = 6;
  double eps0_frac = 0.05;
  int order_hint = 1;
  int patch_count = 4;
  double patch_overlap_frac = 0.35;  // overlap as a fraction of the arc length
  // circle grids are one-dimensional and cheap; run them finer than volume grids
  int boundary_boost = 2;
  // interior grids entering face pairings (one factor fewer) can afford a boost
  int face_interior_boost = 1;
  double tol = 1e-6;
  double conv_ratio = 0.75;
  uint64_t seed = 20240901;
};

class PairingEngine;

// alpha_k as a pairing oracle on face test data
struct FaceDistributionProxy {
  int face = 0;
  HoloFunction f;
  PairingResult pair(PairingEngine& engine, const FaceTestData& u) const;
};

// Precomputed test-side data for the integration-by-parts canonical-extension
// pairing; independent of the holomorphic function, so one plan can be paired
// against many (e.g. boundary-slice families).
struct CePlanLevel {
  std::vector<std::vector<FactorNode>> nodes;           // per factor
  std::vector<cplx> term_w;                             // per tensor term
  std::vector<std::vector<std::vector<cplx>>> g;        // [term][factor][node], weights folded in
};
struct CePlan {
  std::vector<CePlanLevel> levels;
  std::vector<int> s;
};

class PairingEngine {
 public:
  explicit PairingEngine(ProductDomain dom, PairingOptions opt = {});

  const ProductDomain& domain() const { return dom_; }
  const PairingOptions& options() const { return opt_; }
  PairingOptions& options() { return opt_; }

  // <ce f, phi> as the extrapolated eps-limit of int_Omega f_eps phi
  PairingResult ce_pair_limit(const HoloFunction& f, const TestForm& phi, CeMode mode);
  // <ce f, phi> by repeated integration by parts; no eps-limit, ladder over
  // quadrature levels
  PairingResult ce_pair_ibp(const HoloFunction& f, const TestForm& phi,
                            std::optional<std::vector<int>> s_tuple = {});
  // <bc f, psi> = <ce f, dbar psi> (reference route) or the patchwise boundary
  // limit lim int_{bd Omega} f_eps psi
  PairingResult bc_pair(const HoloFunction& f, const TestForm& psi, BcRoute route);
  // <alpha_k, u> = lim int_{bd D_k x Dhat_k} f_eps u
  PairingResult face_pair(const HoloFunction& f, int k, const FaceTestData& u);
  // <bc_silov f, psi> = lim int over the distinguished torus boundary
  PairingResult silov_pair(const HoloFunction& f, const TestForm& psi);
  // (1/2pi i) <alpha_k(.,what), dzeta/(zeta-z)>; equals f(z, what)
  cplx cauchy_reconstruct(const FaceDistributionProxy& proxy, cplx z, std::vector<cplx> what,
                          double margin = 0.2);
  PairingResult cauchy_reconstruct_detail(const FaceDistributionProxy& proxy, cplx z,
                                          std::vector<cplx> what, double margin = 0.2);

  // s_j = ceil(growth_order_estimate) + 1 for every factor
  std::vector<int> select_s(const HoloFunction& f);
  double growth_estimate(const HoloFunction& f);

  // plan/apply split of the ibp pairing (used by the canonicality check)
  CePlan plan_ce_ibp(const TestForm& phi, const std::vector<int>& s,
                     const std::vector<std::vector<double>>& hints);
  cplx apply_ce_plan(const CePlanLevel& lvl, const std::function<cplx(const cplx*)>& f) const;

  // cached geometry accessors
  const std::vector<FactorNode>& interior_grid(int j, int level,
                                               const std::vector<double>& hints);
  const std::vector<BoundaryNode>& boundary_grid(int j, int level,
                                                 const std::vector<double>& hints);
  const PatchSet& patches(int j, int count);

  int base_level() const;
  int limit_level() const;

 private:
  struct FactorPiece {
    bool is_patch = false;
    cplx v = 0.0;
    double eps_max = 1e300;
    std::vector<double> cut;      // cutoff values on the relevant grid
    std::vector<int> support;     // indices with cut != 0
  };
  std::vector<FactorPiece> area_pieces(int j, int level, const std::vector<double>& hints,
                                       int patch_count);
  std::vector<FactorPiece> arc_pieces(int j, int level, const std::vector<double>& hints,
                                      int patch_count);
  PairingResult settle_ladder(std::vector<LadderEntry> ladder, int order_hint) const;

  ProductDomain dom_;
  PairingOptions opt_;
  std::map<std::string, std::vector<FactorNode>> interior_cache_;
  std::map<std::string, std::vector<BoundaryNode>> boundary_cache_;
  std::map<std::pair<int, int>, PatchSet> patch_cache_;
  std::map<std::string, double> growth_cache_;
};

}  // namespace bvc
