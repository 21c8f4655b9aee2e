#include "bvc/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bvc {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

// value of (T*)^s (u) at z via exact jet recursion
cplx tstar_pow_value(const SmoothFn& a, const SmoothFn& u, cplx z, int s) {
  if (s == 0) return u(z);
  Jet2 aj = a.jet(z, s);
  Jet2 adzb = aj.dzbar();
  Jet2 v = u.jet(z, s);
  for (int m = 0; m < s; ++m) v = -(aj * v.dzbar() + adzb * v);
  return v.value();
}

std::string hints_key(int j, int level, const std::vector<double>& hints) {
  std::ostringstream os;
  os << j << "|" << level;
  for (double h : hints) os << "|" << h;
  return os.str();
}

std::vector<std::vector<double>> hint_table(const HoloFunction& f, int n) {
  std::vector<std::vector<double>> h(static_cast<size_t>(n));
  for (int j = 0; j < n && j < int(f.singular_angles.size()); ++j)
    h[size_t(j)] = f.singular_angles[size_t(j)];
  return h;
}

PairingResult exact_zero_result() {
  PairingResult r;
  r.value = 0.0;
  r.error_estimate = 0.0;
  r.converged = true;
  return r;
}

}  // namespace

PairingResult richardson(const std::vector<LadderEntry>& ladder, int order_hint, double tol,
                         double conv_ratio) {
  if (ladder.size() < 3) throw std::invalid_argument("richardson: ladder length >= 3 required");
  if (order_hint < 1) throw std::invalid_argument("richardson: order_hint >= 1 required");
  const double ratio = ladder[1].h / ladder[0].h;
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("richardson: h must be strictly decreasing");
  for (size_t i = 1; i + 1 < ladder.size(); ++i) {
    const double r2 = ladder[i + 1].h / ladder[i].h;
    if (std::abs(r2 - ratio) > 1e-9 * ratio)
      throw std::invalid_argument("richardson: ladder must be geometric");
  }

  const size_t L = ladder.size();
  std::vector<cplx> row(L);
  for (size_t i = 0; i < L; ++i) row[i] = ladder[i].value;

  PairingResult res;
  res.ladder = ladder;
  res.extrapolation_order = order_hint;

  std::vector<double> corrections;
  cplx best = row.back();
  for (size_t m = 1; m < L; ++m) {
    const double denom = std::pow(1.0 / ratio, double(order_hint + int(m) - 1)) - 1.0;
    for (size_t i = L - 1; i >= m; --i) {
      row[i] = row[i] + (row[i] - row[i - 1]) / denom;
      if (i == m) break;
    }
    corrections.push_back(std::abs(row.back() - best));
    best = row.back();
  }
  res.value = best;
  res.error_estimate = corrections.empty() ? 0.0 : corrections.back();

  const double floor = 1e-14 * (1.0 + std::abs(res.value));
  bool monotone = true;
  for (size_t i = 1; i < corrections.size(); ++i) {
    if (corrections[i] <= floor || corrections[i - 1] <= floor) continue;
    if (corrections[i] > conv_ratio * corrections[i - 1]) monotone = false;
  }
  res.converged = monotone && (res.error_estimate <= std::max(tol, floor));
  return res;
}

PairingResult PairingEngine::settle_ladder(std::vector<LadderEntry> ladder, int order_hint) const {
  PairingResult r;
  if (ladder.empty()) return exact_zero_result();
  if (ladder.size() == 1) {
    r.value = ladder[0].value;
    r.error_estimate = 0.0;
    r.converged = true;
    r.ladder = std::move(ladder);
    return r;
  }
  if (ladder.size() == 2) {
    r.value = ladder[1].value;
    r.error_estimate = std::abs(ladder[1].value - ladder[0].value);
    r.converged = r.error_estimate <= std::max(opt_.tol, 1e-14 * (1.0 + std::abs(r.value)));
    r.ladder = std::move(ladder);
    return r;
  }
  return richardson(ladder, order_hint, opt_.tol, opt_.conv_ratio);
}

PairingEngine::PairingEngine(ProductDomain dom, PairingOptions opt)
    : dom_(std::move(dom)), opt_(opt) {}

int PairingEngine::base_level() const {
  if (opt_.level > 0) return opt_.level;
  return dom_.n() == 1 ? 4 : 1;
}
int PairingEngine::limit_level() const {
  if (opt_.limit_level > 0) return opt_.limit_level;
  // one-factor limit grids are cheap; match the finest ibp ladder level
  return dom_.n() == 1 ? base_level() + 1 : base_level();
}

const std::vector<FactorNode>& PairingEngine::interior_grid(int j, int level,
                                                            const std::vector<double>& hints) {
  const std::string key = hints_key(j, level, hints);
  auto it = interior_cache_.find(key);
  if (it == interior_cache_.end())
    it = interior_cache_.emplace(key, interior_quadrature(dom_.factor(j), level, hints)).first;
  return it->second;
}

const std::vector<BoundaryNode>& PairingEngine::boundary_grid(int j, int level,
                                                              const std::vector<double>& hints) {
  const std::string key = hints_key(j, level, hints);
  auto it = boundary_cache_.find(key);
  if (it == boundary_cache_.end())
    it = boundary_cache_.emplace(key, boundary_quadrature(dom_.factor(j), level, hints)).first;
  return it->second;
}

const PatchSet& PairingEngine::patches(int j, int count) {
  auto key = std::make_pair(j, count);
  auto it = patch_cache_.find(key);
  if (it == patch_cache_.end()) {
    const double arc = 2.0 * M_PI / count;
    it = patch_cache_
             .emplace(key, boundary_patches(dom_.factor(j), j, count,
                                            opt_.patch_overlap_frac * arc))
             .first;
  }
  return it->second;
}

double PairingEngine::growth_estimate(const HoloFunction& f) {
  const std::string key = f.desc + "@" + dom_.name();
  auto it = growth_cache_.find(key);
  if (it != growth_cache_.end()) return it->second;
  GrowthEstimateParams p;
  p.seed = opt_.seed;
  const double g = growth_order_estimate(f, dom_, p);
  growth_cache_[key] = g;
  return g;
}

std::vector<int> PairingEngine::select_s(const HoloFunction& f) {
  const double k = growth_estimate(f);
  const int s = int(std::ceil(k - 1e-9)) + 1;
  return std::vector<int>(static_cast<size_t>(dom_.n()), std::max(1, s));
}

// --- ce, ibp route -------------------------------------------------------------

CePlan PairingEngine::plan_ce_ibp(const TestForm& phi, const std::vector<int>& s,
                                  const std::vector<std::vector<double>>& hints) {
  const int n = dom_.n();
  if (int(s.size()) != n) throw std::invalid_argument("plan_ce_ibp: s tuple arity mismatch");
  auto terms = volume_coefficient(phi);
  CePlan plan;
  plan.s = s;
  for (int li = 0; li < opt_.ibp_levels; ++li) {
    const int lev = base_level() + li;
    CePlanLevel L;
    L.nodes.resize(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) L.nodes[size_t(j)] = interior_grid(j, lev, hints[size_t(j)]);
    L.term_w.resize(terms.size());
    L.g.assign(terms.size(), std::vector<std::vector<cplx>>(static_cast<size_t>(n)));
    for (size_t t = 0; t < terms.size(); ++t) {
      L.term_w[t] = terms[t].weight;
      for (int j = 0; j < n; ++j) {
        const PlanarDomain& fac = dom_.factor(j);
        const double bw = fac.band_width();
        SmoothFn chib = fac.band_cutoff();
        VectorFieldT T = make_transversal_field(fac, j);
        SmoothFn u_band = chib * terms[t].coef[size_t(j)];
        const double sfac = factorial(s[size_t(j)]);
        auto& arr = L.g[t][size_t(j)];
        arr.resize(L.nodes[size_t(j)].size());
        for (size_t i = 0; i < arr.size(); ++i) {
          const cplx z = L.nodes[size_t(j)][i].z;
          const double w = L.nodes[size_t(j)][i].w;
          const double r = fac.r(z);
          cplx val = 0.0;
          if (std::abs(r) < 0.9 * bw)
            val += ipow(r, s[size_t(j)]) / sfac *
                   tstar_pow_value(T.a, u_band, z, s[size_t(j)]);
          const double chv = std::abs(r) > 0.4 * bw ? chib(z).real() : 1.0;
          if (chv < 1.0) val += (1.0 - chv) * terms[t].coef[size_t(j)](z);
          arr[i] = val * w;
        }
      }
    }
    plan.levels.push_back(std::move(L));
  }
  return plan;
}

cplx PairingEngine::apply_ce_plan(const CePlanLevel& L,
                                  const std::function<cplx(const cplx*)>& f) const {
  const int n = int(L.nodes.size());
  const size_t T = L.term_w.size();
  KahanSumC acc;
  if (n == 1) {
    const auto& nodes = L.nodes[0];
    for (size_t i = 0; i < nodes.size(); ++i) {
      cplx c = 0.0;
      for (size_t t = 0; t < T; ++t) c += L.term_w[t] * L.g[t][0][i];
      if (c == 0.0) continue;
      const cplx z = nodes[i].z;
      acc.add(f(&z) * c);
    }
    return acc.get();
  }
  if (n == 2) {
    const auto& n0 = L.nodes[0];
    const auto& n1 = L.nodes[1];
    std::vector<cplx> at(T);
    cplx zbuf[2];
    for (size_t i = 0; i < n0.size(); ++i) {
      bool any = false;
      for (size_t t = 0; t < T; ++t) {
        at[t] = L.term_w[t] * L.g[t][0][i];
        if (at[t] != 0.0) any = true;
      }
      if (!any) continue;
      zbuf[0] = n0[i].z;
      for (size_t j = 0; j < n1.size(); ++j) {
        cplx c = 0.0;
        for (size_t t = 0; t < T; ++t) c += at[t] * L.g[t][1][j];
        if (c == 0.0) continue;
        zbuf[1] = n1[j].z;
        acc.add(f(zbuf) * c);
      }
    }
    return acc.get();
  }
  // generic odometer
  std::vector<size_t> idx(static_cast<size_t>(n), 0);
  std::vector<cplx> zbuf(static_cast<size_t>(n));
  while (true) {
    cplx c = 0.0;
    for (size_t t = 0; t < T; ++t) {
      cplx p = L.term_w[t];
      for (int j = 0; j < n; ++j) p *= L.g[t][size_t(j)][idx[size_t(j)]];
      c += p;
    }
    if (c != 0.0) {
      for (int j = 0; j < n; ++j) zbuf[size_t(j)] = L.nodes[size_t(j)][idx[size_t(j)]].z;
      acc.add(f(zbuf.data()) * c);
    }
    int j = 0;
    for (; j < n; ++j) {
      if (++idx[size_t(j)] < L.nodes[size_t(j)].size()) break;
      idx[size_t(j)] = 0;
    }
    if (j == n) break;
  }
  return acc.get();
}

PairingResult PairingEngine::ce_pair_ibp(const HoloFunction& f, const TestForm& phi,
                                         std::optional<std::vector<int>> s_tuple) {
  if (f.arity != dom_.n()) throw std::invalid_argument("ce_pair_ibp: arity mismatch");
  if (phi.zero() || f.identically_zero) return exact_zero_result();
  const std::vector<int> s = s_tuple ? *s_tuple : select_s(f);
  CePlan plan = plan_ce_ibp(phi, s, hint_table(f, dom_.n()));
  std::vector<LadderEntry> ladder;
  for (size_t li = 0; li < plan.levels.size(); ++li) {
    const double h = std::pow(0.5, double(base_level() + int(li)));
    ladder.push_back({h, apply_ce_plan(plan.levels[li], f.eval)});
  }
  PairingResult r = settle_ladder(std::move(ladder), 2);
  r.extrapolation_order = 0;
  // superpolynomial level convergence: report the finest level, not the tableau
  if (r.ladder.size() >= 2) {
    r.value = r.ladder.back().value;
    r.error_estimate = std::abs(r.ladder.back().value - r.ladder[r.ladder.size() - 2].value);
    r.converged = r.error_estimate <= std::max(opt_.tol, 1e-14 * (1.0 + std::abs(r.value)));
  }
  return r;
}

// --- pieces --------------------------------------------------------------------

std::vector<PairingEngine::FactorPiece> PairingEngine::area_pieces(
    int j, int level, const std::vector<double>& hints, int patch_count) {
  const PlanarDomain& fac = dom_.factor(j);
  const auto& nodes = interior_grid(j, level, hints);
  SmoothFn chib = fac.band_cutoff();
  const PatchSet& ps = patches(j, patch_count);

  std::vector<FactorPiece> pieces;
  // interior piece
  {
    FactorPiece p;
    p.is_patch = false;
    p.cut.resize(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      const double c = 1.0 - chib(nodes[i].z).real();
      p.cut[i] = c;
      if (c != 0.0) p.support.push_back(int(i));
    }
    pieces.push_back(std::move(p));
  }
  for (int q = 0; q < patch_count; ++q) {
    FactorPiece p;
    p.is_patch = true;
    p.v = ps.patches[size_t(q)].v;
    p.eps_max = ps.patches[size_t(q)].eps_max;
    p.cut.resize(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      const double cb = chib(nodes[i].z).real();
      double c = 0.0;
      if (cb != 0.0) c = cb * ps.cutoff(q, fac.angle_of(nodes[i].z));
      p.cut[i] = c;
      if (c != 0.0) p.support.push_back(int(i));
    }
    pieces.push_back(std::move(p));
  }
  return pieces;
}

std::vector<PairingEngine::FactorPiece> PairingEngine::arc_pieces(
    int j, int level, const std::vector<double>& hints, int patch_count) {
  const auto& nodes = boundary_grid(j, level, hints);
  const PatchSet& ps = patches(j, patch_count);
  std::vector<FactorPiece> pieces;
  for (int q = 0; q < patch_count; ++q) {
    FactorPiece p;
    p.is_patch = true;
    p.v = ps.patches[size_t(q)].v;
    p.eps_max = ps.patches[size_t(q)].eps_max;
    p.cut.resize(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      const double c = ps.cutoff(q, nodes[i].t);
      p.cut[i] = c;
      if (c != 0.0) p.support.push_back(int(i));
    }
    pieces.push_back(std::move(p));
  }
  return pieces;
}

// --- ce, limit route -------------------------------------------------------------

PairingResult PairingEngine::ce_pair_limit(const HoloFunction& f, const TestForm& phi,
                                           CeMode mode) {
  if (f.arity != dom_.n()) throw std::invalid_argument("ce_pair_limit: arity mismatch");
  if (phi.zero() || f.identically_zero) return exact_zero_result();
  const int n = dom_.n();
  auto terms = volume_coefficient(phi);
  const auto hints = hint_table(f, n);
  const int lev = limit_level();

  std::vector<const std::vector<FactorNode>*> grids(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) grids[size_t(j)] = &interior_grid(j, lev, hints[size_t(j)]);

  // per-term per-factor coefficient arrays with node weights folded in
  const size_t T = terms.size();
  std::vector<std::vector<std::vector<cplx>>> C(T, std::vector<std::vector<cplx>>(static_cast<size_t>(n)));
  for (size_t t = 0; t < T; ++t)
    for (int j = 0; j < n; ++j) {
      auto& arr = C[t][size_t(j)];
      const auto& nodes = *grids[size_t(j)];
      arr.resize(nodes.size());
      for (size_t i = 0; i < nodes.size(); ++i)
        arr[i] = terms[t].coef[size_t(j)](nodes[i].z) * nodes[i].w;
    }

  if (mode == CeMode::DiscDilate) {
    for (const auto& d : dom_.factors())
      if (!d.is_disc() || std::abs(d.center()) != 0.0)
        throw std::invalid_argument("ce_pair_limit: disc-dilate needs origin-centered disc factors");
    const double h0 = opt_.eps0_frac;
    std::vector<LadderEntry> ladder;
    std::vector<cplx> zbuf(static_cast<size_t>(n));
    for (int rg = 0; rg < opt_.rungs; ++rg) {
      const double h = h0 * std::pow(0.5, rg);
      const double rho = 1.0 - h;
      KahanSumC acc;
      std::vector<size_t> idx(static_cast<size_t>(n), 0);
      while (true) {
        cplx c = 0.0;
        for (size_t t = 0; t < T; ++t) {
          cplx p = terms[t].weight;
          for (int j = 0; j < n; ++j) p *= C[t][size_t(j)][idx[size_t(j)]];
          c += p;
        }
        if (c != 0.0) {
          for (int j = 0; j < n; ++j)
            zbuf[size_t(j)] = rho * (*grids[size_t(j)])[idx[size_t(j)]].z;
          acc.add(f.eval(zbuf.data()) * c);
        }
        int j = 0;
        for (; j < n; ++j) {
          if (++idx[size_t(j)] < grids[size_t(j)]->size()) break;
          idx[size_t(j)] = 0;
        }
        if (j == n) break;
      }
      ladder.push_back({h, acc.get()});
    }
    return settle_ladder(std::move(ladder), opt_.order_hint);
  }

  // patchwise translation
  std::vector<std::vector<FactorPiece>> pieces(static_cast<size_t>(n));
  double eps_cap = 1e300;
  for (int j = 0; j < n; ++j) {
    pieces[size_t(j)] = area_pieces(j, lev, hints[size_t(j)], opt_.patch_count);
    for (const auto& p : pieces[size_t(j)])
      if (p.is_patch) eps_cap = std::min(eps_cap, p.eps_max);
  }
  const double eps0 = std::min(opt_.eps0_frac * dom_.min_inradius(), 0.45 * eps_cap);

  // enumerate piece combinations; the all-interior one is eps-independent
  std::vector<int> combo(static_cast<size_t>(n), 0);
  cplx interior_part = 0.0;
  std::vector<cplx> rung_vals(static_cast<size_t>(opt_.rungs), 0.0);
  std::vector<cplx> zbuf(static_cast<size_t>(n));
  std::vector<KahanSumC> rung_acc(static_cast<size_t>(opt_.rungs));
  while (true) {
    bool all_interior = true;
    for (int j = 0; j < n; ++j)
      if (pieces[size_t(j)][size_t(combo[size_t(j)])].is_patch) all_interior = false;

    // iterate over the support tuples of this combination
    std::vector<const FactorPiece*> pc(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) pc[size_t(j)] = &pieces[size_t(j)][size_t(combo[size_t(j)])];
    bool empty = false;
    for (int j = 0; j < n; ++j)
      if (pc[size_t(j)]->support.empty()) empty = true;

    if (!empty) {
      std::vector<size_t> si(static_cast<size_t>(n), 0);
      if (all_interior) {
        KahanSumC acc;
        while (true) {
          cplx cut = 1.0;
          std::vector<int> ii(static_cast<size_t>(n));
          for (int j = 0; j < n; ++j) {
            ii[size_t(j)] = pc[size_t(j)]->support[si[size_t(j)]];
            cut *= pc[size_t(j)]->cut[size_t(ii[size_t(j)])];
          }
          cplx c = 0.0;
          for (size_t t = 0; t < T; ++t) {
            cplx p = terms[t].weight;
            for (int j = 0; j < n; ++j) p *= C[t][size_t(j)][size_t(ii[size_t(j)])];
            c += p;
          }
          c *= cut;
          if (c != 0.0) {
            for (int j = 0; j < n; ++j) zbuf[size_t(j)] = (*grids[size_t(j)])[size_t(ii[size_t(j)])].z;
            acc.add(f.eval(zbuf.data()) * c);
          }
          int j = 0;
          for (; j < n; ++j) {
            if (++si[size_t(j)] < pc[size_t(j)]->support.size()) break;
            si[size_t(j)] = 0;
          }
          if (j == n) break;
        }
        interior_part += acc.get();
      } else {
        for (int rg = 0; rg < opt_.rungs; ++rg) {
          const double eps = eps0 * std::pow(0.5, rg);
          std::fill(si.begin(), si.end(), 0);
          while (true) {
            cplx cut = 1.0;
            std::vector<int> ii(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) {
              ii[size_t(j)] = pc[size_t(j)]->support[si[size_t(j)]];
              cut *= pc[size_t(j)]->cut[size_t(ii[size_t(j)])];
            }
            cplx c = 0.0;
            for (size_t t = 0; t < T; ++t) {
              cplx p = terms[t].weight;
              for (int j = 0; j < n; ++j) p *= C[t][size_t(j)][size_t(ii[size_t(j)])];
              c += p;
            }
            c *= cut;
            if (c != 0.0) {
              for (int j = 0; j < n; ++j)
                zbuf[size_t(j)] =
                    (*grids[size_t(j)])[size_t(ii[size_t(j)])].z - eps * pc[size_t(j)]->v;
              rung_acc[size_t(rg)].add(f.eval(zbuf.data()) * c);
            }
            int j = 0;
            for (; j < n; ++j) {
              if (++si[size_t(j)] < pc[size_t(j)]->support.size()) break;
              si[size_t(j)] = 0;
            }
            if (j == n) break;
          }
        }
      }
    }

    int j = 0;
    for (; j < n; ++j) {
      if (++combo[size_t(j)] < int(pieces[size_t(j)].size())) break;
      combo[size_t(j)] = 0;
    }
    if (j == n) break;
  }

  std::vector<LadderEntry> ladder;
  for (int rg = 0; rg < opt_.rungs; ++rg)
    ladder.push_back({eps0 * std::pow(0.5, rg), interior_part + rung_acc[size_t(rg)].get()});
  return settle_ladder(std::move(ladder), opt_.order_hint);
}

// --- boundary-supported pairings --------------------------------------------------

namespace {
struct FaceLadderSpec {
  double eps0;
  int rungs;
};
}  // namespace

PairingResult PairingEngine::face_pair(const HoloFunction& f, int k, const FaceTestData& u) {
  if (f.arity != dom_.n()) throw std::invalid_argument("face_pair: arity mismatch");
  if (k < 0 || k >= dom_.n()) throw std::invalid_argument("face_pair: face index out of range");
  if (u.zero() || f.identically_zero) return exact_zero_result();
  const int n = dom_.n();
  const auto hints = hint_table(f, n);
  const int blev = limit_level() + opt_.boundary_boost;
  const int wlev = limit_level() + opt_.face_interior_boost;

  const auto& bnodes = boundary_grid(k, blev, hints[size_t(k)]);
  auto arcs = arc_pieces(k, blev, hints[size_t(k)], opt_.patch_count);
  std::vector<std::vector<FactorPiece>> wpieces(static_cast<size_t>(n));
  std::vector<const std::vector<FactorNode>*> grids(static_cast<size_t>(n), nullptr);
  double eps_cap = 1e300;
  for (const auto& a : arcs) eps_cap = std::min(eps_cap, a.eps_max);
  for (int j = 0; j < n; ++j) {
    if (j == k) continue;
    grids[size_t(j)] = &interior_grid(j, wlev, hints[size_t(j)]);
    wpieces[size_t(j)] = area_pieces(j, wlev, hints[size_t(j)], opt_.patch_count);
    for (const auto& p : wpieces[size_t(j)])
      if (p.is_patch) eps_cap = std::min(eps_cap, p.eps_max);
  }
  const double eps0 = std::min(opt_.eps0_frac * dom_.min_inradius(), 0.45 * eps_cap);

  // per-term precomputations
  const size_t T = u.terms.size();
  std::vector<std::vector<cplx>> angw(T);  // ang(t) * w_t over boundary nodes
  std::vector<std::vector<std::vector<cplx>>> Q(T, std::vector<std::vector<cplx>>(static_cast<size_t>(n)));
  for (size_t t = 0; t < T; ++t) {
    angw[t].resize(bnodes.size());
    for (size_t i = 0; i < bnodes.size(); ++i)
      angw[t][i] = u.terms[t].ang(bnodes[i].t) * bnodes[i].w * u.terms[t].weight;
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      auto& arr = Q[t][size_t(j)];
      const auto& nodes = *grids[size_t(j)];
      arr.resize(nodes.size());
      for (size_t i = 0; i < nodes.size(); ++i)
        arr[i] = u.terms[t].wcoef[size_t(j)](nodes[i].z) * nodes[i].w;
    }
  }

  std::vector<KahanSumC> rung_acc(static_cast<size_t>(opt_.rungs));
  std::vector<cplx> zbuf(static_cast<size_t>(n));

  // enumerate (arc, w-piece...) combinations
  std::vector<int> combo(static_cast<size_t>(n), 0);  // slot k indexes arcs, others wpieces
  auto combo_size = [&](int j) {
    return j == k ? int(arcs.size()) : int(wpieces[size_t(j)].size());
  };
  while (true) {
    const FactorPiece& arc = arcs[size_t(combo[size_t(k)])];
    std::vector<const FactorPiece*> pc(static_cast<size_t>(n), nullptr);
    bool empty = arc.support.empty();
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      pc[size_t(j)] = &wpieces[size_t(j)][size_t(combo[size_t(j)])];
      if (pc[size_t(j)]->support.empty()) empty = true;
    }
    if (!empty) {
      for (int rg = 0; rg < opt_.rungs; ++rg) {
        const double eps = eps0 * std::pow(0.5, rg);
        // iterate boundary support x interior supports
        for (int bi : arc.support) {
          const double cutb = arc.cut[size_t(bi)];
          const cplx zk = bnodes[size_t(bi)].z - eps * arc.v;
          std::vector<size_t> si(static_cast<size_t>(n), 0);
          // odometer over w factors only
          bool done = false;
          while (!done) {
            cplx cut = cutb;
            std::vector<int> ii(static_cast<size_t>(n), -1);
            for (int j = 0; j < n; ++j) {
              if (j == k) continue;
              ii[size_t(j)] = pc[size_t(j)]->support[si[size_t(j)]];
              cut *= pc[size_t(j)]->cut[size_t(ii[size_t(j)])];
            }
            cplx c = 0.0;
            for (size_t t = 0; t < T; ++t) {
              cplx p = angw[t][size_t(bi)];
              for (int j = 0; j < n; ++j) {
                if (j == k) continue;
                p *= Q[t][size_t(j)][size_t(ii[size_t(j)])];
              }
              c += p;
            }
            c *= cut;
            if (c != 0.0) {
              zbuf[size_t(k)] = zk;
              for (int j = 0; j < n; ++j) {
                if (j == k) continue;
                zbuf[size_t(j)] = (*grids[size_t(j)])[size_t(ii[size_t(j)])].z -
                                  eps * pc[size_t(j)]->v;
              }
              rung_acc[size_t(rg)].add(f.eval(zbuf.data()) * c);
            }
            int j = 0;
            for (; j < n; ++j) {
              if (j == k) continue;
              if (++si[size_t(j)] < pc[size_t(j)]->support.size()) break;
              si[size_t(j)] = 0;
            }
            if (j == n) done = true;
          }
        }
      }
    }
    int j = 0;
    for (; j < n; ++j) {
      if (++combo[size_t(j)] < combo_size(j)) break;
      combo[size_t(j)] = 0;
    }
    if (j == n) break;
  }

  std::vector<LadderEntry> ladder;
  for (int rg = 0; rg < opt_.rungs; ++rg)
    ladder.push_back({eps0 * std::pow(0.5, rg), rung_acc[size_t(rg)].get()});
  return settle_ladder(std::move(ladder), opt_.order_hint);
}

PairingResult PairingEngine::bc_pair(const HoloFunction& f, const TestForm& psi, BcRoute route) {
  if (psi.n != dom_.n() || psi.p != dom_.n() || psi.q != dom_.n() - 1)
    throw std::invalid_argument("bc_pair: psi must have bidegree (N, N-1)");
  if (psi.zero() || f.identically_zero) return exact_zero_result();
  if (route == BcRoute::DbarOfCe) {
    return ce_pair_ibp(f, dbar(psi));
  }
  // boundary limit: sum of per-face ladders with one shared eps ladder
  std::vector<std::vector<LadderEntry>> per_face;
  for (int k = 0; k < dom_.n(); ++k) {
    FaceForm ff = pullback_to_face(psi, dom_, k);
    if (ff.zero()) continue;
    FaceTestData data = face_form_to_test_data(ff);
    PairingResult rk = face_pair(f, k, data);
    per_face.push_back(rk.ladder);
  }
  if (per_face.empty()) return exact_zero_result();
  std::vector<LadderEntry> total = per_face[0];
  for (size_t i = 1; i < per_face.size(); ++i) {
    if (per_face[i].size() != total.size())
      throw std::runtime_error("bc_pair: face ladders misaligned");
    for (size_t r = 0; r < total.size(); ++r) total[r].value += per_face[i][r].value;
  }
  return settle_ladder(std::move(total), opt_.order_hint);
}

PairingResult PairingEngine::silov_pair(const HoloFunction& f, const TestForm& psi) {
  if (psi.n != dom_.n() || psi.p != dom_.n() || psi.q != 0)
    throw std::invalid_argument("silov_pair: psi must have bidegree (N, 0)");
  if (psi.zero() || f.identically_zero) return exact_zero_result();
  const int n = dom_.n();
  const auto hints = hint_table(f, n);
  const int lev = limit_level() + opt_.boundary_boost;

  std::vector<const std::vector<BoundaryNode>*> bnodes(static_cast<size_t>(n));
  std::vector<std::vector<FactorPiece>> arcs(static_cast<size_t>(n));
  double eps_cap = 1e300;
  for (int j = 0; j < n; ++j) {
    bnodes[size_t(j)] = &boundary_grid(j, lev, hints[size_t(j)]);
    arcs[size_t(j)] = arc_pieces(j, lev, hints[size_t(j)], opt_.patch_count);
    for (const auto& a : arcs[size_t(j)]) eps_cap = std::min(eps_cap, a.eps_max);
  }
  const double eps0 = std::min(opt_.eps0_frac * dom_.min_inradius(), 0.45 * eps_cap);

  // coefficient arrays: coef_j(gamma(t)) gamma'(t) w, per monomial
  const size_t T = psi.monomials.size();
  std::vector<std::vector<std::vector<cplx>>> C(T, std::vector<std::vector<cplx>>(static_cast<size_t>(n)));
  const unsigned full = (1u << n) - 1u;
  for (size_t t = 0; t < T; ++t) {
    if (psi.monomials[t].holo != full || psi.monomials[t].anti != 0u)
      throw std::invalid_argument("silov_pair: monomial of wrong bidegree");
    for (int j = 0; j < n; ++j) {
      auto& arr = C[t][size_t(j)];
      const auto& bn = *bnodes[size_t(j)];
      arr.resize(bn.size());
      for (size_t i = 0; i < bn.size(); ++i)
        arr[i] = psi.monomials[t].coef[size_t(j)](bn[i].z) * bn[i].dz * bn[i].w;
    }
  }

  std::vector<KahanSumC> rung_acc(static_cast<size_t>(opt_.rungs));
  std::vector<cplx> zbuf(static_cast<size_t>(n));
  std::vector<int> combo(static_cast<size_t>(n), 0);
  while (true) {
    std::vector<const FactorPiece*> pc(static_cast<size_t>(n));
    bool empty = false;
    for (int j = 0; j < n; ++j) {
      pc[size_t(j)] = &arcs[size_t(j)][size_t(combo[size_t(j)])];
      if (pc[size_t(j)]->support.empty()) empty = true;
    }
    if (!empty) {
      for (int rg = 0; rg < opt_.rungs; ++rg) {
        const double eps = eps0 * std::pow(0.5, rg);
        std::vector<size_t> si(static_cast<size_t>(n), 0);
        while (true) {
          double cut = 1.0;
          std::vector<int> ii(static_cast<size_t>(n));
          for (int j = 0; j < n; ++j) {
            ii[size_t(j)] = pc[size_t(j)]->support[si[size_t(j)]];
            cut *= pc[size_t(j)]->cut[size_t(ii[size_t(j)])];
          }
          cplx c = 0.0;
          for (size_t t = 0; t < T; ++t) {
            cplx p = psi.monomials[t].weight;
            for (int j = 0; j < n; ++j) p *= C[t][size_t(j)][size_t(ii[size_t(j)])];
            c += p;
          }
          c *= cut;
          if (c != 0.0) {
            for (int j = 0; j < n; ++j)
              zbuf[size_t(j)] =
                  (*bnodes[size_t(j)])[size_t(ii[size_t(j)])].z - eps * pc[size_t(j)]->v;
            rung_acc[size_t(rg)].add(f.eval(zbuf.data()) * c);
          }
          int j = 0;
          for (; j < n; ++j) {
            if (++si[size_t(j)] < pc[size_t(j)]->support.size()) break;
            si[size_t(j)] = 0;
          }
          if (j == n) break;
        }
      }
    }
    int j = 0;
    for (; j < n; ++j) {
      if (++combo[size_t(j)] < int(arcs[size_t(j)].size())) break;
      combo[size_t(j)] = 0;
    }
    if (j == n) break;
  }

  std::vector<LadderEntry> ladder;
  for (int rg = 0; rg < opt_.rungs; ++rg)
    ladder.push_back({eps0 * std::pow(0.5, rg), rung_acc[size_t(rg)].get()});
  return settle_ladder(std::move(ladder), opt_.order_hint);
}

PairingResult PairingEngine::cauchy_reconstruct_detail(const FaceDistributionProxy& proxy, cplx z,
                                                       std::vector<cplx> what, double margin) {
  const int n = dom_.n();
  const int k = proxy.face;
  if (k < 0 || k >= n) throw std::invalid_argument("cauchy_reconstruct: face out of range");
  const PlanarDomain& fack = dom_.factor(k);
  if (!fack.contains(z) || fack.dist(z) < margin)
    throw std::invalid_argument("cauchy_reconstruct: point violates the reconstruction margin");
  if (int(what.size()) != n) throw std::invalid_argument("cauchy_reconstruct: what arity mismatch");

  FaceTestTerm term;
  term.weight = 1.0;
  term.ang = [fack, z](double t) { return fack.boundary_deriv(t) / (fack.boundary(t) - z); };
  term.wcoef.resize(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (j == k) continue;
    const PlanarDomain& fj = dom_.factor(j);
    const cplx wj = what[size_t(j)];
    if (!fj.contains(wj) || fj.dist(wj) < 0.02 * fj.inradius())
      throw std::invalid_argument("cauchy_reconstruct: what must be strictly interior");
    if (fj.is_disc()) {
      // normalized reproducing localizer of the disc factor: smooth on the
      // closure, integrates holomorphic slices to their value at wj exactly
      const double R2 = fj.disc_radius() * fj.disc_radius();
      const cplx cc = std::conj(wj - fj.center());
      const cplx ctr = fj.center();
      term.wcoef[size_t(j)] = sf_from(
          [R2, cc, ctr](cplx w) {
            const cplx d = R2 - (w - ctr) * cc;
            return R2 / (M_PI * d * d);
          },
          [R2, cc, ctr](cplx w, int order) {
            Jet2 d = Jet2::constant(R2, order) -
                     (Jet2::variable(w, order) - Jet2::constant(ctr, order)) * cc;
            Jet2 inv = d.reciprocal();
            return inv * inv * (R2 / M_PI);
          });
    } else {
      const double rad = std::min(0.7 * fj.dist(wj), 0.3 * fj.inradius());
      term.wcoef[size_t(j)] = sf_radial_bump_normalized(wj, rad);
    }
  }
  FaceTestData data;
  data.n = n;
  data.face = k;
  data.terms.push_back(std::move(term));

  PairingResult r = face_pair(proxy.f, k, data);
  const cplx scale = 1.0 / (cplx(0.0, 2.0 * M_PI));
  r.value *= scale;
  r.error_estimate *= std::abs(scale);
  for (auto& e : r.ladder) e.value *= scale;
  return r;
}

cplx PairingEngine::cauchy_reconstruct(const FaceDistributionProxy& proxy, cplx z,
                                       std::vector<cplx> what, double margin) {
  return cauchy_reconstruct_detail(proxy, z, std::move(what), margin).value;
}

PairingResult FaceDistributionProxy::pair(PairingEngine& engine, const FaceTestData& u) const {
  return engine.face_pair(f, face, u);
}

}  // namespace bvc
