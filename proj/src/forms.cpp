#include "bvc/forms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bvc {

int sort_parity(std::vector<int> keys) {
  int sign = 1;
  for (size_t i = 0; i < keys.size(); ++i)
    for (size_t j = i + 1; j < keys.size(); ++j) {
      if (keys[i] == keys[j]) return 0;
      if (keys[i] > keys[j]) sign = -sign;
    }
  return sign;
}

namespace {

std::vector<int> mask_indices(unsigned m) {
  std::vector<int> r;
  for (int j = 0; m; ++j, m >>= 1)
    if (m & 1u) r.push_back(j);
  return r;
}

// canonical word ids: holo block (id = j) then anti block (id = 32 + j)
std::vector<int> canonical_word(unsigned holo, unsigned anti) {
  std::vector<int> w;
  for (int j : mask_indices(holo)) w.push_back(j);
  for (int j : mask_indices(anti)) w.push_back(32 + j);
  return w;
}

// factor-block ids: dz_j -> 2j, dzbar_j -> 2j+1
int block_id(int canon_id) {
  return canon_id >= 32 ? 2 * (canon_id - 32) + 1 : 2 * canon_id;
}

}  // namespace

void TestForm::add_monomial(const std::vector<int>& holo_idx, const std::vector<int>& anti_idx,
                            cplx weight, std::vector<SmoothFn> coef) {
  if (int(holo_idx.size()) != p || int(anti_idx.size()) != q)
    throw std::invalid_argument("add_monomial: index counts do not match the bidegree");
  if (int(coef.size()) != n) throw std::invalid_argument("add_monomial: coefficient arity mismatch");
  std::vector<int> hk = holo_idx, ak = anti_idx;
  const int sh = sort_parity(hk);
  const int sa = sort_parity(ak);
  if (sh == 0 || sa == 0) return;  // repeated index: monomial vanishes
  FormMonomial m;
  for (int j : holo_idx) {
    if (j < 0 || j >= n) throw std::invalid_argument("add_monomial: index out of range");
    m.holo |= 1u << j;
  }
  for (int j : anti_idx) {
    if (j < 0 || j >= n) throw std::invalid_argument("add_monomial: index out of range");
    m.anti |= 1u << j;
  }
  m.weight = weight * double(sh * sa);
  m.coef = std::move(coef);
  if (m.weight != 0.0) monomials.push_back(std::move(m));
}

TestForm dbar(const TestForm& form) {
  TestForm out;
  out.n = form.n;
  out.p = form.p;
  out.q = form.q + 1;
  if (out.q > form.n) {
    out.q = std::min(out.q, form.n);
    return out;  // nothing of that degree on 1-D factors
  }
  for (const auto& m : form.monomials) {
    const int pdeg = int(mask_indices(m.holo).size());
    for (int j = 0; j < form.n; ++j) {
      if ((m.anti >> j) & 1u) continue;
      // sign of moving the left-inserted dzbar_j into normal position
      int below = 0;
      for (int i = 0; i < j; ++i)
        if ((m.anti >> i) & 1u) ++below;
      const int sign = ((pdeg + below) % 2 == 0) ? 1 : -1;
      FormMonomial d = m;
      d.anti |= 1u << j;
      d.weight = m.weight * double(sign);
      d.coef[size_t(j)] = m.coef[size_t(j)].dzbar();
      out.monomials.push_back(std::move(d));
    }
  }
  return out;
}

TestForm dbar_factor(int k, const TestForm& form) {
  if (k < 0 || k >= form.n) throw std::invalid_argument("dbar_factor: factor out of range");
  TestForm out;
  out.n = form.n;
  out.p = form.p;
  out.q = form.q + 1;
  for (const auto& m : form.monomials) {
    if ((m.anti >> k) & 1u) continue;  // dzbar_k ^ dzbar_k = 0
    // parity: canonical -> factor blocks
    auto cw = canonical_word(m.holo, m.anti);
    std::vector<int> bk;
    for (int id : cw) bk.push_back(block_id(id));
    const int pi1 = sort_parity(bk);
    // within factor k, dbar inserts dzbar_k left of the (possible) dz_k
    const int local = ((m.holo >> k) & 1u) ? -1 : 1;
    // parity: factor blocks (with new symbol in place) -> canonical
    auto cw2 = canonical_word(m.holo, m.anti | (1u << k));
    std::vector<int> bk2;
    for (int id : cw2) bk2.push_back(block_id(id));
    // sort_parity(bk2) is the parity of canonical->block for the enlarged word,
    // which equals block->canonical (a permutation and its inverse share parity)
    const int pi2 = sort_parity(bk2);
    FormMonomial d = m;
    d.anti |= 1u << k;
    d.weight = m.weight * double(pi1 * local * pi2);
    d.coef[size_t(k)] = m.coef[size_t(k)].dzbar();
    out.monomials.push_back(std::move(d));
  }
  return out;
}

TestForm sigma_apply(int j, const TestForm& form) {
  if (j < 0 || j >= form.n) throw std::invalid_argument("sigma_apply: factor out of range");
  TestForm out = form;
  for (auto& m : out.monomials) {
    int deg = 0;
    for (int k = 0; k < j; ++k) deg += m.degree_in_factor(k);
    if (deg % 2) m.weight = -m.weight;
  }
  return out;
}

TestForm form_add(const TestForm& a, const TestForm& b) {
  if (a.n != b.n || a.p != b.p || a.q != b.q)
    throw std::invalid_argument("form_add: mixed bidegrees");
  TestForm out = a;
  out.monomials.insert(out.monomials.end(), b.monomials.begin(), b.monomials.end());
  return out;
}

TestForm form_scale(cplx s, const TestForm& a) {
  TestForm out = a;
  for (auto& m : out.monomials) m.weight *= s;
  return out;
}

cplx form_eval_on_vectors(const TestForm& form, const std::vector<cplx>& z,
                          const std::vector<std::vector<cplx>>& vectors) {
  const int deg = form.p + form.q;
  if (int(vectors.size()) != deg)
    throw std::invalid_argument("form_eval_on_vectors: need degree-many vectors");
  cplx total = 0.0;
  for (const auto& m : form.monomials) {
    auto word = canonical_word(m.holo, m.anti);
    // det of M[a][b] = omega_a(V_b)
    std::vector<std::vector<cplx>> M(static_cast<size_t>(deg), std::vector<cplx>(static_cast<size_t>(deg)));
    for (int a = 0; a < deg; ++a)
      for (int b = 0; b < deg; ++b) {
        const int id = word[size_t(a)];
        M[size_t(a)][size_t(b)] =
            id >= 32 ? std::conj(vectors[size_t(b)][size_t(id - 32)]) : vectors[size_t(b)][size_t(id)];
      }
    // Laplace expansion (degree <= 4 in practice)
    std::function<cplx(std::vector<std::vector<cplx>>&)> det =
        [&](std::vector<std::vector<cplx>>& A) -> cplx {
      const size_t nn = A.size();
      if (nn == 0) return 1.0;
      if (nn == 1) return A[0][0];
      cplx r = 0.0;
      int sgn = 1;
      for (size_t i = 0; i < nn; ++i) {
        std::vector<std::vector<cplx>> sub(nn - 1, std::vector<cplx>(nn - 1));
        for (size_t a = 1; a < nn; ++a) {
          size_t cc = 0;
          for (size_t b = 0; b < nn; ++b) {
            if (b == i) continue;
            sub[a - 1][cc++] = A[a][b];
          }
        }
        r += double(sgn) * A[0][i] * det(sub);
        sgn = -sgn;
      }
      return r;
    };
    total += m.coef_value(z) * det(M);
  }
  return total;
}

std::vector<TensorCoefTerm> volume_coefficient(const TestForm& form) {
  const unsigned full = (1u << form.n) - 1u;
  if (form.p != form.n || form.q != form.n)
    throw std::invalid_argument("volume_coefficient: form must be of top bidegree");
  std::vector<TensorCoefTerm> out;
  for (const auto& m : form.monomials) {
    if (m.holo != full || m.anti != full)
      throw std::invalid_argument("volume_coefficient: monomial of wrong degree");
    // reorder [dz_1..dz_N dzbar_1..dzbar_N] into interleaved factor blocks,
    // each block contributing dz^dzbar = -2i dx^dy
    auto cw = canonical_word(m.holo, m.anti);
    std::vector<int> bk;
    for (int id : cw) bk.push_back(block_id(id));
    const int sgn = sort_parity(bk);
    cplx w = m.weight * double(sgn);
    for (int j = 0; j < form.n; ++j) w *= cplx(0.0, -2.0);
    out.push_back({w, m.coef});
  }
  return out;
}

TestForm make_weinstock_form(const ProductDomain& dom, const std::vector<HoloTensorTerm>& g,
                             double cutoff_margin, const std::vector<cplx>& anti_weights) {
  const int n = dom.n();
  if (int(anti_weights.size()) != n)
    throw std::invalid_argument("make_weinstock_form: one anti weight per factor");
  for (const auto& term : g)
    if (cutoff_margin > term.holo_margin)
      throw std::invalid_argument(
          "make_weinstock_form: cutoff margin exceeds declared holomorphy margin");

  // chi = prod_j (cutoff == 1 on an r_j <= 0.35*margin neighborhood of the
  // closure, supported inside the declared holomorphy margin)
  std::vector<SmoothFn> chi;
  for (int j = 0; j < n; ++j)
    chi.push_back(dom.factor(j).closure_cutoff(0.35 * cutoff_margin, 0.85 * cutoff_margin));

  TestForm out;
  out.n = n;
  out.p = n;
  out.q = n - 1;
  std::vector<int> holo_idx(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) holo_idx[size_t(j)] = j;
  for (const auto& term : g) {
    if (int(term.fs.size()) != n)
      throw std::invalid_argument("make_weinstock_form: coefficient arity mismatch");
    for (int k = 0; k < n; ++k) {
      if (anti_weights[size_t(k)] == 0.0) continue;
      std::vector<int> anti_idx;
      for (int j = 0; j < n; ++j)
        if (j != k) anti_idx.push_back(j);
      std::vector<SmoothFn> coef(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j) coef[size_t(j)] = chi[size_t(j)] * term.fs[size_t(j)];
      out.add_monomial(holo_idx, anti_idx, term.weight * anti_weights[size_t(k)], std::move(coef));
    }
  }
  return out;
}

FaceForm pullback_to_face(const TestForm& form, const ProductDomain& dom, int k) {
  if (k < 0 || k >= form.n) throw std::invalid_argument("pullback_to_face: factor out of range");
  const PlanarDomain fac = dom.factor(k);
  FaceForm out;
  out.n = form.n;
  out.face = k;
  for (const auto& m : form.monomials) {
    const bool hk = (m.holo >> k) & 1u;
    const bool ak = (m.anti >> k) & 1u;
    if (hk && ak) continue;  // dt ^ dt = 0
    FaceMonomial fm;
    fm.has_dt = hk || ak;
    fm.holo = m.holo & ~(1u << k);
    fm.anti = m.anti & ~(1u << k);
    // move the substituted dt to the front of the wedge word
    int crossings = 0;
    if (hk) {
      for (int i = 0; i < k; ++i)
        if ((m.holo >> i) & 1u) ++crossings;
    } else if (ak) {
      for (int i = 0; i < form.n; ++i)
        if ((m.holo >> i) & 1u) ++crossings;
      for (int i = 0; i < k; ++i)
        if ((m.anti >> i) & 1u) ++crossings;
    }
    fm.weight = m.weight * (crossings % 2 == 0 ? 1.0 : -1.0);
    fm.coef = m.coef;
    SmoothFn ck = m.coef[size_t(k)];
    fm.coef[size_t(k)] = sf_const(1.0);
    if (hk) {
      fm.ang = [fac, ck](double t) { return ck(fac.boundary(t)) * fac.boundary_deriv(t); };
    } else if (ak) {
      fm.ang = [fac, ck](double t) {
        return ck(fac.boundary(t)) * std::conj(fac.boundary_deriv(t));
      };
    } else {
      fm.ang = [fac, ck](double t) { return ck(fac.boundary(t)); };
    }
    out.monomials.push_back(std::move(fm));
  }
  return out;
}

FaceTestData face_form_to_test_data(const FaceForm& ff) {
  const int n = ff.n;
  const unsigned rest = ((1u << n) - 1u) & ~(1u << ff.face);
  FaceTestData out;
  out.n = n;
  out.face = ff.face;
  for (const auto& m : ff.monomials) {
    if (!m.has_dt || m.holo != rest || m.anti != rest)
      throw std::invalid_argument("face_form_to_test_data: not of top face degree");
    // parity from [dt, dz_I, dzbar_J] to the oriented face word
    // [blocks of factors < k][dt][blocks of factors > k], dz before dzbar.
    std::vector<int> keys;
    keys.push_back(2 * ff.face);  // dt sits at the factor-k slot
    for (int j = 0; j < n; ++j)
      if (j != ff.face && ((m.holo >> j) & 1u)) keys.push_back(2 * j);
    for (int j = 0; j < n; ++j)
      if (j != ff.face && ((m.anti >> j) & 1u)) keys.push_back(2 * j + 1);
    const int sgn = sort_parity(keys);
    cplx w = m.weight * double(sgn);
    for (int j = 0; j < n; ++j)
      if (j != ff.face) w *= cplx(0.0, -2.0);
    FaceTestTerm t;
    t.weight = w;
    t.ang = m.ang;
    t.wcoef = m.coef;
    out.terms.push_back(std::move(t));
  }
  return out;
}

VectorFieldT make_transversal_field(const PlanarDomain& dom, int factor_index) {
  // a = mu * 1/(dr/dzbar), with mu == 1 on the band and 0 near the center
  // (where the gradient may degenerate); T r = 1 holds on the band.
  const double ri = dom.inradius();
  const cplx c = dom.center();
  SmoothFn dist2 = sf_from(
      [c](cplx z) { return cplx(std::norm(z - c)); },
      [c](cplx z, int order) {
        Jet2 w = Jet2::variable(z, order) - Jet2::constant(c, order);
        Jet2 wb = Jet2::variable_bar(z, order) - Jet2::constant(std::conj(c), order);
        return w * wb;
      });
  SmoothFn mu = sf_smoothstep_of(dist2, 0.09 * ri * ri, 0.25 * ri * ri);
  SmoothFn inv_grad = sf_from(
      [dom](cplx z) { return 1.0 / dom.r_zbar(z); },
      [dom](cplx z, int order) { return dom.r_jet(z, std::min(order + 1, kMaxJetOrder)).dzbar().reciprocal(); });
  return {factor_index, mu * inv_grad};
}

SmoothFn tstar_apply(const VectorFieldT& T, const SmoothFn& u) {
  return cplx(-1.0) * (T.a * u.dzbar() + T.a.dzbar() * u);
}

}  // namespace bvc
