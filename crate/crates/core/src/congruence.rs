//! Reduction mod q, finite quotient groups with dense indexing, return
//! trajectory generator sets, Cayley-graph Laplacian gaps, the sphere
//! containment (Zariski density) test and trace-field witnesses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{canonical_residue, ring_norm, GaussInt};
use crate::error::{Error, Result};
use crate::groups::{BoundaryPoint, GroupElement};
use crate::linalg::{singular_value_range, symmetric_eigenvalues, SymMatrix};
use crate::semigroup::{SemigroupSpec, Word};

/// Entrywise canonical reduction of a group element mod q. For SL₂ the
/// entries are Gaussian residues; for SO_Q plain integer residues. The key
/// is a flat i64 vector usable for hashing.
fn reduce_entries(g: &GroupElement, q: &GaussInt) -> Result<Vec<(i64, i64)>> {
    let to_small = |x: &GaussInt| -> Result<(i64, i64)> {
        let re = x
            .re
            .to_i64()
            .ok_or_else(|| Error::resource("residue too large for dense indexing"))?;
        let im = x
            .im
            .to_i64()
            .ok_or_else(|| Error::resource("residue too large for dense indexing"))?;
        Ok((re, im))
    };
    match g {
        GroupElement::Sl2 { m, .. } => m
            .iter()
            .map(|e| to_small(&canonical_residue(e, q)))
            .collect(),
        GroupElement::So { m, .. } => m
            .iter()
            .map(|e| {
                let r = canonical_residue(
                    &GaussInt {
                        re: e.clone(),
                        im: BigInt::zero(),
                    },
                    q,
                );
                to_small(&r)
            })
            .collect(),
    }
}

/// Finite quotient: the closure of the generator images (and their
/// inverses) mod q under multiplication, with dense element indices and a
/// cached multiplication-by-generator structure.
pub struct QuotientGroup {
    modulus: GaussInt,
    gaussian: bool,
    /// canonical residue key → dense index
    index: BTreeMap<Vec<(i64, i64)>, usize>,
    /// representative element per index (exact matrices with canonical
    /// residue entries)
    pub elements: Vec<GroupElement>,
    pub identity_index: usize,
}

impl QuotientGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn modulus_label(&self) -> String {
        format!("{}", self.modulus)
    }

    pub fn modulus(&self) -> &GaussInt {
        &self.modulus
    }

    /// N(q) of the modulus.
    pub fn modulus_norm(&self) -> Result<BigInt> {
        ring_norm(&self.modulus, self.gaussian)
    }

    /// Dense index of π_q(γ).
    pub fn project(&self, g: &GroupElement) -> Result<usize> {
        let key = reduce_entries(g, &self.modulus)?;
        self.index
            .get(&key)
            .copied()
            .ok_or_else(|| Error::domain("element projects outside the generated quotient"))
    }

    /// Index of the product of two indexed elements.
    pub fn mul_index(&self, a: usize, b: usize) -> Result<usize> {
        let prod = self.elements[a].multiply(&self.elements[b])?;
        self.project(&prod)
    }

    /// Index of the group inverse. Stored representatives are canonical
    /// residues whose integer determinant is only ≡ 1 mod q, so the
    /// integral inverse() (which assumes det ±1) does not apply; mod q the
    /// inverse of a det-≡-1 matrix is its adjugate, and for SO_Q it is
    /// QMᵀQ regardless of the representative.
    pub fn inverse_index(&self, a: usize) -> Result<usize> {
        let elem = &self.elements[a];
        let inv_mod_q = match elem {
            GroupElement::Sl2 { real, m } => {
                let det = m[0].mul(&m[3]).sub(&m[1].mul(&m[2]));
                if canonical_residue(&det, &self.modulus) != canonical_residue(&GaussInt::from(1), &self.modulus)
                {
                    return Err(Error::numeric(
                        "quotient element determinant not ≡ 1 mod q",
                    ));
                }
                GroupElement::Sl2 {
                    real: *real,
                    m: Box::new([m[3].clone(), m[1].neg(), m[2].neg(), m[0].clone()]),
                }
            }
            GroupElement::So { .. } => elem.inverse(),
        };
        self.project(&inv_mod_q)
    }

    /// Permutation g ↦ g·π_q(γ) as dense indices.
    pub fn right_multiplication_perm(&self, gamma: &GroupElement) -> Result<Vec<u32>> {
        let t = self.project(gamma)?;
        (0..self.order())
            .map(|g| Ok(self.mul_index(g, t)? as u32))
            .collect()
    }
}

/// BFS closure of the generator images and their inverses mod q.
///
/// The element cap guards the dense table; exceeding it is a resource
/// error. Reduction is entrywise canonical, so the table is deterministic.
pub fn quotient_group(spec: &SemigroupSpec, q: &GaussInt, cap: usize) -> Result<QuotientGroup> {
    let gaussian = spec.gaussian_ring();
    quotient_group_from(spec.generators(), q, gaussian, cap)
}

/// Closure from an explicit generator list.
pub fn quotient_group_from(
    generators: &[GroupElement],
    q: &GaussInt,
    gaussian: bool,
    cap: usize,
) -> Result<QuotientGroup> {
    if q.is_zero() {
        return Err(Error::domain("zero modulus"));
    }
    if generators.is_empty() {
        return Err(Error::domain("no generators"));
    }
    let identity = GroupElement::identity(generators[0].setting());
    let canon = |g: &GroupElement| -> Result<GroupElement> {
        // replace entries by canonical residues so stored elements stay small
        Ok(match g {
            GroupElement::Sl2 { real, m } => GroupElement::Sl2 {
                real: *real,
                m: Box::new([
                    canonical_residue(&m[0], q),
                    canonical_residue(&m[1], q),
                    canonical_residue(&m[2], q),
                    canonical_residue(&m[3], q),
                ]),
            },
            GroupElement::So { n, m } => GroupElement::So {
                n: *n,
                m: m
                    .iter()
                    .map(|e| {
                        canonical_residue(
                            &GaussInt {
                                re: e.clone(),
                                im: BigInt::zero(),
                            },
                            q,
                        )
                        .re
                    })
                    .collect(),
            },
        })
    };

    let mut index = BTreeMap::new();
    let mut elements = Vec::new();
    let mut frontier = Vec::new();
    let key0 = reduce_entries(&identity, q)?;
    index.insert(key0, 0);
    elements.push(canon(&identity)?);
    frontier.push(0usize);

    let mut step_set: Vec<GroupElement> = Vec::new();
    for g in generators {
        step_set.push(g.clone());
        step_set.push(g.inverse());
    }

    while let Some(i) = frontier.pop() {
        let base = elements[i].clone();
        for s in &step_set {
            let prod = base.multiply(s)?;
            let key = reduce_entries(&prod, q)?;
            if !index.contains_key(&key) {
                if elements.len() >= cap {
                    return Err(Error::resource(format!(
                        "quotient group exceeds cap {cap}"
                    )));
                }
                let idx = elements.len();
                index.insert(key, idx);
                elements.push(canon(&prod)?);
                frontier.push(idx);
            }
        }
    }
    let identity_index = 0;
    Ok(QuotientGroup {
        modulus: q.clone(),
        gaussian,
        index,
        elements,
        identity_index,
    })
}

/// S^p(y, z): all products (Π_{j=1}^p g_{α_j})(Π_{j=1}^p g_{α̃_{p+1−j}}⁻¹)
/// over admissible sequences (y, α_p, …, α₁, z) and (y, α̃_p, …, α̃₁, z).
/// Contains the identity (α = α̃) and is closed under inverse (swap).
pub fn return_trajectory_set(
    spec: &SemigroupSpec,
    p: usize,
    y: usize,
    z: usize,
) -> Result<Vec<GroupElement>> {
    if p == 0 {
        return Err(Error::domain("p ≥ 1 required"));
    }
    let n = spec.n_symbols();
    if y >= n || z >= n {
        return Err(Error::domain("endpoint symbol out of range"));
    }
    // admissible middles stored top-down as (α_p, …, α₁): the first pushed
    // symbol is α_p (needs (y, α_p) admissible), consecutive stored pairs
    // realize (α_{j+1}, α_j), and the last must continue into z.
    let mut middles: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(w) = stack.pop() {
        if w.len() == p {
            if spec.is_admissible_pair(*w.last().unwrap(), z) {
                middles.push(w);
            }
            continue;
        }
        for s in 0..n {
            let ok = match w.last() {
                None => spec.is_admissible_pair(y, s),
                Some(&last) => spec.is_admissible_pair(last, s),
            };
            if ok {
                let mut next = w.clone();
                next.push(s);
                stack.push(next);
            }
        }
    }
    if middles.is_empty() {
        return Err(Error::domain("no admissible continuation between y and z"));
    }
    // The trajectory word (y, α_p, …, α₁, z) lists symbols top-down;
    // Π_{j=1}^p g_{α_j} = g_{α₁}⋯g_{α_p} reads the stored middle
    // (α_p, …, α₁) in reverse.
    let fwd: Vec<GroupElement> = middles
        .iter()
        .map(|m| {
            let word = Word(m.iter().rev().copied().collect());
            spec.word_to_element(&word)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for a in &fwd {
        for b in &fwd {
            let prod = a.multiply(&b.inverse())?;
            let key = format!("{prod:?}");
            if seen.insert(key) {
                out.push(prod);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub modulus: String,
    pub group_order: usize,
    pub generating_set_size: usize,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Second-smallest eigenvalue of the Laplacian Δφ = φ − (1/#S) Σ_{h∈S} δ_h∗φ
/// of the right-convolution averaging operator on the quotient group.
///
/// δ_h ∗ φ(g) = φ(g h⁻¹), so the averaging matrix is the mean of the
/// right-multiplication-by-h⁻¹ permutations; S symmetric makes it symmetric.
pub fn cayley_gap(group: &QuotientGroup, s: &[GroupElement], cap: usize) -> Result<GapReport> {
    if s.is_empty() {
        return Err(Error::domain("empty generating set"));
    }
    let n = group.order();
    if n > cap {
        return Err(Error::resource(format!(
            "group order {n} exceeds dense eigensolve cap {cap}"
        )));
    }
    // averaging matrix A[g, g·h⁻¹] += 1/#S over the multiset S
    let mut perm_weights: BTreeMap<usize, f64> = BTreeMap::new();
    for h in s {
        let hi = group.project(h)?;
        let hinv = group.inverse_index(hi)?;
        *perm_weights.entry(hinv).or_insert(0.0) += 1.0 / s.len() as f64;
    }
    let mut avg = vec![0.0f64; n * n];
    for (&hinv, &w) in &perm_weights {
        for g in 0..n {
            let to = group.mul_index(g, hinv)?;
            avg[g * n + to] += w;
        }
    }
    // L = I − (A + Aᵀ)/2; the symmetrization is exact when S is symmetric.
    let mut lap = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let a = (avg[i * n + j] + avg[j * n + i]) / 2.0;
            let v = if i == j { 1.0 - a } else { -a };
            lap.set(i, j, v);
        }
    }
    let ev = symmetric_eigenvalues(&lap)?;
    // verify the constant vector is in the kernel
    let ones = vec![1.0; n];
    let mut out = vec![0.0; n];
    lap.mul_vec(&ones, &mut out);
    let kernel_residual = out.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
    if kernel_residual > 1e-9 {
        return Err(Error::numeric(format!(
            "constant vector not in Laplacian kernel (residual {kernel_residual:.2e})"
        )));
    }
    Ok(GapReport {
        modulus: group.modulus_label(),
        group_order: n,
        generating_set_size: s.len(),
        lambda1: ev[0],
        lambda2: ev[1],
    })
}

/// True iff all points lie on a common (n−2)-sphere or affine hyperplane of
/// ℝ^{n−1}: rank test on the lifted vectors (1, x, |x|²), tolerance 1e-9 on
/// the scale-normalized smallest singular value.
pub fn sphere_containment_test(points: &[Vec<f64>]) -> Result<bool> {
    if points.is_empty() {
        return Err(Error::domain("no points"));
    }
    let m = points[0].len();
    if points.len() < m + 2 {
        return Err(Error::domain(format!(
            "need at least {} points in ℝ^{m}",
            m + 2
        )));
    }
    // scale to tame |x|²
    let scale = points
        .iter()
        .flat_map(|p| p.iter().map(|t| t.abs()))
        .fold(1.0f64, f64::max);
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut row = Vec::with_capacity(m + 2);
            row.push(1.0);
            let mut norm_sq = 0.0;
            for t in p {
                let t = t / scale;
                row.push(t);
                norm_sq += t * t;
            }
            row.push(norm_sq);
            let len: f64 = row.iter().map(|t| t * t).sum::<f64>().sqrt();
            row.iter().map(|t| t / len).collect()
        })
        .collect();
    let (smin, smax) = singular_value_range(&rows)?;
    Ok(smin <= 1e-9 * smax.max(1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityProbeReport {
    pub p: usize,
    pub y: usize,
    pub z: usize,
    pub generators: usize,
    pub fixed_points_collected: usize,
    /// Some(true) = density witnessed (points escape every sphere);
    /// Some(false) = contained; None = inconclusive (too few points).
    pub density_witnessed: Option<bool>,
}

/// Zariski-density probe: the attracting fixed points of hyperbolic words
/// of length ≤ 3 over S^p(y, z), run through the sphere containment test.
pub fn zariski_density_probe(
    spec: &SemigroupSpec,
    p: usize,
    y: usize,
    z: usize,
) -> Result<DensityProbeReport> {
    let s = return_trajectory_set(spec, p, y, z)?;
    let dim = spec.dim_n() - 1;
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut push_fixed = |g: &GroupElement| {
        if g.is_identity() || !g.is_hyperbolic() {
            return;
        }
        if let Ok((BoundaryPoint::Finite(v), _)) = g.fixed_points() {
            let v = v[..dim.min(v.len())].to_vec();
            let fresh = points
                .iter()
                .all(|q: &Vec<f64>| {
                    q.iter()
                        .zip(&v)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                        > 1e-9
                });
            if fresh {
                points.push(v);
            }
        }
    };
    // words of length ≤ 3 over S (with a cap on the scan)
    let cap = 4000usize;
    let mut scanned = 0usize;
    'outer: for a in &s {
        push_fixed(a);
        for b in &s {
            let ab = a.multiply(b).unwrap();
            push_fixed(&ab);
            for c in &s {
                let abc = ab.multiply(c).unwrap();
                push_fixed(&abc);
                scanned += 1;
                if scanned > cap {
                    break 'outer;
                }
            }
        }
    }
    let needed = dim + 2;
    let density = if points.len() < needed {
        None
    } else {
        Some(!sphere_containment_test(&points)?)
    };
    Ok(DensityProbeReport {
        p,
        y,
        z,
        generators: s.len(),
        fixed_points_collected: points.len(),
        density_witnessed: density,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceWitness {
    pub case: usize,
    /// The witness as a word in the digit letters (a, b) it was built from.
    pub description: String,
    pub trace_re: String,
    pub trace_im: String,
    /// Row-major entries of the exact witness matrix, (re, im) pairs.
    pub matrix: Vec<(String, String)>,
}

fn gauss_block(a: &GaussInt, b: &GaussInt) -> Result<GroupElement> {
    let ga = crate::semigroup::digit_matrix(a, false)?;
    let gb = crate::semigroup::digit_matrix(b, false)?;
    ga.multiply(&gb)
}

/// The four closed-form trace expressions of the trace-field computation;
/// index 1..4, exact Gaussian arithmetic.
pub fn trace_case_formula(case: usize, a: &GaussInt, b: &GaussInt) -> GaussInt {
    let two = GaussInt::from(2);
    let four = GaussInt::from(4);
    match case {
        1 => {
            // (a−b)² + 2
            let d = a.sub(b);
            d.mul(&d).add(&two)
        }
        2 => {
            // (a−b)⁴ + ((ab)² + 4)(a−b)² + 2
            let d = a.sub(b);
            let d2 = d.mul(&d);
            let d4 = d2.mul(&d2);
            let ab = a.mul(b);
            let ab2 = ab.mul(&ab);
            d4.add(&ab2.add(&four).mul(&d2)).add(&two)
        }
        3 => {
            // −((ab)² + 4ab + 4)(a−b)² + 2
            let d = a.sub(b);
            let d2 = d.mul(&d);
            let ab = a.mul(b);
            let ab2 = ab.mul(&ab);
            let poly = ab2.add(&ab.mul(&four)).add(&four);
            poly.mul(&d2).neg().add(&two)
        }
        4 => {
            // 2a³b − a⁴ − (ab)² + 2
            let a2 = a.mul(a);
            let a3 = a2.mul(a);
            let a4 = a2.mul(&a2);
            let ab = a.mul(b);
            let ab2 = ab.mul(&ab);
            a3.mul(b).mul(&two).sub(&a4).sub(&ab2).add(&two)
        }
        _ => panic!("case must be 1..=4"),
    }
}

/// The matrix products whose traces the case formulas describe.
pub fn trace_case_element(case: usize, a: &GaussInt, b: &GaussInt) -> Result<GroupElement> {
    let gaa = gauss_block(a, a)?;
    let gbb = gauss_block(b, b)?;
    let gab = gauss_block(a, b)?;
    let gba = gauss_block(b, a)?;
    Ok(match case {
        1 => gaa.multiply(&gbb.inverse())?,
        2 => gaa
            .multiply(&gaa)?
            .multiply(&gbb.inverse())?
            .multiply(&gbb.inverse())?,
        3 => gab
            .multiply(&gab)?
            .multiply(&gba.inverse())?
            .multiply(&gba.inverse())?,
        4 => gaa
            .multiply(&gaa)?
            .multiply(&gba.inverse())?
            .multiply(&gba.inverse())?,
        _ => return Err(Error::domain("case must be 1..=4")),
    })
}

/// Witness that the trace field is ℚ(i): an element of a return trajectory
/// subgroup with non-real exact trace, selected by the case analysis on a
/// letter pair {a, b} ⊄ ℝ.
pub fn trace_field_witness(spec: &SemigroupSpec) -> Result<TraceWitness> {
    let alphabet = match spec {
        SemigroupSpec::Cf(d) if !d.real => &d.alphabet,
        SemigroupSpec::Cf(_) => {
            return Err(Error::domain(
                "alphabet ⊂ ℕ has real trace field; no witness exists",
            ))
        }
        _ => return Err(Error::domain("trace field witness is a CF-setting notion")),
    };
    // distinct a, b with {a, b} ⊄ ℝ
    let mut pair = None;
    'search: for a in alphabet {
        for b in alphabet {
            if a != b && (!a.is_real() || !b.is_real()) {
                pair = Some((a.clone(), b.clone()));
                break 'search;
            }
        }
    }
    let (a, b) = pair.ok_or_else(|| Error::domain("no non-real letter pair"))?;
    let d2 = a.sub(&b).mul(&a.sub(&b));
    let ab = a.mul(&b);
    let ab2 = ab.mul(&ab);
    let a2 = a.mul(&a);
    let cubic = a2.mul(&a).mul(&b).mul(&GaussInt::from(2)).sub(&a2.mul(&a2));
    let case = if !d2.is_real() {
        1
    } else if !ab2.is_real() {
        2
    } else if !ab.is_real() {
        3
    } else if !cubic.is_real() {
        4
    } else {
        // all four invariants real forces b = ā and then Im(2a³b − a⁴) =
        // 8r⁴sin³θcosθ = 0, i.e. a = b — impossible for distinct letters
        return Err(Error::numeric("impossible case: all invariants real"));
    };
    let elem = trace_case_element(case, &a, &b)?;
    let tr = elem.trace();
    if tr.is_real() {
        return Err(Error::numeric("selected witness has real trace"));
    }
    let formula = trace_case_formula(case, &a, &b);
    if formula != tr {
        return Err(Error::numeric(
            "case formula disagrees with the exact matrix trace",
        ));
    }
    let matrix = match &elem {
        GroupElement::Sl2 { m, .. } => m
            .iter()
            .map(|e| (e.re.to_string(), e.im.to_string()))
            .collect(),
        _ => unreachable!(),
    };
    Ok(TraceWitness {
        case,
        description: format!("case {case} with letters a = {a}, b = {b}"),
        trace_re: tr.re.to_string(),
        trace_im: tr.im.to_string(),
        matrix,
    })
}

/// ℤ/n as the unipotent subgroup ⟨(1 1; 0 1)⟩ mod n: control data for the
/// circulant eigenvalue check λ₂ = 1 − cos(2π/n).
pub fn cyclic_group_control(n: i64) -> Result<(QuotientGroup, Vec<GroupElement>)> {
    let shift = GroupElement::sl2_i64(1, 1, 0, 1)?;
    let q = GaussInt::from(n);
    let group = quotient_group_from(&[shift.clone()], &q, false, (n as usize) + 4)?;
    Ok((group, vec![shift.clone(), shift.inverse()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::SemigroupSpec;

    fn cf12() -> SemigroupSpec {
        SemigroupSpec::cf(vec![GaussInt::from(1), GaussInt::from(2)], None).unwrap()
    }

    #[test]
    fn projection_is_entrywise_reduction() {
        let spec = cf12();
        let q = GaussInt::from(2);
        let group = quotient_group(&spec, &q, 100).unwrap();
        // g_{1,1} = (1 1; 1 2) ≡ (1 1; 1 0) mod 2
        let g11 = spec.generator(0);
        let idx = group.project(g11).unwrap();
        let expected = GroupElement::Sl2 {
            real: true,
            m: Box::new([
                GaussInt::from(1),
                GaussInt::from(1),
                GaussInt::from(1),
                GaussInt::from(0),
            ]),
        };
        assert_eq!(group.elements[idx], expected);
    }

    #[test]
    fn projection_is_homomorphism() {
        let spec = cf12();
        let q = GaussInt::from(3);
        let group = quotient_group(&spec, &q, 100).unwrap();
        let mut state = 99u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) % 4) as usize
        };
        for _ in 0..200 {
            let w1 = Word(vec![next(), next(), next()]);
            let w2 = Word(vec![next(), next()]);
            let g = spec.word_to_element(&w1).unwrap();
            let h = spec.word_to_element(&w2).unwrap();
            let lhs = group.project(&g.multiply(&h).unwrap()).unwrap();
            let rhs = group
                .mul_index(group.project(&g).unwrap(), group.project(&h).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn quotient_orders_match_sl2_counts() {
        let spec = cf12();
        // |SL₂(ℤ/q)| = q³∏_{p|q}(1−1/p²): 6 at q=2, 24 at q=3.
        let g2 = quotient_group(&spec, &GaussInt::from(2), 100).unwrap();
        assert_eq!(g2.order(), 6);
        let g3 = quotient_group(&spec, &GaussInt::from(3), 100).unwrap();
        assert_eq!(g3.order(), 24);
        // unit modulus → trivial group
        let g1 = quotient_group(&spec, &GaussInt::from(1), 100).unwrap();
        assert_eq!(g1.order(), 1);
    }

    #[test]
    fn sl2_mod2_by_exhaustion() {
        // all 16 binary matrices, det ≡ 1 mod 2: exactly 6
        let mut count = 0;
        for bits in 0..16u32 {
            let e = [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1, (bits >> 3) & 1];
            let det = (e[0] * e[3]) as i64 - (e[1] * e[2]) as i64;
            if det.rem_euclid(2) == 1 {
                count += 1;
            }
        }
        assert_eq!(count, 6);
    }

    #[test]
    fn return_trajectory_structure() {
        let spec = cf12();
        let s1 = return_trajectory_set(&spec, 1, 0, 0).unwrap();
        // 16 products before dedup; identity present; closed under inverse
        assert!(s1.len() <= 16 && s1.len() > 4);
        assert!(s1.iter().any(|g| g.is_identity()));
        for g in &s1 {
            assert!(s1.contains(&g.inverse()));
        }
    }

    #[test]
    fn return_trajectory_matches_brute_force_on_subshift() {
        // Schottky-group style spec with forbidden pairs exercises the
        // admissibility constraints in S^p(y, z).
        let base = match crate::semigroup::example_schottky_spec().unwrap() {
            SemigroupSpec::Schottky(d) => d,
            _ => unreachable!(),
        };
        let gens = vec![
            base.generators[0].clone(),
            base.generators[1].clone(),
            base.generators[0].inverse(),
            base.generators[1].inverse(),
        ];
        let spec = SemigroupSpec::schottky(2, base.disks.clone(), gens).unwrap();
        let s = return_trajectory_set(&spec, 2, 0, 0).unwrap();
        // brute force: all pairs of admissible middle sequences
        let n = spec.n_symbols();
        let mut mids = Vec::new();
        for a in 0..n {
            for b in 0..n {
                // middle stored top-down (α₂, α₁): admissibility (0, a), (a, b), (b, 0)
                if spec.is_admissible_pair(0, a)
                    && spec.is_admissible_pair(a, b)
                    && spec.is_admissible_pair(b, 0)
                {
                    mids.push((a, b));
                }
            }
        }
        let mut expect = std::collections::BTreeSet::new();
        for &(a1, a2) in &mids {
            for &(b1, b2) in &mids {
                // Π g_{α_j} = g_{α₁} g_{α₂} with (α₂, α₁) = (a1, a2) top-down…
                let f = spec
                    .word_to_element(&Word(vec![a2, a1]))
                    .unwrap();
                let g = spec.word_to_element(&Word(vec![b2, b1])).unwrap();
                expect.insert(format!("{:?}", f.multiply(&g.inverse()).unwrap()));
            }
        }
        let got: std::collections::BTreeSet<String> =
            s.iter().map(|g| format!("{g:?}")).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn cayley_gap_full_group_control() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(3), 100).unwrap();
        let all: Vec<GroupElement> = group.elements.clone();
        let rep = cayley_gap(&group, &all, 2000).unwrap();
        assert!(rep.lambda1.abs() < 1e-10);
        assert!((rep.lambda2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cayley_gap_cycle_control() {
        for n in [5i64, 12] {
            let (group, s) = cyclic_group_control(n).unwrap();
            assert_eq!(group.order(), n as usize);
            let rep = cayley_gap(&group, &s, 2000).unwrap();
            let expected = 1.0 - (2.0 * std::f64::consts::PI / n as f64).cos();
            assert!(rep.lambda1.abs() < 1e-10);
            assert!((rep.lambda2 - expected).abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn cayley_gap_positive_for_return_sets() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(3), 2000).unwrap();
        let s = return_trajectory_set(&spec, 1, 0, 0).unwrap();
        let rep = cayley_gap(&group, &s, 2000).unwrap();
        assert!(rep.lambda2 > 0.0, "λ₂ = {}", rep.lambda2);
    }

    #[test]
    fn sphere_test_cases() {
        // 4 points on the unit circle in ℝ²
        let circle: Vec<Vec<f64>> = (0..4)
            .map(|k| {
                let t = 1.0 + k as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        assert!(sphere_containment_test(&circle).unwrap());
        // generic points: not on one circle
        let generic = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.3, 0.7],
        ];
        assert!(!sphere_containment_test(&generic).unwrap());
        // collinear points: degenerate sphere (a line)
        let line: Vec<Vec<f64>> = (0..5).map(|k| vec![k as f64, 2.0 * k as f64]).collect();
        assert!(sphere_containment_test(&line).unwrap());
        // too few points
        assert!(sphere_containment_test(&circle[..2]).is_err());
    }

    #[test]
    fn density_probe_witnesses_cf() {
        let spec = cf12();
        let rep = zariski_density_probe(&spec, 1, 0, 0).unwrap();
        assert_eq!(rep.density_witnessed, Some(true), "{rep:?}");
    }

    #[test]
    fn density_probe_schottky() {
        let spec = crate::semigroup::example_schottky_spec().unwrap();
        let rep = zariski_density_probe(&spec, 2, 0, 0).unwrap();
        assert_eq!(rep.density_witnessed, Some(true), "{rep:?}");
    }

    #[test]
    fn trace_case_formulas_match_products() {
        let mut state = 7u64;
        let mut next = move || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            let re = ((state >> 33) % 5) as i64 + 1;
            let im = ((state >> 13) % 9) as i64 - 4;
            GaussInt::new(re, im)
        };
        for _ in 0..200 {
            let a = next();
            let b = next();
            if a == b {
                continue;
            }
            for case in 1..=4 {
                let f = trace_case_formula(case, &a, &b);
                let e = trace_case_element(case, &a, &b).unwrap().trace();
                assert_eq!(f, e, "case {case}, a = {a}, b = {b}");
            }
        }
    }

    #[test]
    fn trace_witness_case1_and_case4() {
        // a = 1+i, b = 2 → (a−b)² = −2i non-real → case 1, trace 2−2i.
        let spec = SemigroupSpec::cf(
            vec![GaussInt::new(1, 1), GaussInt::from(2)],
            None,
        )
        .unwrap();
        let w = trace_field_witness(&spec).unwrap();
        assert_eq!(w.case, 1);
        assert_eq!((w.trace_re.as_str(), w.trace_im.as_str()), ("2", "-2"));

        // a = 1+i, b = 1−i = ā: cases 1–3 real, case 4 witness.
        let spec2 = SemigroupSpec::cf(
            vec![GaussInt::new(1, 1), GaussInt::new(1, -1)],
            None,
        )
        .unwrap();
        let w2 = trace_field_witness(&spec2).unwrap();
        assert_eq!(w2.case, 4);
        let tr_im: i64 = w2.trace_im.parse().unwrap();
        assert_ne!(tr_im, 0);
    }

    #[test]
    fn trace_witness_rejects_real_alphabet() {
        let spec = cf12();
        assert!(trace_field_witness(&spec).is_err());
    }
}

#[cfg(test)]
mod inverse_regression {
    use super::*;
    use crate::semigroup::SemigroupSpec;

    #[test]
    fn inverse_index_is_group_inverse_for_all_elements() {
        let spec =
            SemigroupSpec::cf(vec![GaussInt::from(1), GaussInt::from(2)], None).unwrap();
        for q in [2i64, 3, 5, 7] {
            let group = quotient_group(&spec, &GaussInt::from(q), 5000).unwrap();
            for a in 0..group.order() {
                let inv = group.inverse_index(a).unwrap();
                assert_eq!(
                    group.mul_index(a, inv).unwrap(),
                    group.identity_index,
                    "q = {q}, element {a}"
                );
                assert_eq!(
                    group.mul_index(inv, a).unwrap(),
                    group.identity_index,
                    "q = {q}, element {a}"
                );
            }
        }
    }
}
