//! The expanding boundary map T, its distortion function τ = log |T′|,
//! Birkhoff sums, periodic points, cylinders with exact Möbius hulls,
//! sections of Tᵐ and the local non-integrability probe.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::ratio_to_f64;
use crate::error::{Error, Result};
use crate::groups::{BoundaryPoint, GroupElement};
use crate::semigroup::{SemigroupSpec, Word};

/// Float guard band for point-in-disk symbol assignment.
pub const MEMBERSHIP_GUARD: f64 = 1e-12;

/// Depth-k cylinder: admissible word of k+1 symbols (len(α) = k in the
/// usual convention), geometric hull ball in boundary coordinates and an
/// anchor point on the limit set inside the cylinder.
#[derive(Clone, Debug, Serialize)]
pub struct Cylinder {
    pub word: Word,
    pub hull_center: Vec<f64>,
    pub hull_radius: f64,
    #[serde(skip)]
    pub anchor: BoundaryPoint,
}

impl Cylinder {
    pub fn depth(&self) -> usize {
        self.word.len() - 1
    }
    pub fn diameter(&self) -> f64 {
        2.0 * self.hull_radius
    }
}

/// Signed inside-margin of x with respect to disk j (positive = inside).
fn disk_margin(spec: &SemigroupSpec, j: usize, x: &BoundaryPoint) -> f64 {
    match spec {
        SemigroupSpec::Cf(d) => {
            // x ∈ D_j ⟺ g_j⁻¹ x ∈ D^ε.
            let pulled = spec.generator(j).inverse().mobius_apply(x);
            let v = match pulled {
                BoundaryPoint::Finite(v) => v,
                BoundaryPoint::Infinity => return f64::NEG_INFINITY,
            };
            let (re, im) = (v[0], v[1]);
            let eps = ratio_to_f64(&d.epsilon);
            let disk = 0.25 - ((re - 0.5) * (re - 0.5) + im * im);
            let re_m = re - eps;
            let im_m = (0.5 - eps / 4.0) - im;
            disk.min(re_m).min(im_m)
        }
        SemigroupSpec::Schottky(d) => {
            let v = match x {
                BoundaryPoint::Finite(v) => v,
                BoundaryPoint::Infinity => return f64::NEG_INFINITY,
            };
            let (c, r) = &d.disks[j];
            let dist: f64 = v
                .iter()
                .zip(c.iter().map(ratio_to_f64))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            ratio_to_f64(r) - dist
        }
    }
}

/// The disk symbol containing x; exactly one must match with margin beyond
/// the guard band, otherwise a domain error is returned.
pub fn symbol_of(spec: &SemigroupSpec, x: &BoundaryPoint) -> Result<usize> {
    let mut inside = Vec::new();
    let mut ambiguous = false;
    for j in 0..spec.n_symbols() {
        let m = disk_margin(spec, j, x);
        if m > MEMBERSHIP_GUARD {
            inside.push(j);
        } else if m > -MEMBERSHIP_GUARD {
            ambiguous = true;
        }
    }
    match (inside.len(), ambiguous) {
        (1, false) => Ok(inside[0]),
        (0, false) => Err(Error::domain("point lies outside every disk")),
        _ => Err(Error::domain("point membership ambiguous within guard band")),
    }
}

/// One step of the expanding map: T(x) = g_j⁻¹·x for x ∈ D_j, returning
/// the image and the symbol j.
pub fn expanding_map(spec: &SemigroupSpec, x: &BoundaryPoint) -> Result<(BoundaryPoint, usize)> {
    let j = symbol_of(spec, x)?;
    Ok((spec.generator(j).inverse().mobius_apply(x), j))
}

/// Distortion value at a point of D: τ(x) = log |T′(x)|.
pub fn distortion(spec: &SemigroupSpec, x: &BoundaryPoint) -> Result<f64> {
    let j = symbol_of(spec, x)?;
    let der = spec.generator(j).inverse().conformal_derivative(x)?;
    Ok(der.ln())
}

/// τ at the branch point g_j·u (no disk search): log |T′(g_j u)| =
/// −log |g_j′(u)|.
pub fn distortion_branch(spec: &SemigroupSpec, j: usize, u: &BoundaryPoint) -> Result<f64> {
    let der = spec.generator(j).conformal_derivative(u)?;
    Ok(-der.ln())
}

/// Birkhoff sum τ_k(x) = Σ_{j<k} τ(Tʲ x); errors carry the exit step when
/// the orbit leaves the domain.
pub fn birkhoff_sum(spec: &SemigroupSpec, x: &BoundaryPoint, k: usize) -> Result<f64> {
    let mut acc = 0.0;
    let mut pt = x.clone();
    for step in 0..k {
        let t = distortion(spec, &pt)
            .map_err(|e| Error::domain(format!("orbit exits domain at step {step}: {e}")))?;
        acc += t;
        pt = expanding_map(spec, &pt)?.0;
    }
    Ok(acc)
}

/// Anchor point ω(y): the attracting fixed point of g_y — the fixed point
/// of the lexicographically least admissible periodic word starting from y
/// (the single-symbol word (y), always self-admissible).
pub fn omega_anchor(spec: &SemigroupSpec, y: usize) -> Result<BoundaryPoint> {
    let (att, _) = spec.generator(y).fixed_points()?;
    Ok(att)
}

/// Attracting fixed point of g(w) for a cyclically admissible word; lies in
/// the cylinder of w and satisfies T^{len(w)}(x) = x.
pub fn periodic_point(spec: &SemigroupSpec, w: &Word) -> Result<BoundaryPoint> {
    if w.is_empty() {
        return Err(Error::domain("periodic point of the empty word"));
    }
    if !spec.is_cyclically_admissible(w)? {
        return Err(Error::domain("word is not cyclically admissible"));
    }
    let g = spec.word_to_element(w)?;
    let (att, _) = g.fixed_points()?;
    Ok(att)
}

/// Exact Möbius image of the disk |z − c| ≤ r (c, r rational, pole outside)
/// under a 2×2 unimodular matrix; returns (center re, center im, radius²).
fn cf_disk_image(
    g: &GroupElement,
    c_re: &BigRational,
    c_im: &BigRational,
    r: &BigRational,
) -> Result<(BigRational, BigRational, BigRational)> {
    let m = match g {
        GroupElement::Sl2 { m, .. } => m,
        _ => return Err(Error::domain("cf_disk_image expects an SL₂ element")),
    };
    let conv = |g: &crate::arith::GaussInt| {
        (
            BigRational::from_integer(g.re.clone()),
            BigRational::from_integer(g.im.clone()),
        )
    };
    let (ar, ai) = conv(&m[0]);
    let (br, bi) = conv(&m[1]);
    let (cr, ci) = conv(&m[2]);
    let (dr, di) = conv(&m[3]);
    let zero = BigRational::from_integer(BigInt::from(0));
    let c_abs_sq = &cr * &cr + &ci * &ci;
    if c_abs_sq == zero {
        // affine: z ↦ (a z + b)/d
        let d_abs_sq = &dr * &dr + &di * &di;
        let a_abs_sq = &ar * &ar + &ai * &ai;
        let nr = &ar * c_re - &ai * c_im + br;
        let ni = &ar * c_im + &ai * c_re + bi;
        let wr = (&nr * &dr + &ni * &di) / &d_abs_sq;
        let wi = (&ni * &dr - &nr * &di) / &d_abs_sq;
        let r_sq = r * r * a_abs_sq / d_abs_sq;
        return Ok((wr, wi, r_sq));
    }
    // decompose g = translate(a/c) ∘ scale(−Δ/c²) ∘ invert ∘ translate(d/c)
    let dc_r = (&dr * &cr + &di * &ci) / &c_abs_sq;
    let dc_i = (&di * &cr - &dr * &ci) / &c_abs_sq;
    let z_r = c_re + &dc_r;
    let z_i = c_im + &dc_i;
    let z_abs_sq = &z_r * &z_r + &z_i * &z_i;
    let t = &z_abs_sq - &(r * r);
    if t <= zero {
        return Err(Error::domain("pole inside disk: image is unbounded"));
    }
    // inversion of D(ζ₀, r): center conj(ζ₀)/t, radius r/t
    let inv_r = &z_r / &t;
    let inv_i = -(&z_i / &t);
    let d = g.det();
    let det_r = BigRational::from_integer(d.re.clone());
    let det_i = BigRational::from_integer(d.im.clone());
    let c_sq_r = &cr * &cr - &ci * &ci;
    let c_sq_i = &cr * &ci + &ci * &cr;
    let c_sq_abs = &c_sq_r * &c_sq_r + &c_sq_i * &c_sq_i;
    let s_r = -((&det_r * &c_sq_r + &det_i * &c_sq_i) / &c_sq_abs);
    let s_i = -((&det_i * &c_sq_r - &det_r * &c_sq_i) / &c_sq_abs);
    let scaled_r = &s_r * &inv_r - &s_i * &inv_i;
    let scaled_i = &s_r * &inv_i + &s_i * &inv_r;
    let ac_r = (&ar * &cr + &ai * &ci) / &c_abs_sq;
    let ac_i = (&ai * &cr - &ar * &ci) / &c_abs_sq;
    let w_r = scaled_r + ac_r;
    let w_i = scaled_i + ac_i;
    let det_abs = &det_r * &det_r + &det_i * &det_i;
    let r_sq = r * r * det_abs / (&c_abs_sq * &c_abs_sq * (&t * &t));
    Ok((w_r, w_i, r_sq))
}

/// Exact hull of the cylinder of `word` (k+1 symbols, depth k).
///
/// CF: image of the untrimmed base disk |z − 1/2| ≤ 1/2 under the full word
/// product. Schottky n = 2: endpoint-exact interval image of the last disk
/// under the leading product. Higher n falls back to a sampled bounding
/// ball.
pub fn cylinder_hull(spec: &SemigroupSpec, word: &Word) -> Result<(Vec<f64>, f64)> {
    if word.is_empty() {
        return Err(Error::domain("hull of the empty cylinder"));
    }
    match spec {
        SemigroupSpec::Cf(_) => {
            let g = spec.word_to_element(word)?;
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            let zero = BigRational::from_integer(BigInt::from(0));
            let (wr, wi, rsq) = cf_disk_image(&g, &half, &zero, &half)?;
            Ok((
                vec![ratio_to_f64(&wr), ratio_to_f64(&wi)],
                ratio_to_f64(&rsq).sqrt(),
            ))
        }
        SemigroupSpec::Schottky(d) => {
            let last = *word.0.last().unwrap();
            let lead = Word(word.0[..word.len() - 1].to_vec());
            let g = spec.word_to_element(&lead)?;
            let (c, r) = &d.disks[last];
            if d.n == 2 {
                let l = crate::groups::ExactPoint::Finite(vec![&c[0] - r]);
                let u = crate::groups::ExactPoint::Finite(vec![&c[0] + r]);
                let gl = g.mobius_apply_exact(&l);
                let gu = g.mobius_apply_exact(&u);
                match (gl, gu) {
                    (
                        crate::groups::ExactPoint::Finite(a),
                        crate::groups::ExactPoint::Finite(b),
                    ) => {
                        let (lo, hi) = if a[0] <= b[0] {
                            (a[0].clone(), b[0].clone())
                        } else {
                            (b[0].clone(), a[0].clone())
                        };
                        let two = BigRational::from_integer(BigInt::from(2));
                        let center = (&lo + &hi) / &two;
                        let rad = (&hi - &lo) / &two;
                        Ok((vec![ratio_to_f64(&center)], ratio_to_f64(&rad)))
                    }
                    _ => Err(Error::domain("cylinder hull hits ∞")),
                }
            } else {
                // sampled bounding ball
                let dim = d.n - 1;
                let cf: Vec<f64> = c.iter().map(ratio_to_f64).collect();
                let rf = ratio_to_f64(r);
                let center_img = match g.mobius_apply(&BoundaryPoint::Finite(cf.clone())) {
                    BoundaryPoint::Finite(v) => v,
                    BoundaryPoint::Infinity => return Err(Error::domain("cylinder hull hits ∞")),
                };
                let mut radius: f64 = 0.0;
                for t in 0..32 {
                    let ang = std::f64::consts::TAU * (t as f64) / 32.0;
                    let mut x = cf.clone();
                    x[0] += rf * ang.cos();
                    if dim > 1 {
                        x[1] += rf * ang.sin();
                    }
                    if let BoundaryPoint::Finite(v) = g.mobius_apply(&BoundaryPoint::Finite(x)) {
                        let dist: f64 = v
                            .iter()
                            .zip(&center_img)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                        radius = radius.max(dist);
                    }
                }
                Ok((center_img, radius * (1.0 + 1e-9)))
            }
        }
    }
}

/// Anchor point of the cylinder of `word`: g_{w₀}⋯g_{w_{s−2}}·ω(w_{s−1}).
pub fn cylinder_anchor(spec: &SemigroupSpec, word: &Word) -> Result<BoundaryPoint> {
    let last = *word
        .0
        .last()
        .ok_or_else(|| Error::domain("anchor of the empty cylinder"))?;
    let mut x = omega_anchor(spec, last)?;
    for &s in word.0[..word.len() - 1].iter().rev() {
        x = spec.generator(s).mobius_apply(&x);
    }
    Ok(x)
}

/// All depth-k cylinders (admissible words of k+1 symbols) with exact hulls
/// and anchors. Guarded by a size cap since the count grows like Nᵏ.
pub fn cylinders_at_depth(spec: &SemigroupSpec, k: usize) -> Result<Vec<Cylinder>> {
    let n = spec.n_symbols();
    let est = (n as f64).powi(k as i32 + 1);
    if est > 3e5 {
        return Err(Error::resource(format!(
            "cylinder enumeration at depth {k} would produce ~{est:.0} cylinders"
        )));
    }
    let mut out = Vec::new();
    let mut stack = vec![Word::empty()];
    while let Some(w) = stack.pop() {
        if w.len() == k + 1 {
            let (hull_center, hull_radius) = cylinder_hull(spec, &w)?;
            let anchor = cylinder_anchor(spec, &w)?;
            out.push(Cylinder {
                word: w,
                hull_center,
                hull_radius,
                anchor,
            });
            continue;
        }
        for s in (0..n).rev() {
            if let Some(&last) = w.0.last() {
                if !spec.is_admissible_pair(last, s) {
                    continue;
                }
            }
            let mut next = w.clone();
            next.0.push(s);
            stack.push(next);
        }
    }
    Ok(out)
}

/// Section of Tᵐ given by a length-m word: v = g(word) restricted to the
/// disks D_j with (last(word), j) admissible; Tᵐ ∘ v = Id there.
#[derive(Clone, Debug, Serialize)]
pub struct SectionMap {
    pub word: Word,
}

impl SectionMap {
    pub fn order(&self) -> usize {
        self.word.len()
    }

    pub fn domain_symbols(&self, spec: &SemigroupSpec) -> Vec<usize> {
        let last = *self.word.0.last().expect("nonempty section word");
        (0..spec.n_symbols())
            .filter(|&j| spec.is_admissible_pair(last, j))
            .collect()
    }

    pub fn apply(&self, spec: &SemigroupSpec, u: &BoundaryPoint) -> Result<BoundaryPoint> {
        Ok(spec.word_to_element(&self.word)?.mobius_apply(u))
    }

    /// τ_m(v(u)) = −log |g(word)′(u)| by the chain rule.
    pub fn birkhoff_at(&self, spec: &SemigroupSpec, u: &BoundaryPoint) -> Result<f64> {
        let g = spec.word_to_element(&self.word)?;
        Ok(-g.conformal_derivative(u)?.ln())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LnicReport {
    pub m: usize,
    pub best_pair: (Word, Word),
    pub delta0_hat: f64,
    pub pairs_scanned: usize,
    pub samples: usize,
}

/// Deterministic sample points on the limit set: random admissible words of
/// the given length applied to the anchor of their last symbol.
pub fn sample_limit_points(
    spec: &SemigroupSpec,
    count: usize,
    word_len: usize,
    seed: u64,
) -> Result<Vec<BoundaryPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_symbols();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut w = Vec::with_capacity(word_len);
        for _ in 0..word_len {
            let choices: Vec<usize> = (0..n)
                .filter(|&s| match w.last() {
                    Some(&l) => spec.is_admissible_pair(l, s),
                    None => true,
                })
                .collect();
            w.push(choices[rng.random_range(0..choices.len())]);
        }
        let word = Word(w);
        out.push(cylinder_anchor(spec, &word)?);
    }
    Ok(out)
}

/// Local non-integrability probe (the checkable consequence of LNIC):
/// scan section pairs of Tᵐ, and for each estimate the minimum over sampled
/// point pairs of |Δ(u) − Δ(u′)| / ‖u − u′‖ with Δ = τ_m∘v₁ − τ_m∘v₂;
/// return the pair maximizing that minimum and the value δ̂₀.
pub fn lnic_probe(
    spec: &SemigroupSpec,
    m: usize,
    sample_count: usize,
    seed: u64,
) -> Result<LnicReport> {
    if m < 1 {
        return Err(Error::domain("section order m ≥ 1 required"));
    }
    let n = spec.n_symbols();
    // all admissible section words of length m, capped
    let mut words = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(w) = stack.pop() {
        if w.len() == m {
            words.push(Word(w));
            continue;
        }
        for s in 0..n {
            if let Some(&l) = w.last() {
                if !spec.is_admissible_pair(l, s) {
                    continue;
                }
            }
            let mut next = w.clone();
            next.push(s);
            stack.push(next);
        }
    }
    if words.len() < 2 {
        return Err(Error::domain("no section pair exists"));
    }
    if words.len() > 64 {
        words.truncate(64);
    }
    let samples = sample_limit_points(spec, sample_count.clamp(8, 256), 24, seed)?;

    let mut best: Option<(Word, Word, f64)> = None;
    let mut pairs_scanned = 0usize;
    for i in 0..words.len() {
        for j in (i + 1)..words.len() {
            let v1 = SectionMap {
                word: words[i].clone(),
            };
            let v2 = SectionMap {
                word: words[j].clone(),
            };
            let dom1 = v1.domain_symbols(spec);
            let dom2 = v2.domain_symbols(spec);
            let usable: Vec<&BoundaryPoint> = samples
                .iter()
                .filter(|u| {
                    symbol_of(spec, u)
                        .map(|s| dom1.contains(&s) && dom2.contains(&s))
                        .unwrap_or(false)
                })
                .collect();
            if usable.len() < 2 {
                continue;
            }
            pairs_scanned += 1;
            let deltas: Vec<f64> = usable
                .iter()
                .map(|u| Ok(v1.birkhoff_at(spec, u)? - v2.birkhoff_at(spec, u)?))
                .collect::<Result<_>>()?;
            let mut min_q = f64::INFINITY;
            for a in 0..usable.len() {
                for b in (a + 1)..usable.len() {
                    let dist = usable[a].dist(usable[b]);
                    if dist < 1e-12 {
                        continue;
                    }
                    let q = (deltas[a] - deltas[b]).abs() / dist;
                    min_q = min_q.min(q);
                }
            }
            if min_q.is_finite() {
                let better = match &best {
                    None => true,
                    Some((_, _, b)) => min_q > *b,
                };
                if better {
                    best = Some((words[i].clone(), words[j].clone(), min_q));
                }
            }
        }
    }
    let (w1, w2, delta0_hat) =
        best.ok_or_else(|| Error::domain("no usable section pair with two samples"))?;
    Ok(LnicReport {
        m,
        best_pair: (w1, w2),
        delta0_hat,
        pairs_scanned,
        samples: samples.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TemporalDistance {
    pub value: f64,
    pub depth: usize,
    pub tail_bound: f64,
}

/// Partial sum of the temporal distance function
/// φ_{α,β}(u, u′) = Δ_α(u,u′) − Δ_β(u,u′) with
/// Δ_α = Σ_j [τ(g_{α_j}⋯g_{α₀}u) − τ(g_{α_j}⋯g_{α₀}u′)], truncated at
/// `depth` terms, with a geometric tail bound from the hyperbolicity
/// constants.
pub fn temporal_distance(
    spec: &SemigroupSpec,
    alpha: &Word,
    beta: &Word,
    u: &BoundaryPoint,
    u_prime: &BoundaryPoint,
    depth: usize,
) -> Result<TemporalDistance> {
    let k = symbol_of(spec, u)?;
    let k2 = symbol_of(spec, u_prime)?;
    if k != k2 {
        return Err(Error::domain("u and u′ must share a disk"));
    }
    for w in [alpha, beta] {
        if !spec.is_admissible(w)? {
            return Err(Error::domain("inadmissible prefix"));
        }
        if let Some(&first) = w.0.first() {
            if !spec.is_admissible_pair(first, k) {
                return Err(Error::domain("prefix does not continue the disk symbol"));
            }
        }
    }
    let depth = depth.min(alpha.len()).min(beta.len());
    let mut value = 0.0;
    for (idx, w) in [alpha, beta].into_iter().enumerate() {
        let sign = if idx == 0 { 1.0 } else { -1.0 };
        let mut pu = u.clone();
        let mut pv = u_prime.clone();
        for j in 0..depth {
            let s = w.0[j];
            pu = spec.generator(s).mobius_apply(&pu);
            pv = spec.generator(s).mobius_apply(&pv);
            let tu = distortion(spec, &pu)?;
            let tv = distortion(spec, &pv)?;
            value += sign * (tu - tv);
        }
    }
    // terms decay like Lip(τ)·‖u−u′‖·κ₂^{−j}
    let kappa2 = min_expansion(spec);
    let lip = lip_tau_estimate(spec);
    let dist = u.dist(u_prime);
    let tail_bound = 2.0 * lip * dist * kappa2.powi(-(depth as i32)) * kappa2 / (kappa2 - 1.0);
    Ok(TemporalDistance {
        value,
        depth,
        tail_bound,
    })
}

/// Lower bound on |T′| over the domain: (1+ε)⁴ for CF; sampled minimum for
/// Schottky.
pub fn min_expansion(spec: &SemigroupSpec) -> f64 {
    match spec {
        SemigroupSpec::Cf(d) => {
            let eps = ratio_to_f64(&d.epsilon);
            (1.0 + eps).powi(4)
        }
        SemigroupSpec::Schottky(_) => {
            let mut min = f64::INFINITY;
            if let Ok(cyls) = cylinders_at_depth(spec, 1) {
                for c in cyls {
                    if let Ok(t) = distortion(spec, &c.anchor) {
                        min = min.min(t.exp());
                    }
                }
            }
            if min.is_finite() && min > 1.0 {
                min
            } else {
                1.5
            }
        }
    }
}

/// Crude Lipschitz estimate for τ used in reported tail bounds.
fn lip_tau_estimate(spec: &SemigroupSpec) -> f64 {
    match spec {
        SemigroupSpec::Cf(_) => 4.0,
        SemigroupSpec::Schottky(_) => 8.0,
    }
}

/// Upper bound (1+C)⁴ on |T′| for CF with C = max |a| + 1.
pub fn cf_expansion_upper(spec: &SemigroupSpec) -> Option<f64> {
    match spec {
        SemigroupSpec::Cf(d) => {
            let cmax = d
                .alphabet
                .iter()
                .map(|a| {
                    let (re, im) = a.to_f64();
                    (re * re + im * im).sqrt()
                })
                .fold(0.0f64, f64::max);
            Some((1.0 + (cmax + 1.0)).powi(4))
        }
        _ => None,
    }
}
