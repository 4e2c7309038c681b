//! Generating data for the two settings, admissibility, ping-pong
//! validation, word ↔ element conversion and norm-ball word enumeration.
//!
//! Continued-fractions specs carry a finite alphabet 𝒜 ⊂ ℕ+iℤ and a trim
//! parameter ε; the symbols are the #𝒜² two-digit blocks g_{a,a′} = g_a g_{a′}
//! and the shift is full. Schottky specs carry 2N₀ disks and N = N₀+N₁
//! integral SO_Q generators with the rule |i − j| ≠ N₀ forbidding immediate
//! backtracking.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::GaussInt;
use crate::error::{Error, Result};
use crate::groups::{so3_pqr_coordinates, BoundaryPoint, ExactPoint, GroupElement};

/// Admissible symbol sequence (0-based symbol indices).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Continued-fractions generating data.
#[derive(Clone, Debug)]
pub struct CfData {
    /// 𝒜 ⊂ ℕ + iℤ in document order.
    pub alphabet: Vec<GaussInt>,
    /// Trim parameter, exact (dyadic) rational in (0, 1).
    pub epsilon: BigRational,
    /// Whether 𝒜 ⊂ ℕ (then the setting is SL₂(ℝ), n = 2, 𝒪 = ℤ).
    pub real: bool,
    /// Symbol s ↦ (i, j) with g_s = g_{𝒜\[i\]} g_{𝒜\[j\]}.
    pub blocks: Vec<(usize, usize)>,
    /// Block generators, det 1.
    pub generators: Vec<GroupElement>,
}

/// Schottky generating data (boundary ℝ^{n−1}; exact rational disks).
#[derive(Clone, Debug)]
pub struct SchottkyData {
    pub n: usize,
    pub n0: usize,
    pub n1: usize,
    /// 2N₀ open balls: (center, radius), exact.
    pub disks: Vec<(Vec<BigRational>, BigRational)>,
    /// N = N₀ + N₁ generators; g_{N₀+j} = g_j⁻¹ for 1 ≤ j ≤ N₁.
    pub generators: Vec<GroupElement>,
}

#[derive(Clone, Debug)]
pub enum SemigroupSpec {
    Cf(CfData),
    Schottky(SchottkyData),
}

/// JSON document shape; field names are part of the external interface.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    setting: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<[i64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    disks: Option<Vec<DiskDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiskDoc {
    center: Vec<f64>,
    radius: f64,
}

fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::config(format!("non-finite number {x}")))
}

impl SemigroupSpec {
    /// Build a continued-fractions spec; when `epsilon` is None the largest
    /// admissible dyadic trim parameter is searched for.
    pub fn cf(alphabet: Vec<GaussInt>, epsilon: Option<BigRational>) -> Result<Self> {
        if alphabet.len() < 2 {
            return Err(Error::domain(
                "continued-fractions alphabet needs at least two letters (Zariski density)",
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &alphabet {
            if a.re < BigInt::one() {
                return Err(Error::domain(format!("letter {a} has Re < 1; 𝒜 ⊂ ℕ+iℤ required")));
            }
            if !seen.insert(a.clone()) {
                return Err(Error::domain(format!("duplicate letter {a}")));
            }
        }
        let real = alphabet.iter().all(|a| a.is_real());
        let epsilon = match epsilon {
            Some(e) => e,
            None => find_trim_epsilon(&alphabet)?,
        };
        if epsilon <= BigRational::zero() || epsilon >= BigRational::one() {
            return Err(Error::domain("trim parameter must lie in (0, 1)"));
        }
        let mut blocks = Vec::new();
        let mut generators = Vec::new();
        for i in 0..alphabet.len() {
            for j in 0..alphabet.len() {
                blocks.push((i, j));
                let gi = digit_matrix(&alphabet[i], real)?;
                let gj = digit_matrix(&alphabet[j], real)?;
                generators.push(gi.multiply(&gj)?);
            }
        }
        Ok(SemigroupSpec::Cf(CfData {
            alphabet,
            epsilon,
            real,
            blocks,
            generators,
        }))
    }

    pub fn schottky(
        n: usize,
        disks: Vec<(Vec<BigRational>, BigRational)>,
        generators: Vec<GroupElement>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("Schottky setting needs n ≥ 2"));
        }
        if disks.len() % 2 != 0 || disks.is_empty() {
            return Err(Error::domain("expected 2N₀ disks"));
        }
        let n0 = disks.len() / 2;
        if generators.len() < n0 {
            return Err(Error::domain("fewer generators than N₀"));
        }
        let n1 = generators.len() - n0;
        if n1 > n0 {
            return Err(Error::domain("N₁ ≤ N₀ violated"));
        }
        for (c, r) in &disks {
            if c.len() != n - 1 {
                return Err(Error::domain("disk center dimension ≠ n−1"));
            }
            if *r <= BigRational::zero() {
                return Err(Error::domain("disk radius must be positive"));
            }
        }
        for g in &generators {
            match g {
                GroupElement::So { n: gn, .. } if *gn == n => {}
                _ => return Err(Error::domain("Schottky generators must be SO_Q(ℤ) of matching n")),
            }
        }
        // inverse relations: g_{N₀+j} = g_j⁻¹
        for j in 0..n1 {
            if generators[n0 + j] != generators[j].inverse() {
                return Err(Error::domain(format!(
                    "generator {} is not the inverse of generator {}",
                    n0 + j + 1,
                    j + 1
                )));
            }
        }
        Ok(SemigroupSpec::Schottky(SchottkyData {
            n,
            n0,
            n1,
            disks,
            generators,
        }))
    }

    pub fn n_symbols(&self) -> usize {
        match self {
            SemigroupSpec::Cf(d) => d.generators.len(),
            SemigroupSpec::Schottky(d) => d.generators.len(),
        }
    }

    /// Hyperbolic-space dimension n of the setting.
    pub fn dim_n(&self) -> usize {
        match self {
            SemigroupSpec::Cf(d) => {
                if d.real {
                    2
                } else {
                    3
                }
            }
            SemigroupSpec::Schottky(d) => d.n,
        }
    }

    /// Whether the residue ring is ℤ\[i\] (true) or ℤ (false).
    pub fn gaussian_ring(&self) -> bool {
        matches!(self, SemigroupSpec::Cf(d) if !d.real)
    }

    pub fn generator(&self, j: usize) -> &GroupElement {
        match self {
            SemigroupSpec::Cf(d) => &d.generators[j],
            SemigroupSpec::Schottky(d) => &d.generators[j],
        }
    }

    pub fn generators(&self) -> &[GroupElement] {
        match self {
            SemigroupSpec::Cf(d) => &d.generators,
            SemigroupSpec::Schottky(d) => &d.generators,
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.generator(0).setting())
    }

    /// Transition rule between consecutive symbols (0-based).
    pub fn is_admissible_pair(&self, i: usize, j: usize) -> bool {
        match self {
            SemigroupSpec::Cf(_) => true,
            SemigroupSpec::Schottky(d) => {
                let diff = if i >= j { i - j } else { j - i };
                diff != d.n0
            }
        }
    }

    pub fn is_admissible(&self, w: &Word) -> Result<bool> {
        let n = self.n_symbols();
        for &s in &w.0 {
            if s >= n {
                return Err(Error::domain(format!("symbol {s} out of range (N = {n})")));
            }
        }
        Ok(w.0.windows(2).all(|p| self.is_admissible_pair(p[0], p[1])))
    }

    /// Whether the word is admissible read cyclically (last → first too).
    pub fn is_cyclically_admissible(&self, w: &Word) -> Result<bool> {
        if !self.is_admissible(w)? {
            return Ok(false);
        }
        if w.0.len() < 2 {
            return Ok(true);
        }
        Ok(self.is_admissible_pair(*w.0.last().unwrap(), w.0[0]))
    }

    /// Product g_{w₀} g_{w₁} ⋯ g_{w_{k−1}} (the order the cocycle product
    /// formula prescribes for the inverse-branch word read top-down).
    pub fn word_to_element(&self, w: &Word) -> Result<GroupElement> {
        if !self.is_admissible(w)? {
            return Err(Error::domain("inadmissible word"));
        }
        let mut acc = self.identity();
        for &s in &w.0 {
            acc = acc.multiply(self.generator(s))?;
        }
        Ok(acc)
    }

    /// 0/1 transition matrix of the subshift.
    pub fn transition_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n_symbols();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| u8::from(self.is_admissible_pair(i, j)))
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = match self {
            SemigroupSpec::Cf(d) => SpecDoc {
                setting: "cf".into(),
                n: Some(self.dim_n()),
                alphabet: Some(
                    d.alphabet
                        .iter()
                        .map(|a| {
                            [
                                a.re.to_i64().expect("alphabet letter fits i64"),
                                a.im.to_i64().expect("alphabet letter fits i64"),
                            ]
                        })
                        .collect(),
                ),
                generators: None,
                disks: None,
                epsilon: Some(crate::arith::ratio_to_f64(&d.epsilon)),
            },
            SemigroupSpec::Schottky(d) => SpecDoc {
                setting: "schottky".into(),
                n: Some(d.n),
                alphabet: None,
                generators: Some(
                    d.generators
                        .iter()
                        .map(|g| match g {
                            GroupElement::So { m, .. } => m
                                .iter()
                                .map(|e| e.to_i64().expect("generator entry fits i64"))
                                .collect(),
                            _ => unreachable!(),
                        })
                        .collect(),
                ),
                disks: Some(
                    d.disks
                        .iter()
                        .map(|(c, r)| DiskDoc {
                            center: c.iter().map(crate::arith::ratio_to_f64).collect(),
                            radius: crate::arith::ratio_to_f64(r),
                        })
                        .collect(),
                ),
                epsilon: None,
            },
        };
        serde_json::to_string_pretty(&doc).expect("spec serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SpecDoc =
            serde_json::from_str(s).map_err(|e| Error::config(format!("spec parse: {e}")))?;
        match doc.setting.as_str() {
            "cf" => {
                let alphabet = doc
                    .alphabet
                    .ok_or_else(|| Error::config("cf spec needs \"alphabet\""))?
                    .into_iter()
                    .map(|[re, im]| GaussInt::new(re, im))
                    .collect();
                let epsilon = doc.epsilon.map(rational_from_f64).transpose()?;
                SemigroupSpec::cf(alphabet, epsilon)
            }
            "schottky" => {
                let n = doc.n.ok_or_else(|| Error::config("schottky spec needs \"n\""))?;
                let disks = doc
                    .disks
                    .ok_or_else(|| Error::config("schottky spec needs \"disks\""))?
                    .into_iter()
                    .map(|d| {
                        let c = d
                            .center
                            .into_iter()
                            .map(rational_from_f64)
                            .collect::<Result<Vec<_>>>()?;
                        Ok((c, rational_from_f64(d.radius)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let generators = doc
                    .generators
                    .ok_or_else(|| Error::config("schottky spec needs \"generators\""))?
                    .into_iter()
                    .map(|row| {
                        GroupElement::so_q(n, row.into_iter().map(BigInt::from).collect())
                    })
                    .collect::<Result<Vec<_>>>()?;
                SemigroupSpec::schottky(n, disks, generators)
            }
            other => Err(Error::config(format!("unknown setting {other:?}"))),
        }
    }
}

/// Digit matrix g_a = (0 1; 1 a), determinant −1.
pub fn digit_matrix(a: &GaussInt, real: bool) -> Result<GroupElement> {
    GroupElement::sl2(
        [GaussInt::zero(), GaussInt::one(), GaussInt::one(), a.clone()],
        real,
    )
}

/// Largest dyadic ε (resolution 2⁻¹⁰) in (0, 1) for which the trimmed-disk
/// ping-pong validation passes.
pub fn find_trim_epsilon(alphabet: &[GaussInt]) -> Result<BigRational> {
    if alphabet.len() < 2 {
        return Err(Error::domain("alphabet needs at least two letters"));
    }
    // The binding containment g_a D⁰ ⊂ ē{Re ≥ ε} is exactly
    // ε ≤ Re(a)/(|a|² + Re(a)); start from the exact cap and walk the grid
    // down until the full validator agrees.
    let resolution = BigInt::from(1024);
    let mut cap = BigRational::one();
    for a in alphabet {
        let re = BigRational::from_integer(a.re.clone());
        let norm = BigRational::from_integer(a.norm());
        let bound = &re / (&norm + &re);
        if bound < cap {
            cap = bound;
        }
    }
    let mut k = (&cap * BigRational::from_integer(resolution.clone()))
        .floor()
        .to_integer();
    while k >= BigInt::one() {
        let eps = BigRational::new(k.clone(), resolution.clone());
        if eps < BigRational::one() {
            let spec = SemigroupSpec::cf(alphabet.to_vec(), Some(eps.clone()))?;
            if validate_ping_pong(&spec).ok {
                return Ok(eps);
            }
        }
        k -= 1;
    }
    Err(Error::construction(
        "no trim parameter on the dyadic grid validates",
    ))
}

/// Ping-pong validation report.
#[derive(Clone, Debug, Serialize)]
pub struct PingPongReport {
    pub ok: bool,
    pub checks: usize,
    pub violations: Vec<String>,
}

/// Verify the defining containments of the spec.
///
/// CF: the trimmed disks D_a^ε = g_a D^ε must be mutually disjoint and
/// contained in D^ε (exact rational inequalities via the inversion model,
/// plus sampled boundary images as a cross-check). Schottky: disks mutually
/// disjoint, generators hyperbolic, inverse relations exact, and
/// g_j(exterior(D_{j+N₀})) = D_j — endpoint-exact for n = 2, sampled
/// otherwise. Violations are reported, not thrown.
pub fn validate_ping_pong(spec: &SemigroupSpec) -> PingPongReport {
    let mut violations = Vec::new();
    let mut checks = 0usize;
    match spec {
        SemigroupSpec::Cf(d) => {
            let eps = &d.epsilon;
            let one = BigRational::one();
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            // u = 1/(2ε), the inverted trim half-plane radius.
            let u = (eps * BigRational::from_integer(BigInt::from(2))).recip();
            for a in &d.alphabet {
                checks += 1;
                let re = BigRational::from_integer(a.re.clone());
                let im = BigRational::from_integer(a.im.clone());
                // (Re a + 1/2 − u)² + (Im a)² ≤ (u − 1/2)²  ⟺  D⁰+a inside
                // the inverted half-plane disk, the binding trim constraint.
                let lhs = {
                    let t = &re + &half - &u;
                    &t * &t + &im * &im
                };
                let rhs = {
                    let t = &u - &half;
                    &t * &t
                };
                if lhs > rhs {
                    violations.push(format!(
                        "trim containment fails for letter {a}: D⁰+a ⊄ inverted half-plane"
                    ));
                }
                // Re(a) ≥ 1 and the Im-trim consistency (1 − ε/2)(1 + ε) ≥ 1.
                checks += 1;
                if re < one {
                    violations.push(format!("letter {a} has Re < 1"));
                }
            }
            checks += 1;
            let im_trim = (&one - eps / BigRational::from_integer(BigInt::from(2)))
                * (&one + eps);
            if im_trim < one {
                violations.push("imaginary trim inconsistency: (1−ε/2)(1+ε) < 1".into());
            }
            // Pairwise disjointness of translated boxes [ε,1]×[−1/2,1/2−ε/4].
            for i in 0..d.alphabet.len() {
                for j in (i + 1)..d.alphabet.len() {
                    checks += 1;
                    let v = d.alphabet[i].sub(&d.alphabet[j]);
                    let w = &one - eps; // box width
                    let h = &one - eps / BigRational::from_integer(BigInt::from(4)); // box height
                    let re_ok =
                        !v.re.is_zero() && BigRational::from_integer(v.re.abs()) > w;
                    let im_ok =
                        !v.im.is_zero() && BigRational::from_integer(v.im.abs()) > h;
                    if !(re_ok || im_ok) {
                        violations.push(format!(
                            "trimmed disks for letters {} and {} may overlap",
                            d.alphabet[i], d.alphabet[j]
                        ));
                    }
                }
            }
            // Sampled boundary cross-check: points of ∂D^ε map into D^ε.
            let region = CfRegion::new(eps.clone());
            for (ai, a) in d.alphabet.iter().enumerate() {
                let g = match digit_matrix(a, d.real) {
                    Ok(g) => g,
                    Err(e) => {
                        violations.push(format!("digit matrix for {a}: {e}"));
                        continue;
                    }
                };
                for t in 0..64 {
                    checks += 1;
                    let ang = std::f64::consts::TAU * (t as f64) / 64.0;
                    let (re0, im0) = (0.5 + 0.5 * ang.cos(), 0.5 * ang.sin());
                    if !region.contains_float(re0, im0, 0.0) {
                        continue; // trimmed away
                    }
                    let img = g.mobius_apply(&BoundaryPoint::Finite(vec![re0, im0]));
                    match img {
                        BoundaryPoint::Finite(v) => {
                            if !region.contains_float(v[0], v[1], 1e-9) {
                                violations.push(format!(
                                    "sampled image of ∂D^ε under g_{} leaves D^ε",
                                    ai + 1
                                ));
                                break;
                            }
                        }
                        BoundaryPoint::Infinity => {
                            violations.push(format!("g_{} sends a sample to ∞", ai + 1));
                            break;
                        }
                    }
                }
            }
        }
        SemigroupSpec::Schottky(d) => {
            // Disk disjointness (open balls; tangency allowed).
            for i in 0..d.disks.len() {
                for j in (i + 1)..d.disks.len() {
                    checks += 1;
                    let (ci, ri) = &d.disks[i];
                    let (cj, rj) = &d.disks[j];
                    let dist_sq: BigRational = ci
                        .iter()
                        .zip(cj)
                        .map(|(x, y)| {
                            let t = x - y;
                            &t * &t
                        })
                        .sum();
                    let rsum = ri + rj;
                    if dist_sq < &rsum * &rsum {
                        violations.push(format!("disks {} and {} overlap", i + 1, j + 1));
                    }
                }
            }
            for (j, g) in d.generators.iter().enumerate() {
                checks += 1;
                if !g.is_hyperbolic() {
                    violations.push(format!("generator {} is not hyperbolic", j + 1));
                }
            }
            // Pairing g_j(exterior(D_{j+N₀})) = D_j for 1 ≤ j ≤ N₀.
            for j in 0..d.n0 {
                let g = &d.generators[j];
                let (src_c, src_r) = &d.disks[j + d.n0];
                let (dst_c, dst_r) = &d.disks[j];
                if d.n == 2 {
                    checks += 1;
                    // Exact endpoint check on ℝ.
                    let l = ExactPoint::Finite(vec![&src_c[0] - src_r]);
                    let r = ExactPoint::Finite(vec![&src_c[0] + src_r]);
                    let gl = g.mobius_apply_exact(&l);
                    let gr = g.mobius_apply_exact(&r);
                    let ginf = g.mobius_apply_exact(&ExactPoint::Infinity);
                    let dst_l = dst_c[0].clone() - dst_r;
                    let dst_r_pt = dst_c[0].clone() + dst_r;
                    let endpoints_match = match (&gl, &gr) {
                        (ExactPoint::Finite(a), ExactPoint::Finite(b)) => {
                            (a[0] == dst_l && b[0] == dst_r_pt)
                                || (a[0] == dst_r_pt && b[0] == dst_l)
                        }
                        _ => false,
                    };
                    let inf_inside = match &ginf {
                        ExactPoint::Finite(v) => v[0] > dst_l && v[0] < dst_r_pt,
                        ExactPoint::Infinity => false,
                    };
                    if !endpoints_match || !inf_inside {
                        violations.push(format!(
                            "generator {} does not map exterior(D_{}) onto D_{}",
                            j + 1,
                            j + d.n0 + 1,
                            j + 1
                        ));
                    }
                } else {
                    // Sampled boundary and exterior checks.
                    let dim = d.n - 1;
                    for t in 0..32 {
                        checks += 1;
                        let mut x: Vec<f64> = src_c
                            .iter()
                            .map(crate::arith::ratio_to_f64)
                            .collect();
                        let rad = crate::arith::ratio_to_f64(src_r);
                        let ang = std::f64::consts::TAU * (t as f64) / 32.0;
                        x[0] += rad * ang.cos();
                        if dim > 1 {
                            x[1] += rad * ang.sin();
                        }
                        let img = g.mobius_apply(&BoundaryPoint::Finite(x));
                        if let BoundaryPoint::Finite(v) = img {
                            let dc: f64 = v
                                .iter()
                                .zip(dst_c.iter().map(crate::arith::ratio_to_f64))
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum::<f64>()
                                .sqrt();
                            let rr = crate::arith::ratio_to_f64(dst_r);
                            if (dc - rr).abs() > 1e-9 * rr.max(1.0) {
                                violations.push(format!(
                                    "sampled boundary of D_{} misses ∂D_{} under generator {}",
                                    j + d.n0 + 1,
                                    j + 1,
                                    j + 1
                                ));
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    PingPongReport {
        ok: violations.is_empty(),
        checks,
        violations,
    }
}

/// The base region D^ε = {|ξ−1/2| ≤ 1/2, Re ξ ≥ ε, Im ξ ≤ 1/2 − ε/4}.
#[derive(Clone, Debug)]
pub struct CfRegion {
    pub epsilon: BigRational,
}

impl CfRegion {
    pub fn new(epsilon: BigRational) -> Self {
        CfRegion { epsilon }
    }

    pub fn contains_exact(&self, re: &BigRational, im: &BigRational) -> bool {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
        let t = re - &half;
        let disk = &t * &t + im * im <= quarter;
        let re_ok = re >= &self.epsilon;
        let im_ok = im <= &(&half - &self.epsilon * &quarter);
        disk && re_ok && im_ok
    }

    /// Membership with a guard band: values within `guard` of a constraint
    /// boundary still count as inside (used for float cross-checks).
    pub fn contains_float(&self, re: f64, im: f64, guard: f64) -> bool {
        let eps = crate::arith::ratio_to_f64(&self.epsilon);
        let disk = 0.25 - ((re - 0.5) * (re - 0.5) + im * im);
        disk >= -guard && re - eps >= -guard && (0.5 - eps / 4.0) - im >= -guard
    }
}

/// Norm bound for word enumeration.
#[derive(Clone, Debug)]
pub enum EnumBound {
    /// All admissible words of length ≤ this.
    MaxLen(usize),
    /// Words whose element satisfies ‖γ·γ₀‖² ≤ rsq·‖γ₀‖² exactly.
    NormSqRatio {
        rsq: BigRational,
        gamma0: GroupElement,
    },
}

/// Enumeration outcome; `complete` is false when the budget was exhausted.
#[derive(Clone, Debug, Serialize)]
pub struct EnumStats {
    pub visited: u64,
    pub emitted: u64,
    pub complete: bool,
}

struct NormBoundCtx {
    /// R²·‖γ₀‖² as an exact rational.
    limit: BigRational,
    gamma0: GroupElement,
    /// Schottky prune works in pqr coordinates when certified.
    pqr_gens: Option<Vec<Vec<BigInt>>>,
    cf: bool,
}

/// Visit every admissible word (including the empty word) whose element
/// meets the bound, exactly once, in lexicographic prefix order.
///
/// Pruning is exact: continued-fractions products have Frobenius norm
/// non-decreasing per appended digit (Re(a) ≥ 1 continuant ratios), and
/// n = 2 Schottky products are entrywise monotone ≥ I in the pqr basis
/// when the certificate holds. Specs without a certificate must use
/// `EnumBound::MaxLen`.
pub fn enumerate_words<F>(
    spec: &SemigroupSpec,
    bound: &EnumBound,
    budget: Option<u64>,
    visitor: &mut F,
) -> Result<EnumStats>
where
    F: FnMut(&Word, &GroupElement) -> Result<()>,
{
    let ctx = match bound {
        EnumBound::MaxLen(_) => None,
        EnumBound::NormSqRatio { rsq, gamma0 } => {
            if rsq < &BigRational::zero() {
                return Err(Error::domain("negative squared radius"));
            }
            let g0_norm = BigRational::from_integer(gamma0.frobenius_norm_sq());
            let cf = matches!(spec, SemigroupSpec::Cf(_));
            let pqr_gens = if cf {
                None
            } else {
                let gens: Option<Vec<Vec<BigInt>>> = spec
                    .generators()
                    .iter()
                    .map(so3_pqr_coordinates)
                    .collect();
                match gens {
                    Some(g) => Some(g),
                    None => {
                        return Err(Error::domain(
                            "no monotone certificate for this Schottky spec; \
                             norm-bounded enumeration needs EnumBound::MaxLen",
                        ))
                    }
                }
            };
            Some(NormBoundCtx {
                limit: rsq * g0_norm,
                gamma0: gamma0.clone(),
                pqr_gens,
                cf,
            })
        }
    };

    let mut stats = EnumStats {
        visited: 0,
        emitted: 0,
        complete: true,
    };
    let max_len = match bound {
        EnumBound::MaxLen(l) => Some(*l),
        _ => None,
    };
    let mut word = Word::empty();
    let identity = spec.identity();
    let pqr_identity = ctx
        .as_ref()
        .and_then(|c| c.pqr_gens.as_ref())
        .map(|_| identity_pqr());
    dfs(
        spec,
        &ctx,
        max_len,
        budget,
        &mut word,
        &identity,
        pqr_identity.as_deref(),
        visitor,
        &mut stats,
    )?;
    Ok(stats)
}

fn identity_pqr() -> Vec<BigInt> {
    let mut m = vec![BigInt::zero(); 9];
    for i in 0..3 {
        m[i * 3 + i] = BigInt::one();
    }
    m
}

fn pqr_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); 9];
    for i in 0..3 {
        for k in 0..3 {
            if a[i * 3 + k].is_zero() {
                continue;
            }
            for j in 0..3 {
                let p = &a[i * 3 + k] * &b[k * 3 + j];
                out[i * 3 + j] += p;
            }
        }
    }
    out
}

fn frob_sq_pqr(m: &[BigInt]) -> BigInt {
    m.iter().map(|e| e * e).sum()
}

#[allow(clippy::too_many_arguments)]
fn dfs<F>(
    spec: &SemigroupSpec,
    ctx: &Option<NormBoundCtx>,
    max_len: Option<usize>,
    budget: Option<u64>,
    word: &mut Word,
    element: &GroupElement,
    pqr: Option<&[BigInt]>,
    visitor: &mut F,
    stats: &mut EnumStats,
) -> Result<bool>
where
    F: FnMut(&Word, &GroupElement) -> Result<()>,
{
    stats.visited += 1;
    if let Some(b) = budget {
        if stats.visited > b {
            stats.complete = false;
            return Ok(false);
        }
    }

    // Emission test (exact when norm-bounded).
    let emit = match ctx {
        None => true,
        Some(c) => {
            let ng = element.multiply(&c.gamma0)?.frobenius_norm_sq();
            BigRational::from_integer(ng) <= c.limit
        }
    };
    if emit {
        stats.emitted += 1;
        visitor(word, element)?;
    }

    // Descend unless pruned.
    if let Some(l) = max_len {
        if word.len() >= l {
            return Ok(true);
        }
    }
    if let Some(c) = ctx {
        let prefix_bound = if c.cf {
            // ‖γ·γ₀‖ ≥ ‖M(w)‖ for any completion: prune on ‖M(w)‖² > limit.
            BigRational::from_integer(element.frobenius_norm_sq())
        } else {
            // ‖A_Q‖ ≥ ‖A_pqr‖/√2 and pqr-prefix monotonicity.
            let p = pqr.expect("pqr state present when certified");
            BigRational::from_integer(frob_sq_pqr(p))
                / BigRational::from_integer(BigInt::from(2))
        };
        if prefix_bound > c.limit {
            return Ok(true);
        }
    }

    let n = spec.n_symbols();
    for s in 0..n {
        if let Some(&last) = word.0.last() {
            if !spec.is_admissible_pair(last, s) {
                continue;
            }
        }
        let next = element.multiply(spec.generator(s))?;
        let next_pqr = pqr.map(|p| {
            let gens = ctx
                .as_ref()
                .and_then(|c| c.pqr_gens.as_ref())
                .expect("certified generators");
            pqr_mul(p, &gens[s])
        });
        word.0.push(s);
        let keep_going = dfs(
            spec,
            ctx,
            max_len,
            budget,
            word,
            &next,
            next_pqr.as_deref(),
            visitor,
            stats,
        )?;
        word.0.pop();
        if !keep_going {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The shipped n = 2 Schottky example: symmetric squares of the theta-parity
/// hyperbolic pair (1 2; 2 5) and (11 4; 8 3) with their exact isometric
/// disks on ℝ.
pub fn example_schottky_spec() -> Result<SemigroupSpec> {
    let g1 = GroupElement::sl2_i64(1, 2, 2, 5)?;
    let g2 = GroupElement::sl2_i64(11, 4, 8, 3)?;
    let s1 = crate::groups::sym_square_embed(&g1)?;
    let s2 = crate::groups::sym_square_embed(&g2)?;
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    // D₁, D₂ are the target disks (isometric disks of g_j⁻¹); D₃, D₄ the
    // source disks (isometric disks of g_j).
    let disks = vec![
        (vec![r(1, 2)], r(1, 2)),    // D₁: g₁ target (0, 1)
        (vec![r(11, 8)], r(1, 8)),   // D₂: g₂ target (5/4, 3/2)
        (vec![r(-5, 2)], r(1, 2)),   // D₃: g₁ source (−3, −2)
        (vec![r(-3, 8)], r(1, 8)),   // D₄: g₂ source (−1/2, −1/4)
    ];
    SemigroupSpec::schottky(2, disks, vec![s1, s2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf12() -> SemigroupSpec {
        SemigroupSpec::cf(vec![GaussInt::from(1), GaussInt::from(2)], None).unwrap()
    }

    #[test]
    fn trim_epsilon_for_two_letter_alphabet() {
        let eps = find_trim_epsilon(&[GaussInt::from(1), GaussInt::from(2)]).unwrap();
        // exact cap is 1/3 (letter 2); the grid floor is 341/1024.
        assert_eq!(eps, BigRational::new(BigInt::from(341), BigInt::from(1024)));
    }

    #[test]
    fn trim_epsilon_rejects_singleton() {
        assert!(find_trim_epsilon(&[GaussInt::from(1)]).is_err());
    }

    #[test]
    fn trim_epsilon_grid_exhaustion_is_construction_error() {
        // Re(a)/(|a|²+Re(a)) < 2⁻¹⁰ for a = 1+32i, so no grid value works.
        let err = find_trim_epsilon(&[GaussInt::new(1, 32), GaussInt::from(1)]).unwrap_err();
        assert!(matches!(err, crate::error::Error::Construction(_)));
    }

    #[test]
    fn ping_pong_passes_for_cf12_and_gaussian_alphabet() {
        assert!(validate_ping_pong(&cf12()).ok);
        let spec = SemigroupSpec::cf(
            vec![GaussInt::from(1), GaussInt::from(2), GaussInt::new(1, 1)],
            None,
        )
        .unwrap();
        let rep = validate_ping_pong(&spec);
        assert!(rep.ok, "{:?}", rep.violations);
    }

    #[test]
    fn ping_pong_flags_bad_epsilon() {
        // ε far above the exact cap 1/3 must fail the trim containment.
        let spec = SemigroupSpec::cf(
            vec![GaussInt::from(1), GaussInt::from(2)],
            Some(BigRational::new(BigInt::from(3), BigInt::from(4))),
        )
        .unwrap();
        let rep = validate_ping_pong(&spec);
        assert!(!rep.ok);
        assert!(!rep.violations.is_empty());
    }

    #[test]
    fn admissibility_rules() {
        let spec = cf12();
        assert!(spec.is_admissible(&Word(vec![0, 1, 2, 3, 0])).unwrap());
        assert!(spec.is_admissible(&Word::empty()).unwrap());
        assert!(spec.is_admissible(&Word(vec![4])).is_err());

        let schottky = example_schottky_spec().unwrap();
        // N₀ = 2, N₁ = 0, symbols {0, 1}: |i − j| = 2 never occurs.
        assert!(schottky.is_admissible(&Word(vec![0, 1, 0, 0])).unwrap());
    }

    #[test]
    fn schottky_inadmissible_pair_with_inverses() {
        // Build a Schottky *group* spec (N₁ = N₀) from the example data to
        // exercise the |i−j| = N₀ rule: symbols 0 and 2 are inverse pairs.
        let base = match example_schottky_spec().unwrap() {
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
        assert!(!spec.is_admissible(&Word(vec![0, 2])).unwrap());
        assert!(!spec.is_admissible(&Word(vec![3, 1])).unwrap());
        assert!(spec.is_admissible(&Word(vec![0, 1])).unwrap());
    }

    #[test]
    fn word_to_element_block_convention() {
        let spec = cf12();
        // block (1,2) is symbol 1 (0-based): g₁g₂ = (1 2; 1 3), second
        // column (2, 3) encodes 2/3 = [1, 2].
        let g = spec.word_to_element(&Word(vec![1])).unwrap();
        assert_eq!(g, GroupElement::sl2_i64(1, 2, 1, 3).unwrap());
        // associativity of the convention
        let w = Word(vec![1, 2, 0, 3]);
        let full = spec.word_to_element(&w).unwrap();
        let left = spec.word_to_element(&Word(vec![1, 2])).unwrap();
        let right = spec.word_to_element(&Word(vec![0, 3])).unwrap();
        assert_eq!(full, left.multiply(&right).unwrap());
    }

    #[test]
    fn validate_schottky_example() {
        let spec = example_schottky_spec().unwrap();
        let rep = validate_ping_pong(&spec);
        assert!(rep.ok, "{:?}", rep.violations);
    }

    #[test]
    fn validate_schottky_overlap_reported() {
        let base = match example_schottky_spec().unwrap() {
            SemigroupSpec::Schottky(d) => d,
            _ => unreachable!(),
        };
        let mut disks = base.disks.clone();
        disks[1].1 = BigRational::new(BigInt::from(3), BigInt::from(1)); // blow up D₂
        let spec = SemigroupSpec::schottky(2, disks, base.generators.clone()).unwrap();
        let rep = validate_ping_pong(&spec);
        assert!(!rep.ok);
        assert!(rep.violations.iter().any(|v| v.contains("overlap")));
    }

    #[test]
    fn enumerate_by_length_counts_full_shift() {
        let spec = cf12();
        let mut count = 0u64;
        enumerate_words(&spec, &EnumBound::MaxLen(2), None, &mut |w, _| {
            if w.len() == 2 {
                count += 1;
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 16); // 4 block symbols, free shift
    }

    #[test]
    fn length_counts_match_transition_matrix_powers() {
        // Schottky group variant: 4 symbols with backtracking forbidden.
        let base = match example_schottky_spec().unwrap() {
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
        let a = spec.transition_matrix();
        let n = a.len();
        // ⟨1, A^{k−1} 1⟩ counts length-k admissible words.
        for k in 1..=8usize {
            let mut v = vec![1u64; n];
            for _ in 1..k {
                let mut nv = vec![0u64; n];
                for i in 0..n {
                    for j in 0..n {
                        if a[i][j] == 1 {
                            nv[i] += v[j];
                        }
                    }
                }
                v = nv;
            }
            let expected: u64 = v.iter().sum();
            let mut count = 0u64;
            enumerate_words(&spec, &EnumBound::MaxLen(k), None, &mut |w, _| {
                if w.len() == k {
                    count += 1;
                }
                Ok(())
            })
            .unwrap();
            assert_eq!(count, expected, "length {k}");
        }
    }

    #[test]
    fn norm_bounded_enumeration_matches_brute_force() {
        let spec = cf12();
        let rsq = BigRational::from_integer(BigInt::from(900));
        let gamma0 = spec.identity();
        let mut by_norm = Vec::new();
        enumerate_words(
            &spec,
            &EnumBound::NormSqRatio {
                rsq: rsq.clone(),
                gamma0: gamma0.clone(),
            },
            None,
            &mut |w, _| {
                by_norm.push(w.clone());
                Ok(())
            },
        )
        .unwrap();
        // Brute force with a dominating length cap (the slowest-growing
        // block word has ‖g_{1,1}^k‖ ≈ φ^{4k}, far above √(2·900) at k = 8)
        // and explicit filter.
        let limit = &rsq * BigRational::from_integer(gamma0.frobenius_norm_sq());
        let mut by_filter = Vec::new();
        enumerate_words(&spec, &EnumBound::MaxLen(8), None, &mut |w, g| {
            let ng = g.multiply(&gamma0).unwrap().frobenius_norm_sq();
            if BigRational::from_integer(ng) <= limit {
                by_filter.push(w.clone());
            }
            Ok(())
        })
        .unwrap();
        by_norm.sort_by_key(|w| w.0.clone());
        by_filter.sort_by_key(|w| w.0.clone());
        assert_eq!(by_norm, by_filter);
        assert!(by_norm.len() > 10);
    }

    #[test]
    fn norm_bounded_enumeration_schottky_matches_brute_force() {
        let spec = example_schottky_spec().unwrap();
        let rsq = BigRational::from_integer(BigInt::from(4_000_000));
        let gamma0 = spec.identity();
        let mut by_norm = Vec::new();
        enumerate_words(
            &spec,
            &EnumBound::NormSqRatio {
                rsq: rsq.clone(),
                gamma0: gamma0.clone(),
            },
            None,
            &mut |w, _| {
                by_norm.push(w.clone());
                Ok(())
            },
        )
        .unwrap();
        let limit = &rsq * BigRational::from_integer(gamma0.frobenius_norm_sq());
        let mut by_filter = Vec::new();
        enumerate_words(&spec, &EnumBound::MaxLen(8), None, &mut |w, g| {
            let ng = g.multiply(&gamma0).unwrap().frobenius_norm_sq();
            if BigRational::from_integer(ng) <= limit {
                by_filter.push(w.clone());
            }
            Ok(())
        })
        .unwrap();
        by_norm.sort_by_key(|w| w.0.clone());
        by_filter.sort_by_key(|w| w.0.clone());
        assert_eq!(by_norm, by_filter);
        assert!(by_norm.len() > 3);
    }

    #[test]
    fn cf_frobenius_monotone_per_digit_exhaustive() {
        // The exact prune's certificate, checked exhaustively at block
        // length ≤ 4 (digit length 8) for 𝒜 = {1, 2}.
        let spec = cf12();
        enumerate_words(&spec, &EnumBound::MaxLen(4), None, &mut |w, g| {
            if let Some((&last, prefix)) = w.0.split_last() {
                let pg = spec.word_to_element(&Word(prefix.to_vec())).unwrap();
                assert!(pg.frobenius_norm_sq() <= g.frobenius_norm_sq());
                let _ = last;
            }
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn budget_flags_partial_enumeration() {
        let spec = cf12();
        let stats = enumerate_words(&spec, &EnumBound::MaxLen(6), Some(10), &mut |_, _| Ok(()))
            .unwrap();
        assert!(!stats.complete);
        assert!(stats.visited <= 11);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = cf12();
        let json = spec.to_json();
        let back = SemigroupSpec::from_json(&json).unwrap();
        match back {
            SemigroupSpec::Cf(d) => {
                assert_eq!(d.alphabet.len(), 2);
                assert_eq!(d.epsilon, BigRational::new(BigInt::from(341), BigInt::from(1024)));
            }
            _ => panic!("wrong setting"),
        }
        let schottky = example_schottky_spec().unwrap();
        let json2 = schottky.to_json();
        let back2 = SemigroupSpec::from_json(&json2).unwrap();
        assert!(validate_ping_pong(&back2).ok);
    }
}
