//! Exact matrix group elements for the two settings — SL₂ over ℤ or ℤ\[i\]
//! and SO_Q(ℤ) for Q = x₁² + ... + x_n² − x_{n+1}² — together with their
//! boundary Möbius actions, conformal derivatives, traces, fixed points and
//! translation lengths.
//!
//! SL₂ acts on Ĉ by fractional-linear maps. SO_Q acts on ℝ^{n−1} ∪ {∞} via
//! the null-cone lift x ↦ (2x, |x|²−1, |x|²+1): the image vector w = M·v
//! projects back through x′ = w_{1..n−1}/(w_{n+1} − w_n), with ∞ handled
//! symbolically, and the conformal stretch factor is 2/(w_{n+1} − w_n).
//! Both actions are exact over the rationals when the input point is.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{big_to_f64, ratio_to_f64, GaussInt};
use crate::error::{Error, Result};

/// Which group a matrix lives in.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Setting {
    Sl2R,
    Sl2C,
    /// SO_Q(ℝ)° for the form of signature (n, 1); matrices are (n+1)×(n+1).
    SoQ {
        n: usize,
    },
}

/// Exact group element. Invariants (unit determinant, form preservation,
/// forward time orientation) are checked on construction.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum GroupElement {
    Sl2 {
        real: bool,
        /// Row-major [a, b, c, d].
        m: Box<[GaussInt; 4]>,
    },
    So {
        n: usize,
        /// Row-major (n+1)² integer entries.
        m: Vec<BigInt>,
    },
}

/// Point of ∂ℍⁿ ≅ ℝ^{n−1} ∪ {∞}. For the SL₂ settings the coordinates are
/// [Re ξ, Im ξ] of a point of Ĉ.
#[derive(Clone, PartialEq, Debug)]
pub enum BoundaryPoint {
    Finite(Vec<f64>),
    Infinity,
}

/// Exact rational boundary point, used by validators.
#[derive(Clone, PartialEq, Debug)]
pub enum ExactPoint {
    Finite(Vec<BigRational>),
    Infinity,
}

impl BoundaryPoint {
    pub fn complex(z: Complex64) -> Self {
        BoundaryPoint::Finite(vec![z.re, z.im])
    }

    pub fn as_complex(&self) -> Option<Complex64> {
        match self {
            BoundaryPoint::Finite(v) => Some(Complex64::new(v[0], *v.get(1).unwrap_or(&0.0))),
            BoundaryPoint::Infinity => None,
        }
    }

    pub fn dist(&self, other: &BoundaryPoint) -> f64 {
        match (self, other) {
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

impl ExactPoint {
    pub fn to_float(&self) -> BoundaryPoint {
        match self {
            ExactPoint::Finite(v) => BoundaryPoint::Finite(v.iter().map(ratio_to_f64).collect()),
            ExactPoint::Infinity => BoundaryPoint::Infinity,
        }
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl GroupElement {
    pub fn setting(&self) -> Setting {
        match self {
            GroupElement::Sl2 { real: true, .. } => Setting::Sl2R,
            GroupElement::Sl2 { real: false, .. } => Setting::Sl2C,
            GroupElement::So { n, .. } => Setting::SoQ { n: *n },
        }
    }

    /// Boundary dimension n − 1 of the setting.
    pub fn boundary_dim(&self) -> usize {
        match self {
            GroupElement::Sl2 { .. } => 2,
            GroupElement::So { n, .. } => *n - 1,
        }
    }

    /// 2×2 unimodular element. Determinant ±1 is accepted so that the
    /// digit matrices g_a = (0 1; 1 a) are representable; the semigroup
    /// generators proper (two-digit blocks) always have determinant 1,
    /// which the spec constructors enforce separately.
    pub fn sl2(entries: [GaussInt; 4], real: bool) -> Result<Self> {
        let det = entries[0]
            .mul(&entries[3])
            .sub(&entries[1].mul(&entries[2]));
        if det != GaussInt::one() && det != GaussInt::one().neg() {
            return Err(Error::domain(format!("determinant {det} ∉ {{±1}}")));
        }
        if real && entries.iter().any(|e| !e.is_real()) {
            return Err(Error::domain("complex entry in SL₂(ℝ) setting"));
        }
        Ok(GroupElement::Sl2 {
            real,
            m: Box::new(entries),
        })
    }

    /// Determinant as a Gaussian integer (±1 for SL₂ variants, 1 for SO_Q).
    pub fn det(&self) -> GaussInt {
        match self {
            GroupElement::Sl2 { m, .. } => m[0].mul(&m[3]).sub(&m[1].mul(&m[2])),
            GroupElement::So { .. } => GaussInt::one(),
        }
    }

    pub fn sl2_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::sl2(
            [
                GaussInt::from(a),
                GaussInt::from(b),
                GaussInt::from(c),
                GaussInt::from(d),
            ],
            true,
        )
    }

    /// SO_Q element from row-major entries; verifies MᵀQM = Q exactly,
    /// det M = 1 and M_{n+1,n+1} ≥ 1 (forward light cone).
    pub fn so_q(n: usize, m: Vec<BigInt>) -> Result<Self> {
        let d = n + 1;
        if m.len() != d * d {
            return Err(Error::domain("wrong entry count for SO_Q matrix"));
        }
        // MᵀQM = Q with Q = diag(1, ..., 1, −1).
        for i in 0..d {
            for j in i..d {
                let mut s = BigInt::zero();
                for k in 0..d {
                    let sign = if k == d - 1 { -1 } else { 1 };
                    s += sign * &m[k * d + i] * &m[k * d + j];
                }
                let expected = if i != j {
                    BigInt::zero()
                } else if i == d - 1 {
                    -BigInt::one()
                } else {
                    BigInt::one()
                };
                if s != expected {
                    return Err(Error::domain("matrix does not preserve the form Q"));
                }
            }
        }
        if det_bigint(&m, d) != BigInt::one() {
            return Err(Error::domain("SO_Q determinant ≠ 1"));
        }
        if m[d * d - 1] < BigInt::one() {
            return Err(Error::domain("matrix reverses the forward light cone"));
        }
        Ok(GroupElement::So { n, m })
    }

    pub fn identity(setting: Setting) -> Self {
        match setting {
            Setting::Sl2R | Setting::Sl2C => GroupElement::Sl2 {
                real: matches!(setting, Setting::Sl2R),
                m: Box::new([
                    GaussInt::one(),
                    GaussInt::zero(),
                    GaussInt::zero(),
                    GaussInt::one(),
                ]),
            },
            Setting::SoQ { n } => {
                let d = n + 1;
                let mut m = vec![BigInt::zero(); d * d];
                for i in 0..d {
                    m[i * d + i] = BigInt::one();
                }
                GroupElement::So { n, m }
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        self == &GroupElement::identity(self.setting())
    }

    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::Sl2 { real: r1, m: a }, GroupElement::Sl2 { real: r2, m: b }) => {
                if r1 != r2 {
                    return Err(Error::domain("mixed SL₂ settings"));
                }
                Ok(GroupElement::Sl2 {
                    real: *r1,
                    m: Box::new([
                        a[0].mul(&b[0]).add(&a[1].mul(&b[2])),
                        a[0].mul(&b[1]).add(&a[1].mul(&b[3])),
                        a[2].mul(&b[0]).add(&a[3].mul(&b[2])),
                        a[2].mul(&b[1]).add(&a[3].mul(&b[3])),
                    ]),
                })
            }
            (GroupElement::So { n: n1, m: a }, GroupElement::So { n: n2, m: b }) => {
                if n1 != n2 {
                    return Err(Error::domain("mixed SO_Q dimensions"));
                }
                let d = n1 + 1;
                let mut m = vec![BigInt::zero(); d * d];
                for i in 0..d {
                    for k in 0..d {
                        if a[i * d + k].is_zero() {
                            continue;
                        }
                        for j in 0..d {
                            let prod = &a[i * d + k] * &b[k * d + j];
                            m[i * d + j] += prod;
                        }
                    }
                }
                Ok(GroupElement::So { n: *n1, m })
            }
            _ => Err(Error::domain("mixed settings in multiply")),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Sl2 { real, m } => {
                // adj / det with det = ±1.
                let adj = [m[3].clone(), m[1].neg(), m[2].neg(), m[0].clone()];
                let m = if self.det() == GaussInt::one() {
                    adj
                } else {
                    [adj[0].neg(), adj[1].neg(), adj[2].neg(), adj[3].neg()]
                };
                GroupElement::Sl2 {
                    real: *real,
                    m: Box::new(m),
                }
            }
            GroupElement::So { n, m } => {
                // M⁻¹ = Q Mᵀ Q for M ∈ O(Q).
                let d = n + 1;
                let mut inv = vec![BigInt::zero(); d * d];
                for i in 0..d {
                    for j in 0..d {
                        let sign =
                            if (i == d - 1) ^ (j == d - 1) { -1 } else { 1 };
                        inv[i * d + j] = sign * &m[j * d + i];
                    }
                }
                GroupElement::So { n: *n, m: inv }
            }
        }
    }

    /// Exact squared Frobenius norm: Σ |entry|².
    pub fn frobenius_norm_sq(&self) -> BigInt {
        match self {
            GroupElement::Sl2 { m, .. } => m.iter().map(|e| e.norm()).sum(),
            GroupElement::So { m, .. } => m.iter().map(|e| e * e).sum(),
        }
    }

    /// Trace; only meaningful entry-wise for SL₂ (Gaussian integer).
    pub fn trace(&self) -> GaussInt {
        match self {
            GroupElement::Sl2 { m, .. } => m[0].add(&m[3]),
            GroupElement::So { n, m } => {
                let d = n + 1;
                let t: BigInt = (0..d).map(|i| m[i * d + i].clone()).sum();
                GaussInt { re: t, im: BigInt::zero() }
            }
        }
    }

    fn sl2_entries_f64(&self) -> [Complex64; 4] {
        match self {
            GroupElement::Sl2 { m, .. } => {
                let c = |g: &GaussInt| {
                    let (re, im) = g.to_f64();
                    Complex64::new(re, im)
                };
                [c(&m[0]), c(&m[1]), c(&m[2]), c(&m[3])]
            }
            _ => unreachable!("sl2_entries_f64 on SO element"),
        }
    }

    /// Boundary Möbius action in floating point.
    pub fn mobius_apply(&self, x: &BoundaryPoint) -> BoundaryPoint {
        match self {
            GroupElement::Sl2 { .. } => {
                let [a, b, c, d] = self.sl2_entries_f64();
                match x.as_complex() {
                    None => {
                        if c.norm_sqr() == 0.0 {
                            BoundaryPoint::Infinity
                        } else {
                            BoundaryPoint::complex(a / c)
                        }
                    }
                    Some(z) => {
                        let den = c * z + d;
                        if den.norm_sqr() == 0.0 {
                            BoundaryPoint::Infinity
                        } else {
                            BoundaryPoint::complex((a * z + b) / den)
                        }
                    }
                }
            }
            GroupElement::So { n, m } => {
                let d = n + 1;
                let mf: Vec<f64> = m.iter().map(big_to_f64).collect();
                let v = match x {
                    BoundaryPoint::Finite(p) => null_lift_f64(p, *n),
                    BoundaryPoint::Infinity => {
                        let mut v = vec![0.0; d];
                        v[d - 2] = 1.0;
                        v[d - 1] = 1.0;
                        v
                    }
                };
                let w = mat_vec_f64(&mf, &v, d);
                let den = w[d - 1] - w[d - 2];
                if den == 0.0 {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(w[..d - 2].iter().map(|t| t / den).collect())
                }
            }
        }
    }

    /// Boundary action in exact rational arithmetic.
    pub fn mobius_apply_exact(&self, x: &ExactPoint) -> ExactPoint {
        match self {
            GroupElement::Sl2 { m, .. } => {
                let conv = |g: &GaussInt| {
                    (
                        BigRational::from_integer(g.re.clone()),
                        BigRational::from_integer(g.im.clone()),
                    )
                };
                let (ar, ai) = conv(&m[0]);
                let (br, bi) = conv(&m[1]);
                let (cr, ci) = conv(&m[2]);
                let (dr, di) = conv(&m[3]);
                let (zr, zi) = match x {
                    ExactPoint::Infinity => {
                        // g(∞) = a/c.
                        if cr.is_zero() && ci.is_zero() {
                            return ExactPoint::Infinity;
                        }
                        return ExactPoint::Finite(complex_div(&ar, &ai, &cr, &ci));
                    }
                    ExactPoint::Finite(v) => (v[0].clone(), v[1].clone()),
                };
                // numerator a z + b, denominator c z + d
                let nr = &ar * &zr - &ai * &zi + br;
                let ni = &ar * &zi + &ai * &zr + bi;
                let er = &cr * &zr - &ci * &zi + dr;
                let ei = &cr * &zi + &ci * &zr + di;
                if er.is_zero() && ei.is_zero() {
                    ExactPoint::Infinity
                } else {
                    ExactPoint::Finite(complex_div(&nr, &ni, &er, &ei))
                }
            }
            GroupElement::So { n, m } => {
                let d = n + 1;
                let v = match x {
                    ExactPoint::Finite(p) => null_lift_exact(p),
                    ExactPoint::Infinity => {
                        let mut v = vec![BigRational::zero(); d];
                        v[d - 2] = BigRational::one();
                        v[d - 1] = BigRational::one();
                        v
                    }
                };
                let mut w = vec![BigRational::zero(); d];
                for i in 0..d {
                    for j in 0..d {
                        if m[i * d + j].is_zero() {
                            continue;
                        }
                        w[i] += BigRational::from_integer(m[i * d + j].clone()) * &v[j];
                    }
                }
                let den = &w[d - 1] - &w[d - 2];
                if den.is_zero() {
                    ExactPoint::Infinity
                } else {
                    ExactPoint::Finite(w[..d - 2].iter().map(|t| t / &den).collect())
                }
            }
        }
    }

    /// Conformal stretch factor |g′(x)| of the boundary action at a finite
    /// non-pole point.
    pub fn conformal_derivative(&self, x: &BoundaryPoint) -> Result<f64> {
        match self {
            GroupElement::Sl2 { .. } => {
                let z = x
                    .as_complex()
                    .ok_or_else(|| Error::domain("derivative at ∞"))?;
                let [_, _, c, d] = self.sl2_entries_f64();
                let den = (c * z + d).norm_sqr();
                if den == 0.0 {
                    return Err(Error::domain("derivative at a pole"));
                }
                Ok(1.0 / den)
            }
            GroupElement::So { n, m } => {
                let d = n + 1;
                let p = match x {
                    BoundaryPoint::Finite(p) => p,
                    BoundaryPoint::Infinity => return Err(Error::domain("derivative at ∞")),
                };
                let mf: Vec<f64> = m.iter().map(big_to_f64).collect();
                let w = mat_vec_f64(&mf, &null_lift_f64(p, *n), d);
                let sigma = (w[d - 1] - w[d - 2]) / 2.0;
                if sigma <= 0.0 {
                    return Err(Error::domain("derivative at a pole"));
                }
                Ok(1.0 / sigma)
            }
        }
    }

    /// Exact conformal derivative at an exact rational point.
    pub fn conformal_derivative_exact(&self, x: &ExactPoint) -> Result<BigRational> {
        match self {
            GroupElement::Sl2 { m, .. } => {
                let v = match x {
                    ExactPoint::Finite(v) => v,
                    ExactPoint::Infinity => return Err(Error::domain("derivative at ∞")),
                };
                let cr = BigRational::from_integer(m[2].re.clone());
                let ci = BigRational::from_integer(m[2].im.clone());
                let dr = BigRational::from_integer(m[3].re.clone());
                let di = BigRational::from_integer(m[3].im.clone());
                let er = &cr * &v[0] - &ci * &v[1] + dr;
                let ei = &cr * &v[1] + &ci * &v[0] + di;
                let den = &er * &er + &ei * &ei;
                if den.is_zero() {
                    return Err(Error::domain("derivative at a pole"));
                }
                Ok(den.recip())
            }
            GroupElement::So { n, m } => {
                let d = n + 1;
                let p = match x {
                    ExactPoint::Finite(p) => p,
                    ExactPoint::Infinity => return Err(Error::domain("derivative at ∞")),
                };
                let v = null_lift_exact(p);
                let mut w_last = BigRational::zero();
                let mut w_prev = BigRational::zero();
                for j in 0..d {
                    if !m[(d - 1) * d + j].is_zero() {
                        w_last += BigRational::from_integer(m[(d - 1) * d + j].clone()) * &v[j];
                    }
                    if !m[(d - 2) * d + j].is_zero() {
                        w_prev += BigRational::from_integer(m[(d - 2) * d + j].clone()) * &v[j];
                    }
                }
                let sigma = (&w_last - &w_prev) / rat(2);
                if sigma <= BigRational::zero() {
                    return Err(Error::domain("derivative at a pole"));
                }
                Ok(sigma.recip())
            }
        }
    }

    /// Hyperbolicity test per setting: |tr| > 2 over ℝ, tr² ∉ [0, 4] over ℂ
    /// (loxodromic included), top eigenvalue > 1 + 10⁻⁹ for SO_Q.
    pub fn is_hyperbolic(&self) -> bool {
        match self {
            GroupElement::Sl2 { real, m } => {
                let t = m[0].add(&m[3]);
                if self.det() == GaussInt::one() {
                    if *real {
                        &t.re * &t.re > BigInt::from(4)
                    } else {
                        !(t.im.is_zero() && &t.re * &t.re <= BigInt::from(4))
                    }
                } else {
                    // det = −1: eigenvalues λ, −1/λ. Over ℝ hyperbolic iff
                    // tr ≠ 0; over ℂ fall back to the eigenvalue modulus.
                    if *real {
                        !t.re.is_zero()
                    } else {
                        match self.expanding_eigenvalue() {
                            Ok(_) => true,
                            Err(_) => false,
                        }
                    }
                }
            }
            GroupElement::So { .. } => match self.top_eigenvalue() {
                Ok(lam) => lam > 1.0 + 1e-9,
                Err(_) => false,
            },
        }
    }

    /// Largest-modulus eigenvalue via power iteration (SO_Q only).
    fn top_eigenvalue(&self) -> Result<f64> {
        let (n, m) = match self {
            GroupElement::So { n, m } => (*n, m),
            _ => return Err(Error::domain("top_eigenvalue is for SO_Q")),
        };
        let d = n + 1;
        let mf: Vec<f64> = m.iter().map(big_to_f64).collect();
        let mut v: Vec<f64> = (0..d).map(|i| 1.0 + (i as f64) * 0.3).collect();
        let mut lam = 1.0f64;
        for _ in 0..500 {
            let w = mat_vec_f64(&mf, &v, d);
            let norm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::numeric("power iteration collapsed"));
            }
            let new_lam: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
                / v.iter().map(|t| t * t).sum::<f64>();
            v = w.iter().map(|t| t / norm).collect();
            if (new_lam - lam).abs() < 1e-14 * lam.abs().max(1.0) {
                lam = new_lam;
                break;
            }
            lam = new_lam;
        }
        Ok(lam.abs())
    }

    /// Complex translation length (ℓ, θ) of a hyperbolic SL₂ element:
    /// the eigenvalue λ with |λ| > 1 gives ℓ = 2 log |λ| > 0 and
    /// θ = 2 arg λ, the pair being defined up to the usual sign ambiguity
    /// of cosh((ℓ + iθ)/2) = tr/2.
    pub fn complex_translation_length(&self) -> Result<(f64, f64)> {
        match self {
            GroupElement::Sl2 { .. } => {
                if self.det() != GaussInt::one() {
                    return Err(Error::domain(
                        "translation length needs determinant 1",
                    ));
                }
                if !self.is_hyperbolic() {
                    return Err(Error::domain("translation length of non-hyperbolic element"));
                }
                let lam = self.expanding_eigenvalue()?;
                Ok((2.0 * lam.norm().ln(), 2.0 * lam.arg()))
            }
            GroupElement::So { .. } => Err(Error::domain(
                "complex translation length is defined for the SL₂ settings",
            )),
        }
    }

    /// Translation length usable in both settings: 2 log |λ| for SL₂,
    /// log of the top eigenvalue for SO_Q.
    pub fn translation_length(&self) -> Result<f64> {
        match self {
            GroupElement::Sl2 { .. } => Ok(self.complex_translation_length()?.0),
            GroupElement::So { .. } => {
                if !self.is_hyperbolic() {
                    return Err(Error::domain("translation length of non-hyperbolic element"));
                }
                Ok(self.top_eigenvalue()?.ln())
            }
        }
    }

    /// Eigenvalue of modulus > 1 of a hyperbolic unimodular 2×2 element
    /// (roots of λ² − tr·λ + det).
    fn expanding_eigenvalue(&self) -> Result<Complex64> {
        let [a, _, _, d] = self.sl2_entries_f64();
        let det = if self.det() == GaussInt::one() { 1.0 } else { -1.0 };
        let t = a + d;
        let disc = (t * t - 4.0 * det).sqrt();
        let l1 = (t + disc) / 2.0;
        let l2 = (t - disc) / 2.0;
        let lam = if l1.norm() >= l2.norm() { l1 } else { l2 };
        if lam.norm() <= 1.0 + 1e-9 {
            return Err(Error::numeric("no expanding eigenvalue"));
        }
        Ok(lam)
    }

    /// Attracting and repelling boundary fixed points of a hyperbolic
    /// element.
    pub fn fixed_points(&self) -> Result<(BoundaryPoint, BoundaryPoint)> {
        if !self.is_hyperbolic() {
            return Err(Error::domain("fixed points of non-hyperbolic element"));
        }
        match self {
            GroupElement::Sl2 { .. } => {
                let [a, b, c, d] = self.sl2_entries_f64();
                let lam = self.expanding_eigenvalue()?;
                let detf = if self.det() == GaussInt::one() { 1.0 } else { -1.0 };
                let mu = detf / lam;
                let point = |ev: Complex64| -> BoundaryPoint {
                    if c.norm() > 1e-300 {
                        BoundaryPoint::complex((ev - d) / c)
                    } else if (a - ev).norm() > 1e-12 * ev.norm() {
                        BoundaryPoint::complex(b / (ev - a))
                    } else {
                        BoundaryPoint::Infinity
                    }
                };
                Ok((point(lam), point(mu)))
            }
            GroupElement::So { .. } => {
                let attract = self.iterate_to_fixed_point()?;
                let repel = self.inverse().iterate_to_fixed_point()?;
                Ok((attract, repel))
            }
        }
    }

    fn iterate_to_fixed_point(&self) -> Result<BoundaryPoint> {
        let dim = self.boundary_dim();
        'starts: for start in 0..4 {
            let mut x = BoundaryPoint::Finite(
                (0..dim)
                    .map(|i| 0.137 * (start as f64 + 1.0) + 0.71 * i as f64)
                    .collect(),
            );
            for _ in 0..4000 {
                let y = self.mobius_apply(&x);
                let step = y.dist(&x);
                let scale = match &y {
                    BoundaryPoint::Finite(v) => {
                        v.iter().map(|t| t.abs()).fold(1.0, f64::max)
                    }
                    BoundaryPoint::Infinity => continue 'starts,
                };
                x = y;
                if step < 1e-14 * scale {
                    // Needs to be attracting, not merely fixed.
                    if let Ok(der) = self.conformal_derivative(&x) {
                        if der < 1.0 {
                            return Ok(x);
                        }
                    }
                    continue 'starts;
                }
            }
        }
        Err(Error::numeric("fixed-point iteration did not converge"))
    }

    /// d(o, g·o): arccosh(‖g‖²/2) for SL₂, arccosh(M_{n+1,n+1}) for SO_Q.
    pub fn hyperbolic_distance(&self) -> f64 {
        match self {
            GroupElement::Sl2 { .. } => {
                let ns = big_to_f64(&self.frobenius_norm_sq());
                (ns / 2.0).max(1.0).acosh()
            }
            GroupElement::So { n, m } => {
                let d = n + 1;
                big_to_f64(&m[d * d - 1]).max(1.0).acosh()
            }
        }
    }
}

/// (2x, |x|²−1, |x|²+1) ∈ ℝ^{n+1}, a future-pointing null vector.
fn null_lift_f64(p: &[f64], n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    let norm_sq: f64 = p.iter().map(|t| t * t).sum();
    for (i, t) in p.iter().enumerate() {
        v[i] = 2.0 * t;
    }
    v[n - 1] = norm_sq - 1.0;
    v[n] = norm_sq + 1.0;
    v
}

fn null_lift_exact(p: &[BigRational]) -> Vec<BigRational> {
    let n = p.len() + 1;
    let mut v = vec![BigRational::zero(); n + 1];
    let norm_sq: BigRational = p.iter().map(|t| t * t).sum();
    for (i, t) in p.iter().enumerate() {
        v[i] = t * rat(2);
    }
    v[n - 1] = &norm_sq - BigRational::one();
    v[n] = norm_sq + BigRational::one();
    v
}

fn mat_vec_f64(m: &[f64], v: &[f64], d: usize) -> Vec<f64> {
    (0..d)
        .map(|i| (0..d).map(|j| m[i * d + j] * v[j]).sum())
        .collect()
}

/// (zr + i·zi) / (wr + i·wi) over the rationals.
fn complex_div(
    zr: &BigRational,
    zi: &BigRational,
    wr: &BigRational,
    wi: &BigRational,
) -> Vec<BigRational> {
    let den = wr * wr + wi * wi;
    vec![(zr * wr + zi * wi) / &den, (zi * wr - zr * wi) / &den]
}

fn det_bigint(m: &[BigInt], d: usize) -> BigInt {
    // Fraction-free Gaussian elimination (Bareiss) on a copy.
    let mut a: Vec<BigInt> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..d - 1 {
        if a[k * d + k].is_zero() {
            let swap = (k + 1..d).find(|&r| !a[r * d + k].is_zero());
            match swap {
                None => return BigInt::zero(),
                Some(r) => {
                    for j in 0..d {
                        a.swap(k * d + j, r * d + j);
                    }
                    sign = -sign;
                }
            }
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let num = &a[i * d + j] * &a[k * d + k] - &a[i * d + k] * &a[k * d + j];
                a[i * d + j] = num / &prev;
            }
            a[i * d + k] = BigInt::zero();
        }
        prev = a[k * d + k].clone();
    }
    sign * a[d * d - 1].clone()
}

/// The symmetric-square embedding SL₂(ℤ) → SO(2,1)(ℤ) for Q = x₁²+x₂²−x₃².
///
/// The image is integral exactly when a+b+c+d is even (the theta congruence
/// class mod 2); other inputs are rejected since the symmetric-square lattice
/// form q² − pr is not ℤ-equivalent to the unimodular Q.
pub fn sym_square_embed(g: &GroupElement) -> Result<GroupElement> {
    let m = match g {
        GroupElement::Sl2 { real: true, m } => m,
        _ => return Err(Error::domain("sym_square_embed expects SL₂(ℤ) input")),
    };
    if g.det() != GaussInt::one() {
        return Err(Error::domain("sym_square_embed needs determinant 1"));
    }
    let (a, b, c, d) = (&m[0].re, &m[1].re, &m[2].re, &m[3].re);
    let sum = a + b + c + d;
    if (&sum % BigInt::from(2)) != BigInt::zero() {
        return Err(Error::domain(
            "no integral symmetric-square image: entries must satisfy a+b+c+d ≡ 0 mod 2",
        ));
    }
    let two = BigInt::from(2);
    let a2 = a * a;
    let b2 = b * b;
    let c2 = c * c;
    let d2 = d * d;
    // Basis chosen so the boundary action matches the null lift
    // x ↦ (2x, x²−1, x²+1) used by mobius_apply.
    let entries = vec![
        a * d + b * c,
        a * c - b * d,
        a * c + b * d,
        a * b - c * d,
        (&a2 - &b2 - &c2 + &d2) / &two,
        (&a2 + &b2 - &c2 - &d2) / &two,
        a * b + c * d,
        (&a2 - &b2 + &c2 - &d2) / &two,
        (&a2 + &b2 + &c2 + &d2) / &two,
    ];
    GroupElement::so_q(2, entries)
}

/// Change of basis to the symmetric-square (p, q, r) coordinates, in which
/// every theta-semigroup generator is entrywise ≥ I with non-negative
/// entries. Returns None when the conjugated matrix is not integral or not
/// entrywise dominated from below by the identity — the certificate for the
/// exact norm-monotone enumeration prune.
pub fn so3_pqr_coordinates(g: &GroupElement) -> Option<Vec<BigInt>> {
    let m = match g {
        GroupElement::So { n: 2, m } => m,
        _ => return None,
    };
    // C maps (x₁,x₂,x₃) to (p,q,r) = (x₂+x₃, x₁, −x₂+x₃); M_pqr = C M C⁻¹,
    // with C⁻¹ = ½ [[0,2,0],[1,0,−1],[1,0,1]].
    let c_mat = [0i64, 1, 1, 1, 0, 0, 0, -1, 1];
    let mut cm = vec![BigInt::zero(); 9];
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                let prod = BigInt::from(c_mat[i * 3 + k]) * &m[k * 3 + j];
                cm[i * 3 + j] += prod;
            }
        }
    }
    let cinv_num = [0i64, 2, 0, 1, 0, -1, 1, 0, 1];
    let mut out = vec![BigInt::zero(); 9];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = BigInt::zero();
            for k in 0..3 {
                s += &cm[i * 3 + k] * BigInt::from(cinv_num[k * 3 + j]);
            }
            if (&s % BigInt::from(2)) != BigInt::zero() {
                return None;
            }
            out[i * 3 + j] = s / BigInt::from(2);
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let floor = if i == j { BigInt::one() } else { BigInt::zero() };
            if out[i * 3 + j] < floor {
                return None;
            }
        }
    }
    Some(out)
}
