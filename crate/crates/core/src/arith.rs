//! Exact arithmetic over ℤ and ℤ\[i\]: norms, gcds, square-free tests and
//! canonical residues mod q.
//!
//! Everything here is exact big-integer arithmetic; floating point never
//! enters. Counting and congruence bookkeeping in the other modules lean on
//! the canonical residue representative being unique per class.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian integer re + im·i with arbitrary-precision parts.
///
/// Plain integers are embedded as `im = 0`; the ring operations below are
/// shared by both settings (𝒪 = ℤ and 𝒪 = ℤ\[i\]).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl fmt::Debug for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl From<i64> for GaussInt {
    fn from(n: i64) -> Self {
        GaussInt {
            re: BigInt::from(n),
            im: BigInt::zero(),
        }
    }
}

impl GaussInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        GaussInt {
            re: re.into(),
            im: im.into(),
        }
    }

    pub fn zero() -> Self {
        GaussInt::new(0, 0)
    }

    pub fn one() -> Self {
        GaussInt::new(1, 0)
    }

    pub fn i() -> Self {
        GaussInt::new(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True iff the element is one of the units ±1, ±i.
    pub fn is_unit(&self) -> bool {
        self.norm() == BigInt::one()
    }

    pub fn add(&self, other: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    pub fn sub(&self, other: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    pub fn neg(&self) -> GaussInt {
        GaussInt {
            re: -&self.re,
            im: -&self.im,
        }
    }

    pub fn mul(&self, other: &GaussInt) -> GaussInt {
        GaussInt {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    pub fn conj(&self) -> GaussInt {
        GaussInt {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// Field norm N(x) = x·x̄ = re² + im², always a non-negative integer.
    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (big_to_f64(&self.re), big_to_f64(&self.im))
    }

    /// Nearest-lattice-point division: q, r with self = q·d + r and
    /// N(r) ≤ N(d)/2. Ties in the rounding are broken downward, which is
    /// irrelevant for gcd termination.
    pub fn div_rem_nearest(&self, d: &GaussInt) -> (GaussInt, GaussInt) {
        assert!(!d.is_zero(), "division by zero Gaussian integer");
        let nd = d.norm();
        // self / d = self * conj(d) / N(d)
        let num = self.mul(&d.conj());
        let q = GaussInt {
            re: round_div(&num.re, &nd),
            im: round_div(&num.im, &nd),
        };
        let r = self.sub(&q.mul(d));
        (q, r)
    }
}

/// Round a/b to the nearest integer (half away from zero).
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (mut num, mut den) = (a.clone(), b.clone());
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    if num.is_negative() {
        -((-num * two.clone() + &den) / (den * two))
    } else {
        (num * two.clone() + &den) / (den * two)
    }
}

pub fn big_to_f64(x: &BigInt) -> f64 {
    // TryFrom is lossless only below 2^53; counting values stay far below.
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::INFINITY)
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    big_to_f64(x.numer()) / big_to_f64(x.denom())
}

/// Ring norm per the two settings: |q| over ℤ, |q|² over ℤ\[i\].
///
/// The element is treated as a plain integer when its imaginary part is
/// zero *and* `gaussian` is false; otherwise as a Gaussian integer.
pub fn ring_norm(q: &GaussInt, gaussian: bool) -> Result<BigInt> {
    if q.is_zero() {
        return Err(Error::domain("norm of zero modulus"));
    }
    if gaussian {
        Ok(q.norm())
    } else {
        if !q.is_real() {
            return Err(Error::domain("non-real element in the ℤ setting"));
        }
        Ok(q.re.abs())
    }
}

/// Euclidean gcd in ℤ\[i\] (covers ℤ as the im = 0 case).
pub fn gauss_gcd(a: &GaussInt, b: &GaussInt) -> GaussInt {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_zero() {
        let (_, r) = x.div_rem_nearest(&y);
        x = y;
        y = r;
    }
    x
}

/// True iff gcd(a, b) is a unit.
pub fn coprime(a: &GaussInt, b: &GaussInt) -> Result<bool> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::domain("coprime(0, 0) undefined"));
    }
    Ok(gauss_gcd(a, b).is_unit())
}

/// Extended gcd over ℤ: returns (g, x, y) with a·x + b·y = g, g ≥ 0.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if b.is_zero() {
        if a.is_negative() {
            return (-a.clone(), BigInt::from(-1), BigInt::zero());
        }
        return (a.clone(), BigInt::one(), BigInt::zero());
    }
    let (q, r) = a.div_rem(b);
    let (g, x, y) = ext_gcd(b, &r);
    (g, y.clone(), x - q * y)
}

fn small_prime_factors(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    // Desk-scale trial division; moduli in the experiments stay tiny.
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    let cap = BigInt::from(10_000_000u64);
    while &p * &p <= n {
        if p > cap {
            return Err(Error::resource(
                "factorization beyond trial-division range",
            ));
        }
        let mut e = 0u32;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    Ok(out)
}

/// Square-free test in the appropriate ring.
///
/// Over ℤ this is the usual no-square-factor test. Over ℤ\[i\] the rational
/// prime factorization of N(q) is lifted: p ≡ 3 mod 4 stays prime (and
/// contributes N = p²), p ≡ 1 mod 4 splits into two conjugate primes, and
/// 2 = −i(1+i)² ramifies, so q is divisible by the square of a Gaussian
/// prime iff 4 | N(q) or p² | q for an inert p or π² | q for a split π.
pub fn is_square_free(q: &GaussInt, gaussian: bool) -> Result<bool> {
    if q.is_zero() {
        return Err(Error::domain("square-free test on zero"));
    }
    if !gaussian {
        if !q.is_real() {
            return Err(Error::domain("non-real element in the ℤ setting"));
        }
        if q.re.abs().is_one() {
            return Err(Error::domain("square-free test on a unit"));
        }
        let n = q.re.abs();
        return Ok(small_prime_factors(&n)?.iter().all(|(_, e)| *e == 1));
    }
    if q.is_unit() {
        return Err(Error::domain("square-free test on a unit"));
    }
    let n = q.norm();
    for (p, e) in small_prime_factors(&n)? {
        let p_mod4 = (&p % BigInt::from(4u8) + BigInt::from(4u8)) % BigInt::from(4u8);
        if p == BigInt::from(2) {
            // ramified: (1+i)² ~ 2, so any factor 4 | N(q) means (1+i)² | q;
            // N((1+i)) = 2, hence e ≥ 2 iff not square-free at 1+i.
            if e >= 2 {
                return Ok(false);
            }
        } else if p_mod4 == BigInt::from(3) {
            // inert: contributes p² to the norm per single factor.
            if e % 2 != 0 {
                return Err(Error::numeric("norm of Gaussian integer has odd inert valuation"));
            }
            if e / 2 >= 2 {
                return Ok(false);
            }
        } else {
            // split: π and π̄ each contribute p; π² | q iff dividing q by π
            // twice stays integral.
            let pi = split_gaussian_prime(&p)?;
            for cand in [pi.clone(), pi.conj()] {
                let sq = cand.mul(&cand);
                let (_, r) = q.div_rem_nearest(&sq);
                if r.is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A Gaussian prime above a split rational prime p ≡ 1 mod 4
/// (Hermite–Serret style search; desk scale).
fn split_gaussian_prime(p: &BigInt) -> Result<GaussInt> {
    let mut a = BigInt::one();
    loop {
        let asq = &a * &a;
        if &asq * 2 > *p {
            break;
        }
        let rem = p - &asq;
        let b = rem.sqrt();
        if &b * &b == rem {
            return Ok(GaussInt { re: a, im: b });
        }
        a += 1;
    }
    Err(Error::numeric(format!("no two-square decomposition for {p}")))
}

/// Canonical residue of x mod the ideal (q).
///
/// The representative is the remainder of nearest-lattice division with
/// ties broken toward non-negative real part, then non-negative imaginary
/// part, so equal classes always reduce to the identical element.
pub fn canonical_residue(x: &GaussInt, q: &GaussInt) -> GaussInt {
    assert!(!q.is_zero());
    let (_, r0) = x.div_rem_nearest(q);
    // The nearest remainder is unique unless x/q sits on the boundary of a
    // lattice cell; scan neighbouring representatives and apply the
    // deterministic tie-break on (norm, re ≥ 0, im ≥ 0, re, im).
    let mut best: Option<(GaussInt, BigInt)> = None;
    for dr in -1i64..=1 {
        for di in -1i64..=1 {
            let cand = r0.sub(&q.mul(&GaussInt::new(dr, di)));
            let n = cand.norm();
            let better = match &best {
                None => true,
                Some((bc, bn)) => {
                    if &n != bn {
                        n < *bn
                    } else {
                        residue_tiebreak(&cand, bc)
                    }
                }
            };
            if better {
                best = Some((cand, n));
            }
        }
    }
    best.unwrap().0
}

/// True iff `a` is preferred over `b` under the tie-break order.
fn residue_tiebreak(a: &GaussInt, b: &GaussInt) -> bool {
    let key = |g: &GaussInt| {
        (
            g.re.is_negative(),
            g.im.is_negative(),
            g.re.clone(),
            g.im.clone(),
        )
    };
    key(a) < key(b)
}

/// Enumerate the canonical residues of 𝒪/q𝒪; the count equals N(q).
pub fn residues_mod(q: &GaussInt, gaussian: bool) -> Result<Vec<GaussInt>> {
    let n = ring_norm(q, gaussian)?;
    use num_traits::ToPrimitive;
    let bound = n
        .to_i64()
        .ok_or_else(|| Error::resource("modulus too large to enumerate"))?;
    let mut seen = std::collections::BTreeSet::new();
    if gaussian {
        for a in 0..bound {
            for b in 0..bound {
                seen.insert(canonical_residue(&GaussInt::new(a, b), q));
            }
        }
    } else {
        for a in 0..bound {
            seen.insert(canonical_residue(&GaussInt::new(a, 0), q));
        }
    }
    Ok(seen.into_iter().collect())
}
