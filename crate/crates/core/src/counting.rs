//! Norm-ball counts per congruence class, the boundary counting functions
//! N_q and N_q* with their exact renewal recursions, growth-exponent and
//! equidistribution statistics, and the bounded-partial-quotient
//! denominator sets.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::arith::{big_to_f64, GaussInt};
use crate::congruence::QuotientGroup;
use crate::dynamics;
use crate::error::{Error, Result};
use crate::groups::BoundaryPoint;
use crate::semigroup::{enumerate_words, EnumBound, SemigroupSpec, Word};

/// Locally constant test function: value per listed cylinder word (longest
/// matching prefix wins) with a default elsewhere.
#[derive(Clone, Debug, Serialize)]
pub struct TestFunction {
    pub entries: Vec<(Word, f64)>,
    pub default: f64,
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        TestFunction {
            entries: Vec::new(),
            default: c,
        }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// Evaluate on a symbolic itinerary provided positionally.
    pub fn eval_at<F: Fn(usize) -> usize>(&self, itinerary: F) -> f64 {
        let mut best_len = 0usize;
        let mut value = self.default;
        for (w, v) in &self.entries {
            if w.len() > best_len && w.0.iter().enumerate().all(|(i, &s)| itinerary(i) == s) {
                best_len = w.len();
                value = *v;
            }
        }
        value
    }
}

/// Per-congruence-class counts at increasing radius checkpoints.
#[derive(Clone, Debug, Serialize)]
pub struct CountLedger {
    pub modulus: String,
    pub class_count: usize,
    /// Frobenius-ratio radii R of the checkpoints.
    pub radii: Vec<f64>,
    /// counts\[j\]\[c\]: words with ‖γγ₀‖ ≤ R_j‖γ₀‖ in class c.
    pub counts: Vec<Vec<u64>>,
    /// F-weighted sums, same shape.
    pub weighted: Vec<Vec<f64>>,
    pub words_emitted: u64,
    pub complete: bool,
}

impl CountLedger {
    pub fn totals(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }
}

/// Exact norm-ball count per congruence class: enumerates Γ-words
/// (including the empty word), assigns classes via the quotient group, and
/// accumulates counts and F-weights at each checkpoint. Membership
/// ‖γγ₀‖ ≤ R‖γ₀‖ is decided by exact integer cross-multiplication.
pub fn ball_count(
    spec: &SemigroupSpec,
    group: &QuotientGroup,
    gamma0_word: &Word,
    rsq_schedule: &[BigRational],
    f: &TestFunction,
    budget: Option<u64>,
) -> Result<CountLedger> {
    if rsq_schedule.is_empty() {
        return Err(Error::domain("empty radius schedule"));
    }
    for w in rsq_schedule.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::domain("radius schedule must be increasing"));
        }
    }
    let gamma0 = spec.word_to_element(gamma0_word)?;
    let g0_norm = BigRational::from_integer(gamma0.frobenius_norm_sq());
    let rsq_max = rsq_schedule.last().unwrap().clone();
    let n_classes = group.order();
    let n_checkpoints = rsq_schedule.len();
    let mut counts = vec![vec![0u64; n_classes]; n_checkpoints];
    let mut weighted = vec![vec![0.0f64; n_classes]; n_checkpoints];
    // thresholds R²·‖γ₀‖²
    let limits: Vec<BigRational> = rsq_schedule.iter().map(|r| r * &g0_norm).collect();
    let g0_syms = gamma0_word.0.clone();

    let stats = enumerate_words(
        spec,
        &EnumBound::NormSqRatio {
            rsq: rsq_max,
            gamma0: gamma0.clone(),
        },
        budget,
        &mut |w, g| {
            let gg0 = g.multiply(&gamma0)?;
            let n = BigRational::from_integer(gg0.frobenius_norm_sq());
            let class = group.project(g)?;
            // F at γγ₀·o via the itinerary of the word of γγ₀
            let wsyms = &w.0;
            let fval = f.eval_at(|i| {
                if i < wsyms.len() {
                    wsyms[i]
                } else if i < wsyms.len() + g0_syms.len() {
                    g0_syms[i - wsyms.len()]
                } else {
                    usize::MAX // beyond the known itinerary: no match
                }
            });
            for (j, lim) in limits.iter().enumerate() {
                if n <= *lim {
                    counts[j][class] += 1;
                    weighted[j][class] += fval;
                }
            }
            Ok(())
        },
    )?;
    Ok(CountLedger {
        modulus: group.modulus_label(),
        class_count: n_classes,
        radii: rsq_schedule
            .iter()
            .map(|r| crate::arith::ratio_to_f64(r).sqrt())
            .collect(),
        counts,
        weighted,
        words_emitted: stats.emitted,
        complete: stats.complete,
    })
}

/// Geometric radius schedule R_j² = R₀²·2^j (so R_j = R₀·2^{j/2}), exact.
pub fn geometric_rsq_schedule(r0: &BigRational, checkpoints: usize) -> Vec<BigRational> {
    let r0sq = r0 * r0;
    (0..checkpoints)
        .map(|j| &r0sq * BigRational::from_integer(BigInt::from(1u64) << j))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Standard error of the slope from the fit residuals.
    pub slope_stderr: f64,
    pub points_used: usize,
}

/// Least-squares fit of log(total) against log(R); the slope estimates 2δ.
pub fn exponent_fit(ledger: &CountLedger) -> Result<ExponentFit> {
    let totals = ledger.totals();
    let pts: Vec<(f64, f64)> = ledger
        .radii
        .iter()
        .zip(&totals)
        .filter(|(_, &t)| t > 0)
        .map(|(r, &t)| (r.ln(), (t as f64).ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::domain(format!(
            "exponent fit needs ≥ 5 nonzero checkpoints, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let ss_res = pts
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>();
    let sxx_centered = sxx - sx * sx / n;
    let slope_stderr = if n > 2.0 && sxx_centered > 0.0 {
        (ss_res / (n - 2.0) / sxx_centered).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(ExponentFit {
        slope,
        intercept,
        residual: ss_res.sqrt(),
        slope_stderr,
        points_used: pts.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistributionRow {
    pub radius: f64,
    pub total: u64,
    pub attained_classes: usize,
    /// ½ Σ over attained classes |count/total − 1/#attained|.
    pub tv_attained: f64,
    /// Same with 1/#G over all classes.
    pub tv_full: f64,
}

/// Total-variation distance from uniform per checkpoint, normalized both by
/// the attained classes and by the full group order.
pub fn equidistribution_report(ledger: &CountLedger) -> Result<Vec<EquidistributionRow>> {
    if ledger.class_count < 2 {
        return Err(Error::domain("equidistribution needs a nontrivial modulus"));
    }
    if ledger.counts.is_empty() {
        return Err(Error::domain("empty ledger"));
    }
    let mut out = Vec::new();
    for (j, row) in ledger.counts.iter().enumerate() {
        let total: u64 = row.iter().sum();
        let attained = row.iter().filter(|&&c| c > 0).count();
        if total == 0 || attained == 0 {
            out.push(EquidistributionRow {
                radius: ledger.radii[j],
                total,
                attained_classes: attained,
                tv_attained: 1.0,
                tv_full: 1.0,
            });
            continue;
        }
        let tv_att = 0.5
            * row
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| (c as f64 / total as f64 - 1.0 / attained as f64).abs())
                .sum::<f64>();
        let tv_full = 0.5
            * row
                .iter()
                .map(|&c| (c as f64 / total as f64 - 1.0 / ledger.class_count as f64).abs())
                .sum::<f64>();
        out.push(EquidistributionRow {
            radius: ledger.radii[j],
            total,
            attained_classes: attained,
            tv_attained: tv_att,
            tv_full,
        });
    }
    Ok(out)
}

/// A point of Λ presented symbolically: the anchor of `word`, whose full
/// itinerary is `word` followed by the last symbol repeated forever.
#[derive(Clone, Debug)]
pub struct LimitPoint {
    pub word: Word,
    pub point: BoundaryPoint,
}

impl LimitPoint {
    pub fn new(spec: &SemigroupSpec, word: Word) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::domain("limit point needs a nonempty itinerary"));
        }
        if !spec.is_admissible(&word)? {
            return Err(Error::domain("inadmissible itinerary"));
        }
        let point = dynamics::cylinder_anchor(spec, &word)?;
        Ok(LimitPoint { word, point })
    }

    fn symbol(&self, i: usize) -> usize {
        if i < self.word.len() {
            self.word.0[i]
        } else {
            *self.word.0.last().unwrap()
        }
    }
}

/// N_q(r, u, φ): exact traversal of the preimage tree of u, pruned when the
/// accumulated Birkhoff sum exceeds r (τ > 0 makes the prune exact); the
/// cocycle acts on φ by the right regular representation.
pub fn boundary_count(
    spec: &SemigroupSpec,
    group: &QuotientGroup,
    r: f64,
    u: &LimitPoint,
    phi: &[f64],
    f: &TestFunction,
) -> Result<Vec<f64>> {
    if phi.len() != group.order() {
        return Err(Error::domain("φ length must equal the group order"));
    }
    let ord = group.order();
    // right-multiplication permutations per symbol
    let perms: Vec<Vec<u32>> = (0..spec.n_symbols())
        .map(|j| group.right_multiplication_perm(spec.generator(j)))
        .collect::<Result<_>>()?;
    let mut acc = vec![0.0f64; ord];

    // node state: point, its first symbol, composed permutation ρ[g] = g·h,
    // path symbols (deepest first ordering of the descent), τ accumulated
    struct Frame {
        point: BoundaryPoint,
        path: Vec<usize>,
        rho: Vec<u32>,
        tau_acc: f64,
    }
    let id_rho: Vec<u32> = (0..ord as u32).collect();
    let mut stack = vec![Frame {
        point: u.point.clone(),
        path: Vec::new(),
        rho: id_rho,
        tau_acc: 0.0,
    }];
    while let Some(fr) = stack.pop() {
        if fr.tau_acc > r {
            continue;
        }
        // contribute f(v)·ρ(h)φ, (ρ(h)φ)(g) = φ(g·h)
        let fval = f.eval_at(|i| {
            if i < fr.path.len() {
                fr.path[i]
            } else {
                u.symbol(i - fr.path.len())
            }
        });
        if fval != 0.0 {
            for g in 0..ord {
                acc[g] += fval * phi[fr.rho[g] as usize];
            }
        }
        // descend: children v′ = g_s·v with (s, sym(v)) admissible
        let sym_v = if fr.path.is_empty() {
            u.symbol(0)
        } else {
            fr.path[0]
        };
        for s in 0..spec.n_symbols() {
            if !spec.is_admissible_pair(s, sym_v) {
                continue;
            }
            let vp = spec.generator(s).mobius_apply(&fr.point);
            let t = dynamics::distortion_branch(spec, s, &fr.point)?;
            let mut path = Vec::with_capacity(fr.path.len() + 1);
            path.push(s);
            path.extend_from_slice(&fr.path);
            // ρ′[g] = g·h·π(g_s) = perm_s[ρ[g]]
            let rho: Vec<u32> = fr.rho.iter().map(|&g| perms[s][g as usize]).collect();
            stack.push(Frame {
                point: vp,
                path,
                rho,
                tau_acc: fr.tau_acc + t,
            });
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct RenewalCheck {
    pub holds: bool,
    pub max_discrepancy: f64,
}

/// Verify the one-step congruence renewal equation
/// N_q(r,u,φ) = Σ_{u′∈T⁻¹(u)} c_q(u′)·N_q(r−τ(u′),u′,φ) + f(u)·φ·χ(0 ≤ r)
/// by independent two-sided evaluation (group coordinate exact, weights to
/// the stated tolerance).
pub fn renewal_check(
    spec: &SemigroupSpec,
    group: &QuotientGroup,
    r: f64,
    u: &LimitPoint,
    phi: &[f64],
    f: &TestFunction,
    tol: f64,
) -> Result<RenewalCheck> {
    let ord = group.order();
    let lhs = boundary_count(spec, group, r, u, phi, f)?;
    let mut rhs = vec![0.0f64; ord];
    if r >= 0.0 {
        let fu = f.eval_at(|i| u.symbol(i));
        for g in 0..ord {
            rhs[g] += fu * phi[g];
        }
    }
    let sym_u = u.symbol(0);
    for s in 0..spec.n_symbols() {
        if !spec.is_admissible_pair(s, sym_u) {
            continue;
        }
        let t = dynamics::distortion_branch(spec, s, &u.point)?;
        let mut word = vec![s];
        word.extend_from_slice(&u.word.0);
        let u_prime = LimitPoint::new(spec, Word(word))?;
        let inner = boundary_count(spec, group, r - t, &u_prime, phi, f)?;
        // c_q(u′)·inner = ρ(π(g_s)) applied: out[g] = inner[g·π(g_s)]
        let perm = group.right_multiplication_perm(spec.generator(s))?;
        for g in 0..ord {
            rhs[g] += inner[perm[g] as usize];
        }
    }
    let max_disc = lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(RenewalCheck {
        holds: max_disc <= tol,
        max_discrepancy: max_disc,
    })
}

/// N_q*(r, γ₀, φ) = Σ_{γ: d(o,γγ₀o) − d(o,γ₀o) ≤ r} F(γγ₀o)·π_q(γ̃)φ,
/// as a vector over the quotient group.
pub fn orbital_count(
    spec: &SemigroupSpec,
    group: &QuotientGroup,
    r: f64,
    gamma0_word: &Word,
    phi: &[f64],
    f: &TestFunction,
) -> Result<Vec<f64>> {
    if r < 0.0 {
        return Ok(vec![0.0; group.order()]);
    }
    let ord = group.order();
    let gamma0 = spec.word_to_element(gamma0_word)?;
    let d0 = gamma0.hyperbolic_distance();
    // ‖γγ₀‖² = 2cosh d(o, γγ₀o) ≤ 2cosh(r + d₀); inflate slightly so the
    // exact float filter below is the binding test.
    let bound_abs = 2.0 * (r + d0).cosh() * (1.0 + 1e-9);
    let g0n = big_to_f64(&gamma0.frobenius_norm_sq());
    let rsq = BigRational::from_float(bound_abs / g0n)
        .ok_or_else(|| Error::numeric("radius overflow"))?;
    let mut acc = vec![0.0f64; ord];
    let g0_syms = gamma0_word.0.clone();
    enumerate_words(
        spec,
        &EnumBound::NormSqRatio {
            rsq,
            gamma0: gamma0.clone(),
        },
        None,
        &mut |w, g| {
            let gg0 = g.multiply(&gamma0)?;
            let d = gg0.hyperbolic_distance();
            if d - d0 > r {
                return Ok(());
            }
            let fval = f.eval_at(|i| {
                if i < w.0.len() {
                    w.0[i]
                } else if i < w.0.len() + g0_syms.len() {
                    g0_syms[i - w.0.len()]
                } else {
                    usize::MAX
                }
            });
            if fval != 0.0 {
                let h = group.project(g)?;
                for gg in 0..ord {
                    acc[gg] += fval * phi[group.mul_index(gg, h)?];
                }
            }
            Ok(())
        },
    )?;
    Ok(acc)
}

/// The N_q* renewal: N_q*(r, γ₀, φ) = Σ_{j adm before γ₀}
/// N_q*(r − τ*(g_jγ₀), g_jγ₀, π_q(g̃_j)φ) + F(γ₀o)·φ·χ(0 ≤ r) with
/// τ*(γ) = d(o, γo) − d(o, T(γo)).
pub fn orbital_renewal_check(
    spec: &SemigroupSpec,
    group: &QuotientGroup,
    r: f64,
    gamma0_word: &Word,
    phi: &[f64],
    f: &TestFunction,
    tol: f64,
) -> Result<RenewalCheck> {
    let ord = group.order();
    let lhs = orbital_count(spec, group, r, gamma0_word, phi, f)?;
    let mut rhs = vec![0.0f64; ord];
    if r >= 0.0 {
        let g0s = &gamma0_word.0;
        let fu = f.eval_at(|i| if i < g0s.len() { g0s[i] } else { usize::MAX });
        for g in 0..ord {
            rhs[g] += fu * phi[g];
        }
    }
    let gamma0 = spec.word_to_element(gamma0_word)?;
    let d0 = gamma0.hyperbolic_distance();
    for j in 0..spec.n_symbols() {
        if let Some(&first) = gamma0_word.0.first() {
            if !spec.is_admissible_pair(j, first) {
                continue;
            }
        }
        let mut word = vec![j];
        word.extend_from_slice(&gamma0_word.0);
        let gj_gamma0 = spec.word_to_element(&Word(word.clone()))?;
        let tau_star = gj_gamma0.hyperbolic_distance() - d0;
        let perm = group.right_multiplication_perm(spec.generator(j))?;
        // φ′ = π_q(g̃_j)φ acting by the right regular representation
        let phi_j: Vec<f64> = (0..ord).map(|g| phi[perm[g] as usize]).collect();
        let inner = orbital_count(spec, group, r - tau_star, &Word(word), &phi_j, f)?;
        for g in 0..ord {
            rhs[g] += inner[g];
        }
    }
    let max_disc = lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(RenewalCheck {
        holds: max_disc <= tol,
        max_discrepancy: max_disc,
    })
}

/// Canonical associate of a Gaussian integer: rotate by units into
/// {Re > 0, Im ≥ 0} (or the element itself over ℤ).
fn canonical_associate(d: &GaussInt) -> GaussInt {
    if d.is_zero() {
        return d.clone();
    }
    let mut cand = d.clone();
    for _ in 0..4 {
        if cand.re.is_positive() && !cand.im.is_negative() {
            return cand;
        }
        // multiply by i
        cand = cand.mul(&GaussInt::i());
    }
    cand
}

#[derive(Clone, Debug)]
pub struct ZarembaSets {
    /// Denominators d with N(d) ≤ bound, canonical associates, sorted.
    pub denominators: BTreeSet<(i64, i64)>,
    /// Reduced fractions (b, d) when collected.
    pub fractions: Option<BTreeSet<((i64, i64), (i64, i64))>>,
    pub sequences_visited: u64,
}

/// Enumerate products g_{a₁}⋯g_{a_k} with N(denominator) ≤ bound, pruning
/// by the strict growth of |q_k| (the continuant ratio q_k/q_{k−1} has real
/// part ≥ 1 whenever all digits do), and collect the exact denominators.
pub fn zaremba_sets(
    alphabet: &[GaussInt],
    bound: &BigInt,
    collect_fractions: bool,
) -> Result<ZarembaSets> {
    if alphabet.is_empty() {
        return Err(Error::domain("empty alphabet"));
    }
    for a in alphabet {
        if a.re < BigInt::from(1) {
            return Err(Error::domain(format!("letter {a} has Re < 1")));
        }
    }
    // ring norm of denominators: |d| over ℤ, |d|² over ℤ\[i\]
    let real_alphabet = alphabet.iter().all(|a| a.is_real());
    let ring_norm_of = |q: &GaussInt| -> BigInt {
        if real_alphabet {
            q.re.abs()
        } else {
            q.norm()
        }
    };
    let mut denominators = BTreeSet::new();
    let mut fractions = collect_fractions.then(BTreeSet::new);
    let mut visited = 0u64;
    // continuant state (p_{k−1}, p_k, q_{k−1}, q_k)
    struct St {
        p_prev: GaussInt,
        p: GaussInt,
        q_prev: GaussInt,
        q: GaussInt,
    }
    let mut stack = vec![St {
        p_prev: GaussInt::one(),
        p: GaussInt::zero(),
        q_prev: GaussInt::zero(),
        q: GaussInt::one(),
    }];
    let small = |x: &GaussInt| -> Result<(i64, i64)> {
        Ok((
            x.re.to_i64()
                .ok_or_else(|| Error::resource("denominator too large"))?,
            x.im.to_i64()
                .ok_or_else(|| Error::resource("denominator too large"))?,
        ))
    };
    while let Some(st) = stack.pop() {
        for a in alphabet {
            let p_next = a.mul(&st.p).add(&st.p_prev);
            let q_next = a.mul(&st.q).add(&st.q_prev);
            visited += 1;
            if ring_norm_of(&q_next) > *bound {
                continue; // descendants only grow: |q| is strictly increasing
            }
            denominators.insert(small(&canonical_associate(&q_next))?);
            if let Some(fr) = fractions.as_mut() {
                fr.insert((small(&p_next)?, small(&q_next)?));
            }
            stack.push(St {
                p_prev: st.p.clone(),
                p: p_next,
                q_prev: st.q.clone(),
                q: q_next,
            });
        }
    }
    Ok(ZarembaSets {
        denominators,
        fractions,
        sequences_visited: visited,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZarembaDensity {
    pub n: u64,
    pub hits: u64,
    pub density: f64,
}

/// #(𝔇_𝒜 ∩ [1, N])/N for a real alphabet.
pub fn zaremba_density(alphabet: &[GaussInt], n: u64) -> Result<ZarembaDensity> {
    if alphabet.iter().any(|a| !a.is_real()) {
        return Err(Error::domain(
            "density over [1, N] needs a real alphabet; use zaremba_sets for ℤ[i]",
        ));
    }
    if n == 0 {
        return Err(Error::domain("N ≥ 1 required"));
    }
    let sets = zaremba_sets(alphabet, &BigInt::from(n), false)?;
    let hits = sets
        .denominators
        .iter()
        .filter(|(re, im)| *im == 0 && *re >= 1 && (*re as u64) <= n)
        .count() as u64;
    Ok(ZarembaDensity {
        n,
        hits,
        density: hits as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::quotient_group;

    fn cf12() -> SemigroupSpec {
        SemigroupSpec::cf(vec![GaussInt::from(1), GaussInt::from(2)], None).unwrap()
    }

    fn rsq(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn ball_count_small_radius_sees_empty_word() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(2), 100).unwrap();
        // R = 1.2: only the empty word satisfies ‖γ‖ ≤ R‖e‖.
        let ledger = ball_count(
            &spec,
            &group,
            &Word::empty(),
            &[BigRational::new(BigInt::from(144), BigInt::from(100))],
            &TestFunction::one(),
            None,
        )
        .unwrap();
        assert_eq!(ledger.totals(), vec![1]);
        assert_eq!(ledger.counts[0][group.identity_index], 1);
    }

    #[test]
    fn ball_count_matches_length_capped_filter() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(1), 10).unwrap();
        let schedule = vec![rsq(100), rsq(400), rsq(1600)];
        let ledger = ball_count(
            &spec,
            &group,
            &Word::empty(),
            &schedule,
            &TestFunction::one(),
            None,
        )
        .unwrap();
        // brute force: all words to length 8, filtered by exact norm
        let mut expected = vec![0u64; 3];
        enumerate_words(&spec, &EnumBound::MaxLen(8), None, &mut |_, g| {
            let n = BigRational::from_integer(g.frobenius_norm_sq());
            for (j, r) in schedule.iter().enumerate() {
                if n <= r * BigRational::from_integer(BigInt::from(2)) {
                    expected[j] += 1;
                }
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(ledger.totals(), expected);
        assert!(ledger.complete);
    }

    #[test]
    fn identity_class_nonempty_population() {
        // BFS oracle over quotient classes: the identity class mod 2 is
        // already populated at block length 1, since g_{2,2} = (1 2; 2 5)
        // ≡ I mod 2; (g_{1,1})³ ≡ I mod 2 reaches it within the g_{1,1}
        // subfamily at block length 3 (digit length 6).
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(2), 100).unwrap();
        let mut min_len: Option<usize> = None;
        let mut min_len_g11: Option<usize> = None;
        enumerate_words(&spec, &EnumBound::MaxLen(4), None, &mut |w, g| {
            if !w.is_empty() && group.project(g).unwrap() == group.identity_index {
                min_len = Some(min_len.map_or(w.len(), |m| m.min(w.len())));
                if w.0.iter().all(|&s| s == 0) {
                    min_len_g11 = Some(min_len_g11.map_or(w.len(), |m| m.min(w.len())));
                }
            }
            Ok(())
        })
        .unwrap();
        assert_eq!(min_len, Some(1));
        assert_eq!(min_len_g11, Some(3));
        let g22 = spec.word_to_element(&Word(vec![3])).unwrap();
        assert_eq!(group.project(&g22).unwrap(), group.identity_index);
    }

    #[test]
    fn ledger_monotone_per_class() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(3), 100).unwrap();
        let schedule = geometric_rsq_schedule(&rsq(6), 6);
        let ledger = ball_count(
            &spec,
            &group,
            &Word::empty(),
            &schedule,
            &TestFunction::one(),
            None,
        )
        .unwrap();
        for c in 0..ledger.class_count {
            for j in 1..ledger.counts.len() {
                assert!(ledger.counts[j][c] >= ledger.counts[j - 1][c]);
            }
        }
    }

    #[test]
    fn exponent_fit_recovers_synthetic_power_law() {
        // radii large enough that the floor quantization of ⌊R^{1.06}⌋ does
        // not bias the slope beyond the stated 0.01
        let ledger = CountLedger {
            modulus: "1".into(),
            class_count: 1,
            radii: (0..8).map(|j| 1000.0 * 1.5f64.powi(j)).collect(),
            counts: (0..8)
                .map(|j| vec![(1000.0f64 * 1.5f64.powi(j)).powf(1.06).floor() as u64])
                .collect(),
            weighted: vec![vec![0.0]; 8],
            words_emitted: 0,
            complete: true,
        };
        let fit = exponent_fit(&ledger).unwrap();
        assert!((fit.slope - 1.06).abs() < 0.01, "slope {}", fit.slope);
        // single checkpoint errors
        let small = CountLedger {
            radii: vec![10.0],
            counts: vec![vec![5]],
            weighted: vec![vec![0.0]],
            ..ledger
        };
        assert!(exponent_fit(&small).is_err());
    }

    #[test]
    fn equidistribution_synthetic_extremes() {
        let mk = |counts: Vec<u64>| CountLedger {
            modulus: "5".into(),
            class_count: counts.len(),
            radii: vec![10.0],
            counts: vec![counts],
            weighted: vec![vec![]],
            words_emitted: 0,
            complete: true,
        };
        let uniform = equidistribution_report(&mk(vec![7, 7, 7, 7])).unwrap();
        assert!(uniform[0].tv_attained < 1e-12);
        let point_mass = equidistribution_report(&mk(vec![9, 0, 0])).unwrap();
        // all mass on one class: TV = 1 − 1/#attained = 0 over attained…
        // attained = {the one class}: tv_attained = 0; against the full
        // group: 1 − 1/3.
        assert!(point_mass[0].tv_attained < 1e-12);
        assert!((point_mass[0].tv_full - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn boundary_count_degenerate_radii() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(2), 100).unwrap();
        let u = LimitPoint::new(&spec, Word(vec![0])).unwrap();
        let mut phi = vec![0.0; group.order()];
        phi[group.identity_index] = 1.0;
        let f = TestFunction::one();
        // r < 0: zero vector (even the j = 0 term is excluded)
        let neg = boundary_count(&spec, &group, -0.5, &u, &phi, &f).unwrap();
        assert!(neg.iter().all(|&x| x == 0.0));
        // r = 0: single j = 0 contribution f(u)·φ
        let zero = boundary_count(&spec, &group, 0.0, &u, &phi, &f).unwrap();
        assert_eq!(zero, phi);
    }

    #[test]
    fn boundary_count_order_independent() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(3), 100).unwrap();
        let u = LimitPoint::new(&spec, Word(vec![2])).unwrap();
        let phi: Vec<f64> = (0..group.order()).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let f = TestFunction::one();
        let v1 = boundary_count(&spec, &group, 3.0, &u, &phi, &f).unwrap();
        // independent recomputation via the renewal right-hand side
        let check = renewal_check(&spec, &group, 3.0, &u, &phi, &f, 1e-9).unwrap();
        assert!(check.holds, "max discrepancy {}", check.max_discrepancy);
        // and the vector is not trivial
        assert!(v1.iter().any(|&x| x != 0.0));
    }

    #[test]
    fn renewal_negative_control() {
        // perturbing one weight by 1e-3 must break the identity
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(2), 100).unwrap();
        let u = LimitPoint::new(&spec, Word(vec![1])).unwrap();
        let phi = vec![1.0, -1.0, 0.5, 0.0, 0.0, -0.5];
        let f = TestFunction::one();
        let lhs = boundary_count(&spec, &group, 2.5, &u, &phi, &f).unwrap();
        let mut bad = lhs.clone();
        bad[0] += 1e-3;
        let direct = boundary_count(&spec, &group, 2.5, &u, &phi, &f).unwrap();
        let max_disc = bad
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_disc > 5e-4);
    }

    #[test]
    fn orbital_count_negative_radius_is_zero() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(2), 100).unwrap();
        let phi = vec![1.0; group.order()];
        let out = orbital_count(
            &spec,
            &group,
            -0.1,
            &Word(vec![0]),
            &phi,
            &TestFunction::one(),
        )
        .unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn orbital_renewal_holds() {
        let spec = cf12();
        let group = quotient_group(&spec, &GaussInt::from(2), 100).unwrap();
        let phi: Vec<f64> = (0..group.order()).map(|i| 1.0 + i as f64 * 0.25).collect();
        let f = TestFunction::one();
        let check = orbital_renewal_check(
            &spec,
            &group,
            2.3,
            &Word(vec![1]),
            &phi,
            &f,
            1e-9,
        )
        .unwrap();
        assert!(check.holds, "max discrepancy {}", check.max_discrepancy);
    }

    #[test]
    fn frobenius_distance_conversion_inequality() {
        // d(i, γγ₀i) − d(i, γ₀i) ≤ 2log R + log(1 + e^{−2d(i,γ₀i)})
        //   + log(1 − e^{−d(i,γγ₀i)}/(2R²cosh d(i,γ₀i)))
        // for every enumerated γ with ‖γγ₀‖/‖γ₀‖ ≤ R.
        let spec = cf12();
        let gamma0 = spec.word_to_element(&Word(vec![1])).unwrap();
        let d0 = gamma0.hyperbolic_distance();
        enumerate_words(
            &spec,
            &EnumBound::NormSqRatio {
                rsq: rsq(1_000_000),
                gamma0: gamma0.clone(),
            },
            None,
            &mut |_, g| {
                let gg0 = g.multiply(&gamma0).unwrap();
                let d = gg0.hyperbolic_distance();
                let norm_ratio_sq = big_to_f64(&gg0.frobenius_norm_sq())
                    / big_to_f64(&gamma0.frobenius_norm_sq());
                let r_big = norm_ratio_sq.sqrt();
                let bound = 2.0 * r_big.ln()
                    + (1.0 + (-2.0 * d0).exp()).ln()
                    + (1.0 - (-d).exp() / (2.0 * r_big * r_big * d0.cosh())).ln();
                assert!(
                    d - d0 <= bound + 1e-9,
                    "violated: d−d₀ = {} vs bound {}",
                    d - d0,
                    bound
                );
                Ok(())
            },
        )
        .unwrap();
    }

    #[test]
    fn zaremba_basic_membership() {
        // [1,2] = 2/3 → 3 is a denominator; every single digit a gives 1/a.
        let alphabet = [GaussInt::from(1), GaussInt::from(2)];
        let sets = zaremba_sets(&alphabet, &BigInt::from(50), true).unwrap();
        assert!(sets.denominators.contains(&(3, 0)));
        assert!(sets.denominators.contains(&(1, 0)));
        assert!(sets.denominators.contains(&(2, 0)));
        let fr = sets.fractions.unwrap();
        assert!(fr.contains(&((2, 0), (3, 0))));
    }

    #[test]
    fn zaremba_single_letter_is_fibonacci() {
        // 𝒜 = {1}: denominators are the Fibonacci numbers 1, 2, 3, 5, 8, …
        let sets = zaremba_sets(&[GaussInt::from(1)], &BigInt::from(60), false).unwrap();
        let got: Vec<i64> = sets.denominators.iter().map(|(re, _)| *re).collect();
        assert_eq!(got, vec![1, 2, 3, 5, 8, 13, 21, 34, 55]);
        // density tends to zero
        let d = zaremba_density(&[GaussInt::from(1)], 1000).unwrap();
        assert!(d.density < 0.02);
    }

    #[test]
    fn zaremba_density_edge_cases() {
        let d1 = zaremba_density(&[GaussInt::from(1), GaussInt::from(2)], 1).unwrap();
        assert_eq!(d1.hits, 1);
        assert!((d1.density - 1.0).abs() < 1e-12);
        assert!(zaremba_density(&[GaussInt::new(1, 1)], 10).is_err());
    }

    #[test]
    fn zaremba_brute_force_agreement_small() {
        // per-denominator Euclid oracle for d ≤ 80, 𝒜 = {1, 2, 3}
        let alphabet = [GaussInt::from(1), GaussInt::from(2), GaussInt::from(3)];
        let allowed: std::collections::BTreeSet<i64> = vec![1, 2, 3].into_iter().collect();
        let sets = zaremba_sets(&alphabet, &BigInt::from(80), false).unwrap();
        let fast: BTreeSet<i64> = sets.denominators.iter().map(|(re, _)| *re).collect();
        let mut brute = BTreeSet::new();
        for d in 1i64..=80 {
            'bs: for b in 1..=d {
                if num_integer::gcd(b, d) != 1 {
                    continue;
                }
                // canonical expansion of b/d
                let mut digits = Vec::new();
                let (mut num, mut den) = (b, d);
                while num != 0 {
                    let a = den / num;
                    digits.push(a);
                    let r = den % num;
                    den = num;
                    num = r;
                }
                // two representations: [..., a_k] and [..., a_k − 1, 1]
                let mut reps = vec![digits.clone()];
                if *digits.last().unwrap() >= 2 {
                    let mut alt = digits.clone();
                    *alt.last_mut().unwrap() -= 1;
                    alt.push(1);
                    reps.push(alt);
                } else if digits.len() >= 2 {
                    let mut alt = digits.clone();
                    alt.pop();
                    *alt.last_mut().unwrap() += 1;
                    reps.push(alt);
                }
                for rep in reps {
                    if rep.iter().all(|a| allowed.contains(a)) {
                        brute.insert(d);
                        break 'bs;
                    }
                }
            }
        }
        assert_eq!(fast, brute);
    }
}
