//! Cylinder discretization of the transfer operators, Ruelle–Perron–
//! Frobenius eigendata by power iteration, pressure, the Bowen bisection
//! for the critical exponent, Gibbs diagnostics and the congruence spectral
//! decay probe.
//!
//! Discretization is piecewise-constant on depth-k cylinders with weights
//! evaluated at anchor points: W[C ← C′] = e^{−s·τ(x_{C′})} over the
//! admissible one-step refinements C′ = (j, prefix of C). Anchors are
//! dynamically consistent (T x_w = x_{shift w}), so Birkhoff sums telescope
//! along the tower levels.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::congruence::QuotientGroup;
use crate::error::{Error, Result};
use crate::groups::{BoundaryPoint, GroupElement};
use crate::semigroup::SemigroupSpec;

/// Cheap float view of a generator's boundary action.
enum FastGen {
    Sl2 {
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    },
    So {
        d: usize,
        m: Vec<f64>,
    },
}

impl FastGen {
    fn new(g: &GroupElement) -> Self {
        match g {
            GroupElement::Sl2 { m, .. } => {
                let c = |x: &crate::arith::GaussInt| {
                    let (re, im) = x.to_f64();
                    Complex64::new(re, im)
                };
                FastGen::Sl2 {
                    a: c(&m[0]),
                    b: c(&m[1]),
                    c: c(&m[2]),
                    d: c(&m[3]),
                }
            }
            GroupElement::So { n, m } => FastGen::So {
                d: n + 1,
                m: m.iter().map(crate::arith::big_to_f64).collect(),
            },
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        match self {
            FastGen::Sl2 { a, b, c, d } => {
                let z = Complex64::new(x[0], x[1]);
                let w = (a * z + b) / (c * z + d);
                out[0] = w.re;
                out[1] = w.im;
            }
            FastGen::So { d, m } => {
                let dd = *d;
                let dim = dd - 2;
                let norm_sq: f64 = x.iter().map(|t| t * t).sum();
                let mut v = vec![0.0; dd];
                for (i, t) in x.iter().enumerate() {
                    v[i] = 2.0 * t;
                }
                v[dd - 2] = norm_sq - 1.0;
                v[dd - 1] = norm_sq + 1.0;
                let mut w = vec![0.0; dd];
                for i in 0..dd {
                    let row = &m[i * dd..(i + 1) * dd];
                    w[i] = row.iter().zip(&v).map(|(p, q)| p * q).sum();
                }
                let den = w[dd - 1] - w[dd - 2];
                for i in 0..dim {
                    out[i] = w[i] / den;
                }
            }
        }
    }

    /// −log |g′(x)|, the τ contribution of the inverse branch g.
    fn neg_log_deriv(&self, x: &[f64]) -> f64 {
        match self {
            FastGen::Sl2 { c, d, .. } => {
                let z = Complex64::new(x[0], x[1]);
                (c * z + d).norm_sqr().ln()
            }
            FastGen::So { d, m } => {
                let dd = *d;
                let norm_sq: f64 = x.iter().map(|t| t * t).sum();
                let mut v = vec![0.0; dd];
                for (i, t) in x.iter().enumerate() {
                    v[i] = 2.0 * t;
                }
                v[dd - 2] = norm_sq - 1.0;
                v[dd - 1] = norm_sq + 1.0;
                let wl: f64 = m[(dd - 1) * dd..dd * dd]
                    .iter()
                    .zip(&v)
                    .map(|(p, q)| p * q)
                    .sum();
                let wp: f64 = m[(dd - 2) * dd..(dd - 1) * dd]
                    .iter()
                    .zip(&v)
                    .map(|(p, q)| p * q)
                    .sum();
                ((wl - wp) / 2.0).ln()
            }
        }
    }
}

/// One tower level: admissible words of `len` symbols with anchors and
/// telescoped Birkhoff sums at the anchors.
pub struct TowerLevel {
    pub len: usize,
    /// Sorted word codes (base N, first symbol least significant); None
    /// when the shift is full and codes are the contiguous range.
    pub codes: Option<Vec<u64>>,
    pub count: usize,
    /// Anchors, `dim` coordinates per word.
    pub anchors: Vec<f64>,
    /// τ(x_w) (first-step distortion at the anchor).
    pub tau_head: Vec<f64>,
    /// τ_len(x_w) (full Birkhoff sum at the anchor).
    pub tau_sum: Vec<f64>,
}

impl TowerLevel {
    pub fn index_of(&self, code: u64) -> Option<usize> {
        match &self.codes {
            None => {
                let i = code as usize;
                (i < self.count).then_some(i)
            }
            Some(c) => c.binary_search(&code).ok(),
        }
    }

    pub fn code_at(&self, idx: usize) -> u64 {
        match &self.codes {
            None => idx as u64,
            Some(c) => c[idx],
        }
    }
}

/// Cylinder tower up to a fixed depth (depth = symbols per word).
pub struct CylinderTower {
    pub dim: usize,
    pub n_symbols: usize,
    pub full_shift: bool,
    pub levels: Vec<TowerLevel>,
}

const TOWER_CAP: usize = 2_500_000;

impl CylinderTower {
    pub fn build(spec: &SemigroupSpec, depth: usize) -> Result<Self> {
        if depth < 1 {
            return Err(Error::domain("tower depth must be ≥ 1"));
        }
        let n = spec.n_symbols();
        let dim = match spec {
            SemigroupSpec::Cf(_) => 2,
            SemigroupSpec::Schottky(d) => d.n - 1,
        };
        let full_shift = (0..n).all(|i| (0..n).all(|j| spec.is_admissible_pair(i, j)));
        let gens: Vec<FastGen> = spec.generators().iter().map(FastGen::new).collect();

        // level 1: anchors are the attracting fixed points ω(y)
        let mut anchors1 = vec![0.0; n * dim];
        let mut tau1 = vec![0.0; n];
        for (y, gen) in gens.iter().enumerate() {
            let a = crate::dynamics::omega_anchor(spec, y)?;
            let v = match a {
                BoundaryPoint::Finite(v) => v,
                BoundaryPoint::Infinity => return Err(Error::numeric("anchor at ∞")),
            };
            anchors1[y * dim..(y + 1) * dim].copy_from_slice(&v[..dim]);
            tau1[y] = gen.neg_log_deriv(&v[..dim]);
        }
        let mut levels = vec![TowerLevel {
            len: 1,
            codes: if full_shift {
                None
            } else {
                Some((0..n as u64).collect())
            },
            count: n,
            anchors: anchors1,
            tau_head: tau1.clone(),
            tau_sum: tau1,
        }];

        for len in 2..=depth {
            let prev = &levels[len - 2];
            let mut codes = Vec::new();
            let mut anchors = Vec::new();
            let mut tau_head = Vec::new();
            let mut tau_sum = Vec::new();
            let mut buf = vec![0.0; dim];
            // extend on the left: new word (j, old word)
            for old_idx in 0..prev.count {
                let old_code = prev.code_at(old_idx);
                let first_old = (old_code % n as u64) as usize;
                let old_anchor = &prev.anchors[old_idx * dim..(old_idx + 1) * dim];
                for (j, gen) in gens.iter().enumerate() {
                    if !spec.is_admissible_pair(j, first_old) {
                        continue;
                    }
                    let code = j as u64 + (n as u64) * old_code;
                    gen.apply(old_anchor, &mut buf);
                    let t = gen.neg_log_deriv(old_anchor);
                    codes.push(code);
                    anchors.extend_from_slice(&buf);
                    tau_head.push(t);
                    tau_sum.push(t + prev.tau_sum[old_idx]);
                }
            }
            if codes.len() > TOWER_CAP {
                return Err(Error::resource(format!(
                    "cylinder tower level {len} has {} words (cap {TOWER_CAP})",
                    codes.len()
                )));
            }
            let mut order: Vec<usize> = (0..codes.len()).collect();
            order.sort_by_key(|&i| codes[i]);
            let codes_sorted: Vec<u64> = order.iter().map(|&i| codes[i]).collect();
            let mut anchors_sorted = vec![0.0; anchors.len()];
            let mut tau_head_sorted = vec![0.0; tau_head.len()];
            let mut tau_sum_sorted = vec![0.0; tau_sum.len()];
            for (new_i, &i) in order.iter().enumerate() {
                anchors_sorted[new_i * dim..(new_i + 1) * dim]
                    .copy_from_slice(&anchors[i * dim..(i + 1) * dim]);
                tau_head_sorted[new_i] = tau_head[i];
                tau_sum_sorted[new_i] = tau_sum[i];
            }
            let count = codes_sorted.len();
            levels.push(TowerLevel {
                len,
                codes: if full_shift { None } else { Some(codes_sorted) },
                count,
                anchors: anchors_sorted,
                tau_head: tau_head_sorted,
                tau_sum: tau_sum_sorted,
            });
        }
        Ok(CylinderTower {
            dim,
            n_symbols: n,
            full_shift,
            levels,
        })
    }

    pub fn top(&self) -> &TowerLevel {
        self.levels.last().unwrap()
    }
}

/// Depth-k cylinder matrix for L_s: sparsity is the subshift refinement
/// structure, weights e^{−s·τ(x_{C′})} per source cylinder.
pub struct DiscretizedOperator {
    pub depth: usize,
    pub n_cyl: usize,
    pub s_param: f64,
    /// CSR branches: row C lists the indices of its refinements C′.
    pub row_ptr: Vec<u32>,
    pub branch_idx: Vec<u32>,
    /// e^{−s·τ(x_C)} per cylinder (column weight).
    pub weights: Vec<f64>,
    /// τ(x_C) per cylinder, kept for re-weighting at other s.
    pub tau: Vec<f64>,
    /// Strong connectivity of the symbol graph.
    pub irreducible: bool,
}

fn symbol_graph_strongly_connected(spec: &SemigroupSpec) -> bool {
    let n = spec.n_symbols();
    let reach = |transpose: bool| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let edge = if transpose {
                    spec.is_admissible_pair(j, i)
                } else {
                    spec.is_admissible_pair(i, j)
                };
                if edge && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    };
    reach(false).iter().all(|&b| b) && reach(true).iter().all(|&b| b)
}

/// Build the depth-k discretized operator at parameter s from a tower whose
/// top level has k symbols per word.
pub fn build_operator(
    spec: &SemigroupSpec,
    tower: &CylinderTower,
    s: f64,
) -> Result<DiscretizedOperator> {
    let level = tower.top();
    let n = tower.n_symbols as u64;
    let k = level.len;
    let n_cyl = level.count;
    let prefix_mod = n.pow(k as u32 - 1).max(1);
    let mut row_ptr = Vec::with_capacity(n_cyl + 1);
    let mut branch_idx = Vec::new();
    row_ptr.push(0u32);
    for idx in 0..n_cyl {
        let code = level.code_at(idx);
        let first = (code % n) as usize;
        let prefix = code % prefix_mod;
        for j in 0..tower.n_symbols {
            if !spec.is_admissible_pair(j, first) {
                continue;
            }
            let c_prime = j as u64 + n * prefix;
            let b = level
                .index_of(c_prime)
                .ok_or_else(|| Error::numeric("missing refinement cylinder"))?;
            branch_idx.push(b as u32);
        }
        row_ptr.push(branch_idx.len() as u32);
    }
    let weights = level.tau_head.iter().map(|t| (-s * t).exp()).collect();
    Ok(DiscretizedOperator {
        depth: k,
        n_cyl,
        s_param: s,
        row_ptr,
        branch_idx,
        weights,
        tau: level.tau_head.clone(),
        irreducible: symbol_graph_strongly_connected(spec),
    })
}

impl DiscretizedOperator {
    /// Re-weight in place for a new parameter s.
    pub fn set_param(&mut self, s: f64) {
        self.s_param = s;
        for (w, t) in self.weights.iter_mut().zip(&self.tau) {
            *w = (-s * t).exp();
        }
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for c in 0..self.n_cyl {
            let lo = self.row_ptr[c] as usize;
            let hi = self.row_ptr[c + 1] as usize;
            let mut acc = 0.0;
            for &b in &self.branch_idx[lo..hi] {
                let b = b as usize;
                acc += self.weights[b] * v[b];
            }
            out[c] = acc;
        }
    }

    pub fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for c in 0..self.n_cyl {
            let lo = self.row_ptr[c] as usize;
            let hi = self.row_ptr[c + 1] as usize;
            let vc = v[c];
            for &b in &self.branch_idx[lo..hi] {
                let b = b as usize;
                out[b] += self.weights[b] * vc;
            }
        }
    }
}

/// Leading eigendata of the discretized operator.
#[derive(Clone, Debug, Serialize)]
pub struct RpfData {
    pub lambda: f64,
    /// Positive right eigenvector on cylinders.
    pub h: Vec<f64>,
    /// Probability left eigenvector on cylinders, ν(h) = 1.
    pub nu: Vec<f64>,
    pub iterations: usize,
    /// Ratio estimate |λ₂|/λ₁ from the residual decay.
    pub gap_ratio: f64,
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: usize = 100_000;

fn power_iterate(op: &DiscretizedOperator, transpose: bool) -> Result<(f64, Vec<f64>, usize, f64)> {
    let n = op.n_cyl;
    let mut v = vec![1.0 / n as f64; n];
    let mut w = vec![0.0; n];
    let mut lambda = 0.0f64;
    let mut prev_residual = f64::INFINITY;
    let mut gap_ratio = 0.0f64;
    for it in 1..=POWER_MAX_ITERS {
        if transpose {
            op.apply_transpose(&v, &mut w);
        } else {
            op.apply(&v, &mut w);
        }
        let norm: f64 = w.iter().map(|x| x.abs()).sum();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::numeric("power iteration collapsed"));
        }
        let new_lambda = norm / v.iter().map(|x| x.abs()).sum::<f64>();
        for x in w.iter_mut() {
            *x /= norm;
        }
        let residual: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum::<f64>();
        std::mem::swap(&mut v, &mut w);
        if residual > 0.0 && prev_residual.is_finite() && prev_residual > 0.0 {
            gap_ratio = residual / prev_residual;
        }
        prev_residual = residual;
        if (new_lambda - lambda).abs() <= POWER_TOL * new_lambda.max(1e-300) && residual < 1e-13 {
            return Ok((new_lambda, v, it, gap_ratio));
        }
        lambda = new_lambda;
    }
    Err(Error::numeric(format!(
        "power iteration did not converge in {POWER_MAX_ITERS} iterations"
    )))
}

/// RPF data by power iteration: λ with positive right eigenvector h and
/// probability left eigenvector ν, normalized so ν(h) = 1.
pub fn leading_eigen(op: &DiscretizedOperator) -> Result<RpfData> {
    if !op.irreducible {
        return Err(Error::domain("transition graph is not strongly connected"));
    }
    let (lambda, mut h, it_r, gap_r) = power_iterate(op, false)?;
    let (lambda_l, mut nu, it_l, gap_l) = power_iterate(op, true)?;
    if (lambda - lambda_l).abs() > 1e-8 * lambda.max(1e-300) {
        return Err(Error::numeric(format!(
            "left/right eigenvalues disagree: {lambda} vs {lambda_l}"
        )));
    }
    let nu_sum: f64 = nu.iter().sum();
    for x in nu.iter_mut() {
        *x /= nu_sum;
    }
    let pairing: f64 = nu.iter().zip(&h).map(|(a, b)| a * b).sum();
    for x in h.iter_mut() {
        *x /= pairing;
    }
    Ok(RpfData {
        lambda,
        h,
        nu,
        iterations: it_r + it_l,
        gap_ratio: gap_r.max(gap_l),
    })
}

/// Pressure at parameter s and tower depth: log of the leading eigenvalue.
pub fn pressure(spec: &SemigroupSpec, s: f64, depth: usize) -> Result<f64> {
    let tower = CylinderTower::build(spec, depth)?;
    let op = build_operator(spec, &tower, s)?;
    Ok(leading_eigen(&op)?.lambda.ln())
}

#[derive(Clone, Debug, Serialize)]
pub struct BowenResult {
    pub delta_hat: f64,
    /// Bisection roots per tower depth, shallow to deep.
    pub delta_by_depth: Vec<(usize, f64)>,
    pub error_estimate: f64,
    pub tolerance: f64,
}

fn bisect_root(
    spec: &SemigroupSpec,
    tower: &CylinderTower,
    tol: f64,
    hint: Option<(f64, f64)>,
) -> Result<f64> {
    let mut op = build_operator(spec, tower, 0.0)?;
    let press = |op: &mut DiscretizedOperator, s: f64| -> Result<f64> {
        op.set_param(s);
        Ok(leading_eigen(op)?.lambda.ln())
    };
    let (mut lo, mut hi) = match hint {
        Some((a, b)) => (a.max(0.0), b),
        None => (0.0, 1.0),
    };
    let mut p_lo = press(&mut op, lo)?;
    while p_lo <= 0.0 && lo > 0.0 {
        lo = (lo - 0.25).max(0.0);
        p_lo = press(&mut op, lo)?;
    }
    if p_lo <= 0.0 {
        return Err(Error::numeric("pressure non-positive at s = 0"));
    }
    let mut p_hi = press(&mut op, hi)?;
    let mut widen = 0;
    while p_hi >= 0.0 {
        widen += 1;
        if widen > 16 {
            return Err(Error::numeric("failed to bracket the Bowen root"));
        }
        hi *= 2.0;
        p_hi = press(&mut op, hi)?;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = press(&mut op, mid)?;
        if p.abs() < tol {
            return Ok(mid);
        }
        if p > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bowen root: bisection of s ↦ Pr(−sτ) at the working depth and two
/// shallower depths, Aitken-extrapolated; the error estimate combines the
/// extrapolation step and the bisection tolerance.
pub fn bowen_delta(spec: &SemigroupSpec, tol: f64, depth: usize) -> Result<BowenResult> {
    if tol <= 0.0 {
        return Err(Error::domain("tolerance must be positive"));
    }
    let depth = depth.max(3);
    let depths: Vec<usize> = if depth >= 5 {
        vec![depth - 4, depth - 2, depth]
    } else {
        vec![depth - 2, depth]
    };
    let mut roots: Vec<(usize, f64)> = Vec::new();
    let mut hint: Option<(f64, f64)> = None;
    for &d in &depths {
        let tower = CylinderTower::build(spec, d)?;
        let root = bisect_root(spec, &tower, tol, hint)?;
        let margin = match roots.last() {
            Some(&(_, prev)) => (root - prev).abs().max(16.0 * tol) * 4.0,
            None => 0.05,
        };
        hint = Some(((root - margin).max(0.0), root + margin));
        roots.push((d, root));
    }
    let (delta_hat, err) = match roots.len() {
        3 => {
            let d0 = roots[0].1;
            let d1 = roots[1].1;
            let d2 = roots[2].1;
            let denom = (d2 - d1) - (d1 - d0);
            if denom.abs() > 1e-14 {
                let extr = d2 - (d2 - d1) * (d2 - d1) / denom;
                (extr, (extr - d2).abs() + tol)
            } else {
                (d2, (d2 - d1).abs() + tol)
            }
        }
        _ => {
            let d2 = roots.last().unwrap().1;
            let d1 = roots[roots.len() - 2].1;
            (d2, (d2 - d1).abs() + tol)
        }
    };
    Ok(BowenResult {
        delta_hat,
        delta_by_depth: roots,
        error_estimate: err,
        tolerance: tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsReport {
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub depth: usize,
    pub cylinders_scanned: usize,
}

/// Gibbs-property diagnostic: over all cylinders of length 1..depth, the
/// ratio ν(𝙲)·e^{δ̂·τ_k(x_𝙲)} with ν the left RPF eigenvector at s = δ̂
/// discretized at `depth`; returns (min, max) of the ratio.
pub fn gibbs_check(spec: &SemigroupSpec, delta_hat: f64, depth: usize) -> Result<GibbsReport> {
    let tower = CylinderTower::build(spec, depth)?;
    let op = build_operator(spec, &tower, delta_hat)?;
    let rpf = leading_eigen(&op)?;
    let n = tower.n_symbols as u64;
    let top = tower.top();
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    let mut scanned = 0usize;
    for level in &tower.levels {
        let j = level.len;
        let modulus = n.pow(j as u32);
        let mut mass = vec![0.0f64; level.count];
        for idx in 0..top.count {
            let code = top.code_at(idx) % modulus;
            let li = level
                .index_of(code)
                .ok_or_else(|| Error::numeric("prefix cylinder missing"))?;
            mass[li] += rpf.nu[idx];
        }
        for (li, m) in mass.iter().enumerate() {
            let ratio = m * (delta_hat * level.tau_sum[li]).exp();
            scanned += 1;
            if ratio < c1 {
                c1 = ratio;
            }
            if ratio > c2 {
                c2 = ratio;
            }
        }
    }
    if !(c1.is_finite() && c2.is_finite() && c1 > 0.0) {
        return Err(Error::numeric("degenerate Gibbs ratios"));
    }
    Ok(GibbsReport {
        c1_hat: c1,
        c2_hat: c2,
        depth,
        cylinders_scanned: scanned,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub modulus: String,
    pub group_order: usize,
    pub xi: (f64, f64),
    pub depth: usize,
    pub trials: usize,
    /// Sup norm (over cylinders; ℓ² over the group) per iterate, max across
    /// trials; index 0 is the initial norm.
    pub norms: Vec<f64>,
    /// Fitted decay rate η̂ (−slope of log norm against k).
    pub eta_hat: f64,
    /// Same probe applied to a constant-in-group vector (no-decay control).
    pub control_norms: Vec<f64>,
}

/// Congruence spectral decay probe for M_{ξ,q} on the normalized cylinder
/// discretization: iterates k_max steps on `trials` seeded random mean-zero
/// (in the group coordinate) vectors and fits the decay rate of the norms.
///
/// The twist acts by the right regular representation: the group coordinate
/// is permuted by g ↦ g·π_q(g_j) along a branch with symbol j, composed
/// with the scalar (complex for b ≠ 0) weight.
#[allow(clippy::too_many_arguments)]
pub fn congruence_decay_probe(
    spec: &SemigroupSpec,
    group: &QuotientGroup,
    delta_hat: f64,
    xi: (f64, f64),
    depth: usize,
    k_max: usize,
    trials: usize,
    seed: u64,
) -> Result<DecayReport> {
    let g_ord = group.order();
    let tower = CylinderTower::build(spec, depth)?;
    let op0 = build_operator(spec, &tower, delta_hat)?;
    let n_cyl = op0.n_cyl;
    if n_cyl.saturating_mul(g_ord) > 50_000_000 {
        return Err(Error::resource("cylinders × group order too large"));
    }
    let (a, b) = xi;
    let rpf0 = leading_eigen(&op0)?;
    let lambda_a = if a == 0.0 {
        rpf0.lambda
    } else {
        let op_a = build_operator(spec, &tower, delta_hat + a)?;
        leading_eigen(&op_a)?.lambda
    };
    // per-branch complex weight
    // Ŵ[C,b] = e^{−(δ+a)τ(x_{C′})}·h₀[C′]/(λ_a·h₀[C])·e^{−i b τ(x_{C′})}
    let level = tower.top();
    let mut branch_w = Vec::with_capacity(op0.branch_idx.len());
    for c in 0..n_cyl {
        let lo = op0.row_ptr[c] as usize;
        let hi = op0.row_ptr[c + 1] as usize;
        for &bb in &op0.branch_idx[lo..hi] {
            let bp = bb as usize;
            let t = level.tau_head[bp];
            let mag = (-(delta_hat + a) * t).exp() * rpf0.h[bp] / (lambda_a * rpf0.h[c]);
            branch_w.push(Complex64::from_polar(mag, -b * t));
        }
    }
    let perms: Vec<Vec<u32>> = (0..spec.n_symbols())
        .map(|j| group.right_multiplication_perm(spec.generator(j)))
        .collect::<Result<_>>()?;
    let n_u64 = tower.n_symbols as u64;
    let branch_sym: Vec<u8> = op0
        .branch_idx
        .iter()
        .map(|&bb| (level.code_at(bb as usize) % n_u64) as u8)
        .collect();

    let sup_norm = |h: &[Complex64]| -> f64 {
        let mut best = 0.0f64;
        for c in 0..n_cyl {
            let s: f64 = h[c * g_ord..(c + 1) * g_ord]
                .iter()
                .map(|z| z.norm_sqr())
                .sum();
            best = best.max(s.sqrt());
        }
        best
    };

    let iterate = |h: &mut Vec<Complex64>| -> Vec<f64> {
        let mut out = vec![Complex64::new(0.0, 0.0); h.len()];
        let mut norms = vec![sup_norm(h)];
        for _ in 0..k_max {
            out.fill(Complex64::new(0.0, 0.0));
            for c in 0..n_cyl {
                let lo = op0.row_ptr[c] as usize;
                let hi = op0.row_ptr[c + 1] as usize;
                for t in lo..hi {
                    let bp = op0.branch_idx[t] as usize;
                    let w = branch_w[t];
                    let perm = &perms[branch_sym[t] as usize];
                    let dst_base = c * g_ord;
                    let src_base = bp * g_ord;
                    for g in 0..g_ord {
                        out[dst_base + g] += w * h[src_base + perm[g] as usize];
                    }
                }
            }
            std::mem::swap(h, &mut out);
            norms.push(sup_norm(h));
        }
        norms
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agg: Vec<f64> = vec![0.0; k_max + 1];
    for _ in 0..trials.max(1) {
        let mut h: Vec<Complex64> = (0..n_cyl * g_ord)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        for c in 0..n_cyl {
            let chunk = &mut h[c * g_ord..(c + 1) * g_ord];
            let mean: Complex64 = chunk.iter().sum::<Complex64>() / g_ord as f64;
            for z in chunk.iter_mut() {
                *z -= mean;
            }
        }
        let norms = iterate(&mut h);
        for (aggval, n) in agg.iter_mut().zip(&norms) {
            *aggval = aggval.max(*n);
        }
    }
    let mut control: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); n_cyl * g_ord];
    let control_norms = iterate(&mut control);

    let k0 = 1.min(k_max);
    let pts: Vec<(f64, f64)> = (k0..=k_max)
        .filter(|&k| agg[k] > 0.0)
        .map(|k| (k as f64, agg[k].ln()))
        .collect();
    let eta_hat = if pts.len() >= 2 {
        -least_squares_slope(&pts)
    } else {
        0.0
    };
    Ok(DecayReport {
        modulus: group.modulus_label(),
        group_order: g_ord,
        xi,
        depth,
        trials,
        norms: agg,
        eta_hat,
        control_norms,
    })
}

/// Slope of the least-squares line through (x, y) points.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
