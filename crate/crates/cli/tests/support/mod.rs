//! Independent oracles for the acceptance suite. These deliberately avoid
//! the implementation paths they check: the cover-dimension oracle uses
//! only endpoint images of the base interval under raw 2×2 float matrices
//! (no conformal derivatives, no eigensolves), and the Zaremba oracle runs
//! the per-denominator Euclid digit check.

use congcount::{GroupElement, SemigroupSpec};

/// Raw float entries of an SL₂ generator (real CF setting).
fn entries_f64(g: &GroupElement) -> [f64; 4] {
    match g {
        GroupElement::Sl2 { m, .. } => {
            let c = |x: &congcount::GaussInt| x.to_f64().0;
            [c(&m[0]), c(&m[1]), c(&m[2]), c(&m[3])]
        }
        _ => panic!("expected SL₂ generators"),
    }
}

/// Box-counting (natural cover) dimension of the limit set of a real CF
/// spec: the root s of Σ_{|w|=k} diam(C_w)^s = Σ_{|w|=k−1} diam(C_w)^s,
/// where diameters come from endpoint images of the base interval [0, 1].
/// The ratio form cancels the bounded-distortion constant, so the root
/// converges geometrically in k.
pub fn cover_dimension_oracle(spec: &SemigroupSpec, depth: usize) -> f64 {
    let gens: Vec<[f64; 4]> = spec.generators().iter().map(entries_f64).collect();
    let n = gens.len();
    let apply = |m: &[f64; 4], x: f64| (m[0] * x + m[1]) / (m[2] * x + m[3]);
    // level arrays of (left endpoint, right endpoint) per word, codes with
    // first symbol least significant
    let mut level: Vec<(f64, f64)> = gens.iter().map(|m| (apply(m, 0.0), apply(m, 1.0))).collect();
    let mut prev_diams: Vec<f64> = Vec::new();
    for _len in 2..=depth {
        prev_diams = level.iter().map(|(a, b)| (a - b).abs()).collect();
        let mut next = Vec::with_capacity(level.len() * n);
        // new word (j, old): endpoints are g_j images of the old endpoints
        for &(a, b) in &level {
            for m in &gens {
                next.push((apply(m, a), apply(m, b)));
            }
        }
        level = next;
    }
    let diams: Vec<f64> = level.iter().map(|(a, b)| (a - b).abs()).collect();
    // bisection on s: log(Σ_k d^s) − log(Σ_{k−1} d^s) is decreasing in s
    let f = |s: f64| -> f64 {
        let top: f64 = diams.iter().map(|d| d.powf(s)).sum();
        let bot: f64 = prev_diams.iter().map(|d| d.powf(s)).sum();
        top.ln() - bot.ln()
    };
    let (mut lo, mut hi) = (0.05f64, 0.99f64);
    assert!(f(lo) > 0.0 && f(hi) < 0.0, "oracle root not bracketed");
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-denominator brute-force Zaremba oracle over ℕ: for each d ≤ bound,
/// scan coprime numerators and test both finite continued-fraction
/// representations against the allowed digit set.
pub fn zaremba_euclid_oracle(allowed: &[i64], bound: i64) -> std::collections::BTreeSet<i64> {
    let allowed: std::collections::BTreeSet<i64> = allowed.iter().copied().collect();
    let mut out = std::collections::BTreeSet::new();
    for d in 1..=bound {
        'bs: for b in 1..=d {
            if gcd(b, d) != 1 {
                continue;
            }
            let mut digits = Vec::new();
            let (mut num, mut den) = (b, d);
            while num != 0 {
                digits.push(den / num);
                let r = den % num;
                den = num;
                num = r;
            }
            // [a₁..a_k] and its twin [a₁..a_k−1, 1] / [a₁..a_{k−1}+1]
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
                    out.insert(d);
                    break 'bs;
                }
            }
        }
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
