//! Command implementations. Every command reads the validated RunConfig,
//! computes deterministically (given the seed), writes CSV artifacts and a
//! versioned JSON summary into the output directory, and prints one
//! summary line.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{RngExt, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use congcount::arith::GaussInt;
use congcount::congruence::{
    cayley_gap, cyclic_group_control, quotient_group, return_trajectory_set,
    trace_case_element, trace_case_formula, trace_field_witness, zariski_density_probe,
    GapReport, QuotientGroup,
};
use congcount::counting::{
    ball_count, equidistribution_report, exponent_fit, geometric_rsq_schedule,
    orbital_renewal_check, renewal_check, zaremba_density, zaremba_sets, LimitPoint,
    TestFunction,
};
use congcount::dynamics::{
    cf_expansion_upper, distortion, lnic_probe, min_expansion, sample_limit_points,
};
use congcount::report::{
    decay_csv, equidistribution_csv, fmt_f64, gap_csv, ledger_csv, pressure_curve_csv,
};
use congcount::semigroup::{find_trim_epsilon, validate_ping_pong, SemigroupSpec};
use congcount::thermo::{bowen_delta, congruence_decay_probe, pressure};
use congcount::{Error, Result, Word};

use crate::config::{RunConfig, SCHEMA_VERSION};

fn load_spec(cfg: &RunConfig) -> Result<SemigroupSpec> {
    let path = cfg.spec_file();
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::config(format!("cannot read spec {}: {e}", path.display())))?;
    SemigroupSpec::from_json(&text)
}

fn write_out(out_dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::config(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    fs::write(&path, content)
        .map_err(|e| Error::config(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::config(format!("serialize: {e}")))?;
    write_out(out_dir, name, &(text + "\n"))
}

fn gauss(q: [i64; 2]) -> GaussInt {
    GaussInt::new(q[0], q[1])
}

fn q_label(q: [i64; 2]) -> String {
    format!("{}", gauss(q))
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::config("this command randomizes; --seed is mandatory"))
}

// ---------------------------------------------------------------------------
// validate

#[derive(Serialize)]
struct ValidateSummary {
    schema_version: u32,
    command: &'static str,
    setting: String,
    ok: bool,
    checks: usize,
    violations: Vec<String>,
    epsilon: Option<f64>,
}

pub fn cmd_validate(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = load_spec(cfg)?;
    let report = validate_ping_pong(&spec);
    let (setting, epsilon) = match &spec {
        SemigroupSpec::Cf(d) => ("cf".to_string(), Some(congcount::arith::ratio_to_f64(&d.epsilon))),
        SemigroupSpec::Schottky(_) => ("schottky".to_string(), None),
    };
    let summary = ValidateSummary {
        schema_version: SCHEMA_VERSION,
        command: "validate",
        setting,
        ok: report.ok,
        checks: report.checks,
        violations: report.violations.clone(),
        epsilon,
    };
    write_json(out_dir, "validate_summary.json", &summary)?;
    println!(
        "validate: {} ({} checks{})",
        if report.ok { "pass" } else { "FAIL" },
        report.checks,
        if report.ok {
            String::new()
        } else {
            format!(", {} violations", report.violations.len())
        }
    );
    for v in &report.violations {
        println!("  violation: {v}");
    }
    Ok(if report.ok { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// delta

#[derive(Serialize)]
struct DeltaSummary {
    schema_version: u32,
    command: &'static str,
    delta_hat: f64,
    delta_by_depth: Vec<(usize, f64)>,
    error_estimate: f64,
    tolerance: f64,
}

pub fn cmd_delta(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = load_spec(cfg)?;
    let res = bowen_delta(&spec, cfg.delta.tolerance, cfg.delta.depth)?;
    // pressure curve on a fixed grid for plotting
    let mut curve = Vec::new();
    let smax = (res.delta_hat * 2.0).max(1.0);
    for i in 0..cfg.delta.curve_points {
        let s = smax * i as f64 / (cfg.delta.curve_points.max(2) - 1) as f64;
        curve.push((s, pressure(&spec, s, cfg.delta.curve_depth)?));
    }
    write_out(out_dir, "pressure_curve.csv", &pressure_curve_csv(&curve))?;
    let summary = DeltaSummary {
        schema_version: SCHEMA_VERSION,
        command: "delta",
        delta_hat: res.delta_hat,
        delta_by_depth: res.delta_by_depth.clone(),
        error_estimate: res.error_estimate,
        tolerance: res.tolerance,
    };
    write_json(out_dir, "delta_summary.json", &summary)?;
    println!(
        "delta: δ̂ = {} ± {}",
        fmt_f64(res.delta_hat),
        fmt_f64(res.error_estimate)
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// count

#[derive(Serialize)]
struct CountPerModulus {
    q: String,
    group_order: usize,
    /// None when too few populated checkpoints support a fit (e.g. a
    /// partial ledger after budget exhaustion).
    slope: Option<f64>,
    /// Two-standard-error band of the slope.
    slope_ci: Option<[f64; 2]>,
    attained_classes: usize,
    /// (R, TV-from-uniform over attained classes) per checkpoint; empty
    /// for a trivial modulus.
    tv_by_r: Vec<[f64; 2]>,
    words_emitted: u64,
    complete: bool,
}

#[derive(Serialize)]
struct CountSummary {
    schema_version: u32,
    command: &'static str,
    r0: f64,
    checkpoints: usize,
    budget: u64,
    per_modulus: Vec<CountPerModulus>,
}

pub fn cmd_count(cfg: &RunConfig, out_dir: &Path, budget_override: Option<u64>) -> Result<i32> {
    let spec = load_spec(cfg)?;
    let c = &cfg.count;
    let budget = budget_override.unwrap_or(c.budget);
    let r0 = BigRational::from_float(c.r0)
        .ok_or_else(|| Error::config("non-finite r0"))?;
    let schedule = geometric_rsq_schedule(&r0, c.checkpoints);
    let f = TestFunction {
        entries: c
            .f_entries
            .iter()
            .map(|(w, v)| (Word(w.clone()), *v))
            .collect(),
        default: c.f_default,
    };
    let gamma0 = Word(c.gamma0_word.clone());
    // independent per-modulus work runs in parallel; ordered collection
    // keeps outputs identical for any thread cap
    let computed = c
        .q
        .par_iter()
        .map(|&q| {
            let group = quotient_group(&spec, &gauss(q), c.group_cap)?;
            let ledger = ball_count(&spec, &group, &gamma0, &schedule, &f, Some(budget))?;
            let fit = exponent_fit(&ledger).ok();
            let equid = equidistribution_report(&ledger).ok();
            Ok((q, group.order(), ledger, fit, equid))
        })
        .collect::<congcount::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut any_partial = false;
    for (q, group_order, ledger, fit, equid) in computed {
        let label = q_label(q);
        write_out(out_dir, &format!("count_q{label}.csv"), &ledger_csv(&ledger))?;
        let (tv_by_r, attained_final) = match &equid {
            Some(rows) => {
                write_out(
                    out_dir,
                    &format!("equidistribution_q{label}.csv"),
                    &equidistribution_csv(rows),
                )?;
                (
                    rows.iter().map(|r| [r.radius, r.tv_attained]).collect(),
                    rows.last().map(|r| r.attained_classes).unwrap_or(0),
                )
            }
            None => (Vec::new(), 0), // trivial modulus
        };
        if !ledger.complete {
            any_partial = true;
            println!("count: warning: budget exhausted at q = {label}; ledger partial");
        }
        rows.push(CountPerModulus {
            q: label,
            group_order,
            slope: fit.as_ref().map(|f| f.slope),
            slope_ci: fit
                .as_ref()
                .map(|f| [f.slope - 2.0 * f.slope_stderr, f.slope + 2.0 * f.slope_stderr]),
            attained_classes: attained_final,
            tv_by_r,
            words_emitted: ledger.words_emitted,
            complete: ledger.complete,
        });
    }
    let summary = CountSummary {
        schema_version: SCHEMA_VERSION,
        command: "count",
        r0: c.r0,
        checkpoints: c.checkpoints,
        budget,
        per_modulus: rows,
    };
    write_json(out_dir, "count_summary.json", &summary)?;
    for row in &summary.per_modulus {
        println!(
            "count: q = {} slope = {} tv_final = {}{}",
            row.q,
            row.slope.map(fmt_f64).unwrap_or_else(|| "n/a".into()),
            row.tv_by_r
                .last()
                .map(|t| fmt_f64(t[1]))
                .unwrap_or_else(|| "n/a".into()),
            if row.complete { "" } else { " (partial)" }
        );
    }
    let _ = any_partial;
    Ok(0)
}

// ---------------------------------------------------------------------------
// spectral

#[derive(Serialize)]
struct SpectralPerModulus {
    q: String,
    group_order: usize,
    eta_hat: f64,
    final_norm: f64,
    control_final_over_initial: f64,
}

#[derive(Serialize)]
struct SpectralSummary {
    schema_version: u32,
    command: &'static str,
    xi: [f64; 2],
    depth: usize,
    k_max: usize,
    trials: usize,
    seed: u64,
    delta_hat: f64,
    per_modulus: Vec<SpectralPerModulus>,
}

pub fn cmd_spectral(cfg: &RunConfig, out_dir: &Path, seed: Option<u64>) -> Result<i32> {
    let seed = require_seed(seed)?;
    let spec = load_spec(cfg)?;
    let sc = &cfg.spectral;
    let delta = bowen_delta(&spec, sc.delta_tolerance, sc.delta_depth)?.delta_hat;
    let reps = sc
        .q
        .par_iter()
        .map(|&q| {
            let group = quotient_group(&spec, &gauss(q), sc.group_cap)?;
            let rep = congruence_decay_probe(
                &spec,
                &group,
                delta,
                (sc.xi[0], sc.xi[1]),
                sc.depth,
                sc.k_max,
                sc.trials,
                seed,
            )?;
            Ok((q, rep))
        })
        .collect::<congcount::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (q, rep) in reps {
        let label = q_label(q);
        write_out(out_dir, &format!("decay_q{label}.csv"), &decay_csv(&rep))?;
        rows.push(SpectralPerModulus {
            q: label,
            group_order: rep.group_order,
            eta_hat: rep.eta_hat,
            final_norm: *rep.norms.last().unwrap_or(&f64::NAN),
            control_final_over_initial: rep.control_norms.last().unwrap_or(&f64::NAN)
                / rep.control_norms.first().unwrap_or(&1.0),
        });
    }
    let summary = SpectralSummary {
        schema_version: SCHEMA_VERSION,
        command: "spectral",
        xi: sc.xi,
        depth: sc.depth,
        k_max: sc.k_max,
        trials: sc.trials,
        seed,
        delta_hat: delta,
        per_modulus: rows,
    };
    write_json(out_dir, "spectral_summary.json", &summary)?;
    for row in &summary.per_modulus {
        println!(
            "spectral: q = {} η̂ = {} control ratio = {}",
            row.q,
            fmt_f64(row.eta_hat),
            fmt_f64(row.control_final_over_initial)
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// expander

#[derive(Serialize)]
struct ExpanderRow {
    q: String,
    p: usize,
    group_order: usize,
    generating_set_size: usize,
    lambda2: f64,
    full_group_lambda2: f64,
    density_witnessed: Option<bool>,
    trace_field_case: Option<usize>,
}

#[derive(Serialize)]
struct ExpanderSummary {
    schema_version: u32,
    command: &'static str,
    y: usize,
    z: usize,
    cycle_control_n: i64,
    cycle_control_lambda2: f64,
    cycle_control_expected: f64,
    rows: Vec<ExpanderRow>,
}

pub fn cmd_expander(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = load_spec(cfg)?;
    let e = &cfg.expander;
    let witness_case = trace_field_witness(&spec).ok().map(|w| w.case);
    if let Ok(w) = trace_field_witness(&spec) {
        write_json(out_dir, "trace_witness.json", &w)?;
    }
    // per-modulus eigensolves are the heavy part; parallel with ordered
    // collection so outputs do not depend on the thread cap
    let per_q = e
        .q
        .par_iter()
        .map(|&q| {
            let group = quotient_group(&spec, &gauss(q), e.group_cap)?;
            let all = group.elements.clone();
            let full = cayley_gap(&group, &all, e.eigensolve_cap)?;
            let mut per_p = Vec::new();
            for &p in &e.p {
                let s = return_trajectory_set(&spec, p, e.y, e.z)?;
                let rep = cayley_gap(&group, &s, e.eigensolve_cap)?;
                let density = zariski_density_probe(&spec, p, e.y, e.z)?;
                per_p.push((p, rep, density));
            }
            Ok((q, full, per_p))
        })
        .collect::<congcount::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut gap_rows: Vec<GapReport> = Vec::new();
    for (q, full, per_p) in per_q {
        for (p, rep, density) in per_p {
            rows.push(ExpanderRow {
                q: q_label(q),
                p,
                group_order: rep.group_order,
                generating_set_size: rep.generating_set_size,
                lambda2: rep.lambda2,
                full_group_lambda2: full.lambda2,
                density_witnessed: density.density_witnessed,
                trace_field_case: witness_case,
            });
            gap_rows.push(rep);
        }
    }
    let (cycle_group, cycle_s) = cyclic_group_control(e.cycle_control)?;
    let cycle_rep = cayley_gap(&cycle_group, &cycle_s, e.eigensolve_cap)?;
    let cycle_expected = 1.0 - (2.0 * std::f64::consts::PI / e.cycle_control as f64).cos();
    write_out(out_dir, "gaps.csv", &gap_csv(&gap_rows))?;
    let summary = ExpanderSummary {
        schema_version: SCHEMA_VERSION,
        command: "expander",
        y: e.y,
        z: e.z,
        cycle_control_n: e.cycle_control,
        cycle_control_lambda2: cycle_rep.lambda2,
        cycle_control_expected: cycle_expected,
        rows,
    };
    write_json(out_dir, "expander_summary.json", &summary)?;
    for row in &summary.rows {
        println!(
            "expander: q = {} p = {} λ₂ = {} (full-group control {})",
            row.q,
            row.p,
            fmt_f64(row.lambda2),
            fmt_f64(row.full_group_lambda2)
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// zaremba

#[derive(Serialize)]
struct ZarembaSummary {
    schema_version: u32,
    command: &'static str,
    alphabet: Vec<[i64; 2]>,
    bound: u64,
    denominator_count: usize,
    density: Vec<(u64, u64, f64)>,
}

pub fn cmd_zaremba(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    let spec = load_spec(cfg)?;
    let alphabet = match &spec {
        SemigroupSpec::Cf(d) => d.alphabet.clone(),
        _ => {
            return Err(Error::domain(
                "zaremba denominators are a continued-fractions notion",
            ))
        }
    };
    let z = &cfg.zaremba;
    let sets = zaremba_sets(&alphabet, &BigInt::from(z.bound), z.collect_fractions)?;
    let mut csv = String::from("d_re,d_im\n");
    for (re, im) in &sets.denominators {
        csv.push_str(&format!("{re},{im}\n"));
    }
    write_out(out_dir, "denominators.csv", &csv)?;
    let real = alphabet.iter().all(|a| a.is_real());
    let mut density = Vec::new();
    if real {
        for &n in &z.density_n {
            let d = zaremba_density(&alphabet, n)?;
            density.push((n, d.hits, d.density));
        }
    }
    let summary = ZarembaSummary {
        schema_version: SCHEMA_VERSION,
        command: "zaremba",
        alphabet: alphabet
            .iter()
            .map(|a| {
                let (re, im) = a.to_f64();
                [re as i64, im as i64]
            })
            .collect(),
        bound: z.bound,
        denominator_count: sets.denominators.len(),
        density,
    };
    write_json(out_dir, "zaremba_summary.json", &summary)?;
    println!(
        "zaremba: {} denominators with N(d) ≤ {}",
        summary.denominator_count, summary.bound
    );
    for (n, hits, dens) in &summary.density {
        println!("zaremba: density at N = {n}: {hits}/{n} = {}", fmt_f64(*dens));
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify (exact identity suites)

#[derive(Serialize)]
struct SuiteResult {
    name: String,
    pass: bool,
    cases: usize,
    detail: String,
}

#[derive(Serialize)]
struct VerifySummary {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    suites: Vec<SuiteResult>,
    all_pass: bool,
}

fn suite_trace_cases(pairs: usize, rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut checked = 0usize;
    let mut pass = true;
    let mut detail = String::new();
    while checked < pairs {
        let a = GaussInt::new(rng.random_range(1..6i64), rng.random_range(-4..5i64));
        let b = GaussInt::new(rng.random_range(1..6i64), rng.random_range(-4..5i64));
        if a == b {
            continue;
        }
        for case in 1..=4usize {
            let f = trace_case_formula(case, &a, &b);
            let t = match trace_case_element(case, &a, &b) {
                Ok(e) => e.trace(),
                Err(e) => {
                    pass = false;
                    detail = format!("case {case} build failed: {e}");
                    break;
                }
            };
            if f != t {
                pass = false;
                detail = format!("case {case} mismatch at a={a}, b={b}");
            }
        }
        checked += 1;
    }
    SuiteResult {
        name: "trace_case_formulas_exact".into(),
        pass,
        cases: checked * 4,
        detail,
    }
}

fn suite_translation_length(pairs: usize, rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    while checked < pairs {
        let s = rng.random_range(0.2..1.4f64);
        let t = rng.random_range(0.2..1.4f64);
        let raw = [
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ];
        let det = raw[0] * raw[3] - raw[1] * raw[2];
        if det.norm() < 0.05 {
            continue;
        }
        let sq = det.sqrt();
        let qm = [raw[0] / sq, raw[1] / sq, raw[2] / sq, raw[3] / sq];
        // g = diag(e^s, e^{−s}), h = Q diag(e^t, e^{−t}) Q⁻¹
        let (es, emt) = (s.exp(), (-s).exp());
        let (et, emtt) = (t.exp(), (-t).exp());
        let (qa, qb, qc, qd) = (qm[0], qm[1], qm[2], qm[3]);
        // h entries
        let h00 = qa * et * qd - qb * emtt * qc;
        let h01 = -qa * et * qb + qb * emtt * qa;
        let h10 = qc * et * qd - qd * emtt * qc;
        let h11 = -qc * et * qb + qd * emtt * qa;
        // tr(gh) only needs the diagonal of the product
        let tr = es * h00 + emt * h11;
        let _ = (h01, h10);
        // LHS: (λ + 1/λ)/2 with ℓ = 2 log|λ| ≥ 0 — equal to tr/2 by
        // construction; the content is the closed form on the right.
        let disc = (tr * tr - 4.0).sqrt();
        let l1 = (tr + disc) / 2.0;
        let l2 = (tr - disc) / 2.0;
        let lam = if l1.norm() >= l2.norm() { l1 } else { l2 };
        let lhs = (lam + 1.0 / lam) / 2.0;
        let rhs = Complex64::new(s.cosh() * t.cosh(), 0.0)
            + (qa * qd + qb * qc) * s.sinh() * t.sinh();
        let err = (lhs - rhs).norm().min((lhs + rhs).norm());
        worst = worst.max(err);
        checked += 1;
    }
    SuiteResult {
        name: "complex_translation_length_lemma".into(),
        pass: worst < 1e-9,
        cases: checked,
        detail: format!("worst deviation {}", fmt_f64(worst)),
    }
}

fn suite_sandwich(spec: &SemigroupSpec, samples: usize, seed: u64) -> Result<SuiteResult> {
    let lo = min_expansion(spec);
    let hi = cf_expansion_upper(spec)
        .ok_or_else(|| Error::domain("hyperbolicity sandwich needs a CF spec"))?;
    let pts = sample_limit_points(spec, samples, 20, seed)?;
    let mut violations = 0usize;
    for p in &pts {
        let t = distortion(spec, p)?.exp();
        if !(t >= lo - 1e-9 && t <= hi + 1e-9) {
            violations += 1;
        }
    }
    Ok(SuiteResult {
        name: "hyperbolicity_sandwich".into(),
        pass: violations == 0,
        cases: pts.len(),
        detail: format!("bounds [{}, {}], {violations} violations", fmt_f64(lo), fmt_f64(hi)),
    })
}

fn suite_renewal(
    spec: &SemigroupSpec,
    group: &QuotientGroup,
    instances: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteResult> {
    let n = spec.n_symbols();
    let ord = group.order();
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for i in 0..instances {
        let phi: Vec<f64> = (0..ord).map(|_| rng.random_range(-1.0..1.0)).collect();
        // random admissible word of length 2 for u
        let w0 = rng.random_range(0..n);
        let mut w = vec![w0];
        loop {
            let s = rng.random_range(0..n);
            if spec.is_admissible_pair(*w.last().unwrap(), s) {
                w.push(s);
                break;
            }
        }
        let f = TestFunction {
            entries: vec![(Word(vec![rng.random_range(0..n)]), rng.random_range(0.5..2.0))],
            default: 1.0,
        };
        if i % 2 == 0 {
            let u = LimitPoint::new(spec, Word(w))?;
            let r = rng.random_range(0.3..4.0f64);
            let chk = renewal_check(spec, group, r, &u, &phi, &f, 1e-9)?;
            worst = worst.max(chk.max_discrepancy);
        } else {
            let r = rng.random_range(0.3..2.2f64);
            let gamma0 = Word(vec![w[0]]);
            let chk = orbital_renewal_check(spec, group, r, &gamma0, &phi, &f, 1e-9)?;
            worst = worst.max(chk.max_discrepancy);
        }
        cases += 1;
    }
    Ok(SuiteResult {
        name: format!("congruence_renewal_q{}", group.modulus_label()),
        pass: worst <= 1e-9,
        cases,
        detail: format!("max discrepancy {}", fmt_f64(worst)),
    })
}

pub fn cmd_verify(cfg: &RunConfig, out_dir: &Path, seed: Option<u64>) -> Result<i32> {
    let seed = require_seed(seed)?;
    let spec = load_spec(cfg)?;
    let v = &cfg.verify;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suites = Vec::new();
    suites.push(suite_trace_cases(v.trace_pairs, &mut rng));
    suites.push(suite_translation_length(v.translation_pairs, &mut rng));
    match suite_sandwich(&spec, v.sandwich_samples, seed ^ 0x5a5a) {
        Ok(s) => suites.push(s),
        Err(e) => suites.push(SuiteResult {
            name: "hyperbolicity_sandwich".into(),
            pass: false,
            cases: 0,
            detail: format!("{e}"),
        }),
    }
    for &q in &v.renewal_q {
        let group = quotient_group(&spec, &gauss(q), v.group_cap)?;
        suites.push(suite_renewal(&spec, &group, v.renewal_instances, &mut rng)?);
    }
    let all_pass = suites.iter().all(|s| s.pass);
    let summary = VerifySummary {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        seed,
        suites,
        all_pass,
    };
    write_json(out_dir, "verify_summary.json", &summary)?;
    for s in &summary.suites {
        println!(
            "verify: {} {} ({} cases; {})",
            s.name,
            if s.pass { "pass" } else { "FAIL" },
            s.cases,
            s.detail
        );
    }
    Ok(if all_pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// probe-lnic

#[derive(Serialize)]
struct LnicRow {
    m: usize,
    delta0_hat: f64,
    best_pair: (Vec<usize>, Vec<usize>),
    pairs_scanned: usize,
    samples: usize,
}

#[derive(Serialize)]
struct LnicSummary {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    rows: Vec<LnicRow>,
}

pub fn cmd_probe_lnic(cfg: &RunConfig, out_dir: &Path, seed: Option<u64>) -> Result<i32> {
    let seed = require_seed(seed)?;
    let spec = load_spec(cfg)?;
    let mut rows = Vec::new();
    for &m in &cfg.lnic.m {
        let rep = lnic_probe(&spec, m, cfg.lnic.samples, seed)?;
        rows.push(LnicRow {
            m,
            delta0_hat: rep.delta0_hat,
            best_pair: (rep.best_pair.0 .0.clone(), rep.best_pair.1 .0.clone()),
            pairs_scanned: rep.pairs_scanned,
            samples: rep.samples,
        });
    }
    let summary = LnicSummary {
        schema_version: SCHEMA_VERSION,
        command: "probe-lnic",
        seed,
        rows,
    };
    write_json(out_dir, "lnic_summary.json", &summary)?;
    for row in &summary.rows {
        println!(
            "probe-lnic: m = {} δ̂₀ = {} over {} section pairs",
            row.m,
            fmt_f64(row.delta0_hat),
            row.pairs_scanned
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// epsilon helper exposed through validate when the spec omits it

pub fn cmd_find_epsilon(cfg: &RunConfig) -> Result<i32> {
    let spec = load_spec(cfg)?;
    match spec {
        SemigroupSpec::Cf(d) => {
            let eps = find_trim_epsilon(&d.alphabet)?;
            println!("epsilon: {}", congcount::arith::ratio_to_f64(&eps));
            Ok(0)
        }
        _ => Err(Error::domain("trim epsilon applies to CF specs")),
    }
}
