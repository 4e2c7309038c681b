//! CSV and JSON emission helpers shared by the library and the CLI.
//!
//! CSV dialect: comma-separated, header row, LF line endings, UTF-8.
//! Floats are printed with 12 significant digits for cross-run diffing.

use crate::counting::{CountLedger, EquidistributionRow};
use crate::thermo::DecayReport;

/// 12 significant digits, locale-free.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.11e}")
}

pub fn ledger_csv(ledger: &CountLedger) -> String {
    let mut out = String::from("R,class_index,count,weighted_sum\n");
    for (j, r) in ledger.radii.iter().enumerate() {
        for c in 0..ledger.class_count {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(*r),
                c,
                ledger.counts[j][c],
                fmt_f64(ledger.weighted[j][c]),
            ));
        }
    }
    out
}

pub fn equidistribution_csv(rows: &[EquidistributionRow]) -> String {
    let mut out = String::from("R,total,attained_classes,tv_attained,tv_full\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.radius),
            r.total,
            r.attained_classes,
            fmt_f64(r.tv_attained),
            fmt_f64(r.tv_full),
        ));
    }
    out
}

pub fn decay_csv(rep: &DecayReport) -> String {
    let mut out = String::from("k,norm,control_norm\n");
    for (k, (n, c)) in rep.norms.iter().zip(&rep.control_norms).enumerate() {
        out.push_str(&format!("{},{},{}\n", k, fmt_f64(*n), fmt_f64(*c)));
    }
    out
}

pub fn pressure_curve_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("s,pressure\n");
    for (s, p) in points {
        out.push_str(&format!("{},{}\n", fmt_f64(*s), fmt_f64(*p)));
    }
    out
}

pub fn gap_csv(rows: &[crate::congruence::GapReport]) -> String {
    let mut out = String::from("q,group_order,generating_set_size,lambda2\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.modulus,
            r.group_order,
            r.generating_set_size,
            fmt_f64(r.lambda2),
        ));
    }
    out
}
