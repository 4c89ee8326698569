//! Comma-separated metric tables.

use lsdp_core::FitReport;

/// Four significant digits: fixed notation for magnitudes in `[1e-3, 1e5)`,
/// scientific otherwise.
pub fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs();
    if (1e-3..1e5).contains(&mag) {
        // rounding can carry into the next decade, e.g. 9.9996 -> 10.00
        let mut exp = mag.log10().floor() as i32;
        let rounded = format!("{:.*e}", 3, mag);
        if let Some(e) = rounded.split('e').nth(1) {
            exp = e.parse().unwrap_or(exp);
        }
        if exp < 5 {
            let decimals = (3 - exp).max(0) as usize;
            return format!("{v:.decimals$}");
        }
    }
    format!("{v:.3e}")
}

pub const HEADER: &str = "policy,method,demo,nnz,per_dof,acc_norm,res_norm,cost";

#[derive(Debug, Clone)]
pub struct Row {
    pub policy: String,
    pub method: String,
    pub demo: String,
    pub report: FitReport,
}

impl Row {
    pub fn line(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{},{}",
            self.policy,
            self.method,
            self.demo,
            r.nnz,
            sig4(r.per_dof()),
            sig4(r.acc_norm),
            sig4(r.res_norm),
            sig4(r.cost)
        )
    }
}

pub fn table(rows: &[Row]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.line());
        out.push('\n');
    }
    out
}
