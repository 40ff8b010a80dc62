//! CSV and manifest emission. Column order is fixed and versioned; floats
//! are printed with 9 significant digits so reruns diff cleanly.

use dstm_core::channel::CorrelationSpec;
use dstm_core::simkit::{SweepRecord, RNG_ALGORITHM};

use crate::config::RunConfig;

/// Fixed column set of the symbol-error-rate sweep CSV.
pub const SER_SWEEP_HEADER: &str = "preset,scheme,v_mps,theta_rad,M,snr_db,D_m,case,l,\
rho_l,rho_l1,decisions,errors,ser,ci_low,ci_high,pep_bound,pep_floor";

/// 9-significant-digit float formatting used in every CSV.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

pub fn ser_sweep_csv(preset: &str, records: &[SweepRecord]) -> String {
    let mut out = String::from(SER_SWEEP_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            preset,
            r.scheme.as_str(),
            fmt_f(r.v_mps),
            fmt_f(r.theta_rad),
            r.m,
            fmt_f(r.snr_db),
            fmt_f(r.d_m),
            r.spec.case.as_str(),
            r.spec.lag,
            fmt_f(r.spec.rho_l),
            fmt_f(r.spec.rho_l1),
            r.decisions,
            r.errors,
            fmt_f(r.ser),
            fmt_f(r.ci_low),
            fmt_f(r.ci_high),
            fmt_opt(r.bound),
            fmt_opt(r.floor),
        ));
    }
    out
}

/// One row of the correlation table (`correlation` subcommand).
pub struct CorrelationRow {
    pub v_mps: f64,
    pub theta_rad: f64,
    pub m: usize,
    pub d_m: f64,
    pub spec: CorrelationSpec<f64>,
}

pub const CORRELATION_HEADER: &str =
    "v_mps,theta_rad,M,D_m,case,l,rho_l,rho_l1,safeguard_applied";

pub fn correlation_csv(rows: &[CorrelationRow]) -> String {
    let mut out = String::from(CORRELATION_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_f(r.v_mps),
            fmt_f(r.theta_rad),
            r.m,
            fmt_f(r.d_m),
            r.spec.case.as_str(),
            r.spec.lag,
            fmt_f(r.spec.rho_l),
            fmt_f(r.spec.rho_l1),
            r.spec.safeguard_applied,
        ));
    }
    out
}

/// One row of the bound table (`pep-bound` subcommand).
pub struct PepBoundRow {
    pub v_mps: f64,
    pub m: usize,
    pub snr_db: f64,
    pub d_m: f64,
    pub spec: CorrelationSpec<f64>,
    pub pep_bound: f64,
    pub pep_bound_log10: f64,
    pub pep_floor: Option<f64>,
    pub pep_floor_log10: Option<f64>,
}

pub const PEP_BOUND_HEADER: &str =
    "v_mps,M,snr_db,D_m,case,l,rho_l,rho_l1,pep_bound,pep_bound_log10,pep_floor,pep_floor_log10";

pub fn pep_bound_csv(rows: &[PepBoundRow]) -> String {
    let mut out = String::from(PEP_BOUND_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_f(r.v_mps),
            r.m,
            fmt_f(r.snr_db),
            fmt_f(r.d_m),
            r.spec.case.as_str(),
            r.spec.lag,
            fmt_f(r.spec.rho_l),
            fmt_f(r.spec.rho_l1),
            fmt_f(r.pep_bound),
            fmt_f(r.pep_bound_log10),
            fmt_opt(r.pep_floor),
            fmt_opt(r.pep_floor_log10),
        ));
    }
    out
}

/// One row of the adaptation table (`adaptive` subcommand).
pub struct AdaptiveRow {
    pub policy: String,
    pub v_mps: f64,
    pub m: usize,
    pub spec: CorrelationSpec<f64>,
    pub bound: f64,
}

pub const ADAPTIVE_HEADER: &str = "policy,v_mps,M,case,l,rho_l,rho_l1,bound";

pub fn adaptive_csv(rows: &[AdaptiveRow]) -> String {
    let mut out = String::from(ADAPTIVE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.policy,
            fmt_f(r.v_mps),
            r.m,
            r.spec.case.as_str(),
            r.spec.lag,
            fmt_f(r.spec.rho_l),
            fmt_f(r.spec.rho_l1),
            fmt_f(r.bound),
        ));
    }
    out
}

/// Manifest text: the full configuration snapshot plus tool metadata, in
/// the same `key = value` format the config loader reads.
pub fn manifest(
    rc: &RunConfig,
    preset: Option<&str>,
    extra: &[(String, String)],
) -> String {
    let mut out = String::new();
    out.push_str(&format!("tool_version = {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("rng_algorithm = {RNG_ALGORITHM}\n"));
    let ts = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    out.push_str(&format!("timestamp_unix = {ts}\n"));
    out.push_str(&format!(
        "preset = {}\n",
        preset.unwrap_or("none")
    ));
    for (k, v) in rc.snapshot() {
        out.push_str(&format!("{k} = {v}\n"));
    }
    if let Some(w) = &rc.coherence_warning {
        out.push_str(&format!("# warning: {w}\n"));
    }
    for (k, v) in extra {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dstm_core::channel::{CorrelationCase, CorrelationSpec};
    use dstm_core::simkit::Scheme;

    fn spec() -> CorrelationSpec<f64> {
        CorrelationSpec {
            case: CorrelationCase::CaseII,
            lag: 1,
            rho_l: 0.995,
            rho_l1: 0.0,
            safeguard_applied: false,
        }
    }

    #[test]
    fn ser_sweep_csv_layout() {
        let rec = SweepRecord {
            scheme: Scheme::Proposed,
            v_mps: 50.0,
            theta_rad: 0.0,
            m: 5,
            snr_db: 5.0,
            d_m: 0.05,
            spec: spec(),
            decisions: 1000,
            errors: 17,
            ser: 0.017,
            ci_low: 0.01,
            ci_high: 0.027,
            bound: Some(0.4),
            floor: None,
        };
        let csv = ser_sweep_csv("fig9", &[rec]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SER_SWEEP_HEADER);
        let row = lines.next().unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 18);
        assert_eq!(fields[0], "fig9");
        assert_eq!(fields[1], "proposed");
        assert_eq!(fields[2], "5.00000000e1");
        assert_eq!(fields[7], "II");
        assert_eq!(fields[16], "4.00000000e-1");
        assert_eq!(fields[17], ""); // floor inapplicable
    }

    #[test]
    fn manifest_contains_reproduction_inputs() {
        let rc = RunConfig::default();
        let m = manifest(&rc, Some("fig5"), &[("fig10_v0".into(), "47.00".into())]);
        assert!(m.contains("preset = fig5"));
        assert!(m.contains("rng_algorithm = chacha8+splitmix64"));
        assert!(m.contains("seed = "));
        assert!(m.contains("decisions = 100000"));
        assert!(m.contains("fig10_v0 = 47.00"));
    }
}
