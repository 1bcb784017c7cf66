//! Self-verification: one check per acceptance criterion, each against an independent oracle.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::analytics::{cluster_overlap, eps_max, f_cp_n3, f_zz_n3, min_f_zz, perturbative_f2};
use crate::bench::{
    disorder_histogram, min_fidelity_curve, sample_bloch_uniform, sample_rng, threshold_crossing, SweepConfig, SweepMode,
    DEFAULT_BIN_WIDTH, DEFAULT_HISTOGRAM_SAMPLES, DEFAULT_MIN_CURVE_SAMPLES,
};
use crate::builder::{build_zz, ChainSpec, ErrorModel};
use crate::error::Result;
use crate::gates::InteractionKind;
use crate::refocus::{analyze, RefocusParams, DEFAULT_EPS_GRID};
use crate::report::{min_curve_table, to_csv_string, RunHeader};
use crate::statevec::BlochOrientation;
use crate::teleport::{refresh_teleport, teleport_fidelity, teleport_fidelity_with, TeleportOptions};

const KINDS: [InteractionKind; 3] = InteractionKind::ALL;
const CHAIN_LENGTHS: [usize; 4] = [3, 5, 7, 9];

/// Deliberate defects used to confirm the suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Toggles one byproduct parity, flipping the sign of two output Bloch components.
    ByproductSignFlip,
    /// Applies the other byproduct variant.
    ByproductSwap,
}

impl Fault {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "byproduct-sign-flip" => Some(Fault::ByproductSignFlip),
            "byproduct-swap" => Some(Fault::ByproductSwap),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Group names or criterion numbers to run; empty runs everything.
    pub only: Vec<String>,
    pub fault: Option<Fault>,
    pub seed: u64,
    pub min_curve_samples: usize,
    pub histogram_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            only: Vec::new(),
            fault: None,
            seed: 20240611,
            min_curve_samples: DEFAULT_MIN_CURVE_SAMPLES,
            histogram_samples: DEFAULT_HISTOGRAM_SAMPLES,
        }
    }
}

impl VerifyOptions {
    fn teleport_options(&self, kind: InteractionKind) -> TeleportOptions {
        match self.fault {
            None => TeleportOptions::default(),
            Some(Fault::ByproductSignFlip) => TeleportOptions { flip_x_parity: true, ..Default::default() },
            Some(Fault::ByproductSwap) => TeleportOptions {
                variant: Some(crate::teleport::ByproductVariant::for_kind(kind).other()),
                ..Default::default()
            },
        }
    }

    fn selects(&self, c: &Criterion) -> bool {
        self.only.is_empty() || self.only.iter().any(|s| s == c.group || s.parse::<u8>().ok() == Some(c.id))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub group: &'static str,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, name: "identity gate at zero error", group: "teleport" },
    Criterion { id: 2, name: "perfect transmission along +-y", group: "teleport" },
    Criterion { id: 3, name: "N=3 closed forms", group: "analytics" },
    Criterion { id: 4, name: "Min(F) law", group: "analytics" },
    Criterion { id: 5, name: "2/3 threshold crossing", group: "analytics" },
    Criterion { id: 6, name: "Ising cluster overlap", group: "analytics" },
    Criterion { id: 7, name: "second-order coefficients", group: "analytics" },
    Criterion { id: 8, name: "refocusing orders and coefficients", group: "refocus" },
    Criterion { id: 9, name: "refreshing equivalence", group: "refresh" },
    Criterion { id: 10, name: "disorder histograms", group: "bench" },
    Criterion { id: 11, name: "deterministic CSV output", group: "determinism" },
];

pub const GROUPS: [&str; 6] = ["teleport", "analytics", "refocus", "refresh", "bench", "determinism"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: String,
    pub group: String,
    pub passed: bool,
    /// What was compared, the worst value seen and the tolerance.
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {:<36} {}", self.id, self.name, self.detail)
    }
}

struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, at: String::new() }
    }

    fn see(&mut self, v: f64, at: impl FnOnce() -> String) {
        if v > self.value || v.is_nan() {
            self.value = v;
            self.at = at();
        }
    }
}

fn directions(seed: u64, count: usize) -> Vec<BlochOrientation> {
    let mut rng = sample_rng(seed, u64::MAX);
    (0..count).map(|_| sample_bloch_uniform(&mut rng)).collect()
}

fn fidelity(kind: InteractionKind, n: usize, model: ErrorModel, r: BlochOrientation, o: &VerifyOptions) -> Result<f64> {
    let spec = ChainSpec::new(kind, n, model)?;
    Ok(teleport_fidelity_with(&spec, r, &o.teleport_options(kind))?.weighted_fidelity)
}

fn check_identity(o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 1e-10;
    let mut worst = Worst::new();
    for kind in KINDS {
        for n in CHAIN_LENGTHS {
            for r in directions(o.seed, 100) {
                let spec = ChainSpec::new(kind, n, ErrorModel::uniform(0.0))?;
                let rep = teleport_fidelity_with(&spec, r, &o.teleport_options(kind))?;
                for f in rep.branch_fidelities().chain([rep.weighted_fidelity]) {
                    worst.see((f - 1.0).abs(), || format!("{kind} N={n}"));
                }
            }
        }
    }
    Ok((worst.value <= tol, format!("max |F-1| = {:.2e} (tol {tol:.0e}) {}", worst.value, worst.at)))
}

fn check_transmission(o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 1e-10;
    let mut worst = Worst::new();
    for kind in [InteractionKind::Zz, InteractionKind::Xy] {
        for n in CHAIN_LENGTHS {
            for eps in [0.1, 0.5, 1.0 / PI, 2.0 / PI] {
                for r in [BlochOrientation::plus_y(), BlochOrientation::minus_y()] {
                    let f = fidelity(kind, n, ErrorModel::uniform(eps), r, o)?;
                    worst.see((f - 1.0).abs(), || format!("{kind} N={n} eps={eps:.4}"));
                }
            }
        }
    }
    Ok((worst.value <= tol, format!("max |F-1| = {:.2e} (tol {tol:.0e}) {}", worst.value, worst.at)))
}

fn check_closed_forms(o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 1e-10;
    let mut worst = Worst::new();
    for kind in KINDS {
        for eps in [0.05, 0.2, 0.5, 1.0] {
            for i in 0..20 {
                for j in 0..20 {
                    let (t, p) = (PI * i as f64 / 19.0, 2.0 * PI * j as f64 / 20.0);
                    let r = BlochOrientation::new(t, p)?;
                    let oracle = match kind {
                        InteractionKind::Cp => f_cp_n3(t, p, eps),
                        _ => f_zz_n3(t, p, eps),
                    };
                    let f = fidelity(kind, 3, ErrorModel::uniform(eps), r, o)?;
                    worst.see((f - oracle).abs(), || format!("{kind} eps={eps} theta0={t:.3} phi0={p:.3}"));
                }
            }
        }
    }
    Ok((worst.value < tol, format!("max |F - closed form| = {:.2e} (tol {tol:.0e}) {}", worst.value, worst.at)))
}

fn check_min_law(o: &VerifyOptions) -> Result<(bool, String)> {
    let tol_anchor = 1e-10;
    let tol_sampled = 1e-3;
    let mut anchor = Worst::new();
    let (mut gap_max, mut gap_min) = (f64::NEG_INFINITY, f64::INFINITY);
    for kind in [InteractionKind::Zz, InteractionKind::Xy] {
        for n in CHAIN_LENGTHS {
            for eps in [0.1, 0.2, 0.3, 0.5] {
                let f = fidelity(kind, n, ErrorModel::uniform(eps), crate::bench::xz_anchor(), o)?;
                anchor.see((f - min_f_zz(n, eps)).abs(), || format!("{kind} N={n} eps={eps}"));
            }
        }
        let cfg = SweepConfig {
            kind,
            ns: CHAIN_LENGTHS.to_vec(),
            mode: SweepMode::Uniform,
            grid: vec![0.1, 0.2, 0.3, 0.5],
            samples: o.min_curve_samples,
            seed: o.seed,
            bin_width: DEFAULT_BIN_WIDTH,
        };
        for row in min_fidelity_curve(&cfg)? {
            let gap = row.sampled_min - min_f_zz(row.n, row.epsilon);
            gap_max = gap_max.max(gap);
            gap_min = gap_min.min(gap);
        }
    }
    let passed = anchor.value <= tol_anchor && gap_min >= -1e-12 && gap_max <= tol_sampled;
    Ok((
        passed,
        format!(
            "anchor dev {:.2e} (tol {tol_anchor:.0e}); sampled-min excess in [{gap_min:.2e}, {gap_max:.2e}] (tol [0, {tol_sampled:.0e}])",
            anchor.value
        ),
    ))
}

fn check_threshold(_o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 1e-6;
    let mut worst = Worst::new();
    let mut ok = true;
    for kind in [InteractionKind::Zz, InteractionKind::Xy] {
        for n in CHAIN_LENGTHS {
            let c = threshold_crossing(kind, n)?;
            match c.epsilon {
                Some(e) => worst.see((e - eps_max(n)).abs(), || format!("{kind} N={n}")),
                None => ok = false,
            }
        }
    }
    let mut cp_min = f64::INFINITY;
    for n in CHAIN_LENGTHS {
        // A chain that never crosses counts as exceeding any finite bound.
        let e = threshold_crossing(InteractionKind::Cp, n)?.epsilon.unwrap_or(f64::INFINITY);
        cp_min = cp_min.min(e);
    }
    let passed = ok && worst.value <= tol && cp_min > 0.15;
    Ok((
        passed,
        format!(
            "ZZ/XY |eps* - eps_max| = {:.2e} (tol {tol:.0e}) {}; smallest CP crossing {cp_min:.4} (> 0.15)",
            worst.value, worst.at
        ),
    ))
}

fn check_overlap(_o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 1e-10;
    let mut worst = Worst::new();
    for n in [3, 5, 7] {
        for eps in [0.1, 0.4] {
            let r = BlochOrientation::plus_x();
            let (a, _) = build_zz(&ChainSpec::new(InteractionKind::Zz, n, ErrorModel::uniform(0.0))?, r)?;
            let (b, _) = build_zz(&ChainSpec::new(InteractionKind::Zz, n, ErrorModel::uniform(eps))?, r)?;
            let dev = (a.overlap(&b)?.norm() - cluster_overlap(n, eps)).abs();
            worst.see(dev, || format!("N={n} eps={eps}"));
        }
    }
    Ok((worst.value <= tol, format!("max overlap dev = {:.2e} (tol {tol:.0e}) {}", worst.value, worst.at)))
}

fn check_second_order(o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 1e-3;
    let eps = 1e-3;
    let mut worst = Worst::new();
    let mut rng = sample_rng(o.seed, u64::MAX - 1);
    for _ in 0..50 {
        let t: f64 = rng.random::<f64>() * PI;
        let p: f64 = rng.random::<f64>() * 2.0 * PI;
        let r = BlochOrientation::new(t, p)?;
        for kind in [InteractionKind::Zz, InteractionKind::Cp] {
            let fd = (fidelity(kind, 3, ErrorModel::uniform(eps), r, o)? - 1.0) / (eps * eps);
            let dev = (fd - perturbative_f2(kind, t, p)?).abs();
            worst.see(dev, || format!("{kind} theta0={t:.3} phi0={p:.3}"));
        }
    }
    Ok((worst.value <= tol, format!("max |FD - F2| = {:.2e} (tol {tol:.0e}) {}", worst.value, worst.at)))
}

fn check_refocus(_o: &VerifyOptions) -> Result<(bool, String)> {
    let cases = [
        RefocusParams::matched(InteractionKind::Zz, FRAC_PI_3),
        RefocusParams::matched(InteractionKind::Xy, FRAC_PI_3),
        RefocusParams::cp(FRAC_PI_4)?,
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for p in cases {
        let rep = analyze(p, &DEFAULT_EPS_GRID)?;
        let slopes_ok = (rep.raw_slope - 2.0).abs() <= 0.05 && (rep.refocused_slope - 4.0).abs() <= 0.05;
        let coef_ok = (rep.refocused_ratio - 1.0).abs() <= 0.05;
        let du_ok = rep.delta_u_deviation.is_none_or(|d| d <= 1e-3);
        ok &= slopes_ok && coef_ok && du_ok;
        let du = rep.delta_u_deviation.map(|d| format!(" dU {d:.1e}")).unwrap_or_default();
        parts.push(format!(
            "{}: slopes {:.3}/{:.3} coef ratio {:.4}{du}",
            p.family, rep.raw_slope, rep.refocused_slope, rep.refocused_ratio
        ));
    }
    Ok((ok, format!("{} (tol slope 0.05, coef 5%, dU 1e-3)", parts.join("; "))))
}

/// Deterministic spread of refresh cases over kinds, lengths and error models.
pub fn refresh_cases(seed: u64) -> Vec<(ChainSpec, BlochOrientation)> {
    let mut rng = sample_rng(seed, u64::MAX - 2);
    (0..20)
        .map(|i| {
            let kind = KINDS[i % 3];
            let n = CHAIN_LENGTHS[(i / 3) % 4];
            let model = match i % 4 {
                0 => ErrorModel::uniform(rng.random_range(-0.5..0.8)),
                1 | 2 => ErrorModel::gaussian(rng.random_range(0.05..0.3), rng.random()),
                _ => ErrorModel::explicit((0..n - 1).map(|_| rng.random_range(-0.4..0.4)).collect()),
            };
            let spec = ChainSpec::new(kind, n, model).expect("valid refresh case");
            (spec, sample_bloch_uniform(&mut rng))
        })
        .collect()
}

fn check_refresh(o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 1e-10;
    let mut worst = Worst::new();
    for (spec, r) in refresh_cases(o.seed) {
        let full = teleport_fidelity(&spec, r)?.weighted_fidelity;
        for window in [3, 5] {
            let f = refresh_teleport(&spec, r, window)?.weighted_fidelity;
            worst.see((f - full).abs(), || format!("{} N={} window={window}", spec.kind, spec.n_total));
        }
    }
    Ok((worst.value <= tol, format!("20 cases, max |F_refresh - F_full| = {:.2e} (tol {tol:.0e}) {}", worst.value, worst.at)))
}

fn check_histograms(o: &VerifyOptions) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in KINDS {
        let cfg = SweepConfig {
            kind,
            ns: vec![7],
            mode: SweepMode::Gaussian,
            grid: vec![0.1, 0.2],
            samples: o.histogram_samples,
            seed: o.seed,
            bin_width: DEFAULT_BIN_WIDTH,
        };
        let h = disorder_histogram(&cfg)?;
        let monotone = h[1].lower_half_max_fidelity < h[0].lower_half_max_fidelity;
        let unity = match kind {
            InteractionKind::Cp => h.iter().all(|s| s.exact_unity_count == 0),
            _ => h.iter().all(|s| s.unity_mass > 0.0),
        };
        ok &= monotone && unity;
        let mass = match kind {
            InteractionKind::Cp => format!("F=1 counts {}/{}", h[0].exact_unity_count, h[1].exact_unity_count),
            _ => format!("unity_mass {:.2e}/{:.2e}", h[0].unity_mass, h[1].unity_mass),
        };
        parts.push(format!(
            "{kind}: {mass}{} half-max {:.3}->{:.3}{}",
            if unity { "" } else { " (!)" },
            h[0].lower_half_max_fidelity,
            h[1].lower_half_max_fidelity,
            if monotone { "" } else { " (!)" }
        ));
    }
    Ok((ok, format!("N=7 sigma 0.1/0.2: {}", parts.join("; "))))
}

fn check_determinism(o: &VerifyOptions) -> Result<(bool, String)> {
    let cfg = SweepConfig {
        kind: InteractionKind::Zz,
        ns: vec![3, 5],
        mode: SweepMode::Uniform,
        grid: vec![0.1, 0.3],
        samples: 200,
        seed: o.seed,
        bin_width: DEFAULT_BIN_WIDTH,
    };
    let render = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        let rows = pool.install(|| min_fidelity_curve(&cfg))?;
        let header = RunHeader::new("min-curve", Some(cfg.seed), serde_json::to_value(&cfg).expect("config json"));
        to_csv_string(&header, &min_curve_table(&rows, cfg.seed))
    };
    let a = render(1)?;
    let b = render(4)?;
    let c = render(4)?;
    let same = a == b && b == c;
    Ok((same, format!("min-curve CSV on 1, 4, 4 threads: {} bytes, identical = {same}", a.len())))
}

/// Runs criterion `id`; an internal error counts as a failure.
pub fn run_check(id: u8, o: &VerifyOptions) -> CheckResult {
    let c = CRITERIA.iter().find(|c| c.id == id).expect("criterion id in 1..=11");
    let outcome = match id {
        1 => check_identity(o),
        2 => check_transmission(o),
        3 => check_closed_forms(o),
        4 => check_min_law(o),
        5 => check_threshold(o),
        6 => check_overlap(o),
        7 => check_second_order(o),
        8 => check_refocus(o),
        9 => check_refresh(o),
        10 => check_histograms(o),
        _ => check_determinism(o),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult { id, name: c.name.into(), group: c.group.into(), passed, detail }
}

pub fn run_verify(o: &VerifyOptions) -> Vec<CheckResult> {
    CRITERIA.iter().filter(|c| o.selects(c)).map(|c| run_check(c.id, o)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_by_group_and_number() {
        let o = VerifyOptions { only: vec!["analytics".into(), "9".into()], ..Default::default() };
        let ids: Vec<u8> = CRITERIA.iter().filter(|c| o.selects(c)).map(|c| c.id).collect();
        assert_eq!(ids, vec![3, 4, 5, 6, 7, 9]);
        assert!(CRITERIA.iter().all(|c| GROUPS.contains(&c.group)));
    }

    #[test]
    fn fault_names() {
        assert_eq!(Fault::parse("byproduct-sign-flip"), Some(Fault::ByproductSignFlip));
        assert_eq!(Fault::parse("nope"), None);
    }

    #[test]
    fn injected_fault_is_caught() {
        for fault in [Fault::ByproductSignFlip, Fault::ByproductSwap] {
            let o = VerifyOptions { fault: Some(fault), ..Default::default() };
            assert!(!run_check(1, &o).passed);
        }
        assert!(run_check(6, &VerifyOptions::default()).passed);
    }

    #[test]
    fn directions_are_seeded() {
        assert_eq!(directions(1, 3), directions(1, 3));
        assert_ne!(directions(1, 3), directions(2, 3));
    }
}
