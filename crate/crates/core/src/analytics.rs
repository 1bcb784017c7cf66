//! Closed-form fidelity laws, thresholds, overlaps and second-order coefficients.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gates::InteractionKind;
use crate::numeric::linear_fit;

/// Weighted CP teleportation fidelity for `N = 3` under uniform error.
pub fn f_cp_n3(theta0: f64, phi0: f64, epsilon: f64) -> f64 {
    let a = (PI * epsilon / 2.0).sin().powi(2);
    let b = (PI * epsilon).sin().powi(2);
    1.0 - (1.0 - (theta0.sin() * phi0.cos()).powi(2)) * a / 2.0 - (theta0 / 2.0).sin().powi(2) * b / 2.0
}

/// Weighted Ising (and XY) teleportation fidelity for `N = 3` under uniform error.
pub fn f_zz_n3(theta0: f64, phi0: f64, epsilon: f64) -> f64 {
    1.0 - (1.0 - (theta0.sin() * phi0.sin()).powi(2)) * (PI * epsilon / 2.0).sin().powi(2) / 2.0
}

/// Minimum over input directions of the Ising fidelity for odd `n`.
pub fn min_f_zz(n: usize, epsilon: f64) -> f64 {
    0.5 * (1.0 + (PI * epsilon / 2.0).cos().powi(n as i32 - 1))
}

/// Largest uniform error keeping `min_f_zz` at or above `2/3`.
pub fn eps_max(n: usize) -> f64 {
    let x = 3f64.powf(1.0 / (1.0 - n as f64));
    2.0 / PI * x.acos()
}

/// `|<Phi_C(0)|Phi_C(eps)>|` for an Ising-built chain of `n` qubits.
pub fn cluster_overlap(n: usize, epsilon: f64) -> f64 {
    (PI * epsilon / 4.0).cos().powi(n as i32 - 1)
}

/// Coefficient of `epsilon^2` in the `N = 3` fidelity.
pub fn perturbative_f2(kind: InteractionKind, theta0: f64, phi0: f64) -> Result<f64> {
    let c = -PI * PI / 8.0;
    match kind {
        InteractionKind::Zz => Ok(c * (1.0 - (theta0.sin() * phi0.sin()).powi(2))),
        InteractionKind::Cp => {
            Ok(c * (1.0 - (theta0.sin() * phi0.cos()).powi(2) + 4.0 * (theta0 / 2.0).sin().powi(2)))
        }
        InteractionKind::Xy => Err(Error::UnsupportedKind(kind)),
    }
}

/// Fit of `eps_max(n) = c / sqrt(n)` over large `n`, with the ratio to `sqrt(2 ln 3)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AsymptoteFit {
    /// Fitted exponent of `n`; close to `-1/2`.
    pub exponent: f64,
    /// `sqrt(n) eps_max(n)` at the largest `n`.
    pub prefactor: f64,
    /// `prefactor / sqrt(2 ln 3)`, which tends to `2 / pi`.
    pub ratio_to_log_form: f64,
}

pub fn eps_max_asymptote(ns: &[usize]) -> Option<AsymptoteFit> {
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| eps_max(n).ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let n = *ns.iter().max()?;
    let prefactor = (n as f64).sqrt() * eps_max(n);
    Some(AsymptoteFit {
        exponent: fit.slope,
        prefactor,
        ratio_to_log_form: prefactor / (2.0 * 3f64.ln()).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn spot_values() {
        assert!((f_cp_n3(0.7, 1.1, 0.0) - 1.0).abs() < 1e-15);
        assert!((f_cp_n3(0.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
        for eps in [0.1, 0.5, 0.9] {
            assert!((f_zz_n3(FRAC_PI_2, FRAC_PI_2, eps) - 1.0).abs() < 1e-15);
            for t in [0.0, 1.0, 2.0] {
                assert!((f_zz_n3(t, 0.0, eps) - (3.0 + (PI * eps).cos()) / 4.0).abs() < 1e-15);
            }
        }
        assert!((min_f_zz(5, 0.1) - 0.975_827_6).abs() < 1e-6);
        assert_eq!(min_f_zz(7, 0.0), 1.0);
        assert!((eps_max(3) - 0.6082).abs() < 1e-4);
        assert!((eps_max(9) - 0.326).abs() < 1e-3);
        assert!((cluster_overlap(3, 0.2) - 0.97553).abs() < 1e-5);
    }

    #[test]
    fn eps_max_is_the_two_thirds_crossing() {
        for n in [3, 5, 7, 9, 21] {
            assert!((min_f_zz(n, eps_max(n)) - 2.0 / 3.0).abs() < 1e-12);
        }
        for n in (3..99).step_by(2) {
            assert!(eps_max(n + 2) < eps_max(n));
        }
    }

    #[test]
    fn eps_max_scales_as_inverse_root_n() {
        let ratio = (101.0 * eps_max(101).powi(2)) / (401.0 * eps_max(401).powi(2));
        assert!((ratio - 1.0).abs() < 0.05);
        let fit = eps_max_asymptote(&[101, 201, 401, 801]).unwrap();
        assert!((fit.exponent + 0.5).abs() < 0.01);
        assert!((fit.ratio_to_log_form - 2.0 / PI).abs() < 0.01);
    }

    #[test]
    fn perturbative_coefficients() {
        assert!(perturbative_f2(InteractionKind::Zz, FRAC_PI_2, FRAC_PI_2).unwrap().abs() < 1e-15);
        assert_eq!(perturbative_f2(InteractionKind::Xy, 0.0, 0.0), Err(Error::UnsupportedKind(InteractionKind::Xy)));
        for i in 0..20 {
            for j in 0..20 {
                let (t, p) = (PI * i as f64 / 19.0, 2.0 * PI * j as f64 / 20.0);
                assert!(perturbative_f2(InteractionKind::Cp, t, p).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn second_order_taylor_of_cp_closed_form() {
        // Even function of eps, so the symmetric difference isolates the eps^2 term.
        for &(t, p) in &[(0.3, 0.2), (1.2, 2.5), (2.8, 4.4)] {
            let h = 1e-4;
            let d2 = (f_cp_n3(t, p, h) + f_cp_n3(t, p, -h) - 2.0) / (2.0 * h * h);
            let d4 = (f_cp_n3(t, p, 2.0 * h) + f_cp_n3(t, p, -2.0 * h) - 2.0) / (8.0 * h * h);
            let richardson = (4.0 * d2 - d4) / 3.0;
            assert!((richardson - perturbative_f2(InteractionKind::Cp, t, p).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn min_over_grid_matches_min_law() {
        for eps in [0.1, 0.4, 0.8] {
            let mut lo = f64::INFINITY;
            for i in 0..=40 {
                for j in 0..80 {
                    lo = lo.min(f_zz_n3(PI * i as f64 / 40.0, 2.0 * PI * j as f64 / 80.0, eps));
                }
            }
            assert!((lo - min_f_zz(3, eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_are_bounded() {
        for k in 0..=40 {
            let eps = -1.0 + k as f64 / 20.0;
            for i in 0..=10 {
                for j in 0..10 {
                    let (t, p) = (PI * i as f64 / 10.0, 0.6 * j as f64);
                    for f in [f_cp_n3(t, p, eps), f_zz_n3(t, p, eps)] {
                        assert!((0.0..=1.0 + 1e-15).contains(&f));
                    }
                }
            }
        }
    }
}
