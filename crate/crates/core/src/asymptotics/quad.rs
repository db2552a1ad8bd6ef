//! Adaptive Gauss–Kronrod quadrature and the drift integrals
//! `int_{x1}^{x2} exp(-sum_i f_i(t)) dt`.

use serde::{Deserialize, Serialize};

use crate::constants::{Drift, DriftSpec, PowerTerm};
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Absolute tolerance for every drift integral.
pub const ABS_TOL: f64 = 1e-10;
/// Semi-infinite tails are cut where the integrand drops below this.
pub const TAIL_CUTOFF: f64 = 1e-16;
const MAX_INTERVALS: usize = 2000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive G–K 7/15 on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("finite limits required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    loop {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= abs_tol.max(1e-14 * total.abs()) {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!("error estimate {err:e} on [{a}, {b}] after {MAX_INTERVALS} subintervals")));
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].2 .1.total_cmp(&parts[j].2 .1))
            .expect("nonempty");
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
}

/// `int_a^inf f` for a nonnegative integrand that eventually decays: pieces of
/// doubling width until the integrand falls below [`TAIL_CUTOFF`].
fn integrate_right_tail<F: Fn(f64) -> f64>(f: &F, a: f64, abs_tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut lo = a;
    let mut width = 1.0;
    for _ in 0..60 {
        let hi = lo + width;
        total += integrate(f, lo, hi, abs_tol / 64.0)?;
        if f(hi) < TAIL_CUTOFF {
            return Ok(total);
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::Quadrature(format!("integrand does not decay on [{a}, inf)")))
}

/// `int_{x1}^{x2} f` with either limit possibly infinite. Unbounded tails
/// assume a nonnegative integrand that decays.
pub fn integrate_decaying<F: Fn(f64) -> f64>(f: F, x1: f64, x2: f64, abs_tol: f64) -> Result<f64> {
    decaying(&f, x1, x2, abs_tol)
}

fn decaying(f: &dyn Fn(f64) -> f64, x1: f64, x2: f64, abs_tol: f64) -> Result<f64> {
    if x1.is_nan() || x2.is_nan() || x1 >= x2 {
        return Err(Error::InvalidInterval { lo: x1, hi: x2, reason: "need x1 < x2".into() });
    }
    match (x1.is_finite(), x2.is_finite()) {
        (true, true) => {
            // A cusp of |t|^p at the origin converges faster when it is a breakpoint.
            if x1 < 0.0 && x2 > 0.0 {
                Ok(integrate(f, x1, 0.0, abs_tol / 2.0)? + integrate(f, 0.0, x2, abs_tol / 2.0)?)
            } else {
                integrate(f, x1, x2, abs_tol)
            }
        }
        (true, false) => {
            if x1 < 0.0 {
                Ok(integrate(f, x1, 0.0, abs_tol / 2.0)? + integrate_right_tail(&f, 0.0, abs_tol / 2.0)?)
            } else {
                integrate_right_tail(&f, x1, abs_tol)
            }
        }
        (false, true) => decaying(&|t| f(-t), -x2, f64::INFINITY, abs_tol),
        (false, false) => Ok(integrate_right_tail(&|t| f(-t), 0.0, abs_tol / 2.0)?
            + integrate_right_tail(&f, 0.0, abs_tol / 2.0)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftIntegral {
    pub value: f64,
    pub method: IntegralMethod,
}

/// Merges the power terms of every coordinate into `theta_p |t|^p` groups,
/// or `None` when some coordinate is not a power law on the interval.
fn merged_powers(drift: &DriftSpec, x1: f64) -> Option<Vec<PowerTerm>> {
    let mut merged: Vec<PowerTerm> = Vec::new();
    for f in &drift.coords {
        if matches!(f, Drift::LinearPositive { .. }) && x1 < 0.0 {
            return None;
        }
        for term in f.power_terms()? {
            match merged.iter_mut().find(|m| m.gamma == term.gamma) {
                Some(m) => m.c += term.c,
                None => merged.push(term),
            }
        }
    }
    merged.retain(|m| m.c != 0.0);
    Some(merged)
}

/// `int_{x1}^{x2} exp(-sum_i f_i(t)) dt`.
///
/// When the summed drift is a single power `theta |t|^p` with theta > 0 and
/// the interval is a half-line or the whole line, the Gamma-function closed
/// form is used; `[0, x]` with p = 1 is closed form as well.
pub fn drift_integral(drift: &DriftSpec, x1: f64, x2: f64) -> Result<DriftIntegral> {
    if x1.is_nan() || x2.is_nan() || x1 >= x2 {
        return Err(Error::InvalidInterval { lo: x1, hi: x2, reason: "need x1 < x2".into() });
    }
    let closed = |value| Ok(DriftIntegral { value, method: IntegralMethod::ClosedForm });
    if let Some(terms) = merged_powers(drift, x1) {
        if terms.is_empty() {
            if x1.is_finite() && x2.is_finite() {
                return closed(x2 - x1);
            }
            return Err(Error::Quadrature(format!("zero drift is not integrable on [{x1}, {x2}]")));
        }
        if let [PowerTerm { c: theta, gamma: p }] = terms[..] {
            if theta > 0.0 {
                let half = libm::tgamma(1.0 + 1.0 / p) * theta.powf(-1.0 / p);
                if (x1 == 0.0 || x1 == f64::NEG_INFINITY) && (x2 == 0.0 || x2 == f64::INFINITY) {
                    let halves = (x1 < 0.0) as u8 + (x2 > 0.0) as u8;
                    return closed(half * halves as f64);
                }
                if x1 == 0.0 && p == 1.0 && x2.is_finite() {
                    return closed(-(-theta * x2).exp_m1() / theta);
                }
            }
        }
    }
    let value = integrate_decaying(|t| (-drift.sum(t)).exp(), x1, x2, ABS_TOL)?;
    Ok(DriftIntegral { value, method: IntegralMethod::Quadrature })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        let v = integrate(|x| x.powi(20) - 3.0 * x.powi(7), -1.0, 2.0, 1e-12).unwrap();
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn adaptive_handles_a_kink_and_a_tail() {
        let v = integrate(|x: f64| x.abs().sqrt(), -1.0, 4.0, 1e-10).unwrap();
        assert!((v - (2.0 / 3.0 + 16.0 / 3.0)).abs() < 1e-9);
        let g = integrate_decaying(|t| (-t * t).exp(), f64::NEG_INFINITY, f64::INFINITY, ABS_TOL).unwrap();
        assert!((g - PI.sqrt()).abs() < 1e-10);
        let r = integrate_decaying(|t| (-t).exp(), f64::NEG_INFINITY, -2.0, ABS_TOL);
        assert!(r.is_err());
    }

    #[test]
    fn closed_forms() {
        let lin = DriftSpec::new(vec![Drift::LinearPositive { c: 1.0 }]);
        let r = drift_integral(&lin, 0.0, f64::INFINITY).unwrap();
        assert_eq!(r.method, IntegralMethod::ClosedForm);
        assert!((r.value - 1.0).abs() < 1e-15);

        let two = DriftSpec::new(vec![Drift::PowerLaw { c: 1.0, gamma: 1.0 }; 2]);
        let r = drift_integral(&two, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);

        let sq = DriftSpec::new(vec![Drift::PowerLaw { c: 1.0, gamma: 2.0 }]);
        assert!((drift_integral(&sq, f64::NEG_INFINITY, f64::INFINITY).unwrap().value - PI.sqrt()).abs() < 1e-14);
        assert!((drift_integral(&sq, 0.0, f64::INFINITY).unwrap().value - PI.sqrt() / 2.0).abs() < 1e-14);

        let r = drift_integral(&lin, 0.0, 3.0).unwrap();
        assert!((r.value - (1.0 - (-3.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        for (c, p) in [(0.7, 0.5), (2.0, 1.0), (0.3, 1.7), (1.0, 2.0)] {
            let spec = DriftSpec::new(vec![Drift::PowerLaw { c, gamma: p }]);
            let closed = drift_integral(&spec, 0.0, f64::INFINITY).unwrap().value;
            let user = DriftSpec::new(vec![Drift::user("pow", true, move |t: f64| c * t.abs().powf(p))]);
            let quad = drift_integral(&user, 0.0, f64::INFINITY).unwrap();
            assert_eq!(quad.method, IntegralMethod::Quadrature);
            assert!((quad.value - closed).abs() < 1e-9, "c={c} p={p}: {} vs {closed}", quad.value);
        }
    }

    #[test]
    fn mixed_powers_use_quadrature() {
        let spec = DriftSpec::new(vec![Drift::PowerLaw { c: 1.0, gamma: 1.0 }, Drift::PowerLaw { c: 1.0, gamma: 2.0 }]);
        let r = drift_integral(&spec, 0.0, f64::INFINITY).unwrap();
        assert_eq!(r.method, IntegralMethod::Quadrature);
        // Completing the square: e^{1/4} int_{1/2}^inf e^{-s^2} ds.
        let exact = PI.sqrt() / 2.0 * 0.25f64.exp() * libm::erfc(0.5);
        assert!((r.value - exact).abs() < 1e-10);
    }

    #[test]
    fn divergent_drifts_are_errors() {
        assert!(drift_integral(&DriftSpec::zero(1), 0.0, f64::INFINITY).is_err());
        let lin = DriftSpec::new(vec![Drift::LinearPositive { c: 1.0 }]);
        assert!(drift_integral(&lin, f64::NEG_INFINITY, 0.0).is_err());
        assert!((drift_integral(&DriftSpec::zero(2), -1.0, 2.5).unwrap().value - 3.5).abs() < 1e-15);
    }
}
