//! Exact inner integrals for α = β = 1 (kernel e^{iλf}) with constant ψ on the
//! unit square, leaving a one-dimensional oscillatory integral.

use num_complex::Complex64;

use crate::error::Result;
use crate::phase::PhaseClass;
use crate::quad::{engine::integrate_1d, AmplitudeKind, Domain, IntegralSpec};

const MAX_INTERVALS: usize = 2_000_000;

/// ∫₀¹ g(x) dx for complex g, by real and imaginary parts.
fn integrate_complex(
    g: impl Fn(f64) -> Complex64,
    breaks: &[f64],
    tol: f64,
) -> Result<(Complex64, f64)> {
    let re = integrate_1d(|x| Ok(g(x).re), breaks, tol * 0.5, 0.0, MAX_INTERVALS)?;
    let im = integrate_1d(|x| Ok(g(x).im), breaks, tol * 0.5, 0.0, MAX_INTERVALS)?;
    Ok((
        Complex64::new(re.value.re, im.value.re),
        re.error + im.error,
    ))
}

/// (e^{iθ} − 1)/(iθ) without cancellation at small θ.
fn phase_difference_quotient(theta: f64) -> Complex64 {
    if theta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let h = 0.5 * theta;
    Complex64::new(theta.sin() / theta, 2.0 * h.sin() * h.sin() / theta)
}

/// Breakpoints splitting [0, 1] where λx^k passes multiples of 2π, at most
/// `cap` of them, so each piece carries a bounded number of oscillations.
fn oscillation_breaks(lambda: f64, k: i32, cap: usize) -> Vec<f64> {
    let periods = (lambda / std::f64::consts::TAU).ceil().max(1.0);
    let n = (periods as usize).clamp(1, cap);
    let mut v: Vec<f64> = (0..=n)
        .map(|j| (j as f64 / n as f64).powf(1.0 / k as f64))
        .collect();
    v[n] = 1.0;
    v
}

/// The value and error estimate of I for the supported cases, otherwise
/// `None`.
pub(super) fn reduced(spec: &IntegralSpec, tol: f64) -> Result<Option<(Complex64, f64)>> {
    let AmplitudeKind::Constant { c } = spec.amplitude.kind else {
        return Ok(None);
    };
    if spec.params.alpha != 1.0 || spec.params.beta != 1.0 || spec.domain != Domain::UNIT {
        return Ok(None);
    }
    let lambda = spec.lambda;
    let abs_tol = tol / c.abs().max(f64::MIN_POSITIVE);
    let (v, e) = if spec.phase == PhaseClass::DInf.canonical() {
        // ∫₀¹ e^{iλx₁²x₂} dx₂ = (e^{iλx₁²} − 1)/(iλx₁²)
        let breaks = oscillation_breaks(lambda, 2, 1 << 16);
        integrate_complex(
            |x| phase_difference_quotient(lambda * x * x),
            &breaks,
            abs_tol,
        )?
    } else if spec.phase == PhaseClass::A2.canonical() {
        // x₂ does not enter the phase
        let breaks = oscillation_breaks(lambda, 3, 1 << 16);
        integrate_complex(
            |x| Complex64::from_polar(1.0, lambda * x * x * x),
            &breaks,
            abs_tol,
        )?
    } else {
        return Ok(None);
    };
    Ok(Some((v * c, e * c.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlf::MlParams;
    use crate::quad::AmplitudeSpec;

    #[test]
    fn small_angle_quotient_is_accurate() {
        let t = 1e-9;
        let z = phase_difference_quotient(t);
        assert!((z.re - 1.0).abs() < 1e-16);
        assert!((z.im - 0.5e-9).abs() < 1e-24);
    }

    #[test]
    fn a2_reduction_matches_closed_form() {
        let spec = IntegralSpec::new(
            MlParams::new(1.0, 1.0),
            10.0,
            PhaseClass::A2.canonical(),
            AmplitudeSpec::constant(1.0),
        );
        let (v, _) = reduced(&spec, 1e-12).unwrap().unwrap();
        let want = Complex64::new(0.3427978603196994777788, 0.2360874056332610183378);
        assert!((v - want).norm() < 1e-11, "{v}");
    }

    #[test]
    fn dinf_reduction_matches_cubature() {
        for lambda in [3.0, 300.0] {
            let spec = IntegralSpec::new(
                MlParams::new(1.0, 1.0),
                lambda,
                PhaseClass::DInf.canonical(),
                AmplitudeSpec::constant(2.0),
            );
            let (v, e) = reduced(&spec, 1e-10).unwrap().unwrap();
            let r = crate::quad::integrate(&spec, &crate::quad::QuadOptions::new(1e-10)).unwrap();
            assert!(!r.budget_exceeded);
            assert!(
                (v - r.value).norm() <= 2.0 * (e + r.error_estimate) + 1e-12,
                "{lambda}: {v} vs {}",
                r.value
            );
        }
    }

    #[test]
    fn other_cases_are_not_reduced() {
        let spec = IntegralSpec::new(
            MlParams::new(0.5, 1.0),
            10.0,
            PhaseClass::A2.canonical(),
            AmplitudeSpec::constant(1.0),
        );
        assert!(reduced(&spec, 1e-8).unwrap().is_none());
        let spec = IntegralSpec::new(
            MlParams::new(1.0, 1.0),
            10.0,
            PhaseClass::D4Plus.canonical(),
            AmplitudeSpec::constant(1.0),
        );
        assert!(reduced(&spec, 1e-8).unwrap().is_none());
    }
}
