//! Large-|z| evaluation: exponential contributions of the poles of the
//! Laplace transform plus the algebraic expansion -Σ z^{-k}/Γ(β-αk).
//!
//! Returns `None` whenever the truncated expansion cannot be trusted to full
//! double precision, leaving the caller to fall back to contour inversion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::special::{ln_gamma, rgamma};

pub(crate) const MAX_ORDER: usize = 60;
const REL: f64 = 1.0 / (1u64 << 54) as f64;
// poles whose argument is this close to ±π sit on the branch cut
const CUT_MARGIN: f64 = 0.2;

/// Coefficients 1/Γ(β-αk), k = 1..=MAX_ORDER.
pub(crate) fn coefficients(alpha: f64, beta: f64) -> Vec<f64> {
    (1..=MAX_ORDER)
        .map(|k| rgamma(beta - alpha * k as f64))
        .collect()
}

pub(crate) fn try_eval(alpha: f64, beta: f64, z: Complex64, coeffs: &[f64]) -> Option<Complex64> {
    let r = z.norm();
    let theta = z.arg();
    let r_root = r.powf(1.0 / alpha);

    let mut residues = Complex64::new(0.0, 0.0);
    let mut cut_poles = 0.0f64;
    let jmin = ((-alpha * PI - theta) / (2.0 * PI)).floor() as i64 - 1;
    let jmax = ((alpha * PI - theta) / (2.0 * PI)).ceil() as i64 + 1;
    for j in jmin..=jmax {
        let arg_s = (theta + 2.0 * PI * j as f64) / alpha;
        if arg_s.abs() > PI + CUT_MARGIN {
            continue;
        }
        let s = Complex64::from_polar(r_root, arg_s);
        let contrib = ((1.0 - beta) * s.ln() + s).exp() / alpha;
        if PI - arg_s.abs() < CUT_MARGIN {
            cut_poles = cut_poles.max(contrib.norm());
        } else {
            residues += contrib;
        }
    }

    let w = z.inv();
    let ln_r = r.ln();
    let mut wk = Complex64::new(1.0, 0.0);
    let mut algebraic = Complex64::new(0.0, 0.0);
    let mut last_mag = f64::INFINITY;
    for (k, &c) in coeffs.iter().enumerate() {
        wk *= w;
        let k = (k + 1) as f64;
        let x = beta - alpha * k;
        // |1/Γ(x)| ≤ Γ(1-x)/π for x < 0; using the envelope keeps accidental
        // near-zeros of 1/Γ from ending the expansion early
        let mag = if x < 0.0 {
            (ln_gamma(1.0 - x) - k * ln_r).exp() / PI
        } else {
            c.abs() * wk.norm()
        };
        if c == 0.0 {
            continue;
        }
        let term = -c * wk;
        if mag > last_mag {
            return None;
        }
        last_mag = mag;
        algebraic += term;
        let total = residues + algebraic;
        if mag <= REL * total.norm() {
            return (cut_poles <= REL * total.norm()).then_some(total);
        }
    }
    let total = residues + algebraic;
    if last_mag.is_infinite() {
        // no algebraic part at all: rational transform, residues are exact
        return (cut_poles <= REL * total.norm().max(f64::MIN_POSITIVE)).then_some(total);
    }
    None
}
