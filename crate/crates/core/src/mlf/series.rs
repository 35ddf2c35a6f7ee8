//! Direct power-series summation of E_{α,β}(z) with a rigorous tail bound.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{ln_gamma, rgamma};

/// Partial sum of the defining series together with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: Complex64,
    /// Bound on |E(z) - value|: tail bound plus accumulated rounding.
    pub error_bound: f64,
    /// Number of terms actually summed.
    pub terms: usize,
    /// Σ |term_k|, the cancellation scale.
    pub abs_sum: f64,
}

// Stop once the tail drops below this fraction of the running sum.
const TAIL_REL: f64 = 1.0 / (1u64 << 56) as f64;

/// Sum z^k / Γ(αk+β) until the tail bound is negligible.
///
/// Successive term ratios |z| Γ(αk+β)/Γ(αk+α+β) decrease monotonically in k
/// (log-convexity of Γ), so once a ratio ρ ≤ 1/2 is seen the remaining tail is
/// bounded by |t_k| ρ/(1-ρ).
pub(crate) fn sum(
    alpha: f64,
    beta: f64,
    z: Complex64,
    max_terms: usize,
    table: Option<&[f64]>,
) -> Result<SeriesSum> {
    let r = z.norm();
    if r == 0.0 {
        return Ok(SeriesSum {
            value: Complex64::new(rgamma(beta), 0.0),
            error_bound: 0.0,
            terms: 1,
            abs_sum: rgamma(beta).abs(),
        });
    }
    let ln_r = r.ln();
    let theta = z.arg();
    let eps = f64::EPSILON;

    let mut value = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let mut rounding = 0.0;
    let mut zk = Complex64::new(1.0, 0.0);
    let mut direct = true;
    let mut lg = ln_gamma(beta);

    for k in 0..max_terms {
        let x = alpha * k as f64 + beta;
        let lg_next = ln_gamma(x + alpha);
        let log_mag = k as f64 * ln_r - lg;

        if direct && (x > 170.0 || !zk.is_finite() || zk.norm() > 1e290) {
            direct = false;
        }
        let (term, term_err) = if direct {
            let rg = table
                .and_then(|t| t.get(k).copied())
                .unwrap_or_else(|| rgamma(x));
            let t = zk * rg;
            (t, t.norm() * eps * (4.0 + k as f64))
        } else {
            let t = Complex64::from_polar(log_mag.exp(), k as f64 * theta);
            (
                t,
                t.norm() * eps * (4.0 + (k as f64 * ln_r).abs() + lg.abs()),
            )
        };
        value += term;
        let mag = term.norm();
        abs_sum += mag;
        rounding += term_err;

        let ratio = (ln_r + lg - lg_next).exp();
        if ratio <= 0.5 {
            let tail = mag * ratio / (1.0 - ratio);
            let done = tail <= TAIL_REL * value.norm() || tail == 0.0 || k + 1 == max_terms;
            if done {
                rounding += eps * abs_sum;
                return Ok(SeriesSum {
                    value,
                    error_bound: tail + rounding,
                    terms: k + 1,
                    abs_sum,
                });
            }
        }
        if direct {
            zk *= z;
        }
        lg = lg_next;
    }
    Err(Error::NonConverged {
        max_terms,
        modulus: r,
    })
}
