//! Two-parameter Mittag-Leffler function E_{α,β}(z) = Σ z^k / Γ(αk + β).
//!
//! Evaluation strategy:
//!
//! * |z| ≤ [`Z_DIRECT`]: direct series, accepted when cancellation costs at
//!   most five digits;
//! * larger |z| in the sector |arg z| ≥ πα/2: pole contributions plus the
//!   algebraic asymptotic expansion when it converges to full precision,
//!   otherwise Laplace inversion on an optimal parabolic contour;
//! * larger |z| with |arg z| < πα/2 is refused (exponential growth).
//!
//! Purely imaginary arguments are routed through the splitting
//! E_{α,β}(iy) = E_{2α,β}(-y²) + iy E_{2α,β+α}(-y²), whose inner arguments are
//! real and non-positive.

mod asymptotic;
mod contour;
mod series;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::special::rgamma;

pub use series::SeriesSum;

/// Complex values crossing the public surface.
pub type ComplexValue = Complex64;

/// Radius below which the direct series is tried first.
pub const Z_DIRECT: f64 = 5.0;

// Σ|t_k| / |Σ t_k| above this means the series lost too many digits.
const CANCELLATION_LIMIT: f64 = 1e5;
const DISPATCH_TERMS: usize = 400;
const TABLE_LEN: usize = 256;

/// The pair (α, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MlParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        MlParams { alpha, beta }
    }

    fn check_finite(&self) -> Result<()> {
        ensure_finite("alpha", self.alpha)?;
        ensure_finite("beta", self.beta)
    }

    fn check_beta(&self) -> Result<()> {
        if self.beta > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "beta must be positive, got {}",
                self.beta
            )))
        }
    }
}

/// Evaluator with the gamma tables for one (α, β) precomputed.
///
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone)]
pub struct MittagLeffler {
    alpha: f64,
    beta: f64,
    series_table: Vec<f64>,
    asymptotic: Vec<f64>,
}

impl MittagLeffler {
    /// Evaluator for α ∈ (0, 2), β > 0.
    pub fn new(params: MlParams) -> Result<Self> {
        params.check_finite()?;
        if !(params.alpha > 0.0 && params.alpha < 2.0) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, 2), got {}",
                params.alpha
            )));
        }
        params.check_beta()?;
        Ok(Self::build(params.alpha, params.beta))
    }

    /// Also admits α = 2, which the imaginary-axis splitting needs at α = 1.
    fn new_inner(alpha: f64, beta: f64) -> Self {
        debug_assert!(alpha > 0.0 && alpha <= 2.0 && beta > 0.0);
        Self::build(alpha, beta)
    }

    fn build(alpha: f64, beta: f64) -> Self {
        let series_table = (0..TABLE_LEN)
            .map(|k| rgamma(alpha * k as f64 + beta))
            .collect();
        MittagLeffler {
            alpha,
            beta,
            series_table,
            asymptotic: asymptotic::coefficients(alpha, beta),
        }
    }

    pub fn params(&self) -> MlParams {
        MlParams::new(self.alpha, self.beta)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        ensure_finite("Re z", z.re)?;
        ensure_finite("Im z", z.im)?;
        let r = z.norm();
        if r == 0.0 {
            return Ok(Complex64::new(rgamma(self.beta), 0.0));
        }
        if r <= Z_DIRECT {
            if let Ok(s) = series::sum(
                self.alpha,
                self.beta,
                z,
                DISPATCH_TERMS,
                Some(&self.series_table),
            ) {
                if s.abs_sum <= CANCELLATION_LIMIT * s.value.norm() {
                    return Ok(s.value);
                }
            }
        } else {
            let limit = PI * self.alpha / 2.0;
            let arg = z.arg().abs();
            if arg < limit * (1.0 - 1e-12) {
                return Err(Error::UnsupportedRegion {
                    modulus: r,
                    arg,
                    limit,
                });
            }
            if let Some(v) = asymptotic::try_eval(self.alpha, self.beta, z, &self.asymptotic) {
                return Ok(v);
            }
        }
        Ok(contour::invert(self.alpha, self.beta, z))
    }

    /// Real-argument convenience for z ≤ 0 (imaginary part dropped).
    fn eval_neg_real(&self, x: f64) -> Result<f64> {
        Ok(self.eval(Complex64::new(x, 0.0))?.re)
    }
}

/// Truncated series Σ_{k<N} z^k/Γ(αk+β) with N ≤ `max_terms` chosen adaptively.
pub fn ml_series_truncated(
    params: MlParams,
    z: ComplexValue,
    max_terms: usize,
) -> Result<SeriesSum> {
    params.check_finite()?;
    ensure_finite("Re z", z.re)?;
    ensure_finite("Im z", z.im)?;
    if params.alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {}",
            params.alpha
        )));
    }
    params.check_beta()?;
    if max_terms == 0 {
        return Err(Error::InvalidInput("max_terms must be at least 1".into()));
    }
    series::sum(params.alpha, params.beta, z, max_terms, None)
}

/// E_{α,β}(z) for α ∈ (0, 2), β > 0.
pub fn ml_eval(params: MlParams, z: ComplexValue) -> Result<ComplexValue> {
    MittagLeffler::new(params)?.eval(z)
}

/// E_{α,β}(iλf) through the splitting into two negative-real evaluations.
pub fn ml_eval_imag(params: MlParams, lambda: f64, f_val: f64) -> Result<ComplexValue> {
    ensure_finite("lambda", lambda)?;
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    ImagKernel::new(params)?.eval(lambda * f_val)
}

/// Prepared y ↦ E_{α,β}(iy) for 0 < α ≤ 1.
#[derive(Debug, Clone)]
pub struct ImagKernel {
    params: MlParams,
    even: MittagLeffler,
    odd: MittagLeffler,
}

impl ImagKernel {
    pub fn new(params: MlParams) -> Result<Self> {
        params.check_finite()?;
        if !(params.alpha > 0.0 && params.alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, 1], got {}",
                params.alpha
            )));
        }
        params.check_beta()?;
        let (a, b) = (params.alpha, params.beta);
        Ok(ImagKernel {
            params,
            even: MittagLeffler::new_inner(2.0 * a, b),
            odd: MittagLeffler::new_inner(2.0 * a, b + a),
        })
    }

    pub fn params(&self) -> MlParams {
        self.params
    }

    /// E_{α,β}(iy).
    pub fn eval(&self, y: f64) -> Result<Complex64> {
        ensure_finite("lambda * f", y)?;
        if self.params.alpha == 1.0 && self.params.beta == 1.0 {
            return Ok(Complex64::from_polar(1.0, y));
        }
        let w = -(y * y);
        let even = self.even.eval_neg_real(w)?;
        let odd = self.odd.eval_neg_real(w)?;
        Ok(Complex64::new(even, y * odd))
    }
}

/// Sector probe for calibrating the decay envelope |E(z)| ≤ C/(1+|z|).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorProbe {
    pub params: MlParams,
    pub mu: f64,
    pub radius_grid: Vec<f64>,
}

impl SectorProbe {
    /// Midpoint of the admissible opening (πα/2, min(π, πα)).
    pub fn midpoint_mu(alpha: f64) -> f64 {
        0.5 * (PI * alpha / 2.0 + (PI * alpha).min(PI))
    }

    pub fn validate(&self) -> Result<()> {
        self.params.check_finite()?;
        ensure_finite("mu", self.mu)?;
        let a = self.params.alpha;
        if !(a > 0.0 && a < 2.0) {
            return Err(Error::Domain(format!(
                "sector envelope needs 0 < alpha < 2, got {a}"
            )));
        }
        self.params.check_beta()?;
        let (lo, hi) = (PI * a / 2.0, (PI * a).min(PI));
        if !(self.mu > lo && self.mu < hi) {
            return Err(Error::Domain(format!(
                "mu = {} outside the admissible opening ({lo}, {hi})",
                self.mu
            )));
        }
        if self.radius_grid.is_empty() {
            return Err(Error::InvalidInput("radius grid is empty".into()));
        }
        for &r in &self.radius_grid {
            ensure_finite("radius", r)?;
            if r <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "radii must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Empirical estimate Ĉ = max (1+|z|)|E(z)| over the probe radii and the rays
/// arg z ∈ {±μ, ±(μ+π)/2, ±π}. A lower estimate of the true constant.
pub fn envelope_constant(probe: &SectorProbe) -> Result<f64> {
    probe.validate()?;
    let ml = MittagLeffler::new(probe.params)?;
    let rays = [probe.mu, 0.5 * (probe.mu + PI), PI];
    let mut c_hat: f64 = 0.0;
    for &r in &probe.radius_grid {
        for &phi in &rays {
            for sign in [1.0, -1.0] {
                let z = Complex64::from_polar(r, sign * phi);
                c_hat = c_hat.max((1.0 + r) * ml.eval(z)?.norm());
            }
        }
    }
    Ok(c_hat)
}

/// Radii used by [`imag_axis_constant`]: a point next to 0 and 1e-3..1e12 at
/// eight points per decade.
pub fn calibration_grid() -> Vec<f64> {
    let mut grid = vec![1e-300];
    grid.extend(geometric_grid(1e-3, 1e12, 8));
    grid
}

/// Empirical Ĉ with |E_{α,β}(iy)| ≤ Ĉ/(1+|y|) for real y, for 0 < α ≤ 1.
///
/// By the splitting, |E_{α,β}(iy)| ≤ (C₁ + |y|C₂)/(1+y²) ≤ 2max(C₁,C₂)/(1+|y|)
/// with C₁, C₂ the sector constants of E_{2α,β} and E_{2α,β+α}, estimated by
/// [`envelope_constant`] on [`calibration_grid`]. At α = 1 the inner functions
/// E_{2,·} are bounded oscillations outside the sector theory, no finite
/// constant exists, and the value returned is the supremum over the grid of
/// (1+r)|E_{2,·}(-r)|, which grows with the largest radius.
pub fn imag_axis_constant(params: MlParams) -> Result<f64> {
    params.check_finite()?;
    params.check_beta()?;
    let a = params.alpha;
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {a}")));
    }
    let inner = [
        MlParams::new(2.0 * a, params.beta),
        MlParams::new(2.0 * a, params.beta + a),
    ];
    let mut c: f64 = 0.0;
    if a < 1.0 {
        for p in inner {
            let probe = SectorProbe {
                params: p,
                mu: SectorProbe::midpoint_mu(p.alpha),
                radius_grid: calibration_grid(),
            };
            c = c.max(envelope_constant(&probe)?);
        }
    } else {
        for p in inner {
            let ml = MittagLeffler::new_inner(p.alpha, p.beta);
            for r in calibration_grid() {
                c = c.max((1.0 + r) * ml.eval_neg_real(-r)?.abs());
            }
        }
    }
    Ok(2.0 * c)
}

/// Geometric grid lo..=hi with `per_decade` points per decade.
pub fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=n)
        .map(|k| {
            if k == n {
                hi
            } else {
                lo * 10f64.powf(decades * k as f64 / n as f64)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
