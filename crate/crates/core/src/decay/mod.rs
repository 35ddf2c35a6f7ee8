//! λ-sweeps of |I_{α,β}(λ)| against the decay exponents of the cubic normal
//! forms, and the one-dimensional integrals behind the estimates.

mod reduce;

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlf::{geometric_grid, imag_axis_constant, MlParams};
use crate::phase::PhaseClass;
use crate::quad::{self, complex_fields, AmplitudeSpec, Domain, IntegralSpec, QuadOptions};

/// Decay exponent ρ of the bound ‖ψ‖_p λ^{−ρ} for a class of cubic phase.
pub fn theoretical_exponent(class: PhaseClass, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidInput(format!(
            "p must lie in (1, inf], got {p}"
        )));
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    match class {
        PhaseClass::DInf => Ok(0.5 - 0.5 * inv_p),
        PhaseClass::D4Plus | PhaseClass::D4Minus => Ok(2.0 / 3.0 - inv_p / 3.0),
        PhaseClass::A2 => Ok(1.0 / 3.0 - inv_p / 3.0),
        PhaseClass::Zero => Err(Error::UnsupportedClass(class.to_string())),
    }
}

/// q with 1/p + 1/q = 1; q = 1 for p = ∞.
pub fn holder_conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Ordinary least squares y ≈ slope·x + intercept.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateFit("non-finite point".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * points.iter().map(|p| p.0 * p.0).sum::<f64>() {
        return Err(Error::DegenerateFit("abscissas have no spread".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// K(q, λ) = ∫₀¹ (1 − (1+λx²)^{1−q}) / ((q−1)λx²) dx; the integrand tends to 1
/// as x → 0.
pub fn k_integral(q: f64, lambda: f64) -> Result<f64> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::Domain(format!("q must exceed 1, got {q}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let integrand = |x: f64| {
        let u = lambda * x * x;
        if u == 0.0 {
            return Ok(1.0);
        }
        Ok(-((1.0 - q) * u.ln_1p()).exp_m1() / ((q - 1.0) * u))
    };
    let est = quad::engine::integrate_1d(
        integrand,
        &scale_breaks(1.0 / lambda.sqrt(), 1.0),
        0.0,
        1e-13,
        100_000,
    )?;
    Ok(est.value.re)
}

/// 0, the geometric points s·10^k below `hi`, and `hi`.
fn scale_breaks(s: f64, hi: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    let mut x = s.min(hi);
    while x < hi {
        v.push(x);
        x *= 10.0;
    }
    v.push(hi);
    v
}

/// ∫₀^upper ln(1+y)/y^{3/2} dy, which tends to 2π.
///
/// Computed as ∫₀^{√upper} 2 ln(1+s²)/s² ds (y = s²), whose integrand is
/// smooth at 0.
pub fn log_integral_check(upper: f64) -> Result<f64> {
    if !(upper >= 1e3) || !upper.is_finite() {
        return Err(Error::InvalidInput(format!(
            "upper limit must be at least 1e3, got {upper}"
        )));
    }
    let integrand = |s: f64| {
        let s2 = s * s;
        Ok(if s2 == 0.0 {
            2.0
        } else {
            2.0 * s2.ln_1p() / s2
        })
    };
    let est = quad::engine::integrate_1d(
        integrand,
        &scale_breaks(1.0, upper.sqrt()),
        0.0,
        1e-14,
        100_000,
    )?;
    Ok(est.value.re)
}

/// Upper bound on 2π minus `log_integral_check(upper)`.
pub fn log_integral_tail_bound(upper: f64) -> f64 {
    (2.0 * upper.ln_1p() + 4.0) / upper.sqrt()
}

/// Pass/fail of the no-growth test plus explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub message: String,
}

/// How one λ of a sweep was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// The two-dimensional adaptive engine met the tolerance.
    Cubature,
    /// The engine ran out of cells; the value is its best estimate.
    CubatureBudgetExceeded,
    /// The engine ran out of cells and the exact inner integral reduced the
    /// problem to one dimension (α = β = 1, constant ψ only).
    Reduction,
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    #[serde(with = "complex_fields")]
    pub value: Complex64,
    pub error_estimate: f64,
    pub cells_used: usize,
    pub majorant: f64,
    pub method: Method,
}

/// Result of a λ-sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub phase_class: PhaseClass,
    pub params: MlParams,
    #[serde(serialize_with = "quad::ser_p", deserialize_with = "quad::de_p")]
    pub p: f64,
    pub q: f64,
    pub rho: f64,
    pub amplitude: AmplitudeSpec,
    pub psi_norm: f64,
    pub c_hat: f64,
    pub tol: f64,
    pub lambda_grid: Vec<f64>,
    pub moduli: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub bound_ratios: Vec<f64>,
    pub verdict: Verdict,
    /// Every |I| was at most (1 + tol) times its majorant.
    pub majorant_holds: bool,
    pub points: Vec<SweepPoint>,
}

/// The inputs of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub class: PhaseClass,
    pub params: MlParams,
    pub amplitude: AmplitudeSpec,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points_per_decade: usize,
    pub tol: f64,
    pub max_cells: usize,
}

impl ScanConfig {
    /// Defaults: λ ∈ [1, 1e5], 5 points per decade, tol 1e-6.
    pub fn new(class: PhaseClass, params: MlParams, amplitude: AmplitudeSpec) -> Self {
        ScanConfig {
            class,
            params,
            amplitude,
            lambda_min: 1.0,
            lambda_max: 1e5,
            points_per_decade: 5,
            tol: 1e-6,
            max_cells: quad::DEFAULT_MAX_CELLS,
        }
    }

    fn validate(&self) -> Result<()> {
        theoretical_exponent(self.class, self.amplitude.p)?;
        if !(self.lambda_min >= 1.0 && self.lambda_min < self.lambda_max)
            || !self.lambda_max.is_finite()
        {
            return Err(Error::InvalidInput(format!(
                "need 1 <= lambda_min < lambda_max, got [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        let decades = (self.lambda_max / self.lambda_min).log10();
        // the growth test compares the last two decades with what precedes them
        if decades <= 2.0 {
            return Err(Error::InsufficientDecades { decades });
        }
        if self.points_per_decade < 3 {
            return Err(Error::InvalidInput(format!(
                "points_per_decade must be at least 3, got {}",
                self.points_per_decade
            )));
        }
        Ok(())
    }
}

fn max_of(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(f64::NEG_INFINITY, f64::max)
}

/// No-growth rule: the largest ratio over λ ≥ λ_max/100 may exceed the largest
/// earlier ratio by at most the factor 1 + tol.
pub fn growth_verdict(lambda_grid: &[f64], ratios: &[f64], tol: f64) -> Verdict {
    let lambda_max = lambda_grid.last().copied().unwrap_or(0.0);
    let cut = lambda_max / 100.0 * (1.0 - 1e-12);
    let late = max_of(
        lambda_grid
            .iter()
            .zip(ratios)
            .filter(|(l, _)| **l >= cut)
            .map(|(_, r)| *r),
    );
    let early = max_of(
        lambda_grid
            .iter()
            .zip(ratios)
            .filter(|(l, _)| **l < cut)
            .map(|(_, r)| *r),
    );
    let pass = late <= (1.0 + tol) * early;
    let message = format!(
        "max ratio over the last two decades {late:.6e} {} (1 + {tol:e}) x earlier max {early:.6e} (growth factor {:.6})",
        if pass { "<=" } else { ">" },
        late / early
    );
    Verdict { pass, message }
}

impl DecayReport {
    /// Bound ratios |I|·λ^ρ/‖ψ‖_p for another exponent, with their verdict.
    pub fn retest(&self, rho: f64) -> (Vec<f64>, Verdict) {
        let ratios: Vec<f64> = self
            .lambda_grid
            .iter()
            .zip(&self.moduli)
            .map(|(l, m)| m * l.powf(rho) / self.psi_norm)
            .collect();
        let verdict = growth_verdict(&self.lambda_grid, &ratios, self.tol);
        (ratios, verdict)
    }

    /// CSV with columns lambda, re_I, im_I, abs_I, bound_ratio.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "re_I", "im_I", "abs_I", "bound_ratio"])?;
        for (pt, r) in self.points.iter().zip(&self.bound_ratios) {
            w.write_record(
                [pt.lambda, pt.value.re, pt.value.im, pt.value.norm(), *r].map(crate::fmt17),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sweep_point(cfg: &ScanConfig, lambda: f64, c_hat: f64) -> Result<SweepPoint> {
    let spec = IntegralSpec::new(
        cfg.params,
        lambda,
        cfg.class.canonical(),
        cfg.amplitude.clone(),
    );
    let opts = QuadOptions {
        tol: cfg.tol,
        max_cells: cfg.max_cells,
    };
    let r = quad::integrate(&spec, &opts)?;
    let (value, error_estimate, method) = if !r.budget_exceeded {
        (r.value, r.error_estimate, Method::Cubature)
    } else {
        match reduce::reduced(&spec, cfg.tol)? {
            Some((v, e)) => (v, e, Method::Reduction),
            None => (r.value, r.error_estimate, Method::CubatureBudgetExceeded),
        }
    };
    let m = quad::envelope_integral(&spec, c_hat, &opts)?;
    Ok(SweepPoint {
        lambda,
        value,
        error_estimate,
        cells_used: r.cells_used,
        majorant: m.value.re,
        method,
    })
}

/// Sweeps λ over a geometric grid on the canonical phase of `cfg.class` over
/// the unit square and tests the bound ratios |I|·λ^ρ/‖ψ‖_p for growth.
pub fn decay_scan(cfg: &ScanConfig) -> Result<DecayReport> {
    cfg.validate()?;
    let rho = theoretical_exponent(cfg.class, cfg.amplitude.p)?;
    let psi_norm = quad::pnorm(&cfg.amplitude, &Domain::UNIT)?;
    if !(psi_norm > 0.0) || !psi_norm.is_finite() {
        return Err(Error::InvalidInput(format!(
            "amplitude norm must be positive and finite, got {psi_norm}"
        )));
    }
    let c_hat = imag_axis_constant(cfg.params)?;
    let grid = geometric_grid(cfg.lambda_min, cfg.lambda_max, cfg.points_per_decade);
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&l| sweep_point(cfg, l, c_hat))
        .collect::<Result<_>>()?;

    let moduli: Vec<f64> = points.iter().map(|p| p.value.norm()).collect();
    let bound_ratios: Vec<f64> = grid
        .iter()
        .zip(&moduli)
        .map(|(l, m)| m * l.powf(rho) / psi_norm)
        .collect();
    let upper: Vec<(f64, f64)> = grid
        .iter()
        .zip(&moduli)
        .skip(grid.len() / 2)
        .map(|(l, m)| (l.ln(), -m.ln()))
        .collect();
    let (fitted_slope, fitted_intercept) = fit_loglog(&upper)?;
    let verdict = growth_verdict(&grid, &bound_ratios, cfg.tol);
    let majorant_holds = points
        .iter()
        .all(|p| p.value.norm() <= p.majorant * (1.0 + cfg.tol));
    Ok(DecayReport {
        phase_class: cfg.class,
        params: cfg.params,
        p: cfg.amplitude.p,
        q: holder_conjugate(cfg.amplitude.p),
        rho,
        amplitude: cfg.amplitude.clone(),
        psi_norm,
        c_hat,
        tol: cfg.tol,
        lambda_grid: grid,
        moduli,
        fitted_slope,
        fitted_intercept,
        bound_ratios,
        verdict,
        majorant_holds,
        points,
    })
}
