//! The two-dimensional integral I_{α,β}(λ) = ∬ E_{α,β}(iλ f(x)) ψ(x) dx over a
//! rectangle, and the majorant Ĉ·∬ |ψ| / (1 + λ|f|).
//!
//! The initial mesh puts cell edges on the zero lines of the cubic phase and,
//! for power-singular amplitudes, grades geometrically toward the singular
//! lines; adaptive refinement takes it from there.

pub(crate) mod engine;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_finite, Error, Result};
use crate::mlf::{ImagKernel, MlParams};
use crate::phase::{self, CubicForm};
use crate::special::rgamma;
use engine::{Outer, Slab};

/// Default absolute/relative target for `integrate`.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default leaf-cell budget.
pub const DEFAULT_MAX_CELLS: usize = 200_000;
/// Geometric ratio of the graded mesh toward singular lines.
pub const GRADING_RATIO: f64 = 0.25;
const GRADING_LEVELS: i32 = 16;

/// Axis-aligned rectangle [x1min, x1max] × [x2min, x2max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Domain {
    pub x1min: f64,
    pub x1max: f64,
    pub x2min: f64,
    pub x2max: f64,
}

impl Domain {
    pub const UNIT: Domain = Domain {
        x1min: 0.0,
        x1max: 1.0,
        x2min: 0.0,
        x2max: 1.0,
    };

    pub fn area(&self) -> f64 {
        (self.x1max - self.x1min) * (self.x2max - self.x2min)
    }

    fn validate(&self) -> Result<()> {
        for (n, v) in [
            ("x1min", self.x1min),
            ("x1max", self.x1max),
            ("x2min", self.x2min),
            ("x2max", self.x2max),
        ] {
            ensure_finite(n, v)?;
        }
        if self.x1min < self.x1max && self.x2min < self.x2max {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "empty domain {:?}",
                <[f64; 4]>::from(*self)
            )))
        }
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain::UNIT
    }
}

impl From<[f64; 4]> for Domain {
    fn from(d: [f64; 4]) -> Self {
        Domain {
            x1min: d[0],
            x1max: d[1],
            x2min: d[2],
            x2max: d[3],
        }
    }
}

impl From<Domain> for [f64; 4] {
    fn from(d: Domain) -> Self {
        [d.x1min, d.x1max, d.x2min, d.x2max]
    }
}

/// Shape of the amplitude ψ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplitudeKind {
    Constant {
        c: f64,
    },
    /// |x₁ − a₁|^{−γ₁} |x₂ − a₂|^{−γ₂}
    PowerSingular {
        gamma1: f64,
        gamma2: f64,
        anchor: [f64; 2],
    },
    /// Bilinear interpolation of `values[i][j]` at the uniform node
    /// (x1min + i·h₁, x2min + j·h₂) spanning the domain.
    Grid {
        values: Vec<Vec<f64>>,
    },
}

/// Amplitude together with the Lebesgue exponent p ∈ (1, ∞] it is measured in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSpec {
    #[serde(flatten)]
    pub kind: AmplitudeKind,
    #[serde(
        serialize_with = "ser_p",
        deserialize_with = "de_p",
        default = "infinite"
    )]
    pub p: f64,
}

fn infinite() -> f64 {
    f64::INFINITY
}

pub(crate) fn ser_p<S: Serializer>(p: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

pub(crate) fn de_p<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum P {
        Num(f64),
        Text(String),
    }
    match P::deserialize(d)? {
        P::Num(v) => Ok(v),
        P::Text(t) if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
            Ok(f64::INFINITY)
        }
        P::Text(t) => Err(serde::de::Error::custom(format!(
            "p must be a number or \"inf\", got \"{t}\""
        ))),
    }
}

impl AmplitudeSpec {
    pub fn constant(c: f64) -> Self {
        AmplitudeSpec {
            kind: AmplitudeKind::Constant { c },
            p: f64::INFINITY,
        }
    }

    pub fn power_singular(gamma1: f64, gamma2: f64, anchor: [f64; 2], p: f64) -> Self {
        AmplitudeSpec {
            kind: AmplitudeKind::PowerSingular {
                gamma1,
                gamma2,
                anchor,
            },
            p,
        }
    }

    pub fn grid(values: Vec<Vec<f64>>, p: f64) -> Self {
        AmplitudeSpec {
            kind: AmplitudeKind::Grid { values },
            p,
        }
    }

    /// Checks the invariants on the given domain.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::InvalidInput(format!(
                "p must lie in (1, inf], got {}",
                self.p
            )));
        }
        match &self.kind {
            AmplitudeKind::Constant { c } => ensure_finite("c", *c),
            AmplitudeKind::PowerSingular {
                gamma1,
                gamma2,
                anchor,
            } => {
                ensure_finite("gamma1", *gamma1)?;
                ensure_finite("gamma2", *gamma2)?;
                ensure_finite("anchor", anchor[0])?;
                ensure_finite("anchor", anchor[1])?;
                if *gamma1 < 0.0 || *gamma2 < 0.0 {
                    return Err(Error::InvalidInput(
                        "exponents gamma1, gamma2 must be non-negative".into(),
                    ));
                }
                let on_edge = |a: f64, lo: f64, hi: f64| a == lo || a == hi;
                let inside = |a: f64, lo: f64, hi: f64| a >= lo && a <= hi;
                let on_boundary = (on_edge(anchor[0], domain.x1min, domain.x1max)
                    && inside(anchor[1], domain.x2min, domain.x2max))
                    || (on_edge(anchor[1], domain.x2min, domain.x2max)
                        && inside(anchor[0], domain.x1min, domain.x1max));
                if !on_boundary {
                    return Err(Error::InvalidInput(format!(
                        "anchor {anchor:?} is not on the domain boundary"
                    )));
                }
                for (g, a) in [(*gamma1, anchor[0]), (*gamma2, anchor[1])] {
                    if g > 0.0 && (self.p.is_infinite() || g * self.p >= 1.0) {
                        return Err(Error::DivergentNorm(format!(
                            "|x - {a}|^(-{g}) is not in L^{}",
                            self.p
                        )));
                    }
                }
                Ok(())
            }
            AmplitudeKind::Grid { values } => {
                let n2 = values.first().map_or(0, Vec::len);
                if values.len() < 2 || n2 < 2 || values.iter().any(|r| r.len() != n2) {
                    return Err(Error::InvalidInput(
                        "grid amplitude needs a rectangular table of at least 2x2 values".into(),
                    ));
                }
                values
                    .iter()
                    .flatten()
                    .try_for_each(|v| ensure_finite("grid value", *v))
            }
        }
    }

    /// ψ(x₁, x₂) on `domain`.
    pub fn eval(&self, domain: &Domain, x1: f64, x2: f64) -> f64 {
        match &self.kind {
            AmplitudeKind::Constant { c } => *c,
            AmplitudeKind::PowerSingular {
                gamma1,
                gamma2,
                anchor,
            } => {
                let f = |d: f64, g: f64| if g == 0.0 { 1.0 } else { d.abs().powf(-g) };
                f(x1 - anchor[0], *gamma1) * f(x2 - anchor[1], *gamma2)
            }
            AmplitudeKind::Grid { values } => {
                let (n1, n2) = (values.len() - 1, values[0].len() - 1);
                let u = ((x1 - domain.x1min) / (domain.x1max - domain.x1min) * n1 as f64)
                    .clamp(0.0, n1 as f64);
                let v = ((x2 - domain.x2min) / (domain.x2max - domain.x2min) * n2 as f64)
                    .clamp(0.0, n2 as f64);
                let (i, j) = (
                    (u.floor() as usize).min(n1 - 1),
                    (v.floor() as usize).min(n2 - 1),
                );
                let (s, t) = (u - i as f64, v - j as f64);
                (1.0 - s) * ((1.0 - t) * values[i][j] + t * values[i][j + 1])
                    + s * ((1.0 - t) * values[i + 1][j] + t * values[i + 1][j + 1])
            }
        }
    }

    /// Mesh lines along x₁ (`axis` 0) or x₂ (`axis` 1) where ψ is singular or
    /// not smooth.
    fn breakpoints(&self, domain: &Domain, axis: usize) -> Vec<f64> {
        let (lo, hi) = if axis == 0 {
            (domain.x1min, domain.x1max)
        } else {
            (domain.x2min, domain.x2max)
        };
        match &self.kind {
            AmplitudeKind::Constant { .. } => Vec::new(),
            AmplitudeKind::PowerSingular {
                gamma1,
                gamma2,
                anchor,
            } => {
                let (g, a) = if axis == 0 {
                    (*gamma1, anchor[0])
                } else {
                    (*gamma2, anchor[1])
                };
                if g == 0.0 {
                    return Vec::new();
                }
                let mut out = vec![a];
                for side in [lo - a, hi - a] {
                    if side.abs() > 0.0 {
                        out.extend((1..=GRADING_LEVELS).map(|k| a + side * GRADING_RATIO.powi(k)));
                    }
                }
                out
            }
            AmplitudeKind::Grid { values } => {
                let n = if axis == 0 {
                    values.len() - 1
                } else {
                    values[0].len() - 1
                };
                (1..n)
                    .map(|k| lo + (hi - lo) * k as f64 / n as f64)
                    .collect()
            }
        }
    }
}

/// One integral I_{α,β}(λ) with its phase, amplitude and domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralSpec {
    #[serde(flatten)]
    pub params: MlParams,
    pub lambda: f64,
    pub phase: CubicForm,
    pub amplitude: AmplitudeSpec,
    #[serde(default)]
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl IntegralSpec {
    pub fn new(params: MlParams, lambda: f64, phase: CubicForm, amplitude: AmplitudeSpec) -> Self {
        IntegralSpec {
            params,
            lambda,
            phase,
            amplitude,
            domain: Domain::UNIT,
            tol: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("alpha", self.params.alpha)?;
        ensure_finite("beta", self.params.beta)?;
        ensure_finite("lambda", self.lambda)?;
        if !(self.params.alpha > 0.0 && self.params.alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha must lie in (0, 1], got {}",
                self.params.alpha
            )));
        }
        if !(self.params.beta > 0.0) {
            return Err(Error::Domain(format!(
                "beta must be positive, got {}",
                self.params.beta
            )));
        }
        if self.lambda < 0.0 {
            return Err(Error::Domain(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        self.phase.validate()?;
        self.domain.validate()?;
        self.amplitude.validate(&self.domain)
    }
}

/// Outcome of `integrate` / `envelope_integral`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    #[serde(with = "complex_fields")]
    pub value: Complex64,
    pub error_estimate: f64,
    pub cells_used: usize,
    pub majorant: Option<f64>,
    /// The cell budget ran out before the tolerance was met; `value` is the
    /// best estimate available.
    pub budget_exceeded: bool,
}

impl QuadResult {
    /// Turns a budget overrun into `Error::BudgetExceeded`.
    pub fn into_checked(self, budget: usize) -> Result<QuadResult> {
        if self.budget_exceeded {
            Err(Error::BudgetExceeded {
                budget,
                error_estimate: self.error_estimate,
            })
        } else {
            Ok(self)
        }
    }
}

pub(crate) mod complex_fields {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct ReIm {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let v = ReIm::deserialize(d)?;
        Ok(Complex64::new(v.re, v.im))
    }
}

/// Tolerance and budget for the adaptive engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_cells: usize,
}

impl QuadOptions {
    pub fn new(tol: f64) -> Self {
        QuadOptions {
            tol,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 1e-12 && self.tol < 1e-2) {
            return Err(Error::InvalidInput(format!(
                "tol must lie in (1e-12, 1e-2), got {}",
                self.tol
            )));
        }
        if self.max_cells == 0 {
            return Err(Error::InvalidInput("cell budget must be positive".into()));
        }
        Ok(())
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions::new(DEFAULT_TOL)
    }
}

fn sorted_breaks(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = std::iter::once(lo)
        .chain(std::iter::once(hi))
        .chain(extra)
        .filter(|x| *x >= lo && *x <= hi)
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Initial cells: a tensor grid on the axis breakpoints, with every cell that
/// a slanted zero line crosses cut along that line.
fn initial_mesh(spec: &IntegralSpec) -> Result<Vec<Slab>> {
    let d = &spec.domain;
    let dirs = phase::real_root_directions(&spec.phase, phase::DEFAULT_TOL)?;
    let mut b1 = spec.amplitude.breakpoints(d, 0);
    let mut b2 = spec.amplitude.breakpoints(d, 1);
    // slopes x₂ = m·x₁ of slanted zero lines
    let mut slopes = Vec::new();
    for [u, v] in dirs {
        if v.abs() <= 1e-14 {
            b2.push(0.0);
        } else if u.abs() <= 1e-14 {
            b1.push(0.0);
        } else {
            slopes.push(v / u);
        }
    }
    if !slopes.is_empty() {
        b1.push(0.0);
        b2.push(0.0);
    }
    let xs = sorted_breaks(d.x1min, d.x1max, b1);
    let ys = sorted_breaks(d.x2min, d.x2max, b2);
    let mut cells = Vec::new();
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            cut_rectangle([wx[0], wx[1]], [wy[0], wy[1]], &slopes, &mut cells);
        }
    }
    Ok(cells)
}

fn cut_rectangle(x: [f64; 2], y: [f64; 2], slopes: &[f64], out: &mut Vec<Slab>) {
    // a line x₂ = m·x₁ crosses the interior iff x₂ − m·x₁ changes sign strictly
    let crossing: Vec<f64> = slopes
        .iter()
        .copied()
        .filter(|&m| {
            let vals = [
                y[0] - m * x[0],
                y[0] - m * x[1],
                y[1] - m * x[0],
                y[1] - m * x[1],
            ];
            let scale = vals.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            let eps = 1e-12 * scale;
            vals.iter().any(|&v| v > eps) && vals.iter().any(|&v| v < -eps)
        })
        .collect();
    if crossing.is_empty() {
        out.push(Slab::rect(x, y));
        return;
    }
    // shallow lines are graphs over x₁, steep ones over x₂
    let steep = crossing.iter().all(|m| m.abs() > 1.0);
    let (outer, (a, b), (c, d), ks): (Outer, _, _, Vec<f64>) = if steep {
        (
            Outer::X2,
            (y[0], y[1]),
            (x[0], x[1]),
            crossing.iter().map(|m| 1.0 / m).collect(),
        )
    } else {
        (Outer::X1, (x[0], x[1]), (y[0], y[1]), crossing)
    };
    // inner = k·s; split the outer range where a line leaves through the
    // top or bottom so each line spans its whole sub-interval
    let mut cuts = vec![a, b];
    for &k in &ks {
        for edge in [c, d] {
            let s = edge / k;
            if s > a && s < b {
                cuts.push(s);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let mut inner: Vec<[f64; 2]> = ks
            .iter()
            .filter(|&&k| k * mid > c && k * mid < d)
            .map(|&k| [0.0, k])
            .collect();
        inner.sort_by(|p, q| (p[1] * mid).total_cmp(&(q[1] * mid)));
        let mut bounds = vec![[c, 0.0]];
        bounds.extend(inner);
        bounds.push([d, 0.0]);
        for bw in bounds.windows(2) {
            out.push(Slab {
                outer,
                a: w[0],
                b: w[1],
                lo: bw[0],
                hi: bw[1],
            });
        }
    }
}

/// I_{α,β}(λ) = ∬ E_{α,β}(iλ f(x)) ψ(x) dx with absolute error estimate
/// ≤ tol·(1 + |I|) unless the cell budget runs out (flagged in the result).
pub fn integrate(spec: &IntegralSpec, opts: &QuadOptions) -> Result<QuadResult> {
    spec.validate()?;
    opts.validate()?;
    let domain = spec.domain;
    let amp = &spec.amplitude;
    let phase = spec.phase;
    let lambda = spec.lambda;
    let mesh = initial_mesh(spec)?;
    let est = if lambda == 0.0 {
        let k0 = rgamma(spec.params.beta);
        engine::integrate_2d(
            mesh,
            &|x1, x2| Ok(Complex64::new(k0 * amp.eval(&domain, x1, x2), 0.0)),
            opts.tol,
            opts.max_cells,
        )?
    } else {
        let kernel = ImagKernel::new(spec.params)?;
        let f = |x1: f64, x2: f64| {
            Ok(kernel.eval(lambda * phase.eval(x1, x2))? * amp.eval(&domain, x1, x2))
        };
        engine::integrate_2d(mesh, &f, opts.tol, opts.max_cells)?
    };
    Ok(QuadResult {
        value: est.value,
        error_estimate: est.error,
        cells_used: est.cells,
        majorant: None,
        budget_exceeded: est.exhausted,
    })
}

/// Ĉ·∬ |ψ(x)| / (1 + λ|f(x)|) dx, computed with the same engine.
pub fn envelope_integral(
    spec: &IntegralSpec,
    c_hat: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    spec.validate()?;
    opts.validate()?;
    if !(c_hat > 0.0) || c_hat.is_nan() {
        return Err(Error::InvalidInput(format!(
            "C_hat must be positive, got {c_hat}"
        )));
    }
    let domain = spec.domain;
    let amp = &spec.amplitude;
    let phase = spec.phase;
    let lambda = spec.lambda;
    let f = |x1: f64, x2: f64| {
        Ok(Complex64::new(
            amp.eval(&domain, x1, x2).abs() / (1.0 + lambda * phase.eval(x1, x2).abs()),
            0.0,
        ))
    };
    let est = engine::integrate_2d(initial_mesh(spec)?, &f, opts.tol, opts.max_cells)?;
    let value = c_hat * est.value.re;
    Ok(QuadResult {
        value: Complex64::new(value, 0.0),
        error_estimate: c_hat * est.error,
        cells_used: est.cells,
        majorant: Some(value),
        budget_exceeded: est.exhausted,
    })
}

/// ∫_lo^hi |x − a|^{−g} dx for g < 1.
fn power_integral(a: f64, g: f64, lo: f64, hi: f64) -> f64 {
    let prim = |d: f64| d.powf(1.0 - g) / (1.0 - g);
    if a <= lo {
        prim(hi - a) - prim(lo - a)
    } else if a >= hi {
        prim(a - lo) - prim(a - hi)
    } else {
        prim(a - lo) + prim(hi - a)
    }
}

/// ‖ψ‖_{L^p(domain)}; the essential supremum when p = ∞.
pub fn pnorm(amplitude: &AmplitudeSpec, domain: &Domain) -> Result<f64> {
    domain.validate()?;
    amplitude.validate(domain)?;
    let p = amplitude.p;
    match &amplitude.kind {
        AmplitudeKind::Constant { c } => Ok(if p.is_infinite() {
            c.abs()
        } else {
            c.abs() * domain.area().powf(1.0 / p)
        }),
        AmplitudeKind::PowerSingular {
            gamma1,
            gamma2,
            anchor,
        } => {
            let axes = [
                (*gamma1, anchor[0], domain.x1min, domain.x1max),
                (*gamma2, anchor[1], domain.x2min, domain.x2max),
            ];
            if p.is_infinite() {
                // validation leaves only γ₁ = γ₂ = 0 here
                Ok(1.0)
            } else {
                Ok(axes
                    .iter()
                    .map(|&(g, a, lo, hi)| power_integral(a, g * p, lo, hi))
                    .product::<f64>()
                    .powf(1.0 / p))
            }
        }
        AmplitudeKind::Grid { values } => {
            if p.is_infinite() {
                // bilinear interpolation attains its extrema at the nodes
                return Ok(values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())));
            }
            let cells = {
                let xs =
                    sorted_breaks(domain.x1min, domain.x1max, amplitude.breakpoints(domain, 0));
                let ys =
                    sorted_breaks(domain.x2min, domain.x2max, amplitude.breakpoints(domain, 1));
                let mut v = Vec::new();
                for wx in xs.windows(2) {
                    for wy in ys.windows(2) {
                        v.push(Slab::rect([wx[0], wx[1]], [wy[0], wy[1]]));
                    }
                }
                v
            };
            let f = |x1: f64, x2: f64| {
                Ok(Complex64::new(
                    amplitude.eval(domain, x1, x2).abs().powf(p),
                    0.0,
                ))
            };
            let est = engine::integrate_2d(cells, &f, 1e-12, DEFAULT_MAX_CELLS)?;
            Ok(est.value.re.max(0.0).powf(1.0 / p))
        }
    }
}
