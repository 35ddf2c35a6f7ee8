//! Homogeneous binary cubics c30·x₁³ + c21·x₁²x₂ + c12·x₁x₂² + c03·x₂³, their
//! real normal forms and the linear change of variables reaching them.
//!
//! The reduction works from the projective roots of the form: a chart is
//! rotated so that the leading coefficient is as large as possible, the roots
//! of the dehomogenized cubic come from the companion matrix, and the multiple
//! (or lone real) root is sent to a coordinate axis.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Default multiplicity threshold.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Coefficients of c30·x₁³ + c21·x₁²x₂ + c12·x₁x₂² + c03·x₂³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct CubicForm {
    pub c30: f64,
    pub c21: f64,
    pub c12: f64,
    pub c03: f64,
}

impl CubicForm {
    pub const fn new(c30: f64, c21: f64, c12: f64, c03: f64) -> Self {
        CubicForm { c30, c21, c12, c03 }
    }

    pub fn coeffs(&self) -> [f64; 4] {
        [self.c30, self.c21, self.c12, self.c03]
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        ((self.c30 * x1 + self.c21 * x2) * x1 + self.c12 * x2 * x2) * x1 + self.c03 * x2 * x2 * x2
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn neg(&self) -> Self {
        CubicForm::new(-self.c30, -self.c21, -self.c12, -self.c03)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, c) in ["c30", "c21", "c12", "c03"].iter().zip(self.coeffs()) {
            ensure_finite(name, c)?;
        }
        Ok(())
    }

    /// Largest coefficient difference.
    pub fn distance(&self, other: &CubicForm) -> f64 {
        self.coeffs()
            .iter()
            .zip(other.coeffs())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl From<[f64; 4]> for CubicForm {
    fn from(c: [f64; 4]) -> Self {
        CubicForm::new(c[0], c[1], c[2], c[3])
    }
}

impl From<CubicForm> for [f64; 4] {
    fn from(f: CubicForm) -> Self {
        f.coeffs()
    }
}

/// Real orbits of binary cubics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhaseClass {
    DInf,
    D4Plus,
    D4Minus,
    A2,
    Zero,
}

impl PhaseClass {
    pub const ALL: [PhaseClass; 5] = [
        PhaseClass::DInf,
        PhaseClass::D4Plus,
        PhaseClass::D4Minus,
        PhaseClass::A2,
        PhaseClass::Zero,
    ];

    /// x₁²x₂, x₁²x₂ + x₂³, x₁²x₂ − x₂³, x₁³ or 0.
    pub fn canonical(self) -> CubicForm {
        match self {
            PhaseClass::DInf => CubicForm::new(0.0, 1.0, 0.0, 0.0),
            PhaseClass::D4Plus => CubicForm::new(0.0, 1.0, 0.0, 1.0),
            PhaseClass::D4Minus => CubicForm::new(0.0, 1.0, 0.0, -1.0),
            PhaseClass::A2 => CubicForm::new(1.0, 0.0, 0.0, 0.0),
            PhaseClass::Zero => CubicForm::new(0.0, 0.0, 0.0, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhaseClass::DInf => "DInf",
            PhaseClass::D4Plus => "D4Plus",
            PhaseClass::D4Minus => "D4Minus",
            PhaseClass::A2 => "A2",
            PhaseClass::Zero => "Zero",
        }
    }
}

impl fmt::Display for PhaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhaseClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dinf" | "d_inf" => Ok(PhaseClass::DInf),
            "d4plus" | "d4+" => Ok(PhaseClass::D4Plus),
            "d4minus" | "d4-" => Ok(PhaseClass::D4Minus),
            "a2" => Ok(PhaseClass::A2),
            "zero" => Ok(PhaseClass::Zero),
            _ => Err(Error::InvalidInput(format!("unknown phase class '{s}'"))),
        }
    }
}

/// The substitution x ↦ T·x together with a positive factor on the form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearChange {
    pub t11: f64,
    pub t12: f64,
    pub t21: f64,
    pub t22: f64,
    pub scale: f64,
}

impl LinearChange {
    pub const IDENTITY: LinearChange = LinearChange {
        t11: 1.0,
        t12: 0.0,
        t21: 0.0,
        t22: 1.0,
        scale: 1.0,
    };

    pub fn new(t11: f64, t12: f64, t21: f64, t22: f64) -> Self {
        LinearChange {
            t11,
            t12,
            t21,
            t22,
            scale: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.t11 * self.t22 - self.t12 * self.t21
    }

    /// Spectral condition number of the matrix part.
    pub fn condition(&self) -> f64 {
        condition_2x2(self.t11, self.t12, self.t21, self.t22)
    }

    fn inverse(&self) -> LinearChange {
        let det = self.det();
        LinearChange {
            t11: self.t22 / det,
            t12: -self.t12 / det,
            t21: -self.t21 / det,
            t22: self.t11 / det,
            scale: 1.0 / self.scale,
        }
    }

    /// Random T = R(θ₁)·diag(s, s/κ)·R(θ₂), possibly reflected, with
    /// condition number κ drawn log-uniformly from [1, max_condition].
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_condition: f64) -> Self {
        let kappa = max_condition.max(1.0).powf(rng.gen::<f64>());
        let s = 2f64.powf(rng.gen_range(-1.0..1.0)) * kappa.sqrt();
        let (a, b) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let (ca, sa, cb, sb) = (a.cos(), a.sin(), b.cos(), b.sin());
        let (d1, mut d2) = (s, s / kappa);
        if rng.gen::<bool>() {
            d2 = -d2;
        }
        // [ca -sa; sa ca] · diag(d1, d2) · [cb -sb; sb cb]
        LinearChange::new(
            ca * d1 * cb - sa * d2 * sb,
            -ca * d1 * sb - sa * d2 * cb,
            sa * d1 * cb + ca * d2 * sb,
            -sa * d1 * sb + ca * d2 * cb,
        )
    }
}

fn condition_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let det = (a * d - b * c).abs();
    if det == 0.0 {
        return f64::INFINITY;
    }
    let fro = a * a + b * b + c * c + d * d;
    let disc = ((fro - 2.0 * det) * (fro + 2.0 * det)).max(0.0).sqrt();
    (fro + disc) / (2.0 * det)
}

// cubic in (x1, x2) with coefficients of x1^(3-j) x2^j
type Poly3 = [f64; 4];

fn mul_linear(p: &[f64], l: [f64; 2]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (j, &c) in p.iter().enumerate() {
        out[j] += c * l[0];
        out[j + 1] += c * l[1];
    }
    out
}

fn substitute(form: &CubicForm, l1: [f64; 2], l2: [f64; 2]) -> Poly3 {
    let c = form.coeffs();
    let mut out = [0.0; 4];
    for (i, &ci) in c.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        // ci · l1^(3-i) · l2^i
        let mut p = vec![ci];
        for _ in 0..3 - i {
            p = mul_linear(&p, l1);
        }
        for _ in 0..i {
            p = mul_linear(&p, l2);
        }
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// Coefficients of scale · f(t11·x₁ + t12·x₂, t21·x₁ + t22·x₂).
pub fn apply_linear_change(form: &CubicForm, t: &LinearChange) -> Result<CubicForm> {
    form.validate()?;
    for (name, v) in [
        ("t11", t.t11),
        ("t12", t.t12),
        ("t21", t.t21),
        ("t22", t.t22),
        ("scale", t.scale),
    ] {
        ensure_finite(name, v)?;
    }
    if t.scale <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "scale must be positive, got {}",
            t.scale
        )));
    }
    let det = t.det();
    let norm2 = t.t11 * t.t11 + t.t12 * t.t12 + t.t21 * t.t21 + t.t22 * t.t22;
    if det.abs() < 1e-12 * norm2 || norm2 == 0.0 {
        return Err(Error::SingularTransform { det });
    }
    let p = substitute(form, [t.t11, t.t12], [t.t21, t.t22]);
    Ok(CubicForm::from(p.map(|c| c * t.scale)))
}

/// b²c² − 4ac³ − 4b³d − 27a²d² + 18abcd for a x₁³ + b x₁²x₂ + c x₁x₂² + d x₂³.
///
/// Positive for three distinct real roots, negative for one real root and a
/// complex pair, zero for a repeated root.
pub fn discriminant(form: &CubicForm) -> f64 {
    let [a, b, c, d] = form.coeffs();
    b * b * c * c - 4.0 * a * c * c * c - 4.0 * b * b * b * d - 27.0 * a * a * d * d
        + 18.0 * a * b * c * d
}

/// A rotated, power-of-two rescaled chart in which the x₁³ coefficient
/// dominates, so every projective root is a finite number t = u/v.
struct Chart {
    exp: i32,
    cos: f64,
    sin: f64,
    g: Poly3,
}

impl Chart {
    fn new(form: &CubicForm) -> Chart {
        let (_, exp) = libm::frexp(form.max_abs());
        let scaled = CubicForm::from(form.coeffs().map(|c| libm::ldexp(c, -exp)));
        let best = (0..6)
            .map(|k| k as f64 * PI / 6.0)
            .max_by(|a, b| {
                scaled
                    .eval(a.cos(), a.sin())
                    .abs()
                    .total_cmp(&scaled.eval(b.cos(), b.sin()).abs())
            })
            .unwrap_or(0.0);
        let (cos, sin) = (best.cos(), best.sin());
        let g = substitute(&scaled, [cos, -sin], [sin, cos]);
        Chart { exp, cos, sin, g }
    }

    /// Linear form u − r·v written in the original coordinates.
    fn root_form(&self, r: f64) -> [f64; 2] {
        [self.cos + self.sin * r, self.sin - self.cos * r]
    }

    /// The chart rotation: takes chart points, and coefficient vectors of chart
    /// linear forms, to original coordinates.
    fn to_original(&self, u: f64, v: f64) -> [f64; 2] {
        [self.cos * u - self.sin * v, self.sin * u + self.cos * v]
    }

    fn peval(&self, t: f64) -> f64 {
        let [a, b, c, d] = self.g;
        ((a * t + b) * t + c) * t + d
    }

    fn dpeval(&self, t: f64) -> f64 {
        let [a, b, c, _] = self.g;
        (3.0 * a * t + 2.0 * b) * t + c
    }

    fn roots(&self) -> [Complex64; 3] {
        let [a, b, c, d] = self.g;
        let m = Matrix3::new(-b / a, -c / a, -d / a, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let ev = m.complex_eigenvalues();
        [ev[0], ev[1], ev[2]]
    }

    fn relative_residual(&self, fit: Poly3) -> f64 {
        let norm = self.g.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        self.g
            .iter()
            .zip(fit)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / norm
    }

    /// Candidate triple root −b/(3a) and the residual of a(t − r)³.
    fn triple_root(&self) -> (f64, f64) {
        let a = self.g[0];
        let r = -self.g[1] / (3.0 * a);
        (
            r,
            self.relative_residual([a, -3.0 * a * r, 3.0 * a * r * r, -a * r * r * r]),
        )
    }

    /// Best double root r_d, the simple root r_s, and the residual of
    /// a(t − r_d)²(t − r_s).
    fn double_root(&self) -> (f64, f64, f64) {
        let z = self.roots();
        let (i, j) = [(0, 1), (0, 2), (1, 2)]
            .into_iter()
            .min_by(|p, q| {
                (z[p.0] - z[p.1])
                    .norm()
                    .total_cmp(&(z[q.0] - z[q.1]).norm())
            })
            .unwrap_or((0, 1));
        let mut rd = 0.5 * (z[i] + z[j]).re;
        let [a, b, _, _] = self.g;
        for _ in 0..4 {
            let curv = 6.0 * a * rd + 2.0 * b;
            if curv == 0.0 {
                break;
            }
            let step = self.dpeval(rd) / curv;
            if !step.is_finite() {
                break;
            }
            rd -= step;
        }
        let rs = -b / a - 2.0 * rd;
        let fit = [
            a,
            a * (-2.0 * rd - rs),
            a * (rd * rd + 2.0 * rd * rs),
            -a * rd * rd * rs,
        ];
        (rd, rs, self.relative_residual(fit))
    }

    fn refine_simple(&self, mut r: f64) -> f64 {
        for _ in 0..4 {
            let d = self.dpeval(r);
            if d == 0.0 {
                break;
            }
            let step = self.peval(r) / d;
            if !step.is_finite() {
                break;
            }
            r -= step;
        }
        r
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "tol must lie in (0, 1), got {tol}"
        )))
    }
}

/// Real orbit of `form` under GL(2, ℝ).
///
/// Multiplicities are decided from the residual of the best cubic with a
/// triple (resp. double) root, relative to the coefficient norm; the sign of
/// the discriminant separates the two simple-root classes.
pub fn classify(form: &CubicForm, tol: f64) -> Result<PhaseClass> {
    form.validate()?;
    check_tol(tol)?;
    if form.max_abs() < tol {
        return Ok(PhaseClass::Zero);
    }
    let chart = Chart::new(form);
    Ok(classify_chart(&chart, tol))
}

fn classify_chart(chart: &Chart, tol: f64) -> PhaseClass {
    if chart.triple_root().1 <= tol {
        return PhaseClass::A2;
    }
    if chart.double_root().2 <= tol {
        return PhaseClass::DInf;
    }
    let g = CubicForm::from(chart.g);
    if discriminant(&g) > 0.0 {
        PhaseClass::D4Minus
    } else {
        PhaseClass::D4Plus
    }
}

/// Unit directions (x₁, x₂) of the real lines on which `form` vanishes, one
/// per distinct real root. Empty for the zero form.
pub fn real_root_directions(form: &CubicForm, tol: f64) -> Result<Vec<[f64; 2]>> {
    form.validate()?;
    check_tol(tol)?;
    if form.max_abs() < tol {
        return Ok(Vec::new());
    }
    let chart = Chart::new(form);
    let roots: Vec<f64> = match classify_chart(&chart, tol) {
        PhaseClass::A2 => vec![chart.triple_root().0],
        PhaseClass::DInf => {
            let (rd, rs, _) = chart.double_root();
            vec![rd, chart.refine_simple(rs)]
        }
        PhaseClass::D4Minus => chart
            .roots()
            .iter()
            .map(|z| chart.refine_simple(z.re))
            .collect(),
        PhaseClass::D4Plus => {
            let z = chart.roots();
            let k = (0..3)
                .min_by(|&i, &j| z[i].im.abs().total_cmp(&z[j].im.abs()))
                .unwrap_or(0);
            vec![chart.refine_simple(z[k].re)]
        }
        PhaseClass::Zero => Vec::new(),
    };
    Ok(roots
        .into_iter()
        .map(|t| {
            // u − t·v = 0 at (u, v) = (t, 1)
            let x = chart.to_original(t, 1.0);
            let len = x[0].hypot(x[1]);
            [x[0] / len, x[1] / len]
        })
        .collect())
}

/// Class of `form` and a change T with f(T·y) equal to the canonical form.
///
/// The returned scale is always 1: positive multiples are absorbed into T
/// through real cube roots. Fails with `IllConditioned` when cond(T)³, the
/// worst-case amplification of coefficient perturbations, exceeds 1/tol; this
/// happens for forms close to a class boundary (nearly confluent roots).
pub fn normalize(form: &CubicForm, tol: f64) -> Result<(PhaseClass, LinearChange)> {
    form.validate()?;
    check_tol(tol)?;
    if form.max_abs() < tol {
        return Ok((PhaseClass::Zero, LinearChange::IDENTITY));
    }
    let chart = Chart::new(form);
    let class = classify_chart(&chart, tol);
    let lead = libm::ldexp(chart.g[0], chart.exp);
    let rows = match class {
        PhaseClass::A2 => {
            let (r, _) = chart.triple_root();
            let m = chart.root_form(r);
            let c = lead.cbrt();
            let len = m[0].hypot(m[1]);
            [[c * m[0], c * m[1]], [-m[1] / len, m[0] / len]]
        }
        PhaseClass::DInf => {
            let (rd, rs, _) = chart.double_root();
            let (mut m, n) = (chart.root_form(rd), chart.root_form(rs));
            // only m² enters, so fix its sign
            if (if m[0].abs() >= m[1].abs() { m[0] } else { m[1] }) < 0.0 {
                m = [-m[0], -m[1]];
            }
            // y₁ = c₁·m, y₂ = c₂·n with c₁²c₂ = lead and rows of equal length
            let (lm, ln) = (m[0].hypot(m[1]), n[0].hypot(n[1]));
            let c1 = (lead.abs() * ln / lm).cbrt();
            let c2 = lead / (c1 * c1);
            [[c1 * m[0], c1 * m[1]], [c2 * n[0], c2 * n[1]]]
        }
        PhaseClass::D4Plus | PhaseClass::D4Minus => {
            d4_rows(&chart, class, lead).ok_or(Error::IllConditioned {
                condition: f64::INFINITY,
                limit: 1.0 / tol,
            })?
        }
        PhaseClass::Zero => unreachable!("zero forms return early"),
    };
    let m = LinearChange::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]);
    // coefficients of a cubic move by up to cond(M)³ under M
    let condition = m.condition().powi(3);
    if !(condition <= 1.0 / tol) {
        return Err(Error::IllConditioned {
            condition,
            limit: 1.0 / tol,
        });
    }
    Ok((class, m.inverse()))
}

// With ℓ = u − r·v for a real root r, f = lead·ℓ·q and q + τℓ² = σ·m² for the
// unique τ making the quadratic a perfect square. Then y₂ = c·ℓ, y₁ = d·m with
// c³ = ∓τ and d² = σ/c give y₂(y₁² ± y₂²).
fn d4_rows(chart: &Chart, class: PhaseClass, lead: f64) -> Option<[[f64; 2]; 2]> {
    let sign = if class == PhaseClass::D4Plus {
        1.0
    } else {
        -1.0
    };
    let z = chart.roots();
    let candidates: Vec<f64> = if class == PhaseClass::D4Plus {
        let k = (0..3)
            .min_by(|&i, &j| z[i].im.abs().total_cmp(&z[j].im.abs()))
            .unwrap_or(0);
        vec![z[k].re]
    } else {
        z.iter().map(|r| r.re).collect()
    };
    let factor = lead / chart.g[0];
    let [a, b, c, _] = chart.g;
    let mut best: Option<([[f64; 2]; 2], f64)> = None;
    for r0 in candidates {
        let r = chart.refine_simple(r0);
        // g = (u − r v)(A u² + B uv + C v²)
        let qa = a * factor;
        let qb = (b + r * a) * factor;
        let qc = (c + r * (b + r * a)) * factor;
        let q_at_root = (qa * r + qb) * r + qc;
        let tau = (qb * qb - 4.0 * qa * qc) / (4.0 * q_at_root);
        let (p, s, t) = (qa + tau, qb - 2.0 * tau * r, qc + tau * r * r);
        let (sigma, m_uv) = if p.abs() >= t.abs() {
            (p, [1.0, s / (2.0 * p)])
        } else {
            (t, [s / (2.0 * t), 1.0])
        };
        let cc = (-sign * tau).cbrt();
        let ratio = sigma / cc;
        if !(ratio > 0.0) || !ratio.is_finite() {
            continue;
        }
        let d = ratio.sqrt();
        let l = chart.root_form(r);
        let m = chart.to_original(m_uv[0], m_uv[1]);
        let mut row1 = [d * m[0], d * m[1]];
        let lead_entry = if row1[0].abs() >= row1[1].abs() {
            row1[0]
        } else {
            row1[1]
        };
        if lead_entry < 0.0 {
            row1 = [-row1[0], -row1[1]];
        }
        let rows = [row1, [cc * l[0], cc * l[1]]];
        let cond = condition_2x2(rows[0][0], rows[0][1], rows[1][0], rows[1][1]);
        if best.as_ref().map_or(true, |(_, bc)| cond < *bc) {
            best = Some((rows, cond));
        }
    }
    best.map(|(rows, _)| rows)
}
