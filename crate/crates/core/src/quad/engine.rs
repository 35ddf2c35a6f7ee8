//! Adaptive Gauss–Kronrod cubature in one and two dimensions.
//!
//! Two-dimensional cells are "slabs": an outer interval [a, b] in one
//! coordinate and, for each outer value s, an inner interval between two
//! affine functions of s. Rectangles are the special case of constant bounds;
//! slanted bounds let lines through the origin be cell edges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;

// 15-point Kronrod abscissae on [0, 1) (the rule is symmetric) and weights;
// odd indices carry the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Nodes on [-1, 1], Kronrod weights and embedded Gauss weights (0 off-rule).
struct Rule {
    x: [f64; 15],
    wk: [f64; 15],
    wg: [f64; 15],
}

const fn rule() -> Rule {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    let mut i = 0;
    while i < 7 {
        x[i] = -XGK[i];
        x[14 - i] = XGK[i];
        wk[i] = WGK[i];
        wk[14 - i] = WGK[i];
        if i % 2 == 1 {
            wg[i] = WG[i / 2];
            wg[14 - i] = WG[i / 2];
        }
        i += 1;
    }
    x[7] = 0.0;
    wk[7] = WGK[7];
    wg[7] = WG[3];
    Rule { x, wk, wg }
}

const GK15: Rule = rule();

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub cells: usize,
    /// The tolerance was not reached within the cell budget.
    pub exhausted: bool,
}

#[derive(PartialEq)]
struct Keyed(f64, usize);

impl Eq for Keyed {}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Keyed {
    // larger error first, then older cell first
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

fn gk_interval<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let (mut k, mut g) = (0.0, 0.0);
    for i in 0..15 {
        let v = f(c + h * GK15.x[i])?;
        k += GK15.wk[i] * v;
        g += GK15.wg[i] * v;
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Adaptive 1D Gauss–Kronrod over the consecutive intervals of `breaks`,
/// stopping when the summed error estimate is below `abs_tol + rel_tol·|I|`.
pub(crate) fn integrate_1d<F>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut parts: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk_interval(&f, w[0], w[1])?;
            heap.push(Keyed(e, parts.len()));
            parts.push((w[0], w[1], v, e));
        }
    }
    let mut live = parts.len();
    let mut exhausted = false;
    loop {
        let (value, error) = parts
            .iter()
            .filter(|p| p.0 < p.1)
            .fold((0.0, 0.0), |s, p| (s.0 + p.2, s.1 + p.3));
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Estimate {
                value: Complex64::new(value, 0.0),
                error,
                cells: live,
                exhausted,
            });
        }
        if live >= max_intervals {
            exhausted = true;
            return Ok(Estimate {
                value: Complex64::new(value, 0.0),
                error,
                cells: live,
                exhausted,
            });
        }
        // split a handful of the worst intervals per sweep
        let batch = (live / 8).clamp(1, 32);
        let mut split_any = false;
        for _ in 0..batch {
            let Some(Keyed(_, idx)) = heap.pop() else {
                break;
            };
            let (a, b, _, _) = parts[idx];
            let m = 0.5 * (a + b);
            if !(m > a && m < b) {
                continue;
            }
            parts[idx].1 = a; // retire
            for (lo, hi) in [(a, m), (m, b)] {
                let (v, e) = gk_interval(&f, lo, hi)?;
                heap.push(Keyed(e, parts.len()));
                parts.push((lo, hi, v, e));
            }
            live += 1;
            split_any = true;
        }
        if !split_any {
            let (value, error) = parts
                .iter()
                .filter(|p| p.0 < p.1)
                .fold((0.0, 0.0), |s, p| (s.0 + p.2, s.1 + p.3));
            return Ok(Estimate {
                value: Complex64::new(value, 0.0),
                error,
                cells: live,
                exhausted: true,
            });
        }
    }
}

/// Which coordinate the outer interval runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outer {
    X1,
    X2,
}

/// Cell {s ∈ [a, b], t ∈ [lo(s), hi(s)]} with lo, hi affine: c₀ + c₁·s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Slab {
    pub outer: Outer,
    pub a: f64,
    pub b: f64,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Slab {
    pub fn rect(x1: [f64; 2], x2: [f64; 2]) -> Slab {
        Slab {
            outer: Outer::X1,
            a: x1[0],
            b: x1[1],
            lo: [x2[0], 0.0],
            hi: [x2[1], 0.0],
        }
    }

    fn inner_at(&self, s: f64) -> (f64, f64) {
        (self.lo[0] + self.lo[1] * s, self.hi[0] + self.hi[1] * s)
    }

    fn point(&self, s: f64, t: f64) -> (f64, f64) {
        match self.outer {
            Outer::X1 => (s, t),
            Outer::X2 => (t, s),
        }
    }

    fn outer_len(&self) -> f64 {
        self.b - self.a
    }

    fn inner_len(&self) -> f64 {
        let m = 0.5 * (self.a + self.b);
        let (l, h) = self.inner_at(m);
        h - l
    }

    fn split_outer(&self) -> Option<[Slab; 2]> {
        let m = 0.5 * (self.a + self.b);
        (m > self.a && m < self.b).then(|| [Slab { b: m, ..*self }, Slab { a: m, ..*self }])
    }

    fn split_inner(&self) -> Option<[Slab; 2]> {
        let mid = [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        ];
        let s = 0.5 * (self.a + self.b);
        let (l, h) = self.inner_at(s);
        let t = mid[0] + mid[1] * s;
        (t > l && t < h).then(|| [Slab { hi: mid, ..*self }, Slab { lo: mid, ..*self }])
    }
}

#[derive(Debug, Clone, Copy)]
struct CellEval {
    value: Complex64,
    error: f64,
    err_outer: f64,
    err_inner: f64,
}

fn eval_slab<F>(slab: &Slab, f: &F) -> Result<CellEval>
where
    F: Fn(f64, f64) -> Result<Complex64>,
{
    let (c, h) = (0.5 * (slab.a + slab.b), 0.5 * (slab.b - slab.a));
    let zero = Complex64::new(0.0, 0.0);
    let (mut kk, mut gg, mut e_out, mut e_in) = (zero, zero, zero, zero);
    for i in 0..15 {
        let s = c + h * GK15.x[i];
        let (l, u) = slab.inner_at(s);
        let (ci, hi) = (0.5 * (l + u), 0.5 * (u - l));
        let (mut k_row, mut g_row, mut d_row) = (zero, zero, zero);
        for j in 0..15 {
            let (x1, x2) = slab.point(s, ci + hi * GK15.x[j]);
            let v = f(x1, x2)?;
            k_row += v * GK15.wk[j];
            g_row += v * GK15.wg[j];
            d_row += v * (GK15.wk[j] - GK15.wg[j]);
        }
        let (k_row, g_row, d_row) = (k_row * hi, g_row * hi, d_row * hi);
        kk += k_row * GK15.wk[i];
        gg += g_row * GK15.wg[i];
        e_out += k_row * (GK15.wk[i] - GK15.wg[i]);
        e_in += d_row * GK15.wk[i];
    }
    let (kk, gg) = (kk * h, gg * h);
    let (err_outer, err_inner) = (e_out.norm() * h, e_in.norm() * h);
    let error = (kk - gg).norm().max(err_outer).max(err_inner);
    Ok(CellEval {
        value: kk,
        error,
        err_outer,
        err_inner,
    })
}

fn children(slab: &Slab, ev: &CellEval) -> Option<[Slab; 2]> {
    let directional = ev.err_outer.max(ev.err_inner);
    let outer_first = if directional < 0.1 * ev.error {
        // no clear direction: halve the longer side
        slab.outer_len() >= slab.inner_len()
    } else {
        ev.err_outer >= ev.err_inner
    };
    if outer_first {
        slab.split_outer().or_else(|| slab.split_inner())
    } else {
        slab.split_inner().or_else(|| slab.split_outer())
    }
}

/// Adaptive cubature over the union of `cells`, refining the cells with the
/// largest error estimates until Σ errors ≤ tol·(1 + |I|) or `max_cells`
/// leaves exist. The final sum runs over leaves in creation order, so the
/// result does not depend on the number of worker threads.
pub(crate) fn integrate_2d<F>(
    cells: Vec<Slab>,
    f: &F,
    tol: f64,
    max_cells: usize,
) -> Result<Estimate>
where
    F: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    let evals: Vec<CellEval> = cells
        .par_iter()
        .map(|c| eval_slab(c, f))
        .collect::<Result<_>>()?;
    let mut slabs: Vec<Slab> = cells;
    let mut results: Vec<CellEval> = evals;
    let mut live: Vec<bool> = vec![true; slabs.len()];
    let mut heap: BinaryHeap<Keyed> = results
        .iter()
        .enumerate()
        .map(|(i, e)| Keyed(e.error, i))
        .collect();
    let mut leaves = slabs.len();
    let mut run_value: Complex64 = results.iter().map(|e| e.value).sum();
    let mut run_error: f64 = results.iter().map(|e| e.error).sum();

    let totals = |results: &[CellEval], live: &[bool]| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut e = 0.0;
        for (r, &l) in results.iter().zip(live) {
            if l {
                v += r.value;
                e += r.error;
            }
        }
        (v, e)
    };

    loop {
        if run_error <= tol * (1.0 + run_value.norm()) {
            let (v, e) = totals(&results, &live);
            if e <= tol * (1.0 + v.norm()) {
                return Ok(Estimate {
                    value: v,
                    error: e,
                    cells: leaves,
                    exhausted: false,
                });
            }
            (run_value, run_error) = (v, e);
        }
        if leaves >= max_cells {
            break;
        }
        let batch = (leaves / 16).clamp(1, 64).min(max_cells - leaves);
        let mut parents = Vec::with_capacity(batch);
        let mut new_slabs = Vec::with_capacity(2 * batch);
        while parents.len() < batch {
            let Some(Keyed(_, idx)) = heap.pop() else {
                break;
            };
            if let Some(kids) = children(&slabs[idx], &results[idx]) {
                parents.push(idx);
                new_slabs.extend_from_slice(&kids);
            }
            // cells that cannot be split any further stay as they are
        }
        if parents.is_empty() {
            break;
        }
        let new_evals: Vec<CellEval> = new_slabs
            .par_iter()
            .map(|c| eval_slab(c, f))
            .collect::<Result<_>>()?;
        for &p in &parents {
            live[p] = false;
            run_value -= results[p].value;
            run_error -= results[p].error;
        }
        for (s, e) in new_slabs.into_iter().zip(new_evals) {
            heap.push(Keyed(e.error, slabs.len()));
            run_value += e.value;
            run_error += e.error;
            slabs.push(s);
            results.push(e);
            live.push(true);
        }
        leaves += parents.len();
    }
    let (value, error) = totals(&results, &live);
    Ok(Estimate {
        value,
        error,
        cells: leaves,
        exhausted: error > tol * (1.0 + value.norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_sum_to_two() {
        assert!((GK15.wk.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert!((GK15.wg.iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_examples() {
        let e = integrate_1d(|x| Ok(x.sqrt()), &[0.0, 1.0], 1e-13, 0.0, 1000).unwrap();
        assert!(
            (e.value.re - 2.0 / 3.0).abs() < 1e-12 && !e.exhausted,
            "{e:?}"
        );
        let e = integrate_1d(|x| Ok((50.0 * x).cos()), &[0.0, 0.3, 1.0], 1e-13, 0.0, 1000).unwrap();
        assert!((e.value.re - 50f64.sin() / 50.0).abs() < 1e-12);
        let e = integrate_1d(|x| Ok(1.0 / x.sqrt()), &[0.0, 1.0], 1e-14, 0.0, 20).unwrap();
        assert!(e.exhausted && e.cells == 20);
    }

    #[test]
    fn slab_cells_integrate_triangles() {
        // ∬ over {0 < x₂ < x₁ < 1} of x₁x₂ = 1/8; the other triangle via outer x₂
        let f = |x1: f64, x2: f64| Ok(Complex64::new(x1 * x2, 0.0));
        let lower = Slab {
            outer: Outer::X1,
            a: 0.0,
            b: 1.0,
            lo: [0.0, 0.0],
            hi: [0.0, 1.0],
        };
        let upper = Slab {
            outer: Outer::X2,
            a: 0.0,
            b: 1.0,
            lo: [0.0, 0.0],
            hi: [0.0, 1.0],
        };
        for s in [lower, upper] {
            let e = integrate_2d(vec![s], &f, 1e-13, 100).unwrap();
            assert!((e.value.re - 0.125).abs() < 1e-14, "{e:?}");
        }
    }

    #[test]
    fn two_dimensional_refinement() {
        let f = |x1: f64, x2: f64| Ok(Complex64::new(0.0, 30.0 * x1 * x2).exp());
        // ∫₀¹ (e^{30 i x} − 1)/(30 i x) dx, inner integral done by hand
        let want = integrate_1d(
            |x| Ok(((30.0 * x).sin()) / (30.0 * x)),
            &[0.0, 1.0],
            1e-15,
            0.0,
            10_000,
        )
        .unwrap()
        .value
        .re;
        let want_im = integrate_1d(
            |x| Ok((1.0 - (30.0 * x).cos()) / (30.0 * x)),
            &[0.0, 1.0],
            1e-15,
            0.0,
            10_000,
        )
        .unwrap()
        .value
        .re;
        let e = integrate_2d(vec![Slab::rect([0.0, 1.0], [0.0, 1.0])], &f, 1e-11, 10_000).unwrap();
        assert!(
            (e.value - Complex64::new(want, want_im)).norm() < 1e-11,
            "{e:?}"
        );
        assert!(e.cells > 1 && !e.exhausted);

        let e = integrate_2d(vec![Slab::rect([0.0, 1.0], [0.0, 1.0])], &f, 1e-14, 5).unwrap();
        assert!(e.exhausted && e.cells == 5);
    }
}
