//! Finite-difference Lie brackets and numerical rank of the bracket span.
//!
//! Convention: `[F, G](X) = DG(X) F(X) - DF(X) G(X)`, so that the square loop
//! "flow F, flow G, flow -F, flow -G" of side `e` moves the state by
//! `e^2 [F, G] + O(e^3)`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::swimmer::{self, FieldOptions, FourSphereChart, SwimmerParams, ThreeSphereState};

type EvalFn<'a> = dyn Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'a;
type DomainFn<'a> = dyn Fn(&DVector<f64>) -> bool + Send + Sync + 'a;

/// A vector field on `R^n` with an optional admissible domain.
#[derive(Clone)]
pub struct FieldHandle<'a> {
    eval: Arc<EvalFn<'a>>,
    domain: Option<Arc<DomainFn<'a>>>,
}

impl<'a> FieldHandle<'a> {
    pub fn new(f: impl Fn(&DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'a) -> Self {
        Self { eval: Arc::new(f), domain: None }
    }

    pub fn with_domain(mut self, d: impl Fn(&DVector<f64>) -> bool + Send + Sync + 'a) -> Self {
        self.domain = Some(Arc::new(d));
        self
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        (self.eval)(x)
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.domain.as_ref().map_or(true, |d| d(x))
    }

    /// Positive multiple of this field.
    pub fn scaled(&self, k: f64) -> FieldHandle<'a> {
        let f = self.clone();
        FieldHandle { eval: Arc::new(move |x| Ok(k * f.eval(x)?)), domain: self.domain.clone() }
    }
}

/// Per-coordinate step `h_k = max(step, step |X_k|)`.
pub fn fd_steps(x: &DVector<f64>, step: f64) -> DVector<f64> {
    x.map(|v| step.max(step * v.abs()))
}

/// Jacobian by fourth-order central differences.
pub fn jacobian(f: &FieldHandle, x: &DVector<f64>, h: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let at = |s: f64| {
            let mut p = x.clone();
            p[k] += s * h[k];
            f.eval(&p)
        };
        let d = (-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h[k]);
        cols.push(d);
    }
    Ok(DMatrix::from_columns(&cols))
}

fn check_margin(fields: &[&FieldHandle], x: &DVector<f64>, h: &DVector<f64>) -> Result<()> {
    for f in fields {
        if f.domain.is_none() {
            continue;
        }
        for k in 0..x.len() {
            for s in [-4.0, 4.0] {
                let mut p = x.clone();
                p[k] += s * h[k];
                if !f.contains(&p) {
                    return Err(Error::StepTooLarge(format!(
                        "coordinate {k}: point X {} 4h (h = {:e}) leaves the admissible set",
                        if s > 0.0 { "+" } else { "-" },
                        h[k]
                    )));
                }
            }
        }
    }
    Ok(())
}

/// `[F, G](X)` with Jacobians by fourth-order central differences.
pub fn lie_bracket(f: &FieldHandle, g: &FieldHandle, x: &DVector<f64>, step: f64) -> Result<DVector<f64>> {
    let h = fd_steps(x, step);
    check_margin(&[f, g], x, &h)?;
    let fx = f.eval(x)?;
    let gx = g.eval(x)?;
    Ok(jacobian(g, x, &h)? * fx - jacobian(f, x, &h)? * gx)
}

/// The bracket `[F, G]` as a field, differentiated with `step`.
pub fn bracket_field<'a>(f: &FieldHandle<'a>, g: &FieldHandle<'a>, step: f64) -> FieldHandle<'a> {
    let (f2, g2) = (f.clone(), g.clone());
    let (fd, gd) = (f.clone(), g.clone());
    FieldHandle::new(move |x| lie_bracket(&f2, &g2, x, step)).with_domain(move |x| fd.contains(x) && gd.contains(x))
}

/// Lyndon words over `m` letters with length at most `depth`, by length then lexicographically.
pub fn lyndon_words(m: usize, depth: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 || depth == 0 {
        return out;
    }
    // Duval's generation
    let mut w: Vec<usize> = vec![0];
    loop {
        out.push(w.clone());
        let len = w.len();
        while w.len() < depth {
            let c = w[w.len() - len];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == m - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(l) => *l += 1,
            None => break,
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

fn is_lyndon(w: &[usize]) -> bool {
    (1..w.len()).all(|i| w[i..] > *w)
}

/// Standard factorisation `w = u v` with `v` the longest proper Lyndon suffix.
pub fn standard_factorization(w: &[usize]) -> (&[usize], &[usize]) {
    let i = (1..w.len()).find(|&i| is_lyndon(&w[i..])).unwrap_or(w.len() - 1);
    (&w[..i], &w[i..])
}

/// Bracket expression of a Lyndon word, e.g. `[F1,[F1,F2]]`.
pub fn word_label(w: &[usize]) -> String {
    if w.len() == 1 {
        return format!("F{}", w[0] + 1);
    }
    let (u, v) = standard_factorization(w);
    format!("[{},{}]", word_label(u), word_label(v))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOptions {
    pub depth: usize,
    pub tol: f64,
    /// Characteristic magnitude of each coordinate; empty means all ones.
    pub scales: Vec<f64>,
    /// Relative step for first-order brackets.
    pub step: f64,
    /// Relative step for the outer difference of longer words.
    pub nested_step: f64,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self { depth: 3, tol: 1e-6, scales: Vec::new(), step: 1e-4, nested_step: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub dimension: usize,
    /// Singular values of the scaled bracket matrix divided by the largest one.
    pub singular_values: Vec<f64>,
    pub depth: usize,
    pub words: Vec<String>,
    /// Bracket word values at the evaluation point, in the order of `words`.
    pub values: Vec<DVector<f64>>,
}

impl RankReport {
    pub fn sigma_min_ratio(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(f64::NAN)
    }

    /// True when the bracket span misses some direction.
    pub fn degenerate(&self, n: usize) -> bool {
        self.dimension < n
    }
}

/// Word fields for all Lyndon words up to `depth`.
pub fn word_fields<'a>(fields: &[FieldHandle<'a>], opts: &RankOptions) -> Vec<(Vec<usize>, FieldHandle<'a>)> {
    let words = lyndon_words(fields.len(), opts.depth);
    let mut cache: HashMap<Vec<usize>, FieldHandle<'a>> = HashMap::new();
    let mut out = Vec::new();
    for w in words {
        let h = if w.len() == 1 {
            fields[w[0]].clone()
        } else {
            let (u, v) = standard_factorization(&w);
            let step = if w.len() == 2 { opts.step } else { opts.nested_step };
            bracket_field(&cache[u], &cache[v], step)
        };
        cache.insert(w.clone(), h.clone());
        out.push((w, h));
    }
    out
}

/// Numerical dimension of the span of all bracket words up to `opts.depth` at `x`.
pub fn lie_algebra_rank(fields: &[FieldHandle], x: &DVector<f64>, opts: &RankOptions) -> Result<RankReport> {
    if opts.depth == 0 {
        return Err(Error::Argument("bracket depth must be at least 1".into()));
    }
    let n = x.len();
    let words = word_fields(fields, opts);
    let values = words.iter().map(|(_, h)| h.eval(x)).collect::<Result<Vec<_>>>()?;
    let labels = words.iter().map(|(w, _)| word_label(w)).collect();
    Ok(rank_of(values, labels, n, opts))
}

fn rank_of(values: Vec<DVector<f64>>, words: Vec<String>, n: usize, opts: &RankOptions) -> RankReport {
    let mut m = DMatrix::from_columns(&values);
    if !opts.scales.is_empty() {
        for k in 0..n {
            m.row_mut(k).scale_mut(1.0 / opts.scales[k]);
        }
    }
    for mut c in m.column_iter_mut() {
        let nrm = c.norm();
        if nrm > 0.0 {
            c /= nrm;
        }
    }
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let s1 = sv.first().copied().unwrap_or(0.0);
    let dimension = if s1 > 0.0 { sv.iter().filter(|s| **s > opts.tol * s1).count() } else { 0 };
    let singular_values = sv.iter().map(|s| if s1 > 0.0 { s / s1 } else { 0.0 }).collect();
    RankReport { dimension, singular_values, depth: opts.depth, words, values }
}

/// Three-sphere control fields on `(xi1, xi2, x, y, theta)`, restricted to admissible states.
pub fn three_sphere_handles<'a>(params: SwimmerParams, opts: FieldOptions) -> [FieldHandle<'a>; 2] {
    std::array::from_fn(|k| {
        FieldHandle::new(move |x: &DVector<f64>| {
            let s = ThreeSphereState::from_slice(x.as_slice());
            let w = swimmer::three_sphere_pose_rates(&s, &params, &opts)?;
            let mut v = DVector::zeros(5);
            v[k] = 1.0;
            v.rows_mut(2, 3).copy_from(&w.column(k));
            Ok(v)
        })
        .with_domain(move |x| ThreeSphereState::from_slice(x.as_slice()).violations(&params).is_empty())
    })
}

/// Four-sphere control fields in the exponential chart around `chart.base`.
pub fn four_sphere_handles<'a>(chart: FourSphereChart, params: SwimmerParams, opts: FieldOptions) -> [FieldHandle<'a>; 4] {
    std::array::from_fn(|k| {
        FieldHandle::new(move |x: &DVector<f64>| chart.field(k, x, &params, &opts))
            .with_domain(move |x| chart.state(x).violations(&params).is_empty())
    })
}

pub fn three_sphere_rank(s: &ThreeSphereState, params: &SwimmerParams, fopts: &FieldOptions, opts: &RankOptions) -> Result<RankReport> {
    let h = three_sphere_handles(*params, *fopts);
    lie_algebra_rank(&h, &DVector::from_column_slice(s.to_vector().as_slice()), opts)
}

pub fn four_sphere_rank(
    s: &swimmer::FourSphereState,
    params: &SwimmerParams,
    fopts: &FieldOptions,
    opts: &RankOptions,
) -> Result<RankReport> {
    let chart = FourSphereChart::at(s);
    let h = four_sphere_handles(chart, *params, *fopts);
    lie_algebra_rank(&h, &chart.coords(s), opts)
}

/// Axis values of a rank-map grid over `(xi1, xi2, y, theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.xi1.len() * self.xi2.len() * self.y.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in lexicographic order of the grid indices (`theta` fastest).
    pub fn points(&self) -> Vec<[f64; 4]> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.xi1 {
            for &b in &self.xi2 {
                for &c in &self.y {
                    for &d in &self.theta {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankMapEntry {
    pub xi1: f64,
    pub xi2: f64,
    pub y: f64,
    pub theta: f64,
    /// Bracket-span dimension, `-1` for inadmissible or failed points.
    pub dim: i32,
    pub sigma_min_ratio: f64,
    pub note: Option<String>,
}

/// Rank of the three-sphere bracket span at every grid point (`x = 0`).
///
/// Points are evaluated in parallel on the current rayon pool; the output
/// order is the grid order.
pub fn rank_map(grid: &GridSpec, params: &SwimmerParams, fopts: &FieldOptions, opts: &RankOptions) -> Vec<RankMapEntry> {
    grid.points()
        .par_iter()
        .map(|&[xi1, xi2, y, theta]| {
            let s = ThreeSphereState::new(xi1, xi2, 0.0, y, theta);
            let entry = |dim, ratio, note| RankMapEntry { xi1, xi2, y, theta, dim, sigma_min_ratio: ratio, note };
            let v = s.violations(params);
            if !v.is_empty() {
                return entry(-1, f64::NAN, Some(v.join("; ")));
            }
            match three_sphere_rank(&s, params, fopts, opts) {
                Ok(r) => entry(r.dimension as i32, r.sigma_min_ratio(), None),
                Err(e) => entry(-1, f64::NAN, Some(e.to_string())),
            }
        })
        .collect()
}
