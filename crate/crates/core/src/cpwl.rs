//! Continuous piecewise-linear functions on `[0, 1]`.
//!
//! A [`Cpwl`] is stored as nodal data: strictly increasing breakpoints
//! `0 = x_0 < x_1 < ... < x_{n+1} = 1` together with the function values at
//! those breakpoints. Every operation here is exact up to floating point
//! rounding, which makes this module the reference against which compiled
//! networks are checked.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Two breakpoints closer than this are treated as the same node.
pub const NODE_EPS: f64 = 1e-14;

/// Relative slope difference below which an interior node is considered
/// collinear with its neighbours and removed by [`Cpwl::canonicalize`].
pub const COLLINEAR_REL_TOL: f64 = 1e-10;

// Absolute guards for the collinearity test: slopes below SLOPE_FLOOR are
// indistinguishable, and a node whose removal would move the function by more
// than MAX_DROP_DEVIATION is always kept.
const SLOPE_FLOOR: f64 = 1e-13;
const MAX_DROP_DEVIATION: f64 = 1e-11;

/// Slack allowed when checking that a range lies inside `[0, 1]`.
pub const RANGE_TOL: f64 = 1e-12;

/// Node budget used by operations whose output size can explode.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 22;

/// A continuous piecewise-linear function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpwl {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl Cpwl {
    /// Builds a CPwL from breakpoints and nodal values, validating the
    /// invariants. The nodes are kept as given (no canonicalization).
    pub fn new(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.len() != vs.len() {
            return Err(Error::Invariant(format!(
                "{} breakpoints but {} values",
                xs.len(),
                vs.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::Invariant("need at least the two endpoints".into()));
        }
        if xs[0] != 0.0 || xs[xs.len() - 1] != 1.0 {
            return Err(Error::Invariant(format!(
                "breakpoints must start at 0 and end at 1, got {} and {}",
                xs[0],
                xs[xs.len() - 1]
            )));
        }
        for (i, w) in xs.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::Invariant(format!(
                    "breakpoints not strictly increasing at index {}: {} then {}",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        if let Some(v) = vs.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!("non-finite value {v}")));
        }
        Ok(Cpwl { xs, vs })
    }

    pub fn from_nodes(nodes: &[(f64, f64)]) -> Result<Self> {
        let (xs, vs) = nodes.iter().copied().unzip();
        Cpwl::new(xs, vs)
    }

    /// Nodal interpolant of `f` at the given breakpoints.
    pub fn interpolate(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let vs = xs.iter().map(|&x| f(x)).collect();
        Cpwl::new(xs, vs)
    }

    pub(crate) fn from_raw(xs: Vec<f64>, vs: Vec<f64>) -> Self {
        debug_assert_eq!(xs.len(), vs.len());
        debug_assert!(xs.len() >= 2 && xs[0] == 0.0 && xs[xs.len() - 1] == 1.0);
        Cpwl { xs, vs }
    }

    /// `slope * x + intercept`.
    pub fn line(slope: f64, intercept: f64) -> Self {
        Cpwl::from_raw(vec![0.0, 1.0], vec![intercept, intercept + slope])
    }

    pub fn constant(c: f64) -> Self {
        Cpwl::line(0.0, c)
    }

    pub fn zero() -> Self {
        Cpwl::constant(0.0)
    }

    pub fn identity() -> Self {
        Cpwl::line(1.0, 0.0)
    }

    /// The hat (triangle) function: `2x` on `[0, 1/2]`, `2(1 - x)` on `[1/2, 1]`.
    pub fn hat() -> Self {
        Cpwl::from_raw(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.vs.iter().copied())
    }

    /// Total number of nodes, endpoints included.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interior_breakpoints(&self) -> usize {
        self.xs.len() - 2
    }

    pub fn pieces(&self) -> usize {
        self.xs.len() - 1
    }

    /// Evaluates the function at `x in [0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        Ok(self.eval_clamped(x))
    }

    /// Evaluates at `x` clamped to `[0, 1]`.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        // first node strictly greater than x
        let hi = self.xs.partition_point(|&b| b <= x);
        if hi == 0 {
            return self.vs[0];
        }
        if hi >= self.xs.len() {
            return self.vs[self.vs.len() - 1];
        }
        let lo = hi - 1;
        interp(self.xs[lo], self.vs[lo], self.xs[hi], self.vs[hi], x)
    }

    /// Slopes of the linear pieces, left to right.
    pub fn slopes(&self) -> Vec<f64> {
        self.xs
            .windows(2)
            .zip(self.vs.windows(2))
            .map(|(x, v)| (v[1] - v[0]) / (x[1] - x[0]))
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.vs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.vs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The sup-norm over `[0, 1]`, attained at a node.
    pub fn sup_norm(&self) -> f64 {
        self.vs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_canonical(&self) -> bool {
        self.canonicalize().len() == self.len()
    }

    /// Removes interior nodes that are collinear with their neighbours.
    pub fn canonicalize(&self) -> Cpwl {
        let (xs, vs) = canonical_nodes(&self.xs, &self.vs);
        Cpwl { xs, vs }
    }

    pub fn scale(&self, a: f64) -> Cpwl {
        Cpwl::from_raw(self.xs.clone(), self.vs.iter().map(|v| a * v).collect()).canonicalize()
    }

    pub fn neg(&self) -> Cpwl {
        self.scale(-1.0)
    }

    pub fn add_constant(&self, c: f64) -> Cpwl {
        Cpwl::from_raw(self.xs.clone(), self.vs.iter().map(|v| v + c).collect())
    }

    /// `a * self + b * other`, canonicalized.
    pub fn add(&self, other: &Cpwl, a: f64, b: f64) -> Cpwl {
        linear_combination(&[(a, self), (b, other)], 0.0)
    }

    /// Pointwise `max(self, 0)`; zero crossings become breakpoints.
    pub fn relu(&self) -> Cpwl {
        let mut xs = Vec::with_capacity(self.xs.len() + 4);
        let mut vs = Vec::with_capacity(self.xs.len() + 4);
        xs.push(self.xs[0]);
        vs.push(self.vs[0].max(0.0));
        for j in 0..self.xs.len() - 1 {
            let (x0, v0, x1, v1) = (self.xs[j], self.vs[j], self.xs[j + 1], self.vs[j + 1]);
            if (v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0) {
                let xc = x0 + v0 / (v0 - v1) * (x1 - x0);
                if xc - x0 > NODE_EPS && x1 - xc > NODE_EPS {
                    xs.push(xc);
                    vs.push(0.0);
                }
            }
            xs.push(x1);
            vs.push(v1.max(0.0));
        }
        let (xs, vs) = canonical_nodes(&xs, &vs);
        Cpwl { xs, vs }
    }

    /// `self ∘ inner`, i.e. `x ↦ self(inner(x))`.
    ///
    /// The range of `inner` (its nodal values) must lie in `[0, 1]`.
    pub fn compose(&self, inner: &Cpwl) -> Result<Cpwl> {
        let (lo, hi) = (inner.min_value(), inner.max_value());
        if lo < -RANGE_TOL || hi > 1.0 + RANGE_TOL {
            return Err(Error::Domain(format!(
                "inner function range [{lo}, {hi}] escapes [0, 1]"
            )));
        }
        let outer = self;
        let mut xs = Vec::with_capacity(inner.len() + outer.len());
        let mut vs = Vec::with_capacity(inner.len() + outer.len());
        let g = |i: usize| inner.vs[i].clamp(0.0, 1.0);
        xs.push(0.0);
        vs.push(outer.eval_clamped(g(0)));
        for j in 0..inner.xs.len() - 1 {
            let (x0, x1) = (inner.xs[j], inner.xs[j + 1]);
            let (g0, g1) = (g(j), g(j + 1));
            if g0 != g1 {
                let (tlo, thi) = if g0 < g1 { (g0, g1) } else { (g1, g0) };
                // outer breakpoints strictly inside (tlo, thi)
                let start = outer.xs.partition_point(|&t| t <= tlo);
                let end = outer.xs.partition_point(|&t| t < thi);
                let mut push = |k: usize| {
                    let t = outer.xs[k];
                    let x = x0 + (t - g0) / (g1 - g0) * (x1 - x0);
                    if x - x0 > NODE_EPS && x1 - x > NODE_EPS {
                        xs.push(x);
                        vs.push(outer.vs[k]);
                    }
                };
                if g0 < g1 {
                    (start..end).for_each(&mut push);
                } else {
                    (start..end).rev().for_each(&mut push);
                }
            }
            xs.push(x1);
            vs.push(outer.eval_clamped(g1));
        }
        let (xs, vs) = canonical_nodes(&xs, &vs);
        Ok(Cpwl { xs, vs })
    }

    /// `x ↦ self(1 - x)`.
    pub fn reflect(&self) -> Cpwl {
        let xs = self.xs.iter().rev().map(|x| 1.0 - x).collect::<Vec<_>>();
        let vs = self.vs.iter().rev().copied().collect();
        let mut xs = xs;
        xs[0] = 0.0;
        let last = xs.len() - 1;
        xs[last] = 1.0;
        Cpwl { xs, vs }
    }

    /// Restriction of `self` to `[lo, hi]`, rescaled to `[0, 1]`:
    /// `x ↦ self(lo + x (hi - lo))`.
    pub fn reparametrize(&self, lo: f64, hi: f64) -> Result<Cpwl> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::Argument(format!(
                "reparametrization interval [{lo}, {hi}] must be a nonempty subinterval of [0, 1]"
            )));
        }
        let inner = Cpwl::line(hi - lo, lo);
        self.compose(&inner)
    }
}

#[inline]
fn interp(x0: f64, v0: f64, x1: f64, v1: f64, x: f64) -> f64 {
    if x <= x0 {
        v0
    } else if x >= x1 {
        v1
    } else {
        v0 + (v1 - v0) * ((x - x0) / (x1 - x0))
    }
}

fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Sorted union of the breakpoints of all inputs, with nodes closer than
/// [`NODE_EPS`] merged. The endpoints are exactly 0 and 1.
pub(crate) fn merged_breakpoints(fs: &[&Cpwl]) -> Vec<f64> {
    let mut all: Vec<f64> = match fs {
        [] => return vec![0.0, 1.0],
        [f] => return f.xs.clone(),
        [f, g] => merge_two(&f.xs, &g.xs),
        _ => {
            let mut v: Vec<f64> = fs.iter().flat_map(|f| f.xs.iter().copied()).collect();
            v.sort_unstable_by(cmp_f64);
            v
        }
    };
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all.drain(..) {
        match out.last_mut() {
            Some(last) if x - *last <= NODE_EPS => {
                if x == 1.0 {
                    *last = 1.0;
                }
            }
            _ => out.push(x),
        }
    }
    out
}

fn merge_two(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Values of `f` at an ascending grid, by a single linear sweep.
pub(crate) fn sample_sorted(f: &Cpwl, grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut j = 0;
    let last = f.xs.len() - 1;
    for &x in grid {
        while j + 1 < last && f.xs[j + 1] < x {
            j += 1;
        }
        out.push(interp(f.xs[j], f.vs[j], f.xs[j + 1], f.vs[j + 1], x));
    }
    out
}

/// `bias + Σ coeff_i f_i`, canonicalized. Terms with zero coefficient are
/// skipped.
pub fn linear_combination(terms: &[(f64, &Cpwl)], bias: f64) -> Cpwl {
    let live: Vec<(f64, &Cpwl)> = terms.iter().copied().filter(|(c, _)| *c != 0.0).collect();
    if live.is_empty() {
        return Cpwl::constant(bias);
    }
    let fs: Vec<&Cpwl> = live.iter().map(|(_, f)| *f).collect();
    let xs = merged_breakpoints(&fs);
    let mut vs = vec![bias; xs.len()];
    for (c, f) in &live {
        for (acc, v) in vs.iter_mut().zip(sample_sorted(f, &xs)) {
            *acc += c * v;
        }
    }
    let (xs, vs) = canonical_nodes(&xs, &vs);
    Cpwl { xs, vs }
}

fn canonical_nodes(xs: &[f64], vs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    let mut ox = Vec::with_capacity(n);
    let mut ov = Vec::with_capacity(n);
    ox.push(xs[0]);
    ov.push(vs[0]);
    for j in 1..n - 1 {
        let (xp, vp) = (*ox.last().unwrap(), *ov.last().unwrap());
        let (x, v, xn, vn) = (xs[j], vs[j], xs[j + 1], vs[j + 1]);
        if x - xp <= NODE_EPS {
            continue;
        }
        let s1 = (v - vp) / (x - xp);
        let s2 = (vn - v) / (xn - x);
        let scale = s1.abs().max(s2.abs());
        let collinear = (s1 - s2).abs() <= COLLINEAR_REL_TOL * scale + SLOPE_FLOOR;
        if collinear {
            let chord = interp(xp, vp, xn, vn, x);
            if (v - chord).abs() <= MAX_DROP_DEVIATION {
                continue;
            }
        }
        ox.push(x);
        ov.push(v);
    }
    if xs[n - 1] - *ox.last().unwrap() <= NODE_EPS && ox.len() > 1 {
        ox.pop();
        ov.pop();
    }
    ox.push(xs[n - 1]);
    ov.push(vs[n - 1]);
    (ox, ov)
}

/// The hat function `H`.
pub fn hat() -> Cpwl {
    Cpwl::hat()
}

/// `a f + b g`.
pub fn add(f: &Cpwl, g: &Cpwl, a: f64, b: f64) -> Cpwl {
    f.add(g, a, b)
}

/// `f ∘ g`.
pub fn compose(f: &Cpwl, g: &Cpwl) -> Result<Cpwl> {
    f.compose(g)
}

pub fn relu(f: &Cpwl) -> Cpwl {
    f.relu()
}

/// Exact sup-norm of `f - g` over `[0, 1]`.
pub fn sup_diff(f: &Cpwl, g: &Cpwl) -> f64 {
    let xs = merged_breakpoints(&[f, g]);
    sample_sorted(f, &xs)
        .into_iter()
        .zip(sample_sorted(g, &xs))
        .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// `H^{∘k}` as an exact CPwL (the sawtooth with `2^k - 1` interior breakpoints).
pub fn sawtooth(k: u32) -> Result<Cpwl> {
    check_takagi_budget(k as usize, DEFAULT_NODE_BUDGET)?;
    let h = Cpwl::hat();
    let mut acc = Cpwl::identity();
    for _ in 0..k {
        acc = h.compose(&acc)?;
    }
    Ok(acc)
}

/// `Σ_k c_k H^{∘k}` as an exact CPwL, with the default node budget.
pub fn takagi_partial(coeffs: &[f64]) -> Result<Cpwl> {
    takagi_partial_with_budget(coeffs, DEFAULT_NODE_BUDGET)
}

pub fn takagi_partial_with_budget(coeffs: &[f64], budget: usize) -> Result<Cpwl> {
    if coeffs.is_empty() {
        return Err(Error::Argument("need at least one coefficient".into()));
    }
    check_takagi_budget(coeffs.len(), budget)?;
    let h = Cpwl::hat();
    let mut power = h.clone();
    let mut acc = Cpwl::zero();
    for (k, &c) in coeffs.iter().enumerate() {
        if k > 0 {
            power = h.compose(&power)?;
        }
        acc = acc.add(&power, 1.0, c);
    }
    Ok(acc)
}

fn check_takagi_budget(order: usize, budget: usize) -> Result<()> {
    let nodes = if order >= 63 {
        usize::MAX
    } else {
        (1usize << order) + 1
    };
    if nodes > budget {
        return Err(Error::Resource(format!(
            "order {order} needs {nodes} nodes, budget is {budget}"
        )));
    }
    Ok(())
}
