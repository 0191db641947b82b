//! Self-similar functions `F(x) = Σ S(h_i (x - a_i))` with a pattern `S`
//! repeated on disjoint intervals `[a_i, b_i]`, `h_i = 1 / (b_i - a_i)`.

use crate::cpwl::{Cpwl, NODE_EPS, RANGE_TOL};
use crate::error::{Error, Result};
use crate::network::{
    compose_nets, special_to_standard, stack_relu_sum_weighted, stack_sum_weighted, Network,
    ReluNetwork, SpecialNetwork,
};

use super::{compile_spline, CompileReport};

/// Multiplier of `k + m` in the parameter bound `C1 (k + m) + C2 W²`.
pub const SELF_SIMILAR_C1: usize = 896;
/// Multiplier of `W²` in the parameter bound `C1 (k + m) + C2 W²`.
pub const SELF_SIMILAR_C2: usize = 47;

fn check_intervals(intervals: &[(f64, f64)]) -> Result<()> {
    if intervals.is_empty() {
        return Err(Error::Argument("need at least one interval".into()));
    }
    let mut prev = 0.0;
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::Argument(format!(
                "interval {i} = [{a}, {b}] is not a nonempty subinterval of [0, 1]"
            )));
        }
        if a < prev {
            return Err(Error::Argument(format!(
                "interval {i} = [{a}, {b}] overlaps or precedes the previous one"
            )));
        }
        prev = b;
    }
    Ok(())
}

fn check_pattern(s: &Cpwl) -> Result<()> {
    let (l, r) = (s.values()[0], s.values()[s.len() - 1]);
    if l.abs() > RANGE_TOL || r.abs() > RANGE_TOL {
        return Err(Error::Argument(format!(
            "pattern must vanish at 0 and 1, got S(0) = {l}, S(1) = {r}"
        )));
    }
    Ok(())
}

/// Builds a CPwL from nodes sorted by `x`; nodes closer than `NODE_EPS` are
/// merged and missing endpoints get the value 0.
fn from_sorted_nodes(mut nodes: Vec<(f64, f64)>) -> Result<Cpwl> {
    if nodes.first().is_none_or(|n| n.0 > NODE_EPS) {
        nodes.insert(0, (0.0, 0.0));
    }
    if nodes.last().is_none_or(|n| n.0 < 1.0 - NODE_EPS) {
        nodes.push((1.0, 0.0));
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(nodes.len());
    for (x, v) in nodes {
        match out.last() {
            Some(&(px, _)) if x - px <= NODE_EPS => {}
            _ => out.push((x, v)),
        }
    }
    out[0].0 = 0.0;
    let last = out.len() - 1;
    out[last].0 = 1.0;
    Ok(Cpwl::from_nodes(&out)?.canonicalize())
}

/// The exact CPwL of `Σ S(h_i (x - a_i))`, each term extended by zero.
pub fn self_similar_target(s: &Cpwl, intervals: &[(f64, f64)]) -> Result<Cpwl> {
    check_intervals(intervals)?;
    check_pattern(s)?;
    let mut nodes = Vec::new();
    for &(a, b) in intervals {
        for (x, v) in s.nodes() {
            nodes.push((a + x * (b - a), v));
        }
        // pin the interval ends so rounding never shifts a shared endpoint
        let n = nodes.len();
        nodes[n - s.len()].0 = a;
        nodes[n - 1].0 = b;
    }
    from_sorted_nodes(nodes)
}

/// The pair `(T, T̂)` for intervals with gaps between them: `T` rises from 0
/// to 1 on each `[a_i, b_i]` and returns to 0 at `c_i`; `T̂` rises from 0 at
/// `b_i` to 1 at `c_i` and returns to 0 at `a_{i+1}` (with `a_{m+1} = 1`).
fn carriers(intervals: &[(f64, f64)]) -> Result<(Cpwl, Cpwl)> {
    let mut t = Vec::new();
    let mut that = Vec::new();
    for (i, &(a, b)) in intervals.iter().enumerate() {
        let next = intervals.get(i + 1).map_or(1.0, |iv| iv.0);
        t.push((a, 0.0));
        t.push((b, 1.0));
        if b < next {
            let c = 0.5 * (b + next);
            t.push((c, 0.0));
            that.push((b, 0.0));
            that.push((c, 1.0));
            that.push((next, 0.0));
        }
    }
    Ok((from_sorted_nodes(t)?, from_sorted_nodes(that)?))
}

/// `(S∘T - Ŝ∘T̂)` as a plain network of width `W - 2`, for a nonnegative
/// pattern and intervals separated by gaps.
fn difference_net(
    s: &ReluNetwork,
    s_hat: &ReluNetwork,
    intervals: &[(f64, f64)],
    inner_width: usize,
) -> Result<ReluNetwork> {
    let (t, t_hat) = carriers(intervals)?;
    let tn = special_to_standard(&compile_spline(&t, inner_width)?.0)?;
    let tn_hat = special_to_standard(&compile_spline(&t_hat, inner_width)?.0)?;
    let st = compose_nets(&tn, s)?;
    let st_hat = compose_nets(&tn_hat, s_hat)?;
    special_to_standard(&stack_sum_weighted(&[(1.0, &st), (-1.0, &st_hat)])?)
}

/// Compiles the self-similar function with pattern `S` on `intervals` into
/// a special network of width `W`.
///
/// For a nonnegative pattern and separated intervals, `F = (S∘T - Ŝ∘T̂)_+`
/// with `Ŝ(x) = S(1 - x)`. A general pattern is split as `S_+ - S_-` and the
/// intervals by parity of their index, so that each class has gaps; the
/// (at most) four ReLU terms are collated with signs `±1`.
pub fn compile_self_similar(
    s: &Cpwl,
    intervals: &[(f64, f64)],
    width: usize,
) -> Result<(SpecialNetwork, CompileReport)> {
    if width < 8 {
        return Err(Error::Unsupported(format!(
            "self-similar compilation needs width ≥ 8, got {width}"
        )));
    }
    check_intervals(intervals)?;
    check_pattern(s)?;
    let s = s.canonicalize();
    let inner = width - 4;
    let classes: Vec<Vec<(f64, f64)>> = (0..2)
        .map(|p| intervals.iter().skip(p).step_by(2).copied().collect())
        .filter(|c: &Vec<(f64, f64)>| !c.is_empty())
        .collect();
    let mut terms: Vec<(f64, ReluNetwork)> = Vec::new();
    for (sign, part) in [(1.0, s.relu()), (-1.0, s.neg().relu())] {
        if part.sup_norm() == 0.0 {
            continue;
        }
        let sn = special_to_standard(&compile_spline(&part, inner)?.0)?;
        let sn_hat = special_to_standard(&compile_spline(&part.reflect(), inner)?.0)?;
        for class in &classes {
            terms.push((sign, difference_net(&sn, &sn_hat, class, inner)?));
        }
    }
    let net = if terms.is_empty() {
        SpecialNetwork::zero(width, 1)?
    } else {
        let refs: Vec<(f64, &ReluNetwork)> = terms.iter().map(|(a, n)| (*a, n)).collect();
        stack_relu_sum_weighted(&refs)?
    };
    debug_assert_eq!(net.width(), width);
    let k = s.interior_breakpoints().max(1);
    let m = intervals.len();
    let bound = SELF_SIMILAR_C1 * (k + m) + SELF_SIMILAR_C2 * width * width;
    let target = self_similar_target(&s, intervals)?;
    let report = CompileReport::new(&net, bound, target.interior_breakpoints(), true);
    Ok((net, report))
}
