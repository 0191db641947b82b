//! Free-knot spline compilation.
//!
//! For `W ≥ 8` the residual after removing the endpoint line is cut into
//! blocks of `N = q(W-2)` breakpoints, `q = ⌊(W-2)/6⌋`. Each block is written
//! in a hat basis anchored at every `q`-th breakpoint and realised by a
//! two-layer special network: the first layer holds `(x - ξ_j)_+` at the
//! principal breakpoints, the second holds `[S_k]_+` for sign/separation
//! classes of hats. For `4 ≤ W ≤ 7` the spline is written in truncated-power
//! form and each hidden layer holds `W - 2` hinges whose weighted sum the next
//! layer collates.

use crate::cpwl::Cpwl;
use crate::error::{Error, Result};
use crate::network::special::{input_layer, mid_layer, output_layer};
use crate::network::{concat_sum, AffineLayer, ReluNetwork, SpecialNetwork};

use super::CompileReport;

fn q_of(width: usize) -> usize {
    (width - 2) / 6
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Depth of the network produced by [`compile_spline`] for `n` interior
/// breakpoints.
pub fn spline_depth(n: usize, width: usize) -> usize {
    let block = if width >= 8 {
        q_of(width) * (width - 2)
    } else {
        2 * (width - 2)
    };
    2 * ceil_div(n, block).max(1)
}

/// Parameter bound guaranteed for `n` interior breakpoints at width `W`.
pub fn spline_budget(n: usize, width: usize) -> usize {
    let small = width * width + 4 * width + 1;
    match width {
        w if w >= 8 => {
            if n >= q_of(w) * (w - 2) {
                61 * n
            } else {
                small
            }
        }
        4 => {
            if n >= 4 {
                19 * n
            } else {
                small
            }
        }
        w => {
            if n >= 2 * (w - 2) {
                25 * n
            } else {
                small
            }
        }
    }
}

/// Compiles `t` into a special network of width `W ≥ 4` computing it exactly.
pub fn compile_spline(t: &Cpwl, width: usize) -> Result<(SpecialNetwork, CompileReport)> {
    if width < 4 {
        return Err(Error::Unsupported(format!(
            "spline compilation needs width ≥ 4, got {width}"
        )));
    }
    let t = t.canonicalize();
    let n = t.interior_breakpoints();
    let net = if width >= 8 {
        compile_blocks(&t, width)?
    } else {
        compile_hinges(&t, width)?
    };
    debug_assert_eq!(net.inner().layers().len() - 1, spline_depth(n, width));
    let mut report = CompileReport::new(&net, spline_budget(n, width), n, true);
    if width == 7 {
        report.note = Some(
            "W = 7 is compiled with the small-width construction (q = 2 hinge groups); \
             the large-width statement leaves W = 7 ambiguous"
                .into(),
        );
    }
    Ok((net, report))
}

/// The one-hidden-layer network for `n ≤ W - 1` breakpoints: channel 1
/// carries `x = ReLU(x)`, the others carry `(x - ξ_i)_+`.
pub fn compile_shallow(t: &Cpwl, width: usize) -> Result<ReluNetwork> {
    let t = t.canonicalize();
    let n = t.interior_breakpoints();
    if width < 2 || n + 1 > width {
        return Err(Error::Argument(format!(
            "{n} breakpoints do not fit one hidden layer of width {width}"
        )));
    }
    let (a, b, hinges) = truncated_power(&t);
    let mut l0 = AffineLayer::zeros(width, 1);
    let mut out = AffineLayer::zeros(1, width);
    l0.set_weight(0, 0, 1.0);
    out.set_weight(0, 0, a);
    out.set_bias(0, b);
    for (i, (xi, c)) in hinges.into_iter().enumerate() {
        l0.set_weight(i + 1, 0, 1.0);
        l0.set_bias(i + 1, -xi);
        out.set_weight(0, i + 1, c);
    }
    ReluNetwork::new(vec![l0, out])
}

/// `t = a x + b + Σ c_i (x - ξ_i)_+`.
fn truncated_power(t: &Cpwl) -> (f64, f64, Vec<(f64, f64)>) {
    let slopes = t.slopes();
    let xs = t.breakpoints();
    let hinges = (1..xs.len() - 1)
        .map(|i| (xs[i], slopes[i] - slopes[i - 1]))
        .collect();
    (slopes[0], t.values()[0], hinges)
}

fn compile_hinges(t: &Cpwl, width: usize) -> Result<SpecialNetwork> {
    let g = width - 2;
    let (a, b, mut hinges) = truncated_power(t);
    let n = hinges.len();
    let layers_count = spline_depth(n, width);
    let total = layers_count * g;
    let last_x = hinges.last().map_or(0.0, |h| h.0);
    let extra = total - n;
    for k in 1..=extra {
        hinges.push((last_x + (1.0 - last_x) * k as f64 / (extra + 1) as f64, 0.0));
    }
    let mut layers = Vec::with_capacity(layers_count + 1);
    for (k, group) in hinges.chunks(g).enumerate() {
        let mut l = if k == 0 {
            input_layer(width)
        } else {
            mid_layer(width)
        };
        for (i, &(xi, _)) in group.iter().enumerate() {
            l.set_weight(i + 1, 0, 1.0);
            l.set_bias(i + 1, -xi);
        }
        if k > 0 {
            for (i, &(_, c)) in hinges[(k - 1) * g..k * g].iter().enumerate() {
                l.set_weight(width - 1, i + 1, c);
            }
        }
        layers.push(l);
    }
    let mut out = output_layer(width);
    out.set_weight(0, 0, a);
    out.set_bias(0, b);
    for (i, &(_, c)) in hinges[total - g..].iter().enumerate() {
        out.set_weight(0, i + 1, c);
    }
    layers.push(out);
    SpecialNetwork::from_layers(layers)
}

fn compile_blocks(t: &Cpwl, width: usize) -> Result<SpecialNetwork> {
    let q = q_of(width);
    let nb = q * (width - 2);
    let xs = t.breakpoints();
    let vs = t.values();
    let n = xs.len() - 2;
    let b = vs[0];
    let a = vs[n + 1] - vs[0];
    let residual = |i: usize| vs[i] - (a * xs[i] + b);

    let blocks = ceil_div(n, nb).max(1);
    let total = blocks * nb;
    let mut ys = Vec::with_capacity(total + 2);
    let mut rs = Vec::with_capacity(total + 2);
    for i in 0..=n {
        ys.push(xs[i]);
        rs.push(if i == 0 { 0.0 } else { residual(i) });
    }
    // artificial breakpoints in the last gap carry the interpolated residual
    let (x_last, r_last) = (ys[n], rs[n]);
    let extra = total - n;
    for k in 1..=extra {
        let s = k as f64 / (extra + 1) as f64;
        ys.push(x_last + (1.0 - x_last) * s);
        rs.push(r_last * (1.0 - s));
    }
    ys.push(1.0);
    rs.push(0.0);

    let mut net: Option<SpecialNetwork> = None;
    for j in 0..blocks {
        let lo = j * nb;
        let block = core_block(&ys[lo..=lo + nb + 1], &rs[lo + 1..=lo + nb], q, width)?;
        net = Some(match net {
            None => block,
            Some(acc) => concat_sum(&acc, &block)?,
        });
    }
    let mut layers = net.expect("at least one block").into_inner().into_layers();
    let last = layers.len() - 1;
    layers[last].add_weight(0, 0, a);
    layers[last].add_bias(0, b);
    SpecialNetwork::from_layers(layers)
}

/// Coefficients of the block function in the hat basis `φ_1..φ_N`, where
/// `φ_k` is the hat `H_{i,j}` with leftmost breakpoint `x_{k-1} = x_{jq-i}`.
fn hat_coefficients(x: &[f64], vals: &[f64], q: usize, groups: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; q * groups];
    let phi = |i: usize, j: usize| (j - 1) * q + (q - i); // 0-based φ index of H_{i,j}
    for j in 1..=groups {
        let xi = x[j * q];
        for r in 1..=q {
            let p = (j - 1) * q + r;
            let hat_at = |i: usize| {
                let left = x[j * q - i];
                (x[p] - left) / (xi - left)
            };
            let known: f64 = (q - r + 2..=q).map(|i| coeffs[phi(i, j)] * hat_at(i)).sum();
            let i_new = q - r + 1;
            coeffs[phi(i_new, j)] = (vals[p - 1] - known) / hat_at(i_new);
        }
    }
    coeffs
}

/// Splits hat indices into `W - 2` classes, each with one coefficient sign
/// and principal breakpoints at least three apart. Class of `H_{i,j}` is
/// determined by its sign, `j mod 3` and `i`. Zero coefficients are left out.
pub fn partition_indices(coeffs: &[f64], q: usize, width: usize) -> Result<Vec<Vec<usize>>> {
    if q == 0 || width < 2 || coeffs.len() != q * (width - 2) || 6 * q > width - 2 {
        return Err(Error::Argument(format!(
            "need {} coefficients with 6q ≤ W - 2 (q = {q}, W = {width}), got {}",
            q * width.saturating_sub(2),
            coeffs.len()
        )));
    }
    let mut classes = vec![Vec::new(); width - 2];
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let j = k / q + 1;
        let i = j * q - k;
        let sign = usize::from(c < 0.0);
        classes[sign * 3 * q + (j % 3) * q + (i - 1)].push(k);
    }
    Ok(classes)
}

/// Two-layer special network computing the block function with nodes
/// `x[0..=N+1]` and values `vals` at `x[1..=N]` (zero at both ends).
fn core_block(x: &[f64], vals: &[f64], q: usize, width: usize) -> Result<SpecialNetwork> {
    let groups = width - 2;
    let xi: Vec<f64> = (1..=groups).map(|j| x[j * q]).collect();
    let coeffs = hat_coefficients(x, vals, q, groups);
    let classes = partition_indices(&coeffs, q, width)?;

    let mut l0 = input_layer(width);
    for (j, &p) in xi.iter().enumerate() {
        l0.set_weight(j + 1, 0, 1.0);
        l0.set_bias(j + 1, -p);
    }
    let mut l1 = mid_layer(width);
    let mut out = output_layer(width);
    for (k, class) in classes.iter().enumerate() {
        if class.is_empty() {
            continue;
        }
        let sign = if coeffs[class[0]] < 0.0 { -1.0 } else { 1.0 };
        let hats: Vec<(usize, usize, f64)> = class
            .iter()
            .map(|&s| {
                let j = s / q + 1;
                (j, j * q - s, coeffs[s].abs())
            })
            .collect();
        let (a, b, m) = positive_part_generator(x, &xi, q, &hats);
        l1.set_weight(k + 1, 0, a);
        l1.set_bias(k + 1, b);
        for (j, mj) in m.into_iter().enumerate() {
            l1.set_weight(k + 1, j + 1, mj);
        }
        out.set_weight(0, k + 1, sign);
    }
    SpecialNetwork::from_layers(vec![l0, l1, out])
}

/// Builds `S = a x + b + Σ m_j (x - ξ_j)_+` with breakpoints only at the
/// principal points such that `[S]_+ = Σ c H_{i,j}` over the given hats
/// (`(j, i, c)` with `c > 0`, principal indices at least three apart).
///
/// `S` equals `c` at each active `ξ_j` and follows the lines through the
/// zero endpoints of the hat on both sides, so its neighbours get negative
/// values. The remaining principal values are interpolated between
/// constrained ones and held constant beyond them.
fn positive_part_generator(
    x: &[f64],
    xi: &[f64],
    q: usize,
    hats: &[(usize, usize, f64)],
) -> (f64, f64, Vec<f64>) {
    let p = xi.len();
    let mut v: Vec<Option<f64>> = vec![None; p];
    let mut left_slope = 0.0;
    let mut right_slope = 0.0;
    for &(j, i, c) in hats {
        let peak = xi[j - 1];
        let xl = x[j * q - i];
        let xr = x[j * q + 1];
        v[j - 1] = Some(c);
        let up = c / (peak - xl);
        let down = c / (xr - peak);
        if j >= 2 {
            v[j - 2] = Some(c - up * (peak - xi[j - 2]));
        } else {
            left_slope = up;
        }
        if j < p {
            v[j] = Some(c - down * (xi[j] - peak));
        } else {
            right_slope = -down;
        }
    }
    let known: Vec<usize> = (0..p).filter(|&j| v[j].is_some()).collect();
    let vals: Vec<f64> = (0..p)
        .map(|j| match v[j] {
            Some(val) => val,
            None => {
                let after = known.iter().position(|&k| k > j);
                match after {
                    Some(0) => v[known[0]].unwrap(),
                    None => v[*known.last().unwrap()].unwrap(),
                    Some(pos) => {
                        let (k0, k1) = (known[pos - 1], known[pos]);
                        let (v0, v1) = (v[k0].unwrap(), v[k1].unwrap());
                        v0 + (v1 - v0) * (xi[j] - xi[k0]) / (xi[k1] - xi[k0])
                    }
                }
            }
        })
        .collect();
    let mut seg = Vec::with_capacity(p + 1);
    seg.push(left_slope);
    for j in 0..p - 1 {
        seg.push((vals[j + 1] - vals[j]) / (xi[j + 1] - xi[j]));
    }
    seg.push(right_slope);
    let m = (0..p).map(|j| seg[j + 1] - seg[j]).collect();
    (left_slope, vals[0] - left_slope * xi[0], m)
}
