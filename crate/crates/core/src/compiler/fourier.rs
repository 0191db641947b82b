//! Networks for the CPwL trigonometric-like system `C_j`, `S_j` and their
//! finite sums.

use std::collections::HashSet;

use crate::cpwl::{linear_combination, Cpwl};
use crate::error::{Error, Result};
use crate::network::{
    compose_nets, embed_deeper, parallel_sum, param_count, special_to_standard, stack_sum,
    stack_sum_weighted, AffineLayer, Network, ReluNetwork, SpecialNetwork,
};
use crate::riesz::{basis_fn, Kind};

use super::CompileReport;

/// One summand `a C_j + b S_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierTerm {
    pub j: usize,
    pub a: f64,
    pub b: f64,
}

fn ceil_log2(j: usize) -> u32 {
    if j <= 1 {
        0
    } else {
        usize::BITS - (j - 1).leading_zeros()
    }
}

/// `[-4, 8] · ReLU([1; 1] y + [0; -1/2]) + 1`, which computes `C` on `[0, 1]`.
fn c_net() -> ReluNetwork {
    ReluNetwork::new(vec![
        AffineLayer::from_rows(&[&[1.0], &[1.0]], &[0.0, -0.5]),
        AffineLayer::from_rows(&[&[-4.0, 8.0]], &[1.0]),
    ])
    .expect("valid shapes")
}

/// `C_{2^h}(s x + c)` for `s x + c` inside `[0, 1]`: `h` hats, the first one
/// reading the affine input, then the `C` network.
fn cosine_chain(hats: u32, s: f64, c: f64) -> Result<ReluNetwork> {
    let mut net: Option<ReluNetwork> = None;
    for _ in 0..hats {
        net = Some(match net {
            None => ReluNetwork::hat().affine_input(s, c),
            Some(n) => compose_nets(&n, &ReluNetwork::hat())?,
        });
    }
    match net {
        None => Ok(c_net().affine_input(s, c)),
        Some(n) => compose_nets(&n, &c_net()),
    }
}

/// Width-2 network computing `C_j` (depth `⌈log₂ j⌉ + 1`) or `S_j`
/// (depth `⌈log₂ j⌉ + 2`).
///
/// With `m = ⌈log₂ j⌉`, `C_j(x) = C(H^{∘m}(j 2^{-m} x))` and
/// `S_j(x) = C(H^{∘(m+1)}(j 2^{-m-1} x + 3·2^{-m-3}))`.
pub fn fourier_atom(kind: Kind, j: usize) -> Result<ReluNetwork> {
    if j == 0 {
        return Err(Error::Argument("frequency index must be ≥ 1".into()));
    }
    let m = ceil_log2(j);
    let jf = j as f64;
    match kind {
        Kind::Cosine => cosine_chain(m, jf / 2f64.powi(m as i32), 0.0),
        Kind::Sine => cosine_chain(
            m + 1,
            jf / 2f64.powi(m as i32 + 1),
            3.0 / 2f64.powi(m as i32 + 3),
        ),
    }
}

/// `2 ⌈k / ⌊(W-2)/4⌋⌉ (⌈log₂ λ⌉ + 2)`.
pub fn fourier_depth_bound(k: usize, lambda: usize, width: usize) -> usize {
    let g = (width - 2) / 4;
    2 * k.div_ceil(g) * (ceil_log2(lambda) as usize + 2)
}

/// The oracle `Σ (a_j C_j + b_j S_j)`.
pub fn fourier_target(terms: &[FourierTerm]) -> Result<Cpwl> {
    let mut fs = Vec::with_capacity(2 * terms.len());
    for t in terms {
        fs.push((t.a, basis_fn(Kind::Cosine, t.j)?));
        fs.push((t.b, basis_fn(Kind::Sine, t.j)?));
    }
    let refs: Vec<(f64, &Cpwl)> = fs.iter().map(|(a, f)| (*a, f)).collect();
    Ok(linear_combination(&refs, 0.0))
}

/// `Σ (a_j C_j + b_j S_j)` as a special network of width `W` and depth
/// `⌈k / g⌉ p`, where `g = ⌊(W-2)/4⌋` terms run side by side and every term
/// is stretched to the common depth `p = 2(⌈log₂ λ⌉ + 2)`.
pub fn compile_fourier_sum(
    terms: &[FourierTerm],
    width: usize,
) -> Result<(SpecialNetwork, CompileReport)> {
    if width < 6 {
        return Err(Error::Unsupported(format!(
            "Fourier sums need width ≥ 6, got {width}"
        )));
    }
    if terms.is_empty() {
        return Err(Error::Argument("need at least one term".into()));
    }
    let mut seen = HashSet::new();
    for t in terms {
        if t.j == 0 {
            return Err(Error::Argument("frequency index must be ≥ 1".into()));
        }
        if !seen.insert(t.j) {
            return Err(Error::Argument(format!("duplicate index {}", t.j)));
        }
    }
    let lambda = terms.iter().map(|t| t.j).max().expect("nonempty");
    let p = 2 * (ceil_log2(lambda) as usize + 2);
    let g = (width - 2) / 4;
    let mut atoms = Vec::with_capacity(terms.len());
    for t in terms {
        let c = fourier_atom(Kind::Cosine, t.j)?;
        let s = fourier_atom(Kind::Sine, t.j)?;
        let mut pair = stack_sum_weighted(&[(t.a, &c), (t.b, &s)])?;
        if pair.depth() < p {
            pair = embed_deeper(&pair, p)?;
        }
        atoms.push(special_to_standard(&pair)?);
    }
    let groups = atoms
        .chunks(g)
        .map(|chunk| parallel_sum(chunk)?.pad_width(width - 2))
        .collect::<Result<Vec<_>>>()?;
    let net = stack_sum(&groups)?;
    let bound = fourier_depth_bound(terms.len(), lambda, width);
    let target = fourier_target(terms)?;
    let mut report = CompileReport::new(
        &net,
        param_count(width, bound),
        target.interior_breakpoints(),
        true,
    );
    report.note = Some(format!("depth bound {bound}"));
    Ok((net, report))
}
