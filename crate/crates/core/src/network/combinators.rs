//! Structural combinators: sums, compositions and iterates of networks.

use crate::cpwl::RANGE_TOL;
use crate::error::{Error, Result};

use super::special::{input_layer, mid_layer, output_layer};
use super::{AffineLayer, Network, ReluNetwork, SpecialNetwork};

fn same_width<'a, N: Network + 'a>(nets: impl IntoIterator<Item = &'a N>) -> Result<usize> {
    let mut width = None;
    for n in nets {
        match width {
            None => width = Some(n.width()),
            Some(w) if w != n.width() => {
                return Err(Error::Structure(format!(
                    "width mismatch: {w} and {}",
                    n.width()
                )))
            }
            _ => {}
        }
    }
    width.ok_or_else(|| Error::Argument("need at least one network".into()))
}

/// Special network of depth `L + Q` computing `s1 + s2`: the layers of `s1`,
/// then those of `s2` with the output of `s1` placed in the collation channel.
pub fn concat_sum(s1: &SpecialNetwork, s2: &SpecialNetwork) -> Result<SpecialNetwork> {
    let w = same_width([s1, s2])?;
    let a = s1.layers();
    let b = s2.layers();
    let la = a.len() - 1;
    let mut layers: Vec<AffineLayer> = a[..la].to_vec();
    let mut t = mid_layer(w);
    for i in 1..w - 1 {
        t.set_weight(i, 0, b[0].weight(i, 0));
        t.set_bias(i, b[0].bias(i));
    }
    for j in 0..w {
        t.set_weight(w - 1, j, a[la].weight(0, j));
    }
    t.set_bias(w - 1, a[la].bias(0));
    layers.push(t);
    layers.extend_from_slice(&b[1..]);
    SpecialNetwork::from_layers(layers)
}

/// The same function as a special network of depth `p > depth(s)`.
pub fn embed_deeper(s: &SpecialNetwork, p: usize) -> Result<SpecialNetwork> {
    if p <= s.depth() {
        return Err(Error::Argument(format!(
            "target depth {p} must exceed current depth {}",
            s.depth()
        )));
    }
    concat_sum(s, &SpecialNetwork::zero(s.width(), p - s.depth())?)
}

/// `n2 ∘ n1` with depth `L1 + L2`. The interface layer fuses the output
/// weights of `n1` with the input weights of `n2`.
pub fn compose_nets(n1: &ReluNetwork, n2: &ReluNetwork) -> Result<ReluNetwork> {
    let w = same_width([n1, n2])?;
    let a = n1.layers();
    let b = n2.layers();
    let la = a.len() - 1;
    let mut layers: Vec<AffineLayer> = a[..la].to_vec();
    let mut t = AffineLayer::zeros(w, w);
    t.add_fused(&b[0], &a[la], 1.0, 0, 0);
    layers.push(t);
    layers.extend_from_slice(&b[1..]);
    ReluNetwork::new(layers)
}

/// `Σ Y_i` as a special network of width `W + 2` and depth `Σ L_i`.
pub fn stack_sum(nets: &[ReluNetwork]) -> Result<SpecialNetwork> {
    let weighted: Vec<(f64, &ReluNetwork)> = nets.iter().map(|n| (1.0, n)).collect();
    stack_sum_weighted(&weighted)
}

/// `Σ a_i Y_i`; the networks run one after another on the computational
/// channels, each re-reading `x` from the source channel.
pub fn stack_sum_weighted(nets: &[(f64, &ReluNetwork)]) -> Result<SpecialNetwork> {
    let w = same_width(nets.iter().map(|(_, n)| *n))?;
    if w < 2 {
        let padded: Vec<ReluNetwork> = nets
            .iter()
            .map(|(_, n)| n.pad_width(2))
            .collect::<Result<_>>()?;
        let weighted: Vec<(f64, &ReluNetwork)> = nets
            .iter()
            .zip(&padded)
            .map(|((a, _), n)| (*a, n))
            .collect();
        return stack_sum_weighted(&weighted);
    }
    let wt = w + 2;
    let mut layers = Vec::new();
    let mut prev: Option<(f64, &AffineLayer)> = None;
    for &(a, net) in nets {
        let nl = net.layers();
        let depth = nl.len() - 1;
        let mut first = match prev {
            None => input_layer(wt),
            Some(_) => mid_layer(wt),
        };
        first.add_block(&nl[0], 1, 0);
        if let Some((pa, out)) = prev {
            first.add_readout(out, pa, wt - 1, 1);
        }
        layers.push(first);
        for layer in &nl[1..depth] {
            let mut m = mid_layer(wt);
            m.add_block(layer, 1, 1);
            layers.push(m);
        }
        prev = Some((a, &nl[depth]));
    }
    let (pa, out) = prev.expect("nonempty");
    let mut o = output_layer(wt);
    o.add_readout(out, pa, 0, 1);
    layers.push(o);
    SpecialNetwork::from_layers(layers)
}

/// `Σ ReLU(Y_i)` with width `W + 2` and depth `k + Σ L_i`.
pub fn stack_relu_sum(nets: &[ReluNetwork]) -> Result<SpecialNetwork> {
    let weighted: Vec<(f64, &ReluNetwork)> = nets.iter().map(|n| (1.0, n)).collect();
    stack_relu_sum_weighted(&weighted)
}

/// `Σ a_i ReLU(Y_i)`: after each network one extra layer holds `Y_i` in the
/// first computational channel, whose ReLU is then collated with weight `a_i`.
pub fn stack_relu_sum_weighted(nets: &[(f64, &ReluNetwork)]) -> Result<SpecialNetwork> {
    let w = same_width(nets.iter().map(|(_, n)| *n))?;
    if w < 2 {
        let padded: Vec<ReluNetwork> = nets
            .iter()
            .map(|(_, n)| n.pad_width(2))
            .collect::<Result<_>>()?;
        let weighted: Vec<(f64, &ReluNetwork)> = nets
            .iter()
            .zip(&padded)
            .map(|((a, _), n)| (*a, n))
            .collect();
        return stack_relu_sum_weighted(&weighted);
    }
    let wt = w + 2;
    let mut layers = Vec::new();
    let mut prev: Option<f64> = None;
    for &(a, net) in nets {
        let nl = net.layers();
        let depth = nl.len() - 1;
        let mut first = match prev {
            None => input_layer(wt),
            Some(_) => mid_layer(wt),
        };
        first.add_block(&nl[0], 1, 0);
        if let Some(pa) = prev {
            first.add_weight(wt - 1, 1, pa);
        }
        layers.push(first);
        for layer in &nl[1..depth] {
            let mut m = mid_layer(wt);
            m.add_block(layer, 1, 1);
            layers.push(m);
        }
        let mut r = mid_layer(wt);
        r.add_readout(&nl[depth], 1.0, 1, 1);
        layers.push(r);
        prev = Some(a);
    }
    let mut o = output_layer(wt);
    o.add_weight(0, 1, prev.expect("nonempty"));
    layers.push(o);
    SpecialNetwork::from_layers(layers)
}

fn check_unit_range(t: &ReluNetwork) -> Result<()> {
    let f = t.extract_cpwl()?;
    let (lo, hi) = (f.min_value(), f.max_value());
    if lo < -RANGE_TOL || hi > 1.0 + RANGE_TOL {
        return Err(Error::Domain(format!(
            "iterated network has range [{lo}, {hi}], not inside [0, 1]"
        )));
    }
    Ok(())
}

/// `Σ a_i T^{∘i}` with width `W + 2` and depth `L m`. After each copy of `T`
/// finishes, `a_i T^{∘i}` is added to the collation channel.
pub fn iterate_sum(t: &ReluNetwork, a: &[f64]) -> Result<SpecialNetwork> {
    if a.is_empty() {
        return Err(Error::Argument("need at least one coefficient".into()));
    }
    check_unit_range(t)?;
    let w = t.width().max(2);
    let t = t.pad_width(w)?;
    let wt = w + 2;
    let tl = t.layers();
    let depth = tl.len() - 1;
    let mut layers = Vec::with_capacity(depth * a.len() + 1);
    for i in 0..a.len() {
        let first = if i == 0 {
            let mut l = input_layer(wt);
            l.add_block(&tl[0], 1, 0);
            l
        } else {
            let mut l = mid_layer(wt);
            l.add_fused(&tl[0], &tl[depth], 1.0, 1, 1);
            l.add_readout(&tl[depth], a[i - 1], wt - 1, 1);
            l
        };
        layers.push(first);
        for layer in &tl[1..depth] {
            let mut m = mid_layer(wt);
            m.add_block(layer, 1, 1);
            layers.push(m);
        }
    }
    let mut o = output_layer(wt);
    o.add_readout(&tl[depth], a[a.len() - 1], 0, 1);
    layers.push(o);
    SpecialNetwork::from_layers(layers)
}

/// `Σ a_i g(T^{∘i})` with width `W_T + W_g + 2` and depth `l (m + 1)`, where
/// `l` is the common depth of `T` and `g`. Copies of `T` and `g` run in
/// lockstep: while `T` computes the next iterate, `g` consumes the previous.
pub fn iterate_apply_sum(t: &ReluNetwork, g: &ReluNetwork, a: &[f64]) -> Result<SpecialNetwork> {
    if a.is_empty() {
        return Err(Error::Argument("need at least one coefficient".into()));
    }
    if t.depth() != g.depth() {
        return Err(Error::Structure(format!(
            "depths differ: T has {}, g has {}; pad the shallower network first",
            t.depth(),
            g.depth()
        )));
    }
    check_unit_range(t)?;
    let (w1, w2) = (t.width(), g.width());
    let wt = w1 + w2 + 2;
    let (tl, gl) = (t.layers(), g.layers());
    let depth = tl.len() - 1;
    let m = a.len();
    let mut layers = Vec::with_capacity(depth * (m + 1) + 1);
    for s in 0..=m {
        let first = if s == 0 {
            let mut l = input_layer(wt);
            l.add_block(&tl[0], 1, 0);
            l
        } else {
            let mut l = mid_layer(wt);
            if s < m {
                l.add_fused(&tl[0], &tl[depth], 1.0, 1, 1);
            }
            l.add_fused(&gl[0], &tl[depth], 1.0, 1 + w1, 1);
            if s >= 2 {
                l.add_readout(&gl[depth], a[s - 2], wt - 1, 1 + w1);
            }
            l
        };
        layers.push(first);
        for l in 1..depth {
            let mut mid = mid_layer(wt);
            if s < m {
                mid.add_block(&tl[l], 1, 1);
            }
            if s >= 1 {
                mid.add_block(&gl[l], 1 + w1, 1 + w1);
            }
            layers.push(mid);
        }
    }
    let mut o = output_layer(wt);
    o.add_readout(&gl[depth], a[m - 1], 0, 1 + w1);
    layers.push(o);
    SpecialNetwork::from_layers(layers)
}

/// Networks of equal depth side by side (block diagonal); the output is the
/// sum of their outputs. Width is `Σ W_i`.
pub fn parallel_sum(nets: &[ReluNetwork]) -> Result<ReluNetwork> {
    let first = nets
        .first()
        .ok_or_else(|| Error::Argument("need at least one network".into()))?;
    let depth = first.depth();
    if let Some(n) = nets.iter().find(|n| n.depth() != depth) {
        return Err(Error::Structure(format!(
            "depths differ: {depth} and {}",
            n.depth()
        )));
    }
    let width: usize = nets.iter().map(|n| n.width()).sum();
    let mut layers: Vec<AffineLayer> = (0..=depth)
        .map(|l| match l {
            0 => AffineLayer::zeros(width, 1),
            l if l == depth => AffineLayer::zeros(1, width),
            _ => AffineLayer::zeros(width, width),
        })
        .collect();
    let mut off = 0;
    for n in nets {
        let nl = n.layers();
        layers[0].add_block(&nl[0], off, 0);
        for l in 1..depth {
            layers[l].add_block(&nl[l], off, off);
        }
        layers[depth].add_block(&nl[depth], 0, off);
        off += n.width();
    }
    ReluNetwork::new(layers)
}
