//! Explicit ReLU networks on `[0, 1]`: layers, forward passes, parameter
//! counting and exact extraction of the computed CPwL function.

mod combinators;
mod layer;
pub(crate) mod special;

pub use combinators::{
    compose_nets, concat_sum, embed_deeper, iterate_apply_sum, iterate_sum, parallel_sum,
    stack_relu_sum, stack_relu_sum_weighted, stack_sum, stack_sum_weighted,
};
pub use layer::AffineLayer;
pub use special::{relufree_constants, special_to_standard, SpecialNetwork};

use rayon::prelude::*;

use crate::cpwl::{linear_combination, Cpwl, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};

/// Number of parameters of a width-`W`, depth-`L` network:
/// `W(W+1)L - (W-1)^2 + 2`.
pub fn param_count(width: usize, depth: usize) -> usize {
    let (w, l) = (width as i64, depth as i64);
    (w * (w + 1) * l - (w - 1) * (w - 1) + 2) as usize
}

/// Common interface of standard and special networks.
pub trait Network {
    fn width(&self) -> usize;

    /// Number of hidden layers.
    fn depth(&self) -> usize;

    fn params(&self) -> usize {
        param_count(self.width(), self.depth())
    }

    fn forward(&self, x: f64) -> f64;

    /// The exact CPwL computed on `[0, 1]`.
    fn extract_cpwl(&self) -> Result<Cpwl>;
}

/// A plain ReLU network `A^(L) ∘ ReLU ∘ A^(L-1) ∘ ... ∘ ReLU ∘ A^(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReluNetwork {
    layers: Vec<AffineLayer>,
}

impl ReluNetwork {
    /// Validates the shape chain: `W×1`, then `W×W` repeated, then `1×W`.
    pub fn new(layers: Vec<AffineLayer>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::Structure(
                "a network needs an input layer and an output layer".into(),
            ));
        }
        let w = layers[0].rows();
        if w == 0 || layers[0].cols() != 1 {
            return Err(Error::Structure(format!(
                "input layer must be W×1, got {}×{}",
                layers[0].rows(),
                layers[0].cols()
            )));
        }
        let last = layers.len() - 1;
        for (l, layer) in layers.iter().enumerate().skip(1) {
            let want_rows = if l == last { 1 } else { w };
            if layer.rows() != want_rows || layer.cols() != w {
                return Err(Error::Structure(format!(
                    "layer {l} must be {want_rows}×{w}, got {}×{}",
                    layer.rows(),
                    layer.cols()
                )));
            }
        }
        Ok(ReluNetwork { layers })
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<AffineLayer> {
        self.layers
    }

    pub fn output_layer(&self) -> &AffineLayer {
        &self.layers[self.layers.len() - 1]
    }

    pub fn input_layer(&self) -> &AffineLayer {
        &self.layers[0]
    }

    /// `[2, -4] · ReLU([1; 1] x + [0; -1/2])`, which computes the hat function.
    pub fn hat() -> Self {
        ReluNetwork {
            layers: vec![
                AffineLayer::from_rows(&[&[1.0], &[1.0]], &[0.0, -0.5]),
                AffineLayer::from_rows(&[&[2.0, -4.0]], &[0.0]),
            ],
        }
    }

    /// A chain carrying `x` through `depth` ReLU layers in the first channel;
    /// computes the identity on `x ≥ 0`.
    pub fn identity(width: usize, depth: usize) -> Result<Self> {
        if width == 0 || depth == 0 {
            return Err(Error::Argument("identity needs width, depth ≥ 1".into()));
        }
        let mut layers = Vec::with_capacity(depth + 1);
        let mut input = AffineLayer::zeros(width, 1);
        input.set_weight(0, 0, 1.0);
        layers.push(input);
        for _ in 1..depth {
            let mut mid = AffineLayer::zeros(width, width);
            mid.set_weight(0, 0, 1.0);
            layers.push(mid);
        }
        let mut out = AffineLayer::zeros(1, width);
        out.set_weight(0, 0, 1.0);
        layers.push(out);
        Ok(ReluNetwork { layers })
    }

    /// The network computing the constant `c` with all weights zero.
    pub fn constant(width: usize, depth: usize, c: f64) -> Result<Self> {
        let mut net = ReluNetwork::identity(width, depth)?;
        let last = net.layers.len() - 1;
        net.layers[last] = AffineLayer::zeros(1, width);
        net.layers[last].set_bias(0, c);
        Ok(net)
    }

    /// Multiplies the output by `a` and adds `b`.
    pub fn affine_output(&self, a: f64, b: f64) -> ReluNetwork {
        let mut net = self.clone();
        let last = net.layers.len() - 1;
        let out = &mut net.layers[last];
        for j in 0..out.cols() {
            out.set_weight(0, j, a * out.weight(0, j));
        }
        out.set_bias(0, a * out.bias(0) + b);
        net
    }

    /// Replaces the input `x` by `s * x + c`.
    pub fn affine_input(&self, s: f64, c: f64) -> ReluNetwork {
        let mut net = self.clone();
        let inp = &mut net.layers[0];
        for i in 0..inp.rows() {
            let w = inp.weight(i, 0);
            inp.set_bias(i, inp.bias(i) + w * c);
            inp.set_weight(i, 0, w * s);
        }
        net
    }

    /// Widens to `width` by appending zero channels.
    pub fn pad_width(&self, width: usize) -> Result<ReluNetwork> {
        let w = self.width();
        if width < w {
            return Err(Error::Argument(format!(
                "cannot shrink width {w} to {width}"
            )));
        }
        let map: Vec<usize> = (0..w).collect();
        Ok(ReluNetwork {
            layers: remap_layers(&self.layers, &map, width),
        })
    }

    /// Values of every hidden layer before activation, as exact CPwLs.
    pub fn hidden_cpwls(&self) -> Result<Vec<Vec<Cpwl>>> {
        let mut out = Vec::new();
        propagate(
            &self.layers,
            |_| false,
            DEFAULT_NODE_BUDGET,
            |_, v| out.push(v.to_vec()),
        )?;
        Ok(out)
    }
}

impl Network for ReluNetwork {
    fn width(&self) -> usize {
        self.layers[0].rows()
    }

    fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    fn forward(&self, x: f64) -> f64 {
        forward_masked(&self.layers, |_| false, x)
    }

    fn extract_cpwl(&self) -> Result<Cpwl> {
        propagate(&self.layers, |_| false, DEFAULT_NODE_BUDGET, |_, _| {})
    }
}

/// Re-indexes the channels of a layer stack: old channel `i` becomes
/// `map[i]` in a network of width `width`; unmapped channels are zero.
pub(crate) fn remap_layers(
    layers: &[AffineLayer],
    map: &[usize],
    width: usize,
) -> Vec<AffineLayer> {
    let last = layers.len() - 1;
    layers
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            let rows = if l == last { 1 } else { width };
            let cols = if l == 0 { 1 } else { width };
            let mut out = AffineLayer::zeros(rows, cols);
            for i in 0..layer.rows() {
                let ri = if l == last { 0 } else { map[i] };
                out.set_bias(ri, layer.bias(i));
                for j in 0..layer.cols() {
                    let cj = if l == 0 { 0 } else { map[j] };
                    out.set_weight(ri, cj, layer.weight(i, j));
                }
            }
            out
        })
        .collect()
}

/// Forward pass where channels with `linear(i)` skip the ReLU.
pub(crate) fn forward_masked(
    layers: &[AffineLayer],
    linear: impl Fn(usize) -> bool,
    x: f64,
) -> f64 {
    let mut cur = layers[0].apply(&[x]);
    for layer in &layers[1..] {
        for (i, v) in cur.iter_mut().enumerate() {
            if !linear(i) {
                *v = v.max(0.0);
            }
        }
        cur = layer.apply(&cur);
    }
    cur[0]
}

/// Symbolic forward pass over CPwL values. `on_hidden(l, values)` sees the
/// pre-activation values of hidden layer `l` (1-based).
pub(crate) fn propagate(
    layers: &[AffineLayer],
    linear: impl Fn(usize) -> bool + Sync,
    budget: usize,
    mut on_hidden: impl FnMut(usize, &[Cpwl]),
) -> Result<Cpwl> {
    let input = &layers[0];
    let mut cur: Vec<Cpwl> = (0..input.rows())
        .map(|i| Cpwl::line(input.weight(i, 0), input.bias(i)))
        .collect();
    for (l, layer) in layers.iter().enumerate().skip(1) {
        on_hidden(l, &cur);
        let act: Vec<Cpwl> = cur
            .par_iter()
            .enumerate()
            .map(|(i, f)| if linear(i) { f.clone() } else { f.relu() })
            .collect();
        let nodes: usize = act.iter().map(Cpwl::len).sum();
        if nodes > budget {
            return Err(Error::Resource(format!(
                "extraction at layer {l} needs {nodes} nodes, budget is {budget}"
            )));
        }
        cur = (0..layer.rows())
            .into_par_iter()
            .map(|r| {
                let terms: Vec<(f64, &Cpwl)> =
                    layer.row(r).iter().copied().zip(act.iter()).collect();
                linear_combination(&terms, layer.bias(r))
            })
            .collect();
    }
    Ok(cur.pop().expect("output layer has one row"))
}
