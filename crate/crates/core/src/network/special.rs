use crate::cpwl::{Cpwl, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};

use super::{forward_masked, propagate, remap_layers, AffineLayer, Network, ReluNetwork};

/// A network whose first channel (the source channel) carries `x` and whose
/// last channel (the collation channel) accumulates partial outputs. Both
/// channels are ReLU-free; every other channel is a computational channel.
///
/// Layout, with `W` the width and `L` the depth:
/// - `M^(0)` has first entry 1 and last entry 0; `b^(0)` has first and last
///   entries 0.
/// - for `1 ≤ l < L`, row 1 of `M^(l)` is `e_1`, column `W` is zero except
///   `M^(l)_{W,W} = 1`, and `b^(l)_1 = 0`.
/// - `M^(L)` has last entry 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialNetwork {
    inner: ReluNetwork,
}

impl SpecialNetwork {
    pub fn new(inner: ReluNetwork) -> Result<Self> {
        check_layout(&inner)?;
        Ok(SpecialNetwork { inner })
    }

    pub(crate) fn from_layers(layers: Vec<AffineLayer>) -> Result<Self> {
        SpecialNetwork::new(ReluNetwork::new(layers)?)
    }

    /// The network computing zero: source carried, collation empty.
    pub fn zero(width: usize, depth: usize) -> Result<Self> {
        if width < 4 {
            return Err(Error::Unsupported(format!(
                "special networks need width ≥ 4, got {width}"
            )));
        }
        if depth == 0 {
            return Err(Error::Argument("depth must be ≥ 1".into()));
        }
        let mut layers = vec![input_layer(width)];
        layers.extend((1..depth).map(|_| mid_layer(width)));
        layers.push(output_layer(width));
        SpecialNetwork::from_layers(layers)
    }

    pub fn inner(&self) -> &ReluNetwork {
        &self.inner
    }

    pub fn into_inner(self) -> ReluNetwork {
        self.inner
    }

    pub fn layers(&self) -> &[AffineLayer] {
        self.inner.layers()
    }

    /// Widens to `width`; new computational channels are inserted before
    /// the collation channel.
    pub fn pad_width(&self, width: usize) -> Result<SpecialNetwork> {
        let w = self.width();
        if width < w {
            return Err(Error::Argument(format!(
                "cannot shrink width {w} to {width}"
            )));
        }
        let map: Vec<usize> = (0..w)
            .map(|i| if i + 1 == w { width - 1 } else { i })
            .collect();
        SpecialNetwork::from_layers(remap_layers(self.layers(), &map, width))
    }

    /// Pre-activation value of the collation channel at every hidden layer.
    pub fn collation_cpwls(&self) -> Result<Vec<Cpwl>> {
        let w = self.width();
        let mut out = Vec::with_capacity(self.depth());
        propagate(
            self.layers(),
            |i| i == 0 || i + 1 == w,
            DEFAULT_NODE_BUDGET,
            |_, v| out.push(v[w - 1].clone()),
        )?;
        Ok(out)
    }
}

impl Network for SpecialNetwork {
    fn width(&self) -> usize {
        self.inner.width()
    }

    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn forward(&self, x: f64) -> f64 {
        let w = self.width();
        forward_masked(self.layers(), |i| i == 0 || i + 1 == w, x)
    }

    fn extract_cpwl(&self) -> Result<Cpwl> {
        let w = self.width();
        propagate(
            self.layers(),
            |i| i == 0 || i + 1 == w,
            DEFAULT_NODE_BUDGET,
            |_, _| {},
        )
    }
}

pub(crate) fn input_layer(width: usize) -> AffineLayer {
    let mut l = AffineLayer::zeros(width, 1);
    l.set_weight(0, 0, 1.0);
    l
}

pub(crate) fn mid_layer(width: usize) -> AffineLayer {
    let mut l = AffineLayer::zeros(width, width);
    l.set_weight(0, 0, 1.0);
    l.set_weight(width - 1, width - 1, 1.0);
    l
}

pub(crate) fn output_layer(width: usize) -> AffineLayer {
    let mut l = AffineLayer::zeros(1, width);
    l.set_weight(0, width - 1, 1.0);
    l
}

fn check_layout(net: &ReluNetwork) -> Result<()> {
    let w = net.width();
    if w < 4 {
        return Err(Error::Structure(format!(
            "special networks need width ≥ 4, got {w}"
        )));
    }
    let layers = net.layers();
    let last = layers.len() - 1;
    let l0 = &layers[0];
    if l0.weight(0, 0) != 1.0
        || l0.weight(w - 1, 0) != 0.0
        || l0.bias(0) != 0.0
        || l0.bias(w - 1) != 0.0
    {
        return Err(Error::Structure(
            "input layer must feed x to the source channel and nothing to the collation channel"
                .into(),
        ));
    }
    for (l, layer) in layers.iter().enumerate().take(last).skip(1) {
        let source_ok = layer.bias(0) == 0.0
            && layer.weight(0, 0) == 1.0
            && (1..w).all(|j| layer.weight(0, j) == 0.0);
        if !source_ok {
            return Err(Error::Structure(format!(
                "layer {l}: source channel must copy x"
            )));
        }
        let collation_ok =
            layer.weight(w - 1, w - 1) == 1.0 && (0..w - 1).all(|i| layer.weight(i, w - 1) == 0.0);
        if !collation_ok {
            return Err(Error::Structure(format!(
                "layer {l}: collation channel must only feed itself with weight 1"
            )));
        }
    }
    if layers[last].weight(0, w - 1) != 1.0 {
        return Err(Error::Structure(
            "output layer must read the collation channel with weight 1".into(),
        ));
    }
    Ok(())
}

/// Shifts `C_l = max(0, -min_{[0,1]} c_l)` that make the collation value
/// `c_l` of hidden layer `l = 1..L` nonnegative. Index 0 is hidden layer 1.
pub fn relufree_constants(snet: &SpecialNetwork) -> Result<Vec<f64>> {
    Ok(snet
        .collation_cpwls()?
        .iter()
        .map(|c| (-c.min_value()).max(0.0))
        .collect())
}

/// An equivalent plain ReLU network on `[0, 1]`.
///
/// The source channel is unchanged since `x = ReLU(x)` for `x ≥ 0`. The
/// collation channel of hidden layer `l` is shifted up by `C_l`; because the
/// channel carries its value forward, layer `l-1` adds the increment
/// `C_l - C_{l-1}` and the output subtracts `C_L`.
pub fn special_to_standard(snet: &SpecialNetwork) -> Result<ReluNetwork> {
    let shifts = relufree_constants(snet)?;
    let w = snet.width();
    let mut layers = snet.layers().to_vec();
    let mut prev = 0.0;
    for (l, &c) in shifts.iter().enumerate() {
        if c != prev {
            layers[l].add_bias(w - 1, c - prev);
        }
        prev = c;
    }
    let last = layers.len() - 1;
    layers[last].add_bias(0, -prev);
    ReluNetwork::new(layers)
}
