use crate::error::{Error, Result};

/// An affine map `y ↦ M y + b` with a dense row-major weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLayer {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl AffineLayer {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != rows * cols {
            return Err(Error::Structure(format!(
                "{rows}×{cols} layer given {} weights",
                weights.len()
            )));
        }
        if bias.len() != rows {
            return Err(Error::Structure(format!(
                "layer with {rows} rows given {} biases",
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Structure("non-finite weight or bias".into()));
        }
        Ok(AffineLayer {
            rows,
            cols,
            weights,
            bias,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        AffineLayer {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    /// Panics if the rows are ragged; meant for small literal layers.
    pub fn from_rows(rows: &[&[f64]], bias: &[f64]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        AffineLayer::new(rows.len(), cols, rows.concat(), bias.to_vec())
            .expect("valid literal layer")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.cols + j]
    }

    pub fn bias(&self, i: usize) -> f64 {
        self.bias[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.cols..(i + 1) * self.cols]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.bias
    }

    pub fn set_weight(&mut self, i: usize, j: usize, v: f64) {
        self.weights[i * self.cols + j] = v;
    }

    pub fn add_weight(&mut self, i: usize, j: usize, v: f64) {
        self.weights[i * self.cols + j] += v;
    }

    pub fn set_bias(&mut self, i: usize, v: f64) {
        self.bias[i] = v;
    }

    pub fn add_bias(&mut self, i: usize, v: f64) {
        self.bias[i] += v;
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(input)
                    .fold(self.bias[i], |acc, (w, x)| acc + w * x)
            })
            .collect()
    }

    /// Adds `src` into the block starting at `(row_off, col_off)`,
    /// biases included.
    pub(crate) fn add_block(&mut self, src: &AffineLayer, row_off: usize, col_off: usize) {
        for i in 0..src.rows {
            self.bias[row_off + i] += src.bias[i];
            for j in 0..src.cols {
                self.add_weight(row_off + i, col_off + j, src.weight(i, j));
            }
        }
    }

    /// Adds the fused map `input ∘ (scale · readout)` into rows starting at
    /// `row_off`, reading columns starting at `col_off`. `input` is `k×1`,
    /// `readout` is `1×m`.
    pub(crate) fn add_fused(
        &mut self,
        input: &AffineLayer,
        readout: &AffineLayer,
        scale: f64,
        row_off: usize,
        col_off: usize,
    ) {
        let out_bias = scale * readout.bias[0];
        for i in 0..input.rows {
            let w = input.weight(i, 0);
            self.bias[row_off + i] += w * out_bias + input.bias[i];
            for j in 0..readout.cols {
                self.add_weight(row_off + i, col_off + j, w * scale * readout.weight(0, j));
            }
        }
    }

    /// Adds `scale · readout` into row `row`, reading columns from `col_off`.
    pub(crate) fn add_readout(
        &mut self,
        readout: &AffineLayer,
        scale: f64,
        row: usize,
        col_off: usize,
    ) {
        self.bias[row] += scale * readout.bias[0];
        for j in 0..readout.cols {
            self.add_weight(row, col_off + j, scale * readout.weight(0, j));
        }
    }
}
