//! Plain-text formats for splines and networks.
//!
//! A spline file holds the node count on its first line, then one `x v`
//! pair per line in ascending `x`. A network file starts with `W L kind`,
//! where `kind` is `plain` or `special`; then, for each of the `L + 1`
//! layers, a `rows cols` line, `rows` lines of weights and one line of
//! biases. Numbers are written with 17 significant digits, which makes a
//! write/read round trip bit-exact. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;

use crate::cpwl::Cpwl;
use crate::error::{Error, Result};
use crate::network::{AffineLayer, Network, ReluNetwork, SpecialNetwork};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_spline(f: &Cpwl) -> String {
    let mut s = format!("{}\n", f.len());
    for (x, v) in f.nodes() {
        let _ = writeln!(s, "{} {}", num(x), num(v));
    }
    s
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, found {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("expected a count, found {tok:?}")))
}

fn numbers(line: usize, l: &str, want: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = l
        .split_whitespace()
        .map(|t| parse_f64(line, t))
        .collect::<Result<_>>()?;
    if v.len() != want {
        return Err(Error::parse(
            line,
            format!("expected {want} numbers, found {}", v.len()),
        ));
    }
    Ok(v)
}

pub fn read_spline(text: &str) -> Result<Cpwl> {
    let mut lines = content_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty spline file"))?;
    let n = parse_usize(hl, header)?;
    if n < 2 {
        return Err(Error::parse(
            hl,
            format!("a spline needs at least 2 nodes, got {n}"),
        ));
    }
    let mut xs = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    let mut last = hl;
    for _ in 0..n {
        let (line, l) = lines.next().ok_or_else(|| {
            Error::parse(last + 1, format!("expected {n} nodes, found {}", xs.len()))
        })?;
        let p = numbers(line, l, 2)?;
        if let Some(&px) = xs.last() {
            if p[0] <= px {
                return Err(Error::parse(
                    line,
                    format!("x = {} does not exceed the previous x = {px}", p[0]),
                ));
            }
        }
        xs.push(p[0]);
        vs.push(p[1]);
        last = line;
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::parse(line, "trailing data after the last node"));
    }
    Cpwl::new(xs, vs).map_err(|e| Error::parse(last, e))
}

/// A network read from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum NetworkFile {
    Plain(ReluNetwork),
    Special(SpecialNetwork),
}

impl NetworkFile {
    pub fn relu(&self) -> &ReluNetwork {
        match self {
            NetworkFile::Plain(n) => n,
            NetworkFile::Special(s) => s.inner(),
        }
    }

    pub fn is_special(&self) -> bool {
        matches!(self, NetworkFile::Special(_))
    }
}

impl Network for NetworkFile {
    fn width(&self) -> usize {
        self.relu().width()
    }

    fn depth(&self) -> usize {
        self.relu().depth()
    }

    fn forward(&self, x: f64) -> f64 {
        match self {
            NetworkFile::Plain(n) => n.forward(x),
            NetworkFile::Special(s) => s.forward(x),
        }
    }

    fn extract_cpwl(&self) -> Result<Cpwl> {
        match self {
            NetworkFile::Plain(n) => n.extract_cpwl(),
            NetworkFile::Special(s) => s.extract_cpwl(),
        }
    }
}

fn write_layers(net: &ReluNetwork, kind: &str) -> String {
    let mut s = format!("{} {} {kind}\n", net.width(), net.depth());
    for layer in net.layers() {
        let _ = writeln!(s, "{} {}", layer.rows(), layer.cols());
        for i in 0..layer.rows() {
            let row: Vec<String> = layer.row(i).iter().map(|&v| num(v)).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        let b: Vec<String> = layer.biases().iter().map(|&v| num(v)).collect();
        let _ = writeln!(s, "{}", b.join(" "));
    }
    s
}

pub fn write_network(net: &ReluNetwork) -> String {
    write_layers(net, "plain")
}

pub fn write_special(net: &SpecialNetwork) -> String {
    write_layers(net.inner(), "special")
}

/// Reads either kind; special networks are re-validated.
pub fn read_network(text: &str) -> Result<NetworkFile> {
    let mut lines = content_lines(text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty network file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(Error::parse(hl, "header must be `W L kind`"));
    }
    let (w, l) = (parse_usize(hl, toks[0])?, parse_usize(hl, toks[1])?);
    let special = match toks[2] {
        "plain" => false,
        "special" => true,
        k => return Err(Error::parse(hl, format!("unknown network kind {k:?}"))),
    };
    let mut layers = Vec::with_capacity(l + 1);
    let mut last = hl;
    for _ in 0..=l {
        let (dl, dims) = lines.next().ok_or_else(|| {
            Error::parse(
                last + 1,
                format!("expected {} layers, found {}", l + 1, layers.len()),
            )
        })?;
        let d: Vec<&str> = dims.split_whitespace().collect();
        if d.len() != 2 {
            return Err(Error::parse(dl, "layer header must be `rows cols`"));
        }
        let (rows, cols) = (parse_usize(dl, d[0])?, parse_usize(dl, d[1])?);
        let mut weights = Vec::with_capacity(rows * cols);
        last = dl;
        for _ in 0..rows {
            let (line, text) = lines
                .next()
                .ok_or_else(|| Error::parse(last + 1, "missing weight row"))?;
            weights.extend(numbers(line, text, cols)?);
            last = line;
        }
        let (bl, text) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, "missing bias line"))?;
        let bias = numbers(bl, text, rows)?;
        layers.push(AffineLayer::new(rows, cols, weights, bias).map_err(|e| Error::parse(dl, e))?);
        last = bl;
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::parse(line, "trailing data after the last layer"));
    }
    let net = ReluNetwork::new(layers).map_err(|e| Error::parse(hl, e))?;
    if net.width() != w {
        return Err(Error::parse(
            hl,
            format!("header width {w}, layers have width {}", net.width()),
        ));
    }
    if special {
        Ok(NetworkFile::Special(
            SpecialNetwork::new(net).map_err(|e| Error::parse(hl, e))?,
        ))
    } else {
        Ok(NetworkFile::Plain(net))
    }
}
