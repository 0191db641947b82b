//! Compositions and sums of compositions of splines.

use crate::cpwl::{Cpwl, RANGE_TOL};
use crate::error::{Error, Result};
use crate::network::{
    compose_nets, special_to_standard, stack_sum_weighted, ReluNetwork, SpecialNetwork,
};

use super::{compile_spline, CompileReport};

fn check_nonconstant(f: &Cpwl, j: usize) -> Result<()> {
    if f.max_value() == f.min_value() {
        return Err(Error::Degenerate(format!("factor {} is constant", j + 1)));
    }
    Ok(())
}

fn check_unit(lo: f64, hi: f64, j: usize) -> Result<()> {
    if lo < -RANGE_TOL || hi > 1.0 + RANGE_TOL {
        return Err(Error::Domain(format!(
            "factor {} maps into [{lo}, {hi}], outside the domain [0, 1] of the next factor",
            j + 1
        )));
    }
    Ok(())
}

/// Rewrites `S_k ∘ ... ∘ S_1` (first element applied first) as an equal
/// composition whose inner factors map `[0, 1]` onto `[0, 1]`: each factor is
/// restricted to the range of the previous one and affinely renormalised.
pub fn representative(chain: &[Cpwl]) -> Result<Vec<Cpwl>> {
    if chain.is_empty() {
        return Err(Error::Argument("empty composition".into()));
    }
    for (j, f) in chain.iter().enumerate() {
        check_nonconstant(f, j)?;
    }
    let k = chain.len();
    let mut out = Vec::with_capacity(k);
    let mut range: Option<(f64, f64)> = None;
    for (j, f) in chain.iter().enumerate() {
        let restricted = match range {
            None => f.clone(),
            Some((lo, hi)) => f.reparametrize(lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))?,
        };
        if j + 1 == k {
            out.push(restricted);
            break;
        }
        let (lo, hi) = (restricted.min_value(), restricted.max_value());
        if hi <= lo {
            return Err(Error::Degenerate(format!(
                "factor {} is constant on the range of the previous factors",
                j + 1
            )));
        }
        check_unit(lo, hi, j)?;
        let normalised = restricted.add_constant(-lo).scale(1.0 / (hi - lo));
        out.push(clamp_unit(&normalised));
        range = Some((lo, hi));
    }
    Ok(out)
}

fn clamp_unit(f: &Cpwl) -> Cpwl {
    let vs = f.values().iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Cpwl::new(f.breakpoints().to_vec(), vs).expect("same breakpoints")
}

fn composition_budget(ns: &[usize], width: usize) -> usize {
    34 * ns.iter().sum::<usize>() + 2 * ns.len() * (width * width + width)
}

/// Compiles `chain[k-1] ∘ ... ∘ chain[0]` into a plain ReLU network of width
/// `W` whose depth is the sum of the factor depths.
pub fn compile_composition(chain: &[Cpwl], width: usize) -> Result<(ReluNetwork, CompileReport)> {
    let reps = representative(chain)?;
    let mut net: Option<ReluNetwork> = None;
    for rep in &reps {
        let (s, _) = compile_spline(rep, width)?;
        let factor = special_to_standard(&s)?;
        net = Some(match net {
            None => factor,
            Some(inner) => compose_nets(&inner, &factor)?,
        });
    }
    let net = net.expect("nonempty chain");
    let ns: Vec<usize> = chain
        .iter()
        .map(|f| f.canonicalize().interior_breakpoints())
        .collect();
    let hyp = width >= 8 && ns.iter().all(|&n| n >= (width - 2) * ((width - 2) / 6));
    let target = composed_target(chain)?.interior_breakpoints();
    let report = CompileReport::new(&net, composition_budget(&ns, width), target, hyp);
    Ok((net, report))
}

/// The exact CPwL of `chain[k-1] ∘ ... ∘ chain[0]`.
pub fn composed_target(chain: &[Cpwl]) -> Result<Cpwl> {
    let reps = representative(chain)?;
    let mut acc = reps[0].clone();
    for f in &reps[1..] {
        acc = f.compose(&acc)?;
    }
    Ok(acc)
}

/// Compiles `Σ a_i (S_{i,l_i} ∘ ... ∘ S_{i,1})`: each composition at width
/// `W - 2`, then stacked into a special network of width `W`.
pub fn compile_sum_of_compositions(
    terms: &[(f64, Vec<Cpwl>)],
    width: usize,
) -> Result<(SpecialNetwork, CompileReport)> {
    if terms.is_empty() {
        return Err(Error::Argument("need at least one term".into()));
    }
    if width < 6 {
        return Err(Error::Unsupported(format!(
            "sums of compositions need width ≥ 6, got {width}"
        )));
    }
    let mut nets = Vec::with_capacity(terms.len());
    let mut total_n = 0;
    let mut total_len = 0;
    let mut hyp = width >= 10;
    let min_n = (width - 4) * ((width - 4) / 6);
    let mut target = Cpwl::zero();
    for (a, chain) in terms {
        let (net, _) = compile_composition(chain, width - 2)?;
        nets.push((*a, net));
        for f in chain {
            let n = f.canonicalize().interior_breakpoints();
            total_n += n;
            hyp &= n >= min_n;
        }
        total_len += chain.len();
        target = target.add(&composed_target(chain)?, 1.0, *a);
    }
    let weighted: Vec<(f64, &ReluNetwork)> = nets.iter().map(|(a, n)| (*a, n)).collect();
    let net = stack_sum_weighted(&weighted)?;
    let bound = 44 * total_n + 2 * width * (width + 1) * total_len;
    let report = CompileReport::new(&net, bound, target.interior_breakpoints(), hyp);
    Ok((net, report))
}
