use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spline2relu::approx::{
    empirical_seminorm, lip_alpha_approximant, loglog_slope, measure_sigma, rate_experiment,
    write_csv, ExperimentRecord, TargetFunction,
};
use spline2relu::compiler::{compile_fourier_sum, compile_spline, takagi_network, FourierTerm};
use spline2relu::cpwl::{sup_diff, Cpwl};
use spline2relu::io::{read_network, read_spline, write_special, NetworkFile};
use spline2relu::plot::{Chart, Scale, Series};
use spline2relu::riesz::{
    frame_bounds, lemsum_constant, lemsum_lhs, mu_squared, odd_tail, operator_gaps, ODD_CAP,
};
use spline2relu::{Kind, Network, SpecialNetwork};

use crate::{Cli, Command, Family};

pub fn run(cli: &Cli) -> Result<()> {
    if cli.grid < 2 {
        bail!("--grid must be at least 2, got {}", cli.grid);
    }
    match &cli.command {
        Command::Compile { spline } => compile(cli, spline),
        Command::Verify {
            network,
            spline,
            tol,
        } => verify(network, spline, *tol),
        Command::Eval { file, xs } => eval(cli, file, xs),
        Command::Rates {
            family,
            ms,
            alpha,
            timing,
            r,
        } => rates(cli, *family, ms.as_deref(), *alpha, *timing, *r),
        Command::Riesz { k, gap_k, samples } => riesz(cli, *k, *gap_k, *samples),
        Command::Takagi { m, parabola } => takagi(cli, *m, *parabola),
        Command::Fourier { terms } => fourier(cli, terms),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_spline(path: &Path) -> Result<Cpwl> {
    read_spline(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_network(path: &Path) -> Result<NetworkFile> {
    read_network(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn write_net(path: Option<&PathBuf>, net: &SpecialNetwork) -> Result<()> {
    if let Some(p) = path {
        write(p, &write_special(net))?;
    }
    Ok(())
}

fn compile(cli: &Cli, spline: &Path) -> Result<()> {
    let t = load_spline(spline)?;
    let (net, report) = compile_spline(&t, cli.width)?;
    let err = sup_diff(&net.extract_cpwl()?, &t);
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| spline.with_extension("net"));
    write(&out, &write_special(&net))?;
    println!("{report}");
    println!("max_error={err:e}");
    println!("network={}", out.display());
    if !report.within_budget() {
        bail!(
            "parameter count {} exceeds the bound {}",
            report.params,
            report.budget_bound
        );
    }
    Ok(())
}

fn verify(network: &Path, spline: &Path, tol: f64) -> Result<()> {
    let net = load_network(network)?;
    let t = load_spline(spline)?;
    let dev = sup_diff(&net.extract_cpwl()?, &t);
    println!("deviation={dev:e}");
    if dev > tol {
        bail!("deviation {dev:e} exceeds tolerance {tol:e}");
    }
    Ok(())
}

fn eval(cli: &Cli, file: &Path, xs: &[f64]) -> Result<()> {
    let text = read(file)?;
    // network files start with a three-field header, spline files with a count
    let is_network = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.split_whitespace().count() == 3);
    let f: Box<dyn Fn(f64) -> Result<f64>> = if is_network {
        let net = read_network(&text).with_context(|| format!("in {}", file.display()))?;
        Box::new(move |x| Ok(net.forward(x)))
    } else {
        let s = read_spline(&text).with_context(|| format!("in {}", file.display()))?;
        Box::new(move |x| Ok(s.eval(x)?))
    };
    let grid: Vec<f64>;
    let points = if xs.is_empty() {
        grid = (0..cli.grid)
            .map(|i| i as f64 / (cli.grid - 1) as f64)
            .collect();
        &grid[..]
    } else {
        xs
    };
    let mut out = String::new();
    for &x in points {
        if !(0.0..=1.0).contains(&x) {
            bail!("x = {x} lies outside [0, 1]");
        }
        out.push_str(&format!("{x} {}\n", f(x)?));
    }
    emit(cli.out.as_ref(), &out)
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_ms(spec: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty range {spec}");
        }
        return Ok((a..=b).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("bad m value {s:?}"))
        })
        .collect()
}

fn dyadic(n: usize, ratio: f64) -> Vec<f64> {
    (1..=n as i32).map(|k| ratio.powi(k)).collect()
}

/// `Σ c_k H^{∘k}(x)` by iterating the hat map.
fn takagi_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut y = x;
    let mut s = 0.0;
    for c in coeffs {
        y = if y <= 0.5 { 2.0 * y } else { 2.0 * (1.0 - y) };
        s += c * y;
    }
    s
}

/// A random member of the unit Lip-α ball vanishing at 0 and 1.
fn random_lip(seed: u64, alpha: f64) -> Result<TargetFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t: f64 = rng.gen_range(0.0..1.0);
    let mix: f64 = rng.gen_range(0.0..1.0);
    let n = 64;
    let mut v = vec![0.0; n + 1];
    for i in 0..n {
        v[i + 1] = v[i] + rng.gen_range(-1.0..1.0) / n as f64;
    }
    let walk = Cpwl::new((0..=n).map(|i| i as f64 / n as f64).collect(), v)?;
    Ok(TargetFunction::new(move |x: f64| {
        let w = mix * (x - t).abs().powf(alpha) + (1.0 - mix) * walk.eval_clamped(x);
        let cap = x.min(1.0 - x).powf(alpha);
        w.clamp(-cap, cap)
    })
    .with_lip(alpha, 1.0))
}

fn rates(
    cli: &Cli,
    family: Family,
    ms: Option<&str>,
    alpha: f64,
    timing: bool,
    r: Option<f64>,
) -> Result<()> {
    let ms = match ms {
        Some(s) => parse_ms(s)?,
        None => match family {
            Family::Takagi => (1..=12).collect(),
            Family::Parabola => (1..=10).collect(),
            _ => (3..=10).map(|j| (1usize << j) + 1).collect(),
        },
    };
    let width = cli.width;
    let grid = cli.grid;
    let records: Vec<ExperimentRecord> = match family {
        Family::Takagi | Family::Parabola => {
            let ratio = if family == Family::Takagi { 0.5 } else { 0.25 };
            let top = ms.iter().copied().max().unwrap_or(1);
            let coeffs = dyadic(top + 20, ratio);
            let f = if family == Family::Takagi {
                let c = coeffs.clone();
                TargetFunction::new(move |x| takagi_eval(&c, x))
            } else {
                TargetFunction::new(|x| x * (1.0 - x))
            };
            rate_experiment(&f, |m| takagi_network(&coeffs[..m]), &ms, grid)?
        }
        Family::Kink | Family::Root | Family::Random => {
            let (f, a) = match family {
                Family::Kink => (
                    TargetFunction::new(|x: f64| (x - 0.5).abs()).with_lip(1.0, 1.0),
                    1.0,
                ),
                Family::Root => (
                    TargetFunction::new(move |x: f64| (x - 0.5).abs().powf(alpha))
                        .with_lip(alpha, 1.0),
                    alpha,
                ),
                _ => (random_lip(cli.seed, alpha)?, alpha),
            };
            rate_experiment(
                &f,
                |m| Ok(lip_alpha_approximant(&f, a, m, width)?.0),
                &ms,
                grid,
            )?
        }
    };
    let mut csv = Vec::new();
    write_csv(&mut csv, &records, timing)?;
    emit(cli.out.as_ref(), std::str::from_utf8(&csv)?)?;
    let ok: Vec<&ExperimentRecord> = records
        .iter()
        .filter(|r| r.error.is_none() && r.sup_error > 0.0)
        .collect();
    if ok.len() >= 2 {
        let by_m: Vec<(f64, f64)> = ok.iter().map(|r| (r.m as f64, r.sup_error)).collect();
        let by_mlog: Vec<(f64, f64)> = ok
            .iter()
            .filter(|r| r.m >= 2)
            .map(|r| (r.m as f64 * (r.m as f64).ln(), r.sup_error))
            .collect();
        eprintln!("slope vs m: {:.4}", loglog_slope(&by_m));
        if by_mlog.len() >= 2 {
            eprintln!("slope vs m ln m: {:.4}", loglog_slope(&by_mlog));
        }
    }
    if let Some(r) = r {
        eprintln!("seminorm (r = {r}): {:e}", empirical_seminorm(&records, r));
    }
    if let Some(svg) = &cli.svg {
        let chart = Chart {
            title: format!("{family:?} family"),
            x_label: "m".into(),
            y_label: "sup error".into(),
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            series: vec![
                Series {
                    label: "error vs m".into(),
                    points: ok.iter().map(|r| (r.m as f64, r.sup_error)).collect(),
                },
                Series {
                    label: "error vs m ln m".into(),
                    points: ok
                        .iter()
                        .map(|r| (r.m as f64 * (r.m as f64).ln(), r.sup_error))
                        .collect(),
                },
            ],
        };
        write(svg, &chart.to_svg())?;
    }
    if let Some(bad) = records.iter().find(|r| r.error.is_some()) {
        bail!(
            "m = {} failed: {}",
            bad.m,
            bad.error.as_deref().unwrap_or("")
        );
    }
    Ok(())
}

fn riesz(cli: &Cli, k: usize, gap_k: usize, samples: usize) -> Result<()> {
    let (lo, hi) = frame_bounds(k)?;
    let mut rows = vec![
        ("k".to_string(), k.to_string()),
        ("lambda_min".into(), format!("{lo:.10}")),
        ("lambda_max".into(), format!("{hi:.10}")),
        ("gap_k".into(), gap_k.to_string()),
    ];
    for kind in [Kind::Cosine, Kind::Sine] {
        let g = operator_gaps(kind, gap_k)?;
        rows.push((format!("gap_tstar_t_{kind}"), format!("{:.10}", g.tstar_t)));
        rows.push((format!("gap_t_tstar_{kind}"), format!("{:.10}", g.t_tstar)));
    }
    rows.push(("rho".into(), format!("{:.10}", 1.0 - mu_squared() + 0.5)));
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(1..=40);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        worst = worst.max(lemsum_lhs(&u, ODD_CAP)? / (lemsum_constant() * norm2));
    }
    rows.push(("lemsum_worst_ratio".into(), format!("{worst:.10}")));
    rows.push(("odd_cap".into(), ODD_CAP.to_string()));
    rows.push(("odd_tail".into(), format!("{:e}", odd_tail(ODD_CAP))));
    for (name, v) in &rows {
        println!("{name}={v}");
    }
    if let Some(p) = &cli.out {
        let mut csv = String::from("quantity,value\n");
        for (name, v) in &rows {
            csv.push_str(&format!("{name},{v}\n"));
        }
        write(p, &csv)?;
    }
    Ok(())
}

fn takagi(cli: &Cli, m: usize, parabola: bool) -> Result<()> {
    if m == 0 {
        bail!("--m must be at least 1");
    }
    let ratio = if parabola { 0.25 } else { 0.5 };
    let coeffs = dyadic(m + 20, ratio);
    let net = takagi_network(&coeffs[..m])?;
    let (f, bound) = if parabola {
        (
            TargetFunction::new(|x| x * (1.0 - x)),
            ratio.powi(m as i32) / 3.0,
        )
    } else {
        let c = coeffs.clone();
        (
            TargetFunction::new(move |x| takagi_eval(&c, x)),
            ratio.powi(m as i32),
        )
    };
    let err = measure_sigma(&f, &net, cli.grid)?;
    println!("width={}", net.width());
    println!("depth={}", net.depth());
    println!("params={}", net.params());
    println!("sup_error={err:e}");
    println!("bound={bound:e}");
    write_net(cli.out.as_ref(), &net)?;
    if err > bound {
        bail!("error {err:e} exceeds the bound {bound:e}");
    }
    Ok(())
}

fn parse_terms(spec: &str) -> Result<Vec<FourierTerm>> {
    spec.split(',')
        .map(|t| {
            let parts: Vec<&str> = t.trim().split(':').collect();
            if parts.len() != 3 {
                bail!("term {t:?} is not of the form j:a:b");
            }
            Ok(FourierTerm {
                j: parts[0].parse()?,
                a: parts[1].parse()?,
                b: parts[2].parse()?,
            })
        })
        .collect()
}

fn fourier(cli: &Cli, terms: &str) -> Result<()> {
    let terms = parse_terms(terms)?;
    let (net, report) = compile_fourier_sum(&terms, cli.width)?;
    let target = spline2relu::compiler::fourier_target(&terms)?;
    let err = sup_diff(&net.extract_cpwl()?, &target);
    println!("{report}");
    println!("max_error={err:e}");
    write_net(cli.out.as_ref(), &net)?;
    Ok(())
}
