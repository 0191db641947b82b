//! Acceptance checks. Prints one `[PASS]` or `[FAIL]` line per criterion and
//! exits with a nonzero status if any criterion fails.

mod common;

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spline2relu::approx::{
    lip_alpha_approximant, lip_alpha_bound, loglog_slope, measure_sigma, pattern_resolution,
    quantize_pattern, TargetFunction,
};
use spline2relu::compiler::{
    compile_fourier_sum, compile_self_similar, compile_spline, fourier_atom, self_similar_target,
    takagi_network, FourierTerm, SELF_SIMILAR_C1, SELF_SIMILAR_C2,
};
use spline2relu::cpwl::{hat, linear_combination, sup_diff, takagi_partial};
use spline2relu::network::{
    compose_nets, concat_sum, iterate_apply_sum, iterate_sum, param_count, stack_relu_sum,
    stack_sum,
};
use spline2relu::riesz::{
    basis_fn, frame_bounds, gram, inner_product, lemsum_constant, lemsum_lhs, mu_squared,
    operator_gaps, system, ODD_CAP,
};
use spline2relu::{Cpwl, Kind, Network, ReluNetwork, SpecialNetwork};

use common::{lip_sample, random_net, random_spline, random_unit_net};

const SEED: u64 = 42;
/// Exactness tolerance for network extractions against their oracles.
const EXACT_TOL: f64 = 1e-9;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

/// Budget for compiled splines in each regime.
fn spline_bound(n: usize, w: usize) -> usize {
    let small = w * w + 4 * w + 1;
    match w {
        4 if n >= 4 => 19 * n,
        5..=7 if n >= 2 * (w - 2) => 25 * n,
        w if w >= 8 && n >= (w - 2) / 6 * (w - 2) => 61 * n,
        _ => small,
    }
}

struct Corpus {
    rows: Vec<(usize, usize, f64, usize)>,
    secs: f64,
}

fn spline_corpus() -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let widths = [4, 5, 6, 8, 13];
    let start = Instant::now();
    let mut rows = Vec::with_capacity(200);
    for i in 0..200 {
        let n = rng.gen_range(1..=200);
        let w = widths[i % widths.len()];
        let t = random_spline(&mut rng, n);
        let (net, rep) = compile_spline(&t, w).unwrap();
        let err = sup_diff(&net.extract_cpwl().unwrap(), &t);
        assert_eq!(rep.params, param_count(net.width(), net.depth()));
        rows.push((n, w, err, rep.params));
    }
    Corpus {
        rows,
        secs: start.elapsed().as_secs_f64(),
    }
}

fn c1_exact_splines(c: &Corpus) -> Check {
    let worst = c.rows.iter().map(|r| r.2).fold(0.0, f64::max);
    check(
        worst <= EXACT_TOL && c.secs < 60.0,
        format!(
            "200 splines, max sup_diff {worst:.2e} (tol {EXACT_TOL:e}), {:.2} s (limit 60 s)",
            c.secs
        ),
    )
}

fn c2_budgets(c: &Corpus) -> Check {
    let bad: Vec<_> = c
        .rows
        .iter()
        .filter(|r| r.3 > spline_bound(r.0, r.1))
        .collect();
    let worst = c
        .rows
        .iter()
        .map(|r| r.3 as f64 / spline_bound(r.0, r.1) as f64)
        .fold(0.0, f64::max);
    check(
        bad.is_empty(),
        format!(
            "{} violations over 200 splines, max params/bound {worst:.3}",
            bad.len()
        ),
    )
}

fn c3_n42() -> Check {
    let (net, rep) = compile_spline(&hat(), 4).unwrap();
    let ok = param_count(4, 2) == 33 && rep.params == 33 && net.depth() == 2;
    check(
        ok,
        format!(
            "param_count(4, 2) = {}, compiled hat at W=4: params {}",
            param_count(4, 2),
            rep.params
        ),
    )
}

fn c4_sawtooth() -> Check {
    let mut net = ReluNetwork::hat();
    let mut params = vec![net.params()];
    let mut ok = net.extract_cpwl().unwrap().interior_breakpoints() == 1;
    for k in 2..=14u32 {
        net = compose_nets(&net, &ReluNetwork::hat()).unwrap();
        let f = net.extract_cpwl().unwrap();
        ok &= f.interior_breakpoints() == (1 << k) - 1;
        params.push(net.params());
    }
    let step = params[1] - params[0];
    let linear = params.windows(2).all(|w| w[1] - w[0] == step);
    check(
        ok && linear,
        format!(
            "k = 1..14 give 2^k - 1 breakpoints: {ok}; params {} .. {} in steps of {step}",
            params[0], params[13]
        ),
    )
}

/// `max (x(1-x) - f(x))` over `[0, 1]`, exact for a CPwL `f`.
fn parabola_gap(f: &Cpwl) -> f64 {
    let xs = f.breakpoints();
    let vs = f.values();
    let mut best: f64 = 0.0;
    for i in 0..xs.len() - 1 {
        let s = (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i]);
        let x = ((1.0 - s) / 2.0).clamp(xs[i], xs[i + 1]);
        let line = vs[i] + s * (x - xs[i]);
        best = best.max((x * (1.0 - x) - line).abs());
        for &y in &[xs[i], xs[i + 1]] {
            let line = vs[i] + s * (y - xs[i]);
            best = best.max((y * (1.0 - y) - line).abs());
        }
    }
    best
}

fn c5_takagi() -> Check {
    let dyadic: Vec<f64> = (1..=34).map(|k| 0.5f64.powi(k)).collect();
    // H^{∘(m+j)} = H^{∘j} ∘ H^{∘m} and H^{∘m} is onto [0, 1], so the tail of
    // order m+1..m+20 has sup exactly 2^{-m} max T_20 with T_20 the order-20 sum
    let tail_max = takagi_partial(&dyadic[..20]).unwrap().max_value();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_grid: f64 = 0.0;
    let mut worst_parab: f64 = 0.0;
    let mut ok = true;
    for m in 1..=14usize {
        let net = takagi_network(&dyadic[..m]).unwrap();
        let f = net.extract_cpwl().unwrap();
        let head = sup_diff(&f, &takagi_partial(&dyadic[..m]).unwrap());
        let bound = 0.5f64.powi(m as i32);
        let err = head + bound * tail_max;
        // direct check on a grid against the evaluated order-(m+20) series
        let coeffs = dyadic[..m + 20].to_vec();
        let oracle = TargetFunction::new(move |x| {
            let mut y = x;
            let mut s = 0.0;
            for c in &coeffs {
                y = if y <= 0.5 { 2.0 * y } else { 2.0 * (1.0 - y) };
                s += c * y;
            }
            s
        });
        let grid = measure_sigma(&oracle, &net, 10_001).unwrap();
        ok &= err <= bound && grid <= bound;
        worst_ratio = worst_ratio.max(err / bound);
        worst_grid = worst_grid.max(grid / bound);
        let quarter: Vec<f64> = (1..=m).map(|k| 0.25f64.powi(k as i32)).collect();
        let p = takagi_network(&quarter).unwrap().extract_cpwl().unwrap();
        let gap = parabola_gap(&p);
        let pb = 0.25f64.powi(m as i32) / 3.0;
        ok &= gap <= pb;
        worst_parab = worst_parab.max(gap / pb);
    }
    check(
        ok,
        format!(
            "m = 1..14: max error/2^-m {worst_ratio:.4} (exact), {worst_grid:.4} (grid); x(1-x): max error/(4^-m/3) {worst_parab:.4}"
        ),
    )
}

fn c6_entropy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut distinct: HashMap<(u64, usize), HashSet<Vec<i64>>> = HashMap::new();
    for i in 0..500 {
        let alpha = if i % 2 == 0 { 0.5 } else { 1.0 };
        let k = 3 + (i / 2) % 6;
        let g = lip_sample(&mut rng, alpha);
        let p = match quantize_pattern(&g, k, alpha) {
            Ok(p) => p,
            Err(_) => {
                ok = false;
                continue;
            }
        };
        let levels = p.levels();
        ok &=
            levels[0] == 0 && levels[k] == 0 && levels.windows(2).all(|w| (w[1] - w[0]).abs() <= 1);
        let s = p.to_cpwl(alpha);
        let bound = 2.0 * (k as f64).powf(-alpha);
        let err = (0..=10_000)
            .map(|j| {
                let x = j as f64 / 1e4;
                (g(x) - s.eval(x).unwrap()).abs()
            })
            .fold(0.0, f64::max);
        ok &= err <= bound;
        worst = worst.max(err / bound);
        distinct
            .entry((alpha.to_bits(), k))
            .or_default()
            .insert(levels.to_vec());
    }
    let counts_ok = distinct
        .iter()
        .all(|((_, k), s)| s.len() <= 3usize.pow(*k as u32));
    let most = distinct.values().map(|s| s.len()).max().unwrap_or(0);
    check(
        ok && counts_ok,
        format!("500 samples: max error/(2k^-α) {worst:.4}; largest distinct-pattern count {most} (each ≤ 3^k: {counts_ok})"),
    )
}

fn c7_lip() -> Check {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut run = |f: &TargetFunction, alpha: f64, m: usize| -> f64 {
        let (_, rec) = lip_alpha_approximant(f, alpha, m, 8).unwrap();
        let k = pattern_resolution(m).max(1);
        let bound = lip_alpha_bound(k, m, alpha, f.lip().map_or(1.0, |l| l.1));
        ok &= rec.sup_error <= bound;
        worst = worst.max(rec.sup_error / bound);
        rec.sup_error
    };
    let kink = TargetFunction::new(|x: f64| (x - 0.5).abs()).with_lip(1.0, 1.0);
    // odd m keeps the kink inside an interval; for even m the interpolant is exact
    let ms = [9usize, 17, 33, 65, 129, 257, 513, 1023];
    let mut pts = Vec::new();
    for &m in &ms {
        let e = run(&kink, 1.0, m);
        let mf = m as f64;
        pts.push((mf * mf.ln(), e));
    }
    let root = TargetFunction::new(|x: f64| (x - 0.5).abs().sqrt()).with_lip(0.5, 1.0);
    for m in [20, 100, 250] {
        run(&root, 0.5, m);
    }
    let wave = TargetFunction::new(|x: f64| (2.0 * PI * x).sin() / (2.0 * PI)).with_lip(1.0, 1.0);
    for m in [30, 90, 200] {
        run(&wave, 1.0, m);
    }
    let slope = loglog_slope(&pts);
    let decreasing = pts.windows(2).all(|w| w[1].1 < w[0].1);
    check(
        ok && slope <= -0.9 && decreasing,
        format!(
            "14 runs, max error/4K(km)^-α {worst:.4}; |x-1/2| over m = 9..1023: slope vs m ln m {slope:.3} (limit -0.9), decreasing {decreasing}"
        ),
    )
}

fn random_pattern(rng: &mut ChaCha8Rng, k: usize) -> Cpwl {
    let mut xs: Vec<f64> = Vec::new();
    while xs.len() < k {
        let x: f64 = rng.gen_range(0.02..0.98);
        if xs.iter().all(|y| (x - y).abs() > 1e-3) {
            xs.push(x);
        }
    }
    xs.sort_by(f64::total_cmp);
    let mut nodes = vec![(0.0, 0.0)];
    nodes.extend(xs.into_iter().map(|x| (x, rng.gen_range(-1.0..1.0))));
    nodes.push((1.0, 0.0));
    Cpwl::from_nodes(&nodes).unwrap()
}

fn random_intervals(rng: &mut ChaCha8Rng, m: usize) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = Vec::new();
    while cuts.len() + 1 < m {
        let x: f64 = rng.gen_range(0.0..1.0);
        if cuts.iter().all(|y| (x - y).abs() > 1e-3) && x > 1e-3 && x < 1.0 - 1e-3 {
            cuts.push(x);
        }
    }
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            if rng.gen_bool(0.5) {
                (lo, hi)
            } else {
                (
                    lo + (hi - lo) * rng.gen_range(0.0..0.3),
                    hi - (hi - lo) * rng.gen_range(0.0..0.3),
                )
            }
        })
        .collect()
}

fn c8_self_similar() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let widths = [8, 10, 12, 16];
    let mut ok = true;
    let mut worst_err: f64 = 0.0;
    let mut worst_budget: f64 = 0.0;
    for i in 0..40 {
        let k = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=32);
        let w = widths[i % widths.len()];
        let s = random_pattern(&mut rng, k);
        let iv = random_intervals(&mut rng, m);
        let (net, rep) = compile_self_similar(&s, &iv, w).unwrap();
        let err = sup_diff(
            &net.extract_cpwl().unwrap(),
            &self_similar_target(&s, &iv).unwrap(),
        );
        let bound = SELF_SIMILAR_C1 * (k + m) + SELF_SIMILAR_C2 * w * w;
        ok &= err <= EXACT_TOL && rep.params <= bound;
        worst_err = worst_err.max(err);
        worst_budget = worst_budget.max(rep.params as f64 / bound as f64);
    }
    // growth: params track k + m while the target has about k·m breakpoints
    let mut ratios = Vec::new();
    for (k, m) in [(2usize, 2usize), (4, 8), (8, 16), (16, 64), (32, 128)] {
        let s = random_pattern(&mut rng, k);
        let iv: Vec<(f64, f64)> = (0..m)
            .map(|i| (i as f64 / m as f64, (i as f64 + 0.8) / m as f64))
            .collect();
        let (_, rep) = compile_self_similar(&s, &iv, 8).unwrap();
        ratios.push(rep.params as f64 / rep.target_breakpoints as f64);
    }
    let shrinking = ratios.windows(2).all(|w| w[1] < w[0]);
    let r: Vec<String> = ratios.iter().map(|r| format!("{r:.1}")).collect();
    check(
        ok && shrinking,
        format!(
            "40 instances: max sup_diff {worst_err:.2e}, max params/(C1(k+m)+C2W²) {worst_budget:.3} with C1 = {SELF_SIMILAR_C1}, C2 = {SELF_SIMILAR_C2}; params/breakpoints for (k,m) = (2,2)..(32,128): {}",
            r.join(", ")
        ),
    )
}

fn c9_fourier() -> Check {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for j in 1..=64 {
        for kind in [Kind::Cosine, Kind::Sine] {
            let f = fourier_atom(kind, j).unwrap().extract_cpwl().unwrap();
            let g = basis_fn(kind, j).unwrap().canonicalize();
            let d = sup_diff(&f, &g);
            worst = worst.max(d);
            ok &= d <= 1e-12 && f.interior_breakpoints() == g.interior_breakpoints();
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut depth_ok = true;
    let mut sum_err: f64 = 0.0;
    for i in 0..12 {
        let w = [6, 7, 10, 14][i % 4];
        let k = rng.gen_range(1..=6);
        let mut idx = HashSet::new();
        while idx.len() < k {
            idx.insert(rng.gen_range(1..=40usize));
        }
        let mut idx: Vec<usize> = idx.into_iter().collect();
        idx.sort_unstable();
        let terms: Vec<FourierTerm> = idx
            .iter()
            .map(|&j| FourierTerm {
                j,
                a: rng.gen_range(-1.0..1.0),
                b: rng.gen_range(-1.0..1.0),
            })
            .collect();
        let (net, _) = compile_fourier_sum(&terms, w).unwrap();
        let lambda = *idx.last().unwrap();
        let g = (w - 2) / 4;
        let bound = 2 * k.div_ceil(g) * ((lambda as f64).log2().ceil() as usize + 2);
        depth_ok &= net.depth() <= bound && net.width() == w;
        let fs: Vec<(f64, Cpwl)> = terms
            .iter()
            .flat_map(|t| {
                [
                    (t.a, basis_fn(Kind::Cosine, t.j).unwrap()),
                    (t.b, basis_fn(Kind::Sine, t.j).unwrap()),
                ]
            })
            .collect();
        let refs: Vec<(f64, &Cpwl)> = fs.iter().map(|(a, f)| (*a, f)).collect();
        sum_err = sum_err.max(sup_diff(
            &net.extract_cpwl().unwrap(),
            &linear_combination(&refs, 0.0),
        ));
    }
    check(
        ok && depth_ok && sum_err <= EXACT_TOL,
        format!("atoms j ≤ 64: max sup_diff {worst:.1e}; 12 random sums: depth within bound {depth_ok}, max sup_diff {sum_err:.1e}"),
    )
}

fn c10_riesz() -> Check {
    let (lo, hi) = frame_bounds(32).unwrap();
    let bounds_ok = lo >= 1.0 / 6.0 - 1e-6 && hi <= 0.5 + 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let k = 32;
    let fs = system(k).unwrap();
    let g = gram(k).unwrap();
    let mut qf_worst: f64 = 0.0;
    for _ in 0..100 {
        let v: Vec<f64> = (0..2 * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let terms: Vec<(f64, &Cpwl)> = v.iter().copied().zip(fs.iter()).collect();
        let f = linear_combination(&terms, 0.0);
        let dv = quadratic_form(&g, &v);
        qf_worst = qf_worst.max((inner_product(&f, &f) - dv).abs());
    }
    let mut lem_worst: f64 = 0.0;
    let mut lem_ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(1..=40);
        let u: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(0.0..1.0)
                }
            })
            .collect();
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        let lhs = lemsum_lhs(&u, ODD_CAP).unwrap();
        lem_ok &= lhs <= lemsum_constant() * norm2 + 1e-9;
        if norm2 > 0.0 {
            lem_worst = lem_worst.max(lhs / (lemsum_constant() * norm2));
        }
    }
    let rho = 1.0 - mu_squared() + 0.5;
    let mut gaps_ok = rho <= 0.5145;
    let mut gap_text = Vec::new();
    for kind in [Kind::Cosine, Kind::Sine] {
        let g = operator_gaps(kind, 64).unwrap();
        gaps_ok &= g.tstar_t <= 0.5 + 1e-6 && g.t_tstar <= 0.5145 + 1e-6;
        gap_text.push(format!("{kind}: {:.4}/{:.4}", g.tstar_t, g.t_tstar));
    }
    check(
        bounds_ok && qf_worst <= 1e-10 && lem_ok && gaps_ok,
        format!(
            "K=32 bounds ({lo:.4}, {hi:.4}); quadratic form max dev {qf_worst:.1e}; LemSum max ratio {lem_worst:.3}; K=64 gaps T*T/TT* {}",
            gap_text.join(", ")
        ),
    )
}

fn quadratic_form(g: &impl std::ops::Index<(usize, usize), Output = f64>, v: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..v.len() {
        for j in 0..v.len() {
            s += v[i] * g[(i, j)] * v[j];
        }
    }
    s
}

fn random_special(rng: &mut ChaCha8Rng, w: usize) -> SpecialNetwork {
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(0..12);
        compile_spline(&random_spline(rng, n), w).unwrap().0
    } else {
        let k = rng.gen_range(1..=3);
        let nets: Vec<ReluNetwork> = (0..k)
            .map(|_| {
                let d = rng.gen_range(1..=3);
                random_net(rng, w - 2, d)
            })
            .collect();
        stack_sum(&nets).unwrap()
    }
}

fn c11_combinators() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: [f64; 6] = [0.0; 6];
    let mut shapes_ok = [true; 6];
    for _ in 0..1000 {
        // concat_sum
        let w = rng.gen_range(4..=7);
        let (a, b) = (random_special(&mut rng, w), random_special(&mut rng, w));
        let s = concat_sum(&a, &b).unwrap();
        let want = a
            .extract_cpwl()
            .unwrap()
            .add(&b.extract_cpwl().unwrap(), 1.0, 1.0);
        worst[0] = worst[0].max(sup_diff(&s.extract_cpwl().unwrap(), &want));
        shapes_ok[0] &= s.depth() == a.depth() + b.depth() && s.width() == w;

        // stack_sum
        let w = rng.gen_range(2..=4);
        let k = rng.gen_range(1..=3);
        let nets: Vec<ReluNetwork> = (0..k)
            .map(|_| {
                let d = rng.gen_range(1..=3);
                random_net(&mut rng, w, d)
            })
            .collect();
        let s = stack_sum(&nets).unwrap();
        let fs: Vec<Cpwl> = nets.iter().map(|n| n.extract_cpwl().unwrap()).collect();
        let refs: Vec<(f64, &Cpwl)> = fs.iter().map(|f| (1.0, f)).collect();
        worst[1] = worst[1].max(sup_diff(
            &s.extract_cpwl().unwrap(),
            &linear_combination(&refs, 0.0),
        ));
        shapes_ok[1] &=
            s.width() == w + 2 && s.depth() == nets.iter().map(|n| n.depth()).sum::<usize>();

        // stack_relu_sum
        let s = stack_relu_sum(&nets).unwrap();
        let rs: Vec<Cpwl> = fs.iter().map(|f| f.relu()).collect();
        let refs: Vec<(f64, &Cpwl)> = rs.iter().map(|f| (1.0, f)).collect();
        worst[2] = worst[2].max(sup_diff(
            &s.extract_cpwl().unwrap(),
            &linear_combination(&refs, 0.0),
        ));
        shapes_ok[2] &=
            s.width() == w + 2 && s.depth() == k + nets.iter().map(|n| n.depth()).sum::<usize>();

        // compose_nets
        let n1 = {
            let d = rng.gen_range(1..=3);
            random_unit_net(&mut rng, w, d)
        };
        let n2 = {
            let d = rng.gen_range(1..=3);
            random_net(&mut rng, w, d)
        };
        let c = compose_nets(&n1, &n2).unwrap();
        let want = n2
            .extract_cpwl()
            .unwrap()
            .compose(&n1.extract_cpwl().unwrap())
            .unwrap();
        worst[3] = worst[3].max(sup_diff(&c.extract_cpwl().unwrap(), &want));
        shapes_ok[3] &= c.depth() == n1.depth() + n2.depth() && c.width() == w;

        // iterate_sum
        let t = {
            let d = rng.gen_range(1..=2);
            random_unit_net(&mut rng, w, d)
        };
        let m = rng.gen_range(1..=4);
        let a: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = iterate_sum(&t, &a).unwrap();
        let tf = t.extract_cpwl().unwrap();
        let mut it = tf.clone();
        let mut want = Cpwl::zero();
        for (i, ai) in a.iter().enumerate() {
            if i > 0 {
                it = tf.compose(&it).unwrap();
            }
            want = want.add(&it, 1.0, *ai);
        }
        worst[4] = worst[4].max(sup_diff(&s.extract_cpwl().unwrap(), &want));
        shapes_ok[4] &= s.width() == w + 2 && s.depth() == t.depth() * m;

        // iterate_apply_sum
        let l = t.depth();
        let w2 = rng.gen_range(1..=3);
        let g = random_net(&mut rng, w2, l);
        let s = iterate_apply_sum(&t, &g, &a).unwrap();
        let gf = g.extract_cpwl().unwrap();
        let mut it = tf.clone();
        let mut want = Cpwl::zero();
        for (i, ai) in a.iter().enumerate() {
            if i > 0 {
                it = tf.compose(&it).unwrap();
            }
            want = want.add(&gf.compose(&it).unwrap(), 1.0, *ai);
        }
        worst[5] = worst[5].max(sup_diff(&s.extract_cpwl().unwrap(), &want));
        shapes_ok[5] &= s.width() == w + w2 + 2 && s.depth() == l * (m + 1);
    }
    let names = [
        "concat_sum",
        "stack_sum",
        "stack_relu_sum",
        "compose_nets",
        "iterate_sum",
        "iterate_apply_sum",
    ];
    let ok = worst.iter().all(|&e| e <= EXACT_TOL) && shapes_ok.iter().all(|&s| s);
    let parts: Vec<String> = names
        .iter()
        .zip(worst.iter().zip(&shapes_ok))
        .map(|(n, (e, s))| format!("{n} {e:.1e}{}", if *s { "" } else { " (shape mismatch)" }))
        .collect();
    check(
        ok,
        format!("1000 draws each, max sup_diff: {}", parts.join(", ")),
    )
}

fn main() -> ExitCode {
    let corpus = spline_corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        (
            "exact spline compilation",
            Box::new(|| c1_exact_splines(&corpus)),
        ),
        ("parameter budgets", Box::new(|| c2_budgets(&corpus))),
        ("n(4,2) = 33", Box::new(c3_n42)),
        ("sawtooth expressivity", Box::new(c4_sawtooth)),
        ("Takagi rate", Box::new(c5_takagi)),
        ("entropy covering", Box::new(c6_entropy)),
        ("Lip-α approximant", Box::new(c7_lip)),
        ("self-similar compilation", Box::new(c8_self_similar)),
        ("Fourier-like networks", Box::new(c9_fourier)),
        ("Riesz numerics", Box::new(c10_riesz)),
        ("combinator oracle suite", Box::new(c11_combinators)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            check(false, format!("panicked: {msg}"))
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {} ({:.2} s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
