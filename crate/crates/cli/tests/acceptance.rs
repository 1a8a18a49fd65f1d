//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p pardiff-cli --test acceptance`.

use std::f64::consts::{E, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pardiff_core::classify::classify_point;
use pardiff_core::elliptic::{max_principle_check, mean_value_check, sphere_area};
use pardiff_core::grid::NormKind;
use pardiff_core::mollify::{bump, derivative_commute, l1_convergence};
use pardiff_core::stencil::{
    biharmonic_stencil, centered_laplace_stencil, laplace_stencil, parse_stencil_file,
};
use pardiff_core::{
    classify_region, harnack_limit, newtonian_potential, parse, solve_biharmonic,
    solve_laplace_dirichlet, solve_poisson_dirichlet, FundamentalSolution, GridFunction,
    GridSpec, HarnackOutcome, MollifierKernel, OperatorType, Stencil, StencilTerm,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn sample(src: &str, spec: &GridSpec) -> Result<GridFunction, String> {
    ok(GridFunction::sample(&ok(parse(src))?, spec))
}

fn linf_diff(a: &GridFunction, b: &GridFunction) -> Result<f64, String> {
    Ok(ok(a.axpby(1.0, b, -1.0))?.norm(NormKind::LInf))
}

fn unit_square(h: f64) -> Result<GridSpec, String> {
    ok(GridSpec::covering(&[0.0, 0.0], &[1.0, 1.0], h))
}

fn close_to(values: &[f64], expected: &[f64], tol: f64) -> bool {
    values.len() == expected.len() && values.iter().zip(expected).all(|(a, b)| (a - b).abs() <= tol)
}

fn classification_triple() -> Outcome {
    for n in [2, 3] {
        let op = ok(laplace_stencil(n, 0.1, false))?.operator();
        let c = ok(classify_point(&op, &vec![0.3; n], 1e-12))?;
        ensure!(c.label == OperatorType::Elliptic, "n={n} Laplacian labeled {}", c.label);
        ensure!(close_to(&c.eigenvalues, &vec![2.0; n], 1e-12), "n={n}: {:?}", c.eigenvalues);
    }
    let wave = ok(Stencil::new(
        2,
        0.1,
        vec![
            StencilTerm::new(vec![2, 0], 1.0),
            StencilTerm::new(vec![1, 0], -2.0),
            StencilTerm::new(vec![0, 2], -1.0),
            StencilTerm::new(vec![0, 1], 2.0),
        ],
        0,
    ))?;
    let c = ok(classify_point(&wave.operator(), &[0.0, 0.0], 1e-12))?;
    ensure!(c.label == OperatorType::Hyperbolic, "wave labeled {}", c.label);
    ensure!(close_to(&c.eigenvalues, &[-2.0, 2.0], 1e-12), "wave: {:?}", c.eigenvalues);
    let heat = ok(Stencil::new(
        2,
        0.1,
        vec![
            StencilTerm::new(vec![1, 0], 0.5),
            StencilTerm::new(vec![-1, 0], -0.5),
            StencilTerm::new(vec![0, 2], -1.0),
            StencilTerm::new(vec![0, 1], 2.0),
            StencilTerm::new(vec![0, 0], -1.0),
        ],
        0,
    ))?;
    let c = ok(classify_point(&heat.operator(), &[0.0, 0.0], 1e-12))?;
    ensure!(c.label == OperatorType::Parabolic, "heat labeled {}", c.label);
    ensure!(close_to(&c.eigenvalues, &[-2.0, 0.0], 1e-12), "heat: {:?}", c.eigenvalues);
    Ok("Laplacian n=2,3 -> 2I, wave -> {-2,2}, heat -> {-2,0}".into())
}

fn tricomi_region_map() -> Outcome {
    let text = "dim 2\nh 0.1\n\
        term 2 0 \"x2\"\nterm 1 0 \"-2*x2\"\nterm 0 0 \"x2 + 1\"\n\
        term 0 2 1\nterm 0 1 -2\n";
    let op = ok(parse_stencil_file(text))?.operator;
    let tol = 1e-9;
    let probe = ok(GridSpec::new(vec![0.3, -1.0], 0.02, vec![1, 101]))?;
    let report = ok(classify_region(&op, &probe, tol))?;
    ensure!(report.entries.len() == 101, "{} probe points", report.entries.len());
    for e in &report.entries {
        let x2 = e.point[1];
        let expected = if x2 > tol {
            OperatorType::Elliptic
        } else if x2 < -tol {
            OperatorType::Hyperbolic
        } else {
            OperatorType::Parabolic
        };
        ensure!(e.label == expected, "x2={x2}: {} instead of {expected}", e.label);
    }
    Ok(format!(
        "{} elliptic / {} hyperbolic / {} parabolic",
        report.count(OperatorType::Elliptic),
        report.count(OperatorType::Hyperbolic),
        report.count(OperatorType::Parabolic)
    ))
}

fn discrete_exactness() -> Outcome {
    let lap_cases = ["x1^2 - x2^2", "x1*x2", "3 - 2*x1 + 0.5*x2", "-7.25 + 4*x1", "x2 - 1e3"];
    let bi_cases = ["x1^2 + x2^2", "x1^3 - 3*x1*x2^2"];
    let mut worst: f64 = 0.0;
    for h in [0.1, 0.05, 0.025] {
        let spec = ok(GridSpec::covering(&[-1.0, -1.0], &[1.0, 1.0], h))?;
        let lap = ok(laplace_stencil(2, h, false))?;
        let bi = ok(biharmonic_stencil(2, h, false))?;
        for (stencil, cases) in [(&lap, &lap_cases[..]), (&bi, &bi_cases[..])] {
            for src in cases {
                let u = sample(src, &spec)?;
                let scale = u.norm(NormKind::LInf).max(1.0);
                let r = ok(stencil.apply(&u))?.norm(NormKind::LInf) / scale;
                worst = worst.max(r);
                ensure!(r <= 1e-12, "h={h} `{src}`: residual {r:e}·scale");
            }
        }
    }
    Ok(format!("worst residual {worst:.1e}·scale over 3 spacings"))
}

fn mollifier_contract() -> Outcome {
    for n in 1..=3 {
        let h = if n == 3 { 1.0 / 16.0 } else { 1.0 / 32.0 };
        for eps in [0.25, 0.5] {
            let k = ok(MollifierKernel::new(n, eps, h, 8))?;
            let d = k.diagnostics();
            ensure!(d.mass_deviation <= 1e-12, "n={n} eps={eps}: mass off by {:e}", d.mass_deviation);
            ensure!(d.outside_support == 0.0, "n={n} eps={eps}: nonzero outside support");
            ensure!(d.symmetry_deviation == 0.0, "n={n} eps={eps}: asymmetric");
            ensure!(d.min_sample >= 0.0, "n={n} eps={eps}: negative sample");
        }
    }
    let spec = ok(GridSpec::covering(&[-3.0, -3.0], &[3.0, 3.0], 1.0 / 32.0))?;
    let f = sample("exp(-(x1^2 + x2^2))", &spec)?;
    let study = ok(l1_convergence(&f, &[0.5, 0.25, 0.125], 8))?;
    let e = &study.errors;
    ensure!(e.windows(2).all(|w| w[1] <= w[0]), "L1 errors increase: {e:?}");
    ensure!(e[2] < 0.25 * e[0], "final {:e} vs initial {:e}", e[2], e[0]);
    Ok(format!("6 kernels sound; L1 errors {:.2e} -> {:.2e} -> {:.2e}", e[0], e[1], e[2]))
}

fn derivative_commutation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let dim = 1 + trial % 2;
        let h = 1.0 / 16.0;
        let eps = [0.25, 0.375, 0.5][trial % 3];
        let k = ok(MollifierKernel::new(dim, eps, h, 4))?;
        let extent = 2 * k.radius() + 3 + rng.gen_range(0..12);
        let spec = ok(GridSpec::new(vec![rng.gen_range(-1.0..1.0); dim], h, vec![extent; dim]))?;
        let amp = rng.gen_range(0.1..100.0);
        let f = ok(GridFunction::from_fn(spec, |_| rng.gen_range(-amp..amp)))?;
        let axis = 1 + rng.gen_range(0..dim);
        let rep = ok(derivative_commute(&f, &k, axis))?;
        let rel = rep.deviation / rep.scale;
        worst = worst.max(rel);
        ensure!(rel <= 1e-10, "trial {trial}: deviation {:e} vs scale {:e}", rep.deviation, rep.scale);
    }
    Ok(format!("100 random grids, worst deviation {worst:.1e}·scale"))
}

/// `s_n = n V_n`, with `V_n` from rejection sampling in `[-1, 1]^n`.
fn monte_carlo_sphere_area(n: usize, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut inside = 0usize;
    for _ in 0..samples {
        let r2: f64 = (0..n).map(|_| rng.gen_range(-1.0f64..1.0).powi(2)).sum();
        if r2 <= 1.0 {
            inside += 1;
        }
    }
    n as f64 * 2f64.powi(n as i32) * inside as f64 / samples as f64
}

fn fundamental_solution() -> Outcome {
    let two = ok(FundamentalSolution::new(2))?;
    let three = ok(FundamentalSolution::new(3))?;
    let p2 = ok(two.eval(&[E, 0.0]))?;
    let p3 = ok(three.eval(&[0.0, 0.0, 1.0]))?;
    ensure!((p2 - 1.0 / (2.0 * PI)).abs() <= 1e-12, "phi(2, e) = {p2}");
    ensure!((p3 + 1.0 / (4.0 * PI)).abs() <= 1e-12, "phi(3, 1) = {p3}");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        let mc = monte_carlo_sphere_area(n, 2_000_000, &mut rng);
        let rel = (sphere_area(n) - mc).abs() / mc;
        worst = worst.max(rel);
        ensure!(rel <= 0.01, "n={n}: {} vs Monte-Carlo {mc}", sphere_area(n));
    }
    Ok(format!("phi exact to 1e-12; sphere areas within {:.2}% of Monte-Carlo", 100.0 * worst))
}

/// Bump `φ(‖x‖²/a²)` on `[-0.5, 0.5]²`.
fn bump_source(h: f64, a: f64) -> Result<GridFunction, String> {
    let spec = ok(GridSpec::covering(&[-0.5, -0.5], &[0.5, 0.5], h))?;
    ok(GridFunction::from_fn(spec, |x| bump((x[0] * x[0] + x[1] * x[1]) / (a * a))))
}

fn potential_consistency() -> Outcome {
    let a = 0.25;
    let fs = ok(FundamentalSolution::new(2))?;
    let mut rel = Vec::new();
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let f = bump_source(h, a)?;
        let u = ok(newtonian_potential(&fs, &f, f.spec()))?;
        let lap = ok(ok(centered_laplace_stencil(2, h, true))?.apply(&u))?;
        rel.push(linf_diff(&lap, &f)? / f.norm(NormKind::LInf));
    }
    ensure!(rel[0] < 0.05, "relative residual {:.3} at h=1/32", rel[0]);
    ensure!(rel[1] < rel[0], "no improvement under halving: {rel:?}");

    // Mass of the bump: a² times the two-dimensional normalization constant.
    let mass = a * a * 0.466_512_393_178_330_07;
    let f = bump_source(1.0 / 32.0, a)?;
    let targets = ok(GridSpec::new(vec![5.0 * a + 0.25, 0.3], 0.5, vec![5, 1]))?;
    let far = ok(newtonian_potential(&fs, &f, &targets))?;
    let mut worst: f64 = 0.0;
    let mut it = targets.nodes();
    while let Some((i, _, x)) = it.next_node() {
        let expect = mass * ok(fs.eval(x))?;
        let dev = (far.values()[i] - expect).abs() / expect.abs();
        worst = worst.max(dev);
        ensure!(dev <= 0.02, "at {x:?}: {} vs M·Φ = {expect}", far.values()[i]);
    }
    Ok(format!(
        "residual {:.2}% -> {:.2}%; far field within {:.1e}",
        100.0 * rel[0],
        100.0 * rel[1],
        worst
    ))
}

fn solver_convergence() -> Outcome {
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let mut summary = Vec::new();
    for (name, exact_src, f_src) in [
        ("laplace", "exp(x1)*sin(x2)", None),
        ("poisson", "sin(x1)*sin(x2)", Some("-2*sin(x1)*sin(x2)")),
    ] {
        let mut errors = Vec::new();
        for &h in &hs {
            let spec = unit_square(h)?;
            let exact = sample(exact_src, &spec)?;
            let r = match f_src {
                None => ok(solve_laplace_dirichlet(&spec, &exact, 1e-10, 100_000))?,
                Some(f) => ok(solve_poisson_dirichlet(&spec, &sample(f, &spec)?, &exact, 1e-10, 100_000))?,
            };
            ensure!(
                r.converged && r.final_residual <= 1e-10 && r.iterations <= 100_000,
                "{name} h={h}: residual {:e} after {} sweeps",
                r.final_residual,
                r.iterations
            );
            errors.push(linf_diff(&r.solution, &exact)?);
        }
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            ensure!((3.4..=4.6).contains(&ratio), "{name}: error ratio {ratio:.3} ({errors:?})");
            summary.push(format!("{name} {ratio:.2}"));
        }
    }
    Ok(format!("error ratios {}", summary.join(", ")))
}

fn max_principle_and_mean_value() -> Outcome {
    let spec = unit_square(1.0 / 64.0)?;
    let mut harmonic = None;
    for src in ["exp(x1)*sin(x2)", "x1*x2", "x1^2 - x2^2", "cos(2*x2)*(exp(2*x1) + exp(-2*x1))"] {
        let g = sample(src, &spec)?;
        let r = ok(solve_laplace_dirichlet(&spec, &g, 1e-10, 100_000))?;
        let mp = ok(max_principle_check(&r.solution))?;
        ensure!(mp.pass, "`{src}`: interior max {} above boundary max {}", mp.interior_max, mp.boundary_max);
        if harmonic.is_none() {
            harmonic = Some(r.solution);
        }
    }
    let u = harmonic.expect("first case solved");
    let (center, radius) = ([0.5, 0.5], 0.4);
    let dev = ok(mean_value_check(&u, &center, radius))?.deviation;
    let control = sample("x1^2 + x2^2", &spec)?;
    let control_dev = ok(mean_value_check(&control, &center, radius))?.deviation;
    ensure!(dev <= 1e-2, "harmonic deviation {dev:e}");
    ensure!(control_dev >= 10.0 * 1e-2, "control deviation {control_dev:e} below 10x the bound");
    ensure!(control_dev >= 10.0 * dev, "control {control_dev:e} vs harmonic {dev:e}");
    Ok(format!("4 solves pass; mean-value deviation {dev:.1e} vs control {control_dev:.3}"))
}

fn harnack_dichotomy() -> Outcome {
    let spec = unit_square(1.0 / 32.0)?;
    let g = sample("x1*x2 + 1", &spec)?;
    let tol = 1e-10;
    let base = ok(solve_laplace_dirichlet(&spec, &g, tol, 100_000))?.solution;
    ensure!(base.values().iter().all(|&v| v >= 0.0), "base solution changes sign");
    let seq: Vec<GridFunction> = (1..=40)
        .map(|k| ok(base.map(|v| (1.0 - 2f64.powi(-k)) * v)))
        .collect::<Result<_, _>>()?;
    let v = ok(harnack_limit(&seq, 2, 1e-8))?;
    ensure!(v.outcome == HarnackOutcome::FiniteLimit, "bounded sequence: {}", v.outcome);
    let res = v.limit_residual.ok_or("no limit residual")?;
    ensure!(res <= tol, "limit residual {res:e} above solver tol");

    let ones = GridFunction::constant(spec.clone(), 1.0).map_err(|e| e.to_string())?;
    let seq: Vec<GridFunction> = (0..7)
        .map(|k| ok(ones.map(|v| v * 10f64.powi(k))))
        .collect::<Result<_, _>>()?;
    let v = ok(harnack_limit(&seq, 2, 1e-3))?;
    ensure!(v.outcome == HarnackOutcome::Divergent, "constants 10^k: {}", v.outcome);

    let mut seq: Vec<GridFunction> = (1..=5)
        .map(|k| ok(base.map(|v| k as f64 * v)))
        .collect::<Result<_, _>>()?;
    let node = 17 * 33 + 5;
    let mut dented = seq[3].values().to_vec();
    dented[node] = seq[2].values()[node] - 0.5;
    seq[3] = ok(GridFunction::new(spec.clone(), dented))?;
    let v = ok(harnack_limit(&seq, 2, 1e-8))?;
    ensure!(v.outcome == HarnackOutcome::Violation, "dented sequence: {}", v.outcome);
    ensure!(v.witness == Some((3, node)), "witness {:?}", v.witness);
    Ok(format!("finite_limit (residual {res:.1e}), divergent, violation at step 3 node {node}"))
}

fn biharmonic_splitting() -> Outcome {
    let tol = 1e-10;
    for (u, lap) in [("x1^2 + x2^2", "4"), ("x1^3 - 3*x1*x2^2", "0")] {
        for h in [1.0 / 16.0, 1.0 / 32.0] {
            let spec = unit_square(h)?;
            let exact = sample(u, &spec)?;
            let zero = GridFunction::zeros(spec.clone());
            let r = ok(solve_biharmonic(&spec, &zero, &exact, &sample(lap, &spec)?, tol, 100_000))?;
            let err = linf_diff(&r.solution.solution, &exact)?;
            ensure!(err <= tol, "`{u}` h={h}: error {err:e}");
        }
    }

    let u = "x1*sin(x1)*(exp(x2) - exp(-x2))/2";
    let lap = "cos(x1)*(exp(x2) - exp(-x2))";
    let mut errors = Vec::new();
    let mut truncation = Vec::new();
    let mut algebraic = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let spec = unit_square(h)?;
        let exact = sample(u, &spec)?;
        let zero = GridFunction::zeros(spec.clone());
        let r = ok(solve_biharmonic(&spec, &zero, &exact, &sample(lap, &spec)?, tol, 100_000))?;
        errors.push(linf_diff(&r.solution.solution, &exact)?);
        algebraic.push(r.composed_residual);
        let c = ok(centered_laplace_stencil(2, h, true))?;
        truncation.push(ok(c.apply(&ok(c.apply(&exact))?))?.norm(NormKind::LInf));
    }
    let orders = |v: &[f64]| v.windows(2).map(|w| (w[0] / w[1]).log2()).collect::<Vec<_>>();
    let (err_orders, trunc_orders) = (orders(&errors), orders(&truncation));
    ensure!(err_orders.iter().all(|&p| p >= 1.5), "solution error orders {err_orders:?}");
    ensure!(trunc_orders.iter().all(|&p| p >= 1.5), "composed residual orders {trunc_orders:?}");
    Ok(format!(
        "polynomials exact; composed residual on exact u: orders {:.2?}; solution error orders {:.2?}; algebraic composed residual {:.1e}",
        trunc_orders,
        err_orders,
        algebraic.iter().copied().fold(0.0, f64::max)
    ))
}

fn pardiff(dir: &Path, args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pardiff"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn write_inputs(dir: &Path) -> Result<(), String> {
    let lap = "dim 2\nh 0.0625\nscale 2\nterm 2 0 1\nterm 1 0 -2\nterm 0 2 1\nterm 0 1 -2\nterm 0 0 2\n";
    std::fs::write(dir.join("lap2.stn"), lap).map_err(|e| e.to_string())?;
    let spec = unit_square(1.0 / 16.0)?;
    let u = sample("exp(x1)*sin(x2)", &spec)?;
    std::fs::write(dir.join("box.grd"), u.to_text()).map_err(|e| e.to_string())?;
    let f = bump_source(1.0 / 16.0, 0.25)?;
    std::fs::write(dir.join("src.grd"), f.to_text()).map_err(|e| e.to_string())?;
    Ok(())
}

fn determinism() -> Outcome {
    let runs: &[&[&str]] = &[
        &["classify", "--stencil", "lap2.stn", "--probe", "box.grd"],
        &["apply", "--stencil", "lap2.stn", "--input", "box.grd", "--out", "applied.grd"],
        &["solve", "poisson", "--grid", "box.grd", "--boundary", "x1*x2", "--rhs", "x1", "--out", "sol.grd"],
        &["mollify", "--input", "box.grd", "--eps", "0.25", "--out", "moll.grd"],
        &["mollify", "--input", "box.grd", "--eps-list", "0.25,0.125"],
        &["potential", "--source", "src.grd", "--out", "pot.grd"],
        &["verify", "mean-value", "--input", "sol.grd", "--center", "0.5", "0.5", "--radius", "0.25"],
        &["convergence", "laplace", "--reference", "exp(x1)*sin(x2)", "--lower", "0", "0", "--upper", "1", "1", "--h-list", "1/8,1/16"],
    ];
    let outputs = ["applied.grd", "sol.grd", "moll.grd", "pot.grd"];
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        write_inputs(dir.path())?;
        let mut snap = Vec::new();
        for args in runs {
            let (code, stdout) = pardiff(dir.path(), args)?;
            ensure!(code == 0, "`{}` exited {code}", args.join(" "));
            snap.push(stdout);
        }
        for name in outputs {
            snap.push(std::fs::read(dir.path().join(name)).map_err(|e| e.to_string())?);
        }
        snapshots.push(snap);
    }
    ensure!(snapshots[0] == snapshots[1], "outputs differ between runs");
    Ok(format!("{} commands, {} byte streams identical", runs.len(), snapshots[0].len()))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 12] = [
        (1, "classification triple", classification_triple, Duration::from_secs(1)),
        (2, "variable-coefficient region map", tricomi_region_map, Duration::from_secs(1)),
        (3, "discrete exactness", discrete_exactness, Duration::MAX),
        (4, "mollifier contract", mollifier_contract, Duration::from_secs(30)),
        (5, "derivative commutation", derivative_commutation, Duration::MAX),
        (6, "fundamental solution", fundamental_solution, Duration::MAX),
        (7, "potential consistency", potential_consistency, Duration::from_secs(120)),
        (8, "solver convergence order", solver_convergence, Duration::from_secs(120)),
        (9, "maximum principle and mean value", max_principle_and_mean_value, Duration::MAX),
        (10, "Harnack checker dichotomy", harnack_dichotomy, Duration::MAX),
        (11, "biharmonic splitting", biharmonic_splitting, Duration::MAX),
        (12, "determinism", determinism, Duration::MAX),
    ];
    let mut failures = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failures += 1;
                println!("FAIL {id:>2} {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
