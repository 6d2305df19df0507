use pspin_core::cltvar::{
    compute_u_prop1, constants_for, extract_d, solve_u, CltConstants, USolverSettings,
};
use pspin_core::parisi::{
    guerra_bound, optimize_measure, solve_parisi, OptimizedMeasure, ParisiSolution, TiltSign, XGrid,
};
use pspin_core::verify::{
    chaos_ladder, clt_samples, estimate_variance, family, guerra_estimate, ks_statistic,
    stein_discrepancy, variance_curve, ChaosMode, KsReport,
};
use pspin_core::{MixingSpec, SeedKey};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Sink, Table};
use crate::svg::{plot, Series};
use crate::CliError;

/// Residual limit for the `parisi --check` gate.
const PDE_RESIDUAL_MAX: f64 = 1e-3;
const EVENNESS_MAX: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default)]
pub struct Flags {
    pub optimize: bool,
    pub svg: bool,
}

/// Named pass/fail results of a run, judged only under `--check`.
#[derive(Debug, Default, Serialize)]
pub struct Checks(pub Vec<(String, bool)>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, pass: bool) {
        self.0.push((name.into(), pass));
    }

    pub fn all_pass(&self) -> bool {
        self.0.iter().all(|(_, p)| *p)
    }
}

struct Optimized {
    opt: OptimizedMeasure,
    solution: ParisiSolution,
}

fn optimized(spec: &MixingSpec, grid: &XGrid, cfg: &RunConfig) -> Result<Optimized, CliError> {
    let opt = optimize_measure(spec, grid, &cfg.optimizer())?;
    if !opt.converged {
        eprintln!(
            "warning: atom cap reached; last improvement {:.3e} exceeds tol {:.3e}",
            opt.gap, cfg.measure.tol
        );
    }
    let solution = solve_parisi(spec, &opt.measure, grid)?;
    Ok(Optimized { opt, solution })
}

fn require_clt_scope(spec: &MixingSpec) -> Result<(), CliError> {
    if spec.validate_for_clt().applies() {
        Ok(())
    } else {
        Err(CliError::Scope(
            "needs an external field and no odd interactions of order three or more".into(),
        ))
    }
}

fn constants(
    spec: &MixingSpec,
    grid: &XGrid,
    cfg: &RunConfig,
) -> Result<(Optimized, CltConstants), CliError> {
    let o = optimized(spec, grid, cfg)?;
    let c = constants_for(
        &o.solution,
        o.opt.gap,
        cfg.experiment.nu_nodes,
        &USolverSettings::default(),
    )?;
    for w in &c.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    Ok((o, c))
}

fn nu_for(spec: &MixingSpec, grid: &XGrid, cfg: &RunConfig) -> Result<f64, CliError> {
    match cfg.experiment.nu {
        Some(nu) => Ok(nu),
        None => Ok(constants(spec, grid, cfg)?.1.nu),
    }
}

pub fn parisi(cfg: &RunConfig, flags: Flags, sink: &mut Sink) -> Result<Checks, CliError> {
    let spec = cfg.spec()?;
    let grid = cfg.grid()?;
    let (solution, opt) = if flags.optimize {
        let o = optimized(&spec, &grid, cfg)?;
        (o.solution, Some(o.opt))
    } else {
        let measure = cfg.fixed_measure()?.ok_or_else(|| {
            CliError::Config("parisi needs measure.atoms and measure.cdf, or --optimize".into())
        })?;
        (solve_parisi(&spec, &measure, &grid)?, None)
    };
    let functional = pspin_core::parisi::parisi_functional(&spec, solution.measure(), &grid)?;
    let h_fd = (grid.spacing() * 4.0).min(1e-3);
    let residual = solution.max_pde_residual(h_fd, grid.half_width() / 2.0)?;

    let xs = grid.nodes();
    let mut evenness: f64 = 0.0;
    let mut slope: f64 = 0.0;
    let mut monotone = true;
    let mut table = Table::new(&["q_layer", "x", "phi", "dphi"]);
    for layer in solution.layers() {
        let k = xs.len();
        for i in 0..k {
            evenness = evenness.max((layer.phi[i] - layer.phi[k - 1 - i]).abs());
            slope = slope.max(layer.dphi[i].abs());
            table.push(vec![layer.q, xs[i], layer.phi[i], layer.dphi[i]]);
        }
        monotone &= layer.dphi.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    }
    sink.table("phi", &table)?;
    sink.json(
        "parisi.json",
        &json!({
            "spec": spec,
            "measure": solution.measure(),
            "functional": functional,
            "optimizer": opt,
            "max_pde_residual": residual,
            "pde_step": h_fd,
            "evenness": evenness,
            "max_abs_dphi": slope,
            "dphi_nondecreasing": monotone,
        }),
    )?;
    if flags.svg {
        let top = &solution.layers()[0];
        let series = [
            Series {
                label: "Phi(0, x)",
                points: xs.iter().copied().zip(top.phi.iter().copied()).collect(),
            },
            Series {
                label: "dPhi(0, x)",
                points: xs.iter().copied().zip(top.dphi.iter().copied()).collect(),
            },
        ];
        sink.svg(
            "phi.svg",
            &plot("Parisi solution at q = 0", "x", "value", &series),
        )?;
    }
    let mut checks = Checks::default();
    checks.add(
        format!("pde residual {residual:.3e} <= {PDE_RESIDUAL_MAX:e}"),
        residual <= PDE_RESIDUAL_MAX,
    );
    checks.add(
        format!("evenness {evenness:.3e} <= {EVENNESS_MAX:e}"),
        evenness <= EVENNESS_MAX,
    );
    checks.add(
        format!("max |dPhi| = {slope:.15} <= 1"),
        slope <= 1.0 + 1e-12,
    );
    checks.add("dPhi nondecreasing", monotone);
    if let Some(o) = &opt {
        checks.add(
            format!("optimizer gap {:.3e} below tol", o.gap),
            o.converged,
        );
    }
    Ok(checks)
}

pub fn constants_cmd(cfg: &RunConfig, flags: Flags, sink: &mut Sink) -> Result<Checks, CliError> {
    let spec = cfg.spec()?;
    require_clt_scope(&spec)?;
    let grid = cfg.grid()?;
    let (o, c) = constants(&spec, &grid, cfg)?;
    let mut table = Table::new(&["t", "u_t", "xi_u_t"]);
    for p in &c.u_curve {
        table.push(vec![p.t, p.u, spec.xi(p.u)?]);
    }
    sink.table("u_curve", &table)?;
    sink.json(
        "constants.json",
        &json!({
            "d": c.d,
            "nu": c.nu,
            "functional": o.opt.value,
            "optimizer_converged": o.opt.converged,
            "constants": c,
        }),
    )?;
    if flags.svg {
        let series = [
            Series {
                label: "u_t",
                points: table.rows.iter().map(|r| (r[0], r[1])).collect(),
            },
            Series {
                label: "xi(u_t)",
                points: table.rows.iter().map(|r| (r[0], r[2])).collect(),
            },
        ];
        sink.svg("u_curve.svg", &plot("Overlap curve", "t", "value", &series))?;
    }
    let mut checks = Checks::default();
    checks.add(
        format!("nu = {:.12} > 0", c.nu),
        c.nu > 0.0 && c.nu.is_finite(),
    );
    checks.add("no solver warnings", c.diagnostics.warnings.is_empty());
    checks.add("optimizer converged", o.opt.converged);
    Ok(checks)
}

pub fn variance(cfg: &RunConfig, flags: Flags, sink: &mut Sink) -> Result<Checks, CliError> {
    let spec = cfg.spec()?;
    let e = &cfg.experiment;
    let nu = match e.nu {
        Some(nu) => Some(nu),
        None if spec.validate_for_clt().applies() => Some(nu_for(&spec, &cfg.grid()?, cfg)?),
        None => None,
    };
    let mut table = Table::new(&[
        "n",
        "m",
        "mean",
        "mean_se",
        "var",
        "var_se",
        "var_per_spin",
        "var_per_spin_se",
        "poincare_bound",
    ]);
    let mut reports = Vec::new();
    for &n in &e.sizes {
        let r = estimate_variance(&spec, n, e.replicas, cfg.seed)?;
        table.push(vec![
            n as f64,
            r.m as f64,
            r.mean.value,
            r.mean.se,
            r.variance.value,
            r.variance.se,
            r.variance_per_spin.value,
            r.variance_per_spin.se,
            r.poincare_bound,
        ]);
        reports.push(r);
    }
    sink.table("variance", &table)?;
    sink.json("variance.json", &json!({ "nu": nu, "reports": reports }))?;
    if flags.svg {
        let mut series = vec![Series {
            label: "Var(f_N)/N",
            points: reports
                .iter()
                .map(|r| (r.n as f64, r.variance_per_spin.value))
                .collect(),
        }];
        if let Some(nu) = nu {
            series.push(Series {
                label: "nu",
                points: reports.iter().map(|r| (r.n as f64, nu)).collect(),
            });
        }
        sink.svg(
            "variance.svg",
            &plot("Variance per spin", "n", "Var/N", &series),
        )?;
    }
    let mut checks = Checks::default();
    for r in &reports {
        checks.add(format!("n={} Var > 0", r.n), r.positive);
        checks.add(
            format!("n={} Var/N below xi(1) within 3 rel. s.e.", r.n),
            r.within_poincare,
        );
        if let Some(nu) = nu {
            checks.add(
                format!(
                    "n={} Var/N = {:.6} >= nu/2 = {:.6}",
                    r.n,
                    r.variance_per_spin.value,
                    nu / 2.0
                ),
                r.variance_per_spin.value >= nu / 2.0,
            );
        }
    }
    Ok(checks)
}

fn single_size(cfg: &RunConfig, command: &str) -> Result<usize, CliError> {
    match cfg.experiment.sizes.as_slice() {
        [n] => Ok(*n),
        _ => Err(CliError::Config(format!(
            "{command} takes exactly one size in experiment.sizes"
        ))),
    }
}

pub fn lemma2(cfg: &RunConfig, flags: Flags, sink: &mut Sink) -> Result<Checks, CliError> {
    let spec = cfg.spec()?;
    let e = &cfg.experiment;
    let n = single_size(cfg, "lemma2")?;
    if e.t_nodes < 2 {
        return Err(CliError::Config(
            "experiment.t_nodes must be at least 2".into(),
        ));
    }
    let nodes: Vec<f64> = (0..e.t_nodes)
        .map(|i| i as f64 / (e.t_nodes - 1) as f64)
        .collect();
    let r = variance_curve(&spec, n, e.replicas, &nodes, cfg.seed)?;
    let mut table = Table::new(&["t", "mean_xiR", "se"]);
    for p in &r.curve {
        table.push(vec![p.t, p.mean, p.se]);
    }
    sink.table("lemma2", &table)?;
    sink.json("lemma2.json", &r)?;
    if flags.svg {
        let series = [Series {
            label: "E<xi(R)>_t",
            points: r.curve.iter().map(|p| (p.t, p.mean)).collect(),
        }];
        sink.svg(
            "lemma2.svg",
            &plot("Interpolation curve", "t", "E<xi(R)>_t", &series),
        )?;
    }
    let mut checks = Checks::default();
    checks.add(
        format!(
            "|Var - N int| = {:.3e} <= 3 x {:.3e}",
            (r.variance.value - r.integral.value).abs(),
            r.combined_se
        ),
        r.identity_holds,
    );
    checks.add("curve nonnegative", r.nonnegative);
    checks.add("curve nondecreasing within 2 s.e.", r.nondecreasing);
    Ok(checks)
}

pub fn chaos(cfg: &RunConfig, flags: Flags, sink: &mut Sink) -> Result<Checks, CliError> {
    let spec = cfg.spec()?;
    let e = &cfg.experiment;
    let mode: ChaosMode = e.mode.into();
    if mode == ChaosMode::T && !spec.is_even_only() {
        return Err(CliError::Scope(
            "chaos mode t needs no odd interactions of order three or more".into(),
        ));
    }
    let center = match e.center {
        Some(c) => c,
        None => {
            let grid = cfg.grid()?;
            let o = optimized(&spec, &grid, cfg)?;
            match mode {
                ChaosMode::T => {
                    let d = extract_d(o.solution.measure())?;
                    solve_u(&o.solution, d, e.t, &USolverSettings::default())?.u
                }
                ChaosMode::Ts0 => compute_u_prop1(&o.solution, e.t)?,
            }
        }
    };
    let r = chaos_ladder(
        &spec, &e.sizes, e.replicas, e.t, center, e.epsilon, mode, cfg.seed,
    )?;
    let mut tails = Table::new(&["n", "m", "tail", "se"]);
    let mut hist = Table::new(&["n", "k", "r", "mass"]);
    for p in &r.points {
        tails.push(vec![p.n as f64, p.m as f64, p.tail.value, p.tail.se]);
        for (k, mass) in p.histogram.iter().enumerate() {
            let overlap = 1.0 - 2.0 * k as f64 / p.n as f64;
            hist.push(vec![p.n as f64, k as f64, overlap, *mass]);
        }
    }
    sink.table("chaos", &tails)?;
    sink.table("chaos_hist", &hist)?;
    sink.json("chaos.json", &r)?;
    if flags.svg {
        let labels: Vec<String> = r.points.iter().map(|p| format!("n = {}", p.n)).collect();
        let series: Vec<Series> = r
            .points
            .iter()
            .zip(&labels)
            .map(|(p, label)| Series {
                label,
                points: p
                    .histogram
                    .iter()
                    .enumerate()
                    .map(|(k, m)| (1.0 - 2.0 * k as f64 / p.n as f64, *m))
                    .collect(),
            })
            .collect();
        sink.svg(
            "chaos_hist.svg",
            &plot("Mean overlap law", "R", "mass", &series),
        )?;
        let tail = [Series {
            label: "tail mass",
            points: r
                .points
                .iter()
                .map(|p| (p.n as f64, p.tail.value))
                .collect(),
        }];
        sink.svg("chaos.svg", &plot("Overlap tail mass", "n", "tail", &tail))?;
    }
    let mut checks = Checks::default();
    checks.add(
        format!("tail mass decreasing in n within 2 s.e. (center {center:.6})"),
        r.decreasing,
    );
    Ok(checks)
}

#[derive(Serialize)]
struct KsRow {
    n: usize,
    ks: KsReport,
}

/// KS decrease allowed by noise between two independent ladders of `m` samples.
pub fn ks_noise(m: usize) -> f64 {
    1.36 * (2.0 / m as f64).sqrt()
}

pub fn clt(cfg: &RunConfig, flags: Flags, sink: &mut Sink) -> Result<Checks, CliError> {
    let spec = cfg.spec()?;
    require_clt_scope(&spec)?;
    let e = &cfg.experiment;
    let nu = nu_for(&spec, &cfg.grid()?, cfg)?;
    let mut rows = Vec::new();
    let mut ks_table = Table::new(&["n", "m", "ks", "threshold"]);
    let mut last = None;
    for &n in &e.sizes {
        let set = clt_samples(&spec, n, e.replicas, nu, cfg.seed)?;
        let ks = ks_statistic(&set.values)?;
        ks_table.push(vec![n as f64, set.m as f64, ks.statistic, ks.threshold]);
        rows.push(KsRow { n, ks });
        last = Some(set);
    }
    let last = last.expect("sizes are nonempty");
    let key = SeedKey::new(cfg.seed, family::key(family::BOOTSTRAP, last.n), 0, 0);
    let stein = stein_discrepancy(&last.values, key, e.stein_k_se)?;
    let mut w = Table::new(&["w"]);
    for v in &last.values {
        w.push(vec![*v]);
    }
    sink.table("clt", &w)?;
    sink.table("clt_ks", &ks_table)?;
    sink.json(
        "clt.json",
        &json!({ "nu": nu, "n": last.n, "ks": rows, "stein": stein }),
    )?;
    if flags.svg {
        let ks = [Series {
            label: "KS",
            points: rows.iter().map(|r| (r.n as f64, r.ks.statistic)).collect(),
        }];
        sink.svg(
            "clt_ks.svg",
            &plot("Kolmogorov-Smirnov distance", "n", "KS", &ks),
        )?;
    }
    let mut checks = Checks::default();
    let (first, final_ks) = (&rows[0].ks, &rows[rows.len() - 1].ks);
    if rows.len() > 1 {
        checks.add(
            format!(
                "KS {:.4} -> {:.4} decreasing within {:.4}",
                first.statistic,
                final_ks.statistic,
                ks_noise(e.replicas)
            ),
            final_ks.statistic <= first.statistic + ks_noise(e.replicas),
        );
    }
    checks.add(
        format!("KS {:.4} <= {}", final_ks.statistic, e.ks_max),
        final_ks.statistic <= e.ks_max,
    );
    checks.add(
        format!(
            "Stein battery within {} s.e. (max {:.3e})",
            e.stein_k_se, stein.max_abs
        ),
        stein.pass,
    );
    Ok(checks)
}

pub fn guerra(cfg: &RunConfig, _flags: Flags, sink: &mut Sink) -> Result<Checks, CliError> {
    let spec = cfg.spec()?;
    if !spec.is_even_only() {
        return Err(CliError::Scope(
            "the coupled bound needs no odd interactions of order three or more".into(),
        ));
    }
    let e = &cfg.experiment;
    if !(e.t > 0.0 && e.t < 1.0) {
        return Err(CliError::Config(
            "guerra needs experiment.t in (0, 1)".into(),
        ));
    }
    let grid = cfg.grid()?;
    let o = optimized(&spec, &grid, cfg)?;
    let measure = o.solution.measure();
    let mut table = Table::new(&["n", "lambda", "sign", "estimate", "se", "bound", "pass"]);
    let mut reports = Vec::new();
    for &lambda in &e.lambdas {
        for sign in [TiltSign::Plus, TiltSign::Minus] {
            let bound = guerra_bound(&spec, measure, lambda, e.t, sign, &grid)?;
            for &n in &e.sizes {
                let r = guerra_estimate(&spec, n, e.replicas, lambda, e.t, sign, bound, cfg.seed)?;
                table.push(vec![
                    n as f64,
                    lambda,
                    r.sign,
                    r.estimate.value,
                    r.estimate.se,
                    r.bound,
                    if r.pass { 1.0 } else { 0.0 },
                ]);
                reports.push(r);
            }
        }
    }
    sink.table("guerra", &table)?;
    sink.json(
        "guerra.json",
        &json!({ "measure": measure, "reports": reports }),
    )?;
    let mut checks = Checks::default();
    for r in &reports {
        checks.add(
            format!(
                "n={} lambda={}{} estimate {:.6} <= bound {:.6} + 3 s.e.",
                r.n,
                if r.sign > 0.0 { "+" } else { "-" },
                r.lambda,
                r.estimate.value,
                r.bound
            ),
            r.pass,
        );
    }
    Ok(checks)
}
