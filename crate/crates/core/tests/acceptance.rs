//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status when any criterion fails. Pass criterion numbers as
//! arguments to run a subset.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use pspin_core::cltvar::{
    compute_u_prop1, constants_for, extract_d, solve_u, CltConstants, USolverSettings,
};
use pspin_core::parisi::{
    optimize_measure, solve_coupled, solve_parisi, DiscreteMeasure, OptimizedMeasure,
    OptimizerSettings, ParisiSolution, TiltSign, XGrid,
};
use pspin_core::verify::{
    chaos_ladder, clt_samples, estimate_variance, family, guerra_check, ks_statistic,
    stein_discrepancy, variance_curve, ChaosMode,
};
use pspin_core::{MixingSpec, Result, SeedKey};

const SEED: u64 = 0x5eed_2026;

const CLOSED_FORM_TOL: f64 = 1e-6;
const CLOSED_FORM_X_MAX: f64 = 4.0;
const PDE_RESIDUAL_MAX: f64 = 1e-3;
const PDE_REFINEMENT_RATIO: f64 = 3.0;
const EVENNESS_TOL: f64 = 1e-10;
const ODDNESS_TOL: f64 = 1e-10;
const SLOPE_SLACK: f64 = 1e-12;
const MONOTONE_SLACK: f64 = 1e-12;
const RS_VALUE_TOL: f64 = 1e-5;
const RS_D_TOL: f64 = 1e-4;
const SEPARATION_TOL: f64 = 1e-8;
const LAMBDA_STEP: f64 = 1e-3;
const LAMBDA_DERIVATIVE_TOL: f64 = 1e-4;
const U_ONE_TOL: f64 = 1e-6;
const NU_DOUBLING_TOL: f64 = 1e-6;
const NU_DEGENERATE_TOL: f64 = 1e-6;
const KS_MAX: f64 = 0.05;
/// Two-sample KS critical factor at level 0.05; bounds the decrease allowed by noise.
const KS_NOISE_FACTOR: f64 = 1.36;
const STEIN_K_SE: f64 = 3.0;

const LEMMA2_N: usize = 2;
const LEMMA2_M: usize = 200_000;
const LEMMA2_T_NODES: usize = 21;
const LADDER: [usize; 3] = [8, 12, 16];
const VARIANCE_M: usize = 5000;
const CHAOS_M: usize = 2000;
const CHAOS_T: f64 = 0.5;
const CHAOS_EPS: f64 = 0.1;
const KS_M: usize = 5000;
const STEIN_N: usize = 10_000;
const STEIN_M: usize = 10_000;
const GUERRA_N: usize = 10;
const GUERRA_M: usize = 2000;
const GUERRA_T: f64 = 0.5;
const GUERRA_LAMBDAS: [f64; 3] = [0.0, 0.1, 0.3];

fn sk() -> MixingSpec {
    MixingSpec::sk(1.0, 0.5).unwrap()
}

fn rs_spec() -> MixingSpec {
    MixingSpec::sk(0.2, 0.5).unwrap()
}

fn degenerate() -> MixingSpec {
    MixingSpec::new(vec![0.5], 0.2).unwrap()
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `E f(z)` for standard normal `z` by composite Simpson on `[−12, 12]`.
fn gaussian_simpson(f: impl Fn(f64) -> f64) -> f64 {
    let n = 24_000;
    let h = 24.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let z = -12.0 + i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * f(z) * (-0.5 * z * z).exp();
    }
    acc * h / 3.0 / (2.0 * std::f64::consts::PI).sqrt()
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

struct Outcome {
    pass: bool,
    detail: String,
}

type Rerun = Box<dyn Fn() -> Result<String> + Send + Sync>;

/// Shared state: the optimized SK solution, `ν` values and the recorded
/// experiment outputs replayed by the determinism criterion.
#[derive(Default)]
struct Ctx {
    sk: Option<(OptimizedMeasure, Arc<ParisiSolution>, CltConstants)>,
    rs: Option<OptimizedMeasure>,
    nu_degenerate: Option<f64>,
    recorded: Vec<(String, String, Rerun)>,
}

impl Ctx {
    fn sk(&mut self) -> Result<&(OptimizedMeasure, Arc<ParisiSolution>, CltConstants)> {
        if self.sk.is_none() {
            let spec = sk();
            let grid = XGrid::default();
            let opt = optimize_measure(&spec, &grid, &OptimizerSettings::default())?;
            let sol = solve_parisi(&spec, &opt.measure, &grid)?;
            let c = constants_for(&sol, opt.gap, 32, &USolverSettings::default())?;
            self.sk = Some((opt, Arc::new(sol), c));
        }
        Ok(self.sk.as_ref().unwrap())
    }

    fn rs(&mut self) -> Result<&OptimizedMeasure> {
        if self.rs.is_none() {
            self.rs = Some(optimize_measure(
                &rs_spec(),
                &XGrid::default(),
                &OptimizerSettings::default(),
            )?);
        }
        Ok(self.rs.as_ref().unwrap())
    }

    fn nu_degenerate(&mut self) -> Result<f64> {
        if self.nu_degenerate.is_none() {
            let spec = degenerate();
            let grid = XGrid::default();
            let opt = optimize_measure(&spec, &grid, &OptimizerSettings::default())?;
            let sol = solve_parisi(&spec, &opt.measure, &grid)?;
            self.nu_degenerate =
                Some(constants_for(&sol, opt.gap, 32, &USolverSettings::default())?.nu);
        }
        Ok(self.nu_degenerate.unwrap())
    }

    /// Runs `f`, keeping its serialized output for the determinism replay.
    fn record(&mut self, label: impl Into<String>, f: Rerun) -> Result<String> {
        let out = f()?;
        self.recorded.push((label.into(), out.clone(), f));
        Ok(out)
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn c1_closed_forms(_: &mut Ctx) -> Result<Outcome> {
    let spec = sk();
    let sol = solve_parisi(&spec, &DiscreteMeasure::delta(0.0)?, &XGrid::default())?;
    let xi1 = spec.xi_prime(1.0)?;
    let mut worst: f64 = 0.0;
    for iq in 0..=8 {
        let q = iq as f64 / 8.0;
        let shift = 0.5 * (xi1 - spec.xi_prime(q)?);
        for ix in -160..=160 {
            let x = ix as f64 * CLOSED_FORM_X_MAX / 160.0;
            let v = sol.phi_at(q, x)?.0;
            worst = worst.max((v - log_cosh(x) - shift).abs());
        }
    }
    Ok(Outcome {
        pass: worst <= CLOSED_FORM_TOL,
        detail: format!("sup error {worst:.3e} (tol {CLOSED_FORM_TOL:e})"),
    })
}

fn c2_pde_residual(_: &mut Ctx) -> Result<Outcome> {
    let spec = sk();
    let measure = DiscreteMeasure::from_weights(vec![0.3, 0.6], &[0.5, 0.5])?;
    let residual = |delta: f64| -> Result<f64> {
        let grid = XGrid::new(10.0, delta, 40)?;
        solve_parisi(&spec, &measure, &grid)?.max_pde_residual(delta, 4.0)
    };
    let coarse = residual(1.0 / 32.0)?;
    let fine = residual(1.0 / 64.0)?;
    let ratio = coarse / fine;
    Ok(Outcome {
        pass: coarse <= PDE_RESIDUAL_MAX
            && fine <= PDE_RESIDUAL_MAX
            && ratio >= PDE_REFINEMENT_RATIO,
        detail: format!(
            "residual {coarse:.3e} at delta=1/32, {fine:.3e} at 1/64, ratio {ratio:.2}"
        ),
    })
}

fn c3_invariants(_: &mut Ctx) -> Result<Outcome> {
    let specs = [
        ("SK", sk()),
        ("b2+b4", MixingSpec::new(vec![0.0, 1.0, 0.0, 0.5], 0.3)?),
        ("degenerate", degenerate()),
    ];
    let measure = DiscreteMeasure::from_weights(vec![0.15, 0.45, 0.8], &[0.3, 0.3, 0.4])?;
    let grid = XGrid::default();
    let mut pass = true;
    let mut details = Vec::new();
    for (name, spec) in &specs {
        let sol = solve_parisi(spec, &measure, &grid)?;
        let (mut even, mut odd, mut slope, mut drop): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for l in sol.layers() {
            let k = l.phi.len();
            for i in 0..k {
                even = even.max((l.phi[i] - l.phi[k - 1 - i]).abs());
                odd = odd.max((l.dphi[i] + l.dphi[k - 1 - i]).abs());
                slope = slope.max(l.dphi[i].abs());
            }
            for w in l.dphi.windows(2) {
                drop = drop.max(w[0] - w[1]);
            }
        }
        pass &= even <= EVENNESS_TOL
            && odd <= ODDNESS_TOL
            && slope <= 1.0 + SLOPE_SLACK
            && drop <= MONOTONE_SLACK;
        details.push(format!(
            "{name}: even {even:.1e} odd {odd:.1e} |dphi| {slope:.15} drop {drop:.1e}"
        ));
    }
    Ok(Outcome {
        pass,
        detail: details.join("; "),
    })
}

fn c4_replica_symmetric(ctx: &mut Ctx) -> Result<Outcome> {
    let spec = rs_spec();
    let opt = ctx.rs()?.clone();
    let (h, b2sq) = (spec.h(), spec.beta(2).powi(2));
    let xi = |q: f64| b2sq * q * q;
    let xi_p = |q: f64| 2.0 * b2sq * q;
    let rs = |q: f64| {
        std::f64::consts::LN_2
            + gaussian_simpson(|z| log_cosh(h + z * xi_p(q).sqrt()))
            + 0.5 * (xi(1.0) - xi(q) - (1.0 - q) * xi_p(q))
    };
    let (_, oracle) = golden_min(rs, 0.0, 1.0);
    let mut q = 0.5;
    for _ in 0..200 {
        q = gaussian_simpson(|z| (h + z * xi_p(q).sqrt()).tanh().powi(2));
    }
    let d = extract_d(&opt.measure)?;
    let (dv, dd) = ((opt.value - oracle).abs(), (d - q).abs());
    Ok(Outcome {
        pass: dv <= RS_VALUE_TOL && dd <= RS_D_TOL,
        detail: format!(
            "value {:.12} vs {:.12} (diff {dv:.2e}); d {d:.10} vs {q:.10} (diff {dd:.2e})",
            opt.value, oracle
        ),
    })
}

fn c5_coupled(ctx: &mut Ctx) -> Result<Outcome> {
    let spec = sk();
    let (opt, one, _) = ctx.sk()?;
    let measure = opt.measure.clone();
    let one = one.clone();
    let grid = XGrid::default();
    let zero = solve_coupled(&spec, &measure, 0.0, &grid)?;
    let plus = solve_coupled(&spec, &measure, LAMBDA_STEP, &grid)?;
    let minus = solve_coupled(&spec, &measure, -LAMBDA_STEP, &grid)?;
    let core = grid.half_width() / 2.0;
    let pts: Vec<f64> = (-20..=20).map(|i| i as f64 * core / 20.0).collect();
    let (mut sep, mut der): (f64, f64) = (0.0, 0.0);
    for &x1 in &pts {
        for &x2 in &pts {
            let a = one.eval_layer(0, x1);
            let b = one.eval_layer(0, x2);
            sep = sep.max((zero.psi0(x1, x2) - a.0 - b.0).abs());
            let fd = (plus.psi0(x1, x2) - minus.psi0(x1, x2)) / (2.0 * LAMBDA_STEP);
            der = der.max((fd - a.1 * b.1).abs());
        }
    }
    Ok(Outcome {
        pass: sep <= SEPARATION_TOL && der <= LAMBDA_DERIVATIVE_TOL,
        detail: format!("separation {sep:.2e}, lambda-derivative error {der:.2e} on |x| <= {core}"),
    })
}

fn c6_constants(ctx: &mut Ctx) -> Result<Outcome> {
    let settings = USolverSettings::default();
    let (_, sol, c) = ctx.sk()?;
    let (sol, c) = (sol.clone(), c.clone());
    let u1 = solve_u(&sol, c.d, 1.0, &settings)?.u;
    let fine_grid = sol.grid().with_gh_nodes(2 * sol.grid().gh_nodes())?;
    let fine = solve_parisi(sol.spec(), sol.measure(), &fine_grid)?;
    let nu_fine = constants_for(&fine, 0.0, 64, &settings)?.nu;
    let rs = ctx.rs()?.clone();
    let rs_nu = constants_for(
        &solve_parisi(&rs_spec(), &rs.measure, &XGrid::default())?,
        rs.gap,
        32,
        &settings,
    )?
    .nu;
    let deg_nu = ctx.nu_degenerate()?;
    let (h, b1) = (degenerate().h(), degenerate().beta(1));
    let l = |z: f64| (2.0 * (h + b1 * z).cosh()).ln();
    let m1 = gaussian_simpson(l);
    let oracle = gaussian_simpson(|z| (l(z) - m1).powi(2));
    let (e_u, e_nu, e_deg) = (
        (u1 - c.d).abs(),
        (nu_fine - c.nu).abs(),
        (deg_nu - oracle).abs(),
    );
    let positive = c.nu > 0.0 && rs_nu > 0.0 && deg_nu > 0.0;
    Ok(Outcome {
        pass: e_u <= U_ONE_TOL && e_nu <= NU_DOUBLING_TOL && e_deg <= NU_DEGENERATE_TOL && positive,
        detail: format!(
            "|u_1 - d| {e_u:.2e}; nu {:.10} vs doubled {nu_fine:.10} ({e_nu:.2e}); nu > 0 for SK, RS ({rs_nu:.6}), degenerate; degenerate identity {e_deg:.2e}",
            c.nu
        ),
    })
}

fn c7_lemma2(ctx: &mut Ctx) -> Result<Outcome> {
    let nodes: Vec<f64> = (0..LEMMA2_T_NODES)
        .map(|i| i as f64 / (LEMMA2_T_NODES - 1) as f64)
        .collect();
    let out = ctx.record(
        "lemma2",
        Box::new(move || {
            Ok(json(&variance_curve(
                &sk(),
                LEMMA2_N,
                LEMMA2_M,
                &nodes,
                SEED,
            )?))
        }),
    )?;
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    let pass =
        r["identity_holds"] == true && r["nonnegative"] == true && r["nondecreasing"] == true;
    Ok(Outcome {
        pass,
        detail: format!(
            "Var {:.6} vs N int {:.6} (3 x combined se = {:.6}); nonnegative {}, nondecreasing {}",
            r["variance"]["value"].as_f64().unwrap(),
            r["integral"]["value"].as_f64().unwrap(),
            3.0 * r["combined_se"].as_f64().unwrap(),
            r["nonnegative"],
            r["nondecreasing"]
        ),
    })
}

fn c8_variance(ctx: &mut Ctx) -> Result<Outcome> {
    let nu = ctx.sk()?.2.nu;
    let xi1 = sk().xi(1.0)?;
    let mut pass = true;
    let mut details = Vec::new();
    for n in LADDER {
        let out = ctx.record(
            format!("variance n={n}"),
            Box::new(move || Ok(json(&estimate_variance(&sk(), n, VARIANCE_M, SEED)?))),
        )?;
        let r: serde_json::Value = serde_json::from_str(&out).unwrap();
        let v = r["variance_per_spin"]["value"].as_f64().unwrap();
        let ok = v >= nu / 2.0 && r["within_poincare"] == true;
        pass &= ok;
        details.push(format!("n={n}: {v:.5}"));
    }
    Ok(Outcome {
        pass,
        detail: format!(
            "Var/N {} in [nu/2 = {:.5}, xi(1) = {xi1} (1 + 3 rel se)]",
            details.join(", "),
            nu / 2.0
        ),
    })
}

fn c9_chaos(ctx: &mut Ctx) -> Result<Outcome> {
    let (_, sol, c) = ctx.sk()?;
    let (sol, d) = (sol.clone(), c.d);
    let centre_t = solve_u(&sol, d, CHAOS_T, &USolverSettings::default())?.u;
    let centre_ts0 = compute_u_prop1(&sol, CHAOS_T)?;
    let mut pass = true;
    let mut details = Vec::new();
    for (mode, centre) in [(ChaosMode::T, centre_t), (ChaosMode::Ts0, centre_ts0)] {
        let out = ctx.record(
            format!("chaos {mode:?}"),
            Box::new(move || {
                Ok(json(&chaos_ladder(
                    &sk(),
                    &LADDER,
                    CHAOS_M,
                    CHAOS_T,
                    centre,
                    CHAOS_EPS,
                    mode,
                    SEED,
                )?))
            }),
        )?;
        let r: serde_json::Value = serde_json::from_str(&out).unwrap();
        pass &= r["decreasing"] == true;
        let tails: Vec<String> = r["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| {
                format!(
                    "{:.4}±{:.4}",
                    p["tail"]["value"].as_f64().unwrap(),
                    p["tail"]["se"].as_f64().unwrap()
                )
            })
            .collect();
        details.push(format!(
            "{mode:?} (center {centre:.5}): {}",
            tails.join(" > ")
        ));
    }
    Ok(Outcome {
        pass,
        detail: details.join("; "),
    })
}

fn c10_clt(ctx: &mut Ctx) -> Result<Outcome> {
    let nu = ctx.sk()?.2.nu;
    let mut ks = Vec::new();
    let mut spread = 0.0;
    for n in LADDER {
        let out = ctx.record(
            format!("clt n={n}"),
            Box::new(move || Ok(json(&clt_samples(&sk(), n, KS_M, nu, SEED)?.values))),
        )?;
        let w: Vec<f64> = serde_json::from_str(&out).unwrap();
        ks.push(ks_statistic(&w)?.statistic);
        spread = (w.iter().map(|x| x * x).sum::<f64>() / w.len() as f64).sqrt();
    }
    let noise = KS_NOISE_FACTOR * (2.0 / KS_M as f64).sqrt();
    let (first, last) = (ks[0], ks[ks.len() - 1]);
    let deg_nu = ctx.nu_degenerate()?;
    let out = ctx.record(
        "stein degenerate",
        Box::new(move || {
            let w = clt_samples(&degenerate(), STEIN_N, STEIN_M, deg_nu, SEED)?.values;
            let key = SeedKey::new(SEED, family::key(family::BOOTSTRAP, STEIN_N), 0, 0);
            Ok(json(&stein_discrepancy(&w, key, STEIN_K_SE)?))
        }),
    )?;
    let stein: serde_json::Value = serde_json::from_str(&out).unwrap();
    let stein_pass = stein["pass"] == true;
    let (trend, small) = (last <= first + noise, last <= KS_MAX);
    Ok(Outcome {
        pass: trend && small && stein_pass,
        detail: format!(
            "KS {} (trend within {noise:.4}: {trend}; final <= {KS_MAX}: {small}; sd of W at n={} is {spread:.3}); Stein max {:.2e} (se {:.2e}) at n={STEIN_N}: {}",
            ks.iter().map(|k| format!("{k:.4}")).collect::<Vec<_>>().join(" -> "),
            LADDER[LADDER.len() - 1],
            stein["max_abs"].as_f64().unwrap(),
            stein["max_se"].as_f64().unwrap(),
            if stein_pass { "within 3 se" } else { "outside 3 se" }
        ),
    })
}

fn c11_guerra(ctx: &mut Ctx) -> Result<Outcome> {
    let measure = ctx.sk()?.0.measure.clone();
    let mut pass = true;
    let mut details = Vec::new();
    for lambda in GUERRA_LAMBDAS {
        for sign in [TiltSign::Plus, TiltSign::Minus] {
            let m = measure.clone();
            let out = ctx.record(
                format!("guerra {lambda} {sign:?}"),
                Box::new(move || {
                    let grid = XGrid::default();
                    Ok(json(&guerra_check(
                        &sk(),
                        &m,
                        &grid,
                        GUERRA_N,
                        GUERRA_M,
                        lambda,
                        GUERRA_T,
                        sign,
                        SEED,
                    )?))
                }),
            )?;
            let r: serde_json::Value = serde_json::from_str(&out).unwrap();
            pass &= r["pass"] == true;
            details.push(format!(
                "{}{lambda}: {:.4} <= {:.4}",
                if sign == TiltSign::Plus { "+" } else { "-" },
                r["estimate"]["value"].as_f64().unwrap(),
                r["bound"].as_f64().unwrap()
            ));
        }
    }
    Ok(Outcome {
        pass,
        detail: details.join(", "),
    })
}

fn c12_determinism(ctx: &mut Ctx) -> Result<Outcome> {
    if ctx.recorded.is_empty() {
        for c in [7, 8, 9, 10, 11] {
            CRITERIA[c - 1].2(ctx)?;
        }
    }
    let threads = rayon::current_num_threads() + 2;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let mut differing = Vec::new();
    for (label, first, f) in &ctx.recorded {
        if pool.install(f)? != *first {
            differing.push(label.clone());
        }
    }
    Ok(Outcome {
        pass: differing.is_empty(),
        detail: format!(
            "{} experiments rerun with {threads} threads (first run {}); differing: {:?}",
            ctx.recorded.len(),
            rayon::current_num_threads(),
            differing
        ),
    })
}

type Check = fn(&mut Ctx) -> Result<Outcome>;

/// Number, name, check and runtime budget in seconds.
const CRITERIA: [(usize, &str, Check, Option<f64>); 12] = [
    (1, "Parisi closed forms", c1_closed_forms, Some(1.0)),
    (2, "PDE residual refinement", c2_pde_residual, Some(10.0)),
    (3, "structural invariants of Phi", c3_invariants, None),
    (
        4,
        "replica-symmetric oracle",
        c4_replica_symmetric,
        Some(60.0),
    ),
    (5, "coupled solver", c5_coupled, Some(120.0)),
    (6, "CLT constants", c6_constants, Some(60.0)),
    (7, "variance identity", c7_lemma2, Some(300.0)),
    (8, "variance ladder", c8_variance, Some(600.0)),
    (9, "disorder chaos trend", c9_chaos, Some(600.0)),
    (10, "CLT trend", c10_clt, Some(900.0)),
    (11, "Guerra bound", c11_guerra, Some(600.0)),
    (
        12,
        "determinism across thread counts",
        c12_determinism,
        None,
    ),
];

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut ctx = Ctx::default();
    let mut failures = 0;
    for (id, name, check, budget) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check(&mut ctx);
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => {
                let in_time = budget.is_none_or(|b| secs <= b);
                let note = if in_time {
                    String::new()
                } else {
                    format!(" [over budget {}s]", budget.unwrap())
                };
                (o.pass && in_time, format!("{}{note}", o.detail))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} {id:>2} {name} ({secs:.1}s): {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
