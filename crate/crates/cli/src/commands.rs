use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::Parser;
use corner_sinr::analytic::{p_noint, success_probability, success_probability_inf};
use corner_sinr::design::{apply_design, design_sweep, optimal_tx_prob_inf};
use corner_sinr::montecarlo::{fine_grained_sweep, meta_distribution, MetaConfig, Mode, SweepGeometry};
use corner_sinr::{Execution, Link, Scenario};
use serde_json::Value;

use crate::args::{parse_grid, AnalyticArgs, Cli, Command, DesignArgs, FineArgs, MetaArgs, ModeArg, ScenarioArgs};
use crate::config::{self, Loaded};
use crate::output::{RunManifest, Scale, Table};
use crate::{Failure, THREADS_ENV};

type Outcome<T> = Result<T, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn domain(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Domain(e.into())
}

struct Ctx {
    loaded: Loaded,
    seed: u64,
}

/// What a command produced, before anything is written.
struct Run {
    tables: Vec<Table>,
    scenario: Scenario,
    scale: Scale,
    /// Reported after the manifest is written.
    failure: Option<Failure>,
}

impl Run {
    fn ok(tables: Vec<Table>, scenario: Scenario, scale: Scale) -> Self {
        Run {
            tables,
            scenario,
            scale,
            failure: None,
        }
    }
}

fn threads_from_env() -> Outcome<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(usage(anyhow!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Outcome<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(usage)?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Outcome<T> {
    Ok(f())
}

/// Arguments worth recording for a replay: `--out` is dropped and the config
/// path made absolute.
fn recorded_argv(raw: &[OsString], config: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = raw.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
        } else if a.starts_with("--out=") {
        } else if a == "--config" {
            it.next();
            out.push(a);
            out.push(config.display().to_string());
        } else if a.starts_with("--config=") {
            out.push(format!("--config={}", config.display()));
        } else {
            out.push(a);
        }
    }
    out
}

pub fn dispatch(cli: Cli, raw: &[OsString]) -> Outcome<()> {
    let threads = threads_from_env()?;
    if let Command::Replay(r) = &cli.command {
        return replay(&r.manifest, cli.out);
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let config_path = cli
        .config
        .clone()
        .ok_or_else(|| usage(anyhow!("--config PATH is required")))?;
    let loaded = config::load(&config_path).map_err(usage)?;
    let config_abs = fs::canonicalize(&config_path).unwrap_or(config_path);
    fs::create_dir_all(&out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(usage)?;

    let start = Instant::now();
    let ctx = Ctx { loaded, seed: cli.seed };
    let command = cli.command;
    let run = with_threads(threads, || execute(&command, &ctx))??;

    let mut outputs = Vec::new();
    for t in &run.tables {
        let p = t.write(&out, cli.format).map_err(domain)?;
        outputs.push(p.display().to_string());
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command_name(&command).into(),
        argv: recorded_argv(raw, &config_abs),
        scenario: serde_json::to_value(run.scenario).unwrap_or(Value::Null),
        master_seed: cli.seed,
        scale: run.scale,
        threads,
        outputs,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    manifest.write(&out).map_err(domain)?;
    match run.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn replay(manifest: &Path, out: Option<PathBuf>) -> Outcome<()> {
    let text = fs::read_to_string(manifest)
        .with_context(|| format!("reading {}", manifest.display()))
        .map_err(usage)?;
    let value: Value = serde_json::from_str(&text).map_err(usage)?;
    let argv: Vec<String> = value
        .get("argv")
        .cloned()
        .and_then(|v| serde_json::from_value(v).ok())
        .ok_or_else(|| usage(anyhow!("{} has no argv list", manifest.display())))?;
    let out = out.unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).join("replay"));
    let mut full: Vec<OsString> = vec!["corner-sinr".into()];
    full.extend(argv.iter().map(OsString::from));
    full.push("--out".into());
    full.push(out.into_os_string());
    let cli = Cli::try_parse_from(&full).map_err(usage)?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(usage(anyhow!("a manifest cannot replay another replay")));
    }
    dispatch(cli, &full[1..])
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Analytic(_) => "analytic",
        Command::Design(_) => "design",
        Command::Meta(_) => "meta",
        Command::Finegrained(_) => "finegrained",
        Command::Replay(_) => "replay",
    }
}

fn execute(command: &Command, ctx: &Ctx) -> Outcome<Run> {
    match command {
        Command::Validate => Ok(validate(ctx)),
        Command::Analytic(a) => analytic(ctx, a),
        Command::Design(a) => design(ctx, a),
        Command::Meta(a) => meta(ctx, a),
        Command::Finegrained(a) => finegrained(ctx, a),
        Command::Replay(_) => unreachable!("handled before execution"),
    }
}

fn validate(ctx: &Ctx) -> Run {
    let s = ctx.loaded.scenario;
    let d = s.validate();
    for v in &d.violations {
        println!("violation [{}]: {}", v.code, v.message);
    }
    for w in &d.warnings {
        println!("warning [{}]: {}", w.code, w.message);
    }
    let failure = if d.is_ok() {
        println!("ok");
        None
    } else {
        Some(domain(anyhow!("invalid scenario: {}", d.summary())))
    };
    Run {
        tables: Vec::new(),
        scenario: s,
        scale: Scale::default(),
        failure,
    }
}

fn check_target(target: f64) -> Outcome<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        Err(usage(anyhow!("--target must lie in (0, 1), got {target}")))
    }
}

fn design_link(ctx: &Ctx, d_target: Option<f64>) -> Outcome<Link> {
    match d_target {
        None => Ok(ctx.loaded.link),
        Some(d) => Link::at_separation(ctx.loaded.link.rx_dist(), d).map_err(usage),
    }
}

/// Scenario after flag overrides and, with `--design`, the designed transmit
/// probability.
fn resolve(ctx: &Ctx, a: &ScenarioArgs, infinite: bool) -> Outcome<(Scenario, Link)> {
    check_target(a.target)?;
    let mut s = ctx.loaded.scenario;
    if let Some(r) = a.half_len {
        s = s.with_half_len(r);
    }
    if let Some(p) = a.tx_prob {
        s = s.with_tx_prob(p);
    }
    let link = design_link(ctx, a.d_target)?;
    let s = s
        .validated()
        .map_err(|e| domain(anyhow!("invalid scenario: {e}")))?;
    if !a.design {
        return Ok((s, link));
    }
    let p0 = p_noint(&s, &link).map_err(domain)?;
    if a.target > p0 {
        return Err(infeasible(a.target, p0));
    }
    if infinite {
        let p = optimal_tx_prob_inf(&s, a.target, &link).map_err(domain)?;
        Ok((s.with_tx_prob(p.clamp(0.0, 1.0)), link))
    } else {
        let (designed, _) = apply_design(&s, a.target, &link).map_err(domain)?;
        Ok((designed, link))
    }
}

fn infeasible(target: f64, p0: f64) -> Failure {
    domain(anyhow!(
        "target {target} is infeasible: the interference-free success probability is {p0}"
    ))
}

fn analytic(ctx: &Ctx, a: &AnalyticArgs) -> Outcome<Run> {
    let (s, link) = resolve(ctx, &a.scenario, a.infinite)?;
    let rx_dist = link.rx_dist();
    let links = match &a.sweep_separations {
        Some(seps) => seps
            .iter()
            .map(|&d| Link::at_separation(rx_dist, d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(usage)?,
        None => SweepGeometry {
            rx_dist,
            d_max: a.sweep.d_max,
            m_e: a.sweep.m_e,
            d_target: link.separation(),
            target: a.scenario.target,
        }
        .links()
        .map_err(usage)?,
    };
    let model = s.channel.model();
    let mut t = Table::new(
        "analytic",
        &["separation_m", "region", "p_noint", "p_x", "p_y", "p_c", "outage"],
    );
    for l in &links {
        let b = if a.infinite {
            success_probability_inf(&s, l)
        } else {
            success_probability(&s, l)
        }
        .map_err(domain)?;
        t.push(vec![
            l.separation().into(),
            model.branch(l.tx, l.rx).label().into(),
            b.p_noint.into(),
            b.p_x.into(),
            b.p_y.into(),
            b.p_c.into(),
            b.outage().into(),
        ]);
    }
    let scale = Scale {
        m_e: Some(links.len()),
        ..Scale::default()
    };
    Ok(Run::ok(vec![t], s, scale))
}

fn design(ctx: &Ctx, a: &DesignArgs) -> Outcome<Run> {
    check_target(a.target)?;
    let grid = parse_grid(&a.r_grid).map_err(|e| usage(anyhow!("--r-grid: {e}")))?;
    let link = design_link(ctx, a.d_target)?;
    let s = ctx
        .loaded
        .scenario
        .validated()
        .map_err(|e| domain(anyhow!("invalid scenario: {e}")))?;
    let p0 = p_noint(&s, &link).map_err(domain)?;
    if a.target > p0 {
        return Err(infeasible(a.target, p0));
    }
    let points = design_sweep(&s, a.target, &link, &grid).map_err(domain)?;
    let mut t = Table::new("design", &["R_m", "p_star_raw", "p_star_clamped", "p_inf", "feasible"]);
    for p in &points {
        t.push(vec![
            p.half_len.into(),
            p.p_star_raw.into(),
            p.p_star_clamped.into(),
            p.p_inf.into(),
            p.feasible.into(),
        ]);
    }
    Ok(Run::ok(vec![t], s, Scale::default()))
}

fn mode(m: ModeArg, n_f: usize) -> Mode {
    match m {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Fading => Mode::Fading { n_f },
    }
}

fn meta(ctx: &Ctx, a: &MetaArgs) -> Outcome<Run> {
    let (s, link) = resolve(ctx, &a.scenario, false)?;
    let cfg = MetaConfig {
        n_ppp: a.mc.n_ppp,
        mode: mode(a.mc.mode, a.mc.n_f),
        n_bins: a.bins,
        master_seed: ctx.seed,
        execution: Execution::Parallel,
    };
    let est = meta_distribution(&s, &link, &cfg).map_err(domain)?;
    let analytic = success_probability(&s, &link).map_err(domain)?;
    let target = a.scenario.target;

    let mut hist = Table::new("meta_histogram", &["bin_lo", "bin_hi", "count"]);
    for (i, &c) in est.histogram.iter().enumerate() {
        let (lo, hi) = est.bin_edges(i);
        hist.push(vec![lo.into(), hi.into(), c.into()]);
    }
    let mut samples = Table::new("meta_samples", &["realization_id", "p_c"]);
    for (i, &p) in est.samples.iter().enumerate() {
        samples.push(vec![i.into(), p.into()]);
    }
    let (beta_a, beta_b) = est.beta_params().unwrap_or((f64::NAN, f64::NAN));
    let bi = est.bimodality(target);
    let mut summary = Table::new(
        "meta_summary",
        &[
            "n_ppp",
            "tx_prob",
            "p_c_analytic",
            "moment1",
            "moment2",
            "std_error",
            "mean_outage",
            "cdf_at_target",
            "cdf_at_mean",
            "beta_a",
            "beta_b",
            "ks_beta",
            "frac_low_outage",
            "frac_high_outage",
            "frac_near_mean",
        ],
    );
    summary.push(vec![
        est.n_ppp().into(),
        s.roads.tx_prob.into(),
        analytic.p_c.into(),
        est.moment1.into(),
        est.moment2.into(),
        est.std_error().into(),
        est.mean_outage().into(),
        est.cdf_at(target).into(),
        est.cdf_at(est.moment1).into(),
        beta_a.into(),
        beta_b.into(),
        est.ks_beta().unwrap_or(f64::NAN).into(),
        bi.low.into(),
        bi.high.into(),
        bi.near_mean.into(),
    ]);
    let scale = Scale {
        n_ppp: Some(cfg.n_ppp),
        n_f: matches!(cfg.mode, Mode::Fading { .. }).then_some(a.mc.n_f),
        m_e: None,
        n_b: Some(cfg.n_bins),
    };
    Ok(Run::ok(vec![hist, samples, summary], s, scale))
}

fn finegrained(ctx: &Ctx, a: &FineArgs) -> Outcome<Run> {
    let (s, link) = resolve(ctx, &a.scenario, false)?;
    let target = a.scenario.target;
    let geom = SweepGeometry {
        rx_dist: link.rx_dist(),
        d_max: a.sweep.d_max,
        m_e: a.sweep.m_e,
        d_target: link.separation(),
        target,
    };
    let cfg = MetaConfig {
        n_ppp: a.mc.n_ppp,
        mode: mode(a.mc.mode, a.mc.n_f),
        master_seed: ctx.seed,
        ..MetaConfig::default()
    };
    let fg = fine_grained_sweep(&s, &geom, &cfg).map_err(domain)?;

    let mut matrix = Table::new("finegrained_matrix", &["separation_m", "realization_id", "p_out"]);
    for r in 0..a.lines.min(fg.success.len()) {
        for (k, &d) in fg.separations.iter().enumerate() {
            matrix.push(vec![d.into(), r.into(), fg.outage(r, k).into()]);
        }
    }
    let mut agg = Table::new(
        "finegrained_aggregate",
        &["separation_m", "mean_out", "cdf_at_target", "cond_mean_good", "cond_mean_bad"],
    );
    for (k, (&d, est)) in fg.separations.iter().zip(&fg.estimates).enumerate() {
        let (good, bad) = fg.conditional_means(k);
        agg.push(vec![
            d.into(),
            est.mean_outage().into(),
            est.cdf_at(target).into(),
            good.into(),
            bad.into(),
        ]);
    }
    let scale = Scale {
        n_ppp: Some(cfg.n_ppp),
        n_f: matches!(cfg.mode, Mode::Fading { .. }).then_some(a.mc.n_f),
        m_e: Some(geom.m_e),
        n_b: Some(cfg.n_bins),
    };
    Ok(Run::ok(vec![matrix, agg], s, scale))
}
