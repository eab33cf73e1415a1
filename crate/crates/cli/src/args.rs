use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "corner-sinr", version, about = "V2V link reliability near road intersections")]
pub struct Cli {
    /// Scenario file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed of every random stream.
    #[arg(long, global = true, value_name = "U64", default_value_t = 1)]
    pub seed: u64,

    /// Output directory, created if missing [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file and report violations and warnings.
    Validate,
    /// Average reliability along the transmitter walk.
    Analytic(AnalyticArgs),
    /// Transmit probability meeting a reliability target versus road length.
    Design(DesignArgs),
    /// Meta distribution of the conditional success probability.
    Meta(MetaArgs),
    /// Per-realization outage curves along the transmitter walk.
    Finegrained(FineArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

/// Overrides applied on top of the scenario file.
#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Half-length of both roads in meters.
    #[arg(long, value_name = "M")]
    pub half_len: Option<f64>,

    /// Aloha transmit probability (ignored with --design).
    #[arg(long, value_name = "P")]
    pub tx_prob: Option<f64>,

    /// Replace the transmit probability by the design value for the road length.
    #[arg(long, overrides_with = "no_design")]
    pub design: bool,

    /// Keep the configured transmit probability (default).
    #[arg(long, overrides_with = "design")]
    pub no_design: bool,

    /// Reliability target of the design link.
    #[arg(long, value_name = "P", default_value_t = 0.9)]
    pub target: f64,

    /// Manhattan separation of the design link [default: from the config link]
    #[arg(long, value_name = "M")]
    pub d_target: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Largest transmitter/receiver separation of the walk.
    #[arg(long, value_name = "M", default_value_t = 140.0)]
    pub d_max: f64,

    /// Number of transmitter positions on the walk.
    #[arg(long, value_name = "N", default_value_t = 140, value_parser = positive)]
    pub m_e: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Explicit separations (comma separated) instead of the equidistant walk.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub sweep_separations: Option<Vec<f64>>,

    /// Use infinitely long roads.
    #[arg(long)]
    pub infinite: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// Reliability target.
    #[arg(long, value_name = "P", default_value_t = 0.9)]
    pub target: f64,

    /// Manhattan separation of the design link [default: from the config link]
    #[arg(long, value_name = "M")]
    pub d_target: Option<f64>,

    /// Road half-lengths: a comma list, or `log:START:STOP:N` / `lin:START:STOP:N`.
    #[arg(long, value_name = "GRID", default_value = "log:20:10000:40")]
    pub r_grid: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Fading,
}

#[derive(Debug, Clone, Args)]
pub struct MonteCarloArgs {
    /// Number of traffic realizations.
    #[arg(long, value_name = "N", default_value_t = 2000, value_parser = positive)]
    pub n_ppp: usize,

    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,

    /// Fading draws per realization in fading mode.
    #[arg(long, value_name = "N", default_value_t = 1000, value_parser = positive)]
    pub n_f: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MetaArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[command(flatten)]
    pub mc: MonteCarloArgs,

    /// Histogram bins over [0, 1].
    #[arg(long, value_name = "N", default_value_t = 150, value_parser = positive)]
    pub bins: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FineArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[command(flatten)]
    pub mc: MonteCarloArgs,

    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Number of per-realization curves exported to the matrix file.
    #[arg(long, value_name = "N", default_value_t = 100)]
    pub lines: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// Parses a road-length grid specification.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"));
    let grid = match parts.as_slice() {
        [kind @ ("log" | "lin"), a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|e| format!("bad count {n:?}: {e}"))?;
            if n < 2 || !(a > 0.0) || !(b > a) {
                return Err("need 0 < START < STOP and N >= 2".into());
            }
            let t = |i: usize| i as f64 / (n - 1) as f64;
            if *kind == "log" {
                (0..n).map(|i| a * (b / a).powf(t(i))).collect()
            } else {
                (0..n).map(|i| a + (b - a) * t(i)).collect()
            }
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("unrecognized grid {spec:?}")),
    };
    if grid.is_empty() || grid.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err("grid values must be positive and finite".into());
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("200,500,10000").unwrap(), vec![200.0, 500.0, 10000.0]);
        let g = parse_grid("log:10:1000:3").unwrap();
        assert!((g[1] - 100.0).abs() < 1e-9);
        assert_eq!(g[2], 1000.0);
        assert_eq!(parse_grid("lin:0.5:1.5:3").unwrap(), vec![0.5, 1.0, 1.5]);
        assert!(parse_grid("log:0:10:3").is_err());
        assert!(parse_grid("200,-1").is_err());
        assert!(parse_grid("cube:1:2:3").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
