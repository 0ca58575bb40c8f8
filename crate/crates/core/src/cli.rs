//! The `fidiff` command line.
//!
//! Every run is described by a [`RunConfig`], built either from flags or
//! from a JSON file given with `--config`. The config is written back as
//! `manifest.json` in the output directory, so
//! `fidiff --config OUT/manifest.json --out OTHER` repeats a run exactly.
//!
//! Manifest schema:
//!
//! ```json
//! {
//!   "out": "runs/predict",
//!   "master_seed": 7,
//!   "threads": null,
//!   "command": { "subcommand": "exp-predict", "data": "runs/synth", "cascades": null,
//!                "mc_rounds": 10000, "window": 604800 }
//! }
//! ```
//!
//! `command` holds the subcommand name and its flags with dashes replaced by
//! underscores; omitted flags take their command-line defaults.

use std::collections::{BTreeMap, HashSet};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cascade::{
    extract_cascades, read_cascade_log, write_cascade_log, CascadeLog, DEFAULT_WINDOW_SECS,
};
use crate::diffusion::{Diffusion, Model};
use crate::error::{Error, Result};
use crate::experiments::{prediction_experiment, probability_histogram, stability_experiment};
use crate::inference::infer;
use crate::ingest::{read_tag_list, Dataset, LoadConfig};
use crate::metrics;
use crate::probs::EdgeProbabilities;
use crate::synth::{self, EdgeProbLaw, SynthConfig, CASCADES_FILE};

pub const MANIFEST_FILE: &str = "manifest.json";

fn default_window() -> i64 {
    DEFAULT_WINDOW_SECS
}

fn default_rounds() -> u64 {
    10_000
}

fn default_stability_rounds() -> usize {
    100
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Load a dataset, drop private profiles and spam tweets, and write the
    /// cleaned files.
    Ingest {
        #[arg(long)]
        data: PathBuf,
        /// Newline-separated list of trending hashtags.
        #[arg(long)]
        #[serde(default)]
        trending: Option<PathBuf>,
        #[arg(long)]
        #[serde(default)]
        keep_private: bool,
    },
    /// Reciprocity, DI distribution and fit, hierarchy and homophily.
    Metrics {
        #[arg(long)]
        data: PathBuf,
    },
    /// Generate a synthetic community with a cascade log.
    Synth {
        #[arg(long, default_value_t = 2000)]
        nodes: usize,
        #[arg(long, default_value_t = 5e-3)]
        density: f64,
        #[arg(long, default_value_t = 0.5)]
        reciprocity: f64,
        #[arg(long, default_value_t = 3.0)]
        di_alpha: f64,
        #[arg(long, default_value_t = 5.0)]
        di_beta: f64,
        /// Edge probabilities ~ uniform(p_low, p_high) ...
        #[arg(long, default_value_t = 0.05)]
        p_low: f64,
        #[arg(long, default_value_t = 0.3)]
        p_high: f64,
        /// ... or all equal to this value.
        #[arg(long)]
        #[serde(default)]
        p_const: Option<f64>,
        #[arg(long, default_value_t = 50_000)]
        messages: usize,
        #[arg(long, value_enum, default_value_t = Model::Fi)]
        model: Model,
    },
    /// Reconstruct cascades from the tweets of a dataset.
    Extract {
        #[arg(long)]
        data: PathBuf,
        /// Attribution window in seconds.
        #[arg(long, default_value_t = DEFAULT_WINDOW_SECS)]
        #[serde(default = "default_window")]
        window: i64,
    },
    /// Infer edge probabilities from a cascade log.
    Infer {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        model: Model,
        /// Cascade log; defaults to DATA/cascades.txt.
        #[arg(long)]
        #[serde(default)]
        cascades: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_SECS)]
        #[serde(default = "default_window")]
        window: i64,
    },
    /// Monte Carlo spread of a seed set.
    Spread {
        #[arg(long)]
        data: PathBuf,
        /// Edge probabilities CSV (u,v,p,attempts).
        #[arg(long)]
        probs: PathBuf,
        #[arg(long, value_enum)]
        model: Model,
        /// Comma-separated external ids.
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        #[serde(default = "default_rounds")]
        rounds: u64,
        /// FI activation probability of insusceptible nodes.
        #[arg(long, default_value_t = 0.0)]
        #[serde(default)]
        epsilon: f64,
    },
    /// Split-log stability of FI and IC inference.
    ExpStability {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        #[serde(default)]
        cascades: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        #[serde(default = "default_stability_rounds")]
        rounds: usize,
        #[arg(long, default_value_t = DEFAULT_WINDOW_SECS)]
        #[serde(default = "default_window")]
        window: i64,
    },
    /// Spread prediction of FI and IC against observed cascade sizes.
    ExpPredict {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        #[serde(default)]
        cascades: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        #[serde(default = "default_rounds")]
        mc_rounds: u64,
        #[arg(long, default_value_t = DEFAULT_WINDOW_SECS)]
        #[serde(default = "default_window")]
        window: i64,
    },
}

impl Command {
    fn is_stochastic(&self) -> bool {
        matches!(
            self,
            Command::Synth { .. }
                | Command::Spread { .. }
                | Command::ExpStability { .. }
                | Command::ExpPredict { .. }
        )
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fidiff",
    version,
    about = "First-Influencer and Independent Cascade diffusion toolkit"
)]
struct Cli {
    /// Run configuration as JSON (e.g. a previous manifest.json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub out: PathBuf,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
    pub command: Command,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn resolve(cli: Cli) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => {
            return Err(Failure::Usage(
                "give either --config or a subcommand, not both".into(),
            ))
        }
        (None, None) => return Err(Failure::Usage("missing subcommand".into())),
        (Some(path), None) => {
            let file = File::open(&path).map_err(Error::from)?;
            serde_json::from_reader(BufReader::new(file))
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(command)) => RunConfig {
            out: cli
                .out
                .clone()
                .ok_or_else(|| Failure::Usage("--out is required".into()))?,
            master_seed: cli.seed,
            threads: cli.threads,
            command,
        },
    };
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if cli.seed.is_some() {
        cfg.master_seed = cli.seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cfg.command.is_stochastic() && cfg.master_seed.is_none() {
        return Err(Failure::Usage(
            "--seed is required for this subcommand".into(),
        ));
    }
    if cfg.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    Ok(cfg)
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 on a runtime error, 2 on a usage
/// error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match resolve(cli) {
        Ok(cfg) => cfg,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
            return 2;
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match execute_with_threads(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs a resolved config on a dedicated thread pool.
pub fn execute_with_threads(cfg: &RunConfig) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| execute(cfg))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn load(data: &Path) -> Result<Dataset> {
    let (ds, report) = Dataset::load_dir(data, &LoadConfig::default())?;
    log::info!("loaded {}: {:?}", data.display(), report);
    Ok(ds)
}

fn load_log(data: &Path, cascades: &Option<PathBuf>, ds: &Dataset) -> Result<CascadeLog> {
    let path = cascades.clone().unwrap_or_else(|| data.join(CASCADES_FILE));
    let log = read_cascade_log(BufReader::new(File::open(&path)?))?;
    log.check_against(&ds.graph)?;
    Ok(log)
}

pub fn execute(cfg: &RunConfig) -> Result<()> {
    let out = &cfg.out;
    std::fs::create_dir_all(out)?;
    write_json(&out.join(MANIFEST_FILE), cfg)?;
    let seed = cfg.master_seed.unwrap_or(0);

    match &cfg.command {
        Command::Ingest {
            data,
            trending,
            keep_private,
        } => {
            let (mut ds, report) = Dataset::load_dir(
                data,
                &LoadConfig {
                    keep_private: *keep_private,
                },
            )?;
            let trending = match trending {
                Some(path) => read_tag_list(path)?,
                None => HashSet::new(),
            };
            let spam = ds.filter_spam(&trending)?;
            ds.write_to_dir(out)?;
            write_json(
                &out.join("ingest_report.json"),
                &json!({
                    "load": report,
                    "spam_tweets_dropped": spam,
                    "nodes": ds.graph.node_count(),
                    "edges": ds.graph.edge_count(),
                    "tweets": ds.tweets.len(),
                }),
            )?;
        }

        Command::Metrics { data } => run_metrics(&load(data)?, out)?,

        Command::Synth {
            nodes,
            density,
            reciprocity,
            di_alpha,
            di_beta,
            p_low,
            p_high,
            p_const,
            messages,
            model,
        } => {
            let config = SynthConfig {
                node_count: *nodes,
                target_density: *density,
                reciprocity: *reciprocity,
                di_alpha: *di_alpha,
                di_beta: *di_beta,
                edge_prob_law: match p_const {
                    Some(c) => EdgeProbLaw::Constant { c: *c },
                    None => EdgeProbLaw::Uniform {
                        a: *p_low,
                        b: *p_high,
                    },
                },
                message_count: *messages,
                model: *model,
                master_seed: seed,
            };
            let community = synth::generate(&config)?;
            community.write_to_dir(out)?;
            write_json(
                &out.join("synth_summary.json"),
                &json!({
                    "config": config,
                    "edges": community.graph.edge_count(),
                    "density": community.graph.density()?,
                    "cascades": community.log.len(),
                    "activations": community.log.activation_count(),
                    "tweets": community.log.activation_count(),
                }),
            )?;
        }

        Command::Extract { data, window } => {
            let ds = load(data)?;
            let log = extract_cascades(&ds, *window)?;
            write_cascade_log(&log, BufWriter::new(File::create(out.join(CASCADES_FILE))?))?;
            write_json(
                &out.join("extract_summary.json"),
                &json!({
                    "cascades": log.len(),
                    "activations": log.activation_count(),
                    "window": window,
                }),
            )?;
        }

        Command::Infer {
            data,
            model,
            cascades,
            window,
        } => {
            let ds = load(data)?;
            let log = load_log(data, cascades, &ds)?;
            let p = infer(*model, &log, &ds.graph, *window)?;
            p.write_csv(
                &ds.graph,
                BufWriter::new(File::create(out.join(format!("probs_{model}.csv")))?),
            )?;
            let attempted = p.attempts().iter().filter(|&&a| a > 0).count();
            write_json(
                &out.join(format!("infer_{model}.json")),
                &json!({
                    "model": model,
                    "edges": p.len(),
                    "attempted_edges": attempted,
                    "histogram": probability_histogram(&p),
                }),
            )?;
        }

        Command::Spread {
            data,
            probs,
            model,
            seeds,
            rounds,
            epsilon,
        } => {
            let ds = load(data)?;
            let p = EdgeProbabilities::read_csv(&ds.graph, BufReader::new(File::open(probs)?))?;
            let nodes = seeds
                .iter()
                .map(|id| {
                    ds.node(id)
                        .ok_or_else(|| Error::InvalidArgument(format!("unknown seed {id:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if !(0.0..=1.0).contains(epsilon) {
                return Err(Error::InvalidArgument(format!(
                    "epsilon {epsilon} outside [0, 1]"
                )));
            }
            let est = Diffusion::new(&ds.graph, &p)
                .with_epsilon(*epsilon)
                .estimate(*model, &nodes, *rounds, seed)?;
            println!(
                "mean_inclusive={} mean_exclusive={} std_error={} rounds={}",
                est.mean_inclusive, est.mean_exclusive, est.std_error, est.rounds
            );
            write_json(
                &out.join("spread.json"),
                &json!({ "model": model, "seeds": seeds, "estimate": est }),
            )?;
        }

        Command::ExpStability {
            data,
            cascades,
            rounds,
            window,
        } => {
            let ds = load(data)?;
            let log = load_log(data, cascades, &ds)?;
            let fi = stability_experiment(&log, &ds.graph, Model::Fi, *rounds, seed, *window)?;
            let ic = stability_experiment(&log, &ds.graph, Model::Ic, *rounds, seed, *window)?;
            let hist = |m| -> Result<_> {
                Ok(probability_histogram(&infer(m, &log, &ds.graph, *window)?))
            };
            write_json(
                &out.join("stability.json"),
                &json!({
                    "fi": fi,
                    "ic": ic,
                    "fi_over_ic": fi.rmse_mean / ic.rmse_mean,
                    "prob_histogram_fi": hist(Model::Fi)?,
                    "prob_histogram_ic": hist(Model::Ic)?,
                }),
            )?;
            let mut w = csv::Writer::from_path(out.join("stability.csv"))?;
            w.write_record(["model", "rmse_mean", "rmse_std", "rounds"])?;
            for r in [&fi, &ic] {
                w.write_record([
                    r.model.to_string(),
                    r.rmse_mean.to_string(),
                    r.rmse_std.to_string(),
                    r.rounds.to_string(),
                ])?;
            }
            w.flush()?;
            println!("rmse_fi={} rmse_ic={}", fi.rmse_mean, ic.rmse_mean);
        }

        Command::ExpPredict {
            data,
            cascades,
            mc_rounds,
            window,
        } => {
            let ds = load(data)?;
            let log = load_log(data, cascades, &ds)?;
            let report = prediction_experiment(&log, &ds.graph, *mc_rounds, seed, *window)?;
            write_json(
                &out.join("prediction.json"),
                &json!({
                    "rmse_fi": report.fi.rmse_vs_truth,
                    "rmse_ic": report.ic.rmse_vs_truth,
                    "truth_mean_sigma": report.truth_mean,
                    "roots": report.truth.len(),
                    "mc_rounds": report.mc_rounds,
                    "histograms": report.histograms,
                }),
            )?;
            let mut w = csv::Writer::from_path(out.join("prediction.csv"))?;
            w.write_record(["node", "sigma_truth", "sigma_fi", "sigma_ic"])?;
            for (u, truth) in &report.truth {
                w.write_record([
                    ds.external_id(*u).to_string(),
                    truth.to_string(),
                    report.fi.per_node_sigma[u].to_string(),
                    report.ic.per_node_sigma[u].to_string(),
                ])?;
            }
            w.flush()?;
            println!(
                "rmse_fi={} rmse_ic={}",
                report.fi.rmse_vs_truth, report.ic.rmse_vs_truth
            );
        }
    }
    Ok(())
}

fn run_metrics(ds: &Dataset, out: &Path) -> Result<()> {
    let g = &ds.graph;
    let levels = metrics::reciprocal_levels(g);
    let follow = metrics::follower_followee_summary(g);
    let hierarchy = metrics::hierarchy_deltas(g, &ds.di);
    let homophily = metrics::homophily_deltas(g, &ds.di);
    let beta_fit = match metrics::di_beta_fit(&ds.di) {
        Ok(fit) => json!(fit),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let (klout, peer): (Vec<f64>, Vec<f64>) = ds
        .profiles
        .iter()
        .filter_map(|p| Some((p.klout?, p.peerindex?)))
        .unzip();
    let correlation = match metrics::pearson(&klout, &peer) {
        Ok(r) => json!(r),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let mean = |xs: &mut dyn Iterator<Item = f64>| {
        let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        if n == 0 {
            None
        } else {
            Some(s / n as f64)
        }
    };
    write_json(
        &out.join("metrics.json"),
        &json!({
            "nodes": g.node_count(),
            "edges": g.edge_count(),
            "density": g.density().ok(),
            "follow": {
                "above_pct": follow.above_pct,
                "below_pct": follow.below_pct,
                "diagonal_pct": follow.diagonal_pct,
            },
            "reciprocal_level_histogram": metrics::reciprocal_histogram(&levels),
            "di_histogram": metrics::di_histogram(&ds.di),
            "di_beta_fit": beta_fit,
            "klout_peerindex_pearson": correlation,
            "hierarchy": {
                "nodes": hierarchy.len(),
                "mean_delta_r": mean(&mut hierarchy.iter().map(|h| h.delta_r)),
                "mean_delta_e": mean(&mut hierarchy.iter().map(|h| h.delta_e)),
            },
            "homophily": {
                "nodes": homophily.len(),
                "mean_delta_re": mean(&mut homophily.iter().map(|h| h.delta_re)),
                "mean_delta_nre": mean(&mut homophily.iter().map(|h| h.delta_nre)),
            },
        }),
    )?;

    let level_of: BTreeMap<_, _> = levels.iter().copied().collect();
    let mut w = csv::Writer::from_path(out.join("nodes.csv"))?;
    w.write_record(["node", "followers", "followees", "reciprocal_level", "di"])?;
    for u in g.nodes() {
        let (followers, followees) = follow.counts[u.index()];
        w.write_record([
            ds.external_id(u).to_string(),
            followers.to_string(),
            followees.to_string(),
            level_of.get(&u).map(f64::to_string).unwrap_or_default(),
            ds.di[u.index()]
                .map(|d| d.value().to_string())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out.join("hierarchy.csv"))?;
    w.write_record(["node", "delta_r", "delta_e"])?;
    for h in &hierarchy {
        w.write_record([
            ds.external_id(h.node).to_string(),
            h.delta_r.to_string(),
            h.delta_e.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(out.join("homophily.csv"))?;
    w.write_record(["node", "delta_re", "delta_nre"])?;
    for h in &homophily {
        w.write_record([
            ds.external_id(h.node).to_string(),
            h.delta_re.to_string(),
            h.delta_nre.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<RunConfig, String> {
        let cli = Cli::try_parse_from(std::iter::once("fidiff").chain(args.iter().copied()))
            .map_err(|e| e.to_string())?;
        resolve(cli).map_err(|f| match f {
            Failure::Usage(m) => m,
            Failure::Runtime(e) => e.to_string(),
        })
    }

    #[test]
    fn flags_build_a_config() {
        let cfg = parse(&[
            "spread", "--data", "d", "--probs", "p.csv", "--model", "fi", "--seeds", "a,b",
            "--out", "o", "--seed", "3",
        ])
        .unwrap();
        assert_eq!(cfg.master_seed, Some(3));
        assert_eq!(cfg.out, PathBuf::from("o"));
        match &cfg.command {
            Command::Spread {
                seeds,
                rounds,
                epsilon,
                ..
            } => {
                assert_eq!(seeds, &["a", "b"]);
                assert_eq!(*rounds, 10_000);
                assert_eq!(*epsilon, 0.0);
            }
            other => panic!("{other:?}"),
        }
        // the manifest parses back to the same config
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn usage_errors() {
        assert!(parse(&["exp-predict", "--data", "d", "--out", "o"])
            .unwrap_err()
            .contains("--seed"));
        assert!(parse(&["metrics", "--data", "d"])
            .unwrap_err()
            .contains("--out"));
        assert!(parse(&["--out", "o"]).unwrap_err().contains("subcommand"));
        assert!(parse(&["metrics", "--bogus"]).is_err());
        assert!(parse(&["metrics", "--data", "d", "--out", "o"]).is_ok());
    }

    #[test]
    fn config_defaults_fill_omitted_fields() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"out": "o", "master_seed": 1, "command": {"subcommand": "exp-predict", "data": "d"}}"#,
        )
        .unwrap();
        assert_eq!(
            cfg.command,
            Command::ExpPredict {
                data: "d".into(),
                cascades: None,
                mc_rounds: 10_000,
                window: DEFAULT_WINDOW_SECS
            }
        );
        assert!(serde_json::from_str::<RunConfig>(
            r#"{"out": "o", "command": {"subcommand": "nope"}}"#
        )
        .is_err());
    }
}
