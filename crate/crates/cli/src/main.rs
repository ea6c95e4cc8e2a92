//! `graphflex` command line: synthetic data, one-shot learning, incremental
//! growth, evaluation and scaling benchmarks.
//!
//! Exit status is 0 on success, 1 on a runtime failure and 2 on a usage
//! error. `GRAPHFLEX_THREADS` caps the worker count (0 runs single-threaded).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use graphflex::bench::{scaling_run, to_csv, BenchTarget};
use graphflex::io;
use graphflex::learners::{learn, GlassoConfig, Kernel, LearnerKind, LearnerParams, SmoothnessConfig};
use graphflex::metrics::{bound_table, bound_table_csv, conductance, edge_prf, modularity, nmi};
use graphflex::pipeline::{run_with_model, PipelineConfig};
use graphflex::synth::{
    gen_blobs, gen_dcsbm, gen_geometric, gen_grid, gen_heterophily, gen_small_world, DcsbmParams, FeatureModel,
    LabeledDataset,
};
use graphflex::{build_graph, Graph};

#[derive(Parser, Debug)]
#[command(name = "graphflex", version, about = "Incremental graph structure learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset: features, labels and ground-truth edges.
    Synth(SynthArgs),
    /// Learn a graph from features in one shot.
    Learn(LearnArgs),
    /// Grow a graph over expanding batches of rows.
    Grow(GrowArgs),
    /// Score a learned graph, or print the collision-bound table.
    Eval(EvalArgs),
    /// Time the pipeline and a one-shot learner over a grid of sizes.
    Bench(BenchArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum SynthKind {
    Blobs,
    Sbm,
    Sw,
    He,
    Grid,
    Geometric,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    /// Node count (rows × cols for grid is taken from --rows/--cols).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Feature dimension.
    #[arg(long, default_value_t = 32)]
    d: usize,
    /// Distance of class means from the origin.
    #[arg(long, default_value_t = 1.0)]
    sep: f64,
    /// sbm: within-block edge probability.
    #[arg(long, default_value_t = 0.02)]
    p_in: f64,
    /// sbm: between-block edge probability.
    #[arg(long, default_value_t = 0.002)]
    p_out: f64,
    /// sw: ring degree (even).
    #[arg(long, default_value_t = 8)]
    k_ring: usize,
    /// sw: rewiring probability.
    #[arg(long, default_value_t = 0.1)]
    p_rewire: f64,
    /// he: fraction of inter-class edges.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// he: mean degree.
    #[arg(long, default_value_t = 8.0)]
    degree: f64,
    /// geometric: connection radius.
    #[arg(long, default_value_t = 0.05)]
    radius: f64,
    #[arg(long, default_value_t = 32)]
    rows: usize,
    #[arg(long, default_value_t = 32)]
    cols: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Feature output; `.csv` writes CSV, anything else FMTX.
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Ground-truth edge list (not written for blobs).
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum KernelArg {
    Auto,
    Gaussian,
    Unit,
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_parser = parse_learner)]
    method: LearnerKind,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum, default_value_t = KernelArg::Auto)]
    kernel: KernelArg,
    /// σ for the gaussian kernel.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// ann/large: hash count.
    #[arg(long, default_value_t = 8)]
    ann_h: usize,
    /// ann/large: bin width as a fraction of the median pairwise distance.
    #[arg(long, default_value_t = 0.5)]
    ann_width: f64,
    /// cov: fraction of node pairs kept.
    #[arg(long, default_value_t = 0.05)]
    density: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 20000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// glasso: ℓ1 penalty.
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GrowArgs {
    #[arg(long)]
    features: PathBuf,
    /// JSON pipeline configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial graph over the first rows; its node count sets the static prefix.
    #[arg(long)]
    initial: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Per-step report CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Community model to reuse instead of training one.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Where to save the community model.
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct EvalArgs {
    #[command(subcommand)]
    action: Option<EvalAction>,
    #[arg(long, required = true)]
    learned: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Class label per node, used for modularity and conductance.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Predicted communities, compared with --labels by NMI.
    #[arg(long)]
    communities: Option<PathBuf>,
    /// Node count; inferred from the files when absent.
    #[arg(long)]
    n: Option<usize>,
    /// Also write the metrics as a one-row CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum EvalAction {
    /// Print exact, bound and Monte-Carlo collision probabilities as CSV.
    Bound {
        #[arg(long, default_value_t = 1.0)]
        r_bin: f64,
        /// Comma-separated c/r ratios.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,1,2,5")]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated node counts, increasing.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000")]
    grid: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Pipeline configuration; its final learner is also the one-shot baseline.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Blob count of the generated data.
    #[arg(long, default_value_t = 4)]
    centers: usize,
    #[arg(long, default_value_t = 32)]
    d: usize,
    #[arg(long, default_value_t = 6.0)]
    sep: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_learner(s: &str) -> std::result::Result<LearnerKind, String> {
    s.parse()
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("GRAPHFLEX_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("GRAPHFLEX_THREADS must be an integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn synth(a: &SynthArgs) -> Result<()> {
    let fm = FeatureModel::new(a.d, a.sep);
    let ds: LabeledDataset = match a.kind {
        SynthKind::Blobs => gen_blobs(a.n, a.classes, &fm, a.seed)?,
        SynthKind::Sbm => {
            let p = DcsbmParams {
                features: fm,
                ..DcsbmParams::planted(a.n, a.classes, a.p_in, a.p_out, a.seed)
            };
            gen_dcsbm(&p)?.dataset
        }
        SynthKind::Sw => gen_small_world(a.n, a.k_ring, a.p_rewire, a.classes, &fm, a.seed)?,
        SynthKind::He => gen_heterophily(a.n, a.classes, a.alpha, a.degree, &fm, a.seed)?,
        SynthKind::Grid => gen_grid(a.rows, a.cols)?,
        SynthKind::Geometric => gen_geometric(a.n, a.radius, a.seed)?,
    };
    io::write_features(&ds.features, &a.features)?;
    if let Some(p) = &a.labels {
        io::write_labels_file(&ds.labels, p)?;
    }
    if let Some(p) = &a.edges {
        match &ds.graph {
            Some(g) => io::write_graph(g, p)?,
            None => bail!("{:?} data has no ground-truth graph", a.kind),
        }
    }
    Ok(())
}

fn learn_cmd(a: &LearnArgs) -> Result<()> {
    let x = io::read_features(&a.features).with_context(|| format!("reading {}", a.features.display()))?;
    let params = LearnerParams {
        k: a.k,
        kernel: match a.kernel {
            KernelArg::Auto => Kernel::Auto,
            KernelArg::Gaussian => Kernel::Sigma(a.sigma),
            KernelArg::Unit => Kernel::Unit,
        },
        ann_h: a.ann_h,
        ann_width: a.ann_width,
        cov_density: a.density,
        smooth: SmoothnessConfig {
            alpha: a.alpha,
            beta: a.beta,
            max_iter: a.max_iter,
            tol: a.tol,
            ..SmoothnessConfig::default()
        },
        glasso: GlassoConfig {
            rho: a.rho,
            ..GlassoConfig::default()
        },
    };
    let edges = learn(a.method, &params, &x, a.seed)?;
    io::write_graph(&build_graph(x.n(), &edges)?, &a.out)?;
    Ok(())
}

fn read_config(path: Option<&PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            PipelineConfig::from_json(&text).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(PipelineConfig::default()),
    }
}

fn grow(a: &GrowArgs) -> Result<()> {
    let mut cfg = read_config(a.config.as_ref())?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let x = io::read_features(&a.features).with_context(|| format!("reading {}", a.features.display()))?;
    let g0 = a.initial.as_ref().map(|p| io::read_graph(p, None)).transpose()?;
    let model = match &a.resume {
        Some(p) => {
            let m = io::read_model_file(p).with_context(|| format!("reading {}", p.display()))?;
            if m.method != cfg.clust_method {
                log::warn!("resumed model was trained with {:?}, config asks for {:?}", m.method, cfg.clust_method);
            }
            Some(m)
        }
        None => None,
    };
    let (g, report, model) = run_with_model(&x, g0, model, &cfg)?;
    io::write_graph(&g, &a.out)?;
    if let Some(p) = &a.report {
        write_text(p, &report.to_csv())?;
    }
    if let Some(p) = &a.model_out {
        match &model {
            Some(m) => io::write_model_file(m, p)?,
            None => bail!("vanilla runs train no community model"),
        }
    }
    log::info!("{} nodes, {} edges, {:.1} ms", g.n(), g.num_edges(), report.total_ms);
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    if let Some(EvalAction::Bound {
        r_bin,
        ratios,
        trials,
        seed,
    }) = &a.action
    {
        print!("{}", bound_table_csv(&bound_table(*r_bin, ratios, *trials, *seed)?));
        return Ok(());
    }
    let learned_path = a.learned.as_ref().expect("clap enforces --learned");
    let labels = a.labels.as_ref().map(io::read_labels_file).transpose()?;
    let n = a.n.or(labels.as_ref().map(Vec::len));
    let learned: Graph = io::read_graph(learned_path, n)?;
    let n = learned.n();
    let mut out = serde_json::Map::new();
    out.insert("nodes".into(), n.into());
    out.insert("edges".into(), learned.num_edges().into());
    if let Some(p) = &a.truth {
        let truth = io::read_graph(p, Some(n))?;
        out.insert("edge".into(), serde_json::to_value(edge_prf(&learned, &truth)?)?);
    }
    if let Some(labels) = &labels {
        if labels.len() != n {
            bail!("labels cover {} nodes, graph has {n}", labels.len());
        }
        let num = |r: graphflex::Result<f64>| r.map_or(serde_json::Value::Null, |v| v.into());
        out.insert("modularity".into(), num(modularity(&learned, labels)));
        out.insert("conductance".into(), num(conductance(&learned, labels)));
        if let Some(p) = &a.communities {
            let comm = io::read_labels_file(p)?;
            out.insert("nmi".into(), nmi(labels, &comm)?.into());
        }
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    if let Some(p) = &a.csv {
        let keys: Vec<String> = flatten(&out).into_iter().collect();
        let header: Vec<&str> = keys.iter().map(|k| k.split('=').next().unwrap()).collect();
        let values: Vec<&str> = keys.iter().map(|k| k.split_once('=').unwrap().1).collect();
        write_text(p, &format!("{}\n{}\n", header.join(","), values.join(",")))?;
    }
    Ok(())
}

// "key=value" pairs with nested objects joined by '_'.
fn flatten(m: &serde_json::Map<String, serde_json::Value>) -> Vec<String> {
    let mut out = Vec::new();
    for (k, v) in m {
        match v {
            serde_json::Value::Object(inner) => out.extend(flatten(inner).into_iter().map(|s| format!("{k}_{s}"))),
            serde_json::Value::Null => out.push(format!("{k}=")),
            other => out.push(format!("{k}={other}")),
        }
    }
    out
}

fn bench(a: &BenchArgs) -> Result<()> {
    let cfg = read_config(a.config.as_ref())?;
    let fm = FeatureModel::new(a.d, a.sep);
    let (centers, seed) = (a.centers, a.seed);
    let gen = |n| gen_blobs::<f64>(n, centers, &fm, seed).map(|d| d.features);
    let flex = scaling_run(&format!("graphflex-{}", cfg.learner_final), gen, &a.grid, &BenchTarget::Pipeline(cfg.clone()), a.repeats)?;
    let vanilla = BenchTarget::Vanilla {
        learner: cfg.learner_final,
        params: cfg.learner_params(),
        seed: cfg.seed,
    };
    let base = scaling_run(&format!("vanilla-{}", cfg.learner_final), gen, &a.grid, &vanilla, a.repeats)?;
    let csv = to_csv(&[flex, base]);
    match &a.out {
        Some(p) => write_text(p, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Learn(a) => learn_cmd(a),
        Command::Grow(a) => grow(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn grow_parses() {
        let cli = Cli::try_parse_from(["graphflex", "grow", "--features", "x.fmtx", "--config", "c.json", "--out", "g.edges"]).unwrap();
        assert!(matches!(cli.command, Command::Grow(_)));
        let err = Cli::try_parse_from(["graphflex", "grow", "--out", "g.edges"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(Cli::try_parse_from(["graphflex", "grow", "--features", "x", "--out", "g", "--bogus"]).is_err());
    }

    #[test]
    fn eval_bound_needs_no_files() {
        let cli = Cli::try_parse_from(["graphflex", "eval", "bound", "--ratios", "0.5,1"]).unwrap();
        let Command::Eval(a) = cli.command else { panic!() };
        assert!(matches!(a.action, Some(EvalAction::Bound { ref ratios, .. }) if ratios == &[0.5, 1.0]));
        assert!(Cli::try_parse_from(["graphflex", "eval"]).is_err());
    }
}
