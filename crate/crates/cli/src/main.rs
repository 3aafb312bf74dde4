//! `gdl`: training, WL comparison, PAC-Bayes bounds and the experiment
//! harness on the command line.
//!
//! Exit codes: 0 success, 1 usage or malformed input, 2 numeric failure
//! (divergence, infinite KL), 3 I/O error.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gdl_core::analysis::{
    catoni_bound, symmetrization_gap, DiscreteDistribution, SymmetrizationMap,
};
use gdl_core::checkpoint::{Checkpoint, Restored};
use gdl_core::config::Config;
use gdl_core::data::{read_set_dataset, read_vector_dataset};
use gdl_core::deepsets::DeepSet;
use gdl_core::experiments;
use gdl_core::gnn::Gnn;
use gdl_core::graph::LabeledGraph;
use gdl_core::nn::{Activation, Mlp};
use gdl_core::training::{mean_loss, train, write_loss_trace, LossKind, TrainConfig};
use gdl_core::wl::{brute_force_isomorphic, refinement_history, wl_equivalent, wl_signature};
use gdl_core::Error;

#[derive(Parser)]
#[command(name = "gdl", version, about = "Geometric deep learning toolkit")]
struct Cli {
    /// Seed for initialization and experiments.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Flat `key = value` config file (keys namespaced by experiment).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an MLP on a vector CSV dataset.
    TrainMlp(TrainMlpArgs),
    /// Train a Deep Set on a set CSV dataset.
    Deepset(DeepsetArgs),
    /// Evaluate a GNN on graph files.
    Gnn(GnnArgs),
    /// Weisfeiler-Lehman refinement.
    #[command(subcommand)]
    Wl(WlCommand),
    /// Run a desk-scale experiment.
    Exp {
        /// One of extrapolation, mod3, lipschitz-depth, l2, invariance.
        name: String,
    },
    /// PAC-Bayes quantities.
    #[command(subcommand)]
    Bound(BoundCommand),
}

#[derive(Args)]
struct Optim {
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    /// L2 penalty weight.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// `mse` or `ce` (softmax cross entropy).
    #[arg(long, default_value = "mse")]
    loss: LossKind,
    #[arg(long, default_value = "relu")]
    activation: Activation,
}

#[derive(Args)]
struct TrainMlpArgs {
    /// CSV with columns x0.. and y0.. or label.
    #[arg(long)]
    data: PathBuf,
    /// Hidden widths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "16,16")]
    hidden: Vec<usize>,
    /// Output width (defaults to the target width, or the class count for `ce`).
    #[arg(long)]
    out_dim: Option<usize>,
    #[command(flatten)]
    optim: Optim,
}

#[derive(Args)]
struct DeepsetArgs {
    /// CSV with columns set, x0.. and y0.. or label.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 8)]
    latent: usize,
    #[arg(long, value_delimiter = ',', default_value = "16")]
    hidden: Vec<usize>,
    #[arg(long)]
    out_dim: Option<usize>,
    #[command(flatten)]
    optim: Optim,
}

#[derive(Args)]
struct GnnArgs {
    /// Graph files to evaluate.
    #[arg(required = true)]
    graphs: Vec<PathBuf>,
    /// GNN checkpoint; a randomly initialized network is used otherwise.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    color_dim: usize,
    #[arg(long, default_value_t = 4)]
    vote_dim: usize,
    #[arg(long, default_value_t = 1)]
    out_dim: usize,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    hidden: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    #[arg(long, default_value = "tanh")]
    activation: Activation,
    /// Also write the network to `<out>/checkpoint.json`.
    #[arg(long)]
    save: bool,
}

#[derive(Subcommand)]
enum WlCommand {
    /// Print the refinement history of one graph.
    Sig { graph: PathBuf },
    /// Compare two graphs by WL signature and by the exact oracle.
    Cmp { a: PathBuf, b: PathBuf },
    /// Exact isomorphism test.
    Oracle { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Catoni's PAC-Bayes bound.
    Catoni {
        #[arg(long)]
        risk: f64,
        #[arg(long)]
        kl: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        delta: f64,
    },
    /// KL(Q||P) - KL(Q°||P°) for a class map over a finite family.
    Gap {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        /// Class label of every family member, e.g. `0,0,1`.
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<usize>,
    },
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| with_path(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| with_path(path, e))
}

fn read_graph(path: &Path) -> Result<LabeledGraph, Error> {
    LabeledGraph::parse(&read_text(path)?)
}

fn load_config(path: Option<&Path>) -> Result<Config, Error> {
    match path {
        Some(p) => Config::parse(&read_text(p)?),
        None => Ok(Config::default()),
    }
}

fn train_config(o: &Optim, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: o.lr,
        l2_lambda: o.lambda,
        epochs: o.epochs,
        seed,
        loss: o.loss,
    }
}

fn write_outputs(out: &Path, ckpt: &Checkpoint, trace: &[f64]) -> Result<(), Error> {
    fs::create_dir_all(out)?;
    ckpt.write(File::create(out.join("checkpoint.json"))?)?;
    write_loss_trace(File::create(out.join("loss.csv"))?, trace)?;
    println!("wrote {}", out.join("checkpoint.json").display());
    println!("wrote {}", out.join("loss.csv").display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let seed = cli.seed;
    match cli.command {
        Command::TrainMlp(a) => {
            let data = read_vector_dataset(open(&a.data)?)?;
            let out_dim = a.out_dim.unwrap_or_else(|| data.output_width());
            let dims: Vec<usize> = std::iter::once(data.samples()[0].0.len())
                .chain(a.hidden.iter().copied())
                .chain(std::iter::once(out_dim))
                .collect();
            let model = Mlp::init(&dims, a.optim.activation, seed)?;
            let cfg = train_config(&a.optim, seed);
            let (trained, trace) = train(&model, &data, &cfg)?;
            println!("final loss: {}", mean_loss(&trained, &data, cfg.loss)?);
            println!("lipschitz upper bound: {}", trained.lipschitz_upper_bound());
            write_outputs(&cli.out, &Checkpoint::from_mlp(&trained, seed), &trace)
        }
        Command::Deepset(a) => {
            let data = read_set_dataset(open(&a.data)?)?;
            let out_dim = a.out_dim.unwrap_or_else(|| data.output_width());
            let elem_dim = data.samples()[0].0[0].len();
            let model = DeepSet::init(
                elem_dim,
                a.latent,
                &a.hidden,
                out_dim,
                a.optim.activation,
                seed,
            )?;
            let cfg = train_config(&a.optim, seed);
            let (trained, trace) = model.train(&data, &cfg)?;
            println!("final loss: {}", mean_loss(&trained, &data, cfg.loss)?);
            write_outputs(&cli.out, &Checkpoint::from_deepset(&trained, seed), &trace)
        }
        Command::Gnn(a) => {
            let gnn = match &a.checkpoint {
                Some(p) => match Checkpoint::parse(&read_text(p)?)?.restore()? {
                    Restored::Gnn(g) => g,
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "{} is not a gnn checkpoint",
                            p.display()
                        )))
                    }
                },
                None => Gnn::init(
                    a.color_dim,
                    a.vote_dim,
                    a.out_dim,
                    &a.hidden,
                    a.rounds,
                    a.activation,
                    seed,
                )?,
            };
            for path in &a.graphs {
                let out = gnn.eval(&read_graph(path)?)?;
                let shown: Vec<String> = out.iter().map(f64::to_string).collect();
                println!("{}: {}", path.display(), shown.join(","));
            }
            if a.save {
                fs::create_dir_all(&cli.out)?;
                let path = cli.out.join("checkpoint.json");
                Checkpoint::from_gnn(&gnn, seed).write(File::create(&path)?)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Wl(WlCommand::Sig { graph }) => {
            let g = read_graph(&graph)?;
            let sig = wl_signature(&g);
            println!("nodes: {}", g.n());
            println!("stable round: {}", sig.stable_round());
            for c in refinement_history(&g) {
                let colors: Vec<String> = c.colors.iter().map(usize::to_string).collect();
                println!("round {}: {}", c.round, colors.join(" "));
            }
            Ok(())
        }
        Command::Wl(WlCommand::Cmp { a, b }) => {
            let (ga, gb) = (read_graph(&a)?, read_graph(&b)?);
            println!("wl-equivalent: {}", wl_equivalent(&ga, &gb));
            println!("isomorphic (oracle): {}", brute_force_isomorphic(&ga, &gb)?);
            Ok(())
        }
        Command::Wl(WlCommand::Oracle { a, b }) => {
            let iso = brute_force_isomorphic(&read_graph(&a)?, &read_graph(&b)?)?;
            println!("isomorphic: {iso}");
            Ok(())
        }
        Command::Exp { name } => {
            let cfg = load_config(cli.config.as_deref())?;
            let report = experiments::run(&name, &cfg, seed)?;
            for path in report.write_to(&cli.out)? {
                println!("wrote {}", path.display());
            }
            for c in &report.checks {
                let verdict = if c.passed { "PASS" } else { "FAIL" };
                println!(
                    "{verdict} {}: {:?} {} {:?}",
                    c.name, c.value, c.relation, c.threshold
                );
            }
            Ok(())
        }
        Command::Bound(BoundCommand::Catoni {
            risk,
            kl,
            n,
            beta,
            delta,
        }) => {
            println!("{}", catoni_bound(risk, kl, n, beta, delta)?);
            Ok(())
        }
        Command::Bound(BoundCommand::Gap { q, p, classes }) => {
            let map = SymmetrizationMap::from_labels(&classes);
            let gap = symmetrization_gap(
                &DiscreteDistribution::new(q)?,
                &DiscreteDistribution::new(p)?,
                &map,
            )?;
            println!("{gap}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() {
                2
            } else if e.is_io() {
                3
            } else {
                1
            })
        }
    }
}
