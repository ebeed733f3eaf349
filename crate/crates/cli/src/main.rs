use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use taxmerge::classifier::{self, load_model, save_model, TrainConfig};
use taxmerge::dataset::{self, load_ets, load_jsonl, save_jsonl};
use taxmerge::encoding::{decode, LabelVector};
use taxmerge::evaluation;
use taxmerge::pipeline::{self, CycleArtifacts, CycleConfig, CycleSummary, Diagnostics, SyntheticSpec};
use taxmerge::taxonomy::{diff, parse_directives, NodePath, Taxonomy};
use taxmerge::{Error, LabelMapping, Rng};

#[derive(Parser)]
#[command(name = "taxmerge", version, about = "Merge hate-speech taxonomies, re-annotate datasets, train and diagnose")]
struct Cli {
    /// Seed for every random choice; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Decision threshold on closed scores.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Pipeline config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect and edit taxonomy files.
    #[command(subcommand)]
    Taxonomy(TaxonomyCmd),
    /// Translate source-schema labels into taxonomy paths.
    #[command(subcommand)]
    Map(MapCmd),
    /// Prepare datasets.
    #[command(subcommand)]
    Data(DataCmd),
    /// Train a model, from scratch or from `--init`.
    Train(TrainArgs),
    /// Score every record of a dataset.
    Predict(PredictArgs),
    /// Metrics and diagnostic tables.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Run pipeline stages.
    #[command(subcommand)]
    Cycle(CycleCmd),
}

#[derive(Subcommand)]
enum TaxonomyCmd {
    Validate { file: PathBuf },
    Census { file: PathBuf },
    Apply {
        file: PathBuf,
        directives: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    Diff { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand)]
enum MapCmd {
    Apply {
        #[arg(long)]
        taxonomy: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum DataCmd {
    Clean {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    Inject {
        input: PathBuf,
        #[arg(long)]
        pool: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        fraction: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    Split {
        input: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        fraction: f64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        holdout_out: PathBuf,
    },
    /// Write a synthetic corpus with a ready-to-run config.
    Generate {
        #[arg(long, default_value_t = 1000)]
        n1: usize,
        #[arg(long, default_value_t = 500)]
        n2: usize,
        #[arg(long, default_value_t = 1000)]
        n_pool: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long)]
    model: PathBuf,
    input: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct GoldPred {
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
}

#[derive(Subcommand)]
enum EvalCmd {
    Classwise {
        #[command(flatten)]
        io: GoldPred,
        /// Print the tab-separated table instead of JSON.
        #[arg(long)]
        tsv: bool,
    },
    Binary {
        #[arg(long)]
        taxonomy: PathBuf,
        #[arg(long)]
        ets: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    Mislabel {
        #[command(flatten)]
        io: GoldPred,
        #[arg(long)]
        node: String,
    },
    Outliers {
        #[command(flatten)]
        io: GoldPred,
        #[arg(long, default_value_t = 0.3)]
        margin: f64,
    },
}

#[derive(Subcommand)]
enum CycleCmd {
    Run1 {
        #[arg(short, long)]
        out: PathBuf,
    },
    Diagnose {
        #[arg(long)]
        artifacts: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    Run1a {
        /// Defaults to the config's directives file.
        #[arg(long)]
        directives: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    Run2 {
        #[arg(long)]
        from: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    Compare {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

type Res<T = ()> = anyhow::Result<T>;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn load_taxonomy(path: &Path) -> Result<Taxonomy, Error> {
    Taxonomy::parse(&read(path)?)
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}

struct Globals {
    seed: Option<u64>,
    threshold: f64,
    threshold_set: bool,
    config: Option<PathBuf>,
}

impl Globals {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn cycle_config(&self) -> Result<CycleConfig, Error> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| Error::Config("cycle commands need --config".into()))?;
        let mut cfg = CycleConfig::load(path)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.threshold_set {
            cfg.threshold = self.threshold;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_threshold(t: f64) -> Result<f64, Error> {
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(Error::Config(format!("threshold {t} must lie in (0, 1)")))
    }
}

/// One line of a predictions file: `{"id": .., "scores": {path: score}}`.
#[derive(serde::Serialize, serde::Deserialize)]
struct PredictionLine {
    id: String,
    scores: BTreeMap<String, f64>,
    #[serde(default)]
    labels: Vec<String>,
}

fn load_predictions(path: &Path, t: &Taxonomy) -> Result<(Vec<String>, Vec<LabelVector>), Error> {
    let mut ids = Vec::new();
    let mut vecs = Vec::new();
    for (i, line) in read(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { path: path.to_path_buf(), line: i + 1, msg };
        let p: PredictionLine = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let mut v = vec![0.0; t.len()];
        for (k, s) in &p.scores {
            v[t.index_of_str(k)?] = *s;
        }
        ids.push(p.id);
        vecs.push(LabelVector::from_scores(v).map_err(|e| bad(e.to_string()))?);
    }
    Ok((ids, vecs))
}

fn check_ids<'a>(expected: impl Iterator<Item = &'a str>, found: &[String], path: &Path) -> Result<(), Error> {
    let expected: Vec<&str> = expected.collect();
    if expected.len() != found.len() {
        return Err(Error::LengthMismatch { expected: expected.len(), found: found.len() });
    }
    if let Some(i) = expected.iter().zip(found).position(|(a, b)| *a != b) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("prediction id {:?} does not match record id {:?}", found[i], expected[i]),
        });
    }
    Ok(())
}

fn gold_and_pred(io: &GoldPred) -> Result<(Taxonomy, Vec<LabelVector>, Vec<LabelVector>), Error> {
    let t = load_taxonomy(&io.taxonomy)?;
    let gold = load_jsonl(&io.gold, Some(&t))?;
    let (ids, pred) = load_predictions(&io.pred, &t)?;
    check_ids(gold.records.iter().map(|r| r.id.as_str()), &ids, &io.pred)?;
    let gold = gold.gold_vectors(&t)?;
    Ok((t, gold, pred))
}

fn taxonomy_cmd(cmd: TaxonomyCmd) -> Res {
    match cmd {
        TaxonomyCmd::Validate { file } => {
            let t = load_taxonomy(&file)?;
            println!("ok: {} nodes, fingerprint {}", t.len(), t.fingerprint());
        }
        TaxonomyCmd::Census { file } => print_json(&load_taxonomy(&file)?.census()),
        TaxonomyCmd::Apply { file, directives, out } => {
            let t = load_taxonomy(&file)?;
            let ds = parse_directives(&read(&directives)?)?;
            let doc = t.apply_directives(&ds)?.serialize();
            match out {
                Some(p) => write(&p, doc)?,
                None => print!("{doc}"),
            }
        }
        TaxonomyCmd::Diff { a, b } => print!("{}", diff(&load_taxonomy(&a)?, &load_taxonomy(&b)?)),
    }
    Ok(())
}

fn map_cmd(cmd: MapCmd) -> Res {
    let MapCmd::Apply { taxonomy, mapping, input, out } = cmd;
    let t = load_taxonomy(&taxonomy)?;
    let m = LabelMapping::parse(&read(&mapping)?)?;
    let (d, report) = m.apply(&t, &load_jsonl(&input, None)?)?;
    save_jsonl(&d, &out)?;
    print_json(&report);
    Ok(())
}

fn data_cmd(cmd: DataCmd, g: &Globals) -> Res {
    match cmd {
        DataCmd::Clean { input, out } => {
            let d = load_jsonl(&input, None)?;
            let c = dataset::clean(&d);
            save_jsonl(&c, &out)?;
            print_json(&json!({"input": d.len(), "kept": c.len()}));
        }
        DataCmd::Inject { input, pool, fraction, out } => {
            let d = load_jsonl(&input, None)?;
            let p = load_jsonl(&pool, None)?;
            let r = dataset::inject_nonhate(&d, &p, fraction, &mut Rng::derive(g.seed(), "inject"))?;
            save_jsonl(&r, &out)?;
            print_json(&json!({"input": d.len(), "added": r.len() - d.len(), "total": r.len()}));
        }
        DataCmd::Split { input, fraction, train_out, holdout_out } => {
            let d = load_jsonl(&input, None)?;
            let (tr, ho) = dataset::split_holdout(&d, fraction, &mut Rng::derive(g.seed(), "split"))?;
            save_jsonl(&tr, &train_out)?;
            save_jsonl(&ho, &holdout_out)?;
            print_json(&json!({"train": tr.len(), "holdout": ho.len()}));
        }
        DataCmd::Generate { n1, n2, n_pool, out } => {
            let c = pipeline::generate_synthetic(SyntheticSpec { n1, n2, n_pool, seed: g.seed() })?;
            c.write(&out)?;
            print_json(&json!({
                "dataset1": c.dataset1.len(),
                "dataset2": c.dataset2.len(),
                "pool": c.pool.len(),
                "ets": c.ets.len(),
                "config": out.join("config.json"),
            }));
        }
    }
    Ok(())
}

fn train_cmd(a: TrainArgs, g: &Globals) -> Res {
    let t = load_taxonomy(&a.taxonomy)?;
    let d = load_jsonl(&a.data, Some(&t))?;
    let init = a.init.as_deref().map(load_model).transpose()?;
    let base = if init.is_some() { TrainConfig::fine_tune() } else { TrainConfig::default() };
    let cfg = TrainConfig {
        epochs: a.epochs.unwrap_or(base.epochs),
        batch_size: a.batch_size.unwrap_or(base.batch_size),
        learning_rate: a.lr.unwrap_or(base.learning_rate),
        l2: a.l2.unwrap_or(base.l2),
        seed: g.seed(),
        threshold: g.threshold,
        ..base
    };
    let m = classifier::train(&t, &d, &cfg, init.as_ref())?;
    save_model(&m, &a.out)?;
    let examples = classifier::Example::from_dataset(&t, &d)?;
    print_json(&json!({
        "records": d.len(),
        "train_loss": classifier::mean_loss(&m, &examples, cfg.l2),
        "fingerprint": m.fingerprint().to_hex(),
    }));
    Ok(())
}

fn predict_cmd(a: PredictArgs, g: &Globals) -> Res {
    let t = load_taxonomy(&a.taxonomy)?;
    let m = load_model(&a.model)?;
    m.check_taxonomy(&t)?;
    let d = load_jsonl(&a.input, None)?;
    let paths: Vec<String> = t.paths().iter().map(NodePath::to_string).collect();
    let mut out = String::new();
    for r in &d.records {
        let v = m.predict(&t, &r.text)?;
        let labels = decode(&t, &v, g.threshold)?.iter().map(NodePath::to_string).collect();
        let line = PredictionLine {
            id: r.id.clone(),
            scores: paths.iter().cloned().zip(v.scores().iter().copied()).collect(),
            labels,
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    write(&a.out, out)?;
    Ok(())
}

fn eval_cmd(cmd: EvalCmd, g: &Globals) -> Res {
    let th = g.threshold;
    match cmd {
        EvalCmd::Classwise { io, tsv } => {
            let (t, gold, pred) = gold_and_pred(&io)?;
            let r = evaluation::classwise(&t, &gold, &pred, th)?;
            if tsv {
                print!("{}", r.to_tsv());
            } else {
                let acc = evaluation::subset_accuracy(&t, &gold, &pred, th)?;
                print_json(&json!({"report": r, "subset_accuracy": acc}));
            }
        }
        EvalCmd::Binary { taxonomy, ets, pred } => {
            let t = load_taxonomy(&taxonomy)?;
            let e = load_ets(&ets)?;
            let (ids, p) = load_predictions(&pred, &t)?;
            check_ids(e.iter().map(|r| r.id.as_str()), &ids, &pred)?;
            let flags: Vec<bool> = e.iter().map(|r| r.hate).collect();
            print_json(&evaluation::binary_hate_eval(&t, &flags, &p, th)?);
        }
        EvalCmd::Mislabel { io, node } => {
            let (t, gold, pred) = gold_and_pred(&io)?;
            let node: NodePath = node.parse()?;
            print_json(&evaluation::mislabel_distribution(&t, &gold, &pred, th, &node)?);
        }
        EvalCmd::Outliers { io, margin } => {
            if !(margin > 0.0 && margin < 1.0) {
                return Err(Error::Config(format!("margin {margin} must lie in (0, 1)")).into());
            }
            let (t, gold, pred) = gold_and_pred(&io)?;
            let r = evaluation::classwise(&t, &gold, &pred, th)?;
            let flagged: Vec<String> = evaluation::outlier_classes(&r, margin).iter().map(|p| p.to_string()).collect();
            print_json(&flagged);
        }
    }
    Ok(())
}

fn print_cycle(a: &CycleArtifacts) {
    print_json(&a.summary_record());
}

fn cycle_cmd(cmd: CycleCmd, g: &Globals) -> Res {
    if let CycleCmd::Compare { dirs, out } = &cmd {
        let summaries = dirs.iter().map(|d| CycleSummary::load(d)).collect::<Result<Vec<_>, _>>()?;
        let report = pipeline::compare(&summaries)?;
        print!("{}", report.to_tsv());
        if let Some(p) = out {
            write(p, serde_json::to_string_pretty(&report)? + "\n")?;
        }
        return Ok(());
    }
    let cfg = g.cycle_config()?;
    match cmd {
        CycleCmd::Run1 { out } => {
            let a = pipeline::run_cycle1(&cfg)?;
            a.save(&out)?;
            print_cycle(&a);
        }
        CycleCmd::Diagnose { artifacts, out } => {
            let a = CycleArtifacts::load(&artifacts)?;
            if a.stamp.config_hash != cfg.hash() {
                return Err(Error::StampMismatch(a.stamp.config_hash, cfg.hash()).into());
            }
            let d: Diagnostics = pipeline::diagnose_cross(&cfg, &a)?;
            d.save(&out)?;
            print_json(&json!({
                "outliers": d.outliers,
                "missing_families": d.missing_families,
                "mislabels": d.mislabels.iter().map(|m| json!({
                    "gold_node": m.gold_node,
                    "top": m.confusions().into_iter().take(5).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            }));
        }
        CycleCmd::Run1a { directives, out } => {
            let ds = match directives {
                Some(p) => parse_directives(&read(&p)?)?,
                None => cfg.load_directives()?,
            };
            let a = pipeline::run_cycle1a(&cfg, &ds)?;
            a.save(&out)?;
            print_cycle(&a);
        }
        CycleCmd::Run2 { from, out } => {
            let prev = CycleArtifacts::load(&from)?;
            let a = pipeline::run_cycle2(&cfg, &prev)?;
            a.save(&out)?;
            print_cycle(&a);
        }
        CycleCmd::Compare { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn run(cli: Cli) -> Res {
    let g = Globals {
        seed: cli.seed,
        threshold: check_threshold(cli.threshold.unwrap_or(0.5))?,
        threshold_set: cli.threshold.is_some(),
        config: cli.config,
    };
    match cli.command {
        Command::Taxonomy(c) => taxonomy_cmd(c),
        Command::Map(c) => map_cmd(c),
        Command::Data(c) => data_cmd(c, &g),
        Command::Train(a) => train_cmd(a, &g),
        Command::Predict(a) => predict_cmd(a, &g),
        Command::Eval(c) => eval_cmd(c, &g),
        Command::Cycle(c) => cycle_cmd(c, &g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(4, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
