mod model_dir;
mod serve;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use htmot_core::corpus::Stopwords;
use htmot_core::evaluation::{
    generate_intrusion_survey, render_answer_key, render_survey, topic_correlations, topic_stats, CooccurrenceIndex,
    IntruderRule,
};
use htmot_core::export::{document_tree, save_labels};
use htmot_core::scaling::{render_table, run_scaling};
use htmot_core::{load_corpus, mod_beta_pdf, BetaParams, ExportOptions, FilterConfig, HyperParams, SyntheticSpec, Trainer};
use log::info;
use serde::Serialize;

use model_dir::{ensure_dir, ModelDir, CHECKPOINT, LABELS, TOPICS};

#[derive(Parser)]
#[command(name = "htmot", version, about = "Hierarchical topic modelling over time")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a line-delimited corpus.
    Train(TrainArgs),
    /// Topic statistics, correlations and a word-intrusion survey.
    Eval(EvalArgs),
    /// Write the topic tree document, with saved labels applied.
    Export(ExportArgs),
    /// Set or remove topic labels.
    Label(LabelArgs),
    /// Serve a model directory and the label endpoints over HTTP.
    Serve(ServeArgs),
    /// Generate a synthetic corpus from a spec file.
    Synth(SynthArgs),
    /// Throughput and convergence on synthetic corpora of several sizes.
    Bench(BenchArgs),
    /// Rebuild a model and check every tree count identity.
    Audit(ModelArgs),
    /// Topics of one document above a share threshold.
    Doc(DocArgs),
    /// Sampled time densities for cross-checking other implementations.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model directory written by `train`.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct FilterArgs {
    /// Drop documents whose text is shorter than this many characters.
    #[arg(long)]
    min_chars: Option<usize>,
    /// Drop documents of this category; repeatable. Replaces the default list.
    #[arg(long)]
    exclude_category: Vec<String>,
    /// One stopword per line; replaces the built-in English list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Keep words that are frequent in only one document.
    #[arg(long)]
    keep_infrequent: bool,
    /// Disable every filter.
    #[arg(long)]
    no_filters: bool,
}

impl FilterArgs {
    fn config(&self) -> Result<FilterConfig> {
        let mut config = if self.no_filters {
            FilterConfig::permissive()
        } else {
            FilterConfig::default()
        };
        if let Some(n) = self.min_chars {
            config.min_chars = n;
        }
        if !self.exclude_category.is_empty() {
            config.exclude_categories = self.exclude_category.clone();
        }
        if let Some(path) = &self.stopwords {
            config.stopwords = Stopwords::from_file(path)?;
        }
        if self.keep_infrequent {
            config.drop_infrequent = false;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// TOML file of hyper-parameters; missing keys take the defaults.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Save a checkpoint every N batches.
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
    #[command(flatten)]
    filters: FilterArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 5)]
    coherence_topn: usize,
    /// Questionnaire text; the answer key goes next to it with a `.key.tsv` suffix.
    #[arg(long)]
    survey_out: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    survey_topics: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    /// Output file; defaults to `topics.json` in the model directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    top_words: usize,
    #[arg(long, default_value_t = 20)]
    top_entities: usize,
    #[arg(long, default_value_t = 5)]
    top_documents: usize,
    #[arg(long, default_value_t = 50)]
    time_bins: usize,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    model: PathBuf,
    /// `<id>=<title>`; repeatable.
    #[arg(long, value_parser = parse_label)]
    set: Vec<(String, String)>,
    /// Node id whose label is removed; repeatable.
    #[arg(long)]
    remove: Vec<String>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the generating topic of every token as JSON.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,5000,20000")]
    sizes: Vec<usize>,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Full passes over each corpus.
    #[arg(long, default_value_t = 10)]
    passes: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DocArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    id: String,
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

fn parse_label(raw: &str) -> Result<(String, String), String> {
    match raw.split_once('=') {
        Some((id, title)) if !id.is_empty() => Ok((id.to_string(), title.to_string())),
        _ => Err(format!("expected <id>=<title>, got {raw:?}")),
    }
}

fn load_params(path: Option<&Path>) -> Result<HyperParams> {
    Ok(match path {
        Some(p) => HyperParams::from_file(p)?,
        None => HyperParams::default(),
    })
}

fn train(args: TrainArgs) -> Result<()> {
    ensure_dir(&args.out)?;
    let dir = ModelDir::new(&args.out);
    let resume = args.resume && dir.path(CHECKPOINT).exists();
    let corpus = if resume {
        dir.load_corpus()?
    } else {
        let corpus = load_corpus(&args.corpus, &args.filters.config()?)?;
        dir.save_corpus(&corpus)?;
        corpus
    };
    info!(
        "{} documents, {} tokens, {} vocabulary entries",
        corpus.num_docs(),
        corpus.n,
        corpus.vocab_len()
    );
    let mut trainer = if resume {
        Trainer::resume(&corpus, dir.load_checkpoint()?)?
    } else {
        Trainer::new(&corpus, load_params(args.params.as_deref())?, args.seed)?
    };
    let start = Instant::now();
    while !trainer.finished() {
        trainer.step()?;
        let state = trainer.state();
        if let Some(s) = state.history.last() {
            info!(
                "batch {} pass {}: {} depth-1 topics, live per depth {:?}",
                s.iteration,
                s.passes,
                s.depth1_sizes.len(),
                s.live_per_depth
            );
        }
        if args.checkpoint_every.is_some_and(|n| n > 0 && state.iteration % n == 0) {
            trainer.checkpoint().save(&dir.path(CHECKPOINT))?;
        }
    }
    trainer.checkpoint().save(&dir.path(CHECKPOINT))?;
    let model = trainer.into_model();
    let (export, _) = dir.write_export(&model, &corpus, &ExportOptions::default())?;
    println!(
        "trained {} batches in {:.1}s: {} topics, max depth {}; model in {}",
        model.state.iteration,
        start.elapsed().as_secs_f64(),
        export.nodes().len(),
        model.forest.max_depth(),
        args.out.display()
    );
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let dir = ModelDir::new(&args.model);
    let corpus = dir.load_corpus()?;
    let model = dir.load_model(&corpus)?;
    let index = CooccurrenceIndex::new(&corpus);
    let stats = topic_stats(&model.forest, &corpus, &index, args.coherence_topn);
    println!("topic\tdepth\tsize\tcoherence\ttime_variance");
    for s in &stats {
        println!("{}\t{}\t{}\t{:.4}\t{:.6}", s.path, s.depth, s.size, s.coherence, s.time_variance);
    }
    let fmt = |r: Option<f64>| r.map_or("undefined".to_string(), |v| format!("{v:.4}"));
    match topic_correlations(&stats) {
        Ok(c) => {
            println!("correlation size/coherence\t{}", fmt(c.size_coherence));
            println!("correlation coherence/time_variance\t{}", fmt(c.coherence_time_variance));
            println!("correlation size/time_variance\t{}", fmt(c.size_time_variance));
        }
        Err(e) => println!("correlations: {e}"),
    }
    let kl = htmot_core::evaluation::sibling_kl_by_depth(&model.forest, model.params.phi, corpus.vocab_len());
    for (depth, v) in &kl {
        println!("sibling KL depth {depth}\t{v:.4}");
    }
    if let Some(out) = &args.survey_out {
        let survey =
            generate_intrusion_survey(&model.forest, &corpus, args.survey_topics, IntruderRule::default(), args.seed);
        fs::write(out, render_survey(&survey)).with_context(|| format!("writing {}", out.display()))?;
        let key = out.with_extension("key.tsv");
        fs::write(&key, render_answer_key(&survey)).with_context(|| format!("writing {}", key.display()))?;
        println!("{} survey questions in {}, answers in {}", survey.items.len(), out.display(), key.display());
    }
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let dir = ModelDir::new(&args.model);
    let corpus = dir.load_corpus()?;
    let model = dir.load_model(&corpus)?;
    let options = ExportOptions {
        top_words: args.top_words,
        top_entities: args.top_entities,
        top_documents: args.top_documents,
        time_bins: args.time_bins.max(1),
    };
    let (export, rejected) = dir.write_export(&model, &corpus, &options)?;
    for r in &rejected {
        eprintln!("label {:?} not applied: {}", r.id, r.reason);
    }
    if let Some(out) = &args.out {
        export.save(out)?;
    }
    let out = args.out.unwrap_or_else(|| dir.path(TOPICS));
    println!("{} topics written to {}", export.nodes().len(), out.display());
    Ok(())
}

fn label(args: LabelArgs) -> Result<()> {
    let dir = ModelDir::new(&args.model);
    let export = htmot_core::TopicTreeExport::load(&dir.path(TOPICS))
        .context("the model has no export yet; run `htmot export` first")?;
    let known: std::collections::HashSet<&str> = export.nodes().iter().map(|n| n.id.as_str()).collect();
    let mut labels = dir.labels()?;
    for id in &args.remove {
        labels.remove(id);
    }
    for (id, title) in &args.set {
        if !known.contains(id.as_str()) {
            bail!("no topic with id {id:?} in the export");
        }
        labels.insert(id.clone(), title.clone());
    }
    save_labels(&dir.path(LABELS), &labels)?;
    println!("{} labels saved", labels.len());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec::from_file(&args.spec)?;
    let synth = htmot_core::generate(&spec)?;
    synth.write_jsonl(&args.out)?;
    if let Some(path) = &args.truth {
        #[derive(Serialize)]
        struct Truth<'a> {
            doc_leaf: Vec<String>,
            tokens: &'a [Vec<htmot_core::NodePath>],
        }
        let truth = Truth {
            doc_leaf: synth.doc_leaf.iter().map(|p| p.id()).collect(),
            tokens: &synth.truth,
        };
        fs::write(path, serde_json::to_vec(&truth)?).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "{} documents, {} tokens written to {}",
        synth.corpus.num_docs(),
        synth.corpus.n,
        args.out.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let params = load_params(args.params.as_deref())?;
    ensure_dir(&args.out)?;
    let reports = run_scaling(&args.sizes, &params, args.passes, args.seed)?;
    let table = render_table(&reports);
    fs::write(args.out.join("table.tsv"), &table)?;
    fs::write(args.out.join("report.json"), serde_json::to_vec_pretty(&reports)?)?;
    for r in &reports {
        let mut series = String::from("iteration\tdepth1_topics\n");
        for (i, n) in r.depth1_series.iter().enumerate() {
            series.push_str(&format!("{}\t{n}\n", i + 1));
        }
        fs::write(args.out.join(format!("depth1_{}.tsv", r.corpus_docs)), series)?;
    }
    print!("{table}");
    Ok(())
}

fn audit(args: ModelArgs) -> Result<()> {
    let dir = ModelDir::new(&args.model);
    let corpus = dir.load_corpus()?;
    let model = dir.load_model(&corpus)?;
    model.forest.audit()?;
    println!(
        "audit passed: {} live nodes, max depth {}",
        model.forest.live_nodes(),
        model.forest.max_depth()
    );
    Ok(())
}

fn doc(args: DocArgs) -> Result<()> {
    let dir = ModelDir::new(&args.model);
    let corpus = dir.load_corpus()?;
    let model = dir.load_model(&corpus)?;
    let tree = document_tree(&model.forest, &corpus, &args.id, args.threshold)?;
    println!("{}", serde_json::to_string_pretty(&tree)?);
    Ok(())
}

#[derive(Serialize)]
struct FixtureCase {
    rho1: f64,
    rho2: f64,
    delta: f64,
    t: Vec<f64>,
    value: Vec<f64>,
}

fn fixture(args: FixtureArgs) -> Result<()> {
    if args.points < 2 {
        bail!("need at least 2 sample points");
    }
    let cases = [
        (2.0, 2.0, 0.2),
        (3.0, 7.0, 1.0),
        (0.5, 0.5, 0.5),
        (12.0, 1.5, 0.3),
        (1.0, 1.0, 1.0),
        (4.0, 9.0, 2.0),
    ];
    let t: Vec<f64> = (0..args.points).map(|i| i as f64 / (args.points - 1) as f64).collect();
    let out = cases
        .iter()
        .map(|&(rho1, rho2, delta)| {
            let value = t
                .iter()
                .map(|&x| mod_beta_pdf(BetaParams { rho1, rho2 }, delta, x))
                .collect::<htmot_core::Result<Vec<f64>>>()?;
            Ok(FixtureCase {
                rho1,
                rho2,
                delta,
                t: t.clone(),
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fs::write(&args.out, serde_json::to_vec_pretty(&out)?).with_context(|| format!("writing {}", args.out.display()))?;
    println!("{} cases of {} points written to {}", out.len(), args.points, args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Export(a) => export(a),
        Command::Label(a) => label(a),
        Command::Serve(a) => serve::serve(&a.dir, a.port),
        Command::Synth(a) => synth(a),
        Command::Bench(a) => bench(a),
        Command::Audit(a) => audit(a),
        Command::Doc(a) => doc(a),
        Command::Fixture(a) => fixture(a),
    }
}
