use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use falm::clock::WallClock;
use falm::config::{ServiceConfig, ENV_CORPUS_DIR, ENV_REF_DATE};
use falm::eval::{
    gen_qa_cases, gen_templated_prompts, qa_engine, run_qa_eval, run_safety_eval, run_viz_case, run_viz_eval,
    EvalReport, TemplateFile, EVAL_NOTE,
};
use falm::fixtures::{read_jsonl, HarmfulPrompt, SeededCard};
use falm::service::{trend_request, TrendParams};
use falm::{fixtures, io, service};
use falm_core::engine::EngineConfig;
use falm_core::guardrails::Guardrails;
use falm_core::trends::{summarize_trend, topic_series_with};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "falm", version, about = "Grounded question answering over company ranking lists")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an offline evaluation suite and write a JSON report.
    Eval(EvalArgs),
    /// Answer one question.
    Query {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = ENV_REF_DATE)]
        ref_date: Option<NaiveDate>,
        #[arg(long, value_enum, default_value_t = Emit::Answer)]
        emit: Emit,
        question: String,
    },
    /// Count articles mentioning a topic over time.
    Trends {
        #[arg(long)]
        topic: String,
        #[arg(long, default_value = "year")]
        scale: String,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        /// Window length for multi_year.
        #[arg(long)]
        window: Option<u32>,
        #[arg(long, env = ENV_CORPUS_DIR)]
        corpus: PathBuf,
        #[arg(long, env = ENV_REF_DATE)]
        ref_date: Option<NaiveDate>,
    },
    /// Flag corpus documents containing personal data or harmful phrases.
    Scan {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
    },
    /// Build and save the corpus index.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate the seeded fixtures under a directory.
    GenFixtures {
        #[arg(long, default_value = "fixtures")]
        root: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Answer,
    ChartSpec,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Viz,
    Qa,
    Safety,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Dataset directory for viz and qa; the prompt-suite directory for safety.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 500)]
    cases: usize,
    /// Lexicon for the safety suite.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Re-run a single case by id and print its result.
    #[arg(long)]
    case: Option<String>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_templates(path: Option<&Path>) -> anyhow::Result<TemplateFile> {
    let path = path.context("--templates is required for this suite")?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    TemplateFile::parse(&text).with_context(|| path.display().to_string())
}

fn load_guardrails(path: &Path) -> anyhow::Result<Guardrails> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Guardrails::from_lexicon_text(&text).map_err(|e| anyhow::anyhow!("{}: line {}: {}", path.display(), e.line, e.message))
}

/// Returns whether every threshold was met.
fn run_eval(args: EvalArgs) -> anyhow::Result<bool> {
    let mut thresholds = BTreeMap::new();
    let (suite, passed, report) = match args.suite {
        Suite::Viz => {
            let ds = io::load_dataset_dir(&args.data)?;
            let templates = read_templates(args.templates.as_deref())?;
            let cases = gen_templated_prompts(&templates, &ds, args.seed, args.cases)?;
            let cfg = EngineConfig::default();
            if let Some(id) = &args.case {
                let case = cases.iter().find(|c| &c.id == id).with_context(|| format!("no case {id}"))?;
                let r = run_viz_case(case, &ds, &cfg.grammar, cfg.limits);
                println!("{}", serde_json::to_string_pretty(&r)?);
                return Ok(r.data_match);
            }
            let report = run_viz_eval(&cases, &ds, &cfg.grammar, cfg.limits);
            thresholds.insert("min_cases", 500.0);
            thresholds.insert("exec_rate", 1.0);
            thresholds.insert("data_match_rate", 1.0);
            let o = &report.overall;
            let passed = o.cases >= 500 && o.exec_rate >= 1.0 && o.data_match_rate >= 1.0;
            eprintln!(
                "viz: {} cases, exec rate {:.4}, data match {:.4}, p50 {} us",
                o.cases, o.exec_rate, o.data_match_rate, report.timing.p50_latency_us
            );
            ("viz", passed, serde_json::to_value(&report)?)
        }
        Suite::Qa => {
            let ds = io::load_dataset_dir(&args.data)?;
            let templates = read_templates(args.templates.as_deref())?;
            let cases = gen_qa_cases(&templates, &ds, args.seed, args.cases)?;
            let engine = qa_engine(ds);
            let cases: Vec<_> = match &args.case {
                Some(id) => cases.into_iter().filter(|c| &c.id == id).collect(),
                None => cases,
            };
            let report = run_qa_eval(&engine, &cases);
            for k in ["exact_match", "reject_with_latest", "top5", "top10", "redirect_closest"] {
                thresholds.insert(k, 1.0);
            }
            let passed = report.passed == report.cases && report.cases > 0;
            eprintln!("qa: {}/{} passed", report.passed, report.cases);
            ("qa", passed, serde_json::to_value(&report)?)
        }
        Suite::Safety => {
            let lexicon = args.lexicon.as_deref().context("--lexicon is required for the safety suite")?;
            let guardrails = load_guardrails(lexicon)?;
            let harmful: Vec<HarmfulPrompt> = read_jsonl(&args.data.join("harmful_prompts.jsonl"))?;
            let clean_path = args.data.join("clean_sentences.txt");
            let clean: Vec<String> = fs::read_to_string(&clean_path)
                .with_context(|| format!("reading {}", clean_path.display()))?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(str::to_string)
                .collect();
            let cards: Vec<SeededCard> = read_jsonl(&args.data.join("seeded_cards.jsonl"))?;
            let report = run_safety_eval(&guardrails, &harmful, &clean, &cards)?;
            thresholds.insert("harmful_reject_rate", 1.0);
            thresholds.insert("clean_rejected", 0.0);
            thresholds.insert("cards_found_rate", 1.0);
            let passed = report.harmful_reject_rate >= 1.0 && report.clean_rejected == 0 && report.cards_found == report.cards;
            eprintln!(
                "safety: harmful {}/{} rejected, clean {} flagged, cards {}/{} found",
                report.harmful_rejected, report.harmful, report.clean_rejected, report.cards_found, report.cards
            );
            ("safety", passed, serde_json::to_value(&report)?)
        }
    };
    let out = EvalReport { suite, note: EVAL_NOTE, seed: args.seed, passed, thresholds, report };
    write_json(&args.out, &out)?;
    Ok(passed)
}

fn scan(corpus: &Path, lexicon: &Path) -> anyhow::Result<()> {
    let guardrails = load_guardrails(lexicon)?;
    let docs = io::load_corpus_dir(corpus)?;
    let mut flagged = 0;
    for d in &docs {
        let text = format!("{}\n{}", d.title, d.body);
        let spans = guardrails.scan_pii(&text);
        let categories = guardrails.lexicon().classify(&text);
        if spans.is_empty() && categories.is_empty() {
            continue;
        }
        flagged += 1;
        let pii: Vec<_> = spans.iter().map(|s| json!({ "kind": s.kind, "hash": s.matched_text_hash })).collect();
        println!("{}", json!({ "doc_id": d.doc_id, "pii": pii, "categories": categories }));
    }
    eprintln!("{flagged} of {} documents flagged for review", docs.len());
    Ok(())
}

fn today(ref_date: Option<NaiveDate>) -> NaiveDate {
    ref_date.unwrap_or_else(|| chrono::Utc::now().date_naive())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Serve { config } => {
            let mut cfg = ServiceConfig::load(&config)?;
            cfg.apply_env(|k| std::env::var(k).ok())?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(cfg))?;
        }
        Command::Eval(args) => {
            if !run_eval(args)? {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Query { config, ref_date, emit, question } => {
            let mut cfg = ServiceConfig::load(&config)?;
            cfg.apply_env(|k| std::env::var(k).ok())?;
            let ref_date = today(ref_date.or(cfg.ref_date));
            let engine = cfg.build_engine()?;
            let answer = engine.answer(&question, ref_date, &WallClock::start()).answer;
            match emit {
                Emit::Answer => println!("{}", serde_json::to_string_pretty(&answer)?),
                Emit::ChartSpec => match answer.payload.as_ref().and_then(|p| p.chart.as_ref()) {
                    Some(spec) => println!("{}", spec.to_canonical_json()),
                    None => bail!("the answer has no chart: {}", answer.text),
                },
            }
        }
        Command::Trends { topic, scale, from, to, window, corpus, ref_date } => {
            let params = TrendParams { topic: Some(topic), scale: Some(scale), from, to, window };
            let (terms, scale, from, to, options) = trend_request(&params, today(ref_date)).map_err(anyhow::Error::msg)?;
            let index = io::build_index(&io::load_corpus_dir(&corpus)?)?;
            let series = topic_series_with(&index, &terms, scale, from, to, options).map_err(anyhow::Error::msg)?;
            let summary = summarize_trend(&series).ok();
            println!("{}", serde_json::to_string_pretty(&json!({ "series": series, "summary": summary }))?);
        }
        Command::Scan { corpus, lexicon } => scan(&corpus, &lexicon)?,
        Command::Index { corpus, out } => {
            let index = io::build_index(&io::load_corpus_dir(&corpus)?)?;
            io::save_index(&out, &index)?;
            eprintln!("indexed {} documents, fingerprint {}", index.doc_count(), index.fingerprint);
        }
        Command::GenFixtures { root } => {
            for f in fixtures::write_fixtures(&root)? {
                println!("{}", root.join(f).display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
