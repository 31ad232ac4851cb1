use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{Project, ProjectError, Result, REPORT_FILE, REPORT_NO_MISC_FILE};
use crate::candidates::{Aggregation, TaggerSpec};
use crate::corpus::CorpusFormat;
use crate::eval::ModelKind;

#[derive(Debug, Parser)]
#[command(name = "wikiner", version, about = "Wikipedia wikilink NER corpus pipeline")]
pub struct Cli {
    /// Project directory.
    #[arg(short = 'C', long = "project", global = true, default_value = ".")]
    pub project: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project directory with a default wikiner.toml and seeds.txt.
    Init,
    /// Cache the seed pages under pages/.
    Fetch {
        /// Allow network access for pages not already cached.
        #[arg(long)]
        online: bool,
        /// Import local *.wikitext / *.html files (file stem = title) first.
        #[arg(long, value_name = "DIR")]
        from: Option<PathBuf>,
    },
    /// Extract article wikilinks from pages/ into links.jsonl.
    Extract,
    /// Deduplicate anchor texts into candidates.jsonl.
    Candidates,
    /// Tag and score candidates into scored.jsonl.
    Score {
        /// `heuristic` or `cmd:<path>`.
        #[arg(long)]
        tagger: Option<TaggerSpec>,
        #[arg(long, value_name = "any|all|first")]
        pos_agg: Option<Aggregation>,
        #[arg(long, value_name = "any|all|first")]
        wt_agg: Option<Aggregation>,
    },
    /// Write pipeline counts and the class table to stats.json.
    Stats,
    /// Run the annotation HTTP service until Ctrl-C.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
    /// Compute inter-annotator agreement into agreement.json.
    Agreement,
    /// Resolve a disagreement; without arguments, list the pending ones.
    Adjudicate {
        entity_id: Option<String>,
        label: Option<String>,
    },
    /// Write the adjudicated corpus to corpus.tsv and corpus.jsonl.
    Finalize,
    /// Print the corpus in the requested format.
    Export {
        #[arg(long, default_value = "tsv")]
        format: CorpusFormat,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stratified k-fold cross-validation into report.json.
    #[command(alias = "train")]
    Evaluate(EvalArgs),
    /// Accuracy by training fraction into learning_curve.csv.
    LearningCurve {
        #[command(flatten)]
        eval: EvalArgs,
        /// Comma-separated fractions in (0, 1].
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "lr|svm|nb|sgd")]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Drop MISC entities before evaluating.
    #[arg(long)]
    pub without_misc: bool,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return e.exit_code();
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    if let Command::Init = cli.command {
        Project::init(&cli.project)?;
        writeln!(out, "initialized {}", cli.project.display())?;
        return Ok(());
    }
    let project = Project::open(&cli.project)?;
    let cfg = project.config().clone();
    match cli.command {
        Command::Init => unreachable!(),
        Command::Fetch { online, from } => {
            let s = project.fetch(online, from.as_deref())?;
            writeln!(
                out,
                "{} seeds, {} imported, {} pages cached",
                s.requested, s.imported, s.cached
            )?;
        }
        Command::Extract => {
            let s = project.extract()?;
            writeln!(
                out,
                "{} links from {} pages ({} warnings)",
                s.links, s.pages, s.warnings
            )?;
        }
        Command::Candidates => {
            let groups = project.candidates()?;
            writeln!(out, "{} distinct surfaces", groups.len())?;
        }
        Command::Score {
            tagger,
            pos_agg,
            wt_agg,
        } => {
            let tagger = tagger.unwrap_or(cfg.candidates.tagger.clone());
            let mut scoring = cfg.candidates.scoring();
            scoring.pos_agg = pos_agg.unwrap_or(scoring.pos_agg);
            scoring.wt_agg = wt_agg.unwrap_or(scoring.wt_agg);
            let s = project.score(&tagger, scoring)?;
            writeln!(
                out,
                "{} scored, {} selected, {} dropped",
                s.scored,
                s.selected,
                s.rejected.len()
            )?;
        }
        Command::Stats => {
            let stats = project.stats()?;
            write!(out, "{}", stats.render_table())?;
        }
        Command::Serve { port } => project.serve(port)?,
        Command::Agreement => {
            let r = project.agreement()?;
            writeln!(
                out,
                "{} labeled by both, {} agree: {:.1}% (kappa {:.3})",
                r.n_labeled_by_both, r.n_agree, r.percent_agreement, r.kappa
            )?;
        }
        Command::Adjudicate { entity_id, label } => match (entity_id, label) {
            (Some(id), Some(label)) => {
                let ack = project.adjudicate(&id, &label)?;
                writeln!(out, "{} -> {}", ack.entity_id, ack.label.as_str())?;
            }
            (None, None) => {
                for d in project.pending_disagreements()? {
                    let labels: Vec<String> = d
                        .labels
                        .iter()
                        .map(|(a, l)| format!("{a}={}", l.as_str()))
                        .collect();
                    writeln!(out, "{}\t{}\t{}", d.entity_id, d.surface, labels.join(" "))?;
                }
            }
            _ => {
                return Err(ProjectError::Usage(
                    "adjudicate takes both ENTITY_ID and LABEL, or neither".into(),
                ))
            }
        },
        Command::Finalize => {
            let records = project.finalize()?;
            writeln!(out, "{} entities written", records.len())?;
        }
        Command::Export { format, out: path } => {
            let text = project.export(format)?;
            match path {
                Some(p) => crate::fsutil::write_atomic(&p, text.as_bytes())?,
                None => write!(out, "{text}")?,
            }
        }
        Command::Evaluate(args) => {
            let (kind, cv) = eval_settings(&cfg.eval, &args);
            let file = if cv.include_misc { REPORT_FILE } else { REPORT_NO_MISC_FILE };
            let report = project.evaluate(kind, &cv, file)?;
            write!(out, "{}", report.render_table())?;
        }
        Command::LearningCurve { eval, fractions } => {
            let (kind, cv) = eval_settings(&cfg.eval, &eval);
            let fractions = fractions.unwrap_or(cfg.eval.fractions.clone());
            for p in project.learning_curve(kind, &cv, &fractions)? {
                writeln!(
                    out,
                    "{:>5.2}  n={:<5} accuracy {:.4}",
                    p.fraction, p.train_size, p.accuracy
                )?;
            }
        }
    }
    Ok(())
}

fn eval_settings(cfg: &super::EvalSection, args: &EvalArgs) -> (ModelKind, crate::eval::CvConfig) {
    let mut cv = cfg.cv_config();
    cv.folds = args.folds.unwrap_or(cv.folds);
    cv.seed = args.seed.unwrap_or(cv.seed);
    if args.without_misc {
        cv.include_misc = false;
    }
    (args.model.unwrap_or(cfg.model), cv)
}
