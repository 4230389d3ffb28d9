//! The `lea` command line.
//!
//! Exit codes: 0 for an affirmative verdict, 1 for a negative or unknown
//! one, 2 for usage and input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bisim::{box_bisimilar, contract, largest_circ_bisimulation};
use crate::decide::{self, crosscheck, Mode, DEFAULT_SEARCH_BOUND};
use crate::formula::{parse, to_lea, to_ml, Formula, Modality};
use crate::hilbert::{check_derivation, gen_conj_derivation, soundness_scan, Derivation, System};
use crate::kripke::{
    disjoint_union, model_from_json, right_index, FrameClass, FrameProperty, Model, PointedModel,
};
use crate::random::{random_formula, seeded};
use crate::semantics::{check_definability, frame_countermodel, satisfies, DefinabilityOutcome};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lea", version, about = "Workbench for the logic of essence and accident")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Largest frame size for enumerating commands.
    #[arg(long = "max-n", global = true, value_name = "N")]
    max_n: Option<usize>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a formula at a world of a model.
    Check {
        model: PathBuf,
        world: String,
        /// Formula text, or @file.
        formula: String,
    },
    /// Validity over a frame class or on one frame.
    Valid {
        formula: String,
        #[command(flatten)]
        target: ValidTarget,
    },
    /// Satisfiability over a frame class.
    Sat {
        formula: String,
        #[arg(long, default_value = "K")]
        class: FrameClass,
    },
    /// Bisimilarity of two pointed models.
    Bisim {
        model_a: PathBuf,
        point_a: String,
        model_b: PathBuf,
        point_b: String,
        /// Essence bisimulation (the default).
        #[arg(long, conflicts_with = "boxed")]
        circ: bool,
        /// Standard modal bisimulation.
        #[arg(long = "box")]
        boxed: bool,
    },
    /// Quotient of a model by its largest essence bisimulation.
    Contract { model: PathBuf },
    /// Translate between the essence and the modal fragment.
    Translate { direction: Direction, formula: String },
    /// Test whether a formula defines a frame property on small frames.
    Define { property: FrameProperty, formula: String },
    /// Check a derivation file.
    Prove { system: System, derivation: PathBuf },
    /// Check every axiom of a system on every frame of a class.
    Scan { system: System, class: FrameClass },
    /// Print a derivation of the n-ary conjunction lemma.
    GenProof { n: usize },
    /// Compare the tableau against exhaustive search on random formulas.
    Crosscheck {
        #[arg(long, default_value = "K")]
        class: FrameClass,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ValidTarget {
    #[arg(long)]
    class: Option<FrameClass>,
    /// Model file whose frame is tested (its valuation is ignored).
    #[arg(long)]
    frame: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    ToMl,
    ToLea,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
}

type Outcome = Result<(i32, String, Value), CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn formula_arg(arg: &str) -> Result<Formula, CliError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => read(Path::new(path))?,
        None => arg.to_string(),
    };
    parse(text.trim()).map_err(|e| CliError::Input(e.to_string()))
}

fn model_arg(path: &Path) -> Result<(Model, Option<usize>), CliError> {
    model_from_json(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn pointed(path: &Path, world: &str) -> Result<PointedModel, CliError> {
    let (m, _) = model_arg(path)?;
    PointedModel::new(m, world).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn code(yes: bool) -> i32 {
    if yes {
        EXIT_YES
    } else {
        EXIT_NO
    }
}

/// Parses `args` (including the program name), runs the command, and writes
/// the report to `out`. Diagnostics go to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let sink: &mut dyn Write = if usage { err } else { out };
            let _ = write!(sink, "{e}");
            return if usage { EXIT_USAGE } else { EXIT_YES };
        }
    };
    match execute(&cli) {
        Ok((status, text, value)) => {
            let written = if cli.json {
                writeln!(out, "{value}")
            } else {
                writeln!(out, "{text}")
            };
            if written.is_err() {
                return EXIT_USAGE;
            }
            status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Check {
            model,
            world,
            formula,
        } => {
            let (m, _) = model_arg(model)?;
            let f = formula_arg(formula)?;
            let ans = satisfies(&m, world, &f).map_err(|e| CliError::Input(e.to_string()))?;
            let text = format!("{} at {world}: {ans}", f);
            Ok((code(ans), text, json!({"answer": ans, "world": world, "formula": f.to_string()})))
        }
        Command::Valid { formula, target } => {
            let f = formula_arg(formula)?;
            if let Some(path) = &target.frame {
                let (m, _) = model_arg(path)?;
                let counter = frame_countermodel(&m.frame(), &f);
                let ans = counter.is_none();
                let text = match &counter {
                    None => "valid on the frame".to_string(),
                    Some((cm, w)) => {
                        format!("not valid on the frame\ncountermodel: {}", cm.to_json_string(Some(*w)))
                    }
                };
                let witness = counter.map(|(cm, w)| cm.to_json(Some(w)));
                let value = json!({
                    "answer": ans,
                    "method": "frame",
                    "witness": witness,
                    "formula": f.to_string(),
                });
                return Ok((code(ans), text, value));
            }
            let cls = target.class.expect("clap enforces one target");
            verdict(&f, cls, Mode::Valid, cli.max_n)
        }
        Command::Sat { formula, class } => {
            let f = formula_arg(formula)?;
            verdict(&f, *class, Mode::Sat, cli.max_n)
        }
        Command::Bisim {
            model_a,
            point_a,
            model_b,
            point_b,
            boxed,
            ..
        } => {
            let a = pointed(model_a, point_a)?;
            let b = pointed(model_b, point_b)?;
            if *boxed {
                let ans = box_bisimilar(&a, &b);
                let text = format!("box-bisimilar: {ans}");
                return Ok((code(ans), text, json!({"answer": ans, "flavor": "box"})));
            }
            let union = disjoint_union(&a.model, &b.model);
            let z = largest_circ_bisimulation(&union);
            let ans = z.contains(a.point, right_index(&a.model, b.point));
            let rel = z.to_json();
            let text = format!(
                "circ-bisimilar: {ans}\nlargest relation: {}",
                serde_json::to_string(&rel).expect("relation serializes")
            );
            let value = json!({"answer": ans, "flavor": "circ", "carrier": union.to_json(None), "relation": rel});
            Ok((code(ans), text, value))
        }
        Command::Contract { model } => {
            let (m, _) = model_arg(model)?;
            let q = contract(&m);
            let classes: serde_json::Map<String, Value> = (0..m.len())
                .map(|w| (m.world_name(w).to_string(), Value::from(q.class_name(w))))
                .collect();
            let text = format!(
                "{} worlds -> {} classes\n{}",
                m.len(),
                q.model.len(),
                q.model.to_json_string(None)
            );
            Ok((EXIT_YES, text, json!({"model": q.model.to_json(None), "class_of": classes})))
        }
        Command::Translate { direction, formula } => {
            let f = formula_arg(formula)?;
            let t = match direction {
                Direction::ToMl => to_ml(&f),
                Direction::ToLea => to_lea(&f),
            }
            .map_err(|e| CliError::Input(e.to_string()))?;
            Ok((EXIT_YES, t.to_string(), json!({"formula": t.to_string()})))
        }
        Command::Define { property, formula } => {
            let f = formula_arg(formula)?;
            let max_n = cli.max_n.unwrap_or(4);
            check_max_n(max_n, 5)?;
            let v = check_definability(*property, &f, max_n);
            let mut value = json!({
                "answer": v.is_confirmed(),
                "property": property.name(),
                "formula": f.to_string(),
                "max_n": max_n,
                "verdict": v.to_string(),
            });
            if let DefinabilityOutcome::Refuted {
                frame,
                direction,
                countermodel,
            } = &v.outcome
            {
                value["frame"] = serde_json::to_value(frame.to_json(None)).expect("serializes");
                value["direction"] = Value::from(format!("{direction:?}"));
                if let Some((m, w)) = countermodel {
                    value["countermodel"] =
                        serde_json::to_value(m.to_json(Some(*w))).expect("serializes");
                }
            }
            Ok((code(v.is_confirmed()), v.to_string(), value))
        }
        Command::Prove { system, derivation } => {
            let d: Derivation = read(derivation)?
                .parse()
                .map_err(|e| CliError::Input(format!("{}: {e}", derivation.display())))?;
            let r = check_derivation(*system, &d);
            let err = r
                .first_error
                .as_ref()
                .map(|e| json!({"line": e.line, "reason": e.reason}));
            Ok((code(r.ok), r.to_string(), json!({"answer": r.ok, "first_error": err})))
        }
        Command::Scan { system, class } => {
            let max_n = cli.max_n.unwrap_or(4);
            check_max_n(max_n, 4)?;
            let r = soundness_scan(*system, *class, max_n);
            let failures: Vec<Value> = r
                .failures
                .iter()
                .map(|f| {
                    json!({
                        "axiom": f.axiom,
                        "countermodel": f.countermodel.0.to_json(Some(f.countermodel.1)),
                    })
                })
                .collect();
            let value = json!({
                "answer": r.is_sound(),
                "frames_checked": r.frames_checked,
                "failures": failures,
            });
            Ok((code(r.is_sound()), r.to_string(), value))
        }
        Command::GenProof { n } => {
            let d = gen_conj_derivation(*n).map_err(|e| CliError::Input(e.to_string()))?;
            let text = d.to_string();
            let lines: Vec<&str> = text.lines().collect();
            Ok((EXIT_YES, text.trim_end().to_string(), json!({"lines": lines})))
        }
        Command::Crosscheck {
            class,
            count,
            depth,
        } => {
            let max_n = cli.max_n.unwrap_or(DEFAULT_SEARCH_BOUND);
            check_max_n(max_n, 4)?;
            let mut rng = seeded(cli.seed);
            let vars = ["p".to_string(), "q".to_string()];
            let mut failures = Vec::new();
            let mut notes = 0;
            for _ in 0..*count {
                let f = random_formula(&mut rng, &vars, *depth, Modality::Ess);
                let r = crosscheck(&f, *class, max_n);
                notes += r.notes.len();
                for h in r.hard_failures {
                    failures.push(format!("{f}: {h}"));
                }
            }
            let ok = failures.is_empty();
            let mut text = format!(
                "{count} formulas over {class}: {} hard failures, {notes} inconclusive",
                failures.len()
            );
            for f in &failures {
                text.push_str("\n  ");
                text.push_str(f);
            }
            let value = json!({"answer": ok, "formulas": count, "hard_failures": failures, "inconclusive": notes});
            Ok((code(ok), text, value))
        }
    }
}

fn check_max_n(n: usize, limit: usize) -> Result<(), CliError> {
    if (1..=limit).contains(&n) {
        Ok(())
    } else {
        Err(CliError::Input(format!("--max-n must be between 1 and {limit}")))
    }
}

fn verdict(f: &Formula, cls: FrameClass, mode: Mode, max_n: Option<usize>) -> Outcome {
    let bound = max_n.unwrap_or(DEFAULT_SEARCH_BOUND);
    check_max_n(bound, 4)?;
    let v = decide::decide(f, cls, mode, bound);
    let value = serde_json::to_value(v.to_json()).expect("verdict serializes");
    Ok((code(v.answer == Some(true)), v.to_string(), value))
}
