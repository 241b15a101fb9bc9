//! `pgt`: potential game toolkit.
//!
//! Decides potentiality (exact / ordinal / generalized ordinal), constructs
//! potential functions in closed form, verifies candidates, and exploits
//! potentials for equilibrium computation. Reports go to stdout as text or,
//! with `--json`, as a single JSON object whose bytes are reproducible for
//! fixed inputs and seed (the `timing_ms` field excepted).
//!
//! Exit codes: 0 pass / success, 1 fail, 2 usage or schema errors,
//! 3 inapplicable (an applicability gate rejected the game).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use pgt_core::construct::{
    construct_rosenthal, construct_theorem5, construct_theorem8, load_potential_json,
    verify_exact_potential, verify_gradient_match, PotentialFn,
};
use pgt_core::criteria::{
    oracle_finite_potential, test_cross_hessian, test_four_cycles, test_hp_decomposition,
    test_pairwise,
};
use pgt_core::equilibrium::{
    better_response_dynamics, minimize_potential, verify_nash, DynamicsOutcome,
};
use pgt_core::ordinal::{
    check_assumption1, check_cross_partial_signs, check_theorem10, check_theorem11_12,
    estimate_certificate, load_candidate_json, verify_ordinal_potential, CertificateSource,
    ConvexityCertificate, CrossSignMode, OrdinalCandidate, OrdinalMode,
};
use pgt_core::{
    detect_abnormal, load_game_spec_from_str, CheckConfig, CoreError, GameSpec, TestReport, Verdict,
};

#[derive(Parser)]
#[command(name = "pgt", version, about = "Potential game toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scale-aware equality tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Sample / instance budget for criterion checks.
    #[arg(long, global = true, default_value_t = 500)]
    samples: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Sampling radius for unbounded action spaces.
    #[arg(long, global = true, default_value_t = 10.0)]
    radius: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run a potentiality criterion.
    Check {
        game: PathBuf,
        #[arg(long, value_enum)]
        method: CheckMethod,
    },
    /// Construct a potential function.
    Construct {
        game: PathBuf,
        #[arg(long, value_enum)]
        method: ConstructMethod,
        /// Use the augmented action set for the congestion construction.
        #[arg(long)]
        augmented: bool,
        /// Verify the constructed potential against the defining identity.
        #[arg(long)]
        verify: bool,
        /// Export the potential as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a candidate potential from a file.
    Verify {
        game: PathBuf,
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, value_enum)]
        mode: VerifyMode,
    },
    /// Ordinal and generalized-ordinal conditions.
    Ordinal {
        game: PathBuf,
        #[arg(long, value_enum)]
        check: OrdinalCheck,
        /// Candidate JSON: {"phi": .., "subgradients": .. | null, "alphas": .. | null}.
        #[arg(long)]
        candidate: Option<PathBuf>,
        /// Strong-convexity moduli, one per player (comma separated).
        #[arg(long, value_delimiter = ',')]
        eta: Vec<f64>,
        /// Lipschitz-gradient constant of the candidate.
        #[arg(long)]
        lipschitz: Option<f64>,
        /// Cross-partial sign mode.
        #[arg(long, value_enum, default_value_t = SignMode::Global)]
        mode: SignMode,
    },
    /// Nash equilibrium via potential minimization.
    Nash {
        game: PathBuf,
        /// Potential to minimize; the finite-game oracle potential by default.
        #[arg(long)]
        potential: Option<PathBuf>,
    },
    /// Better-response dynamics on a finite game.
    Dynamics {
        game: PathBuf,
        /// Starting profile as per-player action indices.
        #[arg(long, value_delimiter = ',', required = true)]
        start: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Export the trajectory as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect players whose cost ignores their own action.
    Abnormal { game: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMethod {
    Cycle4,
    Pairwise,
    Hp,
    Hessian,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructMethod {
    Theorem5,
    Theorem8,
    Rosenthal,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    Exact,
    Ordinal,
    Generalized,
    Gradient,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrdinalCheck {
    Assumption1,
    Crosssign,
    Theorem10,
    Theorem11,
    Theorem12,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignMode {
    Global,
    Critical,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = CheckConfig {
        budget: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        radius: cli.radius,
    };
    let started = Instant::now();
    match run(&cli, &cfg) {
        Ok(outcome) => {
            let timing_ms = started.elapsed().as_secs_f64() * 1e3;
            print_outcome(&outcome, cli.json, timing_ms);
            exit_code(&outcome)
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                CoreError::Inapplicable(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Everything a subcommand may produce; rendered once at the end.
struct Outcome {
    report: Option<TestReport>,
    /// Extra payload (constructed potential, trajectory, profile, ...).
    extra: serde_json::Map<String, serde_json::Value>,
    /// Overrides the report-derived exit code (dynamics, construct).
    exit_override: Option<u8>,
    /// Human lines printed before the report in text mode.
    headline: Vec<String>,
}

impl Outcome {
    fn from_report(report: TestReport) -> Outcome {
        Outcome {
            report: Some(report),
            extra: serde_json::Map::new(),
            exit_override: None,
            headline: Vec::new(),
        }
    }
}

fn exit_code(outcome: &Outcome) -> ExitCode {
    if let Some(code) = outcome.exit_override {
        return ExitCode::from(code);
    }
    match outcome.report.as_ref().map(|r| r.verdict) {
        Some(Verdict::Pass) | None => ExitCode::SUCCESS,
        Some(Verdict::Fail) => ExitCode::from(1),
        Some(Verdict::Inapplicable) => ExitCode::from(3),
    }
}

fn print_outcome(outcome: &Outcome, json: bool, timing_ms: f64) {
    if json {
        let mut map = serde_json::Map::new();
        if let Some(report) = &outcome.report {
            let serde_json::Value::Object(fields) =
                serde_json::to_value(report).expect("report serializes")
            else {
                unreachable!()
            };
            map.extend(fields);
        }
        map.extend(outcome.extra.clone());
        map.insert("timing_ms".into(), serde_json::json!(timing_ms));
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("serializable")
        );
        return;
    }
    for line in &outcome.headline {
        println!("{line}");
    }
    if let Some(r) = &outcome.report {
        println!("method         {}", r.method);
        println!("verdict        {}", r.label);
        println!("residual_max   {:.6e}", r.residual_max);
        println!("samples_used   {}", r.samples_used);
        println!("exhaustive     {}", r.exhaustive);
        println!("abstentions    {}", r.abstentions);
        match &r.witness {
            Some(w) => println!(
                "witness        {}",
                serde_json::to_string(w).expect("witness serializes")
            ),
            None => println!("witness        (none)"),
        }
        for note in &r.notes {
            println!("note           {note}");
        }
    }
    for (key, value) in &outcome.extra {
        println!("{key:<14} {value}");
    }
    println!("time           {timing_ms:.1} ms");
}

fn load_game(path: &PathBuf) -> Result<GameSpec, CoreError> {
    let text = fs::read_to_string(path)?;
    load_game_spec_from_str(&text)
}

fn run(cli: &Cli, cfg: &CheckConfig) -> Result<Outcome, CoreError> {
    match &cli.command {
        Command::Check { game, method } => {
            let g = load_game(game)?;
            let report = match method {
                CheckMethod::Cycle4 => test_four_cycles(&g, cfg)?,
                CheckMethod::Pairwise => test_pairwise(&g, cfg)?,
                CheckMethod::Hp => test_hp_decomposition(&g, cfg)?,
                CheckMethod::Hessian => test_cross_hessian(&g, cfg)?,
                CheckMethod::Oracle => oracle_finite_potential(&g, cfg.tol)?.0,
            };
            Ok(Outcome::from_report(report))
        }

        Command::Construct {
            game,
            method,
            augmented,
            verify,
            out,
        } => {
            let g = load_game(game)?;
            let phi = match method {
                ConstructMethod::Theorem5 => construct_theorem5(&g)?,
                ConstructMethod::Theorem8 => construct_theorem8(&g)?,
                ConstructMethod::Rosenthal => construct_rosenthal(&g, *augmented)?,
            };
            // the congestion potential is verified against (and exported
            // over) the normal-form expansion
            let target_game = match (&phi.method[..], g.costs()) {
                ("rosenthal", pgt_core::Costs::Congestion(_)) => {
                    pgt_core::expand_congestion_game(&g, *augmented)?
                }
                _ => g.clone(),
            };
            let export = phi.export_json(&target_game)?;
            if let Some(path) = out {
                fs::write(path, serde_json::to_string_pretty(&export)?)?;
            }
            let mut outcome = Outcome {
                report: None,
                extra: serde_json::Map::new(),
                exit_override: Some(0),
                headline: vec![format!(
                    "constructed potential via `{}` ({})",
                    phi.method, phi.normalization
                )],
            };
            outcome.extra.insert("potential".into(), export);
            if *verify {
                let report = verify_exact_potential(&target_game, &phi, cfg)?;
                outcome.exit_override = None;
                outcome.report = Some(report);
            }
            Ok(outcome)
        }

        Command::Verify {
            game,
            potential,
            mode,
        } => {
            let g = load_game(game)?;
            let text = fs::read_to_string(potential)?;
            let phi = load_potential_json(&text, &g)?;
            let report = match mode {
                VerifyMode::Exact => verify_exact_potential(&g, &phi, cfg)?,
                VerifyMode::Ordinal => {
                    verify_ordinal_potential(&g, &phi, cfg, OrdinalMode::Ordinal)?
                }
                VerifyMode::Generalized => {
                    verify_ordinal_potential(&g, &phi, cfg, OrdinalMode::Generalized)?
                }
                VerifyMode::Gradient => match &phi.source {
                    pgt_core::construct::PotentialSource::Expression(expr) => {
                        verify_gradient_match(&g, expr, cfg)?
                    }
                    _ => {
                        return Err(CoreError::Inapplicable(
                            "the gradient check needs an expression potential".into(),
                        ))
                    }
                },
            };
            Ok(Outcome::from_report(report))
        }

        Command::Ordinal {
            game,
            check,
            candidate,
            eta,
            lipschitz,
            mode,
        } => {
            let g = load_game(game)?;
            let load_cand = || -> Result<OrdinalCandidate, CoreError> {
                let path = candidate.as_ref().ok_or_else(|| {
                    CoreError::InvalidInput("this check needs --candidate FILE".into())
                })?;
                load_candidate_json(&fs::read_to_string(path)?, &g)
            };
            let report = match check {
                OrdinalCheck::Assumption1 => check_assumption1(&g, cfg)?,
                OrdinalCheck::Crosssign => {
                    let sign_mode = match mode {
                        SignMode::Global => CrossSignMode::Global,
                        SignMode::Critical => CrossSignMode::Critical,
                    };
                    check_cross_partial_signs(&g, cfg, sign_mode)?
                }
                OrdinalCheck::Theorem10 => {
                    let cand = load_cand()?;
                    let (cert, estimate_notes) = if eta.is_empty() || lipschitz.is_none() {
                        let (cert, notes) = estimate_certificate(&g, &cand.phi, cfg)?;
                        (cert, notes)
                    } else {
                        (
                            ConvexityCertificate {
                                eta: eta.clone(),
                                lipschitz: lipschitz.expect("checked above"),
                                source: CertificateSource::UserDeclared,
                            },
                            Vec::new(),
                        )
                    };
                    let mut report = check_theorem10(&g, &cand, &cert, cfg)?;
                    report.notes.extend(estimate_notes);
                    report
                }
                OrdinalCheck::Theorem11 | OrdinalCheck::Theorem12 => {
                    let mut cand = load_cand()?;
                    match check {
                        OrdinalCheck::Theorem11 => cand.alphas = None,
                        OrdinalCheck::Theorem12 => {
                            if cand.alphas.is_none() {
                                return Err(CoreError::InvalidInput(
                                    "the scaled route needs `alphas` in the candidate file".into(),
                                ));
                            }
                        }
                        _ => unreachable!(),
                    }
                    check_theorem11_12(&g, &cand, cfg)?
                }
            };
            Ok(Outcome::from_report(report))
        }

        Command::Nash { game, potential } => {
            let g = load_game(game)?;
            let phi = match potential {
                Some(path) => load_potential_json(&fs::read_to_string(path)?, &g)?,
                None => {
                    let (report, table) = oracle_finite_potential(&g, cfg.tol)?;
                    match table {
                        Some(table) => PotentialFn::from_oracle_table(table),
                        None => {
                            let mut outcome = Outcome::from_report(report);
                            outcome.headline.push(
                                "the game admits no exact potential; pass --potential to \
                                 minimize a candidate instead"
                                    .into(),
                            );
                            return Ok(outcome);
                        }
                    }
                }
            };
            let (x, value, exhaustive) = minimize_potential(&g, &phi, cfg)?;
            let mut report = verify_nash(&g, &x, cfg)?;
            if !exhaustive {
                report
                    .notes
                    .push("minimizer taken over the sample grid only (approximate)".into());
            }
            let mut outcome = Outcome::from_report(report);
            outcome
                .extra
                .insert("profile".into(), serde_json::to_value(&x)?);
            outcome
                .extra
                .insert("value".into(), serde_json::json!(value));
            Ok(outcome)
        }

        Command::Dynamics {
            game,
            start,
            max_steps,
            out,
        } => {
            let g = load_game(game)?;
            let start = g.profile_from_indices(start)?;
            let trajectory = better_response_dynamics(&g, &start, *max_steps)?;
            let phi = oracle_finite_potential(&g, cfg.tol)
                .ok()
                .and_then(|(_, t)| t)
                .map(PotentialFn::from_oracle_table);
            let json = trajectory.export_json(&g, phi.as_ref())?;
            if let Some(path) = out {
                fs::write(path, serde_json::to_string_pretty(&json)?)?;
            }
            let (label, code) = match trajectory.outcome {
                DynamicsOutcome::Converged => ("converged", 0u8),
                DynamicsOutcome::CycleDetected { .. } => ("cycle_detected", 1),
                DynamicsOutcome::BudgetExhausted => ("budget_exhausted", 1),
            };
            let mut outcome = Outcome {
                report: None,
                extra: serde_json::Map::new(),
                exit_override: Some(code),
                headline: vec![format!(
                    "{label} after {} improvement steps",
                    trajectory.steps.len() - 1
                )],
            };
            if matches!(trajectory.outcome, DynamicsOutcome::CycleDetected { .. }) {
                outcome.headline.push(
                    "an improvement cycle certifies that no generalized ordinal potential exists"
                        .into(),
                );
            }
            outcome.extra.insert("trajectory".into(), json);
            Ok(outcome)
        }

        Command::Abnormal { game } => {
            let g = load_game(game)?;
            let report = detect_abnormal(&g, cfg.budget, cfg.seed, cfg.tol, cfg.radius)?;
            Ok(Outcome::from_report(report))
        }
    }
}
