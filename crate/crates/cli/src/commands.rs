use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::info;
use num::BigRational;
use serde_json::{json, Map, Value};
use wsd_core::construct::construct_dice;
use wsd_core::dice::DiceSystem;
use wsd_core::eval::{interim_exact, interim_monte_carlo, max_abs_diff};
use wsd_core::feasibility::{check_feasibility, check_feasibility_matroid, check_feasibility_symmetric, Verdict};
use wsd_core::io;
use wsd_core::nonmatroid::{nonmatroid_environment, nonmatroid_example_dice, nonmatroid_feasible};
use wsd_core::reduce::reduce_all_faces;
use wsd_core::solver::{assemble_matroid_dice, LayerKind, SolverOptions};
use wsd_core::symmetric::construct_symmetric_dice;
use wsd_core::{Environment, Scalar, TypeLayout, TypeSet};
use wsd_persuasion::{check_persuasive, second_order_from_scheme, verify_table1_no_dice, TraceStatus};

use crate::{Command, EnvDice, EnvInterim, PersuasionCommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

/// Infeasible inputs exit with 2, everything else with 1.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<wsd_core::Error>() {
        Some(wsd_core::Error::Infeasible { .. }) => EXIT_INFEASIBLE,
        _ => EXIT_ERROR,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = io::to_text(value);
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Fixed-point text for doubles (12 decimals, trailing zeros removed), exact
/// fractions otherwise.
fn show<S: Scalar>(value: &S) -> String {
    if S::EXACT {
        return value.to_string();
    }
    let text = format!("{:.12}", value.to_f64_lossy());
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text == "-0" { "0".into() } else { text.into() }
}

fn report_verdict<S: Scalar>(verdict: &Verdict<S>, describe: impl Fn(TypeSet) -> String) -> i32 {
    match &verdict.witness {
        None => {
            println!("feasible");
            EXIT_OK
        }
        Some(w) => {
            println!("infeasible");
            println!("witness: {}", describe(w.set));
            println!("slack: {}", show(&w.slack));
            EXIT_INFEASIBLE
        }
    }
}

fn load<S: Scalar>(input: &EnvInterim) -> Result<(Environment<S>, Vec<S>)> {
    let env: Environment<S> = io::parse_environment(&read(&input.env)?)?;
    let x = io::parse_interim(env.layout(), &read(&input.interim)?)?;
    Ok((env, x))
}

fn check<S: Scalar>(input: &EnvInterim, matroid: bool) -> Result<i32> {
    let (env, x) = load::<S>(input)?;
    let verdict = if matroid {
        check_feasibility_matroid(&env, &x)?
    } else {
        check_feasibility(&env, &x)?
    };
    Ok(report_verdict(&verdict, |set| env.layout().describe(set)))
}

fn construct<S: Scalar>(input: &EnvInterim, out: Option<&Path>) -> Result<i32> {
    let (env, x) = load::<S>(input)?;
    let construction = construct_dice(&env, &x)?;
    info!("construction used {} recursive calls", construction.recursive_calls());
    emit(&io::write_dice(env.layout(), &construction.dice), out)?;
    Ok(EXIT_OK)
}

fn eval<S: Scalar>(input: &EnvDice) -> Result<i32> {
    let env: Environment<S> = io::parse_environment(&read(&input.env)?)?;
    let dice: DiceSystem<S> = io::parse_dice(env.layout(), &read(&input.dice)?)?;
    let x = interim_exact(&env, &dice)?;
    emit(&io::write_interim(env.layout(), &x), None)?;
    Ok(EXIT_OK)
}

fn load_dice(input: &EnvDice) -> Result<(Environment<f64>, DiceSystem<f64>)> {
    let env: Environment<f64> = io::parse_environment(&read(&input.env)?)?;
    let dice = io::parse_dice(env.layout(), &read(&input.dice)?)?;
    Ok((env, dice))
}

fn keyed(layout: &TypeLayout, values: impl IntoIterator<Item = Value>) -> Map<String, Value> {
    values.into_iter().enumerate().map(|(t, v)| (layout.key(t), v)).collect()
}

fn construct_sym(n: usize, prior: &Path, interim: &Path, out: Option<&Path>) -> Result<i32> {
    let (names, f) = io::parse_prior::<f64>(&read(prior)?)?;
    let x = io::parse_symmetric_interim::<f64>(&names, &read(interim)?)?;
    let verdict = check_feasibility_symmetric(n, &f, &x)?;
    if verdict.witness.is_some() {
        return Ok(report_verdict(&verdict, |set| {
            let members: Vec<&str> = set.iter().map(|t| names[t].as_str()).collect();
            format!("{{{}}}", members.join(", "))
        }));
    }
    let construction = construct_symmetric_dice(n, &f, &x)?;
    info!("construction used {} recursive calls", construction.recursive_calls());
    let layout = TypeLayout::new(vec![names; n])?;
    let dice = construction.replicate(n);
    emit(&io::write_dice(&layout, &dice), out)?;
    Ok(EXIT_OK)
}

fn solve_matroid(
    env_path: &Path,
    interim: &Path,
    options: SolverOptions,
    out: Option<&Path>,
    report: Option<&Path>,
) -> Result<i32> {
    let env: Environment<f64> = io::parse_environment(&read(env_path)?)?;
    let x: Vec<f64> = io::parse_interim(env.layout(), &read(interim)?)?;
    let solved = assemble_matroid_dice(&env, &x, &options)?;
    let layout = env.layout();
    let keys = |types: &[usize]| -> Vec<Value> { types.iter().map(|&t| Value::String(layout.key(t))).collect() };
    let layers: Vec<Value> = solved
        .layers
        .iter()
        .map(|layer| {
            let types: Vec<usize> = layer.types.iter().collect();
            let mut entry = json!({
                "component": layer.component,
                "types": keys(&types),
                "band": io::float_json(layer.band),
            });
            let detail = match &layer.kind {
                LayerKind::SureWinners => json!({"kind": "sure-winners"}),
                LayerKind::SingleCandidate => json!({"kind": "single-candidate"}),
                LayerKind::Solved(s) => json!({
                    "kind": "solved",
                    "theta": s.types.iter().zip(&s.theta).map(|(&t, &v)| (layout.key(t), io::float_json(v))).collect::<Map<_, _>>(),
                    "tau": io::float_json(s.tau),
                    "residuals": s.report.residuals.iter().map(|&r| io::float_json(r)).collect::<Vec<_>>(),
                    "evaluations": s.report.evaluations,
                    "converged": s.report.converged,
                }),
            };
            entry.as_object_mut().expect("object").extend(detail.as_object().expect("object").clone());
            entry
        })
        .collect();
    let summary = json!({
        "converged": solved.converged,
        "tol": io::float_json(options.tol),
        "max_error": io::float_json(solved.max_error),
        "x": keyed(layout, solved.interim.iter().map(|&v| io::float_json(v))),
        "layers": layers,
    });
    emit(&io::write_dice(layout, &solved.dice), out)?;
    match report {
        Some(path) => emit(&summary, Some(path))?,
        None => eprint!("{}", io::to_text(&summary)),
    }
    if !solved.converged {
        bail!(
            "solver did not reach tolerance {}: max interim error {:e}",
            options.tol,
            solved.max_error
        );
    }
    Ok(EXIT_OK)
}

fn demo_nonmatroid<S: Scalar>(interim: &Path, out: Option<&Path>, env_out: Option<&Path>) -> Result<i32> {
    let env: Environment<S> = nonmatroid_environment()?;
    let values: Vec<S> = io::parse_interim(env.layout(), &read(interim)?)?;
    let x: [S; 4] = values.try_into().map_err(|_| anyhow::anyhow!("expected four interim values"))?;
    if !nonmatroid_feasible(&x) {
        println!("infeasible");
        println!("witness: max(x0, x1) + max(x2, x3) > 1");
        return Ok(EXIT_INFEASIBLE);
    }
    let dice = nonmatroid_example_dice(&x)?;
    if let Some(path) = env_out {
        emit(&io::write_environment(&env), Some(path))?;
    }
    let y = interim_exact(&env, &dice)?;
    let deviation = max_abs_diff(
        &y.iter().map(Scalar::to_f64_lossy).collect::<Vec<_>>(),
        &x.iter().map(Scalar::to_f64_lossy).collect::<Vec<_>>(),
    );
    eprintln!("max deviation from the requested rule: {deviation:e}");
    match out {
        Some(path) => {
            emit(&io::write_dice(env.layout(), &dice), Some(path))?;
            emit(&io::write_interim(env.layout(), &y), None)?;
        }
        None => emit(&io::write_dice(env.layout(), &dice), None)?,
    }
    Ok(EXIT_OK)
}

fn persuasion(command: PersuasionCommand) -> Result<i32> {
    match command {
        PersuasionCommand::VerifyTable1 => {
            let trace = verify_table1_no_dice();
            print!("{trace}");
            Ok(match trace.status {
                TraceStatus::Contradiction => EXIT_OK,
                TraceStatus::Incomplete(_) => EXIT_ERROR,
            })
        }
        PersuasionCommand::Check { instance, scheme, out } => {
            let inst = wsd_persuasion::io::parse_instance(&read(&instance)?)?;
            let scheme = wsd_persuasion::io::parse_scheme(&inst, &read(&scheme)?)?;
            let check = check_persuasive(&inst, &scheme);
            let rule = second_order_from_scheme(&inst, &scheme);
            let overall: Vec<BigRational> = scheme.recommendation_probabilities(&inst);
            emit(&wsd_persuasion::io::write_check(&inst, &check, &rule, &overall), out.as_deref())?;
            Ok(if check.persuasive { EXIT_OK } else { EXIT_INFEASIBLE })
        }
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Check(input) if input.exact => check::<BigRational>(&input, false),
        Command::Check(input) => check::<f64>(&input, false),
        Command::CheckMatroid(input) if input.exact => check::<BigRational>(&input, true),
        Command::CheckMatroid(input) => check::<f64>(&input, true),
        Command::Construct { input, out } if input.exact => construct::<BigRational>(&input, out.as_deref()),
        Command::Construct { input, out } => construct::<f64>(&input, out.as_deref()),
        Command::ConstructSym { n, prior, interim, out } => construct_sym(n, &prior, &interim, out.as_deref()),
        Command::Eval { input, exact: true } => eval::<BigRational>(&input),
        Command::Eval { input, exact: false } => eval::<f64>(&input),
        Command::Simulate { input, samples, seed } => {
            let (env, dice) = load_dice(&input)?;
            let estimate = interim_monte_carlo(&env, &dice, samples, seed)?;
            let value = json!({
                "x": keyed(env.layout(), estimate.mean.iter().map(|&v| io::float_json(v))),
                "stderr": keyed(env.layout(), estimate.stderr.iter().map(|&v| io::float_json(v))),
                "samples": estimate.samples,
                "seed": seed,
            });
            emit(&value, None)?;
            Ok(EXIT_OK)
        }
        Command::Reduce { input, out } => {
            let (env, dice) = load_dice(&input)?;
            let reduced = reduce_all_faces(&env, &dice)?;
            emit(&io::write_dice(env.layout(), &reduced), out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::SolveMatroid {
            env,
            interim,
            tol,
            seed,
            samples,
            out,
            report,
        } => {
            if tol.is_nan() || tol <= 0.0 {
                bail!("--tol must be positive");
            }
            let mut options = SolverOptions {
                tol,
                seed,
                ..SolverOptions::default()
            };
            if let Some(points) = samples {
                options.points = points;
            }
            solve_matroid(&env, &interim, options, out.as_deref(), report.as_deref())
        }
        Command::Persuasion { command } => persuasion(command),
        Command::DemoNonmatroid {
            interim,
            exact,
            out,
            env_out,
        } => {
            if exact {
                demo_nonmatroid::<BigRational>(&interim, out.as_deref(), env_out.as_deref())
            } else {
                demo_nonmatroid::<f64>(&interim, out.as_deref(), env_out.as_deref())
            }
        }
    }
}
