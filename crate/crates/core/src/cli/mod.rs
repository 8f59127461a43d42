//! Command-line front end. The binary only forwards its arguments to [`run`].
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 verification gap.

mod args;
pub mod output;

use std::ffi::OsString;
use std::path::Path;

use clap::Parser;
use serde::Deserialize;
use serde_json::{json, Value};

pub use args::{Cli, Command, Format, Regime, SweepVar};
use args::{Output, Problem, SimulateArgs, SolveArgs, SweepArgs, VerifyArgs};
use output::{envelope, Cell, Table};

use crate::corr::{self, CorrMode, CorrSolution};
use crate::het::{self, HeterogeneousSpec};
use crate::indep;
use crate::interim;
use crate::model::{CountProfile, HomogeneousSpec, NatureBelief, StationaryPolicy};
use crate::sim;
use crate::two_box;
use crate::verify::{self, Grids, SaddleReport};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "ROBUST_PANDORA_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_GAP: i32 = 3;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parse `args` (including the program name), execute, print and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&t| t > 0);
    let outcome = match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(usage(format!("cannot build a pool of {t} threads: {e}"))),
        },
        None => dispatch(&cli.command),
    };
    match outcome {
        Ok((text, out, code)) => match write_output(&text, out.as_deref()) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            EXIT_VALIDATION
        }
    }
}

fn write_output(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

type Rendered = (String, Option<std::path::PathBuf>, i32);

fn dispatch(cmd: &Command) -> CliResult<Rendered> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn render(command: &str, out: &Output, default: Format, params: Value, results: Value, table: Table) -> String {
    match out.format.unwrap_or(default) {
        Format::Json => envelope(command, params, results),
        Format::Csv => table.to_csv(),
    }
}

fn homogeneous(p: &Problem) -> CliResult<HomogeneousSpec> {
    let c = p.c.ok_or_else(|| usage(format!("--c is required for --regime {}", p.regime.name())))?;
    let n = match (p.n, p.regime) {
        (Some(n), _) => n,
        (None, Regime::TwoBox) => 2,
        (None, _) => return Err(usage(format!("--n is required for --regime {}", p.regime.name()))),
    };
    Ok(HomogeneousSpec::new(p.ubar, c, n)?)
}

fn parse_boxes(text: &str) -> CliResult<HeterogeneousSpec> {
    let pairs = text
        .split(',')
        .map(|item| {
            let (u, c) = item.split_once(':').ok_or_else(|| usage(format!("box {item:?} is not of the form u:c")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("{s:?} is not a number")));
            Ok((parse(u)?, parse(c)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(HeterogeneousSpec::from_pairs(&pairs)?)
}

fn heterogeneous(p: &Problem) -> CliResult<HeterogeneousSpec> {
    let text = p.boxes.as_deref().ok_or_else(|| usage("--boxes is required for --regime het"))?;
    parse_boxes(text)
}

fn params_of(p: &Problem) -> Value {
    json!({
        "regime": p.regime.name(),
        "ubar": p.ubar,
        "c": p.c,
        "n": p.n,
        "boxes": p.boxes,
    })
}

fn corr_solve(spec: &HomogeneousSpec, regime: Regime) -> CorrSolution {
    match regime {
        Regime::CorrIntra => corr::solve_corr_intrapersonal(spec),
        _ => corr::solve_corr_commitment(spec),
    }
}

fn corr_json(sol: &CorrSolution) -> Value {
    json!({
        "mode": sol.mode,
        "alpha": sol.policy.as_slice(),
        "regret": sol.regret_n().get(),
        "regret_per_k": sol.regret.iter().map(|r| r.get()).collect::<Vec<_>>(),
        "worst_case_p": sol.worst_case_p_n(),
        "worst_case_p_per_k": sol.worst_case_p,
        "optout": sol.opts_out(),
        "optout_threshold": sol.optout_threshold,
    })
}

fn cmd_solve(a: &SolveArgs) -> CliResult<Rendered> {
    let p = &a.problem;
    let (results, table) = match p.regime {
        Regime::Indep => {
            let spec = homogeneous(p)?;
            let sol = indep::solve_indep(&spec);
            let mut t = Table::new(&["k", "alpha", "regret"]);
            for k in 1..=spec.n() {
                t.push(vec![k.into(), sol.policy.alpha(k).into(), indep::regret_star(k, &spec).into()]);
            }
            let r = json!({
                "alpha": sol.policy.as_slice(),
                "regret": sol.regret.get(),
                "worst_case_p": sol.worst_case_p,
            });
            (r, t)
        }
        Regime::Corr | Regime::CorrIntra => {
            let spec = homogeneous(p)?;
            let sol = corr_solve(&spec, p.regime);
            let mut t = Table::new(&["k", "alpha", "regret", "worst_case_p"]);
            for k in 1..=spec.n() {
                t.push(vec![
                    k.into(),
                    sol.policy.alpha(k).into(),
                    sol.regret[k - 1].get().into(),
                    sol.worst_case_p[k - 1].into(),
                ]);
            }
            let mut r = corr_json(&sol);
            if p.regime == Regime::Corr {
                r["naive_trajectory"] = json!(corr::naive_trajectory(&spec));
            }
            (r, t)
        }
        Regime::Het => {
            let spec = heterogeneous(p)?;
            let sol = het::solve_het(&spec)?;
            let s = sol.summary();
            let mut t = Table::new(&["box", "ubar", "c", "weight", "gamma"]);
            t.push(vec!["outside".into(), 0.0.into(), 0.0.into(), s.outside.into(), 1.0.into()]);
            for (i, b) in spec.boxes().iter().enumerate() {
                t.push(vec![i.into(), b.ubar.into(), b.c.into(), s.weights[i].into(), s.gammas[i].into()]);
            }
            let r = json!({
                "outside": s.outside,
                "weights": s.weights,
                "gammas": s.gammas,
                "regret": s.regret.get(),
                "order": spec.order(),
            });
            (r, t)
        }
        Regime::Interim => {
            let spec = homogeneous(p)?;
            let rep = interim::solve_interim(&spec)?;
            let (a1, a2) = interim::interim_two_box_intrapersonal(&spec);
            let t = Table::fields(vec![
                ("m", rep.policy.m.into()),
                ("alpha", rep.policy.alpha.into()),
                ("regret", rep.regret.get().into()),
                ("worst_p_high", rep.worst_p_high.into()),
                ("residual", rep.residual.into()),
                ("degenerate_tie", rep.degenerate_tie.into()),
            ]);
            let r = json!({
                "m": rep.policy.m,
                "alpha": rep.policy.alpha,
                "phi": rep.policy.phi,
                "regret": rep.regret.get(),
                "worst_p_high": rep.worst_p_high,
                "residual": rep.residual,
                "degenerate_tie": rep.degenerate_tie,
                "two_box_intrapersonal": [a1, a2],
            });
            (r, t)
        }
        Regime::TwoBox => {
            let spec = homogeneous(p)?;
            let sol = two_box::solve_two_box(&spec)?;
            let (pol, nat) = (sol.policy, sol.nature);
            let regime = match pol.regime {
                two_box::Regime::Small => "small",
                two_box::Regime::Large => "large",
            };
            let t = Table::fields(vec![
                ("regime", regime.into()),
                ("alpha2_0", pol.alpha2_0.into()),
                ("v_low", pol.v_low.into()),
                ("v_acc", pol.v_acc.into()),
                ("v_hat", nat.v_hat.into()),
                ("q", nat.q.into()),
                ("r", nat.r.into()),
                ("s", nat.s.into()),
                ("regret", sol.regret.get().into()),
            ]);
            let r = json!({
                "regime": regime,
                "alpha2_0": pol.alpha2_0,
                "v_low": pol.v_low,
                "v_acc": pol.v_acc,
                "v_hat": nat.v_hat,
                "q": nat.q,
                "r": nat.r,
                "s": nat.s,
                "q_alternative": nat.q_alternative,
                "regret": sol.regret.get(),
            });
            (r, t)
        }
    };
    let text = render("solve", &a.output, Format::Json, params_of(p), results, table);
    Ok((text, a.output.out.clone(), EXIT_OK))
}

fn grid(from: f64, to: f64, steps: usize) -> CliResult<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) || steps == 0 {
        return Err(usage("--from/--to must be finite and --steps positive"));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect())
}

fn int_range(a: &SweepArgs) -> CliResult<(usize, usize)> {
    let from = a.from.unwrap_or(1.0);
    let to = a.to.ok_or_else(|| usage("--to is required for an n sweep"))?;
    if from < 1.0 || to < from || from.fract() != 0.0 || to.fract() != 0.0 {
        return Err(usage("an n sweep needs integers 1 <= --from <= --to"));
    }
    Ok((from as usize, to as usize))
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<Rendered> {
    let p = &a.problem;
    let mut params = params_of(p);
    params["sweep"] = json!(format!("{:?}", a.sweep).to_lowercase());
    params["from"] = json!(a.from);
    params["to"] = json!(a.to);
    params["steps"] = json!(a.steps);
    params["ctotal"] = json!(a.ctotal);
    let table = match (p.regime, a.sweep) {
        (Regime::Indep, SweepVar::N) => {
            let c = p.c.ok_or_else(|| usage("--c is required"))?;
            let (lo, hi) = int_range(a)?;
            let base = HomogeneousSpec::new(p.ubar, c, hi)?;
            let mut t = Table::new(&["n", "alpha", "regret"]);
            for n in lo..=hi {
                t.push(vec![n.into(), indep::alpha_star(n, &base).into(), indep::regret_star(n, &base).into()]);
            }
            t
        }
        (Regime::Indep, SweepVar::Q) => {
            let spec = homogeneous(p)?;
            let qs = grid(a.from.unwrap_or(0.0), a.to.unwrap_or(1.0), a.steps.unwrap_or(11))?;
            let mut t = Table::new(&["q", "n", "s"]);
            for q in qs {
                let prof = indep::search_count_profile(q, spec.n().max(2), &spec)?;
                for (k, s) in prof.values.iter().enumerate().take(spec.n()) {
                    t.push(vec![q.into(), (k + 1).into(), (*s).into()]);
                }
            }
            t
        }
        (Regime::Corr | Regime::CorrIntra, SweepVar::N) => {
            let c = p.c.ok_or_else(|| usage("--c is required"))?;
            let (lo, hi) = int_range(a)?;
            let spec = HomogeneousSpec::new(p.ubar, c, hi)?;
            let sol = corr_solve(&spec, p.regime);
            let mut t = Table::new(&["n", "alpha", "regret", "worst_case_p", "optout"]);
            for n in lo..=hi {
                let (alpha, optout) = match p.regime {
                    Regime::CorrIntra => (sol.policy.alpha(n), sol.policy.alpha(n) == 0.0),
                    _ => {
                        let own = corr::solve_corr_commitment(&spec.with_n(n)?);
                        (own.policy.alpha(n), own.opts_out())
                    }
                };
                t.push(vec![
                    n.into(),
                    alpha.into(),
                    sol.regret[n - 1].get().into(),
                    sol.worst_case_p[n - 1].into(),
                    optout.into(),
                ]);
            }
            t
        }
        (Regime::Interim, SweepVar::N) => {
            let c = p.c.ok_or_else(|| usage("--c is required"))?;
            let (lo, hi) = int_range(a)?;
            let mut t = Table::new(&["n", "m", "alpha", "regret"]);
            for n in lo..=hi {
                let rep = interim::solve_interim(&HomogeneousSpec::new(p.ubar, c, n)?)?;
                t.push(vec![n.into(), rep.policy.m.into(), rep.policy.alpha.into(), rep.regret.get().into()]);
            }
            t
        }
        (Regime::Het, SweepVar::Delta) => {
            let ctotal = a.ctotal.ok_or_else(|| usage("--ctotal is required for a delta sweep"))?;
            let steps = a.steps.unwrap_or(30);
            let deltas = match (a.from, a.to) {
                (None, None) => het::default_delta_grid(p.ubar, ctotal, steps),
                (from, to) => {
                    let hi = 0.95 * ctotal.min(2.0 * p.ubar - ctotal);
                    grid(from.unwrap_or(0.0), to.unwrap_or(hi), steps)?
                }
            };
            let rows = het::cost_asymmetry_sweep(p.ubar, ctotal, &deltas)?;
            let mut t = Table::new(&["delta", "a_i", "a_j", "total"]);
            for r in rows {
                t.push(vec![r.delta.into(), r.a_i.into(), r.a_j.into(), r.total.into()]);
            }
            t
        }
        (Regime::TwoBox, SweepVar::Ubar) => {
            let c = p.c.ok_or_else(|| usage("--c is required"))?;
            let from = a.from.unwrap_or(2.0 * c);
            let to = a.to.unwrap_or(8.0 * c);
            let mut t = Table::new(&["ubar", "regime", "alpha2_0", "regret", "binary_regret"]);
            for ubar in grid(from, to, a.steps.unwrap_or(25))? {
                let spec = HomogeneousSpec::new(ubar, c, 2)?;
                let sol = two_box::solve_two_box(&spec)?;
                let regime = match sol.policy.regime {
                    two_box::Regime::Small => "small",
                    two_box::Regime::Large => "large",
                };
                let binary = corr::solve_corr_commitment(&spec).regret_n().get();
                t.push(vec![
                    ubar.into(),
                    regime.into(),
                    sol.policy.alpha2_0.into(),
                    sol.regret.get().into(),
                    binary.into(),
                ]);
            }
            t
        }
        (r, v) => {
            return Err(usage(format!(
                "sweep {:?} is not available for --regime {}",
                format!("{v:?}").to_lowercase(),
                r.name()
            )))
        }
    };
    let results = table_json(&table);
    let text = render("sweep", &a.output, Format::Csv, params, results, table);
    Ok((text, a.output.out.clone(), EXIT_OK))
}

fn table_json(t: &Table) -> Value {
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, Value> = t
                .header
                .iter()
                .zip(row)
                .map(|(h, c)| {
                    let v = match c {
                        Cell::Num(x) => json!(x),
                        Cell::Int(i) => json!(i),
                        Cell::Text(s) => json!(s),
                        Cell::Bool(b) => json!(b),
                    };
                    (h.clone(), v)
                })
                .collect();
            Value::Object(obj)
        })
        .collect();
    json!({ "rows": rows })
}

#[derive(Debug, Deserialize)]
struct PolicyFile {
    alpha: Vec<f64>,
    regret: Option<f64>,
}

fn read_policy(path: &Path) -> CliResult<PolicyFile> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("malformed policy file: {e}")))
}

fn report_table(r: &SaddleReport) -> Table {
    Table::fields(vec![
        ("nature_gap", r.nature_gap.into()),
        ("dm_gap", r.dm_gap.into()),
        ("claimed_regret", r.claimed_regret.into()),
        ("tolerance", r.tolerance.into()),
        ("pass", r.pass.into()),
    ])
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<Rendered> {
    let p = &a.problem;
    let mut params = params_of(p);
    params["tol"] = json!(a.tol);
    params["grid"] = json!(a.grid);
    let mut grids = Grids::default();
    if let Some(g) = a.grid {
        grids.belief_points = g;
    }
    let (report, extra) = match p.regime {
        Regime::Indep => {
            let spec = homogeneous(p)?;
            let tol = a.tol.unwrap_or(1e-6);
            let rep = match &a.policy_file {
                Some(path) => {
                    let file = read_policy(path)?;
                    let pol = StationaryPolicy::new(file.alpha)?;
                    let claimed = file.regret.unwrap_or_else(|| indep::regret_star(spec.n(), &spec));
                    verify::saddle_check_indep_policy(&pol, claimed, &spec, tol, &grids)?
                }
                None => verify::saddle_check_indep(&spec, tol, &grids)?,
            };
            (rep, Value::Null)
        }
        Regime::Corr | Regime::CorrIntra => {
            if a.policy_file.is_some() {
                return Err(usage("--policy-file is supported for --regime indep only"));
            }
            let spec = homogeneous(p)?;
            let mode = if p.regime == Regime::Corr { CorrMode::Commitment } else { CorrMode::Intrapersonal };
            (verify::saddle_check_corr(&spec, a.tol.unwrap_or(1e-9), &grids, mode)?, Value::Null)
        }
        Regime::Het => {
            let spec = heterogeneous(p)?;
            let rep = verify::saddle_check_het(&spec, a.tol.unwrap_or(1e-6), &grids)?;
            let extra = json!({ "foc_max_abs": rep.foc_max_abs, "hessian_diag_max": rep.hessian_diag_max });
            (rep.saddle, extra)
        }
        Regime::Interim => {
            let spec = homogeneous(p)?;
            let rep = interim::solve_interim(&spec)?;
            let oracle = verify::interim_grid_oracle(&spec, 0..spec.n(), 1e-3, grids.belief_points)?;
            let claimed = rep.regret.get();
            let worst = (0..grids.belief_points)
                .map(|i| i as f64 / (grids.belief_points - 1) as f64)
                .chain([rep.worst_p_high])
                .map(|q| interim::interim_regret(&rep.policy, q, &spec).map(|r| r.get()))
                .collect::<crate::Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            let tol = a.tol.unwrap_or(1e-3);
            let saddle = SaddleReport::new(
                worst - claimed,
                claimed - oracle.regret,
                NatureBelief::IidBinary { p: rep.worst_p_high },
                tol,
                claimed,
                vec![format!(
                    "grid oracle: m = {}, alpha = {}, level difference {:.3e}",
                    oracle.m,
                    oracle.alpha,
                    (oracle.level() - (rep.policy.m as f64 + rep.policy.alpha)).abs()
                )],
            );
            let extra = json!({ "oracle_m": oracle.m, "oracle_alpha": oracle.alpha, "residual": rep.residual });
            (saddle, extra)
        }
        Regime::TwoBox => {
            let spec = homogeneous(p)?;
            let sol = two_box::solve_two_box(&spec)?;
            let size = a.grid.unwrap_or(200);
            let rep = two_box::verify_two_box(
                &sol.policy,
                &sol.nature,
                &spec,
                size,
                sol.regret.get(),
                a.tol.unwrap_or(1e-9),
            )?;
            let extra = json!({ "q_discrepancy": sol.nature.q_discrepancy() });
            (rep, extra)
        }
    };
    let mut results = serde_json::to_value(&report).expect("reports serialize");
    if !extra.is_null() {
        results["details"] = extra;
    }
    let code = if report.pass { EXIT_OK } else { EXIT_GAP };
    let text = render("verify", &a.output, Format::Json, params, results, report_table(&report));
    Ok((text, a.output.out.clone(), code))
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("{x:?} is not a number")))).collect()
}

fn parse_truth(s: &str) -> CliResult<NatureBelief> {
    let (kind, body) = s.split_once(':').ok_or_else(|| usage(format!("truth {s:?} is not of the form kind:value")))?;
    let scalar = |b: &str| b.trim().parse::<f64>().map_err(|_| usage(format!("{b:?} is not a number")));
    Ok(match kind {
        "iid" => NatureBelief::IidBinary { p: scalar(body)? },
        "needle" => NatureBelief::NeedleP { big_p: scalar(body)? },
        "profile" => NatureBelief::CountProfile { profile: CountProfile::new(parse_list(body)?)? },
        "pvec" => NatureBelief::HeteroPVector { p: parse_list(body)? },
        other => return Err(usage(format!("unknown truth kind {other:?}"))),
    })
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<Rendered> {
    let p = &a.problem;
    let truth = parse_truth(&a.truth)?;
    let mut params = params_of(p);
    params["truth"] = json!(a.truth);
    params["episodes"] = json!(a.episodes);
    params["seed"] = json!(a.seed);
    let result = match p.regime {
        Regime::Het => {
            let spec = heterogeneous(p)?;
            let NatureBelief::HeteroPVector { p: pv } = &truth else {
                return Err(usage("heterogeneous menus need a pvec: truth"));
            };
            let sol = het::solve_het(&spec)?;
            sim::simulate_het(&sol.policy, pv, &spec, a.episodes, a.seed)?
        }
        Regime::TwoBox => return Err(usage("simulation covers binary rewards only")),
        regime => {
            let spec = homogeneous(p)?;
            let policy = match &a.policy_file {
                Some(path) => StationaryPolicy::new(read_policy(path)?.alpha)?,
                None => match regime {
                    Regime::Indep => indep::solve_indep(&spec).policy,
                    Regime::Corr => corr::solve_corr_commitment(&spec).policy,
                    Regime::CorrIntra => corr::solve_corr_intrapersonal(&spec).policy,
                    _ => interim::solve_interim(&spec)?.policy.to_stationary(),
                },
            };
            sim::simulate(&policy, &truth, &spec, a.episodes, a.seed)?
        }
    };
    let results = serde_json::to_value(result).expect("results serialize");
    let table = Table::fields(vec![
        ("episodes", Cell::Int(result.episodes as i64)),
        ("mean_opened", result.mean_opened.into()),
        ("se_opened", result.se_opened.into()),
        ("mean_regret", result.mean_regret.into()),
        ("se_regret", result.se_regret.into()),
        ("seed", Cell::Text(result.seed.to_string())),
    ]);
    let text = render("simulate", &a.output, Format::Json, params, results, table);
    Ok((text, a.output.out.clone(), EXIT_OK))
}
