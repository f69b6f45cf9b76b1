//! `autobid`: bounds, curves, construction and profile verification, proxy
//! instances, learning runs and the brute-force probe.
//!
//! Exit codes: 0 verified (or plain success), 1 usage or input error,
//! 2 refuted, 3 inconclusive.

use autobid_poa::auction::{optimal_allocation, Instance, TypeSet};
use autobid_poa::bounds::{bound_min_type, bound_p, bound_pt_eta, bound_q_eta, curve, write_curve_csv, CURVES};
use autobid_poa::constructions::{self, lower_bounds, Params, NAMES};
use autobid_poa::equilibrium::{verify_ce_finite, verify_cce, verify_mne, DeviationSet, Verdict, VerifyConfig, DEFAULT_TOL};
use autobid_poa::error::{Error, Result};
use autobid_poa::learning::{run_repeated, summarize, write_history_csv, LearnerConfig, RepeatedGame, SUPPORT_FREQ, WINDOW};
use autobid_poa::probe::{brute_poa, ProbeSpec};
use autobid_poa::profile::Profile;
use autobid_poa::smoothness::poa_upper_bound;
use autobid_poa::special::beta_threshold;
use autobid_poa::welfare::proxy_instance;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "autobid", version, about = "Liquid-welfare bounds and equilibrium checks for first-price auctions with autobidders")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Upper bounds, the smoothness certificate and the best known lower bound for a type set.
    Bounds {
        /// Comma-separated types in [0, 1].
        #[arg(long, value_delimiter = ',', required = true)]
        types: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[arg(long, conflicts_with = "budget_free")]
        budgeted: bool,
        #[arg(long)]
        budget_free: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Writes a bound curve as `x,value,curve` CSV.
    Curves {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(CURVES))]
        which: String,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds a registered construction and verifies its equilibrium and ratio.
    VerifyConstruction {
        /// Construction name; all of them when omitted.
        #[arg(long)]
        name: Option<String>,
        /// Parameter overrides, `key=value`.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the instance JSON (single construction only).
        #[arg(long, requires = "name")]
        save_instance: Option<PathBuf>,
        /// Write the profile JSON (single construction only).
        #[arg(long, requires = "name")]
        save_profile: Option<PathBuf>,
    },
    /// Verifies a bid profile on an instance read from JSON files.
    VerifyProfile {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum, default_value_t = Class::Cce)]
        class: Class,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Deviation grid increment (critical points are always added).
        #[arg(long, default_value_t = 0.01)]
        grid: f64,
        /// Skip the constrained mixture stage; unresolved cases become inconclusive.
        #[arg(long)]
        pure_only: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Budget-free proxy instance of a budgeted instance under a profile.
    Proxy {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated single-item auction among learning bidders.
    Learn {
        #[arg(long, value_delimiter = ',', default_value = "1,0.5")]
        values: Vec<f64>,
        /// Types; all 1 when omitted.
        #[arg(long, value_delimiter = ',')]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 0.3)]
        reserve: f64,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 50_000)]
        rounds: usize,
        #[arg(long, value_enum, default_value_t = Algo::Hedge)]
        algorithm: Algo,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-round CSV log.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Best-response dynamics on random small instances; worst ratio among verified equilibria.
    BrutePoa {
        #[arg(long, value_delimiter = ',', required = true)]
        types: Vec<f64>,
        #[arg(long)]
        budgeted: bool,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        grid: f64,
        #[arg(long, default_value_t = 3)]
        max_agents: usize,
        #[arg(long, default_value_t = 3)]
        max_items: usize,
        #[arg(long, default_value_t = 0.02)]
        slack: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Cce,
    Mne,
    Ce,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Hedge,
    EpsilonGreedy,
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json(&read(path)?).map_err(|e| Error::InvalidInstance(format!("{}: {e}", path.display())))
}

fn load_profile(path: &Path) -> Result<Profile> {
    Profile::from_json(&read(path)?).map_err(|e| Error::InvalidProfile(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn code(v: Verdict) -> u8 {
    v.exit_code() as u8
}

#[derive(Serialize)]
struct BoundsReport {
    types: Vec<f64>,
    eta: f64,
    budgeted: bool,
    closed_form: Vec<(String, f64)>,
    rmp_upper: f64,
    rmp: autobid_poa::smoothness::RmpSolution,
    lower: Option<constructions::LowerBound>,
    tight: bool,
}

fn cmd_bounds(types: Vec<f64>, eta: f64, budgeted: bool, json: Option<PathBuf>) -> Result<u8> {
    let ts = TypeSet::new(types)?;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta must lie in [0, 1), got {eta}")));
    }
    let mut closed: Vec<(String, f64)> = Vec::new();
    if budgeted && eta == 0.0 {
        closed.push(("P(max T)".into(), bound_p(ts.max())));
    }
    if !budgeted {
        if ts.values().len() == 1 {
            let t = ts.max();
            closed.push((format!("P_{t}(eta)"), bound_pt_eta(t, eta)?));
        }
        if ts.values() == [0.0, 1.0] {
            closed.push(("Q(eta)".into(), bound_q_eta(eta)?));
        }
        if eta == 0.0 && ts.min() >= beta_threshold() {
            closed.push(("min-type bound".into(), bound_min_type(ts.min())?));
        }
    }
    let rmp = poa_upper_bound(&ts, eta, budgeted)?;
    let lower = lower_bounds(&ts, eta, budgeted)?.into_iter().next();
    let upper = closed.iter().map(|c| c.1).chain([rmp.implied_poa_upper]).fold(f64::INFINITY, f64::min);
    let tight = lower.as_ref().is_some_and(|l| (upper - l.ratio).abs() <= 1e-4);

    println!("types {:?}  eta {eta}  {}", ts.values(), if budgeted { "budgeted" } else { "budget-free" });
    println!("{:<24} {:>10}", "bound", "value");
    for (name, v) in &closed {
        println!("{name:<24} {v:>10.5}");
    }
    println!("{:<24} {:>10.5}   (mu {:?}, stage {})", "smoothness certificate", rmp.implied_poa_upper, rmp.mu, rmp.stage);
    match &lower {
        Some(l) => println!("{:<24} {:>10.5}   ({} {:?})", "lower bound", l.ratio, l.name, l.params),
        None => println!("{:<24} {:>10}", "lower bound", "no matching construction known"),
    }
    println!("tight: {tight}");
    if let Some(p) = json {
        let types = ts.values().to_vec();
        write_json(&p, &BoundsReport { types, eta, budgeted, closed_form: closed, rmp_upper: rmp.implied_poa_upper, rmp, lower, tight })?;
    }
    Ok(0)
}

fn cmd_curves(which: &str, points: usize, out: Option<PathBuf>) -> Result<u8> {
    let pts = curve(which, points)?;
    match out {
        Some(p) => write_curve_csv(std::fs::File::create(p)?, &pts)?,
        None => write_curve_csv(std::io::stdout().lock(), &pts)?,
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_construction(
    name: Option<String>,
    params: Vec<(String, f64)>,
    step: f64,
    tol: f64,
    json: Option<PathBuf>,
    save_instance: Option<PathBuf>,
    save_profile: Option<PathBuf>,
) -> Result<u8> {
    let names: Vec<String> = match &name {
        Some(n) => vec![n.clone()],
        None => NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let given: Params = params.into_iter().collect();
    let cfg = VerifyConfig { tol, ..VerifyConfig::default() };
    if let Some(n) = &name {
        let c = constructions::build(n, &given)?;
        if let Some(p) = save_instance {
            std::fs::write(p, c.instance.to_json() + "\n")?;
        }
        if let Some(p) = save_profile {
            std::fs::write(p, c.profile.to_json() + "\n")?;
        }
    }
    let empty = Params::new();
    let mut reports = Vec::new();
    let mut worst = 0u8;
    println!("{:<24} {:<9} {:>11} {:>11} {:>10} {:>9}  verified", "construction", "verdict", "ratio", "claimed", "upper", "gap");
    for n in &names {
        let r = constructions::verify(n, if name.is_some() { &given } else { &empty }, step, &cfg)?;
        let c = if r.verified {
            0
        } else if r.equilibrium.verdict == Verdict::Inconclusive {
            3
        } else {
            2
        };
        worst = worst.max(c);
        let opt = |x: Option<f64>, prec: usize| x.map_or("-".to_string(), |v| format!("{v:.prec$}"));
        println!(
            "{:<24} {:<9} {:>11.6} {:>11.6} {:>10} {:>9}  {}",
            r.name,
            format!("{:?}", r.equilibrium.verdict),
            r.ratio,
            r.claimed_ratio,
            opt(r.upper_bound, 5),
            opt(r.tightness_gap, 6),
            r.verified
        );
        reports.push(r);
    }
    if let Some(p) = json {
        if reports.len() == 1 {
            write_json(&p, &reports[0])?;
        } else {
            write_json(&p, &reports)?;
        }
    }
    Ok(worst)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_profile(
    instance: &Path,
    profile: &Path,
    class: Class,
    tol: f64,
    grid: f64,
    pure_only: bool,
    json: Option<PathBuf>,
) -> Result<u8> {
    let inst = load_instance(instance)?;
    let prof = load_profile(profile)?;
    prof.validate(inst.n, inst.m)?;
    let cfg = VerifyConfig { tol, mixture_search: !pure_only, ..VerifyConfig::default() };
    let dev = DeviationSet::for_profile(&inst, &prof, grid, &[])?;
    let r = match class {
        Class::Mne => verify_mne(&inst, &prof, &dev, &cfg)?,
        Class::Cce => verify_cce(&inst, &prof, &dev, &cfg)?,
        Class::Ce => match &prof {
            Profile::Finite(f) => verify_ce_finite(&inst, f, &dev, &cfg)?,
            _ => return Err(Error::InvalidProfile("the CE check needs a finite-support profile".into())),
        },
    };
    println!("verdict {:?} ({:?})", r.verdict, r.basis);
    println!(
        "feasible {}  epsilon {:.3e}  well-supported {}  LW {:.6}  OPT {:.6}  ratio {:.6}",
        r.constraints.feasible, r.epsilon, r.well_supported, r.lw, r.opt, r.ratio
    );
    if !r.constraints.feasible {
        println!("roi slack {:?}  budget slack {:?}", r.constraints.roi_slack, r.constraints.budget_slack);
    }
    if let Some(w) = &r.witness {
        println!("witness: agent {} gains {:.6} with {:?}", w.agent, w.gain, w.deviation);
    }
    if !r.note.is_empty() {
        println!("{}", r.note);
    }
    if let Some(p) = json {
        write_json(&p, &r)?;
    }
    Ok(code(r.verdict))
}

fn cmd_proxy(instance: &Path, profile: &Path, out: Option<PathBuf>) -> Result<u8> {
    let inst = load_instance(instance)?;
    let prof = load_profile(profile)?;
    let proxy = proxy_instance(&inst, &prof)?;
    let before = optimal_allocation(&inst)?.value;
    let after = optimal_allocation(&proxy)?.value;
    eprintln!("OPT {before:.12}  OPT(proxy) {after:.12}  sigmas {:?} -> {:?}", inst.sigmas, proxy.sigmas);
    match out {
        Some(p) => std::fs::write(p, proxy.to_json() + "\n")?,
        None => writeln!(std::io::stdout().lock(), "{}", proxy.to_json())?,
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_learn(
    values: Vec<f64>,
    sigmas: Vec<f64>,
    reserve: f64,
    eps: f64,
    rounds: usize,
    algorithm: Algo,
    seed: u64,
    log: Option<PathBuf>,
    json: Option<PathBuf>,
) -> Result<u8> {
    let n = values.len();
    let sigmas = if sigmas.is_empty() { vec![1.0; n] } else { sigmas };
    let game = RepeatedGame { values, sigmas, reserve, step: eps, rounds };
    let configs: Vec<LearnerConfig> = (0..n as u64)
        .map(|i| {
            let s = seed.wrapping_mul(n as u64).wrapping_add(i);
            match algorithm {
                Algo::Hedge => LearnerConfig::hedge(s),
                Algo::EpsilonGreedy => LearnerConfig::epsilon_greedy(s),
            }
        })
        .collect();
    let h = run_repeated(&game, &configs)?;
    let s = summarize(&h, WINDOW, SUPPORT_FREQ)?;
    println!("rounds {}  regret/T {:?}", s.rounds, s.regret_per_round);
    println!("sold fraction {:.4} overall, {:.4} in the final quarter", s.sold_fraction, s.window_sold_fraction);
    println!("final-window CCE: {} atoms, epsilon {:.3e}", s.cce_atoms, s.cce_epsilon);
    println!("supports {:?}", s.supports);
    if let Some(c) = &s.co_undominated {
        println!("co-undominated: {}", c.clean);
        for d in &c.dominated {
            println!("  agent {} bid {} dominated by {}", d.agent, d.action, d.dominated_by);
        }
    }
    if let Some(p) = log {
        write_history_csv(std::fs::File::create(p)?, &h)?;
    }
    if let Some(p) = json {
        write_json(&p, &s)?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_brute_poa(
    types: Vec<f64>,
    budgeted: bool,
    samples: usize,
    grid: f64,
    max_agents: usize,
    max_items: usize,
    slack: f64,
    seed: u64,
    json: Option<PathBuf>,
) -> Result<u8> {
    let spec = ProbeSpec { grid, max_agents, max_items, slack, ..ProbeSpec::new(types, budgeted, samples, seed) };
    let r = brute_poa(&spec)?;
    println!("bound {:.6} ({})  samples {}  converged {}  verified {}  refuted {}  inconclusive {}", r.bound, r.bound_rule, r.samples, r.converged, r.verified, r.refuted, r.inconclusive);
    println!("worst ratio {:.6}  within bound + {}: {}", r.worst_ratio, spec.slack, r.within_bound);
    if let Some(w) = &r.worst {
        println!("worst certificate: sample {}  bids {:?}  OPT {:.4}  LW {:.4}", w.sample, w.bids, w.opt, w.lw);
    }
    if let Some(p) = json {
        write_json(&p, &r)?;
    }
    Ok(if r.within_bound { 0 } else { 2 })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Bounds { types, eta, budgeted, budget_free: _, json } => cmd_bounds(types, eta, budgeted, json),
        Cmd::Curves { which, points, out } => cmd_curves(&which, points, out),
        Cmd::VerifyConstruction { name, params, step, tol, json, save_instance, save_profile } => {
            cmd_verify_construction(name, params, step, tol, json, save_instance, save_profile)
        }
        Cmd::VerifyProfile { instance, profile, class, tol, grid, pure_only, json } => {
            cmd_verify_profile(&instance, &profile, class, tol, grid, pure_only, json)
        }
        Cmd::Proxy { instance, profile, out } => cmd_proxy(&instance, &profile, out),
        Cmd::Learn { values, sigmas, reserve, eps, rounds, algorithm, seed, log, json } => {
            cmd_learn(values, sigmas, reserve, eps, rounds, algorithm, seed, log, json)
        }
        Cmd::BrutePoa { types, budgeted, samples, grid, max_agents, max_items, slack, seed, json } => {
            cmd_brute_poa(types, budgeted, samples, grid, max_agents, max_items, slack, seed, json)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(c) => ExitCode::from(c),
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
