//! Command-line front end.
//!
//! Every subcommand writes `<command>.json` and `<command>.csv` into `--out-dir` and prints the
//! JSON report on stdout. Failures print `{"error": {...}}` and exit with status 1; usage errors
//! exit with status 2.

mod report;
mod spec;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::capacity::{
    blahut_arimoto, bosonic_energy_bound, default_alpha_grid, depolarizing_cell_capacity, depolarizing_quoted_formula,
    ea_capacity_from_choi, erasure_cell_capacity, search_adaptive, search_nonadaptive, second_order_bound_states,
    strong_converse_bound_states,
};
use crate::error::{Error, Result};
use crate::gaussian::{squeezed_environment_fidelity, thermal_cell_capacity, ThermalEnsemble};
use crate::protocol::{
    certificate_for_pair, hhlw_adaptive_strategy, hhlw_codebook, nonadaptive_impossibility_certificate, simulate_adaptive,
    simulate_nonadaptive, ProtocolOutcome,
};

pub use report::{fmt_f64, write_atomic, Quantity, Report};
pub use spec::{
    parse_cell_document, parse_cell_spec, parse_json, BuiltCell, BuiltStrategy, CellSpec, ChannelSpec, CodebookSpec,
    DecoderSpec, GroupSpec, MatrixSpec, StrategySpec,
};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "QREADING_THREADS";

const BA_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "qreading", version, about = "Reading capacities and protocols for quantum memory cells")]
pub struct Cli {
    /// Directory receiving the JSON report and CSV table.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct CellArgs {
    /// Path to a cell document.
    #[arg(long, conflicts_with = "cell_json")]
    pub cell: Option<PathBuf>,
    /// Inline cell document.
    #[arg(long)]
    pub cell_json: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Blahut–Arimoto capacity and the closed forms that apply to the cell.
    Capacity {
        #[command(flatten)]
        cell: CellArgs,
        /// Certified gap at which the iteration stops.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Normal-approximation upper bound on the rate at blocklength n.
    SecondOrder {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
    },
    /// Bound on the success probability of any code of rate R at blocklength n.
    StrongConverse {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rate: f64,
        /// Comma-separated α values; defaults to the built-in grid.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Runs a reading protocol and reports its success probability.
    Simulate {
        #[command(flatten)]
        cell: CellArgs,
        /// Codebook document; optional when the cell document embeds one.
        #[arg(long)]
        codebook: Option<PathBuf>,
        /// Strategy document.
        #[arg(long)]
        strategy: PathBuf,
    },
    /// Adaptive zero-error reading and the non-adaptive impossibility certificate.
    ZeroErrorDemo {
        /// Largest codeword length certified.
        #[arg(long, default_value_t = 3)]
        max_n: usize,
    },
    /// Capacity of a thermal-environment cell under Fock truncation.
    Thermal {
        #[command(flatten)]
        cell: CellArgs,
        /// Fock cutoff; overrides the cell document.
        #[arg(long)]
        cutoff: Option<usize>,
        /// Photon numbers used when no cell document is given.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        photon_numbers: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Heuristic search for the weak-converse quantities.
    WeakConverse {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Reference dimension for the adaptive search; 0 skips it.
        #[arg(long, default_value_t = 2)]
        r_dim: usize,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.to_json(cli.seed)).expect("json"));
            0
        }
        Err(e) => {
            println!("{}", error_body(&e));
            1
        }
    }
}

/// `{"error": {"kind": ..., "message": ...}}`.
pub fn error_body(e: &Error) -> String {
    let kind = match e {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::NotSquare { .. } => "not_square",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::InvalidState(_) => "invalid_state",
        Error::InvalidChannel(_) => "invalid_channel",
        Error::InvalidPovm(_) => "invalid_povm",
        Error::OutOfRange { .. } => "out_of_range",
        Error::Domain(_) => "domain",
        Error::SupportViolation(_) => "support_violation",
        Error::Guard(_) => "guard",
        Error::Invalid(_) => "invalid",
    };
    let mut body = serde_json::json!({ "error": { "kind": kind, "message": e.to_string() } });
    if let Error::OutOfRange { name, .. } = e {
        body["error"]["parameter"] = Value::from(*name);
    }
    serde_json::to_string(&body).expect("json")
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs the command in a dedicated thread pool and writes its files.
pub fn execute(cli: &Cli) -> Result<Report> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let report = pool.install(|| dispatch(&cli.command, cli.seed))?;
    report.write(&cli.out_dir, cli.seed)?;
    Ok(report)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn load_cell(args: &CellArgs) -> Result<(CellSpec, Option<CodebookSpec>)> {
    match (&args.cell, &args.cell_json) {
        (Some(p), _) => parse_cell_document(&read_file(p)?),
        (None, Some(s)) => parse_cell_document(s.as_bytes()),
        (None, None) => Err(Error::Invalid("a cell is required: pass --cell or --cell-json".into())),
    }
}

fn dispatch(cmd: &Command, seed: u64) -> Result<Report> {
    match cmd {
        Command::Capacity { cell, tol } => capacity(&load_cell(cell)?.0, *tol),
        Command::SecondOrder { cell, n, eps } => second_order(&load_cell(cell)?.0, *n, *eps),
        Command::StrongConverse { cell, n, rate, alphas } => {
            strong_converse(&load_cell(cell)?.0, *n, *rate, alphas.clone().unwrap_or_else(default_alpha_grid))
        }
        Command::Simulate { cell, codebook, strategy } => {
            let (spec, embedded) = load_cell(cell)?;
            let code = match codebook {
                Some(p) => parse_json::<CodebookSpec>(&read_file(p)?, "codebook")?,
                None => embedded.ok_or_else(|| Error::Invalid("no codebook: pass --codebook or embed one".into()))?,
            };
            let strat = parse_json::<StrategySpec>(&read_file(strategy)?, "strategy")?;
            simulate(&spec, &code, &strat)
        }
        Command::ZeroErrorDemo { max_n } => zero_error_demo(*max_n),
        Command::Thermal { cell, cutoff, photon_numbers, tol } => {
            let spec = if cell.cell.is_some() || cell.cell_json.is_some() {
                load_cell(cell)?.0
            } else {
                CellSpec::Thermal { photon_numbers: photon_numbers.clone(), probs: None, cutoff: None, eta: None, n_s: None }
            };
            thermal(spec, *cutoff, *tol)
        }
        Command::WeakConverse { cell, restarts, steps, r_dim } => {
            weak_converse(&load_cell(cell)?.0, *restarts, *steps, *r_dim, seed)
        }
    }
}

fn header(r: &mut Report, spec: &CellSpec) {
    r.detail("cell", spec.kind());
}

fn capacity(spec: &CellSpec, tol: f64) -> Result<Report> {
    if let CellSpec::Thermal { .. } = spec {
        return thermal(spec.clone(), None, tol);
    }
    let built = spec.build()?;
    let ba = blahut_arimoto(&built.env_states()?, tol, BA_MAX_ITER)?;
    let mut r = Report::new("capacity");
    header(&mut r, spec);
    r.quantity("blahut_arimoto", Quantity::rate(ba.value, ba.gap));
    r.detail("optimizer", &ba.optimizer).detail("iterations", ba.iterations).detail("converged", ba.converged);
    match spec {
        CellSpec::Erasure { d, q } => {
            let c = erasure_cell_capacity(*d, *q)?;
            r.quantity("closed_form", Quantity::rate(c, 1e-12));
            r.quantity("difference", Quantity::rate(ba.value - c, ba.gap + 1e-12));
        }
        CellSpec::Depolarizing { d, q } => {
            let c = depolarizing_cell_capacity(*d, *q)?;
            let quoted = depolarizing_quoted_formula(*d, *q)?;
            r.quantity("closed_form", Quantity::rate(c, 1e-12));
            r.quantity("difference", Quantity::rate(ba.value - c, ba.gap + 1e-12));
            r.quantity("quoted_formula", Quantity::rate(quoted, 1e-12));
            r.quantity("quoted_formula_difference", Quantity::rate(c - quoted, 1e-12));
        }
        CellSpec::CovariantOrbit { base, .. } => {
            let c = ea_capacity_from_choi(&base.to_channel()?)?;
            r.quantity("closed_form", Quantity::rate(c, 1e-10));
            r.quantity("difference", Quantity::rate(ba.value - c, ba.gap + 1e-10));
        }
        _ => {}
    }
    Ok(r)
}

fn second_order(spec: &CellSpec, n: usize, eps: f64) -> Result<Report> {
    let s = second_order_bound_states(&spec.build()?.env_states()?, n, eps)?;
    let mut r = Report::new("second-order");
    header(&mut r, spec);
    r.quantity("capacity_term", Quantity::rate(s.capacity_term, s.capacity_gap))
        .quantity("variance", Quantity::plain(s.variance, s.variance_max - s.variance_min))
        .quantity("variance_min", Quantity::plain(s.variance_min, 0.0))
        .quantity("variance_max", Quantity::plain(s.variance_max, 0.0))
        .quantity("phi_inv", Quantity::plain(s.phi_inv, 1e-12))
        .quantity("bound", Quantity::rate(s.bound, s.capacity_gap));
    r.detail("n", n)
        .detail("eps", eps)
        .detail("optimizer_unique", s.optimizer_unique())
        .detail("face_enumerated", s.face_enumerated)
        .detail("optimizers", &s.optimizers)
        .detail("third_order", s.third_order_note);
    Ok(r)
}

fn strong_converse(spec: &CellSpec, n: usize, rate: f64, grid: Vec<f64>) -> Result<Report> {
    let s = strong_converse_bound_states(&spec.build()?.env_states()?, n, rate, &grid)?;
    let mut r = Report::new("strong-converse");
    header(&mut r, spec);
    r.quantity("exponent", Quantity::rate(s.exponent, 0.0))
        .quantity("best_alpha", Quantity::plain(s.best_alpha, 0.0))
        .quantity("p_succ_bound", Quantity::prob(s.p_succ_bound, 0.0));
    r.detail("n", n).detail("rate", rate).detail("vacuous", s.vacuous);
    let rows = s
        .points
        .iter()
        .map(|p| vec![fmt_f64(p.alpha), fmt_f64(p.renyi_information), fmt_f64(p.renyi_information_value), fmt_f64(p.term)])
        .collect();
    r.table(&["alpha", "renyi_information_upper", "renyi_information", "term"], rows);
    Ok(r)
}

fn outcome_report(r: &mut Report, out: &ProtocolOutcome, words: &[Vec<String>]) {
    r.quantity("p_succ", Quantity::prob(out.p_succ, 1e-12)).quantity("worst_case", Quantity::prob(out.worst_case, 1e-12));
    r.detail("per_message", &out.per_message).detail("outcome_probs", &out.outcome_probs);
    let rows = out
        .per_message
        .iter()
        .zip(words)
        .enumerate()
        .map(|(m, (p, w))| vec![(m + 1).to_string(), w.join(" "), fmt_f64(*p)])
        .collect();
    r.table(&["message", "word", "p_correct"], rows);
}

fn simulate(spec: &CellSpec, code: &CodebookSpec, strat: &StrategySpec) -> Result<Report> {
    let built = spec.build()?;
    let cell = built.memory_cell()?;
    let codebook = code.build(cell)?;
    let out = match strat.build(cell)? {
        BuiltStrategy::Adaptive(a) => simulate_adaptive(cell, &codebook, &a)?,
        BuiltStrategy::Nonadaptive { transmitter, decoder } => simulate_nonadaptive(cell, &codebook, &transmitter, &decoder)?,
    };
    let mut r = Report::new("simulate");
    header(&mut r, spec);
    r.detail("strategy", if matches!(strat, StrategySpec::Nonadaptive { .. }) { "nonadaptive" } else { "adaptive" });
    outcome_report(&mut r, &out, &code.words);
    Ok(r)
}

fn zero_error_demo(max_n: usize) -> Result<Report> {
    if max_n == 0 || max_n > 16 {
        return Err(Error::OutOfRange { name: "max_n", value: max_n as f64, allowed: "1 <= max_n <= 16" });
    }
    let cell = crate::channels::MemoryCell::hhlw();
    let out = simulate_adaptive(&cell, &hhlw_codebook(), &hhlw_adaptive_strategy())?;
    let gap = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let mut r = Report::new("zero-error-demo");
    r.detail("cell", "hhlw");
    r.quantity("adaptive_p_succ", Quantity::prob(out.p_succ, 1e-12));
    r.detail("adaptive_per_message", &out.per_message);
    let mut rows = Vec::new();
    let mut certs = Vec::new();
    for n in 1..=max_n {
        let c = nonadaptive_impossibility_certificate(n)?;
        let k = c.worst_pair.0.iter().zip(&c.worst_pair.1).filter(|(a, b)| a != b).count();
        r.quantity(&format!("certificate_min_eig_n{n}"), Quantity::plain(c.min_eigenvalue, 1e-12));
        rows.push(vec![
            n.to_string(),
            fmt_f64(c.min_eigenvalue),
            k.to_string(),
            fmt_f64(gap.powi(k as i32)),
            c.certified.to_string(),
        ]);
        certs.push(serde_json::json!({
            "n": n,
            "min_eigenvalue": c.min_eigenvalue,
            "mismatched_slots": k,
            "worst_pair": [c.worst_pair.0, c.worst_pair.1],
            "p_deviation": c.p_deviation,
            "certified": c.certified,
        }));
    }
    // one mismatched slot in a length-2 word, for comparison with the all-mismatched worst case
    r.quantity("certificate_single_mismatch_n2", Quantity::plain(certificate_for_pair(&[0, 0], &[0, 1])?, 1e-12));
    r.detail("certificates", certs);
    r.table(&["n", "min_eigenvalue", "mismatched_slots", "expected", "certified"], rows);
    Ok(r)
}

fn thermal(spec: CellSpec, cutoff: Option<usize>, tol: f64) -> Result<Report> {
    let CellSpec::Thermal { photon_numbers, probs, cutoff: spec_cutoff, eta, n_s } = spec else {
        return Err(Error::Invalid(format!("thermal needs a thermal cell, got `{}`", spec.kind())));
    };
    let k = photon_numbers.len();
    let p = probs.clone().unwrap_or_else(|| vec![1.0 / k.max(1) as f64; k]);
    let ens = match cutoff.or(spec_cutoff) {
        Some(c) => ThermalEnsemble::new(p, photon_numbers.clone(), c)?,
        None => ThermalEnsemble::with_auto_cutoff(p, photon_numbers.clone())?,
    };
    let cap = thermal_cell_capacity(&ens, tol)?;
    let mut r = Report::new("thermal");
    r.detail("cell", "thermal").detail("cutoff", ens.cutoff()).detail("photon_numbers", &photon_numbers);
    r.detail("optimizer", &cap.optimizer).detail("converged", cap.converged);
    r.quantity("capacity", Quantity::rate(cap.value, cap.gap));
    r.quantity("holevo_at_prior", Quantity::rate(ens.holevo()?, 1e-10));
    if let Some(ns) = n_s {
        r.quantity("energy_bound", Quantity::rate(bosonic_energy_bound(ns)?, 1e-12));
        if let Some(e) = eta {
            let fids = photon_numbers
                .iter()
                .map(|&x| squeezed_environment_fidelity(e, ns, x))
                .collect::<Result<Vec<_>>>()?;
            r.detail("environment_fidelity", fids);
        }
    }
    if let Some(e) = eta {
        r.detail("eta", e);
    }
    Ok(r)
}

fn weak_converse(spec: &CellSpec, restarts: usize, steps: usize, r_dim: usize, seed: u64) -> Result<Report> {
    let built = spec.build()?;
    let cell = built.memory_cell()?;
    let mut r = Report::new("weak-converse");
    header(&mut r, spec);
    let na = search_nonadaptive(cell, restarts, steps, seed)?;
    r.quantity("nonadaptive", Quantity::rate(na.value, 1e-9));
    r.detail("nonadaptive_p", &na.p).detail("restarts", restarts).detail("steps", steps);
    if r_dim > 0 {
        let ad = search_adaptive(cell, r_dim, restarts, steps, seed)?;
        r.quantity("adaptive", Quantity::rate(ad.value, 1e-9));
        r.detail("adaptive_p", &ad.p).detail("r_dim", r_dim);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_in(dir: &Path, args: &[&str]) -> (i32, Value) {
        let mut full = vec!["qreading", "--out-dir", dir.to_str().unwrap()];
        full.extend_from_slice(args);
        let code = run(full.clone());
        let cli = Cli::try_parse_from(full).unwrap();
        let name = match cli.command {
            Command::Capacity { .. } => "capacity",
            Command::SecondOrder { .. } => "second-order",
            Command::ZeroErrorDemo { .. } => "zero-error-demo",
            _ => unreachable!(),
        };
        let json = std::fs::read_to_string(dir.join(format!("{name}.json"))).map(|s| serde_json::from_str(&s).unwrap());
        (code, json.unwrap_or(Value::Null))
    }

    #[test]
    fn capacity_erasure() {
        let dir = tempfile::tempdir().unwrap();
        let (code, json) = run_in(dir.path(), &["capacity", "--cell-json", r#"{"kind":"erasure","d":2,"q":0.5}"#]);
        assert_eq!(code, 0);
        assert!((json["quantities"]["blahut_arimoto"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        let csv = std::fs::read_to_string(dir.path().join("capacity.csv")).unwrap();
        assert!(csv.lines().any(|l| l.starts_with("blahut_arimoto,")));
    }

    #[test]
    fn second_order_at_half() {
        let dir = tempfile::tempdir().unwrap();
        let (code, json) =
            run_in(dir.path(), &["second-order", "--n", "100", "--eps", "0.5", "--cell-json", r#"{"kind":"erasure","d":2,"q":0.25}"#]);
        assert_eq!(code, 0);
        let q = &json["quantities"];
        assert_eq!(q["bound"]["value"], q["capacity_term"]["value"]);
    }

    #[test]
    fn zero_error_values() {
        let dir = tempfile::tempdir().unwrap();
        let (code, json) = run_in(dir.path(), &["zero-error-demo"]);
        assert_eq!(code, 0);
        assert!((json["quantities"]["adaptive_p_succ"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        let c1 = json["quantities"]["certificate_min_eig_n1"]["value"].as_f64().unwrap();
        assert!((c1 - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["qreading", "frobnicate"]), 2);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(["qreading", "--out-dir", out, "capacity", "--cell-json", r#"{"kind":"erasure","d":2,"q":2}"#]), 1);
        assert_eq!(run(["qreading", "--out-dir", out, "capacity", "--cell-json", r#"{"kind":"hhlw"}"#]), 1);
    }

    #[test]
    fn error_body_names_parameter() {
        let e = parse_cell_spec(br#"{"kind":"erasure","d":2,"q":1.5}"#).unwrap_err();
        let v: Value = serde_json::from_str(&error_body(&e)).unwrap();
        assert_eq!(v["error"]["kind"], "out_of_range");
        assert_eq!(v["error"]["parameter"], "q");
    }
}
