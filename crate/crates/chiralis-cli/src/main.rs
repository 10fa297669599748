//! `chiralis` — exact computations with chiral differential operators on
//! Koszul complexes.
//!
//! The binary reads a ring-and-relations description (see [`input`]), runs
//! one construction or verification from the core library, and prints a
//! deterministic report as an aligned table or JSON. Every number is
//! computed in exact rational arithmetic; a verification subcommand either
//! proves its identities on the whole window or fails.
//!
//! Exit codes: `0` success, `1` a verification failed, `2` bad input.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use chiralis::chiral::{
    build_chiral_koszul, cohomology, homotopy_check, induced_character_check,
    lift_coordinate_change, ChiralError, ChiralFlavor, ChiralKoszul, CoordinateChange,
    DifferentialChoice,
};
use chiralis::koszul::{build_koszul, reduce_to_minimal, KoszulData, KoszulError};
use chiralis::linalg::qi;
use chiralis::vertex::{apply_mode, weight_inner_basis, FockState, Role, Window};
use chiralis::weyl::{fat_point_complex, spectral_complex};
use chiralis::{Parity, SuperPolynomial};

use input::{parse_input, pretty_print, ParsedInput};
use output::{Format, Report};

#[derive(Parser)]
#[command(
    name = "chiralis",
    version,
    about = "Exact chiral differential operators on Koszul complexes",
    long_about = "Builds Koszul complexes, graded Weyl algebras, and chiral \
                  differential operator algebras from a ring-and-relations \
                  description, and runs exact (rational-arithmetic) \
                  computations and verifications on them."
)]
struct Cli {
    #[command(subcommand)]
    command: TopCommand,
}

#[derive(Subcommand)]
enum TopCommand {
    /// Koszul complexes of relation sequences.
    #[command(subcommand)]
    Koszul(KoszulCommand),
    /// Graded Weyl-algebra operator complexes.
    #[command(subcommand)]
    Weyl(WeylCommand),
    /// Chiral differential operators.
    #[command(subcommand)]
    Cdo(CdoCommand),
}

#[derive(Subcommand)]
enum KoszulCommand {
    /// Print a minimal presentation of the input complex.
    ///
    /// Relations that are linear in a base variable are eliminated together
    /// with that variable; the output is in the input format and reparses.
    Minimize(InputJob),
}

#[derive(Subcommand)]
enum WeylCommand {
    /// Kernel dimensions of the two-term operator complex of ℂ[x]/(xⁿ).
    Fatpoint {
        /// Order of the fat point (≥ 1).
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// H⁰ of the operator complex of the input, per inner degree.
    Cohomology(InputJob),
}

#[derive(Subcommand)]
enum CdoCommand {
    /// Cohomology table of the chiral algebra, per (weight, inner, coh).
    Cohomology {
        /// Input description file.
        input: PathBuf,
        /// Which chiral algebra to build.
        #[arg(long, value_enum, default_value_t = FlavorArg::Plain)]
        flavor: FlavorArg,
        /// Which differential to take cohomology of.
        #[arg(long, value_enum, default_value_t = DiffArg::Koszul)]
        diff: DiffArg,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run the exact verification battery: square-zero differentials, mode
    /// commutators, superconformal homotopy identities, identity-lift checks.
    Verify(InputJob),
    /// Compare the graded character against induction from weight-zero
    /// singular vectors, by two independent counts.
    Character(InputJob),
}

#[derive(Args)]
struct InputJob {
    /// Input description file.
    input: PathBuf,
    #[command(flatten)]
    opts: CommonOpts,
}

#[derive(Args, Clone, Copy)]
struct CommonOpts {
    /// Maximum conformal weight of the computation window.
    #[arg(short = 'W', long = "max-weight", default_value_t = 3)]
    max_weight: i64,
    /// Maximum |inner degree| of the computation window.
    #[arg(short = 'D', long = "max-inner", default_value_t = 8)]
    max_inner: i64,
    /// Keep only cohomological degrees in LO..HI (inclusive).
    #[arg(long, value_name = "LO..HI", value_parser = parse_coh_range)]
    coh_range: Option<(i64, i64)>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FlavorArg {
    /// Polynomial generators only.
    Plain,
    /// With de Rham forms adjoined.
    Derham,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DiffArg {
    /// The chiral Koszul differential.
    Koszul,
    /// The chiral de Rham differential (de Rham flavor only).
    Ddr,
    /// Their sum on the totalized degree.
    Total,
}

fn parse_coh_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, found `{s}`"))?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("`{lo}` is not an integer"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("`{hi}` is not an integer"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    /// Exit code 2: the input (file, flags, environment) is at fault.
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    /// Exit code 1: the computation ran but a verified identity failed.
    fn verification(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

fn chiral_failure(e: ChiralError) -> Failure {
    match e {
        ChiralError::NotSquareZero(_) => Failure::verification(e.to_string()),
        other => Failure::input(other.to_string()),
    }
}

/// One fully resolved unit of work.
#[derive(Debug)]
struct JobSpec {
    command: JobCommand,
    input: Option<PathBuf>,
    max_weight: i64,
    max_inner: i64,
    coh_range: Option<(i64, i64)>,
    format: Format,
    /// Optional cap on worker threads (`CHIRALIS_THREADS`). Graded
    /// components are independent; they are currently evaluated one at a
    /// time, which respects any cap, and results are assembled in canonical
    /// order either way.
    #[allow(dead_code)]
    threads: Option<usize>,
}

#[derive(Debug, PartialEq, Eq)]
enum JobCommand {
    Minimize,
    FatPoint { n: u32 },
    OperatorCohomology,
    ChiralCohomology { flavor: FlavorArg, diff: DiffArg },
    ChiralVerify,
    ChiralCharacter,
}

impl JobSpec {
    fn new(
        command: JobCommand,
        input: Option<PathBuf>,
        opts: CommonOpts,
        threads: Option<usize>,
    ) -> Result<Self, Failure> {
        if opts.max_weight < 0 {
            return Err(Failure::input("max weight (-W) must be nonnegative"));
        }
        if opts.max_inner < 0 {
            return Err(Failure::input("max inner degree (-D) must be nonnegative"));
        }
        if let JobCommand::FatPoint { n: 0 } = command {
            return Err(Failure::input("--n must be at least 1"));
        }
        Ok(JobSpec {
            command,
            input,
            max_weight: opts.max_weight,
            max_inner: opts.max_inner,
            coh_range: opts.coh_range,
            format: opts.format,
            threads,
        })
    }

    fn from_cli(cli: Cli, threads: Option<usize>) -> Result<Self, Failure> {
        match cli.command {
            TopCommand::Koszul(KoszulCommand::Minimize(j)) => {
                JobSpec::new(JobCommand::Minimize, Some(j.input), j.opts, threads)
            }
            TopCommand::Weyl(WeylCommand::Fatpoint { n, opts }) => {
                JobSpec::new(JobCommand::FatPoint { n }, None, opts, threads)
            }
            TopCommand::Weyl(WeylCommand::Cohomology(j)) => {
                JobSpec::new(JobCommand::OperatorCohomology, Some(j.input), j.opts, threads)
            }
            TopCommand::Cdo(CdoCommand::Cohomology { input, flavor, diff, opts }) => JobSpec::new(
                JobCommand::ChiralCohomology { flavor, diff },
                Some(input),
                opts,
                threads,
            ),
            TopCommand::Cdo(CdoCommand::Verify(j)) => {
                JobSpec::new(JobCommand::ChiralVerify, Some(j.input), j.opts, threads)
            }
            TopCommand::Cdo(CdoCommand::Character(j)) => {
                JobSpec::new(JobCommand::ChiralCharacter, Some(j.input), j.opts, threads)
            }
        }
    }
}

fn parse_threads(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("CHIRALIS_THREADS must be a positive integer, got `{s}`")),
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("CHIRALIS_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::input(format!("CHIRALIS_THREADS: {e}"))),
        Ok(s) => parse_threads(&s).map(Some).map_err(Failure::input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match threads_from_env().and_then(|threads| JobSpec::from_cli(cli, threads)).and_then(run_job)
    {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run_job(job: JobSpec) -> Result<(String, u8), Failure> {
    match job.command {
        JobCommand::FatPoint { n } => fat_point_job(&job, n),
        JobCommand::Minimize => minimize_job(&job, &read_input(&job)?),
        JobCommand::OperatorCohomology => operator_cohomology_job(&job, &read_input(&job)?),
        JobCommand::ChiralCohomology { flavor, diff } => {
            chiral_cohomology_job(&job, &read_input(&job)?, flavor, diff)
        }
        JobCommand::ChiralVerify => verify_job(&job, &read_input(&job)?),
        JobCommand::ChiralCharacter => character_job(&job, &read_input(&job)?),
    }
}

fn read_input(job: &JobSpec) -> Result<ParsedInput, Failure> {
    let path = job.input.as_ref().expect("command takes an input file");
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_input(&text).map_err(|e| Failure::input(e.to_string()))
}

/// Builds the Koszul complex, attributing sequence-element complaints to
/// their source lines.
fn build_complex(parsed: &ParsedInput) -> Result<KoszulData, Failure> {
    build_koszul(&parsed.ring, &parsed.relations).map_err(|e| {
        let line = match &e {
            KoszulError::NotEven(i) | KoszulError::Inhomogeneous(i) | KoszulError::ZeroElement(i) => {
                parsed.rel_lines.get(*i).copied()
            }
            _ => None,
        };
        match line {
            Some(l) => Failure::input(format!("line {l}: {e}")),
            None => Failure::input(e.to_string()),
        }
    })
}

/// Build window for a chiral complex. The differential states have conformal
/// weight one, so the window must admit them even when only the weight-zero
/// table was requested; reported entries still honor the requested bounds,
/// because the differentials preserve weight.
fn build_window(job: &JobSpec) -> Window {
    Window { max_weight: job.max_weight.max(1), max_inner: job.max_inner }
}

/// Converts an exact count to JSON, falling back to a decimal string when it
/// exceeds the integer range JSON can carry.
fn count_value(n: u128) -> Value {
    match u64::try_from(n) {
        Ok(small) => Value::from(small),
        Err(_) => Value::from(n.to_string()),
    }
}

fn fat_point_job(job: &JobSpec, n: u32) -> Result<(String, u8), Failure> {
    let fp = fat_point_complex(n);
    let ni = n as i64;
    let mut rep = Report::new(&["j", "kernel_dim"]);
    for j in 1 - ni..=ni - 1 {
        rep.push(json!({"j": j, "kernel_dim": fp.kernel_dim(j)}));
    }
    rep.set_meta("n", n);
    rep.set_meta("h0_dim", fp.h0_dim());
    rep.add_trailer(format!("H0 dim = {}", fp.h0_dim()));
    Ok((rep.render(job.format), 0))
}

fn minimize_job(job: &JobSpec, parsed: &ParsedInput) -> Result<(String, u8), Failure> {
    let k = build_complex(parsed)?;
    let red = reduce_to_minimal(&k).map_err(|e| match e {
        KoszulError::InvalidReduction(_) | KoszulError::IdentityFails(_) => {
            Failure::verification(e.to_string())
        }
        other => Failure::input(other.to_string()),
    })?;
    let minimal = &red.minimal;
    let text = match job.format {
        Format::Tsv => {
            let presentation = ParsedInput {
                ring: minimal.base_ring().clone(),
                relations: minimal.sequence().to_vec(),
                rel_lines: Vec::new(),
            };
            format!(
                "# minimal presentation: kept {} of {} relations\n{}",
                minimal.sequence_len(),
                k.sequence_len(),
                pretty_print(&presentation)
            )
        }
        Format::Json => {
            let vars: Vec<Value> = minimal
                .base_ring()
                .vars()
                .iter()
                .map(|v| {
                    json!({
                        "name": v.name,
                        "parity": match v.parity { Parity::Even => "even", Parity::Odd => "odd" },
                        "inner": v.inner,
                        "coh": v.bidegree.0,
                    })
                })
                .collect();
            let rels: Vec<Value> =
                minimal.sequence().iter().map(|r| Value::from(r.to_string())).collect();
            let pivots: Vec<Value> = red
                .pivots
                .iter()
                .map(|&(rel, var)| {
                    json!({"relation": rel, "variable": k.base_ring().var(var).name})
                })
                .collect();
            let doc = json!({
                "vars": vars,
                "rels": rels,
                "meta": {
                    "kept_relations": minimal.sequence_len(),
                    "original_relations": k.sequence_len(),
                    "pivots": pivots,
                },
            });
            let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
            out.push('\n');
            out
        }
    };
    Ok((text, 0))
}

fn operator_cohomology_job(job: &JobSpec, parsed: &ParsedInput) -> Result<(String, u8), Failure> {
    let k = build_complex(parsed)?;
    let sc = spectral_complex(&k, job.max_inner).map_err(|e| Failure::input(e.to_string()))?;
    let mut rep = Report::new(&["inner", "dim"]);
    for (&d, &dim) in sc.h0_by_inner() {
        if dim > 0 {
            rep.push(json!({"inner": d, "dim": dim}));
        }
    }
    rep.set_meta("max_inner", job.max_inner);
    rep.set_meta("h0_total", sc.h0_total());
    rep.add_trailer(format!("H0 total = {}", sc.h0_total()));
    Ok((rep.render(job.format), 0))
}

fn flavor_of(arg: FlavorArg) -> ChiralFlavor {
    match arg {
        FlavorArg::Plain => ChiralFlavor::Plain,
        FlavorArg::Derham => ChiralFlavor::DeRham,
    }
}

fn choice_of(arg: DiffArg) -> DifferentialChoice {
    match arg {
        DiffArg::Koszul => DifferentialChoice::Koszul,
        DiffArg::Ddr => DifferentialChoice::DeRham,
        DiffArg::Total => DifferentialChoice::Total,
    }
}

fn chiral_cohomology_job(
    job: &JobSpec,
    parsed: &ParsedInput,
    flavor: FlavorArg,
    diff: DiffArg,
) -> Result<(String, u8), Failure> {
    if diff == DiffArg::Ddr && flavor == FlavorArg::Plain {
        return Err(Failure::input("--diff ddr requires --flavor derham"));
    }
    let k = build_complex(parsed)?;
    let ck =
        build_chiral_koszul(&k, flavor_of(flavor), build_window(job)).map_err(chiral_failure)?;
    let table = cohomology(&ck, choice_of(diff), job.max_weight, job.max_inner)
        .map_err(chiral_failure)?;
    let mut entries = table.entries().to_vec();
    entries.sort_by_key(|e| (e.weight, e.inner, e.coh));
    if let Some((lo, hi)) = job.coh_range {
        entries.retain(|e| lo <= e.coh && e.coh <= hi);
    }
    let mut rep = Report::new(&["weight", "inner", "coh", "dim"]);
    let mut total = 0usize;
    for e in &entries {
        total += e.dim;
        rep.push(json!({"weight": e.weight, "inner": e.inner, "coh": e.coh, "dim": e.dim}));
    }
    rep.set_meta("flavor", match flavor { FlavorArg::Plain => "plain", FlavorArg::Derham => "derham" });
    rep.set_meta("diff", match diff { DiffArg::Koszul => "koszul", DiffArg::Ddr => "ddr", DiffArg::Total => "total" });
    rep.set_meta("max_weight", job.max_weight);
    rep.set_meta("max_inner", job.max_inner);
    rep.set_meta("total_dim", total);
    rep.add_trailer(format!("total dim = {total}"));
    Ok((rep.render(job.format), 0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum CheckOutcome {
    Pass,
    Fail,
    Skipped(String),
}

/// `[∂_{x_i(m)}, x_{j(n−1)}] = δ_{ij} δ_{m,−n} Id` on every basis state of
/// the window, for all generator pairs and |m|, |n| ≤ 2.
fn commutators_hold(ck: &ChiralKoszul, max_weight: i64, max_inner: i64) -> Result<bool, Failure> {
    let spec = ck.spec();
    let vertex = |e: chiralis::vertex::VertexError| Failure::input(e.to_string());
    for w in 0..=max_weight {
        for d in -max_inner..=max_inner {
            for mono in weight_inner_basis(spec, w, d).map_err(vertex)? {
                let v = FockState::monomial(spec, mono, qi(1)).map_err(vertex)?;
                for i in 0..spec.len() {
                    for j in 0..spec.len() {
                        let both_odd = spec.pair(i).parity == Parity::Odd
                            && spec.pair(j).parity == Parity::Odd;
                        for m in -2i64..=2 {
                            for n in -2i64..=2 {
                                let bv = apply_mode(j, Role::Function, n - 1, &v).map_err(vertex)?;
                                let abv = apply_mode(i, Role::Conjugate, m, &bv).map_err(vertex)?;
                                let av = apply_mode(i, Role::Conjugate, m, &v).map_err(vertex)?;
                                let bav = apply_mode(j, Role::Function, n - 1, &av).map_err(vertex)?;
                                let bracket = if both_odd { &abv + &bav } else { &abv - &bav };
                                let expected = if i == j && m == -n {
                                    v.clone()
                                } else {
                                    FockState::zero(spec)
                                };
                                if bracket != expected {
                                    return Ok(false);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// The identity coordinate change, as a lift check: products, intertwining,
/// and the second-order-pole anomaly are all verified from scratch.
fn identity_lift_passes(ck: &ChiralKoszul, k: &KoszulData) -> Result<bool, Failure> {
    let vars: Vec<SuperPolynomial> =
        (0..k.base_len()).map(|i| SuperPolynomial::variable(k.base_ring(), i)).collect();
    let change = CoordinateChange::Polynomial { forward: vars.clone(), inverse: vars };
    let lift = lift_coordinate_change(ck, ck, &change).map_err(chiral_failure)?;
    Ok(lift.report().pass())
}

fn verify_job(job: &JobSpec, parsed: &ParsedInput) -> Result<(String, u8), Failure> {
    let k = build_complex(parsed)?;
    let mut checks: Vec<(&'static str, CheckOutcome)> = Vec::new();
    let skip = |why: &str| CheckOutcome::Skipped(why.to_string());

    // Creation modes raise the weight by at most 2 for |m| ≤ 2, and the
    // commutator applies two of them, so the window is padded by 4.
    let padded = Window { max_weight: job.max_weight + 4, max_inner: job.max_inner };
    let plain = match build_chiral_koszul(&k, ChiralFlavor::Plain, padded) {
        Ok(ck) => {
            checks.push(("square-zero (koszul differential)", CheckOutcome::Pass));
            Some(ck)
        }
        Err(ChiralError::NotSquareZero(_)) => {
            checks.push(("square-zero (koszul differential)", CheckOutcome::Fail));
            None
        }
        Err(other) => return Err(Failure::input(other.to_string())),
    };

    match &plain {
        Some(ck) => {
            let ok = commutators_hold(ck, job.max_weight, job.max_inner)?;
            checks.push((
                "mode commutators",
                if ok { CheckOutcome::Pass } else { CheckOutcome::Fail },
            ));
        }
        None => checks.push(("mode commutators", skip("koszul differential unavailable"))),
    }

    // The superconformal states have weight 2, so the de Rham window is at
    // least that wide.
    let dr_window = Window { max_weight: job.max_weight.max(2), max_inner: job.max_inner };
    let derham = match build_chiral_koszul(&k, ChiralFlavor::DeRham, dr_window) {
        Ok(ck) => {
            checks.push(("square-zero (de Rham + koszul)", CheckOutcome::Pass));
            Some(ck)
        }
        Err(ChiralError::NotSquareZero(_)) => {
            checks.push(("square-zero (de Rham + koszul)", CheckOutcome::Fail));
            None
        }
        Err(other) => return Err(Failure::input(other.to_string())),
    };

    match &derham {
        Some(ck) => {
            let report = homotopy_check(ck, job.max_weight, job.max_inner)
                .map_err(chiral_failure)?;
            checks.push((
                "homotopy identities",
                if report.pass() { CheckOutcome::Pass } else { CheckOutcome::Fail },
            ));
        }
        None => checks.push(("homotopy identities", skip("de Rham differential unavailable"))),
    }

    let all_even =
        (0..k.base_len()).all(|i| k.base_ring().var(i).parity == Parity::Even);
    for (name, ck) in [
        ("identity lift (plain)", &plain),
        ("identity lift (de Rham)", &derham),
    ] {
        let outcome = match ck {
            None => skip("differential unavailable"),
            Some(_) if !all_even => skip("odd base variables"),
            Some(ck) => {
                if identity_lift_passes(ck, &k)? {
                    CheckOutcome::Pass
                } else {
                    CheckOutcome::Fail
                }
            }
        };
        checks.push((name, outcome));
    }

    let failed = checks.iter().any(|(_, o)| *o == CheckOutcome::Fail);
    let mut rep = Report::new(&["check", "result"]);
    for (name, outcome) in &checks {
        let result = match outcome {
            CheckOutcome::Pass => "PASS".to_string(),
            CheckOutcome::Fail => "FAIL".to_string(),
            CheckOutcome::Skipped(why) => format!("SKIPPED ({why})"),
        };
        rep.push(json!({"check": name, "result": result}));
    }
    rep.set_meta("max_weight", job.max_weight);
    rep.set_meta("max_inner", job.max_inner);
    rep.set_meta("ok", !failed);
    rep.add_trailer(format!("verify: {}", if failed { "FAIL" } else { "PASS" }));
    Ok((rep.render(job.format), u8::from(failed)))
}

fn character_job(job: &JobSpec, parsed: &ParsedInput) -> Result<(String, u8), Failure> {
    let k = build_complex(parsed)?;
    // Induction needs weight-zero singular dimensions at inner degrees up to
    // the table bound plus what W conjugate modes can shift.
    let max_degree = k.ring().vars().iter().map(|v| v.inner.abs()).max().unwrap_or(1).max(1);
    let wide = Window {
        max_weight: job.max_weight.max(1),
        max_inner: job.max_inner + job.max_weight * max_degree,
    };
    let ck = build_chiral_koszul(&k, ChiralFlavor::Plain, wide).map_err(chiral_failure)?;
    let report =
        induced_character_check(&ck, job.max_weight, job.max_inner).map_err(chiral_failure)?;
    let mut entries = report.entries.clone();
    entries.sort_by_key(|e| (e.weight, e.inner));
    let mut rep = Report::new(&["weight", "inner", "induced", "direct"]);
    for e in &entries {
        rep.push(json!({
            "weight": e.weight,
            "inner": e.inner,
            "induced": count_value(e.induced),
            "direct": count_value(e.direct),
        }));
    }
    rep.set_meta("max_weight", job.max_weight);
    rep.set_meta("max_inner", job.max_inner);
    rep.set_meta("ok", report.ok);
    rep.add_trailer(format!("character: {}", if report.ok { "PASS" } else { "FAIL" }));
    Ok((rep.render(job.format), u8::from(!report.ok)))
}
