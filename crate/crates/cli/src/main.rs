//! Command-line front end: configuration ingestion, one subcommand per
//! pipeline stage, CSV emission, and cross-check reports.
//!
//! Exit codes: 0 success, 1 numeric non-convergence or cross-check failure,
//! 2 input error.

use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use worldsheet::config::{parse_configuration, Chirality, LEVEL_MATCH_TOL};
use worldsheet::energy::energy_table;
use worldsheet::geometry::conformal_factor;
use worldsheet::integrate::{
    characteristic_number, default_schedule, integrate_euler_boundary, integrate_euler_pv,
    integrate_patches, Method, QuadratureResult, CHAR_NUMBER_TOL,
};
use worldsheet::spectra::{
    invert_two_parallel, spectrum_four_modes, spectrum_general, spectrum_surface,
    spectrum_three_modes, spectrum_two_parallel, Branch,
};
use worldsheet::{Config64, Error};

#[derive(Parser)]
#[command(
    name = "worldsheet",
    about = "Topological spectra and discretized energies of closed-string worldsheets"
)]
struct Cli {
    /// TOML configuration file (required by config-driven subcommands)
    #[arg(long, global = true)]
    config: Option<String>,
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<String>,
    /// Relative tolerance for cross-check verdicts
    #[arg(long, global = true, default_value_t = 0.01)]
    rel_tol: f64,
    /// Seed for randomized sweeps
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a configuration and report constraint residuals
    Validate,
    /// Sample the embedding and metric component on a grid (CSV)
    Embed(EmbedArgs),
    /// Integrate the Euler form and round to a characteristic number
    Euler(EulerArgs),
    /// Evaluate or invert a closed-form spectrum
    Spectrum(SpectrumArgs),
    /// Tabulate the discretized Hamiltonian (CSV)
    Energy(EnergyArgs),
    /// Compare numeric integration against the closed-form spectrum
    Crosscheck,
}

#[derive(Args)]
struct EmbedArgs {
    /// Samples per coordinate over [0, 2π)
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Pv,
    Boundary,
    Patch,
    All,
}

#[derive(Args)]
struct EulerArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    /// Acceptance tolerance for rounding the integral to an integer
    #[arg(long, default_value_t = CHAR_NUMBER_TOL)]
    tolerance: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    TwoParallel,
    ThreeModes,
    FourModes,
    General,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Greater,
    Smaller,
    Both,
}

impl BranchArg {
    fn branches(self) -> Vec<Branch> {
        match self {
            BranchArg::Greater => vec![Branch::Greater],
            BranchArg::Smaller => vec![Branch::Smaller],
            BranchArg::Both => vec![Branch::Greater, Branch::Smaller],
        }
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Greater => "greater",
        Branch::Smaller => "smaller",
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::TwoParallel)]
    family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    omega_k: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_l: f64,
    #[arg(long, default_value_t = 1.0)]
    r_k: f64,
    #[arg(long, default_value_t = 2.0)]
    rt_l: f64,
    /// Second right amplitude (three- and four-mode families)
    #[arg(long, default_value_t = 0.0)]
    r_k2: f64,
    /// Second left amplitude (four-mode family)
    #[arg(long, default_value_t = 0.0)]
    rt_l2: f64,
    /// Invert the two-parallel relation at this integer instead
    #[arg(long)]
    invert: Option<i64>,
    #[arg(long, value_enum, default_value_t = BranchArg::Greater)]
    branch: BranchArg,
    /// Emit an allowed-amplitude surface table (CSV) instead
    #[arg(long)]
    surface: bool,
    /// Comma-separated n values for --surface
    #[arg(long, default_value = "1,2,3,4,5")]
    n_set: String,
    /// Comma-separated r_k grid for --surface
    #[arg(long, default_value = "0.25,0.5,0.75,1.0,1.25,1.5,1.75,2.0")]
    r_grid: String,
}

#[derive(Args)]
struct EnergyArgs {
    #[arg(long, default_value_t = 1.0)]
    omega_k: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_l: f64,
    #[arg(long, default_value_t = 1.0)]
    r_k: f64,
    #[arg(long, default_value_t = 1.0)]
    h0: f64,
    #[arg(long, default_value_t = 1)]
    n_min: i64,
    #[arg(long, default_value_t = 20)]
    n_max: i64,
    #[arg(long, value_enum, default_value_t = BranchArg::Both)]
    branch: BranchArg,
    /// Order columns for direct gnuplot consumption (n, H_n per branch)
    #[arg(long)]
    gnuplot_friendly: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let code = match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = match &e {
                CliError::Input(_) => 2u8,
                CliError::Numeric(_) => 1,
            };
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    };
    if let Err(e) = emit(&cli.out, &out) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    code
}

enum CliError {
    Input(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Invariant(_) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn emit(path: &Option<String>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("writing {p}: {e}")),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| format!("stdout: {e}"))
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config64, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Input("this subcommand requires --config PATH".into()))?;
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("reading {path}: {e}")))?;
    Ok(parse_configuration(&text)?)
}

fn run(cli: &Cli, out: &mut String) -> CliResult {
    match &cli.command {
        Command::Validate => cmd_validate(cli, out),
        Command::Embed(a) => cmd_embed(cli, a, out),
        Command::Euler(a) => cmd_euler(cli, a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Energy(a) => cmd_energy(a, out),
        Command::Crosscheck => cmd_crosscheck(cli, out),
    }
}

fn push(out: &mut String, line: impl AsRef<str>) {
    out.push_str(line.as_ref());
    out.push('\n');
}

fn cmd_validate(cli: &Cli, out: &mut String) -> CliResult {
    let cfg = load_config(cli)?;
    let report = cfg.check(16);
    push(out, "command: validate");
    push(
        out,
        format!(
            "configuration: dimension={} alpha_prime={} modes={}",
            cfg.dimension,
            cfg.alpha_prime,
            cfg.modes.len()
        ),
    );
    push(
        out,
        format!("wave residual max (grid sweep): {:e}", report.wave_residual_max),
    );
    // randomized sweep on top of the deterministic grid
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut random_max: f64 = 0.0;
    for _ in 0..200 {
        let tau = rng.gen_range(0.0..std::f64::consts::TAU);
        let sigma = rng.gen_range(0.0..std::f64::consts::TAU);
        for r in cfg.wave_residual(tau, sigma) {
            random_max = random_max.max(r.abs());
        }
    }
    push(out, format!("wave residual max (random sweep): {random_max:e}"));
    push(
        out,
        format!("level-match residual: {:e}", report.level_match_residual),
    );
    if report.level_matched {
        push(out, "level matching: satisfied");
    } else {
        push(
            out,
            format!(
                "warning: level-matching residual exceeds {LEVEL_MATCH_TOL:e}; \
                 the configuration does not satisfy the closed-string constraint"
            ),
        );
    }
    push(out, "validate: ok");
    Ok(())
}

fn cmd_embed(cli: &Cli, args: &EmbedArgs, out: &mut String) -> CliResult {
    let cfg = load_config(cli)?;
    if args.grid == 0 {
        return Err(CliError::Input("--grid must be positive".into()));
    }
    let field = conformal_factor(&cfg);
    push(out, format!("# embedding grid, {0}x{0} over [0,2pi)^2", args.grid));
    push(out, format!("# alpha_prime = {}", cfg.alpha_prime));
    let dirs: Vec<usize> = cfg.transverse().collect();
    let cols: Vec<String> = dirs.iter().map(|d| format!("x_{d}")).collect();
    push(out, format!("tau,sigma,{},g_sigma_sigma", cols.join(",")));
    let h = std::f64::consts::TAU / args.grid as f64;
    for i in 0..args.grid {
        for j in 0..args.grid {
            let (tau, sigma) = (h * i as f64, h * j as f64);
            let x = cfg.embedding(tau, sigma);
            let xs: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
            push(
                out,
                format!("{tau},{sigma},{},{}", xs.join(","), field.value(tau, sigma)),
            );
        }
    }
    Ok(())
}

fn integrate(
    field: &worldsheet::Field64,
    method: Method,
) -> Result<QuadratureResult<f64>, Error> {
    let schedule = default_schedule();
    match method {
        Method::Pv2D => integrate_euler_pv(field, &schedule),
        Method::Boundary => integrate_euler_boundary(field, &schedule),
        Method::Patch => integrate_patches(field, &schedule),
    }
}

fn selected_methods(m: MethodArg) -> Vec<Method> {
    match m {
        MethodArg::Pv => vec![Method::Pv2D],
        MethodArg::Boundary => vec![Method::Boundary],
        MethodArg::Patch => vec![Method::Patch],
        MethodArg::All => vec![Method::Pv2D, Method::Boundary, Method::Patch],
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Pv2D => "pv",
        Method::Boundary => "boundary",
        Method::Patch => "patch",
    }
}

fn cmd_euler(cli: &Cli, args: &EulerArgs, out: &mut String) -> CliResult {
    let cfg = load_config(cli)?;
    let field = conformal_factor(&cfg);
    push(out, "command: euler");
    let mut failure: Option<CliError> = None;
    for method in selected_methods(args.method) {
        match integrate(&field, method) {
            Ok(res) => {
                push(
                    out,
                    format!(
                        "{}: value = {:.12} +- {:.3e}",
                        method_name(method),
                        res.value,
                        res.error_estimate
                    ),
                );
                if res.degenerate {
                    push(out, "warning: metric vanishes identically; value is 0 by convention");
                }
                match characteristic_number(&res, args.tolerance) {
                    Ok(cn) => push(
                        out,
                        format!(
                            "{}: characteristic number n = {} (deviation {:.3e})",
                            method_name(method),
                            cn.n,
                            cn.deviation
                        ),
                    ),
                    // a value away from the integers is a diagnosis, not a
                    // numeric failure
                    Err(e) => push(out, format!("{}: {e}", method_name(method))),
                }
            }
            Err(e) => {
                push(out, format!("{}: non-convergence: {e}", method_name(method)));
                failure.get_or_insert(e.into());
            }
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| CliError::Input(format!("bad {what} entry: {t:?}")))
        })
        .collect()
}

fn cmd_spectrum(args: &SpectrumArgs, out: &mut String) -> CliResult {
    if args.surface {
        let n_set: Vec<i64> = parse_list(&args.n_set, "--n-set")?;
        let r_grid: Vec<f64> = parse_list(&args.r_grid, "--r-grid")?;
        push(out, format!("# allowed-amplitude surface, omega_k = {}, omega_l = {}", args.omega_k, args.omega_l));
        push(out, "n,r_k,r_tilde_l,branch");
        for row in spectrum_surface(args.omega_k, args.omega_l, &n_set, &r_grid) {
            push(
                out,
                format!("{},{},{},{}", row.n, row.r_k, row.rt_l, branch_name(row.branch)),
            );
        }
        return Ok(());
    }
    if let Some(n) = args.invert {
        for branch in args.branch.branches() {
            let rt = invert_two_parallel(args.omega_k, args.omega_l, args.r_k, n, branch)?;
            push(
                out,
                format!("inverted amplitude ({}): r_tilde_l = {rt:.15}", branch_name(branch)),
            );
        }
        return Ok(());
    }
    let value = match args.family {
        FamilyArg::TwoParallel => {
            spectrum_two_parallel(args.omega_k, args.omega_l, args.r_k, args.rt_l)?
        }
        FamilyArg::ThreeModes => spectrum_three_modes(
            args.omega_k,
            args.omega_l,
            args.r_k,
            args.rt_l,
            args.r_k2,
        )?,
        FamilyArg::FourModes => spectrum_four_modes(
            args.omega_k,
            args.omega_l,
            args.r_k,
            args.rt_l,
            args.r_k2,
            args.rt_l2,
        )?,
        FamilyArg::General => {
            return Err(CliError::Input(
                "family=general is config-driven; use `crosscheck --config ...`".into(),
            ))
        }
    };
    push(out, format!("spectrum value: {value:.15}"));
    push(
        out,
        format!("nearest integer: {} (deviation {:.3e})", value.round() as i64, (value - value.round()).abs()),
    );
    Ok(())
}

fn cmd_energy(args: &EnergyArgs, out: &mut String) -> CliResult {
    if args.n_max < args.n_min {
        return Err(CliError::Input("--n-max must be >= --n-min".into()));
    }
    push(out, format!("# H0 = {}", args.h0));
    push(
        out,
        format!("# H_inf = {}", args.h0 + 2.0 * args.omega_k * args.r_k * args.r_k),
    );
    push(out, format!("# omega_k = {}", args.omega_k));
    push(out, format!("# omega_l = {}", args.omega_l));
    push(out, format!("# r_k = {}", args.r_k));
    let tables: Vec<_> = args
        .branch
        .branches()
        .into_iter()
        .map(|b| {
            energy_table(
                args.omega_k,
                args.omega_l,
                args.r_k,
                args.h0,
                args.n_min..=args.n_max,
                b,
            )
        })
        .collect();
    if args.gnuplot_friendly && tables.len() == 2 {
        // one row per n with both branch values side by side
        push(out, "n,H_n_greater,H_n_smaller");
        for (ga, sa) in tables[0].entries.iter().zip(&tables[1].entries) {
            push(out, format!("{},{},{}", ga.0, ga.1, sa.1));
        }
        return Ok(());
    }
    push(out, "n,H_n,branch");
    for t in &tables {
        for (n, h) in &t.entries {
            push(out, format!("{n},{h},{}", branch_name(t.branch)));
        }
    }
    Ok(())
}

/// Closed-form reference for a configuration, with a note on its standing.
enum ClosedForm {
    Exact(f64),
    Conjectured(f64),
    None(String),
}

fn closed_form(cfg: &Config64) -> ClosedForm {
    let rights: Vec<_> = cfg.modes.iter().filter(|m| m.chirality == Chirality::Right).collect();
    let lefts: Vec<_> = cfg.modes.iter().filter(|m| m.chirality == Chirality::Left).collect();
    if rights.is_empty() || lefts.is_empty() {
        // single chirality: no interaction, the integral vanishes
        return ClosedForm::Exact(0.0);
    }
    let disjoint = rights
        .iter()
        .all(|r| lefts.iter().all(|l| l.direction != r.direction));
    if disjoint {
        // perpendicular families integrate to zero identically
        return ClosedForm::Exact(0.0);
    }
    let same_dir = cfg.modes.windows(2).all(|w| w[0].direction == w[1].direction);
    if same_dir && rights.len() == 1 && lefts.len() == 1 {
        return match spectrum_two_parallel(
            rights[0].omega(),
            lefts[0].omega(),
            rights[0].amplitude,
            lefts[0].amplitude,
        ) {
            Ok(v) => ClosedForm::Exact(v),
            Err(e) => ClosedForm::None(e.to_string()),
        };
    }
    match spectrum_general(cfg) {
        Ok(rel) => ClosedForm::Conjectured(rel.lhs_value),
        Err(e) => ClosedForm::None(e.to_string()),
    }
}

fn cmd_crosscheck(cli: &Cli, out: &mut String) -> CliResult {
    let cfg = load_config(cli)?;
    let field = conformal_factor(&cfg);
    push(out, "command: crosscheck");
    let reference = closed_form(&cfg);
    let (target, label) = match &reference {
        ClosedForm::Exact(v) => (Some(*v), format!("closed form: {v:.12}")),
        ClosedForm::Conjectured(v) => (
            Some(*v),
            format!("closed form (conjectured general family): {v:.12}"),
        ),
        ClosedForm::None(why) => (
            None,
            format!("no closed form available ({why}); numeric-only report"),
        ),
    };
    push(out, label);
    let mut failed = false;
    for method in [Method::Pv2D, Method::Boundary, Method::Patch] {
        let res = match integrate(&field, method) {
            Ok(r) => r,
            Err(e) => {
                push(out, format!("{}: non-convergence: {e}", method_name(method)));
                failed = true;
                continue;
            }
        };
        match target {
            Some(t) => {
                let abs = (res.value - t).abs();
                let rel = abs / (1.0_f64).max(t.abs());
                let verdict = if rel <= cli.rel_tol { "PASS" } else { "FAIL" };
                failed |= rel > cli.rel_tol;
                push(
                    out,
                    format!(
                        "{}: value = {:.12} +- {:.3e}  abs dev = {:.3e}  rel dev = {:.3e}  {}",
                        method_name(method),
                        res.value,
                        res.error_estimate,
                        abs,
                        rel,
                        verdict
                    ),
                );
            }
            None => push(
                out,
                format!(
                    "{}: value = {:.12} +- {:.3e}",
                    method_name(method),
                    res.value,
                    res.error_estimate
                ),
            ),
        }
    }
    if failed {
        return Err(CliError::Numeric(format!(
            "cross-check failed at rel-tol {}",
            cli.rel_tol
        )));
    }
    Ok(())
}
