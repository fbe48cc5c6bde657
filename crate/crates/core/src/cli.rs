//! The `qdeform` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input,
//! 3 numerical non-convergence, 4 degenerate fit data.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::fock::{fock_uncertainty_report, ladder_matrices, FockVector};
use crate::gauss::{GaussExpSum, GaussExpTerm};
use crate::observables::{
    energy_coherent_closed_form, uncertainty_coherent_closed_form, uncertainty_eigen_closed_form,
    uncertainty_report, UncertaintyReport,
};
use crate::operators::{annihilate_with, create_with, q_commutator_residual, CompositionOrder};
use crate::output::{Format, Table, Value};
use crate::qcore::{q_integer, spectrum_energy, DeformationParams};
use crate::specfit::{fit_levels, predict_levels, LevelData, DEFAULT_GRID_SIZE};
use crate::states::{
    coherent_density_limit_q0, coherent_fock, coherent_fock_dim, coherent_value,
    coherent_wavefunction, eigenstate, vacuum, CoherentParams, EIGENSTATE_MAX_N,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "qdeform",
    version,
    about = "q-deformed harmonic oscillator toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    x_max: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Eigen,
    Coherent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Fault {
    /// Compose shift and plane-wave factors of the ladder operators in reverse.
    OperatorOrder,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy levels E_n = omega([n] + q^n/2).
    Spectrum {
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Eigenfunction Psi_n sampled on a grid.
    Wavefn {
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Coherent state sampled on a grid.
    Coherent {
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda_im: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Uncertainty products of eigenstates or along a coherent-state sweep.
    Uncertainty {
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, value_enum, default_value = "eigen")]
        mode: Mode,
        /// Largest eigenstate index (eigen mode).
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        /// Number of |lambda| values (coherent mode).
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Largest |lambda| as a fraction of the disk radius (coherent mode).
        #[arg(long, default_value_t = 0.95)]
        lambda_max_frac: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check the algebraic identities and closed forms; exit 1 on any failure.
    Verify {
        /// Comma-separated deformation parameters.
        #[arg(long, default_value = "0.1,0.3,0.5,0.7,0.9")]
        q_list: String,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Threshold for the exact-algebra checks.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fit omega and q to observed levels read from a CSV file with header n,energy.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        q_grid_size: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DegenerateData(_) => EXIT_DEGENERATE,
        Error::NoConvergence { .. }
        | Error::QuadratureNoConvergence { .. }
        | Error::IllConditioned { .. }
        | Error::DimTooSmall { .. }
        | Error::NonFinite
        | Error::TooManyTerms { .. }
        | Error::ZeroState
        | Error::Inconsistent(_) => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

fn emit(table: &Table, out: &OutputArgs) -> Result<()> {
    let text = table.render(out.format);
    match &out.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::InvalidParameter(format!("cannot write output: {e}")))
        }
    }
}

fn grid(g: &GridArgs) -> Result<Vec<f64>> {
    if g.points < 2 {
        return Err(Error::InvalidParameter(format!(
            "points = {} must be at least 2",
            g.points
        )));
    }
    if !(g.x_min.is_finite() && g.x_max.is_finite() && g.x_min < g.x_max) {
        return Err(Error::InvalidParameter(format!(
            "need finite x_min < x_max, got {} and {}",
            g.x_min, g.x_max
        )));
    }
    let step = (g.x_max - g.x_min) / (g.points - 1) as f64;
    Ok((0..g.points)
        .map(|i| {
            if i + 1 == g.points {
                g.x_max
            } else {
                g.x_min + step * i as f64
            }
        })
        .collect())
}

fn check_n(n: usize) -> Result<()> {
    if n > EIGENSTATE_MAX_N {
        Err(Error::TooLargeN {
            n,
            max: EIGENSTATE_MAX_N,
        })
    } else {
        Ok(())
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Spectrum {
            q,
            omega,
            n_max,
            out,
        } => {
            emit(&spectrum_table(q, omega, n_max)?, &out)?;
            Ok(EXIT_OK)
        }
        Command::Wavefn { q, n, grid: g, out } => {
            emit(&wavefn_table(q, n, &grid(&g)?)?, &out)?;
            Ok(EXIT_OK)
        }
        Command::Coherent {
            q,
            omega,
            lambda_re,
            lambda_im,
            tol,
            grid: g,
            out,
        } => {
            let p = DeformationParams::new(q, omega)?;
            let cp = CoherentParams::new(Complex64::new(lambda_re, lambda_im), p)?;
            emit(&coherent_table(&cp, tol, &grid(&g)?)?, &out)?;
            Ok(EXIT_OK)
        }
        Command::Uncertainty {
            q,
            omega,
            mode,
            n_max,
            points,
            lambda_max_frac,
            tol,
            out,
        } => {
            let p = DeformationParams::new(q, omega)?;
            let table = match mode {
                Mode::Eigen => eigen_uncertainty_table(&p, n_max)?,
                Mode::Coherent => coherent_uncertainty_table(&p, points, lambda_max_frac, tol)?,
            };
            emit(&table, &out)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            q_list,
            n_max,
            omega,
            tol,
            inject_fault,
            out,
        } => {
            let qs = parse_q_list(&q_list)?;
            let order = match inject_fault {
                Some(Fault::OperatorOrder) => CompositionOrder::Reversed,
                None => CompositionOrder::AsWritten,
            };
            let checks = verification_suite(&qs, n_max, omega, tol, order)?;
            let mut table = Table::new(&["name", "max_residual", "threshold", "pass"]);
            table.meta("q_list", q_list.as_str());
            table.meta("n_max", n_max);
            let mut all = true;
            for c in &checks {
                all &= c.pass();
                table.push(vec![
                    c.name.into(),
                    c.max_residual.into(),
                    c.threshold.into(),
                    c.pass().into(),
                ]);
            }
            table.meta("all_pass", all);
            emit(&table, &out)?;
            Ok(if all { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
        Command::Fit {
            input,
            q_grid_size,
            out,
        } => {
            let text = std::fs::read_to_string(&input).map_err(|e| {
                Error::InvalidParameter(format!("cannot read {}: {e}", input.display()))
            })?;
            let data = parse_levels(&text)?;
            emit(&fit_table(&data, q_grid_size)?, &out)?;
            Ok(EXIT_OK)
        }
    }
}

fn spectrum_table(q: f64, omega: f64, n_max: usize) -> Result<Table> {
    check_n(n_max)?;
    let p = DeformationParams::new(q, omega)?;
    let mut t = Table::new(&["n", "energy", "energy_over_omega", "classical_energy"]);
    t.meta("q", q);
    t.meta("omega", omega);
    t.meta("energy_bound", p.energy_bound());
    for n in 0..=n_max as u32 {
        t.push(vec![
            n.into(),
            spectrum_energy(n, &p).into(),
            uncertainty_eigen_closed_form(n, &p).into(),
            ((n as f64 + 0.5) * omega).into(),
        ]);
    }
    Ok(t)
}

fn wavefn_table(q: f64, n: usize, xs: &[f64]) -> Result<Table> {
    check_n(n)?;
    let p = DeformationParams::new(q, 1.0)?;
    let psi = eigenstate(n, &p)?;
    let mut t = Table::new(&["x", "re", "im", "density"]);
    t.meta("q", q);
    t.meta("n", n);
    t.meta("terms", psi.len());
    for &x in xs {
        let v = psi.evaluate(Complex64::new(x, 0.0));
        t.push(vec![
            x.into(),
            v.re.into(),
            v.im.into(),
            v.norm_sqr().into(),
        ]);
    }
    Ok(t)
}

fn coherent_table(cp: &CoherentParams, tol: f64, xs: &[f64]) -> Result<Table> {
    let p = cp.params();
    let lambda = cp.lambda();
    let mut t = Table::new(&["x", "re", "im", "density", "limit_q0_density"]);
    t.meta("q", p.q());
    t.meta("omega", p.omega());
    t.meta("lambda_re", lambda.re);
    t.meta("lambda_im", lambda.im);
    t.meta(
        "uncertainty_product",
        uncertainty_coherent_closed_form(lambda, p.q())?,
    );
    t.meta(
        "energy",
        energy_coherent_closed_form(lambda, p.q(), p.omega())?,
    );

    let values: Vec<Complex64> = match coherent_wavefunction(cp, tol) {
        Ok(w) => {
            t.meta("evaluator", "series");
            t.meta("terms_used", w.terms_used);
            t.meta("truncation_bound", w.truncation_bound);
            t.meta("printed_norm", w.printed_norm);
            xs.iter()
                .map(|&x| w.state.evaluate(Complex64::new(x, 0.0)))
                .collect()
        }
        Err(Error::IllConditioned { .. }) => {
            t.meta("evaluator", "pointwise");
            xs.iter()
                .map(|&x| coherent_value(cp, x))
                .collect::<Result<_>>()?
        }
        Err(e) => return Err(e),
    };
    for (&x, v) in xs.iter().zip(values) {
        // the q -> 0 formula only exists inside the unit disk
        let limit = coherent_density_limit_q0(lambda, p, x).unwrap_or(f64::NAN);
        t.push(vec![
            x.into(),
            v.re.into(),
            v.im.into(),
            v.norm_sqr().into(),
            limit.into(),
        ]);
    }
    Ok(t)
}

fn eigen_uncertainty_table(p: &DeformationParams, n_max: usize) -> Result<Table> {
    check_n(n_max)?;
    let mut t = Table::new(&["n", "product", "classical_bound"]);
    t.meta("q", p.q());
    for n in 0..=n_max as u32 {
        t.push(vec![
            n.into(),
            uncertainty_eigen_closed_form(n, p).into(),
            (n as f64 + 0.5).into(),
        ]);
    }
    Ok(t)
}

/// Coherent-state report in coordinate space, or from the Fock realization
/// when the coordinate series is too ill-conditioned.
fn coherent_report(cp: &CoherentParams, tol: f64) -> Result<UncertaintyReport> {
    match coherent_wavefunction(cp, tol) {
        Ok(w) => uncertainty_report(&w.state, cp.params()),
        Err(Error::IllConditioned { .. }) => fock_coherent_report(cp),
        Err(e) => Err(e),
    }
}

fn fock_coherent_report(cp: &CoherentParams) -> Result<UncertaintyReport> {
    // one spare level keeps the state away from the truncation edge
    let dim = coherent_fock_dim(cp)? + 1;
    let v = coherent_fock(cp, dim)?;
    fock_uncertainty_report(
        &ladder_matrices(dim, cp.params().q())?,
        &v,
        cp.params().omega(),
    )
}

fn coherent_uncertainty_table(
    p: &DeformationParams,
    points: usize,
    frac: f64,
    tol: f64,
) -> Result<Table> {
    if points < 2 {
        return Err(Error::InvalidParameter(format!(
            "points = {points} must be at least 2"
        )));
    }
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda_max_frac = {frac} must lie in (0, 1)"
        )));
    }
    let radius = p.coherent_radius();
    let mut t = Table::new(&["lambda_abs", "product_closed_form", "product_measured"]);
    t.meta("q", p.q());
    t.meta("radius", radius);
    for i in 0..points {
        let l = frac * radius * i as f64 / (points - 1) as f64;
        let cp = CoherentParams::new(Complex64::new(l, 0.0), *p)?;
        let measured = coherent_report(&cp, tol)?.product;
        t.push(vec![
            l.into(),
            uncertainty_coherent_closed_form(cp.lambda(), p.q())?.into(),
            measured.into(),
        ]);
    }
    Ok(t)
}

fn parse_q_list(s: &str) -> Result<Vec<f64>> {
    let qs: Vec<f64> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse q value '{t}'")))
        })
        .collect::<Result<_>>()?;
    if qs.is_empty() {
        return Err(Error::InvalidParameter("q list is empty".into()));
    }
    Ok(qs)
}

/// One verification row.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_residual: f64,
    pub threshold: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.max_residual <= self.threshold
    }
}

struct Acc(Vec<Check>);

impl Acc {
    fn record(&mut self, name: &'static str, threshold: f64, residual: f64) {
        // NaN residuals must fail
        let r = if residual.is_nan() {
            f64::INFINITY
        } else {
            residual
        };
        match self.0.iter_mut().find(|c| c.name == name) {
            Some(c) => c.max_residual = c.max_residual.max(r),
            None => self.0.push(Check {
                name,
                max_residual: r,
                threshold,
            }),
        }
    }
}

fn family_member(rng: &mut rand::rngs::StdRng) -> Result<GaussExpSum> {
    let mut terms = Vec::new();
    for _ in 0..4 {
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let s = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        terms.push(GaussExpTerm::new(c, s)?);
    }
    GaussExpSum::from_terms(terms)
}

/// Residuals of the ladder relations, commutator, orthonormality, spectrum,
/// uncertainty closed forms and Fock cross-checks, maximized over `qs`.
pub fn verification_suite(
    qs: &[f64],
    n_max: usize,
    omega: f64,
    tol: f64,
    order: CompositionOrder,
) -> Result<Vec<Check>> {
    check_n(n_max + 1)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol = {tol} must be positive"
        )));
    }
    let mut acc = Acc(Vec::new());
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    for &q in qs {
        let p = DeformationParams::new(q, omega)?;
        let sqrt_int = |n: usize| q_integer(n as u32, q).sqrt();
        let states: Vec<GaussExpSum> = (0..=n_max + 1)
            .map(|n| eigenstate(n, &p))
            .collect::<Result<_>>()?;

        acc.record(
            "vacuum_annihilation",
            tol,
            annihilate_with(&vacuum(&p), &p, order)?.norm(),
        );
        for n in 0..=n_max {
            if n > 0 {
                let down = annihilate_with(&states[n], &p, order)?;
                let r = down
                    .sub(&states[n - 1].scale(Complex64::new(sqrt_int(n), 0.0))?)?
                    .norm();
                acc.record("ladder_lowering", tol, r);
            }
            let up = create_with(&states[n], &p, order)?;
            let r = up
                .sub(&states[n + 1].scale(Complex64::new(sqrt_int(n + 1), 0.0))?)?
                .norm();
            acc.record("ladder_raising", tol, r);
        }

        for psi in states.iter().take(n_max + 1) {
            acc.record("commutator", tol, q_commutator_residual(psi, &p)?);
        }
        for _ in 0..8 {
            let f = family_member(&mut rng)?;
            acc.record("commutator", tol, q_commutator_residual(&f, &p)? / f.norm());
        }

        for m in 0..=n_max {
            for n in m..=n_max {
                let target = if m == n { 1.0 } else { 0.0 };
                acc.record(
                    "orthonormality",
                    tol,
                    (states[m].inner_product(&states[n]) - target).norm(),
                );
            }
        }

        let dim = (n_max + 20).max(crate::fock::DEFAULT_DIM);
        let matrices = ladder_matrices(dim, q)?;
        for (n, state) in states.iter().enumerate().take(n_max + 1) {
            let r = uncertainty_report(state, &p)?;
            let e = spectrum_energy(n as u32, &p);
            acc.record("spectrum", tol, (r.energy - e).abs());
            acc.record("energy_bound", 0.0, (r.energy - p.energy_bound()).max(0.0));
            acc.record(
                "eigen_uncertainty",
                tol,
                (r.product - uncertainty_eigen_closed_form(n as u32, &p)).abs(),
            );
            acc.record("eigen_x2_equals_p2", tol, (r.var_x - r.var_p).abs());
            let fr = fock_uncertainty_report(&matrices, &FockVector::basis(dim, n)?, omega)?;
            acc.record(
                "fock_eigen",
                1e-8,
                (fr.energy - r.energy)
                    .abs()
                    .max((fr.product - r.product).abs()),
            );
        }

        let radius = p.coherent_radius();
        for &(frac, phase) in &[(0.5, 0.3), (0.9, -1.1)] {
            let lambda = Complex64::from_polar(frac * radius, phase);
            let cp = CoherentParams::new(lambda, p)?;
            let w = coherent_wavefunction(&cp, 1e-14)?;
            let a_psi = annihilate_with(&w.state, &p, order)?;
            acc.record(
                "coherent_eigenvalue",
                1e-8,
                a_psi.sub(&w.state.scale(lambda)?)?.norm(),
            );
            let r = uncertainty_report(&w.state, &p)?;
            acc.record(
                "coherent_uncertainty",
                1e-7,
                (r.product - uncertainty_coherent_closed_form(lambda, q)?).abs(),
            );
            acc.record(
                "coherent_energy",
                1e-8,
                (r.energy - energy_coherent_closed_form(lambda, q, omega)?).abs(),
            );
            let fr = fock_coherent_report(&cp)?;
            acc.record(
                "fock_coherent",
                1e-8,
                (fr.energy - r.energy)
                    .abs()
                    .max((fr.product - r.product).abs()),
            );
        }
    }
    Ok(acc.0)
}

/// Parses level data: header `n,energy`, then one `n,energy` pair per line;
/// blank lines and lines starting with `#` are skipped.
pub fn parse_levels(text: &str) -> Result<LevelData> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidData(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["n", "energy"] {
        return Err(Error::InvalidData(format!(
            "expected header 'n,energy', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::InvalidData(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = || {
            Error::InvalidData(format!(
                "line {line}: cannot parse '{}'",
                record.iter().collect::<Vec<_>>().join(",")
            ))
        };
        let n = record[0].parse::<u32>().map_err(|_| bad())?;
        let e = record[1].parse::<f64>().map_err(|_| bad())?;
        entries.push((n, e));
    }
    LevelData::new(entries)
}

fn fit_table(data: &LevelData, q_grid_size: usize) -> Result<Table> {
    let fit = fit_levels(data, q_grid_size)?;
    let n_max = data.entries().last().map(|&(n, _)| n).unwrap_or(0);
    let mut t = Table::new(&["n", "predicted_energy", "observed_energy"]);
    t.meta("omega", fit.omega);
    t.meta("q", fit.q);
    t.meta("anharmonicity", fit.anharmonicity);
    t.meta("rms_residual", fit.rms_residual);
    for (n, e) in predict_levels(&fit, n_max)? {
        let observed = data
            .entries()
            .iter()
            .find(|&&(m, _)| m == n)
            .map(|&(_, o)| o)
            .unwrap_or(f64::NAN);
        t.push(vec![n.into(), Value::Float(e), observed.into()]);
    }
    Ok(t)
}
