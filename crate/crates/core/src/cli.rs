//! `coherence-kit` command line.
//!
//! Every subcommand reads and writes the JSON formats of the library types.
//! Exit codes: 0 on success, 1 on domain errors (reported as JSON on stderr),
//! 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::detection::{certifies_coherence_with, qubit_undetectable_state, OffDiagonalEstimator};
use crate::error::{CoherenceError, Result};
use crate::linalg::DEFAULT_TOL;
use crate::number_theory::find_counterexample;
use crate::reconstruction::{
    estimate_coherence, reconstruct_with, simulate_probabilities, simulate_reference, threshold_verdict,
    InversionMethod, ProbabilityTable,
};
use crate::setups::{build_minimal_setup, qubit_bloch_basis, MeasurementSetup, SetupConfig, DEFAULT_ALPHA};
use crate::states::{
    bloch_operator, c1_coherence, noisy_max_coherent_state, random_density_matrix, DensityMatrix, PhaseVector,
};

#[derive(Parser, Debug)]
#[command(
    name = "coherence-kit",
    version,
    about = "Minimal measurement setups for quantum coherence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the d-basis minimal setup and write it as JSON.
    BuildSetup {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analyze which perturbations a setup leaves undetected.
    Verify {
        #[arg(long)]
        setup: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Treat the reference basis as measured too.
        #[arg(long)]
        include_reference: bool,
    },
    /// Compute exact outcome probabilities of a state in every measured basis.
    Simulate {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        setup: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the reference-basis probabilities.
        #[arg(long)]
        reference_out: Option<PathBuf>,
    },
    /// Reconstruct off-diagonal elements from a minimal-setup table.
    Reconstruct {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        with_reference: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Dense)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the l1-norm of coherence estimated from a table, with an optional threshold verdict.
    Coherence {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Threshold r in (0, 1); the comparison is against r (d - 1).
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Exhaustively check that the quadratic exponents never collide.
    CheckProposition {
        #[arg(long, default_value_t = 50)]
        max_dim: u64,
    },
    /// Qubit walkthrough: the single-axis blind spot and sigma_x / sigma_y reconstruction.
    DemoQubit {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a state: a random (Ginibre) state, or a noisy maximally coherent one.
    MakeState {
        #[arg(long)]
        dim: usize,
        /// Mixing parameter r of (1 - r) I/d + r |psi><psi| with random phases.
        #[arg(long)]
        noisy: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Dense,
    Explicit,
}

impl From<Method> for InversionMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Dense => InversionMethod::Dense,
            Method::Explicit => InversionMethod::Explicit,
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let payload = json!({ "error": e.kind(), "message": e.to_string() });
            let _ = writeln!(err, "{payload}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::BuildSetup {
            dim,
            alpha,
            out: path,
        } => {
            let setup = build_minimal_setup(&SetupConfig::new(dim, alpha)?)?;
            write_json(&path, &setup)?;
            writeln!(
                out,
                "{}",
                json!({ "dim": dim, "alpha": alpha, "bases": setup.num_measured() })
            )?;
            Ok(0)
        }
        Command::Verify {
            setup,
            tol,
            report,
            include_reference,
        } => {
            let setup: MeasurementSetup = read_json(&setup)?;
            let rep = certifies_coherence_with(&setup, include_reference, tol)?;
            if let Some(path) = report {
                write_json(&path, &rep)?;
            }
            writeln!(
                out,
                "{}",
                json!({
                    "all_undetected_diagonal": rep.all_undetected_diagonal,
                    "undetected_dim": rep.undetected_dim,
                    "max_offdiag_leak": rep.max_offdiag_leak,
                    "span_dim": rep.span_dim,
                    "info_complete_with_reference": rep.info_complete_with_reference,
                })
            )?;
            if rep.all_undetected_diagonal {
                Ok(0)
            } else {
                Err(CoherenceError::NotCertifying(format!(
                    "undetected perturbations have off-diagonal weight {:e}",
                    rep.max_offdiag_leak
                )))
            }
        }
        Command::Simulate {
            state,
            setup,
            out: path,
            reference_out,
        } => {
            let rho: DensityMatrix = read_json(&state)?;
            let setup: MeasurementSetup = read_json(&setup)?;
            write_json(&path, &simulate_probabilities(&rho, &setup)?)?;
            if let Some(rpath) = reference_out {
                write_json(&rpath, &simulate_reference(&rho, &setup)?)?;
            }
            Ok(0)
        }
        Command::Reconstruct {
            table,
            dim,
            alpha,
            with_reference,
            method,
            out: path,
        } => {
            let table: ProbabilityTable = read_json(&table)?;
            let reference: Option<ProbabilityTable> = with_reference.map(|p| read_json(&p)).transpose()?;
            let config = SetupConfig::new(dim, alpha)?;
            let rec = reconstruct_with(&table, &config, method.into(), reference.as_ref())?;
            write_json(&path, &rec)?;
            writeln!(
                out,
                "{}",
                json!({ "c1": rec.c1(), "hermiticity_mismatch": rec.hermiticity_mismatch })
            )?;
            Ok(0)
        }
        Command::Coherence {
            table,
            dim,
            alpha,
            threshold,
            margin,
        } => {
            let table: ProbabilityTable = read_json(&table)?;
            let config = SetupConfig::new(dim, alpha)?;
            let est = estimate_coherence(&table, &config)?;
            let mut result = json!({ "c1": est.value, "error_bound": est.error_bound });
            if let Some(r) = threshold {
                let verdict = threshold_verdict(&table, &config, r, margin)?;
                result["threshold"] = json!(r * (dim as f64 - 1.0));
                result["verdict"] = json!(verdict);
            }
            writeln!(out, "{result}")?;
            Ok(0)
        }
        Command::CheckProposition { max_dim } => {
            let mut failed = false;
            for d in 2..=max_dim {
                match find_counterexample(d)? {
                    None => writeln!(out, "{}", json!({ "d": d, "holds": true }))?,
                    Some(c) => {
                        failed = true;
                        writeln!(
                            out,
                            "{}",
                            json!({ "d": d, "holds": false, "counterexample": { "x": c.x, "i": c.i, "j": c.j } })
                        )?;
                    }
                }
            }
            Ok(if failed { 1 } else { 0 })
        }
        Command::DemoQubit { seed } => {
            let report = demo_qubit(seed)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::MakeState {
            dim,
            noisy,
            seed,
            out: path,
        } => {
            if dim < 1 {
                return Err(CoherenceError::InvalidParameter(
                    "dimension must be positive".into(),
                ));
            }
            let mut rng = StdRng::seed_from_u64(seed);
            let rho = match noisy {
                Some(r) => noisy_max_coherent_state(&PhaseVector::random(dim, &mut rng), r)?,
                None => random_density_matrix(dim, &mut rng),
            };
            write_json(&path, &rho)?;
            writeln!(out, "{}", json!({ "dim": dim, "c1": c1_coherence(&rho) }))?;
            Ok(0)
        }
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0f64),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Builds the JSON report printed by `demo-qubit`.
pub fn demo_qubit(seed: u64) -> Result<serde_json::Value> {
    let mut rng = StdRng::seed_from_u64(seed);

    // Two measured axes, one of them tilted out of the xy plane: some coherent
    // state looks exactly like I/2 to both.
    let (a, b, rho_c) = loop {
        let a = random_unit(&mut rng);
        let b = random_unit(&mut rng);
        if let Ok(rho_c) = qubit_undetectable_state(a, b) {
            break (a, b, rho_c);
        }
    };
    let mixed = DensityMatrix::maximally_mixed(2);
    let expectations = |rho: &DensityMatrix| -> Result<[f64; 2]> {
        Ok([
            rho.expectation(&bloch_operator(a))?,
            rho.expectation(&bloch_operator(b))?,
        ])
    };

    let setup = MeasurementSetup::with_standard_reference(vec![
        qubit_bloch_basis([1.0, 0.0, 0.0])?,
        qubit_bloch_basis([0.0, 1.0, 0.0])?,
    ])?;
    let estimator = OffDiagonalEstimator::new(&setup, DEFAULT_TOL)?;
    let rho = random_density_matrix(2, &mut rng);
    let table = simulate_probabilities(&rho, &setup)?;
    let rec = estimator.estimate(&table)?;
    let truth = rho.get(0, 1);
    let got = rec.get(0, 1);

    Ok(json!({
        "blind_spot": {
            "a": a,
            "b": b,
            "coherent_state": rho_c,
            "c1": c1_coherence(&rho_c),
            "coherent_expectations": expectations(&rho_c)?,
            "mixed_expectations": expectations(&mixed)?,
        },
        "xy_reconstruction": {
            "state": rho,
            "probabilities": table,
            "rho01_true": [truth.re, truth.im],
            "rho01_reconstructed": [got.re, got.im],
            "error": (truth - got).norm(),
            "c1_true": c1_coherence(&rho),
            "c1_reconstructed": 2.0 * got.norm(),
        }
    }))
}
