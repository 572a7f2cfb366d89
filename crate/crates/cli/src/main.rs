use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ququart::basis::{ideal_reduce, rotate_state, BasisRotation};
use ququart::geometry::{face_entropy_map, write_face_csv};
use ququart::measurement::{
    expected_counts, fig10_pipeline, reconstruct_moduli, reconstruct_phases, sample_counts, ApparatusConfig,
    CoincidenceReport, MeasurementBasis, Pattern,
};
use ququart::reductions::metrics;
use ququart::schmidt::{
    chi_polarization_angles, closed_form_family_23, family23_state, schmidt_decompose, stokes_of,
    write_family23_csv,
};
use ququart::state::{state_from_json, QuquartState};
use ququart::sweep::{sweep, write_sweep_csv, SweepFamily, SweepGrid, SweepTable};
use ququart::Error;

#[derive(Parser)]
#[command(name = "ququart", version, about = "Three-photon polarization ququart numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduced-state spectrum, concurrence, entropy, Schmidt number and Stokes vector.
    Metrics(StateArgs),
    /// One-photon / two-photon Schmidt decomposition.
    Schmidt(SchmidtArgs),
    /// Test whether a basis rotation brings the state to √λ₊|3₊⟩ + √λ₋|3₋⟩.
    ReduceIdeal(StateArgs),
    /// Amplitudes in a rotated polarization basis.
    Rotate(RotateArgs),
    /// Coincidence counts of the three-detector or the PBS scheme.
    Simulate(SimulateArgs),
    /// Reconstruct moduli and phases from coincidence counts.
    Tomography(TomographyArgs),
    /// Entropy and concurrence over one face of the amplitude tetrahedron, as CSV.
    TriangleMap(TriangleArgs),
    /// Metrics along a one-parameter family, as CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct StateArgs {
    /// State as JSON, {"C": [[re, im], ...]}.
    #[arg(long, conflicts_with = "state_file")]
    state: Option<String>,
    /// File holding the state JSON.
    #[arg(long)]
    state_file: Option<PathBuf>,
}

#[derive(Args)]
struct SchmidtArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Use the analytic decomposition of (0, cos θ, e^{iφ} sin θ, 0).
    #[arg(long, requires = "theta")]
    family23: bool,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
    /// Angles are in degrees.
    #[arg(long)]
    degrees: bool,
}

#[derive(Args)]
struct RotateArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Mixing angle ϑ.
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    /// Relative phase φ.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long)]
    degrees: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Expected,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    /// Beamsplitter cascade with three polarizers.
    Fig9,
    /// Wave plate and polarizing beamsplitter after reduction.
    Fig10,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Hv,
    #[value(name = "45")]
    Diagonal,
}

impl From<BasisArg> for MeasurementBasis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Hv => MeasurementBasis::Hv,
            BasisArg::Diagonal => MeasurementBasis::Diagonal,
        }
    }
}

#[derive(Args)]
struct ApparatusArgs {
    /// Apparatus configuration as a JSON file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_triplets: Option<u64>,
    /// Detector efficiencies η₁,η₂,η₃.
    #[arg(long, value_parser = parse_eta)]
    eta: Option<[f64; 3]>,
    #[arg(long, env = "QUQUART_SEED")]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Mode::Expected)]
    mode: Mode,
}

fn parse_eta(text: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = text.split(',').collect();
    let [a, b, c] = parts[..] else {
        return Err(format!("expected three comma-separated values, got {}", parts.len()));
    };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v}: {e}"));
    Ok([num(a)?, num(b)?, num(c)?])
}

impl ApparatusArgs {
    fn config(&self) -> Result<ApparatusConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?
            }
            None => ApparatusConfig::default(),
        };
        if let Some(n) = self.n_triplets {
            cfg.n_triplets = n;
        }
        if let Some(eta) = &self.eta {
            cfg.efficiencies = *eta;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn counts(&self, state: &QuquartState, cfg: &ApparatusConfig) -> Result<CoincidenceReport, Error> {
        match self.mode {
            Mode::Expected => expected_counts(state, cfg),
            Mode::Sampled => sample_counts(state, cfg),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    apparatus: ApparatusArgs,
    #[arg(long, value_enum, default_value_t = Scheme::Fig9)]
    scheme: Scheme,
    /// Polarizer basis used when no single pattern is given.
    #[arg(long, value_enum)]
    basis: Option<BasisArg>,
    /// A single installation, as letters (HHV) or angles in degrees (0,0,90).
    #[arg(long)]
    pattern: Option<String>,
    /// Print the counts as `setting,count` CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct TomographyArgs {
    /// Simulate the counts for this state.
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    apparatus: ApparatusArgs,
    /// Measured HV-basis report as JSON, instead of simulating.
    #[arg(long, requires = "counts_45", conflicts_with_all = ["state", "state_file"])]
    counts_hv: Option<PathBuf>,
    /// Measured ±45° report as JSON.
    #[arg(long, requires = "counts_hv")]
    counts_45: Option<PathBuf>,
}

#[derive(Args)]
struct TriangleArgs {
    /// Which amplitude (1-4) is zero on the face.
    #[arg(long, default_value_t = 4)]
    zero_index: usize,
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    CaseA,
    #[value(name = "case-23")]
    Case23,
    #[value(name = "schmidt-23")]
    Schmidt23,
}

impl From<FamilyArg> for SweepFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::CaseA => SweepFamily::CaseA,
            FamilyArg::Case23 => SweepFamily::Case23,
            FamilyArg::Schmidt23 => SweepFamily::Schmidt23,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 91)]
    points: usize,
    #[arg(long)]
    degrees: bool,
}

fn angle(x: f64, degrees: bool) -> f64 {
    if degrees {
        x.to_radians()
    } else {
        x
    }
}

fn read_state(args: &StateArgs) -> Result<QuquartState, Error> {
    match (&args.state, &args.state_file) {
        (Some(text), _) => state_from_json(text),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            state_from_json(&text)
        }
        (None, None) => Err(Error::Parse("a state is required (--state or --state-file)".into())),
    }
}

fn read_report(path: &PathBuf) -> Result<CoincidenceReport, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

enum Output {
    Json(Value),
    Text(String),
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable output")
}

fn csv<F: FnOnce(&mut Vec<u8>) -> io::Result<()>>(f: F) -> String {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

fn run(cli: Cli) -> Result<Output, Error> {
    match cli.command {
        Command::Metrics(args) => Ok(Output::Json(to_value(&metrics(&read_state(&args)?)))),
        Command::Schmidt(args) => {
            if args.family23 {
                let theta = angle(args.theta.expect("required by clap"), args.degrees);
                let phi = angle(args.phi, args.degrees);
                let dec = closed_form_family_23(theta, phi)?;
                let numeric = schmidt_decompose(&family23_state(theta, phi));
                Ok(Output::Json(json!({
                    "lambda_plus": dec.lambda_plus,
                    "lambda_minus": dec.lambda_minus,
                    "decomposition": to_value(&dec),
                    "stokes": to_value(&stokes_of(&numeric)),
                    "chi_polarization": to_value(&chi_polarization_angles(theta, phi)),
                })))
            } else {
                let dec = schmidt_decompose(&read_state(&args.state)?);
                Ok(Output::Json(json!({
                    "lambda_plus": dec.lambda_plus,
                    "lambda_minus": dec.lambda_minus,
                    "decomposition": to_value(&dec),
                    "stokes": to_value(&stokes_of(&dec)),
                })))
            }
        }
        Command::ReduceIdeal(args) => Ok(Output::Json(to_value(&ideal_reduce(&read_state(&args)?)))),
        Command::Rotate(args) => {
            let rot = BasisRotation::new(angle(args.theta, args.degrees), angle(args.phi, args.degrees));
            let rotated = rotate_state(&read_state(&args.state)?, rot);
            Ok(Output::Json(to_value(&rotated)))
        }
        Command::Simulate(args) => {
            let state = read_state(&args.state)?;
            let mut cfg = args.apparatus.config()?;
            if let Some(b) = args.basis {
                cfg.basis = b.into();
            }
            if let Some(p) = &args.pattern {
                cfg.polarizers = Some(p.parse::<Pattern>()?);
            }
            match args.scheme {
                Scheme::Fig10 => Ok(Output::Json(to_value(&fig10_pipeline(&state, &cfg)?))),
                Scheme::Fig9 => {
                    let report = args.apparatus.counts(&state, &cfg)?;
                    if args.csv {
                        Ok(Output::Text(csv(|b| report.write_csv(b))))
                    } else {
                        Ok(Output::Json(to_value(&report)))
                    }
                }
            }
        }
        Command::Tomography(args) => {
            let (hv, d) = match (&args.counts_hv, &args.counts_45) {
                (Some(a), Some(b)) => (read_report(a)?, read_report(b)?),
                _ => {
                    let state = read_state(&args.state)?;
                    let cfg = args.apparatus.config()?;
                    let hv = args.apparatus.counts(&state, &cfg.with_basis(MeasurementBasis::Hv))?;
                    let d = args.apparatus.counts(&state, &cfg.with_basis(MeasurementBasis::Diagonal))?;
                    (hv, d)
                }
            };
            let moduli = reconstruct_moduli(&hv)?;
            let result = reconstruct_phases(&hv, &d, moduli)?;
            Ok(Output::Json(to_value(&result)))
        }
        Command::TriangleMap(args) => {
            let map = face_entropy_map(args.zero_index, args.resolution)?;
            let text = csv(|b| write_face_csv(&map, b));
            match args.output {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
                    Ok(Output::Text(String::new()))
                }
                None => Ok(Output::Text(text)),
            }
        }
        Command::Sweep(args) => {
            let grid = SweepGrid { start: angle(args.from, args.degrees), end: angle(args.to, args.degrees), points: args.points };
            match sweep(args.family.into(), &grid)? {
                SweepTable::Metrics(rows) => Ok(Output::Text(csv(|b| write_sweep_csv(&rows, b)))),
                SweepTable::Schmidt(rows) => Ok(Output::Text(csv(|b| write_family23_csv(&rows, b)))),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            let res = match out {
                Output::Json(v) => writeln!(stdout, "{}", serde_json::to_string_pretty(&v).expect("valid JSON")),
                Output::Text(t) => stdout.write_all(t.as_bytes()),
            };
            if res.is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
