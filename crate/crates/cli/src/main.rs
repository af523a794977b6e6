mod system;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use ltv_rnn::codec::CodeLayout;
use ltv_rnn::{
    bit_budget_report, decode, encode, run, Bitstring, ImpulseClass, QuantizedFir, RnnSpec,
    Sequence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use system::{Kind, System};

const REAL_TOLERANCE: f64 = 1e-9;
const COMPLEX_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "ltv-rnn",
    version,
    about = "Synthesize and verify ReLU networks realizing linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a network from a parameter file and write it as a spec file.
    Synthesize {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// For `quantfir`: also write the quantized tap file here.
        #[arg(long)]
        qfir: Option<PathBuf>,
    },
    /// Compare a spec file against the direct oracle of a parameter file.
    Verify {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 16)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        #[arg(long)]
        seed: u64,
        /// Defaults to 1e-9 for real oracles and 1e-8 for complex ones.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a spec file on an input sequence file (`{"taps": [...]}`).
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bit budget table for the class `|k[t]| <= C exp(-a t)`.
    Entropy {
        #[arg(long = "C", alias = "c")]
        c: f64,
        #[arg(long)]
        a: f64,
        /// Accuracies, comma separated or repeated. May be empty.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        eps: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a quantized tap file into a bit container plus a JSON sidecar.
    Encode {
        #[arg(long)]
        qfir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to `<out>.json`.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Decode a bit container back into a quantized tap file.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        sidecar: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// On-disk network: the kind it was synthesized from plus its weights.
#[derive(Serialize, Deserialize)]
struct SpecFile {
    kind: Kind,
    network: RnnSpec,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct Sidecar {
    #[serde(rename = "C")]
    c: f64,
    a: f64,
    eps: f64,
}

#[derive(Serialize)]
struct EntropyRow {
    eps: f64,
    #[serde(rename = "M")]
    m: usize,
    delta: f64,
    total_bits: usize,
    chain_bound: f64,
    main_term: f64,
    ratio: f64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Pretty JSON with sorted object keys and a trailing newline.
fn stable_json<T: Serialize>(v: &T) -> Result<String> {
    let value: Value = serde_json::to_value(v)?;
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn synthesize(kind: Kind, params: &Path, out: &Path, qfir: Option<&Path>) -> Result<()> {
    let system = System::parse(kind, &read(params)?)?;
    let (network, quantized) = system.synthesize()?;
    let mut report = json!({
        "kind": kind.name(),
        "state_dim": network.state_dim(),
        "hidden_width": network.hidden_width(),
        "nonzero_weights": network.nonzero_weights(),
        "real_output": network.has_real_output(),
        "out": out.display().to_string(),
    });
    if let Some(q) = &quantized {
        let layout = CodeLayout::new(q.class(), q.eps())?;
        report["M"] = json!(q.len());
        report["delta"] = json!(q.delta());
        report["total_bits"] = json!(layout.total_bits());
        if let Some(p) = qfir {
            write(p, stable_json(q)?)?;
        }
    } else if qfir.is_some() {
        bail!("--qfir only applies to --kind quantfir");
    }
    write(out, stable_json(&SpecFile { kind, network })?)?;
    print!("{}", stable_json(&report)?);
    Ok(())
}

fn trial_input(seed: u64, trial: usize, len: usize, c_in: f64) -> Result<Sequence<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    Ok(Sequence::new(
        (0..len).map(|_| rng.random_range(-c_in..=c_in)).collect(),
    )?)
}

#[allow(clippy::too_many_arguments)]
fn verify(
    kind: Kind,
    params: &Path,
    spec_path: &Path,
    trials: usize,
    horizon: usize,
    seed: u64,
    tolerance: Option<f64>,
    out: Option<&Path>,
) -> Result<bool> {
    let start = Instant::now();
    let params_text = read(params)?;
    let spec_text = read(spec_path)?;
    let system = System::parse(kind, &params_text)?;
    let spec: SpecFile = serde_json::from_str(&spec_text).context("spec file")?;
    if !spec.network.has_real_output() && !kind.is_complex() {
        bail!(
            "incompatible kinds: spec `{}` has complex output but oracle `{}` is real",
            spec.kind.name(),
            kind.name()
        );
    }
    let tolerance = tolerance.unwrap_or(if kind.is_complex() || !spec.network.has_real_output() {
        COMPLEX_TOLERANCE
    } else {
        REAL_TOLERANCE
    });
    let c_in = spec
        .network
        .input_bound()
        .or(system.input_bound())
        .unwrap_or(1.0);

    let mut deviation = 0.0f64;
    for trial in 0..trials {
        let x = trial_input(seed, trial, horizon, c_in)?;
        let y = run(&spec.network, &x, horizon)?.output;
        let reference = system.oracle(&x, horizon)?;
        for (a, b) in y.samples().iter().zip(&reference) {
            let d = (a - b).norm();
            deviation = if d.is_nan() {
                f64::INFINITY
            } else {
                deviation.max(d)
            };
        }
    }
    let pass = deviation <= tolerance;
    let report = json!({
        "command": std::env::args().collect::<Vec<_>>(),
        "kind": kind.name(),
        "spec_kind": spec.kind.name(),
        "digests": {
            "params": sha256_hex(params_text.as_bytes()),
            "spec": sha256_hex(spec_text.as_bytes()),
        },
        "trials": trials,
        "horizon": horizon,
        "seed": seed,
        "input_bound": c_in,
        "tolerance": tolerance,
        "deviation": if deviation.is_finite() { json!(deviation) } else { json!("inf") },
        "pass": pass,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let text = stable_json(&report)?;
    if let Some(p) = out {
        write(p, &text)?;
    }
    print!("{text}");
    Ok(pass)
}

fn simulate(spec: &Path, input: &Path, horizon: Option<usize>, out: Option<&Path>) -> Result<()> {
    let spec: SpecFile = serde_json::from_str(&read(spec)?).context("spec file")?;
    let x: Sequence<f64> = serde_json::from_str(&read(input)?).context("input file")?;
    let horizon = horizon.unwrap_or(x.len());
    let y = run(&spec.network, &x, horizon)?.output;
    emit(&stable_json(&y)?, out)
}

fn entropy(c: f64, a: f64, eps: &[f64], format: Format, out: Option<&Path>) -> Result<()> {
    let class = ImpulseClass::new(c, a)?;
    let rows = eps
        .iter()
        .map(|&e| {
            let b = bit_budget_report(&class, e)?;
            Ok(EntropyRow {
                eps: e,
                m: b.len,
                delta: b.delta,
                total_bits: b.total_bits,
                chain_bound: b.chain_bound,
                main_term: b.main_term,
                ratio: b.ratio(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let text = match format {
        Format::Json => stable_json(&rows)?,
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record([
                "eps",
                "M",
                "delta",
                "total_bits",
                "chain_bound",
                "main_term",
                "ratio",
            ])?;
            for r in &rows {
                w.serialize(r)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    emit(&text, out)
}

fn encode_cmd(qfir: &Path, out: &Path, sidecar: Option<&Path>) -> Result<()> {
    let q: QuantizedFir = serde_json::from_str(&read(qfir)?).context("quantized tap file")?;
    let bits = encode(&q)?;
    let sidecar = sidecar.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut s = out.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    });
    write(out, bits.to_container())?;
    let meta = Sidecar {
        c: q.class().amplitude(),
        a: q.class().decay(),
        eps: q.eps(),
    };
    write(&sidecar, stable_json(&meta)?)?;
    print!(
        "{}",
        stable_json(
            &json!({ "bits": bits.len(), "out": out.display().to_string(), "sidecar": sidecar.display().to_string() })
        )?
    );
    Ok(())
}

fn decode_cmd(input: &Path, sidecar: &Path, out: &Path) -> Result<()> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let meta: Sidecar = serde_json::from_str(&read(sidecar)?).context("sidecar")?;
    let class = ImpulseClass::new(meta.c, meta.a)?;
    let bits = Bitstring::from_container(&bytes)?;
    let q = decode(&bits, &class, meta.eps)
        .with_context(|| format!("container does not match sidecar {}", sidecar.display()))?;
    write(out, stable_json(&q)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synthesize {
            kind,
            params,
            out,
            qfir,
        } => synthesize(kind, &params, &out, qfir.as_deref()).map(|_| true),
        Command::Verify {
            kind,
            params,
            spec,
            trials,
            horizon,
            seed,
            tolerance,
            out,
        } => verify(
            kind,
            &params,
            &spec,
            trials,
            horizon,
            seed,
            tolerance,
            out.as_deref(),
        ),
        Command::Simulate {
            spec,
            input,
            horizon,
            out,
        } => simulate(&spec, &input, horizon, out.as_deref()).map(|_| true),
        Command::Entropy {
            c,
            a,
            eps,
            format,
            out,
        } => entropy(c, a, &eps, format, out.as_deref()).map(|_| true),
        Command::Encode { qfir, out, sidecar } => {
            encode_cmd(&qfir, &out, sidecar.as_deref()).map(|_| true)
        }
        Command::Decode {
            input,
            sidecar,
            out,
        } => decode_cmd(&input, &sidecar, &out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
