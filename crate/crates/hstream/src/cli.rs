//! The `hstream` command line.
//!
//! Every subcommand is callable in-process through [`run`], which returns the
//! exit code instead of exiting:
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success; for `decode`, a unique prefix was recovered |
//! | 1    | usage, I/O or malformed-file error                  |
//! | 2    | `decode`: no block met the density threshold        |
//! | 3    | `decode`: the samples are inconsistent              |
//! | 4    | `adversary`: search budget exhausted                |
//! | 5    | `decode`: good blocks found but no unique candidate |

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hstream_core::adversary::{
    builtin_decoder, defeat_decoders, BlockStreamEncoder, DecoderBox, DefeatWitness, GameConfig, BUILTIN_DECODERS,
};
use hstream_core::density::{make_sampler, rho_window, PositionSet, Sampler};
use hstream_core::gf2::BitVector;
use hstream_core::stream::{decode_exact, decode_from_samples, encode_stream, StreamSamples};
use hstream_core::{Error, Fraction};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::formats;
use crate::report::{Report, ReportFormat, Status};

/// Environment variable capping `--blocks`.
pub const MAX_BLOCK_ENV: &str = "HSTREAM_MAX_BLOCK";
pub const DEFAULT_MAX_BLOCK: usize = 20;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BUDGET_EXHAUSTED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hstream", version, about = "Encode, sample, decode and attack Walsh-Hadamard block streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode source bits (ASCII 0/1 or an HSTR file) into an HSTR stream.
    Encode(EncodeArgs),
    /// Sample a stream at the positions chosen by a sampler, writing HSMP.
    Sample(SampleArgs),
    /// Decode an HSMP sample file and print a report.
    Decode(DecodeArgs),
    /// Search for a dense position set on which the named decoders all fail.
    Adversary(AdversaryArgs),
    /// Run built-in consistency checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Source bit file, or `-` for stdin.
    pub input: PathBuf,
    /// Encode blocks 0..=N; defaults to the number of source bits.
    #[arg(long, value_name = "N")]
    pub blocks: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// HSTR stream file, or `-` for stdin.
    pub input: PathBuf,
    /// `full`, `periodic:P`, `bernoulli:Q[:SEED]` or `burst:N1,N2,...:FRACTION`.
    #[arg(long, default_value = "full")]
    pub sampler: Sampler,
    /// Seed for the Bernoulli sampler, overriding one given in the spec.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the sampled positions as an HPOS file.
    #[arg(long, value_name = "PATH")]
    pub positions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// HSMP sample file, or `-` for stdin.
    pub input: PathBuf,
    /// Density parameter in (0, 1], as `p/q` or a decimal.
    #[arg(long, value_parser = parse_delta)]
    pub delta: Fraction,
    #[arg(long, default_value = "json-lines")]
    pub report: ReportFormat,
    /// Report file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdversaryArgs {
    /// Comma-separated built-in decoder names: zeros, ones, unique, first, last.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub decoders: Vec<String>,
    /// Maximum number of game steps.
    #[arg(long, default_value_t = GameConfig::default().search_budget)]
    pub budget: u64,
    /// Source prefix the witness must extend.
    #[arg(long, default_value = "", value_parser = parse_bits)]
    pub sigma: BitVector,
    /// Characteristic string of positions the witness set must contain up to its length.
    #[arg(long, default_value = "", value_parser = parse_bits)]
    pub tau: BitVector,
    /// Longest source prefix the game may examine.
    #[arg(long, default_value_t = GameConfig::default().max_source_len)]
    pub max_source_len: usize,
    /// Transcript file; stdout when omitted.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Witness JSON file; stdout when omitted.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

fn parse_bits(s: &str) -> std::result::Result<BitVector, String> {
    s.parse().map_err(|_| format!("expected a string of 0s and 1s, got {s:?}"))
}

/// Parses `p/q`, an integer, or a terminating decimal such as `0.45`.
pub fn parse_delta(s: &str) -> std::result::Result<Fraction, String> {
    let s = s.trim();
    let bad = || format!("expected a fraction like 1/3 or 0.25, got {s:?}");
    let value = if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let num = if frac.is_empty() { 0 } else { frac.parse::<u64>().map_err(|_| bad())? };
        int.checked_mul(den).and_then(|v| v.checked_add(num)).map(|n| Fraction::new(n, den)).ok_or_else(bad)?
    } else {
        s.parse::<Fraction>().map_err(|_| bad())?
    };
    if *value.numer() == 0 || value > Fraction::from_integer(1) {
        return Err(format!("delta must lie in (0, 1], got {s}"));
    }
    Ok(value)
}

/// Reads the block cap from a raw `HSTREAM_MAX_BLOCK` value.
pub fn max_block_from(raw: Option<&str>) -> Result<usize> {
    match raw {
        None => Ok(DEFAULT_MAX_BLOCK),
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{MAX_BLOCK_ENV} must be a non-negative integer, got {v:?}"))),
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path == Path::new("-") {
        formats::read_all(io::stdin().lock())
    } else {
        Ok(fs::read(path)?)
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

/// Encodes source bits in any accepted input form into HSTR bytes.
pub fn encode_bytes(input: &[u8], blocks: Option<usize>, max_block: usize) -> Result<Vec<u8>> {
    let source = formats::parse_input_bits(input)?;
    let n = blocks.unwrap_or(source.len());
    if n > max_block {
        return Err(CliError::Usage(format!("N = {n} exceeds the configured cap {max_block} ({MAX_BLOCK_ENV})")));
    }
    let stream = encode_stream(&source, n)?;
    let mut out = Vec::new();
    formats::write_stream(&mut out, stream.bits())?;
    Ok(out)
}

/// Samples HSTR bytes, returning the HSMP bytes and the chosen positions.
pub fn sample_bytes(stream: &[u8], sampler: &Sampler) -> Result<(Vec<u8>, PositionSet)> {
    let bits = formats::parse_stream(stream)?;
    let d = make_sampler(sampler, bits.len() as u64)?;
    let mut out = Vec::new();
    formats::write_samples(&mut out, d.positions().iter().map(|&p| (p, bits.get(p as usize))))?;
    Ok((out, d))
}

/// Decodes HSMP bytes into a report. An empty file counts as no samples.
pub fn decode_bytes(samples: &[u8], delta: Fraction) -> Result<Report> {
    let pairs = if samples.is_empty() { Vec::new() } else { formats::parse_samples(samples)? };
    let samples = match StreamSamples::from_pairs(pairs) {
        Ok(s) => s,
        Err(Error::ConflictingSample { .. }) => return Ok(Report::bare(Status::Inconsistent, delta)),
        Err(e) => return Err(e.into()),
    };
    match decode_from_samples(&samples, delta) {
        Ok(report) => Ok(Report::from_decode(&report, delta)),
        Err(e) => Report::from_failure(&samples, delta, &e).ok_or(CliError::Codec(e)),
    }
}

/// Renders a defeat witness as a single JSON object.
pub fn witness_json(witness: &DefeatWitness, names: &[String]) -> Result<String> {
    let horizon = witness.d.horizon();
    let density = if horizon == 0 { Fraction::from_integer(1) } else { rho_window(&witness.d, horizon)? };
    let decoders: Vec<_> = names
        .iter()
        .zip(&witness.per_decoder)
        .map(|(name, outcome)| json!({ "decoder": name, "outcome": outcome.to_string() }))
        .collect();
    Ok(json!({
        "x": witness.x.to_string(),
        "horizon": horizon,
        "d": witness.d.positions(),
        "density": density.to_string(),
        "decoders": decoders,
    })
    .to_string())
}

fn cmd_encode(args: &EncodeArgs, max_block: usize, stdout: &mut dyn Write) -> Result<i32> {
    let bytes = encode_bytes(&read_input(&args.input)?, args.blocks, max_block)?;
    write_output(args.output.as_deref(), &bytes, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_sample(args: &SampleArgs, stdout: &mut dyn Write) -> Result<i32> {
    let mut sampler = args.sampler.clone();
    if let Some(seed) = args.seed {
        sampler.reseed(seed);
    }
    let (bytes, d) = sample_bytes(&read_input(&args.input)?, &sampler)?;
    if let Some(path) = &args.positions {
        let mut pos = Vec::new();
        formats::write_positions(&mut pos, &d)?;
        fs::write(path, pos)?;
    }
    write_output(args.output.as_deref(), &bytes, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_decode(args: &DecodeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let report = decode_bytes(&read_input(&args.input)?, args.delta)?;
    write_output(args.output.as_deref(), report.render(args.report).as_bytes(), stdout)?;
    Ok(report.status.exit_code())
}

fn cmd_adversary(args: &AdversaryArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let names: Vec<String> = args.decoders.iter().map(|n| n.trim().to_owned()).filter(|n| !n.is_empty()).collect();
    let decoders = names
        .iter()
        .map(|name| {
            builtin_decoder(name).ok_or_else(|| {
                CliError::Usage(format!("unknown decoder {name:?} (known: {})", BUILTIN_DECODERS.join(", ")))
            })
        })
        .collect::<Result<Vec<DecoderBox<'static>>>>()?;
    let config = GameConfig { search_budget: args.budget, max_source_len: args.max_source_len, ..GameConfig::default() };
    let tau = PositionSet::from_characteristic(&args.tau);
    let report = defeat_decoders(&BlockStreamEncoder, &decoders, &args.sigma, &tau, &config);

    let transcript: String = report.transcript.iter().map(|step| format!("{step}\n")).collect();
    write_output(args.transcript.as_deref(), transcript.as_bytes(), stdout)?;
    match report.result {
        Ok(witness) => {
            let body = witness_json(&witness, &names)? + "\n";
            write_output(args.witness.as_deref(), body.as_bytes(), stdout)?;
            Ok(EXIT_OK)
        }
        Err(Error::BudgetExhausted) => {
            writeln!(
                stderr,
                "hstream: search budget exhausted (at most {} steps, sources up to {} bits)",
                args.budget, args.max_source_len
            )?;
            Ok(EXIT_BUDGET_EXHAUSTED)
        }
        Err(e) => Err(e.into()),
    }
}

/// A named self-test check.
type Check = (&'static str, fn() -> bool);

fn selftest_checks() -> Vec<Check> {
    fn round_trip() -> bool {
        (0..=8usize).all(|len| {
            (0..1u64 << len).all(|v| {
                let x = BitVector::from_u64(v, len);
                encode_stream(&x, len).and_then(|s| decode_exact(&s, len)).is_ok_and(|y| y == x)
            })
        })
    }
    fn full_sample_decode() -> bool {
        (1..=6usize).all(|len| {
            (0..1u64 << len).all(|v| {
                let x = BitVector::from_u64(v, len);
                let Ok(stream) = encode_stream(&x, len) else { return false };
                decode_from_samples(&StreamSamples::full(&stream), Fraction::from_integer(1))
                    .is_ok_and(|r| r.recovered == Some(x.clone()))
            })
        })
    }
    fn file_formats() -> bool {
        let x: BitVector = "1".parse().unwrap();
        encode_bytes(b"1", Some(1), DEFAULT_MAX_BLOCK).is_ok_and(|b| b == *b"HSTR\x01\x04\0\0\0\0\0\0\0\x08")
            && formats::parse_stream(&encode_bytes(b"1", None, DEFAULT_MAX_BLOCK).unwrap()).is_ok_and(|s| {
                decode_exact(&s, 1).is_ok_and(|y| y == x)
            })
    }
    fn cli_pipeline() -> bool {
        let Ok(stream) = encode_bytes(b"1011", None, DEFAULT_MAX_BLOCK) else { return false };
        let Ok((samples, _)) = sample_bytes(&stream, &Sampler::Periodic(1)) else { return false };
        decode_bytes(&samples, Fraction::from_integer(1)).is_ok_and(|r| r.recovered.as_deref() == Some("1011"))
    }
    fn adversary_zeros() -> bool {
        let decoders = [builtin_decoder("zeros").unwrap()];
        let empty = BitVector::zeros(0);
        let report =
            defeat_decoders(&BlockStreamEncoder, &decoders, &empty, &PositionSet::empty(0), &GameConfig::default());
        report.result.is_ok_and(|w| w.per_decoder.iter().all(|o| o.is_defeated()))
    }
    vec![
        ("stream round trip, sources up to 8 bits", round_trip),
        ("full-sample decode, sources up to 6 bits", full_sample_decode),
        ("stream file format", file_formats),
        ("encode/sample/decode pipeline", cli_pipeline),
        ("adversary against the zeros decoder", adversary_zeros),
    ]
}

fn cmd_selftest(stdout: &mut dyn Write) -> Result<i32> {
    let mut failed = 0;
    for (name, check) in selftest_checks() {
        let ok = check();
        failed += usize::from(!ok);
        writeln!(stdout, "{} {name}", if ok { "PASS" } else { "FAIL" })?;
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_ERROR })
}

/// Runs a parsed command with an explicit block cap.
pub fn execute(cli: &Cli, max_block: usize, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Encode(args) => cmd_encode(args, max_block, stdout),
        Command::Sample(args) => cmd_sample(args, stdout),
        Command::Decode(args) => cmd_decode(args, stdout),
        Command::Adversary(args) => cmd_adversary(args, stdout, stderr),
        Command::Selftest => cmd_selftest(stdout),
    }
}

/// Parses `args` (program name first) and runs the command, reading the block
/// cap from `HSTREAM_MAX_BLOCK`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let result = max_block_from(std::env::var(MAX_BLOCK_ENV).ok().as_deref())
        .and_then(|cap| execute(&cli, cap, stdout, stderr));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "hstream: {e}");
            EXIT_ERROR
        }
    }
}
