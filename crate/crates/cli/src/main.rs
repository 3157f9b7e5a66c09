//! `spinel`: hashing, signing, stream generation, parameter analysis and
//! benchmarks from the command line.
//!
//! Exit status is 0 on success, 1 when `verify` rejects and 2 on any error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spinel::analysis::{
    degradation_curve, enumerate_candidates, keygen_cost_hashes, keygen_thash_calls,
    signature_size_bytes, signing_cost_hashes, signing_thash_calls, write_curve_csv, CandidateRow,
    DegradationQuery, RankBy, CANDIDATE_CSV_HEADER,
};
use spinel::bench::{run_bench, BenchOp, BenchResult, MIN_RUNS};
use spinel::params::{parameter_space, parse_registry, SpinelParams};
use spinel::randgen::{monobit_test, runs_test, stream, write_streams, Packing, StreamSpec};
use spinel::sign::{keygen, sign, verify, PublicKey, SecretKey, Signature, KEYGEN_ENTROPY_BYTES};

macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(io::stdout().lock(), $($arg)*)?
    };
}

#[derive(Parser)]
#[command(
    name = "spinel",
    version,
    about = "Hash-based signatures over a Cayley-walk hash"
)]
struct Cli {
    /// Output encoding. Each command accepts a subset; the first listed in
    /// its help is the default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads; 0 uses every core. Defaults to 1, except for
    /// `gen-sts` and `analyze`, which default to 0.
    #[arg(long, global = true, env = "SPINEL_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Hex,
    Raw,
    Csv,
    Kv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Hex => "hex",
            Format::Raw => "raw",
            Format::Csv => "csv",
            Format::Kv => "kv",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Hash a file or stdin. Formats: hex, raw.
    Hash {
        /// Input file; stdin when absent or `-`.
        input: Option<PathBuf>,
    },
    /// Generate a key pair. Formats: raw, hex (file encoding).
    Keygen {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        sk_out: PathBuf,
        #[arg(long)]
        pk_out: PathBuf,
        /// File holding 192 bytes of key entropy; the OS generator otherwise.
        #[arg(long)]
        entropy: Option<PathBuf>,
    },
    /// Sign a message. Formats: raw, hex.
    Sign {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        sk: PathBuf,
        /// Message file; stdin when `-`.
        #[arg(long, default_value = "-")]
        msg: PathBuf,
        /// Signature file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// 64 bytes of hex mixed into the randomizer. Zero when absent.
        #[arg(long)]
        opt_rand: Option<String>,
    },
    /// Verify a signature; exits 1 on reject. Formats: kv.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        sig: PathBuf,
        /// Message file; stdin when `-`.
        #[arg(long, default_value = "-")]
        msg: PathBuf,
    },
    /// Write hash bit streams for external randomness testing. Formats: kv
    /// (summary), csv (per-stream smoke tests).
    GenSts {
        /// Number of streams.
        #[arg(long, default_value_t = 100)]
        count: u64,
        /// Bits per stream.
        #[arg(long, default_value_t = 1_000_000)]
        bits: u64,
        #[arg(long)]
        out: PathBuf,
        /// First stream id.
        #[arg(long, default_value_t = 0)]
        id_offset: u64,
        #[arg(long, value_enum, default_value_t = PackingArg::Packed)]
        packing: PackingArg,
    },
    /// Security and cost analysis.
    Analyze {
        #[command(subcommand)]
        command: AnalyzeCommand,
    },
    /// Time operations: medians over runs. Formats: kv, csv.
    Bench {
        #[command(flatten)]
        params: ParamArgs,
        /// Operation to time; repeat for several. All when absent.
        #[arg(long = "op")]
        ops: Vec<String>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
    },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Security degradation over a range of signature counts 2^m.
    /// Formats: csv, kv.
    Degrade {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0.0)]
        m_min: f64,
        #[arg(long, default_value_t = 80.0)]
        m_max: f64,
        #[arg(long, default_value_t = 1.0)]
        m_step: f64,
        /// Baseline exponent for the security loss.
        #[arg(long, default_value_t = 0.0)]
        m0: f64,
        /// Nominal security in bits.
        #[arg(long, default_value_t = 256.0)]
        target: f64,
    },
    /// Sizes and costs of one set, or with `--budget`, every registry set
    /// meeting a security floor. Formats: kv, csv.
    Params {
        #[command(flatten)]
        params: ParamArgs,
        /// Signature budget as log2 of the count; enables enumeration.
        #[arg(long)]
        budget: Option<f64>,
        /// Minimum effective security in bits at the budget.
        #[arg(long, default_value_t = 128.0)]
        sigma: f64,
        /// Registry file with one `h d b k w` row per line; the built-in
        /// parameter space when absent.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RankArg::Cost)]
        rank: RankArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PackingArg {
    Packed,
    Raw,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RankArg {
    Cost,
    Size,
}

#[derive(Args)]
struct ParamArgs {
    /// Parameter set: F1-F10, P1-P10, desk, or "h,d,b,k,w".
    #[arg(long = "set", env = "SPINEL_PARAMS")]
    set: Option<String>,
    /// Explicit hypertree height; with -d, -b, -k and -w overrides --set.
    #[arg(short = 'H', long = "height", requires_all = ["layers", "fors_height", "fors_trees", "winternitz"])]
    height: Option<u32>,
    #[arg(short = 'd', long = "layers", requires = "height")]
    layers: Option<u32>,
    #[arg(short = 'b', long = "fors-height", requires = "height")]
    fors_height: Option<u32>,
    #[arg(short = 'k', long = "fors-trees", requires = "height")]
    fors_trees: Option<u32>,
    #[arg(short = 'w', long = "winternitz", requires = "height")]
    winternitz: Option<u32>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<SpinelParams> {
        if let (Some(h), Some(d), Some(b), Some(k), Some(w)) = (
            self.height,
            self.layers,
            self.fors_height,
            self.fors_trees,
            self.winternitz,
        ) {
            return Ok(SpinelParams::new(h, d, b, k, w)?);
        }
        match &self.set {
            Some(s) => Ok(s.parse()?),
            None => {
                bail!("no parameter set: pass --set, explicit -H/-d/-b/-k/-w, or SPINEL_PARAMS")
            }
        }
    }
}

fn pick_format(requested: Option<Format>, allowed: &[Format], command: &str) -> Result<Format> {
    match requested {
        None => Ok(allowed[0]),
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => {
            let names: Vec<&str> = allowed.iter().map(|a| a.name()).collect();
            bail!(
                "format {} is not supported by {command} (use {})",
                f.name(),
                names.join(", ")
            )
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        Ok(buf)
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))
    }
}

/// Reads a key or signature file stored raw or as hex text.
fn read_encoded(path: &Path, what: &str, raw_len: usize) -> Result<Vec<u8>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() == raw_len {
        return Ok(bytes);
    }
    let text = String::from_utf8_lossy(&bytes);
    match hex::decode(text.trim()) {
        Ok(decoded) if decoded.len() == raw_len => Ok(decoded),
        _ => bail!(
            "malformed {what} file {}: expected {raw_len} raw bytes or {} hex digits, got {} bytes",
            path.display(),
            2 * raw_len,
            bytes.len()
        ),
    }
}

fn encode(bytes: &[u8], format: Format) -> Vec<u8> {
    match format {
        Format::Hex => format!("{}\n", hex::encode(bytes)).into_bytes(),
        _ => bytes.to_vec(),
    }
}

fn write_output(path: Option<&Path>, data: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, data).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(data)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn params_field(p: &SpinelParams) -> String {
    let [h, d, b, k, w] = p.as_array();
    format!("{h},{d},{b},{k},{w}")
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow!("configuring worker threads: {e}"))
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(n: usize) -> Result<()> {
    if n > 1 {
        bail!("--threads {n}: built without the parallel feature");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// A closed stdout (e.g. piping into `head`) ends output quietly.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let fan_out = matches!(
        cli.command,
        Command::GenSts { .. } | Command::Analyze { .. }
    );
    configure_threads(cli.threads.unwrap_or(if fan_out { 0 } else { 1 }))?;
    let fmt = cli.format;

    match cli.command {
        Command::Hash { input } => {
            let f = pick_format(fmt, &[Format::Hex, Format::Raw], "hash")?;
            let data = read_input(input.as_deref().unwrap_or(Path::new("-")))?;
            write_output(None, &encode(spinel::hash(&data).as_bytes(), f))?;
        }
        Command::Keygen {
            params,
            sk_out,
            pk_out,
            entropy,
        } => {
            let f = pick_format(fmt, &[Format::Raw, Format::Hex], "keygen")?;
            let p = params.resolve()?;
            let seed = match entropy {
                Some(path) => {
                    let e =
                        fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
                    if e.len() != KEYGEN_ENTROPY_BYTES {
                        bail!(
                            "malformed entropy file {}: expected {KEYGEN_ENTROPY_BYTES} bytes, got {}",
                            path.display(),
                            e.len()
                        );
                    }
                    e
                }
                None => {
                    let mut e = vec![0u8; KEYGEN_ENTROPY_BYTES];
                    getrandom::getrandom(&mut e)
                        .map_err(|e| anyhow!("OS random generator: {e}"))?;
                    e
                }
            };
            let (sk, pk) = keygen(&seed, &p)?;
            write_output(Some(&sk_out), &encode(&sk.to_bytes(), f))?;
            write_output(Some(&pk_out), &encode(&pk.to_bytes(), f))?;
        }
        Command::Sign {
            params,
            sk,
            msg,
            out,
            opt_rand,
        } => {
            let f = pick_format(fmt, &[Format::Raw, Format::Hex], "sign")?;
            let p = params.resolve()?;
            let sk =
                SecretKey::from_bytes(&read_encoded(&sk, "secret key", SpinelParams::SK_BYTES)?)?;
            let opt = match opt_rand {
                Some(h) => {
                    let bytes = hex::decode(h.trim()).context("--opt-rand is not hex")?;
                    let arr: [u8; 64] = bytes.try_into().map_err(|b: Vec<u8>| {
                        anyhow!("--opt-rand must be 64 bytes, got {}", b.len())
                    })?;
                    Some(arr)
                }
                None => None,
            };
            let m = read_input(&msg)?;
            let sig = sign(&m, &sk, opt.as_ref(), &p);
            write_output(out.as_deref(), &encode(&sig.to_bytes(), f))?;
        }
        Command::Verify {
            params,
            pk,
            sig,
            msg,
        } => {
            pick_format(fmt, &[Format::Kv], "verify")?;
            let p = params.resolve()?;
            let pk =
                PublicKey::from_bytes(&read_encoded(&pk, "public key", SpinelParams::PK_BYTES)?)?;
            let sig = Signature::from_bytes(&read_encoded(&sig, "signature", p.sig_bytes())?, &p)?;
            let m = read_input(&msg)?;
            if verify(&m, &sig, &pk, &p) {
                outln!("result=accept");
            } else {
                outln!("result=reject");
                return Ok(ExitCode::from(1));
            }
        }
        Command::GenSts {
            count,
            bits,
            out,
            id_offset,
            packing,
        } => {
            let f = pick_format(fmt, &[Format::Kv, Format::Csv], "gen-sts")?;
            if count == 0 || bits == 0 {
                bail!("--count and --bits must be at least 1");
            }
            if id_offset.checked_add(count - 1).is_none() {
                bail!("stream ids {id_offset} + {count} overflow 64 bits");
            }
            let spec = StreamSpec {
                count,
                bits_per_stream: bits,
                id_offset,
                packing: match packing {
                    PackingArg::Packed => Packing::Packed,
                    PackingArg::Raw => Packing::Raw,
                },
            };
            let written = write_streams(&spec, &out)?;
            match f {
                Format::Kv => outln!(
                    "streams={count} bits_per_stream={bits} bytes={written} calls_per_stream={}",
                    spec.calls_per_stream()
                ),
                _ => {
                    outln!("stream,ones,monobit_p,runs_p");
                    for id in id_offset..id_offset + count {
                        let s = stream(id, bits, spec.packing);
                        let mono = monobit_test(&s).map_or("NA".into(), |p| format!("{p:.6}"));
                        let runs = runs_test(&s).map_or("NA".into(), |p| format!("{p:.6}"));
                        outln!("{id},{},{mono},{runs}", s.count_ones());
                    }
                }
            }
        }
        Command::Analyze {
            command:
                AnalyzeCommand::Degrade {
                    params,
                    m_min,
                    m_max,
                    m_step,
                    m0,
                    target,
                },
        } => {
            let f = pick_format(fmt, &[Format::Csv, Format::Kv], "analyze degrade")?;
            let p = params.resolve()?;
            if !(m_step > 0.0 && m_min >= 0.0 && m_max >= m_min && m0 >= 0.0) {
                bail!("m range: need 0 <= m-min <= m-max, m0 >= 0 and m-step > 0");
            }
            let steps = ((m_max - m_min) / m_step + 1e-9).floor() as usize;
            let ms: Vec<f64> = (0..=steps).map(|i| m_min + i as f64 * m_step).collect();
            let q = DegradationQuery {
                m0,
                target_bits: target,
                ..DegradationQuery::new(&p, m_min)
            };
            let points = degradation_curve(&q, &ms);
            let mut out = io::stdout().lock();
            match f {
                Format::Csv => write_curve_csv(&mut out, &points)?,
                _ => {
                    for pt in &points {
                        let s = &pt.security;
                        writeln!(
                            out,
                            "m={} p={} sec={:.6} delta_sec={:.6} sec_eff={:.6}",
                            pt.m,
                            s.p.to_sci(),
                            s.sec,
                            s.delta,
                            s.effective
                        )?;
                    }
                }
            }
        }
        Command::Analyze {
            command:
                AnalyzeCommand::Params {
                    params,
                    budget,
                    sigma,
                    registry,
                    rank,
                },
        } => match budget {
            None => {
                let f = pick_format(fmt, &[Format::Kv, Format::Csv], "analyze params")?;
                let p = params.resolve()?;
                let (sig, pk, sk, cost, kg) = (
                    signature_size_bytes(&p),
                    SpinelParams::PK_BYTES,
                    SpinelParams::SK_BYTES,
                    signing_cost_hashes(&p),
                    keygen_cost_hashes(&p),
                );
                if f == Format::Kv {
                    outln!("sig={sig} pk={pk} sk={sk} cost={cost}");
                    outln!(
                        "keygen_cost={kg} sign_thash_calls={} keygen_thash_calls={}",
                        signing_thash_calls(&p),
                        keygen_thash_calls(&p)
                    );
                } else {
                    outln!("h,d,b,k,w,sig,pk,sk,cost,keygen_cost");
                    outln!("{},{sig},{pk},{sk},{cost},{kg}", params_field(&p));
                }
            }
            Some(m_star) => {
                let f = pick_format(fmt, &[Format::Csv, Format::Kv], "analyze params --budget")?;
                if m_star < 0.0 {
                    bail!("--budget must be non-negative, got {m_star}");
                }
                let reg = match registry {
                    Some(path) => parse_registry(
                        &fs::read_to_string(&path)
                            .with_context(|| format!("reading {}", path.display()))?,
                    )
                    .with_context(|| format!("malformed registry file {}", path.display()))?,
                    None => parameter_space(),
                };
                let rank = match rank {
                    RankArg::Cost => RankBy::Cost,
                    RankArg::Size => RankBy::Size,
                };
                let rows = enumerate_candidates(m_star, sigma, &reg, rank);
                print_candidates(&rows, f)?;
            }
        },
        Command::Bench { params, ops, runs } => {
            let f = pick_format(fmt, &[Format::Kv, Format::Csv], "bench")?;
            let p = params.resolve()?;
            if runs < MIN_RUNS {
                bail!("--runs must be at least {MIN_RUNS}, got {runs}");
            }
            let ops: Vec<BenchOp> = if ops.is_empty() {
                BenchOp::ALL.to_vec()
            } else {
                ops.iter()
                    .map(|s| s.parse())
                    .collect::<spinel::Result<_>>()?
            };
            if f == Format::Csv {
                outln!("{BENCH_CSV_HEADER}");
            }
            for op in ops {
                let r = run_bench(op, &p, runs)?;
                outln!("{}", bench_line(&r, f));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_candidates(rows: &[CandidateRow], f: Format) -> Result<()> {
    if f == Format::Csv {
        outln!("{CANDIDATE_CSV_HEADER}");
        for r in rows {
            outln!("{}", r.csv_line());
        }
    } else {
        for r in rows {
            outln!(
                "params={} sig_bytes={} sign_cost_hashes={} keygen_cost_hashes={} sec_eff={:.6}",
                params_field(&r.params),
                r.sig_bytes,
                r.sign_cost_hashes,
                r.keygen_cost_hashes,
                r.sec_eff
            );
        }
    }
    Ok(())
}

const BENCH_CSV_HEADER: &str =
    "op,h,d,b,k,w,runs,iters_per_run,median_ns,median_cycles,thash_calls,per_run_ns";

fn bench_line(r: &BenchResult, f: Format) -> String {
    let cycles = r
        .median_cycles
        .map_or("NA".to_string(), |c| format!("{c:.0}"));
    let per_run: Vec<String> = r.per_run_ns.iter().map(|ns| format!("{ns:.0}")).collect();
    if f == Format::Csv {
        format!(
            "{},{},{},{},{:.0},{},{},{}",
            r.op,
            params_field(&r.params),
            r.runs,
            r.iters_per_run,
            r.median_ns,
            cycles,
            r.thash_calls,
            per_run.join(";")
        )
    } else {
        format!(
            "op={} params={} runs={} iters_per_run={} median_ns={:.0} median_cycles={} thash_calls={} per_run_ns={}",
            r.op,
            params_field(&r.params),
            r.runs,
            r.iters_per_run,
            r.median_ns,
            cycles,
            r.thash_calls,
            per_run.join(";")
        )
    }
}
