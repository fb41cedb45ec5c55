use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use coneraid::bench::{self, BenchConfig};
use coneraid::codec::{rs_generator_matrix, CodeSpec, Scheme, SyndromeKernel};
use coneraid::cone;
use coneraid::gf2::{self, BitMatrix};
use coneraid::primes;
use coneraid::shard::{self, DEFAULT_STRIPE_ROWS};

#[derive(Parser)]
#[command(name = "coneraid", version, about = "Cone-based RAID-6 erasure coding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a file into K data shards plus P and Q shards.
    Encode {
        input: PathBuf,
        #[command(flatten)]
        code: CodeArgs,
        /// Output directory for shard-NNN.bin files.
        #[arg(long)]
        out: PathBuf,
        /// Words per shard per stripe.
        #[arg(long, default_value_t = DEFAULT_STRIPE_ROWS)]
        stripe_rows: u32,
        #[arg(long)]
        json: bool,
    },
    /// Rebuild up to two missing or damaged shards and restore the file.
    Reconstruct {
        dir: PathBuf,
        /// Shard indices to treat as lost, e.g. 3,7.
        #[arg(long, value_delimiter = ',')]
        missing: Vec<usize>,
        /// Where to write the recovered file [default: DIR/recovered.bin].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Check both parity equations on every stripe.
    Scrub {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Brute-force check that a scheme's coefficient set is a cone.
    VerifyCone {
        /// zn-basic, zn-extended or rs256.
        #[arg(value_name = "SCHEME")]
        scheme_pos: Option<Scheme>,
        #[arg(value_name = "N")]
        prime_pos: Option<usize>,
        #[arg(long, conflicts_with = "scheme_pos")]
        scheme: Option<Scheme>,
        #[arg(long, conflicts_with = "prime_pos")]
        prime: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Classify the first LIMIT odd primes by the extension condition.
    ClassifyPrimes {
        #[arg(long, default_value_t = 100)]
        limit: usize,
        #[arg(long)]
        json: bool,
    },
    /// Time the syndrome kernels and reconstruction paths.
    Bench {
        /// Restrict to rs256 or zn-basic (the N = 17 kernel); repeatable.
        #[arg(long)]
        scheme: Vec<Scheme>,
        #[arg(long, default_value_t = bench::DEFAULT_DATA_DISKS)]
        data_disks: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        unroll: Vec<usize>,
        /// Data bytes per syndrome run, in MiB.
        #[arg(long, default_value_t = bench::DEFAULT_WORKING_SET >> 20)]
        working_set_mib: usize,
        /// Stripes per reconstruction timing.
        #[arg(long, default_value_t = bench::DEFAULT_RECONSTRUCT_ROWS)]
        stripe_rows: usize,
        #[arg(long, default_value_t = bench::DEFAULT_REPEATS)]
        repeats: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long, default_value = "zn-basic")]
    scheme: Scheme,
    /// N for zn schemes; ignored for rs256.
    #[arg(long, default_value_t = 17)]
    prime: usize,
    /// K [default: N for zn-basic, 2N-1 for zn-extended, 8 for rs256].
    #[arg(long)]
    data_disks: Option<usize>,
}

impl CodeArgs {
    fn spec(&self) -> Result<CodeSpec> {
        let k = self.data_disks.unwrap_or(match self.scheme {
            Scheme::ZnBasic => self.prime,
            Scheme::ZnExtended => (2 * self.prime).saturating_sub(1),
            Scheme::Rs256 => 8,
        });
        Ok(CodeSpec::new(self.scheme, self.prime, k)?)
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Encode {
            input,
            code,
            out,
            stripe_rows,
            json,
        } => {
            let spec = code.spec()?;
            let summary = shard::encode_file(&spec, stripe_rows, &input, &out)?;
            if json {
                print_json(&summary)?;
            } else {
                println!(
                    "{} shards, {} stripes of {} rows, {} bytes -> {}",
                    summary.shards.len(),
                    summary.stripes,
                    summary.stripe_rows,
                    summary.payload_len,
                    out.display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reconstruct {
            dir,
            missing,
            out,
            json,
        } => {
            let out = out.unwrap_or_else(|| dir.join("recovered.bin"));
            let report = shard::reconstruct_dir(&dir, &missing, &out)?;
            if json {
                print_json(&report)?;
            } else {
                for (i, reason) in &report.reasons {
                    println!("shard {i}: {reason}");
                }
                println!(
                    "rebuilt {:?}; {} bytes -> {}",
                    report.rebuilt,
                    report.payload_len,
                    out.display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Scrub { dir, json } => {
            let report = shard::scrub_dir(&dir)?;
            if json {
                print_json(&report)?;
            } else {
                println!(
                    "{} stripes, {} violations",
                    report.stripes,
                    report.violations.len()
                );
                for s in &report.violations {
                    println!("stripe {s}");
                }
            }
            Ok(if report.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::VerifyCone {
            scheme_pos,
            prime_pos,
            scheme,
            prime,
            json,
        } => {
            let Some(scheme) = scheme_pos.or(scheme) else {
                bail!("a scheme is required");
            };
            let prime = prime_pos.or(prime).unwrap_or(17);
            verify_cone(scheme, prime, json)
        }
        Command::ClassifyPrimes { limit, json } => {
            let rows = primes::scan_primes(limit)?;
            if json {
                for row in &rows {
                    print_json(row)?;
                }
            } else {
                println!(
                    "{:>6} {:>6} {:>5}  prim  fermat  mersenne  ext  witness",
                    "N", "ord2", "k"
                );
                for r in &rows {
                    let flag = |b: bool| if b { "yes" } else { "-" };
                    println!(
                        "{:>6} {:>6} {:>5}  {:<4}  {:<6}  {:<8}  {:<3}  {}",
                        r.prime,
                        r.order_of_2,
                        r.k,
                        flag(r.two_is_primitive_root),
                        flag(r.is_fermat),
                        flag(r.is_mersenne),
                        flag(r.passes_extension),
                        r.witness
                            .as_ref()
                            .map(|w| w.to_string())
                            .unwrap_or_default()
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            scheme,
            data_disks,
            unroll,
            working_set_mib,
            stripe_rows,
            repeats,
            json,
        } => {
            if let Some(bad) = unroll.iter().find(|u| !SyndromeKernel::UNROLLS.contains(u)) {
                bail!("unroll factor {bad} not in {:?}", SyndromeKernel::UNROLLS);
            }
            let kernels = if scheme.is_empty() {
                SyndromeKernel::ALL.to_vec()
            } else {
                scheme
                    .iter()
                    .map(|s| match s {
                        Scheme::Rs256 => Ok(SyndromeKernel::Rs256),
                        Scheme::ZnBasic => Ok(SyndromeKernel::Zn17),
                        Scheme::ZnExtended => bail!("bench covers rs256 and zn-basic only"),
                    })
                    .collect::<Result<_>>()?
            };
            let cfg = BenchConfig {
                kernels,
                unrolls: unroll,
                data_disks,
                working_set: working_set_mib.max(1) << 20,
                repeats,
                reconstruct_rows: stripe_rows,
                ..BenchConfig::default()
            };
            let report = bench::run(&cfg)?;
            if json {
                for row in report.rows() {
                    print_json(&row)?;
                }
            } else {
                println!("syndrome (K = {data_disks}, {working_set_mib} MiB)");
                for r in &report.syndrome {
                    println!(
                        "  {:<12} x{:<2} {:>10.1} MB/s",
                        r.kernel_name, r.unroll_factor, r.throughput_mb_s
                    );
                }
                println!("reconstruction ({stripe_rows} stripes, ns)");
                for r in &report.reconstruction {
                    println!(
                        "  {:<10} {:?} {:>12}",
                        r.scheme.to_string(),
                        r.failure_class,
                        r.elapsed_ns
                    );
                }
                println!("ops per data word");
                for r in &report.op_counts {
                    println!("  {:<12} {}", r.kernel_name, r.ops_per_word);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct ConeReport {
    scheme: Scheme,
    #[serde(rename = "N")]
    prime: Option<usize>,
    elements: usize,
    ok: bool,
    failure: Option<String>,
    witness: Option<Vec<String>>,
}

fn verify_cone(scheme: Scheme, prime: usize, json: bool) -> Result<ExitCode> {
    let (expected, result) = match scheme {
        Scheme::Rs256 => (255, cone::cyclic_cone(&rs_generator_matrix(), 255)),
        Scheme::ZnBasic | Scheme::ZnExtended => {
            if !primes::is_odd_prime(prime as u64) {
                bail!("N = {prime} is not an odd prime");
            }
            if prime - 1 > gf2::MAX_DIM {
                bail!("N = {prime} exceeds the {}-bit word limit", gf2::MAX_DIM);
            }
            let g = gf2::sylvester(prime).context("building the Sylvester matrix")?;
            if scheme == Scheme::ZnBasic {
                (prime, cone::cyclic_cone(&g, prime))
            } else {
                (2 * prime - 1, cone::extended_cone(&g, prime))
            }
        }
    };
    let report = match &result {
        Ok(c) => ConeReport {
            scheme,
            prime: scheme.is_zn().then_some(prime),
            elements: c.len(),
            ok: true,
            failure: None,
            witness: None,
        },
        Err(e) if e.is_violation() => ConeReport {
            scheme,
            prime: scheme.is_zn().then_some(prime),
            elements: expected,
            ok: false,
            failure: Some(e.to_string()),
            witness: e.witness().map(matrix_rows),
        },
        Err(e) => return Err(e.clone().into()),
    };
    if json {
        print_json(&report)?;
    } else if report.ok {
        println!("{} elements, OK", report.elements);
    } else {
        println!(
            "{} elements, FAILED: {}",
            report.elements,
            report.failure.as_deref().unwrap_or("")
        );
        for row in report.witness.iter().flatten() {
            println!("  {row}");
        }
    }
    Ok(if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn matrix_rows(m: &BitMatrix) -> Vec<String> {
    (0..m.dim())
        .map(|r| {
            (0..m.dim())
                .map(|c| if m.get(r, c) { '1' } else { '0' })
                .collect()
        })
        .collect()
}
