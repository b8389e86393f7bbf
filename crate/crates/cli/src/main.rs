use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use imgcrypt::analysis::xor_equivalence_map;
use imgcrypt::attacks::cpa::{run_cpa, CandidateKeyFragment, FULL_IMAGE_COUNT};
use imgcrypt::attacks::{
    craft_cpa_images, craft_probe_image, find_identical_cipher_blocks, first_block_search, infer_k10_candidates,
    kpa_mask_attack, ECONOMY_OFFSETS,
};
use imgcrypt::audit::{audit_key, KeyAuditReport};
use imgcrypt::cipher::{derive_global_seed, process_image_with, process_images_with, Direction};
use imgcrypt::experiments::{run_experiment, ExperimentKind, ExperimentSpec, ImageSource, KeyPolicy};
use imgcrypt::ppm::{load_ppm, save_ppm};
use imgcrypt::{Error, Exec, RgbImage, SecretKey};

/// Chaos-based image cipher with key audit and cryptanalysis tools.
#[derive(Parser)]
#[command(name = "imgcrypt", version, about)]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a binary PPM image.
    Encrypt(CryptArgs),
    /// Decrypt a binary PPM image.
    Decrypt(CryptArgs),
    /// Report invalid, weak and equivalent-key findings for a key.
    Audit {
        #[arg(long)]
        key: String,
        /// Also write the report as a CSV row.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run an attack against a key, simulating the encryption oracle.
    #[command(subcommand)]
    Attack(AttackCommand),
    /// Tabulate an experiment as CSV.
    Stats(StatsArgs),
}

#[derive(Args)]
struct CryptArgs {
    #[arg(long)]
    key: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AttackCommand {
    /// Infer K10 from identical cipher blocks of the probe image.
    K10Probe {
        /// Key used to encrypt the probe.
        #[arg(long, required_unless_present = "input")]
        key: Option<String>,
        /// Ciphertext of a probe image, instead of encrypting one.
        #[arg(long = "in", conflicts_with = "key")]
        input: Option<PathBuf>,
        /// Side of the square probe image.
        #[arg(long, default_value_t = 512)]
        size: usize,
        /// Write the colliding block pairs here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Chosen-plaintext recovery of K4..K10 mod 128.
    Cpa {
        #[arg(long)]
        key: String,
        /// Number of chosen images, offsets 0..n.
        #[arg(long, default_value_t = 128)]
        images: usize,
        /// Use the 13-image offset set instead of --images.
        #[arg(long)]
        economy: bool,
        /// Side of the square base image.
        #[arg(long, default_value_t = 256)]
        size: usize,
        /// Seed of the base noise image.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the candidate fragments here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Known-plaintext masking attack.
    Kpa {
        #[arg(long)]
        key: String,
        /// Known plain-image; seeded noise when absent.
        #[arg(long)]
        known: Option<PathBuf>,
        /// Plain-image whose ciphertext is attacked; seeded gradient when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Recovered image.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exhaustive (Y0, K10) search on the first block.
    FirstBlock {
        /// Key that produces the block pair; its K4..K9 form the hypothesis.
        #[arg(long)]
        key: String,
        /// Plain-image whose block 0 is used; seeded noise when absent.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Comma-separated K10 candidates; all 256 values when absent.
        #[arg(long, value_delimiter = ',')]
        k10: Vec<u8>,
        #[arg(long, default_value_t = 12)]
        k10_grid_bits: u32,
        /// Trial cap.
        #[arg(long, default_value_t = 1 << 28)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct StatsArgs {
    /// len-dist, ps-curve, pb-curve, rn-curve or xor-eq-count.
    kind: String,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Fixed key; random keys from --seed otherwise.
    #[arg(long)]
    key: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override K10 of every key.
    #[arg(long)]
    k10: Option<u8>,
    /// Side of the generated square image.
    #[arg(long, default_value_t = 64)]
    size: usize,
    /// Use this image instead of generated noise.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// A file that could not be read as an image.
#[derive(Debug)]
struct ImageInputError(String);

impl fmt::Display for ImageInputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ImageInputError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ImageInputError>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::KeyFormat(_) => 2,
                Error::BadDimensions { .. } | Error::DimensionMismatch(..) | Error::MalformedPpm(_) => 3,
                Error::InvalidKey => 4,
                _ => 1,
            };
        }
    }
    1
}

fn parse_key(text: &str) -> Result<SecretKey> {
    Ok(text.parse::<SecretKey>()?)
}

fn read_image(path: &Path) -> Result<RgbImage> {
    let bytes = fs::read(path).map_err(|e| ImageInputError(format!("{}: {e}", path.display())))?;
    load_ppm(&bytes).with_context(|| format!("reading {}", path.display()))
}

fn write_image(path: &Path, img: &RgbImage) -> Result<()> {
    fs::write(path, save_ppm(img)).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn crypt(args: &CryptArgs, direction: Direction, exec: Exec) -> Result<()> {
    let key = parse_key(&args.key)?;
    let img = read_image(&args.input)?;
    let out = process_image_with(&img, &key, direction, exec)?;
    write_image(&args.out, &out)
}

fn audit(key: &str, csv: Option<&Path>) -> Result<()> {
    let report = audit_key(&parse_key(key)?);
    print!("{}", report.to_kv_text());
    if let Some(path) = csv {
        write_text(path, &format!("{}\n{}\n", KeyAuditReport::CSV_HEADER, report.to_csv_row()))?;
    }
    Ok(())
}

fn k10_probe(key: Option<&str>, input: Option<&Path>, size: usize, csv: Option<&Path>, exec: Exec) -> Result<()> {
    let (cipher, origin) = match (key, input) {
        (_, Some(path)) => (read_image(path)?, path.display().to_string()),
        (Some(k), None) => {
            let key = parse_key(k)?;
            let probe = craft_probe_image(size, size)?;
            (process_image_with(&probe, &key, Direction::Encrypt, exec)?, format!("key={key}"))
        }
        (None, None) => bail!("either --key or --in is required"),
    };
    let pairs = find_identical_cipher_blocks(&cipher)?;
    println!("pairs = {}", pairs.pair_count());
    if let Some(path) = csv {
        let mut text = format!("# attack=k10-probe {origin} size={}x{}\nk0,k1\n", cipher.width(), cipher.height());
        for (a, b) in pairs.pairs() {
            text.push_str(&format!("{a},{b}\n"));
        }
        write_text(path, &text)?;
    }
    match infer_k10_candidates(&pairs) {
        Ok(inf) => {
            println!("t_bound = {}", inf.t_bound);
            let list: Vec<String> = inf.candidates.iter().map(u8::to_string).collect();
            println!("k10_candidates = {}", list.join(" "));
            println!("advisory = {}", inf.advisory);
            if let Some(w) = inf.warning {
                eprintln!("warning: {w}");
            }
        }
        Err(Error::EmptyEvidence) => println!("no identical cipher blocks; attack inconclusive"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cpa(key: &str, images: usize, economy: bool, size: usize, seed: u64, csv: Option<&Path>, exec: Exec) -> Result<()> {
    let key = parse_key(key)?;
    derive_global_seed(&key)?;
    let base = RgbImage::noise(size, size, seed)?;
    let plains = if economy {
        ECONOMY_OFFSETS.iter().map(|&l| base.xor_scalar(l)).collect()
    } else {
        if !(1..=FULL_IMAGE_COUNT).contains(&images) {
            bail!("--images must be in 1..=128");
        }
        craft_cpa_images(&base, images)?
    };
    let ciphers = process_images_with(&plains, &key, Direction::Encrypt, exec)?;
    let pairs: Vec<(RgbImage, RgbImage)> = plains.into_iter().zip(ciphers).collect();
    let outcome = run_cpa(&pairs, exec)?;
    let truth = CandidateKeyFragment::from_key(&key);
    println!("step2_survivors = {}", outcome.step2_survivors.len());
    println!("candidates = {}", outcome.fragments.len());
    println!("true_fragment = {}", truth.to_csv_row());
    println!("true_fragment_found = {}", outcome.fragments.binary_search(&truth).is_ok());
    if let Some(path) = csv {
        let n = pairs.len();
        let mut text = format!("# attack=cpa key={key} images={n} size={size}x{size} seed={seed}\n");
        text.push_str(CandidateKeyFragment::CSV_HEADER);
        text.push('\n');
        for f in &outcome.fragments {
            text.push_str(&f.to_csv_row());
            text.push('\n');
        }
        write_text(path, &text)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn kpa(
    key: &str,
    known: Option<&Path>,
    input: Option<&Path>,
    out: &Path,
    size: usize,
    seed: u64,
    csv: Option<&Path>,
    exec: Exec,
) -> Result<()> {
    let key = parse_key(key)?;
    let known = match known {
        Some(p) => read_image(p)?,
        None => RgbImage::noise(size, size, seed)?,
    };
    let target = match input {
        Some(p) => read_image(p)?,
        None => RgbImage::gradient(known.width(), known.height(), seed.wrapping_add(1))?,
    };
    let known_cipher = process_image_with(&known, &key, Direction::Encrypt, exec)?;
    let target_cipher = process_image_with(&target, &key, Direction::Encrypt, exec)?;
    let recovered = kpa_mask_attack(&known, &known_cipher, &target_cipher)?;
    write_image(out, &recovered)?;
    let bytes = 3 * target.len();
    let exact = recovered
        .pixels()
        .iter()
        .zip(target.pixels())
        .flat_map(|(r, t)| (0..3).map(move |c| r[c] == t[c]))
        .filter(|&ok| ok)
        .count();
    let xor_fraction = xor_equivalence_map(&key, target.width(), target.height(), exec)?.fraction();
    let row = format!(
        "{exact},{bytes},{:.6},{xor_fraction:.6}",
        exact as f64 / bytes as f64
    );
    println!("recovered_bytes,total_bytes,recovered_fraction,xor_equivalent_fraction");
    println!("{row}");
    if let Some(path) = csv {
        write_text(
            path,
            &format!("# attack=kpa key={key} seed={seed}\nrecovered_bytes,total_bytes,recovered_fraction,xor_equivalent_fraction\n{row}\n"),
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn first_block(
    key: &str,
    input: Option<&Path>,
    k10: &[u8],
    bits: u32,
    cap: u64,
    seed: u64,
    csv: Option<&Path>,
    exec: Exec,
) -> Result<()> {
    let key = parse_key(key)?;
    let plain = match input {
        Some(p) => read_image(p)?,
        None => RgbImage::noise(4, 4, seed)?,
    };
    let cipher = process_image_with(&plain, &key, Direction::Encrypt, exec)?;
    let candidates: Vec<u8> = if k10.is_empty() { (0..=255).collect() } else { k10.to_vec() };
    let hits = first_block_search(
        &plain.block(0)?,
        &cipher.block(0)?,
        &key.dynamic_subkeys(),
        &candidates,
        bits,
        cap,
        exec,
    )?;
    let mut text = format!("# attack=first-block key={key} grid_bits={bits}\ny0,y0_numerator,k10\n");
    for (y0, k) in &hits {
        text.push_str(&format!("{y0:.10},{},{k}\n", (y0 * f64::from(1u32 << 24)) as u32));
    }
    print!("{text}");
    if let Some(path) = csv {
        write_text(path, &text)?;
    }
    Ok(())
}

fn stats(args: &StatsArgs, exec: Exec) -> Result<()> {
    let kind: ExperimentKind = args.kind.parse()?;
    let key = match &args.key {
        Some(k) => KeyPolicy::Fixed(parse_key(k)?),
        None => KeyPolicy::Random { seed: args.seed },
    };
    let image = match &args.input {
        Some(p) => ImageSource::Provided(read_image(p)?),
        None => ImageSource::Generated {
            width: args.size,
            height: args.size,
            seed: args.seed,
        },
    };
    let spec = ExperimentSpec {
        kind,
        trials: args.trials,
        key,
        k10: args.k10,
        image,
    };
    let table = run_experiment(&spec, exec)?.to_csv();
    match &args.csv {
        Some(path) => write_text(path, &table),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match cli.command {
        Command::Encrypt(args) => crypt(&args, Direction::Encrypt, exec),
        Command::Decrypt(args) => crypt(&args, Direction::Decrypt, exec),
        Command::Audit { key, csv } => audit(&key, csv.as_deref()),
        Command::Attack(AttackCommand::K10Probe { key, input, size, csv }) => {
            k10_probe(key.as_deref(), input.as_deref(), size, csv.as_deref(), exec)
        }
        Command::Attack(AttackCommand::Cpa {
            key,
            images,
            economy,
            size,
            seed,
            csv,
        }) => cpa(&key, images, economy, size, seed, csv.as_deref(), exec),
        Command::Attack(AttackCommand::Kpa {
            key,
            known,
            input,
            out,
            size,
            seed,
            csv,
        }) => kpa(&key, known.as_deref(), input.as_deref(), &out, size, seed, csv.as_deref(), exec),
        Command::Attack(AttackCommand::FirstBlock {
            key,
            input,
            k10,
            k10_grid_bits,
            trials,
            seed,
            csv,
        }) => first_block(&key, input.as_deref(), &k10, k10_grid_bits, trials, seed, csv.as_deref(), exec),
        Command::Stats(args) => stats(&args, exec),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
