//! `disktrust`: create encrypted containers and move files in and out of them.
//!
//! Every command is its own session: authenticate, operate, close.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use disktrust::bench::{emit_report, run_bench, BenchConfig, BenchMode, ReportFormat};
use disktrust::filestore::{delete_file, get_file, list_files, put_file};
use disktrust::kdf::DEFAULT_ITERATIONS;
use disktrust::{create_volume, mount, CreateOptions, Error, KeySize, MountHandle};
use rand::rngs::OsRng;

#[derive(Parser)]
#[command(name = "disktrust", version, about = "Encrypted file containers with optional hidden volumes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a new container (prompts for the password twice).
    Create {
        #[command(flatten)]
        common: Common,
        /// Container size; accepts K, M and G suffixes (binary multiples).
        #[arg(long, value_parser = parse_size)]
        size: u64,
        /// Also create a hidden volume of this size at the end of the container.
        #[arg(long, value_parser = parse_size)]
        hidden_size: Option<u64>,
        #[arg(long, default_value = "256", value_parser = parse_key_bits)]
        key_bits: KeySize,
    },
    /// Show volume kind, key size and data size.
    Info {
        #[command(flatten)]
        common: Common,
    },
    /// List stored files with their sizes.
    Ls {
        #[command(flatten)]
        common: Common,
    },
    /// Store a file under its file name.
    Put {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        protect: Protect,
        file: PathBuf,
    },
    /// Retrieve a file to stdout or `--out`.
    Get {
        #[command(flatten)]
        common: Common,
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Delete a stored file.
    Rm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        protect: Protect,
        name: String,
    },
    /// Time encryption across key sizes and buffer sizes.
    Bench {
        /// Comma-separated buffer sizes in bytes.
        #[arg(long, value_delimiter = ',', default_values_t = disktrust::bench::DEFAULT_FILE_SIZES)]
        sizes: Vec<usize>,
        /// Comma-separated key sizes.
        #[arg(long, value_delimiter = ',', default_value = "128,192,256", value_parser = parse_key_bits)]
        key_bits: Vec<KeySize>,
        #[arg(long, default_value_t = disktrust::bench::DEFAULT_REPETITIONS)]
        repetitions: usize,
        #[arg(long, value_enum, default_value_t = Mode::Sector)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    container: PathBuf,
    /// Read a password from this file (one trailing newline is stripped).
    /// Repeatable: the first is the primary password, the second the hidden
    /// or protection password. Without it, passwords are prompted for.
    #[arg(long)]
    password_file: Vec<PathBuf>,
    /// PBKDF2 iteration count.
    #[arg(long, default_value_t = DEFAULT_ITERATIONS, value_parser = clap::value_parser!(u32).range(1..))]
    iterations: u32,
}

#[derive(Args)]
struct Protect {
    /// Refuse writes that would land in the hidden volume (needs its password).
    #[arg(long)]
    protect: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sector,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

fn parse_size(s: &str) -> Result<u64, String> {
    let (digits, shift) = match s.char_indices().last() {
        Some((i, 'K' | 'k')) => (&s[..i], 10),
        Some((i, 'M' | 'm')) => (&s[..i], 20),
        Some((i, 'G' | 'g')) => (&s[..i], 30),
        _ => (s, 0),
    };
    let n: u64 = digits.parse().map_err(|_| format!("invalid size `{s}`"))?;
    n.checked_mul(1 << shift).ok_or_else(|| format!("size `{s}` too large"))
}

fn parse_key_bits(s: &str) -> Result<KeySize, String> {
    s.parse::<u32>()
        .ok()
        .and_then(KeySize::from_bits)
        .ok_or_else(|| format!("key bits must be 128, 192 or 256, got `{s}`"))
}

/// A failure with its exit status: 1 authentication, 2 usage, 3 I/O or corruption.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::AuthFail => 1,
            Error::BadGeometry(_)
            | Error::PasswordsEqual
            | Error::VolumeTooSmall { .. }
            | Error::NameExists
            | Error::NameTooLong
            | Error::InvalidName
            | Error::NotFound
            | Error::OutOfRange { .. } => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 3, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Failure>;

/// Supplies passwords from `--password-file` arguments in order, falling
/// back to terminal prompts.
struct Passwords<'a> {
    files: std::slice::Iter<'a, PathBuf>,
}

impl<'a> Passwords<'a> {
    fn new(files: &'a [PathBuf]) -> CliResult<Self> {
        if files.len() > 2 {
            return Err(Failure::usage("at most two --password-file arguments"));
        }
        Ok(Passwords { files: files.iter() })
    }

    fn next(&mut self, prompt: &str, confirm: bool) -> CliResult<Vec<u8>> {
        if let Some(path) = self.files.next() {
            let mut pw = fs::read(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            if pw.ends_with(b"\n") {
                pw.pop();
                if pw.ends_with(b"\r") {
                    pw.pop();
                }
            }
            return Ok(pw);
        }
        let pw = rpassword::prompt_password(format!("{prompt}: "))?;
        if confirm && rpassword::prompt_password(format!("Confirm {}: ", prompt.to_lowercase()))? != pw {
            return Err(Failure::usage("passwords do not match"));
        }
        Ok(pw.into_bytes())
    }
}

fn open(common: &Common, protect: bool) -> CliResult<MountHandle> {
    let mut pws = Passwords::new(&common.password_file)?;
    let primary = pws.next("Password", false)?;
    let hidden = if protect { Some(pws.next("Hidden volume password", false)?) } else { None };
    Ok(mount(&common.container, &primary, common.iterations, hidden.as_deref())?)
}

fn finish(mut h: MountHandle) -> CliResult<()> {
    Ok(h.close()?)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Create { common, size, hidden_size, key_bits } => {
            let mut pws = Passwords::new(&common.password_file)?;
            let outer = pws.next("Password", true)?;
            let mut opts = CreateOptions::new(size, outer).key_size(key_bits).iterations(common.iterations);
            if let Some(hidden_size) = hidden_size {
                opts = opts.hidden(hidden_size, pws.next("Hidden volume password", true)?);
            }
            create_volume(&common.container, &opts, &mut OsRng)?;
        }
        Command::Info { common } => {
            let h = open(&common, false)?;
            println!("kind: {}", h.kind());
            println!("key bits: {}", h.key_size().bits());
            println!("data size: {}", h.data_size());
            finish(h)?;
        }
        Command::Ls { common } => {
            let h = open(&common, false)?;
            let mut out = io::stdout().lock();
            for (name, len) in list_files(&h)? {
                writeln!(out, "{}\t{len}", String::from_utf8_lossy(&name))?;
            }
            finish(h)?;
        }
        Command::Put { common, protect, file } => {
            let name = stored_name(&file)?;
            let content = fs::read(&file)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", file.display())))?;
            let mut h = open(&common, protect.protect)?;
            put_file(&mut h, name.as_bytes(), &content)?;
            finish(h)?;
        }
        Command::Get { common, name, out } => {
            let h = open(&common, false)?;
            let content = get_file(&h, name.as_bytes())?;
            finish(h)?;
            match out {
                Some(path) => fs::write(path, content)?,
                None => io::stdout().lock().write_all(&content)?,
            }
        }
        Command::Rm { common, protect, name } => {
            let mut h = open(&common, protect.protect)?;
            delete_file(&mut h, name.as_bytes())?;
            finish(h)?;
        }
        Command::Bench { sizes, key_bits, repetitions, mode, format } => {
            let cfg = BenchConfig {
                file_sizes: sizes,
                key_sizes: key_bits,
                repetitions,
                mode: match mode {
                    Mode::Sector => BenchMode::SectorPipeline,
                    Mode::Raw => BenchMode::RawBlocks,
                },
            };
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Table => ReportFormat::Table,
            };
            let rows = run_bench(&cfg, &mut OsRng).map_err(|e| Failure::usage(e.to_string()))?;
            let report = emit_report(&rows, format).map_err(|e| Failure::usage(e.to_string()))?;
            io::stdout().lock().write_all(report.as_bytes())?;
        }
    }
    Ok(())
}

fn stored_name(file: &Path) -> CliResult<String> {
    file.file_name()
        .and_then(|n| n.to_str())
        .map(str::to_owned)
        .ok_or_else(|| Failure::usage(format!("{} has no usable file name", file.display())))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
