//! Encryption timing across AES key sizes and buffer sizes.
//!
//! Each (key size, buffer size) pair gets one random buffer, generated
//! outside the timed region, which is then encrypted in place `repetitions`
//! times after one warm-up pass. Rows report the median wall time and, where the platform exposes
//! it, the median process CPU time. Timed regions run on the calling thread.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::aes::{expand_key, KeySchedule, KeySize, BLOCK_LEN};
use crate::sector::{SectorIndex, XtsKeys, SECTOR_SIZE};

/// The file-size sweep: 321 KB to 7.139 MB.
pub const DEFAULT_FILE_SIZES: [usize; 4] = [321_000, 1_000_000, 3_000_000, 7_139_000];
pub const DEFAULT_REPETITIONS: usize = 11;

pub const CSV_HEADER: &str = "key_bits,file_bytes,wall_ms,cpu_ms,throughput_mbps,overhead_vs_128";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    /// XTS over 512-byte sectors, as the volume data path does it.
    SectorPipeline,
    /// Bare block encryption over consecutive 16-byte blocks.
    RawBlocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Table,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("monotonic clock did not advance")]
    ClockUnavailable,
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no rows to report")]
    EmptyRows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub file_sizes: Vec<usize>,
    pub key_sizes: Vec<KeySize>,
    pub repetitions: usize,
    pub mode: BenchMode,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            file_sizes: DEFAULT_FILE_SIZES.to_vec(),
            key_sizes: KeySize::ALL.to_vec(),
            repetitions: DEFAULT_REPETITIONS,
            mode: BenchMode::SectorPipeline,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.file_sizes.is_empty() || self.key_sizes.is_empty() {
            return Err(BenchError::InvalidConfig("need at least one file size and key size"));
        }
        if self.file_sizes.iter().any(|&s| s < SECTOR_SIZE) {
            return Err(BenchError::InvalidConfig("file sizes must be at least 512 bytes"));
        }
        if self.repetitions == 0 || self.repetitions.is_multiple_of(2) {
            return Err(BenchError::InvalidConfig("repetitions must be odd"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub key_size: KeySize,
    pub file_size: usize,
    pub wall_ms: f64,
    /// `None` where process CPU time is not available.
    pub cpu_ms: Option<f64>,
    pub throughput_mbps: f64,
    /// `wall_ms / wall_ms(AES-128)` at the same file size; `None` when
    /// AES-128 was not measured.
    pub overhead_vs_128: Option<f64>,
}

/// Consumed process CPU time, if the platform reports it.
pub fn process_cpu_time() -> Option<Duration> {
    #[cfg(unix)]
    {
        let mut ts = libc::timespec {
            tv_sec: 0,
            tv_nsec: 0,
        };
        // SAFETY: ts is a valid, writable timespec.
        let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
        if rc == 0 {
            return Some(Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32));
        }
        None
    }
    #[cfg(not(unix))]
    {
        None
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

fn encrypt_pass(mode: BenchMode, keys: &XtsKeys, data_key: &KeySchedule, buf: &mut [u8]) {
    match mode {
        BenchMode::SectorPipeline => {
            for (i, chunk) in buf.chunks_exact_mut(SECTOR_SIZE).enumerate() {
                keys.encrypt_sector_in_place(SectorIndex(i as u64), chunk.try_into().unwrap());
            }
        }
        BenchMode::RawBlocks => {
            for chunk in buf.chunks_exact_mut(BLOCK_LEN) {
                data_key.encrypt_in_place(chunk.try_into().unwrap());
            }
        }
    }
}

pub fn run_bench<R: RngCore + CryptoRng>(
    cfg: &BenchConfig,
    rng: &mut R,
) -> Result<Vec<BenchRow>, BenchError> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.file_sizes.len() * cfg.key_sizes.len());
    for &file_size in &cfg.file_sizes {
        // Zero-padded to whole sectors, as stored files are.
        let padded = file_size.div_ceil(SECTOR_SIZE) * SECTOR_SIZE;
        let mut subjects: Vec<Subject> = cfg
            .key_sizes
            .iter()
            .map(|&key_size| {
                let mut material = vec![0u8; 2 * key_size.key_len()];
                rng.fill_bytes(&mut material);
                let mut buf = vec![0u8; padded];
                rng.fill_bytes(&mut buf[..file_size]);
                Subject {
                    key_size,
                    keys: XtsKeys::from_material(key_size, &material),
                    data_key: expand_key(&material[..key_size.key_len()]).expect("valid length"),
                    buf,
                    walls: Vec::with_capacity(cfg.repetitions),
                    cpus: Vec::with_capacity(cfg.repetitions),
                }
            })
            .collect();

        // One untimed pass each, then repetitions round-robin across key
        // sizes so clock-frequency drift hits every key size alike.
        for s in &mut subjects {
            encrypt_pass(cfg.mode, &s.keys, &s.data_key, black_box(&mut s.buf));
        }
        for _ in 0..cfg.repetitions {
            for s in &mut subjects {
                let cpu_start = process_cpu_time();
                let start = Instant::now();
                encrypt_pass(cfg.mode, &s.keys, &s.data_key, black_box(&mut s.buf));
                let wall = start.elapsed();
                let cpu_end = process_cpu_time();
                black_box(&s.buf);
                if wall.is_zero() {
                    return Err(BenchError::ClockUnavailable);
                }
                s.walls.push(wall.as_secs_f64() * 1e3);
                if let (Some(a), Some(b)) = (cpu_start, cpu_end) {
                    s.cpus.push(b.saturating_sub(a).as_secs_f64() * 1e3);
                }
            }
        }

        let first = rows.len();
        for mut s in subjects {
            let wall_ms = median(&mut s.walls);
            let cpu_ms = (s.cpus.len() == cfg.repetitions).then(|| median(&mut s.cpus));
            rows.push(BenchRow {
                key_size: s.key_size,
                file_size,
                wall_ms,
                cpu_ms,
                throughput_mbps: file_size as f64 / 1e6 / (wall_ms / 1e3),
                overhead_vs_128: None,
            });
        }
        let baseline = rows[first..]
            .iter()
            .find(|r| r.key_size == KeySize::Aes128)
            .map(|r| r.wall_ms);
        if let Some(base) = baseline {
            for row in &mut rows[first..] {
                row.overhead_vs_128 = Some(row.wall_ms / base);
            }
        }
    }
    Ok(rows)
}

struct Subject {
    key_size: KeySize,
    keys: XtsKeys,
    data_key: KeySchedule,
    buf: Vec<u8>,
    walls: Vec<f64>,
    cpus: Vec<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.3}"))
}

/// Renders rows as CSV (header [`CSV_HEADER`], three decimals, `NA` for
/// unavailable values) or as an aligned text table.
pub fn emit_report(rows: &[BenchRow], format: ReportFormat) -> Result<String, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::EmptyRows);
    }
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.key_size.bits().to_string(),
                r.file_size.to_string(),
                format!("{:.3}", r.wall_ms),
                opt(r.cpu_ms),
                format!("{:.3}", r.throughput_mbps),
                opt(r.overhead_vs_128),
            ]
        })
        .collect();
    let header: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in &cells {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        ReportFormat::Table => {
            let widths: Vec<usize> = (0..6)
                .map(|i| cells.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap())
                .collect();
            let line = |out: &mut String, fields: &[&str]| {
                let parts: Vec<String> = fields
                    .iter()
                    .zip(&widths)
                    .map(|(f, w)| format!("{f:>w$}"))
                    .collect();
                let _ = writeln!(out, "{}", parts.join("  "));
            };
            line(&mut out, &header);
            for row in &cells {
                let fields: Vec<&str> = row.iter().map(String::as_str).collect();
                line(&mut out, &fields);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn row(key_size: KeySize, wall_ms: f64) -> BenchRow {
        BenchRow {
            key_size,
            file_size: 321_000,
            wall_ms,
            cpu_ms: None,
            throughput_mbps: 321_000.0 / 1e6 / (wall_ms / 1e3),
            overhead_vs_128: Some(1.0),
        }
    }

    #[test]
    fn config_validation() {
        assert!(BenchConfig::default().validate().is_ok());
        let mut c = BenchConfig::default();
        c.repetitions = 10;
        assert!(c.validate().is_err());
        c.repetitions = 0;
        assert!(c.validate().is_err());
        let mut c = BenchConfig::default();
        c.file_sizes = vec![511];
        assert!(c.validate().is_err());
        let mut c = BenchConfig::default();
        c.key_sizes.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_run_shapes_rows() {
        let cfg = BenchConfig {
            file_sizes: vec![512, 4096],
            key_sizes: KeySize::ALL.to_vec(),
            repetitions: 3,
            mode: BenchMode::RawBlocks,
        };
        let rows = run_bench(&cfg, &mut StdRng::seed_from_u64(5)).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.wall_ms > 0.0);
            assert!(r.throughput_mbps > 0.0);
        }
        assert_eq!(rows[0].overhead_vs_128, Some(1.0));
        assert_eq!(rows[3].overhead_vs_128, Some(1.0));
        #[cfg(unix)]
        assert!(rows.iter().all(|r| r.cpu_ms.is_some()));
    }

    #[test]
    fn overhead_absent_without_baseline() {
        let cfg = BenchConfig {
            file_sizes: vec![1024],
            key_sizes: vec![KeySize::Aes256],
            repetitions: 1,
            mode: BenchMode::SectorPipeline,
        };
        let rows = run_bench(&cfg, &mut StdRng::seed_from_u64(6)).unwrap();
        assert_eq!(rows[0].overhead_vs_128, None);
        assert!(emit_report(&rows, ReportFormat::Csv).unwrap().ends_with(",NA\n"));
    }

    #[test]
    fn csv_one_row() {
        let csv = emit_report(&[row(KeySize::Aes192, 2.5)], ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines, vec![CSV_HEADER, "192,321000,2.500,NA,128.400,1.000"]);
    }

    #[test]
    fn empty_rows_rejected() {
        assert_eq!(emit_report(&[], ReportFormat::Csv), Err(BenchError::EmptyRows));
        assert_eq!(emit_report(&[], ReportFormat::Table), Err(BenchError::EmptyRows));
    }

    #[test]
    fn table_is_aligned() {
        let t = emit_report(&[row(KeySize::Aes128, 1.0), row(KeySize::Aes256, 123.456)], ReportFormat::Table)
            .unwrap();
        let widths: Vec<usize> = t.lines().map(str::len).collect();
        assert_eq!(widths.len(), 3);
        assert!(widths.iter().all(|&w| w == widths[0]));
    }

    #[test]
    fn median_of_odd_count() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [5.0]), 5.0);
    }
}
