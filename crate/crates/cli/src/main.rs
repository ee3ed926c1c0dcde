use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use shortcode_core::bch::list_ebch_family;
use shortcode_core::polar::SnrKind;
use shortcode_core::sim::{
    delta_table, group_curves, parse_code, parse_grid_bounds, read_records, run_sweep_with,
    write_delta_csv, write_json, write_records_to, Curve, DeltaStatus,
};
use shortcode_core::{DesignSnr, RateMode, SweepConfig};

#[derive(Parser)]
#[command(name = "shortcode-bench", version, about = "Short block code BER/FER benchmark over BPSK/AWGN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one or more codes over an Eb/N0 grid.
    Sweep(SweepArgs),
    /// Extra Eb/N0 the polar curves need over the eBCH curves at a target BER.
    Delta(DeltaArgs),
    /// Print a generator matrix.
    Export(ExportArgs),
    /// List the eBCH dimensions available at a length.
    List {
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Campaign file (TOML or JSON). Flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Code selector `family:N:K` (ebch, bch, polar, rm, uncoded); K may be `*`. Repeatable.
    #[arg(long = "code")]
    codes: Vec<String>,
    #[arg(long)]
    design_snr: Option<f64>,
    /// ebn0 or esn0.
    #[arg(long)]
    design_snr_kind: Option<SnrKind>,
    /// osd, sc, scl, scl-crc or uncoded.
    #[arg(long)]
    decoder: Option<String>,
    /// OSD reprocessing order.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    list_size: Option<usize>,
    /// crc6-itu, crc16-ccitt or none.
    #[arg(long)]
    crc: Option<String>,
    /// nominal (K/N) or payload ((K - crc)/N).
    #[arg(long)]
    rate_mode: Option<RateMode>,
    /// Count CRC bits as delivered bits in the BER.
    #[arg(long)]
    count_crc_bits: bool,
    /// Grid as start:step:stop in dB, or a single value.
    #[arg(long)]
    ebn0: Option<String>,
    #[arg(long)]
    min_frame_errors: Option<u64>,
    #[arg(long)]
    min_bit_errors: Option<u64>,
    #[arg(long)]
    max_frames: Option<u64>,
    /// Skip the rest of a curve once its BER falls below this.
    #[arg(long)]
    ber_floor: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// CSV output, rewritten after every point.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON mirror of the CSV.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write wall_seconds as 0 so reruns produce identical files.
    #[arg(long)]
    no_timing: bool,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct DeltaArgs {
    #[arg(long, default_value_t = 1e-3)]
    target_ber: f64,
    #[arg(long)]
    ebch: PathBuf,
    #[arg(long)]
    polar: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    code: String,
    #[arg(long, default_value_t = 5.0)]
    design_snr: f64,
    #[arg(long, default_value = "ebn0")]
    design_snr_kind: SnrKind,
    /// Print '.' for ones and blanks for zeros.
    #[arg(long)]
    dots: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sweep_config(a: &SweepArgs) -> Result<SweepConfig> {
    let mut cfg = match &a.config {
        Some(p) => SweepConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            if a.codes.is_empty() {
                bail!("give at least one --code or a --config file");
            }
            SweepConfig::new(Vec::new(), 0.0, 0.5, 8.0)
        }
    };
    if !a.codes.is_empty() {
        cfg.codes = a.codes.clone();
    }
    if let Some(g) = &a.ebn0 {
        (cfg.ebn0_start, cfg.ebn0_step, cfg.ebn0_stop) = parse_grid_bounds(g)?;
    }
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = a.$field.clone() { cfg.$field = v; })*
        };
    }
    set!(design_snr, design_snr_kind, decoder, order, list_size, crc, rate_mode);
    set!(min_frame_errors, min_bit_errors, max_frames, ber_floor, seed, workers);
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    if a.json.is_some() {
        cfg.json = a.json.clone();
    }
    cfg.count_crc_bits |= a.count_crc_bits;
    if a.no_timing {
        cfg.timing = false;
    }
    Ok(cfg)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let cfg = sweep_config(&a)?;
    for p in [&cfg.out, &cfg.json].into_iter().flatten() {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    let quiet = a.quiet;
    let curves = run_sweep_with::<f64>(&cfg, |r| {
        if !quiet {
            eprintln!(
                "{}:{}:{} {:>7} {:>5.2} dB  frames {:>9}  fe {:>6}  ber {:.3e}  fer {:.3e}",
                r.family, r.n, r.k, r.decoder, r.ebn0_db, r.frames, r.frame_errors, r.ber, r.fer
            );
        }
    })?;
    if cfg.out.is_none() && cfg.json.is_none() {
        let records: Vec<_> = curves.into_iter().flat_map(|c| c.points).collect();
        write_records_to(std::io::stdout().lock(), &records)?;
    }
    Ok(())
}

fn load_curves(path: &Path) -> Result<Vec<Curve>> {
    let recs = read_records(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(group_curves(&recs))
}

fn delta(a: DeltaArgs) -> Result<()> {
    let table = delta_table(&load_curves(&a.ebch)?, &load_curves(&a.polar)?, a.target_ber);
    if let Some(p) = &a.out {
        write_delta_csv(p, &table)?;
    }
    if let Some(p) = &a.json {
        write_json(p, &table)?;
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
    println!("{:>5} {:>5} {:>10} {:>10} {:>8}  status", "n", "k", "ebch_db", "polar_db", "delta");
    for e in &table {
        println!(
            "{:>5} {:>5} {:>10} {:>10} {:>8}  {}",
            e.n,
            e.k,
            fmt(e.ebn0_ebch_db),
            fmt(e.ebn0_polar_db),
            fmt(e.delta_db),
            e.status.as_str()
        );
    }
    if table.iter().any(|e| e.status != DeltaStatus::Ok) {
        eprintln!("warning: some dimensions have no delta");
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let design = DesignSnr { db: a.design_snr, kind: a.design_snr_kind };
    let codes = parse_code(&a.code, design)?;
    let mut text = String::new();
    for c in &codes {
        let g = c.generator();
        text.push_str(&if a.dots { g.to_dots() } else { g.to_text() });
    }
    match a.out {
        Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn list(n: usize) -> Result<()> {
    if !n.is_power_of_two() {
        bail!("length {n} is not a power of two");
    }
    println!("{:>5} {:>5} {:>6}", "n", "k", "d");
    for c in list_ebch_family(n.trailing_zeros())? {
        let d = c.designed_distance().map_or("-".into(), |d| d.to_string());
        println!("{:>5} {:>5} {:>6}", c.n(), c.k(), d);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(a) => sweep(a),
        Command::Delta(a) => delta(a),
        Command::Export(a) => export(a),
        Command::List { n } => list(n),
    }
}
