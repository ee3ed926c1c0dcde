//! Monte Carlo campaigns: per-point frame loops, sweeps over an Eb/N0 grid,
//! required-Eb/N0 readout and Δ tables.
//!
//! Frame `i` of a point draws its source bits from `source_rng(seed, i)` and
//! its noise from `noise_rng(seed, i)`. Frames are simulated in fixed-size
//! batches on a worker pool and then scanned in index order to find the
//! exact frame at which the stopping rule fires, so every count is
//! independent of the number of workers.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bch::{bch, ebch};
use crate::channel::{random_bits, source_rng, ChannelParams};
use crate::code::{CodeFamily, CodeInstance, ConstructionMeta};
use crate::crc::{parse_crc, CrcSpec};
use crate::error::{Error, Result};
use crate::osd::OsdDecoder;
use crate::polar::{build_polar, build_rm, rm_spec, DesignSnr, PolarSpec};
use crate::polar_decoder::{select_by_crc, ScDecoder, SclDecoder};
use crate::scalar::Scalar;

const BATCH: u64 = 512;

/// Which E_b the noise variance is normalized to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    /// R = K / N.
    #[default]
    Nominal,
    /// R = (K - crc width) / N.
    Payload,
}

impl RateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RateMode::Nominal => "nominal",
            RateMode::Payload => "payload",
        }
    }
}

impl fmt::Display for RateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nominal" => Ok(RateMode::Nominal),
            "payload" => Ok(RateMode::Payload),
            other => Err(Error::InvalidArgument(format!("unknown rate mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecoderSpec {
    Osd { order: usize },
    Sc,
    Scl { list_size: usize },
    SclCrc { list_size: usize, crc: CrcSpec },
    /// Hard decisions on the systematic positions.
    Uncoded,
}

impl DecoderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderSpec::Osd { .. } => "osd",
            DecoderSpec::Sc => "sc",
            DecoderSpec::Scl { .. } => "scl",
            DecoderSpec::SclCrc { .. } => "scl-crc",
            DecoderSpec::Uncoded => "uncoded",
        }
    }

    /// OSD order or list size; 0 for decoders without a parameter.
    pub fn param(&self) -> usize {
        match self {
            DecoderSpec::Osd { order } => *order,
            DecoderSpec::Scl { list_size } | DecoderSpec::SclCrc { list_size, .. } => *list_size,
            DecoderSpec::Sc | DecoderSpec::Uncoded => 0,
        }
    }

    pub fn crc(&self) -> Option<&CrcSpec> {
        match self {
            DecoderSpec::SclCrc { crc, .. } => Some(crc),
            _ => None,
        }
    }

    /// Builds a decoder from its command-line name.
    pub fn parse(name: &str, order: usize, list_size: usize, crc: Option<CrcSpec>) -> Result<Self> {
        match name {
            "osd" => Ok(DecoderSpec::Osd { order }),
            "sc" => Ok(DecoderSpec::Sc),
            "scl" => Ok(DecoderSpec::Scl { list_size }),
            "scl-crc" => {
                let crc = crc.ok_or_else(|| {
                    Error::Config("scl-crc needs a CRC other than none".into())
                })?;
                Ok(DecoderSpec::SclCrc { list_size, crc })
            }
            "uncoded" => Ok(DecoderSpec::Uncoded),
            other => Err(Error::InvalidArgument(format!("unknown decoder {other:?}"))),
        }
    }
}

/// Transform-input split for SC-family decoding of polar and RM codes.
pub fn transform_spec(code: &CodeInstance) -> Option<PolarSpec> {
    match code.meta() {
        ConstructionMeta::Polar(spec) => Some(spec.clone()),
        ConstructionMeta::Rm { r, m } => rm_spec(*r, *m).ok(),
        _ => None,
    }
}

/// A code, a decoder and the bookkeeping that ties them to a channel.
#[derive(Clone, Debug)]
pub struct Scheme {
    code: CodeInstance,
    decoder: DecoderSpec,
    spec: Option<PolarSpec>,
    rate_mode: RateMode,
    count_crc_bits: bool,
}

impl Scheme {
    pub fn new(code: CodeInstance, decoder: DecoderSpec) -> Result<Self> {
        let spec = transform_spec(&code);
        match &decoder {
            DecoderSpec::Sc | DecoderSpec::Scl { .. } | DecoderSpec::SclCrc { .. } if spec.is_none() => {
                return Err(Error::Config(format!(
                    "{} decoding needs a polar or RM code, got {}",
                    decoder.name(),
                    code.label()
                )));
            }
            DecoderSpec::Scl { list_size: 0 } | DecoderSpec::SclCrc { list_size: 0, .. } => {
                return Err(Error::Config("list size must be at least 1".into()));
            }
            DecoderSpec::SclCrc { crc, .. } if code.k() <= crc.width() => {
                return Err(Error::Config(format!(
                    "{} has no room for a {}-bit CRC",
                    code.label(),
                    crc.width()
                )));
            }
            DecoderSpec::Uncoded if code.k() != code.n() => {
                return Err(Error::Config(format!("uncoded decoding of {}", code.label())));
            }
            _ => {}
        }
        if code.k() == 0 {
            return Err(Error::Config(format!("{} carries no information", code.label())));
        }
        Ok(Self { code, decoder, spec, rate_mode: RateMode::Nominal, count_crc_bits: false })
    }

    pub fn with_rate_mode(mut self, mode: RateMode) -> Self {
        self.rate_mode = mode;
        self
    }

    /// Whether CRC bits count as delivered bits in the BER.
    pub fn with_count_crc_bits(mut self, yes: bool) -> Self {
        self.count_crc_bits = yes;
        self
    }

    pub fn code(&self) -> &CodeInstance {
        &self.code
    }

    pub fn decoder(&self) -> &DecoderSpec {
        &self.decoder
    }

    pub fn rate_mode(&self) -> RateMode {
        self.rate_mode
    }

    fn crc_width(&self) -> usize {
        self.decoder.crc().map_or(0, |c| c.width())
    }

    pub fn payload_bits(&self) -> usize {
        self.code.k() - self.crc_width()
    }

    /// Bits per frame over which the BER is computed.
    pub fn counted_bits(&self) -> usize {
        if self.count_crc_bits {
            self.code.k()
        } else {
            self.payload_bits()
        }
    }

    /// Rate used to turn Eb/N0 into a noise variance.
    pub fn rate(&self) -> f64 {
        let bits = match self.rate_mode {
            RateMode::Nominal => self.code.k(),
            RateMode::Payload => self.payload_bits(),
        };
        bits as f64 / self.code.n() as f64
    }

    fn worker<T: Scalar>(&self) -> Result<Worker<T>> {
        Ok(match self.decoder {
            DecoderSpec::Osd { .. } => Worker::Osd(OsdDecoder::new()),
            DecoderSpec::Sc => Worker::Sc(ScDecoder::default()),
            DecoderSpec::Scl { list_size } | DecoderSpec::SclCrc { list_size, .. } => {
                Worker::Scl(SclDecoder::new(list_size)?)
            }
            DecoderSpec::Uncoded => Worker::Uncoded,
        })
    }

    /// Transmits one frame and returns (bit errors, frame error).
    fn frame<T: Scalar>(&self, ws: &mut FrameScratch<T>, ch: &ChannelParams, index: u64) -> Result<(u64, bool)> {
        let payload = self.payload_bits();
        ws.message.resize(payload, 0);
        random_bits(&mut source_rng(ch.seed(), index), &mut ws.message);
        if let Some(crc) = self.decoder.crc() {
            ws.message = crc.append(&ws.message);
        }
        let codeword = self.code.encode(&ws.message)?;
        ch.transmit_into(&codeword, index, &mut ws.llr);
        let decoded = ws.worker.decode(self, &ws.llr)?;
        let counted = self.counted_bits();
        let errors = ws.message[..counted]
            .iter()
            .zip(&decoded[..counted])
            .filter(|(a, b)| a != b)
            .count() as u64;
        Ok((errors, errors > 0))
    }
}

enum Worker<T> {
    Osd(OsdDecoder<T>),
    Sc(ScDecoder<T>),
    Scl(SclDecoder<T>),
    Uncoded,
}

impl<T: Scalar> Worker<T> {
    /// The K decoded information bits (payload followed by any CRC).
    fn decode(&mut self, scheme: &Scheme, llr: &[T]) -> Result<Vec<u8>> {
        let spec = scheme.spec.as_ref();
        match (self, &scheme.decoder) {
            (Worker::Osd(d), DecoderSpec::Osd { order }) => {
                Ok(d.decode(scheme.code.generator(), llr, *order)?.message)
            }
            (Worker::Sc(d), _) => Ok(d.decode(spec.expect("checked"), llr)?.message),
            (Worker::Scl(d), DecoderSpec::SclCrc { crc, .. }) => {
                let paths = d.decode(spec.expect("checked"), llr)?;
                Ok(select_by_crc(paths, crc).message)
            }
            (Worker::Scl(d), _) => {
                let mut paths = d.decode(spec.expect("checked"), llr)?;
                Ok(paths.swap_remove(0).message)
            }
            (Worker::Uncoded, _) => {
                let hard: Vec<u8> = llr.iter().map(|&l| (l < T::zero()) as u8).collect();
                Ok(scheme.code.extract_message(&hard))
            }
            _ => unreachable!("worker built from the same scheme"),
        }
    }
}

struct FrameScratch<T> {
    worker: Worker<T>,
    message: Vec<u8>,
    llr: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub min_frame_errors: u64,
    pub min_bit_errors: u64,
    pub max_frames: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self { min_frame_errors: 100, min_bit_errors: 200, max_frames: 10_000_000 }
    }
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_frame_errors == 0 || self.min_bit_errors == 0 || self.max_frames == 0 {
            return Err(Error::Config("stopping thresholds must be positive".into()));
        }
        Ok(())
    }

    fn done(&self, frames: u64, bit_errors: u64, frame_errors: u64) -> bool {
        (frame_errors >= self.min_frame_errors && bit_errors >= self.min_bit_errors)
            || frames >= self.max_frames
    }
}

/// Error counts at one operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub ci95_ber: f64,
    pub wall_seconds: f64,
    pub counted_bits: usize,
}

impl PointResult {
    fn from_counts(ebn0_db: f64, frames: u64, bit_errors: u64, frame_errors: u64, counted_bits: usize) -> Self {
        let trials = frames * counted_bits as u64;
        let ber = if trials == 0 { 0.0 } else { bit_errors as f64 / trials as f64 };
        let fer = if frames == 0 { 0.0 } else { frame_errors as f64 / frames as f64 };
        Self {
            ebn0_db,
            frames,
            bit_errors,
            frame_errors,
            ber,
            fer,
            ci95_ber: wilson_half_width(bit_errors, trials),
            wall_seconds: 0.0,
            counted_bits,
        }
    }
}

/// Half-width of the 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_half_width(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs `frame(state, index)` for indices 0, 1, ... until `stop` fires and
/// returns (frames, bit errors, frame errors). `workers = 0` uses every core.
pub fn run_frames<S, I, F>(stop: &StoppingRule, workers: usize, init: I, frame: F) -> Result<(u64, u64, u64)>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> Result<(u64, bool)> + Sync + Send,
{
    stop.validate()?;
    let pool = thread_pool(workers)?;
    let (mut frames, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);
    pool.install(|| {
        while !stop.done(frames, bit_errors, frame_errors) {
            let end = (frames + BATCH).min(stop.max_frames);
            let batch: Vec<(u64, bool)> = (frames..end)
                .into_par_iter()
                .map_init(&init, |state, i| frame(state, i))
                .collect::<Result<_>>()?;
            for (be, fe) in batch {
                frames += 1;
                bit_errors += be;
                frame_errors += fe as u64;
                if stop.done(frames, bit_errors, frame_errors) {
                    break;
                }
            }
        }
        Ok((frames, bit_errors, frame_errors))
    })
}

/// Simulates `scheme` at one Eb/N0.
pub fn run_point<T: Scalar>(
    scheme: &Scheme,
    ebn0_db: f64,
    seed: u64,
    stop: &StoppingRule,
    workers: usize,
) -> Result<PointResult> {
    let ch = ChannelParams::new(ebn0_db, scheme.rate(), seed)?;
    scheme.worker::<T>()?;
    let start = Instant::now();
    let (frames, be, fe) = run_frames(
        stop,
        workers,
        || FrameScratch::<T> {
            worker: scheme.worker().expect("validated above"),
            message: Vec::new(),
            llr: Vec::new(),
        },
        |ws, i| scheme.frame(ws, &ch, i),
    )?;
    let mut r = PointResult::from_counts(ebn0_db, frames, be, fe, scheme.counted_bits());
    r.wall_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// One CSV/JSON row: a point plus the scheme that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub family: CodeFamily,
    pub n: usize,
    pub k: usize,
    pub decoder: String,
    pub param: usize,
    pub crc: String,
    pub rate_mode: RateMode,
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub ci95_ber: f64,
    pub wall_seconds: f64,
    pub seed: u64,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "family", "n", "k", "decoder", "param", "crc", "rate_mode", "ebn0_db", "frames", "bit_errors",
    "frame_errors", "ber", "fer", "ci95_ber", "wall_seconds", "seed",
];

impl Record {
    pub fn new(scheme: &Scheme, point: &PointResult, seed: u64) -> Self {
        Self {
            family: scheme.code.family(),
            n: scheme.code.n(),
            k: scheme.code.k(),
            decoder: scheme.decoder.name().to_string(),
            param: scheme.decoder.param(),
            crc: scheme.decoder.crc().map_or("none", |c| c.name()).to_string(),
            rate_mode: scheme.rate_mode,
            ebn0_db: point.ebn0_db,
            frames: point.frames,
            bit_errors: point.bit_errors,
            frame_errors: point.frame_errors,
            ber: point.ber,
            fer: point.fer,
            ci95_ber: point.ci95_ber,
            wall_seconds: point.wall_seconds,
            seed,
        }
    }

    pub fn key(&self) -> CurveKey {
        CurveKey {
            family: self.family,
            n: self.n,
            k: self.k,
            decoder: self.decoder.clone(),
            param: self.param,
            crc: self.crc.clone(),
            rate_mode: self.rate_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveKey {
    pub family: CodeFamily,
    pub n: usize,
    pub k: usize,
    pub decoder: String,
    pub param: usize,
    pub crc: String,
    pub rate_mode: RateMode,
}

impl fmt::Display for CurveKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{} {}", self.family, self.n, self.k, self.decoder)?;
        if self.param > 0 {
            write!(f, "-{}", self.param)?;
        }
        if self.crc != "none" {
            write!(f, " {}", self.crc)?;
        }
        write!(f, " ({})", self.rate_mode)
    }
}

/// BER-vs-Eb/N0 points of one scheme, sorted by Eb/N0.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub key: CurveKey,
    pub points: Vec<Record>,
}

impl Curve {
    pub fn ebn0(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ebn0_db).collect()
    }

    pub fn ber(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ber).collect()
    }

    pub fn required_ebn0(&self, target_ber: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.ebn0_db, p.ber)).collect();
        required_ebn0(&pts, target_ber)
    }
}

/// Groups records into curves, in order of first appearance.
pub fn group_curves(records: &[Record]) -> Vec<Curve> {
    let mut order: Vec<CurveKey> = Vec::new();
    let mut map: BTreeMap<CurveKey, Vec<Record>> = BTreeMap::new();
    for r in records {
        let key = r.key();
        if !map.contains_key(&key) {
            order.push(key.clone());
        }
        map.entry(key).or_default().push(r.clone());
    }
    order
        .into_iter()
        .map(|key| {
            let mut points = map.remove(&key).unwrap_or_default();
            points.sort_by(|a, b| a.ebn0_db.total_cmp(&b.ebn0_db));
            Curve { key, points }
        })
        .collect()
}

/// Eb/N0 at which the curve crosses `target_ber`, interpolating linearly in
/// (dB, log10 BER) between the first pair of points that brackets it.
/// `points` are (dB, BER) in increasing dB.
pub fn required_ebn0(points: &[(f64, f64)], target_ber: f64) -> Result<f64> {
    let no_crossing = Error::NoCrossing { target: target_ber };
    if target_ber.is_nan() || target_ber <= 0.0 {
        return Err(Error::InvalidArgument(format!("target BER {target_ber}")));
    }
    let first = points.first().ok_or(no_crossing.clone())?;
    if first.1 < target_ber {
        return Err(no_crossing);
    }
    for (i, &(db, ber)) in points.iter().enumerate() {
        if ber == target_ber {
            return Ok(db);
        }
        if let Some(&(db2, ber2)) = points.get(i + 1) {
            if ber > target_ber && ber2 < target_ber {
                if ber2 <= 0.0 {
                    return Err(no_crossing);
                }
                let (l1, l2, lt) = (ber.log10(), ber2.log10(), target_ber.log10());
                return Ok(db + (db2 - db) * (l1 - lt) / (l1 - l2));
            }
        }
    }
    Err(no_crossing)
}

/// Why a Δ entry is or is not available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaStatus {
    Ok,
    MissingEbch,
    MissingPolar,
    NoCrossingEbch,
    NoCrossingPolar,
    NoCrossingBoth,
}

impl DeltaStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DeltaStatus::Ok => "ok",
            DeltaStatus::MissingEbch => "missing_ebch",
            DeltaStatus::MissingPolar => "missing_polar",
            DeltaStatus::NoCrossingEbch => "no_crossing_ebch",
            DeltaStatus::NoCrossingPolar => "no_crossing_polar",
            DeltaStatus::NoCrossingBoth => "no_crossing_both",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub n: usize,
    pub k: usize,
    pub ebn0_ebch_db: Option<f64>,
    pub ebn0_polar_db: Option<f64>,
    pub delta_db: Option<f64>,
    pub status: DeltaStatus,
}

/// Per (N, K), the extra Eb/N0 the second curve set needs over the first to
/// reach `target_ber`. Entries are sorted by decreasing K; pairs missing from
/// either side are reported with a status instead of failing. When several
/// curves share an (N, K), the first one wins.
pub fn delta_table(ebch: &[Curve], polar: &[Curve], target_ber: f64) -> Vec<DeltaEntry> {
    let pick = |curves: &[Curve]| {
        let mut m: BTreeMap<(usize, usize), Curve> = BTreeMap::new();
        for c in curves {
            m.entry((c.key.n, c.key.k)).or_insert_with(|| c.clone());
        }
        m
    };
    let (a, b) = (pick(ebch), pick(polar));
    let mut keys: Vec<(usize, usize)> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    keys.dedup();
    keys.into_iter()
        .map(|(n, k)| {
            let ea = a.get(&(n, k)).map(|c| c.required_ebn0(target_ber).ok());
            let eb = b.get(&(n, k)).map(|c| c.required_ebn0(target_ber).ok());
            let status = match (ea, eb) {
                (None, _) => DeltaStatus::MissingEbch,
                (_, None) => DeltaStatus::MissingPolar,
                (Some(None), Some(None)) => DeltaStatus::NoCrossingBoth,
                (Some(None), _) => DeltaStatus::NoCrossingEbch,
                (_, Some(None)) => DeltaStatus::NoCrossingPolar,
                _ => DeltaStatus::Ok,
            };
            let (ea, eb) = (ea.flatten(), eb.flatten());
            DeltaEntry {
                n,
                k,
                ebn0_ebch_db: ea,
                ebn0_polar_db: eb,
                delta_db: ea.zip(eb).map(|(x, y)| y - x),
                status,
            }
        })
        .collect()
}

pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if let Some(missing) = CSV_COLUMNS.iter().find(|c| !headers.iter().any(|h| h == **c)) {
        return Err(Error::Io(format!("{}: missing column {missing}", path.display())));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_records(path: &Path, records: &[Record]) -> Result<()> {
    write_records_to(File::create(path)?, records)
}

/// Writes the header and one row per record.
pub fn write_records_to<W: Write>(out: W, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_delta_csv(path: &Path, entries: &[DeltaEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if entries.is_empty() {
        w.write_record(["n", "k", "ebn0_ebch_db", "ebn0_polar_db", "delta_db", "status"])?;
    }
    for e in entries {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_json<S: Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(json_error)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Inclusive grid `start, start + step, ...` up to `stop`, values rounded to
/// 1e-9 dB so that decimal steps print cleanly.
pub fn ebn0_grid(start: f64, step: f64, stop: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!("bad grid {start}:{step}:{stop}")));
    }
    let mut out = Vec::new();
    let mut i = 0u64;
    loop {
        let v = ((start + step * i as f64) * 1e9).round() / 1e9;
        if v > stop + 1e-9 {
            break;
        }
        out.push(v);
        i += 1;
    }
    Ok(out)
}

/// Parses `start:step:stop`, or a single value `v` as `v:1:v`.
pub fn parse_grid_bounds(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad grid {s:?}"))))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [v] => Ok((*v, 1.0, *v)),
        [a, b, c] => Ok((*a, *b, *c)),
        _ => Err(Error::Config(format!("grid {s:?} is not start:step:stop"))),
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let (a, b, c) = parse_grid_bounds(s)?;
    ebn0_grid(a, b, c)
}

fn rm_order_for(m: u32, k: usize) -> Option<u32> {
    let binom = |n: u64, r: u64| (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1));
    (0..=m).find(|&r| (0..=r).map(|i| binom(m as u64, i as u64)).sum::<u64>() == k as u64)
}

fn log2_exact(n: usize, what: &str) -> Result<u32> {
    if n.is_power_of_two() && n >= 2 {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::UnknownCode(format!("{what}: length {n} is not a power of two")))
    }
}

/// Builds the codes named by `family:N:K`. `K` may be `*` to request every
/// eBCH dimension of that length (for `ebch` and `polar`).
pub fn parse_code(selector: &str, design: DesignSnr) -> Result<Vec<CodeInstance>> {
    let bad = || Error::UnknownCode(selector.to_string());
    let parts: Vec<&str> = selector.split(':').collect();
    let [fam, n, k] = parts.as_slice() else {
        return Err(bad());
    };
    let family: CodeFamily = fam.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    let dims: Vec<usize> = if *k == "*" {
        let m = log2_exact(n, selector)?;
        crate::bch::list_ebch_family(m)?.iter().map(|c| c.k()).collect()
    } else {
        vec![k.parse().map_err(|_| bad())?]
    };
    dims.into_iter()
        .map(|k| match family {
            CodeFamily::Ebch => ebch(log2_exact(n, selector)?, k),
            CodeFamily::Bch => {
                let m = log2_exact(n + 1, selector)?;
                bch(m, k)
            }
            CodeFamily::Polar => build_polar(n, k, design),
            CodeFamily::Rm => {
                let m = log2_exact(n, selector)?;
                let r = rm_order_for(m, k).ok_or_else(bad)?;
                build_rm(r, m)
            }
            CodeFamily::Uncoded if k == n => Ok(CodeInstance::uncoded(n)),
            _ => Err(bad()),
        })
        .collect()
}

fn default_decoder() -> String {
    "osd".into()
}
fn default_order() -> usize {
    1
}
fn default_list() -> usize {
    32
}
fn default_crc() -> String {
    "none".into()
}
fn default_design() -> f64 {
    5.0
}
fn default_seed() -> u64 {
    42
}
fn default_floor() -> f64 {
    1e-6
}
fn default_min_fe() -> u64 {
    StoppingRule::default().min_frame_errors
}
fn default_min_be() -> u64 {
    StoppingRule::default().min_bit_errors
}
fn default_max_frames() -> u64 {
    StoppingRule::default().max_frames
}
fn default_true() -> bool {
    true
}

/// One campaign: the codes, the decoder and the grid to sweep them over.
/// Loadable from TOML or JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Code selectors such as `ebch:64:30` or `polar:64:*`.
    pub codes: Vec<String>,
    #[serde(default = "default_decoder")]
    pub decoder: String,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_list")]
    pub list_size: usize,
    #[serde(default = "default_crc")]
    pub crc: String,
    #[serde(default = "default_design")]
    pub design_snr: f64,
    #[serde(default)]
    pub design_snr_kind: crate::polar::SnrKind,
    #[serde(default)]
    pub rate_mode: RateMode,
    #[serde(default)]
    pub count_crc_bits: bool,
    pub ebn0_start: f64,
    pub ebn0_step: f64,
    pub ebn0_stop: f64,
    #[serde(default = "default_min_fe")]
    pub min_frame_errors: u64,
    #[serde(default = "default_min_be")]
    pub min_bit_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// 0 means one worker per core.
    #[serde(default)]
    pub workers: usize,
    /// Remaining points of a curve are skipped once its BER drops below this.
    #[serde(default = "default_floor")]
    pub ber_floor: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
    /// When false, `wall_seconds` is written as 0 so outputs are reproducible byte for byte.
    #[serde(default = "default_true")]
    pub timing: bool,
}

impl SweepConfig {
    pub fn new(codes: Vec<String>, ebn0_start: f64, ebn0_step: f64, ebn0_stop: f64) -> Self {
        Self {
            codes,
            decoder: default_decoder(),
            order: default_order(),
            list_size: default_list(),
            crc: default_crc(),
            design_snr: default_design(),
            design_snr_kind: Default::default(),
            rate_mode: RateMode::Nominal,
            count_crc_bits: false,
            ebn0_start,
            ebn0_step,
            ebn0_stop,
            min_frame_errors: default_min_fe(),
            min_bit_errors: default_min_be(),
            max_frames: default_max_frames(),
            seed: default_seed(),
            workers: 0,
            ber_floor: default_floor(),
            out: None,
            json: None,
            timing: true,
        }
    }

    /// Reads a `.toml` or `.json` file (chosen by extension; TOML otherwise).
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        }
    }

    pub fn stop(&self) -> StoppingRule {
        StoppingRule {
            min_frame_errors: self.min_frame_errors,
            min_bit_errors: self.min_bit_errors,
            max_frames: self.max_frames,
        }
    }

    pub fn set_stop(&mut self, stop: StoppingRule) {
        self.min_frame_errors = stop.min_frame_errors;
        self.min_bit_errors = stop.min_bit_errors;
        self.max_frames = stop.max_frames;
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        ebn0_grid(self.ebn0_start, self.ebn0_step, self.ebn0_stop)
    }

    pub fn design(&self) -> DesignSnr {
        DesignSnr { db: self.design_snr, kind: self.design_snr_kind }
    }

    pub fn schemes(&self) -> Result<Vec<Scheme>> {
        let crc = parse_crc(&self.crc)?;
        let decoder = DecoderSpec::parse(&self.decoder, self.order, self.list_size, crc)?;
        let mut out = Vec::new();
        for sel in &self.codes {
            for code in parse_code(sel, self.design())? {
                out.push(
                    Scheme::new(code, decoder.clone())?
                        .with_rate_mode(self.rate_mode)
                        .with_count_crc_bits(self.count_crc_bits),
                );
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.stop().validate()?;
        self.grid()?;
        if self.codes.is_empty() {
            return Err(Error::Config("no codes selected".into()));
        }
        Ok(())
    }
}

fn flush_outputs(cfg: &SweepConfig, records: &[Record]) -> Result<()> {
    if let Some(p) = &cfg.out {
        write_records(p, records)?;
    }
    if let Some(p) = &cfg.json {
        write_json(p, records)?;
    }
    Ok(())
}

/// Runs every scheme over the grid, rewriting the configured outputs after
/// each point. `progress` sees each record as it completes.
pub fn run_sweep_with<T: Scalar>(cfg: &SweepConfig, mut progress: impl FnMut(&Record)) -> Result<Vec<Curve>> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let schemes = cfg.schemes()?;
    let mut records = Vec::new();
    flush_outputs(cfg, &records)?;
    for scheme in &schemes {
        for &db in &grid {
            let mut point = run_point::<T>(scheme, db, cfg.seed, &cfg.stop(), cfg.workers)?;
            if !cfg.timing {
                point.wall_seconds = 0.0;
            }
            let rec = Record::new(scheme, &point, cfg.seed);
            progress(&rec);
            records.push(rec);
            flush_outputs(cfg, &records)?;
            if point.ber < cfg.ber_floor {
                break;
            }
        }
    }
    Ok(group_curves(&records))
}

pub fn run_sweep<T: Scalar>(cfg: &SweepConfig) -> Result<Vec<Curve>> {
    run_sweep_with::<T>(cfg, |_| {})
}
