//! Provider-visible transcript records and the corpus file format.
//!
//! A record is what a semi-honest provider logs per fragment: compiled width,
//! depth and 2Q count, requested shots, submission timestamp and execution
//! rank, joined here with the ground-truth labels of the parent circuit.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{logical_metrics, Family, LogicalCircuit};
use crate::cutkit::{assemble_jobs, CorpusConfig, CutError, CuttingJob, Fragment};
use crate::labels::{job_labels, LabelSet};
use crate::router::{build_topology, decompose_to_basis, route, routing_overhead, RouterError, TopologyKind};
use crate::seed::{rng_for, str_tag};

pub const SCHEMA_VERSION: u32 = 1;
pub const SHOT_CHOICES: [u64; 4] = [1024, 2048, 4096, 8192];
/// Physical qubits added on top of the widest fragment when sizing devices.
pub const DEVICE_HEADROOM: usize = 4;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("schema version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("unknown feature mask '{0}'")]
    InvalidMask(String),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Router(#[from] RouterError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub job_id: u64,
    pub frag_index: usize,
    pub backend: TopologyKind,
    pub w: usize,
    pub d: usize,
    pub q: usize,
    pub s: u64,
    pub t: f64,
    pub pi: usize,
    pub labels: LabelSet,
}

pub fn assign_labels(parent: &LogicalCircuit, fragment: &Fragment, backend: TopologyKind) -> LabelSet {
    LabelSet::new(job_labels(parent, fragment.mechanism), backend)
}

/// Shots are drawn independently of everything about the fragment.
pub fn synthesize_shots(master_seed: u64, backend: TopologyKind, job_id: u64, frag_index: usize) -> u64 {
    let mut rng = rng_for(master_seed, &[str_tag("shots"), str_tag(backend.name()), job_id, frag_index as u64]);
    SHOT_CHOICES[rng.random_range(0..SHOT_CHOICES.len())]
}

/// Inter-submission gap `base + per_layer * d * (1 + eps)`, `eps ~ N(0, noise_sd)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingModel {
    pub base: f64,
    pub per_layer: f64,
    pub noise_sd: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel {
            base: 1.0,
            per_layer: 0.002,
            noise_sd: 0.25,
        }
    }
}

/// Timestamps for one job. `depths[i]` and `order[i]` belong to fragment `i`;
/// `order[i]` is its submission rank. Returns `(t, pi)` per fragment.
pub fn synthesize_timing(
    depths: &[usize],
    order: &[usize],
    start: f64,
    model: &TimingModel,
    rng: &mut impl Rng,
) -> Vec<(f64, usize)> {
    let k = depths.len();
    let mut by_rank = vec![0usize; k];
    for (i, &r) in order.iter().enumerate() {
        by_rank[r] = i;
    }
    let noise = Normal::new(0.0, model.noise_sd.max(0.0)).expect("finite sd");
    let mut out = vec![(0.0, 0); k];
    let mut t = start;
    for (rank, &i) in by_rank.iter().enumerate() {
        let eps: f64 = if model.noise_sd > 0.0 { noise.sample(rng) } else { 0.0 };
        let gap = model.base + model.per_layer * depths[i] as f64 * (1.0 + eps);
        // keep timestamps strictly increasing even for extreme draws
        t += gap.max(1e-6);
        out[i] = (t, rank);
    }
    out
}

// ---------------------------------------------------------------------------
// Feature masks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mask {
    Full,
    StructureOnly,
    TimingOnly,
    ShotsOnly,
    NoTiming,
    NoShots,
}

impl Mask {
    pub const ALL: [Mask; 6] = [
        Mask::Full,
        Mask::StructureOnly,
        Mask::TimingOnly,
        Mask::ShotsOnly,
        Mask::NoTiming,
        Mask::NoShots,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mask::Full => "full",
            Mask::StructureOnly => "structure_only",
            Mask::TimingOnly => "timing_only",
            Mask::ShotsOnly => "shots_only",
            Mask::NoTiming => "no_timing",
            Mask::NoShots => "no_shots",
        }
    }

    /// (structure, timing, shots)
    fn blocks(self) -> (bool, bool, bool) {
        match self {
            Mask::Full => (true, true, true),
            Mask::StructureOnly => (true, false, false),
            Mask::TimingOnly => (false, true, false),
            Mask::ShotsOnly => (false, false, true),
            Mask::NoTiming => (true, false, true),
            Mask::NoShots => (true, true, false),
        }
    }

    pub fn feature_names(self) -> Vec<&'static str> {
        let (st, ti, sh) = self.blocks();
        let mut v = Vec::new();
        if st {
            v.extend(STRUCTURE_FEATURES);
        }
        if ti {
            v.extend(TIMING_FEATURES);
        }
        if sh {
            v.extend(SHOTS_FEATURES);
        }
        v
    }

    pub fn dim(self) -> usize {
        self.feature_names().len()
    }
}

pub const STRUCTURE_FEATURES: [&str; 5] = ["w", "d", "q", "d_per_w", "q_per_d"];
pub const TIMING_FEATURES: [&str; 3] = ["gap_to_prev", "pi", "job_duration"];
pub const SHOTS_FEATURES: [&str; 2] = ["s", "s_share"];

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mask {
    type Err = TranscriptError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mask::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| TranscriptError::InvalidMask(s.to_string()))
    }
}

/// Per-record quantities that need the rest of the job's records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JobContext {
    pub gap_to_prev: f64,
    pub job_duration: f64,
    pub job_total_shots: u64,
}

/// Context for every record, grouping by `(backend, job_id)`.
pub fn job_contexts(records: &[TranscriptRecord]) -> Vec<JobContext> {
    let mut groups: BTreeMap<(TopologyKind, u64), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups.entry((r.backend, r.job_id)).or_default().push(i);
    }
    let mut out = vec![
        JobContext {
            gap_to_prev: 0.0,
            job_duration: 0.0,
            job_total_shots: 0
        };
        records.len()
    ];
    for idx in groups.values() {
        let mut sorted = idx.clone();
        sorted.sort_by_key(|&i| records[i].pi);
        let first = records[sorted[0]].t;
        let last = records[*sorted.last().unwrap()].t;
        let total: u64 = idx.iter().map(|&i| records[i].s).sum();
        for (pos, &i) in sorted.iter().enumerate() {
            out[i] = JobContext {
                gap_to_prev: if pos == 0 { 0.0 } else { records[i].t - records[sorted[pos - 1]].t },
                job_duration: last - first,
                job_total_shots: total,
            };
        }
    }
    out
}

pub fn feature_vector(r: &TranscriptRecord, ctx: &JobContext, mask: Mask) -> Vec<f64> {
    let (st, ti, sh) = mask.blocks();
    let mut v = Vec::with_capacity(10);
    if st {
        let (w, d, q) = (r.w as f64, r.d as f64, r.q as f64);
        v.extend([w, d, q, d / w.max(1.0), q / d.max(1.0)]);
    }
    if ti {
        v.extend([ctx.gap_to_prev, r.pi as f64, ctx.job_duration]);
    }
    if sh {
        v.extend([r.s as f64, r.s as f64 / ctx.job_total_shots.max(1) as f64]);
    }
    v
}

pub fn feature_matrix(records: &[TranscriptRecord], mask: Mask) -> Vec<Vec<f64>> {
    let ctx = job_contexts(records);
    records.iter().zip(&ctx).map(|(r, c)| feature_vector(r, c, mask)).collect()
}

// ---------------------------------------------------------------------------
// Corpus file
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusHeader {
    pub schema_version: u32,
    pub master_seed: u64,
    pub config: CorpusConfig,
    pub backends: Vec<TopologyKind>,
    /// Physical qubit count per backend.
    pub n_phys: BTreeMap<TopologyKind, usize>,
    pub timing: TimingModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub header: CorpusHeader,
    pub records: Vec<TranscriptRecord>,
}

pub fn write_corpus(corpus: &Corpus, mut out: impl Write) -> Result<(), TranscriptError> {
    serde_json::to_writer(&mut out, &corpus.header).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    for r in &corpus.records {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_corpus(corpus: &Corpus, path: &Path) -> Result<(), TranscriptError> {
    write_corpus(corpus, BufWriter::new(File::create(path)?))
}

/// Reads a corpus file. Leading `#` comment lines are skipped.
pub fn read_corpus(input: impl BufRead) -> Result<Corpus, TranscriptError> {
    let mut lines = input.lines().enumerate().skip_while(|(_, l)| l.as_ref().is_ok_and(|l| l.starts_with('#')));
    let (first_no, first) = lines.next().ok_or(TranscriptError::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let first = first?;
    let at = |line: usize, msg: String| TranscriptError::Parse { line: line + 1, msg };
    let raw: serde_json::Value = serde_json::from_str(&first).map_err(|e| at(first_no, e.to_string()))?;
    let found = raw
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| at(first_no, "header has no schema_version".into()))? as u32;
    if found != SCHEMA_VERSION {
        return Err(TranscriptError::Version {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    let header: CorpusHeader = serde_json::from_value(raw).map_err(|e| at(first_no, e.to_string()))?;
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: TranscriptRecord = serde_json::from_str(&line).map_err(|e| at(i, e.to_string()))?;
        records.push(r);
    }
    Ok(Corpus { header, records })
}

pub fn load_corpus(path: &Path) -> Result<Corpus, TranscriptError> {
    read_corpus(BufReader::new(File::open(path)?))
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Compilation overhead of one fragment on one backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingRow {
    pub job_id: u64,
    pub frag_index: usize,
    pub backend: TopologyKind,
    pub family: Family,
    pub logical_depth: usize,
    pub logical_2q: usize,
    pub compiled_depth: usize,
    pub compiled_2q: usize,
    pub swap_count: usize,
    pub extra_2q: i64,
    /// `None` when the decomposed fragment has zero depth.
    pub depth_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCorpus {
    pub jobs: Vec<CuttingJob>,
    pub corpus: Corpus,
    pub routing: Vec<RoutingRow>,
}

struct FragOut {
    w: usize,
    d: usize,
    q: usize,
    row: RoutingRow,
}

fn compile_job(job: &CuttingJob, backend: TopologyKind, graph: &crate::router::CouplingGraph) -> Result<Vec<FragOut>, TranscriptError> {
    job.fragments
        .iter()
        .map(|f| {
            let logical = decompose_to_basis(&f.circuit)?;
            let compiled = route(&logical, graph)?;
            let lm = logical_metrics(&logical);
            let (extra_2q, depth_ratio) = match routing_overhead(&logical, &compiled) {
                Ok(o) => (o.extra_2q, Some(o.depth_ratio)),
                Err(RouterError::UndefinedRatio) => (compiled.compiled_2q as i64 - lm.twoq_count as i64, None),
                Err(e) => return Err(e.into()),
            };
            Ok(FragOut {
                w: compiled.active_width,
                d: compiled.compiled_depth,
                q: compiled.compiled_2q,
                row: RoutingRow {
                    job_id: job.job_id,
                    frag_index: f.frag_index,
                    backend,
                    family: job.parent.family,
                    logical_depth: lm.depth,
                    logical_2q: lm.twoq_count,
                    compiled_depth: compiled.compiled_depth,
                    compiled_2q: compiled.compiled_2q,
                    swap_count: compiled.swap_count,
                    extra_2q,
                    depth_ratio,
                },
            })
        })
        .collect()
}

/// Cuts, compiles and transcribes the whole corpus. Records are ordered by
/// backend, then job id, then fragment index.
pub fn compile_corpus(
    cfg: &CorpusConfig,
    backends: &[TopologyKind],
    timing: &TimingModel,
    master_seed: u64,
) -> Result<CompiledCorpus, TranscriptError> {
    let mut jobs = assemble_jobs(cfg, master_seed)?;
    jobs.sort_by_key(|j| j.job_id);
    let widest = jobs
        .iter()
        .flat_map(|j| j.fragments.iter().map(|f| f.circuit.n_qubits))
        .max()
        .unwrap_or(2);
    let mut records = Vec::with_capacity(jobs.len() * cfg.fragments_per_job * backends.len());
    let mut routing = Vec::with_capacity(records.capacity());
    let mut n_phys = BTreeMap::new();
    for &backend in backends {
        let graph = build_topology(backend, widest + DEVICE_HEADROOM)?;
        n_phys.insert(backend, graph.n_phys);
        let compiled: Vec<Vec<FragOut>> = jobs
            .par_iter()
            .map(|j| compile_job(j, backend, &graph))
            .collect::<Result<_, _>>()?;
        // job starts are chained so timestamps never decrease across job ids
        let mut clock = 0.0;
        for (job, frags) in jobs.iter().zip(compiled) {
            let depths: Vec<usize> = frags.iter().map(|f| f.d).collect();
            let mut rng = rng_for(master_seed, &[str_tag("timing"), str_tag(backend.name()), job.job_id]);
            let times = synthesize_timing(&depths, &job.submission_order, clock, timing, &mut rng);
            clock = times.iter().map(|x| x.0).fold(clock, f64::max) + timing.base;
            for ((f, frag), (t, pi)) in frags.into_iter().zip(&job.fragments).zip(times) {
                records.push(TranscriptRecord {
                    job_id: job.job_id,
                    frag_index: frag.frag_index,
                    backend,
                    w: f.w,
                    d: f.d,
                    q: f.q,
                    s: synthesize_shots(master_seed, backend, job.job_id, frag.frag_index),
                    t,
                    pi,
                    labels: LabelSet::new(job.labels, backend),
                });
                routing.push(f.row);
            }
        }
    }
    let header = CorpusHeader {
        schema_version: SCHEMA_VERSION,
        master_seed,
        config: cfg.clone(),
        backends: backends.to_vec(),
        n_phys,
        timing: *timing,
    };
    Ok(CompiledCorpus {
        jobs,
        corpus: Corpus { header, records },
        routing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn small_cfg() -> CorpusConfig {
        CorpusConfig {
            instances_per_family: 2,
            ..CorpusConfig::default()
        }
    }

    #[test]
    fn shots_support_and_determinism() {
        for j in 0..50 {
            let s = synthesize_shots(7, TopologyKind::Linear, j, 3);
            assert!(SHOT_CHOICES.contains(&s));
            assert_eq!(s, synthesize_shots(7, TopologyKind::Linear, j, 3));
        }
    }

    #[test]
    fn timing_is_strictly_increasing_in_rank() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let depths = [10, 3, 40, 7, 22, 15];
        let order = [3, 0, 5, 1, 2, 4];
        let t = synthesize_timing(&depths, &order, 0.0, &TimingModel::default(), &mut rng);
        assert_eq!(t.len(), 6);
        let mut by_rank: Vec<(usize, f64)> = t.iter().map(|&(t, pi)| (pi, t)).collect();
        by_rank.sort_by_key(|x| x.0);
        assert!(by_rank.windows(2).all(|w| w[1].1 > w[0].1));
        for (i, &(_, pi)) in t.iter().enumerate() {
            assert_eq!(pi, order[i]);
        }
    }

    #[test]
    fn noiseless_gaps_follow_depth() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let model = TimingModel {
            noise_sd: 0.0,
            ..TimingModel::default()
        };
        let depths = [10, 3, 40, 7];
        let order = [0, 1, 2, 3];
        let t = synthesize_timing(&depths, &order, 0.0, &model, &mut rng);
        let mut prev = 0.0;
        let gaps: Vec<f64> = t
            .iter()
            .map(|&(x, _)| {
                let g = x - prev;
                prev = x;
                g
            })
            .collect();
        for a in 0..4 {
            for b in 0..4 {
                if depths[a] < depths[b] {
                    assert!(gaps[a] < gaps[b]);
                }
            }
        }
    }

    #[test]
    fn mask_dimensions() {
        assert_eq!(Mask::Full.dim(), 10);
        assert_eq!(Mask::StructureOnly.dim(), 5);
        assert_eq!(Mask::NoShots.dim(), 8);
        assert_eq!(Mask::NoTiming.dim(), 7);
        assert!(matches!("bogus".parse::<Mask>(), Err(TranscriptError::InvalidMask(_))));
        for m in Mask::ALL {
            assert_eq!(m.name().parse::<Mask>().unwrap(), m);
        }
    }

    #[test]
    fn small_corpus_round_trips() {
        let cc = compile_corpus(&small_cfg(), &TopologyKind::ALL, &TimingModel::default(), 3).unwrap();
        assert_eq!(cc.corpus.records.len(), 16 * 6 * 3);
        let mut buf = Vec::new();
        write_corpus(&cc.corpus, &mut buf).unwrap();
        let back = read_corpus(&buf[..]).unwrap();
        assert_eq!(back, cc.corpus);
        let ctx = job_contexts(&back.records);
        for (r, c) in back.records.iter().zip(&ctx) {
            if r.pi == 0 {
                assert_eq!(c.gap_to_prev, 0.0);
            } else {
                assert!(c.gap_to_prev > 0.0);
            }
            assert_eq!(feature_vector(r, c, Mask::StructureOnly)[..3], [r.w as f64, r.d as f64, r.q as f64]);
        }
    }

    #[test]
    fn truncated_line_reports_its_number() {
        let cc = compile_corpus(&small_cfg(), &[TopologyKind::Linear], &TimingModel::default(), 3).unwrap();
        let mut buf = Vec::new();
        write_corpus(&cc.corpus, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let broken = &lines[4][..lines[4].len() / 2];
        lines[4] = broken;
        let joined = lines.join("\n");
        match read_corpus(joined.as_bytes()) {
            Err(TranscriptError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn schema_mismatch_is_a_version_error() {
        let cc = compile_corpus(&small_cfg(), &[TopologyKind::Linear], &TimingModel::default(), 3).unwrap();
        let mut c = cc.corpus;
        c.header.schema_version = 99;
        let mut buf = Vec::new();
        write_corpus(&c, &mut buf).unwrap();
        assert!(matches!(
            read_corpus(&buf[..]),
            Err(TranscriptError::Version { found: 99, .. })
        ));
    }
}
