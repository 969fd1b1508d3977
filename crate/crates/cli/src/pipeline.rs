//! The stages behind each subcommand and the files they write.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use cutleak_core::circuit::Family;
use cutleak_core::router::TopologyKind;
use cutleak_core::transcript::{compile_corpus, load_corpus, write_corpus, CompiledCorpus, Mask, RoutingRow, TranscriptRecord};
use cutleak_eval::pca::{pca_project, Pca};
use cutleak_eval::report::{self, num, opt};
use cutleak_eval::{
    matched_control, per_family_subtask_eval, run_grid, sample_efficiency_sweep, Cell, CellResult, EvalReport, EvalSettings,
    MatchedReport, Protocol, Split, SplitSpec, SubfamilySummary, SweepPoint, Task,
};

use crate::align::{alignment, load_reference, records_as_reference, AlignRow};
use crate::config::{RunConfig, Slicing};
use crate::error::CliError;
use crate::telemetry::{check_telemetry, TelemetryReport};

pub const CORPUS_FILE: &str = "corpus.jsonl";

/// Writes `header`, then whatever `body` writes.
pub fn emit(path: &Path, header: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// corpus
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutingTaxRow {
    pub backend: TopologyKind,
    pub family: Family,
    pub fragments: usize,
    pub compiled_2q: f64,
    pub extra_2q: f64,
    /// Mean over fragments with a defined ratio; `None` if there are none.
    pub depth_ratio: Option<f64>,
}

/// Means per (backend, family), in enum order.
pub fn routing_tax(rows: &[RoutingRow]) -> Vec<RoutingTaxRow> {
    let mut out = Vec::new();
    for backend in TopologyKind::ALL {
        for family in Family::ALL {
            let sel: Vec<&RoutingRow> = rows.iter().filter(|r| r.backend == backend && r.family == family).collect();
            if sel.is_empty() {
                continue;
            }
            let n = sel.len() as f64;
            let ratios: Vec<f64> = sel.iter().filter_map(|r| r.depth_ratio).collect();
            out.push(RoutingTaxRow {
                backend,
                family,
                fragments: sel.len(),
                compiled_2q: sel.iter().map(|r| r.compiled_2q as f64).sum::<f64>() / n,
                extra_2q: sel.iter().map(|r| r.extra_2q as f64).sum::<f64>() / n,
                depth_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
            });
        }
    }
    out
}

pub fn write_routing_tax(w: &mut impl Write, rows: &[RoutingTaxRow]) -> io::Result<()> {
    writeln!(w, "backend,family,fragments,mean_compiled_2q,mean_extra_2q,mean_depth_ratio")?;
    for r in rows {
        let ratio = r.depth_ratio.map_or_else(|| "---".to_string(), |v| format!("{v:.2}"));
        writeln!(w, "{},{},{},{:.1},{:.1},{ratio}", r.backend.name(), r.family.name(), r.fragments, r.compiled_2q, r.extra_2q)?;
    }
    Ok(())
}

pub fn build_corpus(cfg: &RunConfig) -> Result<CompiledCorpus, CliError> {
    cfg.validate()?;
    Ok(compile_corpus(&cfg.corpus, &cfg.backends, &cfg.timing, cfg.master_seed)?)
}

/// Writes the corpus and the routing-tax table into the output directory.
pub fn cmd_corpus(cfg: &RunConfig) -> Result<CompiledCorpus, CliError> {
    let compiled = build_corpus(cfg)?;
    let header = cfg.header();
    let dir = &cfg.output_dir;
    emit(&dir.join(CORPUS_FILE), &header, |w| {
        write_corpus(&compiled.corpus, w).map_err(|e| io::Error::other(e.to_string()))
    })?;
    let tax = routing_tax(&compiled.routing);
    emit(&dir.join("routing_tax.csv"), &header, |w| write_routing_tax(w, &tax))?;
    Ok(compiled)
}

// ---------------------------------------------------------------------------
// attack
// ---------------------------------------------------------------------------

pub struct ProtocolRun {
    pub protocol: Protocol,
    pub split: Split,
    pub results: Vec<CellResult>,
}

pub struct AttackBundle {
    /// Main model, full features, one run per configured protocol.
    pub headline: Vec<ProtocolRun>,
    pub ablation: Vec<EvalReport>,
    pub models: Vec<EvalReport>,
    pub matched: Vec<MatchedReport>,
    pub subfamilies: SubfamilySummary,
    pub pca: Pca,
    pub pca_labels: Vec<String>,
    pub sweep: Vec<SweepPoint>,
}

impl AttackBundle {
    pub fn headline_report(&self, protocol: Protocol, task: Task) -> Option<&EvalReport> {
        self.headline
            .iter()
            .find(|p| p.protocol == protocol)?
            .results
            .iter()
            .map(|r| &r.report)
            .find(|r| r.task == task)
    }
}

fn settings(cfg: &RunConfig) -> EvalSettings {
    EvalSettings {
        hyperparams: cfg.hyperparams.clone(),
        bootstrap: cfg.bootstrap,
        seed: cfg.master_seed,
    }
}

fn split_spec(cfg: &RunConfig, protocol: Protocol) -> SplitSpec {
    SplitSpec {
        protocol,
        test_fraction: cfg.test_fraction,
        seed: cfg.master_seed,
    }
}

pub fn run_sweep(cfg: &RunConfig, records: &[TranscriptRecord], tasks: &[Task]) -> Result<Vec<SweepPoint>, CliError> {
    let sizes: Vec<usize> = cfg.sweep.sizes.iter().copied().filter(|&s| s <= records.len()).collect();
    let spec = split_spec(cfg, Protocol::InstanceDisjoint);
    let per_task = tasks
        .par_iter()
        .map(|&task| sample_efficiency_sweep(records, task, Mask::Full, cfg.model, &sizes, cfg.sweep.reps, &spec, &settings(cfg)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(per_task.into_iter().flatten().collect())
}

pub fn run_attack(cfg: &RunConfig, records: &[TranscriptRecord], tasks: &[Task]) -> Result<AttackBundle, CliError> {
    let settings = settings(cfg);
    let mut headline = Vec::new();
    let mut ablation = Vec::new();
    let mut models = Vec::new();
    let mut matched = Vec::new();
    for &protocol in &cfg.protocols {
        let mut cells: Vec<Cell> = tasks.iter().map(|&task| Cell { task, mask: Mask::Full, model: cfg.model }).collect();
        if protocol == Protocol::InstanceDisjoint {
            for &task in tasks {
                for &mask in &cfg.masks {
                    cells.push(Cell { task, mask, model: cfg.model });
                }
                for &model in &cfg.comparison_models {
                    cells.push(Cell { task, mask: Mask::Full, model });
                }
            }
            let mut seen = std::collections::HashSet::new();
            cells.retain(|c| seen.insert(*c));
        }
        let (split, results) = run_grid(records, &cells, &split_spec(cfg, protocol), &settings)?;
        let (main, rest): (Vec<CellResult>, Vec<CellResult>) = results.into_iter().partition(|r| r.cell.mask == Mask::Full && r.cell.model == cfg.model);
        if protocol == Protocol::InstanceDisjoint {
            let find = |cell: Cell| main.iter().chain(&rest).find(|r| r.cell == cell).map(|r| r.report.clone());
            for &task in tasks {
                ablation.extend(cfg.masks.iter().filter_map(|&mask| find(Cell { task, mask, model: cfg.model })));
            }
            for &task in tasks {
                models.extend(cfg.comparison_models.iter().filter_map(|&model| find(Cell { task, mask: Mask::Full, model })));
            }
            matched = main.iter().map(|r| matched_control(records, &split, r, cfg.caliper)).collect();
        }
        headline.push(ProtocolRun { protocol, split, results: main });
    }
    let subfamilies = per_family_subtask_eval(records, Mask::Full, cfg.model, &split_spec(cfg, Protocol::InstanceDisjoint), &settings)?;
    let x: Vec<Vec<f64>> = records.iter().map(|r| vec![r.w as f64, r.d as f64, r.q as f64]).collect();
    let pca = pca_project(&x)?;
    let pca_labels = records.iter().map(|r| format!("{}/{}", r.labels.a1_family.name(), r.backend.name())).collect();
    let sweep = run_sweep(cfg, records, tasks)?;
    Ok(AttackBundle {
        headline,
        ablation,
        models,
        matched,
        subfamilies,
        pca,
        pca_labels,
        sweep,
    })
}

pub fn summary(bundle: &AttackBundle) -> String {
    let mut s = String::from("task  protocol           acc     f1      auc\n");
    for run in &bundle.headline {
        for r in &run.results {
            let rep = &r.report;
            let auc = rep.macro_auc.map_or_else(|| "undefined".to_string(), num);
            s += &format!("{:<5} {:<18} {} {} {}\n", rep.task.name(), run.protocol.name(), num(rep.acc), num(rep.macro_f1), auc);
        }
    }
    s += &format!("A2 pooled accuracy {}\n", num(bundle.subfamilies.pooled_accuracy));
    s
}

pub fn write_attack(cfg: &RunConfig, bundle: &AttackBundle, dir: &Path) -> Result<(), CliError> {
    let header = cfg.header();
    let headline: Vec<EvalReport> = bundle.headline.iter().flat_map(|p| p.results.iter().map(|r| r.report.clone())).collect();
    emit(&dir.join("headline.csv"), &header, |w| report::write_reports(w, &headline))?;
    emit(&dir.join("ablation.csv"), &header, |w| report::write_reports(w, &bundle.ablation))?;
    emit(&dir.join("models.csv"), &header, |w| report::write_reports(w, &bundle.models))?;
    emit(&dir.join("matched.csv"), &header, |w| report::write_matched(w, &bundle.matched))?;
    emit(&dir.join("subfamilies.csv"), &header, |w| report::write_subfamilies(w, &bundle.subfamilies))?;
    emit(&dir.join("sweep.csv"), &header, |w| report::write_sweep(w, &bundle.sweep))?;
    emit(&dir.join("pca.csv"), &header, |w| report::write_pca(w, &bundle.pca, &["w", "d", "q"], &bundle.pca_labels))?;
    for r in &headline {
        let name = format!("confusion_{}_{}.csv", r.task, r.protocol.name());
        emit(&dir.join("confusion").join(name), &header, |w| report::write_confusion(w, r))?;
    }
    let names = Mask::Full.feature_names();
    let importance: Vec<_> = bundle
        .headline
        .iter()
        .filter(|p| p.protocol == Protocol::InstanceDisjoint)
        .flat_map(|p| p.results.iter())
        .filter_map(|r| r.importance.clone().map(|imp| (r.cell.task, names.clone(), imp)))
        .collect();
    emit(&dir.join("importance.csv"), &header, |w| report::write_importance(w, &importance))?;
    let text = summary(bundle);
    emit(&dir.join("summary.txt"), &header, |w| w.write_all(text.as_bytes()))?;
    Ok(())
}

pub fn corpus_path(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    explicit.map_or_else(|| cfg.output_dir.join(CORPUS_FILE), Path::to_path_buf)
}

/// Loads the corpus, runs the attack grid and writes every report. Per-backend
/// slicing writes one sub-directory per backend.
pub fn cmd_attack(cfg: &RunConfig, corpus: &Path) -> Result<Vec<AttackBundle>, CliError> {
    cfg.validate()?;
    let records = load_corpus(corpus)?.records;
    match cfg.slicing {
        Slicing::Pooled => {
            let b = run_attack(cfg, &records, &cfg.tasks)?;
            write_attack(cfg, &b, &cfg.output_dir)?;
            Ok(vec![b])
        }
        Slicing::PerBackend => {
            let tasks: Vec<Task> = cfg.tasks.iter().copied().filter(|&t| t != Task::W2).collect();
            let mut out = Vec::new();
            for backend in &cfg.backends {
                let slice: Vec<TranscriptRecord> = records.iter().filter(|r| r.backend == *backend).cloned().collect();
                let b = run_attack(cfg, &slice, &tasks)?;
                write_attack(cfg, &b, &cfg.output_dir.join(backend.name()))?;
                out.push(b);
            }
            Ok(out)
        }
    }
}

pub fn cmd_sweep(cfg: &RunConfig, corpus: &Path) -> Result<Vec<SweepPoint>, CliError> {
    cfg.validate()?;
    let records = load_corpus(corpus)?.records;
    let sweep = run_sweep(cfg, &records, &cfg.tasks)?;
    emit(&cfg.output_dir.join("sweep.csv"), &cfg.header(), |w| report::write_sweep(w, &sweep))?;
    Ok(sweep)
}

// ---------------------------------------------------------------------------
// telemetry and alignment
// ---------------------------------------------------------------------------

pub fn write_telemetry(w: &mut impl Write, r: &TelemetryReport) -> io::Result<()> {
    writeln!(w, "rows,qpu_min,qpu_max,qpu_range,depth_min,depth_max,depth_ratio,pearson_r,timing_blind")?;
    writeln!(
        w,
        "{},{:.3},{:.3},{:.3},{},{},{:.2},{},{}",
        r.rows,
        r.qpu_min,
        r.qpu_max,
        r.qpu_range,
        r.depth_min,
        r.depth_max,
        r.depth_ratio,
        opt(r.pearson_r),
        r.timing_blind
    )
}

pub fn cmd_telemetry(cfg: &RunConfig, rows: &[crate::telemetry::TelemetryRow]) -> Result<TelemetryReport, CliError> {
    let report = check_telemetry(rows)?;
    emit(&cfg.output_dir.join("telemetry.csv"), &cfg.header(), |w| write_telemetry(w, &report))?;
    Ok(report)
}

pub fn write_alignment(w: &mut impl Write, rows: &[AlignRow]) -> io::Result<()> {
    writeln!(w, "metric,w1,ks,corpus_mean,reference_mean,skipped")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.metric, opt(r.w1), opt(r.ks), opt(r.corpus_mean), opt(r.reference_mean), r.skipped)?;
    }
    Ok(())
}

pub fn cmd_align(cfg: &RunConfig, corpus: &Path, reference: &Path) -> Result<Vec<AlignRow>, CliError> {
    let records = load_corpus(corpus)?.records;
    let rows = alignment(&records_as_reference(&records), &load_reference(reference)?)?;
    emit(&cfg.output_dir.join("alignment.csv"), &cfg.header(), |w| write_alignment(w, &rows))?;
    Ok(rows)
}
