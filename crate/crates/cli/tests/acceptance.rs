//! End-to-end acceptance run on the default corpus with master seed 1.
//!
//! Every criterion is evaluated and printed as one PASS/FAIL line before the
//! test asserts, so a single failure does not hide the others.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cutleak_cli::pipeline::{cmd_attack, cmd_corpus, corpus_path, routing_tax, AttackBundle, RoutingTaxRow};
use cutleak_cli::telemetry::{check_telemetry, parse_telemetry, BUNDLED_FIXTURE};
use cutleak_cli::RunConfig;
use cutleak_core::circuit::Family;
use cutleak_core::router::TopologyKind;
use cutleak_core::transcript::Mask;
use cutleak_eval::metrics::macro_auc;
use cutleak_eval::{EvalReport, Protocol, Task, HEADLINE_TASKS};
use cutleak_learners::ModelKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: usize,
    title: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new(id: usize, title: &'static str) -> Self {
        Outcome { id, title, failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn print(&self) {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status}  {}", self.id, self.title);
        for f in &self.failures {
            println!("    fail: {f}");
        }
        for n in &self.notes {
            println!("    ok:   {n}");
        }
    }
}

fn auc(r: Option<&EvalReport>) -> Option<f64> {
    r.and_then(|r| r.macro_auc)
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| format!("{v:.4}"))
}

fn hierarchy(b: &AttackBundle) -> Outcome {
    let mut o = Outcome::new(1, "leakage hierarchy (instance-disjoint RF macro-AUC)");
    let get = |t| auc(b.headline_report(Protocol::InstanceDisjoint, t));
    let bands: [(Task, f64, f64); 6] = [
        (Task::A1, 0.95, 1.0),
        (Task::H3, 0.95, 1.0),
        (Task::W1, 0.80, 0.98),
        (Task::H1, 0.90, 1.0),
        (Task::H2, 0.85, 1.0),
        (Task::W2, 0.55, 0.85),
    ];
    for (task, lo, hi) in bands {
        let v = get(task);
        o.check(v.is_some_and(|v| (lo..=hi).contains(&v)), format!("{task} = {} in [{lo}, {hi}]", fmt(v)));
    }
    let w2 = get(Task::W2);
    let others: Vec<Option<f64>> = HEADLINE_TASKS.iter().filter(|&&t| t != Task::W2).map(|&t| get(t)).collect();
    let strict_min = w2.is_some_and(|w| others.iter().all(|v| v.is_some_and(|v| v > w)));
    o.check(strict_min, format!("W2 = {} is strictly the minimum", fmt(w2)));
    o
}

fn tax_row(rows: &[RoutingTaxRow], backend: TopologyKind, family: Family) -> &RoutingTaxRow {
    rows.iter().find(|r| r.backend == backend && r.family == family).expect("routing row present")
}

fn routing_signs(rows: &[RoutingTaxRow]) -> Outcome {
    let mut o = Outcome::new(2, "routing tax signs");
    let hea = tax_row(rows, TopologyKind::AllToAll, Family::Hea).extra_2q;
    o.check(hea == 0.0, format!("HEA extra-2Q on all_to_all = {hea}"));

    let qaoa: Vec<f64> = TopologyKind::ALL.iter().map(|&b| tax_row(rows, b, Family::Qaoa).extra_2q).collect();
    o.check(qaoa.windows(2).all(|w| w[0] == w[1]), format!("QAOA extra-2Q per backend {qaoa:?}"));

    let ratio = |b| tax_row(rows, b, Family::Qft).depth_ratio.unwrap_or(f64::NAN);
    let (hh, lin, a2a) = (ratio(TopologyKind::HeavyHex), ratio(TopologyKind::Linear), ratio(TopologyKind::AllToAll));
    o.check(hh > lin && lin > a2a, format!("QFT depth ratio heavy_hex {hh:.3} > linear {lin:.3} > all_to_all {a2a:.3}"));

    let linear: Vec<&RoutingTaxRow> = rows.iter().filter(|r| r.backend == TopologyKind::Linear).collect();
    let random = tax_row(rows, TopologyKind::Linear, Family::Random).extra_2q;
    let top = linear.iter().filter(|r| r.family != Family::Random).map(|r| (r.family, r.extra_2q)).max_by(|a, b| a.1.total_cmp(&b.1));
    let (rival, rival_v) = top.expect("other families");
    o.check(random > rival_v, format!("Random extra-2Q on linear {random:.1} > runner-up {rival} {rival_v:.1}"));
    o
}

fn ablation_orderings(b: &AttackBundle) -> Outcome {
    let mut o = Outcome::new(3, "ablation orderings");
    for &task in &HEADLINE_TASKS {
        let get = |mask| auc(b.ablation.iter().find(|r| r.task == task && r.mask == mask));
        let [full, st, ti, sh, ns] = [Mask::Full, Mask::StructureOnly, Mask::TimingOnly, Mask::ShotsOnly, Mask::NoShots].map(get);
        let (full, st, ti, sh, ns) = (full.unwrap_or(f64::NAN), st.unwrap_or(f64::NAN), ti.unwrap_or(f64::NAN), sh.unwrap_or(f64::NAN), ns.unwrap_or(f64::NAN));
        o.check(st >= ti && ti >= sh, format!("{task}: structure {st:.4} >= timing {ti:.4} >= shots {sh:.4}"));
        o.check(sh <= 0.78, format!("{task}: shots_only {sh:.4} <= 0.78"));
        o.check((full - ns).abs() <= 0.05, format!("{task}: |full {full:.4} - no_shots {ns:.4}| <= 0.05"));
        if task == Task::W2 {
            o.check(st >= full - 0.01, format!("W2: structure_only {st:.4} >= full {full:.4} - 0.01"));
        }
    }
    o
}

fn matched_persistence(b: &AttackBundle) -> Outcome {
    let mut o = Outcome::new(4, "matched-footprint persistence (caliper 0.20)");
    for m in &b.matched {
        let ok = matches!((m.natural_auc, m.matched_auc), (Some(n), Some(a)) if a >= n - 0.10);
        o.check(ok, format!("{}: matched {} vs natural {} ({} of {} retained)", m.task, fmt(m.matched_auc), fmt(m.natural_auc), m.retained, m.n_test));
        if m.task == Task::H3 {
            o.check(m.matched_auc.is_some_and(|v| v >= 0.95), format!("H3 matched {} >= 0.95", fmt(m.matched_auc)));
        }
    }
    o
}

fn size_holdout(b: &AttackBundle) -> Outcome {
    let mut o = Outcome::new(5, "size-holdout stability");
    for task in [Task::H1, Task::H2, Task::H3, Task::W1] {
        let id = auc(b.headline_report(Protocol::InstanceDisjoint, task));
        let sh = auc(b.headline_report(Protocol::SizeHoldout, task));
        let ok = matches!((id, sh), (Some(a), Some(s)) if (a - s).abs() <= 0.10);
        o.check(ok, format!("{task}: |SH {} - ID {}| <= 0.10", fmt(sh), fmt(id)));
    }
    let a1 = b.headline_report(Protocol::SizeHoldout, Task::A1).expect("A1 size-holdout report");
    o.check(a1.macro_auc.is_none() == a1.auc_undefined(), format!("A1 SH auc {} with undefined flag {}", fmt(a1.macro_auc), a1.auc_undefined()));
    o
}

fn model_robustness(b: &AttackBundle) -> Outcome {
    let mut o = Outcome::new(6, "model robustness");
    for &task in &HEADLINE_TASKS {
        let vals: Vec<(ModelKind, Option<f64>)> = b.models.iter().filter(|r| r.task == task).map(|r| (r.model_kind, r.macro_auc)).collect();
        for (k, v) in &vals {
            o.check(v.is_some_and(|v| v > 0.55), format!("{task} {k} = {} > 0.55", fmt(*v)));
        }
        let defined: Vec<f64> = vals.iter().filter_map(|v| v.1).collect();
        let spread = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max) - defined.iter().copied().fold(f64::INFINITY, f64::min);
        if matches!(task, Task::H1 | Task::H3 | Task::W2) {
            o.check(spread <= 0.10 + 1e-12, format!("{task}: spread {spread:.4} <= 0.10"));
        }
    }
    o
}

/// Mean over classes of the fraction of (positive, negative) pairs ordered
/// correctly, ties counting one half. Binary tasks score class 1 only.
fn concordance(y: &[usize], scores: &[Vec<f64>], k: usize) -> Option<f64> {
    let classes: Vec<usize> = if k == 2 { vec![1] } else { (0..k).collect() };
    let mut sum = 0.0;
    for &c in &classes {
        let pos: Vec<f64> = y.iter().zip(scores).filter(|(&t, _)| t == c).map(|(_, s)| s[c]).collect();
        let neg: Vec<f64> = y.iter().zip(scores).filter(|(&t, _)| t != c).map(|(_, s)| s[c]).collect();
        if pos.is_empty() || neg.is_empty() {
            return None;
        }
        let mut hits = 0.0;
        for p in &pos {
            for n in &neg {
                hits += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
            }
        }
        sum += hits / (pos.len() * neg.len()) as f64;
    }
    Some(sum / classes.len() as f64)
}

fn metric_oracles() -> Outcome {
    let mut o = Outcome::new(7, "metric oracles");
    let hand = macro_auc(&[0, 0, 1, 1], &[0.1, 0.4, 0.35, 0.8].map(|p| vec![1.0 - p, p]), 2);
    o.check(hand == Some(0.75), format!("hand example = {}", fmt(hand)));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut mismatches, mut defined) = (0, 0);
    for _ in 0..1000 {
        let k = rng.random_range(2..=4);
        let n = rng.random_range(2..=8);
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        // coarse grid so ties are common
        let s: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| f64::from(rng.random_range(0..6u8)) / 5.0).collect()).collect();
        let (got, want) = (macro_auc(&y, &s, k), concordance(&y, &s, k));
        defined += usize::from(want.is_some());
        mismatches += usize::from(got != want);
    }
    o.check(mismatches == 0, format!("1000 random sets, {defined} defined, {mismatches} mismatches"));
    o
}

fn telemetry() -> Outcome {
    let mut o = Outcome::new(8, "telemetry fixture");
    let rows = parse_telemetry(BUNDLED_FIXTURE.as_bytes(), "fixture").expect("fixture parses");
    let r = check_telemetry(&rows).expect("fixture report");
    o.check((r.qpu_range - 0.740).abs() < 5e-4, format!("qpu range {:.3} s", r.qpu_range));
    o.check((r.depth_ratio - 25.4).abs() < 0.05, format!("depth ratio {:.2}", r.depth_ratio));
    o.check(r.timing_blind, format!("timing-blind flag {}", r.timing_blind));
    o.check(r.pearson_r.is_some_and(|v| v.abs() < 0.6), format!("pearson r {}", fmt(r.pearson_r)));
    o
}

fn files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).expect("readable dir") {
            let p = e.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).expect("readable file"));
            }
        }
    }
    out
}

fn determinism(a: &Path, b: &Path) -> Outcome {
    let mut o = Outcome::new(9, "determinism (two full pipeline runs)");
    let (fa, fb) = (files(a), files(b));
    o.check(fa.keys().eq(fb.keys()), format!("{} files vs {} files", fa.len(), fb.len()));
    let differing: Vec<&String> = fa.iter().filter(|(k, v)| fb.get(*k) != Some(v)).map(|(k, _)| k).collect();
    o.check(differing.is_empty(), format!("byte-identical outputs, differing: {differing:?}"));
    o
}

fn subfamilies(b: &AttackBundle) -> Outcome {
    let mut o = Outcome::new(10, "A2 sub-family above chance");
    let pooled = b.subfamilies.pooled_accuracy;
    o.check(pooled > 1.0 / 3.0 + 0.03, format!("pooled accuracy {pooled:.4} > {:.4}", 1.0 / 3.0 + 0.03));
    let qft = b.subfamilies.families.iter().find(|f| f.family == Family::Qft).map(|f| f.report.acc);
    o.check(qft.is_some_and(|v| v >= pooled), format!("QFT accuracy {} >= pooled {pooled:.4}", fmt(qft)));
    o
}

/// Not a criterion: which structural feature the forest leans on most.
fn importance_note(b: &AttackBundle) -> String {
    let names = Mask::Full.feature_names();
    let run = b.headline.iter().find(|p| p.protocol == Protocol::InstanceDisjoint).expect("instance-disjoint run");
    let mut tops = Vec::new();
    for r in &run.results {
        let Some(imp) = &r.importance else { continue };
        let (i, _) = (0..5).map(|i| (i, imp.mean[i])).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        tops.push(format!("{}:{}", r.cell.task, names[i]));
    }
    let depth = tops.iter().filter(|t| t.ends_with(":d") || t.ends_with(":d_per_w")).count();
    format!("top structural feature per task {tops:?}; depth-derived for {depth} of {}", tops.len())
}

fn full_run(dir: &Path) -> (Vec<RoutingTaxRow>, AttackBundle) {
    let cfg = RunConfig { output_dir: dir.to_path_buf(), ..RunConfig::default() };
    let compiled = cmd_corpus(&cfg).expect("corpus build");
    let mut bundles = cmd_attack(&cfg, &corpus_path(&cfg, None)).expect("attack run");
    (routing_tax(&compiled.routing), bundles.remove(0))
}

#[test]
fn acceptance() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (tax, bundle) = full_run(a.path());
    let _ = full_run(b.path());
    assert_eq!(bundle.headline.iter().map(|p| p.results[0].report.n_train + p.results[0].report.n_test).max(), Some(3600));

    let outcomes = [
        hierarchy(&bundle),
        routing_signs(&tax),
        ablation_orderings(&bundle),
        matched_persistence(&bundle),
        size_holdout(&bundle),
        model_robustness(&bundle),
        metric_oracles(),
        telemetry(),
        determinism(a.path(), b.path()),
        subfamilies(&bundle),
    ];
    for o in &outcomes {
        o.print();
    }
    println!("note: {}", importance_note(&bundle));
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    println!("{} of {} criteria pass", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
