use std::collections::{BTreeMap, BTreeSet};

use cutleak_core::circuit::{generate, logical_metrics, Family, GateKind};
use cutleak_core::cutkit::{assemble_jobs, CorpusConfig, Mechanism};
use cutleak_core::router::TopologyKind;
use cutleak_core::transcript::{compile_corpus, read_corpus, write_corpus, TimingModel};
use proptest::prelude::*;

fn small(instances: usize) -> CorpusConfig {
    CorpusConfig { instances_per_family: instances, ..CorpusConfig::default() }
}

#[test]
fn default_corpus_has_the_expected_shape() {
    let jobs = assemble_jobs(&CorpusConfig::default(), 1).unwrap();
    assert_eq!(jobs.len(), 200);
    assert_eq!(jobs.iter().map(|j| j.fragments.len()).sum::<usize>(), 1200);
    let mut per_family: BTreeMap<Family, usize> = BTreeMap::new();
    for j in &jobs {
        *per_family.entry(j.labels.a1_family).or_default() += j.fragments.len();
    }
    assert!(per_family.values().all(|&n| n == 150), "{per_family:?}");
    // each family splits its 25 parents 13/12 between the mechanisms
    for f in Family::ALL {
        let wire = jobs.iter().filter(|j| j.labels.a1_family == f && j.labels.w1_mechanism == Mechanism::Wire).count();
        assert!((12..=13).contains(&wire), "{f}: {wire}");
    }
}

#[test]
fn qft_cp_count_law() {
    for n in 4..=16 {
        let c = generate(Family::Qft, Family::Qft.subvariants()[0], n, 9).unwrap();
        let cp = c.gates.iter().filter(|g| g.kind == GateKind::Cp).count();
        assert_eq!(cp, n * (n - 1) / 2, "n={n}");
    }
}

#[test]
fn comment_lines_before_the_header_are_skipped() {
    let corpus = compile_corpus(&small(1), &TopologyKind::ALL, &TimingModel::default(), 2).unwrap().corpus;
    let mut buf = b"# produced by a test\n# second line\n".to_vec();
    write_corpus(&corpus, &mut buf).unwrap();
    let back = read_corpus(buf.as_slice()).unwrap();
    assert_eq!(back.records, corpus.records);
}

#[test]
fn parse_errors_count_comment_lines() {
    let corpus = compile_corpus(&small(1), &[TopologyKind::Linear], &TimingModel::default(), 2).unwrap().corpus;
    let mut buf = b"# comment\n".to_vec();
    write_corpus(&corpus, &mut buf).unwrap();
    buf.extend_from_slice(b"{broken\n");
    let err = read_corpus(buf.as_slice()).unwrap_err().to_string();
    let expected = corpus.records.len() + 3;
    assert!(err.contains(&format!("line {expected}")), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn jobs_partition_their_parents(seed in any::<u64>()) {
        let cfg = small(2);
        for job in assemble_jobs(&cfg, seed).unwrap() {
            prop_assert_eq!(job.fragments.len(), cfg.fragments_per_job);
            let mut order = job.submission_order.clone();
            order.sort_unstable();
            prop_assert_eq!(order, (0..cfg.fragments_per_job).collect::<Vec<_>>());
            let parent_width = job.parent.active_width();
            let parent_depth = logical_metrics(&job.parent).depth;
            for (i, f) in job.fragments.iter().enumerate() {
                prop_assert_eq!(f.frag_index, i);
                prop_assert_eq!(f.mechanism, job.labels.w1_mechanism);
                prop_assert_eq!(f.parent_instance, job.parent.instance_id);
                prop_assert!(f.circuit.active_width() <= parent_width);
                prop_assert!(f.circuit.active_width() >= 1);
                if f.mechanism == Mechanism::Wire {
                    prop_assert!(logical_metrics(&f.circuit).depth <= parent_depth);
                }
            }
        }
    }

    #[test]
    fn labels_depend_only_on_the_job(seed in any::<u64>()) {
        let compiled = compile_corpus(&small(1), &TopologyKind::ALL, &TimingModel::default(), seed).unwrap();
        let mut seen: BTreeMap<u64, BTreeSet<String>> = BTreeMap::new();
        for r in &compiled.corpus.records {
            prop_assert_eq!(r.labels.w2_backend, r.backend);
            let mut l = r.labels;
            l.w2_backend = TopologyKind::AllToAll;
            seen.entry(r.job_id).or_default().insert(format!("{l:?}"));
        }
        prop_assert!(seen.values().all(|s| s.len() == 1));
        for job in &compiled.jobs {
            prop_assert_eq!(job.labels.a1_family, job.parent.family);
            prop_assert_eq!(job.labels.a2_subfamily, job.parent.subvariant);
        }
    }

    #[test]
    fn corpus_is_a_function_of_the_seed(seed in any::<u64>()) {
        let a = compile_corpus(&small(1), &TopologyKind::ALL, &TimingModel::default(), seed).unwrap().corpus;
        let b = compile_corpus(&small(1), &TopologyKind::ALL, &TimingModel::default(), seed).unwrap().corpus;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_corpus(&a, &mut x).unwrap();
        write_corpus(&b, &mut y).unwrap();
        prop_assert_eq!(x, y);
    }
}
