//! Caliper matching on the (width, depth, fragments-per-job) footprint.

use std::collections::BTreeMap;

use cutleak_core::transcript::TranscriptRecord;

/// Footprints min-max scaled to the unit cube over `pool`. A constant axis
/// maps to 0.
pub fn footprints(records: &[TranscriptRecord], pool: &[usize]) -> Vec<[f64; 3]> {
    let mut per_job: BTreeMap<(u64, cutleak_core::router::TopologyKind), usize> = BTreeMap::new();
    for &i in pool {
        *per_job.entry((records[i].job_id, records[i].backend)).or_default() += 1;
    }
    let raw: Vec<[f64; 3]> = pool
        .iter()
        .map(|&i| {
            let r = &records[i];
            [r.w as f64, r.d as f64, per_job[&(r.job_id, r.backend)] as f64]
        })
        .collect();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &raw {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    raw.into_iter()
        .map(|p| {
            let mut q = [0.0; 3];
            for a in 0..3 {
                if hi[a] > lo[a] {
                    q[a] = (p[a] - lo[a]) / (hi[a] - lo[a]);
                }
            }
            q
        })
        .collect()
}

fn chebyshev(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// Keeps the members of `pool` that have, for every other class present in
/// `pool`, a neighbour of that class within `caliper`. Returned indices keep
/// `pool` order.
pub fn match_footprint(records: &[TranscriptRecord], pool: &[usize], labels: &[usize], caliper: f64) -> Vec<usize> {
    let fp = footprints(records, pool);
    let mut classes: Vec<usize> = pool.iter().map(|&i| labels[i]).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut keep = Vec::new();
    for (a, &i) in pool.iter().enumerate() {
        let mine = labels[i];
        let ok = classes.iter().filter(|&&c| c != mine).all(|&c| {
            pool.iter()
                .enumerate()
                .any(|(b, &j)| labels[j] == c && chebyshev(&fp[a], &fp[b]) <= caliper)
        });
        if ok {
            keep.push(i);
        }
    }
    keep
}
