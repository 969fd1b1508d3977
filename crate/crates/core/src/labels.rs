//! Ground-truth labels for the inference tasks. Labels come from the parent
//! circuit at generation time and are never recomputed from compiled data.

use serde::{Deserialize, Serialize};

use crate::circuit::{interaction_graph, Family, Geometry, LogicalCircuit, Subvariant};
use crate::cutkit::Mechanism;
use crate::router::TopologyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    LocalSparse,
    Medium,
    Dense,
}

impl Connectivity {
    pub const ALL: [Connectivity; 3] = [Connectivity::LocalSparse, Connectivity::Medium, Connectivity::Dense];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KLocality {
    K2,
    K3_4,
    K5plus,
}

impl KLocality {
    pub const ALL: [KLocality; 3] = [KLocality::K2, KLocality::K3_4, KLocality::K5plus];
}

/// Mean unique-neighbour degree below which a problem counts as local/sparse.
/// Every forest (chains, stars) has mean degree < 2.
pub const SPARSE_DEGREE: f64 = 2.0;
/// Mean unique-neighbour degree at or above which a problem counts as dense.
pub const DENSE_DEGREE: f64 = 4.0;

pub fn connectivity_regime(mean_degree: f64) -> Connectivity {
    if mean_degree < SPARSE_DEGREE {
        Connectivity::LocalSparse
    } else if mean_degree < DENSE_DEGREE {
        Connectivity::Medium
    } else {
        Connectivity::Dense
    }
}

pub fn k_locality(max_term_weight: usize) -> KLocality {
    match max_term_weight {
        0..=2 => KLocality::K2,
        3 | 4 => KLocality::K3_4,
        _ => KLocality::K5plus,
    }
}

/// Labels shared by every fragment of a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobLabels {
    pub a1_family: Family,
    pub a2_subfamily: Subvariant,
    pub w1_mechanism: Mechanism,
    pub h1_connectivity: Connectivity,
    pub h2_geometry: Geometry,
    pub h3_klocality: KLocality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    pub a1_family: Family,
    pub a2_subfamily: Subvariant,
    pub w1_mechanism: Mechanism,
    pub w2_backend: TopologyKind,
    pub h1_connectivity: Connectivity,
    pub h2_geometry: Geometry,
    pub h3_klocality: KLocality,
}

impl LabelSet {
    pub fn new(job: JobLabels, backend: TopologyKind) -> Self {
        LabelSet {
            a1_family: job.a1_family,
            a2_subfamily: job.a2_subfamily,
            w1_mechanism: job.w1_mechanism,
            w2_backend: backend,
            h1_connectivity: job.h1_connectivity,
            h2_geometry: job.h2_geometry,
            h3_klocality: job.h3_klocality,
        }
    }
}

pub fn job_labels(parent: &LogicalCircuit, mechanism: Mechanism) -> JobLabels {
    let ig = interaction_graph(parent);
    JobLabels {
        a1_family: parent.family,
        a2_subfamily: parent.subvariant,
        w1_mechanism: mechanism,
        h1_connectivity: connectivity_regime(ig.mean_unique_degree()),
        h2_geometry: parent.gen_params.geometry,
        h3_klocality: k_locality(ig.max_term_weight),
    }
}
