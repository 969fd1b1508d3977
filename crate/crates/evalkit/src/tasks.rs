use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use cutleak_core::circuit::{Family, Geometry};
use cutleak_core::cutkit::Mechanism;
use cutleak_core::labels::{Connectivity, KLocality, LabelSet};
use cutleak_core::router::TopologyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    A1,
    A2,
    W1,
    W2,
    H1,
    H2,
    H3,
}

/// The six tasks of the headline table (A2 is evaluated per family).
pub const HEADLINE_TASKS: [Task; 6] = [Task::A1, Task::W1, Task::W2, Task::H1, Task::H2, Task::H3];

impl Task {
    pub const ALL: [Task; 7] = [Task::A1, Task::A2, Task::W1, Task::W2, Task::H1, Task::H2, Task::H3];

    pub fn name(self) -> &'static str {
        match self {
            Task::A1 => "A1",
            Task::A2 => "A2",
            Task::W1 => "W1",
            Task::W2 => "W2",
            Task::H1 => "H1",
            Task::H2 => "H2",
            Task::H3 => "H3",
        }
    }

    pub fn n_classes(self) -> usize {
        match self {
            Task::A1 => 8,
            Task::W1 => 2,
            _ => 3,
        }
    }

    pub fn label(self, l: &LabelSet) -> usize {
        match self {
            Task::A1 => l.a1_family.index(),
            Task::A2 => l.a2_subfamily.index(),
            Task::W1 => Mechanism::ALL.iter().position(|&m| m == l.w1_mechanism).unwrap(),
            Task::W2 => TopologyKind::ALL.iter().position(|&b| b == l.w2_backend).unwrap(),
            Task::H1 => Connectivity::ALL.iter().position(|&c| c == l.h1_connectivity).unwrap(),
            Task::H2 => Geometry::ALL.iter().position(|&g| g == l.h2_geometry).unwrap(),
            Task::H3 => KLocality::ALL.iter().position(|&k| k == l.h3_klocality).unwrap(),
        }
    }

    pub fn class_names(self) -> Vec<String> {
        match self {
            Task::A1 => Family::ALL.iter().map(|f| f.name().to_string()).collect(),
            Task::A2 => vec!["sub0".into(), "sub1".into(), "sub2".into()],
            Task::W1 => vec!["wire".into(), "gate".into()],
            Task::W2 => TopologyKind::ALL.iter().map(|b| b.name().to_string()).collect(),
            Task::H1 => vec!["local_sparse".into(), "medium".into(), "dense".into()],
            Task::H2 => vec!["chain".into(), "grid".into(), "irregular".into()],
            Task::H3 => vec!["k2".into(), "k3_4".into(), "k5plus".into()],
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown task '{s}'"))
    }
}
