//! Built-in benchmark instances. Each constructor returns a full oracle
//! bundle, with an independently computed reference KKT point attached when
//! one is available.

mod boxqp;
mod control;
mod obstacle;
mod quadratic_box;
mod redundant;
mod scalar;

pub use boxqp::solve_box_qp;
pub use control::{make_control_lq, make_control_lq_with};
pub use obstacle::{make_obstacle_1d, make_obstacle_1d_with};
pub use quadratic_box::make_quadratic_box;
pub use redundant::make_redundant_equality;
pub use scalar::make_scalar_toy;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::problem::ProblemOracles;

/// Declarative instance selector, deserializable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InstanceSpec {
    ScalarToy,
    Obstacle1d { n: usize },
    ControlLq { n: usize },
    RedundantEquality { n: usize },
    QuadraticBox { n: usize, m: usize, seed: u64 },
}

impl InstanceSpec {
    /// Stable identifier used in report rows and output file names.
    pub fn name(&self) -> String {
        match self {
            InstanceSpec::ScalarToy => "scalar_toy".to_string(),
            InstanceSpec::Obstacle1d { n } => format!("obstacle_1d_n{n}"),
            InstanceSpec::ControlLq { n } => format!("control_lq_n{n}"),
            InstanceSpec::RedundantEquality { n } => format!("redundant_equality_n{n}"),
            InstanceSpec::QuadraticBox { n, m, seed } => {
                format!("quadratic_box_n{n}_m{m}_s{seed}")
            }
        }
    }

    pub fn build(&self) -> Result<ProblemOracles> {
        match self {
            InstanceSpec::ScalarToy => Ok(make_scalar_toy()),
            InstanceSpec::Obstacle1d { n } => make_obstacle_1d(*n),
            InstanceSpec::ControlLq { n } => make_control_lq(*n),
            InstanceSpec::RedundantEquality { n } => make_redundant_equality(*n),
            InstanceSpec::QuadraticBox { n, m, seed } => make_quadratic_box(*n, *m, *seed),
        }
    }

    /// The canonical benchmark lineup.
    pub fn catalog() -> Vec<InstanceSpec> {
        vec![
            InstanceSpec::ScalarToy,
            InstanceSpec::Obstacle1d { n: 32 },
            InstanceSpec::Obstacle1d { n: 64 },
            InstanceSpec::ControlLq { n: 32 },
            InstanceSpec::RedundantEquality { n: 4 },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds_and_names_are_unique() {
        let cat = InstanceSpec::catalog();
        let mut names: Vec<String> = cat.iter().map(|s| s.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), cat.len());
        for spec in &cat {
            assert!(spec.build().is_ok(), "{} failed to build", spec.name());
        }
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = InstanceSpec::QuadraticBox { n: 5, m: 3, seed: 9 };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"family\":\"quadratic_box\""));
        let back: InstanceSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
