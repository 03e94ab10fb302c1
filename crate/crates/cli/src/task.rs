//! Task files: JSON with `states.angles` or `states.gram`, optional `priors`,
//! `clone.from`, `clone.to` and an optional `partition`.

use std::path::Path;

use clonebound::{CloneTask, GramMatrix, Partition};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub states: States,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
    pub clone: CloneSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
}

/// Exactly one of `angles` (radians) or `gram`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct States {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloneSpec {
    pub from: u32,
    pub to: u32,
}

/// `"0,1,2;3,4"` or `[[0, 1, 2], [3, 4]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    Text(String),
    Groups(Vec<Vec<usize>>),
}

impl PartitionSpec {
    pub fn to_partition(&self) -> Result<Partition> {
        match self {
            PartitionSpec::Text(s) => Ok(s.parse()?),
            PartitionSpec::Groups(g) => Ok(Partition::new(g.clone())),
        }
    }
}

impl TaskFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_angles(angles: &[f64], from: u32, to: u32) -> Self {
        Self {
            states: States { angles: Some(angles.to_vec()), gram: None },
            priors: None,
            clone: CloneSpec { from, to },
            partition: None,
        }
    }

    pub fn task(&self) -> Result<CloneTask<f64>> {
        let base = match (&self.states.angles, &self.states.gram) {
            (Some(angles), None) => GramMatrix::from_angles(angles)?,
            (None, Some(rows)) => GramMatrix::from_rows(rows)?,
            _ => {
                return Err(CliError::TaskFile(
                    "states must have exactly one of \"angles\" or \"gram\"".into(),
                ))
            }
        };
        let task = match &self.priors {
            Some(p) => CloneTask::new(base, p.clone(), self.clone.from, self.clone.to)?,
            None => CloneTask::uniform(base, self.clone.from, self.clone.to)?,
        };
        if let Some(p) = self.partition()? {
            p.validate(task.n_states())?;
        }
        Ok(task)
    }

    pub fn partition(&self) -> Result<Option<Partition>> {
        self.partition.as_ref().map(PartitionSpec::to_partition).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_state_forms() {
        let a = TaskFile::parse(
            r#"{"states": {"angles": [0, 0.5, 1.0]}, "clone": {"from": 1, "to": 2}, "partition": "0,1;2"}"#,
        )
        .unwrap();
        assert_eq!(a.task().unwrap().n_states(), 3);
        assert_eq!(a.partition().unwrap().unwrap().groups(), &[vec![0, 1], vec![2]]);
        let g = TaskFile::parse(
            r#"{"states": {"gram": [[1, 0], [0, 1]]}, "priors": [0.25, 0.75],
                "clone": {"from": 1, "to": 3}, "partition": [[0, 1]]}"#,
        )
        .unwrap();
        let task = g.task().unwrap();
        assert_eq!(task.priors(), &[0.25, 0.75]);
        assert_eq!(task.n_copies(), 3);
    }

    #[test]
    fn rejects_ambiguous_states() {
        let both = TaskFile::parse(
            r#"{"states": {"angles": [0, 1], "gram": [[1, 0], [0, 1]]}, "clone": {"from": 1, "to": 2}}"#,
        )
        .unwrap();
        assert!(matches!(both.task(), Err(CliError::TaskFile(_))));
        let none = TaskFile::parse(r#"{"states": {}, "clone": {"from": 1, "to": 2}}"#).unwrap();
        assert!(none.task().is_err());
        assert!(TaskFile::parse(r#"{"states": {"angles": [0]}, "clone": {"from": 1}}"#).is_err());
    }

    #[test]
    fn bad_partition() {
        let t = TaskFile::parse(
            r#"{"states": {"angles": [0, 0.5, 1.0]}, "clone": {"from": 1, "to": 2}, "partition": "0,1"}"#,
        )
        .unwrap();
        assert!(matches!(t.task(), Err(CliError::Task(clonebound::Error::InvalidPartition(_)))));
    }
}
