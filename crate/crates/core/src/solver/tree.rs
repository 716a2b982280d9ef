use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{grade_unchecked, Code, Feedback, GameSpec};

/// A node of a codebreaker decision tree: the question to ask and the
/// subtree to follow for each possible non-winning answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyNode {
    pub question: Code,
    /// The question is itself a remaining candidate, so it may be answered
    /// with all black pegs and end the game here.
    pub wins: bool,
    pub children: BTreeMap<Feedback, StrategyNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("secret {secret} reaches answer {answer} with no subtree")]
    MissingBranch { secret: String, answer: String },
    #[error("secret {secret} needs {used} questions, more than {limit}")]
    TooDeep { secret: String, used: usize, limit: usize },
}

impl StrategyNode {
    pub fn new(question: Code, wins: bool) -> Self {
        Self {
            question,
            wins,
            children: BTreeMap::new(),
        }
    }

    /// Longest root-to-leaf question count.
    pub fn depth(&self) -> usize {
        1 + self.children.values().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.values().map(|c| c.size()).sum::<usize>()
    }

    /// Questions needed to identify `secret`, or why the tree fails on it.
    pub fn play(&self, secret: &Code, spec: &GameSpec) -> std::result::Result<usize, ReplayError> {
        let win = spec.win();
        let mut node = self;
        let mut used = 1;
        loop {
            let answer = grade_unchecked(&node.question, secret, spec.mode);
            if answer == win {
                return Ok(used);
            }
            node = node
                .children
                .get(&answer)
                .ok_or_else(|| ReplayError::MissingBranch {
                    secret: spec.format_code(secret),
                    answer: answer.to_string(),
                })?;
            used += 1;
        }
    }

    /// Plays every secret through the tree and checks none needs more than
    /// `limit` questions. Returns the worst count observed.
    pub fn replay(
        &self,
        secrets: &[Code],
        spec: &GameSpec,
        limit: usize,
    ) -> std::result::Result<usize, ReplayError> {
        let mut worst = 0;
        for s in secrets {
            let used = self.play(s, spec)?;
            if used > limit {
                return Err(ReplayError::TooDeep {
                    secret: spec.format_code(s),
                    used,
                    limit,
                });
            }
            worst = worst.max(used);
        }
        Ok(worst)
    }

    /// Serializes the tree as nested JSON records (pretty-printed, children
    /// ordered by answer, so equal trees give identical bytes).
    pub fn to_json(&self, spec: &GameSpec) -> String {
        serde_json::to_string_pretty(&self.record(spec)).expect("tree serializes")
    }

    pub fn from_json(text: &str, spec: &GameSpec) -> Result<Self> {
        let rec: NodeRecord =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_record(&rec, spec)
    }

    fn record(&self, spec: &GameSpec) -> NodeRecord {
        NodeRecord {
            question: spec.format_code(&self.question),
            wins: self.wins,
            children: self
                .children
                .iter()
                .map(|(a, n)| ChildRecord {
                    answer: a.to_string(),
                    node: n.record(spec),
                })
                .collect(),
        }
    }

    fn from_record(rec: &NodeRecord, spec: &GameSpec) -> Result<Self> {
        let mut node = Self::new(spec.parse_code(&rec.question)?, rec.wins);
        for child in &rec.children {
            node.children
                .insert(child.answer.parse()?, Self::from_record(&child.node, spec)?);
        }
        Ok(node)
    }
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    question: String,
    wins: bool,
    children: Vec<ChildRecord>,
}

#[derive(Serialize, Deserialize)]
struct ChildRecord {
    answer: String,
    node: NodeRecord,
}
