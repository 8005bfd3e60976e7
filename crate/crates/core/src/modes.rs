//! Most general moded queries and inference by mode subsumption.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::predictor::{predict, PredictError, PredictorConfig, Report, Verdict};
use crate::program::{Program, Query};
use crate::term::PredKey;

/// Every moded query `p(m1,...,mn)` with at least one input mode and distinct
/// fresh variables elsewhere, for each predicate defined in `program`.
pub fn most_general_moded_queries(program: &Program) -> Vec<Query> {
    let mut out = Vec::new();
    for key in program.predicates() {
        if program.clauses_for(key).is_empty() {
            continue;
        }
        out.extend(moded_queries_for(key));
    }
    out
}

/// The `2^n - 1` moded queries of one predicate, fewest input modes first.
pub fn moded_queries_for(key: &PredKey) -> Vec<Query> {
    let n = key.arity;
    let mut masks: Vec<u64> = (1..(1u64 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
    masks
        .into_iter()
        .map(|m| {
            let inputs: Vec<bool> = (0..n).map(|j| m & (1 << j) != 0).collect();
            Query::most_general(key.name.clone(), &inputs)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModeVerdict {
    Computed { verdict: Verdict },
    /// Carried over from a query whose input modes are a subset.
    Inferred { verdict: Verdict, from: String },
    Failed { error: String },
    Unassigned,
}

impl ModeVerdict {
    pub fn verdict(&self) -> Option<Verdict> {
        match self {
            ModeVerdict::Computed { verdict } | ModeVerdict::Inferred { verdict, .. } => Some(*verdict),
            _ => None,
        }
    }

    pub fn is_inferred(&self) -> bool {
        matches!(self, ModeVerdict::Inferred { .. })
    }

    /// Open to inference: nothing computed, or the computation ran out of
    /// resources.
    fn is_open(&self) -> bool {
        matches!(
            self,
            ModeVerdict::Unassigned
                | ModeVerdict::Computed {
                    verdict: Verdict::ResourceExceeded
                }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeResult {
    pub query: String,
    #[serde(skip)]
    pub q: Query,
    pub result: ModeVerdict,
    #[serde(skip)]
    pub report: Option<Report>,
}

impl ModeResult {
    pub fn unassigned(q: Query) -> Self {
        ModeResult {
            query: q.mode_string(),
            q,
            result: ModeVerdict::Unassigned,
            report: None,
        }
    }

    pub fn computed(q: Query, verdict: Verdict) -> Self {
        ModeResult {
            query: q.mode_string(),
            q,
            result: ModeVerdict::Computed { verdict },
            report: None,
        }
    }
}

fn inputs(q: &Query) -> BTreeSet<usize> {
    q.input_positions().into_iter().collect()
}

/// If `Q1` is (predicted-)terminating and its input modes all occur in an open
/// `Q2` of the same predicate, `Q2` gets `Q1`'s verdict, marked inferred.
/// Computed verdicts are never replaced.
pub fn infer_by_mode_subsumption(results: &[ModeResult]) -> Vec<ModeResult> {
    let mut out = results.to_vec();
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by_key(|&i| out[i].q.input_positions().len());
    for &i in &order {
        let Some(v) = out[i].result.verdict().filter(|v| v.is_terminating()) else {
            continue;
        };
        let (key, ins) = (out[i].q.key(), inputs(&out[i].q));
        let from = out[i].query.clone();
        for j in 0..out.len() {
            if j != i
                && out[j].result.is_open()
                && out[j].q.key() == key
                && ins.is_subset(&inputs(&out[j].q))
            {
                out[j].result = ModeVerdict::Inferred {
                    verdict: v,
                    from: from.clone(),
                };
            }
        }
    }
    out
}

/// Predicts every most general moded query, fewest input modes first. Each
/// layer runs in parallel; queries already settled by inference are skipped.
pub fn analyze_all_modes(program: &Program, cfg: &PredictorConfig) -> Vec<ModeResult> {
    let mut results: Vec<ModeResult> = most_general_moded_queries(program)
        .into_iter()
        .map(ModeResult::unassigned)
        .collect();
    let max_inputs = results
        .iter()
        .map(|r| r.q.input_positions().len())
        .max()
        .unwrap_or(0);
    for layer in 1..=max_inputs {
        let todo: Vec<usize> = (0..results.len())
            .filter(|&i| {
                results[i].q.input_positions().len() == layer
                    && results[i].result == ModeVerdict::Unassigned
            })
            .collect();
        let computed: Vec<(usize, Result<Report, PredictError>)> = todo
            .par_iter()
            .map(|&i| (i, predict(program, &results[i].q, cfg)))
            .collect();
        for (i, res) in computed {
            match res {
                Ok(report) => {
                    results[i].result = ModeVerdict::Computed {
                        verdict: report.verdict,
                    };
                    results[i].report = Some(report);
                }
                Err(e) => results[i].result = ModeVerdict::Failed { error: e.to_string() },
            }
        }
        results = infer_by_mode_subsumption(&results);
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    #[test]
    fn counts_per_arity() {
        let p = parse_program("u(a).\nb(a,b).\nt(a,b,c).").unwrap();
        let qs = most_general_moded_queries(&p);
        assert_eq!(qs.len(), 1 + 3 + 7);
    }

    #[test]
    fn single_inputs_come_first() {
        let key = PredKey {
            name: "p".into(),
            arity: 2,
        };
        let modes: Vec<String> = moded_queries_for(&key).iter().map(|q| q.mode_string()).collect();
        assert_eq!(modes, ["p(i,o)", "p(o,i)", "p(i,i)"]);
    }

    #[test]
    fn empty_input_gives_empty_output() {
        assert!(infer_by_mode_subsumption(&[]).is_empty());
    }
}
