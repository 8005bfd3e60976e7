//! Termination prediction for general logic programs.
//!
//! Builds generalized SLDNF-trees depth-first, detects loop prefixes along
//! each derivation and predicts whether a query (concrete or moded) terminates.

pub mod engine;
pub mod ids;
pub mod loops;
pub mod modes;
pub mod oracle;
pub mod parser;
pub mod predictor;
pub mod program;
pub mod subst;
pub mod symbols;
pub mod term;

pub use engine::{build_tree, EngineLimits, GeneralizedTree, NodeStatus, Observer};
pub use ids::{ClauseIdx, NodeId, TreeId};
pub use loops::{find_lp_prefix, has_term_size_decrease, loops_into, LpWitness};
pub use modes::{analyze_all_modes, infer_by_mode_subsumption, most_general_moded_queries};
pub use oracle::{bounded_interpret, sample_forest, OracleOutcome};
pub use parser::{parse_program, parse_query, ParseError};
pub use predictor::{predict, PredictError, PredictorConfig, Pruning, Report, Verdict};
pub use program::{Clause, Program, Query};
pub use subst::{unify, Substitution, UnifyError};
pub use term::{Atom, Goal, Literal, Term, Var, VarKind};
