#![allow(dead_code)]

use std::path::PathBuf;

use termpred::{parse_program, parse_query, predict, Program, PredictorConfig, Pruning, Query, Report};

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.pl"))
}

pub fn program(name: &str) -> Program {
    let src = std::fs::read_to_string(corpus_path(name)).expect("corpus file");
    parse_program(&src).expect("corpus parses")
}

pub fn query(q: &str) -> Query {
    parse_query(q).expect("query parses")
}

pub fn run(name: &str, q: &str, r: usize, pruning: Pruning) -> Report {
    let cfg = PredictorConfig::with_r(r).pruning(pruning);
    predict(&program(name), &query(q), &cfg).expect("no flounder")
}

/// The golden suite: (program, query, expected verdict at r=3).
pub const GOLDEN: &[(&str, &str, &str)] = &[
    ("p0", "p", "terminating"),
    ("p1", "p(i)", "predicted-terminating"),
    ("p1", "p(X)", "predicted-non-terminating"),
    ("p2", "append(i,o,o)", "predicted-terminating"),
    ("p2", "append(o,i,o)", "predicted-non-terminating"),
    ("p2", "append(o,o,i)", "predicted-terminating"),
    ("p3", "add(i,o,o)", "predicted-terminating"),
    ("p3", "add(o,i,o)", "predicted-non-terminating"),
    ("p3", "add(o,o,i)", "predicted-terminating"),
    ("p3", "add(i,i,o)", "predicted-terminating"),
    ("p3", "add(i,o,i)", "predicted-terminating"),
    ("p3", "add(o,i,i)", "predicted-terminating"),
    ("p3", "add(i,i,i)", "predicted-terminating"),
    ("p3", "mult(i,i,o)", "predicted-terminating"),
    ("p3", "mult(i,i,i)", "predicted-terminating"),
    ("p3", "mult(i,o,o)", "predicted-non-terminating"),
    ("p3", "mult(o,i,o)", "predicted-non-terminating"),
    ("p3", "mult(o,o,i)", "predicted-non-terminating"),
    ("p3", "mult(i,o,i)", "predicted-non-terminating"),
    ("p3", "mult(o,i,i)", "predicted-non-terminating"),
    ("p4", "subset1(o,i)", "predicted-non-terminating"),
    ("p5", "p(i)", "predicted-terminating"),
    ("p6", "f(i)", "predicted-terminating"),
    ("p7", "p(i,0)", "predicted-terminating"),
];

/// Golden items whose expected verdict is not reproduced at r=3, with the
/// verdict actually produced.
pub const KNOWN_DEVIATIONS: &[(&str, &str, &str)] = &[("p3", "mult(i,o,i)", "predicted-terminating")];

pub fn known_deviation(prog: &str, q: &str) -> Option<&'static str> {
    KNOWN_DEVIATIONS
        .iter()
        .find(|(p, x, _)| *p == prog && *x == q)
        .map(|(_, _, got)| *got)
}
