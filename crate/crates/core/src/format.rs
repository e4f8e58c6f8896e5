//! The line-based topology file format.
//!
//! ```text
//! # comment
//! state 0 h=2 init
//! state 1 h=0 goal
//! edge 0 1
//! ```
//!
//! Ids must cover `0..n` exactly. Edges keep their file order, which is the
//! successor order engines generate in.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::topology::{ExplicitTopology, HValue, StateId, StateSpace, TopologyError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid topology: {0}")]
    Invalid(#[from] TopologyError),
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse { line, message: message.into() }
}

fn parse_id(tok: Option<&str>, line: usize, what: &str) -> Result<u32, FormatError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

/// Parses and validates topology text.
pub fn load_topology(text: &str) -> Result<ExplicitTopology, FormatError> {
    struct Decl {
        h: HValue,
        goal: bool,
        line: usize,
    }
    let mut decls: Vec<Option<Decl>> = Vec::new();
    let mut edges: Vec<(u32, u32, usize)> = Vec::new();
    let mut init: Option<(u32, usize)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        match toks.next() {
            Some("state") => {
                let id = parse_id(toks.next(), line, "state id")?;
                let mut h = None;
                let mut goal = false;
                for tok in toks {
                    if let Some(v) = tok.strip_prefix("h=") {
                        let v = v.parse().map_err(|_| parse_err(line, format!("bad h value `{v}`")))?;
                        if h.replace(v).is_some() {
                            return Err(parse_err(line, "h given twice"));
                        }
                    } else if tok == "init" {
                        if let Some((_, first)) = init {
                            return Err(parse_err(line, format!("second init (first on line {first})")));
                        }
                        init = Some((id, line));
                    } else if tok == "goal" {
                        goal = true;
                    } else {
                        return Err(parse_err(line, format!("unknown attribute `{tok}`")));
                    }
                }
                let h = h.ok_or_else(|| parse_err(line, "missing h=<int>"))?;
                let idx = id as usize;
                if decls.len() <= idx {
                    decls.resize_with(idx + 1, || None);
                }
                if let Some(prev) = &decls[idx] {
                    return Err(parse_err(line, format!("state {id} already declared on line {}", prev.line)));
                }
                decls[idx] = Some(Decl { h, goal, line });
            }
            Some("edge") => {
                let from = parse_id(toks.next(), line, "source id")?;
                let to = parse_id(toks.next(), line, "target id")?;
                if let Some(extra) = toks.next() {
                    return Err(parse_err(line, format!("unexpected `{extra}` after edge")));
                }
                edges.push((from, to, line));
            }
            Some(other) => return Err(parse_err(line, format!("unknown directive `{other}`"))),
            None => unreachable!(),
        }
    }

    let n = decls.len();
    if let Some(missing) = decls.iter().position(Option::is_none) {
        return Err(parse_err(0, format!("state {missing} is never declared")));
    }
    let (init, _) = init.ok_or_else(|| parse_err(0, "no state is marked init"))?;
    let mut h = Vec::with_capacity(n);
    let mut goal = Vec::with_capacity(n);
    for d in decls.into_iter().flatten() {
        h.push(d.h);
        goal.push(d.goal);
    }
    let mut succ = vec![Vec::new(); n];
    for (from, to, line) in edges {
        for id in [from, to] {
            if id as usize >= n {
                return Err(parse_err(line, format!("edge mentions undeclared state {id}")));
            }
        }
        succ[from as usize].push(StateId(to));
    }
    Ok(ExplicitTopology::new(h, goal, succ, StateId(init))?)
}

/// Canonical text for `topo`: states in id order, then edges grouped by source.
pub fn save_topology(topo: &ExplicitTopology) -> String {
    let mut out = String::new();
    let init = topo.initial();
    for i in 0..topo.num_states() {
        let s = StateId::from(i);
        let _ = write!(out, "state {i} h={}", topo.h_values()[i]);
        if s == init {
            out.push_str(" init");
        }
        if topo.goal_flags()[i] {
            out.push_str(" goal");
        }
        out.push('\n');
    }
    for i in 0..topo.num_states() {
        for t in topo.succ(StateId::from(i)) {
            let _ = writeln!(out, "edge {i} {t}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::gen_plateau;

    #[test]
    fn single_state() {
        let t = load_topology("# trivial\nstate 0 h=0 init goal\n").unwrap();
        assert_eq!(t.num_states(), 1);
    }

    #[test]
    fn goal_with_edge_is_rejected() {
        let err = load_topology("state 0 h=1 init\nstate 1 h=0 goal\nstate 2 h=0 goal\nedge 0 1\nedge 1 2\n")
            .unwrap_err();
        assert_eq!(err, FormatError::Invalid(TopologyError::GoalHasSuccessors(StateId(1))));
        assert!(alloc::string::ToString::to_string(&err).contains("goal 1 has successors"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = load_topology("state 0 h=1 init\n\nstate 1 h=x goal\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 3, .. }), "{err:?}");
        let err = load_topology("state 0 h=0 init goal\nedge 0 9\n").unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn plateau_round_trips() {
        let t = gen_plateau(4, 3, 1);
        let text = save_topology(&t);
        assert_eq!(load_topology(&text).unwrap(), t);
    }
}
