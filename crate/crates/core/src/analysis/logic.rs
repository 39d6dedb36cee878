//! Conjunctions of signed inputs read off thresholded connectivity.

use std::fmt;

use crate::analysis::connectivity::ConnectivityGraph;
use crate::error::{Result, SvqError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    /// 1-based input index.
    pub input: usize,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjunction {
    /// 1-based top-layer output index.
    pub output: usize,
    /// Sorted by input index.
    pub literals: Vec<Literal>,
}

impl Conjunction {
    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Same inputs with every sign flipped.
    pub fn is_complement_of(&self, other: &Conjunction) -> bool {
        !self.is_empty()
            && self.literals.len() == other.literals.len()
            && self
                .literals
                .iter()
                .zip(&other.literals)
                .all(|(a, b)| a.input == b.input && a.negated != b.negated)
    }
}

fn subscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize])
        .collect()
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "x\u{0304}{}", subscript(self.input))
        } else {
            write!(f, "x{}", subscript(self.input))
        }
    }
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O{}(x) = ", subscript(self.output))?;
        if self.literals.is_empty() {
            return write!(f, "∅");
        }
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∩ ")?;
            }
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicReport {
    pub expressions: Vec<Conjunction>,
    pub warnings: Vec<String>,
}

impl LogicReport {
    /// Pairs each expression with its complement. `None` unless every
    /// expression has exactly one complement partner.
    pub fn complement_pairs(&self) -> Option<Vec<(usize, usize)>> {
        let exprs = &self.expressions;
        let mut used = vec![false; exprs.len()];
        let mut pairs = Vec::new();
        for i in 0..exprs.len() {
            if used[i] {
                continue;
            }
            let j = (i + 1..exprs.len()).find(|&j| !used[j] && exprs[i].is_complement_of(&exprs[j]))?;
            used[i] = true;
            used[j] = true;
            pairs.push((exprs[i].output, exprs[j].output));
        }
        Some(pairs)
    }
}

/// Composes signed paths from inputs to every top-layer output, keeping
/// only edges with `|recon| >= tau_logic`.
///
/// The signed path weight is the product of reconstruction components
/// along the path; an input becomes a literal when the summed weight of its
/// surviving paths is nonzero, negated when that sum is negative.
pub fn extract_logic(graph: &ConnectivityGraph, tau_logic: f64) -> Result<LogicReport> {
    let max_tau = graph.stages.iter().fold(0.0f64, |a, s| a.max(s.tau));
    if !(tau_logic >= max_tau) || !tau_logic.is_finite() {
        return Err(SvqError::invalid(
            "tau_logic",
            format!("must be finite and at least the graph threshold {max_tau}"),
        ));
    }
    let taus = vec![tau_logic; graph.num_stages()];
    Ok(compose(graph, &taus))
}

/// Like [`extract_logic`] with each stage's threshold scaled by `factor`.
pub fn extract_logic_relative(graph: &ConnectivityGraph, factor: f64) -> Result<LogicReport> {
    if !(factor >= 1.0) || !factor.is_finite() {
        return Err(SvqError::invalid("factor", "must be finite and at least 1"));
    }
    let taus: Vec<f64> = graph.stages.iter().map(|s| factor * s.tau).collect();
    Ok(compose(graph, &taus))
}

fn compose(graph: &ConnectivityGraph, taus: &[f64]) -> LogicReport {
    let top = graph.stages.last().map(|s| s.m).unwrap_or(0);
    let mut expressions = Vec::with_capacity(top);
    let mut warnings = Vec::new();
    for (pos, &o) in graph.layer_orders[graph.num_stages()].iter().enumerate() {
        // signed weight and a path-exists flag per node of the current layer
        let mut weight = vec![0.0; top];
        let mut reached = vec![false; top];
        weight[o] = 1.0;
        reached[o] = true;
        for (sc, &tau) in graph.stages.iter().zip(taus).rev() {
            let mut w = vec![0.0; sc.input_dim];
            let mut r = vec![false; sc.input_dim];
            for y in 0..sc.m {
                if !reached[y] {
                    continue;
                }
                for k in 0..sc.input_dim {
                    let v = sc.value(y, k);
                    if sc.kept(y, k) && v.abs() >= tau {
                        w[k] += weight[y] * v;
                        r[k] = true;
                    }
                }
            }
            weight = w;
            reached = r;
        }
        let literals: Vec<Literal> = weight
            .iter()
            .zip(&reached)
            .enumerate()
            .filter(|(_, (w, r))| **r && **w != 0.0)
            .map(|(k, (w, _))| Literal {
                input: k + 1,
                negated: *w < 0.0,
            })
            .collect();
        if literals.is_empty() {
            warnings.push(format!("output {} has no surviving paths", pos + 1));
        }
        expressions.push(Conjunction {
            output: pos + 1,
            literals,
        });
    }
    LogicReport {
        expressions,
        warnings,
    }
}
