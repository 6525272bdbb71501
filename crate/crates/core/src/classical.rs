//! Papadimitriou's random walk for classical 2-SAT.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Output token when the walk finds nothing.
pub const NOT_FOUND: &str = "UNSAT-NOT-FOUND";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self {
            var,
            negated: false,
        }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    pub fn eval(&self, x: &[bool]) -> bool {
        x[self.var] != self.negated
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfInstance {
    n: usize,
    clauses: Vec<[Literal; 2]>,
}

impl CnfInstance {
    pub fn new(n: usize, clauses: Vec<[Literal; 2]>) -> Result<Self> {
        for (k, c) in clauses.iter().enumerate() {
            for lit in c {
                if lit.var >= n {
                    return Err(Error::InvalidInstance(format!(
                        "clause {k} uses variable {} but n = {n}",
                        lit.var
                    )));
                }
            }
        }
        Ok(Self { n, clauses })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[[Literal; 2]] {
        &self.clauses
    }

    fn satisfied(&self, k: usize, x: &[bool]) -> bool {
        let [a, b] = &self.clauses[k];
        a.eval(x) || b.eval(x)
    }

    /// DIMACS text, variables numbered from 1.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for [a, b] in &self.clauses {
            let lit = |l: &Literal| {
                let v = l.var as i64 + 1;
                if l.negated {
                    -v
                } else {
                    v
                }
            };
            out.push_str(&format!("{} {} 0\n", lit(a), lit(b)));
        }
        out
    }
}

/// True iff every clause has a true literal.
pub fn check_cnf(x: &[bool], inst: &CnfInstance) -> Result<bool> {
    if x.len() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            found: x.len(),
        });
    }
    Ok((0..inst.clauses.len()).all(|k| inst.satisfied(k, x)))
}

/// Random walk with a budget of ⌈b·n²⌉ flips. Returns the first satisfying
/// assignment seen, or `None`.
pub fn papadimitriou(inst: &CnfInstance, b: f64, seed: u64) -> Result<Option<Vec<bool>>> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "b must be positive, got {b}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = (b * (inst.n * inst.n) as f64).ceil() as u64;
    let mut x: Vec<bool> = (0..inst.n).map(|_| rng.random()).collect();
    let mut unsat = Vec::new();
    for iter in 0..=budget {
        unsat.clear();
        unsat.extend((0..inst.clauses.len()).filter(|&k| !inst.satisfied(k, &x)));
        if unsat.is_empty() {
            debug_assert!(check_cnf(&x, inst)?);
            return Ok(Some(x));
        }
        if iter == budget {
            break;
        }
        let k = unsat[rng.random_range(0..unsat.len())];
        let lit = inst.clauses[k][rng.random_range(0..2)];
        x[lit.var] = !x[lit.var];
    }
    Ok(None)
}

pub fn format_assignment(x: &[bool]) -> String {
    x.iter().map(|&v| if v { '1' } else { '0' }).collect()
}

/// Random 2-SAT with `m` clauses on distinct variable pairs, all satisfied by
/// a hidden random assignment. Returns the instance and that assignment.
pub fn generate_planted_2sat(n: usize, m: usize, seed: u64) -> Result<(CnfInstance, Vec<bool>)> {
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let clause = [
            Literal {
                var: a,
                negated: rng.random(),
            },
            Literal {
                var: b,
                negated: rng.random(),
            },
        ];
        if clause[0].eval(&hidden) || clause[1].eval(&hidden) {
            clauses.push(clause);
        }
    }
    Ok((CnfInstance::new(n, clauses)?, hidden))
}

impl fmt::Display for CnfInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dimacs())
    }
}

/// Parses DIMACS CNF where every clause has exactly two literals.
pub fn parse_dimacs(text: &str) -> Result<CnfInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let loc = || format!("line {}", ln + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(Error::parse(loc(), "expected 'p cnf <vars> <clauses>'"));
            }
            let nv = parts[2]
                .parse()
                .map_err(|_| Error::parse(loc(), "bad variable count"))?;
            let nc = parts[3]
                .parse()
                .map_err(|_| Error::parse(loc(), "bad clause count"))?;
            header = Some((nv, nc));
            continue;
        }
        let (nv, _) = header.ok_or_else(|| Error::parse(loc(), "clause before header"))?;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::parse(loc(), format!("bad literal '{tok}'")))?;
            if v == 0 {
                if pending.len() != 2 {
                    return Err(Error::parse(
                        loc(),
                        format!("clause has {} literals, expected 2", pending.len()),
                    ));
                }
                let lit = |v: i64| Literal {
                    var: v.unsigned_abs() as usize - 1,
                    negated: v < 0,
                };
                clauses.push([lit(pending[0]), lit(pending[1])]);
                pending.clear();
            } else {
                if v.unsigned_abs() as usize > nv {
                    return Err(Error::parse(loc(), format!("variable {v} exceeds {nv}")));
                }
                pending.push(v);
            }
        }
    }
    let (nv, nc) = header.ok_or_else(|| Error::parse("end of input", "missing header"))?;
    if !pending.is_empty() {
        return Err(Error::parse("end of input", "unterminated clause"));
    }
    if clauses.len() != nc {
        return Err(Error::parse(
            "header",
            format!("declared {nc} clauses, found {}", clauses.len()),
        ));
    }
    CnfInstance::new(nv, clauses)
}
