//! Plain-text LP dump for reproducing solver issues.
//!
//! ```text
//! lp <n_vars> <n_rows>
//! objective c_1 … c_n
//! lower l_1 … l_n
//! upper u_1 … u_n
//! row a_1 … a_n <= b
//! ```
//! Numbers use Rust's shortest round-trip formatting, so a dump reloads to a
//! bit-identical problem.

use std::fmt::Write as _;

use super::{LpProblem, Relation};
use crate::error::{Error, Result};

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v:?}");
    }
    s
}

pub fn write_dump(p: &LpProblem) -> String {
    let mut out = format!("lp {} {}\n", p.n_vars(), p.n_rows());
    let _ = writeln!(out, "objective {}", join(&p.objective));
    let _ = writeln!(out, "lower {}", join(&p.lower));
    let _ = writeln!(out, "upper {}", join(&p.upper));
    for row in &p.constraints {
        let _ = writeln!(
            out,
            "row {} {} {:?}",
            join(&row.coefficients),
            row.relation.symbol(),
            row.rhs
        );
    }
    out
}

fn parse_numbers(line: usize, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Csv {
                line,
                message: format!("bad number `{t}`"),
            })
        })
        .collect()
}

pub fn read_dump(text: &str) -> Result<LpProblem> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let bad = |line: usize, message: &str| Error::Csv {
        line: line + 1,
        message: message.to_string(),
    };
    let (i, header) = lines.next().ok_or_else(|| bad(0, "empty dump"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 || h[0] != "lp" {
        return Err(bad(i, "expected `lp <n_vars> <n_rows>`"));
    }
    let n: usize = h[1].parse().map_err(|_| bad(i, "bad variable count"))?;
    let m: usize = h[2].parse().map_err(|_| bad(i, "bad row count"))?;
    let mut vector = |name: &str| -> Result<Vec<f64>> {
        let (i, l) = lines.next().ok_or_else(|| bad(0, "truncated dump"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.first() != Some(&name) || t.len() != n + 1 {
            return Err(bad(i, &format!("expected `{name}` with {n} values")));
        }
        parse_numbers(i + 1, &t[1..])
    };
    let objective = vector("objective")?;
    let lower = vector("lower")?;
    let upper = vector("upper")?;
    let mut p = LpProblem {
        objective,
        constraints: Vec::with_capacity(m),
        lower,
        upper,
    };
    for (i, l) in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != n + 3 || t[0] != "row" {
            return Err(bad(i, "expected `row a_1 … a_n <rel> b`"));
        }
        let coefficients = parse_numbers(i + 1, &t[1..=n])?;
        let relation = match t[n + 1] {
            "<=" => Relation::Le,
            ">=" => Relation::Ge,
            "=" => Relation::Eq,
            other => return Err(bad(i, &format!("unknown relation `{other}`"))),
        };
        let rhs = parse_numbers(i + 1, &t[n + 2..])?[0];
        p.add_row(coefficients, relation, rhs);
    }
    if p.n_rows() != m {
        return Err(bad(0, "row count does not match header"));
    }
    Ok(p)
}
