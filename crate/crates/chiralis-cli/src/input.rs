//! The line-oriented input format: variable declarations followed by
//! relations.
//!
//! ```text
//! # a fat point on a line
//! var x even inner=1
//! rel x^2
//! ```
//!
//! Each `var` line declares one generator of the base ring, in order:
//! `var <name> <even|odd> inner=<nonneg-int> [coh=<int≤0>]`. Each `rel` line
//! gives one element of the defining sequence as a polynomial expression in
//! the declared variables. `#` starts a comment, blank lines are ignored.
//! Every error carries the 1-based line and column it was detected at.

use std::fmt;
use std::sync::Arc;

use chiralis::superpoly::parse_polynomial;
use chiralis::{Parity, RingSpec, SuperPolynomial, VariableSpec};

/// A diagnosed problem in the input text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl InputError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        InputError { line, col, message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for InputError {}

/// A parsed input: the base ring and the relation sequence.
#[derive(Clone, Debug)]
pub struct ParsedInput {
    pub ring: Arc<RingSpec>,
    pub relations: Vec<SuperPolynomial>,
    /// 1-based source line of each relation, for error attribution.
    pub rel_lines: Vec<usize>,
}

/// Structural equality: same ring, same relations. Source positions are
/// bookkeeping, not structure.
impl PartialEq for ParsedInput {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.relations == other.relations
    }
}

/// Whitespace-separated fields of a line with their 1-based char columns.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut col = 0;
    let mut start: Option<(usize, usize)> = None; // (byte offset, col)
    for (bytes, ch) in line.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((b0, c0)) = start.take() {
                out.push((c0, &line[b0..bytes]));
            }
        } else if start.is_none() {
            start = Some((bytes, col));
        }
    }
    if let Some((b0, c0)) = start {
        out.push((c0, &line[b0..]));
    }
    out
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses one `var` line (fields after the keyword).
fn parse_var(
    lineno: usize,
    rest: &[(usize, &str)],
    end_col: usize,
) -> Result<VariableSpec, InputError> {
    let err = |col: usize, msg: &str| InputError::new(lineno, col, msg);
    let (name_col, name) = *rest
        .first()
        .ok_or_else(|| err(end_col, "expected a variable name after `var`"))?;
    if !is_identifier(name) {
        return Err(err(name_col, &format!("`{name}` is not a valid variable name")));
    }
    let (parity_col, parity_word) = *rest
        .get(1)
        .ok_or_else(|| err(end_col, "expected `even` or `odd` after the variable name"))?;
    let parity = match parity_word {
        "even" => Parity::Even,
        "odd" => Parity::Odd,
        other => return Err(err(parity_col, &format!("expected `even` or `odd`, found `{other}`"))),
    };
    let mut inner: Option<i64> = None;
    let mut coh: Option<i64> = None;
    for &(col, field) in &rest[2..] {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| err(col, &format!("expected `key=value`, found `{field}`")))?;
        let parsed: i64 = value
            .parse()
            .map_err(|_| err(col, &format!("`{value}` is not an integer")))?;
        match key {
            "inner" if inner.is_some() => return Err(err(col, "duplicate `inner=`")),
            "inner" if parsed < 0 => return Err(err(col, "inner degree must be nonnegative")),
            "inner" => inner = Some(parsed),
            "coh" if coh.is_some() => return Err(err(col, "duplicate `coh=`")),
            "coh" if parsed > 0 => return Err(err(col, "cohomological degree must be ≤ 0")),
            "coh" => coh = Some(parsed),
            other => return Err(err(col, &format!("unknown attribute `{other}`"))),
        }
    }
    let inner = inner.ok_or_else(|| err(end_col, "missing `inner=<nonneg-int>`"))?;
    Ok(VariableSpec::new(name, parity, coh.unwrap_or(0), inner))
}

/// Parses the whole input text into a ring and its relation sequence.
pub fn parse_input(text: &str) -> Result<ParsedInput, InputError> {
    let mut vars: Vec<(usize, usize, VariableSpec)> = Vec::new(); // (line, col, var)
    let mut raw_rels: Vec<(usize, usize, String)> = Vec::new(); // (line, col, expr)
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let fields = fields(line);
        let Some(&(first_col, keyword)) = fields.first() else {
            continue;
        };
        let end_col = line.chars().count() + 1;
        match keyword {
            "var" => {
                let v = parse_var(lineno, &fields[1..], end_col)?;
                let name_col = fields.get(1).map_or(first_col, |&(c, _)| c);
                if vars.iter().any(|(_, _, w)| w.name == v.name) {
                    return Err(InputError::new(
                        lineno,
                        name_col,
                        format!("duplicate variable `{}`", v.name),
                    ));
                }
                vars.push((lineno, name_col, v));
            }
            "rel" => {
                let Some(&(expr_col, _)) = fields.get(1) else {
                    return Err(InputError::new(
                        lineno,
                        end_col,
                        "expected a polynomial expression after `rel`",
                    ));
                };
                // Take the raw slice from the expression start so intra-token
                // spacing survives into the polynomial parser.
                let byte_start = line
                    .char_indices()
                    .nth(expr_col - 1)
                    .map_or(line.len(), |(b, _)| b);
                raw_rels.push((lineno, expr_col, line[byte_start..].to_string()));
            }
            other => {
                return Err(InputError::new(
                    lineno,
                    first_col,
                    format!("expected `var` or `rel`, found `{other}`"),
                ));
            }
        }
    }

    let ring = RingSpec::new(vars.iter().map(|(_, _, v)| v.clone()).collect()).map_err(|e| {
        // Attribute ring-level validation to the offending declaration.
        let position = vars
            .iter()
            .find(|(_, _, v)| e.to_string().contains(&format!("`{}`", v.name)))
            .map_or((1, 1), |&(l, c, _)| (l, c));
        InputError::new(position.0, position.1, e.to_string())
    })?;

    let graded = ring.is_graded();
    let mut relations = Vec::new();
    let mut rel_lines = Vec::new();
    for (lineno, col, expr) in raw_rels {
        let p = parse_polynomial(&ring, &expr).map_err(|e| {
            let e = e.offset(lineno - 1, col - 1);
            InputError::new(e.line, e.col, e.message)
        })?;
        if graded && p.inner_degree().is_none() {
            return Err(InputError::new(
                lineno,
                col,
                "relation is not homogeneous in the inner grading",
            ));
        }
        relations.push(p);
        rel_lines.push(lineno);
    }
    Ok(ParsedInput { ring, relations, rel_lines })
}

/// Renders a parsed input back into the text format. The output reparses to
/// a structurally identical [`ParsedInput`].
pub fn pretty_print(input: &ParsedInput) -> String {
    let mut out = String::new();
    for v in input.ring.vars() {
        let parity = match v.parity {
            Parity::Even => "even",
            Parity::Odd => "odd",
        };
        out.push_str(&format!("var {} {} inner={}", v.name, parity, v.inner));
        if v.bidegree.0 != 0 {
            out.push_str(&format!(" coh={}", v.bidegree.0));
        }
        out.push('\n');
    }
    for r in &input.relations {
        out.push_str(&format!("rel {r}\n"));
    }
    out
}
