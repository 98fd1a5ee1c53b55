//! Structured text reports: one `key = value` per line, blocks separated by
//! blank lines.

use std::fmt;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Block {
    pub entries: Vec<(String, String)>,
}

impl Block {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append an entry. Newlines in the value are flattened so the entry
    /// stays on one line.
    pub fn push(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        let value = value.to_string().replace(['\n', '\r'], " ").trim().to_string();
        self.entries.push((key.to_string(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub blocks: Vec<Block>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_block(&mut self, block: Block) -> &mut Self {
        self.blocks.push(block);
        self
    }

    /// First value stored under `key` in any block.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.blocks.iter().find_map(|b| b.get(key))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, block) in self.blocks.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            for (key, value) in &block.entries {
                if value.is_empty() {
                    writeln!(f, "{key} =")?;
                } else {
                    writeln!(f, "{key} = {value}")?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Report {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let mut report = Report::new();
        let mut current = Block::new();
        for (k, line) in s.lines().enumerate() {
            if line.trim().is_empty() {
                if !current.entries.is_empty() {
                    report.blocks.push(std::mem::take(&mut current));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(format!("report line {}: no '=' in {line:?}", k + 1)));
            };
            current.push(key.trim(), value.trim());
        }
        if !current.entries.is_empty() {
            report.blocks.push(current);
        }
        Ok(report)
    }
}

/// Predicted or measured value of a claim.
#[derive(Debug, Clone, PartialEq)]
pub enum ClaimValue {
    Number(f64),
    Text(String),
}

impl ClaimValue {
    /// A number, or a text marker when it is NaN (which would not compare equal).
    pub fn number(x: f64) -> Self {
        if x.is_nan() {
            ClaimValue::Text("undefined".into())
        } else {
            ClaimValue::Number(x)
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        ClaimValue::Text(s.into().replace(['\n', '\r'], " ").trim().to_string())
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            ClaimValue::Number(x) => Some(*x),
            ClaimValue::Text(_) => None,
        }
    }
}

impl fmt::Display for ClaimValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClaimValue::Number(x) => write!(f, "{x}"),
            ClaimValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<&str> for ClaimValue {
    fn from(s: &str) -> Self {
        match s.parse::<f64>() {
            Ok(x) if !x.is_nan() => ClaimValue::Number(x),
            _ => ClaimValue::Text(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim {
    /// E.g. `Thm1.iii.exponent[m=2,p=0.5,q=1]`.
    pub id: String,
    pub predicted: ClaimValue,
    pub measured: ClaimValue,
    /// Absolute tolerance for numeric claims.
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub note: String,
}

impl Claim {
    /// Numeric claim that passes when `|measured - predicted| <= tolerance`.
    pub fn numeric(id: String, predicted: f64, measured: f64, tolerance: f64) -> Self {
        let pass = (measured - predicted).abs() <= tolerance;
        Claim {
            id,
            predicted: ClaimValue::number(predicted),
            measured: ClaimValue::number(measured),
            tolerance: Some(tolerance),
            pass,
            note: String::new(),
        }
    }

    /// Textual claim that passes when both sides agree.
    pub fn textual(id: String, predicted: impl Into<String>, measured: impl Into<String>) -> Self {
        let predicted = ClaimValue::text(predicted);
        let measured = ClaimValue::text(measured);
        Claim {
            id,
            pass: predicted == measured,
            predicted,
            measured,
            tolerance: None,
            note: String::new(),
        }
    }

    /// Claim that could not be measured.
    pub fn failed(id: String, predicted: ClaimValue, reason: impl fmt::Display) -> Self {
        Claim {
            id,
            predicted,
            measured: ClaimValue::text("error"),
            tolerance: None,
            pass: false,
            note: reason.to_string().replace(['\n', '\r'], " ").trim().to_string(),
        }
    }

    pub fn with_note(mut self, note: impl fmt::Display) -> Self {
        self.note = note.to_string().replace(['\n', '\r'], " ").trim().to_string();
        self
    }
}

/// Outcome of a reproduction run. Claims are kept sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproReport {
    pub claims: Vec<Claim>,
    pub overall: bool,
}

impl ReproReport {
    pub fn new(mut claims: Vec<Claim>) -> Self {
        claims.sort_by(|a, b| a.id.cmp(&b.id));
        let overall = !claims.is_empty() && claims.iter().all(|c| c.pass);
        Self { claims, overall }
    }

    pub fn to_report(&self) -> Report {
        let mut report = Report::new();
        let mut head = Block::new();
        head.push("overall", verdict(self.overall))
            .push("claims", self.claims.len())
            .push("failed", self.claims.iter().filter(|c| !c.pass).count());
        report.push_block(head);
        for c in &self.claims {
            let mut b = Block::new();
            b.push("id", &c.id)
                .push("predicted", &c.predicted)
                .push("measured", &c.measured);
            match c.tolerance {
                Some(t) => b.push("tolerance", t),
                None => b.push("tolerance", "none"),
            };
            b.push("result", verdict(c.pass));
            if !c.note.is_empty() {
                b.push("note", &c.note);
            }
            report.push_block(b);
        }
        report
    }

    pub fn from_report(report: &Report) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::config(format!("reproduction report: {msg}"));
        let mut blocks = report.blocks.iter();
        let head = blocks.next().ok_or_else(|| bad("empty".into()))?;
        let overall = parse_verdict(head.get("overall").ok_or_else(|| bad("no overall".into()))?)
            .ok_or_else(|| bad("overall is not pass/fail".into()))?;
        let mut claims = Vec::new();
        for b in blocks {
            let field = |key: &str| b.get(key).ok_or_else(|| bad(format!("claim without {key}")));
            let tolerance = match field("tolerance")? {
                "none" => None,
                t => Some(t.parse::<f64>().map_err(|_| bad(format!("tolerance {t:?}")))?),
            };
            claims.push(Claim {
                id: field("id")?.to_string(),
                predicted: ClaimValue::from(field("predicted")?),
                measured: ClaimValue::from(field("measured")?),
                tolerance,
                pass: parse_verdict(field("result")?).ok_or_else(|| bad("result is not pass/fail".into()))?,
                note: b.get("note").unwrap_or("").to_string(),
            });
        }
        Ok(Self { claims, overall })
    }
}

impl fmt::Display for ReproReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_report().fmt(f)
    }
}

impl FromStr for ReproReport {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::from_report(&s.parse()?)
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn parse_verdict(s: &str) -> Option<bool> {
    match s {
        "pass" => Some(true),
        "fail" => Some(false),
        _ => None,
    }
}
