//! Verifier reports and the line-oriented text parsing shared by all file formats.

use std::fmt;

use thiserror::Error;

/// Outcome of one verification. A failing report always carries a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    witnesses: Vec<String>,
    notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport { name: name.into(), witnesses: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn fail(&mut self, witness: impl Into<String>) {
        self.witnesses.push(witness.into());
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Failure witnesses first, then informational notes.
    pub fn details(&self) -> impl Iterator<Item = &str> {
        self.witnesses.iter().chain(&self.notes).map(String::as_str)
    }

    pub fn witnesses(&self) -> &[String] {
        &self.witnesses
    }

    /// Folds another report's findings into this one, prefixed by its name.
    pub fn absorb(&mut self, other: &CheckReport) {
        for w in &other.witnesses {
            self.witnesses.push(format!("{}: {w}", other.name));
        }
        for n in &other.notes {
            self.notes.push(format!("{}: {n}", other.name));
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "CHECK {} {}", self.name, verdict)?;
        if let Some(d) = self.details().next() {
            write!(f, " {d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Non-empty lines with 1-based line numbers.
pub(crate) struct LineReader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> LineReader<'a> {
    pub fn new(text: &'a str) -> Self {
        LineReader { lines: text.lines().enumerate().peekable(), last: 0 }
    }

    fn skip_blank(&mut self) {
        while let Some((_, l)) = self.lines.peek() {
            if l.trim().is_empty() {
                self.lines.next();
            } else {
                break;
            }
        }
    }

    pub fn next_line(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_blank();
        match self.lines.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim()))
            }
            None => Err(self.error_here("unexpected end of input")),
        }
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_blank();
        self.lines.peek().is_none()
    }

    pub fn error_here(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.last + 1, message: message.into() }
    }
}

pub(crate) fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

/// Parses `key=value` from a token.
pub(crate) fn keyed<T: std::str::FromStr>(line: usize, tok: Option<&str>, key: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {key}=")))?;
    let v = tok
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| err(line, format!("expected {key}=, found `{tok}`")))?;
    v.parse().map_err(|_| err(line, format!("bad value for {key}: `{v}`")))
}

pub(crate) fn int_row(line: usize, text: &str, len: usize, bound: u32) -> Result<Vec<u32>, ParseError> {
    let row: Vec<u32> = text
        .split_whitespace()
        .map(|t| t.parse::<u32>().map_err(|_| err(line, format!("not an integer: `{t}`"))))
        .collect::<Result<_, _>>()?;
    if row.len() != len {
        return Err(err(line, format!("expected {len} entries, found {}", row.len())));
    }
    if let Some(v) = row.iter().find(|&&v| v >= bound) {
        return Err(err(line, format!("entry {v} out of range [0, {bound})")));
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_report_shows_witness() {
        let mut r = CheckReport::new("demo");
        r.note("looked at 3 things");
        assert!(r.passed());
        assert_eq!(r.to_string(), "CHECK demo PASS looked at 3 things");
        r.fail("thing 2 broken");
        assert!(!r.passed());
        assert_eq!(r.to_string(), "CHECK demo FAIL thing 2 broken");
    }

    #[test]
    fn reader_tracks_lines() {
        let mut rd = LineReader::new("A\n\nB x=3\n");
        assert_eq!(rd.next_line().unwrap(), (1, "A"));
        let (ln, l) = rd.next_line().unwrap();
        assert_eq!(ln, 3);
        assert_eq!(keyed::<u32>(ln, l.split_whitespace().nth(1), "x").unwrap(), 3);
        assert!(rd.at_end());
        assert_eq!(rd.next_line().unwrap_err().line, 4);
    }
}
