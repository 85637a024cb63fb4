//! Plain-text tensor dumps.
//!
//! ```text
//! rank=3, layout=alt-lex
//! 0 1 2 0.5
//! 0 1 3 -1.25
//! ```
//! `rowmajor` lists every component of a dense tensor; `alt-lex` lists the
//! increasing multi-indices of a compressed form. Values use Rust's
//! shortest round-trip formatting, so dumps read back bit-exactly.

use crate::form::{multi_indices, AltForm};
use crate::tensor::{decode, Tensor};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DumpError {
    #[error("missing or malformed header")]
    Header,
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("expected {expected} components, found {found}")]
    Count { expected: usize, found: usize },
}

pub fn dump_dense(t: &Tensor) -> String {
    let mut s = format!("rank={}, layout=rowmajor\n", t.rank());
    let mut idx = vec![0usize; t.rank()];
    for (off, v) in t.data().iter().enumerate() {
        decode(off, &mut idx);
        for i in &idx {
            let _ = write!(s, "{i} ");
        }
        let _ = writeln!(s, "{v:?}");
    }
    s
}

pub fn dump_form(w: &AltForm) -> String {
    let mut s = format!("rank={}, layout=alt-lex\n", w.degree());
    for (idx, v) in multi_indices(w.degree()).iter().zip(w.comp()) {
        for i in idx {
            let _ = write!(s, "{i} ");
        }
        let _ = writeln!(s, "{v:?}");
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dump {
    Dense(Tensor),
    Form(AltForm),
}

pub fn parse_dump(text: &str) -> Result<Dump, DumpError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(DumpError::Header)?;
    let mut rank = None;
    let mut layout = None;
    for part in header.split(',') {
        match part.trim().split_once('=') {
            Some(("rank", r)) => rank = r.trim().parse::<usize>().ok(),
            Some(("layout", l)) => layout = Some(l.trim().to_string()),
            _ => return Err(DumpError::Header),
        }
    }
    let rank = rank.filter(|r| *r <= 8).ok_or(DumpError::Header)?;
    let mut entries = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| DumpError::Line { line: n + 1, msg: msg.to_string() };
        if fields.len() != rank + 1 {
            return Err(bad("wrong field count"));
        }
        let idx: Vec<usize> = fields[..rank]
            .iter()
            .map(|f| f.parse::<usize>().ok().filter(|i| *i < 8))
            .collect::<Option<_>>()
            .ok_or_else(|| bad("bad index"))?;
        let v: f64 = fields[rank].parse().map_err(|_| bad("bad value"))?;
        entries.push((idx, v));
    }
    match layout.as_deref() {
        Some("rowmajor") => {
            let mut t = Tensor::zeros(rank);
            if entries.len() != t.data().len() {
                return Err(DumpError::Count { expected: t.data().len(), found: entries.len() });
            }
            for (idx, v) in entries {
                t.set(&idx, v);
            }
            Ok(Dump::Dense(t))
        }
        Some("alt-lex") => {
            let mut w = AltForm::zeros(rank);
            if entries.len() != w.comp().len() {
                return Err(DumpError::Count { expected: w.comp().len(), found: entries.len() });
            }
            for (n, (idx, v)) in entries.into_iter().enumerate() {
                if idx != multi_indices(rank)[n] {
                    return Err(DumpError::Line { line: n + 2, msg: "indices out of order".into() });
                }
                w.comp_mut()[n] = v;
            }
            Ok(Dump::Form(w))
        }
        _ => Err(DumpError::Header),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_form;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let w = random_form(3, &mut rng);
        assert_eq!(parse_dump(&dump_form(&w)).unwrap(), Dump::Form(w.clone()));
        let t = w.expand();
        assert_eq!(parse_dump(&dump_dense(&t)).unwrap(), Dump::Dense(t));
        assert!(dump_form(&w).starts_with("rank=3, layout=alt-lex\n0 1 2 "));
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse_dump(""), Err(DumpError::Header));
        assert_eq!(parse_dump("rank=1, layout=alt-lex\n0 1.0\n"), Err(DumpError::Count { expected: 8, found: 1 }));
        assert!(parse_dump("rank=1, layout=alt-lex\n9 1.0\n").is_err());
    }
}
