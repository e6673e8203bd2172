//! Reader and writer for the discrete subset of the BIF interchange format.
//!
//! Supported blocks are `network`, `variable` (with `type discrete`) and
//! `probability`, whose body is either a `table` or one row per parent
//! configuration. `property` statements and C-style comments are skipped.
//!
//! A `table` for a node with parents lists the child level slowest and the
//! last parent fastest.

use std::collections::HashMap;
use std::fmt::Write as _;

use bnci_core::{BayesNet, Variable};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

const PUNCT: &[u8] = b"{}()[],;|";

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src: src.as_bytes(), pos: 0, line: 1 }
    }

    fn skip_trivia(&mut self) -> Result<()> {
        loop {
            match self.src.get(self.pos) {
                Some(b'\n') => {
                    self.line += 1;
                    self.pos += 1;
                }
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'*') => {
                    let start = self.line;
                    self.pos += 2;
                    loop {
                        match self.src.get(self.pos) {
                            None => return Err(Error::parse(start, "unterminated comment")),
                            Some(b'*') if self.src.get(self.pos + 1) == Some(&b'/') => {
                                self.pos += 2;
                                break;
                            }
                            Some(b'\n') => {
                                self.line += 1;
                                self.pos += 1;
                            }
                            _ => self.pos += 1,
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next(&mut self) -> Result<Option<(Tok, usize)>> {
        self.skip_trivia()?;
        let line = self.line;
        let Some(&c) = self.src.get(self.pos) else { return Ok(None) };
        if PUNCT.contains(&c) {
            self.pos += 1;
            return Ok(Some((Tok::Punct(c as char), line)));
        }
        if c == b'"' {
            let start = self.pos + 1;
            let mut end = start;
            while end < self.src.len() && self.src[end] != b'"' {
                if self.src[end] == b'\n' {
                    return Err(Error::parse(line, "unterminated string"));
                }
                end += 1;
            }
            if end == self.src.len() {
                return Err(Error::parse(line, "unterminated string"));
            }
            self.pos = end + 1;
            let word = String::from_utf8_lossy(&self.src[start..end]).into_owned();
            return Ok(Some((Tok::Word(word), line)));
        }
        let start = self.pos;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_whitespace() || PUNCT.contains(&c) || c == b'"' {
                break;
            }
            self.pos += 1;
        }
        let word = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        Ok(Some((Tok::Word(word), line)))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    peeked: Option<(Tok, usize)>,
    line: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { lex: Lexer::new(src), peeked: None, line: 1 }
    }

    fn peek(&mut self) -> Result<Option<&Tok>> {
        if self.peeked.is_none() {
            self.peeked = self.lex.next()?;
        }
        Ok(self.peeked.as_ref().map(|(t, _)| t))
    }

    fn bump(&mut self) -> Result<Tok> {
        self.peek()?;
        match self.peeked.take() {
            Some((t, line)) => {
                self.line = line;
                Ok(t)
            }
            None => Err(Error::parse(self.lex.line, "unexpected end of input")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, msg)
    }

    fn word(&mut self) -> Result<String> {
        match self.bump()? {
            Tok::Word(w) => Ok(w),
            Tok::Punct(c) => Err(self.err(format!("expected a name, found '{c}'"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let w = self.word()?;
        if w == kw {
            Ok(())
        } else {
            Err(self.err(format!("expected '{kw}', found '{w}'")))
        }
    }

    fn punct(&mut self, c: char) -> Result<()> {
        match self.bump()? {
            Tok::Punct(p) if p == c => Ok(()),
            Tok::Punct(p) => Err(self.err(format!("expected '{c}', found '{p}'"))),
            Tok::Word(w) => Err(self.err(format!("expected '{c}', found '{w}'"))),
        }
    }

    fn eat(&mut self, c: char) -> Result<bool> {
        if self.peek()? == Some(&Tok::Punct(c)) {
            self.bump()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn number(&mut self) -> Result<f64> {
        let w = self.word()?;
        w.parse().map_err(|_| self.err(format!("expected a number, found '{w}'")))
    }

    /// Skips the rest of a statement up to and including `;`.
    fn skip_statement(&mut self) -> Result<()> {
        while !matches!(self.bump()?, Tok::Punct(';')) {}
        Ok(())
    }

    /// Comma-separated names up to `close`.
    fn names_until(&mut self, close: char) -> Result<Vec<String>> {
        let mut out = Vec::new();
        if self.eat(close)? {
            return Ok(out);
        }
        loop {
            out.push(self.word()?);
            if self.eat(close)? {
                return Ok(out);
            }
            self.punct(',')?;
        }
    }

    /// Numbers separated by optional commas, ending at `;`.
    fn numbers(&mut self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        loop {
            if self.eat(';')? {
                return Ok(out);
            }
            if !out.is_empty() {
                self.eat(',')?;
            }
            out.push(self.number()?);
        }
    }
}

struct Block {
    child: String,
    parents: Vec<String>,
    line: usize,
    table: Option<Vec<f64>>,
    rows: Vec<(Vec<String>, Vec<f64>, usize)>,
    default: Option<Vec<f64>>,
}

/// Parses BIF text into a network.
pub fn parse_bif(text: &str) -> Result<BayesNet> {
    let mut p = Parser::new(text);
    let mut name = String::from("unknown");
    let mut variables: Vec<Variable> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut blocks: Vec<Block> = Vec::new();

    while p.peek()?.is_some() {
        let kw = p.word()?;
        match kw.as_str() {
            "network" => {
                name = p.word()?;
                p.punct('{')?;
                while !p.eat('}')? {
                    p.skip_statement()?;
                }
            }
            "variable" => {
                let vname = p.word()?;
                let line = p.line;
                p.punct('{')?;
                let mut levels = None;
                while !p.eat('}')? {
                    let stmt = p.word()?;
                    if stmt != "type" {
                        p.skip_statement()?;
                        continue;
                    }
                    p.keyword("discrete")?;
                    p.punct('[')?;
                    let count: usize = {
                        let w = p.word()?;
                        w.parse().map_err(|_| p.err(format!("bad level count '{w}'")))?
                    };
                    p.punct(']')?;
                    p.punct('{')?;
                    let names = p.names_until('}')?;
                    p.punct(';')?;
                    if names.len() != count {
                        return Err(p.err(format!(
                            "{vname} declares {count} levels but lists {}",
                            names.len()
                        )));
                    }
                    levels = Some(names);
                }
                let levels = levels.ok_or_else(|| Error::parse(line, format!("{vname} has no type")))?;
                if index.insert(vname.clone(), variables.len()).is_some() {
                    return Err(Error::parse(line, format!("variable {vname} declared twice")));
                }
                variables.push(Variable::new(vname, levels)?);
            }
            "probability" => {
                p.punct('(')?;
                let line = p.line;
                let child = p.word()?;
                let parents = if p.eat('|')? {
                    p.names_until(')')?
                } else {
                    p.punct(')')?;
                    Vec::new()
                };
                let mut block = Block { child, parents, line, table: None, rows: Vec::new(), default: None };
                p.punct('{')?;
                while !p.eat('}')? {
                    if p.eat('(')? {
                        let row_line = p.line;
                        let levels = p.names_until(')')?;
                        let values = p.numbers()?;
                        block.rows.push((levels, values, row_line));
                        continue;
                    }
                    let stmt = p.word()?;
                    match stmt.as_str() {
                        "table" => block.table = Some(p.numbers()?),
                        "default" => block.default = Some(p.numbers()?),
                        _ => p.skip_statement()?,
                    }
                }
                blocks.push(block);
            }
            other => return Err(p.err(format!("unexpected '{other}'"))),
        }
    }

    if variables.is_empty() {
        return Err(Error::parse(1, "no variables declared"));
    }
    let mut tables: Vec<Option<(Vec<usize>, Vec<f64>)>> = vec![None; variables.len()];
    for b in blocks {
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::parse(b.line, format!("undeclared variable {n}")))
        };
        let child = lookup(&b.child)?;
        let parents: Vec<usize> = b.parents.iter().map(|n| lookup(n)).collect::<Result<_>>()?;
        if tables[child].is_some() {
            return Err(Error::parse(b.line, format!("second probability block for {}", b.child)));
        }
        let r = variables[child].cardinality();
        let cards: Vec<usize> = parents.iter().map(|&v| variables[v].cardinality()).collect();
        let q: usize = cards.iter().product();
        let mut probs = vec![f64::NAN; q * r];
        if let Some(d) = &b.default {
            if d.len() != r {
                return Err(Error::parse(b.line, format!("default row for {} has wrong length", b.child)));
            }
            for row in probs.chunks_mut(r) {
                row.copy_from_slice(d);
            }
        }
        if let Some(t) = &b.table {
            if t.len() != q * r {
                return Err(Error::parse(
                    b.line,
                    format!("{} table has {} entries, expected {}", b.child, t.len(), q * r),
                ));
            }
            for k in 0..r {
                for j in 0..q {
                    probs[j * r + k] = t[k * q + j];
                }
            }
        }
        for (levels, values, line) in &b.rows {
            if levels.len() != parents.len() || values.len() != r {
                return Err(Error::parse(*line, format!("malformed row for {}", b.child)));
            }
            let mut config = 0;
            for (l, &pv) in levels.iter().zip(&parents) {
                let li = variables[pv]
                    .level_index(l)
                    .ok_or_else(|| Error::parse(*line, format!("unknown level {l} of {}", variables[pv].name)))?;
                config = config * variables[pv].cardinality() + li;
            }
            probs[config * r..(config + 1) * r].copy_from_slice(values);
        }
        if probs.iter().any(|x| x.is_nan()) {
            return Err(Error::parse(b.line, format!("incomplete probability table for {}", b.child)));
        }
        tables[child] = Some((parents, probs));
    }
    let tables = tables
        .into_iter()
        .enumerate()
        .map(|(v, t)| t.ok_or_else(|| Error::Format(format!("no probability block for {}", variables[v].name))))
        .collect::<Result<Vec<_>>>()?;
    Ok(BayesNet::new(name, variables, tables)?)
}

fn ident(name: &str) -> String {
    let plain = !name.is_empty()
        && name.bytes().all(|c| !c.is_ascii_whitespace() && !PUNCT.contains(&c) && c != b'"');
    if plain {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

/// Probability printed with ten significant digits.
fn prob(x: f64) -> String {
    let rounded: f64 = format!("{x:.9e}").parse().unwrap_or(x);
    format!("{rounded}")
}

/// Writes a network as BIF. Nodes with parents get one row per configuration.
pub fn emit_bif(net: &BayesNet) -> String {
    let mut out = String::new();
    let vars = net.variables();
    let _ = writeln!(out, "network {} {{\n}}", ident(net.name()));
    for v in vars {
        let levels: Vec<String> = v.levels.iter().map(|l| ident(l)).collect();
        let _ = writeln!(
            out,
            "variable {} {{\n  type discrete [ {} ] {{ {} }};\n}}",
            ident(&v.name),
            v.cardinality(),
            levels.join(", ")
        );
    }
    for (i, v) in vars.iter().enumerate() {
        let cpt = net.cpt(i);
        let row = |c: usize| cpt.row(c).iter().map(|&x| prob(x)).collect::<Vec<_>>().join(", ");
        if cpt.parents().is_empty() {
            let _ = writeln!(out, "probability ( {} ) {{\n  table {};\n}}", ident(&v.name), row(0));
            continue;
        }
        let parents: Vec<String> = cpt.parents().iter().map(|&p| ident(&vars[p].name)).collect();
        let _ = writeln!(out, "probability ( {} | {} ) {{", ident(&v.name), parents.join(", "));
        for c in 0..cpt.configs() {
            let labels: Vec<String> = cpt
                .config_levels(c)
                .iter()
                .zip(cpt.parents())
                .map(|(&l, &p)| ident(&vars[p].levels[l]))
                .collect();
            let _ = writeln!(out, "  ({}) {};", labels.join(", "), row(c));
        }
        let _ = writeln!(out, "}}");
    }
    out
}
