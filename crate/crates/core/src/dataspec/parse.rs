//! Parser for the specification language.
//!
//! Precedence from loosest to tightest: `=>` (right associative), `|`, `&`, then the
//! prefix forms `!`, `[π]`, `<π>`. Paths: `+`, then `.`, then postfix `*`.

use super::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct SpecParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMS: [&str; 18] = ["=>", "!=", "<=", "(", ")", "[", "]", "<", ">", "!", "&", "|", "?", "+", ".", "*", "@", "="];

fn lex(src: &str) -> Result<Vec<Token>, SpecParseError> {
    let mut out = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut c = 0;
        while c < chars.len() {
            let ch = chars[c];
            if ch.is_whitespace() {
                c += 1;
                continue;
            }
            if ch.is_alphanumeric() || ch == '_' {
                let start = c;
                while c < chars.len() && (chars[c].is_alphanumeric() || chars[c] == '_' || chars[c] == '\'') {
                    c += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..c].iter().collect()), line: ln + 1, col: start + 1 });
                continue;
            }
            let rest: String = chars[c..].iter().take(2).collect();
            match SYMS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push(Token { tok: Tok::Sym(s), line: ln + 1, col: c + 1 });
                    c += s.len();
                }
                None => return Err(SpecParseError { line: ln + 1, col: c + 1, message: format!("unexpected character {ch:?}") }),
            }
        }
    }
    Ok(out)
}

const KEYWORDS: [&str; 12] = ["spec", "let", "assert", "exists", "marked", "true", "false", "eps", "left", "right", "up", "down"];

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    end: usize,
    defs: &'a [(String, Definition)],
}

type PResult<T> = Result<T, SpecParseError>;

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (line, col) = match self.toks.get(self.pos.min(self.end)) {
            Some(t) if self.pos < self.end => (t.line, t.col),
            _ => self.toks.get(self.end.saturating_sub(1)).map_or((1, 1), |t| (t.line, t.col + 1)),
        };
        Err(SpecParseError { line, col, message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        if self.pos < self.end {
            Some(&self.toks[self.pos].tok)
        } else {
            None
        }
    }

    fn peek_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.peek_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn def(&self, name: &str) -> Option<&'a Definition> {
        self.defs.iter().rev().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    fn local(&mut self) -> PResult<DLocal> {
        let lhs = self.disj()?;
        if self.eat_sym("=>") {
            let rhs = self.local()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<DLocal> {
        let mut f = self.conj()?;
        while self.eat_sym("|") {
            f = f.or(self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> PResult<DLocal> {
        let mut f = self.unary()?;
        while self.eat_sym("&") {
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<DLocal> {
        if self.eat_sym("!") {
            return Ok(self.unary()?.not());
        }
        if self.eat_sym("[") {
            let p = self.path()?;
            self.expect_sym("]")?;
            return Ok(DLocal::boxed(p, self.unary()?));
        }
        if self.eat_sym("<") {
            let p = self.path()?;
            self.expect_sym(">")?;
            return Ok(DLocal::diamond(p, self.unary()?));
        }
        if self.eat_sym("(") {
            let f = self.local()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        let name = self.ident()?;
        match name.as_str() {
            "marked" => Ok(DLocal::Marked),
            "true" => Ok(DLocal::true_()),
            "false" => Ok(DLocal::false_()),
            "exists" => self.guard(),
            k if KEYWORDS.contains(&k) => {
                self.pos -= 1;
                self.err(format!("`{k}` cannot start a formula"))
            }
            _ => match self.def(&name) {
                Some(Definition::Local(f)) => Ok(f.clone()),
                Some(Definition::Path(_)) => {
                    self.pos -= 1;
                    self.err(format!("`{name}` names a path, not a formula"))
                }
                None => Ok(DLocal::State(name)),
            },
        }
    }

    fn guard(&mut self) -> PResult<DLocal> {
        let r1 = self.ident()?;
        self.expect_sym("@")?;
        let p1 = self.path()?;
        let cmp = if self.eat_sym("=") {
            GuardCmp::Eq
        } else if self.eat_sym("!=") {
            GuardCmp::Ne
        } else if self.eat_sym("<=") {
            GuardCmp::Le
        } else if self.eat_sym("<") {
            GuardCmp::Lt
        } else {
            return self.err("expected one of `=`, `!=`, `<`, `<=`");
        };
        let r2 = self.ident()?;
        self.expect_sym("@")?;
        let p2 = self.path()?;
        Ok(DLocal::Guard { r1, p1, cmp, r2, p2 })
    }

    fn path(&mut self) -> PResult<DPath> {
        let mut p = self.seq()?;
        while self.eat_sym("+") {
            p = p.union(self.seq()?);
        }
        Ok(p)
    }

    fn seq(&mut self) -> PResult<DPath> {
        let mut p = self.postfix()?;
        while self.eat_sym(".") {
            p = p.then(self.postfix()?);
        }
        Ok(p)
    }

    fn postfix(&mut self) -> PResult<DPath> {
        let mut p = self.path_atom()?;
        while self.eat_sym("*") {
            p = p.star();
        }
        Ok(p)
    }

    fn path_atom(&mut self) -> PResult<DPath> {
        if self.eat_sym("?") {
            return Ok(DPath::test(self.unary()?));
        }
        if self.eat_sym("(") {
            let p = self.path()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        let name = self.ident()?;
        let d = match name.as_str() {
            "eps" => Dir::Eps,
            "left" => Dir::Left,
            "right" => Dir::Right,
            "up" => Dir::Up,
            "down" => Dir::Down,
            _ => {
                return match self.def(&name) {
                    Some(Definition::Path(p)) => Ok(p.clone()),
                    _ => {
                        self.pos -= 1;
                        self.err(format!("`{name}` is not a path"))
                    }
                }
            }
        };
        Ok(DPath::Step(d))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.end
    }
}

fn is_kw(t: &Token, kw: &str) -> bool {
    matches!(&t.tok, Tok::Ident(s) if s == kw)
}

/// Parses a specification file.
pub fn parse_spec(src: &str) -> Result<Spec, SpecParseError> {
    let toks = lex(src)?;
    let err = |t: Option<&Token>, m: String| {
        let (line, col) = t.map_or((1, 1), |t| (t.line, t.col));
        Err(SpecParseError { line, col, message: m })
    };
    if toks.is_empty() || !is_kw(&toks[0], "spec") {
        return err(toks.first(), "a specification starts with `spec NAME`".into());
    }
    let name = match toks.get(1) {
        Some(Token { tok: Tok::Ident(n), .. }) => n.clone(),
        t => return err(t, "expected specification name".into()),
    };
    // Statement boundaries: every `let` and `assert` keyword.
    let starts: Vec<usize> = (2..toks.len()).filter(|&i| is_kw(&toks[i], "let") || is_kw(&toks[i], "assert")).collect();
    if starts.first() != Some(&2) && toks.len() > 2 {
        return err(toks.get(2), "expected `let` or `assert`".into());
    }
    let mut defs: Vec<(String, Definition)> = Vec::new();
    let mut body = None;
    for (si, &s) in starts.iter().enumerate() {
        let end = starts.get(si + 1).copied().unwrap_or(toks.len());
        if is_kw(&toks[s], "assert") {
            if body.is_some() {
                return err(Some(&toks[s]), "only one `assert` is allowed".into());
            }
            let mut p = Parser { toks: &toks, pos: s + 1, end, defs: &defs };
            let f = p.local()?;
            if !p.at_end() {
                return p.err("unexpected token after formula");
            }
            body = Some(f);
            continue;
        }
        let dname = match toks.get(s + 1) {
            Some(Token { tok: Tok::Ident(n), .. }) if !KEYWORDS.contains(&n.as_str()) => n.clone(),
            t => return err(t, "expected definition name after `let`".into()),
        };
        match toks.get(s + 2) {
            Some(Token { tok: Tok::Sym("="), .. }) => {}
            t => return err(t, "expected `=`".into()),
        }
        let mut p = Parser { toks: &toks, pos: s + 3, end, defs: &defs };
        let as_local = p.local().ok().filter(|_| p.at_end());
        let def = match as_local {
            Some(f) => Definition::Local(f),
            None => {
                let mut p = Parser { toks: &toks, pos: s + 3, end, defs: &defs };
                match p.path() {
                    Ok(path) if p.at_end() => Definition::Path(path),
                    Ok(_) => return p.err("unexpected token after definition"),
                    Err(_) => {
                        // Report the error of the formula reading.
                        let mut p = Parser { toks: &toks, pos: s + 3, end, defs: &defs };
                        p.local()?;
                        return p.err("unexpected token after definition");
                    }
                }
            }
        };
        defs.push((dname, def));
    }
    let body = match body {
        Some(b) => b,
        None => return err(toks.last(), "missing `assert`".into()),
    };
    Ok(Spec { name, definitions: defs, body })
}

/// Parses a stand-alone path expression (no definitions in scope).
pub fn parse_path(src: &str) -> Result<DPath, SpecParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks: &toks, pos: 0, end: toks.len(), defs: &[] };
    let path = p.path()?;
    if !p.at_end() {
        return p.err("unexpected token after path");
    }
    Ok(path)
}
