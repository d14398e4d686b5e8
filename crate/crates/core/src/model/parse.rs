//! Parser for the algorithm description language.

use super::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, message: message.into() }
}

/// A logical item: a header line plus its continuation lines.
struct Item {
    line: usize,
    text: String,
}

const HEADERS: [&str; 5] = ["algorithm", "states:", "init:", "registers:", "trans"];

fn split_items(src: &str) -> Vec<Item> {
    let mut items: Vec<Item> = Vec::new();
    for (no, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let first = trimmed.split_whitespace().next().unwrap_or("");
        let is_header = HEADERS.iter().any(|h| first == *h || first.starts_with(h) && h.ends_with(':'));
        match items.last_mut() {
            Some(last) if !is_header => {
                last.text.push(' ');
                last.text.push_str(trimmed);
            }
            _ => items.push(Item { line: no + 1, text: trimmed.to_string() }),
        }
    }
    items
}

fn ident_ok(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

fn name_list(item: &Item, body: &str) -> Result<Vec<String>, ParseError> {
    let mut out = Vec::new();
    for part in body.split(',') {
        let p = part.trim();
        if !ident_ok(p) {
            return Err(syntax(item.line, 1, format!("expected identifier, found {p:?}")));
        }
        out.push(p.to_string());
    }
    Ok(out)
}

/// Parses and validates an algorithm description.
pub fn parse_algorithm(src: &str) -> Result<Algorithm, ParseError> {
    let items = split_items(src);
    let mut name = None;
    let mut states = None;
    let mut init = None;
    let mut registers = None;
    let mut raw_trans: Vec<&Item> = Vec::new();
    for item in &items {
        let t = item.text.as_str();
        if let Some(rest) = t.strip_prefix("algorithm") {
            let n = rest.trim();
            if !ident_ok(n) {
                return Err(syntax(item.line, 11, "expected algorithm name"));
            }
            name = Some(n.to_string());
        } else if let Some(rest) = t.strip_prefix("states:") {
            states = Some(name_list(item, rest)?);
        } else if let Some(rest) = t.strip_prefix("init:") {
            init = Some((item.line, rest.trim().to_string()));
        } else if let Some(rest) = t.strip_prefix("registers:") {
            registers = Some(name_list(item, rest)?);
        } else if t.starts_with("trans") {
            raw_trans.push(item);
        } else {
            return Err(syntax(item.line, 1, format!("unexpected text {t:?}")));
        }
    }
    let name = name.ok_or_else(|| syntax(1, 1, "missing `algorithm NAME` header"))?;
    let states = states.ok_or_else(|| syntax(1, 1, "missing `states:` declaration"))?;
    let registers = registers.ok_or_else(|| syntax(1, 1, "missing `registers:` declaration"))?;
    let (init_line, init) = init.ok_or_else(|| syntax(1, 1, "missing `init:` declaration"))?;
    let initial = states
        .iter()
        .position(|s| *s == init)
        .map(|i| StateId(i as u16))
        .ok_or_else(|| syntax(init_line, 7, format!("initial state {init} is not declared")))?;
    let mut algo = Algorithm { name, states, initial, registers, transitions: Vec::new() };
    for item in raw_trans {
        let t = parse_transition(&algo, item)?;
        algo.transitions.push(t);
    }
    algo.validate()?;
    Ok(algo)
}

fn parse_transition(algo: &Algorithm, item: &Item) -> Result<Transition, ParseError> {
    let text = item.text.strip_prefix("trans").unwrap_or(&item.text).trim_start();
    let err = |m: String| syntax(item.line, 1, m);
    let mut head = text.splitn(3, ':');
    let tname = head.next().unwrap_or("").trim().to_string();
    let src = head.next().map(str::trim).ok_or_else(|| err("expected `trans NAME: SOURCE: ...`".into()))?;
    let body = head.next().ok_or_else(|| err("expected `trans NAME: SOURCE: ...`".into()))?;
    if !ident_ok(&tname) {
        return Err(err(format!("bad transition name {tname:?}")));
    }
    let state = |n: &str| {
        algo.state(n).ok_or_else(|| {
            ParseError::from(ValidationError::UndeclaredIdentifier { transition: tname.clone(), name: n.to_string() })
        })
    };
    let reg = |n: &str| {
        algo.register(n).ok_or_else(|| {
            ParseError::from(ValidationError::UndeclaredIdentifier { transition: tname.clone(), name: n.to_string() })
        })
    };
    let source = state(src)?;
    let mut fwd = false;
    let (mut send_l, mut send_r, mut recv_l, mut recv_r) = (None, None, None, None);
    let mut guards = Vec::new();
    let mut updates = Vec::new();
    let mut target = None;
    for stmt in body.split(';') {
        let words: Vec<&str> = stmt.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let bad = || err(format!("transition {tname}: cannot parse statement {:?}", stmt.trim()));
        match words.as_slice() {
            ["skip"] => {}
            ["fwd"] => fwd = true,
            ["send", dir, r] | ["recv", dir, r] => {
                let slot = match (words[0], *dir) {
                    ("send", "left") => &mut send_l,
                    ("send", "right") => &mut send_r,
                    ("recv", "left") => &mut recv_l,
                    ("recv", "right") => &mut recv_r,
                    _ => return Err(bad()),
                };
                if slot.is_some() {
                    return Err(err(format!("transition {tname}: at most one {} per direction", words[0])));
                }
                *slot = Some(reg(r)?);
            }
            ["guard", rest @ ..] => {
                let joined = rest.join(" ");
                if joined.contains("<=") || joined.contains(">") {
                    return Err(err(format!(
                        "transition {tname}: only `<` and `=` guards exist; write `a <= b` as two transitions, one with `a < b` and one with `a = b`"
                    )));
                }
                let (l, op, r) = if let Some((l, r)) = joined.split_once('<') {
                    (l, Cmp::Lt, r)
                } else if let Some((l, r)) = joined.split_once('=') {
                    (l, Cmp::Eq, r)
                } else {
                    return Err(bad());
                };
                guards.push(Guard { lhs: reg(l.trim())?, cmp: op, rhs: reg(r.trim())? });
            }
            ["set", rest @ ..] => {
                let joined = rest.join(" ");
                let (l, r) = joined.split_once(":=").ok_or_else(bad)?;
                updates.push(Update { target: reg(l.trim())?, source: reg(r.trim())? });
            }
            ["goto", s] => {
                if target.is_some() {
                    return Err(err(format!("transition {tname}: more than one goto")));
                }
                target = Some(state(s)?);
            }
            _ => return Err(bad()),
        }
    }
    let target = target.ok_or_else(|| err(format!("transition {tname}: missing goto")))?;
    if fwd && (send_l.is_some() || send_r.is_some()) {
        return Err(err(format!("transition {tname}: fwd excludes send statements")));
    }
    let send = match (fwd, send_l, send_r) {
        (true, _, _) => Send::Fwd,
        (false, Some(a), Some(b)) => Send::Both(a, b),
        (false, Some(a), None) => Send::Left(a),
        (false, None, Some(b)) => Send::Right(b),
        (false, None, None) => Send::Skip,
    };
    let recv = match (recv_l, recv_r) {
        (Some(a), Some(b)) => Recv::Both(a, b),
        (Some(a), None) => Recv::Left(a),
        (None, Some(b)) => Recv::Right(b),
        (None, None) => Recv::Skip,
    };
    guards.sort();
    guards.dedup();
    updates.sort_by_key(|u: &Update| (u.target, u.source));
    Ok(Transition { name: tname, source, send, recv, guards, updates, target })
}
