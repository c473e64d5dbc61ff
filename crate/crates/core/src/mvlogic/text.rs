//! ASCII term syntax.
//!
//! ```text
//! term    := oplus
//! oplus   := wedge ("+" wedge)*
//! wedge   := odot ("&" odot)*
//! odot    := unary ("*" unary)*
//! unary   := "~" unary | primary
//! primary := "0" | "1" | "x[" int "]" | "x" | "y" | "z"
//!          | "d" int "(" term ")" | "(" term ")" | "@" int
//! ```
//!
//! Bare `x`, `y`, `z` abbreviate `x[0]`, `x[1]`, `x[2]`. A document may
//! start with `let @N = term;` bindings that later terms refer to as `@N`.
//! `#` starts a comment running to end of line.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use super::term::{Node, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parses a term, with optional leading `let` bindings.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        lets: HashMap::new(),
    };
    loop {
        p.skip_ws();
        if !p.peek_keyword("let") {
            break;
        }
        p.pos += 3;
        p.skip_ws();
        p.expect(b'@')?;
        let id = p.unsigned()?;
        p.skip_ws();
        p.expect(b'=')?;
        let t = p.term()?;
        p.skip_ws();
        p.expect(b';')?;
        if p.lets.insert(id, t).is_some() {
            return Err(p.error(format!("@{id} bound twice")));
        }
    }
    let t = p.term()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(t)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    lets: HashMap<u64, Term>,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        let end = self.pos + kw.len();
        self.src.get(self.pos..end) == Some(kw.as_bytes())
            && !self
                .src
                .get(end)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn unsigned(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError {
                pos: start,
                msg: "integer too large".into(),
            })
    }

    fn signed(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let neg = match self.src.get(self.pos) {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        self.skip_ws();
        let mag = self.unsigned()?;
        let too_large = || ParseError {
            pos: start,
            msg: "integer too large".into(),
        };
        let mag = i64::try_from(mag).map_err(|_| too_large())?;
        Ok(if neg { -mag } else { mag })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.wedge()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            acc = Term::oplus(acc, self.wedge()?);
        }
        Ok(acc)
    }

    fn wedge(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.odot()?;
        while self.peek() == Some(b'&') {
            self.pos += 1;
            acc = Term::wedge(acc, self.odot()?);
        }
        Ok(acc)
    }

    fn odot(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = Term::odot(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.peek() == Some(b'~') {
            self.pos += 1;
            return Ok(Term::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        let next_is_word = |p: &Self| {
            p.src
                .get(p.pos + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        };
        match c {
            b'0' | b'1' if !self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit) => {
                self.pos += 1;
                Ok(if c == b'0' { Term::zero() } else { Term::one() })
            }
            b'(' => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(t)
            }
            b'@' => {
                self.pos += 1;
                let at = self.pos;
                let id = self.unsigned()?;
                self.lets.get(&id).cloned().ok_or(ParseError {
                    pos: at,
                    msg: format!("@{id} is not bound"),
                })
            }
            b'x' if self.src.get(self.pos + 1) == Some(&b'[') => {
                self.pos += 2;
                let o = self.signed()?;
                self.expect(b']')?;
                Ok(Term::var(o))
            }
            b'x' | b'y' | b'z' if !next_is_word(self) => {
                self.pos += 1;
                Ok(Term::var(i64::from(c - b'x')))
            }
            b'd' if self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit) => {
                self.pos += 1;
                let at = self.pos;
                let i = self.unsigned()?;
                if i == 0 {
                    return Err(ParseError {
                        pos: at,
                        msg: "delta index must be positive".into(),
                    });
                }
                let i = u32::try_from(i).map_err(|_| ParseError {
                    pos: at,
                    msg: "delta index too large".into(),
                })?;
                self.expect(b'(')?;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(Term::delta(i, t))
            }
            _ => Err(self.error(format!("unexpected '{}'", c as char))),
        }
    }
}

/// Fully parenthesised canonical text. Shared subterms are written out at
/// every occurrence; see [`print_shared`] for large DAGs.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_inline(&mut out, t, &HashMap::new()).unwrap();
    out
}

/// Prints with every multiply-referenced compound subterm bound once by a
/// `let @N = ...;` line. The output parses back with [`parse_term`].
pub fn print_shared(t: &Term) -> String {
    let counts = t.reference_counts();
    let mut names = HashMap::new();
    let mut out = String::new();
    for node in t.topo_order() {
        let compound = !matches!(node.node(), Node::Zero | Node::Var(_));
        let is_root = node.ptr_eq(t);
        if compound && !is_root && counts.get(&node.node_key()).copied().unwrap_or(0) > 1 {
            let id = names.len();
            write!(out, "let @{id} = ").unwrap();
            write_inline(&mut out, &node, &names).unwrap();
            out.push_str(";\n");
            names.insert(node.node_key(), id);
        }
    }
    write_inline(&mut out, t, &names).unwrap();
    out
}

fn write_inline(
    out: &mut String,
    t: &Term,
    names: &HashMap<*const Node, usize>,
) -> fmt::Result {
    if let Some(id) = names.get(&t.node_key()) {
        return write!(out, "@{id}");
    }
    match t.node() {
        Node::Zero => out.write_str("0"),
        Node::Var(o) => write!(out, "x[{o}]"),
        Node::Not(c) => {
            out.push('~');
            write_inline(out, c, names)
        }
        Node::Delta(i, c) => {
            write!(out, "d{i}(")?;
            write_inline(out, c, names)?;
            out.write_str(")")
        }
        Node::Oplus(a, b) | Node::Odot(a, b) => {
            let op = if matches!(t.node(), Node::Oplus(..)) { " + " } else { " * " };
            out.push('(');
            write_inline(out, a, names)?;
            out.push_str(op);
            write_inline(out, b, names)?;
            out.write_str(")")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl std::str::FromStr for Term {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_term(s)
    }
}
