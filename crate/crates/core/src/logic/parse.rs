//! Concrete syntax shared by both dialects.
//!
//! ```text
//! f ::= true | false | IDENT | $ | ~f | (f) | f & f | f | f | f -> f | f <-> f
//!     | prv f | prv^K f | f snc f | pdi f | pbx f          (PLTL)
//!     | next f | next^K f | f wun f | alw f                (FLTL)
//! ```
//! Precedence, tightest first: unary, `snc`/`wun` (right associative),
//! `&`, `|`, `->` (right associative), `<->`.

use super::{Dialect, Fltl, Formula, Pltl};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    True,
    False,
    Ident(String),
    Int(usize),
    Tilde,
    LParen,
    RParen,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Caret,
    Dollar,
    Prv,
    Snc,
    Pdi,
    Pbx,
    Next,
    Wun,
    Alw,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(k) => format!("`{k}`"),
            other => format!("`{}`", tok_text(other)),
        }
    }
}

fn tok_text(t: &Tok) -> &'static str {
    match t {
        Tok::True => "true",
        Tok::False => "false",
        Tok::Tilde => "~",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Amp => "&",
        Tok::Bar => "|",
        Tok::Arrow => "->",
        Tok::DArrow => "<->",
        Tok::Caret => "^",
        Tok::Dollar => "$",
        Tok::Prv => "prv",
        Tok::Snc => "snc",
        Tok::Pdi => "pdi",
        Tok::Pbx => "pbx",
        Tok::Next => "next",
        Tok::Wun => "wun",
        Tok::Alw => "alw",
        Tok::Ident(_) | Tok::Int(_) => "",
    }
}

type Pos = (usize, usize);

fn lex(text: &str, origin: Pos) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let (mut line, mut col) = origin;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = (line, col);
        let single = |t: Tok| Some((t, 1));
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '~' => single(Tok::Tilde),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '&' => single(Tok::Amp),
            '|' => single(Tok::Bar),
            '^' => single(Tok::Caret),
            '$' => single(Tok::Dollar),
            '-' if chars.get(i + 1) == Some(&'>') => Some((Tok::Arrow, 2)),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                Some((Tok::DArrow, 3))
            }
            c if c.is_ascii_digit() => {
                let end = (i..chars.len())
                    .find(|&j| !chars[j].is_ascii_digit())
                    .unwrap_or(chars.len());
                let s: String = chars[i..end].iter().collect();
                let k = s
                    .parse()
                    .map_err(|_| Error::parse(line, col, format!("bad integer `{s}`")))?;
                Some((Tok::Int(k), end - i))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let end = (i..chars.len())
                    .find(|&j| !(chars[j].is_ascii_alphanumeric() || chars[j] == '_'))
                    .unwrap_or(chars.len());
                let s: String = chars[i..end].iter().collect();
                let t = match s.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "prv" => Tok::Prv,
                    "snc" => Tok::Snc,
                    "pdi" => Tok::Pdi,
                    "pbx" => Tok::Pbx,
                    "next" => Tok::Next,
                    "wun" => Tok::Wun,
                    "alw" => Tok::Alw,
                    _ => Tok::Ident(s),
                };
                Some((t, end - i))
            }
            other => return Err(Error::parse(line, col, format!("unexpected character `{other}`"))),
        };
        let width = match tok {
            Some((t, w)) => {
                out.push((t, pos));
                w
            }
            None => 1,
        };
        i += width;
        col += width;
    }
    Ok(out)
}

/// Dialect-neutral syntax tree, carrying operator positions for errors.
#[derive(Clone, Debug)]
enum Raw {
    True,
    False,
    Atom(String),
    Dollar(Pos),
    Not(Box<Raw>, Pos),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Implies(Box<Raw>, Box<Raw>, Pos),
    Iff(Box<Raw>, Box<Raw>, Pos),
    Prv(usize, Box<Raw>, Pos),
    Snc(Box<Raw>, Box<Raw>, Pos),
    Pdi(Box<Raw>, Pos),
    Pbx(Box<Raw>, Pos),
    Next(usize, Box<Raw>, Pos),
    Wun(Box<Raw>, Box<Raw>, Pos),
    Alw(Box<Raw>, Pos),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, t: &Tok) -> Option<Pos> {
        if self.peek() == Some(t) {
            let p = self.pos();
            self.i += 1;
            Some(p)
        } else {
            None
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (l, c) = self.pos();
        Err(Error::parse(l, c, msg))
    }

    fn iff(&mut self) -> Result<Raw> {
        let mut lhs = self.implies()?;
        while let Some(p) = self.eat(&Tok::DArrow) {
            let rhs = self.operand("<->", Self::implies)?;
            lhs = Raw::Iff(Box::new(lhs), Box::new(rhs), p);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Raw> {
        let lhs = self.or()?;
        if let Some(p) = self.eat(&Tok::Arrow) {
            let rhs = self.operand("->", Self::implies)?;
            return Ok(Raw::Implies(Box::new(lhs), Box::new(rhs), p));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Raw> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Bar).is_some() {
            let rhs = self.operand("|", Self::and)?;
            lhs = Raw::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Raw> {
        let mut lhs = self.binary_temporal()?;
        while self.eat(&Tok::Amp).is_some() {
            let rhs = self.operand("&", Self::binary_temporal)?;
            lhs = Raw::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> Result<Raw> {
        let lhs = self.unary()?;
        if let Some(p) = self.eat(&Tok::Snc) {
            let rhs = self.operand("snc", Self::binary_temporal)?;
            return Ok(Raw::Snc(Box::new(lhs), Box::new(rhs), p));
        }
        if let Some(p) = self.eat(&Tok::Wun) {
            let rhs = self.operand("wun", Self::binary_temporal)?;
            return Ok(Raw::Wun(Box::new(lhs), Box::new(rhs), p));
        }
        Ok(lhs)
    }

    fn operand(&mut self, op: &str, next: fn(&mut Self) -> Result<Raw>) -> Result<Raw> {
        if self.peek().is_none() {
            return self.err(format!("missing right operand of `{op}`"));
        }
        next(self)
    }

    fn exponent(&mut self) -> Result<usize> {
        if self.eat(&Tok::Caret).is_some() {
            match self.peek().cloned() {
                Some(Tok::Int(k)) => {
                    self.i += 1;
                    Ok(k)
                }
                _ => self.err("expected integer after `^`"),
            }
        } else {
            Ok(1)
        }
    }

    fn unary(&mut self) -> Result<Raw> {
        let p = self.pos();
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of formula");
        };
        self.i += 1;
        Ok(match tok {
            Tok::True => Raw::True,
            Tok::False => Raw::False,
            Tok::Ident(s) => Raw::Atom(s),
            Tok::Dollar => Raw::Dollar(p),
            Tok::LParen => {
                let inner = self.iff()?;
                if self.eat(&Tok::RParen).is_none() {
                    return self.err("expected `)`");
                }
                inner
            }
            Tok::Tilde => Raw::Not(Box::new(self.operand("~", Self::unary)?), p),
            Tok::Prv => {
                let k = self.exponent()?;
                Raw::Prv(k, Box::new(self.operand("prv", Self::unary)?), p)
            }
            Tok::Next => {
                let k = self.exponent()?;
                Raw::Next(k, Box::new(self.operand("next", Self::unary)?), p)
            }
            Tok::Pdi => Raw::Pdi(Box::new(self.operand("pdi", Self::unary)?), p),
            Tok::Pbx => Raw::Pbx(Box::new(self.operand("pbx", Self::unary)?), p),
            Tok::Alw => Raw::Alw(Box::new(self.operand("alw", Self::unary)?), p),
            other => {
                self.i -= 1;
                return self.err(format!("unexpected {}", other.describe()));
            }
        })
    }
}

fn parse_raw(text: &str, origin: Pos) -> Result<Raw> {
    let toks = lex(text, origin)?;
    let end = match toks.last() {
        Some((t, (l, c))) => (*l, c + tok_len(t)),
        None => origin,
    };
    let mut p = Parser { toks, i: 0, end };
    let f = p.iff()?;
    if p.i < p.toks.len() {
        let t = p.toks[p.i].0.describe();
        return p.err(format!("unexpected {t} after formula"));
    }
    Ok(f)
}

fn tok_len(t: &Tok) -> usize {
    match t {
        Tok::Ident(s) => s.len(),
        Tok::Int(k) => k.to_string().len(),
        other => tok_text(other).len(),
    }
}

fn foreign(op: &str, pos: Pos, dialect: &str) -> Error {
    Error::parse(pos.0, pos.1, format!("`{op}` is not part of the {dialect} dialect"))
}

fn to_pltl(raw: &Raw) -> Result<Pltl> {
    Ok(match raw {
        Raw::True => Pltl::True,
        Raw::False => Pltl::False,
        Raw::Atom(a) => Pltl::atom(a.clone()),
        Raw::Not(a, _) => Pltl::not(to_pltl(a)?),
        Raw::And(a, b) => Pltl::and(to_pltl(a)?, to_pltl(b)?),
        Raw::Or(a, b) => Pltl::or(to_pltl(a)?, to_pltl(b)?),
        Raw::Implies(a, b, _) => Pltl::implies(to_pltl(a)?, to_pltl(b)?),
        Raw::Iff(a, b, _) => Pltl::iff(to_pltl(a)?, to_pltl(b)?),
        Raw::Prv(k, a, _) => Pltl::prev_n(*k, to_pltl(a)?),
        Raw::Snc(a, b, _) => Pltl::since(to_pltl(a)?, to_pltl(b)?),
        Raw::Pdi(a, _) => Pltl::once(to_pltl(a)?),
        Raw::Pbx(a, _) => Pltl::historically(to_pltl(a)?),
        Raw::Dollar(p) => return Err(foreign("$", *p, "PLTL")),
        Raw::Next(_, _, p) => return Err(foreign("next", *p, "PLTL")),
        Raw::Wun(_, _, p) => return Err(foreign("wun", *p, "PLTL")),
        Raw::Alw(_, p) => return Err(foreign("alw", *p, "PLTL")),
    })
}

/// First temporal or reward operator inside a subtree, if any.
fn first_temporal(raw: &Raw) -> Option<(&'static str, Pos)> {
    match raw {
        Raw::True | Raw::False | Raw::Atom(_) => None,
        Raw::Dollar(p) => Some(("$", *p)),
        Raw::Next(_, _, p) => Some(("next", *p)),
        Raw::Wun(_, _, p) => Some(("wun", *p)),
        Raw::Alw(_, p) => Some(("alw", *p)),
        Raw::Prv(_, _, p) => Some(("prv", *p)),
        Raw::Snc(_, _, p) => Some(("snc", *p)),
        Raw::Pdi(_, p) => Some(("pdi", *p)),
        Raw::Pbx(_, p) => Some(("pbx", *p)),
        Raw::Not(a, _) => first_temporal(a),
        Raw::And(a, b) | Raw::Or(a, b) | Raw::Implies(a, b, _) | Raw::Iff(a, b, _) => {
            first_temporal(a).or_else(|| first_temporal(b))
        }
    }
}

fn require_propositional(raw: &Raw, context: &str, at: Pos) -> Result<()> {
    if let Some((op, p)) = first_temporal(raw) {
        return Err(Error::parse(
            p.0,
            p.1,
            format!("`{op}` cannot appear under {context} (at {}:{}); write the formula in negation normal form", at.0, at.1),
        ));
    }
    Ok(())
}

/// Converts to negation normal form; `neg` is only ever set on propositional
/// subtrees.
fn to_fltl(raw: &Raw, neg: bool) -> Result<Fltl> {
    Ok(match raw {
        Raw::True => if neg { Fltl::False } else { Fltl::True },
        Raw::False => if neg { Fltl::True } else { Fltl::False },
        Raw::Atom(a) => Fltl::lit(a.clone(), !neg),
        Raw::Not(a, p) => {
            require_propositional(a, "negation", *p)?;
            to_fltl(a, !neg)?
        }
        Raw::And(a, b) if neg => Fltl::or(to_fltl(a, true)?, to_fltl(b, true)?),
        Raw::Or(a, b) if neg => Fltl::and(to_fltl(a, true)?, to_fltl(b, true)?),
        Raw::And(a, b) => Fltl::and(to_fltl(a, false)?, to_fltl(b, false)?),
        Raw::Or(a, b) => Fltl::or(to_fltl(a, false)?, to_fltl(b, false)?),
        Raw::Implies(a, b, p) => {
            require_propositional(a, "the antecedent of `->`", *p)?;
            if neg {
                Fltl::and(to_fltl(a, false)?, to_fltl(b, true)?)
            } else {
                Fltl::or(to_fltl(a, true)?, to_fltl(b, false)?)
            }
        }
        Raw::Iff(a, b, p) => {
            require_propositional(a, "`<->`", *p)?;
            require_propositional(b, "`<->`", *p)?;
            let pos = Fltl::or(
                Fltl::and(to_fltl(a, false)?, to_fltl(b, false)?),
                Fltl::and(to_fltl(a, true)?, to_fltl(b, true)?),
            );
            if neg {
                Fltl::or(
                    Fltl::and(to_fltl(a, false)?, to_fltl(b, true)?),
                    Fltl::and(to_fltl(a, true)?, to_fltl(b, false)?),
                )
            } else {
                pos
            }
        }
        Raw::Dollar(_) => Fltl::Dollar,
        Raw::Next(k, a, _) => Fltl::next_n(*k, to_fltl(a, false)?),
        Raw::Wun(a, b, _) => Fltl::weak_until(to_fltl(a, false)?, to_fltl(b, false)?),
        Raw::Alw(a, _) => Fltl::always(to_fltl(a, false)?),
        Raw::Prv(_, _, p) => return Err(foreign("prv", *p, "FLTL")),
        Raw::Snc(_, _, p) => return Err(foreign("snc", *p, "FLTL")),
        Raw::Pdi(_, p) => return Err(foreign("pdi", *p, "FLTL")),
        Raw::Pbx(_, p) => return Err(foreign("pbx", *p, "FLTL")),
    })
}

pub(crate) fn parse_pltl_at(text: &str, origin: (usize, usize)) -> Result<Pltl> {
    to_pltl(&parse_raw(text, origin)?)
}

pub(crate) fn parse_fltl_at(text: &str, origin: (usize, usize)) -> Result<Fltl> {
    to_fltl(&parse_raw(text, origin)?, false)
}

pub fn parse_pltl(text: &str) -> Result<Pltl> {
    parse_pltl_at(text, (1, 1))
}

pub fn parse_fltl(text: &str) -> Result<Fltl> {
    parse_fltl_at(text, (1, 1))
}

pub fn parse_formula(text: &str, dialect: Dialect) -> Result<Formula> {
    Ok(match dialect {
        Dialect::Pltl => Formula::Pltl(parse_pltl(text)?),
        Dialect::Fltl => Formula::Fltl(parse_fltl(text)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pltl_example() {
        let f = parse_pltl("g & ~prv pdi g").unwrap();
        let g = Pltl::atom("g");
        assert_eq!(f, Pltl::and(g.clone(), Pltl::not(Pltl::prev(Pltl::since(Pltl::True, g)))));
    }

    #[test]
    fn fltl_example() {
        let f = parse_fltl("alw (c -> next next $)").unwrap();
        let expected = Fltl::weak_until(
            Fltl::or(Fltl::lit("c", false), Fltl::next(Fltl::next(Fltl::Dollar))),
            Fltl::False,
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn missing_operand() {
        match parse_pltl("p snc").unwrap_err() {
            Error::Parse { line, col, msg } => {
                assert_eq!((line, col), (1, 6));
                assert!(msg.contains("missing right operand"), "{msg}");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn negated_temporal_fltl_rejected() {
        match parse_fltl("~next p").unwrap_err() {
            Error::Parse { msg, .. } => assert!(msg.contains("`next`"), "{msg}"),
            e => panic!("unexpected {e:?}"),
        }
        assert!(parse_fltl("(next p) -> $").is_err());
        assert_eq!(parse_fltl("~(p & ~q)").unwrap(), Fltl::or(Fltl::lit("p", false), Fltl::lit("q", true)));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = Pltl::atom("p");
        let q = Pltl::atom("q");
        let r = Pltl::atom("r");
        assert_eq!(
            parse_pltl("p snc q snc r").unwrap(),
            Pltl::since(p.clone(), Pltl::since(q.clone(), r.clone()))
        );
        assert_eq!(
            parse_pltl("p | q & r").unwrap(),
            Pltl::or(p.clone(), Pltl::and(q.clone(), r.clone()))
        );
        assert_eq!(
            parse_pltl("prv p snc q").unwrap(),
            Pltl::since(Pltl::prev(p.clone()), q.clone())
        );
        assert_eq!(parse_pltl("prv^3 p").unwrap(), Pltl::prev_n(3, p.clone()));
        assert_eq!(parse_pltl("p -> q").unwrap(), Pltl::or(Pltl::not(p), q));
    }

    #[test]
    fn dialect_mismatch() {
        assert!(parse_pltl("next p").is_err());
        assert!(parse_fltl("prv p").is_err());
        assert!(parse_pltl("$").is_err());
    }

    #[test]
    fn print_round_trip() {
        for s in ["g & ~prv pdi g", "pbx (p -> prv^2 q) | r snc ~s", "true <-> false"] {
            let f = parse_pltl(s).unwrap();
            assert_eq!(parse_pltl(&f.to_string()).unwrap(), f);
        }
        for s in ["alw (c -> next next $)", "~g wun (g & $)", "p <-> ~q"] {
            let f = parse_fltl(s).unwrap();
            assert_eq!(parse_fltl(&f.to_string()).unwrap(), f);
        }
    }
}
