use super::{Action, Domain, ProbTree, State};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    i: usize,
}

impl Lexer {
    fn new(text: &str) -> Lexer {
        let mut toks = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = match line.find('%') {
                Some(i) => &line[..i],
                None => line,
            };
            let chars: Vec<char> = line.chars().collect();
            let mut j = 0;
            while j < chars.len() {
                let c = chars[j];
                if c.is_whitespace() {
                    j += 1;
                } else if c == '(' || c == ')' {
                    toks.push((if c == '(' { Tok::Open } else { Tok::Close }, ln + 1, j + 1));
                    j += 1;
                } else {
                    let start = j;
                    while j < chars.len() && !chars[j].is_whitespace() && chars[j] != '(' && chars[j] != ')' {
                        j += 1;
                    }
                    toks.push((Tok::Word(chars[start..j].iter().collect()), ln + 1, start + 1));
                }
            }
        }
        Lexer { toks, i: 0 }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.i).or_else(|| self.toks.last()) {
            Some((_, l, c)) => (*l, *c),
            None => (1, 1),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(Error::parse(l, c, msg))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.0.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.i += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn word(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.i += 1;
                Ok(w)
            }
            _ => self.err(format!("expected {what}")),
        }
    }
}

fn prop_index(props: &[String], lx: &Lexer, name: &str) -> Result<usize> {
    match props.iter().position(|p| p == name) {
        Some(i) => Ok(i),
        None => {
            let (l, c) = lx.here();
            Err(Error::parse(l, c, format!("unknown proposition `{name}`")))
        }
    }
}

fn parse_tree(lx: &mut Lexer, props: &[String]) -> Result<ProbTree> {
    lx.expect(Tok::Open, "`(` opening a tree")?;
    let w = lx.word("a probability or proposition")?;
    if let Ok(p) = w.parse::<f64>() {
        if !(0.0..=1.0).contains(&p) {
            lx.i -= 1;
            return lx.err(format!("probability {w} outside [0,1]"));
        }
        lx.expect(Tok::Close, "`)` closing a leaf")?;
        return Ok(ProbTree::Leaf(p));
    }
    lx.i -= 1;
    let var = prop_index(props, lx, &w)?;
    lx.i += 1;
    let then = parse_tree(lx, props)?;
    let otherwise = parse_tree(lx, props)?;
    lx.expect(Tok::Close, "`)` closing a test")?;
    Ok(ProbTree::test(var, then, otherwise))
}

pub(super) fn parse_domain(text: &str) -> Result<Domain> {
    let mut lx = Lexer::new(text);
    let mut props: Option<Vec<String>> = None;
    let mut actions: Vec<Action> = Vec::new();
    let mut discount = None;
    let mut init = State(0);
    while let Some(tok) = lx.peek().cloned() {
        let Tok::Word(kw) = tok else {
            return lx.err("expected a section keyword");
        };
        match kw.as_str() {
            "variables" => {
                if props.is_some() {
                    return lx.err("`variables` declared twice");
                }
                lx.i += 1;
                lx.expect(Tok::Open, "`(` after `variables`")?;
                let mut ps = Vec::new();
                while let Some(Tok::Word(_)) = lx.peek() {
                    let p = lx.word("proposition")?;
                    if ps.contains(&p) {
                        lx.i -= 1;
                        return lx.err(format!("duplicate proposition `{p}`"));
                    }
                    ps.push(p);
                }
                lx.expect(Tok::Close, "`)` closing `variables`")?;
                props = Some(ps);
            }
            "action" => {
                let Some(ps) = props.as_ref() else {
                    return lx.err("`action` before `variables`");
                };
                lx.i += 1;
                let name = lx.word("action name")?;
                if actions.iter().any(|a| a.name == name) {
                    lx.i -= 1;
                    return lx.err(format!("duplicate action `{name}`"));
                }
                let mut effects: Vec<Option<ProbTree>> = vec![None; ps.len()];
                let mut any = false;
                loop {
                    match lx.peek() {
                        None => return lx.err(format!("action `{name}` is missing `endaction`")),
                        Some(Tok::Word(w)) if w == "endaction" => {
                            lx.i += 1;
                            break;
                        }
                        Some(Tok::Word(_)) => {
                            let p = lx.word("proposition")?;
                            lx.i -= 1;
                            let i = prop_index(ps, &lx, &p)?;
                            lx.i += 1;
                            if effects[i].is_some() {
                                lx.i -= 1;
                                return lx.err(format!("second effect for `{p}` in `{name}`"));
                            }
                            effects[i] = Some(parse_tree(&mut lx, ps)?);
                            any = true;
                        }
                        Some(_) => return lx.err("expected a proposition or `endaction`"),
                    }
                }
                if !any {
                    lx.i -= 1;
                    return lx.err(format!("missing action body for `{name}`"));
                }
                let effects = effects
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| t.unwrap_or_else(|| ProbTree::persist(i)))
                    .collect();
                actions.push(Action { name, effects });
            }
            "discount" => {
                lx.i += 1;
                let w = lx.word("discount value")?;
                let d: f64 = match w.parse() {
                    Ok(d) => d,
                    Err(_) => {
                        lx.i -= 1;
                        return lx.err(format!("bad discount `{w}`"));
                    }
                };
                if !(d > 0.0 && d < 1.0) {
                    lx.i -= 1;
                    return lx.err(format!("discount must lie strictly between 0 and 1, got {w}"));
                }
                discount = Some(d);
            }
            "init" => {
                let Some(ps) = props.as_ref() else {
                    return lx.err("`init` before `variables`");
                };
                lx.i += 1;
                lx.expect(Tok::Open, "`(` after `init`")?;
                while let Some(Tok::Word(_)) = lx.peek() {
                    let lit = lx.word("literal")?;
                    let (name, val) = match lit.strip_prefix('~') {
                        Some(rest) => (rest, false),
                        None => (lit.as_str(), true),
                    };
                    lx.i -= 1;
                    let i = prop_index(ps, &lx, name)?;
                    lx.i += 1;
                    init = init.with(i, val);
                }
                lx.expect(Tok::Close, "`)` closing `init`")?;
            }
            other => return lx.err(format!("unknown section `{other}`")),
        }
    }
    let Some(props) = props else {
        return Err(Error::parse(1, 1, "missing `variables` header"));
    };
    let discount = discount.ok_or_else(|| Error::parse(1, 1, "missing `discount`"))?;
    let _ = lx.next();
    Domain::new(props, actions, init, discount)
}
