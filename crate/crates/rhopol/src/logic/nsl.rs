//! Parser for the formula surface syntax (`.nsl` files).
//!
//! ```text
//! formula  ::= sep ('|>' '{' ident,* '}' formula)?
//! sep      ::= conj ('|' conj)*
//! conj     ::= unary ('&' unary)*
//! unary    ::= '~' unary | atom
//! atom     ::= 'true' | '0'
//!            | 'drop' '(' name ')'
//!            | '<' name '>' '(' formula,* ')'
//!            | '<' name '?' ident '>' unary
//!            | 'rec' ident '.' formula
//!            | 'forall' ident (':' name)? '.' formula
//!            | 'soleAccess' '(' arg ')' | 'noAccess' '(' arg ')'
//!            | 'firewall' '(' name ')'
//!            | '(' formula ')' | ident
//! name     ::= '@[' formula ']' | '@{' process '}' | ident
//! arg      ::= '@{' process '}' | ident
//! ```
//!
//! An identifier in name position denotes the enclosing binder of that
//! spelling when one is in scope and the concrete name `@"ident"` otherwise,
//! mirroring identifier resolution in the process language. `rec` accepts
//! only bodies monotone in the bound variable; the presets supply the
//! self-negating forms.

use super::{firewall, monotone_in, no_access, sole_access, Formula, NameFormula};
use crate::parse::parse_program;
use crate::sugar::desugar;
use crate::syntax::{Name, Proc};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("formula error at {line}:{col}: {msg}")]
pub struct NslError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Zero,
    /// The raw source between the braces of `@{ ... }`, with its start
    /// position for error reporting.
    ProcBlock(String, usize, usize),
    Tilde,
    Amp,
    Pipe,
    PipeGt,
    Lt,
    Gt,
    LParen,
    RParen,
    RBracket,
    AtLBracket,
    LBrace,
    RBrace,
    Dot,
    Colon,
    Comma,
    Question,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Word(w) => format!("`{w}`"),
        Tok::Zero => "`0`".into(),
        Tok::ProcBlock(..) => "a quoted process".into(),
        Tok::Tilde => "`~`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Pipe => "`|`".into(),
        Tok::PipeGt => "`|>`".into(),
        Tok::Lt => "`<`".into(),
        Tok::Gt => "`>`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::AtLBracket => "`@[`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Question => "`?`".into(),
        Tok::Eof => "end of input".into(),
    }
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.i + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err<T>(&self, line: usize, col: usize, msg: impl Into<String>) -> Result<T, NslError> {
        Err(NslError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek2() == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    /// Consume a `@{ ... }` body, already past the opening brace. Tracks
    /// brace depth through string literals and comments so an embedded `}`
    /// cannot close the block early.
    fn proc_block(&mut self) -> Result<String, NslError> {
        let (line, col) = (self.line, self.col);
        let mut depth = 1usize;
        let mut buf = String::new();
        loop {
            let Some(c) = self.bump() else {
                return self.err(line, col, "unterminated process block");
            };
            match c {
                '{' => {
                    depth += 1;
                    buf.push(c);
                }
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(buf);
                    }
                    buf.push(c);
                }
                '"' => {
                    buf.push(c);
                    loop {
                        let Some(s) = self.bump() else {
                            return self.err(line, col, "unterminated string in process block");
                        };
                        buf.push(s);
                        match s {
                            '\\' => {
                                if let Some(e) = self.bump() {
                                    buf.push(e);
                                }
                            }
                            '"' => break,
                            _ => {}
                        }
                    }
                }
                '/' if self.peek() == Some('/') => {
                    buf.push(c);
                    while let Some(cc) = self.peek() {
                        if cc == '\n' {
                            break;
                        }
                        buf.push(cc);
                        self.bump();
                    }
                }
                _ => buf.push(c),
            }
        }
    }

    fn lex(mut self) -> Result<Vec<(Tok, usize, usize)>, NslError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                '~' => Tok::Tilde,
                '&' => Tok::Amp,
                '|' if self.peek() == Some('>') => {
                    self.bump();
                    Tok::PipeGt
                }
                '|' => Tok::Pipe,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                ',' => Tok::Comma,
                '?' => Tok::Question,
                '@' => match self.peek() {
                    Some('[') => {
                        self.bump();
                        Tok::AtLBracket
                    }
                    Some('{') => {
                        self.bump();
                        let (bl, bc) = (self.line, self.col);
                        Tok::ProcBlock(self.proc_block()?, bl, bc)
                    }
                    _ => return self.err(line, col, "expected `[` or `{` after `@`"),
                },
                d if d.is_ascii_digit() => {
                    let mut lit = String::from(d);
                    while let Some(n) = self.peek() {
                        if n.is_ascii_digit() {
                            lit.push(n);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if lit == "0" {
                        Tok::Zero
                    } else {
                        return self.err(
                            line,
                            col,
                            "the only numeric formula is 0, the empty process",
                        );
                    }
                }
                a if a.is_ascii_alphabetic() || a == '_' => {
                    let mut w = String::from(a);
                    while let Some(n) = self.peek() {
                        if n.is_ascii_alphanumeric() || n == '_' {
                            w.push(n);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Word(w)
                }
                other => return self.err(line, col, format!("unexpected character `{other}`")),
            };
            out.push((tok, line, col));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    name_vars: Vec<String>,
    prop_vars: Vec<String>,
}

/// Parse one formula, which must span the whole input.
pub fn parse_formula(src: &str) -> Result<Formula, NslError> {
    let toks = Lexer {
        chars: src.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
    }
    .lex()?;
    let mut p = Parser {
        toks,
        pos: 0,
        name_vars: Vec::new(),
        prop_vars: Vec::new(),
    };
    let f = p.formula()?;
    let (t, line, col) = p.bump();
    if t != Tok::Eof {
        return Err(NslError {
            line,
            col,
            msg: format!("expected end of input, found {}", describe(&t)),
        });
    }
    Ok(f)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> (Tok, usize, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, line: usize, col: usize, msg: impl Into<String>) -> Result<T, NslError> {
        Err(NslError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), NslError> {
        let (t, line, col) = self.bump();
        if t == want {
            Ok(())
        } else {
            self.err(
                line,
                col,
                format!("expected {}, found {}", describe(&want), describe(&t)),
            )
        }
    }

    fn word(&mut self, what: &str) -> Result<String, NslError> {
        let (t, line, col) = self.bump();
        match t {
            Tok::Word(w) => Ok(w),
            other => self.err(
                line,
                col,
                format!("expected {what}, found {}", describe(&other)),
            ),
        }
    }

    fn formula(&mut self) -> Result<Formula, NslError> {
        let h = self.sep()?;
        if *self.peek() != Tok::PipeGt {
            return Ok(h);
        }
        self.bump();
        self.expect(Tok::LBrace)?;
        let mut hide = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                hide.push(self.word("a hidden identifier")?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let c = self.formula()?;
        Ok(Formula::RelyGuarantee(Box::new(h), hide, Box::new(c)))
    }

    fn sep(&mut self) -> Result<Formula, NslError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            f = Formula::Sep(Box::new(f), Box::new(self.conj()?));
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, NslError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = Formula::And(Box::new(f), Box::new(self.unary()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, NslError> {
        if *self.peek() == Tok::Tilde {
            self.bump();
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, NslError> {
        let (t, line, col) = self.bump();
        match t {
            Tok::Zero => Ok(Formula::Null),
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Lt => {
                let a = self.name()?;
                if *self.peek() == Tok::Question {
                    self.bump();
                    let b = self.word("a binder")?;
                    self.expect(Tok::Gt)?;
                    self.name_vars.push(b.clone());
                    let body = self.unary();
                    self.name_vars.pop();
                    Ok(Formula::Reception(a, b, Box::new(body?)))
                } else {
                    self.expect(Tok::Gt)?;
                    self.expect(Tok::LParen)?;
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.formula()?);
                            if *self.peek() == Tok::Comma {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Formula::Dissemination(a, args))
                }
            }
            Tok::Word(w) => match w.as_str() {
                "true" => Ok(Formula::True),
                "drop" => {
                    self.expect(Tok::LParen)?;
                    let a = self.name()?;
                    self.expect(Tok::RParen)?;
                    Ok(Formula::Disclosure(a))
                }
                "rec" => {
                    let x = self.word("a fixpoint variable")?;
                    self.expect(Tok::Dot)?;
                    self.prop_vars.push(x.clone());
                    let body = self.formula();
                    self.prop_vars.pop();
                    let body = body?;
                    if !monotone_in(&body, &x) {
                        return self.err(
                            line,
                            col,
                            format!(
                                "rec body must be monotone in {x}; the soleAccess, noAccess, \
                                 and firewall presets provide the self-negating forms"
                            ),
                        );
                    }
                    Ok(Formula::Gfp(x, Box::new(body)))
                }
                "forall" => {
                    let n = self.word("a name variable")?;
                    let dom = if *self.peek() == Tok::Colon {
                        self.bump();
                        self.name()?
                    } else {
                        NameFormula::QuoteFormula(Box::new(Formula::True))
                    };
                    self.expect(Tok::Dot)?;
                    self.name_vars.push(n.clone());
                    let body = self.formula();
                    self.name_vars.pop();
                    Ok(Formula::Forall(n, dom, Box::new(body?)))
                }
                "soleAccess" => {
                    self.expect(Tok::LParen)?;
                    let slot = self.concrete_name()?;
                    self.expect(Tok::RParen)?;
                    Ok(sole_access(&slot))
                }
                "noAccess" => {
                    self.expect(Tok::LParen)?;
                    let slot = self.concrete_name()?;
                    self.expect(Tok::RParen)?;
                    Ok(no_access(&slot))
                }
                "firewall" => {
                    self.expect(Tok::LParen)?;
                    let (nline, ncol) = (self.toks[self.pos].1, self.toks[self.pos].2);
                    let ns = self.name()?;
                    if matches!(ns, NameFormula::NameVar(_)) {
                        return self.err(nline, ncol, "firewall needs a closed namespace");
                    }
                    self.expect(Tok::RParen)?;
                    Ok(firewall(&ns))
                }
                _ => {
                    if self.prop_vars.contains(&w) {
                        Ok(Formula::PropVar(w))
                    } else {
                        self.err(line, col, format!("unbound variable `{w}`"))
                    }
                }
            },
            other => self.err(
                line,
                col,
                format!("expected a formula, found {}", describe(&other)),
            ),
        }
    }

    fn name(&mut self) -> Result<NameFormula, NslError> {
        let (t, line, col) = self.bump();
        match t {
            Tok::AtLBracket => {
                let f = self.formula()?;
                self.expect(Tok::RBracket)?;
                Ok(NameFormula::QuoteFormula(Box::new(f)))
            }
            Tok::ProcBlock(src, bl, bc) => {
                Ok(NameFormula::QuoteProc(Box::new(parse_block(&src, bl, bc)?)))
            }
            Tok::Word(w) => {
                if self.name_vars.contains(&w) {
                    Ok(NameFormula::NameVar(w))
                } else {
                    Ok(NameFormula::QuoteProc(Box::new(Proc::str(w))))
                }
            }
            other => self.err(
                line,
                col,
                format!("expected a name, found {}", describe(&other)),
            ),
        }
    }

    fn concrete_name(&mut self) -> Result<Name, NslError> {
        let (t, line, col) = self.bump();
        match t {
            Tok::Word(w) => {
                if self.name_vars.contains(&w) {
                    self.err(line, col, "preset arguments must be concrete names")
                } else {
                    Ok(Name::var(&w))
                }
            }
            Tok::ProcBlock(src, bl, bc) => Ok(Name::quote(parse_block(&src, bl, bc)?)),
            other => self.err(
                line,
                col,
                format!("expected a name, found {}", describe(&other)),
            ),
        }
    }
}

fn parse_block(src: &str, line: usize, col: usize) -> Result<Proc, NslError> {
    let surface = parse_program(src).map_err(|e| NslError {
        line,
        col,
        msg: format!("in quoted process: {e}"),
    })?;
    desugar(&surface).map_err(|e| NslError {
        line,
        col,
        msg: format!("in quoted process: {e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Formula as F;

    #[test]
    fn presets_match_their_constructors() {
        assert_eq!(
            parse_formula("soleAccess(slot)").unwrap(),
            sole_access(&Name::var("slot"))
        );
        assert_eq!(
            parse_formula("noAccess(slot)").unwrap(),
            no_access(&Name::var("slot"))
        );
    }

    #[test]
    fn precedence_tilde_amp_pipe() {
        let f = parse_formula("~true & 0 | true").unwrap();
        assert_eq!(
            f,
            F::Sep(
                Box::new(F::And(
                    Box::new(F::Not(Box::new(F::True))),
                    Box::new(F::Null)
                )),
                Box::new(F::True)
            )
        );
    }

    #[test]
    fn reception_scopes_its_binder() {
        let f = parse_formula("<a ? b> drop(b)").unwrap();
        let F::Reception(ch, b, body) = f else {
            panic!("not a reception: {f}");
        };
        assert_eq!(ch, NameFormula::QuoteProc(Box::new(Proc::str("a"))));
        assert_eq!(b, "b");
        assert_eq!(
            *body,
            F::Disclosure(NameFormula::NameVar("b".into()))
        );
        // Out of scope again afterwards: `b` falls back to a concrete name.
        let g = parse_formula("<a ? b> true & drop(b)").unwrap();
        let F::And(_, rhs) = g else { panic!() };
        assert_eq!(
            *rhs,
            F::Disclosure(NameFormula::QuoteProc(Box::new(Proc::str("b"))))
        );
    }

    #[test]
    fn dissemination_takes_argument_formulas() {
        let f = parse_formula("<a>(true, 0)").unwrap();
        assert_eq!(
            f,
            F::Dissemination(
                NameFormula::QuoteProc(Box::new(Proc::str("a"))),
                vec![F::True, F::Null]
            )
        );
        assert_eq!(
            parse_formula("<a>()").unwrap(),
            F::Dissemination(NameFormula::QuoteProc(Box::new(Proc::str("a"))), vec![])
        );
    }

    #[test]
    fn rec_requires_monotone_bodies() {
        assert!(parse_formula("rec X. <a ? b> X").is_ok());
        let e = parse_formula("rec X. ~ <a ? b> X").unwrap_err();
        assert!(e.msg.contains("monotone"), "{e}");
    }

    #[test]
    fn quoted_processes_desugar() {
        let f = parse_formula("<@{ x!(1) } ? b> true").unwrap();
        let F::Reception(NameFormula::QuoteProc(p), _, _) = f else {
            panic!("wrong shape");
        };
        assert_eq!(
            *p,
            Proc::output(Name::var("x"), vec![Proc::int(1)])
        );
    }

    #[test]
    fn rely_guarantee_hides_identifiers() {
        let f = parse_formula("true |> {a, b} 0").unwrap();
        assert_eq!(
            f,
            F::RelyGuarantee(
                Box::new(F::True),
                vec!["a".into(), "b".into()],
                Box::new(F::Null)
            )
        );
    }

    #[test]
    fn forall_defaults_to_the_universe() {
        let f = parse_formula("forall n . <n>(true)").unwrap();
        assert_eq!(
            f,
            F::Forall(
                "n".into(),
                NameFormula::QuoteFormula(Box::new(F::True)),
                Box::new(F::Dissemination(
                    NameFormula::NameVar("n".into()),
                    vec![F::True]
                ))
            )
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_formula("true &\n  7").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        let e = parse_formula("X").unwrap_err();
        assert!(e.msg.contains("unbound"), "{e}");
    }

    #[test]
    fn comments_are_skipped() {
        let f = parse_formula("// access policy\ntrue & 0 // trailing\n").unwrap();
        assert_eq!(f, F::And(Box::new(F::True), Box::new(F::Null)));
    }
}
