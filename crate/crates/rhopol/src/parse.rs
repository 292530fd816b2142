//! Lexer and parser for the surface language (the `.rho` format).
//!
//! Layout rules:
//! - newlines separate parallel components inside braces and at top level;
//!   inside parentheses they are plain whitespace, so argument lists and
//!   patterns may span lines;
//! - `|` also separates parallel components anywhere;
//! - `//` comments run to end of line.
//!
//! `+` is overloaded: a sum of input/output-guarded operands is a choice, a
//! sum of value operands is arithmetic (`-` always means arithmetic), and
//! mixing the two is an error. `0` is simultaneously the stopped process and
//! the integer zero; the two are canonically identified.
//!
//! The body of `=>` is a single (possibly summed) term unless braced.

use std::fmt;

use thiserror::Error;

use crate::sugar::{SGround, SName, SPat, Surface};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    New,
    Def,
    Match,
    Undefined,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Bang,
    Quest,
    Star,
    At,
    Plus,
    Minus,
    Pipe,
    Arrow,
    Eq,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(i) => return write!(f, "integer `{i}`"),
            Tok::Str(_) => "string literal",
            Tok::New => "`new`",
            Tok::Def => "`def`",
            Tok::Match => "`match`",
            Tok::Undefined => "`undefined`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Bang => "`!`",
            Tok::Quest => "`?`",
            Tok::Star => "`*`",
            Tok::At => "`@`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Pipe => "`|`",
            Tok::Arrow => "`=>`",
            Tok::Eq => "`=`",
            Tok::Newline => "end of line",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
    brackets: Vec<(char, usize, usize)>,
    toks: Vec<Token>,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        msg: msg.into(),
    }
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().collect(),
            i: 0,
            line: 1,
            col: 1,
            brackets: Vec::new(),
            toks: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
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

    fn emit(&mut self, tok: Tok, line: usize, col: usize) {
        self.toks.push(Token { tok, line, col });
    }

    /// True when the previous token can end a value, which makes a following
    /// `-` a binary operator rather than the sign of an integer literal.
    fn after_value(&self) -> bool {
        matches!(
            self.toks.last().map(|t| &t.tok),
            Some(
                Tok::Ident(_)
                    | Tok::Int(_)
                    | Tok::Str(_)
                    | Tok::Undefined
                    | Tok::RParen
                    | Tok::RBrace
            )
        )
    }

    fn lex_int(&mut self, neg: bool, line: usize, col: usize) -> Result<(), ParseError> {
        let mut digits = String::new();
        if neg {
            digits.push('-');
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap());
        }
        let v: i64 = digits
            .parse()
            .map_err(|_| err(line, col, format!("integer literal `{digits}` out of range")))?;
        self.emit(Tok::Int(v), line, col);
        Ok(())
    }

    fn run(mut self) -> Result<Vec<Token>, ParseError> {
        while let Some(c) = self.peek() {
            let (line, col) = (self.line, self.col);
            match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    let in_parens = matches!(self.brackets.last(), Some(('(', _, _)));
                    if !in_parens && !matches!(self.toks.last().map(|t| &t.tok), Some(Tok::Newline) | None)
                    {
                        self.emit(Tok::Newline, line, col);
                    }
                }
                '/' => {
                    self.bump();
                    if self.peek() == Some('/') {
                        while !matches!(self.peek(), Some('\n') | None) {
                            self.bump();
                        }
                    } else {
                        return Err(err(line, col, "unexpected `/` (comments are `//`)"));
                    }
                }
                '(' => {
                    self.bump();
                    self.brackets.push(('(', line, col));
                    self.emit(Tok::LParen, line, col);
                }
                '{' => {
                    self.bump();
                    self.brackets.push(('{', line, col));
                    self.emit(Tok::LBrace, line, col);
                }
                ')' | '}' => {
                    self.bump();
                    let want = if c == ')' { '(' } else { '{' };
                    match self.brackets.pop() {
                        Some((b, _, _)) if b == want => {}
                        _ => return Err(err(line, col, format!("unbalanced `{c}`"))),
                    }
                    self.emit(if c == ')' { Tok::RParen } else { Tok::RBrace }, line, col);
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None | Some('\n') => {
                                return Err(err(line, col, "unterminated string literal"))
                            }
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                other => {
                                    return Err(err(
                                        line,
                                        col,
                                        format!("bad escape `\\{}`", other.unwrap_or(' ')),
                                    ))
                                }
                            },
                            Some(ch) => s.push(ch),
                        }
                    }
                    self.emit(Tok::Str(s), line, col);
                }
                '-' => {
                    let literal = !self.after_value()
                        && matches!(self.chars.get(self.i + 1), Some(d) if d.is_ascii_digit());
                    self.bump();
                    if literal {
                        self.lex_int(true, line, col)?;
                    } else {
                        self.emit(Tok::Minus, line, col);
                    }
                }
                '=' => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        self.emit(Tok::Arrow, line, col);
                    } else {
                        self.emit(Tok::Eq, line, col);
                    }
                }
                '⇒' => {
                    self.bump();
                    self.emit(Tok::Arrow, line, col);
                }
                ',' => {
                    self.bump();
                    self.emit(Tok::Comma, line, col);
                }
                '!' => {
                    self.bump();
                    self.emit(Tok::Bang, line, col);
                }
                '?' => {
                    self.bump();
                    self.emit(Tok::Quest, line, col);
                }
                '*' => {
                    self.bump();
                    self.emit(Tok::Star, line, col);
                }
                '@' => {
                    self.bump();
                    self.emit(Tok::At, line, col);
                }
                '+' => {
                    self.bump();
                    self.emit(Tok::Plus, line, col);
                }
                '|' => {
                    self.bump();
                    self.emit(Tok::Pipe, line, col);
                }
                c if c.is_ascii_digit() => self.lex_int(false, line, col)?,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut s = String::new();
                    while matches!(self.peek(), Some(ch) if ch.is_ascii_alphanumeric() || ch == '_')
                    {
                        s.push(self.bump().unwrap());
                    }
                    let tok = match s.as_str() {
                        "new" => Tok::New,
                        "def" => Tok::Def,
                        "match" => Tok::Match,
                        "undefined" => Tok::Undefined,
                        _ => Tok::Ident(s),
                    };
                    self.emit(tok, line, col);
                }
                other => return Err(err(line, col, format!("unexpected character `{other}`"))),
            }
        }
        if let Some((b, bl, bc)) = self.brackets.pop() {
            return Err(err(bl, bc, format!("unclosed `{b}`")));
        }
        let (line, col) = (self.line, self.col);
        self.emit(Tok::Eof, line, col);
        Ok(self.toks)
    }
}

/// Parse a complete surface program (a parallel block).
pub fn parse_program(src: &str) -> Result<Surface, ParseError> {
    let toks = Lexer::new(src).run()?;
    let mut p = Parser { toks, pos: 0 };
    let s = p.parse_par()?;
    p.skip_newlines();
    if p.peek() != &Tok::Eof {
        return p.unexpected("end of input");
    }
    Ok(s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

#[derive(PartialEq)]
enum Cat {
    Io,
    Val,
    Neutral,
    Bad,
}

fn categorize(s: &Surface) -> Cat {
    match s {
        Surface::Input { .. }
        | Surface::Output { .. }
        | Surface::Call { .. }
        | Surface::Match(_)
        | Surface::Choice(_) => Cat::Io,
        Surface::Ground(_)
        | Surface::Ident(_)
        | Surface::Quoted(_)
        | Surface::Drop(_)
        | Surface::Add(_, _)
        | Surface::Sub(_, _) => Cat::Val,
        Surface::Stop => Cat::Neutral,
        Surface::Par(_) | Surface::New { .. } | Surface::Def { .. } => Cat::Bad,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos.min(self.toks.len() - 1)].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos.min(self.toks.len() - 1)];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(err(
            line,
            col,
            format!("expected {wanted}, found {}", self.peek()),
        ))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(wanted)
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek() == &Tok::Newline {
            self.bump();
        }
    }

    fn at_item_start(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_)
                | Tok::Int(_)
                | Tok::Str(_)
                | Tok::Undefined
                | Tok::At
                | Tok::Star
                | Tok::New
                | Tok::Def
                | Tok::Match
                | Tok::LParen
        )
    }

    /// A parallel block: items separated by `|` or (outside parens) newlines.
    fn parse_par(&mut self) -> Result<Surface, ParseError> {
        self.skip_newlines();
        let mut items = Vec::new();
        if self.at_item_start() {
            loop {
                items.push(self.parse_plus()?);
                let mut newline_sep = false;
                while self.peek() == &Tok::Newline {
                    newline_sep = true;
                    self.bump();
                }
                if self.peek() == &Tok::Pipe {
                    self.bump();
                    self.skip_newlines();
                    if !self.at_item_start() {
                        return self.unexpected("a process after `|`");
                    }
                    continue;
                }
                if newline_sep && self.at_item_start() {
                    continue;
                }
                break;
            }
        }
        Ok(Surface::par(items))
    }

    /// A `+`/`-` chain; whether it denotes choice or arithmetic is decided
    /// by the operands.
    fn parse_plus(&mut self) -> Result<Surface, ParseError> {
        let (line, col) = self.here();
        let mut rands = vec![self.parse_operand()?];
        let mut subtraction = false;
        let mut ops = Vec::new();
        loop {
            match self.peek() {
                Tok::Plus => ops.push(false),
                Tok::Minus => {
                    ops.push(true);
                    subtraction = true;
                }
                _ => break,
            }
            self.bump();
            self.skip_newlines();
            rands.push(self.parse_operand()?);
        }
        if ops.is_empty() {
            return Ok(rands.pop().unwrap());
        }
        let cats: Vec<Cat> = rands.iter().map(categorize).collect();
        if cats.contains(&Cat::Bad) {
            return Err(err(line, col, "this term cannot be a summand".to_string()));
        }
        let has_io = cats.contains(&Cat::Io);
        let has_val = cats.contains(&Cat::Val);
        if subtraction && has_io {
            return Err(err(line, col, "`-` applies to values, not processes"));
        }
        if has_io && has_val {
            return Err(err(
                line,
                col,
                "cannot mix choice branches and arithmetic operands in one sum",
            ));
        }
        if has_io {
            return Ok(Surface::Choice(rands));
        }
        if !has_val {
            return Ok(Surface::Stop);
        }
        let mut it = rands.into_iter();
        let mut acc = it.next().unwrap();
        for (sub, r) in ops.into_iter().zip(it) {
            acc = if sub {
                Surface::Sub(Box::new(acc), Box::new(r))
            } else {
                Surface::Add(Box::new(acc), Box::new(r))
            };
        }
        Ok(acc)
    }

    fn parse_operand(&mut self) -> Result<Surface, ParseError> {
        if self.peek() == &Tok::Star {
            self.bump();
            let n = self.parse_nameexpr()?;
            return Ok(Surface::Drop(n));
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> Result<Surface, ParseError> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Surface::Stop)
            }
            Tok::Int(i) => {
                self.bump();
                Ok(Surface::Ground(SGround::Int(i)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Surface::Ground(SGround::Str(s)))
            }
            Tok::Undefined => {
                self.bump();
                Ok(Surface::Ground(SGround::Undefined))
            }
            Tok::New => {
                self.bump();
                self.expect(Tok::LParen, "`(` after `new`")?;
                let binders = self.parse_ident_list("binder")?;
                self.expect(Tok::RParen, "`)`")?;
                if binders.is_empty() {
                    return self.unexpected("at least one binder in `new(...)`");
                }
                self.skip_newlines();
                self.expect(Tok::LBrace, "`{` to open the `new` body")?;
                let body = self.parse_par()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Surface::New {
                    binders,
                    body: Box::new(body),
                })
            }
            Tok::Def => {
                self.bump();
                let name = match self.peek().clone() {
                    Tok::Ident(s) => {
                        self.bump();
                        s
                    }
                    _ => return self.unexpected("a definition name after `def`"),
                };
                self.expect(Tok::LParen, "`(` after the definition name")?;
                let params = self.parse_ident_list("parameter")?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.parse_arrow_body()?;
                let applied = if self.peek() == &Tok::LParen {
                    Some(self.parse_args()?)
                } else {
                    None
                };
                Ok(Surface::Def {
                    name,
                    params,
                    body: Box::new(body),
                    applied,
                })
            }
            Tok::Match => {
                self.bump();
                self.skip_newlines();
                self.expect(Tok::LBrace, "`{` after `match`")?;
                let inner = self.parse_par()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(match inner {
                    Surface::Stop => Surface::Stop,
                    Surface::Par(items) => Surface::Match(items),
                    single => Surface::Match(vec![single]),
                })
            }
            Tok::LParen => {
                self.bump();
                let e = self.parse_par()?;
                self.expect(Tok::RParen, "`)`")?;
                if let Surface::Def {
                    name,
                    params,
                    body,
                    applied: None,
                } = e
                {
                    if self.peek() == &Tok::LParen {
                        let args = self.parse_args()?;
                        return Ok(Surface::Def {
                            name,
                            params,
                            body,
                            applied: Some(args),
                        });
                    }
                    return Ok(Surface::Def {
                        name,
                        params,
                        body,
                        applied: None,
                    });
                }
                Ok(e)
            }
            Tok::Ident(s) => {
                self.bump();
                match self.peek() {
                    Tok::Bang => {
                        self.bump();
                        self.parse_output(SName::Ident(s))
                    }
                    Tok::Quest => {
                        self.bump();
                        self.parse_input(SName::Ident(s))
                    }
                    Tok::LParen => {
                        let args = self.parse_args()?;
                        Ok(Surface::Call { name: s, args })
                    }
                    _ => Ok(Surface::Ident(s)),
                }
            }
            Tok::At => {
                let n = self.parse_nameexpr()?;
                match self.peek() {
                    Tok::Bang => {
                        self.bump();
                        self.parse_output(n)
                    }
                    Tok::Quest => {
                        self.bump();
                        self.parse_input(n)
                    }
                    _ => {
                        let SName::Quote(inner) = n else {
                            unreachable!("`@` always parses to a quote");
                        };
                        Ok(Surface::Quoted(inner))
                    }
                }
            }
            _ => self.unexpected("a process"),
        }
    }

    fn parse_ident_list(&mut self, what: &str) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        if matches!(self.peek(), Tok::Ident(_)) {
            loop {
                match self.peek().clone() {
                    Tok::Ident(s) => {
                        self.bump();
                        out.push(s);
                    }
                    _ => return self.unexpected(&format!("a {what} identifier")),
                }
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn parse_args(&mut self) -> Result<Vec<Surface>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                if !self.at_item_start() {
                    return self.unexpected("an argument");
                }
                args.push(self.parse_par()?);
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(args)
    }

    fn parse_output(&mut self, channel: SName) -> Result<Surface, ParseError> {
        let mut args = Vec::new();
        if let (Tok::Ident(lbl), Tok::LParen) = (self.peek(), self.peek2()) {
            args.push(Surface::Ground(SGround::Str(lbl.clone())));
            self.bump();
        }
        args.extend(self.parse_args()?);
        Ok(Surface::Output { channel, args })
    }

    fn parse_input(&mut self, channel: SName) -> Result<Surface, ParseError> {
        let mut pattern = Vec::new();
        if let (Tok::Ident(lbl), Tok::LParen) = (self.peek(), self.peek2()) {
            pattern.push(SPat::Literal(SName::Ident(lbl.clone())));
            self.bump();
        }
        self.expect(Tok::LParen, "`(` to open the pattern")?;
        if self.peek() != &Tok::RParen {
            loop {
                pattern.push(match self.peek() {
                    Tok::Eq => {
                        self.bump();
                        SPat::Literal(self.parse_nameexpr()?)
                    }
                    Tok::At => SPat::Binder(self.parse_nameexpr()?),
                    Tok::Ident(_) => match self.bump() {
                        Tok::Ident(s) => SPat::Ident(s),
                        _ => unreachable!(),
                    },
                    _ => return self.unexpected("a pattern slot (`x`, `=name`, or `@name`)"),
                });
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let body = self.parse_arrow_body()?;
        Ok(Surface::Input {
            channel,
            pattern,
            body: Box::new(body),
        })
    }

    fn parse_arrow_body(&mut self) -> Result<Surface, ParseError> {
        self.expect(Tok::Arrow, "`=>`")?;
        if self.peek() == &Tok::Newline {
            // Only a brace may continue on the next line; an unbraced body
            // there would be indistinguishable from a new parallel item.
            let mut ahead = self.pos;
            while self.toks[ahead].tok == Tok::Newline {
                ahead += 1;
            }
            if self.toks[ahead].tok != Tok::LBrace {
                self.pos = ahead;
                return self.unexpected("a braced body (`{ ... }`) when `=>` continues on a new line");
            }
            self.skip_newlines();
        }
        if self.peek() == &Tok::LBrace {
            self.bump();
            let body = self.parse_par()?;
            self.expect(Tok::RBrace, "`}`")?;
            Ok(body)
        } else {
            self.parse_plus()
        }
    }

    fn parse_nameexpr(&mut self) -> Result<SName, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(SName::Ident(s))
            }
            Tok::At => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(0) => {
                        self.bump();
                        Ok(SName::Quote(Box::new(Surface::Stop)))
                    }
                    Tok::Int(i) => {
                        self.bump();
                        Ok(SName::Quote(Box::new(Surface::Ground(SGround::Int(i)))))
                    }
                    Tok::Str(s) => {
                        self.bump();
                        Ok(SName::Quote(Box::new(Surface::Ground(SGround::Str(s)))))
                    }
                    Tok::Undefined => {
                        self.bump();
                        Ok(SName::Quote(Box::new(Surface::Ground(SGround::Undefined))))
                    }
                    Tok::LBrace => {
                        self.bump();
                        let body = self.parse_par()?;
                        self.expect(Tok::RBrace, "`}`")?;
                        Ok(SName::Quote(Box::new(body)))
                    }
                    Tok::Ident(_) => self.unexpected(
                        "a literal or `{` after `@` (identifiers are already names: write `x`, not `@x`)",
                    ),
                    _ => self.unexpected("a literal or `{` after `@`"),
                }
            }
            _ => self.unexpected("a name (`x`, `@literal`, or `@{ ... }`)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sugar::desugar;
    use crate::syntax::{pretty, Binder, Name, Proc};

    fn core(src: &str) -> Proc {
        desugar(&parse_program(src).expect("parse")).expect("desugar")
    }

    #[test]
    fn empty_and_stop() {
        assert_eq!(core(""), Proc::Stop);
        assert_eq!(core("0"), Proc::Stop);
        assert_eq!(core("// just a comment\n"), Proc::Stop);
    }

    #[test]
    fn newline_and_pipe_both_separate() {
        let a = core("a!(1)\nb!(2)");
        let b = core("a!(1) | b!(2)");
        assert_eq!(a, b);
        assert!(matches!(a, Proc::Par(ps) if ps.len() == 2));
    }

    #[test]
    fn newlines_inside_parens_are_whitespace() {
        let p = core("a!(1,\n    2)");
        assert_eq!(
            p,
            Proc::output(Name::var("a"), vec![Proc::int(1), Proc::int(2)])
        );
    }

    #[test]
    fn label_sugar_on_both_sides() {
        let out = core("slot!get(*ret)");
        assert_eq!(
            out,
            Proc::output(
                Name::var("slot"),
                vec![Proc::str("get"), Proc::drop(Name::var("ret"))]
            )
        );
        let inp = core("slot?get(ret) => ret!(1)");
        if let Proc::Input(i) = &inp {
            assert_eq!(i.pattern[0], Binder::Literal(Name::var("get")));
            assert_eq!(i.pattern[1], Binder::Var(Name::var("ret")));
        } else {
            panic!("expected input");
        }
    }

    #[test]
    fn sum_disambiguation() {
        assert!(matches!(core("a!() + b?() => 0"), Proc::Choice(_)));
        assert!(matches!(
            core("1 + 2"),
            Proc::Ground(crate::syntax::GroundTerm::Add(_, _))
        ));
        assert!(matches!(
            core("*x - 1"),
            Proc::Ground(crate::syntax::GroundTerm::Sub(_, _))
        ));
        assert!(parse_program("a!() + 1").is_err());
        assert!(parse_program("a!() - b!()").is_err());
    }

    #[test]
    fn negative_literals_vs_subtraction() {
        assert_eq!(core("-2"), Proc::int(-2));
        assert_eq!(
            core("a!(-2, 3 - 2)"),
            Proc::output(
                Name::var("a"),
                vec![
                    Proc::int(-2),
                    Proc::Ground(crate::syntax::GroundTerm::Sub(
                        Box::new(Proc::int(3)),
                        Box::new(Proc::int(2)),
                    ))
                ]
            )
        );
    }

    #[test]
    fn at_atoms() {
        assert_eq!(core("@5!()"), Proc::output(Name::quote(Proc::int(5)), vec![]));
        assert_eq!(
            core("@\"a b\"!()"),
            Proc::output(Name::quote(Proc::str("a b")), vec![])
        );
        assert_eq!(core("@0!()"), Proc::output(Name::quote(Proc::Stop), vec![]));
        let p = core("@{ x!(1) }!()");
        assert_eq!(
            p,
            Proc::output(
                Name::quote(Proc::output(Name::var("x"), vec![Proc::int(1)])),
                vec![]
            )
        );
        assert!(parse_program("@x!()").is_err());
    }

    #[test]
    fn match_is_input_guarded_choice() {
        let p = core("match {\n  c?get(r) => r!(1)\n  c?set(s) => 0\n}");
        if let Proc::Choice(bs) = &p {
            assert_eq!(bs.len(), 2);
        } else {
            panic!("expected choice, got {p}");
        }
        assert!(desugar(&parse_program("match { a!(1) }").unwrap()).is_err());
    }

    #[test]
    fn arrow_body_is_single_term_unless_braced() {
        // The unbraced body stops at `|`; the second output is a sibling.
        let p = core("c?(x) => a!(*x) | b!()");
        assert!(matches!(&p, Proc::Par(ps) if ps.len() == 2));
        let q = core("c?(x) => { a!(*x)\nb!() }");
        if let Proc::Input(i) = &q {
            assert!(matches!(i.body.as_ref(), Proc::Par(ps) if ps.len() == 2));
        } else {
            panic!("expected input");
        }
    }

    #[test]
    fn pattern_forms() {
        let p = core("c?(=done, @5, x) => x!(*@5)");
        if let Proc::Input(i) = &p {
            assert_eq!(i.pattern[0], Binder::Literal(Name::var("done")));
            assert_eq!(i.pattern[1], Binder::Var(Name::quote(Proc::int(5))));
            assert_eq!(i.pattern[2], Binder::Var(Name::var("x")));
        } else {
            panic!("expected input");
        }
    }

    #[test]
    fn def_applied_and_declaration() {
        let applied = core("(def F(x) => x!(1))(@{ 0 })");
        assert!(matches!(&applied, Proc::Par(ps) if ps.len() == 3));
        let decl = core("def F(x) => { x!(1) }\nF(@0)");
        assert!(matches!(&decl, Proc::Par(ps) if ps.len() == 3));
        assert!(desugar(&parse_program("F(@0)").unwrap()).is_err());
    }

    #[test]
    fn pretty_output_reparses_exactly() {
        let samples = [
            "x?(y) => { a!() | b!(*y) }",
            "slot!get(*ret) | slot?get(ret) => ret!(-2)",
            "a!() + c?() => 0",
            "(c?() => 0) + b!()",
            "@{ @\"%v\"!(7) }?(x) => *x",
            "x!(\"a b\", undefined, 3 - (2 - 1))",
            "u?(z) => w!(*z) + d?(w) => 0",
            "*b + 3 - 1",
        ];
        for src in samples {
            let p = core(src);
            let printed = pretty::pretty(&p);
            let q = core(&printed);
            assert_eq!(p, q, "reparse mismatch for `{src}` printed as `{printed}`");
        }
    }

    #[test]
    fn error_positions() {
        let e = parse_program("a!(\n  ,2)").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_program("x?() =>\na!()").unwrap_err();
        assert_eq!(e.line, 2, "unbraced body may not start on a new line");
    }
}
