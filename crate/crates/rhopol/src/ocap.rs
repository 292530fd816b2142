//! Translation of an object-capability JavaScript subset into the surface
//! calculus, in continuation-passing style.
//!
//! The subset covers four statement forms — `var x;`, `var x = v;`,
//! `i += a;`, and `var x = def({ key: value, ... });` — chained by `;`.
//! Each declared variable becomes a [`Cell`] on its own channel; object
//! literals become a [`Map`]; statements signal a continuation channel when
//! their effect has landed, and sequencing chains those signals.
//!
//! Expression values: number literals are ground integers, `+` is ground
//! addition, and a variable read is a `get` probe against the variable's
//! cell that binds the value before the consuming statement runs
//! (read-before-use). Arrow functions are recognized but only as object
//! entry values, where they are stored as inert string stubs.
//!
//! The translator emits its own `Cell` definition whose `set` carries an
//! acknowledgment channel, so `i += a` can reuse its continuation signal as
//! the write acknowledgment; an unacknowledged `set` would let a
//! continuation-gated reader observe the overwritten value. [`prelude`]
//! returns the classic unacknowledged `Cell` and the two-key `Map` exactly
//! as they appear in the literature.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::parse::parse_program;
use crate::sugar::{SGround, SName, SPat, Surface};
use crate::syntax::pretty::ident_shaped;
use crate::syntax::{name_equiv, GroundTerm, Name, Proc};

/// Statement-level AST of the subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JsAst {
    /// `var x;` or `var x = v;`
    VarDecl {
        name: String,
        init: Option<JsExpr>,
    },
    /// `first; rest` — statement sequencing.
    Seq { first: Box<JsAst>, rest: Box<JsAst> },
    /// `target += amount;`
    PlusAssign { target: String, amount: JsExpr },
    /// `var target = def({ key: value, ... });` — an object literal
    /// installed as a map on the target's channel.
    DefObject {
        target: String,
        entries: Vec<(String, JsExpr)>,
    },
}

/// Expression AST of the subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JsExpr {
    NumLit(i64),
    Ident(String),
    Add(Box<JsExpr>, Box<JsExpr>),
    /// An arrow function. Recognized by the parser but rejected anywhere
    /// except as an object entry value, where it is stored as a stub.
    ArrowStub { params: Vec<String> },
}

/// Translation environment: each in-scope identifier's cell channel, plus
/// the program's continuation channel. Distinct identifiers must map to
/// distinct (non-equivalent) channels.
#[derive(Clone, Debug)]
pub struct Env {
    pub vars: BTreeMap<String, Name>,
    pub k: Name,
}

impl Env {
    pub fn new(k: Name) -> Env {
        Env {
            vars: BTreeMap::new(),
            k,
        }
    }

    pub fn bind(&mut self, ident: &str, channel: Name) {
        self.vars.insert(ident.to_string(), channel);
    }

    /// The default environment for a program: every declared variable on
    /// the channel named after it, continuation `done`.
    pub fn for_program(ast: &JsAst) -> Env {
        let mut env = Env::new(Name::var("done"));
        let mut decls = Vec::new();
        collect_decls(ast, &mut decls);
        for d in decls {
            let channel = Name::var(&d);
            env.bind(&d, channel);
        }
        env
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum JsError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("unsupported construct at {line}:{col}: {construct}")]
    Unsupported {
        line: u32,
        col: u32,
        construct: String,
    },
    #[error("translation error: {msg}")]
    Translate { msg: String },
}

fn translate_err(msg: impl Into<String>) -> JsError {
    JsError::Translate { msg: msg.into() }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum JTok {
    Var,
    Ident(String),
    Num(i64),
    Semi,
    Assign,
    PlusAssign,
    Plus,
    Arrow,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Dot,
    Eof,
}

impl JTok {
    fn describe(&self) -> String {
        match self {
            JTok::Var => "`var`".into(),
            JTok::Ident(s) => format!("identifier `{s}`"),
            JTok::Num(n) => format!("number `{n}`"),
            JTok::Semi => "`;`".into(),
            JTok::Assign => "`=`".into(),
            JTok::PlusAssign => "`+=`".into(),
            JTok::Plus => "`+`".into(),
            JTok::Arrow => "`=>`".into(),
            JTok::LParen => "`(`".into(),
            JTok::RParen => "`)`".into(),
            JTok::LBrace => "`{`".into(),
            JTok::RBrace => "`}`".into(),
            JTok::Colon => "`:`".into(),
            JTok::Comma => "`,`".into(),
            JTok::Dot => "`.`".into(),
            JTok::Eof => "end of input".into(),
        }
    }
}

struct JLexer<'a> {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
    _src: std::marker::PhantomData<&'a str>,
}

impl<'a> JLexer<'a> {
    fn new(src: &'a str) -> JLexer<'a> {
        JLexer {
            chars: src.chars().collect(),
            i: 0,
            line: 1,
            col: 1,
            _src: std::marker::PhantomData,
        }
    }

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

    fn skip_trivia(&mut self) -> Result<(), JsError> {
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
                Some('/') if self.peek2() == Some('*') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            Some('*') if self.peek2() == Some('/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                            None => {
                                return Err(JsError::Syntax {
                                    line,
                                    col,
                                    msg: "unterminated comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn lex(mut self) -> Result<Vec<(JTok, u32, u32)>, JsError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else {
                out.push((JTok::Eof, line, col));
                return Ok(out);
            };
            let tok = match c {
                ';' => {
                    self.bump();
                    JTok::Semi
                }
                '(' => {
                    self.bump();
                    JTok::LParen
                }
                ')' => {
                    self.bump();
                    JTok::RParen
                }
                '{' => {
                    self.bump();
                    JTok::LBrace
                }
                '}' => {
                    self.bump();
                    JTok::RBrace
                }
                ':' => {
                    self.bump();
                    JTok::Colon
                }
                ',' => {
                    self.bump();
                    JTok::Comma
                }
                '.' => {
                    self.bump();
                    JTok::Dot
                }
                '=' => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        JTok::Arrow
                    } else {
                        JTok::Assign
                    }
                }
                '+' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        JTok::PlusAssign
                    } else {
                        JTok::Plus
                    }
                }
                d if d.is_ascii_digit() => {
                    let mut n: i64 = 0;
                    while let Some(d) = self.peek() {
                        if let Some(v) = d.to_digit(10) {
                            n = n
                                .checked_mul(10)
                                .and_then(|n| n.checked_add(v as i64))
                                .ok_or(JsError::Syntax {
                                    line,
                                    col,
                                    msg: "number literal out of range".into(),
                                })?;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    JTok::Num(n)
                }
                a if a.is_ascii_alphabetic() || a == '_' || a == '$' => {
                    let mut s = String::new();
                    while let Some(a) = self.peek() {
                        if a.is_ascii_alphanumeric() || a == '_' || a == '$' {
                            s.push(a);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if s == "var" {
                        JTok::Var
                    } else {
                        JTok::Ident(s)
                    }
                }
                other => {
                    return Err(JsError::Syntax {
                        line,
                        col,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            };
            out.push((tok, line, col));
        }
    }
}

struct JParser {
    toks: Vec<(JTok, u32, u32)>,
    pos: usize,
    declared: BTreeSet<String>,
}

/// Parse a program in the subset. Constructs outside the subset — `WeakMap`,
/// promise chains, assignment, arrow functions in statement position —
/// produce located errors naming the construct.
pub fn parse_js(source: &str) -> Result<JsAst, JsError> {
    let toks = JLexer::new(source).lex()?;
    let mut p = JParser {
        toks,
        pos: 0,
        declared: BTreeSet::new(),
    };
    let ast = p.program()?;
    p.expect(JTok::Eof)?;
    Ok(ast)
}

impl JParser {
    fn peek(&self) -> &JTok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, off: usize) -> &JTok {
        let i = (self.pos + off).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn here(&self) -> (u32, u32) {
        let (_, l, c) = self.toks[self.pos];
        (l, c)
    }

    fn bump(&mut self) -> JTok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, msg: impl Into<String>) -> JsError {
        let (line, col) = self.here();
        JsError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn unsupported(&self, at: (u32, u32), construct: impl Into<String>) -> JsError {
        JsError::Unsupported {
            line: at.0,
            col: at.1,
            construct: construct.into(),
        }
    }

    fn expect(&mut self, t: JTok) -> Result<(), JsError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!(
                "expected {}, found {}",
                t.describe(),
                self.peek().describe()
            )))
        }
    }

    fn ident(&mut self) -> Result<String, JsError> {
        match self.peek().clone() {
            JTok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.syntax(format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn program(&mut self) -> Result<JsAst, JsError> {
        let mut stmts = vec![self.stmt()?];
        while *self.peek() != JTok::Eof {
            stmts.push(self.stmt()?);
        }
        let mut ast = stmts.pop().unwrap();
        while let Some(first) = stmts.pop() {
            ast = JsAst::Seq {
                first: Box::new(first),
                rest: Box::new(ast),
            };
        }
        Ok(ast)
    }

    fn stmt(&mut self) -> Result<JsAst, JsError> {
        match self.peek().clone() {
            JTok::Var => {
                self.bump();
                let name = self.ident()?;
                if self.declared.contains(&name) {
                    return Err(self.syntax(format!("identifier `{name}` redeclared")));
                }
                let stmt = if *self.peek() == JTok::Assign {
                    self.bump();
                    if let Some(entries) = self.try_object_init()? {
                        JsAst::DefObject {
                            target: name.clone(),
                            entries,
                        }
                    } else {
                        let init = self.expr(false)?;
                        JsAst::VarDecl {
                            name: name.clone(),
                            init: Some(init),
                        }
                    }
                } else {
                    JsAst::VarDecl {
                        name: name.clone(),
                        init: None,
                    }
                };
                self.expect(JTok::Semi)?;
                self.declared.insert(name);
                Ok(stmt)
            }
            JTok::Ident(name) => {
                let at = self.here();
                self.bump();
                match self.peek() {
                    JTok::PlusAssign => {
                        self.bump();
                        if !self.declared.contains(&name) {
                            return Err(JsError::Syntax {
                                line: at.0,
                                col: at.1,
                                msg: format!("identifier `{name}` used before declaration"),
                            });
                        }
                        let amount = self.expr(false)?;
                        self.expect(JTok::Semi)?;
                        Ok(JsAst::PlusAssign {
                            target: name,
                            amount,
                        })
                    }
                    JTok::Assign => {
                        // Parse the right-hand side first so that a deeper
                        // unsupported construct (`WeakMap()`) names itself.
                        self.bump();
                        self.expr(false)?;
                        Err(self.unsupported(at, "assignment"))
                    }
                    _ => Err(self.syntax(format!(
                        "expected `+=` or `=` after `{name}`, found {}",
                        self.peek().describe()
                    ))),
                }
            }
            other => Err(self.syntax(format!("expected a statement, found {}", other.describe()))),
        }
    }

    /// `def({ ... })` or a bare `{ ... }` object literal in initializer
    /// position; `None` if the initializer is an ordinary expression.
    fn try_object_init(&mut self) -> Result<Option<Vec<(String, JsExpr)>>, JsError> {
        match self.peek() {
            JTok::Ident(s) if s == "def" && *self.peek_at(1) == JTok::LParen => {
                self.bump();
                self.bump();
                let entries = self.object()?;
                self.expect(JTok::RParen)?;
                Ok(Some(entries))
            }
            JTok::LBrace => Ok(Some(self.object()?)),
            _ => Ok(None),
        }
    }

    fn object(&mut self) -> Result<Vec<(String, JsExpr)>, JsError> {
        let at = self.here();
        self.expect(JTok::LBrace)?;
        let mut entries = Vec::new();
        if *self.peek() == JTok::RBrace {
            return Err(JsError::Syntax {
                line: at.0,
                col: at.1,
                msg: "empty object literal".into(),
            });
        }
        loop {
            let key = self.ident()?;
            self.expect(JTok::Colon)?;
            let value = self.expr(true)?;
            entries.push((key, value));
            if *self.peek() == JTok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(JTok::RBrace)?;
        Ok(entries)
    }

    fn expr(&mut self, allow_arrow: bool) -> Result<JsExpr, JsError> {
        if let Some(params) = self.try_arrow_head() {
            let at = self.here();
            if !allow_arrow {
                return Err(self.unsupported(at, "arrow function"));
            }
            self.skip_arrow(params.1)?;
            return Ok(JsExpr::ArrowStub { params: params.0 });
        }
        let mut e = self.primary()?;
        while *self.peek() == JTok::Plus {
            self.bump();
            let rhs = self.primary()?;
            e = JsExpr::Add(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    /// Look ahead for `ident =>` or `( ident, ... ) =>` without consuming.
    /// Returns the parameter list and the token offset of the `=>`.
    fn try_arrow_head(&self) -> Option<(Vec<String>, usize)> {
        match self.peek() {
            JTok::Ident(p) if *self.peek_at(1) == JTok::Arrow => Some((vec![p.clone()], 1)),
            JTok::LParen => {
                let mut params = Vec::new();
                let mut off = 1;
                loop {
                    match self.peek_at(off) {
                        JTok::RParen => {
                            off += 1;
                            break;
                        }
                        JTok::Ident(p) => {
                            params.push(p.clone());
                            off += 1;
                            match self.peek_at(off) {
                                JTok::Comma => off += 1,
                                JTok::RParen => {}
                                _ => return None,
                            }
                        }
                        _ => return None,
                    }
                }
                if *self.peek_at(off) == JTok::Arrow {
                    Some((params, off))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Consume an arrow whose `=>` sits `arrow_off` tokens ahead, then skip
    /// its body as an uninterpreted stub: a braced body to the matching
    /// brace, an expression body to the next delimiter at nesting depth 0.
    fn skip_arrow(&mut self, arrow_off: usize) -> Result<(), JsError> {
        for _ in 0..=arrow_off {
            self.bump();
        }
        if *self.peek() == JTok::LBrace {
            let mut depth = 0usize;
            loop {
                match self.bump() {
                    JTok::LBrace => depth += 1,
                    JTok::RBrace => {
                        depth -= 1;
                        if depth == 0 {
                            return Ok(());
                        }
                    }
                    JTok::Eof => return Err(self.syntax("unterminated arrow function body")),
                    _ => {}
                }
            }
        }
        let mut depth = 0usize;
        loop {
            match self.peek() {
                JTok::LParen | JTok::LBrace => {
                    depth += 1;
                    self.bump();
                }
                JTok::RParen | JTok::RBrace if depth > 0 => {
                    depth -= 1;
                    self.bump();
                }
                JTok::Comma | JTok::RBrace | JTok::RParen | JTok::Semi if depth == 0 => {
                    return Ok(())
                }
                JTok::Eof => return Err(self.syntax("unterminated arrow function body")),
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn primary(&mut self) -> Result<JsExpr, JsError> {
        let at = self.here();
        match self.peek().clone() {
            JTok::Num(n) => {
                self.bump();
                Ok(JsExpr::NumLit(n))
            }
            JTok::LParen => {
                self.bump();
                let e = self.expr(false)?;
                self.expect(JTok::RParen)?;
                Ok(e)
            }
            JTok::Ident(name) if name == "new" => {
                self.bump();
                let target = match self.peek() {
                    JTok::Ident(t) => format!("new {t}(...)"),
                    _ => "new expression".to_string(),
                };
                Err(self.unsupported(at, target))
            }
            JTok::Ident(name) => {
                self.bump();
                if *self.peek() == JTok::LParen {
                    // A call. None are translatable; name the interesting
                    // ones so the error points at the right culprit.
                    self.skip_parens()?;
                    if name == "WeakMap" {
                        return Err(self.unsupported(at, "WeakMap"));
                    }
                    if name == "Q" && *self.peek() == JTok::Dot {
                        if let JTok::Ident(m) = self.peek_at(1) {
                            if m == "then" {
                                return Err(self.unsupported(at, "Q(...).then"));
                            }
                        }
                    }
                    if name == "def" {
                        return Err(
                            self.unsupported(at, "def(...) outside a variable declaration")
                        );
                    }
                    return Err(self.unsupported(at, format!("call to `{name}`")));
                }
                if *self.peek() == JTok::Dot {
                    return Err(self.unsupported(at, format!("member access on `{name}`")));
                }
                if !self.declared.contains(&name) {
                    return Err(JsError::Syntax {
                        line: at.0,
                        col: at.1,
                        msg: format!("identifier `{name}` used before declaration"),
                    });
                }
                Ok(JsExpr::Ident(name))
            }
            other => Err(self.syntax(format!("expected an expression, found {}", other.describe()))),
        }
    }

    fn skip_parens(&mut self) -> Result<(), JsError> {
        debug_assert_eq!(*self.peek(), JTok::LParen);
        let mut depth = 0usize;
        loop {
            match self.bump() {
                JTok::LParen => depth += 1,
                JTok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(());
                    }
                }
                JTok::Eof => return Err(self.syntax("unterminated argument list")),
                _ => {}
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Translation
// ---------------------------------------------------------------------------

/// Translate a statement (tree) against an environment, with `k` as the
/// continuation channel signalled when the program's effects have landed.
///
/// The result references `Cell` and `Map`/`Map{n}` definitions; see
/// [`cell_def`], [`map_def`], and [`translate_program`] which bundles them.
pub fn translate(ast: &JsAst, env: &Env, k: &Name) -> Result<Surface, JsError> {
    let pairs: Vec<(&String, &Name)> = env.vars.iter().collect();
    for (i, (ida, na)) in pairs.iter().enumerate() {
        for (idb, nb) in &pairs[i + 1..] {
            if name_equiv(na, nb) {
                return Err(translate_err(format!(
                    "identifiers `{ida}` and `{idb}` share a channel"
                )));
            }
        }
    }
    let mut vars = BTreeMap::new();
    for (ident, chan) in &env.vars {
        vars.insert(ident.clone(), channel_ident(chan)?);
    }
    let k = channel_ident(k)?;
    let mut used: BTreeSet<String> = vars.keys().cloned().collect();
    used.extend(vars.values().cloned());
    used.insert(k.clone());
    collect_idents(ast, &mut used);
    let mut tx = Tx {
        vars,
        used,
        counters: BTreeMap::new(),
    };
    tx.stmt(ast, &k)
}

/// Translate a whole program: the translator's `Cell`, one `Map` definition
/// per object arity used, and the translated body with every declared
/// variable on the channel named after it and `done` as the final
/// continuation.
pub fn translate_program(ast: &JsAst) -> Result<Surface, JsError> {
    let env = Env::for_program(ast);
    let body = translate(ast, &env, &env.k)?;
    let mut parts = Vec::new();
    if uses_cells(ast) {
        parts.push(cell_def());
    }
    let mut arities = BTreeSet::new();
    collect_arities(ast, &mut arities);
    for n in arities {
        parts.push(map_def(n));
    }
    parts.push(body);
    Ok(Surface::par(parts))
}

/// The channel ident a name renders to in surface output.
fn channel_ident(n: &Name) -> Result<String, JsError> {
    match n.unquote() {
        Proc::Ground(GroundTerm::Str(s)) if ident_shaped(s) => Ok(s.clone()),
        _ => Err(translate_err(format!(
            "channel {n} does not render as a surface identifier"
        ))),
    }
}

fn collect_decls(ast: &JsAst, out: &mut Vec<String>) {
    match ast {
        JsAst::VarDecl { name, .. } => out.push(name.clone()),
        JsAst::DefObject { target, .. } => out.push(target.clone()),
        JsAst::Seq { first, rest } => {
            collect_decls(first, out);
            collect_decls(rest, out);
        }
        JsAst::PlusAssign { .. } => {}
    }
}

fn collect_idents(ast: &JsAst, out: &mut BTreeSet<String>) {
    fn expr(e: &JsExpr, out: &mut BTreeSet<String>) {
        match e {
            JsExpr::NumLit(_) => {}
            JsExpr::Ident(id) => {
                out.insert(id.clone());
            }
            JsExpr::Add(a, b) => {
                expr(a, out);
                expr(b, out);
            }
            JsExpr::ArrowStub { params } => out.extend(params.iter().cloned()),
        }
    }
    match ast {
        JsAst::VarDecl { name, init } => {
            out.insert(name.clone());
            if let Some(e) = init {
                expr(e, out);
            }
        }
        JsAst::Seq { first, rest } => {
            collect_idents(first, out);
            collect_idents(rest, out);
        }
        JsAst::PlusAssign { target, amount } => {
            out.insert(target.clone());
            expr(amount, out);
        }
        JsAst::DefObject { target, entries } => {
            out.insert(target.clone());
            for (key, value) in entries {
                out.insert(key.clone());
                expr(value, out);
            }
        }
    }
}

fn uses_cells(ast: &JsAst) -> bool {
    match ast {
        JsAst::VarDecl { .. } => true,
        JsAst::PlusAssign { .. } => true,
        JsAst::DefObject { .. } => false,
        JsAst::Seq { first, rest } => uses_cells(first) || uses_cells(rest),
    }
}

fn collect_arities(ast: &JsAst, out: &mut BTreeSet<usize>) {
    match ast {
        JsAst::DefObject { entries, .. } => {
            out.insert(entries.len());
        }
        JsAst::Seq { first, rest } => {
            collect_arities(first, out);
            collect_arities(rest, out);
        }
        _ => {}
    }
}

struct Tx {
    /// Source identifier to channel identifier.
    vars: BTreeMap<String, String>,
    used: BTreeSet<String>,
    counters: BTreeMap<&'static str, usize>,
}

impl Tx {
    fn fresh(&mut self, prefix: &'static str) -> String {
        loop {
            let n = self.counters.entry(prefix).or_insert(0);
            *n += 1;
            let candidate = format!("{prefix}{n}");
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    fn channel(&self, ident: &str) -> Result<String, JsError> {
        self.vars
            .get(ident)
            .cloned()
            .ok_or_else(|| translate_err(format!("unbound identifier `{ident}`")))
    }

    fn declare(&mut self, ident: &str) -> String {
        let chan = self
            .vars
            .get(ident)
            .cloned()
            .unwrap_or_else(|| ident.to_string());
        self.vars.insert(ident.to_string(), chan.clone());
        self.used.insert(chan.clone());
        chan
    }

    fn stmt(&mut self, ast: &JsAst, k: &str) -> Result<Surface, JsError> {
        match ast {
            JsAst::VarDecl { .. } | JsAst::PlusAssign { .. } | JsAst::DefObject { .. } => {
                let install = self.effect(ast)?;
                Ok(install(self, signal(k)))
            }
            JsAst::Seq { first, rest } => match first.as_ref() {
                // An uninitialized declaration or a map installation takes
                // effect instantly, so its continuation runs in parallel
                // rather than behind a handshake.
                JsAst::VarDecl { init: None, .. } | JsAst::DefObject { .. } => {
                    let install = self.effect(first)?;
                    let rest = self.stmt(rest, k)?;
                    Ok(install(self, rest))
                }
                _ => {
                    let k1 = self.fresh("k");
                    let head = self.stmt(first, &k1)?;
                    let tail = self.stmt(rest, k)?;
                    Ok(Surface::New {
                        binders: vec![k1.clone()],
                        body: Box::new(Surface::par(vec![
                            head,
                            Surface::Input {
                                channel: SName::Ident(k1),
                                pattern: vec![],
                                body: Box::new(tail),
                            },
                        ])),
                    })
                }
            },
        }
    }

    /// A single statement's effect, abstracted over what runs alongside or
    /// after it: the returned closure places its argument where the
    /// statement's continuation belongs.
    #[allow(clippy::type_complexity)]
    fn effect(
        &mut self,
        ast: &JsAst,
    ) -> Result<Box<dyn FnOnce(&mut Tx, Surface) -> Surface>, JsError> {
        match ast {
            JsAst::VarDecl { name, init: None } => {
                let chan = self.declare(name);
                let cell = Surface::Call {
                    name: "Cell".into(),
                    args: vec![Surface::Ident(chan), Surface::Ground(SGround::Undefined)],
                };
                Ok(Box::new(move |_, then| Surface::par(vec![cell, then])))
            }
            JsAst::VarDecl {
                name,
                init: Some(e),
            } => {
                let mut reads = Vec::new();
                let value = self.value_of(e, &mut reads)?;
                let chan = self.declare(name);
                Ok(Box::new(move |tx, then| {
                    let cell = Surface::Call {
                        name: "Cell".into(),
                        args: vec![Surface::Ident(chan), value],
                    };
                    tx.with_reads(reads, Surface::par(vec![cell, then]))
                }))
            }
            JsAst::PlusAssign { target, amount } => {
                let chan = self.channel(target)?;
                let mut reads = Vec::new();
                let value = self.value_of(amount, &mut reads)?;
                let rslt = self.fresh("rslt");
                let bind = self.fresh("v");
                Ok(Box::new(move |tx, then| {
                    // then = the continuation signal; the cell's `set`
                    // acknowledgment is that very signal, so nothing runs
                    // until the write has landed.
                    let ack = match then {
                        Surface::Output { channel, args } if args.is_empty() => channel,
                        other => {
                            // A non-signal continuation still sequences
                            // correctly through a private acknowledgment.
                            let ackn = tx.fresh("k");
                            return tx.with_reads(
                                reads,
                                Surface::New {
                                    binders: vec![ackn.clone()],
                                    body: Box::new(Surface::par(vec![
                                        rmw(&chan, &rslt, &bind, value, SName::Ident(ackn.clone())),
                                        Surface::Input {
                                            channel: SName::Ident(ackn),
                                            pattern: vec![],
                                            body: Box::new(other),
                                        },
                                    ])),
                                },
                            );
                        }
                    };
                    tx.with_reads(reads, rmw(&chan, &rslt, &bind, value, ack))
                }))
            }
            JsAst::DefObject { target, entries } => {
                let chan = self.declare(target);
                let mut args = vec![Surface::Ident(chan)];
                for (key, value) in entries {
                    args.push(Surface::Ground(SGround::Str(key.clone())));
                    args.push(self.entry_value(value)?);
                }
                let map = Surface::Call {
                    name: map_name(entries.len()),
                    args,
                };
                Ok(Box::new(move |_, then| Surface::par(vec![map, then])))
            }
            JsAst::Seq { .. } => Err(translate_err("nested sequence is not a single statement")),
        }
    }

    /// The value form of an expression. Variable reads are recorded and
    /// later staged as get probes around the consuming statement.
    fn value_of(
        &mut self,
        e: &JsExpr,
        reads: &mut Vec<(String, String)>,
    ) -> Result<Surface, JsError> {
        match e {
            JsExpr::NumLit(n) => Ok(Surface::Ground(SGround::Int(*n))),
            JsExpr::Ident(id) => {
                let chan = self.channel(id)?;
                let bind = self.fresh("v");
                reads.push((chan, bind.clone()));
                Ok(Surface::Ident(bind))
            }
            JsExpr::Add(a, b) => {
                let a = self.value_of(a, reads)?;
                let b = self.value_of(b, reads)?;
                Ok(Surface::Add(Box::new(a), Box::new(b)))
            }
            JsExpr::ArrowStub { .. } => Err(translate_err(
                "arrow function has no value outside an object literal",
            )),
        }
    }

    /// Object entry values are installed as constants: numbers and sums of
    /// numbers stay ground, an identifier denotes the named variable's
    /// channel, an arrow is an inert stub.
    fn entry_value(&mut self, e: &JsExpr) -> Result<Surface, JsError> {
        fn ground(e: &JsExpr) -> Result<Surface, JsError> {
            match e {
                JsExpr::NumLit(n) => Ok(Surface::Ground(SGround::Int(*n))),
                JsExpr::Add(a, b) => {
                    Ok(Surface::Add(Box::new(ground(a)?), Box::new(ground(b)?)))
                }
                _ => Err(translate_err(
                    "object entries must be constants, channels, or arrows",
                )),
            }
        }
        match e {
            JsExpr::Ident(id) => Ok(Surface::Ident(self.channel(id)?)),
            JsExpr::ArrowStub { params } => Ok(Surface::Ground(SGround::Str(format!(
                "<arrow ({})>",
                params.join(", ")
            )))),
            other => ground(other),
        }
    }

    /// Wrap `inner` in one get probe per recorded read, first read
    /// outermost, so values are bound before use.
    fn with_reads(&mut self, reads: Vec<(String, String)>, inner: Surface) -> Surface {
        reads.into_iter().rev().fold(inner, |acc, (chan, bind)| {
            let rslt = self.fresh("rslt");
            Surface::New {
                binders: vec![rslt.clone()],
                body: Box::new(Surface::par(vec![
                    Surface::output_label(&chan, "get", vec![Surface::Ident(rslt.clone())]),
                    Surface::Input {
                        channel: SName::Ident(rslt),
                        pattern: vec![SPat::Ident(bind)],
                        body: Box::new(acc),
                    },
                ])),
            }
        })
    }
}

fn signal(k: &str) -> Surface {
    Surface::Output {
        channel: SName::Ident(k.to_string()),
        args: vec![],
    }
}

/// `new(rslt){ chan!get(rslt) | rslt?(v) => chan!set(v + value, ack) }`
fn rmw(chan: &str, rslt: &str, bind: &str, value: Surface, ack: SName) -> Surface {
    let sum = Surface::Add(Box::new(Surface::Ident(bind.to_string())), Box::new(value));
    Surface::New {
        binders: vec![rslt.to_string()],
        body: Box::new(Surface::par(vec![
            Surface::output_label(chan, "get", vec![Surface::Ident(rslt.to_string())]),
            Surface::Input {
                channel: SName::Ident(rslt.to_string()),
                pattern: vec![SPat::Ident(bind.to_string())],
                body: Box::new(Surface::Output {
                    channel: SName::Ident(chan.to_string()),
                    args: vec![
                        Surface::Ground(SGround::Str("set".into())),
                        sum,
                        Surface::Drop(ack),
                    ],
                }),
            },
        ])),
    }
}

// ---------------------------------------------------------------------------
// Prelude gadgets
// ---------------------------------------------------------------------------

const CELL_CLASSIC: &str = r#"
def Cell( slot, state ) => {
  new ( v ) {
    v!( state )
    match {
      slot ? get( ret ) => {
        v?( s ) => ret!( s )
        Cell( slot, s )
      }
      slot ? set( s ) => { Cell( slot, s ) }
    }
  }
}
"#;

const MAP_CLASSIC: &str = r#"
def Map( chan, key1, state1, key2, state2 ) => {
  new ( v1, v2 ) {
    v1!( state1 )
    v2!( state2 )
    chan ? get( key1, ret ) => {
      v1?( x ) => ret!( x )
      Map( chan, key1, state1, key2, state2 )
    }
    chan ? get( key2, ret ) => {
      v2?( x ) => ret!( x )
      Map( chan, key1, state1, key2, state2 )
    }
  }
}
"#;

const CELL_ACKED: &str = r#"
def Cell( slot, state ) => {
  new ( v ) {
    v!( state )
    match {
      slot ? get( ret ) => {
        v?( s ) => {
          ret!( s )
          Cell( slot, s )
        }
      }
      slot ? set( s, ack ) => {
        v?( old ) => {
          ack!()
          Cell( slot, s )
        }
      }
    }
  }
}
"#;

/// The classic cell and two-key map definitions, as written.
pub fn prelude() -> Vec<Surface> {
    vec![
        parse_program(CELL_CLASSIC).expect("cell prelude parses"),
        parse_program(MAP_CLASSIC).expect("map prelude parses"),
    ]
}

/// The translator's cell: `set` carries an acknowledgment channel fired
/// once the old value is drained, and each branch's recursion waits for
/// the drain, so no stale private-state token survives an update.
pub fn cell_def() -> Surface {
    parse_program(CELL_ACKED).expect("acked cell parses")
}

fn map_name(n: usize) -> String {
    if n == 2 {
        "Map".into()
    } else {
        format!("Map{n}")
    }
}

/// An `n`-entry map definition in the shape of the classic two-key listing:
/// one private channel and one get branch per key, with per-key dispatch
/// through the bound key parameters.
pub fn map_def(n: usize) -> Surface {
    assert!(n > 0, "a map serves at least one key");
    let mut params = vec!["chan".to_string()];
    for i in 1..=n {
        params.push(format!("key{i}"));
        params.push(format!("state{i}"));
    }
    let recurse = Surface::Call {
        name: map_name(n),
        args: params.iter().map(|p| Surface::Ident(p.clone())).collect(),
    };
    let binders: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut body = Vec::new();
    for i in 1..=n {
        body.push(Surface::Output {
            channel: SName::Ident(format!("v{i}")),
            args: vec![Surface::Ident(format!("state{i}"))],
        });
    }
    for i in 1..=n {
        body.push(Surface::Input {
            channel: SName::Ident("chan".into()),
            pattern: vec![
                SPat::Literal(SName::Ident("get".into())),
                SPat::Ident(format!("key{i}")),
                SPat::Ident("ret".into()),
            ],
            body: Box::new(Surface::par(vec![
                Surface::Input {
                    channel: SName::Ident(format!("v{i}")),
                    pattern: vec![SPat::Ident("x".into())],
                    body: Box::new(Surface::Output {
                        channel: SName::Ident("ret".into()),
                        args: vec![Surface::Ident("x".into())],
                    }),
                },
                recurse.clone(),
            ])),
        });
    }
    Surface::Def {
        name: map_name(n),
        params,
        body: Box::new(Surface::New {
            binders,
            body: Box::new(Surface::par(body)),
        }),
        applied: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduce::state_graph;
    use crate::sugar::desugar;
    use crate::syntax::{free_names, struct_congruent};

    fn run_js(src: &str, probe: &str) -> crate::reduce::StateGraph {
        let ast = parse_js(src).expect("parse");
        let translated = translate_program(&ast).expect("translate");
        let probe = parse_program(probe).expect("probe parses");
        let p = desugar(&Surface::par(vec![translated, probe])).expect("desugar");
        state_graph(&p, 24, 20_000)
    }

    fn terminal_states(g: &crate::reduce::StateGraph) -> Vec<&Proc> {
        g.states
            .iter()
            .enumerate()
            .filter(|(i, _)| g.edges[*i].is_empty())
            .map(|(_, s)| s)
            .collect()
    }

    fn has_component(state: &Proc, want: &Proc) -> bool {
        match state {
            Proc::Par(ps) => ps.iter().any(|c| struct_congruent(c, want)),
            other => struct_congruent(other, want),
        }
    }

    #[test]
    fn parse_shapes() {
        assert_eq!(
            parse_js("var x;").unwrap(),
            JsAst::VarDecl {
                name: "x".into(),
                init: None
            }
        );
        let balance = parse_js("var balance = initAmt; balance += amount;");
        // initAmt is undeclared in isolation.
        assert!(matches!(balance, Err(JsError::Syntax { .. })));
        let two = parse_js("var b = 5; b += 3;").unwrap();
        match two {
            JsAst::Seq { first, rest } => {
                assert_eq!(
                    *first,
                    JsAst::VarDecl {
                        name: "b".into(),
                        init: Some(JsExpr::NumLit(5))
                    }
                );
                assert_eq!(
                    *rest,
                    JsAst::PlusAssign {
                        target: "b".into(),
                        amount: JsExpr::NumLit(3)
                    }
                );
            }
            other => panic!("expected Seq, got {other:?}"),
        }
        let obj = parse_js("var p = def({ getBalance: () => b, label: 7 });").unwrap();
        match obj {
            JsAst::DefObject { target, entries } => {
                assert_eq!(target, "p");
                assert_eq!(entries.len(), 2);
                assert_eq!(entries[0].0, "getBalance");
                assert!(matches!(entries[0].1, JsExpr::ArrowStub { .. }));
                assert_eq!(entries[1], ("label".into(), JsExpr::NumLit(7)));
            }
            other => panic!("expected DefObject, got {other:?}"),
        }
    }

    #[test]
    fn out_of_subset_constructs_are_named() {
        let e = parse_js("var m = WeakMap();").unwrap_err();
        match e {
            JsError::Unsupported {
                line,
                col,
                construct,
            } => {
                assert_eq!(construct, "WeakMap");
                assert_eq!((line, col), (1, 9));
            }
            other => panic!("expected unsupported, got {other}"),
        }
        let e = parse_js("var s; var p = Q(s).then(r => 0);").unwrap_err();
        assert!(matches!(
            e,
            JsError::Unsupported { ref construct, .. } if construct == "Q(...).then"
        ));
        let e = parse_js("var x; x = 3;").unwrap_err();
        assert!(matches!(
            e,
            JsError::Unsupported { ref construct, .. } if construct == "assignment"
        ));
        // The right-hand side is diagnosed before the assignment itself.
        let e = parse_js("var m; m = WeakMap();").unwrap_err();
        assert!(matches!(
            e,
            JsError::Unsupported { ref construct, .. } if construct == "WeakMap"
        ));
    }

    #[test]
    fn arrows_are_stubs_confined_to_object_values() {
        let e = parse_js("var f = () => 0;").unwrap_err();
        assert!(matches!(
            e,
            JsError::Unsupported { ref construct, .. } if construct == "arrow function"
        ));
        // Complex bodies are skipped, not interpreted.
        let ok = parse_js(
            "var x; var p = def({ deposit: (amount, srcP) => { x += amount; q(srcP); } });",
        );
        assert!(ok.is_ok(), "{ok:?}");
    }

    #[test]
    fn uninitialized_declaration_is_a_parallel_cell() {
        let ast = parse_js("var x; var y;").unwrap();
        let out = translate(&ast, &Env::for_program(&ast), &Name::var("done")).unwrap();
        let expect = Surface::par(vec![
            Surface::Call {
                name: "Cell".into(),
                args: vec![
                    Surface::Ident("x".into()),
                    Surface::Ground(SGround::Undefined),
                ],
            },
            Surface::Call {
                name: "Cell".into(),
                args: vec![
                    Surface::Ident("y".into()),
                    Surface::Ground(SGround::Undefined),
                ],
            },
            signal("done"),
        ]);
        assert_eq!(out, expect);
    }

    #[test]
    fn initialized_declaration_handshakes() {
        let ast = parse_js("var b = 5; var c;").unwrap();
        let out = translate(&ast, &Env::for_program(&ast), &Name::var("done")).unwrap();
        match out {
            Surface::New { binders, body } => {
                assert_eq!(binders, vec!["k1".to_string()]);
                match *body {
                    Surface::Par(parts) => {
                        assert_eq!(parts.len(), 3);
                        assert!(parts.iter().any(|p| matches!(
                            p,
                            Surface::Input { channel: SName::Ident(c), pattern, .. }
                                if c == "k1" && pattern.is_empty()
                        )));
                    }
                    other => panic!("expected par under new, got {other:?}"),
                }
            }
            other => panic!("expected new(k1), got {other:?}"),
        }
    }

    #[test]
    fn unbound_identifier_is_a_translation_error() {
        let ast = JsAst::PlusAssign {
            target: "ghost".into(),
            amount: JsExpr::NumLit(1),
        };
        let e = translate(&ast, &Env::new(Name::var("done")), &Name::var("done")).unwrap_err();
        assert_eq!(
            e,
            JsError::Translate {
                msg: "unbound identifier `ghost`".into()
            }
        );
    }

    #[test]
    fn distinct_identifiers_need_distinct_channels() {
        let mut env = Env::new(Name::var("done"));
        env.bind("a", Name::var("shared"));
        env.bind("b", Name::var("shared"));
        let ast = parse_js("var a;").unwrap();
        assert!(matches!(
            translate(&ast, &env, &Name::var("done")),
            Err(JsError::Translate { .. })
        ));
    }

    #[test]
    fn balance_program_delivers_eight_on_every_trace() {
        let g = run_js(
            "var b = 5; b += 3;",
            "done?() => {\n  b!get(ret)\n  ret?(v) => obs!(*v)\n}",
        );
        assert!(!g.truncated, "exploration must be exhaustive");
        let want = desugar(&parse_program("obs!(8)").unwrap()).unwrap();
        let finals = terminal_states(&g);
        assert!(!finals.is_empty());
        for s in finals {
            assert!(has_component(s, &want), "terminal state without obs!(8): {s}");
        }
    }

    #[test]
    fn one_continuation_signal_per_statement() {
        let ast = parse_js("var b = 5;").unwrap();
        let translated = translate_program(&ast).unwrap();
        let p = desugar(&translated).expect("desugar");
        let g = state_graph(&p, 24, 5_000);
        assert!(!g.truncated);
        let done = desugar(&parse_program("done!()").unwrap()).unwrap();
        let finals = terminal_states(&g);
        assert!(!finals.is_empty());
        for s in finals {
            let count = match s {
                Proc::Par(ps) => ps.iter().filter(|c| struct_congruent(c, &done)).count(),
                one => usize::from(struct_congruent(one, &done)),
            };
            assert_eq!(count, 1, "state {s}");
        }
    }

    #[test]
    fn object_literals_install_a_map() {
        let src = "var b; var purse = def({ getBalance: () => b, source: b, label: 40 + 2 });";
        let ast = parse_js(src).unwrap();
        let translated = translate_program(&ast).unwrap();
        // Installation is immediate: a probe can read a key right away.
        let p = desugar(&Surface::par(vec![
            translated,
            parse_program("purse!get(\"label\", ret)\nret?(v) => obs!(*v)").unwrap(),
        ]))
        .expect("desugar");
        let g = state_graph(&p, 24, 20_000);
        assert!(!g.truncated);
        let want = desugar(&parse_program("obs!(42)").unwrap()).unwrap();
        assert!(g.states.iter().any(|s| has_component(s, &want)));
    }

    #[test]
    fn prelude_parses_and_is_closed() {
        // Closed up to the message-label vocabulary: labels sit in literal
        // pattern position, so they are (deliberately global) free names.
        for def in prelude() {
            let p = desugar(&def).expect("prelude desugars");
            let leaked = free_names(&p).filtered(|n| !crate::sugar::is_reserved(n));
            for n in leaked.iter() {
                assert!(
                    name_equiv(n, &Name::var("get")) || name_equiv(n, &Name::var("set")),
                    "prelude definition leaks a non-label name: {n}"
                );
            }
        }
        assert!(!mentions_label(&prelude()[1], "set"));
        assert!(mentions_label(&prelude()[0], "set"));
    }

    fn mentions_label(s: &Surface, label: &str) -> bool {
        fn walk(s: &Surface, label: &str) -> bool {
            let in_name = |n: &SName| match n {
                SName::Ident(s) => s == label,
                SName::Quote(q) => walk(q, label),
            };
            match s {
                Surface::Ground(SGround::Str(t)) => t == label,
                Surface::Input {
                    channel,
                    pattern,
                    body,
                } => {
                    in_name(channel)
                        || walk(body, label)
                        || pattern.iter().any(|p| match p {
                            SPat::Ident(i) => i == label,
                            SPat::Binder(n) | SPat::Literal(n) => in_name(n),
                        })
                }
                Surface::Output { channel, args } => {
                    in_name(channel) || args.iter().any(|a| walk(a, label))
                }
                Surface::Call { args, .. } => args.iter().any(|a| walk(a, label)),
                Surface::Choice(ps) | Surface::Par(ps) | Surface::Match(ps) => {
                    ps.iter().any(|p| walk(p, label))
                }
                Surface::Drop(n) => in_name(n),
                Surface::Add(a, b) | Surface::Sub(a, b) => walk(a, label) || walk(b, label),
                Surface::Quoted(q) => walk(q, label),
                Surface::New { body, .. } => walk(body, label),
                Surface::Def { body, applied, .. } => {
                    walk(body, label)
                        || applied
                            .as_ref()
                            .is_some_and(|args| args.iter().any(|a| walk(a, label)))
                }
                Surface::Stop | Surface::Ground(_) | Surface::Ident(_) => false,
            }
        }
        walk(s, label)
    }

    #[test]
    fn generated_map_matches_the_classic_listing() {
        assert_eq!(map_def(2), prelude()[1]);
        // Other arities desugar and stay closed up to the `get` label.
        let p = desugar(&map_def(3)).expect("map3 desugars");
        let leaked = free_names(&p).filtered(|n| !crate::sugar::is_reserved(n));
        for n in leaked.iter() {
            assert!(name_equiv(n, &Name::var("get")), "map3 leaks {n}");
        }
    }

    #[test]
    fn sequencing_reassociates_up_to_weak_bisimulation() {
        let a = || JsAst::VarDecl {
            name: "x".into(),
            init: Some(JsExpr::NumLit(1)),
        };
        let b = || JsAst::PlusAssign {
            target: "x".into(),
            amount: JsExpr::NumLit(2),
        };
        let c = || JsAst::PlusAssign {
            target: "x".into(),
            amount: JsExpr::NumLit(4),
        };
        let seq = |first: JsAst, rest: JsAst| JsAst::Seq {
            first: Box::new(first),
            rest: Box::new(rest),
        };
        let left = seq(a(), seq(b(), c()));
        let right = seq(seq(a(), b()), c());
        let env = Env::for_program(&left);
        let lower = |ast: &JsAst| {
            let body = translate(ast, &env, &env.k).unwrap();
            desugar(&Surface::par(vec![cell_def(), body])).unwrap()
        };
        let (p, q) = (lower(&left), lower(&right));
        let obs = crate::bisim::default_observation(&p, &q);
        let r = crate::bisim::bisim(&p, &q, &obs, 30, 20_000);
        assert_eq!(
            r.verdict,
            crate::bisim::Verdict::Equivalent,
            "{:?}",
            r.reason
        );
    }
}
