//! Surface language: AST, desugaring into the core calculus, replication
//! encodings, and fresh-name generation.
//!
//! The surface adds `def` (recursive definitions with application syntax
//! `X(args)`), `new` (fresh channels), `match` (input-guarded choice),
//! message labels (`chan!get(x)` / `chan?get(ret) => P`), blocks with
//! newline-as-par, and ground arithmetic.

pub mod desugar;
pub mod encode;

pub use desugar::{desugar, DesugarError};
pub use encode::{d_of, fresh_name, is_reserved, replicate_eager, replicate_lazy};

use std::fmt;

use crate::syntax::pretty::ident_shaped;

/// Surface process terms, as parsed. Identifier resolution is deferred to
/// desugaring, which tracks lexical scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Surface {
    Stop,
    Ground(SGround),
    Input {
        channel: SName,
        pattern: Vec<SPat>,
        body: Box<Surface>,
    },
    Output {
        channel: SName,
        args: Vec<Surface>,
    },
    /// `X( args )`: invocation of a lexically visible `def`.
    Call { name: String, args: Vec<Surface> },
    Choice(Vec<Surface>),
    Par(Vec<Surface>),
    Drop(SName),
    Add(Box<Surface>, Box<Surface>),
    Sub(Box<Surface>, Box<Surface>),
    /// Identifier in value position: a dereference if bound, the identifier's
    /// own string if free.
    Ident(String),
    /// Explicit name in value position (`@5`, `@{ P }`): delivers that name,
    /// i.e. desugars to the quoted process itself.
    Quoted(Box<Surface>),
    New {
        binders: Vec<String>,
        body: Box<Surface>,
    },
    Def {
        name: String,
        params: Vec<String>,
        body: Box<Surface>,
        /// `Some` for the process-expression form `(def X(..) => P)(Q..)`;
        /// `None` for a declaration scoping over the rest of its block.
        applied: Option<Vec<Surface>>,
    },
    Match(Vec<Surface>),
}

/// Name expression: an identifier or an explicit quote.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SName {
    Ident(String),
    Quote(Box<Surface>),
}

/// Input pattern slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SPat {
    /// Bare identifier: binds if not already in scope, otherwise matches the
    /// in-scope name literally (enabling per-key dispatch).
    Ident(String),
    /// `@nameexpr`: a binder with an explicitly given name.
    Binder(SName),
    /// `=nameexpr`: matches the delivered name literally, binds nothing.
    Literal(SName),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SGround {
    Int(i64),
    Str(String),
    Undefined,
}

impl Surface {
    pub fn par(parts: Vec<Surface>) -> Surface {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Surface::Stop => {}
                Surface::Par(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Surface::Stop,
            1 => out.pop().unwrap(),
            _ => Surface::Par(out),
        }
    }

    pub fn output_label(channel: &str, label: &str, mut args: Vec<Surface>) -> Surface {
        let mut all = vec![Surface::Ground(SGround::Str(label.to_string()))];
        all.append(&mut args);
        Surface::Output {
            channel: SName::Ident(channel.to_string()),
            args: all,
        }
    }

    /// Render as multi-line surface source (the `.rho` format).
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        write_stmt(self, 0, &mut out);
        out.push('\n');
        out
    }
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

/// Statement context: parallel components go on separate lines.
fn write_stmt(s: &Surface, level: usize, out: &mut String) {
    match s {
        Surface::Par(ps) => {
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                    indent(level, out);
                }
                write_stmt(p, level, out);
            }
        }
        Surface::New { binders, body } => {
            out.push_str("new(");
            out.push_str(&binders.join(", "));
            out.push_str(") {\n");
            indent(level + 1, out);
            write_stmt(body, level + 1, out);
            out.push('\n');
            indent(level, out);
            out.push('}');
        }
        Surface::Def {
            name,
            params,
            body,
            applied,
        } => {
            out.push_str("def ");
            out.push_str(name);
            out.push('(');
            out.push_str(&params.join(", "));
            out.push_str(") => {\n");
            indent(level + 1, out);
            write_stmt(body, level + 1, out);
            out.push('\n');
            indent(level, out);
            out.push('}');
            if let Some(args) = applied {
                write_args(args, level, out);
            }
        }
        Surface::Match(branches) => {
            out.push_str("match {\n");
            for b in branches {
                indent(level + 1, out);
                write_stmt(b, level + 1, out);
                out.push('\n');
            }
            indent(level, out);
            out.push('}');
        }
        Surface::Input {
            channel,
            pattern,
            body,
        } => {
            write_sname(channel, level, out);
            out.push('?');
            let mut rest: &[SPat] = pattern;
            if let Some(SPat::Literal(SName::Ident(lbl))) = pattern.first() {
                if ident_shaped(lbl) {
                    out.push_str(lbl);
                    rest = &pattern[1..];
                }
            }
            out.push('(');
            for (i, p) in rest.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match p {
                    SPat::Ident(id) => out.push_str(id),
                    SPat::Binder(n) => {
                        out.push('@');
                        write_sname_body(n, level, out);
                    }
                    SPat::Literal(n) => {
                        out.push('=');
                        write_sname(n, level, out);
                    }
                }
            }
            out.push_str(") => ");
            match body.as_ref() {
                Surface::Par(_) | Surface::New { .. } | Surface::Match(_) | Surface::Def { .. } => {
                    out.push_str("{\n");
                    indent(level + 1, out);
                    write_stmt(body, level + 1, out);
                    out.push('\n');
                    indent(level, out);
                    out.push('}');
                }
                simple => write_expr(simple, level, out),
            }
        }
        other => write_expr(other, level, out),
    }
}

fn write_args(args: &[Surface], level: usize, out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(a, level, out);
    }
    out.push(')');
}

/// Expression context: single line.
fn write_expr(s: &Surface, level: usize, out: &mut String) {
    match s {
        Surface::Stop => out.push('0'),
        Surface::Ground(g) => match g {
            SGround::Int(i) => out.push_str(&i.to_string()),
            SGround::Str(st) => {
                out.push('"');
                for c in st.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            SGround::Undefined => out.push_str("undefined"),
        },
        Surface::Ident(id) => out.push_str(id),
        Surface::Quoted(inner) => {
            out.push('@');
            write_quote_body(inner, level, out);
        }
        Surface::Drop(n) => {
            out.push('*');
            write_sname(n, level, out);
        }
        Surface::Output { channel, args } => {
            write_sname(channel, level, out);
            out.push('!');
            let mut rest: &[Surface] = args;
            if let Some(Surface::Ground(SGround::Str(lbl))) = args.first() {
                if ident_shaped(lbl) {
                    out.push_str(lbl);
                    rest = &args[1..];
                }
            }
            write_args(rest, level, out);
        }
        Surface::Call { name, args } => {
            out.push_str(name);
            write_args(args, level, out);
        }
        Surface::Add(a, b) => {
            write_expr(a, level, out);
            out.push_str(" + ");
            write_expr_operand(b, level, out);
        }
        Surface::Sub(a, b) => {
            write_expr(a, level, out);
            out.push_str(" - ");
            write_expr_operand(b, level, out);
        }
        Surface::Choice(bs) => {
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                write_expr(b, level, out);
            }
        }
        Surface::Par(ps) => {
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_expr(p, level, out);
            }
        }
        // Statement-shaped terms forced into expression context.
        other => write_stmt(other, level, out),
    }
}

fn write_expr_operand(s: &Surface, level: usize, out: &mut String) {
    match s {
        Surface::Add(_, _) | Surface::Sub(_, _) => {
            out.push('(');
            write_expr(s, level, out);
            out.push(')');
        }
        other => write_expr(other, level, out),
    }
}

fn write_sname(n: &SName, level: usize, out: &mut String) {
    match n {
        SName::Ident(id) => out.push_str(id),
        SName::Quote(inner) => {
            out.push('@');
            write_quote_body(inner, level, out);
        }
    }
}

fn write_sname_body(n: &SName, level: usize, out: &mut String) {
    // Explicit binder form `@...`: an identifier must render as a block so
    // it re-parses as a name, not a bare-binder ident.
    match n {
        SName::Ident(id) => {
            out.push_str("{ \"");
            out.push_str(id);
            out.push_str("\" }");
        }
        SName::Quote(inner) => write_quote_body(inner, level, out),
    }
}

fn write_quote_body(inner: &Surface, level: usize, out: &mut String) {
    match inner {
        Surface::Ground(SGround::Int(i)) => out.push_str(&i.to_string()),
        Surface::Ground(SGround::Undefined) => out.push_str("undefined"),
        Surface::Ground(SGround::Str(_)) => write_expr(inner, level, out),
        Surface::Stop => out.push('0'),
        other => {
            out.push_str("{ ");
            write_expr(other, level, out);
            out.push_str(" }");
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_source().trim_end())
    }
}
