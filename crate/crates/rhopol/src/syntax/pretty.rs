//! Single-line printer for processes and names in the surface syntax.
//!
//! Output re-parses to a structurally congruent term: identifier-shaped
//! string quotes print bare, message labels print in `chan!label(...)` form,
//! and `0` serves as both the stopped process and integer zero (the two are
//! canonically identified).

use std::fmt;

use super::{Binder, GroundTerm, Name, Proc};

const KEYWORDS: [&str; 4] = ["new", "def", "match", "undefined"];

pub(crate) fn ident_shaped(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !(first.is_ascii_alphabetic() || first == '_') {
        return false;
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return false;
    }
    !KEYWORDS.contains(&s)
}

fn escape_str(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
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

/// Pretty-print a process on one line.
pub fn pretty(p: &Proc) -> String {
    let mut out = String::new();
    write_par(p, &mut out);
    out
}

/// Pretty-print a name.
pub fn pretty_name(n: &Name) -> String {
    let mut out = String::new();
    write_name(n, &mut out);
    out
}

fn write_name(n: &Name, out: &mut String) {
    match n.unquote() {
        Proc::Ground(GroundTerm::Str(s)) if ident_shaped(s) => out.push_str(s),
        Proc::Ground(GroundTerm::Str(s)) => {
            out.push('@');
            escape_str(s, out);
        }
        Proc::Ground(GroundTerm::Int(i)) => {
            out.push('@');
            out.push_str(&i.to_string());
        }
        Proc::Ground(GroundTerm::Undefined) => out.push_str("@undefined"),
        Proc::Stop => out.push_str("@0"),
        other => {
            out.push_str("@{ ");
            write_par(other, out);
            out.push_str(" }");
        }
    }
}

fn write_par(p: &Proc, out: &mut String) {
    match p {
        Proc::Par(ps) => {
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_plus(q, out);
            }
        }
        other => write_plus(other, out),
    }
}

fn write_plus(p: &Proc, out: &mut String) {
    match p {
        Proc::Choice(bs) => {
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                // A non-final input branch is parenthesized so its unbraced
                // body cannot swallow the rest of the sum on re-parse.
                if i + 1 < bs.len() && matches!(b, Proc::Input(_)) {
                    out.push('(');
                    write_atom(b, out);
                    out.push(')');
                } else {
                    write_atom(b, out);
                }
            }
        }
        Proc::Ground(GroundTerm::Add(a, b)) => {
            write_arith(a, false, out);
            out.push_str(" + ");
            write_arith(b, true, out);
        }
        Proc::Ground(GroundTerm::Sub(a, b)) => {
            write_arith(a, false, out);
            out.push_str(" - ");
            write_arith(b, true, out);
        }
        other => write_atom(other, out),
    }
}

fn write_arith(p: &Proc, right: bool, out: &mut String) {
    if !matches!(p, Proc::Stop | Proc::Ground(_) | Proc::Drop(_)) {
        // A process operand is a stuck sum; print it as an equally stuck
        // dereference so the output still parses as arithmetic.
        out.push_str("*@{ ");
        write_par(p, out);
        out.push_str(" }");
    } else if right && matches!(
        p,
        Proc::Ground(GroundTerm::Add(_, _)) | Proc::Ground(GroundTerm::Sub(_, _))
    ) {
        // Right operand: parenthesize nested chains to preserve association.
        out.push('(');
        write_plus(p, out);
        out.push(')');
    } else {
        write_plus(p, out);
    }
}

fn write_atom(p: &Proc, out: &mut String) {
    match p {
        Proc::Stop => out.push('0'),
        Proc::Ground(g) => match g {
            GroundTerm::Int(i) => out.push_str(&i.to_string()),
            GroundTerm::Str(s) => escape_str(s, out),
            GroundTerm::Undefined => out.push_str("undefined"),
            GroundTerm::Add(_, _) | GroundTerm::Sub(_, _) => {
                out.push('(');
                write_plus(p, out);
                out.push(')');
            }
        },
        Proc::Drop(n) => {
            out.push('*');
            write_name(n, out);
        }
        Proc::Output(o) => {
            write_name(&o.channel, out);
            out.push('!');
            let mut rest: &[Proc] = &o.args;
            if let Some(Proc::Ground(GroundTerm::Str(s))) = o.args.first() {
                if ident_shaped(s) {
                    out.push_str(s);
                    rest = &o.args[1..];
                }
            }
            out.push('(');
            for (i, a) in rest.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_par(a, out);
            }
            out.push(')');
        }
        Proc::Input(inp) => {
            write_name(&inp.channel, out);
            out.push('?');
            let mut rest: &[Binder] = &inp.pattern;
            if let Some(Binder::Literal(n)) = inp.pattern.first() {
                if let Proc::Ground(GroundTerm::Str(s)) = n.unquote() {
                    if ident_shaped(s) {
                        out.push_str(s);
                        rest = &inp.pattern[1..];
                    }
                }
            }
            out.push('(');
            for (i, b) in rest.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match b {
                    Binder::Var(n) => match n.unquote() {
                        Proc::Ground(GroundTerm::Str(s)) if ident_shaped(s) => out.push_str(s),
                        _ => write_name(n, out),
                    },
                    Binder::Literal(n) => {
                        out.push('=');
                        write_name(n, out);
                    }
                }
            }
            out.push_str(") => ");
            match inp.body.as_ref() {
                Proc::Par(_) => {
                    out.push_str("{ ");
                    write_par(&inp.body, out);
                    out.push_str(" }");
                }
                body => write_plus(body, out),
            }
        }
        Proc::Choice(_) | Proc::Par(_) => {
            out.push('(');
            write_par(p, out);
            out.push(')');
        }
    }
}

impl fmt::Display for Proc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_name(self))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Binder, Name, Proc};
    use super::*;

    fn n(s: &str) -> Name {
        Name::var(s)
    }

    #[test]
    fn basic_forms() {
        assert_eq!(pretty(&Proc::Stop), "0");
        assert_eq!(pretty(&Proc::int(42)), "42");
        assert_eq!(pretty(&Proc::str("hi")), "\"hi\"");
        assert_eq!(pretty(&Proc::drop(n("x"))), "*x");
        assert_eq!(
            pretty(&Proc::output(n("x"), vec![Proc::Stop, Proc::int(3)])),
            "x!(0, 3)"
        );
    }

    #[test]
    fn label_sugar() {
        let p = Proc::output(n("slot"), vec![Proc::str("get"), Proc::drop(n("ret"))]);
        assert_eq!(pretty(&p), "slot!get(*ret)");
        let q = Proc::input(
            n("slot"),
            vec![Binder::Literal(n("get")), Binder::Var(n("ret"))],
            Proc::Stop,
        );
        assert_eq!(pretty(&q), "slot?get(ret) => 0");
    }

    #[test]
    fn par_and_choice() {
        let a = Proc::output(n("a"), vec![]);
        let b = Proc::output(n("b"), vec![]);
        let c = Proc::input(n("c"), vec![], Proc::Stop);
        assert_eq!(
            pretty(&Proc::Par(vec![a.clone(), Proc::Choice(vec![b.clone(), c.clone()])])),
            "a!() | b!() + c?() => 0"
        );
    }

    #[test]
    fn par_body_braced() {
        let body = Proc::Par(vec![Proc::output(n("a"), vec![]), Proc::output(n("b"), vec![])]);
        let p = Proc::input(n("x"), vec![Binder::Var(n("y"))], body);
        assert_eq!(pretty(&p), "x?(y) => { a!() | b!() }");
    }

    #[test]
    fn structured_names() {
        let machinery = Name::quote(Proc::output(
            Name::quote(Proc::str("%new")),
            vec![Proc::int(7)],
        ));
        assert_eq!(pretty_name(&machinery), "@{ @\"%new\"!(7) }");
        assert_eq!(pretty_name(&Name::quote(Proc::int(5))), "@5");
        assert_eq!(pretty_name(&Name::quote(Proc::Stop)), "@0");
        assert_eq!(pretty_name(&Name::quote(Proc::str("not an ident"))), "@\"not an ident\"");
    }

    #[test]
    fn arithmetic() {
        let p = Proc::Ground(super::super::GroundTerm::Add(
            Box::new(Proc::drop(n("b"))),
            Box::new(Proc::int(3)),
        ));
        assert_eq!(pretty(&p), "*b + 3");
        let q = Proc::Ground(super::super::GroundTerm::Sub(
            Box::new(Proc::int(5)),
            Box::new(Proc::Ground(super::super::GroundTerm::Sub(
                Box::new(Proc::int(2)),
                Box::new(Proc::int(1)),
            ))),
        ));
        assert_eq!(pretty(&q), "5 - (2 - 1)");
    }
}
