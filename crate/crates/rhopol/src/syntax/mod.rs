//! Core process syntax: names are quoted processes, processes mention names.
//!
//! The term language follows the reflective higher-order calculus: the only
//! name constructor is quoting (`@P`), input binds names positionally, output
//! carries processes, and `*x` dereferences a name back into a process.
//! Structural identity questions (alpha conversion, the parallel monoid laws,
//! name equivalence) are all answered by [`canon::CanonicalForm`].

pub mod canon;
pub mod free;
pub mod pretty;
pub mod subst;

pub use canon::{canonicalize, name_equiv, name_key, struct_congruent, CanonicalForm};
pub use free::{free_names, names, NameSet};
pub use pretty::{pretty, pretty_name};
pub use subst::{rename_free, substitute, Substitution};

use std::fmt;

/// A name: the quote of a process.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Name(Box<Proc>);

impl Name {
    pub fn quote(p: Proc) -> Name {
        Name(Box::new(p))
    }

    /// The process under the quote.
    pub fn unquote(&self) -> &Proc {
        &self.0
    }

    pub fn into_unquote(self) -> Proc {
        *self.0
    }

    /// The name an identifier denotes when no other binding applies:
    /// the quote of the string-literal process for that identifier.
    pub fn var(ident: &str) -> Name {
        Name::quote(Proc::Ground(GroundTerm::Str(ident.to_string())))
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@({:?})", self.0)
    }
}

/// One slot of an input pattern. `Var` binds the delivered name; `Literal`
/// requires the delivered name to be name-equivalent to the stated one and
/// binds nothing. Message labels and already-bound pattern arguments desugar
/// to literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Binder {
    Var(Name),
    Literal(Name),
}

impl Binder {
    pub fn name(&self) -> &Name {
        match self {
            Binder::Var(n) | Binder::Literal(n) => n,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Binder::Var(_))
    }
}

/// `x?( p1, ..., pN ) => body`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InputProc {
    pub channel: Name,
    pub pattern: Vec<Binder>,
    pub body: Box<Proc>,
}

/// `x!( Q1, ..., QN )`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutputProc {
    pub channel: Name,
    pub args: Vec<Proc>,
}

/// Ground data carried as a leaf process so it can be quoted into names.
/// `Add`/`Sub` operands are processes constrained to ground terms or drops;
/// they evaluate only when both sides are integer literals at reduction time.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroundTerm {
    Int(i64),
    Str(String),
    Undefined,
    Add(Box<Proc>, Box<Proc>),
    Sub(Box<Proc>, Box<Proc>),
}

/// Process terms.
///
/// Invariants maintained by the smart constructors (and restored by
/// canonicalization): `Par` is flattened and never contains `Stop`; a choice
/// has at least two branches, each an `Input` or `Output`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Proc {
    Stop,
    Input(InputProc),
    Output(OutputProc),
    Choice(Vec<Proc>),
    Par(Vec<Proc>),
    Drop(Name),
    Ground(GroundTerm),
}

impl Proc {
    pub fn input(channel: Name, pattern: Vec<Binder>, body: Proc) -> Proc {
        Proc::Input(InputProc {
            channel,
            pattern,
            body: Box::new(body),
        })
    }

    pub fn output(channel: Name, args: Vec<Proc>) -> Proc {
        Proc::Output(OutputProc { channel, args })
    }

    pub fn drop(name: Name) -> Proc {
        Proc::Drop(name)
    }

    pub fn int(v: i64) -> Proc {
        Proc::Ground(GroundTerm::Int(v))
    }

    pub fn str(s: impl Into<String>) -> Proc {
        Proc::Ground(GroundTerm::Str(s.into()))
    }

    /// Parallel composition; flattens nested `Par` and drops `Stop` units.
    pub fn par(parts: Vec<Proc>) -> Proc {
        let mut out = Vec::new();
        fn flatten(p: Proc, out: &mut Vec<Proc>) {
            match p {
                Proc::Stop => {}
                Proc::Par(ps) => {
                    for q in ps {
                        flatten(q, out);
                    }
                }
                other => out.push(other),
            }
        }
        for p in parts {
            flatten(p, &mut out);
        }
        match out.len() {
            0 => Proc::Stop,
            1 => out.pop().unwrap(),
            _ => Proc::Par(out),
        }
    }

    /// Choice over IO branches; flattens nested choices, drops `Stop`
    /// summands, and collapses a singleton to its branch. Returns `None`
    /// if some branch is neither an input, an output, nor one of those
    /// shapes nested in a further choice.
    pub fn choice(branches: Vec<Proc>) -> Option<Proc> {
        let mut out = Vec::new();
        fn flatten(p: Proc, out: &mut Vec<Proc>) -> bool {
            match p {
                Proc::Stop => true,
                Proc::Choice(bs) => bs.into_iter().all(|b| flatten(b, out)),
                Proc::Input(_) | Proc::Output(_) => {
                    out.push(p);
                    true
                }
                _ => false,
            }
        }
        for b in branches {
            if !flatten(b, &mut out) {
                return None;
            }
        }
        Some(match out.len() {
            0 => Proc::Stop,
            1 => out.pop().unwrap(),
            _ => Proc::Choice(out),
        })
    }

    /// Structure size: number of constructors, descending through quotes.
    pub fn size(&self) -> usize {
        fn name_size(n: &Name) -> usize {
            n.unquote().size()
        }
        match self {
            Proc::Stop => 1,
            Proc::Input(i) => {
                1 + name_size(&i.channel)
                    + i.pattern.iter().map(|b| name_size(b.name())).sum::<usize>()
                    + i.body.size()
            }
            Proc::Output(o) => {
                1 + name_size(&o.channel) + o.args.iter().map(|a| a.size()).sum::<usize>()
            }
            Proc::Choice(bs) => 1 + bs.iter().map(|b| b.size()).sum::<usize>(),
            Proc::Par(ps) => 1 + ps.iter().map(|p| p.size()).sum::<usize>(),
            Proc::Drop(n) => 1 + name_size(n),
            Proc::Ground(g) => match g {
                GroundTerm::Add(a, b) | GroundTerm::Sub(a, b) => 1 + a.size() + b.size(),
                _ => 1,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_flattens_and_drops_stop() {
        let p = Proc::par(vec![
            Proc::Stop,
            Proc::par(vec![Proc::output(Name::var("x"), vec![]), Proc::Stop]),
        ]);
        assert_eq!(p, Proc::output(Name::var("x"), vec![]));
    }

    #[test]
    fn empty_par_is_stop() {
        assert_eq!(Proc::par(vec![]), Proc::Stop);
        assert_eq!(Proc::par(vec![Proc::Stop, Proc::Stop]), Proc::Stop);
    }

    #[test]
    fn choice_rejects_non_io() {
        assert!(Proc::choice(vec![Proc::Drop(Name::var("x"))]).is_none());
        let m = Proc::output(Name::var("x"), vec![Proc::Stop]);
        let n = Proc::input(Name::var("y"), vec![Binder::Var(Name::var("z"))], Proc::Stop);
        let c = Proc::choice(vec![m.clone(), n.clone()]).unwrap();
        assert!(matches!(c, Proc::Choice(ref bs) if bs.len() == 2));
        // singleton collapses
        assert_eq!(Proc::choice(vec![m.clone()]).unwrap(), m);
        // stop summands vanish
        assert_eq!(Proc::choice(vec![Proc::Stop, n.clone()]).unwrap(), n);
    }
}
