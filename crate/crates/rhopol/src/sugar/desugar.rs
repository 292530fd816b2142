//! Lowering the surface language into the core calculus.
//!
//! Identifier resolution is lexical:
//! - channel position: ident `x` is the name `@"x"` (substitution rewrites
//!   bound occurrences at communication time);
//! - value position: a bound ident dereferences (`*@"x"`), a free ident is
//!   the string literal `"x"`;
//! - pattern position: a fresh ident binds, an ident already in scope
//!   matches that name literally (per-key dispatch).
//!
//! `new` substitutes reserved fresh names for its binders. `def` becomes a
//! lazily replicated service on a content-addressed channel, with calls
//! `X(args)` rewritten to sends on that channel. `match` is input-guarded
//! choice.

use thiserror::Error;

use super::encode::{fresh_name, replicate_lazy};
use super::{SGround, SName, SPat, Surface};
use crate::syntax::subst::rename_free;
use crate::syntax::{names, Binder, Name, Proc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesugarError {
    #[error("call to undefined `{0}`")]
    UnboundDef(String),
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("choice branches must be input- or output-guarded")]
    InvalidChoice,
    #[error("match branches must be input-guarded")]
    InvalidMatch,
    #[error("duplicate binder `{0}`")]
    DuplicateBinder(String),
}

#[derive(Clone, Default)]
struct Scope {
    bound: Vec<String>,
    defs: Vec<(String, Name, usize)>,
}

impl Scope {
    fn is_bound(&self, id: &str) -> bool {
        self.bound.iter().any(|b| b == id)
    }

    fn lookup_def(&self, id: &str) -> Option<(Name, usize)> {
        self.defs
            .iter()
            .rev()
            .find(|(n, _, _)| n == id)
            .map(|(_, s, a)| (s.clone(), *a))
    }
}

pub fn desugar(s: &Surface) -> Result<Proc, DesugarError> {
    go(s, &Scope::default())
}

fn go(s: &Surface, scope: &Scope) -> Result<Proc, DesugarError> {
    match s {
        Surface::Stop => Ok(Proc::Stop),
        Surface::Ground(g) => Ok(match g {
            SGround::Int(0) => Proc::Stop,
            SGround::Int(i) => Proc::int(*i),
            SGround::Str(st) => Proc::str(st.clone()),
            SGround::Undefined => Proc::Ground(crate::syntax::GroundTerm::Undefined),
        }),
        Surface::Ident(id) => Ok(if scope.is_bound(id) {
            Proc::Drop(Name::var(id))
        } else {
            Proc::str(id.clone())
        }),
        Surface::Quoted(inner) => go(inner, scope),
        Surface::Drop(n) => Ok(Proc::Drop(resolve_name(n, scope)?)),
        Surface::Add(a, b) => Ok(Proc::Ground(crate::syntax::GroundTerm::Add(
            Box::new(go(a, scope)?),
            Box::new(go(b, scope)?),
        ))),
        Surface::Sub(a, b) => Ok(Proc::Ground(crate::syntax::GroundTerm::Sub(
            Box::new(go(a, scope)?),
            Box::new(go(b, scope)?),
        ))),
        Surface::Output { channel, args } => {
            let ch = resolve_name(channel, scope)?;
            let args = args
                .iter()
                .map(|a| go(a, scope))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Proc::output(ch, args))
        }
        Surface::Call { name, args } => {
            let (service, arity) = scope
                .lookup_def(name)
                .ok_or_else(|| DesugarError::UnboundDef(name.clone()))?;
            if args.len() != arity {
                return Err(DesugarError::Arity {
                    name: name.clone(),
                    expected: arity,
                    got: args.len(),
                });
            }
            let args = args
                .iter()
                .map(|a| go(a, scope))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Proc::output(service, args))
        }
        Surface::Input {
            channel,
            pattern,
            body,
        } => {
            let ch = resolve_name(channel, scope)?;
            let mut inner = scope.clone();
            let mut pat = Vec::with_capacity(pattern.len());
            for slot in pattern {
                pat.push(match slot {
                    SPat::Ident(id) => {
                        if scope.is_bound(id) {
                            Binder::Literal(Name::var(id))
                        } else {
                            inner.bound.push(id.clone());
                            Binder::Var(Name::var(id))
                        }
                    }
                    SPat::Binder(n) => Binder::Var(resolve_name(n, scope)?),
                    SPat::Literal(n) => Binder::Literal(resolve_name(n, scope)?),
                });
            }
            let body = go(body, &inner)?;
            Ok(Proc::input(ch, pat, body))
        }
        Surface::Choice(branches) => {
            let parts = branches
                .iter()
                .map(|b| go(b, scope))
                .collect::<Result<Vec<_>, _>>()?;
            Proc::choice(parts).ok_or(DesugarError::InvalidChoice)
        }
        Surface::Match(branches) => {
            let mut parts = Vec::with_capacity(branches.len());
            for b in branches {
                match go(b, scope)? {
                    p @ Proc::Input(_) => parts.push(p),
                    Proc::Choice(bs) if bs.iter().all(|x| matches!(x, Proc::Input(_))) => {
                        parts.extend(bs)
                    }
                    Proc::Stop => {}
                    _ => return Err(DesugarError::InvalidMatch),
                }
            }
            Proc::choice(parts).ok_or(DesugarError::InvalidMatch)
        }
        Surface::Par(items) => {
            let mut scope = scope.clone();
            let mut parts = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    Surface::Def {
                        name,
                        params,
                        body,
                        applied: None,
                    } => {
                        let (service, comp) = desugar_def(name, params, body, &scope)?;
                        // A definition scopes over itself and everything
                        // after it in the block.
                        scope.defs.push((name.clone(), service, params.len()));
                        parts.push(comp);
                    }
                    other => parts.push(go(other, &scope)?),
                }
            }
            Ok(Proc::par(parts))
        }
        Surface::Def {
            name,
            params,
            body,
            applied,
        } => {
            let (service, comp) = desugar_def(name, params, body, scope)?;
            match applied {
                None => Ok(comp),
                Some(args) => {
                    if args.len() != params.len() {
                        return Err(DesugarError::Arity {
                            name: name.clone(),
                            expected: params.len(),
                            got: args.len(),
                        });
                    }
                    let args = args
                        .iter()
                        .map(|a| go(a, scope))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Proc::par(vec![comp, Proc::output(service, args)]))
                }
            }
        }
        Surface::New { binders, body } => {
            for (i, b) in binders.iter().enumerate() {
                if binders[..i].contains(b) {
                    return Err(DesugarError::DuplicateBinder(b.clone()));
                }
            }
            let mut inner = scope.clone();
            inner.bound.extend(binders.iter().cloned());
            let mut term = go(body, &inner)?;
            for b in binders {
                let fresh = fresh_name(b, &term);
                term = rename_free(&term, &Name::var(b), &fresh);
            }
            Ok(term)
        }
    }
}

fn resolve_name(n: &SName, scope: &Scope) -> Result<Name, DesugarError> {
    match n {
        SName::Ident(id) => Ok(Name::var(id)),
        SName::Quote(inner) => Ok(Name::quote(go(inner, scope)?)),
    }
}

/// Placeholder for the service channel while the body is lowered; the real
/// channel is content-addressed from the lowered body, so it cannot be known
/// until self-calls have already been rewritten to something.
fn self_sentinel() -> Name {
    Name::quote(Proc::output(
        Name::quote(Proc::str("%self".to_string())),
        vec![Proc::int(0)],
    ))
}

fn desugar_def(
    name: &str,
    params: &[String],
    body: &Surface,
    scope: &Scope,
) -> Result<(Name, Proc), DesugarError> {
    for (i, p) in params.iter().enumerate() {
        if params[..i].contains(p) {
            return Err(DesugarError::DuplicateBinder(p.clone()));
        }
    }
    let sentinel = self_sentinel();
    let mut inner = scope.clone();
    inner
        .defs
        .push((name.to_string(), sentinel.clone(), params.len()));
    inner.bound.extend(params.iter().cloned());
    let body0 = go(body, &inner)?;

    let service = fresh_name(&format!("def:{name}"), &body0);
    debug_assert!(!names(&body0).contains(&service));
    let body1 = rename_free(&body0, &sentinel, &service);

    let guard = Proc::input(
        service.clone(),
        params.iter().map(|p| Binder::Var(Name::var(p))).collect(),
        body1,
    );
    let repl = fresh_name(&format!("repl:{name}"), &guard);
    let comp = replicate_lazy(&repl, &guard).expect("service guard is an input");
    Ok((service, comp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{free, struct_congruent};

    fn ident(s: &str) -> Surface {
        Surface::Ident(s.to_string())
    }

    #[test]
    fn free_ident_is_string_bound_ident_drops() {
        let free_out = Surface::Output {
            channel: SName::Ident("c".into()),
            args: vec![ident("v")],
        };
        let p = desugar(&free_out).unwrap();
        assert_eq!(
            p,
            Proc::output(Name::var("c"), vec![Proc::str("v".to_string())])
        );

        let bound = Surface::Input {
            channel: SName::Ident("c".into()),
            pattern: vec![SPat::Ident("v".into())],
            body: Box::new(Surface::Output {
                channel: SName::Ident("d".into()),
                args: vec![ident("v")],
            }),
        };
        let p = desugar(&bound).unwrap();
        if let Proc::Input(inp) = &p {
            assert_eq!(
                *inp.body,
                Proc::output(Name::var("d"), vec![Proc::Drop(Name::var("v"))])
            );
        } else {
            panic!("expected input");
        }
    }

    #[test]
    fn bound_pattern_ident_matches_literally() {
        // c?(k) => c?(k) => 0 — the inner k is already bound, so it
        // dispatches on the outer k's value rather than rebinding.
        let inner_input = Surface::Input {
            channel: SName::Ident("c".into()),
            pattern: vec![SPat::Ident("k".into())],
            body: Box::new(Surface::Stop),
        };
        let outer = Surface::Input {
            channel: SName::Ident("c".into()),
            pattern: vec![SPat::Ident("k".into())],
            body: Box::new(inner_input),
        };
        let p = desugar(&outer).unwrap();
        if let Proc::Input(o) = &p {
            assert!(o.pattern[0].is_var());
            if let Proc::Input(i) = o.body.as_ref() {
                assert!(!i.pattern[0].is_var());
            } else {
                panic!("expected nested input");
            }
        } else {
            panic!("expected input");
        }
    }

    #[test]
    fn new_substitutes_reserved_names() {
        let body = Surface::Par(vec![
            Surface::Output {
                channel: SName::Ident("v".into()),
                args: vec![Surface::Ground(SGround::Int(1))],
            },
            Surface::Drop(SName::Ident("v".into())),
        ]);
        let p = desugar(&Surface::New {
            binders: vec!["v".into()],
            body: Box::new(body),
        })
        .unwrap();
        assert!(free::free_names(&p)
            .iter()
            .all(crate::sugar::encode::is_reserved));
        // Deterministic.
        let q = desugar(&Surface::New {
            binders: vec!["v".into()],
            body: Box::new(Surface::Par(vec![
                Surface::Output {
                    channel: SName::Ident("v".into()),
                    args: vec![Surface::Ground(SGround::Int(1))],
                },
                Surface::Drop(SName::Ident("v".into())),
            ])),
        })
        .unwrap();
        assert!(struct_congruent(&p, &q));
    }

    #[test]
    fn def_rewrites_calls_to_service_sends() {
        // def f(y) => f(y), then a call f(2) later in the block.
        let def = Surface::Def {
            name: "f".into(),
            params: vec!["y".into()],
            body: Box::new(Surface::Call {
                name: "f".into(),
                args: vec![ident("y")],
            }),
            applied: None,
        };
        let call = Surface::Call {
            name: "f".into(),
            args: vec![Surface::Ground(SGround::Int(2))],
        };
        let p = desugar(&Surface::Par(vec![def, call])).unwrap();
        let parts = if let Proc::Par(parts) = &p {
            parts.clone()
        } else {
            panic!("expected par");
        };
        // packet + duplicator + call
        assert_eq!(parts.len(), 3);
        let call_out = parts
            .iter()
            .find_map(|c| match c {
                Proc::Output(o) if o.args == vec![Proc::int(2)] => Some(o),
                _ => None,
            })
            .expect("call output");
        // The recursive body targets the same service channel as the call.
        let packet = parts
            .iter()
            .find_map(|c| match c {
                Proc::Output(o) if o.args.len() == 1 && !matches!(o.args[0], Proc::Ground(_)) => {
                    Some(o)
                }
                _ => None,
            })
            .expect("replication packet");
        if let Proc::Input(guard) = &packet.args[0] {
            assert_eq!(guard.channel, call_out.channel);
            // guard body = duplicator | f(y) rewritten
            if let Proc::Par(body) = guard.body.as_ref() {
                assert!(body
                    .iter()
                    .any(|c| matches!(c, Proc::Output(o) if o.channel == call_out.channel)));
            } else {
                panic!("expected armed body");
            }
        } else {
            panic!("expected service guard in packet");
        }
    }

    #[test]
    fn call_outside_scope_fails() {
        let call = Surface::Call {
            name: "f".into(),
            args: vec![],
        };
        assert_eq!(desugar(&call), Err(DesugarError::UnboundDef("f".into())));
    }

    #[test]
    fn match_rejects_output_branch() {
        let m = Surface::Match(vec![Surface::Output {
            channel: SName::Ident("c".into()),
            args: vec![],
        }]);
        assert_eq!(desugar(&m), Err(DesugarError::InvalidMatch));
    }
}
