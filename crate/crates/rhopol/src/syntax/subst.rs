//! Semantic substitution and syntactic renaming.
//!
//! Semantic substitution is the engine of communication: it replaces name
//! occurrences atomically (matched up to `≡_N`, never rewriting quote
//! interiors) and collapses a dereference of a substituted name into the
//! process it quotes: `(*x){@Q/x} = Q`. Syntactic renaming keeps the
//! dereference intact — `new`-style hiding wants `*x` to become `*x'`, not
//! the unquoted body — which is why both operations exist.

use std::collections::BTreeMap;

use super::canon::CanonicalForm;
use super::free::{free_names, names, NameSet};
use super::{Binder, GroundTerm, InputProc, Name, OutputProc, Proc};

/// A finite map from names to names, keyed up to `≡_N`. Extended to
/// processes by [`substitute`].
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    map: BTreeMap<CanonicalForm, Name>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn single(from: &Name, to: Name) -> Substitution {
        let mut s = Substitution::new();
        s.bind(from, to);
        s
    }

    /// Later bindings for the same class overwrite earlier ones.
    pub fn bind(&mut self, from: &Name, to: Name) {
        self.map.insert(NameSet::key(from), to);
    }

    pub fn get(&self, n: &Name) -> Option<&Name> {
        self.map.get(&NameSet::key(n))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &Name> {
        self.map.values()
    }

    fn without_keys(&self, keys: &[CanonicalForm]) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| !keys.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    fn restrict_to(&self, relevant: &NameSet) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| relevant.contains_key(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    fn name(&self, n: &Name) -> Name {
        self.get(n).cloned().unwrap_or_else(|| n.clone())
    }
}

/// Apply a semantic substitution. Capture is avoided by alpha-renaming any
/// input binder that collides with a substituted-in name.
pub fn substitute(p: &Proc, s: &Substitution) -> Proc {
    if s.is_empty() {
        return p.clone();
    }
    match p {
        Proc::Stop => Proc::Stop,
        Proc::Ground(g) => Proc::Ground(match g {
            GroundTerm::Add(a, b) => GroundTerm::Add(
                Box::new(substitute(a, s)),
                Box::new(substitute(b, s)),
            ),
            GroundTerm::Sub(a, b) => GroundTerm::Sub(
                Box::new(substitute(a, s)),
                Box::new(substitute(b, s)),
            ),
            other => other.clone(),
        }),
        Proc::Drop(x) => match s.get(x) {
            // Semantic rule: a dropped substituted name runs its quote.
            Some(replacement) => replacement.unquote().clone(),
            None => Proc::Drop(x.clone()),
        },
        Proc::Output(o) => Proc::Output(OutputProc {
            channel: s.name(&o.channel),
            args: o.args.iter().map(|a| substitute(a, s)).collect(),
        }),
        Proc::Par(ps) => Proc::par(ps.iter().map(|q| substitute(q, s)).collect()),
        Proc::Choice(bs) => Proc::Choice(bs.iter().map(|b| substitute(b, s)).collect()),
        Proc::Input(i) => substitute_input(i, s),
    }
}

fn substitute_input(i: &InputProc, s: &Substitution) -> Proc {
    let channel = s.name(&i.channel);
    let mut pattern: Vec<Binder> = i
        .pattern
        .iter()
        .map(|b| match b {
            Binder::Literal(n) => Binder::Literal(s.name(n)),
            Binder::Var(n) => Binder::Var(n.clone()),
        })
        .collect();

    // Shadowing: variable binders remove their class from the substitution.
    let var_keys: Vec<CanonicalForm> = pattern
        .iter()
        .filter(|b| b.is_var())
        .map(|b| NameSet::key(b.name()))
        .collect();
    let inner = s.without_keys(&var_keys);
    // Only classes actually free in the body matter below.
    let inner = inner.restrict_to(&free_names(&i.body));
    if inner.is_empty() {
        return Proc::Input(InputProc {
            channel,
            pattern,
            body: i.body.clone(),
        });
    }

    // Capture avoidance: a binder equal to a substituted-in value would
    // capture it; rename such binders first.
    let mut body = (*i.body).clone();
    for idx in 0..pattern.len() {
        let Binder::Var(b) = &pattern[idx] else {
            continue;
        };
        if inner.values().any(|v| NameSet::key(v) == NameSet::key(b)) {
            let mut avoid = names(&body);
            for v in inner.values() {
                avoid.insert(v);
            }
            for (k, _) in inner.map.iter() {
                // Avoid shadowing a key that must still apply in the body.
                avoid.insert(&Name::quote(k.to_proc()));
            }
            for other in &pattern {
                avoid.insert(other.name());
            }
            let fresh = fresh_binder(&avoid);
            body = rename_free(&body, b, &fresh);
            pattern[idx] = Binder::Var(fresh);
        }
    }

    Proc::Input(InputProc {
        channel,
        pattern,
        body: Box::new(substitute(&body, &inner)),
    })
}

/// A reserved-namespace binder name not in `avoid`.
fn fresh_binder(avoid: &NameSet) -> Name {
    let mut k = 0usize;
    loop {
        let cand = Name::quote(Proc::Ground(GroundTerm::Str(format!("%a{k}"))));
        if !avoid.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

/// Rename every free occurrence of `from` (up to `≡_N`) to `to`,
/// syntactically: `*from` becomes `*to`. Binders shadow; a binder equal to
/// `to` is alpha-renamed first so no occurrence is captured.
pub fn rename_free(p: &Proc, from: &Name, to: &Name) -> Proc {
    let from_key = NameSet::key(from);
    let rn = |n: &Name| -> Name {
        if NameSet::key(n) == from_key {
            to.clone()
        } else {
            n.clone()
        }
    };
    match p {
        Proc::Stop => Proc::Stop,
        Proc::Ground(g) => Proc::Ground(match g {
            GroundTerm::Add(a, b) => GroundTerm::Add(
                Box::new(rename_free(a, from, to)),
                Box::new(rename_free(b, from, to)),
            ),
            GroundTerm::Sub(a, b) => GroundTerm::Sub(
                Box::new(rename_free(a, from, to)),
                Box::new(rename_free(b, from, to)),
            ),
            other => other.clone(),
        }),
        Proc::Drop(n) => Proc::Drop(rn(n)),
        Proc::Output(o) => Proc::Output(OutputProc {
            channel: rn(&o.channel),
            args: o.args.iter().map(|a| rename_free(a, from, to)).collect(),
        }),
        Proc::Par(ps) => Proc::Par(ps.iter().map(|q| rename_free(q, from, to)).collect()),
        Proc::Choice(bs) => Proc::Choice(bs.iter().map(|b| rename_free(b, from, to)).collect()),
        Proc::Input(i) => {
            let channel = rn(&i.channel);
            let mut pattern: Vec<Binder> = i
                .pattern
                .iter()
                .map(|b| match b {
                    Binder::Literal(n) => Binder::Literal(rn(n)),
                    Binder::Var(n) => Binder::Var(n.clone()),
                })
                .collect();
            let shadowed = pattern
                .iter()
                .any(|b| b.is_var() && NameSet::key(b.name()) == from_key);
            if shadowed {
                return Proc::Input(InputProc {
                    channel,
                    pattern,
                    body: i.body.clone(),
                });
            }
            let mut body = (*i.body).clone();
            let to_key = NameSet::key(to);
            for idx in 0..pattern.len() {
                let Binder::Var(b) = &pattern[idx] else {
                    continue;
                };
                if NameSet::key(b) == to_key {
                    let mut avoid = names(&body);
                    avoid.insert(to);
                    avoid.insert(from);
                    for other in &pattern {
                        avoid.insert(other.name());
                    }
                    let fresh = fresh_binder(&avoid);
                    body = rename_free(&body, b, &fresh);
                    pattern[idx] = Binder::Var(fresh);
                }
            }
            Proc::Input(InputProc {
                channel,
                pattern,
                body: Box::new(rename_free(&body, from, to)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::canon::struct_congruent;
    use super::*;

    fn n(s: &str) -> Name {
        Name::var(s)
    }

    #[test]
    fn drop_substitution_runs_the_quote() {
        // (*y){@Q/y} = Q
        let q = Proc::output(n("w"), vec![Proc::Stop]);
        let s = Substitution::single(&n("y"), Name::quote(q.clone()));
        assert_eq!(substitute(&Proc::drop(n("y")), &s), q);
    }

    #[test]
    fn names_are_atomic() {
        // Substituting y inside x!( @{ y!() } ... ) must not rewrite the
        // quote interior, only name positions equal to y.
        let ch = Name::quote(Proc::output(n("y"), vec![]));
        let p = Proc::output(ch.clone(), vec![Proc::drop(n("y"))]);
        let s = Substitution::single(&n("y"), n("z"));
        let out = substitute(&p, &s);
        // channel untouched, argument dereference rewritten to z's quote
        assert_eq!(
            out,
            Proc::output(ch, vec![Proc::Ground(GroundTerm::Str("z".into()))])
        );
    }

    #[test]
    fn comm_example_body() {
        // (w!( y!( *z ) )){@P/z} = w!( y!( P ) )
        let body = Proc::output(
            n("w"),
            vec![Proc::output(n("y"), vec![Proc::drop(n("z"))])],
        );
        let p = Proc::output(n("u"), vec![Proc::int(7)]);
        let s = Substitution::single(&n("z"), Name::quote(p.clone()));
        let expect = Proc::output(n("w"), vec![Proc::output(n("y"), vec![p])]);
        assert_eq!(substitute(&body, &s), expect);
    }

    #[test]
    fn shadowing_stops_substitution() {
        // (x?(y) => y!()){@Q/y}: the binder shadows, body unchanged.
        let p = Proc::input(n("x"), vec![Binder::Var(n("y"))], Proc::output(n("y"), vec![]));
        let s = Substitution::single(&n("y"), n("z"));
        assert!(struct_congruent(&substitute(&p, &s), &p));
    }

    #[test]
    fn capture_is_avoided() {
        // (x?(z) => w!(*y, *z)){z/y}: naive substitution would capture the
        // incoming z under the binder; the result must be congruent to
        // x?(z') => w!(*z, *z').
        let p = Proc::input(
            n("x"),
            vec![Binder::Var(n("z"))],
            Proc::output(n("w"), vec![Proc::drop(n("y")), Proc::drop(n("z"))]),
        );
        let s = Substitution::single(&n("y"), n("z"));
        let out = substitute(&p, &s);
        let expect = Proc::input(
            n("x"),
            vec![Binder::Var(n("zz"))],
            Proc::output(n("w"), vec![Proc::str("z"), Proc::drop(n("zz"))]),
        );
        assert!(struct_congruent(&out, &expect));
    }

    #[test]
    fn channel_positions_substitute() {
        let p = Proc::input(n("a"), vec![Binder::Var(n("v"))], Proc::Stop);
        let s = Substitution::single(&n("a"), n("b"));
        let out = substitute(&p, &s);
        assert!(struct_congruent(
            &out,
            &Proc::input(n("b"), vec![Binder::Var(n("v"))], Proc::Stop)
        ));
    }

    #[test]
    fn rename_free_keeps_drops() {
        let p = Proc::Par(vec![
            Proc::drop(n("x")),
            Proc::output(n("x"), vec![Proc::drop(n("y"))]),
        ]);
        let out = rename_free(&p, &n("x"), &n("w"));
        assert_eq!(
            out,
            Proc::Par(vec![
                Proc::drop(n("w")),
                Proc::output(n("w"), vec![Proc::drop(n("y"))]),
            ])
        );
    }

    #[test]
    fn rename_free_respects_shadowing() {
        // x?(x) => x!() renames only the channel occurrence.
        let p = Proc::input(n("x"), vec![Binder::Var(n("x"))], Proc::output(n("x"), vec![]));
        let out = rename_free(&p, &n("x"), &n("w"));
        let expect = Proc::input(n("w"), vec![Binder::Var(n("x"))], Proc::output(n("x"), vec![]));
        assert!(struct_congruent(&out, &expect));
    }

    #[test]
    fn rename_free_avoids_capture_by_binder() {
        // y?(w) => x!(*w, *x) with x -> w must alpha-rename the binder.
        let p = Proc::input(
            n("y"),
            vec![Binder::Var(n("w"))],
            Proc::output(n("x"), vec![Proc::drop(n("w")), Proc::drop(n("x"))]),
        );
        let out = rename_free(&p, &n("x"), &n("w"));
        let expect = Proc::input(
            n("y"),
            vec![Binder::Var(n("u"))],
            Proc::output(n("w"), vec![Proc::drop(n("u")), Proc::drop(n("w"))]),
        );
        assert!(struct_congruent(&out, &expect));
    }
}
