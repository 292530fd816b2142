//! Canonical forms: the decision procedure for structural congruence and,
//! through quotes, name equivalence.
//!
//! A [`CanonicalForm`] is a nameless (de Bruijn) normal form in which
//! parallel compositions are flattened, unit-free and sorted, choices are
//! sorted multisets of IO branches, and every bound name is replaced by its
//! binder coordinates. Two processes are structurally congruent exactly when
//! their canonical forms are equal, and two names are name-equivalent exactly
//! when their quoted processes are congruent.
//!
//! Names are atomic: substitution never rewrites the interior of a quote, so
//! a quote is a binding boundary and its body canonicalizes in an empty
//! binder environment.
//!
//! Name equivalence additionally satisfies the quote-drop rule: quoting a
//! dereference re-names the dereferenced name, `@(*x) ≡_N x`. Without it a
//! channel received as a message argument could never be reconnected to its
//! sender — the receiver would hold `@(*x)` while the other party listens on
//! `x`. The rule lives purely on the name side; as processes, `*@P` and `P`
//! remain distinct.
//!
//! The integer literal `0` is identified with the stopped process: both are
//! inert, and the identification lets `0` serve simultaneously as the unit
//! of parallel composition and the zero of ground arithmetic.

use super::{Binder, GroundTerm, Name, Proc};

/// Canonical process body. Derived `Ord` gives the total order used to sort
/// parallel components and choice branches.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CProc {
    Stop,
    Ground(CGround),
    Drop(CName),
    Input {
        channel: CName,
        pattern: Vec<CPat>,
        body: Box<CProc>,
    },
    Output {
        channel: CName,
        args: Vec<CProc>,
    },
    Choice(Vec<CProc>),
    Par(Vec<CProc>),
}

/// Canonical name: either a binder reference `Bound(depth, index)` —
/// `depth` counts enclosing binder groups outward from the occurrence,
/// `index` counts only the variable (non-literal) positions of that group —
/// or the quote of a closed canonical process.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CName {
    Bound(u32, u32),
    Quote(Box<CProc>),
}

/// Canonical pattern slot: variable positions are nameless.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CPat {
    Var,
    Lit(CName),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CGround {
    Int(i64),
    Str(String),
    Undefined,
    Add(Box<CProc>, Box<CProc>),
    Sub(Box<CProc>, Box<CProc>),
}

/// The canonical form of a process; equality on this type is structural
/// congruence of the underlying processes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(CProc);

impl CanonicalForm {
    pub fn root(&self) -> &CProc {
        &self.0
    }

    pub fn is_stop(&self) -> bool {
        self.0 == CProc::Stop
    }

    /// Top-level parallel components as a canonical multiset (sorted).
    /// Stop has no components; a non-Par root is its own sole component.
    pub fn components(&self) -> Vec<&CProc> {
        match &self.0 {
            CProc::Stop => Vec::new(),
            CProc::Par(ps) => ps.iter().collect(),
            other => vec![other],
        }
    }

    /// Rebuild a process from the canonical form, inventing reserved
    /// `%v`-prefixed identifiers for the nameless binders. The result
    /// canonicalizes back to `self`.
    ///
    /// Panics if a `Bound` reference escapes every binder group, which
    /// cannot happen for forms produced by [`canonicalize`].
    pub fn to_proc(&self) -> Proc {
        let mut avoid = Vec::new();
        collect_strs(&self.0, &mut avoid);
        let mut namer = BinderNamer {
            counter: 0,
            avoid,
        };
        build_proc(&self.0, &mut Vec::new(), &mut namer)
    }
}

struct BinderNamer {
    counter: usize,
    avoid: Vec<String>,
}

impl BinderNamer {
    fn next(&mut self) -> Name {
        loop {
            let s = format!("%v{}", self.counter);
            self.counter += 1;
            if !self.avoid.iter().any(|a| a == &s) {
                return Name::quote(Proc::Ground(GroundTerm::Str(s)));
            }
        }
    }
}

fn collect_strs(p: &CProc, out: &mut Vec<String>) {
    match p {
        CProc::Stop => {}
        CProc::Ground(g) => match g {
            CGround::Str(s) => out.push(s.clone()),
            CGround::Add(a, b) | CGround::Sub(a, b) => {
                collect_strs(a, out);
                collect_strs(b, out);
            }
            _ => {}
        },
        CProc::Drop(n) => collect_strs_name(n, out),
        CProc::Input {
            channel,
            pattern,
            body,
        } => {
            collect_strs_name(channel, out);
            for pat in pattern {
                if let CPat::Lit(n) = pat {
                    collect_strs_name(n, out);
                }
            }
            collect_strs(body, out);
        }
        CProc::Output { channel, args } => {
            collect_strs_name(channel, out);
            for a in args {
                collect_strs(a, out);
            }
        }
        CProc::Choice(ps) | CProc::Par(ps) => {
            for q in ps {
                collect_strs(q, out);
            }
        }
    }
}

fn collect_strs_name(n: &CName, out: &mut Vec<String>) {
    if let CName::Quote(p) = n {
        collect_strs(p, out);
    }
}

fn build_proc(p: &CProc, env: &mut Vec<Vec<Name>>, namer: &mut BinderNamer) -> Proc {
    match p {
        CProc::Stop => Proc::Stop,
        CProc::Ground(g) => Proc::Ground(match g {
            CGround::Int(i) => GroundTerm::Int(*i),
            CGround::Str(s) => GroundTerm::Str(s.clone()),
            CGround::Undefined => GroundTerm::Undefined,
            CGround::Add(a, b) => GroundTerm::Add(
                Box::new(build_proc(a, env, namer)),
                Box::new(build_proc(b, env, namer)),
            ),
            CGround::Sub(a, b) => GroundTerm::Sub(
                Box::new(build_proc(a, env, namer)),
                Box::new(build_proc(b, env, namer)),
            ),
        }),
        CProc::Drop(n) => Proc::Drop(build_name(n, env, namer)),
        CProc::Input {
            channel,
            pattern,
            body,
        } => {
            let channel = build_name(channel, env, namer);
            let mut group = Vec::new();
            let pattern = pattern
                .iter()
                .map(|pat| match pat {
                    CPat::Var => {
                        let n = namer.next();
                        group.push(n.clone());
                        Binder::Var(n)
                    }
                    CPat::Lit(n) => Binder::Literal(build_name(n, env, namer)),
                })
                .collect();
            env.push(group);
            let body = build_proc(body, env, namer);
            env.pop();
            Proc::input(channel, pattern, body)
        }
        CProc::Output { channel, args } => Proc::output(
            build_name(channel, env, namer),
            args.iter().map(|a| build_proc(a, env, namer)).collect(),
        ),
        CProc::Choice(bs) => Proc::Choice(
            bs.iter().map(|b| build_proc(b, env, namer)).collect(),
        ),
        CProc::Par(ps) => Proc::Par(ps.iter().map(|q| build_proc(q, env, namer)).collect()),
    }
}

fn build_name(n: &CName, env: &mut Vec<Vec<Name>>, namer: &mut BinderNamer) -> Name {
    match n {
        CName::Bound(depth, index) => {
            let group = env
                .iter()
                .rev()
                .nth(*depth as usize)
                .expect("dangling binder reference in canonical form");
            group[*index as usize].clone()
        }
        // Quote interiors are closed with respect to outer binders.
        CName::Quote(p) => Name::quote(build_proc(p, &mut Vec::new(), namer)),
    }
}

/// Canonicalize a process. See the module docs for the normal form.
pub fn canonicalize(p: &Proc) -> CanonicalForm {
    CanonicalForm(canon_proc(p, &mut Vec::new()))
}

/// Structural congruence: alpha conversion plus the commutative-monoid laws
/// of `|` with unit `0` (and the corresponding laws for choice).
pub fn struct_congruent(p: &Proc, q: &Proc) -> bool {
    canonicalize(p) == canonicalize(q)
}

/// Name equivalence `≡_N`: congruence of the quoted processes together with
/// the quote-drop rule `@(*x) ≡_N x`.
pub fn name_equiv(a: &Name, b: &Name) -> bool {
    name_key(a) == name_key(b)
}

/// The canonical key identifying a name's `≡_N`-equivalence class: the
/// canonical form of the quote interior, with a dereference interior
/// collapsed to the key of the dereferenced name.
pub fn name_key(n: &Name) -> CanonicalForm {
    CanonicalForm(name_key_proc(n.unquote()))
}

fn name_key_proc(interior: &Proc) -> CProc {
    let mut key = canon_proc(interior, &mut Vec::new());
    // Quote-drop: the interior `*m` names exactly `m`. Interiors are
    // canonicalized in an empty environment, so the dropped name is always
    // a `Quote` whose own key is already collapsed.
    while let CProc::Drop(CName::Quote(inner)) = key {
        key = *inner;
    }
    key
}

fn canon_proc(p: &Proc, env: &mut Vec<Vec<CProc>>) -> CProc {
    match p {
        Proc::Stop => CProc::Stop,
        Proc::Ground(g) => match g {
            // Integer zero and the stopped process are identified.
            GroundTerm::Int(0) => CProc::Stop,
            GroundTerm::Int(i) => CProc::Ground(CGround::Int(*i)),
            GroundTerm::Str(s) => CProc::Ground(CGround::Str(s.clone())),
            GroundTerm::Undefined => CProc::Ground(CGround::Undefined),
            GroundTerm::Add(a, b) => CProc::Ground(CGround::Add(
                Box::new(canon_proc(a, env)),
                Box::new(canon_proc(b, env)),
            )),
            GroundTerm::Sub(a, b) => CProc::Ground(CGround::Sub(
                Box::new(canon_proc(a, env)),
                Box::new(canon_proc(b, env)),
            )),
        },
        Proc::Drop(n) => CProc::Drop(canon_name(n, env)),
        Proc::Input(i) => {
            let channel = canon_name(&i.channel, env);
            let mut group = Vec::new();
            let pattern = i
                .pattern
                .iter()
                .map(|b| match b {
                    Binder::Var(n) => {
                        // The binder key is the name's equivalence-class key;
                        // literals and the channel were resolved in the
                        // enclosing environment before this group opens.
                        group.push(name_key_proc(n.unquote()));
                        CPat::Var
                    }
                    Binder::Literal(n) => CPat::Lit(canon_name(n, env)),
                })
                .collect();
            env.push(group);
            let body = canon_proc(&i.body, env);
            env.pop();
            CProc::Input {
                channel,
                pattern,
                body: Box::new(body),
            }
        }
        Proc::Output(o) => CProc::Output {
            channel: canon_name(&o.channel, env),
            args: o.args.iter().map(|a| canon_proc(a, env)).collect(),
        },
        Proc::Par(ps) => {
            let mut parts = Vec::new();
            for q in ps {
                match canon_proc(q, env) {
                    CProc::Stop => {}
                    CProc::Par(inner) => parts.extend(inner),
                    other => parts.push(other),
                }
            }
            normal_par(parts)
        }
        Proc::Choice(bs) => {
            let mut branches = Vec::new();
            for b in bs {
                match canon_proc(b, env) {
                    CProc::Stop => {}
                    CProc::Choice(inner) => branches.extend(inner),
                    other => branches.push(other),
                }
            }
            branches.sort();
            match branches.len() {
                0 => CProc::Stop,
                1 => branches.pop().unwrap(),
                _ => CProc::Choice(branches),
            }
        }
    }
}

fn normal_par(mut parts: Vec<CProc>) -> CProc {
    parts.sort();
    match parts.len() {
        0 => CProc::Stop,
        1 => parts.pop().unwrap(),
        _ => CProc::Par(parts),
    }
}

fn canon_name(n: &Name, env: &[Vec<CProc>]) -> CName {
    // A name is atomic: its identity is the canonical form of its quote
    // interior, computed in an empty binder environment.
    let key = name_key_proc(n.unquote());
    for (depth, group) in env.iter().rev().enumerate() {
        // Rightmost variable of a group shadows earlier duplicates.
        for (index, binder_key) in group.iter().enumerate().rev() {
            if *binder_key == key {
                return CName::Bound(depth as u32, index as u32);
            }
        }
    }
    CName::Quote(Box::new(key))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::var(s)
    }

    #[test]
    fn par_laws() {
        let a = Proc::output(n("x"), vec![Proc::Stop]);
        let b = Proc::output(n("y"), vec![Proc::Stop]);
        // unit
        assert!(struct_congruent(
            &Proc::Par(vec![a.clone(), Proc::Stop]),
            &a
        ));
        // commutativity
        assert!(struct_congruent(
            &Proc::Par(vec![a.clone(), b.clone()]),
            &Proc::Par(vec![b.clone(), a.clone()])
        ));
        // associativity
        assert!(struct_congruent(
            &Proc::Par(vec![Proc::Par(vec![a.clone(), b.clone()]), a.clone()]),
            &Proc::Par(vec![a.clone(), Proc::Par(vec![b.clone(), a.clone()])])
        ));
    }

    #[test]
    fn alpha_equivalence() {
        // x?(y) => y!() is congruent to x?(z) => z!()
        let p = Proc::input(
            n("x"),
            vec![Binder::Var(n("y"))],
            Proc::output(n("y"), vec![]),
        );
        let q = Proc::input(
            n("x"),
            vec![Binder::Var(n("z"))],
            Proc::output(n("z"), vec![]),
        );
        assert!(struct_congruent(&p, &q));
        // ... but not to x?(y) => x!()
        let r = Proc::input(
            n("x"),
            vec![Binder::Var(n("y"))],
            Proc::output(n("x"), vec![]),
        );
        assert!(!struct_congruent(&p, &r));
    }

    #[test]
    fn quote_is_binding_boundary() {
        // In x?(y) => z!( *@{ y!() } ) the quoted y!() does not refer to the
        // binder, so renaming the binder must not change the canonical form
        // of the quote interior.
        let quoted = Name::quote(Proc::output(n("y"), vec![]));
        let p = Proc::input(
            n("x"),
            vec![Binder::Var(n("y"))],
            Proc::drop(quoted.clone()),
        );
        let q = Proc::input(n("x"), vec![Binder::Var(n("w"))], Proc::drop(quoted));
        assert!(struct_congruent(&p, &q));
    }

    #[test]
    fn quote_drop_renames_the_same_name() {
        // @(*x) is the name x again, at any quote depth.
        let x = n("x");
        let qd = Name::quote(Proc::drop(x.clone()));
        assert!(name_equiv(&qd, &x));
        let qdd = Name::quote(Proc::drop(qd.clone()));
        assert!(name_equiv(&qdd, &x));
        // ... and through congruence of the interiors: @(*x | 0) ≡ @(*x).
        let padded = Name::quote(Proc::Par(vec![Proc::drop(x.clone()), Proc::Stop]));
        assert!(name_equiv(&padded, &x));
        // The collapse is a name-level rule only: *@P and P stay distinct
        // processes, so @(*x | *x) names something new.
        assert!(!struct_congruent(
            &Proc::drop(Name::quote(Proc::Stop)),
            &Proc::Stop
        ));
        let doubled = Name::quote(Proc::Par(vec![
            Proc::drop(x.clone()),
            Proc::drop(x.clone()),
        ]));
        assert!(!name_equiv(&doubled, &x));
        // A binder reached through quote-drop is still the binder: alpha
        // renaming treats x?(y) => @(*y)!() like x?(y) => y!().
        let via_drop = Proc::input(
            n("x"),
            vec![Binder::Var(n("y"))],
            Proc::output(Name::quote(Proc::drop(n("y"))), vec![]),
        );
        let direct = Proc::input(
            n("x"),
            vec![Binder::Var(n("z"))],
            Proc::output(n("z"), vec![]),
        );
        assert!(struct_congruent(&via_drop, &direct));
    }

    #[test]
    fn name_equiv_respects_congruence() {
        let a = Name::quote(Proc::Par(vec![
            Proc::output(n("x"), vec![]),
            Proc::output(n("y"), vec![]),
        ]));
        let b = Name::quote(Proc::Par(vec![
            Proc::output(n("y"), vec![]),
            Proc::Par(vec![Proc::output(n("x"), vec![]), Proc::Stop]),
        ]));
        assert!(name_equiv(&a, &b));
        assert!(!name_equiv(&a, &n("x")));
    }

    #[test]
    fn int_zero_is_stop() {
        assert!(struct_congruent(&Proc::int(0), &Proc::Stop));
        assert!(name_equiv(
            &Name::quote(Proc::int(0)),
            &Name::quote(Proc::Stop)
        ));
        assert!(!struct_congruent(&Proc::int(1), &Proc::Stop));
    }

    #[test]
    fn choice_is_sorted_multiset() {
        let a = Proc::output(n("x"), vec![Proc::Stop]);
        let b = Proc::input(n("y"), vec![Binder::Var(n("v"))], Proc::Stop);
        let c1 = Proc::Choice(vec![a.clone(), b.clone()]);
        let c2 = Proc::Choice(vec![b.clone(), a.clone()]);
        assert!(struct_congruent(&c1, &c2));
        // multiset: duplicate branches are kept
        let d1 = Proc::Choice(vec![a.clone(), a.clone()]);
        assert!(!struct_congruent(&d1, &a));
    }

    #[test]
    fn literal_binder_resolves_in_outer_scope() {
        // x?(y) => x?(=y, w) => 0: the literal refers to the outer binder.
        let inner1 = Proc::input(
            n("x"),
            vec![Binder::Literal(n("y")), Binder::Var(n("w"))],
            Proc::Stop,
        );
        let p = Proc::input(n("x"), vec![Binder::Var(n("y"))], inner1);
        let inner2 = Proc::input(
            n("x"),
            vec![Binder::Literal(n("z")), Binder::Var(n("w"))],
            Proc::Stop,
        );
        let q = Proc::input(n("x"), vec![Binder::Var(n("z"))], inner2);
        assert!(struct_congruent(&p, &q));

        // Whereas a literal of an unrelated free name does not match.
        let inner3 = Proc::input(
            n("x"),
            vec![Binder::Literal(n("u")), Binder::Var(n("w"))],
            Proc::Stop,
        );
        let r = Proc::input(n("x"), vec![Binder::Var(n("z"))], inner3);
        assert!(!struct_congruent(&p, &r));
    }

    #[test]
    fn to_proc_roundtrip() {
        let p = Proc::input(
            n("x"),
            vec![Binder::Var(n("a")), Binder::Var(n("b"))],
            Proc::Par(vec![
                Proc::output(n("a"), vec![Proc::drop(n("b"))]),
                Proc::input(n("b"), vec![Binder::Var(n("c"))], Proc::drop(n("a"))),
            ]),
        );
        let c = canonicalize(&p);
        let rebuilt = c.to_proc();
        assert_eq!(canonicalize(&rebuilt), c);
    }

    #[test]
    fn to_proc_avoids_colliding_strings() {
        // A process that already mentions the string "%v0" must not have its
        // binder named %v0.
        let p = Proc::input(
            n("x"),
            vec![Binder::Var(n("a"))],
            Proc::Par(vec![Proc::str("%v0"), Proc::output(n("a"), vec![])]),
        );
        let c = canonicalize(&p);
        assert_eq!(canonicalize(&c.to_proc()), c);
    }
}
