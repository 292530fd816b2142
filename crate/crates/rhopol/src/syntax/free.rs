//! Free-name and name-occurrence computation, with sets keyed by name
//! equivalence.

use std::collections::BTreeMap;

use super::canon::{name_key, CanonicalForm};
use super::{Binder, GroundTerm, Name, Proc};

/// A set of names deduplicated under `≡_N`. Keys are the canonical forms of
/// the quote interiors; one representative syntactic name is retained per
/// class. Iteration order follows the canonical order, so it is
/// deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameSet {
    map: BTreeMap<CanonicalForm, Name>,
}

impl NameSet {
    pub fn new() -> NameSet {
        NameSet::default()
    }

    /// The canonical key identifying a name's equivalence class.
    pub fn key(n: &Name) -> CanonicalForm {
        name_key(n)
    }

    /// Insert a representative; returns false if the class was present.
    pub fn insert(&mut self, n: &Name) -> bool {
        match self.map.entry(Self::key(n)) {
            std::collections::btree_map::Entry::Occupied(_) => false,
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(n.clone());
                true
            }
        }
    }

    pub fn contains(&self, n: &Name) -> bool {
        self.map.contains_key(&Self::key(n))
    }

    pub fn contains_key(&self, key: &CanonicalForm) -> bool {
        self.map.contains_key(key)
    }

    pub fn remove(&mut self, n: &Name) -> bool {
        self.map.remove(&Self::key(n)).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Name> {
        self.map.values()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn extend_from(&mut self, other: &NameSet) {
        for n in other.iter() {
            self.insert(n);
        }
    }

    pub fn filtered(&self, mut keep: impl FnMut(&Name) -> bool) -> NameSet {
        let mut out = NameSet::new();
        for n in self.iter() {
            if keep(n) {
                out.insert(n);
            }
        }
        out
    }
}

impl FromIterator<Name> for NameSet {
    fn from_iter<T: IntoIterator<Item = Name>>(iter: T) -> NameSet {
        let mut s = NameSet::new();
        for n in iter {
            s.insert(&n);
        }
        s
    }
}

/// Free names of a process: every name occurring at a name position
/// (channel, dereference, literal pattern) not bound by an enclosing input
/// variable. Names are atomic — quote interiors are not descended into.
pub fn free_names(p: &Proc) -> NameSet {
    let mut out = NameSet::new();
    let mut bound = Vec::new();
    free_walk(p, &mut bound, &mut out);
    out
}

fn note(n: &Name, bound: &[CanonicalForm], out: &mut NameSet) {
    let key = NameSet::key(n);
    if !bound.contains(&key) {
        out.insert(n);
    }
}

fn free_walk(p: &Proc, bound: &mut Vec<CanonicalForm>, out: &mut NameSet) {
    match p {
        Proc::Stop => {}
        Proc::Ground(g) => match g {
            GroundTerm::Add(a, b) | GroundTerm::Sub(a, b) => {
                free_walk(a, bound, out);
                free_walk(b, bound, out);
            }
            _ => {}
        },
        Proc::Drop(n) => note(n, bound, out),
        Proc::Output(o) => {
            note(&o.channel, bound, out);
            for a in &o.args {
                free_walk(a, bound, out);
            }
        }
        Proc::Input(i) => {
            note(&i.channel, bound, out);
            let depth = bound.len();
            for b in &i.pattern {
                match b {
                    Binder::Literal(n) => note(n, bound, out),
                    Binder::Var(n) => bound.push(NameSet::key(n)),
                }
            }
            free_walk(&i.body, bound, out);
            bound.truncate(depth);
        }
        Proc::Choice(bs) | Proc::Par(bs) => {
            for q in bs {
                free_walk(q, bound, out);
            }
        }
    }
}

/// All names occurring in a process, free or bound, including binder names
/// and names buried inside quote interiors. This is the avoidance set for
/// freshness.
pub fn names(p: &Proc) -> NameSet {
    let mut out = NameSet::new();
    names_walk(p, &mut out);
    out
}

fn note_all(n: &Name, out: &mut NameSet) {
    out.insert(n);
    names_walk(n.unquote(), out);
}

fn names_walk(p: &Proc, out: &mut NameSet) {
    match p {
        Proc::Stop => {}
        Proc::Ground(g) => match g {
            GroundTerm::Add(a, b) | GroundTerm::Sub(a, b) => {
                names_walk(a, out);
                names_walk(b, out);
            }
            _ => {}
        },
        Proc::Drop(n) => note_all(n, out),
        Proc::Output(o) => {
            note_all(&o.channel, out);
            for a in &o.args {
                names_walk(a, out);
            }
        }
        Proc::Input(i) => {
            note_all(&i.channel, out);
            for b in &i.pattern {
                note_all(b.name(), out);
            }
            names_walk(&i.body, out);
        }
        Proc::Choice(bs) | Proc::Par(bs) => {
            for q in bs {
                names_walk(q, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::var(s)
    }

    #[test]
    fn input_binds_pattern_vars() {
        // x?(y) => y!( *z ): free = {x, z}
        let p = Proc::input(
            n("x"),
            vec![Binder::Var(n("y"))],
            Proc::output(n("y"), vec![Proc::drop(n("z"))]),
        );
        let fns = free_names(&p);
        assert!(fns.contains(&n("x")));
        assert!(fns.contains(&n("z")));
        assert!(!fns.contains(&n("y")));
        assert_eq!(fns.len(), 2);
    }

    #[test]
    fn output_args_contribute() {
        // x!( y!(0) ): free = {x, y}
        let p = Proc::output(n("x"), vec![Proc::output(n("y"), vec![Proc::Stop])]);
        let fns = free_names(&p);
        assert_eq!(fns.len(), 2);
    }

    #[test]
    fn drop_is_free_occurrence() {
        let p = Proc::drop(n("x"));
        assert!(free_names(&p).contains(&n("x")));
    }

    #[test]
    fn literal_patterns_are_occurrences() {
        // x?(=lbl, y) => 0: lbl free, y bound
        let p = Proc::input(
            n("x"),
            vec![Binder::Literal(n("lbl")), Binder::Var(n("y"))],
            Proc::Stop,
        );
        let fns = free_names(&p);
        assert!(fns.contains(&n("lbl")));
        assert!(!fns.contains(&n("y")));
    }

    #[test]
    fn dedup_under_name_equiv() {
        // @(0|0) and @0 are the same name.
        let a = Name::quote(Proc::Stop);
        let b = Name::quote(Proc::Par(vec![Proc::Stop, Proc::Stop]));
        let p = Proc::Par(vec![
            Proc::output(a.clone(), vec![]),
            Proc::output(b.clone(), vec![]),
        ]);
        assert_eq!(free_names(&p).len(), 1);
    }

    #[test]
    fn names_descends_into_quotes() {
        // channel @{ y!() } contains the name y
        let ch = Name::quote(Proc::output(n("y"), vec![]));
        let p = Proc::output(ch, vec![]);
        let all = names(&p);
        assert!(all.contains(&n("y")));
        assert!(free_names(&p).len() == 1 && !free_names(&p).contains(&n("y")));
    }
}
