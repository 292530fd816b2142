//! Replication encodings and fresh-name generation.
//!
//! Freshness is content-addressed: a fresh name is a quote of
//! `@"%tag"!(k)` where `k` seeds from a hash of the term the name must be
//! fresh for, then probes linearly past any names that term already uses.
//! Identical requests yield identical names, so desugaring stays
//! deterministic and compositional.

use crate::syntax::{canonicalize, names, Binder, GroundTerm, Name, Proc};

/// Names in the reserved namespace cannot be written in surface programs:
/// they are quotes of `@"%tag"!(k)` messages (or of `"%tag"` strings used
/// for alpha-renaming), and `%` is not an identifier character.
pub fn is_reserved(n: &Name) -> bool {
    match n.unquote() {
        Proc::Output(o) => match o.channel.unquote() {
            Proc::Ground(GroundTerm::Str(s)) => s.starts_with('%'),
            _ => false,
        },
        Proc::Ground(GroundTerm::Str(s)) => s.starts_with('%'),
        _ => false,
    }
}

fn reserved_name(tag: &str, k: i64) -> Name {
    Name::quote(Proc::output(
        Name::quote(Proc::str(format!("%{tag}"))),
        vec![Proc::int(k)],
    ))
}

fn fnv64(tag: &str, body: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag
        .as_bytes()
        .iter()
        .chain([0u8].iter())
        .chain(body.as_bytes())
    {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A name guaranteed not to occur anywhere in `avoid` (including its quote
/// interiors and binders). Deterministic in `(tag, avoid)` up to structural
/// congruence of `avoid`.
pub fn fresh_name(tag: &str, avoid: &Proc) -> Name {
    let taken = names(avoid);
    let seed = fnv64(tag, &format!("{:?}", canonicalize(avoid).root()));
    let mut k = (seed % 100_000_000) as i64;
    loop {
        let cand = reserved_name(tag, k);
        if !taken.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

/// The duplicator `D(x) = x?(y) => ( x!(*y) | *y )`. The binder is chosen
/// fresh so it can never coincide with `x` itself.
pub fn d_of(x: &Name) -> Proc {
    let y = fresh_name("dup", &Proc::Drop(x.clone()));
    Proc::input(
        x.clone(),
        vec![Binder::Var(y.clone())],
        Proc::par(vec![
            Proc::output(x.clone(), vec![Proc::Drop(y.clone())]),
            Proc::Drop(y),
        ]),
    )
}

/// Eager replication: `x!( D(x) | P ) | D(x)`. Spawns copies of `P`
/// unboundedly, with no quiescent state.
pub fn replicate_eager(x: &Name, p: &Proc) -> Proc {
    let d = d_of(x);
    Proc::par(vec![
        Proc::output(x.clone(), vec![Proc::par(vec![d.clone(), p.clone()])]),
        d,
    ])
}

/// Lazy replication of an input-guarded process: each guard body re-arms the
/// replication machinery instead of the machinery copying itself ahead of
/// demand, so the process graph stays finite while no messages arrive.
///
/// `p` must be an input or a choice of inputs; returns `None` otherwise.
pub fn replicate_lazy(x: &Name, p: &Proc) -> Option<Proc> {
    let d = d_of(x);
    let armed = arm(p, &d)?;
    Some(Proc::par(vec![
        Proc::output(x.clone(), vec![armed]),
        d,
    ]))
}

fn arm(p: &Proc, d: &Proc) -> Option<Proc> {
    match p {
        Proc::Input(inp) => {
            let mut inp = inp.clone();
            inp.body = Box::new(Proc::par(vec![d.clone(), (*inp.body).clone()]));
            Some(Proc::Input(inp))
        }
        Proc::Choice(branches) => {
            let armed: Option<Vec<Proc>> = branches.iter().map(|b| arm(b, d)).collect();
            Proc::choice(armed?)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::free;

    #[test]
    fn fresh_name_avoids_and_is_deterministic() {
        let p = Proc::output(Name::var("a"), vec![Proc::int(1)]);
        let f1 = fresh_name("v", &p);
        let f2 = fresh_name("v", &p);
        assert_eq!(f1, f2);
        assert!(!free::names(&p).contains(&f1));
        assert!(is_reserved(&f1));
        assert!(!is_reserved(&Name::var("v")));
    }

    #[test]
    fn fresh_name_probes_past_collisions() {
        let f0 = fresh_name("v", &Proc::Stop);
        // A process that already mentions the would-be fresh name forces the
        // probe to move on.
        let p = Proc::output(f0.clone(), vec![]);
        let f1 = fresh_name("v", &p);
        assert_ne!(f0, f1);
        assert!(!free::names(&p).contains(&f1));
    }

    #[test]
    fn duplicator_binder_never_captures_its_channel() {
        let x = fresh_name("dup", &Proc::Stop);
        // Adversarial channel: exactly the name d_of would pick first.
        let d = d_of(&x);
        if let Proc::Input(inp) = &d {
            assert_eq!(inp.channel, x);
            assert_ne!(inp.pattern[0].name(), &x);
        } else {
            panic!("duplicator must be an input");
        }
    }

    #[test]
    fn lazy_requires_input_guard() {
        let x = Name::var("x");
        assert!(replicate_lazy(&x, &Proc::Drop(Name::var("y"))).is_none());
        let guard = Proc::input(Name::var("u"), vec![], Proc::Stop);
        let r = replicate_lazy(&x, &guard).expect("input-guarded");
        if let Proc::Par(parts) = &r {
            assert_eq!(parts.len(), 2);
        } else {
            panic!("expected packet | duplicator");
        }
    }
}
