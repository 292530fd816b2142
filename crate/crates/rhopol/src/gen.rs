//! Seeded random generators for core terms, one-hole contexts, and policy
//! formulas, shared by the property and acceptance suites. All generation
//! is driven by a caller-supplied [`Rng`], so suites stay reproducible by
//! seeding.

use rand::Rng;

use crate::logic::{Formula, NameFormula};
use crate::syntax::{Binder, GroundTerm, Name, Proc};

/// A default pool of pairwise non-equivalent free names, mixing flat
/// string names with structured quotes so that name equivalence is
/// exercised beyond string identity.
pub fn name_pool() -> Vec<Name> {
    vec![
        Name::var("a"),
        Name::var("b"),
        Name::var("c"),
        Name::var("u"),
        Name::var("w"),
        Name::quote(Proc::output(Name::var("a"), vec![])),
        Name::quote(Proc::int(0)),
    ]
}

/// The binder identifiers generated processes reuse; the small set makes
/// shadowing and capture situations common.
const BINDERS: [&str; 3] = ["x", "y", "z"];

/// A random process of size at most `max_size` (counting constructors
/// through quotes), with free names drawn from `pool` and binders from a
/// fixed small alphabet. The budget heuristic inside `go` undercounts name
/// interiors, so oversized draws are resampled with a smaller budget.
pub fn gen_proc_over(rng: &mut impl Rng, max_size: usize, pool: &[Name]) -> Proc {
    let mut budget = max_size.max(1);
    loop {
        let p = go(rng, budget, pool, &mut Vec::new());
        if p.size() <= max_size {
            return p;
        }
        budget = (budget - 1).max(1);
    }
}

/// [`gen_proc_over`] with the default pool.
pub fn gen_proc(rng: &mut impl Rng, max_size: usize) -> Proc {
    gen_proc_over(rng, max_size, &name_pool())
}

/// A random name: usually from the pool or the enclosing binders, sometimes
/// the quote of a small fresh process.
fn gen_name_in(rng: &mut impl Rng, budget: usize, pool: &[Name], scope: &mut Vec<Name>) -> Name {
    let structured = budget > 2 && rng.gen_ratio(1, 8);
    if structured {
        let inner = go(rng, 2, pool, &mut Vec::new());
        return Name::quote(inner);
    }
    if !scope.is_empty() && rng.gen_ratio(2, 5) {
        let i = rng.gen_range(0..scope.len());
        return scope[i].clone();
    }
    pool[rng.gen_range(0..pool.len())].clone()
}

/// A random name over the default pool, without binder context.
pub fn gen_name(rng: &mut impl Rng) -> Name {
    gen_name_in(rng, 3, &name_pool(), &mut Vec::new())
}

fn gen_ground(rng: &mut impl Rng) -> Proc {
    match rng.gen_range(0..4) {
        0 => Proc::int(rng.gen_range(0..5)),
        1 => Proc::str("msg"),
        2 => Proc::Ground(GroundTerm::Undefined),
        _ => Proc::Ground(GroundTerm::Add(
            Box::new(Proc::int(rng.gen_range(0..3))),
            Box::new(Proc::int(rng.gen_range(0..3))),
        )),
    }
}

fn go(rng: &mut impl Rng, budget: usize, pool: &[Name], scope: &mut Vec<Name>) -> Proc {
    if budget <= 1 {
        return match rng.gen_range(0..3) {
            0 => Proc::Stop,
            1 => gen_ground(rng),
            _ => Proc::drop(gen_name_in(rng, 1, pool, scope)),
        };
    }
    match rng.gen_range(0..10) {
        0 => Proc::Stop,
        1 => gen_ground(rng),
        2 => Proc::drop(gen_name_in(rng, budget, pool, scope)),
        3 | 4 => gen_output(rng, budget, pool, scope),
        5 | 6 => gen_input(rng, budget, pool, scope),
        7 => {
            let branches = vec![
                gen_io(rng, budget / 2, pool, scope),
                gen_io(rng, budget / 2, pool, scope),
            ];
            Proc::choice(branches).unwrap_or(Proc::Stop)
        }
        _ => {
            let n = rng.gen_range(2..=3);
            let each = (budget - 1) / n;
            Proc::Par((0..n).map(|_| go(rng, each.max(1), pool, scope)).collect())
        }
    }
}

fn gen_io(rng: &mut impl Rng, budget: usize, pool: &[Name], scope: &mut Vec<Name>) -> Proc {
    if rng.gen_bool(0.5) {
        gen_output(rng, budget, pool, scope)
    } else {
        gen_input(rng, budget, pool, scope)
    }
}

fn gen_output(rng: &mut impl Rng, budget: usize, pool: &[Name], scope: &mut Vec<Name>) -> Proc {
    let channel = gen_name_in(rng, budget, pool, scope);
    let nargs = rng.gen_range(0..=2.min(budget.saturating_sub(1)));
    let each = if nargs == 0 {
        0
    } else {
        (budget - 1) / nargs
    };
    let args = (0..nargs)
        .map(|_| go(rng, each.max(1), pool, scope))
        .collect();
    Proc::output(channel, args)
}

fn gen_input(rng: &mut impl Rng, budget: usize, pool: &[Name], scope: &mut Vec<Name>) -> Proc {
    let channel = gen_name_in(rng, budget, pool, scope);
    let nslots = rng.gen_range(0..=2);
    let mut pattern = Vec::new();
    let mut bound = Vec::new();
    for _ in 0..nslots {
        if rng.gen_ratio(1, 5) {
            pattern.push(Binder::Literal(gen_name_in(rng, 1, pool, scope)));
        } else {
            let b = Name::var(BINDERS[rng.gen_range(0..BINDERS.len())]);
            bound.push(b.clone());
            pattern.push(Binder::Var(b));
        }
    }
    let before = scope.len();
    scope.extend(bound);
    let body = go(rng, budget.saturating_sub(1 + nslots).max(1), pool, scope);
    scope.truncate(before);
    Proc::input(channel, pattern, body)
}

/// A random one-hole context, for congruence testing: applying it to
/// structurally congruent processes must give structurally congruent
/// results. Holes land in parallel compositions, input bodies, output
/// arguments, and — through quotes — name positions.
pub fn gen_context(rng: &mut impl Rng) -> impl Fn(Proc) -> Proc {
    let kind = rng.gen_range(0..6);
    let noise = gen_proc(rng, 4);
    let chan = gen_name(rng);
    move |hole: Proc| match kind {
        0 => Proc::Par(vec![hole, noise.clone()]),
        1 => Proc::input(
            chan.clone(),
            vec![Binder::Var(Name::var("x"))],
            Proc::Par(vec![hole, noise.clone()]),
        ),
        2 => Proc::output(chan.clone(), vec![hole]),
        3 => Proc::output(Name::quote(hole), vec![noise.clone()]),
        4 => Proc::drop(Name::quote(hole)),
        _ => Proc::Par(vec![
            Proc::output(chan.clone(), vec![noise.clone(), hole]),
            noise.clone(),
        ]),
    }
}

/// A weak-barb observation on `a` with some arity below 5: the process can
/// (possibly after internal steps) output on `a`.
fn weak_barb(a: &Name, arity: usize) -> Formula {
    Formula::Dissemination(
        NameFormula::QuoteProc(Box::new(a.unquote().clone())),
        vec![Formula::True; arity],
    )
}

fn any_weak_barb(rng: &mut impl Rng, names: &[Name]) -> Formula {
    let a = &names[rng.gen_range(0..names.len())];
    let mut f = weak_barb(a, 0);
    for arity in 1..=rng.gen_range(0..=4usize) {
        f = crate::logic::or(f, weak_barb(a, arity));
    }
    f
}

/// A random formula from the bisimulation-invariant fragment: truth, weak
/// barbs, boolean combinations, and greatest fixpoints of "barb and
/// repeat". No separation, structural atoms, receptions, or quantifiers —
/// exactly the part of the logic that cannot tell weakly bisimilar
/// processes apart.
pub fn gen_invariant_formula(rng: &mut impl Rng, names: &[Name], depth: usize) -> Formula {
    if depth == 0 {
        return if rng.gen_bool(0.3) {
            Formula::True
        } else {
            any_weak_barb(rng, names)
        };
    }
    match rng.gen_range(0..6) {
        0 => Formula::True,
        1 => any_weak_barb(rng, names),
        2 => Formula::Not(Box::new(gen_invariant_formula(rng, names, depth - 1))),
        3 => Formula::And(
            Box::new(gen_invariant_formula(rng, names, depth - 1)),
            Box::new(gen_invariant_formula(rng, names, depth - 1)),
        ),
        4 => crate::logic::or(
            gen_invariant_formula(rng, names, depth - 1),
            gen_invariant_formula(rng, names, depth - 1),
        ),
        _ => Formula::Gfp(
            "X".into(),
            Box::new(Formula::And(
                Box::new(any_weak_barb(rng, names)),
                Box::new(Formula::PropVar("X".into())),
            )),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generation_is_deterministic_under_a_seed() {
        let mut r1 = ChaCha8Rng::seed_from_u64(11);
        let mut r2 = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            assert_eq!(gen_proc(&mut r1, 10), gen_proc(&mut r2, 10));
        }
    }

    #[test]
    fn sizes_respect_the_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let p = gen_proc(&mut rng, 12);
            assert!(p.size() <= 12, "size {} for {p}", p.size());
        }
    }

    #[test]
    fn pool_names_are_pairwise_distinct() {
        let pool = name_pool();
        for (i, a) in pool.iter().enumerate() {
            for b in &pool[i + 1..] {
                assert!(!crate::syntax::name_equiv(a, b), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn invariant_formulas_avoid_structural_atoms() {
        fn check(f: &Formula) {
            match f {
                Formula::True | Formula::PropVar(_) => {}
                Formula::Not(g) | Formula::Gfp(_, g) => check(g),
                Formula::And(a, b) => {
                    check(a);
                    check(b);
                }
                Formula::Dissemination(NameFormula::QuoteProc(_), args) => {
                    for a in args {
                        check(a);
                    }
                }
                other => panic!("outside the invariant fragment: {other}"),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let names = name_pool();
        for _ in 0..200 {
            check(&gen_invariant_formula(&mut rng, &names, 3));
        }
    }
}
