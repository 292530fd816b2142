//! Operational semantics: redex enumeration, single steps, seeded random
//! runs, and bounded reachability.
//!
//! States are kept normalized: parallel components are flattened, sorted by
//! canonical key (stably, so binder names survive), null components are
//! dropped, and nested choices are flattened. Communication happens between
//! two distinct top-level components; firing a branch consumes its whole
//! choice. Message arguments are evaluated at consumption: a ground sum
//! whose operands are (canonically) integer literals becomes a literal
//! before it is quoted into the receiver.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::syntax::{
    canonicalize, name_equiv, pretty::pretty_name, substitute, Binder, CanonicalForm, GroundTerm,
    InputProc, Name, OutputProc, Proc, Substitution,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("stale redex: {reason}")]
    StaleRedex { reason: String },
}

fn stale<T>(reason: impl Into<String>) -> Result<T, ReduceError> {
    Err(ReduceError::StaleRedex {
        reason: reason.into(),
    })
}

/// A communication opportunity between two top-level components of a
/// normalized state. Branch indices identify the firing alternative when the
/// component is a choice; the channels are kept as witnesses (they are
/// name-equivalent but need not be syntactically equal).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redex {
    pub input_component: usize,
    pub input_branch: Option<usize>,
    pub output_component: usize,
    pub output_branch: Option<usize>,
    pub input_channel: Name,
    pub output_channel: Name,
}

impl Redex {
    /// The communication channel as written on the input side.
    pub fn channel(&self) -> &Name {
        &self.input_channel
    }

    pub fn describe(&self) -> String {
        format!(
            "{} [in {}{} / out {}{}]",
            pretty_name(&self.input_channel),
            self.input_component,
            match self.input_branch {
                Some(b) => format!(".{b}"),
                None => String::new(),
            },
            self.output_component,
            match self.output_branch {
                Some(b) => format!(".{b}"),
                None => String::new(),
            },
        )
    }
}

/// A recorded run: the (normalized) initial state and, per step, the fired
/// redex and the state it produced.
#[derive(Debug, Clone)]
pub struct Trace {
    pub initial: Proc,
    pub steps: Vec<(Redex, Proc)>,
    pub terminated: bool,
    pub seed: u64,
}

impl Trace {
    pub fn final_state(&self) -> &Proc {
        self.steps.last().map_or(&self.initial, |(_, p)| p)
    }
}

/// Reading of an inert value as an integer; the null process is zero.
fn int_of(p: &Proc) -> Option<i64> {
    match p {
        Proc::Ground(GroundTerm::Int(i)) => Some(*i),
        Proc::Stop => Some(0),
        _ => None,
    }
}

/// Evaluate the ground spine of a value. Sums of integer literals reduce;
/// anything else (including overflow) is left stuck.
pub fn eval_ground(p: &Proc) -> Proc {
    match p {
        Proc::Ground(GroundTerm::Add(a, b)) => combine(a, b, i64::checked_add, GroundTerm::Add),
        Proc::Ground(GroundTerm::Sub(a, b)) => combine(a, b, i64::checked_sub, GroundTerm::Sub),
        other => other.clone(),
    }
}

/// The name an output argument delivers: the quote of its evaluated value.
/// A dereference argument delivers the dereferenced name itself — same name
/// by quote-drop, but kept syntactically small so traces stay legible.
fn delivered_name(arg: &Proc) -> Name {
    match eval_ground(arg) {
        Proc::Drop(n) => n,
        other => Name::quote(other),
    }
}

fn combine(
    a: &Proc,
    b: &Proc,
    op: fn(i64, i64) -> Option<i64>,
    rebuild: fn(Box<Proc>, Box<Proc>) -> GroundTerm,
) -> Proc {
    let (a, b) = (eval_ground(a), eval_ground(b));
    if let (Some(x), Some(y)) = (int_of(&a), int_of(&b)) {
        if let Some(v) = op(x, y) {
            return Proc::int(v);
        }
    }
    Proc::Ground(rebuild(Box::new(a), Box::new(b)))
}

/// Deterministic representative of a state: components sorted by canonical
/// key with binder names kept intact.
pub fn normalize(p: &Proc) -> Proc {
    let mut comps = Vec::new();
    collect(p, &mut comps);
    comps.sort_by_cached_key(|c| canonicalize(c));
    match comps.len() {
        0 => Proc::Stop,
        1 => comps.pop().unwrap(),
        _ => Proc::Par(comps),
    }
}

fn collect(p: &Proc, out: &mut Vec<Proc>) {
    match p {
        Proc::Stop | Proc::Ground(GroundTerm::Int(0)) => {}
        Proc::Par(ps) => ps.iter().for_each(|q| collect(q, out)),
        other => {
            let n = norm_one(other);
            if !matches!(n, Proc::Stop) {
                out.push(n);
            }
        }
    }
}

fn norm_one(p: &Proc) -> Proc {
    match p {
        Proc::Stop | Proc::Drop(_) | Proc::Ground(_) => p.clone(),
        Proc::Input(inp) => Proc::Input(InputProc {
            channel: inp.channel.clone(),
            pattern: inp.pattern.clone(),
            body: Box::new(normalize(&inp.body)),
        }),
        Proc::Output(o) => Proc::Output(OutputProc {
            channel: o.channel.clone(),
            args: o.args.iter().map(normalize).collect(),
        }),
        Proc::Choice(bs) => {
            let mut flat = Vec::new();
            fn walk(b: &Proc, flat: &mut Vec<Proc>) {
                match b {
                    Proc::Choice(inner) => inner.iter().for_each(|x| walk(x, flat)),
                    Proc::Stop => {}
                    other => flat.push(norm_one(other)),
                }
            }
            bs.iter().for_each(|b| walk(b, &mut flat));
            flat.sort_by_cached_key(|c| canonicalize(c));
            match flat.len() {
                0 => Proc::Stop,
                1 => flat.pop().unwrap(),
                _ => Proc::Choice(flat),
            }
        }
        Proc::Par(_) => normalize(p),
    }
}

fn components_of(state: &Proc) -> Vec<&Proc> {
    match state {
        Proc::Par(ps) => ps.iter().collect(),
        Proc::Stop => Vec::new(),
        single => vec![single],
    }
}

fn side_input<'p>(
    comps: &[&'p Proc],
    comp: usize,
    branch: Option<usize>,
) -> Result<&'p InputProc, ReduceError> {
    let c = match comps.get(comp) {
        Some(c) => *c,
        None => return stale("input component index out of range"),
    };
    match (c, branch) {
        (Proc::Input(inp), None) => Ok(inp),
        (Proc::Choice(bs), Some(k)) => match bs.get(k) {
            Some(Proc::Input(inp)) => Ok(inp),
            _ => stale("input branch is not an input"),
        },
        _ => stale("input component changed shape"),
    }
}

fn side_output<'p>(
    comps: &[&'p Proc],
    comp: usize,
    branch: Option<usize>,
) -> Result<&'p OutputProc, ReduceError> {
    let c = match comps.get(comp) {
        Some(c) => *c,
        None => return stale("output component index out of range"),
    };
    match (c, branch) {
        (Proc::Output(o), None) => Ok(o),
        (Proc::Choice(bs), Some(k)) => match bs.get(k) {
            Some(Proc::Output(o)) => Ok(o),
            _ => stale("output branch is not an output"),
        },
        _ => stale("output component changed shape"),
    }
}

/// The input pattern accepts the (evaluated) output arguments: equal arity
/// and every literal slot names the delivered argument.
fn pattern_accepts(inp: &InputProc, o: &OutputProc) -> bool {
    if inp.pattern.len() != o.args.len() {
        return false;
    }
    inp.pattern.iter().zip(&o.args).all(|(slot, arg)| match slot {
        Binder::Var(_) => true,
        Binder::Literal(n) => name_equiv(n, &delivered_name(arg)),
    })
}

/// All communication opportunities of a normalized state, in ascending
/// (input component, input branch, output component, output branch) order.
pub fn enumerate_redexes(state: &Proc) -> Vec<Redex> {
    let comps = components_of(state);
    let mut inputs: Vec<(usize, Option<usize>, &InputProc)> = Vec::new();
    let mut outputs: Vec<(usize, Option<usize>, &OutputProc)> = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        match c {
            Proc::Input(inp) => inputs.push((i, None, inp)),
            Proc::Output(o) => outputs.push((i, None, o)),
            Proc::Choice(bs) => {
                for (k, b) in bs.iter().enumerate() {
                    match b {
                        Proc::Input(inp) => inputs.push((i, Some(k), inp)),
                        Proc::Output(o) => outputs.push((i, Some(k), o)),
                        _ => {}
                    }
                }
            }
            _ => {}
        }
    }
    let mut redexes = Vec::new();
    for (ic, ib, inp) in &inputs {
        for (oc, ob, o) in &outputs {
            if ic == oc {
                continue;
            }
            if name_equiv(&inp.channel, &o.channel) && pattern_accepts(inp, o) {
                redexes.push(Redex {
                    input_component: *ic,
                    input_branch: *ib,
                    output_component: *oc,
                    output_branch: *ob,
                    input_channel: inp.channel.clone(),
                    output_channel: o.channel.clone(),
                });
            }
        }
    }
    redexes
}

/// Fire one redex. The state is renormalized first, so redexes are only
/// meaningful against the normalized form; a redex that no longer applies
/// reports why.
pub fn step(state: &Proc, r: &Redex) -> Result<Proc, ReduceError> {
    let state = normalize(state);
    let comps = components_of(&state);
    let inp = side_input(&comps, r.input_component, r.input_branch)?;
    let out = side_output(&comps, r.output_component, r.output_branch)?;
    if !name_equiv(&r.input_channel, &inp.channel) || !name_equiv(&r.output_channel, &out.channel)
    {
        return stale("channel witnesses no longer match");
    }
    if !name_equiv(&inp.channel, &out.channel) {
        return stale("input and output channels are no longer equivalent");
    }
    if !pattern_accepts(inp, out) {
        return stale("pattern no longer accepts the message");
    }
    let mut subst = Substitution::new();
    for (slot, arg) in inp.pattern.iter().zip(&out.args) {
        if let Binder::Var(n) = slot {
            subst.bind(n, delivered_name(arg));
        }
    }
    let body = substitute(&inp.body, &subst);
    let mut rest: Vec<Proc> = comps
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != r.input_component && *i != r.output_component)
        .map(|(_, c)| (*c).clone())
        .collect();
    rest.push(body);
    Ok(normalize(&Proc::Par(rest)))
}

/// Run with a seeded uniform scheduler.
pub fn run(p: &Proc, seed: u64, max_steps: usize) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = normalize(p);
    let initial = current.clone();
    let mut steps = Vec::new();
    let mut terminated = false;
    for _ in 0..max_steps {
        let rs = enumerate_redexes(&current);
        if rs.is_empty() {
            terminated = true;
            break;
        }
        let r = rs[rng.gen_range(0..rs.len())].clone();
        current = step(&current, &r).expect("freshly enumerated redex");
        steps.push((r, current.clone()));
    }
    if !terminated {
        terminated = enumerate_redexes(&current).is_empty();
    }
    Trace {
        initial,
        steps,
        terminated,
        seed,
    }
}

/// One labelled transition of a [`StateGraph`].
#[derive(Debug, Clone)]
pub struct Edge {
    pub redex: Redex,
    pub to: usize,
}

/// Bounded breadth-first exploration of the reduction graph.
#[derive(Debug, Clone)]
pub struct StateGraph {
    /// Normalized representative per state id; id 0 is the initial state.
    pub states: Vec<Proc>,
    pub index: BTreeMap<CanonicalForm, usize>,
    /// Outgoing transitions per state, in redex-enumeration order.
    pub edges: Vec<Vec<Edge>>,
    /// True when a depth or state bound cut the exploration short, i.e. the
    /// recorded graph may be missing states or edges.
    pub truncated: bool,
}

impl StateGraph {
    pub fn successors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[id].iter().map(|e| e.to)
    }

    pub fn id_of(&self, p: &Proc) -> Option<usize> {
        self.index.get(&canonicalize(p)).copied()
    }

    /// States reachable from `id` by zero or more steps.
    pub fn weak_closure(&self, id: usize) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([id]);
        seen[id] = true;
        let mut out = Vec::new();
        while let Some(s) = queue.pop_front() {
            out.push(s);
            for e in &self.edges[s] {
                if !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// A shortest redex path from `from` to `to`, if one exists.
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<Redex>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.states.len()];
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            for (k, e) in self.edges[s].iter().enumerate() {
                if e.to != from && prev[e.to].is_none() {
                    prev[e.to] = Some((s, k));
                    if e.to == to {
                        let mut path = Vec::new();
                        let mut cur = to;
                        while cur != from {
                            let (p, k) = prev[cur].expect("recorded predecessor");
                            path.push(self.edges[p][k].redex.clone());
                            cur = p;
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(e.to);
                }
            }
        }
        None
    }
}

pub fn state_graph(p: &Proc, max_depth: usize, max_states: usize) -> StateGraph {
    let init = normalize(p);
    let mut g = StateGraph {
        index: BTreeMap::from([(canonicalize(&init), 0)]),
        states: vec![init],
        edges: vec![Vec::new()],
        truncated: false,
    };
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    while let Some((id, depth)) = queue.pop_front() {
        let src = g.states[id].clone();
        let rs = enumerate_redexes(&src);
        if rs.is_empty() {
            continue;
        }
        if depth == max_depth {
            g.truncated = true;
            continue;
        }
        let mut succs = Vec::new();
        for r in &rs {
            let next = step(&src, r).expect("freshly enumerated redex");
            let key = canonicalize(&next);
            let nid = match g.index.get(&key) {
                Some(&n) => n,
                None => {
                    if g.states.len() >= max_states {
                        g.truncated = true;
                        continue;
                    }
                    let n = g.states.len();
                    g.states.push(next);
                    g.index.insert(key, n);
                    g.edges.push(Vec::new());
                    queue.push_back((n, depth + 1));
                    n
                }
            };
            succs.push(Edge {
                redex: r.clone(),
                to: nid,
            });
        }
        g.edges[id] = succs;
    }
    g
}

/// The set of states reachable within the bounds, plus whether the bounds
/// were hit.
pub fn reachable(
    p: &Proc,
    max_depth: usize,
    max_states: usize,
) -> (BTreeSet<CanonicalForm>, bool) {
    let g = state_graph(p, max_depth, max_states);
    (g.index.keys().cloned().collect(), g.truncated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;
    use crate::sugar::desugar;
    use crate::syntax::struct_congruent;

    fn core(src: &str) -> Proc {
        desugar(&parse_program(src).expect("parse")).expect("desugar")
    }

    #[test]
    fn basic_comm_delivers_quoted_message() {
        let p = core("a!(5) | a?(x) => b!(*x)");
        let rs = enumerate_redexes(&normalize(&p));
        assert_eq!(rs.len(), 1);
        let next = step(&p, &rs[0]).unwrap();
        assert!(struct_congruent(&next, &core("b!(5)")));
    }

    #[test]
    fn arguments_evaluate_at_consumption() {
        let p = core("a!(2 + 3) | a?(x) => b!(*x)");
        let rs = enumerate_redexes(&normalize(&p));
        let next = step(&p, &rs[0]).unwrap();
        assert_eq!(normalize(&next), core("b!(5)"));
        // Null process reads as zero.
        let p = core("a!(0 + 3) | a?(x) => b!(*x)");
        let rs = enumerate_redexes(&normalize(&p));
        assert_eq!(normalize(&step(&p, &rs[0]).unwrap()), core("b!(3)"));
    }

    #[test]
    fn passed_channels_reconnect() {
        // A new-bound reply channel survives the round trip: the server
        // receives it as an argument and answers on the very same name.
        let p = core("new(ret) { a!(ret)\nret?(x) => done!(1) }\na?(y) => y!(42)");
        let graph = state_graph(&p, 8, 64);
        assert!(!graph.truncated);
        assert!(graph
            .states
            .iter()
            .any(|s| struct_congruent(s, &core("done!(1)"))));
    }

    #[test]
    fn firing_a_branch_consumes_the_whole_choice() {
        let p = core("a!() | b!() | (a?() => ra!()) + b?() => rb!()");
        let state = normalize(&p);
        let rs = enumerate_redexes(&state);
        assert_eq!(rs.len(), 2);
        for r in &rs {
            let next = step(&state, r).unwrap();
            // One message is consumed, the other survives, and the losing
            // branch is gone with its choice.
            let comps = match &next {
                Proc::Par(ps) => ps.len(),
                _ => 1,
            };
            assert_eq!(comps, 2, "next = {next}");
            assert!(enumerate_redexes(&next).is_empty());
        }
    }

    #[test]
    fn no_self_communication_within_a_component() {
        let p = core("(a?() => ack!()) + a!()");
        assert!(enumerate_redexes(&normalize(&p)).is_empty());
        // Two copies can talk across components.
        let q = normalize(&Proc::Par(vec![p.clone(), p]));
        assert_eq!(enumerate_redexes(&q).len(), 2);
    }

    #[test]
    fn literal_slots_dispatch_by_name() {
        let p = core("slot?get(ret) => ret!(1) | slot!set(@0)");
        assert!(enumerate_redexes(&normalize(&p)).is_empty());
        let q = core("slot?get(ret) => ret!(1) | slot!get(@0)");
        let rs = enumerate_redexes(&normalize(&q));
        assert_eq!(rs.len(), 1);
        assert!(struct_congruent(
            &step(&q, &rs[0]).unwrap(),
            &core("@0!(1)")
        ));
    }

    #[test]
    fn arity_must_match() {
        let p = core("a!(1, 2) | a?(x) => 0");
        assert!(enumerate_redexes(&normalize(&p)).is_empty());
    }

    #[test]
    fn stale_redexes_are_rejected() {
        let p = core("a!(1) | a?(x) => 0");
        let rs = enumerate_redexes(&normalize(&p));
        let other = core("b!() | b?() => 0");
        let e = step(&other, &rs[0]).unwrap_err();
        assert!(matches!(e, ReduceError::StaleRedex { .. }));
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let p = core("a!(1) | a!(2) | a?(x) => b!(*x) | b?(y) => c!(*y)");
        let t1 = run(&p, 7, 100);
        let t2 = run(&p, 7, 100);
        assert_eq!(t1.steps.len(), t2.steps.len());
        for ((r1, p1), (r2, p2)) in t1.steps.iter().zip(&t2.steps) {
            assert_eq!(r1, r2);
            assert_eq!(canonicalize(p1), canonicalize(p2));
        }
        assert!(t1.terminated);
    }

    #[test]
    fn reachable_explores_and_reports_truncation() {
        let p = core("a!() | a?() => b!() | b?() => 0");
        let (states, truncated) = reachable(&p, 16, 1024);
        assert_eq!(states.len(), 3);
        assert!(!truncated);
        let (_, truncated) = reachable(&p, 1, 1024);
        assert!(truncated, "depth bound must be reported");
        let (_, truncated) = reachable(&p, 16, 2);
        assert!(truncated, "state bound must be reported");
    }

    #[test]
    fn normalization_is_stable_and_drops_nulls() {
        let p = core("b!() | 0 | a!()");
        let n = normalize(&p);
        assert_eq!(n, normalize(&n), "idempotent");
        if let Proc::Par(ps) = &n {
            assert_eq!(ps.len(), 2);
        } else {
            panic!("expected two components");
        }
    }
}
