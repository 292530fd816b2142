//! Weak barbed bisimilarity relative to an observation set of names.
//!
//! The only observables are unguarded top-level outputs: a state exhibits a
//! barb at an observed name `y` when some parallel component is an output
//! whose channel is name-equivalent to `y`. Inputs and unfired choice
//! branches exhibit nothing.
//!
//! Checking works over the bounded reduction graphs of the two processes: a
//! partition-refinement loop over state pairs, where a strong step on one
//! side must be answered by zero or more steps on the other, and strong
//! barbs must be answered by weak (eventually reachable) barbs. If either
//! graph was truncated the verdict is `Unknown` — missing states could
//! change either answer. On complete graphs the verdict is exact, so a
//! `Distinguished` or `Equivalent` answer never changes at larger bounds.

use std::collections::{BTreeMap, HashMap};

use crate::reduce::{state_graph, step, Redex, ReduceError, StateGraph};
use crate::sugar::encode::is_reserved;
use crate::syntax::{canonicalize, free_names, CanonicalForm, Name, NameSet, Proc};

/// The set N of barb-eligible names, deduplicated under name equivalence.
pub type Observable = NameSet;

/// Which of the two compared processes a move or barb belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone)]
pub struct GameMove {
    pub side: Side,
    pub redex: Redex,
}

/// A transcript of one winning play of the distinguishing game: replaying
/// each move on its own side leaves `barb_side`'s state exhibiting `barb`
/// while the other side cannot reach any state exhibiting it.
#[derive(Debug, Clone)]
pub struct Distinguisher {
    pub moves: Vec<GameMove>,
    pub barb_side: Side,
    pub barb: Name,
    pub reason: String,
}

impl Distinguisher {
    /// Replay the transcript from the given initial processes; returns the
    /// final state of each side.
    pub fn replay(&self, left: &Proc, right: &Proc) -> Result<(Proc, Proc), ReduceError> {
        let mut l = left.clone();
        let mut r = right.clone();
        for m in &self.moves {
            match m.side {
                Side::Left => l = step(&l, &m.redex)?,
                Side::Right => r = step(&r, &m.redex)?,
            }
        }
        Ok((l, r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Distinguished,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "equivalent",
            Verdict::Distinguished => "distinguished",
            Verdict::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BisimResult {
    pub verdict: Verdict,
    pub depth_checked: usize,
    /// Present exactly when the verdict is `Distinguished`.
    pub distinguishing: Option<Box<Distinguisher>>,
    /// Present when the verdict is `Unknown`: which bound was hit.
    pub reason: Option<String>,
}

impl BisimResult {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }

    fn equivalent(depth: usize) -> BisimResult {
        BisimResult {
            verdict: Verdict::Equivalent,
            depth_checked: depth,
            distinguishing: None,
            reason: None,
        }
    }

    fn distinguished(depth: usize, d: Distinguisher) -> BisimResult {
        BisimResult {
            verdict: Verdict::Distinguished,
            depth_checked: depth,
            distinguishing: Some(Box::new(d)),
            reason: None,
        }
    }

    fn unknown(depth: usize, reason: &str) -> BisimResult {
        BisimResult {
            verdict: Verdict::Unknown,
            depth_checked: depth,
            distinguishing: None,
            reason: Some(reason.to_string()),
        }
    }
}

/// The default observation set: free names of both processes, minus the
/// reserved machinery namespace minted by desugaring.
pub fn default_observation(p: &Proc, q: &Proc) -> Observable {
    let mut n = free_names(p);
    n.extend_from(&free_names(q));
    n.filtered(|name| !is_reserved(name))
}

/// Strong barbs: the observed names exhibited by unguarded top-level
/// outputs of the state.
pub fn barbs(state: &Proc, names: &Observable) -> NameSet {
    let mut out = NameSet::new();
    let comps: Vec<&Proc> = match state {
        Proc::Par(ps) => ps.iter().collect(),
        other => vec![other],
    };
    for c in comps {
        if let Proc::Output(o) = c {
            if names.contains(&o.channel) {
                out.insert(&o.channel);
            }
        }
    }
    out
}

/// Weak barbs: every observed name exhibited by some state reachable within
/// the bounds. The flag reports whether exploration was truncated.
pub fn weak_barbs(
    p: &Proc,
    names: &Observable,
    max_depth: usize,
    max_states: usize,
) -> (NameSet, bool) {
    let g = state_graph(p, max_depth, max_states);
    let mut out = NameSet::new();
    for s in &g.states {
        out.extend_from(&barbs(s, names));
    }
    (out, g.truncated)
}

enum Why {
    Barb { side: Side, barb: Name },
    Move { side: Side, redex: Redex, child: usize },
}

struct SideData {
    graph: StateGraph,
    strong: Vec<NameSet>,
    weak: Vec<Vec<usize>>,
    /// Per state: each weakly exhibitable barb class key.
    weak_keys: Vec<BTreeMap<CanonicalForm, usize>>,
}

impl SideData {
    fn build(p: &Proc, names: &Observable, max_depth: usize, max_states: usize) -> SideData {
        let graph = state_graph(p, max_depth, max_states);
        let strong: Vec<NameSet> = graph.states.iter().map(|s| barbs(s, names)).collect();
        let weak: Vec<Vec<usize>> = (0..graph.states.len())
            .map(|i| graph.weak_closure(i))
            .collect();
        let weak_keys: Vec<BTreeMap<CanonicalForm, usize>> = weak
            .iter()
            .map(|cl| {
                let mut m = BTreeMap::new();
                for &s in cl {
                    for n in strong[s].iter() {
                        m.entry(NameSet::key(n)).or_insert(s);
                    }
                }
                m
            })
            .collect();
        SideData {
            graph,
            strong,
            weak,
            weak_keys,
        }
    }
}

/// Check weak barbed bisimilarity of `p` and `q` under observation set
/// `names`, exploring at most `max_depth` steps and `max_states` states per
/// side.
pub fn bisim(
    p: &Proc,
    q: &Proc,
    names: &Observable,
    max_depth: usize,
    max_states: usize,
) -> BisimResult {
    // Structurally congruent processes are bisimilar outright — the identity
    // relation witnesses it — so no exploration bound can block this case.
    if canonicalize(p) == canonicalize(q) {
        return BisimResult::equivalent(max_depth);
    }
    let l = SideData::build(p, names, max_depth, max_states);
    let r = SideData::build(q, names, max_depth, max_states);
    if l.graph.truncated || r.graph.truncated {
        return BisimResult::unknown(
            max_depth,
            "state-space exploration truncated; raise the depth or state bounds for a verdict",
        );
    }
    let (nl, nr) = (l.graph.states.len(), r.graph.states.len());
    let mut alive = vec![true; nl * nr];
    let mut why: HashMap<(usize, usize), Why> = HashMap::new();

    // Barb compatibility: every strong barb on one side must be weakly
    // exhibitable on the other.
    for i in 0..nl {
        for j in 0..nr {
            let missing_right = l.strong[i]
                .iter()
                .find(|n| !r.weak_keys[j].contains_key(&NameSet::key(n)));
            if let Some(name) = missing_right {
                alive[i * nr + j] = false;
                why.insert(
                    (i, j),
                    Why::Barb {
                        side: Side::Left,
                        barb: name.clone(),
                    },
                );
                continue;
            }
            let missing_left = r.strong[j]
                .iter()
                .find(|n| !l.weak_keys[i].contains_key(&NameSet::key(n)));
            if let Some(name) = missing_left {
                alive[i * nr + j] = false;
                why.insert(
                    (i, j),
                    Why::Barb {
                        side: Side::Right,
                        barb: name.clone(),
                    },
                );
            }
        }
    }

    // Refinement: a strong step must be answered by a weak step to a
    // surviving pair. Every kill references pairs already dead, so the
    // records form a well-founded chain the witness builder can follow.
    loop {
        let mut changed = false;
        for i in 0..nl {
            for j in 0..nr {
                if !alive[i * nr + j] {
                    continue;
                }
                let mut kill: Option<Why> = None;
                for e in &l.graph.edges[i] {
                    if !r.weak[j].iter().any(|&j2| alive[e.to * nr + j2]) {
                        kill = Some(Why::Move {
                            side: Side::Left,
                            redex: e.redex.clone(),
                            child: e.to,
                        });
                        break;
                    }
                }
                if kill.is_none() {
                    for e in &r.graph.edges[j] {
                        if !l.weak[i].iter().any(|&i2| alive[i2 * nr + e.to]) {
                            kill = Some(Why::Move {
                                side: Side::Right,
                                redex: e.redex.clone(),
                                child: e.to,
                            });
                            break;
                        }
                    }
                }
                if let Some(w) = kill {
                    alive[i * nr + j] = false;
                    why.insert((i, j), w);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    if alive[0] {
        return BisimResult::equivalent(max_depth);
    }
    BisimResult::distinguished(max_depth, build_witness(&l, &r, &why))
}

fn build_witness(l: &SideData, r: &SideData, why: &HashMap<(usize, usize), Why>) -> Distinguisher {
    let mut moves = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        match why.get(&(i, j)).expect("dead pair has a record") {
            Why::Barb { side, barb } => {
                let reason = format!(
                    "after {} move(s), the {} process exhibits an output on {} that the other side can never exhibit",
                    moves.len(),
                    side,
                    crate::syntax::pretty::pretty_name(barb),
                );
                return Distinguisher {
                    moves,
                    barb_side: *side,
                    barb: barb.clone(),
                    reason,
                };
            }
            Why::Move { side, redex, child } => {
                moves.push(GameMove {
                    side: *side,
                    redex: redex.clone(),
                });
                // Every weak answer of the responder is already dead; pick
                // the first and record the tau path that realizes it, so the
                // transcript stays replayable.
                let responder = side.flip();
                let (resp_data, resp_state) = match responder {
                    Side::Right => (r, j),
                    Side::Left => (l, i),
                };
                let answer = resp_data.weak[resp_state]
                    .iter()
                    .copied()
                    .find(|&s2| {
                        let pair = match responder {
                            Side::Right => (*child, s2),
                            Side::Left => (s2, *child),
                        };
                        why.contains_key(&pair)
                    })
                    .expect("all weak answers are dead");
                for redex in resp_data
                    .graph
                    .path(resp_state, answer)
                    .expect("answer is in the weak closure")
                {
                    moves.push(GameMove {
                        side: responder,
                        redex,
                    });
                }
                match responder {
                    Side::Right => {
                        i = *child;
                        j = answer;
                    }
                    Side::Left => {
                        i = answer;
                        j = *child;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;
    use crate::reduce::normalize;
    use crate::sugar::desugar;
    use crate::syntax::name_equiv;

    fn core(src: &str) -> Proc {
        desugar(&parse_program(src).expect("parse")).expect("desugar")
    }

    fn check(a: &str, b: &str) -> BisimResult {
        let p = core(a);
        let q = core(b);
        let n = default_observation(&p, &q);
        bisim(&p, &q, &n, 64, 4096)
    }

    #[test]
    fn barbs_are_output_only() {
        let p = core("x!(1) | y?(a) => 0 | (z?() => 0) + w!()");
        let n = default_observation(&p, &Proc::Stop);
        let bs = barbs(&normalize(&p), &n);
        assert_eq!(bs.len(), 1);
        assert!(bs.contains(&Name::var("x")));
    }

    #[test]
    fn weak_barbs_see_the_future() {
        let p = core("a!() | a?() => x!(1)");
        let n = NameSet::from_iter([Name::var("x")]);
        assert!(barbs(&normalize(&p), &n).is_empty());
        let (wb, truncated) = weak_barbs(&p, &n, 8, 64);
        assert!(wb.contains(&Name::var("x")));
        assert!(!truncated);
    }

    #[test]
    fn tau_steps_are_invisible() {
        // Under the default observation set `internal` is visible and the
        // two differ; restricted to x they agree.
        let r = check("internal!() | internal?() => x!(1)", "x!(1)");
        assert_eq!(r.verdict, Verdict::Distinguished);
        let p = core("internal!() | internal?() => x!(1)");
        let q = core("x!(1)");
        let n = NameSet::from_iter([Name::var("x")]);
        assert!(bisim(&p, &q, &n, 64, 4096).is_equivalent());
    }

    #[test]
    fn branching_is_distinguished() {
        // One process commits internally to a single barb; the other keeps
        // both available. Weak barb sets agree, so only the stepping game
        // tells them apart — and the transcript must replay.
        let p = core("c!() | (c?() => x!()) + c?() => y!()");
        let q = core("c!() | c?() => { x!() | y!() }");
        let n = NameSet::from_iter([Name::var("x"), Name::var("y")]);
        let res = bisim(&p, &q, &n, 64, 4096);
        assert_eq!(res.verdict, Verdict::Distinguished);
        let d = res.distinguishing.expect("witness");
        let (fl, fr) = d.replay(&p, &q).expect("replayable");
        let (holder, other) = match d.barb_side {
            Side::Left => (fl, fr),
            Side::Right => (fr, fl),
        };
        assert!(barbs(&normalize(&holder), &n)
            .iter()
            .any(|b| name_equiv(b, &d.barb)));
        let (wb, truncated) = weak_barbs(&other, &n, 64, 4096);
        assert!(!truncated);
        assert!(!wb.iter().any(|b| name_equiv(b, &d.barb)));
    }

    #[test]
    fn missing_barb_is_witnessed() {
        let res = check("x!(1)", "0");
        assert_eq!(res.verdict, Verdict::Distinguished);
        let d = res.distinguishing.expect("witness");
        assert_eq!(d.barb_side, Side::Left);
        assert!(d.moves.is_empty());
        assert!(name_equiv(&d.barb, &Name::var("x")));
    }

    #[test]
    fn truncation_reports_unknown() {
        let p = core("(def Loop(x) => { a!(*x) | a?(y) => Loop(y) })(@1)");
        let q = core("b!()");
        let n = default_observation(&p, &q);
        let res = bisim(&p, &q, &n, 2, 4);
        assert_eq!(res.verdict, Verdict::Unknown);
        assert!(res.reason.is_some());
    }

    #[test]
    fn reflexive_even_when_truncating() {
        let src = "(def Loop(x) => { a!(*x) | a?(y) => Loop(y) })(@1)";
        let p = core(src);
        let n = default_observation(&p, &p);
        assert!(bisim(&p, &core(src), &n, 0, 1).is_equivalent());
    }

    #[test]
    fn reserved_names_are_not_observed() {
        let p = core("new(hidden) { hidden!(1) }");
        let q = core("0");
        let n = default_observation(&p, &q);
        assert!(n.is_empty());
        assert!(bisim(&p, &q, &n, 16, 256).is_equivalent());
    }

    #[test]
    fn structural_rearrangement_is_equivalent() {
        assert!(check("a!(1) | b!(2)", "b!(2) | a!(1)").is_equivalent());
        assert!(check("a!(1) | 0", "a!(1)").is_equivalent());
    }
}
