//! Bounded three-valued evaluation of namespace-logic formulas.
//!
//! Modalities are weak and component-wise: a process disseminates on `x`
//! when some reachable state has a top-level output component on `x`, and
//! receives on `x` when some reachable state has a top-level input — or a
//! choice with an input branch — on `x`. Firing a reception replaces the
//! whole component by the substituted branch body, exactly as communication
//! would. Greatest fixpoints iterate over the state space closed under
//! reductions and under firings of the receptions the body mentions, and
//! report `Unknown` if the iteration oscillates instead of converging (the
//! firewall-style formulas are deliberately non-monotone).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::rc::Rc;

use crate::reduce::{enumerate_redexes, normalize, state_graph, step, StateGraph};
use crate::sugar::encode::fresh_name;
use crate::syntax::{
    canonicalize, name_equiv, name_key, rename_free, substitute, Binder, CanonicalForm, InputProc,
    Name, Proc, Substitution,
};

use super::{subst_name, CheckContext, CheckResult, Formula, NameFormula, Verdict};

/// Cap on received-argument combinations tried per reception site.
const MAX_COMBOS: usize = 4096;
/// Cap on parallel components considered for separation splits.
const MAX_SEP_COMPONENTS: usize = 12;

/// Kleene three-valued truth; `and` is `min`, `or` is `max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(super) enum Tri {
    Fails,
    Unknown,
    Holds,
}

impl Tri {
    fn from_bool(b: bool) -> Tri {
        if b {
            Tri::Holds
        } else {
            Tri::Fails
        }
    }

    fn not(self) -> Tri {
        match self {
            Tri::Holds => Tri::Fails,
            Tri::Fails => Tri::Holds,
            Tri::Unknown => Tri::Unknown,
        }
    }

    fn and(self, other: Tri) -> Tri {
        self.min(other)
    }

    fn or(self, other: Tri) -> Tri {
        self.max(other)
    }
}

/// A variable's meaning: user-supplied valuations are total (absence means
/// the state is out), fixpoint iterations are partial (absence means the
/// state escaped the explored universe). The flag records whether the
/// partial map's keys were taken after dead-output erasure, so lookups can
/// normalize the same way.
#[derive(Clone)]
enum VarVal {
    Total(BTreeSet<CanonicalForm>),
    Partial(Rc<BTreeMap<CanonicalForm, Tri>>, bool),
}

type Env = BTreeMap<String, VarVal>;

/// A namespace denotation over the finite universe, split by certainty.
struct Den {
    definite: Vec<Name>,
    maybe: Vec<Name>,
}

impl Den {
    fn names(&self) -> impl Iterator<Item = &Name> {
        self.definite.iter().chain(self.maybe.iter())
    }
}

struct Eval<'a> {
    ctx: &'a CheckContext,
    graphs: BTreeMap<CanonicalForm, Rc<StateGraph>>,
    unknown: Option<String>,
    witness: Option<Proc>,
}

pub(super) fn run_check(p: &Proc, f: &Formula, ctx: &CheckContext) -> CheckResult {
    let mut ev = Eval {
        ctx,
        graphs: BTreeMap::new(),
        unknown: None,
        witness: None,
    };
    let env = base_env(ctx);
    let subject = normalize(p);
    match ev.sat(&subject, f, &env) {
        Tri::Holds => CheckResult {
            verdict: Verdict::Holds,
            reason: format!(
                "holds within depth {} over a universe of {} name(s)",
                ctx.depth,
                ctx.universe.len()
            ),
            witness: None,
        },
        Tri::Fails => {
            let blamed = blame(&mut ev, &subject, f, &env);
            CheckResult {
                verdict: Verdict::Fails,
                reason: format!("fails at: {blamed}"),
                witness: Some(ev.witness.unwrap_or(subject)),
            }
        }
        Tri::Unknown => CheckResult {
            verdict: Verdict::Unknown,
            reason: ev
                .unknown
                .unwrap_or_else(|| "a bound was reached before a verdict".into()),
            witness: None,
        },
    }
}

pub(super) fn denotation(a: &NameFormula, ctx: &CheckContext) -> crate::syntax::NameSet {
    let mut ev = Eval {
        ctx,
        graphs: BTreeMap::new(),
        unknown: None,
        witness: None,
    };
    let env = base_env(ctx);
    let den = ev.den3(a, &env);
    den.definite.into_iter().collect()
}

fn base_env(ctx: &CheckContext) -> Env {
    ctx.valuation
        .iter()
        .map(|(k, v)| (k.clone(), VarVal::Total(v.clone())))
        .collect()
}

/// Narrow a definite failure down to the failing conjunct for the report.
fn blame(ev: &mut Eval, p: &Proc, f: &Formula, env: &Env) -> String {
    if let Formula::And(a, b) = f {
        if ev.sat(p, a, env) == Tri::Fails {
            return blame(ev, p, a, env);
        }
        return blame(ev, p, b, env);
    }
    format!("{f}")
}

/// A place a state could receive: an input component or an input branch of
/// a choice component.
struct Site<'p> {
    comp: usize,
    input: &'p InputProc,
}

fn components(state: &Proc) -> Vec<&Proc> {
    match state {
        Proc::Par(ps) => ps.iter().collect(),
        Proc::Stop => Vec::new(),
        single => vec![single],
    }
}

fn reception_sites(state: &Proc) -> Vec<Site<'_>> {
    let mut out = Vec::new();
    for (i, c) in components(state).into_iter().enumerate() {
        match c {
            Proc::Input(inp) => out.push(Site { comp: i, input: inp }),
            Proc::Choice(bs) => {
                for b in bs {
                    if let Proc::Input(inp) = b {
                        out.push(Site { comp: i, input: inp });
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Fire a reception with the given received names: substitute the variable
/// slots, drop the whole guarded component, renormalize.
fn fire(state: &Proc, site: &Site, received: &[Name]) -> Proc {
    let mut subst = Substitution::new();
    let mut zi = 0;
    for slot in &site.input.pattern {
        if let Binder::Var(n) = slot {
            subst.bind(n, received[zi].clone());
            zi += 1;
        }
    }
    debug_assert_eq!(zi, received.len());
    let body = substitute(&site.input.body, &subst);
    let mut rest: Vec<Proc> = components(state)
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i != site.comp)
        .map(|(_, c)| c.clone())
        .collect();
    rest.push(body);
    normalize(&Proc::Par(rest))
}

fn var_arity(inp: &InputProc) -> usize {
    inp.pattern.iter().filter(|b| b.is_var()).count()
}

/// The first `MAX_COMBOS` tuples from `universe^k`, plus whether the space
/// was cut off.
fn combos(universe: &[Name], k: usize) -> (Vec<Vec<Name>>, bool) {
    if k == 0 {
        return (vec![Vec::new()], false);
    }
    if universe.is_empty() {
        return (Vec::new(), false);
    }
    let total = universe.len().checked_pow(k as u32);
    let capped = total.map_or(true, |t| t > MAX_COMBOS);
    let limit = total.map_or(MAX_COMBOS, |t| t.min(MAX_COMBOS));
    let mut out = Vec::with_capacity(limit);
    let mut idx = vec![0usize; k];
    for _ in 0..limit {
        out.push(idx.iter().map(|&i| universe[i].clone()).collect());
        for d in (0..k).rev() {
            idx[d] += 1;
            if idx[d] < universe.len() {
                break;
            }
            idx[d] = 0;
        }
    }
    (out, capped)
}

struct Closure {
    states: Vec<Proc>,
    canons: Vec<CanonicalForm>,
    truncated: bool,
}

impl<'a> Eval<'a> {
    fn note(&mut self, msg: &str) {
        if self.unknown.is_none() {
            self.unknown = Some(msg.to_string());
        }
    }

    fn graph(&mut self, p: &Proc) -> Rc<StateGraph> {
        let key = canonicalize(p);
        if let Some(g) = self.graphs.get(&key) {
            return Rc::clone(g);
        }
        let g = Rc::new(state_graph(p, self.ctx.depth, self.ctx.max_states));
        self.graphs.insert(key, Rc::clone(&g));
        g
    }

    fn sat(&mut self, p: &Proc, f: &Formula, env: &Env) -> Tri {
        match f {
            Formula::True => Tri::Holds,
            Formula::Null => Tri::from_bool(canonicalize(p) == canonicalize(&Proc::Stop)),
            Formula::ProcEq(q) => Tri::from_bool(canonicalize(p) == canonicalize(q)),
            Formula::Not(g) => self.sat(p, g, env).not(),
            Formula::And(a, b) => {
                let l = self.sat(p, a, env);
                if l == Tri::Fails {
                    return Tri::Fails;
                }
                l.and(self.sat(p, b, env))
            }
            Formula::Sep(a, b) => self.sep(p, a, b, env),
            Formula::Disclosure(b) => {
                let den = self.den3(b, env);
                match normalize(p) {
                    Proc::Drop(x) => self.membership(&x, &den),
                    _ => Tri::Fails,
                }
            }
            Formula::Dissemination(a, args) => self.dissemination(p, a, args, env),
            Formula::Reception(a, b, body) => self.reception(p, a, b, body, env),
            Formula::Gfp(x, body) => self.gfp(p, x, body, env),
            Formula::Forall(n, dom, body) => self.forall(p, n, dom, body, env),
            Formula::RelyGuarantee(h, hide, c) => self.rely(p, h, hide, c, env),
            Formula::PropVar(x) => match env.get(x) {
                Some(VarVal::Total(set)) => Tri::from_bool(set.contains(&canonicalize(p))),
                Some(VarVal::Partial(map, erased)) => {
                    let key = if *erased {
                        canonicalize(&self.erase(p))
                    } else {
                        canonicalize(p)
                    };
                    match map.get(&key) {
                        Some(t) => *t,
                        None => {
                            self.note("a state escaped the fixpoint universe");
                            Tri::Unknown
                        }
                    }
                }
                None => {
                    debug_assert!(false, "unbound variable survived validation");
                    self.note("unbound propositional variable");
                    Tri::Unknown
                }
            },
        }
    }

    /// Three-valued denotation of a name formula over the universe.
    fn den3(&mut self, a: &NameFormula, env: &Env) -> Den {
        let mut den = Den {
            definite: Vec::new(),
            maybe: Vec::new(),
        };
        match a {
            NameFormula::QuoteProc(q) => {
                let key = name_key(&Name::quote((**q).clone()));
                for u in self.ctx.universe.iter() {
                    if name_key(u) == key {
                        den.definite.push(u.clone());
                    }
                }
            }
            NameFormula::QuoteFormula(f) => {
                let ctx = self.ctx;
                for u in ctx.universe.iter() {
                    match self.sat(&normalize(u.unquote()), f, env) {
                        Tri::Holds => den.definite.push(u.clone()),
                        Tri::Unknown => den.maybe.push(u.clone()),
                        Tri::Fails => {}
                    }
                }
            }
            NameFormula::NameVar(_) => {
                debug_assert!(false, "unbound name variable survived validation");
            }
        }
        den
    }

    fn membership(&mut self, x: &Name, den: &Den) -> Tri {
        if den.definite.iter().any(|d| name_equiv(x, d)) {
            return Tri::Holds;
        }
        if den.maybe.iter().any(|d| name_equiv(x, d)) {
            self.note("namespace membership undecided for a universe name");
            return Tri::Unknown;
        }
        Tri::Fails
    }

    fn sep(&mut self, p: &Proc, a: &Formula, b: &Formula, env: &Env) -> Tri {
        let state = normalize(p);
        let comps: Vec<Proc> = components(&state).into_iter().cloned().collect();
        let n = comps.len();
        if n > MAX_SEP_COMPONENTS {
            self.note("too many parallel components for separation analysis");
            return Tri::Unknown;
        }
        let mut acc = Tri::Fails;
        for mask in 0u32..(1u32 << n) {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (i, c) in comps.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    left.push(c.clone());
                } else {
                    right.push(c.clone());
                }
            }
            let l = self.sat(&Proc::par(left), a, env);
            if l == Tri::Fails {
                continue;
            }
            let v = l.and(self.sat(&Proc::par(right), b, env));
            acc = acc.or(v);
            if acc == Tri::Holds {
                return Tri::Holds;
            }
        }
        acc
    }

    fn dissemination(&mut self, p: &Proc, a: &NameFormula, args: &[Formula], env: &Env) -> Tri {
        let den = self.den3(a, env);
        let g = self.graph(p);
        let mut acc = Tri::Fails;
        for s in &g.states {
            for c in components(s) {
                let Proc::Output(o) = c else { continue };
                if o.args.len() != args.len() {
                    continue;
                }
                let m = self.membership(&o.channel, &den);
                if m == Tri::Fails {
                    continue;
                }
                let mut v = m;
                for (payload, af) in o.args.iter().zip(args) {
                    v = v.and(self.sat(&normalize(payload), af, env));
                    if v == Tri::Fails {
                        break;
                    }
                }
                acc = acc.or(v);
                if acc == Tri::Holds {
                    return Tri::Holds;
                }
            }
        }
        if g.truncated && acc != Tri::Holds {
            self.note("exploration truncated while searching for an output");
            return Tri::Unknown;
        }
        acc
    }

    fn reception(
        &mut self,
        p: &Proc,
        a: &NameFormula,
        binder: &str,
        body: &Formula,
        env: &Env,
    ) -> Tri {
        let den = self.den3(a, env);
        let g = self.graph(p);
        let universe: Vec<Name> = self.ctx.universe.iter().cloned().collect();
        let mut acc = Tri::Fails;
        for s in &g.states {
            for site in reception_sites(s) {
                let m = self.membership(&site.input.channel, &den);
                if m == Tri::Fails {
                    continue;
                }
                let (tuples, capped) = combos(&universe, var_arity(site.input));
                let residuals: Vec<Proc> =
                    tuples.iter().map(|zs| fire(s, &site, zs)).collect();
                let mut v = m;
                for c in &universe {
                    let body_c = subst_name(body, binder, c);
                    let mut ex = Tri::Fails;
                    for r in &residuals {
                        ex = ex.or(self.sat(r, &body_c, env));
                        if ex == Tri::Holds {
                            break;
                        }
                    }
                    if ex == Tri::Fails && capped {
                        self.note("received-argument combinations exceeded the bound");
                        ex = Tri::Unknown;
                    }
                    if ex == Tri::Fails && self.ctx.universe_capped {
                        self.note("existential exhausted a capped universe");
                        ex = Tri::Unknown;
                    }
                    v = v.and(ex);
                    if v == Tri::Fails {
                        break;
                    }
                }
                acc = acc.or(v);
                if acc == Tri::Holds {
                    return Tri::Holds;
                }
            }
        }
        if g.truncated && acc != Tri::Holds {
            self.note("exploration truncated while searching for an input");
            return Tri::Unknown;
        }
        acc
    }

    fn forall(
        &mut self,
        p: &Proc,
        n: &str,
        dom: &NameFormula,
        body: &Formula,
        env: &Env,
    ) -> Tri {
        let den = self.den3(dom, env);
        let mut acc = Tri::Holds;
        for x in &den.definite {
            acc = acc.and(self.sat(p, &subst_name(body, n, x), env));
            if acc == Tri::Fails {
                return Tri::Fails;
            }
        }
        for x in &den.maybe {
            if self.sat(p, &subst_name(body, n, x), env) != Tri::Holds {
                self.note("quantifier domain membership undecided");
                acc = acc.and(Tri::Unknown);
            }
        }
        acc
    }

    fn rely(
        &mut self,
        p: &Proc,
        hyp: &Formula,
        hidden: &[String],
        concl: &Formula,
        env: &Env,
    ) -> Tri {
        let ctx = self.ctx;
        let mut acc = Tri::Holds;
        for q in &ctx.env_suite {
            match self.sat(&normalize(q), hyp, env) {
                Tri::Fails => continue,
                Tri::Unknown => {
                    self.note("hypothesis undecided for an environment member");
                    acc = acc.and(Tri::Unknown);
                }
                Tri::Holds => {
                    let sys = hide(Proc::par(vec![p.clone(), q.clone()]), hidden);
                    let v = self.sat(&sys, concl, env);
                    if v == Tri::Fails && self.witness.is_none() {
                        self.witness = Some(sys);
                    }
                    acc = acc.and(v);
                }
            }
            if acc == Tri::Fails {
                return Tri::Fails;
            }
        }
        acc
    }

    fn gfp(&mut self, p: &Proc, var: &str, body: &Formula, env: &Env) -> Tri {
        // The states the fixpoint ranges over: reachable by reduction and by
        // firing the receptions the body can actually interrogate. When the
        // body never looks at outputs or raw structure, dead output tokens
        // (the residue of fired probes) are erased so the space saturates.
        let fire_names = self.fire_set(body, env);
        let erase = reception_only(body);
        let cl = self.closure(p, &fire_names, erase);
        if cl.truncated {
            self.note("state space truncated inside a fixpoint");
            return Tri::Unknown;
        }
        let n = cl.states.len();
        let mut v = vec![Tri::Holds; n];
        let mut history: BTreeSet<Vec<Tri>> = BTreeSet::new();
        history.insert(v.clone());
        let mut first_flip: Option<usize> = None;
        for _ in 0..(2 * n + 8) {
            let val: BTreeMap<CanonicalForm, Tri> = cl
                .canons
                .iter()
                .cloned()
                .zip(v.iter().copied())
                .collect();
            let mut env2 = env.clone();
            env2.insert(var.to_string(), VarVal::Partial(Rc::new(val)));
            let mut v2 = Vec::with_capacity(n);
            for (i, s) in cl.states.iter().enumerate() {
                let t = self.sat(s, body, &env2);
                if t == Tri::Fails && v[i] != Tri::Fails && first_flip.is_none() {
                    first_flip = Some(i);
                }
                v2.push(t);
            }
            if v2 == v {
                if v[0] == Tri::Fails && self.witness.is_none() {
                    self.witness = Some(cl.states[first_flip.unwrap_or(0)].clone());
                }
                if v[0] == Tri::Unknown {
                    self.note("fixpoint undecided within bounds");
                }
                return v[0];
            }
            if history.contains(&v2) {
                self.note("fixpoint iteration did not converge");
                return Tri::Unknown;
            }
            history.insert(v2.clone());
            v = v2;
        }
        self.note("fixpoint iteration bound reached");
        Tri::Unknown
    }

    /// Channels whose receptions the body may fire. Conservative: includes
    /// possible as well as certain namespace members, and widens to the
    /// whole universe if a reception channel is a bound name variable or
    /// mentions a fixpoint variable (its denotation is not yet available).
    fn fire_set(&mut self, body: &Formula, env: &Env) -> Vec<Name> {
        let mut name_formulas = Vec::new();
        let mut has_var = false;
        collect_receptions(body, &mut name_formulas, &mut has_var);
        has_var = has_var
            || name_formulas.iter().any(|a| match a {
                NameFormula::QuoteFormula(f) => mentions_free_prop(f, env, &mut Vec::new()),
                _ => false,
            });
        if has_var {
            return self.ctx.universe.iter().cloned().collect();
        }
        // Denotations probed here are advisory (they only widen the state
        // space), so diagnostics from the probe are discarded.
        let saved_unknown = self.unknown.clone();
        let saved_witness = self.witness.clone();
        let mut set = crate::syntax::NameSet::new();
        for a in &name_formulas {
            let den = self.den3(a, env);
            for name in den.names() {
                set.insert(name);
            }
        }
        self.unknown = saved_unknown;
        self.witness = saved_witness;
        set.iter().cloned().collect()
    }

    /// Breadth-first closure under reductions and fire-set receptions,
    /// bounded by the context's depth and state caps.
    fn closure(&mut self, p: &Proc, fire_names: &[Name]) -> Closure {
        let universe: Vec<Name> = self.ctx.universe.iter().cloned().collect();
        let init = normalize(p);
        let mut states = vec![init.clone()];
        let mut canons = vec![canonicalize(&init)];
        let mut index: BTreeMap<CanonicalForm, usize> = BTreeMap::new();
        index.insert(canons[0].clone(), 0);
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        queue.push_back((0, 0));
        let mut truncated = false;
        while let Some((i, d)) = queue.pop_front() {
            let s = states[i].clone();
            let mut succs: Vec<Proc> = Vec::new();
            for r in enumerate_redexes(&s) {
                succs.push(step(&s, &r).expect("enumerated redex fires"));
            }
            for site in reception_sites(&s) {
                if !fire_names
                    .iter()
                    .any(|fname| name_equiv(&site.input.channel, fname))
                {
                    continue;
                }
                let (tuples, capped) = combos(&universe, var_arity(site.input));
                if capped {
                    truncated = true;
                }
                for zs in &tuples {
                    succs.push(fire(&s, &site, zs));
                }
            }
            if d == self.ctx.depth {
                if succs.iter().any(|q| !index.contains_key(&canonicalize(q))) {
                    truncated = true;
                }
                continue;
            }
            for q in succs {
                let key = canonicalize(&q);
                if index.contains_key(&key) {
                    continue;
                }
                if states.len() >= self.ctx.max_states {
                    truncated = true;
                    break;
                }
                let id = states.len();
                index.insert(key.clone(), id);
                states.push(q);
                canons.push(key);
                queue.push_back((id, d + 1));
            }
        }
        Closure {
            states,
            canons,
            truncated,
        }
    }
}

fn mentions_free_prop(f: &Formula, env: &Env, bound: &mut Vec<String>) -> bool {
    match f {
        Formula::True | Formula::Null | Formula::ProcEq(_) => false,
        Formula::PropVar(x) => !bound.contains(x) && !env.contains_key(x),
        Formula::Not(g) => mentions_free_prop(g, env, bound),
        Formula::And(a, b) | Formula::Sep(a, b) => {
            mentions_free_prop(a, env, bound) || mentions_free_prop(b, env, bound)
        }
        Formula::Disclosure(a) => nf_mentions_free_prop(a, env, bound),
        Formula::Dissemination(a, args) => {
            nf_mentions_free_prop(a, env, bound)
                || args.iter().any(|g| mentions_free_prop(g, env, bound))
        }
        Formula::Reception(a, _, body) => {
            nf_mentions_free_prop(a, env, bound) || mentions_free_prop(body, env, bound)
        }
        Formula::Gfp(x, body) => {
            bound.push(x.clone());
            let r = mentions_free_prop(body, env, bound);
            bound.pop();
            r
        }
        Formula::Forall(_, dom, body) => {
            nf_mentions_free_prop(dom, env, bound) || mentions_free_prop(body, env, bound)
        }
        Formula::RelyGuarantee(h, _, c) => {
            mentions_free_prop(h, env, bound) || mentions_free_prop(c, env, bound)
        }
    }
}

fn nf_mentions_free_prop(a: &NameFormula, env: &Env, bound: &mut Vec<String>) -> bool {
    match a {
        NameFormula::QuoteFormula(f) => mentions_free_prop(f, env, bound),
        _ => false,
    }
}

fn reception_channel(a: &NameFormula, out: &mut Vec<NameFormula>, has_var: &mut bool) {
    match a {
        NameFormula::NameVar(_) => *has_var = true,
        other => {
            if let NameFormula::QuoteFormula(inner) = other {
                collect_receptions(inner, out, has_var);
            }
            out.push(other.clone());
        }
    }
}

fn collect_receptions(f: &Formula, out: &mut Vec<NameFormula>, has_var: &mut bool) {
    match f {
        Formula::True | Formula::Null | Formula::ProcEq(_) | Formula::PropVar(_) => {}
        Formula::Not(g) => collect_receptions(g, out, has_var),
        Formula::And(a, b) | Formula::Sep(a, b) => {
            collect_receptions(a, out, has_var);
            collect_receptions(b, out, has_var);
        }
        Formula::Disclosure(_) => {}
        Formula::Dissemination(_, args) => {
            for g in args {
                collect_receptions(g, out, has_var);
            }
        }
        Formula::Reception(a, _, body) => {
            reception_channel(a, out, has_var);
            collect_receptions(body, out, has_var);
        }
        Formula::Gfp(_, body) => collect_receptions(body, out, has_var),
        Formula::Forall(_, _, body) => collect_receptions(body, out, has_var),
        Formula::RelyGuarantee(h, _, c) => {
            collect_receptions(h, out, has_var);
            collect_receptions(c, out, has_var);
        }
    }
}

/// Freshen the listed identifiers in `term`, mirroring what `new` binders do
/// in the surface language.
fn hide(term: Proc, idents: &[String]) -> Proc {
    let mut term = term;
    for id in idents {
        let f = fresh_name(id, &term);
        term = rename_free(&term, &Name::var(id), &f);
    }
    term
}
