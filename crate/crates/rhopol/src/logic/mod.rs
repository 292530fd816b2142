//! Namespace logic: formulas are types for processes, and quoted formulas
//! (`@[ f ]`) carve out namespaces — sets of names whose quoted processes
//! satisfy the formula.
//!
//! Checking is bounded and three-valued. Quantifiers and namespace
//! denotations range over a finite universe of names; greatest fixpoints run
//! over the state space reachable through reductions and through firings of
//! the receptions the fixpoint body mentions. Whenever a bound cuts off
//! exploration, the verdict is `Unknown` rather than a guess.

mod eval;
mod nsl;

use std::collections::{BTreeMap, BTreeSet};

use crate::sugar::encode::is_reserved;
use crate::syntax::{free_names, names, pretty, CanonicalForm, Name, NameSet, Proc};

pub use nsl::{parse_formula, NslError};

/// A process formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Null,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// Separation: the process splits into parallel parts satisfying each
    /// side.
    Sep(Box<Formula>, Box<Formula>),
    /// The process is a dereference of a name in the namespace.
    Disclosure(NameFormula),
    /// The process outputs on a name in the namespace, with each argument
    /// satisfying the corresponding formula.
    Dissemination(NameFormula, Vec<Formula>),
    /// The process can receive on a name in the namespace; the binder names
    /// the received value inside the body formula.
    Reception(NameFormula, String, Box<Formula>),
    /// Greatest fixpoint.
    Gfp(String, Box<Formula>),
    /// Universal quantification over the names in a namespace.
    Forall(String, NameFormula, Box<Formula>),
    /// Rely-guarantee: composed with any environment satisfying the
    /// hypothesis, under hiding of the listed identifiers, the conclusion
    /// holds.
    RelyGuarantee(Box<Formula>, Vec<String>, Box<Formula>),
    PropVar(String),
    /// Internal atom: structurally congruent to a specific process. Used to
    /// express complements of singleton namespaces; not parseable.
    ProcEq(Box<Proc>),
}

/// A name formula — the denotation is a set of names.
#[derive(Debug, Clone, PartialEq)]
pub enum NameFormula {
    /// The namespace of quotes of processes satisfying the formula.
    QuoteFormula(Box<Formula>),
    /// The singleton class of the quote of a process.
    QuoteProc(Box<Proc>),
    /// A name variable bound by an enclosing reception or quantifier.
    NameVar(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub reason: String,
    /// A state involved in the failure, when the checker isolated one.
    pub witness: Option<Proc>,
}

/// Bounds and instantiation domains for a check.
#[derive(Debug, Clone)]
pub struct CheckContext {
    /// Quantifier and namespace domain, deduplicated under name equivalence.
    pub universe: NameSet,
    /// Reachability bound for weak modalities and fixpoints.
    pub depth: usize,
    /// State cap for explorations.
    pub max_states: usize,
    /// Environments quantified over by rely-guarantee formulas.
    pub env_suite: Vec<Proc>,
    /// Externally supplied meanings for free propositional variables.
    pub valuation: BTreeMap<String, BTreeSet<CanonicalForm>>,
    /// Marks the universe as known-incomplete: failed existentials then
    /// report `Unknown` instead of `Fails`.
    pub universe_capped: bool,
}

impl CheckContext {
    pub fn new(universe: NameSet, depth: usize) -> CheckContext {
        CheckContext {
            universe,
            depth,
            max_states: 20_000,
            env_suite: Vec::new(),
            valuation: BTreeMap::new(),
            universe_capped: false,
        }
    }

    /// The default context for a subject process: its free names (less the
    /// reserved machinery namespace) plus two fresh observer names standing
    /// in for "any other channel".
    pub fn for_subject(p: &Proc, depth: usize) -> CheckContext {
        let mut universe = free_names(p).filtered(|n| !is_reserved(n));
        for obs in observers(p, 2) {
            universe.insert(&obs);
        }
        CheckContext::new(universe, depth)
    }

    /// Like [`CheckContext::for_subject`], but also folds in the names the
    /// formula itself mentions. A subject can satisfy or violate a policy on
    /// a channel it never names free (a service reached through an
    /// encoding's payload, say), so the formula's names belong in the
    /// universe too.
    pub fn for_check(p: &Proc, f: &Formula, depth: usize) -> CheckContext {
        let mut universe = free_names(p);
        universe.extend_from(&formula_names(f));
        let mut universe = universe.filtered(|n| !is_reserved(n));
        let mut avoid: Vec<Proc> = vec![p.clone()];
        avoid.extend(universe.iter().map(|n| Proc::output(n.clone(), Vec::new())));
        for obs in observers(&Proc::Par(avoid), 2) {
            universe.insert(&obs);
        }
        CheckContext::new(universe, depth)
    }
}

/// Every concrete name a formula mentions, through quoted processes and
/// congruence atoms, at any depth.
pub fn formula_names(f: &Formula) -> NameSet {
    fn walk(f: &Formula, out: &mut NameSet) {
        match f {
            Formula::True | Formula::Null | Formula::PropVar(_) => {}
            Formula::ProcEq(p) => {
                out.insert(&Name::quote((**p).clone()));
            }
            Formula::Not(g) | Formula::Gfp(_, g) => walk(g, out),
            Formula::And(a, b) | Formula::Sep(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Disclosure(a) => walk_nf(a, out),
            Formula::Dissemination(a, args) => {
                walk_nf(a, out);
                for g in args {
                    walk(g, out);
                }
            }
            Formula::Reception(a, _, body) => {
                walk_nf(a, out);
                walk(body, out);
            }
            Formula::Forall(_, dom, body) => {
                walk_nf(dom, out);
                walk(body, out);
            }
            Formula::RelyGuarantee(h, _, c) => {
                walk(h, out);
                walk(c, out);
            }
        }
    }
    fn walk_nf(a: &NameFormula, out: &mut NameSet) {
        match a {
            NameFormula::QuoteFormula(f) => walk(f, out),
            NameFormula::QuoteProc(p) => {
                out.insert(&Name::quote((**p).clone()));
            }
            NameFormula::NameVar(_) => {}
        }
    }
    let mut out = NameSet::new();
    walk(f, &mut out);
    out
}

/// Plain (non-reserved) names guaranteed not to occur in `p`.
pub fn observers(p: &Proc, count: usize) -> Vec<Name> {
    let taken = names(p);
    let mut out = Vec::new();
    let mut i = 1usize;
    while out.len() < count {
        let cand = Name::var(&format!("obs{i}"));
        if !taken.contains(&cand) {
            out.push(cand);
        }
        i += 1;
    }
    out
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("unbound propositional variable {0}")]
    UnboundPropVar(String),
    #[error("unbound name variable {0}")]
    UnboundNameVar(String),
}

/// Decide whether `p` witnesses `f` within the bounds of `ctx`.
pub fn check(p: &Proc, f: &Formula, ctx: &CheckContext) -> Result<CheckResult, LogicError> {
    validate_closed(f, &mut Vec::new(), &mut Vec::new(), ctx)?;
    Ok(eval::run_check(p, f, ctx))
}

/// The denotation of a closed name formula: the universe names definitely
/// inside it (members whose status is `Unknown` are excluded).
pub fn name_denotation(a: &NameFormula, ctx: &CheckContext) -> NameSet {
    eval::denotation(a, ctx)
}

fn validate_closed(
    f: &Formula,
    name_vars: &mut Vec<String>,
    prop_vars: &mut Vec<String>,
    ctx: &CheckContext,
) -> Result<(), LogicError> {
    match f {
        Formula::True | Formula::Null | Formula::ProcEq(_) => Ok(()),
        Formula::Not(g) => validate_closed(g, name_vars, prop_vars, ctx),
        Formula::And(a, b) | Formula::Sep(a, b) => {
            validate_closed(a, name_vars, prop_vars, ctx)?;
            validate_closed(b, name_vars, prop_vars, ctx)
        }
        Formula::Disclosure(a) => validate_name(a, name_vars, prop_vars, ctx),
        Formula::Dissemination(a, args) => {
            validate_name(a, name_vars, prop_vars, ctx)?;
            for g in args {
                validate_closed(g, name_vars, prop_vars, ctx)?;
            }
            Ok(())
        }
        Formula::Reception(a, b, body) => {
            validate_name(a, name_vars, prop_vars, ctx)?;
            name_vars.push(b.clone());
            let r = validate_closed(body, name_vars, prop_vars, ctx);
            name_vars.pop();
            r
        }
        Formula::Gfp(x, body) => {
            prop_vars.push(x.clone());
            let r = validate_closed(body, name_vars, prop_vars, ctx);
            prop_vars.pop();
            r
        }
        Formula::Forall(n, dom, body) => {
            validate_name(dom, name_vars, prop_vars, ctx)?;
            name_vars.push(n.clone());
            let r = validate_closed(body, name_vars, prop_vars, ctx);
            name_vars.pop();
            r
        }
        Formula::RelyGuarantee(h, _, c) => {
            validate_closed(h, name_vars, prop_vars, ctx)?;
            validate_closed(c, name_vars, prop_vars, ctx)
        }
        Formula::PropVar(x) => {
            if prop_vars.contains(x) || ctx.valuation.contains_key(x) {
                Ok(())
            } else {
                Err(LogicError::UnboundPropVar(x.clone()))
            }
        }
    }
}

fn validate_name(
    a: &NameFormula,
    name_vars: &mut Vec<String>,
    prop_vars: &mut Vec<String>,
    ctx: &CheckContext,
) -> Result<(), LogicError> {
    match a {
        NameFormula::QuoteFormula(f) => validate_closed(f, name_vars, prop_vars, ctx),
        NameFormula::QuoteProc(_) => Ok(()),
        NameFormula::NameVar(n) => {
            if name_vars.contains(n) {
                Ok(())
            } else {
                Err(LogicError::UnboundNameVar(n.clone()))
            }
        }
    }
}

// ---------------------------------------------------------------- presets

/// The namespace of every name *not* in the given one.
fn complement_ns(ns: &NameFormula) -> NameFormula {
    match ns {
        NameFormula::QuoteFormula(f) => {
            NameFormula::QuoteFormula(Box::new(Formula::Not(f.clone())))
        }
        NameFormula::QuoteProc(p) => NameFormula::QuoteFormula(Box::new(Formula::Not(Box::new(
            Formula::ProcEq(p.clone()),
        )))),
        NameFormula::NameVar(_) => panic!("cannot complement an open name formula"),
    }
}

/// `rec X. <ns ? b> X & ~ <complement ? b> X`: the process forever inputs
/// only on names in the namespace, and is always willing to.
pub fn firewall(ns: &NameFormula) -> Formula {
    let x = || Box::new(Formula::PropVar("X".into()));
    Formula::Gfp(
        "X".into(),
        Box::new(Formula::And(
            Box::new(Formula::Reception(ns.clone(), "b".into(), x())),
            Box::new(Formula::Not(Box::new(Formula::Reception(
                complement_ns(ns),
                "b".into(),
                x(),
            )))),
        )),
    )
}

/// The firewall formula for the singleton namespace of `slot`.
pub fn sole_access(slot: &Name) -> Formula {
    firewall(&NameFormula::QuoteProc(Box::new(slot.unquote().clone())))
}

/// `rec X. ~ <slot ? b> X`: the process never receives on `slot`.
pub fn no_access(slot: &Name) -> Formula {
    Formula::Gfp(
        "X".into(),
        Box::new(Formula::Not(Box::new(Formula::Reception(
            NameFormula::QuoteProc(Box::new(slot.unquote().clone())),
            "b".into(),
            Box::new(Formula::PropVar("X".into())),
        )))),
    )
}

/// `~(f & ~g)`.
pub fn implies(f: Formula, g: Formula) -> Formula {
    Formula::Not(Box::new(Formula::And(
        Box::new(f),
        Box::new(Formula::Not(Box::new(g))),
    )))
}

/// `~(~f & ~g)`.
pub fn or(f: Formula, g: Formula) -> Formula {
    Formula::Not(Box::new(Formula::And(
        Box::new(Formula::Not(Box::new(f))),
        Box::new(Formula::Not(Box::new(g))),
    )))
}

// --------------------------------------------------------- substitutions

/// Replace free occurrences of the name variable `var` by the concrete name
/// `n` (as a singleton namespace).
pub fn subst_name(f: &Formula, var: &str, n: &Name) -> Formula {
    let nf = |a: &NameFormula| subst_name_in_nf(a, var, n);
    match f {
        Formula::True => Formula::True,
        Formula::Null => Formula::Null,
        Formula::ProcEq(p) => Formula::ProcEq(p.clone()),
        Formula::Not(g) => Formula::Not(Box::new(subst_name(g, var, n))),
        Formula::And(a, b) => Formula::And(
            Box::new(subst_name(a, var, n)),
            Box::new(subst_name(b, var, n)),
        ),
        Formula::Sep(a, b) => Formula::Sep(
            Box::new(subst_name(a, var, n)),
            Box::new(subst_name(b, var, n)),
        ),
        Formula::Disclosure(a) => Formula::Disclosure(nf(a)),
        Formula::Dissemination(a, args) => Formula::Dissemination(
            nf(a),
            args.iter().map(|g| subst_name(g, var, n)).collect(),
        ),
        Formula::Reception(a, b, body) => {
            let body = if b == var {
                body.clone()
            } else {
                Box::new(subst_name(body, var, n))
            };
            Formula::Reception(nf(a), b.clone(), body)
        }
        Formula::Gfp(x, body) => Formula::Gfp(x.clone(), Box::new(subst_name(body, var, n))),
        Formula::Forall(m, dom, body) => {
            let body = if m == var {
                body.clone()
            } else {
                Box::new(subst_name(body, var, n))
            };
            Formula::Forall(m.clone(), nf(dom), body)
        }
        Formula::RelyGuarantee(h, hide, c) => Formula::RelyGuarantee(
            Box::new(subst_name(h, var, n)),
            hide.clone(),
            Box::new(subst_name(c, var, n)),
        ),
        Formula::PropVar(x) => Formula::PropVar(x.clone()),
    }
}

fn subst_name_in_nf(a: &NameFormula, var: &str, n: &Name) -> NameFormula {
    match a {
        NameFormula::QuoteFormula(f) => {
            NameFormula::QuoteFormula(Box::new(subst_name(f, var, n)))
        }
        NameFormula::QuoteProc(p) => NameFormula::QuoteProc(p.clone()),
        NameFormula::NameVar(m) if m == var => {
            NameFormula::QuoteProc(Box::new(n.unquote().clone()))
        }
        NameFormula::NameVar(m) => NameFormula::NameVar(m.clone()),
    }
}

/// Replace free occurrences of the propositional variable `var` by `g`.
pub fn subst_prop(f: &Formula, var: &str, g: &Formula) -> Formula {
    let nf = |a: &NameFormula| match a {
        NameFormula::QuoteFormula(inner) => {
            NameFormula::QuoteFormula(Box::new(subst_prop(inner, var, g)))
        }
        other => other.clone(),
    };
    match f {
        Formula::True => Formula::True,
        Formula::Null => Formula::Null,
        Formula::ProcEq(p) => Formula::ProcEq(p.clone()),
        Formula::Not(h) => Formula::Not(Box::new(subst_prop(h, var, g))),
        Formula::And(a, b) => Formula::And(
            Box::new(subst_prop(a, var, g)),
            Box::new(subst_prop(b, var, g)),
        ),
        Formula::Sep(a, b) => Formula::Sep(
            Box::new(subst_prop(a, var, g)),
            Box::new(subst_prop(b, var, g)),
        ),
        Formula::Disclosure(a) => Formula::Disclosure(nf(a)),
        Formula::Dissemination(a, args) => Formula::Dissemination(
            nf(a),
            args.iter().map(|h| subst_prop(h, var, g)).collect(),
        ),
        Formula::Reception(a, b, body) => {
            Formula::Reception(nf(a), b.clone(), Box::new(subst_prop(body, var, g)))
        }
        Formula::Gfp(x, body) if x == var => Formula::Gfp(x.clone(), body.clone()),
        Formula::Gfp(x, body) => Formula::Gfp(x.clone(), Box::new(subst_prop(body, var, g))),
        Formula::Forall(n, dom, body) => Formula::Forall(
            n.clone(),
            nf(dom),
            Box::new(subst_prop(body, var, g)),
        ),
        Formula::RelyGuarantee(h, hide, c) => Formula::RelyGuarantee(
            Box::new(subst_prop(h, var, g)),
            hide.clone(),
            Box::new(subst_prop(c, var, g)),
        ),
        Formula::PropVar(x) if x == var => g.clone(),
        Formula::PropVar(x) => Formula::PropVar(x.clone()),
    }
}

/// True when `var` occurs only under an even number of polarity flips
/// (negations, rely-guarantee hypotheses, quantifier domains).
pub fn monotone_in(f: &Formula, var: &str) -> bool {
    fn walk(f: &Formula, var: &str, pos: bool, ok: &mut bool) {
        match f {
            Formula::True | Formula::Null | Formula::ProcEq(_) => {}
            Formula::Not(g) => walk(g, var, !pos, ok),
            Formula::And(a, b) | Formula::Sep(a, b) => {
                walk(a, var, pos, ok);
                walk(b, var, pos, ok);
            }
            Formula::Disclosure(a) => walk_nf(a, var, pos, ok),
            Formula::Dissemination(a, args) => {
                walk_nf(a, var, pos, ok);
                for g in args {
                    walk(g, var, pos, ok);
                }
            }
            Formula::Reception(a, _, body) => {
                walk_nf(a, var, pos, ok);
                walk(body, var, pos, ok);
            }
            Formula::Gfp(x, body) => {
                if x != var {
                    walk(body, var, pos, ok);
                }
            }
            Formula::Forall(_, dom, body) => {
                walk_nf(dom, var, !pos, ok);
                walk(body, var, pos, ok);
            }
            Formula::RelyGuarantee(h, _, c) => {
                walk(h, var, !pos, ok);
                walk(c, var, pos, ok);
            }
            Formula::PropVar(x) => {
                if x == var && !pos {
                    *ok = false;
                }
            }
        }
    }
    fn walk_nf(a: &NameFormula, var: &str, pos: bool, ok: &mut bool) {
        if let NameFormula::QuoteFormula(f) = a {
            walk(f, var, pos, ok);
        }
    }
    let mut ok = true;
    walk(f, var, true, &mut ok);
    ok
}

// ---------------------------------------------------------------- display

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0);
        f.write_str(&s)
    }
}

impl Formula {
    fn write(&self, out: &mut String, level: u8) {
        let paren = |needed: u8, out: &mut String, body: &dyn Fn(&mut String)| {
            if level > needed {
                out.push('(');
                body(out);
                out.push(')');
            } else {
                body(out);
            }
        };
        match self {
            Formula::True => out.push_str("true"),
            Formula::Null => out.push('0'),
            Formula::Not(g) => {
                out.push('~');
                g.write(out, 3);
            }
            Formula::And(a, b) => paren(2, out, &|out| {
                a.write(out, 2);
                out.push_str(" & ");
                b.write(out, 2);
            }),
            Formula::Sep(a, b) => paren(1, out, &|out| {
                a.write(out, 1);
                out.push_str(" | ");
                b.write(out, 1);
            }),
            Formula::Disclosure(a) => {
                out.push_str("drop(");
                a.write(out);
                out.push(')');
            }
            Formula::Dissemination(a, args) => {
                out.push('<');
                a.write(out);
                out.push_str(">(");
                for (i, g) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    g.write(out, 0);
                }
                out.push(')');
            }
            Formula::Reception(a, b, body) => {
                out.push('<');
                a.write(out);
                out.push_str(" ? ");
                out.push_str(b);
                out.push_str("> ");
                body.write(out, 3);
            }
            Formula::Gfp(x, body) => paren(1, out, &|out| {
                out.push_str("rec ");
                out.push_str(x);
                out.push_str(". ");
                body.write(out, 0);
            }),
            Formula::Forall(n, dom, body) => paren(1, out, &|out| {
                out.push_str("forall ");
                out.push_str(n);
                out.push_str(" : ");
                dom.write(out);
                out.push_str(" . ");
                body.write(out, 0);
            }),
            Formula::RelyGuarantee(h, hide, c) => paren(0, out, &|out| {
                h.write(out, 1);
                out.push_str(" |> {");
                out.push_str(&hide.join(", "));
                out.push_str("} ");
                c.write(out, 1);
            }),
            Formula::PropVar(x) => out.push_str(x),
            Formula::ProcEq(p) => {
                out.push_str("is(@{ ");
                out.push_str(&pretty::pretty(p));
                out.push_str(" })");
            }
        }
    }
}

impl std::fmt::Display for NameFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;
    use crate::sugar::desugar;

    fn core(src: &str) -> Proc {
        desugar(&parse_program(src).unwrap()).unwrap()
    }

    fn verdict_of(p: &Proc, f: &Formula, depth: usize) -> Verdict {
        let ctx = CheckContext::for_check(p, f, depth);
        check(p, f, &ctx).unwrap().verdict
    }

    fn quote_str(s: &str) -> NameFormula {
        NameFormula::QuoteProc(Box::new(Proc::str(s)))
    }

    fn wb(chan: &str, args: Vec<Formula>) -> Formula {
        Formula::Dissemination(quote_str(chan), args)
    }

    #[test]
    fn truth_and_null_are_strict() {
        assert_eq!(verdict_of(&Proc::Stop, &Formula::True, 4), Verdict::Holds);
        assert_eq!(verdict_of(&Proc::Stop, &Formula::Null, 4), Verdict::Holds);
        assert_eq!(verdict_of(&core("x!(0)"), &Formula::Null, 4), Verdict::Fails);
        // The parallel monoid identifies 0 | 0 with 0.
        let padded = Proc::Par(vec![Proc::Stop, Proc::Stop]);
        assert_eq!(verdict_of(&padded, &Formula::Null, 4), Verdict::Holds);
    }

    #[test]
    fn denotations_respect_name_equivalence() {
        let universe: NameSet = [
            Name::quote(Proc::Stop),
            Name::quote(Proc::Par(vec![Proc::Stop, Proc::Stop])),
            Name::var("a"),
        ]
        .into_iter()
        .collect();
        assert_eq!(universe.len(), 2, "both spellings of @0 are one name");
        let ctx = CheckContext::new(universe, 4);
        let stops = name_denotation(&NameFormula::QuoteProc(Box::new(Proc::Stop)), &ctx);
        assert_eq!(stops.len(), 1);
        assert!(stops.contains(&Name::quote(Proc::Stop)));
        let all = name_denotation(
            &NameFormula::QuoteFormula(Box::new(Formula::True)),
            &ctx,
        );
        assert_eq!(all.len(), 2);
        let null = name_denotation(
            &NameFormula::QuoteFormula(Box::new(Formula::Null)),
            &ctx,
        );
        assert_eq!(null.len(), 1);
        assert!(null.contains(&Name::quote(Proc::Stop)));
    }

    #[test]
    fn dissemination_is_weak() {
        let p = core("a!(1)\na?(z) => x!(1)");
        assert_eq!(verdict_of(&p, &wb("x", vec![Formula::True]), 4), Verdict::Holds);
        assert_eq!(verdict_of(&p, &wb("x", vec![]), 4), Verdict::Fails);
        assert_eq!(verdict_of(&p, &wb("x", vec![Formula::Null]), 4), Verdict::Fails);
    }

    #[test]
    fn reception_quantifies_over_deliveries() {
        let f = parse_formula("<a ? b> <b>(true)").unwrap();
        // Echoes whatever name it is handed: for every delivery c there is a
        // way to receive (z = c) that then outputs on c.
        assert_eq!(verdict_of(&core("a?(y) => y!(\"got\")"), &f, 4), Verdict::Holds);
        assert_eq!(verdict_of(&core("a?(y) => 0"), &f, 4), Verdict::Fails);
    }

    #[test]
    fn disclosure_is_structural() {
        let p = core("*a");
        assert_eq!(
            verdict_of(&p, &parse_formula("drop(a)").unwrap(), 4),
            Verdict::Holds
        );
        assert_eq!(
            verdict_of(&p, &parse_formula("drop(@[ 0 ])").unwrap(), 4),
            Verdict::Fails
        );
        assert_eq!(
            verdict_of(&Proc::Stop, &parse_formula("drop(@[ true ])").unwrap(), 4),
            Verdict::Fails
        );
    }

    #[test]
    fn sole_access_holds_for_a_dedicated_server() {
        let server = core("(def Serve(x) => { x?(y) => Serve(x) })(slot)");
        let f = sole_access(&Name::var("slot"));
        let ctx = CheckContext::for_check(&server, &f, 16);
        // Machinery channels are reserved, so the universe is the slot the
        // formula names plus the two observers.
        assert_eq!(ctx.universe.len(), 3);
        assert_eq!(check(&server, &f, &ctx).unwrap().verdict, Verdict::Holds);
        // A silent process is not always willing to receive on the slot.
        assert_eq!(verdict_of(&Proc::Stop, &f, 8), Verdict::Fails);
        // Serving another channel both misses the slot and hits the
        // complement.
        assert_eq!(verdict_of(&core("u?(y) => 0"), &f, 8), Verdict::Fails);
    }

    #[test]
    fn no_access_spots_the_listener() {
        let f = no_access(&Name::var("slot"));
        assert_eq!(verdict_of(&Proc::Stop, &f, 8), Verdict::Holds);
        assert_eq!(verdict_of(&core("u!(1)"), &f, 8), Verdict::Holds);
        let p = core("slot?(y) => 0");
        let ctx = CheckContext::for_check(&p, &f, 8);
        let r = check(&p, &f, &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.witness.is_some(), "a failing state is reported");
    }

    #[test]
    fn single_shot_firewall_separates_namespaces() {
        let ns = quote_str("a");
        let f = Formula::And(
            Box::new(Formula::Reception(
                ns.clone(),
                "b".into(),
                Box::new(Formula::True),
            )),
            Box::new(Formula::Not(Box::new(Formula::Reception(
                complement_ns(&ns),
                "b".into(),
                Box::new(Formula::True),
            )))),
        );
        assert_eq!(verdict_of(&core("a?(y) => 0"), &f, 4), Verdict::Holds);
        assert_eq!(verdict_of(&core("u?(y) => 0"), &f, 4), Verdict::Fails);
    }

    #[test]
    fn derived_connectives() {
        let stop = Proc::Stop;
        let out = core("x!(0)");
        let f = or(Formula::Null, Formula::Null);
        assert_eq!(verdict_of(&stop, &f, 4), Verdict::Holds);
        assert_eq!(verdict_of(&out, &f, 4), Verdict::Fails);
        assert_eq!(
            verdict_of(&out, &implies(Formula::Null, Formula::True), 4),
            Verdict::Holds
        );
        assert_eq!(
            verdict_of(&out, &implies(Formula::True, Formula::Null), 4),
            Verdict::Fails
        );
    }

    #[test]
    fn separation_splits_components() {
        let p = core("a!(1)\nb!(2)");
        let a = wb("a", vec![Formula::True]);
        let b = wb("b", vec![Formula::True]);
        // 0 is the unit: the empty split carries it.
        let unit = Formula::Sep(Box::new(a.clone()), Box::new(Formula::Null));
        assert_eq!(verdict_of(&p, &unit, 4), Verdict::Holds);
        let both = Formula::Sep(Box::new(a.clone()), Box::new(b));
        assert_eq!(verdict_of(&p, &both, 4), Verdict::Holds);
        // One output cannot be on both sides of a split.
        let dup = Formula::Sep(Box::new(a.clone()), Box::new(a));
        assert_eq!(verdict_of(&p, &dup, 4), Verdict::Fails);
    }

    #[test]
    fn gfp_agrees_with_its_unfolding() {
        let f = no_access(&Name::var("slot"));
        let Formula::Gfp(x, body) = &f else {
            panic!("preset shape changed");
        };
        let unfolded = subst_prop(body, x, &f);
        for src in ["slot?(y) => 0", "u!(1)"] {
            let p = core(src);
            assert_eq!(
                verdict_of(&p, &f, 8),
                verdict_of(&p, &unfolded, 8),
                "fixpoint and unfolding disagree on {src}"
            );
        }
    }

    #[test]
    fn bounds_degrade_to_unknown() {
        let p = core("a!(1)\na?(z) => b!(1)\nb?(z) => c!(1)");
        let f = wb("c", vec![Formula::True]);
        assert_eq!(verdict_of(&p, &f, 0), Verdict::Unknown);
        assert_eq!(
            verdict_of(&p, &Formula::Not(Box::new(f.clone())), 0),
            Verdict::Unknown,
            "negation must not manufacture certainty"
        );
        assert_eq!(verdict_of(&p, &f, 8), Verdict::Holds);

        let listener = core("slot?(y) => 0");
        let na = no_access(&Name::var("slot"));
        let mut tiny = CheckContext::for_check(&listener, &na, 8);
        tiny.max_states = 1;
        let r = check(&listener, &na, &tiny).unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
        assert!(r.reason.contains("truncated"), "{}", r.reason);
    }

    #[test]
    fn rely_guarantee_composes_under_hiding() {
        let goal = wb("a", vec![Formula::True]);
        let open = Formula::RelyGuarantee(
            Box::new(Formula::True),
            vec![],
            Box::new(goal.clone()),
        );
        let hidden = Formula::RelyGuarantee(
            Box::new(Formula::True),
            vec!["a".into()],
            Box::new(goal),
        );
        let mut ctx = CheckContext::for_check(&Proc::Stop, &open, 4);
        ctx.env_suite = vec![core("a!(1)")];
        assert_eq!(check(&Proc::Stop, &open, &ctx).unwrap().verdict, Verdict::Holds);
        let r = check(&Proc::Stop, &hidden, &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.witness.is_some(), "the composed system is reported");
    }

    #[test]
    fn capped_universes_weaken_failed_existentials() {
        let p = core("a?(y) => 0");
        let f = parse_formula("<a ? b> <b>(true)").unwrap();
        let mut ctx = CheckContext::for_check(&p, &f, 4);
        ctx.universe_capped = true;
        assert_eq!(check(&p, &f, &ctx).unwrap().verdict, Verdict::Unknown);
    }

    #[test]
    fn open_formulas_are_rejected() {
        let ctx = CheckContext::for_subject(&Proc::Stop, 4);
        assert_eq!(
            check(&Proc::Stop, &Formula::PropVar("X".into()), &ctx).unwrap_err(),
            LogicError::UnboundPropVar("X".into())
        );
        let open = Formula::Disclosure(NameFormula::NameVar("n".into()));
        assert_eq!(
            check(&Proc::Stop, &open, &ctx).unwrap_err(),
            LogicError::UnboundNameVar("n".into())
        );
    }

    #[test]
    fn display_reparses_for_surface_forms() {
        for src in [
            "~true & 0 | true",
            "<a ? b> drop(b)",
            "forall n : @[ true ] . <n>(true)",
            "true |> {a} <a>(true)",
            "rec X. <a ? b> X",
        ] {
            let f = parse_formula(src).unwrap();
            let printed = format!("{f}");
            let again = parse_formula(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}`: {e}"));
            assert_eq!(f, again, "source `{src}` printed as `{printed}`");
        }
    }
}

impl NameFormula {
    fn write(&self, out: &mut String) {
        match self {
            NameFormula::QuoteFormula(f) => {
                out.push_str("@[ ");
                f.write(out, 0);
                out.push_str(" ]");
            }
            NameFormula::QuoteProc(p) => {
                out.push_str(&pretty::pretty_name(&Name::quote((**p).clone())));
            }
            NameFormula::NameVar(n) => out.push_str(n),
        }
    }
}
