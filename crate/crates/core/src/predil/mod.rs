//! Coded predilators: order families on finite arities with an action on
//! embeddings and finite supports.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finord::{all_embeddings, compose, FinEmbedding};
use crate::orders::{self, LinearOrder, Order};
use crate::stream::{self, Stream};
use crate::Elem;

mod fragment;
mod stock;

pub use fragment::{decode_fragment, encode_fragment, DecodedFragment};
pub use stock::{constant_predilator, empty_predilator, omega_dilator, OmegaClass};

/// `(n, σ)` with `supp_n(σ) = n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TraceElem {
    pub arity: usize,
    pub elem: Elem,
}

impl TraceElem {
    pub fn new(arity: usize, elem: Elem) -> Self {
        TraceElem { arity, elem }
    }

    pub fn to_elem(&self) -> Elem {
        Elem::pair(Elem::Nat(self.arity as u64), self.elem.clone())
    }

    pub fn from_elem(e: &Elem) -> Option<Self> {
        let (n, x) = e.as_pair()?;
        Some(TraceElem::new(n.as_nat()? as usize, x.clone()))
    }
}

impl fmt::Display for TraceElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.arity, self.elem)
    }
}

/// The data of a coded predilator. `preimage` is the range decider: it
/// returns the unique `σ` with `act(f, σ) = y` when there is one, which by
/// the support condition happens exactly when `supp(y) ⊆ rng(f)`.
pub trait PredilatorImpl: Send + Sync {
    fn label(&self) -> String;
    fn contains(&self, n: usize, x: &Elem) -> bool;
    fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering;
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem;
    /// Sorted subset of `n`.
    fn supp(&self, n: usize, x: &Elem) -> Vec<usize>;
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem>;
    /// Fair enumeration of `D(n)`.
    fn elements(&self, n: usize) -> Stream;
    /// A direct enumeration of the trace, when cheaper than filtering.
    fn trace(&self) -> Option<Stream<TraceElem>> {
        None
    }
}

/// Shared handle to a predilator.
#[derive(Clone)]
pub struct Predilator(Arc<dyn PredilatorImpl>);

/// Steps allowed per requested element when taking windows.
pub const STEPS_PER_ELEM: usize = 64;
pub const STEPS_BASE: usize = 512;

pub fn step_cap(k: usize) -> usize {
    STEPS_BASE + STEPS_PER_ELEM * k
}

impl Predilator {
    pub fn new(imp: impl PredilatorImpl + 'static) -> Self {
        Predilator(Arc::new(imp))
    }

    /// Identity of the handle, for memo tables.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as *const () as usize
    }

    pub fn label(&self) -> String {
        self.0.label()
    }

    pub fn contains(&self, n: usize, x: &Elem) -> bool {
        self.0.contains(n, x)
    }

    pub fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering {
        self.0.compare(n, x, y)
    }

    pub fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        if f.is_identity() {
            return x.clone();
        }
        self.0.act(f, x)
    }

    pub fn supp(&self, n: usize, x: &Elem) -> Vec<usize> {
        self.0.supp(n, x)
    }

    pub fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        if f.is_identity() {
            return Some(y.clone());
        }
        self.0.preimage(f, y)
    }

    pub fn in_range(&self, f: &FinEmbedding, y: &Elem) -> bool {
        self.preimage(f, y).is_some()
    }

    pub fn elements(&self, n: usize) -> Stream {
        self.0.elements(n)
    }

    /// Fair enumeration of `Tr(D)`.
    pub fn trace(&self) -> Stream<TraceElem> {
        if let Some(s) = self.0.trace() {
            return s;
        }
        let d = self.clone();
        let outer: Stream<Stream<TraceElem>> = stream::from_iter((0usize..).map(move |n| {
            let d2 = d.clone();
            stream::filter_map(d.elements(n), move |x| {
                (d2.supp(n, &x).len() == n).then(|| TraceElem::new(n, x))
            })
        }));
        stream::dovetail(outer)
    }

    pub fn in_trace(&self, n: usize, x: &Elem) -> Result<bool> {
        if !self.contains(n, x) {
            return Err(Error::NotMember(format!("{x} in {}({n})", self.label())));
        }
        Ok(self.supp(n, x).len() == n)
    }

    pub fn is_trace(&self, t: &TraceElem) -> bool {
        self.contains(t.arity, &t.elem) && self.supp(t.arity, &t.elem).len() == t.arity
    }

    /// Normal form `σ = D(en_a)(σ₀)`: the support and the trace kernel.
    pub fn normal_form(&self, n: usize, x: &Elem) -> (Vec<usize>, TraceElem) {
        let a = self.supp(n, x);
        let en = FinEmbedding::from_subset(&a, n);
        let k = self
            .preimage(&en, x)
            .unwrap_or_else(|| panic!("support condition fails for {x} in {}({n})", self.label()));
        (a.clone(), TraceElem::new(a.len(), k))
    }

    pub fn kernel(&self, n: usize, x: &Elem) -> TraceElem {
        self.normal_form(n, x).1
    }

    /// `D(n)` as a standalone order.
    pub fn value(&self, n: usize) -> Order {
        Arc::new(ValueOrder { d: self.clone(), n })
    }

    /// The first `budget` enumerated elements of `D(n)`.
    pub fn window(&self, n: usize, budget: usize) -> Vec<Elem> {
        stream::take(&mut self.elements(n), budget, step_cap(budget)).0
    }

    pub fn trace_window(&self, budget: usize) -> Vec<TraceElem> {
        stream::take(&mut self.trace(), budget, step_cap(budget) * 4).0
    }
}

impl fmt::Debug for Predilator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predilator({})", self.label())
    }
}

struct ValueOrder {
    d: Predilator,
    n: usize,
}

impl LinearOrder for ValueOrder {
    fn label(&self) -> String {
        format!("{}({})", self.d.label(), self.n)
    }
    fn contains(&self, x: &Elem) -> bool {
        self.d.contains(self.n, x)
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        self.d.compare(self.n, x, y)
    }
    fn enumerate(&self) -> Option<Stream> {
        Some(self.d.elements(self.n))
    }
}

/// Generates `D(n)` from a stream of trace elements: every element is
/// `D(e)(σ₀)` for exactly one kernel `(m, σ₀)` and embedding `e: m → n`.
pub fn elements_from_trace(d: Predilator, tr: Stream<TraceElem>, n: usize) -> Stream {
    stream::expand(tr, move |t| {
        all_embeddings(t.arity, n)
            .iter()
            .map(|e| d.act(e, &t.elem))
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: String,
    pub witness: String,
}

/// Outcome of a bounded law audit.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub subject: String,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn new(subject: impl Into<String>) -> Self {
        Report { subject: subject.into(), ..Default::default() }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records one check; a failing one becomes a violation.
    pub fn check(&mut self, ok: bool, clause: &str, witness: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(Violation { clause: clause.into(), witness: witness() });
        }
    }

    pub fn absorb(&mut self, other: Report) {
        self.checks += other.checks;
        for v in other.violations {
            self.violations.push(Violation {
                clause: format!("{}: {}", other.subject, v.clause),
                witness: v.witness,
            });
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} checks, {} violations",
            self.subject,
            self.checks,
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.clause, v.witness)?;
        }
        Ok(())
    }
}

/// Bounded audit of all finitary predilator laws over embeddings between
/// arities `≤ arity_bound` and the first `elem_budget` elements per arity.
pub fn check_predilator_laws(d: &Predilator, arity_bound: usize, elem_budget: usize) -> Report {
    let mut rep = Report::new(d.label());
    let windows: Vec<Vec<Elem>> = (0..=arity_bound).map(|n| d.window(n, elem_budget)).collect();

    for (n, w) in windows.iter().enumerate() {
        for bad in orders::audit_elements(|a, b| d.compare(n, a, b), |a| d.contains(n, a), w) {
            rep.check(false, "linearity", || format!("arity {n}: {bad}"));
        }
        rep.checks += w.len();
        for x in w {
            let s = d.supp(n, x);
            rep.check(
                s.windows(2).all(|p| p[0] < p[1]) && s.iter().all(|&i| i < n),
                "support is a subset",
                || format!("supp({n}, {x}) = {s:?}"),
            );
        }
    }

    for m in 0..=arity_bound {
        for k in m..=arity_bound {
            let fs = all_embeddings(m, k);
            for f in &fs {
                for x in &windows[m] {
                    let y = d.act(f, x);
                    rep.check(d.contains(k, &y), "action lands in D(k)", || {
                        format!("{f} applied to {x} gives {y}")
                    });
                    if f.is_identity() {
                        rep.check(d.0.act(f, x) == *x, "identity", || format!("{x}"));
                    }
                    let sx = d.supp(m, x);
                    let sy = d.supp(k, &y);
                    rep.check(sy == f.image(&sx), "support naturality", || {
                        format!("supp({y}) = {sy:?} but {f}[supp({x})] = {:?}", f.image(&sx))
                    });
                    let back = d.preimage(f, &y);
                    rep.check(back.as_ref() == Some(x), "range decider on images", || {
                        format!("preimage of {y} under {f} is {back:?}, expected {x}")
                    });
                    for l in k..=arity_bound {
                        for g in all_embeddings(k, l) {
                            let gf = compose(&g, f).expect("composable");
                            let lhs = d.act(&g, &y);
                            let rhs = d.act(&gf, x);
                            rep.check(lhs == rhs, "functoriality", || {
                                format!("D({g})(D({f})({x})) = {lhs} but D({gf})({x}) = {rhs}")
                            });
                        }
                    }
                }
                for (i, x) in windows[m].iter().enumerate() {
                    for x2 in &windows[m][i + 1..] {
                        let before = d.compare(m, x, x2);
                        let after = d.compare(k, &d.act(f, x), &d.act(f, x2));
                        rep.check(before == after, "order embedding", || {
                            format!("{x} vs {x2} under {f}: {before:?} became {after:?}")
                        });
                    }
                }
                for g in fs.iter().filter(|g| f.pointwise_le(g) && *g != f) {
                    for x in &windows[m] {
                        let (a, b) = (d.act(f, x), d.act(g, x));
                        rep.check(d.compare(k, &a, &b) != Ordering::Greater, "monotonicity", || {
                            format!("{f} ≤ {g} but D({f})({x}) = {a} > D({g})({x}) = {b}")
                        });
                    }
                }
                for y in &windows[k] {
                    let sy = d.supp(k, y);
                    let inside = sy.iter().all(|&v| f.in_range(v));
                    match d.preimage(f, y) {
                        Some(x) => {
                            rep.check(
                                inside && d.contains(m, &x) && d.act(f, &x) == *y,
                                "range decider soundness",
                                || format!("{y} claimed in rng {f} via {x}"),
                            );
                        }
                        None => rep.check(!inside, "support condition", || {
                            format!("supp({y}) = {sy:?} ⊆ rng {f} but {y} ∉ rng D({f})")
                        }),
                    }
                }
            }
        }
    }
    rep
}
