//! Morphisms of coded predilators, restrictions `D[A]`, factorization,
//! pullbacks and direct limits.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::finord::{all_embeddings, FinEmbedding};
use crate::predil::{elements_from_trace, empty_predilator, Predilator, PredilatorImpl, Report, TraceElem};
use crate::stream::{self, Stream};
use crate::Elem;

/// The data of a morphism `D ⇒ E`. `preimage` is the range decider: the
/// unique `σ` with `component(n, σ) = y`, if any.
pub trait MorphismImpl: Send + Sync {
    fn label(&self) -> String;
    fn source(&self) -> Predilator;
    fn target(&self) -> Predilator;
    fn component(&self, n: usize, x: &Elem) -> Elem;
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem>;
    /// Whether the morphism is a segment by construction rather than by
    /// observation on a window.
    fn segment_by_construction(&self) -> bool {
        false
    }
}

#[derive(Clone)]
pub struct Morphism(Arc<dyn MorphismImpl>);

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Morphism({})", self.label())
    }
}

impl Morphism {
    pub fn new(imp: impl MorphismImpl + 'static) -> Self {
        Morphism(Arc::new(imp))
    }

    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as *const () as usize
    }

    pub fn label(&self) -> String {
        self.0.label()
    }

    pub fn source(&self) -> Predilator {
        self.0.source()
    }

    pub fn target(&self) -> Predilator {
        self.0.target()
    }

    pub fn component(&self, n: usize, x: &Elem) -> Elem {
        self.0.component(n, x)
    }

    pub fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        self.0.preimage(n, y)
    }

    pub fn segment_by_construction(&self) -> bool {
        self.0.segment_by_construction()
    }

    pub fn in_range(&self, n: usize, y: &Elem) -> bool {
        self.preimage(n, y).is_some()
    }

    /// `Tr(μ)(n, σ) = (n, μ_n(σ))`.
    pub fn trace_map(&self, t: &TraceElem) -> Result<TraceElem> {
        if !self.source().is_trace(t) {
            return Err(Error::NotTrace(format!("{t} in {}", self.source().label())));
        }
        Ok(TraceElem::new(t.arity, self.component(t.arity, &t.elem)))
    }

    /// The trace element mapped onto `t`, if `t ∈ rng Tr(μ)`.
    pub fn trace_preimage(&self, t: &TraceElem) -> Option<TraceElem> {
        self.preimage(t.arity, &t.elem).map(|x| TraceElem::new(t.arity, x))
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Morphism) -> Morphism {
        compose(self, first)
    }
}

/// A morphism given by closures.
pub struct FnMorphism {
    pub label: String,
    pub source: Predilator,
    pub target: Predilator,
    pub component: Arc<dyn Fn(usize, &Elem) -> Elem + Send + Sync>,
    pub preimage: Arc<dyn Fn(usize, &Elem) -> Option<Elem> + Send + Sync>,
}

impl MorphismImpl for FnMorphism {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn source(&self) -> Predilator {
        self.source.clone()
    }
    fn target(&self) -> Predilator {
        self.target.clone()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        (self.component)(n, x)
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        (self.preimage)(n, y)
    }
}

pub fn identity(d: &Predilator) -> Morphism {
    Morphism::new(FnMorphism {
        label: format!("id[{}]", d.label()),
        source: d.clone(),
        target: d.clone(),
        component: Arc::new(|_, x| x.clone()),
        preimage: {
            let d = d.clone();
            Arc::new(move |n, y| d.contains(n, y).then(|| y.clone()))
        },
    })
}

/// The unique morphism out of an empty predilator.
pub fn empty_morphism(source: &Predilator, target: &Predilator) -> Morphism {
    as_segment(Morphism::new(FnMorphism {
        label: format!("∅⇒{}", target.label()),
        source: source.clone(),
        target: target.clone(),
        component: Arc::new(|n, x| panic!("{x} in an empty predilator at arity {n}")),
        preimage: Arc::new(|_, _| None),
    }))
}

/// The empty morphism from the constant predilator 0.
pub fn from_empty(target: &Predilator) -> Morphism {
    empty_morphism(&empty_predilator(), target)
}

struct Compose(Morphism, Morphism);

impl MorphismImpl for Compose {
    fn label(&self) -> String {
        format!("{}∘{}", self.0.label(), self.1.label())
    }
    fn source(&self) -> Predilator {
        self.1.source()
    }
    fn target(&self) -> Predilator {
        self.0.target()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        self.0.component(n, &self.1.component(n, x))
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        self.1.preimage(n, &self.0.preimage(n, y)?)
    }
    fn segment_by_construction(&self) -> bool {
        self.0.segment_by_construction() && self.1.segment_by_construction()
    }
}

/// Marks a morphism whose range is known to be downward closed.
struct Segment(Morphism);

impl MorphismImpl for Segment {
    fn label(&self) -> String {
        self.0.label()
    }
    fn source(&self) -> Predilator {
        self.0.source()
    }
    fn target(&self) -> Predilator {
        self.0.target()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        self.0.component(n, x)
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        self.0.preimage(n, y)
    }
    fn segment_by_construction(&self) -> bool {
        true
    }
}

/// Wraps `mu` so that it reports itself as a segment by construction.
pub fn as_segment(mu: Morphism) -> Morphism {
    Morphism::new(Segment(mu))
}

/// `g ∘ f`.
pub fn compose(g: &Morphism, f: &Morphism) -> Morphism {
    Morphism::new(Compose(g.clone(), f.clone()))
}

/// Bounded audit: components are order embeddings into the target, natural,
/// support preserving, and the range decider is sound on both windows.
pub fn check_morphism(mu: &Morphism, arity_bound: usize, elem_budget: usize) -> Report {
    let (d, e) = (mu.source(), mu.target());
    let mut rep = Report::new(mu.label());
    let src: Vec<Vec<Elem>> = (0..=arity_bound).map(|n| d.window(n, elem_budget)).collect();
    for (n, w) in src.iter().enumerate() {
        let imgs: Vec<Elem> = w.iter().map(|x| mu.component(n, x)).collect();
        for (x, y) in w.iter().zip(&imgs) {
            rep.check(e.contains(n, y), "component lands in target", || {
                format!("arity {n}: {x} ↦ {y}")
            });
            let (sx, sy) = (d.supp(n, x), e.supp(n, y));
            rep.check(sx == sy, "support preservation", || {
                format!("supp({x}) = {sx:?} but supp({y}) = {sy:?}")
            });
            let back = mu.preimage(n, y);
            rep.check(back.as_ref() == Some(x), "range decider on images", || {
                format!("preimage of {y} is {back:?}, expected {x}")
            });
        }
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                let (a, b) = (d.compare(n, &w[i], &w[j]), e.compare(n, &imgs[i], &imgs[j]));
                rep.check(a == b, "order embedding", || {
                    format!("{} vs {}: {a:?} became {b:?}", w[i], w[j])
                });
            }
        }
        for y in e.window(n, elem_budget) {
            if let Some(x) = mu.preimage(n, &y) {
                rep.check(
                    d.contains(n, &x) && mu.component(n, &x) == y,
                    "range decider soundness",
                    || format!("{y} claimed as the image of {x}"),
                );
            }
        }
    }
    for m in 0..=arity_bound {
        for k in m..=arity_bound {
            for f in all_embeddings(m, k) {
                for x in &src[m] {
                    let lhs = mu.component(k, &d.act(&f, x));
                    let rhs = e.act(&f, &mu.component(m, x));
                    rep.check(lhs == rhs, "naturality", || {
                        format!("μ(D({f})({x})) = {lhs} but E({f})(μ({x})) = {rhs}")
                    });
                }
            }
        }
    }
    rep
}

/// A decidable set of trace elements, optionally with its finite listing.
#[derive(Clone)]
pub struct TraceSet {
    label: String,
    member: Arc<dyn Fn(&TraceElem) -> bool + Send + Sync>,
    listing: Option<Vec<TraceElem>>,
}

impl TraceSet {
    pub fn new(label: impl Into<String>, member: impl Fn(&TraceElem) -> bool + Send + Sync + 'static) -> Self {
        TraceSet { label: label.into(), member: Arc::new(member), listing: None }
    }

    pub fn finite(elems: Vec<TraceElem>) -> Self {
        let label = format!(
            "{{{}}}",
            elems.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
        );
        let set = elems.clone();
        TraceSet { label, member: Arc::new(move |t| set.contains(t)), listing: Some(elems) }
    }

    pub fn full() -> Self {
        TraceSet::new("Tr", |_| true)
    }

    pub fn empty() -> Self {
        TraceSet::finite(vec![])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn contains(&self, t: &TraceElem) -> bool {
        (self.member)(t)
    }

    pub fn listing(&self) -> Option<&[TraceElem]> {
        self.listing.as_deref()
    }

    pub fn intersect(&self, other: &TraceSet) -> TraceSet {
        let (a, b) = (self.clone(), other.clone());
        let listing = self
            .listing
            .as_ref()
            .map(|l| l.iter().filter(|t| other.contains(t)).cloned().collect());
        TraceSet {
            label: format!("{}∩{}", self.label, other.label),
            member: Arc::new(move |t| a.contains(t) && b.contains(t)),
            listing,
        }
    }
}

struct Restricted {
    d: Predilator,
    a: TraceSet,
}

impl PredilatorImpl for Restricted {
    fn label(&self) -> String {
        format!("{}[{}]", self.d.label(), self.a.label)
    }
    fn contains(&self, n: usize, x: &Elem) -> bool {
        self.d.contains(n, x) && self.a.contains(&self.d.kernel(n, x))
    }
    fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering {
        self.d.compare(n, x, y)
    }
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        self.d.act(f, x)
    }
    fn supp(&self, n: usize, x: &Elem) -> Vec<usize> {
        self.d.supp(n, x)
    }
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        self.d.preimage(f, y)
    }
    fn elements(&self, n: usize) -> Stream {
        match &self.a.listing {
            Some(l) => {
                let d = self.d.clone();
                let tr: Vec<TraceElem> = l.iter().filter(|t| d.is_trace(t)).cloned().collect();
                elements_from_trace(d, stream::from_iter(tr), n)
            }
            None => {
                let (d, a) = (self.d.clone(), self.a.clone());
                stream::filter(self.d.elements(n), move |x| a.contains(&d.kernel(n, x)))
            }
        }
    }
    fn trace(&self) -> Option<Stream<TraceElem>> {
        Some(match &self.a.listing {
            Some(l) => {
                let tr: Vec<TraceElem> = l.iter().filter(|t| self.d.is_trace(t)).cloned().collect();
                stream::from_iter(tr)
            }
            None => {
                let a = self.a.clone();
                stream::filter(self.d.trace(), move |t| a.contains(t))
            }
        })
    }
}

/// `D[A]`: the elements whose normal-form kernel lies in `A`.
pub fn restrict_to(d: &Predilator, a: &TraceSet) -> Predilator {
    Predilator::new(Restricted { d: d.clone(), a: a.clone() })
}

/// `ι[A]: D[A] ⇒ D`, together with its source.
pub fn inclusion(d: &Predilator, a: &TraceSet) -> Morphism {
    let sub = restrict_to(d, a);
    inclusion_of(&sub, d, &format!("ι[{}]", a.label))
}

/// The inclusion of a restriction `sub = D[A]` into `D`.
pub fn inclusion_of(sub: &Predilator, d: &Predilator, label: &str) -> Morphism {
    let s = sub.clone();
    Morphism::new(FnMorphism {
        label: label.to_string(),
        source: sub.clone(),
        target: d.clone(),
        component: Arc::new(|_, x| x.clone()),
        preimage: Arc::new(move |n, y| s.contains(n, y).then(|| y.clone())),
    })
}

/// Trace elements scanned when checking range inclusions and direct limits.
pub const TRACE_WINDOW: usize = 32;

struct Factor {
    mu: Morphism,
    mu2: Morphism,
    memo: Mutex<HashMap<TraceElem, Elem>>,
}

impl Factor {
    fn kernel_image(&self, t: &TraceElem) -> Elem {
        if let Some(v) = self.memo.lock().unwrap().get(t) {
            return v.clone();
        }
        let y = self.mu.component(t.arity, &t.elem);
        let v = self.mu2.preimage(t.arity, &y).unwrap_or_else(|| {
            panic!("{}", Error::RangeInclusion(format!("{t} ↦ {y} ∉ rng {}", self.mu2.label())))
        });
        self.memo.lock().unwrap().insert(t.clone(), v.clone());
        v
    }
}

impl MorphismImpl for Factor {
    fn label(&self) -> String {
        format!("{}\\{}", self.mu.label(), self.mu2.label())
    }
    fn source(&self) -> Predilator {
        self.mu.source()
    }
    fn target(&self) -> Predilator {
        self.mu2.source()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        let d = self.mu.source();
        let (a, k) = d.normal_form(n, x);
        let t0 = self.kernel_image(&k);
        self.mu2.source().act(&FinEmbedding::from_subset(&a, n), &t0)
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        self.mu.preimage(n, &self.mu2.component(n, y))
    }
}

/// The unique `ν` with `μ′ ∘ ν = μ`, given `rng μ ⊆ rng μ′`. The inclusion is
/// checked on a window of the source trace; kernels met later are checked
/// when first used.
pub fn factor(mu: &Morphism, mu2: &Morphism) -> Result<Morphism> {
    for t in mu.source().trace_window(TRACE_WINDOW) {
        let y = mu.component(t.arity, &t.elem);
        if !mu2.in_range(t.arity, &y) {
            return Err(Error::RangeInclusion(format!(
                "{t} ↦ {y} is not in the range of {}",
                mu2.label()
            )));
        }
    }
    Ok(Morphism::new(Factor { mu: mu.clone(), mu2: mu2.clone(), memo: Mutex::new(HashMap::new()) }))
}

pub struct Pullback {
    pub set: TraceSet,
    pub apex: Predilator,
    pub xi0: Morphism,
    pub xi1: Morphism,
}

/// The pullback of `μ⁰: E₀ ⇒ E` and `μ¹: E₁ ⇒ E`, with apex `E[A]` for
/// `A = rng μ⁰ ∩ rng μ¹`.
pub fn pullback(mu0: &Morphism, mu1: &Morphism) -> Result<Pullback> {
    let e = mu0.target();
    let (m0, m1) = (mu0.clone(), mu1.clone());
    let set = TraceSet::new(format!("rng {}∩rng {}", mu0.label(), mu1.label()), move |t| {
        m0.in_range(t.arity, &t.elem) && m1.in_range(t.arity, &t.elem)
    });
    let apex = restrict_to(&e, &set);
    let iota = inclusion_of(&apex, &e, &format!("ι[{}]", set.label()));
    let xi0 = factor(&iota, mu0)?;
    let xi1 = factor(&iota, mu1)?;
    Ok(Pullback { set, apex, xi0, xi1 })
}

type Legs = Arc<dyn Fn(usize) -> Morphism + Send + Sync>;
type Transitions = Arc<dyn Fn(usize, usize) -> Option<Morphism> + Send + Sync>;

/// A directed system indexed by naturals, presented through its cocone
/// `νⁱ: Dᵢ ⇒ apex`. `transition(i, j)` is `μ^{ij}` when `i ≤ j` in the
/// directed order, which need not be the order of naturals.
#[derive(Clone)]
pub struct DirectSystem {
    pub label: String,
    pub apex: Predilator,
    /// Number of indices, if finite.
    pub count: Option<usize>,
    legs: Legs,
    transitions: Option<Transitions>,
    memo: Arc<Mutex<HashMap<usize, Morphism>>>,
}

impl DirectSystem {
    pub fn new(
        label: impl Into<String>,
        apex: Predilator,
        count: Option<usize>,
        legs: impl Fn(usize) -> Morphism + Send + Sync + 'static,
    ) -> Self {
        DirectSystem {
            label: label.into(),
            apex,
            count,
            legs: Arc::new(legs),
            transitions: None,
            memo: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn with_transitions(
        mut self,
        t: impl Fn(usize, usize) -> Option<Morphism> + Send + Sync + 'static,
    ) -> Self {
        self.transitions = Some(Arc::new(t));
        self
    }

    pub fn leg(&self, i: usize) -> Morphism {
        if let Some(m) = self.memo.lock().unwrap().get(&i) {
            return m.clone();
        }
        let m = (self.legs)(i);
        self.memo.lock().unwrap().insert(i, m.clone());
        m
    }

    pub fn transition(&self, i: usize, j: usize) -> Option<Morphism> {
        self.transitions.as_ref().and_then(|t| t(i, j))
    }

    /// The indices searched for preimages.
    pub fn indices(&self, window: usize) -> std::ops::Range<usize> {
        0..self.count.map_or(window, |c| c.min(window))
    }

    /// The first index whose leg has `t` in its range, with the preimage.
    pub fn locate(&self, t: &TraceElem, window: usize) -> Option<(usize, Elem)> {
        self.indices(window)
            .find_map(|i| self.leg(i).preimage(t.arity, &t.elem).map(|x| (i, x)))
    }
}

/// Indices searched by [`check_direct_limit`] and [`mediate`].
pub const INDEX_WINDOW: usize = 64;

#[derive(Clone, Debug)]
pub struct LimitReport {
    pub holds: bool,
    /// Trace elements of the apex outside every leg's range.
    pub uncovered: Vec<TraceElem>,
    pub compatibility: Report,
}

/// Checks that the legs are compatible with the transitions and that every
/// apex trace element in the window lies in the range of some leg.
pub fn check_direct_limit(sys: &DirectSystem, trace_window: usize) -> LimitReport {
    let mut compat = Report::new(format!("{} cocone", sys.label));
    let small = sys.indices(6);
    for i in small.clone() {
        for j in small.clone() {
            let Some(mu) = sys.transition(i, j) else { continue };
            let (vi, vj) = (sys.leg(i), sys.leg(j));
            for n in 0..=2 {
                for x in mu.source().window(n, 8) {
                    let (a, b) = (vj.component(n, &mu.component(n, &x)), vi.component(n, &x));
                    compat.check(a == b, "cocone compatibility", || {
                        format!("ν{j}∘μ{i}{j} and ν{i} differ at {x}: {a} vs {b}")
                    });
                }
            }
        }
    }
    let uncovered: Vec<TraceElem> = sys
        .apex
        .trace_window(trace_window)
        .into_iter()
        .filter(|t| sys.locate(t, INDEX_WINDOW).is_none())
        .collect();
    LimitReport { holds: uncovered.is_empty() && compat.is_clean(), uncovered, compatibility: compat }
}

struct Mediate {
    sys: DirectSystem,
    target: DirectSystem,
    memo: Mutex<HashMap<TraceElem, Elem>>,
}

impl Mediate {
    fn kernel_image(&self, t: &TraceElem) -> Elem {
        if let Some(v) = self.memo.lock().unwrap().get(t) {
            return v.clone();
        }
        let (i, pre) = self
            .sys
            .locate(t, INDEX_WINDOW)
            .unwrap_or_else(|| panic!("{}", Error::NoIndex(format!("{t} in {}", self.sys.label))));
        let v = self.target.leg(i).component(t.arity, &pre);
        self.memo.lock().unwrap().insert(t.clone(), v.clone());
        v
    }
}

impl MorphismImpl for Mediate {
    fn label(&self) -> String {
        format!("⟨{}→{}⟩", self.sys.label, self.target.label)
    }
    fn source(&self) -> Predilator {
        self.sys.apex.clone()
    }
    fn target(&self) -> Predilator {
        self.target.apex.clone()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        let (a, k) = self.sys.apex.normal_form(n, x);
        let img = self.kernel_image(&k);
        self.target.apex.act(&FinEmbedding::from_subset(&a, n), &img)
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        let e = &self.target.apex;
        if !e.contains(n, y) {
            return None;
        }
        let (a, k) = e.normal_form(n, y);
        let (i, pre) = self.target.locate(&k, INDEX_WINDOW)?;
        let x0 = self.sys.leg(i).component(k.arity, &pre);
        Some(self.sys.apex.act(&FinEmbedding::from_subset(&a, n), &x0))
    }
}

/// `ζ: D ⇒ E` with `ζ ∘ νⁱ = ξⁱ`, where `sys` is a limit cocone into `D` and
/// `target` has the same index set with legs `ξⁱ` into `E`. Indices are
/// searched in the window [`INDEX_WINDOW`]; the limit property is checked
/// on the first `trace_window` trace elements of `D`.
pub fn mediate(sys: &DirectSystem, target: &DirectSystem, trace_window: usize) -> Result<Morphism> {
    for t in sys.apex.trace_window(trace_window) {
        if sys.locate(&t, INDEX_WINDOW).is_none() {
            return Err(Error::NoIndex(format!("{t} in {}", sys.label)));
        }
    }
    Ok(Morphism::new(Mediate {
        sys: sys.clone(),
        target: target.clone(),
        memo: Mutex::new(HashMap::new()),
    }))
}

/// The canonical system `{D[a] | a ⊆ first trace elements}`, over the
/// first `size` trace elements. Indices list the subsets by size, so that
/// all singletons come early in any index window.
pub fn support_system(d: &Predilator, size: usize) -> DirectSystem {
    let tr = d.trace_window(size);
    let mut masks: Vec<u64> = (0..1u64 << tr.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let masks = Arc::new(masks);
    let subset = {
        let masks = masks.clone();
        move |i: usize| -> Vec<TraceElem> {
            let m = masks[i];
            tr.iter().enumerate().filter(|(b, _)| m >> b & 1 == 1).map(|(_, t)| t.clone()).collect()
        }
    };
    let (d2, s2, apex) = (d.clone(), subset.clone(), d.clone());
    DirectSystem::new(format!("{{{}[a]}}", d.label()), d.clone(), Some(masks.len()), move |i| {
        inclusion(&d2, &TraceSet::finite(s2(i)))
    })
    .with_transitions(move |i, j| {
        (masks[i] & !masks[j] == 0).then(|| {
            let (a, b) = (TraceSet::finite(subset(i)), TraceSet::finite(subset(j)));
            factor(&inclusion(&apex, &a), &inclusion(&apex, &b)).expect("a ⊆ b")
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::finite;
    use crate::predil::{check_predilator_laws, constant_predilator, omega_dilator};

    fn te(n: usize, v: &[u64]) -> TraceElem {
        TraceElem::new(n, Elem::nats(v))
    }

    #[test]
    fn identity_and_inclusions_audit_clean() {
        let d = omega_dilator();
        assert!(check_morphism(&identity(&d), 3, 30).is_clean());
        let a = TraceSet::finite(vec![te(0, &[]), te(1, &[0]), te(2, &[1, 0])]);
        let r = check_morphism(&inclusion(&d, &a), 3, 30);
        assert!(r.is_clean(), "{r}");
        assert!(check_predilator_laws(&restrict_to(&d, &a), 3, 30).is_clean());
    }

    #[test]
    fn restriction_example() {
        let d = omega_dilator();
        let a = TraceSet::finite(vec![te(0, &[]), te(1, &[0])]);
        let r = restrict_to(&d, &a);
        let (mut got, done) = stream::take(&mut r.elements(2), 10, 1000);
        assert!(done);
        got.sort_by(|x, y| d.compare(2, x, y));
        assert_eq!(got, vec![Elem::nats(&[]), Elem::nats(&[0]), Elem::nats(&[1])]);
        assert!(!r.contains(2, &Elem::nats(&[1, 0])));
        let iota = inclusion(&d, &a);
        let rng: Vec<TraceElem> = d
            .trace_window(30)
            .into_iter()
            .filter(|t| iota.trace_preimage(t).is_some())
            .collect();
        assert_eq!(rng, vec![te(0, &[]), te(1, &[0])]);
        let none = restrict_to(&d, &TraceSet::empty());
        assert!(none.window(2, 10).is_empty());
    }

    #[test]
    fn corrupted_component_breaks_naturality() {
        let d = omega_dilator();
        let bad = Morphism::new(FnMorphism {
            label: "bad".into(),
            source: d.clone(),
            target: d.clone(),
            component: Arc::new(|n, x| {
                if n == 2 && *x == Elem::nats(&[0]) {
                    Elem::nats(&[1])
                } else if n == 2 && *x == Elem::nats(&[1]) {
                    Elem::nats(&[0])
                } else {
                    x.clone()
                }
            }),
            preimage: Arc::new(|_, y| Some(y.clone())),
        });
        let r = check_morphism(&bad, 2, 20);
        assert!(r.violations.iter().any(|v| v.clause == "naturality"), "{r}");
    }

    #[test]
    fn factor_of_inclusions() {
        let d = omega_dilator();
        let small = TraceSet::finite(vec![te(1, &[0])]);
        let big = TraceSet::finite(vec![te(0, &[]), te(1, &[0])]);
        let nu = factor(&inclusion(&d, &small), &inclusion(&d, &big)).unwrap();
        assert!(check_morphism(&nu, 3, 20).is_clean());
        for x in nu.source().window(2, 10) {
            assert_eq!(nu.component(2, &x), x);
        }
        let err = factor(&inclusion(&d, &big), &inclusion(&d, &small)).unwrap_err();
        assert!(matches!(err, Error::RangeInclusion(w) if w.contains("(0,⟨⟩)")));
        let mu = inclusion(&d, &big);
        let same = factor(&mu, &identity(&d)).unwrap();
        for x in mu.source().window(2, 10) {
            assert_eq!(same.component(2, &x), mu.component(2, &x));
        }
    }

    #[test]
    fn pullback_of_inclusions() {
        let d = omega_dilator();
        let a = TraceSet::finite(vec![te(0, &[]), te(1, &[0])]);
        let b = TraceSet::finite(vec![te(1, &[0]), te(2, &[1, 0])]);
        let pb = pullback(&inclusion(&d, &a), &inclusion(&d, &b)).unwrap();
        let tr = pb.apex.trace_window(20);
        assert_eq!(tr, vec![te(1, &[0])]);
        assert!(check_morphism(&pb.xi0, 2, 10).is_clean());
        let disjoint = pullback(
            &inclusion(&d, &TraceSet::finite(vec![te(0, &[])])),
            &inclusion(&d, &TraceSet::finite(vec![te(1, &[0])])),
        )
        .unwrap();
        assert!(disjoint.apex.trace_window(20).is_empty());
        let id = identity(&d);
        let same = pullback(&id, &id).unwrap();
        assert_eq!(same.apex.trace_window(10), d.trace_window(10));
    }

    #[test]
    fn canonical_systems_are_limits() {
        for d in [omega_dilator(), constant_predilator(finite(2))] {
            let sys = support_system(&d, 10);
            let r = check_direct_limit(&sys, 10);
            assert!(r.holds, "{:?}", r.uncovered);
            let z = mediate(&sys, &sys, 10).unwrap();
            let covered = d.trace_window(10);
            for x in d.window(2, 15).into_iter().filter(|x| covered.contains(&d.kernel(2, x))) {
                assert_eq!(z.component(2, &x), x);
            }
        }
        let d = omega_dilator();
        let single = DirectSystem::new("single", d.clone(), Some(1), move |_| identity(&d));
        assert!(check_direct_limit(&single, 10).holds);
    }
}
