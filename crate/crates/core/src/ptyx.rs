//! 2-preptykes: endofunctors of predilators with trace-level supports.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::finord::{all_embeddings, FinEmbedding};
use crate::morph::{as_segment, check_morphism, compose, identity, inclusion, DirectSystem, LimitReport};
use crate::morph::{check_direct_limit, FnMorphism, Morphism, MorphismImpl, TraceSet};
use crate::orders::Order;
use crate::predil::{check_predilator_laws, Predilator, PredilatorImpl, Report, TraceElem};
use crate::segll::trace_cmp;
use crate::stream::{self, Stream};
use crate::Elem;

/// The data of a preptyx. `apply_mor` receives the (memoized) values of the
/// preptyx at the source and target of `nu`.
pub trait PreptyxImpl: Send + Sync {
    fn label(&self) -> String;
    fn apply_obj(&self, d: &Predilator) -> Predilator;
    fn apply_mor(&self, nu: &Morphism, source: Predilator, target: Predilator) -> Morphism;
    /// `Supp_{D,n}(σ)` for `σ ∈ P(D)(n)`, in any order.
    fn supp_elem(&self, d: &Predilator, n: usize, x: &Elem) -> Vec<TraceElem>;
    /// Segments are sent to segments whatever the window, by construction.
    fn normal(&self) -> bool {
        false
    }
    /// Every `P(ν)` is onto, as for constant preptykes.
    fn onto(&self) -> bool {
        false
    }
}

type ObjMemo = Mutex<HashMap<usize, (Predilator, Predilator)>>;
type MorMemo = Mutex<HashMap<usize, (Morphism, Morphism)>>;

struct Inner {
    imp: Box<dyn PreptyxImpl>,
    objs: ObjMemo,
    mors: MorMemo,
    star: OnceLock<Preptyx>,
}

/// Shared handle to a preptyx. Values are memoized per argument handle; the
/// memo keeps the argument alive so handles are never reused.
#[derive(Clone)]
pub struct Preptyx(Arc<Inner>);

impl fmt::Debug for Preptyx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Preptyx({})", self.label())
    }
}

impl Preptyx {
    pub fn new(imp: impl PreptyxImpl + 'static) -> Self {
        Preptyx(Arc::new(Inner {
            imp: Box::new(imp),
            objs: Mutex::new(HashMap::new()),
            mors: Mutex::new(HashMap::new()),
            star: OnceLock::new(),
        }))
    }

    pub fn label(&self) -> String {
        self.0.imp.label()
    }

    pub fn apply_obj(&self, d: &Predilator) -> Predilator {
        if let Some((_, v)) = self.0.objs.lock().unwrap().get(&d.id()) {
            return v.clone();
        }
        let v = self.0.imp.apply_obj(d);
        let mut memo = self.0.objs.lock().unwrap();
        memo.entry(d.id()).or_insert_with(|| (d.clone(), v)).1.clone()
    }

    pub fn apply_mor(&self, nu: &Morphism) -> Morphism {
        if let Some((_, v)) = self.0.mors.lock().unwrap().get(&nu.id()) {
            return v.clone();
        }
        let (s, t) = (self.apply_obj(&nu.source()), self.apply_obj(&nu.target()));
        let v = self.0.imp.apply_mor(nu, s, t);
        let mut memo = self.0.mors.lock().unwrap();
        memo.entry(nu.id()).or_insert_with(|| (nu.clone(), v)).1.clone()
    }

    /// `Supp_{D,n}(σ)`, sorted by the trace order of `D` and deduplicated.
    pub fn supp_elem(&self, d: &Predilator, n: usize, x: &Elem) -> Vec<TraceElem> {
        let mut s = self.0.imp.supp_elem(d, n, x);
        s.sort_by(|a, b| trace_cmp(d, a, b));
        s.dedup();
        s
    }

    /// `Supp_D(n, σ)` on trace elements of `P(D)`.
    pub fn supp_trace(&self, d: &Predilator, t: &TraceElem) -> Vec<TraceElem> {
        self.supp_elem(d, t.arity, &t.elem)
    }

    pub fn normal_by_construction(&self) -> bool {
        self.0.imp.normal()
    }

    pub fn onto_by_construction(&self) -> bool {
        self.0.imp.onto()
    }

    /// The normalization `P*`, built once per preptyx.
    pub fn star(&self) -> Preptyx {
        self.0.star.get_or_init(|| crate::star::build(self)).clone()
    }
}

// D + 1

struct PlusOne(Predilator);

impl PredilatorImpl for PlusOne {
    fn label(&self) -> String {
        format!("{}+1", self.0.label())
    }
    fn contains(&self, n: usize, x: &Elem) -> bool {
        match x {
            Elem::Top => true,
            Elem::Old(y) => self.0.contains(n, y),
            _ => false,
        }
    }
    fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering {
        match (x, y) {
            (Elem::Old(a), Elem::Old(b)) => self.0.compare(n, a, b),
            _ => x.is_top().cmp(&y.is_top()),
        }
    }
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        match x {
            Elem::Old(y) => Elem::old(self.0.act(f, y)),
            _ => Elem::Top,
        }
    }
    fn supp(&self, n: usize, x: &Elem) -> Vec<usize> {
        x.as_old().map_or_else(Vec::new, |y| self.0.supp(n, y))
    }
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        match y {
            Elem::Top => Some(Elem::Top),
            Elem::Old(z) => self.0.preimage(f, z).map(Elem::old),
            _ => None,
        }
    }
    fn elements(&self, n: usize) -> Stream {
        stream::chain(stream::from_iter([Elem::Top]), stream::map(self.0.elements(n), Elem::old))
    }
    fn trace(&self) -> Option<Stream<TraceElem>> {
        let old = stream::map(self.0.trace(), |t| TraceElem::new(t.arity, Elem::old(t.elem)));
        Some(stream::chain(stream::from_iter([TraceElem::new(0, Elem::Top)]), old))
    }
}

struct PlusOneMor {
    nu: Morphism,
    source: Predilator,
    target: Predilator,
}

impl MorphismImpl for PlusOneMor {
    fn label(&self) -> String {
        format!("{}+1", self.nu.label())
    }
    fn source(&self) -> Predilator {
        self.source.clone()
    }
    fn target(&self) -> Predilator {
        self.target.clone()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        match x {
            Elem::Old(y) => Elem::old(self.nu.component(n, y)),
            _ => Elem::Top,
        }
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        match y {
            Elem::Top => Some(Elem::Top),
            Elem::Old(z) => self.nu.preimage(n, z).map(Elem::old),
            _ => None,
        }
    }
}

struct Succ;

impl PreptyxImpl for Succ {
    fn label(&self) -> String {
        "succ".into()
    }
    fn apply_obj(&self, d: &Predilator) -> Predilator {
        Predilator::new(PlusOne(d.clone()))
    }
    fn apply_mor(&self, nu: &Morphism, source: Predilator, target: Predilator) -> Morphism {
        Morphism::new(PlusOneMor { nu: nu.clone(), source, target })
    }
    fn supp_elem(&self, d: &Predilator, n: usize, x: &Elem) -> Vec<TraceElem> {
        x.as_old().map_or_else(Vec::new, |y| vec![d.kernel(n, y)])
    }
}

/// The preptyx `D ↦ D+1`, shared so that its memo tables are too.
pub fn succ_ptyx() -> Preptyx {
    static SUCC: OnceLock<Preptyx> = OnceLock::new();
    SUCC.get_or_init(|| Preptyx::new(Succ)).clone()
}

/// `D + 1`.
pub fn plus_one(d: &Predilator) -> Predilator {
    succ_ptyx().apply_obj(d)
}

/// `ν + 1`.
pub fn plus_one_mor(nu: &Morphism) -> Morphism {
    succ_ptyx().apply_mor(nu)
}

/// `π^D: D ⇒ D+1`, the inclusion below `⊤`.
pub fn pi(d: &Predilator) -> Morphism {
    as_segment(Morphism::new(FnMorphism {
        label: format!("π[{}]", d.label()),
        source: d.clone(),
        target: plus_one(d),
        component: Arc::new(|_, x| Elem::old(x.clone())),
        preimage: Arc::new(|_, y| y.as_old().cloned()),
    }))
}

struct Constant(Predilator);

impl PreptyxImpl for Constant {
    fn label(&self) -> String {
        format!("const:{}", self.0.label())
    }
    fn apply_obj(&self, _d: &Predilator) -> Predilator {
        self.0.clone()
    }
    fn apply_mor(&self, _nu: &Morphism, _source: Predilator, _target: Predilator) -> Morphism {
        as_segment(identity(&self.0))
    }
    fn supp_elem(&self, _d: &Predilator, _n: usize, _x: &Elem) -> Vec<TraceElem> {
        vec![]
    }
    fn normal(&self) -> bool {
        true
    }
    fn onto(&self) -> bool {
        true
    }
}

/// The constant preptyx with value `d0`.
pub fn constant_ptyx(d0: &Predilator) -> Preptyx {
    Preptyx::new(Constant(d0.clone()))
}

struct Identity;

impl PreptyxImpl for Identity {
    fn label(&self) -> String {
        "id".into()
    }
    fn apply_obj(&self, d: &Predilator) -> Predilator {
        d.clone()
    }
    fn apply_mor(&self, nu: &Morphism, _source: Predilator, _target: Predilator) -> Morphism {
        nu.clone()
    }
    fn supp_elem(&self, d: &Predilator, n: usize, x: &Elem) -> Vec<TraceElem> {
        vec![d.kernel(n, x)]
    }
    fn normal(&self) -> bool {
        true
    }
}

/// The identity preptyx.
pub fn identity_ptyx() -> Preptyx {
    Preptyx::new(Identity)
}

/// Fibers of a sum, indexed by members of the index order.
pub type PtyxFiber = Arc<dyn Fn(&Elem) -> Option<Preptyx> + Send + Sync>;

#[derive(Clone)]
struct Fibers {
    f: PtyxFiber,
    memo: Arc<Mutex<HashMap<Elem, Option<Preptyx>>>>,
}

impl Fibers {
    fn get(&self, z: &Elem) -> Option<Preptyx> {
        if let Some(p) = self.memo.lock().unwrap().get(z) {
            return p.clone();
        }
        let p = (self.f)(z);
        self.memo.lock().unwrap().entry(z.clone()).or_insert(p).clone()
    }
}

struct SumObj {
    index: Order,
    fibers: Fibers,
    arg: Predilator,
}

impl SumObj {
    fn fiber(&self, z: &Elem) -> Predilator {
        let p = self.fibers.get(z).unwrap_or_else(|| panic!("fiber undefined at {z}"));
        p.apply_obj(&self.arg)
    }
}

impl PredilatorImpl for SumObj {
    fn label(&self) -> String {
        format!("Σ_{{{}}}({})", self.index.label(), self.arg.label())
    }
    fn contains(&self, n: usize, x: &Elem) -> bool {
        let Some((z, s)) = x.as_pair() else { return false };
        self.index.contains(z)
            && self.fibers.get(z).is_some_and(|p| p.apply_obj(&self.arg).contains(n, s))
    }
    fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering {
        let ((z, s), (w, t)) = (x.as_pair().expect("sum element"), y.as_pair().expect("sum element"));
        self.index.compare(z, w).then_with(|| self.fiber(z).compare(n, s, t))
    }
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        let (z, s) = x.as_pair().expect("sum element");
        Elem::pair(z.clone(), self.fiber(z).act(f, s))
    }
    fn supp(&self, n: usize, x: &Elem) -> Vec<usize> {
        let (z, s) = x.as_pair().expect("sum element");
        self.fiber(z).supp(n, s)
    }
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        let (z, s) = y.as_pair()?;
        Some(Elem::pair(z.clone(), self.fiber(z).preimage(f, s)?))
    }
    fn elements(&self, n: usize) -> Stream {
        let idx = self.index.enumerate().unwrap_or_else(stream::empty);
        let (fibers, arg) = (self.fibers.clone(), self.arg.clone());
        let outer = stream::filter_map(idx, move |z| {
            let inner = fibers.get(&z)?.apply_obj(&arg).elements(n);
            Some(stream::map(inner, move |s| Elem::pair(z.clone(), s)))
        });
        stream::dovetail(outer)
    }
}

struct SumMor {
    fibers: Fibers,
    normal: bool,
    nu: Morphism,
    source: Predilator,
    target: Predilator,
}

impl MorphismImpl for SumMor {
    fn label(&self) -> String {
        format!("Σ({})", self.nu.label())
    }
    fn source(&self) -> Predilator {
        self.source.clone()
    }
    fn target(&self) -> Predilator {
        self.target.clone()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        let (z, s) = x.as_pair().expect("sum element");
        let p = self.fibers.get(z).expect("fiber defined");
        Elem::pair(z.clone(), p.apply_mor(&self.nu).component(n, s))
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        let (z, s) = y.as_pair()?;
        let p = self.fibers.get(z)?;
        Some(Elem::pair(z.clone(), p.apply_mor(&self.nu).preimage(n, s)?))
    }
    fn segment_by_construction(&self) -> bool {
        self.normal && self.nu.segment_by_construction()
    }
}

struct Sum {
    label: String,
    index: Order,
    fibers: Fibers,
}

impl PreptyxImpl for Sum {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn apply_obj(&self, d: &Predilator) -> Predilator {
        Predilator::new(SumObj { index: self.index.clone(), fibers: self.fibers.clone(), arg: d.clone() })
    }
    fn apply_mor(&self, nu: &Morphism, source: Predilator, target: Predilator) -> Morphism {
        let normal = self.normal();
        Morphism::new(SumMor { fibers: self.fibers.clone(), normal, nu: nu.clone(), source, target })
    }
    fn supp_elem(&self, d: &Predilator, n: usize, x: &Elem) -> Vec<TraceElem> {
        let (z, s) = x.as_pair().expect("sum element");
        self.fibers.get(z).expect("fiber defined").supp_elem(d, n, s)
    }
    /// A finite sum is normal when every fiber below the last is onto and
    /// the last one is normal.
    fn normal(&self) -> bool {
        let Some(k) = self.index.finite_size() else { return false };
        let Some(mut zs) = self.index.enumerate().map(|s| stream::take(&mut { s }, k, 4 * k + 8).0) else {
            return false;
        };
        zs.sort_by(|a, b| self.index.compare(a, b));
        let Some(last) = zs.pop() else { return true };
        zs.iter().all(|z| self.fibers.get(z).is_some_and(|p| p.onto_by_construction()))
            && self.fibers.get(&last).is_some_and(|p| p.normal_by_construction())
    }
}

/// A preptyx together with its fibers, for building injections.
#[derive(Clone)]
pub struct SumPtyx {
    pub ptyx: Preptyx,
    index: Order,
    fibers: Fibers,
}

impl SumPtyx {
    pub fn fiber(&self, z: &Elem) -> Option<Preptyx> {
        self.fibers.get(z)
    }

    pub fn index(&self) -> Order {
        self.index.clone()
    }

    /// The injection `P_z(E) ⇒ P(E)`.
    pub fn injection(&self, z: &Elem, e: &Predilator) -> Morphism {
        let p = self.fiber(z).unwrap_or_else(|| panic!("fiber undefined at {z}"));
        let (z1, z2) = (z.clone(), z.clone());
        Morphism::new(FnMorphism {
            label: format!("in[{z}]"),
            source: p.apply_obj(e),
            target: self.ptyx.apply_obj(e),
            component: Arc::new(move |_, x| Elem::pair(z1.clone(), x.clone())),
            preimage: Arc::new(move |_, y| y.as_pair().filter(|(w, _)| **w == z2).map(|(_, s)| s.clone())),
        })
    }
}

/// `Σ_{z∈Z} P_z`.
pub fn sum_ptyx(index: Order, fiber: impl Fn(&Elem) -> Option<Preptyx> + Send + Sync + 'static) -> SumPtyx {
    let label = format!("sum({})", index.label());
    labelled_sum(label, index, fiber)
}

fn labelled_sum(
    label: String,
    index: Order,
    fiber: impl Fn(&Elem) -> Option<Preptyx> + Send + Sync + 'static,
) -> SumPtyx {
    let fibers = Fibers { f: Arc::new(fiber), memo: Arc::new(Mutex::new(HashMap::new())) };
    let ptyx = Preptyx::new(Sum { label, index: index.clone(), fibers: fibers.clone() });
    SumPtyx { ptyx, index, fibers }
}

/// Sum over a finite index `0, …, k−1`.
pub fn sum_of(parts: Vec<Preptyx>) -> SumPtyx {
    let k = parts.len();
    let names: Vec<String> = parts.iter().map(|p| p.label()).collect();
    let label = format!("sum({})", names.join(", "));
    labelled_sum(label, crate::orders::finite(k), move |z| parts.get(z.as_nat()? as usize).cloned())
}

fn subset_of(a: &[TraceElem], nu: &Morphism) -> bool {
    a.iter().all(|t| nu.trace_preimage(t).is_some())
}

/// Bounded audit of the preptyx laws: values and images are lawful,
/// functoriality, naturality of supports in `D` and `X`, the support
/// condition, and minimality of supports against `P(ι[a])`.
pub fn check_preptyx_laws(
    p: &Preptyx,
    samples: &[Predilator],
    morphisms: &[Morphism],
    arity_bound: usize,
    elem_budget: usize,
) -> Report {
    let mut rep = Report::new(p.label());
    let small = elem_budget.min(12);
    for d in samples {
        let pd = p.apply_obj(d);
        rep.absorb(check_predilator_laws(&pd, arity_bound, elem_budget));
        let pid = p.apply_mor(&identity(d));
        for n in 0..=arity_bound {
            let win = pd.window(n, elem_budget);
            for x in &win {
                let y = pid.component(n, x);
                rep.check(&y == x, "P(id) = id", || format!("{x} ↦ {y} in arity {n}"));
                let s = p.supp_elem(d, n, x);
                rep.check(s.iter().all(|t| d.is_trace(t)), "supports are trace elements", || {
                    format!("{x}: {s:?}")
                });
                for k in n..=arity_bound {
                    for f in all_embeddings(n, k) {
                        let fx = pd.act(&f, x);
                        let sf = p.supp_elem(d, k, &fx);
                        rep.check(sf == s, "support naturality in X", || {
                            format!("{x} at {f:?}: {s:?} vs {sf:?}")
                        });
                    }
                }
            }
            // Supports are the least sets a with σ ∈ rng P(ι[a]).
            for x in win.iter().take(small / 2) {
                let s = p.supp_elem(d, n, x);
                let full = p.apply_mor(&inclusion(d, &TraceSet::finite(s.clone())));
                rep.check(full.in_range(n, x), "support condition at ι[Supp]", || {
                    format!("{x} ∉ rng P(ι[{s:?}])")
                });
                if s.len() <= 3 {
                    for i in 0..s.len() {
                        let mut a = s.clone();
                        a.remove(i);
                        let part = p.apply_mor(&inclusion(d, &TraceSet::finite(a)));
                        rep.check(!part.in_range(n, x), "support minimality", || {
                            format!("{x} ∈ rng P(ι[Supp ∖ {}])", s[i])
                        });
                    }
                }
            }
        }
    }
    for nu in morphisms {
        let (d, e) = (nu.source(), nu.target());
        let pnu = p.apply_mor(nu);
        rep.absorb(check_morphism(&pnu, arity_bound, elem_budget));
        for n in 0..=arity_bound {
            for x in p.apply_obj(&d).window(n, small) {
                let y = pnu.component(n, &x);
                let mut img: Vec<TraceElem> = p
                    .supp_elem(&d, n, &x)
                    .iter()
                    .filter_map(|t| nu.trace_map(t).ok())
                    .collect();
                img.sort_by(|a, b| trace_cmp(&e, a, b));
                let sy = p.supp_elem(&e, n, &y);
                rep.check(sy == img, "support naturality in D", || {
                    format!("{x} ↦ {y}: {img:?} vs {sy:?}")
                });
            }
            for y in p.apply_obj(&e).window(n, elem_budget) {
                let s = p.supp_elem(&e, n, &y);
                if subset_of(&s, nu) {
                    rep.check(pnu.in_range(n, &y), "support condition", || {
                        format!("Supp({y}) = {s:?} ⊆ rng {} but {y} ∉ rng", nu.label())
                    });
                }
            }
        }
    }
    for nu in morphisms {
        for mu in morphisms {
            if mu.source().id() != nu.target().id() {
                continue;
            }
            let (a, b) = (p.apply_mor(&compose(mu, nu)), compose(&p.apply_mor(mu), &p.apply_mor(nu)));
            for n in 0..=arity_bound {
                for x in p.apply_obj(&nu.source()).window(n, small) {
                    let (u, v) = (a.component(n, &x), b.component(n, &x));
                    rep.check(u == v, "P(μ∘ν) = P(μ)∘P(ν)", || format!("{x}: {u} vs {v}"));
                }
            }
        }
    }
    rep
}

/// Applies `P` to a cocone and re-checks the direct-limit condition.
pub fn check_preservation(p: &Preptyx, sys: &DirectSystem, trace_window: usize) -> LimitReport {
    let (p1, p2, s1, s2) = (p.clone(), p.clone(), sys.clone(), sys.clone());
    let mut image = DirectSystem::new(
        format!("{}({})", p.label(), sys.label),
        p.apply_obj(&sys.apex),
        sys.count,
        move |i| p1.apply_mor(&s1.leg(i)),
    );
    image = image.with_transitions(move |i, j| s2.transition(i, j).map(|m| p2.apply_mor(&m)));
    check_direct_limit(&image, trace_window)
}

/// Pullback condition for `P` on `μ⁰, μ¹`: any element in the range of both
/// `P(μ⁰)` and `P(μ¹)` lies in the range of `P` of the pullback composite.
pub fn check_pullback_preservation(p: &Preptyx, mu0: &Morphism, mu1: &Morphism, arity_bound: usize, budget: usize) -> Report {
    let mut rep = Report::new(format!("{} pullback", p.label()));
    let pb = match crate::morph::pullback(mu0, mu1) {
        Ok(pb) => pb,
        Err(e) => {
            rep.check(false, "pullback exists", || e.to_string());
            return rep;
        }
    };
    let apex = compose(mu0, &pb.xi0);
    let (a, b, c) = (p.apply_mor(mu0), p.apply_mor(mu1), p.apply_mor(&apex));
    for n in 0..=arity_bound {
        for y in p.apply_obj(&mu0.target()).window(n, budget) {
            if a.in_range(n, &y) && b.in_range(n, &y) {
                rep.check(c.in_range(n, &y), "pullback preservation", || format!("{y} in arity {n}"));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morph::{empty_morphism, support_system};
    use crate::orders::{audit_linearity, finite, probe_descent};
    use crate::predil::{constant_predilator, empty_predilator, omega_dilator};
    use crate::segll::is_segment;

    fn const1() -> Predilator {
        constant_predilator(finite(1))
    }

    #[test]
    fn succ_values() {
        let s = succ_ptyx();
        let d = s.apply_obj(&empty_predilator());
        assert_eq!(d.window(0, 10), vec![Elem::Top]);
        assert_eq!(d.trace_window(10), vec![TraceElem::new(0, Elem::Top)]);
        assert!(Arc::ptr_eq(&s.0, &succ_ptyx().0));
        assert_eq!(s.apply_obj(&empty_predilator()).label(), "const:fin:0+1");
    }

    #[test]
    fn succ_of_empty_morphism_is_no_segment() {
        let nu = empty_morphism(&empty_predilator(), &const1());
        assert!(is_segment(&nu, 2, 10).holds);
        let r = is_segment(&plus_one_mor(&nu), 2, 10);
        assert!(!r.holds);
        assert_eq!(
            r.witness,
            Some(crate::segll::SegmentWitness::Element {
                arity: 0,
                below: Elem::old(Elem::Nat(0)),
                above: Elem::Top
            })
        );
    }

    #[test]
    fn succ_laws() {
        let ds = vec![empty_predilator(), const1(), omega_dilator()];
        let e = empty_morphism(&ds[0], &ds[1]);
        let a = TraceSet::finite(vec![TraceElem::new(0, Elem::nats(&[])), TraceElem::new(1, Elem::nats(&[0]))]);
        let mors = vec![e, inclusion(&ds[2], &a), pi(&ds[2])];
        let r = check_preptyx_laws(&succ_ptyx(), &ds, &mors, 2, 20);
        assert!(r.is_clean(), "{r}");
        assert!(is_segment(&pi(&ds[2]), 2, 20).holds);
    }

    #[test]
    fn constant_laws() {
        let p = constant_ptyx(&omega_dilator());
        let ds = vec![empty_predilator(), omega_dilator()];
        let r = check_preptyx_laws(&p, &ds, &[pi(&ds[1])], 2, 20);
        assert!(r.is_clean(), "{r}");
        assert!(p.supp_elem(&ds[1], 1, &Elem::nats(&[0, 0])).is_empty());
        assert_eq!(p.apply_obj(&const1()).id(), p.apply_obj(&ds[0]).id());
    }

    struct DropSupp;

    impl PreptyxImpl for DropSupp {
        fn label(&self) -> String {
            "dropsupp".into()
        }
        fn apply_obj(&self, d: &Predilator) -> Predilator {
            plus_one(d)
        }
        fn apply_mor(&self, nu: &Morphism, _s: Predilator, _t: Predilator) -> Morphism {
            plus_one_mor(nu)
        }
        fn supp_elem(&self, _d: &Predilator, _n: usize, _x: &Elem) -> Vec<TraceElem> {
            vec![]
        }
    }

    #[test]
    fn dropped_support_is_caught() {
        let p = Preptyx::new(DropSupp);
        let r = check_preptyx_laws(&p, &[omega_dilator()], &[], 1, 10);
        assert!(r.violations.iter().any(|v| v.clause.contains("support condition")), "{r}");
    }

    #[test]
    fn sums() {
        let s = sum_of(vec![constant_ptyx(&constant_predilator(finite(1))), succ_ptyx()]);
        let v = s.ptyx.apply_obj(&empty_predilator()).value(0);
        assert!(audit_linearity(&v, 5, 1000).unwrap().is_empty());
        assert_eq!(crate::orders::dump_prefix(&v, 5, 1000).unwrap().lines().count(), 2);
        let single = sum_of(vec![succ_ptyx()]);
        let d = omega_dilator();
        assert_eq!(single.ptyx.apply_obj(&d).window(1, 10).len(), 10);
        let inj = s.injection(&Elem::Nat(1), &d);
        assert!(check_morphism(&inj, 2, 15).is_clean());
        let r = check_preptyx_laws(&s.ptyx, &[empty_predilator(), d.clone()], &[pi(&d)], 2, 15);
        assert!(r.is_clean(), "{r}");
        let x = s.ptyx.apply_obj(&d).value(3);
        assert!(!probe_descent(&x, 4, 20_000).unwrap().found);
    }

    #[test]
    fn preservation() {
        let sys = support_system(&omega_dilator(), 3);
        assert!(check_preservation(&succ_ptyx(), &sys, 3).holds);
        let c = constant_ptyx(&constant_predilator(finite(2)));
        assert!(check_preservation(&c, &support_system(&const1(), 1), 5).holds);
        let d = omega_dilator();
        let a = TraceSet::finite(d.trace_window(3));
        let b = TraceSet::finite(d.trace_window(5)[2..].to_vec());
        let r = check_pullback_preservation(&succ_ptyx(), &inclusion(&d, &a), &inclusion(&d, &b), 2, 20);
        assert!(r.is_clean(), "{r}");
        let r = check_pullback_preservation(&identity_ptyx(), &inclusion(&d, &a), &inclusion(&d, &b), 2, 20);
        assert!(r.is_clean(), "{r}");
    }
}
