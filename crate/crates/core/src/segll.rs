//! Segments, the relation `≪` on traces and its linearization, the
//! restrictions `D[ρ]` and the morphisms `ν^ρ`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::extend::{ext_parts, extend, ClassPredilator};
use crate::finord::{all_embeddings, FinEmbedding};
use crate::morph::{as_segment, restrict_to, FnMorphism, Morphism, TraceSet};
use crate::predil::{Predilator, TraceElem};
use crate::stream;
use crate::Elem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LLRelation {
    LL,
    GG,
    Incomparable,
}

/// The outcome of comparing two trace elements under `≪`. Each refutation
/// is a pair `(f, g)` of embeddings into `m+n` at which the strict
/// inequality in that direction fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LLVerdict {
    pub relation: LLRelation,
    pub against_ll: Option<(FinEmbedding, FinEmbedding)>,
    pub against_gg: Option<(FinEmbedding, FinEmbedding)>,
}

fn ll_search(d: &Predilator, s: &TraceElem, t: &TraceElem) -> LLVerdict {
    let k = s.arity + t.arity;
    let (mut against_ll, mut against_gg) = (None, None);
    'outer: for f in all_embeddings(s.arity, k) {
        let x = d.act(&f, &s.elem);
        for g in all_embeddings(t.arity, k) {
            let o = d.compare(k, &x, &d.act(&g, &t.elem));
            if o != Ordering::Less && against_ll.is_none() {
                against_ll = Some((f.clone(), g.clone()));
            }
            if o != Ordering::Greater && against_gg.is_none() {
                against_gg = Some((f.clone(), g.clone()));
            }
            if against_ll.is_some() && against_gg.is_some() {
                break 'outer;
            }
        }
    }
    let relation = match (&against_ll, &against_gg) {
        (None, _) => LLRelation::LL,
        (_, None) => LLRelation::GG,
        _ => LLRelation::Incomparable,
    };
    LLVerdict { relation, against_ll, against_gg }
}

/// Decides `≪` by brute force over all embeddings into `m+n`.
pub fn ll_compare(d: &Predilator, s: &TraceElem, t: &TraceElem) -> Result<LLVerdict> {
    for u in [s, t] {
        if !d.is_trace(u) {
            return Err(Error::NotTrace(format!("{u} in {}", d.label())));
        }
    }
    Ok(ll_search(d, s, t))
}

/// `s ≪ t`, for trace elements already known to be in the trace.
pub fn ll(d: &Predilator, s: &TraceElem, t: &TraceElem) -> bool {
    ll_search(d, s, t).relation == LLRelation::LL
}

/// `<_Tr(D)` without membership checks: compare both kernels in
/// `D(max(m, n))` after including the smaller arity.
pub fn trace_cmp(d: &Predilator, s: &TraceElem, t: &TraceElem) -> Ordering {
    if s == t {
        return Ordering::Equal;
    }
    let k = s.arity.max(t.arity);
    let x = d.act(&FinEmbedding::inclusion(s.arity, k), &s.elem);
    let y = d.act(&FinEmbedding::inclusion(t.arity, k), &t.elem);
    d.compare(k, &x, &y)
}

pub fn trace_order_compare(d: &Predilator, s: &TraceElem, t: &TraceElem) -> Result<Ordering> {
    for u in [s, t] {
        if !d.is_trace(u) {
            return Err(Error::NotTrace(format!("{u} in {}", d.label())));
        }
    }
    Ok(trace_cmp(d, s, t))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegmentWitness {
    /// `below < above` in `E(arity)`, with `above` in the range and `below` not.
    Element { arity: usize, below: Elem, above: Elem },
    /// `inside ∈ rng Tr(ν)`, `inside ⋪ outside`, and `outside ∉ rng Tr(ν)`.
    Trace { inside: TraceElem, outside: TraceElem },
}

impl fmt::Display for SegmentWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentWitness::Element { arity, below, above } => {
                write!(f, "{below} < {above} in arity {arity}, only {above} in range")
            }
            SegmentWitness::Trace { inside, outside } => {
                write!(f, "{inside} ∈ rng, {inside} ⋪ {outside}, {outside} ∉ rng")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SegmentReport {
    pub holds: bool,
    pub witness: Option<SegmentWitness>,
    /// The morphism is a segment by construction, independently of the window.
    pub guaranteed: bool,
}

/// Window check of both characterizations of segments: ranges of components
/// are initial segments, and the trace condition holds.
pub fn is_segment(nu: &Morphism, arity_bound: usize, elem_budget: usize) -> SegmentReport {
    let (d, e) = (nu.source(), nu.target());
    let report = |w: Option<SegmentWitness>| SegmentReport {
        holds: w.is_none(),
        witness: w,
        guaranteed: nu.segment_by_construction(),
    };
    for n in 0..=arity_bound {
        let mut pts = e.window(n, elem_budget);
        for x in d.window(n, elem_budget) {
            let y = nu.component(n, &x);
            if !pts.contains(&y) {
                pts.push(y);
            }
        }
        let inr: Vec<bool> = pts.iter().map(|y| nu.in_range(n, y)).collect();
        let (inside, outside): (Vec<_>, Vec<_>) = pts.iter().zip(&inr).partition(|(_, r)| **r);
        for (above, _) in &inside {
            for (below, _) in &outside {
                if e.compare(n, below, above) == Ordering::Less {
                    return report(Some(SegmentWitness::Element {
                        arity: n,
                        below: (*below).clone(),
                        above: (*above).clone(),
                    }));
                }
            }
        }
    }
    let mut tr = e.trace_window(elem_budget.min(24));
    for t in d.trace_window(elem_budget.min(24)) {
        let u = TraceElem::new(t.arity, nu.component(t.arity, &t.elem));
        if !tr.contains(&u) {
            tr.push(u);
        }
    }
    let inr: Vec<bool> = tr.iter().map(|t| nu.in_range(t.arity, &t.elem)).collect();
    let (ins, outs): (Vec<_>, Vec<_>) = tr.iter().zip(&inr).partition(|(_, r)| **r);
    for (inside, _) in &ins {
        for (outside, _) in &outs {
            if !ll(&e, inside, outside) {
                return report(Some(SegmentWitness::Trace {
                    inside: (*inside).clone(),
                    outside: (*outside).clone(),
                }));
            }
        }
    }
    report(None)
}

/// Checks that the extension `ν̄_X` has downward closed range on the first
/// `budget` elements of `Ē(X)`.
pub fn extended_is_segment(nu: &Morphism, x: &crate::orders::Order, budget: usize) -> Result<bool> {
    let ex = extend(&nu.target()).value(x);
    let mut s = ex
        .enumerate()
        .ok_or_else(|| Error::MissingEnumeration(x.label()))?;
    let (pts, _) = stream::take(&mut s, budget, crate::predil::step_cap(budget) * 4);
    let in_range = |e: &Elem| {
        let (a, k) = ext_parts(e).expect("extension element");
        nu.in_range(a.len(), k)
    };
    let inr: Vec<bool> = pts.iter().map(in_range).collect();
    for (i, above) in pts.iter().enumerate() {
        for (j, below) in pts.iter().enumerate() {
            if inr[i] && !inr[j] && ex.compare(below, above) == Ordering::Less {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Window check that `D(f)` has downward closed range whenever `f` does.
pub fn is_weakly_normal(d: &Predilator, arity_bound: usize, elem_budget: usize) -> bool {
    for k in 0..=arity_bound {
        let w = d.window(k, elem_budget);
        for m in 0..=k {
            let f = FinEmbedding::inclusion(m, k);
            let inr: Vec<bool> = w.iter().map(|y| d.in_range(&f, y)).collect();
            for i in 0..w.len() {
                for j in 0..w.len() {
                    if inr[i] && !inr[j] && d.compare(k, &w[j], &w[i]) == Ordering::Less {
                        return false;
                    }
                }
            }
        }
    }
    true
}

type RhoKey = (usize, TraceElem);

/// Restrictions `D[ρ]`, cached per predilator and `ρ`. The cache holds its
/// own handle on `D`, so the pointer in the key can never be reused.
fn rho_cache() -> &'static Mutex<HashMap<RhoKey, (Predilator, Predilator)>> {
    static CACHE: OnceLock<Mutex<HashMap<RhoKey, (Predilator, Predilator)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `{σ ∈ Tr(D) | σ ≪ ρ}`, with decisions memoized.
pub fn below_set(d: &Predilator, rho: &TraceElem) -> TraceSet {
    let (d, rho) = (d.clone(), rho.clone());
    let memo: Mutex<HashMap<TraceElem, bool>> = Mutex::new(HashMap::new());
    TraceSet::new(format!("≪{rho}"), move |t| {
        if let Some(&b) = memo.lock().unwrap().get(t) {
            return b;
        }
        let b = ll(&d, t, &rho);
        memo.lock().unwrap().insert(t.clone(), b);
        b
    })
}

/// `D[ρ] = D[{σ ∈ Tr(D) | σ ≪ ρ}]`.
pub fn d_rho(d: &Predilator, rho: &TraceElem) -> Predilator {
    let key = (d.id(), rho.clone());
    if let Some((_, r)) = rho_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let r = restrict_to(d, &below_set(d, rho));
    rho_cache().lock().unwrap().entry(key).or_insert_with(|| (d.clone(), r)).1.clone()
}

/// `ι[ρ]: D[ρ] ⇒ D`.
pub fn iota_rho(d: &Predilator, rho: &TraceElem) -> Morphism {
    let sub = d_rho(d, rho);
    as_segment(crate::morph::inclusion_of(&sub, d, &format!("ι[{rho}]")))
}

/// `ν^ρ: D[ρ] ⇒ E[Tr(ν)(ρ)]`, which agrees with `ν` on every component.
pub fn nu_rho(nu: &Morphism, rho: &TraceElem) -> Result<Morphism> {
    let img = nu.trace_map(rho)?;
    let src = d_rho(&nu.source(), rho);
    let tgt = d_rho(&nu.target(), &img);
    let (n2, s2) = (nu.clone(), src.clone());
    Ok(Morphism::new(FnMorphism {
        label: format!("{}^{rho}", nu.label()),
        source: src,
        target: tgt,
        component: {
            let nu = nu.clone();
            Arc::new(move |n, x| nu.component(n, x))
        },
        preimage: Arc::new(move |n, y| n2.preimage(n, y).filter(|x| s2.contains(n, x))),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morph::{check_morphism, identity, inclusion};
    use crate::orders::{finite, omega};
    use crate::predil::{check_predilator_laws, omega_dilator};
    use proptest::prelude::*;

    fn te(n: usize, v: &[u64]) -> TraceElem {
        TraceElem::new(n, Elem::nats(v))
    }

    #[test]
    fn ll_examples() {
        let d = omega_dilator();
        assert_eq!(ll_compare(&d, &te(0, &[]), &te(1, &[0])).unwrap().relation, LLRelation::LL);
        let v = ll_compare(&d, &te(1, &[0]), &te(1, &[0, 0])).unwrap();
        assert_eq!(v.relation, LLRelation::Incomparable);
        let (f, g) = v.against_ll.unwrap();
        assert_eq!((f.values(), g.values()), (&[1][..], &[0][..]));
        assert!(v.against_gg.is_some());
        let s = te(2, &[1, 0]);
        assert_ne!(ll_compare(&d, &s, &s).unwrap().relation, LLRelation::LL);
        assert!(ll_compare(&d, &te(2, &[0]), &s).is_err());
    }

    #[test]
    fn trace_order_examples() {
        let d = omega_dilator();
        let cmp = |s, t| trace_order_compare(&d, &s, &t).unwrap();
        assert_eq!(cmp(te(1, &[0]), te(1, &[0, 0])), Ordering::Less);
        assert_eq!(cmp(te(2, &[1, 0]), te(2, &[1, 0])), Ordering::Equal);
        assert_eq!(cmp(te(0, &[]), te(2, &[1, 0])), Ordering::Less);
    }

    #[test]
    fn ll_is_irreflexive_transitive_and_linearized() {
        let d = omega_dilator();
        let tr = d.trace_window(14);
        for a in &tr {
            assert!(!ll(&d, a, a));
            for b in &tr {
                if ll(&d, a, b) {
                    assert_eq!(trace_cmp(&d, a, b), Ordering::Less, "{a} ≪ {b}");
                    for c in &tr {
                        if ll(&d, b, c) {
                            assert!(ll(&d, a, c));
                        }
                        // comparability propagation
                        if !ll(&d, a, c) {
                            assert!(ll(&d, c, b), "{a} ≪ {b}, {a} ⋪ {c}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn omega_rho_restrictions() {
        let d = omega_dilator();
        let bottom = d_rho(&d, &te(0, &[]));
        assert!(bottom.trace_window(10).is_empty());
        let r = d_rho(&d, &te(1, &[0, 0]));
        assert!(check_predilator_laws(&r, 2, 15).is_clean());
        assert!(r.contains(0, &Elem::nats(&[])));
        assert!(!r.contains(1, &Elem::nats(&[0])));
        assert!(check_morphism(&iota_rho(&d, &te(1, &[0, 0])), 2, 15).is_clean());
    }

    #[test]
    fn identity_rho_and_segments() {
        let d = omega_dilator();
        let rho = te(2, &[1, 0]);
        let id = nu_rho(&identity(&d), &rho).unwrap();
        for x in id.source().window(2, 10) {
            assert_eq!(id.component(2, &x), x);
        }
        assert!(is_segment(&identity(&d), 2, 15).holds);
        // ι[ρ] is a segment: its range is {σ | σ ≪ ρ}
        let seg = iota_rho(&d, &te(1, &[0, 0]));
        assert!(is_segment(&seg, 2, 15).holds);
        assert!(extended_is_segment(&seg, &finite(3), 40).unwrap());
        // ι of a set that is not downward closed is no segment
        let a = TraceSet::finite(vec![te(1, &[0])]);
        let r = is_segment(&inclusion(&d, &a), 2, 15);
        assert!(!r.holds);
        assert!(!r.guaranteed);
    }

    #[test]
    fn weak_normality_is_inherited_along_morphisms() {
        let d = omega_dilator();
        assert!(is_weakly_normal(&d, 2, 20));
        let sub = d_rho(&d, &te(2, &[1, 0]));
        assert!(is_weakly_normal(&sub, 2, 20));
        assert!(extended_is_segment(&identity(&d), &omega(), 30).unwrap());
    }

    proptest! {
        #[test]
        fn trace_maps_reflect_ll(i in 0usize..10, j in 0usize..10) {
            let d = omega_dilator();
            let a = TraceSet::finite(d.trace_window(10));
            let iota = inclusion(&d, &a);
            let tr = d.trace_window(10);
            let (s, t) = (&tr[i], &tr[j]);
            let src = iota.source();
            prop_assert_eq!(ll(&src, s, t), ll(&d, &iota.trace_map(s).unwrap(), &iota.trace_map(t).unwrap()));
        }
    }
}
