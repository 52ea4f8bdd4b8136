//! The normalization `P ↦ P*` with `P*(D) = Σ_{ρ∈Tr(D)} (P(D[ρ])+1)`, and
//! the majorizing morphisms `ξ^D: P(D)+1 ⇒ P*(D+1)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::finord::FinEmbedding;
use crate::morph::{factor, Morphism, MorphismImpl};
use crate::predil::{Predilator, PredilatorImpl, TraceElem};
use crate::ptyx::{pi, plus_one, Preptyx, PreptyxImpl};
use crate::segll::{d_rho, iota_rho, nu_rho, trace_cmp};
use crate::stream::{self, Stream};
use crate::{Elem, Error, Result};

fn split(x: &Elem) -> (TraceElem, &Elem) {
    let (r, inner) = x.as_pair().expect("star element");
    (TraceElem::from_elem(r).expect("trace index"), inner)
}

fn tag(rho: &TraceElem, inner: Elem) -> Elem {
    Elem::pair(rho.to_elem(), inner)
}

#[derive(Clone)]
struct Fibers {
    p: Preptyx,
    d: Predilator,
    memo: Arc<Mutex<HashMap<TraceElem, Predilator>>>,
}

impl Fibers {
    /// `P(D[ρ])`.
    fn get(&self, rho: &TraceElem) -> Predilator {
        if let Some(f) = self.memo.lock().unwrap().get(rho) {
            return f.clone();
        }
        let f = self.p.apply_obj(&d_rho(&self.d, rho));
        self.memo.lock().unwrap().entry(rho.clone()).or_insert(f).clone()
    }
}

struct StarObj(Fibers);

impl PredilatorImpl for StarObj {
    fn label(&self) -> String {
        format!("{}*({})", self.0.p.label(), self.0.d.label())
    }
    fn contains(&self, n: usize, x: &Elem) -> bool {
        let Some((r, inner)) = x.as_pair() else { return false };
        let Some(rho) = TraceElem::from_elem(r) else { return false };
        if !self.0.d.is_trace(&rho) {
            return false;
        }
        match inner {
            Elem::Top => true,
            Elem::Old(y) => self.0.get(&rho).contains(n, y),
            _ => false,
        }
    }
    fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering {
        let ((r, s), (q, t)) = (split(x), split(y));
        trace_cmp(&self.0.d, &r, &q).then_with(|| match (s, t) {
            (Elem::Old(a), Elem::Old(b)) => self.0.get(&r).compare(n, a, b),
            _ => s.is_top().cmp(&t.is_top()),
        })
    }
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        let (rho, inner) = split(x);
        match inner {
            Elem::Old(y) => tag(&rho, Elem::old(self.0.get(&rho).act(f, y))),
            _ => tag(&rho, Elem::Top),
        }
    }
    fn supp(&self, n: usize, x: &Elem) -> Vec<usize> {
        let (rho, inner) = split(x);
        inner.as_old().map_or_else(Vec::new, |y| self.0.get(&rho).supp(n, y))
    }
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        let (r, inner) = y.as_pair()?;
        let rho = TraceElem::from_elem(r)?;
        match inner {
            Elem::Top => Some(y.clone()),
            Elem::Old(z) => Some(tag(&rho, Elem::old(self.0.get(&rho).preimage(f, z)?))),
            _ => None,
        }
    }
    fn elements(&self, n: usize) -> Stream {
        let fibers = self.0.clone();
        let outer = stream::map(self.0.d.trace(), move |rho| {
            let (r1, r2) = (rho.clone(), rho.clone());
            let old = stream::map(fibers.get(&rho).elements(n), move |y| tag(&r2, Elem::old(y)));
            stream::chain(stream::from_iter([tag(&r1, Elem::Top)]), old)
        });
        stream::dovetail(outer)
    }
}

struct StarMor {
    p: Preptyx,
    nu: Morphism,
    source: Predilator,
    target: Predilator,
    parts: Mutex<HashMap<TraceElem, Morphism>>,
}

impl StarMor {
    /// `P(ν^ρ)`.
    fn part(&self, rho: &TraceElem) -> Morphism {
        if let Some(m) = self.parts.lock().unwrap().get(rho) {
            return m.clone();
        }
        let m = self.p.apply_mor(&nu_rho(&self.nu, rho).expect("index in the trace"));
        self.parts.lock().unwrap().entry(rho.clone()).or_insert(m).clone()
    }
}

impl MorphismImpl for StarMor {
    fn label(&self) -> String {
        format!("{}*({})", self.p.label(), self.nu.label())
    }
    fn source(&self) -> Predilator {
        self.source.clone()
    }
    fn target(&self) -> Predilator {
        self.target.clone()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        let (rho, inner) = split(x);
        let img = self.nu.trace_map(&rho).expect("index in the trace");
        match inner {
            Elem::Old(y) => tag(&img, Elem::old(self.part(&rho).component(n, y))),
            _ => tag(&img, Elem::Top),
        }
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        let (r, inner) = y.as_pair()?;
        let rho = self.nu.trace_preimage(&TraceElem::from_elem(r)?)?;
        match inner {
            Elem::Top => Some(tag(&rho, Elem::Top)),
            Elem::Old(z) => Some(tag(&rho, Elem::old(self.part(&rho).preimage(n, z)?))),
            _ => None,
        }
    }
    fn segment_by_construction(&self) -> bool {
        self.nu.segment_by_construction()
    }
}

struct Star(Preptyx);

impl PreptyxImpl for Star {
    fn label(&self) -> String {
        format!("star({})", self.0.label())
    }
    fn apply_obj(&self, d: &Predilator) -> Predilator {
        Predilator::new(StarObj(Fibers {
            p: self.0.clone(),
            d: d.clone(),
            memo: Arc::new(Mutex::new(HashMap::new())),
        }))
    }
    fn apply_mor(&self, nu: &Morphism, source: Predilator, target: Predilator) -> Morphism {
        Morphism::new(StarMor {
            p: self.0.clone(),
            nu: nu.clone(),
            source,
            target,
            parts: Mutex::new(HashMap::new()),
        })
    }
    /// `{ρ} ∪ Supp_{D[ρ]}(σ)`: supports in `D[ρ]` are supports in `D`,
    /// since `ι[ρ]` is the identity on trace codes.
    fn supp_elem(&self, d: &Predilator, n: usize, x: &Elem) -> Vec<TraceElem> {
        let (rho, inner) = split(x);
        let mut s = vec![rho.clone()];
        if let Some(y) = inner.as_old() {
            s.extend(self.0.supp_elem(&d_rho(d, &rho), n, y));
        }
        s
    }
    fn normal(&self) -> bool {
        true
    }
}

pub(crate) fn build(p: &Preptyx) -> Preptyx {
    Preptyx::new(Star(p.clone()))
}

/// `P*`; the same handle is returned on every call for a given `P`.
pub fn star(p: &Preptyx) -> Preptyx {
    p.star()
}

/// `(0, ⊤) ∈ Tr(D+1)`.
pub fn top_trace() -> TraceElem {
    TraceElem::new(0, Elem::Top)
}

/// `ι^D: D ⇒ (D+1)[(0,⊤)]` with `ι[(0,⊤)] ∘ ι^D = π^D`.
pub fn iota_top(d: &Predilator) -> Result<Morphism> {
    factor(&pi(d), &iota_rho(&plus_one(d), &top_trace()))
}

struct Xi {
    source: Predilator,
    target: Predilator,
    inner: Morphism,
}

impl MorphismImpl for Xi {
    fn label(&self) -> String {
        format!("ξ[{}]", self.inner.source().label())
    }
    fn source(&self) -> Predilator {
        self.source.clone()
    }
    fn target(&self) -> Predilator {
        self.target.clone()
    }
    fn component(&self, n: usize, x: &Elem) -> Elem {
        match x {
            Elem::Old(y) => tag(&top_trace(), Elem::old(self.inner.component(n, y))),
            _ => tag(&top_trace(), Elem::Top),
        }
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        let (r, inner) = y.as_pair()?;
        if TraceElem::from_elem(r)? != top_trace() {
            return None;
        }
        match inner {
            Elem::Top => Some(Elem::Top),
            Elem::Old(z) => self.inner.preimage(n, z).map(Elem::old),
            _ => None,
        }
    }
}

/// `ξ^D: P(D)+1 ⇒ P*(D+1)`, sending `σ` to `((0,⊤), P(ι^D)(σ))` and `⊤` to
/// `((0,⊤), ⊤)`.
pub fn xi(p: &Preptyx, d: &Predilator) -> Result<Morphism> {
    let iota = iota_top(d).map_err(|e| Error::Verification(format!("ι^D for {}: {e}", d.label())))?;
    Ok(Morphism::new(Xi {
        source: plus_one(&p.apply_obj(d)),
        target: p.star().apply_obj(&plus_one(d)),
        inner: p.apply_mor(&iota),
    }))
}
