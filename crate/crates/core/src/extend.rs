//! The class-sized extension of a coded predilator, normal forms and the
//! comparison isomorphism `η`.
//!
//! An element of the extension at `X` is `(a, σ)` with `a` a finite subset of
//! `X` and `(|a|, σ)` in the trace. It is represented as `Pair(Seq a, σ)`
//! with `a` sorted ascending in `X`.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::finord::FinEmbedding;
use crate::morph::Morphism;
use crate::orders::{self, DescentReport, LinearOrder, Order};
use crate::predil::{Predilator, TraceElem};
use crate::stream::{self, Stream};
use crate::Elem;

/// A predilator defined on all orders, given by evaluation rules rather than
/// coded data. Functions `f` passed to `act` are order embeddings.
pub trait ClassPredilator: Send + Sync {
    fn label(&self) -> String;
    fn value(&self, x: &Order) -> Order;
    fn act(&self, f: &dyn Fn(&Elem) -> Elem, s: &Elem) -> Elem;
    /// The support, sorted ascending in `x`.
    fn supp(&self, x: &Order, s: &Elem) -> Vec<Elem>;
    /// The `σ₀ ∈ D(|a|)` with `D(en_a)(σ₀) = s`, for `a` sorted in `x`.
    fn pull(&self, x: &Order, a: &[Elem], s: &Elem) -> Option<Elem>;
    /// The restriction to finite orders.
    fn coded(&self) -> Predilator;
}

pub fn ext_elem(a: Vec<Elem>, kernel: Elem) -> Elem {
    Elem::pair(Elem::seq(a), kernel)
}

pub fn ext_parts(e: &Elem) -> Option<(&[Elem], &Elem)> {
    let (a, s) = e.as_pair()?;
    Some((a.as_seq()?, s))
}

/// Positions of the union `a ∪ b` as embeddings `|a| → |a∪b|`, `|b| → |a∪b|`.
fn merge(x: &Order, a: &[Elem], b: &[Elem]) -> (FinEmbedding, FinEmbedding) {
    let (mut i, mut j) = (0, 0);
    let (mut pa, mut pb) = (Vec::with_capacity(a.len()), Vec::with_capacity(b.len()));
    let mut n = 0;
    while i < a.len() || j < b.len() {
        let o = match (a.get(i), b.get(j)) {
            (Some(u), Some(v)) => x.compare(u, v),
            (Some(_), None) => Ordering::Less,
            _ => Ordering::Greater,
        };
        if o != Ordering::Greater {
            pa.push(n);
            i += 1;
        }
        if o != Ordering::Less {
            pb.push(n);
            j += 1;
        }
        n += 1;
    }
    (FinEmbedding::new(pa, n).expect("increasing"), FinEmbedding::new(pb, n).expect("increasing"))
}

/// `D̄`, the class-sized extension of `D`.
#[derive(Clone)]
pub struct Extended {
    d: Predilator,
}

pub fn extend(d: &Predilator) -> Extended {
    Extended { d: d.clone() }
}

impl Extended {
    pub fn predilator(&self) -> &Predilator {
        &self.d
    }
}

struct ExtOrder {
    d: Predilator,
    x: Order,
}

/// Finite subsets of an enumerated order, by bitmask over enumeration
/// positions, each sorted ascending.
fn subsets(x: Order) -> Option<Stream<Vec<Elem>>> {
    let mut src = Some(x.enumerate()?);
    let mut seen: Vec<Elem> = Vec::new();
    let mut mask: u64 = 0;
    Some(Box::new(std::iter::from_fn(move || {
        let need = (64 - mask.leading_zeros()) as usize;
        while seen.len() < need {
            match src.as_mut()?.next() {
                None => {
                    src = None;
                    return None;
                }
                Some(None) => return Some(None),
                Some(Some(e)) => seen.push(e),
            }
        }
        let mut a: Vec<Elem> = (0..need).filter(|i| mask >> i & 1 == 1).map(|i| seen[i].clone()).collect();
        a.sort_by(|u, v| x.compare(u, v));
        mask += 1;
        Some(Some(a))
    })))
}

impl LinearOrder for ExtOrder {
    fn label(&self) -> String {
        format!("ext({})({})", self.d.label(), self.x.label())
    }
    fn contains(&self, e: &Elem) -> bool {
        let Some((a, s)) = ext_parts(e) else { return false };
        a.iter().all(|u| self.x.contains(u))
            && a.windows(2).all(|w| self.x.compare(&w[0], &w[1]) == Ordering::Less)
            && self.d.is_trace(&TraceElem::new(a.len(), s.clone()))
    }
    fn compare(&self, e: &Elem, f: &Elem) -> Ordering {
        let (a, s) = ext_parts(e).expect("extension element");
        let (b, t) = ext_parts(f).expect("extension element");
        let (ia, ib) = merge(&self.x, a, b);
        let n = ia.codomain();
        self.d.compare(n, &self.d.act(&ia, s), &self.d.act(&ib, t))
    }
    fn enumerate(&self) -> Option<Stream> {
        let subs = subsets(self.x.clone())?;
        let trace = stream::replay(self.d.trace());
        let outer = stream::map(subs, move |a: Vec<Elem>| {
            let m = a.len();
            stream::filter_map(trace(), move |t: TraceElem| {
                (t.arity == m).then(|| ext_elem(a.clone(), t.elem))
            })
        });
        Some(stream::dovetail(outer))
    }
}

impl ClassPredilator for Extended {
    fn label(&self) -> String {
        format!("ext({})", self.d.label())
    }
    fn value(&self, x: &Order) -> Order {
        Arc::new(ExtOrder { d: self.d.clone(), x: x.clone() })
    }
    fn act(&self, f: &dyn Fn(&Elem) -> Elem, s: &Elem) -> Elem {
        let (a, k) = ext_parts(s).expect("extension element");
        ext_elem(a.iter().map(f).collect(), k.clone())
    }
    fn supp(&self, _x: &Order, s: &Elem) -> Vec<Elem> {
        ext_parts(s).expect("extension element").0.to_vec()
    }
    fn pull(&self, x: &Order, b: &[Elem], s: &Elem) -> Option<Elem> {
        let (a, k) = ext_parts(s)?;
        let pos: Option<Vec<usize>> = a
            .iter()
            .map(|u| b.binary_search_by(|v| x.compare(v, u)).ok())
            .collect();
        let f = FinEmbedding::new(pos?, b.len()).ok()?;
        Some(self.d.act(&f, k))
    }
    fn coded(&self) -> Predilator {
        self.d.clone()
    }
}

/// `σ = E(ι_a ∘ en_a)(σ₀)` with `a = supp(σ)`.
pub fn normal_form(e: &dyn ClassPredilator, x: &Order, s: &Elem) -> Result<(Vec<Elem>, TraceElem)> {
    if !e.value(x).contains(s) {
        return Err(Error::NotMember(format!("{s} in {}({})", e.label(), x.label())));
    }
    let a = e.supp(x, s);
    let k = e
        .pull(x, &a, s)
        .ok_or_else(|| Error::Verification(format!("{s} is not generated by its support")))?;
    let n = a.len();
    Ok((a, TraceElem::new(n, k)))
}

/// `η_X(a, σ) = D(ι_a ∘ en_a)(σ)`, from the extension of the coded
/// restriction of `full` into `full(X)`.
pub fn eta(full: &dyn ClassPredilator, x: &Order, e: &Elem) -> Result<Elem> {
    let d = full.coded();
    let (a, s) = ext_parts(e).ok_or_else(|| Error::NotMember(format!("{e} is not an extension element")))?;
    if !extend(&d).value(x).contains(e) {
        return Err(Error::NotMember(format!("{e} in ext({})({})", d.label(), x.label())));
    }
    let en = |i: &Elem| a[i.as_nat().expect("finite order element") as usize].clone();
    Ok(full.act(&en, s))
}

/// The inverse of [`eta`], computed by normal forms.
pub fn eta_inverse(full: &dyn ClassPredilator, x: &Order, s: &Elem) -> Result<Elem> {
    let (a, k) = normal_form(full, x, s)?;
    Ok(ext_elem(a, k.elem))
}

/// `μ̄_X(a, σ) = (a, μ_{|a|}(σ))`.
pub fn extend_morphism(mu: &Morphism) -> impl Fn(&Elem) -> Result<Elem> + '_ {
    move |e| {
        let (a, s) = ext_parts(e).ok_or_else(|| Error::NotMember(format!("{e}")))?;
        let t = TraceElem::new(a.len(), s.clone());
        if !mu.source().is_trace(&t) {
            return Err(Error::NotTrace(format!("{t} in {}", mu.source().label())));
        }
        Ok(ext_elem(a.to_vec(), mu.component(a.len(), s)))
    }
}

/// Looks for a descending chain in `D̄(X)`.
pub fn dilator_probe(d: &Predilator, x: &Order, len: usize, budget: usize) -> Result<DescentReport> {
    orders::probe_descent(&extend(d).value(x), len, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orders::{audit_linearity, finite, omega};
    use crate::predil::{constant_predilator, omega_dilator, OmegaClass};

    fn oe(a: &[u64], k: &[u64]) -> Elem {
        ext_elem(a.iter().map(|&n| Elem::Nat(n)).collect(), Elem::nats(k))
    }

    #[test]
    fn extension_comparison_example() {
        let x = extend(&omega_dilator()).value(&omega());
        let (u, v) = (oe(&[3], &[0]), oe(&[0, 5], &[1, 0]));
        assert!(x.contains(&u) && x.contains(&v));
        assert_eq!(x.compare(&u, &v), Ordering::Less);
        assert!(!x.contains(&oe(&[0, 5], &[0, 0])));
    }

    #[test]
    fn eta_and_normal_form() {
        let w = omega();
        assert_eq!(eta(&OmegaClass, &w, &oe(&[0, 5], &[1, 0])).unwrap(), Elem::nats(&[5, 0]));
        let (a, k) = normal_form(&OmegaClass, &finite(3), &Elem::nats(&[2, 0])).unwrap();
        assert_eq!(a, vec![Elem::Nat(0), Elem::Nat(2)]);
        assert_eq!(k, TraceElem::new(2, Elem::nats(&[1, 0])));
        let (a, k) = normal_form(&OmegaClass, &w, &Elem::nats(&[])).unwrap();
        assert!(a.is_empty());
        assert_eq!(k.elem, Elem::nats(&[]));
        let ext = extend(&omega_dilator());
        let e = oe(&[1, 4], &[1, 0]);
        let (a, k) = normal_form(&ext, &w, &e).unwrap();
        assert_eq!(ext_elem(a, k.elem), e);
    }

    #[test]
    fn eta_roundtrip_on_prefix() {
        let w = omega();
        let x = extend(&omega_dilator()).value(&w);
        let (prefix, _) = stream::take(&mut x.enumerate().unwrap(), 50, 100_000);
        assert_eq!(prefix.len(), 50);
        for e in &prefix {
            let s = eta(&OmegaClass, &w, e).unwrap();
            assert_eq!(&eta_inverse(&OmegaClass, &w, &s).unwrap(), e);
            let supp = OmegaClass.supp(&w, &s);
            assert_eq!(supp, ext_parts(e).unwrap().0);
        }
        for (i, e) in prefix.iter().enumerate() {
            for f in &prefix[i + 1..] {
                let (s, t) = (eta(&OmegaClass, &w, e).unwrap(), eta(&OmegaClass, &w, f).unwrap());
                assert_eq!(x.compare(e, f), OmegaClass.value(&w).compare(&s, &t));
            }
        }
    }

    #[test]
    fn constant_extension_is_a_singleton() {
        let x = extend(&constant_predilator(finite(1))).value(&omega());
        let (all, _) = stream::take(&mut x.enumerate().unwrap(), 10, 5000);
        assert_eq!(all, vec![ext_elem(vec![], Elem::Nat(0))]);
        let r = dilator_probe(&constant_predilator(finite(1)), &omega(), 2, 5000).unwrap();
        assert!(!r.found);
    }

    #[test]
    fn extension_orders_are_linear() {
        let x = extend(&omega_dilator()).value(&finite(4));
        assert!(audit_linearity(&x, 60, 100_000).unwrap().is_empty());
        let r = dilator_probe(&omega_dilator(), &omega(), 10, 20_000).unwrap();
        assert!(!r.found);
    }

    #[test]
    fn identity_action() {
        let ext = extend(&omega_dilator());
        let e = oe(&[2, 7], &[1, 1, 0]);
        assert_eq!(ext.act(&|u: &Elem| u.clone(), &e), e);
    }
}
