use std::cmp::Ordering;
use std::sync::Arc;

use super::{Predilator, PredilatorImpl, TraceElem};
use crate::extend::ClassPredilator;
use crate::finord::FinEmbedding;
use crate::orders::{self, LinearOrder, Order};
use crate::stream::{self, Stream};
use crate::Elem;

struct Constant(Order);

impl PredilatorImpl for Constant {
    fn label(&self) -> String {
        format!("const:{}", self.0.label())
    }
    fn contains(&self, _n: usize, x: &Elem) -> bool {
        self.0.contains(x)
    }
    fn compare(&self, _n: usize, x: &Elem, y: &Elem) -> Ordering {
        self.0.compare(x, y)
    }
    fn act(&self, _f: &FinEmbedding, x: &Elem) -> Elem {
        x.clone()
    }
    fn supp(&self, _n: usize, _x: &Elem) -> Vec<usize> {
        vec![]
    }
    fn preimage(&self, _f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        Some(y.clone())
    }
    fn elements(&self, _n: usize) -> Stream {
        self.0.enumerate().unwrap_or_else(stream::empty)
    }
    fn trace(&self) -> Option<Stream<TraceElem>> {
        let e = self.0.enumerate().unwrap_or_else(stream::empty);
        Some(stream::map(e, |x| TraceElem::new(0, x)))
    }
}

/// `D(n) = Z` for all `n`, identity action, empty supports.
pub fn constant_predilator(z: Order) -> Predilator {
    Predilator::new(Constant(z))
}

/// The constant predilator with value 0.
pub fn empty_predilator() -> Predilator {
    constant_predilator(orders::finite(0))
}

/// Enumeration weight: length plus four times the entry sum. Any weight with
/// finite classes gives a fair enumeration; this one lists the powers
/// `⟨0,…,0⟩` of small length before any larger exponent.
fn weighted(max_entry: u64, w: u64, out: &mut Vec<Vec<u64>>, prefix: &mut Vec<u64>) {
    if w == 0 {
        out.push(prefix.clone());
        return;
    }
    for x in 0..=max_entry {
        let cost = 1 + 4 * x;
        if cost > w {
            break;
        }
        prefix.push(x);
        weighted(x, w - cost, out, prefix);
        prefix.pop();
    }
}

fn omega_stream(n: usize) -> Stream {
    if n == 0 {
        return stream::from_iter([Elem::nats(&[])]);
    }
    let top = n as u64 - 1;
    stream::expand(stream::from_iter(0u64..), move |w| {
        let mut out = Vec::new();
        weighted(top, w, &mut out, &mut Vec::new());
        out.into_iter().map(|v| Elem::nats(&v)).collect()
    })
}

fn weakly_decreasing(v: &[u64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

struct Omega;

impl PredilatorImpl for Omega {
    fn label(&self) -> String {
        "omega".into()
    }
    fn contains(&self, n: usize, x: &Elem) -> bool {
        x.as_nat_seq()
            .is_some_and(|v| weakly_decreasing(&v) && v.iter().all(|&e| (e as usize) < n))
    }
    fn compare(&self, _n: usize, x: &Elem, y: &Elem) -> Ordering {
        x.as_nat_seq().cmp(&y.as_nat_seq())
    }
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        let v = x.as_nat_seq().expect("omega element");
        Elem::nats(&v.iter().map(|&e| f.apply(e as usize) as u64).collect::<Vec<_>>())
    }
    fn supp(&self, _n: usize, x: &Elem) -> Vec<usize> {
        let mut s: Vec<usize> = x.as_nat_seq().expect("omega element").iter().map(|&e| e as usize).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        let v = y.as_nat_seq()?;
        let back: Option<Vec<u64>> = v.iter().map(|&e| f.preimage(e as usize).map(|i| i as u64)).collect();
        Some(Elem::nats(&back?))
    }
    fn elements(&self, n: usize) -> Stream {
        omega_stream(n)
    }
}

/// `D(X)` = weakly decreasing finite sequences over `X` (Cantor normal forms
/// of `ω^X`), ordered lexicographically with proper prefixes smaller.
pub fn omega_dilator() -> Predilator {
    Predilator::new(Omega)
}

/// The class-sized version of [`omega_dilator`], defined on every order.
#[derive(Clone, Copy, Default)]
pub struct OmegaClass;

struct OmegaOn(Order);

impl LinearOrder for OmegaOn {
    fn label(&self) -> String {
        format!("omega({})", self.0.label())
    }
    fn contains(&self, x: &Elem) -> bool {
        x.as_seq().is_some_and(|s| {
            s.iter().all(|e| self.0.contains(e))
                && s.windows(2).all(|w| self.0.compare(&w[0], &w[1]) != Ordering::Less)
        })
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        let (s, t) = (x.as_seq().expect("sequence"), y.as_seq().expect("sequence"));
        for (a, b) in s.iter().zip(t) {
            match self.0.compare(a, b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        s.len().cmp(&t.len())
    }
}

impl ClassPredilator for OmegaClass {
    fn label(&self) -> String {
        "omega".into()
    }
    fn value(&self, x: &Order) -> Order {
        Arc::new(OmegaOn(x.clone()))
    }
    fn act(&self, f: &dyn Fn(&Elem) -> Elem, s: &Elem) -> Elem {
        Elem::seq(s.as_seq().expect("sequence").iter().map(f).collect())
    }
    fn supp(&self, x: &Order, s: &Elem) -> Vec<Elem> {
        let mut v: Vec<Elem> = s.as_seq().expect("sequence").to_vec();
        v.sort_by(|a, b| x.compare(a, b));
        v.dedup();
        v
    }
    fn pull(&self, x: &Order, a: &[Elem], s: &Elem) -> Option<Elem> {
        let mut out = Vec::new();
        for e in s.as_seq()? {
            let i = a.binary_search_by(|z| x.compare(z, e)).ok()?;
            out.push(Elem::Nat(i as u64));
        }
        Some(Elem::seq(out))
    }
    fn coded(&self) -> Predilator {
        omega_dilator()
    }
}
