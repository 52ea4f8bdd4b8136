//! Countable linear orders with decidable membership and comparison.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stream::{self, Stream};
use crate::Elem;

pub trait LinearOrder: Send + Sync {
    fn label(&self) -> String;
    fn contains(&self, x: &Elem) -> bool;
    /// Total comparison on members.
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering;
    /// A fair enumeration without repetitions, if the order has one.
    fn enumerate(&self) -> Option<Stream> {
        None
    }
    fn finite_size(&self) -> Option<usize> {
        None
    }
}

pub type Order = Arc<dyn LinearOrder>;

struct Finite(usize);

impl LinearOrder for Finite {
    fn label(&self) -> String {
        format!("fin:{}", self.0)
    }
    fn contains(&self, x: &Elem) -> bool {
        x.as_nat().is_some_and(|n| (n as usize) < self.0)
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        x.as_nat().cmp(&y.as_nat())
    }
    fn enumerate(&self) -> Option<Stream> {
        Some(stream::from_iter((0..self.0 as u64).map(Elem::Nat)))
    }
    fn finite_size(&self) -> Option<usize> {
        Some(self.0)
    }
}

/// The finite order `n = {0,…,n−1}`.
pub fn finite(n: usize) -> Order {
    Arc::new(Finite(n))
}

struct Omega;

impl LinearOrder for Omega {
    fn label(&self) -> String {
        "omega".into()
    }
    fn contains(&self, x: &Elem) -> bool {
        x.as_nat().is_some()
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        x.as_nat().cmp(&y.as_nat())
    }
    fn enumerate(&self) -> Option<Stream> {
        Some(stream::from_iter((0u64..).map(Elem::Nat)))
    }
}

/// The naturals in their usual order.
pub fn omega() -> Order {
    Arc::new(Omega)
}

struct Succ(Order);

impl LinearOrder for Succ {
    fn label(&self) -> String {
        format!("{}+1", self.0.label())
    }
    fn contains(&self, x: &Elem) -> bool {
        match x {
            Elem::Top => true,
            Elem::Old(y) => self.0.contains(y),
            _ => false,
        }
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        match (x, y) {
            (Elem::Top, Elem::Top) => Ordering::Equal,
            (Elem::Top, _) => Ordering::Greater,
            (_, Elem::Top) => Ordering::Less,
            (Elem::Old(a), Elem::Old(b)) => self.0.compare(a, b),
            _ => Ordering::Equal,
        }
    }
    fn enumerate(&self) -> Option<Stream> {
        let inner = self.0.enumerate()?;
        Some(stream::chain(
            stream::from_iter([Elem::Top]),
            stream::map(inner, Elem::old),
        ))
    }
    fn finite_size(&self) -> Option<usize> {
        self.0.finite_size().map(|n| n + 1)
    }
}

/// `X + 1`: the old elements tagged, plus a new maximum `⊤`.
pub fn succ_order(x: Order) -> Order {
    Arc::new(Succ(x))
}

pub type Fiber = Arc<dyn Fn(&Elem) -> Option<Order> + Send + Sync>;

struct Sum {
    index: Order,
    fiber: Fiber,
}

impl LinearOrder for Sum {
    fn label(&self) -> String {
        format!("Σ_{{{}}}", self.index.label())
    }
    fn contains(&self, x: &Elem) -> bool {
        let Some((z, s)) = x.as_pair() else { return false };
        self.index.contains(z) && (self.fiber)(z).is_some_and(|f| f.contains(s))
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        let (z, s) = x.as_pair().expect("sum element");
        let (w, t) = y.as_pair().expect("sum element");
        self.index.compare(z, w).then_with(|| {
            (self.fiber)(z)
                .expect("fiber defined on index members")
                .compare(s, t)
        })
    }
    fn enumerate(&self) -> Option<Stream> {
        let idx = self.index.enumerate()?;
        let fiber = self.fiber.clone();
        let outer = stream::filter_map(idx, move |z| {
            let inner = fiber(&z)?.enumerate()?;
            Some(stream::map(inner, move |s| Elem::pair(z.clone(), s)))
        });
        Some(stream::dovetail(outer))
    }
}

/// Σ_{z ∈ index} fiber(z), ordered by index first and fiber second.
pub fn sum_order(index: Order, fiber: Fiber) -> Order {
    Arc::new(Sum { index, fiber })
}

struct Lex(Order, Order);

impl LinearOrder for Lex {
    fn label(&self) -> String {
        format!("{}×{}", self.0.label(), self.1.label())
    }
    fn contains(&self, x: &Elem) -> bool {
        x.as_pair().is_some_and(|(a, b)| self.0.contains(a) && self.1.contains(b))
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        let (a, b) = x.as_pair().expect("pair");
        let (c, d) = y.as_pair().expect("pair");
        self.0.compare(a, c).then_with(|| self.1.compare(b, d))
    }
    fn enumerate(&self) -> Option<Stream> {
        let first = self.0.enumerate()?;
        let _ = self.1.enumerate()?;
        let second = self.1.clone();
        let outer = stream::map(first, move |a| {
            let inner = second.enumerate().expect("checked above");
            stream::map(inner, move |b| Elem::pair(a.clone(), b))
        });
        Some(stream::dovetail(outer))
    }
    fn finite_size(&self) -> Option<usize> {
        Some(self.0.finite_size()? * self.1.finite_size()?)
    }
}

/// Lexicographic product: first component decides, ties by the second.
pub fn lex_pair(x: Order, y: Order) -> Order {
    Arc::new(Lex(x, y))
}

/// Kleene–Brouwer comparison of sequences, using `cmp` on entries:
/// `s < t` iff `s` properly extends `t`, or they first differ at `k` with
/// `s(k) < t(k)`.
pub fn kb_cmp_by<T>(s: &[T], t: &[T], mut cmp: impl FnMut(&T, &T) -> Ordering) -> Ordering {
    for (a, b) in s.iter().zip(t) {
        match cmp(a, b) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    t.len().cmp(&s.len())
}

pub fn kb_compare(y: &Order, s: &[Elem], t: &[Elem]) -> Result<Ordering> {
    if let Some(bad) = s.iter().chain(t).find(|x| !y.contains(x)) {
        return Err(Error::NotMember(format!("{bad} in {}", y.label())));
    }
    Ok(kb_cmp_by(s, t, |a, b| y.compare(a, b)))
}

pub type TreeMember = Arc<dyn Fn(&[Elem]) -> bool + Send + Sync>;

struct KbTree {
    label: String,
    alphabet: Order,
    member: TreeMember,
}

impl LinearOrder for KbTree {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn contains(&self, x: &Elem) -> bool {
        x.as_seq()
            .is_some_and(|s| s.iter().all(|e| self.alphabet.contains(e)) && (self.member)(s))
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        let s = x.as_seq().expect("sequence");
        let t = y.as_seq().expect("sequence");
        kb_cmp_by(s, t, |a, b| self.alphabet.compare(a, b))
    }
    fn enumerate(&self) -> Option<Stream> {
        let _ = self.alphabet.enumerate()?;
        let alphabet = self.alphabet.clone();
        let member = self.member.clone();
        let kids: Arc<dyn Fn(&Elem) -> Stream> = Arc::new(move |node: &Elem| {
            let base: Vec<Elem> = node.as_seq().expect("sequence").to_vec();
            let member = member.clone();
            stream::filter_map(alphabet.enumerate().expect("checked"), move |a| {
                let mut v = base.clone();
                v.push(a);
                member(&v).then(|| Elem::seq(v))
            })
        });
        let roots = if (self.member)(&[]) { vec![Elem::seq(vec![])] } else { vec![] };
        Some(stream::tree(roots, kids))
    }
}

/// A prefix-closed tree of sequences over `alphabet` under the
/// Kleene–Brouwer order.
pub fn kb_tree(label: impl Into<String>, alphabet: Order, member: TreeMember) -> Order {
    Arc::new(KbTree { label: label.into(), alphabet, member })
}

/// An order given by closures, for ad hoc constructions and tests.
pub struct FnOrder {
    pub label: String,
    pub contains: Arc<dyn Fn(&Elem) -> bool + Send + Sync>,
    pub compare: Arc<dyn Fn(&Elem, &Elem) -> Ordering + Send + Sync>,
    pub enumerate: Option<Arc<dyn Fn() -> Stream + Send + Sync>>,
}

impl LinearOrder for FnOrder {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn contains(&self, x: &Elem) -> bool {
        (self.contains)(x)
    }
    fn compare(&self, x: &Elem, y: &Elem) -> Ordering {
        (self.compare)(x, y)
    }
    fn enumerate(&self) -> Option<Stream> {
        self.enumerate.as_ref().map(|e| e())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentReport {
    pub found: bool,
    pub chain: Vec<Elem>,
    pub budget_spent: usize,
}

/// Searches the enumeration of `x` for `target` successive record lows:
/// elements each strictly below everything enumerated before them. These
/// form a strictly descending chain. In a well order the record lows stop
/// once the minimum has appeared, so a long chain of them is a meaningful
/// sign of ill-foundedness, unlike arbitrary finite descents, which every
/// infinite well order contains. Each step and each comparison counts
/// against `budget`. A negative answer only means nothing was found within
/// budget.
pub fn probe_descent(x: &Order, target: usize, budget: usize) -> Result<DescentReport> {
    let mut s = x
        .enumerate()
        .ok_or_else(|| Error::MissingEnumeration(x.label()))?;
    Ok(probe_stream(&mut s, |a, b| x.compare(a, b), target, budget))
}

pub(crate) fn probe_stream(
    s: &mut Stream,
    cmp: impl Fn(&Elem, &Elem) -> Ordering,
    target: usize,
    budget: usize,
) -> DescentReport {
    if target == 0 {
        return DescentReport { found: true, chain: vec![], budget_spent: 0 };
    }
    let mut chain: Vec<Elem> = Vec::new();
    let mut spent = 0usize;
    while spent < budget {
        spent += 1;
        let x = match s.next() {
            None => break,
            Some(None) => continue,
            Some(Some(x)) => x,
        };
        let low = match chain.last() {
            None => true,
            Some(m) => {
                spent += 1;
                cmp(&x, m) == Ordering::Less
            }
        };
        if low {
            chain.push(x);
            if chain.len() >= target {
                return DescentReport { found: true, chain, budget_spent: spent };
            }
        }
    }
    DescentReport { found: false, chain: vec![], budget_spent: spent }
}

/// Checks a reported chain: members, strictly descending.
pub fn verify_chain(x: &Order, chain: &[Elem]) -> bool {
    chain.iter().all(|e| x.contains(e))
        && chain.windows(2).all(|w| x.compare(&w[0], &w[1]) == Ordering::Greater)
}

/// Linearity audit over the first `n` enumerated elements: membership,
/// no repeats, irreflexivity, antisymmetry, totality and transitivity.
pub fn audit_linearity(x: &Order, n: usize, max_steps: usize) -> Result<Vec<String>> {
    let mut s = x
        .enumerate()
        .ok_or_else(|| Error::MissingEnumeration(x.label()))?;
    let (elems, _) = stream::take(&mut s, n, max_steps);
    Ok(audit_elements(|a, b| x.compare(a, b), |a| x.contains(a), &elems))
}

pub(crate) fn audit_elements(
    cmp: impl Fn(&Elem, &Elem) -> Ordering,
    contains: impl Fn(&Elem) -> bool,
    elems: &[Elem],
) -> Vec<String> {
    let mut bad = Vec::new();
    for (i, a) in elems.iter().enumerate() {
        if !contains(a) {
            bad.push(format!("enumerated non-member {a}"));
        }
        if cmp(a, a) != Ordering::Equal {
            bad.push(format!("irreflexivity fails at {a}"));
        }
        for b in &elems[i + 1..] {
            if a == b {
                bad.push(format!("repeated element {a}"));
                continue;
            }
            let ab = cmp(a, b);
            if ab == Ordering::Equal {
                bad.push(format!("totality fails: {a} ≡ {b}"));
            }
            if cmp(b, a) != ab.reverse() {
                bad.push(format!("antisymmetry fails: {a}, {b}"));
            }
        }
    }
    for a in elems {
        for b in elems {
            if cmp(a, b) != Ordering::Less {
                continue;
            }
            for c in elems {
                if cmp(b, c) == Ordering::Less && cmp(a, c) != Ordering::Less {
                    bad.push(format!("transitivity fails: {a} < {b} < {c}"));
                }
            }
        }
    }
    bad
}

/// The first `k` enumerated elements, ascending, as `idx<TAB>code<TAB>pretty`.
pub fn dump_prefix(x: &Order, k: usize, max_steps: usize) -> Result<String> {
    let mut s = x
        .enumerate()
        .ok_or_else(|| Error::MissingEnumeration(x.label()))?;
    let (mut elems, _) = stream::take(&mut s, k, max_steps);
    elems.sort_by(|a, b| x.compare(a, b));
    let mut out = String::new();
    for (i, e) in elems.iter().enumerate() {
        writeln!(out, "{i}\t{}\t{e}", e.code()).unwrap();
    }
    Ok(out)
}
