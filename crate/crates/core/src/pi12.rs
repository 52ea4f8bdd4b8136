//! The predilators `D^n_ψ` attached to a decidable matrix `θ`, partial
//! morphisms, the preptykes `P^n_ψ` and `P⁺_ψ`, and the morphisms `κ^n`.
//!
//! A formula `ψ` is never materialized. Everything is driven by `θ(s, t, n)`
//! with `s` a binary sequence and `t` a sequence of naturals. An index
//! `i < len(t)` stands for the sequence it codes under the canonical
//! sequence code, and every natural codes exactly one sequence.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;

use crate::codec::{decode_seq_u64, encode_seq, unpair_u64};
use crate::error::{Error, Result};
use crate::finord::{all_embeddings, FinEmbedding};
use crate::morph::{check_morphism, compose, FnMorphism, Morphism, MorphismImpl};
use crate::orders::{self, finite, kb_cmp_by, kb_tree, lex_pair, omega, succ_order, FnOrder, Order};
use crate::predil::{Predilator, PredilatorImpl, TraceElem};
use crate::ptyx::{plus_one, plus_one_mor, sum_of, sum_ptyx, Preptyx, PreptyxImpl, SumPtyx};
use crate::star::xi;
use crate::stream::{self, Stream};
use crate::Elem;

type Eval = Arc<dyn Fn(&[u64], &[u64], u64) -> bool + Send + Sync>;

struct ThetaInner {
    label: String,
    eval: Eval,
    dpsi: Mutex<HashMap<u64, Predilator>>,
    ppsi: Mutex<HashMap<u64, Preptyx>>,
}

/// A total decidable relation `θ(s, t, n)`. Handles memoize `D^n_ψ` and
/// `P^n_ψ`, so repeated requests return the same predilator and preptyx.
#[derive(Clone)]
pub struct ThetaOracle(Arc<ThetaInner>);

impl fmt::Debug for ThetaOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "θ[{}]", self.0.label)
    }
}

impl ThetaOracle {
    pub fn new(label: impl Into<String>, eval: impl Fn(&[u64], &[u64], u64) -> bool + Send + Sync + 'static) -> Self {
        ThetaOracle(Arc::new(ThetaInner {
            label: label.into(),
            eval: Arc::new(eval),
            dpsi: Mutex::new(HashMap::new()),
            ppsi: Mutex::new(HashMap::new()),
        }))
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn eval(&self, s: &[u64], t: &[u64], n: u64) -> bool {
        (self.0.eval)(s, t, n)
    }

    /// `D^n_ψ`.
    pub fn d_psi(&self, n: u64) -> Predilator {
        let mut memo = self.0.dpsi.lock().unwrap();
        memo.entry(n)
            .or_insert_with(|| {
                let (eval, label) = (self.0.eval.clone(), format!("D^{n}[{}]", self.0.label));
                tree_predilator(label.clone(), Entry::Plain, move |x| dpsi_value_with(&eval, &label, n, x))
            })
            .clone()
    }

    /// `P^n_ψ`.
    pub fn p_psi(&self, n: u64) -> Preptyx {
        if let Some(p) = self.0.ppsi.lock().unwrap().get(&n) {
            return p.clone();
        }
        let p = Preptyx::new(PPsi {
            label: format!("P^{n}[{}]", self.0.label),
            eval: self.0.eval.clone(),
            n,
            d_n: self.d_psi(n),
        });
        self.0.ppsi.lock().unwrap().entry(n).or_insert(p).clone()
    }
}

/// `θ(s,t,n)` never holds.
pub fn theta_false() -> ThetaOracle {
    static T: OnceLock<ThetaOracle> = OnceLock::new();
    T.get_or_init(|| ThetaOracle::new("false", |_, _, _| false)).clone()
}

/// `θ(s,t,n)` always holds.
pub fn theta_true() -> ThetaOracle {
    static T: OnceLock<ThetaOracle> = OnceLock::new();
    T.get_or_init(|| ThetaOracle::new("true", |_, _, _| true)).clone()
}

/// `θ(s,t,n) :⇔ len(t) = n+1`, so that `T^n_Z` is all sequences of length
/// at most `n`, a well founded tree for every `Z`.
pub fn theta_len() -> ThetaOracle {
    static T: OnceLock<ThetaOracle> = OnceLock::new();
    T.get_or_init(|| ThetaOracle::new("len", |_, t, n| t.len() as u64 == n + 1)).clone()
}

/// A decision table with lines `s-code<TAB>t-code<TAB>n<TAB>0|1`, false
/// wherever no line applies. Blank lines and lines starting with `#` are
/// skipped.
pub fn theta_table(label: impl Into<String>, text: &str) -> Result<ThetaOracle> {
    let mut table: HashMap<(BigUint, BigUint, u64), bool> = HashMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::Malformed { line: no + 1, msg: msg.to_string() };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(bad("expected four tab separated columns"));
        }
        let s: BigUint = cols[0].trim().parse().map_err(|_| bad("bad s-code"))?;
        let t: BigUint = cols[1].trim().parse().map_err(|_| bad("bad t-code"))?;
        let n: u64 = cols[2].trim().parse().map_err(|_| bad("bad n"))?;
        let v = match cols[3].trim() {
            "0" => false,
            "1" => true,
            _ => return Err(bad("value must be 0 or 1")),
        };
        if let Some(old) = table.insert((s.clone(), t.clone(), n), v) {
            if old != v {
                return Err(Error::Contradiction(format!("line {}: ({s}, {t}, {n})", no + 1)));
            }
        }
    }
    Ok(ThetaOracle::new(label, move |s, t, n| {
        let code = |v: &[u64]| encode_seq(&v.iter().map(|&a| BigUint::from(a)).collect::<Vec<_>>());
        table.get(&(code(s), code(t), n)).copied().unwrap_or(false)
    }))
}

/// Registry lookup: `false`, `true`, `len`, or a path to a decision table.
pub fn theta_by_name(name: &str) -> Result<ThetaOracle> {
    match name {
        "false" => Ok(theta_false()),
        "true" => Ok(theta_true()),
        "len" => Ok(theta_len()),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("theta {path}: {e}")))?;
            theta_table(path, &text)
        }
    }
}

/// A set of naturals by its characteristic function.
#[derive(Clone)]
pub struct SetOracle {
    label: String,
    member: Arc<dyn Fn(u64) -> bool + Send + Sync>,
}

impl fmt::Debug for SetOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z[{}]", self.label)
    }
}

impl SetOracle {
    pub fn new(label: impl Into<String>, member: impl Fn(u64) -> bool + Send + Sync + 'static) -> Self {
        SetOracle { label: label.into(), member: Arc::new(member) }
    }

    pub fn empty() -> Self {
        SetOracle::new("∅", |_| false)
    }

    pub fn all() -> Self {
        SetOracle::new("ℕ", |_| true)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn member(&self, i: u64) -> bool {
        (self.member)(i)
    }

    /// `Z[m]`, the first `m` values of the characteristic function.
    pub fn prefix(&self, m: usize) -> Vec<u64> {
        (0..m as u64).map(|i| self.member(i) as u64).collect()
    }
}

/// `t ∈ T^n_s`: `len(t) ≤ len(s)` and `¬θ(s[k], t[k], n)` for all
/// `k ≤ len(t)`.
pub fn tree_member(theta: &ThetaOracle, n: u64, s: &[u64], t: &[u64]) -> bool {
    member_with(&theta.0.eval, n, s, t)
}

fn member_with(eval: &Eval, n: u64, s: &[u64], t: &[u64]) -> bool {
    t.len() <= s.len() && (0..=t.len()).all(|k| !eval(&s[..k], &t[..k], n))
}

/// `t ∈ T^n_Z`. Since `T^n_{Z[m]}` only grows with `m` and holds no
/// sequence longer than `m`, testing against `Z[len(t)]` decides it.
pub fn tree_member_z(theta: &ThetaOracle, n: u64, z: &SetOracle, t: &[u64]) -> bool {
    tree_member(theta, n, &z.prefix(t.len()), t)
}

/// `T^n_Z` under the Kleene–Brouwer order.
pub fn tz_order(theta: &ThetaOracle, n: u64, z: &SetOracle) -> Order {
    let (th, z2) = (theta.clone(), z.clone());
    kb_tree(
        format!("T^{n}_{}[{}]", z.label(), theta.label()),
        omega(),
        Arc::new(move |t: &[Elem]| {
            let v: Option<Vec<u64>> = t.iter().map(Elem::as_nat).collect();
            v.is_some_and(|v| tree_member_z(&th, n, &z2, &v))
        }),
    )
}

/// The sequence coded by an index.
pub fn index_seq(i: usize) -> Vec<u64> {
    decode_seq_u64(i as u64)
}

/// The monotonicity condition of `D^n_ψ`: indices below `len(t)` that code
/// members of `T^n_s` are mapped KB-monotonically by `t`.
fn monotone(eval: &Eval, n: u64, s: &[u64], t: &[Elem], cmp: &dyn Fn(&Elem, &Elem) -> Ordering) -> bool {
    let codes: Vec<(usize, Vec<u64>)> = (0..t.len())
        .map(|i| (i, index_seq(i)))
        .filter(|(_, c)| member_with(eval, n, s, c))
        .collect();
    codes.iter().all(|(i, a)| {
        codes.iter().all(|(j, b)| kb_cmp_by(a, b, u64::cmp) != Ordering::Less || cmp(&t[*i], &t[*j]) == Ordering::Less)
    })
}

fn bits_of(entries: &[Elem]) -> Option<Vec<u64>> {
    entries.iter().map(|e| e.as_nat().filter(|&b| b < 2)).collect()
}

fn dpsi_value_with(eval: &Eval, label: &str, n: u64, x: Order) -> Order {
    let (eval, x2) = (eval.clone(), x.clone());
    kb_tree(
        format!("{label}({})", x.label()),
        lex_pair(finite(2), x),
        Arc::new(move |st: &[Elem]| {
            let (s, t): (Vec<Elem>, Vec<Elem>) =
                st.iter().map(|e| e.as_pair().map(|(a, b)| (a.clone(), b.clone())).expect("pair")).unzip();
            bits_of(&s).is_some_and(|s| monotone(&eval, n, &s, &t, &|a, b| x2.compare(a, b)))
        }),
    )
}

/// `\bar{D^n_ψ}(X)`: sequences `s×t` over `2×X`, elements of the form
/// `Seq[Pair(s(i), t(i))]`, under the KB order.
pub fn dpsi_value(theta: &ThetaOracle, n: u64, x: &Order) -> Order {
    dpsi_value_with(&theta.0.eval, &format!("D^{n}[{}]", theta.label()), n, x.clone())
}

/// `s×t` from its two components.
pub fn st_elem(s: &[u64], t: &[Elem]) -> Elem {
    Elem::seq(s.iter().zip(t).map(|(&b, x)| Elem::pair(Elem::Nat(b), x.clone())).collect())
}

/// How the `X` entry sits inside a sequence entry.
#[derive(Clone, Copy)]
enum Entry {
    /// `Pair(s(i), t(i))`.
    Plain,
    /// `Pair(r(i), Pair(s(i), t(i)))`.
    Tagged,
}

impl Entry {
    fn point(self, e: &Elem) -> &Elem {
        let (_, b) = e.as_pair().expect("sequence entry");
        match self {
            Entry::Plain => b,
            Entry::Tagged => b.as_pair().expect("sequence entry").1,
        }
    }
    fn relabel(self, e: &Elem, x: Elem) -> Elem {
        let (a, b) = e.as_pair().expect("sequence entry");
        match self {
            Entry::Plain => Elem::pair(a.clone(), x),
            Entry::Tagged => Elem::pair(a.clone(), Elem::pair(b.as_pair().expect("sequence entry").0.clone(), x)),
        }
    }
}

/// A coded predilator whose value at `m` is a tree over some alphabet
/// involving `m`, acting on the `X` entries of each sequence entry.
struct TreePredil {
    label: String,
    entry: Entry,
    value: Box<dyn Fn(Order) -> Order + Send + Sync>,
}

fn tree_predilator(label: String, entry: Entry, value: impl Fn(Order) -> Order + Send + Sync + 'static) -> Predilator {
    Predilator::new(TreePredil { label, entry, value: Box::new(value) })
}

impl TreePredil {
    fn at(&self, n: usize) -> Order {
        (self.value)(finite(n))
    }
    fn points<'a>(&self, x: &'a Elem) -> impl Iterator<Item = usize> + 'a {
        let entry = self.entry;
        x.as_seq()
            .expect("sequence")
            .iter()
            .map(move |e| entry.point(e).as_nat().expect("finite order element") as usize)
    }
}

impl PredilatorImpl for TreePredil {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn contains(&self, n: usize, x: &Elem) -> bool {
        self.at(n).contains(x)
    }
    fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering {
        self.at(n).compare(x, y)
    }
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        let v = x.as_seq().expect("sequence");
        let entry = self.entry;
        Elem::seq(
            v.iter()
                .map(|e| entry.relabel(e, Elem::Nat(f.apply(entry.point(e).as_nat().expect("point") as usize) as u64)))
                .collect(),
        )
    }
    fn supp(&self, _n: usize, x: &Elem) -> Vec<usize> {
        let mut a: Vec<usize> = self.points(x).collect();
        a.sort_unstable();
        a.dedup();
        a
    }
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        let v = y.as_seq()?;
        let entry = self.entry;
        let back: Option<Vec<Elem>> = v
            .iter()
            .map(|e| {
                let p = entry.point(e).as_nat()? as usize;
                Some(entry.relabel(e, Elem::Nat(f.preimage(p)? as u64)))
            })
            .collect();
        let x = Elem::seq(back?);
        self.contains(f.domain(), &x).then_some(x)
    }
    fn elements(&self, n: usize) -> Stream {
        self.at(n).enumerate().expect("finite alphabet")
    }
}

/// `D^n_ψ`, shared per `(θ, n)`.
pub fn d_psi(theta: &ThetaOracle, n: u64) -> Predilator {
    theta.d_psi(n)
}

/// The verified branch prefixes `g[m]×h[m]`, `m < len`, of
/// `\bar{D^n_ψ}(X)` with `X = T^n_Z + 1`, where `g` is the characteristic
/// function of `Z` and `h(i)` is `i` when `i` codes a member of `T^n_Z` and
/// `⊤` otherwise. Longer prefixes are smaller, so this is a strictly
/// descending chain.
#[derive(Clone)]
pub struct BranchWitness {
    pub order: Order,
    pub chain: Vec<Elem>,
}

impl fmt::Debug for BranchWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BranchWitness").field("order", &self.order.label()).field("chain", &self.chain).finish()
    }
}

/// Record lows searched for before trusting that `T^n_Z` is well founded.
const WF_PROBE_LEN: usize = 24;
const WF_PROBE_BUDGET: usize = 20_000;

/// The branch `h` of the class-sized construction.
fn branch_h(theta: &ThetaOracle, n: u64, z: &SetOracle, i: usize) -> Elem {
    let c = index_seq(i);
    if tree_member_z(theta, n, z, &c) {
        Elem::old(Elem::nats(&c))
    } else {
        Elem::Top
    }
}

pub fn branch_witness(theta: &ThetaOracle, n: u64, z: &SetOracle, len: usize) -> Result<BranchWitness> {
    let tree = tz_order(theta, n, z);
    let probe = orders::probe_descent(&tree, WF_PROBE_LEN, WF_PROBE_BUDGET)?;
    if probe.found {
        return Err(Error::Verification(format!(
            "{} has a descending chain of length {}",
            tree.label(),
            probe.chain.len()
        )));
    }
    let x = succ_order(tree);
    let order = dpsi_value(theta, n, &x);
    let g = z.prefix(len);
    let h: Vec<Elem> = (0..len).map(|i| branch_h(theta, n, z, i)).collect();
    let chain: Vec<Elem> = (0..len).map(|m| st_elem(&g[..m], &h[..m])).collect();
    if let Some(bad) = chain.iter().find(|e| !order.contains(e)) {
        return Err(Error::Verification(format!("{bad} is not in {}", order.label())));
    }
    if !orders::verify_chain(&order, &chain) {
        return Err(Error::Verification(format!("branch prefixes do not descend in {}", order.label())));
    }
    Ok(BranchWitness { order, chain })
}

// Partial morphisms

/// `(m, σ)` as an element of `ΣE`.
pub fn sigma(m: usize, x: Elem) -> Elem {
    Elem::pair(Elem::Nat(m as u64), x)
}

fn split_sigma(e: &Elem) -> Option<(usize, &Elem)> {
    let (m, x) = e.as_pair()?;
    Some((m.as_nat()? as usize, x))
}

/// Candidate elements with a given code, in the shapes used by the
/// predilators of this crate: sequences of pairs, sequences, naturals.
fn decode_candidates(c: u64) -> Vec<Elem> {
    let items = decode_seq_u64(c);
    let pairs = items
        .iter()
        .map(|&a| {
            let (x, y) = unpair_u64(a);
            Elem::pair(Elem::Nat(x), Elem::Nat(y))
        })
        .collect();
    vec![Elem::seq(pairs), Elem::nats(&items), Elem::Nat(c)]
}

/// The `(m, σ) ∈ ΣD` coded by `i`, if any.
pub fn sigma_decode(d: &Predilator, i: usize) -> Option<(usize, Elem)> {
    let (m, c) = unpair_u64(i as u64);
    let m = m as usize;
    decode_candidates(c).into_iter().find(|x| d.contains(m, x)).map(|x| (m, x))
}

/// Why a sequence fails to be a partial morphism `D ⇒p E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartialWitness {
    /// `r(index)` is neither `⊤` nor in `ΣE`.
    BadEntry { index: usize },
    /// `index` codes `(arity, σ) ∈ ΣD` but `r(index)` is not over `arity`.
    Arity { index: usize, arity: usize },
    /// `σ < τ` at positions `below`, `above` while their values are not.
    Order { below: usize, above: usize },
    /// `E(f)(ν(σ)) ≠ ν(D(f)(σ))` for `σ` at `from`, `D(f)(σ)` at `to`.
    Naturality { from: usize, to: usize, f: FinEmbedding },
}

impl fmt::Display for PartialWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartialWitness::BadEntry { index } => write!(f, "entry {index} is not in ΣE+1"),
            PartialWitness::Arity { index, arity } => write!(f, "entry {index} must have arity {arity}"),
            PartialWitness::Order { below, above } => write!(f, "entries {below} < {above} are not preserved"),
            PartialWitness::Naturality { from, to, f: g } => {
                write!(f, "entries {from}, {to} are not natural along {:?}", g.values())
            }
        }
    }
}

/// A defined value `ν^r_m(σ) = ρ` at position `index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialValue {
    pub index: usize,
    pub arity: usize,
    pub arg: Elem,
    pub value: Elem,
}

/// Clause (i) and entry validity, returning the defined values.
fn defined_values(r: &[Elem], d: &Predilator, e: &Predilator) -> std::result::Result<Vec<PartialValue>, PartialWitness> {
    let mut out = Vec::new();
    for (i, ri) in r.iter().enumerate() {
        let entry = if ri.is_top() {
            None
        } else {
            match split_sigma(ri) {
                Some((m, rho)) if e.contains(m, rho) => Some((m, rho)),
                _ => return Err(PartialWitness::BadEntry { index: i }),
            }
        };
        if let Some((m, sig)) = sigma_decode(d, i) {
            match entry {
                Some((k, rho)) if k == m => {
                    out.push(PartialValue { index: i, arity: m, arg: sig, value: rho.clone() })
                }
                _ => return Err(PartialWitness::Arity { index: i, arity: m }),
            }
        }
    }
    Ok(out)
}

fn check_core(r: &[Elem], d: &Predilator, e: &Predilator) -> std::result::Result<Vec<PartialValue>, PartialWitness> {
    let vals = defined_values(r, d, e)?;
    for a in &vals {
        for b in &vals {
            if a.arity == b.arity
                && d.compare(a.arity, &a.arg, &b.arg) == Ordering::Less
                && e.compare(a.arity, &a.value, &b.value) != Ordering::Less
            {
                return Err(PartialWitness::Order { below: a.index, above: b.index });
            }
            if a.index == b.index || a.arity > b.arity {
                continue;
            }
            for f in all_embeddings(a.arity, b.arity) {
                if d.act(&f, &a.arg) == b.arg && e.act(&f, &a.value) != b.value {
                    return Err(PartialWitness::Naturality { from: a.index, to: b.index, f });
                }
            }
        }
    }
    Ok(vals)
}

/// Decides whether `r` is a partial morphism `D ⇒p E`, checking every
/// prefix `r[k]` as well; a witness names the shortest failing prefix.
/// Only finitely many arities carry defined values, so clause (iii) is
/// checked over all embeddings between them.
pub fn check_partial_morphism(r: &[Elem], d: &Predilator, e: &Predilator) -> std::result::Result<(), PartialWitness> {
    for k in 0..=r.len() {
        check_core(&r[..k], d, e)?;
    }
    Ok(())
}

/// The defined values `ν^r_m(σ)` of a partial morphism.
pub fn partial_values(r: &[Elem], d: &Predilator, e: &Predilator) -> std::result::Result<Vec<PartialValue>, PartialWitness> {
    check_core(r, d, e)
}

/// `g[k]`: position `i` holds the `(m, σ) ∈ ΣD` it codes, or `⊤`.
pub fn diagonal(d: &Predilator, k: usize) -> Vec<Elem> {
    (0..k).map(|i| sigma_decode(d, i).map_or(Elem::Top, |(m, x)| sigma(m, x))).collect()
}

/// `μ∘r`: entries `(m, τ)` become `(m, μ_m(τ))`, `⊤` stays.
pub fn compose_partial(mu: &Morphism, r: &[Elem]) -> Result<Vec<Elem>> {
    let src = mu.source();
    r.iter()
        .map(|ri| {
            if ri.is_top() {
                return Ok(Elem::Top);
            }
            match split_sigma(ri) {
                Some((m, x)) if src.contains(m, x) => Ok(sigma(m, mu.component(m, x))),
                _ => Err(Error::NotMember(format!("{ri} in Σ{}+1", src.label()))),
            }
        })
        .collect()
}

/// `ΣE + 1`, ordered by arity, then within `E(m)`, with `⊤` on top.
pub fn sigma_plus_one(e: &Predilator) -> Order {
    let (e1, e2, e3) = (e.clone(), e.clone(), e.clone());
    Arc::new(FnOrder {
        label: format!("Σ{}+1", e.label()),
        contains: Arc::new(move |x| x.is_top() || split_sigma(x).is_some_and(|(m, y)| e1.contains(m, y))),
        compare: Arc::new(move |x, y| match (split_sigma(x), split_sigma(y)) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some((m, a)), Some((k, b))) => m.cmp(&k).then_with(|| e2.compare(m, a, b)),
        }),
        enumerate: Some(Arc::new(move || {
            let e = e3.clone();
            let tagged = stream::dovetail(stream::from_iter((0usize..).map(move |m| {
                stream::map(e.elements(m), move |x| sigma(m, x))
            })));
            stream::chain(stream::from_iter([Elem::Top]), tagged)
        })),
    })
}

// P^n_ψ

/// `r×s×t`, entries `Pair(r(i), Pair(s(i), t(i)))`.
pub fn rst_elem(r: &[Elem], s: &[u64], t: &[Elem]) -> Elem {
    Elem::seq(
        r.iter()
            .zip(s.iter().zip(t))
            .map(|(a, (&b, x))| Elem::pair(a.clone(), Elem::pair(Elem::Nat(b), x.clone())))
            .collect(),
    )
}

/// The three components of `r×s×t`.
pub fn rst_parts(x: &Elem) -> Option<(Vec<Elem>, Vec<u64>, Vec<Elem>)> {
    let mut r = Vec::new();
    let mut s = Vec::new();
    let mut t = Vec::new();
    for e in x.as_seq()? {
        let (a, b) = e.as_pair()?;
        let (bit, y) = b.as_pair()?;
        r.push(a.clone());
        s.push(bit.as_nat()?);
        t.push(y.clone());
    }
    Some((r, s, t))
}

fn ppsi_value_with(eval: &Eval, label: &str, n: u64, d_n: &Predilator, e: &Predilator, x: Order) -> Order {
    let (eval, d_n, e2, x2) = (eval.clone(), d_n.clone(), e.clone(), x.clone());
    kb_tree(
        format!("{label}({})({})", e.label(), x.label()),
        lex_pair(sigma_plus_one(e), lex_pair(finite(2), x)),
        Arc::new(move |rst: &[Elem]| {
            let Some((r, s, t)) = rst_parts(&Elem::seq(rst.to_vec())) else { return false };
            s.iter().all(|&b| b < 2)
                && monotone(&eval, n + 1, &s, &t, &|a, b| x2.compare(a, b))
                && check_core(&r, &d_n, &e2).is_ok()
        }),
    )
}

/// `P^n_ψ(E)(X)` for an arbitrary order `X`.
pub fn p_psi_value(theta: &ThetaOracle, n: u64, e: &Predilator, x: &Order) -> Order {
    let d_n = theta.d_psi(n);
    ppsi_value_with(&theta.0.eval, &format!("P^{n}[{}]", theta.label()), n, &d_n, e, x.clone())
}

struct PPsi {
    label: String,
    eval: Eval,
    n: u64,
    d_n: Predilator,
}

impl PreptyxImpl for PPsi {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn apply_obj(&self, e: &Predilator) -> Predilator {
        let (eval, label, n, d_n, e2) = (self.eval.clone(), self.label.clone(), self.n, self.d_n.clone(), e.clone());
        tree_predilator(format!("{}({})", self.label, e.label()), Entry::Tagged, move |x| {
            ppsi_value_with(&eval, &label, n, &d_n, &e2, x)
        })
    }
    fn apply_mor(&self, nu: &Morphism, source: Predilator, target: Predilator) -> Morphism {
        Morphism::new(PPsiMor { label: format!("{}({})", self.label, nu.label()), nu: nu.clone(), source, target })
    }
    fn supp_elem(&self, d: &Predilator, _n: usize, x: &Elem) -> Vec<TraceElem> {
        let (r, _, _) = rst_parts(x).expect("P^n_ψ element");
        r.iter().filter_map(split_sigma).map(|(m, y)| d.kernel(m, y)).collect()
    }
}

struct PPsiMor {
    label: String,
    nu: Morphism,
    source: Predilator,
    target: Predilator,
}

impl MorphismImpl for PPsiMor {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn source(&self) -> Predilator {
        self.source.clone()
    }
    fn target(&self) -> Predilator {
        self.target.clone()
    }
    fn component(&self, _n: usize, x: &Elem) -> Elem {
        let (r, s, t) = rst_parts(x).expect("P^n_ψ element");
        rst_elem(&compose_partial(&self.nu, &r).expect("valid entries"), &s, &t)
    }
    fn preimage(&self, n: usize, y: &Elem) -> Option<Elem> {
        let (r, s, t) = rst_parts(y)?;
        let back: Option<Vec<Elem>> = r
            .iter()
            .map(|ri| match split_sigma(ri) {
                None => Some(Elem::Top),
                Some((m, z)) => Some(sigma(m, self.nu.preimage(m, z)?)),
            })
            .collect();
        let x = rst_elem(&back?, &s, &t);
        self.source.contains(n, &x).then_some(x)
    }
}

/// `P^n_ψ`, shared per `(θ, n)`.
pub fn p_psi(theta: &ThetaOracle, n: u64) -> Preptyx {
    theta.p_psi(n)
}

/// `ζ^n: D^{n+1}_ψ ⇒ P^n_ψ(D^n_ψ)`, `s×t ↦ g[len(s)]×s×t`.
pub fn zeta(theta: &ThetaOracle, n: u64) -> Morphism {
    let (d_n, d_n1) = (theta.d_psi(n), theta.d_psi(n + 1));
    let target = theta.p_psi(n).apply_obj(&d_n);
    let d2 = d_n.clone();
    Morphism::new(FnMorphism {
        label: format!("ζ^{n}[{}]", theta.label()),
        source: d_n1,
        target,
        component: Arc::new(move |_, x| {
            let v = x.as_seq().expect("D^{n+1}_ψ element");
            let (s, t): (Vec<u64>, Vec<Elem>) = v
                .iter()
                .map(|e| {
                    let (b, y) = e.as_pair().expect("pair");
                    (b.as_nat().expect("bit"), y.clone())
                })
                .unzip();
            rst_elem(&diagonal(&d_n, s.len()), &s, &t)
        }),
        preimage: Arc::new(move |_, y| {
            let (r, s, t) = rst_parts(y)?;
            (r == diagonal(&d2, r.len())).then(|| st_elem(&s, &t))
        }),
    })
}

/// The branch `g×h₀×h₁` of `P^n_ψ(D^n_ψ)(X)` with `X = T^{n+1}_Z + 1`:
/// `g` the diagonal, `h₀` the characteristic function of `Z`, `h₁` the
/// default-`⊤` branch for `T^{n+1}_Z`.
pub fn p_branch_witness(theta: &ThetaOracle, n: u64, z: &SetOracle, len: usize) -> Result<BranchWitness> {
    let inner = branch_witness(theta, n + 1, z, len)?;
    let x = succ_order(tz_order(theta, n + 1, z));
    let d_n = theta.d_psi(n);
    let order = p_psi_value(theta, n, &d_n, &x);
    let g = diagonal(&d_n, len);
    let h0 = z.prefix(len);
    let h1: Vec<Elem> = (0..len).map(|i| branch_h(theta, n + 1, z, i)).collect();
    let chain: Vec<Elem> = (0..len).map(|m| rst_elem(&g[..m], &h0[..m], &h1[..m])).collect();
    debug_assert_eq!(inner.chain.len(), chain.len());
    if let Some(bad) = chain.iter().find(|e| !order.contains(e)) {
        return Err(Error::Verification(format!("{bad} is not in {}", order.label())));
    }
    if !orders::verify_chain(&order, &chain) {
        return Err(Error::Verification(format!("branch prefixes do not descend in {}", order.label())));
    }
    Ok(BranchWitness { order, chain })
}

// P⁺_ψ and the κ chain

/// `P⁺_ψ = (D⁰_ψ + 1) + P*_ψ` with `P_ψ = Σ_{n∈ℕ} P^n_ψ` and `P*_ψ = (P_ψ)*`.
#[derive(Clone)]
pub struct PPlus {
    theta: ThetaOracle,
    sum: SumPtyx,
    star: Preptyx,
    plus: SumPtyx,
}

pub fn p_plus(theta: &ThetaOracle) -> PPlus {
    let th = theta.clone();
    let sum = sum_ptyx(omega(), move |z| Some(th.p_psi(z.as_nat()?)));
    let star = sum.ptyx.star();
    let base = crate::ptyx::constant_ptyx(&plus_one(&theta.d_psi(0)));
    let plus = sum_of(vec![base, star.clone()]);
    PPlus { theta: theta.clone(), sum, star, plus }
}

impl PPlus {
    pub fn theta(&self) -> &ThetaOracle {
        &self.theta
    }

    pub fn ptyx(&self) -> Preptyx {
        self.plus.ptyx.clone()
    }

    /// `P_ψ`.
    pub fn p_sum(&self) -> Preptyx {
        self.sum.ptyx.clone()
    }

    /// `P*_ψ`.
    pub fn p_star(&self) -> Preptyx {
        self.star.clone()
    }

    /// `D⁰_ψ + 1`.
    pub fn base(&self) -> Predilator {
        plus_one(&self.theta.d_psi(0))
    }

    /// `π⁰: D⁰_ψ+1 ⇒ P⁺_ψ(E)`.
    pub fn pi0(&self, e: &Predilator) -> Morphism {
        self.plus.injection(&Elem::Nat(0), e)
    }

    /// `π¹: P*_ψ(E) ⇒ P⁺_ψ(E)`.
    pub fn pi1(&self, e: &Predilator) -> Morphism {
        self.plus.injection(&Elem::Nat(1), e)
    }

    /// `ι^n: P^n_ψ(D^n_ψ) ⇒ P_ψ(D^n_ψ)`.
    pub fn iota(&self, n: u64) -> Morphism {
        self.sum.injection(&Elem::Nat(n), &self.theta.d_psi(n))
    }

    pub fn zeta(&self, n: u64) -> Morphism {
        zeta(&self.theta, n)
    }
}

/// `g ∘ f`, refusing mismatched endpoints.
fn then(g: &Morphism, f: &Morphism) -> Result<Morphism> {
    if f.target().id() != g.source().id() {
        return Err(Error::DomainMismatch(format!(
            "{} ends at {} but {} starts at {}",
            f.label(),
            f.target().label(),
            g.label(),
            g.source().label()
        )));
    }
    Ok(compose(g, f))
}

fn audited(mu: Morphism, arity_bound: usize, elem_budget: usize) -> Result<Morphism> {
    let rep = check_morphism(&mu, arity_bound, elem_budget);
    if rep.is_clean() {
        Ok(mu)
    } else {
        Err(Error::Verification(rep.to_string()))
    }
}

/// `κ⁰, …, κ^n: D^k_ψ+1 ⇒ E` from `χ: P⁺_ψ(E) ⇒ E`, by
/// `κ⁰ = χ∘π⁰` and `κ^{k+1} = χ∘π¹∘P*_ψ(κ^k)∘ξ^k∘(ι^k+1)∘(ζ^k+1)`.
/// Each stage is audited before the next one is built.
pub fn kappa_chain(
    pp: &PPlus,
    e: &Predilator,
    chi: &Morphism,
    n: usize,
    arity_bound: usize,
    elem_budget: usize,
) -> Result<Vec<Morphism>> {
    let pe = pp.ptyx().apply_obj(e);
    if chi.source().id() != pe.id() || chi.target().id() != e.id() {
        return Err(Error::DomainMismatch(format!("{} is not a morphism {} ⇒ {}", chi.label(), pe.label(), e.label())));
    }
    let chi = audited(chi.clone(), arity_bound, elem_budget)?;
    let mut out = vec![audited(then(&chi, &pp.pi0(e))?, arity_bound, elem_budget)?];
    let head = then(&chi, &pp.pi1(e))?;
    for k in 0..n as u64 {
        let d_k = pp.theta.d_psi(k);
        let tail = then(&plus_one_mor(&pp.iota(k)), &plus_one_mor(&pp.zeta(k)))?;
        let tail = then(&xi(&pp.sum.ptyx, &d_k)?, &tail)?;
        let prev = out.last().expect("κ⁰ exists");
        let tail = then(&pp.star.apply_mor(prev), &tail)?;
        out.push(audited(then(&head, &tail)?, arity_bound, elem_budget)?);
    }
    Ok(out)
}
