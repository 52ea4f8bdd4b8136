//! The numeric tuple encoding of a predilator, truncated to finite bounds.
//!
//! ```text
//! (0,n,σ)      σ ∈ D(n)
//! (1,n,σ,τ)    σ < τ in D(n)
//! (2,f,σ,τ)    D(f)(σ) = τ, with f coded as ⟨k, f(0), …, f(m−1)⟩
//! (3,n,σ,a)    supp_n(σ) = a, with a coded as a bitmask
//! ```

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{Predilator, PredilatorImpl, TraceElem};
use crate::error::{Error, Result};
use crate::finord::{all_embeddings, subset_mask, FinEmbedding};
use crate::stream::{self, Stream};
use crate::Elem;

/// Encodes `D` restricted to arities `≤ arity_bound`. The window of the first
/// `elem_budget` elements per arity is closed under the action: the output
/// describes every `D(e)(σ₀)` for kernels `σ₀` of window elements, so that
/// the decoded fragment is itself lawful within its bound.
pub fn encode_fragment(d: &Predilator, arity_bound: usize, elem_budget: usize) -> String {
    let mut kernels: BTreeSet<TraceElem> = BTreeSet::new();
    for n in 0..=arity_bound {
        for x in d.window(n, elem_budget) {
            kernels.insert(d.kernel(n, &x));
        }
    }
    let mut members: Vec<Vec<Elem>> = vec![Vec::new(); arity_bound + 1];
    for (n, slot) in members.iter_mut().enumerate() {
        for k in kernels.iter().filter(|k| k.arity <= n) {
            for e in all_embeddings(k.arity, n) {
                slot.push(d.act(&e, &k.elem));
            }
        }
    }
    let mut tuples: BTreeSet<Vec<BigUint>> = BTreeSet::new();
    let big = |n: usize| BigUint::from(n);
    for (n, xs) in members.iter().enumerate() {
        let codes: Vec<BigUint> = xs.iter().map(Elem::code).collect();
        for (x, c) in xs.iter().zip(&codes) {
            tuples.insert(vec![big(0), big(n), c.clone()]);
            tuples.insert(vec![big(3), big(n), c.clone(), subset_mask(&d.supp(n, x))]);
        }
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in xs.iter().enumerate() {
                if i != j && d.compare(n, x, y) == Ordering::Less {
                    tuples.insert(vec![big(1), big(n), codes[i].clone(), codes[j].clone()]);
                }
            }
        }
    }
    for m in 0..=arity_bound {
        for k in m..=arity_bound {
            for f in all_embeddings(m, k) {
                let fc = f.code();
                for x in &members[m] {
                    tuples.insert(vec![big(2), fc.clone(), x.code(), d.act(&f, x).code()]);
                }
            }
        }
    }
    let mut out = String::new();
    for t in tuples {
        let fields: Vec<String> = t.iter().map(|b| b.to_string()).collect();
        out.push('(');
        out.push_str(&fields.join(","));
        out.push_str(")\n");
    }
    out
}

/// A decoded fragment together with the bounds that re-encode it exactly.
pub struct DecodedFragment {
    pub predilator: Predilator,
    pub arity_bound: usize,
    pub max_elems: usize,
}

struct Fragment {
    members: Vec<Vec<BigUint>>,
    member_set: HashSet<(usize, BigUint)>,
    less: HashSet<(usize, BigUint, BigUint)>,
    act: HashMap<(FinEmbedding, BigUint), BigUint>,
    back: HashMap<(FinEmbedding, BigUint), BigUint>,
    supp: HashMap<(usize, BigUint), Vec<usize>>,
}

fn code(x: &Elem) -> Option<BigUint> {
    match x {
        Elem::Code(c) => Some((**c).clone()),
        Elem::Nat(n) => Some(BigUint::from(*n)),
        _ => None,
    }
}

impl PredilatorImpl for Fragment {
    fn label(&self) -> String {
        "fragment".into()
    }
    fn contains(&self, n: usize, x: &Elem) -> bool {
        code(x).is_some_and(|c| self.member_set.contains(&(n, c)))
    }
    fn compare(&self, n: usize, x: &Elem, y: &Elem) -> Ordering {
        let (a, b) = (code(x).unwrap(), code(y).unwrap());
        if a == b {
            Ordering::Equal
        } else if self.less.contains(&(n, a, b)) {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
    fn act(&self, f: &FinEmbedding, x: &Elem) -> Elem {
        // outside the encoded bounds the action is undefined; ⊤ is never a member
        code(x)
            .and_then(|c| self.act.get(&(f.clone(), c)))
            .map(|c| Elem::code_of(c.clone()))
            .unwrap_or(Elem::Top)
    }
    fn supp(&self, n: usize, x: &Elem) -> Vec<usize> {
        code(x)
            .and_then(|c| self.supp.get(&(n, c)).cloned())
            .unwrap_or_default()
    }
    fn preimage(&self, f: &FinEmbedding, y: &Elem) -> Option<Elem> {
        let c = code(y)?;
        self.back.get(&(f.clone(), c)).map(|c| Elem::code_of(c.clone()))
    }
    fn elements(&self, n: usize) -> Stream {
        let xs: Vec<Elem> = self
            .members
            .get(n)
            .map(|v| v.iter().map(|c| Elem::code_of(c.clone())).collect())
            .unwrap_or_default();
        stream::from_iter(xs)
    }
}

fn parse_line(line: &str, no: usize) -> Result<Vec<BigUint>> {
    let bad = |msg: &str| Error::Malformed { line: no, msg: msg.into() };
    let inner = line
        .strip_prefix('(')
        .and_then(|l| l.strip_suffix(')'))
        .ok_or_else(|| bad("expected a parenthesized tuple"))?;
    inner
        .split(',')
        .map(|f| f.trim().parse::<BigUint>().map_err(|_| bad("non-numeric field")))
        .collect()
}

fn small(b: &BigUint, no: usize) -> Result<usize> {
    b.to_usize()
        .filter(|&v| v < 1 << 16)
        .ok_or_else(|| Error::Malformed { line: no, msg: format!("field {b} out of range") })
}

pub fn decode_fragment(text: &str) -> Result<DecodedFragment> {
    let mut tuples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        tuples.push((i + 1, parse_line(line, i + 1)?));
    }
    let mut member_set: HashSet<(usize, BigUint)> = HashSet::new();
    let mut arity_bound = 0usize;
    for (no, t) in &tuples {
        let tag = small(&t[0], *no)?;
        let want = match tag {
            0 => 3,
            1..=3 => 4,
            _ => return Err(Error::Malformed { line: *no, msg: format!("unknown tag {tag}") }),
        };
        if t.len() != want {
            return Err(Error::Malformed { line: *no, msg: format!("tag {tag} needs {want} fields") });
        }
        if tag == 0 {
            let n = small(&t[1], *no)?;
            arity_bound = arity_bound.max(n);
            member_set.insert((n, t[2].clone()));
        }
    }
    let not_member = |no: usize, n: usize, c: &BigUint| {
        Error::Contradiction(format!("line {no}: {c} is not declared in D({n})"))
    };
    let mut less = HashSet::new();
    let mut act = HashMap::new();
    let mut back = HashMap::new();
    let mut supp = HashMap::new();
    for (no, t) in &tuples {
        match small(&t[0], *no)? {
            1 => {
                let n = small(&t[1], *no)?;
                for c in [&t[2], &t[3]] {
                    if !member_set.contains(&(n, c.clone())) {
                        return Err(not_member(*no, n, c));
                    }
                }
                if t[2] == t[3] {
                    return Err(Error::Contradiction(format!(
                        "line {no}: {} < {} breaks irreflexivity",
                        t[2], t[3]
                    )));
                }
                if less.contains(&(n, t[3].clone(), t[2].clone())) {
                    return Err(Error::Contradiction(format!(
                        "line {no}: {} < {} and {} < {} in D({n})",
                        t[2], t[3], t[3], t[2]
                    )));
                }
                less.insert((n, t[2].clone(), t[3].clone()));
            }
            2 => {
                let f = FinEmbedding::from_code(&t[1])
                    .map_err(|e| Error::Malformed { line: *no, msg: e.to_string() })?;
                let (m, k) = (f.domain(), f.codomain());
                if !member_set.contains(&(m, t[2].clone())) {
                    return Err(not_member(*no, m, &t[2]));
                }
                if !member_set.contains(&(k, t[3].clone())) {
                    return Err(not_member(*no, k, &t[3]));
                }
                let key = (f.clone(), t[2].clone());
                if act.get(&key).is_some_and(|v| v != &t[3]) {
                    return Err(Error::Contradiction(format!(
                        "line {no}: two values for D({f})({})",
                        t[2]
                    )));
                }
                act.insert(key, t[3].clone());
                let bkey = (f.clone(), t[3].clone());
                if back.get(&bkey).is_some_and(|v| v != &t[2]) {
                    return Err(Error::Contradiction(format!(
                        "line {no}: D({f}) is not injective at {}",
                        t[3]
                    )));
                }
                back.insert(bkey, t[2].clone());
            }
            3 => {
                let n = small(&t[1], *no)?;
                if !member_set.contains(&(n, t[2].clone())) {
                    return Err(not_member(*no, n, &t[2]));
                }
                let mask = &t[3];
                if mask.bits() > n as u64 {
                    return Err(Error::Malformed { line: *no, msg: format!("support {mask} ⊄ {n}") });
                }
                let a: Vec<usize> = (0..n).filter(|&i| mask.bit(i as u64)).collect();
                let key = (n, t[2].clone());
                if supp.get(&key).is_some_and(|v| v != &a) {
                    return Err(Error::Contradiction(format!("line {no}: two supports for {}", t[2])));
                }
                supp.insert(key, a);
            }
            _ => {}
        }
    }
    let mut members: Vec<Vec<BigUint>> = vec![Vec::new(); arity_bound + 1];
    for (n, c) in &member_set {
        members[*n].push(c.clone());
    }
    for (n, xs) in members.iter_mut().enumerate() {
        xs.sort();
        for (i, a) in xs.iter().enumerate() {
            for b in &xs[i + 1..] {
                let ab = less.contains(&(n, a.clone(), b.clone()));
                let ba = less.contains(&(n, b.clone(), a.clone()));
                if !ab && !ba {
                    return Err(Error::Contradiction(format!("{a} and {b} incomparable in D({n})")));
                }
            }
        }
    }
    let max_elems = members.iter().map(Vec::len).max().unwrap_or(0);
    let frag = Fragment { members, member_set, less, act, back, supp };
    Ok(DecodedFragment { predilator: Predilator::new(frag), arity_bound, max_elems })
}
