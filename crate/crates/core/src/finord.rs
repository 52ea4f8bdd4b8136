//! Finite orders `n = {0,…,n−1}`, strictly increasing maps between them and
//! finite subsets of arbitrary orders.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;

use crate::codec;
use crate::error::{Error, Result};
use crate::orders::Order;
use crate::Elem;

/// A strictly increasing map `m → k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FinEmbedding {
    cod: usize,
    values: Vec<usize>,
}

impl FinEmbedding {
    pub fn new(values: Vec<usize>, cod: usize) -> Result<Self> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotOrderPreserving(format!("{values:?}")));
        }
        if values.last().is_some_and(|&v| v >= cod) {
            return Err(Error::DomainMismatch(format!("{values:?} does not fit into {cod}")));
        }
        Ok(FinEmbedding { cod, values })
    }

    /// Caller guarantees the invariants.
    pub(crate) fn raw(values: Vec<usize>, cod: usize) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(values.iter().all(|&v| v < cod));
        FinEmbedding { cod, values }
    }

    pub fn identity(n: usize) -> Self {
        FinEmbedding::raw((0..n).collect(), n)
    }

    /// The inclusion of `m` into `k` as an initial segment.
    pub fn inclusion(m: usize, k: usize) -> Self {
        assert!(m <= k);
        FinEmbedding::raw((0..m).collect(), k)
    }

    /// `en_a` for a sorted subset `a` of `k`.
    pub fn from_subset(a: &[usize], k: usize) -> Self {
        FinEmbedding::raw(a.to_vec(), k)
    }

    pub fn domain(&self) -> usize {
        self.values.len()
    }

    pub fn codomain(&self) -> usize {
        self.cod
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    /// Position of `v` in the range, if it is there.
    pub fn preimage(&self, v: usize) -> Option<usize> {
        self.values.binary_search(&v).ok()
    }

    pub fn in_range(&self, v: usize) -> bool {
        self.preimage(v).is_some()
    }

    pub fn is_identity(&self) -> bool {
        self.cod == self.values.len()
    }

    /// `f ≤ g` pointwise.
    pub fn pointwise_le(&self, other: &FinEmbedding) -> bool {
        self.cod == other.cod
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// Image of a sorted subset of the domain.
    pub fn image(&self, a: &[usize]) -> Vec<usize> {
        a.iter().map(|&i| self.values[i]).collect()
    }

    /// Serialized as the code of the list `⟨k, f(0), …, f(m−1)⟩`.
    pub fn code(&self) -> BigUint {
        let mut items = vec![BigUint::from(self.cod)];
        items.extend(self.values.iter().map(|&v| BigUint::from(v)));
        codec::encode_seq(&items)
    }

    pub fn from_code(c: &BigUint) -> Result<Self> {
        let items = codec::decode_seq(c);
        let small: Option<Vec<usize>> = items
            .iter()
            .map(|b| usize::try_from(b).ok().filter(|&v| v < 1 << 20))
            .collect();
        let small = small.ok_or_else(|| Error::Parse(format!("embedding code {c} too large")))?;
        let (&cod, values) = small
            .split_first()
            .ok_or_else(|| Error::Parse(format!("embedding code {c} is empty")))?;
        FinEmbedding::new(values.to_vec(), cod)
    }
}

impl fmt::Display for FinEmbedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{}→{}", self.values, self.values.len(), self.cod)
    }
}

/// `g ∘ f`.
pub fn compose(g: &FinEmbedding, f: &FinEmbedding) -> Result<FinEmbedding> {
    if f.cod != g.domain() {
        return Err(Error::DomainMismatch(format!("cannot compose {g} after {f}")));
    }
    Ok(FinEmbedding::raw(
        f.values.iter().map(|&i| g.values[i]).collect(),
        g.cod,
    ))
}

/// All strictly increasing maps `m → k` in lexicographic order of value lists.
pub fn all_embeddings(m: usize, k: usize) -> Vec<FinEmbedding> {
    let mut out = Vec::new();
    if m > k {
        return out;
    }
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(FinEmbedding::raw(cur.clone(), k));
        // advance to the next m-combination of k
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < k - m + i {
                cur[i] += 1;
                for j in i + 1..m {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `|f|` for sorted subsets `a ⊆ b` of a common finite order, where `f` is
/// the inclusion: the positions of `a`'s elements inside `b`.
pub fn induced_inclusion(a: &[usize], b: &[usize]) -> Result<FinEmbedding> {
    let vals: Option<Vec<usize>> = a.iter().map(|x| b.binary_search(x).ok()).collect();
    let vals = vals.ok_or_else(|| Error::NotOrderPreserving(format!("{a:?} ⊄ {b:?}")))?;
    FinEmbedding::new(vals, b.len())
}

/// A finite subset of an order, sorted ascending in the carrier.
#[derive(Clone)]
pub struct FinSubset {
    carrier: Order,
    elements: Vec<Elem>,
}

impl FinSubset {
    pub fn new(carrier: Order, mut elements: Vec<Elem>) -> Result<Self> {
        for x in &elements {
            if !carrier.contains(x) {
                return Err(Error::NotMember(format!("{x} in {}", carrier.label())));
            }
        }
        elements.sort_by(|x, y| carrier.compare(x, y));
        if elements
            .windows(2)
            .any(|w| carrier.compare(&w[0], &w[1]) != Ordering::Less)
        {
            return Err(Error::Verification("duplicate subset element".into()));
        }
        Ok(FinSubset { carrier, elements })
    }

    pub fn carrier(&self) -> &Order {
        &self.carrier
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Bitmask over a finite carrier, length-prefixed sequence code otherwise.
    pub fn code(&self) -> BigUint {
        if let Some(size) = self.carrier.finite_size() {
            let mut mask = BigUint::from(0u32);
            for x in &self.elements {
                if let Some(i) = x.as_nat().filter(|&i| (i as usize) < size) {
                    mask.set_bit(i, true);
                }
            }
            mask
        } else {
            let mut items = vec![BigUint::from(self.elements.len())];
            items.extend(self.elements.iter().map(Elem::code));
            codec::encode_seq(&items)
        }
    }
}

/// `en_a : |a| → carrier`.
pub fn enum_map(a: &FinSubset) -> impl Fn(usize) -> Elem + '_ {
    move |i| a.elements[i].clone()
}

/// The unique `|f| : |a| → |b|` with `en_b ∘ |f| = f ∘ en_a`.
pub fn induced(a: &FinSubset, b: &FinSubset, f: impl Fn(&Elem) -> Elem) -> Result<FinEmbedding> {
    let mut vals = Vec::with_capacity(a.len());
    for x in &a.elements {
        let y = f(x);
        let pos = b
            .elements
            .binary_search_by(|z| b.carrier.compare(z, &y))
            .map_err(|_| Error::NotOrderPreserving(format!("{x} ↦ {y} lands outside b")))?;
        vals.push(pos);
    }
    FinEmbedding::new(vals, b.len())
}

/// Bitmask code of a subset of a finite order `n`.
pub fn subset_mask(a: &[usize]) -> BigUint {
    let mut mask = BigUint::from(0u32);
    for &i in a {
        mask.set_bit(i as u64, true);
    }
    mask
}
