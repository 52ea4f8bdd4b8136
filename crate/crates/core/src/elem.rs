//! Structured element values with canonical natural-number codes.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::codec;

/// An element of some order. Equality is structural; the order an element
/// belongs to decides how it compares.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Elem {
    Nat(u64),
    /// An opaque code, as produced by decoding a fragment file.
    Code(Arc<BigUint>),
    /// The new maximum of an order `X + 1`.
    Top,
    /// An element of `X` viewed inside `X + 1`.
    Old(Arc<Elem>),
    Pair(Arc<(Elem, Elem)>),
    Seq(Arc<[Elem]>),
}

impl Elem {
    pub fn nat(n: u64) -> Elem {
        Elem::Nat(n)
    }

    pub fn old(x: Elem) -> Elem {
        Elem::Old(Arc::new(x))
    }

    pub fn pair(a: Elem, b: Elem) -> Elem {
        Elem::Pair(Arc::new((a, b)))
    }

    pub fn seq(items: Vec<Elem>) -> Elem {
        Elem::Seq(items.into())
    }

    pub fn nats(items: &[u64]) -> Elem {
        Elem::seq(items.iter().map(|&n| Elem::Nat(n)).collect())
    }

    pub fn code_of(c: BigUint) -> Elem {
        Elem::Code(Arc::new(c))
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Elem::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Elem, &Elem)> {
        match self {
            Elem::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }

    pub fn as_seq(&self) -> Option<&[Elem]> {
        match self {
            Elem::Seq(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_old(&self) -> Option<&Elem> {
        match self {
            Elem::Old(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Elem::Top)
    }

    /// Sequence of naturals, if this is one.
    pub fn as_nat_seq(&self) -> Option<Vec<u64>> {
        self.as_seq()?.iter().map(Elem::as_nat).collect()
    }

    /// Canonical code: naturals are themselves, `Old(x)` is `pair(0, x)`,
    /// `Top` is `pair(1, 0)`, pairs use the pairing function and sequences
    /// the sequence code.
    pub fn code(&self) -> BigUint {
        match self {
            Elem::Nat(n) => BigUint::from(*n),
            Elem::Code(c) => (**c).clone(),
            Elem::Top => BigUint::from(1u32),
            Elem::Old(x) => codec::pair(&BigUint::from(0u32), &x.code()),
            Elem::Pair(p) => codec::pair(&p.0.code(), &p.1.code()),
            Elem::Seq(s) => codec::encode_seq(&s.iter().map(Elem::code).collect::<Vec<_>>()),
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Nat(n) => write!(f, "{n}"),
            Elem::Code(c) => write!(f, "#{c}"),
            Elem::Top => write!(f, "⊤"),
            Elem::Old(x) => write!(f, "↑{x}"),
            Elem::Pair(p) => write!(f, "({},{})", p.0, p.1),
            Elem::Seq(s) => {
                write!(f, "⟨")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "⟩")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_canonical() {
        assert_eq!(Elem::nats(&[]).code(), BigUint::from(0u32));
        assert_eq!(Elem::nats(&[1]).code(), BigUint::from(3u32));
        assert_eq!(Elem::pair(Elem::Nat(1), Elem::Nat(1)).code(), BigUint::from(4u32));
        assert_ne!(Elem::Top.code(), Elem::old(Elem::Nat(0)).code());
    }

    #[test]
    fn display() {
        assert_eq!(Elem::nats(&[1, 0]).to_string(), "⟨1,0⟩");
        assert_eq!(Elem::old(Elem::Top).to_string(), "↑⊤");
    }
}
