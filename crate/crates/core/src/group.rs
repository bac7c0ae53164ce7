//! Permutations of three states and the dihedral group D3.
//!
//! A [`PermutationElement`] is stored as a destination map: tracked band `k`
//! ends at position `dest[k]`. The printed form lists which starting band sits
//! at each position after the operation, so `μ1` prints as `"132"` and
//! `ρ1 = μ1 ∘ μ3` prints as `"231"`. Composition is right to left.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermutationElement {
    dest: [u8; 3],
}

impl PermutationElement {
    pub const IDENTITY: Self = Self { dest: [0, 1, 2] };

    /// From a 0-based destination map. `None` unless it is a bijection.
    pub fn from_dest(dest: [usize; 3]) -> Option<Self> {
        let mut seen = [false; 3];
        for &d in &dest {
            if d > 2 || seen[d] {
                return None;
            }
            seen[d] = true;
        }
        Some(Self { dest: dest.map(|d| d as u8) })
    }

    /// From the printed arrangement, 1-based (e.g. `[1, 3, 2]` for `μ1`).
    pub fn from_image(image: [usize; 3]) -> Option<Self> {
        if image.iter().any(|&v| !(1..=3).contains(&v)) {
            return None;
        }
        Self::from_dest(image.map(|v| v - 1)).map(|p| p.inverse())
    }

    pub fn dest(&self) -> [usize; 3] {
        self.dest.map(usize::from)
    }

    /// Printed arrangement, 1-based.
    pub fn image(&self) -> [usize; 3] {
        self.inverse().dest().map(|v| v + 1)
    }

    pub fn apply(&self, band: usize) -> usize {
        usize::from(self.dest[band])
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Self {
        Self { dest: other.dest.map(|k| self.dest[usize::from(k)]) }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = [0u8; 3];
        for (k, &d) in self.dest.iter().enumerate() {
            inv[usize::from(d)] = k as u8;
        }
        Self { dest: inv }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::IDENTITY, |acc, _| self.compose(&acc))
    }

    /// Smallest `n ≥ 1` with `self^n = e`.
    pub fn order(&self) -> u32 {
        (1..=6).find(|&n| self.pow(n) == Self::IDENTITY).unwrap_or(6)
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn sign(&self) -> i32 {
        let d = self.dest;
        let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| d[i] > d[j]).count();
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// `M[i][j] = 1` iff band `j` lands on position `i`.
    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (j, &i) in self.dest.iter().enumerate() {
            m[usize::from(i)][j] = 1.0;
        }
        m
    }

    pub fn identify(&self) -> D3Label {
        D3Label::ALL.into_iter().find(|l| l.element() == *self).expect("every permutation of three elements carries a D3 label")
    }

    pub fn all() -> [Self; 6] {
        D3Label::ALL.map(|l| l.element())
    }
}

impl fmt::Display for PermutationElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.image();
        write!(f, "{a}{b}{c}")
    }
}

impl FromStr for PermutationElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("123->").or_else(|| s.strip_prefix("123→")).unwrap_or(s);
        let digits: Vec<usize> = s.chars().filter_map(|c| c.to_digit(10).map(|d| d as usize)).collect();
        if digits.len() != 3 || s.chars().count() != 3 {
            return Err(Error::InvalidInput(format!("not a permutation string: {s:?}")));
        }
        Self::from_image([digits[0], digits[1], digits[2]]).ok_or_else(|| Error::InvalidInput(format!("not a permutation of 123: {s:?}")))
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for PermutationElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for PermutationElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum D3Label {
    E,
    Mu1,
    Mu2,
    Mu3,
    Rho1,
    Rho2,
}

impl D3Label {
    pub const ALL: [Self; 6] = [Self::E, Self::Mu1, Self::Mu2, Self::Mu3, Self::Rho1, Self::Rho2];

    pub fn element(self) -> PermutationElement {
        let image = match self {
            Self::E => [1, 2, 3],
            Self::Mu1 => [1, 3, 2],
            Self::Mu2 => [3, 2, 1],
            Self::Mu3 => [2, 1, 3],
            Self::Rho1 => [2, 3, 1],
            Self::Rho2 => [3, 1, 2],
        };
        PermutationElement::from_image(image).expect("static table is valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::E => "e",
            Self::Mu1 => "mu1",
            Self::Mu2 => "mu2",
            Self::Mu3 => "mu3",
            Self::Rho1 => "rho1",
            Self::Rho2 => "rho2",
        }
    }
}

impl fmt::Display for D3Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for D3Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown D3 label {s:?}")))
    }
}

/// Outcome of [`verify_group`].
#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    /// Distinct elements, in the order the Cayley table uses.
    pub elements: Vec<PermutationElement>,
    /// `cayley[i][j]` is the index of `elements[i] ∘ elements[j]`.
    pub cayley: Vec<Vec<usize>>,
    pub orders: Vec<u32>,
    /// A pair `(a, b)` with `a ∘ b ≠ b ∘ a`, if any.
    pub witness: Option<(PermutationElement, PermutationElement)>,
    pub is_abelian: bool,
}

impl GroupReport {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// True when the set is the full dihedral group D3.
    pub fn is_d3(&self) -> bool {
        self.order() == 6 && !self.is_abelian
    }
}

/// Check the group axioms exhaustively on a finite set of permutations.
pub fn verify_group(elements: &[PermutationElement]) -> Result<GroupReport> {
    let mut set: Vec<PermutationElement> = Vec::new();
    for e in elements {
        if !set.contains(e) {
            set.push(*e);
        }
    }
    if set.is_empty() {
        return Err(Error::NotAGroup("empty set".into()));
    }
    let index = |p: &PermutationElement| set.iter().position(|q| q == p);

    let mut cayley = Vec::with_capacity(set.len());
    for a in &set {
        let mut row = Vec::with_capacity(set.len());
        for b in &set {
            let ab = a.compose(b);
            let k = index(&ab).ok_or_else(|| Error::NotAGroup(format!("closure fails: {a} ∘ {b} = {ab} is missing")))?;
            row.push(k);
        }
        cayley.push(row);
    }

    let e = PermutationElement::IDENTITY;
    if index(&e).is_none() {
        return Err(Error::NotAGroup("identity is missing".into()));
    }
    for a in &set {
        if index(&a.inverse()).is_none() {
            return Err(Error::NotAGroup(format!("inverse of {a} is missing")));
        }
    }
    for a in &set {
        for b in &set {
            for c in &set {
                if a.compose(&b.compose(c)) != a.compose(b).compose(c) {
                    return Err(Error::NotAGroup(format!("associativity fails for ({a}, {b}, {c})")));
                }
            }
        }
    }
    for a in &set {
        let expected = match a.identify() {
            D3Label::E => 1,
            D3Label::Mu1 | D3Label::Mu2 | D3Label::Mu3 => 2,
            D3Label::Rho1 | D3Label::Rho2 => 3,
        };
        if a.order() != expected {
            return Err(Error::NotAGroup(format!("{a} has order {} instead of {expected}", a.order())));
        }
    }

    let mut witness = None;
    'outer: for a in &set {
        for b in &set {
            if a.compose(b) != b.compose(a) {
                witness = Some((*a, *b));
                break 'outer;
            }
        }
    }
    let orders = set.iter().map(|p| p.order()).collect();
    Ok(GroupReport { is_abelian: witness.is_none(), elements: set, cayley, orders, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use D3Label::*;

    #[test]
    fn labels_round_trip() {
        for l in D3Label::ALL {
            assert_eq!(l.element().identify(), l);
            assert_eq!(l.name().parse::<D3Label>().unwrap(), l);
        }
        assert_eq!(Mu1.element().to_string(), "132");
        assert_eq!("123->312".parse::<PermutationElement>().unwrap(), Rho2.element());
        assert!("122".parse::<PermutationElement>().is_err());
        assert!("1234".parse::<PermutationElement>().is_err());
    }

    #[test]
    fn printed_compositions() {
        assert_eq!(Mu1.element().compose(&Mu3.element()).identify(), Rho1);
        assert_eq!(Mu3.element().compose(&Mu1.element()).identify(), Rho2);
        assert_eq!(E.element().compose(&Mu2.element()).identify(), Mu2);
        let m3 = Mu3.element();
        assert_eq!(m3.compose(&Mu1.element().compose(&m3)).identify(), Mu2);
    }

    #[test]
    fn matrices() {
        assert_eq!(Mu1.element().to_matrix(), [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        assert_eq!(Rho2.element().to_matrix(), [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
    }

    #[test]
    fn subgroups() {
        let all = PermutationElement::all();
        let r = verify_group(&all).unwrap();
        assert!(r.is_d3());
        assert!(r.witness.is_some());
        let c3 = verify_group(&[E.element(), Rho1.element(), Rho2.element()]).unwrap();
        assert!(c3.is_abelian && c3.order() == 3);
        assert!(verify_group(&[E.element(), Mu1.element()]).is_ok());
        match verify_group(&[E.element(), Mu1.element(), Mu3.element()]) {
            Err(Error::NotAGroup(msg)) => assert!(msg.contains("closure")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(verify_group(&[Mu1.element()]).is_err());
    }

    #[test]
    fn signs_and_orders() {
        for l in [Mu1, Mu2, Mu3] {
            assert_eq!(l.element().sign(), -1);
            assert_eq!(l.element().order(), 2);
        }
        for l in [Rho1, Rho2] {
            assert_eq!(l.element().sign(), 1);
            assert_eq!(l.element().order(), 3);
        }
    }
}
